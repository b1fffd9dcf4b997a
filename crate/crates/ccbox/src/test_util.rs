//! Deterministic fixtures for unit tests: seeded rational boxes built
//! without any external randomness, so failures reproduce exactly.

use crate::boxes::{
    enumerate_deterministic_boxes, from_correlators, mix, BoxType, CcBox, CorrelatorForm,
    CHSH_SIGNS,
};
use crate::free_ops::{DetOp, LosrOp, WingDetOp};
use crate::scalar::Scalar;

/// Small multiplicative congruential step; returns the next draw.
pub fn lcg(state: &mut u64) -> u64 {
    *state = state
        .wrapping_mul(6364136223846793005)
        .wrapping_add(1442695040888963407);
    *state >> 33
}

/// The uniform 2222 box.
pub fn uniform_box() -> CcBox {
    CcBox::new(BoxType::b2222(), vec![Scalar::ratio(1, 4); 16]).unwrap()
}

/// The extremal box maximizing CHSH variant `k`: zero biases, correlators
/// equal to the variant's sign pattern.
pub fn pr_box_variant(k: usize) -> CcBox {
    let signs = CHSH_SIGNS[k];
    let c = |i: usize| Scalar::from_int(signs[i]);
    from_correlators(&CorrelatorForm::from_corr([
        [c(0), c(2)],
        [c(1), c(3)],
    ]))
    .unwrap()
}

/// A seeded random free box: a rational mixture of all 16 deterministic
/// boxes with weights drawn from a congruential generator.
pub fn random_rational_box(seed: u64) -> CcBox {
    let mut state = seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1);
    let det = enumerate_deterministic_boxes(BoxType::b2222()).unwrap();
    let raw: Vec<i64> = det.iter().map(|_| 1 + (lcg(&mut state) % 23) as i64).collect();
    let total: i64 = raw.iter().sum();
    let weights: Vec<Scalar> = raw.into_iter().map(|n| Scalar::ratio(n, total)).collect();
    mix(&det, &weights).unwrap()
}

/// A seeded random nonfree box: weight at least 11/16 on a random extremal
/// variant plus a random free remainder, so some CHSH variant exceeds 2.
pub fn random_nonfree_box(seed: u64) -> CcBox {
    let mut state = seed.wrapping_mul(0xd1342543de82ef95).wrapping_add(3);
    let k = (lcg(&mut state) % 8) as usize;
    let w = Scalar::ratio(11 + (lcg(&mut state) % 5) as i64, 16);
    let free_part = random_rational_box(lcg(&mut state));
    mix(
        &[pr_box_variant(k), free_part],
        &[w.clone(), Scalar::one().sub(&w)],
    )
    .unwrap()
}

/// A seeded random per-wing deterministic strategy map.
fn random_wing(
    state: &mut u64,
    src_settings: usize,
    src_outcomes: usize,
    dst_settings: usize,
    dst_outcomes: usize,
) -> WingDetOp {
    let pre = (0..dst_settings)
        .map(|_| (lcg(state) as usize) % src_settings)
        .collect();
    let post = (0..src_outcomes)
        .map(|_| {
            (0..dst_settings)
                .map(|_| (lcg(state) as usize) % dst_outcomes)
                .collect()
        })
        .collect();
    WingDetOp { pre, post }
}

/// A seeded random type-preserving deterministic operation on 2222 boxes.
pub fn random_det_op(seed: u64) -> DetOp {
    let mut state = seed.wrapping_mul(0xa0761d6478bd642f).wrapping_add(7);
    let ty = BoxType::b2222();
    DetOp::new(
        ty,
        ty,
        random_wing(&mut state, 2, 2, 2, 2),
        random_wing(&mut state, 2, 2, 2, 2),
    )
    .unwrap()
}

/// A seeded random free operation: one to four random deterministic terms
/// with rational weights summing to one.
pub fn random_losr_op(seed: u64) -> LosrOp {
    let mut state = seed.wrapping_mul(0xe7037ed1a0b428db).wrapping_add(11);
    let n = 1 + (lcg(&mut state) % 4) as usize;
    let raw: Vec<i64> = (0..n).map(|_| 1 + (lcg(&mut state) % 9) as i64).collect();
    let total: i64 = raw.iter().sum();
    let terms = raw
        .into_iter()
        .enumerate()
        .map(|(i, w)| {
            (
                crate::scalar::rat(w, total),
                random_det_op(lcg(&mut state).wrapping_add(i as u64)),
            )
        })
        .collect();
    LosrOp::new(terms).unwrap()
}
