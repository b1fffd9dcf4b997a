//! Named boxes used throughout the crate and its command-line tool.
//!
//! All boxes here are (2,2;2,2) common-cause boxes, specified through their
//! correlator form (wing biases ⟨A_s⟩, ⟨B_t⟩ and correlators ⟨A_sB_t⟩):
//!
//! * the eight PR boxes `pr_box(k)`, each violating exactly one CHSH variant
//!   at the algebraic maximum 4;
//! * the noisy-PR chain `noisy_pr(α) = α·PR + (1−α)·l_npr_b()` interpolating
//!   from the boundary box `l_npr_b()` (correlators ½,½,½,−½) at α = 0 to the
//!   canonical PR box at α = 1, with CHSH value 2α + 2;
//! * the trivial box `l_empty()` (all biases and correlators zero);
//! * three free boxes with maximal CHSH value 2 (`table3_box`) and their
//!   half-and-half mixtures with `noisy_pr(1/2)` (`table3_mixture`), which
//!   exhibit the incompleteness of the standard monotone pair;
//! * quantum-realizable boxes: `tsirelson()` (correlators ±√2/2), `hardy()`
//!   (the box with the Hardy-paradox zero P(1,1|1,1) = 0), and the `tilted(θ)`
//!   family that maximizes tilted CHSH functionals, interpolating from a free
//!   box at θ = 0 to the Tsirelson box at θ = π/2.
//!
//! Rational-parameter boxes are built exactly; the quantum boxes carry
//! double-precision entries wrapped as `Scalar::Approx` with tolerance
//! [`QUANTUM_TOL`]. Constructions are deterministic, and every builder
//! revalidates its output through the full box checks (normalization,
//! positivity, no-signalling).

use crate::boxes::{from_correlators, violated_variant, CcBox, CorrelatorForm};
use crate::error::{Error, Result};
use crate::free_ops::{apply_det, subgroup_closure, variant_permuting_generators};
use crate::scalar::Scalar;

/// Tolerance attached to entries of the quantum catalog boxes.
///
/// Their double-precision entries are accurate to a few ulps (≲ 1e-15); the
/// stored tolerance is deliberately looser so that downstream tolerance
/// arithmetic stays honest without being noisy.
pub const QUANTUM_TOL: f64 = 1e-9;

/// Approximate scalar carrying the standard quantum-catalog tolerance.
fn q(value: f64) -> Scalar {
    Scalar::approx(value, QUANTUM_TOL).expect("catalog constants are finite")
}

/// The canonical PR box: zero biases, correlators (+1, +1, +1, −1).
fn canonical_pr() -> CcBox {
    let one = Scalar::one();
    from_correlators(&CorrelatorForm::from_corr([
        [one.clone(), one.clone()],
        [one, Scalar::from_int(-1)],
    ]))
    .expect("canonical PR box is valid")
}

/// All eight PR boxes, indexed by the CHSH variant each one violates.
///
/// The boxes are produced as the orbit of the canonical PR box under the
/// order-8 variant-permuting symmetry subgroup, then sorted by violated
/// variant; this keeps a single source of truth for the PR correlator signs.
pub fn pr_variants() -> Result<Vec<CcBox>> {
    let canonical = canonical_pr();
    let mut variants: Vec<Option<CcBox>> = vec![None; 8];
    for g in subgroup_closure(&variant_permuting_generators())? {
        let image = apply_det(&g, &canonical)?;
        let k = violated_variant(&image)?.ok_or_else(|| {
            Error::Internal("PR-box symmetry image violates no CHSH variant".into())
        })?;
        variants[k] = Some(image);
    }
    variants
        .into_iter()
        .map(|v| {
            v.ok_or_else(|| Error::Internal("PR-box orbit misses a CHSH variant".into()))
        })
        .collect()
}

/// The PR box violating CHSH variant `k` (0 ≤ k ≤ 7) at value exactly 4.
pub fn pr_box(k: usize) -> Result<CcBox> {
    if k >= 8 {
        return Err(Error::BadParameter(format!(
            "PR-box variant index must be 0..=7, got {k}"
        )));
    }
    Ok(pr_variants()?.swap_remove(k))
}

/// The boundary box of the noisy-PR chain: zero biases, correlators
/// (½, ½, ½, −½). Equals the uniform mixture of the eight deterministic
/// boxes with CHSH value 2 at variant 0, and sits on the free set's
/// CHSH-facet directly below the canonical PR box.
pub fn l_npr_b() -> CcBox {
    let h = Scalar::ratio(1, 2);
    from_correlators(&CorrelatorForm::from_corr([
        [h.clone(), h.clone()],
        [h.clone(), h.neg()],
    ]))
    .expect("boundary box is valid")
}

/// The trivial box: uniform outcomes, all biases and correlators zero.
pub fn l_empty() -> CcBox {
    from_correlators(&CorrelatorForm::zero()).expect("trivial box is valid")
}

/// The noisy-PR chain C(α) = α·PR + (1−α)·`l_npr_b()` for α ∈ [0, 1]:
/// zero biases, correlators ((α+1)/2, (α+1)/2, (α+1)/2, −(α+1)/2), CHSH
/// value 2α + 2 at variant 0. Exact whenever α is exact.
pub fn noisy_pr(alpha: &Scalar) -> Result<CcBox> {
    let zero = num_traits::Zero::zero();
    if !alpha.ge_with_slack(&zero) || !Scalar::one().sub(alpha).ge_with_slack(&zero) {
        return Err(Error::BadParameter(format!(
            "noisy-PR mixing weight must lie in [0,1], got {alpha}"
        )));
    }
    let c = alpha.add(&Scalar::one()).mul(&Scalar::ratio(1, 2));
    from_correlators(&CorrelatorForm::from_corr([
        [c.clone(), c.clone()],
        [c.clone(), c.neg()],
    ]))
}

/// Three free boxes with maximal CHSH value 2, used (through their noisy
/// mixtures) to show that the pair of standard monotones orders some pairs
/// of boxes that the conversion preorder leaves incomparable.
///
/// * `1`: the deterministic box with both outcomes pinned to 0 — all biases
///   and correlators +1.
/// * `2`: zero biases, correlators (1, 1, 0, 0) (perfect correlation at
///   t = 0, none at t = 1).
/// * `3`: zero biases, correlators (1, 0, 1, 0) (perfect correlation under
///   s = 0, none under s = 1).
pub fn table3_box(which: usize) -> Result<CcBox> {
    let one = Scalar::one;
    let zero = Scalar::zero;
    let form = match which {
        1 => CorrelatorForm::new(
            [one(), one()],
            [one(), one()],
            [[one(), one()], [one(), one()]],
        ),
        2 => CorrelatorForm::from_corr([[one(), zero()], [one(), zero()]]),
        3 => CorrelatorForm::from_corr([[one(), one()], [zero(), zero()]]),
        _ => {
            return Err(Error::BadParameter(format!(
                "selector must be 1, 2, or 3, got {which}"
            )))
        }
    };
    from_correlators(&form)
}

/// The half-and-half mixture of `table3_box(which)` with `noisy_pr(1/2)`.
/// All three mixtures share the same standard monotone values, yet the first
/// strictly dominates the second in the conversion preorder while the second
/// and third are incomparable.
pub fn table3_mixture(which: usize) -> Result<CcBox> {
    let anchor = table3_box(which)?;
    let chain = noisy_pr(&Scalar::ratio(1, 2))?;
    crate::boxes::mix(
        &[anchor, chain],
        &[Scalar::ratio(1, 2), Scalar::ratio(1, 2)],
    )
}

/// Correlator form of the Tsirelson box: zero biases, correlators
/// (√2/2, √2/2, √2/2, −√2/2). Maximizes CHSH over quantum boxes at 2√2.
pub fn tsirelson() -> CcBox {
    let c = std::f64::consts::FRAC_1_SQRT_2;
    from_correlators(&CorrelatorForm::from_corr([
        [q(c), q(c)],
        [q(c), q(-c)],
    ]))
    .expect("Tsirelson box is valid")
}

/// The Hardy box: the quantum box exhibiting the Hardy paradox, with
/// P(1,1|1,1) = 0 yet nonzero CHSH violation. Biases
/// ⟨A₀⟩ = ⟨B₀⟩ = 5−2√5, ⟨A₁⟩ = ⟨B₁⟩ = √5−2; correlators
/// ⟨A₀B₀⟩ = 6√5−13, ⟨A₁B₀⟩ = ⟨A₀B₁⟩ = 3√5−6, ⟨A₁B₁⟩ = 2√5−5.
pub fn hardy() -> CcBox {
    let s5 = 5.0_f64.sqrt();
    let a0 = 5.0 - 2.0 * s5;
    let a1 = s5 - 2.0;
    from_correlators(&CorrelatorForm::new(
        [q(a0), q(a1)],
        [q(a0), q(a1)],
        [
            [q(6.0 * s5 - 13.0), q(3.0 * s5 - 6.0)],
            [q(3.0 * s5 - 6.0), q(2.0 * s5 - 5.0)],
        ],
    ))
    .expect("Hardy box is valid")
}

/// The tilted family: for θ ∈ [0, π/2], with ξ = √(sin²θ + 1), the quantum
/// box with biases ⟨A₀⟩ = cos θ, ⟨A₁⟩ = 0, ⟨B₀⟩ = ⟨B₁⟩ = cos θ / ξ and
/// correlators ⟨A₀B₀⟩ = ⟨A₀B₁⟩ = 1/ξ, ⟨A₁B₀⟩ = −⟨A₁B₁⟩ = sin²θ/ξ.
///
/// Each member maximizes a tilted CHSH functional; `tilted(0)` is free while
/// `tilted(π/2)` equals the Tsirelson box, and the CHSH-based and noisy-PR
/// cost monotones move in opposite directions along the family.
pub fn tilted(theta: &Scalar) -> Result<CcBox> {
    let (v, tol) = theta.value_tol();
    let slack = tol + 4.0 * f64::EPSILON;
    if !v.is_finite() || v < -slack || v > std::f64::consts::FRAC_PI_2 + slack {
        return Err(Error::BadParameter(format!(
            "tilt angle must lie in [0, π/2], got {theta}"
        )));
    }
    let v = v.clamp(0.0, std::f64::consts::FRAC_PI_2);
    let (sin, cos) = v.sin_cos();
    let xi = (sin * sin + 1.0).sqrt();
    from_correlators(&CorrelatorForm::new(
        [q(cos), q(0.0)],
        [q(cos / xi), q(cos / xi)],
        [
            [q(1.0 / xi), q(1.0 / xi)],
            [q(sin * sin / xi), q(-(sin * sin) / xi)],
        ],
    ))
}
