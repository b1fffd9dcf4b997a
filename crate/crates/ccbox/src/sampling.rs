//! Seeded sampling of boxes and free operations.
//!
//! Every sample is exact: boxes are rational mixtures of no-signalling
//! polytope vertices — for type (2,2;2,2) the 16 deterministic boxes and
//! the 8 extremal CHSH-violating boxes — and operations carry rational
//! weights. The generator is a fixed-key stream cipher, so a seed pins
//! the whole sample sequence across platforms and runs: a failing
//! property test reproduces from its seed alone.
//!
//! Nonfree samples are constructed, not rejected into existence: a
//! random extremal box is mixed over a random base point with a weight
//! drawn beyond the exact facet-crossing threshold, which yields
//! violations of every magnitude while guaranteeing nonfreeness.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::boxes::{
    chsh, enumerate_deterministic_boxes, mix, violated_variant, BoxType, CcBox,
};
use crate::catalog::pr_box;
use crate::free_ops::{DetOp, LosrOp, WingDetOp};
use crate::scalar::{rat, Rat, Scalar};

/// Deterministic sampler over boxes and operations.
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    /// A sampler whose entire output stream is pinned by `seed`.
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Random rational weights for `n` items: positive, summing to one,
    /// with numerators up to `spread`.
    fn weights(&mut self, n: usize, spread: u64) -> Vec<Scalar> {
        let raw: Vec<i64> = (0..n)
            .map(|_| self.rng.gen_range(1..=spread) as i64)
            .collect();
        let total: i64 = raw.iter().sum();
        raw.into_iter().map(|p| Scalar::ratio(p, total)).collect()
    }

    /// `count` distinct indices below `n`, in random order.
    fn subset(&mut self, n: usize, count: usize) -> Vec<usize> {
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..count {
            let j = self.rng.gen_range(i..n);
            pool.swap(i, j);
        }
        pool.truncate(count);
        pool
    }

    /// A random exact point of the (2,2;2,2) no-signalling polytope:
    /// a rational mixture of 2–12 of its 24 vertices, so samples range
    /// from edge points near the extremes to well-mixed interior points.
    pub fn ns_box(&mut self) -> CcBox {
        let mut vertices = enumerate_deterministic_boxes(BoxType::b2222())
            .expect("2222 deterministic boxes enumerate");
        for k in 0..8 {
            vertices.push(pr_box(k).expect("extremal box index below 8"));
        }
        let count = self.rng.gen_range(2..=12);
        let picked: Vec<CcBox> = self
            .subset(vertices.len(), count)
            .into_iter()
            .map(|i| vertices[i].clone())
            .collect();
        let weights = self.weights(count, 23);
        mix(&picked, &weights).expect("mixture of valid boxes is valid")
    }

    /// A random exact free box: a rational mixture of 2–8 of the 16
    /// deterministic boxes.
    pub fn free_box(&mut self) -> CcBox {
        let det = enumerate_deterministic_boxes(BoxType::b2222())
            .expect("2222 deterministic boxes enumerate");
        let count = self.rng.gen_range(2..=8);
        let picked: Vec<CcBox> = self
            .subset(det.len(), count)
            .into_iter()
            .map(|i| det[i].clone())
            .collect();
        let weights = self.weights(count, 23);
        mix(&picked, &weights).expect("mixture of valid boxes is valid")
    }

    /// A random exact nonfree box violating a uniformly chosen facet.
    ///
    /// Mixing the facet's extremal box (value 4) over a base point with
    /// value s crosses the facet at weight (2−s)/(4−s); the weight is
    /// drawn strictly beyond that threshold, so the violation magnitude
    /// varies freely but never vanishes.
    pub fn nonfree_box(&mut self) -> CcBox {
        let k = self.rng.gen_range(0..8usize);
        let extremal = pr_box(k).expect("extremal box index below 8");
        let base = self.ns_box();
        let s = chsh(&base, k)
            .expect("2222 box has CHSH values")
            .rationalize();
        let threshold = {
            let t = (rat(2, 1) - &s) / (rat(4, 1) - &s);
            if t < rat(0, 1) {
                rat(0, 1)
            } else {
                t
            }
        };
        let u = rat(self.rng.gen_range(1..=64), 64);
        let w = &threshold + u * (rat(1, 1) - &threshold);
        let complement = rat(1, 1) - &w;
        let b = mix(
            &[extremal, base],
            &[Scalar::from_rat(w), Scalar::from_rat(complement)],
        )
        .expect("mixture of valid boxes is valid");
        debug_assert_eq!(
            violated_variant(&b).expect("exact box classifies"),
            Some(k)
        );
        b
    }

    /// A random locally deterministic operation between the given types.
    pub fn det_op(&mut self, src: BoxType, dst: BoxType) -> DetOp {
        let wing_a = self.wing(src.s_card, src.x_card, dst.s_card, dst.x_card);
        let wing_b = self.wing(src.t_card, src.y_card, dst.t_card, dst.y_card);
        DetOp::new(src, dst, wing_a, wing_b).expect("sampled wings match the given types")
    }

    fn wing(
        &mut self,
        src_settings: usize,
        src_outcomes: usize,
        dst_settings: usize,
        dst_outcomes: usize,
    ) -> WingDetOp {
        let pre = (0..dst_settings)
            .map(|_| self.rng.gen_range(0..src_settings))
            .collect();
        let post = (0..src_outcomes)
            .map(|_| {
                (0..dst_settings)
                    .map(|_| self.rng.gen_range(0..dst_outcomes))
                    .collect()
            })
            .collect();
        WingDetOp { pre, post }
    }

    /// A random free operation: one to `max_terms` deterministic terms
    /// mixed with random rational weights.
    pub fn losr_op(&mut self, src: BoxType, dst: BoxType, max_terms: usize) -> LosrOp {
        let n = self.rng.gen_range(1..=max_terms.max(1));
        let weights = self.weights(n, 9);
        let terms = weights
            .into_iter()
            .map(|w| (w.rationalize(), self.det_op(src, dst)))
            .collect();
        LosrOp::new(terms).expect("sampled terms form a valid mixture")
    }

    /// A uniform index below `n`.
    pub fn index(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }

    /// A uniform random rational in [0, 1] with denominator 2..=`max_den`.
    pub fn unit_rational(&mut self, max_den: i64) -> Rat {
        let q = self.rng.gen_range(2..=max_den.max(2));
        let p = self.rng.gen_range(0..=q);
        rat(p, q)
    }

    /// A random small scenario type: 1–2 settings and 2–3 outcomes per
    /// wing, keeping deterministic-operation enumerations desk-sized.
    pub fn small_type(&mut self) -> BoxType {
        BoxType::new(
            self.rng.gen_range(2..=3),
            self.rng.gen_range(2..=3),
            self.rng.gen_range(1..=2),
            self.rng.gen_range(1..=2),
        )
        .expect("positive cardinalities form a type")
    }
}
