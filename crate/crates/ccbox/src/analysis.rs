//! Structure of the conversion preorder: sensitivity, equivalence
//! classes, a two-parameter mixture family, and chain/antichain
//! certification.
//!
//! The central object is the family R(α,γ) = γ·A + (1−γ)·C(α), mixing a
//! boundary anchor A — a free box that saturates the canonical CHSH value
//! 2 and has a vanishing probability entry — with the noisy-PR chain box
//! C(α). On this family the two monotones take closed forms,
//! M_CHSH = 2α(1−γ) + 2 and M_NPR = 2α + 2, which makes the family a
//! sharp probe of the preorder: points with crossing monotone values are
//! certifiably incomparable, and triples of family points witness that
//! incomparability is not transitive.
//!
//! Sensitivity asks whether a box lies outside the convex hull of its
//! images under every type-preserving deterministic operation that is
//! not a symmetry; one feasibility program decides it, and the
//! certificate is verified either way. A sensitive box is removed from
//! its equivalence class by every such operation, so its class collapses
//! to its symmetry orbit — computed by [`equivalence_class`]. At the
//! opposite extreme, a nonfree box all of whose non-symmetry images are
//! free can only be reached from its own orbit, placing it at the top of
//! the preorder; [`top_of_quantum_order_check`] verifies both that
//! mechanism and its order-level consequence against candidate boxes.

use num_traits::Zero;
use rayon::prelude::*;

use crate::boxes::{chsh, is_free, mix, CcBox, DEFAULT_ENUM_CAP};
use crate::catalog::{noisy_pr, table3_box};
use crate::error::{Error, Result};
use crate::free_ops::{enumerate_lso, is_symmetry, orbit};
use crate::monotones::{m_chsh_closed, m_npr_closed, MonotoneValue};
use crate::ordering::{
    approx_margin, box_from_image_table, classify, distinct_image_tables_filtered,
    hull_certificate, image_tol_for, FeasibilityCertificate, OrderingRelation,
};
use crate::scalar::{rat, Rat, Scalar};

/// A point R(α,γ) = γ·anchor + (1−γ)·C(α) of the two-parameter family
/// over a boundary anchor.
#[derive(Clone, Debug)]
pub struct FamilyPoint {
    /// Chain coordinate: the PR weight inside the noisy-PR component.
    pub alpha: Scalar,
    /// Anchor weight of the outer mixture.
    pub gamma: Scalar,
    /// The boundary anchor (validated on construction).
    pub anchor: CcBox,
}

impl FamilyPoint {
    /// Builds a family point, validating the anchor and requiring both
    /// coordinates to lie in [0, 1].
    pub fn new(alpha: Scalar, gamma: Scalar, anchor: CcBox) -> Result<Self> {
        validate_anchor(&anchor)?;
        let zero = Rat::zero();
        for (name, v) in [("alpha", &alpha), ("gamma", &gamma)] {
            if !v.ge_with_slack(&zero) || !Scalar::one().sub(v).ge_with_slack(&zero) {
                return Err(Error::BadParameter(format!(
                    "family coordinate {name} must lie in [0,1], got {v}"
                )));
            }
        }
        Ok(Self {
            alpha,
            gamma,
            anchor,
        })
    }

    /// The box γ·anchor + (1−γ)·C(α).
    pub fn realize(&self) -> Result<CcBox> {
        let chain = noisy_pr(&self.alpha)?;
        let complement = Scalar::one().sub(&self.gamma);
        mix(
            &[self.anchor.clone(), chain],
            &[self.gamma.clone(), complement],
        )
    }
}

/// Checks the anchor conditions for the mixture family: type (2,2;2,2),
/// canonical CHSH value exactly 2, at least one vanishing probability
/// entry (the no-signalling boundary), and freeness.
///
/// For exact anchors the first two conditions already force freeness —
/// saturating one CHSH facet caps every other variant at 2 — so the
/// explicit free check is defence in depth for approximate anchors,
/// where the saturation test carries tolerance slack.
pub fn validate_anchor(anchor: &CcBox) -> Result<()> {
    if !anchor.ty().is_2222() {
        return Err(Error::BadAnchor(format!(
            "anchor must have type (2,2;2,2), found {}",
            anchor.ty()
        )));
    }
    let value = chsh(anchor, 0)?;
    if !value.eq_with_slack(&rat(2, 1)) {
        return Err(Error::BadAnchor(format!(
            "anchor must saturate the canonical CHSH value 2, found {value}"
        )));
    }
    if !anchor
        .entries()
        .iter()
        .any(|e| e.eq_with_slack(&Rat::zero()))
    {
        return Err(Error::BadAnchor(
            "anchor must touch the no-signalling boundary: no vanishing entry".into(),
        ));
    }
    if !is_free(anchor)? {
        return Err(Error::BadAnchor("anchor must be a free box".into()));
    }
    Ok(())
}

/// Realizes the family point R(α,γ) over `anchor`.
pub fn family_point(alpha: &Scalar, gamma: &Scalar, anchor: &CcBox) -> Result<CcBox> {
    FamilyPoint::new(alpha.clone(), gamma.clone(), anchor.clone())?.realize()
}

/// One row of [`family_monotone_grid`].
#[derive(Clone, Debug)]
pub struct FamilyGridRow {
    /// Chain coordinate of the point.
    pub alpha: Scalar,
    /// Anchor weight of the point.
    pub gamma: Scalar,
    /// Yield monotone at the point; 2α(1−γ) + 2 on exact inputs.
    pub m_chsh: Scalar,
    /// Cost monotone at the point; 2α + 2 on exact inputs.
    pub m_npr: Scalar,
}

/// Evaluates both monotones on an n×n interior grid of family points,
/// α, γ ∈ {i/(n+1) : 1 ≤ i ≤ n}, in row-major order with α outermost.
///
/// The grid stays interior in γ because at γ = 1 the point degenerates
/// to the free anchor, where the cost closed form 2α + 2 no longer
/// applies.
pub fn family_monotone_grid(anchor: &CcBox, grid: usize) -> Result<Vec<FamilyGridRow>> {
    validate_anchor(anchor)?;
    if grid == 0 {
        return Err(Error::BadParameter(
            "grid must have at least one point per axis".into(),
        ));
    }
    let steps: Vec<Scalar> = (1..=grid)
        .map(|i| Scalar::from_rat(rat(i as i64, grid as i64 + 1)))
        .collect();
    let points: Vec<(Scalar, Scalar)> = steps
        .iter()
        .flat_map(|a| steps.iter().map(move |g| (a.clone(), g.clone())))
        .collect();
    points
        .into_par_iter()
        .map(|(alpha, gamma)| {
            let b = family_point(&alpha, &gamma, anchor)?;
            let m_chsh = finite(m_chsh_closed(&b)?)?;
            let m_npr = finite(m_npr_closed(&b)?.0)?;
            Ok(FamilyGridRow {
                alpha,
                gamma,
                m_chsh,
                m_npr,
            })
        })
        .collect()
}

fn finite(v: MonotoneValue) -> Result<Scalar> {
    v.finite()
        .cloned()
        .ok_or_else(|| Error::Internal("family monotone value must be finite".into()))
}

/// Does `b` lie outside the convex hull of its images under all
/// type-preserving deterministic operations that are not symmetries?
///
/// One feasibility program over the deduplicated images decides the
/// question. The certificate carries verified mixture weights when the
/// box is inside the hull (not sensitive) and a verified separating
/// functional when it is outside (sensitive).
pub fn is_sensitive_capped(b: &CcBox, cap: u64) -> Result<(bool, FeasibilityCertificate)> {
    let images = distinct_image_tables_filtered(b, b.ty(), cap, |op| !is_symmetry(op))?;
    let margin = if b.is_exact() {
        None
    } else {
        Some(approx_margin(b, b))
    };
    let cert = hull_certificate(&images, b, margin)?;
    Ok((!cert.feasible, cert))
}

/// [`is_sensitive_capped`] with the default enumeration cap.
pub fn is_sensitive(b: &CcBox) -> Result<(bool, FeasibilityCertificate)> {
    is_sensitive_capped(b, DEFAULT_ENUM_CAP)
}

/// The equivalence class of a nonfree (2,2;2,2) box: its orbit under the
/// local symmetry group.
///
/// Every nonfree box of this type is sensitive, hence removed from its
/// class by every non-symmetry deterministic operation, so the class
/// under general free operations collapses to the symmetry orbit. Free
/// boxes form a single class with no finite orbit description and are
/// rejected as [`Error::FreeBoxClass`].
pub fn equivalence_class(b: &CcBox) -> Result<Vec<CcBox>> {
    if !b.ty().is_2222() {
        return Err(Error::WrongType {
            expected: "(2,2;2,2)".into(),
            found: b.ty().to_string(),
        });
    }
    if is_free(b)? {
        return Err(Error::FreeBoxClass);
    }
    orbit(b, &enumerate_lso(b.ty())?)
}

/// Classifies every unordered pair, distributing pairs across the thread
/// pool; results are merged in pair order.
fn pairwise(boxes: &[CcBox]) -> Result<Vec<OrderingRelation>> {
    let pairs: Vec<(usize, usize)> = (0..boxes.len())
        .flat_map(|i| (i + 1..boxes.len()).map(move |j| (i, j)))
        .collect();
    pairs
        .into_par_iter()
        .map(|(i, j)| classify(&boxes[i], &boxes[j]))
        .collect()
}

/// Is every pair of the given boxes incomparable?
pub fn certify_antichain(boxes: &[CcBox]) -> Result<bool> {
    Ok(pairwise(boxes)?
        .iter()
        .all(|r| *r == OrderingRelation::Incomparable))
}

/// Is every pair of the given boxes strictly ordered, in one direction
/// or the other?
pub fn certify_chain(boxes: &[CcBox]) -> Result<bool> {
    Ok(pairwise(boxes)?.iter().all(|r| {
        matches!(
            r,
            OrderingRelation::StrictlyAbove | OrderingRelation::StrictlyBelow
        )
    }))
}

/// Three family points (R₁, R₂, R₃) over the all-ones anchor witnessing
/// that incomparability is not transitive: R₁ ∥ R₂ and R₃ ∥ R₂, yet R₁
/// sits strictly above R₃.
///
/// Coordinates: R₁ = R(4/5, 3/10), R₂ = R(19/20, 13/20),
/// R₃ = R(4/5, 11/20). R₁ and R₂ have crossing monotone values (R₁ wins
/// on yield, R₂ on cost), R₃ shares its cost with R₁ but is a further
/// anchor-ward mixture of it. All three classifications are re-verified
/// by the conversion programs before the triple is returned.
pub fn non_transitivity_witness() -> Result<(CcBox, CcBox, CcBox)> {
    let anchor = table3_box(1)?;
    let point =
        |p: Rat, g: Rat| family_point(&Scalar::from_rat(p), &Scalar::from_rat(g), &anchor);
    let r1 = point(rat(4, 5), rat(3, 10))?;
    let r2 = point(rat(19, 20), rat(13, 20))?;
    let r3 = point(rat(4, 5), rat(11, 20))?;
    let checks = [
        (&r1, &r2, OrderingRelation::Incomparable, "R1 vs R2"),
        (&r3, &r2, OrderingRelation::Incomparable, "R3 vs R2"),
        (&r1, &r3, OrderingRelation::StrictlyAbove, "R1 vs R3"),
    ];
    checks
        .into_par_iter()
        .try_for_each(|(a, b, expected, label)| {
            let got = classify(a, b)?;
            if got == expected {
                Ok(())
            } else {
                Err(Error::Internal(format!(
                    "non-transitivity witness: {label} classified {got:?}, expected {expected:?}"
                )))
            }
        })?;
    Ok((r1, r2, r3))
}

/// Is every non-symmetry deterministic image of `b` free?
///
/// Exact boxes require every image to verify as free outright. For
/// approximate boxes, an image whose rationalization hugs the local
/// boundary within its soundness margin cannot be called nonfree either
/// way and counts as passing; only a sound nonfree verdict fails the
/// check.
pub fn nonsymmetry_images_free_capped(b: &CcBox, cap: u64) -> Result<bool> {
    let tables = distinct_image_tables_filtered(b, b.ty(), cap, |op| !is_symmetry(op))?;
    let tol = image_tol_for(b);
    let exact = b.is_exact();
    let verdicts: Vec<bool> = tables
        .into_par_iter()
        .map(|(table, _)| {
            let img = box_from_image_table(b.ty(), table, tol)?;
            match is_free(&img) {
                Ok(v) => Ok(v),
                Err(Error::ApproxUnsound { .. }) if !exact => Ok(true),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;
    Ok(verdicts.into_iter().all(|v| v))
}

/// [`nonsymmetry_images_free_capped`] with the default enumeration cap.
pub fn nonsymmetry_images_free(b: &CcBox) -> Result<bool> {
    nonsymmetry_images_free_capped(b, DEFAULT_ENUM_CAP)
}

/// Does `b` sit at the top of the preorder relative to `candidates`?
///
/// Two checks must pass. Order-level: no candidate classifies strictly
/// above `b`. Mechanism: every non-symmetry deterministic image of `b`
/// is free, so no box outside `b`'s own symmetry orbit converts to it.
pub fn top_of_quantum_order_check(b: &CcBox, candidates: &[CcBox]) -> Result<bool> {
    for cand in candidates {
        if classify(cand, b)? == OrderingRelation::StrictlyAbove {
            return Ok(false);
        }
    }
    nonsymmetry_images_free(b)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use num_traits::One;

    use super::*;
    use crate::catalog::{l_empty, l_npr_b, pr_box, table3_mixture, tilted, tsirelson};
    use crate::free_ops::apply_det;
    use crate::test_util::{pr_box_variant, random_det_op, random_nonfree_box, uniform_box};

    fn fam(a: (i64, i64), g: (i64, i64), anchor: &CcBox) -> CcBox {
        family_point(&Scalar::ratio(a.0, a.1), &Scalar::ratio(g.0, g.1), anchor)
            .expect("family point")
    }

    fn chsh_value(b: &CcBox) -> Rat {
        finite(m_chsh_closed(b).expect("yield")).expect("finite").rationalize()
    }

    fn npr_value(b: &CcBox) -> Rat {
        finite(m_npr_closed(b).expect("cost").0).expect("finite").rationalize()
    }

    #[test]
    fn family_endpoints_recover_catalog_boxes() {
        let anchor = table3_box(1).unwrap();
        let pr = fam((1, 1), (0, 1), &anchor);
        assert_eq!(pr.rational_key(), pr_box(0).unwrap().rational_key());
        let back = fam((0, 1), (1, 1), &anchor);
        assert_eq!(back.rational_key(), anchor.rational_key());
        let center = fam((1, 2), (1, 2), &anchor);
        assert_eq!(
            center.rational_key(),
            table3_mixture(1).unwrap().rational_key()
        );
        assert_eq!(chsh_value(&center), rat(5, 2));
        assert_eq!(npr_value(&center), rat(3, 1));
    }

    #[test]
    fn grid_matches_closed_forms_on_three_anchors() {
        for which in 1..=3 {
            let anchor = table3_box(which).unwrap();
            let rows = family_monotone_grid(&anchor, 4).unwrap();
            assert_eq!(rows.len(), 16);
            for row in rows {
                let a = row.alpha.rationalize();
                let g = row.gamma.rationalize();
                let yield_form = rat(2, 1) * &a * (Rat::one() - &g) + rat(2, 1);
                let cost_form = rat(2, 1) * &a + rat(2, 1);
                assert_eq!(row.m_chsh.rationalize(), yield_form, "anchor {which}");
                assert_eq!(row.m_npr.rationalize(), cost_form, "anchor {which}");
            }
        }
    }

    #[test]
    fn anchors_are_validated() {
        // Uniform box: does not saturate the canonical CHSH value.
        assert!(matches!(
            validate_anchor(&uniform_box()),
            Err(Error::BadAnchor(_))
        ));
        // PR box: CHSH value 4, not 2.
        assert!(matches!(
            validate_anchor(&pr_box_variant(0)),
            Err(Error::BadAnchor(_))
        ));
        // Saturating box with full support: misses the boundary condition.
        assert!(matches!(
            validate_anchor(&l_npr_b()),
            Err(Error::BadAnchor(_))
        ));
        for which in 1..=3 {
            validate_anchor(&table3_box(which).unwrap()).unwrap();
        }
        // Family coordinates outside [0,1] are rejected.
        assert!(matches!(
            family_point(
                &Scalar::ratio(3, 2),
                &Scalar::zero(),
                &table3_box(1).unwrap()
            ),
            Err(Error::BadParameter(_))
        ));
    }

    #[test]
    fn pr_is_sensitive_uniform_is_not() {
        let (sensitive, cert) = is_sensitive(&pr_box_variant(0)).unwrap();
        assert!(sensitive, "the PR box is a sensitive resource");
        assert!(!cert.feasible);
        assert!(cert.witness.is_some());

        let (sensitive, cert) = is_sensitive(&uniform_box()).unwrap();
        assert!(!sensitive, "the uniform box lies in its own image hull");
        assert!(cert.feasible);
        assert!(cert.weights.is_some());
    }

    #[test]
    fn random_nonfree_boxes_are_sensitive() {
        for seed in [3, 17] {
            let b = random_nonfree_box(seed);
            let (sensitive, _) = is_sensitive(&b).unwrap();
            assert!(sensitive, "nonfree box (seed {seed}) must be sensitive");
        }
    }

    #[test]
    fn pr_class_is_the_eight_variants() {
        let class = equivalence_class(&pr_box_variant(0)).unwrap();
        assert_eq!(class.len(), 8);
        let keys: BTreeSet<_> = class.iter().map(CcBox::rational_key).collect();
        let expected: BTreeSet<_> = (0..8)
            .map(|k| pr_box(k).unwrap().rational_key())
            .collect();
        assert_eq!(keys, expected);
        // Spot-check: an orbit member is Equivalent per the conversion
        // programs, not just by symmetry bookkeeping.
        let other = pr_box(3).unwrap();
        assert_eq!(
            classify(&other, &pr_box_variant(0)).unwrap(),
            OrderingRelation::Equivalent
        );
    }

    #[test]
    fn chain_class_members_share_monotone_values() {
        let c = noisy_pr(&Scalar::ratio(1, 2)).unwrap();
        let class = equivalence_class(&c).unwrap();
        assert!(!class.is_empty() && class.len() <= 64);
        for member in &class {
            assert_eq!(chsh_value(member), rat(3, 1));
        }
    }

    #[test]
    fn free_boxes_have_no_finite_class() {
        assert!(matches!(
            equivalence_class(&l_empty()),
            Err(Error::FreeBoxClass)
        ));
        assert!(matches!(
            equivalence_class(&table3_box(1).unwrap()),
            Err(Error::FreeBoxClass)
        ));
    }

    #[test]
    fn equivalent_boxes_share_euclidean_norm() {
        let norm2 = |x: &CcBox| -> Rat { x.rational_key().iter().map(|r| r * r).sum() };
        let b = random_nonfree_box(11);
        let n = norm2(&b);
        for member in equivalence_class(&b).unwrap() {
            assert_eq!(norm2(&member), n);
        }
    }

    #[test]
    fn nonsymmetry_operations_leave_the_equivalence_class() {
        let mut op_seed = 900u64;
        for seed in [5u64, 23, 41] {
            let b = random_nonfree_box(seed);
            let op = loop {
                op_seed += 1;
                let op = random_det_op(op_seed);
                if !is_symmetry(&op) {
                    break op;
                }
            };
            let image = apply_det(&op, &b).unwrap();
            assert_ne!(
                classify(&image, &b).unwrap(),
                OrderingRelation::Equivalent,
                "seed {seed}: a non-symmetry image must leave the class"
            );
        }
    }

    #[test]
    fn noisy_pr_points_form_a_chain() {
        let boxes: Vec<CcBox> = [rat(1, 5), rat(1, 2), rat(9, 10)]
            .into_iter()
            .map(|a| noisy_pr(&Scalar::from_rat(a)).unwrap())
            .collect();
        assert!(certify_chain(&boxes).unwrap());
        assert!(!certify_antichain(&boxes).unwrap());
        let single = vec![boxes[0].clone()];
        assert!(certify_chain(&single).unwrap());
        assert!(certify_antichain(&single).unwrap());
    }

    #[test]
    fn crossing_family_points_form_an_antichain() {
        let anchor = table3_box(1).unwrap();
        // Crossing monotone values: the first point wins on yield, the
        // second on cost — so neither converts to the other.
        let r1 = fam((4, 5), (3, 10), &anchor);
        let r2 = fam((19, 20), (13, 20), &anchor);
        assert!(chsh_value(&r1) > chsh_value(&r2));
        assert!(npr_value(&r1) < npr_value(&r2));
        assert!(certify_antichain(&[r1, r2]).unwrap());
    }

    #[test]
    fn non_transitivity_witness_verifies_and_monotones_agree() {
        let (r1, r2, r3) = non_transitivity_witness().unwrap();
        assert_eq!(chsh_value(&r1), rat(78, 25));
        assert_eq!(chsh_value(&r2), rat(533, 200));
        assert_eq!(chsh_value(&r3), rat(68, 25));
        assert_eq!(npr_value(&r1), rat(18, 5));
        assert_eq!(npr_value(&r2), rat(39, 10));
        assert_eq!(npr_value(&r3), rat(18, 5));
        // Mixing witness: R3 is itself a mixture of R1 with the anchor,
        // which is what makes the strict R1 → R3 conversion possible.
        let anchor = table3_box(1).unwrap();
        let remix = mix(
            &[r1.clone(), anchor],
            &[Scalar::ratio(9, 14), Scalar::ratio(5, 14)],
        )
        .unwrap();
        assert_eq!(remix.rational_key(), r3.rational_key());
    }

    #[test]
    fn tilted_pair_is_incomparable_within_margins() {
        let boxes = vec![
            tilted(&Scalar::approx(0.6, 1e-12).unwrap()).unwrap(),
            tilted(&Scalar::approx(1.2, 1e-12).unwrap()).unwrap(),
        ];
        assert!(certify_antichain(&boxes).unwrap());
    }

    #[test]
    fn pr_nonsymmetry_images_are_free_and_top_the_order() {
        let pr = pr_box_variant(0);
        assert!(nonsymmetry_images_free(&pr).unwrap());
        let below = vec![l_empty(), noisy_pr(&Scalar::ratio(1, 2)).unwrap()];
        assert!(top_of_quantum_order_check(&pr, &below).unwrap());
        // A chain box is not at the top: the PR box sits strictly above.
        let mid = noisy_pr(&Scalar::ratio(1, 2)).unwrap();
        assert!(!top_of_quantum_order_check(&mid, &[pr]).unwrap());
    }

    #[test]
    fn tsirelson_tops_its_own_order() {
        let b = tsirelson();
        assert!(top_of_quantum_order_check(&b, &[b.clone()]).unwrap());
    }
}
