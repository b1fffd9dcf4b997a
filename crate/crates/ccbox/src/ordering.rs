//! Convertibility under free operations, decided by exact linear
//! programming.
//!
//! A source box converts to a target box exactly when the target lies in
//! the convex hull of the source's images under all deterministic
//! operations of matching types — mixing images with shared randomness is
//! the general free operation, so hull membership is the whole question.
//! The test runs in three steps: enumerate the deterministic operations,
//! apply each to the source and deduplicate the resulting image tables,
//! then solve one exact feasibility program over the mixture weights.
//!
//! Certificates are first-class: a feasible answer carries weights that
//! re-multiply to the target exactly, an infeasible answer carries a
//! separating affine functional on reduced coordinates. Both are verified
//! before being returned. Pairwise classification combines the two
//! conversion directions into the four-way order relation.
//!
//! Approximate boxes are rationalized and judged by exact L∞ distance to
//! the image hull: distance zero is feasibility, distance beyond the
//! stated margin (ten times the accumulated tolerance, scaled by table
//! size) is infeasibility, and anything inside the margin is refused as
//! [`Error::ApproxUnsound`].

use std::collections::BTreeMap;

use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::boxes::{reduced_coords, reduced_coords_table, BoxType, CcBox, DEFAULT_ENUM_CAP};
use crate::error::{Error, Result};
use crate::free_ops::{apply_det_to_rats, enumerate_ldo_capped, DetOp};
use crate::lp::{self, HullMembership, Separation};
use crate::scalar::{Rat, Scalar};

/// The four possible order relations between two boxes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrderingRelation {
    /// The first box converts to the second but not conversely.
    StrictlyAbove,
    /// The second box converts to the first but not conversely.
    StrictlyBelow,
    /// Neither box converts to the other.
    Incomparable,
    /// Each box converts to the other.
    Equivalent,
}

impl OrderingRelation {
    /// The relation seen from the swapped argument order.
    pub fn mirror(self) -> Self {
        match self {
            OrderingRelation::StrictlyAbove => OrderingRelation::StrictlyBelow,
            OrderingRelation::StrictlyBelow => OrderingRelation::StrictlyAbove,
            other => other,
        }
    }
}

impl std::fmt::Display for OrderingRelation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            OrderingRelation::StrictlyAbove => "strictly-above",
            OrderingRelation::StrictlyBelow => "strictly-below",
            OrderingRelation::Incomparable => "incomparable",
            OrderingRelation::Equivalent => "equivalent",
        };
        f.write_str(s)
    }
}

/// Verified outcome of one conversion feasibility test.
#[derive(Clone, Debug)]
pub struct FeasibilityCertificate {
    /// Can the source be converted to the target?
    pub feasible: bool,
    /// When feasible: nonzero mixture weights, keyed by the index of a
    /// deterministic operation (in enumeration order) producing each
    /// distinct image. The weighted images re-multiply to the target.
    pub weights: Option<Vec<(usize, Rat)>>,
    /// When infeasible: an affine functional on reduced coordinates that
    /// is positive on the target and nonpositive on every image.
    pub witness: Option<Separation>,
    /// For approximate inputs: the exact hull distance of the rationalized
    /// target (as a double) and the decision margin it was compared to.
    pub approx_margin: Option<(f64, f64)>,
}

/// Distinct deterministic-operation images of `source` as rational
/// tables, keeping only operations accepted by `keep`; each table is
/// paired with the lowest producing operation index.
pub(crate) fn distinct_image_tables_filtered(
    source: &CcBox,
    dst: BoxType,
    cap: u64,
    keep: impl Fn(&DetOp) -> bool + Sync,
) -> Result<Vec<(Vec<Rat>, usize)>> {
    let ops = enumerate_ldo_capped(source.ty(), dst, cap)?;
    let table = source.rational_key();
    let images: Vec<Option<Vec<Rat>>> = ops
        .par_iter()
        .map(|op| keep(op).then(|| apply_det_to_rats(op, &table)))
        .collect();
    let mut seen: BTreeMap<Vec<Rat>, usize> = BTreeMap::new();
    for (i, img) in images.into_iter().enumerate() {
        if let Some(img) = img {
            seen.entry(img).or_insert(i);
        }
    }
    Ok(seen.into_iter().collect())
}

/// Distinct deterministic-operation images of `source` as rational
/// tables, each paired with the lowest producing operation index.
fn distinct_image_tables(
    source: &CcBox,
    dst: BoxType,
    cap: u64,
) -> Result<Vec<(Vec<Rat>, usize)>> {
    distinct_image_tables_filtered(source, dst, cap, |_| true)
}

/// Entry tolerance for image boxes of `source`: `None` for exact sources,
/// otherwise a bound covering the worst-case aggregation of rounded
/// entries (each image entry sums at most |X|·|Y| source entries).
pub(crate) fn image_tol_for(source: &CcBox) -> Option<f64> {
    if source.is_exact() {
        None
    } else {
        let fan_in = (source.ty().x_card * source.ty().y_card) as f64;
        Some(fan_in * source.max_tol() + f64::EPSILON)
    }
}

/// Build a box of type `dst_type` from a rational image table, exact when
/// `image_tol` is `None` and approximate with that tolerance otherwise.
pub(crate) fn box_from_image_table(
    dst_type: BoxType,
    table: Vec<Rat>,
    image_tol: Option<f64>,
) -> Result<CcBox> {
    let entries = table
        .into_iter()
        .map(|r| match image_tol {
            None => Ok(Scalar::from_rat(r)),
            Some(tol) => Scalar::approx(r.to_f64().unwrap_or(f64::NAN), tol),
        })
        .collect::<Result<Vec<Scalar>>>()?;
    CcBox::new(dst_type, entries)
        .map_err(|e| Error::Internal(format!("invalid image of a valid box: {e}")))
}

/// Deduplicated images of `source` under every deterministic operation
/// into `dst_type`, capped at `cap` operations.
///
/// Exact sources give exact image boxes. Approximate sources are
/// rationalized first; their images keep approximate entries whose
/// tolerance covers the worst-case aggregation (each image entry sums at
/// most |X|·|Y| source entries), since the rationalized table inherits the
/// source's rounding and would fail exact normalization checks.
pub fn image_vertices_capped(source: &CcBox, dst_type: BoxType, cap: u64) -> Result<Vec<CcBox>> {
    let image_tol = image_tol_for(source);
    distinct_image_tables(source, dst_type, cap)?
        .into_iter()
        .map(|(table, _)| box_from_image_table(dst_type, table, image_tol))
        .collect()
}

/// [`image_vertices_capped`] with the default enumeration cap.
pub fn image_vertices(source: &CcBox, dst_type: BoxType) -> Result<Vec<CcBox>> {
    image_vertices_capped(source, dst_type, DEFAULT_ENUM_CAP)
}

/// Decision margin for approximate conversions: ten times the combined
/// entry tolerance, scaled by table size to cover coordinate aggregation.
pub(crate) fn approx_margin(a: &CcBox, b: &CcBox) -> f64 {
    let scale = a.ty().table_len().max(b.ty().table_len()) as f64;
    10.0 * (a.max_tol() + b.max_tol()) * scale
}

/// Exact re-multiplication check: Σ weightsᵢ·imageᵢ must equal `target`
/// entrywise, with weights nonnegative and summing to one.
fn verify_weights(
    images: &[(Vec<Rat>, usize)],
    weights: &[Rat],
    target: &[Rat],
) -> Result<()> {
    let mut total = Rat::zero();
    let mut combo = vec![Rat::zero(); target.len()];
    for (w, (img, _)) in weights.iter().zip(images) {
        if w.is_negative() {
            return Err(Error::Internal("negative certificate weight".into()));
        }
        total += w;
        for (c, v) in combo.iter_mut().zip(img) {
            *c += w * v;
        }
    }
    if !total.is_one() || combo != target {
        return Err(Error::Internal(
            "certificate weights failed re-multiplication".into(),
        ));
    }
    Ok(())
}

fn nonzero_weights(images: &[(Vec<Rat>, usize)], weights: Vec<Rat>) -> Vec<(usize, Rat)> {
    weights
        .into_iter()
        .zip(images)
        .filter(|(w, _)| !w.is_zero())
        .map(|(w, (_, op_idx))| (*op_idx, w))
        .collect()
}

/// Decide whether `target` lies in the convex hull of the given image
/// tables, producing a verified certificate either way.
///
/// With `margin = None` both sides are exact: membership weights are
/// re-multiplied against the full rational table, separations re-checked.
/// With a margin, the distance program decides: exactly zero is feasible,
/// beyond the margin is infeasible, and anything in between is refused as
/// unsound rather than guessed.
pub(crate) fn hull_certificate(
    images: &[(Vec<Rat>, usize)],
    target: &CcBox,
    margin: Option<f64>,
) -> Result<FeasibilityCertificate> {
    let columns: Vec<Vec<Rat>> = images
        .iter()
        .map(|(t, _)| reduced_coords_table(target.ty(), t))
        .collect();
    let target_coords = reduced_coords(target);

    match margin {
        None => match lp::hull_membership(&columns, &target_coords)? {
            HullMembership::Inside { weights } => {
                verify_weights(images, &weights, &target.rational_key())?;
                Ok(FeasibilityCertificate {
                    feasible: true,
                    weights: Some(nonzero_weights(images, weights)),
                    witness: None,
                    approx_margin: None,
                })
            }
            HullMembership::Outside { separation } => Ok(FeasibilityCertificate {
                feasible: false,
                weights: None,
                witness: Some(separation),
                approx_margin: None,
            }),
        },
        Some(margin) => {
            let (distance, weights) = lp::hull_distance(&columns, &target_coords)?;
            if distance.is_zero() {
                // The rationalized target's reduced coordinates are exactly
                // in the hull; full tables of approximate boxes may sit a
                // rounding term off the no-signalling subspace, so the
                // exact check lives at the reduced-coordinate level (done
                // inside the distance program).
                Ok(FeasibilityCertificate {
                    feasible: true,
                    weights: Some(nonzero_weights(images, weights)),
                    witness: None,
                    approx_margin: Some((0.0, margin)),
                })
            } else {
                let d = distance.to_f64().unwrap_or(f64::INFINITY);
                if d > margin {
                    let separation = match lp::hull_membership(&columns, &target_coords)? {
                        HullMembership::Outside { separation } => separation,
                        HullMembership::Inside { .. } => {
                            return Err(Error::Internal(
                                "positive hull distance but membership feasible".into(),
                            ))
                        }
                    };
                    Ok(FeasibilityCertificate {
                        feasible: false,
                        weights: None,
                        witness: Some(separation),
                        approx_margin: Some((d, margin)),
                    })
                } else {
                    Err(Error::ApproxUnsound {
                        distance: d,
                        margin,
                    })
                }
            }
        }
    }
}

/// Can `source` be converted to `target` by a free operation?
///
/// Enumeration of deterministic operations is capped at `cap`.
pub fn convertible_capped(
    source: &CcBox,
    target: &CcBox,
    cap: u64,
) -> Result<FeasibilityCertificate> {
    let images = distinct_image_tables(source, target.ty(), cap)?;
    let margin = if source.is_exact() && target.is_exact() {
        None
    } else {
        Some(approx_margin(source, target))
    };
    hull_certificate(&images, target, margin)
}

/// [`convertible_capped`] with the default enumeration cap.
pub fn convertible(source: &CcBox, target: &CcBox) -> Result<FeasibilityCertificate> {
    convertible_capped(source, target, DEFAULT_ENUM_CAP)
}

/// Classify the pair and return both direction certificates.
pub fn classify_with_certs(
    b1: &CcBox,
    b2: &CcBox,
    cap: u64,
) -> Result<(OrderingRelation, FeasibilityCertificate, FeasibilityCertificate)> {
    let forward = convertible_capped(b1, b2, cap)?;
    let backward = convertible_capped(b2, b1, cap)?;
    let relation = match (forward.feasible, backward.feasible) {
        (true, true) => OrderingRelation::Equivalent,
        (true, false) => OrderingRelation::StrictlyAbove,
        (false, true) => OrderingRelation::StrictlyBelow,
        (false, false) => OrderingRelation::Incomparable,
    };
    Ok((relation, forward, backward))
}

/// Four-way order relation between two boxes.
pub fn classify(b1: &CcBox, b2: &CcBox) -> Result<OrderingRelation> {
    Ok(classify_with_certs(b1, b2, DEFAULT_ENUM_CAP)?.0)
}
