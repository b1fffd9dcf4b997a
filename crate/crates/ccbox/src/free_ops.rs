//! Locally deterministic operations, local symmetries, and mixtures.
//!
//! A deterministic operation acts on each wing separately: the wing map
//! (f, g) pulls the source setting from the target setting, s = f(s'),
//! and pushes the source outcome to the target outcome, x' = g(x, s').
//! The joint action on a box is
//!
//!   P'(x',y'|s',t') = Σ_{x: g_A(x,s')=x'} Σ_{y: g_B(y,t')=y'} P(x,y | f_A(s'), f_B(t')),
//!
//! which preserves validity and no-signalling. The deterministic
//! operations of given source/target types number
//! (|S|·|X'|^|X|)^|S'| · (|T|·|Y'|^|Y|)^|T'| and are the vertices of the
//! polytope of free operations; a general free operation is a convex
//! mixture of them, the shared randomness being the weight vector.
//!
//! The invertible type-preserving operations form a finite group of order
//! |S|!·(|X|!)^|S| · |T|!·(|Y|!)^|T| (64 for the 2222 type): per wing,
//! f is a permutation of settings and each g(·,s') a permutation of
//! outcomes — equivalently, (x,s') ↦ (g(x,s'), f(s')) is a bijection.
//! For 2222 this group is generated by six involutive relabellings; the
//! first three generate the order-8 subgroup that permutes the eight CHSH
//! variants (and PR boxes) regularly, the last three the order-8 subgroup
//! that stabilizes the canonical CHSH functional and the canonical PR box.
//! Averaging a box over the stabilizer subgroup (a Reynolds projection)
//! collapses it onto the one-parameter noisy-PR line.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::collections::VecDeque;

use num_traits::{One, Zero};

use crate::boxes::{BoxType, CcBox, DEFAULT_ENUM_CAP};
use crate::error::{Error, Result};
use crate::scalar::{rat, Rat, Scalar};

/// One wing of a deterministic operation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WingDetOp {
    /// Setting pre-map f: target setting s' → source setting s.
    pub pre: Vec<usize>,
    /// Outcome post-map g: indexed post\[x\]\[s'\] → target outcome x'.
    pub post: Vec<Vec<usize>>,
}

impl WingDetOp {
    /// Identity wing map for the given cardinalities.
    pub fn identity(settings: usize, outcomes: usize) -> Self {
        WingDetOp {
            pre: (0..settings).collect(),
            post: (0..outcomes).map(|x| vec![x; settings]).collect(),
        }
    }

    fn validate(
        &self,
        src_settings: usize,
        src_outcomes: usize,
        dst_settings: usize,
        dst_outcomes: usize,
    ) -> Result<()> {
        let ok = self.pre.len() == dst_settings
            && self.pre.iter().all(|&s| s < src_settings)
            && self.post.len() == src_outcomes
            && self
                .post
                .iter()
                .all(|row| row.len() == dst_settings && row.iter().all(|&x| x < dst_outcomes));
        if ok {
            Ok(())
        } else {
            Err(Error::TypeMismatch(
                "wing map dimensions are inconsistent with the declared types".into(),
            ))
        }
    }

    /// Is (x, s') ↦ (g(x,s'), f(s')) a bijection? Requires matching
    /// source/target cardinalities.
    fn is_bijective(&self, settings: usize, outcomes: usize) -> bool {
        if self.pre.len() != settings || self.post.len() != outcomes {
            return false;
        }
        let mut seen = vec![false; settings * outcomes];
        for sp in 0..settings {
            for x in 0..outcomes {
                let s = self.pre[sp];
                let xp = self.post[x][sp];
                let slot = s * outcomes + xp;
                if seen[slot] {
                    return false;
                }
                seen[slot] = true;
            }
        }
        true
    }
}

/// A deterministic operation: independent wing maps between box types.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DetOp {
    src_type: BoxType,
    dst_type: BoxType,
    wing_a: WingDetOp,
    wing_b: WingDetOp,
}

impl DetOp {
    /// Validate wing maps against the declared types.
    pub fn new(
        src_type: BoxType,
        dst_type: BoxType,
        wing_a: WingDetOp,
        wing_b: WingDetOp,
    ) -> Result<Self> {
        wing_a.validate(
            src_type.s_card,
            src_type.x_card,
            dst_type.s_card,
            dst_type.x_card,
        )?;
        wing_b.validate(
            src_type.t_card,
            src_type.y_card,
            dst_type.t_card,
            dst_type.y_card,
        )?;
        Ok(DetOp {
            src_type,
            dst_type,
            wing_a,
            wing_b,
        })
    }

    /// Identity operation on a type.
    pub fn identity(ty: BoxType) -> Self {
        DetOp {
            src_type: ty,
            dst_type: ty,
            wing_a: WingDetOp::identity(ty.s_card, ty.x_card),
            wing_b: WingDetOp::identity(ty.t_card, ty.y_card),
        }
    }

    /// Source type.
    pub fn src_type(&self) -> BoxType {
        self.src_type
    }

    /// Target type.
    pub fn dst_type(&self) -> BoxType {
        self.dst_type
    }

    /// First-wing map.
    pub fn wing_a(&self) -> &WingDetOp {
        &self.wing_a
    }

    /// Second-wing map.
    pub fn wing_b(&self) -> &WingDetOp {
        &self.wing_b
    }

    /// True when source and target types coincide.
    pub fn is_type_preserving(&self) -> bool {
        self.src_type == self.dst_type
    }
}

/// Is the operation an invertible relabelling (a symmetry)? Requires type
/// preservation plus per-wing bijectivity of (x, s') ↦ (g(x,s'), f(s')).
pub fn is_symmetry(op: &DetOp) -> bool {
    op.is_type_preserving()
        && op
            .wing_a
            .is_bijective(op.src_type.s_card, op.src_type.x_card)
        && op
            .wing_b
            .is_bijective(op.src_type.t_card, op.src_type.y_card)
}

/// Apply a deterministic operation to a box.
pub fn apply_det(op: &DetOp, b: &CcBox) -> Result<CcBox> {
    if b.ty() != op.src_type {
        return Err(Error::TypeMismatch(format!(
            "operation expects source type {}, box has type {}",
            op.src_type,
            b.ty()
        )));
    }
    let dst = op.dst_type;
    let mut entries = vec![Scalar::zero(); dst.table_len()];
    for sp in 0..dst.s_card {
        for tp in 0..dst.t_card {
            let s = op.wing_a.pre[sp];
            let t = op.wing_b.pre[tp];
            for x in 0..op.src_type.x_card {
                let xp = op.wing_a.post[x][sp];
                for y in 0..op.src_type.y_card {
                    let yp = op.wing_b.post[y][tp];
                    let slot = dst.idx(sp, tp, xp, yp);
                    entries[slot] = entries[slot].add(b.get(s, t, x, y));
                }
            }
        }
    }
    CcBox::new(dst, entries)
}

/// Apply a deterministic operation to a rational table (row-major for
/// `op.src_type()`), returning the rational target table. Hot path for
/// image enumeration; the caller guarantees the table is valid.
pub(crate) fn apply_det_to_rats(op: &DetOp, table: &[Rat]) -> Vec<Rat> {
    let src = op.src_type;
    let dst = op.dst_type;
    let mut out = vec![Rat::zero(); dst.table_len()];
    for sp in 0..dst.s_card {
        for tp in 0..dst.t_card {
            let s = op.wing_a.pre[sp];
            let t = op.wing_b.pre[tp];
            for x in 0..src.x_card {
                let xp = op.wing_a.post[x][sp];
                for y in 0..src.y_card {
                    let yp = op.wing_b.post[y][tp];
                    out[dst.idx(sp, tp, xp, yp)] += &table[src.idx(s, t, x, y)];
                }
            }
        }
    }
    out
}

/// A free operation: a convex mixture of deterministic operations with
/// exact rational weights (the shared randomness).
#[derive(Clone, Debug, PartialEq)]
pub struct LosrOp {
    terms: Vec<(Rat, DetOp)>,
}

impl LosrOp {
    /// Validate weights (nonnegative, summing to one) and term types.
    pub fn new(terms: Vec<(Rat, DetOp)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::WeightError("free operation with no terms".into()));
        }
        let src = terms[0].1.src_type;
        let dst = terms[0].1.dst_type;
        let mut total = Rat::zero();
        for (w, op) in &terms {
            if op.src_type != src || op.dst_type != dst {
                return Err(Error::TypeMismatch(
                    "all terms of a free operation must share source and target types".into(),
                ));
            }
            if w < &Rat::zero() {
                return Err(Error::WeightError(format!("negative weight {w}")));
            }
            total += w;
        }
        if !total.is_one() {
            return Err(Error::WeightError(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        Ok(LosrOp { terms })
    }

    /// Point mass on a single deterministic operation.
    pub fn point(op: DetOp) -> Self {
        LosrOp {
            terms: vec![(Rat::one(), op)],
        }
    }

    /// Uniform mixture of the given operations.
    pub fn uniform(ops: Vec<DetOp>) -> Result<Self> {
        let n = ops.len();
        if n == 0 {
            return Err(Error::WeightError("free operation with no terms".into()));
        }
        let w = rat(1, n as i64);
        LosrOp::new(ops.into_iter().map(|op| (w.clone(), op)).collect())
    }

    /// Weighted terms.
    pub fn terms(&self) -> &[(Rat, DetOp)] {
        &self.terms
    }

    /// Common source type.
    pub fn src_type(&self) -> BoxType {
        self.terms[0].1.src_type
    }

    /// Common target type.
    pub fn dst_type(&self) -> BoxType {
        self.terms[0].1.dst_type
    }
}

/// Apply a free operation: the weighted mixture of the deterministic
/// images.
pub fn apply_losr(op: &LosrOp, b: &CcBox) -> Result<CcBox> {
    let images: Vec<CcBox> = op
        .terms
        .iter()
        .map(|(_, d)| apply_det(d, b))
        .collect::<Result<_>>()?;
    let weights: Vec<Scalar> = op
        .terms
        .iter()
        .map(|(w, _)| Scalar::from_rat(w.clone()))
        .collect();
    crate::boxes::mix(&images, &weights)
}

fn checked_pow(base: usize, exp: usize) -> Option<u128> {
    (base as u128).checked_pow(u32::try_from(exp).ok()?)
}

/// Closed-form count of deterministic operations from `src` to `dst`.
pub fn ldo_count(src: BoxType, dst: BoxType) -> Option<u128> {
    let per_a = (src.s_card as u128).checked_mul(checked_pow(dst.x_card, src.x_card)?)?;
    let per_b = (src.t_card as u128).checked_mul(checked_pow(dst.y_card, src.y_card)?)?;
    let wing_a = per_a.checked_pow(u32::try_from(dst.s_card).ok()?)?;
    let wing_b = per_b.checked_pow(u32::try_from(dst.t_card).ok()?)?;
    wing_a.checked_mul(wing_b)
}

fn factorial(n: usize) -> Option<u128> {
    (1..=n as u128).try_fold(1u128, |acc, k| acc.checked_mul(k))
}

/// Closed-form order of the symmetry group of a type:
/// |S|!·(|X|!)^|S| · |T|!·(|Y|!)^|T|.
pub fn lso_order(ty: BoxType) -> Option<u128> {
    let wing = |settings: usize, outcomes: usize| -> Option<u128> {
        factorial(settings)?.checked_mul(factorial(outcomes)?.checked_pow(u32::try_from(settings).ok()?)?)
    };
    wing(ty.s_card, ty.x_card)?.checked_mul(wing(ty.t_card, ty.y_card)?)
}

/// All deterministic wing maps for the given cardinalities, in a fixed
/// order: the choice for each target setting s' is a mixed-radix digit
/// (s' = 0 least significant) encoding first the outcome map then the
/// setting pull-back.
fn wing_ops(
    src_settings: usize,
    src_outcomes: usize,
    dst_settings: usize,
    dst_outcomes: usize,
) -> Vec<WingDetOp> {
    let gsize = dst_outcomes.pow(src_outcomes as u32);
    let base = src_settings * gsize;
    let total = base.pow(dst_settings as u32);
    let mut out = Vec::with_capacity(total);
    for code in 0..total {
        let mut pre = Vec::with_capacity(dst_settings);
        let mut post = vec![vec![0usize; dst_settings]; src_outcomes];
        let mut rest = code;
        for sp in 0..dst_settings {
            let c = rest % base;
            rest /= base;
            pre.push(c / gsize);
            let mut gcode = c % gsize;
            for row in post.iter_mut() {
                row[sp] = gcode % dst_outcomes;
                gcode /= dst_outcomes;
            }
        }
        out.push(WingDetOp { pre, post });
    }
    out
}

/// All deterministic operations from `src` to `dst`, capped at `cap`.
/// Ordered with the first wing's code major.
pub fn enumerate_ldo_capped(src: BoxType, dst: BoxType, cap: u64) -> Result<Vec<DetOp>> {
    let required = ldo_count(src, dst).unwrap_or(u128::MAX);
    if required > cap as u128 {
        return Err(Error::ResourceLimit { required, cap });
    }
    let wings_a = wing_ops(src.s_card, src.x_card, dst.s_card, dst.x_card);
    let wings_b = wing_ops(src.t_card, src.y_card, dst.t_card, dst.y_card);
    let mut out = Vec::with_capacity(wings_a.len() * wings_b.len());
    for wa in &wings_a {
        for wb in &wings_b {
            out.push(DetOp {
                src_type: src,
                dst_type: dst,
                wing_a: wa.clone(),
                wing_b: wb.clone(),
            });
        }
    }
    Ok(out)
}

/// All deterministic operations from `src` to `dst` with the default cap.
pub fn enumerate_ldo(src: BoxType, dst: BoxType) -> Result<Vec<DetOp>> {
    enumerate_ldo_capped(src, dst, DEFAULT_ENUM_CAP)
}

/// All permutations of {0,…,n−1} in lexicographic order.
fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(n);
    let mut used = vec![false; n];
    fn rec(n: usize, used: &mut [bool], current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == n {
            out.push(current.clone());
            return;
        }
        for v in 0..n {
            if !used[v] {
                used[v] = true;
                current.push(v);
                rec(n, used, current, out);
                current.pop();
                used[v] = false;
            }
        }
    }
    rec(n, &mut used, &mut current, &mut out);
    out
}

/// All invertible type-preserving operations (the symmetry group),
/// capped at `cap` elements.
pub fn enumerate_lso_capped(ty: BoxType, cap: u64) -> Result<Vec<DetOp>> {
    let required = lso_order(ty).unwrap_or(u128::MAX);
    if required > cap as u128 {
        return Err(Error::ResourceLimit { required, cap });
    }
    let wing_group = |settings: usize, outcomes: usize| -> Vec<WingDetOp> {
        let setting_perms = permutations(settings);
        let outcome_perms = permutations(outcomes);
        let mut out = Vec::new();
        for f in &setting_perms {
            // One outcome permutation per target setting, mixed-radix
            // (s' = 0 least significant).
            let total = outcome_perms.len().pow(settings as u32);
            for code in 0..total {
                let mut post = vec![vec![0usize; settings]; outcomes];
                let mut rest = code;
                for sp in 0..settings {
                    let sigma = &outcome_perms[rest % outcome_perms.len()];
                    rest /= outcome_perms.len();
                    for x in 0..outcomes {
                        post[x][sp] = sigma[x];
                    }
                }
                out.push(WingDetOp {
                    pre: f.clone(),
                    post,
                });
            }
        }
        out
    };
    let wings_a = wing_group(ty.s_card, ty.x_card);
    let wings_b = wing_group(ty.t_card, ty.y_card);
    let mut out = Vec::with_capacity(wings_a.len() * wings_b.len());
    for wa in &wings_a {
        for wb in &wings_b {
            out.push(DetOp {
                src_type: ty,
                dst_type: ty,
                wing_a: wa.clone(),
                wing_b: wb.clone(),
            });
        }
    }
    Ok(out)
}

/// The symmetry group of a type with the default cap.
pub fn enumerate_lso(ty: BoxType) -> Result<Vec<DetOp>> {
    enumerate_lso_capped(ty, DEFAULT_ENUM_CAP)
}

/// Composite operation: `compose(op2, op1)` applies `op1` first.
///
/// Satisfies apply(compose(op2,op1), b) = apply(op2, apply(op1, b)).
pub fn compose(op2: &DetOp, op1: &DetOp) -> Result<DetOp> {
    if op1.dst_type != op2.src_type {
        return Err(Error::TypeMismatch(format!(
            "cannot compose: first operation targets {}, second expects {}",
            op1.dst_type, op2.src_type
        )));
    }
    let wing = |w1: &WingDetOp, w2: &WingDetOp, src_outcomes: usize| -> WingDetOp {
        let dst_settings = w2.pre.len();
        let pre: Vec<usize> = (0..dst_settings).map(|spp| w1.pre[w2.pre[spp]]).collect();
        let post: Vec<Vec<usize>> = (0..src_outcomes)
            .map(|x| {
                (0..dst_settings)
                    .map(|spp| w2.post[w1.post[x][w2.pre[spp]]][spp])
                    .collect()
            })
            .collect();
        WingDetOp { pre, post }
    };
    DetOp::new(
        op1.src_type,
        op2.dst_type,
        wing(&op1.wing_a, &op2.wing_a, op1.src_type.x_card),
        wing(&op1.wing_b, &op2.wing_b, op1.src_type.y_card),
    )
}

/// Inverse of a symmetry operation.
pub fn invert(op: &DetOp) -> Result<DetOp> {
    if !is_symmetry(op) {
        return Err(Error::NotInvertible);
    }
    let wing = |w: &WingDetOp, settings: usize, outcomes: usize| -> WingDetOp {
        let mut pre = vec![0usize; settings];
        for (sp, &s) in w.pre.iter().enumerate() {
            pre[s] = sp;
        }
        let mut post = vec![vec![0usize; settings]; outcomes];
        for s in 0..settings {
            let sp = pre[s];
            for x in 0..outcomes {
                post[w.post[x][sp]][s] = x;
            }
        }
        WingDetOp { pre, post }
    };
    Ok(DetOp {
        src_type: op.src_type,
        dst_type: op.src_type,
        wing_a: wing(&op.wing_a, op.src_type.s_card, op.src_type.x_card),
        wing_b: wing(&op.wing_b, op.src_type.t_card, op.src_type.y_card),
    })
}

/// Closure of a set of symmetry generators under composition; always
/// contains the identity. Errors with [`Error::NotInvertible`] if any
/// generator is not a symmetry, and with a type mismatch if the
/// generators do not share one type.
pub fn subgroup_closure(generators: &[DetOp]) -> Result<Vec<DetOp>> {
    let ty = match generators.first() {
        Some(g) => g.src_type,
        None => {
            return Err(Error::BadParameter(
                "subgroup closure of an empty generator list has no type".into(),
            ))
        }
    };
    for g in generators {
        if !is_symmetry(g) {
            return Err(Error::NotInvertible);
        }
        if g.src_type != ty {
            return Err(Error::TypeMismatch(
                "subgroup generators must share one type".into(),
            ));
        }
    }
    let bound = lso_order(ty).unwrap_or(u128::MAX);
    let mut seen: BTreeSet<DetOp> = BTreeSet::new();
    let mut queue: VecDeque<DetOp> = VecDeque::new();
    let id = DetOp::identity(ty);
    seen.insert(id.clone());
    queue.push_back(id);
    while let Some(e) = queue.pop_front() {
        for g in generators {
            let next = compose(g, &e)?;
            if seen.insert(next.clone()) {
                if seen.len() as u128 > bound {
                    return Err(Error::Internal(
                        "subgroup closure exceeded the group order bound".into(),
                    ));
                }
                queue.push_back(next);
            }
        }
    }
    Ok(seen.into_iter().collect())
}

/// Distinct images of a box under a list of type-preserving operations,
/// in canonical (table-sorted) order.
pub fn orbit(b: &CcBox, group: &[DetOp]) -> Result<Vec<CcBox>> {
    let mut seen: BTreeMap<Vec<Rat>, CcBox> = BTreeMap::new();
    for op in group {
        if op.src_type != b.ty() || !op.is_type_preserving() {
            return Err(Error::TypeMismatch(format!(
                "orbit needs operations preserving type {}, found {} -> {}",
                b.ty(),
                op.src_type,
                op.dst_type
            )));
        }
        let image = apply_det(op, b)?;
        seen.entry(image.rational_key()).or_insert(image);
    }
    Ok(seen.into_values().collect())
}

/// The six involutive relabelling generators of the 2222 symmetry group,
/// in a fixed order:
///
/// 0. flip both outcomes of wing B (y ↦ y⊕1);
/// 1. swap the settings of wing A (s' ↦ s'⊕1);
/// 2. swap the settings of wing B (t' ↦ t'⊕1);
/// 3. flip both outcomes on both wings (x ↦ x⊕1, y ↦ y⊕1);
/// 4. flip wing A's outcome at its second setting only (x ↦ x⊕s'),
///    and swap wing B's settings;
/// 5. swap wing A's settings, and flip wing B's outcome at its second
///    setting only (y ↦ y⊕t').
///
/// Generators 0–2 generate the order-8 subgroup permuting the eight CHSH
/// variants regularly; generators 3–5 generate the order-8 subgroup
/// stabilizing the canonical CHSH functional and the canonical PR box.
pub fn relabelling_generators() -> Vec<DetOp> {
    let ty = BoxType::b2222();
    let id = || WingDetOp::identity(2, 2);
    let flip_out = || WingDetOp {
        pre: vec![0, 1],
        post: vec![vec![1, 1], vec![0, 0]],
    };
    let swap_set = || WingDetOp {
        pre: vec![1, 0],
        post: vec![vec![0, 0], vec![1, 1]],
    };
    let flip_at_second = || WingDetOp {
        pre: vec![0, 1],
        post: vec![vec![0, 1], vec![1, 0]],
    };
    let mk = |a: WingDetOp, b: WingDetOp| DetOp::new(ty, ty, a, b).expect("valid generator");
    vec![
        mk(id(), flip_out()),
        mk(swap_set(), id()),
        mk(id(), swap_set()),
        mk(flip_out(), flip_out()),
        mk(flip_at_second(), swap_set()),
        mk(swap_set(), flip_at_second()),
    ]
}

/// Generators of the order-8 subgroup that permutes the eight CHSH
/// variants (and the eight PR boxes) regularly.
pub fn variant_permuting_generators() -> Vec<DetOp> {
    relabelling_generators()[..3].to_vec()
}

/// Generators of the order-8 subgroup that stabilizes the canonical CHSH
/// functional and the canonical PR box.
pub fn canonical_stabilizer_generators() -> Vec<DetOp> {
    relabelling_generators()[3..].to_vec()
}

/// Uniform average of a 2222 box over the canonical-stabilizer subgroup.
///
/// Idempotent; fixes exactly the subgroup-invariant boxes. Collapses the
/// two-parameter mixtures γ·anchor + (1−γ)·C(α) (anchor free and on the
/// canonical facet) onto the noisy-PR line at C(α(1−γ)).
pub fn reynolds_projection(b: &CcBox) -> Result<CcBox> {
    if !b.ty().is_2222() {
        return Err(Error::WrongType {
            expected: "(2,2;2,2)".into(),
            found: b.ty().to_string(),
        });
    }
    let group = subgroup_closure(&canonical_stabilizer_generators())?;
    let images: Vec<CcBox> = group
        .iter()
        .map(|op| apply_det(op, b))
        .collect::<Result<_>>()?;
    let w = Scalar::ratio(1, group.len() as i64);
    crate::boxes::mix(&images, &vec![w; images.len()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boxes::{
        chsh, enumerate_deterministic_boxes, from_correlators, mix, to_correlators,
        CorrelatorForm,
    };
    use crate::test_util::{pr_box_variant, random_rational_box, uniform_box};

    #[test]
    fn identity_acts_trivially() {
        let b = random_rational_box(11);
        let id = DetOp::identity(b.ty());
        assert_eq!(apply_det(&id, &b).unwrap().rational_key(), b.rational_key());
    }

    #[test]
    fn constant_op_forces_deterministic_output() {
        let ty = BoxType::b2222();
        let zero_wing = WingDetOp {
            pre: vec![0, 0],
            post: vec![vec![0, 0], vec![0, 0]],
        };
        let op = DetOp::new(ty, ty, zero_wing.clone(), zero_wing).unwrap();
        let image = apply_det(&op, &pr_box_variant(0)).unwrap();
        for s in 0..2 {
            for t in 0..2 {
                assert_eq!(*image.get(s, t, 0, 0), Scalar::one());
            }
        }
    }

    #[test]
    fn ldo_counts_match_formula() {
        let t2222 = BoxType::b2222();
        assert_eq!(ldo_count(t2222, t2222), Some(4096));
        assert_eq!(enumerate_ldo(t2222, t2222).unwrap().len(), 4096);
        let t2211 = BoxType::new(2, 2, 1, 1).unwrap();
        assert_eq!(
            enumerate_ldo(t2211, t2211).unwrap().len(),
            ldo_count(t2211, t2211).unwrap() as usize
        );
        // Collapsing 2222 onto a one-setting-per-wing target: (2·4)¹ per wing.
        assert_eq!(ldo_count(t2222, t2211), Some(64));
        assert_eq!(ldo_count(t2211, t2222), Some(256));
        let t3221 = BoxType::new(3, 2, 2, 1).unwrap();
        let n = enumerate_ldo(t3221, t2222).unwrap().len();
        assert_eq!(n as u128, ldo_count(t3221, t2222).unwrap());
    }

    #[test]
    fn ldo_enumeration_is_duplicate_free() {
        let ops = enumerate_ldo(BoxType::b2222(), BoxType::b2222()).unwrap();
        let set: BTreeSet<&DetOp> = ops.iter().collect();
        assert_eq!(set.len(), ops.len());
    }

    #[test]
    fn ldo_cap_is_enforced() {
        match enumerate_ldo_capped(BoxType::b2222(), BoxType::b2222(), 100) {
            Err(Error::ResourceLimit { required: 4096, cap: 100 }) => {}
            other => panic!("expected ResourceLimit, got {other:?}"),
        }
    }

    #[test]
    fn wing_factorization_holds() {
        // Applying wing A with wing B identity, then wing B with wing A
        // identity, equals the joint operation.
        let ty = BoxType::b2222();
        let ops = enumerate_ldo(ty, ty).unwrap();
        let b = random_rational_box(23);
        for idx in [3usize, 500, 1777, 4000] {
            let op = &ops[idx];
            let a_only = DetOp::new(
                ty,
                ty,
                op.wing_a.clone(),
                WingDetOp::identity(2, 2),
            )
            .unwrap();
            let b_only = DetOp::new(
                ty,
                ty,
                WingDetOp::identity(2, 2),
                op.wing_b.clone(),
            )
            .unwrap();
            let joint = apply_det(op, &b).unwrap();
            let staged = apply_det(&b_only, &apply_det(&a_only, &b).unwrap()).unwrap();
            assert_eq!(joint.rational_key(), staged.rational_key());
        }
    }

    #[test]
    fn lso_is_a_group_of_order_64() {
        let ty = BoxType::b2222();
        let lso = enumerate_lso(ty).unwrap();
        assert_eq!(lso.len(), 64);
        assert_eq!(lso_order(ty), Some(64));
        let set: BTreeSet<DetOp> = lso.iter().cloned().collect();
        assert!(set.contains(&DetOp::identity(ty)));
        for op in &lso {
            assert!(is_symmetry(op));
            let inv = invert(op).unwrap();
            assert!(set.contains(&inv));
            assert_eq!(compose(&inv, op).unwrap(), DetOp::identity(ty));
            assert_eq!(compose(op, &inv).unwrap(), DetOp::identity(ty));
        }
        // Spot-check closure under composition.
        for i in [0usize, 7, 13, 40] {
            for j in [1usize, 22, 63] {
                assert!(set.contains(&compose(&lso[i], &lso[j]).unwrap()));
            }
        }
    }

    #[test]
    fn lso_matches_symmetry_filter_of_ldo() {
        let ty = BoxType::b2222();
        let from_filter: BTreeSet<DetOp> = enumerate_ldo(ty, ty)
            .unwrap()
            .into_iter()
            .filter(is_symmetry_ref)
            .collect();
        let direct: BTreeSet<DetOp> = enumerate_lso(ty).unwrap().into_iter().collect();
        assert_eq!(from_filter, direct);

        fn is_symmetry_ref(op: &DetOp) -> bool {
            is_symmetry(op)
        }
    }

    #[test]
    fn small_type_symmetry_order() {
        let ty = BoxType::new(2, 2, 1, 1).unwrap();
        assert_eq!(enumerate_lso(ty).unwrap().len(), 4);
    }

    #[test]
    fn compose_matches_sequential_application() {
        let ty = BoxType::b2222();
        let ops = enumerate_ldo(ty, ty).unwrap();
        let b = random_rational_box(5);
        for (i, j) in [(17usize, 2345usize), (100, 100), (4095, 0), (911, 1723)] {
            let combined = compose(&ops[i], &ops[j]).unwrap();
            let lhs = apply_det(&combined, &b).unwrap();
            let rhs = apply_det(&ops[i], &apply_det(&ops[j], &b).unwrap()).unwrap();
            assert_eq!(lhs.rational_key(), rhs.rational_key());
        }
    }

    #[test]
    fn generators_are_involutions() {
        let id = DetOp::identity(BoxType::b2222());
        for g in relabelling_generators() {
            assert!(is_symmetry(&g));
            assert_eq!(compose(&g, &g).unwrap(), id);
            assert_eq!(invert(&g).unwrap(), g);
        }
    }

    /// Component transformation table for the six generators, frozen
    /// independently of their wing-map definitions. Components are in
    /// the order (⟨A₀⟩,⟨A₁⟩,⟨B₀⟩,⟨B₁⟩,⟨A₀B₀⟩,⟨A₁B₀⟩,⟨A₀B₁⟩,⟨A₁B₁⟩);
    /// entry (src, sign) means: new component = sign × old component src.
    const GENERATOR_ACTIONS: [[(usize, i64); 8]; 6] = [
        // flip B outcomes: B biases and all correlators negate
        [(0, 1), (1, 1), (2, -1), (3, -1), (4, -1), (5, -1), (6, -1), (7, -1)],
        // swap A settings: A biases swap, correlator rows swap
        [(1, 1), (0, 1), (2, 1), (3, 1), (5, 1), (4, 1), (7, 1), (6, 1)],
        // swap B settings: B biases swap, correlator columns swap
        [(0, 1), (1, 1), (3, 1), (2, 1), (6, 1), (7, 1), (4, 1), (5, 1)],
        // flip both outcomes: all biases negate, correlators fixed
        [(0, -1), (1, -1), (2, -1), (3, -1), (4, 1), (5, 1), (6, 1), (7, 1)],
        // flip A outcome at second setting + swap B settings
        [(0, 1), (1, -1), (3, 1), (2, 1), (6, 1), (7, -1), (4, 1), (5, -1)],
        // swap A settings + flip B outcome at second setting
        [(1, 1), (0, 1), (2, 1), (3, -1), (5, 1), (4, 1), (7, -1), (6, -1)],
    ];

    #[test]
    fn generator_actions_on_correlators_match_frozen_table() {
        let gens = relabelling_generators();
        for seed in 1..=50u64 {
            let b = random_rational_box(seed);
            let before = to_correlators(&b).unwrap();
            let before_parts: Vec<Scalar> =
                before.components().iter().map(|c| (*c).clone()).collect();
            for (g, action) in gens.iter().zip(GENERATOR_ACTIONS.iter()) {
                let after = to_correlators(&apply_det(g, &b).unwrap()).unwrap();
                let after_parts = after.components();
                for (slot, &(src, sign)) in action.iter().enumerate() {
                    let expected = if sign < 0 {
                        before_parts[src].neg()
                    } else {
                        before_parts[src].clone()
                    };
                    assert_eq!(
                        *after_parts[slot], expected,
                        "generator {} component {slot}",
                        gens.iter().position(|x| x == g).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn subgroup_closures_have_expected_orders() {
        let g123 = subgroup_closure(&variant_permuting_generators()).unwrap();
        let g456 = subgroup_closure(&canonical_stabilizer_generators()).unwrap();
        let full = subgroup_closure(&relabelling_generators()).unwrap();
        assert_eq!(g123.len(), 8);
        assert_eq!(g456.len(), 8);
        assert_eq!(full.len(), 64);
        let s123: BTreeSet<&DetOp> = g123.iter().collect();
        let s456: BTreeSet<&DetOp> = g456.iter().collect();
        let common: Vec<_> = s123.intersection(&s456).collect();
        assert_eq!(common.len(), 1);
        assert_eq!(**common[0], DetOp::identity(BoxType::b2222()));
        // The closure of the full generating set is the whole symmetry group.
        let lso: BTreeSet<DetOp> = enumerate_lso(BoxType::b2222()).unwrap().into_iter().collect();
        assert_eq!(full.into_iter().collect::<BTreeSet<_>>(), lso);
        assert_eq!(
            subgroup_closure(&[DetOp::identity(BoxType::b2222())])
                .unwrap()
                .len(),
            1
        );
    }

    #[test]
    fn non_symmetry_generator_is_rejected() {
        let ty = BoxType::b2222();
        let constant = WingDetOp {
            pre: vec![0, 0],
            post: vec![vec![0, 0], vec![0, 0]],
        };
        let op = DetOp::new(ty, ty, constant, WingDetOp::identity(2, 2)).unwrap();
        assert!(matches!(
            subgroup_closure(&[op]),
            Err(Error::NotInvertible)
        ));
    }

    #[test]
    fn pr_orbit_under_variant_subgroup_is_all_eight() {
        let pr = pr_box_variant(0);
        let g123 = subgroup_closure(&variant_permuting_generators()).unwrap();
        let images = orbit(&pr, &g123).unwrap();
        assert_eq!(images.len(), 8);
        let mut variants = BTreeSet::new();
        for im in &images {
            let k = crate::boxes::violated_variant(&im).unwrap().unwrap();
            assert_eq!(chsh(&im, k).unwrap(), Scalar::from_int(4));
            variants.insert(k);
        }
        assert_eq!(variants.len(), 8);
    }

    #[test]
    fn stabilizer_fixes_pr_and_canonical_functional() {
        let pr = pr_box_variant(0);
        let g456 = subgroup_closure(&canonical_stabilizer_generators()).unwrap();
        assert_eq!(orbit(&pr, &g456).unwrap().len(), 1);
        // CHSH_0 is invariant: CHSH_0(g·b) = CHSH_0(b) for all g in the
        // stabilizer, on random boxes.
        let b = random_rational_box(31);
        let v0 = chsh(&b, 0).unwrap();
        for g in &g456 {
            assert_eq!(chsh(&apply_det(g, &b).unwrap(), 0).unwrap(), v0);
        }
    }

    #[test]
    fn uniform_box_is_fixed_by_all_symmetries() {
        let u = uniform_box();
        let lso = enumerate_lso(BoxType::b2222()).unwrap();
        assert_eq!(orbit(&u, &lso).unwrap().len(), 1);
    }

    #[test]
    fn point_mass_losr_equals_det() {
        let b = random_rational_box(77);
        let ops = enumerate_ldo(b.ty(), b.ty()).unwrap();
        let op = ops[1234].clone();
        let via_losr = apply_losr(&LosrOp::point(op.clone()), &b).unwrap();
        let via_det = apply_det(&op, &b).unwrap();
        assert_eq!(via_losr.rational_key(), via_det.rational_key());
    }

    #[test]
    fn losr_weight_validation() {
        let id = DetOp::identity(BoxType::b2222());
        assert!(matches!(
            LosrOp::new(vec![(rat(1, 2), id.clone()), (rat(1, 4), id.clone())]),
            Err(Error::WeightError(_))
        ));
        assert!(matches!(
            LosrOp::new(vec![(rat(-1, 2), id.clone()), (rat(3, 2), id.clone())]),
            Err(Error::WeightError(_))
        ));
        assert!(LosrOp::new(vec![(rat(1, 2), id.clone()), (rat(1, 2), id)]).is_ok());
    }

    #[test]
    fn stabilizer_average_fixes_pr_and_collapses_saturating_det_boxes() {
        let pr = pr_box_variant(0);
        assert_eq!(
            reynolds_projection(&pr).unwrap().rational_key(),
            pr.rational_key()
        );
        // The expected collapse target: the uniform PR/noise mixture with
        // correlators (1/2, 1/2, 1/2, −1/2).
        let l_npr = mix(
            &[pr.clone(), uniform_box()],
            &[Scalar::ratio(1, 2), Scalar::ratio(1, 2)],
        )
        .unwrap();
        let mut saturating = 0;
        for det in enumerate_deterministic_boxes(BoxType::b2222()).unwrap() {
            if chsh(&det, 0).unwrap() == Scalar::from_int(2) {
                saturating += 1;
                assert_eq!(
                    reynolds_projection(&det).unwrap().rational_key(),
                    l_npr.rational_key()
                );
            }
        }
        assert_eq!(saturating, 8);
        // Idempotence on a random box.
        let b = random_rational_box(41);
        let once = reynolds_projection(&b).unwrap();
        let twice = reynolds_projection(&once).unwrap();
        assert_eq!(once.rational_key(), twice.rational_key());
    }

    #[test]
    fn stabilizer_average_collapses_family_onto_noisy_pr_line() {
        // Anchor: the deterministic all-zeros box (canonical-facet
        // saturating, with zero entries).
        let anchor = from_correlators(&CorrelatorForm::new(
            [Scalar::one(), Scalar::one()],
            [Scalar::one(), Scalar::one()],
            [
                [Scalar::one(), Scalar::one()],
                [Scalar::one(), Scalar::one()],
            ],
        ))
        .unwrap();
        let pr = pr_box_variant(0);
        let u = uniform_box();
        let noisy = |alpha: Scalar| {
            // C(α) = α·PR + (1−α)·(½PR + ½uniform) mixed directly:
            let l_npr = mix(
                &[pr.clone(), u.clone()],
                &[Scalar::ratio(1, 2), Scalar::ratio(1, 2)],
            )
            .unwrap();
            mix(
                &[pr.clone(), l_npr],
                &[alpha.clone(), Scalar::one().sub(&alpha)],
            )
            .unwrap()
        };
        for (an, ad, gn, gd) in [(1i64, 2i64, 1i64, 3i64), (3, 4, 2, 5), (1, 5, 4, 5)] {
            let alpha = Scalar::ratio(an, ad);
            let gamma = Scalar::ratio(gn, gd);
            let family = mix(
                &[anchor.clone(), noisy(alpha.clone())],
                &[gamma.clone(), Scalar::one().sub(&gamma)],
            )
            .unwrap();
            let projected = reynolds_projection(&family).unwrap();
            let expected = noisy(alpha.mul(&Scalar::one().sub(&gamma)));
            assert_eq!(projected.rational_key(), expected.rational_key());
        }
    }
}
