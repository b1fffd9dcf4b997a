//! Common-cause boxes: validated conditional-probability tables
//! P(x,y|s,t), their correlator coordinates, and CHSH functionals.
//!
//! A box of type (|X|,|Y|;|S|,|T|) stores P(x,y|s,t) for settings
//! s ∈ {0,…,|S|−1}, t ∈ {0,…,|T|−1} and outcomes x ∈ {0,…,|X|−1},
//! y ∈ {0,…,|Y|−1}, in (s,t,x,y) row-major order. Construction enforces
//! nonnegativity, per-setting normalization, and both no-signalling
//! conditions:
//!
//!   Σ_x P(x,y|s,t) independent of s   and   Σ_y P(x,y|s,t) independent of t.
//!
//! For 2222-type boxes the correlator form is
//!
//!   ⟨A_s⟩ = Σ_x (−1)^x P_A(x|s),   ⟨B_t⟩ = Σ_y (−1)^y P_B(y|t),
//!   ⟨A_sB_t⟩ = Σ_{x,y} (−1)^{x⊕y} P(x,y|s,t),
//!
//! with exact inverse
//!
//!   P(x,y|s,t) = (1 + (−1)^x⟨A_s⟩ + (−1)^y⟨B_t⟩ + (−1)^{x⊕y}⟨A_sB_t⟩)/4.
//!
//! The eight CHSH variants put an odd number of minus signs on the four
//! correlators; CHSH_0 = ⟨A₀B₀⟩ + ⟨A₁B₀⟩ + ⟨A₀B₁⟩ − ⟨A₁B₁⟩ is canonical.
//! A valid 2222 box is a mixture of local deterministic boxes exactly when
//! all eight variants are ≤ 2, and a nonfree box violates exactly one.

use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::lp;
use crate::scalar::{Rat, Scalar};

/// Default cap on enumeration sizes (deterministic boxes, operation sets).
pub const DEFAULT_ENUM_CAP: u64 = 1_000_000;

/// Cardinalities (|X|, |Y|; |S|, |T|) of a box type.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BoxType {
    /// Outcome cardinality |X| on the first wing.
    pub x_card: usize,
    /// Outcome cardinality |Y| on the second wing.
    pub y_card: usize,
    /// Setting cardinality |S| on the first wing.
    pub s_card: usize,
    /// Setting cardinality |T| on the second wing.
    pub t_card: usize,
}

impl BoxType {
    /// Build a type; every cardinality must be at least 1.
    pub fn new(x_card: usize, y_card: usize, s_card: usize, t_card: usize) -> Result<Self> {
        if x_card == 0 || y_card == 0 || s_card == 0 || t_card == 0 {
            return Err(Error::BadParameter(format!(
                "box type cardinalities must be >= 1, got ({x_card},{y_card};{s_card},{t_card})"
            )));
        }
        Ok(BoxType {
            x_card,
            y_card,
            s_card,
            t_card,
        })
    }

    /// The 2222 type: two settings and two outcomes per wing.
    pub fn b2222() -> Self {
        BoxType {
            x_card: 2,
            y_card: 2,
            s_card: 2,
            t_card: 2,
        }
    }

    /// True for the 2222 type.
    pub fn is_2222(&self) -> bool {
        self.x_card == 2 && self.y_card == 2 && self.s_card == 2 && self.t_card == 2
    }

    /// Number of table entries.
    pub fn table_len(&self) -> usize {
        self.s_card * self.t_card * self.x_card * self.y_card
    }

    /// Row-major index of (s,t,x,y).
    pub fn idx(&self, s: usize, t: usize, x: usize, y: usize) -> usize {
        debug_assert!(s < self.s_card && t < self.t_card && x < self.x_card && y < self.y_card);
        ((s * self.t_card + t) * self.x_card + x) * self.y_card + y
    }
}

impl std::fmt::Display for BoxType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "({},{};{},{})",
            self.x_card, self.y_card, self.s_card, self.t_card
        )
    }
}

/// A validated common-cause box.
#[derive(Clone, Debug, PartialEq)]
pub struct CcBox {
    ty: BoxType,
    entries: Vec<Scalar>,
}

impl CcBox {
    /// Validate a probability table and wrap it as a box.
    ///
    /// `entries` is in (s,t,x,y) row-major order and must have
    /// `ty.table_len()` elements. Checks nonnegativity, normalization of
    /// every setting block, and both no-signalling conditions; approximate
    /// entries are allowed their propagated error bounds.
    pub fn new(ty: BoxType, entries: Vec<Scalar>) -> Result<Self> {
        if entries.len() != ty.table_len() {
            return Err(Error::BadParameter(format!(
                "table for type {ty} needs {} entries, got {}",
                ty.table_len(),
                entries.len()
            )));
        }
        let b = CcBox { ty, entries };
        b.validate()?;
        Ok(b)
    }

    fn validate(&self) -> Result<()> {
        let ty = self.ty;
        let zero = Rat::zero();
        for s in 0..ty.s_card {
            for t in 0..ty.t_card {
                let mut block = Vec::with_capacity(ty.x_card * ty.y_card);
                for x in 0..ty.x_card {
                    for y in 0..ty.y_card {
                        let v = self.get(s, t, x, y);
                        if !v.ge_with_slack(&zero) {
                            return Err(Error::NegativeProbability {
                                s,
                                t,
                                x,
                                y,
                                value: v.to_string(),
                            });
                        }
                        block.push(v.clone());
                    }
                }
                let total = Scalar::sum(block.iter());
                if !total.eq_with_slack(&Rat::one()) {
                    return Err(Error::NotNormalized {
                        s,
                        t,
                        total: total.to_string(),
                    });
                }
            }
        }
        // Wing-A marginal P(x|s) must not depend on t.
        for s in 0..ty.s_card {
            for x in 0..ty.x_card {
                let reference = self.marginal_a(s, 0, x);
                for t in 1..ty.t_card {
                    let m = self.marginal_a(s, t, x);
                    if !reference.consistent_with(&m) {
                        return Err(Error::SignallingDetected {
                            wing: 'A',
                            detail: format!(
                                "P(x={x}|s={s}) is {reference} at t=0 but {m} at t={t}"
                            ),
                        });
                    }
                }
            }
        }
        // Wing-B marginal P(y|t) must not depend on s.
        for t in 0..ty.t_card {
            for y in 0..ty.y_card {
                let reference = self.marginal_b(0, t, y);
                for s in 1..ty.s_card {
                    let m = self.marginal_b(s, t, y);
                    if !reference.consistent_with(&m) {
                        return Err(Error::SignallingDetected {
                            wing: 'B',
                            detail: format!(
                                "P(y={y}|t={t}) is {reference} at s=0 but {m} at s={s}"
                            ),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// Box type.
    pub fn ty(&self) -> BoxType {
        self.ty
    }

    /// Entry P(x,y|s,t).
    pub fn get(&self, s: usize, t: usize, x: usize, y: usize) -> &Scalar {
        &self.entries[self.ty.idx(s, t, x, y)]
    }

    /// All entries in (s,t,x,y) row-major order.
    pub fn entries(&self) -> &[Scalar] {
        &self.entries
    }

    /// True when every entry is exact.
    pub fn is_exact(&self) -> bool {
        self.entries.iter().all(Scalar::is_exact)
    }

    /// Largest entry error bound (zero for exact boxes).
    pub fn max_tol(&self) -> f64 {
        self.entries.iter().map(Scalar::tol).fold(0.0, f64::max)
    }

    /// Exact rational view of the table, used as a canonical identity key.
    pub fn rational_key(&self) -> Vec<Rat> {
        self.entries.iter().map(Scalar::rationalize).collect()
    }

    /// Entrywise closeness of the double views, for numeric tests.
    pub fn close_to(&self, other: &CcBox, within: f64) -> bool {
        self.ty == other.ty
            && self
                .entries
                .iter()
                .zip(&other.entries)
                .all(|(a, b)| a.close_to(b, within))
    }

    /// Wing-A marginal P(x|s) computed in context t.
    fn marginal_a(&self, s: usize, t: usize, x: usize) -> Scalar {
        let terms: Vec<&Scalar> = (0..self.ty.y_card).map(|y| self.get(s, t, x, y)).collect();
        Scalar::sum(terms)
    }

    /// Wing-B marginal P(y|t) computed in context s.
    fn marginal_b(&self, s: usize, t: usize, y: usize) -> Scalar {
        let terms: Vec<&Scalar> = (0..self.ty.x_card).map(|x| self.get(s, t, x, y)).collect();
        Scalar::sum(terms)
    }
}

/// Validate a probability table as a box; alias of [`CcBox::new`].
pub fn make_box(ty: BoxType, entries: Vec<Scalar>) -> Result<CcBox> {
    CcBox::new(ty, entries)
}

/// Biases and two-point correlators of a 2222-type box.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelatorForm {
    /// ⟨A_s⟩ for s = 0, 1.
    pub a_bias: [Scalar; 2],
    /// ⟨B_t⟩ for t = 0, 1.
    pub b_bias: [Scalar; 2],
    /// ⟨A_s B_t⟩ indexed corr\[s\]\[t\].
    pub corr: [[Scalar; 2]; 2],
}

impl CorrelatorForm {
    /// Assemble a form from components.
    pub fn new(a_bias: [Scalar; 2], b_bias: [Scalar; 2], corr: [[Scalar; 2]; 2]) -> Self {
        CorrelatorForm {
            a_bias,
            b_bias,
            corr,
        }
    }

    /// The all-zero form (the uniform box).
    pub fn zero() -> Self {
        let z = Scalar::zero;
        CorrelatorForm {
            a_bias: [z(), z()],
            b_bias: [z(), z()],
            corr: [[z(), z()], [z(), z()]],
        }
    }

    /// Form with zero biases and the given correlators (corr\[s\]\[t\]).
    pub fn from_corr(corr: [[Scalar; 2]; 2]) -> Self {
        let z = Scalar::zero;
        CorrelatorForm {
            a_bias: [z(), z()],
            b_bias: [z(), z()],
            corr,
        }
    }

    /// The eight components in the fixed order
    /// (⟨A₀⟩, ⟨A₁⟩, ⟨B₀⟩, ⟨B₁⟩, ⟨A₀B₀⟩, ⟨A₁B₀⟩, ⟨A₀B₁⟩, ⟨A₁B₁⟩).
    pub fn components(&self) -> [&Scalar; 8] {
        [
            &self.a_bias[0],
            &self.a_bias[1],
            &self.b_bias[0],
            &self.b_bias[1],
            &self.corr[0][0],
            &self.corr[1][0],
            &self.corr[0][1],
            &self.corr[1][1],
        ]
    }
}

pub(crate) fn require_2222(ty: BoxType) -> Result<()> {
    if ty.is_2222() {
        Ok(())
    } else {
        Err(Error::WrongType {
            expected: "(2,2;2,2)".into(),
            found: ty.to_string(),
        })
    }
}

/// Sign of (−1)^n as an exact scalar factor applied to `v`.
fn signed(v: &Scalar, negate: bool) -> Scalar {
    if negate {
        v.neg()
    } else {
        v.clone()
    }
}

/// Compute the bias/correlator coordinates of a 2222 box.
pub fn to_correlators(b: &CcBox) -> Result<CorrelatorForm> {
    require_2222(b.ty())?;
    let corr_sum = |s: usize, t: usize| -> Scalar {
        let mut acc = Scalar::zero();
        for x in 0..2 {
            for y in 0..2 {
                acc = acc.add(&signed(b.get(s, t, x, y), (x + y) % 2 == 1));
            }
        }
        acc
    };
    let a_bias_at = |s: usize| -> Scalar {
        let mut acc = Scalar::zero();
        for x in 0..2 {
            for y in 0..2 {
                acc = acc.add(&signed(b.get(s, 0, x, y), x == 1));
            }
        }
        acc
    };
    let b_bias_at = |t: usize| -> Scalar {
        let mut acc = Scalar::zero();
        for x in 0..2 {
            for y in 0..2 {
                acc = acc.add(&signed(b.get(0, t, x, y), y == 1));
            }
        }
        acc
    };
    Ok(CorrelatorForm {
        a_bias: [a_bias_at(0), a_bias_at(1)],
        b_bias: [b_bias_at(0), b_bias_at(1)],
        corr: [
            [corr_sum(0, 0), corr_sum(0, 1)],
            [corr_sum(1, 0), corr_sum(1, 1)],
        ],
    })
}

/// Reconstruct the 2222 box with the given biases and correlators.
pub fn from_correlators(form: &CorrelatorForm) -> Result<CcBox> {
    let ty = BoxType::b2222();
    let quarter = Scalar::ratio(1, 4);
    let mut entries = Vec::with_capacity(16);
    for s in 0..2 {
        for t in 0..2 {
            for x in 0..2 {
                for y in 0..2 {
                    let mut v = Scalar::one();
                    v = v.add(&signed(&form.a_bias[s], x == 1));
                    v = v.add(&signed(&form.b_bias[t], y == 1));
                    v = v.add(&signed(&form.corr[s][t], (x + y) % 2 == 1));
                    entries.push(v.mul(&quarter));
                }
            }
        }
    }
    CcBox::new(ty, entries)
}

/// Signs σ_k = (σ⁰⁰, σ¹⁰, σ⁰¹, σ¹¹) of the eight CHSH variants, applied to
/// (⟨A₀B₀⟩, ⟨A₁B₀⟩, ⟨A₀B₁⟩, ⟨A₁B₁⟩). Variant k places the minus sign of
/// the canonical form on the (3−k)-th listed correlator for k ≤ 3, and
/// variants 4–7 are the negations of 0–3, so exactly the odd-minus-sign
/// patterns appear.
pub const CHSH_SIGNS: [[i64; 4]; 8] = [
    [1, 1, 1, -1],
    [1, 1, -1, 1],
    [1, -1, 1, 1],
    [-1, 1, 1, 1],
    [-1, -1, -1, 1],
    [-1, -1, 1, -1],
    [-1, 1, -1, -1],
    [1, -1, -1, -1],
];

/// CHSH variant value CHSH_k(b) for k ∈ {0,…,7}.
pub fn chsh(b: &CcBox, k: usize) -> Result<Scalar> {
    require_2222(b.ty())?;
    if k >= 8 {
        return Err(Error::BadParameter(format!(
            "CHSH variant index must be in 0..8, got {k}"
        )));
    }
    let form = to_correlators(b)?;
    Ok(chsh_of_form(&form, k))
}

/// CHSH variant value evaluated on a correlator form.
pub fn chsh_of_form(form: &CorrelatorForm, k: usize) -> Scalar {
    let terms = [
        &form.corr[0][0],
        &form.corr[1][0],
        &form.corr[0][1],
        &form.corr[1][1],
    ];
    let mut acc = Scalar::zero();
    for (sign, term) in CHSH_SIGNS[k].iter().zip(terms) {
        acc = acc.add(&signed(term, *sign < 0));
    }
    acc
}

/// Index of the unique CHSH variant a nonfree 2222 box violates, or `None`
/// for a free box.
///
/// At most one variant of a valid box can exceed 2, so a clear violation
/// decides the answer even when other variants sit ambiguously near 2
/// under approximate arithmetic; with no clear violation, any ambiguous
/// variant makes the answer undecidable and is surfaced as an error.
pub fn violated_variant(b: &CcBox) -> Result<Option<usize>> {
    require_2222(b.ty())?;
    let form = to_correlators(b)?;
    let two = Scalar::from_int(2);
    let mut clear: Vec<usize> = Vec::new();
    let mut ambiguous: Vec<usize> = Vec::new();
    for k in 0..8 {
        let v = chsh_of_form(&form, k);
        match v.try_cmp(&two) {
            Ok(std::cmp::Ordering::Greater) => clear.push(k),
            Ok(_) => {}
            Err(Error::AmbiguousBoundary(_)) => ambiguous.push(k),
            Err(e) => return Err(e),
        }
    }
    match clear.len() {
        0 => {
            if ambiguous.is_empty() {
                Ok(None)
            } else {
                Err(Error::AmbiguousBoundary(format!(
                    "CHSH variants {ambiguous:?} are within tolerance of 2 and none is clearly above"
                )))
            }
        }
        1 => Ok(Some(clear[0])),
        _ => Err(Error::Internal(format!(
            "variants {clear:?} all exceed 2 on one box, contradicting mutual exclusivity"
        ))),
    }
}

/// All products of per-wing deterministic strategies of the given type,
/// capped at `cap` boxes.
///
/// Strategy (u, v) with u: S→X and v: T→Y yields P(x,y|s,t) =
/// \[x = u(s)\]·\[y = v(t)\]. The list is ordered by the mixed-radix code
/// of u (digit s has weight |X|^s) major, then the code of v.
pub fn enumerate_deterministic_boxes_capped(ty: BoxType, cap: u64) -> Result<Vec<CcBox>> {
    let count_a = (ty.x_card as u128).checked_pow(ty.s_card as u32);
    let count_b = (ty.y_card as u128).checked_pow(ty.t_card as u32);
    let required = count_a
        .zip(count_b)
        .and_then(|(a, b)| a.checked_mul(b))
        .unwrap_or(u128::MAX);
    if required > cap as u128 {
        return Err(Error::ResourceLimit { required, cap });
    }
    let na = count_a.unwrap() as usize;
    let nb = count_b.unwrap() as usize;
    let decode = |code: usize, base: usize, len: usize| -> Vec<usize> {
        let mut digits = Vec::with_capacity(len);
        let mut c = code;
        for _ in 0..len {
            digits.push(c % base);
            c /= base;
        }
        digits
    };
    let mut out = Vec::with_capacity(na * nb);
    for ia in 0..na {
        let u = decode(ia, ty.x_card, ty.s_card);
        for ib in 0..nb {
            let v = decode(ib, ty.y_card, ty.t_card);
            let mut entries = vec![Scalar::zero(); ty.table_len()];
            for s in 0..ty.s_card {
                for t in 0..ty.t_card {
                    entries[ty.idx(s, t, u[s], v[t])] = Scalar::one();
                }
            }
            out.push(CcBox { ty, entries });
        }
    }
    Ok(out)
}

/// All deterministic boxes of the given type, with the default cap.
pub fn enumerate_deterministic_boxes(ty: BoxType) -> Result<Vec<CcBox>> {
    enumerate_deterministic_boxes_capped(ty, DEFAULT_ENUM_CAP)
}

/// Reduced coordinates of a box: wing marginals P(x|s) for x < |X|−1 and
/// P(y|t) for y < |Y|−1, then joint entries P(x,y|s,t) over the same
/// truncated outcome ranges.
///
/// This map is linear and injective on the no-signalling subspace (the
/// dropped entries are recovered from normalization and the no-signalling
/// equalities), so membership questions in the convex hull of a set of
/// boxes can be decided on these coordinates.
pub fn reduced_coords(b: &CcBox) -> Vec<Rat> {
    reduced_coords_table(b.ty(), &b.rational_key())
}

/// [`reduced_coords`] computed directly from a rational table in
/// (s,t,x,y) row-major order.
pub(crate) fn reduced_coords_table(ty: BoxType, table: &[Rat]) -> Vec<Rat> {
    let mut coords = Vec::new();
    for s in 0..ty.s_card {
        for x in 0..ty.x_card - 1 {
            let mut acc = Rat::zero();
            for y in 0..ty.y_card {
                acc += &table[ty.idx(s, 0, x, y)];
            }
            coords.push(acc);
        }
    }
    for t in 0..ty.t_card {
        for y in 0..ty.y_card - 1 {
            let mut acc = Rat::zero();
            for x in 0..ty.x_card {
                acc += &table[ty.idx(0, t, x, y)];
            }
            coords.push(acc);
        }
    }
    for s in 0..ty.s_card {
        for t in 0..ty.t_card {
            for x in 0..ty.x_card - 1 {
                for y in 0..ty.y_card - 1 {
                    coords.push(table[ty.idx(s, t, x, y)].clone());
                }
            }
        }
    }
    coords
}

/// Largest accumulated error bound over the reduced coordinates of `b`.
pub(crate) fn reduced_coord_tol(b: &CcBox) -> f64 {
    // Each reduced coordinate sums at most max(|X|, |Y|) entries.
    let ty = b.ty();
    b.max_tol() * ty.x_card.max(ty.y_card) as f64
}

/// Is the box a mixture of deterministic boxes of its type?
///
/// Decided by exact linear feasibility on reduced coordinates. Approximate
/// boxes are rationalized and judged by their exact distance to the hull:
/// distance zero is membership, distance beyond ten times the accumulated
/// entry tolerance is clear non-membership, and anything between is
/// refused as unsound.
pub fn is_free(b: &CcBox) -> Result<bool> {
    let det = enumerate_deterministic_boxes(b.ty())?;
    let columns: Vec<Vec<Rat>> = det.iter().map(reduced_coords).collect();
    let target = reduced_coords(b);
    if b.is_exact() {
        Ok(lp::hull_membership(&columns, &target)?.is_inside())
    } else {
        let margin = 10.0 * reduced_coord_tol(b);
        let (distance, _) = lp::hull_distance(&columns, &target)?;
        if distance.is_zero() {
            Ok(true)
        } else {
            let d = distance.to_f64().unwrap_or(f64::INFINITY);
            if d > margin {
                Ok(false)
            } else {
                Err(Error::ApproxUnsound {
                    distance: d,
                    margin,
                })
            }
        }
    }
}

/// Entrywise convex combination of boxes of equal type.
pub fn mix(boxes: &[CcBox], weights: &[Scalar]) -> Result<CcBox> {
    if boxes.is_empty() {
        return Err(Error::WeightError("empty mixture".into()));
    }
    if boxes.len() != weights.len() {
        return Err(Error::WeightError(format!(
            "{} boxes but {} weights",
            boxes.len(),
            weights.len()
        )));
    }
    let ty = boxes[0].ty();
    for b in &boxes[1..] {
        if b.ty() != ty {
            return Err(Error::TypeMismatch(format!(
                "cannot mix boxes of types {ty} and {}",
                b.ty()
            )));
        }
    }
    for w in weights {
        if !w.ge_with_slack(&Rat::zero()) {
            return Err(Error::WeightError(format!("negative weight {w}")));
        }
    }
    let total = Scalar::sum(weights.iter());
    if !total.eq_with_slack(&Rat::one()) {
        return Err(Error::WeightError(format!("weights sum to {total}, expected 1")));
    }
    let mut entries = vec![Scalar::zero(); ty.table_len()];
    for (b, w) in boxes.iter().zip(weights) {
        for (acc, e) in entries.iter_mut().zip(b.entries()) {
            *acc = acc.add(&e.mul(w));
        }
    }
    CcBox::new(ty, entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn uniform_box() -> CcBox {
        let ty = BoxType::b2222();
        CcBox::new(ty, vec![Scalar::ratio(1, 4); 16]).unwrap()
    }

    pub(crate) fn pr_box_0() -> CcBox {
        // Correlators (+1,+1,+1,−1), zero biases.
        let one = Scalar::one;
        let z = Scalar::zero;
        from_correlators(&CorrelatorForm::from_corr([
            [one(), one()],
            [one(), z().sub(&one())],
        ]))
        .unwrap()
    }

    #[test]
    fn uniform_box_is_valid_with_zero_correlators() {
        let b = uniform_box();
        let form = to_correlators(&b).unwrap();
        for c in form.components() {
            assert_eq!(*c, Scalar::zero());
        }
        for k in 0..8 {
            assert_eq!(chsh(&b, k).unwrap(), Scalar::zero());
        }
    }

    #[test]
    fn negative_entry_is_rejected_with_indices() {
        let ty = BoxType::b2222();
        let mut entries = vec![Scalar::ratio(1, 4); 16];
        entries[ty.idx(0, 0, 0, 0)] = Scalar::ratio(-1, 8);
        entries[ty.idx(0, 0, 1, 1)] = Scalar::ratio(5, 8);
        match CcBox::new(ty, entries) {
            Err(Error::NegativeProbability { s: 0, t: 0, x: 0, y: 0, .. }) => {}
            other => panic!("expected NegativeProbability at (0,0,0,0), got {other:?}"),
        }
    }

    #[test]
    fn unnormalized_block_is_rejected() {
        let ty = BoxType::b2222();
        let mut entries = vec![Scalar::ratio(1, 4); 16];
        entries[ty.idx(1, 0, 0, 0)] = Scalar::ratio(1, 2);
        match CcBox::new(ty, entries) {
            Err(Error::NotNormalized { s: 1, t: 0, .. }) => {}
            other => panic!("expected NotNormalized at (1,0), got {other:?}"),
        }
    }

    #[test]
    fn signalling_table_is_rejected() {
        // P(x|s=0) differs between t=0 and t=1: deterministic x=0 at t=0,
        // deterministic x=1 at t=1, with y uniform and independent.
        let ty = BoxType::b2222();
        let mut entries = vec![Scalar::zero(); 16];
        for t in 0..2 {
            for s in 0..2 {
                let x = if t == 0 { 0 } else { 1 };
                for y in 0..2 {
                    entries[ty.idx(s, t, x, y)] = Scalar::ratio(1, 2);
                }
            }
        }
        match CcBox::new(ty, entries) {
            Err(Error::SignallingDetected { wing: 'A', .. }) => {}
            other => panic!("expected wing-A signalling, got {other:?}"),
        }
    }

    #[test]
    fn pr_box_correlators_and_chsh() {
        let pr = pr_box_0();
        let form = to_correlators(&pr).unwrap();
        assert_eq!(form.a_bias[0], Scalar::zero());
        assert_eq!(form.corr[0][0], Scalar::one());
        assert_eq!(form.corr[1][1], Scalar::from_int(-1));
        assert_eq!(chsh(&pr, 0).unwrap(), Scalar::from_int(4));
        assert_eq!(chsh(&pr, 4).unwrap(), Scalar::from_int(-4));
        assert_eq!(violated_variant(&pr).unwrap(), Some(0));
    }

    #[test]
    fn variant_three_pattern_is_detected() {
        // Correlators (−1,+1,+1,+1) violate the variant with the sign
        // flipped on ⟨A₀B₀⟩.
        let one = Scalar::one;
        let b = from_correlators(&CorrelatorForm::from_corr([
            [one().neg(), one()],
            [one(), one()],
        ]))
        .unwrap();
        assert_eq!(chsh(&b, 3).unwrap(), Scalar::from_int(4));
        assert_eq!(violated_variant(&b).unwrap(), Some(3));
    }

    #[test]
    fn round_trip_correlators() {
        let ty = BoxType::b2222();
        let det = enumerate_deterministic_boxes(ty).unwrap();
        // A lopsided rational mixture exercises biases and correlators.
        let weights: Vec<Scalar> = (1..=16).map(|i| Scalar::ratio(i, 136)).collect();
        let b = mix(&det, &weights).unwrap();
        let back = from_correlators(&to_correlators(&b).unwrap()).unwrap();
        assert_eq!(b.rational_key(), back.rational_key());
    }

    #[test]
    fn out_of_range_correlator_is_rejected() {
        let form = CorrelatorForm::from_corr([
            [Scalar::from_int(2), Scalar::zero()],
            [Scalar::zero(), Scalar::zero()],
        ]);
        assert!(matches!(
            from_correlators(&form),
            Err(Error::NegativeProbability { .. })
        ));
    }

    #[test]
    fn deterministic_box_counts() {
        assert_eq!(
            enumerate_deterministic_boxes(BoxType::b2222()).unwrap().len(),
            16
        );
        assert_eq!(
            enumerate_deterministic_boxes(BoxType::new(2, 2, 1, 1).unwrap())
                .unwrap()
                .len(),
            4
        );
        assert_eq!(
            enumerate_deterministic_boxes(BoxType::new(3, 2, 2, 2).unwrap())
                .unwrap()
                .len(),
            36
        );
    }

    #[test]
    fn enumeration_cap_is_enforced() {
        match enumerate_deterministic_boxes_capped(BoxType::b2222(), 8) {
            Err(Error::ResourceLimit { required: 16, cap: 8 }) => {}
            other => panic!("expected ResourceLimit, got {other:?}"),
        }
    }

    #[test]
    fn mixing_pr_with_uniform_halves_chsh() {
        let pr = pr_box_0();
        let u = uniform_box();
        let half = Scalar::ratio(1, 2);
        let m = mix(&[pr, u], &[half.clone(), half]).unwrap();
        assert_eq!(chsh(&m, 0).unwrap(), Scalar::from_int(2));
        assert_eq!(violated_variant(&m).unwrap(), None);
    }

    #[test]
    fn mix_identity_and_weight_errors() {
        let b = uniform_box();
        let same = mix(std::slice::from_ref(&b), &[Scalar::one()]).unwrap();
        assert_eq!(same.rational_key(), b.rational_key());
        assert!(matches!(
            mix(&[b.clone(), b.clone()], &[Scalar::one()]),
            Err(Error::WeightError(_))
        ));
        assert!(matches!(
            mix(
                &[b.clone(), b.clone()],
                &[Scalar::ratio(3, 4), Scalar::ratio(3, 4)]
            ),
            Err(Error::WeightError(_))
        ));
        assert!(matches!(
            mix(
                &[b.clone(), b],
                &[Scalar::ratio(-1, 2), Scalar::ratio(3, 2)]
            ),
            Err(Error::WeightError(_))
        ));
    }

    #[test]
    fn free_membership_basics() {
        assert!(is_free(&uniform_box()).unwrap());
        assert!(!is_free(&pr_box_0()).unwrap());
        // The boundary box with CHSH_0 = 2 is free.
        let half = Scalar::ratio(1, 2);
        let m = mix(&[pr_box_0(), uniform_box()], &[half.clone(), half]).unwrap();
        assert!(is_free(&m).unwrap());
    }

    #[test]
    fn chsh_values_stay_in_range() {
        let det = enumerate_deterministic_boxes(BoxType::b2222()).unwrap();
        let four = Scalar::from_int(4);
        for (i, b) in det.iter().enumerate() {
            let w = Scalar::ratio(1 + (i as i64 % 3), 6);
            let rest = Scalar::one().sub(&w);
            let m = mix(&[b.clone(), uniform_box()], &[w, rest]).unwrap();
            for k in 0..8 {
                let v = chsh(&m, k).unwrap();
                assert!(v.abs().try_cmp(&four).unwrap() != std::cmp::Ordering::Greater);
            }
        }
    }

    #[test]
    fn wrong_type_is_reported() {
        let ty = BoxType::new(2, 2, 1, 1).unwrap();
        let b = CcBox::new(ty, vec![Scalar::ratio(1, 4); 4]).unwrap();
        assert!(matches!(chsh(&b, 0), Err(Error::WrongType { .. })));
        assert!(matches!(to_correlators(&b), Err(Error::WrongType { .. })));
    }
}
