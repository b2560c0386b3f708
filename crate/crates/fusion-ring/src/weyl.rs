//! Finite Weyl groups and sign-tracked dot-action folding.

use std::collections::{BTreeMap, VecDeque};

use thiserror::Error;

use crate::cartan_lattice::{add, sub, AffineData, LevelContext, Quotient, Rational, Weight};

/// Largest finite rank handled without an explicit override.
pub const DEFAULT_RANK_LIMIT: usize = 4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WeylError {
    #[error("finite rank {n} exceeds the rank limit {limit} (raise it to proceed; Weyl groups grow quickly)")]
    RankBound { n: usize, limit: usize },
    #[error("affine folding of {x:?} did not terminate within {cap} steps")]
    NonTermination { x: Weight, cap: i64 },
    #[error("affine fold certificate failed for {x:?} -> {y:?}")]
    Certificate { x: Weight, y: Weight },
}

/// An element of the finite Weyl group acting on integer coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WeylElement {
    pub matrix: Vec<Vec<i64>>,
    pub sign: i64,
}

impl WeylElement {
    pub fn identity(n: usize) -> Self {
        let matrix = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
        WeylElement { matrix, sign: 1 }
    }

    pub fn apply(&self, x: &[i64]) -> Weight {
        crate::cartan_lattice::apply(&self.matrix, x)
    }

    /// The composite `self ∘ other`.
    pub fn compose(&self, other: &WeylElement) -> WeylElement {
        let n = self.matrix.len();
        let matrix = (0..n)
            .map(|i| (0..n).map(|j| (0..n).map(|k| self.matrix[i][k] * other.matrix[k][j]).sum()).collect())
            .collect();
        WeylElement { matrix, sign: self.sign * other.sign }
    }

    pub fn is_identity(&self) -> bool {
        *self == WeylElement::identity(self.matrix.len())
    }
}

/// Reflection `v ↦ v - v_i c` for a simple direction `c`.
fn reflection(n: usize, i: usize, c: &[i64]) -> WeylElement {
    let mut w = WeylElement::identity(n);
    for (r, row) in w.matrix.iter_mut().enumerate() {
        row[i] -= c[r];
    }
    w.sign = -1;
    w
}

/// Simple reflections on weight coordinates.
pub fn simple_reflections(d: &AffineData) -> Vec<WeylElement> {
    (0..d.n).map(|i| reflection(d.n, i, &d.simple_root(i))).collect()
}

/// Simple reflections on coweight coordinates.
pub fn simple_coreflections(d: &AffineData) -> Vec<WeylElement> {
    (0..d.n).map(|i| reflection(d.n, i, &d.simple_coroot(i))).collect()
}

fn closure(n: usize, gens: &[WeylElement]) -> Vec<WeylElement> {
    let id = WeylElement::identity(n);
    let mut seen = BTreeMap::new();
    seen.insert(id.matrix.clone(), ());
    let mut out = vec![id.clone()];
    let mut queue = VecDeque::from([id]);
    while let Some(w) = queue.pop_front() {
        for g in gens {
            let v = g.compose(&w);
            if seen.insert(v.matrix.clone(), ()).is_none() {
                out.push(v.clone());
                queue.push_back(v);
            }
        }
    }
    out
}

fn check_rank(d: &AffineData, limit: usize) -> Result<(), WeylError> {
    if d.n > limit {
        Err(WeylError::RankBound { n: d.n, limit })
    } else {
        Ok(())
    }
}

/// All of the finite Weyl group acting on weights, identity first.
pub fn generate_weyl(d: &AffineData, rank_limit: usize) -> Result<Vec<WeylElement>, WeylError> {
    check_rank(d, rank_limit)?;
    Ok(closure(d.n, &simple_reflections(d)))
}

/// The finite Weyl group acting on coweights, identity first.
pub fn generate_coweyl(d: &AffineData, rank_limit: usize) -> Result<Vec<WeylElement>, WeylError> {
    check_rank(d, rank_limit)?;
    Ok(closure(d.n, &simple_coreflections(d)))
}

/// The longest element: the unique `w` with `w(ρ̄) = -ρ̄`.
pub fn longest_element(group: &[WeylElement]) -> &WeylElement {
    let n = group[0].matrix.len();
    let rho = vec![1; n];
    group.iter().find(|w| w.apply(&rho).iter().all(|&c| c == -1)).expect("finite Weyl group has a longest element")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldResult {
    pub folded: Weight,
    /// `+1`, `-1`, or `0` on a wall.
    pub sign: i64,
}

/// Folds `v` into the closed dominant chamber, reflecting at the lowest negative
/// coordinate. Returns the folded point and the accumulated element.
fn fold_dominant(directions: &[Weight], v: Weight, mut w: Option<&mut WeylElement>) -> (Weight, i64) {
    let n = v.len();
    let mut v = v;
    let mut sign = 1;
    while let Some(i) = v.iter().position(|&c| c < 0) {
        let c = v[i];
        for (vk, dk) in v.iter_mut().zip(&directions[i]) {
            *vk -= c * dk;
        }
        sign = -sign;
        if let Some(w) = w.as_deref_mut() {
            *w = reflection(n, i, &directions[i]).compose(w);
        }
    }
    (v, sign)
}

fn roots_of(d: &AffineData) -> Vec<Weight> {
    (0..d.n).map(|i| d.simple_root(i)).collect()
}

/// Dot-action fold into the dominant chamber: `y + shift = w(x + shift)` dominant.
pub fn dot_fold_finite(d: &AffineData, x: &[i64], shift: &[i64]) -> FoldResult {
    let (v, sign) = fold_dominant(&roots_of(d), add(x, shift), None);
    let sign = if v.contains(&0) { 0 } else { sign };
    FoldResult { folded: sub(&v, shift), sign }
}

/// Same as [`dot_fold_finite`] on coweight coordinates.
pub fn dot_fold_finite_coweight(d: &AffineData, x: &[i64], shift: &[i64]) -> FoldResult {
    let dirs: Vec<Weight> = (0..d.n).map(|i| d.simple_coroot(i)).collect();
    let (v, sign) = fold_dominant(&dirs, add(x, shift), None);
    let sign = if v.contains(&0) { 0 } else { sign };
    FoldResult { folded: sub(&v, shift), sign }
}

/// Dominant representative of the `W̊`-orbit of a weight.
pub fn dominant_representative(d: &AffineData, x: &[i64]) -> (Weight, i64) {
    fold_dominant(&roots_of(d), x.to_vec(), None)
}

/// True when no nontrivial element of `group` fixes the class of `v` in `q`.
pub fn stabilizer_is_trivial(group: &[WeylElement], q: &Quotient, v: &[i64]) -> bool {
    group.iter().filter(|w| !w.is_identity()).all(|w| !q.contains(&sub(&w.apply(v), v)))
}

/// Result of an affine fold together with its verified certificate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineFold {
    pub result: FoldResult,
    /// Finite part `w` with `y + shift - w(x + shift) ∈ kM`.
    pub finite_part: WeylElement,
    pub affine_reflections: usize,
}

/// Dot-action fold into the fundamental alcove `v_i >= 0`, `(v | θ) <= k`.
pub fn dot_fold_affine(ctx: &LevelContext, x: &[i64], shift: &[i64]) -> Result<AffineFold, WeylError> {
    let d = &ctx.data;
    let k = ctx.k;
    let n = d.n;
    let dirs = roots_of(d);
    let theta = &d.theta;
    let theta_norm = d.norm(theta);
    let comarks = &d.comarks[1..];
    let level_of = |v: &[i64]| -> i64 { v.iter().zip(comarks).map(|(a, b)| a * b).sum() };
    // Linear part of the reflection in θ: v ↦ v - ((v|θ) · 2/|θ|²) θ.
    let coroot: Vec<Rational> = theta.iter().map(|&t| Rational::from_integer(2 * t) / theta_norm).collect();
    let mut s_theta = WeylElement::identity(n);
    for (r, row) in s_theta.matrix.iter_mut().enumerate() {
        for (c, entry) in row.iter_mut().enumerate() {
            let delta = coroot[r] * Rational::from_integer(comarks[c]);
            if !delta.is_integer() {
                return Err(WeylError::Certificate { x: x.to_vec(), y: theta.clone() });
            }
            *entry -= delta.to_integer();
        }
    }
    s_theta.sign = -1;

    let start = add(x, shift);
    let mut v = start.clone();
    let mut w = WeylElement::identity(n);
    let mut sign = 1;
    let mut reflections = 0usize;
    let cap = 64 * k;
    let mut steps = 0i64;
    loop {
        steps += 1;
        if steps > cap {
            return Err(WeylError::NonTermination { x: x.to_vec(), cap });
        }
        let (folded, s) = fold_dominant(&dirs, v, Some(&mut w));
        v = folded;
        sign *= s;
        let t = level_of(&v);
        if t <= k {
            break;
        }
        let c = Rational::from_integer(2 * (t - k)) / theta_norm;
        let mut next = Vec::with_capacity(n);
        for (vi, th) in v.iter().zip(theta) {
            let q = Rational::from_integer(*vi) - c * Rational::from_integer(*th);
            if !q.is_integer() {
                return Err(WeylError::Certificate { x: x.to_vec(), y: v.clone() });
            }
            next.push(q.to_integer());
        }
        v = next;
        w = s_theta.compose(&w);
        sign = -sign;
        reflections += 1;
    }
    let on_wall = v.contains(&0) || level_of(&v) == k;
    let diff = sub(&v, &w.apply(&start));
    if !ctx.group.contains(&diff) || w.sign != sign {
        return Err(WeylError::Certificate { x: x.to_vec(), y: sub(&v, shift) });
    }
    Ok(AffineFold {
        result: FoldResult { folded: sub(&v, shift), sign: if on_wall { 0 } else { sign } },
        finite_part: w,
        affine_reflections: reflections,
    })
}

/// True when `v` lies strictly inside the alcove `v_i > 0`, `Σ m_i v_i < k`.
pub fn in_open_alcove(v: &[i64], level_weights: &[i64], k: i64) -> bool {
    v.iter().all(|&c| c > 0) && v.iter().zip(level_weights).map(|(a, b)| a * b).sum::<i64>() < k
}
