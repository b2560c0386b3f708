//! Weight multiplicities, characters in `C[G_ℓ]`, alternants and character values.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_complex::Complex64;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::cartan_lattice::{add, AffineData, Rational, Weight};
use crate::group_algebra::{AlgebraContext, AlgebraElement, AlgebraError, Domain};
use crate::weyl::{dominant_representative, stabilizer_is_trivial};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CharacterError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("weight {0:?} is not dominant")]
    NotDominant(Weight),
    #[error("dual label {0:?} is not regular: the Weyl denominator vanishes")]
    Singular(Weight),
    #[error("Freudenthal recursion produced a non-integral multiplicity at {0:?}")]
    NonIntegral(Weight),
    #[error("character routes disagree at {label:?}: ratio {ratio}, direct {direct}")]
    Disagreement { label: Weight, ratio: Complex64, direct: Complex64 },
}

/// Weight multiplicities of an irreducible finite-dimensional module.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightMultiplicities {
    pub highest: Weight,
    /// Every weight of the module with its multiplicity.
    pub mults: BTreeMap<Weight, i64>,
    /// The dominant weights only.
    pub dominant: BTreeMap<Weight, i64>,
}

impl WeightMultiplicities {
    pub fn dimension(&self) -> i64 {
        self.mults.values().sum()
    }

    pub fn get(&self, w: &[i64]) -> i64 {
        self.mults.get(w).copied().unwrap_or(0)
    }
}

pub fn is_dominant(x: &[i64]) -> bool {
    x.iter().all(|&c| c >= 0)
}

/// Multiplicities by Freudenthal's recursion on dominant weights, orbit-completed.
pub fn freudenthal(d: &AffineData, lambda: &[i64]) -> Result<WeightMultiplicities, CharacterError> {
    if !is_dominant(lambda) {
        return Err(CharacterError::NotDominant(lambda.to_vec()));
    }
    let roots = &d.positive_roots;
    let rho = d.rho();
    let mut depth: BTreeMap<Weight, i64> = BTreeMap::from([(lambda.to_vec(), 0)]);
    let mut stack = vec![lambda.to_vec()];
    while let Some(mu) = stack.pop() {
        let dm = depth[&mu];
        for r in roots {
            let nu: Weight = mu.iter().zip(&r.weight).map(|(a, b)| a - b).collect();
            if is_dominant(&nu) && !depth.contains_key(&nu) {
                depth.insert(nu.clone(), dm + r.coeffs.iter().sum::<i64>());
                stack.push(nu);
            }
        }
    }
    let mut order: Vec<(i64, Weight)> = depth.into_iter().map(|(w, h)| (h, w)).collect();
    order.sort();

    let top = d.norm(&add(lambda, &rho));
    let mut dominant: BTreeMap<Weight, i64> = BTreeMap::new();
    let lookup = |dom: &BTreeMap<Weight, i64>, x: &[i64]| -> i64 {
        let (rep, _) = dominant_representative(d, x);
        dom.get(&rep).copied().unwrap_or(0)
    };
    for (_, mu) in order {
        if mu == lambda {
            dominant.insert(mu, 1);
            continue;
        }
        let mut num = Rational::zero();
        for r in roots {
            let mut nu = add(&mu, &r.weight);
            loop {
                let m = lookup(&dominant, &nu);
                if m == 0 {
                    break;
                }
                num += Rational::from_integer(m) * d.pairing(&nu, &r.weight);
                nu = add(&nu, &r.weight);
            }
        }
        let den = top - d.norm(&add(&mu, &rho));
        let m = num * Rational::from_integer(2) / den;
        if !m.is_integer() {
            return Err(CharacterError::NonIntegral(mu));
        }
        if m.to_integer() > 0 {
            dominant.insert(mu, m.to_integer());
        }
    }
    let mut mults = BTreeMap::new();
    for (mu, &m) in &dominant {
        for w in orbit(d, mu) {
            mults.insert(w, m);
        }
    }
    Ok(WeightMultiplicities { highest: lambda.to_vec(), mults, dominant })
}

/// The `W̊`-orbit of a weight, generated by simple reflections.
pub fn orbit(d: &AffineData, x: &[i64]) -> BTreeSet<Weight> {
    let mut seen = BTreeSet::from([x.to_vec()]);
    let mut stack = vec![x.to_vec()];
    while let Some(v) = stack.pop() {
        for i in 0..d.n {
            let c = v[i];
            if c == 0 {
                continue;
            }
            let a = d.simple_root(i);
            let s: Weight = v.iter().zip(&a).map(|(x, y)| x - c * y).collect();
            if seen.insert(s.clone()) {
                stack.push(s);
            }
        }
    }
    seen
}

/// Weyl's dimension formula `Π (λ+ρ | α) / (ρ | α)`.
pub fn weyl_dimension(d: &AffineData, lambda: &[i64]) -> i64 {
    let rho = d.rho();
    let lr = add(lambda, &rho);
    let mut q = Rational::one();
    for r in &d.positive_roots {
        q *= d.pairing(&lr, &r.weight) / d.pairing(&rho, &r.weight);
    }
    q.to_integer()
}

/// Cached multiplicities for a dominant weight.
pub fn multiplicities(ctx: &AlgebraContext, lambda: &[i64]) -> Result<Arc<WeightMultiplicities>, CharacterError> {
    if let Some(m) = ctx.multiplicities.read().expect("cache lock").get(lambda) {
        return Ok(m.clone());
    }
    let m = Arc::new(freudenthal(ctx.data(), lambda)?);
    ctx.multiplicities.write().expect("cache lock").entry(lambda.to_vec()).or_insert_with(|| m.clone());
    Ok(m)
}

/// Image of the character `Σ m_λ(σ) e^σ` in `C[G_ℓ]`, for any dominant `λ`.
pub fn character_element(ctx: &AlgebraContext, lambda: &[i64]) -> Result<AlgebraElement, CharacterError> {
    let m = multiplicities(ctx, lambda)?;
    let mut out = ctx.zero(Domain::Group);
    for (w, &c) in &m.mults {
        out.coeffs[ctx.group_index(w)] += Complex64::new(c as f64, 0.0);
    }
    Ok(out)
}

/// `A_x = Σ ε(w) e^{w(x)}`.
pub fn alternant(ctx: &AlgebraContext, x: &[i64]) -> AlgebraElement {
    let mut out = ctx.zero(Domain::Group);
    for w in &ctx.weyl {
        out.coeffs[ctx.group_index(&w.apply(x))] += Complex64::new(w.sign as f64, 0.0);
    }
    out
}

/// `ℰ = |W̊|⁻¹ Σ ε(w) w`.
pub fn antisymmetrize(ctx: &AlgebraContext, f: &AlgebraElement) -> Result<AlgebraElement, CharacterError> {
    if f.domain != Domain::Group {
        return Err(AlgebraError::SideMismatch { expected: Domain::Group, found: f.domain }.into());
    }
    let scale = 1.0 / ctx.weyl.len() as f64;
    let mut out = ctx.zero(Domain::Group);
    for (i, c) in f.coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let x = &ctx.group_elements()[i];
        for w in &ctx.weyl {
            out.coeffs[ctx.group_index(&w.apply(x))] += c * (w.sign as f64 * scale);
        }
    }
    Ok(out)
}

/// True when the shifted dual label `μ + shift` has trivial stabilizer.
pub fn is_regular_label(ctx: &AlgebraContext, mu: &[i64]) -> bool {
    let v = add(mu, &ctx.lattice.dual_shift());
    stabilizer_is_trivial(&ctx.dual_weyl, &ctx.lattice.dual, &v)
}

/// `Σ_w ε(w) e^{-2πi⟨w(x), μ + shift⟩/k}`.
pub fn alternant_value(ctx: &AlgebraContext, x: &[i64], mu: &[i64]) -> Complex64 {
    let m = add(mu, &ctx.lattice.dual_shift());
    ctx.weyl.iter().map(|w| ctx.character_value(&w.apply(x), &m).conj() * w.sign as f64).sum()
}

/// Character value by the alternating ratio; fails at non-regular labels.
pub fn character_eval_ratio(ctx: &AlgebraContext, lambda: &[i64], mu: &[i64]) -> Result<Complex64, CharacterError> {
    if !is_dominant(lambda) {
        return Err(CharacterError::NotDominant(lambda.to_vec()));
    }
    if !is_regular_label(ctx, mu) {
        return Err(CharacterError::Singular(mu.to_vec()));
    }
    let rho = ctx.data().rho();
    Ok(alternant_value(ctx, &add(lambda, &rho), mu) / alternant_value(ctx, &rho, mu))
}

/// Character value summed directly over the weights of the module.
pub fn character_eval_direct(ctx: &AlgebraContext, m: &WeightMultiplicities, mu: &[i64]) -> Complex64 {
    let shifted = add(mu, &ctx.lattice.dual_shift());
    m.mults.iter().map(|(w, &c)| ctx.character_value(w, &shifted).conj() * c as f64).sum()
}

/// Character value at `ι₃(μ)`, cross-checking both routes where the ratio is defined.
pub fn character_eval(ctx: &AlgebraContext, lambda: &[i64], mu: &[i64]) -> Result<Complex64, CharacterError> {
    let m = multiplicities(ctx, lambda)?;
    let direct = character_eval_direct(ctx, &m, mu);
    match character_eval_ratio(ctx, lambda, mu) {
        Ok(ratio) => {
            if (ratio - direct).norm() > 1e-9 * (1.0 + direct.norm()) {
                return Err(CharacterError::Disagreement { label: mu.to_vec(), ratio, direct });
            }
            Ok(ratio)
        }
        Err(CharacterError::Singular(_)) => Ok(direct),
        Err(e) => Err(e),
    }
}
