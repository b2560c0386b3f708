//! The group algebra `C[G_ℓ]`, functions on its dual, and the operators acting on them.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock, RwLock};

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::cartan_lattice::{add, phi_map, AffineData, LatticeError, LevelContext, Rational, Weight};
use crate::weyl::{generate_coweyl, generate_weyl, WeylElement, WeylError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Weyl(#[from] WeylError),
    #[error("expected an element on the {expected:?} side, got {found:?}")]
    SideMismatch { expected: Domain, found: Domain },
    #[error("malformed element: {0}")]
    Malformed(String),
}

/// Whether an element lives in `C[G_ℓ]` or among functions on the dual labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Group,
    Dual,
}

/// Which identification of dual labels with characters is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Chart {
    /// `μ ↦ (λ ↦ e^{2πi⟨λ,μ⟩/k})`.
    Iota1,
    /// `μ ↦ (λ ↦ e^{-2πi⟨λ,μ⟩/k})`.
    Iota2,
    /// `μ ↦ ι₁(μ + shift)`.
    Iota3,
}

/// Dense coefficients indexed by the canonical enumeration of one side.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement {
    pub domain: Domain,
    pub coeffs: Vec<Complex64>,
}

impl AlgebraElement {
    pub fn scale(&self, c: Complex64) -> AlgebraElement {
        AlgebraElement { domain: self.domain, coeffs: self.coeffs.iter().map(|v| v * c).collect() }
    }

    pub fn add(&self, other: &AlgebraElement) -> AlgebraElement {
        assert_eq!(self.domain, other.domain);
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        AlgebraElement { domain: self.domain, coeffs }
    }

    pub fn sub(&self, other: &AlgebraElement) -> AlgebraElement {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn distance(&self, other: &AlgebraElement) -> f64 {
        self.sub(other).max_abs()
    }

    pub fn norm_squared(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// `e^{2πi q}` with `q` reduced modulo one before evaluation.
pub fn phase(q: Rational) -> Complex64 {
    let den = *q.denom();
    let num = q.numer().rem_euclid(den);
    Complex64::from_polar(1.0, 2.0 * PI * num as f64 / den as f64)
}

/// Largest group order for which transform matrices and the addition table are stored.
pub const DENSE_LIMIT: usize = 2048;

/// Dual labels grouped by suffixes of their phase functionals, for transforms
/// that sum over one box coordinate of `G_ℓ` at a time.
#[derive(Debug)]
struct Factorized {
    /// `levels[j]`: distinct suffixes `(v_j, .., v_n)` as `(v_j, id of (v_{j+1}, ..))`.
    levels: Vec<Vec<(i64, usize)>>,
    /// Id in `levels[0]` of each dual label's functional.
    labels: Vec<usize>,
}

impl Factorized {
    fn new(functionals: &[Vec<i64>]) -> Factorized {
        let n = functionals.first().map_or(0, Vec::len);
        let mut levels = vec![Vec::new(); n];
        let mut ids = vec![0usize; functionals.len()];
        for j in (0..n).rev() {
            let mut seen: HashMap<(i64, usize), usize> = HashMap::new();
            for (id, v) in ids.iter_mut().zip(functionals) {
                let key = (v[j], *id);
                let next = seen.len();
                *id = *seen.entry(key).or_insert_with(|| {
                    levels[j].push(key);
                    next
                });
            }
        }
        Factorized { levels, labels: ids }
    }
}

/// Everything needed to compute in `C[G_ℓ]` for one type and level.
#[derive(Debug)]
pub struct AlgebraContext {
    pub lattice: LevelContext,
    pub weyl: Vec<WeylElement>,
    pub dual_weyl: Vec<WeylElement>,
    group_elements: Vec<Weight>,
    dual_elements: Vec<Weight>,
    roots: Vec<Complex64>,
    addition: OnceLock<Vec<Vec<u32>>>,
    chart1: OnceLock<DMatrix<Complex64>>,
    chart3: OnceLock<DMatrix<Complex64>>,
    factor1: OnceLock<Factorized>,
    factor3: OnceLock<Factorized>,
    dense_limit: usize,
    pub(crate) multiplicities: RwLock<HashMap<Weight, Arc<crate::characters::WeightMultiplicities>>>,
}

impl AlgebraContext {
    pub fn new(data: AffineData, level: i64, rank_limit: usize) -> Result<Self, AlgebraError> {
        let weyl = generate_weyl(&data, rank_limit)?;
        let dual_weyl = if data.dual_is_coweight() { generate_coweyl(&data, rank_limit)? } else { weyl.clone() };
        let lattice = LevelContext::new(data, level)?;
        let modulus = lattice.phase_modulus();
        let roots = (0..modulus).map(|j| Complex64::from_polar(1.0, 2.0 * PI * j as f64 / modulus as f64)).collect();
        Ok(AlgebraContext {
            group_elements: lattice.group.elements(),
            dual_elements: lattice.dual.elements(),
            lattice,
            weyl,
            dual_weyl,
            roots,
            addition: OnceLock::new(),
            chart1: OnceLock::new(),
            chart3: OnceLock::new(),
            factor1: OnceLock::new(),
            factor3: OnceLock::new(),
            dense_limit: DENSE_LIMIT,
            multiplicities: RwLock::new(HashMap::new()),
        })
    }

    /// Replaces [`DENSE_LIMIT`] for this context.
    pub fn with_dense_limit(mut self, limit: usize) -> Self {
        self.dense_limit = limit;
        self
    }

    pub fn data(&self) -> &AffineData {
        &self.lattice.data
    }

    pub fn k(&self) -> i64 {
        self.lattice.k
    }

    /// `g = |G_ℓ|`.
    pub fn order(&self) -> usize {
        self.group_elements.len()
    }

    pub fn group_elements(&self) -> &[Weight] {
        &self.group_elements
    }

    pub fn dual_elements(&self) -> &[Weight] {
        &self.dual_elements
    }

    pub fn group_index(&self, x: &[i64]) -> usize {
        self.lattice.group.index_of(x)
    }

    pub fn dual_index(&self, x: &[i64]) -> usize {
        self.lattice.dual.index_of(x)
    }

    fn len(&self, domain: Domain) -> usize {
        match domain {
            Domain::Group => self.group_elements.len(),
            Domain::Dual => self.dual_elements.len(),
        }
    }

    pub fn zero(&self, domain: Domain) -> AlgebraElement {
        AlgebraElement { domain, coeffs: vec![Complex64::zero(); self.len(domain)] }
    }

    /// The constant function one on the given side.
    pub fn ones(&self, domain: Domain) -> AlgebraElement {
        AlgebraElement { domain, coeffs: vec![Complex64::new(1.0, 0.0); self.len(domain)] }
    }

    /// `e^λ` for any weight `λ`.
    pub fn basis(&self, lambda: &[i64]) -> AlgebraElement {
        let mut e = self.zero(Domain::Group);
        e.coeffs[self.group_index(lambda)] = Complex64::new(1.0, 0.0);
        e
    }

    /// Indicator of a single dual label.
    pub fn dual_basis(&self, mu: &[i64]) -> AlgebraElement {
        let mut e = self.zero(Domain::Dual);
        e.coeffs[self.dual_index(mu)] = Complex64::new(1.0, 0.0);
        e
    }

    /// `e^{2πi⟨λ,μ⟩/k}` for a weight `λ` and a dual label `μ`.
    pub fn character_value(&self, lambda: &[i64], mu: &[i64]) -> Complex64 {
        self.roots[self.lattice.cross_units(lambda, mu) as usize]
    }

    fn expect(&self, f: &AlgebraElement, domain: Domain) -> Result<(), AlgebraError> {
        if f.domain != domain {
            return Err(AlgebraError::SideMismatch { expected: domain, found: f.domain });
        }
        if f.coeffs.len() != self.len(domain) {
            return Err(AlgebraError::Malformed(format!(
                "expected {} coefficients, got {}",
                self.len(domain),
                f.coeffs.len()
            )));
        }
        Ok(())
    }

    fn addition_table(&self) -> &Vec<Vec<u32>> {
        self.addition.get_or_init(|| {
            let els = &self.group_elements;
            els.iter().map(|a| els.iter().map(|b| self.group_index(&add(a, b)) as u32).collect()).collect()
        })
    }

    /// Product in `C[G_ℓ]`.
    pub fn convolve(&self, f: &AlgebraElement, g: &AlgebraElement) -> Result<AlgebraElement, AlgebraError> {
        self.expect(f, Domain::Group)?;
        self.expect(g, Domain::Group)?;
        if !self.is_dense() {
            return self.convolve_sparse(f, g);
        }
        let table = self.addition_table();
        let mut out = self.zero(Domain::Group);
        for (i, a) in f.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in g.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    out.coeffs[table[i][j] as usize] += a * b;
                }
            }
        }
        Ok(out)
    }

    fn convolve_sparse(&self, f: &AlgebraElement, g: &AlgebraElement) -> Result<AlgebraElement, AlgebraError> {
        let nonzero = |e: &AlgebraElement| e.coeffs.iter().filter(|c| !c.is_zero()).count();
        if nonzero(f).saturating_mul(nonzero(g)) > 4 * self.order() {
            let prod = self.pointwise_mul(&self.evaluate(f)?, &self.evaluate(g)?)?;
            return Ok(self.inv_fourier(&prod)?.scale(Complex64::new(self.unitary_factor(), 0.0)));
        }
        let mut out = self.zero(Domain::Group);
        for (a, x) in self.group_elements.iter().zip(&f.coeffs) {
            if x.is_zero() {
                continue;
            }
            for (b, y) in self.group_elements.iter().zip(&g.coeffs) {
                if !y.is_zero() {
                    out.coeffs[self.group_index(&add(a, b))] += x * y;
                }
            }
        }
        Ok(out)
    }

    /// Pointwise product of functions on the dual.
    pub fn pointwise_mul(&self, f: &AlgebraElement, g: &AlgebraElement) -> Result<AlgebraElement, AlgebraError> {
        self.expect(f, Domain::Dual)?;
        self.expect(g, Domain::Dual)?;
        let coeffs = f.coeffs.iter().zip(&g.coeffs).map(|(a, b)| a * b).collect();
        Ok(AlgebraElement { domain: Domain::Dual, coeffs })
    }

    /// Evaluator `λ ↦ ι(α)(e^λ)` as a vector over `G_ℓ`.
    pub fn iota_char(&self, chart: Chart, alpha: &[i64]) -> Vec<Complex64> {
        let shifted;
        let (mu, conj) = match chart {
            Chart::Iota1 => (alpha, false),
            Chart::Iota2 => (alpha, true),
            Chart::Iota3 => {
                shifted = add(alpha, &self.lattice.dual_shift());
                (&shifted[..], false)
            }
        };
        self.group_elements
            .iter()
            .map(|l| {
                let v = self.character_value(l, mu);
                if conj {
                    v.conj()
                } else {
                    v
                }
            })
            .collect()
    }

    fn is_dense(&self) -> bool {
        self.order() <= self.dense_limit
    }

    fn chart_label(&self, chart: Chart, mu: &[i64]) -> Weight {
        match chart {
            Chart::Iota1 | Chart::Iota2 => mu.to_vec(),
            Chart::Iota3 => add(mu, &self.lattice.dual_shift()),
        }
    }

    fn factorized(&self, chart: Chart) -> &Factorized {
        let build = || {
            let functionals: Vec<Vec<i64>> = self
                .dual_elements
                .iter()
                .map(|mu| self.lattice.cross_functional(&self.chart_label(chart, mu)))
                .collect();
            Factorized::new(&functionals)
        };
        match chart {
            Chart::Iota1 | Chart::Iota2 => self.factor1.get_or_init(build),
            Chart::Iota3 => self.factor3.get_or_init(build),
        }
    }

    /// `out[μ] = Σ_λ f(λ) e(-⟨λ, μ⟩/k)`, one box coordinate at a time.
    fn streamed_evaluate(&self, f: &AlgebraElement, chart: Chart) -> Vec<Complex64> {
        let fac = self.factorized(chart);
        let m = self.lattice.phase_modulus();
        let d = self.lattice.group.diagonal();
        let mut prev = f.coeffs.clone();
        let mut prev_width = 1;
        for j in (0..d.len()).rev() {
            let tuples = &fac.levels[j];
            let prefixes: usize = d[..j].iter().map(|&x| x as usize).product();
            let dj = d[j] as usize;
            let mut cur = vec![Complex64::zero(); prefixes * tuples.len()];
            for p in 0..prefixes {
                for (sid, &(t, tail)) in tuples.iter().enumerate() {
                    let step = (m - t) % m;
                    let mut u = 0;
                    let mut acc = Complex64::zero();
                    for x in 0..dj {
                        acc += prev[(p * dj + x) * prev_width + tail] * self.roots[u as usize];
                        u = (u + step) % m;
                    }
                    cur[p * tuples.len() + sid] = acc;
                }
            }
            prev = cur;
            prev_width = tuples.len();
        }
        fac.labels.iter().map(|&id| prev[id]).collect()
    }

    /// `out[λ] = scale · Σ_μ f(μ) e(⟨λ, μ⟩/k)`, the transpose of [`Self::streamed_evaluate`].
    fn streamed_inverse(&self, f: &AlgebraElement, chart: Chart, scale: f64) -> Vec<Complex64> {
        let fac = self.factorized(chart);
        let m = self.lattice.phase_modulus();
        let d = self.lattice.group.diagonal();
        let n = d.len();
        let mut prev = vec![Complex64::zero(); fac.levels.first().map_or(1, Vec::len)];
        for (&id, c) in fac.labels.iter().zip(&f.coeffs) {
            prev[id] += c * scale;
        }
        for j in 0..n {
            let tuples = &fac.levels[j];
            let next_width = if j + 1 < n { fac.levels[j + 1].len() } else { 1 };
            let prefixes: usize = d[..j].iter().map(|&x| x as usize).product();
            let dj = d[j] as usize;
            let mut cur = vec![Complex64::zero(); prefixes * dj * next_width];
            for p in 0..prefixes {
                for (sid, &(t, tail)) in tuples.iter().enumerate() {
                    let c = prev[p * tuples.len() + sid];
                    if c.is_zero() {
                        continue;
                    }
                    let mut u = 0;
                    for x in 0..dj {
                        cur[(p * dj + x) * next_width + tail] += c * self.roots[u as usize];
                        u = (u + t) % m;
                    }
                }
            }
            prev = cur;
        }
        prev
    }

    /// Matrix `E[μ][λ] = conj(ι(μ)(e^λ))` for the ι₁ or ι₃ chart. Dense; meant for small groups.
    pub fn chart_matrix(&self, chart: Chart) -> &DMatrix<Complex64> {
        let build = |shift: bool| {
            let s = self.lattice.dual_shift();
            DMatrix::from_fn(self.dual_elements.len(), self.group_elements.len(), |r, c| {
                let mu = if shift { add(&self.dual_elements[r], &s) } else { self.dual_elements[r].clone() };
                self.character_value(&self.group_elements[c], &mu).conj()
            })
        };
        match chart {
            Chart::Iota1 | Chart::Iota2 => self.chart1.get_or_init(|| build(false)),
            Chart::Iota3 => self.chart3.get_or_init(|| build(true)),
        }
    }

    /// Unnormalized transform `f ↦ (μ ↦ Σ_λ f(λ) conj(ι(μ)(e^λ)))`; an algebra homomorphism.
    pub fn evaluate_chart(&self, f: &AlgebraElement, chart: Chart) -> Result<AlgebraElement, AlgebraError> {
        self.expect(f, Domain::Group)?;
        if !self.is_dense() {
            return Ok(AlgebraElement { domain: Domain::Dual, coeffs: self.streamed_evaluate(f, chart) });
        }
        let m = self.chart_matrix(chart);
        let v = m * nalgebra::DVector::from_column_slice(&f.coeffs);
        Ok(AlgebraElement { domain: Domain::Dual, coeffs: v.iter().copied().collect() })
    }

    /// Unnormalized transform in the ι₃ chart used by the fusion pipeline.
    pub fn evaluate(&self, f: &AlgebraElement) -> Result<AlgebraElement, AlgebraError> {
        self.evaluate_chart(f, Chart::Iota3)
    }

    fn unitary_factor(&self) -> f64 {
        (self.order() as f64).sqrt().recip()
    }

    /// Unitary Fourier transform `g^{-1/2} Σ_λ f(λ) conj(ι(μ)(e^λ))`.
    pub fn fourier_chart(&self, f: &AlgebraElement, chart: Chart) -> Result<AlgebraElement, AlgebraError> {
        Ok(self.evaluate_chart(f, chart)?.scale(Complex64::new(self.unitary_factor(), 0.0)))
    }

    pub fn fourier(&self, f: &AlgebraElement) -> Result<AlgebraElement, AlgebraError> {
        self.fourier_chart(f, Chart::Iota3)
    }

    pub fn inv_fourier_chart(&self, f: &AlgebraElement, chart: Chart) -> Result<AlgebraElement, AlgebraError> {
        self.expect(f, Domain::Dual)?;
        let s = self.unitary_factor();
        if !self.is_dense() {
            return Ok(AlgebraElement { domain: Domain::Group, coeffs: self.streamed_inverse(f, chart, s) });
        }
        let m = self.chart_matrix(chart);
        let v = m.adjoint() * nalgebra::DVector::from_column_slice(&f.coeffs);
        Ok(AlgebraElement { domain: Domain::Group, coeffs: v.iter().map(|c| c * s).collect() })
    }

    pub fn inv_fourier(&self, f: &AlgebraElement) -> Result<AlgebraElement, AlgebraError> {
        self.inv_fourier_chart(f, Chart::Iota3)
    }

    /// Applies `uδ ∘ p_β ∘ t_α ∘ w`. On the group side `α` is a weight and `β`
    /// a dual label; on the dual side the roles are exchanged.
    pub fn heisenberg_act(
        &self,
        w: &WeylElement,
        alpha: &[i64],
        beta: &[i64],
        u: Rational,
        f: &AlgebraElement,
    ) -> AlgebraElement {
        let k = Rational::from_integer(self.k());
        let central = phase(u / k);
        let mut out = self.zero(f.domain);
        for (i, c) in f.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            match f.domain {
                Domain::Group => {
                    let y = add(&w.apply(&self.group_elements[i]), alpha);
                    let v = self.character_value(&y, beta);
                    out.coeffs[self.group_index(&y)] += c * v * central;
                }
                Domain::Dual => {
                    let y = add(&w.apply(&self.dual_elements[i]), alpha);
                    let v = self.character_value(beta, &y);
                    out.coeffs[self.dual_index(&y)] += c * v * central;
                }
            }
        }
        out
    }

    /// The dual label identified with a group element.
    pub fn phi(&self, x: &[i64]) -> Weight {
        phi_map(self.data(), x)
    }

    /// Matrix of the Weil `S` operator on `C[G_ℓ]`: column `λ` holds `S·e^λ`.
    pub fn weil_s_matrix(&self) -> DMatrix<Complex64> {
        let g = self.order();
        let s = self.unitary_factor();
        DMatrix::from_fn(g, g, |r, c| {
            let mu = self.phi(&self.group_elements[r]);
            self.character_value(&self.group_elements[c], &mu).conj() * s
        })
    }

    /// Diagonal of the Weil `T` operator, using canonical representatives.
    pub fn weil_t_diagonal(&self) -> Vec<Complex64> {
        let k = Rational::from_integer(2 * self.k());
        self.group_elements.iter().map(|m| phase(self.data().norm(m) / k)).collect()
    }

    /// Applies `S` or `T` to a group-side element.
    pub fn weil_generator(&self, which: WeilGenerator, f: &AlgebraElement) -> Result<AlgebraElement, AlgebraError> {
        self.expect(f, Domain::Group)?;
        let coeffs = match which {
            WeilGenerator::S => {
                let v = self.weil_s_matrix() * nalgebra::DVector::from_column_slice(&f.coeffs);
                v.iter().copied().collect()
            }
            WeilGenerator::T => f.coeffs.iter().zip(self.weil_t_diagonal()).map(|(a, t)| a * t).collect(),
        };
        Ok(AlgebraElement { domain: Domain::Group, coeffs })
    }

    /// Serializes an element as `{side, entries: [{rep, re, im}]}`.
    pub fn element_to_json(&self, f: &AlgebraElement) -> Value {
        let reps = match f.domain {
            Domain::Group => &self.group_elements,
            Domain::Dual => &self.dual_elements,
        };
        let entries: Vec<Value> =
            reps.iter().zip(&f.coeffs).map(|(r, c)| json!({ "rep": r, "re": c.re, "im": c.im })).collect();
        json!({ "side": f.domain, "entries": entries })
    }

    pub fn element_from_json(&self, v: &Value) -> Result<AlgebraElement, AlgebraError> {
        #[derive(Deserialize)]
        struct Entry {
            rep: Weight,
            re: f64,
            im: f64,
        }
        #[derive(Deserialize)]
        struct Raw {
            side: Domain,
            entries: Vec<Entry>,
        }
        let raw: Raw = serde_json::from_value(v.clone()).map_err(|e| AlgebraError::Malformed(e.to_string()))?;
        let mut out = self.zero(raw.side);
        for e in raw.entries {
            let idx = match raw.side {
                Domain::Group => self.group_index(&e.rep),
                Domain::Dual => self.dual_index(&e.rep),
            };
            out.coeffs[idx] = Complex64::new(e.re, e.im);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeilGenerator {
    S,
    T,
}

/// Measured deviations of the projective relations of the Weil operators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectiveReport {
    /// Deviation of `S²` from a phase times the permutation `λ ↦ -λ`.
    pub s_squared: f64,
    /// Deviation of `(ST)³` from a phase times `S²`.
    pub st_cubed: f64,
    pub s_squared_phase: Complex64,
    pub st_cubed_phase: Complex64,
}

/// Ratio of the first entry of `b` with modulus above `1e-9` to the matching entry of `a`.
pub fn relative_phase(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> Complex64 {
    for (x, y) in a.iter().zip(b.iter()) {
        if y.norm() > 1e-9 && x.norm() > 1e-9 {
            return x / y;
        }
    }
    Complex64::new(1.0, 0.0)
}

/// Max entrywise deviation of `a` from `c·b`, with `c` the phase of `a` relative to `b`.
pub fn projective_deviation(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> (f64, Complex64) {
    let c = relative_phase(a, b);
    let dev = a.iter().zip(b.iter()).map(|(x, y)| (x - c * y).norm()).fold(0.0, f64::max);
    (dev, c)
}

impl AlgebraContext {
    pub fn weil_relations(&self) -> ProjectiveReport {
        let g = self.order();
        let s = self.weil_s_matrix();
        let t = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(self.weil_t_diagonal()));
        let s2 = &s * &s;
        let perm = DMatrix::from_fn(g, g, |r, c| {
            let target = self.group_index(&crate::cartan_lattice::neg(&self.group_elements[c]));
            if r == target {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::zero()
            }
        });
        let (s_squared, s_squared_phase) = projective_deviation(&s2, &perm);
        let st = &s * &t;
        let st3 = &st * &st * &st;
        let (st_cubed, st_cubed_phase) = projective_deviation(&st3, &s2);
        ProjectiveReport { s_squared, st_cubed, s_squared_phase, st_cubed_phase }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cartan_lattice::build_affine_data;
    use crate::weyl::DEFAULT_RANK_LIMIT;

    fn ctx(s: &str, l: i64) -> AlgebraContext {
        AlgebraContext::new(build_affine_data(s.parse().unwrap()), l, DEFAULT_RANK_LIMIT).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pseudo_random(ctx: &AlgebraContext, domain: Domain, seed: u64) -> AlgebraElement {
        let mut x = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = || {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((x >> 33) as f64 / (1u64 << 31) as f64) - 0.5
        };
        let mut e = ctx.zero(domain);
        for v in e.coeffs.iter_mut() {
            *v = c(next(), next());
        }
        e
    }

    #[test]
    fn golden_group_labels() {
        let a = ctx("A1~1", 1);
        let f = a.convolve(&a.basis(&[5]), &a.basis(&[3])).unwrap();
        assert_eq!(f, a.basis(&[2]));
        let g = pseudo_random(&a, Domain::Group, 3);
        assert_eq!(a.convolve(&a.basis(&[0]), &g).unwrap(), g);
    }

    #[test]
    fn side_mismatch_is_rejected() {
        let a = ctx("A1~1", 1);
        let f = a.ones(Domain::Dual);
        assert!(matches!(a.convolve(&f, &f), Err(AlgebraError::SideMismatch { .. })));
        let g = a.basis(&[0]);
        assert!(matches!(a.pointwise_mul(&g, &g), Err(AlgebraError::SideMismatch { .. })));
        assert!(matches!(a.inv_fourier(&g), Err(AlgebraError::SideMismatch { .. })));
    }

    #[test]
    fn convolution_is_associative() {
        let a = ctx("A2~1", 1);
        let (f, g, h) = (
            pseudo_random(&a, Domain::Group, 1),
            pseudo_random(&a, Domain::Group, 2),
            pseudo_random(&a, Domain::Group, 3),
        );
        let l = a.convolve(&a.convolve(&f, &g).unwrap(), &h).unwrap();
        let r = a.convolve(&f, &a.convolve(&g, &h).unwrap()).unwrap();
        assert!(l.distance(&r) < 1e-12);
    }

    #[test]
    fn pointwise_identities() {
        let a = ctx("A3~2", 1);
        let f = pseudo_random(&a, Domain::Dual, 4);
        let g = pseudo_random(&a, Domain::Dual, 5);
        assert!(a.pointwise_mul(&a.ones(Domain::Dual), &f).unwrap().distance(&f) < 1e-15);
        assert_eq!(a.pointwise_mul(&f, &g).unwrap(), a.pointwise_mul(&g, &f).unwrap());
    }

    #[test]
    fn iota_maps() {
        let a = ctx("A1~1", 1);
        assert!(a.iota_char(Chart::Iota1, &[0]).iter().all(|v| (v - c(1.0, 0.0)).norm() < 1e-15));
        let x = a.iota_char(Chart::Iota1, &[1]);
        let y = a.iota_char(Chart::Iota1, &[2]);
        let z = a.iota_char(Chart::Iota1, &[3]);
        for i in 0..6 {
            assert!((x[i] * y[i] - z[i]).norm() < 1e-12);
        }
        let x3 = a.iota_char(Chart::Iota3, &[1]);
        let y3 = a.iota_char(Chart::Iota3, &[2]);
        let z3 = a.iota_char(Chart::Iota3, &[3]);
        assert!((0..6).any(|i| (x3[i] * y3[i] - z3[i]).norm() > 1e-3));
        // ι₃(nΛ̄₁)(e^k) = e^{πik(n+1)/3}.
        for n in 0..6i64 {
            let v = a.iota_char(Chart::Iota3, &[n]);
            for kk in 0..6i64 {
                let expected = Complex64::from_polar(1.0, PI * (kk * (n + 1)) as f64 / 3.0);
                assert!((v[kk as usize] - expected).norm() < 1e-12);
            }
            let conj = a.iota_char(Chart::Iota2, &[n]);
            let one = a.iota_char(Chart::Iota1, &[n]);
            assert!(conj.iter().zip(&one).all(|(p, q)| (p - q.conj()).norm() < 1e-15));
        }
    }

    #[test]
    fn character_rows_are_orthogonal() {
        for (s, l) in [("A2~1", 1), ("A3~2", 1), ("A2~2", 2), ("G2~1", 1)] {
            let a = ctx(s, l);
            let g = a.order() as f64;
            let m = a.chart_matrix(Chart::Iota1);
            let gram = m * m.adjoint();
            for i in 0..gram.nrows() {
                for j in 0..gram.ncols() {
                    let expected = if i == j { g } else { 0.0 };
                    assert!((gram[(i, j)] - c(expected, 0.0)).norm() < 1e-9, "{s}");
                }
            }
        }
    }

    #[test]
    fn fourier_inversion_parseval_and_convolution() {
        for (s, l) in [("A1~1", 2), ("A2~1", 1), ("B2~1", 1), ("A2~2", 2), ("D3~2", 1)] {
            let a = ctx(s, l);
            let sq = (a.order() as f64).sqrt();
            for seed in 0..5 {
                let f = pseudo_random(&a, Domain::Group, seed);
                let g = pseudo_random(&a, Domain::Group, seed + 100);
                let ff = a.fourier(&f).unwrap();
                assert!(a.inv_fourier(&ff).unwrap().distance(&f) < 1e-10);
                assert!((ff.norm_squared() - f.norm_squared()).abs() < 1e-9);
                let lhs = a.fourier(&a.convolve(&f, &g).unwrap()).unwrap();
                let rhs = a.pointwise_mul(&ff, &a.fourier(&g).unwrap()).unwrap().scale(c(sq, 0.0));
                assert!(lhs.distance(&rhs) < 1e-9, "{s}");
                let lhs = a.evaluate(&a.convolve(&f, &g).unwrap()).unwrap();
                let rhs = a.pointwise_mul(&a.evaluate(&f).unwrap(), &a.evaluate(&g).unwrap()).unwrap();
                assert!(lhs.distance(&rhs) < 1e-9, "{s}");
            }
        }
    }

    #[test]
    fn heisenberg_action_basics() {
        let a = ctx("A2~1", 1);
        let id = WeylElement::identity(2);
        let f = pseudo_random(&a, Domain::Group, 9);
        let alpha = vec![1, 2];
        let beta = vec![2, -1];
        let zero = Rational::zero();
        // t_α is convolution by e^α.
        let t = a.heisenberg_act(&id, &alpha, &[0, 0], zero, &f);
        assert!(t.distance(&a.convolve(&a.basis(&alpha), &f).unwrap()) < 1e-12);
        // Full-period central phase is trivial.
        let u = a.heisenberg_act(&id, &[0, 0], &[0, 0], Rational::from_integer(a.k()), &f);
        assert!(u.distance(&f) < 1e-12);
        // p_β t_α = e^{2πi⟨α,β⟩/k} t_α p_β.
        let pt = a.heisenberg_act(&id, &alpha, &beta, zero, &f);
        let tp = a.heisenberg_act(&id, &alpha, &[0, 0], zero, &a.heisenberg_act(&id, &[0, 0], &beta, zero, &f));
        let scalar = phase(a.lattice.cross_pairing(&alpha, &beta) / Rational::from_integer(a.k()));
        assert!(pt.distance(&tp.scale(scalar)) < 1e-12);
    }

    #[test]
    fn fourier_intertwines_heisenberg_action() {
        for (s, l) in [("A1~1", 1), ("A2~1", 2), ("C2~1", 1), ("A3~2", 1), ("A2~2", 2)] {
            let a = ctx(s, l);
            let n = a.data().n;
            let id = WeylElement::identity(n);
            for seed in 0..4i64 {
                let f = pseudo_random(&a, Domain::Group, seed as u64);
                let alpha: Weight = (0..n as i64).map(|i| (seed * 3 + i * 5) % 7 - 3).collect();
                let beta: Weight = (0..n as i64).map(|i| (seed * 5 + i * 2) % 5 - 2).collect();
                let lhs =
                    a.fourier_chart(&a.heisenberg_act(&id, &alpha, &beta, Rational::zero(), &f), Chart::Iota1).unwrap();
                let u = a.lattice.cross_pairing(&alpha, &beta);
                let rhs = a.heisenberg_act(
                    &id,
                    &beta,
                    &crate::cartan_lattice::neg(&alpha),
                    u,
                    &a.fourier_chart(&f, Chart::Iota1).unwrap(),
                );
                assert!(lhs.distance(&rhs) < 1e-9, "{s}");
            }
        }
    }

    #[test]
    fn weil_generators() {
        let a = ctx("A1~1", 2);
        let e0 = a.basis(&[0]);
        assert!(a.weil_generator(WeilGenerator::T, &e0).unwrap().distance(&e0) < 1e-15);
        let s0 = a.weil_generator(WeilGenerator::S, &e0).unwrap();
        let flat = a.ones(Domain::Group).scale(c((a.order() as f64).sqrt().recip(), 0.0));
        assert!(s0.distance(&flat) < 1e-12);
    }

    #[test]
    fn weil_relations_untwisted() {
        for (s, l) in [("A1~1", 1), ("A1~1", 2), ("A2~1", 1), ("B2~1", 1), ("G2~1", 1)] {
            let r = ctx(s, l).weil_relations();
            assert!(r.s_squared < 1e-8, "{s} {r:?}");
            assert!(r.st_cubed < 1e-8, "{s} {r:?}");
            assert!((r.st_cubed_phase.norm() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn json_round_trip() {
        let a = ctx("A2~1", 1);
        let f = pseudo_random(&a, Domain::Group, 11);
        let v = a.element_to_json(&f);
        assert_eq!(a.element_from_json(&v).unwrap(), f);
        let g = a.fourier(&f).unwrap();
        assert_eq!(a.element_from_json(&a.element_to_json(&g)).unwrap(), g);
        assert!(a.element_from_json(&json!({"side": "group"})).is_err());
    }

    #[test]
    fn phase_reduces_exactly() {
        assert!((phase(Rational::new(7, 2)) - c(-1.0, 0.0)).norm() < 1e-15);
        assert!((phase(Rational::new(-1, 4)) - c(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn streamed_transforms_match_dense() {
        for (t, l) in [("A1~1", 3), ("A2~1", 2), ("A3~2", 1), ("G2~1", 1), ("D4~3", 2)] {
            let dense = ctx(t, l);
            let streamed = ctx(t, l).with_dense_limit(0);
            let f = pseudo_random(&dense, Domain::Group, 7);
            let h = pseudo_random(&dense, Domain::Group, 8);
            let sparse = dense.basis(&[1; 2][..dense.data().n]).add(&dense.basis(&vec![0; dense.data().n]));
            for chart in [Chart::Iota1, Chart::Iota3] {
                let a = dense.fourier_chart(&f, chart).unwrap();
                assert!(a.distance(&streamed.fourier_chart(&f, chart).unwrap()) < 1e-10);
                assert!(
                    dense
                        .inv_fourier_chart(&a, chart)
                        .unwrap()
                        .distance(&streamed.inv_fourier_chart(&a, chart).unwrap())
                        < 1e-10
                );
            }
            assert!(dense.convolve(&f, &h).unwrap().distance(&streamed.convolve(&f, &h).unwrap()) < 1e-10);
            assert!(dense.convolve(&sparse, &h).unwrap().distance(&streamed.convolve(&sparse, &h).unwrap()) < 1e-10);
        }
    }
}
