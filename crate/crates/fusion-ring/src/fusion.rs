//! Fusion coefficients by the Verlinde formula, the principal fusion ideal and
//! Kac-Walton folding, plus the modular matrices and bilinear forms.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::cartan_lattice::{add, neg, sub, AffineType, Rational, Weight};
use crate::characters::{
    alternant, alternant_value, character_element, character_eval, freudenthal, is_regular_label, CharacterError,
};
use crate::group_algebra::{phase, projective_deviation, AlgebraContext, AlgebraElement, AlgebraError, Chart, Domain};
use crate::weyl::{dot_fold_affine, dot_fold_finite, longest_element, WeylError};

/// Version of the JSON documents emitted for tables and modular matrices.
pub const SCHEMA_VERSION: u32 = 1;

/// Tolerance for rounding floating fusion coefficients to integers.
pub const INTEGRALITY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FusionError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Character(#[from] CharacterError),
    #[error(transparent)]
    Weyl(#[from] WeylError),
    #[error(
        "{method} coefficient N[{lambda}][{mu}][{nu}] = {value} is not within {INTEGRALITY_TOLERANCE} of an integer"
    )]
    NonIntegral { method: Method, lambda: usize, mu: usize, nu: usize, value: f64 },
    #[error("{0} matrix is singular")]
    Singular(&'static str),
    #[error("integrity failure: {0}")]
    Integrity(String),
    #[error("malformed table: {0}")]
    Malformed(String),
}

impl FusionError {
    /// True for failures of the internal certificate checks.
    pub fn is_certificate(&self) -> bool {
        matches!(self, FusionError::Weyl(WeylError::Certificate { .. } | WeylError::NonTermination { .. }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Verlinde,
    Ideal,
    #[serde(rename = "kacwalton")]
    KacWalton,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Verlinde, Method::Ideal, Method::KacWalton];
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Verlinde => "verlinde",
            Method::Ideal => "ideal",
            Method::KacWalton => "kacwalton",
        })
    }
}

impl FromStr for Method {
    type Err = FusionError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "verlinde" => Ok(Method::Verlinde),
            "ideal" => Ok(Method::Ideal),
            "kacwalton" => Ok(Method::KacWalton),
            _ => Err(FusionError::Malformed(format!("unknown method {s:?}"))),
        }
    }
}

/// Level-ℓ dominant weights in table order, with their dual labels.
pub fn table_weights(ctx: &AlgebraContext) -> (Vec<Weight>, Vec<Weight>) {
    let weights = ctx.lattice.p_plus();
    let labels = weights.iter().map(|w| ctx.phi(w)).collect();
    (weights, labels)
}

/// `S_𝒜` and `T_𝒜`. Rows are indexed by `P_ℓ^+`, columns by the dual labels `φ(λ)`.
#[derive(Debug, Clone)]
pub struct ModularMatrices {
    pub weights: Vec<Weight>,
    pub labels: Vec<Weight>,
    pub s: DMatrix<Complex64>,
    pub t: Vec<Complex64>,
    /// `λ ↦ -w₀(λ)` as a permutation of row indices.
    pub conjugation: Vec<usize>,
}

pub fn modular_matrices(ctx: &AlgebraContext) -> ModularMatrices {
    let (weights, labels) = table_weights(ctx);
    let rho = ctx.data().rho();
    let scale = (ctx.order() as f64).sqrt().recip();
    let p = weights.len();
    let s = DMatrix::from_fn(p, p, |i, j| alternant_value(ctx, &add(&weights[i], &rho), &labels[j]) * scale);
    let two_k = Rational::from_integer(2 * ctx.k());
    let t = weights.iter().map(|w| phase(ctx.data().norm(&add(w, &rho)) / two_k)).collect();
    let w0 = longest_element(&ctx.weyl);
    let conjugation = weights
        .iter()
        .map(|w| {
            let c = neg(&w0.apply(w));
            weights.iter().position(|x| *x == c).expect("conjugate weight has the same level")
        })
        .collect();
    ModularMatrices { weights, labels, s, t, conjugation }
}

fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

impl ModularMatrices {
    pub fn size(&self) -> usize {
        self.weights.len()
    }

    pub fn symmetry_deviation(&self) -> f64 {
        max_abs(&(&self.s - self.s.transpose()))
    }

    pub fn unitarity_deviation(&self) -> f64 {
        let p = self.size();
        max_abs(&(&self.s * self.s.adjoint() - DMatrix::identity(p, p)))
    }

    pub fn t_matrix(&self) -> DMatrix<Complex64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_vec(self.t.clone()))
    }

    pub fn conjugation_matrix(&self) -> DMatrix<Complex64> {
        let p = self.size();
        DMatrix::from_fn(
            p,
            p,
            |i, j| if self.conjugation[i] == j { Complex64::new(1.0, 0.0) } else { Complex64::zero() },
        )
    }

    /// Deviation of `S²` from a global phase times charge conjugation.
    pub fn s_squared(&self) -> (f64, Complex64) {
        projective_deviation(&(&self.s * &self.s), &self.conjugation_matrix())
    }

    /// Deviation of `(ST)³` from a global phase times `S²`.
    pub fn st_cubed(&self) -> (f64, Complex64) {
        let st = &self.s * self.t_matrix();
        projective_deviation(&(&st * &st * &st), &(&self.s * &self.s))
    }

    /// Phase of `S_{00}`, the empirical normalization relative to a positive real vacuum row.
    pub fn vacuum_phase(&self) -> Complex64 {
        let v = self.s[(0, 0)];
        v / v.norm()
    }

    pub fn to_json(&self, ctx: &AlgebraContext) -> Value {
        let cell = |c: &Complex64| serde_json::json!({ "re": c.re, "im": c.im });
        let rows: Vec<Vec<Value>> =
            (0..self.size()).map(|i| (0..self.size()).map(|j| cell(&self.s[(i, j)])).collect()).collect();
        serde_json::json!({
            "schema_version": SCHEMA_VERSION,
            "type": ctx.data().affine_type.to_string(),
            "level": ctx.lattice.level,
            "weights": self.weights,
            "labels": self.labels,
            "S": rows,
            "T": self.t.iter().map(cell).collect::<Vec<_>>(),
        })
    }
}

/// Integer 3-tensor `N[λ][μ][ν]` on the ordered `P_ℓ^+`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FusionTable {
    pub affine_type: AffineType,
    pub level: i64,
    pub method: Method,
    pub weights: Vec<Weight>,
    pub n: Vec<Vec<Vec<i64>>>,
}

#[derive(Serialize, Deserialize)]
struct TableDocument {
    schema_version: u32,
    #[serde(rename = "type")]
    affine_type: String,
    level: i64,
    method: Method,
    weights: Vec<Weight>,
    #[serde(rename = "N")]
    n: Vec<Vec<Vec<i64>>>,
}

#[derive(Serialize)]
struct CsvRow {
    lambda_index: usize,
    mu_index: usize,
    nu_index: usize,
    n: i64,
}

/// Summary of the structural identities of a table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableReport {
    pub vacuum_is_identity: bool,
    pub commutative: bool,
    pub associative: bool,
    pub negative_entries: usize,
}

impl TableReport {
    pub fn algebra_ok(&self) -> bool {
        self.vacuum_is_identity && self.commutative && self.associative
    }
}

impl FusionTable {
    pub fn size(&self) -> usize {
        self.weights.len()
    }

    pub fn get(&self, l: usize, m: usize, n: usize) -> i64 {
        self.n[l][m][n]
    }

    pub fn report(&self) -> TableReport {
        let p = self.size();
        let r = 0..p;
        let vacuum_is_identity = r.clone().all(|m| r.clone().all(|n| self.n[0][m][n] == i64::from(m == n)));
        let commutative = r.clone().all(|l| r.clone().all(|m| self.n[l][m] == self.n[m][l]));
        let mut associative = true;
        'outer: for l in 0..p {
            for m in 0..p {
                for v in 0..p {
                    for t in 0..p {
                        let a: i64 = (0..p).map(|s| self.n[l][m][s] * self.n[s][v][t]).sum();
                        let b: i64 = (0..p).map(|s| self.n[m][v][s] * self.n[l][s][t]).sum();
                        if a != b {
                            associative = false;
                            break 'outer;
                        }
                    }
                }
            }
        }
        let negative_entries = self.n.iter().flatten().flatten().filter(|&&v| v < 0).count();
        TableReport { vacuum_is_identity, commutative, associative, negative_entries }
    }

    /// Largest absolute entrywise difference to another table on the same weights.
    pub fn max_discrepancy(&self, other: &FusionTable) -> i64 {
        self.n
            .iter()
            .flatten()
            .flatten()
            .zip(other.n.iter().flatten().flatten())
            .map(|(a, b)| (a - b).abs())
            .max()
            .unwrap_or(0)
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(TableDocument {
            schema_version: SCHEMA_VERSION,
            affine_type: self.affine_type.to_string(),
            level: self.level,
            method: self.method,
            weights: self.weights.clone(),
            n: self.n.clone(),
        })
        .expect("table serializes")
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("table serializes")
    }

    pub fn from_json_str(s: &str) -> Result<FusionTable, FusionError> {
        let doc: TableDocument = serde_json::from_str(s).map_err(|e| FusionError::Malformed(e.to_string()))?;
        if doc.schema_version != SCHEMA_VERSION {
            return Err(FusionError::Malformed(format!("unsupported schema_version {}", doc.schema_version)));
        }
        let affine_type = doc.affine_type.parse().map_err(|e| FusionError::Malformed(format!("{e}")))?;
        let p = doc.weights.len();
        let shape_ok = doc.n.len() == p && doc.n.iter().all(|r| r.len() == p && r.iter().all(|c| c.len() == p));
        if !shape_ok {
            return Err(FusionError::Malformed(format!("N must be a {p}x{p}x{p} array")));
        }
        Ok(FusionTable { affine_type, level: doc.level, method: doc.method, weights: doc.weights, n: doc.n })
    }

    /// All entries as `lambda_index,mu_index,nu_index,n` rows with a header.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let p = self.size();
        for l in 0..p {
            for m in 0..p {
                for n in 0..p {
                    w.serialize(CsvRow { lambda_index: l, mu_index: m, nu_index: n, n: self.n[l][m][n] })
                        .expect("in-memory csv write");
                }
            }
        }
        String::from_utf8(w.into_inner().expect("in-memory csv flush")).expect("csv is utf-8")
    }

    pub fn label(&self, i: usize) -> String {
        let w = &self.weights[i];
        if w.len() == 1 {
            format!("χ{}", w[0])
        } else {
            format!("χ({})", w.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(","))
        }
    }

    /// `χ_λ · χ_μ` expanded in the basis.
    pub fn product_string(&self, l: usize, m: usize) -> String {
        let terms: Vec<String> = (0..self.size())
            .filter(|&n| self.n[l][m][n] != 0)
            .map(|n| match self.n[l][m][n] {
                1 => self.label(n),
                -1 => format!("-{}", self.label(n)),
                c => format!("{c}{}", self.label(n)),
            })
            .collect();
        if terms.is_empty() {
            "0".to_string()
        } else {
            terms.join(" + ").replace("+ -", "- ")
        }
    }

    /// Multiplication table with basis labels on both axes.
    pub fn to_pretty(&self) -> String {
        let p = self.size();
        let mut cells: Vec<Vec<String>> =
            vec![std::iter::once(String::new()).chain((0..p).map(|j| self.label(j))).collect()];
        for i in 0..p {
            cells.push(std::iter::once(self.label(i)).chain((0..p).map(|j| self.product_string(i, j))).collect());
        }
        let widths: Vec<usize> =
            (0..=p).map(|c| cells.iter().map(|r| r[c].chars().count()).max().unwrap_or(0)).collect();
        let mut out = format!("{} level {} ({})\n", self.affine_type, self.level, self.method);
        for (ri, row) in cells.iter().enumerate() {
            let line: Vec<String> =
                row.iter().zip(&widths).map(|(c, w)| format!("{c}{}", " ".repeat(w - c.chars().count()))).collect();
            out.push_str(line.join(" | ").trim_end());
            out.push('\n');
            if ri == 0 {
                let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
                out.push_str(&rule.join("-+-"));
                out.push('\n');
            }
        }
        out
    }
}

fn round_tensor(method: Method, raw: &[Vec<Vec<Complex64>>]) -> Result<Vec<Vec<Vec<i64>>>, FusionError> {
    let mut worst: Option<(f64, usize, usize, usize, f64)> = None;
    let n = raw
        .iter()
        .enumerate()
        .map(|(l, plane)| {
            plane
                .iter()
                .enumerate()
                .map(|(m, row)| {
                    row.iter()
                        .enumerate()
                        .map(|(k, &c)| {
                            let v = c.re;
                            let err = (v - v.round()).abs().max(c.im.abs());
                            if err >= INTEGRALITY_TOLERANCE && worst.is_none_or(|w| err > w.0) {
                                worst = Some((err, l, m, k, v));
                            }
                            v.round() as i64
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    match worst {
        Some((_, lambda, mu, nu, value)) => Err(FusionError::NonIntegral { method, lambda, mu, nu, value }),
        None => Ok(n),
    }
}

fn invert(m: &DMatrix<Complex64>, what: &'static str) -> Result<DMatrix<Complex64>, FusionError> {
    m.clone().lu().try_inverse().ok_or(FusionError::Singular(what))
}

/// `N_{λμ}^ν = Σ_φ S_{λφ} S_{μφ} (S⁻¹)_{φν} / S_{0φ}`.
pub fn verlinde_fusion(ctx: &AlgebraContext, m: &ModularMatrices) -> Result<FusionTable, FusionError> {
    let s = &m.s;
    let si = invert(s, "S")?;
    let p = m.size();
    let raw: Vec<Vec<Vec<Complex64>>> = (0..p)
        .map(|l| {
            (0..p)
                .map(|mu| {
                    (0..p)
                        .map(|nu| (0..p).map(|f| s[(l, f)] * s[(mu, f)] * si[(f, nu)] / s[(0, f)]).sum::<Complex64>())
                        .collect()
                })
                .collect()
        })
        .collect();
    table(ctx, Method::Verlinde, m.weights.clone(), round_tensor(Method::Verlinde, &raw)?)
}

fn table(
    ctx: &AlgebraContext,
    method: Method,
    weights: Vec<Weight>,
    n: Vec<Vec<Vec<i64>>>,
) -> Result<FusionTable, FusionError> {
    let t = FusionTable { affine_type: ctx.data().affine_type, level: ctx.lattice.level, method, weights, n };
    let negative = t.n.iter().flatten().flatten().any(|&v| v < 0);
    if negative && ctx.data().twist() == 1 {
        return Err(FusionError::Integrity(format!("{method} produced a negative coefficient for an untwisted type")));
    }
    Ok(t)
}

/// `ψ(μ) = Σ_λ ι₃(μ)(e^λ) e^λ`.
pub fn psi(ctx: &AlgebraContext, mu: &[i64]) -> AlgebraElement {
    AlgebraElement { domain: Domain::Group, coeffs: ctx.iota_char(Chart::Iota3, mu) }
}

/// Orbits of the dot action on dual labels, as sorted lists of dual indices.
pub fn dot_orbits(ctx: &AlgebraContext) -> Vec<Vec<usize>> {
    let shift = ctx.lattice.dual_shift();
    let g = ctx.dual_elements().len();
    let mut seen = vec![false; g];
    let mut out = Vec::new();
    for i in 0..g {
        if seen[i] {
            continue;
        }
        let v = add(&ctx.dual_elements()[i], &shift);
        let mut orbit: Vec<usize> = ctx.dual_weyl.iter().map(|w| ctx.dual_index(&sub(&w.apply(&v), &shift))).collect();
        orbit.sort_unstable();
        orbit.dedup();
        for &j in &orbit {
            seen[j] = true;
        }
        out.push(orbit);
    }
    out
}

/// Orbit idempotents on the dual side and the idempotent `Δ_ℓ`.
#[derive(Debug, Clone)]
pub struct IdempotentSystem {
    pub orbits: Vec<Vec<usize>>,
    /// Dominant label for regular orbits, smallest label otherwise.
    pub representatives: Vec<Weight>,
    /// Orbit indices of `ν₁..ν_p`, in the column order of [`ModularMatrices`].
    pub regular: Vec<usize>,
    /// Regular labels `ν₁..ν_p`.
    pub labels: Vec<Weight>,
    /// Orbit indicators `φ^ν`.
    pub phi: Vec<AlgebraElement>,
    /// `Δ_ℓ`, normalized so that its transform is the indicator of the regular orbits.
    pub delta: AlgebraElement,
}

pub fn idempotent_system(ctx: &AlgebraContext) -> Result<IdempotentSystem, FusionError> {
    let (_, labels) = table_weights(ctx);
    let orbits = dot_orbits(ctx);
    let mut orbit_of = vec![0usize; ctx.dual_elements().len()];
    for (o, orbit) in orbits.iter().enumerate() {
        for &j in orbit {
            orbit_of[j] = o;
        }
    }
    let mut representatives: Vec<Weight> = orbits.iter().map(|o| ctx.dual_elements()[o[0]].clone()).collect();
    let regular: Vec<usize> = labels.iter().map(|l| orbit_of[ctx.dual_index(l)]).collect();
    for (l, &o) in labels.iter().zip(&regular) {
        representatives[o] = l.clone();
    }
    let regular_count = orbits.iter().filter(|o| is_regular_label(ctx, &ctx.dual_elements()[o[0]])).count();
    let mut distinct = regular.clone();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() != labels.len() || regular_count != labels.len() {
        return Err(FusionError::Integrity(format!(
            "{} regular dot orbits but {} level-{} labels",
            regular_count,
            labels.len(),
            ctx.lattice.level
        )));
    }
    let phi: Vec<AlgebraElement> = orbits
        .iter()
        .map(|o| {
            let mut e = ctx.zero(Domain::Dual);
            for &j in o {
                e.coeffs[j] = Complex64::new(1.0, 0.0);
            }
            e
        })
        .collect();
    let mut indicator = ctx.zero(Domain::Dual);
    for &o in &regular {
        indicator = indicator.add(&phi[o]);
    }
    let scale = Complex64::new((ctx.order() as f64).sqrt().recip(), 0.0);
    let delta = ctx.inv_fourier(&indicator)?.scale(scale);
    Ok(IdempotentSystem { orbits, representatives, regular, labels, phi, delta })
}

impl IdempotentSystem {
    /// `φ^ν` built literally as `g^{-1/2} Σ_{μ ∈ orbit} fourier(ψ(μ))`.
    pub fn phi_from_psi(&self, ctx: &AlgebraContext, orbit: usize) -> Result<AlgebraElement, FusionError> {
        let scale = Complex64::new((ctx.order() as f64).sqrt().recip(), 0.0);
        let mut out = ctx.zero(Domain::Dual);
        for &j in &self.orbits[orbit] {
            out = out.add(&ctx.fourier(&psi(ctx, &ctx.dual_elements()[j]))?.scale(scale));
        }
        Ok(out)
    }

    /// Expands a dual-side function in the orbit idempotents; `None` if it is not orbit-constant.
    pub fn orbit_coefficients(&self, f: &AlgebraElement, tol: f64) -> Option<Vec<Complex64>> {
        self.orbits
            .iter()
            .map(|o| {
                let c = f.coeffs[o[0]];
                o.iter().all(|&j| (f.coeffs[j] - c).norm() < tol).then_some(c)
            })
            .collect()
    }

    pub fn p(&self) -> usize {
        self.regular.len()
    }
}

/// `χ[γ][λ] = χ̊_λ(ι₃(ν_γ))` over the regular labels.
pub fn chi_matrix(
    ctx: &AlgebraContext,
    sys: &IdempotentSystem,
    weights: &[Weight],
) -> Result<DMatrix<Complex64>, FusionError> {
    let p = weights.len();
    let mut m = DMatrix::zeros(p, p);
    for (g, label) in sys.labels.iter().enumerate() {
        for (l, w) in weights.iter().enumerate() {
            m[(g, l)] = character_eval(ctx, w, label)?;
        }
    }
    Ok(m)
}

/// Diagnostics from the ideal engine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdealReport {
    /// Max deviation of `(Δχ_λ)(Δχ_μ) = Σ N Δχ_ν` in `C[G_ℓ]`.
    pub group_side_deviation: f64,
    /// Ratio of extreme singular values of the `χ` matrix.
    pub chi_condition: f64,
}

/// Structure constants of the principal ideal `C[G_ℓ]Δ_ℓ` in the basis `Δχ̊_λ`.
pub fn ideal_fusion(ctx: &AlgebraContext, sys: &IdempotentSystem) -> Result<(FusionTable, IdealReport), FusionError> {
    let (weights, _) = table_weights(ctx);
    let p = weights.len();
    let chi = chi_matrix(ctx, sys, &weights)?;
    let chi_inv = invert(&chi, "χ")?;
    let sv = chi.singular_values();
    let chi_condition = sv.max() / sv.min();
    let raw: Vec<Vec<Vec<Complex64>>> = (0..p)
        .map(|l| {
            (0..p)
                .map(|m| {
                    (0..p)
                        .map(|nu| {
                            (0..p)
                                .map(|g| chi[(g, l)] * chi[(g, m)] * chi_inv[(nu, g)] / chi[(g, 0)])
                                .sum::<Complex64>()
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let n = round_tensor(Method::Ideal, &raw)?;
    let basis: Vec<AlgebraElement> = weights
        .iter()
        .map(|w| Ok(ctx.convolve(&sys.delta, &character_element(ctx, w)?)?))
        .collect::<Result<_, FusionError>>()?;
    let mut dev: f64 = 0.0;
    for l in 0..p {
        for m in l..p {
            let lhs = ctx.convolve(&basis[l], &basis[m])?;
            let mut rhs = ctx.zero(Domain::Group);
            for nu in 0..p {
                if n[l][m][nu] != 0 {
                    rhs = rhs.add(&basis[nu].scale(Complex64::new(n[l][m][nu] as f64, 0.0)));
                }
            }
            dev = dev.max(lhs.distance(&rhs));
        }
    }
    if dev > 1e-8 {
        return Err(FusionError::Integrity(format!("ideal products deviate by {dev:.3e} on the group side")));
    }
    Ok((table(ctx, Method::Ideal, weights, n)?, IdealReport { group_side_deviation: dev, chi_condition }))
}

/// Racah-Speiser decomposition of `V_λ ⊗ V_μ`.
pub fn tensor_decompose(
    d: &crate::cartan_lattice::AffineData,
    lambda: &[i64],
    mu: &[i64],
) -> Result<BTreeMap<Weight, i64>, FusionError> {
    let m = freudenthal(d, mu)?;
    if lambda.iter().any(|&c| c < 0) {
        return Err(CharacterError::NotDominant(lambda.to_vec()).into());
    }
    let rho = d.rho();
    let mut out: BTreeMap<Weight, i64> = BTreeMap::new();
    for (sigma, &c) in &m.mults {
        let f = dot_fold_finite(d, &add(lambda, sigma), &rho);
        if f.sign != 0 {
            *out.entry(f.folded).or_insert(0) += f.sign * c;
        }
    }
    if let Some((w, c)) = out.iter().find(|(_, &c)| c < 0) {
        return Err(FusionError::Integrity(format!("negative tensor multiplicity {c} at {w:?}")));
    }
    out.retain(|_, c| *c != 0);
    Ok(out)
}

/// Counts from a Kac-Walton run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct KacWaltonReport {
    pub folds: usize,
    pub wall_hits: usize,
    pub affine_reflections: usize,
}

/// Classical decomposition followed by signed folding into the level-`k` alcove.
pub fn kac_walton_fusion(ctx: &AlgebraContext) -> Result<(FusionTable, KacWaltonReport), FusionError> {
    let (weights, _) = table_weights(ctx);
    let p = weights.len();
    let index: BTreeMap<&Weight, usize> = weights.iter().enumerate().map(|(i, w)| (w, i)).collect();
    let rho = ctx.data().rho();
    let mut report = KacWaltonReport::default();
    let mut n = vec![vec![vec![0i64; p]; p]; p];
    for l in 0..p {
        for m in l..p {
            for (nu, c) in tensor_decompose(ctx.data(), &weights[l], &weights[m])? {
                let f = dot_fold_affine(&ctx.lattice, &nu, &rho)?;
                report.folds += 1;
                report.affine_reflections += f.affine_reflections;
                if f.result.sign == 0 {
                    report.wall_hits += 1;
                    continue;
                }
                let target = *index.get(&f.result.folded).ok_or_else(|| {
                    FusionError::Integrity(format!("fold of {nu:?} left the level-{} alcove", ctx.lattice.level))
                })?;
                n[l][m][target] += f.result.sign * c;
            }
            n[m][l] = n[l][m].clone();
        }
    }
    Ok((table(ctx, Method::KacWalton, weights, n)?, report))
}

/// `⟨f, g⟩₀ = Σ_j (fg)^(ν_j)` and `⟨f, g⟩₁ = Σ_j f^(ν_j) conj(g^(ν_j)) |Â_ρ(ν_j)|²`.
pub fn form_value(
    ctx: &AlgebraContext,
    sys: &IdempotentSystem,
    kind: u8,
    f: &AlgebraElement,
    g: &AlgebraElement,
) -> Result<Complex64, FusionError> {
    let idx: Vec<usize> = sys.labels.iter().map(|l| ctx.dual_index(l)).collect();
    match kind {
        0 => {
            let fg = ctx.evaluate(&ctx.convolve(f, g)?)?;
            Ok(idx.iter().map(|&j| fg.coeffs[j]).sum())
        }
        1 => {
            let (ef, eg) = (ctx.evaluate(f)?, ctx.evaluate(g)?);
            let arho = ctx.fourier(&alternant(ctx, &ctx.data().rho()))?;
            Ok(idx.iter().map(|&j| ef.coeffs[j] * eg.coeffs[j].conj() * arho.coeffs[j].norm_sqr()).sum())
        }
        _ => Err(FusionError::Malformed(format!("unknown form kind {kind}"))),
    }
}

/// Max deviation of `D·χ = S_𝒜ᵀ` with `D = diag(Â_ρ(ν_j))`, and the smallest `|Â_ρ(ν_j)|`.
pub fn d_chi_relation(
    ctx: &AlgebraContext,
    sys: &IdempotentSystem,
    m: &ModularMatrices,
) -> Result<(f64, f64), FusionError> {
    let chi = chi_matrix(ctx, sys, &m.weights)?;
    let arho = ctx.fourier(&alternant(ctx, &ctx.data().rho()))?;
    let d: Vec<Complex64> = sys.labels.iter().map(|l| arho.coeffs[ctx.dual_index(l)]).collect();
    let p = m.size();
    let mut dev: f64 = 0.0;
    for g in 0..p {
        for l in 0..p {
            dev = dev.max((d[g] * chi[(g, l)] - m.s[(l, g)]).norm());
        }
    }
    Ok((dev, d.iter().map(|c| c.norm()).fold(f64::INFINITY, f64::min)))
}

/// Deviation of `π(χ̊_λ)Δ = ε(w_λ) χ̊_{w_λ·λ} Δ` for a dominant `λ` of any level.
pub fn projection_identity(ctx: &AlgebraContext, sys: &IdempotentSystem, lambda: &[i64]) -> Result<f64, FusionError> {
    let lhs = ctx.convolve(&character_element(ctx, lambda)?, &sys.delta)?;
    let f = dot_fold_affine(&ctx.lattice, lambda, &ctx.data().rho())?;
    let rhs = if f.result.sign == 0 {
        ctx.zero(Domain::Group)
    } else {
        ctx.convolve(&character_element(ctx, &f.result.folded)?, &sys.delta)?
            .scale(Complex64::new(f.result.sign as f64, 0.0))
    };
    Ok(lhs.distance(&rhs))
}

/// Deviation of `⟨χ_λ χ_μ, χ_ν⟩₁ = ⟨χ_λ, χ_{-w₀μ} χ_ν⟩₁` over all triples of table weights.
pub fn frobenius_deviation(
    ctx: &AlgebraContext,
    sys: &IdempotentSystem,
    m: &ModularMatrices,
) -> Result<f64, FusionError> {
    let chars: Vec<AlgebraElement> =
        m.weights.iter().map(|w| character_element(ctx, w)).collect::<Result<_, CharacterError>>()?;
    let p = m.size();
    let idx: Vec<usize> = sys.labels.iter().map(|l| ctx.dual_index(l)).collect();
    let arho = ctx.fourier(&alternant(ctx, &ctx.data().rho()))?;
    let weight: Vec<f64> = idx.iter().map(|&j| arho.coeffs[j].norm_sqr()).collect();
    let at_labels = |f: &AlgebraElement| -> Result<Vec<Complex64>, FusionError> {
        let e = ctx.evaluate(f)?;
        Ok(idx.iter().map(|&j| e.coeffs[j]).collect())
    };
    let single: Vec<Vec<Complex64>> = chars.iter().map(&at_labels).collect::<Result<_, _>>()?;
    let mut products = vec![vec![Vec::new(); p]; p];
    for a in 0..p {
        for b in a..p {
            products[a][b] = at_labels(&ctx.convolve(&chars[a], &chars[b])?)?;
            products[b][a] = products[a][b].clone();
        }
    }
    let form = |f: &[Complex64], g: &[Complex64]| -> Complex64 {
        f.iter().zip(g).zip(&weight).map(|((x, y), w)| x * y.conj() * *w).sum()
    };
    let mut dev: f64 = 0.0;
    for l in 0..p {
        for mu in 0..p {
            for nu in 0..p {
                let a = form(&products[l][mu], &single[nu]);
                let b = form(&single[l], &products[m.conjugation[mu]][nu]);
                dev = dev.max((a - b).norm());
            }
        }
    }
    Ok(dev)
}
