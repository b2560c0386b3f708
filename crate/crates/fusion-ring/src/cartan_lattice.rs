//! Affine type tables and lattice machinery.
//!
//! Weights are integer vectors in the fundamental-weight basis of the finite
//! weight lattice. Dual labels are either weights (when `r <= a0`) or
//! coweights in the fundamental-coweight basis (when `r > a0`).

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Rational = Ratio<i64>;
pub type Weight = Vec<i64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
}

impl Family {
    fn from_char(c: char) -> Option<Family> {
        Some(match c {
            'A' => Family::A,
            'B' => Family::B,
            'C' => Family::C,
            'D' => Family::D,
            'E' => Family::E,
            'F' => Family::F,
            'G' => Family::G,
            _ => return None,
        })
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("cannot parse affine type {0:?} (expected the form \"A1~1\")")]
    Parse(String),
    #[error("no affine algebra of type {family}{rank}~{twist}")]
    InvalidType { family: Family, rank: u32, twist: u32 },
    #[error("level must be a positive integer, got {0}")]
    Level(i64),
}

/// An affine type `X_N^(r)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AffineType {
    pub family: Family,
    pub rank: u32,
    pub twist: u32,
}

impl AffineType {
    pub fn new(family: Family, rank: u32, twist: u32) -> Result<Self, LatticeError> {
        use Family::*;
        let ok = match twist {
            1 => match family {
                A => rank >= 1,
                B | C => rank >= 2,
                D => rank >= 4,
                E => (6..=8).contains(&rank),
                F => rank == 4,
                G => rank == 2,
            },
            2 => match family {
                A => rank >= 2,
                D => rank >= 3,
                E => rank == 6,
                _ => false,
            },
            3 => family == D && rank == 4,
            _ => false,
        };
        if ok {
            Ok(AffineType { family, rank, twist })
        } else {
            Err(LatticeError::InvalidType { family, rank, twist })
        }
    }

    /// Every affine type whose finite part has rank at most `max_rank`.
    pub fn catalogue(max_rank: usize) -> Vec<AffineType> {
        use Family::*;
        let mut out = Vec::new();
        for family in [A, B, C, D, E, F, G] {
            for rank in 1..=9u32 {
                for twist in 1..=3u32 {
                    if let Ok(t) = AffineType::new(family, rank, twist) {
                        if t.finite_rank() <= max_rank {
                            out.push(t);
                        }
                    }
                }
            }
        }
        out
    }

    /// Rank `n` of the finite part (number of non-affine nodes).
    pub fn finite_rank(&self) -> usize {
        let n = self.rank as usize;
        match (self.family, self.twist) {
            (_, 1) => n,
            (Family::A, 2) => n.div_ceil(2),
            (Family::D, 2) => n - 1,
            (Family::E, 2) => 4,
            (Family::D, 3) => 2,
            _ => unreachable!("validated type"),
        }
    }
}

impl fmt::Display for AffineType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}~{}", self.family, self.rank, self.twist)
    }
}

impl FromStr for AffineType {
    type Err = LatticeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || LatticeError::Parse(s.to_string());
        let s = s.trim();
        let mut chars = s.chars();
        let family = chars.next().and_then(Family::from_char).ok_or_else(err)?;
        let rest = chars.as_str();
        let (rank, twist) = rest.split_once('~').ok_or_else(err)?;
        let digits = |p: &str| !p.is_empty() && p.bytes().all(|b| b.is_ascii_digit());
        if !digits(rank) || !digits(twist) {
            return Err(err());
        }
        let rank = rank.parse().map_err(|_| err())?;
        let twist = twist.parse().map_err(|_| err())?;
        AffineType::new(family, rank, twist)
    }
}

struct Dynkin {
    a: Vec<Vec<i64>>,
}

impl Dynkin {
    fn new(size: usize) -> Self {
        let mut a = vec![vec![0; size]; size];
        for (i, row) in a.iter_mut().enumerate() {
            row[i] = 2;
        }
        Dynkin { a }
    }

    fn link(&mut self, i: usize, j: usize, aij: i64, aji: i64) {
        self.a[i][j] = aij;
        self.a[j][i] = aji;
    }

    fn chain(&mut self, from: usize, to: usize) {
        for i in from..to {
            self.link(i, i + 1, -1, -1);
        }
    }
}

/// Generalized Cartan matrix (node 0 affine) with marks and comarks.
fn affine_tables(t: AffineType) -> (Vec<Vec<i64>>, Vec<i64>, Vec<i64>) {
    use Family::*;
    let n = t.rank as usize;
    match (t.family, t.twist) {
        (A, 1) => {
            let mut d = Dynkin::new(n + 1);
            if n == 1 {
                d.link(0, 1, -2, -2);
            } else {
                for i in 0..=n {
                    d.link(i, (i + 1) % (n + 1), -1, -1);
                }
            }
            (d.a, vec![1; n + 1], vec![1; n + 1])
        }
        (B, 1) => {
            let mut d = Dynkin::new(n + 1);
            if n == 2 {
                d.link(0, 2, -1, -2);
                d.link(1, 2, -1, -2);
                return (d.a, vec![1, 1, 2], vec![1, 1, 1]);
            }
            d.chain(1, n - 1);
            d.link(n - 1, n, -1, -2);
            d.link(0, 2, -1, -1);
            let mut marks = vec![2; n + 1];
            marks[0] = 1;
            marks[1] = 1;
            let mut comarks = marks.clone();
            comarks[n] = 1;
            (d.a, marks, comarks)
        }
        (C, 1) => {
            let mut d = Dynkin::new(n + 1);
            d.chain(1, n - 1);
            d.link(n - 1, n, -2, -1);
            d.link(0, 1, -1, -2);
            let mut marks = vec![2; n + 1];
            marks[0] = 1;
            marks[n] = 1;
            (d.a, marks, vec![1; n + 1])
        }
        (D, 1) => {
            let mut d = Dynkin::new(n + 1);
            d.chain(1, n - 1);
            d.link(n - 2, n, -1, -1);
            d.link(0, 2, -1, -1);
            let mut marks = vec![2; n + 1];
            for i in [0, 1, n - 1, n] {
                marks[i] = 1;
            }
            (d.a, marks.clone(), marks)
        }
        (E, 1) => {
            let mut d = Dynkin::new(n + 1);
            d.link(1, 3, -1, -1);
            d.chain(3, n);
            d.link(2, 4, -1, -1);
            let marks = match n {
                6 => {
                    d.link(0, 2, -1, -1);
                    vec![1, 1, 2, 2, 3, 2, 1]
                }
                7 => {
                    d.link(0, 1, -1, -1);
                    vec![1, 2, 2, 3, 4, 3, 2, 1]
                }
                _ => {
                    d.link(0, 8, -1, -1);
                    vec![1, 2, 3, 4, 6, 5, 4, 3, 2]
                }
            };
            (d.a, marks.clone(), marks)
        }
        (F, 1) => {
            let mut d = Dynkin::new(5);
            d.chain(0, 2);
            d.link(2, 3, -1, -2);
            d.link(3, 4, -1, -1);
            (d.a, vec![1, 2, 3, 4, 2], vec![1, 2, 3, 2, 1])
        }
        (G, 1) => {
            let mut d = Dynkin::new(3);
            d.link(0, 1, -1, -1);
            d.link(1, 2, -1, -3);
            (d.a, vec![1, 2, 3], vec![1, 2, 1])
        }
        (A, 2) if n == 2 => {
            let mut d = Dynkin::new(2);
            d.link(0, 1, -4, -1);
            (d.a, vec![2, 1], vec![1, 2])
        }
        (A, 2) if n.is_multiple_of(2) => {
            let l = n / 2;
            let mut d = Dynkin::new(l + 1);
            d.link(0, 1, -2, -1);
            d.chain(1, l - 1);
            d.link(l - 1, l, -2, -1);
            let mut marks = vec![2; l + 1];
            marks[l] = 1;
            let mut comarks = vec![2; l + 1];
            comarks[0] = 1;
            (d.a, marks, comarks)
        }
        (A, 2) => {
            let l = n.div_ceil(2);
            let mut d = Dynkin::new(l + 1);
            if l == 2 {
                d.link(0, 2, -2, -1);
                d.link(1, 2, -2, -1);
                return (d.a, vec![1, 1, 1], vec![1, 1, 2]);
            }
            d.link(0, 2, -1, -1);
            d.link(1, 2, -1, -1);
            d.chain(2, l - 1);
            d.link(l - 1, l, -2, -1);
            let mut marks = vec![2; l + 1];
            marks[0] = 1;
            marks[1] = 1;
            marks[l] = 1;
            let mut comarks = vec![2; l + 1];
            comarks[0] = 1;
            comarks[1] = 1;
            (d.a, marks, comarks)
        }
        (D, 2) => {
            let l = n - 1;
            let mut d = Dynkin::new(l + 1);
            d.link(0, 1, -2, -1);
            d.chain(1, l - 1);
            d.link(l - 1, l, -1, -2);
            let mut comarks = vec![2; l + 1];
            comarks[0] = 1;
            comarks[l] = 1;
            (d.a, vec![1; l + 1], comarks)
        }
        (E, 2) => {
            let mut d = Dynkin::new(5);
            d.chain(0, 2);
            d.link(2, 3, -2, -1);
            d.link(3, 4, -1, -1);
            (d.a, vec![1, 2, 3, 2, 1], vec![1, 2, 3, 4, 2])
        }
        (D, 3) => {
            let mut d = Dynkin::new(3);
            d.link(0, 1, -1, -1);
            d.link(1, 2, -3, -1);
            (d.a, vec![1, 2, 1], vec![1, 2, 3])
        }
        _ => unreachable!("validated type"),
    }
}

/// Exact inverse of a nonsingular rational matrix by Gauss-Jordan elimination.
pub fn rational_inverse(m: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        let p = a[col][col];
        for v in a[col].iter_mut() {
            *v /= p;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col];
                let pivot_row = a[col].clone();
                for (v, pv) in a[r].iter_mut().zip(pivot_row) {
                    *v -= f * pv;
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Exact determinant of a rational matrix.
pub fn rational_det(m: &[Vec<Rational>]) -> Rational {
    let n = m.len();
    let mut a = m.to_vec();
    let mut det = Rational::one();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return Rational::zero();
        };
        if piv != col {
            a.swap(col, piv);
            det = -det;
        }
        let p = a[col][col];
        det *= p;
        for r in col + 1..n {
            let f = a[r][col] / p;
            if !f.is_zero() {
                let pivot_row = a[col].clone();
                for (v, pv) in a[r].iter_mut().zip(pivot_row) {
                    *v -= f * pv;
                }
            }
        }
    }
    det
}

fn to_rational(m: &[Vec<i64>]) -> Vec<Vec<Rational>> {
    m.iter().map(|r| r.iter().map(|&v| Rational::from_integer(v)).collect()).collect()
}

/// Clears denominators: returns (integer matrix, common denominator).
fn clear_denominators(m: &[Vec<Rational>]) -> (Vec<Vec<i64>>, i64) {
    let den = m.iter().flatten().fold(1i64, |acc, v| acc.lcm(v.denom()));
    let ints = m.iter().map(|r| r.iter().map(|v| (v * den).to_integer()).collect()).collect();
    (ints, den)
}

pub fn add(x: &[i64], y: &[i64]) -> Weight {
    x.iter().zip(y).map(|(a, b)| a + b).collect()
}

pub fn sub(x: &[i64], y: &[i64]) -> Weight {
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}

pub fn scale(c: i64, x: &[i64]) -> Weight {
    x.iter().map(|a| c * a).collect()
}

pub fn neg(x: &[i64]) -> Weight {
    x.iter().map(|a| -a).collect()
}

/// Matrix-vector product `m x`.
pub fn apply(m: &[Vec<i64>], x: &[i64]) -> Weight {
    m.iter().map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
}

/// Quadratic form `x^T q y` with integer matrix `q`.
fn bilinear(q: &[Vec<i64>], x: &[i64], y: &[i64]) -> i64 {
    x.iter().zip(q).map(|(xi, row)| xi * row.iter().zip(y).map(|(a, b)| a * b).sum::<i64>()).sum()
}

/// A positive root with its simple-root coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Root {
    pub weight: Weight,
    pub coeffs: Vec<i64>,
}

/// Immutable tables for one affine type.
#[derive(Debug, Clone)]
pub struct AffineData {
    pub affine_type: AffineType,
    pub n: usize,
    pub cartan: Vec<Vec<i64>>,
    pub marks: Vec<i64>,
    pub comarks: Vec<i64>,
    pub h: i64,
    pub h_dual: i64,
    /// `quad_form[i][j] = (Λ̄_i | Λ̄_j)` under the normalized invariant form.
    pub quad_form: Vec<Vec<Rational>>,
    pub finite_cartan: Vec<Vec<i64>>,
    /// Highest root `θ = Σ a_i α_i` of the affine diagram, in weight coordinates.
    pub theta: Weight,
    /// Positive roots of the finite part, in the order of generation.
    pub positive_roots: Vec<Root>,
    form_int: Vec<Vec<i64>>,
    form_den: i64,
}

pub fn build_affine_data(t: AffineType) -> AffineData {
    let (cartan, marks, comarks) = affine_tables(t);
    let n = cartan.len() - 1;
    let finite_cartan: Vec<Vec<i64>> = cartan[1..].iter().map(|r| r[1..].to_vec()).collect();
    let inv = rational_inverse(&to_rational(&finite_cartan)).expect("finite Cartan matrix is nonsingular");
    let quad_form: Vec<Vec<Rational>> = (0..n)
        .map(|i| {
            let c = Rational::new(comarks[i + 1], marks[i + 1]);
            inv[i].iter().map(|v| c * v).collect()
        })
        .collect();
    let (form_int, form_den) = clear_denominators(&quad_form);
    let mut theta = vec![0; n];
    for j in 0..n {
        for (i, t) in theta.iter_mut().enumerate() {
            *t += marks[j + 1] * finite_cartan[i][j];
        }
    }
    let positive_roots = positive_roots(&finite_cartan, &inv);
    AffineData {
        affine_type: t,
        n,
        h: marks.iter().sum(),
        h_dual: comarks.iter().sum(),
        cartan,
        marks,
        comarks,
        quad_form,
        finite_cartan,
        theta,
        positive_roots,
        form_int,
        form_den,
    }
}

fn positive_roots(af: &[Vec<i64>], af_inv: &[Vec<Rational>]) -> Vec<Root> {
    let n = af.len();
    let simple: Vec<Weight> = (0..n).map(|j| (0..n).map(|i| af[i][j]).collect()).collect();
    let mut seen: BTreeSet<Weight> = simple.iter().cloned().collect();
    let mut queue: VecDeque<Weight> = simple.iter().cloned().collect();
    let mut roots = Vec::new();
    while let Some(r) = queue.pop_front() {
        roots.push(r.clone());
        for (i, a) in simple.iter().enumerate() {
            let s = sub(&r, &scale(r[i], a));
            if seen.insert(s.clone()) {
                queue.push_back(s);
            }
        }
    }
    roots
        .into_iter()
        .filter_map(|w| {
            let coeffs: Vec<i64> = af_inv
                .iter()
                .map(|row| row.iter().zip(&w).map(|(a, b)| a * b).sum::<Rational>().to_integer())
                .collect();
            coeffs.iter().all(|&c| c >= 0).then_some(Root { weight: w, coeffs })
        })
        .collect()
}

impl AffineData {
    pub fn twist(&self) -> i64 {
        self.affine_type.twist as i64
    }

    pub fn a0(&self) -> i64 {
        self.marks[0]
    }

    /// True when `r > a0`: the translation lattice is the root lattice and
    /// dual labels are coweights.
    pub fn dual_is_coweight(&self) -> bool {
        self.twist() > self.a0()
    }

    /// `(x | y)` computed exactly.
    pub fn pairing(&self, x: &[i64], y: &[i64]) -> Rational {
        Rational::new(bilinear(&self.form_int, x, y), self.form_den)
    }

    pub fn norm(&self, x: &[i64]) -> Rational {
        self.pairing(x, x)
    }

    /// Integer numerator of `(x|y)` over [`Self::form_denominator`].
    pub fn pairing_numerator(&self, x: &[i64], y: &[i64]) -> i64 {
        bilinear(&self.form_int, x, y)
    }

    pub fn form_denominator(&self) -> i64 {
        self.form_den
    }

    /// Simple root `α_i` (0-based, finite node `i + 1`) in weight coordinates.
    pub fn simple_root(&self, i: usize) -> Weight {
        (0..self.n).map(|r| self.finite_cartan[r][i]).collect()
    }

    /// Simple coroot `α_i^∨` in coweight coordinates.
    pub fn simple_coroot(&self, i: usize) -> Weight {
        self.finite_cartan[i].clone()
    }

    pub fn rho(&self) -> Weight {
        vec![1; self.n]
    }

    /// The level `Σ_{i≥1} a_i^∨ c_i` of the finite part of a weight.
    pub fn finite_level(&self, x: &[i64]) -> i64 {
        x.iter().zip(&self.comarks[1..]).map(|(c, a)| c * a).sum()
    }

    /// Basis of the translation lattice `M` in weight coordinates.
    pub fn m_basis(&self) -> Vec<Weight> {
        (0..self.n)
            .map(|i| {
                let alpha = self.simple_root(i);
                if self.dual_is_coweight() {
                    alpha
                } else {
                    let (a, av) = (self.marks[i + 1], self.comarks[i + 1]);
                    alpha
                        .iter()
                        .map(|&v| {
                            let q = Rational::new(a * v, av);
                            debug_assert!(q.is_integer());
                            q.to_integer()
                        })
                        .collect()
                }
            })
            .collect()
    }

    /// Coefficients of the highest root of the finite part in simple roots.
    pub fn finite_highest_root(&self) -> Vec<i64> {
        self.positive_roots
            .iter()
            .max_by_key(|r| r.coeffs.iter().sum::<i64>())
            .map(|r| r.coeffs.clone())
            .expect("nonempty root system")
    }

    /// Weights defining the dual alcove `Σ m_j c_j <= ℓ`.
    pub fn dual_level_weights(&self) -> Vec<i64> {
        if self.dual_is_coweight() {
            self.finite_highest_root()
        } else {
            self.comarks[1..].to_vec()
        }
    }

    /// Least `m > 0` with `m (x | y) ∈ Z` for all `x` in `M` and `y` in the weight lattice.
    pub fn pairing_denominator_m(&self) -> i64 {
        let basis = self.m_basis();
        let mut m = 1;
        for b in &basis {
            for j in 0..self.n {
                let mut e = vec![0; self.n];
                e[j] = 1;
                m = m.lcm(self.pairing(b, &e).denom());
            }
        }
        m
    }

    /// Index of the root lattice in the weight lattice.
    pub fn root_index(&self) -> i64 {
        rational_det(&to_rational(&self.finite_cartan)).abs().to_integer()
    }

    /// True when every leading principal minor of the form is positive.
    pub fn form_is_positive_definite(&self) -> bool {
        (1..=self.n).all(|k| {
            let minor: Vec<Vec<Rational>> = self.quad_form[..k].iter().map(|r| r[..k].to_vec()).collect();
            rational_det(&minor) > Rational::zero()
        })
    }
}

/// Which side of the duality a weight vector lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Weight,
    Coweight,
}

/// Level-ℓ dominant weights (`Side::Weight`) or dual labels (`Side::Coweight`),
/// ordered lexicographically.
pub fn enumerate_dominant(d: &AffineData, level: i64, side: Side) -> Vec<Weight> {
    let weights = match side {
        Side::Weight => d.comarks[1..].to_vec(),
        Side::Coweight => d.dual_level_weights(),
    };
    let mut out = Vec::new();
    let mut cur = vec![0i64; d.n];
    fn rec(i: usize, budget: i64, w: &[i64], cur: &mut Vec<i64>, out: &mut Vec<Weight>) {
        if i == w.len() {
            out.push(cur.clone());
            return;
        }
        let mut c = 0;
        while c * w[i] <= budget {
            cur[i] = c;
            rec(i + 1, budget - c * w[i], w, cur, out);
            c += 1;
        }
        cur[i] = 0;
    }
    if level >= 0 {
        rec(0, level, &weights, &mut cur, &mut out);
    }
    out
}

/// Identification of weights with dual labels. The identity when `r <= a0`,
/// reversal of coordinates otherwise.
pub fn phi_map(d: &AffineData, x: &[i64]) -> Weight {
    if d.dual_is_coweight() {
        x.iter().rev().copied().collect()
    } else {
        x.to_vec()
    }
}

pub fn phi_inverse(d: &AffineData, x: &[i64]) -> Weight {
    phi_map(d, x)
}

/// Quotient `Z^n / L` for a full-rank sublattice `L`, with canonical
/// representatives read off a lower-triangular column Hermite form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Quotient {
    /// `columns[i]` has zeros above row `i` and a positive entry at row `i`.
    columns: Vec<Weight>,
    diag: Vec<i64>,
    order: usize,
}

impl Quotient {
    /// Builds the quotient by the lattice spanned by `basis`.
    pub fn new(basis: &[Weight]) -> Quotient {
        let n = basis.len();
        let mut rem: Vec<Weight> = basis.to_vec();
        let mut columns = Vec::with_capacity(n);
        for i in 0..n {
            loop {
                let mut nz: Vec<usize> = (0..rem.len()).filter(|&c| rem[c][i] != 0).collect();
                if nz.len() <= 1 {
                    break;
                }
                nz.sort_by_key(|&c| (rem[c][i].abs(), c));
                let p = rem[nz[0]].clone();
                for &c in &nz[1..] {
                    let q = Integer::div_floor(&rem[c][i], &p[i]);
                    rem[c] = sub(&rem[c], &scale(q, &p));
                }
            }
            let pos = rem.iter().position(|c| c[i] != 0).expect("sublattice has full rank");
            let mut piv = rem.remove(pos);
            if piv[i] < 0 {
                piv = neg(&piv);
            }
            columns.push(piv);
        }
        // Reduce below-diagonal entries so the form is unique.
        for i in 0..n {
            for j in 0..i {
                let q = Integer::div_floor(&columns[j][i], &columns[i][i]);
                if q != 0 {
                    columns[j] = sub(&columns[j], &scale(q, &columns[i]));
                }
            }
        }
        let diag: Vec<i64> = (0..n).map(|i| columns[i][i]).collect();
        let order = diag.iter().map(|&d| d as usize).product();
        Quotient { columns, diag, order }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn rank(&self) -> usize {
        self.diag.len()
    }

    pub fn diagonal(&self) -> &[i64] {
        &self.diag
    }

    pub fn columns(&self) -> &[Weight] {
        &self.columns
    }

    pub fn canonicalize(&self, x: &[i64]) -> Weight {
        let mut x = x.to_vec();
        for (i, col) in self.columns.iter().enumerate() {
            let q = Integer::div_floor(&x[i], &col[i]);
            if q != 0 {
                for (xk, ck) in x.iter_mut().zip(col) {
                    *xk -= q * ck;
                }
            }
        }
        x
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        self.canonicalize(x).iter().all(|&v| v == 0)
    }

    /// Position of the class of `x` in the canonical enumeration.
    pub fn index_of(&self, x: &[i64]) -> usize {
        let c = self.canonicalize(x);
        c.iter().zip(&self.diag).fold(0usize, |acc, (&v, &d)| acc * d as usize + v as usize)
    }

    pub fn element(&self, mut idx: usize) -> Weight {
        let mut out = vec![0; self.rank()];
        for i in (0..self.rank()).rev() {
            let d = self.diag[i] as usize;
            out[i] = (idx % d) as i64;
            idx /= d;
        }
        out
    }

    /// Canonical representatives in lexicographic order.
    pub fn elements(&self) -> Vec<Weight> {
        (0..self.order).map(|i| self.element(i)).collect()
    }
}

/// Lattice data for one affine type at one level.
#[derive(Debug, Clone)]
pub struct LevelContext {
    pub data: AffineData,
    pub level: i64,
    /// `k = ℓ + h^∨`.
    pub k: i64,
    /// `G_ℓ = P / kM`.
    pub group: Quotient,
    /// Dual labels: `P / kM` or `P^∨ / kQ^∨`.
    pub dual: Quotient,
    cross_int: Vec<Vec<i64>>,
    cross_den: i64,
}

impl LevelContext {
    pub fn new(data: AffineData, level: i64) -> Result<LevelContext, LatticeError> {
        if level < 1 {
            return Err(LatticeError::Level(level));
        }
        let k = level + data.h_dual;
        let group = Quotient::new(&data.m_basis().iter().map(|b| scale(k, b)).collect::<Vec<_>>());
        let (dual, cross) = if data.dual_is_coweight() {
            let basis: Vec<Weight> = (0..data.n).map(|i| scale(k, &data.simple_coroot(i))).collect();
            let cross: Vec<Vec<Rational>> = data
                .quad_form
                .iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .map(|(j, v)| v * Rational::new(data.marks[j + 1], data.comarks[j + 1]))
                        .collect()
                })
                .collect();
            (Quotient::new(&basis), cross)
        } else {
            (group.clone(), data.quad_form.clone())
        };
        let (cross_int, cross_den) = clear_denominators(&cross);
        Ok(LevelContext { data, level, k, group, dual, cross_int, cross_den })
    }

    pub fn n(&self) -> usize {
        self.data.n
    }

    /// `⟨λ, μ⟩` for a weight `λ` and a dual label `μ`.
    pub fn cross_pairing(&self, lambda: &[i64], mu: &[i64]) -> Rational {
        Rational::new(bilinear(&self.cross_int, lambda, mu), self.cross_den)
    }

    /// Phase units: `⟨λ, μ⟩ / k = units / modulus` with `units` reduced into `[0, modulus)`.
    pub fn cross_units(&self, lambda: &[i64], mu: &[i64]) -> i64 {
        bilinear(&self.cross_int, lambda, mu).rem_euclid(self.phase_modulus())
    }

    /// `v` with `cross_units(λ, μ) = Σ λ_i v_i mod modulus` for every `λ`.
    pub fn cross_functional(&self, mu: &[i64]) -> Vec<i64> {
        let m = self.phase_modulus();
        self.cross_int.iter().map(|row| row.iter().zip(mu).map(|(a, b)| a * b).sum::<i64>().rem_euclid(m)).collect()
    }

    pub fn phase_modulus(&self) -> i64 {
        self.cross_den * self.k
    }

    /// Shift applied to dual labels (`ρ̄` or `ρ̄^∨`, both all-ones).
    pub fn dual_shift(&self) -> Weight {
        vec![1; self.n()]
    }

    pub fn p_plus(&self) -> Vec<Weight> {
        enumerate_dominant(&self.data, self.level, Side::Weight)
    }

    pub fn p_dual_plus(&self) -> Vec<Weight> {
        enumerate_dominant(&self.data, self.level, Side::Coweight)
    }

    /// Absolute determinant of the basis of `kM` in weight coordinates.
    pub fn group_index_by_determinant(&self) -> i64 {
        let m: Vec<Vec<i64>> = self.data.m_basis().iter().map(|b| scale(self.k, b)).collect();
        rational_det(&to_rational(&m)).abs().to_integer()
    }
}

/// Formats an exact rational as `"p/q"` (or `"p"` when integral).
pub fn rational_string(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data(s: &str) -> AffineData {
        build_affine_data(s.parse().unwrap())
    }

    fn r(p: i64, q: i64) -> Rational {
        Rational::new(p, q)
    }

    #[test]
    fn parses_and_prints_types() {
        let t: AffineType = "A3~2".parse().unwrap();
        assert_eq!(t, AffineType { family: Family::A, rank: 3, twist: 2 });
        assert_eq!(t.to_string(), "A3~2");
        assert!(matches!("B1~1".parse::<AffineType>(), Err(LatticeError::InvalidType { .. })));
        assert!(matches!("E9~1".parse::<AffineType>(), Err(LatticeError::InvalidType { .. })));
        assert!(matches!("C3~2".parse::<AffineType>(), Err(LatticeError::InvalidType { .. })));
        assert!(matches!("A1-1".parse::<AffineType>(), Err(LatticeError::Parse(_))));
        assert!(matches!("X1~1".parse::<AffineType>(), Err(LatticeError::Parse(_))));
        assert!(matches!("A~1".parse::<AffineType>(), Err(LatticeError::Parse(_))));
    }

    #[test]
    fn coxeter_numbers_match_tables() {
        let expected = [
            ("A1~1", 2, 2),
            ("A2~1", 3, 3),
            ("A4~1", 5, 5),
            ("B2~1", 4, 3),
            ("B3~1", 6, 5),
            ("B4~1", 8, 7),
            ("C2~1", 4, 3),
            ("C3~1", 6, 4),
            ("D4~1", 6, 6),
            ("D5~1", 8, 8),
            ("E6~1", 12, 12),
            ("E7~1", 18, 18),
            ("E8~1", 30, 30),
            ("F4~1", 12, 9),
            ("G2~1", 6, 4),
            ("A2~2", 3, 3),
            ("A4~2", 5, 5),
            ("A6~2", 7, 7),
            ("A3~2", 3, 4),
            ("A5~2", 5, 6),
            ("A7~2", 7, 8),
            ("D3~2", 3, 4),
            ("D4~2", 4, 6),
            ("D5~2", 5, 8),
            ("E6~2", 9, 12),
            ("D4~3", 4, 6),
        ];
        for (s, h, hv) in expected {
            let d = data(s);
            assert_eq!((d.h, d.h_dual), (h, hv), "{s}");
            assert_eq!(d.h, d.marks.iter().sum::<i64>());
            assert_eq!(d.h_dual, d.comarks.iter().sum::<i64>());
        }
    }

    #[test]
    fn marks_are_null_vectors() {
        for t in AffineType::catalogue(8) {
            let d = build_affine_data(t);
            let m = d.n + 1;
            for i in 0..m {
                let right: i64 = (0..m).map(|j| d.cartan[i][j] * d.marks[j]).sum();
                let left: i64 = (0..m).map(|j| d.comarks[j] * d.cartan[j][i]).sum();
                assert_eq!((right, left), (0, 0), "{t}");
            }
            assert_eq!(d.comarks[0], 1, "{t}");
            assert_eq!(d.n, t.finite_rank());
        }
    }

    #[test]
    fn forms_are_symmetric_positive_definite() {
        for t in AffineType::catalogue(8) {
            let d = build_affine_data(t);
            for i in 0..d.n {
                for j in 0..d.n {
                    assert_eq!(d.quad_form[i][j], d.quad_form[j][i], "{t}");
                }
            }
            assert!(d.form_is_positive_definite(), "{t}");
            assert_eq!(d.norm(&d.theta), Rational::from_integer(2 * d.a0()), "{t}");
            for j in 0..d.n {
                let mut e = vec![0; d.n];
                e[j] = 1;
                assert_eq!(d.pairing(&e, &d.theta), Rational::from_integer(d.comarks[j + 1]), "{t}");
            }
        }
    }

    #[test]
    fn frozen_forms() {
        let cases: Vec<(&str, Vec<Vec<Rational>>)> = vec![
            ("A1~1", vec![vec![r(1, 2)]]),
            ("A2~1", vec![vec![r(2, 3), r(1, 3)], vec![r(1, 3), r(2, 3)]]),
            ("C2~1", vec![vec![r(1, 2), r(1, 2)], vec![r(1, 2), r(1, 1)]]),
            ("B2~1", vec![vec![r(1, 1), r(1, 2)], vec![r(1, 2), r(1, 2)]]),
            ("G2~1", vec![vec![r(2, 1), r(1, 1)], vec![r(1, 1), r(2, 3)]]),
            ("A2~2", vec![vec![r(1, 1)]]),
            ("A3~2", vec![vec![r(1, 1), r(1, 1)], vec![r(1, 1), r(2, 1)]]),
            ("D3~2", vec![vec![r(2, 1), r(1, 1)], vec![r(1, 1), r(1, 1)]]),
            ("D4~3", vec![vec![r(2, 1), r(3, 1)], vec![r(3, 1), r(6, 1)]]),
        ];
        for (s, f) in cases {
            assert_eq!(data(s).quad_form, f, "{s}");
        }
    }

    #[test]
    fn a1_data() {
        let d = data("A1~1");
        assert_eq!(d.n, 1);
        assert_eq!(d.marks, vec![1, 1]);
        assert_eq!(d.comarks, vec![1, 1]);
        assert_eq!(d.pairing(&[1], &[1]), r(1, 2));
        assert_eq!(d.pairing(&[0], &[5]), Rational::zero());
        assert_eq!(d.m_basis(), vec![vec![2]]);
    }

    #[test]
    fn m_bases() {
        let d = data("A3~2");
        assert!(d.dual_is_coweight());
        assert_eq!(d.m_basis(), vec![d.simple_root(0), d.simple_root(1)]);
        let d = data("A2~2");
        assert!(!d.dual_is_coweight());
        assert_eq!(d.m_basis(), vec![vec![1]]);
        assert!(data("D4~3").dual_is_coweight());
        assert!(!data("A4~2").dual_is_coweight());
    }

    #[test]
    fn m_basis_pairs_into_bounded_denominators() {
        for t in AffineType::catalogue(4) {
            let d = build_affine_data(t);
            let m = d.pairing_denominator_m();
            assert_eq!(d.root_index() % m, 0, "{t}");
        }
    }

    #[test]
    fn highest_roots() {
        assert_eq!(data("C2~1").finite_highest_root(), vec![2, 1]);
        assert_eq!(data("B2~1").finite_highest_root(), vec![1, 2]);
        assert_eq!(data("G2~1").finite_highest_root(), vec![2, 3]);
        assert_eq!(data("A3~2").finite_highest_root(), vec![2, 1]);
        assert_eq!(data("D3~2").finite_highest_root(), vec![1, 2]);
        assert_eq!(data("D4~3").finite_highest_root(), vec![3, 2]);
        assert_eq!(data("E8~1").positive_roots.len(), 120);
        assert_eq!(data("F4~1").positive_roots.len(), 24);
    }

    #[test]
    fn group_orders() {
        let cases = [
            ("A1~1", 1, 6),
            ("A1~1", 2, 8),
            ("A1~1", 3, 10),
            ("A2~1", 1, 48),
            ("C2~1", 1, 64),
            ("B2~1", 1, 64),
            ("G2~1", 1, 75),
            ("A2~2", 1, 4),
            ("A3~2", 1, 50),
            ("D3~2", 1, 50),
            ("D4~3", 1, 49),
        ];
        for (s, l, g) in cases {
            let ctx = LevelContext::new(data(s), l).unwrap();
            assert_eq!(ctx.group.order(), g, "{s}");
            assert_eq!(ctx.group.order() as i64, ctx.group_index_by_determinant());
            assert_eq!(ctx.dual.order(), g, "{s}");
        }
    }

    #[test]
    fn a1_group_elements() {
        let ctx = LevelContext::new(data("A1~1"), 1).unwrap();
        let els = ctx.group.elements();
        assert_eq!(els, (0..6).map(|i| vec![i]).collect::<Vec<_>>());
        assert_eq!(ctx.group.canonicalize(&[-1]), vec![5]);
        assert_eq!(ctx.group.canonicalize(&[8]), vec![2]);
    }

    #[test]
    fn canonicalize_is_a_retraction() {
        for t in AffineType::catalogue(3) {
            for l in 1..=3 {
                let ctx = LevelContext::new(build_affine_data(t), l).unwrap();
                for q in [&ctx.group, &ctx.dual] {
                    for (i, e) in q.elements().iter().enumerate() {
                        assert_eq!(&q.canonicalize(e), e, "{t}");
                        assert_eq!(q.index_of(e), i);
                        for c in q.columns() {
                            assert_eq!(&q.canonicalize(&add(e, c)), e);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn dominant_enumeration() {
        let d = data("A1~1");
        assert_eq!(enumerate_dominant(&d, 1, Side::Weight), vec![vec![0], vec![1]]);
        assert_eq!(enumerate_dominant(&d, 3, Side::Weight).len(), 4);
        let counts = [
            ("A2~1", [3, 6, 10]),
            ("C2~1", [3, 6, 10]),
            ("G2~1", [2, 4, 6]),
            ("A2~2", [1, 2, 2]),
            ("A3~2", [2, 4, 6]),
            ("D3~2", [2, 4, 6]),
            ("D4~3", [1, 2, 3]),
        ];
        for (s, c) in counts {
            let d = data(s);
            for (l, &expected) in (1..=3).zip(&c) {
                assert_eq!(enumerate_dominant(&d, l, Side::Weight).len(), expected, "{s} {l}");
                assert_eq!(enumerate_dominant(&d, l, Side::Coweight).len(), expected, "{s} {l}");
            }
        }
    }

    #[test]
    fn phi_is_a_bijection_of_alcoves() {
        for t in AffineType::catalogue(4) {
            let d = build_affine_data(t);
            for l in 1..=3 {
                let mut img: Vec<Weight> =
                    enumerate_dominant(&d, l, Side::Weight).iter().map(|x| phi_map(&d, x)).collect();
                img.sort();
                assert_eq!(img, enumerate_dominant(&d, l, Side::Coweight), "{t} {l}");
            }
            assert_eq!(phi_map(&d, &vec![0; d.n]), vec![0; d.n]);
        }
        let d = data("A2~1");
        assert_eq!(phi_map(&d, &[3, 1]), vec![3, 1]);
    }

    #[test]
    fn phi_of_shifted_weights_is_regular_dominant() {
        let d = data("A3~2");
        let k = 2 + d.h_dual;
        let m = d.dual_level_weights();
        for mu in enumerate_dominant(&d, 2, Side::Weight) {
            let v = phi_map(&d, &add(&mu, &d.rho()));
            assert!(v.iter().all(|&c| c >= 1));
            assert!(v.iter().zip(&m).map(|(a, b)| a * b).sum::<i64>() < k);
        }
    }

    #[test]
    fn quotient_hermite_form() {
        let q = Quotient::new(&[vec![4, 2], vec![2, 4]]);
        assert_eq!(q.order(), 12);
        assert!(q.contains(&[4, 2]));
        assert!(q.contains(&[6, 6]));
        assert!(!q.contains(&[1, 0]));
    }

    #[test]
    fn rational_linear_algebra() {
        let m = to_rational(&[vec![2, -1], vec![-1, 2]]);
        assert_eq!(rational_det(&m), r(3, 1));
        let inv = rational_inverse(&m).unwrap();
        assert_eq!(inv, vec![vec![r(2, 3), r(1, 3)], vec![r(1, 3), r(2, 3)]]);
        assert!(rational_inverse(&to_rational(&[vec![1, 2], vec![2, 4]])).is_none());
        assert_eq!(rational_string(&r(3, 6)), "1/2");
        assert_eq!(rational_string(&r(4, 2)), "2");
    }

    #[test]
    fn level_must_be_positive() {
        assert_eq!(LevelContext::new(data("A1~1"), 0).unwrap_err(), LatticeError::Level(0));
    }
}
