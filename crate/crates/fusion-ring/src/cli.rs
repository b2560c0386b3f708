//! Command-line front end: fusion tables, modular matrices and the verification suite.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::cartan_lattice::{
    add, build_affine_data, enumerate_dominant, neg, AffineType, LatticeError, Rational, Side, Weight,
};
use crate::characters::{alternant, character_element, is_regular_label, multiplicities, weyl_dimension};
use crate::fusion::{
    d_chi_relation, form_value, frobenius_deviation, ideal_fusion, idempotent_system, kac_walton_fusion,
    modular_matrices, projection_identity, tensor_decompose, verlinde_fusion, FusionError, FusionTable, Method,
    SCHEMA_VERSION,
};
use crate::group_algebra::{AlgebraContext, AlgebraElement, AlgebraError, Chart, Domain};
use crate::weyl::{WeylElement, WeylError, DEFAULT_RANK_LIMIT};

/// Environment variable that overrides [`DEFAULT_RANK_LIMIT`].
pub const RANK_LIMIT_ENV: &str = "FUSION_RANK_LIMIT";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTEGRITY: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CERTIFICATE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "fusion", version, about = "Fusion rings of twisted and untwisted affine Lie algebras")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute a fusion table.
    Table(TableArgs),
    /// Run every consistency check for one type and level.
    Verify(VerifyArgs),
    /// Print the modular S and T matrices.
    Smatrix(SmatrixArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ContextArgs {
    /// Affine type such as A1~1, A3~2 or D4~3.
    #[arg(long = "type", value_name = "TYPE")]
    pub affine_type: String,
    /// Positive level.
    #[arg(long, allow_negative_numbers = true)]
    pub level: i64,
    /// Largest finite rank to accept (overrides FUSION_RANK_LIMIT).
    #[arg(long, value_name = "RANK")]
    pub rank_override: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Verlinde,
    Ideal,
    Kacwalton,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Pretty,
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct TableArgs {
    #[command(flatten)]
    pub context: ContextArgs,
    #[arg(long, value_enum, default_value = "kacwalton")]
    pub method: MethodArg,
    #[arg(long, value_enum, default_value = "pretty")]
    pub format: Format,
    /// Write to this file instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub context: ContextArgs,
    /// `pretty` or `json`.
    #[arg(long, value_enum, default_value = "pretty")]
    pub format: Format,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Seed for the random draws.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Random draws per randomized check.
    #[arg(long, default_value_t = 100)]
    pub draws: usize,
    /// Replace every floating-point tolerance with this value.
    #[arg(long)]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct SmatrixArgs {
    #[command(flatten)]
    pub context: ContextArgs,
    /// `pretty` or `json`.
    #[arg(long, value_enum, default_value = "pretty")]
    pub format: Format,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{0}")]
    Integrity(String),
    #[error("certificate failure: {0}")]
    Certificate(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Integrity(_) | CliError::Io(_) => EXIT_INTEGRITY,
            CliError::Certificate(_) => EXIT_CERTIFICATE,
        }
    }
}

impl From<FusionError> for CliError {
    fn from(e: FusionError) -> Self {
        if e.is_certificate() {
            CliError::Certificate(e.to_string())
        } else {
            CliError::Integrity(e.to_string())
        }
    }
}

impl From<AlgebraError> for CliError {
    fn from(e: AlgebraError) -> Self {
        match e {
            AlgebraError::Lattice(l) => CliError::Usage(l.to_string()),
            AlgebraError::Weyl(w @ WeylError::RankBound { .. }) => CliError::Usage(w.to_string()),
            other => FusionError::from(other).into(),
        }
    }
}

/// Resolves the rank limit from the flag, then the environment, then the default.
pub fn rank_limit(flag: Option<usize>, env: Option<&str>) -> Result<usize, CliError> {
    if let Some(r) = flag {
        return Ok(r);
    }
    match env {
        Some(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{RANK_LIMIT_ENV} must be a nonnegative integer, got {v:?}"))),
        None => Ok(DEFAULT_RANK_LIMIT),
    }
}

/// Builds the computation context, reporting bad input as usage errors.
pub fn build_context(
    args: &ContextArgs,
    env_rank: Option<&str>,
    err: &mut dyn Write,
) -> Result<AlgebraContext, CliError> {
    let t: AffineType = args.affine_type.parse().map_err(|e: LatticeError| CliError::Usage(e.to_string()))?;
    if args.level < 1 {
        return Err(CliError::Usage(format!("level must be at least 1, got {}", args.level)));
    }
    let limit = rank_limit(args.rank_override, env_rank)?;
    if limit > DEFAULT_RANK_LIMIT && t.finite_rank() > DEFAULT_RANK_LIMIT {
        writeln!(
            err,
            "warning: finite rank {} exceeds {DEFAULT_RANK_LIMIT}; Weyl group enumeration may be slow",
            t.finite_rank()
        )?;
    }
    Ok(AlgebraContext::new(build_affine_data(t), args.level, limit)?)
}

/// Parses arguments and runs; returns the process exit code.
pub fn main_with<I, T>(args: I, env_rank: Option<&str>, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = if code == 0 { write!(out, "{}", e.render()) } else { write!(err, "{}", e.render()) };
            return code;
        }
    };
    match run(&cli, env_rank, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli, env_rank: Option<&str>, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    match &cli.command {
        Command::Table(a) => cmd_table(a, env_rank, out, err),
        Command::Verify(a) => cmd_verify(a, env_rank, out, err),
        Command::Smatrix(a) => cmd_smatrix(a, env_rank, out, err),
    }
}

fn emit(path: &Option<PathBuf>, text: &str, out: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Computes one table with the given engine.
pub fn compute_table(ctx: &AlgebraContext, method: Method) -> Result<FusionTable, FusionError> {
    match method {
        Method::Verlinde => verlinde_fusion(ctx, &modular_matrices(ctx)),
        Method::Ideal => Ok(ideal_fusion(ctx, &idempotent_system(ctx)?)?.0),
        Method::KacWalton => Ok(kac_walton_fusion(ctx)?.0),
    }
}

#[derive(Serialize)]
struct CsvComparisonRow {
    lambda_index: usize,
    mu_index: usize,
    nu_index: usize,
    verlinde: i64,
    ideal: i64,
    kacwalton: i64,
}

pub fn cmd_table(
    a: &TableArgs,
    env_rank: Option<&str>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, CliError> {
    let ctx = build_context(&a.context, env_rank, err)?;
    let single = match a.method {
        MethodArg::Verlinde => Some(Method::Verlinde),
        MethodArg::Ideal => Some(Method::Ideal),
        MethodArg::Kacwalton => Some(Method::KacWalton),
        MethodArg::All => None,
    };
    if let Some(m) = single {
        let t = compute_table(&ctx, m)?;
        let text = match a.format {
            Format::Pretty => t.to_pretty(),
            Format::Json => t.to_json_string() + "\n",
            Format::Csv => t.to_csv(),
        };
        emit(&a.output, &text, out)?;
        return Ok(EXIT_OK);
    }

    let tables: Vec<FusionTable> = Method::ALL.iter().map(|&m| compute_table(&ctx, m)).collect::<Result<_, _>>()?;
    let p = tables[0].size();
    let mut disagreeing = 0usize;
    let mut max_disc = 0i64;
    for l in 0..p {
        for m in 0..p {
            for n in 0..p {
                let vals: Vec<i64> = tables.iter().map(|t| t.get(l, m, n)).collect();
                let d = vals.iter().max().unwrap() - vals.iter().min().unwrap();
                if d != 0 {
                    disagreeing += 1;
                }
                max_disc = max_disc.max(d);
            }
        }
    }
    let agree = disagreeing == 0;
    let text = match a.format {
        Format::Pretty => {
            let mut s = tables[2].to_pretty();
            for t in &tables[..2] {
                s.push_str(&format!("{} vs kacwalton: max discrepancy {}\n", t.method, t.max_discrepancy(&tables[2])));
            }
            if agree {
                s.push_str("three-way agreement: verlinde = ideal = kacwalton\n");
            } else {
                s.push_str(&format!("DISAGREEMENT: {disagreeing} cells differ, max discrepancy {max_disc}\n"));
            }
            s
        }
        Format::Json => {
            let doc = json!({
                "schema_version": SCHEMA_VERSION,
                "kind": "comparison",
                "type": ctx.data().affine_type.to_string(),
                "level": ctx.lattice.level,
                "tables": tables.iter().map(|t| t.to_json()).collect::<Vec<_>>(),
                "agreement": agree,
                "max_discrepancy": max_disc,
                "disagreeing_cells": disagreeing,
            });
            serde_json::to_string_pretty(&doc).expect("json") + "\n"
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for l in 0..p {
                for m in 0..p {
                    for n in 0..p {
                        w.serialize(CsvComparisonRow {
                            lambda_index: l,
                            mu_index: m,
                            nu_index: n,
                            verlinde: tables[0].get(l, m, n),
                            ideal: tables[1].get(l, m, n),
                            kacwalton: tables[2].get(l, m, n),
                        })
                        .map_err(|e| CliError::Integrity(e.to_string()))?;
                    }
                }
            }
            String::from_utf8(w.into_inner().map_err(|e| CliError::Integrity(e.to_string()))?).expect("utf-8")
        }
    };
    emit(&a.output, &text, out)?;
    Ok(if agree { EXIT_OK } else { EXIT_INTEGRITY })
}

fn complex_string(c: Complex64) -> String {
    format!("{:+.6}{:+.6}i", c.re, c.im)
}

pub fn cmd_smatrix(
    a: &SmatrixArgs,
    env_rank: Option<&str>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, CliError> {
    let ctx = build_context(&a.context, env_rank, err)?;
    let m = modular_matrices(&ctx);
    let text = match a.format {
        Format::Json => serde_json::to_string_pretty(&m.to_json(&ctx)).expect("json") + "\n",
        Format::Csv => return Err(CliError::Usage("smatrix supports pretty and json".into())),
        Format::Pretty => {
            let mut s = format!("{} level {}: S (rows λ, columns φ(μ))\n", ctx.data().affine_type, ctx.lattice.level);
            for i in 0..m.size() {
                let row: Vec<String> = (0..m.size()).map(|j| complex_string(m.s[(i, j)])).collect();
                s.push_str(&format!("{:?}  {}\n", m.weights[i], row.join("  ")));
            }
            s.push_str("T diagonal\n");
            for (w, t) in m.weights.iter().zip(&m.t) {
                s.push_str(&format!("{:?}  {}\n", w, complex_string(*t)));
            }
            s
        }
    };
    emit(&a.output, &text, out)?;
    Ok(EXIT_OK)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// Reported but not gating.
    Info,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub status: Status,
    pub deviation: Option<f64>,
    pub tolerance: Option<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub seed: u64,
    pub draws: usize,
    pub tolerance: Option<f64>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { seed: 1, draws: 100, tolerance: None }
    }
}

struct Checks {
    items: Vec<CheckResult>,
    tolerance: Option<f64>,
}

impl Checks {
    fn measure(&mut self, name: &str, deviation: f64, tol: f64, detail: String) {
        let tol = self.tolerance.unwrap_or(tol);
        let status = if deviation <= tol { Status::Pass } else { Status::Fail };
        self.items.push(CheckResult {
            name: name.into(),
            status,
            deviation: Some(deviation),
            tolerance: Some(tol),
            detail,
        });
    }

    fn exact(&mut self, name: &str, ok: bool, detail: String) {
        let status = if ok { Status::Pass } else { Status::Fail };
        self.items.push(CheckResult { name: name.into(), status, deviation: None, tolerance: None, detail });
    }

    fn info(&mut self, name: &str, deviation: Option<f64>, detail: String) {
        self.items.push(CheckResult { name: name.into(), status: Status::Info, deviation, tolerance: None, detail });
    }

    /// Gating when `gate`, informational otherwise.
    fn measure_if(&mut self, gate: bool, name: &str, deviation: f64, tol: f64, detail: String) {
        if gate {
            self.measure(name, deviation, tol, detail);
        } else {
            self.info(name, Some(deviation), format!("{detail}; not gating for this type"));
        }
    }
}

/// Largest group order for which the cubic-cost operator checks run.
pub const OPERATOR_CHECK_LIMIT: usize = 1500;

pub fn random_element(ctx: &AlgebraContext, domain: Domain, rng: &mut ChaCha8Rng) -> AlgebraElement {
    let mut e = ctx.zero(domain);
    for c in e.coeffs.iter_mut() {
        *c = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    }
    e
}

pub fn random_vector(n: usize, bound: i64, rng: &mut ChaCha8Rng) -> Weight {
    (0..n).map(|_| rng.random_range(-bound..=bound)).collect()
}

/// Deviations of the intertwining law over random draws: `(corrected ι₁, corrected ι₃, literal)`.
pub fn intertwining_deviations(
    ctx: &AlgebraContext,
    draws: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(f64, f64, f64), FusionError> {
    let n = ctx.data().n;
    let id = WeylElement::identity(n);
    let k = ctx.k();
    let shift = ctx.lattice.dual_shift();
    let (mut d1, mut d3, mut dl) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..draws {
        let f = random_element(ctx, Domain::Group, rng);
        let alpha = random_vector(n, k, rng);
        let beta = random_vector(n, k, rng);
        let acted = ctx.heisenberg_act(&id, &alpha, &beta, Rational::zero(), &f);
        let ab = ctx.lattice.cross_pairing(&alpha, &beta);
        let lhs1 = ctx.fourier_chart(&acted, Chart::Iota1)?;
        let rhs1 = ctx.heisenberg_act(&id, &beta, &neg(&alpha), ab, &ctx.fourier_chart(&f, Chart::Iota1)?);
        d1 = d1.max(lhs1.distance(&rhs1));
        let lhs3 = ctx.fourier(&acted)?;
        let f3 = ctx.fourier(&f)?;
        let u3 = ab - ctx.lattice.cross_pairing(&alpha, &shift);
        d3 = d3.max(lhs3.distance(&ctx.heisenberg_act(&id, &beta, &neg(&alpha), u3, &f3)));
        let literal = -ctx.lattice.cross_pairing(&alpha, &ctx.phi(&beta)) / Rational::from_integer(2);
        dl = dl.max(lhs3.distance(&ctx.heisenberg_act(&id, &beta, &neg(&alpha), literal, &f3)));
    }
    Ok((d1, d3, dl))
}

/// Runs every check for one context.
pub fn verify_suite(ctx: &AlgebraContext, opts: &VerifyOptions) -> Result<Vec<CheckResult>, FusionError> {
    let mut c = Checks { items: Vec::new(), tolerance: opts.tolerance };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let d = ctx.data();
    let untwisted = d.twist() == 1;
    let g = ctx.order();
    let level = ctx.lattice.level;
    let (weights, _) = crate::fusion::table_weights(ctx);
    let p = weights.len();

    // Counting.
    let det = ctx.lattice.group_index_by_determinant();
    c.exact("counting.group_order", det == g as i64, format!("|G| = {g}, determinant = {det}"));
    let pd = ctx.lattice.p_dual_plus().len();
    c.exact("counting.dual_labels", pd == p, format!("|P+| = {p}, |P∨+| = {pd}"));
    let orbits = crate::fusion::dot_orbits(ctx);
    let regular = orbits.iter().filter(|o| is_regular_label(ctx, &ctx.dual_elements()[o[0]])).count();
    c.exact("counting.regular_orbits", regular == p, format!("{regular} regular dot orbits, |P+| = {p}"));

    // Modular matrices.
    let m = modular_matrices(ctx);
    c.measure("modular.symmetry", m.symmetry_deviation(), 1e-9, "S = Sᵀ".into());
    c.measure("modular.unitarity", m.unitarity_deviation(), 1e-9, "S S† = 1".into());
    let t_dev = m.t.iter().map(|t| (t.norm() - 1.0).abs()).fold(0.0, f64::max);
    c.measure("modular.t_unimodular", t_dev, 1e-12, "|T| = 1".into());
    let (s2, s2p) = m.s_squared();
    c.measure("modular.s_squared", s2, 1e-8, format!("S² = c·C with c = {}", fmt_c(s2p)));
    let (st3, st3p) = m.st_cubed();
    c.measure_if(untwisted, "modular.st_cubed", st3, 1e-8, format!("(ST)³ = c·S² with c = {}", fmt_c(st3p)));
    let moduli: Vec<f64> = m.s.iter().map(|v| v.norm()).collect();
    let (lo, hi) = moduli.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    c.info("modular.entry_moduli", None, format!("|S| in [{lo:.6}, {hi:.6}]"));
    c.info("modular.global_phase", None, format!("S00 phase {}", fmt_c(m.vacuum_phase())));

    // Fourier analysis.
    let (mut inv, mut pars, mut conv) = (0.0f64, 0.0f64, 0.0f64);
    let root_g = Complex64::new((g as f64).sqrt(), 0.0);
    for _ in 0..opts.draws {
        let f = random_element(ctx, Domain::Group, &mut rng);
        let h = random_element(ctx, Domain::Group, &mut rng);
        let ff = ctx.fourier(&f)?;
        inv = inv.max(ctx.inv_fourier(&ff)?.distance(&f));
        pars = pars.max((ff.norm_squared() - f.norm_squared()).abs());
        let lhs = ctx.fourier(&ctx.convolve(&f, &h)?)?;
        let rhs = ctx.pointwise_mul(&ff, &ctx.fourier(&h)?)?.scale(root_g);
        conv = conv.max(lhs.distance(&rhs));
    }
    c.measure("fourier.inversion", inv, 1e-9, format!("{} random elements", opts.draws));
    c.measure("fourier.parseval", pars, 1e-9, format!("{} random elements", opts.draws));
    c.measure("fourier.convolution", conv, 1e-9, format!("{} random pairs", opts.draws));
    if g <= OPERATOR_CHECK_LIMIT {
        let e = ctx.chart_matrix(Chart::Iota1);
        let gram = e * e.adjoint();
        let dev = (0..g)
            .flat_map(|i| (0..g).map(move |j| (i, j)))
            .map(|(i, j)| (gram[(i, j)] - Complex64::new(if i == j { g as f64 } else { 0.0 }, 0.0)).norm())
            .fold(0.0, f64::max);
        c.measure("fourier.characters_orthogonal", dev, 1e-9, "ι₁ rows orthogonal".into());
    }

    // Heisenberg action.
    let (d1, d3, dl) = intertwining_deviations(ctx, opts.draws, &mut rng)?;
    c.measure("heisenberg.intertwining", d1, 1e-9, "(α,β,0) ↦ (β,-α,⟨α,β⟩), ι₁ chart".into());
    c.measure("heisenberg.intertwining_iota3", d3, 1e-9, "(α,β,0) ↦ (β,-α,⟨α,β⟩-⟨α,ρ∨⟩), ι₃ chart".into());
    c.info("heisenberg.literal_half_phase", Some(dl), "(α,β,0) ↦ (β,-α,-½⟨α,φ(β)⟩), ι₃ chart".into());
    if g <= OPERATOR_CHECK_LIMIT {
        let r = ctx.weil_relations();
        c.measure("weil.s_squared", r.s_squared, 1e-8, format!("S² = c·(λ ↦ -λ), c = {}", fmt_c(r.s_squared_phase)));
        c.measure_if(
            untwisted,
            "weil.st_cubed",
            r.st_cubed,
            1e-8,
            format!("(ST)³ = c·S², c = {}", fmt_c(r.st_cubed_phase)),
        );
    }

    // Characters.
    let rho = d.rho();
    let arho = alternant(ctx, &rho);
    let mut alt = 0.0f64;
    let mut dims_ok = true;
    for w in &weights {
        let lhs = ctx.convolve(&character_element(ctx, w)?, &arho)?;
        alt = alt.max(lhs.distance(&alternant(ctx, &add(w, &rho))));
        dims_ok &= multiplicities(ctx, w)?.dimension() == weyl_dimension(d, w);
    }
    c.measure("characters.alternant_product", alt, 1e-10, "χ_λ A_ρ = A_{λ+ρ}".into());
    c.exact("characters.weyl_dimension", dims_ok, "Freudenthal total = Weyl dimension".into());

    // Idempotents and Δ.
    let sys = idempotent_system(ctx)?;
    if g <= OPERATOR_CHECK_LIMIT {
        let mut dev = 0.0f64;
        for o in 0..sys.orbits.len() {
            dev = dev.max(sys.phi_from_psi(ctx, o)?.distance(&sys.phi[o]));
        }
        c.measure("idempotents.psi", dev, 1e-10, "g^{-1/2} Σ fourier(ψ) = φ".into());
    }
    let mut orth = 0.0f64;
    for (i, x) in sys.phi.iter().enumerate() {
        for (j, y) in sys.phi.iter().enumerate().skip(i) {
            let prod = ctx.pointwise_mul(x, y)?;
            let expected = if i == j { x.clone() } else { ctx.zero(Domain::Dual) };
            orth = orth.max(prod.distance(&expected));
        }
    }
    c.measure("idempotents.orthogonal", orth, 1e-12, format!("{} orbit idempotents", sys.phi.len()));
    let mut indicator = ctx.zero(Domain::Dual);
    for &o in &sys.regular {
        indicator = indicator.add(&sys.phi[o]);
    }
    c.measure("delta.transform", ctx.evaluate(&sys.delta)?.distance(&indicator), 1e-10, "Δ̂ = Σ φ^ν_j".into());
    let dd = ctx.convolve(&sys.delta, &sys.delta)?;
    c.measure("delta.idempotent", dd.distance(&sys.delta), 1e-10, "Δ∗Δ = Δ".into());

    // Engines.
    let verlinde = verlinde_fusion(ctx, &m)?;
    let (ideal, ideal_report) = ideal_fusion(ctx, &sys)?;
    let (kw, kw_report) = kac_walton_fusion(ctx)?;
    let disc = verlinde.max_discrepancy(&kw).max(ideal.max_discrepancy(&kw));
    c.exact("oracle.three_way", disc == 0, format!("max discrepancy {disc} over {} cells", p * p * p));
    let rep = kw.report();
    c.exact(
        "oracle.table_algebra",
        rep.algebra_ok(),
        format!("unit {}, commutative {}, associative {}", rep.vacuum_is_identity, rep.commutative, rep.associative),
    );
    if untwisted {
        c.exact("oracle.nonnegative", rep.negative_entries == 0, format!("{} negative entries", rep.negative_entries));
    } else {
        c.info(
            "oracle.nonnegative",
            None,
            format!("{} negative entries; twisted rings need not be nonnegative", rep.negative_entries),
        );
    }
    c.measure(
        "ideal.group_side",
        ideal_report.group_side_deviation,
        1e-8,
        format!("χ condition {:.3e}", ideal_report.chi_condition),
    );

    // Forms.
    let chars: Vec<AlgebraElement> = weights.iter().map(|w| character_element(ctx, w)).collect::<Result<_, _>>()?;
    let mut on = 0.0f64;
    for (i, x) in chars.iter().enumerate() {
        for (j, y) in chars.iter().enumerate() {
            let v = form_value(ctx, &sys, 1, x, y)?;
            on = on.max((v - Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0)).norm());
        }
    }
    c.measure("forms.orthonormality", on, 1e-8, "⟨χ_λ, χ_μ⟩₁ = δ".into());
    c.measure(
        "forms.frobenius",
        frobenius_deviation(ctx, &sys, &m)?,
        1e-8,
        "⟨χ_λχ_μ, χ_ν⟩₁ = ⟨χ_λ, χ_{-w₀μ}χ_ν⟩₁".into(),
    );
    let (dchi, amin) = d_chi_relation(ctx, &sys, &m)?;
    c.measure("forms.d_chi", dchi, 1e-8, "D·χ = S_𝒜ᵀ".into());
    c.exact("forms.a_rho_nonvanishing", amin > 1e-8, format!("min |Â_ρ| = {amin:.6e}"));
    let mut assoc = 0.0f64;
    for _ in 0..opts.draws.min(20) {
        let x = ctx.convolve(&sys.delta, &random_element(ctx, Domain::Group, &mut rng))?;
        let y = ctx.convolve(&sys.delta, &random_element(ctx, Domain::Group, &mut rng))?;
        let z = ctx.convolve(&sys.delta, &random_element(ctx, Domain::Group, &mut rng))?;
        let l = form_value(ctx, &sys, 0, &ctx.convolve(&x, &y)?, &z)?;
        let r = form_value(ctx, &sys, 0, &x, &ctx.convolve(&y, &z)?)?;
        assoc = assoc.max((l - r).norm() / (1.0 + l.norm()));
    }
    c.measure("forms.form0_associative", assoc, 1e-8, "⟨fg, h⟩₀ = ⟨f, gh⟩₀ (relative)".into());

    // Kac-Walton.
    let pool = enumerate_dominant(d, 2 * level, Side::Weight);
    let mut proj = 0.0f64;
    let draws = opts.draws.min(50);
    for _ in 0..draws {
        let lam = &pool[rng.random_range(0..pool.len())];
        proj = proj.max(projection_identity(ctx, &sys, lam)?);
    }
    c.measure("kacwalton.projection", proj, 1e-8, format!("{draws} random λ of level ≤ {}", 2 * level));
    let mut conserved = true;
    for a in &weights {
        for b in &weights {
            let total: i64 = tensor_decompose(d, a, b)?.iter().map(|(w, m)| m * weyl_dimension(d, w)).sum();
            conserved &= total == weyl_dimension(d, a) * weyl_dimension(d, b);
        }
    }
    c.exact("combinatorics.dimension_conservation", conserved, format!("{} pairs", p * p));
    c.exact(
        "combinatorics.certificates",
        true,
        format!(
            "{} affine folds certified, {} wall hits, {} affine reflections",
            kw_report.folds, kw_report.wall_hits, kw_report.affine_reflections
        ),
    );
    Ok(c.items)
}

fn fmt_c(c: Complex64) -> String {
    format!("{:.6}{:+.6}i", c.re, c.im)
}

pub fn all_passed(checks: &[CheckResult]) -> bool {
    checks.iter().all(|c| c.status != Status::Fail)
}

pub fn render_checks(checks: &[CheckResult]) -> String {
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    let mut s = String::new();
    for c in checks {
        let tag = match c.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Info => "info",
        };
        let dev = match (c.deviation, c.tolerance) {
            (Some(d), Some(t)) => format!("deviation {d:.3e} (tol {t:.0e})  "),
            (Some(d), None) => format!("deviation {d:.3e}  "),
            _ => String::new(),
        };
        s.push_str(&format!("{tag}  {:width$}  {dev}{}\n", c.name, c.detail));
    }
    s
}

pub fn cmd_verify(
    a: &VerifyArgs,
    env_rank: Option<&str>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, CliError> {
    let ctx = build_context(&a.context, env_rank, err)?;
    let opts = VerifyOptions { seed: a.seed, draws: a.draws, tolerance: a.tolerance };
    let checks = verify_suite(&ctx, &opts)?;
    let ok = all_passed(&checks);
    let text = match a.format {
        Format::Pretty => {
            let mut s =
                format!("verify {} level {} (|G| = {})\n", ctx.data().affine_type, ctx.lattice.level, ctx.order());
            s.push_str(&render_checks(&checks));
            s.push_str(if ok { "all checks passed\n" } else { "some checks FAILED\n" });
            s
        }
        Format::Json => {
            let doc = json!({
                "schema_version": SCHEMA_VERSION,
                "kind": "verify",
                "type": ctx.data().affine_type.to_string(),
                "level": ctx.lattice.level,
                "passed": ok,
                "checks": checks,
            });
            serde_json::to_string_pretty(&doc).expect("json") + "\n"
        }
        Format::Csv => return Err(CliError::Usage("verify supports pretty and json".into())),
    };
    emit(&a.output, &text, out)?;
    Ok(if ok { EXIT_OK } else { EXIT_INTEGRITY })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str], env: Option<&str>) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = main_with(std::iter::once("fusion").chain(args.iter().copied()), env, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn rank_limit_resolution() {
        assert_eq!(rank_limit(None, None).unwrap(), DEFAULT_RANK_LIMIT);
        assert_eq!(rank_limit(None, Some("6")).unwrap(), 6);
        assert_eq!(rank_limit(Some(2), Some("6")).unwrap(), 2);
        assert!(rank_limit(None, Some("x")).is_err());
    }

    #[test]
    fn usage_errors() {
        assert_eq!(run_args(&["table", "--type", "A1~1", "--level", "0"], None).0, EXIT_USAGE);
        assert_eq!(run_args(&["table", "--type", "Q1~1", "--level", "1"], None).0, EXIT_USAGE);
        assert_eq!(run_args(&["table", "--type", "E8~1", "--level", "1"], None).0, EXIT_USAGE);
        assert_eq!(run_args(&["table", "--type", "A1~1"], None).0, EXIT_USAGE);
        assert_eq!(run_args(&["table", "--type", "A5~1", "--level", "1"], Some("3")).0, EXIT_USAGE);
    }

    #[test]
    fn golden_table() {
        let (code, out, _) = run_args(&["table", "--type", "A1~1", "--level", "1", "--method", "all"], None);
        assert_eq!(code, 0);
        assert!(out.contains("χ1 | χ1 | χ0"));
        assert!(out.contains("three-way agreement"));
    }

    #[test]
    fn verify_golden_context() {
        let (code, out, _) = run_args(&["verify", "--type", "A1~1", "--level", "1"], None);
        assert_eq!(code, 0, "{out}");
        assert!(out.contains("0.707107"));
        assert!(!out.contains("FAIL"));
    }

    #[test]
    fn intertwining_laws() {
        let ctx = AlgebraContext::new(build_affine_data("A2~1".parse().unwrap()), 1, DEFAULT_RANK_LIMIT).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (d1, d3, dl) = intertwining_deviations(&ctx, 10, &mut rng).unwrap();
        assert!(d1 < 1e-9 && d3 < 1e-9);
        assert!(dl > 1e-3);
    }
}
