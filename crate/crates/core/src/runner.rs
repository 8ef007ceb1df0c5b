//! Batch front end: one config, one command, CSV tables and a manifest.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::ccp::{analyze_sequence, make_bubbles, BubbleSpec, CcpContext};
use crate::config::{Command, ExperimentConfig, Family, TestFunction, Tolerances};
use crate::error::{OrliczError, Result};
use crate::grid::{
    bump, check_norm_modular_bounds, estimate_sobolev_constant, gradient_norm, luxemburg_norm,
    luxemburg_norm_weighted, modular, GridFunction, TestFamily,
};
use crate::io::{fmt_f64, sha256_hex, write_atomic, Table};
use crate::matuszewska::profile;
use crate::mountain_pass::{lambda_sweep, run_mountain_pass, MpOptions, ProblemSpec};
use crate::numerics::log_space;
use crate::row;
use crate::sobolev::{build_an, check_an_delta2, check_an_power_bounds, check_h_bounds};
use crate::suite::{builtin_family, run_suite, SuiteOptions};
use crate::young::{young_inequality_violations, YoungFunction};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFICATION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Clone)]
pub struct RunRequest {
    pub command: Command,
    pub config: PathBuf,
    pub out_dir: Option<PathBuf>,
    pub tol_scale: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputRecord {
    pub file: String,
    pub sha256: String,
    pub rows: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config_file: String,
    pub config_sha256: String,
    pub tol_scale: f64,
    pub tolerances: Tolerances,
    /// Fixed internal tolerances.
    pub internal: BTreeMap<String, f64>,
    pub status: String,
    pub partial: bool,
    pub message: Option<String>,
    pub outputs: Vec<OutputRecord>,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub exit_code: i32,
    pub message: Option<String>,
    pub out_dir: Option<PathBuf>,
    pub manifest: Option<Manifest>,
}

/// Tables produced so far plus the verdict of every check that ran.
#[derive(Default)]
struct Outputs {
    tables: Vec<(String, Table)>,
    failures: Vec<String>,
}

impl Outputs {
    fn table(&mut self, name: &str, t: Table) {
        self.tables.push((name.to_string(), t));
    }

    fn check(&mut self, what: &str, holds: bool) {
        if !holds {
            self.failures.push(what.to_string());
        }
    }
}

fn summary() -> Table {
    Table::new(&["quantity", "value"])
}

fn kv(t: &mut Table, k: &str, v: String) {
    t.push(vec![k.to_string(), v]);
}

fn internal_tolerances() -> BTreeMap<String, f64> {
    let mut m = BTreeMap::new();
    let mp = MpOptions::default();
    m.insert("mp.step-fraction".into(), mp.step_fraction);
    m.insert("mp.stall-window".into(), mp.stall_window as f64);
    m.insert("mp.newton-iters".into(), mp.newton_iters as f64);
    m.insert("mp.nontrivial-factor".into(), 1e3);
    m.insert("ccp.atom-radius-cells".into(), crate::ccp::ATOM_RADIUS as f64);
    m.insert("norm.indicator-rel".into(), INDICATOR_REL);
    m.insert("ccp.rh-tail-fraction".into(), RH_TAIL_FRACTION);
    m
}

const INDICATOR_REL: f64 = 1e-10;
/// RH is checked on members with ε_k ≤ this fraction of the test-bump width.
const RH_TAIL_FRACTION: f64 = 0.25;

pub fn run(req: &RunRequest) -> RunReport {
    let fail = |code: i32, msg: String| RunReport { exit_code: code, message: Some(msg), out_dir: None, manifest: None };
    let text = match std::fs::read_to_string(&req.config) {
        Ok(t) => t,
        Err(e) => return fail(EXIT_CONFIG, format!("cannot read {}: {e}", req.config.display())),
    };
    let cfg = match ExperimentConfig::parse(&text) {
        Ok(c) => c,
        Err(e) => return fail(EXIT_CONFIG, format!("{}: {e}", req.config.display())),
    };
    if !(req.tol_scale > 0.0) || !req.tol_scale.is_finite() {
        return fail(EXIT_CONFIG, format!("--tol-scale {} must be positive", req.tol_scale));
    }
    let base = req.config.parent().map(Path::to_path_buf).unwrap_or_default();
    if let Err(e) = cfg.validate(req.command, &base) {
        return fail(EXIT_CONFIG, format!("{}: {e}", req.config.display()));
    }
    let out_dir = req
        .out_dir
        .clone()
        .or_else(|| cfg.output_dir.as_ref().map(|d| base.join(d)))
        .unwrap_or_else(|| base.join("out"));
    let tol = cfg.tolerances.scaled(req.tol_scale);

    let mut out = Outputs::default();
    let result = execute(req.command, &cfg, &base, &tol, &mut out);
    let (exit_code, status, message, partial) = match result {
        Ok(()) if out.failures.is_empty() => (EXIT_OK, "ok", None, false),
        Ok(()) => (EXIT_VERIFICATION, "verification-failed", Some(format!("failed checks: {}", out.failures.join(", "))), false),
        Err(e @ (OrliczError::Config(_) | OrliczError::Unsupported(_))) => (EXIT_CONFIG, "config-error", Some(e.to_string()), true),
        Err(e) => (EXIT_VERIFICATION, "numeric-failure", Some(e.to_string()), true),
    };

    let mut records = Vec::new();
    for (name, t) in &out.tables {
        let bytes = match t.to_bytes() {
            Ok(b) => b,
            Err(e) => return fail(EXIT_VERIFICATION, e.to_string()),
        };
        if let Err(e) = write_atomic(&out_dir.join(name), &bytes) {
            return fail(EXIT_VERIFICATION, e.to_string());
        }
        records.push(OutputRecord { file: name.clone(), sha256: sha256_hex(&bytes), rows: t.rows.len() });
    }
    let manifest = Manifest {
        tool: "orlicz".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: req.command.name().into(),
        config_file: req.config.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default(),
        config_sha256: sha256_hex(text.as_bytes()),
        tol_scale: req.tol_scale,
        tolerances: tol,
        internal: internal_tolerances(),
        status: status.into(),
        partial,
        message: message.clone(),
        outputs: records,
    };
    let json = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
    if let Err(e) = write_atomic(&out_dir.join("manifest.json"), &json) {
        return fail(EXIT_VERIFICATION, e.to_string());
    }
    RunReport { exit_code, message, out_dir: Some(out_dir), manifest: Some(manifest) }
}

fn execute(cmd: Command, cfg: &ExperimentConfig, base: &Path, tol: &Tolerances, out: &mut Outputs) -> Result<()> {
    match cmd {
        Command::Inspect => inspect(cfg, base, out),
        Command::Conjugate => conjugate(cfg, base, tol, out),
        Command::Sobolev => sobolev(cfg, base, out),
        Command::Norm => norm(cfg, base, tol, out),
        Command::Ccp => ccp(cfg, base, out),
        Command::Solve => solve(cfg, base, tol, out),
        Command::Sweep => sweep(cfg, base, tol, out),
        Command::Verify => verify(cfg, base, tol, out),
    }
}

fn inspect(cfg: &ExperimentConfig, base: &Path, out: &mut Outputs) -> Result<()> {
    let y = cfg.young(base)?;
    let r = &cfg.inspect;
    let mut t = Table::new(&["t", "A", "a", "index", "inverse_roundtrip"]);
    for x in log_space(r.lo, r.hi, r.points) {
        let a = y.eval(x)?;
        t.push(row![x, a, y.density(x)?, y.ratio(x)?, y.inverse(a)?]);
    }
    out.table("inspect.csv", t);
    let idx = y.growth_indices()?;
    let mut s = summary();
    kv(&mut s, "function", y.describe());
    kv(&mut s, "p_minus", fmt_f64(idx.p_minus));
    kv(&mut s, "p_plus", fmt_f64(idx.p_plus));
    kv(&mut s, "delta2_constant", fmt_f64(idx.delta2_constant));
    let p = profile(&y)?;
    kv(&mut s, "p_infinity", fmt_f64(p.p_infinity()));
    kv(&mut s, "p_infinity_uncertainty", fmt_f64(p.p_infinity_uncertainty()));
    out.table("summary.csv", s);
    Ok(())
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    10f64.powf(rng.gen_range(lo.log10()..hi.log10()))
}

fn conjugate(cfg: &ExperimentConfig, base: &Path, tol: &Tolerances, out: &mut Outputs) -> Result<()> {
    let y = cfg.young(base)?;
    let c = y.conjugate()?;
    let spec = &cfg.conjugate;
    let mut t = Table::new(&["s", "conjugate", "conjugate_density"]);
    for s in log_space(spec.range.lo, spec.range.hi, spec.range.points) {
        t.push(row![s, c.eval(s)?, c.density(s)?]);
    }
    out.table("conjugate.csv", t);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (lo, hi) = (spec.range.lo, spec.range.hi);
    let pairs: Vec<(f64, f64)> =
        (0..spec.young_pairs).map(|_| (log_uniform(&mut rng, lo, hi), log_uniform(&mut rng, lo, hi))).collect();
    let bad = young_inequality_violations(&y, &c, &pairs, tol.young_rel)?;
    let mut s = summary();
    kv(&mut s, "function", y.describe());
    kv(&mut s, "conjugate", c.describe());
    kv(&mut s, "young_pairs", pairs.len().to_string());
    kv(&mut s, "young_violations", bad.to_string());
    out.table("summary.csv", s);
    out.check("young-inequality", bad == 0);
    Ok(())
}

fn sobolev(cfg: &ExperimentConfig, base: &Path, out: &mut Outputs) -> Result<()> {
    let y = cfg.young(base)?;
    let n = cfg.dimension()?;
    let s = build_an(&y, n)?;
    let r = &cfg.sobolev;
    let mut t = Table::new(&["t", "H", "H_inverse", "A_n", "a_n"]);
    for x in log_space(r.lo, r.hi, r.points) {
        t.push(row![x, s.h(x)?, s.h_inverse(x)?, s.an_eval(x)?, s.an_density(x)?]);
    }
    out.table("sobolev.csv", t);
    let range = (1.5, 1e4);
    let hb = check_h_bounds(&s, range)?;
    let ab = check_an_power_bounds(&s, range)?;
    let dl = check_an_delta2(&s)?;
    let (e1, e2) = s.critical_exponents();
    let mut m = summary();
    kv(&mut m, "function", y.describe());
    kv(&mut m, "n", n.to_string());
    kv(&mut m, "pn_minus", fmt_f64(s.pn_indices().p_minus));
    kv(&mut m, "pn_plus", fmt_f64(s.pn_indices().p_plus));
    kv(&mut m, "critical_exponent_lo", fmt_f64(e1));
    kv(&mut m, "critical_exponent_hi", fmt_f64(e2));
    kv(&mut m, "h_bounds_hold", hb.holds.to_string());
    kv(&mut m, "an_bounds_hold", ab.holds.to_string());
    kv(&mut m, "h_doubling_holds", dl.cota_h_holds.to_string());
    kv(&mut m, "an_delta2_holds", dl.holds.to_string());
    kv(&mut m, "an_delta2_c0", fmt_f64(dl.c0));
    out.table("summary.csv", m);
    out.check("h-power-bounds", hb.holds);
    out.check("an-power-bounds", ab.holds);
    out.check("h-doubling", dl.cota_h_holds);
    out.check("an-delta2", dl.holds);
    Ok(())
}

fn norm(cfg: &ExperimentConfig, base: &Path, tol: &Tolerances, out: &mut Outputs) -> Result<()> {
    let y = cfg.young(base)?;
    let d = cfg.domain()?;
    let spec = &cfg.norm;
    let mut s = summary();
    kv(&mut s, "function", y.describe());
    match spec.function {
        TestFunction::Indicator => {
            // cell-valued indicator of the cells centred in the box
            let vol = d.cell_volume();
            let vals: Vec<f64> = (0..d.n_cells())
                .map(|c| {
                    let x = d.cell_center(c);
                    let inside = (0..d.dim()).all(|k| x[k] >= spec.box_lo[k] && x[k] <= spec.box_hi[k]);
                    if inside { spec.amplitude.abs() } else { 0.0 }
                })
                .collect();
            let count = vals.iter().filter(|v| **v != 0.0).count();
            if count == 0 {
                return Err(OrliczError::Config("norm: the indicator box contains no cell".into()));
            }
            let mass = count as f64 * vol;
            let n = luxemburg_norm_weighted(&y, &vals, &vec![vol; vals.len()])?;
            let oracle = spec.amplitude.abs() / y.inverse(1.0 / mass)?;
            let rel = (n - oracle).abs() / oracle;
            kv(&mut s, "measure", fmt_f64(mass));
            kv(&mut s, "norm", fmt_f64(n));
            kv(&mut s, "indicator_formula", fmt_f64(oracle));
            kv(&mut s, "relative_error", fmt_f64(rel));
            out.check("indicator-formula", rel <= INDICATOR_REL);
        }
        f => {
            let u = match f {
                TestFunction::Sine => {
                    let (lo, hi) = (d.lo().to_vec(), d.hi().to_vec());
                    let two = d.dim() == 2;
                    GridFunction::from_fn(&d, move |x, yy| {
                        let a = (std::f64::consts::PI * (x - lo[0]) / (hi[0] - lo[0])).sin();
                        let b = if two { (std::f64::consts::PI * (yy - lo[1]) / (hi[1] - lo[1])).sin() } else { 1.0 };
                        a * b
                    })?
                    .with_zero_boundary()
                }
                _ => bump(&d, spec.center, spec.width, spec.exponent)?,
            }
            .scaled(spec.amplitude);
            let n = luxemburg_norm(&y, &u, None)?;
            let unit = modular(&y, &u.scaled(1.0 / n))?;
            let bounds = check_norm_modular_bounds(&y, &u, tol.suite_norm_rel)?;
            kv(&mut s, "norm", fmt_f64(n));
            kv(&mut s, "modular", fmt_f64(modular(&y, &u)?));
            kv(&mut s, "unit_modular", fmt_f64(unit));
            kv(&mut s, "gradient_norm", fmt_f64(gradient_norm(&y, &u)?));
            kv(&mut s, "norm_modular_bounds", bounds.to_string());
            out.check("unit-modular", (unit - 1.0).abs() <= tol.unit_modular);
            out.check("norm-modular-bounds", bounds);
        }
    }
    out.table("norm.csv", s);
    Ok(())
}

fn ccp(cfg: &ExperimentConfig, base: &Path, out: &mut Outputs) -> Result<()> {
    let y = cfg.young(base)?;
    let d = cfg.domain()?;
    let c = &cfg.ccp;
    let s = build_an(&y, 2)?;
    let mn = profile(s.an())?;
    let idx = y.growth_indices()?;
    let sd = crate::grid::Domain::new(2, d.lo(), d.hi(), &[c.sobolev_cells, c.sobolev_cells])?;
    let est = estimate_sobolev_constant(&y, &s, &sd, &TestFamily::standard(&sd))?;
    let spec = BubbleSpec {
        centers: c.centers.clone(),
        scales: BubbleSpec::dyadic_scales(c.k_max),
        exponent: c.exponent,
        normalization: c.normalization,
        bound: c.bound,
    };
    let members = make_bubbles(&y, &s, &d, &spec)?;
    let phi = bump(&d, c.phi_center, c.phi_width, c.phi_exponent)?;
    let ctx = CcpContext { y: &y, s: &s, mn: &mn, idx: &idx, s_est: est.value, safety: c.safety, delta_fraction: c.delta_fraction };
    let reports = analyze_sequence(&ctx, &members, &spec.scales, None, &phi)?;
    let mut seq = Table::new(&[
        "k", "scale", "total_nu", "total_mu", "atoms", "residual_mass", "rh_checked", "rh_holds", "rh_lhs", "rh_rhs",
        "relations_checked", "relations_hold",
    ]);
    let mut atoms = Table::new(&["k", "atom", "x", "y", "nu", "mu", "relation_holds", "relation_lhs", "relation_rhs"]);
    for (rep, u) in reports.iter().zip(&members) {
        let tail = rep.scale <= RH_TAIL_FRACTION * c.phi_width;
        let rel_ok = rep.relations.iter().all(|r| r.holds || r.excluded);
        seq.push(row![
            rep.k,
            rep.scale,
            rep.total_nu,
            rep.total_mu,
            rep.atoms.atoms.len(),
            rep.atoms.residual_mass,
            tail,
            rep.rh.holds,
            rep.rh.lhs,
            rep.rh.rhs,
            rep.k == c.k_max as usize,
            rel_ok,
        ]);
        for (i, (a, r)) in rep.atoms.atoms.iter().zip(&rep.relations).enumerate() {
            atoms.push(row![rep.k, i + 1, a.x[0], a.x[1], a.nu, a.mu, r.holds, r.lhs, r.rhs]);
        }
        if tail {
            out.check(&format!("rh-k{}", rep.k), rep.rh.holds);
        }
        if rep.k == c.k_max as usize {
            out.check(&format!("relation-k{}", rep.k), rel_ok);
        }
        let (nu, _) = crate::ccp::measure_pair(&y, &s, u)?;
        out.check(&format!("bookkeeping-k{}", rep.k), rep.atoms.bookkeeping_exact(&nu));
    }
    out.table("ccp.csv", seq);
    out.table("atoms.csv", atoms);
    let mut m = summary();
    kv(&mut m, "function", y.describe());
    kv(&mut m, "sobolev_constant_estimate", fmt_f64(est.value));
    kv(&mut m, "p_infinity_an", fmt_f64(mn.p_infinity()));
    kv(&mut m, "safety", fmt_f64(c.safety));
    out.table("summary.csv", m);
    Ok(())
}

fn mp_options(cfg: &ExperimentConfig, tol: &Tolerances) -> MpOptions {
    MpOptions {
        path_nodes: cfg.solve.path_nodes,
        max_iters: cfg.solve.max_iters,
        tol: tol.mp_residual,
        newton_switch: tol.mp_newton_switch,
        stall_rel: tol.mp_stall_rel,
        ..MpOptions::default()
    }
}

fn problem(cfg: &ExperimentConfig, y: YoungFunction, lambda: f64) -> Result<ProblemSpec> {
    let s = &cfg.solve;
    ProblemSpec::new(y, s.critical, s.r, s.gamma, lambda, cfg.domain()?)
}

fn solve(cfg: &ExperimentConfig, base: &Path, tol: &Tolerances, out: &mut Outputs) -> Result<()> {
    let p = problem(cfg, cfg.young(base)?, cfg.solve.lambda)?;
    let opts = mp_options(cfg, tol);
    let r = run_mountain_pass(&p, &opts)?;
    let mut trace = Table::new(&["iter", "energy", "residual"]);
    for e in &r.ps_trace {
        trace.push(row![e.iter, e.energy, e.residual]);
    }
    out.table("trace.csv", trace);
    let u = r.u_star();
    let mut sol = Table::new(&["x", "y", "u"]);
    for (k, v) in u.values().iter().enumerate() {
        let x = p.domain().node_coords(k);
        sol.push(row![x[0], x[1], *v]);
    }
    out.table("solution.csv", sol);
    let g = &r.geometry;
    let mut m = summary();
    kv(&mut m, "function", p.a().describe());
    kv(&mut m, "lambda", fmt_f64(p.lambda()));
    kv(&mut m, "c_level", fmt_f64(r.c_level));
    kv(&mut m, "path_level", fmt_f64(r.path_level));
    kv(&mut m, "final_residual", fmt_f64(r.final_residual));
    kv(&mut m, "converged", r.converged.to_string());
    kv(&mut m, "nontrivial", r.nontrivial.to_string());
    kv(&mut m, "u_star_norm", fmt_f64(r.u_star_norm));
    kv(&mut m, "rho", fmt_f64(g.rho));
    kv(&mut m, "alpha", fmt_f64(g.alpha));
    kv(&mut m, "u0_grad_norm", fmt_f64(g.u0_grad_norm));
    kv(&mut m, "u0_energy", fmt_f64(g.u0_energy));
    kv(&mut m, "geometry_certified", g.certified.to_string());
    kv(&mut m, "grad_norm_sup", fmt_f64(r.grad_norm_sup));
    kv(&mut m, "reparam_rises", r.reparam_rises.to_string());
    out.table("summary.csv", m);
    out.check("converged", r.converged);
    out.check("nontrivial", r.nontrivial);
    out.check("geometry", g.certified && g.alpha <= r.c_level + opts.tol);
    Ok(())
}

fn sweep(cfg: &ExperimentConfig, base: &Path, tol: &Tolerances, out: &mut Outputs) -> Result<()> {
    let lambdas = &cfg.solve.lambdas;
    let p = problem(cfg, cfg.young(base)?, lambdas[0])?;
    let rows = lambda_sweep(&p, lambdas, &mp_options(cfg, tol))?;
    let mut t = Table::new(&["lambda", "c_lambda", "nontrivial"]);
    for r in &rows {
        t.push(row![r.lambda, r.c_lambda, r.nontrivial]);
    }
    out.table("sweep.csv", t);
    for r in &rows {
        out.check(&format!("lambda-{}", fmt_f64(r.lambda)), r.error.is_none() && r.converged);
    }
    let c: Vec<f64> = rows.iter().filter_map(|r| r.c_lambda).collect();
    out.check("c-nonnegative", c.iter().all(|v| *v >= 0.0));
    out.check("c-nonincreasing", c.windows(2).all(|w| w[1] <= w[0]));
    Ok(())
}

fn verify(cfg: &ExperimentConfig, base: &Path, tol: &Tolerances, out: &mut Outputs) -> Result<()> {
    let fams = match cfg.verify.family {
        Family::Config => vec![cfg.young(base)?],
        Family::Builtin => builtin_family(),
    };
    let opts = SuiteOptions {
        n: cfg.dimension()?,
        seed: cfg.verify.seed,
        samples: cfg.verify.samples,
        sandwich_eps: cfg.verify.sandwich_eps,
        scaling_rel_tol: tol.suite_scaling_rel,
        young_rel_tol: tol.suite_young_rel,
        norm_rel_tol: tol.suite_norm_rel,
        convexity_tol: tol.suite_convexity,
        index_tol: tol.suite_index,
        ..SuiteOptions::default()
    };
    let mut t = Table::new(&["function", "check", "holds", "value"]);
    for y in &fams {
        for c in run_suite(y, &opts)? {
            t.push(row![c.function.clone(), c.check.clone(), c.holds, c.value]);
            out.check(&format!("{}:{}", c.function, c.check), c.holds);
        }
    }
    out.table("verify.csv", t);
    Ok(())
}
