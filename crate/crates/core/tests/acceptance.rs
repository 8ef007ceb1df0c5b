//! Acceptance criteria 1 to 9, one PASS/FAIL line each.

use std::f64::consts::PI;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use orlicz::ccp::{
    analyze_sequence, brezis_lieb_residual, brezis_lieb_scale, make_bubbles, measure_pair, BubbleSpec, CcpContext,
    MemberReport, Normalization,
};
use orlicz::config::Command;
use orlicz::grid::{
    bump, estimate_sobolev_constant, luxemburg_norm, luxemburg_norm_weighted, modular, Domain, GridFunction,
    TestFamily,
};
use orlicz::matuszewska::{check_sandwich, profile, MatuszewskaProfile};
use orlicz::mountain_pass::{
    functional_eval, functional_gradient, lambda_sweep, pairing, run_mountain_pass, MpOptions, ProblemSpec,
};
use orlicz::numerics::log_space;
use orlicz::runner::{run, RunRequest};
use orlicz::sobolev::{build_an, SobolevConjugate};
use orlicz::suite::{builtin_family, run_suite, SuiteOptions};
use orlicz::young::young_inequality_violations;
use orlicz::{GrowthIndices, YoungFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// criterion 1
const AN_REL: f64 = 1e-5;
const AN_BUDGET: Duration = Duration::from_secs(1);
// criterion 2
const CONJ_REL: f64 = 1e-6;
const YOUNG_PAIRS: usize = 10_000;
const YOUNG_REL: f64 = 1e-12;
// criterion 3
const SUITE_BUDGET: Duration = Duration::from_secs(30);
// criterion 4
const UNIT_MODULAR: f64 = 1e-8;
const INDICATOR_REL: f64 = 1e-10;
// criterion 5
const P_INF_POWER: f64 = 1e-6;
const P_INF_LOG: f64 = 0.05;
const SANDWICH_EPS: f64 = 0.2;
const INDEX_SLACK: f64 = 1e-6;
// criterion 6
const CCP_CELLS: usize = 256;
const BL_CELLS: usize = 512;
const BL_RATIO: f64 = 1e-3;
const SAFETY: f64 = 0.9;
const DELTA_FRACTION: f64 = 0.25;
const PHI_WIDTH: f64 = 0.25;
const SOBOLEV_CELLS: usize = 64;
const CCP_BUDGET: Duration = Duration::from_secs(120);
// criteria 7, 8
const MP_CELLS: usize = 64;
const MP_TOL: f64 = 1e-6;
const FD_REL: f64 = 1e-4;
const FD_STEP: f64 = 1e-5;
const FD_PROBES: usize = 20;
const MP_BUDGET: Duration = Duration::from_secs(300);
const SWEEP_RATIO: f64 = 0.1;

type Outcome = (bool, String);

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn criterion_1() -> Outcome {
    let t0 = Instant::now();
    let y = YoungFunction::power(2.0).unwrap();
    let s = build_an(&y, 4).unwrap();
    let worst = log_space(0.1, 100.0, 301)
        .into_iter()
        .map(|t| rel(s.an_eval(t).unwrap(), 8.0 / 27.0 * t.powi(4)))
        .fold(0.0, f64::max);
    let dt = t0.elapsed();
    (worst < AN_REL && dt < AN_BUDGET, format!("max rel err {worst:.2e} (< {AN_REL:e}), {:.3} s", dt.as_secs_f64()))
}

fn criterion_2() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for p in [1.5, 2.0, 4.0] {
        let y = YoungFunction::power_coef(p, 1.0 / p).unwrap();
        let c = y.conjugate().unwrap();
        let q = p / (p - 1.0);
        let worst = log_space(0.01, 100.0, 401)
            .into_iter()
            .map(|s| rel(c.eval(s).unwrap(), s.powf(q) / q))
            .fold(0.0, f64::max);
        let pairs: Vec<(f64, f64)> = (0..YOUNG_PAIRS)
            .map(|_| (10f64.powf(rng.gen_range(-3.0..3.0)), 10f64.powf(rng.gen_range(-3.0..3.0))))
            .collect();
        let bad = young_inequality_violations(&y, &c, &pairs, YOUNG_REL).unwrap();
        ok &= worst < CONJ_REL && bad == 0;
        parts.push(format!("p={p}: rel {worst:.1e}, {bad} violations"));
    }
    (ok, parts.join("; "))
}

fn criterion_3() -> Outcome {
    let t0 = Instant::now();
    let opts = SuiteOptions { n: 4, ..SuiteOptions::default() };
    let mut total = 0;
    let mut failed = Vec::new();
    for y in builtin_family() {
        for c in run_suite(&y, &opts).unwrap() {
            total += 1;
            if !c.holds {
                failed.push(format!("{}:{}", c.function, c.check));
            }
        }
    }
    let dt = t0.elapsed();
    (
        failed.is_empty() && dt < SUITE_BUDGET,
        format!("{}/{total} checks true, {:.1} s {}", total - failed.len(), dt.as_secs_f64(), failed.join(" ")),
    )
}

fn criterion_4() -> Outcome {
    let d = Domain::unit_square(32).unwrap();
    let fam = builtin_family();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let y = &fam[i % fam.len()];
        let amp = 10f64.powf(rng.gen_range(-2.0..2.0));
        let vals = (0..d.n_nodes()).map(|_| amp * rng.gen_range(-1.0..1.0)).collect();
        let u = GridFunction::new(d.clone(), vals).unwrap();
        let n = luxemburg_norm(y, &u, None).unwrap();
        worst = worst.max((modular(y, &u.scaled(1.0 / n)).unwrap() - 1.0).abs());
    }
    // ‖k·1_E‖ = k / A⁻¹(1/|E|)
    let mut worst_ind: f64 = 0.0;
    for y in &fam {
        for (k, e) in [(1.0, 0.25), (3.0, 0.01), (0.2, 0.7)] {
            let n = luxemburg_norm_weighted(y, &[k, 0.0], &[e, 1.0 - e]).unwrap();
            worst_ind = worst_ind.max(rel(n, k / y.inverse(1.0 / e).unwrap()));
        }
    }
    (
        worst <= UNIT_MODULAR && worst_ind <= INDICATOR_REL,
        format!("max |Φ(u/‖u‖) − 1| = {worst:.1e}, indicator rel err {worst_ind:.1e}"),
    )
}

fn criterion_5() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for y in builtin_family() {
        let prof = profile(&y).unwrap();
        let idx = y.growth_indices().unwrap();
        let pi = prof.p_infinity();
        let (sandwich, _) = check_sandwich(&prof, SANDWICH_EPS);
        let window = idx.p_minus - INDEX_SLACK <= pi && pi <= idx.p_plus + INDEX_SLACK;
        ok &= sandwich && window;
        parts.push(format!("{} p∞={pi:.6}", y.describe()));
    }
    for p in [1.5, 2.0, 2.5, 4.0] {
        let pi = profile(&YoungFunction::power(p).unwrap()).unwrap().p_infinity();
        ok &= (pi - p).abs() <= P_INF_POWER;
    }
    let pl = profile(&YoungFunction::power_log(2.0, 1.0).unwrap()).unwrap().p_infinity();
    ok &= (pl - 2.0).abs() <= P_INF_LOG;
    (ok, parts.join(", "))
}

struct CcpSetup {
    y: YoungFunction,
    s: SobolevConjugate,
    mn: MatuszewskaProfile,
    idx: GrowthIndices,
    s_est: f64,
}

struct CorpusCase {
    name: &'static str,
    center: [f64; 2],
    normalization: Normalization,
    with_limit: bool,
    /// First dyadic level; off-centre bubbles must fit in the square.
    k_min: u32,
}

fn corpus() -> Vec<CorpusCase> {
    vec![
        CorpusCase { name: "centred", center: [0.5, 0.5], normalization: Normalization::GradientBounded, with_limit: false, k_min: 1 },
        CorpusCase { name: "unit-mass", center: [0.5, 0.5], normalization: Normalization::AnMassOne, with_limit: false, k_min: 1 },
        CorpusCase {
            name: "off-centre",
            center: [0.375, 0.625],
            normalization: Normalization::GradientBounded,
            with_limit: false,
            k_min: 2,
        },
        CorpusCase { name: "on-sine", center: [0.5, 0.5], normalization: Normalization::GradientBounded, with_limit: true, k_min: 1 },
    ]
}

fn run_case(st: &CcpSetup, d: &Domain, case: &CorpusCase) -> (Vec<MemberReport>, bool) {
    let scales = BubbleSpec::dyadic_scales(6).split_off(case.k_min as usize - 1);
    let spec = BubbleSpec::single(case.center, scales, case.normalization);
    let bubbles = make_bubbles(&st.y, &st.s, d, &spec).unwrap();
    let sine = GridFunction::from_fn(d, |x, z| (PI * x).sin() * (PI * z).sin()).unwrap();
    let members: Vec<GridFunction> =
        if case.with_limit { bubbles.iter().map(|b| sine.combine(1.0, b, 1.0)).collect() } else { bubbles };
    let phi = bump(d, case.center, PHI_WIDTH, 2.0).unwrap();
    let ctx = CcpContext {
        y: &st.y,
        s: &st.s,
        mn: &st.mn,
        idx: &st.idx,
        s_est: st.s_est,
        safety: SAFETY,
        delta_fraction: DELTA_FRACTION,
    };
    let limit = case.with_limit.then_some(&sine);
    let reports = analyze_sequence(&ctx, &members, &spec.scales, limit, &phi).unwrap();
    let bookkeeping = members.iter().zip(&reports).all(|(u, rep)| {
        let v = match limit {
            Some(l) => u.combine(1.0, l, -1.0),
            None => u.clone(),
        };
        let (nu, _) = measure_pair(&st.y, &st.s, &v).unwrap();
        rep.atoms.bookkeeping_exact(&nu)
    });
    (reports, bookkeeping)
}

fn criterion_6() -> Outcome {
    let t0 = Instant::now();
    let y = YoungFunction::power(1.5).unwrap();
    let s = build_an(&y, 2).unwrap();
    let mn = profile(s.an()).unwrap();
    let idx = y.growth_indices().unwrap();
    let sd = Domain::unit_square(SOBOLEV_CELLS).unwrap();
    let s_est = estimate_sobolev_constant(&y, &s, &sd, &TestFamily::standard(&sd)).unwrap().value;
    let st = CcpSetup { y, s, mn, idx, s_est };
    let d = Domain::unit_square(CCP_CELLS).unwrap();
    let h = 1.0 / CCP_CELLS as f64;

    let mut ok = true;
    let mut notes = Vec::new();
    for case in corpus() {
        let (reports, bookkeeping) = run_case(&st, &d, &case);
        let last = reports.last().unwrap();
        let rh_tail = reports.iter().filter(|r| r.scale <= PHI_WIDTH / 4.0).all(|r| r.rh.holds);
        let relation = !last.relations.is_empty() && last.relations.iter().all(|r| r.holds);
        let mut good = bookkeeping && rh_tail && relation;
        if case.name == "centred" {
            let one = last.atoms.atoms.len() == 1;
            let near = one && last.atoms.atoms[0].x.iter().zip(case.center).all(|(a, c)| (a - c).abs() <= h);
            good &= one && near;
            notes.push(format!("atoms {} at {:?}", last.atoms.atoms.len(), last.atoms.atoms.first().map(|a| a.x)));
        }
        let rel = last.relations.first().map_or((f64::NAN, f64::NAN), |r| (r.lhs, r.rhs));
        notes.push(format!(
            "{}: bookkeeping {bookkeeping}, RH tail {rh_tail}, relation {relation} ({:.3} ≤ {:.3})",
            case.name, rel.0, rel.1
        ));
        ok &= good;
    }

    // Brezis-Lieb: f_k = f + bubble, φ ≡ 1
    let mut bl = Vec::new();
    for cells in [CCP_CELLS, BL_CELLS] {
        let d = Domain::unit_square(cells).unwrap();
        let spec = BubbleSpec::single([0.5, 0.5], vec![1.0 / 64.0], Normalization::GradientBounded);
        let b = make_bubbles(&st.y, &st.s, &d, &spec).unwrap();
        let f = GridFunction::from_fn(&d, |x, z| (PI * x).sin() * (PI * z).sin()).unwrap();
        let one = GridFunction::from_fn(&d, |_, _| 1.0).unwrap();
        let fk = f.combine(1.0, &b[0], 1.0);
        let r = brezis_lieb_residual(&st.y, &[fk], &f, &one).unwrap()[0];
        bl.push(r / brezis_lieb_scale(&st.y, &f, &one).unwrap());
    }
    ok &= bl[1] < BL_RATIO;
    let dt = t0.elapsed();
    ok &= dt < CCP_BUDGET;
    notes.push(format!(
        "S_est {:.4}, BL ratio {:.3e} on {BL_CELLS}² ({:.3e} on {CCP_CELLS}²), {:.1} s",
        st.s_est,
        bl[1],
        bl[0],
        dt.as_secs_f64()
    ));
    (ok, notes.join("; "))
}

fn desk(lambda: f64) -> ProblemSpec {
    let d = Domain::unit_square(MP_CELLS).unwrap();
    ProblemSpec::new(YoungFunction::power(1.5).unwrap(), true, 3.0, 3.0, lambda, d).unwrap()
}

fn mp_opts() -> MpOptions {
    MpOptions { tol: MP_TOL, ..MpOptions::default() }
}

fn criterion_7() -> Outcome {
    let t0 = Instant::now();
    let p = desk(10.0);
    let r = run_mountain_pass(&p, &mp_opts()).unwrap();
    let dt = t0.elapsed();

    let d = p.domain().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut interior = |amp: f64| {
        let vals = (0..d.n_nodes()).map(|k| if d.is_boundary(k) { 0.0 } else { amp * rng.gen_range(-1.0..1.0) }).collect();
        GridFunction::new(d.clone(), vals).unwrap()
    };
    let mut worst: f64 = 0.0;
    for i in 0..FD_PROBES {
        let u = interior(0.5 + 0.05 * i as f64);
        let v = interior(1.0);
        let g = pairing(&functional_gradient(&p, &u).unwrap(), &v);
        let fp = functional_eval(&p, &u.combine(1.0, &v, FD_STEP)).unwrap();
        let fm = functional_eval(&p, &u.combine(1.0, &v, -FD_STEP)).unwrap();
        worst = worst.max(rel(g, (fp - fm) / (2.0 * FD_STEP)));
    }
    let g = &r.geometry;
    let ok = r.converged
        && r.final_residual < MP_TOL
        && r.nontrivial
        && g.certified
        && g.alpha <= r.c_level + MP_TOL
        && worst < FD_REL
        && dt < MP_BUDGET;
    (
        ok,
        format!(
            "c = {:.6}, residual {:.1e}, ‖u*‖ = {:.4}, ρ = {}, α = {:.4}, F(u0) = {:.3}, FD rel {worst:.1e}, {:.1} s",
            r.c_level,
            r.final_residual,
            r.u_star_norm,
            g.rho,
            g.alpha,
            g.u0_energy,
            dt.as_secs_f64()
        ),
    )
}

fn criterion_8() -> Outcome {
    let rows = lambda_sweep(&desk(1.0), &[1.0, 10.0, 100.0], &mp_opts()).unwrap();
    let c: Vec<f64> = rows.iter().filter_map(|r| r.c_lambda).collect();
    let ok = c.len() == 3
        && rows.iter().all(|r| r.converged && r.nontrivial)
        && c[0] > c[1]
        && c[1] > c[2]
        && c[2] < SWEEP_RATIO * c[0]
        && c.iter().all(|v| *v >= 0.0);
    (ok, format!("c = {c:.6?}, c₁₀₀/c₁ = {:.4}", c.last().unwrap_or(&f64::NAN) / c.first().unwrap_or(&f64::NAN)))
}

fn criterion_9() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let configs: [(&str, Command, &str); 8] = [
        ("inspect", Command::Inspect, "[young]\nkind = \"power-log\"\np = 2.0\nq = 1.0\n"),
        ("conjugate", Command::Conjugate, "[young]\nkind = \"power\"\np = 1.5\n"),
        ("sobolev", Command::Sobolev, "n = 4\n[young]\nkind = \"power\"\np = 2.0\n"),
        ("norm", Command::Norm, "[young]\nkind = \"power\"\np = 1.5\n[domain]\ncells = [32, 32]\n[norm]\nfunction = \"bump\"\n"),
        ("verify", Command::Verify, "n = 4\n[verify]\nfamily = \"builtin\"\n"),
        ("ccp", Command::Ccp, "[young]\nkind = \"power\"\np = 1.5\n[domain]\ncells = [256, 256]\n[ccp]\nsobolev-cells = 32\n"),
        ("solve", Command::Solve, "[young]\nkind = \"power\"\np = 1.5\n[domain]\ncells = [24, 24]\n"),
        ("sweep", Command::Sweep, "[young]\nkind = \"power\"\np = 1.5\n[domain]\ncells = [16, 16]\n"),
    ];
    let mut same = 0;
    let mut files = 0;
    let mut bad = Vec::new();
    for (name, cmd, text) in configs {
        let cfg = dir.path().join(format!("{name}.toml"));
        fs::write(&cfg, text).unwrap();
        let outs: Vec<_> = ["a", "b"]
            .iter()
            .map(|tag| {
                let out = dir.path().join(format!("{name}-{tag}"));
                let r = run(&RunRequest { command: cmd, config: cfg.clone(), out_dir: Some(out.clone()), tol_scale: 1.0 });
                (r, out)
            })
            .collect();
        let m = outs[0].0.manifest.as_ref().unwrap();
        if outs[0].0.exit_code != 0 {
            bad.push(format!("{name} exit {}", outs[0].0.exit_code));
        }
        for o in &m.outputs {
            files += 1;
            let read = |p: &Path| fs::read(p.join(&o.file)).unwrap();
            if read(&outs[0].1) == read(&outs[1].1) {
                same += 1;
            } else {
                bad.push(format!("{name}/{}", o.file));
            }
        }
    }
    (bad.is_empty() && files > 0, format!("{same}/{files} CSVs byte-identical across reruns {}", bad.join(" ")))
}

fn main() -> ExitCode {
    let criteria: [(usize, fn() -> Outcome); 9] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
    ];
    let mut failures = 0;
    for (n, f) in criteria {
        let (ok, detail) = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            (false, format!("panicked: {}", msg.unwrap_or_default()))
        });
        println!("criterion {n}: {} ({detail})", if ok { "PASS" } else { "FAIL" });
        failures += usize::from(!ok);
    }
    println!("{} of 9 criteria pass", 9 - failures);
    if failures == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
