//! Inequality suite over a Young function and its Sobolev conjugate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grid::{check_norm_modular_bounds, Domain, GridFunction};
use crate::matuszewska::{check_m_young, check_sandwich, profile};
use crate::numerics::log_space;
use crate::sobolev::{build_an, check_an_delta2, check_an_power_bounds, check_h_bounds};
use crate::young::{
    check_delta2_refined, midpoint_convexity_defect, verify_scaling_inequality, verify_sum_inequality,
    young_inequality_violations, YoungFunction,
};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteOptions {
    pub n: usize,
    pub seed: u64,
    pub samples: usize,
    pub eta: f64,
    pub delta: f64,
    pub sandwich_eps: f64,
    pub scaling_rel_tol: f64,
    pub young_rel_tol: f64,
    pub norm_rel_tol: f64,
    pub convexity_tol: f64,
    pub index_tol: f64,
    pub grid_cells: usize,
    pub bound_range: (f64, f64),
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            n: 4,
            seed: 20240611,
            samples: 1000,
            eta: 0.5,
            delta: 1.0,
            sandwich_eps: 0.2,
            scaling_rel_tol: 1e-9,
            young_rel_tol: 1e-12,
            norm_rel_tol: 1e-8,
            convexity_tol: 1e-12,
            index_tol: 1e-6,
            grid_cells: 32,
            bound_range: (1.5, 1e4),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteCheck {
    pub function: String,
    pub check: String,
    pub holds: bool,
    /// Observed constant or defect; NaN when the check is pass/fail only.
    pub value: f64,
}

/// {t^p, t^p log(1+t)} for p ∈ {1.5, 2, 2.5}.
pub fn builtin_family() -> Vec<YoungFunction> {
    let mut out = Vec::new();
    for p in [1.5, 2.0, 2.5] {
        out.push(YoungFunction::power(p).expect("valid power"));
        out.push(YoungFunction::power_log(p, 1.0).expect("valid power-log"));
    }
    out
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    10f64.powf(rng.gen_range(lo..hi))
}

/// Runs every check on `y`; a check that errors counts as failed.
pub fn run_suite(y: &YoungFunction, opts: &SuiteOptions) -> Result<Vec<SuiteCheck>> {
    let name = y.describe();
    let mut out = Vec::new();
    let mut push = |check: &str, r: Result<(bool, f64)>| {
        let (holds, value) = r.unwrap_or((false, f64::NAN));
        out.push(SuiteCheck { function: name.clone(), check: check.into(), holds, value });
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let idx = y.growth_indices()?;
    let pairs: Vec<(f64, f64)> =
        (0..opts.samples).map(|_| (log_uniform(&mut rng, -3.0, 3.0), log_uniform(&mut rng, -3.0, 3.0))).collect();

    let grid = log_space(1e-3, 1e3, 601);
    push("convexity", midpoint_convexity_defect(y, &grid).map(|d| (d <= opts.convexity_tol, d)));
    push("sum-inequality", verify_sum_inequality(y, opts.eta, &pairs));
    let scale: Vec<(f64, f64)> = pairs.iter().map(|&(s, t)| (s.sqrt(), t)).collect();
    push("scaling-sandwich", verify_scaling_inequality(y, &idx, &scale, opts.scaling_rel_tol).map(|b| (b, f64::NAN)));
    push("delta2-refined", check_delta2_refined(y, opts.delta));
    push(
        "young-inequality",
        y.conjugate()
            .and_then(|c| young_inequality_violations(y, &c, &pairs, opts.young_rel_tol))
            .map(|v| (v == 0, v as f64)),
    );

    let d = Domain::unit_square(opts.grid_cells)?;
    let norm_ok = (|| -> Result<(bool, f64)> {
        for _ in 0..10 {
            let amp = log_uniform(&mut rng, -2.0, 2.0);
            let vals = (0..d.n_nodes()).map(|_| amp * rng.gen_range(-1.0..1.0)).collect();
            let u = GridFunction::new(d.clone(), vals)?;
            if !check_norm_modular_bounds(y, &u, opts.norm_rel_tol)? {
                return Ok((false, f64::NAN));
            }
        }
        Ok((true, f64::NAN))
    })();
    push("norm-modular", norm_ok);

    match build_an(y, opts.n) {
        Ok(s) => {
            push("h-power-bounds", check_h_bounds(&s, opts.bound_range).map(|b| (b.holds, b.c2)));
            push("an-power-bounds", check_an_power_bounds(&s, opts.bound_range).map(|b| (b.holds, b.c2)));
            let dl = check_an_delta2(&s);
            push("h-doubling", dl.clone().map(|d| (d.cota_h_holds, d.delta0)));
            push("an-delta2", dl.map(|d| (d.holds, d.c0)));
        }
        Err(e) => {
            for c in ["h-power-bounds", "an-power-bounds", "h-doubling", "an-delta2"] {
                push(c, Err(e.clone()));
            }
        }
    }

    match profile(y) {
        Ok(p) => {
            let (ok, t0) = check_sandwich(&p, opts.sandwich_eps);
            push("matuszewska-sandwich", Ok((ok, t0)));
            let pi = p.p_infinity();
            let tol = opts.index_tol;
            push("matuszewska-index-window", Ok((idx.p_minus - tol <= pi && pi <= idx.p_plus + tol, pi)));
            push("matuszewska-young", check_m_young(&p, &idx).map(|b| (b, f64::NAN)));
        }
        Err(e) => {
            for c in ["matuszewska-sandwich", "matuszewska-index-window", "matuszewska-young"] {
                push(c, Err(e.clone()));
            }
        }
    }
    Ok(out)
}
