//! Experiment configuration (TOML).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ccp::Normalization;
use crate::error::{OrliczError, Result};
use crate::grid::Domain;
use crate::young::{Interp, YoungFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Inspect,
    Conjugate,
    Sobolev,
    Norm,
    Ccp,
    Solve,
    Sweep,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Inspect => "inspect",
            Command::Conjugate => "conjugate",
            Command::Sobolev => "sobolev",
            Command::Norm => "norm",
            Command::Ccp => "ccp",
            Command::Solve => "solve",
            Command::Sweep => "sweep",
            Command::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct YoungSpec {
    pub kind: YoungKind,
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub coef: Option<f64>,
    pub p_lo: Option<f64>,
    pub p_hi: Option<f64>,
    pub file: Option<PathBuf>,
    pub interp: Option<Interp>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum YoungKind {
    Power,
    PowerLog,
    PiecewisePower,
    Table,
}

impl YoungSpec {
    fn need(v: Option<f64>, key: &str) -> Result<f64> {
        v.ok_or_else(|| OrliczError::Config(format!("young.{key} is required for this kind")))
    }

    /// Builds the function; table paths are relative to `base`.
    pub fn build(&self, base: &Path) -> Result<YoungFunction> {
        let coef = self.coef.unwrap_or(1.0);
        match self.kind {
            YoungKind::Power => YoungFunction::power_coef(Self::need(self.p, "p")?, coef),
            YoungKind::PowerLog => {
                YoungFunction::power_log_coef(Self::need(self.p, "p")?, Self::need(self.q, "q")?, coef)
            }
            YoungKind::PiecewisePower => {
                YoungFunction::piecewise_power(Self::need(self.p_lo, "p-lo")?, Self::need(self.p_hi, "p-hi")?)
            }
            YoungKind::Table => {
                let f = self.file.as_ref().ok_or_else(|| OrliczError::Config("young.file is required for tables".into()))?;
                let path = base.join(f);
                if !path.is_file() {
                    return Err(OrliczError::Config(format!("young.file {} does not exist", path.display())));
                }
                YoungFunction::from_csv(&path, self.interp.unwrap_or(Interp::Linear))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct DomainSpec {
    pub cells: Vec<usize>,
    pub lo: Option<Vec<f64>>,
    pub hi: Option<Vec<f64>>,
}

impl DomainSpec {
    pub fn build(&self) -> Result<Domain> {
        let dim = self.cells.len();
        let lo = self.lo.clone().unwrap_or_else(|| vec![0.0; dim]);
        let hi = self.hi.clone().unwrap_or_else(|| vec![1.0; dim]);
        Domain::new(dim, &lo, &hi, &self.cells)
    }
}

/// Every tolerance a run may consume; `--tol-scale` multiplies them all.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
pub struct Tolerances {
    pub mp_residual: f64,
    pub mp_newton_switch: f64,
    pub mp_stall_rel: f64,
    pub suite_scaling_rel: f64,
    pub suite_young_rel: f64,
    pub suite_norm_rel: f64,
    pub suite_convexity: f64,
    pub suite_index: f64,
    pub unit_modular: f64,
    pub young_rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            mp_residual: 1e-6,
            mp_newton_switch: 1e-2,
            mp_stall_rel: 1e-5,
            suite_scaling_rel: 1e-9,
            suite_young_rel: 1e-12,
            suite_norm_rel: 1e-8,
            suite_convexity: 1e-12,
            suite_index: 1e-6,
            unit_modular: crate::grid::UNIT_MODULAR_TOL,
            young_rel: 1e-12,
        }
    }
}

impl Tolerances {
    pub fn scaled(&self, k: f64) -> Tolerances {
        Tolerances {
            mp_residual: self.mp_residual * k,
            mp_newton_switch: self.mp_newton_switch * k,
            mp_stall_rel: self.mp_stall_rel * k,
            suite_scaling_rel: self.suite_scaling_rel * k,
            suite_young_rel: self.suite_young_rel * k,
            suite_norm_rel: self.suite_norm_rel * k,
            suite_convexity: self.suite_convexity * k,
            suite_index: self.suite_index * k,
            unit_modular: self.unit_modular * k,
            young_rel: self.young_rel * k,
        }
    }

    fn validate(&self) -> Result<()> {
        let all = [
            ("mp-residual", self.mp_residual),
            ("mp-newton-switch", self.mp_newton_switch),
            ("mp-stall-rel", self.mp_stall_rel),
            ("suite-scaling-rel", self.suite_scaling_rel),
            ("suite-young-rel", self.suite_young_rel),
            ("suite-norm-rel", self.suite_norm_rel),
            ("suite-convexity", self.suite_convexity),
            ("suite-index", self.suite_index),
            ("unit-modular", self.unit_modular),
            ("young-rel", self.young_rel),
        ];
        for (k, v) in all {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(OrliczError::Config(format!("tolerances.{k} = {v} must be finite and ≥ 0")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
pub struct RangeSpec {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl Default for RangeSpec {
    fn default() -> Self {
        RangeSpec { lo: 1e-3, hi: 1e3, points: 61 }
    }
}

impl RangeSpec {
    fn validate(&self, key: &str) -> Result<()> {
        if !(self.lo > 0.0) || !(self.hi > self.lo) || !self.hi.is_finite() {
            return Err(OrliczError::Config(format!("{key}: need 0 < lo < hi < ∞")));
        }
        if !(2..=1_000_000).contains(&self.points) {
            return Err(OrliczError::Config(format!("{key}.points must lie in [2, 10⁶]")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
pub struct ConjugateSpec {
    pub range: RangeSpec,
    pub young_pairs: usize,
    pub seed: u64,
}

impl Default for ConjugateSpec {
    fn default() -> Self {
        ConjugateSpec { range: RangeSpec::default(), young_pairs: 10_000, seed: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestFunction {
    Sine,
    Bump,
    Indicator,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
pub struct NormSpec {
    pub function: TestFunction,
    pub amplitude: f64,
    pub center: [f64; 2],
    pub width: f64,
    pub exponent: f64,
    /// Indicator box, per axis.
    pub box_lo: [f64; 2],
    pub box_hi: [f64; 2],
}

impl Default for NormSpec {
    fn default() -> Self {
        NormSpec {
            function: TestFunction::Sine,
            amplitude: 1.0,
            center: [0.5, 0.5],
            width: 0.25,
            exponent: 2.0,
            box_lo: [0.25, 0.25],
            box_hi: [0.75, 0.75],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
pub struct CcpSpec {
    pub centers: Vec<[f64; 2]>,
    pub k_max: u32,
    pub normalization: Normalization,
    pub exponent: f64,
    pub bound: f64,
    pub phi_center: [f64; 2],
    pub phi_width: f64,
    pub phi_exponent: f64,
    pub safety: f64,
    pub delta_fraction: f64,
    /// Grid for the Sobolev-constant estimate.
    pub sobolev_cells: usize,
}

impl Default for CcpSpec {
    fn default() -> Self {
        CcpSpec {
            centers: vec![[0.5, 0.5]],
            k_max: 6,
            normalization: Normalization::GradientBounded,
            exponent: 3.0,
            bound: 1.0,
            phi_center: [0.5, 0.5],
            phi_width: 0.25,
            phi_exponent: 2.0,
            safety: 0.9,
            delta_fraction: 0.25,
            sobolev_cells: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
pub struct SolveSpec {
    pub r: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub lambdas: Vec<f64>,
    pub critical: bool,
    pub path_nodes: usize,
    pub max_iters: usize,
}

impl Default for SolveSpec {
    fn default() -> Self {
        SolveSpec {
            r: 3.0,
            gamma: 3.0,
            lambda: 10.0,
            lambdas: vec![1.0, 10.0, 100.0],
            critical: true,
            path_nodes: 24,
            max_iters: 3000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// The configured `[young]` block.
    Config,
    /// {t^p, t^p log(1+t)}, p ∈ {1.5, 2, 2.5}.
    Builtin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
pub struct VerifySpec {
    pub family: Family,
    pub seed: u64,
    pub samples: usize,
    pub sandwich_eps: f64,
}

impl Default for VerifySpec {
    fn default() -> Self {
        VerifySpec { family: Family::Config, seed: 20240611, samples: 1000, sandwich_eps: 0.2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Option<Command>,
    pub output_dir: Option<PathBuf>,
    /// Space dimension n for the Sobolev conjugate (defaults to the domain's).
    pub n: Option<usize>,
    pub young: Option<YoungSpec>,
    pub domain: Option<DomainSpec>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub inspect: RangeSpec,
    #[serde(default)]
    pub conjugate: ConjugateSpec,
    #[serde(default)]
    pub sobolev: RangeSpec,
    #[serde(default)]
    pub norm: NormSpec,
    #[serde(default)]
    pub ccp: CcpSpec,
    #[serde(default)]
    pub solve: SolveSpec,
    #[serde(default)]
    pub verify: VerifySpec,
}

impl ExperimentConfig {
    /// Parses TOML; syntax errors carry line and column, unknown keys are
    /// named.
    pub fn parse(text: &str) -> Result<ExperimentConfig> {
        toml::from_str(text).map_err(|e| OrliczError::Config(e.to_string().trim_end().to_string()))
    }

    pub fn young(&self, base: &Path) -> Result<YoungFunction> {
        self.young
            .as_ref()
            .ok_or_else(|| OrliczError::Config("missing [young] block".into()))?
            .build(base)
    }

    pub fn domain(&self) -> Result<Domain> {
        self.domain.as_ref().ok_or_else(|| OrliczError::Config("missing [domain] block".into()))?.build()
    }

    /// n from the config, else the domain dimension.
    pub fn dimension(&self) -> Result<usize> {
        match (self.n, &self.domain) {
            (Some(n), _) if (1..=64).contains(&n) => Ok(n),
            (Some(n), _) => Err(OrliczError::Config(format!("n = {n} must lie in [1, 64]"))),
            (None, Some(d)) => Ok(d.cells.len()),
            (None, None) => Err(OrliczError::Config("set n or a [domain] block".into())),
        }
    }

    /// Checks the blocks `cmd` consumes.
    pub fn validate(&self, cmd: Command, base: &Path) -> Result<()> {
        if let Some(c) = self.command {
            if c != cmd {
                return Err(OrliczError::Config(format!(
                    "config is for `{}` but `{}` was requested",
                    c.name(),
                    cmd.name()
                )));
            }
        }
        self.tolerances.validate()?;
        let needs_young = !(cmd == Command::Verify && self.verify.family == Family::Builtin);
        if needs_young {
            self.young(base)?;
        }
        match cmd {
            Command::Inspect => self.inspect.validate("inspect")?,
            Command::Conjugate => {
                self.conjugate.range.validate("conjugate.range")?;
                if self.conjugate.young_pairs > 10_000_000 {
                    return Err(OrliczError::Config("conjugate.young-pairs must be ≤ 10⁷".into()));
                }
            }
            Command::Sobolev => {
                self.sobolev.validate("sobolev")?;
                self.dimension()?;
            }
            Command::Norm => {
                self.domain()?;
                let s = &self.norm;
                if !(s.width > 0.0) || !(s.exponent > 0.0) || !s.amplitude.is_finite() || s.amplitude == 0.0 {
                    return Err(OrliczError::Config("norm: need width > 0, exponent > 0, finite nonzero amplitude".into()));
                }
            }
            Command::Ccp => {
                let d = self.domain()?;
                if d.dim() != 2 {
                    return Err(OrliczError::Config("ccp runs on two-dimensional domains".into()));
                }
                let c = &self.ccp;
                if c.centers.is_empty() || !(1..=12).contains(&c.k_max) {
                    return Err(OrliczError::Config("ccp: need centers and 1 ≤ k-max ≤ 12".into()));
                }
                if !(c.sobolev_cells >= 8 && c.sobolev_cells <= 1024) {
                    return Err(OrliczError::Config("ccp.sobolev-cells must lie in [8, 1024]".into()));
                }
                if !(c.phi_width > 0.0) || !(c.phi_exponent > 0.0) || !(c.exponent > 0.0) || !(c.bound > 0.0) {
                    return Err(OrliczError::Config("ccp: widths, exponents and bound must be positive".into()));
                }
            }
            Command::Solve | Command::Sweep => {
                self.domain()?;
                let s = &self.solve;
                if !(3..=1000).contains(&s.path_nodes) || !(1..=1_000_000).contains(&s.max_iters) {
                    return Err(OrliczError::Config("solve: path-nodes in [3, 1000], max-iters in [1, 10⁶]".into()));
                }
                if cmd == Command::Sweep
                    && (s.lambdas.is_empty() || s.lambdas.windows(2).any(|w| !(w[1] > w[0])))
                {
                    return Err(OrliczError::Config("solve.lambdas must be nonempty and increasing".into()));
                }
            }
            Command::Verify => {
                self.dimension()?;
                if self.verify.samples == 0 || self.verify.samples > 1_000_000 {
                    return Err(OrliczError::Config("verify.samples must lie in [1, 10⁶]".into()));
                }
            }
        }
        Ok(())
    }
}
