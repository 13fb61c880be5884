//! Experiment configuration: system definitions (graphon, input channels,
//! state profiles, grids), solver settings, and the built-in presets
//! `example1`, `example2-l1`, `example2-mcp`, `example3`.

use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use serde::Deserialize;

use crate::dynamics::DiscretizedSystem;
use crate::error::{Error, Result};
use crate::graphon::GraphonSpec;
use crate::linalg::grid_midpoints;
use crate::penalty::PenaltySpec;
use crate::solvers::SolveOptions;

/// One additive piece of an input profile, supported on `[lo, hi)`
/// (`hi = 1` is treated as closed).
#[derive(Debug, Clone, PartialEq)]
pub enum Segment {
    Indicator { lo: f64, hi: f64 },
    Affine { lo: f64, hi: f64, slope: f64, intercept: f64 },
}

impl Segment {
    fn bounds(&self) -> (f64, f64) {
        match self {
            Segment::Indicator { lo, hi } => (*lo, *hi),
            Segment::Affine { lo, hi, .. } => (*lo, *hi),
        }
    }

    fn contains(&self, alpha: f64) -> bool {
        let (lo, hi) = self.bounds();
        alpha >= lo && (alpha < hi || (hi >= 1.0 && alpha <= 1.0))
    }

    pub fn eval(&self, alpha: f64) -> f64 {
        if !self.contains(alpha) {
            return 0.0;
        }
        match self {
            Segment::Indicator { .. } => 1.0,
            Segment::Affine { slope, intercept, .. } => slope * alpha + intercept,
        }
    }

    /// Exact integral over `[a, b]`.
    fn integral(&self, a: f64, b: f64) -> f64 {
        let (lo, hi) = self.bounds();
        let left = a.max(lo);
        let right = b.min(hi);
        if right <= left {
            return 0.0;
        }
        match self {
            Segment::Indicator { .. } => right - left,
            Segment::Affine { slope, intercept, .. } => {
                0.5 * slope * (right * right - left * left) + intercept * (right - left)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let (lo, hi) = self.bounds();
        if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo >= hi {
            return Err(Error::Config(format!(
                "segment bounds [{lo}, {hi}) must satisfy 0 <= lo < hi <= 1"
            )));
        }
        Ok(())
    }
}

/// An input channel `b_j` as a sum of segments.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelDef {
    pub segments: Vec<Segment>,
}

impl ChannelDef {
    pub fn eval(&self, alpha: f64) -> f64 {
        self.segments.iter().map(|s| s.eval(alpha)).sum()
    }

    /// Exact block average over the `i`-th of `n` uniform parts.
    pub fn block_average(&self, i: usize, n: usize) -> f64 {
        let a = i as f64 / n as f64;
        let b = (i + 1) as f64 / n as f64;
        self.segments.iter().map(|s| s.integral(a, b)).sum::<f64>() * n as f64
    }

    pub fn indicator(lo: f64, hi: f64) -> Self {
        ChannelDef {
            segments: vec![Segment::Indicator { lo, hi }],
        }
    }
}

/// State profiles for `x0`/`xf`.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    Zero,
    /// `α (1 − α)`.
    Parabola,
    /// `sin(2πα)`.
    Sine,
    /// `√(1 − α²)`.
    QuarterCircle,
    /// Grid samples loaded from a file; the length must match `n_s`.
    Samples(Vec<f64>),
}

impl Profile {
    pub fn eval(&self, alpha: f64) -> Result<f64> {
        Ok(match self {
            Profile::Zero => 0.0,
            Profile::Parabola => alpha * (1.0 - alpha),
            Profile::Sine => (2.0 * std::f64::consts::PI * alpha).sin(),
            Profile::QuarterCircle => (1.0 - alpha * alpha).max(0.0).sqrt(),
            Profile::Samples(_) => {
                return Err(Error::Config(
                    "sample-based profiles are grid-bound; use sample_grid".into(),
                ))
            }
        })
    }

    pub fn sample_grid(&self, n_s: usize) -> Result<DVector<f64>> {
        if let Profile::Samples(v) = self {
            if v.len() != n_s {
                return Err(Error::Config(format!(
                    "profile samples have length {}, grid needs {n_s}",
                    v.len()
                )));
            }
            return Ok(DVector::from_vec(v.clone()));
        }
        let mids = grid_midpoints(n_s);
        let mut out = DVector::zeros(n_s);
        for (i, &a) in mids.iter().enumerate() {
            out[i] = self.eval(a)?;
        }
        Ok(out)
    }

    /// Exact average over the `i`-th of `n` uniform parts (closed-form
    /// antiderivatives).
    pub fn block_average(&self, i: usize, n: usize) -> Result<f64> {
        let a = i as f64 / n as f64;
        let b = (i + 1) as f64 / n as f64;
        let anti = |x: f64| -> f64 {
            match self {
                Profile::Zero => 0.0,
                Profile::Parabola => x * x / 2.0 - x * x * x / 3.0,
                Profile::Sine => -(2.0 * std::f64::consts::PI * x).cos() / (2.0 * std::f64::consts::PI),
                Profile::QuarterCircle => 0.5 * (x * (1.0 - x * x).max(0.0).sqrt() + x.clamp(-1.0, 1.0).asin()),
                Profile::Samples(_) => f64::NAN,
            }
        };
        if matches!(self, Profile::Samples(_)) {
            return Err(Error::Config(
                "sample-based profiles have no closed-form block averages".into(),
            ));
        }
        Ok((anti(b) - anti(a)) * n as f64)
    }

    pub fn by_name(name: &str) -> Result<Profile> {
        Ok(match name {
            "zero" => Profile::Zero,
            "parabola" => Profile::Parabola,
            "sine" => Profile::Sine,
            "quartercircle" => Profile::QuarterCircle,
            other => {
                return Err(Error::Config(format!(
                    "unknown profile '{other}' (expected zero, parabola, sine, quartercircle)"
                )))
            }
        })
    }
}

/// A fully-specified limit system plus discretization grids.
#[derive(Debug, Clone)]
pub struct SystemSpec {
    pub graphon: GraphonSpec,
    pub channels: Vec<ChannelDef>,
    pub x0: Profile,
    pub xf: Profile,
    pub n_s: usize,
    pub steps: usize,
    pub horizon: f64,
    pub lambda: f64,
}

impl SystemSpec {
    pub fn channel_matrix(&self, n_s: usize) -> DMatrix<f64> {
        let mids = grid_midpoints(n_s);
        DMatrix::from_fn(n_s, self.channels.len(), |i, j| {
            self.channels[j].eval(mids[i])
        })
    }

    pub fn discretize(&self) -> Result<DiscretizedSystem> {
        self.discretize_with_lambda(self.lambda)
    }

    pub fn discretize_with_lambda(&self, lambda: f64) -> Result<DiscretizedSystem> {
        let a = self.graphon.discretize(self.n_s)?;
        let b = self.channel_matrix(self.n_s);
        let x0 = self.x0.sample_grid(self.n_s)?;
        let xf = self.xf.sample_grid(self.n_s)?;
        DiscretizedSystem::new(a, b, x0, xf, self.horizon, lambda, self.steps)
    }
}

/// Solver selection for `solve`/`certify`.
#[derive(Debug, Clone)]
pub enum SolverKind {
    L1,
    NonConvex(PenaltySpec),
}

/// Network family for the approximation experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    /// Simple threshold graph with quarter-circle targets.
    Threshold,
    /// Step projections of the limit system itself.
    Projection,
}

#[derive(Debug, Clone)]
pub struct CutNormConfig {
    /// Step resolution used when the configured graphon is analytic.
    pub parts: usize,
    pub force_heuristic: bool,
    pub restarts: usize,
}

impl Default for CutNormConfig {
    fn default() -> Self {
        CutNormConfig {
            parts: 12,
            force_heuristic: false,
            restarts: 32,
        }
    }
}

/// Everything a CLI command needs.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub system: SystemSpec,
    pub solver: SolverKind,
    pub opts: SolveOptions,
    pub lambdas: Vec<f64>,
    pub prefix: String,
    pub family: FamilyKind,
    pub n_list: Vec<usize>,
    pub cutnorm: CutNormConfig,
}

// ---------------------------------------------------------------------
// TOML model
// ---------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    system: SystemSection,
    #[serde(default)]
    solver: SolverSection,
    #[serde(default)]
    output: OutputSection,
    #[serde(default)]
    approximate: Option<ApproximateSection>,
    #[serde(default)]
    cutnorm: Option<CutnormSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemSection {
    /// Built-in graphon id, or a path to a step-graphon CSV.
    graphon: String,
    n_s: usize,
    steps: usize,
    horizon: f64,
    lambda: Option<f64>,
    lambdas: Option<Vec<f64>>,
    x0: ProfileSection,
    xf: ProfileSection,
    #[serde(rename = "channel")]
    channels: Vec<ChannelSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileSection {
    name: Option<String>,
    csv: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelSection {
    #[serde(rename = "segment")]
    segments: Vec<SegmentSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SegmentSection {
    kind: String,
    lo: f64,
    hi: f64,
    slope: Option<f64>,
    intercept: Option<f64>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct SolverSection {
    kind: Option<String>,
    penalty: Option<String>,
    kappa: Option<f64>,
    rel_tol: Option<f64>,
    max_iter: Option<usize>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct OutputSection {
    prefix: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ApproximateSection {
    family: String,
    n_list: Vec<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CutnormSection {
    parts: Option<usize>,
    mode: Option<String>,
    restarts: Option<usize>,
}

fn load_profile(section: &ProfileSection, base: &Path) -> Result<Profile> {
    match (&section.name, &section.csv) {
        (Some(name), None) => Profile::by_name(name),
        (None, Some(csv)) => {
            let path = base.join(csv);
            if !path.exists() {
                return Err(Error::Config(format!(
                    "profile file {} does not exist",
                    path.display()
                )));
            }
            let text = std::fs::read_to_string(&path)?;
            let vals: std::result::Result<Vec<f64>, _> = text
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(str::parse::<f64>)
                .collect();
            let vals = vals.map_err(|e| {
                Error::Config(format!("bad number in profile {}: {e}", path.display()))
            })?;
            Ok(Profile::Samples(vals))
        }
        _ => Err(Error::Config(
            "profile needs exactly one of `name` or `csv`".into(),
        )),
    }
}

/// Parse and validate a TOML config file. Relative paths resolve against
/// the config file's directory.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
    let file: ConfigFile = toml::from_str(&text)
        .map_err(|e| Error::Config(format!("cannot parse config {}: {e}", path.display())))?;
    let base = path.parent().unwrap_or_else(|| Path::new(".")).to_path_buf();
    realize_config(file, &base)
}

fn realize_config(file: ConfigFile, base: &PathBuf) -> Result<ExperimentConfig> {
    let sys = &file.system;
    if sys.n_s == 0 || sys.steps == 0 {
        return Err(Error::Config("n_s and steps must be at least 1".into()));
    }
    if !(sys.horizon > 0.0) {
        return Err(Error::Config("horizon must be positive".into()));
    }
    let graphon = if sys.graphon.ends_with(".csv") {
        let p = base.join(&sys.graphon);
        if !p.exists() {
            return Err(Error::Config(format!(
                "graphon file {} does not exist",
                p.display()
            )));
        }
        GraphonSpec::read_step_csv(&p)?
    } else {
        GraphonSpec::builtin(&sys.graphon)?
    };
    if sys.channels.is_empty() {
        return Err(Error::Config("at least one input channel required".into()));
    }
    let mut channels = Vec::new();
    for ch in &sys.channels {
        let mut segments = Vec::new();
        for s in &ch.segments {
            let seg = match s.kind.as_str() {
                "indicator" => Segment::Indicator { lo: s.lo, hi: s.hi },
                "affine" => Segment::Affine {
                    lo: s.lo,
                    hi: s.hi,
                    slope: s.slope.ok_or_else(|| {
                        Error::Config("affine segment needs `slope`".into())
                    })?,
                    intercept: s.intercept.ok_or_else(|| {
                        Error::Config("affine segment needs `intercept`".into())
                    })?,
                },
                other => {
                    return Err(Error::Config(format!(
                        "unknown segment kind '{other}' (expected indicator, affine)"
                    )))
                }
            };
            seg.validate()?;
            segments.push(seg);
        }
        channels.push(ChannelDef { segments });
    }
    let lambda = match (sys.lambda, &sys.lambdas) {
        (Some(l), _) => l,
        (None, Some(ls)) if !ls.is_empty() => ls[0],
        _ => {
            return Err(Error::Config(
                "system needs `lambda` or a non-empty `lambdas` list".into(),
            ))
        }
    };
    if lambda < 0.0 || sys.lambdas.iter().flatten().any(|l| *l < 0.0) {
        return Err(Error::Config("lambda values must be non-negative".into()));
    }
    let lambdas = sys.lambdas.clone().unwrap_or_else(|| vec![lambda]);

    let system = SystemSpec {
        graphon,
        channels,
        x0: load_profile(&sys.x0, base)?,
        xf: load_profile(&sys.xf, base)?,
        n_s: sys.n_s,
        steps: sys.steps,
        horizon: sys.horizon,
        lambda,
    };

    let solver = match file.solver.kind.as_deref().unwrap_or("l1") {
        "l1" => SolverKind::L1,
        "nonconvex" => {
            let id = file.solver.penalty.as_deref().unwrap_or("mcp");
            SolverKind::NonConvex(PenaltySpec::from_id(id, file.solver.kappa)?)
        }
        other => {
            return Err(Error::Config(format!(
                "unknown solver kind '{other}' (expected l1, nonconvex)"
            )))
        }
    };
    let mut opts = SolveOptions::default();
    if let Some(t) = file.solver.rel_tol {
        opts.rel_tol = t;
    }
    if let Some(m) = file.solver.max_iter {
        opts.max_iter = m;
    }

    let (family, n_list) = match &file.approximate {
        Some(a) => {
            let family = match a.family.as_str() {
                "threshold" => FamilyKind::Threshold,
                "projection" => FamilyKind::Projection,
                other => {
                    return Err(Error::Config(format!(
                        "unknown family '{other}' (expected threshold, projection)"
                    )))
                }
            };
            if a.n_list.is_empty() {
                return Err(Error::Config("approximate.n_list must be non-empty".into()));
            }
            (family, a.n_list.clone())
        }
        None => (FamilyKind::Threshold, vec![10, 50, 100, 500]),
    };

    let cutnorm = match &file.cutnorm {
        Some(c) => {
            let force_heuristic = match c.mode.as_deref() {
                None | Some("auto") => false,
                Some("exact") => false,
                Some("heuristic") => true,
                Some(other) => {
                    return Err(Error::Config(format!(
                        "unknown cut-norm mode '{other}' (expected auto, exact, heuristic)"
                    )))
                }
            };
            CutNormConfig {
                parts: c.parts.unwrap_or(12),
                force_heuristic,
                restarts: c.restarts.unwrap_or(32).max(32),
            }
        }
        None => CutNormConfig::default(),
    };

    Ok(ExperimentConfig {
        system,
        solver,
        opts,
        lambdas,
        prefix: file.output.prefix.unwrap_or_else(|| "run".into()),
        family,
        n_list,
        cutnorm,
    })
}

/// Built-in presets reproducing the library's reference experiments.
pub fn preset(name: &str) -> Result<ExperimentConfig> {
    match name {
        "example1" => {
            let system = SystemSpec {
                graphon: GraphonSpec::builtin("example1")?,
                channels: vec![
                    ChannelDef::indicator(0.0, 0.5),
                    ChannelDef::indicator(0.5, 0.8),
                ],
                x0: Profile::Zero,
                xf: Profile::Parabola,
                n_s: 100,
                steps: 200,
                horizon: 10.0,
                lambda: 1e6,
            };
            Ok(ExperimentConfig {
                system,
                solver: SolverKind::L1,
                opts: SolveOptions::default(),
                lambdas: (1..=8).map(|e| 10f64.powi(e)).collect(),
                prefix: "example1".into(),
                family: FamilyKind::Threshold,
                n_list: vec![10, 50, 100, 500],
                cutnorm: CutNormConfig::default(),
            })
        }
        "example2-l1" | "example2-mcp" => {
            let system = SystemSpec {
                graphon: GraphonSpec::builtin("constant")?,
                channels: vec![
                    ChannelDef {
                        segments: vec![
                            Segment::Affine {
                                lo: 0.0,
                                hi: 1.0 / 3.0,
                                slope: 3.0,
                                intercept: 0.0,
                            },
                            Segment::Affine {
                                lo: 2.0 / 3.0,
                                hi: 1.0,
                                slope: 3.0,
                                intercept: -3.0,
                            },
                        ],
                    },
                    ChannelDef {
                        segments: vec![Segment::Affine {
                            lo: 1.0 / 3.0,
                            hi: 2.0 / 3.0,
                            slope: -6.0,
                            intercept: 3.0,
                        }],
                    },
                ],
                x0: Profile::Sine,
                xf: Profile::Zero,
                n_s: 100,
                steps: 200,
                horizon: 2.0,
                lambda: 1e6,
            };
            let solver = if name == "example2-l1" {
                SolverKind::L1
            } else {
                SolverKind::NonConvex(PenaltySpec::mcp(0.1)?)
            };
            Ok(ExperimentConfig {
                system,
                solver,
                opts: SolveOptions::default(),
                lambdas: (1..=8).map(|e| 10f64.powi(e)).collect(),
                prefix: name.into(),
                family: FamilyKind::Threshold,
                n_list: vec![10, 50, 100, 500],
                cutnorm: CutNormConfig::default(),
            })
        }
        "example3" => {
            let system = SystemSpec {
                graphon: GraphonSpec::builtin("halfplane")?,
                channels: vec![
                    ChannelDef::indicator(0.0, 0.25),
                    ChannelDef::indicator(0.25, 0.75),
                    ChannelDef::indicator(0.75, 1.0),
                ],
                x0: Profile::Zero,
                xf: Profile::QuarterCircle,
                n_s: 500,
                steps: 100,
                horizon: 1.0,
                lambda: 1e3,
            };
            Ok(ExperimentConfig {
                system,
                solver: SolverKind::L1,
                opts: SolveOptions::default(),
                lambdas: vec![1.0, 10.0, 100.0, 1000.0],
                prefix: "example3".into(),
                family: FamilyKind::Threshold,
                n_list: vec![10, 50, 100, 500],
                cutnorm: CutNormConfig::default(),
            })
        }
        other => Err(Error::Config(format!(
            "unknown preset '{other}' (expected example1, example2-l1, example2-mcp, example3)"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn presets_discretize() {
        for name in ["example1", "example2-l1", "example2-mcp"] {
            let cfg = preset(name).unwrap();
            let sys = cfg.system.discretize().unwrap();
            assert_eq!(sys.n_s(), 100);
            assert_eq!(sys.steps, 200);
        }
        assert!(preset("nope").is_err());
    }

    #[test]
    fn example2_channels_match_piecewise_form() {
        let cfg = preset("example2-l1").unwrap();
        let b1 = &cfg.system.channels[0];
        let b2 = &cfg.system.channels[1];
        assert_relative_eq!(b1.eval(0.2), 0.6, epsilon = 1e-12);
        assert_relative_eq!(b1.eval(0.8), 3.0 * (0.8 - 1.0), epsilon = 1e-12);
        assert_eq!(b1.eval(0.5), 0.0);
        assert_relative_eq!(b2.eval(0.5), 0.0, epsilon = 1e-12);
        assert_relative_eq!(b2.eval(0.4), -6.0 * (0.4 - 0.5), epsilon = 1e-12);
    }

    #[test]
    fn profile_block_averages_match_quadrature() {
        for profile in [Profile::Parabola, Profile::Sine, Profile::QuarterCircle] {
            for (i, n) in [(0usize, 7usize), (3, 7), (6, 7)] {
                let exact = profile.block_average(i, n).unwrap();
                // Fine midpoint quadrature oracle.
                let m = 20_000;
                let a = i as f64 / n as f64;
                let h = 1.0 / (n as f64 * m as f64);
                let approx_avg: f64 = (0..m)
                    .map(|k| profile.eval(a + (k as f64 + 0.5) * h).unwrap())
                    .sum::<f64>()
                    / m as f64;
                assert_relative_eq!(exact, approx_avg, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn channel_block_average_exact_for_affine() {
        let ch = ChannelDef {
            segments: vec![Segment::Affine {
                lo: 0.0,
                hi: 0.5,
                slope: 2.0,
                intercept: 1.0,
            }],
        };
        // Average of 2α + 1 over [0, 0.25) is 2·0.125 + 1 = 1.25.
        assert_relative_eq!(ch.block_average(0, 4), 1.25, epsilon = 1e-14);
        // Part [0.5, 0.75): outside the segment.
        assert_eq!(ch.block_average(2, 4), 0.0);
    }

    #[test]
    fn config_file_round_trip() {
        let dir = std::env::temp_dir().join("gc_config_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("cfg.toml");
        std::fs::write(
            &path,
            r#"
[system]
graphon = "example1"
n_s = 20
steps = 10
horizon = 2.0
lambda = 100.0
x0 = { name = "zero" }
xf = { name = "parabola" }

[[system.channel]]
[[system.channel.segment]]
kind = "indicator"
lo = 0.0
hi = 0.5

[solver]
kind = "l1"
rel_tol = 1e-8

[output]
prefix = "trial"
"#,
        )
        .unwrap();
        let cfg = load_config(&path).unwrap();
        assert_eq!(cfg.prefix, "trial");
        assert_eq!(cfg.system.n_s, 20);
        assert_eq!(cfg.opts.rel_tol, 1e-8);
        assert!(matches!(cfg.solver, SolverKind::L1));
        cfg.system.discretize().unwrap();
    }

    #[test]
    fn config_rejects_missing_lambda_and_bad_segments() {
        let dir = std::env::temp_dir().join("gc_config_test2");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.toml");
        std::fs::write(
            &path,
            r#"
[system]
graphon = "example1"
n_s = 10
steps = 5
horizon = 1.0
x0 = { name = "zero" }
xf = { name = "zero" }
[[system.channel]]
[[system.channel.segment]]
kind = "indicator"
lo = 0.0
hi = 0.5
"#,
        )
        .unwrap();
        assert!(matches!(load_config(&path), Err(Error::Config(_))));

        let path2 = dir.join("bad2.toml");
        std::fs::write(
            &path2,
            r#"
[system]
graphon = "example1"
n_s = 10
steps = 5
horizon = 1.0
lambda = 1.0
x0 = { name = "zero" }
xf = { name = "zero" }
[[system.channel]]
[[system.channel.segment]]
kind = "indicator"
lo = 0.7
hi = 0.2
"#,
        )
        .unwrap();
        assert!(matches!(load_config(&path2), Err(Error::Config(_))));
    }

    #[test]
    fn config_rejects_missing_graphon_file() {
        let dir = std::env::temp_dir().join("gc_config_test3");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("missing.toml");
        std::fs::write(
            &path,
            r#"
[system]
graphon = "does_not_exist.csv"
n_s = 10
steps = 5
horizon = 1.0
lambda = 1.0
x0 = { name = "zero" }
xf = { name = "zero" }
[[system.channel]]
[[system.channel.segment]]
kind = "indicator"
lo = 0.0
hi = 1.0
"#,
        )
        .unwrap();
        assert!(matches!(load_config(&path), Err(Error::Config(_))));
    }
}
