//! Separable penalties for the non-convex sparse control problem, with
//! their scalar proximal maps and a numerical validator for the required
//! structure (zero at zero, one at the endpoints, strictly above `|u|` in
//! between).

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type ProxFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// A separable penalty `ψ(u) = Σ_j ψ_s(u_j)` given by one scalar evaluator
/// applied per channel, together with the scalar prox
/// `prox(v, s) = argmin_{w ∈ [−1,1]} s·ψ_s(w) + ½ (w − v)²`.
#[derive(Clone)]
pub struct PenaltySpec {
    descriptor: String,
    eval: ScalarFn,
    prox: ProxFn,
}

impl fmt::Debug for PenaltySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PenaltySpec({})", self.descriptor)
    }
}

impl PenaltySpec {
    pub fn new(
        descriptor: impl Into<String>,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
        prox: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        PenaltySpec {
            descriptor: descriptor.into(),
            eval: Arc::new(eval),
            prox: Arc::new(prox),
        }
    }

    pub fn descriptor(&self) -> &str {
        &self.descriptor
    }

    pub fn eval(&self, u: f64) -> f64 {
        (self.eval)(u)
    }

    pub fn prox(&self, v: f64, step: f64) -> f64 {
        (self.prox)(v, step)
    }

    /// Scaled minimax-concave penalty `ψ(u) = (|u| − κ u²) / (1 − κ)`,
    /// valid for `κ ∈ (0, 0.5]`. At `κ = 0.1` this is the penalty
    /// `(10/9)(‖u‖_{ℓ1} − 0.1 ‖u‖_{ℓ2}²)` per channel.
    pub fn mcp(kappa: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa <= 0.5) {
            return Err(Error::Validation(format!(
                "mcp penalty needs kappa in (0, 0.5], got {kappa}"
            )));
        }
        let eval = move |u: f64| (u.abs() - kappa * u * u) / (1.0 - kappa);
        let prox = move |v: f64, s: f64| {
            let av = v.abs();
            let sign = if v < 0.0 { -1.0 } else { 1.0 };
            let obj = |w: f64| s * (w - kappa * w * w) / (1.0 - kappa) + 0.5 * (w - av) * (w - av);
            // Candidates: both endpoints plus the interior stationary point
            // when the shifted quadratic is convex.
            let mut best_w = 0.0;
            let mut best_v = obj(0.0);
            let q = 1.0 - 2.0 * s * kappa / (1.0 - kappa);
            if q > 1e-14 {
                let w = (av - s / (1.0 - kappa)) / q;
                if w > 0.0 && w < 1.0 {
                    let val = obj(w);
                    if val < best_v {
                        best_v = val;
                        best_w = w;
                    }
                }
            }
            if obj(1.0) < best_v {
                best_w = 1.0;
            }
            sign * best_w
        };
        Ok(PenaltySpec::new(format!("mcp(kappa={kappa})"), eval, prox))
    }

    /// Square-root penalty `ψ(u) = |u|^{1/2}`.
    pub fn sqrt_root() -> Self {
        let eval = |u: f64| u.abs().sqrt();
        let prox = |v: f64, s: f64| {
            let av = v.abs();
            let sign = if v < 0.0 { -1.0 } else { 1.0 };
            let obj = |w: f64| s * w.sqrt() + 0.5 * (w - av) * (w - av);
            let mut best_w = 0.0;
            let mut best_v = obj(0.0);
            if s > 0.0 {
                // f'(w) = s/(2√w) + w − |v| is decreasing then increasing
                // with minimum at w* = (s/4)^{2/3}; the useful stationary
                // point is the larger root of f' in [w*, |v|].
                let w_infl = (s / 4.0).powf(2.0 / 3.0);
                let fprime = |w: f64| s / (2.0 * w.sqrt()) + w - av;
                if w_infl < av && fprime(w_infl) < 0.0 {
                    let (mut lo, mut hi) = (w_infl, av);
                    for _ in 0..200 {
                        let mid = 0.5 * (lo + hi);
                        if fprime(mid) < 0.0 {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    let w = 0.5 * (lo + hi);
                    let w = w.min(1.0);
                    let val = obj(w);
                    if val < best_v {
                        best_v = val;
                        best_w = w;
                    }
                }
            } else if av > 0.0 {
                best_w = av.min(1.0);
                best_v = obj(best_w);
            }
            if obj(1.0) < best_v {
                best_w = 1.0;
            }
            sign * best_w
        };
        PenaltySpec::new("sqrt", eval, prox)
    }

    /// Plain absolute value. Violates the strict-majorization requirement
    /// (`|u| < ψ(u)` fails); kept as the canonical validator reject case.
    pub fn l1() -> Self {
        let eval = |u: f64| u.abs();
        let prox = |v: f64, s: f64| crate::solvers::prox_l1_box(v, s);
        PenaltySpec::new("l1", eval, prox)
    }

    /// Penalty by CLI id.
    pub fn from_id(id: &str, kappa: Option<f64>) -> Result<Self> {
        match id {
            "mcp" => Self::mcp(kappa.unwrap_or(0.1)),
            "sqrt" => Ok(Self::sqrt_root()),
            "l1" => Ok(Self::l1()),
            other => Err(Error::Config(format!(
                "unknown penalty id '{other}' (expected mcp, sqrt, l1)"
            ))),
        }
    }
}

/// Itemized outcome of the structural checks on a penalty.
#[derive(Debug, Clone)]
pub struct PenaltyValidation {
    pub passed: bool,
    pub failures: Vec<String>,
    /// Largest disagreement between the penalty's prox and the grid-search
    /// oracle over the sampled `(v, step)` pairs.
    pub max_prox_deviation: f64,
}

const GRID_STEP: f64 = 1e-3;
const PROX_ORACLE_GRID: f64 = 1e-4;
const PROX_TOL: f64 = 2e-4;

/// Grid-check the structural requirements and the prox of a penalty.
///
/// Checks, on a `10⁻³` grid over `[−1, 1]`: `ψ(0) = 0`, `ψ(±1) = 1`, and
/// `|u| < ψ(u) ≤ 1` on the open punctured interval. The prox is compared
/// against a `10⁻⁴`-grid scalar minimization oracle at 50 deterministic
/// `(v, step)` pairs.
pub fn validate_penalty(psi: &PenaltySpec) -> PenaltyValidation {
    let mut failures = Vec::new();

    if psi.eval(0.0).abs() > 1e-12 {
        failures.push(format!("psi(0) = {} != 0", psi.eval(0.0)));
    }
    for e in [-1.0, 1.0] {
        if (psi.eval(e) - 1.0).abs() > 1e-9 {
            failures.push(format!("psi({e}) = {} != 1", psi.eval(e)));
        }
    }
    let steps = (2.0 / GRID_STEP) as usize;
    let mut majorization_bad = 0usize;
    let mut bound_bad = 0usize;
    for i in 0..=steps {
        let u = -1.0 + i as f64 * GRID_STEP;
        if u.abs() < 0.5 * GRID_STEP || u.abs() > 1.0 - 0.5 * GRID_STEP {
            continue;
        }
        let p = psi.eval(u);
        if p <= u.abs() {
            majorization_bad += 1;
        }
        if p > 1.0 + 1e-12 {
            bound_bad += 1;
        }
    }
    if majorization_bad > 0 {
        failures.push(format!(
            "|u| < psi(u) fails at {majorization_bad} grid points"
        ));
    }
    if bound_bad > 0 {
        failures.push(format!("psi(u) <= 1 fails at {bound_bad} grid points"));
    }

    // Prox oracle: exhaustive scalar minimization on a fine grid.
    let mut max_dev = 0.0f64;
    let mut rng_state = 0x9e3779b97f4a7c15u64;
    let mut unit = move || {
        rng_state = rng_state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (rng_state >> 11) as f64 / (1u64 << 53) as f64
    };
    for _ in 0..50 {
        let v = unit() * 4.0 - 2.0;
        let s = unit() * 2.0 + 1e-6;
        let w = psi.prox(v, s);
        if !(-1.0 - 1e-12..=1.0 + 1e-12).contains(&w) {
            failures.push(format!("prox({v}, {s}) = {w} outside [-1, 1]"));
            continue;
        }
        let obj = |w: f64| s * psi.eval(w) + 0.5 * (w - v) * (w - v);
        let n = (2.0 / PROX_ORACLE_GRID) as usize;
        let mut best_w = -1.0;
        let mut best_val = obj(-1.0);
        for i in 1..=n {
            let cand = -1.0 + i as f64 * PROX_ORACLE_GRID;
            let val = obj(cand);
            if val < best_val {
                best_val = val;
                best_w = cand;
            }
        }
        let dev = (w - best_w).abs();
        // Ties between symmetric minimizers make the w-distance meaningless;
        // accept if the prox value is at least as good as the oracle's.
        if dev > PROX_TOL && obj(w) > best_val {
            failures.push(format!(
                "prox({v:.4}, {s:.4}) = {w:.6} but grid oracle found {best_w:.6}"
            ));
        }
        max_dev = max_dev.max(dev.min((obj(w) - best_val).abs()));
    }

    PenaltyValidation {
        passed: failures.is_empty(),
        failures,
        max_prox_deviation: max_dev,
    }
}
