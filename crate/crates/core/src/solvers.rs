//! Solvers for the L¹ and non-convex sparse control problems, cost
//! functionals, the bang-off-bang certificate, and a brute-force oracle.
//!
//! Both problems are solved on the direct transcription
//! `x(T) = free + Σ_k Γ_k u_k`, which makes the terminal penalty a convex
//! quadratic in the stacked control vector.

use nalgebra::{DMatrix, DVector};

use crate::dynamics::{
    build_terminal_map, switching_function_with, ControlSignal, DiscretizedSystem, TerminalMap,
};
use crate::error::{Error, Result};
use crate::linalg::{self, l2_inner, l2_norm_sq};
use crate::penalty::{validate_penalty, PenaltySpec};

/// Stopping and certification parameters shared by the solvers.
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// Relative objective-decrease stopping threshold.
    pub rel_tol: f64,
    /// Iteration budget of the main solve loop.
    pub max_iter: usize,
    /// `‖u‖₀` support tolerance.
    pub zero_tol: f64,
    /// Distance to `{0, ±1}` counted as discrete.
    pub disc_tol: f64,
    /// Half-width of the excluded band around `|θ| = 1`.
    pub theta_band: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            rel_tol: 1e-9,
            max_iter: 20_000,
            zero_tol: 1e-6,
            disc_tol: 1e-3,
            theta_band: 1e-2,
        }
    }
}

/// Proximal map of `step·|·| + indicator of [−1, 1]`:
/// soft-threshold then clip.
pub fn prox_l1_box(v: f64, step: f64) -> f64 {
    let shrunk = v.signum() * (v.abs() - step).max(0.0);
    shrunk.clamp(-1.0, 1.0)
}

/// Cost functional selector.
#[derive(Clone, Copy)]
pub enum CostKind<'a> {
    /// Support measure plus terminal penalty.
    L0,
    /// L¹ magnitude plus terminal penalty.
    L1,
    /// Separable penalty integral plus terminal penalty.
    Psi(&'a PenaltySpec),
}

#[derive(Debug, Clone, Copy)]
pub struct IterationRecord {
    pub iter: usize,
    pub objective: f64,
    pub step: f64,
}

#[derive(Debug, Clone)]
pub struct CostBreakdown {
    pub j0: f64,
    pub j1: f64,
    pub jpsi: Option<f64>,
    pub terminal_error_sq: f64,
    pub sparsity_rate: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct ThresholdViolation {
    pub step: usize,
    pub channel: usize,
    pub theta: f64,
    pub control: f64,
}

/// Discreteness and threshold-consistency certificate for a control
/// against its switching function.
#[derive(Debug, Clone)]
pub struct BangOffBangReport {
    /// Fraction of samples within `disc_tol` of `{0, ±1}`.
    pub purity: f64,
    pub violations: Vec<ThresholdViolation>,
    /// True iff no sample outside the `|θ| ≈ 1` band breaks the threshold
    /// cases.
    pub consistency: bool,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub control: ControlSignal,
    pub terminal_state: DVector<f64>,
    pub costs: CostBreakdown,
    /// Switching-function samples at interval midpoints, `K × m`.
    pub theta: DMatrix<f64>,
    pub certificate: BangOffBangReport,
    pub iterations: Vec<IterationRecord>,
}

/// `1 − ‖u‖₀ / (m T)` with the support measured as
/// `Δ · #{(k, j) : |u_{k,j}| > zero_tol}`.
pub fn sparsity_rate(u: &ControlSignal, dt: f64, horizon: f64, zero_tol: f64) -> f64 {
    let support: f64 = u.values().iter().filter(|v| v.abs() > zero_tol).count() as f64 * dt;
    1.0 - support / (u.channels() as f64 * horizon)
}

/// Evaluate a cost functional for an admissible control.
pub fn evaluate_cost(sys: &DiscretizedSystem, u: &ControlSignal, kind: CostKind) -> Result<f64> {
    let tm = build_terminal_map(sys)?;
    evaluate_cost_with(sys, &tm, u, kind)
}

pub fn evaluate_cost_with(
    sys: &DiscretizedSystem,
    tm: &TerminalMap,
    u: &ControlSignal,
    kind: CostKind,
) -> Result<f64> {
    if u.steps() != sys.steps || u.channels() != sys.channels() {
        return Err(Error::Shape(format!(
            "control grid {}x{} does not match system {}x{}",
            u.steps(),
            u.channels(),
            sys.steps,
            sys.channels()
        )));
    }
    for v in u.values().iter() {
        if v.abs() > 1.0 + 1e-12 {
            return Err(Error::Admissibility(format!(
                "control value {v} outside [-1, 1]"
            )));
        }
    }
    let dt = sys.dt();
    let x_t = tm.terminal_state(u);
    let terminal = sys.lambda * l2_norm_sq(&(x_t - &sys.xf));
    let control_term: f64 = match kind {
        CostKind::L0 => {
            u.values().iter().filter(|v| v.abs() > 1e-6).count() as f64 * dt
        }
        CostKind::L1 => u.values().iter().map(|v| v.abs()).sum::<f64>() * dt,
        CostKind::Psi(psi) => u.values().iter().map(|&v| psi.eval(v)).sum::<f64>() * dt,
    };
    Ok(control_term + terminal)
}

/// Threshold-case certificate from the switching function:
/// `θ > 1 ⇒ u = −1`, `|θ| < 1 ⇒ u = 0`, `θ < −1 ⇒ u = +1`, with a
/// tolerance band around `|θ| = 1` excluded from the consistency check.
pub fn bang_off_bang_certificate(
    u: &ControlSignal,
    theta: &DMatrix<f64>,
    opts: &SolveOptions,
) -> Result<BangOffBangReport> {
    if theta.nrows() != u.steps() || theta.ncols() != u.channels() {
        return Err(Error::Shape(format!(
            "theta grid {}x{} does not match control {}x{}",
            theta.nrows(),
            theta.ncols(),
            u.steps(),
            u.channels()
        )));
    }
    let disc = opts.disc_tol;
    let band = opts.theta_band;
    let mut pure = 0usize;
    let mut violations = Vec::new();
    for k in 0..u.steps() {
        for j in 0..u.channels() {
            let uv = u.values()[(k, j)];
            let th = theta[(k, j)];
            if uv.abs() <= disc || (uv.abs() - 1.0).abs() <= disc {
                pure += 1;
            }
            let expected = if th > 1.0 + band {
                Some(-1.0)
            } else if th < -1.0 - band {
                Some(1.0)
            } else if th.abs() < 1.0 - band {
                Some(0.0)
            } else {
                None // inside the band: the threshold case is set-valued
            };
            if let Some(want) = expected {
                if (uv - want).abs() > disc {
                    violations.push(ThresholdViolation {
                        step: k,
                        channel: j,
                        theta: th,
                        control: uv,
                    });
                }
            }
        }
    }
    let total = (u.steps() * u.channels()) as f64;
    Ok(BangOffBangReport {
        purity: pure as f64 / total,
        consistency: violations.is_empty(),
        violations,
    })
}

/// λ-independent transcription data for one system, reusable across solves
/// (λ sweeps, convergence experiments).
pub struct TranscribedSystem {
    pub tm: TerminalMap,
    /// Column `k·m + j` maps `u_{k,j}` to its terminal-state contribution.
    g_cols: Vec<DVector<f64>>,
    /// `free − xf`.
    c: DVector<f64>,
    /// Gram matrix eigen-pairs of `GᵀG/n_s` (ascending).
    gram_vals: DVector<f64>,
    gram_vecs: DMatrix<f64>,
    /// `Gᵀ c / n_s`.
    gtc: DVector<f64>,
    /// `‖g_i‖²_{L²}` per column.
    gnorm2: Vec<f64>,
    sigma_sq: f64,
    steps: usize,
    channels: usize,
    dt: f64,
}

impl TranscribedSystem {
    pub fn new(sys: &DiscretizedSystem) -> Result<Self> {
        let tm = build_terminal_map(sys)?;
        Self::from_terminal_map(sys, tm)
    }

    pub fn from_terminal_map(sys: &DiscretizedSystem, tm: TerminalMap) -> Result<Self> {
        let k = sys.steps;
        let m = sys.channels();
        let n = k * m;
        let mut g_cols = Vec::with_capacity(n);
        for step in 0..k {
            for j in 0..m {
                g_cols.push(tm.gammas[step].column(j).into_owned());
            }
        }
        let c = &tm.free - &sys.xf;
        let mut gram = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = l2_inner(&g_cols[i], &g_cols[j]);
                gram[(i, j)] = v;
                gram[(j, i)] = v;
            }
        }
        // Largest singular value of the input-to-state map, by power
        // iteration on the Gram matrix (eigendecomposition fallback inside).
        let sigma_sq = linalg::spectral_norm_sym(&gram);
        let (vals, vecs) = linalg::sym_eigen(&gram);
        let gtc = DVector::from_fn(n, |i, _| l2_inner(&g_cols[i], &c));
        let gnorm2 = (0..n).map(|i| gram[(i, i)]).collect();
        Ok(TranscribedSystem {
            tm,
            g_cols,
            c,
            gram_vals: DVector::from_vec(vals),
            gram_vecs: vecs,
            gtc,
            gnorm2,
            sigma_sq,
            steps: k,
            channels: m,
            dt: sys.dt(),
        })
    }

    fn dims(&self) -> usize {
        self.steps * self.channels
    }

    fn residual(&self, u: &DVector<f64>) -> DVector<f64> {
        let mut r = self.c.clone();
        for (i, g) in self.g_cols.iter().enumerate() {
            if u[i] != 0.0 {
                r += g * u[i];
            }
        }
        r
    }

    /// `∇ λ‖Gu + c‖²` in the stacked control coordinates.
    fn grad_quadratic(&self, r: &DVector<f64>, lambda: f64) -> DVector<f64> {
        DVector::from_fn(self.dims(), |i, _| {
            2.0 * lambda * l2_inner(r, &self.g_cols[i])
        })
    }

    pub fn objective_l1(&self, u: &DVector<f64>, lambda: f64) -> f64 {
        let r = self.residual(u);
        self.dt * u.iter().map(|v| v.abs()).sum::<f64>() + lambda * l2_norm_sq(&r)
    }

    pub fn objective_psi(&self, u: &DVector<f64>, lambda: f64, psi: &PenaltySpec) -> f64 {
        let r = self.residual(u);
        self.dt * u.iter().map(|&v| psi.eval(v)).sum::<f64>() + lambda * l2_norm_sq(&r)
    }

    fn unstack(&self, u: &DVector<f64>) -> ControlSignal {
        let m = self.channels;
        let values = DMatrix::from_fn(self.steps, m, |k, j| {
            u[k * m + j].clamp(-1.0, 1.0)
        });
        ControlSignal::from_matrix_unchecked(values)
    }

    /// Minimize `Δ‖u‖₁ + λ‖Gu + c‖²` over the box via ADMM with direct
    /// eigen-solves, then polish with monotone proximal-gradient steps.
    ///
    /// The returned log contains the accepted (objective-improving) steps;
    /// its objective column is non-increasing.
    pub fn solve_l1(
        &self,
        lambda: f64,
        opts: &SolveOptions,
    ) -> Result<(DVector<f64>, Vec<IterationRecord>)> {
        let n = self.dims();
        let mut log = Vec::new();
        if lambda == 0.0 {
            // The magnitude term alone is minimized by the zero control.
            let u = DVector::zeros(n);
            log.push(IterationRecord {
                iter: 0,
                objective: 0.0,
                step: 0.0,
            });
            return Ok((u, log));
        }

        let mut u = DVector::<f64>::zeros(n);
        let mut w = DVector::<f64>::zeros(n);
        let mut rho = 1.0f64;
        let sqrt_n = (n as f64).sqrt();
        let resid_target = 1e-12 * sqrt_n;

        let mut best_obj = self.objective_l1(&u, lambda);
        let mut best_u = u.clone();
        log.push(IterationRecord {
            iter: 0,
            objective: best_obj,
            step: 1.0 / rho,
        });

        for it in 1..=opts.max_iter {
            let rhs = (&u - &w) * rho - &self.gtc * (2.0 * lambda);
            let mut y = self.gram_vecs.transpose() * rhs;
            for i in 0..n {
                y[i] /= 2.0 * lambda * self.gram_vals[i] + rho;
            }
            let z = &self.gram_vecs * y;
            let zw = &z + &w;
            let u_new = DVector::from_fn(n, |i, _| prox_l1_box(zw[i], self.dt / rho));
            let primal = (&z - &u_new).norm();
            let dual = rho * (&u_new - &u).norm();
            u = u_new;
            w += &z - &u;

            let obj = self.objective_l1(&u, lambda);
            if !obj.is_finite() {
                return Err(Error::Divergence(
                    "non-finite objective in L1 solve (bad curvature estimate)".into(),
                ));
            }
            if obj < best_obj {
                best_obj = obj;
                best_u = u.clone();
                log.push(IterationRecord {
                    iter: it,
                    objective: obj,
                    step: 1.0 / rho,
                });
            }
            if it % 10 == 0 {
                if primal > 10.0 * dual {
                    rho *= 2.0;
                    w /= 2.0;
                } else if dual > 10.0 * primal {
                    rho /= 2.0;
                    w *= 2.0;
                }
            }
            if primal < resid_target && dual < resid_target {
                break;
            }
        }

        // Monotone proximal-gradient polish from the best point found.
        // A step of 1/L guarantees descent, so the log stays non-increasing;
        // the soft-threshold also snaps solver dust to exact zeros.
        let lipschitz = 2.0 * lambda * self.sigma_sq;
        if lipschitz > 0.0 {
            let step = 1.0 / lipschitz;
            let mut obj = best_obj;
            for it in 0..2000 {
                let r = self.residual(&best_u);
                let g = self.grad_quadratic(&r, lambda);
                let cand = DVector::from_fn(n, |i, _| {
                    prox_l1_box(best_u[i] - step * g[i], step * self.dt)
                });
                let cand_obj = self.objective_l1(&cand, lambda);
                if !cand_obj.is_finite() {
                    return Err(Error::Divergence("non-finite objective in polish".into()));
                }
                if cand_obj > obj {
                    break;
                }
                let rel = (obj - cand_obj) / obj.abs().max(1e-300);
                best_u = cand;
                if cand_obj < obj {
                    log.push(IterationRecord {
                        iter: opts.max_iter + it + 1,
                        objective: cand_obj,
                        step,
                    });
                }
                obj = cand_obj;
                if rel < opts.rel_tol && it > 3 {
                    break;
                }
            }
        }
        Ok((best_u, log))
    }

    /// Minimize `Δ Σψ(u) + λ‖Gu + c‖²` from one start: cyclic exact
    /// coordinate prox steps, then full-vector monotone proximal-gradient
    /// with step halving on rejection.
    fn descend_psi(
        &self,
        start: &DVector<f64>,
        lambda: f64,
        psi: &PenaltySpec,
        opts: &SolveOptions,
        iter_base: usize,
    ) -> Result<(DVector<f64>, f64, Vec<IterationRecord>)> {
        let n = self.dims();
        let mut u = start.clone();
        let mut r = self.residual(&u);
        let mut obj = self.dt * u.iter().map(|&v| psi.eval(v)).sum::<f64>() + lambda * l2_norm_sq(&r);
        let mut log = vec![IterationRecord {
            iter: iter_base,
            objective: obj,
            step: 0.0,
        }];

        // Coordinate sweeps: each update is the exact scalar minimizer via
        // the penalty prox, so the objective never increases. Sequential
        // updates also break the time-permutation symmetry of degenerate
        // systems that full-vector steps preserve.
        let max_sweeps = 500usize;
        let n_s_weight = 1.0; // inner products already carry 1/n_s
        for sweep in 0..max_sweeps {
            let mut max_step = 0.0f64;
            for idx in 0..n {
                let q = self.gnorm2[idx] * n_s_weight;
                let old = u[idx];
                let new = if q < 1e-300 {
                    // The quadratic ignores this coordinate; ψ alone is
                    // minimized at zero.
                    0.0
                } else {
                    let rho = l2_inner(&r, &self.g_cols[idx]);
                    let v = old - rho / q;
                    let s = self.dt / (2.0 * lambda * q);
                    max_step = max_step.max(s);
                    psi.prox(v, s)
                };
                if new != old {
                    r += &self.g_cols[idx] * (new - old);
                    u[idx] = new;
                }
            }
            let new_obj =
                self.dt * u.iter().map(|&v| psi.eval(v)).sum::<f64>() + lambda * l2_norm_sq(&r);
            if !new_obj.is_finite() {
                return Err(Error::Divergence("non-finite objective in penalty solve".into()));
            }
            if new_obj < obj {
                log.push(IterationRecord {
                    iter: iter_base + sweep + 1,
                    objective: new_obj,
                    step: max_step,
                });
            }
            let rel = (obj - new_obj) / obj.abs().max(1e-300);
            obj = new_obj;
            if rel < opts.rel_tol {
                break;
            }
        }

        // Full-vector monotone proximal gradient: accept a step only if the
        // objective decreases, halve it otherwise.
        let lipschitz = 2.0 * lambda * self.sigma_sq;
        if lipschitz > 0.0 {
            let base_step = 1.0 / lipschitz;
            let mut step = base_step;
            let mut it = 0usize;
            let mut accepted = max_sweeps;
            while it < opts.max_iter {
                it += 1;
                let g = self.grad_quadratic(&r, lambda);
                let cand = DVector::from_fn(n, |i, _| psi.prox(u[i] - step * g[i], step * self.dt));
                let cand_obj = self.objective_psi(&cand, lambda, psi);
                if !cand_obj.is_finite() {
                    return Err(Error::Divergence("non-finite objective in penalty solve".into()));
                }
                if cand_obj < obj {
                    let rel = (obj - cand_obj) / obj.abs().max(1e-300);
                    u = cand;
                    r = self.residual(&u);
                    obj = cand_obj;
                    accepted += 1;
                    log.push(IterationRecord {
                        iter: iter_base + accepted,
                        objective: obj,
                        step,
                    });
                    if rel < opts.rel_tol {
                        break;
                    }
                } else {
                    step *= 0.5;
                    if step < base_step * 1e-18 {
                        break;
                    }
                }
            }
        }
        Ok((u, obj, log))
    }
}

/// Solve the L¹ problem and certify the result.
pub fn solve_l1(sys: &DiscretizedSystem, opts: &SolveOptions) -> Result<SolveReport> {
    let tsys = TranscribedSystem::new(sys)?;
    solve_l1_with(sys, &tsys, opts)
}

/// L¹ solve reusing a prebuilt transcription (`sys.lambda` is read here, so
/// one transcription serves a whole λ sweep).
pub fn solve_l1_with(
    sys: &DiscretizedSystem,
    tsys: &TranscribedSystem,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    let (u, log) = tsys.solve_l1(sys.lambda, opts)?;
    finalize_report(sys, tsys, tsys.unstack(&u), log, None, opts)
}

/// Solve the non-convex problem with the given penalty.
///
/// Multi-start from the zero control, the L¹ solution, and the sign pattern
/// of `−θ` at `u = 0`; the best descent result is returned.
pub fn solve_nonconvex(
    sys: &DiscretizedSystem,
    psi: &PenaltySpec,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    let tsys = TranscribedSystem::new(sys)?;
    solve_nonconvex_with(sys, &tsys, psi, opts)
}

pub fn solve_nonconvex_with(
    sys: &DiscretizedSystem,
    tsys: &TranscribedSystem,
    psi: &PenaltySpec,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    let validation = validate_penalty(psi);
    if !validation.passed {
        return Err(Error::Validation(format!(
            "penalty '{}' fails the structural checks: {}",
            psi.descriptor(),
            validation.failures.join("; ")
        )));
    }
    let n = tsys.dims();
    if sys.lambda == 0.0 {
        let u = DVector::zeros(n);
        let log = vec![IterationRecord {
            iter: 0,
            objective: 0.0,
            step: 0.0,
        }];
        return finalize_report(sys, tsys, tsys.unstack(&u), log, Some(psi), opts);
    }

    let (l1_u, _) = tsys.solve_l1(sys.lambda, opts)?;
    let theta0 = switching_function_with(sys, &tsys.tm, &tsys.tm.free)?;
    let mut sign_start = DVector::zeros(n);
    for k in 0..tsys.steps {
        for j in 0..tsys.channels {
            let th = theta0[(k, j)];
            sign_start[k * tsys.channels + j] = if th > 0.0 {
                -1.0
            } else if th < 0.0 {
                1.0
            } else {
                0.0
            };
        }
    }

    let starts: [(&str, DVector<f64>); 3] = [
        ("zero", DVector::zeros(n)),
        ("l1", l1_u),
        ("signpattern", sign_start),
    ];
    let mut best: Option<(DVector<f64>, f64, Vec<IterationRecord>)> = None;
    for (i, (_name, start)) in starts.iter().enumerate() {
        let (u, obj, log) = tsys.descend_psi(start, sys.lambda, psi, opts, i * (opts.max_iter + 600))?;
        if best.as_ref().map_or(true, |(_, b, _)| obj < *b) {
            best = Some((u, obj, log));
        }
    }
    let (u, _, log) = best.expect("at least one start");
    finalize_report(sys, tsys, tsys.unstack(&u), log, Some(psi), opts)
}

fn finalize_report(
    sys: &DiscretizedSystem,
    tsys: &TranscribedSystem,
    control: ControlSignal,
    iterations: Vec<IterationRecord>,
    psi: Option<&PenaltySpec>,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    let x_t = tsys.tm.terminal_state(&control);
    let theta = switching_function_with(sys, &tsys.tm, &x_t)?;
    let certificate = bang_off_bang_certificate(&control, &theta, opts)?;
    let terminal_error_sq = l2_norm_sq(&(&x_t - &sys.xf));
    let dt = sys.dt();
    let j0 = control
        .values()
        .iter()
        .filter(|v| v.abs() > opts.zero_tol)
        .count() as f64
        * dt
        + sys.lambda * terminal_error_sq;
    let j1 = control.values().iter().map(|v| v.abs()).sum::<f64>() * dt
        + sys.lambda * terminal_error_sq;
    let jpsi = psi.map(|p| {
        control.values().iter().map(|&v| p.eval(v)).sum::<f64>() * dt
            + sys.lambda * terminal_error_sq
    });
    let costs = CostBreakdown {
        j0,
        j1,
        jpsi,
        terminal_error_sq,
        sparsity_rate: sparsity_rate(&control, dt, sys.horizon, opts.zero_tol),
    };
    Ok(SolveReport {
        control,
        terminal_state: x_t,
        costs,
        theta,
        certificate,
        iterations,
    })
}

/// Exhaustive minimum of the chosen cost over `u ∈ {−1, 0, 1}^{K×m}`.
///
/// Ties break to the lexicographically smallest flattened control (values
/// ordered −1 < 0 < 1). Requires `3^{K·m} ≤ 531441`.
pub fn brute_force_l0(
    sys: &DiscretizedSystem,
    kind: CostKind,
) -> Result<(ControlSignal, f64)> {
    let n = sys.steps * sys.channels();
    if n > 12 {
        return Err(Error::Capacity(format!(
            "brute force supports K·m <= 12 control samples, got {n}"
        )));
    }
    let tm = build_terminal_map(sys)?;
    let tsys = TranscribedSystem::from_terminal_map(sys, tm)?;
    let dt = sys.dt();
    let mut digits = vec![0usize; n]; // 0 → −1, 1 → 0, 2 → +1
    const VALS: [f64; 3] = [-1.0, 0.0, 1.0];
    let mut best_cost = f64::INFINITY;
    let mut best_u = DVector::zeros(n);
    loop {
        let u = DVector::from_fn(n, |i, _| VALS[digits[i]]);
        let r = tsys.residual(&u);
        let terminal = sys.lambda * l2_norm_sq(&r);
        let control_term: f64 = match kind {
            CostKind::L0 => u.iter().filter(|v| v.abs() > 0.5).count() as f64 * dt,
            CostKind::L1 => u.iter().map(|v| v.abs()).sum::<f64>() * dt,
            CostKind::Psi(psi) => u.iter().map(|&v| psi.eval(v)).sum::<f64>() * dt,
        };
        let cost = control_term + terminal;
        if cost < best_cost {
            best_cost = cost;
            best_u = u;
        }
        // Odometer increment, last digit fastest: lexicographic order over
        // the flattened control, so strict improvement keeps the smallest.
        let mut pos = n;
        loop {
            if pos == 0 {
                return Ok((tsys.unstack(&best_u), best_cost));
            }
            pos -= 1;
            if digits[pos] < 2 {
                digits[pos] += 1;
                break;
            }
            digits[pos] = 0;
        }
    }
}
