//! Graphons, step graphons, their discretized integral operators, and the
//! cut norm with its operator-norm sandwich.

use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg;

/// Number of sub-samples per axis used when block-averaging an analytic
/// kernel onto a step grid.
const BLOCK_SUBSAMPLES: usize = 4;

/// Hard cap for exact cut-norm enumeration (2^14 subsets).
pub const CUT_NORM_EXACT_MAX_PARTS: usize = 14;

/// Named closed-form kernels available as built-ins.
#[derive(Debug, Clone, PartialEq)]
pub enum AnalyticKernel {
    /// `W(α, β) = (1 − max) · min`, the Green's-function kernel.
    Example1,
    /// Constant kernel with value `c ∈ [0, 1]`.
    Constant(f64),
    /// Indicator of the half-plane `α + β ≤ 1`.
    Halfplane,
}

impl AnalyticKernel {
    pub fn eval(&self, alpha: f64, beta: f64) -> f64 {
        match self {
            AnalyticKernel::Example1 => {
                let lo = alpha.min(beta);
                let hi = alpha.max(beta);
                (1.0 - hi) * lo
            }
            AnalyticKernel::Constant(c) => *c,
            AnalyticKernel::Halfplane => {
                if alpha + beta <= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn id(&self) -> &'static str {
        match self {
            AnalyticKernel::Example1 => "example1",
            AnalyticKernel::Constant(_) => "constant",
            AnalyticKernel::Halfplane => "halfplane",
        }
    }
}

/// Step-graphon weights: a symmetric `n × n` matrix, constant on each cell
/// `P_i × P_j` of the uniform partition.
#[derive(Debug, Clone, PartialEq)]
pub struct StepWeights {
    weights: DMatrix<f64>,
}

impl StepWeights {
    pub fn parts(&self) -> usize {
        self.weights.nrows()
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GraphonKind {
    Analytic(AnalyticKernel),
    Step(StepWeights),
}

/// A symmetric kernel on `[0,1]²`.
///
/// `signed == false` means membership in `𝒲₀` (values in `[0,1]`);
/// `signed == true` permits `[−1,1]` (membership in `𝒲₁`), as needed for
/// graphon differences.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphonSpec {
    kind: GraphonKind,
    signed: bool,
}

/// Partition cell containing `α` under the convention
/// `P_i = [(i−1)/n, i/n)` with the last interval closed on the right.
fn cell_index(alpha: f64, parts: usize) -> usize {
    let i = (alpha * parts as f64).floor() as usize;
    i.min(parts - 1)
}

impl GraphonSpec {
    /// Built-in kernels by string id: `example1`, `constant`, `halfplane`,
    /// and `example3` (an alias for `halfplane`).
    pub fn builtin(id: &str) -> Result<Self> {
        let kernel = match id {
            "example1" => AnalyticKernel::Example1,
            "constant" => AnalyticKernel::Constant(1.0),
            "halfplane" | "example3" => AnalyticKernel::Halfplane,
            other => {
                return Err(Error::Config(format!(
                    "unknown graphon id '{other}' (expected example1, constant, halfplane, example3)"
                )))
            }
        };
        Ok(GraphonSpec {
            kind: GraphonKind::Analytic(kernel),
            signed: false,
        })
    }

    pub fn constant(c: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&c) {
            return Err(Error::Validation(format!(
                "constant graphon value {c} outside [0, 1]"
            )));
        }
        Ok(GraphonSpec {
            kind: GraphonKind::Analytic(AnalyticKernel::Constant(c)),
            signed: false,
        })
    }

    /// Step graphon `W_G` of a weighted adjacency matrix (entries in `[0,1]`).
    pub fn from_adjacency(weights: DMatrix<f64>) -> Result<Self> {
        Self::step_checked(weights, false)
    }

    /// Signed step kernel with entries in `[−1, 1]` (a `𝒲₁` element, e.g. a
    /// difference of two graphons).
    pub fn from_step_signed(weights: DMatrix<f64>) -> Result<Self> {
        Self::step_checked(weights, true)
    }

    fn step_checked(weights: DMatrix<f64>, signed: bool) -> Result<Self> {
        if weights.nrows() == 0 || weights.nrows() != weights.ncols() {
            return Err(Error::Validation(format!(
                "step weights must be square and non-empty, got {}x{}",
                weights.nrows(),
                weights.ncols()
            )));
        }
        let lo = if signed { -1.0 } else { 0.0 };
        for i in 0..weights.nrows() {
            for j in 0..weights.ncols() {
                let w = weights[(i, j)];
                if w != weights[(j, i)] {
                    return Err(Error::Validation(format!(
                        "step weights not symmetric at ({i}, {j}): {w} vs {}",
                        weights[(j, i)]
                    )));
                }
                if !w.is_finite() || w < lo || w > 1.0 {
                    return Err(Error::Validation(format!(
                        "step weight {w} at ({i}, {j}) outside [{lo}, 1]"
                    )));
                }
            }
        }
        Ok(GraphonSpec {
            kind: GraphonKind::Step(StepWeights { weights }),
            signed,
        })
    }

    pub fn kind(&self) -> &GraphonKind {
        &self.kind
    }

    pub fn is_signed(&self) -> bool {
        self.signed
    }

    pub fn is_step(&self) -> bool {
        matches!(self.kind, GraphonKind::Step(_))
    }

    /// Partition count for step graphons.
    pub fn parts(&self) -> Option<usize> {
        match &self.kind {
            GraphonKind::Step(s) => Some(s.parts()),
            GraphonKind::Analytic(_) => None,
        }
    }

    /// Kernel value at `(α, β)`.
    pub fn eval(&self, alpha: f64, beta: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&alpha) || !(0.0..=1.0).contains(&beta) {
            return Err(Error::Domain(format!(
                "graphon evaluated outside [0,1]^2 at ({alpha}, {beta})"
            )));
        }
        Ok(match &self.kind {
            GraphonKind::Analytic(k) => k.eval(alpha, beta),
            GraphonKind::Step(s) => {
                let n = s.parts();
                s.weights[(cell_index(alpha, n), cell_index(beta, n))]
            }
        })
    }

    /// Step weights of this kernel on the uniform `parts`-grid.
    ///
    /// Analytic kernels are block-averaged (4×4 sub-samples per cell); step
    /// graphons are refined exactly and require `parts` to be a multiple of
    /// their partition count.
    pub fn step_weights_on(&self, parts: usize) -> Result<DMatrix<f64>> {
        if parts == 0 {
            return Err(Error::Validation("grid must have at least one part".into()));
        }
        match &self.kind {
            GraphonKind::Analytic(k) => {
                let mut w = DMatrix::zeros(parts, parts);
                let s = BLOCK_SUBSAMPLES;
                let scale = 1.0 / (s * s) as f64;
                for i in 0..parts {
                    for j in i..parts {
                        let mut acc = 0.0;
                        for p in 0..s {
                            let a = (i as f64 + (p as f64 + 0.5) / s as f64) / parts as f64;
                            for q in 0..s {
                                let b = (j as f64 + (q as f64 + 0.5) / s as f64) / parts as f64;
                                acc += k.eval(a, b);
                            }
                        }
                        let v = acc * scale;
                        w[(i, j)] = v;
                        w[(j, i)] = v;
                    }
                }
                Ok(w)
            }
            GraphonKind::Step(s) => {
                let n = s.parts();
                if parts % n != 0 {
                    return Err(Error::Refinement(format!(
                        "grid of {parts} parts does not refine a step graphon with {n} parts"
                    )));
                }
                let r = parts / n;
                let mut w = DMatrix::zeros(parts, parts);
                for i in 0..parts {
                    for j in 0..parts {
                        w[(i, j)] = s.weights[(i / r, j / r)];
                    }
                }
                Ok(w)
            }
        }
    }

    /// Project onto a step graphon with `parts` parts (block averages).
    pub fn project_to_step(&self, parts: usize) -> Result<GraphonSpec> {
        let w = self.step_weights_on(parts)?;
        Self::step_checked(w, self.signed)
    }

    /// Signed step kernel `self − other` on a common `parts`-grid.
    pub fn difference_on(&self, other: &GraphonSpec, parts: usize) -> Result<GraphonSpec> {
        let a = self.step_weights_on(parts)?;
        let b = other.step_weights_on(parts)?;
        Self::from_step_signed(a - b)
    }

    /// Midpoint-grid matrix of the induced integral operator (block-averaged
    /// entries, quadrature weight `1/n_s` folded in).
    ///
    /// For a step graphon `n_s` must be a multiple of the partition count,
    /// which makes the discretization exact on lifted step functions.
    pub fn discretize(&self, n_s: usize) -> Result<OperatorMatrix> {
        if n_s == 0 {
            return Err(Error::Validation("n_s must be at least 1".into()));
        }
        let w = self.step_weights_on(n_s)?;
        Ok(OperatorMatrix {
            entries: w / n_s as f64,
        })
    }

    /// Parse a step graphon from a headerless CSV matrix file.
    pub fn read_step_csv(path: &Path) -> Result<GraphonSpec> {
        let text = std::fs::read_to_string(path)?;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let row: std::result::Result<Vec<f64>, _> =
                line.split(',').map(|t| t.trim().parse::<f64>()).collect();
            let row = row.map_err(|e| {
                Error::Validation(format!(
                    "bad number in step graphon CSV {} line {}: {e}",
                    path.display(),
                    lineno + 1
                ))
            })?;
            rows.push(row);
        }
        let n = rows.len();
        if n == 0 {
            return Err(Error::Validation(format!(
                "empty step graphon CSV {}",
                path.display()
            )));
        }
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Validation(format!(
                "step graphon CSV {} is not square",
                path.display()
            )));
        }
        let m = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        Self::from_adjacency(m)
    }

    /// Write a step graphon as a headerless CSV matrix file.
    pub fn write_step_csv(&self, path: &Path) -> Result<()> {
        let s = match &self.kind {
            GraphonKind::Step(s) => s,
            GraphonKind::Analytic(_) => {
                return Err(Error::Validation(
                    "only step graphons serialize to CSV; project analytic kernels first".into(),
                ))
            }
        };
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        let n = s.parts();
        for i in 0..n {
            let row: Vec<String> = (0..n)
                .map(|j| crate::report::fmt_sig(s.weights[(i, j)]))
                .collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Discretized graphon operator on the uniform midpoint grid.
///
/// Entries are block averages of the kernel divided by `n_s`, so that the
/// matrix-vector product approximates the integral operator and is exact for
/// step graphons on aligned grids.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    entries: DMatrix<f64>,
}

impl OperatorMatrix {
    /// Wrap an explicitly-built symmetric matrix (quadrature weight already
    /// folded in).
    pub fn from_matrix(entries: DMatrix<f64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::Shape(format!(
                "operator matrix must be square, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let max_asym = (0..entries.nrows())
            .flat_map(|i| (0..i).map(move |j| (i, j)))
            .map(|(i, j)| (entries[(i, j)] - entries[(j, i)]).abs())
            .fold(0.0f64, f64::max);
        if max_asym > 1e-12 {
            return Err(Error::Validation(format!(
                "operator matrix not symmetric (max asymmetry {max_asym:.3e})"
            )));
        }
        Ok(OperatorMatrix { entries })
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn grid(&self) -> Vec<f64> {
        linalg::grid_midpoints(self.n())
    }

    /// L² operator norm of the discretized operator (= spectral radius,
    /// since the matrix is symmetric and the quadrature weight cancels in
    /// the Rayleigh quotient).
    pub fn operator_norm(&self) -> f64 {
        linalg::spectral_norm_sym(&self.entries)
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.entries * x
    }
}

/// How a cut-norm value was certified.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutCertificate {
    /// Exhaustive enumeration over subset pairs; the value is exact.
    Exact,
    /// Randomized local search; the value is a certified lower bound.
    LowerBound,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutNorm {
    pub value: f64,
    pub certificate: CutCertificate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutNormMode {
    Exact,
    /// Randomized local search with at least 32 restarts.
    Heuristic { restarts: usize, seed: u64 },
}

/// Best cut value for a fixed row subset: given `S`, the optimal column
/// subset takes all columns with positive partial sums (or all with
/// negative), so only `S` needs enumeration.
fn best_for_colsums(colsums: &[f64], inv_n2: f64) -> f64 {
    let mut pos = 0.0;
    let mut neg = 0.0;
    for &c in colsums {
        if c > 0.0 {
            pos += c;
        } else {
            neg -= c;
        }
    }
    pos.max(neg) * inv_n2
}

/// Cut norm of a step graphon:
/// `max over S,T ⊆ ⟦n⟧ of |(1/n²) Σ_{i∈S, j∈T} w_ij|`.
///
/// Analytic kernels must be projected to a step grid first.
pub fn cut_norm(g: &GraphonSpec, mode: CutNormMode) -> Result<CutNorm> {
    let step = match g.kind() {
        GraphonKind::Step(s) => s,
        GraphonKind::Analytic(_) => {
            return Err(Error::Validation(
                "cut norm requires a step graphon; project the analytic kernel to a step grid first"
                    .into(),
            ))
        }
    };
    let n = step.parts();
    let w = &step.weights;
    let inv_n2 = 1.0 / (n as f64 * n as f64);
    match mode {
        CutNormMode::Exact => {
            if n > CUT_NORM_EXACT_MAX_PARTS {
                return Err(Error::Capacity(format!(
                    "exact cut norm supports at most {CUT_NORM_EXACT_MAX_PARTS} parts, got {n}; use the heuristic mode"
                )));
            }
            // Gray-code walk over row subsets; column partial sums updated
            // incrementally by the flipped row.
            let mut colsums = vec![0.0f64; n];
            let mut best = 0.0f64;
            let mut gray_prev: u64 = 0;
            for k in 1u64..(1u64 << n) {
                let gray = k ^ (k >> 1);
                let flipped = (gray ^ gray_prev).trailing_zeros() as usize;
                let sign = if gray & (1 << flipped) != 0 { 1.0 } else { -1.0 };
                for j in 0..n {
                    colsums[j] += sign * w[(flipped, j)];
                }
                gray_prev = gray;
                best = best.max(best_for_colsums(&colsums, inv_n2));
            }
            Ok(CutNorm {
                value: best,
                certificate: CutCertificate::Exact,
            })
        }
        CutNormMode::Heuristic { restarts, seed } => {
            let restarts = restarts.max(32);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut best = 0.0f64;
            let mut colsums = vec![0.0f64; n];
            let mut in_s = vec![false; n];
            for _ in 0..restarts {
                for i in 0..n {
                    in_s[i] = rng.random::<bool>();
                }
                for j in 0..n {
                    colsums[j] = (0..n).filter(|&i| in_s[i]).map(|i| w[(i, j)]).sum();
                }
                let mut cur = best_for_colsums(&colsums, inv_n2);
                // Single-index swap moves, first-improvement sweeps.
                loop {
                    let mut improved = false;
                    for i in 0..n {
                        let sign = if in_s[i] { -1.0 } else { 1.0 };
                        for j in 0..n {
                            colsums[j] += sign * w[(i, j)];
                        }
                        let cand = best_for_colsums(&colsums, inv_n2);
                        if cand > cur + 1e-15 {
                            cur = cand;
                            in_s[i] = !in_s[i];
                            improved = true;
                        } else {
                            for j in 0..n {
                                colsums[j] -= sign * w[(i, j)];
                            }
                        }
                    }
                    if !improved {
                        break;
                    }
                }
                best = best.max(cur);
            }
            Ok(CutNorm {
                value: best,
                certificate: CutCertificate::LowerBound,
            })
        }
    }
}

/// Report for the chain `‖W‖_□ ≤ ‖T_W‖_op ≤ 2√2 ‖W‖_□^{1/2}`.
#[derive(Debug, Clone)]
pub struct SandwichReport {
    pub cut: CutNorm,
    pub operator_norm: f64,
    pub upper: f64,
    /// Whether the verified part of the chain holds within tolerance. With
    /// a heuristic (lower-bound) cut value only the second inequality is
    /// checked.
    pub holds: bool,
}

const SANDWICH_TOL: f64 = 1e-6;

/// Evaluate the sandwich inequality for a `𝒲₁` step graphon.
pub fn check_sandwich(g: &GraphonSpec, mode: CutNormMode) -> Result<SandwichReport> {
    let cut = cut_norm(g, mode)?;
    let parts = g
        .parts()
        .expect("cut_norm already rejected analytic kernels");
    let op = g.discretize(parts)?.operator_norm();
    let upper = 2.0 * 2.0f64.sqrt() * cut.value.sqrt();
    let upper_ok = op <= upper + SANDWICH_TOL;
    let holds = match cut.certificate {
        CutCertificate::Exact => cut.value <= op + SANDWICH_TOL && upper_ok,
        CutCertificate::LowerBound => upper_ok,
    };
    Ok(SandwichReport {
        cut,
        operator_norm: op,
        upper,
        holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn example1_kernel_value_at_center() {
        let g = GraphonSpec::builtin("example1").unwrap();
        assert_relative_eq!(g.eval(0.5, 0.5).unwrap(), 0.25, epsilon = 1e-15);
    }

    #[test]
    fn constant_kernel_is_one_everywhere() {
        let g = GraphonSpec::builtin("constant").unwrap();
        assert_eq!(g.eval(0.0, 1.0).unwrap(), 1.0);
        assert_eq!(g.eval(0.3, 0.7).unwrap(), 1.0);
    }

    #[test]
    fn step_identity_off_diagonal_block_is_zero() {
        let g = GraphonSpec::from_adjacency(DMatrix::identity(2, 2)).unwrap();
        assert_eq!(g.eval(0.25, 0.75).unwrap(), 0.0);
        assert_eq!(g.eval(0.25, 0.25).unwrap(), 1.0);
    }

    #[test]
    fn eval_outside_domain_is_error() {
        let g = GraphonSpec::builtin("constant").unwrap();
        assert!(matches!(g.eval(1.5, 0.0), Err(Error::Domain(_))));
        assert!(matches!(g.eval(0.0, -0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn partition_convention_last_interval_closed() {
        let w = DMatrix::from_row_slice(2, 2, &[0.1, 0.2, 0.2, 0.9]);
        let g = GraphonSpec::from_adjacency(w).unwrap();
        // α = 1 belongs to the last part.
        assert_eq!(g.eval(1.0, 1.0).unwrap(), 0.9);
        // α = 0.5 belongs to the second part (left-closed intervals).
        assert_eq!(g.eval(0.5, 0.5).unwrap(), 0.9);
        assert_eq!(g.eval(0.49, 0.49).unwrap(), 0.1);
    }

    #[test]
    fn adjacency_must_be_symmetric_and_bounded() {
        let asym = DMatrix::from_row_slice(2, 2, &[0.0, 0.3, 0.4, 0.0]);
        assert!(matches!(
            GraphonSpec::from_adjacency(asym),
            Err(Error::Validation(_))
        ));
        let oob = DMatrix::from_row_slice(2, 2, &[0.0, 1.3, 1.3, 0.0]);
        assert!(matches!(
            GraphonSpec::from_adjacency(oob),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn single_block_adjacency_is_constant_one() {
        let g = GraphonSpec::from_adjacency(DMatrix::from_element(1, 1, 1.0)).unwrap();
        assert_eq!(g.eval(0.2, 0.9).unwrap(), 1.0);
    }

    #[test]
    fn threshold_graph_blocks() {
        // a_{ij} = 1 iff i + j ≤ 5 (1-indexed), n = 4.
        let n = 4;
        let w = DMatrix::from_fn(n, n, |i, j| if i + j + 2 <= n + 1 { 1.0 } else { 0.0 });
        let g = GraphonSpec::from_adjacency(w).unwrap();
        assert_eq!(g.eval(0.05, 0.05).unwrap(), 1.0); // (1,1)
        assert_eq!(g.eval(0.95, 0.95).unwrap(), 0.0); // (4,4)
        assert_eq!(g.eval(0.05, 0.95).unwrap(), 1.0); // (1,4): 1+4 = 5
        assert_eq!(g.eval(0.30, 0.95).unwrap(), 0.0); // (2,4): 2+4 = 6
    }

    #[test]
    fn discretize_constant_two_cells() {
        let g = GraphonSpec::builtin("constant").unwrap();
        let op = g.discretize(2).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_relative_eq!(op.matrix()[(i, j)], 0.5, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn discretize_step_requires_multiple() {
        let g = GraphonSpec::from_adjacency(DMatrix::identity(3, 3)).unwrap();
        assert!(matches!(g.discretize(4), Err(Error::Refinement(_))));
        assert!(g.discretize(6).is_ok());
    }

    #[test]
    fn operator_norm_zero_and_constant() {
        let z = GraphonSpec::from_adjacency(DMatrix::zeros(3, 3)).unwrap();
        assert_eq!(z.discretize(3).unwrap().operator_norm(), 0.0);
        let c = GraphonSpec::builtin("constant").unwrap();
        assert_relative_eq!(
            c.discretize(50).unwrap().operator_norm(),
            1.0,
            epsilon = 1e-10
        );
    }

    #[test]
    fn example1_top_eigenvalue_near_continuum() {
        let g = GraphonSpec::builtin("example1").unwrap();
        let op = g.discretize(200).unwrap();
        let target = 1.0 / (std::f64::consts::PI * std::f64::consts::PI);
        assert!((op.operator_norm() - target).abs() < 1e-3);
    }

    #[test]
    fn cut_norm_zero_graphon() {
        let g = GraphonSpec::from_adjacency(DMatrix::zeros(3, 3)).unwrap();
        let c = cut_norm(&g, CutNormMode::Exact).unwrap();
        assert_eq!(c.value, 0.0);
        assert_eq!(c.certificate, CutCertificate::Exact);
    }

    #[test]
    fn cut_norm_constant_graphon() {
        for c in [0.3, 1.0] {
            let g = GraphonSpec::constant(c).unwrap().project_to_step(4).unwrap();
            let r = cut_norm(&g, CutNormMode::Exact).unwrap();
            assert_relative_eq!(r.value, c, epsilon = 1e-12);
        }
    }

    /// Brute-force oracle over all subset pairs, used to freeze expected
    /// values independently of the production enumeration.
    fn cut_norm_oracle(w: &DMatrix<f64>) -> f64 {
        let n = w.nrows();
        let inv = 1.0 / (n as f64 * n as f64);
        let mut best = 0.0f64;
        for s in 0u64..(1 << n) {
            for t in 0u64..(1 << n) {
                let mut acc = 0.0;
                for i in 0..n {
                    if s & (1 << i) == 0 {
                        continue;
                    }
                    for j in 0..n {
                        if t & (1 << j) != 0 {
                            acc += w[(i, j)];
                        }
                    }
                }
                best = best.max(acc.abs() * inv);
            }
        }
        best
    }

    #[test]
    fn cut_norm_two_part_signed_matches_enumeration() {
        let w = DMatrix::from_row_slice(2, 2, &[0.5, -0.5, -0.5, 0.5]);
        let g = GraphonSpec::from_step_signed(w.clone()).unwrap();
        let r = cut_norm(&g, CutNormMode::Exact).unwrap();
        // Frozen from the subset-pair oracle: best is a single diagonal cell.
        assert_relative_eq!(cut_norm_oracle(&w), 0.125, epsilon = 1e-15);
        assert_relative_eq!(r.value, 0.125, epsilon = 1e-12);
    }

    #[test]
    fn cut_norm_exact_matches_oracle_on_random_signed() {
        let mut seed = 99u64;
        let mut next = move || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        for n in [2usize, 3, 5] {
            for _ in 0..5 {
                let mut w = DMatrix::zeros(n, n);
                for i in 0..n {
                    for j in i..n {
                        let v = next();
                        w[(i, j)] = v;
                        w[(j, i)] = v;
                    }
                }
                let g = GraphonSpec::from_step_signed(w.clone()).unwrap();
                let r = cut_norm(&g, CutNormMode::Exact).unwrap();
                assert_relative_eq!(r.value, cut_norm_oracle(&w), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn cut_norm_exact_capacity_error() {
        let g = GraphonSpec::from_adjacency(DMatrix::zeros(15, 15)).unwrap();
        assert!(matches!(
            cut_norm(&g, CutNormMode::Exact),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn heuristic_never_exceeds_exact() {
        let mut seed = 1234u64;
        let mut next = move || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (seed >> 11) as f64 / (1u64 << 53) as f64
        };
        for trial in 0..10 {
            let n = 6;
            let mut w = DMatrix::zeros(n, n);
            for i in 0..n {
                for j in i..n {
                    let v = next() * 2.0 - 1.0;
                    w[(i, j)] = v;
                    w[(j, i)] = v;
                }
            }
            let g = GraphonSpec::from_step_signed(w).unwrap();
            let exact = cut_norm(&g, CutNormMode::Exact).unwrap().value;
            let heur = cut_norm(
                &g,
                CutNormMode::Heuristic {
                    restarts: 32,
                    seed: trial,
                },
            )
            .unwrap()
            .value;
            assert!(heur <= exact + 1e-12, "heuristic {heur} > exact {exact}");
        }
    }

    #[test]
    fn sandwich_zero_and_constant() {
        let z = GraphonSpec::from_adjacency(DMatrix::zeros(3, 3)).unwrap();
        let r = check_sandwich(&z, CutNormMode::Exact).unwrap();
        assert!(r.holds);
        assert_eq!(r.cut.value, 0.0);
        assert_eq!(r.operator_norm, 0.0);

        let c = GraphonSpec::constant(1.0).unwrap().project_to_step(3).unwrap();
        let r = check_sandwich(&c, CutNormMode::Exact).unwrap();
        assert!(r.holds);
        assert_relative_eq!(r.cut.value, 1.0, epsilon = 1e-12);
        assert_relative_eq!(r.operator_norm, 1.0, epsilon = 1e-9);
        assert_relative_eq!(r.upper, 2.0 * 2.0f64.sqrt(), epsilon = 1e-9);
    }

    #[test]
    fn step_csv_round_trip() {
        let dir = std::env::temp_dir().join("graphon_csv_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("g.csv");
        let w = DMatrix::from_row_slice(2, 2, &[0.25, 0.5, 0.5, 1.0]);
        let g = GraphonSpec::from_adjacency(w).unwrap();
        g.write_step_csv(&path).unwrap();
        let back = GraphonSpec::read_step_csv(&path).unwrap();
        assert_eq!(g, back);
    }
}
