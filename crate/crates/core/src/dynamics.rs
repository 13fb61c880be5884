//! Discretized linear dynamics: matrix exponentials, mild-solution
//! propagation under piecewise-constant controls, and the switching
//! function.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graphon::OperatorMatrix;
use crate::linalg::{self, l2_inner};

/// System `(A; B; x0)` with target `xf`, horizon `T`, weight `λ`, and a
/// uniform grid of `K` control intervals.
#[derive(Debug, Clone)]
pub struct DiscretizedSystem {
    pub a: OperatorMatrix,
    /// Input profiles as columns: `n_s × m`.
    pub b: DMatrix<f64>,
    pub x0: DVector<f64>,
    pub xf: DVector<f64>,
    pub horizon: f64,
    pub lambda: f64,
    pub steps: usize,
}

impl DiscretizedSystem {
    pub fn new(
        a: OperatorMatrix,
        b: DMatrix<f64>,
        x0: DVector<f64>,
        xf: DVector<f64>,
        horizon: f64,
        lambda: f64,
        steps: usize,
    ) -> Result<Self> {
        let n = a.n();
        if b.nrows() != n || x0.len() != n || xf.len() != n {
            return Err(Error::Shape(format!(
                "system dimensions disagree: A is {n}x{n}, B has {} rows, x0 len {}, xf len {}",
                b.nrows(),
                x0.len(),
                xf.len()
            )));
        }
        if b.ncols() == 0 {
            return Err(Error::Validation("at least one input channel required".into()));
        }
        if steps == 0 {
            return Err(Error::Validation("at least one time step required".into()));
        }
        if !(horizon > 0.0) {
            return Err(Error::Validation(format!("horizon must be positive, got {horizon}")));
        }
        if !(lambda >= 0.0) {
            return Err(Error::Validation(format!(
                "regularization weight must be non-negative, got {lambda}"
            )));
        }
        Ok(DiscretizedSystem {
            a,
            b,
            x0,
            xf,
            horizon,
            lambda,
            steps,
        })
    }

    pub fn n_s(&self) -> usize {
        self.a.n()
    }

    pub fn channels(&self) -> usize {
        self.b.ncols()
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    /// Midpoints of the control intervals.
    pub fn time_midpoints(&self) -> Vec<f64> {
        let dt = self.dt();
        (0..self.steps).map(|k| (k as f64 + 0.5) * dt).collect()
    }
}

/// `m` channels of piecewise-constant values on the uniform `K`-grid,
/// bounded in `[−1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSignal {
    values: DMatrix<f64>,
}

impl ControlSignal {
    pub fn zero(steps: usize, channels: usize) -> Self {
        ControlSignal {
            values: DMatrix::zeros(steps, channels),
        }
    }

    /// Validates the `‖u‖_∞ ≤ 1` admissibility bound.
    pub fn from_matrix(values: DMatrix<f64>) -> Result<Self> {
        for v in values.iter() {
            if !v.is_finite() || v.abs() > 1.0 + 1e-12 {
                return Err(Error::Admissibility(format!(
                    "control value {v} outside [-1, 1]"
                )));
            }
        }
        Ok(ControlSignal { values })
    }

    pub(crate) fn from_matrix_unchecked(values: DMatrix<f64>) -> Self {
        ControlSignal { values }
    }

    pub fn steps(&self) -> usize {
        self.values.nrows()
    }

    pub fn channels(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn row(&self, k: usize) -> DVector<f64> {
        self.values.row(k).transpose()
    }
}

/// Matrix exponential `e^{M t}` by scaling and squaring with the diagonal
/// Padé approximant of order 13.
pub fn matrix_exponential(m: &DMatrix<f64>, t: f64) -> Result<DMatrix<f64>> {
    if m.nrows() != m.ncols() {
        return Err(Error::Shape(format!(
            "matrix exponential needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|v| !v.is_finite()) || !t.is_finite() {
        return Err(Error::Validation("matrix exponential of non-finite input".into()));
    }
    let n = m.nrows();
    let a = m * t;

    // Padé order-13 numerator coefficients.
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    const THETA_13: f64 = 5.371920351148152;

    let norm = linalg::norm_1(&a);
    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil() as i32
    } else {
        0
    };
    let a = a / 2f64.powi(s);

    let eye = DMatrix::<f64>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;

    let u_inner = &a6 * (B[13] * &a6 + B[11] * &a4 + B[9] * &a2)
        + B[7] * &a6
        + B[5] * &a4
        + B[3] * &a2
        + B[1] * &eye;
    let u = &a * u_inner;
    let v = &a6 * (B[12] * &a6 + B[10] * &a4 + B[8] * &a2)
        + B[6] * &a6
        + B[4] * &a4
        + B[2] * &a2
        + B[0] * &eye;

    let denom = &v - &u;
    let numer = &v + &u;
    let mut r = denom
        .lu()
        .solve(&numer)
        .ok_or_else(|| Error::Divergence("singular Padé denominator in matrix exponential".into()))?;
    for _ in 0..s {
        r = &r * &r;
    }
    Ok(r)
}

/// Exact one-step transition data for the mild solution on the uniform grid.
///
/// `x(T) = free + Σ_k Γ_k u_k`, with `Φ = e^{A Δ}`, `Ψ = ∫_0^Δ e^{A s} ds`,
/// and `Γ_k = Φ^{K−1−k} Ψ B`.
#[derive(Debug, Clone)]
pub struct TerminalMap {
    pub phi: DMatrix<f64>,
    pub psi: DMatrix<f64>,
    /// `Ψ B`, the per-step input map (`n_s × m`).
    pub psi_b: DMatrix<f64>,
    /// `Γ_k` for `k = 0..K`.
    pub gammas: Vec<DMatrix<f64>>,
    /// Free response `e^{A T} x0`.
    pub free: DVector<f64>,
}

/// Build the terminal map.
///
/// `Ψ` comes from the augmented block exponential of `[[A, I], [0, 0]]`, so
/// singular generators need no special handling.
pub fn build_terminal_map(sys: &DiscretizedSystem) -> Result<TerminalMap> {
    let n = sys.n_s();
    let dt = sys.dt();
    let mut aug = DMatrix::zeros(2 * n, 2 * n);
    aug.view_mut((0, 0), (n, n)).copy_from(sys.a.matrix());
    aug.view_mut((0, n), (n, n))
        .copy_from(&DMatrix::identity(n, n));
    let e = matrix_exponential(&aug, dt)?;
    let phi = e.view((0, 0), (n, n)).into_owned();
    let psi = e.view((0, n), (n, n)).into_owned();
    let psi_b = &psi * &sys.b;

    let k = sys.steps;
    let mut gammas = vec![DMatrix::zeros(n, sys.channels()); k];
    gammas[k - 1] = psi_b.clone();
    for i in (0..k - 1).rev() {
        gammas[i] = &phi * &gammas[i + 1];
    }
    let mut free = sys.x0.clone();
    for _ in 0..k {
        free = &phi * free;
    }
    Ok(TerminalMap {
        phi,
        psi,
        psi_b,
        gammas,
        free,
    })
}

impl TerminalMap {
    pub fn terminal_state(&self, u: &ControlSignal) -> DVector<f64> {
        let mut x = self.free.clone();
        for (k, gamma) in self.gammas.iter().enumerate() {
            x += gamma * u.row(k);
        }
        x
    }
}

/// Propagate the mild solution: `x_{k+1} = Φ x_k + Ψ B u_k`.
///
/// Returns the `K + 1` states on the grid knots.
pub fn propagate(sys: &DiscretizedSystem, u: &ControlSignal) -> Result<Vec<DVector<f64>>> {
    propagate_with(sys, &build_terminal_map(sys)?, u)
}

pub fn propagate_with(
    sys: &DiscretizedSystem,
    tm: &TerminalMap,
    u: &ControlSignal,
) -> Result<Vec<DVector<f64>>> {
    if u.steps() != sys.steps || u.channels() != sys.channels() {
        return Err(Error::Shape(format!(
            "control grid {}x{} does not match system grid {}x{}",
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
    let mut states = Vec::with_capacity(sys.steps + 1);
    states.push(sys.x0.clone());
    let mut x = sys.x0.clone();
    for k in 0..sys.steps {
        x = &tm.phi * &x + &tm.psi_b * u.row(k);
        states.push(x.clone());
    }
    Ok(states)
}

/// Switching function sampled at interval midpoints:
/// `θ_{k,j} = 2λ (xT − xf, e^{A(T − t_k)} b_j)`.
///
/// Uses the symmetry of `A` to push the semigroup onto the residual:
/// `e^{A(T−t_k)} = Φ^{K−1−k} e^{A Δ/2}`.
pub fn switching_function(sys: &DiscretizedSystem, x_terminal: &DVector<f64>) -> Result<DMatrix<f64>> {
    switching_function_with(sys, &build_terminal_map(sys)?, x_terminal)
}

pub fn switching_function_with(
    sys: &DiscretizedSystem,
    tm: &TerminalMap,
    x_terminal: &DVector<f64>,
) -> Result<DMatrix<f64>> {
    if x_terminal.len() != sys.n_s() {
        return Err(Error::Shape(format!(
            "terminal state length {} does not match grid {}",
            x_terminal.len(),
            sys.n_s()
        )));
    }
    let half = matrix_exponential(sys.a.matrix(), sys.dt() / 2.0)?;
    let residual = x_terminal - &sys.xf;
    let mut y = &half * residual;
    let k = sys.steps;
    let m = sys.channels();
    let mut theta = DMatrix::zeros(k, m);
    for step in (0..k).rev() {
        for j in 0..m {
            let b_j = sys.b.column(j).into_owned();
            theta[(step, j)] = 2.0 * sys.lambda * l2_inner(&y, &b_j);
        }
        if step > 0 {
            y = &tm.phi * y;
        }
    }
    Ok(theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphon::GraphonSpec;
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;

    fn lcg(seed: &mut u64) -> f64 {
        *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((*seed >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    }

    fn random_symmetric(n: usize, seed: &mut u64, scale: f64) -> DMatrix<f64> {
        let raw = DMatrix::from_fn(n, n, |_, _| lcg(seed));
        (&raw + raw.transpose()) * (0.5 * scale)
    }

    #[test]
    fn expm_zero_is_identity() {
        let m = DMatrix::zeros(4, 4);
        let e = matrix_exponential(&m, 1.0).unwrap();
        assert_relative_eq!(e, DMatrix::identity(4, 4), epsilon = 1e-14);
    }

    #[test]
    fn expm_diagonal() {
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.5, -1.0, 2.0]));
        let e = matrix_exponential(&d, 2.0).unwrap();
        for (i, want) in [1.0f64, -2.0, 4.0].iter().enumerate() {
            assert_relative_eq!(e[(i, i)], want.exp(), max_relative = 1e-13);
        }
    }

    #[test]
    fn expm_rejects_non_square() {
        let m = DMatrix::zeros(2, 3);
        assert!(matches!(matrix_exponential(&m, 1.0), Err(Error::Shape(_))));
    }

    /// Truncated Taylor-series oracle. With `‖At‖₁ ≤ 2` the 60-term tail is
    /// below 2^60/60! ≈ 1e-64, far under the comparison tolerance.
    fn expm_taylor(m: &DMatrix<f64>, t: f64) -> DMatrix<f64> {
        let n = m.nrows();
        let a = m * t;
        let mut acc = DMatrix::<f64>::identity(n, n);
        let mut term = DMatrix::<f64>::identity(n, n);
        for k in 1..=60 {
            term = &term * &a / k as f64;
            acc += &term;
        }
        acc
    }

    #[test]
    fn expm_matches_taylor_oracle() {
        let mut seed = 42u64;
        for _ in 0..10 {
            let m = random_symmetric(3, &mut seed, 1.0);
            let e = matrix_exponential(&m, 1.0).unwrap();
            let oracle = expm_taylor(&m, 1.0);
            assert!((e - oracle).norm() < 1e-10);
        }
    }

    #[test]
    fn expm_semigroup_property() {
        let mut seed = 7u64;
        for trial in 0..10 {
            let m = random_symmetric(5, &mut seed, 1.0);
            let t = 0.1 + (trial as f64) * 0.2;
            let s = 2.0 - (trial as f64) * 0.15;
            let e_ts = matrix_exponential(&m, t + s).unwrap();
            let prod = matrix_exponential(&m, t).unwrap() * matrix_exponential(&m, s).unwrap();
            let diff = crate::linalg::spectral_norm_sym(&((&e_ts + e_ts.transpose()) * 0.5))
                - crate::linalg::spectral_norm_sym(&((&prod + prod.transpose()) * 0.5));
            assert!((e_ts - prod).norm() < 1e-10, "semigroup violation {diff}");
        }
    }

    fn toy_system(n: usize, k: usize) -> DiscretizedSystem {
        let g = GraphonSpec::builtin("example1").unwrap();
        let a = g.discretize(n).unwrap();
        let mid = crate::linalg::grid_midpoints(n);
        let b = DMatrix::from_fn(n, 1, |i, _| if mid[i] <= 0.5 { 1.0 } else { 0.0 });
        let x0 = nalgebra::DVector::from_fn(n, |i, _| (mid[i] * 3.0).sin());
        let xf = nalgebra::DVector::zeros(n);
        DiscretizedSystem::new(a, b, x0, xf, 2.0, 10.0, k).unwrap()
    }

    #[test]
    fn zero_generator_terminal_map() {
        let n = 4;
        let a = OperatorMatrix::from_matrix(DMatrix::zeros(n, n)).unwrap();
        let b = DMatrix::from_element(n, 1, 1.0);
        let x0 = nalgebra::DVector::from_element(n, 2.0);
        let xf = nalgebra::DVector::zeros(n);
        let sys = DiscretizedSystem::new(a, b, x0, xf, 1.0, 1.0, 5).unwrap();
        let tm = build_terminal_map(&sys).unwrap();
        let dt = sys.dt();
        assert_relative_eq!(tm.phi, DMatrix::identity(n, n), epsilon = 1e-13);
        assert_relative_eq!(tm.psi, DMatrix::identity(n, n) * dt, epsilon = 1e-13);
        for gamma in &tm.gammas {
            assert_relative_eq!(*gamma, &sys.b * dt, epsilon = 1e-12);
        }
        // u ≡ 1 ⇒ x(T) = x0 + T·b.
        let u = ControlSignal::from_matrix(DMatrix::from_element(5, 1, 1.0)).unwrap();
        let x_t = tm.terminal_state(&u);
        assert_relative_eq!(x_t, &sys.x0 + &sys.b * 1.0, epsilon = 1e-12);
    }

    #[test]
    fn single_step_mild_solution() {
        let sys = {
            let mut s = toy_system(6, 1);
            s.horizon = 0.7;
            s
        };
        let tm = build_terminal_map(&sys).unwrap();
        let u = ControlSignal::from_matrix(DMatrix::from_element(1, 1, 0.5)).unwrap();
        let expect = matrix_exponential(sys.a.matrix(), 0.7).unwrap() * &sys.x0
            + &tm.psi * &sys.b * 0.5;
        assert_relative_eq!(tm.terminal_state(&u), expect, epsilon = 1e-10);
    }

    /// Classic fixed-step RK4 on `ẋ = Ax + Bu` with piecewise-constant `u`.
    fn rk4_oracle(sys: &DiscretizedSystem, u: &ControlSignal, substeps: usize) -> DVector<f64> {
        let dt = sys.dt();
        let h = dt / substeps as f64;
        let a = sys.a.matrix();
        let mut x = sys.x0.clone();
        for k in 0..sys.steps {
            let bu = &sys.b * u.row(k);
            for _ in 0..substeps {
                let k1 = a * &x + &bu;
                let k2 = a * (&x + &k1 * (h / 2.0)) + &bu;
                let k3 = a * (&x + &k2 * (h / 2.0)) + &bu;
                let k4 = a * (&x + &k3 * h) + &bu;
                x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
            }
        }
        x
    }

    #[test]
    fn terminal_map_matches_rk4() {
        let sys = toy_system(8, 6);
        let mut seed = 3u64;
        let vals = DMatrix::from_fn(6, 1, |_, _| lcg(&mut seed));
        let u = ControlSignal::from_matrix(vals).unwrap();
        let tm = build_terminal_map(&sys).unwrap();
        let direct = tm.terminal_state(&u);
        let oracle = rk4_oracle(&sys, &u, 64);
        assert!(
            crate::linalg::l2_norm(&(direct - oracle)) < 1e-7,
            "terminal map disagrees with RK4"
        );
    }

    #[test]
    fn propagate_free_response() {
        let sys = toy_system(6, 4);
        let u = ControlSignal::zero(4, 1);
        let states = propagate(&sys, &u).unwrap();
        let expect = matrix_exponential(sys.a.matrix(), sys.horizon).unwrap() * &sys.x0;
        assert_relative_eq!(states[4], expect, epsilon = 1e-10);
    }

    #[test]
    fn propagate_terminal_matches_terminal_map() {
        let sys = toy_system(6, 9);
        let mut seed = 11u64;
        let vals = DMatrix::from_fn(9, 1, |_, _| lcg(&mut seed));
        let u = ControlSignal::from_matrix(vals).unwrap();
        let tm = build_terminal_map(&sys).unwrap();
        let states = propagate_with(&sys, &tm, &u).unwrap();
        assert!(crate::linalg::l2_norm(&(states[9].clone() - tm.terminal_state(&u))) < 1e-10);
    }

    #[test]
    fn propagate_rejects_bad_inputs() {
        let sys = toy_system(6, 4);
        let wrong_grid = ControlSignal::zero(5, 1);
        assert!(matches!(
            propagate(&sys, &wrong_grid),
            Err(Error::Shape(_))
        ));
        let inadmissible = ControlSignal::from_matrix_unchecked(DMatrix::from_element(4, 1, 1.5));
        assert!(matches!(
            propagate(&sys, &inadmissible),
            Err(Error::Admissibility(_))
        ));
    }

    #[test]
    fn propagate_is_affine_in_u() {
        let sys = toy_system(6, 5);
        let tm = build_terminal_map(&sys).unwrap();
        let mut seed = 5u64;
        let u1 = DMatrix::from_fn(5, 1, |_, _| 0.5 * lcg(&mut seed));
        let u2 = DMatrix::from_fn(5, 1, |_, _| 0.4 * lcg(&mut seed));
        let z = ControlSignal::zero(5, 1);
        let free = propagate_with(&sys, &tm, &z).unwrap()[5].clone();
        let x1 = propagate_with(&sys, &tm, &ControlSignal::from_matrix(u1.clone()).unwrap()).unwrap()[5].clone();
        let x2 = propagate_with(&sys, &tm, &ControlSignal::from_matrix(u2.clone()).unwrap()).unwrap()[5].clone();
        let x12 = propagate_with(&sys, &tm, &ControlSignal::from_matrix(&u1 + &u2).unwrap()).unwrap()[5].clone();
        let lhs = x12 - &free;
        let rhs = (x1 - &free) + (x2 - &free);
        assert!(crate::linalg::l2_norm(&(lhs - rhs)) < 1e-10);
    }

    #[test]
    fn switching_function_zero_residual() {
        let sys = toy_system(6, 4);
        let theta = switching_function(&sys, &sys.xf.clone()).unwrap();
        assert!(theta.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn switching_function_linear_in_lambda() {
        let sys = toy_system(6, 4);
        let mut sys2 = sys.clone();
        sys2.lambda = 2.0 * sys.lambda;
        let x_t = &sys.x0 * 0.5;
        let t1 = switching_function(&sys, &x_t).unwrap();
        let t2 = switching_function(&sys2, &x_t).unwrap();
        assert_relative_eq!(t2, t1 * 2.0, epsilon = 1e-12);
    }

    /// First derivative identity: `dθ_j/dt = −2λ (xT − xf, e^{A(T−t)} A b_j)`,
    /// checked against central differences of θ itself.
    #[test]
    fn switching_function_derivative_identity() {
        let sys = {
            let mut s = toy_system(10, 400);
            s.horizon = 2.0;
            s
        };
        let x_t = &sys.x0 * 0.3;
        let theta = switching_function(&sys, &x_t).unwrap();
        let tm = build_terminal_map(&sys).unwrap();
        let half = matrix_exponential(sys.a.matrix(), sys.dt() / 2.0).unwrap();
        let residual = &x_t - &sys.xf;
        let a_b = sys.a.matrix() * &sys.b;
        let dt = sys.dt();
        // Analytic derivative at midpoint t_k, built the same backward way.
        let mut y = &half * residual;
        let mut deriv = vec![0.0f64; sys.steps];
        for step in (0..sys.steps).rev() {
            deriv[step] = -2.0 * sys.lambda * l2_inner(&y, &a_b.column(0).into_owned());
            if step > 0 {
                y = &tm.phi * y;
            }
        }
        let mut checked = 0;
        for k in 1..sys.steps - 1 {
            let fd = (theta[(k + 1, 0)] - theta[(k - 1, 0)]) / (2.0 * dt);
            let an = deriv[k];
            if an.abs() > 1e-8 {
                assert!(
                    ((fd - an) / an).abs() < 1e-4,
                    "derivative mismatch at k={k}: fd={fd}, analytic={an}"
                );
                checked += 1;
            }
        }
        assert!(checked > 100);
    }
}
