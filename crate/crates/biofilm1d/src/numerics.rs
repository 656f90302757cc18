//! Small dense kernels: composite trapezoid quadrature, the Thomas algorithm
//! for tridiagonal systems, and cubic Hermite interpolation.
//!
//! Everything here works on plain slices over a uniform grid. The solvers are
//! built around second-order discretizations, and the trapezoid rule is used
//! consistently (including in nested/cumulative form) so that discrete
//! identities such as the flux identity hold to the same order.

/// Composite trapezoid rule for samples on a uniform grid with spacing `dx`.
pub fn trapezoid(values: &[f64], dx: f64) -> f64 {
    debug_assert!(values.len() >= 2);
    let interior: f64 = values[1..values.len() - 1].iter().sum();
    dx * (0.5 * (values[0] + values[values.len() - 1]) + interior)
}

/// Cumulative trapezoid: `out[i] = ∫₀^{x_i}` of the sampled integrand, with
/// `out[0] = 0`. Same length as the input.
pub fn cumulative_trapezoid(values: &[f64], dx: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.push(0.0);
    for pair in values.windows(2) {
        acc += 0.5 * dx * (pair[0] + pair[1]);
        out.push(acc);
    }
    out
}

/// Thomas algorithm. `lower` and `upper` have length `n − 1`, `diag` and
/// `rhs` length `n`. The matrices assembled in this crate are strictly
/// diagonally dominant, so no pivoting is performed.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    assert!(n >= 2, "tridiagonal system needs at least two rows");
    assert_eq!(lower.len(), n - 1);
    assert_eq!(upper.len(), n - 1);
    assert_eq!(rhs.len(), n);

    let mut c_prime = vec![0.0; n - 1];
    let mut d_prime = vec![0.0; n];

    c_prime[0] = upper[0] / diag[0];
    d_prime[0] = rhs[0] / diag[0];
    for i in 1..n {
        let denom = diag[i] - lower[i - 1] * c_prime[i - 1];
        if i < n - 1 {
            c_prime[i] = upper[i] / denom;
        }
        d_prime[i] = (rhs[i] - lower[i - 1] * d_prime[i - 1]) / denom;
    }

    let mut x = d_prime;
    for i in (0..n - 1).rev() {
        let next = x[i + 1];
        x[i] -= c_prime[i] * next;
    }
    x
}

/// Cubic Hermite interpolation of a scalar component between two states with
/// known derivatives. Exact for cubics; used as dense output between accepted
/// integrator steps.
pub fn hermite(t0: f64, y0: f64, f0: f64, t1: f64, y1: f64, f1: f64, t: f64) -> f64 {
    let dt = t1 - t0;
    if dt == 0.0 {
        return y0;
    }
    let s = (t - t0) / dt;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    h00 * y0 + h10 * dt * f0 + h01 * y1 + h11 * dt * f1
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid(n: usize) -> (Vec<f64>, f64) {
        let dx = 1.0 / n as f64;
        ((0..=n).map(|i| i as f64 * dx).collect(), dx)
    }

    #[test]
    fn trapezoid_is_exact_for_linear_integrands() {
        let (xs, dx) = grid(17);
        let vals: Vec<f64> = xs.iter().map(|x| 3.0 * x - 1.0).collect();
        assert_relative_eq!(trapezoid(&vals, dx), 0.5, max_relative = 1e-14);
    }

    #[test]
    fn trapezoid_halving_the_grid_quarters_the_error() {
        // Smooth integrand with a known value: ∫₀¹ eˣ dx = e − 1.
        let exact = std::f64::consts::E - 1.0;
        let err = |n: usize| {
            let (xs, dx) = grid(n);
            let vals: Vec<f64> = xs.iter().map(|x| x.exp()).collect();
            (trapezoid(&vals, dx) - exact).abs()
        };
        let ratio = err(64) / err(128);
        assert!(
            (ratio - 4.0).abs() < 0.8,
            "expected second-order convergence, got ratio {ratio}"
        );
    }

    #[test]
    fn cumulative_trapezoid_matches_total_and_is_exact_on_linears() {
        let (xs, dx) = grid(32);
        let vals: Vec<f64> = xs.iter().map(|x| 2.0 * x).collect();
        let cum = cumulative_trapezoid(&vals, dx);
        // ∫₀^x 2t dt = x²; the trapezoid rule is exact for linear integrands.
        for (x, c) in xs.iter().zip(&cum) {
            assert_relative_eq!(*c, x * x, epsilon = 1e-14);
        }
        assert_relative_eq!(*cum.last().unwrap(), trapezoid(&vals, dx), epsilon = 1e-14);
    }

    #[test]
    fn tridiagonal_reproduces_a_dense_solve() {
        // -u'' = 1 on (0,1), u(0)=u(1)=0 discretized at 5 interior points has
        // the exact discrete solution u_i = x_i (1-x_i) / 2.
        let n = 5;
        let dx: f64 = 1.0 / (n as f64 + 1.0);
        let lower = vec![-1.0; n - 1];
        let upper = vec![-1.0; n - 1];
        let diag = vec![2.0; n];
        let rhs = vec![dx * dx; n];
        let x = solve_tridiagonal(&lower, &diag, &upper, &rhs);
        for (i, xi) in x.iter().enumerate() {
            let node = (i as f64 + 1.0) * dx;
            assert_relative_eq!(*xi, 0.5 * node * (1.0 - node), epsilon = 1e-14);
        }
    }

    #[test]
    fn hermite_is_exact_for_cubics() {
        let p = |t: f64| 1.0 + t - 2.0 * t * t + 0.5 * t * t * t;
        let dp = |t: f64| 1.0 - 4.0 * t + 1.5 * t * t;
        let (t0, t1) = (0.3, 1.1);
        for k in 0..=10 {
            let t = t0 + (t1 - t0) * k as f64 / 10.0;
            let v = hermite(t0, p(t0), dp(t0), t1, p(t1), dp(t1), t);
            assert_relative_eq!(v, p(t), epsilon = 1e-13);
        }
    }
}
