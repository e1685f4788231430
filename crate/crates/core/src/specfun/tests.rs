use super::*;

#[test]
fn bessel_limits_and_frozen_values() {
    // j0(pi) = sin(pi)/pi = 0
    assert!(spherical_bessel_j(0, std::f64::consts::PI).unwrap().abs() < 1e-15);
    assert_eq!(spherical_bessel_j(1, 0.0).unwrap(), 0.0);
    assert_eq!(spherical_bessel_j(0, 0.0).unwrap(), 1.0);
    // frozen extended-precision reference for j2(0.1); the truncated series
    // x^2/15 (1 - x^2/14 + x^4/504) agrees with it to its own truncation
    // error of ~2e-14
    let frozen = 6.661906084455687e-4;
    let x: f64 = 0.1;
    let series = x * x / 15.0 * (1.0 - x * x / 14.0 + x.powi(4) / 504.0);
    assert!((series - frozen).abs() < 1e-13);
    assert!((spherical_bessel_j(2, 0.1).unwrap() - frozen).abs() < 5e-18);
    assert!(spherical_bessel_j(1, -0.5).is_err());
}

#[test]
fn bessel_vs_closed_forms() {
    // j1 = sin x / x^2 - cos x / x; j2 = (3/x^3 - 1/x) sin x - 3 cos x / x^2
    // x well away from zero: the closed forms lose accuracy to cancellation
    // at small argument
    for &x in &[0.4f64, 1.0, 2.5, 7.0, 31.4, 250.0, 9000.0] {
        let j1 = x.sin() / (x * x) - x.cos() / x;
        let j2 = (3.0 / x.powi(3) - 1.0 / x) * x.sin() - 3.0 * x.cos() / (x * x);
        assert!((spherical_bessel_j(1, x).unwrap() - j1).abs() <= 1e-12 * j1.abs().max(1e-3));
        assert!((spherical_bessel_j(2, x).unwrap() - j2).abs() <= 1e-12 * j2.abs().max(1e-3));
    }
}

#[test]
fn bessel_recurrence_residual() {
    // |j_{L-1} + j_{L+1} - (2L+1)/x j_L| small over a wide range
    for l in 1..=12u32 {
        for &x in &[0.01, 0.1, 1.0, 3.0, 10.0, 55.0, 200.0, 1000.0] {
            let jm = sbessel(l - 1, x);
            let jc = sbessel(l, x);
            let jp = sbessel(l + 1, x);
            let resid = (jm + jp - (2 * l + 1) as f64 / x * jc).abs();
            let scale = jm.abs().max(jc.abs());
            assert!(
                resid <= 1e-12 * scale.max(1e-290),
                "L={l} x={x}: resid {resid:e} scale {scale:e}"
            );
        }
    }
}

#[test]
fn gauss_legendre_exactness() {
    let (x, w) = gauss_legendre(1, -1.0, 1.0).unwrap();
    assert!(x[0].abs() < 1e-15 && (w[0] - 2.0).abs() < 1e-15);

    // n=5 integrates x^8 exactly on [-1,1]: 2/9
    let (x, w) = gauss_legendre(5, -1.0, 1.0).unwrap();
    let s: f64 = x.iter().zip(&w).map(|(xi, wi)| xi.powi(8) * wi).sum();
    assert!((s - 2.0 / 9.0).abs() < 1e-15);

    // n=16 on [0, pi]: integral of sin = 2
    let (x, w) = gauss_legendre(16, 0.0, std::f64::consts::PI).unwrap();
    let s: f64 = x.iter().zip(&w).map(|(xi, wi)| xi.sin() * wi).sum();
    assert!((s - 2.0).abs() < 1e-13);

    assert!(gauss_legendre(4, 1.0, 1.0).is_err());
}

#[test]
fn gauss_legendre_symmetry_and_weight_sum() {
    for n in [2, 7, 16, 33, 64] {
        let (a, b) = (0.3, 2.9);
        let (x, w) = gauss_legendre(n, a, b).unwrap();
        let sum: f64 = w.iter().sum();
        assert!((sum - (b - a)).abs() < 1e-13);
        for i in 0..n {
            assert!((x[i] - (a + b - x[n - 1 - i])).abs() < 1e-12);
            assert!((w[i] - w[n - 1 - i]).abs() < 1e-13);
            assert!(w[i] > 0.0);
        }
    }
}

#[test]
fn spline_partition_of_unity() {
    let bp = graded_breakpoints(1e-4, 10.0, 20);
    let basis = SplineBasis::new(&bp, 9);
    for &r in &[1e-5, 0.01, 0.5, 3.3, 9.99, 10.0] {
        let sum: f64 = (0..basis.n_basis)
            .map(|i| basis.eval(i, r, 0).unwrap())
            .sum();
        assert!((sum - 1.0).abs() < 1e-12, "partition of unity at r={r}: {sum}");
    }
}

#[test]
fn spline_linear_order_is_hat() {
    let basis = SplineBasis::new(&[0.0, 1.0, 2.0], 2);
    // middle basis function is the hat peaking at r=1
    assert!((basis.eval(1, 1.0, 0).unwrap() - 1.0).abs() < 1e-15);
    assert!((basis.eval(1, 0.5, 0).unwrap() - 0.5).abs() < 1e-15);
    assert!((basis.eval(1, 1.5, 0).unwrap() - 0.5).abs() < 1e-15);
    assert!((basis.eval(1, 0.25, 1).unwrap() - 1.0).abs() < 1e-15);
    assert!(basis.eval(5, 0.5, 0).is_err());
    assert!(basis.eval(0, 2.5, 0).is_err());
}

#[test]
fn spline_integral_matches_per_interval_quadrature_oracle() {
    // oracle: integrate each polynomial piece with a fresh high-order GL rule
    // (degree k-1 polynomials are integrated exactly by >= k/2 nodes)
    let bp = graded_breakpoints(1e-3, 5.0, 12);
    let basis = SplineBasis::new(&bp, 6);
    let grid = RadialGrid::from_breakpoints(&bp, 10);
    for i in 0..basis.n_basis {
        let sampled: Vec<f64> = grid
            .points
            .iter()
            .map(|&r| basis.eval_unchecked(i, r, 0))
            .collect();
        let via_grid = grid.integrate(&sampled);
        let mut oracle = 0.0;
        for w in bp.windows(2) {
            if w[1] <= w[0] {
                continue;
            }
            let (x, wt) = gauss_legendre(20, w[0], w[1]).unwrap();
            oracle += x
                .iter()
                .zip(&wt)
                .map(|(&xi, &wi)| basis.eval_unchecked(i, xi, 0) * wi)
                .sum::<f64>();
        }
        assert!(
            (via_grid - oracle).abs() <= 1e-13 * oracle.abs().max(1e-6),
            "B_{i}: {via_grid} vs {oracle}"
        );
    }
}

#[test]
fn spline_continuity_and_nonnegativity() {
    let bp = graded_breakpoints(1e-3, 5.0, 10);
    let k = 5;
    let basis = SplineBasis::new(&bp, k);
    // non-negativity on a dense grid
    for i in 0..basis.n_basis {
        for j in 0..400 {
            let r = 5.0 * (j as f64 + 0.5) / 400.0;
            assert!(basis.eval_unchecked(i, r, 0) >= -1e-14);
        }
    }
    // continuity of value and derivatives up to k-2 at interior knots
    for i in 0..basis.n_basis {
        for &t in &bp[1..bp.len() - 1] {
            let h = 1e-9 * t;
            for d in 0..=(k - 2) {
                let lo = basis.eval_unchecked(i, t - h, d);
                let hi = basis.eval_unchecked(i, t + h, d);
                // the probe offset h itself moves along the (d+1)-th
                // derivative; budget for that before calling it a jump
                let slope = basis
                    .eval_unchecked(i, t - h, d + 1)
                    .abs()
                    .max(basis.eval_unchecked(i, t + h, d + 1).abs());
                let tol = 4.0 * slope * h + 1e-8 * lo.abs().max(1.0);
                assert!(
                    (lo - hi).abs() <= tol,
                    "B_{i}^({d}) jump at {t}: {lo} vs {hi}"
                );
            }
        }
    }
}

#[test]
fn radial_grid_polynomial_exactness() {
    // composite grid must reproduce polynomial integrals to 1e-14 relative
    let bp = graded_breakpoints(1e-4, 8.0, 16);
    let grid = RadialGrid::from_breakpoints(&bp, 12);
    for deg in [0usize, 3, 8, 15] {
        let vals: Vec<f64> = grid.points.iter().map(|&r| r.powi(deg as i32)).collect();
        let got = grid.integrate(&vals);
        let exact = 8f64.powi(deg as i32 + 1) / (deg as f64 + 1.0);
        assert!((got - exact).abs() <= 1e-14 * exact, "deg {deg}");
    }
    for w in grid.points.windows(2) {
        assert!(w[1] > w[0]);
    }
    assert!(grid.weights.iter().all(|&w| w > 0.0));
}
