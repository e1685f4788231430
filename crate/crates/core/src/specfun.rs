//! Special functions and numerical primitives: spherical Bessel functions,
//! Gauss-Legendre quadrature, B-spline bases and the composite radial grid.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpecFunError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid interval [{0}, {1}]")]
    Interval(f64, f64),
    #[error("basis index {index} out of range (N_b = {nb})")]
    Index { index: usize, nb: usize },
}

/// Spherical Bessel function j_L(x) for L >= 0, x >= 0.
///
/// Upward recurrence is unstable for x < L, so the small-x side uses
/// Miller's downward recurrence normalized against j_0; near the origin a
/// power series takes over.
pub fn spherical_bessel_j(l: u32, x: f64) -> Result<f64, SpecFunError> {
    if x < 0.0 {
        return Err(SpecFunError::Domain(format!("negative argument {x}")));
    }
    Ok(sbessel(l, x))
}

pub(crate) fn sbessel(l: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if l == 0 { 1.0 } else { 0.0 };
    }
    if l == 0 {
        return x.sin() / x;
    }
    // power series for small arguments: x^l/(2l+1)!! (1 - (x^2/2)/(2l+3) + ...)
    let lf = l as f64;
    if x < 0.02 * (2.0 * lf + 3.0).sqrt() {
        let mut dfact = 1.0; // (2l+1)!!
        for k in 1..=l {
            dfact *= (2 * k + 1) as f64;
        }
        let x2 = x * x;
        let t1 = x2 / (2.0 * (2.0 * lf + 3.0));
        let t2 = t1 * x2 / (4.0 * (2.0 * lf + 5.0));
        return x.powi(l as i32) / dfact * (1.0 - t1 + t2);
    }
    if x >= lf {
        // upward recurrence from j0, j1
        let mut jm = x.sin() / x;
        let mut j0 = (x.sin() / x - x.cos()) / x;
        for n in 1..l {
            let jp = (2 * n + 1) as f64 / x * j0 - jm;
            jm = j0;
            j0 = jp;
        }
        j0
    } else {
        // Miller downward recurrence
        let start = l + (x as u32) + 24 + (l / 2);
        let mut jp = 0.0f64;
        let mut jc = 1e-280;
        let mut target = 0.0;
        for n in (0..=start).rev() {
            let jm = (2 * n + 3) as f64 / x * jc - jp;
            jp = jc;
            jc = jm;
            if n == l {
                target = jc;
            }
            // rescale to avoid overflow
            if jc.abs() > 1e250 {
                jp /= 1e250;
                jc /= 1e250;
                target /= 1e250;
            }
        }
        // jc now holds the unnormalized j_0 estimate... normalization against
        // the analytic j_0 fixes the scale.
        let j0 = x.sin() / x;
        target * j0 / jc
    }
}

/// Gauss-Legendre nodes and weights on [a, b]; exact for polynomials of
/// degree <= 2n-1.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Result<(Vec<f64>, Vec<f64>), SpecFunError> {
    if n == 0 {
        return Err(SpecFunError::Domain("n must be >= 1".into()));
    }
    if !(a < b) {
        return Err(SpecFunError::Interval(a, b));
    }
    let (x, w) = gauss_legendre_unit(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    Ok((
        x.iter().map(|&xi| mid + half * xi).collect(),
        w.iter().map(|&wi| half * wi).collect(),
    ))
}

/// Nodes/weights on [-1, 1] via Newton iteration on P_n.
fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre P_n(x) and derivative by recurrence
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// B-spline basis of order `k` (polynomial degree k-1) on a knot sequence.
///
/// Knots carry the usual k-fold multiplicity at both ends. `n_basis` counts
/// all splines including the boundary ones; callers drop the first/last to
/// impose boundary conditions.
#[derive(Debug, Clone)]
pub struct SplineBasis {
    pub knots: Vec<f64>,
    pub order: usize,
    pub n_basis: usize,
}

impl SplineBasis {
    /// Build from distinct interior breakpoints (must be strictly
    /// increasing, first > 0 is not required here).
    pub fn new(breakpoints: &[f64], order: usize) -> Self {
        assert!(order >= 2, "spline order must be >= 2");
        assert!(breakpoints.len() >= 2, "need at least one interval");
        let mut knots = Vec::with_capacity(breakpoints.len() + 2 * (order - 1));
        for _ in 0..order - 1 {
            knots.push(breakpoints[0]);
        }
        knots.extend_from_slice(breakpoints);
        for _ in 0..order - 1 {
            knots.push(*breakpoints.last().unwrap());
        }
        let n_basis = knots.len() - order;
        Self {
            knots,
            order,
            n_basis,
        }
    }

    pub fn r_min(&self) -> f64 {
        self.knots[0]
    }

    pub fn r_max(&self) -> f64 {
        *self.knots.last().unwrap()
    }

    /// Interior breakpoints (the distinct knots).
    pub fn breakpoints(&self) -> Vec<f64> {
        let k = self.order;
        self.knots[k - 1..self.knots.len() - (k - 1)].to_vec()
    }

    /// Value (or derivative) of basis function `i` at `r` via Cox-de Boor.
    pub fn eval(&self, i: usize, r: f64, derivative_order: usize) -> Result<f64, SpecFunError> {
        if i >= self.n_basis {
            return Err(SpecFunError::Index {
                index: i,
                nb: self.n_basis,
            });
        }
        if r < self.r_min() || r > self.r_max() {
            return Err(SpecFunError::Domain(format!(
                "r = {r} outside knot span [{}, {}]",
                self.r_min(),
                self.r_max()
            )));
        }
        Ok(self.eval_unchecked(i, r, derivative_order))
    }

    pub(crate) fn eval_unchecked(&self, i: usize, r: f64, deriv: usize) -> f64 {
        if deriv == 0 {
            return self.bspline_value(i, self.order, r);
        }
        // derivative recurrence:
        // B'_{i,k} = (k-1) [ B_{i,k-1}/(t_{i+k-1}-t_i) - B_{i+1,k-1}/(t_{i+k}-t_{i+1}) ]
        let k = self.order;
        let t = &self.knots;
        let km1 = (k - 1) as f64;
        let d1 = t[i + k - 1] - t[i];
        let d2 = t[i + k] - t[i + 1];
        let mut v = 0.0;
        if d1 > 0.0 {
            v += km1 / d1 * self.eval_deriv_lower(i, k - 1, r, deriv - 1);
        }
        if d2 > 0.0 {
            v -= km1 / d2 * self.eval_deriv_lower(i + 1, k - 1, r, deriv - 1);
        }
        v
    }

    fn eval_deriv_lower(&self, i: usize, k: usize, r: f64, deriv: usize) -> f64 {
        if deriv == 0 {
            return self.bspline_value(i, k, r);
        }
        let t = &self.knots;
        let km1 = (k - 1) as f64;
        let d1 = t[i + k - 1] - t[i];
        let d2 = t[i + k] - t[i + 1];
        let mut v = 0.0;
        if d1 > 0.0 {
            v += km1 / d1 * self.eval_deriv_lower(i, k - 1, r, deriv - 1);
        }
        if d2 > 0.0 {
            v -= km1 / d2 * self.eval_deriv_lower(i + 1, k - 1, r, deriv - 1);
        }
        v
    }

    fn bspline_value(&self, i: usize, k: usize, r: f64) -> f64 {
        let t = &self.knots;
        if k == 1 {
            // half-open intervals; the last interval is closed at r_max
            let inside = (r >= t[i] && r < t[i + 1])
                || (r == self.r_max() && t[i] < t[i + 1] && t[i + 1] == self.r_max());
            return if inside { 1.0 } else { 0.0 };
        }
        let mut v = 0.0;
        let d1 = t[i + k - 1] - t[i];
        if d1 > 0.0 {
            v += (r - t[i]) / d1 * self.bspline_value(i, k - 1, r);
        }
        let d2 = t[i + k] - t[i + 1];
        if d2 > 0.0 {
            v += (t[i + k] - r) / d2 * self.bspline_value(i + 1, k - 1, r);
        }
        v
    }
}

/// Composite Gauss-Legendre quadrature grid over the knot intervals of a
/// spline basis. Shared by every radial integral in the engine.
#[derive(Debug, Clone)]
pub struct RadialGrid {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    pub r_max: f64,
    /// Widest quadrature panel; zero for ad-hoc grids not built from panels.
    pub max_interval: f64,
    /// Gauss-Legendre order of each panel; zero for ad-hoc grids.
    pub nodes_per_interval: usize,
}

impl RadialGrid {
    /// One Gauss-Legendre panel of `nodes_per_interval` points per knot
    /// interval.
    pub fn from_breakpoints(breakpoints: &[f64], nodes_per_interval: usize) -> Self {
        let mut points = Vec::new();
        let mut weights = Vec::new();
        let mut max_interval = 0.0f64;
        for w in breakpoints.windows(2) {
            if w[1] <= w[0] {
                continue;
            }
            max_interval = max_interval.max(w[1] - w[0]);
            let (x, wt) = gauss_legendre(nodes_per_interval, w[0], w[1]).unwrap();
            points.extend(x);
            weights.extend(wt);
        }
        Self {
            points,
            weights,
            r_max: *breakpoints.last().unwrap(),
            max_interval,
            nodes_per_interval,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Quadrature of sampled values against the grid weights.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        values
            .iter()
            .zip(&self.weights)
            .map(|(v, w)| v * w)
            .sum()
    }
}

/// Exponentially graded breakpoints on [r_min, r_max]: dense near the origin
/// where bound orbitals vary on the 1/Z scale, stretching toward the box
/// edge. Includes r = 0 as the first breakpoint.
pub fn graded_breakpoints(r_min_scale: f64, r_max: f64, n_intervals: usize) -> Vec<f64> {
    assert!(n_intervals >= 2);
    // t_i = r_max (e^(g u) - 1)/(e^g - 1), g fixed by the first interval size
    let target = r_min_scale / r_max;
    let mut glo = 1e-3;
    let mut ghi = 60.0;
    let n = n_intervals as f64;
    let first = |g: f64| ((g / n).exp_m1()) / g.exp_m1();
    for _ in 0..200 {
        let gm = 0.5 * (glo + ghi);
        if first(gm) > target {
            glo = gm;
        } else {
            ghi = gm;
        }
    }
    let g = 0.5 * (glo + ghi);
    let mut pts = Vec::with_capacity(n_intervals + 1);
    for i in 0..=n_intervals {
        let u = i as f64 / n;
        pts.push(r_max * (g * u).exp_m1() / g.exp_m1());
    }
    pts[0] = 0.0;
    let last = pts.len() - 1;
    pts[last] = r_max;
    pts
}

#[cfg(test)]
mod tests;
