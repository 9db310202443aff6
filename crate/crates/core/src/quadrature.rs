//! Quadrature rules: composite Gauss–Legendre for the estimators and
//! tanh–sinh (double exponential) for oracles with endpoint singularities.

use crate::error::{Error, Result};

/// Gauss–Legendre rule on [-1, 1].
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "Gauss-Legendre order must be positive");
        let mut nodes = vec![0.0; order];
        let mut weights = vec![0.0; order];
        let n = order as f64;
        for i in 0..order.div_ceil(2) {
            // Tricomi initial guess, refined by Newton on P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(order, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(order, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[order - 1 - i] = x;
            weights[i] = w;
            weights[order - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }

    /// Nodes and weights of the composite rule with `panels` equal panels on
    /// [a, b], in ascending node order.
    pub fn composite_nodes(&self, a: f64, b: f64, panels: usize) -> (Vec<f64>, Vec<f64>) {
        let h = (b - a) / panels as f64;
        let mut xs = Vec::with_capacity(panels * self.order());
        let mut ws = Vec::with_capacity(panels * self.order());
        for p in 0..panels {
            let lo = a + p as f64 * h;
            let mid = lo + 0.5 * h;
            for (&x, &w) in self.nodes.iter().zip(&self.weights) {
                xs.push(mid + 0.5 * h * x);
                ws.push(0.5 * h * w);
            }
        }
        (xs, ws)
    }

    pub fn composite(&self, a: f64, b: f64, panels: usize, mut f: impl FnMut(f64) -> f64) -> f64 {
        let (xs, ws) = self.composite_nodes(a, b, panels);
        xs.iter().zip(&ws).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Result of a tanh–sinh integration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TanhSinh {
    pub value: f64,
    /// Number of step halvings performed.
    pub levels: usize,
    /// |I_k - I_{k-1}| at the final level.
    pub last_change: f64,
}

/// Integrates `f` over [a, b] by tanh–sinh quadrature, halving the step
/// until two successive levels differ by less than `tol`.
///
/// `f` receives `(x, b - x)` with the distance to the right endpoint computed
/// without cancellation, so integrands with a singularity at `b` (quantile
/// functions near u = 1) can be evaluated to full precision.
///
/// Fails when refinement does not settle, when the integrand is non-finite,
/// or when nodes within 1e-100 of an endpoint still contribute more than
/// `tol` (a non-integrable or too slowly decaying endpoint singularity).
pub fn tanh_sinh(
    a: f64,
    b: f64,
    tol: f64,
    max_level: usize,
    mut f: impl FnMut(f64, f64) -> f64,
) -> Result<TanhSinh> {
    if !(tol > 0.0) {
        return Err(Error::param(format!("quadrature tolerance must be positive, got {tol}")));
    }
    const T_MAX: f64 = 6.5;
    let half = 0.5 * (b - a);
    let mut tail = 0.0_f64;

    // Weighted contribution of the abscissa pair at +t and -t.
    let mut pair = |t: f64| -> Result<f64> {
        let y = std::f64::consts::FRAC_PI_2 * t.sinh();
        let e = (-2.0 * y).exp();
        let near = 2.0 * e / (1.0 + e);
        let w = 2.0 * std::f64::consts::PI * t.cosh() * e / ((1.0 + e) * (1.0 + e)) * half;
        let dist = near * half;
        if dist < f64::MIN_POSITIVE * 1e4 || w == 0.0 {
            return Ok(0.0);
        }
        let v = if t == 0.0 {
            w * f(a + half, half)
        } else {
            w * (f(a + dist, b - a - dist) + f(b - dist, dist))
        };
        if !v.is_finite() {
            return Err(Error::OracleFailure(format!(
                "non-finite integrand within {dist:e} of an endpoint"
            )));
        }
        if near < 1e-100 {
            tail = tail.max(v.abs());
        }
        Ok(v)
    };

    let mut h = 1.0;
    let mut sum = pair(0.0)?;
    let mut k = 1;
    while k as f64 * h <= T_MAX {
        sum += pair(k as f64 * h)?;
        k += 1;
    }
    let mut estimate = sum * h;
    let mut last_change = f64::INFINITY;
    for level in 1..=max_level {
        h *= 0.5;
        let mut k = 1;
        while k as f64 * h <= T_MAX {
            sum += pair(k as f64 * h)?;
            k += 2;
        }
        let next = sum * h;
        last_change = (next - estimate).abs();
        estimate = next;
        if level >= 3 && last_change < tol {
            if tail * h > tol {
                break;
            }
            return Ok(TanhSinh { value: estimate, levels: level, last_change });
        }
    }
    Err(Error::OracleFailure(format!(
        "tanh-sinh did not converge to {tol:e} after {max_level} levels \
         (last change {last_change:e}, endpoint contribution {tail:e})"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let gl = GaussLegendre::new(8);
        let weight_sum: f64 = gl.weights().iter().sum();
        assert_relative_eq!(weight_sum, 2.0, epsilon = 1e-14);
        // degree 15 is the limit for 8 nodes
        let v = gl.integrate(0.0, 1.0, |x| x.powi(15));
        assert_relative_eq!(v, 1.0 / 16.0, epsilon = 1e-14);
    }

    #[test]
    fn gauss_legendre_eight_point_nodes() {
        let gl = GaussLegendre::new(8);
        assert_relative_eq!(gl.nodes()[7], 0.960_289_856_497_536_3, epsilon = 1e-15);
        assert_relative_eq!(gl.weights()[7], 0.101_228_536_290_376_26, epsilon = 1e-15);
    }

    #[test]
    fn composite_matches_closed_form() {
        let gl = GaussLegendre::new(8);
        let v = gl.composite(0.0, std::f64::consts::PI, 16, f64::sin);
        assert_relative_eq!(v, 2.0, epsilon = 1e-14);
    }

    #[test]
    fn tanh_sinh_handles_endpoint_singularities() {
        // ∫_0^1 (1-u)^{-1/3} du = 3/2
        let r = tanh_sinh(0.0, 1.0, 1e-12, 12, |_, c| c.powf(-1.0 / 3.0)).unwrap();
        assert_relative_eq!(r.value, 1.5, epsilon = 1e-11);
        // ∫_0^1 ln(u) du = -1
        let r = tanh_sinh(0.0, 1.0, 1e-12, 12, |u, _| u.ln()).unwrap();
        assert_relative_eq!(r.value, -1.0, epsilon = 1e-11);
    }

    #[test]
    fn tanh_sinh_reports_divergence() {
        let r = tanh_sinh(0.0, 1.0, 1e-10, 8, |_, c| 1.0 / c);
        assert!(r.is_err());
    }
}
