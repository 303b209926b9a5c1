//! Gauss-Legendre rules and composite panels.

use std::sync::OnceLock;

/// Nodes per panel for every composite rule in the crate.
pub const PANEL_ORDER: usize = 20;

/// Gauss-Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                let (_, d) = legendre(n, z);
                dp = d;
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// `P_n(z)` and `P_n'(z)` by the three-term recurrence.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

fn standard_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(PANEL_ORDER))
}

/// Composite rule on `[a, b]` with `panels` equal panels of [`PANEL_ORDER`] nodes.
#[derive(Clone, Debug)]
pub struct CompositeRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub panels: usize,
}

impl CompositeRule {
    pub fn new(a: f64, b: f64, panels: usize) -> Self {
        let (x, w) = standard_rule();
        let width = (b - a) / panels as f64;
        let mut nodes = Vec::with_capacity(panels * PANEL_ORDER);
        let mut weights = Vec::with_capacity(panels * PANEL_ORDER);
        for p in 0..panels {
            let mid = a + (p as f64 + 0.5) * width;
            for (xi, wi) in x.iter().zip(w) {
                nodes.push(mid + 0.5 * width * xi);
                weights.push(0.5 * width * wi);
            }
        }
        Self { nodes, weights, panels }
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        crate::sum::sum_f64(self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two_and_integrate_polynomials() {
        for n in [1, 2, 5, 20, 64] {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
            // exact for degree 2n - 1
            let deg = 2 * n - 1;
            let approx: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(deg as i32 - 1)).sum();
            let exact = if (deg - 1) % 2 == 0 { 2.0 / deg as f64 } else { 0.0 };
            assert!((approx - exact).abs() < 1e-13, "n = {n}");
        }
    }

    #[test]
    fn nodes_are_sorted_and_symmetric() {
        let (x, _) = gauss_legendre(20);
        assert!(x.windows(2).all(|p| p[0] < p[1]));
        for i in 0..20 {
            assert!((x[i] + x[19 - i]).abs() < 1e-15);
        }
    }

    #[test]
    fn composite_rule_on_smooth_function() {
        let r = CompositeRule::new(0.0, 3.0, 4);
        let v = r.integrate(|t| (-t * t).exp() * t.cos());
        // oracle: 600-point midpoint rule with Richardson extrapolation
        let mid = |m: usize| {
            let h = 3.0 / m as f64;
            (0..m).map(|i| {
                let t = (i as f64 + 0.5) * h;
                (-t * t).exp() * t.cos() * h
            }).sum::<f64>()
        };
        let oracle = (4.0 * mid(1200) - mid(600)) / 3.0;
        assert!((v - oracle).abs() < 1e-12);
    }
}
