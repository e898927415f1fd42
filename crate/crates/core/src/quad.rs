//! Gauss–Legendre panel quadrature.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// n-point rule on [-1, 1].
    pub fn new(n: usize) -> Self {
        let mut nodes = alloc::vec![0.0; n];
        let mut weights = alloc::vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = libm::cos(PI * (i as f64 + 0.75) / (n as f64 + 0.5));
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// Nodes and weights mapped to [a, b].
    pub fn panel(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let h = 0.5 * (b - a);
        let c = 0.5 * (b + a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (c + h * x, h * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.panel(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Panel edges t0, 2 t0, 4 t0, ... up to `hi`, preceded by 0.
pub fn geometric_edges(t0: f64, hi: f64) -> Vec<f64> {
    let mut e = alloc::vec![0.0, t0];
    let mut t = t0;
    while t < hi {
        t = (2.0 * t).min(hi);
        e.push(t);
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_on_polynomials() {
        let g = GaussLegendre::new(12);
        let v = g.integrate(0.0, 2.0, |x| x.powi(23));
        assert!((v - 2f64.powi(24) / 24.0).abs() / v < 1e-13);
        assert!((g.weights.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn graded_panels_handle_endpoint_singularity() {
        let g = GaussLegendre::new(20);
        let e = geometric_edges(1e-30, 1.0);
        let mut s = 0.0;
        for w in e.windows(2) {
            s += g.integrate(w[0], w[1], |t| libm::pow(t, -0.5));
        }
        assert!((s - 2.0).abs() < 1e-12);
    }
}
