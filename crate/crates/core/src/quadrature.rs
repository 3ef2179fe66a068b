//! Gauss–Legendre rules and tensor-product integration over annular sectors.

use std::f64::consts::PI;

use crate::error::{EmcmError, Result};

/// Default nodes per dimension for sector integrals.
pub const DEFAULT_ORDER: usize = 16;

/// Gauss–Legendre nodes and weights on [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds an `order`-point rule by Newton iteration on the Legendre
    /// three-term recurrence. Exact for polynomials of degree `2 * order - 1`.
    pub fn new(order: usize) -> Result<Self> {
        if order < 2 {
            return Err(EmcmError::InvalidInput(format!(
                "quadrature order must be at least 2, got {order}"
            )));
        }
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess for the i-th largest root.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
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
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Ok(Self { nodes, weights })
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

    /// Integrates `f` over [a, b].
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }

    /// Visits every tensor-product node of the polar rectangle
    /// `[r0, r1] x [psi0, psi1]` with its weight (without the `r` Jacobian).
    pub fn for_each_polar_node<F: FnMut(f64, f64, f64)>(
        &self,
        (r0, r1): (f64, f64),
        (psi0, psi1): (f64, f64),
        mut f: F,
    ) {
        let hr = 0.5 * (r1 - r0);
        let mr = 0.5 * (r1 + r0);
        let hp = 0.5 * (psi1 - psi0);
        let mp = 0.5 * (psi1 + psi0);
        for (&xr, &wr) in self.nodes.iter().zip(&self.weights) {
            let r = mr + hr * xr;
            for (&xp, &wp) in self.nodes.iter().zip(&self.weights) {
                f(r, mp + hp * xp, wr * wp * hr * hp);
            }
        }
    }
}

/// P_n(x) and P_n'(x).
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}
