//! Periodic grids on the flat unit torus and the fourth-order central stencil.

use serde::{Deserialize, Serialize};

use crate::error::{GaugeError, Result};

/// Dimension `m`, sites per axis `N`, matrix size `k`, functional order `n`.
///
/// Sites are numbered row-major: axis 0 varies slowest. The torus has unit
/// side length, so the spacing is `h = 1/N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    m: usize,
    n_points: usize,
    k: usize,
    order: usize,
}

impl GridSpec {
    pub fn new(m: usize, n_points: usize, k: usize, order: usize) -> Result<Self> {
        if order < 2 {
            return Err(GaugeError::InvalidGrid(format!("functional order n={order} must be >= 2")));
        }
        if m < 2 || m > 2 * order {
            return Err(GaugeError::InvalidGrid(format!(
                "dimension m={m} must satisfy 2 <= m <= 2n = {}",
                2 * order
            )));
        }
        if n_points < 8 || n_points % 2 != 0 {
            return Err(GaugeError::InvalidGrid(format!("N={n_points} must be even and >= 8")));
        }
        if k == 0 {
            return Err(GaugeError::InvalidGrid("matrix size k must be >= 1".into()));
        }
        let sites = (n_points as u128).checked_pow(m as u32).unwrap_or(u128::MAX);
        if sites > u32::MAX as u128 {
            return Err(GaugeError::InvalidGrid(format!("N^m = {n_points}^{m} sites is too large")));
        }
        Ok(Self { m, n_points, k, order })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Sites per axis.
    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.n_points as f64
    }

    /// Quadrature weight `h^m`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.m as i32)
    }

    pub fn num_sites(&self) -> usize {
        self.n_points.pow(self.m as u32)
    }

    /// Entries per matrix coefficient.
    pub fn block(&self) -> usize {
        self.k * self.k
    }

    /// Same grid with a different matrix size.
    pub fn with_k(&self, k: usize) -> Self {
        Self { k, ..*self }
    }

    /// Same grid with a different resolution.
    pub fn with_points(&self, n_points: usize) -> Result<Self> {
        Self::new(self.m, n_points, self.k, self.order)
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.n_points.pow((self.m - 1 - axis) as u32)
    }

    pub fn coord(&self, site: usize, axis: usize) -> usize {
        (site / self.stride(axis)) % self.n_points
    }

    /// Physical coordinates of a site in `[0, 1)^m`.
    pub fn position(&self, site: usize) -> Vec<f64> {
        (0..self.m).map(|a| self.coord(site, a) as f64 * self.spacing()).collect()
    }

    /// Site reached by moving `offset` steps along `axis`, with periodic wrap.
    #[inline]
    pub fn shift(&self, site: usize, axis: usize, offset: isize) -> usize {
        let stride = self.stride(axis);
        let n = self.n_points as isize;
        let c = ((site / stride) % self.n_points) as isize;
        let nc = (c + offset).rem_euclid(n);
        (site as isize + (nc - c) * stride as isize) as usize
    }

    /// Grids are compatible when they describe the same sites and matrix size.
    pub fn check_compatible(&self, other: &GridSpec) -> Result<()> {
        if self.m != other.m || self.n_points != other.n_points || self.k != other.k {
            return Err(GaugeError::GridMismatch(format!(
                "(m={}, N={}, k={}) vs (m={}, N={}, k={})",
                self.m, self.n_points, self.k, other.m, other.n_points, other.k
            )));
        }
        Ok(())
    }

    /// Neighbour table for the stencil along `axis`: `[x−2h, x−h, x+h, x+2h]`.
    pub(crate) fn neighbours(&self, site: usize, axis: usize) -> [usize; 4] {
        [
            self.shift(site, axis, -2),
            self.shift(site, axis, -1),
            self.shift(site, axis, 1),
            self.shift(site, axis, 2),
        ]
    }
}

/// `N ≥ 8` and at most `u32::MAX` sites bound the dimension.
pub(crate) const MAX_DIM: usize = 10;

/// Fourth-order antisymmetric central difference
/// `(8(f₊₁ − f₋₁) − (f₊₂ − f₋₂)) / 12h`.
///
/// Written with the differences taken first so constants map to exactly zero.
#[inline]
pub(crate) fn stencil(fm2: f64, fm1: f64, fp1: f64, fp2: f64, inv12h: f64) -> f64 {
    (8.0 * (fp1 - fm1) - (fp2 - fm2)) * inv12h
}

/// Fourier symbol of the stencil: `D e^{iθx/h} = i·s(θ)·e^{iθx/h}`.
pub(crate) fn stencil_symbol(theta: f64, h: f64) -> f64 {
    (8.0 * theta.sin() - (2.0 * theta).sin()) / (6.0 * h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(GridSpec::new(2, 16, 2, 2).is_ok());
        assert!(GridSpec::new(5, 16, 2, 2).is_err());
        assert!(GridSpec::new(2, 15, 2, 2).is_err());
        assert!(GridSpec::new(2, 6, 2, 2).is_err());
        assert!(GridSpec::new(1, 16, 2, 2).is_err());
        assert!(GridSpec::new(2, 16, 2, 1).is_err());
    }

    #[test]
    fn shift_wraps() {
        let g = GridSpec::new(3, 8, 2, 2).unwrap();
        let site = 7 * 64 + 0 * 8 + 3;
        assert_eq!(g.coord(g.shift(site, 0, 1), 0), 0);
        assert_eq!(g.coord(g.shift(site, 1, -2), 1), 6);
        assert_eq!(g.coord(g.shift(site, 2, 2), 2), 5);
        assert_eq!(g.shift(g.shift(site, 1, -2), 1, 2), site);
    }

    #[test]
    fn stencil_exact_on_constants_and_fourth_order() {
        assert_eq!(stencil(0.3, 0.3, 0.3, 0.3, 1234.5), 0.0);
        let err = |n: usize| {
            let h = 1.0 / n as f64;
            let f = |x: f64| (2.0 * std::f64::consts::PI * x).sin();
            let x = 0.3;
            let d = stencil(f(x - 2.0 * h), f(x - h), f(x + h), f(x + 2.0 * h), 1.0 / (12.0 * h));
            (d - 2.0 * std::f64::consts::PI * (2.0 * std::f64::consts::PI * x).cos()).abs()
        };
        let order = (err(32) / err(64)).log2();
        assert!(order > 3.9, "order {order}");
    }
}
