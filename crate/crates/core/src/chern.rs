//! Chern–Weil densities `p_j(iF/2π)`.
//!
//! With `M = (i/2π)F` and power traces `s_ℓ = tr(M∧…∧M)` (ℓ factors, matrix
//! product inside the wedge), Newton's identities give
//! `p_j = (1/j) Σ_{i=1..j} (−1)^{i−1} p_{j−i} ∧ s_i` with `p_0 = 1`. All
//! `s_ℓ` are even-degree scalar forms, so the recursion needs no ordering.
//!
//! Densities are real scalar forms stored as `k = 1` fields with zero
//! imaginary parts. On the trivial torus bundle every integral is zero up to
//! discretization error; nontrivial bundles are not modelled.

use num_complex::Complex64 as C64;

use crate::connection::{curvature, Connection};
use crate::error::{GaugeError, Result};
use crate::forms::FormField;
use crate::grid::GridSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct ChernDensity {
    pub j: usize,
    pub field: FormField,
}

/// Real part of the matrix trace of every coefficient, scaled by `factor`.
fn scalar_trace(f: &FormField, factor: C64) -> Result<FormField> {
    let grid = f.grid();
    let k = grid.k();
    let data = f
        .data()
        .chunks_exact(k * k)
        .map(|c| {
            let tr: C64 = (0..k).map(|i| c[i * k + i]).sum();
            C64::new((factor * tr).re, 0.0)
        })
        .collect();
    FormField::from_data(grid.with_k(1), f.degree(), data)
}

fn check_j(g: &GridSpec, j: usize) -> Result<()> {
    if j == 0 {
        return Err(GaugeError::InvalidArgument("Chern index j must be >= 1".into()));
    }
    if 2 * j > g.m() {
        return Err(GaugeError::DegreeOutOfRange { degree: 2 * j, m: g.m() });
    }
    if j > g.k() {
        return Err(GaugeError::InvalidArgument(format!("j={j} exceeds matrix size k={}", g.k())));
    }
    Ok(())
}

pub fn chern_density(a: &Connection, j: usize) -> Result<ChernDensity> {
    density_from_curvature(&curvature(a), j)
}

/// `p_j(iF/2π)` for any matrix-valued 2-form `f`.
pub(crate) fn density_from_curvature(f: &FormField, j: usize) -> Result<ChernDensity> {
    if f.degree() != 2 {
        return Err(GaugeError::InvalidArgument("curvature must be a 2-form".into()));
    }
    check_j(f.grid(), j)?;
    let c = C64::new(0.0, 1.0 / (2.0 * std::f64::consts::PI));
    let mut power = f.clone();
    let mut factor = c;
    let mut s = Vec::with_capacity(j);
    for l in 1..=j {
        if l > 1 {
            power = power.wedge(f)?;
            factor *= c;
        }
        s.push(scalar_trace(&power, factor)?);
    }
    let scalar_grid = f.grid().with_k(1);
    let mut one = FormField::zeros(scalar_grid, 0)?;
    one.data_mut().iter_mut().for_each(|z| *z = C64::new(1.0, 0.0));
    let mut p = vec![one];
    for jj in 1..=j {
        let mut acc = FormField::zeros(scalar_grid, 2 * jj)?;
        for i in 1..=jj {
            let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
            acc.axpy(sign, &p[jj - i].wedge(&s[i - 1])?)?;
        }
        p.push(acc.scale(1.0 / jj as f64));
    }
    Ok(ChernDensity { j, field: p.pop().expect("p_j") })
}

/// Riemann sum of the top-degree density.
pub fn chern_integral(a: &Connection, j: usize) -> Result<f64> {
    let m = a.grid().m();
    if 2 * j != m {
        return Err(GaugeError::InvalidArgument(format!("integral needs 2j = m, got j={j}, m={m}")));
    }
    let d = chern_density(a, j)?;
    Ok(d.field.data().iter().map(|z| z.re).sum::<f64>() * a.grid().cell_volume())
}

/// `‖d p_j‖_{L²}`, zero in the continuum because Chern forms are closed.
pub fn closedness_residual(a: &Connection, j: usize) -> Result<f64> {
    let m = a.grid().m();
    if 2 * j >= m {
        return Err(GaugeError::InvalidArgument(format!(
            "closedness needs 2j < m, got j={j}, m={m}"
        )));
    }
    chern_density(a, j)?.field.ext_d()?.lp_norm(2.0)
}
