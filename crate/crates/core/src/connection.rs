//! Connections, curvature, gauge transformations and the covariant operators.
//!
//! The bundle is the trivial `SU(k)` bundle over the torus, so a connection
//! is just an su(k)-valued 1-form and a gauge transformation is an `SU(k)`
//! value per site. Conventions:
//!
//! * `F_A = dA + A∧A`
//! * `u*A = u⁻¹Au + u⁻¹du`, with `du` taken by the same stencil as `d`
//! * `d_A B = dB + [A, B]`
//! * `d_A* B = d*B + (−1)^{(p+1)m+1} *[A, *B]` on `p`-forms (`(−1)^{m+1}` on
//!   2-forms), the exact discrete transpose of `d_A`
//! * `D_A T = ∂T + [A_j, T]` on tensors; the new slot is the leading one

use std::ops::Deref;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{GaugeError, Result};
use crate::forms::{lp_from_pointwise, FormField};
use crate::grid::{stencil, GridSpec};
use crate::liealg::{
    adjoint_into, comm_acc, conj_inv_into, expm_raw, identity_raw, inner_raw, mat_mul_acc,
    project_algebra_in_place, GroupElement, GROUP_TOL,
};
use crate::multiindex::binomial;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// An su(k)-valued 1-form.
#[derive(Debug, Clone, PartialEq)]
pub struct Connection {
    form: FormField,
}

impl Connection {
    pub fn new(form: FormField) -> Result<Self> {
        if form.degree() != 1 {
            return Err(GaugeError::InvalidArgument(format!(
                "a connection is a 1-form, got degree {}",
                form.degree()
            )));
        }
        Ok(Self { form })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self { form: FormField::zeros(grid, 1).expect("m >= 2") }
    }

    pub fn form(&self) -> &FormField {
        &self.form
    }

    pub fn into_form(self) -> FormField {
        self.form
    }
}

impl Deref for Connection {
    type Target = FormField;

    fn deref(&self) -> &FormField {
        &self.form
    }
}

/// One `SU(k)` matrix per site.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeField {
    grid: GridSpec,
    data: Vec<C64>,
}

impl GaugeField {
    pub fn identity(grid: GridSpec) -> Self {
        Self::constant(grid, &GroupElement::identity(grid.k())).expect("matching k")
    }

    pub fn constant(grid: GridSpec, u: &GroupElement) -> Result<Self> {
        if u.k() != grid.k() {
            return Err(GaugeError::DimensionMismatch(u.k(), grid.k()));
        }
        let mut data = Vec::with_capacity(grid.num_sites() * grid.block());
        for _ in 0..grid.num_sites() {
            data.extend_from_slice(u.entries());
        }
        Ok(Self { grid, data })
    }

    /// Wraps per-site matrices, checking the `SU(k)` invariants at every site.
    pub fn from_data(grid: GridSpec, data: Vec<C64>) -> Result<Self> {
        if data.len() != grid.num_sites() * grid.block() {
            return Err(GaugeError::InvalidArgument(format!(
                "expected {} entries, got {}",
                grid.num_sites() * grid.block(),
                data.len()
            )));
        }
        let g = Self { grid, data };
        if !g.is_valid(GROUP_TOL) {
            return Err(GaugeError::InvalidArgument("gauge field leaves SU(k)".into()));
        }
        Ok(g)
    }

    pub(crate) fn from_raw(grid: GridSpec, data: Vec<C64>) -> Self {
        Self { grid, data }
    }

    /// `u(x) = exp(ξ(x))` for an algebra-valued 0-form `ξ`.
    pub fn exp_of(xi: &FormField) -> Result<Self> {
        if xi.degree() != 0 {
            return Err(GaugeError::InvalidArgument("exp_of needs a 0-form".into()));
        }
        let grid = *xi.grid();
        let k = grid.k();
        let b = grid.block();
        let mut data = vec![ZERO; grid.num_sites() * b];
        data.par_chunks_mut(b).enumerate().for_each(|(site, out)| {
            out.copy_from_slice(&expm_raw(xi.coeff(site, 0), k));
        });
        Ok(Self { grid, data })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn at(&self, site: usize) -> GroupElement {
        let b = self.grid.block();
        GroupElement::from_raw(self.grid.k(), self.data[site * b..(site + 1) * b].to_vec())
    }

    pub fn inverse(&self) -> Self {
        let k = self.grid.k();
        let b = self.grid.block();
        let mut data = vec![ZERO; self.data.len()];
        data.par_chunks_mut(b)
            .zip(self.data.par_chunks(b))
            .for_each(|(o, u)| adjoint_into(u, o, k));
        Self { grid: self.grid, data }
    }

    /// Pointwise product `self · other`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.grid.check_compatible(&other.grid)?;
        let k = self.grid.k();
        let b = self.grid.block();
        let mut data = vec![ZERO; self.data.len()];
        data.par_chunks_mut(b).enumerate().for_each(|(s, o)| {
            mat_mul_acc(o, &self.data[s * b..(s + 1) * b], &other.data[s * b..(s + 1) * b], k, 1.0);
        });
        Ok(Self { grid: self.grid, data })
    }

    pub fn is_valid(&self, tol: f64) -> bool {
        (0..self.grid.num_sites()).all(|s| self.at(s).is_valid(tol))
    }

    /// Largest entrywise distance from the identity.
    pub fn distance_from_identity(&self) -> f64 {
        let k = self.grid.k();
        let id = identity_raw(k);
        self.data
            .chunks(self.grid.block())
            .flat_map(|u| u.iter().zip(&id).map(|(a, b)| (a - b).norm()))
            .fold(0.0, f64::max)
    }
}

/// Tensor-valued field: `slots` leading covector indices (each `0..m`)
/// followed by an increasing multi-index of degree `base_degree`.
///
/// Component index is `j₁·m^{r−1}·C + … + j_r·C + I` with `C = C(m, base)`,
/// so a new derivative slot is prepended as `j·(old count) + old index`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovariantTensor {
    grid: GridSpec,
    slots: usize,
    base_degree: usize,
    data: Vec<C64>,
}

impl CovariantTensor {
    /// A form viewed as a tensor with no derivative slots.
    pub fn from_form(b: &FormField) -> Self {
        Self { grid: *b.grid(), slots: 0, base_degree: b.degree(), data: b.data().to_vec() }
    }

    /// Back to a form; only valid when there are no slots.
    pub fn to_form(&self) -> Result<FormField> {
        if self.slots != 0 {
            return Err(GaugeError::InvalidArgument("tensor has derivative slots".into()));
        }
        FormField::from_data(self.grid, self.base_degree, self.data.clone())
    }

    pub fn zeros(grid: GridSpec, slots: usize, base_degree: usize) -> Self {
        let comps = grid.m().pow(slots as u32) * binomial(grid.m(), base_degree);
        Self { grid, slots, base_degree, data: vec![ZERO; grid.num_sites() * comps * grid.block()] }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    pub fn base_degree(&self) -> usize {
        self.base_degree
    }

    pub fn num_components(&self) -> usize {
        self.grid.m().pow(self.slots as u32) * binomial(self.grid.m(), self.base_degree)
    }

    fn site_len(&self) -> usize {
        self.num_components() * self.grid.block()
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn coeff(&self, site: usize, comp: usize) -> &[C64] {
        let b = self.grid.block();
        let start = site * self.site_len() + comp * b;
        &self.data[start..start + b]
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        self.grid.check_compatible(&other.grid)?;
        if self.slots != other.slots || self.base_degree != other.base_degree {
            return Err(GaugeError::InvalidArgument("tensor shape mismatch".into()));
        }
        Ok(())
    }

    pub fn pointwise_norm(&self, site: usize) -> f64 {
        let k = self.grid.k();
        let s = self.site_len();
        self.data[site * s..(site + 1) * s]
            .chunks(self.grid.block())
            .map(|c| inner_raw(c, c, k))
            .sum::<f64>()
            .max(0.0)
            .sqrt()
    }

    pub fn pointwise_norms(&self) -> Vec<f64> {
        (0..self.grid.num_sites()).map(|s| self.pointwise_norm(s)).collect()
    }

    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        if !(p >= 1.0) {
            return Err(GaugeError::InvalidArgument(format!("L^p norm needs p >= 1, got {p}")));
        }
        Ok(lp_from_pointwise(&self.pointwise_norms(), p, self.grid.cell_volume()))
    }

    pub fn discrete_inner(&self, other: &Self) -> Result<f64> {
        self.check_same_shape(other)?;
        let k = self.grid.k();
        let b = self.grid.block();
        let sum: f64 =
            self.data.chunks(b).zip(other.data.chunks(b)).map(|(x, y)| inner_raw(x, y, k)).sum();
        Ok(sum * self.grid.cell_volume())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(Self { data, ..self.clone_shape() })
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { data: self.data.iter().map(|z| z * s).collect(), ..self.clone_shape() }
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }

    fn clone_shape(&self) -> Self {
        Self { grid: self.grid, slots: self.slots, base_degree: self.base_degree, data: Vec::new() }
    }
}

fn check_grid(u: &GaugeField, g: &GridSpec) -> Result<()> {
    u.grid.check_compatible(g)
}

/// `F_A = dA + A∧A`.
pub fn curvature(a: &Connection) -> FormField {
    let mut f = a.ext_d().expect("m >= 2");
    f.axpy(1.0, &a.wedge(a).expect("m >= 2")).expect("same shape");
    f
}

/// `u*A = u⁻¹Au + P(u⁻¹du)`, where `P` is the projection onto su(k) that
/// removes the stencil's drift out of the algebra. The identity gauge returns
/// `A` unchanged.
pub fn gauge_transform_connection(u: &GaugeField, a: &Connection) -> Result<Connection> {
    check_grid(u, a.grid())?;
    let grid = *a.grid();
    let m = grid.m();
    let k = grid.k();
    let b = grid.block();
    let inv12h = 1.0 / (12.0 * grid.spacing());
    let mut out = FormField::zeros(grid, 1)?;
    out.data_mut().par_chunks_mut(m * b).enumerate().for_each(|(site, o)| {
        let us = &u.data[site * b..(site + 1) * b];
        let mut scratch = vec![ZERO; b];
        let mut du = vec![ZERO; b];
        let mut term = vec![ZERO; b];
        for j in 0..m {
            conj_inv_into(us, a.coeff(site, j), &mut o[j * b..(j + 1) * b], &mut scratch, k);
            let nb = grid.neighbours(site, j);
            for (e, d) in du.iter_mut().enumerate() {
                let at = |s: usize| u.data[s * b + e];
                let (a0, a1, a2, a3) = (at(nb[0]), at(nb[1]), at(nb[2]), at(nb[3]));
                *d = C64::new(
                    stencil(a0.re, a1.re, a2.re, a3.re, inv12h),
                    stencil(a0.im, a1.im, a2.im, a3.im, inv12h),
                );
            }
            // term = u† du
            for i in 0..k {
                for c in 0..k {
                    let mut acc = ZERO;
                    for l in 0..k {
                        acc += us[l * k + i].conj() * du[l * k + c];
                    }
                    term[i * k + c] = acc;
                }
            }
            project_algebra_in_place(&mut term, k);
            for (x, t) in o[j * b..(j + 1) * b].iter_mut().zip(&term) {
                *x += t;
            }
        }
    });
    Connection::new(out)
}

fn conjugate_raw(u: &GaugeField, data: &[C64], site_len: usize) -> Vec<C64> {
    let k = u.grid.k();
    let b = u.grid.block();
    let mut out = vec![ZERO; data.len()];
    out.par_chunks_mut(site_len).enumerate().for_each(|(site, o)| {
        let us = &u.data[site * b..(site + 1) * b];
        let mut scratch = vec![ZERO; b];
        for (oc, xc) in o.chunks_mut(b).zip(data[site * site_len..(site + 1) * site_len].chunks(b)) {
            conj_inv_into(us, xc, oc, &mut scratch, k);
        }
    });
    out
}

/// Componentwise `u⁻¹ B_I u`.
pub fn conjugate_form(u: &GaugeField, b: &FormField) -> Result<FormField> {
    check_grid(u, b.grid())?;
    FormField::from_data(*b.grid(), b.degree(), conjugate_raw(u, b.data(), b.site_len()))
}

/// Componentwise `u⁻¹ T u`.
pub fn conjugate_tensor(u: &GaugeField, t: &CovariantTensor) -> Result<CovariantTensor> {
    check_grid(u, &t.grid)?;
    Ok(CovariantTensor { data: conjugate_raw(u, &t.data, t.site_len()), ..t.clone_shape() })
}

/// `d_A B = dB + [A, B]`.
pub fn covariant_d(a: &Connection, b: &FormField) -> Result<FormField> {
    let mut out = b.ext_d()?;
    out.axpy(1.0, &a.graded_bracket(b)?)?;
    Ok(out)
}

/// Sign `(−1)^{(p+1)m+1}` of `d* = ± *d*` on `p`-forms.
fn codiff_sign(m: usize, p: usize) -> f64 {
    if ((p + 1) * m + 1) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `d_A* B = (−1)^{(p+1)m+1} * d_A * B = d*B + (−1)^{(p+1)m+1} *[A, *B]`.
///
/// On 2-forms the sign is `(−1)^{m+1}`; for every degree this is the exact
/// transpose of [`covariant_d`].
pub fn covariant_codiff(a: &Connection, b: &FormField) -> Result<FormField> {
    let mut out = b.codifferential()?;
    let twist = a.graded_bracket(&b.hodge_star())?.hodge_star();
    out.axpy(codiff_sign(a.grid().m(), b.degree()), &twist)?;
    Ok(out)
}

/// `d_A^{*∧j} B`: applies `d_A*, d_A, d_A*, …` (`j` operators, `d_A*` first).
pub fn alternating_codiff(a: &Connection, b: &FormField, j: usize) -> Result<FormField> {
    let mut cur = b.clone();
    for i in 0..j {
        cur = if i % 2 == 0 { covariant_codiff(a, &cur)? } else { covariant_d(a, &cur)? };
    }
    Ok(cur)
}

/// `d_A^{∧j} C`: applies `d_A, d_A*, d_A, …` (`j` operators, `d_A` first).
pub fn alternating_d(a: &Connection, c: &FormField, j: usize) -> Result<FormField> {
    let mut cur = c.clone();
    for i in 0..j {
        cur = if i % 2 == 0 { covariant_d(a, &cur)? } else { covariant_codiff(a, &cur)? };
    }
    Ok(cur)
}

/// `(D_A T)_{j,·} = ∂_j T_· + [A_j, T_·]`, flat Levi-Civita part.
pub fn full_covariant_derivative(a: &Connection, t: &CovariantTensor) -> Result<CovariantTensor> {
    a.grid().check_compatible(&t.grid)?;
    let grid = t.grid;
    let m = grid.m();
    let k = grid.k();
    let b = grid.block();
    let old = t.num_components();
    let is = t.site_len();
    let inv12h = 1.0 / (12.0 * grid.spacing());
    let mut out = CovariantTensor::zeros(grid, t.slots + 1, t.base_degree);
    let os = out.site_len();
    out.data.par_chunks_mut(os).enumerate().for_each(|(site, o)| {
        for j in 0..m {
            let nb = grid.neighbours(site, j);
            let aj = a.coeff(site, j);
            for c in 0..old {
                let dst = &mut o[(j * old + c) * b..(j * old + c + 1) * b];
                for (e, d) in dst.iter_mut().enumerate() {
                    let at = |s: usize| t.data[s * is + c * b + e];
                    let (a0, a1, a2, a3) = (at(nb[0]), at(nb[1]), at(nb[2]), at(nb[3]));
                    *d = C64::new(
                        stencil(a0.re, a1.re, a2.re, a3.re, inv12h),
                        stencil(a0.im, a1.im, a2.im, a3.im, inv12h),
                    );
                }
                comm_acc(dst, aj, &t.data[site * is + c * b..site * is + (c + 1) * b], k, 1.0);
            }
        }
    });
    Ok(out)
}

/// Pointwise norms `|D_A T|(x)` computed site by site without storing `D_A T`.
pub fn full_derivative_norms(a: &Connection, t: &CovariantTensor) -> Result<Vec<f64>> {
    a.grid().check_compatible(&t.grid)?;
    let grid = t.grid;
    let m = grid.m();
    let k = grid.k();
    let b = grid.block();
    let old = t.num_components();
    let is = t.site_len();
    let inv12h = 1.0 / (12.0 * grid.spacing());
    let mut out = vec![0.0; grid.num_sites()];
    out.par_iter_mut().enumerate().for_each(|(site, o)| {
        let mut d = vec![ZERO; b];
        let mut acc = 0.0;
        for j in 0..m {
            let nb = grid.neighbours(site, j);
            let aj = a.coeff(site, j);
            for c in 0..old {
                for (e, v) in d.iter_mut().enumerate() {
                    let at = |s: usize| t.data[s * is + c * b + e];
                    let (a0, a1, a2, a3) = (at(nb[0]), at(nb[1]), at(nb[2]), at(nb[3]));
                    *v = C64::new(
                        stencil(a0.re, a1.re, a2.re, a3.re, inv12h),
                        stencil(a0.im, a1.im, a2.im, a3.im, inv12h),
                    );
                }
                comm_acc(&mut d, aj, &t.data[site * is + c * b..site * is + (c + 1) * b], k, 1.0);
                acc += inner_raw(&d, &d, k);
            }
        }
        *o = acc.max(0.0).sqrt();
    });
    Ok(out)
}

/// `D_A^j F_A`.
pub fn iterated_full_derivative(a: &Connection, j: usize) -> Result<CovariantTensor> {
    let mut t = CovariantTensor::from_form(&curvature(a));
    for _ in 0..j {
        t = full_covariant_derivative(a, &t)?;
    }
    Ok(t)
}

/// Exact discrete transpose of [`full_covariant_derivative`] in its tensor
/// argument: `(D_Aᵀλ)_· = −Σ_j (∂_j λ_{j,·} + [A_j, λ_{j,·}])`.
pub fn full_derivative_adjoint(a: &Connection, lambda: &CovariantTensor) -> Result<CovariantTensor> {
    a.grid().check_compatible(&lambda.grid)?;
    if lambda.slots == 0 {
        return Err(GaugeError::InvalidArgument("adjoint needs at least one slot".into()));
    }
    let grid = lambda.grid;
    let m = grid.m();
    let k = grid.k();
    let b = grid.block();
    let mut out = CovariantTensor::zeros(grid, lambda.slots - 1, lambda.base_degree);
    let old = out.num_components();
    let ls = lambda.site_len();
    let os = out.site_len();
    let inv12h = 1.0 / (12.0 * grid.spacing());
    out.data.par_chunks_mut(os).enumerate().for_each(|(site, o)| {
        for j in 0..m {
            let nb = grid.neighbours(site, j);
            let aj = a.coeff(site, j);
            for c in 0..old {
                let src = (j * old + c) * b;
                let dst = &mut o[c * b..(c + 1) * b];
                for (e, d) in dst.iter_mut().enumerate() {
                    let at = |s: usize| lambda.data[s * ls + src + e];
                    let (a0, a1, a2, a3) = (at(nb[0]), at(nb[1]), at(nb[2]), at(nb[3]));
                    *d -= C64::new(
                        stencil(a0.re, a1.re, a2.re, a3.re, inv12h),
                        stencil(a0.im, a1.im, a2.im, a3.im, inv12h),
                    );
                }
                comm_acc(dst, aj, &lambda.data[site * ls + src..site * ls + src + b], k, -1.0);
            }
        }
    });
    Ok(out)
}

/// 1-form `g` with `⟨g, α⟩ = ⟨λ, Σ_j dx^j ⊗ [α_j, T]⟩`:
/// `g_j = Σ_· [T_·, λ_{j,·}]`.
pub(crate) fn tensor_pullback(t: &CovariantTensor, lambda: &CovariantTensor) -> Result<FormField> {
    t.grid.check_compatible(&lambda.grid)?;
    if lambda.slots != t.slots + 1 || lambda.base_degree != t.base_degree {
        return Err(GaugeError::InvalidArgument("tensor pullback shape mismatch".into()));
    }
    let grid = t.grid;
    let m = grid.m();
    let k = grid.k();
    let b = grid.block();
    let old = t.num_components();
    let (ts, ls) = (t.site_len(), lambda.site_len());
    let mut out = FormField::zeros(grid, 1)?;
    out.data_mut().par_chunks_mut(m * b).enumerate().for_each(|(site, o)| {
        for j in 0..m {
            let dst = &mut o[j * b..(j + 1) * b];
            for c in 0..old {
                comm_acc(
                    dst,
                    &t.data[site * ts + c * b..site * ts + (c + 1) * b],
                    &lambda.data[site * ls + (j * old + c) * b..site * ls + (j * old + c + 1) * b],
                    k,
                    1.0,
                );
            }
        }
    });
    Ok(out)
}

/// Pullback through the `A`-dependence of `d_A* B`: the 1-form `g` with
/// `⟨g, α⟩ = ⟨λ, ± *[α, *B]⟩` with the sign of [`covariant_codiff`].
pub(crate) fn codiff_pullback(b: &FormField, lambda: &FormField) -> Result<FormField> {
    let g = crate::forms::bracket_pullback(&b.hodge_star(), &lambda.hodge_star_transpose())?;
    Ok(g.scale(codiff_sign(b.grid().m(), b.degree())))
}

/// Pullback through the `A`-dependence of `d_A C`: `⟨g, α⟩ = ⟨λ, [α, C]⟩`.
pub(crate) fn d_pullback(c: &FormField, lambda: &FormField) -> Result<FormField> {
    crate::forms::bracket_pullback(c, lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fieldgen::FieldGen;
    use crate::liealg::{abelian_generator, random_element, LieAlgebraElement};
    use std::f64::consts::PI;

    fn grid(m: usize, n: usize) -> GridSpec {
        GridSpec::new(m, n, 2, 2).unwrap()
    }

    fn const_gauge(g: GridSpec, seed: u64) -> GaugeField {
        GaugeField::constant(g, &random_element(2, seed, 1.0).exp_map()).unwrap()
    }

    #[test]
    fn curvature_examples() {
        let g = grid(2, 8);
        assert!(curvature(&Connection::zeros(g)).data().iter().all(|z| *z == ZERO));
        let x = random_element(2, 1, 1.0);
        let y = random_element(2, 2, 1.0);
        let a = Connection::new(FormField::constant(g, 1, &[x.clone(), y.clone()]).unwrap()).unwrap();
        let f = curvature(&a);
        let xy = x.bracket(&y).unwrap();
        for s in 0..g.num_sites() {
            assert!(f.coeff(s, 0).iter().zip(xy.entries()).all(|(a, b)| (a - b).norm() < 1e-15));
        }

        let gen = abelian_generator(2);
        let err = |n: usize| {
            let g = grid(2, n);
            let a = sine_connection(g, &gen);
            let f = curvature(&a);
            (0..g.num_sites())
                .map(|s| {
                    let c = -2.0 * PI * (2.0 * PI * g.position(s)[1]).cos();
                    f.coeff(s, 0).iter().zip(gen.entries()).map(|(v, e)| (v - e * c).norm()).fold(0.0, f64::max)
                })
                .fold(0.0, f64::max)
        };
        assert!((err(32) / err(64)).log2() >= 3.8);
    }

    fn sine_connection(g: GridSpec, x: &LieAlgebraElement) -> Connection {
        let f = FormField::from_fn(g, 1, |pos, comp, out| {
            if comp == 0 {
                let s = (2.0 * PI * pos[1]).sin();
                for (o, e) in out.iter_mut().zip(x.entries()) {
                    *o = e * s;
                }
            }
        })
        .unwrap();
        Connection::new(f).unwrap()
    }

    #[test]
    fn gauge_transform_examples() {
        let g = grid(3, 8);
        let a = FieldGen::new(3, 2, 0.5).connection(&g).unwrap();
        assert_eq!(gauge_transform_connection(&GaugeField::identity(g), &a).unwrap(), a);
        let u = const_gauge(g, 9);
        let z = gauge_transform_connection(&u, &Connection::zeros(g)).unwrap();
        assert!(z.data().iter().all(|v| *v == ZERO));
        let ua = gauge_transform_connection(&u, &a).unwrap();
        assert_eq!(ua.form(), &conjugate_form(&u, &a).unwrap());
        let lhs = curvature(&ua);
        let rhs = conjugate_form(&u, &curvature(&a)).unwrap();
        assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-12);
        assert!(ua.is_algebra_valued(1e-12));
        let smooth = FieldGen::new(4, 1, 0.5).gauge(&g).unwrap();
        assert!(gauge_transform_connection(&smooth, &a).unwrap().is_algebra_valued(1e-12));
    }

    #[test]
    fn conjugation_examples() {
        let g = grid(2, 8);
        let b = FieldGen::new(5, 2, 1.0).form(&g, 2).unwrap();
        assert_eq!(conjugate_form(&GaugeField::identity(g), &b).unwrap(), b);
        let u = FieldGen::new(6, 2, 1.0).gauge(&g).unwrap();
        let cb = conjugate_form(&u, &b).unwrap();
        for p in [2.0, 3.0] {
            assert!((cb.lp_norm(p).unwrap() - b.lp_norm(p).unwrap()).abs() < 1e-12);
        }
        let back = conjugate_form(&u, &conjugate_form(&u.inverse(), &b).unwrap()).unwrap();
        assert!(back.max_abs_diff(&b).unwrap() < 1e-12);
    }

    #[test]
    fn covariant_operator_examples() {
        let g = grid(2, 8);
        let b = FieldGen::new(7, 2, 1.0).form(&g, 1).unwrap();
        let zero = Connection::zeros(g);
        assert_eq!(covariant_d(&zero, &b).unwrap(), b.ext_d().unwrap());
        let b2 = FieldGen::new(8, 2, 1.0).form(&g, 2).unwrap();
        assert_eq!(covariant_codiff(&zero, &b2).unwrap(), b2.codifferential().unwrap());

        // constant A = X dx¹, B = Y dx¹∧dx² on T²:
        // *B = Y, [A, Y] = [X, Y] dx¹, * → [X, Y] dx², sign (−1)^3 = −1.
        let x = random_element(2, 1, 1.0);
        let y = random_element(2, 2, 1.0);
        let zl = LieAlgebraElement::zero(2);
        let a = Connection::new(FormField::constant(g, 1, &[x.clone(), zl.clone()]).unwrap()).unwrap();
        let bb = FormField::constant(g, 2, &[y.clone()]).unwrap();
        let r = covariant_codiff(&a, &bb).unwrap();
        let xy = x.bracket(&y).unwrap();
        assert!(r.coeff(3, 0).iter().all(|v| v.norm() < 1e-15));
        assert!(r.coeff(3, 1).iter().zip(xy.entries()).all(|(v, e)| (v + e).norm() < 1e-15));

        // constant A, constant B: d_A B = [A, B]
        let c = FormField::constant(g, 1, &[y.clone(), x.clone()]).unwrap();
        assert_eq!(covariant_d(&a, &c).unwrap(), a.graded_bracket(&c).unwrap());
    }

    #[test]
    fn covariant_adjointness() {
        for m in 2..=4 {
            let n = if m == 4 { 8 } else { 16 };
            let g = grid(m, n);
            let a = FieldGen::new(11, 2, 0.7).connection(&g).unwrap();
            for p in 0..m {
                let al = FieldGen::new(12, 2, 1.0).form(&g, p).unwrap();
                let be = FieldGen::new(13, 2, 1.0).form(&g, p + 1).unwrap();
                let lhs = covariant_d(&a, &al).unwrap().discrete_inner(&be).unwrap();
                let rhs = al.discrete_inner(&covariant_codiff(&a, &be).unwrap()).unwrap();
                let scale = al.lp_norm(2.0).unwrap() * be.lp_norm(2.0).unwrap();
                assert!((lhs - rhs).abs() <= 1e-11 * scale, "m={m} p={p}");
            }
        }
    }

    #[test]
    fn alternating_unrolls() {
        let g = grid(2, 8);
        let a = FieldGen::new(14, 2, 0.5).connection(&g).unwrap();
        let b = FieldGen::new(15, 2, 1.0).form(&g, 2).unwrap();
        assert_eq!(alternating_codiff(&a, &b, 0).unwrap(), b);
        let one = covariant_codiff(&a, &b).unwrap();
        assert_eq!(alternating_codiff(&a, &b, 1).unwrap(), one);
        assert_eq!(alternating_codiff(&a, &b, 2).unwrap(), covariant_d(&a, &one).unwrap());
        let c = FieldGen::new(16, 2, 1.0).form(&g, 1).unwrap();
        assert_eq!(alternating_d(&a, &c, 0).unwrap(), c);
        assert_eq!(alternating_d(&a, &c, 1).unwrap(), covariant_d(&a, &c).unwrap());
    }

    fn profile_form(g: GridSpec, degree: usize, comp: usize, axis: usize, x: &LieAlgebraElement) -> FormField {
        FormField::from_fn(g, degree, |pos, c, out| {
            if c == comp {
                let s = (2.0 * PI * pos[axis]).sin();
                for (o, e) in out.iter_mut().zip(x.entries()) {
                    *o = e * s;
                }
            }
        })
        .unwrap()
    }

    fn order_of(err: impl Fn(usize) -> f64) -> f64 {
        (err(32) / err(64)).log2()
    }

    #[test]
    fn flat_second_order_oracles() {
        let x = LieAlgebraElement::pauli(3);
        // d d*(sin(2πx₁) X dx¹∧dx²) = 4π² sin(2πx₁) X dx¹∧dx²
        let o = order_of(|n| {
            let g = grid(2, n);
            let b = profile_form(g, 2, 0, 0, &x);
            let r = alternating_codiff(&Connection::zeros(g), &b, 2).unwrap();
            let exact = b.scale(4.0 * PI * PI);
            r.max_abs_diff(&exact).unwrap()
        });
        assert!(o >= 3.8, "order {o}");
        // d*d(sin(2πx₂) X dx¹) = 4π² sin(2πx₂) X dx¹
        let o = order_of(|n| {
            let g = grid(2, n);
            let c = profile_form(g, 1, 0, 1, &x);
            let r = alternating_d(&Connection::zeros(g), &c, 2).unwrap();
            r.max_abs_diff(&c.scale(4.0 * PI * PI)).unwrap()
        });
        assert!(o >= 3.8, "order {o}");
    }

    #[test]
    fn full_derivative_examples() {
        let g = grid(2, 8);
        let t = CovariantTensor::from_form(&FormField::constant(g, 2, &[random_element(2, 1, 1.0)]).unwrap());
        let d = full_covariant_derivative(&Connection::zeros(g), &t).unwrap();
        assert!(d.data().iter().all(|z| *z == ZERO));
        assert_eq!(d.num_components(), 2);

        // abelian: D_j F₁₂ = ∂_j(−2π cos(2πx₂)) X
        let gen = abelian_generator(2);
        let o = order_of(|n| {
            let g = grid(2, n);
            let a = sine_connection(g, &gen);
            let d = iterated_full_derivative(&a, 1).unwrap();
            (0..g.num_sites())
                .map(|s| {
                    let y = g.position(s)[1];
                    let exact = [0.0, 4.0 * PI * PI * (2.0 * PI * y).sin()];
                    (0..2)
                        .map(|j| {
                            d.coeff(s, j)
                                .iter()
                                .zip(gen.entries())
                                .map(|(v, e)| (v - e * exact[j]).norm())
                                .fold(0.0, f64::max)
                        })
                        .fold(0.0, f64::max)
                })
                .fold(0.0, f64::max)
        });
        assert!(o >= 3.8, "order {o}");
    }

    #[test]
    fn full_derivative_constant_gauge() {
        let g = grid(3, 8);
        let a = FieldGen::new(17, 2, 0.6).connection(&g).unwrap();
        let u = const_gauge(g, 18);
        let ua = gauge_transform_connection(&u, &a).unwrap();
        for j in 0..3 {
            let l = iterated_full_derivative(&ua, j).unwrap();
            let r = iterated_full_derivative(&a, j).unwrap();
            assert!((l.lp_norm(2.0).unwrap() - r.lp_norm(2.0).unwrap()).abs() < 1e-12 * r.lp_norm(2.0).unwrap().max(1.0));
            assert!(l.max_abs_diff(&conjugate_tensor(&u, &r).unwrap()).unwrap() < 1e-10);
        }
        assert_eq!(iterated_full_derivative(&a, 0).unwrap().to_form().unwrap(), curvature(&a));
        let t = iterated_full_derivative(&a, 1).unwrap();
        let stored = full_covariant_derivative(&a, &t).unwrap().pointwise_norms();
        let streamed = full_derivative_norms(&a, &t).unwrap();
        assert!(stored.iter().zip(&streamed).all(|(x, y)| (x - y).abs() <= 1e-12 * x.max(1.0)));
    }

    #[test]
    fn pullbacks_are_transposes() {
        let g = grid(3, 8);
        let a = FieldGen::new(19, 2, 0.6).connection(&g).unwrap();
        let alpha = FieldGen::new(20, 2, 1.0).form(&g, 1).unwrap();
        let t = iterated_full_derivative(&a, 1).unwrap();
        let lam = CovariantTensor::from_form(&FieldGen::new(21, 2, 1.0).form(&g, 2).unwrap());
        let lam = full_covariant_derivative(&a, &full_covariant_derivative(&a, &lam).unwrap()).unwrap();
        // ⟨λ, D_A T⟩ = ⟨D_Aᵀλ, T⟩
        let lhs = lam.discrete_inner(&full_covariant_derivative(&a, &t).unwrap()).unwrap();
        let rhs = full_derivative_adjoint(&a, &lam).unwrap().discrete_inner(&t).unwrap();
        assert!((lhs - rhs).abs() < 1e-10 * lhs.abs().max(1.0));
        // A-derivative of D_A T is Σ dx^j ⊗ [α_j, T]
        let da = full_covariant_derivative(&Connection::new(alpha.clone()).unwrap(), &t).unwrap();
        let flat = full_covariant_derivative(&Connection::zeros(g), &t).unwrap();
        let lin = da.sub(&flat).unwrap();
        let lhs = lam.discrete_inner(&lin).unwrap();
        let rhs = tensor_pullback(&t, &lam).unwrap().discrete_inner(&alpha).unwrap();
        assert!((lhs - rhs).abs() < 1e-10 * lhs.abs().max(1.0));
        // A-derivative of d_A* B
        let b = FieldGen::new(22, 2, 1.0).form(&g, 2).unwrap();
        let l1 = FieldGen::new(23, 2, 1.0).form(&g, 1).unwrap();
        let lin = covariant_codiff(&Connection::new(alpha.clone()).unwrap(), &b)
            .unwrap()
            .sub(&b.codifferential().unwrap())
            .unwrap();
        let lhs = l1.discrete_inner(&lin).unwrap();
        let rhs = codiff_pullback(&b, &l1).unwrap().discrete_inner(&alpha).unwrap();
        assert!((lhs - rhs).abs() < 1e-12 * lhs.abs().max(1.0));
    }
}
