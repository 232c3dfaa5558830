//! Matrix-valued differential forms on the periodic grid.
//!
//! A [`FormField`] of degree `p` stores one `k×k` complex coefficient per site
//! per strictly increasing multi-index `I`, `|I| = p`. Layout is
//! `[site][component][k×k row-major]`, components in lexicographic order.
//!
//! Fields built from su(k) data through brackets, stars and derivatives stay
//! in su(k). [`FormField::wedge`] uses plain matrix multiplication and so
//! generally leaves the algebra; that is what the curvature and the Chern
//! polynomials need.
//!
//! The pointwise norm is `|B|² = Σ_{I increasing} ⟨B_I, B_I⟩` and integrals
//! are Riemann sums `h^m Σ_x`.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{GaugeError, Result};
use crate::grid::{stencil, GridSpec, MAX_DIM};
use crate::liealg::{comm_acc, inner_raw, is_algebra, mat_mul_acc, LieAlgebraElement};
use crate::multiindex::{binomial, combos, concat_sign, position, wedge_terms};

#[derive(Debug, Clone, PartialEq)]
pub struct FormField {
    grid: GridSpec,
    degree: usize,
    data: Vec<C64>,
}

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

impl FormField {
    pub fn zeros(grid: GridSpec, degree: usize) -> Result<Self> {
        if degree > grid.m() {
            return Err(GaugeError::DegreeOutOfRange { degree, m: grid.m() });
        }
        let len = grid.num_sites() * binomial(grid.m(), degree) * grid.block();
        Ok(Self { grid, degree, data: vec![ZERO; len] })
    }

    /// Wraps raw coefficient data in the documented layout.
    pub fn from_data(grid: GridSpec, degree: usize, data: Vec<C64>) -> Result<Self> {
        if degree > grid.m() {
            return Err(GaugeError::DegreeOutOfRange { degree, m: grid.m() });
        }
        let len = grid.num_sites() * binomial(grid.m(), degree) * grid.block();
        if data.len() != len {
            return Err(GaugeError::InvalidArgument(format!(
                "expected {len} coefficients, got {}",
                data.len()
            )));
        }
        Ok(Self { grid, degree, data })
    }

    /// The same coefficient in every component slot listed, at every site.
    /// `components[c]` is the value of component `c` (lexicographic order).
    pub fn constant(grid: GridSpec, degree: usize, components: &[LieAlgebraElement]) -> Result<Self> {
        let mut f = Self::zeros(grid, degree)?;
        if components.len() != f.num_components() {
            return Err(GaugeError::InvalidArgument(format!(
                "expected {} components, got {}",
                f.num_components(),
                components.len()
            )));
        }
        for c in components {
            if c.k() != grid.k() {
                return Err(GaugeError::DimensionMismatch(c.k(), grid.k()));
            }
        }
        let stride = f.site_len();
        let b = grid.block();
        f.data.par_chunks_mut(stride).for_each(|site| {
            for (c, x) in components.iter().enumerate() {
                site[c * b..(c + 1) * b].copy_from_slice(x.entries());
            }
        });
        Ok(f)
    }

    /// Builds a field by evaluating `f(position, component, out)` at every
    /// site; `out` is the zeroed `k×k` coefficient to fill.
    pub fn from_fn<F>(grid: GridSpec, degree: usize, f: F) -> Result<Self>
    where
        F: Fn(&[f64], usize, &mut [C64]) + Sync,
    {
        let mut field = Self::zeros(grid, degree)?;
        let ncomp = field.num_components();
        let b = grid.block();
        let stride = field.site_len();
        let m = grid.m();
        let h = grid.spacing();
        field.data.par_chunks_mut(stride).enumerate().for_each(|(site, out)| {
            let mut pos = [0.0; MAX_DIM];
            for (a, x) in pos[..m].iter_mut().enumerate() {
                *x = grid.coord(site, a) as f64 * h;
            }
            for c in 0..ncomp {
                f(&pos[..m], c, &mut out[c * b..(c + 1) * b]);
            }
        });
        Ok(field)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn num_components(&self) -> usize {
        binomial(self.grid.m(), self.degree)
    }

    pub(crate) fn site_len(&self) -> usize {
        self.num_components() * self.grid.block()
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    /// Coefficient of component `comp` at `site`.
    pub fn coeff(&self, site: usize, comp: usize) -> &[C64] {
        let b = self.grid.block();
        let start = site * self.site_len() + comp * b;
        &self.data[start..start + b]
    }

    pub fn coeff_mut(&mut self, site: usize, comp: usize) -> &mut [C64] {
        let b = self.grid.block();
        let start = site * self.site_len() + comp * b;
        &mut self.data[start..start + b]
    }

    /// Component index of the multi-index given as a sorted list of axes.
    pub fn component_index(&self, axes: &[usize]) -> Result<usize> {
        let mut mask = 0u32;
        for &a in axes {
            if a >= self.grid.m() || mask & (1 << a) != 0 {
                return Err(GaugeError::InvalidArgument(format!("bad multi-index {axes:?}")));
            }
            mask |= 1 << a;
        }
        if axes.len() != self.degree {
            return Err(GaugeError::InvalidArgument(format!("multi-index {axes:?} has wrong degree")));
        }
        Ok(position(self.grid.m(), mask))
    }

    /// True when every coefficient is anti-Hermitian and traceless within `tol`.
    pub fn is_algebra_valued(&self, tol: f64) -> bool {
        let k = self.grid.k();
        self.data.chunks(self.grid.block()).all(|c| is_algebra(c, k, tol))
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        self.grid.check_compatible(&other.grid)?;
        if self.degree != other.degree {
            return Err(GaugeError::InvalidArgument(format!(
                "degree mismatch: {} vs {}",
                self.degree, other.degree
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(Self { grid: self.grid, degree: self.degree, data })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(Self { grid: self.grid, degree: self.degree, data })
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { grid: self.grid, degree: self.degree, data: self.data.iter().map(|z| z * s).collect() }
    }

    /// `self += s · other`.
    pub fn axpy(&mut self, s: f64, other: &Self) -> Result<()> {
        self.check_same_shape(other)?;
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * s;
        }
        Ok(())
    }

    /// Wedge product with matrix multiplication of coefficients:
    /// `(B∧C)_K = Σ_{K = I⊔J} sign(I,J) B_I C_J`.
    pub fn wedge(&self, other: &Self) -> Result<Self> {
        let m = self.check_product(other)?;
        let terms = wedge_terms(m, self.degree, other.degree);
        let k = self.grid.k();
        let b = self.grid.block();
        let mut out = Self::zeros(self.grid, self.degree + other.degree)?;
        let (ls, rs, os) = (self.site_len(), other.site_len(), out.site_len());
        out.data.par_chunks_mut(os).enumerate().for_each(|(site, o)| {
            let l = &self.data[site * ls..(site + 1) * ls];
            let r = &other.data[site * rs..(site + 1) * rs];
            for t in &terms {
                mat_mul_acc(
                    &mut o[t.out * b..(t.out + 1) * b],
                    &l[t.left * b..(t.left + 1) * b],
                    &r[t.right * b..(t.right + 1) * b],
                    k,
                    t.sign,
                );
            }
        });
        Ok(out)
    }

    /// `[B, C] = B∧C − (−1)^{pq} C∧B`, computed as
    /// `Σ_{K = I⊔J} sign(I,J) [B_I, C_J]`.
    pub fn graded_bracket(&self, other: &Self) -> Result<Self> {
        let m = self.check_product(other)?;
        let terms = wedge_terms(m, self.degree, other.degree);
        let k = self.grid.k();
        let b = self.grid.block();
        let mut out = Self::zeros(self.grid, self.degree + other.degree)?;
        let (ls, rs, os) = (self.site_len(), other.site_len(), out.site_len());
        out.data.par_chunks_mut(os).enumerate().for_each(|(site, o)| {
            let l = &self.data[site * ls..(site + 1) * ls];
            let r = &other.data[site * rs..(site + 1) * rs];
            for t in &terms {
                comm_acc(
                    &mut o[t.out * b..(t.out + 1) * b],
                    &l[t.left * b..(t.left + 1) * b],
                    &r[t.right * b..(t.right + 1) * b],
                    k,
                    t.sign,
                );
            }
        });
        Ok(out)
    }

    fn check_product(&self, other: &Self) -> Result<usize> {
        self.grid.check_compatible(&other.grid)?;
        let m = self.grid.m();
        if self.degree + other.degree > m {
            return Err(GaugeError::DegreeOutOfRange { degree: self.degree + other.degree, m });
        }
        Ok(m)
    }

    /// Flat Hodge star for the standard orientation:
    /// `(*B)_{Iᶜ} = sign(I, Iᶜ) B_I`.
    pub fn hodge_star(&self) -> Self {
        let m = self.grid.m();
        let full = (1u32 << m) - 1;
        let map: Vec<(usize, f64)> = combos(m, self.degree)
            .iter()
            .map(|&i| (position(m, full & !i), concat_sign(i, full & !i)))
            .collect();
        self.permute_components(m - self.degree, &map)
    }

    /// Transpose of the star that maps `(m−p)`-forms onto `p`-forms, applied
    /// to a `p`-form: `(*ᵀλ)_J = sign(J, Jᶜ) λ_{Jᶜ}`.
    pub(crate) fn hodge_star_transpose(&self) -> Self {
        let m = self.grid.m();
        let full = (1u32 << m) - 1;
        // input component Jᶜ (degree p) goes to J (degree m−p)
        let map: Vec<(usize, f64)> = combos(m, self.degree)
            .iter()
            .map(|&jc| {
                let j = full & !jc;
                (position(m, j), concat_sign(j, jc))
            })
            .collect();
        self.permute_components(m - self.degree, &map)
    }

    fn permute_components(&self, new_degree: usize, map: &[(usize, f64)]) -> Self {
        let b = self.grid.block();
        let mut out = Self::zeros(self.grid, new_degree).expect("degree within range");
        let (is, os) = (self.site_len(), out.site_len());
        out.data.par_chunks_mut(os).enumerate().for_each(|(site, o)| {
            let src = &self.data[site * is..(site + 1) * is];
            for (c, &(dst, sign)) in map.iter().enumerate() {
                for e in 0..b {
                    o[dst * b + e] = src[c * b + e] * sign;
                }
            }
        });
        out
    }

    /// Exterior derivative with the fourth-order central stencil:
    /// `(dB)_K = Σ_{j∈K} sign(j, K∖j) ∂_j B_{K∖j}`.
    pub fn ext_d(&self) -> Result<Self> {
        let m = self.grid.m();
        if self.degree >= m {
            return Err(GaugeError::DegreeOutOfRange { degree: self.degree + 1, m });
        }
        let terms = combos(m, self.degree + 1)
            .into_iter()
            .map(|kmask| {
                (0..m)
                    .filter(|j| kmask & (1 << j) != 0)
                    .map(|j| {
                        let imask = kmask & !(1 << j);
                        (j, position(m, imask), concat_sign(1 << j, imask))
                    })
                    .collect()
            })
            .collect();
        self.derivative_terms(self.degree + 1, terms)
    }

    /// Codifferential, the exact transpose of [`FormField::ext_d`] under
    /// [`FormField::discrete_inner`]. The stencil is antisymmetric, so
    /// `(d*B)_I = −Σ_{j∉I} sign(j, I) ∂_j B_{I∪j}`, which equals
    /// `(−1)^{(p+1)m+1} * d *` on `p`-forms.
    pub fn codifferential(&self) -> Result<Self> {
        let m = self.grid.m();
        if self.degree == 0 {
            return Err(GaugeError::DegreeOutOfRange { degree: 0, m });
        }
        let terms = combos(m, self.degree - 1)
            .into_iter()
            .map(|imask| {
                (0..m)
                    .filter(|j| imask & (1 << j) == 0)
                    .map(|j| (j, position(m, imask | (1 << j)), -concat_sign(1 << j, imask)))
                    .collect()
            })
            .collect();
        self.derivative_terms(self.degree - 1, terms)
    }

    /// `out_c = Σ_{(axis, src, sign) ∈ terms[c]} sign · ∂_axis self_src`.
    fn derivative_terms(&self, out_degree: usize, terms: Vec<Vec<(usize, usize, f64)>>) -> Result<Self> {
        let m = self.grid.m();
        let b = self.grid.block();
        let inv12h = 1.0 / (12.0 * self.grid.spacing());
        let grid = self.grid;
        let is = self.site_len();
        let mut out = Self::zeros(self.grid, out_degree)?;
        let os = out.site_len();
        out.data.par_chunks_mut(os).enumerate().for_each(|(site, o)| {
            let mut nbrs = [[0usize; 4]; MAX_DIM];
            for (a, nb) in nbrs[..m].iter_mut().enumerate() {
                *nb = grid.neighbours(site, a);
            }
            for (kc, t) in terms.iter().enumerate() {
                let dst = &mut o[kc * b..(kc + 1) * b];
                for &(axis, ic, sign) in t {
                    let nb = nbrs[axis];
                    for (e, d) in dst.iter_mut().enumerate() {
                        let at = |s: usize| self.data[s * is + ic * b + e];
                        let (a0, a1, a2, a3) = (at(nb[0]), at(nb[1]), at(nb[2]), at(nb[3]));
                        let re = stencil(a0.re, a1.re, a2.re, a3.re, inv12h);
                        let im = stencil(a0.im, a1.im, a2.im, a3.im, inv12h);
                        *d += C64::new(re, im) * sign;
                    }
                }
            }
        });
        Ok(out)
    }

    /// `h^m Σ_x Σ_I ⟨B_I, C_I⟩`.
    pub fn discrete_inner(&self, other: &Self) -> Result<f64> {
        self.check_same_shape(other)?;
        let k = self.grid.k();
        let b = self.grid.block();
        let sum: f64 = self
            .data
            .chunks(b)
            .zip(other.data.chunks(b))
            .map(|(x, y)| inner_raw(x, y, k))
            .sum();
        Ok(sum * self.grid.cell_volume())
    }

    /// Pointwise norm `|B(x)|`.
    pub fn pointwise_norm(&self, site: usize) -> f64 {
        let k = self.grid.k();
        let b = self.grid.block();
        let s = self.site_len();
        self.data[site * s..(site + 1) * s]
            .chunks(b)
            .map(|c| inner_raw(c, c, k))
            .sum::<f64>()
            .max(0.0)
            .sqrt()
    }

    pub fn pointwise_norms(&self) -> Vec<f64> {
        (0..self.grid.num_sites()).map(|s| self.pointwise_norm(s)).collect()
    }

    /// `(h^m Σ_x |B(x)|^p)^{1/p}`.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        if !(p >= 1.0) {
            return Err(GaugeError::InvalidArgument(format!("L^p norm needs p >= 1, got {p}")));
        }
        Ok(lp_from_pointwise(&self.pointwise_norms(), p, self.grid.cell_volume()))
    }

    /// Largest absolute entry difference, for exactness checks.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }
}

pub(crate) fn lp_from_pointwise(norms: &[f64], p: f64, vol: f64) -> f64 {
    if p == 2.0 {
        return (norms.iter().map(|v| v * v).sum::<f64>() * vol).sqrt();
    }
    (norms.iter().map(|v| v.powf(p)).sum::<f64>() * vol).powf(1.0 / p)
}

/// The 1-form `g` with `⟨g, α⟩ = ⟨λ, [α, C]⟩` for every 1-form `α`, where `C`
/// has degree `q` and `λ` degree `q+1`: `g_j = Σ_{J∌j} sign(j,J) [C_J, λ_{j∪J}]`.
pub(crate) fn bracket_pullback(c: &FormField, lambda: &FormField) -> Result<FormField> {
    c.grid.check_compatible(&lambda.grid)?;
    let m = c.grid.m();
    if lambda.degree != c.degree + 1 {
        return Err(GaugeError::InvalidArgument("bracket pullback degree mismatch".into()));
    }
    let terms = wedge_terms(m, 1, c.degree);
    let k = c.grid.k();
    let b = c.grid.block();
    let mut out = FormField::zeros(c.grid, 1)?;
    let (cs, ls, os) = (c.site_len(), lambda.site_len(), out.site_len());
    out.data.par_chunks_mut(os).enumerate().for_each(|(site, o)| {
        let cc = &c.data[site * cs..(site + 1) * cs];
        let ll = &lambda.data[site * ls..(site + 1) * ls];
        for t in &terms {
            comm_acc(
                &mut o[t.left * b..(t.left + 1) * b],
                &cc[t.right * b..(t.right + 1) * b],
                &ll[t.out * b..(t.out + 1) * b],
                k,
                t.sign,
            );
        }
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liealg::{random_element, LieAlgebraElement};
    use std::f64::consts::PI;

    fn grid(m: usize, n: usize) -> GridSpec {
        GridSpec::new(m, n, 2, 2.max(m.div_ceil(2))).unwrap()
    }

    fn random_form(g: GridSpec, p: usize, seed: u64) -> FormField {
        crate::fieldgen::FieldGen::new(seed, 2, 1.0).form(&g, p).unwrap()
    }

    #[test]
    fn codifferential_is_signed_star_d_star() {
        for m in 2..=4 {
            let g = grid(m, 8);
            for p in 1..=m {
                let b = random_form(g, p, 40 + p as u64);
                let sign = if ((p + 1) * m + 1) % 2 == 0 { 1.0 } else { -1.0 };
                let via_star = b.hodge_star().ext_d().unwrap().hodge_star().scale(sign);
                assert!(b.codifferential().unwrap().max_abs_diff(&via_star).unwrap() <= 1e-12, "m={m} p={p}");
            }
        }
    }

    #[test]
    fn wedge_constant_examples() {
        let g = grid(2, 8);
        let x = random_element(2, 1, 1.0);
        let y = random_element(2, 2, 1.0);
        let z = LieAlgebraElement::zero(2);
        let b = FormField::constant(g, 1, &[x.clone(), z.clone()]).unwrap();
        let c = FormField::constant(g, 1, &[z.clone(), y.clone()]).unwrap();
        let w = b.wedge(&c).unwrap();
        let mut xy = vec![ZERO; 4];
        mat_mul_acc(&mut xy, x.entries(), y.entries(), 2, 1.0);
        assert_eq!(w.coeff(5, 0), &xy[..]);
        let c1 = FormField::constant(g, 1, &[y.clone(), z.clone()]).unwrap();
        assert!(b.wedge(&c1).unwrap().data().iter().all(|v| v.norm() == 0.0));
        let zero = FormField::zeros(g, 1).unwrap();
        assert!(b.wedge(&zero).unwrap().data().iter().all(|v| v.norm() == 0.0));
        assert!(matches!(w.wedge(&b), Err(GaugeError::DegreeOutOfRange { .. })));
    }

    #[test]
    fn bracket_of_one_form_with_itself() {
        let g = grid(2, 8);
        let x = random_element(2, 3, 1.0);
        let y = random_element(2, 4, 1.0);
        let a = FormField::constant(g, 1, &[x.clone(), y.clone()]).unwrap();
        let br = a.graded_bracket(&a).unwrap();
        let w = a.wedge(&a).unwrap();
        assert!(br.max_abs_diff(&w.scale(2.0)).unwrap() < 1e-15);
        let expected = x.bracket(&y).unwrap().scale(2.0);
        assert!(br.coeff(0, 0).iter().zip(expected.entries()).all(|(a, b)| (a - b).norm() < 1e-15));
    }

    #[test]
    fn graded_symmetry_all_degrees() {
        for m in 2..=4 {
            let g = grid(m, 8);
            for p in 0..=m {
                for q in 0..=(m - p) {
                    let b = random_form(g, p, 10 + p as u64);
                    let c = random_form(g, q, 20 + q as u64);
                    let bc = b.graded_bracket(&c).unwrap();
                    let cb = c.graded_bracket(&b).unwrap();
                    let sign = if (p * q + 1) % 2 == 0 { 1.0 } else { -1.0 };
                    assert!(bc.max_abs_diff(&cb.scale(sign)).unwrap() < 1e-13, "m={m} p={p} q={q}");
                }
            }
        }
    }

    #[test]
    fn star_examples_and_involution() {
        let g = grid(2, 8);
        let x = random_element(2, 5, 1.0);
        let z = LieAlgebraElement::zero(2);
        let b = FormField::constant(g, 1, &[x.clone(), z.clone()]).unwrap();
        let s = b.hodge_star();
        assert_eq!(s.coeff(0, 1), x.entries());
        assert!(s.coeff(0, 0).iter().all(|v| v.norm() == 0.0));
        let b2 = FormField::constant(g, 1, &[z.clone(), x.clone()]).unwrap();
        assert_eq!(b2.hodge_star().coeff(0, 0), x.neg().entries());

        let g4 = grid(4, 8);
        let mut comps = vec![z.clone(); 6];
        comps[0] = x.clone(); // dx¹∧dx²
        let s4 = FormField::constant(g4, 2, &comps).unwrap().hodge_star();
        assert_eq!(s4.coeff(0, 5), x.entries()); // dx³∧dx⁴

        for m in 2..=4 {
            let g = grid(m, 8);
            for p in 0..=m {
                let b = random_form(g, p, 30 + p as u64);
                let ss = b.hodge_star().hodge_star();
                let sign = if (p * (m + 1)) % 2 == 0 { 1.0 } else { -1.0 };
                assert_eq!(ss, b.scale(sign), "m={m} p={p}");
                // transpose really is the transpose
                let c = random_form(g, m - p, 40);
                let lhs = b.hodge_star().discrete_inner(&c).unwrap();
                let rhs = b.discrete_inner(&c.hodge_star_transpose()).unwrap();
                assert!((lhs - rhs).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn derivative_examples() {
        let g = grid(2, 64);
        let x = LieAlgebraElement::pauli(3);
        let c = FormField::constant(g, 1, &[x.clone(), x.clone()]).unwrap();
        assert!(c.ext_d().unwrap().data().iter().all(|v| *v == ZERO));
        assert!(c.codifferential().unwrap().data().iter().all(|v| *v == ZERO));

        let profile = |n: usize| {
            let g = grid(2, n);
            let b = FormField::from_fn(g, 1, |pos, comp, out| {
                if comp == 0 {
                    let s = (2.0 * PI * pos[1]).sin();
                    for (o, e) in out.iter_mut().zip(x.entries()) {
                        *o = e * s;
                    }
                }
            })
            .unwrap();
            let db = b.ext_d().unwrap();
            let mut err: f64 = 0.0;
            for site in 0..g.num_sites() {
                let expect = -2.0 * PI * (2.0 * PI * g.position(site)[1]).cos();
                for (v, e) in db.coeff(site, 0).iter().zip(x.entries()) {
                    err = err.max((v - e * expect).norm());
                }
            }
            err
        };
        let order = (profile(32) / profile(64)).log2();
        assert!(order >= 3.8, "order {order}");

        // d*(f dx¹) = −∂₁f
        let g = grid(2, 64);
        let b = FormField::from_fn(g, 1, |pos, comp, out| {
            if comp == 0 {
                let s = (2.0 * PI * pos[0]).sin();
                for (o, e) in out.iter_mut().zip(x.entries()) {
                    *o = e * s;
                }
            }
        })
        .unwrap();
        let cd = b.codifferential().unwrap();
        for site in (0..g.num_sites()).step_by(37) {
            let expect = -2.0 * PI * (2.0 * PI * g.position(site)[0]).cos();
            for (v, e) in cd.coeff(site, 0).iter().zip(x.entries()) {
                assert!((v - e * expect).norm() < 1e-4);
            }
        }
    }

    #[test]
    fn dd_vanishes_and_adjointness() {
        for m in 2..=4 {
            let n = if m == 4 { 8 } else { 16 };
            let g = grid(m, n);
            let f = random_form(g, 0, 7);
            let ddf = f.ext_d().unwrap().ext_d().unwrap();
            let scale = f.ext_d().unwrap().lp_norm(2.0).unwrap() / g.spacing();
            assert!(ddf.lp_norm(2.0).unwrap() <= 1e-12 * scale.max(1.0));
            for p in 0..m {
                let a = random_form(g, p, 50 + p as u64);
                let b = random_form(g, p + 1, 60 + p as u64);
                let lhs = a.ext_d().unwrap().discrete_inner(&b).unwrap();
                let rhs = a.discrete_inner(&b.codifferential().unwrap()).unwrap();
                let scale = a.lp_norm(2.0).unwrap() * b.lp_norm(2.0).unwrap();
                assert!((lhs - rhs).abs() <= 1e-11 * scale, "m={m} p={p}");
            }
        }
    }

    #[test]
    fn inner_and_norms() {
        let g = grid(2, 8);
        let z = LieAlgebraElement::zero(2);
        let b = FormField::constant(g, 1, &[LieAlgebraElement::pauli(3), z]).unwrap();
        assert!((b.discrete_inner(&b).unwrap() - 2.0).abs() < 1e-14);
        for p in [1.0, 2.0, 3.5] {
            assert!((b.lp_norm(p).unwrap() - 2f64.sqrt()).abs() < 1e-13);
        }
        let zero = FormField::zeros(g, 1).unwrap();
        assert_eq!(zero.lp_norm(3.0).unwrap(), 0.0);
        assert!(b.lp_norm(0.5).is_err());
        let r = random_form(g, 2, 3);
        let s = random_form(g, 2, 4);
        assert!((r.lp_norm(2.0).unwrap().powi(2) - r.discrete_inner(&r).unwrap()).abs() < 1e-12);
        assert_eq!(r.discrete_inner(&s).unwrap(), s.discrete_inner(&r).unwrap());
        assert!(r.discrete_inner(&b).is_err());
    }

    #[test]
    fn bracket_pullback_is_transpose() {
        let g = grid(3, 8);
        for q in 0..=2 {
            let c = random_form(g, q, 70);
            let lam = random_form(g, q + 1, 71);
            let alpha = random_form(g, 1, 72);
            let lhs = lam.discrete_inner(&alpha.graded_bracket(&c).unwrap()).unwrap();
            let rhs = bracket_pullback(&c, &lam).unwrap().discrete_inner(&alpha).unwrap();
            assert!((lhs - rhs).abs() < 1e-12, "q={q}");
        }
    }
}
