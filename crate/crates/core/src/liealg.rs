//! Matrix Lie algebra su(k) and group SU(k).
//!
//! Elements are stored as dense row-major `k×k` complex matrices. The field
//! types in [`crate::forms`] store their coefficients in the same layout, so
//! the raw slice kernels at the bottom of this module are shared by both.
//!
//! The inner product on the algebra is `⟨X, Y⟩ = −Re tr(XY)`, which is
//! Ad-invariant and equals the Frobenius product on anti-Hermitian matrices.

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{GaugeError, Result};

/// Tolerance used when checking algebra membership.
pub const ALGEBRA_TOL: f64 = 1e-12;
/// Tolerance used when checking group membership.
pub const GROUP_TOL: f64 = 1e-10;

/// An element of su(k): anti-Hermitian, traceless.
#[derive(Debug, Clone, PartialEq)]
pub struct LieAlgebraElement {
    k: usize,
    entries: Vec<C64>,
}

/// An element of SU(k): unitary with unit determinant.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    k: usize,
    entries: Vec<C64>,
}

impl LieAlgebraElement {
    /// Wraps a row-major matrix, checking the su(k) invariants.
    pub fn new(k: usize, entries: Vec<C64>) -> Result<Self> {
        if entries.len() != k * k {
            return Err(GaugeError::DimensionMismatch(entries.len(), k * k));
        }
        let x = Self { k, entries };
        if !x.is_valid(ALGEBRA_TOL) {
            return Err(GaugeError::InvalidArgument(
                "matrix is not anti-Hermitian and traceless".into(),
            ));
        }
        Ok(x)
    }

    pub fn zero(k: usize) -> Self {
        Self { k, entries: vec![C64::new(0.0, 0.0); k * k] }
    }

    /// `i·σ_a` for the Pauli matrix `a ∈ {1, 2, 3}` (k = 2).
    pub fn pauli(a: usize) -> Self {
        let z = C64::new(0.0, 0.0);
        let i = C64::new(0.0, 1.0);
        let entries = match a {
            1 => vec![z, i, i, z],
            2 => vec![z, C64::new(1.0, 0.0), C64::new(-1.0, 0.0), z],
            3 => vec![i, z, z, -i],
            _ => panic!("Pauli index must be 1, 2 or 3, got {a}"),
        };
        Self { k: 2, entries }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<C64> {
        self.entries
    }

    pub fn is_valid(&self, tol: f64) -> bool {
        is_algebra(&self.entries, self.k, tol)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { k: self.k, entries: self.entries.iter().map(|z| z * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect();
        Ok(Self { k: self.k, entries })
    }

    pub fn neg(&self) -> Self {
        self.scale(-1.0)
    }

    /// Matrix commutator `XY − YX`.
    pub fn bracket(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut out = vec![C64::new(0.0, 0.0); self.k * self.k];
        comm_acc(&mut out, &self.entries, &other.entries, self.k, 1.0);
        Ok(Self { k: self.k, entries: out })
    }

    /// `−Re tr(XY)`.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        self.check_dim(other)?;
        Ok(inner_raw(&self.entries, &other.entries, self.k))
    }

    pub fn norm(&self) -> f64 {
        inner_raw(&self.entries, &self.entries, self.k).max(0.0).sqrt()
    }

    /// Matrix exponential by scaling and squaring.
    pub fn exp_map(&self) -> GroupElement {
        GroupElement { k: self.k, entries: expm_raw(&self.entries, self.k) }
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.k != other.k {
            return Err(GaugeError::DimensionMismatch(self.k, other.k));
        }
        Ok(())
    }
}

/// Orthogonal projection of an arbitrary complex matrix onto su(k):
/// `(M − M*)/2 − tr((M − M*)/2)/k · I`.
pub fn project_algebra(k: usize, m: &[C64]) -> Result<LieAlgebraElement> {
    if m.len() != k * k {
        return Err(GaugeError::DimensionMismatch(m.len(), k * k));
    }
    let mut out = m.to_vec();
    project_algebra_in_place(&mut out, k);
    Ok(LieAlgebraElement { k, entries: out })
}

/// Deterministic pseudo-random element: a complex Gaussian matrix projected to
/// su(k) and multiplied by `scale`.
pub fn random_element(k: usize, seed: u64, scale: f64) -> LieAlgebraElement {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_element_with(&mut rng, k, scale)
}

pub(crate) fn random_element_with(rng: &mut ChaCha8Rng, k: usize, scale: f64) -> LieAlgebraElement {
    let mut m: Vec<C64> = (0..k * k)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            C64::new(re, im)
        })
        .collect();
    project_algebra_in_place(&mut m, k);
    for z in &mut m {
        *z *= scale;
    }
    LieAlgebraElement { k, entries: m }
}

/// Unit-norm diagonal generator `i·diag(1, −1, 0, …)/√2`, used for abelian
/// test fields.
pub fn abelian_generator(k: usize) -> LieAlgebraElement {
    assert!(k >= 2, "abelian generator needs k >= 2");
    let mut e = vec![C64::new(0.0, 0.0); k * k];
    let s = std::f64::consts::FRAC_1_SQRT_2;
    e[0] = C64::new(0.0, s);
    e[k + 1] = C64::new(0.0, -s);
    LieAlgebraElement { k, entries: e }
}

impl GroupElement {
    pub fn identity(k: usize) -> Self {
        Self { k, entries: identity_raw(k) }
    }

    /// Wraps a row-major matrix, checking the SU(k) invariants.
    pub fn new(k: usize, entries: Vec<C64>) -> Result<Self> {
        if entries.len() != k * k {
            return Err(GaugeError::DimensionMismatch(entries.len(), k * k));
        }
        let u = Self { k, entries };
        if !u.is_valid(GROUP_TOL) {
            return Err(GaugeError::InvalidArgument("matrix is not in SU(k)".into()));
        }
        Ok(u)
    }

    pub(crate) fn from_raw(k: usize, entries: Vec<C64>) -> Self {
        Self { k, entries }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn inverse(&self) -> Self {
        let mut out = vec![C64::new(0.0, 0.0); self.k * self.k];
        adjoint_into(&self.entries, &mut out, self.k);
        Self { k: self.k, entries: out }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.k != other.k {
            return Err(GaugeError::DimensionMismatch(self.k, other.k));
        }
        let mut out = vec![C64::new(0.0, 0.0); self.k * self.k];
        mat_mul_acc(&mut out, &self.entries, &other.entries, self.k, 1.0);
        Ok(Self { k: self.k, entries: out })
    }

    /// `u⁻¹ X u`.
    pub fn conjugate(&self, x: &LieAlgebraElement) -> Result<LieAlgebraElement> {
        if self.k != x.k {
            return Err(GaugeError::DimensionMismatch(self.k, x.k));
        }
        let mut out = vec![C64::new(0.0, 0.0); self.k * self.k];
        let mut scratch = vec![C64::new(0.0, 0.0); self.k * self.k];
        conj_inv_into(&self.entries, &x.entries, &mut out, &mut scratch, self.k);
        Ok(LieAlgebraElement { k: self.k, entries: out })
    }

    pub fn det(&self) -> C64 {
        det_raw(&self.entries, self.k)
    }

    pub fn is_valid(&self, tol: f64) -> bool {
        let k = self.k;
        let mut prod = vec![C64::new(0.0, 0.0); k * k];
        let mut adj = vec![C64::new(0.0, 0.0); k * k];
        adjoint_into(&self.entries, &mut adj, k);
        mat_mul_acc(&mut prod, &self.entries, &adj, k, 1.0);
        let id = identity_raw(k);
        let unitary = prod.iter().zip(&id).all(|(a, b)| (a - b).norm() <= tol);
        unitary && (self.det() - C64::new(1.0, 0.0)).norm() <= tol
    }
}

// ---------------------------------------------------------------------------
// Raw kernels on row-major k×k slices.

pub(crate) fn identity_raw(k: usize) -> Vec<C64> {
    let mut e = vec![C64::new(0.0, 0.0); k * k];
    for i in 0..k {
        e[i * k + i] = C64::new(1.0, 0.0);
    }
    e
}

pub(crate) fn is_algebra(a: &[C64], k: usize, tol: f64) -> bool {
    let mut tr = C64::new(0.0, 0.0);
    for i in 0..k {
        tr += a[i * k + i];
        for j in 0..k {
            if (a[i * k + j] + a[j * k + i].conj()).norm() > tol {
                return false;
            }
        }
    }
    tr.norm() <= tol
}

/// `out += s·a·b`.
#[inline]
pub(crate) fn mat_mul_acc(out: &mut [C64], a: &[C64], b: &[C64], k: usize, s: f64) {
    for i in 0..k {
        for l in 0..k {
            let ail = a[i * k + l] * s;
            for j in 0..k {
                out[i * k + j] += ail * b[l * k + j];
            }
        }
    }
}

/// `out += s·(ab − ba)`.
#[inline]
pub(crate) fn comm_acc(out: &mut [C64], a: &[C64], b: &[C64], k: usize, s: f64) {
    for i in 0..k {
        for j in 0..k {
            let mut acc = C64::new(0.0, 0.0);
            for l in 0..k {
                acc += a[i * k + l] * b[l * k + j] - b[i * k + l] * a[l * k + j];
            }
            out[i * k + j] += acc * s;
        }
    }
}

/// `Re tr(a†b)`, which equals `−Re tr(ab)` on anti-Hermitian matrices and
/// stays positive definite on everything else (real scalar densities included).
#[inline]
pub(crate) fn inner_raw(a: &[C64], b: &[C64], k: usize) -> f64 {
    a[..k * k].iter().zip(&b[..k * k]).map(|(x, y)| x.re * y.re + x.im * y.im).sum()
}

pub(crate) fn adjoint_into(a: &[C64], out: &mut [C64], k: usize) {
    for i in 0..k {
        for j in 0..k {
            out[j * k + i] = a[i * k + j].conj();
        }
    }
}

pub(crate) fn project_algebra_in_place(m: &mut [C64], k: usize) {
    for i in 0..k {
        for j in i..k {
            let a = m[i * k + j];
            let b = m[j * k + i];
            let v = (a - b.conj()) * 0.5;
            m[i * k + j] = v;
            m[j * k + i] = -v.conj();
        }
    }
    let mut tr = C64::new(0.0, 0.0);
    for i in 0..k {
        tr += m[i * k + i];
    }
    let shift = tr / k as f64;
    for i in 0..k {
        m[i * k + i] -= shift;
    }
}

/// `out = u⁻¹ x u = u† x u`; `scratch` must hold k² entries.
#[inline]
pub(crate) fn conj_inv_into(u: &[C64], x: &[C64], out: &mut [C64], scratch: &mut [C64], k: usize) {
    // scratch = x u
    for z in scratch.iter_mut() {
        *z = C64::new(0.0, 0.0);
    }
    mat_mul_acc(scratch, x, u, k, 1.0);
    for i in 0..k {
        for j in 0..k {
            let mut acc = C64::new(0.0, 0.0);
            for l in 0..k {
                acc += u[l * k + i].conj() * scratch[l * k + j];
            }
            out[i * k + j] = acc;
        }
    }
}

fn norm1(a: &[C64], k: usize) -> f64 {
    (0..k)
        .map(|j| (0..k).map(|i| a[i * k + j].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential: scale to norm ≤ 1/2, truncated Taylor series, square back.
pub(crate) fn expm_raw(x: &[C64], k: usize) -> Vec<C64> {
    let nrm = norm1(x, k);
    let squarings = if nrm > 0.5 { (nrm / 0.5).log2().ceil() as i32 } else { 0 };
    let scale = 0.5f64.powi(squarings);
    let y: Vec<C64> = x.iter().map(|z| z * scale).collect();

    let mut result = identity_raw(k);
    let mut term = identity_raw(k);
    let mut next = vec![C64::new(0.0, 0.0); k * k];
    for order in 1..=30 {
        for z in next.iter_mut() {
            *z = C64::new(0.0, 0.0);
        }
        mat_mul_acc(&mut next, &term, &y, k, 1.0 / order as f64);
        std::mem::swap(&mut term, &mut next);
        let mut small = true;
        for (r, t) in result.iter_mut().zip(&term) {
            *r += t;
            if t.norm() > 1e-18 {
                small = false;
            }
        }
        if small {
            break;
        }
    }
    for _ in 0..squarings {
        for z in next.iter_mut() {
            *z = C64::new(0.0, 0.0);
        }
        mat_mul_acc(&mut next, &result, &result, k, 1.0);
        std::mem::swap(&mut result, &mut next);
    }
    result
}

/// Determinant by Gaussian elimination with partial pivoting.
pub(crate) fn det_raw(a: &[C64], k: usize) -> C64 {
    let mut m = a.to_vec();
    let mut det = C64::new(1.0, 0.0);
    for col in 0..k {
        let pivot = (col..k)
            .max_by(|&r, &s| m[r * k + col].norm().total_cmp(&m[s * k + col].norm()))
            .unwrap_or(col);
        if m[pivot * k + col].norm() == 0.0 {
            return C64::new(0.0, 0.0);
        }
        if pivot != col {
            for j in 0..k {
                m.swap(pivot * k + j, col * k + j);
            }
            det = -det;
        }
        let p = m[col * k + col];
        det *= p;
        for r in col + 1..k {
            let f = m[r * k + col] / p;
            for j in col..k {
                let v = m[col * k + j];
                m[r * k + j] -= f * v;
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[C64], b: &[C64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).norm() <= tol)
    }

    #[test]
    fn bracket_of_pauli_generators() {
        let x = LieAlgebraElement::pauli(1);
        let y = LieAlgebraElement::pauli(2);
        let z = x.bracket(&y).unwrap();
        // [iσ₁, iσ₂] = −[σ₁, σ₂] = −2iσ₃
        let expected = LieAlgebraElement::pauli(3).scale(-2.0);
        assert!(close(z.entries(), expected.entries(), 1e-15));
        assert!(x.bracket(&x).unwrap().entries().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn bracket_antisymmetric_and_jacobi() {
        for seed in 0..10 {
            let x = random_element(3, seed, 1.0);
            let y = random_element(3, seed + 100, 1.0);
            let z = random_element(3, seed + 200, 1.0);
            let xy = x.bracket(&y).unwrap();
            let yx = y.bracket(&x).unwrap();
            assert!(xy.add(&yx).unwrap().norm() < 1e-14);
            assert!(xy.is_valid(1e-12));
            let j = x
                .bracket(&y.bracket(&z).unwrap())
                .unwrap()
                .add(&y.bracket(&z.bracket(&x).unwrap()).unwrap())
                .unwrap()
                .add(&z.bracket(&x.bracket(&y).unwrap()).unwrap())
                .unwrap();
            assert!(j.norm() < 1e-12);
        }
    }

    #[test]
    fn bracket_rejects_mismatched_sizes() {
        let x = random_element(2, 1, 1.0);
        let y = random_element(3, 1, 1.0);
        assert!(matches!(x.bracket(&y), Err(GaugeError::DimensionMismatch(2, 3))));
        assert!(x.inner(&y).is_err());
    }

    #[test]
    fn inner_values_and_ad_invariance() {
        let s3 = LieAlgebraElement::pauli(3);
        assert_eq!(s3.inner(&s3).unwrap(), 2.0);
        assert_eq!(LieAlgebraElement::zero(2).inner(&s3).unwrap(), 0.0);
        for seed in 0..10 {
            let x = random_element(2, seed, 1.0);
            let y = random_element(2, seed + 7, 1.0);
            let z = random_element(2, seed + 13, 1.0);
            let u = random_element(2, seed + 21, 2.0).exp_map();
            let a = u.conjugate(&x).unwrap().inner(&u.conjugate(&y).unwrap()).unwrap();
            assert!((a - x.inner(&y).unwrap()).abs() < 1e-12);
            // ad-antisymmetry
            let lhs = z.bracket(&x).unwrap().inner(&y).unwrap()
                + x.inner(&z.bracket(&y).unwrap()).unwrap();
            assert!(lhs.abs() < 1e-12);
        }
    }

    #[test]
    fn exp_map_values() {
        let id = LieAlgebraElement::zero(2).exp_map();
        assert_eq!(id, GroupElement::identity(2));
        let u = LieAlgebraElement::pauli(3).scale(std::f64::consts::PI).exp_map();
        let minus_id: Vec<C64> = identity_raw(2).iter().map(|z| -z).collect();
        assert!(close(u.entries(), &minus_id, 1e-12));
        for seed in 0..10 {
            let x = random_element(3, seed, 3.0);
            let p = x.exp_map().mul(&x.neg().exp_map()).unwrap();
            assert!(close(p.entries(), &identity_raw(3), 1e-12));
            assert!(x.exp_map().is_valid(1e-10));
            assert!((x.exp_map().det() - 1.0).norm() < 1e-10);
        }
    }

    #[test]
    fn exp_map_matches_closed_form_su2() {
        // exp(θ·iσ₃) = diag(e^{iθ}, e^{−iθ})
        let theta = 0.7;
        let u = LieAlgebraElement::pauli(3).scale(theta).exp_map();
        assert!((u.entries()[0] - C64::from_polar(1.0, theta)).norm() < 1e-14);
        assert!((u.entries()[3] - C64::from_polar(1.0, -theta)).norm() < 1e-14);
    }

    #[test]
    fn projection_properties() {
        let id = identity_raw(3);
        assert!(project_algebra(3, &id).unwrap().norm() < 1e-15);
        let x = random_element(3, 5, 1.0);
        assert!(max_diff(project_algebra(3, x.entries()).unwrap().entries(), x.entries()) < 1e-15);
        let m: Vec<C64> = (0..9).map(|i| C64::new(i as f64 * 0.3 - 1.0, (i * i) as f64 * 0.1)).collect();
        let p = project_algebra(3, &m).unwrap();
        assert!(p.is_valid(1e-14));
        assert!(max_diff(project_algebra(3, p.entries()).unwrap().entries(), p.entries()) < 1e-15);
    }

    #[test]
    fn random_element_determinism() {
        assert_eq!(random_element(2, 42, 1.0), random_element(2, 42, 1.0));
        assert_ne!(random_element(2, 42, 1.0), random_element(2, 43, 1.0));
        assert!(random_element(2, 9, 0.0).entries().iter().all(|z| z.norm() == 0.0));
        let x = random_element(2, 42, 1.0);
        assert!(max_diff(project_algebra(2, x.entries()).unwrap().entries(), x.entries()) < 1e-15);
    }

    fn max_diff(a: &[C64], b: &[C64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn constructors_validate() {
        assert!(LieAlgebraElement::new(2, identity_raw(2)).is_err());
        assert!(LieAlgebraElement::new(2, LieAlgebraElement::pauli(1).into_entries()).is_ok());
        assert!(GroupElement::new(2, identity_raw(2)).is_ok());
        let two: Vec<C64> = identity_raw(2).iter().map(|z| z * 2.0).collect();
        assert!(GroupElement::new(2, two).is_err());
    }
}
