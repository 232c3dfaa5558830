//! Identity harness.
//!
//! Every identity of the covariant calculus is evaluated as `LHS − RHS` on
//! deterministic band-limited fields. Residuals are relative: the L² norm of
//! the difference divided by the norms of the contributing terms.
//!
//! * `Exact` cases hold to roundoff on the grid: pass iff residual ≤ 1e-11.
//! * `Order` cases hold in the continuum only: pass iff the observed order
//!   `log₂(r_N / r_{2N})` is at least `expected_order − 0.3` for every
//!   refinement step, unless the finer residual has reached the roundoff floor.
//! * `Bound` (Kato): the violation of `|∇|B|| ≤ |D_A B|`, relative to
//!   `max |D_A B|`, must stay below `h²` at every resolution.
//! * `ZerothOrder` (Weitzenböck): doubling the spatial frequency of `B` at
//!   fixed amplitude may grow the residual operator's output by at most 1.5×.

use serde::Serialize;

use crate::connection::{
    conjugate_form, conjugate_tensor, covariant_codiff, covariant_d, curvature, full_covariant_derivative,
    full_derivative_adjoint, full_derivative_norms, gauge_transform_connection, Connection, CovariantTensor,
    GaugeField,
};
use crate::error::{GaugeError, Result};
use crate::fieldgen::FieldGen;
use crate::forms::FormField;
use crate::functionals::{eval, gradient_report, FunctionalKind, FunctionalSpec};
use crate::grid::{stencil, GridSpec};
use crate::liealg::random_element;

pub const EXACT_TOL: f64 = 1e-11;
pub const ORDER_SLACK: f64 = 0.3;
pub const ROUNDOFF_FLOOR: f64 = 1e-12;
pub const ZEROTH_ORDER_GROWTH: f64 = 1.5;
pub const AUDIT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CaseKind {
    Exact,
    Order,
    Bound,
    ZerothOrder,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityCase {
    pub id: &'static str,
    pub kind: CaseKind,
    pub expected_order: f64,
    pub min_dim: usize,
    pub default_dim: usize,
    pub seed: u64,
    pub band_limit: usize,
    pub amplitude: f64,
}

const fn case(id: &'static str, kind: CaseKind, min_dim: usize, default_dim: usize, seed: u64, amplitude: f64) -> IdentityCase {
    let expected_order = match kind {
        CaseKind::Order => 3.8,
        _ => 0.0,
    };
    IdentityCase { id, kind, expected_order, min_dim, default_dim, seed, band_limit: 2, amplitude }
}

/// The complete, ordered identity catalog.
pub fn identity_catalog() -> Vec<IdentityCase> {
    use CaseKind::*;
    vec![
        case("graded_bracket_symmetry", Exact, 2, 2, 101, 1.0),
        case("hodge_involution", Exact, 2, 2, 102, 1.0),
        case("d_codiff_adjoint", Exact, 2, 2, 103, 1.0),
        case("covariant_adjoint", Exact, 2, 2, 104, 1.0),
        case("jacobi", Exact, 2, 2, 105, 1.0),
        case("ad_isometry", Exact, 2, 2, 106, 1.0),
        case("gauge_invariance_constant", Exact, 2, 2, 107, 0.5),
        case("curvature_equivariance", Order, 2, 2, 201, 0.5),
        case("codiff_covariance", Order, 2, 2, 202, 0.5),
        case("d_covariance", Order, 2, 2, 203, 0.5),
        case("full_derivative_covariance", Order, 2, 2, 204, 0.5),
        case("lemma_dd_codiff", Order, 3, 3, 205, 0.5),
        case("lemma_dd_d", Order, 3, 3, 206, 0.5),
        case("bianchi", Order, 3, 3, 207, 0.5),
        case("gauge_invariance_smooth", Order, 2, 2, 208, 0.5),
        case("kato", Bound, 2, 2, 301, 0.5),
        case("weitzenbock", ZerothOrder, 2, 2, 302, 0.5),
    ]
}

pub fn find_case(id: &str) -> Result<IdentityCase> {
    identity_catalog()
        .into_iter()
        .find(|c| c.id == id)
        .ok_or_else(|| GaugeError::UnknownIdentity(id.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolutionRow {
    pub n_points: usize,
    pub residual: f64,
    /// Observed order against the previous resolution (`Order`), or the
    /// frequency-doubling growth exponent (`ZerothOrder`).
    pub order: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseReport {
    pub id: String,
    pub kind: CaseKind,
    pub m: usize,
    pub rows: Vec<ResolutionRow>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub cases: Vec<CaseReport>,
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:e}")).unwrap_or_default()
}

impl VerifyReport {
    pub fn all_pass(&self) -> bool {
        self.cases.iter().all(|c| c.pass)
    }

    /// `case,N,residual,order,pass`, one row per case and resolution. The
    /// pass column repeats the verdict of the whole case.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("case,N,residual,order,pass\n");
        for c in &self.cases {
            for r in &c.rows {
                s.push_str(&format!("{},{},{:e},{},{}\n", c.id, r.n_points, r.residual, fmt_opt(r.order), c.pass));
            }
        }
        s
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        for c in &self.cases {
            let detail: Vec<String> = c
                .rows
                .iter()
                .map(|r| match r.order {
                    Some(o) => format!("N={} r={:.2e} ord={:.2}", r.n_points, r.residual, o),
                    None => format!("N={} r={:.2e}", r.n_points, r.residual),
                })
                .collect();
            s.push_str(&format!(
                "{:<28} m={} {:<11} {}  {}\n",
                c.id,
                c.m,
                format!("{:?}", c.kind),
                if c.pass { "PASS" } else { "FAIL" },
                detail.join(", ")
            ));
        }
        let passed = self.cases.iter().filter(|c| c.pass).count();
        s.push_str(&format!("{passed}/{} cases passed\n", self.cases.len()));
        s
    }
}

struct Setup {
    grid: GridSpec,
    case: IdentityCase,
}

impl Setup {
    fn new(case: &IdentityCase, m: usize, n: usize) -> Result<Self> {
        Ok(Self { grid: GridSpec::new(m, n, 2, 2)?, case: case.clone() })
    }

    fn gen(&self, offset: u64) -> FieldGen {
        FieldGen::new(self.case.seed + offset, self.case.band_limit, self.case.amplitude)
    }

    fn form(&self, offset: u64, degree: usize) -> Result<FormField> {
        self.gen(offset).form(&self.grid, degree)
    }

    fn connection(&self) -> Result<Connection> {
        self.gen(0).connection(&self.grid)
    }

    fn smooth_gauge(&self) -> Result<GaugeField> {
        FieldGen::new(self.case.seed + 50, 1, 0.5).gauge(&self.grid)
    }

    fn constant_gauge(&self) -> Result<GaugeField> {
        GaugeField::constant(self.grid, &random_element(2, self.case.seed + 60, 1.0).exp_map())
    }
}

fn norm(f: &FormField) -> Result<f64> {
    f.lp_norm(2.0)
}

/// Accumulates `‖difference‖²` and `scale²` over several sub-checks.
#[derive(Default)]
struct Acc {
    diff2: f64,
    scale2: f64,
}

impl Acc {
    fn push(&mut self, diff: f64, scale: f64) {
        self.diff2 += diff * diff;
        self.scale2 += scale * scale;
    }

    fn residual(&self) -> f64 {
        let (d, s) = (self.diff2.sqrt(), self.scale2.sqrt());
        if s > 0.0 {
            d / s
        } else {
            d
        }
    }
}

fn sign(e: usize) -> f64 {
    if e % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn graded_bracket_symmetry(s: &Setup) -> Result<f64> {
    let m = s.grid.m();
    let mut acc = Acc::default();
    for (p, q) in [(0, 1), (1, 1), (1, 2), (2, 2), (0, 2)] {
        if p + q > m {
            continue;
        }
        let x = s.form(0, p)?;
        let y = s.form(1, q)?;
        let xy = x.graded_bracket(&y)?;
        let mut diff = xy.clone();
        diff.axpy(sign(p * q), &y.graded_bracket(&x)?)?;
        acc.push(norm(&diff)?, norm(&xy)?);
    }
    Ok(acc.residual())
}

fn hodge_involution(s: &Setup) -> Result<f64> {
    let m = s.grid.m();
    let mut acc = Acc::default();
    for p in 0..=m {
        let x = s.form(0, p)?;
        let mut diff = x.hodge_star().hodge_star();
        diff.axpy(-sign(p * (m + 1)), &x)?;
        acc.push(norm(&diff)?, norm(&x)?);
    }
    Ok(acc.residual())
}

fn adjointness(s: &Setup, covariant: bool) -> Result<f64> {
    let m = s.grid.m();
    let a = s.connection()?;
    let zero = Connection::zeros(s.grid);
    let a = if covariant { &a } else { &zero };
    let mut acc = Acc::default();
    for p in 0..m {
        let alpha = s.form(1, p)?;
        let beta = s.form(2, p + 1)?;
        let da = covariant_d(a, &alpha)?;
        let cb = covariant_codiff(a, &beta)?;
        let lhs = da.discrete_inner(&beta)?;
        let rhs = alpha.discrete_inner(&cb)?;
        acc.push(lhs - rhs, norm(&da)? * norm(&beta)? + norm(&alpha)? * norm(&cb)?);
    }
    Ok(acc.residual())
}

fn jacobi(s: &Setup) -> Result<f64> {
    let mut acc = Acc::default();
    let mut degrees = vec![0];
    if s.grid.m() >= 3 {
        degrees.push(1);
    }
    for p in degrees {
        let (x, y, z) = (s.form(0, p)?, s.form(1, p)?, s.form(2, p)?);
        let t1 = x.graded_bracket(&y.graded_bracket(&z)?)?;
        let t2 = y.graded_bracket(&z.graded_bracket(&x)?)?;
        let t3 = z.graded_bracket(&x.graded_bracket(&y)?)?;
        // the graded signs (−1)^{p·p} are common to all three terms
        let sum = t1.add(&t2)?.add(&t3)?;
        acc.push(norm(&sum)?, norm(&t1)? + norm(&t2)? + norm(&t3)?);
    }
    Ok(acc.residual())
}

fn ad_isometry(s: &Setup) -> Result<f64> {
    let mut acc = Acc::default();
    let (x, y, z) = (s.form(0, 0)?, s.form(1, 0)?, s.form(2, 0)?);
    let lhs = x.graded_bracket(&y)?.discrete_inner(&z)?;
    let rhs = y.discrete_inner(&x.graded_bracket(&z)?)?;
    acc.push(lhs + rhs, lhs.abs() + rhs.abs());
    let u = s.smooth_gauge()?;
    let (b, c) = (s.form(3, 1)?, s.form(4, 1)?);
    let (ub, uc) = (conjugate_form(&u, &b)?, conjugate_form(&u, &c)?);
    let before = b.discrete_inner(&c)?;
    let after = ub.discrete_inner(&uc)?;
    acc.push(after - before, norm(&b)? * norm(&c)?);
    let pointwise = b.pointwise_norms().iter().zip(ub.pointwise_norms()).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
    let max_b = b.pointwise_norms().into_iter().fold(0.0, f64::max);
    acc.push(pointwise, max_b);
    Ok(acc.residual())
}

fn invariance_specs(m: usize) -> Vec<FunctionalSpec> {
    let mut v = vec![
        FunctionalSpec { kind: FunctionalKind::YM, n: 2 },
        FunctionalSpec::y(2),
        FunctionalSpec::z(2),
    ];
    if m <= 2 {
        v.push(FunctionalSpec { kind: FunctionalKind::YMn, n: 3 });
        v.push(FunctionalSpec::y(3));
        v.push(FunctionalSpec::z(3));
    }
    v
}

fn gauge_invariance(s: &Setup, u: &GaugeField) -> Result<f64> {
    let a = s.connection()?;
    let ua = gauge_transform_connection(u, &a)?;
    let mut acc = Acc::default();
    for spec in invariance_specs(s.grid.m()) {
        let (e, eu) = (eval(&spec, &a)?, eval(&spec, &ua)?);
        acc.push(eu - e, e.abs());
    }
    Ok(acc.residual())
}

struct Gauged {
    a: Connection,
    u: GaugeField,
    ua: Connection,
}

fn gauged(s: &Setup) -> Result<Gauged> {
    let a = s.connection()?;
    let u = s.smooth_gauge()?;
    let ua = gauge_transform_connection(&u, &a)?;
    Ok(Gauged { a, u, ua })
}

fn rel_diff(x: &FormField, y: &FormField) -> Result<f64> {
    let mut acc = Acc::default();
    acc.push(norm(&x.sub(y)?)?, norm(x)?.max(norm(y)?));
    Ok(acc.residual())
}

fn curvature_equivariance(s: &Setup) -> Result<f64> {
    let g = gauged(s)?;
    rel_diff(&curvature(&g.ua), &conjugate_form(&g.u, &curvature(&g.a))?)
}

fn codiff_covariance(s: &Setup) -> Result<f64> {
    let g = gauged(s)?;
    let b = s.form(1, 2)?;
    let lhs = covariant_codiff(&g.ua, &conjugate_form(&g.u, &b)?)?;
    let rhs = conjugate_form(&g.u, &covariant_codiff(&g.a, &b)?)?;
    rel_diff(&lhs, &rhs)
}

fn d_covariance(s: &Setup) -> Result<f64> {
    let g = gauged(s)?;
    let c = s.form(1, 1)?;
    let lhs = covariant_d(&g.ua, &conjugate_form(&g.u, &c)?)?;
    let rhs = conjugate_form(&g.u, &covariant_d(&g.a, &c)?)?;
    rel_diff(&lhs, &rhs)
}

fn full_derivative_covariance(s: &Setup) -> Result<f64> {
    let g = gauged(s)?;
    let t = CovariantTensor::from_form(&s.form(1, 2)?);
    let lhs = full_covariant_derivative(&g.ua, &conjugate_tensor(&g.u, &t)?)?;
    let rhs = conjugate_tensor(&g.u, &full_covariant_derivative(&g.a, &t)?)?;
    let mut acc = Acc::default();
    acc.push(lhs.sub(&rhs)?.lp_norm(2.0)?, lhs.lp_norm(2.0)?.max(rhs.lp_norm(2.0)?));
    Ok(acc.residual())
}

/// `d_A* d_A* B = −*[F_A, *B]`.
fn lemma_dd_codiff(s: &Setup) -> Result<f64> {
    let a = s.connection()?;
    let b = s.form(1, 2)?;
    let lhs = covariant_codiff(&a, &covariant_codiff(&a, &b)?)?;
    let rhs = curvature(&a).graded_bracket(&b.hodge_star())?.hodge_star().scale(-1.0);
    let mut acc = Acc::default();
    acc.push(norm(&lhs.sub(&rhs)?)?, norm(&lhs)? + norm(&rhs)?);
    Ok(acc.residual())
}

/// `d_A d_A C = [F_A, C]`.
fn lemma_dd_d(s: &Setup) -> Result<f64> {
    let a = s.connection()?;
    let c = s.form(1, 1)?;
    let lhs = covariant_d(&a, &covariant_d(&a, &c)?)?;
    let rhs = curvature(&a).graded_bracket(&c)?;
    let mut acc = Acc::default();
    acc.push(norm(&lhs.sub(&rhs)?)?, norm(&lhs)? + norm(&rhs)?);
    Ok(acc.residual())
}

fn bianchi(s: &Setup) -> Result<f64> {
    let a = s.connection()?;
    let f = curvature(&a);
    let df = f.ext_d()?;
    let af = a.graded_bracket(&f)?;
    let mut acc = Acc::default();
    acc.push(norm(&df.add(&af)?)?, norm(&df)? + norm(&af)?);
    Ok(acc.residual())
}

/// Largest violation of `|∇|B|| ≤ |D_A B|` relative to `max |D_A B|`.
fn kato(s: &Setup) -> Result<f64> {
    let a = s.connection()?;
    let b = s.form(1, 1)?;
    let norms = b.pointwise_norms();
    let dab = full_derivative_norms(&a, &CovariantTensor::from_form(&b))?;
    let grid = s.grid;
    let inv12h = 1.0 / (12.0 * grid.spacing());
    let mut violation = f64::NEG_INFINITY;
    for site in 0..grid.num_sites() {
        let mut g2 = 0.0;
        for axis in 0..grid.m() {
            let nb = grid.neighbours(site, axis);
            let d = stencil(norms[nb[0]], norms[nb[1]], norms[nb[2]], norms[nb[3]], inv12h);
            g2 += d * d;
        }
        violation = violation.max(g2.sqrt() - dab[site]);
    }
    let max_dab = dab.iter().copied().fold(0.0, f64::max);
    Ok(violation.max(0.0) / max_dab)
}

/// `(d_A*d_A + d_A d_A* − D_AᵀD_A) B`.
pub fn weitzenbock_operator(a: &Connection, b: &FormField) -> Result<FormField> {
    let t1 = covariant_codiff(a, &covariant_d(a, b)?)?;
    let t2 = covariant_d(a, &covariant_codiff(a, b)?)?;
    let rough = full_derivative_adjoint(a, &full_covariant_derivative(a, &CovariantTensor::from_form(b))?)?;
    t1.add(&t2)?.sub(&rough.to_form()?)
}

/// Periodic tiling of `f` onto `fine`, i.e. `B(s·x)` for `s = N_fine / N`.
fn tile(f: &FormField, fine: GridSpec) -> Result<FormField> {
    let coarse = *f.grid();
    let nc = coarse.n_points();
    let len = f.site_len();
    let mut out = FormField::zeros(fine, f.degree())?;
    for site in 0..fine.num_sites() {
        let src: usize = (0..fine.m()).map(|ax| (fine.coord(site, ax) % nc) * coarse.stride(ax)).sum();
        out.data_mut()[site * len..(site + 1) * len].copy_from_slice(&f.data()[src * len..(src + 1) * len]);
    }
    Ok(out)
}

/// Residual size `‖W B‖ / ‖B‖` and growth exponent `log₂(‖W B₂‖ / ‖W B₁‖)`
/// where `B₂(x) = B₁(2x)`.
fn weitzenbock(s: &Setup) -> Result<(f64, f64)> {
    let a = s.connection()?;
    let b1 = s.form(1, 1)?;
    let coarse = s.grid.with_points(s.grid.n_points() / 2)?;
    let b2 = tile(&s.gen(1).form(&coarse, 1)?, s.grid)?;
    let w1 = norm(&weitzenbock_operator(&a, &b1)?)?;
    let w2 = norm(&weitzenbock_operator(&a, &b2)?)?;
    Ok((w1 / norm(&b1)?, (w2 / w1).log2()))
}

fn measure(case: &IdentityCase, m: usize, n: usize) -> Result<(f64, Option<f64>)> {
    let s = Setup::new(case, m, n)?;
    let r = match case.id {
        "graded_bracket_symmetry" => graded_bracket_symmetry(&s)?,
        "hodge_involution" => hodge_involution(&s)?,
        "d_codiff_adjoint" => adjointness(&s, false)?,
        "covariant_adjoint" => adjointness(&s, true)?,
        "jacobi" => jacobi(&s)?,
        "ad_isometry" => ad_isometry(&s)?,
        "gauge_invariance_constant" => gauge_invariance(&s, &s.constant_gauge()?)?,
        "curvature_equivariance" => curvature_equivariance(&s)?,
        "codiff_covariance" => codiff_covariance(&s)?,
        "d_covariance" => d_covariance(&s)?,
        "full_derivative_covariance" => full_derivative_covariance(&s)?,
        "lemma_dd_codiff" => lemma_dd_codiff(&s)?,
        "lemma_dd_d" => lemma_dd_d(&s)?,
        "bianchi" => bianchi(&s)?,
        "gauge_invariance_smooth" => gauge_invariance(&s, &s.smooth_gauge()?)?,
        "kato" => kato(&s)?,
        "weitzenbock" => {
            let (r, growth) = weitzenbock(&s)?;
            return Ok((r, Some(growth)));
        }
        other => return Err(GaugeError::UnknownIdentity(other.to_string())),
    };
    Ok((r, None))
}

/// Evaluates one case in dimension `m` at each resolution.
pub fn run_identity(case: &IdentityCase, m: usize, resolutions: &[usize]) -> Result<CaseReport> {
    if m < case.min_dim {
        return Err(GaugeError::InvalidArgument(format!("{} needs m >= {}, got {m}", case.id, case.min_dim)));
    }
    if resolutions.is_empty() {
        return Err(GaugeError::InvalidArgument("no resolutions given".into()));
    }
    if case.kind == CaseKind::Order && resolutions.len() < 2 {
        return Err(GaugeError::InvalidArgument(format!("{} needs at least two resolutions", case.id)));
    }
    let mut rows: Vec<ResolutionRow> = Vec::with_capacity(resolutions.len());
    let mut pass = true;
    for &n in resolutions {
        let (residual, extra) = measure(case, m, n)?;
        let h = 1.0 / n as f64;
        let order = match case.kind {
            CaseKind::Order => rows.last().map(|prev| (prev.residual / residual).log2()),
            CaseKind::ZerothOrder => extra,
            _ => None,
        };
        let ok = match case.kind {
            CaseKind::Exact => residual <= EXACT_TOL,
            CaseKind::Order => match order {
                None => residual.is_finite(),
                Some(o) => o >= case.expected_order - ORDER_SLACK || residual <= ROUNDOFF_FLOOR,
            },
            CaseKind::Bound => residual <= h * h,
            CaseKind::ZerothOrder => order.is_some_and(|g| g <= ZEROTH_ORDER_GROWTH.log2()),
        };
        pass &= ok;
        rows.push(ResolutionRow { n_points: n, residual, order });
    }
    Ok(CaseReport { id: case.id.to_string(), kind: case.kind, m, rows, pass })
}

/// Runs the catalog, or the cases named in `only`. With `m = None` each case
/// runs in its default dimension; otherwise every case valid in `m` runs there.
pub fn run_catalog(m: Option<usize>, resolutions: &[usize], only: Option<&[String]>) -> Result<VerifyReport> {
    let cases = match only {
        Some(ids) => ids.iter().map(|id| find_case(id)).collect::<Result<Vec<_>>>()?,
        None => identity_catalog(),
    };
    let mut out = Vec::new();
    for c in &cases {
        let dim = match m {
            None => c.default_dim,
            Some(m) if m >= c.min_dim => m,
            Some(m) if only.is_some() => {
                return Err(GaugeError::InvalidArgument(format!("{} needs m >= {}, got {m}", c.id, c.min_dim)))
            }
            Some(_) => continue,
        };
        let report = run_identity(c, dim, resolutions)?;
        log::info!("{}: {}", c.id, if report.pass { "pass" } else { "FAIL" });
        out.push(report);
    }
    Ok(VerifyReport { cases: out })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditRow {
    pub seed: u64,
    pub t: f64,
    pub max_rel_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradientAudit {
    pub spec: String,
    pub rows: Vec<AuditRow>,
    /// Largest error at the smallest step, which decides `pass`.
    pub max_error: f64,
    pub pass: bool,
}

impl GradientAudit {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("functional,seed,t,max_rel_error\n");
        for r in &self.rows {
            s.push_str(&format!("{},{},{:e},{:e}\n", self.spec, r.seed, r.t, r.max_rel_error));
        }
        s
    }
}

pub const AUDIT_STEPS: [f64; 2] = [1e-3, 1e-4];
pub const AUDIT_DIRECTIONS: u64 = 5;

/// Finite-difference audit of the analytic gradient: per seed, a connection
/// of amplitude 0.1 and band limit `N/8` and five random directions.
pub fn gradient_audit(spec: &FunctionalSpec, grid: &GridSpec, seeds: &[u64]) -> Result<GradientAudit> {
    let band = (grid.n_points() / 8).max(1);
    let mut rows = Vec::new();
    for &seed in seeds {
        let a = FieldGen::new(seed, band, 0.1).connection(grid)?;
        let dirs = (1..=AUDIT_DIRECTIONS)
            .map(|d| FieldGen::new(seed.wrapping_mul(1000).wrapping_add(d), band, 1.0).form(grid, 1))
            .collect::<Result<Vec<_>>>()?;
        for &t in &AUDIT_STEPS {
            let rep = gradient_report(spec, &a, &dirs, t)?;
            rows.push(AuditRow { seed, t, max_rel_error: rep.fd_error });
        }
    }
    let t_min = AUDIT_STEPS[AUDIT_STEPS.len() - 1];
    let max_error = rows.iter().filter(|r| r.t == t_min).map(|r| r.max_rel_error).fold(0.0, f64::max);
    Ok(GradientAudit { spec: spec.to_string(), rows, max_error, pass: max_error <= AUDIT_TOL })
}
