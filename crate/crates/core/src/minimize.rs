//! Gradient-flow minimization of a functional over connections.
//!
//! Plain gradient descent in the flat space of connection coefficients with
//! Armijo backtracking and an adaptive step (doubled after every accepted
//! step, halved on every rejection). Optional Nesterov momentum restarts
//! whenever the extrapolated step fails to decrease the value, and optional
//! periodic Coulomb re-gauging is kept only when it does not increase the
//! value. Accepted iterates therefore never increase the functional.

use serde::Serialize;

use crate::connection::Connection;
use crate::error::{GaugeError, Result};
use crate::fourier::prolong;
use crate::functionals::{eval, value_and_gradient, FunctionalSpec};
use crate::gaugefix::fix_coulomb;

const ARMIJO_C: f64 = 1e-4;
const MIN_STEP: f64 = 1e-16;

#[derive(Debug, Clone, PartialEq)]
pub struct MinimizeOptions {
    pub max_iter: usize,
    pub grad_tol: f64,
    /// Initial step length.
    pub step: f64,
    /// Recorded for provenance of the initial field; descent itself is deterministic.
    pub seed: u64,
    /// Record a trace row every this many iterations (the last one is always kept).
    pub record_every: usize,
    pub momentum: bool,
    /// Coulomb re-gauge every this many iterations; 0 disables.
    pub regauge_every: usize,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            max_iter: 5000,
            grad_tol: 1e-5,
            step: 1e-3,
            seed: 0,
            record_every: 1,
            momentum: false,
            regauge_every: 0,
        }
    }
}

impl MinimizeOptions {
    fn validate(&self) -> Result<()> {
        if self.max_iter < 1 {
            return Err(GaugeError::InvalidArgument("max_iter must be >= 1".into()));
        }
        if !(self.grad_tol > 0.0) {
            return Err(GaugeError::InvalidArgument("grad_tol must be positive".into()));
        }
        if !(self.step > 0.0) {
            return Err(GaugeError::InvalidArgument("initial step must be positive".into()));
        }
        if self.record_every < 1 {
            return Err(GaugeError::InvalidArgument("record_every must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub iter: usize,
    pub value: f64,
    pub grad_norm: f64,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimizeTrace {
    pub rows: Vec<TraceRow>,
    pub connection: Connection,
    pub converged: bool,
    pub iterations: usize,
}

impl MinimizeTrace {
    pub fn final_value(&self) -> f64 {
        self.rows.last().map(|r| r.value).unwrap_or(0.0)
    }

    pub fn final_grad_norm(&self) -> f64 {
        self.rows.last().map(|r| r.grad_norm).unwrap_or(0.0)
    }

    /// CSV with header `iter,value,grad_norm,step`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("iter,value,grad_norm,step\n");
        for r in &self.rows {
            s.push_str(&format!("{},{:e},{:e},{:e}\n", r.iter, r.value, r.grad_norm, r.step));
        }
        s
    }

    /// True when recorded values never increase.
    pub fn is_monotone(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].value <= w[0].value)
    }
}

fn shifted(a: &Connection, dir: &crate::forms::FormField, s: f64) -> Result<Connection> {
    let mut f = a.form().clone();
    f.axpy(s, dir)?;
    Connection::new(f)
}

/// Armijo search from `base` along `−grad`; returns the accepted point, its
/// value and the step used.
fn armijo(
    spec: &FunctionalSpec,
    base: &Connection,
    base_value: f64,
    grad: &crate::forms::FormField,
    mut tau: f64,
) -> Result<Option<(Connection, f64, f64)>> {
    let g2 = grad.discrete_inner(grad)?;
    while tau >= MIN_STEP {
        let trial = shifted(base, grad, -tau)?;
        let v = eval(spec, &trial)?;
        if v.is_finite() && v <= base_value - ARMIJO_C * tau * g2 {
            return Ok(Some((trial, v, tau)));
        }
        tau *= 0.5;
    }
    Ok(None)
}

pub fn minimize(spec: &FunctionalSpec, a0: &Connection, opts: &MinimizeOptions) -> Result<MinimizeTrace> {
    opts.validate()?;
    let mut a = a0.clone();
    let (mut value, mut grad) = value_and_gradient(spec, &a)?;
    if !value.is_finite() {
        return Err(GaugeError::NonFinite(value));
    }
    let mut gn = grad.lp_norm(2.0)?;
    let mut rows = vec![TraceRow { iter: 0, value, grad_norm: gn, step: 0.0 }];
    let mut tau = opts.step;
    let mut prev: Option<Connection> = None;
    let mut momentum_k = 0usize;
    let mut iterations = 0;
    let mut converged = gn <= opts.grad_tol;
    while !converged && iterations < opts.max_iter {
        let mut step = None;
        if opts.momentum {
            if let Some(p) = &prev {
                momentum_k += 1;
                let beta = (momentum_k as f64 - 1.0) / (momentum_k as f64 + 2.0);
                let mut y = a.form().clone();
                y.axpy(beta, &a.sub(p)?)?;
                let y = Connection::new(y)?;
                let (vy, gy) = value_and_gradient(spec, &y)?;
                if vy.is_finite() {
                    if let Some((t, v, used)) = armijo(spec, &y, vy, &gy, tau)? {
                        if v <= value {
                            step = Some((t, v, used));
                        }
                    }
                }
                if step.is_none() {
                    momentum_k = 0;
                }
            }
        }
        if step.is_none() {
            step = armijo(spec, &a, value, &grad, tau)?;
        }
        let Some((next, v, used)) = step else {
            log::debug!("line search failed at iteration {iterations}; stopping");
            break;
        };
        if !v.is_finite() {
            return Err(GaugeError::NonFinite(v));
        }
        iterations += 1;
        prev = Some(std::mem::replace(&mut a, next));
        tau = 2.0 * used;
        if opts.regauge_every > 0 && iterations % opts.regauge_every == 0 {
            let fixed = fix_coulomb(&a, 1e-8 * (1.0 + a.lp_norm(2.0)?), 50)?;
            let fv = eval(spec, &fixed.omega)?;
            if fv <= value.min(v) {
                a = fixed.omega;
                prev = None;
                momentum_k = 0;
            }
        }
        let vg = value_and_gradient(spec, &a)?;
        value = vg.0;
        grad = vg.1;
        if !value.is_finite() {
            return Err(GaugeError::NonFinite(value));
        }
        gn = grad.lp_norm(2.0)?;
        converged = gn <= opts.grad_tol;
        if iterations % opts.record_every == 0 || converged || iterations == opts.max_iter {
            rows.push(TraceRow { iter: iterations, value, grad_norm: gn, step: used });
        }
    }
    if rows.last().map(|r| r.iter) != Some(iterations) {
        rows.push(TraceRow { iter: iterations, value, grad_norm: gn, step: 0.0 });
    }
    Ok(MinimizeTrace { rows, connection: a, converged, iterations })
}

/// Minimize on each resolution in turn, seeding every stage with the
/// trigonometric prolongation of the previous minimizer. `a0` must live on a
/// grid no finer than the first resolution; it is prolonged if coarser.
pub fn continuation_ladder(
    spec: &FunctionalSpec,
    a0: &Connection,
    resolutions: &[usize],
    opts: &MinimizeOptions,
) -> Result<MinimizeTrace> {
    if resolutions.is_empty() {
        return Err(GaugeError::InvalidArgument("empty resolution list".into()));
    }
    for w in resolutions.windows(2) {
        if w[1] <= w[0] {
            return Err(GaugeError::InvalidArgument("resolutions must be strictly increasing".into()));
        }
    }
    if let Some(&bad) = resolutions.iter().find(|&&n| n % 2 != 0) {
        return Err(GaugeError::InvalidArgument(format!("resolution {bad} is odd")));
    }
    let mut a = Connection::new(prolong(a0, resolutions[0])?)?;
    let mut trace = None;
    for (i, &n) in resolutions.iter().enumerate() {
        if i > 0 {
            a = Connection::new(prolong(&a, n)?)?;
        }
        let t = minimize(spec, &a, opts)?;
        log::info!("ladder stage N={n}: {} iterations, value {:e}", t.iterations, t.final_value());
        a = t.connection.clone();
        trace = Some(t);
    }
    Ok(trace.expect("nonempty"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fieldgen::FieldGen;
    use crate::functionals::el_residual;
    use crate::grid::GridSpec;

    #[test]
    fn zero_start_converges_immediately() {
        let g = GridSpec::new(2, 16, 2, 2).unwrap();
        let t = minimize(&FunctionalSpec::y(2), &Connection::zeros(g), &MinimizeOptions::default()).unwrap();
        assert!(t.converged);
        assert_eq!(t.iterations, 0);
        assert_eq!(t.final_value(), 0.0);
        assert_eq!(t.rows.len(), 1);
    }

    #[test]
    fn abelian_descent_reaches_flat() {
        let g = GridSpec::new(2, 16, 2, 2).unwrap();
        let a0 = FieldGen::new(3, 2, 0.05).abelian().connection(&g).unwrap();
        let spec = FunctionalSpec::y(2);
        let v0 = eval(&spec, &a0).unwrap();
        let t = minimize(&spec, &a0, &MinimizeOptions::default()).unwrap();
        assert!(t.is_monotone());
        assert!(t.final_value() <= 1e-4 * v0, "{} vs {v0}", t.final_value());
        assert!(t.converged);
        assert!(el_residual(&spec, &t.connection).unwrap() <= 1e-5);
    }

    #[test]
    fn momentum_and_regauge_stay_monotone() {
        let g = GridSpec::new(2, 16, 2, 2).unwrap();
        let a0 = FieldGen::new(0, 2, 0.05).connection(&g).unwrap();
        let spec = FunctionalSpec::y(2);
        let opts = MinimizeOptions { momentum: true, regauge_every: 10, max_iter: 2000, ..Default::default() };
        let t = minimize(&spec, &a0, &opts).unwrap();
        assert!(t.is_monotone());
        assert!(t.converged, "{}", t.final_grad_norm());
    }

    #[test]
    fn ladder_single_stage_matches_minimize() {
        let g = GridSpec::new(2, 16, 2, 2).unwrap();
        let a0 = FieldGen::new(5, 2, 0.05).connection(&g).unwrap();
        let spec = FunctionalSpec::y(2);
        let opts = MinimizeOptions::default();
        assert_eq!(continuation_ladder(&spec, &a0, &[16], &opts).unwrap(), minimize(&spec, &a0, &opts).unwrap());
        assert!(continuation_ladder(&spec, &a0, &[16, 16], &opts).is_err());
        assert!(continuation_ladder(&spec, &a0, &[], &opts).is_err());
        assert!(continuation_ladder(&spec, &a0, &[8], &opts).is_err());
    }

    #[test]
    fn options_are_validated() {
        let g = GridSpec::new(2, 16, 2, 2).unwrap();
        let a = Connection::zeros(g);
        let spec = FunctionalSpec::y(2);
        for bad in [
            MinimizeOptions { max_iter: 0, ..Default::default() },
            MinimizeOptions { grad_tol: 0.0, ..Default::default() },
            MinimizeOptions { step: -1.0, ..Default::default() },
            MinimizeOptions { record_every: 0, ..Default::default() },
        ] {
            assert!(minimize(&spec, &a, &bad).is_err());
        }
    }
}
