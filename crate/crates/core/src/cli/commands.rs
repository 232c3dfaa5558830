//! Subcommand bodies.

use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::json;

use super::config::RunConfig;
use super::{build_config, Command, EXIT_FAILURE, EXIT_OK};
use crate::chern::{chern_density, chern_integral, closedness_residual};
use crate::connection::Connection;
use crate::error::{GaugeError, Result};
use crate::functionals::{eval, gradient, sobolev_profile, FunctionalKind, FunctionalSpec};
use crate::gaugefix::{coulomb_residual, fix_coulomb, uhlenbeck_report};
use crate::minimize::{continuation_ladder, minimize, MinimizeOptions};
use crate::snapshot;
use crate::verify::run_catalog;

const DEFAULT_RESOLUTIONS: [usize; 3] = [16, 32, 64];
/// Default gauge-fixing tolerance, relative to `‖A‖_{L²}`.
const GAUGEFIX_REL_TOL: f64 = 1e-6;
const GAUGEFIX_MAX_ITER: usize = 500;

pub(super) fn dispatch(command: Command) -> Result<u8> {
    match command {
        Command::Verify { common, only, resolutions } => {
            let cfg = build_config(&common, &[("resolutions", resolutions)])?;
            with_threads(&cfg, || cmd_verify(&cfg, &only))
        }
        Command::Minimize { common, functional, ladder, resolutions, momentum, regauge_every, record_every } => {
            let cfg = build_config(
                &common,
                &[
                    ("functional", functional),
                    ("resolutions", resolutions),
                    ("momentum", momentum.then(|| "true".to_string())),
                    ("regauge-every", regauge_every.map(|v| v.to_string())),
                    ("record-every", record_every.map(|v| v.to_string())),
                ],
            )?;
            with_threads(&cfg, || cmd_minimize(&cfg, ladder))
        }
        Command::Gaugefix { common, input } => {
            let cfg = build_config(&common, &[])?;
            with_threads(&cfg, || cmd_gaugefix(&cfg, &input))
        }
        Command::Eval { common, input } => {
            let cfg = build_config(&common, &[])?;
            with_threads(&cfg, || cmd_eval(&cfg, &input))
        }
        Command::Chern { common, input } => {
            let cfg = build_config(&common, &[])?;
            with_threads(&cfg, || cmd_chern(&cfg, input.as_deref()))
        }
    }
}

fn with_threads<F: FnOnce() -> Result<u8> + Send>(cfg: &RunConfig, f: F) -> Result<u8> {
    match cfg.threads {
        None => f(),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| GaugeError::InvalidArgument(format!("thread pool: {e}")))?
            .install(f),
    }
}

fn write_out(cfg: &RunConfig, name: &str, contents: &str) -> Result<()> {
    fs::create_dir_all(&cfg.out)?;
    fs::write(cfg.out.join(name), contents)?;
    Ok(())
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let s = serde_json::to_string_pretty(value)
        .map_err(|e| GaugeError::InvalidArgument(format!("serialization failed: {e}")))?;
    println!("{s}");
    Ok(())
}

fn cmd_verify(cfg: &RunConfig, only: &[String]) -> Result<u8> {
    let resolutions = cfg.resolutions.clone().unwrap_or_else(|| DEFAULT_RESOLUTIONS.to_vec());
    let only = if only.is_empty() { None } else { Some(only) };
    let report = run_catalog(cfg.m, &resolutions, only)?;
    write_out(cfg, "verify.csv", &report.to_csv())?;
    if cfg.json {
        print_json(&report)?;
    } else {
        print!("{}", report.summary());
    }
    Ok(if report.all_pass() { EXIT_OK } else { EXIT_FAILURE })
}

fn cmd_minimize(cfg: &RunConfig, ladder: bool) -> Result<u8> {
    let spec = cfg.spec()?;
    let opts = MinimizeOptions {
        max_iter: cfg.max_iter.unwrap_or(5000),
        grad_tol: cfg.tol.unwrap_or(1e-5),
        seed: cfg.seed,
        record_every: cfg.record_every,
        momentum: cfg.momentum,
        regauge_every: cfg.regauge_every,
        ..MinimizeOptions::default()
    };
    let trace = if ladder {
        let resolutions = cfg.resolutions.clone().unwrap_or_else(|| vec![cfg.n_points / 2, cfg.n_points]);
        let first = *resolutions.first().ok_or_else(|| GaugeError::InvalidArgument("empty ladder".into()))?;
        let a0 = cfg.field_gen().connection(&cfg.grid_at(first)?)?;
        continuation_ladder(&spec, &a0, &resolutions, &opts)?
    } else {
        let a0 = cfg.field_gen().connection(&cfg.grid()?)?;
        minimize(&spec, &a0, &opts)?
    };
    write_out(cfg, "minimize_trace.csv", &trace.to_csv())?;
    snapshot::write_form(&cfg.out.join("minimizer.bin"), &trace.connection)?;
    let a = &trace.connection;
    let summary = json!({
        "functional": spec.to_string(),
        "iterations": trace.iterations,
        "converged": trace.converged,
        "value": trace.final_value(),
        "grad_norm": trace.final_grad_norm(),
        "coulomb_residual": coulomb_residual(a),
        "sobolev_profile": sobolev_profile(a, spec.n)?,
    });
    if cfg.json {
        print_json(&summary)?;
    } else {
        println!("functional        {spec}");
        println!("iterations        {}", trace.iterations);
        println!("converged         {}", trace.converged);
        println!("final value       {:e}", trace.final_value());
        println!("gradient norm     {:e}", trace.final_grad_norm());
        println!("coulomb residual  {:e}", coulomb_residual(a));
        println!("sobolev profile   {:?}", sobolev_profile(a, spec.n)?);
    }
    Ok(if trace.converged { EXIT_OK } else { EXIT_FAILURE })
}

fn cmd_gaugefix(cfg: &RunConfig, input: &Path) -> Result<u8> {
    let a = snapshot::read_connection(input)?;
    let tol = match cfg.tol {
        Some(t) => t,
        None => (GAUGEFIX_REL_TOL * a.form().lp_norm(2.0)?).max(f64::MIN_POSITIVE),
    };
    let result = fix_coulomb(&a, tol, cfg.max_iter.unwrap_or(GAUGEFIX_MAX_ITER))?;
    write_out(cfg, "gaugefix.csv", &result.to_csv())?;
    snapshot::write_form(&cfg.out.join("omega.bin"), &result.omega)?;
    snapshot::write_gauge(&cfg.out.join("gauge.bin"), &result.u)?;
    let report = if result.converged { Some(uhlenbeck_report(&result, cfg.n)?) } else { None };
    if cfg.json {
        print_json(&json!({
            "converged": result.converged,
            "iterations": result.iterations,
            "coulomb_residual": result.residual,
            "uhlenbeck": report,
        }))?;
    } else {
        println!("converged         {}", result.converged);
        println!("iterations        {}", result.iterations);
        println!("coulomb residual  {:e}", result.residual);
        if let Some(r) = report {
            println!("uhlenbeck lhs     {:e}", r.lhs);
            println!("uhlenbeck rhs     {:e}", r.rhs);
            println!("uhlenbeck ratio   {:e}", r.ratio);
        }
    }
    Ok(if result.converged { EXIT_OK } else { EXIT_FAILURE })
}

struct EvalOutput {
    values: Vec<(String, f64)>,
    sobolev_profile: Vec<f64>,
    coulomb_residual: f64,
    el_residual: f64,
    chern_integrals: Vec<(usize, f64)>,
}

fn eval_all(a: &Connection, n: usize) -> Result<EvalOutput> {
    let m = a.grid().m();
    if m > 2 * n {
        return Err(GaugeError::DimensionTooLarge { m, two_n: 2 * n });
    }
    let mut values = Vec::new();
    for kind in FunctionalKind::ALL {
        let spec = FunctionalSpec::new(kind, n)?;
        values.push((spec.to_string(), eval(&spec, a)?));
    }
    let mut chern_integrals = Vec::new();
    if m % 2 == 0 && m / 2 <= a.grid().k() {
        chern_integrals.push((m / 2, chern_integral(a, m / 2)?));
    }
    Ok(EvalOutput {
        values,
        sobolev_profile: sobolev_profile(a, n)?,
        coulomb_residual: coulomb_residual(a),
        el_residual: gradient(&FunctionalSpec::y(n), a)?.lp_norm(2.0)?,
        chern_integrals,
    })
}

fn cmd_eval(cfg: &RunConfig, input: &Path) -> Result<u8> {
    let a = snapshot::read_connection(input)?;
    let out = eval_all(&a, cfg.n)?;
    if cfg.json {
        let values: serde_json::Map<String, serde_json::Value> =
            out.values.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
        let chern: serde_json::Map<String, serde_json::Value> =
            out.chern_integrals.iter().map(|(j, v)| (format!("p{j}"), json!(v))).collect();
        print_json(&json!({
            "values": values,
            "sobolev_profile": out.sobolev_profile,
            "coulomb_residual": out.coulomb_residual,
            "el_residual_y": out.el_residual,
            "chern_integrals": chern,
        }))?;
    } else {
        for (name, v) in &out.values {
            println!("{name:<18}{v:e}");
        }
        println!("sobolev profile   {:?}", out.sobolev_profile);
        println!("coulomb residual  {:e}", out.coulomb_residual);
        println!("el residual (Y)   {:e}", out.el_residual);
        for (j, v) in &out.chern_integrals {
            println!("chern p{j}          {v:e}");
        }
    }
    Ok(EXIT_OK)
}

fn cmd_chern(cfg: &RunConfig, input: Option<&Path>) -> Result<u8> {
    let a = match input {
        Some(p) => snapshot::read_connection(p)?,
        None => cfg.field_gen().connection(&cfg.grid()?)?,
    };
    let (m, k) = (a.grid().m(), a.grid().k());
    let mut rows = Vec::new();
    for j in 1..=k.min(m / 2) {
        let d = chern_density(&a, j)?;
        fs::create_dir_all(&cfg.out)?;
        snapshot::write_form(&cfg.out.join(format!("chern_p{j}.bin")), &d.field)?;
        let max_abs = d.field.data().iter().map(|z| z.re.abs()).fold(0.0, f64::max);
        let integral = if 2 * j == m { Some(chern_integral(&a, j)?) } else { None };
        let closedness = if 2 * j < m { Some(closedness_residual(&a, j)?) } else { None };
        rows.push(json!({ "j": j, "max_abs_density": max_abs, "integral": integral, "closedness": closedness }));
    }
    if cfg.json {
        print_json(&rows)?;
    } else {
        for r in &rows {
            println!("{r}");
        }
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    #[test]
    fn eval_zero_connection() {
        let g = GridSpec::new(2, 16, 2, 2).unwrap();
        let out = eval_all(&Connection::zeros(g), 2).unwrap();
        assert_eq!(out.values.len(), 4);
        assert!(out.values.iter().all(|(_, v)| *v == 0.0));
        assert_eq!(out.coulomb_residual, 0.0);
        assert_eq!(out.chern_integrals, vec![(1, 0.0)]);
        let g4 = GridSpec::new(4, 8, 2, 2).unwrap();
        assert!(eval_all(&Connection::zeros(g4), 1).is_err());
    }
}
