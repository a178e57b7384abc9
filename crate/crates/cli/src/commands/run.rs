//! `run`: integrate the full problem, check every estimate, and write
//! the reproducible artifact set (ledger, coefficients, snapshots,
//! summary).

use super::{validation_times, Context};
use crate::{EXIT_CHECK_FAILED, EXIT_PASS, EXIT_USAGE};
use energyeq_core::eigenbasis::EigenBasis;
use energyeq_core::estimates::regularity_report;
use energyeq_core::galerkin::{initial_coefficients, run, RunInputs, Trajectory};
use energyeq_core::lifting::solve_lifting;
use energyeq_core::velocity::{build_forcing, make_velocity, validate_velocity};
use energyeq_core::{Error, Result};
use serde_json::json;
use std::time::Instant;

pub fn execute(ctx: &Context) -> Result<i32> {
    let started = Instant::now();
    let config = &ctx.config;
    let domain = config.domain()?;
    let grid = domain.grid();
    let basis = EigenBasis::build(&domain, config.solver_m)?;
    let lifting = solve_lifting(&domain, config.lifting_depth)?;

    let velocity = make_velocity(&config.velocity_spec(), &domain)?;
    let validation = validate_velocity(
        velocity.as_ref(),
        &domain,
        &validation_times(config.physics_t),
    );
    if ctx.wants("json") {
        ctx.write_json(
            "velocity_validation.json",
            &serde_json::to_value(&validation).expect("serializable report"),
        )?;
    }
    if !validation.pass() {
        eprintln!(
            "run: velocity \"{}\" failed incompressibility validation; see velocity_validation.json",
            config.velocity_kind
        );
        return Ok(EXIT_USAGE);
    }

    let horizon = config.physics_t;
    let forcing = build_forcing(&velocity, &lifting, &basis, &[0.0, 0.5 * horizon, horizon])?;
    let initial = initial_coefficients(&config.initial_condition()?, &basis, &grid)?;
    if initial.boundary_warning {
        eprintln!(
            "run: warning: initial data reaches {} on the Dirichlet boundary (expected ~0)",
            initial.boundary_max
        );
    }

    let solver_config = config.solver_config();
    let inputs = RunInputs {
        basis: &basis,
        grid: &grid,
        velocity: &velocity,
        forcing: &forcing,
        initial: &initial,
        diffusivity: config.physics_a,
        config: &solver_config,
        ledger_settings: config.ledger_settings(),
    };
    let trajectory = match run(&inputs) {
        Ok(t) => t,
        Err(err @ Error::Blowup { .. }) => {
            if ctx.wants("json") {
                ctx.write_json(
                    "run_summary.json",
                    &json!({
                        "status": "blowup",
                        "detail": err.to_string(),
                        "input_hash": ctx.input_hash,
                        "config": ctx.config_json(),
                    }),
                )?;
            }
            return Err(err);
        }
        Err(err) => return Err(err),
    };

    if ctx.wants("csv") {
        ctx.write("ledger.csv", &trajectory.ledger.to_csv())?;
        ctx.write(
            "coefficients.csv",
            &trajectory.coefficients_csv(config.solver_snapshot_stride),
        )?;
        ctx.write("snapshots.csv", &trajectory.snapshots_csv())?;
    }

    let regularity = regularity_report(
        &basis,
        &trajectory.times,
        &trajectory.coeffs,
        &trajectory.rates,
        &config.estimates_p_values,
        config.domain_nx,
        128,
        21,
    )?;

    let residuals_ok = trajectory.ledger.residuals_ok();
    let envelope_ok = trajectory.ledger.envelope_ok();
    let pass = residuals_ok && envelope_ok;
    let status = if pass { "pass" } else { "failed-estimate" };

    if ctx.wants("json") {
        let summary = summary_json(
            ctx,
            &trajectory,
            &initial,
            &forcing,
            &regularity,
            status,
            started,
        );
        ctx.write_json("run_summary.json", &summary)?;
    }

    let margins = trajectory.ledger.worst_margins();
    println!(
        "run: {} steps, status {status}; worst margins E1 {:.2e}, E2 {:.2e}, E3 {:.2e}, envelope {:.2e}",
        trajectory.times.len() - 1,
        margins.e1,
        margins.e2,
        margins.e3,
        margins.envelope,
    );
    Ok(if pass { EXIT_PASS } else { EXIT_CHECK_FAILED })
}

fn summary_json(
    ctx: &Context,
    trajectory: &Trajectory,
    initial: &energyeq_core::galerkin::InitialProjection,
    forcing: &energyeq_core::velocity::Forcing,
    regularity: &energyeq_core::estimates::RegularityReport,
    status: &str,
    started: Instant,
) -> serde_json::Value {
    let rows = trajectory.ledger.rows();
    let dt = trajectory.dt;
    let trapz = |pick: fn(&energyeq_core::estimates::LedgerRow) -> f64| -> f64 {
        if rows.len() < 2 {
            return 0.0;
        }
        let inner: f64 = rows[1..rows.len() - 1].iter().map(pick).sum();
        dt * (0.5 * pick(&rows[0]) + inner + 0.5 * pick(&rows[rows.len() - 1]))
    };
    let sup_l2 = rows.iter().map(|r| r.l2_sq.sqrt()).fold(0.0, f64::max);
    let last = rows.last().expect("at least one row");

    let decay_fit = decay_rate_fit(ctx, trajectory);

    let lp_report: serde_json::Map<String, serde_json::Value> = forcing
        .lp_report
        .iter()
        .map(|(p, per_time)| {
            (
                format!("{p}"),
                json!(per_time
                    .iter()
                    .map(|(t, n)| json!({ "t": t, "norm": n }))
                    .collect::<Vec<_>>()),
            )
        })
        .collect();

    json!({
        "status": status,
        "steps": trajectory.times.len() - 1,
        "dt": dt,
        "wall_time_s": started.elapsed().as_secs_f64(),
        "input_hash": ctx.input_hash,
        "series_depth": ctx.config.lifting_depth,
        "constants": serde_json::to_value(trajectory.ledger.constants).unwrap(),
        "initial": {
            "l2_sq": initial.l2_sq,
            "h1_sq": initial.h1_sq,
            "truncation_h1": initial.truncation_h1,
            "boundary_max": initial.boundary_max,
            "boundary_warning": initial.boundary_warning,
        },
        "norms": {
            "sup_l2": sup_l2,
            "final_l2_sq": last.l2_sq,
            "final_h1_sq": last.h1_sq,
            "int_h1_sq": trapz(|r| r.h1_sq),
            "int_lap_sq": trapz(|r| r.lap_sq),
            "int_rate_sq": trapz(|r| r.rate_sq),
        },
        "estimates": {
            "residuals_ok": trajectory.ledger.residuals_ok(),
            "envelope_ok": trajectory.ledger.envelope_ok(),
            "worst_margins": serde_json::to_value(trajectory.ledger.worst_margins()).unwrap(),
        },
        "forcing_lp": lp_report,
        "regularity": serde_json::to_value(regularity).unwrap(),
        "decay_rate_fit": decay_fit,
        "config": ctx.config_json(),
    })
}

/// Exponential fit for pure-diffusion single-mode runs; None otherwise.
fn decay_rate_fit(ctx: &Context, trajectory: &Trajectory) -> serde_json::Value {
    if ctx.config.velocity_kind != "zero" || ctx.config.initial_kind != "mode" {
        return serde_json::Value::Null;
    }
    let g0 = &trajectory.coeffs[0];
    let gt = trajectory.final_coeffs();
    let j = (0..g0.len())
        .max_by(|&a, &b| g0[a].abs().total_cmp(&g0[b].abs()))
        .unwrap_or(0);
    let (a, b) = (g0[j], gt[j]);
    if a == 0.0 || b == 0.0 || a.signum() != b.signum() {
        return serde_json::Value::Null;
    }
    let horizon = trajectory.times.last().copied().unwrap_or(0.0);
    if horizon <= 0.0 {
        return serde_json::Value::Null;
    }
    json!({
        "mode_index": j + 1,
        "rate": (a / b).ln() / horizon,
    })
}
