//! `sweep`: rerun the problem over increasing basis sizes and check the
//! convergence monitor (Cauchy gaps decreasing, norm families bounded).

use super::{validation_times, Context};
use crate::{EXIT_CHECK_FAILED, EXIT_PASS, EXIT_USAGE};
use energyeq_core::eigenbasis::EigenBasis;
use energyeq_core::estimates::{sweep_report, SweepInput};
use energyeq_core::galerkin::{initial_coefficients, run, RunInputs, Trajectory};
use energyeq_core::lifting::solve_lifting;
use energyeq_core::velocity::{build_forcing, make_velocity, validate_velocity};
use energyeq_core::Result;
use serde_json::json;

pub fn execute(ctx: &Context) -> Result<i32> {
    let config = &ctx.config;
    let domain = config.domain()?;
    let grid = domain.grid();
    let lifting = solve_lifting(&domain, config.lifting_depth)?;
    let velocity = make_velocity(&config.velocity_spec(), &domain)?;
    let validation = validate_velocity(
        velocity.as_ref(),
        &domain,
        &validation_times(config.physics_t),
    );
    if !validation.pass() {
        eprintln!("sweep: velocity failed incompressibility validation");
        return Ok(EXIT_USAGE);
    }

    let m_values = config.estimates_sweep_m_list.clone();
    let horizon = config.physics_t;
    let init_kind = config.initial_condition()?;

    let mut runs: Vec<(usize, EigenBasis, Trajectory)> = Vec::new();
    for &m in &m_values {
        let basis = EigenBasis::build(&domain, m)?;
        let forcing = build_forcing(&velocity, &lifting, &basis, &[0.0, horizon])?;
        let initial = initial_coefficients(&init_kind, &basis, &grid)?;
        let mut solver_config = config.solver_config();
        solver_config.modes = m;
        let trajectory = run(&RunInputs {
            basis: &basis,
            grid: &grid,
            velocity: &velocity,
            forcing: &forcing,
            initial: &initial,
            diffusivity: config.physics_a,
            config: &solver_config,
            ledger_settings: config.ledger_settings(),
        })?;
        if ctx.wants("csv") {
            ctx.write(
                &format!("sweep_ledger_m{m}.csv"),
                &trajectory.ledger.to_csv(),
            )?;
        }
        runs.push((m, basis, trajectory));
    }

    let lambdas: Vec<Vec<f64>> = runs.iter().map(|(_, b, _)| b.lambdas()).collect();
    let inputs: Vec<SweepInput> = runs
        .iter()
        .zip(&lambdas)
        .map(|((m, _, traj), lam)| SweepInput {
            m: *m,
            lambdas: lam,
            dt: traj.dt,
            coeffs: &traj.coeffs,
            rates: &traj.rates,
        })
        .collect();
    let report = sweep_report(&inputs, 2.0)?;

    let ledgers_ok: Vec<bool> = runs
        .iter()
        .map(|(_, _, t)| t.ledger.residuals_ok() && t.ledger.envelope_ok())
        .collect();
    let all_ledgers_ok = ledgers_ok.iter().all(|&ok| ok);
    let pass = report.pass() && all_ledgers_ok;

    if ctx.wants("json") {
        let mut value = serde_json::to_value(&report).expect("serializable report");
        let obj = value.as_object_mut().expect("report is an object");
        obj.insert("per_run_estimates_ok".into(), json!(ledgers_ok));
        obj.insert("input_hash".into(), json!(ctx.input_hash));
        obj.insert("config".into(), ctx.config_json());
        ctx.write_json("sweep_report.json", &value)?;
    }

    println!(
        "sweep: m = {:?}, gaps = {:?}, {}",
        report.m_values,
        report.cauchy_gaps,
        if pass { "PASS" } else { "FAIL" }
    );
    Ok(if pass { EXIT_PASS } else { EXIT_CHECK_FAILED })
}
