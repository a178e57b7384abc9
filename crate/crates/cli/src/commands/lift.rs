//! `lift`: wall-temperature lifting artifacts and regularity report.

use super::Context;
use crate::EXIT_PASS;
use energyeq_core::lifting::{harmonic_residual_from_samples, solve_lifting};
use energyeq_core::Result;
use serde_json::json;

pub fn execute(ctx: &Context) -> Result<i32> {
    let config = &ctx.config;
    let domain = config.domain()?;
    let lift = solve_lifting(&domain, config.lifting_depth)?;

    let grid = &lift.grid;
    let mut csv = String::from("x,y,theta_s,dtheta_dx,dtheta_dy\n");
    for (iy, &y) in grid.ys.iter().enumerate() {
        for (ix, &x) in grid.xs.iter().enumerate() {
            let k = grid.index(ix, iy);
            csv.push_str(&format!(
                "{x},{y},{},{},{}\n",
                lift.samples[k], lift.grad_x[k], lift.grad_y[k]
            ));
        }
    }
    ctx.write("lift_samples.csv", &csv)?;

    let mut sob = String::from("p,grad_lp_norm\n");
    for (p, norm) in &lift.sobolev_report {
        sob.push_str(&format!("{p},{norm}\n"));
    }
    ctx.write("lift_sobolev.csv", &sob)?;

    // Interior harmonicity and mirror symmetry diagnostics on a uniform
    // evaluation mesh.
    const CHECK_N: usize = 256;
    let samples = lift.sample_uniform(CHECK_N);
    let residual = harmonic_residual_from_samples(
        &samples,
        &domain,
        CHECK_N,
        0.15 * domain.length.min(domain.height),
    );
    let stride = CHECK_N + 1;
    let mut symmetry = 0.0_f64;
    for j in 0..=CHECK_N {
        for i in 0..=CHECK_N {
            let v = samples[j * stride + i];
            let w = samples[(CHECK_N - j) * stride + i];
            symmetry = symmetry.max((v - w).abs());
        }
    }

    if ctx.wants("json") {
        let sobolev: serde_json::Map<String, serde_json::Value> = lift
            .sobolev_report
            .iter()
            .map(|(p, n)| (format!("{p}"), json!(n)))
            .collect();
        ctx.write_json(
            "lift_summary.json",
            &json!({
                "series_depth": lift.depth(),
                "harmonic_residual": residual,
                "harmonic_check_n": CHECK_N,
                "mirror_symmetry_error": symmetry,
                "sobolev_grad_lp": sobolev,
                "input_hash": ctx.input_hash,
                "config": ctx.config_json(),
            }),
        )?;
    }
    println!(
        "lift: depth {}, harmonicity residual {residual:.3e}, symmetry error {symmetry:.3e}",
        lift.depth()
    );
    Ok(EXIT_PASS)
}
