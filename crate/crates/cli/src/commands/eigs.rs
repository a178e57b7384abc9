//! `eigs`: eigenpair table with the finite-difference cross-check.

use super::Context;
use crate::{EXIT_CHECK_FAILED, EXIT_PASS};
use energyeq_core::eigenbasis::{oracle::fd_eigen_oracle, EigenBasis};
use energyeq_core::Result;
use serde_json::json;

const GRAM_TOL: f64 = 1e-10;

pub fn execute(ctx: &Context, oracle_n: usize) -> Result<i32> {
    let config = &ctx.config;
    let domain = config.domain()?;
    let grid = domain.grid();
    let m = config.solver_m;
    let basis = EigenBasis::build(&domain, m)?;
    let gram = basis.gram_matrix(&grid);
    let fd = fd_eigen_oracle(&domain, oracle_n, m.min(oracle_n * (oracle_n - 1)))?;

    let mut csv = String::from("j,kx,my,lambda_analytic,lambda_fd,gram_residual\n");
    let mut worst_gram = 0.0_f64;
    for (j, pair) in basis.pairs().iter().enumerate() {
        let mut gram_residual = 0.0_f64;
        for k in 0..m {
            let want = if j == k { 1.0 } else { 0.0 };
            gram_residual = gram_residual.max((gram[(j, k)] - want).abs());
        }
        worst_gram = worst_gram.max(gram_residual);
        let lambda_fd = fd.get(j).map(|p| p.lambda).unwrap_or(f64::NAN);
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            j + 1,
            pair.kx,
            pair.my,
            pair.lambda,
            lambda_fd,
            gram_residual
        ));
    }
    ctx.write("eigs.csv", &csv)?;

    let pass = worst_gram < GRAM_TOL;
    if ctx.wants("json") {
        ctx.write_json(
            "eigs_summary.json",
            &json!({
                "modes": m,
                "oracle_n": oracle_n,
                "worst_gram_residual": worst_gram,
                "gram_tolerance": GRAM_TOL,
                "pass": pass,
                "input_hash": ctx.input_hash,
                "config": ctx.config_json(),
            }),
        )?;
    }
    println!(
        "eigs: {m} modes, worst Gram residual {worst_gram:.3e} ({})",
        if pass { "PASS" } else { "FAIL" }
    );
    Ok(if pass { EXIT_PASS } else { EXIT_CHECK_FAILED })
}
