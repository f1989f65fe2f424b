//! Monte-Carlo oracle with the substreams spread over a thread pool.

use isoest_core::oracle::{McConfig, McProblem, OracleEstimate, RunningStats, MC_WORKERS};
use isoest_core::Result;
use rayon::prelude::*;

/// Same estimate as [`isoest_core::oracle::mc_fidelity`], bit for bit: each
/// worker owns one generator stream and the partial statistics are merged
/// in worker order.
pub fn mc_fidelity_par(v: &[f64], n: usize, d: usize, big_d: usize, config: &McConfig) -> Result<OracleEstimate> {
    let problem = McProblem::new(v, n, d, big_d, config)?;
    let parts: Vec<RunningStats> = (0..MC_WORKERS).into_par_iter().map(|w| problem.run_worker(w)).collect();
    Ok(problem.finish(&parts))
}

/// Distance between an estimate and the exact value in standard errors.
pub fn sigma_distance(est: &OracleEstimate, exact: f64) -> f64 {
    let gap = (est.mean - exact).abs();
    if est.std_error > 0.0 {
        gap / est.std_error
    } else if gap == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}
