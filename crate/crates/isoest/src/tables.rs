//! Row-level results behind each subcommand.

use std::collections::BTreeMap;

use isoest_core::estimation::{optimal_fidelity, DEFAULT_TOL};
use isoest_core::oracle::{hnks_hamiltonian, Family, McConfig};
use isoest_core::pbt::{cptp_cost_bound, pbt_program_cost, sar_query_complexity, QueryStrategy};
use isoest_core::protocol::{est_program_cost, sweep_row, Schedule, Strategy};
use isoest_core::{Error, Result};
use rayon::prelude::*;
use serde::Serialize;

use crate::fit::{ols, LineFit};
use crate::mc::{mc_fidelity_par, sigma_distance};

/// Slack allowed when comparing a fidelity against its bounds.
pub const BOUND_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct FidelitySummary {
    pub n: usize,
    pub d: usize,
    #[serde(rename = "D")]
    pub big_d: usize,
    pub fidelity: f64,
    pub infidelity: f64,
    pub iterations: usize,
    pub residual: f64,
    pub rowsum_bound: f64,
    pub jensen_bound: f64,
    pub consistent: bool,
    pub eigenvector: Vec<f64>,
}

pub fn fidelity_summary(n: usize, d: usize, big_d: usize) -> Result<FidelitySummary> {
    let r = optimal_fidelity(n, d, big_d)?;
    let consistent = r.residual <= DEFAULT_TOL
        && r.fidelity <= r.rowsum_bound + BOUND_SLACK
        && r.rowsum_bound <= r.jensen_bound + BOUND_SLACK
        && r.eigvector.iter().all(|&x| x >= 0.0);
    Ok(FidelitySummary {
        n,
        d,
        big_d,
        fidelity: r.fidelity,
        infidelity: 1.0 - r.fidelity,
        iterations: r.iterations,
        residual: r.residual,
        rowsum_bound: r.rowsum_bound,
        jensen_bound: r.jensen_bound,
        consistent,
        eigenvector: r.eigvector,
    })
}

/// One line of a fidelity scan. The protocol columns are filled when a
/// window schedule is supplied.
#[derive(Debug, Clone, Serialize)]
pub struct ScanRow {
    pub n: usize,
    pub fidelity: f64,
    pub infidelity: f64,
    pub n_infidelity: f64,
    pub n2_infidelity: f64,
    /// `2a_{2n} - a_n` with `a_n = n(1-F)`, when `2n` is also scanned.
    pub richardson: Option<f64>,
    #[serde(rename = "N")]
    pub big_n: Option<usize>,
    pub lower_bound: Option<f64>,
    pub achieved: Option<f64>,
    pub upper_bound: Option<f64>,
}

pub fn scan_rows(d: usize, big_d: usize, ns: &[usize], schedule: Option<Schedule>) -> Result<Vec<ScanRow>> {
    let mut rows = ns
        .par_iter()
        .map(|&n| {
            let f = optimal_fidelity(n, d, big_d)?.fidelity;
            let inf = 1.0 - f;
            let mut row = ScanRow {
                n,
                fidelity: f,
                infidelity: inf,
                n_infidelity: n as f64 * inf,
                n2_infidelity: (n * n) as f64 * inf,
                richardson: None,
                big_n: None,
                lower_bound: None,
                achieved: None,
                upper_bound: None,
            };
            if let Some(s) = schedule {
                let big_n = s.width(n, d, big_d)?;
                let p = sweep_row(n, d, big_d, big_n)?;
                row.big_n = Some(big_n);
                row.lower_bound = Some(p.lower_bound);
                row.achieved = Some(p.achieved);
                row.upper_bound = Some(p.upper_bound);
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    let a: BTreeMap<usize, f64> = rows.iter().map(|r| (r.n, r.n_infidelity)).collect();
    for row in &mut rows {
        if let Some(a2) = a.get(&(2 * row.n)) {
            row.richardson = Some(2.0 * a2 - row.n_infidelity);
        }
    }
    Ok(rows)
}

/// Program cost at one query count.
#[derive(Debug, Clone, Serialize)]
pub struct CostRow {
    pub eps: f64,
    pub n: usize,
    #[serde(rename = "N")]
    pub big_n: usize,
    pub cost_bits: f64,
    /// `cost_bits / 2`, present only when asked for.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cost_qubits: Option<f64>,
}

/// Window width used for `strategy`; the channel strategy programs the
/// Stinespring isometry into `ℂ^{D·d}`.
pub fn strategy_width(strategy: Strategy, schedule: Schedule, n: usize, d: usize, big_d: usize) -> Result<usize> {
    match strategy {
        Strategy::Cptp => schedule.width(n, d, big_d * d),
        _ => schedule.width(n, d, big_d),
    }
}

pub fn cost_rows(strategy: Strategy, d: usize, big_d: usize, ns: &[usize], schedule: Schedule) -> Result<Vec<CostRow>> {
    ns.par_iter()
        .map(|&n| {
            let big_n = strategy_width(strategy, schedule, n, d, big_d)?;
            let report = match strategy {
                Strategy::Estimation => est_program_cost(n, d, big_d, big_n)?,
                Strategy::Pbt => pbt_program_cost(n, d, big_d, big_n)?,
                Strategy::Cptp => cptp_cost_bound(d, big_d, n, big_n)?,
            };
            let eps = report.epsilon_proxy.ok_or_else(|| Error::Inconsistent("cost without error proxy".into()))?;
            Ok(CostRow { eps, n, big_n, cost_bits: report.cost_bits, cost_qubits: None })
        })
        .collect()
}

/// Least-squares fit of `cost_bits` against `log2(1/ε)`.
pub fn cost_fit(rows: &[CostRow]) -> Option<LineFit> {
    let usable: Vec<&CostRow> = rows.iter().filter(|r| r.eps > 0.0).collect();
    let x: Vec<f64> = usable.iter().map(|r| (1.0 / r.eps).log2()).collect();
    let y: Vec<f64> = usable.iter().map(|r| r.cost_bits).collect();
    ols(&x, &y)
}

/// Queries needed per error level, with log-log slopes over the whole grid.
#[derive(Debug, Clone, Serialize)]
pub struct QueryRow {
    pub eps: f64,
    pub n_classical: Option<usize>,
    pub n_quantum: usize,
    pub slope_classical: Option<f64>,
    pub slope_quantum: Option<f64>,
}

pub fn query_rows(d: usize, big_d: usize, eps: &[f64]) -> Result<Vec<QueryRow>> {
    let mut rows = eps
        .par_iter()
        .map(|&e| {
            let n_classical = if big_d > d { Some(sar_query_complexity(d, big_d, e, QueryStrategy::Classical)?) } else { None };
            let n_quantum = sar_query_complexity(d, big_d, e, QueryStrategy::Quantum)?;
            Ok(QueryRow { eps: e, n_classical, n_quantum, slope_classical: None, slope_quantum: None })
        })
        .collect::<Result<Vec<_>>>()?;
    let x: Vec<f64> = rows.iter().map(|r| (1.0 / r.eps).ln()).collect();
    let yq: Vec<f64> = rows.iter().map(|r| (r.n_quantum as f64).ln()).collect();
    let slope_q = ols(&x, &yq).map(|f| f.slope);
    let slope_c = if rows.iter().all(|r| r.n_classical.is_some()) {
        let yc: Vec<f64> = rows.iter().map(|r| (r.n_classical.unwrap() as f64).ln()).collect();
        ols(&x, &yc).map(|f| f.slope)
    } else {
        None
    };
    for r in &mut rows {
        r.slope_quantum = slope_q;
        r.slope_classical = slope_c;
    }
    Ok(rows)
}

/// Hamiltonian check for the two one-parameter families.
#[derive(Debug, Clone, Serialize)]
pub struct HnksSummary {
    pub d: usize,
    pub thetas: Vec<f64>,
    /// Largest `|H_θ|` entry over the grid, isometry family.
    pub isometry_max_abs: f64,
    /// `H` of the unitary family at the first grid point, as `[re, im]` pairs.
    pub unitary_h: Vec<Vec<[f64; 2]>>,
    /// Largest deviation of any grid point's `H` from `unitary_h`.
    pub unitary_theta_spread: f64,
    /// Largest deviation of `unitary_h` from `i(|d⟩⟨d-1| - |d-1⟩⟨d|)`, 0-indexed.
    pub unitary_expected_residual: f64,
}

/// `points` equally spaced angles on `[0, π]`.
pub fn theta_grid(points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..points).map(|k| std::f64::consts::PI * k as f64 / (points - 1) as f64).collect(),
    }
}

pub fn hnks_summary(d: usize, thetas: &[f64]) -> Result<HnksSummary> {
    if thetas.is_empty() {
        return Err(Error::InvalidParameter("empty θ grid".into()));
    }
    let mut iso_max: f64 = 0.0;
    for &t in thetas {
        let h = hnks_hamiltonian(t, d, Family::Isometry)?;
        iso_max = h.matrix.iter().map(|z| z.norm_sqr().sqrt()).fold(iso_max, f64::max);
    }
    let first = hnks_hamiltonian(thetas[0], d, Family::Unitary)?.matrix;
    let mut spread: f64 = 0.0;
    for &t in &thetas[1..] {
        let h = hnks_hamiltonian(t, d, Family::Unitary)?.matrix;
        spread = (h - &first).iter().map(|z| z.norm_sqr().sqrt()).fold(spread, f64::max);
    }
    let mut expected_residual: f64 = 0.0;
    for i in 0..first.nrows() {
        for j in 0..first.ncols() {
            let want_im = match (i, j) {
                (a, b) if a == d && b == d - 1 => 1.0,
                (a, b) if a == d - 1 && b == d => -1.0,
                _ => 0.0,
            };
            let z = first[(i, j)];
            expected_residual = expected_residual.max((z.re.powi(2) + (z.im - want_im).powi(2)).sqrt());
        }
    }
    let unitary_h = (0..first.nrows()).map(|i| (0..first.ncols()).map(|j| [first[(i, j)].re, first[(i, j)].im]).collect()).collect();
    Ok(HnksSummary {
        d,
        thetas: thetas.to_vec(),
        isometry_max_abs: iso_max,
        unitary_h,
        unitary_theta_spread: spread,
        unitary_expected_residual: expected_residual,
    })
}

/// Monte-Carlo run of the optimal covariant protocol against the exact value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleSummary {
    pub n: usize,
    pub d: usize,
    #[serde(rename = "D")]
    pub big_d: usize,
    pub samples: usize,
    pub seed: u64,
    pub mean: f64,
    pub std_error: f64,
    pub exact: f64,
    pub sigma_distance: f64,
}

pub fn oracle_summary(n: usize, d: usize, big_d: usize, samples: usize, seed: u64) -> Result<OracleSummary> {
    let config = McConfig::new(samples, seed);
    let exact = optimal_fidelity(n, d, big_d)?;
    let est = mc_fidelity_par(&exact.eigvector, n, d, big_d, &config)?;
    Ok(OracleSummary {
        n,
        d,
        big_d,
        samples: est.samples,
        seed,
        mean: est.mean,
        std_error: est.std_error,
        exact: exact.fidelity,
        sigma_distance: sigma_distance(&est, exact.fidelity),
    })
}
