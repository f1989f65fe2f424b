//! Port-based-teleportation quantities: the resource-state coefficients on
//! `S_Young + □`, the program cost of the PBT strategy, the CPTP extension,
//! and the query counts of classical versus quantum storage.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_bigint::BigUint;

use crate::error::{invalid, Result};
use crate::estimation::optimal_fidelity;
use crate::protocol::{build_v, log2_paired_dimension, CostReport, ProtocolWeights, Strategy};
use crate::young::{count_stab, DiagramSet, YoungDiagram};

/// Weights `w_μ ∝ Σ_{α ∈ μ - □} v_α` on the one-box extensions of the window.
#[derive(Debug, Clone, PartialEq)]
pub struct PbtWeights {
    pub base: ProtocolWeights,
    pub support_plus: DiagramSet,
    /// Weight of `support_plus[k]`, unit Euclidean norm.
    pub values: Vec<f64>,
}

impl PbtWeights {
    pub fn weight_of(&self, mu: &YoungDiagram) -> f64 {
        self.support_plus.position(mu).map_or(0.0, |k| self.values[k])
    }

    /// `m_μ` for each diagram of the support; it only enters the normalization
    /// of the resource state and drops out of the cost.
    pub fn stab_counts(&self) -> Vec<BigUint> {
        self.support_plus.iter().map(count_stab).collect()
    }
}

/// Normalized extension weights of a window protocol.
pub fn w_weights(v: &ProtocolWeights) -> PbtWeights {
    let mut acc: BTreeMap<YoungDiagram, f64> = BTreeMap::new();
    for (a, &va) in v.support.iter().zip(&v.values) {
        for mu in a.add_box() {
            *acc.entry(mu).or_insert(0.0) += va;
        }
    }
    let d = v.support.d();
    let n = v.support.n() + 1;
    let support_plus = DiagramSet::from_diagrams(d, n, acc.keys().cloned()).expect("extensions share d and n + 1");
    let norm = libm::sqrt(acc.values().map(|x| x * x).sum::<f64>());
    let values = support_plus.iter().map(|mu| acc[mu] / norm).collect();
    PbtWeights { base: v.clone(), support_plus, values }
}

/// `1 - F_est(n, d, d)`, an upper bound on the achievable teleportation error.
pub fn pbt_error_bound(n: usize, d: usize) -> Result<f64> {
    let report = optimal_fidelity(n, d, d)?;
    Ok((1.0 - report.fidelity).max(0.0))
}

/// PBT program cost `log2 Σ_{μ ∈ S_Young + □} d_μ^(d) d_μ^(D)` with the
/// teleportation error bound as error proxy.
pub fn pbt_program_cost(n: usize, d: usize, big_d: usize, big_n: usize) -> Result<CostReport> {
    let cost_bits = pbt_cost_bits(n, d, big_d, big_n)?;
    Ok(CostReport {
        strategy: Strategy::Pbt,
        n,
        d,
        big_d,
        big_n,
        cost_bits,
        epsilon_proxy: Some(pbt_error_bound(n, d)?),
    })
}

fn pbt_cost_bits(n: usize, d: usize, big_d: usize, big_n: usize) -> Result<f64> {
    if big_d < d {
        return Err(invalid!("output dimension D = {big_d} is smaller than input dimension d = {d}"));
    }
    let w = w_weights(&build_v(n, d, big_n)?);
    log2_paired_dimension(&w.support_plus, d, big_d)
}

/// Cost of programming a channel `ℂ^d → ℂ^D`: the PBT cost of its
/// Stinespring isometry into `ℂ^{D·d}`.
pub fn cptp_cost_bound(d: usize, big_d: usize, n: usize, big_n: usize) -> Result<CostReport> {
    let cost_bits = pbt_cost_bits(n, d, big_d * d, big_n)?;
    Ok(CostReport {
        strategy: Strategy::Cptp,
        n,
        d,
        big_d,
        big_n,
        cost_bits,
        epsilon_proxy: Some(pbt_error_bound(n, d)?),
    })
}

/// How the queries are turned into a program.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryStrategy {
    /// Estimate the isometry and store the classical description.
    Classical,
    /// Store the queries coherently through port-based teleportation.
    Quantum,
}

impl core::str::FromStr for QueryStrategy {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "classical" => Ok(QueryStrategy::Classical),
            "quantum" => Ok(QueryStrategy::Quantum),
            _ => Err(invalid!("unknown query strategy {s:?} (expected classical or quantum)")),
        }
    }
}

/// Queries needed to reach retrieval error `eps`.
///
/// Classical: `⌈d(D - d)/ε⌉`. Quantum: smallest `n` with
/// `1 - F_est(n, d, d) <= ε`, by doubling then bisection.
pub fn sar_query_complexity(d: usize, big_d: usize, eps: f64, strategy: QueryStrategy) -> Result<usize> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid!("ε = {eps} is outside (0, 1)"));
    }
    if d == 0 || big_d < d {
        return Err(invalid!("need 1 <= d <= D, got d = {d}, D = {big_d}"));
    }
    match strategy {
        QueryStrategy::Classical => {
            if big_d == d {
                return Err(invalid!("the classical isometry count d(D-d)/ε degenerates at D = d"));
            }
            let x = (d * (big_d - d)) as f64 / eps;
            // ε is usually a decimal literal; do not let its binary rounding add a query.
            let nearest = libm::round(x);
            let n = if (x - nearest).abs() <= 1e-9 * x { nearest } else { libm::ceil(x) };
            Ok(n as usize)
        }
        QueryStrategy::Quantum => {
            let ok = |n: usize| -> Result<bool> { Ok(pbt_error_bound(n, d)? <= eps) };
            let mut hi = 1usize;
            while !ok(hi)? {
                hi = hi.checked_mul(2).ok_or_else(|| invalid!("query count overflow for ε = {eps}"))?;
            }
            let mut lo = hi / 2; // fails (or is zero)
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                if ok(mid)? {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            Ok(hi)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::build_v;

    fn yd(rows: &[u32]) -> YoungDiagram {
        YoungDiagram::new(rows.to_vec()).unwrap()
    }

    #[test]
    fn extension_weights() {
        let w = w_weights(&build_v(10, 2, 2).unwrap());
        assert_eq!(w.support_plus.len(), 3);
        assert!((w.weight_of(&yd(&[7, 4])) - libm::sqrt(2.0 / 3.0)).abs() < 1e-15);
        assert!((w.weight_of(&yd(&[6, 5])) - 1.0 / libm::sqrt(6.0)).abs() < 1e-15);
        assert!((w.weight_of(&yd(&[8, 3])) - 1.0 / libm::sqrt(6.0)).abs() < 1e-15);

        let w = w_weights(&build_v(4, 1, 0).unwrap());
        assert_eq!(w.support_plus.diagrams(), &[yd(&[5])]);
        assert_eq!(w.values, alloc::vec![1.0]);
    }

    #[test]
    fn extension_of_a_point_mass() {
        let set = DiagramSet::from_diagrams(2, 2, [yd(&[2, 0])]).unwrap();
        let v = ProtocolWeights {
            params: crate::protocol::partition_params(2, 1, 0).unwrap(),
            support: set,
            values: alloc::vec![1.0],
            g: Vec::new(),
            eps_g: 0.0,
        };
        let w = w_weights(&v);
        assert_eq!(w.support_plus.diagrams(), &[yd(&[3, 0]), yd(&[2, 1])]);
        for x in &w.values {
            assert!((x - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        }
    }

    #[test]
    fn cost_examples() {
        let c = pbt_program_cost(10, 2, 3, 2).unwrap();
        assert!((c.cost_bits - libm::log2(1176.0)).abs() < 1e-12);
        let c = pbt_program_cost(10, 2, 2, 2).unwrap();
        assert!((c.cost_bits - libm::log2(56.0)).abs() < 1e-12);
        // d = 1: single successor (n+1), dimension binomial(n+D, n+1); n = 5, D = 3 gives 28.
        let c = pbt_program_cost(5, 1, 3, 0).unwrap();
        assert!((c.cost_bits - libm::log2(28.0)).abs() < 1e-12);
        assert_eq!(c.epsilon_proxy, Some(0.0));

        let cptp = cptp_cost_bound(2, 2, 10, 2).unwrap();
        let direct = pbt_program_cost(10, 2, 4, 2).unwrap();
        assert_eq!(cptp.cost_bits, direct.cost_bits);
        assert_eq!(cptp.strategy, Strategy::Cptp);
    }

    #[test]
    fn error_bound_examples() {
        let e = pbt_error_bound(2, 2).unwrap();
        assert!((e - (1.0 - (3.0 + libm::sqrt(5.0)) / 8.0)).abs() < 1e-12);
        assert_eq!(pbt_error_bound(7, 1).unwrap(), 0.0);
    }

    #[test]
    fn classical_query_counts() {
        assert_eq!(sar_query_complexity(2, 3, 0.01, QueryStrategy::Classical).unwrap(), 200);
        assert_eq!(sar_query_complexity(1, 5, 0.1, QueryStrategy::Classical).unwrap(), 40);
        assert_eq!(sar_query_complexity(1, 2, 0.1, QueryStrategy::Classical).unwrap(), 10);
        assert_eq!(sar_query_complexity(1, 2, 0.3, QueryStrategy::Classical).unwrap(), 4);
        // 9 / 0.0003 evaluates to 30000.000000000004 in binary floating point.
        assert_eq!(sar_query_complexity(3, 6, 0.0003, QueryStrategy::Classical).unwrap(), 30_000);
        assert!(sar_query_complexity(2, 2, 0.1, QueryStrategy::Classical).is_err());
        assert!(sar_query_complexity(2, 3, 1.5, QueryStrategy::Classical).is_err());
    }

    #[test]
    fn quantum_query_count_is_minimal() {
        let n = sar_query_complexity(2, 3, 0.01, QueryStrategy::Quantum).unwrap();
        assert!(pbt_error_bound(n, 2).unwrap() <= 0.01);
        assert!(pbt_error_bound(n - 1, 2).unwrap() > 0.01);
        assert!((25..=40).contains(&n), "n = {n}");
    }
}
