//! The explicit window protocol: a block of `N^{d-1}` diagrams with strictly
//! decreasing rows, weighted by products of Fejér weights, together with its
//! fidelity bounds and the program cost of storing it.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use crate::error::{invalid, Error, Result};
use crate::estimation::{build_m_est, f_weight, fidelity_of_vector, perron_max, SparseSymMatrix};
use crate::estimation::{DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::young::{log2_dim_unitary, DiagramSet, YoungDiagram};

/// Window parameters: `n - d(d-1)N/2 = d q + r` and the row offsets `A_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtocolParams {
    pub n: usize,
    pub d: usize,
    /// Window width. Ignored (but recorded) when `d = 1`.
    pub big_n: usize,
    pub q: usize,
    pub r: usize,
    /// `A_i = q + (d - i)N + [i <= r]` for `i = 1..d-1`.
    pub a: Vec<usize>,
}

/// Splits `n` into the window offsets for width `N`.
pub fn partition_params(n: usize, d: usize, big_n: usize) -> Result<ProtocolParams> {
    if d == 0 {
        return Err(invalid!("d must be at least 1"));
    }
    if d == 1 {
        return Ok(ProtocolParams { n, d, big_n, q: n, r: 0, a: Vec::new() });
    }
    if big_n < 2 {
        return Err(invalid!("window width N = {big_n} violates N >= 2"));
    }
    // N <= 2/(3(d-1)) (n/d + d - 2), multiplied through by 3d(d-1).
    let lhs = 3 * d * (d - 1) * big_n;
    let rhs = 2 * (n + d * (d - 2));
    if lhs > rhs {
        return Err(invalid!(
            "window width N = {big_n} violates N <= 2/(3(d-1)) (n/d + d - 2) for n = {n}, d = {d}"
        ));
    }
    let shift = d * (d - 1) / 2 * big_n;
    if shift > n {
        return Err(invalid!("q < 0: n = {n} is smaller than d(d-1)N/2 = {shift}"));
    }
    let rest = n - shift;
    let (q, r) = (rest / d, rest % d);
    let a = (1..d).map(|i| q + (d - i) * big_n + usize::from(i <= r)).collect();
    Ok(ProtocolParams { n, d, big_n, q, r, a })
}

/// Fejér weights `g_k = (2/N) sin²(π(2k+1)/(2N))`, `k = 0..N-1`.
pub fn g_weights(big_n: usize) -> Result<Vec<f64>> {
    if big_n < 2 {
        return Err(invalid!("N = {big_n}: the Fejér weights only normalize for N >= 2"));
    }
    let nf = big_n as f64;
    Ok((0..big_n)
        .map(|k| {
            let s = libm::sin(PI * (2 * k + 1) as f64 / (2.0 * nf));
            2.0 / nf * s * s
        })
        .collect())
}

/// Boundary penalty `ε_g = (N-1)/N (1 - cos(π/N))`.
pub fn epsilon_g(big_n: usize) -> Result<f64> {
    if big_n < 2 {
        return Err(invalid!("N = {big_n}: ε_g is only defined for N >= 2"));
    }
    let nf = big_n as f64;
    Ok((nf - 1.0) / nf * (1.0 - libm::cos(PI / nf)))
}

/// Window support and its weights `v_α = ∏_i √g_{α̃_i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolWeights {
    pub params: ProtocolParams,
    pub support: DiagramSet,
    /// Weight of `support[k]`.
    pub values: Vec<f64>,
    /// Empty when `d = 1`.
    pub g: Vec<f64>,
    /// Zero when `d = 1`.
    pub eps_g: f64,
}

impl ProtocolWeights {
    /// Weights spread over a superset of the support (normally all of `Y_{d,n}`).
    pub fn dense_over(&self, set: &DiagramSet) -> Result<Vec<f64>> {
        let mut out = vec![0.0; set.len()];
        for (a, &v) in self.support.iter().zip(&self.values) {
            let k = set
                .position(a)
                .ok_or_else(|| invalid!("support diagram ({a}) is not in the target set"))?;
            out[k] = v;
        }
        Ok(out)
    }

    pub fn weight_of(&self, a: &YoungDiagram) -> f64 {
        self.support.position(a).map_or(0.0, |k| self.values[k])
    }
}

fn support_with_offsets(p: &ProtocolParams) -> Result<(Vec<YoungDiagram>, Vec<Vec<usize>>)> {
    let d = p.d;
    if d == 1 {
        return Ok((vec![YoungDiagram::new(vec![p.n as u32])?], vec![Vec::new()]));
    }
    let mut diagrams = Vec::new();
    let mut offsets = Vec::new();
    let mut tilde = vec![0usize; d - 1];
    loop {
        let mut rows: Vec<u32> = p.a.iter().zip(&tilde).map(|(&a, &t)| (a + t) as u32).collect();
        let used: usize = rows.iter().map(|&x| x as usize).sum();
        let last = p
            .n
            .checked_sub(used)
            .ok_or_else(|| Error::Inconsistent(alloc::format!("window row sum {used} exceeds n = {}", p.n)))?;
        rows.push(last as u32);
        diagrams.push(YoungDiagram::new(rows)?);
        offsets.push(tilde.clone());
        // Odometer over [0, N-1]^{d-1}.
        let mut k = d - 1;
        loop {
            if k == 0 {
                return Ok((diagrams, offsets));
            }
            k -= 1;
            tilde[k] += 1;
            if tilde[k] < p.big_n {
                break;
            }
            tilde[k] = 0;
        }
    }
}

/// The window `S_Young ⊂ Y_{d,n}`.
pub fn build_s_young(n: usize, d: usize, big_n: usize) -> Result<DiagramSet> {
    let p = partition_params(n, d, big_n)?;
    let (diagrams, _) = support_with_offsets(&p)?;
    DiagramSet::from_diagrams(d, n, diagrams)
}

/// Window weights for `(n, d, N)`.
pub fn build_v(n: usize, d: usize, big_n: usize) -> Result<ProtocolWeights> {
    let params = partition_params(n, d, big_n)?;
    let (diagrams, offsets) = support_with_offsets(&params)?;
    let (g, eps_g) = if d == 1 { (Vec::new(), 0.0) } else { (g_weights(big_n)?, epsilon_g(big_n)?) };
    let support = DiagramSet::from_diagrams(d, n, diagrams.iter().cloned())?;
    let mut values = vec![0.0; support.len()];
    for (a, tilde) in diagrams.iter().zip(&offsets) {
        let v: f64 = tilde.iter().map(|&t| libm::sqrt(g[t])).product();
        values[support.position(a).expect("diagram just inserted")] = v;
    }
    Ok(ProtocolWeights { params, support, values, g, eps_g })
}

/// Lower bound on the window protocol's fidelity:
/// `1 - π²(d-1)²/(d²N²) - (D-d)/(n/d - (d-1)N/2 + D - d)`.
pub fn fidelity_lower_bound(n: usize, d: usize, big_d: usize, big_n: usize) -> Result<f64> {
    let p = partition_params(n, d, big_n)?;
    check_output_dim(d, big_d)?;
    let extra = (big_d - d) as f64;
    if d == 1 {
        return Ok(1.0 - extra / (p.q as f64 + 1.0 + extra));
    }
    let (df, nf) = (d as f64, big_n as f64);
    let window = PI * PI * (df - 1.0) * (df - 1.0) / (df * df * nf * nf);
    let denom = n as f64 / df - (df - 1.0) * nf / 2.0 + extra;
    Ok(1.0 - window - extra / denom)
}

/// Converse-type expression
/// `f(q + (d-1)N)² [1 - 2(d-1)²/d² ε_g + (d-1)(d-2)/d² ε_g²]`.
pub fn fidelity_upper_bound_protocol(n: usize, d: usize, big_d: usize, big_n: usize) -> Result<f64> {
    let p = partition_params(n, d, big_n)?;
    check_output_dim(d, big_d)?;
    if d == 1 {
        let f = f_weight(p.q as f64, d, big_d)?;
        return Ok(f * f);
    }
    let f = f_weight((p.q + (d - 1) * big_n) as f64, d, big_d)?;
    let e = epsilon_g(big_n)?;
    let df = d as f64;
    let bracket = 1.0 - 2.0 * (df - 1.0) * (df - 1.0) / (df * df) * e + (df - 1.0) * (df - 2.0) / (df * df) * e * e;
    Ok(f * f * bracket)
}

fn check_output_dim(d: usize, big_d: usize) -> Result<()> {
    if big_d < d {
        return Err(invalid!("output dimension D = {big_d} is smaller than input dimension d = {d}"));
    }
    Ok(())
}

/// `vᵀ M v` for the window weights against an already-built matrix.
pub fn achieved_fidelity_with(m: &SparseSymMatrix, w: &ProtocolWeights) -> Result<f64> {
    fidelity_of_vector(m, &w.dense_over(m.diagram_set())?)
}

/// `vᵀ M_est v` for the window protocol `(n, d, N)` at output dimension `D`.
pub fn achieved_fidelity(n: usize, d: usize, big_d: usize, big_n: usize) -> Result<f64> {
    let w = build_v(n, d, big_n)?;
    let m = build_m_est(n, d, big_d)?;
    achieved_fidelity_with(&m, &w)
}

/// Which storage-and-retrieval strategy a cost refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Estimation,
    Pbt,
    Cptp,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Estimation => "est",
            Strategy::Pbt => "pbt",
            Strategy::Cptp => "cptp",
        })
    }
}

impl core::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "est" | "estimation" => Ok(Strategy::Estimation),
            "pbt" => Ok(Strategy::Pbt),
            "cptp" => Ok(Strategy::Cptp),
            _ => Err(invalid!("unknown strategy {s:?} (expected est, pbt or cptp)")),
        }
    }
}

/// Program cost in bits (log base 2 of the program-space dimension).
#[derive(Debug, Clone, PartialEq)]
pub struct CostReport {
    pub strategy: Strategy,
    pub n: usize,
    pub d: usize,
    pub big_d: usize,
    pub big_n: usize,
    pub cost_bits: f64,
    /// Retrieval error the cost is paired with.
    pub epsilon_proxy: Option<f64>,
}

/// `log2 Σ_k 2^{x_k}` without overflow.
pub fn log2_sum_exp2(xs: impl IntoIterator<Item = f64>) -> f64 {
    let xs: Vec<f64> = xs.into_iter().collect();
    let top = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return top;
    }
    top + libm::log2(xs.iter().map(|x| libm::exp2(x - top)).sum::<f64>())
}

/// `log2 Σ_{α ∈ set} d_α^(d) d_α^(D)`.
pub fn log2_paired_dimension(set: &DiagramSet, d: usize, big_d: usize) -> Result<f64> {
    let terms = set
        .iter()
        .map(|a| Ok(log2_dim_unitary(a, d)? + log2_dim_unitary(a, big_d)?))
        .collect::<Result<Vec<f64>>>()?;
    Ok(log2_sum_exp2(terms))
}

/// Program cost of storing the window-protocol estimate; the error proxy
/// is `1 - vᵀ M_est v`.
pub fn est_program_cost(n: usize, d: usize, big_d: usize, big_n: usize) -> Result<CostReport> {
    check_output_dim(d, big_d)?;
    let w = build_v(n, d, big_n)?;
    let cost_bits = log2_paired_dimension(&w.support, d, big_d)?;
    let m = build_m_est(n, d, big_d)?;
    let achieved = achieved_fidelity_with(&m, &w)?;
    Ok(CostReport {
        strategy: Strategy::Estimation,
        n,
        d,
        big_d,
        big_n,
        cost_bits,
        epsilon_proxy: Some((1.0 - achieved).clamp(0.0, 1.0)),
    })
}

/// Cost exponent `h(t)` for window width `N = Θ(n^t)`.
pub fn h_exponent(t: f64, d: usize, big_d: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(invalid!("t = {t} is outside [0, 1]"));
    }
    check_output_dim(d, big_d)?;
    let (df, dd) = (d as f64, big_d as f64);
    let numer = t * (df * df - 1.0) + df * (dd - df);
    if t <= 0.5 {
        if t == 0.0 {
            return Ok(if numer == 0.0 { 0.0 } else { f64::INFINITY });
        }
        Ok(numer / (2.0 * t))
    } else {
        Ok(numer)
    }
}

/// Rules for choosing the window width `N` as a function of `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Schedule {
    /// `N = ⌊n^t⌋`.
    Power(f64),
    /// `N = ⌊a n^{2/3} + b n^{1/3}⌋` with `a = (2π²(d-1)/(d³(D-d)))^{1/3}`, `b = (d-1)a²/6`.
    Balanced,
    /// The widest admissible window, `N = ⌊2/(3(d-1)) (n/d + d - 2)⌋`.
    Widest,
    /// The same `N` for every `n`.
    Fixed(usize),
}

impl Schedule {
    pub fn width(&self, n: usize, d: usize, big_d: usize) -> Result<usize> {
        let nf = n as f64;
        match *self {
            Schedule::Power(t) => {
                if !(0.0..=1.0).contains(&t) {
                    return Err(invalid!("schedule exponent t = {t} is outside [0, 1]"));
                }
                // Guard against pow() landing just below an exact integer.
                Ok(libm::floor(libm::pow(nf, t) * (1.0 + 1e-12)) as usize)
            }
            Schedule::Balanced => {
                if d < 2 || big_d <= d {
                    return Err(invalid!("the balanced schedule needs d >= 2 and D > d"));
                }
                let (df, dd) = (d as f64, big_d as f64);
                let a = libm::cbrt(2.0 * PI * PI * (df - 1.0) / (df * df * df * (dd - df)));
                let b = (df - 1.0) * a * a / 6.0;
                Ok(libm::floor(a * libm::cbrt(nf * nf) + b * libm::cbrt(nf)) as usize)
            }
            Schedule::Widest => {
                if d < 2 {
                    return Err(invalid!("the widest schedule needs d >= 2"));
                }
                Ok(2 * (n + d * (d - 2)) / (3 * d * (d - 1)))
            }
            Schedule::Fixed(big_n) => Ok(big_n),
        }
    }
}

/// One row of a protocol sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub n: usize,
    pub d: usize,
    pub big_d: usize,
    pub big_n: usize,
    pub lower_bound: f64,
    pub achieved: f64,
    pub optimal: f64,
    pub upper_bound: f64,
    pub cost_bits: f64,
}

/// Evaluates the window protocol and its bounds against the optimum.
pub fn sweep_row(n: usize, d: usize, big_d: usize, big_n: usize) -> Result<SweepRow> {
    let w = build_v(n, d, big_n)?;
    let m = build_m_est(n, d, big_d)?;
    let optimal = perron_max(&m, DEFAULT_TOL, DEFAULT_MAX_ITER)?.eigenvalue;
    Ok(SweepRow {
        n,
        d,
        big_d,
        big_n,
        lower_bound: fidelity_lower_bound(n, d, big_d, big_n)?,
        achieved: achieved_fidelity_with(&m, &w)?,
        optimal,
        upper_bound: fidelity_upper_bound_protocol(n, d, big_d, big_n)?,
        cost_bits: log2_paired_dimension(&w.support, d, big_d)?,
    })
}

/// Window widths accepted by [`partition_params`] for `(n, d)`.
pub fn admissible_widths(n: usize, d: usize) -> Vec<usize> {
    if d < 2 {
        return Vec::new();
    }
    (2..=n.max(2)).filter(|&w| partition_params(n, d, w).is_ok()).collect()
}
