//! The estimation matrix `M_est(n, d, D)` over `Y_{d,n}` and its Perron eigenpair.
//!
//! Entry `(α, β)` collects `f(α_i - i) f(β_j - j) / d²` over every diagram
//! `μ` reachable from both `α` (by a box in row `i`) and `β` (by a box in row
//! `j`). Only valid diagrams `μ` contribute. Writing `B_{α,μ} = f(α_i - i)/d`
//! gives `M = B Bᵀ`, so the matrix is symmetric, nonnegative and positive
//! semidefinite, and power iteration converges to the Perron pair.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::error::{invalid, Error, Result};
use crate::young::{DiagramSet, YoungDiagram};

/// Default relative residual for [`perron_max`].
pub const DEFAULT_TOL: f64 = 1e-12;
/// Default iteration cap for [`perron_max`].
pub const DEFAULT_MAX_ITER: usize = 1_000_000;

/// `f(x) = √((x + d + 1)/(x + D + 1))`.
pub fn f_weight(x: f64, d: usize, big_d: usize) -> Result<f64> {
    check_dims(d, big_d)?;
    if x < -(d as f64) {
        return Err(invalid!("f_weight argument {x} is below -d = -{d}"));
    }
    Ok(libm::sqrt((x + d as f64 + 1.0) / (x + big_d as f64 + 1.0)))
}

fn check_dims(d: usize, big_d: usize) -> Result<()> {
    if d == 0 {
        return Err(invalid!("input dimension d must be at least 1"));
    }
    if big_d < d {
        return Err(invalid!("output dimension D = {big_d} is smaller than input dimension d = {d}"));
    }
    Ok(())
}

/// Symmetric nonnegative sparse matrix indexed by a [`DiagramSet`].
#[derive(Debug, Clone)]
pub struct SparseSymMatrix {
    size: usize,
    big_d: usize,
    /// Upper-triangle entries `(row, col, value)` with `row <= col`, row-major.
    entries: Vec<(usize, usize, f64)>,
    diagram_set: DiagramSet,
    // Full (both triangles) compressed rows for matrix-vector products.
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseSymMatrix {
    /// Assembles a matrix from upper-triangle entries; duplicate positions are rejected.
    pub fn from_upper(diagram_set: DiagramSet, big_d: usize, mut entries: Vec<(usize, usize, f64)>) -> Result<Self> {
        let size = diagram_set.len();
        entries.sort_by_key(|e| (e.0, e.1));
        for w in entries.windows(2) {
            if (w[0].0, w[0].1) == (w[1].0, w[1].1) {
                return Err(invalid!("duplicate matrix entry at ({}, {})", w[0].0, w[0].1));
            }
        }
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); size];
        for &(i, j, v) in &entries {
            if i > j || j >= size {
                return Err(invalid!("entry ({i}, {j}) outside the upper triangle of a {size}x{size} matrix"));
            }
            if !(v >= 0.0) {
                return Err(invalid!("entry ({i}, {j}) = {v} is negative"));
            }
            rows[i].push((j, v));
            if i != j {
                rows[j].push((i, v));
            }
        }
        let mut row_ptr = Vec::with_capacity(size + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for mut r in rows {
            r.sort_by_key(|&(j, _)| j);
            for (j, v) in r {
                col_idx.push(j);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        Ok(Self { size, big_d, entries, diagram_set, row_ptr, col_idx, values })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn diagram_set(&self) -> &DiagramSet {
        &self.diagram_set
    }

    /// Output dimension `D` the matrix was built for.
    pub fn output_dim(&self) -> usize {
        self.big_d
    }

    /// Entry `(i, j)`, zero when not stored.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
        match self.col_idx[lo..hi].binary_search(&j) {
            Ok(k) => self.values[lo + k],
            Err(_) => 0.0,
        }
    }

    /// `y = M x`.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.size {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            y[i] = acc;
        }
    }

    /// Row sums of the full symmetric matrix.
    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.size)
            .map(|i| self.values[self.row_ptr[i]..self.row_ptr[i + 1]].iter().sum())
            .collect()
    }

    /// Largest row sum, an upper bound on the Perron eigenvalue.
    pub fn max_row_sum(&self) -> f64 {
        self.row_sums().into_iter().fold(0.0, f64::max)
    }

    /// Connected components of the sparsity graph, each sorted ascending.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut label = vec![usize::MAX; self.size];
        let mut comps = Vec::new();
        for start in 0..self.size {
            if label[start] != usize::MAX {
                continue;
            }
            let id = comps.len();
            let mut stack = vec![start];
            let mut members = Vec::new();
            label[start] = id;
            while let Some(i) = stack.pop() {
                members.push(i);
                for &j in &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]] {
                    if label[j] == usize::MAX {
                        label[j] = id;
                        stack.push(j);
                    }
                }
            }
            members.sort_unstable();
            comps.push(members);
        }
        comps
    }

    /// Text dump: header `n d D size`, then one `i j value` line per stored
    /// upper-triangle entry with 17 significant digits.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} {} {} {}", self.diagram_set.n(), self.diagram_set.d(), self.big_d, self.size);
        for &(i, j, v) in &self.entries {
            let _ = writeln!(s, "{i} {j} {v:.16e}");
        }
        s
    }
}

/// Builds `M_est(n, d, D)` over the full set `Y_{d,n}`.
pub fn build_m_est(n: usize, d: usize, big_d: usize) -> Result<SparseSymMatrix> {
    check_dims(d, big_d)?;
    if n == 0 {
        return Err(invalid!("at least one query is required (n >= 1)"));
    }
    let set = DiagramSet::enumerate(d, n)?;
    let inv_d = 1.0 / d as f64;
    // For every reachable μ, the diagrams α it extends and the weight f(α_i - i)/d.
    let mut parents: BTreeMap<YoungDiagram, Vec<(usize, f64)>> = BTreeMap::new();
    for (ia, a) in set.iter().enumerate() {
        for i in a.addable_rows() {
            let w = f_weight(a.content_shift(i + 1) as f64, d, big_d)? * inv_d;
            let mut mu = a.rows().to_vec();
            mu[i] += 1;
            parents.entry(YoungDiagram::new(mu)?).or_default().push((ia, w));
        }
    }
    let mut acc: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for list in parents.values() {
        for &(a, wa) in list {
            for &(b, wb) in list {
                if a <= b {
                    *acc.entry((a, b)).or_insert(0.0) += wa * wb;
                }
            }
        }
    }
    let entries = acc.into_iter().map(|((i, j), v)| (i, j, v)).collect();
    SparseSymMatrix::from_upper(set, big_d, entries)
}

/// Converged dominant eigenpair.
#[derive(Debug, Clone, PartialEq)]
pub struct PerronPair {
    pub eigenvalue: f64,
    /// Nonnegative, unit Euclidean norm, indexed like the matrix.
    pub eigenvector: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

/// Perron eigenpair by power iteration from a uniform positive start vector,
/// run separately on each connected component; the largest component value wins.
pub fn perron_max(m: &SparseSymMatrix, tol: f64, max_iter: usize) -> Result<PerronPair> {
    if m.size() == 0 {
        return Err(invalid!("empty matrix"));
    }
    let mut best: Option<PerronPair> = None;
    for comp in m.components() {
        let pair = power_iterate(m, &comp, tol, max_iter)?;
        if best.as_ref().is_none_or(|b| pair.eigenvalue > b.eigenvalue) {
            best = Some(pair);
        }
    }
    Ok(best.expect("at least one component"))
}

fn power_iterate(m: &SparseSymMatrix, comp: &[usize], tol: f64, max_iter: usize) -> Result<PerronPair> {
    let k = comp.len();
    let mut local = vec![usize::MAX; m.size()];
    for (p, &i) in comp.iter().enumerate() {
        local[i] = p;
    }
    // Restrict the compressed rows to the component.
    let mut ptr = Vec::with_capacity(k + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    ptr.push(0);
    for &i in comp {
        for q in m.row_ptr[i]..m.row_ptr[i + 1] {
            cols.push(local[m.col_idx[q]]);
            vals.push(m.values[q]);
        }
        ptr.push(cols.len());
    }
    let mut v = vec![1.0 / libm::sqrt(k as f64); k];
    let mut w = vec![0.0; k];
    let mut residual = f64::INFINITY;
    for it in 1..=max_iter {
        for i in 0..k {
            let mut acc = 0.0;
            for q in ptr[i]..ptr[i + 1] {
                acc += vals[q] * v[cols[q]];
            }
            w[i] = acc;
        }
        let lambda: f64 = v.iter().zip(&w).map(|(a, b)| a * b).sum();
        if !(lambda > 0.0) {
            return Err(Error::Inconsistent(alloc::format!("non-positive Rayleigh quotient {lambda}")));
        }
        residual = v.iter().zip(&w).map(|(a, b)| (b - lambda * a).abs()).fold(0.0, f64::max) / lambda;
        if residual <= tol {
            let mut full = vec![0.0; m.size()];
            for (p, &i) in comp.iter().enumerate() {
                full[i] = v[p];
            }
            return Ok(PerronPair { eigenvalue: lambda, eigenvector: full, iterations: it, residual });
        }
        let norm = libm::sqrt(w.iter().map(|x| x * x).sum::<f64>());
        for (a, b) in v.iter_mut().zip(&w) {
            *a = b / norm;
        }
    }
    Err(Error::NoConvergence { iterations: max_iter, residual })
}

/// Optimal fidelity together with the solver diagnostics and upper bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct FidelityReport {
    pub n: usize,
    pub d: usize,
    pub big_d: usize,
    pub fidelity: f64,
    pub eigvector: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
    pub rowsum_bound: f64,
    pub jensen_bound: f64,
}

/// Perron eigenvalue of `M_est(n, d, D)`, with the row-sum and Jensen bounds.
pub fn optimal_fidelity(n: usize, d: usize, big_d: usize) -> Result<FidelityReport> {
    let m = build_m_est(n, d, big_d)?;
    let pair = perron_max(&m, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
    Ok(FidelityReport {
        n,
        d,
        big_d,
        fidelity: pair.eigenvalue,
        eigvector: pair.eigenvector,
        iterations: pair.iterations,
        residual: pair.residual,
        rowsum_bound: m.max_row_sum(),
        jensen_bound: upper_bound_rowsum(n, d, big_d)?,
    })
}

/// Quadratic form `vᵀ M v`.
pub fn fidelity_of_vector(m: &SparseSymMatrix, v: &[f64]) -> Result<f64> {
    if v.len() != m.size() {
        return Err(Error::DimensionMismatch { expected: m.size(), found: v.len() });
    }
    let mut w = vec![0.0; m.size()];
    m.matvec(v, &mut w);
    Ok(v.iter().zip(&w).map(|(a, b)| a * b).sum())
}

/// Jensen-type upper bound `f(n/d - (d+1)/2)²` on the optimal fidelity.
pub fn upper_bound_rowsum(n: usize, d: usize, big_d: usize) -> Result<f64> {
    check_dims(d, big_d)?;
    let x = n as f64 / d as f64 - (d as f64 + 1.0) / 2.0;
    Ok((x + d as f64 + 1.0) / (x + big_d as f64 + 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f_examples() {
        assert!((f_weight(0.0, 2, 3).unwrap() - libm::sqrt(0.75)).abs() < 1e-15);
        assert_eq!(f_weight(7.0, 3, 3).unwrap(), 1.0);
        assert!((f_weight(-2.0, 2, 3).unwrap() - libm::sqrt(0.5)).abs() < 1e-15);
        assert!(f_weight(0.0, 3, 2).is_err());
        assert!(f_weight(-3.5, 3, 4).is_err());
    }

    #[test]
    fn small_matrices() {
        let m = build_m_est(1, 2, 3).unwrap();
        assert_eq!(m.size(), 1);
        assert!((m.get(0, 0) - 5.0 / 16.0).abs() < 1e-15);

        let m = build_m_est(2, 2, 2).unwrap();
        assert!((m.get(0, 0) - 0.5).abs() < 1e-15);
        assert!((m.get(0, 1) - 0.25).abs() < 1e-15);
        assert!((m.get(1, 0) - 0.25).abs() < 1e-15);
        assert!((m.get(1, 1) - 0.25).abs() < 1e-15);

        for n in [1usize, 5, 17] {
            let m = build_m_est(n, 1, 4).unwrap();
            let expect = (n as f64 + 1.0) / (n as f64 + 4.0);
            assert!((m.get(0, 0) - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(build_m_est(0, 2, 3).is_err());
        assert!(build_m_est(3, 3, 2).is_err());
    }

    #[test]
    fn two_by_two_eigenpair() {
        let m = build_m_est(2, 2, 2).unwrap();
        let p = perron_max(&m, 1e-12, 1000).unwrap();
        let exact = (3.0 + libm::sqrt(5.0)) / 8.0;
        assert!((p.eigenvalue - exact).abs() < 1e-12);
        // Closed-form eigenvector of [[1/2,1/4],[1/4,1/4]]: (1, λ·4 - 2).
        let (x, y) = (1.0, 4.0 * exact - 2.0);
        let nrm = libm::sqrt(x * x + y * y);
        assert!((p.eigenvector[0] - x / nrm).abs() < 1e-6);
        assert!((p.eigenvector[1] - y / nrm).abs() < 1e-6);
        assert!((p.eigenvector[0] - 0.851).abs() < 1e-3);
        assert!((p.eigenvector[1] - 0.526).abs() < 1e-3);
    }

    #[test]
    fn non_convergence_is_reported() {
        let m = build_m_est(40, 2, 2).unwrap();
        match perron_max(&m, 1e-12, 3) {
            Err(Error::NoConvergence { iterations: 3, residual }) => assert!(residual > 0.0),
            other => panic!("expected a convergence failure, got {other:?}"),
        }
    }

    #[test]
    fn disconnected_components_take_the_max() {
        let set = DiagramSet::enumerate(3, 2).unwrap();
        let m = SparseSymMatrix::from_upper(set, 3, alloc::vec![(0, 0, 0.25), (1, 1, 0.75)]).unwrap();
        assert_eq!(m.components().len(), 2);
        let p = perron_max(&m, 1e-12, 100).unwrap();
        assert_eq!(p.eigenvalue, 0.75);
        assert_eq!(p.eigenvector, alloc::vec![0.0, 1.0]);
    }

    #[test]
    fn dump_format() {
        let m = build_m_est(2, 2, 2).unwrap();
        let text = m.dump();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("2 2 2 2"));
        assert_eq!(lines.next(), Some("0 0 5.0000000000000000e-1"));
        assert_eq!(lines.next(), Some("0 1 2.5000000000000000e-1"));
        assert_eq!(lines.next(), Some("1 1 2.5000000000000000e-1"));
        assert_eq!(lines.next(), None);
    }

    #[test]
    fn jensen_examples() {
        assert!((upper_bound_rowsum(10, 2, 3).unwrap() - 13.0 / 15.0).abs() < 1e-15);
        assert_eq!(upper_bound_rowsum(33, 3, 3).unwrap(), 1.0);
        assert!((upper_bound_rowsum(10, 1, 2).unwrap() - 11.0 / 12.0).abs() < 1e-15);
    }
}
