//! Brute-force checks in the full tensor space for small `n`.
//!
//! Permutation operators and character projectors give the Schur–Weyl
//! blocks of `(ℂ^d)^{⊗n}`; Young symmetrizers give an explicit irreducible
//! copy inside each block. From these the covariant resource state and the
//! covariant POVM are assembled, and the estimation fidelity is integrated
//! by Monte Carlo over independent Haar pairs `(V, V̂)`.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{Complex, DMatrix, DVector};
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};
use crate::young::{count_stab, dim_unitary, standard_tableaux, DiagramSet, YoungDiagram};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

/// Largest `n` for which character projectors and Schur bases are built.
pub const PROJECTOR_MAX_N: usize = 3;
/// Default largest `n` for Monte-Carlo integration.
pub const MC_MAX_N: usize = 2;
/// Largest number of amplitudes `d^n D^n` the Monte-Carlo oracle accepts.
pub const MC_MAX_AMPLITUDES: usize = 10_000;
/// Fixed number of random substreams a Monte-Carlo run is split into.
pub const MC_WORKERS: usize = 16;

const RANK_TOL: f64 = 1e-10;

fn c(re: f64) -> C64 {
    Complex::new(re, 0.0)
}

fn abs_c(z: C64) -> f64 {
    libm::sqrt(z.norm_sqr())
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| abs_c(*z)).fold(0.0, f64::max)
}

/// State vector on a product of factors, first factor most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseState {
    pub dims: Vec<usize>,
    pub amplitudes: DVector<C64>,
}

impl DenseState {
    pub fn norm(&self) -> f64 {
        libm::sqrt(self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>())
    }
}

/// Linear map between tensor-product spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    pub in_dims: Vec<usize>,
    pub out_dims: Vec<usize>,
    pub matrix: CMatrix,
}

impl DenseOperator {
    pub fn new(in_dims: Vec<usize>, out_dims: Vec<usize>, matrix: CMatrix) -> Result<Self> {
        let (rows, cols) = (out_dims.iter().product::<usize>(), in_dims.iter().product::<usize>());
        if matrix.nrows() != rows {
            return Err(Error::DimensionMismatch { expected: rows, found: matrix.nrows() });
        }
        if matrix.ncols() != cols {
            return Err(Error::DimensionMismatch { expected: cols, found: matrix.ncols() });
        }
        Ok(Self { in_dims, out_dims, matrix })
    }

    fn single(d_in: usize, d_out: usize, matrix: CMatrix) -> Self {
        Self { in_dims: vec![d_in], out_dims: vec![d_out], matrix }
    }

    /// `‖V†V - 1‖_max`.
    pub fn isometry_defect(&self) -> f64 {
        let g = self.matrix.adjoint() * &self.matrix;
        max_abs(&(g - CMatrix::identity(self.matrix.ncols(), self.matrix.ncols())))
    }

    /// `‖P² - P‖_max`.
    pub fn projector_defect(&self) -> f64 {
        max_abs(&(&self.matrix * &self.matrix - &self.matrix))
    }

    /// `V^{⊗k}`.
    pub fn tensor_power(&self, k: usize) -> DenseOperator {
        let mut m = CMatrix::identity(1, 1);
        let mut in_dims = Vec::new();
        let mut out_dims = Vec::new();
        for _ in 0..k {
            m = m.kronecker(&self.matrix);
            in_dims.extend_from_slice(&self.in_dims);
            out_dims.extend_from_slice(&self.out_dims);
        }
        DenseOperator { in_dims, out_dims, matrix: m }
    }
}

/// Haar-random isometry `ℂ^d → ℂ^D`: QR of a complex Gaussian matrix with the
/// diagonal of the triangular factor made positive.
pub fn haar_isometry<R: Rng + ?Sized>(d: usize, big_d: usize, rng: &mut R) -> Result<DenseOperator> {
    if d == 0 || big_d < d {
        return Err(invalid!("need 1 <= d <= D, got d = {d}, D = {big_d}"));
    }
    let scale = core::f64::consts::FRAC_1_SQRT_2;
    let z = CMatrix::from_fn(big_d, d, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex::new(re * scale, im * scale)
    });
    let qr = z.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for k in 0..d {
        let rk = r[(k, k)];
        let phase = rk / c(abs_c(rk));
        for i in 0..big_d {
            q[(i, k)] *= phase;
        }
    }
    Ok(DenseOperator::single(d, big_d, q))
}

/// `F_ch(V, W) = |Tr(V†W)|² / d²`.
pub fn channel_fidelity(v: &DenseOperator, w: &DenseOperator) -> Result<f64> {
    if v.matrix.shape() != w.matrix.shape() {
        return Err(invalid!("shape mismatch: {:?} vs {:?}", v.matrix.shape(), w.matrix.shape()));
    }
    Ok(trace_fidelity(&v.matrix, &w.matrix))
}

fn trace_fidelity(v: &CMatrix, w: &CMatrix) -> f64 {
    let d = v.ncols() as f64;
    let mut tr = c(0.0);
    for (a, b) in v.iter().zip(w.iter()) {
        tr += a.conj() * b;
    }
    tr.norm_sqr() / (d * d)
}

/// Permutations of `0..n` in lexicographic order; `σ[j]` is the image of `j`.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    loop {
        out.push(cur.clone());
        // Next permutation in lexicographic order.
        let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) else {
            return out;
        };
        let j = (i..n).rev().find(|&j| cur[j] > cur[i - 1]).expect("pivot exists");
        cur.swap(i - 1, j);
        cur[i..].reverse();
    }
}

/// `(σ ∘ τ)(j) = σ(τ(j))`.
pub fn compose(sigma: &[usize], tau: &[usize]) -> Vec<usize> {
    tau.iter().map(|&t| sigma[t]).collect()
}

/// Cycle lengths in decreasing order.
pub fn cycle_type(sigma: &[usize]) -> Vec<usize> {
    let mut seen = vec![false; sigma.len()];
    let mut out = Vec::new();
    for s in 0..sigma.len() {
        if seen[s] {
            continue;
        }
        let (mut len, mut j) = (0, s);
        while !seen[j] {
            seen[j] = true;
            j = sigma[j];
            len += 1;
        }
        out.push(len);
    }
    out.sort_unstable_by(|a, b| b.cmp(a));
    out
}

pub fn sign(sigma: &[usize]) -> i64 {
    let transpositions: usize = cycle_type(sigma).iter().map(|l| l - 1).sum();
    if transpositions % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Irreducible character `χ_α` of the symmetric group at a cycle type
/// (Murnaghan–Nakayama rule on the bead configuration of `α`).
pub fn sn_character(a: &YoungDiagram, cycles: &[usize]) -> i64 {
    let len = a.d();
    let beads: Vec<usize> = a.rows().iter().enumerate().map(|(i, &r)| r as usize + len - 1 - i).collect();
    mn_rec(&beads, cycles)
}

fn mn_rec(beads: &[usize], cycles: &[usize]) -> i64 {
    let Some((&k, rest)) = cycles.split_first() else {
        return 1;
    };
    let mut total = 0;
    for (idx, &b) in beads.iter().enumerate() {
        if b < k || beads.contains(&(b - k)) {
            continue;
        }
        let between = beads.iter().filter(|&&x| x > b - k && x < b).count();
        let mut next = beads.to_vec();
        next[idx] = b - k;
        let s = if between % 2 == 0 { 1 } else { -1 };
        total += s * mn_rec(&next, rest);
    }
    total
}

fn digits(mut index: usize, d: usize, n: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    for k in (0..n).rev() {
        out[k] = index % d;
        index /= d;
    }
    out
}

fn undigits(ds: &[usize], d: usize) -> usize {
    ds.iter().fold(0, |acc, &x| acc * d + x)
}

/// `P_σ |i_1 ⋯ i_n⟩ = |i_{σ⁻¹(1)} ⋯ i_{σ⁻¹(n)}⟩` on `(ℂ^d)^{⊗n}`.
pub fn permutation_op(sigma: &[usize], d: usize) -> Result<DenseOperator> {
    let n = sigma.len();
    let mut seen = vec![false; n];
    for &s in sigma {
        if s >= n || seen[s] {
            return Err(invalid!("{sigma:?} is not a permutation"));
        }
        seen[s] = true;
    }
    let dim = d.pow(n as u32);
    let mut m = CMatrix::zeros(dim, dim);
    for col in 0..dim {
        let i = digits(col, d, n);
        let mut o = vec![0; n];
        for j in 0..n {
            o[sigma[j]] = i[j];
        }
        m[(undigits(&o, d), col)] = c(1.0);
    }
    Ok(DenseOperator { in_dims: vec![d; n], out_dims: vec![d; n], matrix: m })
}

/// Projector `P_α = (m_α/n!) Σ_σ χ_α(σ) P_σ` onto the `α`-isotypic block.
pub fn isotypic_projector(a: &YoungDiagram, d: usize, n: usize) -> Result<DenseOperator> {
    if n > PROJECTOR_MAX_N {
        return Err(Error::BudgetExceeded(alloc::format!("n = {n} exceeds the projector limit {PROJECTOR_MAX_N}")));
    }
    if a.n() != n || a.height() > d {
        return Err(invalid!("diagram ({a}) is not in Y_(d={d}, n={n})"));
    }
    let perms = permutations(n);
    let m_a = count_stab(a).to_f64().expect("small");
    let scale = m_a / perms.len() as f64;
    let dim = d.pow(n as u32);
    let mut acc = CMatrix::zeros(dim, dim);
    for s in &perms {
        let chi = sn_character(a, &cycle_type(s));
        if chi != 0 {
            acc += permutation_op(s, d)?.matrix * c(chi as f64 * scale);
        }
    }
    Ok(DenseOperator { in_dims: vec![d; n], out_dims: vec![d; n], matrix: acc })
}

/// Orthonormal basis of the span of `vectors` (modified Gram–Schmidt).
fn orthonormal_span(vectors: impl IntoIterator<Item = DVector<C64>>, dim: usize) -> CMatrix {
    let mut basis: Vec<DVector<C64>> = Vec::new();
    for mut v in vectors {
        for b in &basis {
            let proj = b.dotc(&v);
            v -= b * proj;
        }
        // Re-orthogonalize once for numerical safety.
        for b in &basis {
            let proj = b.dotc(&v);
            v -= b * proj;
        }
        let nrm = libm::sqrt(v.iter().map(|z| z.norm_sqr()).sum::<f64>());
        if nrm > RANK_TOL {
            basis.push(v / c(nrm));
        }
    }
    CMatrix::from_fn(dim, basis.len(), |i, j| basis[j][i])
}

/// One Schur–Weyl block of `(ℂ^d)^{⊗n}`.
#[derive(Debug, Clone)]
pub struct SchurBlock {
    pub diagram: YoungDiagram,
    pub dim_unitary: usize,
    pub multiplicity: usize,
    /// One orthonormal basis (as columns) per standard tableau: the image of
    /// that tableau's Young symmetrizer, an irreducible `U(d)` copy.
    pub copies: Vec<CMatrix>,
    /// Orthonormal basis of the whole block.
    pub basis: CMatrix,
}

/// Block bases for all diagrams of `Y_{d,n}`, in canonical diagram order.
#[derive(Debug, Clone)]
pub struct SchurBasis {
    pub d: usize,
    pub n: usize,
    pub blocks: Vec<SchurBlock>,
}

impl SchurBasis {
    pub fn block(&self, a: &YoungDiagram) -> Option<&SchurBlock> {
        self.blocks.iter().find(|b| &b.diagram == a)
    }

    /// `‖Σ_α B_α B_α† - 1‖_max`.
    pub fn completeness_residual(&self) -> f64 {
        let dim = self.d.pow(self.n as u32);
        let mut acc = CMatrix::zeros(dim, dim);
        for b in &self.blocks {
            acc += &b.basis * b.basis.adjoint();
        }
        max_abs(&(acc - CMatrix::identity(dim, dim)))
    }

    /// Largest overlap between bases of different blocks, or deviation of a
    /// block's Gram matrix from the identity.
    pub fn orthogonality_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.blocks.iter().enumerate() {
            for (j, b) in self.blocks.iter().enumerate() {
                let g = a.basis.adjoint() * &b.basis;
                let target = if i == j { CMatrix::identity(g.nrows(), g.ncols()) } else { CMatrix::zeros(g.nrows(), g.ncols()) };
                worst = worst.max(max_abs(&(g - target)));
            }
        }
        worst
    }
}

/// Young symmetrizer `(Σ_{row} P_p)(Σ_{col} sgn(q) P_q)` of a standard tableau
/// given by its row word.
fn young_symmetrizer(word: &[usize], d: usize) -> Result<CMatrix> {
    let n = word.len();
    let mut col_of = vec![0usize; n];
    let mut filled = vec![0usize; n];
    for (k, &r) in word.iter().enumerate() {
        col_of[k] = filled[r];
        filled[r] += 1;
    }
    let dim = d.pow(n as u32);
    let mut rows_sum = CMatrix::zeros(dim, dim);
    let mut cols_sum = CMatrix::zeros(dim, dim);
    for s in permutations(n) {
        if (0..n).all(|k| word[s[k]] == word[k]) {
            rows_sum += permutation_op(&s, d)?.matrix;
        }
        if (0..n).all(|k| col_of[s[k]] == col_of[k]) {
            cols_sum += permutation_op(&s, d)?.matrix * c(sign(&s) as f64);
        }
    }
    Ok(rows_sum * cols_sum)
}

/// Schur–Weyl block bases of `(ℂ^d)^{⊗n}` from Young symmetrizers.
pub fn schur_block_basis(d: usize, n: usize) -> Result<SchurBasis> {
    if n > PROJECTOR_MAX_N {
        return Err(Error::BudgetExceeded(alloc::format!("n = {n} exceeds the Schur-basis limit {PROJECTOR_MAX_N}")));
    }
    let dim = d.pow(n as u32);
    let mut blocks = Vec::new();
    for a in DiagramSet::enumerate(d, n)?.iter() {
        let du = dim_unitary(a, d)?.to_usize().expect("small");
        let m = count_stab(a).to_usize().expect("small");
        let mut copies = Vec::new();
        for word in standard_tableaux(a) {
            let e = young_symmetrizer(&word, d)?;
            let copy = orthonormal_span(e.column_iter().map(|col| col.into_owned()), dim);
            if copy.ncols() != du {
                return Err(Error::Inconsistent(alloc::format!(
                    "Young symmetrizer image for ({a}) has rank {}, expected {du}",
                    copy.ncols()
                )));
            }
            copies.push(copy);
        }
        let basis = orthonormal_span(copies.iter().flat_map(|q| q.column_iter().map(|col| col.into_owned())), dim);
        if basis.ncols() != du * m {
            return Err(Error::Inconsistent(alloc::format!(
                "block for ({a}) has rank {}, expected {}",
                basis.ncols(),
                du * m
            )));
        }
        blocks.push(SchurBlock { diagram: a.clone(), dim_unitary: du, multiplicity: m, copies, basis });
    }
    Ok(SchurBasis { d, n, blocks })
}

/// Which irreducible copies pair up in `|S_α⟩⟩ = Σ_s |α,s⟩_in ⊗ |α,s⟩_out`.
/// Index `k` selects the copy of the `k`-th standard tableau, falling back to
/// the first copy for diagrams with fewer tableaux.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ArbChoice {
    pub input_copy: usize,
    pub output_copy: usize,
}

/// `Σ_s b_s^(in) b_s^(out)ᵀ` as a `d^n × d^n` matrix (rows: reference
/// system, columns: the system the isometry acts on).
fn pairing_matrix(block: &SchurBlock, arb: ArbChoice) -> CMatrix {
    let pick = |k: usize| &block.copies[if k < block.copies.len() { k } else { 0 }];
    pick(arb.input_copy) * pick(arb.output_copy).transpose()
}

fn check_weight_vector(v: &[f64], len: usize) -> Result<()> {
    if v.len() != len {
        return Err(Error::DimensionMismatch { expected: len, found: v.len() });
    }
    if v.iter().any(|&x| x < 0.0) {
        return Err(invalid!("weights must be nonnegative"));
    }
    let norm = libm::sqrt(v.iter().map(|x| x * x).sum::<f64>());
    if (norm - 1.0).abs() > 1e-10 {
        return Err(invalid!("weights have norm {norm}, expected 1"));
    }
    Ok(())
}

fn phi_matrix(v: &[f64], basis: &SchurBasis, arb: ArbChoice) -> Result<CMatrix> {
    check_weight_vector(v, basis.blocks.len())?;
    let dim = basis.d.pow(basis.n as u32);
    let mut phi = CMatrix::zeros(dim, dim);
    for (block, &va) in basis.blocks.iter().zip(v) {
        if va != 0.0 {
            phi += pairing_matrix(block, arb) * c(va / libm::sqrt(block.dim_unitary as f64));
        }
    }
    Ok(phi)
}

fn flatten_rows(m: &CMatrix) -> DVector<C64> {
    DVector::from_fn(m.nrows() * m.ncols(), |k, _| m[(k / m.ncols(), k % m.ncols())])
}

/// Resource state `⊕_α v_α/√d_α |S_α⟩⟩` on `(ℂ^d)^{⊗n} ⊗ (ℂ^d)^{⊗n}`,
/// with `v` indexed like `Y_{d,n}`.
pub fn build_phi_est(v: &[f64], basis: &SchurBasis, arb: ArbChoice) -> Result<DenseState> {
    let phi = phi_matrix(v, basis, arb)?;
    Ok(DenseState { dims: vec![basis.d; 2 * basis.n], amplitudes: flatten_rows(&phi) })
}

/// Monte-Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Monte-Carlo run settings.
#[derive(Debug, Clone)]
pub struct McConfig {
    pub samples: usize,
    pub seed: u64,
    /// Largest accepted `n`.
    pub max_n: usize,
    pub arb: ArbChoice,
    /// Freeze the true isometry instead of drawing it from Haar measure.
    pub fixed_v: Option<DenseOperator>,
}

impl McConfig {
    pub fn new(samples: usize, seed: u64) -> Self {
        Self { samples, seed, max_n: MC_MAX_N, arb: ArbChoice::default(), fixed_v: None }
    }
}

/// Streaming mean and variance (Welford), mergeable in a fixed order.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunningStats {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl RunningStats {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&self, other: &RunningStats) -> RunningStats {
        if other.count == 0 {
            return *self;
        }
        if self.count == 0 {
            return *other;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * other.count as f64 / count as f64;
        let m2 = self.m2 + other.m2 + delta * delta * (self.count as f64 * other.count as f64) / count as f64;
        RunningStats { count, mean, m2 }
    }
}

/// Precomputed Monte-Carlo integrand for one instance.
///
/// For isometries `V` (truth) and `V̂` (guess) the integrand is
/// `|⟨η_V̂|φ_V⟩|² F_ch(V̂, V)` with `|φ_V⟩ = (1 ⊗ V^{⊗n})|φ_est⟩` and
/// `|η_V̂⟩ = Σ_α √(d_α^(D)) (1 ⊗ V̂^{⊗n})|S_α⟩⟩`, so that `|η_V̂⟩⟨η_V̂|`
/// integrates to the identity on the relevant subspace.
#[derive(Debug, Clone)]
pub struct McProblem {
    n: usize,
    d: usize,
    big_d: usize,
    samples: usize,
    seed: u64,
    phi: CMatrix,
    eta: CMatrix,
    fixed_v: Option<CMatrix>,
}

impl McProblem {
    pub fn new(v: &[f64], n: usize, d: usize, big_d: usize, config: &McConfig) -> Result<Self> {
        if d == 0 || big_d < d || n == 0 {
            return Err(invalid!("need n >= 1 and 1 <= d <= D, got n = {n}, d = {d}, D = {big_d}"));
        }
        if n > config.max_n.min(PROJECTOR_MAX_N) {
            return Err(Error::BudgetExceeded(alloc::format!("n = {n} exceeds the Monte-Carlo limit {}", config.max_n)));
        }
        let amplitudes = d.pow(n as u32).saturating_mul(big_d.pow(n as u32));
        if amplitudes > MC_MAX_AMPLITUDES {
            return Err(Error::BudgetExceeded(alloc::format!(
                "d^n D^n = {amplitudes} exceeds the Monte-Carlo limit {MC_MAX_AMPLITUDES}"
            )));
        }
        if config.samples < 100 {
            return Err(invalid!("at least 100 samples are required, got {}", config.samples));
        }
        let basis = schur_block_basis(d, n)?;
        let phi = phi_matrix(v, &basis, config.arb)?;
        let dim = d.pow(n as u32);
        let mut eta = CMatrix::zeros(dim, dim);
        for block in &basis.blocks {
            let d_out = dim_unitary(&block.diagram, big_d)?.to_f64().expect("small");
            eta += pairing_matrix(block, config.arb) * c(libm::sqrt(d_out));
        }
        let fixed_v = match &config.fixed_v {
            Some(op) => {
                if op.matrix.shape() != (big_d, d) {
                    return Err(invalid!("fixed isometry has shape {:?}, expected ({big_d}, {d})", op.matrix.shape()));
                }
                if op.isometry_defect() > 1e-10 {
                    return Err(invalid!("fixed operator is not an isometry"));
                }
                Some(op.matrix.clone())
            }
            None => None,
        };
        Ok(Self { n, d, big_d, samples: config.samples, seed: config.seed, phi, eta, fixed_v })
    }

    /// Number of samples worker `w` draws.
    pub fn worker_samples(&self, w: usize) -> usize {
        self.samples / MC_WORKERS + usize::from(w < self.samples % MC_WORKERS)
    }

    /// Runs substream `w` (of [`MC_WORKERS`]) of the seeded generator.
    pub fn run_worker(&self, w: usize) -> RunningStats {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(w as u64);
        let mut stats = RunningStats::default();
        for _ in 0..self.worker_samples(w) {
            let truth = match &self.fixed_v {
                Some(v) => v.clone(),
                None => haar_isometry(self.d, self.big_d, &mut rng).expect("valid dimensions").matrix,
            };
            let guess = haar_isometry(self.d, self.big_d, &mut rng).expect("valid dimensions").matrix;
            stats.push(self.integrand(&truth, &guess));
        }
        stats
    }

    /// `|⟨η_W|φ_V⟩|² F_ch(W, V)` for truth `V` and guess `W`.
    pub fn integrand(&self, v: &CMatrix, w: &CMatrix) -> f64 {
        let vn = DenseOperator::single(self.d, self.big_d, v.clone()).tensor_power(self.n).matrix;
        let wn = DenseOperator::single(self.d, self.big_d, w.clone()).tensor_power(self.n).matrix;
        let state = &self.phi * vn.transpose();
        let effect = &self.eta * wn.transpose();
        let mut overlap = c(0.0);
        for (e, s) in effect.iter().zip(state.iter()) {
            overlap += e.conj() * s;
        }
        overlap.norm_sqr() * trace_fidelity(v, w)
    }

    /// Combines worker results given in worker order.
    pub fn finish(&self, parts: &[RunningStats]) -> OracleEstimate {
        let total = parts.iter().fold(RunningStats::default(), |acc, p| acc.merge(p));
        let var = if total.count > 1 { total.m2 / (total.count - 1) as f64 } else { 0.0 };
        OracleEstimate {
            mean: total.mean,
            std_error: libm::sqrt(var / total.count as f64),
            samples: total.count as usize,
            seed: self.seed,
        }
    }
}

/// Monte-Carlo estimate of the estimation fidelity of the covariant protocol
/// with weights `v` (indexed like `Y_{d,n}`), run sequentially.
pub fn mc_fidelity(v: &[f64], n: usize, d: usize, big_d: usize, config: &McConfig) -> Result<OracleEstimate> {
    let problem = McProblem::new(v, n, d, big_d, config)?;
    let parts: Vec<RunningStats> = (0..MC_WORKERS).map(|w| problem.run_worker(w)).collect();
    Ok(problem.finish(&parts))
}

/// Checks that `V^{⊗(n+1)}` restricted to `(α-block) ⊗ ℂ^d` has no components
/// between different diagrams, and that only diagrams `μ ∈ α + □` occur.
/// Returns the largest violating matrix entry.
pub fn verify_block_decomposition(v: &DenseOperator, a: &YoungDiagram, d: usize, big_d: usize, n: usize) -> Result<f64> {
    if v.matrix.shape() != (big_d, d) {
        return Err(invalid!("operator has shape {:?}, expected ({big_d}, {d})", v.matrix.shape()));
    }
    if v.isometry_defect() > 1e-10 {
        return Err(invalid!("operator is not an isometry (defect {:e})", v.isometry_defect()));
    }
    if n + 1 > PROJECTOR_MAX_N {
        return Err(Error::BudgetExceeded(alloc::format!("n = {n} exceeds the block-check limit {}", PROJECTOR_MAX_N - 1)));
    }
    let a = a.with_row_bound(d)?;
    if a.n() != n {
        return Err(invalid!("diagram ({a}) does not have n = {n} boxes"));
    }
    let restrict = isotypic_projector(&a, d, n)?.matrix.kronecker(&CMatrix::identity(d, d));
    let x = v.tensor_power(n + 1).matrix;
    let allowed = a.add_box();
    let inputs = DiagramSet::enumerate(d, n + 1)?;
    let outputs = DiagramSet::enumerate(big_d, n + 1)?;
    let out_proj = outputs
        .iter()
        .map(|nu| Ok((nu.clone(), isotypic_projector(nu, big_d, n + 1)?.matrix)))
        .collect::<Result<Vec<_>>>()?;
    let mut worst: f64 = 0.0;
    for mu in inputs.iter() {
        let q = isotypic_projector(mu, d, n + 1)?.matrix * &restrict;
        if !allowed.contains(mu) {
            worst = worst.max(max_abs(&q));
        }
        let image = &x * q;
        let mu_out = mu.with_row_bound(big_d)?;
        for (nu, p) in &out_proj {
            if *nu != mu_out {
                worst = worst.max(max_abs(&(p * &image)));
            }
        }
    }
    Ok(worst)
}

/// The two one-parameter families used for the Hamiltonian check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// `V_θ: ℂ^d → ℂ^{d+1}`, last column `(…, cos θ, sin θ)`.
    Isometry,
    /// `U_θ` on `ℂ^{d+1}`, a rotation in the plane of the last two basis vectors.
    Unitary,
}

impl core::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "isometry" => Ok(Family::Isometry),
            "unitary" => Ok(Family::Unitary),
            _ => Err(invalid!("unknown family {s:?} (expected isometry or unitary)")),
        }
    }
}

/// `U_θ` (unitary family) or its first `d` columns `V_θ` (isometry family).
pub fn family_member(theta: f64, d: usize, family: Family) -> DenseOperator {
    let (cs, sn) = (libm::cos(theta), libm::sin(theta));
    let mut u = CMatrix::identity(d + 1, d + 1);
    u[(d - 1, d - 1)] = c(cs);
    u[(d, d - 1)] = c(sn);
    u[(d - 1, d)] = c(-sn);
    u[(d, d)] = c(cs);
    match family {
        Family::Unitary => DenseOperator::single(d + 1, d + 1, u),
        Family::Isometry => DenseOperator::single(d, d + 1, u.columns(0, d).into_owned()),
    }
}

/// Closed-form `θ`-derivative of [`family_member`].
pub fn family_derivative(theta: f64, d: usize, family: Family) -> DenseOperator {
    let (cs, sn) = (libm::cos(theta), libm::sin(theta));
    let mut u = CMatrix::zeros(d + 1, d + 1);
    u[(d - 1, d - 1)] = c(-sn);
    u[(d, d - 1)] = c(cs);
    u[(d - 1, d)] = c(-cs);
    u[(d, d)] = c(-sn);
    match family {
        Family::Unitary => DenseOperator::single(d + 1, d + 1, u),
        Family::Isometry => DenseOperator::single(d, d + 1, u.columns(0, d).into_owned()),
    }
}

/// `H_θ = i V_θ† V̇_θ` with the analytic derivative.
pub fn hnks_hamiltonian(theta: f64, d: usize, family: Family) -> Result<DenseOperator> {
    if d < 2 {
        return Err(invalid!("d = {d}: the families need d >= 2"));
    }
    if !(0.0..=core::f64::consts::PI).contains(&theta) {
        return Err(invalid!("θ = {theta} is outside [0, π]"));
    }
    let v = family_member(theta, d, family);
    let dv = family_derivative(theta, d, family);
    let h = v.matrix.adjoint() * dv.matrix * Complex::new(0.0, 1.0);
    let dim = h.nrows();
    Ok(DenseOperator::single(dim, dim, h))
}
