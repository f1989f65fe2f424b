//! Young diagrams with a bounded number of rows.
//!
//! A diagram is stored padded with zeros to exactly `d` rows, so that row
//! arithmetic of the form `α_i - i` never has to special-case short rows.
//! Sets of diagrams are kept in descending lexicographic order.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{invalid, Error, Result};

/// A weakly decreasing partition with exactly `d` (possibly zero) rows.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct YoungDiagram {
    rows: Vec<u32>,
}

impl YoungDiagram {
    /// Builds a diagram from its row lengths; `d` is `rows.len()`.
    pub fn new(rows: Vec<u32>) -> Result<Self> {
        if rows.is_empty() {
            return Err(invalid!("a diagram needs at least one row (d >= 1)"));
        }
        if rows.windows(2).any(|w| w[0] < w[1]) {
            return Err(invalid!("row lengths {rows:?} are not weakly decreasing"));
        }
        Ok(Self { rows })
    }

    /// Builds a diagram from `rows`, padding with zeros up to `d` rows.
    pub fn padded(rows: &[u32], d: usize) -> Result<Self> {
        let nonzero = rows.iter().rposition(|&r| r != 0).map_or(0, |p| p + 1);
        if nonzero > d {
            return Err(invalid!("diagram {rows:?} has more than {d} nonzero rows"));
        }
        let mut padded: Vec<u32> = rows[..nonzero].to_vec();
        padded.resize(d.max(1), 0);
        Self::new(padded)
    }

    /// The empty diagram with `d` rows.
    pub fn empty(d: usize) -> Self {
        Self { rows: alloc::vec![0; d.max(1)] }
    }

    pub fn rows(&self) -> &[u32] {
        &self.rows
    }

    /// Row bound (number of stored rows).
    pub fn d(&self) -> usize {
        self.rows.len()
    }

    /// Number of boxes.
    pub fn n(&self) -> usize {
        self.rows.iter().map(|&r| r as usize).sum()
    }

    /// Number of nonzero rows.
    pub fn height(&self) -> usize {
        self.rows.iter().take_while(|&&r| r > 0).count()
    }

    /// `α_i - i` with 1-based row index `i`.
    pub fn content_shift(&self, i: usize) -> i64 {
        i64::from(self.rows[i - 1]) - i as i64
    }

    /// True when every row is strictly longer than the next one.
    pub fn is_strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[0] > w[1])
    }

    /// Valid diagrams `α + e_i`, in row order (which is descending lexicographic).
    pub fn add_box(&self) -> Vec<YoungDiagram> {
        (0..self.d())
            .filter(|&i| i == 0 || self.rows[i - 1] > self.rows[i])
            .map(|i| self.with_row_delta(i, 1))
            .collect()
    }

    /// The row indices (0-based) at which a box can be added.
    pub fn addable_rows(&self) -> Vec<usize> {
        (0..self.d())
            .filter(|&i| i == 0 || self.rows[i - 1] > self.rows[i])
            .collect()
    }

    /// Valid diagrams `α - e_i`, in row order.
    pub fn remove_box(&self) -> Vec<YoungDiagram> {
        (0..self.d())
            .filter(|&i| self.rows[i] > 0 && (i + 1 == self.d() || self.rows[i] > self.rows[i + 1]))
            .map(|i| self.with_row_delta(i, -1))
            .collect()
    }

    fn with_row_delta(&self, i: usize, delta: i32) -> YoungDiagram {
        let mut rows = self.rows.clone();
        rows[i] = rows[i].checked_add_signed(delta).expect("row move stays non-negative");
        YoungDiagram { rows }
    }

    /// Same diagram re-padded (or truncated, if the dropped rows are zero) to `d` rows.
    pub fn with_row_bound(&self, d: usize) -> Result<YoungDiagram> {
        Self::padded(&self.rows, d)
    }

    /// Column lengths of the diagram.
    pub fn conjugate(&self) -> Vec<u32> {
        let width = self.rows.first().copied().unwrap_or(0);
        (0..width)
            .map(|j| self.rows.iter().filter(|&&r| r > j).count() as u32)
            .collect()
    }
}

impl fmt::Display for YoungDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, r) in self.rows.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{r}")?;
        }
        Ok(())
    }
}

impl FromStr for YoungDiagram {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let rows = s
            .trim()
            .split(',')
            .map(|t| t.trim().parse::<u32>().map_err(|e| invalid!("bad row length {t:?}: {e}")))
            .collect::<Result<Vec<_>>>()?;
        Self::new(rows)
    }
}

/// Canonically ordered, indexed set of diagrams sharing `d` and `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiagramSet {
    d: usize,
    n: usize,
    diagrams: Vec<YoungDiagram>,
    index: BTreeMap<YoungDiagram, usize>,
}

impl DiagramSet {
    /// All partitions of `n` into at most `d` parts (the set `Y_{d,n}`).
    pub fn enumerate(d: usize, n: usize) -> Result<Self> {
        if d == 0 {
            return Err(invalid!("row bound d must be at least 1"));
        }
        let mut out = Vec::new();
        let mut cur = Vec::with_capacity(d);
        enumerate_rec(n as u32, n as u32, d, &mut cur, &mut out);
        Ok(Self::from_sorted(d, n, out))
    }

    /// Builds a set from arbitrary diagrams of matching shape; duplicates are dropped.
    pub fn from_diagrams(d: usize, n: usize, diagrams: impl IntoIterator<Item = YoungDiagram>) -> Result<Self> {
        let mut v: Vec<YoungDiagram> = Vec::new();
        for a in diagrams {
            if a.d() != d || a.n() != n {
                return Err(invalid!("diagram ({a}) does not belong to Y_(d={d}, n={n})"));
            }
            v.push(a);
        }
        v.sort_unstable_by(|a, b| b.cmp(a));
        v.dedup();
        Ok(Self::from_sorted(d, n, v))
    }

    fn from_sorted(d: usize, n: usize, diagrams: Vec<YoungDiagram>) -> Self {
        let index = diagrams.iter().cloned().enumerate().map(|(i, a)| (a, i)).collect();
        Self { d, n, diagrams, index }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.diagrams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diagrams.is_empty()
    }

    pub fn diagrams(&self) -> &[YoungDiagram] {
        &self.diagrams
    }

    pub fn get(&self, i: usize) -> Option<&YoungDiagram> {
        self.diagrams.get(i)
    }

    pub fn position(&self, a: &YoungDiagram) -> Option<usize> {
        self.index.get(a).copied()
    }

    pub fn contains(&self, a: &YoungDiagram) -> bool {
        self.index.contains_key(a)
    }

    pub fn iter(&self) -> core::slice::Iter<'_, YoungDiagram> {
        self.diagrams.iter()
    }

    /// Header line plus one diagram per line.
    pub fn serialize(&self) -> String {
        let mut s = alloc::format!("d={} n={} count={}\n", self.d, self.n, self.len());
        for a in &self.diagrams {
            s.push_str(&alloc::format!("{a}\n"));
        }
        s
    }

    /// Inverse of [`DiagramSet::serialize`].
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| invalid!("empty diagram set"))?;
        let mut d = None;
        let mut n = None;
        let mut count = None;
        for field in header.split_whitespace() {
            let (key, value) = field.split_once('=').ok_or_else(|| invalid!("bad header field {field:?}"))?;
            let value: usize = value.parse().map_err(|e| invalid!("bad header value {field:?}: {e}"))?;
            match key {
                "d" => d = Some(value),
                "n" => n = Some(value),
                "count" => count = Some(value),
                _ => return Err(invalid!("unknown header field {key:?}")),
            }
        }
        let (d, n, count) = match (d, n, count) {
            (Some(d), Some(n), Some(c)) => (d, n, c),
            _ => return Err(invalid!("header must carry d, n and count")),
        };
        let diagrams = lines.map(str::parse).collect::<Result<Vec<YoungDiagram>>>()?;
        if diagrams.len() != count {
            return Err(invalid!("header announces {count} diagrams, found {}", diagrams.len()));
        }
        Self::from_diagrams(d, n, diagrams)
    }
}

impl<'a> IntoIterator for &'a DiagramSet {
    type Item = &'a YoungDiagram;
    type IntoIter = core::slice::Iter<'a, YoungDiagram>;

    fn into_iter(self) -> Self::IntoIter {
        self.diagrams.iter()
    }
}

fn enumerate_rec(rem: u32, max_part: u32, d: usize, cur: &mut Vec<u32>, out: &mut Vec<YoungDiagram>) {
    if cur.len() == d {
        if rem == 0 {
            out.push(YoungDiagram { rows: cur.clone() });
        }
        return;
    }
    let slots_left = (d - cur.len()) as u32;
    // The remaining rows can absorb at most `slots_left * part` boxes.
    for part in (0..=rem.min(max_part)).rev() {
        if part.saturating_mul(slots_left) < rem {
            break;
        }
        cur.push(part);
        enumerate_rec(rem - part, part, d, cur, out);
        cur.pop();
    }
}

/// Dimension of the irreducible representation of `U(m)` labelled by `α`,
/// from the Weyl dimension formula.
pub fn dim_unitary(a: &YoungDiagram, m: usize) -> Result<BigUint> {
    let rows = rows_for_group(a, m)?;
    let mut num = BigUint::one();
    for i in 0..m {
        for j in i + 1..m {
            let factor = i64::from(rows[i]) - i64::from(rows[j]) + (j - i) as i64;
            num *= factor as u64;
        }
    }
    let mut den = BigUint::one();
    for k in 1..m {
        den *= factorial(k);
    }
    let (q, r) = (&num / &den, &num % &den);
    debug_assert!(r.is_zero());
    Ok(q)
}

/// `log2` of [`dim_unitary`], computed without big integers.
pub fn log2_dim_unitary(a: &YoungDiagram, m: usize) -> Result<f64> {
    let rows = rows_for_group(a, m)?;
    let mut acc = 0.0;
    for i in 0..m {
        for j in i + 1..m {
            let factor = i64::from(rows[i]) - i64::from(rows[j]) + (j - i) as i64;
            acc += libm::log2(factor as f64);
        }
        // ∏_{k=1}^{m-1} k! = ∏_{i<j} (j - i)
        for j in i + 1..m {
            acc -= libm::log2((j - i) as f64);
        }
    }
    Ok(acc)
}

fn rows_for_group(a: &YoungDiagram, m: usize) -> Result<Vec<u32>> {
    if m == 0 {
        return Err(invalid!("group dimension m must be at least 1"));
    }
    if a.height() > m {
        return Err(invalid!(
            "diagram ({a}) has {} nonzero rows, more than m = {m}; the representation is zero",
            a.height()
        ));
    }
    let mut rows: Vec<u32> = a.rows().iter().copied().take(m).collect();
    rows.resize(m, 0);
    Ok(rows)
}

fn factorial(k: usize) -> BigUint {
    (1..=k as u64).fold(BigUint::one(), |acc, x| acc * x)
}

/// Number of standard tableaux of shape `α` (the dimension of the symmetric-group
/// irrep). Computed both by the branching recursion and by the hook-length
/// formula; the two must agree.
pub fn count_stab(a: &YoungDiagram) -> BigUint {
    let rec = count_stab_recursive(a);
    let hook = count_stab_hook(a);
    assert_eq!(rec, hook, "standard-tableau counts disagree for ({a})");
    rec
}

/// Standard-tableau count via `m_α = Σ_{β ∈ α-□} m_β`, memoized.
pub fn count_stab_recursive(a: &YoungDiagram) -> BigUint {
    let mut memo = BTreeMap::new();
    stab_rec(a, &mut memo)
}

fn stab_rec(a: &YoungDiagram, memo: &mut BTreeMap<YoungDiagram, BigUint>) -> BigUint {
    if a.n() == 0 {
        return BigUint::one();
    }
    if let Some(v) = memo.get(a) {
        return v.clone();
    }
    let mut total = BigUint::zero();
    for b in a.remove_box() {
        total += stab_rec(&b, memo);
    }
    memo.insert(a.clone(), total.clone());
    total
}

/// Standard-tableau count via the hook-length formula `n! / ∏ hooks`.
pub fn count_stab_hook(a: &YoungDiagram) -> BigUint {
    let cols = a.conjugate();
    let mut hooks = BigUint::one();
    for (i, &r) in a.rows().iter().enumerate() {
        for j in 0..r {
            let arm = r - j - 1;
            let leg = cols[j as usize] - i as u32 - 1;
            hooks *= u64::from(arm + leg + 1);
        }
    }
    factorial(a.n()) / hooks
}

/// All standard tableaux of shape `α`, each given as its Yamanouchi word:
/// entry `k` of the word is the (0-based) row holding the number `k + 1`.
/// Words are listed in lexicographic order, so the row-reading tableau comes first.
pub fn standard_tableaux(a: &YoungDiagram) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut filled = alloc::vec![0u32; a.d()];
    let mut word = Vec::with_capacity(a.n());
    tableaux_rec(a.rows(), &mut filled, &mut word, &mut out);
    out
}

fn tableaux_rec(shape: &[u32], filled: &mut [u32], word: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if filled == shape {
        out.push(word.clone());
        return;
    }
    for i in 0..shape.len() {
        let fits = filled[i] < shape[i] && (i == 0 || filled[i - 1] > filled[i]);
        if fits {
            filled[i] += 1;
            word.push(i);
            tableaux_rec(shape, filled, word, out);
            word.pop();
            filled[i] -= 1;
        }
    }
}

/// Exact and logarithmic dimension data for one diagram and group size.
#[derive(Debug, Clone, PartialEq)]
pub struct DimensionRecord {
    pub diagram: YoungDiagram,
    pub m: usize,
    pub dim_unitary: BigUint,
    pub log2_dim: f64,
    pub stab_count: BigUint,
}

impl DimensionRecord {
    pub fn new(a: &YoungDiagram, m: usize) -> Result<Self> {
        let dim = dim_unitary(a, m)?;
        let log2_dim = log2_dim_unitary(a, m)?;
        let exact_log = log2_biguint(&dim);
        if (log2_dim - exact_log).abs() > 1e-12 * exact_log.max(1.0) {
            return Err(Error::Inconsistent(alloc::format!(
                "log2 dimension {log2_dim} disagrees with exact {exact_log} for ({a}), m = {m}"
            )));
        }
        Ok(Self { diagram: a.clone(), m, dim_unitary: dim, log2_dim, stab_count: count_stab(a) })
    }
}

/// `log2` of a positive big integer, accurate to double precision.
pub fn log2_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 64 {
        return libm::log2(x.to_u64().expect("fits in 64 bits") as f64);
    }
    let shift = bits - 64;
    let top = (x >> shift).to_u64().expect("fits in 64 bits");
    libm::log2(top as f64) + shift as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn yd(rows: &[u32]) -> YoungDiagram {
        YoungDiagram::new(rows.to_vec()).unwrap()
    }

    #[test]
    fn enumeration_examples() {
        let s = DiagramSet::enumerate(1, 7).unwrap();
        assert_eq!(s.diagrams(), &[yd(&[7])]);
        let s = DiagramSet::enumerate(2, 3).unwrap();
        assert_eq!(s.diagrams(), &[yd(&[3, 0]), yd(&[2, 1])]);
        let s = DiagramSet::enumerate(3, 3).unwrap();
        assert_eq!(s.diagrams(), &[yd(&[3, 0, 0]), yd(&[2, 1, 0]), yd(&[1, 1, 1])]);
        let s = DiagramSet::enumerate(3, 0).unwrap();
        assert_eq!(s.diagrams(), &[YoungDiagram::empty(3)]);
    }

    #[test]
    fn box_moves() {
        assert_eq!(yd(&[1, 0]).add_box(), vec![yd(&[2, 0]), yd(&[1, 1])]);
        assert_eq!(yd(&[1, 1]).add_box(), vec![yd(&[2, 1])]);
        assert_eq!(yd(&[5]).add_box(), vec![yd(&[6])]);
        assert_eq!(yd(&[2, 2]).remove_box(), vec![yd(&[2, 1])]);
        assert_eq!(yd(&[2, 1]).remove_box(), vec![yd(&[1, 1]), yd(&[2, 0])]);
        assert_eq!(yd(&[1]).remove_box(), vec![yd(&[0])]);
        assert!(yd(&[0, 0]).remove_box().is_empty());
    }

    #[test]
    fn weyl_dimensions() {
        assert_eq!(dim_unitary(&yd(&[2, 1, 0]), 3).unwrap(), BigUint::from(8u32));
        for k in 0..20u32 {
            assert_eq!(dim_unitary(&yd(&[k, 0]), 2).unwrap(), BigUint::from(k + 1));
        }
        assert_eq!(dim_unitary(&yd(&[1, 1]), 2).unwrap(), BigUint::one());
        assert!(dim_unitary(&yd(&[1, 1, 1]), 2).is_err());
        // Trailing zero rows beyond m are fine.
        assert_eq!(dim_unitary(&yd(&[3, 0, 0]), 2).unwrap(), BigUint::from(4u32));
    }

    #[test]
    fn stab_examples() {
        assert_eq!(count_stab(&yd(&[9])), BigUint::one());
        assert_eq!(count_stab(&yd(&[2, 1])), BigUint::from(2u32));
        assert_eq!(count_stab(&yd(&[3, 2])), BigUint::from(5u32));
    }

    #[test]
    fn tableaux_listing() {
        let t = standard_tableaux(&yd(&[2, 1]));
        assert_eq!(t, vec![vec![0, 0, 1], vec![0, 1, 0]]);
        let t = standard_tableaux(&yd(&[3, 2]));
        assert_eq!(t.len(), 5);
        assert_eq!(t[0], vec![0, 0, 0, 1, 1]);
    }

    #[test]
    fn display_and_parse() {
        let a = yd(&[6, 4]);
        assert_eq!(alloc::format!("{a}"), "6,4");
        assert_eq!("6,4".parse::<YoungDiagram>().unwrap(), a);
        assert!("4,6".parse::<YoungDiagram>().is_err());
        let s = DiagramSet::enumerate(3, 4).unwrap();
        let text = s.serialize();
        assert!(text.starts_with("d=3 n=4 count=4\n"));
        assert_eq!(DiagramSet::parse(&text).unwrap(), s);
    }

    #[test]
    fn log2_of_big_integers() {
        let x = BigUint::one() << 300u32;
        assert!((log2_biguint(&x) - 300.0).abs() < 1e-12);
        assert!((log2_biguint(&BigUint::from(630u32)) - libm::log2(630.0)).abs() < 1e-15);
    }
}
