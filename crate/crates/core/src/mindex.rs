//! Multi-indices, the graded symmetric lexicographic order, and the ordered
//! enumeration of all multi-indices of bounded sum.
//!
//! The layer of multi-indices of dimension `d` and sum exactly `k` is built
//! recursively on `d`: it is the concatenation, for `i = 0..=k`, of the
//! indices `(k - i, beta)` with `beta` running over the layer of dimension
//! `d - 1` and sum `i`. Concatenating the layers of sum `0..=k` yields a
//! table that is strictly increasing for [`grsymlex_lt`].

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binomial coefficient `C(n, r)`.
pub fn binomial(n: usize, r: usize) -> usize {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

/// `C(d + k, d) - 1`: the largest index of the table of dimension `d` and
/// degree `k`, so that `pbinom(d, k) + 1` is its length.
pub fn pbinom(d: usize, k: usize) -> usize {
    binomial(d + k, d) - 1
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(pub Vec<usize>);

impl MultiIndex {
    pub fn new(entries: Vec<usize>) -> Self {
        MultiIndex(entries)
    }

    pub fn zero(d: usize) -> Self {
        MultiIndex(vec![0; d])
    }

    /// `k` times the `i`-th unit multi-index.
    pub fn scaled_unit(d: usize, i: usize, k: usize) -> Self {
        let mut e = vec![0; d];
        e[i] = k;
        MultiIndex(e)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn sum(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }

    /// Entry-wise sum of two multi-indices of equal dimension.
    pub fn add(&self, other: &MultiIndex) -> Result<MultiIndex> {
        check_dims(self, other)?;
        Ok(MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect()))
    }
}

impl From<Vec<usize>> for MultiIndex {
    fn from(v: Vec<usize>) -> Self {
        MultiIndex(v)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

fn check_dims(a: &MultiIndex, b: &MultiIndex) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), got: b.dim() });
    }
    Ok(())
}

/// Total order behind [`grsymlex_lt`]: smaller sum first, then reversed
/// lexicographic comparison.
pub fn grsymlex_cmp(a: &MultiIndex, b: &MultiIndex) -> Result<Ordering> {
    check_dims(a, b)?;
    Ok(a.sum().cmp(&b.sum()).then_with(|| b.0.cmp(&a.0)))
}

/// `a < b` in graded symmetric lexicographic order.
pub fn grsymlex_lt(a: &MultiIndex, b: &MultiIndex) -> Result<bool> {
    Ok(grsymlex_cmp(a, b)? == Ordering::Less)
}

/// The layer of multi-indices of dimension `d` with sum exactly `k`, in
/// table order.
pub fn cdk(d: usize, k: usize) -> Vec<MultiIndex> {
    match d {
        0 if k == 0 => vec![MultiIndex(Vec::new())],
        0 => Vec::new(),
        1 => vec![MultiIndex(vec![k])],
        _ => {
            let mut out = Vec::with_capacity(binomial(k + d - 1, d - 1));
            for i in 0..=k {
                for beta in cdk(d - 1, i) {
                    let mut e = Vec::with_capacity(d);
                    e.push(k - i);
                    e.extend(beta.0);
                    out.push(MultiIndex(e));
                }
            }
            out
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiIndexTable {
    d: usize,
    k: usize,
    rows: Vec<MultiIndex>,
}

impl MultiIndexTable {
    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn degree(&self) -> usize {
        self.k
    }

    pub fn rows(&self) -> &[MultiIndex] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<&MultiIndex> {
        self.rows.get(i)
    }

    pub fn position(&self, a: &MultiIndex) -> Result<usize> {
        adk_inv(self.d, self.k, a)
    }

    /// Writes `index,alpha_0,...,alpha_{d-1},sum`, one row per multi-index.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["index".to_string()];
        header.extend((0..self.d).map(|j| format!("alpha_{j}")));
        header.push("sum".into());
        w.write_record(&header)?;
        for (i, a) in self.rows.iter().enumerate() {
            let mut rec = vec![i.to_string()];
            rec.extend(a.0.iter().map(ToString::to_string));
            rec.push(a.sum().to_string());
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::Parse(e.to_string()))?;
        Ok(())
    }
}

impl std::ops::Index<usize> for MultiIndexTable {
    type Output = MultiIndex;

    fn index(&self, i: usize) -> &MultiIndex {
        &self.rows[i]
    }
}

/// All multi-indices of dimension `d` and sum at most `k`, layer by layer.
pub fn adk(d: usize, k: usize) -> MultiIndexTable {
    let rows = if d == 0 {
        vec![MultiIndex(Vec::new())]
    } else {
        let mut rows = Vec::with_capacity(pbinom(d, k) + 1);
        for l in 0..=k {
            rows.extend(cdk(d, l));
        }
        rows
    };
    MultiIndexTable { d, k, rows }
}

type TableCache = OnceLock<Mutex<HashMap<(usize, usize), Arc<MultiIndexTable>>>>;

/// Shared, lazily built table for `(d, k)`.
pub fn table(d: usize, k: usize) -> Arc<MultiIndexTable> {
    static CACHE: TableCache = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    guard.entry((d, k)).or_insert_with(|| Arc::new(adk(d, k))).clone()
}

// Position of `a` inside its own layer.
fn layer_rank(a: &[usize]) -> usize {
    let d = a.len();
    if d <= 1 {
        return 0;
    }
    let l: usize = a.iter().sum();
    let block = l - a[0];
    binomial(block + d - 2, d - 1) + layer_rank(&a[1..])
}

/// Position of `a` in `adk(d, k)`.
pub fn adk_inv(d: usize, k: usize, a: &MultiIndex) -> Result<usize> {
    if a.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: a.dim() });
    }
    let l = a.sum();
    if l > k {
        return Err(Error::OutOfRange { sum: l, k });
    }
    if d == 0 {
        return Ok(0);
    }
    let offset = if l == 0 { 0 } else { pbinom(d, l - 1) + 1 };
    Ok(offset + layer_rank(&a.0))
}

fn check_face(d: usize, i: usize) -> Result<()> {
    if d == 0 {
        return Err(Error::InvalidArgument("face multi-indices need d >= 1".into()));
    }
    if i > d {
        return Err(Error::IndexOutOfRange { index: i, max: d });
    }
    Ok(())
}

/// Whether `a` belongs to the multi-indices of face `i`: sum exactly `k`
/// for `i = 0`, zero component `i - 1` otherwise.
pub fn in_asdki(d: usize, k: usize, i: usize, a: &MultiIndex) -> Result<bool> {
    check_face(d, i)?;
    if a.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: a.dim() });
    }
    let s = a.sum();
    if s > k {
        return Err(Error::OutOfRange { sum: s, k });
    }
    Ok(if i == 0 { s == k } else { a.0[i - 1] == 0 })
}

/// Lifts a multi-index of dimension `d - 1` onto face `i` of dimension `d`:
/// prepends `k - |a|` for `i = 0`, inserts a zero at `i - 1` otherwise.
pub fn inj_asdki(d: usize, k: usize, i: usize, a: &MultiIndex) -> Result<MultiIndex> {
    check_face(d, i)?;
    if a.dim() != d - 1 {
        return Err(Error::DimensionMismatch { expected: d - 1, got: a.dim() });
    }
    let s = a.sum();
    if s > k {
        return Err(Error::OutOfRange { sum: s, k });
    }
    let mut e = a.0.clone();
    if i == 0 {
        e.insert(0, k - s);
    } else {
        e.insert(i - 1, 0);
    }
    Ok(MultiIndex(e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(v: &[usize]) -> MultiIndex {
        MultiIndex(v.to_vec())
    }

    #[test]
    fn pbinom_values() {
        assert_eq!(pbinom(2, 3), 9);
        assert_eq!(pbinom(3, 4), 34);
        for d in 0..8 {
            assert_eq!(pbinom(d, 0), 0);
        }
        assert_eq!(binomial(20, 10), 184_756);
    }

    #[test]
    fn adk_2_3_order() {
        let t = adk(2, 3);
        let expected = [[0, 0], [1, 0], [0, 1], [2, 0], [1, 1], [0, 2], [3, 0], [2, 1], [1, 2], [0, 3]];
        let got: Vec<Vec<usize>> = t.rows().iter().map(|a| a.0.clone()).collect();
        let want: Vec<Vec<usize>> = expected.iter().map(|a| a.to_vec()).collect();
        assert_eq!(got, want);
    }

    #[test]
    fn small_tables() {
        assert_eq!(adk(1, 4).rows(), &[mi(&[0]), mi(&[1]), mi(&[2]), mi(&[3]), mi(&[4])]);
        assert_eq!(adk(4, 0).rows(), &[mi(&[0, 0, 0, 0])]);
        let t0 = adk(0, 5);
        assert_eq!(t0.len(), 1);
        assert_eq!(t0[0].dim(), 0);
        assert_eq!(adk_inv(0, 5, &mi(&[])).unwrap(), 0);
    }

    #[test]
    fn grsymlex_examples() {
        assert!(grsymlex_lt(&mi(&[0, 0]), &mi(&[1, 0])).unwrap());
        assert!(!grsymlex_lt(&mi(&[1, 1]), &mi(&[1, 1])).unwrap());
        assert!(grsymlex_lt(&mi(&[2, 0, 1]), &mi(&[1, 2, 0])).unwrap());
        assert!(grsymlex_lt(&mi(&[1, 0]), &mi(&[0, 1])).unwrap());
        assert!(matches!(grsymlex_lt(&mi(&[1]), &mi(&[1, 0])), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn adk_inv_examples() {
        assert_eq!(adk_inv(2, 3, &mi(&[1, 1])).unwrap(), 4);
        assert_eq!(adk_inv(3, 4, &mi(&[0, 0, 0])).unwrap(), 0);
        assert_eq!(adk_inv(3, 4, &mi(&[0, 0, 4])).unwrap(), 34);
        assert_eq!(adk_inv(3, 4, &mi(&[0, 0, 5])), Err(Error::OutOfRange { sum: 5, k: 4 }));
        assert!(adk_inv(3, 4, &mi(&[0, 0])).is_err());
    }

    #[test]
    fn face_membership_and_injection() {
        assert!(in_asdki(3, 3, 0, &mi(&[0, 1, 2])).unwrap());
        assert!(in_asdki(3, 3, 2, &mi(&[1, 0, 2])).unwrap());
        assert!(!in_asdki(3, 3, 1, &mi(&[1, 1, 1])).unwrap());
        assert!(matches!(in_asdki(3, 3, 4, &mi(&[0, 0, 0])), Err(Error::IndexOutOfRange { .. })));

        assert_eq!(inj_asdki(3, 3, 0, &mi(&[1, 2])).unwrap(), mi(&[0, 1, 2]));
        assert_eq!(inj_asdki(3, 3, 2, &mi(&[1, 2])).unwrap(), mi(&[1, 0, 2]));
        assert_eq!(inj_asdki(3, 3, 3, &mi(&[1, 2])).unwrap(), mi(&[1, 2, 0]));
        assert!(inj_asdki(3, 2, 0, &mi(&[1, 2])).is_err());
        for a in adk(2, 3).rows() {
            let (i, j) = (a.0[0], a.0[1]);
            assert_eq!(inj_asdki(3, 3, 0, a).unwrap(), mi(&[3 - (i + j), i, j]));
        }
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        adk(2, 1).write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s, "index,alpha_0,alpha_1,sum\n0,0,0,0\n1,1,0,1\n2,0,1,1\n");
    }
}
