//! Exact linear algebra over `Q`.
//!
//! Matrices are stored row-sparse.  Throughout the library a matrix
//! represents a linear map in the row convention: row `i` lists the image
//! of the `i`-th source basis vector in target coordinates.  `rank` is the
//! dimension of the image; `kernel_basis` returns coefficient vectors over
//! the rows.
//!
//! Ranks use integer-preserving (fraction-free) elimination: rows are
//! cleared to integers and updated by cross-multiplication followed by
//! content removal, which keeps entries small without ever leaving `Z`.

use crate::scalar::Rational;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

pub type SparseRow = Vec<(usize, Rational)>;

#[derive(Clone, Debug, Default)]
pub struct RowMatrix {
    pub ncols: usize,
    pub rows: Vec<SparseRow>,
}

impl RowMatrix {
    pub fn new(ncols: usize) -> Self {
        RowMatrix { ncols, rows: Vec::new() }
    }

    /// Append a row; entries need not be sorted and may repeat (they are
    /// merged).  Zero entries are dropped.
    pub fn push_row(&mut self, entries: impl IntoIterator<Item = (usize, Rational)>) {
        let mut row: SparseRow = Vec::new();
        for (c, v) in entries {
            debug_assert!(c < self.ncols);
            row.push((c, v));
        }
        row.sort_by_key(|&(c, _)| c);
        let mut merged: SparseRow = Vec::with_capacity(row.len());
        for (c, v) in row {
            match merged.last_mut() {
                Some((lc, lv)) if *lc == c => *lv += v,
                _ => merged.push((c, v)),
            }
        }
        merged.retain(|(_, v)| !v.is_zero());
        self.rows.push(merged);
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    /// Dimension of the row space, by fraction-free elimination.
    pub fn rank(&self) -> usize {
        let mut work: Vec<Vec<(usize, BigInt)>> = self
            .rows
            .iter()
            .filter(|r| !r.is_empty())
            .map(clear_denominators)
            .collect();
        let mut rank = 0;
        while !work.is_empty() {
            // Shortest row first keeps fill-in low; ties resolved by
            // leading column for determinism.
            let mut best = 0;
            for i in 1..work.len() {
                let a = (work[i].len(), work[i][0].0);
                let b = (work[best].len(), work[best][0].0);
                if a < b {
                    best = i;
                }
            }
            let pivot_row = work.swap_remove(best);
            let (pc, pv) = (pivot_row[0].0, pivot_row[0].1.clone());
            rank += 1;
            let mut next: Vec<Vec<(usize, BigInt)>> = Vec::with_capacity(work.len());
            for row in work {
                let coeff = row.iter().find(|&&(c, _)| c == pc).map(|(_, v)| v.clone());
                let reduced = match coeff {
                    None => row,
                    Some(q) => {
                        let mut r = int_row_combine(&pv, &row, &q, &pivot_row);
                        remove_content(&mut r);
                        r
                    }
                };
                if !reduced.is_empty() {
                    next.push(reduced);
                }
            }
            work = next;
        }
        rank
    }

    /// Basis of `{ x : sum_i x_i row_i = 0 }`, i.e. the kernel of the map
    /// the matrix represents.  Forward elimination with an augmented
    /// identity: whenever a row reduces to zero its combination vector is a
    /// kernel element.
    pub fn kernel_basis(&self) -> Vec<SparseRow> {
        // pivot rows: (row entries, combination over original row indices)
        let mut pivots: Vec<(SparseRow, SparseRow)> = Vec::new();
        let mut kernel: Vec<SparseRow> = Vec::new();
        for (i, row) in self.rows.iter().enumerate() {
            let mut r = row.clone();
            let mut combo: SparseRow = vec![(i, Rational::one())];
            for (p, pcombo) in &pivots {
                let lead = p[0].0;
                if let Some(idx) = r.iter().position(|&(c, _)| c == lead) {
                    let factor = r[idx].1.clone() / p[0].1.clone();
                    r = row_sub_scaled(&r, &factor, p);
                    combo = row_sub_scaled(&combo, &factor, pcombo);
                }
            }
            if r.is_empty() {
                kernel.push(combo);
            } else {
                // Keep pivot rows ordered by leading column so reduction is
                // a single sweep.
                let pos = pivots
                    .binary_search_by_key(&r[0].0, |(p, _)| p[0].0)
                    .unwrap_err();
                pivots.insert(pos, (r, combo));
            }
        }
        kernel
    }

    /// Rank of the row space spanned by this matrix together with `other`.
    pub fn rank_with(&self, other: &RowMatrix) -> usize {
        debug_assert_eq!(self.ncols, other.ncols);
        let mut m = RowMatrix::new(self.ncols);
        m.rows.extend(self.rows.iter().cloned());
        m.rows.extend(other.rows.iter().cloned());
        m.rank()
    }
}

/// Reduced row echelon basis built incrementally over `Q`.
///
/// Invariant: every stored row has leading coefficient 1 at its pivot column
/// and is zero at every other pivot column, so reducing an incoming row is a
/// single left-to-right sweep.
#[derive(Clone, Debug, Default)]
pub struct Rref {
    rows: Vec<SparseRow>,
    pivot_row: std::collections::BTreeMap<usize, usize>,
}

impl Rref {
    pub fn new() -> Self {
        Rref::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Pivot columns in ascending order.
    pub fn pivot_cols(&self) -> Vec<usize> {
        self.pivot_row.keys().copied().collect()
    }

    pub fn is_pivot(&self, col: usize) -> bool {
        self.pivot_row.contains_key(&col)
    }

    /// The stored row with leading 1 at pivot column `col`.
    pub fn row_for_pivot(&self, col: usize) -> Option<&SparseRow> {
        self.pivot_row.get(&col).map(|&i| &self.rows[i])
    }

    /// Reduce `row` against the basis without installing it.
    pub fn reduce(&self, mut row: SparseRow) -> SparseRow {
        let mut i = 0;
        while i < row.len() {
            let (c, _) = row[i];
            if let Some(&ri) = self.pivot_row.get(&c) {
                let factor = row[i].1.clone();
                row = row_sub_scaled(&row, &factor, &self.rows[ri]);
            } else {
                i += 1;
            }
        }
        row
    }

    /// Reduce `row` and, if anything survives, install it as a new pivot row
    /// (back-substituting into the existing rows).  Returns the new pivot
    /// column, or `None` if the row was dependent.
    pub fn absorb(&mut self, row: SparseRow) -> Option<usize> {
        let mut row = self.reduce(row);
        if row.is_empty() {
            return None;
        }
        let lead = row[0].1.clone();
        for (_, v) in row.iter_mut() {
            *v /= &lead;
        }
        let pivot = row[0].0;
        for r in self.rows.iter_mut() {
            if let Some(idx) = r.iter().position(|&(c, _)| c == pivot) {
                let factor = r[idx].1.clone();
                *r = row_sub_scaled(r, &factor, &row);
            }
        }
        self.pivot_row.insert(pivot, self.rows.len());
        self.rows.push(row);
        Some(pivot)
    }
}

fn row_sub_scaled(a: &SparseRow, factor: &Rational, b: &SparseRow) -> SparseRow {
    // a - factor * b, both sorted.
    let mut out = SparseRow::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        match (a.get(i), b.get(j)) {
            (Some((ca, va)), Some((cb, vb))) if ca == cb => {
                let v = va - &(factor * vb);
                if !v.is_zero() {
                    out.push((*ca, v));
                }
                i += 1;
                j += 1;
            }
            (Some((ca, va)), Some((cb, _))) if ca < cb => {
                out.push((*ca, va.clone()));
                i += 1;
            }
            (Some(_), Some((cb, vb))) => {
                out.push((*cb, -(factor * vb)));
                j += 1;
            }
            (Some((ca, va)), None) => {
                out.push((*ca, va.clone()));
                i += 1;
            }
            (None, Some((cb, vb))) => {
                out.push((*cb, -(factor * vb)));
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    out
}

fn clear_denominators(row: &SparseRow) -> Vec<(usize, BigInt)> {
    let mut lcm = BigInt::one();
    for (_, v) in row {
        lcm = lcm.lcm(v.denom());
    }
    let mut out: Vec<(usize, BigInt)> = row
        .iter()
        .map(|(c, v)| (*c, v.numer() * (&lcm / v.denom())))
        .collect();
    remove_content(&mut out);
    out
}

fn remove_content(row: &mut Vec<(usize, BigInt)>) {
    row.retain(|(_, v)| !v.is_zero());
    if row.is_empty() {
        return;
    }
    let mut g = BigInt::zero();
    for (_, v) in row.iter() {
        g = g.gcd(v);
        if g.is_one() {
            return;
        }
    }
    for (_, v) in row.iter_mut() {
        *v = &*v / &g;
    }
}

/// pv * row - q * pivot_row on integer rows, both sorted.
fn int_row_combine(
    pv: &BigInt,
    row: &[(usize, BigInt)],
    q: &BigInt,
    pivot_row: &[(usize, BigInt)],
) -> Vec<(usize, BigInt)> {
    let mut out = Vec::with_capacity(row.len() + pivot_row.len());
    let (mut i, mut j) = (0, 0);
    while i < row.len() || j < pivot_row.len() {
        match (row.get(i), pivot_row.get(j)) {
            (Some((ca, va)), Some((cb, vb))) if ca == cb => {
                let v = pv * va - q * vb;
                if !v.is_zero() {
                    out.push((*ca, v));
                }
                i += 1;
                j += 1;
            }
            (Some((ca, va)), Some((cb, _))) if ca < cb => {
                out.push((*ca, pv * va));
                i += 1;
            }
            (Some(_), Some((cb, vb))) => {
                out.push((*cb, -(q * vb)));
                j += 1;
            }
            (Some((ca, va)), None) => {
                out.push((*ca, pv * va));
                i += 1;
            }
            (None, Some((cb, vb))) => {
                out.push((*cb, -(q * vb)));
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    out
}

/// Determinant of a dense square matrix by Bareiss elimination (exact,
/// fraction-free after clearing denominators).
pub fn determinant(mat: &[Vec<Rational>]) -> Rational {
    let n = mat.len();
    if n == 0 {
        return Rational::one();
    }
    debug_assert!(mat.iter().all(|r| r.len() == n));
    // Clear denominators row by row, tracking the product.
    let mut denom = BigInt::one();
    let mut a: Vec<Vec<BigInt>> = Vec::with_capacity(n);
    for row in mat {
        let mut lcm = BigInt::one();
        for v in row {
            lcm = lcm.lcm(v.denom());
        }
        denom *= &lcm;
        a.push(row.iter().map(|v| v.numer() * (&lcm / v.denom())).collect());
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(k, i);
                    sign = -sign;
                }
                None => return Rational::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                a[i][j] = v;
            }
            a[i][k] = BigInt::zero();
        }
        prev = a[k][k].clone();
    }
    Rational::new(sign * a[n - 1][n - 1].clone(), denom)
}

/// Solve `A x = b` for dense square `A`; `None` if `A` is singular.
pub fn solve_dense(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let n = a.len();
    debug_assert_eq!(b.len(), n);
    let mut m: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    for k in 0..n {
        let pivot = (k..n).find(|&i| !m[i][k].is_zero())?;
        m.swap(k, pivot);
        let p = m[k][k].clone();
        for j in k..=n {
            m[k][j] = &m[k][j] / &p;
        }
        for i in 0..n {
            if i != k && !m[i][k].is_zero() {
                let f = m[i][k].clone();
                for j in k..=n {
                    let v = &m[i][j] - &(&f * &m[k][j]);
                    m[i][j] = v;
                }
            }
        }
    }
    Some(m.into_iter().map(|row| row[n].clone()).collect())
}

/// Inverse of a dense square matrix via the adjugate (cofactor) formula.
/// Intended for the small covariance matrices of Gaussian actions, where
/// it provides a code path independent of Gaussian elimination.
pub fn adjugate_inverse(a: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
    let n = a.len();
    let det = determinant(a);
    if det.is_zero() {
        return None;
    }
    let mut inv = vec![vec![Rational::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            let minor: Vec<Vec<Rational>> = (0..n)
                .filter(|&r| r != j)
                .map(|r| {
                    (0..n)
                        .filter(|&c| c != i)
                        .map(|c| a[r][c].clone())
                        .collect()
                })
                .collect();
            let mut cof = determinant(&minor);
            if (i + j) % 2 == 1 {
                cof = -cof;
            }
            inv[i][j] = cof / &det;
        }
    }
    Some(inv)
}
