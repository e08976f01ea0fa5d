//! Exact cohomology of finite cochain complexes over the rationals.

use crate::error::{Error, Result};
use crate::graded::{GenId, GradedComplex, GradedMap};
use crate::linalg::RowMatrix;
use std::collections::BTreeMap;
use std::collections::HashMap;
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeSummary {
    pub degree: i64,
    pub space_dim: usize,
    pub kernel_dim: usize,
    /// Rank of the differential arriving from one degree below.
    pub boundary_dim: usize,
    pub cohomology_dim: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CohomologyReport {
    pub degrees: Vec<DegreeSummary>,
}

impl CohomologyReport {
    pub fn dimension(&self, degree: i64) -> usize {
        self.degrees
            .iter()
            .find(|s| s.degree == degree)
            .map(|s| s.cohomology_dim)
            .unwrap_or(0)
    }

    pub fn total_dimension(&self) -> usize {
        self.degrees.iter().map(|s| s.cohomology_dim).sum()
    }

    /// Degrees with nonzero cohomology, with their dimensions.
    pub fn nonzero(&self) -> BTreeMap<i64, usize> {
        self.degrees
            .iter()
            .filter(|s| s.cohomology_dim > 0)
            .map(|s| (s.degree, s.cohomology_dim))
            .collect()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.degrees
            .iter()
            .map(|s| {
                let sign = if s.degree.rem_euclid(2) == 0 { 1 } else { -1 };
                sign * s.cohomology_dim as i64
            })
            .sum()
    }
}

impl fmt::Display for CohomologyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let nz = self.nonzero();
        if nz.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = nz
            .iter()
            .map(|(d, h)| format!("H^{} = k^{}", d, h))
            .collect();
        write!(f, "{}", parts.join(", "))
    }
}

/// The matrix of a map restricted to given row/column generator lists.
/// Row `i` holds the image of `rows[i]` in the coordinates of `cols`.
/// Every generator hit by the map must appear in `cols`.
pub fn matrix_on_ids(map: &GradedMap, rows: &[GenId], cols: &[GenId]) -> RowMatrix {
    let col_pos: HashMap<GenId, usize> =
        cols.iter().enumerate().map(|(p, &id)| (id, p)).collect();
    let mut m = RowMatrix::new(cols.len());
    for &r in rows {
        let img = map.image_of(r);
        let row: Vec<(usize, crate::scalar::Rational)> = img
            .iter()
            .map(|(id, c)| {
                let p = *col_pos.get(id).unwrap_or_else(|| {
                    panic!(
                        "image of {} leaves the column span at {}",
                        map.source.name(r),
                        map.target.name(*id)
                    )
                });
                (
                    p,
                    c.as_rational()
                        .expect("matrix extraction requires specialized scalars")
                        .clone(),
                )
            })
            .collect();
        m.push_row(row);
    }
    m
}

fn require_specialized(c: &GradedComplex, context: &str) -> Result<()> {
    let params = c.parameters();
    if params.is_empty() {
        Ok(())
    } else {
        Err(Error::UnspecializedParameter {
            parameters: params.into_iter().collect(),
            context: context.to_string(),
        })
    }
}

/// Cohomology dimensions per degree.  `window` restricts the reported
/// degrees; computation always uses the full (finite) complex so boundary
/// ranks at the window edges are honest.
pub fn cohomology(c: &GradedComplex, window: Option<(i64, i64)>) -> Result<CohomologyReport> {
    require_specialized(c, "cohomology")?;
    let dims = c.space.dims_by_degree();
    let (lo, hi) = match c.degree_window() {
        Some(w) => w,
        None => return Ok(CohomologyReport { degrees: vec![] }),
    };
    // rank of d : C^d -> C^{d+1}
    let mut ranks: BTreeMap<i64, usize> = BTreeMap::new();
    for d in lo..=hi {
        let rows = c.space.ids_of_degree(d);
        let cols = c.space.ids_of_degree(d + 1);
        if rows.is_empty() || cols.is_empty() {
            ranks.insert(d, 0);
            continue;
        }
        let m = matrix_on_ids(&c.differential, &rows, &cols);
        ranks.insert(d, m.rank());
    }
    let (rlo, rhi) = window.unwrap_or((lo, hi));
    let mut degrees = Vec::new();
    for d in rlo..=rhi {
        let space_dim = dims.get(&d).copied().unwrap_or(0);
        let rank_out = ranks.get(&d).copied().unwrap_or(0);
        let boundary_dim = ranks.get(&(d - 1)).copied().unwrap_or(0);
        let kernel_dim = space_dim - rank_out;
        degrees.push(DegreeSummary {
            degree: d,
            space_dim,
            kernel_dim,
            boundary_dim,
            cohomology_dim: kernel_dim - boundary_dim,
        });
    }
    Ok(CohomologyReport { degrees })
}

/// Alternating sum of the chain-level dimensions.  Always equals the
/// Euler characteristic of the cohomology.
pub fn euler_characteristic(c: &GradedComplex) -> i64 {
    c.space
        .dims_by_degree()
        .into_iter()
        .map(|(d, n)| if d.rem_euclid(2) == 0 { n as i64 } else { -(n as i64) })
        .sum()
}
