//! Monotone scale → bound tables.

use std::fmt::Write as _;

use crate::error::{CoarseError, Result};
use crate::space::TOL;

/// A finite control function: bounds tabulated on an explicit sorted grid of
/// scales. `f64::INFINITY` marks an unbounded entry.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlTable {
    scales: Vec<f64>,
    bounds: Vec<f64>,
}

impl ControlTable {
    pub fn new(entries: Vec<(f64, f64)>) -> Result<Self> {
        let (scales, bounds): (Vec<f64>, Vec<f64>) = entries.into_iter().unzip();
        check_scales(&scales)?;
        if bounds.iter().any(|b| b.is_nan() || *b < 0.0) {
            return Err(CoarseError::InvalidParameter("bounds must be ≥ 0".into()));
        }
        Ok(Self { scales, bounds })
    }

    pub fn from_fn(scales: &[f64], f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(scales.iter().map(|&s| (s, f(s))).collect())
    }

    pub(crate) fn from_parts(scales: Vec<f64>, bounds: Vec<f64>) -> Self {
        debug_assert_eq!(scales.len(), bounds.len());
        Self { scales, bounds }
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn bounds(&self) -> &[f64] {
        &self.bounds
    }

    pub fn entries(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.scales.iter().copied().zip(self.bounds.iter().copied())
    }

    pub fn len(&self) -> usize {
        self.scales.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scales.is_empty()
    }

    pub fn max_scale(&self) -> f64 {
        self.scales.last().copied().unwrap_or(0.0)
    }

    /// Value at the least tabulated scale ≥ `query`.
    pub fn at(&self, query: f64) -> Result<f64> {
        let k = self.scales.partition_point(|&s| s < query - TOL);
        self.bounds.get(k).copied().ok_or(CoarseError::OutOfRange {
            query,
            max: self.max_scale(),
        })
    }

    /// Entry at exactly `scale`, if tabulated.
    pub fn exact(&self, scale: f64) -> Option<f64> {
        self.scales
            .iter()
            .position(|&s| (s - scale).abs() <= TOL)
            .map(|k| self.bounds[k])
    }

    pub fn is_monotone(&self) -> bool {
        self.bounds.windows(2).all(|w| w[0] <= w[1] + TOL)
    }

    /// `self(s) ≤ other(s) + slack` at every scale tabulated in both.
    pub fn dominated_by(&self, other: &ControlTable, slack: f64) -> bool {
        self.entries()
            .all(|(s, b)| other.exact(s).is_none_or(|o| b <= o + slack + TOL))
    }

    /// Same values at every shared scale, within `tol`.
    pub fn agrees_with(&self, other: &ControlTable, tol: f64) -> bool {
        self.entries()
            .all(|(s, b)| other.exact(s).is_none_or(|o| (b - o).abs() <= tol + TOL))
    }

    pub fn pointwise_max(&self, other: &ControlTable) -> Result<ControlTable> {
        if self.scales.len() != other.scales.len()
            || self.scales.iter().zip(&other.scales).any(|(a, b)| (a - b).abs() > TOL)
        {
            return Err(CoarseError::InvalidParameter("tables have different grids".into()));
        }
        Ok(Self::from_parts(
            self.scales.clone(),
            self.bounds.iter().zip(&other.bounds).map(|(a, b)| a.max(*b)).collect(),
        ))
    }

    /// The table `s ↦ self(s + offset)` on the same grid, for scales whose
    /// shifted query stays in range.
    pub fn padded(&self, offset: f64) -> ControlTable {
        let mut scales = Vec::new();
        let mut bounds = Vec::new();
        for &s in &self.scales {
            if let Ok(b) = self.at(s + offset) {
                scales.push(s);
                bounds.push(b);
            }
        }
        Self::from_parts(scales, bounds)
    }

    /// CSV rows `check,scale,constant,bound,verdict` comparing this table
    /// against an optional reference bound.
    pub fn to_csv_rows(&self, check: &str, reference: Option<&ControlTable>) -> String {
        let mut out = String::new();
        for (s, b) in self.entries() {
            let (bound, verdict) = match reference.and_then(|r| r.exact(s)) {
                Some(r) => (fmt_num(r), if b <= r + TOL { "pass" } else { "fail" }),
                None => (String::new(), "info"),
            };
            let _ = writeln!(out, "{check},{},{},{bound},{verdict}", fmt_num(s), fmt_num(b));
        }
        out
    }
}

pub(crate) fn check_scales(scales: &[f64]) -> Result<()> {
    if scales.iter().any(|s| s.is_nan() || *s < 0.0) {
        return Err(CoarseError::InvalidParameter("scales must be ≥ 0".into()));
    }
    if scales.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CoarseError::InvalidParameter(
            "scales must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Shortest round-trip formatting; `inf` for the unbounded marker.
pub fn fmt_num(v: f64) -> String {
    if v.is_infinite() {
        "inf".into()
    } else if v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

/// `0, 1, …, n` as scales.
pub fn integer_scales(n: usize) -> Vec<f64> {
    (0..=n).map(|k| k as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup_snaps_upward() {
        let t = ControlTable::new(vec![(0.0, 1.0), (2.0, 3.0), (4.0, 5.0)]).unwrap();
        assert_eq!(t.at(0.0).unwrap(), 1.0);
        assert_eq!(t.at(0.5).unwrap(), 3.0);
        assert_eq!(t.at(2.0).unwrap(), 3.0);
        assert_eq!(t.at(4.0).unwrap(), 5.0);
        assert!(matches!(t.at(4.5), Err(CoarseError::OutOfRange { .. })));
    }

    #[test]
    fn unsorted_grid_rejected() {
        assert!(ControlTable::new(vec![(1.0, 0.0), (0.0, 0.0)]).is_err());
        assert!(ControlTable::new(vec![(0.0, -1.0)]).is_err());
    }

    #[test]
    fn padding_shifts_queries() {
        let t = ControlTable::from_fn(&integer_scales(6), |r| r + 1.0).unwrap();
        let p = t.padded(2.0);
        assert_eq!(p.scales(), &[0.0, 1.0, 2.0, 3.0, 4.0]);
        assert_eq!(p.at(1.0).unwrap(), 4.0);
    }

    #[test]
    fn csv_rows() {
        let t = ControlTable::from_fn(&[0.0, 1.5], |r| r).unwrap();
        let r = ControlTable::from_fn(&[0.0, 1.5], |_| 1.0).unwrap();
        assert_eq!(t.to_csv_rows("u", Some(&r)), "u,0,0,1,pass\nu,1.5,1.5,1,fail\n");
        assert_eq!(fmt_num(f64::INFINITY), "inf");
    }
}
