//! The cone `⅁(T) = T × {1, 2, …}` with `d((x,i),(y,j)) = sqrt(i² + j² − (2 − d_T(x,y)²)·i·j)`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_rational::Ratio;
use serde::Serialize;

use crate::error::{CoarseError, Result};
use crate::metric::{validate_metric, ValidationReport, Violation};
use crate::space::{cone_formula, FiniteMetricSpace, TOL};

/// Exact interval parameter in `[0, 1]`.
pub type Param = Ratio<u64>;

pub fn param_label(t: &Param) -> String {
    if *t.denom() == 1 {
        t.numer().to_string()
    } else {
        format!("{}/{}", t.numer(), t.denom())
    }
}

pub fn parse_param(s: &str) -> Result<Param> {
    let bad = || CoarseError::Parse(format!("bad parameter `{s}`"));
    let t = match s.split_once('/') {
        Some((a, b)) => {
            let (a, b): (u64, u64) = (
                a.trim().parse().map_err(|_| bad())?,
                b.trim().parse().map_err(|_| bad())?,
            );
            if b == 0 {
                return Err(bad());
            }
            Param::new(a, b)
        }
        None => Param::from_integer(s.trim().parse().map_err(|_| bad())?),
    };
    if t > Param::from_integer(1) {
        return Err(bad());
    }
    Ok(t)
}

pub fn param_f64(t: &Param) -> f64 {
    *t.numer() as f64 / *t.denom() as f64
}

/// `d((x, i), (y, j))` on the cone over `base`.
pub fn cone_metric(base: &FiniteMetricSpace, a: (usize, u32), b: (usize, u32)) -> Result<f64> {
    if a.1 == 0 || b.1 == 0 {
        return Err(CoarseError::ZeroLevel);
    }
    base.check_index(a.0)?;
    base.check_index(b.0)?;
    Ok(cone_formula(base.dist(a.0, b.0), a.1, b.1))
}

/// Which parameters of the unit interval sit on each level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Resolution {
    /// `{0, 1/i, …, 1}` on level `i`.
    Refined,
    /// `{0, 1/m, …, 1}` on every level.
    Fixed(u64),
}

impl FromStr for Resolution {
    type Err = CoarseError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "refined" => Ok(Self::Refined),
            other => match other.strip_prefix("fixed:").map(str::parse::<u64>) {
                Some(Ok(m)) if m >= 1 => Ok(Self::Fixed(m)),
                _ => Err(CoarseError::Parse(format!(
                    "resolution must be `refined` or `fixed:M`, got `{other}`"
                ))),
            },
        }
    }
}

impl fmt::Display for Resolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Refined => f.write_str("refined"),
            Self::Fixed(m) => write!(f, "fixed:{m}"),
        }
    }
}

impl Resolution {
    pub fn grid(self, level: u32) -> Vec<Param> {
        let den = match self {
            Self::Refined => level as u64,
            Self::Fixed(m) => m,
        };
        (0..=den).map(|k| Param::new(k, den)).collect()
    }
}

/// A built cone: the structured space plus, for interval bases, the exact
/// parameter behind each base point.
#[derive(Debug, Clone)]
pub struct ConeSpace {
    pub space: Arc<FiniteMetricSpace>,
    pub base: Arc<FiniteMetricSpace>,
    pub levels: u32,
    /// Exact parameters of the base points (interval cones only).
    pub params: Option<Vec<Param>>,
    pub resolution: Option<Resolution>,
}

impl ConeSpace {
    pub fn len(&self) -> usize {
        self.space.len()
    }

    pub fn is_empty(&self) -> bool {
        self.space.is_empty()
    }

    /// `(base point, level)` of cone point `k`.
    pub fn point(&self, k: usize) -> (usize, u32) {
        self.space.cone_point(k).expect("cone space")
    }

    /// Exact parameter of cone point `k` on an interval cone.
    pub fn param(&self, k: usize) -> Option<Param> {
        let (b, _) = self.point(k);
        self.params.as_ref().map(|p| p[b])
    }

    /// Base index of parameter `t`, if present.
    pub fn base_index(&self, t: &Param) -> Option<usize> {
        self.params.as_ref()?.binary_search(t).ok()
    }

    pub fn index(&self, t: &Param, level: u32) -> Option<usize> {
        self.space.cone_index(self.base_index(t)?, level)
    }

    pub fn validate(&self) -> ValidationReport {
        validate_metric(&self.space)
    }

    /// First triangle violation as an error.
    pub fn check_triangles(&self) -> Result<()> {
        let report = self.validate();
        match report
            .violations
            .iter()
            .find(|v| matches!(v, Violation::Triangle { .. }))
        {
            Some(&Violation::Triangle { x, z, via }) => Err(CoarseError::TriangleFailure(
                self.space.label(x).into_owned(),
                self.space.label(z).into_owned(),
                self.space.label(via).into_owned(),
            )),
            _ => Ok(()),
        }
    }

    /// The basepoint `(0, 1)` of an interval cone.
    pub fn apex_point(&self) -> Option<usize> {
        self.index(&Param::from_integer(0), 1)
    }
}

/// Cone over the unit interval with levels `1..=n`.
///
/// No metric check is made here: the formula fails the triangle inequality
/// on this base (e.g. at `0@1`, `1/2@2`, `2/3@3`), so callers that need a
/// verdict use [`ConeSpace::validate`].
pub fn interval_cone(n: u32, resolution: Resolution) -> Result<ConeSpace> {
    if n == 0 {
        return Err(CoarseError::InvalidParameter("cone needs N ≥ 1".into()));
    }
    if resolution == Resolution::Fixed(0) {
        return Err(CoarseError::InvalidParameter("grid denominator must be ≥ 1".into()));
    }
    let mut all = BTreeSet::new();
    for level in 1..=n {
        all.extend(resolution.grid(level));
    }
    let params: Vec<Param> = all.into_iter().collect();
    let base = Arc::new(FiniteMetricSpace::from_line(
        params.iter().map(param_label).collect(),
        params.iter().map(param_f64).collect(),
    )?);
    let mut points = Vec::new();
    for level in 1..=n {
        for t in resolution.grid(level) {
            let b = params.binary_search(&t).expect("grid parameters were collected");
            points.push((b as u32, level));
        }
    }
    let space = Arc::new(FiniteMetricSpace::from_cone(base.clone(), points)?);
    Ok(ConeSpace {
        space,
        base,
        levels: n,
        params: Some(params),
        resolution: Some(resolution),
    })
}

/// Cone over an arbitrary base with every base point on levels `1..=n`,
/// checked by an exhaustive triangle scan and rejected with a witness triple
/// on failure.
pub fn build_cone(base: Arc<FiniteMetricSpace>, n: u32) -> Result<ConeSpace> {
    if n == 0 {
        return Err(CoarseError::InvalidParameter("cone needs N ≥ 1".into()));
    }
    let points = (1..=n)
        .flat_map(|l| (0..base.len() as u32).map(move |b| (b, l)))
        .collect();
    let space = Arc::new(FiniteMetricSpace::from_cone(base.clone(), points)?);
    let cone = ConeSpace {
        space,
        base,
        levels: n,
        params: None,
        resolution: None,
    };
    cone.check_triangles()?;
    Ok(cone)
}

/// A pair of cone points given by base index and level.
pub type ConePair = ((usize, u32), (usize, u32));

#[derive(Debug, Clone, Serialize)]
pub struct EntourageFit {
    pub passes: bool,
    /// `max |n_i − m_i|`.
    pub level_spread: f64,
    /// Least `c` with `d_T(x_i, y_i) ≤ c / n_i` for all pairs.
    pub c: f64,
}

/// Tests whether a finite pair sequence looks like an entourage of the cone:
/// bounded level differences and `d_T ≤ c/n` for one `c`. Both quantities
/// are fitted on the lower and upper halves of the level range; the check
/// passes when neither grows from the lower to the upper half.
pub fn cone_entourage_check(base: &FiniteMetricSpace, pairs: &[ConePair]) -> Result<EntourageFit> {
    if pairs.is_empty() {
        return Err(CoarseError::InvalidParameter("empty pair sequence".into()));
    }
    let mut rows = Vec::with_capacity(pairs.len());
    for &((x, n), (y, m)) in pairs {
        if n == 0 || m == 0 {
            return Err(CoarseError::ZeroLevel);
        }
        base.check_index(x)?;
        base.check_index(y)?;
        let spread = (n as f64 - m as f64).abs();
        rows.push((n, spread, n as f64 * base.dist(x, y)));
    }
    let lo = rows.iter().map(|r| r.0).min().unwrap();
    let hi = rows.iter().map(|r| r.0).max().unwrap();
    let mid = (lo as f64 + hi as f64) / 2.0;
    let half_max = |upper: bool, pick: fn(&(u32, f64, f64)) -> f64| {
        rows.iter()
            .filter(|r| (r.0 as f64 > mid) == upper)
            .map(pick)
            .fold(0.0, f64::max)
    };
    let grows = |pick: fn(&(u32, f64, f64)) -> f64| half_max(true, pick) > half_max(false, pick) + TOL;
    let passes = lo == hi || (!grows(|r| r.1) && !grows(|r| r.2));
    Ok(EntourageFit {
        passes,
        level_spread: rows.iter().map(|r| r.1).fold(0.0, f64::max),
        c: rows.iter().map(|r| r.2).fold(0.0, f64::max),
    })
}
