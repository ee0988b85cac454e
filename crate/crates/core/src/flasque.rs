//! Flasque certification and the homotopy equivalence `X × ℤ₊ ≃ X` built
//! from a shift map.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::cone::{interval_cone, Param, Resolution};
use crate::control::ControlTable;
use crate::error::{CoarseError, Result};
use crate::generators::zplus;
use crate::homotopy::{restricts_to, HomotopyDomain};
use crate::maps::{closeness_constant, compose, same_space, uniformity_control, MapWitness};
use crate::product::cartesian_product;
use crate::space::{Combiner, FiniteMetricSpace, TOL};

/// A shift `φ : X → X` with its iterates `φ^0, φ^1, …` tabulated until they
/// stabilize or the cap is reached.
#[derive(Debug, Clone)]
pub struct FlasqueWitness {
    shift: MapWitness,
    cap: usize,
    iterates: Vec<Vec<u32>>,
    stable: bool,
}

impl FlasqueWitness {
    pub fn new(shift: MapWitness, cap: usize) -> Result<Self> {
        if !same_space(shift.source(), shift.target()) {
            return Err(CoarseError::SpaceMismatch("shift must map X to itself".into()));
        }
        let mut iterates: Vec<Vec<u32>> = vec![(0..shift.source().len() as u32).collect()];
        let mut stable = false;
        while iterates.len() <= cap {
            let last = iterates.last().unwrap();
            let next: Vec<u32> = last.iter().map(|&x| shift.apply(x as usize) as u32).collect();
            if next == *last {
                stable = true;
                break;
            }
            iterates.push(next);
        }
        Ok(Self {
            shift,
            cap,
            iterates,
            stable,
        })
    }

    pub fn space(&self) -> &Arc<FiniteMetricSpace> {
        self.shift.source()
    }

    pub fn shift(&self) -> &MapWitness {
        &self.shift
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    /// Whether `φ^{n+1} = φ^n` for the last tabulated `n`.
    pub fn is_stable(&self) -> bool {
        self.stable
    }

    /// Number of distinct iterates beyond the identity.
    pub fn depth(&self) -> usize {
        self.iterates.len() - 1
    }

    /// `φ^n(x)`.
    pub fn iterate(&self, n: usize, x: usize) -> Result<usize> {
        Ok(self.row(n)?[x] as usize)
    }

    fn row(&self, n: usize) -> Result<&[u32]> {
        match self.iterates.get(n) {
            Some(r) => Ok(r),
            None if self.stable => Ok(self.iterates.last().unwrap()),
            None => Err(CoarseError::IterateCap(self.cap)),
        }
    }

    pub fn iterate_map(&self, n: usize) -> Result<MapWitness> {
        let map = self.row(n)?.iter().map(|&y| y as usize).collect();
        MapWitness::new(self.space().clone(), self.space().clone(), map)
    }

    /// Least `n` with `φ^n(X) ∩ set = ∅`. Images of iterates are nested, so
    /// the condition then holds for every larger `n` too. `Err` carries a
    /// point whose iterates never leave the set.
    pub fn escape_index(&self, set: &[usize]) -> Result<std::result::Result<usize, usize>> {
        let mut inside = vec![false; self.space().len()];
        for &b in set {
            inside[self.space().check_index(b)?] = true;
        }
        for (n, row) in self.iterates.iter().enumerate() {
            if !row.iter().any(|&y| inside[y as usize]) {
                return Ok(Ok(n));
            }
        }
        if !self.stable {
            return Err(CoarseError::IterateCap(self.cap));
        }
        let last = self.iterates.last().unwrap();
        let x = (0..last.len()).find(|&x| inside[last[x] as usize]).unwrap();
        Ok(Err(x))
    }
}

/// `φ(n) = min(n + 1, N)` on `zplus(N)`.
pub fn zplus_shift(n: usize) -> Result<FlasqueWitness> {
    let x = Arc::new(zplus(n));
    let shift = MapWitness::from_fn(x.clone(), x, |a| (a + 1).min(n))?;
    FlasqueWitness::new(shift, n + 1)
}

/// `φ(a, b) = (a + 1, b + 1)`, clamped, on `zplus(N)²` with the max metric.
pub fn zplus2_shift(n: usize) -> Result<FlasqueWitness> {
    let z = Arc::new(zplus(n));
    let x = Arc::new(cartesian_product(z.clone(), z, Combiner::Max));
    let xs = x.clone();
    let shift = MapWitness::from_fn(x.clone(), x, |k| {
        let (a, b) = xs.pair(k).unwrap();
        xs.pair_index((a + 1).min(n), (b + 1).min(n)).unwrap()
    })?;
    FlasqueWitness::new(shift, n + 1)
}

#[derive(Debug, Clone, Serialize)]
pub struct EscapeEntry {
    pub center: String,
    pub radius: f64,
    /// `N_B`, or `None` when the iterates never leave the ball.
    pub escape: Option<usize>,
    pub witness: Option<String>,
}

#[derive(Debug, Clone)]
pub struct FlasqueLevel {
    pub size: usize,
    pub closeness: f64,
    /// `sup_n Φ_{φ^n}`.
    pub iterate_union: ControlTable,
}

#[derive(Debug, Clone)]
pub struct FlasqueCertificate {
    pub levels: Vec<FlasqueLevel>,
    /// Escape table at the top level.
    pub escapes: Vec<EscapeEntry>,
    /// Closeness and iterate-union control agree at the two largest levels.
    pub stable: bool,
}

impl FlasqueCertificate {
    pub fn passes(&self) -> bool {
        self.stable && self.escapes.iter().all(|e| e.escape.is_some())
    }

    pub fn top(&self) -> &FlasqueLevel {
        self.levels.last().unwrap()
    }
}

/// `sup_n` of the uniformity controls of all iterates.
pub fn iterate_union_control(w: &FlasqueWitness, scales: &[f64]) -> Result<ControlTable> {
    let tables = (0..=w.depth())
        .into_par_iter()
        .map(|n| uniformity_control(&w.iterate_map(n)?, scales))
        .collect::<Result<Vec<_>>>()?;
    let mut acc = tables[0].clone();
    for t in &tables[1..] {
        acc = acc.pointwise_max(t)?;
    }
    Ok(acc)
}

/// Certifies a tower of shifts. `balls` are `(center label, radius)` pairs
/// tested at the top level.
pub fn certify_flasque(
    tower: &[FlasqueWitness],
    balls: &[(String, f64)],
    scales: &[f64],
) -> Result<FlasqueCertificate> {
    let top = tower
        .last()
        .ok_or_else(|| CoarseError::InvalidTower("no levels".into()))?;
    let levels = tower
        .iter()
        .map(|w| {
            let id = MapWitness::identity(w.space().clone());
            Ok(FlasqueLevel {
                size: w.space().len(),
                closeness: closeness_constant(w.shift(), &id)?,
                iterate_union: iterate_union_control(w, scales)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let x = top.space();
    let escapes = balls
        .iter()
        .map(|(label, radius)| {
            let c = x.index_of(label)?;
            let ball: Vec<usize> = (0..x.len()).filter(|&y| x.dist(c, y) <= radius + TOL).collect();
            let (escape, witness) = match top.escape_index(&ball)? {
                Ok(n) => (Some(n), None),
                Err(p) => (None, Some(x.label(p).into_owned())),
            };
            Ok(EscapeEntry {
                center: label.clone(),
                radius: *radius,
                escape,
                witness,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let stable = match &levels[..] {
        [.., a, b] => (a.closeness - b.closeness).abs() <= TOL && a.iterate_union.agrees_with(&b.iterate_union, TOL),
        _ => true,
    };
    Ok(FlasqueCertificate {
        levels,
        escapes,
        stable,
    })
}

/// `(φ^{⌊t·i⌋}(x), ⌊(1 − t)·i⌋)`.
pub fn flasque_value(w: &FlasqueWitness, x: usize, i: u64, t: &Param) -> Result<(usize, u64)> {
    let zero = Param::from_integer(0);
    let one = Param::from_integer(1);
    if *t < zero || *t > one {
        return Err(CoarseError::InvalidParameter("t must lie in [0, 1]".into()));
    }
    let i_r = Param::from_integer(i);
    let n = (t * i_r).floor().to_integer();
    let m = ((one - t) * i_r).floor().to_integer();
    Ok((w.iterate(n as usize, x)?, m))
}

/// `X × zplus(m)` with the max metric.
pub fn with_ray(w: &FlasqueWitness, m: usize) -> Arc<FiniteMetricSpace> {
    Arc::new(cartesian_product(w.space().clone(), Arc::new(zplus(m)), Combiner::Max))
}

/// `(X × zplus(m)) ∗ ⅁([0,1])` based at `((p, 0), 0@1)`, with a refined
/// interval cone of the given depth.
pub fn flasque_domain(w: &FlasqueWitness, p: usize, m: usize, levels: u32, r: f64) -> Result<HomotopyDomain> {
    let xz = with_ray(w, m);
    let base = xz.pair_index(w.space().check_index(p)?, 0).unwrap();
    HomotopyDomain::new(xz, base, interval_cone(levels, Resolution::Refined)?, r)
}

/// `Φ(x, i) = φ^i(x)`.
pub fn collapse_map(w: &FlasqueWitness, xz: &Arc<FiniteMetricSpace>) -> Result<MapWitness> {
    let map = (0..xz.len())
        .map(|k| {
            let (x, i) = xz.pair(k).unwrap();
            w.iterate(i, x)
        })
        .collect::<Result<Vec<_>>>()?;
    MapWitness::new(xz.clone(), w.space().clone(), map)
}

/// `i₀(x) = (x, 0)`.
pub fn zero_section(w: &FlasqueWitness, xz: &Arc<FiniteMetricSpace>) -> Result<MapWitness> {
    MapWitness::from_fn(w.space().clone(), xz.clone(), |x| xz.pair_index(x, 0).unwrap())
}

#[derive(Debug, Clone)]
pub struct FlasqueHomotopyReport {
    /// `h` restricted to `t = 0` is the identity.
    pub starts_at_identity: bool,
    /// `h` restricted to `t = 1` is `i₀ ∘ Φ`.
    pub ends_at_collapse: bool,
    /// `Φ ∘ i₀ = id`.
    pub left_inverse: bool,
    /// `max (|⌊(1−t)i⌋ − ⌊(1−s)j⌋| − |i − j|)` over domain pairs at distance ≤ 1.
    pub ray_gap: f64,
    /// Largest `ℤ₊` coordinate in `h⁻¹(B)` for each tested ball.
    pub preimage_heights: Vec<usize>,
    /// `max_m (N_{B_m} + m)` for each tested ball.
    pub height_bounds: Vec<usize>,
    pub uniformity: ControlTable,
}

impl FlasqueHomotopyReport {
    pub fn endpoints_hold(&self) -> bool {
        self.starts_at_identity && self.ends_at_collapse && self.left_inverse
    }

    pub fn ray_gap_holds(&self) -> bool {
        self.ray_gap <= 2.0 + TOL
    }

    pub fn properness_holds(&self) -> bool {
        self.preimage_heights
            .iter()
            .zip(&self.height_bounds)
            .all(|(h, b)| h <= b)
    }
}

fn check_ray_factor(w: &FlasqueWitness, xz: &FiniteMetricSpace) -> Result<usize> {
    let (left, right, combiner) = xz
        .factors()
        .ok_or_else(|| CoarseError::SpaceMismatch("domain must be X × ℤ₊".into()))?;
    let m = right.len().saturating_sub(1);
    if !same_space(left, w.space()) || !same_space(right, &zplus(m)) || combiner != Combiner::Max {
        return Err(CoarseError::SpaceMismatch(
            "domain must be X × zplus(m) with the max metric".into(),
        ));
    }
    Ok(m)
}

/// `h((x, i), (t, j)) = (φ^{⌊t·i⌋}(x), ⌊(1 − t)·i⌋)` on the domain, with its
/// endpoint, ray-factor, and properness checks. `radii` are ball radii around
/// the domain's basepoint in `X × ℤ₊`.
pub fn flasque_homotopy(
    w: &FlasqueWitness,
    dom: &HomotopyDomain,
    radii: &[f64],
    scales: &[f64],
) -> Result<(MapWitness, FlasqueHomotopyReport)> {
    let xz = dom.x().clone();
    let m_top = check_ray_factor(w, &xz)?;
    let values = (0..dom.len())
        .map(|k| {
            let (a, t, _) = dom.point(k);
            let (x, i) = xz.pair(a).unwrap();
            flasque_value(w, x, i as u64, &t)
        })
        .collect::<Result<Vec<_>>>()?;
    let map = values
        .iter()
        .map(|&(y, m)| xz.pair_index(y, m as usize).unwrap())
        .collect();
    let h = MapWitness::new(dom.space().clone(), xz.clone(), map)?;

    let collapse = collapse_map(w, &xz)?;
    let section = zero_section(w, &xz)?;
    let starts_at_identity = restricts_to(&h, dom, &Param::from_integer(0), &MapWitness::identity(xz.clone()));
    let ends_at_collapse = restricts_to(&h, dom, &Param::from_integer(1), &compose(&collapse, &section)?);
    let left_inverse = compose(&section, &collapse)?.map() == MapWitness::identity(w.space().clone()).map();

    let ray_gap = dom.space().fold_pairs_within(
        1.0,
        || f64::NEG_INFINITY,
        |acc, a, b, _| {
            let i = xz.pair(dom.point(a).0).unwrap().1 as f64;
            let j = xz.pair(dom.point(b).0).unwrap().1 as f64;
            let gap = (values[a].1 as f64 - values[b].1 as f64).abs() - (i - j).abs();
            *acc = acc.max(gap);
        },
        f64::max,
    );

    let mut preimage_heights = Vec::with_capacity(radii.len());
    let mut height_bounds = Vec::with_capacity(radii.len());
    for &r in radii {
        let inside: Vec<bool> = (0..xz.len()).map(|k| xz.dist(k, dom.prod.p) <= r + TOL).collect();
        let height = (0..dom.len())
            .filter(|&k| inside[h.apply(k)])
            .map(|k| xz.pair(dom.point(k).0).unwrap().1)
            .max()
            .unwrap_or(0);
        let mut bound = 0;
        for m in 0..=m_top {
            let slice: Vec<usize> = (0..w.space().len())
                .filter(|&x| inside[xz.pair_index(x, m).unwrap()])
                .collect();
            if slice.is_empty() {
                continue;
            }
            match w.escape_index(&slice)? {
                Ok(n) => bound = bound.max(n + m),
                Err(_) => bound = usize::MAX,
            }
        }
        preimage_heights.push(height);
        height_bounds.push(bound);
    }

    let uniformity = uniformity_control(&h, scales)?;
    Ok((
        h,
        FlasqueHomotopyReport {
            starts_at_identity,
            ends_at_collapse,
            left_inverse,
            ray_gap,
            preimage_heights,
            height_bounds,
            uniformity,
        },
    ))
}

#[derive(Debug, Clone)]
pub struct EquivalenceControls {
    pub size: usize,
    /// Uniformity of `Φ : X × ℤ₊ → X`.
    pub collapse: ControlTable,
    /// Uniformity of `i₀ : X → X × ℤ₊`.
    pub section: ControlTable,
    pub left_inverse: bool,
}

/// Controls of `Φ` and `i₀` for `X × zplus(|X|-scale)`, with `m` ray points.
pub fn equivalence_controls(w: &FlasqueWitness, m: usize, scales: &[f64]) -> Result<EquivalenceControls> {
    let xz = with_ray(w, m);
    let collapse = collapse_map(w, &xz)?;
    let section = zero_section(w, &xz)?;
    Ok(EquivalenceControls {
        size: xz.len(),
        left_inverse: compose(&section, &collapse)?.map() == MapWitness::identity(w.space().clone()).map(),
        collapse: uniformity_control(&collapse, scales)?,
        section: uniformity_control(&section, scales)?,
    })
}

/// Whether the two largest levels report identical controls.
pub fn equivalence_stable(levels: &[EquivalenceControls]) -> bool {
    match levels {
        [.., a, b] => {
            a.left_inverse
                && b.left_inverse
                && a.collapse.agrees_with(&b.collapse, TOL)
                && a.section.agrees_with(&b.section, TOL)
        }
        [a] => a.left_inverse,
        [] => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::integer_scales;

    #[test]
    fn zplus_shift_certificate() {
        let tower = vec![zplus_shift(64).unwrap(), zplus_shift(128).unwrap()];
        let balls: Vec<(String, f64)> = (0..6).map(|k| ("0".to_string(), k as f64)).collect();
        let scales = integer_scales(6);
        let cert = certify_flasque(&tower, &balls, &scales).unwrap();
        assert!(cert.passes());
        assert_eq!(cert.top().closeness, 1.0);
        for (k, e) in cert.escapes.iter().enumerate() {
            assert_eq!(e.escape, Some(k + 1));
        }
        assert_eq!(cert.top().iterate_union.bounds(), &scales[..]);
    }

    #[test]
    fn identity_never_escapes() {
        let x = Arc::new(zplus(10));
        let w = FlasqueWitness::new(MapWitness::identity(x), 5).unwrap();
        let cert = certify_flasque(&[w], &[("3".into(), 1.0)], &[0.0, 1.0]).unwrap();
        assert!(!cert.passes());
        assert_eq!(cert.escapes[0].witness.as_deref(), Some("2"));
    }

    #[test]
    fn cycling_shift_hits_the_cap() {
        let x = Arc::new(zplus(3));
        let shift = MapWitness::from_fn(x.clone(), x, |a| (a + 1) % 4).unwrap();
        let w = FlasqueWitness::new(shift, 10).unwrap();
        assert!(matches!(w.iterate(11, 0), Err(CoarseError::IterateCap(10))));
        assert!(matches!(w.escape_index(&[0]), Err(CoarseError::IterateCap(10))));
    }

    #[test]
    fn zplus2_is_flasque() {
        let tower = vec![zplus2_shift(16).unwrap(), zplus2_shift(24).unwrap()];
        let balls = vec![("0|0".to_string(), 3.0)];
        let cert = certify_flasque(&tower, &balls, &integer_scales(3)).unwrap();
        assert!(cert.passes());
        assert_eq!(cert.escapes[0].escape, Some(4));
    }

    #[test]
    fn formula_values() {
        let w = zplus_shift(40).unwrap();
        assert_eq!(flasque_value(&w, 5, 8, &Param::new(1, 2)).unwrap(), (9, 4));
        assert_eq!(flasque_value(&w, 5, 8, &Param::from_integer(0)).unwrap(), (5, 8));
        assert_eq!(flasque_value(&w, 5, 8, &Param::from_integer(1)).unwrap(), (13, 0));
        assert_eq!(flasque_value(&w, 2, 7, &Param::new(1, 3)).unwrap(), (4, 4));
    }

    #[test]
    fn homotopy_report_on_small_zplus() {
        let w = zplus_shift(8).unwrap();
        let dom = flasque_domain(&w, 0, 8, 10, 1.0).unwrap();
        let (h, rep) = flasque_homotopy(&w, &dom, &[0.0, 1.0, 2.0, 3.0], &integer_scales(2)).unwrap();
        assert_eq!(h.source().len(), dom.len());
        assert!(rep.endpoints_hold());
        assert!(rep.ray_gap_holds());
        assert!(
            rep.properness_holds(),
            "{:?} vs {:?}",
            rep.preimage_heights,
            rep.height_bounds
        );
        let eq: Vec<_> = [16, 32]
            .iter()
            .map(|&n| equivalence_controls(&zplus_shift(n).unwrap(), n, &integer_scales(4)).unwrap())
            .collect();
        assert!(equivalence_stable(&eq));
        assert_eq!(eq[1].collapse.bounds(), &[0.0, 2.0, 4.0, 6.0, 8.0]);
    }
}
