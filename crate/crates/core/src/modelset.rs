//! Finite patches of model sets `Λ(Γ, W)` and their point-counting
//! functions.
//!
//! A patch is a slab of the (infinite) model set, enumerated by the integer
//! parameter `n` and sorted by physical position. Coverage bookkeeping is
//! mandatory: the set is only complete on a sub-interval of physical space
//! (points near the slab ends may belong to indices outside the enumerated
//! range), and every counting query outside certified coverage errors.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::lattice::{LatticeBasis, SpecialFormLattice};
use crate::window::{MembershipStatus, Window};
use crate::{Error, Result, BOUNDARY_SNAP, DEFAULT_TOLERANCE};

/// Membership class of a patch point with respect to the window skin.
/// Points within the 1e-9 skin of the boundary are kept on both sides and
/// flagged, because scans near the boundary are ambiguous at float
/// precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointMembership {
    /// Strictly inside with margin at least the flag epsilon.
    Interior,
    /// Passes the half-open test but lies within the skin.
    BoundaryInside,
    /// Fails the half-open test but lies within the skin.
    BoundaryOutside,
}

/// Which points a count includes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CountMode {
    /// Exactly the half-open membership test (matches `chi`); the default.
    #[default]
    HalfOpen,
    /// Every stored point, including flagged outside-skin points.
    Inclusive,
    /// Interior points only.
    Exclusive,
}

/// One point of a patch with its lattice coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatchPoint {
    pub n: i64,
    pub m: Vec<i64>,
    pub p1: f64,
    pub p2: Vec<f64>,
    pub membership: PointMembership,
}

impl PatchPoint {
    pub fn near_boundary(&self) -> bool {
        self.membership != PointMembership::Interior
    }

    fn counted(&self, mode: CountMode) -> bool {
        match mode {
            CountMode::HalfOpen => self.membership != PointMembership::BoundaryOutside,
            CountMode::Inclusive => true,
            CountMode::Exclusive => self.membership == PointMembership::Interior,
        }
    }
}

/// Flag epsilon for boundary-skin detection in patches.
pub const PATCH_BOUNDARY_EPSILON: f64 = 1e-9;

/// A finite, sorted slab of a model set.
#[derive(Debug, Clone)]
pub struct Patch {
    points: Vec<PatchPoint>,
    /// Sorted physical positions of the half-open members (the model set
    /// proper); counting queries binary-search this list.
    p1_halfopen: Vec<f64>,
    n_range: (i64, i64),
    coverage: (f64, f64),
    min_gap: f64,
}

impl Patch {
    fn from_points(mut points: Vec<PatchPoint>, n_range: (i64, i64), coverage: (f64, f64)) -> Self {
        points.sort_by(|a, b| {
            a.p1.total_cmp(&b.p1)
                .then_with(|| a.n.cmp(&b.n))
                .then_with(|| a.m.cmp(&b.m))
        });
        let p1_halfopen: Vec<f64> = points
            .iter()
            .filter(|p| p.counted(CountMode::HalfOpen))
            .map(|p| p.p1)
            .collect();
        let min_gap = p1_halfopen
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min);
        Patch {
            points,
            p1_halfopen,
            n_range,
            coverage,
            min_gap,
        }
    }

    /// An arithmetic progression `start + j*step`, `j = 0..count`, as a
    /// patch (used as the reference set in bounded-distance tests).
    pub fn arithmetic_progression(start: f64, step: f64, count: usize) -> Result<Patch> {
        if step <= 0.0 || !step.is_finite() {
            return Err(Error::invalid("progression step must be positive"));
        }
        let points: Vec<PatchPoint> = (0..count)
            .map(|j| PatchPoint {
                n: j as i64,
                m: Vec::new(),
                p1: start + j as f64 * step,
                p2: Vec::new(),
                membership: PointMembership::Interior,
            })
            .collect();
        let coverage = (start, start + count as f64 * step);
        Ok(Patch::from_points(points, (0, count as i64), coverage))
    }

    pub fn points(&self) -> &[PatchPoint] {
        &self.points
    }

    pub fn n_range(&self) -> (i64, i64) {
        self.n_range
    }

    /// Physical interval on which the patch provably contains every point
    /// of the infinite model set.
    pub fn coverage(&self) -> (f64, f64) {
        self.coverage
    }

    /// Minimal gap between consecutive half-open members (positive for
    /// uniformly discrete sets).
    pub fn min_gap(&self) -> f64 {
        self.min_gap
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Sorted physical positions of the half-open members.
    pub fn positions(&self) -> &[f64] {
        &self.p1_halfopen
    }

    /// Point totals under the three counting conventions:
    /// `(half_open, inclusive, exclusive)`.
    pub fn counts(&self) -> (usize, usize, usize) {
        let exclusive = self
            .points
            .iter()
            .filter(|p| p.counted(CountMode::Exclusive))
            .count();
        (self.p1_halfopen.len(), self.points.len(), exclusive)
    }

    /// Half-open members with `n == index`.
    pub fn count_at_index(&self, n: i64) -> usize {
        self.points
            .iter()
            .filter(|p| p.n == n && p.counted(CountMode::HalfOpen))
            .count()
    }

    /// Signed counting function: `#(Λ ∩ [0, x))` for `x >= 0`, minus
    /// `#(Λ ∩ [x, 0))` for `x < 0`. Errors when `[min(0,x), max(0,x))`
    /// leaves certified coverage.
    pub fn nu(&self, x: f64) -> Result<i64> {
        let (lo, hi) = (x.min(0.0), x.max(0.0));
        if lo < self.coverage.0 || hi > self.coverage.1 {
            return Err(Error::CoverageExceeded(format!(
                "nu query [{lo}, {hi}) outside coverage [{:.6}, {:.6})",
                self.coverage.0, self.coverage.1
            )));
        }
        let below = |bound: f64| self.p1_halfopen.partition_point(|&p| p < bound) as i64;
        // For x >= 0 this is #[0, x); for x < 0 it is -#[x, 0).
        Ok(below(x) - below(0.0))
    }
}

/// Integer shifts `k` such that `base + k` lands in the bounding box
/// (expanded by the boundary snap).
pub(crate) fn shift_range(bb: (&[f64], &[f64]), base: &[f64]) -> Option<Vec<(i64, i64)>> {
    let (lo, hi) = bb;
    let mut ranges = Vec::with_capacity(base.len());
    for i in 0..base.len() {
        let k_lo = (lo[i] - base[i] - BOUNDARY_SNAP).ceil() as i64;
        let k_hi = (hi[i] - base[i] + BOUNDARY_SNAP).floor() as i64;
        if k_hi < k_lo {
            return None;
        }
        ranges.push((k_lo, k_hi));
    }
    Some(ranges)
}

fn classify(window: &Window, p2: &[f64]) -> Option<PointMembership> {
    let raw = window.indicator(p2);
    let verdict = window.contains(p2, PATCH_BOUNDARY_EPSILON);
    match (raw, verdict.status) {
        (true, MembershipStatus::NearBoundary) => Some(PointMembership::BoundaryInside),
        (true, _) => Some(PointMembership::Interior),
        (false, MembershipStatus::NearBoundary) => Some(PointMembership::BoundaryOutside),
        (false, _) => None,
    }
}

/// Largest value of `|beta^T y|` over the window's bounding box; the slack
/// between the index `n` and the physical position of a patch point.
fn index_slack(lat: &SpecialFormLattice, window: &Window) -> f64 {
    let (lo, hi) = window.bounding_box();
    let mut max_sum = 0.0;
    let mut min_sum = 0.0;
    for (b, (l, h)) in lat.beta().iter().zip(lo.iter().zip(&hi)) {
        max_sum += (b * l).max(b * h);
        min_sum += (b * l).min(b * h);
    }
    max_sum.abs().max(min_sum.abs())
}

/// Enumerates the patch of `Λ(Γ, W)` with index `n` in `[n_range.0,
/// n_range.1)`. Points whose internal projection falls within the 1e-9
/// window skin are included and flagged.
pub fn generate_patch(
    lat: &SpecialFormLattice,
    window: &Window,
    n_range: (i64, i64),
) -> Result<Patch> {
    if window.dim() != lat.dim() {
        return Err(Error::invalid("window dimension must match the lattice"));
    }
    let (n0, n1) = n_range;
    if n1 <= n0 {
        return Ok(Patch::from_points(Vec::new(), n_range, (0.0, 0.0)));
    }
    let bb = window.bounding_box();
    let points: Vec<PatchPoint> = (n0..n1)
        .into_par_iter()
        .map(|n| {
            let mut fiber = Vec::new();
            let base: Vec<f64> = lat.alpha().iter().map(|a| n as f64 * a).collect();
            let Some(ranges) = shift_range((&bb.0, &bb.1), &base) else {
                return fiber;
            };
            let mut m: Vec<i64> = ranges.iter().map(|r| r.0).collect();
            'outer: loop {
                let p2: Vec<f64> = base.iter().zip(&m).map(|(b, &mi)| b + mi as f64).collect();
                if let Some(membership) = classify(window, &p2) {
                    let p1 = n as f64 + lat.beta().iter().zip(&p2).map(|(b, y)| b * y).sum::<f64>();
                    fiber.push(PatchPoint {
                        n,
                        m: m.clone(),
                        p1,
                        p2,
                        membership,
                    });
                }
                for i in 0..m.len() {
                    m[i] += 1;
                    if m[i] <= ranges[i].1 {
                        continue 'outer;
                    }
                    m[i] = ranges[i].0;
                }
                break;
            }
            fiber
        })
        .flatten()
        .collect();

    let slack = index_slack(lat, window) + DEFAULT_TOLERANCE;
    let coverage = (n0 as f64 + slack, n1 as f64 - slack);
    Ok(Patch::from_points(points, n_range, coverage))
}

/// Patch enumeration for an explicit (not special-form) basis in `R x R^d`:
/// scans the integer coefficient box derived from the inverse basis applied
/// to `p1_box x bounding_box(W)`.
pub fn generate_patch_general(
    basis: &LatticeBasis,
    window: &Window,
    p1_box: (f64, f64),
) -> Result<Patch> {
    if basis.physical_dim() != 1 {
        return Err(Error::invalid(
            "patch enumeration requires physical dimension 1; use lift_window_points for general m",
        ));
    }
    if !basis.is_full() {
        return Err(Error::RankDeficient);
    }
    if window.dim() != basis.internal_dim() {
        return Err(Error::invalid("window dimension must match the lattice"));
    }
    let dim = basis.ambient_dim();
    let mat = nalgebra::DMatrix::from_fn(dim, dim, |r, c| basis.vectors()[c][r]);
    let svd = mat.clone().svd(false, false);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smin <= 0.0 || smax / smin > 1e12 {
        return Err(Error::DegenerateBasis);
    }
    let inv = mat.try_inverse().ok_or(Error::DegenerateBasis)?;

    // Interval arithmetic: coefficient bounds over p1_box x bbox(W).
    let (bb_lo, bb_hi) = window.bounding_box();
    let mut region = vec![(p1_box.0, p1_box.1)];
    region.extend(bb_lo.iter().zip(&bb_hi).map(|(&l, &h)| (l, h)));
    let mut coeff_box = Vec::with_capacity(dim);
    let mut size = 1u128;
    for r in 0..dim {
        let mut lo = 0.0;
        let mut hi = 0.0;
        for c in 0..dim {
            let (a, b) = region[c];
            let (x, y) = (inv[(r, c)] * a, inv[(r, c)] * b);
            lo += x.min(y);
            hi += x.max(y);
        }
        let lo = (lo - 1e-9).floor() as i64;
        let hi = (hi + 1e-9).ceil() as i64;
        coeff_box.push((lo, hi));
        size = size.saturating_mul((hi - lo + 1).max(1) as u128);
    }
    if size > 200_000_000 {
        return Err(Error::invalid("coefficient box too large to enumerate"));
    }

    let mut points = Vec::new();
    let mut coeffs: Vec<i64> = coeff_box.iter().map(|r| r.0).collect();
    'outer: loop {
        let point = basis.point(&coeffs);
        let p1 = point[0];
        if p1 >= p1_box.0 - BOUNDARY_SNAP && p1 < p1_box.1 - BOUNDARY_SNAP {
            if let Some(membership) = classify(window, basis.p2(&point)) {
                // Convention: the last coefficient is the index n, the rest
                // are the shift m (matches the special-form generator order).
                points.push(PatchPoint {
                    n: coeffs[dim - 1],
                    m: coeffs[..dim - 1].to_vec(),
                    p1,
                    p2: basis.p2(&point).to_vec(),
                    membership,
                });
            }
        }
        for i in 0..dim {
            coeffs[i] += 1;
            if coeffs[i] <= coeff_box[i].1 {
                continue 'outer;
            }
            coeffs[i] = coeff_box[i].0;
        }
        break;
    }
    let n_lo = points.iter().map(|p| p.n).min().unwrap_or(0);
    let n_hi = points.iter().map(|p| p.n).max().unwrap_or(0) + 1;
    Ok(Patch::from_points(points, (n_lo, n_hi), p1_box))
}

/// The counting-formula gap `g(N) = nu(Λ, N) - sum_{n<N} chi_W(n alpha)`
/// for `N = 1..=n_max`; bounded for every bounded window.
pub fn counting_formula_gap(
    lat: &SpecialFormLattice,
    window: &Window,
    n_max: u32,
) -> Result<Vec<i64>> {
    if n_max == 0 {
        return Err(Error::NonPositiveBound);
    }
    let slack = index_slack(lat, window).ceil() as i64 + 2;
    let patch = generate_patch(lat, window, (-slack, n_max as i64 + slack))?;
    let cov = patch.coverage();
    if cov.0 > 0.0 || cov.1 < n_max as f64 {
        return Err(Error::CoverageExceeded(
            "patch coverage does not reach n_max".into(),
        ));
    }
    let mut out = Vec::with_capacity(n_max as usize);
    let mut chi_sum: i64 = 0;
    for n in 0..n_max as i64 {
        let base: Vec<f64> = lat.alpha().iter().map(|a| n as f64 * a).collect();
        chi_sum += window.chi(&base) as i64;
        let nu = patch.nu((n + 1) as f64)?;
        out.push(nu - chi_sum);
    }
    Ok(out)
}
