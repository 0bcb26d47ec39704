//! Bounded regions of `R^d` with exact measure, margin-aware membership,
//! translation, and the `Z^d`-multiplicity function `chi`.
//!
//! Boundary convention: boxes and parallelepipeds are half-open (lower faces
//! in, upper faces out) so that translates of a fundamental domain partition
//! `R^d` exactly; simplices are closed. Coordinates within [`BOUNDARY_SNAP`]
//! of a face are treated as lying on the face before the rule applies.
//!
//! Shapes store a base point plus extent data, so [`Window::translate`]
//! moves only the base point and preserves [`Window::measure`] bit-exactly.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::{Error, Result, BOUNDARY_SNAP};

/// Outcome of a membership query with an epsilon margin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MembershipStatus {
    Inside,
    Outside,
    NearBoundary,
}

/// Membership verdict: `near_boundary` holds exactly when `margin < epsilon`
/// for the queried epsilon. `margin` is a lower bound on the distance from
/// the query point to the window boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MembershipVerdict {
    pub status: MembershipStatus,
    pub margin: f64,
}

/// A bounded region of `R^d`.
#[derive(Debug, Clone)]
pub struct Window {
    kind: WindowKind,
}

#[derive(Debug, Clone)]
enum WindowKind {
    /// Axis-aligned half-open box `[lo, lo + size)`.
    Box { lo: Vec<f64>, size: Vec<f64> },
    /// Half-open parallelepiped `origin + E * [0,1)^d`.
    Parallelepiped {
        origin: Vec<f64>,
        edges: DMatrix<f64>,
        inverse: DMatrix<f64>,
        /// Euclidean norms of the rows of `inverse` (gradients of the unit
        /// coordinates); plane distances divide by these.
        row_norms: Vec<f64>,
    },
    /// Finite union of closed d-simplices with pairwise disjoint interiors.
    SimplexUnion(Vec<Simplex>),
    /// Finite union of pairwise disjoint member windows.
    Union(Vec<Window>),
}

#[derive(Debug, Clone)]
struct Simplex {
    base: Vec<f64>,
    /// Columns are `v_i - v_0`, `i = 1..=d`.
    edges: DMatrix<f64>,
    inverse: DMatrix<f64>,
    /// `||grad lambda_i||` for `i = 0..=d` (index 0 is the facet opposite
    /// the base vertex).
    grad_norms: Vec<f64>,
    volume: f64,
}

/// JSON-facing window description. Field names are part of the CLI contract.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowConfig {
    Box {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    Parallelepiped {
        origin: Vec<f64>,
        edges: Vec<Vec<f64>>,
    },
    Simplices(Vec<Vec<Vec<f64>>>),
    Union(Vec<WindowConfig>),
}

fn check_finite(values: &[f64]) -> Result<()> {
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidWindow("coordinate is NaN".into()));
    }
    if values.iter().any(|v| v.is_infinite()) {
        return Err(Error::UnboundedWindow);
    }
    Ok(())
}

impl Window {
    /// Half-open axis box `[lo_i, hi_i)` per axis.
    pub fn axis_box(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::InvalidWindow(
                "box needs matching nonempty lo/hi".into(),
            ));
        }
        check_finite(&lo)?;
        check_finite(&hi)?;
        if lo.iter().zip(&hi).any(|(l, h)| h < l) {
            return Err(Error::InvalidWindow("box has hi < lo".into()));
        }
        let size = lo.iter().zip(&hi).map(|(l, h)| h - l).collect();
        Ok(Window {
            kind: WindowKind::Box { lo, size },
        })
    }

    /// The empty window in dimension `d` (a degenerate box).
    pub fn empty(d: usize) -> Self {
        Window {
            kind: WindowKind::Box {
                lo: vec![0.0; d],
                size: vec![0.0; d],
            },
        }
    }

    /// Half-open parallelepiped spanned by the edge vectors at `origin`.
    pub fn parallelepiped(origin: Vec<f64>, edge_vectors: Vec<Vec<f64>>) -> Result<Self> {
        let d = origin.len();
        if d == 0 || edge_vectors.len() != d || edge_vectors.iter().any(|e| e.len() != d) {
            return Err(Error::InvalidWindow(
                "parallelepiped needs d edge vectors of dimension d".into(),
            ));
        }
        check_finite(&origin)?;
        for e in &edge_vectors {
            check_finite(e)?;
        }
        // Edge vectors become columns of E.
        let edges = DMatrix::from_fn(d, d, |r, c| edge_vectors[c][r]);
        let inverse = edges
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidWindow("parallelepiped edges are singular".into()))?;
        let row_norms = (0..d).map(|r| inverse.row(r).norm()).collect();
        Ok(Window {
            kind: WindowKind::Parallelepiped {
                origin,
                edges,
                inverse,
                row_norms,
            },
        })
    }

    /// Union of closed d-simplices, each given by its `d + 1` vertices.
    /// Simplices must be d-dimensional with pairwise disjoint interiors
    /// (checked on a deterministic barycentric sample grid).
    pub fn simplex_union(simplices: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        if simplices.is_empty() {
            return Err(Error::InvalidWindow(
                "simplex union must be nonempty".into(),
            ));
        }
        let built: Vec<Simplex> = simplices
            .into_iter()
            .map(Simplex::new)
            .collect::<Result<_>>()?;
        let d = built[0].base.len();
        if built.iter().any(|s| s.base.len() != d) {
            return Err(Error::InvalidWindow("mixed simplex dimensions".into()));
        }
        for i in 0..built.len() {
            for j in i + 1..built.len() {
                if built[i].interiors_overlap(&built[j]) {
                    return Err(Error::InvalidWindow(format!(
                        "simplices {i} and {j} have overlapping interiors"
                    )));
                }
            }
        }
        Ok(Window {
            kind: WindowKind::SimplexUnion(built),
        })
    }

    /// Union of pairwise disjoint windows. Box/box pairs are checked
    /// exactly; other pairs are checked on a deterministic sample grid over
    /// the bounding-box intersection.
    pub fn union(members: Vec<Window>) -> Result<Self> {
        let w = Self::union_trusted(members)?;
        if let WindowKind::Union(members) = &w.kind {
            for i in 0..members.len() {
                for j in i + 1..members.len() {
                    if windows_overlap(&members[i], &members[j]) {
                        return Err(Error::InvalidWindow(format!(
                            "union members {i} and {j} overlap"
                        )));
                    }
                }
            }
        }
        Ok(w)
    }

    /// Union constructor without the pairwise disjointness scan, for callers
    /// that build members disjoint by construction (raster cell grids).
    pub(crate) fn union_trusted(members: Vec<Window>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidWindow("union must be nonempty".into()));
        }
        let d = members[0].dim();
        if members.iter().any(|m| m.dim() != d) {
            return Err(Error::InvalidWindow(
                "union members have mixed dimensions".into(),
            ));
        }
        Ok(Window {
            kind: WindowKind::Union(members),
        })
    }

    /// Ambient dimension `d`.
    pub fn dim(&self) -> usize {
        match &self.kind {
            WindowKind::Box { lo, .. } => lo.len(),
            WindowKind::Parallelepiped { origin, .. } => origin.len(),
            WindowKind::SimplexUnion(s) => s[0].base.len(),
            WindowKind::Union(m) => m[0].dim(),
        }
    }

    /// Axis-aligned bounding box `(lo, hi)`.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match &self.kind {
            WindowKind::Box { lo, size } => (
                lo.clone(),
                lo.iter().zip(size).map(|(l, s)| l + s).collect(),
            ),
            WindowKind::Parallelepiped { origin, edges, .. } => {
                let d = origin.len();
                let mut lo = origin.clone();
                let mut hi = origin.clone();
                for r in 0..d {
                    for c in 0..d {
                        let e = edges[(r, c)];
                        if e < 0.0 {
                            lo[r] += e;
                        } else {
                            hi[r] += e;
                        }
                    }
                }
                (lo, hi)
            }
            WindowKind::SimplexUnion(simplices) => {
                let d = simplices[0].base.len();
                let mut lo = vec![f64::INFINITY; d];
                let mut hi = vec![f64::NEG_INFINITY; d];
                for s in simplices {
                    for v in s.vertices() {
                        for i in 0..d {
                            lo[i] = lo[i].min(v[i]);
                            hi[i] = hi[i].max(v[i]);
                        }
                    }
                }
                (lo, hi)
            }
            WindowKind::Union(members) => {
                let d = members[0].dim();
                let mut lo = vec![f64::INFINITY; d];
                let mut hi = vec![f64::NEG_INFINITY; d];
                for m in members {
                    let (ml, mh) = m.bounding_box();
                    for i in 0..d {
                        lo[i] = lo[i].min(ml[i]);
                        hi[i] = hi[i].max(mh[i]);
                    }
                }
                (lo, hi)
            }
        }
    }

    /// Exact Lebesgue measure (closed form per shape; unions sum members).
    pub fn measure(&self) -> f64 {
        match &self.kind {
            WindowKind::Box { size, .. } => size.iter().product(),
            WindowKind::Parallelepiped { edges, .. } => edges.determinant().abs(),
            WindowKind::SimplexUnion(s) => s.iter().map(|s| s.volume).sum(),
            WindowKind::Union(m) => m.iter().map(|w| w.measure()).sum(),
        }
    }

    /// Exact half-open membership test (the indicator `1_W`). This is the
    /// convention used by [`Window::chi`] and by patch generation.
    pub fn indicator(&self, x: &[f64]) -> bool {
        assert_eq!(x.len(), self.dim(), "point dimension mismatch");
        match &self.kind {
            WindowKind::Box { lo, size } => lo
                .iter()
                .zip(size)
                .zip(x)
                .all(|((l, s), xi)| *xi >= l - BOUNDARY_SNAP && *xi < l + s - BOUNDARY_SNAP),
            WindowKind::Parallelepiped {
                origin,
                inverse,
                row_norms,
                ..
            } => {
                let u = local_coords(inverse, origin, x);
                u.iter().zip(row_norms).all(|(ui, rn)| {
                    let snap = BOUNDARY_SNAP * rn;
                    *ui >= -snap && *ui < 1.0 - snap
                })
            }
            WindowKind::SimplexUnion(simplices) => simplices
                .iter()
                .any(|s| s.min_plane_distance(x) >= -BOUNDARY_SNAP),
            WindowKind::Union(members) => members.iter().any(|m| m.indicator(x)),
        }
    }

    /// Membership with an epsilon margin. Status is `NearBoundary` whenever
    /// the query point is within `epsilon` of the window boundary, otherwise
    /// the half-open (simplices: closed) test decides inside/outside.
    pub fn contains(&self, x: &[f64], epsilon: f64) -> MembershipVerdict {
        assert!(epsilon >= 0.0, "epsilon must be nonnegative");
        let margin = self.boundary_margin(x);
        let status = if margin < epsilon {
            MembershipStatus::NearBoundary
        } else if self.indicator(x) {
            MembershipStatus::Inside
        } else {
            MembershipStatus::Outside
        };
        MembershipVerdict { status, margin }
    }

    /// Lower bound on the distance from `x` to the boundary of the window.
    fn boundary_margin(&self, x: &[f64]) -> f64 {
        match &self.kind {
            WindowKind::Box { lo, size } => {
                // A degenerate box is the empty set; it has no boundary.
                if size.iter().any(|&s| s <= 0.0) {
                    return f64::INFINITY;
                }
                let mut inside_min = f64::INFINITY;
                let mut outside_sq = 0.0;
                for ((l, s), xi) in lo.iter().zip(size).zip(x) {
                    let d_lo = xi - l;
                    let d_hi = (l + s) - xi;
                    if d_lo < 0.0 {
                        outside_sq += d_lo * d_lo;
                    } else if d_hi < 0.0 {
                        outside_sq += d_hi * d_hi;
                    }
                    inside_min = inside_min.min(d_lo).min(d_hi);
                }
                if outside_sq > 0.0 {
                    outside_sq.sqrt()
                } else {
                    inside_min.max(0.0)
                }
            }
            WindowKind::Parallelepiped {
                origin,
                inverse,
                row_norms,
                ..
            } => {
                let u = local_coords(inverse, origin, x);
                let mut inside_min = f64::INFINITY;
                let mut outside_max: f64 = 0.0;
                for (ui, rn) in u.iter().zip(row_norms) {
                    // Plane distances to the two faces normal to this row.
                    let d_lo = ui / rn;
                    let d_hi = (1.0 - ui) / rn;
                    inside_min = inside_min.min(d_lo).min(d_hi);
                    outside_max = outside_max.max(-d_lo).max(-d_hi);
                }
                if outside_max > 0.0 {
                    outside_max
                } else {
                    inside_min.max(0.0)
                }
            }
            WindowKind::SimplexUnion(simplices) => {
                // dist(x, boundary of union) >= min over simplex boundaries.
                simplices
                    .iter()
                    .map(|s| s.boundary_margin(x))
                    .fold(f64::INFINITY, f64::min)
            }
            WindowKind::Union(members) => members
                .iter()
                .map(|m| m.boundary_margin(x))
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Multiplicity function `chi_W(x) = sum over k in Z^d of 1_W(x + k)`,
    /// evaluated over the finitely many shifts landing in the bounding box.
    pub fn chi(&self, x: &[f64]) -> u32 {
        assert_eq!(x.len(), self.dim(), "point dimension mismatch");
        let (lo, hi) = self.bounding_box();
        let d = x.len();
        let mut ranges = Vec::with_capacity(d);
        for i in 0..d {
            let k_lo = (lo[i] - x[i] - BOUNDARY_SNAP).ceil() as i64;
            let k_hi = (hi[i] - x[i] + BOUNDARY_SNAP).floor() as i64;
            if k_hi < k_lo {
                return 0;
            }
            ranges.push((k_lo, k_hi));
        }
        let mut count = 0u32;
        let mut k: Vec<i64> = ranges.iter().map(|r| r.0).collect();
        let mut shifted = vec![0.0; d];
        'outer: loop {
            for i in 0..d {
                shifted[i] = x[i] + k[i] as f64;
            }
            if self.indicator(&shifted) {
                count += 1;
            }
            // Multi-index increment.
            for i in 0..d {
                k[i] += 1;
                if k[i] <= ranges[i].1 {
                    continue 'outer;
                }
                k[i] = ranges[i].0;
            }
            break;
        }
        count
    }

    /// Exact shift of the defining base data; measure is preserved
    /// bit-exactly because extents are stored separately from positions.
    pub fn translate(&self, v: &[f64]) -> Window {
        assert_eq!(v.len(), self.dim(), "translation dimension mismatch");
        let kind = match &self.kind {
            WindowKind::Box { lo, size } => WindowKind::Box {
                lo: lo.iter().zip(v).map(|(l, vi)| l + vi).collect(),
                size: size.clone(),
            },
            WindowKind::Parallelepiped {
                origin,
                edges,
                inverse,
                row_norms,
            } => WindowKind::Parallelepiped {
                origin: origin.iter().zip(v).map(|(o, vi)| o + vi).collect(),
                edges: edges.clone(),
                inverse: inverse.clone(),
                row_norms: row_norms.clone(),
            },
            WindowKind::SimplexUnion(simplices) => WindowKind::SimplexUnion(
                simplices
                    .iter()
                    .map(|s| Simplex {
                        base: s.base.iter().zip(v).map(|(b, vi)| b + vi).collect(),
                        edges: s.edges.clone(),
                        inverse: s.inverse.clone(),
                        grad_norms: s.grad_norms.clone(),
                        volume: s.volume,
                    })
                    .collect(),
            ),
            WindowKind::Union(members) => {
                WindowKind::Union(members.iter().map(|m| m.translate(v)).collect())
            }
        };
        Window { kind }
    }

    /// Build a window from its JSON-facing description.
    pub fn from_config(config: &WindowConfig) -> Result<Window> {
        match config {
            WindowConfig::Box { lo, hi } => Window::axis_box(lo.clone(), hi.clone()),
            WindowConfig::Parallelepiped { origin, edges } => {
                Window::parallelepiped(origin.clone(), edges.clone())
            }
            WindowConfig::Simplices(simplices) => Window::simplex_union(simplices.clone()),
            WindowConfig::Union(members) => {
                let members = members
                    .iter()
                    .map(Window::from_config)
                    .collect::<Result<Vec<_>>>()?;
                Window::union(members)
            }
        }
    }

    /// Serialize back to the JSON-facing description (positions baked in).
    pub fn to_config(&self) -> WindowConfig {
        match &self.kind {
            WindowKind::Box { lo, size } => WindowConfig::Box {
                lo: lo.clone(),
                hi: lo.iter().zip(size).map(|(l, s)| l + s).collect(),
            },
            WindowKind::Parallelepiped { origin, edges, .. } => WindowConfig::Parallelepiped {
                origin: origin.clone(),
                edges: (0..edges.ncols())
                    .map(|c| edges.column(c).iter().copied().collect())
                    .collect(),
            },
            WindowKind::SimplexUnion(simplices) => {
                WindowConfig::Simplices(simplices.iter().map(|s| s.vertices()).collect())
            }
            WindowKind::Union(members) => {
                WindowConfig::Union(members.iter().map(|m| m.to_config()).collect())
            }
        }
    }

    /// Compact identifier used in profile exports and manifests.
    pub fn id_string(&self) -> String {
        serde_json::to_string(&self.to_config()).unwrap_or_else(|_| "<window>".into())
    }
}

fn local_coords(inverse: &DMatrix<f64>, origin: &[f64], x: &[f64]) -> Vec<f64> {
    let d = origin.len();
    let mut u = vec![0.0; d];
    for r in 0..d {
        let mut acc = 0.0;
        for c in 0..d {
            acc += inverse[(r, c)] * (x[c] - origin[c]);
        }
        u[r] = acc;
    }
    u
}

impl Simplex {
    fn new(vertices: Vec<Vec<f64>>) -> Result<Self> {
        let d = vertices.first().map(|v| v.len()).unwrap_or(0);
        if d == 0 || vertices.len() != d + 1 || vertices.iter().any(|v| v.len() != d) {
            return Err(Error::InvalidWindow(
                "simplex needs d + 1 vertices of dimension d".into(),
            ));
        }
        for v in &vertices {
            check_finite(v)?;
        }
        let base = vertices[0].clone();
        let edges = DMatrix::from_fn(d, d, |r, c| vertices[c + 1][r] - base[r]);
        let det = edges.determinant();
        let scale: f64 = (0..d).map(|c| edges.column(c).norm()).product();
        if det.abs() <= 1e-12 * scale.max(1e-300) {
            return Err(Error::InvalidWindow("degenerate simplex".into()));
        }
        let inverse = edges.clone().try_inverse().unwrap();
        let mut grad_norms = Vec::with_capacity(d + 1);
        // lambda_0 = 1 - sum(u); its gradient is minus the column sums of
        // the inverse rows.
        let mut grad0 = vec![0.0; d];
        for r in 0..d {
            for c in 0..d {
                grad0[c] -= inverse[(r, c)];
            }
        }
        grad_norms.push(grad0.iter().map(|g| g * g).sum::<f64>().sqrt());
        for r in 0..d {
            grad_norms.push(inverse.row(r).norm());
        }
        let factorial: f64 = (1..=d).map(|k| k as f64).product();
        Ok(Simplex {
            base,
            edges,
            inverse,
            grad_norms,
            volume: det.abs() / factorial,
        })
    }

    fn vertices(&self) -> Vec<Vec<f64>> {
        let d = self.base.len();
        let mut out = vec![self.base.clone()];
        for c in 0..d {
            out.push((0..d).map(|r| self.base[r] + self.edges[(r, c)]).collect());
        }
        out
    }

    /// Signed distances to the facet planes, `lambda_i / ||grad lambda_i||`;
    /// all nonnegative exactly when the point is in the closed simplex.
    fn plane_distances(&self, x: &[f64]) -> Vec<f64> {
        let u = local_coords(&self.inverse, &self.base, x);
        let lambda0 = 1.0 - u.iter().sum::<f64>();
        let mut out = Vec::with_capacity(u.len() + 1);
        out.push(lambda0 / self.grad_norms[0]);
        for (i, ui) in u.iter().enumerate() {
            out.push(ui / self.grad_norms[i + 1]);
        }
        out
    }

    fn min_plane_distance(&self, x: &[f64]) -> f64 {
        self.plane_distances(x)
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }

    /// Lower bound on the distance from `x` to the simplex boundary.
    fn boundary_margin(&self, x: &[f64]) -> f64 {
        let s = self.plane_distances(x);
        let min = s.iter().copied().fold(f64::INFINITY, f64::min);
        if min >= 0.0 {
            min
        } else {
            s.iter().copied().map(|v| -v).fold(0.0, f64::max)
        }
    }

    /// Deterministic interior-overlap test: probes strictly interior
    /// barycentric grid points of each simplex against the other.
    fn interiors_overlap(&self, other: &Simplex) -> bool {
        // At least one interior point (the near-centroid) in any dimension.
        let grid = 6i64.max(self.base.len() as i64 + 2);
        let margin_tol = 1e-9;
        let probe = |s: &Simplex, t: &Simplex| -> bool {
            let d = s.base.len();
            for parts in positive_compositions(grid, d + 1) {
                let point: Vec<f64> = (0..d)
                    .map(|r| {
                        let mut acc = s.base[r] * (parts[0] as f64 / grid as f64);
                        for c in 0..d {
                            let v = s.base[r] + s.edges[(r, c)];
                            acc += v * (parts[c + 1] as f64 / grid as f64);
                        }
                        acc
                    })
                    .collect();
                if t.min_plane_distance(&point) > margin_tol {
                    return true;
                }
            }
            false
        };
        probe(self, other) || probe(other, self)
    }
}

/// All vectors of `parts` positive integers summing to `total`.
fn positive_compositions(total: i64, parts: usize) -> Vec<Vec<i64>> {
    fn rec(remaining: i64, slots: usize, prefix: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if slots == 1 {
            if remaining >= 1 {
                prefix.push(remaining);
                out.push(prefix.clone());
                prefix.pop();
            }
            return;
        }
        for v in 1..=(remaining - slots as i64 + 1) {
            prefix.push(v);
            rec(remaining - v, slots - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(total, parts, &mut Vec::new(), &mut out);
    out
}

/// Interior-overlap test used by union validation: exact for box/box pairs,
/// sample-based otherwise.
fn windows_overlap(a: &Window, b: &Window) -> bool {
    let (alo, ahi) = a.bounding_box();
    let (blo, bhi) = b.bounding_box();
    let d = alo.len();
    for i in 0..d {
        if alo[i] >= bhi[i] - BOUNDARY_SNAP || blo[i] >= ahi[i] - BOUNDARY_SNAP {
            return false;
        }
    }
    if let (WindowKind::Box { .. }, WindowKind::Box { .. }) = (&a.kind, &b.kind) {
        // Bounding boxes are the boxes themselves; open-interval overlap on
        // every axis means positive-measure intersection.
        return true;
    }
    // Sample the bounding-box intersection on a fixed grid.
    const GRID: usize = 8;
    let lo: Vec<f64> = (0..d).map(|i| alo[i].max(blo[i])).collect();
    let hi: Vec<f64> = (0..d).map(|i| ahi[i].min(bhi[i])).collect();
    let mut idx = vec![0usize; d];
    let mut point = vec![0.0; d];
    'outer: loop {
        for i in 0..d {
            let t = (idx[i] as f64 + 0.5) / GRID as f64;
            point[i] = lo[i] + t * (hi[i] - lo[i]);
        }
        if a.indicator(&point)
            && b.indicator(&point)
            && a.boundary_margin(&point) > 1e-9
            && b.boundary_margin(&point) > 1e-9
        {
            return true;
        }
        for slot in idx.iter_mut() {
            *slot += 1;
            if *slot < GRID {
                continue 'outer;
            }
            *slot = 0;
        }
        break;
    }
    false
}
