//! Finite bipartite matching with Hall-condition witnesses, bounded-distance
//! matching of patches, counting-difference tests, and the orbit-enumeration
//! construction pairing two windows along a rotation orbit.

use std::collections::{BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::modelset::{shift_range, Patch};
use crate::window::Window;
use crate::{Error, GroupElement, Result, DEFAULT_TOLERANCE};

/// Largest |e| tried when re-deriving displacement labels by scanning.
pub const E_SCAN_BOUND: i64 = 1000;

/// A finite bipartite graph between two point sets, with edges labelled by
/// the translation that realizes them: edge `(a, b, f)` present iff
/// `|b - (a + f)| <= tolerance`.
#[derive(Debug, Clone)]
pub struct BipartiteInstance {
    left: Vec<Vec<f64>>,
    right: Vec<Vec<f64>>,
    translations: Vec<GroupElement>,
    resolved: Vec<Vec<f64>>,
    tolerance: f64,
    /// left index -> (right index, translation index), sorted.
    adjacency: Vec<Vec<(usize, usize)>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

/// A Koenig certificate: a vertex set on one side with strictly fewer
/// neighbors than elements.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HallWitness {
    pub side: Side,
    pub vertices: Vec<usize>,
    pub neighbor_count: usize,
}

/// Maximum matching plus deficiency and an optional Hall witness.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatchingResult {
    /// `(left index, right index, translation index)`.
    pub pairs: Vec<(usize, usize, usize)>,
    /// Unmatched left vertices.
    pub deficiency: usize,
    pub witness: Option<HallWitness>,
}

/// Verdict of a Hall-condition check on one side.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum HallCheck {
    Holds,
    Violated(HallWitness),
}

impl HallCheck {
    pub fn holds(&self) -> bool {
        matches!(self, HallCheck::Holds)
    }
}

/// Builds the instance by spatial hashing of the right points, so that
/// construction is near-linear in `(|L| + |R|) * |F|`.
pub fn build_instance(
    left: Vec<Vec<f64>>,
    right: Vec<Vec<f64>>,
    translations: Vec<GroupElement>,
    alpha: &[f64],
    tolerance: f64,
) -> Result<BipartiteInstance> {
    if tolerance < 0.0 || !tolerance.is_finite() {
        return Err(Error::invalid("tolerance must be nonnegative"));
    }
    let dim = left
        .first()
        .or(right.first())
        .map(|p| p.len())
        .unwrap_or(alpha.len());
    if left.iter().chain(&right).any(|p| p.len() != dim) {
        return Err(Error::invalid("points must share one dimension"));
    }
    let resolved: Vec<Vec<f64>> = translations
        .iter()
        .map(|t| {
            let v = t.resolve(alpha)?;
            if v.len() != dim {
                return Err(Error::invalid("translation dimension mismatch"));
            }
            Ok(v)
        })
        .collect::<Result<_>>()?;

    let cell = tolerance.max(1e-9);
    let key = |p: &[f64]| -> Vec<i64> { p.iter().map(|x| (x / cell).floor() as i64).collect() };
    let mut buckets: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    for (j, b) in right.iter().enumerate() {
        buckets.entry(key(b)).or_default().push(j);
    }

    let mut adjacency = vec![Vec::new(); left.len()];
    let mut target = vec![0.0; dim];
    for (i, a) in left.iter().enumerate() {
        for (f_idx, shift) in resolved.iter().enumerate() {
            for (t, (x, s)) in target.iter_mut().zip(a.iter().zip(shift)) {
                *t = x + s;
            }
            // Probe all cells intersecting the tolerance ball.
            let lo: Vec<i64> = target
                .iter()
                .map(|x| ((x - tolerance) / cell).floor() as i64)
                .collect();
            let hi: Vec<i64> = target
                .iter()
                .map(|x| ((x + tolerance) / cell).floor() as i64)
                .collect();
            let mut probe = lo.clone();
            'cells: loop {
                if let Some(cands) = buckets.get(&probe) {
                    for &j in cands {
                        let dist2: f64 = right[j]
                            .iter()
                            .zip(&target)
                            .map(|(b, t)| (b - t) * (b - t))
                            .sum();
                        if dist2.sqrt() <= tolerance {
                            adjacency[i].push((j, f_idx));
                        }
                    }
                }
                for axis in 0..dim {
                    probe[axis] += 1;
                    if probe[axis] <= hi[axis] {
                        continue 'cells;
                    }
                    probe[axis] = lo[axis];
                }
                break;
            }
        }
        adjacency[i].sort_unstable();
        adjacency[i].dedup();
    }

    Ok(BipartiteInstance {
        left,
        right,
        translations,
        resolved,
        tolerance,
        adjacency,
    })
}

impl BipartiteInstance {
    pub fn left_len(&self) -> usize {
        self.left.len()
    }

    pub fn right_len(&self) -> usize {
        self.right.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum()
    }

    pub fn adjacency(&self) -> &[Vec<(usize, usize)>] {
        &self.adjacency
    }

    pub fn translations(&self) -> &[GroupElement] {
        &self.translations
    }

    /// Translations resolved to concrete vectors.
    pub fn resolved_translations(&self) -> &[Vec<f64>] {
        &self.resolved
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn left_points(&self) -> &[Vec<f64>] {
        &self.left
    }

    pub fn right_points(&self) -> &[Vec<f64>] {
        &self.right
    }
}

/// Left matches carry the edge label used; right matches point back at the
/// left vertex.
type LeftMatches = Vec<Option<(usize, usize)>>;
type RightMatches = Vec<Option<usize>>;

/// Hopcroft-Karp on a labelled adjacency list. Returns matches for both
/// sides; the left match remembers which edge label was used.
fn hopcroft_karp(adjacency: &[Vec<(usize, usize)>], n_right: usize) -> (LeftMatches, RightMatches) {
    let n_left = adjacency.len();
    let mut match_l: Vec<Option<(usize, usize)>> = vec![None; n_left];
    let mut match_r: Vec<Option<usize>> = vec![None; n_right];
    loop {
        // BFS phase: layer left vertices by alternating distance from the
        // free ones.
        let mut dist = vec![usize::MAX; n_left];
        let mut queue: VecDeque<usize> = VecDeque::new();
        for l in 0..n_left {
            if match_l[l].is_none() {
                dist[l] = 0;
                queue.push_back(l);
            }
        }
        let mut reachable_free = false;
        while let Some(l) = queue.pop_front() {
            for &(r, _) in &adjacency[l] {
                match match_r[r] {
                    None => reachable_free = true,
                    Some(l2) => {
                        if dist[l2] == usize::MAX {
                            dist[l2] = dist[l] + 1;
                            queue.push_back(l2);
                        }
                    }
                }
            }
        }
        if !reachable_free {
            break;
        }
        // DFS phase (iterative; augmenting paths can be long).
        let mut iter_idx = vec![0usize; n_left];
        let mut augmented = false;
        for start in 0..n_left {
            if match_l[start].is_some() || dist[start] != 0 {
                continue;
            }
            let mut stack = vec![start];
            let mut edges: Vec<(usize, usize)> = Vec::new();
            'dfs: while let Some(&l) = stack.last() {
                while iter_idx[l] < adjacency[l].len() {
                    let (r, f) = adjacency[l][iter_idx[l]];
                    iter_idx[l] += 1;
                    match match_r[r] {
                        None => {
                            edges.push((r, f));
                            for (i, &(ri, fi)) in edges.iter().enumerate() {
                                match_l[stack[i]] = Some((ri, fi));
                                match_r[ri] = Some(stack[i]);
                            }
                            augmented = true;
                            break 'dfs;
                        }
                        Some(l2) => {
                            if dist[l2] == dist[l] + 1 && match_l[l2].is_some() {
                                edges.push((r, f));
                                stack.push(l2);
                                continue 'dfs;
                            }
                        }
                    }
                }
                dist[l] = usize::MAX;
                stack.pop();
                edges.pop();
            }
        }
        if !augmented {
            break;
        }
    }
    (match_l, match_r)
}

/// Left-side Koenig witness from the final alternating reachability cut.
fn koenig_witness(
    adjacency: &[Vec<(usize, usize)>],
    match_l: &[Option<(usize, usize)>],
    match_r: &[Option<usize>],
    side: Side,
) -> HallWitness {
    let mut seen_l = vec![false; adjacency.len()];
    let mut seen_r = vec![false; match_r.len()];
    let mut queue: VecDeque<usize> = VecDeque::new();
    for (l, m) in match_l.iter().enumerate() {
        if m.is_none() {
            seen_l[l] = true;
            queue.push_back(l);
        }
    }
    while let Some(l) = queue.pop_front() {
        for &(r, _) in &adjacency[l] {
            if !seen_r[r] {
                seen_r[r] = true;
                // No augmenting path exists, so every reachable right vertex
                // is matched; follow the matched edge back.
                if let Some(l2) = match_r[r] {
                    if !seen_l[l2] {
                        seen_l[l2] = true;
                        queue.push_back(l2);
                    }
                }
            }
        }
    }
    let vertices: Vec<usize> = (0..adjacency.len()).filter(|&l| seen_l[l]).collect();
    let neighbor_count = seen_r.iter().filter(|&&s| s).count();
    HallWitness {
        side,
        vertices,
        neighbor_count,
    }
}

/// Maximum-cardinality matching; when the left side is not saturated the
/// result carries an exact Koenig witness with `|S| > |N(S)|`.
pub fn max_matching(instance: &BipartiteInstance) -> MatchingResult {
    let (match_l, match_r) = hopcroft_karp(&instance.adjacency, instance.right.len());
    let pairs: Vec<(usize, usize, usize)> = match_l
        .iter()
        .enumerate()
        .filter_map(|(l, m)| m.map(|(r, f)| (l, r, f)))
        .collect();
    let deficiency = instance.left.len() - pairs.len();
    let witness = (deficiency > 0).then(|| {
        let w = koenig_witness(&instance.adjacency, &match_l, &match_r, Side::Left);
        debug_assert!(w.vertices.len() > w.neighbor_count);
        w
    });
    MatchingResult {
        pairs,
        deficiency,
        witness,
    }
}

/// Hall's condition on the chosen side: holds iff a maximum matching
/// saturates that side; otherwise the exact violating set is returned.
pub fn hall_check(instance: &BipartiteInstance, side: Side) -> HallCheck {
    match side {
        Side::Left => {
            let result = max_matching(instance);
            match result.witness {
                None => HallCheck::Holds,
                Some(w) => HallCheck::Violated(w),
            }
        }
        Side::Right => {
            let mut transposed = vec![Vec::new(); instance.right.len()];
            for (l, edges) in instance.adjacency.iter().enumerate() {
                for &(r, f) in edges {
                    transposed[r].push((l, f));
                }
            }
            let (match_l, match_r) = hopcroft_karp(&transposed, instance.left.len());
            if match_l.iter().all(Option::is_some) {
                HallCheck::Holds
            } else {
                HallCheck::Violated(koenig_witness(&transposed, &match_l, &match_r, Side::Right))
            }
        }
    }
}

/// Result of a bounded-distance matching between two patches. Points within
/// `K + boundary_slack` of the common coverage ends are exempt from the
/// deficiency count; the finite truncation makes edge defects unavoidable.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BdeReport {
    pub k: f64,
    pub boundary_slack: f64,
    /// Core interval on which saturation is demanded.
    pub core: (f64, f64),
    pub core_left: usize,
    pub core_right: usize,
    /// Unmatched core points, both sides combined.
    pub deficiency: usize,
    /// Largest matched displacement observed.
    pub observed_k: f64,
    /// Matched pairs `(index into a-positions, index into b-positions)`
    /// from the core-left saturation run.
    pub pairs: Vec<(usize, usize)>,
    pub witness: Option<HallWitness>,
}

/// Maximum matching between patch points at displacement at most `K`,
/// restricted to the common coverage shrunk by `K + boundary_slack`.
/// Core deficiency zero means a matching saturating every core point on
/// both sides exists.
pub fn bounded_distance_match(
    pa: &Patch,
    pb: &Patch,
    k: f64,
    boundary_slack: f64,
) -> Result<BdeReport> {
    if !k.is_finite() || k <= 0.0 {
        return Err(Error::NonPositiveK);
    }
    if boundary_slack < 0.0 || !boundary_slack.is_finite() {
        return Err(Error::invalid("boundary slack must be nonnegative"));
    }
    let (a_cov, b_cov) = (pa.coverage(), pb.coverage());
    let lo = a_cov.0.max(b_cov.0);
    let hi = a_cov.1.min(b_cov.1);
    let margin = k + boundary_slack;
    let core = (lo + margin, hi - margin);
    if core.1 <= core.0 {
        return Err(Error::CoverageExceeded(
            "patches do not share enough coverage for this K and slack".into(),
        ));
    }
    let a = pa.positions();
    let b = pb.positions();
    let a_core = (
        a.partition_point(|&p| p < core.0),
        a.partition_point(|&p| p < core.1),
    );
    let b_core = (
        b.partition_point(|&p| p < core.0),
        b.partition_point(|&p| p < core.1),
    );

    // Adjacency of one side's core against the whole other side, by a
    // two-pointer sweep over the sorted positions.
    let build = |src: &[f64], src_range: (usize, usize), dst: &[f64]| -> Vec<Vec<(usize, usize)>> {
        let mut adj = Vec::with_capacity(src_range.1 - src_range.0);
        let mut lo_idx = 0usize;
        for &p in &src[src_range.0..src_range.1] {
            while lo_idx < dst.len() && dst[lo_idx] < p - k {
                lo_idx += 1;
            }
            let mut edges = Vec::new();
            let mut j = lo_idx;
            while j < dst.len() && dst[j] <= p + k {
                edges.push((j, 0usize));
                j += 1;
            }
            adj.push(edges);
        }
        adj
    };

    let adj_a = build(a, a_core, b);
    let (match_a, match_ra) = hopcroft_karp(&adj_a, b.len());
    let matched_a = match_a.iter().filter(|m| m.is_some()).count();
    let def_a = (a_core.1 - a_core.0) - matched_a;

    let adj_b = build(b, b_core, a);
    let (match_b, _) = hopcroft_karp(&adj_b, a.len());
    let matched_b = match_b.iter().filter(|m| m.is_some()).count();
    let def_b = (b_core.1 - b_core.0) - matched_b;

    let mut observed_k = 0.0f64;
    let mut pairs = Vec::with_capacity(matched_a);
    for (offset, m) in match_a.iter().enumerate() {
        if let Some((j, _)) = m {
            let i = a_core.0 + offset;
            let disp = (b[*j] - a[i]).abs();
            debug_assert!(disp <= k + DEFAULT_TOLERANCE);
            observed_k = observed_k.max(disp);
            pairs.push((i, *j));
        }
    }
    for (offset, m) in match_b.iter().enumerate() {
        if let Some((j, _)) = m {
            observed_k = observed_k.max((a[*j] - b[b_core.0 + offset]).abs());
        }
    }

    let witness = if def_a > 0 {
        let mut w = koenig_witness(&adj_a, &match_a, &match_ra, Side::Left);
        for v in w.vertices.iter_mut() {
            *v += a_core.0;
        }
        Some(w)
    } else {
        None
    };

    Ok(BdeReport {
        k,
        boundary_slack,
        core,
        core_left: a_core.1 - a_core.0,
        core_right: b_core.1 - b_core.0,
        deficiency: def_a + def_b,
        observed_k,
        pairs,
        witness,
    })
}

/// Smallest multiple of `step` at which the core matching saturates, with
/// `boundary_slack = K` at every probe. `None` when no feasible `K` at most
/// `k_cap` exists.
pub fn minimal_bde_k(pa: &Patch, pb: &Patch, step: f64, k_cap: f64) -> Result<Option<f64>> {
    if !step.is_finite() || step <= 0.0 || !k_cap.is_finite() || k_cap <= 0.0 {
        return Err(Error::NonPositiveK);
    }
    let feasible = |multiple: u64| -> Result<Option<bool>> {
        let k = multiple as f64 * step;
        match bounded_distance_match(pa, pb, k, k) {
            Ok(report) => Ok(Some(report.deficiency == 0)),
            // Core emptied out: K no longer probeable at this patch length.
            Err(Error::CoverageExceeded(_)) => Ok(None),
            Err(e) => Err(e),
        }
    };
    // Doubling phase.
    let cap = (k_cap / step).floor() as u64;
    let mut hi = 1u64;
    let mut lo = 0u64;
    loop {
        match feasible(hi)? {
            Some(true) => break,
            Some(false) => {
                lo = hi;
                if hi >= cap {
                    return Ok(None);
                }
                hi = (hi * 2).min(cap);
            }
            None => return Ok(None),
        }
    }
    // Binary search on multiples of step in (lo, hi].
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        match feasible(mid)? {
            Some(true) => hi = mid,
            _ => lo = mid,
        }
    }
    Ok(Some(hi as f64 * step))
}

/// Maximum absolute counting-function difference over the grid, with the
/// argmax. A bounded difference is the necessary-condition statistic for
/// bounded distance equivalence.
pub fn counting_diff(pa: &Patch, pb: &Patch, x_grid: &[f64]) -> Result<(i64, f64)> {
    if x_grid.is_empty() {
        return Err(Error::invalid("x grid must be nonempty"));
    }
    let mut best = (i64::MIN, f64::NAN);
    for &x in x_grid {
        let diff = (pa.nu(x)? - pb.nu(x)?).abs();
        if diff > best.0 {
            best = (diff, x);
        }
    }
    Ok(best)
}

/// One point of an orbit fiber `A^n = A ∩ (x + n alpha + Z^d)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitPoint {
    pub fiber: i64,
    pub shift: Vec<i64>,
    pub point: Vec<f64>,
}

/// Displacement record pairing the `j`-th point of each enumeration:
/// `b - a = e*alpha + m` exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisplacementRecord {
    pub j: i64,
    pub a_fiber: i64,
    pub b_fiber: i64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub e: i64,
    pub m: Vec<i64>,
}

/// Fiberwise enumeration of two equal-measure windows along one orbit,
/// with the index sequences `s_n`, `t_m` and the displacement records of
/// the shared-index pairing.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrbitEnumeration {
    pub x: Vec<f64>,
    pub n_range: (i64, i64),
    pub measure: f64,
    /// `s_{n_range.0 + i}` at index `i`, anchored by `s_0 = 0`.
    pub s: Vec<i64>,
    pub t: Vec<i64>,
    pub a_points: Vec<OrbitPoint>,
    pub b_points: Vec<OrbitPoint>,
    pub records: Vec<DisplacementRecord>,
    pub e_set: BTreeSet<i64>,
    /// Orbit points within the boundary skin of either window.
    pub flagged: usize,
}

impl OrbitEnumeration {
    pub fn s_at(&self, n: i64) -> i64 {
        self.s[(n - self.n_range.0) as usize]
    }

    pub fn t_at(&self, n: i64) -> i64 {
        self.t[(n - self.n_range.0) as usize]
    }

    /// Largest fiber cardinality seen on either side (the finite analog of
    /// the covering-cube count `q`).
    pub fn max_fiber(&self) -> i64 {
        let step = |seq: &[i64]| seq.windows(2).map(|w| w[1] - w[0]).max().unwrap_or(0);
        step(&self.s).max(step(&self.t))
    }
}

fn enumerate_fiber(window: &Window, base: &[f64]) -> (Vec<OrbitPoint>, usize) {
    let bb = window.bounding_box();
    let Some(ranges) = shift_range((&bb.0, &bb.1), base) else {
        return (Vec::new(), 0);
    };
    let mut points = Vec::new();
    let mut flagged = 0usize;
    let mut shift: Vec<i64> = ranges.iter().map(|r| r.0).collect();
    'outer: loop {
        let point: Vec<f64> = base
            .iter()
            .zip(&shift)
            .map(|(b, &s)| b + s as f64)
            .collect();
        let verdict = window.contains(&point, crate::modelset::PATCH_BOUNDARY_EPSILON);
        if verdict.status == crate::window::MembershipStatus::NearBoundary {
            flagged += 1;
        }
        if window.indicator(&point) {
            points.push(OrbitPoint {
                fiber: 0, // filled by the caller
                shift: shift.clone(),
                point,
            });
        }
        for i in 0..shift.len() {
            shift[i] += 1;
            if shift[i] <= ranges[i].1 {
                continue 'outer;
            }
            shift[i] = ranges[i].0;
        }
        break;
    }
    points.sort_by(|p, q| p.shift.cmp(&q.shift));
    (points, flagged)
}

/// Builds the fiberwise enumerations of both windows over
/// `n in [n_range.0, n_range.1)` and pairs points by shared index.
/// The range must contain 0 so the anchors `s_0 = t_0 = 0` are in scope.
pub fn orbit_enumerate(
    window_a: &Window,
    window_b: &Window,
    alpha: &[f64],
    x: &[f64],
    n_range: (i64, i64),
) -> Result<OrbitEnumeration> {
    let (mes_a, mes_b) = (window_a.measure(), window_b.measure());
    if (mes_a - mes_b).abs() > DEFAULT_TOLERANCE {
        return Err(Error::MeasureMismatch(mes_a, mes_b));
    }
    if window_a.dim() != window_b.dim()
        || alpha.len() != window_a.dim()
        || x.len() != window_a.dim()
    {
        return Err(Error::invalid("window/alpha/x dimensions must agree"));
    }
    let (n0, n1) = n_range;
    if !(n0 <= 0 && 0 < n1) {
        return Err(Error::invalid("n_range must contain 0"));
    }

    let mut a_points = Vec::new();
    let mut b_points = Vec::new();
    let mut a_counts = Vec::with_capacity((n1 - n0) as usize);
    let mut b_counts = Vec::with_capacity((n1 - n0) as usize);
    let mut flagged = 0usize;
    for n in n0..n1 {
        let base: Vec<f64> = x
            .iter()
            .zip(alpha)
            .map(|(&xi, &ai)| xi + n as f64 * ai)
            .collect();
        let (mut fa, fl_a) = enumerate_fiber(window_a, &base);
        for p in fa.iter_mut() {
            p.fiber = n;
        }
        let (mut fb, fl_b) = enumerate_fiber(window_b, &base);
        for p in fb.iter_mut() {
            p.fiber = n;
        }
        flagged += fl_a + fl_b;
        a_counts.push(fa.len() as i64);
        b_counts.push(fb.len() as i64);
        a_points.extend(fa);
        b_points.extend(fb);
    }

    // Anchor s_0 = 0: prefix-sum counts, then subtract the prefix at n = 0.
    let anchor = |counts: &[i64]| -> Vec<i64> {
        let mut seq = Vec::with_capacity(counts.len() + 1);
        let mut acc = 0i64;
        seq.push(0);
        for &c in counts {
            acc += c;
            seq.push(acc);
        }
        let at_zero = seq[(0 - n0) as usize];
        seq.iter().map(|v| v - at_zero).collect()
    };
    let s = anchor(&a_counts);
    let t = anchor(&b_counts);

    // Shared-index pairing over the range where both enumerations are
    // defined.
    let j_lo = s[0].max(t[0]);
    let j_hi = s[s.len() - 1].min(t[t.len() - 1]);
    let mut records = Vec::new();
    let mut e_set = BTreeSet::new();
    for j in j_lo..j_hi {
        let a = &a_points[(j - s[0]) as usize];
        let b = &b_points[(j - t[0]) as usize];
        let e = b.fiber - a.fiber;
        let m: Vec<i64> = b
            .shift
            .iter()
            .zip(&a.shift)
            .map(|(bs, as_)| bs - as_)
            .collect();
        // b - a = e*alpha + m must hold exactly (construction guarantees it
        // up to float roundoff).
        let residual = b
            .point
            .iter()
            .zip(&a.point)
            .zip(alpha)
            .zip(&m)
            .map(|(((bp, ap), al), &mi)| (bp - ap - e as f64 * al - mi as f64).abs())
            .fold(0.0f64, f64::max);
        if residual > DEFAULT_TOLERANCE {
            return Err(Error::DisplacementNotInGroup(format!(
                "pair j={j} residual {residual:.3e}"
            )));
        }
        e_set.insert(e);
        records.push(DisplacementRecord {
            j,
            a_fiber: a.fiber,
            b_fiber: b.fiber,
            a: a.point.clone(),
            b: b.point.clone(),
            e,
            m,
        });
    }

    Ok(OrbitEnumeration {
        x: x.to_vec(),
        n_range,
        measure: mes_a,
        s,
        t,
        a_points,
        b_points,
        records,
        e_set,
        flagged,
    })
}

/// The translation-label summary of an orbit enumeration: the finite label
/// set `E` re-derived by bounded scanning, and the observed bounds on the
/// outer (`K1`) and middle (`K2`) terms of the fiber-index decomposition
/// `m - n = (m - t_m/mes) + (t_m/mes - s_n/mes) + (s_n/mes - n)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TranslationSpread {
    pub e_set: BTreeSet<i64>,
    pub k1_observed: f64,
    pub k2_observed: f64,
    pub e_scan_bound: i64,
}

/// Re-derives each displacement label by scanning `|e| <= E_SCAN_BOUND` in
/// increasing magnitude and rounding the integer part; errors loudly when a
/// displacement admits no label within the bound.
pub fn translation_spread(
    enumeration: &OrbitEnumeration,
    alpha: &[f64],
) -> Result<TranslationSpread> {
    let mes = enumeration.measure;
    if mes <= 0.0 {
        return Err(Error::invalid("orbit enumeration has zero measure"));
    }
    let mut e_set = BTreeSet::new();
    let mut k1: f64 = 0.0;
    let mut k2: f64 = 0.0;
    for rec in &enumeration.records {
        let mut found = None;
        'scan: for mag in 0..=E_SCAN_BOUND {
            for e in [mag, -mag] {
                let mut residual = 0.0f64;
                for ((bp, ap), al) in rec.b.iter().zip(&rec.a).zip(alpha) {
                    let raw = bp - ap - e as f64 * al;
                    residual = residual.max((raw - raw.round()).abs());
                }
                if residual <= DEFAULT_TOLERANCE {
                    found = Some(e);
                    break 'scan;
                }
                if mag == 0 {
                    break;
                }
            }
        }
        let Some(e) = found else {
            return Err(Error::DisplacementNotInGroup(format!(
                "no e with |e| <= {E_SCAN_BOUND} fits pair j={}",
                rec.j
            )));
        };
        e_set.insert(e);
        let s_n = enumeration.s_at(rec.a_fiber) as f64;
        let t_m = enumeration.t_at(rec.b_fiber) as f64;
        k1 = k1
            .max((rec.b_fiber as f64 - t_m / mes).abs())
            .max((s_n / mes - rec.a_fiber as f64).abs());
        k2 = k2.max((t_m / mes - s_n / mes).abs());
    }
    Ok(TranslationSpread {
        e_set,
        k1_observed: k1,
        k2_observed: k2,
        e_scan_bound: E_SCAN_BOUND,
    })
}

/// Outcome of the finite product-set reduction: for subsets `S` of `A`,
/// compares `|S| * R^s` against `|(S+F) ∩ B| * (R + 2K)^s` per `R`, and the
/// limit inequality `|S| <= |(S+F) ∩ B|`; cross-checked against the Hall
/// verdict on the same instance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProductReductionReport {
    pub limit_holds: bool,
    pub limit_witness: Option<Vec<usize>>,
    pub rows: Vec<ProductRow>,
    pub hall_holds: bool,
    pub agrees: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProductRow {
    pub r: u64,
    pub product_holds: bool,
    pub first_violation: Option<Vec<usize>>,
}

/// Exhaustive subset check of the product-thickening inequality used to
/// descend from `A x Z^s ~ B x Z^s` to `A ~ B`.
pub fn product_reduction_check(
    a: &[Vec<i64>],
    b: &[Vec<i64>],
    f: &[Vec<i64>],
    k: f64,
    s: u32,
    r_list: &[u64],
) -> Result<ProductReductionReport> {
    if a.len() > 20 {
        return Err(Error::invalid("subset scan limited to |A| <= 20"));
    }
    if !k.is_finite() || k <= 0.0 {
        return Err(Error::NonPositiveK);
    }
    let dim = a
        .first()
        .or(b.first())
        .or(f.first())
        .map(Vec::len)
        .unwrap_or(0);
    if a.iter().chain(b).chain(f).any(|v| v.len() != dim) {
        return Err(Error::invalid("A, B, F must share one dimension"));
    }
    let b_index: HashMap<&[i64], usize> = b
        .iter()
        .enumerate()
        .map(|(i, v)| (v.as_slice(), i))
        .collect();
    // Per-element neighbor bitsets over B.
    let words = b.len().div_ceil(64);
    let mut neighbor_bits: Vec<Vec<u64>> = Vec::with_capacity(a.len());
    for ai in a {
        let mut bits = vec![0u64; words];
        for fi in f {
            let target: Vec<i64> = ai.iter().zip(fi).map(|(x, y)| x + y).collect();
            if let Some(&j) = b_index.get(target.as_slice()) {
                bits[j / 64] |= 1 << (j % 64);
            }
        }
        neighbor_bits.push(bits);
    }

    let mut limit_holds = true;
    let mut limit_witness = None;
    let mut rows: Vec<ProductRow> = r_list
        .iter()
        .map(|&r| ProductRow {
            r,
            product_holds: true,
            first_violation: None,
        })
        .collect();
    let mut acc = vec![0u64; words];
    for mask in 1u32..(1 << a.len()) {
        acc.iter_mut().for_each(|w| *w = 0);
        let mut size = 0u32;
        for (i, bits) in neighbor_bits.iter().enumerate() {
            if mask & (1 << i) != 0 {
                size += 1;
                for (w, nb) in acc.iter_mut().zip(bits) {
                    *w |= nb;
                }
            }
        }
        let count: u32 = acc.iter().map(|w| w.count_ones()).sum();
        let subset = || -> Vec<usize> { (0..a.len()).filter(|i| mask & (1 << i) != 0).collect() };
        if size > count && limit_holds {
            limit_holds = false;
            limit_witness = Some(subset());
        }
        for row in rows.iter_mut() {
            if !row.product_holds {
                continue;
            }
            let r = row.r as f64;
            let lhs = size as f64 * r.powi(s as i32);
            let rhs = count as f64 * (r + 2.0 * k).powi(s as i32);
            if lhs > rhs {
                row.product_holds = false;
                row.first_violation = Some(subset());
            }
        }
    }

    // Cross-check against the matching-based Hall verdict.
    let to_f64 = |vs: &[Vec<i64>]| -> Vec<Vec<f64>> {
        vs.iter()
            .map(|v| v.iter().map(|&x| x as f64).collect())
            .collect()
    };
    let instance = build_instance(
        to_f64(a),
        to_f64(b),
        f.iter()
            .map(|v| GroupElement::vector(v.iter().map(|&x| x as f64).collect()))
            .collect(),
        &[],
        1e-9,
    )?;
    let hall_holds = hall_check(&instance, Side::Left).holds();
    Ok(ProductReductionReport {
        agrees: hall_holds == limit_holds,
        limit_holds,
        limit_witness,
        rows,
        hall_holds,
    })
}
