//! Lattices in `R^m x R^n`: general-position checks by bounded integer
//! relation search, splitting off the kernel of the internal projection,
//! and reduction of lattices in `R x R^d` to special form.
//!
//! Rational independence is undecidable from floats, so certification is
//! always relative to a bound: a report with empty violations certifies
//! independence only up to the scanned coefficient box.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::window::Window;
use crate::{Error, Result, DEFAULT_TOLERANCE};

/// Relation-scan bound used when an operation certifies a special-form
/// lattice internally.
pub const DEFAULT_CERTIFICATION_BOUND: u32 = 25;

/// Coefficient search radius used by [`kernel_split`] when callers have no
/// better estimate.
pub const DEFAULT_KERNEL_RADIUS: u32 = 50;

/// A lattice given by `rank` linearly independent vectors of `R^(m+n)`.
/// `m` physical coordinates come first, then `n` internal coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeBasis {
    m: usize,
    n: usize,
    vectors: Vec<Vec<f64>>,
}

/// A point of a lattice together with its integer coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticePoint {
    pub coefficients: Vec<i64>,
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
}

/// Which rational-independence condition a violation witnesses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndependenceCondition {
    /// Relation `q0 + sum q_i alpha_i = 0` for the alpha row derived from
    /// the given basis vector index.
    Alpha { row: usize },
    /// Relation `q0 (1 + beta^T alpha) + sum q_i beta_i = 0`.
    Beta,
}

/// An exact integer relation found by the bounded scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationViolation {
    pub condition: IndependenceCondition,
    /// `(q0, q1, .., qd)`.
    pub coefficients: Vec<i64>,
    pub residual: f64,
}

/// Result of a bounded rational-independence scan. Empty violations certify
/// general position up to `bound_checked` only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndependenceReport {
    pub bound_checked: u32,
    pub violations: Vec<RelationViolation>,
}

impl IndependenceReport {
    pub fn certified(&self) -> bool {
        self.violations.is_empty()
    }
}

/// The lattice of Fibonacci-type model sets: `alpha`, `beta` in `R^d` with
/// the generator family `(beta_j, e_j)` and `(1 + beta^T alpha, alpha)`.
/// Construction certifies both rational-independence conditions up to the
/// recorded bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecialFormLattice {
    alpha: Vec<f64>,
    beta: Vec<f64>,
    independence_bound: u32,
}

/// The diagonal map `T(x, y) = (a x, B y)` carrying a general-position
/// lattice onto its special form.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalSplitMap {
    a: f64,
    b: DMatrix<f64>,
}

/// JSON-facing lattice description; either an explicit basis or a
/// special-form parameter pair. Field names are part of the CLI contract.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LatticeConfig {
    General {
        m: usize,
        n: usize,
        basis: Vec<Vec<f64>>,
    },
    Special {
        special_form: SpecialFormConfig,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecialFormConfig {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

impl LatticeBasis {
    /// Validates dimensions and full rank (nonzero Gram determinant).
    pub fn new(m: usize, n: usize, vectors: Vec<Vec<f64>>) -> Result<Self> {
        let dim = m + n;
        if m == 0 || n == 0 {
            return Err(Error::invalid(
                "physical and internal dimensions must be positive",
            ));
        }
        if vectors.is_empty() || vectors.len() > dim {
            return Err(Error::RankDeficient);
        }
        if vectors.iter().any(|v| v.len() != dim) {
            return Err(Error::invalid("basis vector has wrong dimension"));
        }
        if vectors.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::invalid("basis entries must be finite"));
        }
        let r = vectors.len();
        let gram = DMatrix::from_fn(r, r, |i, j| dot(&vectors[i], &vectors[j]));
        let scale: f64 = vectors
            .iter()
            .map(|v| dot(v, v).max(f64::MIN_POSITIVE))
            .product();
        if gram.determinant().abs() <= 1e-18 * scale {
            return Err(Error::RankDeficient);
        }
        Ok(LatticeBasis { m, n, vectors })
    }

    pub fn physical_dim(&self) -> usize {
        self.m
    }

    pub fn internal_dim(&self) -> usize {
        self.n
    }

    pub fn ambient_dim(&self) -> usize {
        self.m + self.n
    }

    pub fn rank(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn is_full(&self) -> bool {
        self.rank() == self.ambient_dim()
    }

    /// The lattice point with the given integer coordinates.
    pub fn point(&self, coefficients: &[i64]) -> Vec<f64> {
        assert_eq!(
            coefficients.len(),
            self.rank(),
            "coefficient count mismatch"
        );
        let mut out = vec![0.0; self.ambient_dim()];
        for (c, v) in coefficients.iter().zip(&self.vectors) {
            for (o, x) in out.iter_mut().zip(v) {
                *o += *c as f64 * x;
            }
        }
        out
    }

    /// Physical projection of an ambient point.
    pub fn p1<'a>(&self, point: &'a [f64]) -> &'a [f64] {
        &point[..self.m]
    }

    /// Internal projection of an ambient point.
    pub fn p2<'a>(&self, point: &'a [f64]) -> &'a [f64] {
        &point[self.m..]
    }

    pub fn from_config(m: usize, n: usize, basis: Vec<Vec<f64>>) -> Result<Self> {
        LatticeBasis::new(m, n, basis)
    }

    pub fn to_config(&self) -> LatticeConfig {
        LatticeConfig::General {
            m: self.m,
            n: self.n,
            basis: self.vectors.clone(),
        }
    }
}

impl SpecialFormLattice {
    /// Builds the lattice after certifying conditions (1) and (2) by an
    /// exhaustive bounded-denominator relation scan up to `q_max`.
    pub fn certified(alpha: Vec<f64>, beta: Vec<f64>, q_max: u32) -> Result<Self> {
        if q_max == 0 {
            return Err(Error::NonPositiveBound);
        }
        if alpha.is_empty() || alpha.len() != beta.len() {
            return Err(Error::invalid(
                "alpha and beta must be nonempty with equal dimension",
            ));
        }
        if alpha.iter().chain(&beta).any(|x| !x.is_finite()) {
            return Err(Error::invalid("alpha and beta entries must be finite"));
        }
        if let Some(v) = scan_relations(&alpha, q_max, DEFAULT_TOLERANCE)?.first() {
            return Err(Error::GeneralPosition(format!(
                "alpha admits the integer relation {:?}",
                v.0
            )));
        }
        let denom = 1.0 + dot(&beta, &alpha);
        if denom.abs() <= DEFAULT_TOLERANCE {
            return Err(Error::GeneralPosition("1 + beta^T alpha vanishes".into()));
        }
        let reduced: Vec<f64> = beta.iter().map(|b| b / denom).collect();
        if let Some(v) = scan_relations(&reduced, q_max, DEFAULT_TOLERANCE)?.first() {
            return Err(Error::GeneralPosition(format!(
                "beta admits the integer relation {:?}",
                v.0
            )));
        }
        Ok(SpecialFormLattice {
            alpha,
            beta,
            independence_bound: q_max,
        })
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn independence_bound(&self) -> u32 {
        self.independence_bound
    }

    /// The lattice point parametrized by `(n, m)`:
    /// `p1 = n + beta^T (n alpha + m)`, `p2 = n alpha + m`.
    pub fn point(&self, n: i64, m: &[i64]) -> (f64, Vec<f64>) {
        assert_eq!(m.len(), self.dim(), "shift dimension mismatch");
        let p2: Vec<f64> = self
            .alpha
            .iter()
            .zip(m)
            .map(|(&a, &mi)| n as f64 * a + mi as f64)
            .collect();
        let p1 = n as f64 + dot(&self.beta, &p2);
        (p1, p2)
    }

    /// Generator vectors `(beta_j, e_j)` for `j = 1..d` followed by
    /// `(1 + beta^T alpha, alpha)`.
    pub fn generators(&self) -> Vec<Vec<f64>> {
        let d = self.dim();
        let mut out = Vec::with_capacity(d + 1);
        for j in 0..d {
            let mut v = vec![0.0; d + 1];
            v[0] = self.beta[j];
            v[1 + j] = 1.0;
            out.push(v);
        }
        let mut last = vec![1.0 + dot(&self.beta, &self.alpha)];
        last.extend_from_slice(&self.alpha);
        out.push(last);
        out
    }

    /// The generator family as an explicit basis of `R x R^d`.
    pub fn basis(&self) -> LatticeBasis {
        LatticeBasis::new(1, self.dim(), self.generators())
            .expect("special-form generators are full rank")
    }

    pub fn to_config(&self) -> LatticeConfig {
        LatticeConfig::Special {
            special_form: SpecialFormConfig {
                alpha: self.alpha.clone(),
                beta: self.beta.clone(),
            },
        }
    }
}

impl DiagonalSplitMap {
    fn new(a: f64, b: DMatrix<f64>) -> Result<Self> {
        if a == 0.0 || !a.is_finite() {
            return Err(Error::invalid("diagonal map needs nonzero finite a"));
        }
        if b.determinant().abs() == 0.0 {
            return Err(Error::invalid("diagonal map needs invertible B"));
        }
        Ok(DiagonalSplitMap { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    /// `T(x, y) = (a x, B y)`.
    pub fn apply(&self, x: f64, y: &[f64]) -> (f64, Vec<f64>) {
        let d = self.b.nrows();
        assert_eq!(y.len(), d, "internal dimension mismatch");
        let out = (0..d)
            .map(|r| self.b.row(r).iter().zip(y).map(|(b, yi)| b * yi).sum())
            .collect();
        (self.a * x, out)
    }

    /// Apply to an ambient point of `R x R^d`.
    pub fn apply_point(&self, point: &[f64]) -> Vec<f64> {
        let (x, y) = self.apply(point[0], &point[1..]);
        let mut out = vec![x];
        out.extend(y);
        out
    }
}

/// Scans integer vectors `(q0, q)` with `|q_i| <= q_max`, `q != 0`, for
/// relations `q0 + sum q_i c_i = 0` within `tol`. `q0` is recovered by
/// rounding, so the scan is exhaustive over the box.
fn scan_relations(coeffs: &[f64], q_max: u32, tol: f64) -> Result<Vec<(Vec<i64>, f64)>> {
    let d = coeffs.len();
    let width = 2 * q_max as u64 + 1;
    let mut size = 1u64;
    for _ in 0..d {
        size = size.saturating_mul(width);
        if size > 200_000_000 {
            return Err(Error::invalid(
                "relation scan too large; lower q_max or the dimension",
            ));
        }
    }
    let q_max = q_max as i64;
    let mut out = Vec::new();
    let mut q = vec![-q_max; d];
    'outer: loop {
        // Skip zero and sign mirrors: first nonzero entry must be positive.
        let first_nonzero = q.iter().find(|&&v| v != 0);
        if matches!(first_nonzero, Some(&v) if v > 0) {
            let s: f64 = q.iter().zip(coeffs).map(|(&qi, &c)| qi as f64 * c).sum();
            let q0 = (-s).round();
            if q0.abs() <= q_max as f64 {
                let residual = (s + q0).abs();
                if residual <= tol {
                    let mut rel = Vec::with_capacity(d + 1);
                    rel.push(q0 as i64);
                    rel.extend_from_slice(&q);
                    out.push((rel, residual));
                }
            }
        }
        for slot in q.iter_mut() {
            *slot += 1;
            if *slot <= q_max {
                continue 'outer;
            }
            *slot = -q_max;
        }
        break;
    }
    Ok(out)
}

/// All size-`k` combinations of `0..n` in lexicographic order.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut subset: Vec<usize> = (0..k).collect();
    if k == 0 || k > n {
        return out;
    }
    loop {
        out.push(subset.clone());
        // Advance the rightmost index that can still move.
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if subset[i] != i + n - k {
                subset[i] += 1;
                for j in i + 1..k {
                    subset[j] = subset[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Chooses the size-`n` subset of basis vectors whose internal projections
/// give the largest `|det|`, for numerical stability of the reordering.
fn best_p2_block(basis: &LatticeBasis) -> (Vec<usize>, Vec<usize>, f64) {
    let r = basis.rank();
    let n = basis.internal_dim();
    let mut best: (Vec<usize>, f64) = (Vec::new(), -1.0);
    for subset in combinations(r, n) {
        let mat = DMatrix::from_fn(n, n, |row, col| basis.vectors[subset[col]][basis.m + row]);
        let det = mat.determinant().abs();
        if det > best.1 {
            best = (subset, det);
        }
    }
    let rest: Vec<usize> = (0..r).filter(|k| !best.0.contains(k)).collect();
    (best.0, rest, best.1)
}

/// Exhaustively searches integer relation vectors with entries bounded by
/// `q_max` against the alpha coefficients derived from the basis (and the
/// beta coefficients when `m = 1`). Empty violations certify general
/// position up to the bound only.
pub fn check_general_position(basis: &LatticeBasis, q_max: u32) -> Result<IndependenceReport> {
    if q_max == 0 {
        return Err(Error::NonPositiveBound);
    }
    if !basis.is_full() {
        return Err(Error::RankDeficient);
    }
    let n = basis.internal_dim();
    let (block, rest, det) = best_p2_block(basis);
    let scale: f64 = block
        .iter()
        .map(|&i| norm(basis.p2(&basis.vectors[i])).max(f64::MIN_POSITIVE))
        .product();
    if det <= 1e-12 * scale {
        return Err(Error::NotDense);
    }
    let p_mat = DMatrix::from_fn(n, n, |row, col| basis.vectors[block[col]][basis.m + row]);
    let p_inv = p_mat.try_inverse().ok_or(Error::NotDense)?;

    let mut violations = Vec::new();
    for &t in &rest {
        let alpha = mat_vec(&p_inv, basis.p2(&basis.vectors[t]));
        for (coefficients, residual) in scan_relations(&alpha, q_max, DEFAULT_TOLERANCE)? {
            violations.push(RelationViolation {
                condition: IndependenceCondition::Alpha { row: t },
                coefficients,
                residual,
            });
        }
    }

    if basis.physical_dim() == 1 {
        // Condition (2) on the derived beta is equivalent to rational
        // independence of the physical projections; dividing by p1 of the
        // remaining vector turns it into a bounded-denominator scan.
        let t = rest[0];
        let p1_t = basis.vectors[t][0];
        if p1_t.abs() <= DEFAULT_TOLERANCE {
            let mut coefficients = vec![0; n + 1];
            coefficients[0] = 1;
            violations.push(RelationViolation {
                condition: IndependenceCondition::Beta,
                coefficients,
                residual: p1_t.abs(),
            });
        } else {
            let reduced: Vec<f64> = block.iter().map(|&i| basis.vectors[i][0] / p1_t).collect();
            for (coefficients, residual) in scan_relations(&reduced, q_max, DEFAULT_TOLERANCE)? {
                violations.push(RelationViolation {
                    condition: IndependenceCondition::Beta,
                    coefficients,
                    residual,
                });
            }
        }
    }

    Ok(IndependenceReport {
        bound_checked: q_max,
        violations,
    })
}

/// Finds all lattice points with vanishing internal projection among
/// integer combinations with coefficients bounded by `search_radius`, and
/// splits the lattice as `L (+) N` with `N` the kernel part. Returns `None`
/// for `N` when the internal projection is injective on the searched box.
pub fn kernel_split(
    basis: &LatticeBasis,
    search_radius: u32,
) -> Result<(LatticeBasis, Option<LatticeBasis>)> {
    if search_radius == 0 {
        return Err(Error::NonPositiveBound);
    }
    let r = basis.rank();
    let n = basis.internal_dim();
    let radius = search_radius as i64;

    // Internal projections as columns of an n x r matrix.
    let p2_mat = DMatrix::from_fn(n, r, |row, col| basis.vectors[col][basis.m + row]);
    let p2_scale = (0..r)
        .map(|c| p2_mat.column(c).norm())
        .fold(0.0f64, f64::max)
        .max(1.0);

    // Column-pivoted elimination to find pivot columns and rank.
    let (pivots, free) = pivot_columns(&p2_mat, 1e-12 * p2_scale);

    let mut kernel_coeffs: Vec<Vec<i64>> = Vec::new();
    if free.is_empty() {
        // p2 injective on the real span; only the zero vector projects to 0.
    } else {
        let piv_mat = DMatrix::from_fn(n, pivots.len(), |row, col| p2_mat[(row, pivots[col])]);
        let piv_pinv = (piv_mat.transpose() * &piv_mat)
            .try_inverse()
            .ok_or(Error::RankDeficient)?
            * piv_mat.transpose();
        // Enumerate free coefficients by max-norm shells so short kernel
        // vectors are found first.
        let mut assignments = enumerate_box(free.len(), radius);
        assignments.sort_by_key(|c| (c.iter().map(|v| v.abs()).max().unwrap_or(0), c.clone()));
        for f_assign in assignments {
            if f_assign.iter().all(|&v| v == 0) {
                continue;
            }
            if !matches!(f_assign.iter().find(|&&v| v != 0), Some(&v) if v > 0) {
                continue; // sign mirror
            }
            let mut rhs = vec![0.0; n];
            for (slot, &fi) in f_assign.iter().enumerate() {
                for row in 0..n {
                    rhs[row] -= fi as f64 * p2_mat[(row, free[slot])];
                }
            }
            let sol = &piv_pinv * DMatrix::from_column_slice(n, 1, &rhs);
            let mut coeffs = vec![0i64; r];
            let mut ok = true;
            for (slot, &col) in pivots.iter().enumerate() {
                let rounded = sol[(slot, 0)].round();
                if rounded.abs() > radius as f64 || (sol[(slot, 0)] - rounded).abs() > 1e-6 {
                    ok = false;
                    break;
                }
                coeffs[col] = rounded as i64;
            }
            if !ok {
                continue;
            }
            for (slot, &col) in free.iter().enumerate() {
                coeffs[col] = f_assign[slot];
            }
            let point = basis.point(&coeffs);
            if norm(basis.p2(&point)) < 1e-12 * p2_scale {
                kernel_coeffs.push(coeffs);
            }
        }
    }

    if kernel_coeffs.is_empty() {
        return Ok((basis.clone(), None));
    }

    // Incrementally build a unimodular change of basis whose leading rows
    // generate the kernel sublattice (primitivized for free: when a found
    // vector is g times a lattice vector, that lattice vector also lies in
    // the kernel and is promoted instead).
    let mut frame = UnimodularFrame::identity(r);
    let mut fixed = 0usize;
    for c in &kernel_coeffs {
        if fixed == r {
            break;
        }
        if frame.reduce_into_prefix(c, fixed) {
            fixed += 1;
        }
    }

    let to_vectors =
        |rows: &[Vec<i64>]| -> Vec<Vec<f64>> { rows.iter().map(|row| basis.point(row)).collect() };
    let kernel_rows: Vec<Vec<i64>> = frame.rows[..fixed].to_vec();
    let complement_rows: Vec<Vec<i64>> = frame.rows[fixed..].to_vec();
    let kernel = LatticeBasis::new(basis.m, basis.n, to_vectors(&kernel_rows))?;
    let complement = LatticeBasis::new(basis.m, basis.n, to_vectors(&complement_rows))?;
    Ok((complement, Some(kernel)))
}

/// Integer row frame `U` with inverse `V`, kept unimodular under the
/// elementary operations used by [`kernel_split`].
struct UnimodularFrame {
    rows: Vec<Vec<i64>>,
    inv_cols: Vec<Vec<i64>>, // V stored column-major: inv_cols[j] is column j
}

impl UnimodularFrame {
    fn identity(r: usize) -> Self {
        let rows = (0..r)
            .map(|i| (0..r).map(|j| i64::from(i == j)).collect())
            .collect();
        let inv_cols = (0..r)
            .map(|j| (0..r).map(|i| i64::from(i == j)).collect())
            .collect();
        UnimodularFrame { rows, inv_cols }
    }

    /// Coordinates of `c` in the current row basis: `a = c * V`.
    fn coords(&self, c: &[i64]) -> Vec<i64> {
        self.inv_cols
            .iter()
            .map(|col| col.iter().zip(c).map(|(&v, &ci)| v * ci).sum())
            .collect()
    }

    /// Row op `u_target += q * u_source`; keeps `V = U^{-1}` in sync
    /// (column op `col_source -= q * col_target`).
    fn row_add(&mut self, target: usize, source: usize, q: i64) {
        if q == 0 {
            return;
        }
        let src = self.rows[source].clone();
        for (t, s) in self.rows[target].iter_mut().zip(&src) {
            *t += q * s;
        }
        let tgt_col = self.inv_cols[target].clone();
        for (s, t) in self.inv_cols[source].iter_mut().zip(&tgt_col) {
            *s -= q * t;
        }
    }

    fn negate(&mut self, i: usize) {
        for v in self.rows[i].iter_mut() {
            *v = -*v;
        }
        for v in self.inv_cols[i].iter_mut() {
            *v = -*v;
        }
    }

    fn swap(&mut self, i: usize, j: usize) {
        self.rows.swap(i, j);
        self.inv_cols.swap(i, j);
    }

    /// Reduces the coordinates of `c` over rows `fixed..` to a single entry
    /// at position `fixed` by Euclidean row operations. Returns false when
    /// `c` already lies in the span of the first `fixed` rows.
    fn reduce_into_prefix(&mut self, c: &[i64], fixed: usize) -> bool {
        let r = self.rows.len();
        let mut a = self.coords(c);
        loop {
            let nonzero: Vec<usize> = (fixed..r).filter(|&i| a[i] != 0).collect();
            match nonzero.len() {
                0 => return false,
                1 => {
                    let p = nonzero[0];
                    if a[p] < 0 {
                        self.negate(p);
                        a[p] = -a[p];
                    }
                    self.swap(fixed, p);
                    a.swap(fixed, p);
                    return true;
                }
                _ => {
                    // Reduce every entry by the smallest-magnitude pivot.
                    let p = *nonzero
                        .iter()
                        .min_by_key(|&&i| a[i].abs())
                        .expect("nonempty");
                    for &t in &nonzero {
                        if t == p {
                            continue;
                        }
                        let q = a[t].div_euclid(a[p]);
                        // a_t -= q * a_p corresponds to u_p += q * u_t.
                        self.row_add(p, t, q);
                        a[t] -= q * a[p];
                    }
                }
            }
        }
    }
}

fn pivot_columns(mat: &DMatrix<f64>, tol: f64) -> (Vec<usize>, Vec<usize>) {
    let (rows, cols) = mat.shape();
    let mut work = mat.clone();
    let mut pivots = Vec::new();
    let mut used_rows = vec![false; rows];
    for _ in 0..rows.min(cols) {
        // Largest remaining entry over unused rows and unpivoted columns.
        let mut best = (0usize, 0usize, tol);
        for r in 0..rows {
            if used_rows[r] {
                continue;
            }
            for c in 0..cols {
                if pivots.contains(&c) {
                    continue;
                }
                if work[(r, c)].abs() > best.2 {
                    best = (r, c, work[(r, c)].abs());
                }
            }
        }
        if best.2 <= tol {
            break;
        }
        let (pr, pc, _) = best;
        used_rows[pr] = true;
        pivots.push(pc);
        for r in 0..rows {
            if r == pr || used_rows[r] {
                continue;
            }
            let factor = work[(r, pc)] / work[(pr, pc)];
            for c in 0..cols {
                let delta = factor * work[(pr, c)];
                work[(r, c)] -= delta;
            }
        }
    }
    pivots.sort_unstable();
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    (pivots, free)
}

fn enumerate_box(dims: usize, radius: i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..dims {
        let mut next = Vec::with_capacity(out.len() * (2 * radius as usize + 1));
        for prefix in &out {
            for v in -radius..=radius {
                let mut p = prefix.clone();
                p.push(v);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// Reduces a general-position lattice basis in `R x R^d` to special form:
/// returns the diagonal map `T` and the special-form lattice with
/// `T(basis) = ` generator family, verified to 1e-9.
pub fn to_special_form(basis: &LatticeBasis) -> Result<(DiagonalSplitMap, SpecialFormLattice)> {
    if basis.physical_dim() != 1 {
        return Err(Error::invalid("special-form reduction requires m = 1"));
    }
    if !basis.is_full() {
        return Err(Error::RankDeficient);
    }
    let d = basis.internal_dim();
    let (block, rest, det) = best_p2_block(basis);
    let scale: f64 = block
        .iter()
        .map(|&i| norm(basis.p2(&basis.vectors[i])).max(f64::MIN_POSITIVE))
        .product();
    if det <= 1e-12 * scale {
        return Err(Error::GeneralPosition(
            "no reordering makes the p2 columns invertible".into(),
        ));
    }
    let p_mat = DMatrix::from_fn(d, d, |row, col| basis.vectors[block[col]][1 + row]);
    let b = p_mat.clone().try_inverse().ok_or_else(|| {
        Error::GeneralPosition("no reordering makes the p2 columns invertible".into())
    })?;
    let t_idx = rest[0];
    let alpha = mat_vec(&b, basis.p2(&basis.vectors[t_idx]));
    let denom = basis.vectors[t_idx][0]
        - alpha
            .iter()
            .zip(&block)
            .map(|(&aj, &i)| aj * basis.vectors[i][0])
            .sum::<f64>();
    if denom.abs() <= 1e-12 {
        return Err(Error::GeneralPosition(
            "zero denominator for the scale a".into(),
        ));
    }
    let a = 1.0 / denom;
    let beta: Vec<f64> = block.iter().map(|&i| a * basis.vectors[i][0]).collect();

    let lattice = SpecialFormLattice::certified(alpha, beta, DEFAULT_CERTIFICATION_BOUND)?;
    let map = DiagonalSplitMap::new(a, b)?;

    // Round-trip guarantee: T carries each input vector onto its generator.
    let mut worst: f64 = 0.0;
    for (j, &i) in block.iter().enumerate() {
        let image = map.apply_point(&basis.vectors[i]);
        let mut target = vec![0.0; d + 1];
        target[0] = lattice.beta[j];
        target[1 + j] = 1.0;
        worst = worst.max(max_abs_diff(&image, &target));
    }
    let image = map.apply_point(&basis.vectors[t_idx]);
    let mut target = vec![1.0 + dot(&lattice.beta, &lattice.alpha)];
    target.extend_from_slice(&lattice.alpha);
    worst = worst.max(max_abs_diff(&image, &target));
    if worst > DEFAULT_TOLERANCE {
        return Err(Error::GeneralPosition(format!(
            "special-form round trip residual {worst:.3e} exceeds 1e-9"
        )));
    }
    Ok((map, lattice))
}

/// All lattice points in the coefficient box whose internal projection lies
/// in the window, sorted by physical projection. The box is inclusive per
/// coefficient.
pub fn lift_window_points(
    basis: &LatticeBasis,
    window: &Window,
    coeff_box: &[(i64, i64)],
) -> Result<Vec<LatticePoint>> {
    if coeff_box.len() != basis.rank() {
        return Err(Error::invalid("coefficient box rank mismatch"));
    }
    if window.dim() != basis.internal_dim() {
        return Err(Error::invalid(
            "window dimension must match internal dimension",
        ));
    }
    let (bb_lo, bb_hi) = window.bounding_box();
    if bb_lo.iter().chain(&bb_hi).any(|v| !v.is_finite()) {
        return Err(Error::UnboundedWindow);
    }
    let mut size = 1u128;
    for &(lo, hi) in coeff_box {
        if hi < lo {
            return Err(Error::invalid("coefficient box has hi < lo"));
        }
        size = size.saturating_mul((hi - lo + 1) as u128);
        if size > 200_000_000 {
            return Err(Error::invalid("coefficient box too large to enumerate"));
        }
    }
    let mut out = Vec::new();
    let mut coeffs: Vec<i64> = coeff_box.iter().map(|r| r.0).collect();
    'outer: loop {
        let point = basis.point(&coeffs);
        if window.indicator(basis.p2(&point)) {
            out.push(LatticePoint {
                coefficients: coeffs.clone(),
                p1: basis.p1(&point).to_vec(),
                p2: basis.p2(&point).to_vec(),
            });
        }
        for i in 0..coeffs.len() {
            coeffs[i] += 1;
            if coeffs[i] <= coeff_box[i].1 {
                continue 'outer;
            }
            coeffs[i] = coeff_box[i].0;
        }
        break;
    }
    out.sort_by(|a, b| {
        a.p1.iter()
            .zip(&b.p1)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.coefficients.cmp(&b.coefficients))
    });
    Ok(out)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

fn mat_vec(m: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| m[(r, c)] * v[c]).sum())
        .collect()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
