//! Birkhoff-sum discrepancy machinery for irrational rotations: one- and
//! two-sided scans, bounded-remainder classification, two-window gap
//! profiles and G-uniformity scans.
//!
//! The torus orbit `x + k*alpha mod Z^d` is stepped with compensated
//! summation per coordinate; at 1e5-1e7 steps naive accumulation loses the
//! digits that decide membership near window boundaries.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::window::Window;
use crate::{Error, Result, DEFAULT_TOLERANCE};

/// Relative slack for stabilization verdicts. The running maximum of a
/// bounded profile creeps toward its supremum (attained only in the limit),
/// so verdicts compare scales multiplicatively rather than by absolute
/// equality.
pub const STABILIZATION_SLACK: f64 = 0.05;

/// Deterministic torus line `x + k*alpha mod Z^d` with per-coordinate
/// compensated summation; integer wrap subtraction is exact and leaves the
/// compensation untouched.
#[derive(Debug, Clone)]
pub struct TorusOrbit {
    position: Vec<f64>,
    compensation: Vec<f64>,
    step: Vec<f64>,
}

impl TorusOrbit {
    /// Starts at `x + k0*alpha` (reduced coordinatewise to `[0, 1)`).
    pub fn new(x: &[f64], alpha: &[f64], k0: i64) -> Self {
        assert_eq!(x.len(), alpha.len(), "dimension mismatch");
        let position = x
            .iter()
            .zip(alpha)
            .map(|(&xi, &ai)| fract(xi + k0 as f64 * ai))
            .collect();
        let step = alpha.iter().map(|&ai| fract(ai)).collect();
        TorusOrbit {
            position,
            compensation: vec![0.0; x.len()],
            step,
        }
    }

    /// Current torus point in `[0, 1)^d`.
    pub fn current(&self) -> &[f64] {
        &self.position
    }

    /// Advance one rotation step (Kahan update per coordinate).
    pub fn advance(&mut self) {
        for i in 0..self.position.len() {
            let y = self.step[i] + self.compensation[i];
            let t = self.position[i] + y;
            self.compensation[i] = (self.position[i] - t) + y;
            self.position[i] = t;
            if self.position[i] >= 1.0 {
                // Subtracting 1 is exact here (Sterbenz), so the
                // compensation remains valid.
                self.position[i] -= 1.0;
            }
            if self.position[i] < 0.0 {
                self.position[i] += 1.0;
            }
        }
    }
}

fn fract(x: f64) -> f64 {
    let f = x - x.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// One-sided discrepancy profile `D(N) = sum_{k<N} chi_W(x + k alpha) -
/// N*mes W` with its running maximum.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiscrepancyProfile {
    pub alpha: Vec<f64>,
    pub x: Vec<f64>,
    pub window_id: String,
    pub window_measure: f64,
    /// `D(N)` for `N = 1..=N_max` (value at index `N-1`).
    pub values: Vec<f64>,
    /// `M(N) = max_{N' <= N} |D(N')|`, nondecreasing.
    pub running_max: Vec<f64>,
}

impl DiscrepancyProfile {
    pub fn n_max(&self) -> usize {
        self.values.len()
    }

    /// Running maximum at truncation `n` (1-based).
    pub fn max_at(&self, n: usize) -> f64 {
        assert!(
            n >= 1 && n <= self.running_max.len(),
            "truncation out of range"
        );
        self.running_max[n - 1]
    }

    /// Least-squares slope of `|D(N)|` against `N`; near the measure gap
    /// for linearly drifting pair profiles.
    pub fn fitted_abs_slope(&self) -> f64 {
        let n = self.values.len();
        if n < 2 {
            return 0.0;
        }
        let mean_x = (n as f64 + 1.0) / 2.0;
        let mean_y = self.values.iter().map(|v| v.abs()).sum::<f64>() / n as f64;
        let mut cov = 0.0;
        let mut var = 0.0;
        for (i, v) in self.values.iter().enumerate() {
            let dx = (i + 1) as f64 - mean_x;
            cov += dx * (v.abs() - mean_y);
            var += dx * dx;
        }
        cov / var
    }
}

/// Computes the discrepancy profile of a window along the orbit of `x`.
pub fn discrepancy_profile(
    window: &Window,
    alpha: &[f64],
    x: &[f64],
    n_max: u32,
) -> Result<DiscrepancyProfile> {
    if n_max == 0 {
        return Err(Error::NonPositiveBound);
    }
    if alpha.len() != window.dim() || x.len() != window.dim() {
        return Err(Error::invalid("alpha/x dimension must match the window"));
    }
    let mes = window.measure();
    let mut orbit = TorusOrbit::new(x, alpha, 0);
    let mut values = Vec::with_capacity(n_max as usize);
    let mut running_max = Vec::with_capacity(n_max as usize);
    let mut d = 0.0f64;
    let mut m = 0.0f64;
    for _ in 0..n_max {
        let chi = window.chi(orbit.current()) as f64;
        // Plain accumulation: D(N) - D(N-1) must equal chi - mes exactly.
        d += chi - mes;
        m = m.max(d.abs());
        values.push(d);
        running_max.push(m);
        orbit.advance();
    }
    Ok(DiscrepancyProfile {
        alpha: alpha.to_vec(),
        x: x.to_vec(),
        window_id: window.id_string(),
        window_measure: mes,
        values,
        running_max,
    })
}

/// Supremum of `|sum_{k=j}^{j+n-1} chi_W(x + k alpha) - n*mes W|` over
/// block starts `j` in the inclusive range `j_range` and lengths
/// `n` in `[1, n_max]`. With `j_range = (0, 0)` this is exactly the
/// one-sided running maximum at truncation `n_max`.
pub fn two_sided_scan(
    window: &Window,
    alpha: &[f64],
    x: &[f64],
    n_max: u32,
    j_range: (i64, i64),
) -> Result<f64> {
    if n_max == 0 {
        return Err(Error::NonPositiveBound);
    }
    if j_range.1 < j_range.0 {
        return Err(Error::invalid("j_range must be nonempty"));
    }
    let mes = window.measure();
    let (j_lo, j_hi) = j_range;
    let len = (j_hi - j_lo) as usize + n_max as usize;
    // Q(i) = sum of the first i chi values (from k = j_lo) minus i*mes.
    let mut q = Vec::with_capacity(len + 1);
    q.push(0.0);
    let mut orbit = TorusOrbit::new(x, alpha, j_lo);
    let mut prefix: i64 = 0;
    for i in 1..=len {
        prefix += window.chi(orbit.current()) as i64;
        orbit.advance();
        q.push(prefix as f64 - i as f64 * mes);
    }
    // For every block start a, scan Q over (a, a + n_max] with monotonic
    // deques for the sliding max and min.
    let starts = (j_hi - j_lo) as usize;
    let mut sup = 0.0f64;
    let mut max_dq: std::collections::VecDeque<usize> = Default::default();
    let mut min_dq: std::collections::VecDeque<usize> = Default::default();
    let mut right = 0usize;
    for a in 0..=starts {
        let hi = a + n_max as usize;
        while right < hi {
            right += 1;
            while max_dq.back().is_some_and(|&i| q[i] <= q[right]) {
                max_dq.pop_back();
            }
            max_dq.push_back(right);
            while min_dq.back().is_some_and(|&i| q[i] >= q[right]) {
                min_dq.pop_back();
            }
            min_dq.push_back(right);
        }
        while max_dq.front().is_some_and(|&i| i <= a) {
            max_dq.pop_front();
        }
        while min_dq.front().is_some_and(|&i| i <= a) {
            min_dq.pop_front();
        }
        if let Some(&i) = max_dq.front() {
            sup = sup.max((q[i] - q[a]).abs());
        }
        if let Some(&i) = min_dq.front() {
            sup = sup.max((q[i] - q[a]).abs());
        }
    }
    Ok(sup)
}

/// Evidence classes for bounded-remainder behaviour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BrsEvidence {
    BoundedEvidence,
    GrowthEvidence,
}

/// Classification verdict; records both maxima so callers can tighten the
/// split or the horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BrsVerdict {
    pub verdict: BrsEvidence,
    pub split: u32,
    pub n_max: u32,
    pub max_at_split: f64,
    pub max_at_end: f64,
}

/// Stabilization heuristic: bounded evidence when the running maximum past
/// the split grows by at most [`STABILIZATION_SLACK`] relatively (plus the
/// absolute tolerance). Bounded profiles approach their supremum from
/// below, so exact equality of maxima cannot be required; logarithmic or
/// linear growth fails the relative test decisively.
pub fn brs_classify(profile: &DiscrepancyProfile, split: u32) -> Result<BrsVerdict> {
    let n_max = profile.n_max() as u32;
    if split == 0 || split >= n_max {
        return Err(Error::invalid("split must satisfy 0 < split < N_max"));
    }
    let max_at_split = profile.max_at(split as usize);
    let max_at_end = profile.max_at(n_max as usize);
    let verdict = if max_at_end <= max_at_split * (1.0 + STABILIZATION_SLACK) + DEFAULT_TOLERANCE {
        BrsEvidence::BoundedEvidence
    } else {
        BrsEvidence::GrowthEvidence
    };
    Ok(BrsVerdict {
        verdict,
        split,
        n_max,
        max_at_split,
        max_at_end,
    })
}

/// Two-window gap profile `S_N = sum_{n<N} (chi_W - chi_W')(x + n alpha)`
/// (no measure subtraction); integer-valued, so stabilization of the
/// running maximum is exact for equal-measure bounded-remainder pairs.
pub fn pair_gap_profile(
    window: &Window,
    window2: &Window,
    alpha: &[f64],
    x: &[f64],
    n_max: u32,
) -> Result<DiscrepancyProfile> {
    if n_max == 0 {
        return Err(Error::NonPositiveBound);
    }
    if window.dim() != window2.dim() {
        return Err(Error::invalid("windows must have equal dimension"));
    }
    if alpha.len() != window.dim() || x.len() != window.dim() {
        return Err(Error::invalid("alpha/x dimension must match the windows"));
    }
    let mut orbit = TorusOrbit::new(x, alpha, 0);
    let mut values = Vec::with_capacity(n_max as usize);
    let mut running_max = Vec::with_capacity(n_max as usize);
    let mut s: i64 = 0;
    let mut m: i64 = 0;
    for _ in 0..n_max {
        let t = orbit.current();
        s += window.chi(t) as i64 - window2.chi(t) as i64;
        m = m.max(s.abs());
        values.push(s as f64);
        running_max.push(m as f64);
        orbit.advance();
    }
    Ok(DiscrepancyProfile {
        alpha: alpha.to_vec(),
        x: x.to_vec(),
        window_id: format!("{} minus {}", window.id_string(), window2.id_string()),
        window_measure: window.measure() - window2.measure(),
        values,
        running_max,
    })
}

/// G-uniformity scan report: per-`k` minima of `|W ∩ (P_k + x)|` over the
/// sampled base points, the fitted uniformity constant, and the smallest
/// threshold index past which every block clears it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UniformityReport {
    pub generators: Vec<Vec<f64>>,
    pub k_values: Vec<u32>,
    pub min_counts: Vec<u64>,
    /// `min_count / k^g` per `k`.
    pub ratios: Vec<f64>,
    pub c_estimate: f64,
    pub k0_estimate: Option<u32>,
    pub x_samples: u32,
    pub seed: u64,
}

/// For each `k <= k_max` and each seeded base point `x`, counts the torus
/// points `{sum_j m_j g_j + x : 0 <= m_j < k}` lying in the window (via
/// `chi >= 1`). `c_estimate` is the smallest ratio over the upper half of
/// the `k` range; `k0_estimate` the largest `k` still below it (0 when the
/// bound holds everywhere, absent when the estimate degenerates to zero).
pub fn uniformity_scan(
    window: &Window,
    generators: &[Vec<f64>],
    k_max: u32,
    x_samples: u32,
    seed: u64,
) -> Result<UniformityReport> {
    if k_max < 2 {
        return Err(Error::invalid("k_max must be at least 2"));
    }
    if x_samples == 0 {
        return Err(Error::invalid("x_samples must be positive"));
    }
    let d = window.dim();
    if generators.is_empty() || generators.iter().any(|g| g.len() != d) {
        return Err(Error::invalid("generators must match the window dimension"));
    }
    let g = generators.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bases: Vec<Vec<f64>> = (0..x_samples)
        .map(|_| (0..d).map(|_| rng.gen::<f64>()).collect())
        .collect();

    let mut k_values = Vec::new();
    let mut min_counts = Vec::new();
    let mut ratios = Vec::new();
    for k in 1..=k_max {
        let mut min_count = u64::MAX;
        for base in &bases {
            let mut count = 0u64;
            let mut idx = vec![0u32; g];
            let mut point = vec![0.0; d];
            'outer: loop {
                for i in 0..d {
                    let mut acc = base[i];
                    for (j, gen) in generators.iter().enumerate() {
                        acc += idx[j] as f64 * gen[i];
                    }
                    point[i] = fract(acc);
                }
                if window.chi(&point) >= 1 {
                    count += 1;
                }
                for slot in idx.iter_mut() {
                    *slot += 1;
                    if *slot < k {
                        continue 'outer;
                    }
                    *slot = 0;
                }
                break;
            }
            min_count = min_count.min(count);
        }
        k_values.push(k);
        min_counts.push(min_count);
        ratios.push(min_count as f64 / (k as f64).powi(g as i32));
    }

    let upper_half = &ratios[(k_max as usize) / 2..];
    let c_estimate = upper_half.iter().copied().fold(f64::INFINITY, f64::min);
    let k0_estimate = if c_estimate > 0.0 {
        let last_below = k_values
            .iter()
            .zip(&ratios)
            .filter(|(_, &r)| r < c_estimate)
            .map(|(&k, _)| k)
            .max();
        Some(last_below.unwrap_or(0))
    } else {
        None
    };
    Ok(UniformityReport {
        generators: generators.to_vec(),
        k_values,
        min_counts,
        ratios,
        c_estimate: if c_estimate.is_finite() {
            c_estimate
        } else {
            0.0
        },
        k0_estimate,
        x_samples,
        seed,
    })
}

/// Default base-point grid: a 17-per-axis product grid offset by inverse
/// primes, chosen off the rationals aligned with common window boundaries.
pub fn default_x_grid(d: usize) -> Vec<Vec<f64>> {
    const PRIMES: [f64; 6] = [2.0, 3.0, 5.0, 7.0, 11.0, 13.0];
    const SIDE: usize = 17;
    let mut grid = vec![vec![]];
    for axis in 0..d {
        let offset = 1.0 / PRIMES[axis % PRIMES.len()];
        let mut next = Vec::with_capacity(grid.len() * SIDE);
        for prefix in &grid {
            for i in 0..SIDE {
                let mut p = prefix.clone();
                p.push((i as f64 + offset) / SIDE as f64);
                next.push(p);
            }
        }
        grid = next;
    }
    grid
}
