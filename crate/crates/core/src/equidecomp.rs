//! Piecewise-translation maps and Monte Carlo verification of
//! equidecomposability up to measure zero.
//!
//! The true measurable pieces whose existence the theory guarantees are
//! non-constructive; candidate pieces here are unions of raster cells
//! (boxes), the honest computable surrogate. Verification reports defect
//! measures with standard errors and never claims convergence.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::matching::{orbit_enumerate, translation_spread};
use crate::window::{Window, WindowConfig};
use crate::{Error, GroupElement, Result, DEFAULT_TOLERANCE};

/// Samples per parallel verification block; blocks draw from independent
/// seeded streams so tallies are identical regardless of thread count.
const SAMPLE_BLOCK: u64 = 65_536;

/// Fraction of the aggregated orbit points below which a translation label
/// is dropped during assembly (rare labels are boundary artifacts of the
/// finite orbit range).
pub const LABEL_DROP_FRACTION: f64 = 0.01;

/// One piece of a candidate equidecomposition.
#[derive(Debug, Clone)]
pub struct Piece {
    pub region: Window,
    pub translation: GroupElement,
}

/// A finite list of (piece, translation) pairs. When any label is symbolic
/// (`k*alpha + m`), `alpha` must be present to resolve it.
#[derive(Debug, Clone)]
pub struct PiecewiseTranslation {
    alpha: Option<Vec<f64>>,
    pieces: Vec<Piece>,
    resolved: Vec<Vec<f64>>,
}

/// Verification verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

/// Monte Carlo defect estimates for a candidate equidecomposition of
/// `A` onto `B`. All defects are measures (nonnegative) with standard
/// errors from the binomial/sample variance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartitionReport {
    pub verdict: Verdict,
    pub reason: Option<String>,
    /// Measure of `A` symmetric-difference the union of pieces.
    pub defect_source: f64,
    /// Measure of the multiply-covered subset of the source (with
    /// multiplicity).
    pub defect_overlap: f64,
    /// Measure of `B` symmetric-difference the union of translated pieces.
    pub defect_target: f64,
    pub se_source: f64,
    pub se_overlap: f64,
    pub se_target: f64,
    pub samples: u64,
    pub seed: u64,
    pub measure_a: f64,
    pub measure_b: f64,
}

/// JSON-facing decomposition description. Pieces carry either a symbolic
/// label (`k`, `m`) or a raw translation vector `v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<f64>>,
    pub pieces: Vec<PieceConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PieceConfig {
    pub window: WindowConfig,
    #[serde(flatten)]
    pub translation: TranslationConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TranslationConfig {
    Orbit { k: i64, m: Vec<i64> },
    Raw { v: Vec<f64> },
}

impl PiecewiseTranslation {
    /// Validates that every label resolves to a concrete vector of the
    /// piece dimension.
    pub fn new(alpha: Option<Vec<f64>>, pieces: Vec<Piece>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::invalid(
                "piecewise translation needs at least one piece",
            ));
        }
        let d = pieces[0].region.dim();
        let empty: Vec<f64> = Vec::new();
        let alpha_slice = alpha.as_deref().unwrap_or(&empty);
        let mut resolved = Vec::with_capacity(pieces.len());
        for piece in &pieces {
            if piece.region.dim() != d {
                return Err(Error::invalid("pieces have mixed dimensions"));
            }
            let t = piece.translation.resolve(alpha_slice)?;
            if t.len() != d {
                return Err(Error::invalid("translation dimension mismatch"));
            }
            resolved.push(t);
        }
        Ok(PiecewiseTranslation {
            alpha,
            pieces,
            resolved,
        })
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn alpha(&self) -> Option<&[f64]> {
        self.alpha.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.pieces[0].region.dim()
    }

    /// Resolved translation vector of each piece.
    pub fn translations(&self) -> &[Vec<f64>] {
        &self.resolved
    }

    /// Applies the map: `x + translation` of the unique containing piece.
    /// `None` when no piece contains `x`; containment in several pieces is
    /// an error (disjointness violated).
    pub fn apply(&self, x: &[f64]) -> Result<Option<(Vec<f64>, usize)>> {
        let containing: Vec<usize> = self
            .pieces
            .iter()
            .enumerate()
            .filter(|(_, p)| p.region.indicator(x))
            .map(|(i, _)| i)
            .collect();
        match containing.len() {
            0 => Ok(None),
            1 => {
                let i = containing[0];
                let image = x
                    .iter()
                    .zip(&self.resolved[i])
                    .map(|(a, b)| a + b)
                    .collect();
                Ok(Some((image, i)))
            }
            _ => Err(Error::AmbiguousPieces(containing)),
        }
    }

    pub fn to_config(&self) -> DecompositionConfig {
        DecompositionConfig {
            alpha: self.alpha.clone(),
            pieces: self
                .pieces
                .iter()
                .map(|p| PieceConfig {
                    window: p.region.to_config(),
                    translation: match &p.translation {
                        GroupElement::Orbit { k, m } => TranslationConfig::Orbit {
                            k: *k,
                            m: m.clone(),
                        },
                        GroupElement::Vector(v) => TranslationConfig::Raw {
                            v: v.iter().map(|x| x.0).collect(),
                        },
                    },
                })
                .collect(),
        }
    }

    pub fn from_config(config: &DecompositionConfig) -> Result<Self> {
        let pieces = config
            .pieces
            .iter()
            .map(|p| {
                Ok(Piece {
                    region: Window::from_config(&p.window)?,
                    translation: match &p.translation {
                        TranslationConfig::Orbit { k, m } => GroupElement::orbit(*k, m.clone()),
                        TranslationConfig::Raw { v } => GroupElement::vector(v.clone()),
                    },
                })
            })
            .collect::<Result<Vec<_>>>()?;
        PiecewiseTranslation::new(config.alpha.clone(), pieces)
    }
}

struct Tally {
    source_mismatch: u64,
    overlap_excess: u64,
    overlap_excess_sq: u64,
    target_mismatch: u64,
}

/// Verifies a candidate equidecomposition of `A` onto `B` by Monte Carlo:
/// source cover and overlap defects are sampled over the joint bounding box
/// of `A` and the pieces, the target defect over the joint box of `B` and
/// the translated pieces. PASS requires every defect below
/// `3*SE + 1e-6*max(mes A, 1)`. Unequal measures fail immediately, since
/// translations preserve measure.
pub fn verify_equidecomposition(
    a: &Window,
    b: &Window,
    pt: &PiecewiseTranslation,
    samples: u64,
    seed: u64,
) -> Result<PartitionReport> {
    if samples < 10_000 {
        return Err(Error::invalid("verification needs at least 10^4 samples"));
    }
    let d = a.dim();
    if b.dim() != d || pt.dim() != d {
        return Err(Error::invalid("window/piece dimensions must agree"));
    }
    let measure_a = a.measure();
    let measure_b = b.measure();
    if (measure_a - measure_b).abs() > DEFAULT_TOLERANCE {
        return Ok(PartitionReport {
            verdict: Verdict::Fail,
            reason: Some(format!(
                "windows must have equal measure (got {measure_a} and {measure_b}); translations preserve measure"
            )),
            defect_source: 0.0,
            defect_overlap: 0.0,
            defect_target: 0.0,
            se_source: 0.0,
            se_overlap: 0.0,
            se_target: 0.0,
            samples,
            seed,
            measure_a,
            measure_b,
        });
    }

    // Joint source box: A plus all pieces. Joint target box: B plus all
    // translated pieces.
    let (mut src_lo, mut src_hi) = a.bounding_box();
    let (mut tgt_lo, mut tgt_hi) = b.bounding_box();
    for (piece, shift) in pt.pieces().iter().zip(pt.translations()) {
        let (plo, phi) = piece.region.bounding_box();
        for i in 0..d {
            src_lo[i] = src_lo[i].min(plo[i]);
            src_hi[i] = src_hi[i].max(phi[i]);
            tgt_lo[i] = tgt_lo[i].min(plo[i] + shift[i]);
            tgt_hi[i] = tgt_hi[i].max(phi[i] + shift[i]);
        }
    }
    let src_vol: f64 = src_lo.iter().zip(&src_hi).map(|(l, h)| h - l).product();
    let tgt_vol: f64 = tgt_lo.iter().zip(&tgt_hi).map(|(l, h)| h - l).product();

    let blocks = samples.div_ceil(SAMPLE_BLOCK);
    let tallies: Vec<Tally> = (0..blocks)
        .into_par_iter()
        .map(|block| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(block + 1);
            let count = if block == blocks - 1 {
                samples - block * SAMPLE_BLOCK
            } else {
                SAMPLE_BLOCK
            };
            let mut t = Tally {
                source_mismatch: 0,
                overlap_excess: 0,
                overlap_excess_sq: 0,
                target_mismatch: 0,
            };
            let mut x = vec![0.0; d];
            let mut shifted = vec![0.0; d];
            for _ in 0..count {
                // Source-side sample.
                for i in 0..d {
                    x[i] = src_lo[i] + rng.gen::<f64>() * (src_hi[i] - src_lo[i]);
                }
                let in_a = a.indicator(&x);
                let mut cover = 0u64;
                for piece in pt.pieces() {
                    if piece.region.indicator(&x) {
                        cover += 1;
                    }
                }
                if in_a != (cover >= 1) {
                    t.source_mismatch += 1;
                }
                let excess = cover.saturating_sub(1);
                t.overlap_excess += excess;
                t.overlap_excess_sq += excess * excess;

                // Target-side sample.
                for i in 0..d {
                    x[i] = tgt_lo[i] + rng.gen::<f64>() * (tgt_hi[i] - tgt_lo[i]);
                }
                let in_b = b.indicator(&x);
                let mut covered = false;
                for (piece, shift) in pt.pieces().iter().zip(pt.translations()) {
                    for i in 0..d {
                        shifted[i] = x[i] - shift[i];
                    }
                    if piece.region.indicator(&shifted) {
                        covered = true;
                        break;
                    }
                }
                if in_b != covered {
                    t.target_mismatch += 1;
                }
            }
            t
        })
        .collect();

    let mut source_mismatch = 0u64;
    let mut overlap_excess = 0u64;
    let mut overlap_excess_sq = 0u64;
    let mut target_mismatch = 0u64;
    for t in tallies {
        source_mismatch += t.source_mismatch;
        overlap_excess += t.overlap_excess;
        overlap_excess_sq += t.overlap_excess_sq;
        target_mismatch += t.target_mismatch;
    }

    let n = samples as f64;
    let bernoulli = |hits: u64, vol: f64| -> (f64, f64) {
        let p = hits as f64 / n;
        (vol * p, vol * (p * (1.0 - p) / n).sqrt())
    };
    let (defect_source, se_source) = bernoulli(source_mismatch, src_vol);
    let (defect_target, se_target) = bernoulli(target_mismatch, tgt_vol);
    let mean_excess = overlap_excess as f64 / n;
    let var_excess = (overlap_excess_sq as f64 / n - mean_excess * mean_excess).max(0.0);
    let defect_overlap = src_vol * mean_excess;
    let se_overlap = src_vol * (var_excess / n).sqrt();

    let floor = 1e-6 * measure_a.max(1.0);
    let pass = defect_source < 3.0 * se_source + floor
        && defect_overlap < 3.0 * se_overlap + floor
        && defect_target < 3.0 * se_target + floor;
    Ok(PartitionReport {
        verdict: if pass { Verdict::Pass } else { Verdict::Fail },
        reason: None,
        defect_source,
        defect_overlap,
        defect_target,
        se_source,
        se_overlap,
        se_target,
        samples,
        seed,
        measure_a,
        measure_b,
    })
}

/// Assembly log for [`pieces_from_orbit_matchings`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AssemblyLog {
    pub total_points: u64,
    /// Kept labels with their aggregated point counts.
    pub label_counts: Vec<((i64, Vec<i64>), u64)>,
    /// Dropped rare labels with their counts.
    pub dropped: Vec<((i64, Vec<i64>), u64)>,
    pub cells: usize,
    pub unassigned_cells: usize,
    pub seed: u64,
}

/// Aggregates orbit matchings over a grid of base points into a candidate
/// piecewise translation: for each occurring label `g = (e, m)` the source
/// points matched via `g` are rasterized into a union of grid cells of side
/// `raster`. Labels carrying less than [`LABEL_DROP_FRACTION`] of the
/// points are dropped and logged.
pub fn pieces_from_orbit_matchings(
    window_a: &Window,
    window_b: &Window,
    alpha: &[f64],
    x_grid: &[Vec<f64>],
    n_range: (i64, i64),
    raster: f64,
    seed: u64,
) -> Result<(PiecewiseTranslation, AssemblyLog)> {
    if x_grid.is_empty() {
        return Err(Error::invalid("x grid must be nonempty"));
    }
    if !raster.is_finite() || raster <= 0.0 {
        return Err(Error::invalid("raster cell side must be positive"));
    }
    let d = window_a.dim();
    let (bb_lo, bb_hi) = window_a.bounding_box();
    let cells_per_axis: Vec<usize> = (0..d)
        .map(|i| (((bb_hi[i] - bb_lo[i]) / raster).ceil() as usize).max(1))
        .collect();
    let total_cells: usize = cells_per_axis.iter().product();
    if total_cells > 50_000_000 {
        return Err(Error::invalid("raster too fine for the window extent"));
    }

    // Enumerations run in parallel over the grid; tallies merge in grid
    // order, so the result does not depend on thread scheduling.
    let per_x: Vec<Vec<(usize, (i64, Vec<i64>))>> = x_grid
        .par_iter()
        .map(|x| {
            let enumeration = orbit_enumerate(window_a, window_b, alpha, x, n_range)?;
            // The scan both re-derives labels and validates them.
            translation_spread(&enumeration, alpha)?;
            let mut hits = Vec::with_capacity(enumeration.records.len());
            for rec in &enumeration.records {
                let mut cell = 0usize;
                let mut stride = 1usize;
                let mut in_bounds = true;
                for i in 0..d {
                    let idx = ((rec.a[i] - bb_lo[i]) / raster).floor();
                    if idx < 0.0 || idx as usize >= cells_per_axis[i] {
                        in_bounds = false;
                        break;
                    }
                    cell += idx as usize * stride;
                    stride *= cells_per_axis[i];
                }
                if in_bounds {
                    hits.push((cell, (rec.e, rec.m.clone())));
                }
            }
            Ok(hits)
        })
        .collect::<Result<_>>()?;

    // tally[cell][label] = matched point count.
    let mut tallies: Vec<std::collections::BTreeMap<(i64, Vec<i64>), u64>> =
        vec![Default::default(); total_cells];
    let mut label_totals: std::collections::BTreeMap<(i64, Vec<i64>), u64> = Default::default();
    let mut total_points = 0u64;
    for hits in per_x {
        for (cell, label) in hits {
            *tallies[cell].entry(label.clone()).or_insert(0) += 1;
            *label_totals.entry(label).or_insert(0) += 1;
            total_points += 1;
        }
    }
    if total_points == 0 {
        return Err(Error::invalid("no orbit points matched; grow n_range"));
    }

    let threshold = (LABEL_DROP_FRACTION * total_points as f64).ceil() as u64;
    let mut dropped = Vec::new();
    let mut kept: std::collections::BTreeMap<(i64, Vec<i64>), Vec<usize>> = Default::default();
    for (label, &count) in &label_totals {
        if count < threshold {
            dropped.push((label.clone(), count));
        } else {
            kept.insert(label.clone(), Vec::new());
        }
    }

    // Majority label per cell among the kept ones; ties break to the
    // smaller label for determinism.
    let mut unassigned = 0usize;
    for (cell, counts) in tallies.iter().enumerate() {
        let winner = counts
            .iter()
            .filter(|(label, _)| kept.contains_key(*label))
            .max_by(|(la, ca), (lb, cb)| ca.cmp(cb).then_with(|| lb.cmp(la)))
            .map(|(label, _)| label.clone());
        match winner {
            Some(label) => kept.get_mut(&label).expect("kept label").push(cell),
            None => unassigned += 1,
        }
    }

    let mut pieces = Vec::new();
    for (label, cells) in &kept {
        if cells.is_empty() {
            continue;
        }
        let boxes: Vec<Window> = cells
            .iter()
            .map(|&cell| {
                let mut rest = cell;
                let mut lo = vec![0.0; d];
                let mut hi = vec![0.0; d];
                for i in 0..d {
                    let idx = rest % cells_per_axis[i];
                    rest /= cells_per_axis[i];
                    lo[i] = bb_lo[i] + idx as f64 * raster;
                    hi[i] = lo[i] + raster;
                }
                Window::axis_box(lo, hi).expect("raster cell")
            })
            .collect();
        // Cells are distinct boxes of one grid, disjoint by construction.
        let region = Window::union_trusted(boxes)?;
        pieces.push(Piece {
            region,
            translation: GroupElement::orbit(label.0, label.1.clone()),
        });
    }

    let log = AssemblyLog {
        total_points,
        label_counts: kept
            .keys()
            .map(|label| (label.clone(), label_totals[label]))
            .collect(),
        dropped,
        cells: total_cells,
        unassigned_cells: unassigned,
        seed,
    };
    let pt = PiecewiseTranslation::new(Some(alpha.to_vec()), pieces)?;
    Ok((pt, log))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn interval(lo: f64, hi: f64) -> Window {
        Window::axis_box(vec![lo], vec![hi]).unwrap()
    }

    fn half_swap() -> PiecewiseTranslation {
        PiecewiseTranslation::new(
            None,
            vec![
                Piece {
                    region: interval(0.0, 0.5),
                    translation: GroupElement::vector(vec![0.5]),
                },
                Piece {
                    region: interval(0.5, 1.0),
                    translation: GroupElement::vector(vec![-0.5]),
                },
            ],
        )
        .unwrap()
    }

    #[test]
    fn apply_identity_piece() {
        let pt = PiecewiseTranslation::new(
            None,
            vec![Piece {
                region: interval(0.0, 1.0),
                translation: GroupElement::vector(vec![0.0]),
            }],
        )
        .unwrap();
        let (img, idx) = pt.apply(&[0.25]).unwrap().unwrap();
        assert_eq!(img, vec![0.25]);
        assert_eq!(idx, 0);
        assert!(pt.apply(&[2.0]).unwrap().is_none());
    }

    #[test]
    fn half_swap_maps_into_unit_interval() {
        let pt = half_swap();
        for &x in &[0.0, 0.1, 0.49, 0.5, 0.77, 0.999] {
            let (img, _) = pt.apply(&[x]).unwrap().unwrap();
            assert!((0.0..1.0).contains(&img[0]), "image {img:?}");
        }
    }

    #[test]
    fn overlapping_pieces_are_ambiguous() {
        let pt = PiecewiseTranslation::new(
            None,
            vec![
                Piece {
                    region: interval(0.0, 0.6),
                    translation: GroupElement::vector(vec![0.0]),
                },
                Piece {
                    region: interval(0.4, 1.0),
                    translation: GroupElement::vector(vec![0.0]),
                },
            ],
        )
        .unwrap();
        assert!(matches!(
            pt.apply(&[0.5]),
            Err(Error::AmbiguousPieces(v)) if v == vec![0, 1]
        ));
    }

    #[test]
    fn identity_decomposition_passes() {
        let a = interval(0.0, 1.0);
        let pt = PiecewiseTranslation::new(
            None,
            vec![Piece {
                region: interval(0.0, 1.0),
                translation: GroupElement::vector(vec![0.0]),
            }],
        )
        .unwrap();
        let report = verify_equidecomposition(&a, &a, &pt, 20_000, 7).unwrap();
        assert_eq!(report.verdict, Verdict::Pass);
        assert_eq!(report.defect_source, 0.0);
        assert_eq!(report.defect_overlap, 0.0);
        assert_eq!(report.defect_target, 0.0);
    }

    #[test]
    fn half_swap_passes() {
        let a = interval(0.0, 1.0);
        let report = verify_equidecomposition(&a, &a, &half_swap(), 50_000, 11).unwrap();
        assert_eq!(report.verdict, Verdict::Pass);
    }

    #[test]
    fn unequal_measures_fail_immediately() {
        let a = interval(0.0, 1.0);
        let b = interval(0.0, 1.5);
        let report = verify_equidecomposition(&a, &b, &half_swap(), 10_000, 3).unwrap();
        assert_eq!(report.verdict, Verdict::Fail);
        assert!(report.reason.unwrap().contains("equal measure"));
    }

    #[test]
    fn too_few_samples_rejected() {
        let a = interval(0.0, 1.0);
        assert!(verify_equidecomposition(&a, &a, &half_swap(), 100, 0).is_err());
    }

    #[test]
    fn perturbed_translation_fails_with_sliver_defect() {
        let a = interval(0.0, 1.0);
        let pt = PiecewiseTranslation::new(
            None,
            vec![
                Piece {
                    region: interval(0.0, 0.5),
                    translation: GroupElement::vector(vec![0.5]),
                },
                Piece {
                    region: interval(0.5, 1.0),
                    translation: GroupElement::vector(vec![-0.5 + 1e-3]),
                },
            ],
        )
        .unwrap();
        let report = verify_equidecomposition(&a, &a, &pt, 1_000_000, 5).unwrap();
        assert_eq!(report.verdict, Verdict::Fail);
        // The uncovered sliver has closed-form measure 1e-3.
        assert!(
            (report.defect_target - 1e-3).abs() <= 0.2e-3,
            "defect {}",
            report.defect_target
        );
    }

    #[test]
    fn refinement_leaves_defects_unchanged() {
        // Splitting a piece into two with the same translation is invisible
        // to the sampled coverage counts (half-open cells), so the report
        // is bitwise identical for the same seed.
        let a = interval(0.0, 1.0);
        let refined = PiecewiseTranslation::new(
            None,
            vec![
                Piece {
                    region: interval(0.0, 0.25),
                    translation: GroupElement::vector(vec![0.5]),
                },
                Piece {
                    region: interval(0.25, 0.5),
                    translation: GroupElement::vector(vec![0.5]),
                },
                Piece {
                    region: interval(0.5, 1.0),
                    translation: GroupElement::vector(vec![-0.5]),
                },
            ],
        )
        .unwrap();
        let r1 = verify_equidecomposition(&a, &a, &half_swap(), 40_000, 13).unwrap();
        let r2 = verify_equidecomposition(&a, &a, &refined, 40_000, 13).unwrap();
        assert_eq!(r1.defect_source, r2.defect_source);
        assert_eq!(r1.defect_overlap, r2.defect_overlap);
        assert_eq!(r1.defect_target, r2.defect_target);
        assert_eq!(r1.verdict, r2.verdict);
    }

    #[test]
    fn config_round_trip() {
        let pt = PiecewiseTranslation::new(
            Some(vec![0.618]),
            vec![Piece {
                region: interval(0.0, 0.618),
                translation: GroupElement::orbit(-1, vec![1]),
            }],
        )
        .unwrap();
        let cfg = pt.to_config();
        let json = serde_json::to_string(&cfg).unwrap();
        let back: DecompositionConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cfg);
        let pt2 = PiecewiseTranslation::from_config(&back).unwrap();
        assert_eq!(pt2.pieces().len(), 1);
    }

    #[test]
    fn identical_windows_assemble_to_identity_label() {
        let a = (5.0f64.sqrt() - 1.0) / 2.0;
        let w = interval(0.1, 0.5);
        let grid: Vec<Vec<f64>> = (0..3).map(|i| vec![(i as f64 + 0.7) / 3.0]).collect();
        let (pt, log) =
            pieces_from_orbit_matchings(&w, &w, &[a], &grid, (-200, 200), 2f64.powi(-6), 0)
                .unwrap();
        assert_eq!(pt.pieces().len(), 1);
        assert_eq!(log.label_counts.len(), 1);
        assert_eq!(log.label_counts[0].0, (0, vec![0]));
        assert_eq!(pt.pieces()[0].translation, GroupElement::orbit(0, vec![0]));
    }

    #[test]
    fn golden_pair_assembly_from_coherent_grid() {
        // Base points outside [0, alpha) anchor every orbit pairing the
        // same way, so a single label (-1, [1]) carries the whole window:
        // the translation by 1 - alpha.
        let a = (5.0f64.sqrt() - 1.0) / 2.0;
        let wa = interval(0.0, a);
        let wb = interval(1.0 - a, 1.0);
        let grid: Vec<Vec<f64>> = (0..4)
            .map(|i| vec![a + (i as f64 + 0.4) / 4.0 * (1.0 - a)])
            .collect();
        let (pt, log) =
            pieces_from_orbit_matchings(&wa, &wb, &[a], &grid, (-300, 300), 2f64.powi(-8), 0)
                .unwrap();
        assert_eq!(log.label_counts.len(), 1, "labels: {:?}", log.label_counts);
        assert_eq!(pt.pieces().len(), 1);
        let report = verify_equidecomposition(&wa, &wb, &pt, 200_000, 9).unwrap();
        let tol = 0.02 * wa.measure().max(1.0);
        assert!(
            report.defect_source < tol,
            "source {}",
            report.defect_source
        );
        assert!(
            report.defect_target < tol,
            "target {}",
            report.defect_target
        );
        assert!(
            report.defect_overlap < tol,
            "overlap {}",
            report.defect_overlap
        );
    }

    #[test]
    fn golden_pair_assembly_from_mixed_grid() {
        // Base points on both sides of the window boundary vote for two
        // different (both valid) decompositions; per-cell majority has to
        // stay coherent enough for small defects.
        let a = (5.0f64.sqrt() - 1.0) / 2.0;
        let wa = interval(0.0, a);
        let wb = interval(1.0 - a, 1.0);
        let grid: Vec<Vec<f64>> = (0..5).map(|i| vec![(i as f64 + 0.37) / 5.0]).collect();
        let (pt, _log) =
            pieces_from_orbit_matchings(&wa, &wb, &[a], &grid, (-300, 300), 2f64.powi(-8), 0)
                .unwrap();
        let report = verify_equidecomposition(&wa, &wb, &pt, 200_000, 9).unwrap();
        let tol = 0.05 * wa.measure().max(1.0);
        assert!(
            report.defect_source < tol,
            "source {}",
            report.defect_source
        );
        assert!(
            report.defect_target < tol,
            "target {}",
            report.defect_target
        );
        assert!(
            report.defect_overlap < tol,
            "overlap {}",
            report.defect_overlap
        );
    }
}
