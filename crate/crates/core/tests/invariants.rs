//! Cross-module invariants at desk scale: Monte Carlo measure checks,
//! classifier covariance under lattice translations, counting-difference
//! stabilization, and transport of bounded-remainder verdicts through a
//! verified equidecomposition.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use cutproject::discrepancy::{brs_classify, default_x_grid, discrepancy_profile};
use cutproject::equidecomp::{
    pieces_from_orbit_matchings, verify_equidecomposition, Piece, PiecewiseTranslation,
};
use cutproject::lattice::SpecialFormLattice;
use cutproject::matching::counting_diff;
use cutproject::modelset::{counting_formula_gap, generate_patch};
use cutproject::window::Window;
use cutproject::{BrsEvidence, GroupElement, Verdict};

fn golden() -> f64 {
    (5.0f64.sqrt() - 1.0) / 2.0
}

fn fib_lattice() -> SpecialFormLattice {
    SpecialFormLattice::certified(vec![golden()], vec![golden()], 50).unwrap()
}

/// Monte Carlo estimate of the chi integral over the unit cube, which must
/// agree with the window measure within three standard errors.
fn chi_integral_check(w: &Window, seed: u64) {
    let d = w.dim();
    let n = 1_000_000usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = 0.0f64;
    let mut sum_sq = 0.0f64;
    let mut x = vec![0.0; d];
    for _ in 0..n {
        for xi in x.iter_mut() {
            *xi = rng.gen::<f64>();
        }
        let chi = w.chi(&x) as f64;
        sum += chi;
        sum_sq += chi * chi;
    }
    let mean = sum / n as f64;
    let var = (sum_sq / n as f64 - mean * mean).max(0.0);
    let se = (var / n as f64).sqrt();
    let mes = w.measure();
    assert!(
        (mean - mes).abs() <= 3.0 * se + 1e-9,
        "chi integral {mean} vs measure {mes} (se {se})"
    );
}

#[test]
fn chi_integral_matches_measure_box() {
    chi_integral_check(
        &Window::axis_box(vec![0.3], vec![0.3 + golden()]).unwrap(),
        1,
    );
}

#[test]
fn chi_integral_matches_measure_union() {
    let w = Window::union(vec![
        Window::axis_box(vec![0.1], vec![0.35]).unwrap(),
        Window::axis_box(vec![1.4], vec![1.9]).unwrap(),
    ])
    .unwrap();
    chi_integral_check(&w, 2);
}

#[test]
fn chi_integral_matches_measure_simplices() {
    let w = Window::simplex_union(vec![
        vec![vec![0.0, 0.0], vec![0.9, 0.1], vec![0.2, 0.8]],
        vec![vec![1.1, 1.0], vec![1.9, 1.2], vec![1.4, 1.9]],
    ])
    .unwrap();
    chi_integral_check(&w, 3);
}

#[test]
fn chi_integral_matches_measure_parallelepiped() {
    let w = Window::parallelepiped(vec![0.2, 0.1], vec![vec![0.5, 0.1], vec![0.1, 0.6]]).unwrap();
    chi_integral_check(&w, 4);
}

/// Translating a window by a lattice vector `e*alpha + m` must not change
/// the classifier verdict (the transport property at verdict level).
#[test]
fn classifier_invariant_under_lattice_translations() {
    let a = golden();
    let brs = Window::axis_box(vec![0.0], vec![a]).unwrap();
    let half = Window::axis_box(vec![0.0], vec![0.5]).unwrap();
    let shifts = [(1i64, 0i64), (-1, 1), (2, -1), (-3, 2)];
    let grid = default_x_grid(1);
    for (e, m) in shifts {
        let v = e as f64 * a + m as f64;
        for x in grid.iter().step_by(4) {
            let p0 = discrepancy_profile(&brs, &[a], x, 20_000).unwrap();
            let p1 = discrepancy_profile(&brs.translate(&[v]), &[a], x, 20_000).unwrap();
            let v0 = brs_classify(&p0, 1000).unwrap().verdict;
            let v1 = brs_classify(&p1, 1000).unwrap().verdict;
            assert_eq!(v0, v1, "BRS window verdict changed under shift {v}");
            assert_eq!(v0, BrsEvidence::BoundedEvidence);

            let q0 = discrepancy_profile(&half, &[a], x, 20_000).unwrap();
            let q1 = discrepancy_profile(&half.translate(&[v]), &[a], x, 20_000).unwrap();
            let w0 = brs_classify(&q0, 1000).unwrap().verdict;
            let w1 = brs_classify(&q1, 1000).unwrap().verdict;
            assert_eq!(w0, w1, "half window verdict changed under shift {v}");
        }
    }
}

/// Equal-measure golden windows: the counting difference stabilizes when
/// the coverage grows tenfold; unequal measures grow linearly.
#[test]
fn counting_diff_stabilizes_for_equal_measure_windows() {
    let lat = fib_lattice();
    let wa = Window::axis_box(vec![0.0], vec![golden()]).unwrap();
    let wb = Window::axis_box(vec![1.0 - golden()], vec![1.0]).unwrap();
    let mut maxima = Vec::new();
    for len in [1_000i64, 10_000] {
        let pa = generate_patch(&lat, &wa, (-len, len)).unwrap();
        let pb = generate_patch(&lat, &wb, (-len, len)).unwrap();
        let span = (len as f64 * 0.8) as i64;
        let xs: Vec<f64> = (-span..span).map(|i| i as f64 + 0.5).collect();
        let (max, _) = counting_diff(&pa, &pb, &xs).unwrap();
        maxima.push(max);
    }
    assert_eq!(maxima[0], maxima[1], "counting diff should stabilize");
}

#[test]
fn counting_diff_grows_for_unequal_measures() {
    let lat = fib_lattice();
    let wa = Window::axis_box(vec![0.0], vec![golden()]).unwrap();
    let wb = Window::axis_box(vec![0.0], vec![0.5]).unwrap();
    let mut maxima = Vec::new();
    for len in [400i64, 4_000] {
        let pa = generate_patch(&lat, &wa, (-len, len)).unwrap();
        let pb = generate_patch(&lat, &wb, (-len, len)).unwrap();
        let span = (len as f64 * 0.8) as i64;
        let xs: Vec<f64> = (-span..span).map(|i| i as f64 + 0.5).collect();
        let (max, _) = counting_diff(&pa, &pb, &xs).unwrap();
        maxima.push(max);
    }
    // Linear drift: tenfold coverage growth scales the maximum by roughly
    // the measure gap times the span.
    assert!(
        maxima[1] >= 5 * maxima[0],
        "expected linear growth, got {maxima:?}"
    );
}

/// The counting-formula gap stays bounded for any bounded window (the
/// counting formula has no bounded-remainder hypothesis); growth shows up
/// in the discrepancy profile instead, never in the gap.
#[test]
fn counting_gap_bounded_even_for_non_brs_window() {
    let lat = fib_lattice();
    let shifted_half = Window::axis_box(vec![2.0], vec![2.5]).unwrap();
    let gap = counting_formula_gap(&lat, &shifted_half, 10_000).unwrap();
    let max3 = gap[..1000].iter().map(|g| g.abs()).max().unwrap();
    let max4 = gap.iter().map(|g| g.abs()).max().unwrap();
    assert_eq!(max3, 1);
    assert_eq!(max4, 1);
    // The same window's Birkhoff discrepancy does grow.
    let profile =
        discrepancy_profile(&shifted_half, &[golden()], &default_x_grid(1)[0], 100_000).unwrap();
    let verdict = brs_classify(&profile, 1000).unwrap();
    assert_eq!(verdict.verdict, BrsEvidence::GrowthEvidence);
}

/// When a verified equidecomposition with labels in `Z*alpha + Z` carries A
/// onto B and A classifies as bounded, B classifies as bounded with the
/// same parameters.
#[test]
fn brs_verdict_transports_through_verified_equidecomposition() {
    let a = golden();
    let wa = Window::axis_box(vec![0.0], vec![a]).unwrap();
    let wb = Window::axis_box(vec![1.0 - a], vec![1.0]).unwrap();
    let pt = PiecewiseTranslation::new(
        Some(vec![a]),
        vec![Piece {
            region: wa.clone(),
            translation: GroupElement::orbit(-1, vec![1]),
        }],
    )
    .unwrap();
    let report = verify_equidecomposition(&wa, &wb, &pt, 200_000, 17).unwrap();
    assert_eq!(report.verdict, Verdict::Pass);
    for x in default_x_grid(1).iter().step_by(3) {
        let pa = discrepancy_profile(&wa, &[a], x, 50_000).unwrap();
        let pb = discrepancy_profile(&wb, &[a], x, 50_000).unwrap();
        let va = brs_classify(&pa, 1000).unwrap().verdict;
        let vb = brs_classify(&pb, 1000).unwrap().verdict;
        assert_eq!(va, BrsEvidence::BoundedEvidence);
        assert_eq!(vb, BrsEvidence::BoundedEvidence);
    }
}

/// Assembled pieces conserve measure: the raster union's total measure
/// matches the source window up to raster-boundary slack.
#[test]
fn assembled_pieces_conserve_measure() {
    let a = golden();
    let wa = Window::axis_box(vec![0.0], vec![a]).unwrap();
    let wb = Window::axis_box(vec![1.0 - a], vec![1.0]).unwrap();
    let grid: Vec<Vec<f64>> = (0..4)
        .map(|i| vec![a + (i as f64 + 0.4) / 4.0 * (1.0 - a)])
        .collect();
    let (pt, _) =
        pieces_from_orbit_matchings(&wa, &wb, &[a], &grid, (-500, 500), 2f64.powi(-9), 0).unwrap();
    let total: f64 = pt.pieces().iter().map(|p| p.region.measure()).sum();
    assert!(
        (total - wa.measure()).abs() < 0.01,
        "piece measure {total} vs window {}",
        wa.measure()
    );
}

/// Orbit-assembled candidate at the documented raster: defects comfortably
/// below the 2% self-check tolerance.
#[test]
fn orbit_assembly_meets_defect_budget_on_default_grid() {
    let a = golden();
    let wa = Window::axis_box(vec![0.0], vec![a]).unwrap();
    let wb = Window::axis_box(vec![1.0 - a], vec![1.0]).unwrap();
    let grid = default_x_grid(1);
    let (pt, log) =
        pieces_from_orbit_matchings(&wa, &wb, &[a], &grid, (-2000, 2000), 2f64.powi(-10), 0)
            .unwrap();
    assert_eq!(log.unassigned_cells, 0);
    let report = verify_equidecomposition(&wa, &wb, &pt, 1_000_000, 9).unwrap();
    let tol = 0.02 * wa.measure().max(1.0);
    assert!(
        report.defect_source < tol,
        "source {}",
        report.defect_source
    );
    assert!(
        report.defect_overlap < tol,
        "overlap {}",
        report.defect_overlap
    );
    assert!(
        report.defect_target < tol,
        "target {}",
        report.defect_target
    );
}
