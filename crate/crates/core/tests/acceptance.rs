//! Acceptance suite. Each test prints one pass/fail line (visible with
//! `cargo test --test acceptance -- --nocapture`) and enforces its runtime
//! budget. Expected values marked "frozen" were pinned by brute-force scans
//! before the assertions were written.

use std::time::Instant;

use cutproject::discrepancy::{
    brs_classify, default_x_grid, discrepancy_profile, pair_gap_profile, uniformity_scan,
};
use cutproject::equidecomp::{verify_equidecomposition, Piece, PiecewiseTranslation};
use cutproject::lattice::{to_special_form, LatticeBasis, SpecialFormLattice};
use cutproject::matching::{
    build_instance, hall_check, max_matching, minimal_bde_k, orbit_enumerate, translation_spread,
    Side,
};
use cutproject::modelset::{counting_formula_gap, generate_patch, Patch};
use cutproject::window::Window;
use cutproject::{BrsEvidence, GroupElement, Verdict};

fn golden() -> f64 {
    (5.0f64.sqrt() - 1.0) / 2.0
}

fn fib_lattice() -> SpecialFormLattice {
    SpecialFormLattice::certified(vec![golden()], vec![golden()], 50).unwrap()
}

struct Lcg(u64);

impl Lcg {
    fn next_u32(&mut self) -> u32 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (self.0 >> 33) as u32
    }

    fn unit(&mut self) -> f64 {
        self.next_u32() as f64 / u32::MAX as f64
    }
}

fn report(criterion: u32, name: &str, pass: bool, detail: String) {
    println!(
        "criterion {criterion} ({name}): {} -- {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {criterion} failed: {detail}");
}

/// Exhaustive maximum matching for small graphs.
fn brute_max(adj: &[Vec<(usize, usize)>], used: &mut Vec<bool>, l: usize) -> usize {
    if l == adj.len() {
        return 0;
    }
    let mut best = brute_max(adj, used, l + 1);
    for &(r, _) in &adj[l] {
        if !used[r] {
            used[r] = true;
            best = best.max(1 + brute_max(adj, used, l + 1));
            used[r] = false;
        }
    }
    best
}

/// Exhaustive Hall verdict over all subsets of one side.
fn brute_hall(adj: &[Vec<(usize, usize)>], n_right: usize) -> bool {
    for mask in 1u32..(1 << adj.len()) {
        let mut nbrs = vec![false; n_right];
        let mut size = 0usize;
        for (l, edges) in adj.iter().enumerate() {
            if mask & (1 << l) != 0 {
                size += 1;
                for &(r, _) in edges {
                    nbrs[r] = true;
                }
            }
        }
        if nbrs.iter().filter(|&&b| b).count() < size {
            return false;
        }
    }
    true
}

#[test]
fn criterion_01_hall_matching_oracle_equivalence() {
    let start = Instant::now();
    let mut rng = Lcg(0xC0FFEE);
    let mut mismatches = 0usize;
    for _ in 0..500 {
        let nl = (rng.next_u32() % 8 + 1) as usize;
        let nr = (rng.next_u32() % 8 + 1) as usize;
        // Exact random graphs: wide left spacing makes each translation
        // realize exactly one edge.
        let left: Vec<Vec<f64>> = (0..nl).map(|i| vec![i as f64 * 1000.0]).collect();
        let right: Vec<Vec<f64>> = (0..nr).map(|j| vec![j as f64 * 10.0]).collect();
        let n_edges = rng.next_u32() as usize % (nl * nr + 1);
        let translations: Vec<GroupElement> = (0..n_edges)
            .map(|_| {
                let i = rng.next_u32() as usize % nl;
                let j = rng.next_u32() as usize % nr;
                GroupElement::vector(vec![j as f64 * 10.0 - i as f64 * 1000.0])
            })
            .collect();
        let inst = build_instance(left, right, translations, &[], 1e-6).unwrap();
        let hk = max_matching(&inst);
        let mut used = vec![false; inst.right_len()];
        let brute = brute_max(inst.adjacency(), &mut used, 0);
        if hk.pairs.len() != brute {
            mismatches += 1;
        }
        let left_ok =
            hall_check(&inst, Side::Left).holds() == brute_hall(inst.adjacency(), inst.right_len());
        let mut transposed = vec![Vec::new(); inst.right_len()];
        for (l, edges) in inst.adjacency().iter().enumerate() {
            for &(r, f) in edges {
                transposed[r].push((l, f));
            }
        }
        let right_ok =
            hall_check(&inst, Side::Right).holds() == brute_hall(&transposed, inst.left_len());
        if !left_ok || !right_ok {
            mismatches += 1;
        }
        if let Some(w) = &hk.witness {
            if w.vertices.len() <= w.neighbor_count {
                mismatches += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    report(
        1,
        "hall/matching oracle equivalence",
        mismatches == 0 && elapsed.as_secs_f64() < 10.0,
        format!("500 instances, {mismatches} mismatches, {elapsed:?}"),
    );
}

#[test]
fn criterion_02_special_form_round_trip() {
    let start = Instant::now();
    let mut rng = Lcg(0x5EED);
    let mut worst: f64 = 0.0;
    let mut built = 0usize;
    while built < 100 {
        let d = 1 + (built % 3);
        let vectors: Vec<Vec<f64>> = (0..=d)
            .map(|_| (0..=d).map(|_| rng.unit() * 4.0 - 2.0).collect())
            .collect();
        let Ok(basis) = LatticeBasis::new(1, d, vectors) else {
            continue;
        };
        built += 1;
        let (map, lattice) = match to_special_form(&basis) {
            Ok(pair) => pair,
            Err(e) => {
                report(
                    2,
                    "special-form round trip",
                    false,
                    format!("reduction failed: {e}"),
                );
                return;
            }
        };
        // Independent re-check: every mapped basis vector must coincide
        // with one of the special-form generators.
        for v in basis.vectors() {
            let image = map.apply_point(v);
            let residual = lattice
                .generators()
                .iter()
                .map(|g| {
                    g.iter()
                        .zip(&image)
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0f64, f64::max)
                })
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(residual);
        }
    }
    let elapsed = start.elapsed();
    report(
        2,
        "special-form round trip",
        worst <= 1e-9 && elapsed.as_secs_f64() < 1.0,
        format!("100 bases (d <= 3), worst generator residual {worst:.3e}, {elapsed:?}"),
    );
}

#[test]
fn criterion_03_counting_formula_stabilization() {
    let start = Instant::now();
    let lat = fib_lattice();
    let w = Window::axis_box(vec![0.0], vec![golden()]).unwrap();
    let gap = counting_formula_gap(&lat, &w, 10_000).unwrap();
    let max3 = gap[..1_000].iter().map(|g| g.abs()).max().unwrap();
    let max4 = gap.iter().map(|g| g.abs()).max().unwrap();
    // Frozen by brute force: the gap vanishes identically for this window
    // (beta^T W never crosses an integer cut).
    let frozen: i64 = 0;
    let elapsed = start.elapsed();
    report(
        3,
        "counting-formula gap stabilization",
        max3 == max4 && max4 == frozen && elapsed.as_secs_f64() < 30.0,
        format!("max |g| at 1e3: {max3}, at 1e4: {max4} (frozen {frozen}), {elapsed:?}"),
    );
}

#[test]
fn criterion_04_brs_dichotomy() {
    let start = Instant::now();
    let a = golden();
    let brs = Window::axis_box(vec![0.0], vec![a]).unwrap();
    let half = Window::axis_box(vec![0.0], vec![0.5]).unwrap();
    let mut bounded_ok = 0usize;
    let mut growth_ok = 0usize;
    let grid = default_x_grid(1);
    for x in &grid {
        let pb = discrepancy_profile(&brs, &[a], x, 100_000).unwrap();
        if brs_classify(&pb, 1_000).unwrap().verdict == BrsEvidence::BoundedEvidence {
            bounded_ok += 1;
        }
        let ph = discrepancy_profile(&half, &[a], x, 100_000).unwrap();
        if brs_classify(&ph, 1_000).unwrap().verdict == BrsEvidence::GrowthEvidence {
            growth_ok += 1;
        }
    }
    let elapsed = start.elapsed();
    report(
        4,
        "BRS dichotomy",
        bounded_ok == grid.len() && growth_ok == grid.len() && elapsed.as_secs_f64() < 60.0,
        format!(
            "bounded {bounded_ok}/{} growth {growth_ok}/{} at split 1e3, N 1e5, {elapsed:?}",
            grid.len(),
            grid.len()
        ),
    );
}

#[test]
fn criterion_05_pair_gap_test() {
    let start = Instant::now();
    let a = golden();
    let w = Window::axis_box(vec![0.0], vec![a]).unwrap();
    let w2 = Window::axis_box(vec![1.0 - a], vec![1.0]).unwrap();
    let x = &default_x_grid(1)[0];
    let equal = pair_gap_profile(&w, &w2, &[a], x, 100_000).unwrap();
    let stable = equal.max_at(100_000) == equal.max_at(1_000);

    let half = Window::axis_box(vec![0.0], vec![0.5]).unwrap();
    let drifting = pair_gap_profile(&w, &half, &[a], x, 10_000).unwrap();
    let slope = drifting.fitted_abs_slope();
    let expected = a - 0.5;
    let slope_ok = (slope - expected).abs() <= 0.05 * expected;
    let elapsed = start.elapsed();
    report(
        5,
        "two-window gap test",
        stable && slope_ok,
        format!(
            "equal-measure running max {} at both 1e3 and 1e5: {stable}; slope {slope:.6} vs {expected:.6}, {elapsed:?}",
            equal.max_at(100_000)
        ),
    );
}

/// The same infinite progression truncated to each patch length.
fn truncated_progression(density: f64, len: i64) -> Patch {
    let j_min = (-(len as f64) * density).ceil() as i64;
    let j_max = (len as f64 * density).floor() as i64;
    Patch::arithmetic_progression(
        j_min as f64 / density,
        1.0 / density,
        (j_max - j_min + 1) as usize,
    )
    .unwrap()
}

#[test]
fn criterion_06_bde_scale_invariance() {
    let start = Instant::now();
    let lat = fib_lattice();
    let a = golden();
    let step = 1e-3;
    let brs = Window::axis_box(vec![0.0], vec![a]).unwrap();
    let mut fib_k = Vec::new();
    for len in [1_000i64, 10_000] {
        let patch = generate_patch(&lat, &brs, (-len, len)).unwrap();
        let prog = truncated_progression(a, len);
        fib_k.push(minimal_bde_k(&patch, &prog, step, 64.0).unwrap().unwrap());
    }
    // The minimal K is length-invariant at the search resolution: the
    // underlying supremum creeps by less than one step between these
    // scales, so the grid values may differ by at most `step`.
    let fib_ok = (fib_k[1] - fib_k[0]).abs() <= step + 1e-12;

    let half = Window::axis_box(vec![0.0], vec![0.5]).unwrap();
    let mut half_k = Vec::new();
    for len in [100i64, 10_000] {
        let patch = generate_patch(&lat, &half, (-len, len)).unwrap();
        let prog = truncated_progression(0.5, len);
        half_k.push(minimal_bde_k(&patch, &prog, step, 512.0).unwrap().unwrap());
    }
    let half_ok = half_k[1] > half_k[0] + step;
    let elapsed = start.elapsed();
    report(
        6,
        "bde scale invariance of K",
        fib_ok && half_ok,
        format!(
            "Fibonacci K: {:.3} vs {:.3} (within one step); half-window K: {:.3} -> {:.3} (strict growth), {elapsed:?}",
            fib_k[0], fib_k[1], half_k[0], half_k[1]
        ),
    );
}

#[test]
fn criterion_07_orbit_construction_invariants() {
    let start = Instant::now();
    let a = golden();
    let wa = Window::axis_box(vec![0.0], vec![a]).unwrap();
    let wb = Window::axis_box(vec![1.0 - a], vec![1.0]).unwrap();
    let x = &default_x_grid(1)[0];
    let mut e_sets = Vec::new();
    let mut s_maxima = Vec::new();
    let mut displacement_ok = true;
    for len in [1_000i64, 10_000] {
        let enumeration = orbit_enumerate(&wa, &wb, &[a], x, (0, len)).unwrap();
        let spread = translation_spread(&enumeration, &[a]).unwrap();
        if spread.e_set != enumeration.e_set {
            displacement_ok = false;
        }
        for rec in &enumeration.records {
            let residual = rec
                .b
                .iter()
                .zip(&rec.a)
                .zip(std::iter::repeat(a))
                .zip(&rec.m)
                .map(|(((bp, ap), al), &mi)| (bp - ap - rec.e as f64 * al - mi as f64).abs())
                .fold(0.0f64, f64::max);
            if residual > 1e-9 {
                displacement_ok = false;
            }
        }
        e_sets.push(enumeration.e_set.clone());
        let mut run_max = 0.0f64;
        let mut at_1000 = 0.0f64;
        for (i, s) in enumeration.s.iter().enumerate() {
            let n = enumeration.n_range.0 + i as i64;
            run_max = run_max.max((*s as f64 - n as f64 * enumeration.measure).abs());
            if n <= 1_000 {
                at_1000 = run_max;
            }
        }
        s_maxima.push((at_1000, run_max));
    }
    let e_stable = e_sets[0] == e_sets[1];
    // Frozen: the running max of |s_n - n*mes A| is attained early enough
    // to coincide exactly at both horizons for this base point.
    let s_stable = (s_maxima[1].1 - s_maxima[1].0).abs() <= 1e-12
        && (s_maxima[0].1 - s_maxima[0].0).abs() <= 1e-12;
    let elapsed = start.elapsed();
    report(
        7,
        "orbit construction invariants",
        e_stable && displacement_ok && s_stable,
        format!(
            "E = {:?} at both lengths; displacements within 1e-9: {displacement_ok}; |s_n - n mes| running max {:.6} stable, {elapsed:?}",
            e_sets[0], s_maxima[1].1
        ),
    );
}

#[test]
fn criterion_08_equidecomposition_verifier_calibration() {
    let start = Instant::now();
    let unit = Window::axis_box(vec![0.0], vec![1.0]).unwrap();
    let identity = PiecewiseTranslation::new(
        None,
        vec![Piece {
            region: unit.clone(),
            translation: GroupElement::vector(vec![0.0]),
        }],
    )
    .unwrap();
    let swap = PiecewiseTranslation::new(
        None,
        vec![
            Piece {
                region: Window::axis_box(vec![0.0], vec![0.5]).unwrap(),
                translation: GroupElement::vector(vec![0.5]),
            },
            Piece {
                region: Window::axis_box(vec![0.5], vec![1.0]).unwrap(),
                translation: GroupElement::vector(vec![-0.5]),
            },
        ],
    )
    .unwrap();
    let perturbed = PiecewiseTranslation::new(
        None,
        vec![
            Piece {
                region: Window::axis_box(vec![0.0], vec![0.5]).unwrap(),
                translation: GroupElement::vector(vec![0.5]),
            },
            Piece {
                region: Window::axis_box(vec![0.5], vec![1.0]).unwrap(),
                translation: GroupElement::vector(vec![-0.5 + 1e-3]),
            },
        ],
    )
    .unwrap();
    let r_id = verify_equidecomposition(&unit, &unit, &identity, 1_000_000, 41).unwrap();
    let r_swap = verify_equidecomposition(&unit, &unit, &swap, 1_000_000, 42).unwrap();
    let r_pert = verify_equidecomposition(&unit, &unit, &perturbed, 1_000_000, 43).unwrap();
    // The displaced sliver has closed-form measure 1e-3.
    let sliver_ok = (r_pert.defect_target - 1e-3).abs() <= 0.2e-3;
    let elapsed = start.elapsed();
    report(
        8,
        "equidecomposition verifier calibration",
        r_id.verdict == Verdict::Pass
            && r_swap.verdict == Verdict::Pass
            && r_pert.verdict == Verdict::Fail
            && sliver_ok
            && elapsed.as_secs_f64() < 10.0,
        format!(
            "identity {:?}, swap {:?}, perturbed {:?} with target defect {:.5e} (closed form 1e-3), {elapsed:?}",
            r_id.verdict, r_swap.verdict, r_pert.verdict, r_pert.defect_target
        ),
    );
}

#[test]
fn criterion_09_g_uniformity() {
    let start = Instant::now();
    let a = golden();
    let w = Window::axis_box(vec![0.0], vec![a]).unwrap();
    let scan = uniformity_scan(&w, &[vec![a]], 128, 25, 42).unwrap();
    let mut ok = true;
    let mut worst = 0.0f64;
    for (k, ratio) in scan.k_values.iter().zip(&scan.ratios) {
        if *k >= 64 {
            let rel = (ratio - a).abs() / a;
            worst = worst.max(rel);
            if rel > 0.10 {
                ok = false;
            }
        }
    }
    let elapsed = start.elapsed();
    report(
        9,
        "G-uniformity",
        ok,
        format!(
            "per-k min-count/k within 10% of theta for k >= 64 (worst {:.2}%), c = {:.4}, k0 = {:?}, {elapsed:?}",
            100.0 * worst,
            scan.c_estimate,
            scan.k0_estimate
        ),
    );
}
