use std::path::Path;

use serde::{Deserialize, Serialize};

use cutproject::discrepancy::{
    brs_classify, default_x_grid, discrepancy_profile, pair_gap_profile, uniformity_scan,
    DiscrepancyProfile,
};
use cutproject::equidecomp::{
    pieces_from_orbit_matchings, verify_equidecomposition, DecompositionConfig,
    PiecewiseTranslation, TranslationConfig,
};
use cutproject::lattice::{
    check_general_position, to_special_form, LatticeBasis, LatticeConfig, SpecialFormLattice,
};
use cutproject::matching::{
    bounded_distance_match, hall_check, max_matching, minimal_bde_k, orbit_enumerate,
    translation_spread, HallCheck, Side,
};
use cutproject::modelset::{generate_patch, generate_patch_general, Patch};
use cutproject::window::{Window, WindowConfig};
use cutproject::{BrsEvidence, GroupElement, Verdict};

use crate::args::{Cli, Command};
use crate::output::{fmt_float, load_json, RunWriter};

/// Certification bound applied when loading a special-form lattice config.
const CONFIG_CERTIFICATION_BOUND: u32 = 50;

pub fn run(cli: &Cli) -> Result<i32, String> {
    match &cli.command {
        Command::Gen {
            common,
            lattice,
            window,
            n0,
            n1,
        } => gen(&common.out, common.seed, lattice, window, *n0, *n1),
        Command::Brs {
            common,
            lattice,
            window,
            nmax,
            split,
            x,
        } => brs(
            &common.out,
            common.seed,
            lattice,
            window,
            *nmax,
            *split,
            x.as_deref(),
        ),
        Command::Pairgap {
            common,
            lattice,
            window,
            window2,
            nmax,
            split,
            x,
        } => pairgap(
            &common.out,
            common.seed,
            lattice,
            window,
            window2,
            *nmax,
            *split,
            x.as_deref(),
        ),
        Command::Bde {
            common,
            lattice,
            window,
            window2,
            k,
            slack,
            n0,
            n1,
            binary_search_k,
            step,
        } => bde(
            &common.out,
            common.seed,
            lattice,
            window,
            window2,
            *k,
            *slack,
            (*n0, *n1),
            *binary_search_k,
            *step,
        ),
        Command::Hall { common, instance } => hall(&common.out, common.seed, instance),
        Command::SpecialForm {
            common,
            lattice,
            qmax,
        } => special_form(&common.out, common.seed, lattice, *qmax),
        Command::Orbit {
            common,
            lattice,
            window,
            window2,
            n0,
            n1,
            x,
        } => orbit(
            &common.out,
            common.seed,
            lattice,
            window,
            window2,
            (*n0, *n1),
            x.as_deref(),
        ),
        Command::EquiVerify {
            common,
            window,
            window2,
            decomp,
            samples,
        } => equi_verify(&common.out, common.seed, window, window2, decomp, *samples),
        Command::EquiBuild {
            common,
            lattice,
            window,
            window2,
            n0,
            n1,
            raster,
            samples,
        } => equi_build(
            &common.out,
            common.seed,
            lattice,
            window,
            window2,
            (*n0, *n1),
            *raster,
            *samples,
        ),
        Command::Uniformity {
            common,
            lattice,
            window,
            kmax,
            samples,
        } => uniformity(&common.out, common.seed, lattice, window, *kmax, *samples),
    }
}

fn load_window(path: &Path) -> Result<Window, String> {
    let config: WindowConfig = load_json(path)?;
    Window::from_config(&config).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_lattice(path: &Path) -> Result<LatticeConfig, String> {
    load_json(path)
}

fn require_special(config: &LatticeConfig, path: &Path) -> Result<SpecialFormLattice, String> {
    match config {
        LatticeConfig::Special { special_form } => SpecialFormLattice::certified(
            special_form.alpha.clone(),
            special_form.beta.clone(),
            CONFIG_CERTIFICATION_BOUND,
        )
        .map_err(|e| format!("{}: {e}", path.display())),
        LatticeConfig::General { .. } => Err(format!(
            "{}: this command needs a special_form lattice config; run special-form first",
            path.display()
        )),
    }
}

fn parse_x(text: Option<&str>, dim: usize) -> Result<Option<Vec<f64>>, String> {
    let Some(text) = text else {
        return Ok(None);
    };
    let parts: Vec<f64> = text
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("bad --x: {e}")))
        .collect::<Result<_, _>>()?;
    if parts.len() != dim {
        return Err(format!("--x needs {dim} coordinates"));
    }
    Ok(Some(parts))
}

fn patch_csv(patch: &Patch, d: usize) -> String {
    let mut header = String::from("n");
    for i in 1..=d {
        header.push_str(&format!(",m{i}"));
    }
    header.push_str(",p1");
    for i in 1..=d {
        header.push_str(&format!(",p2_{i}"));
    }
    header.push_str(",flag_boundary\n");
    let mut out = header;
    for p in patch.points() {
        out.push_str(&p.n.to_string());
        for m in &p.m {
            out.push(',');
            out.push_str(&m.to_string());
        }
        out.push(',');
        out.push_str(&fmt_float(p.p1));
        for y in &p.p2 {
            out.push(',');
            out.push_str(&fmt_float(*y));
        }
        out.push(',');
        out.push_str(if p.near_boundary() { "1" } else { "0" });
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct PatchSummary {
    lattice: LatticeConfig,
    window: WindowConfig,
    n_range: (i64, i64),
    coverage: (f64, f64),
    min_gap: f64,
    count_half_open: usize,
    count_inclusive: usize,
    count_exclusive: usize,
}

fn gen(
    out: &Path,
    seed: u64,
    lattice: &Path,
    window: &Path,
    n0: i64,
    n1: i64,
) -> Result<i32, String> {
    let mut writer = RunWriter::new(out, "gen", seed)?;
    writer.input(lattice)?;
    writer.input(window)?;
    writer.parameter("n0", n0);
    writer.parameter("n1", n1);
    let w = load_window(window)?;
    let config = load_lattice(lattice)?;
    let (patch, d) = match &config {
        LatticeConfig::Special { .. } => {
            let lat = require_special(&config, lattice)?;
            (
                generate_patch(&lat, &w, (n0, n1)).map_err(|e| e.to_string())?,
                lat.dim(),
            )
        }
        LatticeConfig::General { m, n, basis } => {
            let basis = LatticeBasis::new(*m, *n, basis.clone()).map_err(|e| e.to_string())?;
            let patch = generate_patch_general(&basis, &w, (n0 as f64, n1 as f64))
                .map_err(|e| e.to_string())?;
            (patch, *n)
        }
    };
    let (count_half_open, count_inclusive, count_exclusive) = patch.counts();
    writer.write_raw("patch.csv", patch_csv(&patch, d))?;
    writer.write_json(
        "patch.json",
        &PatchSummary {
            lattice: config.clone(),
            window: w.to_config(),
            n_range: patch.n_range(),
            coverage: patch.coverage(),
            min_gap: patch.min_gap(),
            count_half_open,
            count_inclusive,
            count_exclusive,
        },
    )?;
    writer.finish()?;
    Ok(0)
}

fn profile_csv(profile: &DiscrepancyProfile) -> String {
    let mut out = String::from("N,D,running_max\n");
    for (i, (v, m)) in profile.values.iter().zip(&profile.running_max).enumerate() {
        out.push_str(&format!("{},{},{}\n", i + 1, fmt_float(*v), fmt_float(*m)));
    }
    out
}

#[derive(Serialize)]
struct BrsRow {
    x: Vec<f64>,
    verdict: BrsEvidence,
    max_at_split: f64,
    max_at_end: f64,
}

fn brs(
    out: &Path,
    seed: u64,
    lattice: &Path,
    window: &Path,
    nmax: u32,
    split: u32,
    x: Option<&str>,
) -> Result<i32, String> {
    let mut writer = RunWriter::new(out, "brs", seed)?;
    writer.input(lattice)?;
    writer.input(window)?;
    writer.parameter("nmax", nmax);
    writer.parameter("split", split);
    let config = load_lattice(lattice)?;
    let lat = require_special(&config, lattice)?;
    let w = load_window(window)?;
    let xs: Vec<Vec<f64>> = match parse_x(x, lat.dim())? {
        Some(x) => vec![x],
        None => default_x_grid(lat.dim()),
    };
    let mut rows = Vec::new();
    let mut all_bounded = true;
    for (i, x) in xs.iter().enumerate() {
        let profile = discrepancy_profile(&w, lat.alpha(), x, nmax).map_err(|e| e.to_string())?;
        let verdict = brs_classify(&profile, split).map_err(|e| e.to_string())?;
        if verdict.verdict != BrsEvidence::BoundedEvidence {
            all_bounded = false;
        }
        if i == 0 {
            writer.write_raw("brs_profile.csv", profile_csv(&profile))?;
        }
        rows.push(BrsRow {
            x: x.clone(),
            verdict: verdict.verdict,
            max_at_split: verdict.max_at_split,
            max_at_end: verdict.max_at_end,
        });
    }
    writer.write_json("verdicts.json", &rows)?;
    writer.finish()?;
    Ok(if all_bounded { 0 } else { 1 })
}

#[derive(Serialize)]
struct PairGapSummary {
    measure_gap: f64,
    verdict: BrsEvidence,
    max_at_split: f64,
    max_at_end: f64,
    fitted_slope: f64,
}

#[allow(clippy::too_many_arguments)]
fn pairgap(
    out: &Path,
    seed: u64,
    lattice: &Path,
    window: &Path,
    window2: &Path,
    nmax: u32,
    split: u32,
    x: Option<&str>,
) -> Result<i32, String> {
    let mut writer = RunWriter::new(out, "pairgap", seed)?;
    writer.input(lattice)?;
    writer.input(window)?;
    writer.input(window2)?;
    writer.parameter("nmax", nmax);
    writer.parameter("split", split);
    let config = load_lattice(lattice)?;
    let lat = require_special(&config, lattice)?;
    let w = load_window(window)?;
    let w2 = load_window(window2)?;
    let x = parse_x(x, lat.dim())?.unwrap_or_else(|| default_x_grid(lat.dim())[0].clone());
    let profile = pair_gap_profile(&w, &w2, lat.alpha(), &x, nmax).map_err(|e| e.to_string())?;
    let verdict = brs_classify(&profile, split).map_err(|e| e.to_string())?;
    writer.write_raw("pairgap.csv", profile_csv(&profile))?;
    writer.write_json(
        "summary.json",
        &PairGapSummary {
            measure_gap: profile.window_measure,
            verdict: verdict.verdict,
            max_at_split: verdict.max_at_split,
            max_at_end: verdict.max_at_end,
            fitted_slope: profile.fitted_abs_slope(),
        },
    )?;
    writer.finish()?;
    Ok(if verdict.verdict == BrsEvidence::BoundedEvidence {
        0
    } else {
        1
    })
}

fn load_patch(
    config: &LatticeConfig,
    lattice_path: &Path,
    window: &Window,
    range: (i64, i64),
) -> Result<Patch, String> {
    match config {
        LatticeConfig::Special { .. } => {
            let lat = require_special(config, lattice_path)?;
            generate_patch(&lat, window, range).map_err(|e| e.to_string())
        }
        LatticeConfig::General { m, n, basis } => {
            let basis = LatticeBasis::new(*m, *n, basis.clone()).map_err(|e| e.to_string())?;
            generate_patch_general(&basis, window, (range.0 as f64, range.1 as f64))
                .map_err(|e| e.to_string())
        }
    }
}

#[derive(Serialize)]
struct BdeSummary {
    k: Option<f64>,
    boundary_slack: Option<f64>,
    minimal_k: Option<f64>,
    core: Option<(f64, f64)>,
    deficiency: Option<usize>,
    observed_k: Option<f64>,
    pairs: Vec<(usize, usize)>,
    witness: Option<cutproject::matching::HallWitness>,
}

#[allow(clippy::too_many_arguments)]
fn bde(
    out: &Path,
    seed: u64,
    lattice: &Path,
    window: &Path,
    window2: &Path,
    k: f64,
    slack: Option<f64>,
    range: (i64, i64),
    binary_search: bool,
    step: f64,
) -> Result<i32, String> {
    let mut writer = RunWriter::new(out, "bde", seed)?;
    writer.input(lattice)?;
    writer.input(window)?;
    writer.input(window2)?;
    writer.parameter("K", k);
    writer.parameter("slack", slack);
    writer.parameter("n0", range.0);
    writer.parameter("n1", range.1);
    writer.parameter("binary_search_K", binary_search);
    writer.parameter("step", step);
    let config = load_lattice(lattice)?;
    let w = load_window(window)?;
    let w2 = load_window(window2)?;
    let pa = load_patch(&config, lattice, &w, range)?;
    let pb = load_patch(&config, lattice, &w2, range)?;
    if binary_search {
        let minimal = minimal_bde_k(&pa, &pb, step, k).map_err(|e| e.to_string())?;
        writer.write_json(
            "bde.json",
            &BdeSummary {
                k: None,
                boundary_slack: None,
                minimal_k: minimal,
                core: None,
                deficiency: None,
                observed_k: None,
                pairs: Vec::new(),
                witness: None,
            },
        )?;
        writer.finish()?;
        Ok(if minimal.is_some() { 0 } else { 1 })
    } else {
        let slack = slack.unwrap_or(k);
        let report = bounded_distance_match(&pa, &pb, k, slack).map_err(|e| e.to_string())?;
        let exit = if report.deficiency == 0 { 0 } else { 1 };
        writer.write_json(
            "bde.json",
            &BdeSummary {
                k: Some(report.k),
                boundary_slack: Some(report.boundary_slack),
                minimal_k: None,
                core: Some(report.core),
                deficiency: Some(report.deficiency),
                observed_k: Some(report.observed_k),
                pairs: report.pairs,
                witness: report.witness,
            },
        )?;
        writer.finish()?;
        Ok(exit)
    }
}

#[derive(Deserialize)]
struct InstanceConfig {
    left: Vec<Vec<f64>>,
    right: Vec<Vec<f64>>,
    translations: Vec<TranslationConfig>,
    #[serde(default)]
    alpha: Vec<f64>,
    tolerance: f64,
}

#[derive(Serialize)]
struct MatchingExport {
    pairs: Vec<(usize, usize, usize)>,
    deficiency: usize,
    witness: Option<cutproject::matching::HallWitness>,
    hall_left: bool,
    hall_right: bool,
}

fn hall(out: &Path, seed: u64, instance: &Path) -> Result<i32, String> {
    let mut writer = RunWriter::new(out, "hall", seed)?;
    writer.input(instance)?;
    let config: InstanceConfig = load_json(instance)?;
    let translations: Vec<GroupElement> = config
        .translations
        .iter()
        .map(|t| match t {
            TranslationConfig::Orbit { k, m } => GroupElement::orbit(*k, m.clone()),
            TranslationConfig::Raw { v } => GroupElement::vector(v.clone()),
        })
        .collect();
    let inst = cutproject::matching::build_instance(
        config.left,
        config.right,
        translations,
        &config.alpha,
        config.tolerance,
    )
    .map_err(|e| e.to_string())?;
    let result = max_matching(&inst);
    let left = hall_check(&inst, Side::Left);
    let right = hall_check(&inst, Side::Right);
    let holds = left.holds() && right.holds();
    let witness = result.witness.clone().or(match (&left, &right) {
        (HallCheck::Violated(w), _) => Some(w.clone()),
        (_, HallCheck::Violated(w)) => Some(w.clone()),
        _ => None,
    });
    writer.write_json(
        "matching.json",
        &MatchingExport {
            pairs: result.pairs,
            deficiency: result.deficiency,
            witness,
            hall_left: left.holds(),
            hall_right: right.holds(),
        },
    )?;
    writer.finish()?;
    Ok(if holds { 0 } else { 1 })
}

#[derive(Serialize)]
struct SpecialFormExport {
    a: f64,
    b: Vec<Vec<f64>>,
    special_form: cutproject::lattice::SpecialFormConfig,
    independence: cutproject::lattice::IndependenceReport,
}

fn special_form(out: &Path, seed: u64, lattice: &Path, qmax: u32) -> Result<i32, String> {
    let mut writer = RunWriter::new(out, "special-form", seed)?;
    writer.input(lattice)?;
    writer.parameter("qmax", qmax);
    let config = load_lattice(lattice)?;
    let LatticeConfig::General { m, n, basis } = &config else {
        return Err(format!(
            "{}: lattice is already in special form",
            lattice.display()
        ));
    };
    let basis = LatticeBasis::new(*m, *n, basis.clone()).map_err(|e| e.to_string())?;
    let report = check_general_position(&basis, qmax).map_err(|e| e.to_string())?;
    if !report.certified() {
        writer.write_json("independence.json", &report)?;
        writer.finish()?;
        return Ok(1);
    }
    let (map, lat) = to_special_form(&basis).map_err(|e| e.to_string())?;
    let b = (0..map.b().nrows())
        .map(|r| (0..map.b().ncols()).map(|c| map.b()[(r, c)]).collect())
        .collect();
    writer.write_json(
        "special_form.json",
        &SpecialFormExport {
            a: map.a(),
            b,
            special_form: cutproject::lattice::SpecialFormConfig {
                alpha: lat.alpha().to_vec(),
                beta: lat.beta().to_vec(),
            },
            independence: report,
        },
    )?;
    // A lattice config usable directly by the alpha-based commands.
    writer.write_json("lattice_special.json", &lat.to_config())?;
    writer.finish()?;
    Ok(0)
}

#[derive(Serialize)]
struct OrbitSummary {
    x: Vec<f64>,
    n_range: (i64, i64),
    measure: f64,
    e_set: Vec<i64>,
    k1_observed: f64,
    k2_observed: f64,
    flagged: usize,
    records: usize,
    max_fiber: i64,
}

#[allow(clippy::too_many_arguments)]
fn orbit(
    out: &Path,
    seed: u64,
    lattice: &Path,
    window: &Path,
    window2: &Path,
    range: (i64, i64),
    x: Option<&str>,
) -> Result<i32, String> {
    let mut writer = RunWriter::new(out, "orbit", seed)?;
    writer.input(lattice)?;
    writer.input(window)?;
    writer.input(window2)?;
    writer.parameter("n0", range.0);
    writer.parameter("n1", range.1);
    let config = load_lattice(lattice)?;
    let lat = require_special(&config, lattice)?;
    let w = load_window(window)?;
    let w2 = load_window(window2)?;
    let x = parse_x(x, lat.dim())?.unwrap_or_else(|| default_x_grid(lat.dim())[0].clone());
    let enumeration =
        orbit_enumerate(&w, &w2, lat.alpha(), &x, range).map_err(|e| e.to_string())?;
    let spread = translation_spread(&enumeration, lat.alpha()).map_err(|e| e.to_string())?;
    let d = lat.dim();
    let mut csv = String::from("j");
    for i in 1..=d {
        csv.push_str(&format!(",a_{i}"));
    }
    for i in 1..=d {
        csv.push_str(&format!(",b_{i}"));
    }
    csv.push_str(",e");
    for i in 1..=d {
        csv.push_str(&format!(",m{i}"));
    }
    csv.push('\n');
    for rec in &enumeration.records {
        csv.push_str(&rec.j.to_string());
        for v in rec.a.iter().chain(&rec.b) {
            csv.push(',');
            csv.push_str(&fmt_float(*v));
        }
        csv.push(',');
        csv.push_str(&rec.e.to_string());
        for m in &rec.m {
            csv.push(',');
            csv.push_str(&m.to_string());
        }
        csv.push('\n');
    }
    writer.write_raw("records.csv", csv)?;
    let mut seq = String::from("n,s,t\n");
    for (i, (s, t)) in enumeration.s.iter().zip(&enumeration.t).enumerate() {
        seq.push_str(&format!("{},{s},{t}\n", enumeration.n_range.0 + i as i64));
    }
    writer.write_raw("index_sequences.csv", seq)?;
    writer.write_json(
        "orbit.json",
        &OrbitSummary {
            x,
            n_range: enumeration.n_range,
            measure: enumeration.measure,
            e_set: spread.e_set.iter().copied().collect(),
            k1_observed: spread.k1_observed,
            k2_observed: spread.k2_observed,
            flagged: enumeration.flagged,
            records: enumeration.records.len(),
            max_fiber: enumeration.max_fiber(),
        },
    )?;
    writer.finish()?;
    Ok(0)
}

fn equi_verify(
    out: &Path,
    seed: u64,
    window: &Path,
    window2: &Path,
    decomp: &Path,
    samples: u64,
) -> Result<i32, String> {
    let mut writer = RunWriter::new(out, "equi-verify", seed)?;
    writer.input(window)?;
    writer.input(window2)?;
    writer.input(decomp)?;
    writer.parameter("samples", samples);
    let a = load_window(window)?;
    let b = load_window(window2)?;
    let config: DecompositionConfig = load_json(decomp)?;
    let pt = PiecewiseTranslation::from_config(&config).map_err(|e| e.to_string())?;
    let report = verify_equidecomposition(&a, &b, &pt, samples, seed).map_err(|e| e.to_string())?;
    let pass = report.verdict == Verdict::Pass;
    writer.write_json("report.json", &report)?;
    writer.finish()?;
    Ok(if pass { 0 } else { 1 })
}

#[allow(clippy::too_many_arguments)]
fn equi_build(
    out: &Path,
    seed: u64,
    lattice: &Path,
    window: &Path,
    window2: &Path,
    range: (i64, i64),
    raster: f64,
    samples: u64,
) -> Result<i32, String> {
    let mut writer = RunWriter::new(out, "equi-build", seed)?;
    writer.input(lattice)?;
    writer.input(window)?;
    writer.input(window2)?;
    writer.parameter("n0", range.0);
    writer.parameter("n1", range.1);
    writer.parameter("raster", raster);
    writer.parameter("samples", samples);
    let config = load_lattice(lattice)?;
    let lat = require_special(&config, lattice)?;
    let w = load_window(window)?;
    let w2 = load_window(window2)?;
    let grid = default_x_grid(lat.dim());
    let (pt, log) = pieces_from_orbit_matchings(&w, &w2, lat.alpha(), &grid, range, raster, seed)
        .map_err(|e| e.to_string())?;
    writer.write_json("decomposition.json", &pt.to_config())?;
    writer.write_json("assembly.json", &log)?;
    // Self-check report; rasterized candidates are gated by equi-verify,
    // this records the defect levels achieved.
    let report =
        verify_equidecomposition(&w, &w2, &pt, samples, seed).map_err(|e| e.to_string())?;
    writer.write_json("report.json", &report)?;
    writer.finish()?;
    Ok(0)
}

fn uniformity(
    out: &Path,
    seed: u64,
    lattice: &Path,
    window: &Path,
    kmax: u32,
    samples: u32,
) -> Result<i32, String> {
    let mut writer = RunWriter::new(out, "uniformity", seed)?;
    writer.input(lattice)?;
    writer.input(window)?;
    writer.parameter("kmax", kmax);
    writer.parameter("samples", samples);
    let config = load_lattice(lattice)?;
    let lat = require_special(&config, lattice)?;
    let w = load_window(window)?;
    let report = uniformity_scan(&w, &[lat.alpha().to_vec()], kmax, samples, seed)
        .map_err(|e| e.to_string())?;
    let mut csv = String::from("k,min_count,ratio\n");
    for ((k, count), ratio) in report
        .k_values
        .iter()
        .zip(&report.min_counts)
        .zip(&report.ratios)
    {
        csv.push_str(&format!("{k},{count},{}\n", fmt_float(*ratio)));
    }
    writer.write_raw("uniformity.csv", csv)?;
    writer.write_json("uniformity.json", &report)?;
    writer.finish()?;
    Ok(if report.c_estimate > 0.0 && report.k0_estimate.is_some() {
        0
    } else {
        1
    })
}
