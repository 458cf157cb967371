//! Acceptance suite: one test per release criterion.
//!
//! Every test prints a single `ACCEPTANCE <criterion>: PASS|FAIL — detail`
//! line (visible with `--nocapture`, and dumped automatically for failing
//! tests), so the suite doubles as a machine-greppable scorecard:
//!
//! 1.  `array_geometry` — computed cylinder dimensions match the reference
//!     study's published values within ±0.01 m.
//! 2.  `maxmin_power_control` — equal-SINR/full-power fixed point on 1,000
//!     random gain matrices; matches a brute-force simplex grid search on
//!     the small instances.
//! 3.  `rzf_limits` — interference suppression in the α→0 limit and the
//!     exact single-user beamforming-gain SINR.
//! 4.  `coverage_table_reproduction` — the full 18-configuration sweep vs
//!     the study's published coverage distances, ±30% per cell.
//! 5.  `coverage_structural_invariants` — monotonicity in K, dual ≥ single,
//!     high-tower/legacy distance ratio ≥ 4.5.
//! 6.  `headline_area_ratio` — the study's headline claim: ≥ 40× area at
//!     700 MHz, K = 20, dual polarization.
//! 7.  `geo_oracle_equivalence` — raster coverage equals an independent
//!     brute-force enumeration bit for bit; analytic disk check.
//! 8.  `case_study_fixtures` — the case study's percentage arithmetic is
//!     reproduced exactly from injected counts.
//! 9.  `artifact_determinism` — every CLI artifact is byte-identical across
//!     reruns and worker counts.
//!
//! ## Known divergence (criteria 4–6)
//!
//! The published table was produced with a full geometry-based stochastic
//! channel simulator (QuaDRiGa, 20 subrays per cluster, polarimetric receive
//! coupling). This repository intentionally substitutes a compact clustered
//! generator — one steering vector per cluster, energy-normalized
//! polarization pairs — which preserves the link budget and array-geometry
//! correlation but not every tail statistic that the 95%-coverage criterion
//! keys on. Three systematic residuals follow:
//!
//! - single-polarization K = 100 cells collapse earlier (sparser per-user
//!   channels condition the 100-user RZF Gram matrix worse),
//! - dual-polarization legacy cells reach farther (the E‖h‖² = βM contract
//!   doubles captured energy at M = 512, where a polarimetric receiver
//!   would not),
//! - high-tower 1800/3500 MHz cells reach farther (the published table's
//!   limiter at those carriers is not part of the pinned model; its own
//!   700 MHz → 1800 MHz drop is far steeper than RMa-LoS pathloss plus
//!   bandwidth scaling can produce below the breakpoint).
//!
//! Those cells are expected to fail their tolerance and are left failing on
//! purpose: the tolerances stay pinned to the published values rather than
//! being widened to whatever the substitute generator produces.

use std::path::Path;
use std::process::Command;
use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use towercov::array::{build_geometry, ArrayConfig};
use towercov::channel::{
    generate_channel, FadingParams, RadioConfig, SiteConfig, UserDrop, UserPosition,
};
use towercov::coverage::{coverage_table, CoverageTable, SiteClass, SweepConfig};
use towercov::geo::{
    covered_population, haversine_km, scenario_from_counts, synthetic_raster, CoverageCounts,
    PopulationRaster, ScenarioParams, TowerKind, TowerSite,
};
use towercov::mimo;

// ── Scorecard plumbing ──────────────────────────────────────────────────────

fn report(criterion: &str, pass: bool, detail: &str) {
    println!(
        "ACCEPTANCE {criterion}: {} — {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
}

/// The full default sweep (trials = 100, grid 0.1 km, seed 1), computed once
/// and shared by the three table-derived criteria. This is the expensive
/// part of the suite (tens of minutes on one core).
fn sweep() -> &'static CoverageTable {
    static TABLE: OnceLock<CoverageTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        coverage_table(&SweepConfig::default(), 1).expect("default sweep must run")
    })
}

/// Published coverage distances [km] from the reference study, (single,
/// dual) per (site class, carrier, users). These are the reproduction
/// targets; they are pinned verbatim and never adjusted to fit.
const REFERENCE_KM: [(SiteClass, f64, usize, f64, f64); 18] = [
    (SiteClass::Legacy, 700.0, 20, 4.1, 4.9),
    (SiteClass::Legacy, 700.0, 50, 2.7, 3.4),
    (SiteClass::Legacy, 700.0, 100, 1.7, 2.1),
    (SiteClass::Legacy, 1800.0, 20, 2.9, 3.5),
    (SiteClass::Legacy, 1800.0, 50, 1.9, 2.5),
    (SiteClass::Legacy, 1800.0, 100, 1.2, 1.6),
    (SiteClass::Legacy, 3500.0, 20, 2.2, 2.7),
    (SiteClass::Legacy, 3500.0, 50, 1.5, 1.9),
    (SiteClass::Legacy, 3500.0, 100, 1.0, 1.4),
    (SiteClass::HighTower, 700.0, 20, 28.0, 37.0),
    (SiteClass::HighTower, 700.0, 50, 15.0, 21.0),
    (SiteClass::HighTower, 700.0, 100, 9.5, 12.5),
    (SiteClass::HighTower, 1800.0, 20, 14.5, 16.5),
    (SiteClass::HighTower, 1800.0, 50, 10.5, 13.0),
    (SiteClass::HighTower, 1800.0, 100, 7.5, 9.5),
    (SiteClass::HighTower, 3500.0, 20, 13.5, 15.0),
    (SiteClass::HighTower, 3500.0, 50, 10.0, 13.0),
    (SiteClass::HighTower, 3500.0, 100, 8.0, 10.0),
];

const CELL_TOLERANCE: f64 = 0.30;

/// Simulated (single, dual) coverage distances for one configuration.
fn simulated_cell(class: SiteClass, fc: f64, users: usize) -> (f64, f64) {
    let row = sweep()
        .rows
        .iter()
        .find(|r| r.class == class && r.carrier_mhz == fc && r.users == users)
        .unwrap_or_else(|| panic!("sweep is missing {class:?} {fc} MHz K={users}"));
    (
        row.d_cov_single_km().expect("single cell present"),
        row.d_cov_dual_km().expect("dual cell present"),
    )
}

fn class_label(class: SiteClass) -> &'static str {
    match class {
        SiteClass::Legacy => "legacy    ",
        SiteClass::HighTower => "high-tower",
    }
}

// ── 1. Array geometry ───────────────────────────────────────────────────────

#[test]
fn array_geometry() {
    // Published cylinder dimensions (radius, height) [m] per carrier.
    let published = [(700e6, 1.09, 1.50), (1800e6, 0.42, 0.59), (3500e6, 0.21, 0.30)];
    let mut worst = 0.0f64;
    for (fc, r_ref, h_ref) in published {
        let geo = build_geometry(&ArrayConfig::single_pol(), fc).unwrap();
        worst = worst
            .max((geo.radius_m - r_ref).abs())
            .max((geo.height_m - h_ref).abs());
        assert!(
            (geo.radius_m - r_ref).abs() <= 0.01 && (geo.height_m - h_ref).abs() <= 0.01,
            "array at {} MHz: computed r={:.5} h={:.5}, published r={} h={}",
            fc / 1e6,
            geo.radius_m,
            geo.height_m,
            r_ref,
            h_ref,
        );
    }
    report(
        "array-geometry",
        true,
        &format!("all six dimensions within ±0.01 m (worst |Δ| = {worst:.4} m)"),
    );
}

// ── 2. Max-min power control ────────────────────────────────────────────────

/// Visits every composition of `total` units into `k` nonnegative parts.
fn for_each_composition(k: usize, total: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(slot: usize, left: usize, parts: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if slot + 1 == parts.capacity() {
            parts.push(left);
            f(parts);
            parts.pop();
            return;
        }
        for v in 0..=left {
            parts.push(v);
            rec(slot + 1, left - v, parts, f);
            parts.pop();
        }
    }
    let mut parts = Vec::with_capacity(k);
    rec(0, total, &mut parts, f);
}

fn min_sinr(g: &DMatrix<f64>, p: &[f64], noise: f64) -> f64 {
    let k = g.nrows();
    (0..k)
        .map(|i| {
            let interference: f64 = (0..k).filter(|&j| j != i).map(|j| p[j] * g[(i, j)]).sum();
            p[i] * g[(i, i)] / (noise + interference)
        })
        .fold(f64::INFINITY, f64::min)
}

fn random_gains(rng: &mut ChaCha8Rng, k: usize) -> DMatrix<f64> {
    let diag: Vec<f64> = (0..k)
        .map(|_| 10f64.powf(-13.0 + 3.0 * rng.gen::<f64>()))
        .collect();
    DMatrix::from_fn(k, k, |r, c| {
        if r == c {
            diag[r]
        } else {
            rng.gen::<f64>() * 0.4 * diag[r].min(diag[c]) / k as f64
        }
    })
}

#[test]
fn maxmin_power_control() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut grid_checked = 0usize;
    let mut worst_spread = 0.0f64;
    for i in 0..1000 {
        let k = 2 + (i % 15); // K ∈ {2, …, 16}
        let g = random_gains(&mut rng, k);
        let noise = 10f64.powf(-13.5 + rng.gen::<f64>());
        let power = 1.0 + 99.0 * rng.gen::<f64>();
        let alloc = mimo::maxmin_power(&g, noise, power).unwrap();

        // Equal-SINR fixed point, full power.
        let sinrs: Vec<f64> = (0..k)
            .map(|u| {
                let interference: f64 = (0..k)
                    .filter(|&j| j != u)
                    .map(|j| alloc.p[j] * g[(u, j)])
                    .sum();
                alloc.p[u] * g[(u, u)] / (noise + interference)
            })
            .collect();
        let lo = sinrs.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = sinrs.iter().cloned().fold(0.0f64, f64::max);
        let spread = hi / lo - 1.0;
        worst_spread = worst_spread.max(spread);
        assert!(spread <= 1e-4, "instance {i}: SINR spread {spread:.2e}");
        let total: f64 = alloc.p.iter().sum();
        assert!(
            (total - power).abs() <= 1e-6 * power,
            "instance {i}: Σp = {total} vs P = {power}"
        );

        // Brute-force simplex grid search on the small instances.
        if k <= 4 {
            let divisions = match k {
                2 => 200,
                3 => 60,
                _ => 28,
            };
            let mut best = 0.0f64;
            for_each_composition(k, divisions, &mut |parts| {
                let p: Vec<f64> = parts
                    .iter()
                    .map(|&u| u as f64 / divisions as f64 * power)
                    .collect();
                best = best.max(min_sinr(&g, &p, noise));
            });
            assert!(
                alloc.common_sinr >= best * (1.0 - 1e-3),
                "instance {i} (K={k}): solver SINR {} below grid-search {}",
                alloc.common_sinr,
                best
            );
            grid_checked += 1;
        }
    }
    report(
        "maxmin-power-control",
        true,
        &format!(
            "1000 instances equal-SINR within 1e-4 (worst {worst_spread:.1e}), \
             full power within 1e-6; ≥ grid search − 0.1% on {grid_checked} small instances"
        ),
    );
}

// ── 3. RZF limits ───────────────────────────────────────────────────────────

#[test]
fn rzf_limits() {
    // (a) α → 0 on well-conditioned instances: interference < −60 dBc.
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut normal = move || {
        let (u, v): (f64, f64) = (1.0 - rng.gen::<f64>(), rng.gen());
        (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
    };
    let mut worst_dbc = f64::NEG_INFINITY;
    for _ in 0..25 {
        let h = DMatrix::from_fn(8, 4, |_, _| Complex64::new(normal(), normal()));
        // Zero noise makes α = K·σ²/P exactly zero: the ZF limit.
        let pre = mimo::rzf_precode(&h, 0.0, 10.0).unwrap();
        let g = mimo::effective_gains(&h, &pre).unwrap();
        for k in 0..4 {
            for j in 0..4 {
                if j != k {
                    let dbc = 10.0 * (g[(k, j)] / g[(k, k)]).log10();
                    worst_dbc = worst_dbc.max(dbc);
                }
            }
        }
    }
    assert!(
        worst_dbc < -60.0,
        "ZF-limit leakage {worst_dbc:.1} dBc reaches above -60 dBc"
    );

    // (b) K = 1, pure specular channel: SINR = P·β·M/σ² (beamforming gain M).
    let site = SiteConfig::high_tower(ArrayConfig::single_pol());
    let radio = RadioConfig::for_carrier(700e6).unwrap();
    let fading = FadingParams {
        rician_k_mean_db: 300.0, // κ → ∞: diffuse part carries ~1e-30 of the power
        rician_k_std_db: 0.0,
        shadow_sigma_db_near: 0.0,
        shadow_sigma_db_far: 0.0,
        ..FadingParams::los()
    };
    let drop = UserDrop {
        users: vec![UserPosition {
            distance_m: 1000.0,
            azimuth_deg: 33.0,
        }],
        rx_height_m: 8.0,
    };
    let h = generate_channel(&site, &radio, &drop, &fading, 5).unwrap();
    let noise = radio.noise_power_w();
    let pre = mimo::rzf_precode(&h.entries, noise, site.tx_power_w).unwrap();
    let g = mimo::effective_gains(&h.entries, &pre).unwrap();
    let alloc = mimo::maxmin_power(&g, noise, site.tx_power_w).unwrap();
    let theory = site.tx_power_w * h.large_scale_gain[0] * h.elements() as f64 / noise;
    let delta_db = 10.0 * (alloc.common_sinr / theory).log10();
    assert!(
        delta_db.abs() <= 0.1,
        "single-user LoS SINR off theory by {delta_db:.3} dB"
    );

    report(
        "rzf-limits",
        true,
        &format!(
            "ZF leakage ≤ {worst_dbc:.1} dBc; single-user SINR within {:.1e} dB of P·β·M/σ²",
            delta_db.abs()
        ),
    );
}

// ── 4–6. Coverage-table criteria (shared sweep) ─────────────────────────────

#[test]
fn coverage_table_reproduction() {
    let mut failures = Vec::new();
    for &(class, fc, users, single_ref, dual_ref) in &REFERENCE_KM {
        let (single, dual) = simulated_cell(class, fc, users);
        let mut check = |label: &str, got: f64, reference: f64| {
            let dev = got / reference - 1.0;
            let ok = dev.abs() <= CELL_TOLERANCE;
            println!(
                "  [{} {:>4.0} MHz K={:<3}] {label}: got {got:>5.1} km, published {reference:>5.1} km ({:+6.1}%) {}",
                class_label(class),
                fc,
                users,
                100.0 * dev,
                if ok { "ok" } else { "OUT OF TOLERANCE" }
            );
            if !ok {
                failures.push(format!(
                    "{:?} {fc} MHz K={users} {label}: {got} vs {reference} ({:+.0}%)",
                    class,
                    100.0 * dev
                ));
            }
        };
        check("single", single, single_ref);
        check("dual  ", dual, dual_ref);
    }
    let pass = failures.is_empty();
    report(
        "coverage-table-reproduction",
        pass,
        &format!(
            "{}/36 cells within ±30% of the published table",
            36 - failures.len()
        ),
    );
    assert!(
        pass,
        "{} of 36 coverage cells outside ±30% of the published values \
         (known channel-generator divergence; see the suite header):\n  {}",
        failures.len(),
        failures.join("\n  ")
    );
}

#[test]
fn coverage_structural_invariants() {
    let mut failures = Vec::new();

    // d_cov nonincreasing in K, at fixed class/carrier/polarization.
    for &class in &[SiteClass::Legacy, SiteClass::HighTower] {
        for &fc in &[700.0, 1800.0, 3500.0] {
            let cells: Vec<(f64, f64)> = [20, 50, 100]
                .iter()
                .map(|&k| simulated_cell(class, fc, k))
                .collect();
            for w in cells.windows(2) {
                if w[1].0 > w[0].0 || w[1].1 > w[0].1 {
                    failures.push(format!("{class:?} {fc} MHz: d_cov increases with K"));
                }
            }
        }
    }

    // Dual polarization never behind single.
    for &(class, fc, users, ..) in &REFERENCE_KM {
        let (single, dual) = simulated_cell(class, fc, users);
        if dual < single {
            failures.push(format!("{class:?} {fc} MHz K={users}: dual {dual} < single {single}"));
        }
    }

    // High tower buys at least the study's minimum distance ratio.
    for &fc in &[700.0, 1800.0, 3500.0] {
        for &users in &[20, 50, 100] {
            let legacy = simulated_cell(SiteClass::Legacy, fc, users);
            let high = simulated_cell(SiteClass::HighTower, fc, users);
            for (label, l, h) in [("single", legacy.0, high.0), ("dual", legacy.1, high.1)] {
                let ratio = h / l;
                println!(
                    "  [{fc:>4.0} MHz K={users:<3}] high/legacy {label}: {ratio:.2}"
                );
                if ratio < 4.5 {
                    failures.push(format!(
                        "{fc} MHz K={users} {label}: high/legacy = {ratio:.2} < 4.5"
                    ));
                }
            }
        }
    }

    let pass = failures.is_empty();
    report(
        "coverage-structural-invariants",
        pass,
        if pass {
            "K-monotonicity, dual ≥ single, and high/legacy ≥ 4.5 all hold"
        } else {
            "violations listed above"
        },
    );
    assert!(pass, "structural violations:\n  {}", failures.join("\n  "));
}

#[test]
fn headline_area_ratio() {
    let legacy = simulated_cell(SiteClass::Legacy, 700.0, 20).1;
    let high = simulated_cell(SiteClass::HighTower, 700.0, 20).1;
    let area_ratio = (high / legacy).powi(2);
    let pass = area_ratio >= 40.0;
    report(
        "headline-area-ratio",
        pass,
        &format!(
            "700 MHz K=20 dual: ({high:.1}/{legacy:.1})² = {area_ratio:.1}× area (need ≥ 40×)"
        ),
    );
    assert!(
        pass,
        "area ratio {area_ratio:.1} < 40 (known divergence: the energy-normalized \
         dual-polarization contract inflates the legacy denominator; see the suite header)"
    );
}

// ── 7. Geo oracle equivalence ───────────────────────────────────────────────

/// Independent re-derivation of the covered population: enumerate every
/// cell, test membership against every site, and accumulate in the same
/// west→east / south→north order the production scan promises. Any
/// deviation — ordering, prefiltering, parallel merging — shows up as a
/// bitwise difference.
fn covered_reference(raster: &PopulationRaster, sites: &[TowerSite]) -> f64 {
    let mut total = 0.0;
    for row in 0..raster.nrows() {
        let mut people_per_km2 = 0.0;
        for col in 0..raster.ncols() {
            let center = raster.cell_center(row, col);
            let covered = sites.iter().any(|s| {
                haversine_km(center, (s.lat, s.lon)) <= s.coverage_radius_km
            });
            if covered {
                people_per_km2 += raster.density(row, col);
            }
        }
        total += people_per_km2 * raster.cell_area_km2(row);
    }
    total
}

#[test]
fn geo_oracle_equivalence() {
    // 100 random rasters with random tower sets: exact equality.
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for case in 0..100 {
        let nrows = 4 + (case % 13);
        let ncols = 4 + (case % 11);
        let lat0 = -50.0 + 100.0 * rng.gen::<f64>();
        let lon0 = -160.0 + 320.0 * rng.gen::<f64>();
        let cell = 0.005 + 0.05 * rng.gen::<f64>();
        let raster = synthetic_raster(
            nrows,
            ncols,
            lat0,
            lon0,
            cell,
            50.0 * rng.gen::<f64>(),
            1 + case % 4,
            2e4 * rng.gen::<f64>(),
            0.5 + 3.0 * rng.gen::<f64>(),
            rng.next_u64(),
        )
        .unwrap();
        let sites: Vec<TowerSite> = (0..1 + case % 3)
            .map(|i| {
                TowerSite::new(
                    format!("site-{case}-{i}"),
                    lat0 + nrows as f64 * cell * rng.gen::<f64>(),
                    lon0 + ncols as f64 * cell * rng.gen::<f64>(),
                    TowerKind::TvTower,
                    0.5 + 40.0 * rng.gen::<f64>(),
                )
            })
            .collect();
        let fast = covered_population(&raster, &sites);
        let reference = covered_reference(&raster, &sites);
        assert_eq!(
            fast, reference,
            "case {case}: scan {fast} != brute force {reference}"
        );
    }

    // Analytic check: uniform density, one interior disk → p·πr² within 2%.
    let density = 130.0;
    let raster = PopulationRaster::from_grid(
        5.0,
        10.0,
        0.01,
        0.01,
        500,
        500,
        vec![density; 500 * 500],
    )
    .unwrap();
    let center = raster.cell_center(250, 250);
    let radius_km = 20.0;
    let tower = TowerSite::new(
        "disk".to_string(),
        center.0,
        center.1,
        TowerKind::TvTower,
        radius_km,
    );
    let covered = covered_population(&raster, std::slice::from_ref(&tower));
    let analytic = density * std::f64::consts::PI * radius_km * radius_km;
    let rel = (covered / analytic - 1.0).abs();
    assert!(
        rel <= 0.02,
        "disk population {covered:.0} vs analytic {analytic:.0} ({:.2}%)",
        100.0 * rel
    );

    report(
        "geo-oracle-equivalence",
        true,
        &format!(
            "100/100 rasters bit-identical to brute force; disk within {:.2}% of p·πr²",
            100.0 * rel
        ),
    );
}

// ── 8. Case-study fixtures ──────────────────────────────────────────────────

#[test]
fn case_study_fixtures() {
    // Injected counts reproduce the case study's percentages exactly.
    let counts = CoverageCounts {
        legacy: 9_000.0,
        tv: 28_500.0,
        combined: 39_000.0, // 30,000 newly covered + the 9,000 legacy
        per_class: vec![],
        per_site: vec![],
    };
    let report_ = scenario_from_counts(&counts, &ScenarioParams::default(), 200_000.0).unwrap();
    assert_eq!(report_.legacy_pct, 4.5);
    assert_eq!(report_.tv_pct, 14.25);
    assert_eq!(report_.combined_pct, 19.5);
    assert_eq!(report_.tv_increment, 30_000.0);
    assert_eq!(report_.tv_increment_pct, 15.0);
    report(
        "case-study-fixtures",
        true,
        "4.5% / 14.25% / 19.5% / +15.0% reproduced exactly from injected counts",
    );
}

// ── 9. Artifact determinism ─────────────────────────────────────────────────

fn towercov_cmd() -> Command {
    Command::new(env!("CARGO_BIN_EXE_towercov"))
}

fn run_ok(args: &[&str], dir: &Path) {
    let out = towercov_cmd().args(args).current_dir(dir).output().unwrap();
    assert!(
        out.status.success(),
        "`towercov {}` failed:\nstdout: {}\nstderr: {}",
        args.join(" "),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn assert_same_bytes(a: &Path, b: &Path) {
    let (ba, bb) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    assert!(
        ba == bb,
        "artifacts differ: {} vs {}",
        a.display(),
        b.display()
    );
}

#[test]
fn artifact_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();

    // Small but non-trivial fixtures: a synthetic raster, a mixed inventory,
    // and a config that shrinks the sweep to seconds.
    let raster = synthetic_raster(40, 40, 9.0, 38.0, 0.02, 20.0, 5, 500.0, 2.0, 9).unwrap();
    raster.write_csv(&root.join("raster.csv")).unwrap();
    let towers = vec![
        TowerSite::new("bs-01".to_string(), 9.2, 38.2, TowerKind::Legacy3G, 0.0),
        TowerSite::new("bs-02".to_string(), 9.5, 38.5, TowerKind::Legacy3G, 0.0),
        TowerSite::new("tv-01".to_string(), 9.4, 38.4, TowerKind::TvTower, 0.0),
    ];
    towercov::geo::write_towers(&root.join("towers.csv"), &towers).unwrap();
    let config = serde_json::json!({
        "seed": 3,
        "sweep": {
            "site_classes": ["legacy"],
            "carriers_mhz": [700.0],
            "users": [2],
            "polarizations": ["single"],
            "m_h": 4,
            "m_v": 2,
            "trials": 4,
            "distance_grid_km": 0.25,
            "max_distance_km": 8.0
        },
        "geo": {
            "radius_km_by_kind": { "legacy-3G": 5.0, "tv-tower": 30.0 }
        },
        "channel_dump": { "users": 3, "distance_km": 0.8 }
    });
    std::fs::write(
        root.join("config.json"),
        serde_json::to_vec_pretty(&config).unwrap(),
    )
    .unwrap();

    // Each command runs twice: fresh output directory, different worker
    // count. Every artifact must match byte for byte.
    let runs: [(&str, Vec<&str>, Vec<&str>); 4] = [
        (
            "coverage-table",
            vec!["coverage-table"],
            vec!["coverage_table.csv", "coverage_curves.json"],
        ),
        (
            "geo-report",
            vec!["geo-report", "--raster", "raster.csv", "--towers", "towers.csv"],
            vec!["geo_report.json", "geo_report.csv", "coverage_map.geojson"],
        ),
        (
            "relocate",
            vec![
                "relocate",
                "--raster",
                "raster.csv",
                "--towers",
                "towers.csv",
                "--n-towers",
                "2",
                "--radius-km",
                "12",
            ],
            vec![
                "relocate_report.json",
                "relocated_towers.csv",
                "relocated_towers.geojson",
            ],
        ),
        ("channel-dump", vec!["channel-dump"], vec!["channel.csv"]),
    ];

    let mut artifacts = 0;
    for (name, args, outputs) in &runs {
        for (jobs, out_dir) in [("1", format!("{name}-a")), ("2", format!("{name}-b"))] {
            let mut full: Vec<&str> = args.clone();
            full.extend(["--config", "config.json", "--jobs", jobs, "--out-dir"]);
            full.push(&out_dir);
            run_ok(&full, root);
        }
        for file in outputs {
            assert_same_bytes(
                &root.join(format!("{name}-a")).join(file),
                &root.join(format!("{name}-b")).join(file),
            );
            artifacts += 1;
        }
    }

    report(
        "artifact-determinism",
        true,
        &format!("{artifacts} artifacts byte-identical across reruns at --jobs 1 vs --jobs 2"),
    );
}
