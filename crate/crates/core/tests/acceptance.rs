//! Acceptance suite. Each test prints one `A<n> PASS|FAIL` line with the
//! measured figures; run with `--nocapture` to see them.
//!
//! The full epoxy/aluminium sweep is computed once and shared.

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use leaky_lamb::assembly::{assemble_with, enumerate_cases, Discretization, RadiationCase, ZetaTable};
use leaky_lamb::io::config::FrequencySpec;
use leaky_lamb::modes::{
    classify, screen_wavenumber, solve_case, solve_frequency, sweep, FilterConfig, ModeSolution, Rejection,
    SolveOptions, SweepResult,
};
use leaky_lamb::oracle::{
    amplitudes, characteristic_determinant, rayleigh_lamb_roots, refine_root, sample_on_grids, LambSymmetry,
    RefineOptions,
};
use leaky_lamb::pep::EigenPair;
use leaky_lamb::shape::{mode_shape, u_y_parity};
use leaky_lamb::{Material, TriLayerSystem, C64};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;
const RUNTIME_LIMIT: Duration = Duration::from_secs(20 * 60);

fn report(id: &str, pass: bool, detail: String) {
    println!("{id} {}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "{id} failed: {detail}");
}

struct FullSweep {
    sys: TriLayerSystem,
    result: SweepResult<f64>,
    elapsed: Duration,
}

fn full_sweep() -> &'static FullSweep {
    static SWEEP: OnceLock<FullSweep> = OnceLock::new();
    SWEEP.get_or_init(|| {
        faer::set_global_parallelism(faer::Par::Seq);
        let sys = TriLayerSystem::epoxy_aluminium();
        let omegas: Vec<f64> = FrequencySpec::default()
            .grid()
            .unwrap()
            .iter()
            .map(|f| TWO_PI * f)
            .collect();
        let start = Instant::now();
        let result = sweep(&sys, &omegas, &ZetaTable::default(), &SolveOptions::default()).unwrap();
        FullSweep {
            sys,
            result,
            elapsed: start.elapsed(),
        }
    })
}

fn case(sys: &TriLayerSystem, index: usize) -> RadiationCase<f64> {
    enumerate_cases(sys, &ZetaTable::default())[index].clone()
}

#[test]
fn a1_reference_sweep() {
    let s = full_sweep();
    let r = &s.result;
    let counts: Vec<usize> = r
        .cases
        .iter()
        .map(|c| r.modes.iter().filter(|m| m.case_index == c.index).count())
        .collect();
    let inside = r.modes.iter().all(|m| {
        let c = &r.cases[m.case_index];
        c.contains_phase_velocity(m.phase_velocity, 1e-6)
    });
    let pass = r.omegas.len() == 150
        && r.cases.len() == 3
        && counts.iter().all(|&n| n > 0)
        && r.failures.is_empty()
        && inside
        && s.elapsed <= RUNTIME_LIMIT;
    report(
        "A1",
        pass,
        format!(
            "{} frequencies to {:.4} MHz, modes per case {:?}, {} failed points, {:.1} s (limit {} s)",
            r.omegas.len(),
            r.omegas.last().unwrap() / TWO_PI,
            counts,
            r.failures.len(),
            s.elapsed.as_secs_f64(),
            RUNTIME_LIMIT.as_secs()
        ),
    );
}

#[test]
fn a2_oracle_equivalence() {
    let s = full_sweep();
    let modes = &s.result.modes;
    let opts = RefineOptions::default();
    let mut refined = 0;
    let mut small_det = 0;
    let mut worst_dev: f64 = 0.0;
    let mut worst_det: f64 = 0.0;
    for m in modes {
        let kinds = s.result.cases[m.case_index].branch_kinds();
        let det = characteristic_determinant(&s.sys, m.omega, m.k_x, kinds)
            .unwrap()
            .value
            .norm();
        worst_det = worst_det.max(det);
        if det < 1e-5 {
            small_det += 1;
        }
        if let Ok(r) = refine_root(&s.sys, m.omega, m.k_x, kinds, &opts) {
            let dev = (r.k_x - m.k_x).norm() / m.k_x.norm();
            worst_dev = worst_dev.max(dev);
            if dev < 1e-4 {
                refined += 1;
            }
        }
    }
    let n = modes.len() as f64;
    let (f_ref, f_det) = (refined as f64 / n, small_det as f64 / n);
    report(
        "A2",
        f_ref >= 0.99 && f_det >= 0.99,
        format!(
            "{refined}/{} refine within 1e-4 ({:.2}%, worst {worst_dev:.2e}); {small_det}/{} with |D| < 1e-5 ({:.2}%, worst {worst_det:.2e})",
            modes.len(),
            100.0 * f_ref,
            modes.len(),
            100.0 * f_det
        ),
    );
}

#[test]
fn a3_named_modes() {
    let sys = TriLayerSystem::epoxy_aluminium();
    let zeta = ZetaTable::default();
    let opts = SolveOptions::default();
    let at_353 = solve_frequency(&sys, TWO_PI * 3.53, &zeta, &opts).unwrap();
    let lossless: Vec<&ModeSolution<f64>> = at_353.iter().filter(|m| m.attenuation < 1e-6).collect();
    let at_103 = solve_frequency(&sys, TWO_PI * 1.03, &zeta, &opts).unwrap();
    let shear: Vec<&ModeSolution<f64>> = at_103
        .iter()
        .filter(|m| m.attenuation > 0.0 && m.phase_velocity > 3.12 && m.phase_velocity < 6.33)
        .collect();
    let show = |v: &[&ModeSolution<f64>]| {
        v.iter()
            .map(|m| format!("{:.5}{:+.5}i", m.k_x.re, m.k_x.im))
            .collect::<Vec<_>>()
            .join(", ")
    };
    report(
        "A3",
        !lossless.is_empty() && !shear.is_empty(),
        format!(
            "3.53 MHz lossless k_x: [{}]; 1.03 MHz leaky k_x with c in (3.12, 6.33): [{}]",
            show(&lossless),
            show(&shear)
        ),
    );
}

/// Evenly spaced picks from each case of the shared sweep.
fn convergence_sample(r: &SweepResult<f64>) -> Vec<&ModeSolution<f64>> {
    let per_case = [4, 3, 3];
    let mut out = Vec::new();
    for (c, &want) in per_case.iter().enumerate() {
        let modes: Vec<&ModeSolution<f64>> = r.modes.iter().filter(|m| m.case_index == c).collect();
        for j in 0..want.min(modes.len()) {
            out.push(modes[(2 * j + 1) * modes.len() / (2 * want)]);
        }
    }
    out
}

#[test]
fn a4_spectral_convergence() {
    let s = full_sweep();
    let sample = convergence_sample(&s.result);
    let opts = SolveOptions {
        n_points: 64,
        ..SolveOptions::default()
    };
    let mut worst: f64 = 0.0;
    let mut lines = Vec::new();
    for m in &sample {
        let c = &s.result.cases[m.case_index];
        let disc = Discretization::new(&s.sys, c, 64).unwrap();
        let fine = solve_case(&s.sys, m.omega, c, &disc, &opts).unwrap();
        let dev = fine
            .modes
            .iter()
            .map(|f| (f.k_x - m.k_x).norm() / m.k_x.norm())
            .fold(f64::INFINITY, f64::min);
        worst = worst.max(dev);
        lines.push(format!("{:.3} MHz {} {:.2e}", m.frequency, c.label(), dev));
    }
    report(
        "A4",
        sample.len() == 10 && worst < 1e-6,
        format!(
            "{} modes, worst |dk|/|k| = {worst:.2e} [{}]",
            sample.len(),
            lines.join("; ")
        ),
    );
}

#[test]
fn a5_free_plate_limit() {
    let base = TriLayerSystem::epoxy_aluminium();
    let light = base.side_a.with_density(1e-6).unwrap();
    let sys = TriLayerSystem::new(light.clone(), base.guide.clone(), light, base.half_thickness).unwrap();
    let zeta = ZetaTable::default();
    let opts = SolveOptions::default();

    let mut checked = 0;
    let mut worst: f64 = 0.0;
    for f in [0.5, 1.0, 2.0, 3.0, 4.0] {
        let w = TWO_PI * f;
        let mut roots = rayleigh_lamb_roots(&sys.guide, sys.half_thickness, w, LambSymmetry::S);
        roots.extend(rayleigh_lamb_roots(&sys.guide, sys.half_thickness, w, LambSymmetry::A));
        for m in solve_frequency(&sys, w, &zeta, &opts).unwrap() {
            if m.attenuation > 1e-4 {
                continue;
            }
            let dev = roots
                .iter()
                .map(|r| (m.k_x.re - r).abs() / r)
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(dev);
            checked += 1;
        }
    }

    let f0 = 0.05 / sys.thickness();
    let s0 = solve_frequency(&sys, TWO_PI * f0, &zeta, &opts)
        .unwrap()
        .into_iter()
        .map(|m| m.phase_velocity)
        .min_by(|a, b| (a - 1.995).abs().total_cmp(&(b - 1.995).abs()));
    let s0_dev = s0.map(|c| (c - 1.995).abs() / 1.995).unwrap_or(f64::INFINITY);
    report(
        "A5",
        checked > 0 && worst < 1e-3 && s0_dev < 5e-3,
        format!(
            "{checked} low-attenuation modes, worst deviation from Rayleigh-Lamb roots {worst:.2e}; \
             S0 at {f0} MHz: c = {:.5} km/s ({:.3}% from 1.995)",
            s0.unwrap_or(f64::NAN),
            100.0 * s0_dev
        ),
    );
}

#[test]
fn a6_symmetry() {
    let s = full_sweep();
    let mut worst_parity: f64 = 0.0;
    for m in &s.result.modes {
        let c = &s.result.cases[m.case_index];
        let shape = mode_shape(&m.vector, m.k_x, m.omega, &s.sys, c, 50, 1.0, 201).unwrap();
        let (even, odd) = u_y_parity(&shape.u_y);
        worst_parity = worst_parity.max(even.min(odd));
    }

    // mirror invariance on a system whose half-spaces differ
    let steel = Material::from_speeds("steel", 7.8, 5.9, 3.2).unwrap();
    let sys = TriLayerSystem::new(Material::aluminium(), Material::epoxy(), steel, 0.5).unwrap();
    let mirrored = sys.swapped();
    let zeta = ZetaTable::default();
    let opts = SolveOptions::default();
    let mut worst_swap: f64 = 0.0;
    let mut count_match = true;
    let mut n_modes = 0;
    for f in [0.7, 1.9, 3.53] {
        let w = TWO_PI * f;
        let a = solve_frequency(&sys, w, &zeta, &opts).unwrap();
        let b = solve_frequency(&mirrored, w, &zeta, &opts).unwrap();
        count_match &= a.len() == b.len();
        n_modes += a.len();
        for m in &a {
            let dev = b
                .iter()
                .map(|o| (o.k_x - m.k_x).norm() / m.k_x.norm())
                .fold(f64::INFINITY, f64::min);
            worst_swap = worst_swap.max(dev);
        }
    }
    report(
        "A6",
        worst_parity < 1e-6 && count_match && worst_swap < 1e-8,
        format!(
            "{} sweep modes, worst u_y parity defect {worst_parity:.2e}; swap test on aluminium/epoxy/steel: \
             {n_modes} modes, counts match {count_match}, worst |dk|/|k| {worst_swap:.2e}",
            s.result.modes.len()
        ),
    );
}

#[test]
fn a7_filter_rules() {
    let sys = TriLayerSystem::epoxy_aluminium();
    let cfg = FilterConfig::default();
    let w = TWO_PI * 1.03;
    let shear = case(&sys, 1);
    let bound = case(&sys, 0);
    let disc = Discretization::new(&sys, &shear, 50).unwrap();
    let good = solve_case(&sys, w, &shear, &disc, &SolveOptions::default())
        .unwrap()
        .modes
        .into_iter()
        .find(|m| (m.k_x - C64::new(1.0824094953, 0.1583574185)).norm() < 1e-6)
        .expect("reference shear-leaky mode");
    let pair = |k: C64| EigenPair {
        k,
        vector: good.vector.clone(),
        backward_error: good.backward_error,
    };

    let mut checks: Vec<(&str, bool)> = vec![
        (
            "defaults 15 Np/mm and 1e-3",
            cfg.max_attenuation_np_mm == 15.0 && cfg.interface_residual_tol == 1e-3,
        ),
        (
            "reference mode kept",
            classify(&pair(good.k_x), w, &shear, &sys, &disc, &cfg).is_ok(),
        ),
    ];
    let screen = |k: C64, c: &RadiationCase<f64>| screen_wavenumber(k, w, c, &sys, &cfg);
    // phase velocity 5 km/s keeps these inside the shear-leaky interval
    let re = w / 5.0;
    let cases: [(&str, C64, &RadiationCase<f64>, Rejection); 9] = [
        ("Re k < 0", C64::new(-re, 0.1), &shear, Rejection::BackPropagating),
        ("Re k = 0", C64::new(0.0, 0.1), &shear, Rejection::BackPropagating),
        ("Im k < 0", C64::new(re, -1e-3), &shear, Rejection::Amplifying),
        ("Im k = 15", C64::new(re, 15.0), &shear, Rejection::HighlyAttenuative),
        ("Im k = 40", C64::new(re, 40.0), &shear, Rejection::HighlyAttenuative),
        ("NaN", C64::new(f64::NAN, 0.0), &shear, Rejection::NotFinite),
        ("bulk shear", C64::new(w / 3.12, 0.0), &shear, Rejection::BulkWave),
        (
            "outside interval",
            C64::new(w / 2.0, 0.1),
            &shear,
            Rejection::OutsideCaseInterval,
        ),
        (
            "lossy in bound case",
            C64::new(w / 2.0, 0.1),
            &bound,
            Rejection::NonPropagating,
        ),
    ];
    for (name, k, c, want) in cases {
        checks.push((name, screen(k, c) == Some(want)));
    }
    checks.push((
        "Im k = 14.99 passes screen",
        screen(C64::new(re, 14.99), &shear).is_none(),
    ));

    // corrupt the interface values of the half-space potentials
    let mut bad = pair(good.k_x);
    for &(row, _, _) in &assemble_with(&sys, w, &disc, "shear-leaky").unwrap().replaced_rows {
        bad.vector[row] += C64::new(0.05, 0.0);
    }
    checks.push((
        "interface residual",
        classify(&bad, w, &shear, &sys, &disc, &cfg) == Err(Rejection::InterfaceResidual),
    ));

    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    report(
        "A7",
        failed.is_empty(),
        format!("{} synthetic checks, failed: {failed:?}", checks.len()),
    );
}

#[test]
fn a8_manufactured_solution() {
    let sys = TriLayerSystem::epoxy_aluminium();
    let zeta = ZetaTable::default();
    let mut worst: f64 = 0.0;
    let mut lines = Vec::new();
    for (f, index, seed) in [
        (3.53, 0, C64::new(7.6933224337, 0.0)),
        (1.03, 1, C64::new(1.0824094953, 0.1583574185)),
        (3.53, 2, C64::new(0.636, 3.812)),
    ] {
        let w = TWO_PI * f;
        let c = &enumerate_cases(&sys, &zeta)[index];
        let kinds = c.branch_kinds();
        let root = refine_root(&sys, w, seed, kinds, &RefineOptions::default()).unwrap();
        let amps = amplitudes(&sys, w, root.k_x, kinds).unwrap();
        let disc = Discretization::new(&sys, c, 50).unwrap();
        let pep = assemble_with(&sys, w, &disc, &c.label()).unwrap();
        let u = sample_on_grids(&sys, w, root.k_x, kinds, &amps, &disc);
        let res = pep.apply(root.k_x, &u);
        let norm = |v: &[C64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let (n0, n1, n2) = pep.norms();
        let kk = root.k_x.norm();
        let rel = norm(&res) / ((kk * kk * n2 + kk * n1 + n0) * norm(&u));
        worst = worst.max(rel);
        lines.push(format!("{} at {f} MHz: {rel:.2e}", c.label()));
    }
    report("A8", worst < 1e-6, format!("relative residuals [{}]", lines.join("; ")));
}
