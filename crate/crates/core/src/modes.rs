//! From raw eigenpairs to physical modes: branch selection, the interface
//! residual, the filter chain, deduplication across radiation cases, the
//! parallel frequency sweep and curve tracing.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assembly::{assemble_with, enumerate_cases, Discretization, Field, PotentialKind, RadiationCase, ZetaTable};
use crate::error::{Error, Result};
use crate::materials::{Side, TriLayerSystem};
use crate::pep::{eigenvector_at, solve_pep, EigenPair, PepOptions};
use crate::scalar::{imag_unit, Cx, Real};

/// Square root of `k_y²` on the branch demanded by `kind`.
///
/// Evanescent waves take `Im k_y ≥ 0`, so `exp(i k_y |y ∓ d|)` decays away
/// from the interface. Leaky waves take the principal root (`Re k_y ≥ 0`),
/// which for attenuated modes has `Im k_y < 0`: outgoing and growing.
pub fn select_branch<T: Real>(k_y_sq: Cx<T>, kind: PotentialKind) -> Cx<T> {
    match kind {
        PotentialKind::Leaky => k_y_sq.sqrt(),
        PotentialKind::Evanescent => imag_unit::<T>() * (-k_y_sq).sqrt(),
    }
}

/// Whether `k_y²` sits on the branch point relative to the scale `k_ref²`.
pub fn is_branch_point<T: Real>(k_y_sq: Cx<T>, k_ref: T) -> bool {
    k_y_sq.norm() <= T::lit(1e-10) * k_ref * k_ref
}

/// Outward wavenumbers `(q_a, p_a, q_b, p_b)` of the half-space potentials
/// and a branch-point flag.
pub fn half_space_wavenumbers<T: Real>(
    sys: &TriLayerSystem<T>,
    omega: T,
    k: Cx<T>,
    kinds: [PotentialKind; 4],
) -> ([Cx<T>; 4], bool) {
    let speeds = [sys.side_a.c_l, sys.side_a.c_t, sys.side_b.c_l, sys.side_b.c_t];
    let mut out = [Cx::new(T::zero(), T::zero()); 4];
    let mut flag = false;
    for i in 0..4 {
        let kb = omega / speeds[i];
        let sq = Cx::new(kb * kb, T::zero()) - k * k;
        flag |= is_branch_point(sq, kb);
        out[i] = select_branch(sq, kinds[i]);
    }
    (out, flag)
}

/// Largest non-dimensional violation of the eight interface conditions.
///
/// Guide derivatives come from the collocation matrices. Half-space
/// derivatives are rebuilt from the interface values and the outward
/// wavenumbers, so a spurious eigenvector whose potentials do not behave as
/// a single partial wave fails the test. Stress rows are divided by
/// `μ_guide |k| U` and displacement rows by `U`, with `U` the largest guide
/// displacement.
pub fn interface_residual<T: Real>(
    vector: &[Cx<T>],
    k: Cx<T>,
    omega: T,
    sys: &TriLayerSystem<T>,
    case: &RadiationCase<T>,
    disc: &Discretization<T>,
) -> T {
    let n = disc.n;
    let block = |f: Field| &vector[f.offset(n)..f.offset(n) + n];
    let ux = block(Field::Ux);
    let uy = block(Field::Uy);
    let scale_u = ux.iter().chain(uy).map(|z| z.norm()).fold(T::zero(), T::max);
    if !(scale_u > T::zero()) {
        return T::infinity();
    }
    let (wn, _) = half_space_wavenumbers(sys, omega, k, case.branch_kinds());
    let i = imag_unit::<T>();
    let g = &sys.guide;
    let two = T::lit(2.0);
    let mut worst = T::zero();
    for side in Side::BOTH {
        let m = sys.side(side);
        let (q, p, sign) = match side {
            Side::A => (wn[0], wn[1], -T::one()),
            Side::B => (wn[2], wn[3], T::one()),
        };
        let gi = disc.guide_interface(side);
        let hi = disc.phi(side).interface_index;
        let phi = block(Field::phi(side))[hi];
        let psi = block(Field::psi(side))[hi];
        let dphi = i * q * phi * sign;
        let d2phi = -(q * q) * phi;
        let dpsi = i * p * psi * sign;
        let d2psi = -(p * p) * psi;
        let d1 = &disc.guide.d1;
        let mut dux = Cx::new(T::zero(), T::zero());
        let mut duy = dux;
        for j in 0..n {
            dux += d1[(gi, j)] * ux[j];
            duy += d1[(gi, j)] * uy[j];
        }
        let normal = duy * g.p_modulus() + i * k * ux[gi] * g.lambda + k * k * phi * m.lambda
            - d2phi * m.p_modulus()
            - i * k * dpsi * (two * m.mu);
        let shear = (i * k * uy[gi] + dux) * g.mu - (i * k * dphi * two - k * k * psi - d2psi) * m.mu;
        let tangential = ux[gi] - i * k * phi + dpsi;
        let norm_disp = uy[gi] - dphi - i * k * psi;
        let stress_scale = g.mu * k.norm() * scale_u;
        worst = worst
            .max(normal.norm() / stress_scale)
            .max(shear.norm() / stress_scale)
            .max(tangential.norm() / scale_u)
            .max(norm_disp.norm() / scale_u);
    }
    worst
}

/// Thresholds of the filter chain and of deduplication.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterConfig {
    /// Upper bound on `Im k_x` in Np/mm.
    pub max_attenuation_np_mm: f64,
    pub interface_residual_tol: f64,
    /// Relative distance below which `k_x` is taken as a bulk wavenumber.
    pub bulk_tol: f64,
    /// Relative slack on the case's phase-velocity interval.
    pub edge_tol: f64,
    /// `Im k_x` below this, including tolerated negatives, is reported as
    /// zero attenuation.
    pub negative_attenuation_tol: f64,
    /// `Im k_x < -amplification_tol · |k_x|` is rejected as amplifying.
    /// Relative, because near-real roots carry rounding noise in `Im k_x`
    /// that grows with `|k_x|` and `N`.
    pub amplification_tol: f64,
    /// Modes from cases without leaky waves must be lossless to this level.
    pub lossless_tol: f64,
    /// Relative `|Δk_x|` below which two modes at one frequency coincide.
    pub dedup_tol: f64,
    /// `|k_x|` above this is treated as infinite.
    pub infinity_guard: f64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            max_attenuation_np_mm: 15.0,
            interface_residual_tol: 1e-3,
            bulk_tol: 1e-4,
            edge_tol: 1e-6,
            negative_attenuation_tol: 1e-9,
            amplification_tol: 1e-7,
            lossless_tol: 1e-6,
            dedup_tol: 1e-6,
            infinity_guard: 1e8,
        }
    }
}

/// Why an eigenpair was discarded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rejection {
    NotFinite,
    BackPropagating,
    Amplifying,
    HighlyAttenuative,
    BulkWave,
    OutsideCaseInterval,
    /// Complex root in a case where no energy can leave the plate.
    NonPropagating,
    InterfaceResidual,
}

/// A retained physical mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSolution<T> {
    /// Angular frequency in rad/µs.
    pub omega: T,
    /// Frequency in MHz.
    pub frequency: T,
    pub k_x: Cx<T>,
    /// `ω / Re k_x` in mm/µs.
    pub phase_velocity: T,
    /// `Im k_x` in Np/mm, tiny negatives clamped to zero.
    pub attenuation: T,
    pub case_index: usize,
    pub case_label: String,
    pub interface_residual: T,
    pub backward_error: T,
    /// Some half-space `k_y` vanishes at this `k_x`.
    pub branch_point: bool,
    #[serde(skip)]
    pub vector: Vec<Cx<T>>,
}

/// Checks that depend on `k_x` alone.
pub fn screen_wavenumber<T: Real>(
    k: Cx<T>,
    omega: T,
    case: &RadiationCase<T>,
    sys: &TriLayerSystem<T>,
    cfg: &FilterConfig,
) -> Option<Rejection> {
    let lit = T::lit;
    if !k.re.is_finite() || !k.im.is_finite() || k.norm() > lit(cfg.infinity_guard) {
        return Some(Rejection::NotFinite);
    }
    if !(k.re > T::zero()) {
        return Some(Rejection::BackPropagating);
    }
    if k.im < -lit(cfg.amplification_tol) * k.norm() {
        return Some(Rejection::Amplifying);
    }
    if k.im >= lit(cfg.max_attenuation_np_mm) {
        return Some(Rejection::HighlyAttenuative);
    }
    let bulk = sys.bulk_wavenumbers(omega);
    if bulk
        .iter()
        .any(|&kb| (k - Cx::new(kb, T::zero())).norm() < lit(cfg.bulk_tol) * kb)
    {
        return Some(Rejection::BulkWave);
    }
    if !case.contains_phase_velocity(omega / k.re, lit(cfg.edge_tol)) {
        return Some(Rejection::OutsideCaseInterval);
    }
    if !case.any_leaky() && k.im > lit(cfg.lossless_tol) {
        return Some(Rejection::NonPropagating);
    }
    None
}

/// Runs the full filter chain on one eigenpair.
pub fn classify<T: Real>(
    pair: &EigenPair<T>,
    omega: T,
    case: &RadiationCase<T>,
    sys: &TriLayerSystem<T>,
    disc: &Discretization<T>,
    cfg: &FilterConfig,
) -> std::result::Result<ModeSolution<T>, Rejection> {
    if let Some(r) = screen_wavenumber(pair.k, omega, case, sys, cfg) {
        return Err(r);
    }
    let residual = interface_residual(&pair.vector, pair.k, omega, sys, case, disc);
    if !(residual <= T::lit(cfg.interface_residual_tol)) {
        return Err(Rejection::InterfaceResidual);
    }
    let (_, branch_point) = half_space_wavenumbers(sys, omega, pair.k, case.branch_kinds());
    let attenuation = if pair.k.im < T::lit(cfg.negative_attenuation_tol) {
        T::zero()
    } else {
        pair.k.im
    };
    Ok(ModeSolution {
        omega,
        frequency: omega / (T::lit(2.0) * T::PI()),
        k_x: pair.k,
        phase_velocity: omega / pair.k.re,
        attenuation,
        case_index: case.index,
        case_label: case.label(),
        interface_residual: residual,
        backward_error: pair.backward_error,
        branch_point,
        vector: pair.vector.clone(),
    })
}

/// Keeps the eigenpairs that pass every rule.
pub fn filter_modes<T: Real>(
    raw: &[EigenPair<T>],
    case: &RadiationCase<T>,
    sys: &TriLayerSystem<T>,
    omega: T,
    disc: &Discretization<T>,
    cfg: &FilterConfig,
) -> Vec<ModeSolution<T>> {
    raw.iter()
        .filter_map(|p| classify(p, omega, case, sys, disc, cfg).ok())
        .collect()
}

/// Solver settings for one `(ω, case)` point and for sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveOptions {
    /// Collocation points per field block.
    pub n_points: usize,
    pub filters: FilterConfig,
    /// Scale every row of the problem to unit max before solving.
    pub equilibrate: bool,
    /// Worker threads for sweeps; 0 uses all available cores.
    pub jobs: usize,
    /// Restrict sweeps to these case indices.
    pub only_cases: Option<Vec<usize>>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            n_points: 50,
            filters: FilterConfig::default(),
            equilibrate: false,
            jobs: 0,
            only_cases: None,
        }
    }
}

/// Outcome of one `(ω, case)` solve.
#[derive(Debug, Clone)]
pub struct CaseSolve<T> {
    pub modes: Vec<ModeSolution<T>>,
    pub n_eigenvalues: usize,
    pub n_infinite: usize,
    pub rejections: Vec<(Cx<T>, Rejection)>,
}

/// Assembles, solves and filters one radiation case at one frequency.
///
/// Only eigenvalues are computed densely. Eigenvectors are obtained by
/// inverse iteration for the candidates that survive the `k_x`-only checks,
/// which roughly halves the cost of a solve.
pub fn solve_case<T: Real>(
    sys: &TriLayerSystem<T>,
    omega: T,
    case: &RadiationCase<T>,
    disc: &Discretization<T>,
    opts: &SolveOptions,
) -> Result<CaseSolve<T>> {
    let mut pep = assemble_with(sys, omega, disc, &case.label())?;
    if opts.equilibrate {
        pep.equilibrate();
    }
    let pep_opts = PepOptions {
        infinity_threshold: T::lit(opts.filters.infinity_guard),
        vectors: false,
        ..PepOptions::default()
    };
    let sol = solve_pep(&pep, &pep_opts)?;
    let mut modes = Vec::new();
    let mut rejections = Vec::new();
    for pair in &sol.pairs {
        if let Some(r) = screen_wavenumber(pair.k, omega, case, sys, &opts.filters) {
            rejections.push((pair.k, r));
            continue;
        }
        let (vector, backward_error) = eigenvector_at(&pep, pair.k)?;
        let full = EigenPair {
            k: pair.k,
            vector,
            backward_error,
        };
        match classify(&full, omega, case, sys, disc, &opts.filters) {
            Ok(m) => modes.push(m),
            Err(r) => rejections.push((pair.k, r)),
        }
    }
    modes.sort_by(|a, b| cmp_modes(a, b));
    Ok(CaseSolve {
        modes,
        n_eigenvalues: sol.pairs.len(),
        n_infinite: sol.n_infinite,
        rejections,
    })
}

/// Every case at one frequency, merged and deduplicated.
pub fn solve_frequency<T: Real>(
    sys: &TriLayerSystem<T>,
    omega: T,
    zetas: &ZetaTable<T>,
    opts: &SolveOptions,
) -> Result<Vec<ModeSolution<T>>> {
    let mut modes = Vec::new();
    for case in selected_cases(sys, zetas, opts) {
        let disc = Discretization::new(sys, &case, opts.n_points)?;
        modes.extend(solve_case(sys, omega, &case, &disc, opts)?.modes);
    }
    Ok(dedup_modes(modes, opts.filters.dedup_tol))
}

fn selected_cases<T: Real>(
    sys: &TriLayerSystem<T>,
    zetas: &ZetaTable<T>,
    opts: &SolveOptions,
) -> Vec<RadiationCase<T>> {
    enumerate_cases(sys, zetas)
        .into_iter()
        .filter(|c| opts.only_cases.as_ref().is_none_or(|only| only.contains(&c.index)))
        .collect()
}

/// Deterministic order: frequency, then case index, then `Re k_x`.
pub fn cmp_modes<T: Real>(a: &ModeSolution<T>, b: &ModeSolution<T>) -> Ordering {
    a.omega
        .partial_cmp(&b.omega)
        .unwrap_or(Ordering::Equal)
        .then(a.case_index.cmp(&b.case_index))
        .then(a.k_x.re.partial_cmp(&b.k_x.re).unwrap_or(Ordering::Equal))
        .then(a.k_x.im.partial_cmp(&b.k_x.im).unwrap_or(Ordering::Equal))
}

/// Drops modes that coincide with a better one at the same frequency.
/// Of two modes with `|Δk_x| / |k_x| < tol`, the one with the smaller
/// interface residual survives. The result is sorted by [`cmp_modes`].
pub fn dedup_modes<T: Real>(mut modes: Vec<ModeSolution<T>>, tol: f64) -> Vec<ModeSolution<T>> {
    let tol = T::lit(tol);
    modes.sort_by(|a, b| {
        a.omega
            .partial_cmp(&b.omega)
            .unwrap_or(Ordering::Equal)
            .then(
                a.interface_residual
                    .partial_cmp(&b.interface_residual)
                    .unwrap_or(Ordering::Equal),
            )
            .then_with(|| cmp_modes(a, b))
    });
    let mut kept: Vec<ModeSolution<T>> = Vec::with_capacity(modes.len());
    let mut group_start = 0;
    for m in modes {
        if kept.get(group_start).is_some_and(|g| g.omega != m.omega) {
            group_start = kept.len();
        }
        let dup = kept[group_start..]
            .iter()
            .any(|k| (k.k_x - m.k_x).norm() < tol * k.k_x.norm().max(m.k_x.norm()));
        if !dup {
            kept.push(m);
        }
    }
    kept.sort_by(cmp_modes);
    kept
}

/// A `(ω, case)` point whose solve failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailedPoint {
    pub omega: f64,
    pub frequency_mhz: f64,
    pub case_index: usize,
    pub case_label: String,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct SweepResult<T> {
    pub cases: Vec<RadiationCase<T>>,
    pub omegas: Vec<T>,
    pub modes: Vec<ModeSolution<T>>,
    pub failures: Vec<FailedPoint>,
}

impl<T> SweepResult<T> {
    pub fn is_partial(&self) -> bool {
        !self.failures.is_empty()
    }
}

/// Sweeps every selected case over `omegas` (rad/µs).
pub fn sweep<T: Real>(
    sys: &TriLayerSystem<T>,
    omegas: &[T],
    zetas: &ZetaTable<T>,
    opts: &SolveOptions,
) -> Result<SweepResult<T>> {
    sweep_with_progress(sys, omegas, zetas, opts, |_, _| {})
}

/// [`sweep`] with a callback receiving `(completed, total)` task counts.
pub fn sweep_with_progress<T: Real>(
    sys: &TriLayerSystem<T>,
    omegas: &[T],
    zetas: &ZetaTable<T>,
    opts: &SolveOptions,
    progress: impl Fn(usize, usize) + Sync,
) -> Result<SweepResult<T>> {
    if omegas.iter().any(|w| !(*w > T::zero()) || !w.is_finite()) {
        return Err(Error::Config("angular frequencies must be positive and finite".into()));
    }
    if omegas.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Config("angular frequencies must be strictly increasing".into()));
    }
    let cases = selected_cases(sys, zetas, opts);
    let discs = cases
        .iter()
        .map(|c| Discretization::new(sys, c, opts.n_points))
        .collect::<Result<Vec<_>>>()?;
    let tasks: Vec<(usize, usize)> = (0..omegas.len())
        .flat_map(|w| (0..cases.len()).map(move |c| (w, c)))
        .collect();
    let total = tasks.len();
    let done = std::sync::atomic::AtomicUsize::new(0);

    let run = || {
        tasks
            .par_iter()
            .map(|&(w, c)| {
                let out = solve_case(sys, omegas[w], &cases[c], &discs[c], opts);
                let finished = done.fetch_add(1, std::sync::atomic::Ordering::Relaxed) + 1;
                progress(finished, total);
                (w, c, out)
            })
            .collect::<Vec<_>>()
    };
    let results = if opts.jobs == 0 {
        run()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(opts.jobs)
            .build()
            .map_err(|e| Error::Config(format!("cannot start {} worker threads: {e}", opts.jobs)))?
            .install(run)
    };

    let mut modes = Vec::new();
    let mut failures = Vec::new();
    for (w, c, out) in results {
        match out {
            Ok(cs) => modes.extend(cs.modes),
            Err(e) => {
                let omega = omegas[w].as_f64();
                failures.push(FailedPoint {
                    omega,
                    frequency_mhz: omega / (2.0 * std::f64::consts::PI),
                    case_index: cases[c].index,
                    case_label: cases[c].label(),
                    message: e.to_string(),
                })
            }
        }
    }
    failures.sort_by(|a, b| a.omega.total_cmp(&b.omega).then(a.case_index.cmp(&b.case_index)));
    Ok(SweepResult {
        cases,
        omegas: omegas.to_vec(),
        modes: dedup_modes(modes, opts.filters.dedup_tol),
        failures,
    })
}

/// Links modes at successive frequencies into curves by nearest-neighbour
/// continuation in `(c_ph, attenuation)`. A step longer than `jump`
/// (in the same mixed units, mm/µs and Np/mm) starts a new curve. Returns
/// one curve id per mode, in input order.
pub fn trace_curves<T: Real>(modes: &[ModeSolution<T>], jump: T) -> Vec<usize> {
    let mut ids = vec![usize::MAX; modes.len()];
    let mut order: Vec<usize> = (0..modes.len()).collect();
    order.sort_by(|&a, &b| cmp_modes(&modes[a], &modes[b]));

    let dist = |a: &ModeSolution<T>, b: &ModeSolution<T>| {
        let dc = a.phase_velocity - b.phase_velocity;
        let da = a.attenuation - b.attenuation;
        (dc * dc + da * da).sqrt()
    };

    let mut next_id = 0;
    // curve heads from the previous frequency: (mode index, curve id)
    let mut heads: Vec<(usize, usize)> = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let omega = modes[order[i]].omega;
        let mut j = i;
        while j < order.len() && modes[order[j]].omega == omega {
            j += 1;
        }
        let current = &order[i..j];

        let mut pairs: Vec<(T, usize, usize)> = Vec::new();
        for (ci, &m) in current.iter().enumerate() {
            for (hi, &(h, _)) in heads.iter().enumerate() {
                let d = dist(&modes[m], &modes[h]);
                if d <= jump {
                    pairs.push((d, ci, hi));
                }
            }
        }
        pairs.sort_by(|a, b| {
            a.0.partial_cmp(&b.0)
                .unwrap_or(Ordering::Equal)
                .then(a.1.cmp(&b.1))
                .then(a.2.cmp(&b.2))
        });
        let mut used_mode = vec![false; current.len()];
        let mut used_head = vec![false; heads.len()];
        for (_, ci, hi) in pairs {
            if !used_mode[ci] && !used_head[hi] {
                used_mode[ci] = true;
                used_head[hi] = true;
                ids[current[ci]] = heads[hi].1;
            }
        }
        for (ci, &m) in current.iter().enumerate() {
            if !used_mode[ci] {
                ids[m] = next_id;
                next_id += 1;
            }
        }
        heads = current.iter().map(|&m| (m, ids[m])).collect();
        i = j;
    }
    ids
}
