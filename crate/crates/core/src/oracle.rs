//! Independent check of the collocation results: the classical partial-wave
//! characteristic determinant of the plate between two half-spaces, Newton
//! refinement of its roots, and the Rayleigh–Lamb roots of the free plate.
//!
//! Every medium carries Helmholtz potentials with
//! `u_x = i k φ - ψ'` and `u_y = φ' + i k ψ`. The guide holds four partial
//! waves `e^{±i q y}` (φ) and `e^{±i p y}` (ψ); each half-space holds one
//! outgoing longitudinal and one outgoing shear wave, `e^{i k_y |y ∓ d|}` with
//! `k_y` from [`select_branch`]. The eight amplitudes are ordered
//! `(φ⁺, φ⁻, ψ⁺, ψ⁻, φ_a, ψ_a, φ_b, ψ_b)`.

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::assembly::{Discretization, Field, PotentialKind};
use crate::error::{Error, Result};
use crate::materials::{Material, Side, TriLayerSystem};
use crate::modes::half_space_wavenumbers;
use crate::scalar::{imag_unit, Cx, Real};

/// Transverse wavenumbers for one `(ω, k_x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartialWaveBasis<T> {
    pub omega: T,
    pub k_x: Cx<T>,
    /// Guide longitudinal and shear `k_y` (principal roots; both signs are used).
    pub guide_q: Cx<T>,
    pub guide_p: Cx<T>,
    /// Outgoing `(q_a, p_a, q_b, p_b)`.
    pub half_space: [Cx<T>; 4],
    pub branch_point: bool,
}

impl<T: Real> PartialWaveBasis<T> {
    pub fn new(sys: &TriLayerSystem<T>, omega: T, k: Cx<T>, kinds: [PotentialKind; 4]) -> Self {
        let sq = |c: T| {
            let kb = omega / c;
            Cx::new(kb * kb, T::zero()) - k * k
        };
        let (half_space, branch_point) = half_space_wavenumbers(sys, omega, k, kinds);
        Self {
            omega,
            k_x: k,
            guide_q: sq(sys.guide.c_l).sqrt(),
            guide_p: sq(sys.guide.c_t).sqrt(),
            half_space,
            branch_point,
        }
    }
}

/// `(σ_yy, σ_xy, u_x, u_y)` produced by potential values and their first two
/// `y` derivatives.
#[allow(clippy::too_many_arguments)]
fn potential_rows<T: Real>(
    m: &Material<T>,
    k: Cx<T>,
    phi: Cx<T>,
    dphi: Cx<T>,
    d2phi: Cx<T>,
    psi: Cx<T>,
    dpsi: Cx<T>,
    d2psi: Cx<T>,
) -> [Cx<T>; 4] {
    let i = imag_unit::<T>();
    let two = T::lit(2.0);
    [
        d2phi * m.p_modulus() - k * k * phi * m.lambda + i * k * dpsi * (two * m.mu),
        (i * k * dphi * two - d2psi - k * k * psi) * m.mu,
        i * k * phi - dpsi,
        dphi + i * k * psi,
    ]
}

/// The raw 8×8 continuity matrix: rows 0..4 at `y = -d`, rows 4..8 at `y = +d`,
/// each `(σ_yy, σ_xy, u_x, u_y)`; half-space columns enter with a minus sign.
pub fn global_matrix<T: Real>(
    sys: &TriLayerSystem<T>,
    omega: T,
    k: Cx<T>,
    kinds: [PotentialKind; 4],
) -> (Mat<Cx<T>>, PartialWaveBasis<T>) {
    let basis = PartialWaveBasis::new(sys, omega, k, kinds);
    let i = imag_unit::<T>();
    let zero = Cx::new(T::zero(), T::zero());
    let one = Cx::new(T::one(), T::zero());
    let d = sys.half_thickness;
    let mut m = Mat::from_fn(8, 8, |_, _| zero);
    let (q, p) = (basis.guide_q, basis.guide_p);
    for (r0, y) in [(0, -d), (4, d)] {
        for (c, kappa, is_phi) in [(0, q, true), (1, -q, true), (2, p, false), (3, -p, false)] {
            let e = (i * kappa * y).exp();
            let v = [e, i * kappa * e, -(kappa * kappa) * e];
            let rows = if is_phi {
                potential_rows(&sys.guide, k, v[0], v[1], v[2], zero, zero, zero)
            } else {
                potential_rows(&sys.guide, k, zero, zero, zero, v[0], v[1], v[2])
            };
            for (r, val) in rows.into_iter().enumerate() {
                m[(r0 + r, c)] = val;
            }
        }
    }
    let [qa, pa, qb, pb] = basis.half_space;
    // side a decays/grows as e^{-i k_y (y + d)}, so d/dy brings -i k_y
    let cols = [
        (
            0,
            4,
            potential_rows(&sys.side_a, k, one, -i * qa, -(qa * qa), zero, zero, zero),
        ),
        (
            0,
            5,
            potential_rows(&sys.side_a, k, zero, zero, zero, one, -i * pa, -(pa * pa)),
        ),
        (
            4,
            6,
            potential_rows(&sys.side_b, k, one, i * qb, -(qb * qb), zero, zero, zero),
        ),
        (
            4,
            7,
            potential_rows(&sys.side_b, k, zero, zero, zero, one, i * pb, -(pb * pb)),
        ),
    ];
    for (r0, c, rows) in cols {
        for (r, val) in rows.into_iter().enumerate() {
            m[(r0 + r, c)] = -val;
        }
    }
    (m, basis)
}

/// Column and row scale factors that make the determinant dimensionless:
/// columns to unit max entry, then rows to unit Euclidean norm.
fn equilibration<T: Real>(m: &Mat<Cx<T>>) -> (Vec<T>, Vec<T>) {
    let nc = m.ncols();
    let nr = m.nrows();
    let col: Vec<T> = (0..nc)
        .map(|j| {
            let s = (0..nr).map(|i| m[(i, j)].norm()).fold(T::zero(), T::max);
            if s > T::zero() {
                T::one() / s
            } else {
                T::one()
            }
        })
        .collect();
    let row: Vec<T> = (0..nr)
        .map(|i| {
            let s = (0..nc)
                .map(|j| (m[(i, j)] * col[j]).norm_sqr())
                .fold(T::zero(), |a, b| a + b)
                .sqrt();
            if s > T::zero() {
                T::one() / s
            } else {
                T::one()
            }
        })
        .collect();
    (row, col)
}

fn scaled<T: Real>(m: &Mat<Cx<T>>, row: &[T], col: &[T]) -> Mat<Cx<T>> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * (row[i] * col[j]))
}

/// Determinant value with its branch-point flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Determinant<T> {
    pub value: Cx<T>,
    pub branch_point: bool,
}

/// Scaled characteristic determinant at `(ω, k_x)`. The matrix columns are
/// scaled to unit max entry and then the rows to unit norm, so `|D| ≤ 1`
/// and its size is comparable across frequencies.
pub fn characteristic_determinant<T: Real>(
    sys: &TriLayerSystem<T>,
    omega: T,
    k: Cx<T>,
    kinds: [PotentialKind; 4],
) -> Result<Determinant<T>> {
    check_omega(omega)?;
    let (m, basis) = global_matrix(sys, omega, k, kinds);
    let (row, col) = equilibration(&m);
    Ok(Determinant {
        value: scaled(&m, &row, &col).as_ref().determinant(),
        branch_point: basis.branch_point,
    })
}

fn check_omega<T: Real>(omega: T) -> Result<()> {
    if !(omega > T::zero()) || !omega.is_finite() {
        return Err(Error::InvalidGeometry(format!("omega must be positive, got {omega}")));
    }
    Ok(())
}

/// Partial-wave amplitudes at a root: the null vector of the continuity
/// matrix, scaled to unit largest entry.
pub fn amplitudes<T: Real>(
    sys: &TriLayerSystem<T>,
    omega: T,
    k: Cx<T>,
    kinds: [PotentialKind; 4],
) -> Result<[Cx<T>; 8]> {
    check_omega(omega)?;
    let (m, _) = global_matrix(sys, omega, k, kinds);
    let (row, col) = equilibration(&m);
    let svd = scaled(&m, &row, &col).svd().map_err(|e| Error::Solver {
        omega: omega.as_f64(),
        case: "oracle".into(),
        message: format!("svd failed: {e:?}"),
    })?;
    let s = svd.S();
    let v = svd.V();
    let mut best = 0;
    for j in 1..8 {
        if s[j].norm() < s[best].norm() {
            best = j;
        }
    }
    let mut a = [Cx::new(T::zero(), T::zero()); 8];
    for (j, slot) in a.iter_mut().enumerate() {
        *slot = v[(j, best)] * col[j];
    }
    crate::pep::normalize_max(&mut a);
    Ok(a)
}

/// Settings for [`refine_root`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefineOptions {
    /// Stop when `|Δk| / |k|` falls below this.
    pub tol: f64,
    pub max_iterations: usize,
    /// Relative finite-difference step for the derivative.
    pub fd_step: f64,
}

impl Default for RefineOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iterations: 50,
            fd_step: 1e-7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefinedRoot<T> {
    pub k_x: Cx<T>,
    pub iterations: usize,
    /// Scaled determinant at the seed.
    pub seed_determinant: T,
    /// Scaled determinant at the refined root.
    pub determinant: T,
    pub branch_point: bool,
}

/// Newton iteration on the determinant from `seed`, with a central
/// finite-difference derivative. Row and column scalings are frozen within
/// each step so the derivative is consistent with the function.
pub fn refine_root<T: Real>(
    sys: &TriLayerSystem<T>,
    omega: T,
    seed: Cx<T>,
    kinds: [PotentialKind; 4],
    opts: &RefineOptions,
) -> Result<RefinedRoot<T>> {
    check_omega(omega)?;
    let seed_determinant = characteristic_determinant(sys, omega, seed, kinds)?.value.norm();
    let mut k = seed;
    let mut last_step = f64::INFINITY;
    let two = T::lit(2.0);
    for it in 1..=opts.max_iterations {
        let (m, _) = global_matrix(sys, omega, k, kinds);
        let (row, col) = equilibration(&m);
        let f = |kk: Cx<T>| {
            let (mm, _) = global_matrix(sys, omega, kk, kinds);
            scaled(&mm, &row, &col).as_ref().determinant()
        };
        let h = Cx::new(T::lit(opts.fd_step) * k.norm(), T::zero());
        let deriv = (f(k + h) - f(k - h)) / (h * two);
        let step = f(k) / deriv;
        if !step.re.is_finite() || !step.im.is_finite() {
            return Err(Error::NoConvergence {
                iterations: it,
                last_step,
            });
        }
        k -= step;
        last_step = (step.norm() / k.norm()).as_f64();
        if !(k.re > T::zero()) {
            return Err(Error::NoConvergence {
                iterations: it,
                last_step,
            });
        }
        if last_step < opts.tol {
            let det = characteristic_determinant(sys, omega, k, kinds)?;
            return Ok(RefinedRoot {
                k_x: k,
                iterations: it,
                seed_determinant,
                determinant: det.value.norm(),
                branch_point: det.branch_point,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iterations,
        last_step,
    })
}

/// Potentials and displacements of the partial-wave field at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample<T> {
    pub phi: Cx<T>,
    pub psi: Cx<T>,
    pub u_x: Cx<T>,
    pub u_y: Cx<T>,
}

/// Guide field at (possibly complex) `y`.
pub fn guide_field<T: Real>(basis: &PartialWaveBasis<T>, amps: &[Cx<T>; 8], y: Cx<T>) -> FieldSample<T> {
    let i = imag_unit::<T>();
    let k = basis.k_x;
    let (q, p) = (basis.guide_q, basis.guide_p);
    let ep = (i * q * y).exp();
    let em = (-i * q * y).exp();
    let sp = (i * p * y).exp();
    let sm = (-i * p * y).exp();
    let phi = amps[0] * ep + amps[1] * em;
    let dphi = i * q * (amps[0] * ep - amps[1] * em);
    let psi = amps[2] * sp + amps[3] * sm;
    let dpsi = i * p * (amps[2] * sp - amps[3] * sm);
    FieldSample {
        phi,
        psi,
        u_x: i * k * phi - dpsi,
        u_y: dphi + i * k * psi,
    }
}

/// Half-space field at complex distance `depth` from the interface along
/// the outward direction.
pub fn half_space_field<T: Real>(
    basis: &PartialWaveBasis<T>,
    amps: &[Cx<T>; 8],
    side: Side,
    depth: Cx<T>,
) -> FieldSample<T> {
    let i = imag_unit::<T>();
    let k = basis.k_x;
    let (q, p, a_phi, a_psi, sign) = match side {
        Side::A => (basis.half_space[0], basis.half_space[1], amps[4], amps[5], -T::one()),
        Side::B => (basis.half_space[2], basis.half_space[3], amps[6], amps[7], T::one()),
    };
    let phi = a_phi * (i * q * depth).exp();
    let psi = a_psi * (i * p * depth).exp();
    // d/dy = sign · d/d(depth)
    let dphi = i * q * phi * sign;
    let dpsi = i * p * psi * sign;
    FieldSample {
        phi,
        psi,
        u_x: i * k * phi - dpsi,
        u_y: dphi + i * k * psi,
    }
}

/// Samples the partial-wave field on the collocation grids in eigenvector
/// layout. The potentials are continued analytically onto the complex map
/// paths; points at infinity get zero.
pub fn sample_on_grids<T: Real>(
    sys: &TriLayerSystem<T>,
    omega: T,
    k: Cx<T>,
    kinds: [PotentialKind; 4],
    amps: &[Cx<T>; 8],
    disc: &Discretization<T>,
) -> Vec<Cx<T>> {
    let basis = PartialWaveBasis::new(sys, omega, k, kinds);
    let n = disc.n;
    let mut v = vec![Cx::new(T::zero(), T::zero()); 6 * n];
    for i in 0..n {
        let g = guide_field(&basis, amps, disc.guide.y[i]);
        v[Field::Ux.offset(n) + i] = g.u_x;
        v[Field::Uy.offset(n) + i] = g.u_y;
    }
    for side in Side::BOTH {
        for (field, grid, take_phi) in [
            (Field::phi(side), disc.phi(side), true),
            (Field::psi(side), disc.psi(side), false),
        ] {
            for i in 0..n {
                if grid.infinity_index == Some(i) {
                    continue;
                }
                let s = half_space_field(&basis, amps, side, grid.depth[i]);
                v[field.offset(n) + i] = if take_phi { s.phi } else { s.psi };
            }
        }
    }
    v
}

/// Symmetry class of free-plate Lamb modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LambSymmetry {
    S,
    A,
}

/// `cos(x h)` and `sin(x h)/x` for `x = sqrt(x_sq)`, continued to
/// `cosh`/`sinh` for negative `x_sq`.
fn cos_sinc<T: Real>(x_sq: T, h: T) -> (T, T) {
    if x_sq >= T::zero() {
        let x = x_sq.sqrt();
        let s = if x * h < T::lit(1e-8) { h } else { (x * h).sin() / x };
        ((x * h).cos(), s)
    } else {
        let x = (-x_sq).sqrt();
        let s = if x * h < T::lit(1e-8) { h } else { (x * h).sinh() / x };
        ((x * h).cosh(), s)
    }
}

/// Real-valued Rayleigh–Lamb characteristic function for a free plate of
/// half-thickness `h`. It has no poles, so sign changes bracket roots.
pub fn rayleigh_lamb_function<T: Real>(guide: &Material<T>, h: T, omega: T, k: T, sym: LambSymmetry) -> T {
    let k2 = k * k;
    let p2 = omega * omega / (guide.c_l * guide.c_l) - k2;
    let q2 = omega * omega / (guide.c_t * guide.c_t) - k2;
    let (cp, sp) = cos_sinc(p2, h);
    let (cq, sq) = cos_sinc(q2, h);
    let b = (q2 - k2) * (q2 - k2);
    let four = T::lit(4.0);
    match sym {
        LambSymmetry::S => b * cp * sq + four * k2 * p2 * sp * cq,
        LambSymmetry::A => b * sp * cq + four * k2 * q2 * cp * sq,
    }
}

/// Real free-plate wavenumbers at `omega`, ascending, from a scan of
/// `k ∈ (0, max(3ω/c_t, 40/h)]` with bisection to `1e-10` relative.
pub fn rayleigh_lamb_roots<T: Real>(guide: &Material<T>, h: T, omega: T, sym: LambSymmetry) -> Vec<T> {
    if !(omega > T::zero()) {
        return Vec::new();
    }
    let k_max = (T::lit(3.0) * omega / guide.c_t).max(T::lit(40.0) / h);
    let steps = 20_000;
    let f = |k: T| rayleigh_lamb_function(guide, h, omega, k, sym);
    let mut roots = Vec::new();
    let mut k0 = k_max * T::lit(1e-6);
    let mut f0 = f(k0);
    for s in 1..=steps {
        let k1 = k_max * T::lit(s as f64 / steps as f64);
        let f1 = f(k1);
        if f0 == T::zero() {
            roots.push(k0);
        } else if f0 * f1 < T::zero() {
            let (mut a, mut b, mut fa) = (k0, k1, f0);
            while (b - a) > T::lit(1e-10) * b {
                let mid = (a + b) * T::lit(0.5);
                let fm = f(mid);
                if fm == T::zero() {
                    a = mid;
                    b = mid;
                    break;
                }
                if fa * fm < T::zero() {
                    b = mid;
                } else {
                    a = mid;
                    fa = fm;
                }
            }
            roots.push((a + b) * T::lit(0.5));
        }
        k0 = k1;
        f0 = f1;
    }
    roots
}
