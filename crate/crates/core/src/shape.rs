//! Physical mode shapes on real coordinates.
//!
//! Inside the guide the collocation values are interpolated directly. In the
//! half-spaces the numerical solution lives on a complex path, so the
//! physical field is rebuilt from the interface values of the potentials:
//! a single outgoing partial wave `φ(±d) e^{i k_y |y ∓ d|}` per potential,
//! which grows with distance for leaky waves.

use serde::{Deserialize, Serialize};

use crate::assembly::{Field, PotentialKind, RadiationCase};
use crate::error::{Error, Result};
use crate::materials::{Side, TriLayerSystem};
use crate::modes::half_space_wavenumbers;
use crate::scalar::{imag_unit, Cx, Real};
use crate::spectral::LobattoInterpolant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Wave {
    Longitudinal,
    Shear,
}

/// Envelope behaviour of one half-space potential.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrowthFlag {
    pub side: Side,
    pub wave: Wave,
    pub kind: PotentialKind,
    /// The envelope grows with distance from the interface.
    pub growing: bool,
}

/// Displacements and potentials along real `y` in one half-space.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct HalfSpaceProfile<T> {
    pub y: Vec<T>,
    pub u_x: Vec<Cx<T>>,
    pub u_y: Vec<Cx<T>>,
    pub phi: Vec<Cx<T>>,
    pub psi: Vec<Cx<T>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeShape<T> {
    pub k_x: Cx<T>,
    pub omega: T,
    pub y_guide: Vec<T>,
    pub u_x: Vec<Cx<T>>,
    pub u_y: Vec<Cx<T>>,
    pub side_a: HalfSpaceProfile<T>,
    pub side_b: HalfSpaceProfile<T>,
    pub growth_flags: [GrowthFlag; 4],
    pub branch_point: bool,
    /// Largest jump of `(u_x, u_y)` between guide and half-space at `y = ±d`,
    /// relative to the largest guide displacement.
    pub continuity_mismatch: T,
}

/// Rebuilds the physical mode shape of eigenvector `vector` at `(ω, k_x)`.
///
/// `samples` points are placed uniformly across the guide and across
/// `y_extent` mm into each half-space. Everything is scaled so the largest
/// guide displacement component is one.
#[allow(clippy::too_many_arguments)]
pub fn mode_shape<T: Real>(
    vector: &[Cx<T>],
    k: Cx<T>,
    omega: T,
    sys: &TriLayerSystem<T>,
    case: &RadiationCase<T>,
    n: usize,
    y_extent: T,
    samples: usize,
) -> Result<ModeShape<T>> {
    if !(y_extent > T::zero()) {
        return Err(Error::InvalidGeometry(format!(
            "y_extent must be positive, got {y_extent}"
        )));
    }
    if vector.len() != 6 * n {
        return Err(Error::Assembly(format!(
            "eigenvector has {} entries, expected {}",
            vector.len(),
            6 * n
        )));
    }
    let samples = samples.max(2);
    let d = sys.half_thickness;
    let block = |f: Field| &vector[f.offset(n)..f.offset(n) + n];
    let ux = block(Field::Ux);
    let uy = block(Field::Uy);
    let scale = ux.iter().chain(uy).fold(Cx::new(T::zero(), T::zero()), |best, z| {
        if z.norm() > best.norm() {
            *z
        } else {
            best
        }
    });
    if !(scale.norm() > T::zero()) {
        return Err(Error::Assembly("eigenvector has no guide displacement".into()));
    }
    let unit = |z: Cx<T>| z / scale;

    let interp = LobattoInterpolant::new(n);
    let last = T::lit((samples - 1) as f64);
    let y_guide: Vec<T> = (0..samples).map(|i| -d + (d + d) * T::lit(i as f64) / last).collect();
    let u_x: Vec<Cx<T>> = y_guide.iter().map(|&y| unit(interp.eval(ux, y / d))).collect();
    let u_y: Vec<Cx<T>> = y_guide.iter().map(|&y| unit(interp.eval(uy, y / d))).collect();

    let kinds = case.branch_kinds();
    let (wn, branch_point) = half_space_wavenumbers(sys, omega, k, kinds);
    let i = imag_unit::<T>();
    let mut flags = Vec::with_capacity(4);
    let mut profiles = Vec::with_capacity(2);
    let mut mismatch = T::zero();
    for side in Side::BOTH {
        let (q, p, sign, kl, kt) = match side {
            Side::A => (wn[0], wn[1], -T::one(), kinds[0], kinds[1]),
            Side::B => (wn[2], wn[3], T::one(), kinds[2], kinds[3]),
        };
        let hi = match side {
            Side::A => n - 1,
            Side::B => 0,
        };
        let phi0 = unit(block(Field::phi(side))[hi]);
        let psi0 = unit(block(Field::psi(side))[hi]);
        let mut prof = HalfSpaceProfile::default();
        for s in 0..samples {
            let depth = y_extent * T::lit(s as f64) / last;
            let y = sign * (d + depth);
            let dc = Cx::new(depth, T::zero());
            let phi = phi0 * (i * q * dc).exp();
            let psi = psi0 * (i * p * dc).exp();
            let dphi = i * q * phi * sign;
            let dpsi = i * p * psi * sign;
            prof.y.push(y);
            prof.phi.push(phi);
            prof.psi.push(psi);
            prof.u_x.push(i * k * phi - dpsi);
            prof.u_y.push(dphi + i * k * psi);
        }
        let (gx, gy) = match side {
            Side::A => (u_x[0], u_y[0]),
            Side::B => (u_x[samples - 1], u_y[samples - 1]),
        };
        mismatch = mismatch.max((prof.u_x[0] - gx).norm()).max((prof.u_y[0] - gy).norm());
        flags.push(GrowthFlag {
            side,
            wave: Wave::Longitudinal,
            kind: kl,
            growing: q.im < T::zero(),
        });
        flags.push(GrowthFlag {
            side,
            wave: Wave::Shear,
            kind: kt,
            growing: p.im < T::zero(),
        });
        profiles.push(prof);
    }
    let side_b = profiles.pop().expect("two sides");
    let side_a = profiles.pop().expect("two sides");
    Ok(ModeShape {
        k_x: k,
        omega,
        y_guide,
        u_x,
        u_y,
        side_a,
        side_b,
        growth_flags: [flags[0], flags[1], flags[2], flags[3]],
        branch_point,
        continuity_mismatch: mismatch,
    })
}

/// Parity of `u_y` about `y = 0` on a profile sampled symmetrically:
/// `(even_defect, odd_defect)`, each relative to the largest `|u_y|`.
pub fn u_y_parity<T: Real>(u_y: &[Cx<T>]) -> (T, T) {
    let m = u_y.len();
    let peak = u_y.iter().map(|z| z.norm()).fold(T::zero(), T::max);
    if !(peak > T::zero()) {
        return (T::zero(), T::zero());
    }
    let mut even = T::zero();
    let mut odd = T::zero();
    for i in 0..m {
        let a = u_y[i];
        let b = u_y[m - 1 - i];
        even = even.max((a - b).norm());
        odd = odd.max((a + b).norm());
    }
    (even / peak, odd / peak)
}
