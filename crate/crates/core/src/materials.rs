//! Isotropic elastic media and the plate-between-half-spaces geometry.
//!
//! Units are fixed throughout the crate: lengths in mm, time in µs, mass in
//! mg. Densities are therefore in g/cm³, wavespeeds in mm/µs (= km/s), moduli
//! in GPa, angular frequency in rad/µs and wavenumbers in rad/mm.

use crate::error::{Error, Result};
use crate::scalar::{Cx, Real};

/// Isotropic linear-elastic medium.
#[derive(Debug, Clone, PartialEq)]
pub struct Material<T> {
    pub name: String,
    /// Density in g/cm³.
    pub rho: T,
    /// Longitudinal wavespeed in mm/µs.
    pub c_l: T,
    /// Transverse wavespeed in mm/µs.
    pub c_t: T,
    /// Lamé λ in GPa.
    pub lambda: T,
    /// Lamé μ (shear modulus) in GPa.
    pub mu: T,
}

/// Returns `(λ, μ)` in GPa for density and bulk wavespeeds.
pub fn lame_from_speeds<T: Real>(rho: T, c_l: T, c_t: T) -> Result<(T, T)> {
    check_speeds(rho, c_l, c_t)?;
    let mu = rho * c_t * c_t;
    let lambda = rho * c_l * c_l - mu - mu;
    Ok((lambda, mu))
}

/// Inverse of [`lame_from_speeds`]: returns `(c_l, c_t)`.
pub fn speeds_from_lame<T: Real>(rho: T, lambda: T, mu: T) -> Result<(T, T)> {
    if !(rho > T::zero()) || !(mu > T::zero()) {
        return Err(Error::InvalidMaterial(format!(
            "density and shear modulus must be positive (rho = {rho}, mu = {mu})"
        )));
    }
    let p_modulus = lambda + mu + mu;
    if !(p_modulus > mu) {
        return Err(Error::InvalidMaterial(format!(
            "lambda + 2 mu must exceed mu (lambda = {lambda}, mu = {mu})"
        )));
    }
    Ok(((p_modulus / rho).sqrt(), (mu / rho).sqrt()))
}

fn check_speeds<T: Real>(rho: T, c_l: T, c_t: T) -> Result<()> {
    if !(rho > T::zero() && c_l > T::zero() && c_t > T::zero()) {
        return Err(Error::InvalidMaterial(format!(
            "density and wavespeeds must be positive (rho = {rho}, c_l = {c_l}, c_t = {c_t})"
        )));
    }
    if !(c_l > c_t) {
        return Err(Error::InvalidMaterial(format!(
            "longitudinal speed must exceed transverse speed (c_l = {c_l}, c_t = {c_t})"
        )));
    }
    Ok(())
}

impl<T: Real> Material<T> {
    pub fn from_speeds(name: impl Into<String>, rho: T, c_l: T, c_t: T) -> Result<Self> {
        let (lambda, mu) = lame_from_speeds(rho, c_l, c_t)?;
        Ok(Self {
            name: name.into(),
            rho,
            c_l,
            c_t,
            lambda,
            mu,
        })
    }

    pub fn from_lame(name: impl Into<String>, rho: T, lambda: T, mu: T) -> Result<Self> {
        let (c_l, c_t) = speeds_from_lame(rho, lambda, mu)?;
        Ok(Self {
            name: name.into(),
            rho,
            c_l,
            c_t,
            lambda,
            mu,
        })
    }

    /// Epoxy adhesive: ρ = 1.17 g/cm³, c_l = 2.61 mm/µs, c_t = 1.1 mm/µs.
    pub fn epoxy() -> Self {
        Self::from_speeds("epoxy", T::lit(1.17), T::lit(2.61), T::lit(1.1)).expect("preset is valid")
    }

    /// Aluminium alloy: ρ = 2.82 g/cm³, c_l = 6.33 mm/µs, c_t = 3.12 mm/µs.
    pub fn aluminium() -> Self {
        Self::from_speeds("aluminium", T::lit(2.82), T::lit(6.33), T::lit(3.12)).expect("preset is valid")
    }

    /// Built-in material presets, looked up by name.
    pub fn preset(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "epoxy" => Some(Self::epoxy()),
            "aluminium" | "aluminum" => Some(Self::aluminium()),
            _ => None,
        }
    }

    /// Names accepted by [`Material::preset`].
    pub fn preset_names() -> &'static [&'static str] {
        &["epoxy", "aluminium"]
    }

    /// P-wave modulus λ + 2μ.
    #[inline]
    pub fn p_modulus(&self) -> T {
        self.lambda + self.mu + self.mu
    }

    pub fn poisson_ratio(&self) -> T {
        self.lambda / (T::lit(2.0) * (self.lambda + self.mu))
    }

    /// Re-checks the invariants. With `require_nonnegative_poisson` the
    /// material must also satisfy λ ≥ 0.
    pub fn validate(&self, require_nonnegative_poisson: bool) -> Result<()> {
        check_speeds(self.rho, self.c_l, self.c_t)?;
        if require_nonnegative_poisson && self.lambda < T::zero() {
            return Err(Error::InvalidMaterial(format!(
                "{}: negative Poisson ratio (lambda = {})",
                self.name, self.lambda
            )));
        }
        Ok(())
    }

    /// Bulk wavenumbers `(k_l, k_t)` at angular frequency `omega`.
    pub fn bulk_wavenumbers(&self, omega: T) -> (T, T) {
        (omega / self.c_l, omega / self.c_t)
    }

    /// Copy with a different density and the same wavespeeds.
    pub fn with_density(&self, rho: T) -> Result<Self> {
        Self::from_speeds(self.name.clone(), rho, self.c_l, self.c_t)
    }
}

/// `k_bulk² − k_x²`; no branch is chosen here.
#[inline]
pub fn transverse_wavenumber_sq<T: Real>(k_bulk: T, k_x: Cx<T>) -> Cx<T> {
    Cx::new(k_bulk * k_bulk, T::zero()) - k_x * k_x
}

/// Which half-space a quantity belongs to. `A` occupies y ≤ −d, `B` y ≥ d.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Side {
    A,
    B,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::A, Side::B];

    pub fn label(self) -> &'static str {
        match self {
            Side::A => "a",
            Side::B => "b",
        }
    }
}

/// A guide plate of thickness 2d bonded between two half-spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct TriLayerSystem<T> {
    pub side_a: Material<T>,
    pub guide: Material<T>,
    pub side_b: Material<T>,
    /// Half-thickness d of the guide in mm.
    pub half_thickness: T,
}

impl<T: Real> TriLayerSystem<T> {
    pub fn new(side_a: Material<T>, guide: Material<T>, side_b: Material<T>, half_thickness: T) -> Result<Self> {
        if !(half_thickness > T::zero()) || !half_thickness.is_finite() {
            return Err(Error::InvalidGeometry(format!(
                "half thickness must be positive, got {half_thickness}"
            )));
        }
        Ok(Self {
            side_a,
            guide,
            side_b,
            half_thickness,
        })
    }

    /// Epoxy layer (d = 0.5 mm) between two aluminium half-spaces.
    pub fn epoxy_aluminium() -> Self {
        Self::new(
            Material::aluminium(),
            Material::epoxy(),
            Material::aluminium(),
            T::lit(0.5),
        )
        .expect("preset is valid")
    }

    pub fn thickness(&self) -> T {
        self.half_thickness + self.half_thickness
    }

    pub fn side(&self, side: Side) -> &Material<T> {
        match side {
            Side::A => &self.side_a,
            Side::B => &self.side_b,
        }
    }

    /// Same system with the half-spaces exchanged (mirror about y = 0).
    pub fn swapped(&self) -> Self {
        Self {
            side_a: self.side_b.clone(),
            guide: self.guide.clone(),
            side_b: self.side_a.clone(),
            half_thickness: self.half_thickness,
        }
    }

    /// Bulk wavenumbers `ω/c` of all three media, longitudinal and shear.
    pub fn bulk_wavenumbers(&self, omega: T) -> [T; 6] {
        let (a_l, a_t) = self.side_a.bulk_wavenumbers(omega);
        let (g_l, g_t) = self.guide.bulk_wavenumbers(omega);
        let (b_l, b_t) = self.side_b.bulk_wavenumbers(omega);
        [a_l, a_t, g_l, g_t, b_l, b_t]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn epoxy_lame_constants() {
        let (lambda, mu) = lame_from_speeds(1.17, 2.61, 1.1).unwrap();
        assert_relative_eq!(mu, 1.17 * 1.21, max_relative = 1e-15);
        assert_relative_eq!(lambda, 1.17 * (2.61 * 2.61 - 2.0 * 1.21), max_relative = 1e-14);
        assert_relative_eq!(mu, 1.4157, epsilon = 1e-12);
        assert_relative_eq!(lambda, 5.138757, epsilon = 1e-12);
    }

    #[test]
    fn unit_lame_constants() {
        let (lambda, mu) = lame_from_speeds(1.0, 3f64.sqrt(), 1.0).unwrap();
        assert_relative_eq!(mu, 1.0);
        assert_relative_eq!(lambda, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn aluminium_lame_constants() {
        let al = Material::<f64>::aluminium();
        assert_relative_eq!(al.mu, 2.82 * 3.12 * 3.12, max_relative = 1e-15);
        assert_relative_eq!(al.mu, 27.451008, epsilon = 1e-10);
        assert_relative_eq!(al.lambda, 58.092282, epsilon = 1e-10);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(
            lame_from_speeds(0.0, 2.0, 1.0),
            Err(Error::InvalidMaterial(_))
        ));
        assert!(matches!(
            lame_from_speeds(1.0, -2.0, 1.0),
            Err(Error::InvalidMaterial(_))
        ));
        assert!(matches!(
            lame_from_speeds(1.0, 1.0, 1.0),
            Err(Error::InvalidMaterial(_))
        ));
        assert!(matches!(
            lame_from_speeds(1.0, 1.0, 1.2),
            Err(Error::InvalidMaterial(_))
        ));
    }

    #[test]
    fn negative_poisson_only_rejected_when_strict() {
        // c_l² < 2 c_t² gives λ < 0
        let m = Material::from_speeds("auxetic", 1.0, 1.2, 1.0).unwrap();
        assert!(m.lambda < 0.0);
        assert!(m.validate(false).is_ok());
        assert!(m.validate(true).is_err());
    }

    #[test]
    fn bulk_wavenumbers() {
        let al = Material::<f64>::aluminium();
        let (k_l, k_t) = al.bulk_wavenumbers(6.33);
        assert_relative_eq!(k_l, 1.0, max_relative = 1e-15);
        assert!(k_t >= k_l);
        assert_eq!(al.bulk_wavenumbers(0.0), (0.0, 0.0));

        let ep = Material::<f64>::epoxy();
        let (k_l, k_t) = ep.bulk_wavenumbers(2.0 * std::f64::consts::PI * 1.03);
        assert_relative_eq!(k_l, 2.479_571_213, epsilon = 1e-9);
        assert_relative_eq!(k_t, 5.883_346_242, epsilon = 1e-9);
    }

    #[test]
    fn transverse_wavenumber_examples() {
        assert_eq!(transverse_wavenumber_sq(2.0, Cx::new(2.0, 0.0)), Cx::new(0.0, 0.0));
        assert_eq!(transverse_wavenumber_sq(0.0, Cx::new(0.0, 1.0)), Cx::new(1.0, 0.0));
        let v = transverse_wavenumber_sq(1.0, Cx::new(0.6, 0.1));
        assert_relative_eq!(v.re, 0.65, epsilon = 1e-15);
        assert_relative_eq!(v.im, -0.12, epsilon = 1e-15);
    }

    #[test]
    fn geometry_checks() {
        let ep = Material::<f64>::epoxy();
        let al = Material::<f64>::aluminium();
        assert!(TriLayerSystem::new(al.clone(), ep.clone(), al.clone(), 0.0).is_err());
        let sys = TriLayerSystem::new(al.clone(), ep, al, 0.5).unwrap();
        assert_eq!(sys.thickness(), 1.0);
    }

    #[test]
    fn f32_presets() {
        let ep = Material::<f32>::epoxy();
        assert!((ep.mu - 1.4157).abs() < 1e-5);
    }

    proptest! {
        #[test]
        fn lame_round_trip(rho in 0.1f64..20.0, c_t in 0.1f64..8.0, ratio in 1.01f64..4.0) {
            let c_l = c_t * ratio;
            let (lambda, mu) = lame_from_speeds(rho, c_l, c_t).unwrap();
            let (cl2, ct2) = speeds_from_lame(rho, lambda, mu).unwrap();
            prop_assert!(((cl2 - c_l) / c_l).abs() < 1e-12);
            prop_assert!(((ct2 - c_t) / c_t).abs() < 1e-12);
            // μ/ρ = c_t² to rounding
            prop_assert!(((mu / rho) - c_t * c_t).abs() <= 4.0 * f64::EPSILON * c_t * c_t);
        }
    }
}
