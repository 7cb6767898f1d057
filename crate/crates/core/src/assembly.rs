//! Radiation cases and assembly of the quadratic eigenvalue problem
//! `(k_x² L2 + k_x L1 + L0) u = 0`.
//!
//! Unknowns are stacked as six blocks of `n` collocation values:
//! `(φ_a, ψ_a, u_x, u_y, φ_b, ψ_b)`. The guide carries displacements, the
//! half-spaces carry the Helmholtz potentials. Interior rows hold the
//! equations of motion; one row per block at each interface is overwritten
//! with a traction or displacement continuity condition.

use std::fmt;

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::materials::{Material, Side, TriLayerSystem};
use crate::scalar::{imag_unit, re, Cx, Real};
use crate::spectral::{map_guide, map_half_space, MappedGrid, ReferenceGrid};

/// Behaviour of one partial wave in a half-space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PotentialKind {
    /// Decays away from the interface.
    Evanescent,
    /// Outgoing and growing away from the interface; discretised on a complex path.
    Leaky,
}

impl PotentialKind {
    pub fn is_leaky(self) -> bool {
        self == PotentialKind::Leaky
    }
}

/// Radiation class of one half-space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RadiationClass {
    NonRadiating,
    ShearLeaky,
    FullyLeaky,
}

impl RadiationClass {
    pub fn label(self) -> &'static str {
        match self {
            RadiationClass::NonRadiating => "non-radiating",
            RadiationClass::ShearLeaky => "shear-leaky",
            RadiationClass::FullyLeaky => "fully-leaky",
        }
    }
}

/// Longitudinal and shear behaviour in one half-space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SideRadiation {
    pub longitudinal: PotentialKind,
    pub shear: PotentialKind,
}

impl SideRadiation {
    /// A leaky longitudinal wave without a leaky shear wave is impossible
    /// since `c_l > c_t` in every medium.
    pub fn new(longitudinal: PotentialKind, shear: PotentialKind) -> Result<Self> {
        if longitudinal.is_leaky() && !shear.is_leaky() {
            return Err(Error::Assembly(
                "a leaky longitudinal wave requires a leaky shear wave on the same side".into(),
            ));
        }
        Ok(Self { longitudinal, shear })
    }

    pub fn class(self) -> RadiationClass {
        match (self.longitudinal, self.shear) {
            (PotentialKind::Evanescent, PotentialKind::Evanescent) => RadiationClass::NonRadiating,
            (PotentialKind::Evanescent, PotentialKind::Leaky) => RadiationClass::ShearLeaky,
            _ => RadiationClass::FullyLeaky,
        }
    }
}

/// Map parameters `(ζ_φ, ζ_ψ)` for one half-space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZetaPair<T> {
    pub phi: Cx<T>,
    pub psi: Cx<T>,
}

/// Map parameters per half-space radiation class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZetaTable<T> {
    pub non_radiating: ZetaPair<T>,
    pub shear_leaky: ZetaPair<T>,
    pub fully_leaky: ZetaPair<T>,
}

impl<T: Real> Default for ZetaTable<T> {
    /// (10, 10) non-radiating, (10, 10i) shear leaky, (10i, 10i) fully leaky, in mm.
    fn default() -> Self {
        let real = Cx::new(T::lit(10.0), T::zero());
        let imag = Cx::new(T::zero(), T::lit(10.0));
        Self {
            non_radiating: ZetaPair { phi: real, psi: real },
            shear_leaky: ZetaPair { phi: real, psi: imag },
            fully_leaky: ZetaPair { phi: imag, psi: imag },
        }
    }
}

impl<T: Real> ZetaTable<T> {
    pub fn for_class(&self, class: RadiationClass) -> ZetaPair<T> {
        match class {
            RadiationClass::NonRadiating => self.non_radiating,
            RadiationClass::ShearLeaky => self.shear_leaky,
            RadiationClass::FullyLeaky => self.fully_leaky,
        }
    }
}

/// One phase-velocity interval with a fixed leaky/evanescent assignment of
/// every half-space partial wave.
#[derive(Debug, Clone, PartialEq)]
pub struct RadiationCase<T> {
    pub index: usize,
    pub side_a: SideRadiation,
    pub side_b: SideRadiation,
    /// Lower phase-velocity bound in mm/µs.
    pub c_min: T,
    /// Upper phase-velocity bound in mm/µs; `+∞` for the last case.
    pub c_max: T,
    pub zeta_a: ZetaPair<T>,
    pub zeta_b: ZetaPair<T>,
}

impl<T: Real> RadiationCase<T> {
    pub fn side(&self, side: Side) -> SideRadiation {
        match side {
            Side::A => self.side_a,
            Side::B => self.side_b,
        }
    }

    pub fn zeta(&self, side: Side) -> ZetaPair<T> {
        match side {
            Side::A => self.zeta_a,
            Side::B => self.zeta_b,
        }
    }

    /// Branch kinds in the order (a long, a shear, b long, b shear).
    pub fn branch_kinds(&self) -> [PotentialKind; 4] {
        [
            self.side_a.longitudinal,
            self.side_a.shear,
            self.side_b.longitudinal,
            self.side_b.shear,
        ]
    }

    pub fn any_leaky(&self) -> bool {
        self.branch_kinds().iter().any(|k| k.is_leaky())
    }

    /// Whether `c` lies in `[c_min, c_max]` widened by `rel_tol`.
    pub fn contains_phase_velocity(&self, c: T, rel_tol: T) -> bool {
        let one = T::one();
        c >= self.c_min * (one - rel_tol) && (self.c_max.is_infinite() || c <= self.c_max * (one + rel_tol))
    }

    /// Short human-readable name such as `shear-leaky` or
    /// `a:non-radiating/b:shear-leaky`.
    pub fn label(&self) -> String {
        let (a, b) = (self.side_a.class(), self.side_b.class());
        if a == b {
            a.label().to_string()
        } else {
            format!("a:{}/b:{}", a.label(), b.label())
        }
    }
}

impl<T: Real> fmt::Display for RadiationCase<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{} {} [{}, {}]", self.index, self.label(), self.c_min, self.c_max)
    }
}

/// Splits the phase-velocity axis at the distinct bulk wavespeeds of the two
/// half-spaces. A partial wave is leaky in every interval above its own
/// bulk speed.
pub fn enumerate_cases<T: Real>(sys: &TriLayerSystem<T>, zetas: &ZetaTable<T>) -> Vec<RadiationCase<T>> {
    let mut speeds = vec![sys.side_a.c_t, sys.side_a.c_l, sys.side_b.c_t, sys.side_b.c_l];
    speeds.sort_by(|a, b| a.partial_cmp(b).expect("finite wavespeeds"));
    let same = |a: T, b: T| (a - b).abs() <= T::lit(1e-12) * a.abs().max(b.abs());
    speeds.dedup_by(|a, b| same(*a, *b));

    let mut bounds = vec![T::zero()];
    bounds.extend(speeds.iter().copied());
    bounds.push(T::infinity());

    let kind = |lower: T, bulk: T| {
        if lower >= bulk || same(lower, bulk) {
            PotentialKind::Leaky
        } else {
            PotentialKind::Evanescent
        }
    };
    bounds
        .windows(2)
        .enumerate()
        .map(|(index, w)| {
            let (lo, hi) = (w[0], w[1]);
            let side = |m: &Material<T>| SideRadiation {
                longitudinal: kind(lo, m.c_l),
                shear: kind(lo, m.c_t),
            };
            let side_a = side(&sys.side_a);
            let side_b = side(&sys.side_b);
            RadiationCase {
                index,
                side_a,
                side_b,
                c_min: lo,
                c_max: hi,
                zeta_a: zetas.for_class(side_a.class()),
                zeta_b: zetas.for_class(side_b.class()),
            }
        })
        .collect()
}

/// Field blocks of the eigenvector, in storage order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Field {
    PhiA,
    PsiA,
    Ux,
    Uy,
    PhiB,
    PsiB,
}

impl Field {
    pub const ALL: [Field; 6] = [Field::PhiA, Field::PsiA, Field::Ux, Field::Uy, Field::PhiB, Field::PsiB];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    #[inline]
    pub fn offset(self, n: usize) -> usize {
        self.index() * n
    }

    pub fn phi(side: Side) -> Field {
        match side {
            Side::A => Field::PhiA,
            Side::B => Field::PhiB,
        }
    }

    pub fn psi(side: Side) -> Field {
        match side {
            Side::A => Field::PsiA,
            Side::B => Field::PsiB,
        }
    }
}

/// Continuity condition written into a replaced row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InterfaceCondition {
    NormalStress,
    ShearStress,
    TangentialDisplacement,
    NormalDisplacement,
}

impl InterfaceCondition {
    pub const ALL: [InterfaceCondition; 4] = [
        InterfaceCondition::NormalStress,
        InterfaceCondition::ShearStress,
        InterfaceCondition::TangentialDisplacement,
        InterfaceCondition::NormalDisplacement,
    ];
}

/// The five mapped grids used for one radiation case.
#[derive(Debug, Clone)]
pub struct Discretization<T> {
    pub n: usize,
    pub guide: MappedGrid<T>,
    pub phi_a: MappedGrid<T>,
    pub psi_a: MappedGrid<T>,
    pub phi_b: MappedGrid<T>,
    pub psi_b: MappedGrid<T>,
}

impl<T: Real> Discretization<T> {
    pub fn new(sys: &TriLayerSystem<T>, case: &RadiationCase<T>, n: usize) -> Result<Self> {
        let grid = ReferenceGrid::new(n)?;
        let d = sys.half_thickness;
        Ok(Self {
            n,
            guide: map_guide(&grid, d)?,
            phi_a: map_half_space(&grid, Side::A, d, case.zeta_a.phi)?,
            psi_a: map_half_space(&grid, Side::A, d, case.zeta_a.psi)?,
            phi_b: map_half_space(&grid, Side::B, d, case.zeta_b.phi)?,
            psi_b: map_half_space(&grid, Side::B, d, case.zeta_b.psi)?,
        })
    }

    pub fn phi(&self, side: Side) -> &MappedGrid<T> {
        match side {
            Side::A => &self.phi_a,
            Side::B => &self.phi_b,
        }
    }

    pub fn psi(&self, side: Side) -> &MappedGrid<T> {
        match side {
            Side::A => &self.psi_a,
            Side::B => &self.psi_b,
        }
    }

    /// Guide collocation index lying on the interface with `side`.
    pub fn guide_interface(&self, side: Side) -> usize {
        match side {
            Side::A => 0,
            Side::B => self.n - 1,
        }
    }

    fn check(&self) -> Result<()> {
        let grids = [&self.guide, &self.phi_a, &self.psi_a, &self.phi_b, &self.psi_b];
        if grids.iter().any(|g| g.n_points() != self.n || g.d1.nrows() != self.n) {
            return Err(Error::Assembly(format!(
                "inconsistent grid sizes: expected {} points on every grid",
                self.n
            )));
        }
        Ok(())
    }
}

/// Coefficient matrices of the quadratic eigenvalue problem.
#[derive(Debug, Clone)]
pub struct PepMatrices<T> {
    pub l0: Mat<Cx<T>>,
    pub l1: Mat<Cx<T>>,
    pub l2: Mat<Cx<T>>,
    /// Points per field block.
    pub n: usize,
    pub omega: T,
    pub case_label: String,
    /// Rows overwritten with continuity conditions.
    pub replaced_rows: Vec<(usize, Side, InterfaceCondition)>,
    /// Row scale factors applied by [`PepMatrices::equilibrate`], if any.
    pub row_scale: Option<Vec<T>>,
}

impl<T: Real> PepMatrices<T> {
    pub fn dim(&self) -> usize {
        self.l0.nrows()
    }

    /// Evaluates `Q(k) = k² L2 + k L1 + L0`.
    pub fn eval(&self, k: Cx<T>) -> Mat<Cx<T>> {
        let k2 = k * k;
        Mat::from_fn(self.dim(), self.dim(), |i, j| {
            k2 * self.l2[(i, j)] + k * self.l1[(i, j)] + self.l0[(i, j)]
        })
    }

    /// `Q'(k) = 2k L2 + L1`.
    pub fn eval_derivative(&self, k: Cx<T>) -> Mat<Cx<T>> {
        let k2 = k + k;
        Mat::from_fn(self.dim(), self.dim(), |i, j| k2 * self.l2[(i, j)] + self.l1[(i, j)])
    }

    /// `Q(k)·u`.
    pub fn apply(&self, k: Cx<T>, u: &[Cx<T>]) -> Vec<Cx<T>> {
        let k2 = k * k;
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut acc = Cx::new(T::zero(), T::zero());
                for (j, &uj) in u.iter().enumerate() {
                    let q = k2 * self.l2[(i, j)] + k * self.l1[(i, j)] + self.l0[(i, j)];
                    acc += q * uj;
                }
                acc
            })
            .collect()
    }

    /// Frobenius norms of `(L0, L1, L2)`.
    pub fn norms(&self) -> (T, T, T) {
        let f = |m: &Mat<Cx<T>>| {
            let mut s = T::zero();
            for j in 0..m.ncols() {
                for i in 0..m.nrows() {
                    s += m[(i, j)].norm_sqr();
                }
            }
            s.sqrt()
        };
        (f(&self.l0), f(&self.l1), f(&self.l2))
    }

    /// Normwise backward error of the approximate eigenpair `(k, u)`:
    /// `‖Q(k)u‖ / ((|k|²‖L2‖ + |k|‖L1‖ + ‖L0‖)‖u‖)`.
    pub fn backward_error(&self, k: Cx<T>, u: &[Cx<T>]) -> T {
        let r = self.apply(k, u);
        let rn = r.iter().map(|z| z.norm_sqr()).fold(T::zero(), |a, b| a + b).sqrt();
        let un = u.iter().map(|z| z.norm_sqr()).fold(T::zero(), |a, b| a + b).sqrt();
        let (n0, n1, n2) = self.norms();
        let a = k.norm();
        rn / ((a * a * n2 + a * n1 + n0) * un)
    }

    /// Scales every row by the reciprocal of its largest entry across
    /// `L0, L1, L2`. This is a left diagonal scaling, so eigenpairs are
    /// unchanged.
    pub fn equilibrate(&mut self) {
        let n = self.dim();
        let mut scale = vec![T::one(); n];
        for (i, s) in scale.iter_mut().enumerate() {
            let mut m = T::zero();
            for mat in [&self.l0, &self.l1, &self.l2] {
                for j in 0..n {
                    m = m.max(mat[(i, j)].norm());
                }
            }
            if m > T::zero() {
                *s = T::one() / m;
            }
        }
        for mat in [&mut self.l0, &mut self.l1, &mut self.l2] {
            for j in 0..n {
                for (i, &s) in scale.iter().enumerate() {
                    mat[(i, j)] *= s;
                }
            }
        }
        self.row_scale = Some(match self.row_scale.take() {
            Some(prev) => prev.iter().zip(&scale).map(|(&a, &b)| a * b).collect(),
            None => scale,
        });
    }
}

/// Builds the grids for `case` and assembles the problem at `omega`.
pub fn assemble_pep<T: Real>(
    sys: &TriLayerSystem<T>,
    omega: T,
    case: &RadiationCase<T>,
    n: usize,
) -> Result<PepMatrices<T>> {
    let disc = Discretization::new(sys, case, n)?;
    assemble_with(sys, omega, &disc, &case.label())
}

/// Minimum points per block accepted by the assembler.
pub const MIN_ASSEMBLY_POINTS: usize = 8;

/// Assembles the problem on precomputed grids.
pub fn assemble_with<T: Real>(
    sys: &TriLayerSystem<T>,
    omega: T,
    disc: &Discretization<T>,
    case_label: &str,
) -> Result<PepMatrices<T>> {
    if !(omega > T::zero()) || !omega.is_finite() {
        return Err(Error::Assembly(format!("omega must be positive, got {omega}")));
    }
    if disc.n < MIN_ASSEMBLY_POINTS {
        return Err(Error::Assembly(format!(
            "need at least {MIN_ASSEMBLY_POINTS} points per block, got {}",
            disc.n
        )));
    }
    disc.check()?;

    let n = disc.n;
    let dim = 6 * n;
    let zero = Cx::new(T::zero(), T::zero());
    let i_unit = imag_unit::<T>();
    let w2 = omega * omega;
    let mut l0 = Mat::from_fn(dim, dim, |_, _| zero);
    let mut l1 = Mat::from_fn(dim, dim, |_, _| zero);
    let mut l2 = Mat::from_fn(dim, dim, |_, _| zero);

    // guide: equations of motion for u_x and u_y
    let g = &sys.guide;
    let ux = Field::Ux.offset(n);
    let uy = Field::Uy.offset(n);
    let gd1 = &disc.guide.d1;
    let gd2 = &disc.guide.d2;
    let coupling = i_unit * (g.lambda + g.mu);
    for i in 0..n {
        for j in 0..n {
            l0[(ux + i, ux + j)] = gd2[(i, j)] * g.mu;
            l0[(uy + i, uy + j)] = gd2[(i, j)] * g.p_modulus();
            l1[(ux + i, uy + j)] = coupling * gd1[(i, j)];
            l1[(uy + i, ux + j)] = coupling * gd1[(i, j)];
        }
        l0[(ux + i, ux + i)] += re(g.rho * w2);
        l0[(uy + i, uy + i)] += re(g.rho * w2);
        l2[(ux + i, ux + i)] = re(-g.p_modulus());
        l2[(uy + i, uy + i)] = re(-g.mu);
    }

    // half-spaces: scalar Helmholtz equations for φ (modulus λ+2μ) and ψ (modulus μ)
    for side in Side::BOTH {
        let m = sys.side(side);
        for (field, grid, modulus) in [
            (Field::phi(side), disc.phi(side), m.p_modulus()),
            (Field::psi(side), disc.psi(side), m.mu),
        ] {
            let o = field.offset(n);
            for i in 0..n {
                for j in 0..n {
                    l0[(o + i, o + j)] = grid.d2[(i, j)] * modulus;
                }
                l0[(o + i, o + i)] += re(m.rho * w2);
                l2[(o + i, o + i)] = re(-modulus);
            }
        }
    }

    let mut replaced_rows = Vec::with_capacity(8);
    for side in Side::BOTH {
        let m = sys.side(side);
        let gi = disc.guide_interface(side);
        let phi = disc.phi(side);
        let psi = disc.psi(side);
        let hi = phi.interface_index;
        let po = Field::phi(side).offset(n);
        let so = Field::psi(side).offset(n);

        // normal stress:
        // (λ+2μ)u_y' + iλk u_x + λ_j k² φ - (λ_j+2μ_j)φ'' - 2iμ_j k ψ' = 0
        let r = po + hi;
        clear_row([&mut l0, &mut l1, &mut l2], r);
        for j in 0..n {
            l0[(r, uy + j)] = gd1[(gi, j)] * g.p_modulus();
            l0[(r, po + j)] = phi.d2[(hi, j)] * (-m.p_modulus());
            l1[(r, so + j)] = psi.d1[(hi, j)] * i_unit * (T::lit(-2.0) * m.mu);
        }
        l1[(r, ux + gi)] = i_unit * g.lambda;
        l2[(r, po + hi)] = re(m.lambda);
        replaced_rows.push((r, side, InterfaceCondition::NormalStress));

        // shear stress:
        // μ(ik u_y + u_x') - μ_j(2ik φ' - k² ψ - ψ'') = 0
        let r = so + hi;
        clear_row([&mut l0, &mut l1, &mut l2], r);
        for j in 0..n {
            l0[(r, ux + j)] = gd1[(gi, j)] * g.mu;
            l0[(r, so + j)] = psi.d2[(hi, j)] * m.mu;
            l1[(r, po + j)] = phi.d1[(hi, j)] * i_unit * (T::lit(-2.0) * m.mu);
        }
        l1[(r, uy + gi)] = i_unit * g.mu;
        l2[(r, so + hi)] = re(m.mu);
        replaced_rows.push((r, side, InterfaceCondition::ShearStress));

        // tangential displacement: u_x - ik φ + ψ' = 0
        let r = ux + gi;
        clear_row([&mut l0, &mut l1, &mut l2], r);
        l0[(r, ux + gi)] = re(T::one());
        for j in 0..n {
            l0[(r, so + j)] += psi.d1[(hi, j)];
        }
        l1[(r, po + hi)] = -i_unit;
        replaced_rows.push((r, side, InterfaceCondition::TangentialDisplacement));

        // normal displacement: u_y - φ' - ik ψ = 0
        let r = uy + gi;
        clear_row([&mut l0, &mut l1, &mut l2], r);
        l0[(r, uy + gi)] = re(T::one());
        for j in 0..n {
            l0[(r, po + j)] -= phi.d1[(hi, j)];
        }
        l1[(r, so + hi)] = -i_unit;
        replaced_rows.push((r, side, InterfaceCondition::NormalDisplacement));
    }

    Ok(PepMatrices {
        l0,
        l1,
        l2,
        n,
        omega,
        case_label: case_label.to_string(),
        replaced_rows,
        row_scale: None,
    })
}

fn clear_row<T: Real>(mats: [&mut Mat<Cx<T>>; 3], row: usize) {
    for m in mats {
        for j in 0..m.ncols() {
            m[(row, j)] = Cx::new(T::zero(), T::zero());
        }
    }
}
