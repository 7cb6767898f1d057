//! Chebyshev–Gauss–Lobatto collocation and the coordinate maps used to
//! discretise the guide and the two half-spaces.
//!
//! The guide uses the linear map `y = d·s`. Each half-space uses a rational
//! map sending one end of `[-1, 1]` to the interface and the other to
//! infinity:
//!
//! ```text
//! side a:  y = -d - ζ (1 - s)/(1 + s)      s = 1 → y = -d,  s = -1 → -∞
//! side b:  y =  d + ζ (1 + s)/(1 - s)      s = -1 → y = d,  s = 1 → +∞
//! ```
//!
//! A complex `ζ` turns the half-line into a ray in the complex plane, along
//! which an outgoing (physically growing) partial wave decays.

use faer::Mat;

use crate::error::{Error, Result};
use crate::materials::Side;
use crate::scalar::{re, Cx, Real};

/// Gauss–Lobatto points `s_i = -cos(iπ/(n-1))`, `i = 0..n`, in increasing order.
///
/// Evaluated as a sine so the set is exactly antisymmetric about zero.
pub fn lobatto_points<T: Real>(n: usize) -> Vec<T> {
    if n == 1 {
        return vec![T::zero()];
    }
    let m = T::lit((n - 1) as f64);
    let two = T::lit(2.0);
    (0..n)
        .map(|i| {
            let k = T::lit(2.0 * i as f64) - m;
            (T::PI() * k / (two * m)).sin()
        })
        .collect()
}

/// Barycentric weights of the Lobatto points: `(-1)^j`, halved at the ends.
pub fn lobatto_weights<T: Real>(n: usize) -> Vec<T> {
    (0..n)
        .map(|j| {
            let sign = if j % 2 == 0 { T::one() } else { -T::one() };
            if j == 0 || j + 1 == n {
                sign * T::lit(0.5)
            } else {
                sign
            }
        })
        .collect()
}

/// First and second differentiation matrices on the `n` Lobatto points.
///
/// Off-diagonal entries come from the barycentric formula with point
/// differences evaluated through trigonometric identities; diagonals use the
/// negative-sum rule so constants are annihilated to rounding.
pub fn chebyshev_differentiation<T: Real>(n: usize) -> Result<(Mat<T>, Mat<T>)> {
    if n < 2 {
        return Err(Error::DegenerateGrid { n, min: 2 });
    }
    let w = lobatto_weights::<T>(n);
    let m = T::lit((n - 1) as f64);
    let half = T::lit(0.5);
    let theta: Vec<T> = (0..n).map(|i| T::PI() * T::lit(i as f64) / m).collect();
    // s_i - s_j = cos θ_j - cos θ_i
    let diff = |i: usize, j: usize| -> T {
        -T::lit(2.0) * ((theta[j] + theta[i]) * half).sin() * ((theta[j] - theta[i]) * half).sin()
    };

    let mut d1 = Mat::<T>::zeros(n, n);
    for i in 0..n {
        let mut row_sum = T::zero();
        for j in 0..n {
            if i != j {
                let v = (w[j] / w[i]) / diff(i, j);
                d1[(i, j)] = v;
                row_sum += v;
            }
        }
        d1[(i, i)] = -row_sum;
    }

    let mut d2 = Mat::<T>::zeros(n, n);
    for i in 0..n {
        let mut row_sum = T::zero();
        for j in 0..n {
            if i != j {
                let v = T::lit(2.0) * d1[(i, j)] * (d1[(i, i)] - T::one() / diff(i, j));
                d2[(i, j)] = v;
                row_sum += v;
            }
        }
        d2[(i, i)] = -row_sum;
    }
    Ok((d1, d2))
}

/// Collocation points and differentiation matrices on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct ReferenceGrid<T> {
    pub s: Vec<T>,
    pub d1: Mat<T>,
    pub d2: Mat<T>,
}

impl<T: Real> ReferenceGrid<T> {
    pub const MIN_POINTS: usize = 3;

    pub fn new(n: usize) -> Result<Self> {
        if n < Self::MIN_POINTS {
            return Err(Error::DegenerateGrid {
                n,
                min: Self::MIN_POINTS,
            });
        }
        let (d1, d2) = chebyshev_differentiation(n)?;
        Ok(Self {
            s: lobatto_points(n),
            d1,
            d2,
        })
    }

    pub fn n_points(&self) -> usize {
        self.s.len()
    }
}

/// Which physical domain a mapped grid discretises.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Guide,
    HalfSpace(Side),
}

/// A reference grid pushed through one of the coordinate maps.
#[derive(Debug, Clone)]
pub struct MappedGrid<T> {
    pub region: Region,
    /// Map parameter ζ in mm (unused, zero, for the guide).
    pub zeta: Cx<T>,
    /// Collocation coordinates. The point at infinity holds `±∞ + 0i`.
    pub y: Vec<Cx<T>>,
    /// Complex distance `ζ·(1±s)/(1∓s)` of each point from the interface
    /// along the map's ray (`∞` at the far end). Empty for the guide.
    pub depth: Vec<Cx<T>>,
    pub d1: Mat<Cx<T>>,
    pub d2: Mat<Cx<T>>,
    /// Index of the point on `y = ±d`. For the guide this is the upper
    /// interface; the lower one is always index 0.
    pub interface_index: usize,
    pub infinity_index: Option<usize>,
    /// Chain-rule metrics `ds/dy` and `d²s/dy²` (all ones / zeros for the guide
    /// up to the `1/d` scale).
    pub metric1: Vec<Cx<T>>,
    pub metric2: Vec<Cx<T>>,
}

impl<T: Real> MappedGrid<T> {
    pub fn n_points(&self) -> usize {
        self.y.len()
    }

    /// Point at which the field meets the guide.
    pub fn interface_point(&self) -> usize {
        self.interface_index
    }
}

/// Linear map of the reference grid onto `[-d, d]`.
pub fn map_guide<T: Real>(grid: &ReferenceGrid<T>, d: T) -> Result<MappedGrid<T>> {
    if !(d > T::zero()) {
        return Err(Error::InvalidMap(format!(
            "guide half-thickness must be positive, got {d}"
        )));
    }
    let n = grid.n_points();
    let inv = T::one() / d;
    let inv2 = inv * inv;
    Ok(MappedGrid {
        region: Region::Guide,
        zeta: Cx::new(T::zero(), T::zero()),
        y: grid.s.iter().map(|&s| re(d * s)).collect(),
        depth: Vec::new(),
        d1: Mat::from_fn(n, n, |i, j| re(grid.d1[(i, j)] * inv)),
        d2: Mat::from_fn(n, n, |i, j| re(grid.d2[(i, j)] * inv2)),
        interface_index: n - 1,
        infinity_index: None,
        metric1: vec![re(inv); n],
        metric2: vec![Cx::new(T::zero(), T::zero()); n],
    })
}

/// Rational (possibly complex) map of the reference grid onto a half-space.
///
/// The differentiation matrices follow from the chain rule,
/// `D1 = diag(s')·D`, `D2 = diag(s'')·D + diag(s'²)·D²`, with the metrics
/// written in terms of `s` so the point at infinity needs no special case:
/// for side b `s' = (1-s)²/(2ζ)`, `s'' = -(1-s)³/(2ζ²)`; side a mirrors this.
pub fn map_half_space<T: Real>(grid: &ReferenceGrid<T>, side: Side, d: T, zeta: Cx<T>) -> Result<MappedGrid<T>> {
    if zeta.re == T::zero() && zeta.im == T::zero() {
        return Err(Error::InvalidMap("zeta must be nonzero".into()));
    }
    if zeta.re < T::zero() || !zeta.re.is_finite() || !zeta.im.is_finite() {
        return Err(Error::InvalidMap(format!(
            "zeta must be finite with Re(zeta) >= 0, got {zeta}"
        )));
    }
    if !(d > T::zero()) {
        return Err(Error::InvalidMap(format!(
            "guide half-thickness must be positive, got {d}"
        )));
    }
    let n = grid.n_points();
    let one = T::one();
    let two = T::lit(2.0);
    let inv_zeta = Cx::new(one, T::zero()) / zeta;
    let half_inv_zeta = inv_zeta / two;
    let half_inv_zeta2 = inv_zeta * inv_zeta / two;

    let mut y = Vec::with_capacity(n);
    let mut depth = Vec::with_capacity(n);
    let mut metric1 = Vec::with_capacity(n);
    let mut metric2 = Vec::with_capacity(n);
    let (interface_index, infinity_index) = match side {
        Side::A => (n - 1, 0),
        Side::B => (0, n - 1),
    };
    for (i, &s) in grid.s.iter().enumerate() {
        // a = distance in s from the infinity end
        let (a, b) = match side {
            Side::A => (one + s, one - s),
            Side::B => (one - s, one + s),
        };
        if i == infinity_index {
            depth.push(Cx::new(T::infinity(), T::zero()));
            let inf = match side {
                Side::A => -T::infinity(),
                Side::B => T::infinity(),
            };
            y.push(Cx::new(inf, T::zero()));
        } else {
            let t = zeta * (b / a);
            depth.push(t);
            y.push(match side {
                Side::A => re(-d) - t,
                Side::B => re(d) + t,
            });
        }
        let m1 = half_inv_zeta * (a * a);
        let m2 = half_inv_zeta2 * (a * a * a);
        metric1.push(m1);
        metric2.push(match side {
            Side::A => m2,
            Side::B => -m2,
        });
    }
    // exact interface placement
    y[interface_index] = match side {
        Side::A => re(-d),
        Side::B => re(d),
    };
    depth[interface_index] = Cx::new(T::zero(), T::zero());

    let d1 = Mat::from_fn(n, n, |i, j| metric1[i] * grid.d1[(i, j)]);
    let d2 = Mat::from_fn(n, n, |i, j| {
        metric2[i] * grid.d1[(i, j)] + metric1[i] * metric1[i] * grid.d2[(i, j)]
    });
    Ok(MappedGrid {
        region: Region::HalfSpace(side),
        zeta,
        y,
        depth,
        d1,
        d2,
        interface_index,
        infinity_index: Some(infinity_index),
        metric1,
        metric2,
    })
}

/// Barycentric Lagrange interpolation through the Lobatto points of `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct LobattoInterpolant<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> LobattoInterpolant<T> {
    pub fn new(n: usize) -> Self {
        Self {
            nodes: lobatto_points(n),
            weights: lobatto_weights(n),
        }
    }

    /// Evaluates the interpolant of `values` (sampled at the nodes) at `s`.
    pub fn eval(&self, values: &[Cx<T>], s: T) -> Cx<T> {
        debug_assert_eq!(values.len(), self.nodes.len());
        let mut num = Cx::new(T::zero(), T::zero());
        let mut den = T::zero();
        for ((&x, &w), &v) in self.nodes.iter().zip(&self.weights).zip(values) {
            let dx = s - x;
            if dx == T::zero() {
                return v;
            }
            let c = w / dx;
            num += v * c;
            den += c;
        }
        num / den
    }
}
