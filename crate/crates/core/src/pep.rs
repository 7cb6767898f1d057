//! Dense solver for the quadratic eigenvalue problem.
//!
//! The quadratic is linearised as `A v = k B v` with
//! `A = [[-L1, -L0], [I, 0]]`, `B = [[L2, 0], [0, I]]` and `v = (k u, u)`.
//! Rather than running a generalized QZ, the pencil is turned into a standard
//! problem by the spectral transformation `M = (A - σB)⁻¹ B`, whose
//! eigenvalues are `θ = 1 / (k - σ)`. Block elimination reduces the inverse
//! to one LU factorization of `Q(σ)`. Infinite eigenvalues of the pencil
//! (rows where `L2` vanishes) map to `θ = 0` and are discarded.

use faer::linalg::solvers::Solve;
use faer::Mat;

use crate::assembly::PepMatrices;
use crate::error::{Error, Result};
use crate::scalar::{Cx, Real};

/// Solver settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PepOptions<T> {
    /// Shift σ in rad/mm. `None` uses `ω (0.5 + 0.3i / ω)`, i.e. `ω/2 + 0.3i`.
    pub shift: Option<Cx<T>>,
    /// Eigenvalues with `|k|` above this are treated as infinite.
    pub infinity_threshold: T,
    /// Whether to return eigenvectors and backward errors.
    pub vectors: bool,
}

impl<T: Real> Default for PepOptions<T> {
    fn default() -> Self {
        Self {
            shift: None,
            infinity_threshold: T::lit(1e8),
            vectors: true,
        }
    }
}

/// Default shift for angular frequency `omega`.
pub fn default_shift<T: Real>(omega: T) -> Cx<T> {
    Cx::new(omega * T::lit(0.5), T::lit(0.3))
}

/// One finite eigenpair.
#[derive(Debug, Clone)]
pub struct EigenPair<T> {
    pub k: Cx<T>,
    /// Eigenvector of `Q(k)`, scaled to unit largest entry. Empty when
    /// vectors were not requested.
    pub vector: Vec<Cx<T>>,
    /// Normwise backward error, `NaN` when vectors were not requested.
    pub backward_error: T,
}

#[derive(Debug, Clone)]
pub struct PepSolution<T> {
    pub pairs: Vec<EigenPair<T>>,
    /// Number of eigenvalues discarded as infinite.
    pub n_infinite: usize,
    pub shift: Cx<T>,
}

/// Computes all finite eigenpairs of `Q(k) = k² L2 + k L1 + L0`.
pub fn solve_pep<T: Real>(pep: &PepMatrices<T>, opts: &PepOptions<T>) -> Result<PepSolution<T>> {
    let shift = opts.shift.unwrap_or_else(|| default_shift(pep.omega));
    match solve_shifted(pep, shift, opts) {
        Err(Error::Solver { .. }) if opts.shift.is_none() => {
            // the default shift happened to sit on an eigenvalue
            let nudged = shift * Cx::new(T::lit(1.0137), T::lit(0.0291));
            solve_shifted(pep, nudged, opts)
        }
        other => other,
    }
}

fn solve_shifted<T: Real>(pep: &PepMatrices<T>, sigma: Cx<T>, opts: &PepOptions<T>) -> Result<PepSolution<T>> {
    let m = pep.dim();
    let fail = |message: String| Error::Solver {
        omega: pep.omega.as_f64(),
        case: pep.case_label.clone(),
        message,
    };
    let one = Cx::new(T::one(), T::zero());

    let q = pep.eval(sigma);
    let lu = q.partial_piv_lu();

    // Y = -Q(σ)⁻¹ [L2, L1 + σ L2]
    let mut y = Mat::from_fn(m, 2 * m, |i, j| {
        if j < m {
            -pep.l2[(i, j)]
        } else {
            let j = j - m;
            -(pep.l1[(i, j)] + sigma * pep.l2[(i, j)])
        }
    });
    lu.solve_in_place(y.as_mut());
    if !all_finite(&y) {
        return Err(fail(format!("Q(σ) is singular at σ = {sigma}")));
    }

    // M = [[σ Y1, I + σ Y2], [Y1, Y2]]
    let big = Mat::from_fn(2 * m, 2 * m, |i, j| {
        if i < m {
            let v = sigma * y[(i, j)];
            if j >= m && j - m == i {
                v + one
            } else {
                v
            }
        } else {
            y[(i - m, j)]
        }
    });

    let cutoff = opts.infinity_threshold;
    let mut pairs = Vec::new();
    let mut n_infinite = 0;
    let mut accept = |theta: Cx<T>| -> Option<Cx<T>> {
        let t = theta.norm();
        if !t.is_finite() {
            return None;
        }
        // |k - σ| = 1/|θ| > cutoff + |σ| means |k| > cutoff
        if t * (cutoff + sigma.norm()) <= T::one() {
            n_infinite += 1;
            return None;
        }
        let k = sigma + one / theta;
        if k.norm() > cutoff || !k.re.is_finite() || !k.im.is_finite() {
            n_infinite += 1;
            return None;
        }
        Some(k)
    };

    if opts.vectors {
        let evd = big
            .eigen()
            .map_err(|e| fail(format!("eigensolver did not converge: {e:?}")))?;
        let s = evd.S();
        let u = evd.U();
        for col in 0..2 * m {
            let Some(k) = accept(s[col]) else { continue };
            let (start, scale) = if k.norm() >= T::one() { (0, one / k) } else { (m, one) };
            let mut vector: Vec<Cx<T>> = (0..m).map(|i| u[(start + i, col)] * scale).collect();
            normalize_max(&mut vector);
            let backward_error = pep.backward_error(k, &vector);
            pairs.push(EigenPair {
                k,
                vector,
                backward_error,
            });
        }
    } else {
        let values = big
            .eigenvalues()
            .map_err(|e| fail(format!("eigensolver did not converge: {e:?}")))?;
        for theta in values {
            if let Some(k) = accept(theta) {
                pairs.push(EigenPair {
                    k,
                    vector: Vec::new(),
                    backward_error: T::nan(),
                });
            }
        }
    }

    if pairs.is_empty() {
        return Err(Error::DegenerateProblem {
            omega: pep.omega.as_f64(),
            case: pep.case_label.clone(),
        });
    }
    Ok(PepSolution {
        pairs,
        n_infinite,
        shift: sigma,
    })
}

/// Eigenvector of `Q(k)` for an approximate eigenvalue `k`, by two steps of
/// inverse iteration. Returns the vector (unit largest entry) and its
/// backward error.
pub fn eigenvector_at<T: Real>(pep: &PepMatrices<T>, k: Cx<T>) -> Result<(Vec<Cx<T>>, T)> {
    let m = pep.dim();
    let q = pep.eval(k);
    let lu = q.partial_piv_lu();
    // fixed, non-symmetric start vector so results are reproducible
    let mut x = Mat::from_fn(m, 1, |i, _| {
        let t = T::lit(((i * 7919 + 13) % 101) as f64 / 101.0 + 0.5);
        Cx::new(t, T::lit(0.25) * t.sin())
    });
    for _ in 0..2 {
        lu.solve_in_place(x.as_mut());
        let mut v: Vec<Cx<T>> = (0..m).map(|i| x[(i, 0)]).collect();
        normalize_max(&mut v);
        if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            // Q(k) is exactly singular in floating point: fall back to a
            // tiny perturbation of k
            let kp = k * Cx::new(T::one() + T::epsilon().sqrt(), T::zero());
            return eigenvector_at(pep, kp);
        }
        for (i, z) in v.iter().enumerate() {
            x[(i, 0)] = *z;
        }
    }
    let v: Vec<Cx<T>> = (0..m).map(|i| x[(i, 0)]).collect();
    let be = pep.backward_error(k, &v);
    Ok((v, be))
}

fn all_finite<T: Real>(m: &Mat<Cx<T>>) -> bool {
    (0..m.ncols()).all(|j| (0..m.nrows()).all(|i| m[(i, j)].re.is_finite() && m[(i, j)].im.is_finite()))
}

/// Scales `v` so its largest-magnitude entry equals one.
pub fn normalize_max<T: Real>(v: &mut [Cx<T>]) {
    let mut best = Cx::new(T::zero(), T::zero());
    for z in v.iter() {
        if z.norm() > best.norm() {
            best = *z;
        }
    }
    if best.norm() > T::zero() {
        for z in v.iter_mut() {
            *z /= best;
        }
    }
}
