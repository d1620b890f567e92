//! Concrete iteration operators, each a pure step, plus full-solve drivers
//! built on the generic descent loop.
//!
//! Least-squares steps for f(x) = ‖b − Ax‖²:
//! * [`landweber_step`]: x ← x − γ·Aᵀ(Ax − b), valid for 0 < γ < 2/ρ(AᵀA);
//! * [`euclid_L_step`]: the relaxation with per-column weights 1/(J·c_j),
//!   derived from alternating minimization of the row coupling;
//! * [`LandweberEquiv`]: the column rescaling under which the two produce
//!   identical iterate sequences.
//!
//! Multiplicative steps for the KL-family objectives on a column-normalized
//! nonnegative system (all need (Px)_i > 0 and produce positive vectors
//! from positive input):
//! * [`smart_step`]  minimizes KL(Px, y):  x_j·exp(Σᵢ P[i][j]·log(y_i/(Px)_i));
//! * [`emml_step`]   minimizes KL(y, Px):  x_j·Σᵢ P[i][j]·y_i/(Px)_i;
//! * [`hellinger_t_step`] minimizes H(y, Px): x_j·(Σᵢ P[i][j]·√(y_i/(Px)_i))²;
//! * [`pearson_r_step`]   descends φ²(y, Px): x_j·√(Σᵢ P[i][j]·(y_i/(Px)_i)²).
//!
//! Fixed points: y = Px makes every ratio one, so all four steps return x
//! unchanged. Mass behavior differs per family and is checked in the
//! diagnostics sweeps: the expectation-maximization step conserves Σx
//! exactly at Σy, the exponential and Hellinger steps stay below Σy, the
//! Pearson step stays above.

mod am;
mod drivers;

pub use am::{
    emml_am, emml_mm, euclid_am, euclid_mm, hellinger_am, hellinger_mm, pearson_am, pearson_mm,
    smart_am, smart_mm,
};
pub use drivers::{
    run_gradient_descent, run_quadratic_mm, solve, solve_emml, solve_euclid, solve_hellinger,
    solve_landweber, solve_pearson, solve_smart, KlRun, SolveOutcome, SolverConfig,
};

use crate::distances::{check_positive, check_same_len};
use crate::error::{Error, Result};
use crate::model::{NonnegMatrix, RealMatrix, RATIO_GUARD};

/// One relaxed gradient step for ‖b − Ax‖²: x − γ·Aᵀ(Ax − b).
///
/// The step itself only checks that γ is positive and finite; the spectral
/// bound γ < 2/ρ(AᵀA) is enforced by the full-solve driver, where the power
/// method estimate is computed once.
pub fn landweber_step(a: &RealMatrix, b: &[f64], x: &[f64], gamma: f64) -> Result<Vec<f64>> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::Config(format!(
            "landweber step size must be finite and positive, got {gamma}"
        )));
    }
    let ax = a.mul(x)?;
    check_same_len(&ax, b)?;
    let resid: Vec<f64> = ax.iter().zip(b).map(|(&axi, &bi)| axi - bi).collect();
    let grad = a.mul_transpose(&resid)?;
    Ok(x.iter()
        .zip(&grad)
        .map(|(&xj, &gj)| xj - gamma * gj)
        .collect())
}

/// Largest-eigenvalue estimate from the power method.
#[derive(Debug, Clone, Copy)]
pub struct RhoEstimate {
    pub value: f64,
    /// False when the Rayleigh quotient had not settled within `iters`
    /// sweeps; the value is then the best estimate so far.
    pub converged: bool,
    pub iters_used: usize,
}

/// Power-method estimate of ρ(M), the largest eigenvalue of a symmetric
/// positive semidefinite matrix M (typically a Gram matrix AᵀA; see
/// [`RealMatrix::gram`]).
pub fn power_method_rho(m: &RealMatrix, iters: usize, tol: f64) -> Result<RhoEstimate> {
    let n = m.rows();
    if n != m.cols() {
        return Err(Error::ShapeMismatch {
            expected: "square matrix".into(),
            got: format!("{}x{}", m.rows(), m.cols()),
        });
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let (u, v) = (m.get(i, j), m.get(j, i));
            if (u - v).abs() > 1e-9 * (1.0 + u.abs().max(v.abs())) {
                return Err(Error::Domain(format!(
                    "power method expects a symmetric matrix; entries ({i},{j}) differ: {u} vs {v}"
                )));
            }
        }
    }

    // Deterministic start with a mild tilt so eigenvector-orthogonal starts
    // on structured matrices are unlikely.
    let mut v: Vec<f64> = (0..n).map(|j| 1.0 + 0.01 * (j as f64 + 1.0)).collect();
    let norm = v.iter().map(|e| e * e).sum::<f64>().sqrt();
    v.iter_mut().for_each(|e| *e /= norm);

    let mut rho = 0.0;
    for it in 1..=iters {
        let mv = m.mul(&v)?;
        let new_rho: f64 = v.iter().zip(&mv).map(|(&a, &b)| a * b).sum();
        let mv_norm = mv.iter().map(|e| e * e).sum::<f64>().sqrt();
        if mv_norm < RATIO_GUARD {
            return Ok(RhoEstimate {
                value: 0.0,
                converged: true,
                iters_used: it,
            });
        }
        v = mv.iter().map(|e| e / mv_norm).collect();
        if (new_rho - rho).abs() <= tol * new_rho.abs().max(1e-30) {
            return Ok(RhoEstimate {
                value: new_rho,
                converged: true,
                iters_used: it,
            });
        }
        rho = new_rho;
    }
    Ok(RhoEstimate {
        value: rho,
        converged: false,
        iters_used: iters,
    })
}

/// Admissible upper bound for the landweber step size on this matrix:
/// 2/ρ(AᵀA), shrunk by a 1% safety factor because ρ is estimated.
pub fn landweber_gamma_bound(a: &RealMatrix) -> Result<f64> {
    let gram = a.gram()?;
    let rho = power_method_rho(&gram, 200, 1e-9)?;
    if rho.value <= 0.0 {
        return Err(Error::Domain("estimated spectral radius is zero".into()));
    }
    Ok(2.0 / (rho.value * 1.01))
}

/// Plain gradient step x − γ·∇f(x). Valid as a majorization step whenever
/// γ <= 1/L for an L-Lipschitz gradient; that bound is the caller's claim.
pub fn gradient_descent_step<G>(grad_f: G, x: &[f64], gamma: f64) -> Vec<f64>
where
    G: Fn(&[f64]) -> Vec<f64>,
{
    let g = grad_f(x);
    assert_eq!(g.len(), x.len(), "gradient length must match the iterate");
    x.iter().zip(&g).map(|(&xj, &gj)| xj - gamma * gj).collect()
}

/// Quadratic-majorizer step x − B⁻¹∇f(x), with B applied through a caller
/// solver for Bu = v. Minimizes the surrogate
/// f(z) + ⟨∇f(z), x−z⟩ + ½(x−z)ᵀB(x−z) over x when B dominates the Hessian.
pub fn quadratic_mm_step<G, SB>(grad_f: G, solve_b: SB, x: &[f64]) -> Result<Vec<f64>>
where
    G: Fn(&[f64]) -> Vec<f64>,
    SB: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let g = grad_f(x);
    if g.len() != x.len() {
        return Err(Error::Evaluation(format!(
            "gradient length {} does not match iterate length {}",
            g.len(),
            x.len()
        )));
    }
    let u = solve_b(&g)?;
    if u.len() != x.len() {
        return Err(Error::Evaluation(format!(
            "solve_b returned length {} for input of length {}",
            u.len(),
            x.len()
        )));
    }
    Ok(x.iter().zip(&u).map(|(&xj, &uj)| xj - uj).collect())
}

/// The alternating-minimization relaxation for ‖b − Ax‖²:
/// x_j ← x_j + (1/(J·c_j))·Σᵢ A[i][j]·(b_i − (Ax)_i).
pub fn euclid_l_step(a: &RealMatrix, b: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    let ax = a.mul(x)?;
    check_same_len(&ax, b)?;
    let resid: Vec<f64> = b.iter().zip(&ax).map(|(&bi, &axi)| bi - axi).collect();
    let at_r = a.mul_transpose(&resid)?;
    let jf = a.cols() as f64;
    Ok(x.iter()
        .zip(&at_r)
        .zip(a.col_sq_sums())
        .map(|((&xj, &gj), &cj)| xj + gj / (jf * cj))
        .collect())
}

/// Column rescaling that turns the weighted relaxation [`euclid_l_step`]
/// into a plain landweber iteration with unit step.
///
/// With β_j = 1/(J·c_j), B[i][j] = √β_j·A[i][j] and z_j = x_j/√β_j, the
/// systems satisfy Bz = Ax, the Gram trace of B is exactly one (so γ = 1 is
/// admissible), and the landweber iterates of (B, b) map back onto the
/// relaxation iterates of (A, b) coordinate for coordinate.
#[derive(Debug, Clone)]
pub struct LandweberEquiv {
    pub b_matrix: RealMatrix,
    beta: Vec<f64>,
}

impl LandweberEquiv {
    pub fn new(a: &RealMatrix) -> Result<Self> {
        let jf = a.cols() as f64;
        let beta: Vec<f64> = a.col_sq_sums().iter().map(|&cj| 1.0 / (jf * cj)).collect();
        let mut data = Vec::with_capacity(a.rows() * a.cols());
        for row in a.entries().chunks(a.cols()) {
            for (&aij, &bj) in row.iter().zip(&beta) {
                data.push(bj.sqrt() * aij);
            }
        }
        Ok(LandweberEquiv {
            b_matrix: RealMatrix::new(a.rows(), a.cols(), data)?,
            beta,
        })
    }

    /// Map an iterate to rescaled coordinates: z_j = x_j/√β_j.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_same_len(x, &self.beta)?;
        Ok(x.iter()
            .zip(&self.beta)
            .map(|(&xj, &bj)| xj / bj.sqrt())
            .collect())
    }

    /// Map back: x_j = √β_j·z_j.
    pub fn back(&self, z: &[f64]) -> Result<Vec<f64>> {
        check_same_len(z, &self.beta)?;
        Ok(z.iter()
            .zip(&self.beta)
            .map(|(&zj, &bj)| bj.sqrt() * zj)
            .collect())
    }

    /// Trace of BᵀB = Σ_j β_j·c_j; equals 1 up to roundoff.
    pub fn gram_trace(&self) -> f64 {
        self.b_matrix.col_sq_sums().iter().sum()
    }
}

fn checked_kl_inputs(p: &NonnegMatrix, y: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    if y.len() != p.rows() {
        return Err(Error::LengthMismatch {
            left: p.rows(),
            right: y.len(),
        });
    }
    check_positive("y entry", y)?;
    check_positive("x entry", x)?;
    let px = p.mul(x)?;
    for (i, &v) in px.iter().enumerate() {
        if v < RATIO_GUARD {
            return Err(Error::SingularRatio { index: i });
        }
    }
    Ok(px)
}

/// Multiplicative exponential step minimizing KL(Px, y) over x >= 0.
/// Log-ratios are formed once per row before the per-column sums.
pub fn smart_step(p: &NonnegMatrix, y: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    let px = checked_kl_inputs(p, y, x)?;
    let log_ratio: Vec<f64> = y
        .iter()
        .zip(&px)
        .map(|(&yi, &pxi)| yi.ln() - pxi.ln())
        .collect();
    let mut out = vec![0.0; p.cols()];
    for (j, o) in out.iter_mut().enumerate() {
        let e: f64 = (0..p.rows()).map(|i| p.get(i, j) * log_ratio[i]).sum();
        *o = x[j] * e.exp();
    }
    Ok(out)
}

/// Expectation-maximization step minimizing KL(y, Px) over x >= 0.
/// Conserves mass: Σ_j out_j = Σ_i y_i on a column-normalized system.
pub fn emml_step(p: &NonnegMatrix, y: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    let px = checked_kl_inputs(p, y, x)?;
    let ratio: Vec<f64> = y.iter().zip(&px).map(|(&yi, &pxi)| yi / pxi).collect();
    let weights = p.mul_transpose(&ratio)?;
    Ok(x.iter().zip(&weights).map(|(&xj, &wj)| xj * wj).collect())
}

/// Square-root ratio step minimizing H(y, Px) over x >= 0.
pub fn hellinger_t_step(p: &NonnegMatrix, y: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    let px = checked_kl_inputs(p, y, x)?;
    let sqrt_ratio: Vec<f64> = y
        .iter()
        .zip(&px)
        .map(|(&yi, &pxi)| (yi / pxi).sqrt())
        .collect();
    let sums = p.mul_transpose(&sqrt_ratio)?;
    Ok(x.iter().zip(&sums).map(|(&xj, &sj)| xj * sj * sj).collect())
}

/// Squared-ratio step descending φ²(y, Px) over x >= 0.
pub fn pearson_r_step(p: &NonnegMatrix, y: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    let px = checked_kl_inputs(p, y, x)?;
    let sq_ratio: Vec<f64> = y
        .iter()
        .zip(&px)
        .map(|(&yi, &pxi)| (yi / pxi) * (yi / pxi))
        .collect();
    let sums = p.mul_transpose(&sq_ratio)?;
    Ok(x.iter()
        .zip(&sums)
        .map(|(&xj, &sj)| xj * sj.sqrt())
        .collect())
}
