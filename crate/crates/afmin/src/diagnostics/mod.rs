//! Numerical verification of the solver identities, inequalities, and limit
//! characterizations, against independent oracles.
//!
//! Everything here evaluates both sides of a stated relation and reports
//! slacks or residuals through [`CheckReport`]; nothing asserts. The
//! exact-identity checks (`pythagorean_*`) return relative residuals that
//! collapse to zero at their degenerate points (x = z, fixed points). The
//! monotonicity checks walk a completed trace. The sweep functions sample
//! seeded random instances in bulk. Probes of open questions live in
//! [`probes`] and never fail.

mod limits;
mod oracle;
mod probes;
mod sweeps;

pub use limits::{limit_characterization_euclid, limit_characterization_smart};
pub use oracle::{
    ls_min_norm, nullspace_basis, oracle_minimize, weighted_ls_projection, OracleMethod,
    OracleSolution,
};
pub use probes::{
    euclid_summa2_reading_probe, hellinger_inequality_comparison, hrr_probe,
    landweber_equivalence_deviation, summa2_candidate_probe, HellingerComparison,
};
pub use sweeps::{contraction_sweep, mass_law_sweep, pythagorean_sweep};

use crate::distances::{
    hellinger, kl_vec, pearson, pearson_pairs, sum_sq_diff, weighted_sq, PhiSpec,
};
use crate::error::{Error, Result};
use crate::framework::{check_summa, check_summa2, IterationTrace};
use crate::model::{
    euclid_q_array, euclid_r_array, kl_q_array, kl_r_array, Family, NonnegMatrix, ProblemMatrix,
    RealMatrix,
};
use crate::report::CheckReport;
use crate::solvers::{emml_step, euclid_l_step, hellinger_t_step, pearson_r_step, smart_step};

fn rel_residual(lhs: f64, rhs: f64) -> f64 {
    (lhs - rhs).abs() / (1.0 + lhs.abs())
}

fn require_normalized(p: &NonnegMatrix) -> Result<()> {
    if !p.is_normalized(1e-10) {
        return Err(Error::Config(
            "identity checks need unit column sums; normalize the system first".into(),
        ));
    }
    Ok(())
}

/// Residuals of the two decomposition identities of the exponential KL
/// iteration, for a column-normalized system:
///
///   KL(q(x), r(z)) = KL(q(x), r(x)) + KL(x, z) − KL(Px, Pz)
///   KL(q(x), r(z)) = KL(q(Sz), r(z)) + KL(x, Sz)
///
/// where S is the one-step operator. Returned as relative residuals.
pub fn pythagorean_smart(p: &NonnegMatrix, y: &[f64], x: &[f64], z: &[f64]) -> Result<(f64, f64)> {
    require_normalized(p)?;
    let qx = kl_q_array(p, x)?;
    let rz = kl_r_array(p, y, z)?;
    let rx = kl_r_array(p, y, x)?;
    let lhs = kl_vec(qx.entries(), rz.entries())?;

    let rhs1 =
        kl_vec(qx.entries(), rx.entries())? + kl_vec(x, z)? - kl_vec(&p.mul(x)?, &p.mul(z)?)?;

    let sz = smart_step(p, y, z)?;
    let qsz = kl_q_array(p, &sz)?;
    let rhs2 = kl_vec(qsz.entries(), rz.entries())? + kl_vec(x, &sz)?;

    Ok((rel_residual(lhs, rhs1), rel_residual(lhs, rhs2)))
}

/// Residuals of the two decomposition identities of the
/// expectation-maximization iteration, for a column-normalized system:
///
///   KL(r(x), q(z)) = KL(r(z), q(z)) + KL(r(x), r(z))
///   KL(r(x), q(z)) = KL(r(x), q(Mx)) + KL(Mx, z)
///
/// where M is the one-step operator.
pub fn pythagorean_emml(p: &NonnegMatrix, y: &[f64], x: &[f64], z: &[f64]) -> Result<(f64, f64)> {
    require_normalized(p)?;
    let rx = kl_r_array(p, y, x)?;
    let rz = kl_r_array(p, y, z)?;
    let qz = kl_q_array(p, z)?;
    let lhs = kl_vec(rx.entries(), qz.entries())?;

    let rhs1 = kl_vec(rz.entries(), qz.entries())? + kl_vec(rx.entries(), rz.entries())?;

    let mx = emml_step(p, y, x)?;
    let qmx = kl_q_array(p, &mx)?;
    let rhs2 = kl_vec(rx.entries(), qmx.entries())? + kl_vec(&mx, z)?;

    Ok((rel_residual(lhs, rhs1), rel_residual(lhs, rhs2)))
}

/// Residuals of the two least-squares decomposition identities:
///
///   E(r(z), q(x)) = E(r(x), q(x)) + E(r(z), r(x))
///   E(r(x), q(z)) = E(r(x), q(Lx)) + Σⱼ c_j·((Lx)_j − z_j)²
///
/// where L is the one-step relaxation and E the entrywise squared distance.
pub fn pythagorean_euclid(a: &RealMatrix, b: &[f64], x: &[f64], z: &[f64]) -> Result<(f64, f64)> {
    let rx = euclid_r_array(a, b, x)?;
    let rz = euclid_r_array(a, b, z)?;
    let qx = euclid_q_array(a, x)?;
    let lhs1 = sum_sq_diff(rz.entries(), qx.entries())?;
    let rhs1 = sum_sq_diff(rx.entries(), qx.entries())? + sum_sq_diff(rz.entries(), rx.entries())?;

    let qz = euclid_q_array(a, z)?;
    let lx = euclid_l_step(a, b, x)?;
    let qlx = euclid_q_array(a, &lx)?;
    let lhs2 = sum_sq_diff(rx.entries(), qz.entries())?;
    let rhs2 = sum_sq_diff(rx.entries(), qlx.entries())? + weighted_sq(&lx, z, a.col_sq_sums())?;

    Ok((rel_residual(lhs1, rhs1), rel_residual(lhs2, rhs2)))
}

/// Residual of the Hellinger decomposition identity, for a
/// column-normalized system:
///
///   H(r(x), q(z)) = H(r(x), q(Tx)) + H(Tx, z)
///
/// where T is the one-step operator.
pub fn pythagorean_hellinger(p: &NonnegMatrix, y: &[f64], x: &[f64], z: &[f64]) -> Result<f64> {
    require_normalized(p)?;
    let rx = kl_r_array(p, y, x)?;
    let qz = kl_q_array(p, z)?;
    let lhs = hellinger(rx.entries(), qz.entries())?;

    let tx = hellinger_t_step(p, y, x)?;
    let qtx = kl_q_array(p, &tx)?;
    let rhs = hellinger(rx.entries(), qtx.entries())? + hellinger(&tx, z)?;
    Ok(rel_residual(lhs, rhs))
}

/// Residuals of the Pearson decomposition identities, for a
/// column-normalized system:
///
///   φ²(r(z), q(x)) = φ²(r(z), q(Rz)) + φ²(Rz, x)
///   φ²(Rz, x)      = φ²(q(Rz), q(x))
///
/// where R is the one-step operator.
pub fn pythagorean_pearson(
    p: &NonnegMatrix,
    y: &[f64],
    z: &[f64],
    x: &[f64],
) -> Result<(f64, f64)> {
    require_normalized(p)?;
    let rz = kl_r_array(p, y, z)?;
    let qx = kl_q_array(p, x)?;
    let lhs = pearson_pairs(rz.entries(), qx.entries())?;

    let rzx = pearson_r_step(p, y, z)?;
    let qrz = kl_q_array(p, &rzx)?;
    let main_rhs = pearson_pairs(rz.entries(), qrz.entries())? + pearson(&rzx, x)?;

    let aux_lhs = pearson(&rzx, x)?;
    let aux_rhs = pearson_pairs(qrz.entries(), qx.entries())?;

    Ok((rel_residual(lhs, main_rhs), rel_residual(aux_lhs, aux_rhs)))
}

fn consecutive_pairs(trace: &IterationTrace) -> Result<()> {
    if trace.len() < 2 {
        return Err(Error::Evaluation(
            "monotonicity checks need a trace of at least two iterates".into(),
        ));
    }
    Ok(())
}

/// Per-iteration check that the objective drop dominates the family's step
/// distance:
///
///   f(x^k) − f(x^{k+1})  >=  D(x^k, x^{k+1})
///
/// with D = KL(x^k, x^{k+1}) for the exponential family,
/// KL(x^{k+1}, x^k) for the expectation family, J·Σ c_j(Δ_j)² for least
/// squares, and the Hellinger distance for the Hellinger family. Slacks are
/// normalized by 1 + |f(x^k)|.
pub fn first_monotonicity(
    family: Family,
    matrix: &ProblemMatrix,
    trace: &IterationTrace,
    tol: f64,
) -> Result<CheckReport> {
    consecutive_pairs(trace)?;
    let records = trace.records();
    let mut slacks = Vec::with_capacity(records.len() - 1);
    for w in records.windows(2) {
        let (cur, next) = (&w[0], &w[1]);
        let d = match family {
            Family::Smart => kl_vec(&cur.x, &next.x)?,
            Family::Emml => kl_vec(&next.x, &cur.x)?,
            Family::Hellinger => hellinger(&cur.x, &next.x)?,
            Family::Euclid => {
                let a = matrix.as_real()?;
                a.cols() as f64 * weighted_sq(&next.x, &cur.x, a.col_sq_sums())?
            }
            other => {
                return Err(Error::Config(format!(
                    "no step-distance monotonicity is on record for family `{}`",
                    other.name()
                )))
            }
        };
        slacks.push((cur.f - next.f - d) / (1.0 + cur.f.abs()));
    }
    Ok(CheckReport::from_slacks(
        format!("first_monotonicity_{}", family.name()),
        &slacks,
        tol,
        format!("steps={}", slacks.len()),
    ))
}

/// Per-iteration check that the distance to a minimizer `x_hat` shrinks by
/// at least the family's stated amount.
///
/// * exponential family: the drop KL(x̂,x^k) − KL(x̂,x^{k+1}) equals
///   f(x^{k+1}) − f(x̂) + KL(Px̂,Px^k) + KL(x^{k+1},x^k) − KL(Px^{k+1},Px^k);
///   the slack is the residual of that identity (each term of which is a
///   certificate that the drop is nonnegative);
/// * expectation family: drop >= f(x^k) − f(x^{k+1});
/// * Hellinger family: drop >= 2·(f(x^{k+1}) − f(x̂));
/// * least squares: g_k(x̂) − g_{k+1}(x̂) >= f(x^k) − f(x̂) with
///   g_k(x) = J·E(r(x^{k−1}), r(x)).
///
/// `x_hat` must come from an independent oracle (or be an exact solution).
pub fn second_monotonicity(
    family: Family,
    matrix: &ProblemMatrix,
    data: &[f64],
    x_hat: &[f64],
    trace: &IterationTrace,
    tol: f64,
) -> Result<CheckReport> {
    consecutive_pairs(trace)?;
    let records = trace.records();
    let mut slacks = Vec::new();
    let mut min_drop = f64::INFINITY;
    match family {
        Family::Smart => {
            let p = matrix.as_nonneg()?;
            let px_hat = p.mul(x_hat)?;
            let f_hat = kl_vec(&px_hat, data)?;
            for w in records.windows(2) {
                let (cur, next) = (&w[0], &w[1]);
                let drop = kl_vec(x_hat, &cur.x)? - kl_vec(x_hat, &next.x)?;
                let rhs =
                    next.f - f_hat + kl_vec(&px_hat, &p.mul(&cur.x)?)? + kl_vec(&next.x, &cur.x)?
                        - kl_vec(&p.mul(&next.x)?, &p.mul(&cur.x)?)?;
                slacks.push((drop - rhs) / (1.0 + cur.f.abs()));
                min_drop = min_drop.min(drop / (1.0 + cur.f.abs()));
            }
        }
        Family::Emml => {
            for w in records.windows(2) {
                let (cur, next) = (&w[0], &w[1]);
                let drop = kl_vec(x_hat, &cur.x)? - kl_vec(x_hat, &next.x)?;
                let rhs = cur.f - next.f;
                slacks.push((drop - rhs) / (1.0 + cur.f.abs()));
                min_drop = min_drop.min(drop / (1.0 + cur.f.abs()));
            }
        }
        Family::Hellinger => {
            let p = matrix.as_nonneg()?;
            let f_hat = hellinger(data, &p.mul(x_hat)?)?;
            for w in records.windows(2) {
                let (cur, next) = (&w[0], &w[1]);
                let drop = kl_vec(x_hat, &cur.x)? - kl_vec(x_hat, &next.x)?;
                let rhs = 2.0 * (next.f - f_hat);
                slacks.push((drop - rhs) / (1.0 + cur.f.abs()));
                min_drop = min_drop.min(drop / (1.0 + cur.f.abs()));
            }
        }
        Family::Euclid => {
            let a = matrix.as_real()?;
            let jf = a.cols() as f64;
            let f_hat = sum_sq_diff(data, &a.mul(x_hat)?)?;
            let r_hat = euclid_r_array(a, data, x_hat)?;
            // g_k needs the iterate before x^k; start at the first record
            // whose predecessor is known.
            for rec in records {
                let Some(prev) = trace.iterate(rec.k - 1) else {
                    continue;
                };
                let g_k =
                    jf * sum_sq_diff(euclid_r_array(a, data, prev)?.entries(), r_hat.entries())?;
                let g_next =
                    jf * sum_sq_diff(euclid_r_array(a, data, &rec.x)?.entries(), r_hat.entries())?;
                let drop = g_k - g_next;
                slacks.push((drop - (rec.f - f_hat)) / (1.0 + rec.f.abs()));
                min_drop = min_drop.min(drop / (1.0 + rec.f.abs()));
            }
        }
        other => {
            return Err(Error::Config(format!(
                "no second monotonicity property is on record for family `{}`",
                other.name()
            )))
        }
    }
    Ok(CheckReport::from_slacks(
        format!("second_monotonicity_{}", family.name()),
        &slacks,
        tol,
        format!(
            "steps={}; min normalized distance drop={min_drop:.3e}",
            slacks.len()
        ),
    ))
}

/// Check the induced-proximal bound of a φ-kernel along a trace:
///
///   KL(x̂, x^k) − KL(x̂, x^{k+1})  >=  (1/φ″(1))·(f(x^k) − f(x̂))
///
/// For the Hellinger kernel the factor 1/φ″(1) is 2. `f` evaluates the
/// objective the trace descended (used only at `x_hat`; trace values are
/// reused for the iterates).
pub fn at_induced_prox_check<F>(
    spec: &PhiSpec,
    trace: &IterationTrace,
    x_hat: &[f64],
    f: F,
    tol: f64,
) -> Result<CheckReport>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    consecutive_pairs(trace)?;
    if spec.ddphi1.is_nan() || spec.ddphi1 <= 0.0 {
        return Err(Error::Domain(format!(
            "kernel `{}` must have positive second derivative at 1, got {}",
            spec.name, spec.ddphi1
        )));
    }
    let f_hat = f(x_hat)?;
    let factor = 1.0 / spec.ddphi1;
    let mut slacks = Vec::new();
    for w in trace.records().windows(2) {
        let (cur, next) = (&w[0], &w[1]);
        let drop = kl_vec(x_hat, &cur.x)? - kl_vec(x_hat, &next.x)?;
        slacks.push((drop - factor * (cur.f - f_hat)) / (1.0 + cur.f.abs()));
    }
    Ok(CheckReport::from_slacks(
        format!("induced_prox_{}", spec.name),
        &slacks,
        tol,
        format!("steps={}; factor={factor}", slacks.len()),
    ))
}

fn iterate_or_err(trace: &IterationTrace, k: usize) -> Result<&[f64]> {
    trace
        .iterate(k)
        .ok_or_else(|| Error::Evaluation("trace is missing its starting vector".into()))
}

/// SUMMA check for the exponential KL iteration, with the auxiliary
/// g_k(x) = KL(x, x^{k−1}) − KL(Px, Px^{k−1}) spelled out from its
/// definition (no collapsed shortcut).
pub fn summa_check_smart(
    p: &NonnegMatrix,
    y: &[f64],
    trace: &IterationTrace,
    samples: &[Vec<f64>],
    tol: f64,
) -> Result<CheckReport> {
    require_normalized(p)?;
    let f = |x: &[f64]| kl_vec(&p.mul(x)?, y);
    let g = |k: usize, x: &[f64]| {
        let prev = iterate_or_err(trace, k - 1)?;
        Ok(kl_vec(x, prev)? - kl_vec(&p.mul(x)?, &p.mul(prev)?)?)
    };
    let gap = |k: usize, x: &[f64]| {
        let xk = iterate_or_err(trace, k)?;
        Ok(f(x)? + g(k, x)? - f(xk)? - g(k, xk)?)
    };
    let g_next = |k: usize, x: &[f64]| {
        let xk = iterate_or_err(trace, k)?;
        Ok(kl_vec(x, xk)? - kl_vec(&p.mul(x)?, &p.mul(xk)?)?)
    };
    let mut report = check_summa(gap, g_next, trace, samples, tol)?;
    report.name = "summa_smart".into();
    Ok(report)
}

/// SUMMA check for the least-squares relaxation, with
/// g_k(x) = J·E(r(x^{k−1}), r(x)).
pub fn summa_check_euclid(
    a: &RealMatrix,
    b: &[f64],
    trace: &IterationTrace,
    samples: &[Vec<f64>],
    tol: f64,
) -> Result<CheckReport> {
    let jf = a.cols() as f64;
    let f = |x: &[f64]| sum_sq_diff(b, &a.mul(x)?);
    let g = |k: usize, x: &[f64]| {
        let prev = iterate_or_err(trace, k - 1)?;
        Ok(jf
            * sum_sq_diff(
                euclid_r_array(a, b, prev)?.entries(),
                euclid_r_array(a, b, x)?.entries(),
            )?)
    };
    let gap = |k: usize, x: &[f64]| {
        let xk = iterate_or_err(trace, k)?;
        Ok(f(x)? + g(k, x)? - f(xk)? - g(k, xk)?)
    };
    let g_next = |k: usize, x: &[f64]| {
        let xk = iterate_or_err(trace, k)?;
        Ok(jf
            * sum_sq_diff(
                euclid_r_array(a, b, xk)?.entries(),
                euclid_r_array(a, b, x)?.entries(),
            )?)
    };
    let mut report = check_summa(gap, g_next, trace, samples, tol)?;
    report.name = "summa_euclid".into();
    Ok(report)
}

/// Closed-form check that the least-squares auxiliary gap collapses to a
/// weighted squared distance: G_k(x) − G_k(x^k) = J·Σ c_j(x^k_j − x_j)².
pub fn euclid_summa_gap_identity(
    a: &RealMatrix,
    b: &[f64],
    trace: &IterationTrace,
    samples: &[Vec<f64>],
    tol: f64,
) -> Result<CheckReport> {
    let jf = a.cols() as f64;
    let f = |x: &[f64]| sum_sq_diff(b, &a.mul(x)?);
    let mut residuals = Vec::new();
    for rec in trace.records() {
        let Some(prev) = trace.iterate(rec.k - 1) else {
            continue;
        };
        let r_prev = euclid_r_array(a, b, prev)?;
        let g = |x: &[f64]| -> Result<f64> {
            Ok(jf * sum_sq_diff(r_prev.entries(), euclid_r_array(a, b, x)?.entries())?)
        };
        let gk_at_xk = f(&rec.x)? + g(&rec.x)?;
        for x in samples {
            let gap = f(x)? + g(x)? - gk_at_xk;
            let closed = jf * weighted_sq(&rec.x, x, a.col_sq_sums())?;
            residuals.push(-rel_residual(gap, closed));
        }
    }
    Ok(CheckReport::from_slacks(
        "euclid_summa_gap_identity",
        &residuals,
        tol,
        format!("residual form; samples={}", samples.len()),
    ))
}

/// SUMMA2 check for the expectation-maximization iteration with
/// h_k(x) = KL(Mx, x^k), M the one-step operator.
pub fn summa2_check_emml(
    p: &NonnegMatrix,
    y: &[f64],
    trace: &IterationTrace,
    samples: &[Vec<f64>],
    tol: f64,
) -> Result<CheckReport> {
    require_normalized(p)?;
    let h = |k: usize, x: &[f64]| {
        let xk = iterate_or_err(trace, k)?;
        kl_vec(&emml_step(p, y, x)?, xk)
    };
    let f = |x: &[f64]| kl_vec(y, &p.mul(x)?);
    let mut report = check_summa2(h, f, trace, samples, tol)?;
    report.name = "summa2_emml".into();
    Ok(report)
}

/// SUMMA2 check with h = g for a family already in the SUMMA class
/// (exponential KL or least squares): membership transfers directly.
pub fn summa2_with_g_check(
    family: Family,
    matrix: &ProblemMatrix,
    data: &[f64],
    trace: &IterationTrace,
    samples: &[Vec<f64>],
    tol: f64,
) -> Result<CheckReport> {
    let mut report = match family {
        Family::Smart => {
            let p = matrix.as_nonneg()?;
            require_normalized(p)?;
            let h = |k: usize, x: &[f64]| {
                let prev = iterate_or_err(trace, k - 1)?;
                Ok(kl_vec(x, prev)? - kl_vec(&p.mul(x)?, &p.mul(prev)?)?)
            };
            let f = |x: &[f64]| kl_vec(&p.mul(x)?, data);
            check_summa2(h, f, trace, samples, tol)?
        }
        Family::Euclid => {
            let a = matrix.as_real()?;
            let jf = a.cols() as f64;
            let h = |k: usize, x: &[f64]| {
                let prev = iterate_or_err(trace, k - 1)?;
                Ok(jf
                    * sum_sq_diff(
                        euclid_r_array(a, data, prev)?.entries(),
                        euclid_r_array(a, data, x)?.entries(),
                    )?)
            };
            let f = |x: &[f64]| sum_sq_diff(data, &a.mul(x)?);
            check_summa2(h, f, trace, samples, tol)?
        }
        other => {
            return Err(Error::Config(format!(
                "h = g transfer applies to the SUMMA-class families, not `{}`",
                other.name()
            )))
        }
    };
    report.name = format!("summa2_with_g_{}", family.name());
    Ok(report)
}
