//! Full-solve drivers: wire a step operator, its objective and its step
//! metric into the generic descent loop.
//!
//! The KL-family drivers never trust the column scaling of the input: they
//! normalize the system first (unit column sums) and run in normalized
//! coordinates. The returned [`KlRun`] carries the normalized system next to
//! the trace so diagnostics stay coordinate-consistent, and maps the final
//! iterate back to original coordinates for reporting.
//!
//! Every trace records two named slack columns per iteration: `descent`
//! (the objective drop, nonnegative by construction) and, for the KL
//! families, `mass` (the family's mass-law slack; see the step docs).

use std::collections::BTreeMap;

use super::{
    emml_step, euclid_l_step, hellinger_t_step, landweber_gamma_bound, landweber_step,
    pearson_r_step, smart_step,
};
use crate::distances::{hellinger, kl_vec, pearson, sum_sq_diff, weighted_sq};
use crate::error::{Error, Result};
use crate::framework::{run_af_with_slacks, IterationTrace, SlackCtx, StoppingRule};
use crate::model::{normalize_columns, Family, NonnegMatrix, ProblemInstance, RealMatrix};

/// Step-size and termination configuration for a solve.
#[derive(Debug, Clone, Default)]
pub struct SolverConfig {
    /// Landweber step size; when absent the driver uses 95% of the
    /// spectral bound. Ignored by the other families.
    pub gamma: Option<f64>,
    pub rule: StoppingRule,
    /// KL-family matrices with zero entries can hit degenerate ratios; by
    /// default that is the caller's risk (front ends warn). Set this to
    /// refuse such matrices outright.
    pub require_positive_matrix: bool,
}

/// A completed KL-family run, in the normalized coordinates it ran in.
#[derive(Debug, Clone)]
pub struct KlRun {
    pub family: Family,
    /// Column-normalized system matrix (unit column sums).
    pub p: NonnegMatrix,
    pub y: Vec<f64>,
    /// Starting vector in normalized coordinates.
    pub x0: Vec<f64>,
    /// Original column sums; divide a normalized iterate by these to get
    /// back to original coordinates.
    pub col_scale: Vec<f64>,
    pub trace: IterationTrace,
}

impl KlRun {
    /// Final iterate mapped back to the coordinates of the input system.
    pub fn x_final_original(&self) -> Option<Vec<f64>> {
        self.trace.final_x().map(|x| {
            x.iter()
                .zip(&self.col_scale)
                .map(|(&v, &s)| v / s)
                .collect()
        })
    }
}

fn kl_mass_slack(family: Family, x: &[f64], y_total: f64) -> f64 {
    let total: f64 = x.iter().sum();
    match family {
        Family::Pearson => total - y_total,
        _ => y_total - total,
    }
}

fn solve_kl_family(
    family: Family,
    p: &NonnegMatrix,
    y: &[f64],
    x0: &[f64],
    rule: &StoppingRule,
) -> Result<KlRun> {
    let col_scale = p.col_sums().to_vec();
    let (pn, x0n) = normalize_columns(p, x0)?;
    let y_total: f64 = y.iter().sum();

    let step = |x: &[f64]| match family {
        Family::Smart => smart_step(&pn, y, x),
        Family::Emml => emml_step(&pn, y, x),
        Family::Hellinger => hellinger_t_step(&pn, y, x),
        Family::Pearson => pearson_r_step(&pn, y, x),
        _ => unreachable!("not a KL-family solver"),
    };
    let f = |x: &[f64]| {
        let px = pn.mul(x)?;
        match family {
            Family::Smart => kl_vec(&px, y),
            Family::Emml => kl_vec(y, &px),
            Family::Hellinger => hellinger(y, &px),
            Family::Pearson => pearson(y, &px),
            _ => unreachable!(),
        }
    };
    let step_distance = |new: &[f64], prev: &[f64]| match family {
        Family::Smart => kl_vec(prev, new),
        Family::Emml => kl_vec(new, prev),
        Family::Hellinger => hellinger(prev, new),
        Family::Pearson => pearson(new, prev),
        _ => unreachable!(),
    };
    let slacks = |ctx: &SlackCtx| {
        let mut m = BTreeMap::new();
        m.insert("descent".to_string(), ctx.f_prev - ctx.f_new);
        m.insert(
            "mass".to_string(),
            kl_mass_slack(family, ctx.x_new, y_total),
        );
        m
    };

    let trace = run_af_with_slacks(step, f, step_distance, slacks, &x0n, rule)?;
    Ok(KlRun {
        family,
        p: pn,
        y: y.to_vec(),
        x0: x0n,
        col_scale,
        trace,
    })
}

/// Minimize KL(Px, y) with the multiplicative exponential iteration.
pub fn solve_smart(p: &NonnegMatrix, y: &[f64], x0: &[f64], rule: &StoppingRule) -> Result<KlRun> {
    solve_kl_family(Family::Smart, p, y, x0, rule)
}

/// Minimize KL(y, Px) with the expectation-maximization iteration.
pub fn solve_emml(p: &NonnegMatrix, y: &[f64], x0: &[f64], rule: &StoppingRule) -> Result<KlRun> {
    solve_kl_family(Family::Emml, p, y, x0, rule)
}

/// Minimize H(y, Px) with the square-root-ratio iteration.
pub fn solve_hellinger(
    p: &NonnegMatrix,
    y: &[f64],
    x0: &[f64],
    rule: &StoppingRule,
) -> Result<KlRun> {
    solve_kl_family(Family::Hellinger, p, y, x0, rule)
}

/// Descend φ²(y, Px) with the squared-ratio iteration.
pub fn solve_pearson(
    p: &NonnegMatrix,
    y: &[f64],
    x0: &[f64],
    rule: &StoppingRule,
) -> Result<KlRun> {
    solve_kl_family(Family::Pearson, p, y, x0, rule)
}

fn euclid_objective<'a>(a: &'a RealMatrix, b: &'a [f64]) -> impl Fn(&[f64]) -> Result<f64> + 'a {
    move |x: &[f64]| sum_sq_diff(b, &a.mul(x)?)
}

/// Minimize ‖b − Ax‖² with the per-column weighted relaxation.
///
/// The step metric (and the `step_tol` target) is J·Σ_j c_j(Δx_j)², the
/// quantity the per-iteration objective drop dominates.
pub fn solve_euclid(
    a: &RealMatrix,
    b: &[f64],
    x0: &[f64],
    rule: &StoppingRule,
) -> Result<IterationTrace> {
    let jf = a.cols() as f64;
    let c = a.col_sq_sums().to_vec();
    run_af_with_slacks(
        |x| euclid_l_step(a, b, x),
        euclid_objective(a, b),
        move |new: &[f64], prev: &[f64]| Ok(jf * weighted_sq(new, prev, &c)?),
        descent_slack,
        x0,
        rule,
    )
}

/// Minimize ‖b − Ax‖² with the relaxed gradient iteration.
///
/// `gamma` must lie in (0, 2/ρ(AᵀA)); the bound is estimated by the power
/// method with a 1% safety margin, and `None` selects 95% of it.
pub fn solve_landweber(
    a: &RealMatrix,
    b: &[f64],
    x0: &[f64],
    gamma: Option<f64>,
    rule: &StoppingRule,
) -> Result<IterationTrace> {
    let bound = landweber_gamma_bound(a)?;
    let gamma = gamma.unwrap_or(0.95 * bound);
    if !(gamma.is_finite() && gamma > 0.0 && gamma < bound) {
        return Err(Error::Config(format!(
            "landweber step size {gamma} outside (0, {bound:.6}); the admissible range is \
             0 < gamma < 2/rho(A^T A)"
        )));
    }
    run_af_with_slacks(
        |x| landweber_step(a, b, x, gamma),
        euclid_objective(a, b),
        |new: &[f64], prev: &[f64]| sum_sq_diff(new, prev),
        descent_slack,
        x0,
        rule,
    )
}

fn descent_slack(ctx: &SlackCtx) -> BTreeMap<String, f64> {
    let mut m = BTreeMap::new();
    m.insert("descent".to_string(), ctx.f_prev - ctx.f_new);
    m
}

/// Gradient descent on a caller-supplied objective, with the squared
/// Euclidean step metric.
pub fn run_gradient_descent<F, G>(
    f: F,
    grad_f: G,
    gamma: f64,
    x0: &[f64],
    rule: &StoppingRule,
) -> Result<IterationTrace>
where
    F: Fn(&[f64]) -> Result<f64>,
    G: Fn(&[f64]) -> Vec<f64>,
{
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::Config(format!(
            "gradient step size must be finite and positive, got {gamma}"
        )));
    }
    run_af_with_slacks(
        |x| Ok(super::gradient_descent_step(&grad_f, x, gamma)),
        f,
        |new: &[f64], prev: &[f64]| sum_sq_diff(new, prev),
        descent_slack,
        x0,
        rule,
    )
}

/// Quadratic-majorizer descent x ← x − B⁻¹∇f(x) through a caller solver.
pub fn run_quadratic_mm<F, G, SB>(
    f: F,
    grad_f: G,
    solve_b: SB,
    x0: &[f64],
    rule: &StoppingRule,
) -> Result<IterationTrace>
where
    F: Fn(&[f64]) -> Result<f64>,
    G: Fn(&[f64]) -> Vec<f64>,
    SB: Fn(&[f64]) -> Result<Vec<f64>>,
{
    run_af_with_slacks(
        |x| super::quadratic_mm_step(&grad_f, &solve_b, x),
        f,
        |new: &[f64], prev: &[f64]| sum_sq_diff(new, prev),
        descent_slack,
        x0,
        rule,
    )
}

/// Outcome of [`solve`]: the trace (in the solver's working coordinates)
/// and the final iterate mapped back to the input coordinates.
#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub family: Family,
    pub trace: IterationTrace,
    pub x_final: Vec<f64>,
}

/// Solve a problem instance with its family's iteration.
pub fn solve(inst: &ProblemInstance, cfg: &SolverConfig) -> Result<SolveOutcome> {
    match inst.family {
        Family::Smart | Family::Emml | Family::Hellinger | Family::Pearson => {
            if cfg.require_positive_matrix && !inst.matrix.as_nonneg()?.all_positive() {
                return Err(Error::Config(
                    "system matrix has zero entries and strict positivity was requested".into(),
                ));
            }
            let run = solve_kl_family(
                inst.family,
                inst.matrix.as_nonneg()?,
                &inst.data,
                &inst.start,
                &cfg.rule,
            )?;
            let x_final = run
                .x_final_original()
                .ok_or_else(|| Error::Evaluation("empty trace".into()))?;
            Ok(SolveOutcome {
                family: inst.family,
                trace: run.trace,
                x_final,
            })
        }
        Family::Euclid => {
            let trace = solve_euclid(inst.matrix.as_real()?, &inst.data, &inst.start, &cfg.rule)?;
            let x_final = trace
                .final_x()
                .ok_or_else(|| Error::Evaluation("empty trace".into()))?
                .to_vec();
            Ok(SolveOutcome {
                family: inst.family,
                trace,
                x_final,
            })
        }
        Family::Landweber => {
            let trace = solve_landweber(
                inst.matrix.as_real()?,
                &inst.data,
                &inst.start,
                cfg.gamma,
                &cfg.rule,
            )?;
            let x_final = trace
                .final_x()
                .ok_or_else(|| Error::Evaluation("empty trace".into()))?
                .to_vec();
            Ok(SolveOutcome {
                family: inst.family,
                trace,
                x_final,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rule() -> StoppingRule {
        StoppingRule::new(500, 0.0, 1e-14).unwrap()
    }

    #[test]
    fn kl_drivers_normalize_and_map_back() {
        // Unnormalized single-column system: the driver must rescale, solve,
        // and undo the scaling in the reported iterate.
        let p = NonnegMatrix::new(2, 1, vec![1.0, 1.0]).unwrap(); // column sum 2
        let y = vec![1.0, 3.0];
        let run = solve_smart(&p, &y, &[0.5], &rule()).unwrap();
        assert!(run.p.is_normalized(1e-12));
        // normalized solution is 2*sqrt(3); original coordinates halve it
        let x = run.x_final_original().unwrap();
        assert_abs_diff_eq!(x[0], 3f64.sqrt(), epsilon = 1e-10);
    }

    #[test]
    fn one_column_families_hit_their_minima_in_one_step() {
        let p = NonnegMatrix::new(2, 1, vec![0.5, 0.5]).unwrap();
        let y = vec![1.0, 3.0];
        let expect = [
            (Family::Smart, 2.0 * 3f64.sqrt()),
            (Family::Emml, 4.0),
            (Family::Hellinger, 2.0 + 3f64.sqrt()),
            (Family::Pearson, 2.0 * 5f64.sqrt()),
        ];
        for (family, want) in expect {
            let run = solve_kl_family(family, &p, &y, &[1.0], &rule()).unwrap();
            let x = run.trace.final_x().unwrap();
            assert_abs_diff_eq!(x[0], want, epsilon = 1e-10);
            // single-column couplings converge in one productive step
            assert!(
                run.trace.len() <= 2,
                "family {family:?} took {}",
                run.trace.len()
            );
        }
    }

    #[test]
    fn traces_descend_and_record_slacks() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let (p, y, x0) = crate::synth::random_kl_instance(&mut rng, 5, 3, false).unwrap();
        for family in [
            Family::Smart,
            Family::Emml,
            Family::Hellinger,
            Family::Pearson,
        ] {
            let run = solve_kl_family(family, &p, &y, &x0, &rule()).unwrap();
            let fs: Vec<f64> = run.trace.records().iter().map(|r| r.f).collect();
            assert!(fs.windows(2).all(|w| w[1] <= w[0] + 1e-12));
            for rec in run.trace.records() {
                assert!(rec.slacks["descent"] >= -1e-12);
                if family != Family::Emml {
                    assert!(rec.slacks["mass"] >= -1e-10, "{family:?}: {rec:?}");
                } else {
                    assert!(rec.slacks["mass"].abs() <= 1e-10 * (1.0 + y.iter().sum::<f64>()));
                }
            }
        }
    }

    #[test]
    fn euclid_driver_fixed_point_and_limit() {
        let a = RealMatrix::new(1, 2, vec![1.0, 2.0]).unwrap();
        let trace = solve_euclid(&a, &[3.0], &[0.0, 0.0], &rule()).unwrap();
        let x = trace.final_x().unwrap();
        assert_abs_diff_eq!(x[0], 1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(x[1], 0.75, epsilon = 1e-12);
        assert!(trace.stop.converged());
    }

    #[test]
    fn landweber_gamma_validation() {
        let a = RealMatrix::new(1, 2, vec![1.0, 1.0]).unwrap();
        // rho(AᵀA) = 2 so the bound is just under 1.0
        let err = solve_landweber(&a, &[2.0], &[0.0, 0.0], Some(5.0), &rule()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("2/rho(A^T A)"), "message was: {msg}");

        let trace = solve_landweber(&a, &[2.0], &[0.0, 0.0], Some(0.5), &rule()).unwrap();
        let x = trace.final_x().unwrap();
        assert_abs_diff_eq!(x[0], 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(x[1], 1.0, epsilon = 1e-10);

        // default step size is accepted and converges
        let trace = solve_landweber(&a, &[2.0], &[0.0, 0.0], None, &rule()).unwrap();
        assert!(trace.stop.converged());
    }

    #[test]
    fn landweber_scale_covariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let a = crate::synth::random_real_matrix(&mut rng, 4, 3);
        let b: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
        let x0: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let alpha = 2.5;
        let short = StoppingRule::new(40, 0.0, 0.0).unwrap();
        let t1 = solve_landweber(&a, &b, &x0, Some(0.1), &short).unwrap();
        let b2: Vec<f64> = b.iter().map(|v| alpha * v).collect();
        let x02: Vec<f64> = x0.iter().map(|v| alpha * v).collect();
        let t2 = solve_landweber(&a, &b2, &x02, Some(0.1), &short).unwrap();
        for (r1, r2) in t1.records().iter().zip(t2.records()) {
            for (u, v) in r1.x.iter().zip(&r2.x) {
                assert!((alpha * u - v).abs() <= 1e-12 * (1.0 + v.abs()));
            }
        }
        // same covariance for the weighted relaxation
        let t1 = solve_euclid(&a, &b, &x0, &short).unwrap();
        let t2 = solve_euclid(&a, &b2, &x02, &short).unwrap();
        for (r1, r2) in t1.records().iter().zip(t2.records()) {
            for (u, v) in r1.x.iter().zip(&r2.x) {
                assert!((alpha * u - v).abs() <= 1e-12 * (1.0 + v.abs()));
            }
        }
    }

    #[test]
    fn gradient_descent_driver_quadratic() {
        // f(x) = ½x², γ=1: single step to 0
        let trace = run_gradient_descent(
            |x| Ok(0.5 * x[0] * x[0]),
            |x| x.to_vec(),
            1.0,
            &[3.0],
            &rule(),
        )
        .unwrap();
        assert_eq!(trace.final_x().unwrap(), &[0.0]);
        assert!(trace.len() <= 2);
    }

    #[test]
    fn solve_dispatch_covers_families() {
        use crate::model::{ProblemInstance, ProblemMatrix};
        let p = ProblemMatrix::Nonneg(NonnegMatrix::new(2, 1, vec![0.5, 0.5]).unwrap());
        let inst = ProblemInstance::new(Family::Emml, p, vec![1.0, 3.0], vec![1.0]).unwrap();
        let out = solve(&inst, &SolverConfig::default()).unwrap();
        assert_abs_diff_eq!(out.x_final[0], 4.0, epsilon = 1e-10);

        let a = ProblemMatrix::Real(RealMatrix::new(1, 2, vec![1.0, 2.0]).unwrap());
        let inst = ProblemInstance::new(Family::Euclid, a, vec![3.0], vec![0.0, 0.0]).unwrap();
        let out = solve(&inst, &SolverConfig::default()).unwrap();
        assert_abs_diff_eq!(out.x_final[0], 1.5, epsilon = 1e-10);
    }
}
