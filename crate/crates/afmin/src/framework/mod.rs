//! Generic descent iteration drivers and inequality monitors.
//!
//! Every solver in this crate fits one mold: at step k it minimizes
//! G_k(x) = f(x) + g_k(x) where the auxiliary g_k is nonnegative and
//! vanishes at the previous iterate. That alone forces the objective values
//! downhill; [`run_af`] drives any such step function and records the
//! descent as an [`IterationTrace`], aborting loudly if a step ever raises
//! the objective.
//!
//! Whether the descent reaches the infimum is a property of the auxiliary
//! functions. The monitors in this module sample the two classical
//! sufficient conditions — the SUMMA inequality and its weaker SUMMA2
//! variant — plus the three-point properties that certify them for
//! alternating minimization. Monitors only record; they never abort a run.

mod instances;
mod monitors;
mod trace;

pub use instances::{
    am_to_pma, mm_to_pma, AmInstance, DynCoupling, DynMap, DynObjective, MmInstance, PmaInstance,
};
pub use monitors::{
    check_3pp, check_summa, check_summa2, check_w3pp, sample_around_trace, SampleDomain, SLACK_TOL,
};
pub use trace::{IterationTrace, StopReason, StoppingRule, TraceRecord};

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Relative tolerance under which an objective increase counts as a descent
/// violation rather than roundoff.
const DESCENT_TOL: f64 = 1e-10;

/// Context handed to a slack recorder on each iteration.
pub struct SlackCtx<'a> {
    pub k: usize,
    pub x_new: &'a [f64],
    pub x_prev: &'a [f64],
    pub f_new: f64,
    pub f_prev: f64,
    pub step_distance: f64,
}

/// Drive a descent step to a trace. See [`run_af_with_slacks`] for the
/// variant that records named per-iteration slacks.
pub fn run_af<S, F, D>(
    step: S,
    f: F,
    step_distance: D,
    x0: &[f64],
    stop: &StoppingRule,
) -> Result<IterationTrace>
where
    S: FnMut(&[f64]) -> Result<Vec<f64>>,
    F: Fn(&[f64]) -> Result<f64>,
    D: Fn(&[f64], &[f64]) -> Result<f64>,
{
    run_af_with_slacks(step, f, step_distance, |_| BTreeMap::new(), x0, stop)
}

/// Drive a descent step function from `x0` until the stopping rule fires.
///
/// `step` maps the previous iterate to the next; `f` is the objective;
/// `step_distance(new, prev)` is the solver's own distance between
/// consecutive iterates (what `stop.step_tol` is compared against); `slacks`
/// may record named diagnostics per iteration, which become trace columns.
///
/// Step failures abort with the offending iteration index, and so does any
/// objective increase beyond roundoff — a broken step is reported, never
/// silently accepted.
pub fn run_af_with_slacks<S, F, D, L>(
    mut step: S,
    f: F,
    step_distance: D,
    mut slacks: L,
    x0: &[f64],
    stop: &StoppingRule,
) -> Result<IterationTrace>
where
    S: FnMut(&[f64]) -> Result<Vec<f64>>,
    F: Fn(&[f64]) -> Result<f64>,
    D: Fn(&[f64], &[f64]) -> Result<f64>,
    L: FnMut(&SlackCtx) -> BTreeMap<String, f64>,
{
    let mut f_prev = f(x0)?;
    if !f_prev.is_finite() {
        return Err(Error::Domain(format!(
            "objective at the starting vector is {f_prev}"
        )));
    }
    let mut x_prev = x0.to_vec();
    let mut trace = IterationTrace::new(Some(x0.to_vec()));

    for k in 1..=stop.max_iters {
        let x = step(&x_prev).map_err(|e| Error::StepFailed {
            iter: k,
            source: Box::new(e),
        })?;
        let f_new = f(&x)?;
        if f_new > f_prev + DESCENT_TOL * (1.0 + f_prev.abs()) {
            return Err(Error::DescentViolation {
                iter: k,
                prev: f_prev,
                next: f_new,
            });
        }
        let sd = step_distance(&x, &x_prev)?;
        let ctx = SlackCtx {
            k,
            x_new: &x,
            x_prev: &x_prev,
            f_new,
            f_prev,
            step_distance: sd,
        };
        let named = slacks(&ctx);
        trace.push(TraceRecord {
            k,
            x: x.clone(),
            f: f_new,
            step_distance: sd,
            slacks: named,
        })?;

        if stop.f_tol > 0.0 && f_prev - f_new < stop.f_tol {
            trace.stop = StopReason::FTol;
            return Ok(trace);
        }
        if sd < stop.step_tol {
            trace.stop = StopReason::StepTol;
            return Ok(trace);
        }
        x_prev = x;
        f_prev = f_new;
    }
    trace.stop = StopReason::MaxIters;
    Ok(trace)
}

/// Alternate the two partial minimizers of an AM instance starting from a
/// point `y0` in the companion space.
///
/// Each record holds the iterate x^k = argmin_x Φ(x, y^{k-1}), its value
/// f(x^k) = Φ(x^k, y^k) with y^k = y(x^k), and the induced step distance
/// d(x^k, x^{k-1}) = Φ(x^k, y^{k-1}) − Φ(x^k, y^k). The recorded value is
/// cross-checked against Φ(x, y(x)) by construction: both come from the
/// same partial minimizer, so a disagreement surfaces as a descent failure.
pub fn run_am(am: &AmInstance, y0: &[f64], stop: &StoppingRule) -> Result<IterationTrace> {
    run_am_impl(am, y0.to_vec(), None, stop)
}

/// [`run_am`] starting from a point `x0` in iterate space: the companion
/// start is y(x0), and `x0` is recorded on the trace so monitors can reach
/// the first step.
pub fn run_am_from(am: &AmInstance, x0: &[f64], stop: &StoppingRule) -> Result<IterationTrace> {
    let y0 = (am.argmin_y)(x0)?;
    run_am_impl(am, y0, Some(x0.to_vec()), stop)
}

fn run_am_impl(
    am: &AmInstance,
    y0: Vec<f64>,
    x0: Option<Vec<f64>>,
    stop: &StoppingRule,
) -> Result<IterationTrace> {
    let mut trace = IterationTrace::new(x0);
    let mut y_prev = y0;
    let mut f_prev = f64::INFINITY;

    for k in 1..=stop.max_iters {
        let x = (am.argmin_x)(&y_prev).map_err(|e| Error::StepFailed {
            iter: k,
            source: Box::new(e),
        })?;
        let y = (am.argmin_y)(&x)?;
        let f_new = (am.phi)(&x, &y)?;
        // Induced step distance: how much worse the stale companion is.
        let sd = (am.phi)(&x, &y_prev)? - f_new;
        if f_new > f_prev + DESCENT_TOL * (1.0 + f_prev.abs()) {
            return Err(Error::DescentViolation {
                iter: k,
                prev: f_prev,
                next: f_new,
            });
        }
        trace.push(TraceRecord {
            k,
            x,
            f: f_new,
            step_distance: sd,
            slacks: BTreeMap::new(),
        })?;

        if k > 1 && stop.f_tol > 0.0 && f_prev - f_new < stop.f_tol {
            trace.stop = StopReason::FTol;
            return Ok(trace);
        }
        if sd < stop.step_tol {
            trace.stop = StopReason::StepTol;
            return Ok(trace);
        }
        y_prev = y;
        f_prev = f_new;
    }
    trace.stop = StopReason::MaxIters;
    Ok(trace)
}
