//! Sampled verification of the descent-to-infimum conditions.
//!
//! The conditions are universally quantified over x, so the monitors check
//! them on a sample set: the iterates themselves, known minimizers when the
//! caller has them, and random perturbations of iterates
//! ([`sample_around_trace`]). Slacks are normalized by 1 + |f(x^k)| before
//! comparison with the tolerance, since each inequality accumulates roundoff
//! proportional to the objective scale.
//!
//! Monitors record; they never abort. A probe of a property that fails
//! simply reports negative slacks.

use rand::Rng;

use super::instances::{am_to_pma, AmInstance};
use super::trace::IterationTrace;
use crate::error::{Error, Result};
use crate::exec;
use crate::report::CheckReport;

/// Default normalized slack tolerance for the inequality monitors.
pub const SLACK_TOL: f64 = 1e-10;

/// Sample space for perturbed iterates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleDomain {
    /// Multiplicative perturbations; keeps every coordinate positive.
    Positive,
    /// Multiplicative plus additive perturbations over the reals.
    Real,
}

/// Build a sample set around a trace: `extras` first (oracle minimizers and
/// the like), then a spread of the iterates, then random perturbations of
/// iterates until `n` samples exist.
pub fn sample_around_trace<R: Rng>(
    trace: &IterationTrace,
    n: usize,
    domain: SampleDomain,
    extras: &[Vec<f64>],
    rng: &mut R,
) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = extras.to_vec();
    let records = trace.records();
    if records.is_empty() {
        return out;
    }
    let take = (n / 4).clamp(1, records.len());
    let stride = records.len().div_ceil(take);
    for rec in records.iter().step_by(stride) {
        if out.len() >= n {
            break;
        }
        out.push(rec.x.clone());
    }
    while out.len() < n {
        let rec = &records[rng.random_range(0..records.len())];
        let x = match domain {
            SampleDomain::Positive => rec
                .x
                .iter()
                .map(|&v| v * 2f64.powf(rng.random_range(-1.0..1.0)))
                .collect(),
            SampleDomain::Real => {
                let scale = rec.x.iter().fold(1.0f64, |m, &v| m.max(v.abs()));
                rec.x
                    .iter()
                    .map(|&v| v * rng.random_range(0.5..1.5) + scale * rng.random_range(-0.5..0.5))
                    .collect()
            }
        };
        out.push(x);
    }
    out
}

fn require_nonempty(trace: &IterationTrace) -> Result<()> {
    if trace.is_empty() {
        return Err(Error::Evaluation("monitor needs a nonempty trace".into()));
    }
    Ok(())
}

/// Check the SUMMA inequality G_k(x) − G_k(x^k) >= g_{k+1}(x) over the
/// trace and samples.
///
/// `gk_gap(k, x)` must evaluate G_k(x) − G_k(x^k) and `g_next(k, x)` must
/// evaluate g_{k+1}(x), both for the 1-based record index k.
pub fn check_summa<G, H>(
    gk_gap: G,
    g_next: H,
    trace: &IterationTrace,
    samples: &[Vec<f64>],
    tol: f64,
) -> Result<CheckReport>
where
    G: Fn(usize, &[f64]) -> Result<f64> + Send + Sync,
    H: Fn(usize, &[f64]) -> Result<f64> + Send + Sync,
{
    require_nonempty(trace)?;
    let records = trace.records();
    let per_sample = exec::try_map(samples, |x| {
        let mut slacks = Vec::with_capacity(records.len());
        for rec in records {
            let norm = 1.0 + rec.f.abs();
            let slack = (gk_gap(rec.k, x)? - g_next(rec.k, x)?) / norm;
            slacks.push(slack);
        }
        Ok(slacks)
    })?;
    let slacks: Vec<f64> = per_sample.into_iter().flatten().collect();
    let notes = format!("iters={}; samples={}", records.len(), samples.len());
    Ok(CheckReport::from_slacks("summa", &slacks, tol, notes))
}

/// Check the SUMMA2 condition h_k(x) + f(x) >= h_{k+1}(x) + f(x^k) over the
/// trace and samples. `h(k, x)` evaluates h_k(x) for 1-based record index k.
pub fn check_summa2<H, F>(
    h: H,
    f: F,
    trace: &IterationTrace,
    samples: &[Vec<f64>],
    tol: f64,
) -> Result<CheckReport>
where
    H: Fn(usize, &[f64]) -> Result<f64> + Send + Sync,
    F: Fn(&[f64]) -> Result<f64> + Send + Sync,
{
    require_nonempty(trace)?;
    let records = trace.records();
    if records.len() < 2 {
        return Err(Error::Evaluation(
            "summa2 monitor needs at least two iterations".into(),
        ));
    }
    let per_sample = exec::try_map(samples, |x| {
        let fx = f(x)?;
        let mut slacks = Vec::with_capacity(records.len() - 1);
        for rec in &records[..records.len() - 1] {
            let k = rec.k;
            let norm = 1.0 + rec.f.abs();
            let slack = (h(k, x)? + fx - h(k + 1, x)? - rec.f) / norm;
            slacks.push(slack);
        }
        Ok(slacks)
    })?;
    let slacks: Vec<f64> = per_sample.into_iter().flatten().collect();
    let notes = format!("iters={}; samples={}", records.len(), samples.len());
    Ok(CheckReport::from_slacks("summa2", &slacks, tol, notes))
}

/// Companion points y^k = y(x^{k-1}) for each checkable step of an AM trace.
/// Steps whose predecessor iterate is unknown (k = 1 without a recorded
/// start) are skipped.
fn companions(am: &AmInstance, trace: &IterationTrace) -> Result<Vec<(usize, Vec<f64>)>> {
    let mut out = Vec::new();
    for rec in trace.records() {
        if let Some(prev) = trace.iterate(rec.k - 1) {
            out.push((rec.k, (am.argmin_y)(prev)?));
        }
    }
    Ok(out)
}

/// Check the three-point property Φ(x, y^k) − Φ(x^k, y^k) >= d(x, x^k) on
/// an AM trace, with d the induced distance of the instance.
pub fn check_3pp(
    am: &AmInstance,
    trace: &IterationTrace,
    samples: &[Vec<f64>],
    tol: f64,
) -> Result<CheckReport> {
    require_nonempty(trace)?;
    let pma = am_to_pma(am);
    let ys = companions(am, trace)?;
    if ys.is_empty() {
        return Err(Error::Evaluation(
            "three-point monitor needs a trace with a recorded start".into(),
        ));
    }
    let records = trace.records();
    let per_sample = exec::try_map(samples, |x| {
        let mut slacks = Vec::with_capacity(ys.len());
        for (k, yk) in &ys {
            let rec = &records[*k - 1];
            let norm = 1.0 + rec.f.abs();
            let lhs = (am.phi)(x, yk)? - (am.phi)(&rec.x, yk)?;
            let slack = (lhs - (pma.d)(x, &rec.x)?) / norm;
            slacks.push(slack);
        }
        Ok(slacks)
    })?;
    let slacks: Vec<f64> = per_sample.into_iter().flatten().collect();
    let notes = format!("steps={}; samples={}", ys.len(), samples.len());
    Ok(CheckReport::from_slacks("3pp", &slacks, tol, notes))
}

/// Check the weak three-point property
/// Φ(x, y^k) − Φ(x^k, y^{k+1}) >= d(x, x^k), plus the descent-transfer
/// inequality it implies: d(x, x^{k-1}) + f(x) >= d(x, x^k) + f(x^k).
/// Both must hold for the report to pass.
pub fn check_w3pp(
    am: &AmInstance,
    trace: &IterationTrace,
    samples: &[Vec<f64>],
    tol: f64,
) -> Result<CheckReport> {
    require_nonempty(trace)?;
    let pma = am_to_pma(am);
    let ys = companions(am, trace)?;
    if ys.is_empty() {
        return Err(Error::Evaluation(
            "weak three-point monitor needs a trace with a recorded start".into(),
        ));
    }
    let records = trace.records();
    let per_sample = exec::try_map(samples, |x| {
        let fx = (pma.f)(x)?;
        let mut weak = Vec::with_capacity(ys.len());
        let mut transfer = Vec::with_capacity(ys.len());
        for (k, yk) in &ys {
            let rec = &records[*k - 1];
            let norm = 1.0 + rec.f.abs();
            // y^{k+1} = y(x^k); Φ(x^k, y^{k+1}) is the recorded f(x^k).
            let lhs = (am.phi)(x, yk)? - rec.f;
            weak.push((lhs - (pma.d)(x, &rec.x)?) / norm);

            let prev = trace
                .iterate(*k - 1)
                .expect("companions() only yields steps with a predecessor");
            let s = ((pma.d)(x, prev)? + fx - (pma.d)(x, &rec.x)? - rec.f) / norm;
            transfer.push(s);
        }
        Ok((weak, transfer))
    })?;
    let mut weak = Vec::new();
    let mut transfer = Vec::new();
    for (w, t) in per_sample {
        weak.extend(w);
        transfer.extend(t);
    }
    let min_weak = weak.iter().copied().fold(f64::INFINITY, f64::min);
    let min_transfer = transfer.iter().copied().fold(f64::INFINITY, f64::min);
    let mut all = weak;
    all.extend(transfer);
    let notes = format!(
        "steps={}; samples={}; min weak-3pp slack={min_weak:.3e}; min descent-transfer slack={min_transfer:.3e}",
        ys.len(),
        samples.len()
    );
    Ok(CheckReport::from_slacks("w3pp", &all, tol, notes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::framework::{run_am_from, StoppingRule};
    use rand::SeedableRng;
    use std::sync::Arc;

    // Coupling Φ(x,y) = (x-y)² + y²/2 over scalars: y(x) = x/... let's use
    // a clean quadratic with known partial minimizers:
    // Φ(x,y) = (x-y)² + y². argmin_y: dΦ/dy = -2(x-y) + 2y = 0 → y = x/2.
    // argmin_x given y: x = y.
    fn quadratic_am() -> AmInstance {
        AmInstance {
            phi: Arc::new(|x: &[f64], y: &[f64]| Ok((x[0] - y[0]).powi(2) + y[0] * y[0])),
            argmin_x: Arc::new(|y: &[f64]| Ok(y.to_vec())),
            argmin_y: Arc::new(|x: &[f64]| Ok(vec![x[0] / 2.0])),
        }
    }

    #[test]
    fn three_point_holds_for_quadratic_coupling() {
        // f(x) = Φ(x, x/2) = x²/2; d(x,z) = (x - z/2)² - (x/2)²...
        let am = quadratic_am();
        let stop = StoppingRule::new(30, 0.0, 1e-26).unwrap();
        let trace = run_am_from(&am, &[8.0], &stop).unwrap();
        assert!(trace.len() >= 3);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let samples = sample_around_trace(&trace, 50, SampleDomain::Real, &[], &mut rng);
        let r = check_3pp(&am, &trace, &samples, SLACK_TOL).unwrap();
        assert!(r.pass, "{r:?}");
        let r = check_w3pp(&am, &trace, &samples, SLACK_TOL).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn summa_monitor_flags_a_false_auxiliary() {
        // Take the quadratic AM trace but claim an absurdly large g_{k+1}:
        // the monitor must report negative slack, not crash.
        let am = quadratic_am();
        let stop = StoppingRule::new(10, 0.0, 1e-26).unwrap();
        let trace = run_am_from(&am, &[8.0], &stop).unwrap();
        let pma = am_to_pma(&am);
        let records: Vec<Vec<f64>> = trace.records().iter().map(|r| r.x.clone()).collect();
        let gap = {
            let pma = pma.clone();
            let trace_x = records.clone();
            move |k: usize, x: &[f64]| {
                let xk = &trace_x[k - 1];
                Ok((pma.f)(x)? + (pma.d)(x, xk)? - (pma.f)(xk)?)
            }
        };
        let g_fake = |_k: usize, x: &[f64]| Ok(1000.0 + x[0].abs());
        let samples = vec![vec![1.0], vec![2.0]];
        let r = check_summa(gap, g_fake, &trace, &samples, SLACK_TOL).unwrap();
        assert!(!r.pass);
        assert!(r.worst_slack < -1.0);
    }

    #[test]
    fn sample_generation_shapes() {
        let am = quadratic_am();
        let stop = StoppingRule::new(10, 0.0, 1e-26).unwrap();
        let trace = run_am_from(&am, &[8.0], &stop).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let extras = vec![vec![0.0]];
        let s = sample_around_trace(&trace, 20, SampleDomain::Positive, &extras, &mut rng);
        assert_eq!(s.len(), 20);
        assert_eq!(s[0], vec![0.0]);
        assert!(s.iter().skip(1).all(|v| v[0] > 0.0));
    }
}
