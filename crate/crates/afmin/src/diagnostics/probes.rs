//! Probes of open questions. Probes compute and report; they never carry a
//! pass threshold, so their reports always pass (see [`CheckReport::probe`]).

use crate::distances::{hellinger, kl_vec, pearson, sum_sq_diff, weighted_sq};
use crate::error::{Error, Result};
use crate::exec;
use crate::framework::IterationTrace;
use crate::model::{kl_q_array, kl_r_array, Family, NonnegMatrix, RealMatrix};
use crate::report::CheckReport;
use crate::solvers::{euclid_l_step, hellinger_t_step, pearson_r_step};

type StepFn = fn(&NonnegMatrix, &[f64], &[f64]) -> Result<Vec<f64>>;
type PairDist = fn(&[f64], &[f64]) -> Result<f64>;
type DynObjective<'a> = Box<dyn Fn(&[f64]) -> Result<f64> + Send + Sync + 'a>;

fn stats(name: &str, residuals: &[f64]) -> String {
    if residuals.is_empty() {
        return format!("{name}: no samples");
    }
    let max = residuals.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    let mean = residuals.iter().map(|r| r.abs()).sum::<f64>() / residuals.len() as f64;
    format!(
        "{name}: n={} max|res|={max:.3e} mean|res|={mean:.3e}",
        residuals.len()
    )
}

/// Probe whether the Hellinger couplings satisfy the same difference
/// identity the expectation family does:
///
///   H(r(z), q(x)) − H(r(x), q(x)) =? H(r(z), r(x))
///
/// The residual is reported per sampled pair, and separately for the
/// restricted pairs x = Tz (where the identity would already suffice for
/// the convergence argument). No pass threshold: this is open.
pub fn hrr_probe(
    p: &NonnegMatrix,
    y: &[f64],
    pairs: &[(Vec<f64>, Vec<f64>)],
) -> Result<CheckReport> {
    let residual = |x: &[f64], z: &[f64]| -> Result<f64> {
        let rz = kl_r_array(p, y, z)?;
        let rx = kl_r_array(p, y, x)?;
        let qx = kl_q_array(p, x)?;
        Ok(hellinger(rz.entries(), qx.entries())?
            - hellinger(rx.entries(), qx.entries())?
            - hellinger(rz.entries(), rx.entries())?)
    };
    let general = exec::try_map(pairs, |(x, z)| residual(x, z))?;
    let restricted = exec::try_map(pairs, |(_, z)| {
        let tz = hellinger_t_step(p, y, z)?;
        residual(&tz, z)
    })?;
    let slacks: Vec<f64> = general.iter().map(|r| -r.abs()).collect();
    let notes = format!(
        "difference-identity probe; {}; {}",
        stats("general pairs", &general),
        stats("x=Tz pairs", &restricted)
    );
    Ok(CheckReport::probe("hrr_probe", &slacks, notes))
}

/// Probe SUMMA2 membership for the Hellinger or Pearson iteration with the
/// candidate h_k(x) = D(step(x), x^k), the direct analogue of the
/// expectation-family certificate. Reports the minimum sampled slack of
/// h_k(x) + f(x) − h_{k+1}(x) − f(x^k); suspected nonnegative, not proved.
pub fn summa2_candidate_probe(
    family: Family,
    p: &NonnegMatrix,
    y: &[f64],
    trace: &IterationTrace,
    samples: &[Vec<f64>],
) -> Result<CheckReport> {
    if trace.len() < 2 {
        return Err(Error::Evaluation(
            "probe needs at least two iterations".into(),
        ));
    }
    let (step, dist, f): (StepFn, PairDist, DynObjective) = match family {
        Family::Hellinger => (
            hellinger_t_step,
            hellinger,
            Box::new(|x: &[f64]| hellinger(y, &p.mul(x)?)),
        ),
        Family::Pearson => (
            pearson_r_step,
            pearson,
            Box::new(|x: &[f64]| pearson(y, &p.mul(x)?)),
        ),
        other => {
            return Err(Error::Config(format!(
                "the SUMMA2 candidate probe covers the Hellinger and Pearson families, not `{}`",
                other.name()
            )))
        }
    };
    let records = trace.records();
    let per_sample = exec::try_map(samples, |x| {
        let sx = step(p, y, x)?;
        let fx = f(x)?;
        let mut slacks = Vec::with_capacity(records.len() - 1);
        for w in records.windows(2) {
            let (cur, next) = (&w[0], &w[1]);
            let h_k = dist(&sx, &cur.x)?;
            let h_next = dist(&sx, &next.x)?;
            slacks.push((h_k + fx - h_next - cur.f) / (1.0 + cur.f.abs()));
        }
        Ok(slacks)
    })?;
    let slacks: Vec<f64> = per_sample.into_iter().flatten().collect();
    let min = slacks.iter().copied().fold(f64::INFINITY, f64::min);
    let notes = format!(
        "candidate h_k(x)=D(step(x); x^k); min sampled slack={min:.3e}; open question - no threshold",
    );
    Ok(CheckReport::probe(
        format!("summa2_probe_{}", family.name()),
        &slacks,
        notes,
    ))
}

/// Probe the stronger displayed least-squares SUMMA2 inequality with
/// h_k(x) = J·Σ c_j((Lx)_j − x^k_j)²:
///
///   h_k(x) − h_{k+1}(x) >= f(x^k) − f(x) + J·Σ c_j((Lx)_j − x_j)²
///
/// The plain SUMMA2 slack (without the extra quadratic term) is reported
/// alongside. Negative displayed slacks flag the reading of the inequality,
/// not the implementation, so this is a probe.
pub fn euclid_summa2_reading_probe(
    a: &RealMatrix,
    b: &[f64],
    trace: &IterationTrace,
    samples: &[Vec<f64>],
) -> Result<CheckReport> {
    if trace.len() < 2 {
        return Err(Error::Evaluation(
            "probe needs at least two iterations".into(),
        ));
    }
    let jf = a.cols() as f64;
    let c = a.col_sq_sums();
    let records = trace.records();
    let per_sample = exec::try_map(samples, |x| {
        let lx = euclid_l_step(a, b, x)?;
        let fx = sum_sq_diff(b, &a.mul(x)?)?;
        let extra = jf * weighted_sq(&lx, x, c)?;
        let mut displayed = Vec::with_capacity(records.len() - 1);
        let mut plain = Vec::with_capacity(records.len() - 1);
        for w in records.windows(2) {
            let (cur, next) = (&w[0], &w[1]);
            let h_k = jf * weighted_sq(&lx, &cur.x, c)?;
            let h_next = jf * weighted_sq(&lx, &next.x, c)?;
            let norm = 1.0 + cur.f.abs();
            plain.push((h_k + fx - h_next - cur.f) / norm);
            displayed.push((h_k - h_next - cur.f + fx - extra) / norm);
        }
        Ok((displayed, plain))
    })?;
    let mut displayed = Vec::new();
    let mut plain = Vec::new();
    for (d, p) in per_sample {
        displayed.extend(d);
        plain.extend(p);
    }
    let min_disp = displayed.iter().copied().fold(f64::INFINITY, f64::min);
    let min_plain = plain.iter().copied().fold(f64::INFINITY, f64::min);
    let flag = if min_disp < -1e-10 {
        "; displayed form went negative - reading flagged"
    } else {
        ""
    };
    let notes =
        format!("min displayed slack={min_disp:.3e}; min plain SUMMA2 slack={min_plain:.3e}{flag}");
    Ok(CheckReport::probe(
        "euclid_summa2_reading",
        &displayed,
        notes,
    ))
}

/// Parallel slack columns for the two KL-drop inequalities along one
/// Hellinger run against a minimizer x̂:
///
///   drop_k >= 2·(f(x^{k+1}) − f(x̂))   (distance-to-minimizer form)
///   drop_k >= 2·(f(x^k)     − f(x̂))   (induced-proximal form)
///
/// with drop_k = KL(x̂, x^k) − KL(x̂, x^{k+1}). The two right-hand sides
/// differ only in which iterate's value appears; how alike the slack
/// columns run is the observation of interest.
#[derive(Debug, Clone)]
pub struct HellingerComparison {
    /// (k, slack of the distance form, slack of the induced-proximal form)
    pub rows: Vec<(usize, f64, f64)>,
}

impl HellingerComparison {
    pub fn reports(&self) -> (CheckReport, CheckReport) {
        let a: Vec<f64> = self.rows.iter().map(|r| r.1).collect();
        let b: Vec<f64> = self.rows.iter().map(|r| r.2).collect();
        (
            CheckReport::probe("hellinger_drop_vs_next_value", &a, "see comparison rows"),
            CheckReport::probe("hellinger_drop_vs_current_value", &b, "see comparison rows"),
        )
    }

    pub fn csv(&self) -> String {
        let mut out = String::from("k,slack_vs_next_value,slack_vs_current_value\n");
        for (k, a, b) in &self.rows {
            out.push_str(&format!("{k},{a},{b}\n"));
        }
        out
    }
}

/// Build the two-column slack comparison for a Hellinger trace.
pub fn hellinger_inequality_comparison(
    p: &NonnegMatrix,
    y: &[f64],
    trace: &IterationTrace,
    x_hat: &[f64],
) -> Result<HellingerComparison> {
    if trace.len() < 2 {
        return Err(Error::Evaluation(
            "comparison needs at least two iterations".into(),
        ));
    }
    let f_hat = hellinger(y, &p.mul(x_hat)?)?;
    let mut rows = Vec::new();
    for w in trace.records().windows(2) {
        let (cur, next) = (&w[0], &w[1]);
        let drop = kl_vec(x_hat, &cur.x)? - kl_vec(x_hat, &next.x)?;
        let norm = 1.0 + cur.f.abs();
        rows.push((
            cur.k,
            (drop - 2.0 * (next.f - f_hat)) / norm,
            (drop - 2.0 * (cur.f - f_hat)) / norm,
        ));
    }
    Ok(HellingerComparison { rows })
}

/// Deviation between the weighted relaxation on (A, b) and the rescaled
/// landweber iteration run with unit step, over `iters` iterations from the
/// same start: the column rescaling should make them identical.
///
/// Returns the per-iteration maximum coordinate deviation and the Gram
/// trace of the rescaled matrix (equal to one when the transform is right).
pub fn landweber_equivalence_deviation(
    a: &RealMatrix,
    b: &[f64],
    x0: &[f64],
    iters: usize,
) -> Result<(Vec<f64>, f64)> {
    use crate::solvers::{landweber_step, LandweberEquiv};
    let eq = LandweberEquiv::new(a)?;
    let mut x = x0.to_vec();
    let mut z = eq.forward(x0)?;
    let mut devs = Vec::with_capacity(iters);
    for _ in 0..iters {
        x = euclid_l_step(a, b, &x)?;
        z = landweber_step(&eq.b_matrix, b, &z, 1.0)?;
        let back = eq.back(&z)?;
        let dev = x
            .iter()
            .zip(&back)
            .map(|(&u, &v)| (u - v).abs())
            .fold(0.0f64, f64::max);
        devs.push(dev);
    }
    Ok((devs, eq.gram_trace()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::framework::{SampleDomain, StoppingRule};
    use crate::solvers::{solve_euclid, solve_hellinger, solve_pearson};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn hrr_probe_zero_at_equal_pair() {
        let mut rng = ChaCha8Rng::seed_from_u64(83);
        let p = crate::synth::random_normalized_matrix(&mut rng, 3, 2);
        let y: Vec<f64> = (0..3).map(|_| rng.random_range(0.5..2.0)).collect();
        let x: Vec<f64> = (0..2).map(|_| rng.random_range(0.5..2.0)).collect();
        let report = hrr_probe(&p, &y, &[(x.clone(), x.clone())]).unwrap();
        assert!(report.pass);
        // at x = z the residual is exactly zero
        assert!(report.worst_slack.abs() <= 1e-12, "{report:?}");
    }

    #[test]
    fn probes_run_on_solver_traces() {
        let mut rng = ChaCha8Rng::seed_from_u64(89);
        let (p, y, x0) = crate::synth::random_kl_instance(&mut rng, 4, 3, false).unwrap();
        let rule = StoppingRule::new(30, 0.0, 0.0).unwrap();
        let run = solve_hellinger(&p, &y, &x0, &rule).unwrap();
        let samples = crate::framework::sample_around_trace(
            &run.trace,
            20,
            SampleDomain::Positive,
            &[],
            &mut rng,
        );
        let r = summa2_candidate_probe(Family::Hellinger, &run.p, &run.y, &run.trace, &samples)
            .unwrap();
        assert!(r.pass); // probes always pass
        let run = solve_pearson(&p, &y, &x0, &rule).unwrap();
        let r =
            summa2_candidate_probe(Family::Pearson, &run.p, &run.y, &run.trace, &samples).unwrap();
        assert!(r.pass);

        let a = crate::synth::random_real_matrix(&mut rng, 4, 3);
        let b: Vec<f64> = (0..4).map(|_| rng.random_range(-2.0..2.0)).collect();
        let xe0: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let trace = solve_euclid(&a, &b, &xe0, &rule).unwrap();
        let samples =
            crate::framework::sample_around_trace(&trace, 20, SampleDomain::Real, &[], &mut rng);
        let r = euclid_summa2_reading_probe(&a, &b, &trace, &samples).unwrap();
        assert!(r.pass);
        assert!(r.notes.contains("plain SUMMA2"));
    }

    #[test]
    fn equivalence_deviation_small_on_hand_instance() {
        let a = RealMatrix::new(1, 2, vec![1.0, 1.0]).unwrap();
        let (devs, trace_gram) =
            landweber_equivalence_deviation(&a, &[2.0], &[0.0, 0.0], 50).unwrap();
        assert!((trace_gram - 1.0).abs() <= 1e-12);
        assert!(
            devs.iter().all(|&d| d <= 1e-10),
            "max dev {:?}",
            devs.iter().cloned().fold(0.0f64, f64::max)
        );
    }
}
