//! Bulk random-instance sweeps: identities, mass laws, and contraction
//! inequalities over seeded instance batches. Instances are generated
//! sequentially from one seed, evaluated in parallel (input order is
//! preserved), and reduced deterministically.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    pythagorean_emml, pythagorean_euclid, pythagorean_hellinger, pythagorean_pearson,
    pythagorean_smart,
};
use crate::distances::{hellinger, kl_vec, pearson};
use crate::error::{Error, Result};
use crate::exec;
use crate::model::{Family, NonnegMatrix};
use crate::report::CheckReport;
use crate::solvers::{emml_step, hellinger_t_step, pearson_r_step, smart_step};
use crate::synth;

const MAX_ROWS: usize = 6;
const MAX_COLS: usize = 4;

struct KlSample {
    p: NonnegMatrix,
    y: Vec<f64>,
    x: Vec<f64>,
    z: Vec<f64>,
}

fn kl_samples(n: usize, seed: u64) -> Vec<KlSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let rows = rng.random_range(1..=MAX_ROWS);
            let cols = rng.random_range(1..=MAX_COLS);
            let p = synth::random_normalized_matrix(&mut rng, rows, cols);
            let y = synth::positive_vec(&mut rng, rows, 0.3, 3.0);
            let x = synth::positive_vec(&mut rng, cols, 0.2, 2.0);
            let z = synth::positive_vec(&mut rng, cols, 0.2, 2.0);
            KlSample { p, y, x, z }
        })
        .collect()
}

/// Sweep one family's decomposition identities over `n` seeded random
/// instances; slacks are minus the relative residuals, tolerance 1e-10.
pub fn pythagorean_sweep(family: Family, n: usize, seed: u64) -> Result<CheckReport> {
    let tol = 1e-10;
    let slacks: Vec<f64> = match family {
        Family::Smart | Family::Emml | Family::Hellinger | Family::Pearson => {
            let samples = kl_samples(n, seed);
            let per = exec::try_map(&samples, |s| {
                Ok(match family {
                    Family::Smart => {
                        let (a, b) = pythagorean_smart(&s.p, &s.y, &s.x, &s.z)?;
                        vec![-a, -b]
                    }
                    Family::Emml => {
                        let (a, b) = pythagorean_emml(&s.p, &s.y, &s.x, &s.z)?;
                        vec![-a, -b]
                    }
                    Family::Hellinger => {
                        vec![-pythagorean_hellinger(&s.p, &s.y, &s.x, &s.z)?]
                    }
                    Family::Pearson => {
                        let (a, b) = pythagorean_pearson(&s.p, &s.y, &s.x, &s.z)?;
                        vec![-a, -b]
                    }
                    _ => unreachable!(),
                })
            })?;
            per.into_iter().flatten().collect()
        }
        Family::Euclid => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let samples: Vec<_> = (0..n)
                .map(|_| {
                    let rows = rng.random_range(1..=MAX_ROWS);
                    let cols = rng.random_range(1..=MAX_COLS);
                    let a = synth::random_real_matrix(&mut rng, rows, cols);
                    let b = synth::real_vec(&mut rng, rows, -2.0, 2.0);
                    let x = synth::real_vec(&mut rng, cols, -2.0, 2.0);
                    let z = synth::real_vec(&mut rng, cols, -2.0, 2.0);
                    (a, b, x, z)
                })
                .collect();
            let per = exec::try_map(&samples, |(a, b, x, z)| {
                let (r1, r2) = pythagorean_euclid(a, b, x, z)?;
                Ok(vec![-r1, -r2])
            })?;
            per.into_iter().flatten().collect()
        }
        other => {
            return Err(Error::Config(format!(
                "no decomposition identities for family `{}`",
                other.name()
            )))
        }
    };
    Ok(CheckReport::from_slacks(
        format!("pythagorean_{}", family.name()),
        &slacks,
        tol,
        format!("seed={seed}; n={n}; dims<= {MAX_ROWS}x{MAX_COLS}; slack=-relative residual"),
    ))
}

/// Sweep the four mass laws over `n` seeded random instances (normalized
/// systems): conservation for the expectation step, one-sided bounds for
/// the others. Slacks are normalized by 1 + Σy; tolerance 1e-12.
pub fn mass_law_sweep(n: usize, seed: u64) -> Result<Vec<CheckReport>> {
    let tol = 1e-12;
    let samples = kl_samples(n, seed);
    let mut reports = Vec::new();
    type StepFn = fn(&NonnegMatrix, &[f64], &[f64]) -> Result<Vec<f64>>;
    let cases: [(&str, StepFn); 4] = [
        ("mass_smart", smart_step),
        ("mass_emml", emml_step),
        ("mass_hellinger", hellinger_t_step),
        ("mass_pearson", pearson_r_step),
    ];
    for (name, step) in cases {
        let slacks = exec::try_map(&samples, |s| {
            let out = step(&s.p, &s.y, &s.x)?;
            let y_total: f64 = s.y.iter().sum();
            let total: f64 = out.iter().sum();
            let norm = 1.0 + y_total;
            Ok(match name {
                "mass_emml" => -(total - y_total).abs() / norm,
                "mass_pearson" => (total - y_total) / norm,
                _ => (y_total - total) / norm,
            })
        })?;
        reports.push(CheckReport::from_slacks(
            name,
            &slacks,
            tol,
            format!("seed={seed}; n={n}; normalized by 1+sum(y)"),
        ));
    }
    Ok(reports)
}

/// Sweep the contraction inequalities D(x, z) >= D(Px, Pz) for the KL,
/// Hellinger, and Pearson distances over `n` seeded random positive pairs
/// under column-normalized matrices. Slacks normalized by 1 + D(x, z);
/// tolerance 1e-12.
pub fn contraction_sweep(n: usize, seed: u64) -> Result<Vec<CheckReport>> {
    let tol = 1e-12;
    let samples = kl_samples(n, seed);
    let mut reports = Vec::new();
    type DistFn = fn(&[f64], &[f64]) -> Result<f64>;
    let cases: [(&str, DistFn); 3] = [
        ("contraction_kl", kl_vec),
        ("contraction_hellinger", hellinger),
        ("contraction_pearson", pearson),
    ];
    for (name, dist) in cases {
        let slacks = exec::try_map(&samples, |s| {
            let dxz = dist(&s.x, &s.z)?;
            let dpxpz = dist(&s.p.mul(&s.x)?, &s.p.mul(&s.z)?)?;
            Ok((dxz - dpxpz) / (1.0 + dxz))
        })?;
        reports.push(CheckReport::from_slacks(
            name,
            &slacks,
            tol,
            format!("seed={seed}; n={n}; normalized columns; slack normalized by 1+D(x;z)"),
        ));
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweeps_pass_at_modest_size() {
        for family in [
            Family::Smart,
            Family::Emml,
            Family::Hellinger,
            Family::Pearson,
            Family::Euclid,
        ] {
            let r = pythagorean_sweep(family, 50, 1234).unwrap();
            assert!(r.pass, "{r:?}");
        }
        for r in mass_law_sweep(50, 99).unwrap() {
            assert!(r.pass, "{r:?}");
        }
        for r in contraction_sweep(50, 7).unwrap() {
            assert!(r.pass, "{r:?}");
        }
    }

    #[test]
    fn sweeps_are_deterministic() {
        let a = pythagorean_sweep(Family::Smart, 20, 5).unwrap();
        let b = pythagorean_sweep(Family::Smart, 20, 5).unwrap();
        assert_eq!(a.worst_slack, b.worst_slack);
        assert_eq!(a.mean_slack, b.mean_slack);
    }
}
