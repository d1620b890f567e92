//! Per-family alternating-minimization and majorization views.
//!
//! Each solver family minimizes its objective f(x) by alternating between
//! iterate space and the space of row-constrained coupling arrays:
//! the companion map y(x) is the data coupling r(x), and the x-update given
//! an array r has the closed forms below (derived by zeroing the separable
//! per-column derivative, valid on column-normalized systems):
//!
//! * exponential family, Φ(x,r) = KL(q(x), r):    x_j = exp(Σᵢ P[i][j]·log(r[i][j]/P[i][j]))
//! * expectation family, Φ(x,r) = KL(r, q(x)):    x_j = Σᵢ r[i][j]
//! * Hellinger family,   Φ(x,r) = H(r, q(x)):     x_j = (Σᵢ √(r[i][j]·P[i][j]))²
//! * Pearson family,     Φ(x,r) = φ²(r, q(x)):    x_j = √(Σᵢ r[i][j]²/P[i][j])
//! * least squares,      Φ(x,r) = J·E(r, q(x)):   x_j = Σᵢ A[i][j]·r[i][j]/c_j
//!
//! Feeding r = r(z) into each x-update reproduces the family's one-step
//! operator exactly; the integration tests pin the alternating runs against
//! the operator iterations coordinate for coordinate.
//!
//! The matching majorization view uses the surrogate g(x|z) = Φ(x, r(z)),
//! which dominates f(x) and touches it at x = z.

use std::sync::Arc;

use super::{emml_step, euclid_l_step, hellinger_t_step, pearson_r_step, smart_step};
use crate::distances::{hellinger, kl_vec, pearson, pearson_pairs, sum_sq_diff};
use crate::error::{Error, Result};
use crate::framework::{AmInstance, MmInstance};
use crate::model::{
    euclid_q_array, euclid_r_array, kl_q_array, kl_r_array, NonnegMatrix, RealMatrix,
};

fn require_normalized(p: &NonnegMatrix) -> Result<()> {
    if !p.is_normalized(1e-10) {
        return Err(Error::Config(
            "coupling constructions need unit column sums; normalize the system first".into(),
        ));
    }
    Ok(())
}

fn require_data(p: &NonnegMatrix, y: &[f64]) -> Result<()> {
    if y.len() != p.rows() {
        return Err(Error::LengthMismatch {
            left: p.rows(),
            right: y.len(),
        });
    }
    crate::distances::check_positive("y entry", y)?;
    Ok(())
}

/// Positive entry of a coupling array wherever the matrix is positive.
fn checked_ratio_entry(r: f64, p: f64, i: usize, j: usize) -> Result<f64> {
    if r <= 0.0 {
        return Err(Error::Domain(format!(
            "coupling array entry ({i},{j}) must be positive where the matrix is, got {r}"
        )));
    }
    Ok(r / p)
}

/// Alternating view of the exponential KL iteration: minimize KL(q(x), r).
pub fn smart_am(p: &NonnegMatrix, y: &[f64]) -> Result<AmInstance> {
    require_normalized(p)?;
    require_data(p, y)?;
    let (rows, cols) = (p.rows(), p.cols());
    let phi = {
        let p = p.clone();
        Arc::new(move |x: &[f64], r: &[f64]| kl_vec(kl_q_array(&p, x)?.entries(), r))
    };
    let argmin_x = {
        let p = p.clone();
        Arc::new(move |r: &[f64]| {
            let mut out = vec![0.0; cols];
            for (j, o) in out.iter_mut().enumerate() {
                let mut e = 0.0;
                for i in 0..rows {
                    let pij = p.get(i, j);
                    if pij > 0.0 {
                        e += pij * checked_ratio_entry(r[i * cols + j], pij, i, j)?.ln();
                    }
                }
                *o = e.exp();
            }
            Ok(out)
        })
    };
    let argmin_y = {
        let p = p.clone();
        let y = y.to_vec();
        Arc::new(move |x: &[f64]| Ok(kl_r_array(&p, &y, x)?.into_entries()))
    };
    Ok(AmInstance {
        phi,
        argmin_x,
        argmin_y,
    })
}

/// Alternating view of the expectation-maximization iteration:
/// minimize KL(r, q(x)).
pub fn emml_am(p: &NonnegMatrix, y: &[f64]) -> Result<AmInstance> {
    require_normalized(p)?;
    require_data(p, y)?;
    let (rows, cols) = (p.rows(), p.cols());
    let phi = {
        let p = p.clone();
        Arc::new(move |x: &[f64], r: &[f64]| kl_vec(r, kl_q_array(&p, x)?.entries()))
    };
    let argmin_x = Arc::new(move |r: &[f64]| {
        let mut out = vec![0.0; cols];
        for (j, o) in out.iter_mut().enumerate() {
            *o = (0..rows).map(|i| r[i * cols + j]).sum();
        }
        Ok(out)
    });
    let argmin_y = {
        let p = p.clone();
        let y = y.to_vec();
        Arc::new(move |x: &[f64]| Ok(kl_r_array(&p, &y, x)?.into_entries()))
    };
    Ok(AmInstance {
        phi,
        argmin_x,
        argmin_y,
    })
}

/// Alternating view of the Hellinger iteration: minimize H(r, q(x)).
pub fn hellinger_am(p: &NonnegMatrix, y: &[f64]) -> Result<AmInstance> {
    require_normalized(p)?;
    require_data(p, y)?;
    let (rows, cols) = (p.rows(), p.cols());
    let phi = {
        let p = p.clone();
        Arc::new(move |x: &[f64], r: &[f64]| hellinger(r, kl_q_array(&p, x)?.entries()))
    };
    let argmin_x = {
        let p = p.clone();
        Arc::new(move |r: &[f64]| {
            let mut out = vec![0.0; cols];
            for (j, o) in out.iter_mut().enumerate() {
                let s: f64 = (0..rows)
                    .map(|i| (r[i * cols + j] * p.get(i, j)).sqrt())
                    .sum();
                *o = s * s;
            }
            Ok(out)
        })
    };
    let argmin_y = {
        let p = p.clone();
        let y = y.to_vec();
        Arc::new(move |x: &[f64]| Ok(kl_r_array(&p, &y, x)?.into_entries()))
    };
    Ok(AmInstance {
        phi,
        argmin_x,
        argmin_y,
    })
}

/// Alternating view of the Pearson iteration: minimize φ²(r, q(x)).
pub fn pearson_am(p: &NonnegMatrix, y: &[f64]) -> Result<AmInstance> {
    require_normalized(p)?;
    require_data(p, y)?;
    let (rows, cols) = (p.rows(), p.cols());
    let phi = {
        let p = p.clone();
        Arc::new(move |x: &[f64], r: &[f64]| pearson_pairs(r, kl_q_array(&p, x)?.entries()))
    };
    let argmin_x = {
        let p = p.clone();
        Arc::new(move |r: &[f64]| {
            let mut out = vec![0.0; cols];
            for (j, o) in out.iter_mut().enumerate() {
                let mut s = 0.0;
                for i in 0..rows {
                    let pij = p.get(i, j);
                    if pij > 0.0 {
                        let rij = r[i * cols + j];
                        s += rij * rij / pij;
                    }
                }
                *o = s.sqrt();
            }
            Ok(out)
        })
    };
    let argmin_y = {
        let p = p.clone();
        let y = y.to_vec();
        Arc::new(move |x: &[f64]| Ok(kl_r_array(&p, &y, x)?.into_entries()))
    };
    Ok(AmInstance {
        phi,
        argmin_x,
        argmin_y,
    })
}

/// Alternating view of the least-squares relaxation:
/// minimize J·E(r, q(x)) so that Φ(x, r(x)) = ‖b − Ax‖² exactly.
pub fn euclid_am(a: &RealMatrix, b: &[f64]) -> Result<AmInstance> {
    if b.len() != a.rows() {
        return Err(Error::LengthMismatch {
            left: a.rows(),
            right: b.len(),
        });
    }
    crate::distances::check_finite("b entry", b)?;
    let (rows, cols) = (a.rows(), a.cols());
    let jf = cols as f64;
    let phi = {
        let a = a.clone();
        Arc::new(move |x: &[f64], r: &[f64]| {
            Ok(jf * sum_sq_diff(r, euclid_q_array(&a, x)?.entries())?)
        })
    };
    let argmin_x = {
        let a = a.clone();
        Arc::new(move |r: &[f64]| {
            let c = a.col_sq_sums();
            let mut out = vec![0.0; cols];
            for (j, o) in out.iter_mut().enumerate() {
                let s: f64 = (0..rows).map(|i| a.get(i, j) * r[i * cols + j]).sum();
                *o = s / c[j];
            }
            Ok(out)
        })
    };
    let argmin_y = {
        let a = a.clone();
        let b = b.to_vec();
        Arc::new(move |x: &[f64]| Ok(euclid_r_array(&a, &b, x)?.into_entries()))
    };
    Ok(AmInstance {
        phi,
        argmin_x,
        argmin_y,
    })
}

fn kl_mm(
    p: &NonnegMatrix,
    y: &[f64],
    f: impl Fn(&NonnegMatrix, &[f64], &[f64]) -> Result<f64> + Send + Sync + 'static,
    g: impl Fn(&NonnegMatrix, &[f64], &[f64], &[f64]) -> Result<f64> + Send + Sync + 'static,
    step: impl Fn(&NonnegMatrix, &[f64], &[f64]) -> Result<Vec<f64>> + Send + Sync + 'static,
) -> Result<MmInstance> {
    require_normalized(p)?;
    require_data(p, y)?;
    let fo = {
        let p = p.clone();
        let y = y.to_vec();
        Arc::new(move |x: &[f64]| f(&p, &y, x))
    };
    let go = {
        let p = p.clone();
        let y = y.to_vec();
        Arc::new(move |x: &[f64], z: &[f64]| g(&p, &y, x, z))
    };
    let so = {
        let p = p.clone();
        let y = y.to_vec();
        Arc::new(move |z: &[f64]| step(&p, &y, z))
    };
    Ok(MmInstance {
        f: fo,
        g: go,
        step: so,
    })
}

/// Majorization view of the exponential KL iteration:
/// g(x|z) = KL(q(x), r(z)) dominates f(x) = KL(Px, y).
pub fn smart_mm(p: &NonnegMatrix, y: &[f64]) -> Result<MmInstance> {
    kl_mm(
        p,
        y,
        |p, y, x| kl_vec(&p.mul(x)?, y),
        |p, y, x, z| kl_vec(kl_q_array(p, x)?.entries(), kl_r_array(p, y, z)?.entries()),
        smart_step,
    )
}

/// Majorization view of the expectation-maximization iteration:
/// g(x|z) = KL(r(z), q(x)) dominates f(x) = KL(y, Px).
pub fn emml_mm(p: &NonnegMatrix, y: &[f64]) -> Result<MmInstance> {
    kl_mm(
        p,
        y,
        |p, y, x| kl_vec(y, &p.mul(x)?),
        |p, y, x, z| kl_vec(kl_r_array(p, y, z)?.entries(), kl_q_array(p, x)?.entries()),
        emml_step,
    )
}

/// Majorization view of the Hellinger iteration:
/// g(x|z) = H(r(z), q(x)) dominates f(x) = H(y, Px).
pub fn hellinger_mm(p: &NonnegMatrix, y: &[f64]) -> Result<MmInstance> {
    kl_mm(
        p,
        y,
        |p, y, x| hellinger(y, &p.mul(x)?),
        |p, y, x, z| hellinger(kl_r_array(p, y, z)?.entries(), kl_q_array(p, x)?.entries()),
        hellinger_t_step,
    )
}

/// Majorization view of the Pearson iteration:
/// g(x|z) = φ²(r(z), q(x)) dominates f(x) = φ²(y, Px).
pub fn pearson_mm(p: &NonnegMatrix, y: &[f64]) -> Result<MmInstance> {
    kl_mm(
        p,
        y,
        |p, y, x| pearson(y, &p.mul(x)?),
        |p, y, x, z| pearson_pairs(kl_r_array(p, y, z)?.entries(), kl_q_array(p, x)?.entries()),
        pearson_r_step,
    )
}

/// Majorization view of the least-squares relaxation:
/// g(x|z) = J·E(r(z), q(x)) dominates f(x) = ‖b − Ax‖².
pub fn euclid_mm(a: &RealMatrix, b: &[f64]) -> Result<MmInstance> {
    if b.len() != a.rows() {
        return Err(Error::LengthMismatch {
            left: a.rows(),
            right: b.len(),
        });
    }
    let jf = a.cols() as f64;
    let f = {
        let a = a.clone();
        let b = b.to_vec();
        Arc::new(move |x: &[f64]| sum_sq_diff(&b, &a.mul(x)?))
    };
    let g = {
        let a = a.clone();
        let b = b.to_vec();
        Arc::new(move |x: &[f64], z: &[f64]| {
            Ok(jf
                * sum_sq_diff(
                    euclid_r_array(&a, &b, z)?.entries(),
                    euclid_q_array(&a, x)?.entries(),
                )?)
        })
    };
    let step = {
        let a = a.clone();
        let b = b.to_vec();
        Arc::new(move |z: &[f64]| euclid_l_step(&a, &b, z))
    };
    Ok(MmInstance { f, g, step })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn am_x_updates_reproduce_operator_steps() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..30 {
            let rows = rng.random_range(1..6);
            let cols = rng.random_range(1..5);
            let p = crate::synth::random_normalized_matrix(&mut rng, rows, cols);
            let y: Vec<f64> = (0..rows).map(|_| rng.random_range(0.3..3.0)).collect();
            let z: Vec<f64> = (0..cols).map(|_| rng.random_range(0.2..2.0)).collect();

            let cases: Vec<(AmInstance, Vec<f64>)> = vec![
                (smart_am(&p, &y).unwrap(), smart_step(&p, &y, &z).unwrap()),
                (emml_am(&p, &y).unwrap(), emml_step(&p, &y, &z).unwrap()),
                (
                    hellinger_am(&p, &y).unwrap(),
                    hellinger_t_step(&p, &y, &z).unwrap(),
                ),
                (
                    pearson_am(&p, &y).unwrap(),
                    pearson_r_step(&p, &y, &z).unwrap(),
                ),
            ];
            for (am, want) in cases {
                let r = (am.argmin_y)(&z).unwrap();
                let got = (am.argmin_x)(&r).unwrap();
                for (u, v) in got.iter().zip(&want) {
                    assert!(
                        (u - v).abs() <= 1e-12 * (1.0 + v.abs()),
                        "argmin through the coupling drifted from the operator step"
                    );
                }
            }
        }
    }

    #[test]
    fn euclid_am_reproduces_l_step() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..30 {
            let rows = rng.random_range(1..6);
            let cols = rng.random_range(1..5);
            let a = crate::synth::random_real_matrix(&mut rng, rows, cols);
            let b: Vec<f64> = (0..rows).map(|_| rng.random_range(-2.0..2.0)).collect();
            let z: Vec<f64> = (0..cols).map(|_| rng.random_range(-2.0..2.0)).collect();
            let am = euclid_am(&a, &b).unwrap();
            let r = (am.argmin_y)(&z).unwrap();
            let got = (am.argmin_x)(&r).unwrap();
            let want = euclid_l_step(&a, &b, &z).unwrap();
            for (u, v) in got.iter().zip(&want) {
                assert!((u - v).abs() <= 1e-12 * (1.0 + v.abs()));
            }
            // phi at (x, r(x)) is the objective
            let fx = (am.phi)(&z, &(am.argmin_y)(&z).unwrap()).unwrap();
            let direct = sum_sq_diff(&b, &a.mul(&z).unwrap()).unwrap();
            assert!((fx - direct).abs() <= 1e-12 * (1.0 + direct));
        }
    }

    #[test]
    fn constructors_reject_unnormalized_systems() {
        let p = NonnegMatrix::new(2, 1, vec![1.0, 1.0]).unwrap();
        assert!(smart_am(&p, &[1.0, 2.0]).is_err());
        assert!(emml_mm(&p, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn mm_majorization_spot_checks() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        let p = crate::synth::random_normalized_matrix(&mut rng, 4, 3);
        let y: Vec<f64> = (0..4).map(|_| rng.random_range(0.3..3.0)).collect();
        let xs: Vec<Vec<f64>> = (0..5)
            .map(|_| (0..3).map(|_| rng.random_range(0.2..2.0)).collect())
            .collect();
        let zs = xs.clone();
        for mk in [smart_mm, emml_mm, hellinger_mm, pearson_mm] {
            let mm = mk(&p, &y).unwrap();
            mm.validate_on(&xs, &zs, 1e-10).unwrap();
        }
        let a = crate::synth::random_real_matrix(&mut rng, 4, 3);
        let b: Vec<f64> = (0..4).map(|_| rng.random_range(-2.0..2.0)).collect();
        let mm = euclid_mm(&a, &b).unwrap();
        mm.validate_on(&xs, &zs, 1e-10).unwrap();
    }
}
