//! The three interchangeable views of a descent method, and the adapters
//! between them.
//!
//! * Alternating minimization ([`AmInstance`]): a coupling Φ(x,y) minimized
//!   over each argument in turn.
//! * Proximal minimization ([`PmaInstance`]): minimize f(x) + d(x, previous)
//!   for a distance d.
//! * Majorization minimization ([`MmInstance`]): minimize a surrogate
//!   g(x|previous) that dominates f and touches it on the diagonal.
//!
//! The adapters realize the standard equivalences. From an AM instance,
//! f(x) = Φ(x, y(x)) and d(x,z) = Φ(x, y(z)) − Φ(x, y(x)) give a proximal
//! view with the same iterates; from an MM instance, d(x,z) = g(x|z) − f(x)
//! does the same. Iterate-for-iterate agreement is what the integration
//! tests pin down.

use std::sync::Arc;

use crate::error::{Error, Result};

pub type DynObjective = Arc<dyn Fn(&[f64]) -> Result<f64> + Send + Sync>;
pub type DynCoupling = Arc<dyn Fn(&[f64], &[f64]) -> Result<f64> + Send + Sync>;
pub type DynMap = Arc<dyn Fn(&[f64]) -> Result<Vec<f64>> + Send + Sync>;

/// Alternating-minimization problem: coupling Φ plus both partial
/// minimizers. `argmin_x` maps a fixed y to the best x; `argmin_y` maps a
/// fixed x to its best companion y(x).
#[derive(Clone)]
pub struct AmInstance {
    pub phi: DynCoupling,
    pub argmin_x: DynMap,
    pub argmin_y: DynMap,
}

impl AmInstance {
    /// Spot-check that `argmin_y` really minimizes over the sampled y's:
    /// Φ(x, y(x)) <= Φ(x, y) for each sampled pair.
    pub fn validate_on(&self, xs: &[Vec<f64>], ys: &[Vec<f64>], tol: f64) -> Result<()> {
        for x in xs {
            let yx = (self.argmin_y)(x)?;
            let best = (self.phi)(x, &yx)?;
            for y in ys {
                let v = (self.phi)(x, y)?;
                if best > v + tol * (1.0 + v.abs()) {
                    return Err(Error::Evaluation(format!(
                        "argmin_y is not a partial minimizer: phi(x,y(x))={best} > phi(x,y)={v}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Proximal-minimization problem: objective, distance, and the prox step
/// z ↦ argmin_x f(x) + d(x,z).
#[derive(Clone)]
pub struct PmaInstance {
    pub f: DynObjective,
    pub d: DynCoupling,
    pub prox_step: DynMap,
}

impl PmaInstance {
    /// Spot-check d(x,x) = 0 on the samples.
    pub fn validate_on(&self, xs: &[Vec<f64>], tol: f64) -> Result<()> {
        for x in xs {
            let dxx = (self.d)(x, x)?;
            if dxx.abs() > tol {
                return Err(Error::Evaluation(format!(
                    "d(x,x) = {dxx} is not numerically zero"
                )));
            }
        }
        Ok(())
    }
}

/// Majorization-minimization problem: objective, surrogate g(x|z) (passed
/// as g(x, z)), and the surrogate-minimizing step.
#[derive(Clone)]
pub struct MmInstance {
    pub f: DynObjective,
    pub g: DynCoupling,
    pub step: DynMap,
}

impl MmInstance {
    /// Spot-check the majorization property g(x|z) >= f(x) and the diagonal
    /// identity g(x|x) = f(x) on sampled pairs.
    pub fn validate_on(&self, xs: &[Vec<f64>], zs: &[Vec<f64>], tol: f64) -> Result<()> {
        for x in xs {
            let fx = (self.f)(x)?;
            let gxx = (self.g)(x, x)?;
            if (gxx - fx).abs() > tol * (1.0 + fx.abs()) {
                return Err(Error::Evaluation(format!(
                    "g(x|x) = {gxx} differs from f(x) = {fx}"
                )));
            }
            for z in zs {
                let gxz = (self.g)(x, z)?;
                if gxz < fx - tol * (1.0 + fx.abs()) {
                    return Err(Error::Evaluation(format!(
                        "majorization violated: g(x|z) = {gxz} < f(x) = {fx}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// View an AM instance as a proximal method on f(x) = Φ(x, y(x)) with the
/// induced distance d(x,z) = Φ(x, y(z)) − Φ(x, y(x)).
pub fn am_to_pma(am: &AmInstance) -> PmaInstance {
    let f: DynObjective = {
        let phi = am.phi.clone();
        let argmin_y = am.argmin_y.clone();
        Arc::new(move |x: &[f64]| {
            let yx = argmin_y(x)?;
            phi(x, &yx)
        })
    };
    let d: DynCoupling = {
        let phi = am.phi.clone();
        let argmin_y = am.argmin_y.clone();
        Arc::new(move |x: &[f64], z: &[f64]| {
            let yz = argmin_y(z)?;
            let yx = argmin_y(x)?;
            Ok(phi(x, &yz)? - phi(x, &yx)?)
        })
    };
    let prox_step: DynMap = {
        let argmin_x = am.argmin_x.clone();
        let argmin_y = am.argmin_y.clone();
        Arc::new(move |z: &[f64]| {
            let yz = argmin_y(z)?;
            argmin_x(&yz)
        })
    };
    PmaInstance { f, d, prox_step }
}

/// View an MM instance as a proximal method with d(x,z) = g(x|z) − f(x).
pub fn mm_to_pma(mm: &MmInstance) -> PmaInstance {
    let d: DynCoupling = {
        let g = mm.g.clone();
        let f = mm.f.clone();
        Arc::new(move |x: &[f64], z: &[f64]| Ok(g(x, z)? - f(x)?))
    };
    PmaInstance {
        f: mm.f.clone(),
        d,
        prox_step: mm.step.clone(),
    }
}
