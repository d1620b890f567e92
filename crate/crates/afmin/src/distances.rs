//! Scalar and componentwise vector divergences.
//!
//! The solvers in this crate descend one of four data-fit distances between
//! nonnegative vectors:
//!
//! | distance | formula (componentwise, summed) | symmetric |
//! |----------|---------------------------------|-----------|
//! | Kullback–Leibler | KL(s,t) = s·log(s/t) + t − s | no |
//! | Hellinger | H(s,t) = (√s − √t)² | yes |
//! | Pearson φ² | φ²(s,t) = (s − t)²/t | no |
//! | weighted squared | Σ wⱼ(xⱼ − zⱼ)² | yes |
//!
//! KL is extended by limits: KL(0,t) = t and KL(s,0) = +∞ for s > 0. The
//! infinite case is returned as `f64::INFINITY`, never a panic; callers that
//! cannot tolerate it must keep their second argument positive.
//!
//! Two generic constructions tie these together: the Bregman distance of a
//! convex function ([`bregman`]) and the φ-divergence d_φ(x,z) = Σ zⱼ·φ(xⱼ/zⱼ)
//! of a convex kernel φ with φ(1) = φ′(1) = 0 ([`phi_distance`]). Hellinger is
//! d_φ with φ(t) = (√t−1)², KL is d_φ with φ(t) = t·log t − t + 1 and also the
//! Bregman distance of negative Shannon entropy.
//!
//! All inputs are validated: NaN or out-of-domain entries return
//! [`Error::Domain`] instead of propagating silently.

use crate::error::{Error, Result};
use crate::report::CheckReport;

/// Nonnegative vector with construction-time validation.
///
/// Entries are finite and >= 0; the dimension is fixed at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct NonnegVector(Vec<f64>);

impl NonnegVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::domain("vector must have length >= 1"));
        }
        check_nonneg("entry", &entries)?;
        Ok(NonnegVector(entries))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for NonnegVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

pub(crate) fn check_same_len(x: &[f64], z: &[f64]) -> Result<()> {
    if x.len() != z.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: z.len(),
        });
    }
    Ok(())
}

pub(crate) fn check_nonneg(what: &str, v: &[f64]) -> Result<()> {
    for (j, &e) in v.iter().enumerate() {
        if !e.is_finite() || e < 0.0 {
            return Err(Error::Domain(format!(
                "{what} {j} must be finite and >= 0, got {e}"
            )));
        }
    }
    Ok(())
}

pub(crate) fn check_positive(what: &str, v: &[f64]) -> Result<()> {
    for (j, &e) in v.iter().enumerate() {
        if !e.is_finite() || e <= 0.0 {
            return Err(Error::Domain(format!(
                "{what} {j} must be finite and > 0, got {e}"
            )));
        }
    }
    Ok(())
}

pub(crate) fn check_finite(what: &str, v: &[f64]) -> Result<()> {
    for (j, &e) in v.iter().enumerate() {
        if !e.is_finite() {
            return Err(Error::Domain(format!("{what} {j} must be finite, got {e}")));
        }
    }
    Ok(())
}

fn check_nonneg_scalar(what: &str, s: f64) -> Result<()> {
    if !s.is_finite() || s < 0.0 {
        return Err(Error::Domain(format!(
            "{what} must be finite and >= 0, got {s}"
        )));
    }
    Ok(())
}

/// Kullback–Leibler distance between nonnegative scalars.
///
/// KL(s,t) = s·log(s/t) + t − s, with KL(0,t) = t and KL(s,0) = +∞ for s > 0.
/// Always >= 0 and zero iff s = t. The zero cases are evaluated exactly (no
/// epsilon floors), so KL(s,s) is 0.0 to the bit.
pub fn kl(s: f64, t: f64) -> Result<f64> {
    check_nonneg_scalar("s", s)?;
    check_nonneg_scalar("t", t)?;
    if s == 0.0 {
        return Ok(t);
    }
    if t == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(s * (s / t).ln() + t - s)
}

/// Componentwise KL distance between nonnegative vectors.
pub fn kl_vec(x: &[f64], z: &[f64]) -> Result<f64> {
    check_same_len(x, z)?;
    check_nonneg("x", x)?;
    check_nonneg("z", z)?;
    let mut total = 0.0;
    for (&s, &t) in x.iter().zip(z) {
        if s == 0.0 {
            total += t;
        } else if t == 0.0 {
            return Ok(f64::INFINITY);
        } else {
            total += s * (s / t).ln() + t - s;
        }
    }
    Ok(total)
}

/// Mass/shape splitting of the vector KL distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KlSplit {
    /// KL(x, z).
    pub total: f64,
    /// KL(x₊, z₊) — the plain masses.
    pub mass: f64,
    /// KL(x, (x₊/z₊)·z) — shape after matching masses.
    pub shape: f64,
}

/// Split KL(x,z) into a mass part and a shape part:
///
/// KL(x,z) = KL(x₊,z₊) + KL(x, (x₊/z₊)·z), where v₊ = Σⱼ vⱼ.
///
/// Requires z₊ > 0. The identity holds to roundoff; see the unit tests.
pub fn kl_split(x: &[f64], z: &[f64]) -> Result<KlSplit> {
    check_same_len(x, z)?;
    check_nonneg("x", x)?;
    check_nonneg("z", z)?;
    let x_plus: f64 = x.iter().sum();
    let z_plus: f64 = z.iter().sum();
    if z_plus <= 0.0 {
        return Err(Error::domain("kl_split requires sum(z) > 0"));
    }
    let total = kl_vec(x, z)?;
    let mass = kl(x_plus, z_plus)?;
    let scale = x_plus / z_plus;
    let mut shape = 0.0;
    for (&s, &t) in x.iter().zip(z) {
        shape += kl(s, scale * t)?;
    }
    Ok(KlSplit { total, mass, shape })
}

/// Hellinger distance Σⱼ (√xⱼ − √zⱼ)² between nonnegative vectors.
/// Symmetric in its arguments.
pub fn hellinger(x: &[f64], z: &[f64]) -> Result<f64> {
    check_same_len(x, z)?;
    check_nonneg("x", x)?;
    check_nonneg("z", z)?;
    Ok(x.iter()
        .zip(z)
        .map(|(&s, &t)| {
            let d = s.sqrt() - t.sqrt();
            d * d
        })
        .sum())
}

/// Pearson φ² distance Σⱼ (xⱼ − zⱼ)²/zⱼ. Not symmetric; requires z > 0.
pub fn pearson(x: &[f64], z: &[f64]) -> Result<f64> {
    check_same_len(x, z)?;
    check_nonneg("x", x)?;
    check_positive("z", z)?;
    Ok(x.iter()
        .zip(z)
        .map(|(&s, &t)| {
            let d = s - t;
            d * d / t
        })
        .sum())
}

/// Pearson φ² summed over paired entries where (0,0) pairs count as zero.
///
/// Coupling arrays built from a system matrix share the matrix's zero
/// pattern, so both entries of a pair vanish together; on such pairs the
/// distance contribution is zero by continuity along the pattern. A pair
/// (s > 0, 0) is still a domain error.
pub(crate) fn pearson_pairs(x: &[f64], z: &[f64]) -> Result<f64> {
    check_same_len(x, z)?;
    check_nonneg("x", x)?;
    check_nonneg("z", z)?;
    let mut total = 0.0;
    for (j, (&s, &t)) in x.iter().zip(z).enumerate() {
        if t == 0.0 {
            if s != 0.0 {
                return Err(Error::Domain(format!(
                    "pearson pair {j}: second entry is 0 but first is {s}"
                )));
            }
        } else {
            let d = s - t;
            total += d * d / t;
        }
    }
    Ok(total)
}

/// Weighted squared distance Σⱼ wⱼ(xⱼ − zⱼ)² for real vectors and positive
/// weights.
pub fn weighted_sq(x: &[f64], z: &[f64], w: &[f64]) -> Result<f64> {
    check_same_len(x, z)?;
    check_same_len(x, w)?;
    check_finite("x", x)?;
    check_finite("z", z)?;
    check_positive("w", w)?;
    Ok(x.iter()
        .zip(z)
        .zip(w)
        .map(|((&s, &t), &wj)| {
            let d = s - t;
            wj * d * d
        })
        .sum())
}

/// Unweighted squared distance Σₙ (uₙ − vₙ)² between equally sized slices.
pub fn sum_sq_diff(u: &[f64], v: &[f64]) -> Result<f64> {
    check_same_len(u, v)?;
    check_finite("u", u)?;
    check_finite("v", v)?;
    Ok(u.iter()
        .zip(v)
        .map(|(&s, &t)| {
            let d = s - t;
            d * d
        })
        .sum())
}

/// Bregman distance D_h(x,z) = h(x) − h(z) − ⟨∇h(z), x − z⟩ of a convex
/// differentiable h. Nonnegative for convex h and zero at x = z.
///
/// Non-finite values coming out of `h` or `grad_h` are reported as
/// evaluation failures.
pub fn bregman<H, G>(h: H, grad_h: G, x: &[f64], z: &[f64]) -> Result<f64>
where
    H: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> Vec<f64>,
{
    check_same_len(x, z)?;
    let hx = h(x);
    let hz = h(z);
    if !hx.is_finite() || !hz.is_finite() {
        return Err(Error::Evaluation(format!(
            "h produced a non-finite value: h(x)={hx} h(z)={hz}"
        )));
    }
    let g = grad_h(z);
    if g.len() != x.len() {
        return Err(Error::Evaluation(format!(
            "grad_h returned length {} for input of length {}",
            g.len(),
            x.len()
        )));
    }
    let mut inner = 0.0;
    for ((&gj, &xj), &zj) in g.iter().zip(x).zip(z) {
        if !gj.is_finite() {
            return Err(Error::Evaluation(format!(
                "grad_h produced a non-finite component {gj}"
            )));
        }
        inner += gj * (xj - zj);
    }
    let d = hx - hz - inner;
    if !d.is_finite() {
        return Err(Error::Evaluation(format!(
            "Bregman distance evaluated to {d}"
        )));
    }
    Ok(d)
}

/// A φ-divergence kernel: a convex function on t > 0 together with its first
/// derivative and its second derivative at t = 1.
///
/// A valid kernel satisfies φ(1) = φ′(1) = 0, φ >= 0 on t > 0, convexity, and
/// the two-sided derivative bound
///
///   φ″(1)·(1 − 1/t)  <=  φ′(t)  <=  φ″(1)·log t.
///
/// [`validate_phi`] checks all of these numerically on a grid; the named
/// constructors return kernels known to satisfy them.
#[derive(Debug, Clone, Copy)]
pub struct PhiSpec {
    pub name: &'static str,
    pub phi: fn(f64) -> f64,
    pub dphi: fn(f64) -> f64,
    /// φ″(1): second derivative at 1 (the scale of the induced KL bound).
    pub ddphi1: f64,
}

impl PhiSpec {
    /// Hellinger kernel φ(t) = (√t − 1)², φ′(t) = 1 − 1/√t, φ″(1) = 1/2.
    pub fn hellinger() -> Self {
        PhiSpec {
            name: "hellinger",
            phi: |t| {
                let d = t.sqrt() - 1.0;
                d * d
            },
            dphi: |t| 1.0 - 1.0 / t.sqrt(),
            ddphi1: 0.5,
        }
    }

    /// Entropy kernel φ(t) = t·log t − t + 1, φ′(t) = log t, φ″(1) = 1.
    /// Its φ-divergence is exactly the vector KL distance.
    pub fn entropy() -> Self {
        PhiSpec {
            name: "entropy",
            phi: |t| t * t.ln() - t + 1.0,
            dphi: |t| t.ln(),
            ddphi1: 1.0,
        }
    }
}

/// φ-divergence d_φ(x,z) = Σⱼ zⱼ·φ(xⱼ/zⱼ) for strictly positive vectors.
pub fn phi_distance(spec: &PhiSpec, x: &[f64], z: &[f64]) -> Result<f64> {
    check_same_len(x, z)?;
    check_positive("x", x)?;
    check_positive("z", z)?;
    let mut total = 0.0;
    for (&s, &t) in x.iter().zip(z) {
        let v = t * (spec.phi)(s / t);
        if !v.is_finite() {
            return Err(Error::Evaluation(format!(
                "phi kernel `{}` produced {v} at t = {}",
                spec.name,
                s / t
            )));
        }
        total += v;
    }
    Ok(total)
}

/// Smallest grid point the kernel validator will look at. Below this the
/// two-sided derivative bound becomes numerically meaningless (both sides
/// diverge), so smaller grid values are skipped and noted in the report.
pub const PHI_GRID_MIN: f64 = 0.01;

/// Check a φ-kernel against the conditions it must satisfy, on a positive
/// grid.
///
/// Conditions, each with its own tolerance:
/// nonnegativity of φ (1e-12), the two-sided derivative bound (1e-12),
/// φ(1) = 0 and φ′(1) = 0 (1e-12), and convexity via second differences
/// (1e-9). Slacks are normalized per condition tolerance, so the report
/// passes iff `worst_slack >= -1` with `tolerance = 1`.
///
/// Grid points below [`PHI_GRID_MIN`] are skipped (noted in the report);
/// the point t = 1 conditions are evaluated directly regardless of the grid.
pub fn validate_phi(spec: &PhiSpec, grid: &[f64]) -> Result<CheckReport> {
    if grid.is_empty() {
        return Err(Error::domain("validate_phi requires a nonempty grid"));
    }
    check_positive("grid", grid)?;

    let mut pts: Vec<f64> = grid
        .iter()
        .copied()
        .filter(|&t| t >= PHI_GRID_MIN)
        .collect();
    let skipped = grid.len() - pts.len();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if pts.is_empty() {
        return Err(Error::Domain(format!(
            "all grid points fall below the validator floor {PHI_GRID_MIN}"
        )));
    }

    const TOL_EXACT: f64 = 1e-12;
    const TOL_CONVEX: f64 = 1e-9;

    let mut nonneg = f64::INFINITY;
    let mut bracket_lo = f64::INFINITY;
    let mut bracket_hi = f64::INFINITY;
    for &t in &pts {
        let p = (spec.phi)(t);
        let dp = (spec.dphi)(t);
        nonneg = nonneg.min(p);
        bracket_lo = bracket_lo.min(dp - spec.ddphi1 * (1.0 - 1.0 / t));
        bracket_hi = bracket_hi.min(spec.ddphi1 * t.ln() - dp);
    }

    let at_one = -((spec.phi)(1.0)).abs();
    let dat_one = -((spec.dphi)(1.0)).abs();

    // Convexity via second differences on the (possibly non-uniform) grid:
    // phi at the midpoint must sit below the chord.
    let mut convex = f64::INFINITY;
    for w in pts.windows(3) {
        let (a, b, c) = (w[0], w[1], w[2]);
        if c - a <= 0.0 {
            continue;
        }
        let lambda = (c - b) / (c - a);
        let chord = lambda * (spec.phi)(a) + (1.0 - lambda) * (spec.phi)(c);
        convex = convex.min(chord - (spec.phi)(b));
    }
    if !convex.is_finite() {
        convex = 0.0; // fewer than three usable grid points
    }

    let conditions = [
        ("nonneg", nonneg, TOL_EXACT),
        ("bracket_lower", bracket_lo, TOL_EXACT),
        ("bracket_upper", bracket_hi, TOL_EXACT),
        ("phi_at_1", at_one, TOL_EXACT),
        ("dphi_at_1", dat_one, TOL_EXACT),
        ("convexity", convex, TOL_CONVEX),
    ];

    let normalized: Vec<f64> = conditions.iter().map(|&(_, s, tol)| s / tol).collect();
    let mut notes = format!(
        "kernel={}; grid=[{};{}] n={}; per-condition worst:",
        spec.name,
        pts[0],
        pts[pts.len() - 1],
        pts.len()
    );
    for &(name, s, _) in &conditions {
        notes.push_str(&format!(" {name}={s:.3e}"));
    }
    if skipped > 0 {
        notes.push_str(&format!(
            "; {skipped} grid point(s) below {PHI_GRID_MIN} skipped (bound not sampled near 0)"
        ));
    }
    Ok(CheckReport::from_slacks(
        format!("phi_conditions_{}", spec.name),
        &normalized,
        1.0,
        notes,
    ))
}

/// Shannon entropy −Σⱼ xⱼ·log xⱼ of a nonnegative vector, with 0·log 0 = 0.
pub fn shannon_entropy(x: &[f64]) -> Result<f64> {
    check_nonneg("x", x)?;
    Ok(x.iter()
        .map(|&s| if s == 0.0 { 0.0 } else { -s * s.ln() })
        .sum())
}
