//! Problem instances and the coupling arrays the alternating solvers work on.
//!
//! A problem is a linear system: a nonnegative matrix `P` with data `y > 0`
//! for the KL-family solvers, or a real matrix `A` with data `b` for the
//! least-squares solvers. Every solver alternates between the iterate space
//! and a space of I×J "coupling" arrays:
//!
//! * `q(x)[i][j] = P[i][j]·x[j]` — the matrix action spread over entries;
//! * `r(x)` — the closest array to `q(x)` whose row `i` sums to the datum
//!   (`y_i` for the KL family, `b_i` for least squares).
//!
//! The solvers assume unit column sums for the KL family; rather than trust
//! that, callers normalize with [`normalize_columns`], which rescales the
//! matrix and compensates the iterate so the product `P·x` is unchanged.

use crate::distances::{check_finite, check_nonneg, check_positive};
use crate::error::{Error, Result};

/// Ratios with denominators below this are treated as singular. Keeps the
/// multiplicative operators away from overflow without epsilon-flooring
/// legitimate values.
pub const RATIO_GUARD: f64 = 1e-300;

/// Dense I×J matrix with nonnegative entries and positive column sums.
#[derive(Debug, Clone, PartialEq)]
pub struct NonnegMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>, // row-major
    col_sums: Vec<f64>,
}

impl NonnegMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::ShapeMismatch {
                expected: format!("{rows}x{cols} = {} entries", rows * cols),
                got: format!("{} entries", data.len()),
            });
        }
        check_nonneg("matrix entry", &data)?;
        let mut col_sums = vec![0.0; cols];
        for i in 0..rows {
            for j in 0..cols {
                col_sums[j] += data[i * cols + j];
            }
        }
        if let Some(j) = col_sums.iter().position(|&s| s <= 0.0) {
            return Err(Error::ZeroColumn { index: j });
        }
        Ok(NonnegMatrix {
            rows,
            cols,
            data,
            col_sums,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.data
    }

    /// Column sums s_j = Σᵢ P[i][j]; positive by construction.
    pub fn col_sums(&self) -> &[f64] {
        &self.col_sums
    }

    /// Matrix-vector product P·x.
    pub fn mul(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::LengthMismatch {
                left: self.cols,
                right: x.len(),
            });
        }
        Ok(self
            .data
            .chunks(self.cols)
            .map(|row| row.iter().zip(x).map(|(&p, &xj)| p * xj).sum())
            .collect())
    }

    /// Transpose product Pᵀ·w.
    pub fn mul_transpose(&self, w: &[f64]) -> Result<Vec<f64>> {
        if w.len() != self.rows {
            return Err(Error::LengthMismatch {
                left: self.rows,
                right: w.len(),
            });
        }
        let mut out = vec![0.0; self.cols];
        for (row, &wi) in self.data.chunks(self.cols).zip(w) {
            for (o, &p) in out.iter_mut().zip(row) {
                *o += p * wi;
            }
        }
        Ok(out)
    }

    /// True when every column sums to 1 within `tol`.
    pub fn is_normalized(&self, tol: f64) -> bool {
        self.col_sums.iter().all(|&s| (s - 1.0).abs() <= tol)
    }

    /// True when every entry is strictly positive.
    pub fn all_positive(&self) -> bool {
        self.data.iter().all(|&p| p > 0.0)
    }
}

/// Dense I×J real matrix with positive column square-sums c_j = Σᵢ A[i][j]².
#[derive(Debug, Clone, PartialEq)]
pub struct RealMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>, // row-major
    col_sq_sums: Vec<f64>,
}

impl RealMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::ShapeMismatch {
                expected: format!("{rows}x{cols} = {} entries", rows * cols),
                got: format!("{} entries", data.len()),
            });
        }
        check_finite("matrix entry", &data)?;
        let mut col_sq_sums = vec![0.0; cols];
        for i in 0..rows {
            for j in 0..cols {
                let a = data[i * cols + j];
                col_sq_sums[j] += a * a;
            }
        }
        if let Some(j) = col_sq_sums.iter().position(|&c| c <= 0.0) {
            return Err(Error::ZeroColumn { index: j });
        }
        Ok(RealMatrix {
            rows,
            cols,
            data,
            col_sq_sums,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.data
    }

    /// Column square-sums c_j = Σᵢ A[i][j]²; positive by construction.
    pub fn col_sq_sums(&self) -> &[f64] {
        &self.col_sq_sums
    }

    pub fn mul(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::LengthMismatch {
                left: self.cols,
                right: x.len(),
            });
        }
        Ok(self
            .data
            .chunks(self.cols)
            .map(|row| row.iter().zip(x).map(|(&a, &xj)| a * xj).sum())
            .collect())
    }

    pub fn mul_transpose(&self, w: &[f64]) -> Result<Vec<f64>> {
        if w.len() != self.rows {
            return Err(Error::LengthMismatch {
                left: self.rows,
                right: w.len(),
            });
        }
        let mut out = vec![0.0; self.cols];
        for (row, &wi) in self.data.chunks(self.cols).zip(w) {
            for (o, &a) in out.iter_mut().zip(row) {
                *o += a * wi;
            }
        }
        Ok(out)
    }

    /// Gram matrix AᵀA as a square `RealMatrix`.
    pub fn gram(&self) -> Result<RealMatrix> {
        let j = self.cols;
        let mut g = vec![0.0; j * j];
        for p in 0..j {
            for q in p..j {
                let mut s = 0.0;
                for i in 0..self.rows {
                    s += self.get(i, p) * self.get(i, q);
                }
                g[p * j + q] = s;
                g[q * j + p] = s;
            }
        }
        RealMatrix::new(j, j, g)
    }
}

/// Solver family a problem instance is meant for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// Least squares ‖b − Ax‖² via the alternating row-coupling iteration.
    Euclid,
    /// Least squares via the relaxed gradient iteration.
    Landweber,
    /// KL(Px, y) via the multiplicative exponential iteration.
    Smart,
    /// KL(y, Px) via the expectation-maximization iteration.
    Emml,
    /// Hellinger distance H(y, Px).
    Hellinger,
    /// Pearson φ²(y, Px).
    Pearson,
}

impl Family {
    pub fn is_kl_family(self) -> bool {
        matches!(
            self,
            Family::Smart | Family::Emml | Family::Hellinger | Family::Pearson
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Euclid => "euclid",
            Family::Landweber => "landweber",
            Family::Smart => "smart",
            Family::Emml => "emml",
            Family::Hellinger => "hellinger",
            Family::Pearson => "pearson",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "euclid" => Ok(Family::Euclid),
            "landweber" => Ok(Family::Landweber),
            "smart" => Ok(Family::Smart),
            "emml" => Ok(Family::Emml),
            "hellinger" => Ok(Family::Hellinger),
            "pearson" => Ok(Family::Pearson),
            other => Err(Error::Config(format!("unknown family `{other}`"))),
        }
    }
}

/// System matrix of a problem instance.
#[derive(Debug, Clone)]
pub enum ProblemMatrix {
    Nonneg(NonnegMatrix),
    Real(RealMatrix),
}

impl ProblemMatrix {
    pub fn rows(&self) -> usize {
        match self {
            ProblemMatrix::Nonneg(m) => m.rows(),
            ProblemMatrix::Real(m) => m.rows(),
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            ProblemMatrix::Nonneg(m) => m.cols(),
            ProblemMatrix::Real(m) => m.cols(),
        }
    }

    pub fn as_nonneg(&self) -> Result<&NonnegMatrix> {
        match self {
            ProblemMatrix::Nonneg(m) => Ok(m),
            ProblemMatrix::Real(_) => Err(Error::Config(
                "this operation needs a nonnegative system matrix".into(),
            )),
        }
    }

    pub fn as_real(&self) -> Result<&RealMatrix> {
        match self {
            ProblemMatrix::Real(m) => Ok(m),
            ProblemMatrix::Nonneg(_) => Err(Error::Config(
                "this operation needs a real system matrix".into(),
            )),
        }
    }
}

/// A solvable instance: matrix, data vector and starting vector, validated
/// for the family's domain requirements.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub family: Family,
    pub matrix: ProblemMatrix,
    pub data: Vec<f64>,
    pub start: Vec<f64>,
}

impl ProblemInstance {
    pub fn new(
        family: Family,
        matrix: ProblemMatrix,
        data: Vec<f64>,
        start: Vec<f64>,
    ) -> Result<Self> {
        if data.len() != matrix.rows() {
            return Err(Error::LengthMismatch {
                left: matrix.rows(),
                right: data.len(),
            });
        }
        if start.len() != matrix.cols() {
            return Err(Error::LengthMismatch {
                left: matrix.cols(),
                right: start.len(),
            });
        }
        if family.is_kl_family() {
            matrix.as_nonneg()?;
            check_positive("data entry", &data)?;
            check_positive("start entry", &start)?;
        } else {
            matrix.as_real()?;
            check_finite("data entry", &data)?;
            check_finite("start entry", &start)?;
        }
        Ok(ProblemInstance {
            family,
            matrix,
            data,
            start,
        })
    }
}

/// I×J array coupling an iterate to the data rows (the `r` and `q` arrays).
#[derive(Debug, Clone, PartialEq)]
pub struct CoupleArray {
    rows: usize,
    cols: usize,
    data: Vec<f64>, // row-major
}

impl CoupleArray {
    fn new(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        CoupleArray { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    /// Flat row-major entries; distances between couple arrays are vector
    /// distances over this slice.
    pub fn entries(&self) -> &[f64] {
        &self.data
    }

    pub fn into_entries(self) -> Vec<f64> {
        self.data
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows)
            .map(|i| self.data[i * self.cols..(i + 1) * self.cols].iter().sum())
            .collect()
    }
}

/// Rescale columns to unit sums and compensate the iterate:
/// P′[i][j] = P[i][j]/s_j and x′_j = s_j·x_j, so that P′x′ = Px.
pub fn normalize_columns(p: &NonnegMatrix, x: &[f64]) -> Result<(NonnegMatrix, Vec<f64>)> {
    if x.len() != p.cols() {
        return Err(Error::LengthMismatch {
            left: p.cols(),
            right: x.len(),
        });
    }
    let s = p.col_sums();
    let data: Vec<f64> = p
        .entries()
        .chunks(p.cols())
        .flat_map(|row| row.iter().zip(s).map(|(&pij, &sj)| pij / sj))
        .collect();
    let scaled: Vec<f64> = x.iter().zip(s).map(|(&xj, &sj)| sj * xj).collect();
    Ok((NonnegMatrix::new(p.rows(), p.cols(), data)?, scaled))
}

fn checked_product(p: &NonnegMatrix, x: &[f64]) -> Result<Vec<f64>> {
    let px = p.mul(x)?;
    for (i, &v) in px.iter().enumerate() {
        if v < RATIO_GUARD {
            return Err(Error::SingularRatio { index: i });
        }
    }
    Ok(px)
}

/// KL-family data coupling r(x)[i][j] = x_j·P[i][j]·y_i/(Px)_i.
///
/// Row i sums to y_i·Σⱼ x_j·P[i][j]/(Px)_i = y_i.
pub fn kl_r_array(p: &NonnegMatrix, y: &[f64], x: &[f64]) -> Result<CoupleArray> {
    if y.len() != p.rows() {
        return Err(Error::LengthMismatch {
            left: p.rows(),
            right: y.len(),
        });
    }
    check_positive("y entry", y)?;
    check_positive("x entry", x)?;
    let px = checked_product(p, x)?;
    let mut data = Vec::with_capacity(p.rows() * p.cols());
    for ((row, &yi), &pxi) in p.entries().chunks(p.cols()).zip(y).zip(&px) {
        let ratio = yi / pxi;
        for (&pij, &xj) in row.iter().zip(x) {
            data.push(xj * pij * ratio);
        }
    }
    Ok(CoupleArray::new(p.rows(), p.cols(), data))
}

/// KL-family iterate coupling q(x)[i][j] = x_j·P[i][j].
pub fn kl_q_array(p: &NonnegMatrix, x: &[f64]) -> Result<CoupleArray> {
    if x.len() != p.cols() {
        return Err(Error::LengthMismatch {
            left: p.cols(),
            right: x.len(),
        });
    }
    check_nonneg("x entry", x)?;
    let mut data = Vec::with_capacity(p.rows() * p.cols());
    for row in p.entries().chunks(p.cols()) {
        for (&pij, &xj) in row.iter().zip(x) {
            data.push(xj * pij);
        }
    }
    Ok(CoupleArray::new(p.rows(), p.cols(), data))
}

/// Least-squares data coupling
/// r(x)[i][j] = A[i][j]·x_j + (b_i − (Ax)_i)/J; row i sums to b_i.
pub fn euclid_r_array(a: &RealMatrix, b: &[f64], x: &[f64]) -> Result<CoupleArray> {
    if b.len() != a.rows() {
        return Err(Error::LengthMismatch {
            left: a.rows(),
            right: b.len(),
        });
    }
    check_finite("b entry", b)?;
    check_finite("x entry", x)?;
    let ax = a.mul(x)?;
    let jf = a.cols() as f64;
    let mut data = Vec::with_capacity(a.rows() * a.cols());
    for ((row, &bi), &axi) in a.entries().chunks(a.cols()).zip(b).zip(&ax) {
        let spread = (bi - axi) / jf;
        for (&aij, &xj) in row.iter().zip(x) {
            data.push(aij * xj + spread);
        }
    }
    Ok(CoupleArray::new(a.rows(), a.cols(), data))
}

/// Least-squares iterate coupling q(x)[i][j] = A[i][j]·x_j.
pub fn euclid_q_array(a: &RealMatrix, x: &[f64]) -> Result<CoupleArray> {
    if x.len() != a.cols() {
        return Err(Error::LengthMismatch {
            left: a.cols(),
            right: x.len(),
        });
    }
    check_finite("x entry", x)?;
    let mut data = Vec::with_capacity(a.rows() * a.cols());
    for row in a.entries().chunks(a.cols()) {
        for (&aij, &xj) in row.iter().zip(x) {
            data.push(aij * xj);
        }
    }
    Ok(CoupleArray::new(a.rows(), a.cols(), data))
}
