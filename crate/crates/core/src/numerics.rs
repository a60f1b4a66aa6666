//! Small dense complex linear algebra and adaptive quadrature.
//!
//! Everything here is sized for the two-qubit problem: 2x2 Pauli blocks,
//! 4x4 channel and Gamma matrices, and the 16x16 system used to decompose a
//! 4x4 matrix in the Gamma basis. Other shapes are rejected at construction.

use std::cell::Cell;
use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Relative determinant threshold below which a matrix is treated as singular.
pub const SINGULAR_RTOL: f64 = 1e-10;

/// Default absolute tolerance for [`integrate`].
pub const DEFAULT_QUAD_TOL: f64 = 1e-10;

const SUPPORTED_DIMS: [usize; 3] = [2, 4, 16];

/// Dense row-major complex matrix.
#[derive(Clone, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMat {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows != cols || !SUPPORTED_DIMS.contains(&rows) {
            return Err(Error::UnsupportedShape { rows, cols });
        }
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(n, n, vec![ZERO; n * n])
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut m = Self::zeros(n)?;
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        Ok(m)
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> Complex64) -> Result<Self> {
        let mut data = Vec::with_capacity(n * n);
        for r in 0..n {
            for c in 0..n {
                data.push(f(r, c));
            }
        }
        Self::new(n, n, data)
    }

    /// Builds a matrix from real rows.
    pub fn from_real_rows<const N: usize>(rows: &[[f64; N]; N]) -> Result<Self> {
        Self::from_fn(N, |r, c| Complex64::new(rows[r][c], 0.0))
    }

    /// Builds a matrix from complex rows.
    pub fn from_rows<const N: usize>(rows: &[[Complex64; N]; N]) -> Result<Self> {
        Self::from_fn(N, |r, c| rows[r][c])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dim(&self) -> usize {
        self.rows
    }

    /// Row-major entries.
    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        let n = self.rows;
        let mut out = self.clone();
        for r in 0..n {
            for c in 0..n {
                out[(c, r)] = self[(r, c)];
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &CMat) -> f64 {
        assert_eq!(self.rows, other.rows, "dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Real parts as nested rows; only meaningful for 4x4 matrices.
    pub fn to_real4(&self) -> Option<[[f64; 4]; 4]> {
        if self.rows != 4 {
            return None;
        }
        let mut out = [[0.0; 4]; 4];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = self[(r, c)].re;
            }
        }
        Some(out)
    }

    pub fn matmul(&self, other: &CMat) -> Result<CMat> {
        mat_mul(self, other)
    }
}

impl Index<(usize, usize)> for CMat {
    type Output = Complex64;

    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.cols + c]
    }
}

impl Add for &CMat {
    type Output = CMat;

    fn add(self, rhs: &CMat) -> CMat {
        assert_eq!(self.rows, rhs.rows, "dimension mismatch");
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMat {
    type Output = CMat;

    fn sub(self, rhs: &CMat) -> CMat {
        assert_eq!(self.rows, rhs.rows, "dimension mismatch");
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul<Complex64> for &CMat {
    type Output = CMat;

    fn mul(self, rhs: Complex64) -> CMat {
        self.scale(rhs)
    }
}

impl fmt::Debug for CMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMat {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, " ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, " {:+.6}{:+.6}i", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Pauli matrices and the 2x2 identity.
pub mod pauli {
    use super::*;

    pub fn id() -> CMat {
        CMat::identity(2).expect("2x2 is supported")
    }

    pub fn x() -> CMat {
        CMat::from_rows(&[[ZERO, ONE], [ONE, ZERO]]).expect("2x2 is supported")
    }

    pub fn y() -> CMat {
        CMat::from_rows(&[[ZERO, -I], [I, ZERO]]).expect("2x2 is supported")
    }

    pub fn z() -> CMat {
        CMat::from_rows(&[[ONE, ZERO], [ZERO, -ONE]]).expect("2x2 is supported")
    }
}

pub fn mat_mul(a: &CMat, b: &CMat) -> Result<CMat> {
    if a.cols != b.rows {
        return Err(Error::ShapeMismatch(format!(
            "cannot multiply {}x{} by {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let n = a.rows;
    let m = b.cols;
    let mut data = vec![ZERO; n * m];
    for r in 0..n {
        for k in 0..a.cols {
            let lhs = a[(r, k)];
            if lhs == ZERO {
                continue;
            }
            for c in 0..m {
                data[r * m + c] += lhs * b[(k, c)];
            }
        }
    }
    CMat::new(n, m, data)
}

/// Tensor product of two 2x2 matrices, ordered so that index `2 i + j`
/// addresses the computational state `|i j>`.
pub fn kron2(a: &CMat, b: &CMat) -> Result<CMat> {
    if a.dim() != 2 || b.dim() != 2 {
        return Err(Error::ShapeMismatch(format!(
            "kron2 needs two 2x2 matrices, got {}x{} and {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    CMat::from_fn(4, |r, c| a[(r / 2, c / 2)] * b[(r % 2, c % 2)])
}

/// LU factorisation with partial pivoting, `P A = L U` packed in one matrix.
struct Lu {
    n: usize,
    lu: Vec<Complex64>,
    perm: Vec<usize>,
    det: Complex64,
}

impl Lu {
    fn factor(a: &CMat) -> Result<Self> {
        let lu = Self::decompose(a);
        let threshold = SINGULAR_RTOL * a.max_abs().powi(a.rows as i32);
        if !(lu.det.norm() > threshold) {
            return Err(Error::SingularMatrix {
                det: lu.det.norm(),
                threshold,
            });
        }
        Ok(lu)
    }

    fn decompose(a: &CMat) -> Self {
        let n = a.rows;
        let mut lu = a.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut det = ONE;
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| lu[i * n + k].norm().total_cmp(&lu[j * n + k].norm()))
                .expect("non-empty pivot range");
            if p != k {
                for c in 0..n {
                    lu.swap(k * n + c, p * n + c);
                }
                perm.swap(k, p);
                det = -det;
            }
            let pivot = lu[k * n + k];
            det *= pivot;
            if pivot == ZERO {
                continue;
            }
            for r in (k + 1)..n {
                let factor = lu[r * n + k] / pivot;
                lu[r * n + k] = factor;
                if factor == ZERO {
                    continue;
                }
                for c in (k + 1)..n {
                    let upper = lu[k * n + c];
                    lu[r * n + c] -= factor * upper;
                }
            }
        }
        Self { n, lu, perm, det }
    }

    fn solve(&self, y: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| y[p]).collect();
        for r in 0..n {
            for c in 0..r {
                let l = self.lu[r * n + c];
                let xc = x[c];
                x[r] -= l * xc;
            }
        }
        for r in (0..n).rev() {
            for c in (r + 1)..n {
                let u = self.lu[r * n + c];
                let xc = x[c];
                x[r] -= u * xc;
            }
            x[r] /= self.lu[r * n + r];
        }
        x
    }
}

/// Determinant via LU with partial pivoting.
pub fn det(a: &CMat) -> Complex64 {
    Lu::decompose(a).det
}

/// Inverse by LU with partial pivoting.
///
/// Fails with [`Error::SingularMatrix`] when `|det| <= 1e-10 * max|a_ij|^n`.
pub fn mat_inv(a: &CMat) -> Result<CMat> {
    let lu = Lu::factor(a)?;
    let n = a.rows;
    let mut inv = CMat::zeros(n)?;
    let mut e = vec![ZERO; n];
    for c in 0..n {
        e.iter_mut().for_each(|v| *v = ZERO);
        e[c] = ONE;
        let col = lu.solve(&e);
        for r in 0..n {
            inv[(r, c)] = col[r];
        }
    }
    Ok(inv)
}

/// Solves `A x = y` for square `A`.
pub fn solve_linear(a: &CMat, y: &[Complex64]) -> Result<Vec<Complex64>> {
    if y.len() != a.rows {
        return Err(Error::ShapeMismatch(format!(
            "right-hand side has {} entries, matrix has {} rows",
            y.len(),
            a.rows
        )));
    }
    Ok(Lu::factor(a)?.solve(y))
}

/// Numerical rank by Gaussian elimination with complete pivoting.
pub fn rank(a: &CMat, rtol: f64) -> usize {
    let n = a.rows;
    let mut m = a.clone();
    let tol = rtol * a.max_abs().max(f64::MIN_POSITIVE);
    let mut rank = 0;
    let mut used_cols = vec![false; n];
    let mut used_rows = vec![false; n];
    for _ in 0..n {
        let mut best = (0, 0, 0.0);
        for r in (0..n).filter(|&r| !used_rows[r]) {
            for c in (0..n).filter(|&c| !used_cols[c]) {
                let v = m[(r, c)].norm();
                if v > best.2 {
                    best = (r, c, v);
                }
            }
        }
        let (pr, pc, pv) = best;
        if pv <= tol {
            break;
        }
        used_rows[pr] = true;
        used_cols[pc] = true;
        rank += 1;
        let pivot = m[(pr, pc)];
        for r in (0..n).filter(|&r| !used_rows[r]) {
            let f = m[(r, pc)] / pivot;
            for c in 0..n {
                let u = m[(pr, c)];
                m[(r, c)] -= f * u;
            }
        }
    }
    rank
}

const QUAD_INITIAL_PANELS: usize = 8;
const QUAD_MAX_DEPTH: u32 = 50;
const QUAD_MAX_EVALS: u64 = 20_000_000;
const ROUNDOFF_FLOOR: f64 = 64.0 * f64::EPSILON;

// 15-point Kronrod abscissae on [-1, 1] (non-negative half, descending) with
// their weights, and the weights of the embedded 7-point Gauss rule, which
// uses the odd-indexed abscissae.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Kronrod<'a, F: Fn(f64) -> f64> {
    f: &'a F,
    evals: Cell<u64>,
    a: f64,
    b: f64,
}

impl<F: Fn(f64) -> f64> Kronrod<'_, F> {
    fn non_convergence(&self) -> Error {
        Error::NonConvergence {
            a: self.a,
            b: self.b,
        }
    }

    fn eval(&self, x: f64) -> Result<f64> {
        let n = self.evals.get() + 1;
        self.evals.set(n);
        let v = (self.f)(x);
        if !v.is_finite() || n > QUAD_MAX_EVALS {
            return Err(self.non_convergence());
        }
        Ok(v)
    }

    /// Kronrod estimate and its difference from the embedded Gauss rule.
    fn rule(&self, a: f64, b: f64) -> Result<(f64, f64)> {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let fc = self.eval(c)?;
        let mut kronrod = WGK[7] * fc;
        let mut gauss = WG[3] * fc;
        for j in 0..7 {
            let dx = h * XGK[j];
            let pair = self.eval(c - dx)? + self.eval(c + dx)?;
            kronrod += WGK[j] * pair;
            if j % 2 == 1 {
                gauss += WG[j / 2] * pair;
            }
        }
        Ok((kronrod * h, (kronrod - gauss) * h))
    }

    fn step(&self, a: f64, b: f64, tol: f64, depth: u32) -> Result<f64> {
        let (value, diff) = self.rule(a, b)?;
        // Below the roundoff floor further bisection cannot reduce the error.
        if diff.abs() <= tol.max(ROUNDOFF_FLOOR * value.abs()) {
            return Ok(value);
        }
        let m = 0.5 * (a + b);
        if depth == 0 || !(m > a && b > m) {
            return Err(self.non_convergence());
        }
        Ok(self.step(a, m, 0.5 * tol, depth - 1)? + self.step(m, b, 0.5 * tol, depth - 1)?)
    }
}

/// Adaptive Gauss-Kronrod (7/15) quadrature of `f` over `[a, b]` to absolute
/// tolerance `tol`.
///
/// The interval is first cut into a few equal panels so that short-period
/// oscillations cannot alias the initial estimate. The rule never samples
/// the endpoints, but removable singularities should still be resolved by
/// the caller.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) || a > b {
        return Err(Error::InvalidParameter(format!(
            "integration bounds must satisfy a <= b, got [{a}, {b}]"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "quadrature tolerance must be positive, got {tol}"
        )));
    }
    if a == b {
        return Ok(0.0);
    }
    let k = Kronrod {
        f: &f,
        evals: Cell::new(0),
        a,
        b,
    };
    let h = (b - a) / QUAD_INITIAL_PANELS as f64;
    let panel_tol = tol / QUAD_INITIAL_PANELS as f64;
    let mut total = 0.0;
    for i in 0..QUAD_INITIAL_PANELS {
        let lo = a + h * i as f64;
        let hi = if i + 1 == QUAD_INITIAL_PANELS { b } else { lo + h };
        total += k.step(lo, hi, panel_tol, QUAD_MAX_DEPTH)?;
    }
    Ok(total)
}
