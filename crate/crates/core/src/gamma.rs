//! The sixteen Dirac Gamma matrices and decomposition of 4x4 operators in
//! that basis.
//!
//! Representation: `gamma_i = [[0, sigma_i], [sigma_i, 0]]` for i = 1, 2, 3
//! and `gamma_0 = i diag(I, -I)`, with metric `g = diag(-1, 1, 1, 1)`.
//! The basis is ordered
//!
//! ```text
//! I; g0 g1 g2 g3; g0g1 g0g2 g0g3 g1g2 g1g3 g2g3; g5g0 g5g1 g5g2 g5g3; g5
//! ```
//!
//! where `g5 = g0 g1 g2 g3`. Every entry is exactly 0, +-1 or +-i, so the
//! algebraic checks below use exact equality.

use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::numerics::{self, kron2, mat_mul, pauli, CMat, I, ONE};

pub const BASIS_SIZE: usize = 16;

/// Diagonal of the metric tensor, indexed by mu = 0..3.
pub const METRIC: [f64; 4] = [-1.0, 1.0, 1.0, 1.0];

pub const LABELS: [&str; BASIS_SIZE] = [
    "I", "g0", "g1", "g2", "g3", "g0g1", "g0g2", "g0g3", "g1g2", "g1g3", "g2g3", "g5g0", "g5g1",
    "g5g2", "g5g3", "g5",
];

/// Index pairs (mu < nu) of the six two-gamma products, in basis order.
pub const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// The five sets the sixteen matrices fall into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum GammaSet {
    /// identity
    #[serde(rename = "Gamma1")]
    Gamma1,
    /// gamma_mu
    #[serde(rename = "Gamma2")]
    Gamma2,
    /// gamma_mu gamma_nu, mu < nu
    #[serde(rename = "Gamma3")]
    Gamma3,
    /// gamma_5 gamma_mu
    #[serde(rename = "Gamma4")]
    Gamma4,
    /// gamma_5
    #[serde(rename = "Gamma5")]
    Gamma5,
}

impl GammaSet {
    pub fn of_index(r: usize) -> Self {
        match r {
            0 => Self::Gamma1,
            1..=4 => Self::Gamma2,
            5..=10 => Self::Gamma3,
            11..=14 => Self::Gamma4,
            15 => Self::Gamma5,
            _ => panic!("basis index {r} out of range"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GammaElement {
    pub label: &'static str,
    pub set: GammaSet,
    pub matrix: CMat,
}

/// The sixteen Gamma matrices plus the flattened 16x16 system used to
/// decompose arbitrary 4x4 matrices.
#[derive(Debug, Clone)]
pub struct GammaBasis {
    elements: Vec<GammaElement>,
    /// Column `r` is the row-major flattening of element `r`.
    flat: CMat,
}

impl GammaBasis {
    /// Wraps sixteen 4x4 matrices given in canonical label order without
    /// checking any algebra. Used by self-check tooling to exercise a
    /// deliberately broken basis.
    pub fn from_matrices(matrices: Vec<CMat>) -> Result<Self> {
        if matrices.len() != BASIS_SIZE {
            return Err(Error::ShapeMismatch(format!(
                "expected {BASIS_SIZE} basis matrices, got {}",
                matrices.len()
            )));
        }
        if let Some(m) = matrices.iter().find(|m| m.dim() != 4) {
            return Err(Error::ShapeMismatch(format!(
                "basis matrices must be 4x4, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        let flat = CMat::from_fn(BASIS_SIZE, |entry, r| matrices[r].as_slice()[entry])?;
        let elements = matrices
            .into_iter()
            .enumerate()
            .map(|(r, matrix)| GammaElement {
                label: LABELS[r],
                set: GammaSet::of_index(r),
                matrix,
            })
            .collect();
        Ok(Self { elements, flat })
    }

    pub fn elements(&self) -> &[GammaElement] {
        &self.elements
    }

    pub fn matrix(&self, r: usize) -> &CMat {
        &self.elements[r].matrix
    }

    pub fn by_label(&self, label: &str) -> Option<&CMat> {
        self.elements
            .iter()
            .find(|e| e.label == label)
            .map(|e| &e.matrix)
    }

    /// `gamma_mu` for mu = 0..3.
    pub fn gamma(&self, mu: usize) -> &CMat {
        assert!(mu < 4, "Lorentz index {mu} out of range");
        &self.elements[1 + mu].matrix
    }

    pub fn gamma5(&self) -> &CMat {
        &self.elements[15].matrix
    }

    /// The 16x16 matrix whose columns are the flattened basis elements.
    pub fn flattened(&self) -> &CMat {
        &self.flat
    }
}

/// Builds the canonical basis from the Pauli matrices.
pub fn build_gamma_basis() -> GammaBasis {
    let offdiag = |s: CMat| kron2(&pauli::x(), &s).expect("2x2 operands");
    let g0 = kron2(&pauli::z(), &pauli::id())
        .expect("2x2 operands")
        .scale(I);
    let g = [g0, offdiag(pauli::x()), offdiag(pauli::y()), offdiag(pauli::z())];
    let mul = |a: &CMat, b: &CMat| mat_mul(a, b).expect("4x4 operands");
    let g5 = mul(&mul(&mul(&g[0], &g[1]), &g[2]), &g[3]);

    let mut matrices = Vec::with_capacity(BASIS_SIZE);
    matrices.push(CMat::identity(4).expect("4x4 is supported"));
    matrices.extend(g.iter().cloned());
    matrices.extend(PAIRS.iter().map(|&(mu, nu)| mul(&g[mu], &g[nu])));
    matrices.extend(g.iter().map(|gm| mul(&g5, gm)));
    matrices.push(g5);
    GammaBasis::from_matrices(matrices).expect("sixteen 4x4 matrices")
}

/// `{gamma_mu, gamma_nu} = gamma_mu gamma_nu + gamma_nu gamma_mu`.
pub fn anticommutator(basis: &GammaBasis, mu: usize, nu: usize) -> CMat {
    let a = basis.gamma(mu);
    let b = basis.gamma(nu);
    let ab = mat_mul(a, b).expect("4x4 operands");
    let ba = mat_mul(b, a).expect("4x4 operands");
    &ab + &ba
}

/// `2 g_{mu nu} I_4`.
pub fn metric_identity(mu: usize, nu: usize) -> CMat {
    let g = if mu == nu { METRIC[mu] } else { 0.0 };
    CMat::identity(4)
        .expect("4x4 is supported")
        .scale(Complex64::new(2.0 * g, 0.0))
}

/// Expansion weights over the sixteen basis elements, in canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaCoeffs {
    values: [Complex64; BASIS_SIZE],
}

impl GammaCoeffs {
    pub fn new(values: [Complex64; BASIS_SIZE]) -> Self {
        Self { values }
    }

    pub fn zero() -> Self {
        Self::new([numerics::ZERO; BASIS_SIZE])
    }

    /// A single unit weight on the element with the given label.
    pub fn unit(label: &str) -> Option<Self> {
        let idx = LABELS.iter().position(|l| *l == label)?;
        let mut c = Self::zero();
        c.values[idx] = ONE;
        Some(c)
    }

    pub fn values(&self) -> &[Complex64; BASIS_SIZE] {
        &self.values
    }

    pub fn get(&self, label: &str) -> Option<Complex64> {
        LABELS
            .iter()
            .position(|l| *l == label)
            .map(|i| self.values[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'static str, Complex64)> + '_ {
        LABELS.iter().copied().zip(self.values.iter().copied())
    }

    /// Sum of the moduli of all sixteen weights.
    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).sum()
    }

    pub fn max_abs_diff(&self, other: &GammaCoeffs) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

#[derive(Serialize)]
struct CoeffEntry {
    label: &'static str,
    set: GammaSet,
    re: f64,
    im: f64,
}

impl Serialize for GammaCoeffs {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let entries: Vec<CoeffEntry> = self
            .iter()
            .enumerate()
            .map(|(r, (label, z))| CoeffEntry {
                label,
                set: GammaSet::of_index(r),
                re: z.re,
                im: z.im,
            })
            .collect();
        entries.serialize(serializer)
    }
}

/// Unique coefficients `c` with `sum_r c_r gamma_r = m`, found by solving the
/// flattened 16x16 linear system.
pub fn decompose(basis: &GammaBasis, m: &CMat) -> Result<GammaCoeffs> {
    if m.dim() != 4 {
        return Err(Error::ShapeMismatch(format!(
            "decompose needs a 4x4 matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let x = numerics::solve_linear(basis.flattened(), m.as_slice())?;
    let mut values = [numerics::ZERO; BASIS_SIZE];
    values.copy_from_slice(&x);
    Ok(GammaCoeffs::new(values))
}

pub fn reconstruct(basis: &GammaBasis, c: &GammaCoeffs) -> CMat {
    let mut out = CMat::zeros(4).expect("4x4 is supported");
    for (element, &w) in basis.elements().iter().zip(c.values()) {
        if w != numerics::ZERO {
            out = &out + &element.matrix.scale(w);
        }
    }
    out
}
