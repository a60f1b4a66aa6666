//! Two-qubit population channels under the spin-boson interaction.
//!
//! The M-tensor collects the pairwise single-qubit Pauli matrix elements
//! `M_abcd = 1/4 sum_{i=1,2} sum_{P=X,Y,Z} <a|P_i|b><c|P_i|d>` in an
//! orthonormal two-qubit basis. The evolution operator for the reduced
//! density matrix is then
//!
//! ```text
//! V_ab|cd = e^{-i(E_a - E_b)} { d_ac d_bd - [d_bd sum_a' M_aa'a'c - M_acdb] k
//!                                         - [d_ac sum_a' M_aa'a'b - M_acdb] k* }
//! ```
//!
//! and only its population block (a = b, c = d) is needed for the SWAP and
//! Identity channels. Channel matrices are column-stochastic: column `c`
//! is the output population distribution for pure input state `c`.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{kron2, pauli, CMat};

/// 4x4 real matrix, `m[row][col]`.
pub type Mat4 = [[f64; 4]; 4];

/// Upper end (inclusive) of the range where channels stay positive.
pub const ALPHA_POSITIVE_MAX: f64 = 1.0 / 3.0;
/// Upper end (exclusive) of the range accepted by [`population_channel`].
pub const ALPHA_CHANNEL_MAX: f64 = 0.5;

const ORTHONORMAL_TOL: f64 = 1e-12;
const NORMALIZATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gate {
    Swap,
    Identity,
}

impl Gate {
    pub fn basis(self) -> Basis4 {
        match self {
            Gate::Swap => Basis4::multiplet_swap(),
            Gate::Identity => Basis4::computational(),
        }
    }

    /// Labels of the input states in table order.
    pub fn input_labels(self) -> [&'static str; 4] {
        match self {
            Gate::Swap => ["m1", "m2", "m3", "m4"],
            Gate::Identity => COMPUTATIONAL_LABELS,
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Gate::Swap => "swap",
            Gate::Identity => "identity",
        })
    }
}

impl FromStr for Gate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "swap" => Ok(Gate::Swap),
            "identity" | "id" => Ok(Gate::Identity),
            other => Err(Error::InvalidParameter(format!(
                "unknown gate {other:?} (expected swap or identity)"
            ))),
        }
    }
}

/// Computational basis labels, `|q1 q2>` with qubit 1 the left factor.
pub const COMPUTATIONAL_LABELS: [&str; 4] = ["00", "01", "10", "11"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisName {
    MultipletSwap,
    Computational,
}

/// Orthonormal two-qubit basis, with amplitudes over `|00>,|01>,|10>,|11>`.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis4 {
    pub name: BasisName,
    vectors: [[Complex64; 4]; 4],
    /// Level energies, in units of the inverse evaluation time so that the
    /// phase in `V` is `exp(-i (E_a - E_b))`.
    energies: [f64; 4],
}

impl Basis4 {
    pub fn new(name: BasisName, vectors: [[Complex64; 4]; 4]) -> Result<Self> {
        let basis = Self {
            name,
            vectors,
            energies: [0.0; 4],
        };
        let dev = basis.gram_deviation();
        if !(dev < ORTHONORMAL_TOL) {
            return Err(Error::NonOrthonormalBasis(dev));
        }
        Ok(basis)
    }

    pub fn computational() -> Self {
        let r = |v: [f64; 4]| v.map(|x| Complex64::new(x, 0.0));
        Self::new(
            BasisName::Computational,
            [
                r([1.0, 0.0, 0.0, 0.0]),
                r([0.0, 1.0, 0.0, 0.0]),
                r([0.0, 0.0, 1.0, 0.0]),
                r([0.0, 0.0, 0.0, 1.0]),
            ],
        )
        .expect("computational basis is orthonormal")
    }

    /// `|1> = |00>, |2> = (|01> + |10>)/sqrt2, |3> = |11>, |4> = (|01> - |10>)/sqrt2`.
    pub fn multiplet_swap() -> Self {
        let r = |v: [f64; 4]| v.map(|x| Complex64::new(x, 0.0));
        let h = FRAC_1_SQRT_2;
        Self::new(
            BasisName::MultipletSwap,
            [
                r([1.0, 0.0, 0.0, 0.0]),
                r([0.0, h, h, 0.0]),
                r([0.0, 0.0, 0.0, 1.0]),
                r([0.0, h, -h, 0.0]),
            ],
        )
        .expect("multiplet basis is orthonormal")
    }

    pub fn with_energies(mut self, energies: [f64; 4]) -> Self {
        self.energies = energies;
        self
    }

    pub fn vectors(&self) -> &[[Complex64; 4]; 4] {
        &self.vectors
    }

    pub fn energies(&self) -> [f64; 4] {
        self.energies
    }

    /// Largest entrywise deviation of the Gram matrix from the identity.
    pub fn gram_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for (a, va) in self.vectors.iter().enumerate() {
            for (b, vb) in self.vectors.iter().enumerate() {
                let ip: Complex64 = va.iter().zip(vb).map(|(x, y)| x.conj() * y).sum();
                let target = if a == b { 1.0 } else { 0.0 };
                dev = dev.max((ip - target).norm());
            }
        }
        dev
    }

    /// `<a| op |b>` for a 4x4 operator on the computational basis.
    pub fn matrix_element(&self, op: &CMat, a: usize, b: usize) -> Complex64 {
        let va = &self.vectors[a];
        let vb = &self.vectors[b];
        let mut acc = Complex64::new(0.0, 0.0);
        for r in 0..4 {
            if va[r] == Complex64::new(0.0, 0.0) {
                continue;
            }
            let row: Complex64 = (0..4).map(|c| op[(r, c)] * vb[c]).sum();
            acc += va[r].conj() * row;
        }
        acc
    }
}

/// Real 4x4x4x4 tensor `M_abcd`, zero-based indices.
#[derive(Debug, Clone, PartialEq)]
pub struct MTensor {
    m: [f64; 256],
}

impl MTensor {
    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        self.m[((a * 4 + b) * 4 + c) * 4 + d]
    }

    /// `sum_a' M_{a a' a' c}`.
    pub fn trace_sum(&self, a: usize, c: usize) -> f64 {
        (0..4).map(|ap| self.get(a, ap, ap, c)).sum()
    }
}

/// The six single-qubit Pauli operators `X_1, Y_1, Z_1, X_2, Y_2, Z_2` on
/// two qubits, qubit 1 being the left tensor factor.
pub fn single_qubit_paulis() -> [CMat; 6] {
    let k = |a: CMat, b: CMat| kron2(&a, &b).expect("2x2 operands");
    [
        k(pauli::x(), pauli::id()),
        k(pauli::y(), pauli::id()),
        k(pauli::z(), pauli::id()),
        k(pauli::id(), pauli::x()),
        k(pauli::id(), pauli::y()),
        k(pauli::id(), pauli::z()),
    ]
}

pub fn m_tensor(basis: &Basis4) -> Result<MTensor> {
    let dev = basis.gram_deviation();
    if !(dev < ORTHONORMAL_TOL) {
        return Err(Error::NonOrthonormalBasis(dev));
    }
    // Each vector is written as |a> = w_a / sqrt(n_a), with w_a scaled so its
    // largest amplitude has modulus one. Normalisations then combine as
    // 1/sqrt(n_a n_b n_c n_d), which is exact whenever that product is a
    // perfect square (e.g. the 1/sqrt2 amplitudes of the multiplet basis).
    let mut dirs = *basis.vectors();
    let mut norms = [0.0; 4];
    for (w, n) in dirs.iter_mut().zip(norms.iter_mut()) {
        let lead = w
            .iter()
            .copied()
            .max_by(|x, y| x.norm().total_cmp(&y.norm()))
            .expect("four amplitudes");
        let scale = lead.norm();
        for z in w.iter_mut() {
            *z /= scale;
        }
        *n = w.iter().map(|z| z.norm_sqr()).sum();
    }
    let direction = Basis4 {
        name: basis.name,
        vectors: dirs,
        energies: basis.energies,
    };
    let ops = single_qubit_paulis();
    // elements[op][a][b] = <w_a|op|w_b>
    let mut elements = [[[Complex64::new(0.0, 0.0); 4]; 4]; 6];
    for (o, op) in ops.iter().enumerate() {
        for a in 0..4 {
            for b in 0..4 {
                elements[o][a][b] = direction.matrix_element(op, a, b);
            }
        }
    }
    let mut m = [0.0; 256];
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let sum: Complex64 = elements.iter().map(|e| e[a][b] * e[c][d]).sum();
                    let norm = (norms[a] * norms[b] * norms[c] * norms[d]).sqrt();
                    m[((a * 4 + b) * 4 + c) * 4 + d] = 0.25 * sum.re / norm;
                }
            }
        }
    }
    Ok(MTensor { m })
}

/// One element `V_{ab|cd}` of the noisy evolution operator, zero-based.
pub fn v_element(
    basis: &Basis4,
    mt: &MTensor,
    k: Complex64,
    a: usize,
    b: usize,
    c: usize,
    d: usize,
) -> Complex64 {
    let delta = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
    let e = basis.energies();
    let phase = if e[a] == e[b] {
        Complex64::new(1.0, 0.0)
    } else {
        Complex64::from_polar(1.0, -(e[a] - e[b]))
    };
    let m_acdb = mt.get(a, c, d, b);
    let first = delta(b, d) * mt.trace_sum(a, c) - m_acdb;
    let second = delta(a, c) * mt.trace_sum(a, b) - m_acdb;
    let body = Complex64::new(delta(a, c) * delta(b, d), 0.0) - k * first - k.conj() * second;
    phase * body
}

/// Population transfer matrix for a gate at `alpha = Re k(t)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Channel {
    pub gate: Gate,
    pub basis: BasisName,
    pub alpha: f64,
    pub matrix: Mat4,
}

impl Channel {
    pub fn to_cmat(&self) -> CMat {
        CMat::from_real_rows(&self.matrix).expect("4x4 is supported")
    }

    pub fn column_sums(&self) -> [f64; 4] {
        column_sums(&self.matrix)
    }
}

pub fn column_sums(m: &Mat4) -> [f64; 4] {
    let mut sums = [0.0; 4];
    for row in m {
        for (s, v) in sums.iter_mut().zip(row) {
            *s += v;
        }
    }
    sums
}

fn check_alpha(alpha: f64, max: f64, inclusive: bool, range: &'static str) -> Result<()> {
    let upper_ok = if inclusive { alpha <= max } else { alpha < max };
    if alpha.is_finite() && alpha >= 0.0 && upper_ok {
        Ok(())
    } else {
        Err(Error::AlphaOutOfRange { alpha, range })
    }
}

/// Population block of `V` in the gate's natural basis (multiplet for SWAP,
/// computational for Identity), with `Re k = alpha`.
pub fn population_channel(gate: Gate, alpha: f64) -> Result<Channel> {
    check_alpha(alpha, ALPHA_CHANNEL_MAX, false, "[0, 0.5)")?;
    let basis = gate.basis();
    let mt = m_tensor(&basis)?;
    let k = Complex64::new(alpha, 0.0);
    let mut matrix = [[0.0; 4]; 4];
    for (a, row) in matrix.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            *v = v_element(&basis, &mt, k, a, a, c, c).re;
        }
    }
    Ok(Channel {
        gate,
        basis: basis.name,
        alpha,
        matrix,
    })
}

/// Maps diagonal populations in `basis` to computational-basis populations:
/// `p_c(x) = sum_a |<x|a>|^2 p(a)`.
pub fn to_computational(rho: [f64; 4], basis: &Basis4) -> Result<[f64; 4]> {
    let total: f64 = rho.iter().sum();
    if !((total - 1.0).abs() <= NORMALIZATION_TOL) {
        return Err(Error::NotNormalized(total));
    }
    let mut out = [0.0; 4];
    for (a, vec) in basis.vectors().iter().enumerate() {
        for (x, amp) in vec.iter().enumerate() {
            out[x] += amp.norm_sqr() * rho[a];
        }
    }
    Ok(out)
}

/// Predicted outcome probabilities, `table[output][input]`, outputs in the
/// computational basis and inputs in the gate's natural basis.
pub fn predict_table(gate: Gate, alpha: f64) -> Result<Mat4> {
    check_alpha(alpha, ALPHA_POSITIVE_MAX, true, "[0, 1/3]")?;
    let ch = population_channel(gate, alpha)?;
    let basis = gate.basis();
    let mut table = [[0.0; 4]; 4];
    for input in 0..4 {
        let column = [
            ch.matrix[0][input],
            ch.matrix[1][input],
            ch.matrix[2][input],
            ch.matrix[3][input],
        ];
        let out = to_computational(column, &basis)?;
        for (output, p) in out.iter().enumerate() {
            table[output][input] = *p;
        }
    }
    Ok(table)
}
