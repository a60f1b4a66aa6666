//! Recovery operators that undo a noisy population channel, and the
//! sampling overhead (cost) of realising them as quasi-probability mixtures.

use serde::Serialize;

use crate::channel::{population_channel, Channel, Gate, Mat4};
use crate::error::{Error, Result};
use crate::gamma::{build_gamma_basis, decompose, GammaBasis, GammaCoeffs};
use crate::numerics::{mat_inv, CMat};

/// Upper end (exclusive) of the recovery domain: first root of both
/// channel determinants.
pub const ALPHA_RECOVERY_MAX: f64 = 0.25;

const DENOMINATOR_TOL: f64 = 1e-12;

fn check_domain(alpha: f64) -> Result<()> {
    if alpha.is_finite() && (0.0..ALPHA_RECOVERY_MAX).contains(&alpha) {
        Ok(())
    } else {
        Err(Error::AlphaOutOfRange {
            alpha,
            range: "[0, 0.25)",
        })
    }
}

fn checked_denominator(den: f64) -> Result<f64> {
    if den.abs() < DENOMINATOR_TOL {
        Err(Error::DenominatorNearZero(den))
    } else {
        Ok(den)
    }
}

/// Inverse of the channel's population matrix.
pub fn recovery_numeric(ch: &Channel) -> Result<CMat> {
    check_domain(ch.alpha)?;
    mat_inv(&ch.to_cmat())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SwapCoeffs {
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
}

impl SwapCoeffs {
    /// `[[C,B,D,B],[B,E,B,B],[D,B,C,B],[B,B,B,E]]`
    pub fn matrix(&self) -> Mat4 {
        let SwapCoeffs { b, c, d, e } = *self;
        [[c, b, d, b], [b, e, b, b], [d, b, c, b], [b, b, b, e]]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdCoeffs {
    pub f: f64,
    pub g: f64,
    pub h: f64,
}

impl IdCoeffs {
    /// `[[F,H,H,G],[H,F,G,H],[H,G,F,H],[G,H,H,F]]`
    pub fn matrix(&self) -> Mat4 {
        let IdCoeffs { f, g, h } = *self;
        [[f, h, h, g], [h, f, g, h], [h, g, f, h], [g, h, h, f]]
    }
}

fn swap_denominator(a: f64) -> f64 {
    1.0 - 10.0 * a + 32.0 * a * a - 32.0 * a.powi(3)
}

fn id_denominator(a: f64) -> f64 {
    1.0 - 8.0 * a + 20.0 * a * a - 16.0 * a.powi(3)
}

pub fn closed_form_swap(alpha: f64) -> Result<SwapCoeffs> {
    check_domain(alpha)?;
    let a = alpha;
    let den = checked_denominator(swap_denominator(a))?;
    let (a2, a3) = (a * a, a.powi(3));
    Ok(SwapCoeffs {
        b: (-a + 6.0 * a2 - 8.0 * a3) / den,
        c: (1.0 - 8.0 * a + 18.0 * a2 - 8.0 * a3) / den,
        d: (2.0 * a2 - 8.0 * a3) / den,
        e: (1.0 - 7.0 * a + 14.0 * a2 - 8.0 * a3) / den,
    })
}

pub fn closed_form_id(alpha: f64) -> Result<IdCoeffs> {
    check_domain(alpha)?;
    let a = alpha;
    let den = checked_denominator(id_denominator(a))?;
    let (a2, a3) = (a * a, a.powi(3));
    Ok(IdCoeffs {
        f: (1.0 - 6.0 * a + 10.0 * a2 - 4.0 * a3) / den,
        g: (2.0 * a2 - 4.0 * a3) / den,
        h: (-a + 4.0 * a2 - 4.0 * a3) / den,
    })
}

/// `|C+E|/2 + |C-E|/2 + 3|B| + |D|`, with each absolute value taken on the
/// combined polynomial numerator.
pub fn cost_swap(alpha: f64) -> Result<f64> {
    check_domain(alpha)?;
    let a = alpha;
    let den = checked_denominator(swap_denominator(a))?;
    let (a2, a3) = (a * a, a.powi(3));
    let c_plus_e = (2.0 - 15.0 * a + 32.0 * a2 - 16.0 * a3).abs();
    let c_minus_e = (a - 4.0 * a2).abs();
    let b = (-a + 6.0 * a2 - 8.0 * a3).abs();
    let d = (2.0 * a2 - 8.0 * a3).abs();
    Ok((c_plus_e + c_minus_e) / (2.0 * den.abs()) + (3.0 * b + d) / den.abs())
}

/// `|F| + |G| + 2|H|`.
pub fn cost_id(alpha: f64) -> Result<f64> {
    let IdCoeffs { f, g, h } = closed_form_id(alpha)?;
    Ok(f.abs() + g.abs() + 2.0 * h.abs())
}

pub fn cost(gate: Gate, alpha: f64) -> Result<f64> {
    match gate {
        Gate::Swap => cost_swap(alpha),
        Gate::Identity => cost_id(alpha),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ClosedForm {
    Swap(SwapCoeffs),
    Identity(IdCoeffs),
}

impl ClosedForm {
    pub fn matrix(&self) -> Mat4 {
        match self {
            ClosedForm::Swap(c) => c.matrix(),
            ClosedForm::Identity(c) => c.matrix(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RecoveryOp {
    pub gate: Gate,
    pub alpha: f64,
    /// Numeric inverse of the channel, in the gate's natural basis.
    pub matrix: Mat4,
    pub coeffs: ClosedForm,
    pub gamma: GammaCoeffs,
}

impl RecoveryOp {
    pub fn new(gate: Gate, alpha: f64) -> Result<Self> {
        Self::with_basis(gate, alpha, &build_gamma_basis())
    }

    pub fn with_basis(gate: Gate, alpha: f64, basis: &GammaBasis) -> Result<Self> {
        check_domain(alpha)?;
        let ch = population_channel(gate, alpha)?;
        let inv = recovery_numeric(&ch)?;
        let matrix = inv
            .to_real4()
            .ok_or_else(|| Error::ShapeMismatch("recovery of a real channel is not real".into()))?;
        let coeffs = match gate {
            Gate::Swap => ClosedForm::Swap(closed_form_swap(alpha)?),
            Gate::Identity => ClosedForm::Identity(closed_form_id(alpha)?),
        };
        let gamma = decompose(basis, &inv)?;
        Ok(Self {
            gate,
            alpha,
            matrix,
            coeffs,
            gamma,
        })
    }

    pub fn to_cmat(&self) -> CMat {
        CMat::from_real_rows(&self.matrix).expect("4x4 is supported")
    }
}

/// Sum of the absolute Gamma-basis weights of the recovery operator.
pub fn cost_from_decomposition(r: &RecoveryOp) -> f64 {
    r.gamma.l1_norm()
}
