//! The decoherence function k(t) of an ohmic bath with a hard frequency
//! cutoff, in dimensionless time `u = t / tau_s`.
//!
//! Three evaluators are provided:
//!
//! * [`re_k_approx`]: the quadratic small-coupling form used for all figure
//!   and fitting products, `(2/pi) c [(pi/2) u + u^2 / 2]` with
//!   `c = Gamma0 * wc_ts`.
//! * [`k_printed`]: the closed form in terms of the shifted sine integral.
//! * [`k_quadrature`]: direct double integration of the bath correlator. It
//!   shares no code with the other two beyond [`crate::numerics::integrate`]
//!   and serves as their oracle.
//!
//! The three do not agree in general; the printed closed form carries
//! different cutoff factors and prefactors from the rederived one. All three
//! are exposed so the difference can be reported.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{integrate, DEFAULT_QUAD_TOL};

/// Inner integrals of the double quadrature are resolved this much tighter
/// than the outer tolerance.
const INNER_TOL_FACTOR: f64 = 1e-2;
const MAX_PANELS: usize = 4096;

/// Bath and coupling parameters defining k(t).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    /// Gamma0 = lambda^2 eta k_B T tau_s.
    pub gamma0: f64,
    /// Delta0 = lambda^2 eta omega_c tau_s / pi.
    pub delta0: f64,
    /// omega_c tau_s.
    pub wc_ts: f64,
}

impl KernelParams {
    pub fn new(gamma0: f64, delta0: f64, wc_ts: f64) -> Result<Self> {
        let p = Self {
            gamma0,
            delta0,
            wc_ts,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma0.is_finite() && self.gamma0 >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "gamma0 must be finite and non-negative, got {}",
                self.gamma0
            )));
        }
        if !(self.delta0.is_finite() && self.delta0 >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "delta0 must be finite and non-negative, got {}",
                self.delta0
            )));
        }
        if !(self.wc_ts.is_finite() && self.wc_ts > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "wc_ts must be finite and positive, got {}",
                self.wc_ts
            )));
        }
        Ok(())
    }

    /// Coupling strength Gamma0 * omega_c tau_s.
    pub fn coupling(&self) -> f64 {
        self.gamma0 * self.wc_ts
    }
}

/// Which evaluator to use for k(t).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelMode {
    Approx,
    Printed,
    Quadrature,
}

impl fmt::Display for KernelMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Approx => "approx",
            Self::Printed => "printed",
            Self::Quadrature => "quadrature",
        })
    }
}

impl FromStr for KernelMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "approx" => Ok(Self::Approx),
            "printed" => Ok(Self::Printed),
            "quadrature" => Ok(Self::Quadrature),
            other => Err(Error::InvalidParameter(format!(
                "unknown kernel mode {other:?} (expected approx, printed or quadrature)"
            ))),
        }
    }
}

/// Standard sine integral `Si(x) = int_0^x sin(t)/t dt`.
///
/// Taylor series below 4. Above that, the auxiliary functions f and g in
/// `Si(x) = pi/2 - f(x) cos x - g(x) sin x` are taken from the continued
/// fraction for `E1(ix)`, which converges for any x > 0 (the asymptotic
/// series alone cannot reach 1e-10 near x = 4).
pub fn si_standard(x: f64) -> f64 {
    if x < 0.0 {
        return -si_standard(-x);
    }
    if x == 0.0 {
        return 0.0;
    }
    if x < 4.0 {
        si_taylor(x)
    } else {
        si_continued_fraction(x)
    }
}

fn si_taylor(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = 0.0;
    let mut n = 0u32;
    loop {
        let k = f64::from(2 * n + 1);
        let contrib = term / k;
        sum += contrib;
        if contrib.abs() <= 1e-18 * sum.abs() || n > 60 {
            break;
        }
        term *= -x2 / ((k + 1.0) * (k + 2.0));
        n += 1;
    }
    sum
}

fn si_continued_fraction(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = Complex64::new(1.0, x);
    let mut c = Complex64::new(1.0 / TINY, 0.0);
    let mut d = Complex64::new(1.0, 0.0) / b;
    let mut h = d;
    for i in 2..1000 {
        let a = -f64::from((i - 1) * (i - 1));
        b += 2.0;
        d = Complex64::new(1.0, 0.0) / (d * a + b);
        c = b + Complex64::new(a, 0.0) / c;
        let del = c * d;
        h *= del;
        if (del.re - 1.0).abs() + del.im.abs() < 1e-16 {
            break;
        }
    }
    h *= Complex64::new(x.cos(), -x.sin());
    FRAC_PI_2 + h.im
}

/// `int_0^x sin(t)/t dt - pi/2`, the shifted sine integral appearing in the
/// closed form of k(t). Tends to `-pi/2` at 0 and to 0 at infinity.
pub fn si_shifted(x: f64) -> f64 {
    si_standard(x) - FRAC_PI_2
}

/// Quadratic approximation of Re k in terms of the coupling strength
/// `Gamma0 * wc_ts` and `u = t / tau_s`.
pub fn re_k_approx(coupling: f64, u: f64) -> f64 {
    coupling * ((2.0 / PI) * (FRAC_PI_2 * u + 0.5 * u * u))
}

fn check_u(u: f64) -> Result<()> {
    if u.is_finite() && u >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "u = t/tau_s must be finite and non-negative, got {u}"
        )))
    }
}

/// Integrates over `[a, b]` in panels no longer than half a period of an
/// integrand oscillating at angular frequency `omega`.
fn integrate_oscillating<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    omega: f64,
    tol: f64,
) -> Result<f64> {
    if b <= a {
        return integrate(f, a, b, tol);
    }
    let half_periods = ((b - a) * omega / PI).ceil();
    let panels = (half_periods as usize).clamp(1, MAX_PANELS);
    let h = (b - a) / panels as f64;
    let panel_tol = tol / panels as f64;
    let mut total = 0.0;
    for i in 0..panels {
        let lo = a + h * i as f64;
        let hi = if i + 1 == panels { b } else { lo + h };
        total += integrate(&f, lo, hi, panel_tol)?;
    }
    Ok(total)
}

/// k(u) from the closed form: real part
/// `(2/pi) Gamma0 [(pi/2) wc_ts u + int_0^u si_shifted(wc_ts s) ds]`,
/// imaginary part `Delta0 [u - (pi/2 + si_shifted(wc_ts u)) / wc_ts]`.
///
/// The imaginary bracket is read with the shifted sine integral so that
/// k(0) = 0.
pub fn k_printed(p: &KernelParams, u: f64) -> Result<Complex64> {
    p.validate()?;
    check_u(u)?;
    if u == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let w = p.wc_ts;
    let tail = integrate_oscillating(|s| si_shifted(w * s), 0.0, u, w, DEFAULT_QUAD_TOL)?;
    let re_bracket = FRAC_PI_2 * w * u + tail;
    let im_bracket = u - (FRAC_PI_2 + si_shifted(w * u)) / w;
    Ok(Complex64::new(
        (2.0 / PI) * p.gamma0 * re_bracket,
        p.delta0 * im_bracket,
    ))
}

/// `sin(w s) / s`, continued to `w` at the origin.
fn sinc_scaled(w: f64, s: f64) -> f64 {
    let x = w * s;
    if x.abs() < 1e-4 {
        w * (1.0 - x * x / 6.0 + x.powi(4) / 120.0)
    } else {
        x.sin() / s
    }
}

/// `sin(w s) / (w s^2) - cos(w s) / s`, continued to 0 at the origin.
fn dispersive_kernel(w: f64, s: f64) -> f64 {
    let x = w * s;
    if x.abs() < 0.1 {
        // (1/s) sum_{n>=1} (-1)^{n+1} 2n x^{2n} / (2n+1)!, with 1/s = w/x
        let x2 = x * x;
        let mut pow = x; // x^{2n-1}
        let mut fact = 6.0; // 3!
        let mut sum = 0.0;
        for n in 1..=6 {
            let nf = f64::from(n);
            let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
            sum += sign * 2.0 * nf * pow / fact;
            pow *= x2;
            fact *= (2.0 * nf + 2.0) * (2.0 * nf + 3.0);
        }
        w * sum
    } else {
        (x.sin() / x - x.cos()) / s
    }
}

/// k(u) by nested adaptive quadrature of the bath correlator
///
/// ```text
/// Gamma(s) + i Delta(s) = (pi Gamma0 / 2) sin(w s)/s
///                         - i Delta0 [sin(w s)/(w s^2) - cos(w s)/s]
/// k(u) = int_0^u ds int_0^s dsigma (Gamma(sigma) + i Delta(sigma))
/// ```
///
/// with `w = wc_ts` and times in units of tau_s.
pub fn k_quadrature(p: &KernelParams, u: f64) -> Result<Complex64> {
    p.validate()?;
    check_u(u)?;
    if u == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let w = p.wc_ts;
    let tol = DEFAULT_QUAD_TOL;
    let inner_tol = tol * INNER_TOL_FACTOR;

    let outer = |kernel: fn(f64, f64) -> f64| -> Result<f64> {
        let failure = std::cell::Cell::new(None);
        let value = integrate_oscillating(
            |s| match integrate_oscillating(|x| kernel(w, x), 0.0, s, w, inner_tol) {
                Ok(v) => v,
                Err(e) => {
                    failure.set(Some(e));
                    f64::NAN
                }
            },
            0.0,
            u,
            w,
            tol,
        );
        match (value, failure.into_inner()) {
            (_, Some(e)) => Err(e),
            (v, None) => v,
        }
    };

    let re = if p.gamma0 == 0.0 {
        0.0
    } else {
        FRAC_PI_2 * p.gamma0 * outer(sinc_scaled)?
    };
    let im = if p.delta0 == 0.0 {
        0.0
    } else {
        -p.delta0 * outer(dispersive_kernel)?
    };
    Ok(Complex64::new(re, im))
}

/// Small-time limit of the quadrature real part, `(pi Gamma0 wc_ts / 4) u^2`.
pub fn re_k_small_time(p: &KernelParams, u: f64) -> f64 {
    PI * p.gamma0 * p.wc_ts / 4.0 * u * u
}

/// Evaluates k(u) with the chosen evaluator. The approximate form has no
/// imaginary part and uses `params.coupling()`.
pub fn evaluate(mode: KernelMode, params: &KernelParams, u: f64) -> Result<Complex64> {
    match mode {
        KernelMode::Approx => {
            params.validate()?;
            check_u(u)?;
            Ok(Complex64::new(re_k_approx(params.coupling(), u), 0.0))
        }
        KernelMode::Printed => k_printed(params, u),
        KernelMode::Quadrature => k_quadrature(params, u),
    }
}
