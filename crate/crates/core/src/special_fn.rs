//! Special functions on the real line: Gamma with reflection, modified Bessel
//! functions of the first kind of real order, and the Bessel product `r_H`
//! that drives the finite-horizon corrections of the cumulant generating
//! function.
//!
//! Bessel evaluation uses the ascending power series for `z <= SERIES_CROSSOVER`
//! and the Hankel large-argument expansion above it. Both routes are returned
//! in exponentially scaled form (`e^{-z} I_nu(z)`) so that products like
//! `I_H(z) I_{1-H}(z) e^{-2z}` never overflow.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Crossover between the power series and the large-argument expansion.
pub const SERIES_CROSSOVER: f64 = 20.0;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// `sin(pi x)` with exact zeros at the integers.
pub fn sin_pi(x: f64) -> f64 {
    let r = x.rem_euclid(2.0);
    if r == 0.0 || r == 1.0 {
        return 0.0;
    }
    if r < 0.5 {
        (PI * r).sin()
    } else if r < 1.5 {
        (PI * (1.0 - r)).sin()
    } else {
        (PI * (r - 2.0)).sin()
    }
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.round()
}

fn lanczos(x: f64) -> f64 {
    // valid for x >= 0.5
    let x = x - 1.0;
    let mut acc = LANCZOS_COEFFS[0];
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * acc
}

/// Gamma function on the real line.
///
/// Negative arguments go through `Gamma(x) Gamma(1-x) = pi / sin(pi x)`.
pub fn gamma_real(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::InvalidArgument(format!("gamma of non-finite {x}")));
    }
    if is_nonpositive_integer(x) {
        return Err(Error::GammaPole(x));
    }
    if x < 0.5 {
        let s = sin_pi(x);
        Ok(PI / (s * lanczos(1.0 - x)))
    } else if x > 171.7 {
        Err(Error::Overflow(format!("gamma({x})")))
    } else {
        Ok(lanczos(x))
    }
}

/// `1 / Gamma(x)`, equal to zero at the poles.
pub fn rgamma(x: f64) -> f64 {
    if is_nonpositive_integer(x) {
        return 0.0;
    }
    if x < 0.5 {
        sin_pi(x) * lanczos(1.0 - x) / PI
    } else if x > 171.7 {
        0.0
    } else {
        1.0 / lanczos(x)
    }
}

/// Order of a modified Bessel function, restricted to `|nu| < 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselOrder(f64);

impl BesselOrder {
    pub fn new(nu: f64) -> Result<Self> {
        if !nu.is_finite() || nu.abs() >= 2.0 {
            return Err(Error::InvalidArgument(format!(
                "Bessel order must be finite with |nu| < 2, got {nu}"
            )));
        }
        Ok(Self(nu))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for BesselOrder {
    type Error = Error;

    fn try_from(nu: f64) -> Result<Self> {
        Self::new(nu)
    }
}

fn check_argument(z: f64) -> Result<()> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "Bessel argument must be positive and finite, got {z}"
        )));
    }
    Ok(())
}

/// Power series `sum (z/2)^{2k+nu} / (k! Gamma(k+nu+1))`, unscaled.
pub(crate) fn series_i(nu: f64, z: f64) -> f64 {
    // I_{-n} = I_n for integer orders
    let nu = if nu < 0.0 && nu == nu.round() {
        -nu
    } else {
        nu
    };
    let half = 0.5 * z;
    let q = half * half;
    let mut term = half.powf(nu) * rgamma(nu + 1.0);
    let mut sum = term;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= q / (k * (k + nu));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() || k > 500.0 {
            break;
        }
    }
    sum
}

/// Hankel expansion of `e^{-z} I_nu(z)`; the `e^{-2z}` companion term is
/// dropped, which is below `1e-17` relative for `z >= 20`.
pub(crate) fn asymptotic_i_scaled(nu: f64, z: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        let odd = 2.0 * k - 1.0;
        let next = -term * (mu - odd * odd) / (8.0 * k * z);
        if next.abs() >= term.abs() && k > 1.0 {
            break;
        }
        sum += next;
        term = next;
        if term.abs() <= 1e-17 * sum.abs() || k > 200.0 {
            break;
        }
        k += 1.0;
    }
    sum / (2.0 * PI * z).sqrt()
}

/// `e^{-z} I_nu(z)`, stable for large `z`.
pub fn bessel_i_scaled(nu: BesselOrder, z: f64) -> Result<f64> {
    check_argument(z)?;
    let nu = nu.value();
    if z <= SERIES_CROSSOVER {
        Ok(series_i(nu, z) * (-z).exp())
    } else {
        Ok(asymptotic_i_scaled(nu, z))
    }
}

/// Modified Bessel function of the first kind `I_nu(z)` for real order.
pub fn bessel_i(nu: BesselOrder, z: f64) -> Result<f64> {
    check_argument(z)?;
    if z <= SERIES_CROSSOVER {
        return Ok(series_i(nu.value(), z));
    }
    if z > 709.0 {
        return Err(Error::Overflow(format!(
            "I_nu({z}) exceeds the f64 range; use bessel_i_scaled"
        )));
    }
    Ok(asymptotic_i_scaled(nu.value(), z) * z.exp())
}

fn check_hurst(h: f64) -> Result<()> {
    if !(0.5..1.0).contains(&h) {
        return Err(Error::InvalidArgument(format!(
            "Hurst index must lie in [1/2, 1), got {h}"
        )));
    }
    Ok(())
}

/// `e^{-2z} r_H(z)`, the overflow-free form of `r_H`.
pub fn r_h_scaled(h: f64, z: f64) -> Result<f64> {
    check_hurst(h)?;
    check_argument(z)?;
    let i = |nu: f64| bessel_i_scaled(BesselOrder(nu), z);
    let prod = i(h)? * i(1.0 - h)? + i(-h)? * i(h - 1.0)?;
    Ok(PI * z / sin_pi(h) * prod)
}

/// `log r_H(z)`, finite for any `z > 0`.
pub fn log_r_h(h: f64, z: f64) -> Result<f64> {
    Ok(2.0 * z + r_h_scaled(h, z)?.ln())
}

/// `r_H(z) = pi z / sin(pi H) (I_H I_{1-H} + I_{-H} I_{H-1})(z)`.
pub fn r_h(h: f64, z: f64) -> Result<f64> {
    let log = log_r_h(h, z)?;
    if log > 709.0 {
        return Err(Error::Overflow(format!(
            "r_H({z}) exceeds the f64 range; use log_r_h"
        )));
    }
    Ok(log.exp())
}

/// `r_H(phi T / 2) e^{-T phi} - 1`, assembled from scaled Bessel products.
pub fn r_t(h: f64, phi: f64, horizon: f64) -> Result<f64> {
    Ok(r_h_scaled(h, 0.5 * phi * horizon)? - 1.0)
}

/// Leading coefficients of the large-argument expansion
/// `r_H(z) = e^{2z} / sin(pi H) (1 + r_1/z + r_2/z^2 + ...)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RHExpansion {
    coefficients: Vec<f64>,
}

impl RHExpansion {
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn order(&self) -> usize {
        self.coefficients.len()
    }

    /// `1 + sum_k r_k / z^k`.
    pub fn bracket(&self, z: f64) -> f64 {
        self.coefficients
            .iter()
            .enumerate()
            .fold(1.0, |acc, (k, r)| acc + r / z.powi(k as i32 + 1))
    }
}

pub fn r_h_coeffs(h: f64, order: usize) -> Result<RHExpansion> {
    if order == 0 || order > 2 {
        return Err(Error::UnsupportedOrder(order));
    }
    let d = 2.0 * h - 1.0;
    let d2 = d * d;
    let all = [-d2 / 4.0, d2 * (2.0 * h + 1.0) * (2.0 * h - 3.0) / 32.0];
    Ok(RHExpansion {
        coefficients: all[..order].to_vec(),
    })
}
