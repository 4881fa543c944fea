//! Large deviations of the energy `S_T = int_0^T Q_t^2 d<M>_t`.
//!
//! The energy cumulant generating function is `a -> L_T(0, a)`, with limit
//! `L(a) = -(theta + phi(a)) / 2` on `(-inf, a_H)`. `L` is not steep: its
//! derivative stays bounded at `a_H`, which is why the rate becomes affine past
//! `c* = -1 / (2 theta delta_H)` and the tail changes shape there.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::model::ModelParams;
use crate::special_fn::gamma_real;
use crate::tail::{check_horizon, TailApprox, TailSide};

/// Regime of `P(S_T >= cT)` (or `P(S_T <= cT)` below the mean).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EnergyBranch {
    /// `0 < c < -1/(2 theta)`, lower tail.
    GaussianBranch,
    /// `-1/(2 theta) <= c < c*`
    EasyBranch,
    /// `|c - c*|` within the boundary tolerance.
    BoundaryBranch,
    /// `c > c*`
    HardBranch,
}

impl EnergyBranch {
    pub fn name(self) -> &'static str {
        match self {
            EnergyBranch::GaussianBranch => "GaussianBranch",
            EnergyBranch::EasyBranch => "EasyBranch",
            EnergyBranch::BoundaryBranch => "BoundaryBranch",
            EnergyBranch::HardBranch => "HardBranch",
        }
    }
}

pub type EnergyTail = TailApprox<EnergyBranch>;

/// Rate function of `S_T / T`; `+inf` for `c <= 0`.
pub fn rate_energy(params: &ModelParams, c: f64) -> f64 {
    if !(c > 0.0) {
        return f64::INFINITY;
    }
    let (easy, hard) = rate_energy_pieces(params, c);
    if c <= params.c_star() {
        easy
    } else {
        hard
    }
}

/// The two closed-form pieces of the energy rate at `c > 0`: the quadratic
/// piece used up to `c*` and the linear piece used beyond it.
pub fn rate_energy_pieces(params: &ModelParams, c: f64) -> (f64, f64) {
    let theta = params.theta();
    let delta = params.delta_h();
    (
        (2.0 * theta * c + 1.0).powi(2) / (8.0 * c),
        0.5 * c * theta * theta * (1.0 - delta * delta) + 0.5 * theta * (1.0 - delta),
    )
}

/// Derivatives in `c` of the two pieces of [`rate_energy_pieces`].
pub fn rate_energy_piece_slopes(params: &ModelParams, c: f64) -> (f64, f64) {
    let theta = params.theta();
    let delta = params.delta_h();
    (
        0.5 * theta * theta - 1.0 / (8.0 * c * c),
        0.5 * theta * theta * (1.0 - delta * delta),
    )
}

/// Half-width of the window around `c*` routed to the boundary regime.
pub fn boundary_tolerance(params: &ModelParams, horizon: f64) -> f64 {
    let slope = (2.0 * params.theta() * params.delta_h()).abs();
    (1.0 / (horizon * slope * 10.0)).max(1e-8)
}

pub fn classify_branch(params: &ModelParams, c: f64, horizon: f64) -> Result<EnergyBranch> {
    check_horizon(horizon)?;
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "energy threshold must be positive, got {c}"
        )));
    }
    let c_star = params.c_star();
    Ok(
        if (c - c_star).abs() <= boundary_tolerance(params, horizon) {
            EnergyBranch::BoundaryBranch
        } else if c > c_star {
            EnergyBranch::HardBranch
        } else if c < -0.5 / params.theta() {
            EnergyBranch::GaussianBranch
        } else {
            EnergyBranch::EasyBranch
        },
    )
}

/// Taylor jets at `a` of the limit `L`, the first-order term `H` and the
/// Bessel-limit term `K` of the energy cumulant generating function.
#[derive(Debug, Clone, Copy)]
pub struct CgfJets {
    pub l: Jet,
    pub h: Jet,
    pub k: Jet,
}

pub fn cgf_jets(params: &ModelParams, a: f64) -> Result<CgfJets> {
    let dist0 = params.a_h() - a;
    if !(dist0 > 0.0) {
        return Err(Error::Domain(format!(
            "energy tilt a = {a} is not below a_H = {}",
            params.a_h()
        )));
    }
    let theta = params.theta();
    let x = Jet::variable(a);
    let phi = (theta * theta - 2.0 * x).sqrt();
    let l = (phi + theta) * -0.5;
    let h = ((phi - theta) / (phi * 2.0)).ln() * -0.5;
    // phi + theta delta_H written as 2 (a_H - a) / (phi - theta delta_H) to
    // keep precision next to a_H, where K diverges.
    let phi_h = -theta * params.delta_h();
    let dist = params.a_h() - x;
    let k_arg = (2.0 + params.p_h()) * dist / ((phi + phi_h) * phi);
    let k = k_arg.ln() * -0.5;
    Ok(CgfJets { l, h, k })
}

/// `a_c` solving `L'(a_c) = c` for `c < c*`.
pub fn easy_saddle(params: &ModelParams, c: f64) -> f64 {
    let theta = params.theta();
    (4.0 * theta * theta * c * c - 1.0) / (8.0 * c * c)
}

fn check_easy(params: &ModelParams, c: f64) -> Result<()> {
    let centre = -0.5 / params.theta();
    let ok = c > 0.0 && c < params.c_star() && (c - centre).abs() > 1e-12 * centre;
    if ok {
        Ok(())
    } else {
        Err(Error::Branch {
            c,
            branch: "easy/Gaussian energy",
        })
    }
}

/// `(k_1, k_2, k_{c,1})`: the first two derivatives of the limit `K` at `a_c`
/// and the `1/T` coefficient of `K_T(a_c) - K(a_c)`.
pub fn k_coefficients(params: &ModelParams, c: f64) -> (f64, f64, f64) {
    let theta = params.theta();
    let p = params.p_h();
    let h = params.hurst();
    let den = 2.0 + p * (1.0 + 2.0 * theta * c);
    let k1 = -4.0 * theta * p * c.powi(3) / den;
    let k2 = -16.0 * theta * p * c.powi(5) * (6.0 + p * (3.0 + 4.0 * theta * c)) / (den * den);
    let kc1 =
        c * (1.0 + 2.0 * theta * c) * (2.0 * h - 1.0).powi(2) / (2.0 * params.sin_pi_h() * den);
    (k1, k2, kc1)
}

/// First-order coefficient `b_{c,1}` of the easy-branch expansion.
///
/// All derivatives of `L`, `H` and `K` come from their jets at `a_c`; the
/// first two of `K` agree with [`k_coefficients`].
pub fn order1_coeff_easy(params: &ModelParams, c: f64) -> Result<f64> {
    check_easy(params, c)?;
    let a = easy_saddle(params, c);
    let jets = cgf_jets(params, a)?;
    let (_, _, kc1) = k_coefficients(params, c);
    let l3 = jets.l.derivative(3);
    let l4 = jets.l.derivative(4);
    let sig2 = jets.l.derivative(2);
    let s = |q: usize| jets.h.derivative(q) + jets.k.derivative(q);
    let (s1, s2, s3) = (s(1), s(2), s(3));
    let inner = s1 / a - 0.5 * s1 * s1 - 0.5 * s2 - s3 / (2.0 * a * sig2) + s1 * l3 / (2.0 * sig2)
        - 5.0 * l3 * l3 / (24.0 * sig2 * sig2)
        + l4 / (8.0 * sig2)
        - 1.0 / (a * a);
    Ok(inner / sig2 + kc1)
}

/// Easy-branch tail. For `c` below the mean `-1/(2 theta)` this is the lower
/// tail `P(S_T <= cT)`.
pub fn tail_easy(
    params: &ModelParams,
    c: f64,
    horizon: f64,
    with_order1: bool,
) -> Result<EnergyTail> {
    check_horizon(horizon)?;
    check_easy(params, c)?;
    let theta = params.theta();
    let s = params.sin_pi_h();
    let j = -0.5 * ((1.0 - 2.0 * theta * c) / 2.0).ln();
    let k_h = -0.5 * ((1.0 + s) * (1.0 + 2.0 * theta * c * params.delta_h()) / (2.0 * s)).ln();
    let a_c = easy_saddle(params, c);
    let sigma_c = (4.0 * c.powi(3)).sqrt();
    let (side, branch) = if a_c > 0.0 {
        (TailSide::Upper, EnergyBranch::EasyBranch)
    } else {
        (TailSide::Lower, EnergyBranch::GaussianBranch)
    };
    let order1 = if with_order1 {
        Some(order1_coeff_easy(params, c)?)
    } else {
        None
    };
    Ok(TailApprox {
        rate: rate_energy(params, c),
        log_prefactor: j + k_h - (a_c.abs() * sigma_c * (2.0 * PI).sqrt()).ln(),
        t_power: -0.5,
        order1,
        branch,
        side,
        horizon,
    })
}

/// Hard-branch tail `P(S_T >= cT)` for `c > c*`, leading order.
pub fn tail_hard(params: &ModelParams, c: f64, horizon: f64) -> Result<EnergyTail> {
    check_horizon(horizon)?;
    let theta = params.theta();
    let delta = params.delta_h();
    let s = params.sin_pi_h();
    let h = params.hurst();
    let gap = 1.0 + 2.0 * theta * c * delta;
    if !(c > params.c_star() && gap < 0.0) {
        return Err(Error::Branch {
            c,
            branch: "hard energy",
        });
    }
    let p_term = -0.5 * (-gap / (4.0 * delta * s)).ln();
    let q_term = (2.0 * h - 1.0).powi(2) * s * gap / (2.0 * (1.0 - s * s));
    let scale = params.a_h() * params.sigma2_h().sqrt() * (2.0 * PI).sqrt();
    Ok(TailApprox {
        rate: rate_energy(params, c),
        log_prefactor: p_term + q_term - scale.ln(),
        t_power: -0.5,
        order1: None,
        branch: EnergyBranch::HardBranch,
        side: TailSide::Upper,
        horizon,
    })
}

fn boundary_at(params: &ModelParams, c: f64, horizon: f64) -> Result<EnergyTail> {
    check_horizon(horizon)?;
    let theta = params.theta();
    let delta = params.delta_h();
    let k_h = 0.5 * (delta * params.sin_pi_h()).ln() + 0.25 * (-theta * delta).ln();
    let scale = 2.0 * PI * params.a_h() * params.sigma2_h().sqrt();
    Ok(TailApprox {
        rate: rate_energy(params, c),
        log_prefactor: k_h + gamma_real(0.25)?.ln() - scale.ln(),
        t_power: -0.25,
        order1: None,
        branch: EnergyBranch::BoundaryBranch,
        side: TailSide::Upper,
        horizon,
    })
}

/// Tail `P(S_T >= c* T)` at the steepness threshold, decaying like `T^{-1/4}`.
pub fn tail_boundary(params: &ModelParams, horizon: f64) -> Result<EnergyTail> {
    boundary_at(params, params.c_star(), horizon)
}

/// Branch-appropriate tail approximation.
pub fn tail_energy(
    params: &ModelParams,
    c: f64,
    horizon: f64,
    with_order1: bool,
) -> Result<EnergyTail> {
    match classify_branch(params, c, horizon)? {
        EnergyBranch::GaussianBranch | EnergyBranch::EasyBranch => {
            tail_easy(params, c, horizon, with_order1)
        }
        EnergyBranch::BoundaryBranch => boundary_at(params, c, horizon),
        EnergyBranch::HardBranch => tail_hard(params, c, horizon),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ExpansionScale {
    /// powers of `1/T`
    InverseT,
    /// powers of `1/sqrt(T)`
    InverseSqrtT,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SaddleSolution {
    pub a_t: f64,
    pub phi_t: f64,
    /// `Lambda_T'(a_T) - c`
    pub residual: f64,
    pub iterations: usize,
    pub a_coeffs: [f64; 3],
    pub phi_coeffs: [f64; 3],
    pub scale: ExpansionScale,
    pub horizon: f64,
}

impl SaddleSolution {
    fn step(&self) -> f64 {
        match self.scale {
            ExpansionScale::InverseT => 1.0 / self.horizon,
            ExpansionScale::InverseSqrtT => 1.0 / self.horizon.sqrt(),
        }
    }

    /// Expansion of `a_T` truncated after `order` correction terms (0, 1 or 2).
    pub fn a_truncated(&self, order: usize) -> f64 {
        truncate(&self.a_coeffs, self.step(), order)
    }

    pub fn phi_truncated(&self, order: usize) -> f64 {
        truncate(&self.phi_coeffs, self.step(), order)
    }
}

fn truncate(coeffs: &[f64; 3], step: f64, order: usize) -> f64 {
    coeffs
        .iter()
        .take(order.min(2) + 1)
        .rev()
        .fold(0.0, |acc, &c| acc * step + c)
}

/// `Lambda_T = L + (H + K) / T` as a jet at `a`.
pub fn lambda_t_jet(params: &ModelParams, a: f64, horizon: f64) -> Result<Jet> {
    let j = cgf_jets(params, a)?;
    Ok(j.l + (j.h + j.k) / horizon)
}

const SADDLE_MAX_ITER: usize = 200;

/// Solves `Lambda_T'(a) = c` on `(-inf, a_H)` for `c` in the hard or boundary
/// regime, and attaches the large-`T` expansion of the root.
pub fn saddle_solve(params: &ModelParams, c: f64, horizon: f64) -> Result<SaddleSolution> {
    let branch = classify_branch(params, c, horizon)?;
    let (a_coeffs, phi_coeffs, scale) = match branch {
        EnergyBranch::HardBranch => {
            let (a, p) = hard_expansion(params, c);
            (a, p, ExpansionScale::InverseT)
        }
        EnergyBranch::BoundaryBranch => {
            let (a, p) = boundary_expansion(params);
            (a, p, ExpansionScale::InverseSqrtT)
        }
        _ => {
            return Err(Error::Branch {
                c,
                branch: "hard or boundary energy",
            })
        }
    };
    let a_h = params.a_h();
    let f = |a: f64| -> Result<(f64, f64)> {
        let j = lambda_t_jet(params, a, horizon)?;
        Ok((j.derivative(1) - c, j.derivative(2)))
    };

    let theta = params.theta();
    let mut width = (0.5 * (theta * params.delta_h()).powi(2)).min(1.0);
    let mut lo = a_h - width;
    let mut f_lo = f(lo)?.0;
    let mut widenings = 0;
    while f_lo > 0.0 {
        widenings += 1;
        if widenings > 60 {
            return Err(Error::Domain(format!(
                "no saddle bracket below a_H for c = {c}"
            )));
        }
        width *= 2.0;
        lo = a_h - width;
        f_lo = f(lo)?.0;
    }
    let mut hi = a_h - 1e-14;
    if f(hi)?.0 < 0.0 {
        return Err(Error::Domain(format!(
            "Lambda_T' stays below c = {c} on the whole bracket"
        )));
    }

    // Newton on the increasing function Lambda_T' - c, falling back to
    // bisection whenever the step leaves the bracket.
    let mut a = 0.5 * (lo + hi);
    let tol = 1e-13 * c.abs().max(1.0);
    for it in 1..=SADDLE_MAX_ITER {
        let (val, slope) = f(a)?;
        if val.abs() <= tol || hi - lo <= 4.0 * f64::EPSILON * a_h.abs().max(1.0) {
            return finish(params, a, val, it, a_coeffs, phi_coeffs, scale, horizon);
        }
        if val > 0.0 {
            hi = a;
        } else {
            lo = a;
        }
        let newton = a - val / slope;
        a = if slope > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    Err(Error::NoConvergence(SADDLE_MAX_ITER))
}

#[allow(clippy::too_many_arguments)]
fn finish(
    params: &ModelParams,
    a: f64,
    residual: f64,
    iterations: usize,
    a_coeffs: [f64; 3],
    phi_coeffs: [f64; 3],
    scale: ExpansionScale,
    horizon: f64,
) -> Result<SaddleSolution> {
    if residual.abs() > 1e-10 {
        return Err(Error::NoConvergence(iterations));
    }
    let theta = params.theta();
    Ok(SaddleSolution {
        a_t: a,
        phi_t: (theta * theta - 2.0 * a).sqrt(),
        residual,
        iterations,
        a_coeffs,
        phi_coeffs,
        scale,
        horizon,
    })
}

/// Coefficients of `a_T` and `phi(a_T)` in powers of `1/T` for `c > c*`.
pub fn hard_expansion(params: &ModelParams, c: f64) -> ([f64; 3], [f64; 3]) {
    let td = params.theta() * params.delta_h();
    let s = params.sin_pi_h();
    let g = 1.0 + 2.0 * c * td;
    let a1 = -td / g;
    let a2 = (2.0 * c * td * (4.0 + s) + 2.0 + s) / (2.0 * g.powi(3));
    let f1 = -1.0 / g;
    let f2 = (2.0 * c * td * (5.0 + s) + 3.0 + s) / (2.0 * td * g.powi(3));
    ([params.a_h(), a1, a2], [-td, f1, f2])
}

/// Coefficients of `a_T` and `phi(a_T)` in powers of `1/sqrt(T)` at `c = c*`.
pub fn boundary_expansion(params: &ModelParams) -> ([f64; 3], [f64; 3]) {
    let td = params.theta() * params.delta_h();
    let s = params.sin_pi_h();
    let a1 = -(-td).powf(1.5);
    let a2 = -0.25 * td * (1.0 + s);
    let f1 = (-td).sqrt();
    let f2 = -(3.0 + s) / 4.0;
    ([params.a_h(), a1, a2], [-td, f1, f2])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{gen_fn_terms, modified_terms, GenFnPoint};

    fn p075() -> ModelParams {
        ModelParams::new(-1.0, 0.75).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn rate_values() {
        let p = p075();
        assert_eq!(rate_energy(&p, 0.5), 0.0);
        assert!((rate_energy(&p, 1.0) - 0.125).abs() < 1e-15);
        // 4 a_H + theta (1 - delta_H) / 2
        assert!((rate_energy(&p, 4.0) - 1.526_911_934_581_186_6).abs() < 1e-12);
        assert_eq!(rate_energy(&p, -0.1), f64::INFINITY);
        assert_eq!(rate_energy(&p, 0.0), f64::INFINITY);
        for h in [0.55, 0.75, 0.95] {
            let q = ModelParams::new(-1.0, h).unwrap();
            assert_eq!(rate_energy(&q, 0.5), 0.0);
        }
    }

    #[test]
    fn rate_is_continuous_and_c1_at_threshold() {
        let p = p075();
        let cs = p.c_star();
        let (left, right) = rate_energy_pieces(&p, cs);
        assert!((left - right).abs() < 1e-12);
        let (ls, rs) = rate_energy_piece_slopes(&p, cs);
        assert!((ls - rs).abs() < 1e-12);
        assert!((ls - p.a_h()).abs() < 1e-12);
        for c in [0.3, 1.0, 2.0, 5.0] {
            let h = 1e-5;
            let fd = |f: fn(&ModelParams, f64) -> (f64, f64)| {
                let (a1, b1) = f(&p, c + h);
                let (a0, b0) = f(&p, c - h);
                ((a1 - a0) / (2.0 * h), (b1 - b0) / (2.0 * h))
            };
            let (fa, fb) = fd(rate_energy_pieces);
            let (sa, sb) = rate_energy_piece_slopes(&p, c);
            assert!((fa - sa).abs() < 1e-7 && (fb - sb).abs() < 1e-7, "c = {c}");
        }
    }

    #[test]
    fn rate_positive_off_the_mean() {
        let p = p075();
        for i in 1..400 {
            let c = i as f64 * 0.025;
            if (c - 0.5).abs() > 1e-9 {
                assert!(rate_energy(&p, c) > 0.0, "c = {c}");
            }
        }
    }

    #[test]
    fn near_half_recovers_classical_rate() {
        let p = ModelParams::new(-1.0, 0.5001).unwrap();
        assert!(p.c_star() > 1e4);
        for c in [0.1, 0.5, 1.0, 3.0, 10.0, 50.0] {
            let classical = (2.0 * p.theta() * c + 1.0).powi(2) / (8.0 * c);
            assert!((rate_energy(&p, c) - classical).abs() < 1e-3 * classical.max(1.0));
        }
    }

    #[test]
    fn branches() {
        let p = p075();
        assert_eq!(
            classify_branch(&p, 1.0, 100.0).unwrap(),
            EnergyBranch::EasyBranch
        );
        assert_eq!(
            classify_branch(&p, 2.914_213_6, 100.0).unwrap(),
            EnergyBranch::BoundaryBranch
        );
        assert_eq!(
            classify_branch(&p, 5.0, 100.0).unwrap(),
            EnergyBranch::HardBranch
        );
        assert_eq!(
            classify_branch(&p, 0.3, 100.0).unwrap(),
            EnergyBranch::GaussianBranch
        );
        assert!(classify_branch(&p, 0.0, 100.0).is_err());
        assert!(classify_branch(&p, -1.0, 100.0).is_err());
    }

    #[test]
    fn jets_match_finite_differences() {
        let p = p075();
        let h = 1e-3;
        for a in [-0.7, 0.1, 0.35] {
            let j = cgf_jets(&p, a).unwrap();
            for (pick, name) in [(0usize, "L"), (1, "H"), (2, "K")] {
                let val = |x: f64| {
                    let jj = cgf_jets(&p, x).unwrap();
                    [jj.l, jj.h, jj.k][pick].value()
                };
                let jet = [j.l, j.h, j.k][pick];
                let f = [-2.0, -1.0, 0.0, 1.0, 2.0].map(|k| val(a + k * h));
                let d1 = (f[0] - 8.0 * f[1] + 8.0 * f[3] - f[4]) / (12.0 * h);
                let d2 = (-f[0] + 16.0 * f[1] - 30.0 * f[2] + 16.0 * f[3] - f[4]) / (12.0 * h * h);
                let d3 = (-f[0] + 2.0 * f[1] - 2.0 * f[3] + f[4]) / (2.0 * h.powi(3));
                assert!((jet.derivative(1) - d1).abs() < 1e-6, "{name}' at {a}");
                assert!((jet.derivative(2) - d2).abs() < 1e-5, "{name}'' at {a}");
                assert!(
                    (jet.derivative(3) - d3).abs() < 1e-3 * jet.derivative(3).abs().max(1.0),
                    "{name}''' at {a}"
                );
            }
        }
    }

    #[test]
    fn k_jet_agrees_with_model_module() {
        let p = p075();
        for a in [-1.0, 0.2, 0.45] {
            let m = modified_terms(&p, a, 30.0).unwrap();
            assert!((cgf_jets(&p, a).unwrap().k.value() - m.k).abs() < 1e-13);
        }
    }

    #[test]
    fn easy_saddle_identities() {
        let p = p075();
        for c in [0.2, 0.45, 0.8, 1.5, 2.5, 2.9] {
            let a_c = easy_saddle(&p, c);
            let j = cgf_jets(&p, a_c).unwrap();
            assert!((j.l.derivative(1) - c).abs() < 1e-10, "L'(a_c) at {c}");
            assert!(rel(j.l.derivative(2), 4.0 * c.powi(3)) < 1e-10);
            // J(c) = H(a_c), K_H(c) = K(a_c)
            let theta = p.theta();
            let s = p.sin_pi_h();
            let jc = -0.5 * ((1.0 - 2.0 * theta * c) / 2.0).ln();
            let kh = -0.5 * ((1.0 + s) * (1.0 + 2.0 * theta * c * p.delta_h()) / (2.0 * s)).ln();
            assert!((j.h.value() - jc).abs() < 1e-12);
            assert!((j.k.value() - kh).abs() < 1e-12);
        }
        for i in 1..200 {
            let c = i as f64 * 0.03;
            if (c - p.c_star()).abs() > 1e-9 {
                assert_eq!(easy_saddle(&p, c) < p.a_h(), c < p.c_star(), "c = {c}");
            }
        }
    }

    #[test]
    fn sigma_c_is_curvature_at_saddle() {
        let p = p075();
        let a_c = easy_saddle(&p, 0.8);
        let l = |a: f64| cgf_jets(&p, a).unwrap().l.value();
        let h = 1e-4;
        let fd = (l(a_c + h) - 2.0 * l(a_c) + l(a_c - h)) / (h * h);
        assert!((fd - 4.0 * 0.8f64.powi(3)).abs() < 1e-6);
    }

    #[test]
    fn sigma_h_is_curvature_at_boundary() {
        let p = p075();
        // L extends analytically past a_H; evaluate it directly there.
        let theta = p.theta();
        let l = |a: f64| -0.5 * (theta + (theta * theta - 2.0 * a).sqrt());
        let h = 1e-5;
        let a = p.a_h();
        let fd = (l(a + h) - 2.0 * l(a) + l(a - h)) / (h * h);
        assert!(rel(fd, p.sigma2_h()) < 1e-6);
        let j = cgf_jets(&p, a - 1e-12).unwrap();
        assert!(rel(j.l.derivative(2), p.sigma2_h()) < 1e-8);
    }

    #[test]
    fn k_coefficients_match_jets() {
        for h in [0.6, 0.75, 0.9] {
            let p = ModelParams::new(-1.3, h).unwrap();
            for c in [0.2, 0.45 * p.c_star(), 0.9 * p.c_star()] {
                let j = cgf_jets(&p, easy_saddle(&p, c)).unwrap();
                let (k1, k2, _) = k_coefficients(&p, c);
                assert!(rel(j.k.derivative(1), k1) < 1e-11, "k1 H={h} c={c}");
                assert!(rel(j.k.derivative(2), k2) < 1e-10, "k2 H={h} c={c}");
            }
        }
    }

    #[test]
    fn k_c1_is_first_order_bessel_correction() {
        let p = p075();
        for c in [0.3, 0.8, 1.6] {
            let a_c = easy_saddle(&p, c);
            let k = cgf_jets(&p, a_c).unwrap().k.value();
            let (_, _, kc1) = k_coefficients(&p, c);
            let mut prev = f64::INFINITY;
            for t in [250.0, 500.0, 1000.0, 2000.0] {
                let kt = gen_fn_terms(&p, GenFnPoint::new(0.0, a_c, t)).unwrap().k_t;
                let err = (t * (kt - k) - kc1).abs();
                assert!(err < prev, "c = {c}, T = {t}");
                prev = err;
            }
            assert!(prev < 2e-3 * kc1.abs().max(1e-3), "c = {c}: {prev}");
        }
    }

    #[test]
    fn degenerate_corrections_vanish_near_half() {
        let p = ModelParams::new(-1.0, 0.500_001).unwrap();
        let (k1, k2, kc1) = k_coefficients(&p, 0.8);
        assert!(k1.abs() < 1e-9 && k2.abs() < 1e-9 && kc1.abs() < 1e-9);
        let t = tail_easy(&p, 0.8, 40.0, false).unwrap();
        let theta = p.theta();
        let c = 0.8;
        let j = -0.5 * ((1.0 - 2.0 * theta * c) / 2.0).ln();
        let a_c = easy_saddle(&p, c);
        let want = j - (a_c * (4.0 * c * c * c).sqrt() * (2.0 * PI).sqrt()).ln();
        assert!((t.log_prefactor - want).abs() < 1e-9);
        let p = p075();
        assert_eq!(k_coefficients(&p, 0.5).2, 0.0);
    }

    #[test]
    fn easy_tail_shapes() {
        let p = p075();
        let up = tail_easy(&p, 0.7, 40.0, true).unwrap();
        assert_eq!(up.side, TailSide::Upper);
        assert!(up.value() > 0.0 && up.value() < 1.0);
        assert!(up.order1.unwrap().is_finite());
        let low = tail_easy(&p, 0.3, 40.0, true).unwrap();
        assert_eq!(low.side, TailSide::Lower);
        assert_eq!(low.branch, EnergyBranch::GaussianBranch);
        assert!(low.value() > 0.0);
        assert!(tail_easy(&p, 0.5, 40.0, false).is_err());
        assert!(tail_easy(&p, 3.0, 40.0, false).is_err());
        assert!(order1_coeff_easy(&p, 3.5).is_err());
    }

    #[test]
    fn hard_tail_prefactor() {
        let p = p075();
        for c in [3.0, 3.5, 5.0, 20.0] {
            let gap = 1.0 + 2.0 * p.theta() * c * p.delta_h();
            assert!(gap < 0.0);
            let t = tail_hard(&p, c, 60.0).unwrap();
            assert!(t.log_prefactor.is_finite());
            assert!(t.value() > 0.0);
            assert_eq!(t.t_power, -0.5);
        }
        assert!(tail_hard(&p, 2.0, 60.0).is_err());
    }

    #[test]
    fn boundary_tail_shape_and_continuity() {
        let p = p075();
        let b = tail_boundary(&p, 100.0).unwrap();
        assert_eq!(b.t_power, -0.25);
        assert!(b.value() > 0.0);
        let t: f64 = 400.0;
        let eps = 1.0 / t;
        let cs = p.c_star();
        let easy = tail_easy(&p, cs - eps, t, false).unwrap().ln_leading();
        let hard = tail_hard(&p, cs + eps, t).unwrap().ln_leading();
        let mid = tail_boundary(&p, t).unwrap().ln_leading();
        let band = eps * t + t.ln();
        assert!((easy - mid).abs() < band);
        assert!((hard - mid).abs() < band);
    }

    #[test]
    fn dispatcher_routes_by_branch() {
        let p = p075();
        assert_eq!(
            tail_energy(&p, 0.7, 40.0, true).unwrap().branch,
            EnergyBranch::EasyBranch
        );
        assert_eq!(
            tail_energy(&p, 0.3, 40.0, true).unwrap().branch,
            EnergyBranch::GaussianBranch
        );
        assert_eq!(
            tail_energy(&p, p.c_star(), 40.0, true).unwrap().branch,
            EnergyBranch::BoundaryBranch
        );
        assert_eq!(
            tail_energy(&p, 5.0, 40.0, true).unwrap().branch,
            EnergyBranch::HardBranch
        );
    }

    #[test]
    fn saddle_root_and_consistency() {
        let p = p075();
        for (c, t) in [(5.0, 50.0), (5.0, 400.0), (3.5, 100.0), (p.c_star(), 200.0)] {
            let sol = saddle_solve(&p, c, t).unwrap();
            assert!(sol.a_t < p.a_h());
            assert!(sol.residual.abs() <= 1e-10);
            let d = lambda_t_jet(&p, sol.a_t, t).unwrap().derivative(1);
            assert!((d - c).abs() <= 1e-10);
            assert!((sol.phi_t.powi(2) + 2.0 * sol.a_t - p.theta().powi(2)).abs() < 1e-12);
        }
        assert!(saddle_solve(&p, 1.0, 100.0).is_err());
    }

    #[test]
    fn saddle_expansion_improves_with_order() {
        let p = p075();
        for c in [8.0, p.c_star()] {
            let sol = saddle_solve(&p, c, 400.0).unwrap();
            let e: Vec<f64> = (0..3)
                .map(|k| (sol.a_t - sol.a_truncated(k)).abs())
                .collect();
            assert!(e[2] < e[1] && e[1] < e[0], "c = {c}: {e:?}");
            let f: Vec<f64> = (0..3)
                .map(|k| (sol.phi_t - sol.phi_truncated(k)).abs())
                .collect();
            assert!(f[2] < f[1] && f[1] < f[0], "phi, c = {c}: {f:?}");
        }
    }
}
