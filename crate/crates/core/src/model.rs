//! Model parameters, effective domains and the exact finite-horizon
//! decomposition of the normalized cumulant generating function
//!
//! `L_T(a, b) = (1/T) log E[exp(a int Q dY + b int Q^2 d<M>)]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special_fn::{gamma_real, r_t, sin_pi};

/// Points closer than this to the boundary of an effective domain are rejected.
pub const BOUNDARY_MARGIN: f64 = 1e-12;

/// Drift `theta < 0`, Hurst index `1/2 < H < 1`, and the derived constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    theta: f64,
    hurst: f64,
    sin_pi_h: f64,
    delta_h: f64,
    p_h: f64,
    lambda_h: f64,
    l_h: f64,
    kappa_h: f64,
}

impl ModelParams {
    pub fn new(theta: f64, hurst: f64) -> Result<Self> {
        if !(theta.is_finite() && theta < 0.0) {
            return Err(Error::InvalidParams(format!(
                "drift theta must be finite and strictly negative, got {theta}"
            )));
        }
        if !(hurst > 0.5 && hurst < 1.0) {
            return Err(Error::InvalidParams(format!(
                "Hurst index must lie in (1/2, 1), got {hurst}"
            )));
        }
        Self::build(theta, hurst)
    }

    /// Bypasses the sign check on `theta`; used by tests that switch the drift off.
    #[cfg(test)]
    pub(crate) fn with_any_drift(theta: f64, hurst: f64) -> Self {
        Self::build(theta, hurst).unwrap()
    }

    fn build(theta: f64, hurst: f64) -> Result<Self> {
        let s = sin_pi(hurst);
        let delta_h = (1.0 - s) / (1.0 + s);
        let p_h = (1.0 - s) / s;
        let lambda_h =
            8.0 * hurst * (1.0 - hurst) * gamma_real(1.0 - 2.0 * hurst)? * gamma_real(hurst + 0.5)?
                / gamma_real(0.5 - hurst)?;
        let l_h = lambda_h / (2.0 * (1.0 - hurst));
        let kappa_h = 2.0 * hurst * gamma_real(1.5 - hurst)? * gamma_real(hurst + 0.5)?;
        Ok(Self {
            theta,
            hurst,
            sin_pi_h: s,
            delta_h,
            p_h,
            lambda_h,
            l_h,
            kappa_h,
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    pub fn sin_pi_h(&self) -> f64 {
        self.sin_pi_h
    }

    /// `(1 - sin(pi H)) / (1 + sin(pi H))`
    pub fn delta_h(&self) -> f64 {
        self.delta_h
    }

    /// `(1 - sin(pi H)) / sin(pi H)`
    pub fn p_h(&self) -> f64 {
        self.p_h
    }

    /// Inverse scale of the quadratic variation `<M>_t = t^{2-2H} / lambda_H`.
    pub fn lambda_h(&self) -> f64 {
        self.lambda_h
    }

    pub fn l_h(&self) -> f64 {
        self.l_h
    }

    /// Normalizing constant of the kernel `w(t, s) = s^{1/2-H} (t-s)^{1/2-H} / kappa_H`.
    pub fn kappa_h(&self) -> f64 {
        self.kappa_h
    }

    /// Right end `a_H` of the energy-section domain `(-inf, a_H)`.
    pub fn a_h(&self) -> f64 {
        0.5 * self.theta * self.theta * (1.0 - self.delta_h * self.delta_h)
    }

    /// Steepness threshold `c* = -1 / (2 theta delta_H)` of the energy rate.
    pub fn c_star(&self) -> f64 {
        -1.0 / (2.0 * self.theta * self.delta_h)
    }

    /// `<M>_t`
    pub fn quadratic_variation(&self, t: f64) -> f64 {
        t.powf(2.0 - 2.0 * self.hurst) / self.lambda_h
    }

    /// `sigma_H^2 = L''(a_H) = -1 / (2 theta^3 delta_H^3)`
    pub fn sigma2_h(&self) -> f64 {
        -1.0 / (2.0 * (self.theta * self.delta_h).powi(3))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenFnPoint {
    pub a: f64,
    pub b: f64,
    pub t: f64,
}

impl GenFnPoint {
    pub fn new(a: f64, b: f64, t: f64) -> Self {
        Self { a, b, t }
    }
}

/// The four terms of `L_T = L + (H + K_T + R_T) / T` with the intermediate
/// quantities `phi(b)`, `tau(a, b)` and `r_T(b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenFnTerms {
    pub l: f64,
    pub h_term: f64,
    pub k_t: f64,
    pub r_t: f64,
    pub phi: f64,
    pub tau: f64,
    pub r_t_bessel: f64,
}

impl GenFnTerms {
    pub fn reassemble(&self, horizon: f64) -> f64 {
        self.l + (self.h_term + self.k_t + self.r_t) / horizon
    }
}

/// Distance of `(a, b)` to the boundary of `Delta_H`, positive inside.
fn delta_margin(params: &ModelParams, a: f64, b: f64) -> f64 {
    let theta = params.theta;
    let disc = theta * theta - 2.0 * b;
    if disc <= 0.0 {
        return disc;
    }
    let phi = disc.sqrt();
    let shift = a + theta;
    let bound = shift.max(-params.delta_h * shift);
    disc.min(phi - bound)
}

/// Membership in the effective domain `Delta_H` of the limit `L`.
pub fn in_domain_delta(params: &ModelParams, a: f64, b: f64) -> bool {
    delta_margin(params, a, b) > 0.0
}

/// Energy-section domain `D_H = (-inf, a_H)`.
pub fn domain_energy(params: &ModelParams, a: f64) -> bool {
    a < params.a_h()
}

/// MLE-section domain at threshold `c`: `(a, -c a)` must lie in `Delta_H`.
pub fn domain_mle(params: &ModelParams, c: f64, a: f64) -> bool {
    in_domain_delta(params, a, -c * a)
}

fn check_interior(params: &ModelParams, point: &GenFnPoint) -> Result<()> {
    if !(point.t > 0.0 && point.t.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "horizon must be positive, got {}",
            point.t
        )));
    }
    if !(delta_margin(params, point.a, point.b) > BOUNDARY_MARGIN) {
        return Err(Error::Domain(format!(
            "(a, b) = ({}, {}) is not in the interior of Delta_H",
            point.a, point.b
        )));
    }
    Ok(())
}

/// Exact decomposition of `L_T(a, b)` into its limit, first-order term,
/// Bessel correction and exponentially small remainder.
pub fn gen_fn_terms(params: &ModelParams, point: GenFnPoint) -> Result<GenFnTerms> {
    check_interior(params, &point)?;
    let GenFnPoint { a, b, t } = point;
    let theta = params.theta;
    let phi = (theta * theta - 2.0 * b).sqrt();
    let tau = phi - (a + theta);
    let r = r_t(params.hurst, phi, t)?;
    let gap = 2.0 * phi - tau;

    let l = -0.5 * (a + theta + phi);
    let h_term = -0.5 * (tau / (2.0 * phi)).ln();

    let k_arg = gap * r / (2.0 * phi);
    if !(1.0 + k_arg > 0.0) {
        return Err(Error::LogArgument("K_T"));
    }
    let k_t = -0.5 * k_arg.ln_1p();

    let r_arg = gap * gap / (tau * (2.0 * phi + r * gap)) * (-2.0 * t * phi).exp();
    if !(1.0 + r_arg > 0.0) {
        return Err(Error::LogArgument("R_T"));
    }
    let r_term = -0.5 * r_arg.ln_1p();

    Ok(GenFnTerms {
        l,
        h_term,
        k_t,
        r_t: r_term,
        phi,
        tau,
        r_t_bessel: r,
    })
}

/// `L_T(a, b)` from the determinant form
/// `L_T = tau/2 - log(det M_T) / (2T)`, with
/// `det M_T = (tau / 2 phi) e^{2 T phi} (1 + (2phi - tau) r_T / (2 phi) + (2phi - tau)^2 e^{-2 T phi} / (2 phi tau))`.
///
/// This is an identity, not an asymptotic expansion.
pub fn exact_lt(params: &ModelParams, point: GenFnPoint) -> Result<f64> {
    check_interior(params, &point)?;
    let GenFnPoint { a, b, t } = point;
    let theta = params.theta;
    let phi = (theta * theta - 2.0 * b).sqrt();
    let tau = phi - (a + theta);
    let r = r_t(params.hurst, phi, t)?;
    let gap = 2.0 * phi - tau;
    let bracket =
        1.0 + gap * r / (2.0 * phi) + gap * gap / (2.0 * phi * tau) * (-2.0 * t * phi).exp();
    if !(bracket > 0.0) {
        return Err(Error::LogArgument("det M_T"));
    }
    let log_det = (tau / (2.0 * phi)).ln() + 2.0 * t * phi + bracket.ln();
    Ok(0.5 * tau - log_det / (2.0 * t))
}

/// Energy-section decomposition with `r_T` replaced by its limit `p_H`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModifiedTerms {
    /// `K(a) = -1/2 log(1 + (phi + theta) p_H / (2 phi))`
    pub k: f64,
    /// `R_T(a)` with check: `K_T(a) - K(a) + R_T(a)`
    pub r_check: f64,
}

/// `K` and `R_T`-check at energy tilt `a`, so that
/// `L_T(0, a) = L + (H + K + R_T-check) / T` holds exactly.
pub fn modified_terms(params: &ModelParams, a: f64, horizon: f64) -> Result<ModifiedTerms> {
    if !(params.a_h() - a > BOUNDARY_MARGIN) {
        return Err(Error::Domain(format!(
            "energy tilt a = {a} is not below a_H = {}",
            params.a_h()
        )));
    }
    if !(horizon > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    let theta = params.theta;
    let p = params.p_h;
    let phi = (theta * theta - 2.0 * a).sqrt();
    let r = r_t(params.hurst, phi, horizon)?;
    let lift = phi + theta;
    let base = 2.0 * phi + lift * p;
    let k_arg = lift * p / (2.0 * phi);
    if !(1.0 + k_arg > 0.0) {
        return Err(Error::LogArgument("K"));
    }
    let k = -0.5 * k_arg.ln_1p();
    let check_arg =
        lift * (r - p) / base + lift * lift / ((phi - theta) * base) * (-2.0 * horizon * phi).exp();
    if !(1.0 + check_arg > 0.0) {
        return Err(Error::LogArgument("R_T check"));
    }
    Ok(ModifiedTerms {
        k,
        r_check: -0.5 * check_arg.ln_1p(),
    })
}

/// `lambda_H` through the Norros et al. form `2H Gamma(3-2H) Gamma(H+1/2) / Gamma(3/2-H)`.
pub fn lambda_h_alternative(hurst: f64) -> Result<f64> {
    Ok(
        2.0 * hurst * gamma_real(3.0 - 2.0 * hurst)? * gamma_real(hurst + 0.5)?
            / gamma_real(1.5 - hurst)?,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p075() -> ModelParams {
        ModelParams::new(-1.0, 0.75).unwrap()
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(ModelParams::new(0.0, 0.75).is_err());
        assert!(ModelParams::new(1.0, 0.75).is_err());
        assert!(ModelParams::new(-1.0, 0.5).is_err());
        assert!(ModelParams::new(-1.0, 1.0).is_err());
        assert!(ModelParams::new(f64::NAN, 0.7).is_err());
    }

    #[test]
    fn derived_constants() {
        let p = p075();
        // 40-digit references
        assert!((p.delta_h() - 0.171_572_875_253_809_902_4).abs() < 1e-15);
        assert!((p.a_h() - 0.485_281_374_238_570_292_8).abs() < 1e-15);
        assert!((p.c_star() - 2.914_213_562_373_095_048_8).abs() < 1e-14);
        assert!((p.sigma2_h() - 98.997_474_683_058_326_71).abs() < 1e-10);
        assert!((p.delta_h() - p.p_h() / (2.0 + p.p_h())).abs() < 1e-15);
        assert!(p.lambda_h() > 0.0);
        assert!((p.l_h() - p.lambda_h() / 0.5).abs() < 1e-15);
        for h in [0.51, 0.6, 0.75, 0.9, 0.99] {
            let q = ModelParams::new(-1.0, h).unwrap();
            let alt = lambda_h_alternative(h).unwrap();
            assert!(((q.lambda_h() - alt) / alt).abs() < 1e-12, "H = {h}");
            assert!(q.delta_h() > 0.0 && q.delta_h() < 1.0);
        }
    }

    #[test]
    fn lambda_tends_to_one_at_half() {
        let q = ModelParams::new(-1.0, 0.500_001).unwrap();
        assert!((q.lambda_h() - 1.0).abs() < 1e-4);
    }

    #[test]
    fn domain_membership() {
        let p = p075();
        assert!(in_domain_delta(&p, 0.0, 0.0));
        assert!(!in_domain_delta(&p, 0.0, 0.6));
        let a_h = p.a_h();
        assert!(in_domain_delta(&p, 0.0, a_h - 1e-9));
        assert!(!in_domain_delta(&p, 0.0, a_h + 1e-9));
        assert!(domain_energy(&p, 0.3));
        assert!(!domain_energy(&p, 0.49));
    }

    #[test]
    fn origin_terms_vanish() {
        for (theta, h) in [(-1.0, 0.75), (-0.3, 0.6), (-2.5, 0.95)] {
            let p = ModelParams::new(theta, h).unwrap();
            for t in [0.5, 5.0, 100.0, 1e4] {
                let terms = gen_fn_terms(&p, GenFnPoint::new(0.0, 0.0, t)).unwrap();
                assert_eq!(terms.l, 0.0);
                assert_eq!(terms.h_term, 0.0);
                assert_eq!(terms.k_t, 0.0);
                assert_eq!(terms.r_t, 0.0);
                assert!(exact_lt(&p, GenFnPoint::new(0.0, 0.0, t)).unwrap().abs() < 1e-15);
            }
        }
    }

    #[test]
    fn limit_term_closed_form() {
        let p = p075();
        let terms = gen_fn_terms(&p, GenFnPoint::new(0.0, 0.3, 10.0)).unwrap();
        assert!((terms.l - 0.183_772_233_983_162_066_8).abs() < 1e-15);
    }

    #[test]
    fn two_assembly_routes_agree() {
        for (theta, h) in [(-1.0, 0.6), (-1.0, 0.75), (-0.5, 0.9)] {
            let p = ModelParams::new(theta, h).unwrap();
            for &(a, b) in &[(0.1, 0.2), (-0.3, -0.4), (0.05, 0.1), (-1.0, 0.3)] {
                let (a, b) = (a * theta * theta, b * theta * theta);
                if !in_domain_delta(&p, a, b) {
                    continue;
                }
                for t in [1.0, 5.0, 40.0] {
                    let pt = GenFnPoint::new(a, b, t);
                    let four = gen_fn_terms(&p, pt).unwrap().reassemble(t);
                    let det = exact_lt(&p, pt).unwrap();
                    assert!(
                        (four - det).abs() < 1e-13,
                        "{theta} {h} {a} {b} {t}: {four} {det}"
                    );
                }
            }
        }
    }

    #[test]
    fn converges_to_limit() {
        let p = p075();
        let pt = GenFnPoint::new(0.1, 0.2, 1e4);
        let terms = gen_fn_terms(&p, pt).unwrap();
        assert!((exact_lt(&p, pt).unwrap() - terms.l).abs() < 1e-3);
    }

    #[test]
    fn boundary_points_rejected() {
        let p = p075();
        let a_h = p.a_h();
        assert!(matches!(
            gen_fn_terms(&p, GenFnPoint::new(0.0, a_h, 10.0)),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            exact_lt(&p, GenFnPoint::new(0.0, 0.6, 10.0)),
            Err(Error::Domain(_))
        ));
        assert!(modified_terms(&p, a_h, 10.0).is_err());
    }

    #[test]
    fn modified_decomposition() {
        let p = p075();
        let m0 = modified_terms(&p, 0.0, 30.0).unwrap();
        assert_eq!(m0.k, 0.0);
        assert_eq!(m0.r_check, 0.0);

        let (a, t) = (0.3, 20.0);
        let terms = gen_fn_terms(&p, GenFnPoint::new(0.0, a, t)).unwrap();
        let m = modified_terms(&p, a, t).unwrap();
        let direct = terms.k_t - m.k + terms.r_t;
        assert!((direct - m.r_check).abs() < 1e-14);
        let reassembled = terms.l + (terms.h_term + m.k + m.r_check) / t;
        assert!((reassembled - exact_lt(&p, GenFnPoint::new(0.0, a, t)).unwrap()).abs() < 1e-14);

        let far = modified_terms(&p, 0.3, 1e3).unwrap();
        assert!(far.r_check.abs() < 1e-2);
    }

    #[test]
    fn r_t_tends_to_p_h() {
        let p = p075();
        let r1 = -(2.0 * 0.75 - 1.0f64).powi(2) / 4.0;
        for b in [-1.0f64, 0.0, 0.3] {
            let phi = (1.0 - 2.0 * b).sqrt();
            let mut worst: f64 = 0.0;
            for t in [50.0, 100.0, 200.0, 500.0, 1000.0] {
                let r = r_t(0.75, phi, t).unwrap();
                let first = 2.0 * r1 / (p.sin_pi_h() * phi * t);
                worst = worst.max(((r - p.p_h() - first) * t * t).abs());
            }
            assert!(worst < 1.0, "b = {b}: C = {worst}");
        }
    }

    #[test]
    fn energy_cgf_is_monotone_and_convex() {
        let p = p075();
        let t = 10.0;
        let grid: Vec<f64> = (0..=120)
            .map(|i| -2.0 + i as f64 * (p.a_h() - 0.01 + 2.0) / 120.0)
            .collect();
        let vals: Vec<f64> = grid
            .iter()
            .map(|&b| exact_lt(&p, GenFnPoint::new(0.0, b, t)).unwrap())
            .collect();
        for w in vals.windows(2) {
            assert!(w[1] >= w[0]);
        }
        for w in vals.windows(3) {
            assert!(t * (w[2] - 2.0 * w[1] + w[0]) >= -1e-9);
        }
    }
}
