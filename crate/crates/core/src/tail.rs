//! Sharp tail approximations of the form
//! `exp(-T I + log_prefactor) T^{t_power} (1 + order1 / T)`.

use serde::Serialize;

/// Which half-line the probability refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TailSide {
    /// `P(X_T >= c T)` or `P(theta_hat >= c)`
    Upper,
    /// `P(X_T <= c T)` or `P(theta_hat <= c)`
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailApprox<B> {
    pub rate: f64,
    pub log_prefactor: f64,
    pub t_power: f64,
    pub order1: Option<f64>,
    pub branch: B,
    pub side: TailSide,
    pub horizon: f64,
}

impl<B> TailApprox<B> {
    /// Natural log of the leading-order approximation (without the order-1 bracket).
    pub fn ln_leading(&self) -> f64 {
        -self.horizon * self.rate + self.log_prefactor + self.t_power * self.horizon.ln()
    }

    pub fn leading(&self) -> f64 {
        self.ln_leading().exp()
    }

    /// Approximation including the order-1 correction when present.
    pub fn value(&self) -> f64 {
        self.leading() * self.bracket()
    }

    pub fn bracket(&self) -> f64 {
        1.0 + self.order1.unwrap_or(0.0) / self.horizon
    }

    pub fn without_order1(mut self) -> Self {
        self.order1 = None;
        self
    }
}

pub(crate) fn check_horizon(horizon: f64) -> crate::Result<()> {
    if horizon > 0.0 && horizon.is_finite() {
        Ok(())
    } else {
        Err(crate::Error::InvalidArgument(format!(
            "horizon must be positive and finite, got {horizon}"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn assembles_value() {
        let t = TailApprox {
            rate: 0.1,
            log_prefactor: 0.2,
            t_power: -0.5,
            order1: Some(3.0),
            branch: (),
            side: TailSide::Upper,
            horizon: 10.0,
        };
        let want = (-1.0f64 + 0.2).exp() / 10f64.sqrt() * 1.3;
        assert!((t.value() - want).abs() < 1e-15);
        assert!((t.without_order1().value() - want / 1.3).abs() < 1e-15);
    }
}
