//! Truncated Taylor arithmetic used to differentiate the closed-form cumulant
//! generating functions exactly up to fourth order.

use std::ops::{Add, Div, Mul, Neg, Sub};

pub const JET_LEN: usize = 5;

/// Taylor coefficients `c_k` of `f(x0 + e) = sum_k c_k e^k`, truncated after `e^4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet(pub [f64; JET_LEN]);

impl Jet {
    pub fn constant(c: f64) -> Self {
        let mut v = [0.0; JET_LEN];
        v[0] = c;
        Jet(v)
    }

    pub fn variable(x0: f64) -> Self {
        let mut v = [0.0; JET_LEN];
        v[0] = x0;
        v[1] = 1.0;
        Jet(v)
    }

    pub fn value(&self) -> f64 {
        self.0[0]
    }

    /// k-th derivative at the expansion point.
    pub fn derivative(&self, k: usize) -> f64 {
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        self.0[k] * fact
    }

    // f(x0 + h) with f given by its Taylor coefficients at x0.
    fn compose(&self, coeffs: [f64; JET_LEN]) -> Self {
        let mut h = *self;
        h.0[0] = 0.0;
        let mut out = Jet::constant(coeffs[0]);
        let mut power = Jet::constant(1.0);
        for &c in coeffs.iter().skip(1) {
            power = power * h;
            out = out + power * c;
        }
        out
    }

    pub fn recip(self) -> Self {
        let x = self.value();
        let mut c = [0.0; JET_LEN];
        let mut p = 1.0 / x;
        for (k, ck) in c.iter_mut().enumerate() {
            *ck = if k % 2 == 0 { p } else { -p };
            p /= x;
        }
        self.compose(c)
    }

    pub fn ln(self) -> Self {
        let x = self.value();
        let mut c = [0.0; JET_LEN];
        c[0] = x.ln();
        let mut p = 1.0;
        for (k, ck) in c.iter_mut().enumerate().skip(1) {
            p /= x;
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            *ck = sign * p / k as f64;
        }
        self.compose(c)
    }

    pub fn sqrt(self) -> Self {
        let x = self.value();
        let mut c = [0.0; JET_LEN];
        // binomial series of (x + h)^{1/2}
        let mut binom = 1.0;
        let mut p = x.sqrt();
        for (k, ck) in c.iter_mut().enumerate() {
            *ck = binom * p;
            binom *= (0.5 - k as f64) / (k as f64 + 1.0);
            p /= x;
        }
        self.compose(c)
    }

    pub fn exp(self) -> Self {
        let e = self.value().exp();
        let mut c = [0.0; JET_LEN];
        let mut fact = 1.0;
        for (k, ck) in c.iter_mut().enumerate() {
            if k > 0 {
                fact *= k as f64;
            }
            *ck = e / fact;
        }
        self.compose(c)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        let mut v = self.0;
        v.iter_mut().zip(rhs.0).for_each(|(a, b)| *a += b);
        Jet(v)
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        self + (-rhs)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet(self.0.map(|a| -a))
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        let mut v = [0.0; JET_LEN];
        for i in 0..JET_LEN {
            for j in 0..JET_LEN - i {
                v[i + j] += self.0[i] * rhs.0[j];
            }
        }
        Jet(v)
    }
}

impl Div for Jet {
    type Output = Jet;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Jet) -> Jet {
        self * rhs.recip()
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(self, rhs: f64) -> Jet {
        let mut v = self.0;
        v[0] += rhs;
        Jet(v)
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(self, rhs: f64) -> Jet {
        self + (-rhs)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        Jet(self.0.map(|a| a * rhs))
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    fn div(self, rhs: f64) -> Jet {
        Jet(self.0.map(|a| a / rhs))
    }
}

impl Add<Jet> for f64 {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        rhs + self
    }
}

impl Sub<Jet> for f64 {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        (-rhs) + self
    }
}

impl Mul<Jet> for f64 {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        rhs * self
    }
}

impl Div<Jet> for f64 {
    type Output = Jet;
    fn div(self, rhs: Jet) -> Jet {
        rhs.recip() * self
    }
}
