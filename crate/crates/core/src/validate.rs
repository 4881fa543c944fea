//! Monte Carlo comparisons, numerical oracles and goodness-of-fit utilities.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::energy::{rate_energy, tail_energy};
use crate::error::{Error, Result};
use crate::mle::{limit_cgf, rate_mle, tail_mle};
use crate::model::{domain_mle, ModelParams};
use crate::sim::{clt_statistics, MartingaleSampler, RngSpec, Scheme, TerminalStats, TimeGrid};
use crate::special_fn::gamma_real;
use crate::tail::TailSide;

/// Which statistic a tail or rate refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Energy,
    Mle,
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Target::Energy => "energy",
            Target::Mle => "mle",
        })
    }
}

impl FromStr for Target {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "energy" => Ok(Target::Energy),
            "mle" => Ok(Target::Mle),
            other => Err(Error::InvalidArgument(format!(
                "unknown target {other:?} (expected energy or mle)"
            ))),
        }
    }
}

/// Monte Carlo estimate of a probability against its closed form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MCReport {
    pub label: String,
    pub estimate: f64,
    /// binomial standard error; zero when no replicate hit the event
    pub std_error: f64,
    pub successes: u64,
    pub replicates: u64,
    pub closed_form: f64,
    /// `None` when the comparison is underpowered or degenerate
    pub z_score: Option<f64>,
    /// closed form below `10 / replicates`
    pub underpowered: bool,
    /// one-sided 95% upper bound when there are no successes
    pub upper_bound: Option<f64>,
    /// closed form is not a probability (a negative order-1 bracket at short horizons)
    pub invalid_approximation: bool,
    pub seed: RngSpec,
}

/// Shortest replicate count accepted by [`mc_tail`].
pub const MIN_TAIL_REPLICATES: usize = 10_000;

/// Counts the tail event on precomputed samples and compares it with the
/// branch-appropriate approximation.
pub fn mc_tail_from_samples(
    params: &ModelParams,
    target: Target,
    c: f64,
    horizon: f64,
    samples: &[TerminalStats],
    seed: RngSpec,
    with_order1: bool,
) -> Result<MCReport> {
    let (closed_form, side, branch) = match target {
        Target::Energy => {
            let t = tail_energy(params, c, horizon, with_order1)?;
            let v = if with_order1 { t.value() } else { t.leading() };
            (v, t.side, t.branch.name())
        }
        Target::Mle => {
            let t = tail_mle(params, c, horizon)?;
            (t.value(), t.side, t.branch.name())
        }
    };
    let hit = |s: &TerminalStats| -> bool {
        let x = match target {
            Target::Energy => s.energy - c * horizon,
            Target::Mle => s.theta_hat - c,
        };
        match side {
            TailSide::Upper => x >= 0.0,
            TailSide::Lower => x <= 0.0,
        }
    };
    let successes = samples.iter().filter(|s| hit(s)).count() as u64;
    Ok(binomial_report(
        format!(
            "{target} {} c={c} T={horizon}{}",
            branch,
            if with_order1 { " order1" } else { "" }
        ),
        successes,
        samples.len() as u64,
        closed_form,
        seed,
    ))
}

/// Assembles an [`MCReport`] from a success count.
pub fn binomial_report(
    label: String,
    successes: u64,
    replicates: u64,
    closed_form: f64,
    seed: RngSpec,
) -> MCReport {
    let n = replicates as f64;
    let estimate = successes as f64 / n;
    let std_error = (estimate * (1.0 - estimate) / n).sqrt();
    let underpowered = closed_form < 10.0 / n;
    let invalid_approximation = !(closed_form > 0.0 && closed_form <= 1.0);
    let upper_bound = (successes == 0).then(|| 1.0 - 0.05f64.powf(1.0 / n));
    let z_score = if underpowered || invalid_approximation || successes == 0 || std_error == 0.0 {
        None
    } else {
        Some((estimate - closed_form) / std_error)
    };
    MCReport {
        label,
        estimate,
        std_error,
        successes,
        replicates,
        closed_form,
        z_score,
        underpowered,
        upper_bound,
        invalid_approximation,
        seed,
    }
}

/// Simulates `replicates` paths on the standard grid and compares the
/// empirical tail with its approximation.
#[allow(clippy::too_many_arguments)]
pub fn mc_tail(
    params: &ModelParams,
    target: Target,
    c: f64,
    horizon: f64,
    replicates: usize,
    grid_n: usize,
    seed: u64,
    with_order1: bool,
) -> Result<MCReport> {
    if replicates < MIN_TAIL_REPLICATES {
        return Err(Error::InvalidArgument(format!(
            "tail comparisons need at least {MIN_TAIL_REPLICATES} replicates, got {replicates}"
        )));
    }
    let grid = TimeGrid::standard(horizon, grid_n)?;
    let sampler = MartingaleSampler::new(params, &grid, Scheme::Exact)?;
    let samples = sampler.batch(seed, replicates);
    mc_tail_from_samples(
        params,
        target,
        c,
        horizon,
        &samples,
        RngSpec::new(seed, 0),
        with_order1,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    /// numerical value (quadrature or optimization)
    pub lhs: f64,
    /// closed form or series
    pub rhs: f64,
    pub abs_err: f64,
    /// `None` when `|rhs| <= 1e-300`
    pub rel_err: Option<f64>,
    pub method: String,
    /// optimizer location, for the rate oracles
    pub argmax: Option<f64>,
    /// optimizer sits on the edge of the effective domain
    pub at_boundary: bool,
    /// residual of the component that vanishes by symmetry, for the contour oracle
    pub symmetry_residual: Option<f64>,
}

impl OracleReport {
    fn new(lhs: f64, rhs: f64, method: String) -> Self {
        let abs_err = (lhs - rhs).abs();
        Self {
            lhs,
            rhs,
            abs_err,
            rel_err: (rhs.abs() > 1e-300).then(|| abs_err / rhs.abs()),
            method,
            argmax: None,
            at_boundary: false,
            symmetry_residual: None,
        }
    }
}

const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Maximizes a concave `f` on `[lo, hi]`: a coarse grid, then golden section
/// around the best grid point. Returns `(argmax, max)`.
fn maximize_concave(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
    const GRID: usize = 400;
    let step = (hi - lo) / GRID as f64;
    let mut best = (lo, f(lo));
    for k in 1..=GRID {
        let x = if k == GRID { hi } else { lo + step * k as f64 };
        let v = f(x);
        if v > best.1 {
            best = (x, v);
        }
    }
    let (mut a, mut b) = ((best.0 - step).max(lo), (best.0 + step).min(hi));
    let mut x1 = b - GOLDEN * (b - a);
    let mut x2 = a + GOLDEN * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if b - a <= 1e-13 * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + GOLDEN * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - GOLDEN * (b - a);
            f1 = f(x1);
        }
    }
    for (x, v) in [(x1, f1), (x2, f2), (a, f(a)), (b, f(b))] {
        if v > best.1 {
            best = (x, v);
        }
    }
    best
}

/// Edge of `{a : inside(a)}` between a known interior point and a far point,
/// located by bisection.
fn domain_edge(inside: &dyn Fn(f64) -> bool, interior: f64, direction: f64) -> f64 {
    let mut reach = 1.0;
    while inside(interior + direction * reach) {
        reach *= 2.0;
        if reach > 1e15 {
            return interior + direction * reach;
        }
    }
    let (mut good, mut bad) = (interior, interior + direction * reach);
    for _ in 0..200 {
        let mid = 0.5 * (good + bad);
        if mid == good || mid == bad {
            break;
        }
        if inside(mid) {
            good = mid;
        } else {
            bad = mid;
        }
    }
    good
}

/// Numerical Legendre transform of the limit cumulant generating function,
/// compared with the closed-form rate.
///
/// Energy: `sup_{a < a_H} (c a - L(a))`. MLE: `-inf_{a in D_H} L(a)` for the
/// auxiliary variable `Z_T(c)`. Domains are found from the membership
/// predicates by bisection, not from their closed forms.
pub fn legendre_oracle(params: &ModelParams, target: Target, c: f64) -> Result<OracleReport> {
    let theta = params.theta();
    match target {
        Target::Energy => {
            if !(c > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "energy threshold must be positive, got {c}"
                )));
            }
            let limit = |a: f64| -0.5 * (theta + (theta * theta - 2.0 * a).sqrt());
            let inside = |a: f64| -> bool {
                // (0, a) in Delta_H
                crate::model::in_domain_delta(params, 0.0, a)
            };
            let hi = domain_edge(&inside, 0.0, 1.0);
            let obj = |a: f64| c * a - limit(a);
            // widen to the left until the concave objective turns down
            let mut lo = hi - 1.0;
            while obj(lo) >= obj(0.5 * (lo + hi)) {
                lo = hi - 2.0 * (hi - lo);
                if hi - lo > 1e12 {
                    break;
                }
            }
            let (arg, val) = maximize_concave(&obj, lo, hi);
            let mut rep = OracleReport::new(
                val,
                rate_energy(params, c),
                "grid + golden section of c a - L(a) over the energy domain".into(),
            );
            rep.argmax = Some(arg);
            rep.at_boundary = hi - arg <= 1e-6 * (hi - lo);
            Ok(rep)
        }
        Target::Mle => {
            let inside = |a: f64| domain_mle(params, c, a);
            if !inside(0.0) {
                return Err(Error::Domain(format!(
                    "origin outside the MLE domain at c = {c}"
                )));
            }
            let lo = domain_edge(&inside, 0.0, -1.0);
            let hi = domain_edge(&inside, 0.0, 1.0);
            let obj = |a: f64| -limit_cgf(params, c, a);
            let (arg, val) = maximize_concave(&obj, lo, hi);
            let mut rep = OracleReport::new(
                val,
                rate_mle(params, c),
                "grid + golden section of -L(a) over the MLE domain".into(),
            );
            rep.argmax = Some(arg);
            let width = hi - lo;
            rep.at_boundary = (hi - arg).min(arg - lo) <= 1e-6 * width;
            Ok(rep)
        }
    }
}

/// `n`-th derivative at `x = 1` of the Gamma density `b^a x^{a-1} e^{-bx} / Gamma(a)`.
pub fn gamma_density_derivative(a: f64, b: f64, n: usize) -> Result<f64> {
    let norm = b.powf(a) / gamma_real(a)? * (-b).exp();
    // Leibniz on x^{a-1} e^{-bx} at x = 1
    let mut sum = 0.0;
    let mut falling = 1.0;
    let mut binom = 1.0;
    for j in 0..=n {
        if j > 0 {
            falling *= a - j as f64;
            binom *= (n - j + 1) as f64 / j as f64;
        }
        sum += binom * falling * (-b).powi((n - j) as i32);
    }
    Ok(norm * sum)
}

/// Series side `sum_{k <= p} v_k / T^k` of the Gamma contour integral. The
/// returned value is the coefficient of `i^l`'s non-vanishing component: real
/// for even `l`, imaginary for odd `l`.
pub fn gamma_contour_series(
    a: f64,
    nu: f64,
    gamma: f64,
    sigma2: f64,
    horizon: f64,
    ell: usize,
    p: usize,
) -> Result<f64> {
    let b = gamma / (2.0 * nu);
    let unit = if (ell / 2).is_multiple_of(2) {
        1.0
    } else {
        -1.0
    };
    let mut sum = 0.0;
    let mut fact = 1.0;
    for k in 0..=p {
        if k > 0 {
            fact *= k as f64;
        }
        let d = gamma_density_derivative(a, b, 2 * k + ell)?;
        let v = 2.0 * std::f64::consts::PI * sigma2.powi(k as i32) * unit * d
            / (2f64.powi(k as i32) * fact * gamma.powi((2 * k + ell + 1) as i32));
        sum += v / horizon.powi(k as i32);
    }
    Ok(sum)
}

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1].
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
    0.209_482_141_084_728_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Kronrod value, Gauss-Kronrod difference and `int |f|` on `[a, b]`.
fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    let mut abs = WGK[7] * fc.abs();
    for j in 0..7 {
        let x = h * XGK[j];
        let (fl, fr) = (f(c - x), f(c + x));
        kron += WGK[j] * (fl + fr);
        abs += WGK[j] * (fl.abs() + fr.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (fl + fr);
        }
    }
    (kron * h, ((kron - gauss) * h).abs(), (abs * h).abs())
}

/// Compensated running sum.
#[derive(Default, Clone, Copy)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

fn adaptive(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
    depth: usize,
    acc: &mut Neumaier,
) -> Result<()> {
    let (v, err, abs) = gk15(f, a, b);
    // roundoff in the abscissa grows with |u| through the oscillating phase
    let floor = 50.0 * f64::EPSILON * abs * (1.0 + a.abs().max(b.abs()));
    if err <= tol.max(floor) || (b - a).abs() < 1e-12 {
        acc.add(v);
        return Ok(());
    }
    if depth == 0 {
        return Err(Error::NoConvergence(depth));
    }
    let m = 0.5 * (a + b);
    adaptive(f, a, m, 0.5 * tol, depth - 1, acc)?;
    adaptive(f, m, b, 0.5 * tol, depth - 1, acc)
}

/// Integral of `f` over `[0, upper]` (or `[upper, 0]`) on panels of length
/// `panel`, each refined adaptively.
fn panel_integral(f: &dyn Fn(f64) -> f64, upper: f64, panel: f64, tol: f64) -> Result<f64> {
    let n = (upper.abs() / panel).ceil().max(1.0) as usize;
    let h = upper / n as f64;
    let mut acc = Neumaier::default();
    for k in 0..n {
        adaptive(f, h * k as f64, h * (k + 1) as f64, tol, 30, &mut acc)?;
    }
    Ok(acc.value())
}

/// Quadrature of `int_R exp(-i gamma u - sigma2 u^2 / (2T)) u^l (1 - 2 i nu u)^{-a} du`
/// against its series in `1/T`.
///
/// `lhs` and `rhs` are the non-vanishing component (real part for even `l`,
/// imaginary part for odd `l`). The other component, which cancels between the
/// two half-lines, is reported as `symmetry_residual`.
#[allow(clippy::too_many_arguments)]
pub fn gamma_contour_oracle(
    a: f64,
    nu: f64,
    gamma: f64,
    sigma2: f64,
    horizon: f64,
    ell: usize,
    p: usize,
) -> Result<OracleReport> {
    for (name, v) in [
        ("a", a),
        ("nu", nu),
        ("gamma", gamma),
        ("sigma2", sigma2),
        ("T", horizon),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "{name} must be positive, got {v}"
            )));
        }
    }
    if ell > 2 || p > 2 {
        return Err(Error::InvalidArgument(format!(
            "ell and p must lie in 0..=2, got ell = {ell}, p = {p}"
        )));
    }
    // Gaussian factor below 1e-16 beyond this point
    let upper = (2.0 * horizon * 1e16f64.ln() / sigma2).sqrt();
    let modulus = move |u: f64| {
        u.powi(ell as i32)
            * (-sigma2 * u * u / (2.0 * horizon)).exp()
            * (1.0 + 4.0 * nu * nu * u * u).powf(-0.5 * a)
    };
    let phase = move |u: f64| -gamma * u + a * (2.0 * nu * u).atan();
    let re = move |u: f64| modulus(u) * phase(u).cos();
    let im = move |u: f64| modulus(u) * phase(u).sin();
    let panel = std::f64::consts::PI / gamma;
    let tol = 1e-17;
    let re_pos = panel_integral(&re, upper, panel, tol)?;
    let re_neg = panel_integral(&re, -upper, panel, tol)?;
    let im_pos = panel_integral(&im, upper, panel, tol)?;
    let im_neg = panel_integral(&im, -upper, panel, tol)?;
    // panel_integral over [0, -U] returns minus the integral over [-U, 0]
    let real = re_pos - re_neg;
    let imag = im_pos - im_neg;
    let (lhs, residual) = if ell.is_multiple_of(2) {
        (real, imag)
    } else {
        (imag, real)
    };
    let rhs = gamma_contour_series(a, nu, gamma, sigma2, horizon, ell, p)?;
    let mut rep = OracleReport::new(
        lhs,
        rhs,
        format!("Gauss-Kronrod panels on |u| <= {upper:.3e}, series to order {p}"),
    );
    rep.symmetry_residual = Some(residual.abs());
    Ok(rep)
}

/// Standard normal distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Asymptotic Kolmogorov critical constants `c(alpha)`.
pub const KS_C_01: f64 = 1.628;
pub const KS_C_05: f64 = 1.358;

/// One-sample Kolmogorov-Smirnov distance to `cdf`.
pub fn ks_statistic(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut v = sample.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Two-sample Kolmogorov-Smirnov distance.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n, m) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < x.len() && j < y.len() {
        let v = x[i].min(y[j]);
        while i < x.len() && x[i] <= v {
            i += 1;
        }
        while j < y.len() && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// Asymptotic p-value of a KS distance at effective size `n_eff`
/// (`n` for one sample, `nm/(n+m)` for two).
pub fn ks_p_value(d: f64, n_eff: f64) -> f64 {
    let root = n_eff.sqrt();
    let lambda = (root + 0.12 + 0.11 / root) * d;
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KsReport {
    pub label: String,
    pub statistic: f64,
    pub n_eff: f64,
    pub critical_01: f64,
    pub critical_05: f64,
    pub p_value: f64,
    pub sample_mean: f64,
    pub sample_sd: f64,
    /// horizon below [`CLT_MIN_HORIZON`]; a failure is then not conclusive
    pub pre_asymptotic: bool,
}

impl KsReport {
    pub fn from_statistic(
        label: String,
        statistic: f64,
        n_eff: f64,
        sample: &[f64],
        pre_asymptotic: bool,
    ) -> Self {
        let n = sample.len().max(1) as f64;
        let mean = sample.iter().sum::<f64>() / n;
        let var = sample.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
        Self {
            label,
            statistic,
            n_eff,
            critical_01: KS_C_01 / n_eff.sqrt(),
            critical_05: KS_C_05 / n_eff.sqrt(),
            p_value: ks_p_value(statistic, n_eff),
            sample_mean: mean,
            sample_sd: var.sqrt(),
            pre_asymptotic,
        }
    }

    pub fn passes_01(&self) -> bool {
        self.statistic < self.critical_01
    }
}

/// Horizons below this are flagged as pre-asymptotic by [`clt_test`].
pub const CLT_MIN_HORIZON: f64 = 50.0;

/// KS tests of the standardized energy and MLE samples against `N(0, 1)`.
pub fn clt_test(
    params: &ModelParams,
    horizon: f64,
    replicates: usize,
    grid_n: usize,
    seed: u64,
) -> Result<(KsReport, KsReport)> {
    if replicates < 1000 {
        return Err(Error::InvalidArgument(format!(
            "CLT test needs at least 1000 replicates, got {replicates}"
        )));
    }
    let grid = TimeGrid::standard(horizon, grid_n)?;
    let samples = MartingaleSampler::new(params, &grid, Scheme::Exact)?.batch(seed, replicates);
    clt_test_from_samples(params, horizon, &samples)
}

pub fn clt_test_from_samples(
    params: &ModelParams,
    horizon: f64,
    samples: &[TerminalStats],
) -> Result<(KsReport, KsReport)> {
    let (energy, mle) = clt_statistics(samples, params, horizon)?;
    let n = samples.len() as f64;
    let pre = horizon < CLT_MIN_HORIZON;
    let e = KsReport::from_statistic(
        format!("energy CLT T={horizon}"),
        ks_statistic(&energy, normal_cdf),
        n,
        &energy,
        pre,
    );
    let m = KsReport::from_statistic(
        format!("mle CLT T={horizon}"),
        ks_statistic(&mle, normal_cdf),
        n,
        &mle,
        pre,
    );
    Ok((e, m))
}
