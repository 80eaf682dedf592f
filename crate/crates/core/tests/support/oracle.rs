//! Independent numerical oracles shared by unit, integration and acceptance
//! tests. Nothing in here calls into the crate's beta machinery.
#![allow(dead_code)]

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
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> (f64, f64) {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let sum = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * sum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * sum;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Adaptive Gauss-Kronrod quadrature of `f` over `[lo, hi]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> f64 {
    fn recurse<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, tol: f64, depth: u32) -> f64 {
        let (value, err) = gk15(f, lo, hi);
        if err <= tol || depth == 0 {
            return value;
        }
        let mid = 0.5 * (lo + hi);
        recurse(f, lo, mid, 0.5 * tol, depth - 1) + recurse(f, mid, hi, 0.5 * tol, depth - 1)
    }
    if lo == hi {
        return 0.0;
    }
    if lo > hi {
        return -integrate(f, hi, lo, tol);
    }
    recurse(&f, lo, hi, tol, 50)
}

/// `\int_lo^hi p^(a-1) (1-p)^(b-1) dp` by quadrature. Each half of the unit
/// interval is mapped with `t = p^a` (or `t = (1-p)^b`), which removes the
/// endpoint singularity when a shape is below one.
pub fn beta_kernel_integral(a: f64, b: f64, lo: f64, hi: f64) -> f64 {
    if lo > hi {
        return -beta_kernel_integral(a, b, hi, lo);
    }
    let mut total = 0.0;
    let left_hi = hi.min(0.5);
    if lo < left_hi {
        let g = move |t: f64| (1.0 - t.powf(1.0 / a)).powf(b - 1.0) / a;
        total += integrate(g, lo.powf(a), left_hi.powf(a), 1e-16);
    }
    let right_lo = lo.max(0.5);
    if right_lo < hi {
        let g = move |t: f64| (1.0 - t.powf(1.0 / b)).powf(a - 1.0) / b;
        total += integrate(g, (1.0 - hi).powf(b), (1.0 - right_lo).powf(b), 1e-16);
    }
    total
}

/// `p^(a-1) (1-p)^(b-1)` normalized by quadrature.
pub fn beta_density(a: f64, b: f64) -> impl Fn(f64) -> f64 {
    let norm = beta_kernel_integral(a, b, 0.0, 1.0);
    move |p: f64| p.powf(a - 1.0) * (1.0 - p).powf(b - 1.0) / norm
}

/// Beta cdf by direct quadrature of the kernel.
pub fn beta_cdf(x: f64, a: f64, b: f64) -> f64 {
    beta_kernel_integral(a, b, 0.0, x) / beta_kernel_integral(a, b, 0.0, 1.0)
}

/// Prior mass between the prior mean and the (boundary-adjusted) signal mean.
pub fn confirmation(a0: f64, b0: f64, n: u32, k: u32, eps: f64) -> f64 {
    let signal_mean = if k == 0 {
        eps / n as f64
    } else if k == n {
        (k as f64 - eps) / n as f64
    } else {
        k as f64 / n as f64
    };
    let prior_mean = a0 / (a0 + b0);
    let mass = beta_kernel_integral(a0, b0, signal_mean, prior_mean) / beta_kernel_integral(a0, b0, 0.0, 1.0);
    mass.abs()
}

fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Mean and variance of a density on (0, 1) given through its log-kernel,
/// normalized numerically on a 10^4-point double-exponential grid. The grid
/// clusters nodes near both endpoints, so kernels with integrable endpoint
/// singularities are handled.
///
/// `log_kernel` receives `(ln p, ln(1-p))`.
pub fn grid_moments<F: Fn(f64, f64) -> f64>(log_kernel: F) -> (f64, f64) {
    const POINTS: usize = 10_000;
    const T_MAX: f64 = 4.0;
    let h = 2.0 * T_MAX / (POINTS - 1) as f64;
    let half_pi = std::f64::consts::FRAC_PI_2;

    let mut nodes = Vec::with_capacity(POINTS);
    let mut max_log = f64::NEG_INFINITY;
    for i in 0..POINTS {
        let t = -T_MAX + h * i as f64;
        let u = half_pi * t.sinh();
        // p = 1 / (1 + e^{-2u}); dp/dt = (pi/2) cosh t * p (1 - p) * 2
        let ln_p = -softplus(-2.0 * u);
        let ln_q = -softplus(2.0 * u);
        let ln_jac = (2.0 * half_pi * t.cosh()).ln() + ln_p + ln_q;
        let log_w = log_kernel(ln_p, ln_q) + ln_jac;
        max_log = max_log.max(log_w);
        nodes.push((ln_p.exp(), log_w));
    }
    let (mut z, mut m1, mut m2) = (0.0, 0.0, 0.0);
    for &(p, log_w) in &nodes {
        let w = (log_w - max_log).exp();
        z += w;
        m1 += w * p;
        m2 += w * p * p;
    }
    let mean = m1 / z;
    (mean, m2 / z - mean * mean)
}

/// Posterior moments of `L(p)^gamma * prior(p)^delta` for a binomial
/// likelihood with `k` successes in `n` draws and a beta(a0, b0) prior.
pub fn distorted_posterior_moments(
    a0: f64,
    b0: f64,
    n: u32,
    k: u32,
    gamma: f64,
    delta: f64,
) -> (f64, f64) {
    let ln_choose = ln_choose(n, k);
    let ln_b = ln_beta_by_quadrature(a0, b0);
    grid_moments(|ln_p, ln_q| {
        let log_lik = ln_choose + k as f64 * ln_p + (n - k) as f64 * ln_q;
        let log_prior = (a0 - 1.0) * ln_p + (b0 - 1.0) * ln_q - ln_b;
        gamma * log_lik + delta * log_prior
    })
}

fn ln_choose(n: u32, k: u32) -> f64 {
    (1..=k).map(|i| ((n - k + i) as f64 / i as f64).ln()).sum()
}

fn ln_beta_by_quadrature(a: f64, b: f64) -> f64 {
    // Only a normalizing constant; it cancels, but keeps the kernel a true
    // density product.
    let kernel = |p: f64| p.powf(a - 1.0) * (1.0 - p).powf(b - 1.0);
    if a >= 1.0 && b >= 1.0 {
        integrate(kernel, 0.0, 1.0, 1e-14).ln()
    } else {
        0.0
    }
}
