//! Zeta, Hurwitz zeta, polylogarithm and binomial helpers.

use alloc::vec::Vec;
use core::f64::consts::PI;

const BERNOULLI_2J: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// log C(n, k) for real n >= k >= 0.
pub fn ln_binom(n: f64, k: f64) -> f64 {
    ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0)
}

/// C(2k, k) 4^{-k} for k = 0..=n.
pub fn central_binom_scaled(n: usize) -> Vec<f64> {
    let mut b = Vec::with_capacity(n + 1);
    b.push(1.0);
    for k in 1..=n {
        let prev = b[k - 1];
        b.push(prev * (2 * k - 1) as f64 / (2 * k) as f64);
    }
    b
}

/// Hurwitz zeta sum_{n>=0} (n + a)^{-s}, for s != 1 and a > 0
/// (analytic continuation for s < 1).
pub fn hurwitz_zeta(s: f64, a: f64) -> f64 {
    const M: usize = 16;
    let mut sum = 0.0;
    for n in 0..M {
        sum += libm::pow(a + n as f64, -s);
    }
    let x = a + M as f64;
    sum += libm::pow(x, 1.0 - s) / (s - 1.0) + 0.5 * libm::pow(x, -s);
    // Euler-Maclaurin corrections
    let mut rising = s;
    let mut fact = 2.0;
    let mut xp = libm::pow(x, -s - 1.0);
    let x2 = x * x;
    for (j, b) in BERNOULLI_2J.iter().enumerate() {
        let term = b / fact * rising * xp;
        sum += term;
        let j2 = (2 * (j + 1)) as f64;
        rising *= (s + j2 - 1.0) * (s + j2);
        fact *= (j2 + 1.0) * (j2 + 2.0);
        xp /= x2;
    }
    sum
}

/// Riemann zeta for real s != 1.
pub fn zeta(s: f64) -> f64 {
    if s < 0.0 {
        // reflection
        let t = 1.0 - s;
        return libm::pow(2.0, s)
            * libm::pow(PI, s - 1.0)
            * libm::sin(PI * s / 2.0)
            * gamma(t)
            * zeta(t);
    }
    hurwitz_zeta(s, 1.0)
}

/// Polylogarithm Li_s(v) for v in [0, 1] and non-integer s > 1.
///
/// Uses the expansion in t = -log v near v = 1 and the defining series
/// elsewhere.
#[derive(Debug, Clone)]
pub struct Polylog {
    s: f64,
    gamma_1ms: f64,
    // zeta(s - n) / n!
    coef: Vec<f64>,
}

impl Polylog {
    const TERMS: usize = 40;

    pub fn new(s: f64) -> Self {
        let mut coef = Vec::with_capacity(Self::TERMS);
        let mut fact = 1.0;
        for n in 0..Self::TERMS {
            if n > 0 {
                fact *= n as f64;
            }
            coef.push(zeta(s - n as f64) / fact);
        }
        Polylog {
            s,
            gamma_1ms: gamma(1.0 - s),
            coef,
        }
    }

    /// Li_s(e^{-t}) for t >= 0.
    pub fn at_exp(&self, t: f64) -> f64 {
        if t < 1.0 {
            let mut sum = 0.0;
            let mut p = 1.0;
            for c in &self.coef {
                sum += c * p;
                p *= -t;
            }
            if t > 0.0 {
                sum += self.gamma_1ms * libm::pow(t, self.s - 1.0);
            }
            sum
        } else {
            self.direct(libm::exp(-t))
        }
    }

    /// zeta(s) - e^t Li_s(e^{-t}) = sum_k k^{-s} (1 - e^{-(k-1) t}), accurate
    /// as t -> 0.
    pub fn zeta_gap_at_exp(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t < 1.0 {
            let mut sum = 0.0;
            let mut p = -t;
            for c in &self.coef[1..] {
                sum += c * p;
                p *= -t;
            }
            sum += self.gamma_1ms * libm::pow(t, self.s - 1.0);
            -self.coef[0] * libm::expm1(t) - libm::exp(t) * sum
        } else {
            self.coef[0] - libm::exp(t) * self.direct(libm::exp(-t))
        }
    }

    pub fn eval(&self, v: f64) -> f64 {
        if v <= 0.0 {
            return 0.0;
        }
        if v >= libm::exp(-1.0) {
            self.at_exp(-libm::log(v))
        } else {
            self.direct(v)
        }
    }

    fn direct(&self, v: f64) -> f64 {
        let mut sum = 0.0f64;
        let mut p = v;
        let mut k = 1.0;
        while p > 1e-18 * sum.max(1e-300) {
            sum += p * libm::pow(k, -self.s);
            k += 1.0;
            p *= v;
        }
        sum
    }
}
