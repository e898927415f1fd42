//! Weight sequences, admissibility, the offspring law and the type a.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::special::{ln_binom, zeta, Polylog};

/// Default relative tolerance for series evaluation and root finding.
pub const TOL: f64 = 1e-12;

/// Default head size for infinite-support sequences.
pub const DEFAULT_TRUNCATION: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightKind {
    Explicit,
    /// The a = 2 sequence with closed-form partition function.
    QStar,
    /// mu(k) = (1 - s) 1{k=0} + s k^{-alpha-1} / zeta(alpha+1) 1{k>=1}.
    Stable { alpha: f64, s: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Admissible {
    pub z: f64,
    pub r: f64,
}

/// q = (q_1, q_2, ...). `coeffs[0]` is q_1.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSeq {
    pub kind: WeightKind,
    pub coeffs: Vec<f64>,
    pub truncation: usize,
    pub cache: Option<Admissible>,
}

/// Reference root of the closed-form families (where their offspring law
/// is written).
fn reference_z(kind: WeightKind) -> Option<f64> {
    match kind {
        WeightKind::Explicit => None,
        WeightKind::QStar => Some(1.5),
        WeightKind::Stable { s, .. } => Some(1.0 / (1.0 - s)),
    }
}

fn qstar_mu(k: usize) -> f64 {
    // mu(k) = Gamma(k - 3/2) / (2 sqrt(pi) Gamma(k + 1)), k >= 2
    if k < 2 {
        return 0.0;
    }
    let mut m = 0.25;
    for j in 2..k {
        m *= (j as f64 - 1.5) / (j as f64 + 1.0);
    }
    m
}

fn stable_norm(alpha: f64) -> f64 {
    1.0 / zeta(alpha + 1.0)
}

impl WeightSeq {
    pub fn explicit(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.iter().any(|&q| !(q >= 0.0) || !q.is_finite()) {
            return Err(Error::Invalid("weights must be finite and nonnegative"));
        }
        let truncation = coeffs.len();
        Ok(WeightSeq {
            kind: WeightKind::Explicit,
            coeffs,
            truncation,
            cache: None,
        })
    }

    pub fn zero() -> Self {
        WeightSeq {
            kind: WeightKind::Explicit,
            coeffs: Vec::new(),
            truncation: 0,
            cache: None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&q| q == 0.0) && self.kind == WeightKind::Explicit
    }

    /// q*_k = (1/4) 6^{1-k} Gamma(k - 3/2) / Gamma(k + 1/2), k >= 2, through
    /// the telescoping ratio q_{k+1}/q_k = (k - 3/2) / (6 (k + 1/2)).
    pub fn qstar(n: usize) -> Self {
        let n = n.max(2);
        let mut coeffs = alloc::vec![0.0; n];
        let mut q = 1.0 / 18.0;
        for k in 2..=n {
            coeffs[k - 1] = q;
            q *= (k as f64 - 1.5) / (6.0 * (k as f64 + 0.5));
        }
        WeightSeq {
            kind: WeightKind::QStar,
            coeffs,
            truncation: n,
            cache: None,
        }
    }

    /// The ratio (1/4) 6^{1-k} Gamma(k - 3/2) / Gamma(k + 5/2) as an explicit
    /// truncated sequence. It is not the a = 2 sequence (see `qstar`).
    pub fn qstar_printed_ratio(n: usize) -> Self {
        let mut coeffs = alloc::vec![0.0; n.max(2)];
        let mut q = 2.0 / 315.0;
        for k in 2..=coeffs.len() {
            coeffs[k - 1] = q;
            q *= (k as f64 - 1.5) / (6.0 * (k as f64 + 2.5));
        }
        let truncation = coeffs.len();
        WeightSeq {
            kind: WeightKind::Explicit,
            coeffs,
            truncation,
            cache: None,
        }
    }

    /// Sequence whose offspring law is the power law family with tail
    /// index `alpha` in (1, 2) and mass `s` off zero.
    pub fn stable(alpha: f64, s: f64, truncation: usize) -> Result<Self> {
        if !(alpha > 1.0 && alpha < 2.0) {
            return Err(Error::Invalid("alpha must lie in (1, 2)"));
        }
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::Invalid("s must lie in (0, 1)"));
        }
        let c = stable_norm(alpha);
        if s * c * zeta(alpha) > 1.0 + TOL {
            return Err(Error::Supercritical(s * c * zeta(alpha)));
        }
        let z = 1.0 / (1.0 - s);
        let lz = libm::log(z);
        let mut coeffs = alloc::vec![0.0; truncation.max(1)];
        for (i, q) in coeffs.iter_mut().enumerate() {
            let k = (i + 1) as f64;
            let lmu = libm::log(s * c) - (alpha + 1.0) * libm::log(k);
            *q = libm::exp(lmu + (1.0 - k) * lz - ln_binom(2.0 * k - 1.0, k - 1.0));
        }
        Ok(WeightSeq {
            kind: WeightKind::Stable { alpha, s },
            coeffs,
            truncation: truncation.max(1),
            cache: None,
        })
    }

    /// Critical member of the power law family: s = zeta(alpha+1)/zeta(alpha).
    pub fn stable_critical(alpha: f64, truncation: usize) -> Result<Self> {
        let s = zeta(alpha + 1.0) / zeta(alpha);
        Self::stable(alpha, s, truncation)
    }

    /// q_k, zero beyond the stored coefficients.
    pub fn q(&self, k: usize) -> f64 {
        if k == 0 {
            0.0
        } else {
            self.coeffs.get(k - 1).copied().unwrap_or(0.0)
        }
    }

    /// Radius of convergence of f_q.
    pub fn radius(&self) -> f64 {
        reference_z(self.kind).unwrap_or(f64::INFINITY)
    }

    /// f_q(x) and f_q'(x).
    pub fn eval_f_pair(&self, x: f64) -> Result<(f64, f64)> {
        if !(x >= 0.0) {
            return Err(Error::Invalid("x must be nonnegative"));
        }
        match self.kind {
            WeightKind::Explicit => self.eval_explicit(x),
            _ => {
                let zs = reference_z(self.kind).unwrap_or(1.0);
                let v = x / zs;
                if v > 1.0 + 1e-15 {
                    return Err(Error::Divergent);
                }
                let (f, df) = self.closed_mu_sum(v.min(1.0));
                Ok((f, df / zs))
            }
        }
    }

    pub fn eval_f(&self, x: f64) -> Result<f64> {
        self.eval_f_pair(x).map(|p| p.0)
    }

    fn eval_explicit(&self, x: f64) -> Result<(f64, f64)> {
        // log-space terms with Neumaier compensated summation
        let mut s = Neumaier::default();
        let mut d = Neumaier::default();
        let lx = libm::log(x);
        for (i, &q) in self.coeffs.iter().enumerate() {
            if q == 0.0 {
                continue;
            }
            let k = (i + 1) as f64;
            let lc = ln_binom(2.0 * k - 1.0, k - 1.0) + libm::log(q);
            if i == 0 {
                s.add(libm::exp(lc));
                continue;
            }
            if x == 0.0 {
                if i == 1 {
                    d.add(libm::exp(lc));
                }
                continue;
            }
            let lt = lc + (k - 1.0) * lx;
            if lt > 700.0 {
                return Err(Error::Overflow);
            }
            s.add(libm::exp(lt));
            d.add((k - 1.0) * libm::exp(lc + (k - 2.0) * lx));
        }
        Ok((s.sum(), d.sum()))
    }

    /// For closed-form kinds: sum_{k>=1} mu*(k) v^{k-1} and its v-derivative.
    fn closed_mu_sum(&self, v: f64) -> (f64, f64) {
        match self.kind {
            WeightKind::QStar => {
                if v < 0.5 {
                    let (mut f, mut df) = (0.0, 0.0);
                    let mut vp = 1.0; // v^{k-2}
                    for k in 2..200 {
                        let m = qstar_mu(k);
                        f += m * vp * v;
                        df += (k - 1) as f64 * m * vp;
                        vp *= v;
                        if vp < 1e-19 {
                            break;
                        }
                    }
                    (f, df)
                } else {
                    // G(v) - mu0 = v - (2/3)(1 - (1-v)^{3/2}), G'(v) = 1 - sqrt(1-v)
                    let w = 1.0 - v;
                    let g = v - (2.0 / 3.0) * (1.0 - w * libm::sqrt(w));
                    let dg = 1.0 - libm::sqrt(w);
                    (g / v, (dg * v - g) / (v * v))
                }
            }
            WeightKind::Stable { alpha, s } => {
                let sc = s * stable_norm(alpha);
                if v < 0.3 {
                    let (mut f, mut df) = (sc, 0.0);
                    let mut vp = 1.0; // v^{k-2}
                    for k in 2..400 {
                        let kf = k as f64;
                        let m = sc * libm::pow(kf, -alpha - 1.0);
                        f += m * vp * v;
                        df += (kf - 1.0) * m * vp;
                        vp *= v;
                        if vp < 1e-19 {
                            break;
                        }
                    }
                    (f, df)
                } else {
                    let l1 = Polylog::new(alpha + 1.0).eval(v);
                    let l0 = Polylog::new(alpha).eval(v);
                    (sc * l1 / v, sc * (l0 - l1) / (v * v))
                }
            }
            WeightKind::Explicit => (0.0, 0.0),
        }
    }

    /// Cached (Z_q, r_q), solving admissibility if needed.
    pub fn admissible(&self) -> Result<Admissible> {
        if let Some(c) = self.cache {
            return Ok(c);
        }
        let z = admissibility_solve(self, TOL)?;
        Ok(Admissible { z, r: 1.0 / (4.0 * z) })
    }

    pub fn with_cache(mut self) -> Result<Self> {
        let a = self.admissible()?;
        self.cache = Some(a);
        Ok(self)
    }
}

#[derive(Default)]
struct Neumaier {
    sum: f64,
    c: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.c += (self.sum - t) + x;
        } else {
            self.c += (x - t) + self.sum;
        }
        self.sum = t;
    }
    fn sum(&self) -> f64 {
        self.sum + self.c
    }
}

/// Smallest x > 0 with f_q(x) = 1 - 1/x.
pub fn admissibility_solve(q: &WeightSeq, tol: f64) -> Result<f64> {
    let g = |x: f64| -> Result<(f64, f64)> {
        let (f, df) = q.eval_f_pair(x)?;
        Ok((f - 1.0 + 1.0 / x, df - 1.0 / (x * x)))
    };
    let radius = q.radius();
    // right end: either the radius or a point past the minimum / a root
    let mut hi = if radius.is_finite() { radius } else { 1.0 };
    if !radius.is_finite() {
        loop {
            let (gv, gd) = g(hi)?;
            if gv < 0.0 || gd >= 0.0 || hi > 1e12 {
                break;
            }
            hi *= 2.0;
        }
    }
    let mut lo = hi;
    loop {
        lo *= 0.5;
        let (gv, gd) = g(lo)?;
        if gv > 0.0 && gd < 0.0 {
            break;
        }
        if lo < 1e-300 {
            return Err(Error::Tolerance);
        }
    }
    let (ghi, dhi) = g(hi)?;
    let bisect_root = |mut a: f64, mut b: f64| -> Result<f64> {
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if g(m)?.0 > 0.0 {
                a = m;
            } else {
                b = m;
            }
            if b - a <= 4e-16 * b {
                return Ok(0.5 * (a + b));
            }
        }
        Err(Error::Tolerance)
    };
    if ghi < -tol {
        return bisect_root(lo, hi);
    }
    // locate the minimum of the convex gap
    let xmin = if dhi <= tol {
        hi
    } else {
        let (mut a, mut b) = (lo, hi);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if g(m)?.1 < 0.0 {
                a = m;
            } else {
                b = m;
            }
            if b - a <= 4e-16 * b {
                break;
            }
        }
        0.5 * (a + b)
    };
    let (gmin, _) = g(xmin)?;
    if gmin > tol {
        return Err(Error::NotAdmissible(gmin));
    }
    if gmin >= -tol {
        return Ok(xmin);
    }
    bisect_root(lo, xmin)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LawShape {
    Finite,
    QStar,
    Stable { alpha: f64, s: f64 },
}

/// Tail mu([k, inf)) ~ constant k^{-alpha}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailSpec {
    pub alpha: f64,
    pub constant: f64,
    /// The slowly varying factor is taken to be constant.
    pub assumed_constant_ell: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OffspringLaw {
    /// mu(0..=N); for infinite-support shapes the tail lives in `tail`.
    pub probs: Vec<f64>,
    pub mean: f64,
    /// None when infinite.
    pub variance: Option<f64>,
    pub tail: Option<TailSpec>,
    pub shape: LawShape,
    /// Z_q = 1/mu(0).
    pub z: f64,
}

impl OffspringLaw {
    /// A finitely supported law given by its table.
    pub fn finite(probs: Vec<f64>) -> Result<Self> {
        let total: f64 = probs.iter().sum();
        if probs.is_empty() || probs.iter().any(|&p| !(p >= 0.0)) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::NotALaw(total));
        }
        if probs[0] <= 0.0 {
            return Err(Error::Invalid("mu(0) must be positive"));
        }
        let mean: f64 = probs.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
        let m2: f64 = probs.iter().enumerate().map(|(k, p)| (k * k) as f64 * p).sum();
        Ok(OffspringLaw {
            z: 1.0 / probs[0],
            probs,
            mean,
            variance: Some(m2 - mean * mean),
            tail: None,
            shape: LawShape::Finite,
        })
    }

    pub fn prob(&self, k: usize) -> f64 {
        match self.shape {
            LawShape::Finite => self.probs.get(k).copied().unwrap_or(0.0),
            LawShape::QStar => {
                if k == 0 {
                    2.0 / 3.0
                } else {
                    qstar_mu(k)
                }
            }
            LawShape::Stable { alpha, s } => {
                if k == 0 {
                    1.0 - s
                } else {
                    s * stable_norm(alpha) * libm::pow(k as f64, -alpha - 1.0)
                }
            }
        }
    }

    /// 1 - G'_mu(e^{-t}), computed without cancellation near t = 0 where a
    /// closed form exists.
    pub fn one_minus_dgf_exp(&self, t: f64) -> f64 {
        self.dgf_evaluator().eval(t)
    }

    pub fn dgf_evaluator(&self) -> DgfEval {
        match self.shape {
            LawShape::Finite => {
                let c: Vec<f64> = self
                    .probs
                    .iter()
                    .enumerate()
                    .skip(1)
                    .map(|(k, p)| k as f64 * p)
                    .collect();
                let delta = snap_deficit(1.0 - c.iter().sum::<f64>());
                DgfEval::Finite { c, delta }
            }
            LawShape::QStar => DgfEval::QStar,
            LawShape::Stable { alpha, s } => {
                let sc = s * stable_norm(alpha);
                DgfEval::Stable {
                    sc,
                    delta: snap_deficit(1.0 - sc * zeta(alpha)),
                    li: Polylog::new(alpha),
                }
            }
        }
    }
}

/// Mean deficits below this are rounding noise of a critical law.
fn snap_deficit(d: f64) -> f64 {
    if d.abs() < 1e-14 {
        0.0
    } else {
        d
    }
}

/// Evaluator of h(t) = 1 - G'_mu(e^{-t}), written as the mean deficit
/// 1 - m plus a sum of nonnegative terms so that h keeps relative accuracy
/// as t -> 0.
#[derive(Debug, Clone)]
pub enum DgfEval {
    /// `c` holds k mu(k) for k >= 1
    Finite { c: Vec<f64>, delta: f64 },
    QStar,
    Stable { sc: f64, delta: f64, li: Polylog },
}

impl DgfEval {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            DgfEval::Finite { c, delta } => {
                if t > 1.0 {
                    let v = libm::exp(-t);
                    return 1.0 - c.iter().rev().fold(0.0, |acc, &x| acc * v + x);
                }
                let mut sum = 0.0;
                for (j, &x) in c.iter().enumerate().skip(1) {
                    if x != 0.0 {
                        sum -= x * libm::expm1(-(j as f64) * t);
                    }
                }
                delta + sum
            }
            DgfEval::QStar => libm::sqrt(-libm::expm1(-t)),
            DgfEval::Stable { sc, delta, li } => delta + sc * li.zeta_gap_at_exp(t),
        }
    }
}

/// mu(0) = 1/Z, mu(k) = Z^{k-1} C(2k-1, k-1) q_k.
pub fn offspring_mu(q: &WeightSeq, z: f64) -> Result<OffspringLaw> {
    let lz = libm::log(z);
    let n = q.coeffs.len();
    let mut probs = alloc::vec![0.0; n + 1];
    probs[0] = 1.0 / z;
    for k in 1..=n {
        let qk = q.q(k);
        if qk == 0.0 {
            continue;
        }
        let kf = k as f64;
        let lt = (kf - 1.0) * lz + ln_binom(2.0 * kf - 1.0, kf - 1.0) + libm::log(qk);
        probs[k] = libm::exp(lt);
    }
    let closed = reference_z(q.kind).is_some_and(|zs| (z / zs - 1.0).abs() < 1e-10);
    match q.kind {
        WeightKind::QStar if closed => Ok(OffspringLaw {
            probs,
            mean: 1.0,
            variance: None,
            tail: Some(TailSpec {
                alpha: 1.5,
                constant: 1.0 / (3.0 * libm::sqrt(PI)),
                assumed_constant_ell: true,
            }),
            shape: LawShape::QStar,
            z,
        }),
        WeightKind::Stable { alpha, s } if closed => {
            let c = stable_norm(alpha);
            Ok(OffspringLaw {
                probs,
                mean: s * c * zeta(alpha),
                variance: None,
                tail: Some(TailSpec {
                    alpha,
                    constant: s * c / alpha,
                    assumed_constant_ell: true,
                }),
                shape: LawShape::Stable { alpha, s },
                z,
            })
        }
        WeightKind::Explicit => {
            let mean: f64 = probs.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
            let m2: f64 = probs.iter().enumerate().map(|(k, p)| (k * k) as f64 * p).sum();
            Ok(OffspringLaw {
                probs,
                mean,
                variance: Some(m2 - mean * mean),
                tail: None,
                shape: LawShape::Finite,
                z,
            })
        }
        _ => Err(Error::Divergent),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Subcritical,
    Dense,
    BoundaryA2,
    Dilute,
    GenericCritical,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeqType {
    pub a: f64,
    pub regime: Regime,
}

impl SeqType {
    pub fn from_a(a: f64) -> Result<Self> {
        let eps = 1e-12;
        let regime = if (a - 1.5).abs() < eps {
            Regime::Subcritical
        } else if a < 2.0 - eps && a > 1.5 {
            Regime::Dense
        } else if (a - 2.0).abs() < eps {
            Regime::BoundaryA2
        } else if a < 2.5 - eps && a > 2.0 {
            Regime::Dilute
        } else if (a - 2.5).abs() < eps {
            Regime::GenericCritical
        } else {
            return Err(Error::Invalid("type a must lie in [3/2, 5/2]"));
        };
        Ok(SeqType { a, regime })
    }

    /// alpha = a - 1/2.
    pub fn alpha(&self) -> f64 {
        self.a - 0.5
    }
}

/// Local exponent of mu(k) ~ k^{-alpha-1} from the head table.
pub fn fitted_tail_index(mu: &OffspringLaw) -> Option<f64> {
    let n = mu.probs.len().saturating_sub(1);
    if n < 64 {
        return None;
    }
    let (k1, k2) = (n / 16, n);
    let (p1, p2) = (mu.probs[k1], mu.probs[k2]);
    if p1 <= 0.0 || p2 <= 0.0 {
        return None;
    }
    let slope = libm::log(p2 / p1) / libm::log(k2 as f64 / k1 as f64);
    Some(-slope - 1.0)
}

/// Tolerance for the log-log consistency check of a declared tail index.
pub const FIT_TOL: f64 = 0.05;

pub fn classify(q: &WeightSeq, mu: &OffspringLaw, declared_tail: Option<(f64, f64)>) -> Result<SeqType> {
    let m = mu.mean;
    if m > 1.0 + 1e-9 {
        return Err(Error::Supercritical(m));
    }
    if q.is_zero() || m < 1.0 - 1e-9 {
        return SeqType::from_a(1.5);
    }
    if mu.variance.is_some() {
        return SeqType::from_a(2.5);
    }
    let fitted = fitted_tail_index(mu);
    let alpha = match (declared_tail, mu.tail) {
        (Some((alpha, _)), _) => {
            if let Some(f) = fitted {
                if (f - alpha).abs() > FIT_TOL {
                    return Err(Error::Inconsistent { declared: alpha, fitted: f });
                }
            }
            alpha
        }
        (None, Some(t)) => t.alpha,
        (None, None) => match fitted {
            Some(f) if (f - 2.0).abs() > FIT_TOL => f,
            _ => return Err(Error::NearCritical),
        },
    };
    if alpha >= 2.0 {
        return SeqType::from_a(2.5);
    }
    SeqType::from_a(alpha + 0.5)
}

/// Exact inverse of `offspring_mu`: Z = 1/mu(0), q_k = mu(k) Z^{1-k} / C(2k-1, k-1).
pub fn from_offspring(mu: &OffspringLaw) -> Result<WeightSeq> {
    let total: f64 = mu.probs.iter().sum();
    if mu.shape == LawShape::Finite && (total - 1.0).abs() > 1e-12 {
        return Err(Error::NotALaw(total));
    }
    if mu.mean > 1.0 + 1e-12 {
        return Err(Error::Supercritical(mu.mean));
    }
    let p0 = mu.probs.first().copied().unwrap_or(0.0);
    if p0 <= 0.0 {
        return Err(Error::Invalid("mu(0) must be positive"));
    }
    match mu.shape {
        LawShape::QStar => return Ok(WeightSeq::qstar(mu.probs.len() - 1).with_cache()?),
        LawShape::Stable { alpha, s } => {
            return WeightSeq::stable(alpha, s, mu.probs.len() - 1)?.with_cache()
        }
        LawShape::Finite => {}
    }
    let z = 1.0 / p0;
    let lz = libm::log(z);
    let mut last = 0;
    for (k, &p) in mu.probs.iter().enumerate() {
        if p > 0.0 {
            last = k;
        }
    }
    let mut coeffs = alloc::vec![0.0; last];
    for k in 1..=last {
        let p = mu.probs[k];
        if p == 0.0 {
            continue;
        }
        let kf = k as f64;
        coeffs[k - 1] = libm::exp(libm::log(p) + (1.0 - kf) * lz - ln_binom(2.0 * kf - 1.0, kf - 1.0));
    }
    let mut q = WeightSeq::explicit(coeffs)?;
    let zs = if q.is_zero() { 1.0 } else { admissibility_solve(&q, 1e-10)? };
    if (zs - z).abs() > 1e-6 * z {
        return Err(Error::Inconsistent { declared: z, fitted: zs });
    }
    q.cache = Some(Admissible { z, r: 1.0 / (4.0 * z) });
    Ok(q)
}
