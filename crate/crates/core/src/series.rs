//! Perimeter partition function F, P = x F^2 and the simple-boundary
//! series F̂, all stored in radius-normalized form.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::poly;
use crate::quad::{geometric_edges, GaussLegendre};
use crate::special::{central_binom_scaled, gamma, hurwitz_zeta};
use crate::weights::{offspring_mu, DgfEval, OffspringLaw, Regime, SeqType, WeightSeq};

/// Coefficient k holds (true coefficient) * radius^k.
#[derive(Debug, Clone, PartialEq)]
pub struct NormSeries {
    pub radius: f64,
    pub coeffs: Vec<f64>,
}

impl NormSeries {
    pub fn order(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// log10 of the true coefficient.
    pub fn log10_true(&self, k: usize) -> f64 {
        libm::log10(self.coeffs[k]) - k as f64 * libm::log10(self.radius)
    }

    pub fn truncated(&self, n: usize) -> NormSeries {
        NormSeries {
            radius: self.radius,
            coeffs: self.coeffs[..(n + 1).min(self.coeffs.len())].to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadConfig {
    /// Gauss points per panel.
    pub points: usize,
    /// Points of the companion rule used for the error estimate.
    pub check_points: usize,
    /// Innermost panel edge in t = -log v.
    pub t0: f64,
    pub tmax: f64,
    /// Relative error target per coefficient.
    pub tol: f64,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            points: 24,
            check_points: 16,
            t0: 1e-24,
            tmax: 80.0,
            tol: 1e-8,
        }
    }
}

/// Nodes t_i and weights w_i h(t_i) of a panel rule in t = -log v.
fn weighted_nodes(mu: &OffspringLaw, points: usize, cfg: &QuadConfig) -> (Vec<f64>, Vec<f64>) {
    let g = GaussLegendre::new(points);
    let h = mu.dgf_evaluator();
    let mut ts = Vec::new();
    let mut ws = Vec::new();
    for e in geometric_edges(cfg.t0, cfg.tmax).windows(2) {
        for (t, w) in g.panel(e[0], e[1]) {
            ts.push(t);
            ws.push(w * h.eval(t));
        }
    }
    (ts, ws)
}

fn moment(ts: &[f64], ws: &[f64], k: usize) -> f64 {
    let lam = (k + 1) as f64;
    let mut s = 0.0;
    for (&t, &w) in ts.iter().zip(ws) {
        let x = lam * t;
        if x > 745.0 {
            break;
        }
        s += w * libm::exp(-x);
    }
    s
}

/// c_k = F_k r^k = Z C(2k,k) 4^{-k} int_0^1 v^k (1 - G'_mu(v)) dv for k <= n,
/// integrated in t = -log v on geometrically graded Gauss panels.
pub fn partition_series(q: &WeightSeq, z: f64, n: usize, cfg: &QuadConfig) -> Result<NormSeries> {
    let mu = offspring_mu(q, z)?;
    partition_series_from_law(&mu, n, cfg)
}

pub fn partition_series_from_law(mu: &OffspringLaw, n: usize, cfg: &QuadConfig) -> Result<NormSeries> {
    let z = mu.z;
    let (ta, wa) = weighted_nodes(mu, cfg.points, cfg);
    let (tb, wb) = weighted_nodes(mu, cfg.check_points, cfg);
    let b = central_binom_scaled(n);
    let mut coeffs = Vec::with_capacity(n + 1);
    for (k, bk) in b.iter().enumerate() {
        let ia = moment(&ta, &wa, k);
        let ib = moment(&tb, &wb, k);
        let est = (ia - ib).abs() / ia.abs().max(1e-300);
        if est > cfg.tol {
            return Err(Error::QuadratureFail { k, estimate: est });
        }
        coeffs.push(z * bk * ia);
    }
    coeffs[0] = 1.0;
    Ok(NormSeries {
        radius: 1.0 / (4.0 * z),
        coeffs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticConstants {
    pub a: f64,
    pub c_a: f64,
    /// Slowly varying factor of the tail of mu, taken constant (1 for
    /// a in {3/2, 5/2}).
    pub ell: f64,
    pub kappa: Option<f64>,
    pub kappa_prime: Option<f64>,
    pub c_q: Option<f64>,
    pub c_hat: Option<f64>,
}

impl AsymptoticConstants {
    /// Constant C in c_k ~ C k^{-a}.
    pub fn tail_constant(&self) -> f64 {
        self.c_a * self.ell
    }
}

/// c_a alone, from Z, mu and the type.
pub fn c_a(z: f64, mu: &OffspringLaw, ty: SeqType) -> Result<f64> {
    let a = ty.a;
    match ty.regime {
        Regime::Subcritical => Ok(z * (1.0 - mu.mean) / libm::sqrt(PI)),
        Regime::GenericCritical => {
            let v = mu.variance.ok_or(Error::Undefined("variance"))?;
            Ok(z * v / libm::sqrt(PI))
        }
        _ => Ok(z * (a - 0.5) * libm::sqrt(PI) / libm::sin(PI * (a - 1.5))),
    }
}

/// Constants of the coefficient asymptotics. `fr` is F(r), `rdf` is
/// r F'(r) when finite.
pub fn asymptotic_constants(
    z: f64,
    r: f64,
    mu: &OffspringLaw,
    ty: SeqType,
    fr: f64,
    rdf: Option<f64>,
) -> Result<AsymptoticConstants> {
    let a = ty.a;
    let ca = c_a(z, mu, ty)?;
    let ell = match ty.regime {
        Regime::Subcritical | Regime::GenericCritical => 1.0,
        _ => mu.tail.map(|t| t.constant).ok_or(Error::Undefined("tail constant of mu"))?,
    };
    let kappa = if ty.regime == Regime::BoundaryA2 {
        None
    } else {
        Some(ca * gamma(2.0 - a).abs() / (a - 1.0))
    };
    let kappa_prime = kappa.map(|k| 2.0 * r * fr * k);
    let pr = r * fr * fr;
    let (c_q, c_hat) = match ty.regime {
        Regime::Dilute | Regime::GenericCritical => {
            let rdf = rdf.ok_or(Error::Undefined("F'(r) must be finite"))?;
            let cq = r * fr * (fr + 2.0 * rdf);
            (Some(cq), Some(1.0 - pr / cq))
        }
        Regime::Subcritical => {
            let kp = kappa_prime.unwrap_or(f64::NAN);
            (None, Some(pr * pr / (2.0 * kp * kp) - 0.125))
        }
        _ => (None, None),
    };
    Ok(AsymptoticConstants {
        a,
        c_a: ca,
        ell,
        kappa,
        kappa_prime,
        c_q,
        c_hat,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusValues {
    /// F(r).
    pub f: f64,
    /// r F'(r), None when infinite (a <= 2).
    pub rdf: Option<f64>,
    /// c_k k^a averaged over the last decade of coefficients.
    pub fitted_constant: f64,
    /// Local exponent of c_k over the last decade.
    pub fitted_exponent: f64,
}

/// Tolerance on the fitted local exponent of c_k.
pub const TAIL_FIT_TOL: f64 = 0.1;

/// F(r) and r F'(r) by summation plus the tail C zeta(a, N+1) with C from
/// the asymptotic constants (slowly varying factor taken constant).
pub fn f_at_radius(f: &NormSeries, ty: SeqType, consts: &AsymptoticConstants) -> Result<RadiusValues> {
    let n = f.order();
    let a = ty.a;
    let c = &f.coeffs;
    let (k1, k2) = ((n / 10).max(1), n);
    let fitted_exponent = if n >= 20 {
        -libm::log(c[k2] / c[k1]) / libm::log(k2 as f64 / k1 as f64)
    } else {
        a
    };
    let mut acc = 0.0;
    let mut cnt = 0.0;
    for (k, ck) in c.iter().enumerate().take(k2 + 1).skip(k1) {
        acc += ck * libm::pow(k as f64, a);
        cnt += 1.0;
    }
    let fitted_constant = acc / cnt;
    if n >= 20 && (fitted_exponent - a).abs() > TAIL_FIT_TOL {
        return Err(Error::TailUnreliable {
            expected: a,
            fitted: fitted_exponent,
        });
    }
    let tc = consts.tail_constant();
    let head: f64 = pairwise_sum(c);
    let fr = head + tc * hurwitz_zeta(a, (n + 1) as f64);
    let rdf = if a > 2.0 {
        let kc: Vec<f64> = c.iter().enumerate().map(|(k, v)| k as f64 * v).collect();
        Some(pairwise_sum(&kc) + tc * hurwitz_zeta(a - 1.0, (n + 1) as f64))
    } else {
        None
    };
    Ok(RadiusValues {
        f: fr,
        rdf,
        fitted_constant,
        fitted_exponent,
    })
}

/// F(r) = Z int_0^1 h(v) (1-v)^{-1/2} dv and r F'(r) = Z int_0^1 h(v) (v/2)
/// (1-v)^{-3/2} dv with h = 1 - G'_mu, summing the whole series in closed
/// form. Returns rdf = None when the second integral diverges (a <= 2).
pub fn radius_values_by_integral(mu: &OffspringLaw, ty: SeqType) -> (f64, Option<f64>) {
    let g = GaussLegendre::new(30);
    let h = mu.dgf_evaluator();
    let mut f = 0.0;
    let mut d = 0.0;
    for e in geometric_edges(1e-30, 80.0).windows(2) {
        for (t, w) in g.panel(e[0], e[1]) {
            let v = libm::exp(-t);
            let om = -libm::expm1(-t);
            let hv = h.eval(t);
            f += w * hv * v / libm::sqrt(om);
            d += w * hv * v * v * 0.5 / (om * libm::sqrt(om));
        }
    }
    let z = mu.z;
    (z * f, if ty.a > 2.0 { Some(z * d) } else { None })
}

/// Pairwise summation (order independent of thread layout).
pub fn pairwise_sum(x: &[f64]) -> f64 {
    if x.len() <= 16 {
        return x.iter().sum();
    }
    let m = x.len() / 2;
    pairwise_sum(&x[..m]) + pairwise_sum(&x[m..])
}

/// p(s) = s c(s)^2 / F(r)^2: P in normalized variables, P(r s)/r̂.
pub fn p_series(f: &NormSeries, fr: f64, n: usize) -> Vec<f64> {
    let c = &f.coeffs[..(n + 1).min(f.coeffs.len())];
    let sq = poly::mul(c, c, n + 1);
    let mut p = alloc::vec![0.0; n + 1];
    for k in 1..=n {
        p[k] = sq[k - 1] / (fr * fr);
    }
    p
}

/// F̂ normalized at r̂ = r F(r)^2 through F̂ = F ∘ P^{-1} in truncated
/// power series arithmetic. The normalized inverse of P has coefficients of
/// alternating sign, so the composition loses accuracy geometrically in the
/// order; use [`fhat_series`] beyond a few dozen terms.
pub fn fhat_series_by_reversion(f: &NormSeries, fr: f64, n: usize) -> Result<NormSeries> {
    if f.coeffs.len() < n + 1 {
        return Err(Error::Invalid("F series shorter than requested order"));
    }
    if f.coeffs[0] == 0.0 {
        return Err(Error::Noninvertible);
    }
    let p = p_series(f, fr, n);
    let w = poly::reversion(&p, n + 1)?;
    let mut fh = poly::compose(&f.coeffs[..n + 1], &w, n + 1)?;
    fh[0] = 1.0;
    Ok(NormSeries {
        radius: f.radius * fr * fr,
        coeffs: fh,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct FhatConfig {
    /// Contour radius is exp(-lambda / max(n, 32)) in the normalized variable.
    pub lambda: f64,
    /// Number of contour points is the smallest power of two above
    /// `oversample * n`.
    pub oversample: usize,
    pub points: usize,
    pub t0: f64,
    pub tmax: f64,
}

impl Default for FhatConfig {
    fn default() -> Self {
        FhatConfig {
            lambda: 8.0,
            oversample: 2,
            points: 20,
            t0: 1e-20,
            tmax: 40.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Cx {
    re: f64,
    im: f64,
}

impl Cx {
    const fn new(re: f64, im: f64) -> Self {
        Cx { re, im }
    }
    fn add(self, o: Cx) -> Cx {
        Cx::new(self.re + o.re, self.im + o.im)
    }
    fn sub(self, o: Cx) -> Cx {
        Cx::new(self.re - o.re, self.im - o.im)
    }
    fn mul(self, o: Cx) -> Cx {
        Cx::new(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)
    }
    fn scale(self, a: f64) -> Cx {
        Cx::new(self.re * a, self.im * a)
    }
    fn norm(self) -> f64 {
        libm::hypot(self.re, self.im)
    }
    fn recip(self) -> Cx {
        let d = self.re * self.re + self.im * self.im;
        Cx::new(self.re / d, -self.im / d)
    }
    fn div(self, o: Cx) -> Cx {
        self.mul(o.recip())
    }
    /// Principal branch.
    fn sqrt(self) -> Cx {
        let m = self.norm();
        if m == 0.0 {
            return Cx::new(0.0, 0.0);
        }
        let re = libm::sqrt(0.5 * (m + self.re.abs()));
        let other = self.im / (2.0 * re);
        if self.re >= 0.0 {
            Cx::new(re, other)
        } else if self.im >= 0.0 {
            Cx::new(other, re)
        } else {
            Cx::new(-other, -re)
        }
    }
}

/// c(w) = F(r w) continued off the disk: Z int_0^1 h(v) (1 - w v)^{-1/2} dv,
/// analytic on C minus [1, ∞).
struct Continuation {
    e: Vec<f64>,
    wt: Vec<f64>,
    h: DgfEval,
    z: f64,
    edges: Vec<f64>,
    gauss: GaussLegendre,
}

impl Continuation {
    fn new(mu: &OffspringLaw, cfg: &FhatConfig) -> Self {
        let g = GaussLegendre::new(cfg.points);
        let h = mu.dgf_evaluator();
        let mut edges = geometric_edges(cfg.t0, 1.0);
        let mut t = 2.0;
        while t <= cfg.tmax {
            edges.push(t);
            t += 1.0;
        }
        let mut e = Vec::new();
        let mut wt = Vec::new();
        for ab in edges.windows(2) {
            for (t, w) in g.panel(ab[0], ab[1]) {
                let v = libm::exp(-t);
                e.push(v);
                wt.push(mu.z * w * h.eval(t) * v);
            }
        }
        Continuation {
            e,
            wt,
            h,
            z: mu.z,
            edges,
            gauss: g,
        }
    }

    fn accumulate(c: &mut Cx, d: &mut Cx, w: Cx, v: f64, a: f64) {
        let u = Cx::new(1.0 - w.re * v, -w.im * v);
        let is = u.sqrt().recip();
        *c = c.add(is.scale(a));
        *d = d.add(is.div(u).scale(0.5 * a * v));
    }

    /// (c(w), c'(w)).
    fn eval(&self, w: Cx) -> (Cx, Cx) {
        let mut c = Cx::new(0.0, 0.0);
        let mut d = Cx::new(0.0, 0.0);
        // the integrand is nearly singular at t = log|w| when w is close to
        // the cut; grade panels towards that point
        let ts = libm::log(w.norm());
        let dist = libm::atan2(w.im, w.re).abs();
        let tmax = *self.edges.last().unwrap_or(&1.0);
        if ts > 0.0 && dist < 1.0 && ts < tmax {
            let mut cuts = Vec::new();
            let mut sc = dist.max(1e-15);
            while sc < 1.0 {
                for x in [ts - sc, ts + sc] {
                    if x > 0.0 && x < tmax {
                        cuts.push(x);
                    }
                }
                sc *= 2.0;
            }
            cuts.push(ts);
            cuts.sort_by(|a, b| a.total_cmp(b));
            let np = self.gauss.nodes.len();
            for (i, ab) in self.edges.windows(2).enumerate() {
                let inner: Vec<f64> = cuts
                    .iter()
                    .copied()
                    .filter(|&x| x > ab[0] && x < ab[1])
                    .collect();
                if inner.is_empty() {
                    let r = i * np..(i + 1) * np;
                    for (&v, &a) in self.e[r.clone()].iter().zip(&self.wt[r]) {
                        Self::accumulate(&mut c, &mut d, w, v, a);
                    }
                    continue;
                }
                let mut lo = ab[0];
                for hi in inner.into_iter().chain(core::iter::once(ab[1])) {
                    for (t, wg) in self.gauss.panel(lo, hi) {
                        let v = libm::exp(-t);
                        Self::accumulate(&mut c, &mut d, w, v, self.z * wg * self.h.eval(t) * v);
                    }
                    lo = hi;
                }
            }
            return (c, d);
        }
        for (&v, &a) in self.e.iter().zip(&self.wt) {
            Self::accumulate(&mut c, &mut d, w, v, a);
        }
        (c, d)
    }

    fn eval_real(&self, w: f64) -> (f64, f64) {
        let mut c = 0.0;
        let mut d = 0.0;
        for (&v, &a) in self.e.iter().zip(&self.wt) {
            let u = 1.0 - w * v;
            let is = 1.0 / libm::sqrt(u);
            c += a * is;
            d += 0.5 * a * v * is / u;
        }
        (c, d)
    }

    /// Solve w c(w)^2 = target by Newton from `guess`.
    fn solve(&self, target: Cx, guess: Cx) -> Option<(Cx, Cx)> {
        let mut w = guess;
        let mut last = f64::INFINITY;
        for _ in 0..60 {
            let (c, d) = self.eval(w);
            let g = w.mul(c).mul(c).sub(target);
            let dg = c.mul(c).add(w.mul(c).mul(d).scale(2.0));
            let step = g.div(dg);
            w = w.sub(step);
            if !(w.re.is_finite() && w.im.is_finite()) {
                return None;
            }
            let sn = step.norm() / w.norm().max(1e-300);
            // stop at the rounding floor
            if sn <= 4e-16 || (sn <= 1e-12 && sn >= 0.5 * last) {
                return Some((w, self.eval(w).0));
            }
            last = sn;
        }
        None
    }
}

/// F̂ normalized at r̂ = r F(r)^2, from φ̂(s) = c(w(s)) with w c(w)^2 = F(r)^2 s,
/// sampled on a circle |s| = ρ < 1 and read off by one discrete Fourier
/// transform. The inner map is tracked continuously along the circle.
pub fn fhat_series(mu: &OffspringLaw, fr: f64, n: usize, cfg: &FhatConfig) -> Result<NormSeries> {
    let cont = Continuation::new(mu, cfg);
    let nn = n.max(32) as f64;
    let rho = libm::exp(-cfg.lambda / nn);
    let m = (cfg.oversample * (n + 1)).max(256).next_power_of_two();
    let f2 = fr * fr;

    // real starting point on (0, 1)
    let t0 = f2 * rho;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let (c, _) = cont.eval_real(mid);
        if mid * c * c < t0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    let start = Cx::new(0.5 * (lo + hi), 0.0);
    let (w0, c0) = cont
        .solve(Cx::new(t0, 0.0), start)
        .ok_or(Error::Tolerance)?;

    let half = m / 2;
    let mut vals = alloc::vec![Cx::new(0.0, 0.0); half + 1];
    vals[0] = Cx::new(c0.re, 0.0);
    let (mut prev, mut cur) = (w0, w0);
    let at = |j: f64| {
        let th = 2.0 * PI * j / m as f64;
        Cx::new(f2 * rho * libm::cos(th), f2 * rho * libm::sin(th))
    };
    for j in 1..=half {
        let guess = cur.scale(2.0).sub(prev);
        let solved = cont.solve(at(j as f64), guess).filter(|(w, _)| {
            w.sub(cur).norm() <= 0.25 * (1.0 + cur.norm())
        });
        let (w, c) = match solved {
            Some(x) => x,
            None => {
                // creep with substeps
                let mut wk = cur;
                let mut last = None;
                let sub = 64;
                for i in 1..=sub {
                    let s = at(j as f64 - 1.0 + i as f64 / sub as f64);
                    let r = cont.solve(s, wk).ok_or(Error::Tolerance)?;
                    wk = r.0;
                    last = Some(r);
                }
                last.ok_or(Error::Tolerance)?
            }
        };
        vals[j] = c;
        prev = cur;
        cur = w;
    }
    vals[half].im = 0.0;

    let mut re = alloc::vec![0.0; m];
    let mut im = alloc::vec![0.0; m];
    for j in 0..=half {
        re[j] = vals[j].re;
        im[j] = vals[j].im;
        if j > 0 && j < half {
            re[m - j] = vals[j].re;
            im[m - j] = -vals[j].im;
        }
    }
    poly::fft_reference(&mut re, &mut im, false);
    let mut coeffs = Vec::with_capacity(n + 1);
    let lr = libm::log(rho);
    let top = vals.iter().fold(0.0f64, |a, v| a.max(v.norm()));
    for (k, x) in re.iter().enumerate().take(n + 1) {
        let g = libm::exp(-lr * k as f64);
        let c = x / m as f64 * g;
        // rounding noise of the transform, amplified by rho^{-k}
        coeffs.push(if c.abs() <= 16.0 * f64::EPSILON * top * g { 0.0 } else { c });
    }
    coeffs[0] = 1.0;
    Ok(NormSeries {
        radius: fr * fr / (4.0 * mu.z),
        coeffs,
    })
}

/// max_k |c_k - (φ̂ ∘ p)_k| / c_k for k <= n.
pub fn verify_relation(f: &NormSeries, fhat: &NormSeries, fr: f64, n: usize) -> Result<f64> {
    let p = p_series(f, fr, n);
    let back = poly::compose(&fhat.coeffs[..(n + 1).min(fhat.coeffs.len())], &p, n + 1)?;
    Ok(f.coeffs
        .iter()
        .take(n + 1)
        .zip(&back)
        .map(|(a, b)| (a - b).abs() / a.abs().max(1e-300))
        .fold(0.0, f64::max))
}

/// Everything derived from a weight sequence up to order n.
#[derive(Debug, Clone)]
pub struct SeriesBundle {
    pub z: f64,
    pub r: f64,
    pub mu: OffspringLaw,
    pub ty: SeqType,
    pub f: NormSeries,
    /// F(r) and r F'(r) from the closed integral over the whole series.
    pub radius: RadiusValues,
    /// The same values by summation plus tail completion; `None` when the
    /// fitted exponent disagrees with the type.
    pub radius_tail: Option<RadiusValues>,
    pub consts: AsymptoticConstants,
    pub fhat: NormSeries,
}

impl SeriesBundle {
    pub fn build(q: &WeightSeq, n: usize, cfg: &QuadConfig) -> Result<Self> {
        let adm = q.admissible()?;
        let mu = offspring_mu(q, adm.z)?;
        let ty = crate::weights::classify(q, &mu, None)?;
        Self::from_law(mu, ty, n, cfg, &FhatConfig::default())
    }

    pub fn from_law(
        mu: OffspringLaw,
        ty: SeqType,
        n: usize,
        cfg: &QuadConfig,
        hcfg: &FhatConfig,
    ) -> Result<Self> {
        let z = mu.z;
        let r = 1.0 / (4.0 * z);
        let f = partition_series_from_law(&mu, n, cfg)?;
        let pre = asymptotic_constants_partial(z, &mu, ty)?;
        let radius_tail = f_at_radius(&f, ty, &pre).ok();
        let (fr, rdf) = radius_values_by_integral(&mu, ty);
        let radius = RadiusValues {
            f: fr,
            rdf,
            fitted_constant: radius_tail.map_or(f64::NAN, |t| t.fitted_constant),
            fitted_exponent: radius_tail.map_or(f64::NAN, |t| t.fitted_exponent),
        };
        let consts = asymptotic_constants(z, r, &mu, ty, fr, rdf)?;
        let fhat = fhat_series(&mu, fr, n, hcfg)?;
        Ok(SeriesBundle {
            z,
            r,
            mu,
            ty,
            f,
            radius,
            radius_tail,
            consts,
            fhat,
        })
    }
}

fn asymptotic_constants_partial(z: f64, mu: &OffspringLaw, ty: SeqType) -> Result<AsymptoticConstants> {
    let ca = c_a(z, mu, ty)?;
    let ell = match ty.regime {
        Regime::Subcritical | Regime::GenericCritical => 1.0,
        _ => mu.tail.map(|t| t.constant).ok_or(Error::Undefined("tail constant of mu"))?,
    };
    Ok(AsymptoticConstants {
        a: ty.a,
        c_a: ca,
        ell,
        kappa: None,
        kappa_prime: None,
        c_q: None,
        c_hat: None,
    })
}
