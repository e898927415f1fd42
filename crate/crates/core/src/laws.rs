//! Offspring laws of the tree of components and exact samplers for them.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::rng::Stream;
use crate::series::{pairwise_sum, AsymptoticConstants, NormSeries, SeriesBundle};
use crate::special::hurwitz_zeta;
use crate::weights::{Regime, SeqType};

/// Values below this are rounding noise of the series pipeline.
const NOISE: f64 = 4e-16;

/// Largest value a tail draw may return.
pub const DRAW_CAP: u64 = 1 << 62;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailKind {
    /// Light tail; beyond the head the law continues geometrically with the
    /// given ratio per lattice step.
    FiniteVariance { sigma2: Option<f64>, ratio: f64 },
    /// P(X >= k) = constant k^{-theta} beyond the head.
    PowerLaw { theta: f64, constant: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailModel {
    pub kind: TailKind,
    /// Last index of the head table.
    pub matched_at: usize,
    /// Mass beyond `matched_at`.
    pub mass: f64,
    /// Support lattice offset + span * j.
    pub offset: usize,
    pub span: usize,
    /// Constant fixed by CCDF continuity rather than by a closed form.
    pub empirical: bool,
}

impl TailModel {
    /// P(X >= k) for k > matched_at.
    pub fn ccdf(&self, k: u64) -> f64 {
        let n = self.matched_at as u64;
        if k <= n + 1 {
            return self.mass;
        }
        match self.kind {
            TailKind::PowerLaw { theta, constant } => constant * libm::pow(k as f64, -theta),
            TailKind::FiniteVariance { ratio, .. } => {
                // first lattice point above n
                let steps = (k - n - 1).div_ceil(self.span as u64);
                self.mass * libm::pow(ratio, steps as f64)
            }
        }
    }

    fn first_lattice_above(&self, x: u64) -> u64 {
        let (o, s) = (self.offset as u64, self.span as u64);
        if x <= o {
            return o;
        }
        o + (x - o).div_ceil(s) * s
    }

    /// Draw from the tail conditioned on X > matched_at.
    pub fn draw(&self, rng: &mut Stream) -> u64 {
        let n = self.matched_at as u64;
        let start = self.first_lattice_above(n + 1);
        match self.kind {
            TailKind::PowerLaw { theta, .. } => {
                let u = rng.uniform();
                let x = (n + 1) as f64 * libm::pow(u, -1.0 / theta);
                if !(x < DRAW_CAP as f64) {
                    return DRAW_CAP;
                }
                self.first_lattice_above((x as u64).max(start)).min(DRAW_CAP)
            }
            TailKind::FiniteVariance { ratio, .. } => {
                let u = rng.uniform();
                let j = if ratio <= 0.0 {
                    0.0
                } else {
                    libm::floor(libm::log(u) / libm::log(ratio))
                };
                let v = start as f64 + j * self.span as f64;
                if v >= DRAW_CAP as f64 {
                    DRAW_CAP
                } else {
                    v as u64
                }
            }
        }
    }

    /// E[X; X > matched_at], infinite when theta <= 1.
    pub fn partial_mean(&self) -> f64 {
        let n = self.matched_at as f64;
        match self.kind {
            TailKind::PowerLaw { theta, constant } => {
                if theta <= 1.0 {
                    f64::INFINITY
                } else {
                    (n + 1.0) * self.mass + constant * hurwitz_zeta(theta, n + 2.0)
                }
            }
            TailKind::FiniteVariance { ratio, .. } => {
                let s = self.span as f64;
                let start = self.first_lattice_above(self.matched_at as u64 + 1) as f64;
                self.mass * (start + s * ratio / (1.0 - ratio))
            }
        }
    }
}

/// A law on Z_+ given by a head table and an optional tail model.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteLaw {
    pub head: Vec<f64>,
    pub tail: Option<TailModel>,
}

impl DiscreteLaw {
    pub fn finite(head: Vec<f64>) -> Result<Self> {
        let s = pairwise_sum(&head);
        if head.iter().any(|&p| !(p >= 0.0)) || (s - 1.0).abs() > 1e-9 {
            return Err(Error::NotALaw(s));
        }
        Ok(DiscreteLaw { head, tail: None })
    }

    pub fn dirac(k: usize) -> Self {
        let mut head = vec![0.0; k + 1];
        head[k] = 1.0;
        DiscreteLaw { head, tail: None }
    }

    /// Geometric law (1 - p) p^k on Z_+, head up to n, exact geometric tail.
    pub fn geometric(p: f64, n: usize) -> Self {
        let mut head = Vec::with_capacity(n + 1);
        let mut w = 1.0 - p;
        for _ in 0..=n {
            head.push(w);
            w *= p;
        }
        let mass = libm::pow(p, (n + 1) as f64);
        DiscreteLaw {
            head,
            tail: Some(TailModel {
                kind: TailKind::FiniteVariance {
                    sigma2: Some(p / ((1.0 - p) * (1.0 - p))),
                    ratio: p,
                },
                matched_at: n,
                mass,
                offset: 0,
                span: 1,
                empirical: false,
            }),
        }
    }

    pub fn prob(&self, k: usize) -> f64 {
        self.head.get(k).copied().unwrap_or(0.0)
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail.map_or(0.0, |t| t.mass)
    }

    /// P(X = k), with the tail spread over its lattice by CCDF differences.
    pub fn pmf(&self, k: u64) -> f64 {
        if (k as usize) < self.head.len() {
            return self.head[k as usize];
        }
        match &self.tail {
            Some(t) => {
                let (o, s) = (t.offset as u64, t.span.max(1) as u64);
                if k <= t.matched_at as u64 || k < o || (k - o) % s != 0 {
                    return 0.0;
                }
                // the tail starts at the first lattice point above the head
                let first = k <= t.matched_at as u64 + s;
                let hi = if first { t.mass } else { t.ccdf(k) };
                (hi - t.ccdf(k + s)).max(0.0)
            }
            None => 0.0,
        }
    }

    /// P(X >= k).
    pub fn ccdf(&self, k: u64) -> f64 {
        let n = self.head.len() as u64;
        if k >= n {
            return match &self.tail {
                Some(t) => t.ccdf(k),
                None => 0.0,
            };
        }
        pairwise_sum(&self.head[k as usize..]) + self.tail_mass()
    }

    pub fn ccdf_table(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.head.len()];
        let mut acc = self.tail_mass();
        for k in (0..self.head.len()).rev() {
            acc += self.head[k];
            out[k] = acc;
        }
        out
    }

    pub fn head_mean(&self) -> f64 {
        let v: Vec<f64> = self.head.iter().enumerate().map(|(k, p)| k as f64 * p).collect();
        pairwise_sum(&v)
    }

    /// Head mean plus the tail model contribution.
    pub fn mean(&self) -> f64 {
        self.head_mean() + self.tail.map_or(0.0, |t| t.partial_mean())
    }

    pub fn head_second_moment(&self) -> f64 {
        let v: Vec<f64> = self
            .head
            .iter()
            .enumerate()
            .map(|(k, p)| (k * k) as f64 * p)
            .collect();
        pairwise_sum(&v)
    }

    pub fn sampler(&self) -> Result<DiscreteSampler> {
        build_sampler(self)
    }
}

/// kρ(k)/m. With `mean = None` the mean is taken from head and tail model.
pub fn size_bias(law: &DiscreteLaw, mean: Option<f64>) -> Result<DiscreteLaw> {
    let m = mean.unwrap_or_else(|| law.mean());
    if !(m > 0.0) || !m.is_finite() {
        return Err(Error::ZeroMean);
    }
    let head: Vec<f64> = law.head.iter().enumerate().map(|(k, p)| k as f64 * p / m).collect();
    let hm = pairwise_sum(&head);
    let tail = match law.tail {
        None => None,
        Some(t) => {
            let mass = (1.0 - hm).max(0.0);
            let n = t.matched_at;
            let kind = match t.kind {
                TailKind::PowerLaw { theta, .. } => {
                    if theta <= 1.0 {
                        return Err(Error::ZeroMean);
                    }
                    let th = theta - 1.0;
                    TailKind::PowerLaw {
                        theta: th,
                        constant: mass * libm::pow((n + 1) as f64, th),
                    }
                }
                k @ TailKind::FiniteVariance { .. } => k,
            };
            Some(TailModel {
                kind,
                mass,
                empirical: true,
                ..t
            })
        }
    };
    Ok(DiscreteLaw { head, tail })
}

/// Vose alias table.
#[derive(Debug, Clone)]
pub struct AliasTable {
    prob: Vec<f64>,
    alias: Vec<u32>,
}

impl AliasTable {
    pub fn new(weights: &[f64]) -> Result<Self> {
        let n = weights.len();
        let total: f64 = weights.iter().sum();
        if n == 0 || !(total > 0.0) {
            return Err(Error::NotALaw(total));
        }
        let mut prob: Vec<f64> = weights.iter().map(|w| w * n as f64 / total).collect();
        let mut alias = vec![0u32; n];
        let mut small = Vec::new();
        let mut large = Vec::new();
        for (i, &p) in prob.iter().enumerate() {
            if p < 1.0 {
                small.push(i);
            } else {
                large.push(i);
            }
        }
        while let (Some(&s), Some(&l)) = (small.last(), large.last()) {
            small.pop();
            alias[s] = l as u32;
            prob[l] = (prob[l] + prob[s]) - 1.0;
            if prob[l] < 1.0 {
                large.pop();
                small.push(l);
            }
        }
        for i in large.into_iter().chain(small) {
            prob[i] = 1.0;
        }
        Ok(AliasTable { prob, alias })
    }

    pub fn sample(&self, rng: &mut Stream) -> usize {
        let i = rng.below(self.prob.len() as u64) as usize;
        if rng.uniform() < self.prob[i] {
            i
        } else {
            self.alias[i] as usize
        }
    }
}

#[derive(Debug, Clone)]
pub struct DiscreteSampler {
    alias: AliasTable,
    tail_mass: f64,
    tail: Option<TailModel>,
}

pub fn build_sampler(law: &DiscreteLaw) -> Result<DiscreteSampler> {
    if let Some(t) = &law.tail {
        if let TailKind::PowerLaw { constant, .. } = t.kind {
            if !(constant >= 0.0) {
                return Err(Error::BadMatch);
            }
        }
        if t.mass < 0.0 {
            return Err(Error::BadMatch);
        }
    }
    Ok(DiscreteSampler {
        alias: AliasTable::new(&law.head)?,
        tail_mass: law.tail_mass(),
        tail: law.tail,
    })
}

impl DiscreteSampler {
    pub fn sample(&self, rng: &mut Stream) -> u64 {
        if let Some(t) = &self.tail {
            if self.tail_mass > 0.0 && rng.uniform() < self.tail_mass {
                return t.draw(rng);
            }
        }
        self.alias.sample(rng) as u64
    }
}

/// ν_∘, ν_• and ν with their moments.
#[derive(Debug, Clone)]
pub struct BoundaryLaws {
    pub ty: SeqType,
    /// F(r).
    pub fr: f64,
    /// Geometric parameter 1 - 1/F(r) of ν_∘.
    pub white_p: f64,
    pub nu: DiscreteLaw,
    pub nu_black: DiscreteLaw,
    pub m_nu: f64,
    /// m_{ν_•} = (m_ν F(r) - F(r) + 1)/(F(r) - 1).
    pub m_black: f64,
    pub sigma2_nu: Option<f64>,
    pub sigma2_black: Option<f64>,
}

/// m_ν = 1/(1 + F(r)/(2 r F'(r))), and 1 when F'(r) is infinite.
pub fn mean_nu(fr: f64, rdf: Option<f64>) -> f64 {
    match rdf {
        None => 1.0,
        Some(d) => 1.0 / (1.0 + fr / (2.0 * d)),
    }
}

/// Exponent e of φ̂_k ~ k^{-e} and the step g of the correction exponents,
/// for the power law regimes with a finite mean.
fn fhat_expansion(ty: SeqType) -> Option<(f64, f64)> {
    let a = ty.a;
    match ty.regime {
        Regime::Dense => Some((a / (a - 1.0), (2.0 - a) / (a - 1.0))),
        Regime::Dilute => Some((a, a - 2.0)),
        Regime::GenericCritical => Some((a, 0.5)),
        Regime::Subcritical | Regime::BoundaryA2 => None,
    }
}

/// Number of terms of the tail fit in [`mean_by_summation`].
pub const TAIL_FIT_TERMS: usize = 5;

/// m_ν = Σ 2k φ̂_k / F(r) by direct summation of the head, completed by a
/// fit φ̂_k ≈ k^{-e} Σ_j A_j k^{-γ_j} on [n/32, n]. The γ_j run over the
/// multiples of the correction step whose singular exponent is not an
/// integer (integer exponents carry no coefficient asymptotics). Returns
/// `None` when the mean is infinite.
pub fn mean_by_summation(fhat: &NormSeries, ty: SeqType, fr: f64) -> Option<f64> {
    let n = fhat.order();
    let c = &fhat.coeffs;
    let head: Vec<f64> = (1..=n).map(|k| 2.0 * k as f64 * c[k]).collect();
    let head = pairwise_sum(&head);
    let Some((e, g)) = fhat_expansion(ty) else {
        return match ty.regime {
            Regime::BoundaryA2 => None,
            _ => Some(head / fr),
        };
    };
    let mut ex = Vec::with_capacity(TAIL_FIT_TERMS);
    let mut m = 0;
    while ex.len() < TAIL_FIT_TERMS {
        let beta = e - 1.0 + g * m as f64;
        if (beta - libm::round(beta)).abs() > 1e-9 {
            ex.push(g * m as f64);
        }
        m += 1;
    }
    let t = ex.len();
    let mut ata = vec![vec![0.0; t]; t];
    let mut atb = vec![0.0; t];
    for k in (n / 32).max(1)..=n {
        let x = k as f64;
        let row: Vec<f64> = ex.iter().map(|&q| libm::pow(x, -q)).collect();
        let y = c[k] * libm::pow(x, e);
        for i in 0..t {
            atb[i] += row[i] * y;
            for j in 0..t {
                ata[i][j] += row[i] * row[j];
            }
        }
    }
    let coef = solve_dense(ata, atb)?;
    let tail: f64 = ex
        .iter()
        .zip(&coef)
        .map(|(&q, &a)| 2.0 * a * hurwitz_zeta(e - 1.0 + q, (n + 1) as f64))
        .sum();
    Some((head + tail) / fr)
}

/// Gaussian elimination with partial pivoting.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for i in 0..n {
        let p = (i..n).max_by(|&x, &y| a[x][i].abs().total_cmp(&a[y][i].abs()))?;
        if a[p][i] == 0.0 {
            return None;
        }
        a.swap(i, p);
        b.swap(i, p);
        for r in i + 1..n {
            let f = a[r][i] / a[i][i];
            for c in i..n {
                a[r][c] -= f * a[i][c];
            }
            b[r] -= f * b[i];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = b[i];
        for c in i + 1..n {
            s -= a[i][c] * x[c];
        }
        x[i] = s / a[i][i];
    }
    Some(x)
}

/// Tail exponent of ν([k, ∞)) for the type.
pub fn tail_exponent(ty: SeqType) -> Option<f64> {
    match ty.regime {
        Regime::Subcritical => None,
        Regime::Dense => Some(1.0 / (ty.a - 1.0)),
        Regime::BoundaryA2 => Some(1.0),
        Regime::Dilute | Regime::GenericCritical => Some(ty.a - 1.0),
    }
}

/// Largest deficit (head mass below one) accepted before the head is
/// considered too short.
pub const MAX_DEFICIT: f64 = 0.25;
/// Head mass may exceed one by at most this much.
pub const MASS_TOL: f64 = 1e-4;

fn attach_tail(
    head: Vec<f64>,
    ty: SeqType,
    offset: usize,
    sigma2: Option<f64>,
) -> Result<DiscreteLaw> {
    let n = head.len() - 1;
    let total = pairwise_sum(&head);
    let mass = 1.0 - total;
    if mass.abs() < 1e-12 {
        let head = head.iter().map(|p| p / total).collect();
        return Ok(DiscreteLaw { head, tail: None });
    }
    if mass < -MASS_TOL || mass > MAX_DEFICIT {
        return Err(Error::MassDeficit(mass));
    }
    let mass = mass.max(0.0);
    let kind = match tail_exponent(ty) {
        Some(theta) => TailKind::PowerLaw {
            theta,
            constant: mass * libm::pow((n + 1) as f64, theta),
        },
        None => {
            // geometric continuation fitted on the last two support points
            let (a, b) = (head[n.saturating_sub(2)], head[n]);
            let ratio = if a > 0.0 && b > 0.0 { (b / a).min(0.999) } else { 0.5 };
            TailKind::FiniteVariance { sigma2, ratio }
        }
    };
    Ok(DiscreteLaw {
        head,
        tail: Some(TailModel {
            kind,
            matched_at: n,
            mass,
            offset,
            span: 2,
            empirical: true,
        }),
    })
}

/// ν(2k) = φ̂_k/F(r), ν_•(2k+1) = φ̂_{k+1}/(F(r) - 1), tails matched by
/// CCDF continuity at the end of the head.
pub fn boundary_laws(
    fhat: &NormSeries,
    ty: SeqType,
    fr: f64,
    rdf: Option<f64>,
    consts: &AsymptoticConstants,
    z: f64,
    m_mu: f64,
) -> Result<BoundaryLaws> {
    let nh = fhat.order();
    let clean = |x: f64| if x.abs() < NOISE || x < 0.0 { 0.0 } else { x };
    let mut nu = vec![0.0; 2 * nh + 1];
    for k in 0..=nh {
        nu[2 * k] = clean(fhat.coeffs[k]) / fr;
    }
    nu[0] = 1.0 / fr;
    let mut black = vec![0.0; 2 * nh];
    for k in 0..nh {
        black[2 * k + 1] = clean(fhat.coeffs[k + 1]) / (fr - 1.0);
    }
    let m_nu = mean_nu(fr, rdf);
    let (s2, s2b) = if ty.regime == Regime::Subcritical {
        // 2 P(r)/κ' with P(r) = r F(r)^2 = r̂ and κ' = 2 r F(r) κ, κ = 2 Z (1 - m_μ)
        let s = match consts.kappa_prime {
            Some(kp) if kp > 0.0 => 2.0 * fhat.radius / kp,
            _ => fr / (2.0 * z * (1.0 - m_mu)),
        };
        let s2 = s * s;
        // from ν_•(j) = ν(j + 1) F/(F - 1) on odd j
        let s2b = fr / (fr - 1.0) * (s2 - 1.0 / fr) - 1.0 / ((fr - 1.0) * (fr - 1.0));
        (Some(s2), Some(s2b))
    } else {
        (None, None)
    };
    let nu = attach_tail(nu, ty, 0, s2)?;
    let nu_black = attach_tail(black, ty, 1, s2b)?;
    Ok(BoundaryLaws {
        ty,
        fr,
        white_p: 1.0 - 1.0 / fr,
        nu,
        nu_black,
        m_nu,
        m_black: (m_nu * fr - fr + 1.0) / (fr - 1.0),
        sigma2_nu: s2,
        sigma2_black: s2b,
    })
}

impl BoundaryLaws {
    pub fn from_bundle(b: &SeriesBundle) -> Result<Self> {
        boundary_laws(
            &b.fhat,
            b.ty,
            b.radius.f,
            b.radius.rdf,
            &b.consts,
            b.z,
            b.mu.mean,
        )
    }

    /// ν_∘ with head up to n.
    pub fn nu_white(&self, n: usize) -> DiscreteLaw {
        DiscreteLaw::geometric(self.white_p, n)
    }

    pub fn m_white(&self) -> f64 {
        self.fr - 1.0
    }

    /// ν(2k) = ν_•(2k-1) F/(F-1) consistency and mean-product criticality.
    pub fn mean_product(&self) -> f64 {
        self.m_white() * self.m_black
    }

    /// ν_•([k, ∞)).
    pub fn black_ccdf(&self, k: u64) -> f64 {
        self.nu_black.ccdf(k)
    }
}
