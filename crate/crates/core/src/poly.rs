//! Truncated power series arithmetic on dense f64 coefficient vectors.
//!
//! All functions take and return coefficient vectors `c[0..n]` meaning
//! sum c_k x^k mod x^n.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};

const NAIVE_CUTOFF: usize = 96;

fn fft(re: &mut [f64], im: &mut [f64], inverse: bool) {
    let n = re.len();
    let mut j = 0;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            re.swap(i, j);
            im.swap(i, j);
        }
    }
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let step = n / len;
        for start in (0..n).step_by(len) {
            for k in 0..half {
                // exact twiddles, no recurrence drift
                let ang = sign * 2.0 * PI * (k * step) as f64 / n as f64;
                let (ws, wc) = (libm::sin(ang), libm::cos(ang));
                let a = start + k;
                let b = a + half;
                let xr = re[b] * wc - im[b] * ws;
                let xi = re[b] * ws + im[b] * wc;
                re[b] = re[a] - xr;
                im[b] = im[a] - xi;
                re[a] += xr;
                im[a] += xi;
            }
        }
        len <<= 1;
    }
    if inverse {
        let s = 1.0 / n as f64;
        for v in re.iter_mut().chain(im.iter_mut()) {
            *v *= s;
        }
    }
}

struct Twiddles {
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl Twiddles {
    fn new(n: usize) -> Self {
        let mut cos = Vec::with_capacity(n / 2);
        let mut sin = Vec::with_capacity(n / 2);
        for k in 0..n / 2 {
            let ang = -2.0 * PI * k as f64 / n as f64;
            cos.push(libm::cos(ang));
            sin.push(libm::sin(ang));
        }
        Twiddles { cos, sin }
    }
}

fn fft_tw(re: &mut [f64], im: &mut [f64], inverse: bool, tw: &Twiddles) {
    let n = re.len();
    let mut j = 0;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            re.swap(i, j);
            im.swap(i, j);
        }
    }
    let sign = if inverse { -1.0 } else { 1.0 };
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let step = n / len;
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let wc = tw.cos[k * step];
                let ws = sign * tw.sin[k * step];
                let a = start + k;
                let b = a + half;
                let xr = re[b] * wc - im[b] * ws;
                let xi = re[b] * ws + im[b] * wc;
                re[b] = re[a] - xr;
                im[b] = im[a] - xi;
                re[a] += xr;
                im[a] += xi;
            }
        }
        len <<= 1;
    }
    if inverse {
        let s = 1.0 / n as f64;
        for v in re.iter_mut().chain(im.iter_mut()) {
            *v *= s;
        }
    }
}

fn mul_naive(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut c = vec![0.0; n];
    for (i, &x) in a.iter().enumerate().take(n) {
        if x == 0.0 {
            continue;
        }
        let lim = (n - i).min(b.len());
        for (cj, &y) in c[i..i + lim].iter_mut().zip(&b[..lim]) {
            *cj += x * y;
        }
    }
    c
}

fn mul_fft(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let la = a.len().min(n);
    let lb = b.len().min(n);
    let size = (la + lb - 1).next_power_of_two();
    let tw = Twiddles::new(size);
    // pack a + i b, one forward transform
    let mut re = vec![0.0; size];
    let mut im = vec![0.0; size];
    re[..la].copy_from_slice(&a[..la]);
    im[..lb].copy_from_slice(&b[..lb]);
    fft_tw(&mut re, &mut im, false, &tw);
    let mut pr = vec![0.0; size];
    let mut pi = vec![0.0; size];
    for k in 0..size {
        let j = (size - k) & (size - 1);
        let (zr, zi) = (re[k], im[k]);
        let (cr, ci) = (re[j], -im[j]);
        // A = (z + conj z_j)/2, B = (z - conj z_j)/(2i)
        let ar = 0.5 * (zr + cr);
        let ai = 0.5 * (zi + ci);
        let br = 0.5 * (zi - ci);
        let bi = -0.5 * (zr - cr);
        pr[k] = ar * br - ai * bi;
        pi[k] = ar * bi + ai * br;
    }
    fft_tw(&mut pr, &mut pi, true, &tw);
    pr.truncate(n);
    pr.resize(n, 0.0);
    pr
}

/// Product a*b mod x^n.
pub fn mul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    if a.is_empty() || b.is_empty() || n == 0 {
        return vec![0.0; n];
    }
    if a.len().min(b.len()).min(n) <= NAIVE_CUTOFF {
        mul_naive(a, b, n)
    } else {
        mul_fft(a, b, n)
    }
}

/// Reference transform kept for cross-checking the table-driven one.
pub fn fft_reference(re: &mut [f64], im: &mut [f64], inverse: bool) {
    fft(re, im, inverse)
}

/// 1/a mod x^n by Newton iteration.
pub fn inv(a: &[f64], n: usize) -> Result<Vec<f64>> {
    if a.is_empty() || a[0] == 0.0 {
        return Err(Error::Noninvertible);
    }
    let mut b = vec![1.0 / a[0]];
    let mut len = 1;
    while len < n {
        len = (2 * len).min(n);
        let ab = mul(&a[..a.len().min(len)], &b, len);
        let mut e = vec![0.0; len];
        for (k, v) in ab.iter().enumerate() {
            e[k] = -v;
        }
        e[0] += 2.0;
        b = mul(&b, &e, len);
    }
    b.truncate(n);
    Ok(b)
}

pub fn derivative(a: &[f64]) -> Vec<f64> {
    a.iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| k as f64 * c)
        .collect()
}

/// Powers g^0..=g^m mod x^n.
fn powers(g: &[f64], m: usize, n: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(m + 1);
    let mut one = vec![0.0; n];
    one[0] = 1.0;
    out.push(one);
    for j in 1..=m {
        let p = mul(&out[j - 1], g, n);
        out.push(p);
    }
    out
}

/// f(g(x)) mod x^n for several f sharing the same inner series g with
/// g(0) = 0 (baby-step giant-step).
pub fn compose_many(fs: &[&[f64]], g: &[f64], n: usize) -> Result<Vec<Vec<f64>>> {
    if !g.is_empty() && g[0] != 0.0 {
        return Err(Error::Invalid("inner series must vanish at 0"));
    }
    if n == 0 {
        return Ok(vec![Vec::new(); fs.len()]);
    }
    let maxlen = fs.iter().map(|f| f.len().min(n)).max().unwrap_or(0);
    let m = (libm::ceil(libm::sqrt(maxlen as f64)) as usize).max(1);
    let pw = powers(g, m, n);
    let gm = &pw[m];
    let mut results = Vec::with_capacity(fs.len());
    for f in fs {
        let f = &f[..f.len().min(n)];
        let blocks = f.len().div_ceil(m);
        let mut acc: Vec<f64> = Vec::new();
        for i in (0..blocks).rev() {
            // block i is multiplied by g^{im}, so only n - im terms matter
            let need = n.saturating_sub(i * m);
            if need == 0 {
                continue;
            }
            let mut b = vec![0.0; need];
            for j in 0..m {
                let idx = i * m + j;
                if idx >= f.len() {
                    break;
                }
                let c = f[idx];
                if c == 0.0 {
                    continue;
                }
                for (bk, pk) in b.iter_mut().zip(&pw[j][..need]) {
                    *bk += c * pk;
                }
            }
            if !acc.is_empty() {
                let prod = mul(&gm[..need], &acc, need);
                for (bk, pk) in b.iter_mut().zip(&prod) {
                    *bk += pk;
                }
            }
            acc = b;
        }
        acc.resize(n, 0.0);
        results.push(acc);
    }
    Ok(results)
}

pub fn compose(f: &[f64], g: &[f64], n: usize) -> Result<Vec<f64>> {
    Ok(compose_many(&[f], g, n)?.pop().unwrap_or_default())
}

/// Compositional inverse of p mod x^n, p(0) = 0, p'(0) != 0.
pub fn reversion(p: &[f64], n: usize) -> Result<Vec<f64>> {
    if p.len() < 2 || p[0] != 0.0 || p[1] == 0.0 {
        return Err(Error::Noninvertible);
    }
    if n <= 2 {
        let mut w = vec![0.0, 1.0 / p[1]];
        w.truncate(n);
        return Ok(w);
    }
    let dp = derivative(p);
    let mut w = vec![0.0, 1.0 / p[1]];
    let mut len = 2;
    while len < n {
        len = (2 * len).min(n);
        w.resize(len, 0.0);
        let pl = &p[..p.len().min(len)];
        let dl = &dp[..dp.len().min(len)];
        let r = compose_many(&[pl, dl], &w, len)?;
        let mut e = r[0].clone();
        e[1] -= 1.0;
        let dinv = inv(&r[1], len)?;
        let corr = mul(&e, &dinv, len);
        for (wk, ck) in w.iter_mut().zip(&corr) {
            *wk -= ck;
        }
        w[0] = 0.0;
    }
    w.truncate(n);
    Ok(w)
}

/// Evaluate sum c_k x^k by Horner.
pub fn eval(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &v| acc * x + v)
}
