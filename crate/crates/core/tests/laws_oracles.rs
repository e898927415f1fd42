use bmap_core::laws::{mean_by_summation, size_bias, BoundaryLaws, DiscreteLaw, TailKind};
use bmap_core::rng::Stream;
use bmap_core::series::{partition_series_from_law, QuadConfig, SeriesBundle};
use bmap_core::weights::{Regime, WeightSeq};

fn bundle(q: &WeightSeq, n: usize) -> SeriesBundle {
    SeriesBundle::build(q, n, &QuadConfig::default()).unwrap()
}

#[test]
fn qstar_hand_values() {
    let b = bundle(&WeightSeq::qstar(4096), 64);
    let l = BoundaryLaws::from_bundle(&b).unwrap();
    assert!((l.nu.prob(0) - 2.0 / 3.0).abs() < 1e-9);
    assert!((l.nu.prob(2) - 0.3).abs() < 1e-9);
    assert!((l.nu_black.prob(1) - 0.9).abs() < 1e-9);
    assert!((l.nu_black.prob(3) - 81.0 / 1400.0).abs() < 1e-9);
    let w = l.nu_white(20);
    for k in 0..20 {
        let exact = (2.0 / 3.0) * (1.0f64 / 3.0).powi(k as i32);
        assert!((w.prob(k) - exact).abs() < 1e-15);
    }
    assert_eq!(l.m_nu, 1.0);
}

#[test]
fn zero_sequence_laws_are_exact() {
    let b = bundle(&WeightSeq::zero(), 256);
    let l = BoundaryLaws::from_bundle(&b).unwrap();
    assert!(l.nu_black.tail.is_none());
    for (k, &p) in l.nu_black.head.iter().enumerate() {
        assert_eq!(p, if k == 1 { 1.0 } else { 0.0 }, "k={k}");
    }
    assert!((l.nu.prob(0) - 0.5).abs() < 1e-14);
    assert!((l.nu.prob(2) - 0.5).abs() < 1e-14);
    assert_eq!(l.m_nu, 1.0);
    let direct = mean_by_summation(&b.fhat, b.ty, b.radius.f).unwrap();
    assert!((direct - 1.0).abs() < 1e-12);
}

#[test]
fn parity_of_supports() {
    for q in [WeightSeq::qstar(4096), WeightSeq::explicit(vec![0.0, 1.0 / 12.0]).unwrap()] {
        let l = BoundaryLaws::from_bundle(&bundle(&q, 256)).unwrap();
        assert!(l.nu.head.iter().skip(1).step_by(2).all(|&p| p == 0.0));
        assert!(l.nu_black.head.iter().step_by(2).all(|&p| p == 0.0));
        let t = l.nu.tail.unwrap();
        assert_eq!((t.offset, t.span), (0, 2));
        let t = l.nu_black.tail.unwrap();
        assert_eq!((t.offset, t.span), (1, 2));
    }
}

#[test]
fn criticality_dichotomy_and_direct_mean() {
    let q12 = bundle(&WeightSeq::explicit(vec![0.0, 1.0 / 12.0]).unwrap(), 4096);
    let dil = bundle(&WeightSeq::stable_critical(1.75, 1 << 16).unwrap(), 4096);
    assert_eq!(q12.ty.regime, Regime::GenericCritical);
    assert_eq!(dil.ty.regime, Regime::Dilute);
    for b in [&q12, &dil] {
        let l = BoundaryLaws::from_bundle(b).unwrap();
        assert!(l.m_nu < 1.0 - 1e-3, "{}", l.m_nu);
        let direct = mean_by_summation(&b.fhat, b.ty, b.radius.f).unwrap();
        assert!((direct - l.m_nu).abs() < 1e-6, "{direct} {}", l.m_nu);
        // white and black means multiply to one exactly when critical
        assert!(l.mean_product() < 1.0 - 1e-3);
    }
    // the generic quadrangulation value: F(r) = 4/3 and r F'(r) = 4/3
    let l = BoundaryLaws::from_bundle(&q12).unwrap();
    assert!((l.m_nu - 2.0 / 3.0).abs() < 1e-12);
}

#[test]
fn dense_law_is_critical() {
    let b = bundle(&WeightSeq::stable_critical(1.25, 1 << 16).unwrap(), 2048);
    let l = BoundaryLaws::from_bundle(&b).unwrap();
    assert_eq!(l.m_nu, 1.0);
    let direct = mean_by_summation(&b.fhat, b.ty, b.radius.f).unwrap();
    assert!((direct - 1.0).abs() < 1e-6, "{direct}");
    assert!((l.mean_product() - 1.0).abs() < 1e-12);
}

#[test]
fn masses_sum_to_one_with_tails() {
    for q in [
        WeightSeq::qstar(1 << 14),
        WeightSeq::zero(),
        WeightSeq::explicit(vec![0.0, 1.0 / 12.0]).unwrap(),
        WeightSeq::explicit(vec![0.0, 1.0 / 16.0]).unwrap(),
        WeightSeq::stable_critical(1.25, 1 << 16).unwrap(),
    ] {
        let l = BoundaryLaws::from_bundle(&bundle(&q, 1024)).unwrap();
        for law in [&l.nu, &l.nu_black] {
            let s: f64 = law.head.iter().sum::<f64>() + law.tail_mass();
            assert!((s - 1.0).abs() < 1e-6, "{s}");
        }
    }
}

/// F̂(r̂ s²)/F(r) from the F series alone: solve w F(r w)^2 = F(r)^2 s² on
/// (0, 1) by bisection, then F̂ = F(r w).
fn gnu_oracle(f: &[f64], fr: f64, s: f64) -> f64 {
    let eval = |w: f64| f.iter().rev().fold(0.0, |acc, c| acc * w + c);
    let target = fr * fr * s * s;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let c = eval(mid);
        if mid * c * c < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    eval(0.5 * (lo + hi)) / fr
}

#[test]
fn generating_function_reconstruction() {
    for q in [
        WeightSeq::qstar(4096),
        WeightSeq::explicit(vec![0.0, 1.0 / 12.0]).unwrap(),
        WeightSeq::explicit(vec![0.0, 1.0 / 16.0]).unwrap(),
    ] {
        let b = bundle(&q, 512);
        let l = BoundaryLaws::from_bundle(&b).unwrap();
        let f = partition_series_from_law(&b.mu, 20_000, &QuadConfig::default()).unwrap();
        for s in [0.3f64, 0.7, 0.95] {
            let g: f64 = l
                .nu
                .head
                .iter()
                .enumerate()
                .map(|(k, p)| p * s.powi(k as i32))
                .sum();
            let o = gnu_oracle(&f.coeffs, b.radius.f, s);
            assert!((g - o).abs() < 1e-8, "s={s} {g} {o}");
        }
    }
}

#[test]
fn subcritical_variance_closed_form() {
    let b = bundle(&WeightSeq::explicit(vec![0.0, 1.0 / 16.0]).unwrap(), 1 << 14);
    let l = BoundaryLaws::from_bundle(&b).unwrap();
    let s2 = l.sigma2_nu.unwrap();
    // Z = 4/3, m_μ = 1/2, F(r) = 16/9
    assert!((b.z - 4.0 / 3.0).abs() < 1e-12);
    assert!((b.mu.mean - 0.5).abs() < 1e-12);
    let exact = (b.radius.f / (2.0 * b.z * (1.0 - b.mu.mean))).powi(2);
    assert!((s2 - exact).abs() < 1e-9, "{s2} {exact}");
    let direct = l.nu.head_second_moment() - l.nu.head_mean().powi(2);
    assert!((direct - s2).abs() / s2 < 0.01, "{direct} {s2}");
    let fr = b.radius.f;
    let sb = l.sigma2_black.unwrap();
    let m_black = 1.0 / (fr - 1.0);
    assert!((l.m_black - m_black).abs() < 1e-12);
    let db = l.nu_black.head_second_moment() - l.nu_black.head_mean().powi(2);
    assert!((db - sb).abs() / sb < 0.01, "{db} {sb}");
}

#[test]
fn size_bias_examples() {
    let d = size_bias(&DiscreteLaw::dirac(1), None).unwrap();
    assert_eq!(d.head, vec![0.0, 1.0]);
    let two = DiscreteLaw::finite(vec![0.5, 0.0, 0.5]).unwrap();
    assert_eq!(size_bias(&two, None).unwrap().head, vec![0.0, 0.0, 1.0]);
    let g = DiscreteLaw::geometric(1.0 / 3.0, 60);
    let b = size_bias(&g, Some(0.5)).unwrap();
    for k in 0..60 {
        let exact = k as f64 * (2.0 / 3.0) * (1.0f64 / 3.0).powi(k as i32) / 0.5;
        assert!((b.prob(k) - exact).abs() < 1e-15, "k={k}");
    }
    let s: f64 = b.head.iter().sum::<f64>() + b.tail_mass();
    assert!((s - 1.0).abs() < 1e-12);
}

#[test]
fn sampler_frequencies_for_zero_sequence() {
    let l = BoundaryLaws::from_bundle(&bundle(&WeightSeq::zero(), 64)).unwrap();
    let s = l.nu.sampler().unwrap();
    let mut rng = Stream::new(11, 0);
    let n = 1_000_000u64;
    let mut zeros = 0u64;
    for _ in 0..n {
        match s.sample(&mut rng) {
            0 => zeros += 1,
            2 => {}
            x => panic!("drew {x}"),
        }
    }
    let sd = (n as f64 * 0.25).sqrt();
    assert!((zeros as f64 - n as f64 / 2.0).abs() < 3.0 * sd);
    let one = DiscreteLaw::dirac(1).sampler().unwrap();
    assert!((0..1000).all(|_| one.sample(&mut rng) == 1));
}

/// Hill estimator on the top `k` order statistics, with its threshold.
fn hill(mut xs: Vec<f64>, k: usize) -> (f64, f64) {
    xs.sort_by(|a, b| b.total_cmp(a));
    let u = xs[k];
    let m: f64 = xs[..k].iter().map(|x| (x / u).ln()).sum::<f64>() / k as f64;
    (1.0 / m, u)
}

/// The value the Hill estimator concentrates on when the top k of n draws
/// lie at or above u: k / (n E[log(X/u); X > u]).
fn hill_functional(law: &DiscreteLaw, u: f64, k: usize, n: usize) -> f64 {
    let mut e = 0.0;
    for (x, &p) in law.head.iter().enumerate() {
        if x as f64 > u {
            e += p * (x as f64 / u).ln();
        }
    }
    if let Some(t) = law.tail {
        if let TailKind::PowerLaw { theta, .. } = t.kind {
            e += t.mass * (((t.matched_at + 1) as f64 / u).ln() + 1.0 / theta);
        }
    }
    k as f64 / (n as f64 * e)
}

#[test]
fn dense_tail_index_by_hill() {
    let b = bundle(&WeightSeq::stable_critical(1.25, 1 << 16).unwrap(), 2048);
    let l = BoundaryLaws::from_bundle(&b).unwrap();
    let s = l.nu.sampler().unwrap();
    let mut rng = Stream::new(5, 0);
    let xs: Vec<f64> = (0..1_000_000).map(|_| s.sample(&mut rng) as f64).collect();
    let k = 2000;
    let (h, u) = hill(xs, k);
    // sampler against the law: 3 standard deviations of the estimator
    let target = hill_functional(&l.nu, u, k, 1_000_000);
    assert!((h - target).abs() < 3.0 * target / (k as f64).sqrt(), "{h} {target}");
    // the law itself approaches 4/3 from above at a slow k^{-1/3} rate
    assert!(h > 4.0 / 3.0 && h < 4.0 / 3.0 + 0.25, "{h}");
}
