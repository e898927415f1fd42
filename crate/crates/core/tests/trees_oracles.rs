use std::collections::HashMap;

use bmap_core::error::Error;
use bmap_core::laws::{size_bias, DiscreteLaw};
use bmap_core::rng::Stream;
use bmap_core::trees::*;
use proptest::prelude::*;

fn law(head: &[f64]) -> DiscreteLaw {
    DiscreteLaw::finite(head.to_vec()).unwrap()
}

/// Uniform composition of n - 1 into n parts, rotated into a tree.
fn random_tree(seed: u64, n: usize) -> PlaneTree {
    let mut rng = Stream::new(seed, 7);
    let mut xs = vec![0u64; n];
    for _ in 1..n {
        xs[rng.below(n as u64) as usize] += 1;
    }
    cycle_lemma_rotate(&mut xs);
    PlaneTree::from_child_counts(&xs).unwrap()
}

fn tv<K: std::hash::Hash + Eq>(a: &HashMap<K, f64>, b: &HashMap<K, f64>) -> f64 {
    let mut s = 0.0;
    for (k, &p) in a {
        s += (p - b.get(k).copied().unwrap_or(0.0)).abs();
    }
    for (k, &q) in b {
        if !a.contains_key(k) {
            s += q;
        }
    }
    s / 2.0
}

/// Empirical law of trees with at most `max` vertices; larger ones pool
/// into one class.
fn small_tree_law(trees: impl Iterator<Item = PlaneTree>, max: usize) -> HashMap<Vec<u8>, f64> {
    let mut m: HashMap<Vec<u8>, f64> = HashMap::new();
    let mut n = 0.0;
    for t in trees {
        let key = if t.len() <= max { t.to_parens() } else { b"big".to_vec() };
        *m.entry(key).or_default() += 1.0;
        n += 1.0;
    }
    m.values_mut().for_each(|v| *v /= n);
    m
}

#[test]
fn gw_examples() {
    let mut rng = Stream::new(1, 0);
    let dirac0 = DiscreteLaw::dirac(0).sampler().unwrap();
    for _ in 0..100 {
        assert_eq!(sample_gw(&dirac0, &mut rng, 10).unwrap(), PlaneTree::single());
    }

    let s = law(&[0.5, 0.0, 0.5]).sampler().unwrap();
    let runs = 200_000;
    let mut three = 0;
    for _ in 0..runs {
        match sample_gw(&s, &mut rng, 1 << 16) {
            Ok(t) if t.len() == 3 => three += 1,
            Ok(_) | Err(Error::CapExceeded) => {}
            Err(e) => panic!("{e:?}"),
        }
    }
    let p = three as f64 / runs as f64;
    let sd = (0.125 * 0.875 / runs as f64).sqrt();
    assert!((p - 0.125).abs() < 4.0 * sd, "{p}");

    let s = law(&[0.75, 0.0, 0.25]).sampler().unwrap();
    let runs = 100_000;
    let sizes: Vec<f64> = (0..runs)
        .map(|_| sample_gw(&s, &mut rng, 1 << 20).unwrap().len() as f64)
        .collect();
    let mean = sizes.iter().sum::<f64>() / runs as f64;
    let var = sizes.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (runs - 1) as f64;
    assert!((mean - 2.0).abs() < 3.0 * (var / runs as f64).sqrt(), "{mean}");
}

#[test]
fn cap_is_enforced() {
    let mut rng = Stream::new(2, 0);
    let s = DiscreteLaw::dirac(1).sampler().unwrap();
    assert!(matches!(sample_gw(&s, &mut rng, 50), Err(Error::CapExceeded)));
}

#[test]
fn conditioned_examples() {
    let nu = law(&[0.5, 0.0, 0.5]);
    let s = nu.sampler().unwrap();
    let mut rng = Stream::new(3, 0);
    let cherry = PlaneTree::from_child_counts(&[2, 0, 0]).unwrap();
    for _ in 0..100 {
        let t = sample_gw_conditioned(&nu, &s, 3, &mut rng, 1_000_000).unwrap();
        assert_eq!(t, cherry);
    }
    assert!(matches!(
        sample_gw_conditioned(&nu, &s, 4, &mut rng, 1_000_000),
        Err(Error::Infeasible)
    ));
    assert!(matches!(ExactConditioner::new(&nu, 4), Err(Error::Infeasible)));

    let runs = 100_000;
    let mut left = 0;
    for _ in 0..runs {
        let t = sample_gw_conditioned(&nu, &s, 5, &mut rng, 1_000_000).unwrap();
        assert_eq!(t.len(), 5);
        if t.outdegree(1) == 2 {
            left += 1;
        }
    }
    let p = left as f64 / runs as f64;
    assert!((p - 0.5).abs() < 4.0 * (0.25 / runs as f64).sqrt(), "{p}");
}

fn binary_trees(internal: usize) -> Vec<PlaneTree> {
    // all {0,2} Lukasiewicz words with the given number of 2s
    let n = 2 * internal + 1;
    let mut out = Vec::new();
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != internal {
            continue;
        }
        let counts: Vec<u64> = (0..n).map(|i| if mask >> i & 1 == 1 { 2 } else { 0 }).collect();
        if let Ok(t) = PlaneTree::from_child_counts(&counts) {
            out.push(t);
        }
    }
    out
}

#[test]
fn conditioned_sampler_is_exact_at_size_seven() {
    let shapes = binary_trees(3);
    assert_eq!(shapes.len(), 5);
    let exact: HashMap<Vec<u8>, f64> = shapes.iter().map(|t| (t.to_parens(), 0.2)).collect();

    let nu = law(&[0.5, 0.0, 0.5]);
    let s = nu.sampler().unwrap();
    let mut rng = Stream::new(4, 0);
    let draws = 1_000_000;
    let got = small_tree_law(
        (0..draws).map(|_| sample_gw_conditioned(&nu, &s, 7, &mut rng, 1_000_000).unwrap()),
        7,
    );
    let d = tv(&got, &exact);
    assert!(d < 5e-3, "rejection TV {d}");

    let c = ExactConditioner::new(&nu, 7).unwrap();
    let got = small_tree_law((0..draws).map(|_| c.sample(&mut rng)), 7);
    let d = tv(&got, &exact);
    assert!(d < 5e-3, "exact conditioner TV {d}");
}

#[test]
fn exact_conditioner_sum_probability() {
    // P(ξ_1 + ... + ξ_7 = 6) for ξ uniform on {0, 2}: C(7,3)/2^7
    let c = ExactConditioner::new(&law(&[0.5, 0.0, 0.5]), 7).unwrap();
    assert!((c.sum_probability() - 35.0 / 128.0).abs() < 1e-14);
    // geometric(1/2): P(sum of n = n - 1) = C(2n-2, n-1) / 2^(2n-1)
    let g = DiscreteLaw::geometric(0.5, 64);
    let c = ExactConditioner::new(&g, 9).unwrap();
    let exact = 12870.0 / 2f64.powi(17);
    assert!((c.sum_probability() - exact).abs() < 1e-12, "{}", c.sum_probability());
}

#[test]
fn exact_conditioner_matches_rejection_on_a_heavy_law() {
    // ν(0) = 1/2, ν(1) = 1/4, ν(3) = 1/8, ν(5) = 1/8: sizes 6 enumerate many shapes
    let nu = law(&[0.5, 0.25, 0.0, 0.125, 0.0, 0.125]);
    let s = nu.sampler().unwrap();
    let c = ExactConditioner::new(&nu, 6).unwrap();
    let mut rng = Stream::new(5, 0);
    let draws = 200_000;
    let a = small_tree_law(
        (0..draws).map(|_| sample_gw_conditioned(&nu, &s, 6, &mut rng, 1_000_000).unwrap()),
        6,
    );
    let b = small_tree_law((0..draws).map(|_| c.sample(&mut rng)), 6);
    assert!(tv(&a, &b) < 0.01, "{}", tv(&a, &b));
}

#[test]
fn js_examples() {
    assert_eq!(js_forward(&PlaneTree::single()), PlaneTree::single());
    assert_eq!(js_inverse(&PlaneTree::single()), PlaneTree::single());
    let t = PlaneTree::from_child_counts(&[1, 0]).unwrap();
    let f = js_forward(&t);
    assert_eq!(f.len(), 2);
    assert_eq!(f.root(), 1);
    assert_eq!(f.parent(0), Some(1));
}

fn check_js(t: &PlaneTree) {
    let f = js_forward(t);
    let h = t.heights();
    assert_eq!(f.len(), t.len());
    let whites = (0..t.len()).filter(|&u| h[u] % 2 == 0).count();
    assert_eq!(f.leaf_count(), whites);
    for u in 0..t.len() {
        if h[u] % 2 == 0 {
            assert!(f.is_leaf(u));
        } else {
            assert_eq!(f.outdegree(u), t.outdegree(u) + 1);
        }
    }
    assert_eq!(&js_inverse(&f), t);
}

/// Parenthesis code of trees with at most `max` vertices, a pooled class
/// for larger ones (including those that hit the cap).
fn key(t: Result<PlaneTree, Error>, max: usize) -> Vec<u8> {
    match t {
        Ok(t) if t.len() <= max => t.to_parens(),
        Ok(_) | Err(Error::CapExceeded) => b"big".to_vec(),
        Err(e) => panic!("{e:?}"),
    }
}

fn key_law(keys: impl Iterator<Item = Vec<u8>>) -> HashMap<Vec<u8>, f64> {
    let mut m: HashMap<Vec<u8>, f64> = HashMap::new();
    let mut n = 0.0;
    for k in keys {
        *m.entry(k).or_default() += 1.0;
        n += 1.0;
    }
    m.values_mut().for_each(|v| *v /= n);
    m
}

#[test]
fn js_transforms_two_type_gw_into_gw() {
    // ρ∘ geometric(1/2), ρ• = δ_1 give ρ(0) = ρ(2) = 1/2
    let white = DiscreteLaw::geometric(0.5, 60).sampler().unwrap();
    let black = DiscreteLaw::dirac(1).sampler().unwrap();
    let rho = law(&[0.5, 0.0, 0.5]).sampler().unwrap();
    let mut rng = Stream::new(6, 0);
    let draws = 100_000;
    let cap = 1000;
    let a = key_law((0..draws).map(|_| {
        let t = sample_gw_two_type(&white, &black, &mut rng, cap);
        if let Ok(t) = &t {
            check_js(t);
        }
        key(t.map(|t| js_forward(&t).canonical()), 7)
    }));
    let b = key_law((0..draws).map(|_| key(sample_gw(&rho, &mut rng, cap), 7)));
    let d = tv(&a, &b);
    assert!(d < 0.01, "{d}");
}

#[test]
fn ball_examples() {
    let t = random_tree(9, 40);
    assert_eq!(ball(&t, 0), PlaneTree::single());
    assert_eq!(left_right_ball(&t, 0).tree, PlaneTree::single());

    let star = PlaneTree::from_child_counts(&[5, 0, 0, 0, 0, 0]).unwrap();
    let b = left_right_ball(&star, 2);
    assert_eq!(b.tree.children(0), &[1, 2, 3, 4]);
    assert_eq!(b.gaps.len(), 1);
    assert_eq!((b.gaps[0].at, b.gaps[0].hidden), (2, Some(1)));
    assert_eq!(left_ball(&star, 2).tree.outdegree(0), 2);
}

#[test]
fn kesten_examples() {
    let d1 = DiscreteLaw::dirac(1);
    let mut rng = Stream::new(10, 0);
    for r in 0..5 {
        let b = sample_kesten_ball(&d1, &d1, None, r, BallKind::Full, &mut rng, 1000).unwrap();
        assert_eq!(b.tree().len(), 2 * r + 1);
        assert_eq!(b.spine.len(), 2 * r + 1);
        assert_eq!(b.tree().height() as usize, 2 * r);
    }
    let g = DiscreteLaw::geometric(0.5, 60);
    assert!(matches!(
        sample_kesten_ball(&g, &DiscreteLaw::dirac(2), None, 2, BallKind::Full, &mut rng, 1000),
        Err(Error::NotCritical(_))
    ));
}

#[test]
fn kesten_white_spine_is_size_biased() {
    // geometric(1/2) white, δ_1 black: size-biased white mean E[k²]/E[k] = 3
    let g = DiscreteLaw::geometric(0.5, 60);
    let d1 = DiscreteLaw::dirac(1);
    let mut rng = Stream::new(11, 0);
    let runs = 50_000;
    let mut xs = Vec::with_capacity(runs);
    for _ in 0..runs {
        let b = sample_kesten_ball(&g, &d1, None, 1, BallKind::Full, &mut rng, 1 << 20).unwrap();
        xs.push(b.tree().outdegree(0) as f64);
    }
    let mean = xs.iter().sum::<f64>() / runs as f64;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (runs - 1) as f64;
    let biased = size_bias(&g, None).unwrap().mean();
    assert!((biased - 3.0).abs() < 1e-9);
    assert!((mean - 3.0).abs() < 3.0 * (var / runs as f64).sqrt(), "{mean}");
}

#[test]
fn condensation_examples() {
    let mut rng = Stream::new(12, 0);
    // m∘ m• tiny: L' = 1
    let g = DiscreteLaw::geometric(1e-9, 8);
    let d1 = DiscreteLaw::dirac(1);
    for _ in 0..100 {
        let b = sample_condensation_ball(&g, &d1, None, 1, BallKind::LeftRight, &mut rng, 1000).unwrap();
        assert_eq!(b.spine.len(), 2);
        let c = b.condensation.unwrap();
        assert_eq!(c.vertex, b.spine[1]);
        assert_eq!(b.tree().heights()[c.vertex as usize] % 2, 1);
    }
    let crit = DiscreteLaw::geometric(0.5, 60);
    assert!(matches!(
        sample_condensation_ball(&crit, &d1, None, 1, BallKind::LeftRight, &mut rng, 1000),
        Err(Error::NotSubcritical(_))
    ));
}

#[test]
fn spine_length_is_geometric() {
    let m = 0.5;
    let mut rng = Stream::new(13, 0);
    let draws = 100_000;
    let mut counts = [0usize; 12];
    let mut sum = 0.0;
    for _ in 0..draws {
        let l = sample_spine_length(m, &mut rng);
        sum += l as f64;
        counts[(l - 1).min(11)] += 1;
    }
    let mean = sum / draws as f64;
    // sd of a geometric with mean 2: sqrt(m)/(1-m)
    let sd = m.sqrt() / (1.0 - m);
    assert!((mean - 2.0).abs() < 3.0 * sd / (draws as f64).sqrt(), "{mean}");
    let mut chi2 = 0.0;
    for (i, &c) in counts.iter().enumerate() {
        let p = if i < 11 { (1.0 - m) * m.powi(i as i32) } else { m.powi(11) };
        let e = p * draws as f64;
        chi2 += (c as f64 - e).powi(2) / e;
    }
    // 11 degrees of freedom: the 0.99 quantile is 24.72
    assert!(chi2 < 24.72, "{chi2}");
}

#[test]
fn condensation_components_are_gw() {
    // ν∘ geometric(1/3) (mean 1/2), ν• = δ_1
    let white = DiscreteLaw::geometric(1.0 / 3.0, 60);
    let black = DiscreteLaw::dirac(1);
    let ws = white.sampler().unwrap();
    let bs = black.sampler().unwrap();
    let mut rng = Stream::new(14, 0);
    let draws = 100_000;
    let mut hung = Vec::with_capacity(draws);
    while hung.len() < draws {
        let b = sample_condensation_ball(&white, &black, None, 5, BallKind::Full, &mut rng, 1 << 20).unwrap();
        // L' is independent of the hanging subtrees
        let Some(c) = b.condensation else { continue };
        // a 7-vertex subtree must fit below the horizon 2R = 10
        if b.tree().heights()[c.vertex as usize] > 3 {
            continue;
        }
        let v = b.tree().children(c.vertex as usize)[0] as usize;
        hung.push(subtree(&b.ball, v));
    }
    let mut direct = Vec::with_capacity(draws);
    while direct.len() < draws {
        if let Ok(t) = sample_gw_two_type(&ws, &bs, &mut rng, 1 << 20) {
            direct.push(t);
        }
    }
    let a = small_tree_law(hung.into_iter(), 7);
    let b = small_tree_law(direct.into_iter(), 7);
    let d = tv(&a, &b);
    assert!(d < 0.01, "{d}");
}

/// Subtree below v; trees cut by the horizon are reported as large.
fn subtree(pt: &PartialTree, v: usize) -> PlaneTree {
    let t = &pt.tree;
    let mut counts = Vec::new();
    let mut stack = vec![v];
    let mut cut = false;
    while let Some(u) = stack.pop() {
        counts.push(t.outdegree(u) as u64);
        cut |= pt.gaps.iter().any(|g| g.vertex as usize == u);
        stack.extend(t.children(u).iter().rev().map(|&c| c as usize));
    }
    if cut {
        return PlaneTree::from_child_counts(&[8, 0, 0, 0, 0, 0, 0, 0, 0]).unwrap();
    }
    PlaneTree::from_child_counts(&counts).unwrap()
}

#[test]
fn shrink_beyond_horizon_fails() {
    let d1 = DiscreteLaw::dirac(1);
    let mut rng = Stream::new(15, 0);
    let b = sample_kesten_ball(&d1, &d1, None, 2, BallKind::LeftRight, &mut rng, 100).unwrap();
    assert!(matches!(b.shrink(3), Err(Error::HorizonExceeded)));
    assert_eq!(b.shrink(1).unwrap().tree.len(), 3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn encodings_round_trip(seed in any::<u64>(), n in 1usize..500) {
        let t = random_tree(seed, n);
        prop_assert_eq!(PlaneTree::from_lukasiewicz(&t.lukasiewicz()).unwrap(), t.clone());
        prop_assert_eq!(PlaneTree::from_parens(&t.to_parens()).unwrap(), t.clone());
        let path = t.lukasiewicz();
        let mut s = 0i64;
        for (i, x) in path.iter().enumerate() {
            s += x;
            prop_assert!(s >= 0 || i + 1 == path.len());
        }
        prop_assert_eq!(s, -1);
    }

    #[test]
    fn js_is_a_bijection(seed in any::<u64>(), n in 1usize..500) {
        let t = random_tree(seed, n);
        check_js(&t);
        prop_assert_eq!(js_forward(&js_inverse(&t)), t);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn left_right_ball_is_height_ball_for_small_degrees(seed in any::<u64>(), n in 1usize..200, extra in 0usize..3) {
        let t = random_tree(seed, n);
        let r = (0..t.len()).map(|u| t.outdegree(u)).max().unwrap().max(1) + extra;
        prop_assert_eq!(left_right_ball(&t, r).tree, ball(&t, 2 * r));
    }

    #[test]
    fn shrinking_a_ball_commutes(seed in any::<u64>(), n in 1usize..300, r in 1usize..4) {
        let t = random_tree(seed, n);
        let big = left_right_ball(&t, r + 1);
        let sb = SpineBall { ball: big, spine: vec![0], condensation: None, radius: r + 1, kind: BallKind::LeftRight };
        let a = sb.shrink(r).unwrap().canonical();
        let b = left_right_ball(&t, r).canonical();
        prop_assert_eq!(a, b);
    }
}
