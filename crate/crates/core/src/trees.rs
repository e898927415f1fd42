//! Plane trees, Galton–Watson sampling (free and conditioned), the
//! Janson–Stefánsson bijection and truncated infinite trees.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::laws::{size_bias, DiscreteLaw, DiscreteSampler, TailKind};
use crate::poly;
use crate::rng::Stream;

/// Parent of the root.
pub const NONE: u32 = u32::MAX;

/// A plane tree in an arena. Vertex indices are stable under the
/// bijections of this module, so equality is structural equality with the
/// same labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PlaneTree {
    parent: Vec<u32>,
    children: Vec<Vec<u32>>,
    root: u32,
}

impl PlaneTree {
    /// The tree {∅}.
    pub fn single() -> Self {
        PlaneTree {
            parent: vec![NONE],
            children: vec![Vec::new()],
            root: 0,
        }
    }

    /// Build from ordered child lists; parents and the root are derived.
    pub fn from_children(children: Vec<Vec<u32>>) -> Result<Self> {
        let n = children.len();
        if n == 0 {
            return Err(Error::Invalid("empty tree"));
        }
        let mut parent = vec![NONE; n];
        for (u, cs) in children.iter().enumerate() {
            for &c in cs {
                let c = c as usize;
                if c >= n || parent[c] != NONE || c == u {
                    return Err(Error::Invalid("child lists do not form a tree"));
                }
                parent[c] = u as u32;
            }
        }
        let mut roots = parent.iter().enumerate().filter(|(_, &p)| p == NONE);
        let root = match (roots.next(), roots.next()) {
            (Some((r, _)), None) => r as u32,
            _ => return Err(Error::Invalid("child lists do not form a tree")),
        };
        let t = PlaneTree {
            parent,
            children,
            root,
        };
        if t.preorder().len() != n {
            return Err(Error::Invalid("child lists do not form a tree"));
        }
        Ok(t)
    }

    /// Build from child counts listed in depth-first order; vertex i of the
    /// result is the i-th vertex in that order.
    pub fn from_child_counts(counts: &[u64]) -> Result<Self> {
        let n = counts.len();
        let mut s: i64 = 1;
        for (i, &k) in counts.iter().enumerate() {
            s += k as i64 - 1;
            if s <= 0 && i + 1 < n {
                return Err(Error::Invalid("not a Lukasiewicz path"));
            }
        }
        if s != 0 || n == 0 {
            return Err(Error::Invalid("not a Lukasiewicz path"));
        }
        let mut children: Vec<Vec<u32>> = counts.iter().map(|&k| Vec::with_capacity(k as usize)).collect();
        let mut parent = vec![NONE; n];
        let mut open: Vec<u32> = Vec::new();
        for (i, &k) in counts.iter().enumerate() {
            if let Some(&p) = open.last() {
                parent[i] = p;
                children[p as usize].push(i as u32);
                if children[p as usize].len() as u64 == counts[p as usize] {
                    open.pop();
                }
            }
            if k > 0 {
                open.push(i as u32);
            }
        }
        Ok(PlaneTree {
            parent,
            children,
            root: 0,
        })
    }

    /// Depth-first sequence of k_u - 1.
    pub fn lukasiewicz(&self) -> Vec<i64> {
        self.preorder()
            .iter()
            .map(|&u| self.children[u as usize].len() as i64 - 1)
            .collect()
    }

    pub fn from_lukasiewicz(steps: &[i64]) -> Result<Self> {
        let mut counts = Vec::with_capacity(steps.len());
        for &s in steps {
            if s < -1 {
                return Err(Error::Invalid("step below -1"));
            }
            counts.push((s + 1) as u64);
        }
        Self::from_child_counts(&counts)
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn root(&self) -> usize {
        self.root as usize
    }

    pub fn parent(&self, u: usize) -> Option<usize> {
        match self.parent[u] {
            NONE => None,
            p => Some(p as usize),
        }
    }

    pub fn children(&self, u: usize) -> &[u32] {
        &self.children[u]
    }

    /// Number of children k_u.
    pub fn outdegree(&self, u: usize) -> usize {
        self.children[u].len()
    }

    pub fn is_leaf(&self, u: usize) -> bool {
        self.children[u].is_empty()
    }

    /// Vertices in depth-first (lexicographic) order.
    pub fn preorder(&self) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.len());
        let mut stack = vec![self.root];
        while let Some(u) = stack.pop() {
            out.push(u);
            stack.extend(self.children[u as usize].iter().rev());
        }
        out
    }

    pub fn heights(&self) -> Vec<u32> {
        let mut h = vec![0; self.len()];
        for u in self.preorder() {
            for &c in &self.children[u as usize] {
                h[c as usize] = h[u as usize] + 1;
            }
        }
        h
    }

    pub fn height(&self) -> u32 {
        self.heights().into_iter().max().unwrap_or(0)
    }

    /// White vertices sit at even height.
    pub fn is_white(&self, heights: &[u32], u: usize) -> bool {
        heights[u] % 2 == 0
    }

    pub fn leaf_count(&self) -> usize {
        self.children.iter().filter(|c| c.is_empty()).count()
    }

    /// The same tree relabelled in depth-first order.
    pub fn canonical(&self) -> PlaneTree {
        let counts: Vec<u64> = self
            .preorder()
            .iter()
            .map(|&u| self.children[u as usize].len() as u64)
            .collect();
        Self::from_child_counts(&counts).expect("preorder counts form a path")
    }

    /// [`PlaneTree::canonical`] together with the old-to-new label map.
    pub fn canonical_with_map(&self) -> (PlaneTree, Vec<u32>) {
        let order = self.preorder();
        let mut new = vec![0u32; self.len()];
        for (i, &u) in order.iter().enumerate() {
            new[u as usize] = i as u32;
        }
        (self.canonical(), new)
    }

    /// Shape equality, ignoring labels.
    pub fn same_shape(&self, other: &PlaneTree) -> bool {
        self.len() == other.len() && self.lukasiewicz() == other.lukasiewicz()
    }

    /// Balanced parentheses: `(` on the way down each edge and `)` on the
    /// way up, wrapped in one outer pair for the root.
    pub fn to_parens(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(2 * self.len());
        // (vertex, next child index)
        let mut stack = vec![(self.root, 0usize)];
        out.push(b'(');
        while let Some((u, i)) = stack.pop() {
            let cs = &self.children[u as usize];
            if i < cs.len() {
                stack.push((u, i + 1));
                stack.push((cs[i], 0));
                out.push(b'(');
            } else {
                out.push(b')');
            }
        }
        out
    }

    pub fn from_parens(s: &[u8]) -> Result<Self> {
        let mut counts: Vec<u64> = Vec::with_capacity(s.len() / 2);
        let mut open: Vec<usize> = Vec::new();
        for (i, &c) in s.iter().enumerate() {
            match c {
                b'(' => {
                    if let Some(&p) = open.last() {
                        counts[p] += 1;
                    } else if i != 0 {
                        return Err(Error::Invalid("more than one root"));
                    }
                    open.push(counts.len());
                    counts.push(0);
                }
                b')' => {
                    if open.pop().is_none() {
                        return Err(Error::Invalid("unbalanced parentheses"));
                    }
                }
                _ => return Err(Error::Invalid("unexpected byte")),
            }
        }
        if !open.is_empty() {
            return Err(Error::Invalid("unbalanced parentheses"));
        }
        Self::from_child_counts(&counts)
    }

    /// The last leaf in contour order: follow last children from the root.
    pub fn last_leaf(&self) -> usize {
        let mut u = self.root as usize;
        while let Some(&c) = self.children[u].last() {
            u = c as usize;
        }
        u
    }

    fn rank_in_parent(&self, u: usize) -> Option<(usize, usize)> {
        let p = self.parent(u)?;
        let cs = &self.children[p];
        let i = cs.iter().position(|&c| c as usize == u)?;
        Some((i, cs.len()))
    }

    fn is_last_child(&self, u: usize) -> bool {
        matches!(self.rank_in_parent(u), Some((i, k)) if i + 1 == k)
    }
}

/// Grow a tree depth first from child counts drawn by `draw(height)`.
fn grow(mut draw: impl FnMut(usize) -> u64, cap: usize) -> Result<PlaneTree> {
    let mut counts = Vec::new();
    let k = draw(0);
    counts.push(k);
    let mut pending = k;
    let mut stack = vec![k];
    while let Some(top) = stack.last_mut() {
        if *top == 0 {
            stack.pop();
            continue;
        }
        *top -= 1;
        let h = stack.len();
        let k = draw(h);
        counts.push(k);
        pending = pending - 1 + k;
        if counts.len() as u64 + pending > cap as u64 {
            return Err(Error::CapExceeded);
        }
        stack.push(k);
    }
    if counts.len() > cap || pending > 0 {
        return Err(Error::CapExceeded);
    }
    PlaneTree::from_child_counts(&counts)
}

/// Exact GW_ρ sample.
pub fn sample_gw(rho: &DiscreteSampler, rng: &mut Stream, cap: usize) -> Result<PlaneTree> {
    if cap == 0 {
        return Err(Error::CapExceeded);
    }
    grow(|_| rho.sample(rng), cap)
}

/// Two-type GW_{ρ∘,ρ•}: white (even height) vertices draw from `white`,
/// black ones from `black`.
pub fn sample_gw_two_type(
    white: &DiscreteSampler,
    black: &DiscreteSampler,
    rng: &mut Stream,
    cap: usize,
) -> Result<PlaneTree> {
    if cap == 0 {
        return Err(Error::CapExceeded);
    }
    grow(
        |h| {
            if h % 2 == 0 {
                white.sample(rng)
            } else {
                black.sample(rng)
            }
        },
        cap,
    )
}

/// Rotate increments summing to -1 (as child counts summing to n - 1) to
/// the unique rotation that is a Łukasiewicz path.
pub fn cycle_lemma_rotate(counts: &mut [u64]) {
    let mut s: i64 = 0;
    let mut min = i64::MAX;
    let mut at = 0;
    for (i, &k) in counts.iter().enumerate() {
        s += k as i64 - 1;
        if s < min {
            min = s;
            at = i;
        }
    }
    counts.rotate_left((at + 1) % counts.len().max(1));
}

/// Support lattice of a law: (gcd of the support, whether 0 is charged).
fn support_lattice(law: &DiscreteLaw) -> (u64, bool) {
    let mut g = 0u64;
    for (k, &p) in law.head.iter().enumerate() {
        if p > 0.0 {
            g = gcd(g, k as u64);
        }
    }
    if let Some(t) = law.tail {
        if t.mass > 0.0 {
            g = gcd(g, t.offset as u64);
            g = gcd(g, t.span as u64);
        }
    }
    (g, law.prob(0) > 0.0)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Whether GW_ρ charges trees with n vertices.
pub fn size_feasible(law: &DiscreteLaw, n: usize) -> bool {
    if n == 0 {
        return false;
    }
    let (g, zero) = support_lattice(law);
    if !zero {
        return false;
    }
    if n == 1 {
        return true;
    }
    let target = n - 1;
    if g == 0 || target % g as usize != 0 {
        return false;
    }
    // n - 1 must be a sum of positive support points
    let pos: Vec<usize> = (1..=target).filter(|&k| law.pmf(k as u64) > 0.0).collect();
    let mut reach = vec![false; target + 1];
    reach[0] = true;
    for &s in &pos {
        for j in s..=target {
            if reach[j - s] {
                reach[j] = true;
            }
        }
    }
    reach[target]
}

/// GW_ν conditioned on n vertices: i.i.d. child counts are drawn until they
/// sum to n - 1, then rotated by the cycle lemma.
pub fn sample_gw_conditioned(
    law: &DiscreteLaw,
    sampler: &DiscreteSampler,
    n: usize,
    rng: &mut Stream,
    retry_cap: u64,
) -> Result<PlaneTree> {
    if !size_feasible(law, n) {
        return Err(Error::Infeasible);
    }
    let target = (n - 1) as u64;
    let mut xs = vec![0u64; n];
    for _ in 0..retry_cap {
        let mut s = 0u64;
        let mut ok = true;
        for x in xs.iter_mut() {
            *x = sampler.sample(rng);
            s = s.saturating_add(*x);
            if s > target {
                ok = false;
                break;
            }
        }
        if ok && s == target {
            cycle_lemma_rotate(&mut xs);
            return PlaneTree::from_child_counts(&xs);
        }
    }
    Err(Error::RetryCapExceeded)
}

/// Exact sampler of GW_ν conditioned on n vertices without rejection.
///
/// The child counts (ξ_1, ..., ξ_n) given Σξ = n - 1 are drawn by recursive
/// halving: with P_m the law of a sum of m counts (truncated at n - 1),
/// the first half of a block of m counts summing to s sums to a with
/// probability P_{m1}(a) P_{m2}(s - a) / P_m(s). Counts are measured in
/// units of the support lattice span.
#[derive(Debug, Clone)]
pub struct ExactConditioner {
    n: usize,
    span: u64,
    target: usize,
    tables: BTreeMap<usize, Vec<f64>>,
}

impl ExactConditioner {
    pub fn new(law: &DiscreteLaw, n: usize) -> Result<Self> {
        if !size_feasible(law, n) {
            return Err(Error::Infeasible);
        }
        let (g, _) = support_lattice(law);
        let span = g.max(1);
        let target = (n - 1) / span as usize;
        let base: Vec<f64> = (0..=target).map(|j| law.pmf(j as u64 * span)).collect();
        let mut tables = BTreeMap::new();
        tables.insert(1, base);
        let mut c = ExactConditioner {
            n,
            span,
            target,
            tables,
        };
        c.table(n);
        if c.tables[&n][target] <= 0.0 {
            return Err(Error::Infeasible);
        }
        Ok(c)
    }

    fn table(&mut self, m: usize) {
        if self.tables.contains_key(&m) {
            return;
        }
        let (a, b) = (m / 2, m - m / 2);
        self.table(a);
        self.table(b);
        let mut p = poly::mul(&self.tables[&a], &self.tables[&b], self.target + 1);
        let top = p.iter().fold(0.0f64, |x, &y| x.max(y));
        for v in p.iter_mut() {
            // transform rounding below the largest entry is not mass
            if *v <= 1e-15 * top {
                *v = 0.0;
            }
        }
        self.tables.insert(m, p);
    }

    fn split(&self, m: usize, s: usize, rng: &mut Stream, out: &mut Vec<u64>) {
        if m == 1 {
            out.push(s as u64 * self.span);
            return;
        }
        let (ma, mb) = (m / 2, m - m / 2);
        let pa = &self.tables[&ma];
        let pb = &self.tables[&mb];
        let w: Vec<f64> = (0..=s).map(|a| pa[a] * pb[s - a]).collect();
        let total: f64 = w.iter().sum();
        let u = rng.uniform() * total;
        let mut acc = 0.0;
        let mut pick = s;
        for (a, &x) in w.iter().enumerate() {
            acc += x;
            if u < acc {
                pick = a;
                break;
            }
        }
        // never land on a zero-weight split through rounding of the sum
        while w[pick] == 0.0 && pick > 0 {
            pick -= 1;
        }
        self.split(ma, pick, rng, out);
        self.split(mb, s - pick, rng, out);
    }

    /// Child counts in depth-first order.
    pub fn sample_counts(&self, rng: &mut Stream) -> Vec<u64> {
        let mut xs = Vec::with_capacity(self.n);
        self.split(self.n, self.target, rng, &mut xs);
        cycle_lemma_rotate(&mut xs);
        xs
    }

    pub fn sample(&self, rng: &mut Stream) -> PlaneTree {
        PlaneTree::from_child_counts(&self.sample_counts(rng)).expect("cycle lemma yields a path")
    }

    /// P(Σ_{i≤n} ξ_i = n - 1).
    pub fn sum_probability(&self) -> f64 {
        self.tables[&self.n][self.target]
    }
}

/// Φ_JS. Labels are kept: black b with white children w_1..w_m gets the
/// children x_1..x_m, y where x_i is the first child of w_i (w_i itself if
/// it is a leaf) and y is the next sibling of b, or its parent if b is a
/// last child. White vertices become leaves.
pub fn js_forward(t: &PlaneTree) -> PlaneTree {
    let n = t.len();
    let h = t.heights();
    let mut children: Vec<Vec<u32>> = vec![Vec::new(); n];
    for b in 0..n {
        if h[b] % 2 == 0 {
            continue;
        }
        let p = t.parent[b] as usize;
        let mut cs: Vec<u32> = t.children[b]
            .iter()
            .map(|&w| t.children[w as usize].first().copied().unwrap_or(w))
            .collect();
        let sib = &t.children[p];
        let i = sib.iter().position(|&x| x as usize == b).expect("child of parent");
        cs.push(if i + 1 < sib.len() { sib[i + 1] } else { p as u32 });
        children[b] = cs;
    }
    let root = t.children[t.root()].first().copied().unwrap_or(t.root);
    let mut parent = vec![NONE; n];
    for (u, cs) in children.iter().enumerate() {
        for &c in cs {
            parent[c as usize] = u as u32;
        }
    }
    PlaneTree {
        parent,
        children,
        root,
    }
}

/// Φ_JS⁻¹. Leaves of `t` are the white vertices. A leaf w climbs while it
/// is the last child of its parent; the vertices met, top first, are its
/// children. The leaf whose climb reaches the root is the new root.
pub fn js_inverse(t: &PlaneTree) -> PlaneTree {
    let n = t.len();
    let mut children: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut root = t.root;
    // x(w): the vertex standing for white w among its parent's children
    let mut owner = vec![NONE; n];
    for w in 0..n {
        if !t.is_leaf(w) {
            continue;
        }
        let mut chain = Vec::new();
        let mut u = w;
        while t.is_last_child(u) {
            u = t.parent[u] as usize;
            chain.push(u as u32);
        }
        chain.reverse();
        let x = chain.first().copied().unwrap_or(w as u32);
        if u == t.root() {
            root = w as u32;
        }
        owner[x as usize] = w as u32;
        children[w] = chain;
    }
    for b in 0..n {
        if t.is_leaf(b) {
            continue;
        }
        let cs = &t.children[b];
        children[b] = cs[..cs.len() - 1].iter().map(|&x| owner[x as usize]).collect();
    }
    let mut parent = vec![NONE; n];
    for (u, cs) in children.iter().enumerate() {
        for &c in cs {
            parent[c as usize] = u as u32;
        }
    }
    PlaneTree {
        parent,
        children,
        root,
    }
}

/// B_R: the vertices at height at most R, relabelled depth first.
pub fn ball(t: &PlaneTree, r: usize) -> PlaneTree {
    let h = t.heights();
    let counts: Vec<u64> = t
        .preorder()
        .into_iter()
        .filter(|&u| h[u as usize] as usize <= r)
        .map(|u| {
            if (h[u as usize] as usize) < r {
                t.children[u as usize].len() as u64
            } else {
                0
            }
        })
        .collect();
    PlaneTree::from_child_counts(&counts).expect("ball of a tree is a tree")
}

/// Children dropped from a vertex of a ball: `hidden` children sit between
/// visible positions `at - 1` and `at`; `None` means infinitely many.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Gap {
    pub vertex: u32,
    pub at: u32,
    pub hidden: Option<u64>,
}

/// A finite tree with gap markers.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PartialTree {
    pub tree: PlaneTree,
    pub gaps: Vec<Gap>,
}

impl PartialTree {
    pub fn full(tree: PlaneTree) -> Self {
        PartialTree {
            tree,
            gaps: Vec::new(),
        }
    }

    /// Degree of u counting hidden children (`None` if infinite).
    pub fn true_outdegree(&self, u: usize) -> Option<u64> {
        let mut k = self.tree.outdegree(u) as u64;
        for g in self.gaps.iter().filter(|g| g.vertex as usize == u) {
            k += g.hidden?;
        }
        Some(k)
    }

    /// Relabel depth first, carrying the gaps along.
    pub fn canonical(&self) -> PartialTree {
        let order = self.tree.preorder();
        let mut new = vec![0u32; self.tree.len()];
        for (i, &u) in order.iter().enumerate() {
            new[u as usize] = i as u32;
        }
        let mut gaps: Vec<Gap> = self
            .gaps
            .iter()
            .map(|g| Gap {
                vertex: new[g.vertex as usize],
                ..*g
            })
            .collect();
        gaps.sort_by_key(|g| (g.vertex, g.at));
        PartialTree {
            tree: self.tree.canonical(),
            gaps,
        }
    }
}

/// B^↔_R: vertices of height at most 2R reached through children ranked
/// among the R first or R last of their parent; dropped children become
/// gaps.
pub fn left_right_ball(t: &PlaneTree, r: usize) -> PartialTree {
    keep_ranked(&PartialTree::full(t.clone()), r, BallKind::LeftRight)
}

/// B^←_R: as [`left_right_ball`] with the R first children only.
pub fn left_ball(t: &PlaneTree, r: usize) -> PartialTree {
    keep_ranked(&PartialTree::full(t.clone()), r, BallKind::Left)
}

/// The part of a tree seen by the radius-R ball of its looptree: height at
/// most 2R, all children of white vertices, R first and R last children of
/// black vertices.
pub fn looptree_ball(t: &PlaneTree, r: usize) -> PartialTree {
    keep_ranked(&PartialTree::full(t.clone()), r, BallKind::Looptree)
}

fn keep_ranked(pt: &PartialTree, r: usize, kind: BallKind) -> PartialTree {
    #[derive(Clone, Copy)]
    enum Item {
        Child(u32),
        Hidden(Option<u64>),
    }
    let t = &pt.tree;
    let depth = 2 * r;
    let r64 = r as u64;
    let mut counts = Vec::new();
    let mut gaps = Vec::new();
    let mut stack = vec![(t.root, 0usize)];
    while let Some((u, hu)) = stack.pop() {
        let id = counts.len() as u32;
        if hu >= depth {
            counts.push(0);
            let k = pt.true_outdegree(u as usize);
            if k != Some(0) {
                gaps.push(Gap {
                    vertex: id,
                    at: 0,
                    hidden: k,
                });
            }
            continue;
        }
        let cs = t.children(u as usize);
        let mut items = Vec::with_capacity(cs.len() + 2);
        for (i, &c) in cs.iter().enumerate() {
            for g in pt.gaps.iter().filter(|g| g.vertex == u && g.at as usize == i) {
                items.push(Item::Hidden(g.hidden));
            }
            items.push(Item::Child(c));
        }
        for g in pt.gaps.iter().filter(|g| g.vertex == u && g.at as usize == cs.len()) {
            items.push(Item::Hidden(g.hidden));
        }
        let width = |it: &Item| match it {
            Item::Child(_) => Some(1u64),
            Item::Hidden(h) => *h,
        };
        // true rank from the left and from the right (None once infinite)
        let mut left = vec![Some(0u64); items.len()];
        let mut acc = Some(0u64);
        for (j, it) in items.iter().enumerate() {
            left[j] = acc;
            acc = acc.and_then(|a| width(it).map(|w| a + w));
        }
        let mut right = vec![Some(0u64); items.len()];
        let mut acc = Some(0u64);
        for (j, it) in items.iter().enumerate().rev() {
            right[j] = acc;
            acc = acc.and_then(|a| width(it).map(|w| a + w));
        }
        let near = |x: Option<u64>| matches!(x, Some(v) if v < r64);
        let mut kept = Vec::new();
        let mut run: Option<Option<u64>> = None;
        for (j, it) in items.iter().enumerate() {
            let keep = match it {
                Item::Child(_) => match kind {
                    BallKind::Full => true,
                    BallKind::Left => near(left[j]),
                    BallKind::LeftRight => near(left[j]) || near(right[j]),
                    BallKind::Looptree => hu % 2 == 0 || near(left[j]) || near(right[j]),
                },
                Item::Hidden(_) => false,
            };
            match (keep, it) {
                (true, Item::Child(c)) => {
                    if let Some(h) = run.take() {
                        gaps.push(Gap {
                            vertex: id,
                            at: kept.len() as u32,
                            hidden: h,
                        });
                    }
                    kept.push(*c);
                }
                _ => {
                    let w = width(it);
                    run = Some(match run {
                        None => w,
                        Some(h) => h.and_then(|a| w.map(|b| a + b)),
                    });
                }
            }
        }
        if let Some(h) = run {
            gaps.push(Gap {
                vertex: id,
                at: kept.len() as u32,
                hidden: h,
            });
        }
        counts.push(kept.len() as u64);
        for &c in kept.iter().rev() {
            stack.push((c, hu + 1));
        }
    }
    PartialTree {
        tree: PlaneTree::from_child_counts(&counts).expect("ball of a tree is a tree"),
        gaps,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BallKind {
    /// B_R: all vertices of height at most 2R.
    Full,
    /// B^←_R.
    Left,
    /// B^↔_R.
    LeftRight,
    /// B^↔_R on black vertices only, see [`looptree_ball`].
    Looptree,
}

/// The topmost spine vertex of a condensation tree, of infinite degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Condensation {
    pub vertex: u32,
    /// Visible children on each side.
    pub visible: u32,
}

/// A ball of an infinite two-type tree, grown to height 2R.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpineBall {
    pub ball: PartialTree,
    /// Root-to-tip path, as far as it is visible.
    pub spine: Vec<u32>,
    pub condensation: Option<Condensation>,
    pub radius: usize,
    pub kind: BallKind,
}

impl SpineBall {
    pub fn tree(&self) -> &PlaneTree {
        &self.ball.tree
    }

    /// A smaller ball of the same kind.
    pub fn shrink(&self, r: usize) -> Result<PartialTree> {
        if r > self.radius {
            return Err(Error::HorizonExceeded);
        }
        Ok(match self.kind {
            kind => keep_ranked(&self.ball, r, kind),
        })
    }
}

/// Builder of a ball: vertices are appended with their final child lists.
struct BallBuilder {
    children: Vec<Vec<u32>>,
    gaps: Vec<Gap>,
    nodes: usize,
    cap: usize,
}

impl BallBuilder {
    fn new(cap: usize) -> Self {
        BallBuilder {
            children: vec![Vec::new()],
            gaps: Vec::new(),
            nodes: 1,
            cap,
        }
    }

    fn add(&mut self) -> Result<u32> {
        if self.nodes >= self.cap {
            return Err(Error::CapExceeded);
        }
        self.children.push(Vec::new());
        self.nodes += 1;
        Ok((self.nodes - 1) as u32)
    }

    /// Which children ranks of a vertex with k children are materialized.
    fn visible(k: u64, r: usize, kind: BallKind, black: bool) -> Vec<u64> {
        let r = r as u64;
        match kind {
            BallKind::Full => (0..k).collect(),
            BallKind::Left => (0..k.min(r)).collect(),
            BallKind::Looptree if !black => (0..k).collect(),
            BallKind::LeftRight | BallKind::Looptree => {
                if k <= 2 * r {
                    (0..k).collect()
                } else {
                    (0..r).chain(k - r..k).collect()
                }
            }
        }
    }

    /// Attach the visible children of u given its degree k, recording the
    /// hidden run; returns (rank, id) of the materialized children.
    fn expand(&mut self, u: u32, k: Option<u64>, r: usize, kind: BallKind, black: bool) -> Result<Vec<(u64, u32)>> {
        let two_sided = matches!(kind, BallKind::LeftRight | BallKind::Looptree);
        let ranks: Vec<u64> = match k {
            Some(k) => Self::visible(k, r, kind, black),
            None => {
                // infinite degree: R first (and R last)
                let r64 = r as u64;
                (0..r64).chain(if two_sided {
                    (u64::MAX - r64..u64::MAX).collect::<Vec<_>>()
                } else {
                    Vec::new()
                })
                .collect()
            }
        };
        let mut out = Vec::with_capacity(ranks.len());
        let mut prev: Option<u64> = None;
        for (j, &rk) in ranks.iter().enumerate() {
            let lo = prev.map_or(0, |p| p + 1);
            if rk > lo {
                let hidden = if k.is_none() { None } else { Some(rk - lo) };
                self.gaps.push(Gap {
                    vertex: u,
                    at: j as u32,
                    hidden,
                });
            }
            let id = self.add()?;
            self.children[u as usize].push(id);
            out.push((rk, id));
            prev = Some(rk);
        }
        let end = k.unwrap_or(u64::MAX);
        let lo = prev.map_or(0, |p| p + 1);
        if end > lo && k.is_some() {
            self.gaps.push(Gap {
                vertex: u,
                at: ranks.len() as u32,
                hidden: Some(end - lo),
            });
        }
        if k.is_none() && !two_sided {
            self.gaps.push(Gap {
                vertex: u,
                at: ranks.len() as u32,
                hidden: None,
            });
        }
        Ok(out)
    }

    /// Grow an independent GW(white, black) subtree below u (at height h)
    /// down to height `depth`.
    #[allow(clippy::too_many_arguments)]
    fn grow_gw(
        &mut self,
        u: u32,
        h: usize,
        depth: usize,
        r: usize,
        kind: BallKind,
        white: &DiscreteSampler,
        black: &DiscreteSampler,
        rng: &mut Stream,
    ) -> Result<()> {
        let mut stack = vec![(u, h)];
        while let Some((v, hv)) = stack.pop() {
            let k = if hv % 2 == 0 {
                white.sample(rng)
            } else {
                black.sample(rng)
            };
            if hv >= depth {
                if k > 0 {
                    self.gaps.push(Gap {
                        vertex: v,
                        at: 0,
                        hidden: Some(k),
                    });
                }
                continue;
            }
            let kids = self.expand(v, Some(k), r, kind, hv % 2 == 1)?;
            for &(_, c) in kids.iter().rev() {
                stack.push((c, hv + 1));
            }
        }
        Ok(())
    }

    fn finish(self) -> Result<PartialTree> {
        let tree = PlaneTree::from_children(self.children)?;
        Ok(PartialTree {
            tree,
            gaps: self.gaps,
        })
    }
}

/// Size-biased samplers of the two laws and the criticality check.
fn biased(white: &DiscreteLaw, black: &DiscreteLaw) -> Result<(f64, DiscreteSampler, DiscreteSampler)> {
    let (mw, mb) = (white.mean(), black.mean());
    let bw = size_bias(white, Some(mw))?.sampler()?;
    let bb = size_bias(black, Some(mb))?.sampler()?;
    Ok((mw * mb, bw, bb))
}

/// Tolerance on m_{ν∘} m_{ν•} = 1.
pub const CRITICAL_TOL: f64 = 1e-6;

/// B_R of the Kesten tree T_∞^{∘,•}: spine vertices draw from the
/// size-biased laws with a uniform spine child, other vertices are GW.
/// The tree is grown to height 2R.
#[allow(clippy::too_many_arguments)]
pub fn sample_kesten_ball(
    white: &DiscreteLaw,
    black: &DiscreteLaw,
    m_product: Option<f64>,
    r: usize,
    kind: BallKind,
    rng: &mut Stream,
    cap: usize,
) -> Result<SpineBall> {
    let (m, bw, bb) = biased(white, black)?;
    let m = m_product.unwrap_or(m);
    if (m - 1.0).abs() > CRITICAL_TOL {
        return Err(Error::NotCritical(m));
    }
    let ws = white.sampler()?;
    let bs = black.sampler()?;
    let depth = 2 * r;
    let mut b = BallBuilder::new(cap);
    let mut spine = vec![0u32];
    let mut u = 0u32;
    let mut h = 0usize;
    while h < depth {
        let k = if h % 2 == 0 { bw.sample(rng) } else { bb.sample(rng) };
        let j = rng.below(k.max(1));
        let kids = b.expand(u, Some(k), r, kind, h % 2 == 1)?;
        let mut next = None;
        for &(rk, c) in &kids {
            if rk == j {
                next = Some(c);
            } else {
                b.grow_gw(c, h + 1, depth, r, kind, &ws, &bs, rng)?;
            }
        }
        match next {
            Some(c) => {
                spine.push(c);
                u = c;
                h += 1;
            }
            // the spine continues through a hidden child
            None => break,
        }
    }
    if h == depth && depth > 0 {
        // children of the tip are beyond the horizon
        let k = if h % 2 == 0 { bw.sample(rng) } else { bb.sample(rng) };
        b.gaps.push(Gap {
            vertex: u,
            at: 0,
            hidden: Some(k),
        });
    }
    let ball = b.finish()?;
    Ok(SpineBall {
        ball,
        spine,
        condensation: None,
        radius: r,
        kind,
    })
}

/// B_R of the condensation tree of a subcritical pair with geometric ν∘:
/// a spine of 2L' vertices, P(L' = k) = (1 - m)m^{k-1} with m = m∘ m•,
/// whose top (black) vertex has infinitely many children, R on each side
/// visible for [`BallKind::LeftRight`].
#[allow(clippy::too_many_arguments)]
pub fn sample_condensation_ball(
    white: &DiscreteLaw,
    black: &DiscreteLaw,
    m_product: Option<f64>,
    r: usize,
    kind: BallKind,
    rng: &mut Stream,
    cap: usize,
) -> Result<SpineBall> {
    let (m, bw, bb) = biased(white, black)?;
    let m = m_product.unwrap_or(m);
    if m >= 1.0 - CRITICAL_TOL {
        return Err(Error::NotSubcritical(m));
    }
    if !white_is_geometric(white) {
        return Err(Error::Invalid("condensation needs a geometric white law"));
    }
    let ws = white.sampler()?;
    let bs = black.sampler()?;
    let l = sample_spine_length(m, rng);
    let top = 2 * l - 1;
    let depth = 2 * r;
    let mut b = BallBuilder::new(cap);
    let mut spine = vec![0u32];
    let mut u = 0u32;
    let mut h = 0usize;
    let mut condensation = None;
    while h < depth {
        if h == top {
            condensation = Some(Condensation {
                vertex: u,
                visible: r as u32,
            });
            let kids = b.expand(u, None, r, kind, true)?;
            for &(_, c) in &kids {
                b.grow_gw(c, h + 1, depth, r, kind, &ws, &bs, rng)?;
            }
            break;
        }
        let k = if h % 2 == 0 { bw.sample(rng) } else { bb.sample(rng) };
        let j = rng.below(k.max(1));
        let kids = b.expand(u, Some(k), r, kind, h % 2 == 1)?;
        let mut next = None;
        for &(rk, c) in &kids {
            if rk == j {
                next = Some(c);
            } else {
                b.grow_gw(c, h + 1, depth, r, kind, &ws, &bs, rng)?;
            }
        }
        match next {
            Some(c) => {
                spine.push(c);
                u = c;
                h += 1;
            }
            None => break,
        }
    }
    if h == depth && depth > 0 && condensation.is_none() {
        b.gaps.push(Gap {
            vertex: u,
            at: 0,
            hidden: Some(if h % 2 == 0 { bw.sample(rng) } else { bb.sample(rng) }),
        });
    }
    let ball = b.finish()?;
    Ok(SpineBall {
        ball,
        spine,
        condensation,
        radius: r,
        kind,
    })
}

/// L' with P(L' = k) = (1 - m) m^{k-1}, k >= 1.
pub fn sample_spine_length(m: f64, rng: &mut Stream) -> usize {
    if m <= 0.0 {
        return 1;
    }
    let u = rng.uniform();
    1 + libm::floor(libm::log(u) / libm::log(m)) as usize
}

fn white_is_geometric(law: &DiscreteLaw) -> bool {
    let h = &law.head;
    if h.len() < 3 || h[0] <= 0.0 {
        return matches!(law.tail, Some(t) if matches!(t.kind, TailKind::FiniteVariance { .. }));
    }
    let p = h[1] / h[0];
    h.windows(2).all(|w| (w[1] - p * w[0]).abs() <= 1e-12 * w[0].max(1e-300))
}
