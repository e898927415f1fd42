//! Combinatorial maps and looptrees.
//!
//! A map is stored as a rotation σ on half-edges (next half-edge
//! counterclockwise around the origin) with the edge involution
//! α(h) = h ^ 1. The face to the right of h is the orbit of φ = σ ∘ α.
//! The root face lies to the right of the root half-edge.

use alloc::collections::VecDeque;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::error::{Error, Result};
use crate::trees::{PartialTree, PlaneTree};

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CombMap {
    sigma: Vec<u32>,
    origin: Vec<u32>,
    nv: usize,
    root: u32,
}

impl CombMap {
    /// The vertex map †.
    pub fn vertex() -> Self {
        CombMap {
            sigma: Vec::new(),
            origin: Vec::new(),
            nv: 1,
            root: NONE,
        }
    }

    /// One edge between two vertices.
    pub fn edge() -> Self {
        CombMap {
            sigma: vec![0, 1],
            origin: vec![0, 1],
            nv: 2,
            root: 0,
        }
    }

    /// From a rotation; half-edges 2e and 2e + 1 form edge e.
    pub fn from_rotation(sigma: Vec<u32>, root: u32) -> Result<Self> {
        let n = sigma.len();
        if n == 0 {
            return Ok(Self::vertex());
        }
        if n % 2 == 1 || root as usize >= n {
            return Err(Error::Invalid("half-edges must pair up"));
        }
        let mut seen = vec![false; n];
        for &s in &sigma {
            if s as usize >= n || seen[s as usize] {
                return Err(Error::Invalid("rotation is not a permutation"));
            }
            seen[s as usize] = true;
        }
        let mut origin = vec![NONE; n];
        let mut nv = 0;
        for h in 0..n {
            if origin[h] != NONE {
                continue;
            }
            let mut g = h;
            loop {
                origin[g] = nv as u32;
                g = sigma[g] as usize;
                if g == h {
                    break;
                }
            }
            nv += 1;
        }
        let m = CombMap {
            sigma,
            origin,
            nv,
            root,
        };
        if !m.is_connected() {
            return Err(Error::Invalid("map is not connected"));
        }
        Ok(m)
    }

    pub fn half_edges(&self) -> usize {
        self.sigma.len()
    }

    pub fn vertices(&self) -> usize {
        self.nv
    }

    pub fn edges(&self) -> usize {
        self.sigma.len() / 2
    }

    pub fn is_vertex_map(&self) -> bool {
        self.sigma.is_empty()
    }

    /// Root half-edge, `None` for †.
    pub fn root(&self) -> Option<usize> {
        (self.root != NONE).then_some(self.root as usize)
    }

    pub fn root_vertex(&self) -> usize {
        self.root().map_or(0, |h| self.origin[h] as usize)
    }

    pub fn sigma(&self, h: usize) -> usize {
        self.sigma[h] as usize
    }

    pub fn alpha(&self, h: usize) -> usize {
        h ^ 1
    }

    /// Next half-edge along the face on the right.
    pub fn phi(&self, h: usize) -> usize {
        self.sigma[h ^ 1] as usize
    }

    pub fn origin(&self, h: usize) -> usize {
        self.origin[h] as usize
    }

    pub fn target(&self, h: usize) -> usize {
        self.origin[h ^ 1] as usize
    }

    /// Face index of every half-edge (the face on its right) and the count.
    pub fn faces(&self) -> (Vec<u32>, usize) {
        let n = self.sigma.len();
        let mut f = vec![NONE; n];
        let mut nf = 0;
        for h in 0..n {
            if f[h] != NONE {
                continue;
            }
            let mut g = h;
            loop {
                f[g] = nf as u32;
                g = self.phi(g);
                if g == h {
                    break;
                }
            }
            nf += 1;
        }
        (f, nf.max(usize::from(n == 0)))
    }

    pub fn face_count(&self) -> usize {
        self.faces().1
    }

    /// Half-edges of the face right of h, starting at h.
    pub fn face_of(&self, h: usize) -> Vec<u32> {
        let mut out = vec![h as u32];
        let mut g = self.phi(h);
        while g != h {
            out.push(g as u32);
            g = self.phi(g);
        }
        out
    }

    /// Contour of the root face from the root half-edge.
    pub fn root_contour(&self) -> Vec<u32> {
        self.root().map_or_else(Vec::new, |r| self.face_of(r))
    }

    /// #∂m.
    pub fn perimeter(&self) -> usize {
        self.root_contour().len()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.nv as i64 - self.edges() as i64 + self.face_count() as i64
    }

    pub fn is_planar(&self) -> bool {
        self.euler_characteristic() == 2
    }

    pub fn is_bipartite(&self) -> bool {
        let (f, nf) = self.faces();
        let mut deg = vec![0usize; nf];
        for &x in &f {
            deg[x as usize] += 1;
        }
        deg.iter().all(|d| d % 2 == 0)
    }

    /// Degrees of all faces, the root face first.
    pub fn face_degrees(&self) -> Vec<usize> {
        let (f, nf) = self.faces();
        let mut deg = vec![0usize; nf];
        for &x in &f {
            deg[x as usize] += 1;
        }
        if let Some(r) = self.root() {
            deg.swap(0, f[r] as usize);
        }
        deg
    }

    fn is_connected(&self) -> bool {
        if self.sigma.is_empty() {
            return true;
        }
        let d = self.distances_from(self.root_vertex());
        d.iter().all(|&x| x != NONE)
    }

    /// Half-edges out of each vertex in rotation order.
    pub fn rotations(&self) -> Vec<Vec<u32>> {
        let mut rot = vec![Vec::new(); self.nv];
        let mut done = vec![false; self.sigma.len()];
        for h in 0..self.sigma.len() {
            if done[h] {
                continue;
            }
            let v = self.origin[h] as usize;
            let mut g = h;
            loop {
                done[g] = true;
                rot[v].push(g as u32);
                g = self.sigma[g] as usize;
                if g == h {
                    break;
                }
            }
        }
        rot
    }

    /// Graph distances from v (`u32::MAX` if unreachable).
    pub fn distances_from(&self, v: usize) -> Vec<u32> {
        let adj = self.adjacency();
        bfs(&adj, v)
    }

    fn adjacency(&self) -> Adjacency {
        let mut start = vec![0u32; self.nv + 1];
        for &o in &self.origin {
            start[o as usize + 1] += 1;
        }
        for i in 0..self.nv {
            start[i + 1] += start[i];
        }
        let mut fill = start.clone();
        let mut nbr = vec![0u32; self.sigma.len()];
        for h in 0..self.sigma.len() {
            let o = self.origin[h] as usize;
            nbr[fill[o] as usize] = self.origin[h ^ 1];
            fill[o] += 1;
        }
        Adjacency { start, nbr }
    }

    /// Insert an edge from origin(a) to origin(b), placed just after a and
    /// just after b in the rotations; the new edge's first half-edge leaves
    /// origin(a). The root is unchanged.
    pub fn insert_edge(&self, a: usize, b: usize) -> CombMap {
        let n = self.sigma.len() as u32;
        let mut sigma = self.sigma.clone();
        sigma.push(0);
        sigma.push(0);
        let (x, y) = (n, n + 1);
        if a == b {
            // a loop: x then y after a
            sigma[x as usize] = y;
            sigma[y as usize] = self.sigma[a];
            sigma[a] = x;
        } else {
            sigma[x as usize] = self.sigma[a];
            sigma[a] = x;
            sigma[y as usize] = self.sigma[b];
            sigma[b] = y;
        }
        CombMap::from_rotation(sigma, self.root).expect("inserting an edge keeps the map valid")
    }

    /// The submap on `keep` (closed under α) with the rotation restricted.
    fn restrict(&self, keep: &[bool], root: usize) -> CombMap {
        let n = self.sigma.len();
        let mut new = vec![NONE; n];
        let mut k = 0u32;
        for e in 0..n / 2 {
            if keep[2 * e] {
                debug_assert!(keep[2 * e + 1]);
                new[2 * e] = k;
                new[2 * e + 1] = k + 1;
                k += 2;
            }
        }
        if k == 0 {
            return CombMap::vertex();
        }
        let mut sigma = vec![0u32; k as usize];
        for h in 0..n {
            if new[h] == NONE {
                continue;
            }
            let mut g = self.sigma[h] as usize;
            while new[g] == NONE {
                g = self.sigma[g] as usize;
            }
            sigma[new[h] as usize] = new[g];
        }
        CombMap::from_rotation(sigma, new[root]).expect("restriction of a connected piece")
    }

    /// Induced submap on the vertices at distance at most r from the root
    /// vertex; † for r = 0.
    pub fn ball(&self, r: usize) -> CombMap {
        let Some(root) = self.root() else {
            return CombMap::vertex();
        };
        if r == 0 {
            return CombMap::vertex();
        }
        let d = self.distances_from(self.origin(root));
        let inside = |v: u32| d[v as usize] != NONE && d[v as usize] as usize <= r;
        let keep: Vec<bool> = (0..self.sigma.len())
            .map(|h| inside(self.origin[h]) && inside(self.origin[h ^ 1]))
            .collect();
        self.restrict(&keep, root)
    }

    /// Relabel half-edges in canonical breadth-first order.
    pub fn canonical(&self) -> CombMap {
        let Some(root) = self.root() else {
            return CombMap::vertex();
        };
        let label = self.bfs_labels(root);
        let n = self.sigma.len();
        let mut sigma = vec![0u32; n];
        for h in 0..n {
            sigma[label[h] as usize] = label[self.sigma[h] as usize];
        }
        // labels pair twins as 2e, 2e + 1 by construction
        CombMap::from_rotation(sigma, 0).expect("relabelling keeps the map valid")
    }

    /// Labels in discovery order: each half-edge is discovered with its
    /// twin, then the queue explores rotations.
    fn bfs_labels(&self, root: usize) -> Vec<u32> {
        let n = self.sigma.len();
        let mut label = vec![NONE; n];
        let mut next = 0u32;
        let mut queue = VecDeque::new();
        let mut visit = |h: usize, label: &mut Vec<u32>, queue: &mut VecDeque<usize>| {
            if label[h] == NONE {
                label[h] = next;
                label[h ^ 1] = next + 1;
                next += 2;
                queue.push_back(h);
                queue.push_back(h ^ 1);
            }
        };
        visit(root, &mut label, &mut queue);
        while let Some(h) = queue.pop_front() {
            visit(self.sigma[h] as usize, &mut label, &mut queue);
        }
        label
    }
}

struct Adjacency {
    start: Vec<u32>,
    nbr: Vec<u32>,
}

fn bfs(adj: &Adjacency, v: usize) -> Vec<u32> {
    let nv = adj.start.len() - 1;
    let mut d = vec![NONE; nv.max(1)];
    d[v] = 0;
    let mut queue = VecDeque::new();
    queue.push_back(v as u32);
    while let Some(u) = queue.pop_front() {
        let u = u as usize;
        for &w in &adj.nbr[adj.start[u] as usize..adj.start[u + 1] as usize] {
            if d[w as usize] == NONE {
                d[w as usize] = d[u] + 1;
                queue.push_back(w);
            }
        }
    }
    d
}

/// Canonical byte code of a rooted map: LEB128 tokens, first the number of
/// half-edges, then σ of every half-edge in canonical order. α is implied
/// by the pairing 2e, 2e + 1. Equal codes iff root-preserving isomorphic.
pub fn canonical_code(m: &CombMap) -> Vec<u8> {
    let c = m.canonical();
    let mut out = Vec::with_capacity(c.sigma.len() * 2 + 2);
    leb128(&mut out, c.sigma.len() as u64);
    for &s in &c.sigma {
        leb128(&mut out, s as u64);
    }
    out
}

fn leb128(out: &mut Vec<u8>, mut x: u64) {
    loop {
        let b = (x & 0x7f) as u8;
        x >>= 7;
        if x == 0 {
            out.push(b);
            return;
        }
        out.push(b | 0x80);
    }
}

/// Polygons (apex, members) glued along a tree: a looptree. Vertex v sits
/// in at most one polygon as a member; its rotation is that wedge followed
/// by the wedges of its apex polygons, last to first. The root is the
/// half-edge from the root vertex to the last member of its first polygon.
fn looptree(nv: usize, polys: &[(u32, Vec<u32>)], root_vertex: u32) -> CombMap {
    if polys.is_empty() {
        return CombMap::vertex();
    }
    let mut base = Vec::with_capacity(polys.len());
    let mut n = 0u32;
    for (_, members) in polys {
        base.push(n);
        n += 2 * (members.len() as u32 + 1);
    }
    // (to prev, to next) of the wedge at position i of polygon j
    let wedge = |j: usize, i: usize| -> (u32, u32) {
        let k = polys[j].1.len();
        let b = base[j];
        let prev = if i == 0 { b + 2 * k as u32 + 1 } else { b + 2 * (i as u32 - 1) + 1 };
        (prev, b + 2 * i as u32)
    };
    let mut member = vec![None; nv];
    let mut apex: Vec<Vec<usize>> = vec![Vec::new(); nv];
    for (j, (a, members)) in polys.iter().enumerate() {
        apex[*a as usize].push(j);
        for (i, &w) in members.iter().enumerate() {
            member[w as usize] = Some((j, i + 1));
        }
    }
    let mut sigma = vec![0u32; n as usize];
    for v in 0..nv {
        let mut rot = Vec::new();
        if let Some((j, i)) = member[v] {
            let (p, q) = wedge(j, i);
            rot.push(p);
            rot.push(q);
        }
        for &j in apex[v].iter().rev() {
            let (p, q) = wedge(j, 0);
            rot.push(p);
            rot.push(q);
        }
        for i in 0..rot.len() {
            sigma[rot[i] as usize] = rot[(i + 1) % rot.len()];
        }
    }
    let first = apex[root_vertex as usize][0];
    let root = wedge(first, 0).0;
    let m = CombMap::from_rotation(sigma, root).expect("looptree construction");
    debug_assert!(m.is_planar());
    m
}

/// The 2p-gon rooted with its outer face on the right.
pub fn polygon(p: usize) -> Result<CombMap> {
    if p == 0 {
        return Err(Error::Invalid("polygon needs p >= 1"));
    }
    let members = (1..2 * p as u32).collect();
    Ok(looptree(2 * p, &[(0, members)], 0))
}

/// Loop(t): one polygon per black vertex through its parent and children.
pub fn loop_of_tree(t: &PlaneTree) -> Result<CombMap> {
    let h = t.heights();
    let mut id = vec![NONE; t.len()];
    let mut nv = 0u32;
    for u in t.preorder() {
        if h[u as usize] % 2 == 0 {
            id[u as usize] = nv;
            nv += 1;
        }
    }
    let mut polys = Vec::new();
    for b in t.preorder() {
        let b = b as usize;
        if h[b] % 2 == 0 {
            continue;
        }
        if t.outdegree(b) % 2 == 0 {
            return Err(Error::OddLoop);
        }
        let p = t.parent(b).expect("black vertices have parents");
        let members = t.children(b).iter().map(|&w| id[w as usize]).collect();
        polys.push((id[p], members));
    }
    Ok(looptree(nv as usize, &polys, id[t.root()]))
}

/// Loop of a ball of a tree: hidden runs of children become paths of
/// min(h + 1, 2r + 2) edges, long enough not to shorten any distance seen
/// by the radius-r ball of the root. Gaps on white vertices are dropped.
pub fn loop_of_partial(pt: &PartialTree, r: usize) -> Result<CombMap> {
    let t = &pt.tree;
    let h = t.heights();
    let mut id = vec![NONE; t.len()];
    let mut nv = 0u32;
    for u in t.preorder() {
        if h[u as usize] % 2 == 0 {
            id[u as usize] = nv;
            nv += 1;
        }
    }
    let long = 2 * r as u64 + 2;
    let mut polys = Vec::new();
    for b in t.preorder() {
        let b = b as usize;
        if h[b] % 2 == 0 {
            continue;
        }
        let gaps: Vec<_> = pt.gaps.iter().filter(|g| g.vertex as usize == b).collect();
        if gaps.is_empty() && t.outdegree(b) % 2 == 0 {
            return Err(Error::OddLoop);
        }
        let p = t.parent(b).expect("black vertices have parents");
        let cs = t.children(b);
        let mut members = Vec::new();
        for i in 0..=cs.len() {
            for g in gaps.iter().filter(|g| g.at as usize == i) {
                let edges = g.hidden.map_or(long, |x| (x + 1).min(long));
                for _ in 1..edges {
                    members.push(nv);
                    nv += 1;
                }
            }
            if i < cs.len() {
                members.push(id[cs[i] as usize]);
            }
        }
        polys.push((id[p], members));
    }
    Ok(looptree(nv as usize, &polys, id[t.root()]))
}

/// Loop-bold(t): every vertex with children gets the polygon through
/// itself and its children, rooted from the root to its last child.
pub fn loop_bold(t: &PlaneTree) -> CombMap {
    let order = t.preorder();
    let mut id = vec![0u32; t.len()];
    for (i, &u) in order.iter().enumerate() {
        id[u as usize] = i as u32;
    }
    let polys: Vec<(u32, Vec<u32>)> = order
        .iter()
        .filter(|&&u| !t.is_leaf(u as usize))
        .map(|&u| {
            let u = u as usize;
            (id[u], t.children(u).iter().map(|&c| id[c as usize]).collect())
        })
        .collect();
    looptree(t.len(), &polys, id[t.root()])
}

/// LoopBar(t): Loop-bold(t) with the edges from each vertex to its last
/// child contracted, rooted at the half-edge from the last child of the
/// root to the child before it (a loop when the root has one child).
pub fn loop_bar(t: &PlaneTree) -> CombMap {
    if t.len() == 1 {
        return CombMap::vertex();
    }
    let lb = loop_bold(t);
    let n = lb.half_edges();
    // the edge (u, last child) of u's polygon is its last edge, whose
    // half-edges close the polygon's block in the looptree layout
    let mut contract = vec![false; n];
    let mut base = 0usize;
    for &u in &t.preorder() {
        let k = t.outdegree(u as usize);
        if k == 0 {
            continue;
        }
        contract[base + 2 * k] = true;
        contract[base + 2 * k + 1] = true;
        base += 2 * (k + 1);
    }
    let mut sigma = lb.sigma.clone();
    let mut inv = vec![0u32; n];
    for h in 0..n {
        inv[sigma[h] as usize] = h as u32;
    }
    for h in (0..n).step_by(2) {
        if !contract[h] {
            continue;
        }
        let (a, b) = (h as u32, h as u32 + 1);
        let (pa, na) = (inv[a as usize], sigma[a as usize]);
        let (pb, nb) = (inv[b as usize], sigma[b as usize]);
        let link = |x: u32, y: u32, sigma: &mut Vec<u32>, inv: &mut Vec<u32>| {
            sigma[x as usize] = y;
            inv[y as usize] = x;
        };
        if na == a && nb == b {
            continue;
        } else if na == a {
            link(pb, nb, &mut sigma, &mut inv);
        } else if nb == b {
            link(pa, na, &mut sigma, &mut inv);
        } else {
            link(pa, nb, &mut sigma, &mut inv);
            link(pb, na, &mut sigma, &mut inv);
        }
    }
    // the root polygon comes first; its edge from the last child back to
    // the previous member leaves the merged root vertex
    let r = 2 * t.outdegree(t.root()) - 1;
    let mut new = vec![NONE; n];
    let mut k = 0u32;
    for h in 0..n {
        if !contract[h] {
            new[h] = k;
            k += 1;
        }
    }
    let s: Vec<u32> = (0..n).filter(|&h| !contract[h]).map(|h| new[sigma[h] as usize]).collect();
    CombMap::from_rotation(s, new[r]).expect("contraction keeps the map valid")
}

/// A plane tree drawn as a map with a single face; the rotation at a vertex
/// is its parent, then its children last to first, and the root half-edge
/// goes from the root to its first child.
pub fn plane_tree_map(t: &PlaneTree) -> CombMap {
    if t.len() == 1 {
        return CombMap::vertex();
    }
    let order = t.preorder();
    let mut id = vec![0u32; t.len()];
    for (i, &u) in order.iter().enumerate() {
        id[u as usize] = i as u32;
    }
    // edge to child c (labelled id[c] - 1): 2e leaves the parent
    let n = 2 * (t.len() - 1);
    let mut sigma = vec![0u32; n];
    for &u in &order {
        let u = u as usize;
        let mut rot = Vec::new();
        if t.parent(u).is_some() {
            rot.push(2 * (id[u] - 1) + 1);
        }
        for &c in t.children(u).iter().rev() {
            rot.push(2 * (id[c as usize] - 1));
        }
        for i in 0..rot.len() {
            sigma[rot[i] as usize] = rot[(i + 1) % rot.len()];
        }
    }
    let first = t.children(t.root())[0];
    CombMap::from_rotation(sigma, 2 * (id[first as usize] - 1)).expect("tree map")
}

/// Tree of components read off the root-face contour.
struct Decomposition {
    /// Built with arena labels: whites first by first visit, then blacks.
    tree: PlaneTree,
    /// Contour half-edges of each black's component, from its root.
    cycles: Vec<Vec<u32>>,
    /// Map vertex of each white tree vertex.
    white_vertex: Vec<u32>,
}

fn decompose(m: &CombMap) -> Result<Decomposition> {
    let Some(root) = m.root() else {
        return Ok(Decomposition {
            tree: PlaneTree::single(),
            cycles: vec![Vec::new()],
            white_vertex: vec![0],
        });
    };
    let contour = m.face_of(root);
    let mut white = vec![NONE; m.vertices()];
    let mut white_vertex = Vec::new();
    let mut pos = vec![NONE; m.vertices()];
    let mut closed = vec![false; m.vertices()];
    let v0 = m.origin(root);
    white[v0] = 0;
    white_vertex.push(v0 as u32);
    let mut vstack = vec![v0 as u32];
    pos[v0] = 0;
    let mut estack: Vec<u32> = Vec::new();
    // (apex, members in contour order, contour half-edges)
    let mut comps: Vec<(u32, Vec<u32>, Vec<u32>)> = Vec::new();
    for &h in &contour {
        let w = m.target(h as usize);
        estack.push(h);
        if closed[w] {
            return Err(Error::NonSimpleComponent);
        }
        if pos[w] != NONE {
            let d = pos[w] as usize;
            let members: Vec<u32> = vstack[d + 1..].to_vec();
            let edges: Vec<u32> = estack[d..].to_vec();
            for &x in &members {
                pos[x as usize] = NONE;
                closed[x as usize] = true;
            }
            comps.push((vstack[d], members, edges));
            vstack.truncate(d + 1);
            estack.truncate(d);
        } else {
            pos[w] = vstack.len() as u32;
            vstack.push(w as u32);
            if white[w] == NONE {
                white[w] = white_vertex.len() as u32;
                white_vertex.push(w as u32);
            }
        }
    }
    if vstack.len() != 1 || !estack.is_empty() {
        return Err(Error::NonSimpleComponent);
    }
    let nw = white_vertex.len();
    let n = nw + comps.len();
    let mut children: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut cycles = vec![Vec::new(); n];
    // components open in the order of their first contour edge
    let mut by_open: Vec<usize> = (0..comps.len()).collect();
    by_open.sort_by_key(|&c| {
        let first = comps[c].2[0];
        contour.iter().position(|&h| h == first).unwrap_or(usize::MAX)
    });
    let mut at_apex: Vec<Vec<u32>> = vec![Vec::new(); nw];
    for &c in &by_open {
        let (a, members, edges) = &comps[c];
        let b = (nw + c) as u32;
        at_apex[white[*a as usize] as usize].push(b);
        children[b as usize] = members.iter().rev().map(|&v| white[v as usize]).collect();
        cycles[b as usize] = edges.clone();
    }
    for (w, list) in at_apex.into_iter().enumerate() {
        children[w] = if w == 0 && !list.is_empty() {
            let mut out = vec![list[0]];
            out.extend(list[1..].iter().rev());
            out
        } else {
            list.into_iter().rev().collect()
        };
    }
    let tree = PlaneTree::from_children(children)?;
    Ok(Decomposition {
        tree,
        cycles,
        white_vertex,
    })
}

/// Tree(l) of a looptree, in depth-first labels.
pub fn tree_of_loop(l: &CombMap) -> Result<PlaneTree> {
    if l.is_vertex_map() {
        return Ok(PlaneTree::single());
    }
    let (f, nf) = l.faces();
    let rf = f[l.root().expect("non-trivial map")];
    for e in 0..l.edges() {
        let (a, b) = (f[2 * e] == rf, f[2 * e + 1] == rf);
        if a == b {
            return Err(Error::NotLooptree);
        }
    }
    let d = decompose(l).map_err(|_| Error::NotLooptree)?;
    // each component must be a single internal face
    let blacks = d.cycles.iter().filter(|c| !c.is_empty()).count();
    if blacks != nf - 1 {
        return Err(Error::NotLooptree);
    }
    for c in d.cycles.iter().filter(|c| !c.is_empty()) {
        let inner = f[c[0] as usize ^ 1];
        if c.iter().any(|&h| f[h as usize ^ 1] != inner) {
            return Err(Error::NotLooptree);
        }
    }
    Ok(d.tree.canonical())
}

/// Scoop(m): the looptree of the tree of components.
pub fn scoop(m: &CombMap) -> Result<CombMap> {
    let d = decompose(m)?;
    loop_of_tree(&d.tree)
}

/// Tree of components, in depth-first labels.
pub fn tree_of_components(m: &CombMap) -> Result<PlaneTree> {
    Ok(decompose(m)?.tree.canonical())
}

/// Tree of components with the simple-boundary map glued in each black
/// vertex (indexed by tree label, `None` for white vertices).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentBundle {
    pub tree: PlaneTree,
    pub components: Vec<Option<CombMap>>,
}

impl ComponentBundle {
    /// Every black vertex filled with the polygon of its degree.
    pub fn polygons(tree: PlaneTree) -> Result<Self> {
        let h = tree.heights();
        let mut components = vec![None; tree.len()];
        for (u, c) in components.iter_mut().enumerate() {
            if h[u] % 2 == 1 {
                let deg = tree.outdegree(u) + 1;
                if deg % 2 == 1 {
                    return Err(Error::OddLoop);
                }
                *c = Some(polygon(deg / 2)?);
            }
        }
        Ok(ComponentBundle { tree, components })
    }

    pub fn perimeter(&self) -> usize {
        self.tree.len() - 1
    }
}

/// Contour vertices of a simple-boundary component from its root, or an
/// error when the boundary repeats a vertex.
fn simple_contour(c: &CombMap) -> Result<Vec<u32>> {
    let contour = c.root_contour();
    let mut seen = vec![false; c.vertices()];
    let mut out = Vec::with_capacity(contour.len());
    for &h in &contour {
        let v = c.origin(h as usize);
        if seen[v] {
            return Err(Error::NonSimpleComponent);
        }
        seen[v] = true;
        out.push(h);
    }
    Ok(out)
}

/// Φ_TC: split a map into its tree of components and components.
pub fn split_components(m: &CombMap) -> Result<ComponentBundle> {
    let d = decompose(m)?;
    let (tree, relabel) = d.tree.canonical_with_map();
    let mut components = vec![None; tree.len()];
    let n = m.half_edges();
    let mut on_contour = vec![false; n];
    for c in &d.cycles {
        for &h in c {
            on_contour[h as usize] = true;
        }
    }
    let (f, _) = m.faces();
    let rf = m.root().map(|r| f[r]);
    for (b, cyc) in d.cycles.iter().enumerate() {
        if cyc.is_empty() {
            continue;
        }
        let mut keep = vec![false; n];
        let mut queue = Vec::new();
        for &h in cyc {
            keep[h as usize] = true;
        }
        for &h in cyc {
            let g = h as usize ^ 1;
            if !keep[g] {
                keep[g] = true;
                queue.push(g);
            }
        }
        // everything reachable through internal faces
        while let Some(g) = queue.pop() {
            if Some(f[g]) == rf {
                return Err(Error::NonSimpleComponent);
            }
            for x in [m.phi(g), m.phi(g) ^ 1] {
                if !keep[x] {
                    keep[x] = true;
                    if !on_contour[x] {
                        queue.push(x);
                    }
                }
            }
        }
        let comp = m.restrict(&keep, cyc[0] as usize);
        if comp.perimeter() != cyc.len() {
            return Err(Error::NonSimpleComponent);
        }
        simple_contour(&comp)?;
        components[relabel[b] as usize] = Some(comp);
    }
    let _ = d.white_vertex;
    Ok(ComponentBundle { tree, components })
}

/// Φ_TC⁻¹: glue the components along the tree. The root edge of the
/// component at black b, with children w_1..w_k and parent p, is glued on
/// p → w_k and its contour runs p, w_k, ..., w_1.
pub fn glue_components(b: &ComponentBundle) -> Result<CombMap> {
    let t = &b.tree;
    let h = t.heights();
    if t.len() == 1 {
        return Ok(CombMap::vertex());
    }
    let mut offset = vec![0u32; t.len()];
    let mut total = 0u32;
    let mut white_id = vec![NONE; t.len()];
    let mut nw = 0u32;
    for u in t.preorder() {
        let u = u as usize;
        if h[u] % 2 == 0 {
            white_id[u] = nw;
            nw += 1;
            continue;
        }
        let c = b.components[u].as_ref().ok_or(Error::Invalid("missing component"))?;
        if c.perimeter() != t.outdegree(u) + 1 {
            return Err(Error::PerimeterMismatch);
        }
        simple_contour(c)?;
        offset[u] = total;
        total += c.half_edges() as u32;
    }
    let mut sigma = vec![NONE; total as usize];
    // fan of each glued vertex: (white, fan) in order of the white's wedges
    let mut parent_fan: Vec<Vec<u32>> = vec![Vec::new(); t.len()];
    let mut child_fans: Vec<Vec<(u32, Vec<u32>)>> = vec![Vec::new(); t.len()];
    for u in t.preorder() {
        let u = u as usize;
        if h[u] % 2 == 0 {
            continue;
        }
        let c = b.components[u].as_ref().expect("checked above");
        let o = offset[u];
        let contour = c.root_contour();
        let k = t.outdegree(u);
        let p = t.parent(u).expect("black has parent");
        let mut corner = vec![false; c.half_edges()];
        for &x in &contour {
            corner[x as usize] = true;
        }
        // rotation inside the component, linearized at the boundary corner
        for (j, &hout) in contour.iter().enumerate() {
            let mut fan = Vec::new();
            let mut g = hout as usize;
            loop {
                fan.push(g as u32 + o);
                g = c.sigma(g);
                if g == hout as usize {
                    break;
                }
            }
            for w in fan.windows(2) {
                sigma[w[0] as usize] = w[1];
            }
            let glued = if j == 0 { p } else { t.children(u)[k - j] as usize };
            if j == 0 {
                child_fans[p].push((u as u32, fan));
            } else {
                parent_fan[glued] = fan;
            }
        }
        // interior vertices keep their rotation
        for x in 0..c.half_edges() {
            if sigma[x + o as usize] == NONE && !on_boundary(c, &corner, x) {
                sigma[x + o as usize] = c.sigma(x) as u32 + o;
            }
        }
    }
    let mut root = NONE;
    for w in t.preorder() {
        let w = w as usize;
        if h[w] % 2 == 1 {
            continue;
        }
        let mut fans: Vec<&Vec<u32>> = Vec::new();
        if t.parent(w).is_some() {
            fans.push(&parent_fan[w]);
        }
        // child components of w, listed in tree order; wedges go last to first
        let kids: Vec<&Vec<u32>> = child_fans[w].iter().map(|(_, f)| f).collect();
        for f in kids.iter().rev() {
            fans.push(f);
        }
        if w == t.root() {
            if let Some((_, f)) = child_fans[w].first() {
                root = f[0];
            }
        }
        let flat: Vec<u32> = fans.iter().flat_map(|f| f.iter().copied()).collect();
        if flat.is_empty() {
            continue;
        }
        for i in 0..flat.len() {
            sigma[flat[i] as usize] = flat[(i + 1) % flat.len()];
        }
    }
    let m = CombMap::from_rotation(sigma, root)?;
    debug_assert!(m.is_planar());
    Ok(m)
}

/// Whether x leaves a boundary vertex of the component.
fn on_boundary(c: &CombMap, corner: &[bool], x: usize) -> bool {
    let v = c.origin(x);
    let mut g = x;
    loop {
        if corner[g] && c.origin(g) == v {
            return true;
        }
        g = c.sigma(g);
        if g == x {
            return false;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricMode {
    /// Diameter of the vertex graph of Scoop(m).
    DiameterBoundary,
    /// Distances from the root vertex of m.
    BfsFromRoot,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub vertices: usize,
    pub edges: usize,
    /// Diameter, or eccentricity of the root vertex for `BfsFromRoot`.
    pub value: u32,
    /// False when `value` is a double-sweep lower bound.
    pub exact: bool,
    /// Mean distance from the root vertex.
    pub mean_root_distance: f64,
}

/// Maps with at most this many vertices get an exact diameter.
pub const EXACT_DIAMETER_LIMIT: usize = 4096;

pub fn graph_metrics(m: &CombMap, mode: MetricMode) -> Result<Metrics> {
    let g = match mode {
        MetricMode::DiameterBoundary => scoop(m)?,
        MetricMode::BfsFromRoot => m.clone(),
    };
    let adj = g.adjacency();
    let d0 = bfs(&adj, g.root_vertex());
    let ecc0 = d0.iter().copied().max().unwrap_or(0);
    let mean = d0.iter().map(|&x| x as f64).sum::<f64>() / d0.len() as f64;
    let (value, exact) = match mode {
        MetricMode::BfsFromRoot => (ecc0, true),
        MetricMode::DiameterBoundary if g.vertices() <= EXACT_DIAMETER_LIMIT => {
            ((0..g.vertices()).map(|v| bfs(&adj, v).into_iter().max().unwrap_or(0)).max().unwrap_or(0), true)
        }
        MetricMode::DiameterBoundary => (double_sweep_of(&adj, g.root_vertex()), false),
    };
    Ok(Metrics {
        vertices: g.vertices(),
        edges: g.edges(),
        value,
        exact,
        mean_root_distance: mean,
    })
}

fn double_sweep_of(adj: &Adjacency, start: usize) -> u32 {
    let d = bfs(adj, start);
    let far = (0..d.len()).max_by_key(|&v| (d[v], core::cmp::Reverse(v))).unwrap_or(0);
    bfs(adj, far).into_iter().max().unwrap_or(0)
}

/// Double-sweep lower bound on the diameter of the vertex graph of m.
pub fn double_sweep_diameter(m: &CombMap) -> u32 {
    double_sweep_of(&m.adjacency(), m.root_vertex())
}

/// Exact diameter of the vertex graph of m.
pub fn exact_diameter(m: &CombMap) -> u32 {
    let adj = m.adjacency();
    (0..m.vertices()).map(|v| bfs(&adj, v).into_iter().max().unwrap_or(0)).max().unwrap_or(0)
}

/// Edge-list text export.
///
/// ```text
/// map <vertices> <edges> <root half-edge or ->
/// v <vertex> <half-edges in counterclockwise order>
/// e <edge> <vertex of 2e> <vertex of 2e+1>
/// ```
///
/// Half-edge 2e leaves the first vertex of edge e and 2e + 1 the second.
/// Each vertex line starts at its smallest half-edge.
pub fn export_edge_list(m: &CombMap) -> String {
    let mut s = String::new();
    let root = m.root().map_or(String::from("-"), |r| alloc::format!("{r}"));
    let _ = writeln!(s, "map {} {} {}", m.vertices(), m.edges(), root);
    for (v, rot) in m.rotations().iter().enumerate() {
        let _ = write!(s, "v {v}");
        let i = rot.iter().enumerate().min_by_key(|(_, &h)| h).map_or(0, |(i, _)| i);
        for j in 0..rot.len() {
            let _ = write!(s, " {}", rot[(i + j) % rot.len()]);
        }
        s.push('\n');
    }
    for e in 0..m.edges() {
        let _ = writeln!(s, "e {e} {} {}", m.origin(2 * e), m.origin(2 * e + 1));
    }
    s
}

/// Parse [`export_edge_list`] output.
pub fn parse_edge_list(text: &str) -> Result<CombMap> {
    let bad = Error::Invalid("malformed edge list");
    let mut lines = text.lines();
    let head: Vec<&str> = lines.next().ok_or(bad.clone())?.split_whitespace().collect();
    if head.len() != 4 || head[0] != "map" {
        return Err(bad);
    }
    let ne: usize = head[2].parse().map_err(|_| bad.clone())?;
    let root = if head[3] == "-" {
        None
    } else {
        Some(head[3].parse::<u32>().map_err(|_| bad.clone())?)
    };
    let mut sigma = vec![NONE; 2 * ne];
    for line in lines {
        let mut it = line.split_whitespace();
        match it.next() {
            Some("v") => {
                let _v = it.next();
                let hs: Vec<u32> = it.map(|x| x.parse().map_err(|_| bad.clone())).collect::<Result<_>>()?;
                for i in 0..hs.len() {
                    let h = hs[i] as usize;
                    if h >= sigma.len() {
                        return Err(bad);
                    }
                    sigma[h] = hs[(i + 1) % hs.len()];
                }
            }
            Some("e") | None => {}
            _ => return Err(bad),
        }
    }
    match root {
        None => Ok(CombMap::vertex()),
        Some(r) => {
            if sigma.contains(&NONE) {
                return Err(bad);
            }
            CombMap::from_rotation(sigma, r)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polygons() {
        let p1 = polygon(1).unwrap();
        assert_eq!((p1.vertices(), p1.edges(), p1.face_count()), (2, 2, 2));
        let p2 = polygon(2).unwrap();
        assert_eq!((p2.vertices(), p2.edges(), p2.face_count()), (4, 4, 2));
        assert_eq!(p2.euler_characteristic(), 2);
    }

    #[test]
    fn insert_chord() {
        let h = polygon(3).unwrap();
        // the internal face f_0..f_5; its corner at origin(f_i) follows α(f_{i-1})
        let f = h.face_of(h.root().unwrap() ^ 1);
        let m = h.insert_edge(f[5] as usize ^ 1, f[2] as usize ^ 1);
        assert!(m.is_planar());
        assert_eq!(m.face_degrees(), vec![6, 4, 4]);
    }
}
