//! Paths in the diagram: finite prefixes and eventually periodic infinite
//! paths, patch decoding, tail equivalence, the Vershik map, the pairing of
//! extremal paths, and the extended relation generated by commutative
//! diagrams together with its translation cocycle.
//!
//! A path is a root vertex followed by vertical edges; edge `k` (0-based)
//! goes from the vertex after `k` edges to the vertex after `k + 1` edges,
//! i.e. it is the generation `k + 2` edge, with label `c * lambda^k`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::Range;

use num_integer::Integer;
use thiserror::Error;

use crate::diagram::{BratteliDiagram, VertexId};
use crate::exactnum::AlgebraicNumber;

pub type EdgeId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PathError {
    #[error("path literal: {0}")]
    Syntax(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("no vertical edge `{0}`")]
    UnknownEdge(String),
    #[error("edge `{0}` is ambiguous; add `#k` with its position")]
    AmbiguousEdge(String),
    #[error("edges {0} and {1} are not composable")]
    NotComposable(usize, usize),
    #[error("root does not match the source of the first edge")]
    RootMismatch,
    #[error("an eventually periodic path needs a nonempty cycle")]
    EmptyCycle,
    #[error("expected an eventually periodic path literal with a `( ... )` cycle")]
    NotPeriodic,
    #[error("prefixes have different lengths")]
    LengthMismatch,
    #[error("horizontal edge does not link the ranges of the two prefixes")]
    IncompatibleHorizontal,
    #[error("extremal path without a partner")]
    UnpairedExtreme,
}

/// A finite path: root vertex plus composable vertical edges.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PathPrefix {
    pub root: VertexId,
    pub edges: Vec<EdgeId>,
}

impl PathPrefix {
    pub fn new(d: &BratteliDiagram, root: VertexId, edges: Vec<EdgeId>) -> Result<Self, PathError> {
        if root >= d.vertex_count() {
            return Err(PathError::UnknownVertex(root.to_string()));
        }
        check_chain(d, Some(root), &edges)?;
        Ok(PathPrefix { root, edges })
    }

    pub fn root_only(root: VertexId) -> Self {
        PathPrefix { root, edges: Vec::new() }
    }

    /// Number of generations, counting the root edge.
    pub fn generations(&self) -> usize {
        self.edges.len() + 1
    }

    pub fn top(&self, d: &BratteliDiagram) -> VertexId {
        self.edges.last().map_or(self.root, |&e| d.vertical(e).range)
    }

    /// The first `m` vertical edges.
    pub fn truncate(&self, m: usize) -> PathPrefix {
        PathPrefix {
            root: self.root,
            edges: self.edges[..m.min(self.edges.len())].to_vec(),
        }
    }

    pub fn is_prefix_of(&self, x: &EventuallyPeriodicPath) -> bool {
        self.root == x.root && self.edges.iter().enumerate().all(|(k, &e)| x.edge(k) == e)
    }
}

fn check_chain(d: &BratteliDiagram, root: Option<VertexId>, edges: &[EdgeId]) -> Result<(), PathError> {
    if let Some(&e) = edges.iter().find(|&&e| e >= d.verticals().len()) {
        return Err(PathError::UnknownEdge(e.to_string()));
    }
    if let (Some(r), Some(&first)) = (root, edges.first()) {
        if d.vertical(first).source != r {
            return Err(PathError::RootMismatch);
        }
    }
    for k in 1..edges.len() {
        if d.vertical(edges[k - 1]).range != d.vertical(edges[k]).source {
            return Err(PathError::NotComposable(k - 1, k));
        }
    }
    Ok(())
}

/// An infinite path `preamble cycle cycle ...`, kept in a canonical form
/// (primitive cycle, shortest preamble) so that structural equality is
/// equality of paths.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EventuallyPeriodicPath {
    root: VertexId,
    preamble: Vec<EdgeId>,
    cycle: Vec<EdgeId>,
}

impl EventuallyPeriodicPath {
    pub fn new(d: &BratteliDiagram, root: VertexId, preamble: Vec<EdgeId>, cycle: Vec<EdgeId>) -> Result<Self, PathError> {
        if cycle.is_empty() {
            return Err(PathError::EmptyCycle);
        }
        if root >= d.vertex_count() {
            return Err(PathError::UnknownVertex(root.to_string()));
        }
        let mut all = preamble.clone();
        all.extend_from_slice(&cycle);
        all.push(cycle[0]);
        check_chain(d, Some(root), &all)?;
        Ok(Self::canonical(root, preamble, cycle))
    }

    fn canonical(root: VertexId, mut preamble: Vec<EdgeId>, mut cycle: Vec<EdgeId>) -> Self {
        let n = cycle.len();
        if let Some(p) = (1..=n).find(|&p| n.is_multiple_of(p) && (p..n).all(|i| cycle[i] == cycle[i - p])) {
            cycle.truncate(p);
        }
        while preamble.last().is_some_and(|&e| Some(&e) == cycle.last()) {
            preamble.pop();
            cycle.rotate_right(1);
        }
        EventuallyPeriodicPath { root, preamble, cycle }
    }

    pub fn root(&self) -> VertexId {
        self.root
    }

    pub fn preamble(&self) -> &[EdgeId] {
        &self.preamble
    }

    pub fn cycle(&self) -> &[EdgeId] {
        &self.cycle
    }

    /// Edge `k` (the generation `k + 2` edge).
    pub fn edge(&self, k: usize) -> EdgeId {
        if k < self.preamble.len() {
            self.preamble[k]
        } else {
            self.cycle[(k - self.preamble.len()) % self.cycle.len()]
        }
    }

    /// Vertex after `m` edges.
    pub fn vertex(&self, d: &BratteliDiagram, m: usize) -> VertexId {
        if m == 0 {
            self.root
        } else {
            d.vertical(self.edge(m - 1)).range
        }
    }

    pub fn prefix(&self, m: usize) -> PathPrefix {
        PathPrefix {
            root: self.root,
            edges: (0..m).map(|k| self.edge(k)).collect(),
        }
    }

    /// Number of edges before the periodic part.
    pub fn periodic_from(&self) -> usize {
        self.preamble.len()
    }

    pub fn is_minimal(&self, d: &BratteliDiagram) -> bool {
        self.preamble.iter().chain(&self.cycle).all(|&e| d.vertical(e).position == 0)
    }

    pub fn is_maximal(&self, d: &BratteliDiagram) -> bool {
        self.preamble.iter().chain(&self.cycle).all(|&e| d.is_last(e))
    }
}

/// Label sum `u(gamma) = sum_k c(e_k) lambda^k`; the root edge adds zero.
pub fn u_of_prefix(d: &BratteliDiagram, gamma: &PathPrefix) -> AlgebraicNumber {
    u_of_edges(d, gamma.edges.iter().copied())
}

fn u_of_edges(d: &BratteliDiagram, edges: impl Iterator<Item = EdgeId>) -> AlgebraicNumber {
    let lambda = d.lambda();
    let mut power = d.field().one();
    let mut total = d.field().zero();
    for e in edges {
        total = &total + &(&d.vertical(e).coeff * &power);
        power = &power * &lambda;
    }
    total
}

/// The generation-1 patch of a prefix, in the frame where the puncture of
/// the generation-1 tile is the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodedPatch {
    pub word: Vec<VertexId>,
    pub puncture_index: usize,
    /// Closed interval of each letter.
    pub positions: Vec<(AlgebraicNumber, AlgebraicNumber)>,
    /// `u(gamma)`, which is also the center of the supertile.
    pub offset: AlgebraicNumber,
    pub top_vertex: VertexId,
}

impl DecodedPatch {
    pub fn left_end(&self) -> &AlgebraicNumber {
        &self.positions[0].0
    }

    pub fn right_end(&self) -> &AlgebraicNumber {
        &self.positions[self.positions.len() - 1].1
    }

    pub fn puncture_interval(&self) -> &(AlgebraicNumber, AlgebraicNumber) {
        &self.positions[self.puncture_index]
    }

    /// Punctures (tile centers) of every letter.
    pub fn punctures(&self) -> Vec<AlgebraicNumber> {
        self.positions.iter().map(|(a, b)| (a + b).half()).collect()
    }
}

/// The collared word of `sigma^m` applied to the top vertex, with the
/// generation-1 tile of the path located inside it.
pub fn decode(d: &BratteliDiagram, gamma: &PathPrefix) -> DecodedPatch {
    let csub = d.csub();
    let mut word = vec![gamma.top(d)];
    let mut idx = 0;
    for &e in gamma.edges.iter().rev() {
        let t = d.vertical(e);
        debug_assert_eq!(word[idx], t.range);
        let before: usize = word[..idx].iter().map(|&w| csub.rule(w).len()).sum();
        word = csub.apply(&word);
        idx = before + t.position;
    }
    let lengths: Vec<AlgebraicNumber> = word.iter().map(|&t| csub.length(t).clone()).collect();
    let positions = lay_out(d, &lengths, idx);
    DecodedPatch {
        word,
        puncture_index: idx,
        positions,
        offset: u_of_prefix(d, gamma),
        top_vertex: gamma.top(d),
    }
}

/// Abutting intervals with the given lengths, the `center`-th one centered
/// at the origin.
fn lay_out(d: &BratteliDiagram, lengths: &[AlgebraicNumber], center: usize) -> Vec<(AlgebraicNumber, AlgebraicNumber)> {
    let field = d.field();
    let mut start = lengths[..center].iter().fold(field.zero(), |acc, l| &acc + l);
    start = -&(&start + &lengths[center].half());
    let mut out = Vec::with_capacity(lengths.len());
    for l in lengths {
        let end = &start + l;
        out.push((start, end.clone()));
        start = end;
    }
    out
}

/// Decoding of the collar of the top vertex: the expansions of its left
/// neighbour, itself and its right neighbour, over base letters.
#[derive(Debug, Clone, PartialEq)]
pub struct CollaredPatch {
    /// Base letters.
    pub word: Vec<usize>,
    /// Range of `word` covered by the expansion of the top vertex itself.
    pub core: Range<usize>,
    /// Collared letters of the core block.
    pub core_word: Vec<VertexId>,
    pub puncture_index: usize,
    pub positions: Vec<(AlgebraicNumber, AlgebraicNumber)>,
    pub offset: AlgebraicNumber,
    pub top_vertex: VertexId,
}

pub fn decode_collared(d: &BratteliDiagram, gamma: &PathPrefix) -> CollaredPatch {
    let inner = decode(d, gamma);
    let csub = d.csub();
    let base = csub.base();
    let top = &csub.alphabet()[inner.top_vertex];
    let mut left = vec![top.left];
    let mut right = vec![top.right];
    for _ in 0..gamma.edges.len() {
        left = base.apply(&left);
        right = base.apply(&right);
    }
    let mut word = left.clone();
    word.extend(inner.word.iter().map(|&t| csub.alphabet()[t].core));
    word.extend_from_slice(&right);
    let puncture_index = left.len() + inner.puncture_index;
    let lengths: Vec<AlgebraicNumber> = word.iter().map(|&x| base.length(x).clone()).collect();
    CollaredPatch {
        positions: lay_out(d, &lengths, puncture_index),
        core: left.len()..left.len() + inner.word.len(),
        core_word: inner.word,
        word,
        puncture_index,
        offset: inner.offset,
        top_vertex: inner.top_vertex,
    }
}

/// Tail equivalence: the edge sequences agree from some point on.
pub fn af_equiv(x: &EventuallyPeriodicPath, y: &EventuallyPeriodicPath) -> bool {
    if x.cycle.len() != y.cycle.len() {
        return false;
    }
    let k = x.preamble.len().max(y.preamble.len());
    (k..k + x.cycle.len()).all(|i| x.edge(i) == y.edge(i))
}

fn extremal_with(d: &BratteliDiagram, pick: impl Fn(&[usize]) -> usize) -> Vec<EventuallyPeriodicPath> {
    let n = d.vertex_count();
    // chosen edge into each vertex, and the vertex below it
    let edge_into: Vec<EdgeId> = (0..n).map(|v| pick(d.edges_into(v))).collect();
    let below: Vec<VertexId> = edge_into.iter().map(|&e| d.vertical(e).source).collect();
    let mut out = Vec::new();
    for v in 0..n {
        // v is cyclic for `below` iff iterating returns to it within n steps
        let mut w = below[v];
        let mut steps = 1;
        while w != v && steps <= n {
            w = below[w];
            steps += 1;
        }
        if w != v {
            continue;
        }
        // the path rooted at v climbs through the preimages of v along the
        // cycle, i.e. the cycle traversed backwards
        let mut cycle_vertices = vec![v];
        let mut w = below[v];
        while w != v {
            cycle_vertices.push(w);
            w = below[w];
        }
        // vertex after k edges is cycle_vertices[(L - k) mod L]
        let len = cycle_vertices.len();
        let cycle: Vec<EdgeId> = (1..=len).map(|k| edge_into[cycle_vertices[(len - k % len) % len]]).collect();
        out.push(EventuallyPeriodicPath::canonical(v, Vec::new(), cycle));
    }
    out
}

/// Minimal paths (every edge leftmost) and maximal paths (every edge
/// rightmost). Both are purely periodic and are indexed by the periodic
/// points of "source of the leftmost (rightmost) edge into v".
pub fn extremal_paths(d: &BratteliDiagram) -> (Vec<EventuallyPeriodicPath>, Vec<EventuallyPeriodicPath>) {
    let mut mins = extremal_with(d, |into| into[0]);
    let mut maxs = extremal_with(d, |into| into[into.len() - 1]);
    mins.sort_by_key(|x| d.vertex_name(x.root).to_string());
    maxs.sort_by_key(|x| d.vertex_name(x.root).to_string());
    (mins, maxs)
}

/// The pairing of maximal with minimal paths read off the cycles of
/// composable nontrivial commutative diagrams.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtremePairing {
    /// `(max, min)` pairs.
    pub pairs: Vec<(EventuallyPeriodicPath, EventuallyPeriodicPath)>,
}

impl ExtremePairing {
    pub fn image(&self, max: &EventuallyPeriodicPath) -> Option<&EventuallyPeriodicPath> {
        self.pairs.iter().find(|(m, _)| m == max).map(|(_, n)| n)
    }

    pub fn preimage(&self, min: &EventuallyPeriodicPath) -> Option<&EventuallyPeriodicPath> {
        self.pairs.iter().find(|(_, n)| n == min).map(|(m, _)| m)
    }
}

pub fn pair_extremes(d: &BratteliDiagram) -> Result<ExtremePairing, PathError> {
    let (mins, maxs) = extremal_paths(d);
    let chains = d.diagram_chains();
    let mut pairs: Vec<(EventuallyPeriodicPath, EventuallyPeriodicPath)> = Vec::new();
    for cycle in &chains.cycles {
        let len = cycle.len();
        for r in 0..len {
            let seq: Vec<_> = (0..len).map(|i| chains.nodes[cycle[(r + i) % len]]).collect();
            let left: Vec<EdgeId> = seq.iter().map(|q| q.e_left).collect();
            let right: Vec<EdgeId> = seq.iter().map(|q| q.e_right).collect();
            let pl = EventuallyPeriodicPath::canonical(d.vertical(left[0]).source, Vec::new(), left);
            let pr = EventuallyPeriodicPath::canonical(d.vertical(right[0]).source, Vec::new(), right);
            let pair = if pr.is_maximal(d) && pl.is_minimal(d) {
                (pr, pl)
            } else if pl.is_maximal(d) && pr.is_minimal(d) {
                (pl, pr)
            } else {
                continue;
            };
            if !pairs.contains(&pair) {
                pairs.push(pair);
            }
        }
    }
    pairs.sort();
    let bijective = pairs.len() == maxs.len()
        && pairs.len() == mins.len()
        && maxs.iter().all(|m| pairs.iter().filter(|(a, _)| a == m).count() == 1)
        && mins.iter().all(|m| pairs.iter().filter(|(_, b)| b == m).count() == 1);
    if !bijective {
        return Err(PathError::UnpairedExtreme);
    }
    Ok(ExtremePairing { pairs })
}

/// Successor in the left-to-right order: raise the lowest edge that is not
/// rightmost to the next position and refill below with leftmost edges.
/// Maximal paths go to their partner under `psi`.
pub fn vershik_successor(
    d: &BratteliDiagram,
    psi: &ExtremePairing,
    x: &EventuallyPeriodicPath,
) -> Result<EventuallyPeriodicPath, PathError> {
    let span = x.preamble.len() + x.cycle.len();
    let Some(k) = (0..span).find(|&k| !d.is_last(x.edge(k))) else {
        return psi.image(x).cloned().ok_or(PathError::UnpairedExtreme);
    };
    let old = d.vertical(x.edge(k));
    let next = d.edges_into(old.range)[old.position + 1];
    let mut low = vec![next];
    let mut v = d.vertical(next).source;
    for _ in 0..k {
        let e = d.edges_into(v)[0];
        low.push(e);
        v = d.vertical(e).source;
    }
    low.reverse();
    let p = x.preamble.len();
    let (preamble, cycle) = if k < p {
        let mut pre = low;
        pre.extend_from_slice(&x.preamble[k + 1..]);
        (pre, x.cycle.clone())
    } else {
        let j = k - p;
        let mut pre = low;
        pre.extend_from_slice(&x.cycle[j + 1..]);
        (pre, x.cycle.clone())
    };
    Ok(EventuallyPeriodicPath::canonical(v, preamble, cycle))
}

/// Distance the puncture moves from `x` to its non-maximal successor `vx`:
/// both lie in the same supertile once their edges agree.
pub fn vershik_step(d: &BratteliDiagram, x: &EventuallyPeriodicPath, vx: &EventuallyPeriodicPath) -> Option<AlgebraicNumber> {
    let span = x.preamble.len().max(vx.preamble.len()) + x.cycle.len().lcm(&vx.cycle.len());
    let top = (0..span).rev().find(|&k| x.edge(k) != vx.edge(k))? + 1;
    let ux = u_of_edges(d, (0..top).map(|k| x.edge(k)));
    let uy = u_of_edges(d, (0..top).map(|k| vx.edge(k)));
    Some(&ux - &uy)
}

/// Witness for `x ~ y`: horizontals `h_m` linking the vertices after `m`
/// edges of `x` and `y` for every `m >= n0`, with every square
/// `(h_m, x_m, y_m, h_{m+1})` commutative.
#[derive(Debug, Clone, PartialEq)]
pub struct RbWitness {
    /// Number of edges after which the chain starts.
    pub n0: usize,
    pub preamble: Vec<usize>,
    pub cycle: Vec<usize>,
    /// `a(x, y)`, with `T_y = T_x + a(x, y)`.
    pub translation: AlgebraicNumber,
}

impl RbWitness {
    /// Horizontal linking the vertices after `m >= n0` edges.
    pub fn horizontal_at(&self, m: usize) -> usize {
        assert!(m >= self.n0);
        let i = m - self.n0;
        if i < self.preamble.len() {
            self.preamble[i]
        } else {
            self.cycle[(i - self.preamble.len()) % self.cycle.len()]
        }
    }

    pub fn all_trivial(&self, d: &BratteliDiagram) -> bool {
        self.cycle.iter().all(|&h| d.horizontal(h).trivial)
    }
}

/// Decides the relation generated by commutative diagrams.
///
/// Beyond `K = max(preamble lengths)` both paths repeat with period
/// `P = lcm(cycle lengths)`, so the run automaton lives on pairs
/// (phase mod P, horizontal). A run exists from some generation iff the
/// greatest set of states that all have a successor inside the set is
/// nonempty.
pub fn rb_equiv(d: &BratteliDiagram, x: &EventuallyPeriodicPath, y: &EventuallyPeriodicPath) -> Option<RbWitness> {
    let (start, states, loop_start) = rb_run(d, x, y)?;
    let mut translation = None;
    let lambda = d.lambda();
    let mut ux = d.field().zero();
    let mut uy = d.field().zero();
    let mut power = d.field().one();
    let end = start + states.len();
    for m in 0..end {
        if m >= start {
            let h = states[m - start];
            let a = -&(&(&ux - &uy) + &(&d.horizontal(h).coeff * &power));
            match &translation {
                None => translation = Some(a),
                Some(t) => assert!(*t == a, "translation must not depend on the generation"),
            }
        }
        ux = &ux + &(&d.vertical(x.edge(m)).coeff * &power);
        uy = &uy + &(&d.vertical(y.edge(m)).coeff * &power);
        power = &power * &lambda;
    }
    let body = &states[..states.len() - 1];
    let (preamble, cycle) = (body[..loop_start].to_vec(), body[loop_start..].to_vec());
    Some(RbWitness {
        n0: start,
        preamble,
        cycle,
        translation: translation.expect("run is nonempty"),
    })
}

/// Whether `x ~ y`, without computing the translation.
pub fn rb_related(d: &BratteliDiagram, x: &EventuallyPeriodicPath, y: &EventuallyPeriodicPath) -> bool {
    rb_run(d, x, y).is_some()
}

/// Start `n0`, the horizontals for `m = n0 ..`, whose last entry repeats the
/// state at the returned loop index.
fn rb_run(d: &BratteliDiagram, x: &EventuallyPeriodicPath, y: &EventuallyPeriodicPath) -> Option<(usize, Vec<usize>, usize)> {
    let k = x.preamble.len().max(y.preamble.len());
    let p = x.cycle.len().lcm(&y.cycle.len());
    let nodes: Vec<Vec<usize>> = (0..p)
        .map(|ph| {
            let (vx, vy) = (x.vertex(d, k + ph), y.vertex(d, k + ph));
            d.horizontals_from(vx).iter().copied().filter(|&h| d.horizontal(h).range == vy).collect()
        })
        .collect();
    let succ = |ph: usize, h: usize| -> &[usize] { d.square_completions(h, x.edge(k + ph), y.edge(k + ph)) };
    let mut alive: Vec<HashMap<usize, bool>> = nodes.iter().map(|hs| hs.iter().map(|&h| (h, true)).collect()).collect();
    loop {
        let mut changed = false;
        for ph in 0..p {
            let nxt = (ph + 1) % p;
            for &h in &nodes[ph] {
                if alive[ph][&h] && !succ(ph, h).iter().any(|s| alive[nxt].get(s).copied().unwrap_or(false)) {
                    alive[ph].insert(h, false);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let choose = |ph: usize, h: usize| -> usize {
        let nxt = (ph + 1) % p;
        *succ(ph, h)
            .iter()
            .filter(|s| alive[nxt].get(s).copied().unwrap_or(false))
            .min()
            .expect("live state has a live successor")
    };
    let (ph0, h0) = (0..p).find_map(|ph| nodes[ph].iter().copied().filter(|h| alive[ph][h]).min().map(|h| (ph, h)))?;
    // forward: follow chosen successors until a state repeats
    let mut run = vec![h0];
    let mut seen: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    seen.insert((ph0, h0), 0);
    let (mut ph, mut h) = (ph0, h0);
    let loop_start = loop {
        h = choose(ph, h);
        ph = (ph + 1) % p;
        run.push(h);
        if let Some(&i) = seen.get(&(ph, h)) {
            break i;
        }
        seen.insert((ph, h), run.len() - 1);
    };
    // backward: prepend predecessors as long as some exist
    let mut start = k + ph0;
    let mut back = Vec::new();
    let mut cur = h0;
    while start > 0 {
        let m = start - 1;
        let (vx, vy) = (x.vertex(d, m), y.vertex(d, m));
        let pred = d
            .horizontals_from(vx)
            .iter()
            .copied()
            .filter(|&g| d.horizontal(g).range == vy)
            .filter(|&g| d.square_completions(g, x.edge(m), y.edge(m)).contains(&cur))
            .min();
        match pred {
            Some(g) => {
                back.push(g);
                cur = g;
                start = m;
            }
            None => break,
        }
    }
    back.reverse();
    let offset = back.len();
    let mut states = back;
    states.extend(run);
    Some((start, states, offset + loop_start))
}

/// `x ~ y` decided through the generators: tail equivalence, or tail
/// equivalence to a `(max, psi(max))` pair in either order.
pub fn rb_via_generators(psi: &ExtremePairing, x: &EventuallyPeriodicPath, y: &EventuallyPeriodicPath) -> bool {
    af_equiv(x, y)
        || psi.pairs.iter().any(|(m, n)| (af_equiv(x, m) && af_equiv(y, n)) || (af_equiv(y, m) && af_equiv(x, n)))
}

/// `a_{gamma gamma'} = u(gamma) - u(gamma') + u(h)`: the vector from the
/// puncture of `gamma` to that of `gamma'` when their supertiles are joined
/// by `h`.
pub fn rb_base_translation(
    d: &BratteliDiagram,
    gamma: &PathPrefix,
    gamma2: &PathPrefix,
    h: usize,
) -> Result<AlgebraicNumber, PathError> {
    if gamma.edges.len() != gamma2.edges.len() {
        return Err(PathError::LengthMismatch);
    }
    let t = d.horizontal(h);
    if t.source != gamma.top(d) || t.range != gamma2.top(d) {
        return Err(PathError::IncompatibleHorizontal);
    }
    let m = gamma.edges.len() as u32;
    let uh = &t.coeff * &d.field().lambda_pow(m);
    Ok(&(&u_of_prefix(d, gamma) - &u_of_prefix(d, gamma2)) + &uh)
}

/// Whether `(x, y)` lies in the base set of `(gamma, gamma', h)`: `gamma`
/// is a prefix of `x` and `T_y = T_x - a_{gamma gamma'}`.
pub fn in_base_set(
    d: &BratteliDiagram,
    gamma: &PathPrefix,
    gamma2: &PathPrefix,
    h: usize,
    x: &EventuallyPeriodicPath,
    y: &EventuallyPeriodicPath,
) -> Result<bool, PathError> {
    let a = rb_base_translation(d, gamma, gamma2, h)?;
    if !gamma.is_prefix_of(x) {
        return Ok(false);
    }
    Ok(rb_equiv(d, x, y).is_some_and(|w| w.translation == -&a))
}

fn vertex_by_name(d: &BratteliDiagram, name: &str) -> Result<VertexId, PathError> {
    d.vertex_index(name).ok_or_else(|| PathError::UnknownVertex(name.to_string()))
}

fn parse_edge(d: &BratteliDiagram, token: &str) -> Result<EdgeId, PathError> {
    let (pair, position) = match token.split_once('#') {
        Some((p, k)) => (p, Some(k.parse::<usize>().map_err(|_| PathError::Syntax(format!("bad position in `{token}`")))?)),
        None => (token, None),
    };
    let (s, r) = if let Some((s, r)) = pair.split_once('-') {
        (s.to_string(), r.to_string())
    } else {
        let chars: Vec<char> = pair.chars().collect();
        if chars.len() != 2 {
            return Err(PathError::Syntax(format!("edge `{token}` must be two vertex names")));
        }
        (chars[0].to_string(), chars[1].to_string())
    };
    let (s, r) = (vertex_by_name(d, &s)?, vertex_by_name(d, &r)?);
    if d.multiplicity(s, r) == 0 {
        return Err(PathError::UnknownEdge(token.to_string()));
    }
    if position.is_none() && d.multiplicity(s, r) > 1 {
        return Err(PathError::AmbiguousEdge(token.to_string()));
    }
    d.find_vertical(s, r, position).ok_or_else(|| PathError::UnknownEdge(token.to_string()))
}

fn split_root(text: &str) -> Result<(&str, &str), PathError> {
    let (head, body) = text.split_once(';').unwrap_or((text, ""));
    let name = head
        .trim()
        .strip_prefix("root")
        .and_then(|r| r.trim_start().strip_prefix('='))
        .ok_or_else(|| PathError::Syntax("expected `root=NAME;`".to_string()))?
        .trim();
    if name.is_empty() {
        return Err(PathError::Syntax("missing root vertex".to_string()));
    }
    Ok((name, body))
}

fn tokens(text: &str) -> impl Iterator<Item = &str> {
    text.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty())
}

/// Parses `root=a; ac ca ab`.
pub fn parse_prefix(d: &BratteliDiagram, text: &str) -> Result<PathPrefix, PathError> {
    let (root, body) = split_root(text)?;
    if body.contains(['(', ')', '|']) {
        return Err(PathError::Syntax("a finite path has no cycle".to_string()));
    }
    let root = vertex_by_name(d, root)?;
    let edges = tokens(body).map(|t| parse_edge(d, t)).collect::<Result<Vec<_>, _>>()?;
    PathPrefix::new(d, root, edges)
}

/// Parses `root=a; ac | (ca ac)`; the `|` and square brackets around the
/// preamble are optional.
pub fn parse_periodic(d: &BratteliDiagram, text: &str) -> Result<EventuallyPeriodicPath, PathError> {
    let (root, body) = split_root(text)?;
    let open = body.find('(').ok_or(PathError::NotPeriodic)?;
    let close = body.rfind(')').ok_or_else(|| PathError::Syntax("unclosed `(`".to_string()))?;
    if close < open || !body[close + 1..].trim().is_empty() {
        return Err(PathError::Syntax("cycle must come last".to_string()));
    }
    let pre_text: String = body[..open].chars().filter(|c| !matches!(c, '|' | '[' | ']')).collect();
    let root = vertex_by_name(d, root)?;
    let preamble = tokens(&pre_text).map(|t| parse_edge(d, t)).collect::<Result<Vec<_>, _>>()?;
    let cycle = tokens(&body[open + 1..close]).map(|t| parse_edge(d, t)).collect::<Result<Vec<_>, _>>()?;
    EventuallyPeriodicPath::new(d, root, preamble, cycle)
}

pub fn format_prefix(d: &BratteliDiagram, gamma: &PathPrefix) -> String {
    let edges: Vec<String> = gamma.edges.iter().map(|&e| d.vertical_token(e)).collect();
    format!("root={}; {}", d.vertex_name(gamma.root), edges.join(" ")).trim_end().to_string()
}

pub fn format_periodic(d: &BratteliDiagram, x: &EventuallyPeriodicPath) -> String {
    let pre: Vec<String> = x.preamble.iter().map(|&e| d.vertical_token(e)).collect();
    let cyc: Vec<String> = x.cycle.iter().map(|&e| d.vertical_token(e)).collect();
    if pre.is_empty() {
        format!("root={}; ({})", d.vertex_name(x.root), cyc.join(" "))
    } else {
        format!("root={}; {} | ({})", d.vertex_name(x.root), pre.join(" "), cyc.join(" "))
    }
}

/// A word with a combining dot over the puncture letter, e.g. `ȧdbad`.
pub fn dotted_word(names: &[&str], puncture: usize) -> String {
    let sep = if names.iter().all(|n| n.chars().count() == 1) { "" } else { " " };
    names
        .iter()
        .enumerate()
        .map(|(i, n)| if i == puncture { format!("{n}\u{307}") } else { n.to_string() })
        .collect::<Vec<_>>()
        .join(sep)
}

pub struct PathDisplay<'a> {
    pub diagram: &'a BratteliDiagram,
    pub path: &'a EventuallyPeriodicPath,
}

impl fmt::Display for PathDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_periodic(self.diagram, self.path))
    }
}

/// Every eventually periodic path with preamble length `<= max_pre` and
/// cycle length `<= max_cycle`, deduplicated.
pub fn enumerate_periodic(d: &BratteliDiagram, max_pre: usize, max_cycle: usize) -> Vec<EventuallyPeriodicPath> {
    let mut walks: Vec<Vec<EdgeId>> = (0..d.verticals().len()).map(|e| vec![e]).collect();
    let mut by_len: Vec<Vec<Vec<EdgeId>>> = vec![Vec::new(), walks.clone()];
    for _ in 2..=(max_pre + max_cycle) {
        let mut next = Vec::new();
        for w in &walks {
            let v = d.vertical(*w.last().unwrap()).range;
            for &e in d.edges_from(v) {
                let mut w2 = w.clone();
                w2.push(e);
                next.push(w2);
            }
        }
        by_len.push(next.clone());
        walks = next;
    }
    let mut out = std::collections::BTreeSet::new();
    for c in 1..=max_cycle {
        for cycle in &by_len[c] {
            if d.vertical(cycle[c - 1]).range != d.vertical(cycle[0]).source {
                continue;
            }
            out.insert(EventuallyPeriodicPath::canonical(d.vertical(cycle[0]).source, Vec::new(), cycle.clone()));
            for p in 1..=max_pre {
                for pre in &by_len[p] {
                    if d.vertical(pre[p - 1]).range == d.vertical(cycle[0]).source {
                        out.insert(EventuallyPeriodicPath::canonical(d.vertical(pre[0]).source, pre.clone(), cycle.clone()));
                    }
                }
            }
        }
    }
    out.into_iter().collect()
}
