//! The stationary collared Bratteli diagram of a substitution.
//!
//! Vertices are collared letters, identical at every generation. A vertical
//! edge from `s` (generation `n-1`) to `r` (generation `n`) is an occurrence
//! of `s` in the collared rule of `r`; its label at generation `n >= 2` is
//! `c * lambda^(n-2)` where `c` is the vector from the puncture of the
//! subtile to the puncture of the supertile at base scale. Horizontal edges
//! join adjacent supertiles of one generation; their label at generation
//! `n` is `c * lambda^(n-1)`, `c` being the vector from source puncture to
//! range puncture. Every label is therefore a position difference
//! `range - source`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactnum::{parse_rational, AlgebraicNumber, ExactError, ModulusField, Poly};
use crate::substitution::{CollaredSubstitution, Substitution, SubstitutionError};

pub type VertexId = usize;

#[derive(Debug, Clone, PartialEq)]
pub struct VerticalTemplate {
    pub source: VertexId,
    pub range: VertexId,
    /// Index of `source` inside the collared rule of `range`.
    pub position: usize,
    pub coeff: AlgebraicNumber,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HorizontalTemplate {
    pub source: VertexId,
    pub range: VertexId,
    pub coeff: AlgebraicNumber,
    pub trivial: bool,
}

/// A square `h_top, e_left, e_right, h_bot` (indices into the template
/// lists). `h_top` links the sources of the two verticals, `h_bot` their
/// ranges, and going down-then-across equals going across-then-down.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DiagramTemplate {
    pub h_top: usize,
    pub e_left: usize,
    pub e_right: usize,
    pub h_bot: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagramKind {
    /// Both horizontals trivial; then `e_left = e_right`.
    Trivial,
    Mixed,
    Nontrivial,
}

#[derive(Debug, Error)]
pub enum DiagramError {
    #[error("invalid diagram JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Substitution(#[from] SubstitutionError),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error("diagram JSON is inconsistent with its substitution: {0}")]
    Mismatch(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HypothesisViolation {
    pub vertex: VertexId,
}

/// Directed graph on the nontrivial diagrams: `D -> D'` when the bottom
/// horizontal of `D` is the top horizontal of `D'`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiagramChains {
    pub nodes: Vec<DiagramTemplate>,
    pub arrows: Vec<(usize, usize)>,
    /// Simple cycles as lists of node indices, each starting at its
    /// smallest index.
    pub cycles: Vec<Vec<usize>>,
}

#[derive(Debug, Clone)]
pub struct BratteliDiagram {
    csub: CollaredSubstitution,
    verticals: Vec<VerticalTemplate>,
    horizontals: Vec<HorizontalTemplate>,
    diagrams: Vec<DiagramTemplate>,
    into: Vec<Vec<usize>>,
    out: Vec<Vec<usize>>,
    h_from: Vec<Vec<usize>>,
    opposite: Vec<usize>,
    squares: HashMap<(usize, usize, usize), Vec<usize>>,
}

/// One template per (range, position), with coefficient
/// `(supertile center) - (subtile center)` at base scale.
pub fn build_vertical(csub: &CollaredSubstitution) -> Vec<VerticalTemplate> {
    let field = csub.field();
    let mut out = Vec::new();
    for range in 0..csub.len() {
        let rule = csub.rule(range);
        let total = rule.iter().fold(field.zero(), |acc, &s| &acc + csub.length(s));
        let center = total.half();
        let mut left = field.zero();
        for (position, &source) in rule.iter().enumerate() {
            let len = csub.length(source);
            let sub_center = &left + &len.half();
            out.push(VerticalTemplate {
                source,
                range,
                position,
                coeff: &center - &sub_center,
            });
            left = &left + len;
        }
    }
    out
}

/// Ordered pairs `(t, t')` with `t` immediately left of `t'` in some legal
/// configuration.
pub fn collared_adjacencies(csub: &CollaredSubstitution) -> Vec<(VertexId, VertexId)> {
    let legal4 = csub.base().legal_words(4);
    let alpha = csub.alphabet();
    let mut pairs = Vec::new();
    for (i, t) in alpha.iter().enumerate() {
        for (j, u) in alpha.iter().enumerate() {
            if t.right == u.core && u.left == t.core && legal4.contains(&vec![t.left, t.core, u.core, u.right]) {
                pairs.push((i, j));
            }
        }
    }
    pairs
}

/// One trivial template per vertex (index = vertex), then for each legal
/// adjacency `t t'` the template `t' -> t` (negative coefficient) followed
/// by its opposite `t -> t'`.
pub fn build_horizontal(csub: &CollaredSubstitution) -> Vec<HorizontalTemplate> {
    let field = csub.field();
    let mut out: Vec<HorizontalTemplate> = (0..csub.len())
        .map(|v| HorizontalTemplate {
            source: v,
            range: v,
            coeff: field.zero(),
            trivial: true,
        })
        .collect();
    for (t, u) in collared_adjacencies(csub) {
        let gap = (csub.length(t) + csub.length(u)).half();
        out.push(HorizontalTemplate {
            source: u,
            range: t,
            coeff: -&gap,
            trivial: false,
        });
        out.push(HorizontalTemplate {
            source: t,
            range: u,
            coeff: gap,
            trivial: false,
        });
    }
    out
}

/// `c(e_left) + lambda c(h_bot) - c(h_top) - c(e_right)`.
pub fn diagram_residual(
    lambda: &AlgebraicNumber,
    verticals: &[VerticalTemplate],
    horizontals: &[HorizontalTemplate],
    d: &DiagramTemplate,
) -> AlgebraicNumber {
    let lhs = &verticals[d.e_left].coeff + &(lambda * &horizontals[d.h_bot].coeff);
    let rhs = &horizontals[d.h_top].coeff + &verticals[d.e_right].coeff;
    &lhs - &rhs
}

fn incident(verticals: &[VerticalTemplate], horizontals: &[HorizontalTemplate], d: &DiagramTemplate) -> bool {
    let (ht, hb) = (&horizontals[d.h_top], &horizontals[d.h_bot]);
    let (el, er) = (&verticals[d.e_left], &verticals[d.e_right]);
    ht.source == el.source && ht.range == er.source && el.range == hb.source && er.range == hb.range
}

/// Every incident quadruple with zero residual, in both orientations.
pub fn enumerate_commutative_diagrams(
    lambda: &AlgebraicNumber,
    verticals: &[VerticalTemplate],
    horizontals: &[HorizontalTemplate],
) -> Vec<DiagramTemplate> {
    let nv = verticals.iter().map(|e| e.source.max(e.range) + 1).max().unwrap_or(0);
    let mut out_of = vec![Vec::new(); nv];
    for (i, e) in verticals.iter().enumerate() {
        out_of[e.source].push(i);
    }
    let mut h_between: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (i, h) in horizontals.iter().enumerate() {
        h_between.entry((h.source, h.range)).or_default().push(i);
    }
    let mut found = Vec::new();
    for (ht, h) in horizontals.iter().enumerate() {
        for &el in &out_of[h.source] {
            for &er in &out_of[h.range] {
                let key = (verticals[el].range, verticals[er].range);
                for &hb in h_between.get(&key).map(Vec::as_slice).unwrap_or(&[]) {
                    let d = DiagramTemplate {
                        h_top: ht,
                        e_left: el,
                        e_right: er,
                        h_bot: hb,
                    };
                    if diagram_residual(lambda, verticals, horizontals, &d).is_zero() {
                        found.push(d);
                    }
                }
            }
        }
    }
    found
}

impl BratteliDiagram {
    pub fn new(csub: CollaredSubstitution) -> Self {
        let verticals = build_vertical(&csub);
        let horizontals = build_horizontal(&csub);
        let lambda = csub.field().lambda();
        let diagrams = enumerate_commutative_diagrams(&lambda, &verticals, &horizontals);
        let n = csub.len();
        let mut into = vec![Vec::new(); n];
        let mut out = vec![Vec::new(); n];
        for (i, e) in verticals.iter().enumerate() {
            into[e.range].push(i);
            out[e.source].push(i);
        }
        let mut h_from = vec![Vec::new(); n];
        for (i, h) in horizontals.iter().enumerate() {
            h_from[h.source].push(i);
        }
        let opposite = horizontals
            .iter()
            .enumerate()
            .map(|(i, h)| {
                if h.trivial {
                    return i;
                }
                horizontals
                    .iter()
                    .position(|g| g.source == h.range && g.range == h.source && g.coeff == -&h.coeff)
                    .expect("horizontal templates come in opposite pairs")
            })
            .collect();
        let mut squares: HashMap<(usize, usize, usize), Vec<usize>> = HashMap::new();
        for d in &diagrams {
            squares.entry((d.h_top, d.e_left, d.e_right)).or_default().push(d.h_bot);
        }
        BratteliDiagram {
            csub,
            verticals,
            horizontals,
            diagrams,
            into,
            out,
            h_from,
            opposite,
            squares,
        }
    }

    pub fn csub(&self) -> &CollaredSubstitution {
        &self.csub
    }

    pub fn field(&self) -> &Arc<ModulusField> {
        self.csub.field()
    }

    pub fn lambda(&self) -> AlgebraicNumber {
        self.field().lambda()
    }

    pub fn vertex_count(&self) -> usize {
        self.csub.len()
    }

    pub fn vertex_name(&self, v: VertexId) -> &str {
        self.csub.name(v)
    }

    pub fn vertex_index(&self, name: &str) -> Option<VertexId> {
        self.csub.index_of(name)
    }

    pub fn verticals(&self) -> &[VerticalTemplate] {
        &self.verticals
    }

    pub fn vertical(&self, e: usize) -> &VerticalTemplate {
        &self.verticals[e]
    }

    pub fn horizontals(&self) -> &[HorizontalTemplate] {
        &self.horizontals
    }

    pub fn horizontal(&self, h: usize) -> &HorizontalTemplate {
        &self.horizontals[h]
    }

    /// All commutative diagrams, trivial ones included, in both
    /// orientations.
    pub fn diagrams(&self) -> &[DiagramTemplate] {
        &self.diagrams
    }

    /// Verticals into `v`, ordered by position (left to right).
    pub fn edges_into(&self, v: VertexId) -> &[usize] {
        &self.into[v]
    }

    pub fn edges_from(&self, v: VertexId) -> &[usize] {
        &self.out[v]
    }

    pub fn horizontals_from(&self, v: VertexId) -> &[usize] {
        &self.h_from[v]
    }

    pub fn trivial_horizontal(&self, v: VertexId) -> usize {
        v
    }

    pub fn opposite(&self, h: usize) -> usize {
        self.opposite[h]
    }

    pub fn is_last(&self, e: usize) -> bool {
        let t = &self.verticals[e];
        t.position + 1 == self.into[t.range].len()
    }

    /// The vertical `source -> range`, at `position` if given, else the
    /// unique one.
    pub fn find_vertical(&self, source: VertexId, range: VertexId, position: Option<usize>) -> Option<usize> {
        let mut hits = self.into[range]
            .iter()
            .copied()
            .filter(|&e| self.verticals[e].source == source && position.is_none_or(|p| self.verticals[e].position == p));
        let first = hits.next()?;
        if position.is_none() && hits.next().is_some() {
            return None;
        }
        Some(first)
    }

    /// Number of verticals `source -> range`.
    pub fn multiplicity(&self, source: VertexId, range: VertexId) -> usize {
        self.into[range].iter().filter(|&&e| self.verticals[e].source == source).count()
    }

    /// Bottom horizontals completing `(h_top, e_left, e_right)`.
    pub fn square_completions(&self, h_top: usize, e_left: usize, e_right: usize) -> &[usize] {
        self.squares.get(&(h_top, e_left, e_right)).map(Vec::as_slice).unwrap_or(&[])
    }

    /// `u(e^n) = c * lambda^(n-2)` for `n >= 2`.
    pub fn vertical_label(&self, e: usize, n: u32) -> AlgebraicNumber {
        assert!(n >= 2, "vertical labels start at generation 2");
        &self.verticals[e].coeff * &self.field().lambda_pow(n - 2)
    }

    /// `u(h^n) = c * lambda^(n-1)` for `n >= 1`.
    pub fn horizontal_label(&self, h: usize, n: u32) -> AlgebraicNumber {
        assert!(n >= 1, "horizontal labels start at generation 1");
        &self.horizontals[h].coeff * &self.field().lambda_pow(n - 1)
    }

    pub fn residual(&self, d: &DiagramTemplate) -> AlgebraicNumber {
        diagram_residual(&self.lambda(), &self.verticals, &self.horizontals, d)
    }

    pub fn is_incident(&self, d: &DiagramTemplate) -> bool {
        incident(&self.verticals, &self.horizontals, d)
    }

    pub fn kind(&self, d: &DiagramTemplate) -> DiagramKind {
        match (self.horizontals[d.h_top].trivial, self.horizontals[d.h_bot].trivial) {
            (true, true) => DiagramKind::Trivial,
            (false, false) => DiagramKind::Nontrivial,
            _ => DiagramKind::Mixed,
        }
    }

    /// Base-scale value of both sides of the square, `c(e_left) + lambda
    /// c(h_bot)`; the generation-`n` sum is this times `lambda^(n-2)`.
    pub fn diagram_sum(&self, d: &DiagramTemplate) -> AlgebraicNumber {
        &self.verticals[d.e_left].coeff + &(&self.lambda() * &self.horizontals[d.h_bot].coeff)
    }

    /// Nontrivial diagrams, one per orientation pair: the one whose top
    /// horizontal points right to left (negative coefficient).
    pub fn nontrivial_diagrams(&self) -> Vec<DiagramTemplate> {
        self.diagrams
            .iter()
            .copied()
            .filter(|d| self.kind(d) == DiagramKind::Nontrivial && self.horizontals[d.h_top].coeff.sign() < 0)
            .collect()
    }

    /// `e[st]` for the vertical from `s` into `t`.
    pub fn vertical_name(&self, e: usize) -> String {
        format!("e[{}]", self.vertical_token(e))
    }

    /// Path-literal token `st`, with `#k` appended when `s` occurs more
    /// than once in the rule of `t`.
    pub fn vertical_token(&self, e: usize) -> String {
        let t = &self.verticals[e];
        let base = self.pair_name(t.source, t.range);
        if self.multiplicity(t.source, t.range) > 1 {
            format!("{base}#{}", t.position)
        } else {
            base
        }
    }

    /// `h[tt']` for the edge from the right tile `t'` to the left tile `t`
    /// of the adjacent pair `t t'`, `h[tt']^op` for its opposite, `h[t]`
    /// for a trivial edge.
    pub fn horizontal_name(&self, h: usize) -> String {
        let t = &self.horizontals[h];
        if t.trivial {
            return format!("h[{}]", self.vertex_name(t.source));
        }
        if t.coeff.sign() < 0 {
            format!("h[{}]", self.pair_name(t.range, t.source))
        } else {
            format!("h[{}]^op", self.pair_name(t.source, t.range))
        }
    }

    fn pair_name(&self, a: VertexId, b: VertexId) -> String {
        let single = self.csub.alphabet().iter().all(|c| c.name.chars().count() == 1);
        if single {
            format!("{}{}", self.vertex_name(a), self.vertex_name(b))
        } else {
            format!("{}-{}", self.vertex_name(a), self.vertex_name(b))
        }
    }

    pub fn diagram_name(&self, d: &DiagramTemplate) -> String {
        format!(
            "{} {} {} {}",
            self.horizontal_name(d.h_top),
            self.vertical_name(d.e_left),
            self.vertical_name(d.e_right),
            self.horizontal_name(d.h_bot)
        )
    }

    pub fn diagram_chains(&self) -> DiagramChains {
        chains_of(&self.nontrivial_diagrams())
    }

    /// Nontrivial diagrams that start an infinite composable sequence
    /// `D_n, D_{n+1}, ...`, i.e. that reach a cycle of
    /// [`BratteliDiagram::diagram_chains`]. The others end, after finitely
    /// many generations, in a square whose bottom edge is trivial.
    pub fn recurrent_diagrams(&self) -> Vec<DiagramTemplate> {
        let chains = self.diagram_chains();
        let n = chains.nodes.len();
        let mut good = vec![false; n];
        for c in &chains.cycles {
            for &i in c {
                good[i] = true;
            }
        }
        loop {
            let mut changed = false;
            for &(i, j) in &chains.arrows {
                if good[j] && !good[i] {
                    good[i] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        chains.nodes.iter().zip(good).filter(|(_, g)| *g).map(|(d, _)| *d).collect()
    }

    /// Nontrivial diagrams that are not recurrent.
    pub fn transient_diagrams(&self) -> Vec<DiagramTemplate> {
        let recurrent = self.recurrent_diagrams();
        self.nontrivial_diagrams().into_iter().filter(|d| !recurrent.contains(d)).collect()
    }

    /// Every vertex lies on two distinct infinite paths: all vertices hang
    /// off the root, so it suffices that from every vertex the forward
    /// graph reaches a vertex with two outgoing verticals.
    pub fn hypothesis_check(&self) -> Result<(), HypothesisViolation> {
        let n = self.vertex_count();
        let branching: Vec<bool> = (0..n).map(|v| self.out[v].len() >= 2).collect();
        for v in 0..n {
            let mut seen = vec![false; n];
            let mut stack = vec![v];
            seen[v] = true;
            let mut ok = false;
            while let Some(w) = stack.pop() {
                if branching[w] {
                    ok = true;
                    break;
                }
                for &e in &self.out[w] {
                    let r = self.verticals[e].range;
                    if !seen[r] {
                        seen[r] = true;
                        stack.push(r);
                    }
                }
            }
            if !ok {
                return Err(HypothesisViolation { vertex: v });
            }
        }
        Ok(())
    }

    /// Every vertex has an incoming and an outgoing vertical.
    pub fn is_regular(&self) -> bool {
        (0..self.vertex_count()).all(|v| !self.into[v].is_empty() && !self.out[v].is_empty())
    }

    /// DOT rendering with `depth` generations below the root.
    pub fn export_dot(&self, depth: usize) -> String {
        assert!(depth >= 1, "depth must be at least 1");
        let mut s = String::new();
        s.push_str("digraph bratteli {\n  rankdir=TB;\n  node [shape=circle];\n");
        s.push_str("  { rank=source; root [label=\"o\", shape=point]; }\n");
        for g in 1..=depth {
            s.push_str("  { rank=same;");
            for v in 0..self.vertex_count() {
                let _ = write!(s, " \"{}_{}\" [label=\"{}\"];", self.vertex_name(v), g, self.vertex_name(v));
            }
            s.push_str(" }\n");
        }
        for v in 0..self.vertex_count() {
            let _ = writeln!(s, "  root -> \"{}_1\" [label=\"0\"];", self.vertex_name(v));
        }
        for g in 2..=depth {
            for e in &self.verticals {
                let _ = writeln!(
                    s,
                    "  \"{}_{}\" -> \"{}_{}\" [label=\"({})*L^{}\", taillabel=\"{}\"];",
                    self.vertex_name(e.source),
                    g - 1,
                    self.vertex_name(e.range),
                    g,
                    e.coeff,
                    g - 2,
                    e.position
                );
            }
        }
        for g in 1..=depth {
            for h in self.horizontals.iter().filter(|h| !h.trivial) {
                let _ = writeln!(
                    s,
                    "  \"{}_{}\" -> \"{}_{}\" [style=dashed, constraint=false, label=\"({})*L^{}\"];",
                    self.vertex_name(h.source),
                    g,
                    self.vertex_name(h.range),
                    g,
                    h.coeff,
                    g - 1
                );
            }
        }
        s.push_str("}\n");
        s
    }

    pub fn export_json(&self) -> String {
        let sub = self.csub.base();
        let names: Vec<String> = sub.letters().iter().map(|l| l.name.clone()).collect();
        let field = self.field();
        let (lo, hi) = field.perron_interval();
        let doc = DiagramJson {
            substitution: SubstitutionJson {
                letters: names.clone(),
                rules: sub.rules().iter().map(|r| r.iter().map(|&y| names[y].clone()).collect()).collect(),
                collar_names: self.csub.alphabet().iter().map(|c| c.name.clone()).collect(),
            },
            field: FieldJson {
                modulus: field.modulus().coeffs().iter().map(|c| c.to_string()).collect(),
                lo: lo.to_string(),
                hi: hi.to_string(),
            },
            vertices: self
                .csub
                .alphabet()
                .iter()
                .enumerate()
                .map(|(t, c)| VertexJson {
                    name: c.name.clone(),
                    left: names[c.left].clone(),
                    core: names[c.core].clone(),
                    right: names[c.right].clone(),
                    length: self.csub.length(t).to_string(),
                })
                .collect(),
            verticals: self
                .verticals
                .iter()
                .map(|e| VerticalJson {
                    src: self.vertex_name(e.source).to_string(),
                    rng: self.vertex_name(e.range).to_string(),
                    pos: e.position,
                    coeff: e.coeff.to_string(),
                })
                .collect(),
            horizontals: self
                .horizontals
                .iter()
                .map(|h| HorizontalJson {
                    src: self.vertex_name(h.source).to_string(),
                    rng: self.vertex_name(h.range).to_string(),
                    coeff: h.coeff.to_string(),
                    trivial: h.trivial,
                })
                .collect(),
            diagrams: self.recurrent_diagrams().iter().map(DiagramRefJson::from).collect(),
            transient_diagrams: self.transient_diagrams().iter().map(DiagramRefJson::from).collect(),
        };
        let mut text = serde_json::to_string_pretty(&doc).expect("diagram serializes");
        text.push('\n');
        text
    }

    /// Rebuilds a diagram from [`BratteliDiagram::export_json`] output and
    /// checks every stored template against the rebuilt one.
    pub fn import_json(text: &str) -> Result<Self, DiagramError> {
        let doc: DiagramJson = serde_json::from_str(text)?;
        let sj = &doc.substitution;
        let letter_of = |name: &str| {
            sj.letters
                .iter()
                .position(|l| l == name)
                .ok_or_else(|| SubstitutionError::UnknownLetter(name.to_string()))
        };
        let rules = sj
            .rules
            .iter()
            .map(|r| r.iter().map(|y| letter_of(y)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        let names: Vec<&str> = sj.letters.iter().map(String::as_str).collect();
        let rule_refs: Vec<&[usize]> = rules.iter().map(Vec::as_slice).collect();
        let sub = Substitution::new(&names, &rule_refs)?.with_collar_names(Some(sj.collar_names.clone()));
        let diagram = BratteliDiagram::new(sub.collared()?);

        let mismatch = |what: &str| DiagramError::Mismatch(what.to_string());
        let modulus = doc
            .field
            .modulus
            .iter()
            .map(|c| parse_rational(c).ok_or_else(|| ExactError::Parse(c.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        let lo = parse_rational(&doc.field.lo).ok_or_else(|| ExactError::Parse(doc.field.lo.clone()))?;
        let hi = parse_rational(&doc.field.hi).ok_or_else(|| ExactError::Parse(doc.field.hi.clone()))?;
        let stored_field = ModulusField::from_parts(Poly::new(modulus), lo, hi)?;
        if stored_field.as_ref() != diagram.field().as_ref() {
            return Err(mismatch("field"));
        }
        let field = diagram.field().clone();
        let vertex = |name: &str| diagram.vertex_index(name).ok_or_else(|| mismatch(&format!("vertex `{name}`")));
        if doc.vertices.len() != diagram.vertex_count() {
            return Err(mismatch("vertex count"));
        }
        for (t, vj) in doc.vertices.iter().enumerate() {
            let c = &diagram.csub.alphabet()[t];
            let same = vj.name == c.name
                && letter_of(&vj.left)? == c.left
                && letter_of(&vj.core)? == c.core
                && letter_of(&vj.right)? == c.right
                && AlgebraicNumber::parse(&field, &vj.length)? == *diagram.csub.length(t);
            if !same {
                return Err(mismatch(&format!("vertex `{}`", vj.name)));
            }
        }
        let verticals = doc
            .verticals
            .iter()
            .map(|v| {
                Ok(VerticalTemplate {
                    source: vertex(&v.src)?,
                    range: vertex(&v.rng)?,
                    position: v.pos,
                    coeff: AlgebraicNumber::parse(&field, &v.coeff)?,
                })
            })
            .collect::<Result<Vec<_>, DiagramError>>()?;
        if verticals != diagram.verticals {
            return Err(mismatch("vertical templates"));
        }
        let horizontals = doc
            .horizontals
            .iter()
            .map(|h| {
                Ok(HorizontalTemplate {
                    source: vertex(&h.src)?,
                    range: vertex(&h.rng)?,
                    coeff: AlgebraicNumber::parse(&field, &h.coeff)?,
                    trivial: h.trivial,
                })
            })
            .collect::<Result<Vec<_>, DiagramError>>()?;
        if horizontals != diagram.horizontals {
            return Err(mismatch("horizontal templates"));
        }
        let recurrent: Vec<DiagramTemplate> = doc.diagrams.iter().map(DiagramTemplate::from).collect();
        let transient: Vec<DiagramTemplate> = doc.transient_diagrams.iter().map(DiagramTemplate::from).collect();
        if recurrent != diagram.recurrent_diagrams() || transient != diagram.transient_diagrams() {
            return Err(mismatch("commutative diagrams"));
        }
        Ok(diagram)
    }
}

/// Arrows and simple cycles among `nodes` (a small set, so cycles are
/// found by depth-first search from each smallest member).
pub fn chains_of(nodes: &[DiagramTemplate]) -> DiagramChains {
    let n = nodes.len();
    let mut succ = vec![Vec::new(); n];
    let mut arrows = Vec::new();
    for (i, d) in nodes.iter().enumerate() {
        for (j, d2) in nodes.iter().enumerate() {
            if d.h_bot == d2.h_top {
                succ[i].push(j);
                arrows.push((i, j));
            }
        }
    }
    let mut cycles = BTreeSet::new();
    for start in 0..n {
        let mut path = vec![start];
        let mut on_path = vec![false; n];
        on_path[start] = true;
        simple_cycles_from(start, start, &succ, &mut path, &mut on_path, &mut cycles);
    }
    DiagramChains {
        nodes: nodes.to_vec(),
        arrows,
        cycles: cycles.into_iter().collect(),
    }
}

fn simple_cycles_from(
    start: usize,
    at: usize,
    succ: &[Vec<usize>],
    path: &mut Vec<usize>,
    on_path: &mut [bool],
    cycles: &mut BTreeSet<Vec<usize>>,
) {
    for &next in &succ[at] {
        if next == start {
            cycles.insert(path.clone());
        } else if next > start && !on_path[next] {
            on_path[next] = true;
            path.push(next);
            simple_cycles_from(start, next, succ, path, on_path, cycles);
            path.pop();
            on_path[next] = false;
        }
    }
}

#[derive(Serialize, Deserialize)]
struct DiagramJson {
    substitution: SubstitutionJson,
    field: FieldJson,
    vertices: Vec<VertexJson>,
    verticals: Vec<VerticalJson>,
    horizontals: Vec<HorizontalJson>,
    diagrams: Vec<DiagramRefJson>,
    transient_diagrams: Vec<DiagramRefJson>,
}

#[derive(Serialize, Deserialize)]
struct SubstitutionJson {
    letters: Vec<String>,
    rules: Vec<Vec<String>>,
    collar_names: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct FieldJson {
    /// Rational coefficients, lowest degree first.
    modulus: Vec<String>,
    lo: String,
    hi: String,
}

#[derive(Serialize, Deserialize)]
struct VertexJson {
    name: String,
    left: String,
    core: String,
    right: String,
    length: String,
}

#[derive(Serialize, Deserialize)]
struct VerticalJson {
    src: String,
    rng: String,
    pos: usize,
    coeff: String,
}

#[derive(Serialize, Deserialize)]
struct HorizontalJson {
    src: String,
    rng: String,
    coeff: String,
    trivial: bool,
}

#[derive(Serialize, Deserialize)]
struct DiagramRefJson {
    h_top: usize,
    e_left: usize,
    e_right: usize,
    h_bot: usize,
}

impl From<&DiagramTemplate> for DiagramRefJson {
    fn from(d: &DiagramTemplate) -> Self {
        DiagramRefJson {
            h_top: d.h_top,
            e_left: d.e_left,
            e_right: d.e_right,
            h_bot: d.h_bot,
        }
    }
}

impl From<&DiagramRefJson> for DiagramTemplate {
    fn from(d: &DiagramRefJson) -> Self {
        DiagramTemplate {
            h_top: d.h_top,
            e_left: d.e_left,
            e_right: d.e_right,
            h_bot: d.h_bot,
        }
    }
}

/// Vertical templates grouped by `(source, range)` names, for tests and
/// reports.
pub fn vertical_coeffs_by_name(d: &BratteliDiagram) -> BTreeMap<String, Vec<AlgebraicNumber>> {
    let mut out: BTreeMap<String, Vec<AlgebraicNumber>> = BTreeMap::new();
    for e in d.verticals() {
        out.entry(d.pair_name(e.source, e.range)).or_default().push(e.coeff.clone());
    }
    out
}
