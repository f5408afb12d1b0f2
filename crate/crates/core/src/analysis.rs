//! Distances from the puncture tile to the boundary of its supertiles, the
//! G/F dichotomy for eventually periodic paths, finite-depth AF-regions and
//! the minimality horizon.

use crate::diagram::BratteliDiagram;
use crate::exactnum::AlgebraicNumber;
use crate::paths::{decode, EdgeId, EventuallyPeriodicPath, PathPrefix};
use crate::substitution::{primitivity_index, SubstitutionError};

/// `gaps[n - 1] = (g_L(n), g_R(n))`: distance from the left (right) end of
/// the generation-1 tile to the left (right) end of the generation-`n`
/// supertile.
#[derive(Debug, Clone, PartialEq)]
pub struct GapProfile {
    pub gaps: Vec<(AlgebraicNumber, AlgebraicNumber)>,
}

impl GapProfile {
    /// `dist(t_1, boundary of t_n)`.
    pub fn distance(&self, n: usize) -> AlgebraicNumber {
        let (l, r) = &self.gaps[n - 1];
        if (l - r).sign() <= 0 {
            l.clone()
        } else {
            r.clone()
        }
    }

    pub fn generations(&self) -> usize {
        self.gaps.len()
    }
}

/// Lengths of the letters before and after edge `e` in its supertile.
fn offsets(d: &BratteliDiagram, e: EdgeId) -> (AlgebraicNumber, AlgebraicNumber) {
    let t = d.vertical(e);
    let csub = d.csub();
    let rule = csub.rule(t.range);
    let sum = |s: &[usize]| s.iter().fold(d.field().zero(), |acc, &w| &acc + csub.length(w));
    (sum(&rule[..t.position]), sum(&rule[t.position + 1..]))
}

/// Gap profile accumulated edge by edge: edge `k` adds its base-scale side
/// offsets times `lambda^k`.
fn gaps_along(d: &BratteliDiagram, edges: impl Iterator<Item = EdgeId>) -> GapProfile {
    let lambda = d.lambda();
    let mut power = d.field().one();
    let mut l = d.field().zero();
    let mut r = d.field().zero();
    let mut gaps = vec![(l.clone(), r.clone())];
    for e in edges {
        let (dl, dr) = offsets(d, e);
        l = &l + &(&dl * &power);
        r = &r + &(&dr * &power);
        gaps.push((l.clone(), r.clone()));
        power = &power * &lambda;
    }
    GapProfile { gaps }
}

pub fn gap_profile(d: &BratteliDiagram, gamma: &PathPrefix) -> GapProfile {
    gaps_along(d, gamma.edges.iter().copied())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GfClass {
    /// The cycle stays on one side: the distance to that boundary is bounded.
    F { side: Side },
    /// Indices into the cycle of the first edge that is not leftmost and the
    /// first that is not rightmost; both gaps grow without bound.
    G { not_leftmost: usize, not_rightmost: usize },
}

impl GfClass {
    pub fn is_f(&self) -> bool {
        matches!(self, GfClass::F { .. })
    }
}

pub fn classify_gf(d: &BratteliDiagram, x: &EventuallyPeriodicPath) -> GfClass {
    let cycle = x.cycle();
    let not_left = cycle.iter().position(|&e| d.vertical(e).position != 0);
    let not_right = cycle.iter().position(|&e| !d.is_last(e));
    match (not_left, not_right) {
        (None, _) => GfClass::F { side: Side::Left },
        (_, None) => GfClass::F { side: Side::Right },
        (Some(a), Some(b)) => GfClass::G {
            not_leftmost: a,
            not_rightmost: b,
        },
    }
}

/// First generation at which `dist(t_1, boundary of t_n)` exceeds `bound`,
/// for a G path. Every pass through the cycle adds at least the shortest
/// tile length to each side, so the search stops after
/// `preamble + cycle * (ceil(bound / shortest) + 2)` edges.
pub fn generations_to_exceed(d: &BratteliDiagram, x: &EventuallyPeriodicPath, bound: &AlgebraicNumber) -> Option<usize> {
    if classify_gf(d, x).is_f() {
        return None;
    }
    let shortest = d
        .csub()
        .lengths()
        .iter()
        .cloned()
        .reduce(|a, b| if (&a - &b).sign() <= 0 { a } else { b })
        .expect("nonempty alphabet");
    let passes = (bound.try_div(&shortest).expect("lengths are positive").to_f64().max(0.0).ceil() as usize) + 2;
    let cap = x.periodic_from() + x.cycle().len() * passes;
    let lambda = d.lambda();
    let mut power = d.field().one();
    let (mut l, mut r) = (d.field().zero(), d.field().zero());
    for k in 0..cap {
        let (dl, dr) = offsets(d, x.edge(k));
        l = &l + &(&dl * &power);
        r = &r + &(&dr * &power);
        power = &power * &lambda;
        if (&l - bound).sign() > 0 && (&r - bound).sign() > 0 {
            return Some(k + 2);
        }
    }
    None
}

/// Punctures of every tile of the generation-`n` supertile of `x`, in the
/// frame of the puncture of `x`.
pub fn af_region(d: &BratteliDiagram, x: &EventuallyPeriodicPath, n: usize) -> Vec<AlgebraicNumber> {
    assert!(n >= 1, "depth counts generations from 1");
    decode(d, &x.prefix(n - 1)).punctures()
}

/// Number of generations after which every vertex reaches every vertex.
pub fn minimality_horizon(d: &BratteliDiagram) -> Result<usize, SubstitutionError> {
    primitivity_index(&d.csub().matrix())
}
