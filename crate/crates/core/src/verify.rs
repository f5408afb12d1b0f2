//! Checks of the built-in fixtures against their published worked values.

use std::collections::BTreeSet;

use crate::diagram::{vertical_coeffs_by_name, BratteliDiagram};
use crate::exactnum::AlgebraicNumber;
use crate::fixtures;
use crate::paths::{decode, extremal_paths, format_periodic, pair_extremes, parse_prefix, vershik_successor};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub fixture: String,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn push(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        });
    }
}

struct Expected {
    /// `(name, left, core, right)` over base letter ids.
    collars: &'static [(&'static str, usize, usize, usize)],
    rules: &'static [(&'static str, &'static str)],
    verticals: fn(&BratteliDiagram) -> Vec<(&'static str, AlgebraicNumber)>,
    horizontals: fn(&BratteliDiagram) -> Vec<(&'static str, AlgebraicNumber)>,
    diagram_count: usize,
    /// Base-scale u-sum, for the named diagram or for every recurrent one.
    diagram_sum: fn(&BratteliDiagram) -> AlgebraicNumber,
    summed: Option<&'static str>,
    decode: (&'static str, &'static str, usize),
    mins: &'static [&'static str],
    maxs: &'static [&'static str],
}

fn fibonacci_expected() -> Expected {
    Expected {
        collars: &[("a", 0, 0, 1), ("b", 1, 0, 0), ("c", 1, 0, 1), ("d", 0, 1, 0)],
        rules: &[("a", "cd"), ("b", "ad"), ("c", "ad"), ("d", "b")],
        verticals: |d| {
            let f = d.field();
            let inv = f.one().try_div(&d.lambda().scale_int(2)).expect("lambda is nonzero");
            let mhalf = f.one().half().scale_int(-1);
            vec![
                ("ab", inv.clone()),
                ("ac", inv.clone()),
                ("ca", inv),
                ("bd", f.zero()),
                ("da", mhalf.clone()),
                ("db", mhalf.clone()),
                ("dc", mhalf),
            ]
        },
        horizontals: |d| {
            let half_phi = d.lambda().half();
            vec![
                ("h[ba]", d.field().one()),
                ("h[ad]", half_phi.clone()),
                ("h[db]", half_phi.clone()),
                ("h[cd]", half_phi.clone()),
                ("h[dc]", half_phi),
            ]
        },
        diagram_count: 2,
        diagram_sum: |d| d.field().integer(-1),
        summed: Some("h[ba] e[ac] e[bd] h[dc]"),
        decode: ("root=a; ac ca ab", "adbad", 0),
        mins: &["root=a; (ac ca)", "root=c; (ca ac)"],
        maxs: &["root=b; (bd db)", "root=d; (db bd)"],
    }
}

fn thue_morse_expected() -> Expected {
    Expected {
        collars: &[
            ("a", 1, 0, 0),
            ("b", 0, 0, 1),
            ("c", 0, 1, 1),
            ("d", 1, 1, 0),
            ("e", 1, 0, 1),
            ("f", 0, 1, 0),
        ],
        rules: &[("a", "bf"), ("b", "ec"), ("c", "de"), ("d", "fa"), ("e", "bc"), ("f", "da")],
        verticals: |d| {
            let h = d.field().one().half();
            let m = h.scale_int(-1);
            let mut v: Vec<(&'static str, AlgebraicNumber)> =
                ["ba", "be", "dc", "df", "eb", "fd"].into_iter().map(|n| (n, h.clone())).collect();
            v.extend(["ad", "af", "cb", "ce", "ec", "fa"].into_iter().map(|n| (n, m.clone())));
            v
        },
        horizontals: |_| Vec::new(),
        diagram_count: 4,
        diagram_sum: |d| d.field().one().half().scale_int(-3),
        summed: None,
        decode: ("root=a; ad dc cb", "ecdefabc", 5),
        mins: &["root=b; (be eb)", "root=d; (df fd)", "root=e; (eb be)", "root=f; (fd df)"],
        maxs: &["root=a; (af fa)", "root=c; (ce ec)", "root=e; (ec ce)", "root=f; (fa af)"],
    }
}

/// Runs every check for a built-in fixture; `None` for an unknown name.
pub fn verify_paper(fixture: &str) -> Option<Report> {
    let (canonical, expected) = match fixture {
        "fibonacci" | "fib" => ("fibonacci", fibonacci_expected()),
        "thue-morse" | "thue_morse" | "tm" => ("thue-morse", thue_morse_expected()),
        _ => return None,
    };
    let d = BratteliDiagram::new(fixtures::by_name(canonical)?);
    let mut report = Report {
        fixture: canonical.to_string(),
        checks: Vec::new(),
    };
    let csub = d.csub();

    let collars_ok = csub.len() == expected.collars.len()
        && expected.collars.iter().all(|&(n, l, c, r)| {
            csub.index_of(n).is_some_and(|t| {
                let x = &csub.alphabet()[t];
                (x.left, x.core, x.right) == (l, c, r)
            })
        });
    report.push("collared alphabet", collars_ok, format!("{} letters", csub.len()));
    let rules_ok = expected
        .rules
        .iter()
        .all(|&(n, w)| csub.index_of(n).is_some_and(|t| csub.word_name(csub.rule(t)) == w));
    let mut order: Vec<usize> = (0..csub.len()).collect();
    order.sort_by_key(|&t| csub.name(t).to_string());
    let shown: Vec<String> = order.into_iter().map(|t| format!("{}={}", csub.name(t), csub.word_name(csub.rule(t)))).collect();
    report.push("collared rules", rules_ok, shown.join(" "));

    let lambda = d.lambda();
    let eigen_ok = (0..csub.len()).all(|t| {
        let sum = csub.rule(t).iter().fold(d.field().zero(), |acc, &w| &acc + csub.length(w));
        sum == &lambda * csub.length(t)
    });
    report.push("length eigen-equation", eigen_ok, "");

    let by_name = vertical_coeffs_by_name(&d);
    let want = (expected.verticals)(&d);
    let verticals_ok = want.len() == by_name.len()
        && want.iter().all(|(n, c)| by_name.get(*n).is_some_and(|cs| cs.iter().all(|x| x == c)));
    report.push("vertical labels", verticals_ok, format!("{} templates", d.verticals().len()));

    let nontrivial: Vec<usize> = (0..d.horizontals().len())
        .filter(|&h| !d.horizontal(h).trivial && d.horizontal(h).coeff.sign() < 0)
        .collect();
    let want = (expected.horizontals)(&d);
    let horizontals_ok = if want.is_empty() {
        nontrivial.iter().all(|&h| d.horizontal(h).coeff.abs() == d.field().one())
    } else {
        let names: BTreeSet<String> = nontrivial.iter().map(|&h| d.horizontal_name(h)).collect();
        let want_names: BTreeSet<String> = want.iter().map(|(n, _)| n.to_string()).collect();
        names == want_names
            && nontrivial
                .iter()
                .all(|&h| want.iter().any(|(n, c)| *n == d.horizontal_name(h) && d.horizontal(h).coeff.abs() == *c))
    };
    report.push("horizontal labels", horizontals_ok, format!("{} adjacencies", nontrivial.len()));

    let recurrent = d.recurrent_diagrams();
    let base_sum = (expected.diagram_sum)(&d);
    let summed: Vec<_> = recurrent
        .iter()
        .filter(|q| expected.summed.is_none_or(|n| d.diagram_name(q) == n))
        .collect();
    let sums_ok = recurrent.iter().all(|q| d.residual(q).is_zero())
        && !summed.is_empty()
        && summed.iter().all(|q| {
            (2..=6u32).all(|n| {
                let lhs = &d.vertical_label(q.e_left, n) + &d.horizontal_label(q.h_bot, n);
                let rhs = &d.horizontal_label(q.h_top, n - 1) + &d.vertical_label(q.e_right, n);
                lhs == rhs && lhs == &base_sum * &d.field().lambda_pow(n - 2)
            })
    });
    report.push(
        "commutative diagrams",
        recurrent.len() == expected.diagram_count && sums_ok,
        format!("{} recurrent, sum {}", recurrent.len(), base_sum),
    );

    let (lit, word, idx) = expected.decode;
    let decoded = parse_prefix(&d, lit).ok().map(|g| decode(&d, &g));
    let decode_ok = decoded.as_ref().is_some_and(|p| csub.word_name(&p.word) == word && p.puncture_index == idx);
    let detail = decoded.map_or_else(String::new, |p| format!("{} at {}", csub.word_name(&p.word), p.puncture_index));
    report.push("decoding", decode_ok, detail);

    let (mins, maxs) = extremal_paths(&d);
    let show = |v: &[crate::paths::EventuallyPeriodicPath]| -> Vec<String> { v.iter().map(|x| format_periodic(&d, x)).collect() };
    report.push(
        "extremal paths",
        show(&mins) == expected.mins && show(&maxs) == expected.maxs,
        format!("{} min, {} max", mins.len(), maxs.len()),
    );
    let psi = pair_extremes(&d);
    let psi_ok = psi.as_ref().is_ok_and(|p| {
        maxs.iter()
            .all(|m| vershik_successor(&d, p, m).ok().as_ref() == p.image(m))
    });
    report.push("psi pairing and V(x_max)", psi_ok, "");

    report.push("regularity", d.is_regular(), "");
    report.push("distinct infinite paths", d.hypothesis_check().is_ok(), "");
    let json = d.export_json();
    let round = BratteliDiagram::import_json(&json).map(|e| e.export_json());
    report.push("json round trip", round.is_ok_and(|r| r == json), "");
    Some(report)
}
