//! One-dimensional substitutions: parsing, primitivity, exact Perron tile
//! lengths, legal words, and the induced substitution on collared letters.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::exactnum::{charpoly, AlgebraicNumber, ExactError, ModulusField};

/// Word length up to which the complexity screen looks for periodicity.
pub const DEFAULT_SCREEN_LENGTH: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SubstitutionError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown letter `{0}`")]
    UnknownLetter(String),
    #[error("empty rule for letter `{0}`")]
    EmptyRule(String),
    #[error("no rule for letter `{0}`")]
    MissingRule(String),
    #[error("letter `{0}` declared twice")]
    DuplicateLetter(String),
    #[error("substitution matrix is not primitive")]
    NotPrimitive,
    #[error("periodic subshift detected: p({n}) = {count} <= {n}")]
    PeriodicDetected { n: usize, count: usize },
    #[error("length eigen-system is singular")]
    SingularSystem,
    #[error("collared substitution produced an illegal collar")]
    IllegalCollarProduced,
    #[error("collar-names lists {given} names for {expected} collared letters")]
    CollarNameCount { given: usize, expected: usize },
    #[error(transparent)]
    Exact(#[from] ExactError),
}

/// A prototile up to translation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Letter {
    pub id: usize,
    pub name: String,
}

#[derive(Debug, Clone)]
pub struct Substitution {
    letters: Vec<Letter>,
    rules: Vec<Vec<usize>>,
    /// `matrix[x][y]` counts occurrences of `y` in `rules[x]`.
    matrix: Vec<Vec<i64>>,
    field: Arc<ModulusField>,
    lengths: Vec<AlgebraicNumber>,
    collar_names: Option<Vec<String>>,
}

impl Substitution {
    /// Validates primitivity and solves for the tile lengths. No
    /// aperiodicity screen is run, so periodic systems such as `0 -> 00`
    /// are accepted here.
    pub fn new(names: &[&str], rules: &[&[usize]]) -> Result<Self, SubstitutionError> {
        let names: Vec<String> = names.iter().map(|s| s.to_string()).collect();
        let rules: Vec<Vec<usize>> = rules.iter().map(|r| r.to_vec()).collect();
        Substitution::build(names, rules, None)
    }

    fn build(
        names: Vec<String>,
        rules: Vec<Vec<usize>>,
        collar_names: Option<Vec<String>>,
    ) -> Result<Self, SubstitutionError> {
        let n = names.len();
        let mut seen = BTreeSet::new();
        for name in &names {
            if !seen.insert(name.clone()) {
                return Err(SubstitutionError::DuplicateLetter(name.clone()));
            }
        }
        if rules.len() != n {
            return Err(SubstitutionError::MissingRule(names[rules.len().min(n.saturating_sub(1))].clone()));
        }
        for (x, rule) in rules.iter().enumerate() {
            if rule.is_empty() {
                return Err(SubstitutionError::EmptyRule(names[x].clone()));
            }
            if let Some(&y) = rule.iter().find(|&&y| y >= n) {
                return Err(SubstitutionError::UnknownLetter(y.to_string()));
            }
        }
        let mut matrix = vec![vec![0i64; n]; n];
        for (x, rule) in rules.iter().enumerate() {
            for &y in rule {
                matrix[x][y] += 1;
            }
        }
        primitivity_index(&matrix)?;
        let field = ModulusField::from_charpoly(&charpoly(&matrix))?;
        let lengths = solve_lengths(&matrix, &field)?;
        let letters = names
            .into_iter()
            .enumerate()
            .map(|(id, name)| Letter { id, name })
            .collect();
        Ok(Substitution {
            letters,
            rules,
            matrix,
            field,
            lengths,
            collar_names,
        })
    }

    /// Parses the line-oriented spec format and runs every validation,
    /// including the aperiodicity screen.
    pub fn parse_spec(text: &str) -> Result<Self, SubstitutionError> {
        let sub = Substitution::parse_spec_unscreened(text)?;
        sub.aperiodicity_screen(DEFAULT_SCREEN_LENGTH)?;
        Ok(sub)
    }

    /// As [`Substitution::parse_spec`] without the aperiodicity screen.
    pub fn parse_spec_unscreened(text: &str) -> Result<Self, SubstitutionError> {
        let parsed = parse_spec_text(text)?;
        Substitution::build(parsed.names, parsed.rules, parsed.collar_names)
    }

    /// Replaces the collar naming (checked when the collared alphabet is
    /// built).
    pub fn with_collar_names(mut self, names: Option<Vec<String>>) -> Self {
        self.collar_names = names;
        self
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn rule(&self, letter: usize) -> &[usize] {
        &self.rules[letter]
    }

    pub fn rules(&self) -> &[Vec<usize>] {
        &self.rules
    }

    pub fn matrix(&self) -> &[Vec<i64>] {
        &self.matrix
    }

    pub fn field(&self) -> &Arc<ModulusField> {
        &self.field
    }

    pub fn lambda(&self) -> AlgebraicNumber {
        self.field.lambda()
    }

    pub fn lengths(&self) -> &[AlgebraicNumber] {
        &self.lengths
    }

    pub fn length(&self, letter: usize) -> &AlgebraicNumber {
        &self.lengths[letter]
    }

    pub fn collar_names(&self) -> Option<&[String]> {
        self.collar_names.as_deref()
    }

    pub fn letter_index(&self, name: &str) -> Option<usize> {
        self.letters.iter().position(|l| l.name == name)
    }

    pub fn word_name(&self, word: &[usize]) -> String {
        let single = self.letters.iter().all(|l| l.name.chars().count() == 1);
        let parts: Vec<&str> = word.iter().map(|&x| self.letters[x].name.as_str()).collect();
        if single {
            parts.concat()
        } else {
            parts.join(" ")
        }
    }

    /// `sigma` applied letter by letter.
    pub fn apply(&self, word: &[usize]) -> Vec<usize> {
        word.iter().flat_map(|&x| self.rules[x].iter().copied()).collect()
    }

    /// Solves `M l = lambda l` with `l(first) = 1` over `Q(lambda)`.
    pub fn perron_lengths(&self) -> Result<Vec<AlgebraicNumber>, SubstitutionError> {
        solve_lengths(&self.matrix, &self.field)
    }

    /// Legal words of length `n` (factors of the subshift).
    ///
    /// Legal 2-words are the closure of the 2-factors of every `sigma(x)`
    /// under `ab -> 2-factors of sigma(a) sigma(b)`. Longer words are the
    /// `n`-factors of `sigma^k(ab)` over legal `ab`, once every
    /// `sigma^k(x)` has length at least `n - 1`: then each legal `n`-word
    /// straddles at most two consecutive level-`k` blocks.
    pub fn legal_words(&self, n: usize) -> BTreeSet<Vec<usize>> {
        assert!(n >= 1, "word length must be positive");
        if n == 1 {
            // primitive: every letter occurs
            return (0..self.len()).map(|x| vec![x]).collect();
        }
        let pairs = self.legal_pairs();
        let mut k = 0;
        let mut images: Vec<Vec<usize>> = (0..self.len()).map(|x| vec![x]).collect();
        while images.iter().map(Vec::len).min().unwrap_or(0) < n - 1 {
            images = images.iter().map(|w| self.apply(w)).collect();
            k += 1;
        }
        let _ = k;
        let mut out = BTreeSet::new();
        for (a, b) in &pairs {
            let mut w = images[*a].clone();
            w.extend_from_slice(&images[*b]);
            for f in w.windows(n) {
                out.insert(f.to_vec());
            }
        }
        out
    }

    fn legal_pairs(&self) -> BTreeSet<(usize, usize)> {
        let mut pairs = BTreeSet::new();
        let mut frontier: Vec<(usize, usize)> = Vec::new();
        for rule in &self.rules {
            for w in rule.windows(2) {
                if pairs.insert((w[0], w[1])) {
                    frontier.push((w[0], w[1]));
                }
            }
        }
        while let Some((a, b)) = frontier.pop() {
            let w = self.apply(&[a, b]);
            for f in w.windows(2) {
                if pairs.insert((f[0], f[1])) {
                    frontier.push((f[0], f[1]));
                }
            }
        }
        pairs
    }

    /// Complexity screen: the subshift is periodic as soon as `p(n) <= n`
    /// for some `n` (Morse-Hedlund). Passing is evidence, not proof, of
    /// aperiodicity.
    pub fn aperiodicity_screen(&self, max_len: usize) -> Result<(), SubstitutionError> {
        for n in 1..=max_len {
            let count = self.legal_words(n).len();
            if count <= n {
                return Err(SubstitutionError::PeriodicDetected { n, count });
            }
        }
        Ok(())
    }

    /// One collared letter per legal 3-word, in lexicographic order of the
    /// 3-words. Names come from `collar-names` when given, else `a`, `b`, ...
    pub fn collar_alphabet(&self) -> Result<Vec<CollaredLetter>, SubstitutionError> {
        let words = self.legal_words(3);
        let names: Vec<String> = match &self.collar_names {
            Some(names) => {
                if names.len() != words.len() {
                    return Err(SubstitutionError::CollarNameCount {
                        given: names.len(),
                        expected: words.len(),
                    });
                }
                names.clone()
            }
            None => (0..words.len()).map(default_collar_name).collect(),
        };
        Ok(words
            .into_iter()
            .zip(names)
            .map(|(w, name)| CollaredLetter {
                left: w[0],
                core: w[1],
                right: w[2],
                name,
            })
            .collect())
    }

    pub fn collared(&self) -> Result<CollaredSubstitution, SubstitutionError> {
        CollaredSubstitution::new(self.clone())
    }
}

fn default_collar_name(i: usize) -> String {
    if i < 26 {
        ((b'a' + i as u8) as char).to_string()
    } else {
        format!("t{i}")
    }
}

/// Smallest `k` with `M^k` strictly positive, searched up to the Wielandt
/// bound `(n-1)^2 + 1`.
pub fn primitivity_index(matrix: &[Vec<i64>]) -> Result<usize, SubstitutionError> {
    let n = matrix.len();
    if n == 0 || matrix.iter().any(|r| r.len() != n || r.iter().any(|&v| v < 0)) {
        return Err(SubstitutionError::NotPrimitive);
    }
    let base: Vec<Vec<bool>> = matrix.iter().map(|r| r.iter().map(|&v| v > 0).collect()).collect();
    let bound = (n - 1) * (n - 1) + 1;
    let mut power = base.clone();
    for k in 1..=bound {
        if power.iter().all(|r| r.iter().all(|&b| b)) {
            return Ok(k);
        }
        let mut next = vec![vec![false; n]; n];
        for i in 0..n {
            for l in 0..n {
                if power[i][l] {
                    for j in 0..n {
                        next[i][j] |= base[l][j];
                    }
                }
            }
        }
        power = next;
    }
    Err(SubstitutionError::NotPrimitive)
}

fn solve_lengths(
    matrix: &[Vec<i64>],
    field: &Arc<ModulusField>,
) -> Result<Vec<AlgebraicNumber>, SubstitutionError> {
    let n = matrix.len();
    let lambda = field.lambda();
    if n == 1 {
        return Ok(vec![field.one()]);
    }
    // Unknowns l_1..l_{n-1}; the l_0 = 1 column moves to the right side.
    let mut rows: Vec<Vec<AlgebraicNumber>> = (0..n)
        .map(|x| {
            let mut row: Vec<AlgebraicNumber> = (1..n)
                .map(|y| {
                    let m = field.integer(matrix[x][y]);
                    if x == y {
                        &m - &lambda
                    } else {
                        m
                    }
                })
                .collect();
            let c0 = field.integer(matrix[x][0]);
            let c0 = if x == 0 { &c0 - &lambda } else { c0 };
            row.push(-c0);
            row
        })
        .collect();
    let unknowns = n - 1;
    let mut pivot_row = 0;
    let mut pivots = Vec::with_capacity(unknowns);
    for col in 0..unknowns {
        let found = (pivot_row..n).find(|&r| !rows[r][col].is_zero());
        let Some(r) = found else {
            return Err(SubstitutionError::SingularSystem);
        };
        rows.swap(pivot_row, r);
        let piv = rows[pivot_row][col].clone();
        let normalized: Vec<AlgebraicNumber> = rows[pivot_row]
            .iter()
            .map(|v| v.try_div(&piv))
            .collect::<Result<_, _>>()?;
        rows[pivot_row] = normalized;
        for r2 in 0..n {
            if r2 == pivot_row || rows[r2][col].is_zero() {
                continue;
            }
            let factor = rows[r2][col].clone();
            for c in 0..=unknowns {
                let sub = &factor * &rows[pivot_row][c];
                rows[r2][c] = &rows[r2][c] - &sub;
            }
        }
        pivots.push(pivot_row);
        pivot_row += 1;
    }
    // Remaining rows must be consistent.
    for row in rows.iter().skip(pivot_row) {
        if !row[unknowns].is_zero() {
            return Err(SubstitutionError::SingularSystem);
        }
    }
    let mut lengths = vec![field.one()];
    for (col, &r) in pivots.iter().enumerate() {
        debug_assert_eq!(col, r);
        lengths.push(rows[r][unknowns].clone());
    }
    if lengths.iter().any(|l| l.sign() <= 0) {
        return Err(SubstitutionError::SingularSystem);
    }
    Ok(lengths)
}

struct ParsedSpec {
    names: Vec<String>,
    rules: Vec<Vec<usize>>,
    collar_names: Option<Vec<String>>,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> SubstitutionError {
    SubstitutionError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn parse_spec_text(text: &str) -> Result<ParsedSpec, SubstitutionError> {
    let mut names: Option<Vec<String>> = None;
    let mut rules: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut collar_names = None;
    for (ln, raw) in text.lines().enumerate() {
        let line_no = ln + 1;
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let indent = content.len() - content.trim_start().len();
        let Some((head, body)) = content.split_once(':') else {
            return Err(syntax(line_no, indent + 1, "expected `key: value`"));
        };
        let body_col = head.len() + 2;
        let key = head.trim();
        let tokens: Vec<&str> = body.split_whitespace().collect();
        if key == "letters" {
            if names.is_some() {
                return Err(syntax(line_no, indent + 1, "`letters` declared twice"));
            }
            if tokens.is_empty() {
                return Err(syntax(line_no, body_col, "no letters declared"));
            }
            let mut seen = BTreeSet::new();
            for t in &tokens {
                if !seen.insert(*t) {
                    return Err(SubstitutionError::DuplicateLetter(t.to_string()));
                }
            }
            names = Some(tokens.iter().map(|s| s.to_string()).collect());
        } else if let Some(letter) = key.strip_prefix("rule") {
            let letter = letter.trim();
            let Some(names) = &names else {
                return Err(syntax(line_no, indent + 1, "`rule` before `letters`"));
            };
            if letter.is_empty() {
                return Err(syntax(line_no, indent + 5, "rule is missing its letter"));
            }
            let x = names
                .iter()
                .position(|n| n == letter)
                .ok_or_else(|| SubstitutionError::UnknownLetter(letter.to_string()))?;
            if rules.contains_key(&x) {
                return Err(syntax(line_no, indent + 1, format!("second rule for `{letter}`")));
            }
            if tokens.is_empty() {
                return Err(SubstitutionError::EmptyRule(letter.to_string()));
            }
            let word = tokens
                .iter()
                .map(|t| {
                    names
                        .iter()
                        .position(|n| n == t)
                        .ok_or_else(|| SubstitutionError::UnknownLetter(t.to_string()))
                })
                .collect::<Result<Vec<_>, _>>()?;
            rules.insert(x, word);
        } else if key == "collar-names" {
            if tokens.is_empty() {
                return Err(syntax(line_no, body_col, "no collar names"));
            }
            let mut seen = BTreeSet::new();
            for t in &tokens {
                if !seen.insert(*t) {
                    return Err(syntax(line_no, body_col, format!("duplicate collar name `{t}`")));
                }
            }
            collar_names = Some(tokens.iter().map(|s| s.to_string()).collect());
        } else {
            return Err(syntax(line_no, indent + 1, format!("unknown key `{key}`")));
        }
    }
    let names = names.ok_or_else(|| syntax(1, 1, "missing `letters` line"))?;
    let mut ordered = Vec::with_capacity(names.len());
    for (x, name) in names.iter().enumerate() {
        match rules.remove(&x) {
            Some(r) => ordered.push(r),
            None => return Err(SubstitutionError::MissingRule(name.clone())),
        }
    }
    Ok(ParsedSpec {
        names,
        rules: ordered,
        collar_names,
    })
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.letters.iter().map(|l| l.name.as_str()).collect();
        writeln!(f, "letters: {}", names.join(" "))?;
        for (x, rule) in self.rules.iter().enumerate() {
            let word: Vec<&str> = rule.iter().map(|&y| self.letters[y].name.as_str()).collect();
            writeln!(f, "rule {}: {}", self.letters[x].name, word.join(" "))?;
        }
        if let Some(names) = &self.collar_names {
            writeln!(f, "collar-names: {}", names.join(" "))?;
        }
        Ok(())
    }
}

/// A letter decorated with its left and right neighbours.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CollaredLetter {
    pub left: usize,
    pub core: usize,
    pub right: usize,
    pub name: String,
}

#[derive(Debug, Clone)]
pub struct CollaredSubstitution {
    base: Substitution,
    alphabet: Vec<CollaredLetter>,
    rules: Vec<Vec<usize>>,
    lengths: Vec<AlgebraicNumber>,
}

impl CollaredSubstitution {
    /// For `(l, x, r)`, expands `sigma(l) sigma(x) sigma(r)` and gives each
    /// letter of the middle block its neighbours in that expansion.
    pub fn new(base: Substitution) -> Result<Self, SubstitutionError> {
        let alphabet = base.collar_alphabet()?;
        let index: BTreeMap<(usize, usize, usize), usize> = alphabet
            .iter()
            .enumerate()
            .map(|(i, c)| ((c.left, c.core, c.right), i))
            .collect();
        let mut rules = Vec::with_capacity(alphabet.len());
        for c in &alphabet {
            let left = base.rule(c.left);
            let mid = base.rule(c.core);
            let w = base.apply(&[c.left, c.core, c.right]);
            let start = left.len();
            let mut rule = Vec::with_capacity(mid.len());
            for i in start..start + mid.len() {
                let key = (w[i - 1], w[i], w[i + 1]);
                let t = *index.get(&key).ok_or(SubstitutionError::IllegalCollarProduced)?;
                rule.push(t);
            }
            rules.push(rule);
        }
        let lengths = alphabet.iter().map(|c| base.length(c.core).clone()).collect();
        let csub = CollaredSubstitution {
            base,
            alphabet,
            rules,
            lengths,
        };
        primitivity_index(&csub.matrix()).map_err(|_| SubstitutionError::NotPrimitive)?;
        Ok(csub)
    }

    pub fn base(&self) -> &Substitution {
        &self.base
    }

    pub fn alphabet(&self) -> &[CollaredLetter] {
        &self.alphabet
    }

    pub fn len(&self) -> usize {
        self.alphabet.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphabet.is_empty()
    }

    pub fn rule(&self, t: usize) -> &[usize] {
        &self.rules[t]
    }

    pub fn rules(&self) -> &[Vec<usize>] {
        &self.rules
    }

    pub fn length(&self, t: usize) -> &AlgebraicNumber {
        &self.lengths[t]
    }

    pub fn lengths(&self) -> &[AlgebraicNumber] {
        &self.lengths
    }

    pub fn field(&self) -> &Arc<ModulusField> {
        self.base.field()
    }

    pub fn name(&self, t: usize) -> &str {
        &self.alphabet[t].name
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.alphabet.iter().position(|c| c.name == name)
    }

    /// `matrix[t][s]` counts occurrences of `s` in `rules[t]`.
    pub fn matrix(&self) -> Vec<Vec<i64>> {
        let n = self.alphabet.len();
        let mut m = vec![vec![0i64; n]; n];
        for (t, rule) in self.rules.iter().enumerate() {
            for &s in rule {
                m[t][s] += 1;
            }
        }
        m
    }

    pub fn apply(&self, word: &[usize]) -> Vec<usize> {
        word.iter().flat_map(|&t| self.rules[t].iter().copied()).collect()
    }

    pub fn word_name(&self, word: &[usize]) -> String {
        let single = self.alphabet.iter().all(|c| c.name.chars().count() == 1);
        let parts: Vec<&str> = word.iter().map(|&t| self.alphabet[t].name.as_str()).collect();
        if single {
            parts.concat()
        } else {
            parts.join(" ")
        }
    }

    /// `l x r` with the core marked, e.g. `0 0̇ 1`.
    pub fn collar_text(&self, t: usize) -> String {
        let c = &self.alphabet[t];
        let letters = self.base.letters();
        format!(
            "{} {}\u{307} {}",
            letters[c.left].name, letters[c.core].name, letters[c.right].name
        )
    }
}
