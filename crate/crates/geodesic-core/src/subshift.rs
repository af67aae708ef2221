//! The subshift of finite type induced by the restricted Markov partition.
//!
//! A transition `x -> y` is admissible when part `y` is contained in the
//! branch image of part `x`. Containment is all-or-nothing by the Markov
//! property, so one exact interior point decides each entry; the
//! certification test re-checks every entry on all stored sample points.

use std::collections::HashMap;

use thiserror::Error;

use crate::exec::{self, ExecMode};
use crate::hurwitz::Partition;

pub type Letter = u16;

#[derive(Debug, Error, PartialEq)]
pub enum SubshiftError {
    #[error("containment test for pair ({x}, {y}) hit boundaries on every sample")]
    Undecidable { x: usize, y: usize },
    #[error("word is not admissible at position {0}")]
    Inadmissible(usize),
    #[error("word is not cyclically admissible")]
    CyclicallyInadmissible,
    #[error("no glue word for letter pair ({0}, {1})")]
    MissingGlue(Letter, Letter),
    #[error("empty word")]
    EmptyWord,
}

/// A finite admissible symbol sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn empty() -> Word {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> Option<Letter> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<Letter> {
        self.0.last().copied()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn rotation(&self, r: usize) -> Word {
        let n = self.0.len();
        Word((0..n).map(|i| self.0[(i + r) % n]).collect())
    }

    /// Smallest period `p` with `w[i] == w[i mod p]`.
    pub fn smallest_period(&self) -> usize {
        let n = self.0.len();
        for p in 1..=n {
            if n % p == 0 && (p..n).all(|i| self.0[i] == self.0[i - p]) {
                return p;
            }
        }
        n
    }

    pub fn is_primitive(&self) -> bool {
        !self.0.is_empty() && self.smallest_period() == self.0.len()
    }

    /// Comma-joined labels, the export format for word lists.
    pub fn to_label_string(&self) -> String {
        self.0
            .iter()
            .map(|l| l.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Dense boolean transition matrix with bit rows.
#[derive(Debug, Clone)]
pub struct TransitionMatrix {
    n: usize,
    words: usize,
    rows: Vec<u64>,
}

impl TransitionMatrix {
    pub fn from_rows(n: usize, entries: impl Fn(usize, usize) -> bool) -> TransitionMatrix {
        let words = n.div_ceil(64);
        let mut rows = vec![0u64; n * words];
        for x in 0..n {
            for y in 0..n {
                if entries(x, y) {
                    rows[x * words + y / 64] |= 1 << (y % 64);
                }
            }
        }
        TransitionMatrix { n, words, rows }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.rows[x * self.words + y / 64] >> (y % 64) & 1 == 1
    }

    pub fn successors(&self, x: usize) -> impl Iterator<Item = Letter> + '_ {
        let row = &self.rows[x * self.words..(x + 1) * self.words];
        (0..self.n)
            .filter(move |&y| row[y / 64] >> (y % 64) & 1 == 1)
            .map(|y| y as Letter)
    }

    pub fn out_degree(&self, x: usize) -> usize {
        self.rows[x * self.words..(x + 1) * self.words]
            .iter()
            .map(|w| w.count_ones() as usize)
            .sum()
    }

    /// Total number of ones, i.e. the count of admissible 2-words.
    pub fn edge_count(&self) -> usize {
        (0..self.n).map(|x| self.out_degree(x)).sum()
    }

    pub fn is_admissible(&self, w: &[Letter]) -> bool {
        w.windows(2).all(|p| self.get(p[0] as usize, p[1] as usize))
    }

    pub fn is_cyclically_admissible(&self, w: &[Letter]) -> bool {
        !w.is_empty() && self.is_admissible(w) && self.get(w[w.len() - 1] as usize, w[0] as usize)
    }

    /// Boolean matrix product.
    fn bool_mul(&self, other: &TransitionMatrix) -> TransitionMatrix {
        let n = self.n;
        let words = self.words;
        let mut rows = vec![0u64; n * words];
        for x in 0..n {
            for y in self.successors(x) {
                let src = &other.rows[y as usize * words..(y as usize + 1) * words];
                let dst = &mut rows[x * words..(x + 1) * words];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d |= s;
                }
            }
        }
        TransitionMatrix { n, words, rows }
    }

    fn all_ones(&self) -> bool {
        (0..self.n).all(|x| self.out_degree(x) == self.n)
    }

    /// Exact word counts `#A^n(x, y)` via u128 matrix powers (small n only).
    pub fn count_words(&self, n: usize, from: Option<Letter>, to: Option<Letter>) -> u128 {
        if n == 0 {
            return match (from, to) {
                (Some(a), Some(b)) if a != b => 0,
                _ => 1,
            };
        }
        // v[y] = number of admissible words of length n ending at y, starting per `from`
        let mut v = vec![0u128; self.n];
        match from {
            Some(a) => v[a as usize] = 1,
            None => v.iter_mut().for_each(|e| *e = 1),
        }
        for _ in 1..n {
            let mut next = vec![0u128; self.n];
            for x in 0..self.n {
                if v[x] == 0 {
                    continue;
                }
                for y in self.successors(x) {
                    next[y as usize] += v[x];
                }
            }
            v = next;
        }
        match to {
            Some(b) => v[b as usize],
            None => v.iter().sum(),
        }
    }
}

/// Build transitions from exact preimage membership of interior samples.
pub fn build_transitions(
    partition: &Partition,
    mode: ExecMode,
) -> Result<TransitionMatrix, SubshiftError> {
    let n = partition.len();
    let inverse: Vec<_> = partition
        .parts
        .iter()
        .map(|p| p.branch_matrix().inverse_sl2().as_array())
        .collect();
    let rows: Vec<Result<Vec<bool>, SubshiftError>> = exec::map_indexed(mode, n, |x| {
        let part_x = &partition.parts[x];
        let inv = inverse[x];
        let mut row = vec![false; n];
        for (y, part_y) in partition.parts.iter().enumerate() {
            let mut decided = None;
            for s in &part_y.samples {
                let pre = s.mobius(inv);
                if let Some(v) = part_x.contains(pre) {
                    decided = Some(v);
                    break;
                }
            }
            match decided {
                Some(v) => row[y] = v,
                None => return Err(SubshiftError::Undecidable { x, y }),
            }
        }
        Ok(row)
    });
    let mut flat = Vec::with_capacity(n);
    for r in rows {
        flat.push(r?);
    }
    Ok(TransitionMatrix::from_rows(n, |x, y| flat[x][y]))
}

/// Irreducibility, period, and primitivity index of the transition matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureReport {
    pub irreducible: bool,
    pub period: usize,
    pub primitivity_index: Option<usize>,
}

pub fn check_irreducible_aperiodic(a: &TransitionMatrix) -> StructureReport {
    let n = a.size();
    if n == 0 {
        return StructureReport {
            irreducible: false,
            period: 0,
            primitivity_index: None,
        };
    }
    let forward = reachable(a, 0, false);
    let backward = reachable(a, 0, true);
    let irreducible = forward.iter().all(|&r| r) && backward.iter().all(|&r| r);

    let period = if irreducible {
        // gcd of (level[u] + 1 - level[v]) over all edges, from a BFS layering
        let mut level = vec![usize::MAX; n];
        let mut queue = std::collections::VecDeque::from([0usize]);
        level[0] = 0;
        while let Some(u) = queue.pop_front() {
            for v in a.successors(u) {
                if level[v as usize] == usize::MAX {
                    level[v as usize] = level[u] + 1;
                    queue.push_back(v as usize);
                }
            }
        }
        let mut g: i64 = 0;
        for u in 0..n {
            for v in a.successors(u) {
                let d = level[u] as i64 + 1 - level[v as usize] as i64;
                g = gcd_i64(g, d);
            }
        }
        g.unsigned_abs() as usize
    } else {
        0
    };

    let mut primitivity_index = None;
    if irreducible && period == 1 {
        let cap = (n * n).min(128).max(8);
        let mut power = a.clone();
        for k in 1..=cap {
            if power.all_ones() {
                primitivity_index = Some(k);
                break;
            }
            power = power.bool_mul(a);
        }
    }
    StructureReport {
        irreducible,
        period,
        primitivity_index,
    }
}

fn reachable(a: &TransitionMatrix, start: usize, reverse: bool) -> Vec<bool> {
    let n = a.size();
    let mut seen = vec![false; n];
    let mut stack = vec![start];
    seen[start] = true;
    while let Some(u) = stack.pop() {
        for v in 0..n {
            let edge = if reverse { a.get(v, u) } else { a.get(u, v) };
            if edge && !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen
}

fn gcd_i64(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Stream admissible words of length `n` in lexicographic order, optionally
/// constrained to a first and/or last letter. The visitor may prune by
/// returning `false` on a prefix.
pub fn enumerate_words_with<F>(
    a: &TransitionMatrix,
    n: usize,
    from: Option<Letter>,
    to: Option<Letter>,
    visitor: &mut F,
) where
    F: FnMut(&[Letter]) -> bool,
{
    if n == 0 {
        visitor(&[]);
        return;
    }
    let mut word = Vec::with_capacity(n);
    let starts: Vec<Letter> = match from {
        Some(x) => vec![x],
        None => (0..a.size() as Letter).collect(),
    };
    for s in starts {
        word.push(s);
        descend(a, n, to, &mut word, visitor);
        word.pop();
    }
}

fn descend<F>(
    a: &TransitionMatrix,
    n: usize,
    to: Option<Letter>,
    word: &mut Vec<Letter>,
    visitor: &mut F,
) where
    F: FnMut(&[Letter]) -> bool,
{
    if word.len() == n {
        if to.is_none_or(|t| word[n - 1] == t) {
            visitor(word);
        }
        return;
    }
    if !visitor(word) {
        return;
    }
    let last = *word.last().unwrap() as usize;
    for y in a.successors(last) {
        word.push(y);
        descend(a, n, to, word, visitor);
        word.pop();
    }
}

/// Materialized admissible words of length `n`.
pub fn enumerate_words(
    a: &TransitionMatrix,
    n: usize,
    from: Option<Letter>,
    to: Option<Letter>,
) -> Vec<Word> {
    let mut out = Vec::new();
    enumerate_words_with(a, n, from, to, &mut |w: &[Letter]| {
        if w.len() == n {
            out.push(Word(w.to_vec()));
        }
        true
    });
    out
}

/// Dictionary of length-3 connectors: for every letter pair `(x, y)` the
/// lexicographically least word `(i1, i2, i3)` with `x i1 i2 i3 y` admissible.
#[derive(Debug, Clone)]
pub struct GlueTable {
    table: HashMap<(Letter, Letter), [Letter; 3]>,
}

impl GlueTable {
    pub fn build(a: &TransitionMatrix, mode: ExecMode) -> GlueTable {
        let n = a.size();
        let per_x: Vec<Vec<((Letter, Letter), [Letter; 3])>> = exec::map_indexed(mode, n, |x| {
            let mut found: HashMap<Letter, [Letter; 3]> = HashMap::new();
            'outer: for i1 in a.successors(x) {
                for i2 in a.successors(i1 as usize) {
                    for i3 in a.successors(i2 as usize) {
                        for y in a.successors(i3 as usize) {
                            found.entry(y).or_insert([i1, i2, i3]);
                        }
                        if found.len() == n {
                            break 'outer;
                        }
                    }
                }
            }
            found
                .into_iter()
                .map(|(y, w)| ((x as Letter, y), w))
                .collect()
        });
        let mut table = HashMap::new();
        for chunk in per_x {
            table.extend(chunk);
        }
        GlueTable { table }
    }

    pub fn connector(&self, x: Letter, y: Letter) -> Option<[Letter; 3]> {
        self.table.get(&(x, y)).copied()
    }

    pub fn covers_all_pairs(&self, n: usize) -> bool {
        self.table.len() == n * n
    }
}

/// `a || iota || b` with the connector looked up from the table.
pub fn glue(a: &Word, b: &Word, table: &GlueTable) -> Result<Word, SubshiftError> {
    let (la, fb) = match (a.last(), b.first()) {
        (Some(x), Some(y)) => (x, y),
        _ => return Err(SubshiftError::EmptyWord),
    };
    let iota = table
        .connector(la, fb)
        .ok_or(SubshiftError::MissingGlue(la, fb))?;
    let mut v = a.0.clone();
    v.extend_from_slice(&iota);
    v.extend_from_slice(&b.0);
    Ok(Word(v))
}

/// Canonical representative of a cyclic word: the lexicographically minimal
/// rotation, plus its primitivity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalWord {
    pub word: Word,
    pub primitive: bool,
}

pub fn canonical_periodic(a: &TransitionMatrix, w: &Word) -> Result<CanonicalWord, SubshiftError> {
    if w.is_empty() {
        return Err(SubshiftError::EmptyWord);
    }
    if !a.is_cyclically_admissible(&w.0) {
        return Err(SubshiftError::CyclicallyInadmissible);
    }
    Ok(CanonicalWord {
        word: minimal_rotation(w),
        primitive: w.is_primitive(),
    })
}

pub fn minimal_rotation(w: &Word) -> Word {
    let n = w.len();
    let mut best = w.rotation(0);
    for r in 1..n {
        let cand = w.rotation(r);
        if cand.0 < best.0 {
            best = cand;
        }
    }
    best
}

/// Is `w` equal to its own minimal rotation?
pub fn is_canonical_rotation(w: &[Letter]) -> bool {
    let n = w.len();
    (1..n).all(|r| {
        let rotated = (0..n).map(|i| w[(i + r) % n]);
        !rotated.lt(w.iter().copied())
    })
}

/// `transitions.csv` payload: one `from_label,to_label` row per edge.
pub fn transitions_csv(a: &TransitionMatrix) -> String {
    let mut s = String::from("from_label,to_label\n");
    for x in 0..a.size() {
        for y in a.successors(x) {
            s.push_str(&format!("{x},{y}\n"));
        }
    }
    s
}
