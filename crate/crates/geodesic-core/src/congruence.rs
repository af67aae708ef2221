//! `SL2` over the residue rings `Z[i]/(q)`: brute-force group enumeration,
//! trace fibers, local densities, and empirical equidistribution statistics
//! for enumerated matrix families.

use std::collections::HashMap;

use num_rational::Ratio;
use thiserror::Error;

use crate::exec::{self, ExecMode};
use crate::gaussian::{self, gi, GaussianInt, Residue, ResidueRing};
use crate::geodesics::Mat2;
use crate::hurwitz::Partition;
use crate::subshift::Letter;

pub type Rat = Ratio<i128>;

/// Full enumeration is restricted to moduli of norm at most this.
pub const ENUM_NORM_BOUND: i128 = 200;

#[derive(Debug, Error, PartialEq)]
pub enum CongruenceError {
    #[error("norm {0} exceeds the enumeration bound {ENUM_NORM_BOUND}")]
    NormOverBound(i128),
    #[error("modulus must be a Gaussian prime")]
    NotPrime,
    #[error("modulus must be square-free")]
    NotSquarefree,
    #[error("no matrices to bin (ball too small)")]
    EmptyEnumeration,
}

/// Entrywise reduction of a matrix.
pub fn reduce_matrix(ring: &ResidueRing, m: &Mat2) -> [Residue; 4] {
    [
        ring.reduce(m.a),
        ring.reduce(m.b),
        ring.reduce(m.c),
        ring.reduce(m.d),
    ]
}

fn pack(e: [Residue; 4]) -> u32 {
    (e[0].0 << 24) | (e[1].0 << 16) | (e[2].0 << 8) | e[3].0
}

/// Stream every element of `SL2(Z[i]/(q))` exactly once.
///
/// Brute force over `(a, c, d)` with the `b`-solutions of `b c = a d - 1`
/// read from an inverted multiplication table; this is the oracle the
/// group-order and trace-fiber identities are tested against.
pub fn enumerate_sl2_with<F>(ring: &ResidueRing, mut visit: F) -> Result<(), CongruenceError>
where
    F: FnMut([Residue; 4]),
{
    let n = ring.size();
    if n as i128 > ENUM_NORM_BOUND {
        return Err(CongruenceError::NormOverBound(n as i128));
    }
    let elems: Vec<Residue> = ring.elements().collect();
    let mut mul = vec![0u32; n * n];
    for i in 0..n {
        for j in 0..n {
            mul[i * n + j] = ring.mul(elems[i], elems[j]).0;
        }
    }
    let one = ring.one().0;
    for c in 0..n {
        // b-values grouped by the product c*b
        let mut by_product: Vec<Vec<u32>> = vec![Vec::new(); n];
        for b in 0..n {
            by_product[mul[c * n + b] as usize].push(b as u32);
        }
        for a in 0..n {
            for d in 0..n {
                let ad = mul[a * n + d];
                let need = ring.sub(Residue(ad), Residue(one));
                for &b in &by_product[need.0 as usize] {
                    visit([
                        Residue(a as u32),
                        Residue(b),
                        Residue(c as u32),
                        Residue(d as u32),
                    ]);
                }
            }
        }
    }
    Ok(())
}

/// Materialized group with an element index, for binning.
pub struct Sl2Group {
    ring: ResidueRing,
    elements: Vec<u32>,
    sorted: Vec<u32>,
}

impl Sl2Group {
    pub fn new(ring: ResidueRing) -> Result<Sl2Group, CongruenceError> {
        let mut elements = Vec::new();
        enumerate_sl2_with(&ring, |e| elements.push(pack(e)))?;
        let mut sorted = elements.clone();
        sorted.sort_unstable();
        Ok(Sl2Group {
            ring,
            elements,
            sorted,
        })
    }

    pub fn ring(&self) -> &ResidueRing {
        &self.ring
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn element(&self, i: usize) -> [Residue; 4] {
        let v = self.elements[i];
        [
            Residue(v >> 24),
            Residue((v >> 16) & 0xff),
            Residue((v >> 8) & 0xff),
            Residue(v & 0xff),
        ]
    }

    pub fn iter(&self) -> impl Iterator<Item = [Residue; 4]> + '_ {
        (0..self.len()).map(|i| self.element(i))
    }

    /// Index in the canonical sorted order, if the entries form a group element.
    pub fn index_of(&self, e: [Residue; 4]) -> Option<usize> {
        self.sorted.binary_search(&pack(e)).ok()
    }

    /// Entries of the element at sorted position `i`.
    pub fn sorted_element(&self, i: usize) -> [Residue; 4] {
        let v = self.sorted[i];
        [
            Residue(v >> 24),
            Residue((v >> 16) & 0xff),
            Residue((v >> 8) & 0xff),
            Residue(v & 0xff),
        ]
    }
}

/// Order predicted by the product law over the prime factorization:
/// `prod (N^3 - N)` over primes dividing the square-free `q`.
pub fn order_by_crt(q: GaussianInt) -> Result<i128, CongruenceError> {
    let f = gaussian::factor(q).map_err(|_| CongruenceError::NotSquarefree)?;
    if !f.is_squarefree() {
        return Err(CongruenceError::NotSquarefree);
    }
    Ok(f.factors
        .iter()
        .map(|&(p, _)| {
            let n = p.norm();
            n * n * n - n
        })
        .product())
}

/// Trace histogram over the whole group, indexed by residue index.
pub fn trace_histogram(ring: &ResidueRing) -> Result<Vec<u64>, CongruenceError> {
    let mut hist = vec![0u64; ring.size()];
    enumerate_sl2_with(ring, |e| {
        hist[ring.add(e[0], e[3]).0 as usize] += 1;
    })?;
    Ok(hist)
}

/// Exact count of `{g in SL2(q) : tr g = t}` by brute force.
pub fn trace_fiber_count(ring: &ResidueRing, t: GaussianInt) -> Result<u64, CongruenceError> {
    let hist = trace_histogram(ring)?;
    Ok(hist[ring.reduce(t).0 as usize])
}

/// Local density `rho_t(p) = (N * fiber(t) - |G|) / |G|` as an exact rational.
pub fn rho_t(q: GaussianInt, t: GaussianInt) -> Result<Rat, CongruenceError> {
    let f = gaussian::factor(q).map_err(|_| CongruenceError::NotPrime)?;
    if f.factors.len() != 1 || f.factors[0].1 != 1 {
        return Err(CongruenceError::NotPrime);
    }
    let ring = ResidueRing::new(q);
    let n = ring.size() as i128;
    let fiber = trace_fiber_count(&ring, t)? as i128;
    let order = n * n * n - n;
    Ok(Rat::new(n * fiber - order, order))
}

/// `rho` for `t = +-2` from the closed form `1/(N^2 - 1)`; agreement with the
/// brute-force [`rho_t`] at small norms is an acceptance criterion.
pub fn rho_two_formula(norm: i128) -> Rat {
    Rat::new(1, norm * norm - 1)
}

/// All square roots of 4 in the ring, by exhaustive squaring.
pub fn square_roots_of_four(ring: &ResidueRing) -> Vec<Residue> {
    let four = ring.reduce(gi(4, 0));
    ring.elements()
        .filter(|&t| ring.mul(t, t) == four)
        .collect()
}

/// The congruence-sieve density: multiplicative over the primes dividing the
/// square-free `q`, with per-prime factor
/// `(#roots of t^2 = 4 mod p) * (1 + rho) / N`, where the root count is 1 at
/// the ramified prime and 2 elsewhere, and `rho = 1/(N^2 - 1)`.
pub fn beta(q: GaussianInt) -> Result<Rat, CongruenceError> {
    let f = gaussian::factor(q).map_err(|_| CongruenceError::NotSquarefree)?;
    if !f.is_squarefree() {
        return Err(CongruenceError::NotSquarefree);
    }
    let mut out = Rat::new(1, 1);
    for &(p, _) in &f.factors {
        out *= beta_prime_factor(p.norm());
    }
    Ok(out)
}

/// Per-prime factor of `beta` from the closed forms.
pub fn beta_prime_factor(norm: i128) -> Rat {
    let roots = if norm == 2 { 1 } else { 2 };
    Rat::new(roots, norm) * (Rat::new(1, 1) + rho_two_formula(norm))
}

/// Per-prime factor computed by brute force over the group, as an oracle.
pub fn beta_prime_brute(q: GaussianInt) -> Result<Rat, CongruenceError> {
    let ring = ResidueRing::new(q);
    let n = ring.size() as i128;
    let hist = trace_histogram(&ring)?;
    let order: i128 = hist.iter().map(|&h| h as i128).sum();
    let mut total = Rat::new(0, 1);
    for t in square_roots_of_four(&ring) {
        let fiber = hist[t.0 as usize] as i128;
        let rho = Rat::new(n * fiber - order, order);
        total += (Rat::new(1, 1) + rho) * Rat::new(1, n);
    }
    Ok(total)
}

/// Empirical equidistribution of a matrix family over the group classes.
#[derive(Debug, Clone)]
pub struct EquidistReport {
    pub modulus: GaussianInt,
    pub total: u64,
    pub group_order: usize,
    /// Count per group element (canonical sorted order).
    pub counts: Vec<u64>,
    pub expected: f64,
    pub max_rel_dev: f64,
    pub l2_dev: f64,
    pub classes_hit: usize,
    /// Counts binned by trace residue index.
    pub trace_counts: Vec<u64>,
}

pub fn equidist_stats(
    matrices: &[Mat2],
    group: &Sl2Group,
    mode: ExecMode,
) -> Result<EquidistReport, CongruenceError> {
    if matrices.is_empty() {
        return Err(CongruenceError::EmptyEnumeration);
    }
    let ring = group.ring();
    let chunks: Vec<&[Mat2]> = matrices.chunks(8192).collect();
    let partials: Vec<(Vec<u64>, Vec<u64>)> = exec::map_slice(mode, &chunks, |chunk| {
        let mut counts = vec![0u64; group.len()];
        let mut traces = vec![0u64; ring.size()];
        for m in chunk.iter() {
            let e = reduce_matrix(ring, m);
            let idx = group
                .index_of(e)
                .expect("reduction of a determinant-one matrix is a group element");
            counts[idx] += 1;
            traces[ring.add(e[0], e[3]).0 as usize] += 1;
        }
        (counts, traces)
    });
    let mut counts = vec![0u64; group.len()];
    let mut trace_counts = vec![0u64; ring.size()];
    for (c, t) in partials {
        for (acc, v) in counts.iter_mut().zip(c) {
            *acc += v;
        }
        for (acc, v) in trace_counts.iter_mut().zip(t) {
            *acc += v;
        }
    }
    let total = matrices.len() as u64;
    let expected = total as f64 / group.len() as f64;
    let mut max_rel_dev: f64 = 0.0;
    let mut l2 = 0.0;
    let mut hit = 0;
    for &c in &counts {
        if c > 0 {
            hit += 1;
        }
        let dev = (c as f64 - expected) / expected;
        max_rel_dev = max_rel_dev.max(dev.abs());
        l2 += dev * dev;
    }
    Ok(EquidistReport {
        modulus: ring.modulus(),
        total,
        group_order: group.len(),
        counts,
        expected,
        max_rel_dev,
        l2_dev: (l2 / group.len() as f64).sqrt(),
        classes_hit: hit,
        trace_counts,
    })
}

/// `equidist.csv` rows: `(R, X, q_re, q_im, class_index, count, expected)`.
pub fn equidist_csv(report: &EquidistReport, radius: f64, x: f64) -> String {
    let mut s = String::from("R,X,q_re,q_im,class_index,count,expected\n");
    let q = report.modulus;
    for (i, c) in report.counts.iter().enumerate() {
        s.push_str(&format!(
            "{},{},{},{},{},{},{:.17e}\n",
            radius, x, q.re, q.im, i, c, report.expected
        ));
    }
    s
}

// ---------------------------------------------------------------------------
// generator witnesses
// ---------------------------------------------------------------------------

/// A product expression over branch matrices: `(label, inverted)` factors,
/// applied left to right.
pub type WitnessWord = Vec<(Letter, bool)>;

#[derive(Debug, Clone)]
pub struct GeneratorWitness {
    pub name: &'static str,
    pub target: Mat2,
    pub word: WitnessWord,
}

#[derive(Debug, Clone)]
pub struct GeneratorReport {
    pub witnesses: Vec<GeneratorWitness>,
    pub all_found: bool,
    /// The branch matrices reduce onto all of `SL2` mod `1+i`.
    pub mod_ramified_surjective: bool,
    pub states_explored: usize,
}

fn canonical_generators() -> [(&'static str, Mat2); 4] {
    [
        ("T1", Mat2::new(gi(1, 0), gi(1, 0), gi(0, 0), gi(1, 0))),
        ("Ti", Mat2::new(gi(1, 0), gi(0, 1), gi(0, 0), gi(1, 0))),
        ("Q", Mat2::new(gi(0, -1), gi(0, 0), gi(0, 0), gi(0, 1))),
        ("S", Mat2::new(gi(0, 0), gi(-1, 0), gi(1, 0), gi(0, 0))),
    ]
}

/// Bounded breadth-first search expressing each canonical generator of the
/// group as a short product of branch matrices and their inverses.
pub fn verify_generators(
    partition: &Partition,
    max_depth: usize,
    frob_cap: i128,
    state_cap: usize,
) -> GeneratorReport {
    let mats = partition.branch_matrices();
    let mut steps: Vec<(Letter, bool, Mat2)> = Vec::new();
    for (l, m) in mats.iter().enumerate() {
        steps.push((l as Letter, false, *m));
        steps.push((l as Letter, true, m.inverse_sl2()));
    }

    let targets = canonical_generators();
    let mut found: HashMap<&'static str, WitnessWord> = HashMap::new();

    let mut seen: std::collections::HashSet<Mat2> = std::collections::HashSet::new();
    let mut frontier = vec![Mat2::IDENTITY];
    let mut parents: HashMap<Mat2, (Mat2, (Letter, bool))> = HashMap::new();
    seen.insert(Mat2::IDENTITY);

    'bfs: for _depth in 0..max_depth {
        let mut next = Vec::new();
        for m in &frontier {
            for &(l, invert, ref step) in &steps {
                let cand = m.mul(step);
                if cand.frobenius_sq() > frob_cap || seen.contains(&cand) {
                    continue;
                }
                seen.insert(cand);
                parents.insert(cand, (*m, (l, invert)));
                next.push(cand);
                for (name, t) in &targets {
                    if cand == *t && !found.contains_key(name) {
                        let mut word = Vec::new();
                        let mut cur = cand;
                        while cur != Mat2::IDENTITY {
                            let (prev, step) = parents[&cur];
                            word.push(step);
                            cur = prev;
                        }
                        word.reverse();
                        found.insert(name, word);
                    }
                }
                if found.len() == targets.len() || seen.len() >= state_cap {
                    break 'bfs;
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }

    let witnesses: Vec<GeneratorWitness> = targets
        .iter()
        .filter_map(|(name, t)| {
            found.get(name).map(|w| GeneratorWitness {
                name,
                target: *t,
                word: w.clone(),
            })
        })
        .collect();
    // each witness must multiply out exactly
    for w in &witnesses {
        let mut p = Mat2::IDENTITY;
        for &(l, inv) in &w.word {
            let m = if inv {
                mats[l as usize].inverse_sl2()
            } else {
                mats[l as usize]
            };
            p = p.mul(&m);
        }
        assert_eq!(p, w.target, "witness for {} does not multiply out", w.name);
    }

    // orbit closure of the reductions mod 1+i
    let group = Sl2Group::new(ResidueRing::new(gi(1, 1))).expect("tiny group");
    let mut reached = vec![false; group.len()];
    let id = reduce_matrix(group.ring(), &Mat2::IDENTITY);
    reached[group.index_of(id).unwrap()] = true;
    let mut stack = vec![Mat2::IDENTITY];
    let mut reached_count = 1;
    'orbit: while let Some(m) = stack.pop() {
        for &(_, _, ref step) in &steps {
            let cand = m.mul(step);
            let idx = group.index_of(reduce_matrix(group.ring(), &cand)).unwrap();
            if !reached[idx] {
                reached[idx] = true;
                reached_count += 1;
                if reached_count == group.len() {
                    break 'orbit;
                }
                stack.push(cand);
            }
        }
    }

    let all_found = witnesses.len() == targets.len();
    GeneratorReport {
        witnesses,
        all_found,
        mod_ramified_surjective: reached_count == group.len(),
        states_explored: seen.len(),
    }
}
