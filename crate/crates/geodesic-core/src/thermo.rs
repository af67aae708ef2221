//! Expansion rates, Birkhoff sums, certified pressure brackets, and the
//! growth-exponent solver.
//!
//! The expansion rate of one branch step at a phase point `z` is
//! `tau(z) = 2 log |z|` (positive everywhere, since `|z| >= sqrt 2` on the
//! region). The transfer operator at parameter `s` weights inverse branches
//! by `exp(-s tau)`; its leading eigenvalue `lambda_s` defines the pressure
//! `P(s) = log lambda_s`, strictly decreasing in `s`, and the growth exponent
//! is the unique root of `P`.
//!
//! Brackets: each depth-`n` graph edge carries `tau` bounds over an exact
//! disc enclosure of its `n`-cylinder (inverse branches are Mobius maps, so
//! discs push forward exactly). Every per-step weight along every orbit lies
//! between the edge weights, so the leading eigenvalues of the inf/sup
//! weighted graphs bracket `lambda_s`; Collatz-Wielandt ratios from a power
//! iteration then give certified outer bounds on those eigenvalues. Cylinder
//! diameters shrink like `2^-n`, and so does the bracket width.

use std::collections::HashMap;

use num_complex::Complex64;
use thiserror::Error;

use crate::cline::Cline;
use crate::exec::{self, ExecMode};
use crate::geodesics::{self, Mat2};
use crate::hurwitz::Partition;
use crate::subshift::{Letter, TransitionMatrix, Word};

#[derive(Debug, Error, PartialEq)]
pub enum ThermoError {
    #[error("word is empty or not admissible")]
    BadWord,
    #[error("word is not cyclically admissible")]
    NotCyclic,
    #[error("depth must be at least 1")]
    BadDepth,
    #[error("power iteration failed to produce positive vectors")]
    Degenerate,
}

// ---------------------------------------------------------------------------
// tau along cylinders
// ---------------------------------------------------------------------------

/// Rigorous `(min, max)` of `|z|` over the cylinder of `word`, from the exact
/// disc enclosure intersected with the first part's modulus range.
pub fn cylinder_abs_bounds(partition: &Partition, word: &[Letter]) -> (f64, f64) {
    let first = &partition.parts[word[0] as usize];
    let (mut lo, mut hi) = first.abs_range;
    let mut disc: Option<Cline> = Some(partition.parts[word[word.len() - 1] as usize].circumdisc);
    for &l in word[..word.len() - 1].iter().rev() {
        let inv = partition.parts[l as usize].branch_matrix().inverse_sl2();
        disc = disc.and_then(|d| {
            let img = d.mobius_image(inv.as_array());
            // keep only genuine bounded discs with the inside on E <= 0
            if img.a > 0 {
                Some(img)
            } else {
                None
            }
        });
    }
    if let Some(d) = disc {
        if let Some((dlo, dhi)) = d.disc_abs_range() {
            lo = lo.max(dlo);
            hi = hi.min(dhi);
        }
    }
    debug_assert!(lo <= hi * (1.0 + 1e-9), "empty enclosure for {word:?}");
    (lo, hi.max(lo))
}

/// `(tau_min, tau_max)` over the cylinder of `word`.
pub fn tau_bounds(partition: &Partition, word: &[Letter]) -> (f64, f64) {
    let (lo, hi) = cylinder_abs_bounds(partition, word);
    (2.0 * lo.ln(), 2.0 * hi.ln())
}

/// The phase point of the cylinder `word` continued by `tail_point`:
/// the inverse branches of the word applied to the tail, innermost last.
pub fn cylinder_point(partition: &Partition, word: &[Letter], tail_point: Complex64) -> Complex64 {
    let mut z = tail_point;
    for &l in word.iter().rev() {
        let part = &partition.parts[l as usize];
        let m = Complex64::new(part.round_target.re as f64, part.round_target.im as f64);
        // inverse branch: z -> m -+ 1/z
        z = if part.branch_sign == 0 {
            m - 1.0 / z
        } else {
            m + 1.0 / z
        };
    }
    z
}

/// `tau` at the cylinder point of `word` continued by `tail_point`.
pub fn tau_at(partition: &Partition, word: &[Letter], tail_point: Complex64) -> f64 {
    2.0 * cylinder_point(partition, word, tail_point).norm().ln()
}

/// Birkhoff sum `S_n tau` along the first `n` steps of `word || tail`.
pub fn birkhoff_sum(
    partition: &Partition,
    word: &[Letter],
    tail_point: Complex64,
    n: usize,
) -> f64 {
    (0..n)
        .map(|k| tau_at(partition, &word[k..], tail_point))
        .sum()
}

/// Orbit points of the periodic extension of a cyclic word: entry `r` is the
/// expanding fixed point of the matrix of the `r`-th rotation.
pub fn periodic_orbit(
    partition: &Partition,
    a: &TransitionMatrix,
    word: &Word,
) -> Result<Vec<Complex64>, ThermoError> {
    if word.is_empty() || !a.is_cyclically_admissible(&word.0) {
        return Err(ThermoError::NotCyclic);
    }
    let mats = partition.branch_matrices();
    (0..word.len())
        .map(|r| {
            let m = geodesics::word_matrix_unchecked(&mats, &word.rotation(r).0);
            geodesics::expanding_fixed_point(&m).map_err(|_| ThermoError::Degenerate)
        })
        .collect()
}

/// `S_n tau` over one period of a cyclic word; equals the translation length
/// of the associated matrix.
pub fn periodic_birkhoff_sum(
    partition: &Partition,
    a: &TransitionMatrix,
    word: &Word,
) -> Result<f64, ThermoError> {
    let orbit = periodic_orbit(partition, a, word)?;
    Ok(orbit.iter().map(|z| 2.0 * z.norm().ln()).sum())
}

/// A cylinder together with a representative point and its Birkhoff weight.
#[derive(Debug, Clone)]
pub struct CylinderWeight {
    pub word: Word,
    pub rep_point: Complex64,
    /// `S_n tau` at the representative point.
    pub weight_log: f64,
}

/// Representative weight of a cylinder: the periodic point when the word is
/// cyclically admissible, otherwise an admissible continuation point.
pub fn cylinder_weight(
    partition: &Partition,
    a: &TransitionMatrix,
    word: &Word,
) -> Result<CylinderWeight, ThermoError> {
    if word.is_empty() || !a.is_admissible(&word.0) {
        return Err(ThermoError::BadWord);
    }
    if a.is_cyclically_admissible(&word.0) {
        let orbit = periodic_orbit(partition, a, word)?;
        let weight_log = orbit.iter().map(|z| 2.0 * z.norm().ln()).sum();
        return Ok(CylinderWeight {
            word: word.clone(),
            rep_point: orbit[0],
            weight_log,
        });
    }
    let last = word.last().unwrap() as usize;
    let next = a.successors(last).next().ok_or(ThermoError::BadWord)? as usize;
    let (re, im) = partition.parts[next].samples[0].to_f64();
    let tail = Complex64::new(re, im);
    let rep = cylinder_point(partition, &word.0, tail);
    let weight_log = birkhoff_sum(partition, &word.0, tail, word.len());
    Ok(CylinderWeight {
        word: word.clone(),
        rep_point: rep,
        weight_log,
    })
}

// ---------------------------------------------------------------------------
// pressure graphs
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
struct Edge {
    from: u32,
    to: u32,
    tau_lo: f64,
    tau_hi: f64,
    tau_mid: f64,
}

/// Weighted transition structure at a fixed cylinder depth. Vertices are
/// admissible `(depth-1)`-words, edges are `depth`-words with `tau` bounded
/// over their cylinders. Building the graph is the expensive step; pressure
/// evaluations at different `s` reuse it.
pub struct PressureGraph {
    depth: usize,
    vertices: usize,
    edges: Vec<Edge>,
    /// One term per admissible depth-word: the sum of `tau_lo` over all of
    /// its suffixes, feeding the subadditive upper functional.
    sum_terms: Vec<f64>,
}

fn pack(word: &[Letter]) -> u128 {
    let mut v: u128 = 1;
    for &l in word {
        v = (v << 12) | (l as u128);
    }
    v
}

impl PressureGraph {
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    /// Build the depth-`n` graph for the restricted shift. Vertices carry
    /// `max(n-1, 1)` letters of context so paths range over exactly the
    /// admissible chains; edge weights are bounded over the cylinder of the
    /// first `n` letters of the extended word.
    pub fn build(
        partition: &Partition,
        a: &TransitionMatrix,
        depth: usize,
        mode: ExecMode,
    ) -> Result<PressureGraph, ThermoError> {
        if depth == 0 {
            return Err(ThermoError::BadDepth);
        }
        let n = a.size();
        let ctx = depth.max(2) - 1;
        // tau bounds of all words of length < depth, for the suffix sums
        let mut short: HashMap<u128, (f64, f64)> = HashMap::new();
        let mut level: Vec<Vec<Letter>> = (0..n as Letter).map(|l| vec![l]).collect();
        for len in 1..=ctx {
            if len < depth {
                for w in &level {
                    short.insert(pack(w), tau_bounds(partition, w));
                }
            }
            if len == ctx {
                break;
            }
            let mut next = Vec::new();
            for w in &level {
                for y in a.successors(w[len - 1] as usize) {
                    let mut v = w.clone();
                    v.push(y);
                    next.push(v);
                }
            }
            level = next;
        }
        let vertices = level;
        let index: HashMap<u128, u32> = vertices
            .iter()
            .enumerate()
            .map(|(i, w)| (pack(w), i as u32))
            .collect();

        let per_vertex: Vec<(Vec<Edge>, Vec<f64>)> =
            exec::map_indexed(mode, vertices.len(), |vi| {
                let u = &vertices[vi];
                let mut out = Vec::new();
                let mut terms = Vec::new();
                for y in a.successors(u[u.len() - 1] as usize) {
                    let mut w = u.clone();
                    w.push(y);
                    // weight context: the first `depth` letters
                    let (lo, hi) = tau_bounds(partition, &w[..depth.min(w.len())]);
                    let to = index[&pack(&w[1..])];
                    out.push(Edge {
                        from: vi as u32,
                        to,
                        tau_lo: lo,
                        tau_hi: hi,
                        tau_mid: 0.5 * (lo + hi),
                    });
                    if depth >= 2 {
                        // w is exactly a depth-word; add its suffix-lo sum
                        let mut suffix_lo = lo;
                        for k in 1..depth {
                            suffix_lo += short[&pack(&w[k..])].0;
                        }
                        terms.push(suffix_lo);
                    }
                }
                (out, terms)
            });
        let mut edges = Vec::new();
        let mut sum_terms = Vec::new();
        for (e, t) in per_vertex {
            edges.extend(e);
            sum_terms.extend(t);
        }
        if depth == 1 {
            // depth-words are the single letters
            sum_terms = (0..n)
                .map(|l| tau_bounds(partition, &[l as Letter]).0)
                .collect();
        }
        Ok(PressureGraph {
            depth,
            vertices: vertices.len(),
            edges,
            sum_terms,
        })
    }

    /// Full shift on `k` symbols with constant step weight `tau = c`;
    /// its pressure is exactly `log k - s c`.
    pub fn synthetic_full_shift(k: usize, c: f64) -> PressureGraph {
        let mut edges = Vec::with_capacity(k * k);
        for x in 0..k as u32 {
            for y in 0..k as u32 {
                edges.push(Edge {
                    from: x,
                    to: y,
                    tau_lo: c,
                    tau_hi: c,
                    tau_mid: c,
                });
            }
        }
        PressureGraph {
            depth: 2,
            vertices: k,
            sum_terms: vec![2.0 * c; k * k],
            edges,
        }
    }
}

/// A certified bracket for the pressure at one parameter value.
#[derive(Debug, Clone, Copy)]
pub struct PressureEstimate {
    pub s: f64,
    pub depth: usize,
    /// Certified lower bound for `P(s)`.
    pub lower: f64,
    /// Certified upper bound for `P(s)`.
    pub upper: f64,
    /// Midweight spectral-radius estimate (not certified).
    pub center: f64,
    /// The subadditive upper functional `(1/n) log sum of sup-weights`.
    pub sum_upper: f64,
    pub converged: bool,
}

impl PressureEstimate {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Power iteration returning Collatz-Wielandt bounds `(min, max)` of
/// `(Mv)_x / v_x` at the final positive iterate, plus convergence.
fn cw_bounds(graph: &PressureGraph, weights: &[f64]) -> (f64, f64, bool) {
    let n = graph.vertices;
    let mut v = vec![1.0f64; n];
    let mut mv = vec![0.0f64; n];
    let mut converged = false;
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for _iter in 0..400 {
        mv.iter_mut().for_each(|x| *x = 0.0);
        for (e, &w) in graph.edges.iter().zip(weights) {
            mv[e.from as usize] += w * v[e.to as usize];
        }
        lo = f64::INFINITY;
        hi = 0.0;
        for x in 0..n {
            let r = mv[x] / v[x];
            lo = lo.min(r);
            hi = hi.max(r);
        }
        if !(lo > 0.0) {
            return (f64::NEG_INFINITY, f64::INFINITY, false);
        }
        if hi / lo - 1.0 < 1e-13 {
            converged = true;
            break;
        }
        let scale = 1.0 / hi;
        std::mem::swap(&mut v, &mut mv);
        v.iter_mut().for_each(|x| *x *= scale);
    }
    (lo, hi, converged)
}

/// Evaluate the certified pressure bracket at `s` on a prebuilt graph.
pub fn pressure_on_graph(graph: &PressureGraph, s: f64) -> PressureEstimate {
    let n = graph.depth as f64;
    let w_inf: Vec<f64> = graph.edges.iter().map(|e| (-s * e.tau_hi).exp()).collect();
    let w_sup: Vec<f64> = graph.edges.iter().map(|e| (-s * e.tau_lo).exp()).collect();
    let w_mid: Vec<f64> = graph.edges.iter().map(|e| (-s * e.tau_mid).exp()).collect();

    let (inf_lo, _, c1) = cw_bounds(graph, &w_inf);
    let (_, sup_hi, c2) = cw_bounds(graph, &w_sup);
    let (mid_lo, mid_hi, c3) = cw_bounds(graph, &w_mid);

    // subadditive upper bound: (1/n) log sum over depth-words of sup weights
    let sum: f64 = graph.sum_terms.iter().map(|t| (-s * t).exp()).sum();
    let sum_upper = sum.ln() / n + 1e-9;

    let lower = inf_lo.ln() - 1e-9;
    let upper = (sup_hi.ln() + 1e-9).min(sum_upper);
    PressureEstimate {
        s,
        depth: graph.depth,
        lower,
        upper,
        center: 0.5 * (mid_lo.ln() + mid_hi.ln()),
        sum_upper,
        converged: c1 && c2 && c3,
    }
}

/// Convenience entry point: build the graph and evaluate once.
pub fn pressure(
    partition: &Partition,
    a: &TransitionMatrix,
    s: f64,
    depth: usize,
    mode: ExecMode,
) -> Result<PressureEstimate, ThermoError> {
    let graph = PressureGraph::build(partition, a, depth, mode)?;
    Ok(pressure_on_graph(&graph, s))
}

/// Result of the growth-exponent solve.
#[derive(Debug, Clone)]
pub struct DeltaResult {
    /// Midpoint estimate of the root of `P`.
    pub delta: f64,
    /// `P > 0` is certified at `lo` and `P < 0` at `hi`.
    pub lo: f64,
    pub hi: f64,
    /// Bracket width reached the tolerance with certified signs.
    pub certified: bool,
    pub depth_used: usize,
    /// Every pressure evaluation performed, for reporting.
    pub evals: Vec<PressureEstimate>,
}

/// Maximum graph size the solver will build, in edges.
const EDGE_BUDGET: u128 = 16_000_000;

/// Bisection on certified pressure signs with increasing cylinder depth.
pub fn solve_delta(
    partition: &Partition,
    a: &TransitionMatrix,
    tol: f64,
    max_depth: usize,
    mode: ExecMode,
) -> Result<DeltaResult, ThermoError> {
    let tol = tol.max(1e-6);
    let mut evals = Vec::new();
    let (mut lo, mut hi) = (0.05f64, 2.45f64);
    let mut certified = false;
    let mut depth_used = 1;
    let mut last_graph: Option<PressureGraph> = None;
    for depth in 1..=max_depth.max(1) {
        if a.count_words(depth, None, None) > EDGE_BUDGET {
            break;
        }
        let graph = PressureGraph::build(partition, a, depth, mode)?;
        depth_used = depth;
        // re-certify the current endpoints at this depth
        let e_lo = pressure_on_graph(&graph, lo);
        let e_hi = pressure_on_graph(&graph, hi);
        evals.push(e_lo);
        evals.push(e_hi);
        if e_lo.lower > 0.0 && e_hi.upper < 0.0 {
            let mut budget = 70;
            loop {
                if hi - lo <= tol {
                    certified = true;
                    break;
                }
                if budget == 0 {
                    break;
                }
                budget -= 1;
                let mid = 0.5 * (lo + hi);
                let e = pressure_on_graph(&graph, mid);
                evals.push(e);
                if e.lower > 0.0 {
                    lo = mid;
                } else if e.upper < 0.0 {
                    hi = mid;
                } else {
                    // mid sits in the ambiguity band; try quarter points to
                    // keep shrinking one-sidedly before giving up
                    let q_lo = lo + 0.25 * (hi - lo);
                    let q_hi = lo + 0.75 * (hi - lo);
                    let e_l = pressure_on_graph(&graph, q_lo);
                    let e_h = pressure_on_graph(&graph, q_hi);
                    evals.push(e_l);
                    evals.push(e_h);
                    let mut progressed = false;
                    if e_l.lower > 0.0 {
                        lo = q_lo;
                        progressed = true;
                    }
                    if e_h.upper < 0.0 {
                        hi = q_hi;
                        progressed = true;
                    }
                    if !progressed {
                        break;
                    }
                }
            }
        }
        last_graph = Some(graph);
        if certified {
            break;
        }
    }
    // point estimate: when the certified bracket stalled above tol, refine
    // the midweight root inside it (not certified, clearly flagged)
    let delta = if certified {
        0.5 * (lo + hi)
    } else if let Some(graph) = &last_graph {
        let (mut clo, mut chi) = (lo, hi);
        for _ in 0..40 {
            let mid = 0.5 * (clo + chi);
            let e = pressure_on_graph(graph, mid);
            if e.center > 0.0 {
                clo = mid;
            } else {
                chi = mid;
            }
        }
        0.5 * (clo + chi)
    } else {
        0.5 * (lo + hi)
    };
    Ok(DeltaResult {
        delta,
        lo,
        hi,
        certified,
        depth_used,
        evals,
    })
}

/// Numeric tail of the full-alphabet weight sum: `sum |z|^(-2s)` over
/// Gaussian integers with `|z| > R - 1`, plus an integral bound for the far
/// range. Finite only for `s > 1`; reported as the expected perturbation
/// scale of the growth exponent in the alphabet radius.
pub fn alphabet_tail_bound(radius: f64, s: f64) -> f64 {
    assert!(s > 1.0, "tail sum requires s > 1");
    let r0 = radius - 1.0;
    let cutoff = (r0.max(2.0) * 64.0).min(4096.0);
    let mut sum = 0.0;
    let k = cutoff.ceil() as i64;
    for re in -k..=k {
        for im in -k..=k {
            let n2 = (re * re + im * im) as f64;
            if n2 > r0 * r0 && n2 <= cutoff * cutoff {
                sum += n2.powf(-s);
            }
        }
    }
    // area bound for the remainder: 2 pi int_cutoff^inf r^(1-2s) dr
    sum + std::f64::consts::PI * 2.0 * cutoff.powf(2.0 - 2.0 * s) / (2.0 * s - 2.0)
}

// ---------------------------------------------------------------------------
// distortion diagnostics
// ---------------------------------------------------------------------------

/// Sampled bounded-distortion statistics: how much `S_M tau` moves when the
/// continuation beyond a shared prefix changes.
#[derive(Debug, Clone)]
pub struct DistortionReport {
    pub prefix_len: usize,
    pub samples: usize,
    pub max_deviation: f64,
}

pub fn birkhoff_distortion_check(
    partition: &Partition,
    a: &TransitionMatrix,
    prefix_len: usize,
    samples: usize,
    seed: u64,
) -> DistortionReport {
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tail_len = 30;
    let mut max_dev: f64 = 0.0;
    for _ in 0..samples {
        let prefix = random_admissible(a, prefix_len, &mut rng);
        let t1 = random_continuation(a, *prefix.last().unwrap(), tail_len, &mut rng);
        let t2 = random_continuation(a, *prefix.last().unwrap(), tail_len, &mut rng);
        let p1 = tail_point(partition, &t1);
        let p2 = tail_point(partition, &t2);
        let s1 = birkhoff_sum(partition, &prefix, p1, prefix_len);
        let s2 = birkhoff_sum(partition, &prefix, p2, prefix_len);
        max_dev = max_dev.max((s1 - s2).abs());
    }
    DistortionReport {
        prefix_len,
        samples,
        max_deviation: max_dev,
    }
}

/// Max deviation of single-step `tau` across points sharing a depth-`k`
/// itinerary, sampled; decays like the cylinder diameter.
pub fn single_step_deviation(
    partition: &Partition,
    a: &TransitionMatrix,
    depth: usize,
    samples: usize,
    seed: u64,
) -> f64 {
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_dev: f64 = 0.0;
    for _ in 0..samples {
        let shared = random_admissible(a, depth, &mut rng);
        let t1 = random_continuation(a, *shared.last().unwrap(), 30, &mut rng);
        let t2 = random_continuation(a, *shared.last().unwrap(), 30, &mut rng);
        let z1 = cylinder_point(partition, &shared, tail_point(partition, &t1));
        let z2 = cylinder_point(partition, &shared, tail_point(partition, &t2));
        let d = (2.0 * z1.norm().ln() - 2.0 * z2.norm().ln()).abs();
        max_dev = max_dev.max(d);
    }
    max_dev
}

fn random_admissible(a: &TransitionMatrix, len: usize, rng: &mut impl rand::Rng) -> Vec<Letter> {
    let mut w = vec![rng.random_range(0..a.size()) as Letter];
    extend_random(a, &mut w, len - 1, rng);
    w
}

fn random_continuation(
    a: &TransitionMatrix,
    after: Letter,
    len: usize,
    rng: &mut impl rand::Rng,
) -> Vec<Letter> {
    let succ: Vec<Letter> = a.successors(after as usize).collect();
    let mut w = vec![succ[rng.random_range(0..succ.len())]];
    extend_random(a, &mut w, len - 1, rng);
    w
}

fn extend_random(
    a: &TransitionMatrix,
    w: &mut Vec<Letter>,
    extra: usize,
    rng: &mut impl rand::Rng,
) {
    for _ in 0..extra {
        let succ: Vec<Letter> = a.successors(*w.last().unwrap() as usize).collect();
        w.push(succ[rng.random_range(0..succ.len())]);
    }
}

fn tail_point(partition: &Partition, tail: &[Letter]) -> Complex64 {
    let (re, im) = partition.parts[tail[tail.len() - 1] as usize].samples[0].to_f64();
    cylinder_point(partition, &tail[..tail.len() - 1], Complex64::new(re, im))
}

// ---------------------------------------------------------------------------

/// Translation length `2 log |lambda_max|` of a loxodromic matrix.
pub fn matrix_length(m: &Mat2) -> Option<f64> {
    geodesics::length_holonomy(m).ok().map(|(l, _)| l)
}
