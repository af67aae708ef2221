//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured quantities. Run with
//! `cargo test -p geodesic-core --test acceptance -- --nocapture`.

use geodesic_core::charsums;
use geodesic_core::congruence::{self, Rat, Sl2Group};
use geodesic_core::exec::ExecMode;
use geodesic_core::gaussian::{self, gi, GaussianInt, ResidueRing};
use geodesic_core::geodesics;
use geodesic_core::hurwitz::{self, Partition};
use geodesic_core::sieve;
use geodesic_core::subshift::{self, TransitionMatrix, Word};
use geodesic_core::thermo;

fn mode() -> ExecMode {
    ExecMode::default()
}

fn system(radius: f64) -> (Partition, TransitionMatrix) {
    let p = hurwitz::build_partition(radius).unwrap();
    let a = subshift::build_transitions(&p, mode()).unwrap();
    (p, a)
}

fn primes_to(norm: i128) -> Vec<GaussianInt> {
    gaussian::gaussian_primes_up_to(norm)
}

/// Trace fibers at `t = +-2` equal the squared norm, every prime norm <= 169.
#[test]
fn criterion_01_trace_fiber_lemma() {
    let started = std::time::Instant::now();
    let mut checked = 0;
    for p in primes_to(169) {
        let ring = ResidueRing::new(p);
        let n = ring.size() as u64;
        let hist = congruence::trace_histogram(&ring).unwrap();
        assert_eq!(hist[ring.reduce(gi(2, 0)).0 as usize], n * n, "t=2 at {p}");
        assert_eq!(
            hist[ring.reduce(gi(-2, 0)).0 as usize],
            n * n,
            "t=-2 at {p}"
        );
        checked += 1;
    }
    assert!(
        started.elapsed().as_secs() < 300,
        "over the 5 minute budget"
    );
    println!(
        "[criterion 01] PASS - trace fibers at +-2 equal N^2 for {checked} primes with N <= 169 ({:?})",
        started.elapsed()
    );
}

/// Group orders `N^3 - N` by enumeration, and the CRT product law for every
/// square-free composite of norm <= 200 by direct enumeration.
#[test]
fn criterion_02_group_orders() {
    let mut primes_checked = 0;
    for p in primes_to(169) {
        let ring = ResidueRing::new(p);
        let n = ring.size() as i128;
        let mut count = 0i128;
        congruence::enumerate_sl2_with(&ring, |_| count += 1).unwrap();
        assert_eq!(count, n * n * n - n, "prime {p}");
        primes_checked += 1;
    }
    let mut composites_checked = 0;
    for q in sieve::squarefree_moduli(200) {
        if gaussian::factor(q).unwrap().factors.len() < 2 {
            continue;
        }
        let ring = ResidueRing::new(q);
        let mut count = 0i128;
        congruence::enumerate_sl2_with(&ring, |_| count += 1).unwrap();
        assert_eq!(count, congruence::order_by_crt(q).unwrap(), "composite {q}");
        composites_checked += 1;
    }
    assert!(composites_checked > 10);
    println!(
        "[criterion 02] PASS - |SL2| = N^3 - N for {primes_checked} primes; CRT product law on {composites_checked} square-free composites with N <= 200"
    );
}

/// `rho_t = 1/(N^2 - 1)` as exact rationals at `t = +-2`.
#[test]
fn criterion_03_rho_exact() {
    let mut checked = 0;
    for p in primes_to(169) {
        let n = p.norm();
        let expected = Rat::new(1, n * n - 1);
        assert_eq!(congruence::rho_t(p, gi(2, 0)).unwrap(), expected, "{p}");
        assert_eq!(congruence::rho_t(p, gi(-2, 0)).unwrap(), expected, "{p}");
        checked += 1;
    }
    println!("[criterion 03] PASS - rho_(+-2) = 1/(N^2-1) exactly for {checked} primes");
}

/// Weil bounds: Kloosterman sums over all `(a, b) != (0, 0)` and all
/// nontrivial characters; SL2 dot-product sums over all unit tuples obey
/// `2 N^(3/2)`; the `c = 0` stratum vanishes whenever the second slot is a unit.
#[test]
fn criterion_04_kloosterman_weil() {
    let moduli = [gi(1, 1), gi(2, 1), gi(3, 0), gi(3, 2)];
    let mut kloosterman_sums = 0u64;
    let mut sl2_sums = 0u64;
    for q in moduli {
        let table = charsums::CharacterTable::new(q).unwrap();
        let ring = ResidueRing::new(q);
        let n = ring.size();
        let chars: Vec<_> = table
            .all_characters()
            .into_iter()
            .filter(|c| !c.is_trivial())
            .collect();
        for chi in &chars {
            for a in ring.elements() {
                for b in ring.elements() {
                    if a == ring.zero() && b == ring.zero() {
                        continue;
                    }
                    let k = charsums::kloosterman(&table, chi, a, b).unwrap();
                    assert!(
                        k.norm() <= charsums::weil_bound(n) + 1e-9,
                        "q={q} |K|={} bound={}",
                        k.norm(),
                        charsums::weil_bound(n)
                    );
                    kloosterman_sums += 1;
                }
            }
        }
        // SL2 sums over every unit 4-tuple
        let group = Sl2Group::new(ResidueRing::new(q)).unwrap();
        let rows = charsums::weil_margin_scan(&table, &group, None, mode());
        assert!(rows.iter().all(|r| !r.violated()), "q={q}");
        sl2_sums += rows.len() as u64;
        // the c=0 stratum cancels exactly for unit second slots
        let units: Vec<GaussianInt> = ring.units().map(|u| ring.lift(u)).collect();
        for &y in units.iter().take(4) {
            let xi = [gi(1, 0), y, gi(1, 0), gi(1, 0)];
            for chi in chars.iter().take(4) {
                let strata = charsums::sl2_charsum_strata(&table, chi, xi).unwrap();
                assert!(
                    strata.c_zero.norm() < 1e-7 * n as f64,
                    "q={q}: c=0 stratum {}",
                    strata.c_zero.norm()
                );
            }
        }
    }
    println!(
        "[criterion 04] PASS - zero Weil violations over {kloosterman_sums} Kloosterman sums and {sl2_sums} SL2 sums on moduli 1+i, 2+i, 3, 3+2i"
    );
}

/// Irreducible, aperiodic, primitivity index <= 3 for R in 4, 5, 6.
#[test]
fn criterion_05_subshift_structure() {
    let mut indices = Vec::new();
    for r in [4.0, 5.0, 6.0] {
        let (_, a) = system(r);
        let s = subshift::check_irreducible_aperiodic(&a);
        assert!(s.irreducible, "R={r}");
        assert_eq!(s.period, 1, "R={r}");
        let k = s.primitivity_index.expect("primitive");
        assert!(k <= 3, "R={r}: primitivity index {k}");
        indices.push(k);
    }
    println!(
        "[criterion 05] PASS - irreducible and aperiodic at R=4,5,6 with primitivity indices {indices:?}"
    );
}

/// Branch Mobius actions match the map to 1e-12 at interior samples, and the
/// norm-distance identity holds to 1e-9 over ten thousand enumerated matrices.
#[test]
fn criterion_06_geometry_consistency() {
    let (p, a) = system(4.0);
    let mut points = 0;
    for part in &p.parts {
        let m = part.branch_matrix();
        for s in &part.samples {
            let (re, im) = s.to_f64();
            let (fr, fi) = hurwitz::apply_fhat(re, im).unwrap();
            let (gr, gim) = m.mobius_f64(re, im);
            let err = ((fr - gr).powi(2) + (fi - gim).powi(2)).sqrt();
            assert!(err < 1e-12, "cell {:?}: {err}", part.cell);
            points += 1;
        }
    }
    let mats = p.branch_matrices();
    let set = geodesics::ball_matrix_set(&a, &mats, 20.0, false, mode());
    assert!(set.len() >= 10_000, "need 1e4 matrices, got {}", set.len());
    let mut worst: f64 = 0.0;
    for m in set.iter().take(10_000) {
        worst = worst.max(geodesics::hyperbolic_distance_identity_residual(m));
    }
    assert!(worst < 1e-9, "distance identity residual {worst}");
    println!(
        "[criterion 06] PASS - branch actions match at {points} samples (1e-12); 2cosh d(j,gj) = ||g||^2 to {worst:.2e} on 10^4 matrices"
    );
}

/// Periodic Birkhoff sums equal matrix translation lengths to 1e-8 on 200
/// cyclically admissible words.
#[test]
fn criterion_07_periodic_orbit_lengths() {
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    let (p, a) = system(4.0);
    let mats = p.branch_matrices();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut tested = 0;
    let mut worst: f64 = 0.0;
    while tested < 200 {
        let len = 1 + rng.random_range(0..8);
        let mut w = vec![rng.random_range(0..a.size()) as subshift::Letter];
        for _ in 1..len {
            let succ: Vec<_> = a.successors(*w.last().unwrap() as usize).collect();
            w.push(succ[rng.random_range(0..succ.len())]);
        }
        if !a.is_cyclically_admissible(&w) {
            continue;
        }
        let word = Word(w);
        let s = thermo::periodic_birkhoff_sum(&p, &a, &word).unwrap();
        let m = geodesics::word_matrix_unchecked(&mats, &word.0);
        let (l, _) = geodesics::length_holonomy(&m).unwrap();
        worst = worst.max((s - l).abs());
        tested += 1;
    }
    assert!(worst < 1e-8, "worst deviation {worst}");
    println!(
        "[criterion 07] PASS - |S_n tau - 2 log lambda_max| <= {worst:.2e} on 200 periodic words"
    );
}

/// Growth exponents in (0, 2) with certified sign brackets, monotone in the
/// radius, nested pressure brackets in depth, the exact full-shift control
/// system, and the log-count slope within 0.15 of `2 delta` at R = 4.
#[test]
fn criterion_08_growth_exponent() {
    let started = std::time::Instant::now();
    // full-shift control system reproduced exactly
    let g = thermo::PressureGraph::synthetic_full_shift(9, 0.75);
    for s in [0.5, 1.5] {
        let e = thermo::pressure_on_graph(&g, s);
        let exact = 9.0f64.ln() - s * 0.75;
        assert!(e.lower <= exact && exact <= e.upper && e.width() < 1e-8);
    }

    let mut deltas = Vec::new();
    for (r, tol, depth) in [(4.0, 5e-3, 4), (6.0, 2e-2, 3), (8.0, 2e-2, 3)] {
        let (p, a) = system(r);
        // nested brackets in depth at a fixed parameter
        let g2 = thermo::PressureGraph::build(&p, &a, 2, mode()).unwrap();
        let g3 = thermo::PressureGraph::build(&p, &a, 3, mode()).unwrap();
        let e2 = thermo::pressure_on_graph(&g2, 1.8);
        let e3 = thermo::pressure_on_graph(&g3, 1.8);
        assert!(e3.width() < e2.width());
        assert!(e3.lower >= e2.lower - 1e-9 && e3.upper <= e2.upper + 1e-9);

        let res = thermo::solve_delta(&p, &a, tol, depth, mode()).unwrap();
        // the signs of P are certified at the bracket ends, so delta_R
        // lies in (lo, hi) inside (0, 2)
        assert!(
            res.lo > 0.0 && res.hi < 2.0,
            "R={r}: [{}, {}]",
            res.lo,
            res.hi
        );
        assert!(res.lo <= res.delta && res.delta <= res.hi);
        deltas.push((r, res.delta, res.lo, res.hi));
    }
    assert!(
        deltas[0].1 < deltas[1].1 && deltas[1].1 < deltas[2].1,
        "{deltas:?}"
    );

    // slope of the norm-ball count against 2 delta at R = 4
    let (p, a) = system(4.0);
    let mats = p.branch_matrices();
    let mut pts = Vec::new();
    for x in [8.0f64, 16.0, 32.0, 64.0] {
        let set = geodesics::ball_matrix_set(&a, &mats, x, true, mode());
        pts.push((x.ln(), (set.len() as f64).ln()));
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let gap = (slope - 2.0 * deltas[0].1).abs();
    assert!(gap < 0.15, "slope {slope} vs 2 delta {}", 2.0 * deltas[0].1);
    assert!(
        started.elapsed().as_secs() < 1800,
        "over the 30 minute budget"
    );
    println!(
        "[criterion 08] PASS - delta = {:.4} < {:.4} < {:.4} in (0,2); count slope {slope:.4} vs 2*delta_4 = {:.4} (gap {gap:.4}); {:?}",
        deltas[0].1, deltas[1].1, deltas[2].1, 2.0 * deltas[0].1, started.elapsed()
    );
}

/// Congruence equidistribution substitute: the maximal relative class
/// deviation mod 1+i strictly decreases from X = 16 to X = 64 at R = 4, and
/// every class is hit at X = 32.
#[test]
fn criterion_09_equidistribution() {
    let (p, a) = system(4.0);
    let mats = p.branch_matrices();
    let group = Sl2Group::new(ResidueRing::new(gi(1, 1))).unwrap();
    let dev = |x: f64| {
        let set = geodesics::ball_matrix_set(&a, &mats, x, true, mode());
        congruence::equidist_stats(&set, &group, mode()).unwrap()
    };
    let r16 = dev(16.0);
    let r32 = dev(32.0);
    let r64 = dev(64.0);
    assert_eq!(r32.classes_hit, 6, "all classes mod 1+i at X=32");
    assert!(
        r64.max_rel_dev < r16.max_rel_dev,
        "deviation did not decay: {} -> {}",
        r16.max_rel_dev,
        r64.max_rel_dev
    );
    println!(
        "[criterion 09] PASS - max relative deviation mod 1+i: {:.4} (X=16) -> {:.4} (X=32) -> {:.4} (X=64); classes hit 6/6 at X=32",
        r16.max_rel_dev, r32.max_rel_dev, r64.max_rel_dev
    );
}

/// Mertens drift within 1 and the dimension-2 product ratio stable within a
/// factor 3 over the grid.
#[test]
fn criterion_10_mertens_and_dimension() {
    let mut worst: f64 = 0.0;
    for n in [1_000u64, 10_000, 100_000, 1_000_000] {
        let rep = sieve::mertens_check(n);
        assert!(rep.deviation.abs() < 1.0, "n={n}: {}", rep.deviation);
        worst = worst.max(rep.deviation.abs());
    }
    let ratios: Vec<f64> = [(10u64, 100u64), (10, 1_000), (100, 10_000)]
        .iter()
        .map(|&(w, z)| sieve::dimension_product(w, z).ratio)
        .collect();
    let max = ratios.iter().cloned().fold(0.0f64, f64::max);
    let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(max / min < 3.0, "{ratios:?}");
    println!(
        "[criterion 10] PASS - Mertens drift <= {worst:.4} for n up to 1e6; dimension-2 ratios spread {:.3}",
        max / min
    );
}

/// Sieve plumbing: the trace-level decomposition of `U_q` is exact, the
/// triple product has no glued-word collisions, and `beta` is multiplicative.
#[test]
fn criterion_11_sieve_plumbing() {
    let (p, a) = system(4.0);
    let set = sieve::build_sifting_set(&p, &a, 6.0, 4.0, 4.0, mode()).unwrap();
    let words = set.materialize().unwrap();
    assert_eq!(
        words.len(),
        set.xi.len() * set.aleph.len() * set.omega.len()
    );
    let mut dedup = words.clone();
    dedup.sort();
    dedup.dedup();
    assert_eq!(dedup.len(), words.len(), "glued words must be distinct");

    let mut counts = 0;
    for q in sieve::squarefree_moduli(15) {
        let ring = ResidueRing::new(q);
        let c = sieve::count_u(&set, &p, &ring, mode()).unwrap();
        assert_eq!(c.direct, c.via_trace_levels, "q={q}");
        counts += 1;
    }
    for (u, v) in [
        (gi(1, 1), gi(2, 1)),
        (gi(1, 1), gi(3, 0)),
        (gi(2, 1), gi(1, 2)),
    ] {
        assert_eq!(
            congruence::beta(u * v).unwrap(),
            congruence::beta(u).unwrap() * congruence::beta(v).unwrap()
        );
    }
    println!(
        "[criterion 11] PASS - |Pi| = {} with no collisions; U_q = trace-level sum on {counts} moduli; beta multiplicative",
        words.len()
    );
}

/// The harvested square-free discriminant family at R = 4, X = 32 is
/// nonempty and every member passes an independent factorization.
#[test]
fn criterion_12_harvest() {
    let (p, a) = system(4.0);
    let mats = p.branch_matrices();
    let classes = geodesics::enumerate_ball(&a, &mats, 32.0, mode());
    let report = sieve::harvest(&classes, 1.82, 0.05);
    assert!(!report.d_set.is_empty(), "harvest came up empty");
    for d in &report.d_set {
        let f = gaussian::factor(*d).unwrap();
        assert!(
            f.factors.iter().all(|&(_, e)| e == 1),
            "D = {d} not square-free"
        );
        assert_eq!(f.product(), *d);
        // and D really is t^2 - 4 for an observed trace
        assert!(report.traces.iter().any(|b| b.disc == *d && b.squarefree));
    }
    println!(
        "[criterion 12] PASS - {} square-free discriminants harvested at R=4, X=32 from {} classes, all re-factored independently",
        report.d_set.len(),
        report.total_classes
    );
}

/// Oracle equivalences: pruned enumeration equals the exhaustive reference at
/// X <= 8; the strata evaluation equals direct brute force; the linear-factor
/// square-free shortcut equals direct factorization on 10^4 inputs.
#[test]
fn criterion_13_oracle_equivalences() {
    let (p, a) = system(4.0);
    let mats = p.branch_matrices();
    for x in [6.0, 8.0] {
        let mut pruned = geodesics::words_in_ball(&a, &mats, x, None, mode());
        geodesics::sort_ball_words(&mut pruned);
        let max_len = pruned.iter().map(|w| w.word.len()).max().unwrap();
        let unpruned = geodesics::words_in_ball_unpruned(&a, &mats, x, max_len + 2);
        assert_eq!(pruned.len(), unpruned.len(), "X={x}");
        for (pw, uw) in pruned.iter().zip(&unpruned) {
            assert_eq!(pw.word, uw.word);
            assert_eq!(pw.matrix, uw.matrix);
        }
    }

    let mut strata_checked = 0;
    for q in [gi(1, 1), gi(2, 1), gi(3, 0)] {
        let table = charsums::CharacterTable::new(q).unwrap();
        let ring = ResidueRing::new(q);
        let group = Sl2Group::new(ResidueRing::new(q)).unwrap();
        let units: Vec<GaussianInt> = ring.units().map(|u| ring.lift(u)).collect();
        for chi in table
            .all_characters()
            .into_iter()
            .filter(|c| !c.is_trivial())
        {
            for &u in units.iter().take(3) {
                let xi = [u, gi(1, 0), u, gi(1, 0)];
                let direct = charsums::sl2_charsum(&group, &chi, xi, mode());
                let strata = charsums::sl2_charsum_strata(&table, &chi, xi).unwrap();
                assert!(
                    (direct - strata.total()).norm() < 1e-6 * group.len() as f64,
                    "q={q}"
                );
                strata_checked += 1;
            }
        }
    }

    let mut shortcut_checked = 0;
    for re in -50i128..=50 {
        for im in -50i128..=50 {
            let t = gi(re, im);
            let disc = t * t - gi(4, 0);
            if disc.is_zero() {
                continue;
            }
            assert_eq!(
                sieve::squarefree_disc_via_factors(t).unwrap(),
                gaussian::is_squarefree(disc).unwrap(),
                "t={t}"
            );
            shortcut_checked += 1;
        }
    }
    assert!(shortcut_checked >= 10_000);
    println!(
        "[criterion 13] PASS - pruned = unpruned at X = 6 and 8; strata = direct on {strata_checked} sums; square-free shortcut = direct on {shortcut_checked} inputs"
    );
}
