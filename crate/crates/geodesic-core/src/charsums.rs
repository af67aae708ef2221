//! Additive characters of `Z[i]/(q)`, Kloosterman sums, and `SL2` dot-product
//! character sums with Weil-bound margins.
//!
//! Characters are realized through a fixed standard character `psi` built
//! prime by prime: split and ramified primes identify the residue field with
//! a prime field, inert primes use the field trace to the prime subfield;
//! square-free composites take the product over their prime factors. Every
//! additive character is then `chi_w(z) = psi(w z)` for a unique multiplier
//! `w`, and the order of `chi_w` is the additive order of `w` - a rational
//! integer dividing the norm, which is exactly how the character families
//! are indexed downstream.

use num_complex::Complex64;
use thiserror::Error;

use crate::congruence::Sl2Group;
use crate::exec::{self, ExecMode};
use crate::gaussian::{self, GaussianInt, Residue, ResidueRing};

#[derive(Debug, Error, PartialEq)]
pub enum CharsumError {
    #[error("modulus must be square-free")]
    NotSquarefree,
    #[error("modulus must be prime for this sum")]
    NotPrime,
    #[error("character must be nontrivial")]
    TrivialCharacter,
    #[error("order {0} does not divide the norm {1}")]
    BadOrder(u64, u64),
    #[error("the strata evaluation needs a unit in the second slot")]
    StrataNeedsUnit,
}

/// Standard-character infrastructure for one residue ring.
pub struct CharacterTable {
    ring: ResidueRing,
    /// Exact phase of `psi` at each residue, as a fraction of a full turn.
    phase_num: Vec<i64>,
    phase_den: i64,
    primes: Vec<(GaussianInt, i64)>,
}

impl CharacterTable {
    pub fn new(modulus: GaussianInt) -> Result<CharacterTable, CharsumError> {
        let f = gaussian::factor(modulus).map_err(|_| CharsumError::NotSquarefree)?;
        if !f.is_squarefree() {
            return Err(CharsumError::NotSquarefree);
        }
        let ring = ResidueRing::new(modulus);
        let primes: Vec<(GaussianInt, i64)> = f
            .factors
            .iter()
            .map(|&(p, _)| {
                let rational = if p.im == 0 { p.re } else { p.norm() };
                (p, rational as i64)
            })
            .collect();
        // phase(z) = sum_i tr_i(z mod p_i) / p_i (mod 1)
        let den: i64 = primes.iter().map(|&(_, p)| p).product();
        let sub_rings: Vec<ResidueRing> =
            primes.iter().map(|&(p, _)| ResidueRing::new(p)).collect();
        let mut phase_num = Vec::with_capacity(ring.size());
        let elements: Vec<Residue> = ring.elements().collect();
        for &r in &elements {
            let z = ring.lift(r);
            let mut num: i64 = 0;
            for (&(prime, p), sub) in primes.iter().zip(&sub_rings) {
                let zr = sub.lift(sub.reduce(z));
                // trace to the prime subfield: identity on prime-field quotients,
                // z + conj(z) = 2 Re z for inert primes
                let tr = if prime.im == 0 && prime.re > 2 {
                    (2 * zr.re).rem_euclid(p as i128) as i64
                } else {
                    zr.re.rem_euclid(p as i128) as i64
                };
                num = (num + tr * (den / p)).rem_euclid(den);
            }
            phase_num.push(num);
        }
        Ok(CharacterTable {
            ring,
            phase_num,
            phase_den: den,
            primes,
        })
    }

    pub fn ring(&self) -> &ResidueRing {
        &self.ring
    }

    /// `psi(z)` as a point on the unit circle.
    pub fn psi(&self, z: Residue) -> Complex64 {
        let angle = 2.0 * std::f64::consts::PI * self.phase_num[z.0 as usize] as f64
            / self.phase_den as f64;
        Complex64::new(angle.cos(), angle.sin())
    }

    /// Additive order of the character `z -> psi(w z)`: the least `k >= 1`
    /// with `k w = 0`, a product of the rational primes where `w` survives.
    pub fn order_of(&self, w: Residue) -> u64 {
        let zw = self.ring.lift(w);
        let mut ord = 1u64;
        for &(prime, p) in &self.primes {
            let sub = ResidueRing::new(prime);
            if sub.reduce(zw) != sub.zero() {
                ord *= p as u64;
            }
        }
        ord
    }

    /// The character with multiplier `w`, with a precomputed value table.
    pub fn character(&self, w: Residue) -> AdditiveCharacter {
        let table: Vec<Complex64> = self
            .ring
            .elements()
            .map(|z| self.psi(self.ring.mul(w, z)))
            .collect();
        AdditiveCharacter {
            multiplier: w,
            order: self.order_of(w),
            table,
        }
    }

    /// All characters of exact order `q` (a rational integer).
    pub fn characters_of_order(&self, q: u64) -> Result<Vec<AdditiveCharacter>, CharsumError> {
        let n = self.ring.size() as u64;
        if q == 0 || n % q != 0 {
            return Err(CharsumError::BadOrder(q, n));
        }
        Ok(self
            .ring
            .elements()
            .filter(|&w| self.order_of(w) == q)
            .map(|w| self.character(w))
            .collect())
    }

    /// Every character once, indexed by multiplier.
    pub fn all_characters(&self) -> Vec<AdditiveCharacter> {
        self.ring.elements().map(|w| self.character(w)).collect()
    }
}

/// One additive character, tabulated over the ring.
#[derive(Debug, Clone)]
pub struct AdditiveCharacter {
    pub multiplier: Residue,
    pub order: u64,
    table: Vec<Complex64>,
}

impl AdditiveCharacter {
    pub fn eval(&self, z: Residue) -> Complex64 {
        self.table[z.0 as usize]
    }

    pub fn is_trivial(&self) -> bool {
        self.order == 1
    }
}

/// Kloosterman-type sum `K(chi; a, b) = sum over units c of chi(a c + b c^{-1})`.
pub fn kloosterman(
    table: &CharacterTable,
    chi: &AdditiveCharacter,
    a: Residue,
    b: Residue,
) -> Result<Complex64, CharsumError> {
    if chi.is_trivial() {
        return Err(CharsumError::TrivialCharacter);
    }
    if table.primes.len() != 1 {
        return Err(CharsumError::NotPrime);
    }
    let ring = table.ring();
    let mut sum = Complex64::new(0.0, 0.0);
    for c in ring.units() {
        let cinv = ring.inverse(c).expect("unit");
        let arg = ring.add(ring.mul(a, c), ring.mul(b, cinv));
        sum += chi.eval(arg);
    }
    Ok(sum)
}

/// Weil bound for the Kloosterman sum at this norm.
pub fn weil_bound(norm: usize) -> f64 {
    2.0 * (norm as f64).sqrt()
}

/// Bound for the full `SL2` dot-product sum: `2 N^{3/2}`.
pub fn sl2_bound(norm: usize) -> f64 {
    2.0 * (norm as f64).powf(1.5)
}

/// Histogram of the dot product `s . xi = a x1 + b x2 + c x3 + d x4` over the
/// group, by residue index. One pass serves every character at this `xi`.
pub fn dot_histogram(group: &Sl2Group, xi: [GaussianInt; 4], mode: ExecMode) -> Vec<u64> {
    let ring = group.ring();
    let x: Vec<Residue> = xi.iter().map(|&v| ring.reduce(v)).collect();
    let idx: Vec<usize> = (0..group.len()).collect();
    let chunks: Vec<&[usize]> = idx.chunks(16384).collect();
    let partials: Vec<Vec<u64>> = exec::map_slice(mode, &chunks, |chunk| {
        let mut hist = vec![0u64; ring.size()];
        for &i in chunk.iter() {
            let e = group.element(i);
            let mut acc = ring.mul(e[0], x[0]);
            acc = ring.add(acc, ring.mul(e[1], x[1]));
            acc = ring.add(acc, ring.mul(e[2], x[2]));
            acc = ring.add(acc, ring.mul(e[3], x[3]));
            hist[acc.0 as usize] += 1;
        }
        hist
    });
    let mut hist = vec![0u64; ring.size()];
    for p in partials {
        for (a, v) in hist.iter_mut().zip(p) {
            *a += v;
        }
    }
    hist
}

/// Direct brute-force evaluation of `sum over SL2(q) of chi(s . xi)`.
pub fn sl2_charsum(
    group: &Sl2Group,
    chi: &AdditiveCharacter,
    xi: [GaussianInt; 4],
    mode: ExecMode,
) -> Complex64 {
    let hist = dot_histogram(group, xi, mode);
    charsum_from_histogram(&hist, chi)
}

pub fn charsum_from_histogram(hist: &[u64], chi: &AdditiveCharacter) -> Complex64 {
    hist.iter()
        .enumerate()
        .map(|(v, &h)| chi.eval(Residue(v as u32)) * h as f64)
        .sum()
}

/// The two strata of the dot-product sum over a prime modulus, evaluated by
/// the reassembled closed forms; their total must equal the direct sum.
#[derive(Debug, Clone, Copy)]
pub struct StrataSum {
    /// `c = 0` stratum; exactly zero when the second slot of `xi` is a unit.
    pub c_zero: Complex64,
    /// `c != 0` stratum, `N * sum_c chi(c(x3 - x2^{-1} x4 x1) - c^{-1} x2)`.
    pub c_nonzero: Complex64,
}

impl StrataSum {
    pub fn total(&self) -> Complex64 {
        self.c_zero + self.c_nonzero
    }
}

pub fn sl2_charsum_strata(
    table: &CharacterTable,
    chi: &AdditiveCharacter,
    xi: [GaussianInt; 4],
) -> Result<StrataSum, CharsumError> {
    if table.primes.len() != 1 {
        return Err(CharsumError::NotPrime);
    }
    if chi.is_trivial() {
        return Err(CharsumError::TrivialCharacter);
    }
    let ring = table.ring();
    let x: Vec<Residue> = xi.iter().map(|&v| ring.reduce(v)).collect();

    // c = 0: ad = 1, b free
    let mut c_zero = Complex64::new(0.0, 0.0);
    for a in ring.units() {
        let ainv = ring.inverse(a).expect("unit");
        let base = ring.add(ring.mul(a, x[0]), ring.mul(ainv, x[3]));
        for b in ring.elements() {
            c_zero += chi.eval(ring.add(base, ring.mul(b, x[1])));
        }
    }

    // c != 0 collapses to a Kloosterman-type sum times the norm
    let y_inv = ring.inverse(x[1]).ok_or(CharsumError::StrataNeedsUnit)?;
    let aa = ring.sub(x[2], ring.mul(ring.mul(y_inv, x[3]), x[0]));
    let bb = ring.neg(x[1]);
    let mut inner = Complex64::new(0.0, 0.0);
    for c in ring.units() {
        let cinv = ring.inverse(c).expect("unit");
        inner += chi.eval(ring.add(ring.mul(c, aa), ring.mul(cinv, bb)));
    }
    let c_nonzero = inner * ring.size() as f64;
    Ok(StrataSum { c_zero, c_nonzero })
}

/// One row of the Weil-margin scan.
#[derive(Debug, Clone)]
pub struct MarginRow {
    pub modulus: GaussianInt,
    pub chi_multiplier: u32,
    pub xi: [GaussianInt; 4],
    pub abs_sum: f64,
    pub bound: f64,
}

impl MarginRow {
    pub fn margin(&self) -> f64 {
        self.bound - self.abs_sum
    }

    pub fn violated(&self) -> bool {
        // allow accumulated float noise in exact cancellations
        self.abs_sum > self.bound + 1e-6
    }
}

/// Scan `|sum over SL2 of chi(s . xi)|` against `2 N^{3/2}` for all
/// nontrivial characters and all unit 4-tuples `xi` (or a supplied list).
pub fn weil_margin_scan(
    table: &CharacterTable,
    group: &Sl2Group,
    xi_list: Option<&[[GaussianInt; 4]]>,
    mode: ExecMode,
) -> Vec<MarginRow> {
    let ring = table.ring();
    let owned: Vec<[GaussianInt; 4]>;
    let xis: &[[GaussianInt; 4]] = match xi_list {
        Some(l) => l,
        None => {
            let units: Vec<GaussianInt> = ring.units().map(|u| ring.lift(u)).collect();
            owned = units
                .iter()
                .flat_map(|&a| {
                    let units = units.clone();
                    units.clone().into_iter().flat_map(move |b| {
                        let units2 = units.clone();
                        units2.clone().into_iter().flat_map(move |c| {
                            units2.clone().into_iter().map(move |d| [a, b, c, d])
                        })
                    })
                })
                .collect();
            &owned
        }
    };
    let chars: Vec<AdditiveCharacter> = table
        .all_characters()
        .into_iter()
        .filter(|c| !c.is_trivial())
        .collect();
    let bound = sl2_bound(ring.size());
    let rows: Vec<Vec<MarginRow>> = exec::map_slice(mode, xis, |xi| {
        let hist = dot_histogram(group, *xi, ExecMode::Sequential);
        chars
            .iter()
            .map(|chi| MarginRow {
                modulus: ring.modulus(),
                chi_multiplier: chi.multiplier.0,
                xi: *xi,
                abs_sum: charsum_from_histogram(&hist, chi).norm(),
                bound,
            })
            .collect()
    });
    rows.into_iter().flatten().collect()
}

/// `charsum_margins.csv` payload.
pub fn margins_csv(rows: &[MarginRow]) -> String {
    let mut s = String::from("q_re,q_im,chi_multiplier,xi,abs_sum,bound,margin\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{} {} {} {},{:.17e},{:.17e},{:.17e}\n",
            r.modulus.re,
            r.modulus.im,
            r.chi_multiplier,
            r.xi[0],
            r.xi[1],
            r.xi[2],
            r.xi[3],
            r.abs_sum,
            r.bound,
            r.margin()
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::gi;

    fn table(q: GaussianInt) -> CharacterTable {
        CharacterTable::new(q).unwrap()
    }

    #[test]
    fn character_property_exhaustive_small_moduli() {
        for q in [gi(1, 1), gi(2, 1), gi(3, 0), gi(1, 2), gi(3, 1)] {
            let t = table(q);
            let ring = t.ring();
            for chi in t.all_characters() {
                for a in ring.elements() {
                    for b in ring.elements() {
                        let lhs = chi.eval(ring.add(a, b));
                        let rhs = chi.eval(a) * chi.eval(b);
                        assert!((lhs - rhs).norm() < 1e-12, "q={q}");
                    }
                }
            }
        }
    }

    #[test]
    fn character_count_by_order_is_complete() {
        for q in [gi(1, 1), gi(2, 1), gi(3, 0), gi(3, 2)] {
            let t = table(q);
            let n = t.ring().size() as u64;
            let mut total = 0;
            for ord in 1..=n {
                if n % ord == 0 {
                    total += t.characters_of_order(ord).unwrap().len();
                }
            }
            assert_eq!(total as u64, n, "q={q}");
        }
        // mod 1+i: one trivial and one order-2 character
        let t = table(gi(1, 1));
        assert_eq!(t.characters_of_order(1).unwrap().len(), 1);
        assert_eq!(t.characters_of_order(2).unwrap().len(), 1);
        // inert 3: all nontrivial characters have order 3, none of order 9
        let t = table(gi(3, 0));
        assert_eq!(t.characters_of_order(3).unwrap().len(), 8);
        assert_eq!(t.characters_of_order(9).unwrap().len(), 0);
    }

    #[test]
    fn orthogonality_of_nontrivial_characters() {
        for q in [gi(1, 1), gi(2, 1), gi(3, 0), gi(5, 2), gi(1, 4), gi(5, 4)] {
            let t = table(q);
            let ring = t.ring();
            if ring.size() > 50 {
                continue;
            }
            for chi in t.all_characters() {
                let total: Complex64 = ring.elements().map(|z| chi.eval(z)).sum();
                if chi.is_trivial() {
                    assert!((total.re - ring.size() as f64).abs() < 1e-9);
                } else {
                    assert!(total.norm() < 1e-9, "q={q} w={}", chi.multiplier.0);
                }
            }
        }
    }

    #[test]
    fn kloosterman_example_mod_two_plus_i() {
        let t = table(gi(2, 1));
        let ring = t.ring();
        let chi = t.character(ring.one());
        let one = ring.one();
        let k = kloosterman(&t, &chi, one, one).unwrap();
        let expected = 2.0 + 2.0 * (4.0 * std::f64::consts::PI / 5.0).cos();
        assert!((k.re - expected).abs() < 1e-12 && k.im.abs() < 1e-12);
        assert!((k.re - 0.3819660112501051).abs() < 1e-12);
    }

    #[test]
    fn kloosterman_ramanujan_degenerate_case() {
        let t = table(gi(2, 1));
        let ring = t.ring();
        let chi = t.character(ring.one());
        // b = 0 gives a complete geometric sum minus the zero term
        let k = kloosterman(&t, &chi, ring.one(), ring.zero()).unwrap();
        assert!((k.re + 1.0).abs() < 1e-12 && k.im.abs() < 1e-12);
    }

    #[test]
    fn kloosterman_symmetry_and_weil_bound() {
        for q in [gi(2, 1), gi(3, 0)] {
            let t = table(q);
            let ring = t.ring();
            let n = ring.size();
            for chi in t.all_characters().into_iter().filter(|c| !c.is_trivial()) {
                for a in ring.elements() {
                    for b in ring.elements() {
                        let kab = kloosterman(&t, &chi, a, b).unwrap();
                        let kba = kloosterman(&t, &chi, b, a).unwrap();
                        assert!((kab - kba).norm() < 1e-9);
                        if a == ring.zero() && b == ring.zero() {
                            // K(chi; 0, 0) counts the units; not a Kloosterman sum
                            assert!((kab.re - (n as f64 - 1.0)).abs() < 1e-9);
                        } else {
                            assert!(kab.norm() <= weil_bound(n) + 1e-9);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn trivial_character_sums_to_group_order() {
        let t = table(gi(2, 1));
        let group = Sl2Group::new(ResidueRing::new(gi(2, 1))).unwrap();
        let chi = t.character(t.ring().zero());
        let s = sl2_charsum(&group, &chi, [gi(1, 0); 4], ExecMode::Sequential);
        assert!((s.re - 120.0).abs() < 1e-9 && s.im.abs() < 1e-9);
    }

    #[test]
    fn strata_equal_direct_and_c0_vanishes() {
        for q in [gi(1, 1), gi(2, 1), gi(3, 0)] {
            let t = table(q);
            let ring = t.ring();
            let group = Sl2Group::new(ResidueRing::new(q)).unwrap();
            let xi = [gi(1, 0), gi(1, 0), gi(1, 0), gi(1, 0)];
            for chi in t.all_characters().into_iter().filter(|c| !c.is_trivial()) {
                let direct = sl2_charsum(&group, &chi, xi, ExecMode::Sequential);
                let strata = sl2_charsum_strata(&t, &chi, xi).unwrap();
                assert!(
                    (direct - strata.total()).norm() < 1e-6 * group.len() as f64,
                    "q={q}: direct={direct} strata={}",
                    strata.total()
                );
                // second slot is a unit, so the c=0 stratum cancels exactly
                assert!(strata.c_zero.norm() < 1e-7 * ring.size() as f64);
            }
        }
    }

    #[test]
    fn pontryagin_factorization_over_prime_divisors() {
        // composite square-free modulus (1+i)(2+i), character of full order
        let q = gi(1, 1) * gi(2, 1);
        let t = table(q);
        let group = Sl2Group::new(ResidueRing::new(q)).unwrap();
        let chi = t.character(t.ring().one());
        assert_eq!(chi.order, 10);
        let xi = [gi(1, 0), gi(1, 0), gi(1, 0), gi(1, 0)];
        let total = sl2_charsum(&group, &chi, xi, ExecMode::Sequential);

        let mut product = Complex64::new(1.0, 0.0);
        for prime in [gi(1, 1), gi(2, 1)] {
            let tp = table(prime);
            let sub = Sl2Group::new(ResidueRing::new(prime)).unwrap();
            // the factor character with the CRT-matched multiplier
            let wp = tp.ring().reduce(t.ring().lift(t.ring().one()));
            let chip = tp.character(wp);
            product *= sl2_charsum(&sub, &chip, xi, ExecMode::Sequential);
        }
        assert!(
            (total - product).norm() < 1e-6 * group.len() as f64,
            "total={total} product={product}"
        );
    }

    #[test]
    fn margin_scan_has_no_violations_on_small_prime() {
        let q = gi(2, 1);
        let t = table(q);
        let group = Sl2Group::new(ResidueRing::new(q)).unwrap();
        let rows = weil_margin_scan(&t, &group, None, ExecMode::Sequential);
        assert_eq!(rows.len(), 4usize.pow(4) * 4); // 4^4 unit tuples, 4 nontrivial chars
        assert!(rows.iter().all(|r| !r.violated()));
    }
}
