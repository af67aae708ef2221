//! The quotient ring `Z[i]/(q)` with an indexed complete residue system.
//!
//! Representatives come from the column Hermite form of the lattice `(q)`:
//! with `g = gcd(Re q, Im q)` and `d1 = norm(q)/g`, the classes are
//! `{a + bi : 0 <= a < d1, 0 <= b < g}`, which gives O(1) reduction and a
//! dense index `a*g + b` for table-driven code.

use super::GaussianInt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Residue(pub u32);

#[derive(Debug, Clone)]
pub struct ResidueRing {
    modulus: GaussianInt,
    n: i64,
    /// Real period: `(d1, 0)` generates the real-axis part of the lattice.
    d1: i64,
    /// Imaginary period, `g = gcd(Re q, Im q)`.
    g: i64,
    /// The lattice contains `(x, g)`.
    x: i64,
    inv: Vec<Option<Residue>>,
}

impl ResidueRing {
    /// Build the ring for a nonzero modulus (stored as its canonical associate).
    pub fn new(modulus: GaussianInt) -> ResidueRing {
        assert!(!modulus.is_zero(), "modulus must be nonzero");
        let q = modulus.canonical();
        let n = q.norm() as i64;
        let (qr, qi) = (q.re as i64, q.im as i64);
        // Column reduction of the basis {q, iq} = {(qr, qi), (-qi, qr)}.
        let (g, u, v) = ext_gcd(qi, qr);
        // w1 = u*q + v*iq has imaginary part g.
        let w1re = u * qr - v * qi;
        let d1 = n / g.max(1);
        let x = if g == 0 { 0 } else { w1re.rem_euclid(d1) };
        let mut ring = ResidueRing {
            modulus: q,
            n,
            d1,
            g: g.max(1),
            x,
            inv: Vec::new(),
        };
        let mut inv = vec![None; n as usize];
        let one = ring.one();
        for a in ring.elements() {
            if inv[a.0 as usize].is_some() {
                continue;
            }
            for b in ring.elements() {
                if ring.mul(a, b) == one {
                    inv[a.0 as usize] = Some(b);
                    inv[b.0 as usize] = Some(a);
                    break;
                }
            }
        }
        ring.inv = inv;
        ring
    }

    pub fn modulus(&self) -> GaussianInt {
        self.modulus
    }

    /// Number of residue classes, `norm(modulus)`.
    pub fn size(&self) -> usize {
        self.n as usize
    }

    pub fn elements(&self) -> impl Iterator<Item = Residue> {
        (0..self.n as u32).map(Residue)
    }

    pub fn reduce(&self, z: GaussianInt) -> Residue {
        let re = z.re.rem_euclid(self.n as i128) as i64;
        let im = z.im.rem_euclid(self.n as i128) as i64;
        self.reduce_i64(re, im)
    }

    fn reduce_i64(&self, re: i64, im: i64) -> Residue {
        let k = im.div_euclid(self.g);
        let b = im - k * self.g;
        let a = (re - k * self.x).rem_euclid(self.d1);
        Residue((a * self.g + b) as u32)
    }

    /// The distinguished representative `a + bi`.
    pub fn lift(&self, r: Residue) -> GaussianInt {
        let a = (r.0 as i64) / self.g;
        let b = (r.0 as i64) % self.g;
        GaussianInt {
            re: a as i128,
            im: b as i128,
        }
    }

    pub fn zero(&self) -> Residue {
        Residue(0)
    }

    pub fn one(&self) -> Residue {
        self.reduce(GaussianInt::ONE)
    }

    pub fn i(&self) -> Residue {
        self.reduce(GaussianInt::I)
    }

    pub fn add(&self, a: Residue, b: Residue) -> Residue {
        let za = self.lift(a);
        let zb = self.lift(b);
        self.reduce(za + zb)
    }

    pub fn sub(&self, a: Residue, b: Residue) -> Residue {
        let za = self.lift(a);
        let zb = self.lift(b);
        self.reduce(za - zb)
    }

    pub fn neg(&self, a: Residue) -> Residue {
        self.reduce(-self.lift(a))
    }

    pub fn mul(&self, a: Residue, b: Residue) -> Residue {
        let za = self.lift(a);
        let zb = self.lift(b);
        self.reduce(za * zb)
    }

    pub fn inverse(&self, a: Residue) -> Option<Residue> {
        self.inv[a.0 as usize]
    }

    pub fn is_unit(&self, a: Residue) -> bool {
        self.inv[a.0 as usize].is_some()
    }

    pub fn units(&self) -> impl Iterator<Item = Residue> + '_ {
        self.elements().filter(|&r| self.is_unit(r))
    }
}

fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    if a == 0 && b == 0 {
        return (0, 0, 0);
    }
    let (mut r0, mut r1) = (a, b);
    let (mut s0, mut s1) = (1i64, 0i64);
    let (mut t0, mut t1) = (0i64, 1i64);
    while r1 != 0 {
        let q = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 < 0 {
        (-r0, -s0, -t0)
    } else {
        (r0, s0, t0)
    }
}
