//! Exact line-or-circle ("cline") geometry over the Gaussian rationals.
//!
//! A cline is the zero set of `E(z) = a|z|^2 + 2 Re(conj(B) z) + c` with
//! integer `a, c` and Gaussian-integer `B` (the triple is projective, so any
//! common scale can be divided out). Mobius maps with `Z[i]` entries send
//! clines to clines with exactly representable coefficients, and the sign of
//! `E` at a point is computable exactly at Gaussian-rational points. This is
//! the ground truth the Markov partition and transition matrix are built on.

use crate::gaussian::{gi, GaussianInt};

/// `a|z|^2 + 2 Re(conj(b) z) + c = 0`, with `b = b_re + i b_im`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Cline {
    pub a: i128,
    pub b_re: i128,
    pub b_im: i128,
    pub c: i128,
}

impl Cline {
    pub fn new(a: i128, b_re: i128, b_im: i128, c: i128) -> Cline {
        Cline { a, b_re, b_im, c }.reduced()
    }

    /// Circle of radius 1 centered at the Gaussian integer `c0`.
    pub fn unit_circle_at(c0: GaussianInt) -> Cline {
        Cline::new(1, -c0.re, -c0.im, c0.norm() - 1)
    }

    /// Vertical line `Re z = k/2`.
    pub fn vertical_half_line(k: i128) -> Cline {
        Cline::new(0, 1, 0, -k)
    }

    /// Horizontal line `Im z = l/2`.
    pub fn horizontal_half_line(l: i128) -> Cline {
        Cline::new(0, 0, 1, -l)
    }

    fn reduced(self) -> Cline {
        let mut g = gcd4(self.a, self.b_re, self.b_im, self.c);
        if g == 0 {
            g = 1;
        }
        Cline {
            a: self.a / g,
            b_re: self.b_re / g,
            b_im: self.b_im / g,
            c: self.c / g,
        }
    }

    pub fn is_line(&self) -> bool {
        self.a == 0
    }

    /// A genuine circle: `a != 0` and positive squared radius.
    pub fn is_circle(&self) -> bool {
        self.a != 0 && self.radius_sq_num() > 0
    }

    /// `|B|^2 - a c`, the squared radius times `a^2`.
    fn radius_sq_num(&self) -> i128 {
        self.b_re * self.b_re + self.b_im * self.b_im - self.a * self.c
    }

    /// Exact sign of `E` at the Gaussian-rational point `num/den` (`den` real > 0).
    pub fn eval_sign(&self, p: RatPoint) -> i128 {
        let n2 = p.num.norm();
        let d = p.den;
        let cross = self.b_re * p.num.re + self.b_im * p.num.im;
        let v = self.a * n2 + 2 * cross * d + self.c * d * d;
        v.signum()
    }

    /// Floating-point evaluation, for diagnostics only.
    pub fn eval_f64(&self, re: f64, im: f64) -> f64 {
        self.a as f64 * (re * re + im * im)
            + 2.0 * (self.b_re as f64 * re + self.b_im as f64 * im)
            + self.c as f64
    }

    /// Image cline under the Mobius action of `[[alpha, beta], [gamma, delta]]`
    /// (any nonzero determinant). The sign of `E` is preserved pointwise:
    /// `E'(w) = E(g^{-1} w) * |den|^2`.
    pub fn mobius_image(&self, m: [GaussianInt; 4]) -> Cline {
        let [alpha, beta, gamma, delta] = m;
        let a = gi(self.a, 0);
        let c = gi(self.c, 0);
        let b = gi(self.b_re, self.b_im);
        let bbar = b.conj();

        // a' = a|delta|^2 - 2 Re(conj(b) delta conj(gamma)) + c|gamma|^2
        let t = bbar * delta * gamma.conj();
        let a_new = self.a * delta.norm() - 2 * t.re + self.c * gamma.norm();

        // conj(b') = -a delta conj(beta) + conj(b) delta conj(alpha)
        //            + b conj(beta) gamma - c gamma conj(alpha)
        let bbar_new =
            -(a * delta * beta.conj()) + bbar * delta * alpha.conj() + b * beta.conj() * gamma
                - c * gamma * alpha.conj();

        // c' = a|beta|^2 - 2 Re(conj(b) beta conj(alpha)) + c|alpha|^2
        let u = bbar * beta * alpha.conj();
        let c_new = self.a * beta.norm() - 2 * u.re + self.c * alpha.norm();

        Cline::new(a_new, bbar_new.re, -bbar_new.im, c_new)
    }

    /// `(min |z|, max |z|)` over the closed disc `E <= 0`, when this is a
    /// circle with `a > 0`. Returned bounds are slightly outward-rounded.
    pub fn disc_abs_range(&self) -> Option<(f64, f64)> {
        if self.a <= 0 || self.radius_sq_num() <= 0 {
            return None;
        }
        let a = self.a as f64;
        let center = ((-self.b_re as f64) / a, (-self.b_im as f64) / a);
        let r = (self.radius_sq_num() as f64).sqrt() / a;
        let dist = (center.0 * center.0 + center.1 * center.1).sqrt();
        let lo = ((dist - r) * (1.0 - 1e-13)).max(0.0);
        let hi = (dist + r) * (1.0 + 1e-13);
        Some((lo, hi))
    }

    /// Same zero set, ignoring the orientation sign.
    pub fn same_locus(&self, other: &Cline) -> bool {
        let me = [self.a, self.b_re, self.b_im, self.c];
        let ot = [other.a, other.b_re, other.b_im, other.c];
        me == ot || me == ot.map(|v| -v)
    }

    /// Center of the disc in floating point (requires `a != 0`).
    pub fn center_f64(&self) -> (f64, f64) {
        let a = self.a as f64;
        ((-self.b_re as f64) / a, (-self.b_im as f64) / a)
    }
}

fn gcd2(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn gcd4(a: i128, b: i128, c: i128, d: i128) -> i128 {
    gcd2(gcd2(a, b), gcd2(c, d))
}

/// A point of the Gaussian-rational field, `num / den` with real `den > 0`,
/// or the point at infinity (`den == 0`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RatPoint {
    pub num: GaussianInt,
    pub den: i128,
}

impl RatPoint {
    pub fn new(num: GaussianInt, den: i128) -> RatPoint {
        assert!(den > 0);
        RatPoint { num, den }.reduced()
    }

    pub fn from_integer(z: GaussianInt) -> RatPoint {
        RatPoint { num: z, den: 1 }
    }

    /// Dyadic point `(re, im) / 2^k`.
    pub fn dyadic(re: i128, im: i128, k: u32) -> RatPoint {
        RatPoint::new(gi(re, im), 1 << k)
    }

    pub fn is_infinity(&self) -> bool {
        self.den == 0
    }

    fn reduced(self) -> RatPoint {
        let g = gcd4(self.num.re, self.num.im, self.den, 0).max(1);
        RatPoint {
            num: gi(self.num.re / g, self.num.im / g),
            den: self.den / g,
        }
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (
            self.num.re as f64 / self.den as f64,
            self.num.im as f64 / self.den as f64,
        )
    }

    /// Exact Mobius image under `[[alpha, beta], [gamma, delta]]`.
    /// Returns the point at infinity when the denominator vanishes.
    pub fn mobius(&self, m: [GaussianInt; 4]) -> RatPoint {
        let [alpha, beta, gamma, delta] = m;
        let d = gi(self.den, 0);
        let num = alpha * self.num + beta * d;
        let den = gamma * self.num + delta * d;
        if den.is_zero() {
            return RatPoint {
                num: GaussianInt::ONE,
                den: 0,
            };
        }
        // clear the complex denominator
        let n2 = num * den.conj();
        let d2 = den.norm();
        RatPoint::new(n2, d2)
    }
}
