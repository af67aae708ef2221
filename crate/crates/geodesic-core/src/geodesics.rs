//! Words to `SL2(Z[i])` matrices and closed-geodesic invariants.
//!
//! A word `w = (p_1 .. p_n)` maps to the product of its branch matrices with
//! later letters multiplying on the left, so concatenation is
//! anti-multiplicative: `pi(u || v) = pi(v) pi(u)`. This is the composition
//! order of the underlying branch maps, and it is what makes the pruned ball
//! search certified: appending a predecessor letter can never shrink the
//! bottom-row norm `|c|^2 + |d|^2` (see `words_in_ball`).

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::exec::{self, ExecMode};
use crate::gaussian::{self, gi, GaussianInt};
use crate::subshift::{self, Letter, SubshiftError, TransitionMatrix, Word};

#[derive(Debug, Error, PartialEq)]
pub enum GeodesicError {
    #[error("matrix is not loxodromic")]
    NotLoxodromic,
    #[error("matrix is plus or minus the identity")]
    DegenerateForm,
    #[error("discriminant is zero")]
    ZeroDiscriminant,
    #[error(transparent)]
    Word(#[from] SubshiftError),
}

/// A 2x2 matrix over the Gaussian integers, unit determinant in practice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mat2 {
    pub a: GaussianInt,
    pub b: GaussianInt,
    pub c: GaussianInt,
    pub d: GaussianInt,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2 {
        a: gi(1, 0),
        b: gi(0, 0),
        c: gi(0, 0),
        d: gi(1, 0),
    };

    pub fn new(a: GaussianInt, b: GaussianInt, c: GaussianInt, d: GaussianInt) -> Mat2 {
        Mat2 { a, b, c, d }
    }

    pub fn det(&self) -> GaussianInt {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> GaussianInt {
        self.a + self.d
    }

    pub fn frobenius_sq(&self) -> i128 {
        self.a.norm() + self.b.norm() + self.c.norm() + self.d.norm()
    }

    /// Bottom-row squared norm; monotone along admissible prefix extension.
    pub fn bottom_row_sq(&self) -> i128 {
        self.c.norm() + self.d.norm()
    }

    pub fn mul(&self, rhs: &Mat2) -> Mat2 {
        Mat2 {
            a: self.a * rhs.a + self.b * rhs.c,
            b: self.a * rhs.b + self.b * rhs.d,
            c: self.c * rhs.a + self.d * rhs.c,
            d: self.c * rhs.b + self.d * rhs.d,
        }
    }

    /// Inverse of a determinant-one matrix.
    pub fn inverse_sl2(&self) -> Mat2 {
        debug_assert_eq!(self.det(), gi(1, 0));
        Mat2 {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    pub fn neg(&self) -> Mat2 {
        Mat2 {
            a: -self.a,
            b: -self.b,
            c: -self.c,
            d: -self.d,
        }
    }

    pub fn as_array(&self) -> [GaussianInt; 4] {
        [self.a, self.b, self.c, self.d]
    }

    /// Flattened entry vector `(a, b, c, d)` for dot products.
    pub fn entries(&self) -> [GaussianInt; 4] {
        self.as_array()
    }

    fn cx(z: GaussianInt) -> Complex64 {
        Complex64::new(z.re as f64, z.im as f64)
    }

    /// Mobius action on a complex point.
    pub fn mobius_f64(&self, re: f64, im: f64) -> (f64, f64) {
        let z = Complex64::new(re, im);
        let w =
            (Self::cx(self.a) * z + Self::cx(self.b)) / (Self::cx(self.c) * z + Self::cx(self.d));
        (w.re, w.im)
    }

    /// The action on the point `j = (0, 0, 1)` of upper half-space, returned
    /// as `(z, t)` with `z` horizontal and `t > 0` the height.
    pub fn act_on_j(&self) -> (Complex64, f64) {
        let (a, b, c, d) = (
            Self::cx(self.a),
            Self::cx(self.b),
            Self::cx(self.c),
            Self::cx(self.d),
        );
        let den = c.norm_sqr() + d.norm_sqr();
        let z = (b * d.conj() + a * c.conj()) / den;
        (z, 1.0 / den)
    }
}

/// `pi(w)`: ordered product of branch matrices, empty word to the identity.
pub fn word_to_matrix(
    a: &TransitionMatrix,
    mats: &[Mat2],
    w: &Word,
) -> Result<Mat2, GeodesicError> {
    if let Some(pos) =
        w.0.windows(2)
            .position(|p| !a.get(p[0] as usize, p[1] as usize))
    {
        return Err(SubshiftError::Inadmissible(pos).into());
    }
    Ok(word_matrix_unchecked(mats, &w.0))
}

pub fn word_matrix_unchecked(mats: &[Mat2], w: &[Letter]) -> Mat2 {
    let mut p = Mat2::IDENTITY;
    for &l in w {
        p = mats[l as usize].mul(&p);
    }
    p
}

/// Translation length and holonomy from the expanding eigenvalue:
/// `l = 2 log |lambda|`, `theta = 2 arg lambda` in `[0, 2pi)`.
pub fn length_holonomy(m: &Mat2) -> Result<(f64, f64), GeodesicError> {
    let lambda = expanding_eigenvalue(m)?;
    let l = 2.0 * lambda.norm().ln();
    let theta = (2.0 * lambda.arg()).rem_euclid(2.0 * std::f64::consts::PI);
    Ok((l, theta))
}

/// The eigenvalue with `|lambda| > 1`.
pub fn expanding_eigenvalue(m: &Mat2) -> Result<Complex64, GeodesicError> {
    let t = Complex64::new(m.trace().re as f64, m.trace().im as f64);
    let s = (t * t - 4.0).sqrt();
    let l1 = (t + s) / 2.0;
    let l2 = (t - s) / 2.0;
    let lambda = if l1.norm() >= l2.norm() { l1 } else { l2 };
    if lambda.norm() <= 1.0 + 1e-9 {
        return Err(GeodesicError::NotLoxodromic);
    }
    Ok(lambda)
}

/// Both fixed points on the boundary; `other == None` marks infinity (c = 0).
#[derive(Debug, Clone, Copy)]
pub struct VisualPoints {
    pub alpha: Complex64,
    pub other: Option<Complex64>,
}

pub fn visual_points(m: &Mat2) -> Result<VisualPoints, GeodesicError> {
    expanding_eigenvalue(m)?;
    let a = Complex64::new(m.a.re as f64, m.a.im as f64);
    let d = Complex64::new(m.d.re as f64, m.d.im as f64);
    let b = Complex64::new(m.b.re as f64, m.b.im as f64);
    let c = Complex64::new(m.c.re as f64, m.c.im as f64);
    let t = a + d;
    let s = (t * t - 4.0).sqrt();
    if m.c.is_zero() {
        // one fixed point at infinity
        let alpha = b / (d - a);
        return Ok(VisualPoints { alpha, other: None });
    }
    Ok(VisualPoints {
        alpha: (a - d + s) / (2.0 * c),
        other: Some((a - d - s) / (2.0 * c)),
    })
}

/// The fixed point at which the Mobius action expands (`|c z + d| < 1`).
pub fn expanding_fixed_point(m: &Mat2) -> Result<Complex64, GeodesicError> {
    let vp = visual_points(m)?;
    let c = Complex64::new(m.c.re as f64, m.c.im as f64);
    let d = Complex64::new(m.d.re as f64, m.d.im as f64);
    let mu = |z: Complex64| (c * z + d).norm();
    match vp.other {
        None => Ok(vp.alpha),
        Some(beta) => {
            if mu(vp.alpha) < mu(beta) {
                Ok(vp.alpha)
            } else {
                Ok(beta)
            }
        }
    }
}

/// `|2 cosh d(j, m j) - ||m||^2|`, the residual of the norm-distance identity.
pub fn hyperbolic_distance_identity_residual(m: &Mat2) -> f64 {
    let (z, t) = m.act_on_j();
    // 2 cosh d(j, z + t j) = 2 + (|z|^2 + (t-1)^2) / t
    let two_cosh = 2.0 + (z.norm_sqr() + (t - 1.0) * (t - 1.0)) / t;
    (two_cosh - m.frobenius_sq() as f64).abs()
}

/// Primitive binary quadratic form attached to a matrix, unit-normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DirichletForm {
    /// Coefficients `(a, b, c)` of `a x^2 + b x y + c y^2`.
    pub a: GaussianInt,
    pub b: GaussianInt,
    pub c: GaussianInt,
    /// The content that was divided out.
    pub content: GaussianInt,
    /// Power of `i` applied for unit normalization.
    pub unit_power: u8,
}

impl DirichletForm {
    pub fn discriminant(&self) -> GaussianInt {
        self.b * self.b - gi(4, 0) * self.a * self.c
    }
}

/// `(c, d - a, -b)` divided by its gcd, with the first nonzero coefficient
/// normalized to its canonical associate.
pub fn dirichlet_form(m: &Mat2) -> Result<DirichletForm, GeodesicError> {
    let raw = [m.c, m.d - m.a, -m.b];
    if raw.iter().all(|z| z.is_zero()) {
        return Err(GeodesicError::DegenerateForm);
    }
    let mut g = GaussianInt::ZERO;
    for z in raw {
        if !z.is_zero() {
            g = if g.is_zero() {
                z.canonical()
            } else {
                gaussian::gcd(g, z).expect("nonzero")
            };
        }
    }
    let mut parts = raw.map(|z| z.checked_div(g).expect("gcd divides"));
    let lead = parts.iter().copied().find(|z| !z.is_zero()).unwrap();
    let (_, k) = lead.canonical_with_unit();
    for p in parts.iter_mut() {
        *p = p.mul_unit_pow(k);
    }
    Ok(DirichletForm {
        a: parts[0],
        b: parts[1],
        c: parts[2],
        content: g,
        unit_power: k,
    })
}

/// Square-free and congruent to `1` or `-1` mod 4.
pub fn is_fundamental_eligible(d: GaussianInt) -> Result<bool, GeodesicError> {
    if d.is_zero() {
        return Err(GeodesicError::ZeroDiscriminant);
    }
    let class_ok = matches!(
        gaussian::discriminant_residue_class(d),
        gaussian::DiscClass::One | gaussian::DiscClass::MinusOne
    );
    Ok(class_ok && gaussian::is_squarefree(d).unwrap_or(false))
}

/// One conjugacy-class representative: the canonical rotation of a primitive
/// cyclically-admissible word whose matrix lies in the Frobenius ball.
#[derive(Debug, Clone, Serialize)]
pub struct GeodesicClass {
    #[serde(skip)]
    pub word: Word,
    #[serde(skip)]
    pub matrix: Mat2,
    pub trace: (i64, i64),
    pub disc: (i64, i64),
    pub frob_sq: i64,
    pub length: f64,
    pub holonomy: f64,
    pub squarefree_disc: bool,
    pub fundamental_eligible: bool,
}

impl GeodesicClass {
    fn from_word(word: Word, matrix: Mat2) -> Option<GeodesicClass> {
        let trace = matrix.trace();
        let disc = trace * trace - gi(4, 0);
        if disc.is_zero() {
            return None;
        }
        let (length, holonomy) = length_holonomy(&matrix).ok()?;
        let squarefree = gaussian::is_squarefree(disc).unwrap_or(false);
        let eligible = is_fundamental_eligible(disc).unwrap_or(false);
        Some(GeodesicClass {
            trace: (trace.re as i64, trace.im as i64),
            disc: (disc.re as i64, disc.im as i64),
            frob_sq: matrix.frobenius_sq() as i64,
            length,
            holonomy,
            squarefree_disc: squarefree,
            fundamental_eligible: eligible,
            word,
            matrix,
        })
    }

    pub fn trace_gaussian(&self) -> GaussianInt {
        gi(self.trace.0 as i128, self.trace.1 as i128)
    }

    pub fn disc_gaussian(&self) -> GaussianInt {
        gi(self.disc.0 as i128, self.disc.1 as i128)
    }
}

// ---------------------------------------------------------------------------
// pruned depth-first enumeration of the Frobenius ball
// ---------------------------------------------------------------------------

/// A word together with its matrix.
#[derive(Debug, Clone)]
pub struct BallWord {
    pub word: Word,
    pub matrix: Mat2,
}

/// All admissible words (length >= 1) whose matrix satisfies
/// `frobenius_sq < X^2`, sorted by `(length, word)`.
///
/// The search grows words by prepending letters, multiplying the new branch
/// matrix on the right. Along that extension the bottom-row norm
/// `|c|^2 + |d|^2` never decreases (the pole `-d/c` stays in the closure of
/// the first cell, where `|1 -+ m z*| >= 2`), so a prefix with bottom row
/// at least `X^2` has no descendant in the ball and is cut. The unpruned
/// cross-check at small `X` lives in the acceptance suite.
pub fn words_in_ball(
    a: &TransitionMatrix,
    mats: &[Mat2],
    x: f64,
    mask: Option<&[bool]>,
    mode: ExecMode,
) -> Vec<BallWord> {
    ball_search(a, mats, x, mask, mode, &|word, matrix| {
        Some(BallWord {
            word: Word(word.to_vec()),
            matrix: *matrix,
        })
    })
}

/// Canonical primitive cyclically-admissible words with matrix in the ball,
/// one per cyclic rotation class, sorted by `(length, word)`.
pub fn enumerate_ball(
    a: &TransitionMatrix,
    mats: &[Mat2],
    x: f64,
    mode: ExecMode,
) -> Vec<GeodesicClass> {
    let classes = ball_search(a, mats, x, None, mode, &|word, matrix| {
        let n = word.len();
        let (first, last) = (word[0] as usize, word[n - 1] as usize);
        if !a.get(last, first) {
            return None;
        }
        if !subshift::is_canonical_rotation(word) {
            return None;
        }
        let w = Word(word.to_vec());
        if !w.is_primitive() {
            return None;
        }
        GeodesicClass::from_word(w, *matrix)
    });
    classes
}

/// Distinct matrices of admissible words in the ball (the norm-ball count).
/// With `aperiodic_only`, words that are powers of shorter words are skipped.
pub fn ball_matrix_set(
    a: &TransitionMatrix,
    mats: &[Mat2],
    x: f64,
    aperiodic_only: bool,
    mode: ExecMode,
) -> Vec<Mat2> {
    let mut all = ball_search(a, mats, x, None, mode, &|word, matrix| {
        if aperiodic_only {
            let w = Word(word.to_vec());
            if !w.is_primitive() {
                return None;
            }
        }
        Some(*matrix)
    });
    all.sort_unstable();
    all.dedup();
    all
}

fn ball_search<T, F>(
    a: &TransitionMatrix,
    mats: &[Mat2],
    x: f64,
    mask: Option<&[bool]>,
    mode: ExecMode,
    emit: &F,
) -> Vec<T>
where
    T: Send,
    F: Fn(&[Letter], &Mat2) -> Option<T> + Sync,
{
    let n = a.size();
    let allowed = |l: usize| mask.is_none_or(|m| m[l]);
    let preds: Vec<Vec<Letter>> = (0..n)
        .map(|y| {
            (0..n)
                .filter(|&p| allowed(p) && a.get(p, y))
                .map(|p| p as Letter)
                .collect()
        })
        .collect();
    let bound = x * x;
    let roots: Vec<usize> = (0..n).filter(|&l| allowed(l)).collect();
    let per_root: Vec<Vec<T>> = exec::map_slice(mode, &roots, |&root| {
        let mut out = Vec::new();
        // the stack stores the word reversed: stack[0] is the last letter
        let mut stack: Vec<Letter> = vec![root as Letter];
        let mut scratch: Vec<Letter> = Vec::new();
        dfs(
            a,
            mats,
            &preds,
            bound,
            mats[root],
            &mut stack,
            &mut scratch,
            emit,
            &mut out,
        );
        out
    });
    per_root.into_iter().flatten().collect()
}

#[allow(clippy::too_many_arguments)]
fn dfs<T, F>(
    a: &TransitionMatrix,
    mats: &[Mat2],
    preds: &[Vec<Letter>],
    bound: f64,
    matrix: Mat2,
    stack: &mut Vec<Letter>,
    scratch: &mut Vec<Letter>,
    emit: &F,
    out: &mut Vec<T>,
) where
    F: Fn(&[Letter], &Mat2) -> Option<T> + Sync,
{
    let row_sq = matrix.bottom_row_sq() as f64;
    if row_sq >= bound {
        return;
    }
    if (matrix.frobenius_sq() as f64) < bound {
        scratch.clear();
        scratch.extend(stack.iter().rev());
        if let Some(item) = emit(scratch, &matrix) {
            out.push(item);
        }
    }
    let first = *stack.last().unwrap() as usize;
    for &p in &preds[first] {
        stack.push(p);
        let next = matrix.mul(&mats[p as usize]);
        debug_assert!(next.bottom_row_sq() >= matrix.bottom_row_sq());
        dfs(a, mats, preds, bound, next, stack, scratch, emit, out);
        stack.pop();
    }
}

/// Reference enumeration without the bottom-row prune: explores every
/// admissible word up to `max_len` and keeps those in the ball. Exponential;
/// only usable at small `X`. Exists to certify the pruned search.
pub fn words_in_ball_unpruned(
    a: &TransitionMatrix,
    mats: &[Mat2],
    x: f64,
    max_len: usize,
) -> Vec<BallWord> {
    let mut out = Vec::new();
    let bound = x * x;
    for root in 0..a.size() {
        let mut stack = vec![root as Letter];
        unpruned_dfs(a, mats, bound, max_len, mats[root], &mut stack, &mut out);
    }
    out.sort_by(|u, v| (u.word.len(), &u.word).cmp(&(v.word.len(), &v.word)));
    out
}

fn unpruned_dfs(
    a: &TransitionMatrix,
    mats: &[Mat2],
    bound: f64,
    max_len: usize,
    matrix: Mat2,
    stack: &mut Vec<Letter>,
    out: &mut Vec<BallWord>,
) {
    if (matrix.frobenius_sq() as f64) < bound {
        let word = Word(stack.iter().rev().copied().collect());
        out.push(BallWord { word, matrix });
    }
    if stack.len() >= max_len {
        return;
    }
    let first = *stack.last().unwrap() as usize;
    for p in 0..a.size() {
        if !a.get(p, first) {
            continue;
        }
        stack.push(p as Letter);
        unpruned_dfs(
            a,
            mats,
            bound,
            max_len,
            matrix.mul(&mats[p as usize]),
            stack,
            out,
        );
        stack.pop();
    }
}

/// Sort-by-(length, word) helper shared by callers that need stable output.
pub fn sort_ball_words(words: &mut [BallWord]) {
    words.sort_by(|u, v| (u.word.len(), &u.word).cmp(&(v.word.len(), &v.word)));
}
