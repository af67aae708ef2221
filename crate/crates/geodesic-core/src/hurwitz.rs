//! The nearest-integer complex continued-fraction map and its Markov partition.
//!
//! The phase space is the region of the closed upper half-plane exterior to
//! the three unit circles `C(i)`, `C(1)`, `C(-1)`, with the half-integer grid
//! lines removed. The map is
//!
//! ```text
//! fhat(z) = -1/(z - round(z))   if Im z > Im round(z)
//! fhat(z) =  1/(z - round(z))   if Im z < Im round(z)
//! ```
//!
//! where `round(z)` is the nearest Gaussian integer. Cutting the region along
//! the half-integer grid and the two extra circles `C(1+i)`, `C(-1+i)` yields
//! a Markov partition; restricting to cells whose closure lies in `|z| < R`
//! gives the finite alphabet used everywhere downstream.
//!
//! Partition cells, clipping flags, and all containment decisions are
//! certified in exact integer/dyadic arithmetic (see [`crate::cline`]);
//! floating point appears only in sampled consistency checks.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cline::{Cline, RatPoint};
use crate::gaussian::{gi, GaussianInt};
use crate::geodesics::Mat2;

/// Minimal modulus over the region: every point has `|z| >= sqrt(2)`.
pub const REGION_MIN_ABS: f64 = std::f64::consts::SQRT_2;

#[derive(Debug, Error, PartialEq)]
pub enum HurwitzError {
    #[error("point lies on a removed boundary (grid line or circle)")]
    OnBoundary,
    #[error("point is outside the continued-fraction region")]
    OutsideRegion,
    #[error("partition radius must be at least 3 (got {0})")]
    RadiusTooSmall(f64),
}

/// The five circles that cut the partition. The first three bound the region
/// itself (only their exteriors are kept), the last two refine it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Circle {
    #[serde(rename = "i")]
    I,
    #[serde(rename = "1")]
    One,
    #[serde(rename = "-1")]
    MinusOne,
    #[serde(rename = "1+i")]
    OnePlusI,
    #[serde(rename = "-1+i")]
    MinusOnePlusI,
}

impl Circle {
    pub const ALL: [Circle; 5] = [
        Circle::I,
        Circle::One,
        Circle::MinusOne,
        Circle::OnePlusI,
        Circle::MinusOnePlusI,
    ];

    pub fn center(self) -> GaussianInt {
        match self {
            Circle::I => gi(0, 1),
            Circle::One => gi(1, 0),
            Circle::MinusOne => gi(-1, 0),
            Circle::OnePlusI => gi(1, 1),
            Circle::MinusOnePlusI => gi(-1, 1),
        }
    }

    /// True for the three circles whose interiors are removed from the region.
    pub fn bounds_region(self) -> bool {
        matches!(self, Circle::I | Circle::One | Circle::MinusOne)
    }

    pub fn cline(self) -> Cline {
        Cline::unit_circle_at(self.center())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Inside,
    Outside,
}

/// The nearest Gaussian integer; ties resolved toward smaller `re`, then `im`.
pub fn nearest_gaussian(re: f64, im: f64) -> GaussianInt {
    let mut best: Option<(f64, i128, i128)> = None;
    for mr in [re.floor() as i128, re.ceil() as i128] {
        for mi in [im.floor() as i128, im.ceil() as i128] {
            let d = (re - mr as f64).powi(2) + (im - mi as f64).powi(2);
            let cand = (d, mr, mi);
            best = Some(match best {
                None => cand,
                Some(b) => {
                    if cand.0 < b.0 || (cand.0 == b.0 && (cand.1, cand.2) < (b.1, b.2)) {
                        cand
                    } else {
                        b
                    }
                }
            });
        }
    }
    let (_, mr, mi) = best.unwrap();
    gi(mr, mi)
}

/// Is `(re, im)` in the open region (boundary and grid excluded)?
pub fn in_region(re: f64, im: f64) -> Result<(), HurwitzError> {
    if im < 0.0 {
        return Err(HurwitzError::OutsideRegion);
    }
    if im == 0.0 || (2.0 * re).fract() == 0.0 || (2.0 * im).fract() == 0.0 {
        return Err(HurwitzError::OnBoundary);
    }
    for c in [Circle::I, Circle::One, Circle::MinusOne] {
        let ctr = c.center();
        let d = (re - ctr.re as f64).powi(2) + (im - ctr.im as f64).powi(2);
        if d < 1.0 {
            return Err(HurwitzError::OutsideRegion);
        }
        if d == 1.0 {
            return Err(HurwitzError::OnBoundary);
        }
    }
    Ok(())
}

/// One application of the continued-fraction map.
pub fn apply_fhat(re: f64, im: f64) -> Result<(f64, f64), HurwitzError> {
    in_region(re, im)?;
    let m = nearest_gaussian(re, im);
    let (wr, wi) = (re - m.re as f64, im - m.im as f64);
    if wi == 0.0 || (wr == 0.0 && wi == 0.0) {
        return Err(HurwitzError::OnBoundary);
    }
    let n = wr * wr + wi * wi;
    if wi > 0.0 {
        // -1/w
        Ok((-wr / n, wi / n))
    } else {
        // 1/w
        Ok((wr / n, -wi / n))
    }
}

/// One Markov cell: a half-open grid box, clipped by the circles it meets.
#[derive(Debug, Clone)]
pub struct Part {
    pub label: usize,
    /// Box `[k/2, (k+1)/2) x [l/2, (l+1)/2)`.
    pub cell: (i32, i32),
    /// Circles whose boundary crosses this cell, with the side this part
    /// keeps. Region-bounding circles always appear with `Outside`.
    pub flags: Vec<(Circle, Side)>,
    pub round_target: GaussianInt,
    /// 0 when `Im z > Im round(z)` on the cell (no rotation), 1 otherwise.
    pub branch_sign: u8,
    /// Certified interior sample points (dyadic), the first is primary.
    pub samples: Vec<RatPoint>,
    /// Rigorous modulus bounds over the part.
    pub abs_range: (f64, f64),
    /// An exact disc containing the whole cell.
    pub circumdisc: Cline,
}

impl Part {
    /// Forward branch matrix `S * Q^j * T_{-m}` in `SL2(Z[i])`.
    pub fn branch_matrix(&self) -> Mat2 {
        let m = self.round_target;
        if self.branch_sign == 0 {
            Mat2::new(gi(0, 0), gi(-1, 0), gi(1, 0), -m)
        } else {
            Mat2::new(gi(0, 0), gi(0, -1), gi(0, -1), gi(-m.im, m.re))
        }
    }

    /// Exact membership for an interior test point. `None` means the point
    /// landed on a cell edge or flagged circle, i.e. the test is inconclusive.
    pub fn contains(&self, p: RatPoint) -> Option<bool> {
        if p.is_infinity() {
            return Some(false);
        }
        let (k, l) = (self.cell.0 as i128, self.cell.1 as i128);
        // 2x - k > 0, 2x - (k+1) < 0, same for y
        let ex = 2 * p.num.re;
        let ey = 2 * p.num.im;
        for (v, bound, want_pos) in [
            (ex, k, true),
            (ex, k + 1, false),
            (ey, l, true),
            (ey, l + 1, false),
        ] {
            let s = (v - bound * p.den).signum();
            if s == 0 {
                return None;
            }
            if (s > 0) != want_pos {
                return Some(false);
            }
        }
        for &(circle, side) in &self.flags {
            let s = circle.cline().eval_sign(p);
            if s == 0 {
                return None;
            }
            let ok = match side {
                Side::Outside => s > 0,
                Side::Inside => s < 0,
            };
            if !ok {
                return Some(false);
            }
        }
        Some(true)
    }

    /// Boundary clines of the part with the side the part occupies
    /// (+1 where `E > 0`).
    pub fn boundary(&self) -> Vec<(Cline, i8)> {
        let (k, l) = (self.cell.0 as i128, self.cell.1 as i128);
        let mut out = vec![
            (Cline::vertical_half_line(k), 1),
            (Cline::vertical_half_line(k + 1), -1),
            (Cline::horizontal_half_line(l), 1),
            (Cline::horizontal_half_line(l + 1), -1),
        ];
        for &(circle, side) in &self.flags {
            out.push((
                circle.cline(),
                match side {
                    Side::Outside => 1,
                    Side::Inside => -1,
                },
            ));
        }
        out
    }

    /// Image of the part boundary under the branch map, sides preserved.
    pub fn image_boundary(&self) -> Vec<(Cline, i8)> {
        let m = self.branch_matrix().as_array();
        self.boundary()
            .into_iter()
            .map(|(c, s)| (c.mobius_image(m), s))
            .collect()
    }
}

/// The radius-R restriction of the Markov partition.
#[derive(Debug, Clone)]
pub struct Partition {
    pub radius: f64,
    pub parts: Vec<Part>,
}

impl Partition {
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Branch matrices indexed by part label.
    pub fn branch_matrices(&self) -> Vec<Mat2> {
        self.parts.iter().map(Part::branch_matrix).collect()
    }

    /// Map each part of `self` to the identically-shaped part of `other`
    /// (matching cell and flags), when present.
    pub fn embed_into(&self, other: &Partition) -> Vec<Option<usize>> {
        use std::collections::HashMap;
        let index: HashMap<_, _> = other
            .parts
            .iter()
            .map(|p| ((p.cell, p.flags.clone()), p.label))
            .collect();
        self.parts
            .iter()
            .map(|p| index.get(&(p.cell, p.flags.clone())).copied())
            .collect()
    }

    /// Serializable snapshot with stable ordering.
    pub fn export(&self) -> PartitionExport {
        PartitionExport {
            radius: self.radius,
            parts: self
                .parts
                .iter()
                .map(|p| PartExport {
                    label: p.label,
                    cell: [p.cell.0, p.cell.1],
                    flags: p
                        .flags
                        .iter()
                        .map(|&(c, s)| FlagExport { circle: c, side: s })
                        .collect(),
                    round_target: [p.round_target.re as i64, p.round_target.im as i64],
                    branch_sign: p.branch_sign,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartitionExport {
    pub radius: f64,
    pub parts: Vec<PartExport>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartExport {
    pub label: usize,
    pub cell: [i32; 2],
    pub flags: Vec<FlagExport>,
    pub round_target: [i64; 2],
    pub branch_sign: u8,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlagExport {
    pub circle: Circle,
    pub side: Side,
}

// ---------------------------------------------------------------------------
// dyadic box certification
// ---------------------------------------------------------------------------

/// A closed dyadic sub-box of a cell: `[x, x+1] x [y, y+1]` at scale `2^-s`,
/// where `x, y` are integers at scale `s` (i.e. true coords are `x/2^s`).
#[derive(Debug, Clone, Copy)]
struct DyBox {
    x: i64,
    y: i64,
    s: u32,
}

impl DyBox {
    fn split(self) -> [DyBox; 4] {
        let DyBox { x, y, s } = self;
        let (x, y, s) = (2 * x, 2 * y, s + 1);
        [
            DyBox { x, y, s },
            DyBox { x: x + 1, y, s },
            DyBox { x, y: y + 1, s },
            DyBox {
                x: x + 1,
                y: y + 1,
                s,
            },
        ]
    }

    fn center(self) -> RatPoint {
        RatPoint::dyadic(
            (2 * self.x + 1) as i128,
            (2 * self.y + 1) as i128,
            self.s + 1,
        )
    }

    /// `(min, max)` of the squared distance to `center * 2^s`, times `4^s`.
    fn dist_sq_range(self, c: GaussianInt) -> (i128, i128) {
        let scale = 1i128 << self.s;
        let cx = c.re * scale;
        let cy = c.im * scale;
        let (x0, x1) = (self.x as i128, self.x as i128 + 1);
        let (y0, y1) = (self.y as i128, self.y as i128 + 1);
        let near = |lo: i128, hi: i128, t: i128| -> i128 {
            if t < lo {
                lo - t
            } else if t > hi {
                t - hi
            } else {
                0
            }
        };
        let far = |lo: i128, hi: i128, t: i128| -> i128 { (t - lo).abs().max((t - hi).abs()) };
        let nx = near(x0, x1, cx);
        let ny = near(y0, y1, cy);
        let fx = far(x0, x1, cx);
        let fy = far(y0, y1, cy);
        (nx * nx + ny * ny, fx * fx + fy * fy)
    }

    /// Strictly outside / inside the unit circle about `c`.
    fn strictly(self, c: GaussianInt, side: Side) -> bool {
        let (min2, max2) = self.dist_sq_range(c);
        let r2 = 1i128 << (2 * self.s);
        match side {
            Side::Outside => min2 > r2,
            Side::Inside => max2 < r2,
        }
    }
}

const SUBDIV_CAP: u32 = 10;
const MAX_SAMPLES: usize = 12;

/// Interior sample points of `cell` subject to circle-side constraints,
/// certified by adaptive dyadic subdivision. Empty result means no interior
/// could be certified (the candidate region is empty or a sliver).
fn certified_samples(cell: (i32, i32), constraints: &[(Circle, Side)]) -> Vec<RatPoint> {
    let root = DyBox {
        x: cell.0 as i64,
        y: cell.1 as i64,
        s: 1,
    };
    let mut queue = std::collections::VecDeque::from([root]);
    let mut found = Vec::new();
    while let Some(b) = queue.pop_front() {
        let mut ok = true;
        let mut needs_split = false;
        for &(circle, side) in constraints {
            if b.strictly(circle.center(), side) {
                continue;
            }
            ok = false;
            // worth splitting only if the box is not certainly on the wrong side
            let wrong = b.strictly(
                circle.center(),
                match side {
                    Side::Inside => Side::Outside,
                    Side::Outside => Side::Inside,
                },
            );
            needs_split = !wrong;
            break;
        }
        if ok {
            found.push(b);
            if found.len() >= MAX_SAMPLES {
                break;
            }
            continue;
        }
        if needs_split && b.s < SUBDIV_CAP {
            queue.extend(b.split());
        }
    }
    found.into_iter().map(DyBox::center).collect()
}

// ---------------------------------------------------------------------------
// partition construction
// ---------------------------------------------------------------------------

/// Classification of a cell against one circle, by exact squared distances.
#[derive(Debug, PartialEq)]
enum CellVsCircle {
    Outside,
    Inside,
    Straddles,
}

fn classify_cell(cell: (i32, i32), c: GaussianInt) -> CellVsCircle {
    let b = DyBox {
        x: cell.0 as i64,
        y: cell.1 as i64,
        s: 1,
    };
    let (min2, max2) = b.dist_sq_range(c);
    let r2 = 4i128;
    if min2 >= r2 {
        CellVsCircle::Outside
    } else if max2 <= r2 {
        CellVsCircle::Inside
    } else {
        CellVsCircle::Straddles
    }
}

/// Build the radius-R partition. Requires `R >= 3`.
pub fn build_partition(radius: f64) -> Result<Partition, HurwitzError> {
    if !(radius >= 3.0) {
        return Err(HurwitzError::RadiusTooSmall(radius));
    }
    let kmax = (2.0 * radius).ceil() as i32 + 1;
    let mut parts: Vec<Part> = Vec::new();
    for k in -kmax..=kmax {
        for l in 0..=kmax {
            if !cell_inside_ball(k, l, radius) {
                continue;
            }
            parts.extend(parts_of_cell((k, l)));
        }
    }
    parts.sort_by(|p, q| (p.cell, &p.flags).cmp(&(q.cell, &q.flags)));
    for (i, p) in parts.iter_mut().enumerate() {
        p.label = i;
    }
    Ok(Partition { radius, parts })
}

/// Closure of the cell lies strictly inside `|z| < R`: the farthest corner
/// decides, and at the desk radii (R >= 3) the circles never clip cells near
/// the ball boundary.
fn cell_inside_ball(k: i32, l: i32, radius: f64) -> bool {
    let far_x = (k.abs().max((k + 1).abs())) as f64 / 2.0;
    let far_y = (l.abs().max((l + 1).abs())) as f64 / 2.0;
    far_x * far_x + far_y * far_y < radius * radius
}

fn parts_of_cell(cell: (i32, i32)) -> Vec<Part> {
    let mut base_constraints: Vec<(Circle, Side)> = Vec::new();
    let mut split_circles: Vec<Circle> = Vec::new();
    for circle in Circle::ALL {
        match classify_cell(cell, circle.center()) {
            CellVsCircle::Outside => {}
            CellVsCircle::Inside => {
                if circle.bounds_region() {
                    return Vec::new(); // swallowed by a removed disc
                }
            }
            CellVsCircle::Straddles => {
                if circle.bounds_region() {
                    base_constraints.push((circle, Side::Outside));
                } else {
                    split_circles.push(circle);
                }
            }
        }
    }

    let (k, l) = cell;
    let m = gi(
        ((k + 1).div_euclid(2)) as i128,
        ((l + 1).div_euclid(2)) as i128,
    );
    let branch_sign = (l.rem_euclid(2)) as u8;

    let mut out = Vec::new();
    for combo in 0..(1u32 << split_circles.len()) {
        let mut flags = base_constraints.clone();
        for (i, &circle) in split_circles.iter().enumerate() {
            let side = if combo & (1 << i) == 0 {
                Side::Outside
            } else {
                Side::Inside
            };
            flags.push((circle, side));
        }
        flags.sort();
        let samples = certified_samples(cell, &flags);
        if samples.is_empty() {
            continue;
        }
        out.push(Part {
            label: 0,
            cell,
            flags,
            round_target: m,
            branch_sign,
            samples,
            abs_range: cell_abs_range(cell),
            circumdisc: cell_circumdisc(cell),
        });
    }
    out
}

/// Rigorous `(min |z|, max |z|)` over the part: the cell clamp from below
/// (never under `sqrt 2`, the modulus floor of the whole region) and the
/// farthest corner from above.
fn cell_abs_range(cell: (i32, i32)) -> (f64, f64) {
    let (k, l) = (cell.0 as f64, cell.1 as f64);
    let (x0, x1) = (k / 2.0, (k + 1.0) / 2.0);
    let (y0, y1) = (l / 2.0, (l + 1.0) / 2.0);
    let nx = if x0 > 0.0 {
        x0
    } else if x1 < 0.0 {
        -x1
    } else {
        0.0
    };
    let ny = if y0 > 0.0 { y0 } else { 0.0 };
    let near = (nx * nx + ny * ny).sqrt();
    let fx = x0.abs().max(x1.abs());
    let fy = y0.abs().max(y1.abs());
    let far = (fx * fx + fy * fy).sqrt();
    (
        near.max(REGION_MIN_ABS * (1.0 - 1e-15)),
        far * (1.0 + 1e-15),
    )
}

fn cell_circumdisc(cell: (i32, i32)) -> Cline {
    let (k, l) = (cell.0 as i128, cell.1 as i128);
    // center (2k+1)/4 + i(2l+1)/4, squared radius 1/8, scaled by 16
    Cline::new(
        16,
        -4 * (2 * k + 1),
        -4 * (2 * l + 1),
        (2 * k + 1).pow(2) + (2 * l + 1).pow(2) - 2,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_gaussian_examples() {
        assert_eq!(nearest_gaussian(0.3, 0.4), gi(0, 0));
        assert_eq!(nearest_gaussian(2.6, 0.2), gi(3, 0));
        // tie at re = 1.5 resolved downward
        assert_eq!(nearest_gaussian(1.5, 0.25), gi(1, 0));
        assert_eq!(nearest_gaussian(1.25, 0.5), gi(1, 0));
    }

    #[test]
    fn fhat_examples() {
        let (re, im) = apply_fhat(2.3, 0.2).unwrap();
        assert!((re - (-2.3076923076923075)).abs() < 1e-12);
        assert!((im - 1.5384615384615385).abs() < 1e-12);

        let (re, im) = apply_fhat(2.75, 0.25).unwrap();
        assert!((re - 2.0).abs() < 1e-12 && (im - 2.0).abs() < 1e-12);

        // lower-branch points map into the closed upper half-plane
        let (_, im) = apply_fhat(2.3, 0.8).unwrap();
        assert!(im > 0.0);
    }

    #[test]
    fn fhat_boundary_and_region_errors() {
        assert_eq!(apply_fhat(2.5, 0.25), Err(HurwitzError::OnBoundary));
        assert_eq!(apply_fhat(0.2, 0.2), Err(HurwitzError::OutsideRegion));
        assert_eq!(apply_fhat(0.0, 2.0), Err(HurwitzError::OnBoundary));
    }

    #[test]
    fn radius_guard() {
        assert!(matches!(
            build_partition(2.5),
            Err(HurwitzError::RadiusTooSmall(_))
        ));
    }

    #[test]
    fn square_left_of_three_is_present_for_small_radius() {
        // cell (5, 0) = [2.5, 3) x [0, 0.5); farthest corner has |z|^2 = 9.25
        let p305 = build_partition(3.05).unwrap();
        assert!(p305.parts.iter().any(|p| p.cell == (5, 0)));
        let p300 = build_partition(3.0).unwrap();
        assert!(!p300.parts.iter().any(|p| p.cell == (5, 0)));
    }

    #[test]
    fn partition_monotone_in_radius() {
        let p4 = build_partition(4.0).unwrap();
        let p5 = build_partition(5.0).unwrap();
        assert!(p4.len() < p5.len());
        let embedding = p4.embed_into(&p5);
        assert!(embedding.iter().all(Option::is_some));
    }

    #[test]
    fn parts_have_constant_round_target_and_sign() {
        let partition = build_partition(4.0).unwrap();
        assert!(!partition.is_empty());
        for part in &partition.parts {
            for s in &part.samples {
                let (re, im) = s.to_f64();
                assert_eq!(
                    nearest_gaussian(re, im),
                    part.round_target,
                    "part {:?}",
                    part.cell
                );
                let above = im > part.round_target.im as f64;
                assert_eq!(above, part.branch_sign == 0);
                // samples really are interior points of the part
                assert_eq!(part.contains(*s), Some(true));
                // and the region membership agrees with the float test
                assert!(in_region(re, im).is_ok());
            }
        }
    }

    #[test]
    fn split_cells_carry_both_sides() {
        let partition = build_partition(4.0).unwrap();
        // the cell [1.5, 2) x [0.5, 1) is crossed by C(1+i) (and clipped by C(1))
        let pieces: Vec<_> = partition
            .parts
            .iter()
            .filter(|p| p.cell == (3, 1))
            .collect();
        assert_eq!(pieces.len(), 2);
        let sides: Vec<_> = pieces
            .iter()
            .flat_map(|p| p.flags.iter().filter(|(c, _)| *c == Circle::OnePlusI))
            .map(|&(_, s)| s)
            .collect();
        assert!(sides.contains(&Side::Inside) && sides.contains(&Side::Outside));
    }

    #[test]
    fn branch_matrix_matches_fhat_on_samples() {
        let partition = build_partition(4.0).unwrap();
        for part in &partition.parts {
            let m = part.branch_matrix();
            assert_eq!(m.det(), gi(1, 0));
            for s in part.samples.iter().take(3) {
                let (re, im) = s.to_f64();
                let (fr, fi) = apply_fhat(re, im).unwrap();
                let (gr, gid) = m.mobius_f64(re, im);
                assert!(
                    (fr - gr).abs() < 1e-12 && (fi - gid).abs() < 1e-12,
                    "branch mismatch on {:?}",
                    part.cell
                );
            }
        }
    }

    #[test]
    fn image_boundary_coeffs_are_exact_clines() {
        let partition = build_partition(4.0).unwrap();
        let part = partition.parts.iter().find(|p| p.cell == (5, 0)).unwrap();
        let image = part.image_boundary();
        assert_eq!(image.len(), 4);
        // the image of the square left of 3 is a quadrant: two lines, two unit circles
        let lines = image.iter().filter(|(c, _)| c.is_line()).count();
        let circles = image.iter().filter(|(c, _)| c.is_circle()).count();
        assert_eq!((lines, circles), (2, 2));
    }

    #[test]
    fn abs_range_covers_samples() {
        let partition = build_partition(5.0).unwrap();
        for part in &partition.parts {
            let (lo, hi) = part.abs_range;
            for s in &part.samples {
                let (re, im) = s.to_f64();
                let r = (re * re + im * im).sqrt();
                assert!(lo <= r && r <= hi);
            }
        }
    }
}
