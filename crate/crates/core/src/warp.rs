//! Coordinate maps from condition-image positions onto the target image.
//!
//! Three maps are provided: a box-to-box affine map, a thin-plate spline fitted
//! to landmark correspondences, and a constant horizontal offset that moves
//! condition positions past the right edge of the target.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{PixelRect, Point2};
use crate::linalg::{Lu, Matrix};

/// Condition-image height in pixels, the default vertical source extent.
pub const SOURCE_HEIGHT_PX: u32 = 64;

/// Default quantization cell for overlap detection.
pub const DEFAULT_FOLD_CELL: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WarpError {
    #[error("source extent {width}x{height} is degenerate (need at least 2 in each axis)")]
    DegenerateSource { width: u32, height: u32 },
    #[error("target region [{x1}, {x2}] x [{y1}, {y2}] is degenerate or non-finite")]
    DegenerateTarget { x1: f64, y1: f64, x2: f64, y2: f64 },
    #[error("need at least 3 control points, got {0}")]
    TooFewControlPoints(usize),
    #[error("control point lists differ in length ({sources} sources, {targets} targets)")]
    LengthMismatch { sources: usize, targets: usize },
    #[error("singular system: {0}")]
    SingularSystem(SingularCause),
    #[error("non-finite input")]
    NonFinite,
    #[error("regularization must be finite and >= 0, got {0}")]
    InvalidLambda(f64),
    #[error("offset must be finite and >= 0, got {0}")]
    InvalidOffset(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum SingularCause {
    DuplicateSource(usize, usize),
    CollinearSources,
    Pivot(usize),
}

impl std::fmt::Display for SingularCause {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SingularCause::DuplicateSource(i, j) => write!(f, "source points {i} and {j} coincide"),
            SingularCause::CollinearSources => write!(f, "source points are collinear"),
            SingularCause::Pivot(c) => write!(f, "zero pivot in column {c}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpaceTag {
    Pixel,
    Token,
}

/// Corner coordinates of a region in the target image.
///
/// The first source position maps to `(x1, y1)` and the last to `(x2, y2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetRegion {
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
    pub space: SpaceTag,
}

impl TargetRegion {
    pub fn new(x1: f64, y1: f64, x2: f64, y2: f64, space: SpaceTag) -> Result<Self, WarpError> {
        let finite = [x1, y1, x2, y2].iter().all(|v| v.is_finite());
        if !finite || x2 <= x1 || y2 <= y1 {
            return Err(WarpError::DegenerateTarget { x1, y1, x2, y2 });
        }
        Ok(Self { x1, y1, x2, y2, space })
    }

    /// Token-space region whose corners are the pixel box edges divided by the
    /// latent factor.
    pub fn from_pixel_rect(rect: &PixelRect, latent_factor: u32) -> Result<Self, WarpError> {
        let f = latent_factor as f64;
        Self::new(
            rect.x1() as f64 / f,
            rect.y1() as f64 / f,
            rect.x2() as f64 / f,
            rect.y2() as f64 / f,
            SpaceTag::Token,
        )
    }

    pub fn width(&self) -> f64 {
        self.x2 - self.x1
    }

    pub fn height(&self) -> f64 {
        self.y2 - self.y1
    }

    pub fn contains(&self, p: Point2) -> bool {
        p.x >= self.x1 && p.x <= self.x2 && p.y >= self.y1 && p.y <= self.y2
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WarpDiagnostics {
    /// Affine evaluations outside the source extent.
    pub extrapolations: usize,
}

/// Linear scaling and translation of a `source_width` x `source_height`
/// source onto a target region, corner to corner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineBoxMap {
    source_width: u32,
    source_height: u32,
    target: TargetRegion,
}

impl AffineBoxMap {
    /// Source of height 64, the condition-image pixel height.
    pub fn new(source_width: u32, target: TargetRegion) -> Result<Self, WarpError> {
        Self::with_source_size(source_width, SOURCE_HEIGHT_PX, target)
    }

    pub fn with_source_size(source_width: u32, source_height: u32, target: TargetRegion) -> Result<Self, WarpError> {
        if source_width < 2 || source_height < 2 {
            return Err(WarpError::DegenerateSource { width: source_width, height: source_height });
        }
        Ok(Self { source_width, source_height, target })
    }

    pub fn target(&self) -> &TargetRegion {
        &self.target
    }

    pub fn in_source_range(&self, p: Point2) -> bool {
        p.x >= 0.0 && p.y >= 0.0 && p.x <= (self.source_width - 1) as f64 && p.y <= (self.source_height - 1) as f64
    }

    /// `x = x1 + u / (W - 1) * (x2 - x1)`, `y = y1 + v / (H - 1) * (y2 - y1)`.
    ///
    /// Positions outside the source extent extrapolate linearly.
    pub fn map(&self, p: Point2) -> Point2 {
        let t = &self.target;
        Point2::new(
            t.x1 + p.x / (self.source_width - 1) as f64 * (t.x2 - t.x1),
            t.y1 + p.y / (self.source_height - 1) as f64 * (t.y2 - t.y1),
        )
    }

    pub fn map_counted(&self, p: Point2, diag: &mut WarpDiagnostics) -> Point2 {
        if !self.in_source_range(p) {
            diag.extrapolations += 1;
        }
        self.map(p)
    }
}

/// Landmark correspondences for a thin-plate spline fit.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlPoints {
    sources: Vec<Point2>,
    targets: Vec<Point2>,
}

/// Relative threshold for the collinearity test on source points.
const COLLINEAR_AREA_RATIO: f64 = 1e-9;

impl ControlPoints {
    pub fn new(sources: Vec<Point2>, targets: Vec<Point2>) -> Result<Self, WarpError> {
        if sources.len() != targets.len() {
            return Err(WarpError::LengthMismatch { sources: sources.len(), targets: targets.len() });
        }
        if sources.len() < 3 {
            return Err(WarpError::TooFewControlPoints(sources.len()));
        }
        if !sources.iter().chain(&targets).all(Point2::is_finite) {
            return Err(WarpError::NonFinite);
        }
        for i in 0..sources.len() {
            for j in i + 1..sources.len() {
                if sources[i] == sources[j] {
                    return Err(WarpError::SingularSystem(SingularCause::DuplicateSource(i, j)));
                }
            }
        }
        let (lo, hi) = bounds(&sources);
        let bbox_area = (hi.x - lo.x) * (hi.y - lo.y);
        if bbox_area <= 0.0 || convex_hull_area(&sources) < COLLINEAR_AREA_RATIO * bbox_area {
            return Err(WarpError::SingularSystem(SingularCause::CollinearSources));
        }
        Ok(Self { sources, targets })
    }

    pub fn from_pairs(pairs: &[(Point2, Point2)]) -> Result<Self, WarpError> {
        Self::new(pairs.iter().map(|p| p.0).collect(), pairs.iter().map(|p| p.1).collect())
    }

    pub fn len(&self) -> usize {
        self.sources.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sources.is_empty()
    }

    pub fn sources(&self) -> &[Point2] {
        &self.sources
    }

    pub fn targets(&self) -> &[Point2] {
        &self.targets
    }
}

fn bounds(points: &[Point2]) -> (Point2, Point2) {
    points.iter().fold(
        (Point2::new(f64::INFINITY, f64::INFINITY), Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY)),
        |(lo, hi), p| (Point2::new(lo.x.min(p.x), lo.y.min(p.y)), Point2::new(hi.x.max(p.x), hi.y.max(p.y))),
    )
}

fn cross(o: Point2, a: Point2, b: Point2) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Area of the convex hull (monotone chain + shoelace).
pub fn convex_hull_area(points: &[Point2]) -> f64 {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return 0.0;
    }
    let mut hull: Vec<Point2> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point2>> =
            if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    let n = hull.len();
    let twice: f64 = (0..n).map(|i| {
        let (a, b) = (hull[i], hull[(i + 1) % n]);
        a.x * b.y - b.x * a.y
    }).sum();
    twice.abs() / 2.0
}

/// Thin-plate kernel `r^2 ln r` with the limit value 0 at `r = 0`.
pub fn tps_kernel(r: f64) -> f64 {
    if r == 0.0 {
        0.0
    } else {
        r * r * r.ln()
    }
}

fn kernel_sq(r2: f64) -> f64 {
    if r2 == 0.0 {
        0.0
    } else {
        0.5 * r2 * r2.ln()
    }
}

/// Fitted thin-plate spline: `A (u, v, 1)^T + sum_i w_i phi(|(u, v) - s_i|)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTps", into = "RawTps")]
pub struct TpsWarp {
    affine: [[f64; 3]; 2],
    weights: Vec<[f64; 2]>,
    sources: Vec<Point2>,
    lambda: f64,
}

#[derive(Serialize, Deserialize)]
struct RawTps {
    affine: [[f64; 3]; 2],
    weights: Vec<[f64; 2]>,
    sources: Vec<[f64; 2]>,
    lambda: f64,
}

impl TryFrom<RawTps> for TpsWarp {
    type Error = String;
    fn try_from(r: RawTps) -> Result<Self, String> {
        if r.weights.len() != r.sources.len() {
            return Err(format!("{} weights for {} sources", r.weights.len(), r.sources.len()));
        }
        if r.lambda.is_nan() || r.lambda < 0.0 {
            return Err(format!("lambda {} is negative", r.lambda));
        }
        Ok(Self {
            affine: r.affine,
            weights: r.weights,
            sources: r.sources.into_iter().map(|[u, v]| Point2::new(u, v)).collect(),
            lambda: r.lambda,
        })
    }
}

impl From<TpsWarp> for RawTps {
    fn from(w: TpsWarp) -> Self {
        RawTps {
            affine: w.affine,
            weights: w.weights,
            sources: w.sources.into_iter().map(|p| [p.x, p.y]).collect(),
            lambda: w.lambda,
        }
    }
}

impl TpsWarp {
    /// Solves `[[Phi + lambda I, P], [P^T, 0]] [w; a] = [targets; 0]` for both
    /// output coordinates, where `P` has rows `(u_i, v_i, 1)`.
    pub fn fit(cp: &ControlPoints, lambda: f64) -> Result<Self, WarpError> {
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(WarpError::InvalidLambda(lambda));
        }
        let k = cp.len();
        let n = k + 3;
        let src = cp.sources();
        let mut m = Matrix::zeros(n);
        for i in 0..k {
            for j in 0..k {
                let d = src[i] - src[j];
                m.set(i, j, kernel_sq(d.x * d.x + d.y * d.y));
            }
            m.set(i, i, m.get(i, i) + lambda);
            for (c, v) in [src[i].x, src[i].y, 1.0].into_iter().enumerate() {
                m.set(i, k + c, v);
                m.set(k + c, i, v);
            }
        }
        let lu = Lu::factor(m).map_err(|e| WarpError::SingularSystem(SingularCause::Pivot(e.column)))?;
        let mut rhs_x = vec![0.0; n];
        let mut rhs_y = vec![0.0; n];
        for (i, t) in cp.targets().iter().enumerate() {
            rhs_x[i] = t.x;
            rhs_y[i] = t.y;
        }
        let sol_x = lu.solve(&rhs_x);
        let sol_y = lu.solve(&rhs_y);
        if !sol_x.iter().chain(&sol_y).all(|v| v.is_finite()) {
            return Err(WarpError::NonFinite);
        }
        let weights = (0..k).map(|i| [sol_x[i], sol_y[i]]).collect();
        let affine = [
            [sol_x[k], sol_x[k + 1], sol_x[k + 2]],
            [sol_y[k], sol_y[k + 1], sol_y[k + 2]],
        ];
        Ok(Self { affine, weights, sources: src.to_vec(), lambda })
    }

    /// Warp with no radial part.
    pub fn from_affine(affine: [[f64; 3]; 2]) -> Self {
        Self { affine, weights: Vec::new(), sources: Vec::new(), lambda: 0.0 }
    }

    pub fn affine(&self) -> &[[f64; 3]; 2] {
        &self.affine
    }

    pub fn weights(&self) -> &[[f64; 2]] {
        &self.weights
    }

    pub fn sources(&self) -> &[Point2] {
        &self.sources
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn eval(&self, p: Point2) -> Result<Point2, WarpError> {
        if !p.is_finite() {
            return Err(WarpError::NonFinite);
        }
        let a = &self.affine;
        let mut x = a[0][0] * p.x + a[0][1] * p.y + a[0][2];
        let mut y = a[1][0] * p.x + a[1][1] * p.y + a[1][2];
        for (w, s) in self.weights.iter().zip(&self.sources) {
            let d = p - *s;
            let phi = kernel_sq(d.x * d.x + d.y * d.y);
            x += w[0] * phi;
            y += w[1] * phi;
        }
        Ok(Point2::new(x, y))
    }

    /// Residuals of `sum w_i`, `sum w_i u_i`, `sum w_i v_i`, one row per output axis.
    pub fn side_conditions(&self) -> [[f64; 3]; 2] {
        let mut out = [[0.0; 3]; 2];
        for (w, s) in self.weights.iter().zip(&self.sources) {
            for axis in 0..2 {
                out[axis][0] += w[axis];
                out[axis][1] += w[axis] * s.x;
                out[axis][2] += w[axis] * s.y;
            }
        }
        out
    }
}

/// Constant horizontal shift by the target width: `(i, j) -> (i + w_t, j)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OffsetMap {
    offset_x: f64,
}

impl OffsetMap {
    pub fn new(target_width: f64) -> Result<Self, WarpError> {
        if !target_width.is_finite() || target_width < 0.0 {
            return Err(WarpError::InvalidOffset(target_width));
        }
        Ok(Self { offset_x: target_width })
    }

    pub fn offset_x(&self) -> f64 {
        self.offset_x
    }

    pub fn offset_y(&self) -> f64 {
        0.0
    }

    pub fn map(&self, i: f64, j: f64) -> Point2 {
        Point2::new(i + self.offset_x, j)
    }
}

/// Pairs of indices whose points fall into the same `cell`-sized square.
/// Non-finite points are ignored. Pairs are sorted.
pub fn find_collisions(points: &[Point2], cell: f64) -> Vec<(usize, usize)> {
    assert!(cell > 0.0, "collision cell must be positive");
    let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (i, p) in points.iter().enumerate() {
        if p.is_finite() {
            let key = ((p.x / cell).floor() as i64, (p.y / cell).floor() as i64);
            buckets.entry(key).or_default().push(i);
        }
    }
    let mut pairs = Vec::new();
    for members in buckets.values() {
        for (a, &i) in members.iter().enumerate() {
            for &j in &members[a + 1..] {
                pairs.push((i.min(j), i.max(j)));
            }
        }
    }
    pairs.sort_unstable();
    pairs
}

/// Pairs of distinct grid points that the warp sends into the same cell.
pub fn detect_fold(warp: &TpsWarp, grid: &[Point2], cell: f64) -> Vec<(Point2, Point2)> {
    let mapped: Vec<Point2> = grid
        .iter()
        .map(|p| warp.eval(*p).unwrap_or(Point2::new(f64::NAN, f64::NAN)))
        .collect();
    find_collisions(&mapped, cell)
        .into_iter()
        .filter(|&(i, j)| grid[i] != grid[j])
        .map(|(i, j)| (grid[i], grid[j]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Point2 {
        Point2::new(x, y)
    }

    fn unit_square() -> Vec<Point2> {
        vec![p(0.0, 0.0), p(1.0, 0.0), p(1.0, 1.0), p(0.0, 1.0)]
    }

    #[test]
    fn affine_corners_and_midpoint() {
        let t = TargetRegion::new(100.0, 50.0, 228.0, 114.0, SpaceTag::Pixel).unwrap();
        let m = AffineBoxMap::new(65, t).unwrap();
        assert_eq!(m.map(p(0.0, 0.0)), p(100.0, 50.0));
        assert_eq!(m.map(p(64.0, 63.0)), p(228.0, 114.0));
        assert_eq!(m.map(p(32.0, 31.5)), p(164.0, 82.0));
    }

    #[test]
    fn affine_extrapolation_counted() {
        let t = TargetRegion::new(0.0, 0.0, 10.0, 10.0, SpaceTag::Token).unwrap();
        let m = AffineBoxMap::new(11, t).unwrap();
        let mut d = WarpDiagnostics::default();
        assert_eq!(m.map_counted(p(20.0, 0.0), &mut d), p(20.0, 0.0));
        m.map_counted(p(5.0, 5.0), &mut d);
        assert_eq!(d.extrapolations, 1);
    }

    #[test]
    fn affine_rejects_narrow_source() {
        let t = TargetRegion::new(0.0, 0.0, 1.0, 1.0, SpaceTag::Pixel).unwrap();
        assert_eq!(AffineBoxMap::new(1, t).unwrap_err(), WarpError::DegenerateSource { width: 1, height: 64 });
        assert!(TargetRegion::new(0.0, 0.0, 0.0, 1.0, SpaceTag::Pixel).is_err());
        assert!(TargetRegion::new(0.0, f64::NAN, 1.0, 1.0, SpaceTag::Pixel).is_err());
    }

    #[test]
    fn identity_fit_is_warp_free() {
        let src = unit_square();
        let cp = ControlPoints::new(src.clone(), src).unwrap();
        let w = TpsWarp::fit(&cp, 0.0).unwrap();
        let a = w.affine();
        let want = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        for r in 0..2 {
            for c in 0..3 {
                assert!((a[r][c] - want[r][c]).abs() < 1e-12);
            }
        }
        assert!(w.weights().iter().all(|w| w[0].abs() < 1e-12 && w[1].abs() < 1e-12));
        let q = w.eval(p(0.3, 0.8)).unwrap();
        assert!((q.x - 0.3).abs() < 1e-12 && (q.y - 0.8).abs() < 1e-12);
    }

    #[test]
    fn nonlinear_fit_interpolates() {
        let mut src = unit_square();
        src.push(p(0.5, 0.5));
        let mut dst = unit_square();
        dst.push(p(0.5, 0.7));
        let cp = ControlPoints::new(src.clone(), dst.clone()).unwrap();
        let w = TpsWarp::fit(&cp, 0.0).unwrap();
        for (s, t) in src.iter().zip(&dst) {
            let q = w.eval(*s).unwrap();
            assert!(q.dist(t) < 1e-9, "{q:?} vs {t:?}");
        }
        assert!(w.weights().iter().any(|w| w[1].abs() > 1e-3));
        for row in w.side_conditions() {
            assert!(row.iter().all(|v| v.abs() < 1e-8));
        }
    }

    #[test]
    fn regularized_fit_smooths() {
        let mut src = unit_square();
        src.push(p(0.5, 0.5));
        let mut dst = unit_square();
        dst.push(p(0.5, 0.7));
        let cp = ControlPoints::new(src, dst).unwrap();
        let w = TpsWarp::fit(&cp, 10.0).unwrap();
        let q = w.eval(p(0.5, 0.5)).unwrap();
        assert!(q.y > 0.5 && q.y < 0.7);
        for row in w.side_conditions() {
            assert!(row.iter().all(|v| v.abs() < 1e-8));
        }
        assert!(TpsWarp::fit(&ControlPoints::new(unit_square(), unit_square()).unwrap(), -1.0).is_err());
    }

    #[test]
    fn control_point_validation() {
        let line = vec![p(0.0, 0.0), p(1.0, 1.0), p(2.0, 2.0), p(3.0, 3.0)];
        assert_eq!(
            ControlPoints::new(line.clone(), line).unwrap_err(),
            WarpError::SingularSystem(SingularCause::CollinearSources)
        );
        let vertical = vec![p(1.0, 0.0), p(1.0, 1.0), p(1.0, 5.0)];
        assert!(matches!(ControlPoints::new(vertical.clone(), vertical), Err(WarpError::SingularSystem(_))));
        let dup = vec![p(0.0, 0.0), p(1.0, 0.0), p(0.0, 0.0), p(0.0, 1.0)];
        assert_eq!(
            ControlPoints::new(dup.clone(), dup).unwrap_err(),
            WarpError::SingularSystem(SingularCause::DuplicateSource(0, 2))
        );
        assert_eq!(
            ControlPoints::new(vec![p(0.0, 0.0), p(1.0, 0.0)], vec![p(0.0, 0.0), p(1.0, 0.0)]).unwrap_err(),
            WarpError::TooFewControlPoints(2)
        );
        let mut bad = unit_square();
        bad[1].x = f64::NAN;
        assert_eq!(ControlPoints::new(bad, unit_square()).unwrap_err(), WarpError::NonFinite);
    }

    #[test]
    fn eval_rejects_non_finite() {
        let w = TpsWarp::from_affine([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]);
        assert_eq!(w.eval(p(f64::INFINITY, 0.0)).unwrap_err(), WarpError::NonFinite);
    }

    #[test]
    fn hull_area_of_square_with_interior() {
        let mut pts = unit_square();
        pts.push(p(0.5, 0.5));
        pts.push(p(0.2, 0.9));
        assert!((convex_hull_area(&pts) - 1.0).abs() < 1e-15);
        assert_eq!(tps_kernel(0.0), 0.0);
        assert!((tps_kernel(std::f64::consts::E) - std::f64::consts::E.powi(2)).abs() < 1e-12);
    }

    #[test]
    fn offset_examples() {
        assert_eq!(OffsetMap::new(64.0).unwrap().map(5.0, 3.0), p(69.0, 3.0));
        assert_eq!(OffsetMap::new(0.0).unwrap().map(7.5, 2.0), p(7.5, 2.0));
        assert_eq!(OffsetMap::new(128.0).unwrap().map(127.0, 63.0), p(255.0, 63.0));
        assert!(OffsetMap::new(-1.0).is_err());
    }

    #[test]
    fn tps_json_schema() {
        let mut src = unit_square();
        src.push(p(0.5, 0.5));
        let mut dst = unit_square();
        dst.push(p(0.5, 0.7));
        let w = TpsWarp::fit(&ControlPoints::new(src, dst).unwrap(), 0.0).unwrap();
        let v = serde_json::to_value(&w).unwrap();
        assert_eq!(v["affine"].as_array().unwrap().len(), 2);
        assert_eq!(v["weights"].as_array().unwrap().len(), 5);
        assert_eq!(v["sources"][4], serde_json::json!([0.5, 0.5]));
        assert_eq!(v["lambda"], 0.0);
        let back: TpsWarp = serde_json::from_value(v).unwrap();
        assert_eq!(back, w);
        let bad = serde_json::json!({"affine": [[1,0,0],[0,1,0]], "weights": [[0,0]], "sources": [], "lambda": 0});
        assert!(serde_json::from_value::<TpsWarp>(bad).is_err());
    }

    #[test]
    fn fold_detection() {
        let id = TpsWarp::from_affine([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]);
        let grid: Vec<Point2> = (0..10).flat_map(|r| (0..10).map(move |c| p(c as f64, r as f64))).collect();
        assert!(detect_fold(&id, &grid, DEFAULT_FOLD_CELL).is_empty());

        // Two landmarks pinned to the same target.
        let src = vec![p(0.0, 0.0), p(4.0, 0.0), p(4.0, 4.0), p(0.0, 4.0), p(2.0, 2.0)];
        let dst = vec![p(0.0, 0.0), p(4.0, 0.0), p(4.0, 4.0), p(2.2, 2.2), p(2.2, 2.2)];
        let w = TpsWarp::fit(&ControlPoints::new(src, dst).unwrap(), 0.0).unwrap();
        let folds = detect_fold(&w, &[p(0.0, 4.0), p(2.0, 2.0), p(4.0, 0.0)], DEFAULT_FOLD_CELL);
        assert!(folds.contains(&(p(0.0, 4.0), p(2.0, 2.0))));
    }

    #[test]
    fn collisions_match_brute_force() {
        let pts: Vec<Point2> = (0..40).map(|i| p((i * 7 % 13) as f64 * 0.3, (i * 5 % 11) as f64 * 0.2)).collect();
        let cell = 0.5;
        let key = |q: &Point2| ((q.x / cell).floor() as i64, (q.y / cell).floor() as i64);
        let mut brute = Vec::new();
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                if key(&pts[i]) == key(&pts[j]) {
                    brute.push((i, j));
                }
            }
        }
        assert_eq!(find_collisions(&pts, cell), brute);
    }
}
