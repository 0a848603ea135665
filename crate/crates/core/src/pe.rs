//! Positional coordinates for the concatenated target + condition token
//! sequence, and a reference 2D rotary encoder used to check that realigned
//! condition tokens behave as if they sat at their assigned positions.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{ConditionLayout, GeometryError, Point2, TokenGrid};
use crate::warp::{
    find_collisions, AffineBoxMap, ControlPoints, OffsetMap, TargetRegion, TpsWarp, WarpDiagnostics, WarpError,
    DEFAULT_FOLD_CELL,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PeError {
    #[error("box {box_id}: {source}")]
    Warp { box_id: usize, source: WarpError },
    #[error("box {box_id}: {source}")]
    Geometry { box_id: usize, source: GeometryError },
    #[error("box {box_id}: warp spec does not match {mode:?} mode")]
    ModeMismatch { box_id: usize, mode: AlignMode },
    #[error("box {box_id}: target region must be in token space")]
    WrongSpace { box_id: usize },
    #[error("vector has length {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid rotary config: {0}")]
    InvalidRope(String),
    #[error("need one query and one key per token ({tokens} tokens, {queries} queries, {keys} keys)")]
    ProbeShape { tokens: usize, queries: usize, keys: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlignMode {
    Affine,
    Tps,
    LayoutFree,
}

impl AlignMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            AlignMode::Affine => "affine",
            AlignMode::Tps => "tps",
            AlignMode::LayoutFree => "layout_free",
        }
    }
}

/// How one condition patch is placed.
#[derive(Debug, Clone, PartialEq)]
pub enum WarpSpec {
    /// Corner-to-corner onto a token-space region.
    Affine(TargetRegion),
    /// Thin-plate spline through landmarks given in token coordinates.
    Tps { control_points: ControlPoints, lambda: f64 },
    /// Shifted past the right edge of the target.
    LayoutFree,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionPatch {
    pub layout: ConditionLayout,
    pub warp: WarpSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TokenSource {
    Target,
    Condition(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignmentEntry {
    pub token_index: usize,
    pub source: TokenSource,
    pub coord: Point2,
}

/// Per-token positional coordinates for target tokens followed by condition
/// tokens.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentMap {
    pub mode: AlignMode,
    pub target_rows: u32,
    pub target_cols: u32,
    pub entries: Vec<AlignmentEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Overlap {
    pub box_a: usize,
    pub box_b: usize,
    pub colliding_pairs: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AlignmentDiagnostics {
    pub extrapolations: usize,
    /// Condition tokens of different boxes landing in the same cell.
    pub overlaps: Vec<Overlap>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Alignment {
    pub map: AlignmentMap,
    pub diagnostics: AlignmentDiagnostics,
}

/// Builds the map: target tokens at their own grid coordinates (row-major),
/// then every condition patch in list order, each row-major, at its warped
/// coordinate.
///
/// In layout-free mode the patches are laid side by side in list order and
/// the whole strip is shifted right by the target width in tokens.
pub fn build_alignment_map(
    patches: &[ConditionPatch],
    target_grid: &TokenGrid,
    mode: AlignMode,
) -> Result<Alignment, PeError> {
    let mut entries: Vec<AlignmentEntry> = target_grid
        .coords()
        .enumerate()
        .map(|(i, coord)| AlignmentEntry { token_index: i, source: TokenSource::Target, coord })
        .collect();
    let mut diag = WarpDiagnostics::default();
    let offset = OffsetMap::new(target_grid.cols as f64).expect("grid width is finite and non-negative");
    let mut strip_x = 0u32;

    for (box_id, patch) in patches.iter().enumerate() {
        let grid = patch
            .layout
            .token_grid(target_grid.latent_factor)
            .map_err(|source| PeError::Geometry { box_id, source })?;
        let warp_err = |source| PeError::Warp { box_id, source };
        let coords: Vec<Point2> = match (&patch.warp, mode) {
            (WarpSpec::Affine(region), AlignMode::Affine) => {
                if region.space != crate::warp::SpaceTag::Token {
                    return Err(PeError::WrongSpace { box_id });
                }
                let m = AffineBoxMap::with_source_size(grid.cols, grid.rows, *region).map_err(warp_err)?;
                grid.coords().map(|p| m.map_counted(p, &mut diag)).collect()
            }
            (WarpSpec::Tps { control_points, lambda }, AlignMode::Tps) => {
                let w = TpsWarp::fit(control_points, *lambda).map_err(warp_err)?;
                grid.coords().map(|p| w.eval(p)).collect::<Result<_, _>>().map_err(warp_err)?
            }
            (WarpSpec::LayoutFree, AlignMode::LayoutFree) => {
                let shift = strip_x as f64;
                strip_x += grid.cols;
                grid.coords().map(|p| offset.map(p.x + shift, p.y)).collect()
            }
            _ => return Err(PeError::ModeMismatch { box_id, mode }),
        };
        let base = entries.len();
        entries.extend(coords.into_iter().enumerate().map(|(i, coord)| AlignmentEntry {
            token_index: base + i,
            source: TokenSource::Condition(box_id),
            coord,
        }));
    }

    let map = AlignmentMap { mode, target_rows: target_grid.rows, target_cols: target_grid.cols, entries };
    let overlaps = cross_box_overlaps(&map, DEFAULT_FOLD_CELL);
    Ok(Alignment { map, diagnostics: AlignmentDiagnostics { extrapolations: diag.extrapolations, overlaps } })
}

/// Collisions between condition tokens that belong to different boxes.
pub fn cross_box_overlaps(map: &AlignmentMap, cell: f64) -> Vec<Overlap> {
    let cond: Vec<(usize, Point2)> = map
        .entries
        .iter()
        .filter_map(|e| match e.source {
            TokenSource::Condition(b) => Some((b, e.coord)),
            TokenSource::Target => None,
        })
        .collect();
    let points: Vec<Point2> = cond.iter().map(|c| c.1).collect();
    let mut counts: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (i, j) in find_collisions(&points, cell) {
        let (a, b) = (cond[i].0, cond[j].0);
        if a != b {
            *counts.entry((a.min(b), a.max(b))).or_default() += 1;
        }
    }
    counts
        .into_iter()
        .map(|((box_a, box_b), colliding_pairs)| Overlap { box_a, box_b, colliding_pairs })
        .collect()
}

impl AlignmentMap {
    pub fn condition_entries(&self) -> impl Iterator<Item = &AlignmentEntry> {
        self.entries.iter().filter(|e| matches!(e.source, TokenSource::Condition(_)))
    }

    pub fn target_entries(&self) -> impl Iterator<Item = &AlignmentEntry> {
        self.entries.iter().filter(|e| e.source == TokenSource::Target)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&MapJson::from(self)).expect("map serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, String> {
        let raw: MapJson = serde_json::from_str(s).map_err(|e| e.to_string())?;
        raw.try_into()
    }
}

#[derive(Serialize, Deserialize)]
struct MapJson {
    mode: String,
    target: TargetJson,
    entries: Vec<EntryJson>,
}

#[derive(Serialize, Deserialize)]
struct TargetJson {
    rows: u32,
    cols: u32,
}

#[derive(Serialize, Deserialize)]
struct EntryJson {
    idx: usize,
    src: String,
    #[serde(rename = "box")]
    box_id: Option<usize>,
    x: f64,
    y: f64,
}

/// Rounds to 9 significant digits; the shortest round-trip rendering of the
/// result then prints at most 9 digits.
fn sig9(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    format!("{v:.8e}").parse().expect("formatted float parses")
}

impl From<&AlignmentMap> for MapJson {
    fn from(m: &AlignmentMap) -> Self {
        MapJson {
            mode: m.mode.as_str().to_string(),
            target: TargetJson { rows: m.target_rows, cols: m.target_cols },
            entries: m
                .entries
                .iter()
                .map(|e| EntryJson {
                    idx: e.token_index,
                    src: match e.source {
                        TokenSource::Target => "target".into(),
                        TokenSource::Condition(_) => "cond".into(),
                    },
                    box_id: match e.source {
                        TokenSource::Target => None,
                        TokenSource::Condition(b) => Some(b),
                    },
                    x: sig9(e.coord.x),
                    y: sig9(e.coord.y),
                })
                .collect(),
        }
    }
}

impl TryFrom<MapJson> for AlignmentMap {
    type Error = String;
    fn try_from(raw: MapJson) -> Result<Self, String> {
        let mode = match raw.mode.as_str() {
            "affine" => AlignMode::Affine,
            "tps" => AlignMode::Tps,
            "layout_free" => AlignMode::LayoutFree,
            other => return Err(format!("unknown mode {other:?}")),
        };
        let mut entries = Vec::with_capacity(raw.entries.len());
        for (i, e) in raw.entries.into_iter().enumerate() {
            if e.idx != i {
                return Err(format!("entry {i} has idx {}", e.idx));
            }
            let source = match (e.src.as_str(), e.box_id) {
                ("target", None) => TokenSource::Target,
                ("cond", Some(b)) => TokenSource::Condition(b),
                (src, b) => return Err(format!("entry {i}: bad source {src:?} / box {b:?}")),
            };
            entries.push(AlignmentEntry { token_index: i, source, coord: Point2::new(e.x, e.y) });
        }
        Ok(AlignmentMap { mode, target_rows: raw.target.rows, target_cols: raw.target.cols, entries })
    }
}

/// Axial 2D rotary encoding: the first `dim_y` features rotate with the y
/// coordinate, the remaining `dim_x` with x.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RopeConfig {
    head_dim: usize,
    dim_y: usize,
    dim_x: usize,
    base: f64,
}

impl RopeConfig {
    /// Even split between the axes, base 10000.
    pub fn new(head_dim: usize) -> Result<Self, PeError> {
        Self::with_split(head_dim, head_dim / 2, 10_000.0)
    }

    pub fn with_split(head_dim: usize, dim_y: usize, base: f64) -> Result<Self, PeError> {
        let dim_x = head_dim.checked_sub(dim_y).ok_or_else(|| PeError::InvalidRope("dim_y > head_dim".into()))?;
        if head_dim < 4 || !head_dim.is_multiple_of(2) {
            return Err(PeError::InvalidRope(format!("head_dim {head_dim} must be even and >= 4")));
        }
        if dim_y < 2 || dim_x < 2 || !dim_y.is_multiple_of(2) || !dim_x.is_multiple_of(2) {
            return Err(PeError::InvalidRope(format!("axis split ({dim_y}, {dim_x}) must be even and >= 2")));
        }
        if !base.is_finite() || base <= 1.0 {
            return Err(PeError::InvalidRope(format!("base {base} must exceed 1")));
        }
        Ok(Self { head_dim, dim_y, dim_x, base })
    }

    pub fn head_dim(&self) -> usize {
        self.head_dim
    }
}

fn rotate_block(block: &mut [f64], pos: f64, base: f64) {
    let d = block.len() as f64;
    for (k, pair) in block.chunks_exact_mut(2).enumerate() {
        let theta = base.powf(-2.0 * k as f64 / d);
        let (s, c) = (pos * theta).sin_cos();
        let (a, b) = (pair[0], pair[1]);
        pair[0] = a * c - b * s;
        pair[1] = a * s + b * c;
    }
}

/// Rotates feature pairs by position-proportional angles. Positions may be
/// fractional.
pub fn rope_encode(vec: &[f64], coord: Point2, cfg: &RopeConfig) -> Result<Vec<f64>, PeError> {
    if vec.len() != cfg.head_dim {
        return Err(PeError::DimensionMismatch { expected: cfg.head_dim, got: vec.len() });
    }
    let mut out = vec.to_vec();
    let (ys, xs) = out.split_at_mut(cfg.dim_y);
    rotate_block(ys, coord.y, cfg.base);
    rotate_block(xs, coord.x, cfg.base);
    Ok(out)
}

/// Rotary-encoded query/key inner products between every pair of tokens,
/// row-major `n x n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeMatrix {
    pub n: usize,
    pub data: Vec<f64>,
}

impl ProbeMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }
}

pub fn attention_probe(
    map: &AlignmentMap,
    cfg: &RopeConfig,
    queries: &[Vec<f64>],
    keys: &[Vec<f64>],
) -> Result<ProbeMatrix, PeError> {
    let n = map.entries.len();
    if queries.len() != n || keys.len() != n {
        return Err(PeError::ProbeShape { tokens: n, queries: queries.len(), keys: keys.len() });
    }
    let q: Vec<Vec<f64>> =
        map.entries.iter().zip(queries).map(|(e, v)| rope_encode(v, e.coord, cfg)).collect::<Result<_, _>>()?;
    let k: Vec<Vec<f64>> =
        map.entries.iter().zip(keys).map(|(e, v)| rope_encode(v, e.coord, cfg)).collect::<Result<_, _>>()?;
    let mut data = Vec::with_capacity(n * n);
    for qi in &q {
        for kj in &k {
            data.push(qi.iter().zip(kj).map(|(a, b)| a * b).sum());
        }
    }
    Ok(ProbeMatrix { n, data })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_condition_layout, MonospaceAdvance, ScriptClass};
    use crate::warp::SpaceTag;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cjk(text: &str) -> ConditionLayout {
        build_condition_layout(text, &ScriptClass::cjk(), &MonospaceAdvance(0.0), 16).unwrap()
    }

    fn rand_vec(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
        (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    fn dot(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    #[test]
    fn single_cell_affine_example() {
        let grid = TokenGrid::from_tokens(64, 64, 16).unwrap();
        // Tokens 2..=5 horizontally, 3..=6 vertically.
        let region = TargetRegion::new(2.0, 3.0, 5.0, 6.0, SpaceTag::Token).unwrap();
        let patch = ConditionPatch { layout: cjk("字"), warp: WarpSpec::Affine(region) };
        let out = build_alignment_map(&[patch], &grid, AlignMode::Affine).unwrap();
        let map = &out.map;
        assert_eq!(map.entries.len(), 4096 + 16);
        assert_eq!(map.target_entries().count(), 4096);
        // The 4x4 condition tokens land exactly on the integer token grid.
        let mut expected = Vec::new();
        for v in 0..4 {
            for u in 0..4 {
                expected.push(Point2::new(2.0 + u as f64, 3.0 + v as f64));
            }
        }
        let got: Vec<Point2> = map.condition_entries().map(|e| e.coord).collect();
        assert_eq!(got, expected);
        for (i, e) in map.entries.iter().enumerate() {
            assert_eq!(e.token_index, i);
        }
        assert_eq!(out.diagnostics.extrapolations, 0);
    }

    #[test]
    fn layout_free_first_token() {
        let grid = TokenGrid::from_tokens(64, 64, 16).unwrap();
        let patch = ConditionPatch { layout: cjk("字"), warp: WarpSpec::LayoutFree };
        let out = build_alignment_map(&[patch], &grid, AlignMode::LayoutFree).unwrap();
        assert_eq!(out.map.condition_entries().next().unwrap().coord, Point2::new(64.0, 0.0));
    }

    #[test]
    fn layout_free_patches_do_not_collide() {
        let grid = TokenGrid::from_tokens(8, 8, 16).unwrap();
        let patches = vec![
            ConditionPatch { layout: cjk("一二"), warp: WarpSpec::LayoutFree },
            ConditionPatch { layout: cjk("三"), warp: WarpSpec::LayoutFree },
        ];
        let out = build_alignment_map(&patches, &grid, AlignMode::LayoutFree).unwrap();
        assert!(out.diagnostics.overlaps.is_empty());
        let second: Vec<_> = out.map.condition_entries().filter(|e| e.source == TokenSource::Condition(1)).collect();
        assert_eq!(second[0].coord, Point2::new(16.0, 0.0));
    }

    #[test]
    fn empty_condition_list() {
        let grid = TokenGrid::from_tokens(3, 5, 16).unwrap();
        let out = build_alignment_map(&[], &grid, AlignMode::Affine).unwrap();
        assert_eq!(out.map.entries.len(), 15);
        assert!(out.map.entries.iter().zip(grid.coords()).all(|(e, c)| e.coord == c && e.source == TokenSource::Target));
    }

    #[test]
    fn mode_mismatch_and_space() {
        let grid = TokenGrid::from_tokens(8, 8, 16).unwrap();
        let region = TargetRegion::new(0.0, 0.0, 4.0, 4.0, SpaceTag::Token).unwrap();
        let patch = ConditionPatch { layout: cjk("字"), warp: WarpSpec::Affine(region) };
        assert!(matches!(
            build_alignment_map(&[patch], &grid, AlignMode::LayoutFree),
            Err(PeError::ModeMismatch { box_id: 0, .. })
        ));
        let px = TargetRegion::new(0.0, 0.0, 4.0, 4.0, SpaceTag::Pixel).unwrap();
        let patch = ConditionPatch { layout: cjk("字"), warp: WarpSpec::Affine(px) };
        assert_eq!(build_alignment_map(&[patch], &grid, AlignMode::Affine), Err(PeError::WrongSpace { box_id: 0 }));
    }

    #[test]
    fn overlapping_boxes_warn() {
        let grid = TokenGrid::from_tokens(16, 16, 16).unwrap();
        let region = TargetRegion::new(1.0, 1.0, 5.0, 5.0, SpaceTag::Token).unwrap();
        let patches = vec![
            ConditionPatch { layout: cjk("字"), warp: WarpSpec::Affine(region) },
            ConditionPatch { layout: cjk("字"), warp: WarpSpec::Affine(region) },
        ];
        let out = build_alignment_map(&patches, &grid, AlignMode::Affine).unwrap();
        assert_eq!(out.diagnostics.overlaps, vec![Overlap { box_a: 0, box_b: 1, colliding_pairs: 16 }]);
    }

    #[test]
    fn tps_mode_corners() {
        let grid = TokenGrid::from_tokens(16, 16, 16).unwrap();
        let src = vec![Point2::new(0.0, 0.0), Point2::new(3.0, 0.0), Point2::new(3.0, 3.0), Point2::new(0.0, 3.0)];
        let dst = vec![Point2::new(2.0, 2.0), Point2::new(8.0, 3.0), Point2::new(8.0, 9.0), Point2::new(2.0, 8.0)];
        let cp = ControlPoints::new(src.clone(), dst.clone()).unwrap();
        let patch = ConditionPatch { layout: cjk("字"), warp: WarpSpec::Tps { control_points: cp, lambda: 0.0 } };
        let out = build_alignment_map(&[patch], &grid, AlignMode::Tps).unwrap();
        let cond: Vec<_> = out.map.condition_entries().collect();
        assert_eq!(cond.len(), 16);
        assert!(cond[0].coord.dist(&dst[0]) < 1e-9);
        assert!(cond[15].coord.dist(&dst[2]) < 1e-9);
    }

    #[test]
    fn json_round_trip_and_digits() {
        let grid = TokenGrid::from_tokens(2, 2, 16).unwrap();
        let region = TargetRegion::new(0.0, 0.0, 1.0, 1.0, SpaceTag::Token).unwrap();
        let layout = build_condition_layout("ab", &ScriptClass::latin(), &MonospaceAdvance(23.0), 16).unwrap();
        let out = build_alignment_map(&[ConditionPatch { layout, warp: WarpSpec::Affine(region) }], &grid, AlignMode::Affine)
            .unwrap();
        let s = out.map.to_json();
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["mode"], "affine");
        assert_eq!(v["target"], serde_json::json!({"rows": 2, "cols": 2}));
        assert_eq!(v["entries"][0], serde_json::json!({"idx": 0, "src": "target", "box": null, "x": 0.0, "y": 0.0}));
        assert_eq!(v["entries"][4]["src"], "cond");
        assert_eq!(v["entries"][4]["box"], 0);
        // y = 1/3 rendered with 9 significant digits.
        assert!(s.contains("0.333333333"));
        assert!(!s.contains("0.3333333333"));
        let back = AlignmentMap::from_json(&s).unwrap();
        assert_eq!(back.to_json(), s);
        assert!(AlignmentMap::from_json(r#"{"mode":"warp","target":{"rows":0,"cols":0},"entries":[]}"#).is_err());
    }

    #[test]
    fn rope_examples() {
        let cfg = RopeConfig::new(8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let v = rand_vec(&mut rng, 8);
        assert_eq!(rope_encode(&v, Point2::new(0.0, 0.0), &cfg).unwrap(), v);
        let r = rope_encode(&v, Point2::new(3.7, -2.2), &cfg).unwrap();
        assert!((dot(&r, &r).sqrt() - dot(&v, &v).sqrt()).abs() < 1e-12);
        assert_eq!(
            rope_encode(&v[..6], Point2::default(), &cfg).unwrap_err(),
            PeError::DimensionMismatch { expected: 8, got: 6 }
        );
        for _ in 0..100 {
            let q = rand_vec(&mut rng, 8);
            let k = rand_vec(&mut rng, 8);
            let a = dot(&rope_encode(&q, Point2::new(3.0, 5.0), &cfg).unwrap(), &rope_encode(&k, Point2::new(1.0, 2.0), &cfg).unwrap());
            let b = dot(&rope_encode(&q, Point2::new(10.0, 12.0), &cfg).unwrap(), &rope_encode(&k, Point2::new(8.0, 9.0), &cfg).unwrap());
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn rope_config_validation() {
        assert!(RopeConfig::new(2).is_err());
        assert!(RopeConfig::new(6).is_err()); // 3 + 3 is odd
        assert!(RopeConfig::with_split(8, 2, 10_000.0).is_ok());
        assert!(RopeConfig::with_split(8, 8, 10_000.0).is_err());
        assert!(RopeConfig::with_split(8, 4, 1.0).is_err());
    }

    #[test]
    fn probe_co_located_tokens() {
        let grid = TokenGrid::from_tokens(4, 4, 16).unwrap();
        // One condition token lands exactly on target token (1, 1).
        let region = TargetRegion::new(1.0, 1.0, 3.0, 3.0, SpaceTag::Token).unwrap();
        let out = build_alignment_map(&[ConditionPatch { layout: cjk("字"), warp: WarpSpec::Affine(region) }], &grid, AlignMode::Affine)
            .unwrap();
        let map = &out.map;
        let n = map.entries.len();
        let cfg = RopeConfig::new(8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let shared_q = rand_vec(&mut rng, 8);
        let keys: Vec<Vec<f64>> = (0..n).map(|_| rand_vec(&mut rng, 8)).collect();
        let queries = vec![shared_q.clone(); n];
        let probe = attention_probe(map, &cfg, &queries, &keys).unwrap();
        let target_idx = 4 + 1;
        let cond_idx = 16;
        assert_eq!(map.entries[cond_idx].coord, map.entries[target_idx].coord);
        for j in 0..n {
            assert_eq!(probe.get(cond_idx, j), probe.get(target_idx, j));
        }
        // Target token 0 sits at the origin: zero rotation on both sides.
        let raw = dot(&queries[0], &keys[0]);
        assert!((probe.get(0, 0) - raw).abs() < 1e-12);
        assert!(attention_probe(map, &cfg, &queries[..1], &keys).is_err());
    }
}
