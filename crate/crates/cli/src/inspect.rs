//! Summaries and scatter plots of alignment maps.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use glyphalign::pe::{cross_box_overlaps, AlignMode, AlignmentMap, TokenSource};
use glyphalign::warp::{TargetRegion, DEFAULT_FOLD_CELL};
use image::{Rgb, RgbImage};
use serde::Serialize;

/// Slack for coordinates rounded to 9 significant digits.
const CONTAIN_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxExtent {
    #[serde(rename = "box")]
    pub box_id: usize,
    pub tokens: usize,
    pub min_x: f64,
    pub max_x: f64,
    pub min_y: f64,
    pub max_y: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub declared: Option<[f64; 4]>,
    /// Tokens outside the declared region; 0 when none was declared.
    pub outside: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InspectSummary {
    pub mode: AlignMode,
    pub target_rows: u32,
    pub target_cols: u32,
    pub target_tokens: usize,
    pub condition_tokens: usize,
    pub boxes: Vec<BoxExtent>,
    /// Condition token pairs from different boxes sharing a half-token cell.
    pub collisions: usize,
    pub outside_declared: usize,
    /// Condition tokens left of the target's right edge.
    pub inside_target_columns: usize,
}

pub fn summarize(map: &AlignmentMap, declared: Option<&[Option<TargetRegion>]>) -> InspectSummary {
    let mut per_box: BTreeMap<usize, BoxExtent> = BTreeMap::new();
    let mut inside_target_columns = 0;
    for e in &map.entries {
        let TokenSource::Condition(b) = e.source else { continue };
        let p = e.coord;
        if p.x < map.target_cols as f64 {
            inside_target_columns += 1;
        }
        let region = declared.and_then(|d| d.get(b).copied().flatten());
        let ext = per_box.entry(b).or_insert_with(|| BoxExtent {
            box_id: b,
            tokens: 0,
            min_x: f64::INFINITY,
            max_x: f64::NEG_INFINITY,
            min_y: f64::INFINITY,
            max_y: f64::NEG_INFINITY,
            declared: region.map(|r| [r.x1, r.y1, r.x2, r.y2]),
            outside: 0,
        });
        ext.tokens += 1;
        ext.min_x = ext.min_x.min(p.x);
        ext.max_x = ext.max_x.max(p.x);
        ext.min_y = ext.min_y.min(p.y);
        ext.max_y = ext.max_y.max(p.y);
        if let Some(r) = region {
            let inside = p.x >= r.x1 - CONTAIN_TOL
                && p.x <= r.x2 + CONTAIN_TOL
                && p.y >= r.y1 - CONTAIN_TOL
                && p.y <= r.y2 + CONTAIN_TOL;
            ext.outside += usize::from(!inside);
        }
    }
    let boxes: Vec<BoxExtent> = per_box.into_values().collect();
    InspectSummary {
        mode: map.mode,
        target_rows: map.target_rows,
        target_cols: map.target_cols,
        target_tokens: map.target_entries().count(),
        condition_tokens: boxes.iter().map(|b| b.tokens).sum(),
        collisions: cross_box_overlaps(map, DEFAULT_FOLD_CELL).iter().map(|o| o.colliding_pairs).sum(),
        outside_declared: boxes.iter().map(|b| b.outside).sum(),
        inside_target_columns,
        boxes,
    }
}

impl InspectSummary {
    pub fn text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "mode: {}", self.mode.as_str()).unwrap();
        writeln!(s, "target: {} x {} tokens ({} tokens)", self.target_cols, self.target_rows, self.target_tokens).unwrap();
        writeln!(s, "condition tokens: {}", self.condition_tokens).unwrap();
        for b in &self.boxes {
            write!(
                s,
                "  box {}: {} tokens, x [{:.4}, {:.4}], y [{:.4}, {:.4}]",
                b.box_id, b.tokens, b.min_x, b.max_x, b.min_y, b.max_y
            )
            .unwrap();
            if let Some([x1, y1, x2, y2]) = b.declared {
                write!(s, ", declared [{x1}, {y1}, {x2}, {y2}], outside {}", b.outside).unwrap();
            }
            s.push('\n');
        }
        writeln!(s, "collisions: {}", self.collisions).unwrap();
        writeln!(s, "outside declared boxes: {}", self.outside_declared).unwrap();
        writeln!(s, "condition tokens within target columns: {}", self.inside_target_columns).unwrap();
        s
    }
}

const PALETTE: [[u8; 3]; 6] =
    [[220, 40, 40], [40, 120, 220], [30, 160, 60], [200, 120, 0], [150, 50, 180], [0, 160, 160]];

/// Scatter plot: target tokens as grey dots, condition tokens coloured by box.
pub fn render_scatter(map: &AlignmentMap) -> RgbImage {
    let (mut lo_x, mut lo_y) = (0.0f64, 0.0f64);
    let (mut hi_x, mut hi_y) = (map.target_cols as f64, map.target_rows as f64);
    for e in map.entries.iter().filter(|e| e.coord.is_finite()) {
        lo_x = lo_x.min(e.coord.x);
        lo_y = lo_y.min(e.coord.y);
        hi_x = hi_x.max(e.coord.x + 1.0);
        hi_y = hi_y.max(e.coord.y + 1.0);
    }
    let span = (hi_x - lo_x).max(hi_y - lo_y).max(1.0);
    let scale = (2048.0 / span).clamp(1.0, 8.0);
    let pad = 4.0;
    let w = ((hi_x - lo_x) * scale + 2.0 * pad).ceil() as u32;
    let h = ((hi_y - lo_y) * scale + 2.0 * pad).ceil() as u32;
    let mut img = RgbImage::from_pixel(w, h, Rgb([255, 255, 255]));
    let to_px = |x: f64, y: f64| (((x - lo_x) * scale + pad) as i64, ((y - lo_y) * scale + pad) as i64);
    let put = |img: &mut RgbImage, x: i64, y: i64, c: [u8; 3]| {
        if x >= 0 && y >= 0 && (x as u32) < w && (y as u32) < h {
            img.put_pixel(x as u32, y as u32, Rgb(c));
        }
    };
    let (ex0, ey0) = to_px(0.0, 0.0);
    let (ex1, ey1) = to_px(map.target_cols as f64, map.target_rows as f64);
    for x in ex0..=ex1 {
        put(&mut img, x, ey0, [120, 120, 120]);
        put(&mut img, x, ey1, [120, 120, 120]);
    }
    for y in ey0..=ey1 {
        put(&mut img, ex0, y, [120, 120, 120]);
        put(&mut img, ex1, y, [120, 120, 120]);
    }
    for e in map.entries.iter().filter(|e| e.coord.is_finite()) {
        let (x, y) = to_px(e.coord.x, e.coord.y);
        match e.source {
            TokenSource::Target => put(&mut img, x, y, [190, 190, 190]),
            TokenSource::Condition(b) => {
                let c = PALETTE[b % PALETTE.len()];
                for dy in -1..=1 {
                    for dx in -1..=1 {
                        put(&mut img, x + dx, y + dy, c);
                    }
                }
            }
        }
    }
    img
}
