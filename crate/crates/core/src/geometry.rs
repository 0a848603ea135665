//! Coordinate spaces, condition-image layout and pixel/token conversion.
//!
//! All pixel geometry uses a top-left origin with x growing rightward and y
//! downward. Token coordinates address the top-left corner of a token, so the
//! pixel `(p_x, p_y)` lands on token coordinate `(p_x / f, p_y / f)` for a
//! latent factor `f`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Height in pixels of every condition image.
pub const CONDITION_HEIGHT: u32 = 64;

/// Side of the square cell a logographic character occupies.
pub const LOGOGRAPHIC_CELL: u32 = 64;

/// Pixels per token side after VAE downsampling and patchification.
pub const DEFAULT_LATENT_FACTOR: u32 = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("text is empty")]
    EmptyText,
    #[error("no glyph available for {ch:?} (U+{:04X})", *ch as u32)]
    UnsupportedCodePoint { ch: char },
    #[error("degenerate rectangle [{x1}, {x2}) x [{y1}, {y2})")]
    DegenerateRect { x1: u32, y1: u32, x2: u32, y2: u32 },
    #[error("latent factor must be at least 1")]
    ZeroLatentFactor,
}

/// Half-open integer pixel rectangle `[x1, x2) x [y1, y2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawRect", into = "RawRect")]
pub struct PixelRect {
    x1: u32,
    y1: u32,
    x2: u32,
    y2: u32,
}

#[derive(Serialize, Deserialize)]
struct RawRect {
    x1: u32,
    y1: u32,
    x2: u32,
    y2: u32,
}

impl TryFrom<RawRect> for PixelRect {
    type Error = GeometryError;
    fn try_from(r: RawRect) -> Result<Self, Self::Error> {
        PixelRect::new(r.x1, r.y1, r.x2, r.y2)
    }
}

impl From<PixelRect> for RawRect {
    fn from(r: PixelRect) -> Self {
        RawRect { x1: r.x1, y1: r.y1, x2: r.x2, y2: r.y2 }
    }
}

impl PixelRect {
    pub fn new(x1: u32, y1: u32, x2: u32, y2: u32) -> Result<Self, GeometryError> {
        if x2 <= x1 || y2 <= y1 {
            return Err(GeometryError::DegenerateRect { x1, y1, x2, y2 });
        }
        Ok(Self { x1, y1, x2, y2 })
    }

    pub fn x1(&self) -> u32 {
        self.x1
    }
    pub fn y1(&self) -> u32 {
        self.y1
    }
    pub fn x2(&self) -> u32 {
        self.x2
    }
    pub fn y2(&self) -> u32 {
        self.y2
    }
    pub fn width(&self) -> u32 {
        self.x2 - self.x1
    }
    pub fn height(&self) -> u32 {
        self.y2 - self.y1
    }

    pub fn intersects(&self, other: &PixelRect) -> bool {
        self.x1 < other.x2 && other.x1 < self.x2 && self.y1 < other.y2 && other.y1 < self.y2
    }

    /// Whether the two rectangles are closer than `gap` pixels along both axes.
    pub fn within_gap(&self, other: &PixelRect, gap: u32) -> bool {
        self.x1 < other.x2 + gap
            && other.x1 < self.x2 + gap
            && self.y1 < other.y2 + gap
            && other.y1 < self.y2 + gap
    }

    pub fn contained_in(&self, width: u32, height: u32) -> bool {
        self.x2 <= width && self.y2 <= height
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScriptKind {
    /// One connected strip per text run.
    Alphabetic,
    /// One square cell per character.
    Logographic,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ScriptClass {
    pub kind: ScriptKind,
    pub name: String,
}

impl ScriptClass {
    pub fn new(kind: ScriptKind, name: impl Into<String>) -> Self {
        Self { kind, name: name.into() }
    }

    pub fn latin() -> Self {
        Self::new(ScriptKind::Alphabetic, "latin")
    }

    pub fn cjk() -> Self {
        Self::new(ScriptKind::Logographic, "cjk")
    }

    /// Best-effort script class of a single character, or `None` for
    /// characters that carry no script of their own (spaces, digits,
    /// punctuation).
    pub fn of_char(ch: char) -> Option<Self> {
        let cp = ch as u32;
        let name = match cp {
            0x1100..=0x11FF | 0x3130..=0x318F | 0xAC00..=0xD7AF => "hangul",
            0x3040..=0x30FF | 0x31F0..=0x31FF => "kana",
            0x2E80..=0x2FDF | 0x3400..=0x4DBF | 0x4E00..=0x9FFF | 0xF900..=0xFAFF
            | 0x20000..=0x3134F => "cjk",
            0x0370..=0x03FF | 0x1F00..=0x1FFF => "greek",
            0x0400..=0x052F => "cyrillic",
            0x0E00..=0x0E7F => "thai",
            _ if ch.is_alphabetic() => "latin",
            _ => return None,
        };
        let kind = match name {
            "hangul" | "kana" | "cjk" => ScriptKind::Logographic,
            _ => ScriptKind::Alphabetic,
        };
        Some(Self::new(kind, name))
    }
}

/// Per-string advance widths, typically backed by a rasterizer's shaping.
pub trait AdvanceWidths {
    /// Horizontal advance of `text` in pixels at condition-image scale.
    fn advance(&self, text: &str) -> Result<f64, GeometryError>;

    /// Whether a glyph exists for `ch`.
    fn covers(&self, _ch: char) -> bool {
        true
    }
}

/// Every character advances by the same amount. Covers all code points.
#[derive(Debug, Clone, Copy)]
pub struct MonospaceAdvance(pub f64);

impl AdvanceWidths for MonospaceAdvance {
    fn advance(&self, text: &str) -> Result<f64, GeometryError> {
        Ok(self.0 * text.chars().count() as f64)
    }
}

/// A fixed total advance regardless of content.
#[derive(Debug, Clone, Copy)]
pub struct FixedAdvance(pub f64);

impl AdvanceWidths for FixedAdvance {
    fn advance(&self, _text: &str) -> Result<f64, GeometryError> {
        Ok(self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutCell {
    pub text: String,
    #[serde(flatten)]
    pub rect: PixelRect,
}

/// Geometry of the condition image for one text run.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionLayout {
    cells: Vec<LayoutCell>,
    width: u32,
    script: ScriptClass,
}

impl ConditionLayout {
    pub fn cells(&self) -> &[LayoutCell] {
        &self.cells
    }

    /// Canvas width in pixels.
    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        CONDITION_HEIGHT
    }

    pub fn script(&self) -> &ScriptClass {
        &self.script
    }

    pub fn text(&self) -> String {
        self.cells.iter().map(|c| c.text.as_str()).collect()
    }

    /// Token grid covering the condition canvas.
    pub fn token_grid(&self, latent_factor: u32) -> Result<TokenGrid, GeometryError> {
        TokenGrid::for_pixels(self.height(), self.width, latent_factor)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "script": self.script.name,
            "height": self.height(),
            "width": self.width,
            "cells": self.cells,
        })
    }
}

/// Lays out `text` as a condition image.
///
/// Logographic scripts get one 64x64 cell per character. Alphabetic scripts get
/// one strip whose width is the shaped advance rounded up to a whole number of
/// tokens.
pub fn build_condition_layout(
    text: &str,
    script: &ScriptClass,
    widths: &dyn AdvanceWidths,
    latent_factor: u32,
) -> Result<ConditionLayout, GeometryError> {
    if text.is_empty() {
        return Err(GeometryError::EmptyText);
    }
    if latent_factor == 0 {
        return Err(GeometryError::ZeroLatentFactor);
    }
    if let Some(ch) = text.chars().find(|&c| !widths.covers(c)) {
        return Err(GeometryError::UnsupportedCodePoint { ch });
    }
    match script.kind {
        ScriptKind::Logographic => {
            let cells = text
                .chars()
                .enumerate()
                .map(|(i, ch)| {
                    let x1 = i as u32 * LOGOGRAPHIC_CELL;
                    LayoutCell {
                        text: ch.to_string(),
                        rect: PixelRect::new(x1, 0, x1 + LOGOGRAPHIC_CELL, CONDITION_HEIGHT)
                            .expect("cell is non-degenerate"),
                    }
                })
                .collect::<Vec<_>>();
            let width = cells.len() as u32 * LOGOGRAPHIC_CELL;
            Ok(ConditionLayout { cells, width, script: script.clone() })
        }
        ScriptKind::Alphabetic => {
            let advance = widths.advance(text)?.max(0.0);
            let f = latent_factor as f64;
            let width = (((advance / f).ceil() as u32) * latent_factor).max(latent_factor);
            let rect = PixelRect::new(0, 0, width, CONDITION_HEIGHT).expect("width >= 1");
            Ok(ConditionLayout {
                cells: vec![LayoutCell { text: text.to_string(), rect }],
                width,
                script: script.clone(),
            })
        }
    }
}

/// Splits `text` into maximal same-script runs, in input order.
///
/// Characters without a script of their own join the run before them, or the
/// first run when they lead the string. A string with no scripted characters
/// at all is a single run of `fallback`.
pub fn split_script_runs(text: &str, fallback: &ScriptClass) -> Vec<(String, ScriptClass)> {
    let mut runs: Vec<(String, ScriptClass)> = Vec::new();
    let mut pending = String::new();
    for ch in text.chars() {
        match ScriptClass::of_char(ch) {
            Some(class) => match runs.last_mut() {
                Some((run, last)) if *last == class => run.push(ch),
                _ => {
                    let mut run = std::mem::take(&mut pending);
                    run.push(ch);
                    runs.push((run, class));
                }
            },
            None => match runs.last_mut() {
                Some((run, _)) => run.push(ch),
                None => pending.push(ch),
            },
        }
    }
    if !pending.is_empty() {
        runs.push((pending, fallback.clone()));
    }
    runs
}

/// One layout per same-script run of a mixed-script string.
pub fn build_condition_layouts(
    text: &str,
    fallback: &ScriptClass,
    widths: &dyn AdvanceWidths,
    latent_factor: u32,
) -> Result<Vec<ConditionLayout>, GeometryError> {
    if text.is_empty() {
        return Err(GeometryError::EmptyText);
    }
    split_script_runs(text, fallback)
        .iter()
        .map(|(run, script)| build_condition_layout(run, script, widths, latent_factor))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenGrid {
    pub latent_factor: u32,
    pub rows: u32,
    pub cols: u32,
}

impl TokenGrid {
    /// Grid covering a `height_px` x `width_px` image; partial tokens round up.
    pub fn for_pixels(height_px: u32, width_px: u32, latent_factor: u32) -> Result<Self, GeometryError> {
        if latent_factor == 0 {
            return Err(GeometryError::ZeroLatentFactor);
        }
        Ok(Self {
            latent_factor,
            rows: height_px.div_ceil(latent_factor),
            cols: width_px.div_ceil(latent_factor),
        })
    }

    /// A grid given directly in tokens.
    pub fn from_tokens(rows: u32, cols: u32, latent_factor: u32) -> Result<Self, GeometryError> {
        if latent_factor == 0 {
            return Err(GeometryError::ZeroLatentFactor);
        }
        Ok(Self { latent_factor, rows, cols })
    }

    pub fn len(&self) -> usize {
        self.rows as usize * self.cols as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Token top-left coordinates in row-major order.
    pub fn coords(&self) -> impl Iterator<Item = Point2> + '_ {
        (0..self.rows).flat_map(move |r| (0..self.cols).map(move |c| Point2::new(c as f64, r as f64)))
    }
}

/// A continuous 2D coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dist(&self, other: &Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

impl std::ops::Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl std::ops::Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

/// Continuous pixel coordinate to continuous token coordinate. No rounding.
pub fn pixel_to_token(p: Point2, grid: &TokenGrid) -> Point2 {
    let f = grid.latent_factor as f64;
    Point2::new(p.x / f, p.y / f)
}

pub fn token_to_pixel(t: Point2, grid: &TokenGrid) -> Point2 {
    let f = grid.latent_factor as f64;
    Point2::new(t.x * f, t.y * f)
}
