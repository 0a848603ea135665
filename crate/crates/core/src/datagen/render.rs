//! Glyph rasterization into coverage masks, compositing, and condition strips.

use std::path::{Path, PathBuf};

use image::{GrayImage, Luma, Rgb, RgbImage};

use super::DatagenError;
use crate::geometry::{AdvanceWidths, ConditionLayout, GeometryError, ScriptKind, CONDITION_HEIGHT, LOGOGRAPHIC_CELL};

/// Nominal em size for condition glyphs before fitting into the 64 px strip.
const CONDITION_PX: f32 = 48.0;
/// Tallest line box allowed inside a condition strip.
const CONDITION_LINE_MAX: f32 = 60.0;

pub struct FontFace {
    font: fontdue::Font,
    path: PathBuf,
}

impl std::fmt::Debug for FontFace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FontFace").field("path", &self.path).finish()
    }
}

impl FontFace {
    pub fn load(path: &Path) -> Result<Self, DatagenError> {
        let bytes = std::fs::read(path).map_err(|_| DatagenError::MissingFont { path: path.to_path_buf() })?;
        let font = fontdue::Font::from_bytes(bytes, fontdue::FontSettings::default())
            .map_err(|e| DatagenError::FontParse { path: path.to_path_buf(), message: e.to_string() })?;
        Ok(Self { font, path: path.to_path_buf() })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn covers(&self, ch: char) -> bool {
        self.font.lookup_glyph_index(ch) != 0
    }

    fn check(&self, text: &str) -> Result<(), DatagenError> {
        match text.chars().find(|&c| !self.covers(c)) {
            Some(ch) => Err(DatagenError::GlyphMissing { ch, font: self.path.clone() }),
            None => Ok(()),
        }
    }

    /// Pen advance of `text` at `px`, including kerning.
    pub fn advance(&self, text: &str, px: f32) -> f32 {
        let mut pen = 0.0;
        let mut prev = None;
        for ch in text.chars() {
            if let Some(p) = prev {
                pen += self.font.horizontal_kern(p, ch, px).unwrap_or(0.0);
            }
            pen += self.font.metrics(ch, px).advance_width;
            prev = Some(ch);
        }
        pen
    }

    fn line_extent(&self, px: f32) -> (f32, f32) {
        match self.font.horizontal_line_metrics(px) {
            Some(m) => (m.ascent, m.descent),
            None => (px * 0.8, -px * 0.2),
        }
    }

    /// Rasterizes one line of text and crops it to the pixels with non-zero
    /// coverage.
    pub fn render_line(&self, text: &str, px: f32) -> Result<Coverage, DatagenError> {
        self.check(text)?;
        let (ascent, descent) = self.line_extent(px);
        let pad = px.ceil() as i32;
        let width = (self.advance(text, px).ceil() as i32 + 2 * pad).max(1) as u32;
        let height = ((ascent - descent).ceil() as i32 + 2 * pad).max(1) as u32;
        let mut mask = Coverage::blank(width, height);
        let baseline = pad as f32 + ascent;
        self.draw(&mut mask, text, px, pad as f32, baseline);
        Ok(mask.cropped())
    }

    fn draw(&self, mask: &mut Coverage, text: &str, px: f32, x0: f32, baseline: f32) {
        let mut pen = x0;
        let mut prev = None;
        for ch in text.chars() {
            if let Some(p) = prev {
                pen += self.font.horizontal_kern(p, ch, px).unwrap_or(0.0);
            }
            let (m, bitmap) = self.font.rasterize(ch, px);
            let gx = pen.round() as i32 + m.xmin;
            let gy = baseline.round() as i32 - m.ymin - m.height as i32;
            mask.blit(gx, gy, m.width, m.height, &bitmap);
            pen += m.advance_width;
            prev = Some(ch);
        }
    }

    /// Size at which a condition line fits the strip height.
    fn condition_px(&self) -> f32 {
        let (a, d) = self.line_extent(CONDITION_PX);
        let per_px = (a - d) / CONDITION_PX;
        CONDITION_PX.min(CONDITION_LINE_MAX / per_px)
    }

    pub fn condition_widths(&self) -> ConditionWidths<'_> {
        ConditionWidths { face: self, px: self.condition_px() }
    }

    /// Black-on-white condition image for `layout`.
    pub fn render_condition(&self, layout: &ConditionLayout) -> Result<GrayImage, DatagenError> {
        let text = layout.text();
        self.check(&text)?;
        let px = self.condition_px();
        let (ascent, descent) = self.line_extent(px);
        let baseline = (CONDITION_HEIGHT as f32 - (ascent - descent)) / 2.0 + ascent;
        let mut mask = Coverage::blank(layout.width(), CONDITION_HEIGHT);
        match layout.script().kind {
            ScriptKind::Alphabetic => self.draw(&mut mask, &text, px, 0.0, baseline),
            ScriptKind::Logographic => {
                for cell in layout.cells() {
                    let adv = self.advance(&cell.text, px);
                    let x0 = cell.rect.x1() as f32 + (LOGOGRAPHIC_CELL as f32 - adv) / 2.0;
                    self.draw(&mut mask, &cell.text, px, x0, baseline);
                }
            }
        }
        Ok(GrayImage::from_fn(mask.width, mask.height, |x, y| Luma([255 - mask.get(x, y)])))
    }
}

/// Advance widths measured with a condition font at strip scale.
pub struct ConditionWidths<'a> {
    face: &'a FontFace,
    px: f32,
}

impl AdvanceWidths for ConditionWidths<'_> {
    fn advance(&self, text: &str) -> Result<f64, GeometryError> {
        if let Some(ch) = text.chars().find(|&c| !self.face.covers(c)) {
            return Err(GeometryError::UnsupportedCodePoint { ch });
        }
        Ok(self.face.advance(text, self.px) as f64)
    }

    fn covers(&self, ch: char) -> bool {
        self.face.covers(ch)
    }
}

/// 8-bit glyph coverage.
#[derive(Debug, Clone, PartialEq)]
pub struct Coverage {
    pub width: u32,
    pub height: u32,
    data: Vec<u8>,
}

impl Coverage {
    pub fn blank(width: u32, height: u32) -> Self {
        Self { width, height, data: vec![0; width as usize * height as usize] }
    }

    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.data[(y * self.width + x) as usize]
    }

    fn blit(&mut self, x0: i32, y0: i32, w: usize, h: usize, src: &[u8]) {
        for r in 0..h {
            let y = y0 + r as i32;
            if y < 0 || y >= self.height as i32 {
                continue;
            }
            for c in 0..w {
                let x = x0 + c as i32;
                if x < 0 || x >= self.width as i32 {
                    continue;
                }
                let i = (y as u32 * self.width + x as u32) as usize;
                self.data[i] = self.data[i].saturating_add(src[r * w + c]);
            }
        }
    }

    /// Tight bounds of non-zero coverage as `(x1, y1, x2, y2)`, half-open.
    pub fn ink_bounds(&self) -> Option<(u32, u32, u32, u32)> {
        let mut b: Option<(u32, u32, u32, u32)> = None;
        for y in 0..self.height {
            for x in 0..self.width {
                if self.get(x, y) > 0 {
                    b = Some(match b {
                        None => (x, y, x + 1, y + 1),
                        Some((x1, y1, x2, y2)) => (x1.min(x), y1.min(y), x2.max(x + 1), y2.max(y + 1)),
                    });
                }
            }
        }
        b
    }

    pub fn cropped(&self) -> Coverage {
        match self.ink_bounds() {
            None => Coverage::blank(0, 0),
            Some((x1, y1, x2, y2)) => {
                let (w, h) = (x2 - x1, y2 - y1);
                let mut out = Coverage::blank(w, h);
                for y in 0..h {
                    let src = ((y + y1) * self.width + x1) as usize;
                    out.data[(y * w) as usize..((y + 1) * w) as usize].copy_from_slice(&self.data[src..src + w as usize]);
                }
                out
            }
        }
    }

    /// Horizontal shear about the bottom row: row `y` moves right by
    /// `shear * (height - 1 - y)` (left for negative shear). Returns the
    /// sheared mask and the x offset of the original left edge of the top
    /// and bottom rows.
    pub fn sheared(&self, shear: f64) -> (Coverage, f64, f64) {
        let span = shear * (self.height.saturating_sub(1)) as f64;
        let base = (-span).max(0.0);
        let width = self.width + span.abs().ceil() as u32 + 1;
        let mut out = Coverage::blank(width, self.height);
        for y in 0..self.height {
            let shift = base + shear * (self.height - 1 - y) as f64;
            for xo in 0..width {
                let sx = xo as f64 - shift;
                let x0 = sx.floor();
                let t = sx - x0;
                let sample = |x: f64| -> f64 {
                    if x < 0.0 || x >= self.width as f64 {
                        0.0
                    } else {
                        self.get(x as u32, y) as f64
                    }
                };
                let v = sample(x0) * (1.0 - t) + sample(x0 + 1.0) * t;
                out.data[(y * width + xo) as usize] = v.round().clamp(0.0, 255.0) as u8;
            }
        }
        (out, base + span, base)
    }

    /// Alpha-blends `color` into `img` with this mask's top-left at `(x, y)`.
    pub fn composite(&self, img: &mut RgbImage, x: u32, y: u32, color: [u8; 3]) {
        for my in 0..self.height {
            for mx in 0..self.width {
                let a = self.get(mx, my) as u32;
                if a == 0 {
                    continue;
                }
                let px = img.get_pixel_mut(x + mx, y + my);
                let Rgb(dst) = *px;
                let mut out = [0u8; 3];
                for c in 0..3 {
                    out[c] = ((color[c] as u32 * a + dst[c] as u32 * (255 - a) + 127) / 255) as u8;
                }
                *px = Rgb(out);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture(name: &str) -> PathBuf {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/fonts").join(name)
    }

    #[test]
    fn render_line_is_tight() {
        let f = FontFace::load(&fixture("DejaVuSans.ttf")).unwrap();
        let m = f.render_line("Hello", 32.0).unwrap();
        assert!(m.width > 40 && m.height > 15);
        assert_eq!(m.ink_bounds(), Some((0, 0, m.width, m.height)));
        assert!(matches!(f.render_line("你", 32.0), Err(DatagenError::GlyphMissing { ch: '你', .. })));
    }

    #[test]
    fn missing_font_path() {
        let err = FontFace::load(Path::new("/no/such/font.ttf")).unwrap_err();
        assert!(err.to_string().contains("/no/such/font.ttf"));
    }

    #[test]
    fn condition_strip_is_64_high() {
        use crate::geometry::{build_condition_layout, ScriptClass};
        let f = FontFace::load(&fixture("DejaVuSansMono.ttf")).unwrap();
        let layout = build_condition_layout("Wave", &ScriptClass::latin(), &f.condition_widths(), 16).unwrap();
        let img = f.render_condition(&layout).unwrap();
        assert_eq!(img.height(), 64);
        assert_eq!(img.width(), layout.width());
        assert!(img.pixels().any(|p| p.0[0] < 128));
        let greek = ScriptClass::new(ScriptKind::Logographic, "greek");
        let layout = build_condition_layout("αβ", &greek, &f.condition_widths(), 16).unwrap();
        assert_eq!(f.render_condition(&layout).unwrap().width(), 128);
    }

    #[test]
    fn shear_moves_top_row() {
        let mut m = Coverage::blank(4, 3);
        for y in 0..3 {
            m.data[(y * 4) as usize] = 255;
        }
        let (s, top, bottom) = m.sheared(1.0);
        assert_eq!((top, bottom), (2.0, 0.0));
        assert_eq!(s.get(2, 0), 255);
        assert_eq!(s.get(0, 2), 255);
    }

    #[test]
    fn composite_blends() {
        let mut img = RgbImage::from_pixel(2, 1, Rgb([255, 255, 255]));
        let mut m = Coverage::blank(2, 1);
        m.data = vec![255, 0];
        m.composite(&mut img, 0, 0, [0, 0, 0]);
        assert_eq!(img.get_pixel(0, 0).0, [0, 0, 0]);
        assert_eq!(img.get_pixel(1, 0).0, [255, 255, 255]);
    }
}
