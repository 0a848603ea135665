//! Alignment request files.

use std::path::{Path, PathBuf};

use glyphalign::geometry::{
    build_condition_layout, AdvanceWidths, ConditionLayout, FixedAdvance, MonospaceAdvance, PixelRect, Point2,
    ScriptClass, ScriptKind, TokenGrid, DEFAULT_LATENT_FACTOR,
};
use glyphalign::pe::{AlignMode, ConditionPatch, WarpSpec};
use glyphalign::warp::{ControlPoints, TargetRegion, WarpError};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Per-character advance used when neither a font nor an advance is given.
pub const DEFAULT_CHAR_ADVANCE: f64 = 28.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum RequestMode {
    Affine,
    Tps,
    Offset,
}

impl From<RequestMode> for AlignMode {
    fn from(m: RequestMode) -> Self {
        match m {
            RequestMode::Affine => AlignMode::Affine,
            RequestMode::Tps => AlignMode::Tps,
            RequestMode::Offset => AlignMode::LayoutFree,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetSize {
    pub width: u32,
    pub height: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlPointPair {
    /// Condition token coordinate `(u, v)`.
    pub source: [f64; 2],
    /// Target token coordinate `(x, y)`.
    pub target: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxRequest {
    pub text: String,
    /// Script name (`latin`, `cjk`, ...) or kind (`alphabetic`, `logographic`);
    /// inferred from the text when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub script: Option<String>,
    /// `[x1, y1, x2, y2]` in target pixels, half-open.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<[u32; 4]>,
    /// Total condition advance in pixels, overriding the font measurement.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub advance: Option<f64>,
    /// Text line corners (tl, tr, br, bl) in target pixels.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quad: Option<[[f64; 2]; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub control_points: Option<Vec<ControlPointPair>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutRequest {
    pub target: TargetSize,
    pub mode: RequestMode,
    #[serde(default)]
    pub boxes: Vec<BoxRequest>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub latent_factor: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition_font: Option<PathBuf>,
}

/// A validated request ready for alignment.
pub struct PreparedRequest {
    pub mode: AlignMode,
    pub grid: TokenGrid,
    pub patches: Vec<ConditionPatch>,
    /// Declared token-space region of each box, when it has one.
    pub regions: Vec<Option<TargetRegion>>,
    pub labels: Vec<String>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub mode: Option<RequestMode>,
    pub latent_factor: Option<u32>,
    pub lambda: Option<f64>,
}

fn label(i: usize, text: &str) -> String {
    format!("box {i} ({text:?})")
}

fn resolve_script(b: &BoxRequest) -> Result<ScriptClass, String> {
    match b.script.as_deref() {
        Some("alphabetic") => Ok(ScriptClass::latin()),
        Some("logographic") => Ok(ScriptClass::cjk()),
        Some(name @ ("latin" | "greek" | "cyrillic" | "thai")) => Ok(ScriptClass::new(ScriptKind::Alphabetic, name)),
        Some(name @ ("cjk" | "hangul" | "kana")) => Ok(ScriptClass::new(ScriptKind::Logographic, name)),
        Some(other) => Err(format!("unknown script {other:?}")),
        None => Ok(b.text.chars().find_map(ScriptClass::of_char).unwrap_or_else(ScriptClass::latin)),
    }
}

impl LayoutRequest {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let mut req: LayoutRequest =
            serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        if let Some(font) = &mut req.condition_font {
            if font.is_relative() {
                *font = path.parent().unwrap_or(Path::new(".")).join(&*font);
            }
        }
        Ok(req)
    }

    pub fn prepare(&self, ov: &Overrides) -> Result<PreparedRequest, CliError> {
        let mode: AlignMode = ov.mode.unwrap_or(self.mode).into();
        let lf = ov.latent_factor.or(self.latent_factor).unwrap_or(DEFAULT_LATENT_FACTOR);
        let lambda = ov.lambda.or(self.lambda).unwrap_or(0.0);
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(CliError::Input(format!("lambda must be finite and >= 0, got {lambda}")));
        }
        let grid = TokenGrid::for_pixels(self.target.height, self.target.width, lf)
            .map_err(|e| CliError::Input(format!("target: {e}")))?;
        let font = match &self.condition_font {
            Some(p) => Some(
                glyphalign::datagen::render::FontFace::load(p).map_err(|e| CliError::Input(e.to_string()))?,
            ),
            None => None,
        };
        let font_widths = font.as_ref().map(|f| f.condition_widths());

        let mut out = PreparedRequest {
            mode,
            grid,
            patches: Vec::with_capacity(self.boxes.len()),
            regions: Vec::with_capacity(self.boxes.len()),
            labels: Vec::with_capacity(self.boxes.len()),
        };
        for (i, b) in self.boxes.iter().enumerate() {
            let name = label(i, &b.text);
            let input = |m: String| CliError::Input(format!("{name}: {m}"));
            let script = resolve_script(b).map_err(input)?;
            let layout: ConditionLayout = {
                let widths: &dyn AdvanceWidths = match (b.advance, &font_widths) {
                    (Some(a), _) => &FixedAdvance(a),
                    (None, Some(w)) => w,
                    (None, None) => &MonospaceAdvance(DEFAULT_CHAR_ADVANCE),
                };
                build_condition_layout(&b.text, &script, widths, lf).map_err(|e| input(e.to_string()))?
            };
            let region = match b.region {
                Some([x1, y1, x2, y2]) => {
                    let rect = PixelRect::new(x1, y1, x2, y2).map_err(|e| input(e.to_string()))?;
                    if !rect.contained_in(self.target.width, self.target.height) {
                        return Err(input(format!(
                            "region {:?} exceeds the {}x{} target",
                            [x1, y1, x2, y2],
                            self.target.width,
                            self.target.height
                        )));
                    }
                    Some(TargetRegion::from_pixel_rect(&rect, lf).map_err(|e| input(e.to_string()))?)
                }
                None => None,
            };
            let warp = match mode {
                AlignMode::Affine => WarpSpec::Affine(region.ok_or_else(|| input("affine mode needs a region".into()))?),
                AlignMode::LayoutFree => WarpSpec::LayoutFree,
                AlignMode::Tps => {
                    let tokens = layout.token_grid(lf).map_err(|e| input(e.to_string()))?;
                    let pairs: Vec<(Point2, Point2)> = match (&b.control_points, &b.quad) {
                        (Some(cps), _) => cps
                            .iter()
                            .map(|c| (Point2::new(c.source[0], c.source[1]), Point2::new(c.target[0], c.target[1])))
                            .collect(),
                        (None, Some(q)) => {
                            let (w, h) = ((tokens.cols - 1) as f64, (tokens.rows - 1) as f64);
                            let f = lf as f64;
                            let corners = [(0.0, 0.0), (w, 0.0), (w, h), (0.0, h)];
                            corners
                                .iter()
                                .zip(q)
                                .map(|(s, t)| (Point2::new(s.0, s.1), Point2::new(t[0] / f, t[1] / f)))
                                .collect()
                        }
                        (None, None) => return Err(input("tps mode needs control_points or a quad".into())),
                    };
                    let control_points = ControlPoints::from_pairs(&pairs).map_err(|e| match e {
                        WarpError::SingularSystem(_) => CliError::Numeric(format!("{name}: {e}")),
                        other => input(other.to_string()),
                    })?;
                    WarpSpec::Tps { control_points, lambda }
                }
            };
            out.patches.push(ConditionPatch { layout, warp });
            out.regions.push(region);
            out.labels.push(name);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn boxed(text: &str, script: Option<&str>) -> BoxRequest {
        BoxRequest {
            text: text.into(),
            script: script.map(Into::into),
            region: None,
            advance: None,
            quad: None,
            control_points: None,
        }
    }

    #[test]
    fn scripts_resolve_by_name_kind_or_text() {
        assert_eq!(resolve_script(&boxed("abc", None)).unwrap(), ScriptClass::latin());
        assert_eq!(resolve_script(&boxed("12 你好", None)).unwrap(), ScriptClass::cjk());
        assert_eq!(resolve_script(&boxed("123", None)).unwrap(), ScriptClass::latin());
        assert_eq!(resolve_script(&boxed("abc", Some("logographic"))).unwrap().kind, ScriptKind::Logographic);
        assert_eq!(resolve_script(&boxed("abc", Some("hangul"))).unwrap().kind, ScriptKind::Logographic);
        assert!(resolve_script(&boxed("abc", Some("klingon"))).is_err());
    }

    #[test]
    fn overrides_take_precedence() {
        let req = LayoutRequest {
            target: TargetSize { width: 128, height: 64 },
            mode: RequestMode::Affine,
            boxes: vec![BoxRequest { region: Some([0, 0, 64, 32]), ..boxed("ab", None) }],
            latent_factor: Some(16),
            lambda: None,
            condition_font: None,
        };
        let p = req.prepare(&Overrides::default()).unwrap();
        assert_eq!((p.grid.rows, p.grid.cols), (4, 8));
        let p = req.prepare(&Overrides { latent_factor: Some(8), ..Default::default() }).unwrap();
        assert_eq!((p.grid.rows, p.grid.cols), (8, 16));
        assert_eq!(p.regions[0].unwrap().x2, 8.0);
        let p = req.prepare(&Overrides { mode: Some(RequestMode::Offset), ..Default::default() }).unwrap();
        assert_eq!(p.mode, AlignMode::LayoutFree);
    }

    #[test]
    fn explicit_advance_sets_strip_width() {
        let req = LayoutRequest {
            target: TargetSize { width: 128, height: 64 },
            mode: RequestMode::Offset,
            boxes: vec![BoxRequest { advance: Some(150.0), ..boxed("Hello", None) }],
            latent_factor: None,
            lambda: None,
            condition_font: None,
        };
        let p = req.prepare(&Overrides::default()).unwrap();
        assert_eq!(p.patches[0].layout.width(), 160);
        assert_eq!(p.labels[0], "box 0 (\"Hello\")");
    }
}
