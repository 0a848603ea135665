//! Synthetic multilingual text-image dataset construction.
//!
//! Each sample renders random strings of a script's characters onto a
//! text-free background in fonts drawn from a pool, and renders the same
//! strings in one fixed condition font as 64 px condition strips. Every
//! sample is a pure function of the configuration and its per-sample seed.

pub mod charset;
pub mod render;

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use image::{GrayImage, RgbImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{build_condition_layout, GeometryError, PixelRect, ScriptClass, ScriptKind, CONDITION_HEIGHT};
use render::{Coverage, FontFace};

#[derive(Debug, Error)]
pub enum DatagenError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("font not found: {}", path.display())]
    MissingFont { path: PathBuf },
    #[error("cannot parse font {}: {message}", path.display())]
    FontParse { path: PathBuf, message: String },
    #[error("font {} has no glyph for {ch:?}", font.display())]
    GlyphMissing { ch: char, font: PathBuf },
    #[error("placement failed: {0}")]
    PlacementFailure(String),
    #[error("no background images in {}", .0.display())]
    NoBackgrounds(PathBuf),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Image { path: PathBuf, source: image::ImageError },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DatagenError + '_ {
    move |source| DatagenError::Io { path: path.to_path_buf(), source }
}

/// Where a script's characters come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CharsetSource {
    Builtin(String),
    Chars(String),
}

impl CharsetSource {
    pub fn resolve(&self) -> Result<Vec<char>, DatagenError> {
        match self {
            CharsetSource::Builtin(name) => {
                charset::builtin(name).ok_or_else(|| DatagenError::Config(format!("unknown builtin charset {name:?}")))
            }
            CharsetSource::Chars(s) => Ok(s.chars().collect()),
        }
    }
}

/// One script group as written in the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptConfig {
    pub name: String,
    pub kind: ScriptKind,
    pub charset: CharsetSource,
    pub fonts: Vec<PathBuf>,
    pub condition_font: PathBuf,
    pub samples: usize,
    /// Inclusive text length range; defaults by script kind.
    #[serde(default)]
    pub length: Option<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoxCount {
    Fixed(usize),
    /// `weights[k]` is the relative probability of `k + 1` boxes.
    Weights(Vec<f64>),
}

impl Default for BoxCount {
    /// Mean of 1.7 boxes per image.
    fn default() -> Self {
        BoxCount::Weights(vec![0.45, 0.40, 0.15])
    }
}

impl BoxCount {
    pub fn mean(&self) -> f64 {
        match self {
            BoxCount::Fixed(n) => *n as f64,
            BoxCount::Weights(w) => {
                let total: f64 = w.iter().sum();
                w.iter().enumerate().map(|(k, p)| (k + 1) as f64 * p).sum::<f64>() / total
            }
        }
    }

    fn sample(&self, rng: &mut impl Rng) -> usize {
        match self {
            BoxCount::Fixed(n) => *n,
            BoxCount::Weights(w) => {
                let total: f64 = w.iter().sum();
                let mut u = rng.random_range(0.0..total);
                for (k, p) in w.iter().enumerate() {
                    if u < *p {
                        return k + 1;
                    }
                    u -= p;
                }
                w.len()
            }
        }
    }

    fn validate(&self) -> Result<(), DatagenError> {
        if let BoxCount::Weights(w) = self {
            if w.is_empty() || w.iter().any(|p| !(p.is_finite() && *p >= 0.0)) || w.iter().sum::<f64>() <= 0.0 {
                return Err(DatagenError::Config("box count weights must be non-negative with positive sum".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlantPolicy {
    /// Probability that a box is sheared.
    pub probability: f64,
    /// Shear factors are drawn uniformly from `[-max_shear, max_shear]`.
    pub max_shear: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlacementPolicy {
    pub box_count: BoxCount,
    /// Font size bounds in pixels; sizes are drawn log-uniformly.
    pub min_px: f32,
    pub max_px: f32,
    pub max_retries: usize,
    /// Minimum clearance between any two boxes.
    pub margin_px: u32,
    /// Sheared (non-axis-aligned) text; off unless configured.
    pub slant: Option<SlantPolicy>,
}

impl Default for PlacementPolicy {
    fn default() -> Self {
        Self { box_count: BoxCount::default(), min_px: 24.0, max_px: 96.0, max_retries: 50, margin_px: 16, slant: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    pub seed: u64,
    pub backgrounds: PathBuf,
    pub scripts: Vec<ScriptConfig>,
    #[serde(default)]
    pub policy: PlacementPolicy,
    #[serde(default = "default_latent_factor")]
    pub latent_factor: u32,
    /// Largest tolerated fraction of failed samples.
    #[serde(default = "default_fail_threshold")]
    pub fail_threshold: f64,
}

fn default_latent_factor() -> u32 {
    crate::geometry::DEFAULT_LATENT_FACTOR
}

fn default_fail_threshold() -> f64 {
    0.05
}

impl DatasetConfig {
    /// Reads a config file; relative paths resolve against its directory.
    pub fn load(path: &Path) -> Result<Self, DatagenError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        let mut cfg: DatasetConfig =
            serde_json::from_str(&text).map_err(|e| DatagenError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut cfg.backgrounds);
        for s in &mut cfg.scripts {
            s.fonts.iter_mut().for_each(fix);
            fix(&mut s.condition_font);
        }
        Ok(cfg)
    }
}

/// A validated script group with its fonts loaded.
#[derive(Debug)]
pub struct ScriptSpec {
    pub name: String,
    pub class: ScriptClass,
    pub character_set: Vec<char>,
    pub fonts: Vec<Arc<FontFace>>,
    pub condition_font: Arc<FontFace>,
    pub samples_goal: usize,
    pub length_range: (usize, usize),
}

/// Mean characters per box on the evaluation benchmark: 7.1 logographic,
/// 14.3 alphabetic.
pub fn default_length_range(kind: ScriptKind) -> (usize, usize) {
    match kind {
        ScriptKind::Logographic => (4, 10),
        ScriptKind::Alphabetic => (9, 20),
    }
}

impl ScriptSpec {
    pub fn from_config(cfg: &ScriptConfig) -> Result<Self, DatagenError> {
        let character_set = cfg.charset.resolve()?;
        if character_set.is_empty() {
            return Err(DatagenError::Config(format!("script {}: empty character set", cfg.name)));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = character_set.iter().find(|c| !seen.insert(**c)) {
            return Err(DatagenError::Config(format!("script {}: duplicate character {dup:?}", cfg.name)));
        }
        if cfg.fonts.is_empty() {
            return Err(DatagenError::Config(format!("script {}: no target fonts", cfg.name)));
        }
        let length_range = cfg.length.unwrap_or_else(|| default_length_range(cfg.kind));
        if length_range.0 < 1 || length_range.1 > 64 || length_range.0 > length_range.1 {
            return Err(DatagenError::Config(format!("script {}: length range must lie within [1, 64]", cfg.name)));
        }
        let condition_font = Arc::new(FontFace::load(&cfg.condition_font)?);
        if let Some(&ch) = character_set.iter().find(|&&c| !condition_font.covers(c)) {
            return Err(DatagenError::GlyphMissing { ch, font: cfg.condition_font.clone() });
        }
        let fonts = cfg.fonts.iter().map(|p| FontFace::load(p).map(Arc::new)).collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            name: cfg.name.clone(),
            class: ScriptClass::new(cfg.kind, cfg.name.clone()),
            character_set,
            fonts,
            condition_font,
            samples_goal: cfg.samples,
            length_range,
        })
    }
}

/// Uniform i.i.d. characters with a uniform length in `length_range`.
pub fn sample_text(spec: &ScriptSpec, rng: &mut impl Rng, length_range: (usize, usize)) -> String {
    let len = rng.random_range(length_range.0..=length_range.1);
    (0..len).map(|_| spec.character_set[rng.random_range(0..spec.character_set.len())]).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxRecord {
    #[serde(flatten)]
    pub rect: PixelRect,
    pub text: String,
    pub font: String,
    pub font_index: usize,
    pub size_px: f32,
    /// Horizontal shear applied to the rendering; 0 for upright text.
    pub shear: f64,
    /// Corners of the sheared text line (tl, tr, br, bl) in image pixels,
    /// usable as thin-plate spline landmark targets.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub quad: Option<[[f64; 2]; 4]>,
    /// `[x1, x2)` of this box's strip inside the condition image.
    pub condition_span: [u32; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub id: String,
    pub image: String,
    pub condition: String,
    pub width: u32,
    pub height: u32,
    pub script: String,
    pub script_kind: ScriptKind,
    pub boxes: Vec<BoxRecord>,
    pub prompt: String,
    pub seed: u64,
}

pub struct SynthesizedSample {
    pub image: RgbImage,
    pub condition: GrayImage,
    pub record: SampleRecord,
}

const PROMPT_TEMPLATES: &[&str] = &[
    "A photo showing the text {}.",
    "An image with {} written on it.",
    "A scene containing the words {}.",
    "A picture where {} appears.",
];

fn prompt_for(boxes: usize, rng: &mut impl Rng) -> String {
    let slots: Vec<String> = (1..=boxes).map(|n| format!("<sks{n}>")).collect();
    let joined = match slots.len() {
        1 => slots[0].clone(),
        n => format!("{} and {}", slots[..n - 1].join(", "), slots[n - 1]),
    };
    PROMPT_TEMPLATES[rng.random_range(0..PROMPT_TEMPLATES.len())].replace("{}", &joined)
}

fn text_color(img: &RgbImage, x: u32, y: u32, w: u32, h: u32, rng: &mut impl Rng) -> [u8; 3] {
    let mut sum = 0u64;
    for yy in y..y + h {
        for xx in x..x + w {
            let p = img.get_pixel(xx, yy).0;
            sum += (299 * p[0] as u64 + 587 * p[1] as u64 + 114 * p[2] as u64) / 1000;
        }
    }
    let mean = sum / (w as u64 * h as u64).max(1);
    let (lo, hi) = if mean > 127 { (0u8, 70u8) } else { (185u8, 255u8) };
    [rng.random_range(lo..=hi), rng.random_range(lo..=hi), rng.random_range(lo..=hi)]
}

struct Placed {
    mask: Coverage,
    x: u32,
    y: u32,
    size_px: f32,
    shear: f64,
    quad: Option<[[f64; 2]; 4]>,
}

fn place_one(
    font: &FontFace,
    text: &str,
    bg: &RgbImage,
    taken: &[PixelRect],
    policy: &PlacementPolicy,
    rng: &mut impl Rng,
) -> Result<Placed, DatagenError> {
    let (w_img, h_img) = bg.dimensions();
    let (ln_lo, ln_hi) = (policy.min_px.ln(), policy.max_px.ln());
    for _ in 0..policy.max_retries.max(1) {
        let mut px = if ln_hi > ln_lo { rng.random_range(ln_lo..ln_hi).exp() } else { policy.min_px };
        let shear = match &policy.slant {
            Some(s) if rng.random_bool(s.probability.clamp(0.0, 1.0)) => rng.random_range(-s.max_shear..=s.max_shear),
            _ => 0.0,
        };
        let mut mask = font.render_line(text, px)?;
        if mask.width > w_img || mask.height > h_img {
            let scale = (w_img as f32 / mask.width as f32).min(h_img as f32 / mask.height as f32) * 0.95;
            px *= scale;
            if px < policy.min_px {
                continue;
            }
            mask = font.render_line(text, px)?;
        }
        let mut quad_local = None;
        if shear != 0.0 {
            let (w0, h0) = (mask.width as f64, mask.height as f64);
            let (sheared, top, bottom) = mask.sheared(shear);
            let Some((cx, cy, _, _)) = sheared.ink_bounds() else { continue };
            let (cx, cy) = (cx as f64, cy as f64);
            quad_local = Some([
                [top - cx, -cy],
                [top + w0 - cx, -cy],
                [bottom + w0 - cx, h0 - cy],
                [bottom - cx, h0 - cy],
            ]);
            mask = sheared.cropped();
        }
        if mask.width == 0 || mask.width > w_img || mask.height > h_img {
            continue;
        }
        let x = rng.random_range(0..=w_img - mask.width);
        let y = rng.random_range(0..=h_img - mask.height);
        let rect = PixelRect::new(x, y, x + mask.width, y + mask.height)?;
        if taken.iter().any(|t| t.within_gap(&rect, policy.margin_px)) {
            continue;
        }
        let quad = quad_local.map(|q| q.map(|[qx, qy]| [qx + x as f64, qy + y as f64]));
        return Ok(Placed { mask, x, y, size_px: px, shear, quad });
    }
    Err(DatagenError::PlacementFailure(format!(
        "could not place {text:?} on a {w_img}x{h_img} background after {} attempts",
        policy.max_retries
    )))
}

/// Renders one sample onto a copy of `background`.
pub fn synthesize_sample(
    spec: &ScriptSpec,
    background: &RgbImage,
    rng: &mut impl Rng,
    policy: &PlacementPolicy,
    latent_factor: u32,
) -> Result<SynthesizedSample, DatagenError> {
    let n_boxes = policy.box_count.sample(rng);
    if n_boxes == 0 {
        return Err(DatagenError::PlacementFailure("policy requested zero boxes".into()));
    }
    let mut image = background.clone();
    let mut boxes: Vec<BoxRecord> = Vec::with_capacity(n_boxes);
    let mut rects: Vec<PixelRect> = Vec::with_capacity(n_boxes);
    let mut strips: Vec<GrayImage> = Vec::with_capacity(n_boxes);
    let widths = spec.condition_font.condition_widths();
    let mut strip_x = 0u32;
    for _ in 0..n_boxes {
        let text = sample_text(spec, rng, spec.length_range);
        let font_index = rng.random_range(0..spec.fonts.len());
        let font = &spec.fonts[font_index];
        let placed = place_one(font, &text, &image, &rects, policy, rng)?;
        let rect = PixelRect::new(placed.x, placed.y, placed.x + placed.mask.width, placed.y + placed.mask.height)?;
        let color = text_color(&image, rect.x1(), rect.y1(), rect.width(), rect.height(), rng);
        placed.mask.composite(&mut image, placed.x, placed.y, color);

        let layout = build_condition_layout(&text, &spec.class, &widths, latent_factor)?;
        let strip = spec.condition_font.render_condition(&layout)?;
        let span = [strip_x, strip_x + strip.width()];
        strip_x += strip.width();
        strips.push(strip);
        rects.push(rect);
        boxes.push(BoxRecord {
            rect,
            text,
            font: font.path().display().to_string(),
            font_index,
            size_px: placed.size_px,
            shear: placed.shear,
            quad: placed.quad,
            condition_span: span,
        });
    }
    let mut condition = GrayImage::from_pixel(strip_x, CONDITION_HEIGHT, image::Luma([255]));
    for (strip, b) in strips.iter().zip(&boxes) {
        image::imageops::replace(&mut condition, strip, b.condition_span[0] as i64, 0);
    }
    let prompt = prompt_for(boxes.len(), rng);
    let (width, height) = image.dimensions();
    Ok(SynthesizedSample {
        image,
        condition,
        record: SampleRecord {
            id: String::new(),
            image: String::new(),
            condition: String::new(),
            width,
            height,
            script: spec.name.clone(),
            script_kind: spec.class.kind,
            boxes,
            prompt,
            seed: 0,
        },
    })
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of sample `index` under `master`; independent of scheduling.
pub fn sample_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index))
}

pub fn list_backgrounds(dir: &Path) -> Result<Vec<PathBuf>, DatagenError> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err(dir))? {
        let path = entry.map_err(io_err(dir))?.path();
        let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
        if matches!(ext.as_deref(), Some("png" | "jpg" | "jpeg")) {
            out.push(path);
        }
    }
    out.sort();
    if out.is_empty() {
        return Err(DatagenError::NoBackgrounds(dir.to_path_buf()));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleFailure {
    pub index: u64,
    pub script: String,
    pub error: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScriptStats {
    pub requested: usize,
    pub written: usize,
    pub boxes: usize,
    pub mean_boxes_per_image: f64,
    pub unique_chars: usize,
    pub covered_chars: usize,
    pub uncovered: String,
    pub char_coverage: BTreeMap<char, usize>,
    pub font_usage: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub seed: u64,
    pub latent_factor: u32,
    pub requested: usize,
    pub written: usize,
    pub failed: usize,
    pub fail_threshold: f64,
    pub threshold_exceeded: bool,
    pub failures: Vec<SampleFailure>,
    pub scripts: BTreeMap<String, ScriptStats>,
}

fn write_png(path: &Path, save: impl FnOnce(&Path) -> image::ImageResult<()>) -> Result<(), DatagenError> {
    save(path).map_err(|source| DatagenError::Image { path: path.to_path_buf(), source })
}

/// Generates every sample of every script into `out`:
/// `images/`, `annotations.jsonl` and `manifest.json`.
///
/// Per-sample failures are collected rather than aborting the run;
/// `threshold_exceeded` reports whether they passed `fail_threshold`.
pub fn build_dataset(cfg: &DatasetConfig, out: &Path, jobs: usize) -> Result<DatasetManifest, DatagenError> {
    if cfg.scripts.is_empty() {
        return Err(DatagenError::Config("no scripts configured".into()));
    }
    if cfg.latent_factor == 0 {
        return Err(DatagenError::Config("latent_factor must be >= 1".into()));
    }
    let p = &cfg.policy;
    if !(p.min_px > 0.0 && p.min_px <= p.max_px) {
        return Err(DatagenError::Config("need 0 < min_px <= max_px".into()));
    }
    p.box_count.validate()?;
    let specs = cfg.scripts.iter().map(ScriptSpec::from_config).collect::<Result<Vec<_>, _>>()?;
    let backgrounds = list_backgrounds(&cfg.backgrounds)?;
    let images_dir = out.join("images");
    fs::create_dir_all(&images_dir).map_err(io_err(&images_dir))?;

    let tasks: Vec<(usize, u64)> = specs
        .iter()
        .enumerate()
        .flat_map(|(s, spec)| std::iter::repeat_n(s, spec.samples_goal))
        .enumerate()
        .map(|(g, s)| (s, g as u64))
        .collect();

    let run = |&(s, index): &(usize, u64)| -> Result<SampleRecord, SampleFailure> {
        let spec = &specs[s];
        let fail = |e: DatagenError| SampleFailure { index, script: spec.name.clone(), error: e.to_string() };
        let seed = sample_seed(cfg.seed, index);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bg_path = &backgrounds[rng.random_range(0..backgrounds.len())];
        let bg = image::open(bg_path)
            .map_err(|source| DatagenError::Image { path: bg_path.clone(), source })
            .map_err(fail)?
            .to_rgb8();
        let mut sample = synthesize_sample(spec, &bg, &mut rng, &cfg.policy, cfg.latent_factor).map_err(fail)?;
        let id = format!("{}_{index:07}", spec.name);
        let image_rel = format!("images/{id}.png");
        let cond_rel = format!("images/{id}_cond.png");
        write_png(&out.join(&image_rel), |p| sample.image.save(p)).map_err(fail)?;
        write_png(&out.join(&cond_rel), |p| sample.condition.save(p)).map_err(fail)?;
        let r = &mut sample.record;
        r.id = id;
        r.image = image_rel;
        r.condition = cond_rel;
        r.seed = seed;
        Ok(sample.record)
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| DatagenError::Config(format!("thread pool: {e}")))?;
    let results: Vec<Result<SampleRecord, SampleFailure>> = pool.install(|| tasks.par_iter().map(run).collect());

    let ann_path = out.join("annotations.jsonl");
    let mut ann = std::io::BufWriter::new(fs::File::create(&ann_path).map_err(io_err(&ann_path))?);
    let mut scripts: BTreeMap<String, ScriptStats> = specs
        .iter()
        .map(|s| {
            let stats = ScriptStats {
                requested: s.samples_goal,
                unique_chars: s.character_set.len(),
                char_coverage: s.character_set.iter().map(|&c| (c, 0)).collect(),
                ..Default::default()
            };
            (s.name.clone(), stats)
        })
        .collect();
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(rec) => {
                serde_json::to_writer(&mut ann, &rec).expect("record serializes");
                ann.write_all(b"\n").map_err(io_err(&ann_path))?;
                let st = scripts.get_mut(&rec.script).expect("known script");
                st.written += 1;
                st.boxes += rec.boxes.len();
                for b in &rec.boxes {
                    for ch in b.text.chars() {
                        *st.char_coverage.entry(ch).or_default() += 1;
                    }
                    *st.font_usage.entry(b.font.clone()).or_default() += 1;
                }
            }
            Err(f) => failures.push(f),
        }
    }
    ann.flush().map_err(io_err(&ann_path))?;
    for st in scripts.values_mut() {
        st.mean_boxes_per_image = if st.written > 0 { st.boxes as f64 / st.written as f64 } else { 0.0 };
        st.covered_chars = st.char_coverage.values().filter(|&&n| n > 0).count();
        st.uncovered = st.char_coverage.iter().filter(|(_, &n)| n == 0).map(|(c, _)| *c).collect();
    }
    let requested = tasks.len();
    let failed = failures.len();
    let manifest = DatasetManifest {
        seed: cfg.seed,
        latent_factor: cfg.latent_factor,
        requested,
        written: requested - failed,
        failed,
        fail_threshold: cfg.fail_threshold,
        threshold_exceeded: failed as f64 > cfg.fail_threshold * requested as f64,
        failures,
        scripts,
    };
    let man_path = out.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&man_path, text + "\n").map_err(io_err(&man_path))?;
    Ok(manifest)
}

/// Reads `annotations.jsonl`.
pub fn read_annotations(path: &Path) -> Result<Vec<SampleRecord>, DatagenError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| DatagenError::Config(format!("{} line {}: {e}", path.display(), i + 1)))
        })
        .collect()
}
