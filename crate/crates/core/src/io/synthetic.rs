//! Seeded synthetic traffic sequences with exact ground-truth masks.
//!
//! Each frame is composited in three layers. Every pixel starts as road
//! (base value plus noise). Pixels under an attached shadow rectangle become
//! shadow (base times the darkening factor plus noise). Pixels under an
//! object become vehicle (an independent draw from the object's value
//! distribution). Objects occlude shadows, and later objects in the list
//! occlude earlier ones. Values are rounded to 8-bit levels, so a sequence
//! written to disk reads back exactly.
//!
//! Scene files are flat `key = value` text:
//!
//! ```text
//! width = 64
//! height = 48
//! mode = gray            # or rgb
//! frames = 200
//! seed = 7
//! background = 105 135   # left and right base value; equal for constant
//! tint = 1 1 1           # per-channel factor on the base, rgb only
//! texture = 6            # static per-pixel offset, uniform in +-texture
//! road_noise = 3
//! shadow_noise = 3
//! wrap = true            # objects re-enter on the opposite edge
//! # object = x y w h vx vy value std [shadow dx dy w h darkening]
//! object = 0 4 10 6 2 0 190 35 shadow 2 6 10 4 0.5
//! ```
//!
//! An object value is one number (replicated per channel) or `r,g,b`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::frame::{Frame, LabelMask};
use crate::io::sequence::SequenceWriter;
use crate::linalg::Vector;
use crate::mog::{ClassSlot, ColorMode, MixtureModel, PixelValue};
use crate::segment::SemanticLabel;

#[derive(Clone, Debug, PartialEq)]
pub struct ShadowSpec {
    /// Offset of the shadow's top-left corner from the object's.
    pub dx: i64,
    pub dy: i64,
    pub width: usize,
    pub height: usize,
    /// Multiplier on the background, strictly inside (0, 1).
    pub darkening: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SceneObject {
    /// Top-left corner at frame 1.
    pub x: f64,
    pub y: f64,
    pub width: usize,
    pub height: usize,
    /// Pixels per frame.
    pub vx: f64,
    pub vy: f64,
    /// Mean object value, one entry per channel.
    pub value: Vec<f64>,
    pub std: f64,
    pub shadow: Option<ShadowSpec>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticSceneSpec {
    pub width: usize,
    pub height: usize,
    pub mode: ColorMode,
    pub frames: usize,
    pub seed: u64,
    /// Base value at the left and right edge, interpolated per column.
    pub background: (f64, f64),
    pub tint: Vec<f64>,
    pub texture: f64,
    pub road_noise: f64,
    pub shadow_noise: f64,
    pub wrap: bool,
    pub objects: Vec<SceneObject>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticSequence {
    pub frames: Vec<Frame>,
    pub truth: Vec<LabelMask>,
}

impl SyntheticSequence {
    /// Writes frames and ground-truth masks as `frame_*` and `mask_*` files.
    pub fn write_to(&self, dir: impl AsRef<Path>) -> Result<()> {
        let w = SequenceWriter::create(dir)?;
        for (k, (f, m)) in self.frames.iter().zip(&self.truth).enumerate() {
            w.write_frame(k + 1, f)?;
            w.write_mask(k + 1, m)?;
        }
        Ok(())
    }
}

impl SyntheticSceneSpec {
    /// An empty gray scene with constant background and no objects.
    pub fn empty(width: usize, height: usize, frames: usize, seed: u64) -> Self {
        SyntheticSceneSpec {
            width,
            height,
            mode: ColorMode::Intensity,
            frames,
            seed,
            background: (120.0, 120.0),
            tint: vec![1.0],
            texture: 0.0,
            road_noise: 0.0,
            shadow_noise: 0.0,
            wrap: false,
            objects: Vec::new(),
        }
    }

    /// Three lanes of traffic with cast shadows over a textured gradient.
    pub fn default_scene() -> Self {
        let car = |x: f64, y: f64, vx: f64| SceneObject {
            x,
            y,
            width: 10,
            height: 6,
            vx,
            vy: 0.0,
            value: vec![190.0],
            std: 35.0,
            shadow: Some(ShadowSpec {
                dx: 2,
                dy: 6,
                width: 10,
                height: 4,
                darkening: 0.5,
            }),
        };
        SyntheticSceneSpec {
            width: 64,
            height: 48,
            mode: ColorMode::Intensity,
            frames: 200,
            seed: 7,
            background: (105.0, 135.0),
            tint: vec![1.0],
            texture: 6.0,
            road_noise: 3.0,
            shadow_noise: 3.0,
            wrap: true,
            objects: vec![car(0.0, 4.0, 2.0), car(30.0, 20.0, -1.5), car(15.0, 36.0, 1.25)],
        }
    }

    /// Two slow vehicles circling a short road so every pixel is covered
    /// for 30% of frames (period 80 frames, dwell 24).
    pub fn slow_convoy_scene() -> Self {
        let truck = |x: f64| SceneObject {
            x,
            y: 0.0,
            width: 6,
            height: 8,
            vx: 0.25,
            vy: 0.0,
            value: vec![200.0],
            std: 10.0,
            shadow: None,
        };
        SyntheticSceneSpec {
            width: 40,
            height: 8,
            mode: ColorMode::Intensity,
            frames: 800,
            seed: 11,
            background: (110.0, 110.0),
            tint: vec![1.0],
            texture: 0.0,
            road_noise: 3.0,
            shadow_noise: 3.0,
            wrap: true,
            objects: vec![truck(0.0), truck(20.0)],
        }
    }

    /// One vehicle crawling in from the left, parking over each column for
    /// 160 frames.
    pub fn stalled_vehicle_scene() -> Self {
        SyntheticSceneSpec {
            width: 32,
            height: 8,
            mode: ColorMode::Intensity,
            frames: 400,
            seed: 5,
            background: (110.0, 110.0),
            tint: vec![1.0],
            texture: 0.0,
            road_noise: 3.0,
            shadow_noise: 3.0,
            wrap: false,
            objects: vec![SceneObject {
                x: -10.0,
                y: 0.0,
                width: 8,
                height: 8,
                vx: 0.05,
                vy: 0.0,
                value: vec![200.0],
                std: 10.0,
                shadow: None,
            }],
        }
    }

    /// The same scene in RGB, with the base tinted and gray values replicated.
    pub fn to_rgb(&self, tint: [f64; 3]) -> Self {
        let mut s = self.clone();
        s.mode = ColorMode::Rgb;
        s.tint = tint.to_vec();
        for o in &mut s.objects {
            if o.value.len() == 1 {
                o.value = vec![o.value[0]; 3];
            }
        }
        s
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.mode.dim();
        let bad = |m: String| Err(Error::Usage(format!("scene: {m}")));
        if self.width == 0 || self.height == 0 {
            return bad(format!("dimensions {}x{} must be positive", self.width, self.height));
        }
        if self.frames == 0 {
            return bad("frames must be positive".into());
        }
        let (l, r) = self.background;
        if !(0.0..=255.0).contains(&l) || !(0.0..=255.0).contains(&r) {
            return bad(format!("background ({l}, {r}) outside [0, 255]"));
        }
        if self.tint.len() != d || self.tint.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return bad(format!("tint needs {d} positive factors"));
        }
        for (name, v) in [
            ("texture", self.texture),
            ("road_noise", self.road_noise),
            ("shadow_noise", self.shadow_noise),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} must be finite and non-negative"));
            }
        }
        for (k, o) in self.objects.iter().enumerate() {
            if o.width == 0 || o.height == 0 {
                return bad(format!("object {k} has an empty rectangle"));
            }
            if ![o.x, o.y, o.vx, o.vy].iter().all(|v| v.is_finite()) {
                return bad(format!("object {k} position and velocity must be finite"));
            }
            if o.value.len() != d || o.value.iter().any(|v| !(0.0..=255.0).contains(v)) {
                return bad(format!("object {k} needs {d} values in [0, 255]"));
            }
            if !(o.std.is_finite() && o.std >= 0.0) {
                return bad(format!("object {k} std must be non-negative"));
            }
            if let Some(s) = &o.shadow {
                if s.width == 0 || s.height == 0 {
                    return bad(format!("object {k} has an empty shadow rectangle"));
                }
                if !(s.darkening > 0.0 && s.darkening < 1.0) {
                    return bad(format!("object {k} shadow darkening {} outside (0, 1)", s.darkening));
                }
            }
        }
        Ok(())
    }

    /// Noise-free base value of every pixel, row-major. Texture is drawn from
    /// `rng` in raster order.
    fn base_image(&self, rng: &mut ChaCha8Rng) -> Vec<Vector> {
        let (l, r) = self.background;
        let span = (self.width.max(2) - 1) as f64;
        let mut out = Vec::with_capacity(self.width * self.height);
        for _ in 0..self.height {
            for x in 0..self.width {
                let g = l + (r - l) * x as f64 / span;
                let t = if self.texture > 0.0 {
                    rng.random_range(-self.texture..=self.texture)
                } else {
                    0.0
                };
                let v: Vec<f64> = self.tint.iter().map(|k| ((g + t) * k).clamp(0.0, 255.0)).collect();
                out.push(Vector::new(self.mode, &v).expect("tint matches mode"));
            }
        }
        out
    }

    /// Pixel columns (or rows) covered by a span starting at `start`.
    fn covered(&self, start: i64, len: usize, extent: usize) -> Vec<usize> {
        (0..len as i64)
            .map(|k| start + k)
            .filter_map(|p| {
                if self.wrap {
                    Some(p.rem_euclid(extent as i64) as usize)
                } else if (0..extent as i64).contains(&p) {
                    Some(p as usize)
                } else {
                    None
                }
            })
            .collect()
    }

    /// Per-pixel label, shadow darkening factor and covering object of
    /// frame index `k` (0-based).
    fn layers(&self, k: usize) -> (Vec<SemanticLabel>, Vec<f64>, Vec<Option<usize>>) {
        let (w, h) = (self.width, self.height);
        let mut labels = vec![SemanticLabel::Road; w * h];
        let mut dark = vec![1.0; w * h];
        let mut owner = vec![None; w * h];
        let corner = |o: &SceneObject| {
            (
                (o.x + o.vx * k as f64).floor() as i64,
                (o.y + o.vy * k as f64).floor() as i64,
            )
        };
        for o in &self.objects {
            if let Some(s) = &o.shadow {
                let (ox, oy) = corner(o);
                for y in self.covered(oy + s.dy, s.height, h) {
                    for x in self.covered(ox + s.dx, s.width, w) {
                        labels[y * w + x] = SemanticLabel::Shadow;
                        dark[y * w + x] = s.darkening;
                    }
                }
            }
        }
        for (j, o) in self.objects.iter().enumerate() {
            let (ox, oy) = corner(o);
            for y in self.covered(oy, o.height, h) {
                for x in self.covered(ox, o.width, w) {
                    labels[y * w + x] = SemanticLabel::Vehicle;
                    owner[y * w + x] = Some(j);
                }
            }
        }
        (labels, dark, owner)
    }

    /// Ground-truth mask of frame index `k` (0-based).
    pub fn truth_mask(&self, k: usize) -> LabelMask {
        LabelMask::new(self.width, self.height, self.layers(k).0).expect("dimensions validated")
    }
}

/// Renders every frame and its ground truth. Deterministic given the spec.
pub fn generate_synthetic(spec: &SyntheticSceneSpec) -> Result<SyntheticSequence> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let base = spec.base_image(&mut rng);
    let d = spec.mode.dim();
    let mut frames = Vec::with_capacity(spec.frames);
    let mut truth = Vec::with_capacity(spec.frames);
    let mut z = vec![0.0; d];
    for k in 0..spec.frames {
        let (labels, dark, owner) = spec.layers(k);
        let mut pixels = Vec::with_capacity(base.len());
        for (p, b) in base.iter().enumerate() {
            for zi in z.iter_mut() {
                *zi = rng.sample(StandardNormal);
            }
            let v: Vec<f64> = (0..d)
                .map(|c| match labels[p] {
                    SemanticLabel::Road => b.get(c) + spec.road_noise * z[c],
                    SemanticLabel::Shadow => b.get(c) * dark[p] + spec.shadow_noise * z[c],
                    SemanticLabel::Vehicle => {
                        let o = &spec.objects[owner[p].expect("vehicle pixel has an owner")];
                        o.value[c] + o.std * z[c]
                    }
                })
                .map(|x| x.round().clamp(0.0, 255.0))
                .collect();
            pixels.push(PixelValue::new(spec.mode, &v)?);
        }
        frames.push(Frame::new(spec.width, spec.height, spec.mode, pixels)?);
        truth.push(LabelMask::new(spec.width, spec.height, labels)?);
    }
    Ok(SyntheticSequence { frames, truth })
}

/// `n` iid draws from `m`, clamped into the sensor range.
pub fn sample_mixture(m: &MixtureModel, n: usize, seed: u64) -> Result<Vec<PixelValue>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let factors = ClassSlot::ALL
        .iter()
        .map(|s| {
            m.component(*s)
                .covariance()
                .cholesky()
                .ok_or_else(|| Error::Invariant("covariance is not positive definite".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    let w = m.weights();
    let mode = m.mode();
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let u: f64 = rng.random();
        let slot = if u < w[0] {
            0
        } else if u < w[0] + w[1] {
            1
        } else {
            2
        };
        let z = Vector::zeros(mode).map(|_| rng.sample(StandardNormal));
        let x = *m.components()[slot].mean() + factors[slot].lower_times(&z);
        out.push(PixelValue::clamped(x));
    }
    Ok(out)
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    tok.parse()
        .map_err(|_| Error::Usage(format!("scene line {line}: '{tok}' is not a number")))
}

fn parse_usize(tok: &str, line: usize) -> Result<usize> {
    tok.parse()
        .map_err(|_| Error::Usage(format!("scene line {line}: '{tok}' is not a non-negative integer")))
}

fn parse_object(toks: &[&str], line: usize) -> Result<SceneObject> {
    if toks.len() != 8 && !(toks.len() == 14 && toks[8] == "shadow") {
        return Err(Error::Usage(format!(
            "scene line {line}: object needs 'x y w h vx vy value std [shadow dx dy w h darkening]'"
        )));
    }
    let value = toks[6]
        .split(',')
        .map(|t| parse_f64(t, line))
        .collect::<Result<Vec<_>>>()?;
    let shadow = if toks.len() == 14 {
        let int = |t: &str| {
            t.parse::<i64>()
                .map_err(|_| Error::Usage(format!("scene line {line}: '{t}' is not an integer")))
        };
        Some(ShadowSpec {
            dx: int(toks[9])?,
            dy: int(toks[10])?,
            width: parse_usize(toks[11], line)?,
            height: parse_usize(toks[12], line)?,
            darkening: parse_f64(toks[13], line)?,
        })
    } else {
        None
    };
    Ok(SceneObject {
        x: parse_f64(toks[0], line)?,
        y: parse_f64(toks[1], line)?,
        width: parse_usize(toks[2], line)?,
        height: parse_usize(toks[3], line)?,
        vx: parse_f64(toks[4], line)?,
        vy: parse_f64(toks[5], line)?,
        value,
        std: parse_f64(toks[7], line)?,
        shadow,
    })
}

/// Parses the flat scene format. Unset keys keep the values of
/// [`SyntheticSceneSpec::empty`]; single-valued object values and tints are
/// replicated to three channels in rgb mode.
pub fn parse_scene_spec(text: &str) -> Result<SyntheticSceneSpec> {
    let mut spec = SyntheticSceneSpec::empty(1, 1, 1, 0);
    let mut have_size = (false, false);
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| Error::Usage(format!("scene line {line}: expected 'key = value'")))?;
        let key = key.trim();
        let toks: Vec<&str> = value.split_whitespace().collect();
        let one = || -> Result<&str> {
            match toks.as_slice() {
                [t] => Ok(t),
                _ => Err(Error::Usage(format!("scene line {line}: '{key}' takes one value"))),
            }
        };
        match key {
            "width" => {
                spec.width = parse_usize(one()?, line)?;
                have_size.0 = true;
            }
            "height" => {
                spec.height = parse_usize(one()?, line)?;
                have_size.1 = true;
            }
            "frames" => spec.frames = parse_usize(one()?, line)?,
            "seed" => {
                spec.seed = one()?
                    .parse()
                    .map_err(|_| Error::Usage(format!("scene line {line}: bad seed")))?
            }
            "mode" => {
                spec.mode = match one()? {
                    "gray" | "intensity" => ColorMode::Intensity,
                    "rgb" => ColorMode::Rgb,
                    other => return Err(Error::Usage(format!("scene line {line}: unknown mode '{other}'"))),
                }
            }
            "background" => {
                let v = toks.iter().map(|t| parse_f64(t, line)).collect::<Result<Vec<_>>>()?;
                spec.background = match v.as_slice() {
                    [c] => (*c, *c),
                    [l, r] => (*l, *r),
                    _ => return Err(Error::Usage(format!("scene line {line}: background takes 1 or 2 values"))),
                };
            }
            "tint" => spec.tint = toks.iter().map(|t| parse_f64(t, line)).collect::<Result<Vec<_>>>()?,
            "texture" => spec.texture = parse_f64(one()?, line)?,
            "road_noise" => spec.road_noise = parse_f64(one()?, line)?,
            "shadow_noise" => spec.shadow_noise = parse_f64(one()?, line)?,
            "wrap" => {
                spec.wrap = one()?
                    .parse()
                    .map_err(|_| Error::Usage(format!("scene line {line}: wrap is true or false")))?
            }
            "object" => spec.objects.push(parse_object(&toks, line)?),
            other => return Err(Error::Usage(format!("scene line {line}: unknown key '{other}'"))),
        }
    }
    if !(have_size.0 && have_size.1) {
        return Err(Error::usage("scene: width and height are required"));
    }
    let d = spec.mode.dim();
    if spec.tint.len() == 1 {
        spec.tint = vec![spec.tint[0]; d];
    }
    for o in &mut spec.objects {
        if o.value.len() == 1 {
            o.value = vec![o.value[0]; d];
        }
    }
    spec.validate()?;
    Ok(spec)
}

pub fn load_scene_spec(path: impl AsRef<Path>) -> Result<SyntheticSceneSpec> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_scene_spec(&text)
}

/// Serializes to the flat format; `parse_scene_spec` inverts it.
pub fn format_scene_spec(spec: &SyntheticSceneSpec) -> String {
    let join = |v: &[f64], sep: &str| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(sep);
    let mut s = String::new();
    let mode = match spec.mode {
        ColorMode::Intensity => "gray",
        ColorMode::Rgb => "rgb",
    };
    writeln!(s, "width = {}", spec.width).unwrap();
    writeln!(s, "height = {}", spec.height).unwrap();
    writeln!(s, "mode = {mode}").unwrap();
    writeln!(s, "frames = {}", spec.frames).unwrap();
    writeln!(s, "seed = {}", spec.seed).unwrap();
    writeln!(s, "background = {} {}", spec.background.0, spec.background.1).unwrap();
    writeln!(s, "tint = {}", join(&spec.tint, " ")).unwrap();
    writeln!(s, "texture = {}", spec.texture).unwrap();
    writeln!(s, "road_noise = {}", spec.road_noise).unwrap();
    writeln!(s, "shadow_noise = {}", spec.shadow_noise).unwrap();
    writeln!(s, "wrap = {}", spec.wrap).unwrap();
    for o in &spec.objects {
        write!(
            s,
            "object = {} {} {} {} {} {} {} {}",
            o.x,
            o.y,
            o.width,
            o.height,
            o.vx,
            o.vy,
            join(&o.value, ","),
            o.std
        )
        .unwrap();
        if let Some(sh) = &o.shadow {
            write!(s, " shadow {} {} {} {} {}", sh.dx, sh.dy, sh.width, sh.height, sh.darkening).unwrap();
        }
        s.push('\n');
    }
    s
}
