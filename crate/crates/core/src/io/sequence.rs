//! Directories of numbered frames (`frame_000001.pgm`, ...) and masks
//! (`mask_000001.pgm`, ...). Frame indices start at 1.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::frame::{Frame, LabelMask};
use crate::io::pnm::{read_frame, read_mask, write_frame, write_mask};
use crate::mog::ColorMode;

pub fn frame_file_name(t: usize, mode: ColorMode) -> String {
    match mode {
        ColorMode::Intensity => format!("frame_{t:06}.pgm"),
        ColorMode::Rgb => format!("frame_{t:06}.ppm"),
    }
}

pub fn mask_file_name(t: usize) -> String {
    format!("mask_{t:06}.pgm")
}

fn parse_frame_index(name: &str) -> Option<usize> {
    let stem = name.strip_prefix("frame_")?;
    let digits = stem.strip_suffix(".pgm").or_else(|| stem.strip_suffix(".ppm"))?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

/// Reads a frame directory in index order. Every frame must share the
/// first frame's dimensions and color mode.
#[derive(Debug)]
pub struct SequenceReader {
    dir: PathBuf,
    entries: Vec<(usize, PathBuf)>,
    pos: usize,
    shape: Option<(usize, usize, ColorMode)>,
}

impl SequenceReader {
    pub fn open(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref().to_path_buf();
        let listing = fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))?;
        let mut entries = Vec::new();
        for entry in listing {
            let entry = entry.map_err(|e| Error::io(&dir, e))?;
            let name = entry.file_name();
            if let Some(t) = name.to_str().and_then(parse_frame_index) {
                entries.push((t, entry.path()));
            }
        }
        entries.sort();
        if let Some(w) = entries.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::usage(format!(
                "{}: frame index {} appears twice",
                dir.display(),
                w[0].0
            )));
        }
        if entries.is_empty() {
            return Err(Error::usage(format!("{}: no frame_NNNNNN.pgm/.ppm files", dir.display())));
        }
        Ok(SequenceReader {
            dir,
            entries,
            pos: 0,
            shape: None,
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|(t, _)| *t)
    }

    fn read_next(&mut self) -> Option<Result<(usize, Frame)>> {
        let (t, path) = self.entries.get(self.pos)?.clone();
        self.pos += 1;
        let result = read_frame(&path).and_then(|f| {
            let shape = (f.width(), f.height(), f.mode());
            match self.shape {
                None => self.shape = Some(shape),
                Some((w, h, m)) => f.check_shape(w, h, m).map_err(|_| Error::Parse {
                    path: path.clone(),
                    offset: 0,
                    message: format!("frame is {}x{} {:?}, sequence is {w}x{h} {m:?}", shape.0, shape.1, shape.2),
                })?,
            }
            Ok((t, f))
        });
        Some(result.map_err(|e| e.at_frame(t)))
    }
}

impl Iterator for SequenceReader {
    type Item = Result<(usize, Frame)>;

    fn next(&mut self) -> Option<Self::Item> {
        self.read_next()
    }
}

/// Reads the ground-truth mask for frame `t` from `dir`.
pub fn read_truth(dir: impl AsRef<Path>, t: usize) -> Result<LabelMask> {
    read_mask(dir.as_ref().join(mask_file_name(t))).map_err(|e| e.at_frame(t))
}

/// Writes numbered frames and masks into a directory, creating it on demand.
#[derive(Clone, Debug)]
pub struct SequenceWriter {
    dir: PathBuf,
}

impl SequenceWriter {
    pub fn create(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref().to_path_buf();
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(SequenceWriter { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write_frame(&self, t: usize, frame: &Frame) -> Result<PathBuf> {
        let path = self.dir.join(frame_file_name(t, frame.mode()));
        write_frame(frame, &path)?;
        Ok(path)
    }

    pub fn write_mask(&self, t: usize, mask: &LabelMask) -> Result<PathBuf> {
        let path = self.dir.join(mask_file_name(t));
        write_mask(mask, &path)?;
        Ok(path)
    }
}
