//! Binary netpbm images: P5 (grayscale) and P6 (RGB), maxval 255 only.
//! Label masks are stored as P5 with one fixed byte code per label.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::frame::{Frame, LabelMask};
use crate::mog::ColorMode;
use crate::segment::SemanticLabel;

pub const ROAD_CODE: u8 = 0;
pub const SHADOW_CODE: u8 = 128;
pub const VEHICLE_CODE: u8 = 255;

pub fn label_code(label: SemanticLabel) -> u8 {
    match label {
        SemanticLabel::Road => ROAD_CODE,
        SemanticLabel::Shadow => SHADOW_CODE,
        SemanticLabel::Vehicle => VEHICLE_CODE,
    }
}

pub fn label_from_code(code: u8) -> Option<SemanticLabel> {
    match code {
        ROAD_CODE => Some(SemanticLabel::Road),
        SHADOW_CODE => Some(SemanticLabel::Shadow),
        VEHICLE_CODE => Some(SemanticLabel::Vehicle),
        _ => None,
    }
}

struct Header {
    mode: ColorMode,
    width: usize,
    height: usize,
    data_offset: usize,
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> Cursor<'a> {
    fn err(&self, offset: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.to_path_buf(),
            offset,
            message: message.into(),
        }
    }

    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b' ' | b'\t' | b'\n' | b'\r' | 0x0b | 0x0c => self.pos += 1,
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                _ => break,
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err(start, format!("expected {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .expect("ascii digits")
            .parse()
            .map_err(|_| self.err(start, format!("{what} out of range")))
    }
}

fn parse_header(bytes: &[u8], path: &Path) -> Result<Header> {
    let mut c = Cursor { bytes, pos: 0, path };
    let mode = match bytes.get(0..2) {
        Some(b"P5") => ColorMode::Intensity,
        Some(b"P6") => ColorMode::Rgb,
        _ => return Err(c.err(0, "expected magic number P5 or P6")),
    };
    c.pos = 2;
    let width = c.number("width")?;
    let height = c.number("height")?;
    let maxval_at = c.pos;
    let maxval = c.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(c.err(maxval_at, format!("image dimensions {width}x{height} must be positive")));
    }
    if maxval != 255 {
        return Err(c.err(maxval_at, format!("unsupported maxval {maxval}, only 255 is accepted")));
    }
    match bytes.get(c.pos) {
        Some(b) if b.is_ascii_whitespace() => c.pos += 1,
        _ => return Err(c.err(c.pos, "expected a single whitespace byte before the raster")),
    }
    Ok(Header {
        mode,
        width,
        height,
        data_offset: c.pos,
    })
}

fn raster<'a>(bytes: &'a [u8], h: &Header, path: &Path) -> Result<&'a [u8]> {
    let need = h
        .width
        .checked_mul(h.height)
        .and_then(|n| n.checked_mul(h.mode.dim()))
        .ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            offset: 0,
            message: "image dimensions overflow".into(),
        })?;
    let have = bytes.len() - h.data_offset;
    if have < need {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            offset: bytes.len(),
            message: format!("truncated raster: expected {need} bytes, found {have}"),
        });
    }
    Ok(&bytes[h.data_offset..h.data_offset + need])
}

/// Decodes an in-memory P5/P6 image; `path` is only used in error messages.
pub fn decode_frame(bytes: &[u8], path: &Path) -> Result<Frame> {
    let h = parse_header(bytes, path)?;
    let data = raster(bytes, &h, path)?;
    Frame::from_bytes(h.width, h.height, h.mode, data)
}

pub fn encode_frame(frame: &Frame) -> Vec<u8> {
    let magic = match frame.mode() {
        ColorMode::Intensity => "P5",
        ColorMode::Rgb => "P6",
    };
    let mut out = format!("{magic}\n{} {}\n255\n", frame.width(), frame.height()).into_bytes();
    out.extend(frame.to_bytes());
    out
}

pub fn read_frame(path: impl AsRef<Path>) -> Result<Frame> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_frame(&bytes, path)
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(bytes).map_err(|e| Error::io(path, e))
}

pub fn write_frame(frame: &Frame, path: impl AsRef<Path>) -> Result<()> {
    write_bytes(path.as_ref(), &encode_frame(frame))
}

pub fn encode_mask(mask: &LabelMask) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", mask.width(), mask.height()).into_bytes();
    out.extend(mask.labels().iter().map(|l| label_code(*l)));
    out
}

pub fn decode_mask(bytes: &[u8], path: &Path) -> Result<LabelMask> {
    let h = parse_header(bytes, path)?;
    if h.mode != ColorMode::Intensity {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            offset: 0,
            message: "label masks must be P5".into(),
        });
    }
    let data = raster(bytes, &h, path)?;
    let labels = data
        .iter()
        .enumerate()
        .map(|(k, &b)| {
            label_from_code(b).ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                offset: h.data_offset + k,
                message: format!("byte {b} is not a label code"),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    LabelMask::new(h.width, h.height, labels)
}

pub fn write_mask(mask: &LabelMask, path: impl AsRef<Path>) -> Result<()> {
    write_bytes(path.as_ref(), &encode_mask(mask))
}

pub fn read_mask(path: impl AsRef<Path>) -> Result<LabelMask> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_mask(&bytes, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use SemanticLabel::*;

    fn p() -> &'static Path {
        Path::new("mem")
    }

    #[test]
    fn minimal_p5() {
        let f = decode_frame(b"P5\n1 1\n255\n\0", p()).unwrap();
        assert_eq!((f.width(), f.height(), f.mode()), (1, 1, ColorMode::Intensity));
        assert_eq!(f.pixels()[0].as_slice(), &[0.0]);
    }

    #[test]
    fn p6_with_comments() {
        let mut bytes = b"P6 # made by hand\n2 # width\n2\n255\n".to_vec();
        bytes.extend([1, 2, 3, 4, 5, 6, 7, 8, 9, 250, 251, 252]);
        let f = decode_frame(&bytes, p()).unwrap();
        assert_eq!(f.pixel(0, 0).as_slice(), &[1.0, 2.0, 3.0]);
        assert_eq!(f.pixel(1, 0).as_slice(), &[4.0, 5.0, 6.0]);
        assert_eq!(f.pixel(0, 1).as_slice(), &[7.0, 8.0, 9.0]);
        assert_eq!(f.pixel(1, 1).as_slice(), &[250.0, 251.0, 252.0]);
    }

    fn offset_of(e: Error) -> usize {
        match e {
            Error::Parse { offset, .. } => offset,
            other => panic!("expected a parse error, got {other}"),
        }
    }

    #[test]
    fn malformed_inputs_report_offsets() {
        assert_eq!(offset_of(decode_frame(b"P2\n1 1\n255\n0", p()).unwrap_err()), 0);
        assert_eq!(offset_of(decode_frame(b"P5\n1 x\n255\n0", p()).unwrap_err()), 5);
        assert_eq!(offset_of(decode_frame(b"P5\n1 1\n65535\n\0\0", p()).unwrap_err()), 6);
        assert_eq!(offset_of(decode_frame(b"P5\n2 2\n255\n\0\0", p()).unwrap_err()), 13);
        assert_eq!(offset_of(decode_frame(b"P5\n0 2\n255\n", p()).unwrap_err()), 6);
        assert_eq!(offset_of(decode_frame(b"", p()).unwrap_err()), 0);
    }

    #[test]
    fn mask_codes() {
        let mask = LabelMask::new(2, 2, vec![Road, Shadow, Vehicle, Road]).unwrap();
        let bytes = encode_mask(&mask);
        assert_eq!(&bytes[bytes.len() - 4..], &[0, 128, 255, 0]);
        assert_eq!(decode_mask(&bytes, p()).unwrap(), mask);

        let road = LabelMask::filled(3, 2, Road).unwrap();
        let bytes = encode_mask(&road);
        assert!(bytes[bytes.len() - 6..].iter().all(|b| *b == 0));

        let bad = b"P5\n1 1\n255\n\x07";
        assert_eq!(offset_of(decode_mask(bad, p()).unwrap_err()), 11);
    }

    #[test]
    fn files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let f = Frame::from_bytes(3, 1, ColorMode::Rgb, &[0, 1, 2, 3, 4, 5, 253, 254, 255]).unwrap();
        let path = dir.path().join("a.ppm");
        write_frame(&f, &path).unwrap();
        assert_eq!(read_frame(&path).unwrap(), f);
        assert!(matches!(read_frame(dir.path().join("missing.pgm")), Err(Error::Io { .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn frame_round_trip(w in 1usize..9, h in 1usize..9, rgb in any::<bool>(), pool in prop::collection::vec(any::<u8>(), 192)) {
            let mode = if rgb { ColorMode::Rgb } else { ColorMode::Intensity };
            let bytes = &pool[..w * h * mode.dim()];
            let f = Frame::from_bytes(w, h, mode, bytes).unwrap();
            let back = decode_frame(&encode_frame(&f), p()).unwrap();
            prop_assert_eq!(back, f);
        }

        #[test]
        fn mask_round_trip(w in 1usize..9, h in 1usize..9, codes in prop::collection::vec(0usize..3, 64)) {
            let labels: Vec<_> = (0..w * h).map(|k| SemanticLabel::ALL[codes[k % codes.len()]]).collect();
            let mask = LabelMask::new(w, h, labels).unwrap();
            prop_assert_eq!(decode_mask(&encode_mask(&mask), p()).unwrap(), mask);
        }
    }
}
