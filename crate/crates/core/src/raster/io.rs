//! Binary PPM (P6) / PGM (P5) codecs plus 8-bit PNG through the `png` crate.

use std::fs;
use std::io::Cursor;
use std::path::Path;

use super::{BinaryMask, GrayImage, RgbFrame};
use crate::error::{Error, Result};

const PNG_SIGNATURE: &[u8] = b"\x89PNG\r\n\x1a\n";

/// A decoded file, before any channel conversion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decoded {
    Gray(GrayImage),
    Rgb(RgbFrame),
}

impl Decoded {
    pub fn into_rgb(self) -> RgbFrame {
        match self {
            Decoded::Gray(g) => RgbFrame::from_gray(&g),
            Decoded::Rgb(f) => f,
        }
    }
}

/// Loads a P6/P5/PNG file as RGB. Gray sources are replicated into all three
/// channels.
pub fn load_image(path: impl AsRef<Path>) -> Result<RgbFrame> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(decode_image(&bytes, path)?.into_rgb())
}

/// Loads a single-channel P5 or gray PNG.
pub fn load_gray(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    match decode_image(&bytes, path)? {
        Decoded::Gray(g) => Ok(g),
        Decoded::Rgb(_) => Err(Error::BadHeader {
            path: path.into(),
            offset: 0,
            detail: "expected a single-channel image".into(),
        }),
    }
}

/// Loads a 0/255 mask dump; values above 127 are foreground.
pub fn load_mask(path: impl AsRef<Path>) -> Result<BinaryMask> {
    load_gray(path).map(|g| BinaryMask::from_gray(&g))
}

pub fn save_gray(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_pgm(img)).map_err(|e| Error::io(path, e))
}

pub fn save_mask(mask: &BinaryMask, path: impl AsRef<Path>) -> Result<()> {
    save_gray(&mask.to_gray(), path)
}

pub fn save_rgb(frame: &RgbFrame, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_ppm(frame)).map_err(|e| Error::io(path, e))
}

pub fn save_png_rgb(frame: &RgbFrame, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    let png_err = |e: png::EncodingError| Error::Png {
        path: path.into(),
        detail: e.to_string(),
    };
    {
        let mut enc = png::Encoder::new(&mut buf, frame.width() as u32, frame.height() as u32);
        enc.set_color(png::ColorType::Rgb);
        enc.set_depth(png::BitDepth::Eight);
        let mut writer = enc.write_header().map_err(png_err)?;
        writer.write_image_data(frame.as_raw()).map_err(png_err)?;
    }
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.as_raw());
    out
}

pub fn encode_ppm(frame: &RgbFrame) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", frame.width(), frame.height()).into_bytes();
    out.extend_from_slice(frame.as_raw());
    out
}

/// Decodes by magic bytes; `path` is only used for error reporting.
pub fn decode_image(bytes: &[u8], path: &Path) -> Result<Decoded> {
    if bytes.starts_with(PNG_SIGNATURE) {
        return decode_png(bytes, path);
    }
    if bytes.len() < 2 {
        return Err(Error::Truncated {
            path: path.into(),
            offset: bytes.len(),
        });
    }
    match &bytes[..2] {
        b"P5" => decode_pnm(bytes, path, 1),
        b"P6" => decode_pnm(bytes, path, 3),
        _ => Err(Error::BadHeader {
            path: path.into(),
            offset: 0,
            detail: "unrecognised magic (want P5, P6 or PNG)".into(),
        }),
    }
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl HeaderCursor<'_> {
    fn truncated(&self) -> Error {
        Error::Truncated {
            path: self.path.into(),
            offset: self.pos,
        }
    }

    fn skip_whitespace_and_comments(&mut self) -> Result<()> {
        loop {
            match self.bytes.get(self.pos) {
                None => return Err(self.truncated()),
                Some(b) if b.is_ascii_whitespace() => self.pos += 1,
                Some(b'#') => {
                    while let Some(&b) = self.bytes.get(self.pos) {
                        self.pos += 1;
                        if b == b'\n' {
                            break;
                        }
                    }
                }
                Some(_) => return Ok(()),
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_whitespace_and_comments()?;
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if self.pos == self.bytes.len() {
            return Err(self.truncated());
        }
        if self.pos == start {
            return Err(Error::BadHeader {
                path: self.path.into(),
                offset: start,
                detail: format!("expected {what}"),
            });
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::BadHeader {
                path: self.path.into(),
                offset: start,
                detail: format!("{what} out of range"),
            })
    }
}

fn decode_pnm(bytes: &[u8], path: &Path, channels: usize) -> Result<Decoded> {
    let mut cur = HeaderCursor {
        bytes,
        pos: 2,
        path,
    };
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    let maxval_at = cur.pos;
    let maxval = cur.number("maxval")?;
    if maxval != 255 {
        return Err(Error::UnsupportedDepth {
            path: path.into(),
            detail: format!("maxval {maxval} at byte offset {maxval_at}, only 255 is supported"),
        });
    }
    match bytes.get(cur.pos) {
        Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
        Some(_) => {
            return Err(Error::BadHeader {
                path: path.into(),
                offset: cur.pos,
                detail: "expected a single whitespace byte before the payload".into(),
            })
        }
        None => return Err(cur.truncated()),
    }
    if width == 0 || height == 0 {
        return Err(Error::BadHeader {
            path: path.into(),
            offset: 2,
            detail: format!("degenerate dimensions {width}x{height}"),
        });
    }
    let need = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(channels))
        .ok_or_else(|| Error::BadHeader {
            path: path.into(),
            offset: 2,
            detail: "dimensions overflow".into(),
        })?;
    let payload = &bytes[cur.pos..];
    if payload.len() < need {
        return Err(Error::Truncated {
            path: path.into(),
            offset: bytes.len(),
        });
    }
    let data = payload[..need].to_vec();
    Ok(if channels == 1 {
        Decoded::Gray(GrayImage::from_raw(width, height, data)?)
    } else {
        Decoded::Rgb(RgbFrame::from_raw(width, height, data)?)
    })
}

fn decode_png(bytes: &[u8], path: &Path) -> Result<Decoded> {
    let png_err = |detail: String| Error::Png {
        path: path.into(),
        detail,
    };
    let mut decoder = png::Decoder::new(Cursor::new(bytes));
    decoder.set_transformations(png::Transformations::EXPAND);
    let depth = decoder
        .read_header_info()
        .map_err(|e| png_err(e.to_string()))?
        .bit_depth;
    if depth != png::BitDepth::Eight {
        return Err(Error::UnsupportedDepth {
            path: path.into(),
            detail: format!("png bit depth {depth:?}, only 8-bit channels are supported"),
        });
    }
    let mut reader = decoder.read_info().map_err(|e| png_err(e.to_string()))?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| png_err("image too large".into()))?;
    let mut buf = vec![0; size];
    let frame = reader
        .next_frame(&mut buf)
        .map_err(|e| png_err(e.to_string()))?;
    buf.truncate(frame.buffer_size());
    let (w, h) = (frame.width as usize, frame.height as usize);
    match frame.color_type {
        png::ColorType::Grayscale => Ok(Decoded::Gray(GrayImage::from_raw(w, h, buf)?)),
        png::ColorType::Rgb => Ok(Decoded::Rgb(RgbFrame::from_raw(w, h, buf)?)),
        other => Err(png_err(format!(
            "color type {other:?} not supported (8-bit RGB or gray only)"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::PathBuf;

    fn p() -> PathBuf {
        PathBuf::from("mem")
    }

    #[test]
    fn single_pixel_p6() {
        let bytes = b"P6\n1 1\n255\n\x55\x4f\x55";
        let f = decode_image(bytes, &p()).unwrap().into_rgb();
        assert_eq!(f.dims(), (1, 1));
        assert_eq!(f.get(0, 0), [85, 79, 85]);
    }

    #[test]
    fn empty_file_is_truncated() {
        let err = decode_image(b"", &p()).unwrap_err();
        assert!(matches!(err, Error::Truncated { offset: 0, .. }), "{err}");
        assert!(err.to_string().contains("truncated payload"));
    }

    #[test]
    fn short_payload_reports_offset() {
        let err = decode_image(b"P5 2 2 255\n\x01\x02\x03", &p()).unwrap_err();
        match err {
            Error::Truncated { offset, .. } => assert_eq!(offset, 14),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn cut_header_is_truncated() {
        assert!(matches!(
            decode_image(b"P6\n4 4", &p()),
            Err(Error::Truncated { .. })
        ));
    }

    #[test]
    fn sixteen_bit_rejected() {
        let err = decode_image(b"P5\n1 1\n65535\n\x00\x00", &p()).unwrap_err();
        assert!(matches!(err, Error::UnsupportedDepth { .. }));
    }

    #[test]
    fn comments_in_header() {
        let f = decode_image(b"P5\n# made by hand\n2 1\n255\n\x00\xff", &p()).unwrap();
        assert_eq!(
            f,
            Decoded::Gray(GrayImage::from_raw(2, 1, vec![0, 255]).unwrap())
        );
    }

    #[test]
    fn pgm_payload_bytes() {
        let g = GrayImage::from_raw(2, 1, vec![0, 255]).unwrap();
        let enc = encode_pgm(&g);
        assert_eq!(&enc[..], b"P5\n2 1\n255\n\x00\xff");
    }

    #[test]
    fn unknown_magic() {
        assert!(matches!(
            decode_image(b"BM....", &p()),
            Err(Error::BadHeader { offset: 0, .. })
        ));
    }

    #[test]
    fn png_round_trip_rgb() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.png");
        let f = RgbFrame::from_raw(2, 2, (0..12).map(|v| v * 20).collect()).unwrap();
        save_png_rgb(&f, &path).unwrap();
        assert_eq!(load_image(&path).unwrap(), f);
    }

    #[test]
    fn png_gray_replicates() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.png");
        let mut buf = Vec::new();
        {
            let mut enc = png::Encoder::new(&mut buf, 3, 1);
            enc.set_color(png::ColorType::Grayscale);
            enc.set_depth(png::BitDepth::Eight);
            enc.write_header()
                .unwrap()
                .write_image_data(&[1, 2, 3])
                .unwrap();
        }
        fs::write(&path, buf).unwrap();
        let f = load_image(&path).unwrap();
        assert_eq!(f.as_raw(), &[1, 1, 1, 2, 2, 2, 3, 3, 3]);
        assert_eq!(load_gray(&path).unwrap().as_raw(), &[1, 2, 3]);
    }

    #[test]
    fn png_sixteen_bit_rejected() {
        let mut buf = Vec::new();
        {
            let mut enc = png::Encoder::new(&mut buf, 1, 1);
            enc.set_color(png::ColorType::Grayscale);
            enc.set_depth(png::BitDepth::Sixteen);
            enc.write_header()
                .unwrap()
                .write_image_data(&[0, 1])
                .unwrap();
        }
        assert!(matches!(
            decode_image(&buf, &p()),
            Err(Error::UnsupportedDepth { .. })
        ));
    }

    #[test]
    fn missing_file_names_path() {
        let err = load_image("/definitely/not/here.ppm").unwrap_err();
        assert!(err.to_string().contains("/definitely/not/here.ppm"));
    }
}
