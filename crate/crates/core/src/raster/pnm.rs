//! Netpbm grayscale (P2/P5) and color (P3/P6) codec.

use std::path::Path;

use super::RasterImage;
use crate::error::{Error, Result};
use crate::io::write_atomic;

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
    comments: Vec<String>,
}

impl<'a> Cursor<'a> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                let start = self.pos + 1;
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
                let text = String::from_utf8_lossy(&self.bytes[start..self.pos]);
                self.comments.push(text.trim().to_string());
            } else {
                break;
            }
        }
    }

    fn header_uint(&mut self, what: &str) -> Result<u32> {
        self.skip_space_and_comments();
        let start = self.pos;
        let mut value: u64 = 0;
        while let Some(&b) = self.bytes.get(self.pos) {
            if !b.is_ascii_digit() {
                break;
            }
            value = value * 10 + u64::from(b - b'0');
            if value > u64::from(u32::MAX) {
                return Err(Error::Parse {
                    offset: start,
                    reason: format!("{what} too large"),
                });
            }
            self.pos += 1;
        }
        if self.pos == start {
            return Err(Error::Parse {
                offset: start,
                reason: format!("expected {what}"),
            });
        }
        if let Some(&b) = self.bytes.get(self.pos) {
            if !b.is_ascii_whitespace() && b != b'#' {
                return Err(Error::Parse {
                    offset: self.pos,
                    reason: format!("unexpected byte 0x{b:02x} after {what}"),
                });
            }
        }
        Ok(value as u32)
    }
}

/// Decode a PGM/PPM byte stream, also returning the header comments.
pub fn decode_pnm(bytes: &[u8]) -> Result<(RasterImage, Vec<String>)> {
    if bytes.len() < 2 || bytes[0] != b'P' {
        return Err(Error::Format("missing Netpbm magic number".into()));
    }
    let (channels, ascii) = match bytes[1] {
        b'2' => (1u8, true),
        b'3' => (3, true),
        b'5' => (1, false),
        b'6' => (3, false),
        other => {
            return Err(Error::Format(format!(
                "unsupported magic number P{}",
                other as char
            )))
        }
    };
    if let Some(&b) = bytes.get(2) {
        if !b.is_ascii_whitespace() && b != b'#' {
            return Err(Error::Parse {
                offset: 2,
                reason: "magic number must be followed by whitespace".into(),
            });
        }
    }
    let mut cur = Cursor {
        bytes,
        pos: 2,
        comments: Vec::new(),
    };
    let width = cur.header_uint("width")? as usize;
    let height = cur.header_uint("height")? as usize;
    cur.skip_space_and_comments();
    let maxval_at = cur.pos;
    let maxval = cur.header_uint("maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::Parse {
            offset: maxval_at,
            reason: "image dimensions must be positive".into(),
        });
    }
    if maxval == 0 || maxval > 65535 {
        return Err(Error::Parse {
            offset: maxval_at,
            reason: format!("maxval {maxval} outside 1..=65535"),
        });
    }
    let maxval = maxval as u16;
    let expected = width * height * channels as usize;
    let mut samples = Vec::with_capacity(expected);

    if ascii {
        for _ in 0..expected {
            cur.skip_space_and_comments();
            if cur.pos >= bytes.len() {
                return Err(Error::Truncated {
                    expected,
                    found: samples.len(),
                });
            }
            let at = cur.pos;
            let v = cur.header_uint("sample")?;
            if v > u32::from(maxval) {
                return Err(Error::Parse {
                    offset: at,
                    reason: format!("sample {v} exceeds maxval {maxval}"),
                });
            }
            samples.push(v as u16);
        }
    } else {
        // exactly one whitespace byte separates the header from the payload
        if cur.pos >= bytes.len() {
            return Err(Error::Truncated { expected, found: 0 });
        }
        let payload = &bytes[cur.pos + 1..];
        let wide = maxval > 255;
        let bps = if wide { 2 } else { 1 };
        let found = payload.len() / bps;
        if found < expected {
            return Err(Error::Truncated { expected, found });
        }
        for i in 0..expected {
            let v = if wide {
                u16::from_be_bytes([payload[2 * i], payload[2 * i + 1]])
            } else {
                u16::from(payload[i])
            };
            if v > maxval {
                return Err(Error::Parse {
                    offset: cur.pos + 1 + i * bps,
                    reason: format!("sample {v} exceeds maxval {maxval}"),
                });
            }
            samples.push(v);
        }
    }

    let image = RasterImage::new(width, height, channels, maxval, samples)?;
    Ok((image, cur.comments))
}

/// Binary P5/P6 encoding; 16-bit samples are big-endian when maxval > 255.
pub fn encode_pnm(img: &RasterImage, comments: &[String]) -> Vec<u8> {
    let magic = if img.channels() == 3 { "P6" } else { "P5" };
    let mut out = format!("{magic}\n");
    for c in comments {
        for line in c.lines() {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
    }
    out.push_str(&format!(
        "{} {}\n{}\n",
        img.width(),
        img.height(),
        img.maxval()
    ));
    let mut bytes = out.into_bytes();
    if img.maxval() > 255 {
        for &s in img.samples() {
            bytes.extend_from_slice(&s.to_be_bytes());
        }
    } else {
        bytes.extend(img.samples().iter().map(|&s| s as u8));
    }
    bytes
}

pub fn load_pnm(path: impl AsRef<Path>) -> Result<RasterImage> {
    load_pnm_with_comments(path).map(|(img, _)| img)
}

pub fn load_pnm_with_comments(path: impl AsRef<Path>) -> Result<(RasterImage, Vec<String>)> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pnm(&bytes)
}

pub fn write_pnm(img: &RasterImage, path: impl AsRef<Path>) -> Result<()> {
    write_pnm_with_comments(img, &[], path)
}

pub fn write_pnm_with_comments(
    img: &RasterImage,
    comments: &[String],
    path: impl AsRef<Path>,
) -> Result<()> {
    write_atomic(path.as_ref(), &encode_pnm(img, comments))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn smallest_ascii_pgm() {
        let (img, _) = decode_pnm(b"P2\n2 1\n255\n0 255").unwrap();
        assert_eq!((img.width(), img.height(), img.channels()), (2, 1, 1));
        assert_eq!(img.samples(), &[0, 255]);
        assert_eq!(img.maxval(), 255);
    }

    #[test]
    fn binary_ppm_header_arithmetic() {
        let mut bytes = b"P6 3 3 255\n".to_vec();
        bytes.extend((0..27u8).map(|i| i * 9));
        let (img, _) = decode_pnm(&bytes).unwrap();
        assert_eq!(img.channels(), 3);
        assert_eq!(img.samples().len(), 27);
        assert_eq!(img.samples()[26], 234);
    }

    #[test]
    fn comments_are_collected() {
        let (img, comments) = decode_pnm(b"P2\n# made by hand\n2 # width\n1\n7\n3 #x\n 7").unwrap();
        assert_eq!(img.samples(), &[3, 7]);
        assert_eq!(comments, vec!["made by hand", "width", "x"]);
    }

    #[test]
    fn unsupported_magic() {
        assert!(matches!(
            decode_pnm(b"P7\n1 1\n255\n"),
            Err(Error::Format(_))
        ));
        assert!(matches!(decode_pnm(b"P4\n1 1\n"), Err(Error::Format(_))));
        assert!(matches!(decode_pnm(b"GIF89a"), Err(Error::Format(_))));
    }

    #[test]
    fn malformed_header_reports_offset() {
        match decode_pnm(b"P5\n12 x4\n255\n") {
            Err(Error::Parse { offset, .. }) => assert_eq!(offset, 6),
            other => panic!("unexpected {other:?}"),
        }
        match decode_pnm(b"P5\n2 2\n70000\n") {
            Err(Error::Parse { offset, .. }) => assert_eq!(offset, 7),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn truncated_payloads() {
        assert!(matches!(
            decode_pnm(b"P5\n2 2\n255\n\x01\x02\x03"),
            Err(Error::Truncated {
                expected: 4,
                found: 3
            })
        ));
        assert!(matches!(
            decode_pnm(b"P2\n2 2\n255\n1 2 3"),
            Err(Error::Truncated {
                expected: 4,
                found: 3
            })
        ));
        assert!(matches!(
            decode_pnm(b"P5\n2 2\n255"),
            Err(Error::Truncated { .. })
        ));
    }

    #[test]
    fn sample_above_maxval_rejected() {
        assert!(matches!(
            decode_pnm(b"P2\n2 1\n10\n3 11"),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn encoding_rules() {
        let rgb = RasterImage::new(1, 1, 3, 255, vec![1, 2, 3]).unwrap();
        assert!(encode_pnm(&rgb, &[]).starts_with(b"P6\n"));
        let deep = RasterImage::new(2, 1, 1, 65535, vec![0x0102, 0xfffe]).unwrap();
        let bytes = encode_pnm(&deep, &[]);
        assert!(bytes.starts_with(b"P5\n"));
        assert_eq!(&bytes[bytes.len() - 4..], &[0x01, 0x02, 0xff, 0xfe]);
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("tiny.pgm");
        let (img, _) = decode_pnm(b"P2\n2 1\n255\n0 255").unwrap();
        write_pnm(&img, &p).unwrap();
        assert_eq!(load_pnm(&p).unwrap(), img);
        let comments = vec!["seed=42".to_string()];
        write_pnm_with_comments(&img, &comments, &p).unwrap();
        let (back, c) = load_pnm_with_comments(&p).unwrap();
        assert_eq!((back, c), (img, comments));
    }

    #[test]
    fn unwritable_path() {
        let (img, _) = decode_pnm(b"P2\n2 1\n255\n0 255").unwrap();
        assert!(matches!(
            write_pnm(&img, "/nonexistent-dir/x.pgm"),
            Err(Error::Io { .. })
        ));
    }

    fn arb_image() -> impl Strategy<Value = RasterImage> {
        (1usize..6, 1usize..6, prop::bool::ANY, 1u16..=65535).prop_flat_map(
            |(w, h, rgb, maxval)| {
                let ch = if rgb { 3u8 } else { 1 };
                prop::collection::vec(0..=maxval, w * h * ch as usize)
                    .prop_map(move |s| RasterImage::new(w, h, ch, maxval, s).unwrap())
            },
        )
    }

    proptest! {
        #[test]
        fn round_trip_is_exact(img in arb_image()) {
            let (back, _) = decode_pnm(&encode_pnm(&img, &[])).unwrap();
            prop_assert_eq!(back, img);
        }
    }
}
