//! Netpbm graymaps and pixmaps (P2, P3, P5, P6).

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::GridImage;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PnmFormat {
    /// ASCII graymap.
    P2,
    /// ASCII pixmap.
    P3,
    /// Binary graymap.
    P5,
    /// Binary pixmap.
    P6,
}

impl PnmFormat {
    fn channels(self) -> usize {
        match self {
            PnmFormat::P2 | PnmFormat::P5 => 1,
            PnmFormat::P3 | PnmFormat::P6 => 3,
        }
    }

    fn binary(self) -> bool {
        matches!(self, PnmFormat::P5 | PnmFormat::P6)
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn skip_space(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn token(&mut self) -> Result<&str> {
        self.skip_space();
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::Parse("unexpected end of image".into()));
        }
        std::str::from_utf8(&self.bytes[start..self.pos]).map_err(|e| Error::Parse(e.to_string()))
    }

    fn number(&mut self) -> Result<usize> {
        let tok = self.token()?;
        tok.parse()
            .map_err(|_| Error::Parse(format!("expected an integer, found '{tok}'")))
    }
}

/// Decodes a PGM/PPM image, scaling intensities to `[0, 1]` by the stated maxval.
pub fn read_pnm<R: Read>(mut reader: R) -> Result<GridImage> {
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    let mut cur = Cursor { bytes: &bytes, pos: 0 };
    let format = match cur.token()? {
        "P2" => PnmFormat::P2,
        "P3" => PnmFormat::P3,
        "P5" => PnmFormat::P5,
        "P6" => PnmFormat::P6,
        other => return Err(Error::Parse(format!("unsupported magic '{other}'"))),
    };
    let width = cur.number()?;
    let height = cur.number()?;
    let maxval = cur.number()?;
    if maxval == 0 || maxval > 65535 {
        return Err(Error::Parse(format!("maxval {maxval} outside 1..=65535")));
    }
    let n = width * height * format.channels();
    let scale = maxval as f64;
    let mut values = Vec::with_capacity(n);
    if format.binary() {
        // exactly one whitespace byte separates the header from the raster
        let start = cur.pos + 1;
        let wide = maxval > 255;
        let need = n * if wide { 2 } else { 1 };
        let raster = bytes
            .get(start..start + need)
            .ok_or_else(|| Error::Parse("truncated raster".into()))?;
        if wide {
            values.extend(
                raster
                    .chunks(2)
                    .map(|b| u16::from_be_bytes([b[0], b[1]]) as f64 / scale),
            );
        } else {
            values.extend(raster.iter().map(|&b| b as f64 / scale));
        }
    } else {
        for _ in 0..n {
            values.push(cur.number()? as f64 / scale);
        }
    }
    if values.iter().any(|&v| v > 1.0) {
        return Err(Error::Parse("sample exceeds maxval".into()));
    }
    GridImage::new(height, width, format.channels(), values)
}

/// Encodes `image` with maxval 255. The format must match the channel count.
pub fn write_pnm<W: Write>(mut writer: W, image: &GridImage, format: PnmFormat) -> Result<()> {
    if format.channels() != image.channels {
        return Err(Error::PreconditionViolated(format!(
            "{format:?} needs {} channels, image has {}",
            format.channels(),
            image.channels
        )));
    }
    let magic = match format {
        PnmFormat::P2 => "P2",
        PnmFormat::P3 => "P3",
        PnmFormat::P5 => "P5",
        PnmFormat::P6 => "P6",
    };
    write!(writer, "{magic}\n{} {}\n255\n", image.width, image.height)?;
    let quantize = |v: f64| (v.clamp(0.0, 1.0) * 255.0).round() as u8;
    if format.binary() {
        let raster: Vec<u8> = image.values.iter().map(|&v| quantize(v)).collect();
        writer.write_all(&raster)?;
    } else {
        let row = image.width * image.channels;
        for line in image.values.chunks(row.max(1)) {
            let text: Vec<String> = line.iter().map(|&v| quantize(v).to_string()).collect();
            writeln!(writer, "{}", text.join(" "))?;
        }
    }
    Ok(())
}
