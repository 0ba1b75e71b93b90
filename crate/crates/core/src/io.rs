//! Image interchange: Portable FloatMap (PFM) for float data, binary PGM and
//! 16-bit PNG for integer exports.
//!
//! PFM rows are stored bottom-to-top on disk; [`PfmImage`] always holds them
//! top-to-bottom. The sign of the scale line selects byte order (negative
//! means little-endian); files are written little-endian with scale `-1.0`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Decoded PFM contents, row-major top-to-bottom, channels interleaved.
#[derive(Clone, Debug, PartialEq)]
pub struct PfmImage {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub data: Vec<f32>,
}

fn read_token_line<R: BufRead>(reader: &mut R, field: &'static str) -> Result<String> {
    let mut line = String::new();
    loop {
        line.clear();
        let n = reader
            .read_line(&mut line)
            .map_err(|e| Error::PfmFormat {
                field,
                detail: e.to_string(),
            })?;
        if n == 0 {
            return Err(Error::PfmFormat {
                field,
                detail: "unexpected end of file".into(),
            });
        }
        let t = line.trim();
        if !t.is_empty() && !t.starts_with('#') {
            return Ok(t.to_string());
        }
    }
}

pub fn decode_pfm<R: Read>(reader: R) -> Result<PfmImage> {
    let mut reader = BufReader::new(reader);
    let channels = match read_token_line(&mut reader, "header")?.as_str() {
        "PF" => 3,
        "Pf" => 1,
        other => {
            return Err(Error::PfmFormat {
                field: "header",
                detail: format!("expected `PF` or `Pf`, found `{other}`"),
            })
        }
    };
    let dims = read_token_line(&mut reader, "dimensions")?;
    let parts: Vec<&str> = dims.split_whitespace().collect();
    let parse_dim = |s: &str, field: &'static str| -> Result<usize> {
        match s.parse::<usize>() {
            Ok(v) if v > 0 => Ok(v),
            _ => Err(Error::PfmFormat {
                field,
                detail: format!("invalid value `{s}`"),
            }),
        }
    };
    if parts.len() != 2 {
        return Err(Error::PfmFormat {
            field: "dimensions",
            detail: format!("expected `<width> <height>`, found `{dims}`"),
        });
    }
    let width = parse_dim(parts[0], "width")?;
    let height = parse_dim(parts[1], "height")?;
    let scale_line = read_token_line(&mut reader, "scale")?;
    let scale: f32 = scale_line.parse().map_err(|_| Error::PfmFormat {
        field: "scale",
        detail: format!("invalid value `{scale_line}`"),
    })?;
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::PfmFormat {
            field: "scale",
            detail: format!("scale must be finite and non-zero, found {scale}"),
        });
    }
    let little_endian = scale < 0.0;

    let count = width * height * channels;
    let mut bytes = vec![0u8; count * 4];
    reader.read_exact(&mut bytes).map_err(|e| Error::PfmFormat {
        field: "raster",
        detail: format!("expected {} bytes: {e}", count * 4),
    })?;
    let mut data = vec![0f32; count];
    let row_len = width * channels;
    for (file_row, chunk) in bytes.chunks_exact(row_len * 4).enumerate() {
        let y = height - 1 - file_row;
        for (i, b) in chunk.chunks_exact(4).enumerate() {
            let raw = [b[0], b[1], b[2], b[3]];
            data[y * row_len + i] = if little_endian {
                f32::from_le_bytes(raw)
            } else {
                f32::from_be_bytes(raw)
            };
        }
    }
    Ok(PfmImage {
        width,
        height,
        channels,
        data,
    })
}

pub fn encode_pfm<W: Write>(img: &PfmImage, mut out: W) -> std::io::Result<()> {
    assert!(img.channels == 1 || img.channels == 3, "PFM holds 1 or 3 channels");
    assert_eq!(img.data.len(), img.width * img.height * img.channels);
    let tag = if img.channels == 3 { "PF" } else { "Pf" };
    write!(out, "{tag}\n{} {}\n-1.0\n", img.width, img.height)?;
    let row_len = img.width * img.channels;
    for y in (0..img.height).rev() {
        for v in &img.data[y * row_len..(y + 1) * row_len] {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    out.flush()
}

pub fn read_pfm(path: &Path) -> Result<PfmImage> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    decode_pfm(f)
}

pub fn write_pfm(path: &Path, img: &PfmImage) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    encode_pfm(img, BufWriter::new(f)).map_err(|e| Error::io(path, e))
}

/// Writes a binary PGM (`P5`). `maxval > 255` stores big-endian 16-bit samples.
/// `comment` lines are embedded in the header.
pub fn write_pgm(
    path: &Path,
    width: usize,
    height: usize,
    maxval: u16,
    samples: &[u16],
    comment: Option<&str>,
) -> Result<()> {
    assert_eq!(samples.len(), width * height);
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(f);
    let mut go = || -> std::io::Result<()> {
        writeln!(out, "P5")?;
        if let Some(c) = comment {
            for line in c.lines() {
                writeln!(out, "# {line}")?;
            }
        }
        write!(out, "{width} {height}\n{maxval}\n")?;
        if maxval > 255 {
            for &s in samples {
                out.write_all(&s.to_be_bytes())?;
            }
        } else {
            let bytes: Vec<u8> = samples.iter().map(|&s| s.min(255) as u8).collect();
            out.write_all(&bytes)?;
        }
        out.flush()
    };
    go().map_err(|e| Error::io(path, e))
}

/// Reads a binary PGM (`P5`) into samples and maxval.
pub fn read_pgm(path: &Path) -> Result<(usize, usize, u16, Vec<u16>)> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = BufReader::new(f);
    let bad = |detail: String| Error::PfmFormat {
        field: "pgm",
        detail,
    };
    let magic = read_token_line(&mut reader, "header")?;
    if magic != "P5" {
        return Err(bad(format!("expected P5, found `{magic}`")));
    }
    let dims = read_token_line(&mut reader, "dimensions")?;
    let mut it = dims.split_whitespace().map(|s| s.parse::<usize>());
    let (w, h) = match (it.next(), it.next()) {
        (Some(Ok(w)), Some(Ok(h))) if w > 0 && h > 0 => (w, h),
        _ => return Err(bad(format!("bad dimensions `{dims}`"))),
    };
    let maxval: u16 = read_token_line(&mut reader, "maxval")?
        .parse()
        .map_err(|_| bad("bad maxval".into()))?;
    let bps = if maxval > 255 { 2 } else { 1 };
    let mut bytes = vec![0u8; w * h * bps];
    reader
        .read_exact(&mut bytes)
        .map_err(|e| bad(e.to_string()))?;
    let samples = if bps == 2 {
        bytes
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]))
            .collect()
    } else {
        bytes.into_iter().map(u16::from).collect()
    };
    Ok((w, h, maxval, samples))
}

/// Writes a grayscale PNG; `sixteen_bit` selects the sample depth.
pub fn write_png_gray(
    path: &Path,
    width: usize,
    height: usize,
    samples: &[u16],
    sixteen_bit: bool,
) -> Result<()> {
    assert_eq!(samples.len(), width * height);
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut enc = png::Encoder::new(BufWriter::new(f), width as u32, height as u32);
    enc.set_color(png::ColorType::Grayscale);
    let bytes: Vec<u8> = if sixteen_bit {
        enc.set_depth(png::BitDepth::Sixteen);
        samples.iter().flat_map(|s| s.to_be_bytes()).collect()
    } else {
        enc.set_depth(png::BitDepth::Eight);
        samples.iter().map(|&s| s.min(255) as u8).collect()
    };
    let to_io = |e: png::EncodingError| {
        Error::io(
            path,
            std::io::Error::other(e.to_string()),
        )
    };
    let mut writer = enc.write_header().map_err(to_io)?;
    writer.write_image_data(&bytes).map_err(to_io)?;
    writer.finish().map_err(to_io)
}
