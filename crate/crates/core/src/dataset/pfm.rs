//! Portable float map codec.
//!
//! Layout: an ASCII header `Pf` (one channel) or `PF` (three channels),
//! `width height`, and a scale whose sign gives the byte order (negative is
//! little-endian), each on its own line, followed by raw `f32` samples with
//! the bottom row first. Files are always written little-endian with scale
//! `-1.0`.

use std::io::{BufRead, Write};

/// Decoded float image: interleaved samples, top row first.
#[derive(Debug, Clone, PartialEq)]
pub struct PfmImage {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub data: Vec<f32>,
}

#[derive(Debug, thiserror::Error)]
pub enum PfmError {
    #[error("{0}")]
    Header(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn header_token<R: BufRead>(reader: &mut R) -> Result<String, PfmError> {
    let mut token = Vec::new();
    loop {
        let mut byte = [0u8; 1];
        if reader.read(&mut byte)? == 0 {
            break;
        }
        if byte[0].is_ascii_whitespace() {
            if token.is_empty() {
                continue;
            }
            break;
        }
        token.push(byte[0]);
        if token.len() > 64 {
            return Err(PfmError::Header("header token too long".into()));
        }
    }
    String::from_utf8(token).map_err(|_| PfmError::Header("header is not ASCII".into()))
}

pub fn read_pfm<R: BufRead>(mut reader: R) -> Result<PfmImage, PfmError> {
    let channels = match header_token(&mut reader)?.as_str() {
        "Pf" => 1,
        "PF" => 3,
        other => return Err(PfmError::Header(format!("bad magic {other:?}"))),
    };
    let mut dim = |name: &str| -> Result<usize, PfmError> {
        let tok = header_token(&mut reader)?;
        tok.parse::<usize>()
            .ok()
            .filter(|&v| v > 0)
            .ok_or_else(|| PfmError::Header(format!("bad {name} {tok:?}")))
    };
    let width = dim("width")?;
    let height = dim("height")?;
    let scale_tok = header_token(&mut reader)?;
    let scale: f32 = scale_tok
        .parse()
        .ok()
        .filter(|s: &f32| s.is_finite() && *s != 0.0)
        .ok_or_else(|| PfmError::Header(format!("bad scale {scale_tok:?}")))?;
    let little_endian = scale < 0.0;

    let row_len = width * channels;
    let mut bytes = vec![0u8; row_len * height * 4];
    reader
        .read_exact(&mut bytes)
        .map_err(|e| match e.kind() {
            std::io::ErrorKind::UnexpectedEof => PfmError::Header("truncated pixel data".into()),
            _ => PfmError::Io(e),
        })?;
    let samples: Vec<f32> = bytes
        .chunks_exact(4)
        .map(|b| {
            let b = [b[0], b[1], b[2], b[3]];
            if little_endian {
                f32::from_le_bytes(b)
            } else {
                f32::from_be_bytes(b)
            }
        })
        .collect();
    let mut data = Vec::with_capacity(samples.len());
    for row in samples.chunks_exact(row_len).rev() {
        data.extend_from_slice(row);
    }
    Ok(PfmImage {
        width,
        height,
        channels,
        data,
    })
}

pub fn write_pfm<W: Write>(mut writer: W, image: &PfmImage) -> std::io::Result<()> {
    let magic = if image.channels == 3 { "PF" } else { "Pf" };
    write!(writer, "{magic}\n{} {}\n-1.0\n", image.width, image.height)?;
    let row_len = image.width * image.channels;
    let mut buf = Vec::with_capacity(image.data.len() * 4);
    for row in image.data.chunks_exact(row_len).rev() {
        for v in row {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    writer.write_all(&buf)?;
    writer.flush()
}
