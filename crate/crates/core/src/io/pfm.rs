//! PFM (portable float map) depth frames, single channel, 32-bit float.
//!
//! Per the PFM spec the raster runs bottom-to-top and the sign of the scale
//! header encodes byte order (negative = little-endian). We always write
//! scale -1.0 and read either endianness; the scale magnitude is not
//! applied to the values. Depth round trips bitwise.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::DataError;

pub fn write_pfm(path: &Path, width: u32, height: u32, values: &[f32]) -> Result<(), DataError> {
    assert_eq!(values.len(), (width * height) as usize);
    let mut buf = Vec::with_capacity(values.len() * 4 + 32);
    buf.extend_from_slice(format!("Pf\n{width} {height}\n-1.0\n").as_bytes());
    // bottom row first
    for v in (0..height).rev() {
        let row = &values[(v * width) as usize..((v + 1) * width) as usize];
        for x in row {
            buf.extend_from_slice(&x.to_le_bytes());
        }
    }
    let mut file = fs::File::create(path).map_err(|e| DataError::io(path, e))?;
    file.write_all(&buf).map_err(|e| DataError::io(path, e))
}

pub fn read_pfm(path: &Path) -> Result<(u32, u32, Vec<f32>), DataError> {
    let bytes = fs::read(path).map_err(|e| DataError::io(path, e))?;
    let mut cursor = 0usize;
    let token = |bytes: &[u8], cursor: &mut usize| -> Result<String, DataError> {
        while *cursor < bytes.len() && bytes[*cursor].is_ascii_whitespace() {
            *cursor += 1;
        }
        let start = *cursor;
        while *cursor < bytes.len() && !bytes[*cursor].is_ascii_whitespace() {
            *cursor += 1;
        }
        if start == *cursor {
            return Err(DataError::format(path, format!("truncated header at byte {start}")));
        }
        Ok(String::from_utf8_lossy(&bytes[start..*cursor]).into_owned())
    };

    let magic = token(&bytes, &mut cursor)?;
    if magic != "Pf" {
        return Err(DataError::format(
            path,
            format!("expected grayscale 'Pf' magic, got '{magic}'"),
        ));
    }
    let width: u32 = token(&bytes, &mut cursor)?
        .parse()
        .map_err(|e| DataError::format(path, format!("bad width: {e}")))?;
    let height: u32 = token(&bytes, &mut cursor)?
        .parse()
        .map_err(|e| DataError::format(path, format!("bad height: {e}")))?;
    let scale: f64 = token(&bytes, &mut cursor)?
        .parse()
        .map_err(|e| DataError::format(path, format!("bad scale: {e}")))?;
    let little_endian = scale < 0.0;
    cursor += 1; // single whitespace after the header

    let expected = (width as usize) * (height as usize) * 4;
    let raster = bytes.get(cursor..cursor + expected).ok_or_else(|| {
        DataError::format(
            path,
            format!(
                "raster truncated: need {expected} bytes at offset {cursor}, have {}",
                bytes.len().saturating_sub(cursor)
            ),
        )
    })?;

    let mut values = vec![0f32; (width * height) as usize];
    let mut offset = 0usize;
    for v in (0..height).rev() {
        for u in 0..width {
            let chunk: [u8; 4] = raster[offset..offset + 4].try_into().unwrap();
            let x = if little_endian {
                f32::from_le_bytes(chunk)
            } else {
                f32::from_be_bytes(chunk)
            };
            values[(v * width + u) as usize] = x;
            offset += 4;
        }
    }
    Ok((width, height, values))
}
