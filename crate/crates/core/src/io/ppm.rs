//! Binary PPM (P6, 8-bit) color frames.
//!
//! Writing quantizes `[0,1]` floats to `round(c * 255)`; reading divides by
//! 255, so a round trip is exact to within 1/255 per channel.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::DataError;

pub fn write_ppm(path: &Path, width: u32, height: u32, color: &[[f32; 3]]) -> Result<(), DataError> {
    assert_eq!(color.len(), (width * height) as usize);
    let mut buf = Vec::with_capacity(color.len() * 3 + 32);
    buf.extend_from_slice(format!("P6\n{width} {height}\n255\n").as_bytes());
    for px in color {
        for ch in 0..3 {
            buf.push((px[ch].clamp(0.0, 1.0) * 255.0).round() as u8);
        }
    }
    let mut file = fs::File::create(path).map_err(|e| DataError::io(path, e))?;
    file.write_all(&buf).map_err(|e| DataError::io(path, e))
}

pub fn read_ppm(path: &Path) -> Result<(u32, u32, Vec<[f32; 3]>), DataError> {
    let bytes = fs::read(path).map_err(|e| DataError::io(path, e))?;
    let mut cursor = 0usize;

    let token = |bytes: &[u8], cursor: &mut usize| -> Result<String, DataError> {
        // skip whitespace and '#' comments, per the PPM spec
        loop {
            while *cursor < bytes.len() && bytes[*cursor].is_ascii_whitespace() {
                *cursor += 1;
            }
            if *cursor < bytes.len() && bytes[*cursor] == b'#' {
                while *cursor < bytes.len() && bytes[*cursor] != b'\n' {
                    *cursor += 1;
                }
                continue;
            }
            break;
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
    if magic != "P6" {
        return Err(DataError::format(path, format!("expected P6 magic, got '{magic}'")));
    }
    let width: u32 = token(&bytes, &mut cursor)?
        .parse()
        .map_err(|e| DataError::format(path, format!("bad width: {e}")))?;
    let height: u32 = token(&bytes, &mut cursor)?
        .parse()
        .map_err(|e| DataError::format(path, format!("bad height: {e}")))?;
    let maxval: u32 = token(&bytes, &mut cursor)?
        .parse()
        .map_err(|e| DataError::format(path, format!("bad maxval: {e}")))?;
    if maxval != 255 {
        return Err(DataError::format(path, format!("unsupported maxval {maxval}, need 255")));
    }
    // exactly one whitespace byte separates the header from the raster
    cursor += 1;
    let expected = (width as usize) * (height as usize) * 3;
    let raster = bytes
        .get(cursor..cursor + expected)
        .ok_or_else(|| {
            DataError::format(
                path,
                format!("raster truncated: need {expected} bytes at offset {cursor}, have {}", bytes.len().saturating_sub(cursor)),
            )
        })?;
    let color = raster
        .chunks_exact(3)
        .map(|px| {
            [
                px[0] as f32 / 255.0,
                px[1] as f32 / 255.0,
                px[2] as f32 / 255.0,
            ]
        })
        .collect();
    Ok((width, height, color))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_within_quantization() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.ppm");
        let color: Vec<[f32; 3]> = (0..12)
            .map(|i| {
                let x = i as f32 / 11.0;
                [x, 1.0 - x, (x * 7.0).fract()]
            })
            .collect();
        write_ppm(&path, 4, 3, &color).unwrap();
        let (w, h, got) = read_ppm(&path).unwrap();
        assert_eq!((w, h), (4, 3));
        for (a, b) in color.iter().zip(&got) {
            for ch in 0..3 {
                assert!((a[ch] - b[ch]).abs() <= 0.5 / 255.0 + 1e-7);
            }
        }
    }

    #[test]
    fn quantized_values_round_trip_bitwise() {
        // values that are exact multiples of 1/255 survive unchanged
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("q.ppm");
        let color: Vec<[f32; 3]> =
            (0..6).map(|i| [(i * 40) as f32 / 255.0, 0.0, 1.0]).collect();
        write_ppm(&path, 3, 2, &color).unwrap();
        let (_, _, got) = read_ppm(&path).unwrap();
        assert_eq!(color, got);
    }

    #[test]
    fn header_comments_are_skipped() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.ppm");
        let mut bytes = b"P6\n# a comment\n2 1\n255\n".to_vec();
        bytes.extend_from_slice(&[255, 0, 0, 0, 255, 0]);
        std::fs::write(&path, bytes).unwrap();
        let (w, h, color) = read_ppm(&path).unwrap();
        assert_eq!((w, h), (2, 1));
        assert_eq!(color[0], [1.0, 0.0, 0.0]);
    }

    #[test]
    fn malformed_files_report_path() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.ppm");
        std::fs::write(&path, b"P5\n2 1\n255\nxx").unwrap();
        let err = read_ppm(&path).unwrap_err();
        assert!(err.to_string().contains("bad.ppm"));

        std::fs::write(&path, b"P6\n4 4\n255\nxy").unwrap();
        let err = read_ppm(&path).unwrap_err();
        assert!(err.to_string().contains("truncated"));
    }
}
