//! Scene description files: one primitive per line, `#` comments.
//!
//! ```text
//! sphere cx cy cz r  color r g b
//! box cx cy cz hx hy hz  checker r g b  r g b  period
//! plane nx ny nz offset  color r g b
//! ```
//!
//! Units are meters, colors in `[0,1]`. Either color rule works with any
//! shape.

use std::path::Path;

use nalgebra::Vector3;

use super::{ColorRule, CsgUnion, Primitive, SceneError, Shape};

pub fn parse_scene(src: &str) -> Result<Vec<Primitive>, SceneError> {
    let mut prims = Vec::new();
    for (line_no, raw) in src.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        prims.push(parse_line(line).map_err(|reason| SceneError::Parse {
            line: line_no + 1,
            reason,
        })?);
    }
    if prims.is_empty() {
        return Err(SceneError::Parse { line: 0, reason: "scene has no primitives".into() });
    }
    Ok(prims)
}

/// Reads and parses a scene file into a union field.
pub fn load_scene_file(path: &Path) -> Result<CsgUnion, SceneError> {
    let src = std::fs::read_to_string(path).map_err(|e| SceneError::Parse {
        line: 0,
        reason: format!("{}: {e}", path.display()),
    })?;
    CsgUnion::new(parse_scene(&src)?)
}

fn parse_line(line: &str) -> Result<Primitive, String> {
    let mut tokens = line.split_whitespace();
    let kind = tokens.next().ok_or("empty line")?;
    let mut tokens = tokens.peekable();

    let next_f64 = |what: &str, tokens: &mut std::iter::Peekable<std::str::SplitWhitespace>| {
        tokens
            .next()
            .ok_or_else(|| format!("missing {what}"))?
            .parse::<f64>()
            .map_err(|e| format!("bad {what}: {e}"))
    };

    let shape = match kind {
        "sphere" => {
            let cx = next_f64("center x", &mut tokens)?;
            let cy = next_f64("center y", &mut tokens)?;
            let cz = next_f64("center z", &mut tokens)?;
            let r = next_f64("radius", &mut tokens)?;
            Shape::Sphere { center: Vector3::new(cx, cy, cz), radius: r }
        }
        "box" => {
            let cx = next_f64("center x", &mut tokens)?;
            let cy = next_f64("center y", &mut tokens)?;
            let cz = next_f64("center z", &mut tokens)?;
            let hx = next_f64("half extent x", &mut tokens)?;
            let hy = next_f64("half extent y", &mut tokens)?;
            let hz = next_f64("half extent z", &mut tokens)?;
            Shape::Box {
                center: Vector3::new(cx, cy, cz),
                half_extents: Vector3::new(hx, hy, hz),
            }
        }
        "plane" => {
            let nx = next_f64("normal x", &mut tokens)?;
            let ny = next_f64("normal y", &mut tokens)?;
            let nz = next_f64("normal z", &mut tokens)?;
            let offset = next_f64("offset", &mut tokens)?;
            Shape::Plane { normal: Vector3::new(nx, ny, nz), offset }
        }
        other => return Err(format!("unknown primitive '{other}'")),
    };

    let rule = match tokens.next() {
        Some("color") => {
            let r = next_f64("color r", &mut tokens)?;
            let g = next_f64("color g", &mut tokens)?;
            let b = next_f64("color b", &mut tokens)?;
            ColorRule::Constant([r, g, b])
        }
        Some("checker") => {
            let ar = next_f64("checker color a r", &mut tokens)?;
            let ag = next_f64("checker color a g", &mut tokens)?;
            let ab = next_f64("checker color a b", &mut tokens)?;
            let br = next_f64("checker color b r", &mut tokens)?;
            let bg = next_f64("checker color b g", &mut tokens)?;
            let bb = next_f64("checker color b b", &mut tokens)?;
            let period = next_f64("checker period", &mut tokens)?;
            ColorRule::Checker { a: [ar, ag, ab], b: [br, bg, bb], period }
        }
        Some(other) => return Err(format!("expected 'color' or 'checker', got '{other}'")),
        None => return Err("missing color rule".into()),
    };

    if let Some(extra) = tokens.next() {
        return Err(format!("trailing token '{extra}'"));
    }

    Primitive::new(shape, rule).map_err(|e| e.to_string())
}
