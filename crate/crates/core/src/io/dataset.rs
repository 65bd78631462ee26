//! On-disk RGB-D dataset layout.
//!
//! ```text
//! dataset/
//!   manifest.txt        key = value: frames, rate, intrinsics,
//!                       groundtruth, frames_dir, scene (optional)
//!   intrinsics.txt      "fx fy cx cy width height"
//!   groundtruth.tum
//!   scene.txt           copied scene description (synthetic sets)
//!   frames/
//!     color_000000.ppm
//!     depth_000000.pfm
//!     ...
//! ```
//!
//! Manifest paths are relative to the dataset directory, so a dataset tree
//! is relocatable and two identically seeded syntheses are byte-identical.

use std::path::{Path, PathBuf};

use crate::eval::Trajectory;
use crate::geometry::Intrinsics;
use crate::sampling::RgbdFrame;

use super::{parse_key_values, read_pfm, read_ppm, read_tum, write_pfm, write_ppm, write_tum, DataError};

pub const MANIFEST_NAME: &str = "manifest.txt";

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub frames: u32,
    pub rate_hz: f64,
    pub intrinsics_file: String,
    pub groundtruth_file: String,
    pub frames_dir: String,
    pub scene_file: Option<String>,
}

impl DatasetManifest {
    fn to_config_string(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("frames = {}\n", self.frames));
        s.push_str(&format!("rate = {}\n", self.rate_hz));
        s.push_str(&format!("intrinsics = {}\n", self.intrinsics_file));
        s.push_str(&format!("groundtruth = {}\n", self.groundtruth_file));
        s.push_str(&format!("frames_dir = {}\n", self.frames_dir));
        if let Some(scene) = &self.scene_file {
            s.push_str(&format!("scene = {scene}\n"));
        }
        s
    }

    fn from_config_string(src: &str, path: &Path) -> Result<DatasetManifest, DataError> {
        let mut frames = None;
        let mut rate_hz = 10.0;
        let mut intrinsics_file = "intrinsics.txt".to_string();
        let mut groundtruth_file = "groundtruth.tum".to_string();
        let mut frames_dir = "frames".to_string();
        let mut scene_file = None;
        let pairs =
            parse_key_values(src).map_err(|e| DataError::format(path, e))?;
        for (key, value, line) in pairs {
            match key.as_str() {
                "frames" => {
                    frames = Some(value.parse().map_err(|e| {
                        DataError::format(path, format!("line {line}: frames: {e}"))
                    })?)
                }
                "rate" => {
                    rate_hz = value.parse().map_err(|e| {
                        DataError::format(path, format!("line {line}: rate: {e}"))
                    })?
                }
                "intrinsics" => intrinsics_file = value,
                "groundtruth" => groundtruth_file = value,
                "frames_dir" => frames_dir = value,
                "scene" => scene_file = Some(value),
                other => {
                    return Err(DataError::format(
                        path,
                        format!("line {line}: unknown manifest key '{other}'"),
                    ))
                }
            }
        }
        let frames = frames
            .ok_or_else(|| DataError::format(path, "manifest is missing 'frames'"))?;
        Ok(DatasetManifest {
            frames,
            rate_hz,
            intrinsics_file,
            groundtruth_file,
            frames_dir,
            scene_file,
        })
    }
}

/// A fully loaded dataset.
#[derive(Debug)]
pub struct Dataset {
    pub dir: PathBuf,
    pub manifest: DatasetManifest,
    pub intrinsics: Intrinsics,
    pub groundtruth: Trajectory,
    pub frames: Vec<RgbdFrame>,
    /// Absolute path of the scene file, when the manifest names one.
    pub scene_path: Option<PathBuf>,
}

fn color_name(index: u32) -> String {
    format!("color_{index:06}.ppm")
}

fn depth_name(index: u32) -> String {
    format!("depth_{index:06}.pfm")
}

fn write_intrinsics(path: &Path, k: &Intrinsics) -> Result<(), DataError> {
    let line = format!("{} {} {} {} {} {}\n", k.fx, k.fy, k.cx, k.cy, k.width, k.height);
    std::fs::write(path, line).map_err(|e| DataError::io(path, e))
}

fn read_intrinsics(path: &Path) -> Result<Intrinsics, DataError> {
    let src = std::fs::read_to_string(path).map_err(|e| DataError::io(path, e))?;
    let fields: Vec<&str> = src.split_whitespace().collect();
    if fields.len() != 6 {
        return Err(DataError::format(
            path,
            format!("expected 6 fields (fx fy cx cy width height), got {}", fields.len()),
        ));
    }
    let num = |i: usize| -> Result<f64, DataError> {
        fields[i]
            .parse()
            .map_err(|e| DataError::format(path, format!("field {}: {e}", i + 1)))
    };
    let dim = |i: usize| -> Result<u32, DataError> {
        fields[i]
            .parse()
            .map_err(|e| DataError::format(path, format!("field {}: {e}", i + 1)))
    };
    Intrinsics::new(num(0)?, num(1)?, num(2)?, num(3)?, dim(4)?, dim(5)?)
        .map_err(|e| DataError::format(path, e.to_string()))
}

/// Writes a complete dataset directory. `scene_text`, when given, is stored
/// as `scene.txt` and referenced from the manifest.
pub fn write_dataset(
    dir: &Path,
    intrinsics: &Intrinsics,
    frames: &[RgbdFrame],
    groundtruth: &Trajectory,
    rate_hz: f64,
    scene_text: Option<&str>,
) -> Result<(), DataError> {
    std::fs::create_dir_all(dir.join("frames")).map_err(|e| DataError::io(dir, e))?;
    let manifest = DatasetManifest {
        frames: frames.len() as u32,
        rate_hz,
        intrinsics_file: "intrinsics.txt".into(),
        groundtruth_file: "groundtruth.tum".into(),
        frames_dir: "frames".into(),
        scene_file: scene_text.map(|_| "scene.txt".into()),
    };
    let manifest_path = dir.join(MANIFEST_NAME);
    std::fs::write(&manifest_path, manifest.to_config_string())
        .map_err(|e| DataError::io(&manifest_path, e))?;
    write_intrinsics(&dir.join("intrinsics.txt"), intrinsics)?;
    write_tum(&dir.join("groundtruth.tum"), groundtruth, rate_hz)?;
    if let Some(text) = scene_text {
        let scene_path = dir.join("scene.txt");
        std::fs::write(&scene_path, text).map_err(|e| DataError::io(&scene_path, e))?;
    }
    for frame in frames {
        let cpath = dir.join("frames").join(color_name(frame.frame_index));
        let dpath = dir.join("frames").join(depth_name(frame.frame_index));
        write_ppm(&cpath, frame.width, frame.height, &frame.color)?;
        write_pfm(&dpath, frame.width, frame.height, &frame.depth)?;
    }
    Ok(())
}

/// Loads and validates a dataset: every referenced file must exist and
/// parse, with frame files dense over `0..frames`.
pub fn load_dataset(dir: &Path) -> Result<Dataset, DataError> {
    let manifest_path = dir.join(MANIFEST_NAME);
    let src =
        std::fs::read_to_string(&manifest_path).map_err(|e| DataError::io(&manifest_path, e))?;
    let manifest = DatasetManifest::from_config_string(&src, &manifest_path)?;

    let intrinsics = read_intrinsics(&dir.join(&manifest.intrinsics_file))?;
    let groundtruth = read_tum(&dir.join(&manifest.groundtruth_file))?;
    if groundtruth.len() != manifest.frames as usize {
        return Err(DataError::format(
            &manifest_path,
            format!(
                "ground truth has {} poses but the manifest declares {} frames",
                groundtruth.len(),
                manifest.frames
            ),
        ));
    }

    let frames_dir = dir.join(&manifest.frames_dir);
    let mut frames = Vec::with_capacity(manifest.frames as usize);
    for index in 0..manifest.frames {
        let cpath = frames_dir.join(color_name(index));
        let dpath = frames_dir.join(depth_name(index));
        let (cw, ch, color) = read_ppm(&cpath)?;
        let (dw, dh, depth) = read_pfm(&dpath)?;
        if (cw, ch) != (intrinsics.width, intrinsics.height) {
            return Err(DataError::format(
                &cpath,
                format!(
                    "color size {cw}x{ch} does not match intrinsics {}x{}",
                    intrinsics.width, intrinsics.height
                ),
            ));
        }
        if (dw, dh) != (cw, ch) {
            return Err(DataError::format(
                &dpath,
                format!("depth size {dw}x{dh} does not match color {cw}x{ch}"),
            ));
        }
        frames.push(RgbdFrame::from_planes(cw, ch, color, depth, index));
    }

    let scene_path = manifest.scene_file.as_ref().map(|s| dir.join(s));
    if let Some(sp) = &scene_path {
        if !sp.exists() {
            return Err(DataError::format(
                sp,
                "scene file referenced by the manifest does not exist",
            ));
        }
    }

    Ok(Dataset { dir: dir.to_path_buf(), manifest, intrinsics, groundtruth, frames, scene_path })
}
