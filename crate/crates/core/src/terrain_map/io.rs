//! Point-cloud file formats: plain `x y z` ASCII and a minimal PCD v0.7
//! ASCII subset (`FIELDS x y z`, `DATA ascii`).

use std::fs;
use std::io::Write;
use std::path::Path;

use nalgebra::Vector3;

use super::{PointCloud, TerrainError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CloudFormat {
    XyzAscii,
    PcdAscii,
}

impl CloudFormat {
    /// Picks a format from the file extension; `.pcd` means PCD, everything
    /// else is treated as xyz ASCII.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("pcd") => CloudFormat::PcdAscii,
            _ => CloudFormat::XyzAscii,
        }
    }
}

pub fn load_point_cloud(path: &Path, format: CloudFormat) -> Result<PointCloud, TerrainError> {
    let text = fs::read_to_string(path).map_err(|source| TerrainError::Io {
        path: path.display().to_string(),
        source,
    })?;
    match format {
        CloudFormat::XyzAscii => parse_xyz(&text, path),
        CloudFormat::PcdAscii => parse_pcd(&text, path),
    }
}

/// One point per line, whitespace-separated `x y z`; `#` starts a comment.
fn parse_xyz(text: &str, path: &Path) -> Result<PointCloud, TerrainError> {
    let mut points = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        points.push(parse_point_line(line, path, lineno + 1)?);
    }
    PointCloud::new(points)
}

fn parse_point_line(
    line: &str,
    path: &Path,
    lineno: usize,
) -> Result<Vector3<f64>, TerrainError> {
    let parse_err = |msg: String| TerrainError::Parse {
        path: path.display().to_string(),
        line: lineno,
        msg,
    };
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() != 3 {
        return Err(parse_err(format!(
            "expected 3 fields, got {}: `{line}`",
            fields.len()
        )));
    }
    let mut v = [0.0f64; 3];
    for (i, f) in fields.iter().enumerate() {
        v[i] = f
            .parse()
            .map_err(|_| parse_err(format!("invalid number `{f}`")))?;
        if !v[i].is_finite() {
            return Err(parse_err(format!("non-finite value `{f}`")));
        }
    }
    Ok(Vector3::new(v[0], v[1], v[2]))
}

fn parse_pcd(text: &str, path: &Path) -> Result<PointCloud, TerrainError> {
    let err = |line: usize, msg: String| TerrainError::Parse {
        path: path.display().to_string(),
        line,
        msg,
    };
    let mut lines = text.lines().enumerate();
    let mut n_points: Option<usize> = None;
    let mut fields_ok = false;
    let mut data_line = 0;
    for (lineno, raw) in lines.by_ref() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split_whitespace();
        let key = it.next().unwrap_or("");
        match key {
            "FIELDS" => {
                let fields: Vec<&str> = it.collect();
                if fields != ["x", "y", "z"] {
                    return Err(err(
                        lineno + 1,
                        format!("unsupported FIELDS {fields:?}, expected [x, y, z]"),
                    ));
                }
                fields_ok = true;
            }
            "POINTS" => {
                let n = it
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| err(lineno + 1, "invalid POINTS count".into()))?;
                n_points = Some(n);
            }
            "DATA" => {
                let kind = it.next().unwrap_or("");
                if kind != "ascii" {
                    return Err(err(
                        lineno + 1,
                        format!("DATA {kind} is not supported, only DATA ascii"),
                    ));
                }
                data_line = lineno + 1;
                break;
            }
            // VERSION, SIZE, TYPE, COUNT, WIDTH, HEIGHT, VIEWPOINT
            _ => {}
        }
    }
    if data_line == 0 {
        return Err(err(0, "missing DATA ascii header".into()));
    }
    if !fields_ok {
        return Err(err(data_line, "missing FIELDS x y z header".into()));
    }
    let n_points =
        n_points.ok_or_else(|| err(data_line, "missing POINTS header".into()))?;

    let mut points = Vec::with_capacity(n_points);
    for (lineno, raw) in lines {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        points.push(parse_point_line(line, path, lineno + 1)?);
    }
    if points.len() != n_points {
        return Err(err(
            data_line,
            format!("POINTS says {n_points} but file has {}", points.len()),
        ));
    }
    PointCloud::new(points)
}

pub fn save_xyz(path: &Path, cloud: &PointCloud) -> Result<(), TerrainError> {
    let io_err = |source| TerrainError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut out = String::new();
    for p in cloud.points() {
        out.push_str(&format!("{} {} {}\n", p.x, p.y, p.z));
    }
    fs::write(path, out).map_err(io_err)
}

pub fn save_pcd(path: &Path, cloud: &PointCloud) -> Result<(), TerrainError> {
    let io_err = |source: std::io::Error| TerrainError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut f = std::io::BufWriter::new(fs::File::create(path).map_err(io_err)?);
    let n = cloud.len();
    let write = |f: &mut std::io::BufWriter<fs::File>, s: String| -> Result<(), TerrainError> {
        f.write_all(s.as_bytes()).map_err(|e| TerrainError::Io {
            path: path.display().to_string(),
            source: e,
        })
    };
    write(
        &mut f,
        format!(
            "# .PCD v0.7 - Point Cloud Data file format\nVERSION 0.7\nFIELDS x y z\nSIZE 8 8 8\nTYPE F F F\nCOUNT 1 1 1\nWIDTH {n}\nHEIGHT 1\nVIEWPOINT 0 0 0 1 0 0 0\nPOINTS {n}\nDATA ascii\n"
        ),
    )?;
    for p in cloud.points() {
        write(&mut f, format!("{} {} {}\n", p.x, p.y, p.z))?;
    }
    f.flush().map_err(io_err)
}
