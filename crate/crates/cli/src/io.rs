//! Point files and run manifests.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use nesots::sampler::{DiscreteMeasure, Space};
use nesots::Error;
use serde::Serialize;

/// Tolerance for atoms read from disk.
pub const ON_MANIFOLD_TOL: f64 = 1e-6;

/// `x0,...,xd` rows under a `# manifold: <space> d=<d>` comment.
pub fn points_csv(m: &DiscreteMeasure) -> String {
    rows_csv(m.space(), m.manifold_dim(), m.iter().map(<[f64]>::to_vec))
}

pub fn rows_csv(space: Space, d: usize, rows: impl Iterator<Item = Vec<f64>>) -> String {
    let mut s = format!("# manifold: {} d={d}\n", space.name());
    for x in rows {
        let row: Vec<String> = x.iter().map(|v| format!("{v:.17e}")).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

/// Numeric rows of a CSV file and the manifold tag of its header, if any.
/// Comment lines and a leading non-numeric header row are skipped.
pub fn read_rows(path: &Path) -> Result<(Vec<Vec<f64>>, Option<Space>)> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut tag = None;
    let mut rows = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(c) = line.strip_prefix('#') {
            if let Some(rest) = c.trim().strip_prefix("manifold:") {
                let name = rest.split_whitespace().next().unwrap_or("");
                tag = Some(Space::parse(name)?);
            }
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> = line.split(',').map(|v| v.trim().parse::<f64>()).collect();
        match parsed {
            Ok(r) => rows.push(r),
            Err(_) if rows.is_empty() => continue,
            Err(_) => return Err(Error::Parse(format!("{}:{}: expected numbers", path.display(), ln + 1)).into()),
        }
    }
    if rows.is_empty() {
        return Err(anyhow::Error::new(Error::Empty("no rows in input file")).context(path.display().to_string()));
    }
    Ok((rows, tag))
}

/// Reads a point file, checking every row against `space` within
/// [`ON_MANIFOLD_TOL`]. With `space = None` the header tag decides and
/// untagged files are read as spheres.
pub fn read_points(path: &Path, space: Option<Space>) -> Result<DiscreteMeasure> {
    let (rows, tag) = read_rows(path)?;
    let space = space.or(tag).unwrap_or(Space::Sphere);
    Ok(DiscreteMeasure::from_rows(space, rows, ON_MANIFOLD_TOL).with_context(|| format!("in {}", path.display()))?)
}

pub fn ply(points: &[[f64; 3]]) -> String {
    nesots::mesh::io::ply_points_string(points)
}

/// Rows of three coordinates, or `None` for other dimensions.
pub fn as3(m: &DiscreteMeasure) -> Option<Vec<[f64; 3]>> {
    (m.ambient_dim() == 3).then(|| m.iter().map(|x| [x[0], x[1], x[2]]).collect())
}

pub fn trace_csv(energy: &[f64], batch_cost: &[f64]) -> String {
    let mut s = String::from("iter,energy,batch_cost\n");
    for (j, c) in batch_cost.iter().enumerate() {
        let e = energy.get(j).copied().unwrap_or(f64::NAN);
        let _ = writeln!(s, "{},{e:.17e},{c:.17e}", j + 1);
    }
    s
}

/// Output directory with the files written so far.
pub struct OutDir {
    dir: PathBuf,
    pub files: Vec<String>,
}

impl OutDir {
    pub fn create(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new() })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let p = self.dir.join(name);
        std::fs::write(&p, contents).with_context(|| format!("writing {}", p.display()))?;
        self.files.push(name.to_string());
        Ok(())
    }

    /// Writes `manifest.json` listing every file written before it.
    pub fn finish<T: Serialize>(mut self, manifest: &T) -> Result<()> {
        let mut v = serde_json::to_value(manifest)?;
        if let Some(obj) = v.as_object_mut() {
            obj.insert("files".into(), serde_json::to_value(&self.files)?);
        }
        let text = serde_json::to_string_pretty(&v)? + "\n";
        self.write("manifest.json", &text)
    }
}
