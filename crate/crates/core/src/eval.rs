//! Batch evaluation harness: load a dataset manifest, score predicted clouds
//! against ground truth with both metrics, and aggregate per category.
//!
//! Stored and interchanged values are always raw; the table scaling
//! (CD x 1e4, EMD x 1e2) is applied only when building the presentation rows.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::pipeline::{parse_manifest, DatasetEntry};
use crate::pointcloud::{chamfer, emd_exact, read_xyz};

/// Presentation scale for mean Chamfer distances.
pub const CD_TABLE_SCALE: f64 = 1e4;

/// Presentation scale for mean Earth Mover's distances.
pub const EMD_TABLE_SCALE: f64 = 1e2;

/// A dataset manifest whose referenced files all existed at load time.
/// Relative paths resolve against the manifest's directory.
#[derive(Debug, Clone)]
pub struct EvalManifest {
    entries: Vec<DatasetEntry>,
    base_dir: PathBuf,
}

impl EvalManifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let entries = parse_manifest(&text)?;
        let base_dir = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        let manifest = Self { entries, base_dir };
        for entry in &manifest.entries {
            for rel in [&entry.sketch_path, &entry.cloud_path] {
                let full = manifest.resolve(rel);
                if !full.is_file() {
                    return Err(Error::MissingManifestFile(full));
                }
            }
        }
        Ok(manifest)
    }

    pub fn entries(&self) -> &[DatasetEntry] {
        &self.entries
    }

    pub fn base_dir(&self) -> &Path {
        &self.base_dir
    }

    pub fn resolve(&self, relative: &str) -> PathBuf {
        let p = Path::new(relative);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }
}

/// Per-category aggregate: entry count and table-scaled mean metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoryRow {
    pub label: String,
    pub count: usize,
    pub cd_e4: f64,
    pub emd_e2: f64,
}

/// Per-category rows (in category-name order) plus the `avg.` row, which is
/// the unweighted mean of the category means.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricTable {
    pub rows: Vec<CategoryRow>,
    pub average: CategoryRow,
}

impl MetricTable {
    /// CSV form: header `category,n,cd_e4,emd_e2`, one row per category, and
    /// the final `avg.` row. Values print with 9 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("category,n,cd_e4,emd_e2\n");
        for row in self.rows.iter().chain(std::iter::once(&self.average)) {
            out.push_str(&format!(
                "{},{},{},{}\n",
                row.label,
                row.count,
                format_sig9(row.cd_e4),
                format_sig9(row.emd_e2)
            ));
        }
        out
    }
}

/// Score predictions against the manifest's ground truth.
///
/// Every entry must have a prediction cloud `<id>.xyz` in `predictions_dir`;
/// all missing ids are collected into one error, nothing is skipped
/// silently. Per-entry metrics are the Chamfer distance and exact EMD
/// between the prediction and the ground-truth cloud.
pub fn evaluate(manifest: &EvalManifest, predictions_dir: impl AsRef<Path>) -> Result<MetricTable> {
    let dir = predictions_dir.as_ref();
    let missing: Vec<String> = manifest
        .entries()
        .iter()
        .filter(|e| !dir.join(format!("{}.xyz", e.id)).is_file())
        .map(|e| e.id.clone())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingPredictions(missing));
    }

    // category label -> (count, cd sum, emd sum), BTreeMap keeps name order
    let mut accumulator: BTreeMap<&str, (usize, f64, f64)> = BTreeMap::new();
    for entry in manifest.entries() {
        let gt = read_xyz(manifest.resolve(&entry.cloud_path))?;
        let pred = read_xyz(dir.join(format!("{}.xyz", entry.id)))?;
        let cd = chamfer(&pred, &gt);
        let (emd, _) = emd_exact(&pred, &gt)?;
        let slot = accumulator
            .entry(entry.category.label())
            .or_insert((0, 0.0, 0.0));
        slot.0 += 1;
        slot.1 += cd;
        slot.2 += emd;
    }

    let rows: Vec<CategoryRow> = accumulator
        .iter()
        .map(|(&label, &(count, cd_sum, emd_sum))| CategoryRow {
            label: label.to_string(),
            count,
            cd_e4: cd_sum / count as f64 * CD_TABLE_SCALE,
            emd_e2: emd_sum / count as f64 * EMD_TABLE_SCALE,
        })
        .collect();
    let n_rows = rows.len() as f64;
    let average = CategoryRow {
        label: "avg.".to_string(),
        count: rows.iter().map(|r| r.count).sum(),
        cd_e4: rows.iter().map(|r| r.cd_e4).sum::<f64>() / n_rows,
        emd_e2: rows.iter().map(|r| r.emd_e2).sum::<f64>() / n_rows,
    };
    Ok(MetricTable { rows, average })
}

/// Format with 9 significant digits (9 decimals for an exact zero).
pub fn format_sig9(value: f64) -> String {
    if !value.is_finite() {
        return format!("{value}");
    }
    if value == 0.0 {
        return "0.000000000".to_string();
    }
    let magnitude = value.abs().log10().floor() as i32;
    let decimals = (8 - magnitude).max(0) as usize;
    format!("{value:.decimals$}")
}
