//! Composition of the standardization operator (dilate then refine), the
//! train-time chain that prepends a random deformation, the pluggable
//! refiner contract, and the class-balanced batch sampler.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::mlsdeform::{deform_sketch, ControlPairSet};
use crate::sketchimg::{binarize, dilate, thin, SketchImage, StructuringElement};

/// A named sketch-to-sketch operator slotted in after dilation. A learned
/// refiner can replace the shipped ones without changing the pipeline.
pub trait Refiner {
    fn name(&self) -> &'static str;
    /// Output dimensions must equal input dimensions.
    fn refine(&self, img: &SketchImage) -> SketchImage;
}

/// Pass-through refiner.
pub struct IdentityRefiner;

impl Refiner for IdentityRefiner {
    fn name(&self) -> &'static str {
        "identity"
    }

    fn refine(&self, img: &SketchImage) -> SketchImage {
        img.clone()
    }
}

/// Deterministic reference refiner: thins the dilated strokes back toward
/// unit width.
pub struct ThinningRefiner;

impl Refiner for ThinningRefiner {
    fn name(&self) -> &'static str {
        "thinning"
    }

    fn refine(&self, img: &SketchImage) -> SketchImage {
        thin(&binarize(img, 0.5)).to_image()
    }
}

/// Look up a shipped refiner by name.
pub fn refiner_by_name(name: &str) -> Result<Box<dyn Refiner>> {
    match name {
        "identity" => Ok(Box::new(IdentityRefiner)),
        "thinning" => Ok(Box::new(ThinningRefiner)),
        other => Err(Error::UnknownRefiner(other.to_string())),
    }
}

/// Standardization settings: binarization threshold, dilation shape, and the
/// refiner to apply afterwards.
///
/// The default dilates five times with radius 1; a single radius-4 pass is
/// the other documented reading of the dilation amount and is reachable by
/// setting `dilation_radius: 4, dilation_iterations: 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardizeConfig {
    pub threshold: f64,
    pub dilation_radius: usize,
    pub dilation_iterations: usize,
    pub refiner: String,
}

impl Default for StandardizeConfig {
    fn default() -> Self {
        Self {
            threshold: 0.5,
            dilation_radius: 1,
            dilation_iterations: 5,
            refiner: "thinning".to_string(),
        }
    }
}

impl StandardizeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::BadThreshold(self.threshold));
        }
        StructuringElement::new(self.dilation_radius)?;
        refiner_by_name(&self.refiner)?;
        Ok(())
    }
}

/// Standardize a sketch: binarize, dilate, refine. Output is a binary-valued
/// grayscale image (ink 0, background 1). Deterministic.
pub fn standardize(img: &SketchImage, cfg: &StandardizeConfig) -> Result<SketchImage> {
    cfg.validate()?;
    let mask = binarize(img, cfg.threshold);
    let se = StructuringElement::new(cfg.dilation_radius)?;
    let dilated = dilate(&mask, se, cfg.dilation_iterations);
    let refiner = refiner_by_name(&cfg.refiner)?;
    Ok(refiner.refine(&dilated.to_image()))
}

/// Train-time chain: random deformation first, then standardization. The
/// evaluation path is plain [`standardize`], which skips the deformation.
pub fn train_chain(
    img: &SketchImage,
    deform: &ControlPairSet,
    spacing: usize,
    cfg: &StandardizeConfig,
) -> Result<SketchImage> {
    let deformed = deform_sketch(img, deform, spacing)?;
    standardize(&deformed, cfg)
}

/// The 13 object categories of the evaluation protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Category {
    Airplane,
    Bench,
    Cabinet,
    Car,
    Chair,
    Display,
    Lamp,
    Speaker,
    Rifle,
    Sofa,
    Table,
    Telephone,
    Watercraft,
}

impl Category {
    pub const ALL: [Category; 13] = [
        Category::Airplane,
        Category::Bench,
        Category::Cabinet,
        Category::Car,
        Category::Chair,
        Category::Display,
        Category::Lamp,
        Category::Speaker,
        Category::Rifle,
        Category::Sofa,
        Category::Table,
        Category::Telephone,
        Category::Watercraft,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Category::Airplane => "airplane",
            Category::Bench => "bench",
            Category::Cabinet => "cabinet",
            Category::Car => "car",
            Category::Chair => "chair",
            Category::Display => "display",
            Category::Lamp => "lamp",
            Category::Speaker => "speaker",
            Category::Rifle => "rifle",
            Category::Sofa => "sofa",
            Category::Table => "table",
            Category::Telephone => "telephone",
            Category::Watercraft => "watercraft",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Category {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Category::ALL
            .iter()
            .find(|c| c.label() == s)
            .copied()
            .ok_or_else(|| Error::UnknownCategory(s.to_string()))
    }
}

/// One dataset record binding a sketch to its ground-truth cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetEntry {
    pub id: String,
    pub category: Category,
    pub sketch_path: String,
    pub cloud_path: String,
    pub viewpoint_index: usize,
}

/// Parse a dataset manifest: one tab-separated record per line with fields
/// `id, category, sketch_path, cloud_path, viewpoint_index`; blank lines and
/// `#` comment lines are skipped. Ids must be unique.
pub fn parse_manifest(text: &str) -> Result<Vec<DatasetEntry>> {
    let mut entries: Vec<DatasetEntry> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim_end_matches('\r').trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split('\t').collect();
        if fields.len() != 5 {
            return Err(Error::ManifestParse {
                line,
                message: format!("expected 5 tab-separated fields, got {}", fields.len()),
            });
        }
        let id = fields[0].trim().to_string();
        if id.is_empty() {
            return Err(Error::ManifestParse {
                line,
                message: "empty id".into(),
            });
        }
        if entries.iter().any(|e| e.id == id) {
            return Err(Error::ManifestParse {
                line,
                message: format!("duplicate id {id:?}"),
            });
        }
        let category = Category::from_str(fields[1].trim())?;
        let sketch_path = fields[2].trim().to_string();
        let cloud_path = fields[3].trim().to_string();
        if sketch_path.is_empty() || cloud_path.is_empty() {
            return Err(Error::ManifestParse {
                line,
                message: "empty path".into(),
            });
        }
        let viewpoint_index = fields[4].trim().parse().map_err(|e| Error::ManifestParse {
            line,
            message: format!("bad viewpoint index {:?}: {e}", fields[4]),
        })?;
        entries.push(DatasetEntry {
            id,
            category,
            sketch_path,
            cloud_path,
            viewpoint_index,
        });
    }
    Ok(entries)
}

/// An epoch of class-balanced batches of entry ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatchPlan {
    batches: Vec<Vec<String>>,
    batch_size: usize,
}

impl BatchPlan {
    pub fn batches(&self) -> &[Vec<String>] {
        &self.batches
    }

    pub fn batch_size(&self) -> usize {
        self.batch_size
    }

    /// Canonical text form (one tab-joined batch per line), for diffing and
    /// reproducibility checks.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for batch in &self.batches {
            out.push_str(&batch.join("\t"));
            out.push('\n');
        }
        out
    }
}

/// Build an epoch of batches with exactly `batch_size / #categories` entries
/// of every present category per batch.
///
/// The epoch is sized so the largest category is covered once. Each category
/// contributes a shuffled copy of its ids; a category with fewer entries than
/// the epoch needs is topped up by uniform redraws with replacement, so its
/// ids repeat. Ids of sufficiently large categories appear at most once.
/// Deterministic given the seed.
pub fn plan_batches(entries: &[DatasetEntry], batch_size: usize, seed: u64) -> Result<BatchPlan> {
    let mut categories: Vec<Category> = Vec::new();
    for e in entries {
        if !categories.contains(&e.category) {
            categories.push(e.category);
        }
    }
    categories.sort_by_key(|c| c.label());
    let n_cats = categories.len();
    if n_cats == 0 || batch_size == 0 || !batch_size.is_multiple_of(n_cats) {
        return Err(Error::IndivisibleBatch {
            batch_size,
            categories: n_cats,
        });
    }
    let per_category = batch_size / n_cats;
    let largest = categories
        .iter()
        .map(|c| entries.iter().filter(|e| e.category == *c).count())
        .max()
        .expect("at least one category");
    let n_batches = largest.div_ceil(per_category);
    let needed = n_batches * per_category;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut per_cat_ids: Vec<Vec<&str>> = Vec::with_capacity(n_cats);
    for cat in &categories {
        let mut ids: Vec<&str> = entries
            .iter()
            .filter(|e| e.category == *cat)
            .map(|e| e.id.as_str())
            .collect();
        ids.shuffle(&mut rng);
        if ids.len() >= needed {
            ids.truncate(needed);
        } else {
            let pool: Vec<&str> = ids.clone();
            while ids.len() < needed {
                ids.push(pool[rng.random_range(0..pool.len())]);
            }
        }
        per_cat_ids.push(ids);
    }

    let batches = (0..n_batches)
        .map(|b| {
            per_cat_ids
                .iter()
                .flat_map(|ids| {
                    ids[b * per_category..(b + 1) * per_category]
                        .iter()
                        .map(|s| s.to_string())
                })
                .collect()
        })
        .collect();
    Ok(BatchPlan {
        batches,
        batch_size,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sketchimg::rasterize_polyline;
    use std::collections::HashMap;

    fn entry(id: &str, category: Category) -> DatasetEntry {
        DatasetEntry {
            id: id.to_string(),
            category,
            sketch_path: format!("{id}.pgm"),
            cloud_path: format!("{id}.xyz"),
            viewpoint_index: 0,
        }
    }

    #[test]
    fn zero_iterations_identity_refiner_is_plain_binarization() {
        let img = rasterize_polyline(&[(2, 2), (20, 9)], 32, 32).unwrap();
        let cfg = StandardizeConfig {
            dilation_iterations: 0,
            refiner: "identity".into(),
            ..Default::default()
        };
        let out = standardize(&img, &cfg).unwrap();
        assert_eq!(out, binarize(&img, 0.5).to_image());
    }

    #[test]
    fn five_dilations_of_a_point_fill_a_chebyshev_ball() {
        let mut img = SketchImage::blank(32, 32);
        img.set(15, 15, 0.0);
        let cfg = StandardizeConfig {
            refiner: "identity".into(),
            ..Default::default()
        };
        let out = standardize(&img, &cfg).unwrap();
        let mask = binarize(&out, 0.5);
        assert_eq!(mask.ink_count(), 11 * 11);
        for (x, y) in mask.ink_pixels() {
            assert!((x as i64 - 15).abs() <= 5 && (y as i64 - 15).abs() <= 5);
        }
    }

    #[test]
    fn thinning_refiner_preserves_stroke_topology() {
        let img = rasterize_polyline(&[(4, 4), (44, 12), (30, 44)], 64, 64).unwrap();
        let out = standardize(&img, &StandardizeConfig::default()).unwrap();
        let mask = binarize(&out, 0.5);
        assert_eq!(
            mask.component_count(),
            binarize(&img, 0.5).component_count()
        );
    }

    #[test]
    fn standardize_is_deterministic() {
        let img = rasterize_polyline(&[(4, 4), (44, 12), (30, 44)], 64, 64).unwrap();
        let cfg = StandardizeConfig::default();
        assert_eq!(
            standardize(&img, &cfg).unwrap(),
            standardize(&img, &cfg).unwrap()
        );
    }

    #[test]
    fn unknown_refiner_is_rejected() {
        let img = SketchImage::blank(8, 8);
        let cfg = StandardizeConfig {
            refiner: "learned".into(),
            ..Default::default()
        };
        assert!(matches!(
            standardize(&img, &cfg),
            Err(Error::UnknownRefiner(_))
        ));
    }

    #[test]
    fn identity_deformation_makes_train_chain_equal_standardize() {
        let img = rasterize_polyline(&[(6, 6), (40, 20), (12, 50)], 64, 64).unwrap();
        let controls = ControlPairSet::new(
            vec![(10.0, 10.0), (50.0, 20.0), (30.0, 50.0)],
            vec![(10.0, 10.0), (50.0, 20.0), (30.0, 50.0)],
            1.0,
        )
        .unwrap();
        let cfg = StandardizeConfig::default();
        let chained = train_chain(&img, &controls, 4, &cfg).unwrap();
        let direct = standardize(&img, &cfg).unwrap();
        assert_eq!(chained, direct);
    }

    #[test]
    fn train_chain_composes_deform_then_standardize() {
        let img = rasterize_polyline(&[(6, 6), (40, 20), (12, 50)], 64, 64).unwrap();
        let mask = binarize(&img, 0.5);
        let controls = crate::mlsdeform::random_deformation(&mask, 6, 3.0, 9).unwrap();
        let cfg = StandardizeConfig::default();
        let chained = train_chain(&img, &controls, 4, &cfg).unwrap();
        let composed = standardize(&deform_sketch(&img, &controls, 4).unwrap(), &cfg).unwrap();
        assert_eq!(chained, composed);
    }

    #[test]
    fn category_labels_round_trip() {
        for c in Category::ALL {
            assert_eq!(Category::from_str(c.label()).unwrap(), c);
        }
        assert!(matches!(
            Category::from_str("boat"),
            Err(Error::UnknownCategory(_))
        ));
    }

    #[test]
    fn manifest_parses_and_validates() {
        let text = "# comment\nid1\tairplane\ta.pgm\ta.xyz\t0\nid2\tcar\tb.pgm\tb.xyz\t3\n";
        let entries = parse_manifest(text).unwrap();
        assert_eq!(entries.len(), 2);
        assert_eq!(entries[0].category, Category::Airplane);
        assert_eq!(entries[1].viewpoint_index, 3);

        assert!(matches!(
            parse_manifest("id1\tairplane\ta.pgm\ta.xyz\n"),
            Err(Error::ManifestParse { line: 1, .. })
        ));
        assert!(matches!(
            parse_manifest("id1\tboat\ta.pgm\ta.xyz\t0\n"),
            Err(Error::UnknownCategory(_))
        ));
        let dup = "id1\tairplane\ta.pgm\ta.xyz\t0\nid1\tcar\tb.pgm\tb.xyz\t0\n";
        assert!(matches!(
            parse_manifest(dup),
            Err(Error::ManifestParse { line: 2, .. })
        ));
    }

    #[test]
    fn batches_are_exactly_balanced() {
        let mut entries = Vec::new();
        for c in Category::ALL {
            for k in 0..10 {
                entries.push(entry(&format!("{}-{k}", c.label()), c));
            }
        }
        let plan = plan_batches(&entries, 13, 42).unwrap();
        assert_eq!(plan.batches().len(), 10);
        for batch in plan.batches() {
            assert_eq!(batch.len(), 13);
            let mut seen: HashMap<Category, usize> = HashMap::new();
            for id in batch {
                let cat = entries.iter().find(|e| &e.id == id).unwrap().category;
                *seen.entry(cat).or_default() += 1;
            }
            assert_eq!(seen.len(), 13);
            assert!(seen.values().all(|&n| n == 1));
        }
        // each id exactly once over the epoch
        let mut all: Vec<&String> = plan.batches().iter().flatten().collect();
        all.sort();
        all.dedup();
        assert_eq!(all.len(), entries.len());
    }

    #[test]
    fn small_categories_are_resampled_with_replacement() {
        let mut entries = Vec::new();
        for k in 0..6 {
            entries.push(entry(&format!("big-{k}"), Category::Chair));
        }
        for k in 0..2 {
            entries.push(entry(&format!("small-{k}"), Category::Lamp));
        }
        let plan = plan_batches(&entries, 4, 7).unwrap();
        assert_eq!(plan.batches().len(), 3);
        let mut small_count = 0;
        for batch in plan.batches() {
            assert_eq!(batch.len(), 4);
            let smalls = batch.iter().filter(|id| id.starts_with("small")).count();
            assert_eq!(smalls, 2);
            small_count += smalls;
        }
        assert_eq!(small_count, 6); // 2 distinct ids repeated across the epoch
    }

    #[test]
    fn plans_are_deterministic_given_a_seed() {
        let entries: Vec<DatasetEntry> = Category::ALL
            .iter()
            .flat_map(|&c| (0..4).map(move |k| entry(&format!("{}-{k}", c.label()), c)))
            .collect();
        let a = plan_batches(&entries, 26, 5).unwrap();
        let b = plan_batches(&entries, 26, 5).unwrap();
        assert_eq!(a.to_text(), b.to_text());
        let c = plan_batches(&entries, 26, 6).unwrap();
        assert_ne!(a.to_text(), c.to_text());
    }

    #[test]
    fn indivisible_batch_size_is_rejected() {
        let entries = vec![entry("a", Category::Car), entry("b", Category::Lamp)];
        assert!(matches!(
            plan_batches(&entries, 3, 0),
            Err(Error::IndivisibleBatch {
                batch_size: 3,
                categories: 2
            })
        ));
    }
}
