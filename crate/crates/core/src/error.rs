//! Error type shared by all modules of this crate.

use std::path::PathBuf;
use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    // ----- raster images -----
    #[error("image dimensions {width}x{height} do not match pixel count {pixels}")]
    ImageShape {
        width: usize,
        height: usize,
        pixels: usize,
    },
    #[error("pixel intensity {value} at index {index} is outside [0, 1]")]
    IntensityRange { value: f64, index: usize },
    #[error("structuring element radius must be >= 1")]
    ZeroRadius,
    #[error("polyline needs at least 2 points, got {0}")]
    TooFewPoints(usize),
    #[error("malformed PGM header: {0}")]
    PgmHeader(String),
    #[error("invalid PGM dimensions {width}x{height}")]
    PgmDimension { width: usize, height: usize },
    #[error("truncated PGM payload: expected {expected} bytes, found {found}")]
    PgmTruncated { expected: usize, found: usize },

    // ----- deformation -----
    #[error("control set needs matching non-empty source/target lists (got {sources} sources, {targets} targets)")]
    ControlCount { sources: usize, targets: usize },
    #[error("control weight exponent alpha must be finite and > 0, got {0}")]
    BadAlpha(f64),
    #[error("duplicate control source point ({x}, {y})")]
    DuplicateControl { x: f64, y: f64 },
    #[error("control point ({x}, {y}) is not finite")]
    NonFiniteControl { x: f64, y: f64 },
    #[error("deformation field spacing must be >= 1")]
    ZeroSpacing,
    #[error("requested {required} control points but the mask has only {available} ink pixels")]
    NotEnoughInk { required: usize, available: usize },
    #[error("negative deformation sigma {0}")]
    NegativeSigma(f64),
    #[error("malformed control CSV at line {line}: {message}")]
    ControlCsv { line: usize, message: String },

    // ----- point clouds -----
    #[error("point cloud must contain at least one point")]
    EmptyCloud,
    #[error("non-finite coordinate in point {index}")]
    NonFinitePoint { index: usize },
    #[error("point clouds must have equal sizes for an exact assignment: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },
    #[error("index array of length {len} is not a permutation")]
    NotAPermutation { len: usize },
    #[error("matrix entry ({row}, {col}) is not finite")]
    NonFiniteMatrix { row: usize, col: usize },
    #[error("matrix is not a proper rotation: orthogonality residual {residual:e}, det {det}")]
    NotARotation { residual: f64, det: f64 },
    #[error("matrix is rank-deficient (smallest singular value {smallest:e})")]
    RankDeficient { smallest: f64 },
    #[error("malformed point cloud data at line {line}: {message}")]
    CloudParse { line: usize, message: String },
    #[error("bad point cloud binary payload: {0}")]
    CloudBinary(String),

    // ----- meshes -----
    #[error("OBJ parse error at line {line}: {message}")]
    ObjParse { line: usize, message: String },
    #[error("face index {index} out of range for {vertices} vertices (line {line})")]
    ObjIndexRange {
        index: isize,
        vertices: usize,
        line: usize,
    },
    #[error("mesh has no faces")]
    EmptyMesh,
    #[error("face ({a}, {b}, {c}) repeats a vertex index")]
    DegenerateFace { a: usize, b: usize, c: usize },
    #[error("mesh has zero total surface area")]
    ZeroSurfaceArea,
    #[error("viewpoint count must be >= 1")]
    NoViewpoints,
    #[error("malformed viewpoint CSV at line {line}: {message}")]
    ViewpointCsv { line: usize, message: String },

    // ----- loss / gradcheck -----
    #[error("gradcheck needs at least one trial")]
    NoTrials,
    #[error("orthogonality weight lambda must be finite and >= 0, got {0}")]
    BadLambda(f64),

    // ----- pipeline / evaluation -----
    #[error("unknown category label {0:?}")]
    UnknownCategory(String),
    #[error("unknown refiner {0:?} (known: identity, thinning)")]
    UnknownRefiner(String),
    #[error("standardize threshold must lie in (0, 1), got {0}")]
    BadThreshold(f64),
    #[error("manifest parse error at line {line}: {message}")]
    ManifestParse { line: usize, message: String },
    #[error("manifest references missing file {0}")]
    MissingManifestFile(PathBuf),
    #[error("batch size {batch_size} is not divisible by the {categories} categories present")]
    IndivisibleBatch {
        batch_size: usize,
        categories: usize,
    },
    #[error("category {0} has no entries")]
    EmptyCategory(String),
    #[error("missing prediction clouds for ids: {}", .0.join(", "))]
    MissingPredictions(Vec<String>),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Attach a path to a raw I/O error.
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
