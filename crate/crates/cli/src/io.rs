//! File IO for the shared formats and image ingestion.
//!
//! Readers sniff the `VPRD` magic to pick between the binary and CSV
//! layouts; writers take an explicit [`FileFormat`]. Image traverses are
//! directories of PNG/JPEG files whose lexicographically sorted names define
//! the frame order.

use std::fs;
use std::path::Path;

use seqvpr_core::formats::{
    self, decode_table_bin, decode_table_csv, encode_table_bin, encode_table_csv, FloatTable,
    BIN_MAGIC,
};
use seqvpr_core::{
    DescriptorKind, DescriptorSet, DistanceMatrix, GroundTruth, ImageFrame, MatchCandidate,
    Matrix, Metric, SadConfig,
};

use crate::errors::{stage_file, CliError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileFormat {
    Csv,
    Bin,
}

impl FileFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            FileFormat::Csv => "csv",
            FileFormat::Bin => "bin",
        }
    }
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::io(path, e))
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| CliError::io(path, e))?;
        }
    }
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

pub fn write_string(path: &Path, text: &str) -> Result<(), CliError> {
    write_bytes(path, text.as_bytes())
}

/// Reads a float table in either format, deciding by the `VPRD` magic.
pub fn read_table(path: &Path) -> Result<FloatTable, CliError> {
    let bytes = read_bytes(path)?;
    if bytes.len() >= 4 && bytes[0..4] == BIN_MAGIC {
        stage_file("formats", path, decode_table_bin(&bytes))
    } else {
        let text = String::from_utf8(bytes).map_err(|_| CliError::Validation(format!(
            "formats: {}: not valid UTF-8 (and not a VPRD binary file)",
            path.display()
        )))?;
        stage_file("formats", path, decode_table_csv(&text))
    }
}

pub fn write_table(
    path: &Path,
    rows: usize,
    cols: usize,
    values: &[f64],
    format: FileFormat,
) -> Result<(), CliError> {
    match format {
        FileFormat::Csv => write_string(path, &encode_table_csv(rows, cols, values)),
        FileFormat::Bin => write_bytes(path, &encode_table_bin(rows, cols, values)),
    }
}

pub fn read_descriptor_set(path: &Path, kind: DescriptorKind) -> Result<DescriptorSet, CliError> {
    let table = read_table(path)?;
    let rows = table
        .values
        .chunks(table.cols)
        .map(|r| r.to_vec())
        .collect();
    stage_file("descriptors", path, DescriptorSet::from_rows(kind, rows))
}

pub fn write_descriptor_set(
    path: &Path,
    set: &DescriptorSet,
    format: FileFormat,
) -> Result<(), CliError> {
    let mut values = Vec::with_capacity(set.len() * set.dim());
    for d in set.iter() {
        values.extend_from_slice(&d.values);
    }
    write_table(path, set.len(), set.dim(), &values, format)
}

pub fn read_distance_matrix(path: &Path, metric: Metric) -> Result<DistanceMatrix, CliError> {
    let table = read_table(path)?;
    let matrix = stage_file(
        "matching",
        path,
        Matrix::from_vec(table.rows, table.cols, table.values),
    )?;
    stage_file("matching", path, DistanceMatrix::from_matrix(matrix, metric))
}

pub fn read_ground_truth(path: &Path, tolerance: usize) -> Result<GroundTruth, CliError> {
    let bytes = read_bytes(path)?;
    let text = String::from_utf8(bytes)
        .map_err(|_| CliError::Validation(format!("eval: {}: not valid UTF-8", path.display())))?;
    let refs = stage_file("eval", path, formats::decode_gt_csv(&text))?;
    stage_file("eval", path, GroundTruth::new(refs, tolerance))
}

pub fn read_mask(path: &Path) -> Result<Vec<bool>, CliError> {
    let bytes = read_bytes(path)?;
    let text = String::from_utf8(bytes).map_err(|_| {
        CliError::Validation(format!("predictor: {}: not valid UTF-8", path.display()))
    })?;
    stage_file("predictor", path, formats::decode_mask_csv(&text))
}

pub fn write_mask(path: &Path, mask: &[bool]) -> Result<(), CliError> {
    write_string(path, &formats::encode_mask_csv(mask))
}

pub fn read_matches(path: &Path) -> Result<(Vec<MatchCandidate>, Vec<bool>), CliError> {
    let bytes = read_bytes(path)?;
    let text = String::from_utf8(bytes)
        .map_err(|_| CliError::Validation(format!("eval: {}: not valid UTF-8", path.display())))?;
    stage_file("eval", path, formats::decode_matches_csv(&text))
}

pub fn write_matches(
    path: &Path,
    matches: &[MatchCandidate],
    accepted: &[bool],
) -> Result<(), CliError> {
    write_string(path, &formats::encode_matches_csv(matches, accepted))
}

pub fn write_ground_truth(path: &Path, gt: &GroundTruth) -> Result<(), CliError> {
    write_string(path, &formats::encode_gt_csv(gt.refs()))
}

fn is_image_name(name: &str) -> bool {
    let lower = name.to_ascii_lowercase();
    lower.ends_with(".png") || lower.ends_with(".jpg") || lower.ends_with(".jpeg")
}

/// Loads a traverse of images from a directory, in lexicographic filename
/// order, and runs the SAD front-end over them.
pub fn load_image_descriptors(dir: &Path, cfg: &SadConfig) -> Result<DescriptorSet, CliError> {
    let mut names: Vec<_> = fs::read_dir(dir)
        .map_err(|e| CliError::io(dir, e))?
        .filter_map(|entry| entry.ok())
        .filter_map(|entry| entry.file_name().into_string().ok())
        .filter(|name| is_image_name(name))
        .collect();
    if names.is_empty() {
        return Err(CliError::Validation(format!(
            "descriptors: {}: no .png/.jpg/.jpeg files found",
            dir.display()
        )));
    }
    names.sort();
    let mut frames = Vec::with_capacity(names.len());
    for name in &names {
        let path = dir.join(name);
        frames.push(load_image(&path)?);
    }
    stage_file(
        "descriptors",
        dir,
        DescriptorSet::from_sad_images(&frames, cfg),
    )
}

/// Decodes one PNG/JPEG image to a grayscale frame (BT.601 luma).
pub fn load_image(path: &Path) -> Result<ImageFrame, CliError> {
    let img = image::open(path).map_err(|e| CliError::Validation(format!(
        "descriptors: {}: image decode failed: {e}",
        path.display()
    )))?;
    let rgb = img.to_rgb8();
    let (w, h) = (rgb.width() as usize, rgb.height() as usize);
    stage_file(
        "descriptors",
        path,
        ImageFrame::from_rgb8(w, h, rgb.as_raw()),
    )
}
