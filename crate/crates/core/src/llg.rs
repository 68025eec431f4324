//! File formats at the pipeline boundary.
//!
//! The LLG grid format carries externally computed landscapes into the
//! topology/metrics stages: magic `LLG1`, a little-endian u32 header length,
//! a UTF-8 JSON header `{version, shape, axes, meta}`, then `N` little-endian
//! f64 values in row-major order (last axis fastest). A JSON variant inlines
//! the values under a `values` key. Flat f64 vector files with JSON sidecars
//! hold checkpoints and eigenvectors.

use crate::error::{Error, Result};
use crate::oracle::{MlpSpec, ParamVector};
use crate::sampler::{axis_coords, GridMeta, LandscapeGrid};
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::Write;
use std::path::Path;

pub const LLG_MAGIC: &[u8; 4] = b"LLG1";
pub const LLG_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LlgAxis {
    /// Half-width: coordinates span `[-range, range]`.
    pub range: f64,
    pub steps: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eigenvalue: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct LlgHeader {
    version: u32,
    shape: Vec<usize>,
    axes: Vec<LlgAxis>,
    meta: GridMeta,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct LlgJson {
    version: u32,
    shape: Vec<usize>,
    axes: Vec<LlgAxis>,
    meta: GridMeta,
    values: Vec<f64>,
}

fn header_of(grid: &LandscapeGrid) -> LlgHeader {
    let axes = grid
        .axes()
        .iter()
        .enumerate()
        .map(|(i, coords)| LlgAxis {
            range: *coords.last().expect("axes are non-empty"),
            steps: coords.len(),
            eigenvalue: grid.meta.eigenvalues.as_ref().and_then(|ev| ev.get(i).copied()),
        })
        .collect();
    LlgHeader {
        version: LLG_VERSION,
        shape: grid.shape().to_vec(),
        axes,
        meta: grid.meta.clone(),
    }
}

fn grid_from_header(header: LlgHeader, values: Vec<f64>) -> Result<LandscapeGrid> {
    if header.version != LLG_VERSION {
        return Err(Error::format(format!(
            "unsupported LLG version {}, expected {LLG_VERSION}",
            header.version
        )));
    }
    if header.axes.len() != header.shape.len() {
        return Err(Error::format(format!(
            "header has {} axes but shape {:?}",
            header.axes.len(),
            header.shape
        )));
    }
    for (axis, &k) in header.axes.iter().zip(&header.shape) {
        if axis.steps != k {
            return Err(Error::format(format!(
                "axis steps {} disagree with shape entry {k}",
                axis.steps
            )));
        }
    }
    let axes: Vec<Vec<f64>> = header
        .axes
        .iter()
        .map(|a| axis_coords(a.range, a.steps))
        .collect();
    LandscapeGrid::new(axes, values, header.meta)
}

/// Serialize a grid to the binary LLG layout.
pub fn grid_to_llg_bytes(grid: &LandscapeGrid) -> Result<Vec<u8>> {
    let header = serde_json::to_vec(&header_of(grid))?;
    let mut bytes = Vec::with_capacity(8 + header.len() + grid.len() * 8);
    bytes.extend_from_slice(LLG_MAGIC);
    bytes.extend_from_slice(&(header.len() as u32).to_le_bytes());
    bytes.extend_from_slice(&header);
    for v in grid.values() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    Ok(bytes)
}

/// Parse the binary LLG layout.
pub fn grid_from_llg_bytes(bytes: &[u8]) -> Result<LandscapeGrid> {
    if bytes.len() < 8 || &bytes[..4] != LLG_MAGIC {
        return Err(Error::format("not an LLG file (bad magic)"));
    }
    let header_len = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    if bytes.len() < 8 + header_len {
        return Err(Error::format(format!(
            "truncated LLG header: declared {header_len} bytes, only {} available",
            bytes.len() - 8
        )));
    }
    let header: LlgHeader = serde_json::from_slice(&bytes[8..8 + header_len])
        .map_err(|e| Error::format(format!("bad LLG header JSON: {e}")))?;
    let n: usize = header.shape.iter().product();
    let payload = &bytes[8 + header_len..];
    if payload.len() != n * 8 {
        return Err(Error::format(format!(
            "value section holds {} bytes ({} values) but shape {:?} requires {n} values",
            payload.len(),
            payload.len() / 8,
            header.shape
        )));
    }
    let values: Vec<f64> = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    grid_from_header(header, values)
}

/// Write bytes to `path` via a temporary sibling and an atomic rename, so
/// failures never leave partial output behind.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp_path = std::path::PathBuf::from(tmp);
    {
        let mut file = fs::File::create(&tmp_path)?;
        file.write_all(bytes)?;
        file.sync_all()?;
    }
    fs::rename(&tmp_path, path)?;
    Ok(())
}

pub fn write_llg(grid: &LandscapeGrid, path: &Path) -> Result<()> {
    atomic_write(path, &grid_to_llg_bytes(grid)?)
}

/// Write the JSON variant: same header fields with the values inlined.
pub fn write_llg_json(grid: &LandscapeGrid, path: &Path) -> Result<()> {
    let header = header_of(grid);
    let doc = LlgJson {
        version: header.version,
        shape: header.shape,
        axes: header.axes,
        meta: header.meta,
        values: grid.values().to_vec(),
    };
    let mut bytes = serde_json::to_vec_pretty(&doc)?;
    bytes.push(b'\n');
    atomic_write(path, &bytes)
}

/// Read either LLG variant, sniffing the binary magic first.
pub fn read_llg(path: &Path) -> Result<LandscapeGrid> {
    let bytes = fs::read(path)?;
    if bytes.starts_with(LLG_MAGIC) {
        return grid_from_llg_bytes(&bytes);
    }
    let doc: LlgJson = serde_json::from_slice(&bytes)
        .map_err(|e| Error::format(format!("not an LLG file (bad magic) and not LLG JSON: {e}")))?;
    let header = LlgHeader {
        version: doc.version,
        shape: doc.shape,
        axes: doc.axes,
        meta: doc.meta,
    };
    grid_from_header(header, doc.values)
}

/// Ingest a 2-D table of loss values. CSV rows map to the second (fastest)
/// axis; axes are synthesized unit-spaced and symmetric since the file
/// carries no geometry.
pub fn read_csv_grid(path: &Path) -> Result<LandscapeGrid> {
    let text = fs::read_to_string(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: Result<Vec<f64>> = line
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::format(format!("bad number {tok:?} on CSV line {}", lineno + 1)))
            })
            .collect();
        rows.push(row?);
    }
    if rows.is_empty() {
        return Err(Error::format("CSV file holds no rows"));
    }
    let n_cols = rows[0].len();
    if rows.iter().any(|r| r.len() != n_cols) {
        return Err(Error::format("CSV rows have unequal lengths"));
    }
    let n_rows = rows.len();
    let mut values = vec![0.0; n_rows * n_cols];
    for (r, row) in rows.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            values[c * n_rows + r] = v;
        }
    }
    LandscapeGrid::from_values(&[n_cols, n_rows], values)
}

// ---------------------------------------------------------------------------
// Flat f64 vector files with JSON sidecars
// ---------------------------------------------------------------------------

fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut os = path.as_os_str().to_owned();
    os.push(".json");
    std::path::PathBuf::from(os)
}

/// Write a flat little-endian f64 file plus a `<path>.json` sidecar holding
/// `{"dim": n, ...extra}`.
pub fn write_vector(path: &Path, data: &[f64], extra: serde_json::Map<String, serde_json::Value>) -> Result<()> {
    let mut bytes = Vec::with_capacity(data.len() * 8);
    for v in data {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    atomic_write(path, &bytes)?;
    let mut sidecar = serde_json::Map::new();
    sidecar.insert("dim".to_string(), serde_json::json!(data.len()));
    for (k, v) in extra {
        sidecar.insert(k, v);
    }
    let mut json = serde_json::to_vec_pretty(&serde_json::Value::Object(sidecar))?;
    json.push(b'\n');
    atomic_write(&sidecar_path(path), &json)
}

/// Read a flat f64 file and its sidecar; checks the sidecar `dim`.
pub fn read_vector(path: &Path) -> Result<(Vec<f64>, serde_json::Map<String, serde_json::Value>)> {
    let bytes = fs::read(path)?;
    if bytes.len() % 8 != 0 {
        return Err(Error::format(format!(
            "vector file length {} is not a multiple of 8",
            bytes.len()
        )));
    }
    let data: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let sidecar: serde_json::Map<String, serde_json::Value> =
        serde_json::from_slice(&fs::read(sidecar_path(path))?)
            .map_err(|e| Error::format(format!("bad sidecar JSON: {e}")))?;
    if let Some(dim) = sidecar.get("dim").and_then(|v| v.as_u64()) {
        if dim as usize != data.len() {
            return Err(Error::format(format!(
                "sidecar declares dim {dim} but the file holds {} values",
                data.len()
            )));
        }
    }
    Ok((data, sidecar))
}

/// Save MLP parameters as a vector file whose sidecar is `{dim, spec}`.
pub fn save_checkpoint(path: &Path, params: &ParamVector, spec: &MlpSpec) -> Result<()> {
    let mut extra = serde_json::Map::new();
    extra.insert("spec".to_string(), serde_json::to_value(spec)?);
    write_vector(path, params.as_slice(), extra)
}

pub fn load_checkpoint(path: &Path) -> Result<(ParamVector, MlpSpec)> {
    let (data, sidecar) = read_vector(path)?;
    let spec_value = sidecar
        .get("spec")
        .ok_or_else(|| Error::format("checkpoint sidecar is missing the mlp spec"))?;
    let spec: MlpSpec = serde_json::from_value(spec_value.clone())
        .map_err(|e| Error::format(format!("bad mlp spec in sidecar: {e}")))?;
    if spec.param_count() != data.len() {
        return Err(Error::format(format!(
            "checkpoint holds {} parameters but the spec needs {}",
            data.len(),
            spec.param_count()
        )));
    }
    Ok((ParamVector::new(data)?, spec))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{Activation, LossKind};
    use proptest::prelude::*;
    use tempfile::tempdir;

    fn double_well_grid() -> LandscapeGrid {
        LandscapeGrid::from_values(&[5], vec![0.0, 2.0, 1.0, 2.0, 0.0]).unwrap()
    }

    #[test]
    fn binary_round_trip_is_bit_exact() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("grid.llg");
        let grid = double_well_grid();
        write_llg(&grid, &path).unwrap();
        let back = read_llg(&path).unwrap();
        assert_eq!(back.values(), grid.values());
        assert_eq!(back.shape(), grid.shape());
        // Re-writing the parsed grid reproduces the file byte for byte.
        let bytes = fs::read(&path).unwrap();
        assert_eq!(grid_to_llg_bytes(&back).unwrap(), bytes);
    }

    #[test]
    fn json_variant_round_trips() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("grid.json");
        let grid = double_well_grid();
        write_llg_json(&grid, &path).unwrap();
        let back = read_llg(&path).unwrap();
        assert_eq!(back.values(), grid.values());
    }

    #[test]
    fn bad_magic_is_a_format_error() {
        let err = grid_from_llg_bytes(b"NOPE....").unwrap_err();
        assert!(err.to_string().contains("not an LLG file"));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn truncated_values_report_expected_count() {
        let grid = double_well_grid();
        let mut bytes = grid_to_llg_bytes(&grid).unwrap();
        bytes.truncate(bytes.len() - 8);
        let err = grid_from_llg_bytes(&bytes).unwrap_err();
        assert!(err.to_string().contains("requires 5 values"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn non_finite_values_are_numeric_errors() {
        let grid = double_well_grid();
        let mut bytes = grid_to_llg_bytes(&grid).unwrap();
        let n = bytes.len();
        bytes[n - 8..].copy_from_slice(&f64::NAN.to_le_bytes());
        let err = grid_from_llg_bytes(&bytes).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn unknown_meta_keys_survive_round_trips() {
        let mut grid = double_well_grid();
        grid.meta.extra.insert("note".to_string(), serde_json::json!("external"));
        grid.meta.extra.insert("fold".to_string(), serde_json::json!(3));
        let bytes = grid_to_llg_bytes(&grid).unwrap();
        let back = grid_from_llg_bytes(&bytes).unwrap();
        assert_eq!(back.meta.extra.get("note"), Some(&serde_json::json!("external")));
        assert_eq!(back.meta.extra.get("fold"), Some(&serde_json::json!(3)));
    }

    #[test]
    fn csv_ingestion_maps_rows_to_the_fast_axis() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("table.csv");
        fs::write(&path, "0.0, 1.0, 2.0\n3.0, 4.0, 5.0\n").unwrap();
        let grid = read_csv_grid(&path).unwrap();
        assert_eq!(grid.shape(), &[3, 2]);
        // Column c, row r lands at values[c * n_rows + r].
        assert_eq!(grid.values(), &[0.0, 3.0, 1.0, 4.0, 2.0, 5.0]);
    }

    #[test]
    fn checkpoint_round_trip() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("model.f64");
        let spec = MlpSpec {
            layer_widths: vec![2, 3, 2],
            activation: Activation::Tanh,
            loss: LossKind::CrossEntropy,
        };
        let params = crate::oracle::init_mlp_params(&spec, 9).unwrap();
        save_checkpoint(&path, &params, &spec).unwrap();
        let (back, back_spec) = load_checkpoint(&path).unwrap();
        assert_eq!(back, params);
        assert_eq!(back_spec, spec);
    }

    proptest! {
        /// Any finite grid survives an LLG round trip bit-exactly.
        #[test]
        fn llg_round_trip_property(
            raw in proptest::collection::vec(-1e12f64..1e12, 12),
        ) {
            let grid = LandscapeGrid::from_values(&[3, 4], raw).unwrap();
            let bytes = grid_to_llg_bytes(&grid).unwrap();
            let back = grid_from_llg_bytes(&bytes).unwrap();
            prop_assert_eq!(back.values(), grid.values());
            prop_assert_eq!(grid_to_llg_bytes(&back).unwrap(), bytes);
        }
    }
}
