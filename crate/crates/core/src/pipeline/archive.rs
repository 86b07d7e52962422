//! Per-scenario waveform files: `<dataset>/<class>/<id>.bin|.csv` plus a
//! `<id>.json` sidecar with the scenario fields.
//!
//! Binary layout (little endian): magic `HIFW`, `u32` version, `u64` spec id,
//! `f64` sampling rate, `u64` fault start index, `u64` sample count, then the
//! samples of phase a, b and c as `f64`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::{ManifestRow, ScenarioSpec};
use crate::synth::Waveform;

const MAGIC: &[u8; 4] = b"HIFW";
const VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 8 + 8 + 8 + 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaveformFormat {
    #[default]
    Binary,
    Csv,
}

impl WaveformFormat {
    pub fn extension(self) -> &'static str {
        match self {
            WaveformFormat::Binary => "bin",
            WaveformFormat::Csv => "csv",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    #[serde(flatten)]
    pub spec: ManifestRow,
    pub format: WaveformFormat,
    pub sampling_rate_hz: f64,
    pub fault_start_index: usize,
    pub samples: usize,
}

pub fn waveform_path(dataset: &Path, spec: &ScenarioSpec, format: WaveformFormat) -> PathBuf {
    dataset
        .join(spec.class_label.as_str())
        .join(format!("{}.{}", spec.id, format.extension()))
}

pub fn sidecar_path(dataset: &Path, spec: &ScenarioSpec) -> PathBuf {
    dataset
        .join(spec.class_label.as_str())
        .join(format!("{}.json", spec.id))
}

pub fn encode_binary(w: &Waveform<f64>) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 24 * w.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&w.spec_id.to_le_bytes());
    out.extend_from_slice(&w.sampling_rate_hz.to_le_bytes());
    out.extend_from_slice(&(w.fault_start_index as u64).to_le_bytes());
    out.extend_from_slice(&(w.len() as u64).to_le_bytes());
    for phase in &w.samples {
        for v in phase {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn decode_binary(bytes: &[u8]) -> std::result::Result<Waveform<f64>, String> {
    if bytes.len() < HEADER_LEN || &bytes[..4] != MAGIC {
        return Err("not a waveform file (bad magic or truncated header)".into());
    }
    let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().expect("8 bytes"));
    let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
    if version != VERSION {
        return Err(format!("unsupported waveform version {version}"));
    }
    let spec_id = u64_at(8);
    let sampling_rate_hz = f64::from_bits(u64_at(16));
    let fault_start_index = u64_at(24) as usize;
    let n = u64_at(32) as usize;
    let expected = n
        .checked_mul(24)
        .and_then(|b| b.checked_add(HEADER_LEN))
        .ok_or("sample count overflows")?;
    if bytes.len() != expected {
        return Err(format!("expected {expected} bytes for {n} samples, found {}", bytes.len()));
    }
    let phase = |p: usize| -> Vec<f64> {
        (0..n)
            .map(|i| f64::from_bits(u64_at(HEADER_LEN + 8 * (p * n + i))))
            .collect()
    };
    Ok(Waveform {
        samples: [phase(0), phase(1), phase(2)],
        sampling_rate_hz,
        fault_start_index,
        spec_id,
    })
}

pub fn encode_csv(w: &Waveform<f64>) -> Result<Vec<u8>> {
    let mut wr = csv::Writer::from_writer(Vec::with_capacity(80 * w.len()));
    let err = |e: csv::Error| Error::InvalidData(format!("waveform csv: {e}"));
    wr.write_record(["t", "ia", "ib", "ic"]).map_err(err)?;
    for i in 0..w.len() {
        let t = i as f64 / w.sampling_rate_hz;
        wr.write_record([
            t.to_string(),
            w.samples[0][i].to_string(),
            w.samples[1][i].to_string(),
            w.samples[2][i].to_string(),
        ])
        .map_err(err)?;
    }
    wr.into_inner()
        .map_err(|e| Error::InvalidData(format!("waveform csv: {e}")))
}

pub fn decode_csv(bytes: &[u8], meta: &Sidecar) -> std::result::Result<Waveform<f64>, String> {
    let mut r = csv::Reader::from_reader(bytes);
    let headers = r.headers().map_err(|e| e.to_string())?.clone();
    if headers.iter().collect::<Vec<_>>() != ["t", "ia", "ib", "ic"] {
        return Err("expected columns t, ia, ib, ic".into());
    }
    let mut samples: [Vec<f64>; 3] = Default::default();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        for p in 0..3 {
            let v: f64 = rec
                .get(p + 1)
                .ok_or_else(|| format!("row {}: missing column", line + 1))?
                .parse()
                .map_err(|e| format!("row {}: {e}", line + 1))?;
            samples[p].push(v);
        }
    }
    Ok(Waveform {
        samples,
        sampling_rate_hz: meta.sampling_rate_hz,
        fault_start_index: meta.fault_start_index,
        spec_id: meta.spec.id,
    })
}

/// Writes the waveform and its sidecar; returns the created paths.
pub fn write_scenario(
    dataset: &Path,
    spec: &ScenarioSpec,
    w: &Waveform<f64>,
    format: WaveformFormat,
) -> Result<[PathBuf; 2]> {
    let wave_path = waveform_path(dataset, spec, format);
    let side_path = sidecar_path(dataset, spec);
    let bytes = match format {
        WaveformFormat::Binary => encode_binary(w),
        WaveformFormat::Csv => encode_csv(w)?,
    };
    write_file(&wave_path, &bytes)?;
    let sidecar = Sidecar {
        spec: ManifestRow::from(spec),
        format,
        sampling_rate_hz: w.sampling_rate_hz,
        fault_start_index: w.fault_start_index,
        samples: w.len(),
    };
    let json = serde_json::to_vec_pretty(&sidecar).map_err(|e| Error::file(&side_path, e.to_string()))?;
    write_file(&side_path, &json)?;
    Ok([wave_path, side_path])
}

/// Loads and cross-checks one scenario's files against its manifest entry.
pub fn read_scenario(dataset: &Path, spec: &ScenarioSpec) -> Result<Waveform<f64>> {
    let side_path = sidecar_path(dataset, spec);
    let side_bytes = fs::read(&side_path).map_err(|e| Error::file(&side_path, e.to_string()))?;
    let meta: Sidecar =
        serde_json::from_slice(&side_bytes).map_err(|e| Error::file(&side_path, format!("corrupt sidecar: {e}")))?;
    if ScenarioSpec::from(meta.spec.clone()) != *spec {
        return Err(Error::file(&side_path, "sidecar disagrees with the manifest"));
    }
    let wave_path = waveform_path(dataset, spec, meta.format);
    let bytes = fs::read(&wave_path).map_err(|e| Error::file(&wave_path, e.to_string()))?;
    let w = match meta.format {
        WaveformFormat::Binary => decode_binary(&bytes),
        WaveformFormat::Csv => decode_csv(&bytes, &meta),
    }
    .map_err(|m| Error::file(&wave_path, m))?;
    if w.spec_id != spec.id || w.len() != meta.samples || w.samples.iter().any(|p| p.len() != meta.samples) {
        return Err(Error::file(&wave_path, "header disagrees with the sidecar"));
    }
    if !w.is_finite() {
        return Err(Error::file(&wave_path, "non-finite samples"));
    }
    Ok(w)
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(bytes).map_err(|e| Error::io(path, e))
}
