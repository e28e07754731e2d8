//! Trial dataset container and its on-disk format.
//!
//! Layout (all integers little-endian):
//!
//! | offset        | size      | field                                 |
//! |---------------|-----------|---------------------------------------|
//! | 0             | 8         | magic `SFTENS01`                      |
//! | 8             | 4         | version (u32, = 1)                    |
//! | 12            | 4         | n_trials (u32)                        |
//! | 16            | 4         | n_channels (u32)                      |
//! | 20            | 4         | n_samples (u32)                       |
//! | 24            | 4         | dtype tag (u32, 1 = f32 LE)           |
//! | 28            | 8         | sample rate in Hz (f64)               |
//! | 36            | 2·N       | labels (u16 each)                     |
//! | 36 + 2N       | N         | artifact flags (u8, 0 or 1)           |
//! | 36 + 3N       | 4·N·C·T   | samples, trial-major then channel     |

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

pub const MAGIC: [u8; 8] = *b"SFTENS01";
pub const FORMAT_VERSION: u32 = 1;
pub const HEADER_LEN: usize = 36;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u32)]
pub enum Dtype {
    F32Le = 1,
}

impl Dtype {
    pub fn from_tag(tag: u32) -> Option<Self> {
        match tag {
            1 => Some(Dtype::F32Le),
            _ => None,
        }
    }
}

#[derive(Debug, Error)]
pub enum TensorError {
    #[error("bad magic at offset 0: expected {expected:?}, found {found:?}")]
    MagicMismatch { expected: [u8; 8], found: Vec<u8> },
    #[error("unsupported format version {version} at offset 8")]
    VersionUnsupported { version: u32 },
    #[error("unsupported dtype tag {tag} at offset 24")]
    DtypeUnsupported { tag: u32 },
    #[error("truncated {field} at offset {offset}: expected {expected} bytes, got {got}")]
    TruncatedPayload {
        field: &'static str,
        offset: u64,
        expected: u64,
        got: u64,
    },
    #[error(
        "trial {trial}: label {label} out of range for {num_classes} classes (offset {offset})"
    )]
    LabelOutOfRange {
        trial: usize,
        label: u16,
        num_classes: usize,
        offset: u64,
    },
    #[error("trial {trial}: artifact flag byte {value} is not 0 or 1 (offset {offset})")]
    InvalidFlag {
        trial: usize,
        value: u8,
        offset: u64,
    },
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    #[error("invalid sample rate {0} Hz")]
    InvalidSampleRate(f64),
    #[error("{extra} unexpected bytes after payload at offset {offset}")]
    TrailingData { offset: u64, extra: u64 },
    #[error("I/O failure: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatasetHeader {
    pub magic: [u8; 8],
    pub version: u32,
    pub n_trials: u32,
    pub n_channels: u32,
    pub n_samples: u32,
    pub dtype: Dtype,
    pub sample_rate_hz: f64,
}

impl DatasetHeader {
    /// Payload length in bytes, or `None` on overflow.
    pub fn payload_len(&self) -> Option<u64> {
        (self.n_trials as u64)
            .checked_mul(self.n_channels as u64)?
            .checked_mul(self.n_samples as u64)?
            .checked_mul(4)
    }

    pub fn labels_offset(&self) -> u64 {
        HEADER_LEN as u64
    }

    pub fn flags_offset(&self) -> u64 {
        self.labels_offset() + 2 * self.n_trials as u64
    }

    pub fn payload_offset(&self) -> u64 {
        self.flags_offset() + self.n_trials as u64
    }

    pub fn to_bytes(&self) -> [u8; HEADER_LEN] {
        let mut out = [0u8; HEADER_LEN];
        out[0..8].copy_from_slice(&self.magic);
        out[8..12].copy_from_slice(&self.version.to_le_bytes());
        out[12..16].copy_from_slice(&self.n_trials.to_le_bytes());
        out[16..20].copy_from_slice(&self.n_channels.to_le_bytes());
        out[20..24].copy_from_slice(&self.n_samples.to_le_bytes());
        out[24..28].copy_from_slice(&(self.dtype as u32).to_le_bytes());
        out[28..36].copy_from_slice(&self.sample_rate_hz.to_le_bytes());
        out
    }

    /// Parses and validates a header. Magic and version are checked before
    /// any other field is interpreted.
    pub fn parse(bytes: &[u8]) -> Result<Self, TensorError> {
        let magic_bytes = &bytes[..bytes.len().min(8)];
        if magic_bytes != MAGIC {
            return Err(TensorError::MagicMismatch {
                expected: MAGIC,
                found: magic_bytes.to_vec(),
            });
        }
        let u32_at = |off: usize, field: &'static str| -> Result<u32, TensorError> {
            bytes
                .get(off..off + 4)
                .map(|b| u32::from_le_bytes(b.try_into().unwrap()))
                .ok_or(TensorError::TruncatedPayload {
                    field,
                    offset: off as u64,
                    expected: 4,
                    got: bytes.len().saturating_sub(off) as u64,
                })
        };
        let version = u32_at(8, "version")?;
        if version != FORMAT_VERSION {
            return Err(TensorError::VersionUnsupported { version });
        }
        let n_trials = u32_at(12, "n_trials")?;
        let n_channels = u32_at(16, "n_channels")?;
        let n_samples = u32_at(20, "n_samples")?;
        let tag = u32_at(24, "dtype")?;
        let dtype = Dtype::from_tag(tag).ok_or(TensorError::DtypeUnsupported { tag })?;
        let sample_rate_hz = bytes
            .get(28..36)
            .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
            .ok_or(TensorError::TruncatedPayload {
                field: "sample_rate",
                offset: 28,
                expected: 8,
                got: bytes.len().saturating_sub(28) as u64,
            })?;
        if n_channels == 0 || n_samples == 0 {
            return Err(TensorError::InvalidShape(format!(
                "n_channels={n_channels}, n_samples={n_samples}; both must be >= 1"
            )));
        }
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(TensorError::InvalidSampleRate(sample_rate_hz));
        }
        let header = DatasetHeader {
            magic: MAGIC,
            version,
            n_trials,
            n_channels,
            n_samples,
            dtype,
            sample_rate_hz,
        };
        if header.payload_len().is_none() {
            return Err(TensorError::InvalidShape(
                "declared payload length overflows".into(),
            ));
        }
        Ok(header)
    }
}

/// Trials × channels × samples tensor with per-trial labels and artifact flags.
///
/// Samples are stored row-major: trial-major, then channel, then time.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n_trials: usize,
    n_channels: usize,
    n_samples: usize,
    data: Vec<f32>,
    labels: Vec<u16>,
    artifact_flags: Vec<bool>,
    sample_rate_hz: f64,
    channel_names: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(
        shape: (usize, usize, usize),
        data: Vec<f32>,
        labels: Vec<u16>,
        artifact_flags: Vec<bool>,
        sample_rate_hz: f64,
    ) -> Result<Self, TensorError> {
        let (n_trials, n_channels, n_samples) = shape;
        if n_channels == 0 || n_samples == 0 {
            return Err(TensorError::InvalidShape(format!(
                "n_channels={n_channels}, n_samples={n_samples}; both must be >= 1"
            )));
        }
        if n_trials > u32::MAX as usize
            || n_channels > u32::MAX as usize
            || n_samples > u32::MAX as usize
        {
            return Err(TensorError::InvalidShape("axis length exceeds u32".into()));
        }
        let expected = n_trials
            .checked_mul(n_channels)
            .and_then(|v| v.checked_mul(n_samples))
            .ok_or_else(|| TensorError::InvalidShape("shape overflows".into()))?;
        if data.len() != expected {
            return Err(TensorError::InvalidShape(format!(
                "data length {} != {n_trials}x{n_channels}x{n_samples}",
                data.len()
            )));
        }
        if labels.len() != n_trials || artifact_flags.len() != n_trials {
            return Err(TensorError::InvalidShape(format!(
                "{} labels and {} flags for {n_trials} trials",
                labels.len(),
                artifact_flags.len()
            )));
        }
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(TensorError::InvalidSampleRate(sample_rate_hz));
        }
        Ok(Self {
            n_trials,
            n_channels,
            n_samples,
            data,
            labels,
            artifact_flags,
            sample_rate_hz,
            channel_names: None,
        })
    }

    pub fn with_channel_names(mut self, names: Vec<String>) -> Result<Self, TensorError> {
        if names.len() != self.n_channels {
            return Err(TensorError::InvalidShape(format!(
                "{} channel names for {} channels",
                names.len(),
                self.n_channels
            )));
        }
        self.channel_names = Some(names);
        Ok(self)
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.n_trials, self.n_channels, self.n_samples)
    }

    pub fn n_trials(&self) -> usize {
        self.n_trials
    }

    pub fn n_channels(&self) -> usize {
        self.n_channels
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn labels(&self) -> &[u16] {
        &self.labels
    }

    pub fn artifact_flags(&self) -> &[bool] {
        &self.artifact_flags
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn channel_names(&self) -> Option<&[String]> {
        self.channel_names.as_deref()
    }

    /// Number of classes implied by the labels (`max + 1`, or 0 when empty).
    pub fn num_classes(&self) -> usize {
        self.labels
            .iter()
            .map(|&l| l as usize + 1)
            .max()
            .unwrap_or(0)
    }

    /// Samples of one trial/channel pair.
    pub fn series(&self, trial: usize, channel: usize) -> &[f32] {
        let start = (trial * self.n_channels + channel) * self.n_samples;
        &self.data[start..start + self.n_samples]
    }

    pub fn trial(&self, trial: usize) -> &[f32] {
        let len = self.n_channels * self.n_samples;
        &self.data[trial * len..(trial + 1) * len]
    }

    /// Keeps the given trials, in the given order.
    pub fn select_trials(&self, indices: &[usize]) -> Dataset {
        let len = self.n_channels * self.n_samples;
        let mut data = Vec::with_capacity(indices.len() * len);
        for &i in indices {
            data.extend_from_slice(self.trial(i));
        }
        Dataset {
            n_trials: indices.len(),
            n_channels: self.n_channels,
            n_samples: self.n_samples,
            data,
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            artifact_flags: indices.iter().map(|&i| self.artifact_flags[i]).collect(),
            sample_rate_hz: self.sample_rate_hz,
            channel_names: self.channel_names.clone(),
        }
    }

    /// Keeps the given channels, in the given order.
    pub fn select_channels(&self, channels: &[usize]) -> Result<Dataset, TensorError> {
        if channels.is_empty() {
            return Err(TensorError::InvalidShape("empty channel selection".into()));
        }
        if let Some(&bad) = channels.iter().find(|&&c| c >= self.n_channels) {
            return Err(TensorError::InvalidShape(format!(
                "channel {bad} out of range for {} channels",
                self.n_channels
            )));
        }
        let mut data = Vec::with_capacity(self.n_trials * channels.len() * self.n_samples);
        for t in 0..self.n_trials {
            for &c in channels {
                data.extend_from_slice(self.series(t, c));
            }
        }
        Ok(Dataset {
            n_trials: self.n_trials,
            n_channels: channels.len(),
            n_samples: self.n_samples,
            data,
            labels: self.labels.clone(),
            artifact_flags: self.artifact_flags.clone(),
            sample_rate_hz: self.sample_rate_hz,
            channel_names: self
                .channel_names
                .as_ref()
                .map(|n| channels.iter().map(|&c| n[c].clone()).collect()),
        })
    }

    /// Replaces the time axis; `f` maps one series to its new samples and must
    /// return the same length for every series.
    pub(crate) fn map_series<F>(&self, new_len: usize, mut f: F) -> Dataset
    where
        F: FnMut(&[f32]) -> Vec<f32>,
    {
        let mut data = Vec::with_capacity(self.n_trials * self.n_channels * new_len);
        for chunk in self.data.chunks_exact(self.n_samples) {
            let out = f(chunk);
            debug_assert_eq!(out.len(), new_len);
            data.extend_from_slice(&out);
        }
        Dataset {
            n_samples: new_len,
            data,
            ..self.clone_meta()
        }
    }

    pub(crate) fn map_samples<F: Fn(f32) -> f32>(&self, f: F) -> Dataset {
        Dataset {
            n_samples: self.n_samples,
            data: self.data.iter().map(|&x| f(x)).collect(),
            ..self.clone_meta()
        }
    }

    fn clone_meta(&self) -> Dataset {
        Dataset {
            n_trials: self.n_trials,
            n_channels: self.n_channels,
            n_samples: self.n_samples,
            data: Vec::new(),
            labels: self.labels.clone(),
            artifact_flags: self.artifact_flags.clone(),
            sample_rate_hz: self.sample_rate_hz,
            channel_names: self.channel_names.clone(),
        }
    }

    pub fn header(&self) -> DatasetHeader {
        DatasetHeader {
            magic: MAGIC,
            version: FORMAT_VERSION,
            n_trials: self.n_trials as u32,
            n_channels: self.n_channels as u32,
            n_samples: self.n_samples as u32,
            dtype: Dtype::F32Le,
            sample_rate_hz: self.sample_rate_hz,
        }
    }
}

fn read_section<R: Read>(
    r: &mut R,
    len: u64,
    field: &'static str,
    offset: u64,
) -> Result<Vec<u8>, TensorError> {
    // Grows incrementally so a lying header cannot force a huge allocation.
    let mut buf = Vec::new();
    r.by_ref().take(len).read_to_end(&mut buf)?;
    if (buf.len() as u64) < len {
        return Err(TensorError::TruncatedPayload {
            field,
            offset,
            expected: len,
            got: buf.len() as u64,
        });
    }
    Ok(buf)
}

/// Reads one dataset from a stream. Never consumes bytes past the declared
/// payload.
pub fn read_dataset<R: Read>(r: &mut R) -> Result<Dataset, TensorError> {
    let mut head = Vec::with_capacity(HEADER_LEN);
    r.by_ref().take(HEADER_LEN as u64).read_to_end(&mut head)?;
    let header = DatasetHeader::parse(&head)?;

    let n = header.n_trials as usize;
    let labels_raw = read_section(r, 2 * n as u64, "labels", header.labels_offset())?;
    let labels: Vec<u16> = labels_raw
        .chunks_exact(2)
        .map(|b| u16::from_le_bytes([b[0], b[1]]))
        .collect();

    let flags_raw = read_section(r, n as u64, "artifact_flags", header.flags_offset())?;
    let mut artifact_flags = Vec::with_capacity(n);
    for (trial, &value) in flags_raw.iter().enumerate() {
        match value {
            0 => artifact_flags.push(false),
            1 => artifact_flags.push(true),
            _ => {
                return Err(TensorError::InvalidFlag {
                    trial,
                    value,
                    offset: header.flags_offset() + trial as u64,
                })
            }
        }
    }

    let payload_len = header.payload_len().expect("checked in parse");
    let payload = read_section(r, payload_len, "payload", header.payload_offset())?;
    let data: Vec<f32> = payload
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
        .collect();

    Dataset::new(
        (n, header.n_channels as usize, header.n_samples as usize),
        data,
        labels,
        artifact_flags,
        header.sample_rate_hz,
    )
}

/// Decodes a complete in-memory file. Unlike [`read_dataset`], trailing bytes
/// are an error here since the buffer is the whole file.
pub fn decode_dataset(bytes: &[u8]) -> Result<Dataset, TensorError> {
    let mut cursor = bytes;
    let d = read_dataset(&mut cursor)?;
    if !cursor.is_empty() {
        return Err(TensorError::TrailingData {
            offset: (bytes.len() - cursor.len()) as u64,
            extra: cursor.len() as u64,
        });
    }
    Ok(d)
}

/// Checks every label against an expected class count.
pub fn check_labels(d: &Dataset, num_classes: usize) -> Result<(), TensorError> {
    let base = d.header().labels_offset();
    match d
        .labels()
        .iter()
        .enumerate()
        .find(|(_, &l)| l as usize >= num_classes)
    {
        Some((trial, &label)) => Err(TensorError::LabelOutOfRange {
            trial,
            label,
            num_classes,
            offset: base + 2 * trial as u64,
        }),
        None => Ok(()),
    }
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset, TensorError> {
    let mut file = BufReader::new(File::open(path)?);
    let d = read_dataset(&mut file)?;
    let mut probe = [0u8; 1];
    if file.read(&mut probe)? != 0 {
        let offset = d.header().payload_offset() + d.header().payload_len().unwrap_or(0);
        let mut rest = Vec::new();
        file.read_to_end(&mut rest)?;
        return Err(TensorError::TrailingData {
            offset,
            extra: rest.len() as u64 + 1,
        });
    }
    Ok(d)
}

/// Like [`load_dataset`], additionally rejecting labels `>= num_classes`.
pub fn load_dataset_with_classes(
    path: impl AsRef<Path>,
    num_classes: usize,
) -> Result<Dataset, TensorError> {
    let d = load_dataset(path)?;
    check_labels(&d, num_classes)?;
    Ok(d)
}

pub fn write_dataset<W: Write>(d: &Dataset, w: &mut W) -> Result<(), TensorError> {
    w.write_all(&d.header().to_bytes())?;
    for &l in &d.labels {
        w.write_all(&l.to_le_bytes())?;
    }
    let flags: Vec<u8> = d.artifact_flags.iter().map(|&f| f as u8).collect();
    w.write_all(&flags)?;
    let mut payload = Vec::with_capacity(d.data.len() * 4);
    for &x in &d.data {
        payload.extend_from_slice(&x.to_le_bytes());
    }
    w.write_all(&payload)?;
    Ok(())
}

pub fn encode_dataset(d: &Dataset) -> Vec<u8> {
    let mut out = Vec::new();
    write_dataset(d, &mut out).expect("writing to a Vec cannot fail");
    out
}

pub fn save_dataset(d: &Dataset, path: impl AsRef<Path>) -> Result<(), TensorError> {
    let mut w = BufWriter::new(File::create(path)?);
    write_dataset(d, &mut w)?;
    w.flush()?;
    Ok(())
}
