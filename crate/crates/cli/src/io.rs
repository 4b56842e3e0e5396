//! PRKT1 array files and whitespace-separated curve files.
//!
//! An array file is a UTF-8 block of `key: value` lines ended by a blank
//! line, followed by the raw little-endian payload in row-major order:
//!
//! ```text
//! magic: PRKT1
//! dtype: f64
//! kind: SINOGRAM
//! shape: 180 256
//! delta: 0.0078125
//! angles: 0 0.017453292519943295 ...
//! meta.ell: 0.001
//!
//! <payload>
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

pub const MAGIC: &str = "PRKT1";

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Os { path: String, source: std::io::Error },
    #[error("not a PRKT file (magic {0:?})")]
    Magic(String),
    #[error("unsupported format version {0:?}")]
    Version(String),
    #[error("malformed header: {0}")]
    Header(String),
    #[error("payload is {got} bytes, header declares {expected}")]
    Length { expected: usize, got: usize },
    #[error("{0}")]
    Invariant(String),
    #[error("curve columns have unequal lengths")]
    Ragged,
    #[error("malformed curve file: {0}")]
    Curve(String),
}

pub type Result<T> = std::result::Result<T, IoError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dtype {
    F32,
    F64,
}

impl Dtype {
    pub fn size(self) -> usize {
        match self {
            Dtype::F32 => 4,
            Dtype::F64 => 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Frame,
    Sinogram,
    Slice,
    Series,
}

macro_rules! text_enum {
    ($t:ty { $($v:path => $s:literal),+ }) => {
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $($v => $s),+ })
            }
        }

        impl FromStr for $t {
            type Err = IoError;
            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($s => Ok($v),)+
                    other => Err(IoError::Header(format!("unknown {} {other:?}", stringify!($t).to_lowercase()))),
                }
            }
        }
    };
}

text_enum!(Dtype { Dtype::F32 => "f32", Dtype::F64 => "f64" });
text_enum!(Kind { Kind::Frame => "FRAME", Kind::Sinogram => "SINOGRAM", Kind::Slice => "SLICE", Kind::Series => "SERIES" });

#[derive(Debug, Clone, PartialEq)]
pub struct ArrayHeader {
    pub dtype: Dtype,
    pub kind: Kind,
    /// Slowest-varying axis first.
    pub shape: Vec<usize>,
    pub delta: f64,
    pub angles: Option<Vec<f64>>,
    pub meta: BTreeMap<String, String>,
}

impl ArrayHeader {
    pub fn new(kind: Kind, shape: Vec<usize>, delta: f64) -> Self {
        Self { dtype: Dtype::F64, kind, shape, delta, angles: None, meta: BTreeMap::new() }
    }

    pub fn with_angles(mut self, angles: Vec<f64>) -> Self {
        self.angles = Some(angles);
        self
    }

    pub fn with_meta(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.meta.insert(key.into(), value.to_string());
        self
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn validate(&self) -> Result<()> {
        if self.shape.is_empty() || self.shape.len() > 3 || self.shape.contains(&0) {
            return Err(IoError::Invariant(format!("shape must have 1 to 3 positive extents, got {:?}", self.shape)));
        }
        if !self.delta.is_finite() {
            return Err(IoError::Invariant(format!("delta must be finite, got {}", self.delta)));
        }
        if let Some(a) = &self.angles {
            if self.kind != Kind::Sinogram {
                return Err(IoError::Invariant(format!("angles only belong to SINOGRAM, not {}", self.kind)));
            }
            let axis = self.shape[self.shape.len().saturating_sub(2)];
            if a.len() != axis || self.shape.len() < 2 {
                return Err(IoError::Invariant(format!("{} angles for an angle axis of {axis}", a.len())));
            }
        }
        for (k, v) in &self.meta {
            if k.is_empty() || k.contains(|c: char| c == ':' || c.is_whitespace()) {
                return Err(IoError::Invariant(format!("bad meta key {k:?}")));
            }
            if v.contains(['\n', '\r']) {
                return Err(IoError::Invariant(format!("meta value for {k:?} spans lines")));
            }
        }
        Ok(())
    }

    fn render(&self) -> String {
        let join = |xs: &mut dyn Iterator<Item = String>| xs.collect::<Vec<_>>().join(" ");
        let mut s = format!(
            "magic: {MAGIC}\ndtype: {}\nkind: {}\nshape: {}\ndelta: {:?}\n",
            self.dtype,
            self.kind,
            join(&mut self.shape.iter().map(|n| n.to_string())),
            self.delta
        );
        if let Some(a) = &self.angles {
            s += &format!("angles: {}\n", join(&mut a.iter().map(|v| format!("{v:?}"))));
        }
        for (k, v) in &self.meta {
            s += &format!("meta.{k}: {v}\n");
        }
        s.push('\n');
        s
    }

    fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        check_magic(lines.next().unwrap_or(""))?;
        let (mut dtype, mut kind, mut shape, mut delta) = (None, None, None, None);
        let mut angles = None;
        let mut meta = BTreeMap::new();
        for line in lines {
            let (key, value) = line.split_once(':').ok_or_else(|| IoError::Header(format!("line without key: {line:?}")))?;
            let value = value.trim();
            match key {
                "dtype" => dtype = Some(value.parse()?),
                "kind" => kind = Some(value.parse()?),
                "shape" => shape = Some(parse_list::<usize>(value)?),
                "delta" => delta = Some(parse_one::<f64>(value)?),
                "angles" => angles = Some(parse_list::<f64>(value)?),
                k => match k.strip_prefix("meta.") {
                    Some(m) => {
                        meta.insert(m.to_string(), value.to_string());
                    }
                    None => return Err(IoError::Header(format!("unknown key {k:?}"))),
                },
            }
        }
        let missing = |what: &str| IoError::Header(format!("missing {what}"));
        let h = Self {
            dtype: dtype.ok_or_else(|| missing("dtype"))?,
            kind: kind.ok_or_else(|| missing("kind"))?,
            shape: shape.ok_or_else(|| missing("shape"))?,
            delta: delta.ok_or_else(|| missing("delta"))?,
            angles,
            meta,
        };
        h.validate()?;
        Ok(h)
    }
}

fn check_magic(first_line: &str) -> Result<()> {
    let magic = first_line.strip_prefix("magic:").map(str::trim).unwrap_or(first_line);
    match magic.strip_prefix("PRKT") {
        _ if magic == MAGIC => Ok(()),
        Some(v) => Err(IoError::Version(v.to_string())),
        None => Err(IoError::Magic(magic.to_string())),
    }
}

fn parse_one<T: FromStr>(s: &str) -> Result<T> {
    s.parse().map_err(|_| IoError::Header(format!("cannot parse {s:?}")))
}

fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>> {
    s.split_whitespace().map(parse_one).collect()
}

fn os_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Os { path: path.display().to_string(), source }
}

/// Writes `data` under `header`. With dtype `f32` values are rounded to single precision.
pub fn write_array(path: &Path, header: &ArrayHeader, data: &[f64]) -> Result<()> {
    header.validate()?;
    if data.len() != header.len() {
        return Err(IoError::Invariant(format!("{} values for shape {:?}", data.len(), header.shape)));
    }
    let mut bytes = header.render().into_bytes();
    bytes.reserve(data.len() * header.dtype.size());
    match header.dtype {
        Dtype::F64 => data.iter().for_each(|v| bytes.extend_from_slice(&v.to_le_bytes())),
        Dtype::F32 => data.iter().for_each(|&v| bytes.extend_from_slice(&(v as f32).to_le_bytes())),
    }
    fs::write(path, bytes).map_err(os_err(path))
}

pub fn read_array(path: &Path) -> Result<(ArrayHeader, Vec<f64>)> {
    let bytes = fs::read(path).map_err(os_err(path))?;
    check_magic(&String::from_utf8_lossy(bytes.split(|&b| b == b'\n').next().unwrap_or_default()))?;
    let end = bytes.windows(2).position(|w| w == b"\n\n").ok_or_else(|| IoError::Header("no blank line ends the header".into()))?;
    let text = std::str::from_utf8(&bytes[..end]).map_err(|_| IoError::Header("header is not UTF-8".into()))?;
    let header = ArrayHeader::parse(text)?;
    let payload = &bytes[end + 2..];
    let expected = header.len() * header.dtype.size();
    if payload.len() != expected {
        return Err(IoError::Length { expected, got: payload.len() });
    }
    let data = match header.dtype {
        Dtype::F64 => payload.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk"))).collect(),
        Dtype::F32 => payload.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().expect("4-byte chunk")) as f64).collect(),
    };
    Ok((header, data))
}

/// Named columns of equal length.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Curve {
    pub names: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Curve {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn column(mut self, name: &str, values: Vec<f64>) -> Self {
        self.names.push(name.to_string());
        self.columns.push(values);
        self
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn get(&self, name: &str) -> Option<&[f64]> {
        self.names.iter().position(|n| n == name).map(|i| self.columns[i].as_slice())
    }
}

/// One `#` line of column names, then one row per sample at 17 significant digits.
pub fn write_curve(path: &Path, curve: &Curve) -> Result<()> {
    let n = curve.rows();
    if curve.columns.iter().any(|c| c.len() != n) {
        return Err(IoError::Ragged);
    }
    if let Some(bad) = curve.names.iter().find(|s| s.is_empty() || s.contains(char::is_whitespace)) {
        return Err(IoError::Invariant(format!("bad column name {bad:?}")));
    }
    let mut s = format!("# {}\n", curve.names.join(" "));
    for i in 0..n {
        let row: Vec<String> = curve.columns.iter().map(|c| format!("{:.16e}", c[i])).collect();
        s += &row.join(" ");
        s.push('\n');
    }
    fs::write(path, s).map_err(os_err(path))
}

pub fn read_curve(path: &Path) -> Result<Curve> {
    let text = fs::read_to_string(path).map_err(os_err(path))?;
    let mut lines = text.lines();
    let names: Vec<String> = lines
        .next()
        .and_then(|l| l.strip_prefix('#'))
        .ok_or_else(|| IoError::Curve("missing header line".into()))?
        .split_whitespace()
        .map(String::from)
        .collect();
    let mut columns = vec![Vec::new(); names.len()];
    for (i, line) in lines.enumerate() {
        let values: Vec<f64> = line.split_whitespace().map(parse_one).collect::<Result<_>>().map_err(|_| IoError::Curve(format!("row {i}")))?;
        if values.len() != names.len() {
            return Err(IoError::Ragged);
        }
        columns.iter_mut().zip(values).for_each(|(c, v)| c.push(v));
    }
    Ok(Curve { names, columns })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_text_round_trip() {
        let h = ArrayHeader::new(Kind::Sinogram, vec![3, 4], 0.1).with_angles(vec![0.0, 1.0, 2.0]).with_meta("ell", 1e-3);
        assert_eq!(ArrayHeader::parse(h.render().trim_end()).unwrap(), h);
    }

    #[test]
    fn bad_magic_and_version() {
        assert!(matches!(ArrayHeader::parse("magic: NPY1\n"), Err(IoError::Magic(_))));
        assert!(matches!(ArrayHeader::parse("magic: PRKT2\n"), Err(IoError::Version(v)) if v == "2"));
    }

    #[test]
    fn angle_count_must_match() {
        let h = ArrayHeader::new(Kind::Sinogram, vec![3, 4], 0.1).with_angles(vec![0.0, 1.0]);
        assert!(h.validate().is_err());
        let h = ArrayHeader::new(Kind::Frame, vec![2, 4], 0.1).with_angles(vec![0.0, 1.0]);
        assert!(h.validate().is_err());
    }
}
