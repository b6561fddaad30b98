//! Report envelope, exit statuses and the fixed-precision JSON writer.

use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::Value;
use sha2::{Digest, Sha256};

use qchan::{Error, Tolerances};

/// Process exit status; the worst one over a batch wins.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok = 0,
    Invalid = 1,
    Input = 2,
    Consistency = 3,
}

impl Status {
    pub fn code(self) -> u8 {
        self as u8
    }
}

/// Status for an error raised after the channel file was read successfully.
pub fn analysis_status(e: &Error) -> Status {
    match e {
        Error::NotCompletelyPositive(_) | Error::InvalidParameter(_) | Error::NotQubit(_) | Error::Shape(_) => Status::Invalid,
        Error::Schema(_) => Status::Input,
        Error::Consistency(_) | Error::Structure { .. } | Error::Mat(_) | Error::IllConditioned(_) | Error::NonFinite => {
            Status::Consistency
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Failure {
    pub status: Status,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stage: Option<&'static str>,
}

impl Failure {
    pub fn new(status: Status, message: impl Into<String>) -> Failure {
        Failure { status, message: message.into(), stage: None }
    }

    pub fn from_error(e: &Error) -> Failure {
        let stage = match e {
            Error::Structure { stage, .. } => Some(*stage),
            _ => None,
        };
        Failure { status: analysis_status(e), message: e.to_string(), stage }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ToolInfo {
    pub version: &'static str,
    pub command: &'static str,
    pub tolerances: Tolerances,
    pub n_max: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct InputId {
    pub path: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sha256: Option<String>,
}

impl InputId {
    pub fn new(path: &Path, bytes: Option<&[u8]>) -> InputId {
        InputId { path: path.display().to_string(), sha256: bytes.map(sha256_hex) }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Timing {
    pub unix_time_s: u64,
    pub elapsed_s: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub tool: ToolInfo,
    pub input: InputId,
    pub results: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<Failure>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

impl Report {
    pub fn status(&self) -> Status {
        self.error.as_ref().map_or(Status::Ok, |f| f.status)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Seventeen significant digits, enough to round-trip any double.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// Pretty printer that writes every float with [`fmt_f64`]; non-finite values become `null`.
struct FixedDigits(PrettyFormatter<'static>);

impl Formatter for FixedDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            w.write_all(fmt_f64(value).as_bytes())
        } else {
            w.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json_bytes<T: Serialize + ?Sized>(value: &T) -> Vec<u8> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedDigits(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("reports are plain data");
    out.push(b'\n');
    out
}
