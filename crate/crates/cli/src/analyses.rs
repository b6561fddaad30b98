//! Per-file report commands: validate, classify, nindex, structure.

use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{Map, Value};

use qchan::channels::json::{parse_channel, MatrixJson};
use qchan::classify::{aes_classify, es_classify, fixed_structure, fixed_structure_seeded, is_unitary, n_index, NIndexKind};
use qchan::entwit::{eb_verdict, qubit_eb_suite};
use qchan::spectral;
use qchan::{Channel, Tolerances};

use crate::report::{fmt_f64, Failure, InputId, Report, Status, Timing, ToolInfo};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportCommand {
    Validate,
    Classify,
    NIndex,
    Structure,
}

impl ReportCommand {
    pub fn name(self) -> &'static str {
        match self {
            ReportCommand::Validate => "validate",
            ReportCommand::Classify => "classify",
            ReportCommand::NIndex => "nindex",
            ReportCommand::Structure => "structure",
        }
    }

    /// CSV columns after `path,sha256,status` as (header, JSON pointer into results).
    fn columns(self) -> &'static [(&'static str, &'static str)] {
        match self {
            ReportCommand::Validate => &[
                ("d", "/d"),
                ("cp", "/validation/cp"),
                ("tp", "/validation/tp"),
                ("min_choi_eig", "/validation/min_choi_eig"),
                ("tp_residual", "/validation/tp_residual"),
                ("hermiticity_residual", "/validation/hermiticity_residual"),
            ],
            ReportCommand::Classify => &[
                ("d", "/d"),
                ("eb", "/summary/eb"),
                ("n_index", "/summary/n_index"),
                ("es", "/summary/es"),
                ("aes", "/summary/aes"),
                ("uep", "/summary/uep"),
            ],
            ReportCommand::NIndex => &[("d", "/d"), ("n_index", "/summary/n_index")],
            ReportCommand::Structure => &[
                ("d", "/d"),
                ("k_dim", "/structure/k_dim"),
                ("blocks", "/summary/blocks"),
                ("perm", "/summary/perm"),
                ("reconstruction_residual", "/structure/reconstruction_residual"),
            ],
        }
    }

    pub fn csv_header(self) -> Vec<String> {
        let mut h: Vec<String> = ["path", "sha256", "status"].iter().map(|s| s.to_string()).collect();
        h.extend(self.columns().iter().map(|(name, _)| name.to_string()));
        h.push("error".into());
        h
    }
}

#[derive(Clone, Debug)]
pub struct Config {
    pub tol: Tolerances,
    pub n_max: u64,
    pub seed: Option<u64>,
    pub timestamp: bool,
}

impl Config {
    pub fn tool(&self, command: &'static str) -> ToolInfo {
        ToolInfo { version: env!("CARGO_PKG_VERSION"), command, tolerances: self.tol, n_max: self.n_max, seed: self.seed }
    }
}

/// Reads and parses a channel file; failures here are input errors.
pub fn load(path: &Path) -> (InputId, Result<Channel, Failure>) {
    let bytes = match std::fs::read(path) {
        Ok(b) => b,
        Err(e) => return (InputId::new(path, None), Err(Failure::new(Status::Input, format!("cannot read {}: {e}", path.display())))),
    };
    let id = InputId::new(path, Some(&bytes));
    let parsed = std::str::from_utf8(&bytes)
        .map_err(|e| format!("{}: not UTF-8: {e}", path.display()))
        .and_then(|text| parse_channel(text).map_err(|e| format!("{}: {e}", path.display())));
    (id, parsed.map_err(|m| Failure::new(Status::Input, m)))
}

/// Results gathered so far; an analysis stops at its first error.
struct Partial(Map<String, Value>);

impl Partial {
    fn put<T: Serialize>(&mut self, key: &str, value: &T) {
        self.0.insert(key.to_string(), serde_json::to_value(value).expect("plain data"));
    }

    fn step<T: Serialize>(&mut self, key: &str, r: qchan::Result<T>) -> Result<T, Failure> {
        match r {
            Ok(v) => {
                self.put(key, &v);
                Ok(v)
            }
            Err(e) => Err(Failure::from_error(&e)),
        }
    }
}

fn require_valid(p: &mut Partial, ch: &Channel, tol: &Tolerances) -> Result<(), Failure> {
    let rep = ch.validate_cptp_with(tol);
    p.put("validation", &rep);
    if !rep.cp {
        return Err(Failure::new(Status::Invalid, format!("not completely positive (min Choi eigenvalue {})", fmt_f64(rep.min_choi_eig))));
    }
    if !rep.tp {
        return Err(Failure::new(Status::Invalid, format!("not trace preserving (residual {})", fmt_f64(rep.tp_residual))));
    }
    Ok(())
}

fn n_index_label(kind: NIndexKind) -> String {
    match kind {
        NIndexKind::Finite(n) => format!("finite({n})"),
        NIndexKind::AtLeast(n) => format!("at_least({n})"),
        NIndexKind::InfiniteCertified => "infinite_certified".into(),
    }
}

fn label<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("plain data")
}

fn validate(p: &mut Partial, ch: &Channel, cfg: &Config) -> Result<(), Failure> {
    require_valid(p, ch, &cfg.tol)
}

fn classify(p: &mut Partial, ch: &Channel, cfg: &Config) -> Result<(), Failure> {
    let tol = &cfg.tol;
    require_valid(p, ch, tol)?;
    p.step("spectrum", spectral::spectrum(ch, tol))?;
    let eb = eb_verdict(ch, tol);
    p.put("eb", &eb);
    if ch.dim() == 2 {
        p.step("qubit_eb_criteria", qubit_eb_suite(ch, tol))?;
    }
    let ni = p.step("n_index", n_index(ch, cfg.n_max, tol))?;
    let es = p.step("es", es_classify(ch, tol, cfg.n_max))?;
    let aes = p.step("aes", aes_classify(ch, tol))?;
    let uep = p.step("uep", is_unitary(ch, tol))?;
    let mut summary = Map::new();
    summary.insert("eb".into(), label(&eb.status));
    summary.insert("n_index".into(), n_index_label(ni.kind).into());
    summary.insert("es".into(), label(&es.status));
    summary.insert("aes".into(), label(&aes.status));
    summary.insert("uep".into(), uep.unitary.into());
    p.put("summary", &summary);
    Ok(())
}

fn nindex(p: &mut Partial, ch: &Channel, cfg: &Config) -> Result<(), Failure> {
    require_valid(p, ch, &cfg.tol)?;
    let ni = p.step("n_index", n_index(ch, cfg.n_max, &cfg.tol))?;
    let mut summary = Map::new();
    summary.insert("n_index".into(), n_index_label(ni.kind).into());
    p.put("summary", &summary);
    Ok(())
}

#[derive(Serialize)]
struct BlockOut {
    d1: usize,
    d2: usize,
    rho: MatrixJson,
}

#[derive(Serialize)]
struct StructureOut {
    k_dim: usize,
    blocks: Vec<BlockOut>,
    perm: Vec<usize>,
    /// Fixed up to a global phase.
    unitaries: Vec<MatrixJson>,
    closure_residual: f64,
    reconstruction_residual: f64,
    seed: u64,
}

fn structure(p: &mut Partial, ch: &Channel, cfg: &Config) -> Result<(), Failure> {
    let tol = &cfg.tol;
    require_valid(p, ch, tol)?;
    let spec = p.step("spectrum", spectral::spectrum(ch, tol))?;
    let mut summary = Map::new();
    summary.insert("peripheral_count".into(), spec.peripheral_count().into());
    let found = match cfg.seed {
        Some(s) => fixed_structure_seeded(ch, tol, s),
        None => fixed_structure(ch, tol),
    };
    let fs = match found {
        Ok(fs) => fs,
        Err(e) => {
            p.put("summary", &summary);
            return Err(Failure::from_error(&e));
        }
    };
    let out = StructureOut {
        k_dim: fs.k_dim,
        blocks: fs.blocks.iter().map(|b| BlockOut { d1: b.d1, d2: b.d2, rho: MatrixJson::from_cmat(&b.rho) }).collect(),
        perm: fs.perm.clone(),
        unitaries: fs.unitaries.iter().map(MatrixJson::from_cmat).collect(),
        closure_residual: fs.closure_residual,
        reconstruction_residual: fs.reconstruction_residual,
        seed: fs.seed,
    };
    p.put("structure", &out);
    let shapes: Vec<String> = fs.blocks.iter().map(|b| format!("{}x{}", b.d1, b.d2)).collect();
    let perm: Vec<String> = fs.perm.iter().map(|i| i.to_string()).collect();
    summary.insert("blocks".into(), shapes.join(" ").into());
    summary.insert("perm".into(), perm.join(" ").into());
    p.put("summary", &summary);
    Ok(())
}

pub fn run_file(cmd: ReportCommand, path: &Path, cfg: &Config) -> Report {
    let started = Instant::now();
    let unix_time_s = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let (input, loaded) = load(path);
    let mut partial = Partial(Map::new());
    let error = match loaded {
        Err(f) => Some(f),
        Ok(ch) => {
            partial.put("d", &ch.dim());
            let outcome = match cmd {
                ReportCommand::Validate => validate(&mut partial, &ch, cfg),
                ReportCommand::Classify => classify(&mut partial, &ch, cfg),
                ReportCommand::NIndex => nindex(&mut partial, &ch, cfg),
                ReportCommand::Structure => structure(&mut partial, &ch, cfg),
            };
            outcome.err()
        }
    };
    let timing = cfg.timestamp.then(|| Timing { unix_time_s, elapsed_s: started.elapsed().as_secs_f64() });
    Report { tool: cfg.tool(cmd.name()), input, results: Value::Object(partial.0), error, timing }
}

fn cell(v: Option<&Value>) -> String {
    match v {
        None | Some(Value::Null) => String::new(),
        Some(Value::String(s)) => s.clone(),
        Some(Value::Number(n)) if n.is_f64() => fmt_f64(n.as_f64().unwrap_or(f64::NAN)),
        Some(other) => other.to_string(),
    }
}

pub fn csv_row(cmd: ReportCommand, rep: &Report) -> Vec<String> {
    let status = serde_json::to_value(rep.status()).expect("plain data");
    let mut row = vec![rep.input.path.clone(), rep.input.sha256.clone().unwrap_or_default(), cell(Some(&status))];
    row.extend(cmd.columns().iter().map(|(_, ptr)| cell(rep.results.pointer(ptr))));
    row.push(rep.error.as_ref().map(|f| f.message.clone()).unwrap_or_default());
    row
}
