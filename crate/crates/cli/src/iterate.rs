//! Entanglement diagnostics along the power sequence of one channel.

use serde::Serialize;

use qchan::entwit::{negativity, ppt_min_eig, reshuffling_norm};
use qchan::{Channel, Tolerances};

use crate::report::fmt_f64;

/// Longest trace `iterate` will produce.
pub const MAX_POWERS: u64 = 10_000;

pub const COLUMNS: [&str; 5] = ["n", "negativity", "ppt_min_eig", "reshuffling_norm", "min_choi_eig"];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub n: u64,
    pub negativity: f64,
    pub ppt_min_eig: f64,
    pub reshuffling_norm: f64,
    pub min_choi_eig: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    Constant,
    Nonincreasing,
    Nondecreasing,
    Neither,
}

impl Trend {
    /// Trend of a sequence, ignoring steps smaller than `slack`.
    pub fn of(xs: &[f64], slack: f64) -> Trend {
        let up = xs.windows(2).all(|w| w[1] >= w[0] - slack);
        let down = xs.windows(2).all(|w| w[1] <= w[0] + slack);
        match (up, down) {
            (true, true) => Trend::Constant,
            (false, true) => Trend::Nonincreasing,
            (true, false) => Trend::Nondecreasing,
            (false, false) => Trend::Neither,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Trend::Constant => "constant",
            Trend::Nonincreasing => "nonincreasing",
            Trend::Nondecreasing => "nondecreasing",
            Trend::Neither => "neither",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Monotone {
    pub negativity: Trend,
    pub ppt_min_eig: Trend,
    pub reshuffling_norm: Trend,
    pub min_choi_eig: Trend,
}

impl Monotone {
    pub fn of(rows: &[Row], slack: f64) -> Monotone {
        let col = |f: fn(&Row) -> f64| Trend::of(&rows.iter().map(f).collect::<Vec<_>>(), slack);
        Monotone {
            negativity: col(|r| r.negativity),
            ppt_min_eig: col(|r| r.ppt_min_eig),
            reshuffling_norm: col(|r| r.reshuffling_norm),
            min_choi_eig: col(|r| r.min_choi_eig),
        }
    }

    pub fn comment(&self) -> String {
        format!(
            "# monotone: negativity={} ppt_min_eig={} reshuffling_norm={} min_choi_eig={}\n",
            self.negativity.name(),
            self.ppt_min_eig.name(),
            self.reshuffling_norm.name(),
            self.min_choi_eig.name()
        )
    }
}

pub fn trace(ch: &Channel, n_max: u64, tol: &Tolerances) -> qchan::Result<Vec<Row>> {
    let d = ch.dim();
    let mut rows = Vec::with_capacity(n_max as usize);
    let mut cur = ch.clone();
    for n in 1..=n_max {
        if n > 1 {
            cur = ch.compose(&cur)?;
        }
        rows.push(Row {
            n,
            negativity: negativity(cur.choi(), d, d)?,
            ppt_min_eig: ppt_min_eig(&cur),
            reshuffling_norm: reshuffling_norm(&cur),
            min_choi_eig: cur.validate_cptp_with(tol).min_choi_eig,
        });
    }
    Ok(rows)
}

pub fn to_csv(rows: &[Row], monotone: &Monotone) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(COLUMNS).expect("in-memory write");
    for r in rows {
        let rec = [r.n.to_string(), fmt_f64(r.negativity), fmt_f64(r.ppt_min_eig), fmt_f64(r.reshuffling_norm), fmt_f64(r.min_choi_eig)];
        w.write_record(&rec).expect("in-memory write");
    }
    let mut out = w.into_inner().expect("in-memory flush");
    out.extend_from_slice(monotone.comment().as_bytes());
    out
}
