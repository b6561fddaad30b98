//! Channel files for the built-in families.

use std::collections::BTreeMap;

use clap::ValueEnum;

use qchan::channels::json::channel_to_json;
use qchan::channels::{
    amplitude_damping, depolarizing, holevo_channel, phi_minus, phi_plus, random_cptp, random_density, random_unitary, simple_aes,
    unitary_channel, AesBlock,
};
use qchan::classify::{peripheral_channel_from_data, PeripheralCycle};
use qchan::{CMat, Channel, HolevoForm, Provenance, SimpleAesData, C64};

use crate::error::CliError;
use crate::report::to_json_bytes;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum Family {
    PhiPlus,
    PhiMinus,
    #[value(alias = "ad")]
    AmplitudeDamping,
    Depolarizing,
    Holevo,
    SimpleAes,
    Peripheral,
    Random,
    Unitary,
}

impl Family {
    /// Accepted keys and, for optional ones, their default.
    fn keys(self) -> &'static [(&'static str, Option<&'static str>)] {
        match self {
            Family::PhiPlus => &[("lambda", None), ("theta", Some("0")), ("alpha", Some("0")), ("mu", None)],
            Family::PhiMinus => &[("lambda", None), ("theta", Some("0"))],
            Family::AmplitudeDamping => &[("p", None)],
            Family::Depolarizing => &[("d", None), ("lambda", None)],
            Family::Holevo => &[("d", None), ("outcomes", None), ("seed", None)],
            Family::SimpleAes => &[("blocks", None), ("perm", None), ("seed", None)],
            Family::Peripheral => &[("cycles", None), ("d", Some(""))],
            Family::Random => &[("d", None), ("rank", None), ("seed", None)],
            Family::Unitary => &[("d", None), ("seed", None)],
        }
    }
}

fn canonical_key(k: &str) -> &str {
    match k {
        "λ" => "lambda",
        "θ" => "theta",
        "α" => "alpha",
        "μ" => "mu",
        other => other,
    }
}

struct Params {
    family: Family,
    values: BTreeMap<String, String>,
}

impl Params {
    /// Parses `key=value` words, or `key value` pairs; a bare leading value
    /// belongs to the family's first key. `seed` falls back to the global
    /// `--seed`, then 0.
    fn parse(family: Family, words: &[String], seed: Option<u64>) -> Result<Params, CliError> {
        let mut values = BTreeMap::new();
        let is_key = |w: &str| family.keys().iter().any(|(name, _)| *name == canonical_key(w));
        let mut rest = words.iter().peekable();
        if let Some(first) = rest.next_if(|w| !w.contains('=') && !is_key(w)) {
            values.insert(family.keys()[0].0.to_string(), first.clone());
        }
        while let Some(w) = rest.next() {
            let (k, v) = match w.split_once('=') {
                Some((k, v)) => (canonical_key(k).to_string(), v.to_string()),
                None => match rest.next() {
                    Some(v) => (canonical_key(w).to_string(), v.clone()),
                    None => return Err(CliError::Usage(format!("parameter `{w}` has no value"))),
                },
            };
            if !family.keys().iter().any(|(name, _)| *name == k) {
                let known: Vec<&str> = family.keys().iter().map(|(n, _)| *n).collect();
                return Err(CliError::Usage(format!("unknown parameter `{k}` for this family (expected one of {})", known.join(", "))));
            }
            if values.insert(k.clone(), v).is_some() {
                return Err(CliError::Usage(format!("parameter `{k}` given twice")));
            }
        }
        for (k, default) in family.keys() {
            if values.contains_key(*k) {
                continue;
            }
            match (*k, default) {
                ("seed", _) => {
                    values.insert("seed".into(), seed.unwrap_or(0).to_string());
                }
                (_, Some(dv)) => {
                    values.insert(k.to_string(), dv.to_string());
                }
                (_, None) => return Err(CliError::Usage(format!("missing parameter `{k}`"))),
            }
        }
        Ok(Params { family, values })
    }

    fn raw(&self, k: &str) -> &str {
        self.values.get(k).map(String::as_str).unwrap_or("")
    }

    fn num<T: std::str::FromStr>(&self, k: &str) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(k).trim().parse().map_err(|e| CliError::Usage(format!("parameter `{k}` = `{}`: {e}", self.raw(k))))
    }

    fn list<T: std::str::FromStr>(&self, k: &str, text: &str) -> Result<Vec<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        text.split(',').map(|s| s.trim().parse().map_err(|e| CliError::Usage(format!("parameter `{k}`: `{s}`: {e}")))).collect()
    }
}

/// Blocks `"d1,d2;d1,d2"`; unitaries and block states are drawn from `seed`.
fn simple_aes_data(p: &Params) -> Result<SimpleAesData, CliError> {
    let seed: u64 = p.num("seed")?;
    let mut blocks = Vec::new();
    let mut unitaries = Vec::new();
    for (i, part) in p.raw("blocks").split(';').enumerate() {
        let dims: Vec<usize> = p.list("blocks", part)?;
        let [d1, d2] = dims[..] else {
            return Err(CliError::Usage(format!("block `{part}` must be `d1,d2`")));
        };
        if d1 == 0 || d2 == 0 {
            return Err(CliError::Usage(format!("block `{part}` has a zero dimension")));
        }
        let i = i as u64;
        let rho = if d2 == 1 { CMat::identity(1, 1) } else { random_density(d2, seed.wrapping_add(1000 + i)) };
        blocks.push(AesBlock { d1, d2, rho });
        unitaries.push(random_unitary(d1, seed.wrapping_add(i)));
    }
    let perm = p.list("perm", p.raw("perm"))?;
    Ok(SimpleAesData { blocks, unitaries, perm })
}

/// Cycles `"period:f,f;period:f"` with phases `e^{2πi f}`.
fn cycles(p: &Params) -> Result<Vec<PeripheralCycle>, CliError> {
    p.raw("cycles")
        .split(';')
        .map(|part| {
            let (period, fracs) =
                part.split_once(':').ok_or_else(|| CliError::Usage(format!("cycle `{part}` must be `period:phase,...`")))?;
            let period = period.trim().parse().map_err(|e| CliError::Usage(format!("cycle period `{period}`: {e}")))?;
            let fracs: Vec<f64> = p.list("cycles", fracs)?;
            let phases = fracs.iter().map(|f| C64::from_polar(1.0, std::f64::consts::TAU * f)).collect();
            Ok(PeripheralCycle { period, phases })
        })
        .collect()
}

fn holevo(p: &Params) -> Result<Channel, CliError> {
    let d: usize = p.num("d")?;
    let k: usize = p.num("outcomes")?;
    let seed: u64 = p.num("seed")?;
    // effects K†K from a random Kraus set sum to the identity
    let kraus = random_cptp(d, k, seed)?;
    let effects: Vec<CMat> = kraus.kraus()?.iter().map(|m| m.adjoint() * m).collect();
    let states = (0..k as u64).map(|i| random_density(d, seed.wrapping_add(1 + i))).collect();
    Ok(holevo_channel(&HolevoForm { states, effects })?)
}

pub fn build(family: Family, words: &[String], seed: Option<u64>) -> Result<Channel, CliError> {
    let p = Params::parse(family, words, seed)?;
    let ch = match p.family {
        Family::PhiPlus => phi_plus(p.num("lambda")?, p.num("theta")?, p.num("alpha")?, p.num("mu")?)?,
        Family::PhiMinus => phi_minus(p.num("lambda")?, p.num("theta")?)?,
        Family::AmplitudeDamping => amplitude_damping(p.num("p")?)?,
        Family::Depolarizing => depolarizing(p.num("d")?, p.num("lambda")?)?,
        Family::Holevo => holevo(&p)?,
        Family::SimpleAes => simple_aes(simple_aes_data(&p)?)?,
        Family::Peripheral => {
            let d = if p.raw("d").is_empty() { None } else { Some(p.num("d")?) };
            let ch = peripheral_channel_from_data(&cycles(&p)?, d)?;
            if ch.provenance().is_some() {
                ch
            } else {
                let d = ch.dim() as f64;
                ch.with_provenance(Provenance::Family { name: "peripheral".into(), params: vec![("d".into(), d)] })
            }
        }
        Family::Random => random_cptp(p.num("d")?, p.num("rank")?, p.num("seed")?)?,
        Family::Unitary => {
            let d: usize = p.num("d")?;
            if d == 0 {
                return Err(CliError::Usage("unitary needs d ≥ 1".into()));
            }
            unitary_channel(&random_unitary(d, p.num("seed")?))?
        }
    };
    Ok(ch)
}

pub fn file_bytes(ch: &Channel) -> Vec<u8> {
    to_json_bytes(&channel_to_json(ch))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn greek_and_word_forms_agree() {
        let a = build(Family::PhiPlus, &words("λ=0.8 θ=0.1 α=0.05 μ=0.7"), None).unwrap();
        let b = build(Family::PhiPlus, &words("lambda=0.8 theta=0.1 alpha=0.05 mu=0.7"), None).unwrap();
        assert_eq!(a.superop(), b.superop());
    }

    #[test]
    fn bad_parameters_are_usage_errors() {
        assert!(matches!(build(Family::AmplitudeDamping, &words("q=0.5"), None), Err(CliError::Usage(_))));
        assert!(matches!(build(Family::AmplitudeDamping, &words(""), None), Err(CliError::Usage(_))));
        assert!(matches!(build(Family::AmplitudeDamping, &words("p=x"), None), Err(CliError::Usage(_))));
        assert!(matches!(build(Family::SimpleAes, &words("blocks=2 perm=0"), None), Err(CliError::Usage(_))));
    }

    #[test]
    fn paired_words_and_seed_fallback() {
        let a = build(Family::SimpleAes, &words("2,1;1,1 perm 0,1"), Some(5)).unwrap();
        let b = build(Family::SimpleAes, &words("blocks=2,1;1,1 perm=0,1 seed=5"), None).unwrap();
        assert_eq!(a.superop(), b.superop());
        assert_eq!(a.dim(), 3);
    }

    #[test]
    fn peripheral_keeps_provenance_when_padded() {
        let ch = build(Family::Peripheral, &words("cycles=2:0,0.25 d=5"), None).unwrap();
        assert_eq!(ch.dim(), 5);
        assert!(ch.is_cptp());
        assert!(ch.provenance().is_some());
    }
}
