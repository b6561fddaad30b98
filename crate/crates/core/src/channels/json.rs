//! JSON channel files.
//!
//! ```text
//! {"d": 2, "repr": {"kind": "kraus", "ops": [{"re": [[..]], "im": [[..]]}, ..]}}
//! {"d": 2, "repr": {"kind": "choi" | "super", "re": [[..]], "im": [[..]]}}
//! {"d": 2, "repr": {"kind": "bloch", "M": [[..], [..], [..]], "c": [x, y, z]}}
//! ```
//!
//! Matrices are row-major with split real and imaginary parts. An optional
//! `"provenance"` entry records how the channel was built (`holevo`,
//! `unitary`, `simple_aes`, `random`, `family`). Everything except `family`
//! is rebuilt on reading and must reproduce the channel.

use std::collections::BTreeMap;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::{cx, CMat, Error, Result};

use super::{random_cptp, simple_aes, AesBlock, Channel, HolevoForm, Provenance, SimpleAesData, SourceRepr};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ReprJson {
    Kraus {
        ops: Vec<MatrixJson>,
    },
    Choi {
        re: Vec<Vec<f64>>,
        im: Vec<Vec<f64>>,
    },
    Super {
        re: Vec<Vec<f64>>,
        im: Vec<Vec<f64>>,
    },
    Bloch {
        #[serde(rename = "M")]
        m: Vec<Vec<f64>>,
        c: Vec<f64>,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct AesBlockJson {
    pub d1: usize,
    pub d2: usize,
    pub rho: MatrixJson,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProvenanceJson {
    Holevo {
        states: Vec<MatrixJson>,
        effects: Vec<MatrixJson>,
    },
    Unitary {
        u: MatrixJson,
    },
    SimpleAes {
        blocks: Vec<AesBlockJson>,
        unitaries: Vec<MatrixJson>,
        perm: Vec<usize>,
    },
    Random {
        d: usize,
        kraus_rank: usize,
        seed: u64,
    },
    /// Not checked on reading.
    Family {
        name: String,
        params: BTreeMap<String, f64>,
    },
}

impl ProvenanceJson {
    pub fn from_provenance(p: &Provenance) -> ProvenanceJson {
        let mats = |v: &[CMat]| v.iter().map(MatrixJson::from_cmat).collect();
        match p {
            Provenance::Holevo(h) => ProvenanceJson::Holevo { states: mats(&h.states), effects: mats(&h.effects) },
            Provenance::Unitary(u) => ProvenanceJson::Unitary { u: MatrixJson::from_cmat(u) },
            Provenance::SimpleAes(data) => ProvenanceJson::SimpleAes {
                blocks: data.blocks.iter().map(|b| AesBlockJson { d1: b.d1, d2: b.d2, rho: MatrixJson::from_cmat(&b.rho) }).collect(),
                unitaries: mats(&data.unitaries),
                perm: data.perm.clone(),
            },
            Provenance::Random { d, kraus_rank, seed } => ProvenanceJson::Random { d: *d, kraus_rank: *kraus_rank, seed: *seed },
            Provenance::Family { name, params } => ProvenanceJson::Family { name: name.clone(), params: params.iter().cloned().collect() },
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ChannelJson {
    pub d: usize,
    pub repr: ReprJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<ProvenanceJson>,
}

impl MatrixJson {
    pub fn from_cmat(m: &CMat) -> MatrixJson {
        let rows = |f: fn(&crate::C64) -> f64| (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect()).collect();
        MatrixJson { re: rows(|z| z.re), im: rows(|z| z.im) }
    }

    pub fn to_cmat(&self, n: usize, what: &str) -> Result<CMat> {
        split_to_cmat(&self.re, &self.im, n, what)
    }
}

fn must_reproduce(ch: &Channel, rebuilt: &Channel, kind: &str) -> Result<()> {
    if rebuilt.dim() != ch.dim() {
        return Err(Error::Schema(format!("{kind} provenance has dimension {} but the channel has {}", rebuilt.dim(), ch.dim())));
    }
    let dist = crate::matcore::frobenius(&(rebuilt.superop() - ch.superop()));
    if dist > 1e-9 * ch.superop().norm().max(1.0) {
        return Err(Error::Schema(format!("{kind} provenance does not reproduce the channel (distance {dist:e})")));
    }
    Ok(())
}

fn split_to_cmat(re: &[Vec<f64>], im: &[Vec<f64>], n: usize, what: &str) -> Result<CMat> {
    if re.len() != n || im.len() != n || re.iter().chain(im).any(|r| r.len() != n) {
        return Err(Error::Schema(format!("{what} must be {n}×{n} in both re and im")));
    }
    let m = CMat::from_fn(n, n, |i, j| cx(re[i][j], im[i][j]));
    if !crate::matcore::is_finite(&m) {
        return Err(Error::NonFinite);
    }
    Ok(m)
}

pub fn parse_channel(text: &str) -> Result<Channel> {
    let doc: ChannelJson = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    channel_from_json(&doc)
}

pub fn channel_from_json(doc: &ChannelJson) -> Result<Channel> {
    let d = doc.d;
    if d == 0 {
        return Err(Error::Schema("d must be positive".into()));
    }
    let ch = match &doc.repr {
        ReprJson::Kraus { ops } => {
            if ops.is_empty() {
                return Err(Error::Schema("kraus repr needs at least one operator".into()));
            }
            let mats = ops.iter().enumerate().map(|(k, m)| m.to_cmat(d, &format!("Kraus operator {k}"))).collect::<Result<Vec<_>>>()?;
            Channel::from_kraus(&mats)?
        }
        ReprJson::Choi { re, im } => Channel::from_choi(&split_to_cmat(re, im, d * d, "choi")?)?,
        ReprJson::Super { re, im } => Channel::from_super(&split_to_cmat(re, im, d * d, "super")?)?,
        ReprJson::Bloch { m, c } => {
            if d != 2 {
                return Err(Error::Schema(format!("bloch repr requires d = 2, got {d}")));
            }
            if m.len() != 3 || m.iter().any(|r| r.len() != 3) || c.len() != 3 {
                return Err(Error::Schema("bloch repr needs a 3×3 M and a 3-vector c".into()));
            }
            let mm = Matrix3::from_fn(|i, j| m[i][j]);
            Channel::from_bloch(mm, Vector3::new(c[0], c[1], c[2]))?
        }
    };
    let Some(prov) = &doc.provenance else {
        return Ok(ch);
    };
    let p = match prov {
        ProvenanceJson::Holevo { states, effects } => {
            let h = HolevoForm {
                states: states.iter().map(|m| m.to_cmat(d, "holevo state")).collect::<Result<_>>()?,
                effects: effects.iter().map(|m| m.to_cmat(d, "holevo effect")).collect::<Result<_>>()?,
            };
            h.validate(1e-9)?;
            must_reproduce(&ch, &Channel::with_superop(d, h.superop(), SourceRepr::Super), "holevo")?;
            Provenance::Holevo(h)
        }
        ProvenanceJson::Unitary { u } => {
            let u = u.to_cmat(d, "unitary")?;
            must_reproduce(&ch, &super::unitary_channel(&u)?, "unitary")?;
            Provenance::Unitary(u)
        }
        ProvenanceJson::SimpleAes { blocks, unitaries, perm } => {
            let data = SimpleAesData {
                blocks: blocks
                    .iter()
                    .map(|b| Ok(AesBlock { d1: b.d1, d2: b.d2, rho: b.rho.to_cmat(b.d2, "simple_aes rho")? }))
                    .collect::<Result<_>>()?,
                unitaries: unitaries.iter().zip(blocks).map(|(u, b)| u.to_cmat(b.d1, "simple_aes unitary")).collect::<Result<_>>()?,
                perm: perm.clone(),
            };
            must_reproduce(&ch, &simple_aes(data.clone())?, "simple_aes")?;
            Provenance::SimpleAes(data)
        }
        ProvenanceJson::Random { d: rd, kraus_rank, seed } => {
            must_reproduce(&ch, &random_cptp(*rd, *kraus_rank, *seed)?, "random")?;
            Provenance::Random { d: *rd, kraus_rank: *kraus_rank, seed: *seed }
        }
        ProvenanceJson::Family { name, params } => {
            Provenance::Family { name: name.clone(), params: params.iter().map(|(k, v)| (k.clone(), *v)).collect() }
        }
    };
    Ok(ch.with_provenance(p))
}

/// Serializes in the representation the channel was built from (Bloch when
/// it came from one, otherwise the superoperator or Kraus set).
pub fn channel_to_json(ch: &Channel) -> ChannelJson {
    let repr = match ch.source() {
        SourceRepr::Bloch => {
            let b = ch.bloch().expect("bloch-sourced channel has a Bloch form");
            ReprJson::Bloch { m: (0..3).map(|i| (0..3).map(|j| b.m[(i, j)]).collect()).collect(), c: b.c.iter().copied().collect() }
        }
        SourceRepr::Kraus => ReprJson::Kraus { ops: ch.kraus().expect("kraus-sourced").iter().map(MatrixJson::from_cmat).collect() },
        SourceRepr::Choi => {
            let m = MatrixJson::from_cmat(ch.choi());
            ReprJson::Choi { re: m.re, im: m.im }
        }
        SourceRepr::Super => {
            let m = MatrixJson::from_cmat(ch.superop());
            ReprJson::Super { re: m.re, im: m.im }
        }
    };
    ChannelJson { d: ch.dim(), repr, provenance: ch.provenance().map(ProvenanceJson::from_provenance) }
}

pub fn to_json_string(ch: &Channel) -> String {
    serde_json::to_string_pretty(&channel_to_json(ch)).expect("plain data serializes")
}
