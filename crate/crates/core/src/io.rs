//! File formats: strategy JSON in, JSON and CSV out.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::continuous::ResponseProfile;
use crate::error::{Error, Result};
use crate::game::HStrategy;
use crate::pvariant::CurvePoint;
use crate::rat::{self, Rat};
use crate::recursive::BoundEntry;
use crate::search::SearchResult;

/// `{"h": 3, "k1": [...], "k2": [...]}`; `k2` defaults to `k1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrategyFile {
    pub h: u32,
    pub k1: Vec<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k2: Option<Vec<u8>>,
}

impl StrategyFile {
    pub fn from_pair(k1: &HStrategy, k2: &HStrategy) -> Self {
        StrategyFile {
            h: k1.h(),
            k1: k1.table().to_vec(),
            k2: (k1 != k2).then(|| k2.table().to_vec()),
        }
    }

    pub fn into_pair(self) -> Result<(HStrategy, HStrategy)> {
        let k2 = self.k2.unwrap_or_else(|| self.k1.clone());
        Ok((HStrategy::new(self.h, self.k1)?, HStrategy::new(self.h, k2)?))
    }
}

pub fn parse_strategy_json(text: &str) -> Result<(HStrategy, HStrategy)> {
    let file: StrategyFile = serde_json::from_str(text)?;
    file.into_pair()
}

pub fn load_strategy(path: &Path) -> Result<(HStrategy, HStrategy)> {
    parse_strategy_json(&std::fs::read_to_string(path)?)
}

pub fn strategy_json(k1: &HStrategy, k2: &HStrategy) -> String {
    serde_json::to_string(&StrategyFile::from_pair(k1, k2)).expect("plain data serializes")
}

/// `{"value": "n/d", "value_f64": x}`.
pub fn rat_json(r: &Rat) -> Value {
    json!({ "value": rat::to_fraction_string(r), "value_f64": rat::to_f64(r) })
}

pub fn search_result_json(result: &SearchResult, seed: Option<u64>) -> Value {
    let (k1, k2) = &result.best_pair;
    json!({
        "h": result.h(),
        "value": rat::to_fraction_string(&result.best_value),
        "value_num": result.best_value.numer().to_string(),
        "value_den": result.best_value.denom().to_string(),
        "value_f64": rat::to_f64(&result.best_value),
        "k1": k1.table(),
        "k2": k2.table(),
        "seed": seed,
        "restarts_used": result.restarts_used,
        "evaluations": result.evaluations,
    })
}

pub fn bounds_csv(table: &BTreeMap<u32, BoundEntry>) -> String {
    let mut out = String::from("h,numerator,denominator,float64,provenance\n");
    for (h, e) in table {
        writeln!(
            out,
            "{h},{},{},{},{}",
            e.value.numer(),
            e.value.denom(),
            rat::to_f64(&e.value),
            e.provenance
        )
        .expect("writing to a String");
    }
    out
}

pub fn curves_csv(rows: &[CurvePoint]) -> String {
    let mut out = String::from("p,U1,U2,U3,K5\n");
    for r in rows {
        writeln!(out, "{},{},{},{},{}", rat::to_f64(&r.p), r.u1, r.u2, r.u3, r.k5)
            .expect("writing to a String");
    }
    out
}

pub fn p_m_csv(rows: &[(u64, f64)]) -> String {
    let mut out = String::from("m,p_m\n");
    for (m, v) in rows {
        writeln!(out, "{m},{v}").expect("writing to a String");
    }
    out
}

pub fn response_csv(profile: &ResponseProfile) -> String {
    let mut out = String::from("x_lo,x_hi,argmax_u,value\n");
    for c in &profile.cells {
        writeln!(out, "{},{},{},{}", c.x_lo, c.x_hi, c.best_u, c.value)
            .expect("writing to a String");
    }
    out
}

/// Parses a probability given as `a/b` or a decimal.
pub fn parse_probability(s: &str) -> Result<Rat> {
    let p = rat::parse(s)?;
    if !rat::in_open_unit_interval(&p) {
        return Err(Error::ProbabilityOutOfRange(s.to_string()));
    }
    Ok(p)
}
