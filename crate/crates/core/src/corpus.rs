//! Built-in example pairs with their expected verdicts.

use serde_json::Value;

use crate::conjugacy::{decide, replay_witness, Certificate, Gamma, Relation, Verdict, Witness, DEFAULT_DEPTH};
use crate::error::{Error, Result};
use crate::io::{certificate_from_value, gamma_from_value, parse_json, system_from_value};
use crate::wps::Wps;

const SOURCES: &[&str] = &[
    include_str!("../corpus/cpc-distinct-btc.json"),
    include_str!("../corpus/not-weighted-orbit-conj.json"),
    include_str!("../corpus/different-invariants.json"),
    include_str!("../corpus/different-invariants-early-switch.json"),
    include_str!("../corpus/half-maps-conjugacy.json"),
    include_str!("../corpus/no-coinciding.json"),
    include_str!("../corpus/matrix-collapse.json"),
    include_str!("../corpus/matrix-non-iso.json"),
    include_str!("../corpus/graph-mf.json"),
];

/// What an entry checks: one relation, or the bundled certificate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Check {
    Relation(Relation),
    Certificate,
}

impl Check {
    pub fn name(&self) -> &'static str {
        match self {
            Check::Relation(r) => r.name(),
            Check::Certificate => "certificate",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Entry {
    pub name: String,
    pub summary: String,
    pub a: Wps,
    pub b: Wps,
    pub gamma: Option<Gamma>,
    pub certificate: Option<Certificate>,
    /// Expected verdict names (`holds`, `fails`, `inconclusive`) per check.
    pub expect: Vec<(Check, String)>,
    pub source: Value,
}

/// Outcome of one check of an entry.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub check: Check,
    pub expected: String,
    pub verdict: Verdict,
    pub gamma: Option<Gamma>,
    /// `Some(true)` when a failure witness was re-verified independently.
    pub replayed: Option<bool>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.verdict.name() == self.expected && self.replayed != Some(false)
    }
}

fn parse_entry(text: &str) -> Result<Entry> {
    let v = parse_json(text)?;
    let get = |k: &str| v.get(k).ok_or_else(|| Error::invalid(format!("corpus entry lacks `{k}`")));
    let a = system_from_value(get("a")?)?;
    let b = system_from_value(get("b")?)?;
    let gamma = v.get("gamma").map(|g| gamma_from_value(g, &a, &b, "gamma")).transpose()?;
    let certificate = v.get("certificate").map(|c| certificate_from_value(c, &a, &b)).transpose()?;
    let mut expect = Vec::new();
    for (k, e) in get("expect")?.as_object().into_iter().flatten() {
        let check = match k.as_str() {
            "graph" => Check::Relation(Relation::Graph),
            "btc" => Check::Relation(Relation::BranchTransition),
            "woc" => Check::Relation(Relation::WeightedOrbit),
            "certificate" => Check::Certificate,
            other => return Err(Error::invalid(format!("unknown check `{other}`"))),
        };
        expect.push((check, e.as_str().unwrap_or_default().to_string()));
    }
    expect.sort_by_key(|(c, _)| match c {
        Check::Relation(Relation::Graph) => 0,
        Check::Relation(Relation::BranchTransition) => 1,
        Check::Relation(Relation::WeightedOrbit) => 2,
        Check::Certificate => 3,
    });
    Ok(Entry {
        name: get("name")?.as_str().unwrap_or_default().to_string(),
        summary: get("summary")?.as_str().unwrap_or_default().to_string(),
        a,
        b,
        gamma,
        certificate,
        expect,
        source: v,
    })
}

/// Every corpus entry, in a fixed order.
pub fn entries() -> Vec<Entry> {
    SOURCES.iter().map(|s| parse_entry(s).expect("built-in corpus entry parses")).collect()
}

pub fn names() -> Vec<String> {
    entries().into_iter().map(|e| e.name).collect()
}

pub fn entry(name: &str) -> Result<Entry> {
    entries()
        .into_iter()
        .find(|e| e.name == name)
        .ok_or_else(|| Error::Argument(format!("unknown example `{name}`; known: {}", names().join(", "))))
}

/// Runs every expected check of an entry, replaying failure witnesses.
pub fn run(entry: &Entry) -> Result<Vec<Outcome>> {
    let mut out = Vec::new();
    for (check, expected) in &entry.expect {
        let (verdict, gamma) = match check {
            Check::Relation(r) => {
                let d = decide(&entry.a, &entry.b, *r, entry.gamma.as_ref(), None, DEFAULT_DEPTH)?;
                (d.verdict, d.gamma)
            }
            Check::Certificate => {
                let cert = entry
                    .certificate
                    .as_ref()
                    .ok_or_else(|| Error::invalid(format!("{} expects a certificate check but has none", entry.name)))?;
                let d = decide(&entry.a, &entry.b, Relation::WeightedOrbit, None, Some(cert), DEFAULT_DEPTH)?;
                (d.verdict, Some(cert.gamma.clone()))
            }
        };
        let replayed = match (&verdict, &gamma) {
            (Verdict::Fails { witness: Witness::NoIsomorphism { .. }, .. }, _) => None,
            (Verdict::Fails { witness, .. }, Some(g)) => {
                let cert = match check {
                    Check::Certificate => entry.certificate.as_ref(),
                    _ => None,
                };
                Some(replay_witness(&entry.a, &entry.b, g, cert, witness)?)
            }
            _ => None,
        };
        out.push(Outcome { check: *check, expected: expected.clone(), verdict, gamma, replayed });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_entry_reproduces_its_expectations() {
        for e in entries() {
            for o in run(&e).unwrap() {
                assert!(o.passed(), "{} {}: expected {}, got {:?}", e.name, o.check.name(), o.expected, o.verdict);
            }
        }
    }
}
