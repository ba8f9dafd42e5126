//! Check reports, their serialized renderings, and the golden-value
//! store backing the regression checks.
//!
//! Everything here is deterministic: map-ordered iteration, fixed field
//! order, and canonical scalar strings, so two runs over the same build
//! produce byte-identical output.

use crate::exterior::secondary::SecondaryData;
use crate::exterior::FormExpr;
use crate::reduce::Reduction;
use crate::scalar::ScalarExpr;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("cannot read golden file: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed golden file: {0}")]
    Parse(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

/// One verification result. `payload` carries the check-specific data
/// (computed values, counts, rendered forms); `golden_anchor` and
/// `diff` appear only on golden-backed comparisons.
#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub status: Status,
    pub payload: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub golden_anchor: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diff: Option<String>,
}

impl CheckReport {
    pub fn pass(check: impl Into<String>, payload: serde_json::Value) -> CheckReport {
        CheckReport {
            check: check.into(),
            status: Status::Pass,
            payload,
            golden_anchor: None,
            diff: None,
        }
    }

    pub fn fail(check: impl Into<String>, payload: serde_json::Value, diff: String) -> CheckReport {
        CheckReport {
            check: check.into(),
            status: Status::Fail,
            payload,
            golden_anchor: None,
            diff: Some(diff),
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

/// Renders a report list as pretty JSON with a stable layout.
pub fn render_json(reports: &[CheckReport]) -> String {
    let mut out = serde_json::to_string_pretty(reports).expect("report serialization");
    out.push('\n');
    out
}

/// Structured rendering of a form: degree plus one record per wedge
/// monomial in canonical order.
pub fn form_json(f: &FormExpr) -> serde_json::Value {
    let terms: Vec<serde_json::Value> = f
        .terms()
        .map(|(mono, c)| {
            let legs: Vec<String> = mono.iter().map(|s| s.to_string()).collect();
            serde_json::json!({
                "monomial": if legs.is_empty() { "1".to_string() } else { legs.join("∧") },
                "coeff": c.canonical_string(),
            })
        })
        .collect();
    serde_json::json!({ "degree": f.degree(), "terms": terms })
}

/// Transliterates a canonical rendering into LaTeX math source. Greek
/// letters become macros, combining macrons become `\bar{..}`, wedge
/// and product dots become their macros, and exponents are braced.
pub fn latex(s: &str) -> String {
    const MACRON: char = '\u{0304}';
    let mut out = String::with_capacity(s.len() * 2);
    let chars: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let mapped: Option<String> = match c {
            'σ' => Some("\\sigma".into()),
            'ρ' => Some("\\rho".into()),
            'ζ' => Some("\\zeta".into()),
            'λ' => Some("\\lambda".into()),
            'α' => Some("\\alpha".into()),
            'β' => Some("\\beta".into()),
            'γ' => Some("\\gamma".into()),
            '∧' => Some("\\wedge ".into()),
            '·' => Some("\\cdot ".into()),
            '*' => Some("\\cdot ".into()),
            _ => None,
        };
        let token = match mapped {
            Some(t) => t,
            None => c.to_string(),
        };
        if i + 1 < chars.len() && chars[i + 1] == MACRON {
            out.push_str(&format!("\\bar{{{}}}", token.trim_end()));
            i += 2;
            continue;
        }
        if c == '^' {
            // brace the whole (possibly signed, multi-digit) exponent
            let mut j = i + 1;
            let mut exp = String::new();
            if j < chars.len() && chars[j] == '-' {
                exp.push('-');
                j += 1;
            }
            while j < chars.len() && chars[j].is_ascii_digit() {
                exp.push(chars[j]);
                j += 1;
            }
            out.push_str(&format!("^{{{}}}", exp));
            i = j;
            continue;
        }
        out.push_str(&token);
        i += 1;
    }
    out
}

pub fn latex_scalar(e: &ScalarExpr) -> String {
    latex(&e.canonical_string())
}

pub fn latex_form(f: &FormExpr) -> String {
    latex(&f.to_string())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GoldenEntry {
    pub id: String,
    pub anchor: String,
    pub value: String,
}

#[derive(Serialize, Deserialize)]
struct GoldenDoc {
    version: u32,
    entries: Vec<GoldenEntry>,
}

/// Frozen engine values keyed by id, each with a short human anchor
/// saying which quantity it pins.
pub struct GoldenSet {
    pub version: u32,
    entries: BTreeMap<String, GoldenEntry>,
}

const BUILTIN_GOLDENS: &str = include_str!("../data/goldens.json");

impl GoldenSet {
    pub fn parse(doc: &str) -> Result<GoldenSet, ReportError> {
        let doc: GoldenDoc =
            serde_json::from_str(doc).map_err(|e| ReportError::Parse(e.to_string()))?;
        let mut entries = BTreeMap::new();
        for e in doc.entries {
            if entries.insert(e.id.clone(), e).is_some() {
                return Err(ReportError::Parse("duplicate golden id".into()));
            }
        }
        Ok(GoldenSet { version: doc.version, entries })
    }

    pub fn builtin() -> GoldenSet {
        GoldenSet::parse(BUILTIN_GOLDENS).expect("builtin goldens")
    }

    pub fn load(path: &std::path::Path) -> Result<GoldenSet, ReportError> {
        GoldenSet::parse(&std::fs::read_to_string(path)?)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(|s| s.as_str())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Compares an engine value against the stored one. A missing id is
    /// a failure: the golden file is the complete contract.
    pub fn check(&self, id: &str, actual: &str) -> CheckReport {
        let check = format!("golden.{}", id);
        match self.entries.get(id) {
            None => CheckReport::fail(
                check,
                serde_json::json!({ "actual": actual }),
                format!("no golden entry with id {}", id),
            ),
            Some(entry) => {
                let payload = serde_json::json!({ "actual": actual, "expected": entry.value });
                if entry.value == actual {
                    CheckReport {
                        golden_anchor: Some(entry.anchor.clone()),
                        ..CheckReport::pass(check, payload)
                    }
                } else {
                    CheckReport {
                        golden_anchor: Some(entry.anchor.clone()),
                        ..CheckReport::fail(
                            check,
                            payload,
                            format!("expected {}, got {}", entry.value, actual),
                        )
                    }
                }
            }
        }
    }

    /// Serializes a fresh value map in the golden-file layout, using the
    /// stored anchors where ids match and the id itself otherwise.
    pub fn snapshot(&self, values: &BTreeMap<String, String>) -> String {
        let entries: Vec<GoldenEntry> = values
            .iter()
            .map(|(id, value)| GoldenEntry {
                id: id.clone(),
                anchor: self
                    .entries
                    .get(id)
                    .map(|e| e.anchor.clone())
                    .unwrap_or_else(|| id.clone()),
                value: value.clone(),
            })
            .collect();
        let doc = GoldenDoc { version: 1, entries };
        let mut out = serde_json::to_string_pretty(&doc).expect("golden serialization");
        out.push('\n');
        out
    }
}

/// Every golden-comparable engine value, keyed by the golden id.
pub fn check_values(sec: &SecondaryData, r: &Reduction) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    let mut put = |id: &str, v: String| {
        out.insert(id.to_string(), v);
    };
    put("secondary.E", sec.e_val.canonical_string());
    put("secondary.F", sec.f_val.canonical_string());
    put("secondary.G", sec.g_val.canonical_string());
    put("secondary.J", sec.j_val.canonical_string());
    put("secondary.K", sec.k_val.canonical_string());
    put("secondary.rule_count", sec.rules.len().to_string());

    let slot0 = |k: usize, i: usize, j: usize| {
        r.torsion0[k]
            .slots
            .get(&(i, j))
            .cloned()
            .unwrap_or_else(ScalarExpr::zero)
            .canonical_string()
    };
    put("torsion0.X2", slot0(1, 0, 2));
    put("torsion0.X3", slot0(1, 0, 3));
    put("torsion0.X4", slot0(1, 0, 4));
    put("torsion0.X6", slot0(1, 1, 3));
    put("torsion0.X7", slot0(1, 1, 4));
    put("torsion0.Y8", slot0(2, 2, 3));

    let n = &r.normalizations;
    put("normalization.b", n.b.canonical_string());
    put("normalization.c", n.c.canonical_string());
    put("normalization.d", n.d.canonical_string());
    put("normalization.e", n.e.canonical_string());
    put("normalization.b0", n.b0.canonical_string());
    put("normalization.c0", n.c0.canonical_string());
    put("normalization.d0", n.d0.canonical_string());
    put("normalization.e0", n.e0.canonical_string());
    for d in &n.diffs {
        out.insert(format!("normalization.{}_printed", d.name), d.printed.canonical_string());
        out.insert(format!("normalization.{}_diff", d.name), d.diff.canonical_string());
    }

    for (m, s) in r.lambda_shift.iter().take(5).enumerate() {
        out.insert(format!("lambda.shift{}", m), s.canonical_string());
    }
    for e in &r.invariants.entries {
        out.insert(format!("invariant.{}", e.name), e.value.canonical_string());
    }
    out
}
