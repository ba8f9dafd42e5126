//! Second-level structure: solving d² of the base coframe for the
//! torsion functions of the `T`-row brackets and for the first-order
//! relations that close the derivation algebra.

use super::structure::Structure;
use super::{FormExpr, FormSym};
use crate::rational::GaussRat;
use crate::scalar::derivation::RuleKey;
use crate::scalar::{BaseName, BaseSymbol, DerivationAlgebra, Letter, ScalarExpr};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExteriorError {
    #[error("slot {0} is not linear in {1}")]
    NonLinearSolve(String, String),
    #[error("expected zero slot is nonzero: {0}")]
    UnexpectedSlot(String),
    #[error("conjugation audit failed for {0}")]
    ConjugationAudit(String),
    #[error("derived rule right-hand side is reducible: {0}")]
    ReducibleRhs(String),
}

/// One oriented first-order relation `key = rhs`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    pub key: RuleKey,
    pub rhs: ScalarExpr,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sym = key_symbol(&self.key);
        write!(f, "{} = {}", sym, self.rhs)
    }
}

/// Output of the free-mode d² solve.
pub struct SecondaryData {
    /// Torsion functions of the `[T, ·]` row, in first derivatives of the
    /// primary structure functions.
    pub e_val: ScalarExpr,
    pub f_val: ScalarExpr,
    pub g_val: ScalarExpr,
    /// Route-symmetrized values for the `[S, S̄]` row; `j_val` is fixed by
    /// conjugation term-by-term.
    pub j_val: ScalarExpr,
    pub k_val: ScalarExpr,
    /// The 27 oriented relations, keyed by the derivative they eliminate.
    pub rules: BTreeMap<RuleKey, ScalarExpr>,
}

impl SecondaryData {
    pub fn relations(&self) -> Vec<Relation> {
        self.rules
            .iter()
            .map(|(k, v)| Relation {
                key: k.clone(),
                rhs: v.clone(),
            })
            .collect()
    }

    pub fn native_algebra(&self) -> DerivationAlgebra {
        DerivationAlgebra::with_rules(self.rules.clone())
    }
}

fn key_symbol(key: &RuleKey) -> BaseSymbol {
    BaseSymbol::with_word(vec![key.0], key.1.clone(), key.2)
}

/// Solves a linear occurrence: the equation must contain `sym` only as a
/// bare monomial with a constant coefficient. Returns the value making the
/// equation vanish.
fn solve_linear(eq: &ScalarExpr, sym: &BaseSymbol, what: &str) -> Result<ScalarExpr, ExteriorError> {
    let bare = crate::scalar::Mono::sym(sym.clone());
    let mut coeff: Option<GaussRat> = None;
    for (m, c) in eq.terms() {
        if m.base.contains_key(sym) {
            if *m != bare {
                return Err(ExteriorError::NonLinearSolve(what.into(), sym.to_string()));
            }
            coeff = Some(c.clone());
        }
    }
    let c = coeff.ok_or_else(|| ExteriorError::NonLinearSolve(what.into(), sym.to_string()))?;
    let rest = eq.sub(&ScalarExpr::from_mono(bare, c.clone()));
    Ok(rest.scale(&c.inv()).neg())
}

/// The 10 index triples `i<j<k` over the base coframe.
fn triples() -> Vec<(usize, usize, usize)> {
    let mut v = Vec::new();
    for i in 0..5 {
        for j in (i + 1)..5 {
            for k in (j + 1)..5 {
                v.push((i, j, k));
            }
        }
    }
    v
}

/// Orientation table: which derivative each nonzero d² slot is solved for.
/// `form` indexes the coframe form whose d² the equation came from
/// (0 = σ̄0, 1 = σ0, 2 = ρ0).
fn orientation() -> Vec<((usize, usize, usize), usize, RuleKey)> {
    use BaseName::*;
    use Letter::*;
    vec![
        ((1, 3, 4), 2, (L, A, false)),
        ((1, 3, 4), 1, (L, B, false)),
        ((1, 3, 4), 0, (L, B, true)),
        ((0, 3, 4), 2, (LBar, A, false)),
        ((0, 3, 4), 1, (LBar, B, false)),
        ((0, 3, 4), 0, (LBar, B, true)),
        ((1, 2, 4), 2, (L, EF, false)),
        ((1, 2, 4), 1, (L, FF, false)),
        ((1, 2, 4), 0, (L, GF, false)),
        ((0, 2, 3), 2, (LBar, EF, true)),
        ((0, 2, 3), 1, (LBar, GF, true)),
        ((0, 2, 3), 0, (LBar, FF, true)),
        ((0, 2, 4), 2, (L, EF, true)),
        ((0, 2, 4), 1, (L, GF, true)),
        ((0, 2, 4), 0, (L, FF, true)),
        ((1, 2, 3), 2, (LBar, EF, false)),
        ((1, 2, 3), 1, (LBar, FF, false)),
        ((1, 2, 3), 0, (LBar, GF, false)),
        ((0, 1, 4), 2, (L, JF, false)),
        ((0, 1, 4), 1, (L, KF, false)),
        ((0, 1, 4), 0, (L, KF, true)),
        ((0, 1, 3), 2, (LBar, JF, false)),
        ((0, 1, 3), 1, (LBar, KF, false)),
        ((0, 1, 3), 0, (LBar, KF, true)),
        ((0, 1, 2), 2, (T, JF, false)),
        ((0, 1, 2), 1, (T, KF, false)),
        ((0, 1, 2), 0, (T, KF, true)),
    ]
}

/// Runs the free-mode d² solve of the base coframe: reads off the values
/// of the secondary torsion functions and derives the 27 oriented
/// relations that make the structure formally integrable at this level.
pub fn derive_secondary_brackets() -> Result<SecondaryData, ExteriorError> {
    let st = Structure::free();
    let alg = &st.alg;
    let d2: Vec<FormExpr> = (0..3).map(|k| st.d(st.darboux(k))).collect();
    let slot = |form: usize, t: (usize, usize, usize)| -> ScalarExpr {
        d2[form].coeff(&[FormSym::base0(t.0), FormSym::base0(t.1), FormSym::base0(t.2)])
    };

    // The {T, L̄, L} triple closes without conditions.
    for form in 0..3 {
        let eq = slot(form, (2, 3, 4));
        if !eq.is_zero() {
            return Err(ExteriorError::UnexpectedSlot(format!(
                "d²(form {}) at (ρ0, ζ̄0, ζ0): {}",
                form, eq
            )));
        }
    }

    // Oriented relations.
    let table = orientation();
    let mut rules: BTreeMap<RuleKey, ScalarExpr> = BTreeMap::new();
    for (t, form, key) in &table {
        let eq = slot(*form, *t);
        let rhs = solve_linear(&eq, &key_symbol(key), &format!("d²(form {}) at {:?}", form, t))?;
        rules.insert(key.clone(), rhs);
    }
    // Every slot is either oriented or identically zero.
    for t in triples() {
        for form in 0..3 {
            if t == (2, 3, 4) || table.iter().any(|(tt, ff, _)| *tt == t && *ff == form) {
                continue;
            }
            let eq = slot(form, t);
            if !eq.is_zero() {
                return Err(ExteriorError::UnexpectedSlot(format!(
                    "d²(form {}) at {:?}: {}",
                    form, t, eq
                )));
            }
        }
    }

    // Irreducibility: no rule right-hand side may itself contain a key.
    for (key, rhs) in &rules {
        for (m, _) in rhs.terms() {
            for s in m.base.keys() {
                if let Some(inner) = s.word.last() {
                    if rules.contains_key(&(*inner, s.name.clone(), s.conj)) {
                        return Err(ExteriorError::ReducibleRhs(format!(
                            "{} in rhs of {}",
                            s,
                            key_symbol(key)
                        )));
                    }
                }
            }
        }
    }

    // Conjugation closure of the rule set.
    for (key, rhs) in &rules {
        let conj_key = conj_rule_key(key);
        let partner = rules
            .get(&conj_key)
            .ok_or_else(|| ExteriorError::ConjugationAudit(key_symbol(key).to_string()))?;
        if alg.conj(rhs) != *partner {
            return Err(ExteriorError::ConjugationAudit(format!(
                "conj of rule {} does not match rule {}",
                key_symbol(key),
                key_symbol(&conj_key)
            )));
        }
    }

    // Values of the secondary structure functions.
    let e_val = solve_linear(&slot(2, (1, 3, 4)), &BaseSymbol::new(BaseName::EF, false), "E")?;
    let f_val = solve_linear(&slot(1, (1, 3, 4)), &BaseSymbol::new(BaseName::FF, false), "F")?;
    let g_val = solve_linear(&slot(0, (1, 3, 4)), &BaseSymbol::new(BaseName::GF, false), "G")?;
    let e_bar = solve_linear(&slot(2, (0, 3, 4)), &BaseSymbol::new(BaseName::EF, true), "Ē")?;
    let g_bar = solve_linear(&slot(1, (0, 3, 4)), &BaseSymbol::new(BaseName::GF, true), "Ḡ")?;
    let f_bar = solve_linear(&slot(0, (0, 3, 4)), &BaseSymbol::new(BaseName::FF, true), "F̄")?;
    for (name, got, want) in [
        ("Ē", &e_bar, alg.conj(&e_val)),
        ("F̄", &f_bar, alg.conj(&f_val)),
        ("Ḡ", &g_bar, alg.conj(&g_val)),
    ] {
        if *got != want {
            return Err(ExteriorError::ConjugationAudit(name.into()));
        }
    }

    // Two routes determine J and K; d² conjugation-equivariance makes the
    // routes exact conjugates, and the report symmetrizes.
    let j_r1 = solve_linear(&slot(2, (0, 2, 4)), &BaseSymbol::new(BaseName::JF, false), "J")?;
    let j_r2 = solve_linear(&slot(2, (1, 2, 3)), &BaseSymbol::new(BaseName::JF, false), "J")?;
    if j_r2 != alg.conj(&j_r1) {
        return Err(ExteriorError::ConjugationAudit("J routes".into()));
    }
    let k_r1 = solve_linear(&slot(1, (0, 2, 4)), &BaseSymbol::new(BaseName::KF, false), "K")?;
    let kbar_r = solve_linear(&slot(0, (1, 2, 3)), &BaseSymbol::new(BaseName::KF, true), "K̄")?;
    if alg.conj(&kbar_r) != k_r1 {
        return Err(ExteriorError::ConjugationAudit("K routes".into()));
    }

    let subst_efg = |e: &ScalarExpr| -> ScalarExpr {
        alg.subst_base(e, &|name, conj| match name {
            BaseName::EF => Some(pick_conj(alg, &e_val, conj)),
            BaseName::FF => Some(pick_conj(alg, &f_val, conj)),
            BaseName::GF => Some(pick_conj(alg, &g_val, conj)),
            _ => None,
        })
    };
    let half = GaussRat::from_ratio(1, 2);
    let j_sub = subst_efg(&j_r1);
    let j_val = j_sub.add(&alg.conj(&j_sub)).scale(&half);
    let k_val = subst_efg(&k_r1);

    Ok(SecondaryData {
        e_val,
        f_val,
        g_val,
        j_val,
        k_val,
        rules,
    })
}

fn pick_conj(alg: &DerivationAlgebra, v: &ScalarExpr, conj: bool) -> ScalarExpr {
    if conj {
        alg.conj(v)
    } else {
        v.clone()
    }
}

fn conj_rule_key(key: &RuleKey) -> RuleKey {
    let (l, name, c) = key;
    let flipped = if name.is_real() { false } else { !c };
    (l.conj(), name.clone(), flipped)
}

/// One nonzero d² slot in a given structure.
#[derive(Clone, Debug)]
pub struct D2Failure {
    pub form: usize,
    pub slot: (usize, usize, usize),
    pub value: ScalarExpr,
}

impl fmt::Display for D2Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "d² of coframe form {} at slot {:?}: {}",
            self.form, self.slot, self.value
        )
    }
}

/// Audits d² = 0 of the whole base coframe in the given structure. An empty
/// list means the structure is closed at this level.
pub fn check_d2(st: &Structure) -> Vec<D2Failure> {
    let mut out = Vec::new();
    for form in 0..5 {
        let dd = st.d(st.darboux(form));
        for t in triples() {
            let v = dd.coeff(&[FormSym::base0(t.0), FormSym::base0(t.1), FormSym::base0(t.2)]);
            if !v.is_zero() {
                out.push(D2Failure {
                    form,
                    slot: t,
                    value: v,
                });
            }
        }
    }
    out
}
