//! Derivation engine: straightening of derivation words against the frame
//! bracket table, optional first-order rewrite rules, conjugation, and
//! substitution.

use super::symbol::{BaseName, BaseSymbol, GLetter, Letter};
use super::{Mono, ScalarError, ScalarExpr};
use crate::rational::GaussRat;
use std::cell::RefCell;
use std::collections::BTreeMap;

/// A rewrite rule fires when `letter` is applied directly to the underived
/// base function `(name, conj)`.
pub type RuleKey = (Letter, BaseName, bool);

fn b(name: BaseName, conj: bool) -> ScalarExpr {
    ScalarExpr::base(name, conj)
}

/// `[x, y]` for letters with `x > y`, as coefficients over the frame:
/// a list of `(z, c)` meaning `sum c * z`.
pub fn bracket_gt(x: Letter, y: Letter) -> Vec<(Letter, ScalarExpr)> {
    use BaseName::*;
    use Letter::*;
    assert!(x > y, "bracket_gt wants descending letters");
    match (x, y) {
        (L, LBar) => vec![(T, ScalarExpr::i().neg())],
        (L, T) => vec![(S, ScalarExpr::one())],
        (LBar, T) => vec![(SBar, ScalarExpr::one())],
        (L, S) => vec![(T, b(P, false)), (S, b(Q, false)), (SBar, b(R, false))],
        (LBar, SBar) => vec![(T, b(P, true)), (S, b(R, true)), (SBar, b(Q, true))],
        (L, SBar) | (LBar, S) => {
            vec![(T, b(A, false)), (S, b(B, false)), (SBar, b(B, true))]
        }
        (T, S) => vec![(T, b(EF, false)), (S, b(FF, false)), (SBar, b(GF, false))],
        (T, SBar) => vec![(T, b(EF, true)), (S, b(GF, true)), (SBar, b(FF, true))],
        (S, SBar) => vec![
            (T, ScalarExpr::i().mul(&b(JF, false))),
            (S, b(KF, false)),
            (SBar, b(KF, true).neg()),
        ],
        _ => unreachable!("non-descending pair"),
    }
}

/// `[X_i, X_j]` for frame indices `i < j` in letter order.
pub fn bracket_pair(i: usize, j: usize) -> Vec<(Letter, ScalarExpr)> {
    assert!(i < j);
    bracket_gt(Letter::from_index(j), Letter::from_index(i))
        .into_iter()
        .map(|(z, c)| (z, c.neg()))
        .collect()
}

/// The derivation algebra: straightens words into the canonical ascending
/// order and optionally rewrites innermost letter-on-function pairs.
pub struct DerivationAlgebra {
    rules: BTreeMap<RuleKey, ScalarExpr>,
    cache: RefCell<BTreeMap<(Letter, BaseSymbol), ScalarExpr>>,
}

impl DerivationAlgebra {
    /// No rewrite rules: all first derivatives are free symbols.
    pub fn free() -> Self {
        DerivationAlgebra {
            rules: BTreeMap::new(),
            cache: RefCell::new(BTreeMap::new()),
        }
    }

    pub fn with_rules(rules: BTreeMap<RuleKey, ScalarExpr>) -> Self {
        DerivationAlgebra {
            rules,
            cache: RefCell::new(BTreeMap::new()),
        }
    }

    pub fn rules(&self) -> &BTreeMap<RuleKey, ScalarExpr> {
        &self.rules
    }

    /// Applies the frame derivation `l` to an expression by the Leibniz rule.
    /// Fiber coordinates are constants for frame derivations.
    pub fn derive(&self, l: Letter, e: &ScalarExpr) -> ScalarExpr {
        let mut out = ScalarExpr::zero();
        for (m, c) in e.terms() {
            for (s, exp) in &m.base {
                // c * exp * group * s^(exp-1) * rest * d(s)
                let mut rest = Mono {
                    group: m.group.clone(),
                    base: m.base.clone(),
                };
                if *exp == 1 {
                    rest.base.remove(s);
                } else {
                    rest.base.insert(s.clone(), exp - 1);
                }
                let coeff = c * &GaussRat::from_int(*exp as i64);
                let ds = self.canon_prepend(l, s);
                out = out.add(&ScalarExpr::from_mono(rest, coeff).mul(&ds));
            }
        }
        out
    }

    /// `l` applied to a single canonical symbol, returned in canonical form.
    /// Words stay ascending outermost-first; a rule fires only at the
    /// innermost position.
    pub fn canon_prepend(&self, l: Letter, sym: &BaseSymbol) -> ScalarExpr {
        let key = (l, sym.clone());
        if let Some(hit) = self.cache.borrow().get(&key) {
            return hit.clone();
        }
        let result = self.canon_prepend_uncached(l, sym);
        self.cache.borrow_mut().insert(key, result.clone());
        result
    }

    fn canon_prepend_uncached(&self, l: Letter, sym: &BaseSymbol) -> ScalarExpr {
        if sym.word.is_empty() {
            if let Some(rhs) = self.rules.get(&(l, sym.name.clone(), sym.conj)) {
                return rhs.clone();
            }
            return ScalarExpr::sym(BaseSymbol::with_word(
                vec![l],
                sym.name.clone(),
                sym.conj,
            ));
        }
        let w0 = sym.word[0];
        if l <= w0 {
            let mut word = Vec::with_capacity(sym.word.len() + 1);
            word.push(l);
            word.extend_from_slice(&sym.word);
            return ScalarExpr::sym(BaseSymbol::with_word(word, sym.name.clone(), sym.conj));
        }
        // l > w0: l(w0(rest)) = w0(l(rest)) + [l, w0](rest)
        let rest = BaseSymbol::with_word(sym.word[1..].to_vec(), sym.name.clone(), sym.conj);
        let inner = self.canon_prepend(l, &rest);
        let mut out = self.derive(w0, &inner);
        for (z, c) in bracket_gt(l, w0) {
            out = out.add(&c.mul(&self.canon_prepend(z, &rest)));
        }
        out
    }

    /// Complex conjugation. Conjugating a derivation word swaps barred and
    /// unbarred letters, which can break the canonical order, so the word is
    /// rebuilt through the engine.
    pub fn conj(&self, e: &ScalarExpr) -> ScalarExpr {
        let mut out = ScalarExpr::zero();
        for (m, c) in e.terms() {
            let mut term = ScalarExpr::constant(c.conj());
            let mut group = BTreeMap::new();
            for (g, exp) in &m.group {
                group.insert(g.conjugate(), *exp);
            }
            term = term.mul(&ScalarExpr::from_mono(
                Mono {
                    group,
                    base: BTreeMap::new(),
                },
                GaussRat::one(),
            ));
            for (s, exp) in &m.base {
                let mut v = ScalarExpr::sym(BaseSymbol::new(s.name.clone(), !s.conj));
                for w in s.word.iter().rev() {
                    v = self.derive(w.conj(), &v);
                }
                term = term.mul(&v.pow(*exp));
            }
            out = out.add(&term);
        }
        out
    }

    /// Replaces base functions by expressions. A symbol whose `(name, conj)`
    /// maps to `Some(v)` becomes its derivation word applied to `v`; other
    /// symbols are kept.
    pub fn subst_base(
        &self,
        e: &ScalarExpr,
        f: &dyn Fn(&BaseName, bool) -> Option<ScalarExpr>,
    ) -> ScalarExpr {
        let mut out = ScalarExpr::zero();
        for (m, c) in e.terms() {
            let mut term = ScalarExpr::from_mono(
                Mono {
                    group: m.group.clone(),
                    base: BTreeMap::new(),
                },
                c.clone(),
            );
            for (s, exp) in &m.base {
                let factor = match f(&s.name, s.conj) {
                    None => ScalarExpr::sym(s.clone()),
                    Some(v) => {
                        let mut v = v;
                        for w in s.word.iter().rev() {
                            v = self.derive(*w, &v);
                        }
                        v
                    }
                };
                term = term.mul(&factor.pow(*exp));
            }
            out = out.add(&term);
        }
        out
    }

    /// Replaces fiber coordinates. The map gives values for unbarred
    /// letters; barred occurrences receive the conjugated value. A
    /// coordinate appearing with a negative exponent must map to a single
    /// invertible fiber monomial.
    pub fn subst_group(
        &self,
        e: &ScalarExpr,
        map: &BTreeMap<GLetter, ScalarExpr>,
    ) -> Result<ScalarExpr, ScalarError> {
        let mut out = ScalarExpr::zero();
        for (m, c) in e.terms() {
            let mut term = ScalarExpr::from_mono(
                Mono {
                    group: BTreeMap::new(),
                    base: m.base.clone(),
                },
                c.clone(),
            );
            for (g, exp) in &m.group {
                match map.get(&g.letter) {
                    None => {
                        term = term.mul(&ScalarExpr::atom(*g, *exp));
                    }
                    Some(v) => {
                        let v = if g.conj { self.conj(v) } else { v.clone() };
                        let factor = if *exp >= 0 {
                            v.pow(*exp as u32)
                        } else {
                            let (mono, coeff) = v.as_group_monomial().map_err(|_| {
                                ScalarError::NonMonomialSubstitution(g.to_string())
                            })?;
                            if mono.group.keys().any(|atom| !atom.invertible()) {
                                return Err(ScalarError::NonMonomialSubstitution(g.to_string()));
                            }
                            let mut inv_group = BTreeMap::new();
                            for (atom, ee) in &mono.group {
                                inv_group.insert(*atom, -ee);
                            }
                            ScalarExpr::from_mono(
                                Mono {
                                    group: inv_group,
                                    base: BTreeMap::new(),
                                },
                                coeff.inv(),
                            )
                            .pow((-exp) as u32)
                        };
                        term = term.mul(&factor);
                    }
                }
            }
            out = out.add(&term);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::GroupAtom;

    fn f() -> BaseSymbol {
        BaseSymbol::new(BaseName::Named("f".into()), false)
    }

    fn apply_word(alg: &DerivationAlgebra, word: &[Letter], start: &BaseSymbol) -> ScalarExpr {
        // word is outermost-first; apply innermost letters first
        let mut e = ScalarExpr::sym(start.clone());
        for l in word.iter().rev() {
            e = alg.derive(*l, &e);
        }
        e
    }

    #[test]
    fn straightening_uses_the_bracket_table() {
        let alg = DerivationAlgebra::free();
        // L(T(f)) = T(L(f)) + S(f)
        let lhs = apply_word(&alg, &[Letter::L, Letter::T], &f());
        let tl = ScalarExpr::sym(BaseSymbol::with_word(
            vec![Letter::T, Letter::L],
            BaseName::Named("f".into()),
            false,
        ));
        let s = ScalarExpr::sym(BaseSymbol::with_word(
            vec![Letter::S],
            BaseName::Named("f".into()),
            false,
        ));
        assert_eq!(lhs, tl.add(&s));
    }

    #[test]
    fn commutator_of_l_and_lbar_is_minus_i_t() {
        let alg = DerivationAlgebra::free();
        let llb = apply_word(&alg, &[Letter::L, Letter::LBar], &f());
        let lbl = apply_word(&alg, &[Letter::LBar, Letter::L], &f());
        let t = ScalarExpr::sym(BaseSymbol::with_word(
            vec![Letter::T],
            BaseName::Named("f".into()),
            false,
        ));
        assert_eq!(llb.sub(&lbl), t.scale(&GaussRat::i()).neg());
    }

    #[test]
    fn leibniz() {
        let alg = DerivationAlgebra::free();
        let g = ScalarExpr::base(BaseName::B, false);
        let h = ScalarExpr::base(BaseName::Q, false);
        let lhs = alg.derive(Letter::L, &g.mul(&h));
        let rhs = alg.derive(Letter::L, &g).mul(&h).add(&g.mul(&alg.derive(Letter::L, &h)));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn conjugation_is_involutive_on_words() {
        let alg = DerivationAlgebra::free();
        let sample = apply_word(&alg, &[Letter::SBar, Letter::S, Letter::L], &f())
            .mul(&ScalarExpr::base(BaseName::B, true))
            .add(&ScalarExpr::i().mul(&ScalarExpr::base(BaseName::A, false)));
        assert_eq!(alg.conj(&alg.conj(&sample)), sample);
    }

    #[test]
    fn conjugation_restraightens() {
        let alg = DerivationAlgebra::free();
        // conj(SBar(S(B))) = S(SBar(Bbar)) = SBar(S(Bbar)) + [S,SBar](Bbar)
        let sym = BaseSymbol::with_word(vec![Letter::SBar, Letter::S], BaseName::B, false);
        let got = alg.conj(&ScalarExpr::sym(sym));
        let direct = {
            let bbar = ScalarExpr::base(BaseName::B, true);
            let inner = alg.derive(Letter::SBar, &bbar);
            alg.derive(Letter::S, &inner)
        };
        assert_eq!(got, direct);
    }

    #[test]
    fn rules_fire_only_at_the_innermost_position() {
        let mut rules = BTreeMap::new();
        // toy rule: L(A) -> B
        rules.insert(
            (Letter::L, BaseName::A, false),
            ScalarExpr::base(BaseName::B, false),
        );
        let alg = DerivationAlgebra::with_rules(rules);
        let la = alg.derive(Letter::L, &ScalarExpr::base(BaseName::A, false));
        assert_eq!(la, ScalarExpr::base(BaseName::B, false));
        // T(A) stays free, and L(T(A)) = T(L(A)) + [L,T](A) = T(B) + S(A)
        let ta = alg.derive(Letter::T, &ScalarExpr::base(BaseName::A, false));
        let lta = alg.derive(Letter::L, &ta);
        let tb = ScalarExpr::sym(BaseSymbol::with_word(vec![Letter::T], BaseName::B, false));
        let sa = ScalarExpr::sym(BaseSymbol::with_word(vec![Letter::S], BaseName::A, false));
        assert_eq!(lta, tb.add(&sa));
    }

    #[test]
    fn group_substitution_conjugates_and_inverts() {
        let alg = DerivationAlgebra::free();
        // e = c * abar^-1; substitute c -> a*abar*Bbar, a -> a (identity)
        let e = ScalarExpr::atom(GroupAtom::C, 1).mul(&ScalarExpr::atom(GroupAtom::ABAR, -1));
        let mut map = BTreeMap::new();
        map.insert(
            GLetter::Gc,
            ScalarExpr::atom(GroupAtom::A, 1)
                .mul(&ScalarExpr::atom(GroupAtom::ABAR, 1))
                .mul(&ScalarExpr::base(BaseName::B, true)),
        );
        let got = alg.subst_group(&e, &map).unwrap();
        let want = ScalarExpr::atom(GroupAtom::A, 1).mul(&ScalarExpr::base(BaseName::B, true));
        assert_eq!(got, want);
        // cbar picks up the conjugated value
        let ebar = ScalarExpr::atom(GroupAtom::CBAR, 1);
        let got2 = alg.subst_group(&ebar, &map).unwrap();
        let want2 = ScalarExpr::atom(GroupAtom::A, 1)
            .mul(&ScalarExpr::atom(GroupAtom::ABAR, 1))
            .mul(&ScalarExpr::base(BaseName::B, false));
        assert_eq!(got2, want2);
    }
}
