//! Structure-equation differentiation on the master cobasis: the base
//! coframe together with the fiber-coordinate differentials.

use super::{CoframeGen, FormExpr, FormSym};
use crate::scalar::derivation::bracket_pair;
use crate::scalar::{DerivationAlgebra, GLetter, GroupAtom, Letter, ScalarExpr};
use std::collections::BTreeMap;

/// Knows `d` on master-cobasis forms: the base coframe differentiates by
/// the duality image of the bracket table, coordinate differentials are
/// closed, and scalar coefficients split into frame derivatives plus
/// fiber partials.
pub struct Structure {
    pub alg: DerivationAlgebra,
    darboux: Vec<FormExpr>,
}

pub const ALL_ATOMS: [GroupAtom; 10] = [
    GroupAtom::A,
    GroupAtom::ABAR,
    GroupAtom::B,
    GroupAtom::BBAR,
    GroupAtom::C,
    GroupAtom::CBAR,
    GroupAtom::D,
    GroupAtom::DBAR,
    GroupAtom::E,
    GroupAtom::EBAR,
];

impl Structure {
    pub fn new(alg: DerivationAlgebra) -> Self {
        let mut darboux = vec![
            FormExpr::zero(2),
            FormExpr::zero(2),
            FormExpr::zero(2),
            FormExpr::zero(2),
            FormExpr::zero(2),
        ];
        // dθ^k = -Σ_{i<j} c^k_{ij} θ^i∧θ^j
        for i in 0..5 {
            for j in (i + 1)..5 {
                let mono = vec![FormSym::base0(i), FormSym::base0(j)];
                for (z, c) in bracket_pair(i, j) {
                    darboux[z.index()].add_term(mono.clone(), c.neg());
                }
            }
        }
        Structure { alg, darboux }
    }

    pub fn free() -> Self {
        Structure::new(DerivationAlgebra::free())
    }

    /// d of one base-coframe form.
    pub fn darboux(&self, k: usize) -> &FormExpr {
        &self.darboux[k]
    }

    /// df = Σ X_i(f) θ^i + Σ (∂f/∂g) dg.
    pub fn d_scalar(&self, f: &ScalarExpr) -> FormExpr {
        let mut out = FormExpr::zero(1);
        for l in Letter::ALL {
            let v = self.alg.derive(l, f);
            if !v.is_zero() {
                out.add_term(vec![FormSym::base0(l.index())], v);
            }
        }
        for g in ALL_ATOMS {
            let v = f.partial_group(g);
            if !v.is_zero() {
                out.add_term(vec![FormSym::Diff(g)], v);
            }
        }
        out
    }

    fn d_symbol(&self, s: FormSym) -> FormExpr {
        match s {
            FormSym::Frame(CoframeGen::Base0, idx) => self.darboux[idx.index()].clone(),
            FormSym::Diff(_) => FormExpr::zero(2),
            other => panic!("d is defined on the master cobasis only, got {}", other),
        }
    }

    /// Exterior derivative of a master-cobasis form.
    pub fn d(&self, f: &FormExpr) -> FormExpr {
        let mut out = FormExpr::zero(f.degree() + 1);
        for (mono, c) in f.terms() {
            // dc ∧ mono
            let mut head = FormExpr::zero(f.degree());
            head.add_term(mono.clone(), ScalarExpr::one());
            out = out.add(&self.d_scalar(c).wedge(&head));
            // c · Σ_i (-1)^i mono[..i] ∧ d(mono[i]) ∧ mono[i+1..]
            for (i, s) in mono.iter().enumerate() {
                let ds = self.d_symbol(*s);
                if ds.is_zero() {
                    continue;
                }
                let mut left = FormExpr::zero(i as u8);
                let sign_coeff = if i % 2 == 0 { c.clone() } else { c.neg() };
                left.add_term(mono[..i].to_vec(), sign_coeff);
                let mut right = FormExpr::zero((mono.len() - i - 1) as u8);
                right.add_term(mono[i + 1..].to_vec(), ScalarExpr::one());
                out = out.add(&left.wedge(&ds).wedge(&right));
            }
        }
        out
    }
}

/// Convenience: the five base-coframe one-forms.
pub fn base0_coframe() -> [FormExpr; 5] {
    [
        FormExpr::one_form(FormSym::base0(0)),
        FormExpr::one_form(FormSym::base0(1)),
        FormExpr::one_form(FormSym::base0(2)),
        FormExpr::one_form(FormSym::base0(3)),
        FormExpr::one_form(FormSym::base0(4)),
    ]
}

/// Substitutes fiber coordinates inside a form: coefficients through the
/// scalar substitution, and each eliminated differential `dg` by
/// `d(value)` computed in the structure.
pub fn subst_group_form(
    st: &Structure,
    f: &FormExpr,
    map: &BTreeMap<GLetter, ScalarExpr>,
) -> FormExpr {
    let mut form_map: BTreeMap<FormSym, FormExpr> = BTreeMap::new();
    for (letter, val) in map {
        let dval = st.d_scalar(val);
        let dval_bar = st.d_scalar(&st.alg.conj(val));
        form_map.insert(
            FormSym::Diff(GroupAtom {
                letter: *letter,
                conj: false,
            }),
            dval,
        );
        form_map.insert(
            FormSym::Diff(GroupAtom {
                letter: *letter,
                conj: true,
            }),
            dval_bar,
        );
    }
    let expanded = f.apply_map(&form_map);
    let mut out = FormExpr::zero(f.degree());
    for (m, c) in expanded.terms() {
        let cc = st.alg.subst_group(c, map).expect("group substitution failed");
        out.add_term(m.clone(), cc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{BaseName, BaseSymbol, Letter};

    #[test]
    fn darboux_matches_the_bracket_table() {
        let st = Structure::free();
        // dρ0 carries -i ζ̄0∧ζ0 from [L̄,L] = iT
        let drho = st.darboux(2);
        assert_eq!(
            drho.coeff_pair(FormSym::base0(3), FormSym::base0(4)),
            ScalarExpr::i().neg()
        );
        // dσ̄0 carries +1 ρ0∧ζ̄0 from [T, L̄] = -S̄
        let dsb = st.darboux(0);
        assert_eq!(
            dsb.coeff_pair(FormSym::base0(2), FormSym::base0(3)),
            ScalarExpr::one()
        );
        // dσ0 carries +1 ρ0∧ζ0 from [T, L] = -S
        let ds = st.darboux(1);
        assert_eq!(
            ds.coeff_pair(FormSym::base0(2), FormSym::base0(4)),
            ScalarExpr::one()
        );
        // dζ0 = dζ̄0 = 0
        assert!(st.darboux(3).is_zero());
        assert!(st.darboux(4).is_zero());
    }

    #[test]
    fn d_squared_vanishes_on_scalars_even_in_free_mode() {
        // The engine's straightening and the Darboux equations encode the
        // same brackets, so d² kills any function exactly.
        let st = Structure::free();
        for sample in [
            ScalarExpr::base(BaseName::Named("f".into()), false),
            ScalarExpr::base(BaseName::A, false).mul(&ScalarExpr::base(BaseName::Q, true)),
            ScalarExpr::sym(BaseSymbol::with_word(
                vec![Letter::T, Letter::L],
                BaseName::B,
                true,
            )),
            ScalarExpr::atom(GroupAtom::A, -2).mul(&ScalarExpr::base(BaseName::R, false)),
        ] {
            let ddf = st.d(&st.d_scalar(&sample));
            assert!(ddf.is_zero(), "d² f != 0 for {}: {}", sample, ddf);
        }
    }

    #[test]
    fn substitution_rewrites_differentials() {
        let st = Structure::free();
        // c -> a*abar*Bbar, then dc expands through d_scalar
        let mut map = BTreeMap::new();
        map.insert(
            GLetter::Gc,
            ScalarExpr::atom(GroupAtom::A, 1)
                .mul(&ScalarExpr::atom(GroupAtom::ABAR, 1))
                .mul(&ScalarExpr::base(BaseName::B, true)),
        );
        let dc = FormExpr::one_form(FormSym::Diff(GroupAtom::C));
        let got = subst_group_form(&st, &dc, &map);
        // coefficient of da is abar*Bbar
        let want_da = ScalarExpr::atom(GroupAtom::ABAR, 1).mul(&ScalarExpr::base(BaseName::B, true));
        assert_eq!(got.coeff(&[FormSym::Diff(GroupAtom::A)]), want_da);
        // frame part: the ζ̄0 slot carries a*abar*L̄(B̄)
        let lb = st
            .alg
            .derive(Letter::LBar, &ScalarExpr::base(BaseName::B, true));
        let want = ScalarExpr::atom(GroupAtom::A, 1)
            .mul(&ScalarExpr::atom(GroupAtom::ABAR, 1))
            .mul(&lb);
        assert_eq!(got.coeff(&[FormSym::base0(3)]), want);
    }
}
