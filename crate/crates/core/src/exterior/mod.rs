//! Exterior algebra of forms over the base coframe, group-coordinate
//! differentials, and the pseudogroup connection forms of each reduction
//! stage.

pub mod secondary;
pub mod structure;

use crate::rational::GaussRat;
use crate::scalar::symbol::bar_first;
use crate::scalar::{DerivationAlgebra, GroupAtom, ScalarExpr};
use std::collections::BTreeMap;
use std::fmt;

pub use structure::Structure;

/// Which coframe generation a frame one-form belongs to. `Lifted` is the
/// group-scaled coframe; the numbered generations are base-level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CoframeGen {
    Base0,
    Lifted,
    Stage1,
    Stage2,
}

/// Position inside a coframe, in the fixed order σ̄ < σ < ρ < ζ̄ < ζ.
/// Index `k` is dual to the frame letter with the same index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FrameIdx {
    SigBar,
    Sig,
    Rho,
    ZetBar,
    Zet,
}

impl FrameIdx {
    pub const ALL: [FrameIdx; 5] = [
        FrameIdx::SigBar,
        FrameIdx::Sig,
        FrameIdx::Rho,
        FrameIdx::ZetBar,
        FrameIdx::Zet,
    ];

    pub fn index(self) -> usize {
        match self {
            FrameIdx::SigBar => 0,
            FrameIdx::Sig => 1,
            FrameIdx::Rho => 2,
            FrameIdx::ZetBar => 3,
            FrameIdx::Zet => 4,
        }
    }

    pub fn from_index(i: usize) -> Self {
        FrameIdx::ALL[i]
    }

    pub fn conjugate(self) -> Self {
        match self {
            FrameIdx::SigBar => FrameIdx::Sig,
            FrameIdx::Sig => FrameIdx::SigBar,
            FrameIdx::Rho => FrameIdx::Rho,
            FrameIdx::ZetBar => FrameIdx::Zet,
            FrameIdx::Zet => FrameIdx::ZetBar,
        }
    }

    fn greek(self) -> &'static str {
        match self {
            FrameIdx::SigBar => "σ\u{304}",
            FrameIdx::Sig => "σ",
            FrameIdx::Rho => "ρ",
            FrameIdx::ZetBar => "ζ\u{304}",
            FrameIdx::Zet => "ζ",
        }
    }
}

/// Connection-form names of the three reduction stages.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum McSym {
    Alpha(u8),
    Beta(u8),
    Gamma1,
    Lambda,
}

impl McSym {
    fn plain_str(self) -> String {
        match self {
            McSym::Alpha(k) => format!("α{}", k),
            McSym::Beta(k) => format!("β{}", k),
            McSym::Gamma1 => "γ1".to_string(),
            McSym::Lambda => "λ".to_string(),
        }
    }
}

/// A one-form symbol. The order (connection forms, then frame forms, then
/// coordinate differentials) fixes the canonical wedge-monomial layout.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FormSym {
    Mc(McSym, bool),
    Frame(CoframeGen, FrameIdx),
    Diff(GroupAtom),
}

impl FormSym {
    pub fn base0(i: usize) -> Self {
        FormSym::Frame(CoframeGen::Base0, FrameIdx::from_index(i))
    }

    pub fn lifted(i: usize) -> Self {
        FormSym::Frame(CoframeGen::Lifted, FrameIdx::from_index(i))
    }

    pub fn conjugate(self) -> Self {
        match self {
            FormSym::Mc(m, c) => FormSym::Mc(m, !c),
            FormSym::Frame(g, i) => FormSym::Frame(g, i.conjugate()),
            FormSym::Diff(g) => FormSym::Diff(g.conjugate()),
        }
    }
}

impl fmt::Display for FormSym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FormSym::Mc(m, c) => {
                let s = m.plain_str();
                if *c {
                    f.write_str(&bar_first(&s))
                } else {
                    f.write_str(&s)
                }
            }
            FormSym::Frame(g, i) => {
                let suffix = match g {
                    CoframeGen::Base0 => "0",
                    CoframeGen::Lifted => "",
                    CoframeGen::Stage1 => "1",
                    CoframeGen::Stage2 => "2",
                };
                write!(f, "{}{}", i.greek(), suffix)
            }
            FormSym::Diff(g) => write!(f, "d{}", g),
        }
    }
}

/// A differential form of homogeneous degree with `ScalarExpr`
/// coefficients. Monomial keys are strictly ascending symbol lists;
/// degree 0 is a scalar carried in the empty key.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormExpr {
    degree: u8,
    terms: BTreeMap<Vec<FormSym>, ScalarExpr>,
}

impl FormExpr {
    pub fn zero(degree: u8) -> Self {
        FormExpr {
            degree,
            terms: BTreeMap::new(),
        }
    }

    pub fn scalar(c: ScalarExpr) -> Self {
        let mut f = FormExpr::zero(0);
        f.add_term(Vec::new(), c);
        f
    }

    pub fn one_form(s: FormSym) -> Self {
        let mut f = FormExpr::zero(1);
        f.add_term(vec![s], ScalarExpr::one());
        f
    }

    pub fn degree(&self) -> u8 {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<FormSym>, &ScalarExpr)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, mono: Vec<FormSym>, c: ScalarExpr) {
        debug_assert_eq!(mono.len() as u8, self.degree);
        debug_assert!(mono.windows(2).all(|w| w[0] < w[1]), "unsorted form monomial");
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(mono) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let s = o.get().add(&c);
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, rhs: &FormExpr) -> FormExpr {
        assert_eq!(self.degree, rhs.degree, "degree mismatch in add");
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> FormExpr {
        let mut out = FormExpr::zero(self.degree);
        for (m, c) in &self.terms {
            out.terms.insert(m.clone(), c.neg());
        }
        out
    }

    pub fn sub(&self, rhs: &FormExpr) -> FormExpr {
        self.add(&rhs.neg())
    }

    pub fn scale(&self, c: &ScalarExpr) -> FormExpr {
        let mut out = FormExpr::zero(self.degree);
        if c.is_zero() {
            return out;
        }
        for (m, k) in &self.terms {
            let v = k.mul(c);
            if !v.is_zero() {
                out.terms.insert(m.clone(), v);
            }
        }
        out
    }

    pub fn wedge(&self, rhs: &FormExpr) -> FormExpr {
        let mut out = FormExpr::zero(self.degree + rhs.degree);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                if let Some((mono, sign)) = merge_sorted(m1, m2) {
                    let mut c = c1.mul(c2);
                    if sign < 0 {
                        c = c.neg();
                    }
                    out.add_term(mono, c);
                }
            }
        }
        out
    }

    /// Coefficient of an arbitrary (not necessarily sorted) simple wedge,
    /// with the permutation sign folded in.
    pub fn coeff(&self, mono: &[FormSym]) -> ScalarExpr {
        let mut sorted: Vec<FormSym> = mono.to_vec();
        let mut sign = 1i32;
        // insertion sort, counting swaps
        for i in 1..sorted.len() {
            let mut j = i;
            while j > 0 && sorted[j - 1] > sorted[j] {
                sorted.swap(j - 1, j);
                sign = -sign;
                j -= 1;
            }
        }
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return ScalarExpr::zero();
        }
        match self.terms.get(&sorted) {
            None => ScalarExpr::zero(),
            Some(c) => {
                if sign < 0 {
                    c.neg()
                } else {
                    c.clone()
                }
            }
        }
    }

    pub fn coeff_pair(&self, a: FormSym, b: FormSym) -> ScalarExpr {
        self.coeff(&[a, b])
    }

    /// Complex conjugation: conjugate coefficients and swap barred symbols,
    /// restoring the canonical monomial order.
    pub fn conj(&self, alg: &DerivationAlgebra) -> FormExpr {
        let mut out = FormExpr::zero(self.degree);
        for (m, c) in &self.terms {
            let mapped: Vec<FormSym> = m.iter().map(|s| s.conjugate()).collect();
            let (mono, sign) = sort_with_sign(mapped);
            let mut cc = alg.conj(c);
            if sign < 0 {
                cc = cc.neg();
            }
            out.add_term(mono, cc);
        }
        out
    }

    /// Expands selected one-form symbols. Symbols outside the map stay.
    pub fn apply_map(&self, map: &BTreeMap<FormSym, FormExpr>) -> FormExpr {
        let mut out = FormExpr::zero(self.degree);
        for (m, c) in &self.terms {
            let mut acc = FormExpr::scalar(c.clone());
            for s in m {
                let factor = match map.get(s) {
                    Some(f) => f.clone(),
                    None => FormExpr::one_form(*s),
                };
                acc = acc.wedge(&factor);
            }
            out = out.add(&acc);
        }
        out
    }

    /// Applies `f` to every coefficient, dropping zeros.
    pub fn map_coeffs(&self, f: &dyn Fn(&ScalarExpr) -> ScalarExpr) -> FormExpr {
        let mut out = FormExpr::zero(self.degree);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), f(c));
        }
        out
    }

    /// The symbols that actually occur in some monomial.
    pub fn support(&self) -> Vec<FormSym> {
        let mut set = std::collections::BTreeSet::new();
        for m in self.terms.keys() {
            set.extend(m.iter().copied());
        }
        set.into_iter().collect()
    }
}

/// Merges two ascending monomials; `None` on a repeated symbol, otherwise
/// the merged monomial and the permutation sign.
fn merge_sorted(a: &[FormSym], b: &[FormSym]) -> Option<(Vec<FormSym>, i32)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let mut sign = 1i32;
    let (mut i, mut j) = (0usize, 0usize);
    while i < a.len() && j < b.len() {
        if a[i] == b[j] {
            return None;
        }
        if a[i] < b[j] {
            out.push(a[i]);
            i += 1;
        } else {
            // b[j] jumps over the remaining a-elements
            if (a.len() - i) % 2 == 1 {
                sign = -sign;
            }
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    Some((out, sign))
}

fn sort_with_sign(mut v: Vec<FormSym>) -> (Vec<FormSym>, i32) {
    let mut sign = 1i32;
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    (v, sign)
}

/// 1 when `perm` is even, -1 when odd; `None` on repeats. Used by tests.
pub fn permutation_sign(perm: &[usize]) -> Option<i32> {
    let mut v = perm.to_vec();
    let mut sign = 1i32;
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            if v[j - 1] == v[j] {
                return None;
            }
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some(sign)
}

impl fmt::Display for FormExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            let mono: Vec<String> = m.iter().map(|s| s.to_string()).collect();
            if m.is_empty() {
                write!(f, "{}", c.canonical_string())?;
            } else {
                write!(f, "({})·{}", c.canonical_string(), mono.join("∧"))?;
            }
        }
        Ok(())
    }
}

pub fn gauss(n: i64) -> GaussRat {
    GaussRat::from_int(n)
}
