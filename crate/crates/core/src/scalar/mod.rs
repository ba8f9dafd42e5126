//! Exact scalar ring: Laurent monomials in the fiber coordinates times
//! polynomials in canonical derivation symbols, with coefficients in Q(i).

pub mod derivation;
pub mod symbol;

use crate::rational::GaussRat;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

pub use derivation::DerivationAlgebra;
pub use symbol::{BaseName, BaseSymbol, GLetter, GroupAtom, Letter};

#[derive(Debug, Error)]
pub enum ScalarError {
    #[error("cannot invert fiber coordinate {0}")]
    NonInvertibleAtom(String),
    #[error("substitution for invertible coordinate must be a single monomial: {0}")]
    NonMonomialSubstitution(String),
    #[error("expression is not a pure fiber monomial: {0}")]
    NotGroupMonomial(String),
    #[error("coefficient is not free of fiber coordinates: {0}")]
    GroupResidue(String),
}

/// A monomial: fiber coordinates to integer powers (negative powers only
/// on `a`/`ā`) times base symbols to nonnegative powers.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Mono {
    pub group: BTreeMap<GroupAtom, i64>,
    pub base: BTreeMap<BaseSymbol, u32>,
}

impl Mono {
    pub fn one() -> Self {
        Mono::default()
    }

    pub fn atom(g: GroupAtom, exp: i64) -> Self {
        let mut m = Mono::one();
        if exp != 0 {
            assert!(exp > 0 || g.invertible(), "negative power on non-invertible atom");
            m.group.insert(g, exp);
        }
        m
    }

    pub fn sym(s: BaseSymbol) -> Self {
        let mut m = Mono::one();
        m.base.insert(s, 1);
        m
    }

    pub fn is_one(&self) -> bool {
        self.group.is_empty() && self.base.is_empty()
    }

    pub fn mul(&self, rhs: &Mono) -> Mono {
        let mut out = self.clone();
        for (g, e) in &rhs.group {
            let v = out.group.entry(*g).or_insert(0);
            *v += e;
            if *v == 0 {
                out.group.remove(g);
            }
        }
        for (s, e) in &rhs.base {
            let v = out.base.entry(s.clone()).or_insert(0);
            *v += e;
        }
        for (g, e) in &out.group {
            assert!(*e > 0 || g.invertible(), "negative power on non-invertible atom");
        }
        out
    }

    fn disp(&self, out: &mut String) {
        let mut first = true;
        for (g, e) in &self.group {
            if !first {
                out.push('*');
            }
            first = false;
            out.push_str(&g.to_string());
            if *e != 1 {
                out.push('^');
                out.push_str(&e.to_string());
            }
        }
        for (s, e) in &self.base {
            if !first {
                out.push('*');
            }
            first = false;
            out.push_str(&s.to_string());
            if *e != 1 {
                out.push('^');
                out.push_str(&e.to_string());
            }
        }
    }
}

/// A finite Q(i)-linear combination of monomials. Zero coefficients are
/// never stored; equal expressions have equal representations.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct ScalarExpr {
    terms: BTreeMap<Mono, GaussRat>,
}

impl ScalarExpr {
    pub fn zero() -> Self {
        ScalarExpr::default()
    }

    pub fn constant(c: GaussRat) -> Self {
        let mut e = ScalarExpr::zero();
        if !c.is_zero() {
            e.terms.insert(Mono::one(), c);
        }
        e
    }

    pub fn one() -> Self {
        ScalarExpr::constant(GaussRat::one())
    }

    pub fn int(n: i64) -> Self {
        ScalarExpr::constant(GaussRat::from_int(n))
    }

    pub fn i() -> Self {
        ScalarExpr::constant(GaussRat::i())
    }

    pub fn from_mono(m: Mono, c: GaussRat) -> Self {
        let mut e = ScalarExpr::zero();
        e.add_term(m, c);
        e
    }

    pub fn atom(g: GroupAtom, exp: i64) -> Self {
        ScalarExpr::from_mono(Mono::atom(g, exp), GaussRat::one())
    }

    pub fn sym(s: BaseSymbol) -> Self {
        ScalarExpr::from_mono(Mono::sym(s), GaussRat::one())
    }

    pub fn base(name: BaseName, conj: bool) -> Self {
        ScalarExpr::sym(BaseSymbol::new(name, conj))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &GaussRat)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn add_term(&mut self, m: Mono, c: GaussRat) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let s = &*o.get() + &c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, rhs: &ScalarExpr) -> ScalarExpr {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> ScalarExpr {
        let mut out = ScalarExpr::zero();
        for (m, c) in &self.terms {
            out.terms.insert(m.clone(), -c);
        }
        out
    }

    pub fn sub(&self, rhs: &ScalarExpr) -> ScalarExpr {
        self.add(&rhs.neg())
    }

    pub fn scale(&self, c: &GaussRat) -> ScalarExpr {
        let mut out = ScalarExpr::zero();
        if c.is_zero() {
            return out;
        }
        for (m, k) in &self.terms {
            out.terms.insert(m.clone(), k * c);
        }
        out
    }

    pub fn mul(&self, rhs: &ScalarExpr) -> ScalarExpr {
        let mut out = ScalarExpr::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> ScalarExpr {
        let mut out = ScalarExpr::one();
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    /// Multiplies by a single fiber monomial with exponents negated,
    /// i.e. exact division by `m`. Fails when a non-invertible atom
    /// would fall to a negative power.
    pub fn div_group_mono(&self, m: &Mono) -> Result<ScalarExpr, ScalarError> {
        assert!(m.base.is_empty(), "divisor must be a fiber monomial");
        let mut out = ScalarExpr::zero();
        for (mm, c) in &self.terms {
            let mut g = mm.group.clone();
            for (atom, e) in &m.group {
                let v = g.entry(*atom).or_insert(0);
                *v -= e;
                if *v == 0 {
                    g.remove(atom);
                } else if *v < 0 && !atom.invertible() {
                    return Err(ScalarError::NonInvertibleAtom(atom.to_string()));
                }
            }
            out.add_term(
                Mono {
                    group: g,
                    base: mm.base.clone(),
                },
                c.clone(),
            );
        }
        Ok(out)
    }

    /// The expression as a single fiber monomial `(mono, coeff)`, if it is one.
    pub fn as_group_monomial(&self) -> Result<(Mono, GaussRat), ScalarError> {
        if self.terms.len() != 1 {
            return Err(ScalarError::NotGroupMonomial(self.to_string()));
        }
        let (m, c) = self.terms.iter().next().unwrap();
        if !m.base.is_empty() {
            return Err(ScalarError::NotGroupMonomial(self.to_string()));
        }
        Ok((m.clone(), c.clone()))
    }

    pub fn constant_value(&self) -> Option<GaussRat> {
        if self.terms.is_empty() {
            return Some(GaussRat::zero());
        }
        if self.terms.len() == 1 {
            let (m, c) = self.terms.iter().next().unwrap();
            if m.is_one() {
                return Some(c.clone());
            }
        }
        None
    }

    pub fn has_group_atoms(&self) -> bool {
        self.terms.iter().any(|(m, _)| !m.group.is_empty())
    }

    pub fn has_base_symbols(&self) -> bool {
        self.terms.iter().any(|(m, _)| !m.base.is_empty())
    }

    /// d/dg on the fiber coordinates; base symbols are fiber constants.
    pub fn partial_group(&self, g: GroupAtom) -> ScalarExpr {
        let mut out = ScalarExpr::zero();
        for (m, c) in &self.terms {
            if let Some(e) = m.group.get(&g) {
                let mut gm = m.group.clone();
                if *e == 1 {
                    gm.remove(&g);
                } else {
                    gm.insert(g, e - 1);
                }
                out.add_term(
                    Mono {
                        group: gm,
                        base: m.base.clone(),
                    },
                    c * &GaussRat::from_int(*e),
                );
            }
        }
        out
    }

    /// Evaluates at a numeric point given by total assignments for fiber
    /// coordinates and base symbols.
    pub fn specialize(
        &self,
        group_val: &dyn Fn(GroupAtom) -> GaussRat,
        base_val: &dyn Fn(&BaseSymbol) -> GaussRat,
    ) -> GaussRat {
        let mut total = GaussRat::zero();
        for (m, c) in &self.terms {
            let mut v = c.clone();
            for (g, e) in &m.group {
                let gv = group_val(*g);
                let p = if *e >= 0 {
                    gpow(&gv, *e as u32)
                } else {
                    gpow(&gv.inv(), (-e) as u32)
                };
                v = &v * &p;
            }
            for (s, e) in &m.base {
                v = &v * &gpow(&base_val(s), *e);
            }
            total = &total + &v;
        }
        total
    }

    /// Canonical rendering; also the golden-file format.
    pub fn canonical_string(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (idx, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.print_negative();
            let mag = if neg { -c } else { c.clone() };
            if idx == 0 {
                if neg {
                    out.push('-');
                }
            } else if neg {
                out.push_str(" - ");
            } else {
                out.push_str(" + ");
            }
            if m.is_one() {
                out.push_str(&mag.canonical_string());
            } else {
                if !mag.is_one() {
                    out.push_str(&mag.canonical_string());
                    out.push('*');
                }
                m.disp(&mut out);
            }
        }
        out
    }
}

fn gpow(x: &GaussRat, n: u32) -> GaussRat {
    let mut out = GaussRat::one();
    for _ in 0..n {
        out = &out * x;
    }
    out
}

impl fmt::Display for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical_string())
    }
}
