//! Multivariate polynomials over Q(i) on the fixed variable pool used by
//! the model-surface computations.

use crate::rational::GaussRat;
use std::collections::BTreeMap;
use std::fmt;

/// Global variable order. The first five form the intrinsic chart on the
/// surface, the rest are the ambient holomorphic coordinates and their
/// conjugates.
pub const VARS: [&str; 11] = [
    "z", "zb", "u1", "u2", "u3", "w1", "w2", "w3", "wb1", "wb2", "wb3",
];

pub const Z: usize = 0;
pub const ZB: usize = 1;
pub const U1: usize = 2;
pub const W1: usize = 5;
pub const WB1: usize = 8;

pub fn var_index(name: &str) -> Option<usize> {
    VARS.iter().position(|v| *v == name)
}

/// Conjugate variable: z ↔ zb, w_k ↔ wb_k, u_k fixed (real).
pub fn conj_var(i: usize) -> usize {
    match i {
        Z => ZB,
        ZB => Z,
        U1..=4 => i,
        W1..=7 => i + 3,
        _ => i - 3,
    }
}

/// Exponent vector over VARS.
pub type ExpVec = [u32; 11];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiPoly {
    terms: BTreeMap<ExpVec, GaussRat>,
}

impl MultiPoly {
    pub fn zero() -> Self {
        MultiPoly {
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: GaussRat) -> Self {
        let mut p = MultiPoly::zero();
        if !c.is_zero() {
            p.terms.insert([0; 11], c);
        }
        p
    }

    pub fn one() -> Self {
        MultiPoly::constant(GaussRat::one())
    }

    pub fn var(i: usize) -> Self {
        let mut e = [0; 11];
        e[i] = 1;
        let mut p = MultiPoly::zero();
        p.terms.insert(e, GaussRat::one());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, e: ExpVec, c: GaussRat) {
        let slot = self.terms.entry(e).or_insert_with(GaussRat::zero);
        *slot = &*slot + &c;
        if slot.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn add(&self, other: &MultiPoly) -> MultiPoly {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(*e, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &MultiPoly) -> MultiPoly {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> MultiPoly {
        MultiPoly {
            terms: self.terms.iter().map(|(e, c)| (*e, c.neg())).collect(),
        }
    }

    pub fn scale(&self, c: &GaussRat) -> MultiPoly {
        if c.is_zero() {
            return MultiPoly::zero();
        }
        MultiPoly {
            terms: self.terms.iter().map(|(e, v)| (*e, v * c)).collect(),
        }
    }

    pub fn mul(&self, other: &MultiPoly) -> MultiPoly {
        let mut out = MultiPoly::zero();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let mut e = *e1;
                for (a, b) in e.iter_mut().zip(e2.iter()) {
                    *a += b;
                }
                out.add_term(e, c1 * c2);
            }
        }
        out
    }

    /// Formal partial derivative.
    pub fn diff(&self, i: usize) -> MultiPoly {
        let mut out = MultiPoly::zero();
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut d = *e;
            d[i] -= 1;
            out.add_term(d, c * &GaussRat::from_int(e[i] as i64));
        }
        out
    }

    /// Complex conjugate: swap paired variables, conjugate coefficients.
    pub fn conj(&self) -> MultiPoly {
        let mut out = MultiPoly::zero();
        for (e, c) in &self.terms {
            let mut m = [0; 11];
            for (i, &p) in e.iter().enumerate() {
                m[conj_var(i)] = p;
            }
            out.add_term(m, c.conj());
        }
        out
    }

    /// Substitutes polynomials for selected variables.
    pub fn subst(&self, map: &BTreeMap<usize, MultiPoly>) -> MultiPoly {
        let mut out = MultiPoly::zero();
        for (e, c) in &self.terms {
            let mut term = MultiPoly::constant(c.clone());
            for (i, &p) in e.iter().enumerate() {
                if p == 0 {
                    continue;
                }
                let factor = map
                    .get(&i)
                    .cloned()
                    .unwrap_or_else(|| MultiPoly::var(i));
                for _ in 0..p {
                    term = term.mul(&factor);
                }
            }
            out = out.add(&term);
        }
        out
    }

    /// Evaluates at a full point.
    pub fn eval(&self, point: &[GaussRat; 11]) -> GaussRat {
        let mut total = GaussRat::zero();
        for (e, c) in &self.terms {
            let mut v = c.clone();
            for (i, &p) in e.iter().enumerate() {
                for _ in 0..p {
                    v = &v * &point[i];
                }
            }
            total = &total + &v;
        }
        total
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ExpVec, &GaussRat)> {
        self.terms.iter()
    }

    /// Which variables actually occur.
    pub fn support(&self) -> Vec<usize> {
        let mut seen = [false; 11];
        for e in self.terms.keys() {
            for (i, &p) in e.iter().enumerate() {
                if p > 0 {
                    seen[i] = true;
                }
            }
        }
        seen.iter()
            .enumerate()
            .filter(|(_, &s)| s)
            .map(|(i, _)| i)
            .collect()
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &p)| p > 0)
                .map(|(i, &p)| {
                    if p == 1 {
                        VARS[i].to_string()
                    } else {
                        format!("{}^{}", VARS[i], p)
                    }
                })
                .collect();
            let coeff = c.canonical_string();
            let body = if mono.is_empty() {
                coeff
            } else if c.is_one() {
                mono.join("*")
            } else if c.neg().is_one() {
                format!("-{}", mono.join("*"))
            } else {
                format!("{}*{}", coeff, mono.join("*"))
            };
            if first {
                write!(f, "{}", body)?;
                first = false;
            } else if let Some(stripped) = body.strip_prefix('-') {
                write!(f, " - {}", stripped)?;
            } else {
                write!(f, " + {}", body)?;
            }
        }
        Ok(())
    }
}

/// Parses `+ - * ^ ( )` expressions over the variable pool, rationals,
/// and `i`, e.g. `"-i*(z^2*zb - z*zb^2)"`.
pub fn parse_poly(s: &str) -> Result<MultiPoly, String> {
    let tokens: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
    let mut p = Parser { t: &tokens, pos: 0 };
    let e = p.expr()?;
    if p.pos != p.t.len() {
        return Err(format!("trailing input at {}", p.pos));
    }
    Ok(e)
}

struct Parser<'a> {
    t: &'a [char],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<char> {
        self.t.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<MultiPoly, String> {
        let mut acc = self.term()?;
        while let Some(c) = self.peek() {
            if c == '+' || c == '-' {
                self.pos += 1;
                let rhs = self.term()?;
                acc = if c == '+' { acc.add(&rhs) } else { acc.sub(&rhs) };
            } else {
                break;
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<MultiPoly, String> {
        let mut acc = self.factor()?;
        while self.peek() == Some('*') {
            self.pos += 1;
            acc = acc.mul(&self.factor()?);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<MultiPoly, String> {
        let base = self.atom()?;
        if self.peek() == Some('^') {
            self.pos += 1;
            let n = self.uint()?;
            let mut acc = MultiPoly::one();
            for _ in 0..n {
                acc = acc.mul(&base);
            }
            return Ok(acc);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<MultiPoly, String> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(')') {
                    return Err("expected )".into());
                }
                self.pos += 1;
                Ok(e)
            }
            Some('-') => {
                self.pos += 1;
                Ok(self.factor()?.neg())
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.uint()?;
                if self.peek() == Some('/') {
                    self.pos += 1;
                    let d = self.uint()?;
                    Ok(MultiPoly::constant(GaussRat::from_ratio(n as i64, d as i64)))
                } else {
                    Ok(MultiPoly::constant(GaussRat::from_int(n as i64)))
                }
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric()) {
                    self.pos += 1;
                }
                let name: String = self.t[start..self.pos].iter().collect();
                if name == "i" {
                    return Ok(MultiPoly::constant(GaussRat::i()));
                }
                var_index(&name)
                    .map(MultiPoly::var)
                    .ok_or_else(|| format!("unknown variable {}", name))
            }
            other => Err(format!("unexpected token {:?}", other)),
        }
    }

    fn uint(&mut self) -> Result<u64, String> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err("expected digits".into());
        }
        self.t[start..self.pos]
            .iter()
            .collect::<String>()
            .parse()
            .map_err(|_| "bad integer".into())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z() -> MultiPoly {
        MultiPoly::var(Z)
    }

    fn zb() -> MultiPoly {
        MultiPoly::var(ZB)
    }

    #[test]
    fn ring_identities() {
        let p = z().mul(&zb()).add(&MultiPoly::var(U1).scale(&GaussRat::i()));
        let q = zb().sub(&MultiPoly::one());
        assert_eq!(p.mul(&q), q.mul(&p));
        assert_eq!(p.sub(&p), MultiPoly::zero());
        assert_eq!(p.mul(&MultiPoly::one()), p);
    }

    #[test]
    fn diff_and_leibniz() {
        let p = z().mul(&z()).mul(&zb());
        assert_eq!(p.diff(Z), z().mul(&zb()).scale(&GaussRat::from_int(2)));
        let q = zb().add(&MultiPoly::one());
        let lhs = p.mul(&q).diff(ZB);
        let rhs = p.diff(ZB).mul(&q).add(&p.mul(&q.diff(ZB)));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn conj_is_involutive_and_pairs_variables() {
        let p = z().mul(&z()).scale(&GaussRat::i()).add(&MultiPoly::var(U1));
        let c = p.conj();
        assert_eq!(c, zb().mul(&zb()).scale(&GaussRat::i().neg()).add(&MultiPoly::var(U1)));
        assert_eq!(c.conj(), p);
    }

    #[test]
    fn subst_and_eval() {
        // w1 -> u1 + i z zb, then evaluate
        let mut map = BTreeMap::new();
        map.insert(
            W1,
            MultiPoly::var(U1).add(&z().mul(&zb()).scale(&GaussRat::i())),
        );
        let p = MultiPoly::var(W1).mul(&z());
        let s = p.subst(&map);
        let mut point = [(); 11].map(|_| GaussRat::zero());
        point[Z] = GaussRat::from_int(2);
        point[ZB] = GaussRat::from_int(3);
        point[U1] = GaussRat::one();
        // (1 + 6i) * 2
        assert_eq!(s.eval(&point), GaussRat::from_parts(2, 1, 12, 1));
    }

    #[test]
    fn parser_handles_the_surface_equations() {
        let p = parse_poly("-i*(z^2*zb - z*zb^2)").unwrap();
        let want = z()
            .mul(&z())
            .mul(&zb())
            .sub(&z().mul(&zb()).mul(&zb()))
            .scale(&GaussRat::i().neg());
        assert_eq!(p, want);
        assert_eq!(parse_poly("z*zb").unwrap(), z().mul(&zb()));
        assert_eq!(
            parse_poly("1/2*z + 3").unwrap(),
            z().scale(&GaussRat::from_ratio(1, 2)).add(&MultiPoly::constant(GaussRat::from_int(3)))
        );
        assert!(parse_poly("q + 1").is_err());
        assert!(parse_poly("z +").is_err());
    }
}
