//! Exact arithmetic over the Gaussian rationals Q(i).

use num::rational::BigRational;
use num::traits::{One, Signed, Zero};
use num::BigInt;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// A Gaussian rational `re + im*i` with exact `BigRational` parts.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GaussRat {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussRat {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussRat { re, im }
    }

    pub fn zero() -> Self {
        GaussRat {
            re: BigRational::zero(),
            im: BigRational::zero(),
        }
    }

    pub fn one() -> Self {
        GaussRat {
            re: BigRational::one(),
            im: BigRational::zero(),
        }
    }

    pub fn i() -> Self {
        GaussRat {
            re: BigRational::zero(),
            im: BigRational::one(),
        }
    }

    pub fn from_int(n: i64) -> Self {
        GaussRat {
            re: BigRational::from_integer(BigInt::from(n)),
            im: BigRational::zero(),
        }
    }

    /// `n/d` as a real rational. `d` must be nonzero.
    pub fn from_ratio(n: i64, d: i64) -> Self {
        assert!(d != 0, "zero denominator");
        GaussRat {
            re: BigRational::new(BigInt::from(n), BigInt::from(d)),
            im: BigRational::zero(),
        }
    }

    /// `(rn/rd) + (in_/id)*i`.
    pub fn from_parts(rn: i64, rd: i64, in_: i64, id: i64) -> Self {
        assert!(rd != 0 && id != 0, "zero denominator");
        GaussRat {
            re: BigRational::new(BigInt::from(rn), BigInt::from(rd)),
            im: BigRational::new(BigInt::from(in_), BigInt::from(id)),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        GaussRat {
            re: self.re.clone(),
            im: -self.im.clone(),
        }
    }

    /// Multiplicative inverse. Panics on zero.
    pub fn inv(&self) -> Self {
        let norm = &self.re * &self.re + &self.im * &self.im;
        assert!(!norm.is_zero(), "division by zero in Q(i)");
        GaussRat {
            re: &self.re / &norm,
            im: -(&self.im / &norm),
        }
    }

    pub fn mul_i(&self) -> Self {
        GaussRat {
            re: -self.im.clone(),
            im: self.re.clone(),
        }
    }

    /// Sign used when folding a leading minus out of a printed term:
    pub fn neg(&self) -> GaussRat {
        GaussRat {
            re: -self.re.clone(),
            im: -self.im.clone(),
        }
    }

    /// negative real part wins, then negative imaginary part.
    pub fn print_negative(&self) -> bool {
        if self.re.is_negative() {
            true
        } else if self.re.is_zero() {
            self.im.is_negative()
        } else {
            false
        }
    }

    /// Canonical coefficient string: `"3"`, `"-1/2"`, `"i"`, `"-2/3*i"`,
    /// `"(1/2-i)"`. Mixed values are parenthesized.
    pub fn canonical_string(&self) -> String {
        if self.im.is_zero() {
            return format!("{}", self.re);
        }
        if self.re.is_zero() {
            return imag_string(&self.im);
        }
        let imabs = self.im.abs();
        let imstr = if imabs.is_one() {
            "i".to_string()
        } else {
            format!("{}*i", imabs)
        };
        let sign = if self.im.is_negative() { "-" } else { "+" };
        format!("({}{}{})", self.re, sign, imstr)
    }
}

fn imag_string(im: &BigRational) -> String {
    if im.is_one() {
        "i".to_string()
    } else if (-im.clone()).is_one() {
        "-i".to_string()
    } else {
        format!("{}*i", im)
    }
}

impl fmt::Display for GaussRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical_string())
    }
}

impl std::str::FromStr for GaussRat {
    type Err = String;

    /// Inverse of `canonical_string`: sums of `p/q` and `p/q*i` terms,
    /// optionally parenthesized, e.g. `"3"`, `"-i"`, `"(1/2-2/3*i)"`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut t: &str = &s.chars().filter(|c| !c.is_whitespace()).collect::<String>();
        let owned;
        if t.starts_with('(') && t.ends_with(')') {
            owned = t[1..t.len() - 1].to_string();
            t = &owned;
        }
        if t.is_empty() {
            return Err("empty coefficient".into());
        }
        let mut total = GaussRat::zero();
        let mut term = String::new();
        let flush = |term: &mut String, total: &mut GaussRat| -> Result<(), String> {
            if term.is_empty() {
                return Ok(());
            }
            let (sign, body) = if let Some(rest) = term.strip_prefix('-') {
                (true, rest)
            } else {
                (false, term.strip_prefix('+').unwrap_or(term))
            };
            let v = if body == "i" {
                GaussRat::i()
            } else if let Some(r) = body.strip_suffix("*i") {
                let q: BigRational = r.parse().map_err(|_| format!("bad term {}", term))?;
                GaussRat {
                    re: BigRational::zero(),
                    im: q,
                }
            } else {
                let q: BigRational = body.parse().map_err(|_| format!("bad term {}", term))?;
                GaussRat {
                    re: q,
                    im: BigRational::zero(),
                }
            };
            *total = if sign { &*total - &v } else { &*total + &v };
            term.clear();
            Ok(())
        };
        for (pos, c) in t.char_indices() {
            if (c == '+' || c == '-') && pos != 0 {
                flush(&mut term, &mut total)?;
            }
            term.push(c);
        }
        flush(&mut term, &mut total)?;
        Ok(total)
    }
}

impl Add for &GaussRat {
    type Output = GaussRat;
    fn add(self, rhs: &GaussRat) -> GaussRat {
        GaussRat {
            re: &self.re + &rhs.re,
            im: &self.im + &rhs.im,
        }
    }
}

impl Sub for &GaussRat {
    type Output = GaussRat;
    fn sub(self, rhs: &GaussRat) -> GaussRat {
        GaussRat {
            re: &self.re - &rhs.re,
            im: &self.im - &rhs.im,
        }
    }
}

impl Mul for &GaussRat {
    type Output = GaussRat;
    fn mul(self, rhs: &GaussRat) -> GaussRat {
        GaussRat {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }
}

impl Neg for &GaussRat {
    type Output = GaussRat;
    fn neg(self) -> GaussRat {
        GaussRat {
            re: -self.re.clone(),
            im: -self.im.clone(),
        }
    }
}
