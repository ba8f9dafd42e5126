//! Symbol alphabet for the scalar ring: fiber coordinates, structure
//! functions, and derivation words.

use std::fmt;

/// Combining macron used to print conjugated symbols (`a` + U+0304 = `ā`).
pub const MACRON: char = '\u{0304}';

/// Inserts a combining macron after the first character of `s`.
pub fn bar_first(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    let mut chars = s.chars();
    if let Some(c) = chars.next() {
        out.push(c);
        out.push(MACRON);
    }
    out.extend(chars);
    out
}

/// Frame derivation letters in canonical order. A derivation word
/// `w = [w0, w1, ..]` denotes `w0(w1(.. (f)))` and is canonical when
/// ascending outermost-first: `w0 <= w1 <= ..`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Letter {
    SBar,
    S,
    T,
    LBar,
    L,
}

impl Letter {
    pub const ALL: [Letter; 5] = [Letter::SBar, Letter::S, Letter::T, Letter::LBar, Letter::L];

    pub fn conj(self) -> Self {
        match self {
            Letter::SBar => Letter::S,
            Letter::S => Letter::SBar,
            Letter::T => Letter::T,
            Letter::LBar => Letter::L,
            Letter::L => Letter::LBar,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Letter::SBar => 0,
            Letter::S => 1,
            Letter::T => 2,
            Letter::LBar => 3,
            Letter::L => 4,
        }
    }

    pub fn from_index(i: usize) -> Self {
        Letter::ALL[i]
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Letter::SBar => return write!(f, "S{}", MACRON),
            Letter::S => "S",
            Letter::T => "T",
            Letter::LBar => return write!(f, "L{}", MACRON),
            Letter::L => "L",
        };
        f.write_str(s)
    }
}

/// Names of scalar base functions. `A` and `JF` are real: conjugation
/// fixes them, and the flag on a `BaseSymbol` carrying one of these names
/// is forced to `false`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BaseName {
    A,
    B,
    P,
    Q,
    R,
    EF,
    FF,
    GF,
    JF,
    KF,
    B0,
    C0,
    D0,
    E0,
    Named(String),
}

impl BaseName {
    pub fn is_real(&self) -> bool {
        matches!(self, BaseName::A | BaseName::JF)
    }

    pub fn plain_str(&self) -> String {
        match self {
            BaseName::A => "A".into(),
            BaseName::B => "B".into(),
            BaseName::P => "P".into(),
            BaseName::Q => "Q".into(),
            BaseName::R => "R".into(),
            BaseName::EF => "E".into(),
            BaseName::FF => "F".into(),
            BaseName::GF => "G".into(),
            BaseName::JF => "J".into(),
            BaseName::KF => "K".into(),
            BaseName::B0 => "B0".into(),
            BaseName::C0 => "C0".into(),
            BaseName::D0 => "D0".into(),
            BaseName::E0 => "E0".into(),
            BaseName::Named(s) => s.clone(),
        }
    }
}

/// A canonical scalar symbol: a derivation word applied to a possibly
/// conjugated base function. Realness of `A` and `J` lives here, not in
/// the rewrite rules.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BaseSymbol {
    pub word: Vec<Letter>,
    pub name: BaseName,
    pub conj: bool,
}

impl BaseSymbol {
    pub fn new(name: BaseName, conj: bool) -> Self {
        let conj = if name.is_real() { false } else { conj };
        BaseSymbol {
            word: Vec::new(),
            name,
            conj,
        }
    }

    pub fn with_word(word: Vec<Letter>, name: BaseName, conj: bool) -> Self {
        let conj = if name.is_real() { false } else { conj };
        BaseSymbol { word, name, conj }
    }

    pub fn is_canonical_word(&self) -> bool {
        self.word.windows(2).all(|w| w[0] <= w[1])
    }
}

impl fmt::Display for BaseSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let core = if self.conj {
            bar_first(&self.name.plain_str())
        } else {
            self.name.plain_str()
        };
        let mut out = core;
        for l in self.word.iter().rev() {
            out = format!("{}({})", l, out);
        }
        f.write_str(&out)
    }
}

/// Fiber group coordinate letters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GLetter {
    Ga,
    Gb,
    Gc,
    Gd,
    Ge,
}

impl GLetter {
    pub const ALL: [GLetter; 5] = [GLetter::Ga, GLetter::Gb, GLetter::Gc, GLetter::Gd, GLetter::Ge];

    fn plain_str(self) -> &'static str {
        match self {
            GLetter::Ga => "a",
            GLetter::Gb => "b",
            GLetter::Gc => "c",
            GLetter::Gd => "d",
            GLetter::Ge => "e",
        }
    }
}

/// A fiber coordinate, possibly conjugated. Only `a`/`ā` may carry
/// negative exponents in a monomial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroupAtom {
    pub letter: GLetter,
    pub conj: bool,
}

impl GroupAtom {
    pub const A: GroupAtom = GroupAtom { letter: GLetter::Ga, conj: false };
    pub const ABAR: GroupAtom = GroupAtom { letter: GLetter::Ga, conj: true };
    pub const B: GroupAtom = GroupAtom { letter: GLetter::Gb, conj: false };
    pub const BBAR: GroupAtom = GroupAtom { letter: GLetter::Gb, conj: true };
    pub const C: GroupAtom = GroupAtom { letter: GLetter::Gc, conj: false };
    pub const CBAR: GroupAtom = GroupAtom { letter: GLetter::Gc, conj: true };
    pub const D: GroupAtom = GroupAtom { letter: GLetter::Gd, conj: false };
    pub const DBAR: GroupAtom = GroupAtom { letter: GLetter::Gd, conj: true };
    pub const E: GroupAtom = GroupAtom { letter: GLetter::Ge, conj: false };
    pub const EBAR: GroupAtom = GroupAtom { letter: GLetter::Ge, conj: true };

    pub fn conjugate(self) -> Self {
        GroupAtom {
            letter: self.letter,
            conj: !self.conj,
        }
    }

    pub fn invertible(self) -> bool {
        self.letter == GLetter::Ga
    }
}

impl fmt::Display for GroupAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.conj {
            write!(f, "{}{}", self.letter.plain_str(), MACRON)
        } else {
            f.write_str(self.letter.plain_str())
        }
    }
}
