//! Finite-dimensional Lie algebras given by exact structure constants:
//! brackets, Jacobi audits, ad maps, Maurer-Cartan duals, and the two
//! built-in tables used by the pipeline.

use crate::linalg::{self, Matrix};
use crate::rational::GaussRat;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LieError {
    #[error("table index {0} out of range for dimension {1}")]
    IndexRange(usize, usize),
    #[error("malformed table document: {0}")]
    Malformed(String),
    #[error("subset is not bracket-closed: [{0}, {1}] leaves the span")]
    NotClosed(usize, usize),
}

/// An element is a coordinate vector in the basis.
pub type Element = Vec<GaussRat>;

/// A Lie algebra by structure constants. Only the pairs i < j are stored;
/// antisymmetry fills the rest.
#[derive(Clone, Debug)]
pub struct LieAlgebra {
    pub dim: usize,
    pub labels: Vec<String>,
    table: BTreeMap<(usize, usize), Vec<(usize, GaussRat)>>,
}

impl LieAlgebra {
    pub fn new(
        dim: usize,
        labels: Vec<String>,
        entries: Vec<(usize, usize, Vec<(usize, GaussRat)>)>,
    ) -> Result<Self, LieError> {
        assert_eq!(labels.len(), dim);
        let mut table = BTreeMap::new();
        for (i, j, coeffs) in entries {
            for idx in [i, j].into_iter().chain(coeffs.iter().map(|(k, _)| *k)) {
                if idx >= dim {
                    return Err(LieError::IndexRange(idx, dim));
                }
            }
            if i == j {
                return Err(LieError::Malformed(format!("bracket [{}, {}]", i, j)));
            }
            let (key, flip) = if i < j { ((i, j), false) } else { ((j, i), true) };
            let stored: Vec<(usize, GaussRat)> = coeffs
                .into_iter()
                .filter(|(_, c)| !c.is_zero())
                .map(|(k, c)| (k, if flip { c.neg() } else { c }))
                .collect();
            if table.insert(key, stored).is_some() {
                return Err(LieError::Malformed(format!("duplicate bracket [{}, {}]", i, j)));
            }
        }
        Ok(LieAlgebra { dim, labels, table })
    }

    pub fn abelian(dim: usize) -> Self {
        let labels = (0..dim).map(|i| format!("x{}", i + 1)).collect();
        LieAlgebra::new(dim, labels, Vec::new()).unwrap()
    }

    /// [e_i, e_j] as a coordinate vector.
    pub fn bracket_basis(&self, i: usize, j: usize) -> Element {
        let mut out = vec![GaussRat::zero(); self.dim];
        if i == j {
            return out;
        }
        let (key, flip) = if i < j { ((i, j), false) } else { ((j, i), true) };
        if let Some(coeffs) = self.table.get(&key) {
            for (k, c) in coeffs {
                out[*k] = if flip { c.neg() } else { c.clone() };
            }
        }
        out
    }

    /// Bilinear extension of the constants table.
    pub fn bracket(&self, x: &[GaussRat], y: &[GaussRat]) -> Element {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        let mut out = vec![GaussRat::zero(); self.dim];
        for i in 0..self.dim {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..self.dim {
                if y[j].is_zero() {
                    continue;
                }
                let b = self.bracket_basis(i, j);
                let f = &x[i] * &y[j];
                for k in 0..self.dim {
                    if !b[k].is_zero() {
                        out[k] = &out[k] + &(&b[k] * &f);
                    }
                }
            }
        }
        out
    }

    /// All triples i < j < k whose cyclic Jacobi sum is nonzero, with the
    /// defect vector. Empty certifies a Lie algebra.
    pub fn jacobi_residual(&self) -> Vec<((usize, usize, usize), Element)> {
        let mut out = Vec::new();
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                for k in (j + 1)..self.dim {
                    let mut sum = vec![GaussRat::zero(); self.dim];
                    for (a, b, c) in [(i, j, k), (j, k, i), (k, i, j)] {
                        let inner = self.bracket_basis(b, c);
                        let term = self.bracket(&basis_vec(self.dim, a), &inner);
                        for t in 0..self.dim {
                            sum[t] = &sum[t] + &term[t];
                        }
                    }
                    if sum.iter().any(|c| !c.is_zero()) {
                        out.push(((i, j, k), sum));
                    }
                }
            }
        }
        out
    }

    /// Matrix of ad_k := [e_k, ·]; entry (r, c) is the e_r-component of
    /// [e_k, e_c].
    pub fn ad_matrix(&self, k: usize) -> Matrix {
        let mut m = vec![vec![GaussRat::zero(); self.dim]; self.dim];
        for c in 0..self.dim {
            let b = self.bracket_basis(k, c);
            for (r, row) in m.iter_mut().enumerate() {
                row[c] = b[r].clone();
            }
        }
        m
    }

    /// Is the subset closed under the bracket, i.e. a subalgebra?
    pub fn is_closed(&self, members: &[usize]) -> bool {
        self.closure_defect(members).is_none()
    }

    fn closure_defect(&self, members: &[usize]) -> Option<(usize, usize)> {
        for &i in members {
            for &j in members {
                let b = self.bracket_basis(i, j);
                for (k, c) in b.iter().enumerate() {
                    if !c.is_zero() && !members.contains(&k) {
                        return Some((i, j));
                    }
                }
            }
        }
        None
    }

    pub fn is_abelian_on(&self, members: &[usize]) -> bool {
        members
            .iter()
            .all(|&i| members.iter().all(|&j| self.bracket_basis(i, j).iter().all(|c| c.is_zero())))
    }

    /// The subalgebra spanned by a subset of basis elements, re-indexed.
    pub fn restricted(&self, members: &[usize]) -> Result<LieAlgebra, LieError> {
        if let Some((i, j)) = self.closure_defect(members) {
            return Err(LieError::NotClosed(i, j));
        }
        let pos: BTreeMap<usize, usize> =
            members.iter().enumerate().map(|(p, &m)| (m, p)).collect();
        let labels = members.iter().map(|&m| self.labels[m].clone()).collect();
        let mut entries = Vec::new();
        for (a, &i) in members.iter().enumerate() {
            for &j in members.iter().skip(a + 1) {
                let b = self.bracket_basis(i, j);
                let coeffs: Vec<(usize, GaussRat)> = b
                    .into_iter()
                    .enumerate()
                    .filter(|(_, c)| !c.is_zero())
                    .map(|(k, c)| (pos[&k], c))
                    .collect();
                if !coeffs.is_empty() {
                    entries.push((pos[&i], pos[&j], coeffs));
                }
            }
        }
        LieAlgebra::new(members.len(), labels, entries)
    }

    /// Maurer-Cartan rules of the dual coframe.
    pub fn mc_equations(&self, coframe: Vec<String>) -> McEquations {
        assert_eq!(coframe.len(), self.dim);
        let mut rules = vec![BTreeMap::new(); self.dim];
        for (&(i, j), coeffs) in &self.table {
            for (k, c) in coeffs {
                let e: &mut BTreeMap<_, _> = &mut rules[*k];
                let slot = e.entry((i, j)).or_insert_with(GaussRat::zero);
                *slot = &*slot - c;
            }
        }
        for r in &mut rules {
            r.retain(|_, c| !c.is_zero());
        }
        McEquations { coframe, rules }
    }

    pub fn has_any_bracket(&self) -> bool {
        self.table.values().any(|v| !v.is_empty())
    }

    /// Loads `{dim, labels, brackets: [[i, j, [[k, coeff]]]]}` where coeff
    /// is an integer or a canonical coefficient string.
    pub fn from_json(doc: &str) -> Result<LieAlgebra, LieError> {
        let v: serde_json::Value =
            serde_json::from_str(doc).map_err(|e| LieError::Malformed(e.to_string()))?;
        let dim = v["dim"]
            .as_u64()
            .ok_or_else(|| LieError::Malformed("missing dim".into()))? as usize;
        let labels: Vec<String> = v["labels"]
            .as_array()
            .ok_or_else(|| LieError::Malformed("missing labels".into()))?
            .iter()
            .map(|l| l.as_str().map(String::from))
            .collect::<Option<_>>()
            .ok_or_else(|| LieError::Malformed("labels must be strings".into()))?;
        if labels.len() != dim {
            return Err(LieError::Malformed("labels length differs from dim".into()));
        }
        let mut entries = Vec::new();
        for row in v["brackets"]
            .as_array()
            .ok_or_else(|| LieError::Malformed("missing brackets".into()))?
        {
            let arr = row
                .as_array()
                .filter(|a| a.len() == 3)
                .ok_or_else(|| LieError::Malformed("bracket rows are [i, j, coeffs]".into()))?;
            let i = arr[0]
                .as_u64()
                .ok_or_else(|| LieError::Malformed("bracket index".into()))? as usize;
            let j = arr[1]
                .as_u64()
                .ok_or_else(|| LieError::Malformed("bracket index".into()))? as usize;
            let mut coeffs = Vec::new();
            for pair in arr[2]
                .as_array()
                .ok_or_else(|| LieError::Malformed("coeff list".into()))?
            {
                let p = pair
                    .as_array()
                    .filter(|a| a.len() == 2)
                    .ok_or_else(|| LieError::Malformed("coeff pairs are [k, c]".into()))?;
                let k = p[0]
                    .as_u64()
                    .ok_or_else(|| LieError::Malformed("coeff index".into()))? as usize;
                let c = match &p[1] {
                    serde_json::Value::Number(n) => {
                        let int = n
                            .as_i64()
                            .ok_or_else(|| LieError::Malformed("non-integer number".into()))?;
                        GaussRat::from_int(int)
                    }
                    serde_json::Value::String(s) => {
                        s.parse().map_err(LieError::Malformed)?
                    }
                    _ => return Err(LieError::Malformed("coeff must be number or string".into())),
                };
                coeffs.push((k, c));
            }
            entries.push((i, j, coeffs));
        }
        LieAlgebra::new(dim, labels, entries)
    }
}

fn basis_vec(dim: usize, i: usize) -> Element {
    let mut v = vec![GaussRat::zero(); dim];
    v[i] = GaussRat::one();
    v
}

/// Maurer-Cartan structure rules on a dual coframe: for each coframe index
/// k, the map (i, j) -> coefficient with dω^k = Σ coeff·ω^i∧ω^j over i < j.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct McEquations {
    pub coframe: Vec<String>,
    pub rules: Vec<BTreeMap<(usize, usize), GaussRat>>,
}

impl McEquations {
    /// Formal d² residuals with the structure coefficients held constant;
    /// empty is an independent restatement of the Jacobi identity.
    pub fn d_squared_residual(&self) -> Vec<(usize, (usize, usize, usize), GaussRat)> {
        let n = self.coframe.len();
        let mut out = Vec::new();
        for (k, rule) in self.rules.iter().enumerate() {
            let mut acc: BTreeMap<(usize, usize, usize), GaussRat> = BTreeMap::new();
            for (&(i, j), c) in rule {
                // d(c ω^i∧ω^j) = c dω^i∧ω^j - c ω^i∧dω^j
                for (&(p, q), r) in &self.rules[i] {
                    add_triple(&mut acc, [p, q, j], &(c * r));
                }
                for (&(p, q), r) in &self.rules[j] {
                    add_triple(&mut acc, [i, p, q], &(c * r).neg());
                }
            }
            for (t, c) in acc {
                if !c.is_zero() {
                    assert!(t.0 < n);
                    out.push((k, t, c));
                }
            }
        }
        out
    }

    pub fn display_lines(&self) -> Vec<String> {
        self.rules
            .iter()
            .enumerate()
            .map(|(k, rule)| {
                let mut rhs = String::new();
                for (&(i, j), c) in rule {
                    let mono = format!("{}∧{}", self.coframe[i], self.coframe[j]);
                    if rhs.is_empty() {
                        if c.is_one() {
                            rhs = mono;
                        } else if c.neg().is_one() {
                            rhs = format!("-{}", mono);
                        } else {
                            rhs = format!("{}·{}", c, mono);
                        }
                    } else {
                        let (sign, abs) = if c.print_negative() { ("-", c.neg()) } else { ("+", c.clone()) };
                        if abs.is_one() {
                            rhs = format!("{} {} {}", rhs, sign, mono);
                        } else {
                            rhs = format!("{} {} {}·{}", rhs, sign, abs, mono);
                        }
                    }
                }
                if rhs.is_empty() {
                    rhs = "0".into();
                }
                format!("d{} = {}", self.coframe[k], rhs)
            })
            .collect()
    }
}

fn add_triple(
    acc: &mut BTreeMap<(usize, usize, usize), GaussRat>,
    idx: [usize; 3],
    c: &GaussRat,
) {
    // sort with sign; repeated index kills the term
    let mut v = idx;
    let mut sign = 1i64;
    for a in 0..3 {
        for b in (a + 1)..3 {
            if v[a] > v[b] {
                v.swap(a, b);
                sign = -sign;
            }
        }
    }
    if v[0] == v[1] || v[1] == v[2] {
        return;
    }
    let signed = if sign < 0 { c.neg() } else { c.clone() };
    let slot = acc.entry((v[0], v[1], v[2])).or_insert_with(GaussRat::zero);
    *slot = &*slot + &signed;
    if slot.is_zero() {
        acc.remove(&(v[0], v[1], v[2]));
    }
}

/// A witness for an isomorphism onto the nilpotent target: the rows are
/// the images of the target basis in parent coordinates.
pub type IsoWitness = Vec<Element>;

/// Searches a bounded family of basis changes (basis vectors and pairwise
/// sums as the two generators, the rest generated by the target's own
/// defining brackets) for a structure-constant-preserving map onto
/// `target`. A `None` means no witness exists within that family.
pub fn check_nilpotent_iso(
    parent: &LieAlgebra,
    members: &[usize],
    target: &LieAlgebra,
) -> Result<Option<IsoWitness>, LieError> {
    let sub = parent.restricted(members)?;
    if sub.dim != target.dim {
        return Ok(None);
    }
    if sub.has_any_bracket() != target.has_any_bracket() {
        return Ok(None);
    }
    let dim = sub.dim;
    let mut candidates: Vec<Element> = (0..dim).map(|i| basis_vec(dim, i)).collect();
    for i in 0..dim {
        for j in (i + 1)..dim {
            let mut v = basis_vec(dim, i);
            v[j] = GaussRat::one();
            candidates.push(v);
        }
    }
    for y1 in &candidates {
        for y2 in &candidates {
            let y3 = sub.bracket(y1, y2);
            let y4 = sub.bracket(y1, &y3);
            let y5 = sub.bracket(y2, &y3);
            let ys = [y1.clone(), y2.clone(), y3, y4, y5];
            if linalg::rank(&ys.to_vec()) != dim {
                continue;
            }
            if table_matches(&sub, &ys, target) {
                // express the witness in parent coordinates
                let witness = ys
                    .iter()
                    .map(|y| {
                        let mut full = vec![GaussRat::zero(); parent.dim];
                        for (p, &m) in members.iter().enumerate() {
                            full[m] = y[p].clone();
                        }
                        full
                    })
                    .collect();
                return Ok(Some(witness));
            }
        }
    }
    Ok(None)
}

/// Do the elements `ys` satisfy exactly the target's constants table?
fn table_matches(sub: &LieAlgebra, ys: &[Element], target: &LieAlgebra) -> bool {
    let dim = target.dim;
    // column matrix of the ys for coordinate solving
    let mut cols: Matrix = vec![vec![GaussRat::zero(); dim]; dim];
    for (j, y) in ys.iter().enumerate() {
        for i in 0..dim {
            cols[i][j] = y[i].clone();
        }
    }
    for a in 0..dim {
        for b in (a + 1)..dim {
            let br = sub.bracket(&ys[a], &ys[b]);
            let Some(coords) = linalg::solve(&cols, &br) else {
                return false;
            };
            if coords != target.bracket_basis(a, b) {
                return false;
            }
        }
    }
    true
}

/// The nilpotent algebra with [x1,x2] = x3, [x1,x3] = x4, [x2,x3] = x5.
pub fn n54() -> LieAlgebra {
    let one = GaussRat::one;
    LieAlgebra::new(
        5,
        ["x1", "x2", "x3", "x4", "x5"].map(String::from).to_vec(),
        vec![
            (0, 1, vec![(2, one())]),
            (0, 2, vec![(3, one())]),
            (1, 2, vec![(4, one())]),
        ],
    )
    .unwrap()
}

pub const G7_FRAME: [&str; 7] = ["e_ᾱ", "e_α", "e_σ̄", "e_σ", "e_ρ", "e_ζ̄", "e_ζ"];
pub const G7_COFRAME: [&str; 7] = ["ᾱ", "α", "σ̄", "σ", "ρ", "ζ̄", "ζ"];

/// The 7-dimensional symmetry algebra in the frame order
/// (e_ᾱ, e_α, e_σ̄, e_σ, e_ρ, e_ζ̄, e_ζ). The table is fixed by
/// Maurer-Cartan duality against the flat structure equations; two
/// entries of the printed bracket list disagree with that duality and the
/// Jacobi audit arbitrates in favor of the dual table.
pub fn g7() -> LieAlgebra {
    let m1 = || GaussRat::from_int(-1);
    let m2 = || GaussRat::from_int(-2);
    LieAlgebra::new(
        7,
        G7_FRAME.map(String::from).to_vec(),
        vec![
            (0, 2, vec![(2, m2())]),
            (1, 2, vec![(2, m1())]),
            (0, 3, vec![(3, m1())]),
            (1, 3, vec![(3, m2())]),
            (0, 4, vec![(4, m1())]),
            (1, 4, vec![(4, m1())]),
            (0, 5, vec![(5, m1())]),
            (1, 6, vec![(6, m1())]),
            (4, 5, vec![(2, m1())]),
            (4, 6, vec![(3, m1())]),
            (5, 6, vec![(4, GaussRat::i())]),
        ],
    )
    .unwrap()
}

impl fmt::Display for LieAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "dim {}", self.dim)?;
        for (&(i, j), coeffs) in &self.table {
            let mut rhs = String::new();
            for (k, c) in coeffs {
                let part = if c.is_one() {
                    self.labels[*k].clone()
                } else {
                    format!("{}·{}", c, self.labels[*k])
                };
                if rhs.is_empty() {
                    rhs = part;
                } else {
                    rhs = format!("{} + {}", rhs, part);
                }
            }
            writeln!(f, "[{}, {}] = {}", self.labels[i], self.labels[j], rhs)?;
        }
        Ok(())
    }
}
