//! Torsion absorption as exact linear algebra: which two-form slots a
//! modification of the connection forms can reach, which combinations it
//! cannot, and exact solving against symbolic right-hand sides.

use crate::linalg::{self, Matrix};
use crate::rational::GaussRat;
use crate::scalar::ScalarExpr;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AbsorbError {
    #[error("absorption targets are inconsistent at {0}")]
    Inconsistent(String),
    #[error("unknown slot {0}")]
    UnknownSlot(String),
}

/// Which connection-form modifications are on the table at one stage:
/// `pattern` maps a matrix entry (form row, coframe column) to its linear
/// combination of basis forms, `modifiable` lists the basis indices that
/// admit a semibasic shift, and `forms` lists the participating equation
/// rows.
pub struct ModPlan {
    pub pattern: BTreeMap<(usize, usize), Vec<(usize, GaussRat)>>,
    pub modifiable: Vec<usize>,
    pub basis_labels: Vec<String>,
    pub forms: Vec<usize>,
}

/// Torsion as an affine family over the modification coefficients:
/// slot values transform as t0 + M·u. Conjugate coefficients are
/// independent columns; the pipeline checks conjugation consistency on
/// any solved vector after the fact.
pub struct AbsorptionSystem {
    /// Row order: (form, leg i, leg j), ascending legs.
    pub slots: Vec<(usize, usize, usize)>,
    pub col_labels: Vec<String>,
    pub matrix: Matrix,
    pub t0: Vec<ScalarExpr>,
}

/// One cokernel direction of the absorption matrix: a functional on the
/// slots that no modification can move, together with its value.
pub struct EssentialTorsion {
    pub label: String,
    pub functional: Vec<(usize, GaussRat)>,
    pub value: ScalarExpr,
}

const DIR_NAMES: [&str; 5] = ["σ\u{304}", "σ", "ρ", "ζ\u{304}", "ζ"];

/// Assembles the slot matrix for a plan. Shifting basis form p by
/// Σ_μ u[p][μ]·θ^μ shifts the entry-(k,j) contribution by the wedge
/// against θ^j, so slot (min(μ,j), max(μ,j)) of form k moves by ±c.
pub fn build_system(
    plan: &ModPlan,
    t0_of: &dyn Fn(usize, usize, usize) -> ScalarExpr,
) -> AbsorptionSystem {
    let mut slots = Vec::new();
    let mut t0 = Vec::new();
    for &k in &plan.forms {
        for i in 0..5 {
            for j in (i + 1)..5 {
                slots.push((k, i, j));
                t0.push(t0_of(k, i, j));
            }
        }
    }
    let mut col_labels = Vec::new();
    for &p in &plan.modifiable {
        for dir in DIR_NAMES {
            col_labels.push(format!("{}[{}]", plan.basis_labels[p], dir));
        }
    }
    let cols = col_labels.len();
    let mut matrix = vec![vec![GaussRat::zero(); cols]; slots.len()];
    for (&(k, j), combo) in &plan.pattern {
        if !plan.forms.contains(&k) {
            continue;
        }
        for (p, c) in combo {
            let Some(ppos) = plan.modifiable.iter().position(|m| m == p) else {
                continue;
            };
            for mu in 0..5 {
                if mu == j {
                    continue;
                }
                let (lo, hi, sign) = if mu < j {
                    (mu, j, c.clone())
                } else {
                    (j, mu, c.neg())
                };
                let row = slots.iter().position(|s| *s == (k, lo, hi)).unwrap();
                let col = ppos * 5 + mu;
                matrix[row][col] = &matrix[row][col] + &sign;
            }
        }
    }
    AbsorptionSystem { slots, col_labels, matrix, t0 }
}

impl AbsorptionSystem {
    pub fn row_of(&self, form: usize, i: usize, j: usize) -> Option<usize> {
        self.slots.iter().position(|s| *s == (form, i, j))
    }

    pub fn slot_label(&self, row: usize) -> String {
        let (k, i, j) = self.slots[row];
        format!("d{}: {}∧{}", DIR_NAMES[k], DIR_NAMES[i], DIR_NAMES[j])
    }

    /// Basis of the left null space of the slot matrix, via the null
    /// space of its transpose. Unreachable slots come out as unit
    /// functionals; dependent reachable slots come out as combinations.
    pub fn cokernel(&self) -> Vec<Vec<GaussRat>> {
        let rows = self.slots.len();
        let cols = self.matrix.first().map_or(0, |r| r.len());
        let mut t: Matrix = vec![vec![GaussRat::zero(); rows]; cols];
        for (i, row) in self.matrix.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                t[j][i] = v.clone();
            }
        }
        let (red, pivots) = linalg::rref(&t);
        let mut basis = Vec::new();
        for f in 0..rows {
            if pivots.contains(&f) {
                continue;
            }
            let mut v = vec![GaussRat::zero(); rows];
            v[f] = GaussRat::one();
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = red[r][f].neg();
            }
            basis.push(v);
        }
        basis
    }

    /// The essential torsion: one entry per cokernel direction, with the
    /// functional applied to the current slot values.
    pub fn essential(&self) -> Vec<EssentialTorsion> {
        self.cokernel()
            .into_iter()
            .map(|v| {
                let mut functional = Vec::new();
                let mut value = ScalarExpr::zero();
                let mut label = String::new();
                for (row, c) in v.into_iter().enumerate() {
                    if c.is_zero() {
                        continue;
                    }
                    value = value.add(&self.t0[row].scale(&c));
                    if !label.is_empty() {
                        label.push_str(" + ");
                    }
                    if c.is_one() {
                        label.push_str(&self.slot_label(row));
                    } else {
                        label.push_str(&format!("({})·{}", c, self.slot_label(row)));
                    }
                    functional.push((row, c));
                }
                EssentialTorsion { label, functional, value }
            })
            .collect()
    }

    /// Solves M|rows · u = -t0|rows exactly, free coefficients set to
    /// zero. A dependent row whose right-hand side fails the same
    /// dependency is reported as inconsistent; those dependencies are
    /// exactly the built-in integrability of the structure equations, so
    /// an inconsistency here means the torsion upstream is wrong.
    pub fn solve_rows(&self, rows: &[usize]) -> Result<Vec<ScalarExpr>, AbsorbError> {
        let cols = self.matrix.first().map_or(0, |r| r.len());
        let mut a: Matrix = rows.iter().map(|&r| self.matrix[r].clone()).collect();
        let mut b: Vec<ScalarExpr> = rows.iter().map(|&r| self.t0[r].neg()).collect();
        let n = a.len();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            if r == n {
                break;
            }
            let Some(p) = (r..n).find(|&i| !a[i][c].is_zero()) else {
                continue;
            };
            a.swap(r, p);
            b.swap(r, p);
            let inv = a[r][c].inv();
            for x in a[r].iter_mut() {
                *x = &*x * &inv;
            }
            b[r] = b[r].scale(&inv);
            for i in 0..n {
                if i != r && !a[i][c].is_zero() {
                    let f = a[i][c].clone();
                    for j in 0..cols {
                        let s = &a[r][j] * &f;
                        a[i][j] = &a[i][j] - &s;
                    }
                    b[i] = b[i].sub(&b[r].scale(&f));
                }
            }
            pivots.push(c);
            r += 1;
        }
        for i in r..n {
            if !b[i].is_zero() {
                return Err(AbsorbError::Inconsistent(self.slot_label(rows[i])));
            }
        }
        let mut u = vec![ScalarExpr::zero(); cols];
        for (row, &c) in pivots.iter().enumerate() {
            u[c] = b[row].clone();
        }
        Ok(u)
    }
}
