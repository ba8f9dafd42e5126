//! The geometric packaging of the finished reduction: the seven
//! connection components paired with the seven-dimensional model
//! algebra, the three defining conditions of the connection, and its
//! curvature.
//!
//! Component order is (λ̄, λ, σ̄, σ, ρ, ζ̄, ζ), matching the model
//! coframe order, so component k pairs with basis vector k of the
//! algebra throughout.

use crate::exterior::{CoframeGen, FormExpr, FormSym, FrameIdx, McSym};
use crate::liealg::{g7, LieAlgebra};
use crate::reduce::{drop_base, Reduction};
use crate::scalar::{DerivationAlgebra, GroupAtom, ScalarExpr};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CartanError {
    #[error("connection components do not form a coframe: {0}")]
    NotCoframe(String),
    #[error("vertical calibration fails: {0}")]
    Vertical(String),
    #[error("equivariance fails for component {component} in direction {direction}")]
    Equivariance { component: String, direction: String },
}

pub const CONNECTION_LABELS: [&str; 7] =
    ["λ\u{304}", "λ", "σ\u{304}", "σ", "ρ", "ζ\u{304}", "ζ"];

const LAMBDA: FormSym = FormSym::Mc(McSym::Lambda, false);
const LAMBDA_BAR: FormSym = FormSym::Mc(McSym::Lambda, true);

/// The algebra-valued connection form. `components` and
/// `d_components` live over the rigid legs (λ, λ̄, final coframe);
/// `master` expresses the same components over the master cobasis,
/// which is what the coframe and verticality conditions quantify over.
pub struct CartanConnection {
    pub components: [FormExpr; 7],
    pub master: [FormExpr; 7],
    pub d_components: [FormExpr; 7],
    pub algebra: LieAlgebra,
}

/// Interior product against the frame vector dual to `leg`, on a
/// two-form over an ordered leg basis.
pub fn interior(f: &FormExpr, leg: FormSym) -> FormExpr {
    let mut out = FormExpr::zero(1);
    for (mono, c) in f.terms() {
        match mono.as_slice() {
            [s1, s2] if *s1 == leg => out = out.add(&FormExpr::one_form(*s2).scale(c)),
            [s1, s2] if *s2 == leg => out = out.sub(&FormExpr::one_form(*s1).scale(c)),
            _ => {}
        }
    }
    out
}

fn frame_sym(i: usize) -> FormSym {
    FormSym::Frame(CoframeGen::Stage2, FrameIdx::from_index(i))
}

fn ga(g: GroupAtom, e: i64) -> ScalarExpr {
    ScalarExpr::atom(g, e)
}

/// Assembles the connection from a finished reduction and verifies all
/// three defining conditions against the model algebra.
pub fn build_connection(
    alg: &DerivationAlgebra,
    r: &Reduction,
) -> Result<CartanConnection, CartanError> {
    let comp = |i: usize| -> FormExpr {
        match i {
            0 => FormExpr::one_form(LAMBDA_BAR),
            1 => FormExpr::one_form(LAMBDA),
            _ => FormExpr::one_form(frame_sym(i - 2)),
        }
    };
    let components: [FormExpr; 7] = std::array::from_fn(comp);
    let master: [FormExpr; 7] = std::array::from_fn(|i| match i {
        0 => r.lambda_master.conj(alg),
        1 => r.lambda_master.clone(),
        _ => r.stage2.lifted_form(i - 2),
    });
    let d_components: [FormExpr; 7] = std::array::from_fn(|i| match i {
        0 => r.d_lambda.conj(alg),
        1 => r.d_lambda.clone(),
        _ => r.d_frame[i - 2].clone(),
    });
    let conn = CartanConnection { components, master, d_components, algebra: g7() };
    conn.check_coframe()?;
    conn.check_vertical()?;
    conn.check_equivariance()?;
    Ok(conn)
}

impl CartanConnection {
    /// Condition one: the seven master components are a coframe. The
    /// component matrix over (base cobasis, dā, da) is triangular with
    /// invertible monomial diagonal, hence an isomorphism pointwise.
    pub fn check_coframe(&self) -> Result<(), CartanError> {
        let cols: Vec<FormSym> = (0..5)
            .map(FormSym::base0)
            .chain([FormSym::Diff(GroupAtom::ABAR), FormSym::Diff(GroupAtom::A)])
            .collect();
        // θ-rows first, then λ̄, λ, so the fiber legs sit on the diagonal
        let rows: Vec<&FormExpr> = (2..7).chain([0, 1]).map(|i| &self.master[i]).collect();
        for (r, form) in rows.iter().enumerate() {
            for (mono, _) in form.terms() {
                let leg = mono[0];
                if !cols.contains(&leg) {
                    return Err(CartanError::NotCoframe(format!("stray leg {}", leg)));
                }
            }
            for (c, col) in cols.iter().enumerate() {
                let entry = form.coeff(&[*col]);
                if c > r && !entry.is_zero() {
                    return Err(CartanError::NotCoframe(format!(
                        "entry ({}, {}) above the diagonal is {}",
                        r, c, entry
                    )));
                }
                if c == r {
                    let ok = entry
                        .as_group_monomial()
                        .map(|(m, coeff)| {
                            !coeff.is_zero() && m.group.keys().all(|g| g.invertible())
                        })
                        .unwrap_or(false);
                    if !ok {
                        return Err(CartanError::NotCoframe(format!(
                            "diagonal entry {} is not an invertible monomial",
                            entry
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Condition two: the connection reproduces the fiber generators.
    /// Both λ - da/a and its conjugate are semibasic, and the frame
    /// components carry no fiber differential at all.
    pub fn check_vertical(&self) -> Result<(), CartanError> {
        let dlog_a = FormExpr::one_form(FormSym::Diff(GroupAtom::A)).scale(&ga(GroupAtom::A, -1));
        let dlog_abar =
            FormExpr::one_form(FormSym::Diff(GroupAtom::ABAR)).scale(&ga(GroupAtom::ABAR, -1));
        let semibasic = |f: &FormExpr| {
            f.terms().all(|(mono, _)| !matches!(mono[0], FormSym::Diff(_)))
        };
        if !semibasic(&self.master[1].sub(&dlog_a)) {
            return Err(CartanError::Vertical("λ - da/a keeps a fiber leg".into()));
        }
        if !semibasic(&self.master[0].sub(&dlog_abar)) {
            return Err(CartanError::Vertical("λ̄ - dā/ā keeps a fiber leg".into()));
        }
        for i in 2..7 {
            if !semibasic(&self.master[i]) {
                return Err(CartanError::Vertical(format!(
                    "component {} keeps a fiber leg",
                    CONNECTION_LABELS[i]
                )));
            }
        }
        Ok(())
    }

    /// Condition three: infinitesimal equivariance under the structure
    /// directions. Hooking the frame vector dual to λ (or λ̄) into each
    /// dϖ component must reproduce minus the adjoint action of the
    /// matching basis vector, read off the bracket table.
    pub fn check_equivariance(&self) -> Result<(), CartanError> {
        for (h, leg) in [(0usize, LAMBDA_BAR), (1usize, LAMBDA)] {
            for k in 0..7 {
                let got = interior(&self.d_components[k], leg);
                let mut expected = FormExpr::zero(1);
                for (j, comp) in self.components.iter().enumerate() {
                    if j == h {
                        continue;
                    }
                    let c = &self.algebra.bracket_basis(h, j)[k];
                    if !c.is_zero() {
                        expected = expected.sub(&comp.scale(&ScalarExpr::constant(c.clone())));
                    }
                }
                if got != expected {
                    return Err(CartanError::Equivariance {
                        component: CONNECTION_LABELS[k].to_string(),
                        direction: CONNECTION_LABELS[h].to_string(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Curvature dϖ + ½[ϖ, ϖ], componentwise over the rigid legs.
    pub fn curvature(&self) -> [FormExpr; 7] {
        std::array::from_fn(|k| {
            let mut out = self.d_components[k].clone();
            for i in 0..7 {
                for j in (i + 1)..7 {
                    let c = &self.algebra.bracket_basis(i, j)[k];
                    if !c.is_zero() {
                        out = out.add(
                            &self.components[i]
                                .wedge(&self.components[j])
                                .scale(&ScalarExpr::constant(c.clone())),
                        );
                    }
                }
            }
            out
        })
    }

    /// Curvature of the homogeneous collapse; identically zero exactly
    /// when the model is the flat structure.
    pub fn flat_curvature(&self) -> [FormExpr; 7] {
        let full = self.curvature();
        std::array::from_fn(|k| full[k].map_coeffs(&drop_base))
    }
}
