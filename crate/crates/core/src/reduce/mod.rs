//! The equivalence reduction pipeline: a fiber-parameterized coframe
//! lift, its connection matrix, torsion extraction and absorption, the
//! two normalization loops, and the rigid coframe with its invariant
//! table.
//!
//! Stage matrices factor as M = G·n with G carrying the fiber
//! coordinates and n a unit lower-triangular base-coefficient change;
//! only G contributes to the connection matrix, and every inversion
//! divides by diagonal fiber monomials alone.

pub mod absorb;

use crate::exterior::secondary::{derive_secondary_brackets, ExteriorError};
use crate::exterior::structure::{Structure, ALL_ATOMS};
use crate::exterior::{CoframeGen, FormExpr, FormSym, FrameIdx, McSym};
use crate::rational::GaussRat;
use crate::scalar::{
    BaseName, DerivationAlgebra, GLetter, GroupAtom, ScalarError, ScalarExpr,
};
use absorb::{build_system, AbsorbError, AbsorptionSystem, EssentialTorsion, ModPlan};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReduceError {
    #[error("matrix entry ({0}, {1}) blocks triangular inversion")]
    NotInvertible(usize, usize),
    #[error("connection matrix violates the stage pattern at ({row}, {col}): {detail}")]
    PatternMismatch { row: usize, col: usize, detail: String },
    #[error("structure equation for form {form} does not reconstruct at column {col}")]
    Reconstruction { form: usize, col: usize },
    #[error("unexpected leg pair in a differentiated coframe form: {0}")]
    BadLegs(String),
    #[error("slot is not linear in {0}")]
    NotLinear(String),
    #[error("normalization audit failed: {0}")]
    Normalization(String),
    #[error("invariant {0} does not reduce to a fiber-free core")]
    WeightNotFactored(String),
    #[error("final display audit failed: {0}")]
    FinalShape(String),
    #[error(transparent)]
    Absorb(#[from] AbsorbError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error(transparent)]
    Exterior(#[from] ExteriorError),
}

pub type Mat5 = [[ScalarExpr; 5]; 5];

fn zeros5() -> Mat5 {
    std::array::from_fn(|_| std::array::from_fn(|_| ScalarExpr::zero()))
}

pub fn identity5() -> Mat5 {
    let mut m = zeros5();
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = ScalarExpr::one();
    }
    m
}

pub fn mat_mul(a: &Mat5, b: &Mat5) -> Mat5 {
    let mut out = zeros5();
    for i in 0..5 {
        for j in 0..5 {
            let mut acc = ScalarExpr::zero();
            for (k, brow) in b.iter().enumerate() {
                acc = acc.add(&a[i][k].mul(&brow[j]));
            }
            out[i][j] = acc;
        }
    }
    out
}

fn ga(g: GroupAtom, exp: i64) -> ScalarExpr {
    ScalarExpr::atom(g, exp)
}

fn bs(name: BaseName, conj: bool) -> ScalarExpr {
    ScalarExpr::base(name, conj)
}

/// Inverts a lower-triangular matrix whose diagonal is made of single
/// invertible fiber monomials, by forward substitution. Both products
/// against the input are checked to be the identity.
pub fn invert_lower_triangular(m: &Mat5) -> Result<Mat5, ReduceError> {
    for i in 0..5 {
        for j in (i + 1)..5 {
            if !m[i][j].is_zero() {
                return Err(ReduceError::NotInvertible(i, j));
            }
        }
    }
    let mut diag_inv = Vec::with_capacity(5);
    for i in 0..5 {
        let (mono, coeff) = m[i][i]
            .as_group_monomial()
            .map_err(|_| ReduceError::NotInvertible(i, i))?;
        if coeff.is_zero() || mono.group.keys().any(|g| !g.invertible()) {
            return Err(ReduceError::NotInvertible(i, i));
        }
        let inv_group: BTreeMap<GroupAtom, i64> =
            mono.group.iter().map(|(g, e)| (*g, -e)).collect();
        diag_inv.push(ScalarExpr::from_mono(
            crate::scalar::Mono { group: inv_group, base: BTreeMap::new() },
            coeff.inv(),
        ));
    }
    let mut inv = zeros5();
    for i in 0..5 {
        inv[i][i] = diag_inv[i].clone();
        for j in (0..i).rev() {
            let mut s = ScalarExpr::zero();
            for k in j..i {
                s = s.add(&m[i][k].mul(&inv[k][j]));
            }
            inv[i][j] = s.neg().mul(&diag_inv[i]);
        }
    }
    let id = identity5();
    if mat_mul(m, &inv) != id || mat_mul(&inv, m) != id {
        return Err(ReduceError::NotInvertible(0, 0));
    }
    Ok(inv)
}

/// The fiber-parameterized coframe matrix of one stage, acting on the
/// base coframe from the left.
#[derive(Clone)]
pub struct GroupMatrixFamily {
    pub entries: Mat5,
}

/// The initial lift: weighted diagonal scalings plus the strictly
/// lower-triangular fiber coordinates b, c, d, e and conjugates.
pub fn build_initial_g_structure() -> GroupMatrixFamily {
    let mut m = zeros5();
    m[0][0] = ga(GroupAtom::A, 1).mul(&ga(GroupAtom::ABAR, 2));
    m[1][1] = ga(GroupAtom::A, 2).mul(&ga(GroupAtom::ABAR, 1));
    m[2][0] = ga(GroupAtom::CBAR, 1);
    m[2][1] = ga(GroupAtom::C, 1);
    m[2][2] = ga(GroupAtom::A, 1).mul(&ga(GroupAtom::ABAR, 1));
    m[3][0] = ga(GroupAtom::EBAR, 1);
    m[3][1] = ga(GroupAtom::D, 1);
    m[3][2] = ga(GroupAtom::BBAR, 1);
    m[3][3] = ga(GroupAtom::ABAR, 1);
    m[4][0] = ga(GroupAtom::DBAR, 1);
    m[4][1] = ga(GroupAtom::E, 1);
    m[4][2] = ga(GroupAtom::B, 1);
    m[4][4] = ga(GroupAtom::A, 1);
    GroupMatrixFamily { entries: m }
}

pub fn invert_group_matrix(g: &GroupMatrixFamily) -> Result<Mat5, ReduceError> {
    invert_lower_triangular(&g.entries)
}

/// Fiber-direction exterior derivative of a scalar: only the coordinate
/// differentials, no frame legs.
pub fn d_group(f: &ScalarExpr) -> FormExpr {
    let mut out = FormExpr::zero(1);
    for g in ALL_ATOMS {
        let p = f.partial_group(g);
        if !p.is_zero() {
            out = out.add(&FormExpr::one_form(FormSym::Diff(g)).scale(&p));
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StageId {
    Lifted,
    Stage1,
    Stage2,
}

impl StageId {
    pub fn gen(self) -> CoframeGen {
        match self {
            StageId::Lifted => CoframeGen::Lifted,
            StageId::Stage1 => CoframeGen::Stage1,
            StageId::Stage2 => CoframeGen::Stage2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            StageId::Lifted => "stage0",
            StageId::Stage1 => "stage1",
            StageId::Stage2 => "stage2",
        }
    }
}

/// Positions and labels of the independent connection forms inside the
/// stage connection matrix.
fn mc_basis_entries(id: StageId) -> Vec<(usize, usize, &'static str)> {
    match id {
        StageId::Lifted => vec![
            (4, 4, "α1"),
            (3, 3, "ᾱ1"),
            (2, 1, "α2"),
            (2, 0, "ᾱ2"),
            (4, 1, "α3"),
            (3, 0, "ᾱ3"),
            (4, 0, "α4"),
            (3, 1, "ᾱ4"),
            (4, 2, "α5"),
            (3, 2, "ᾱ5"),
        ],
        StageId::Stage1 => vec![(4, 4, "β1"), (3, 3, "β̄1"), (4, 1, "β2"), (3, 0, "β̄2")],
        StageId::Stage2 => vec![(4, 4, "γ1"), (3, 3, "γ̄1")],
    }
}

/// Every connection-matrix entry as a combination of the basis forms.
/// The diagonal carries the weights (1,2), (2,1), (1,1), (0,1), (1,0) of
/// the primary pair; off-diagonal entries are single basis forms.
fn mc_pattern(id: StageId) -> BTreeMap<(usize, usize), Vec<(usize, GaussRat)>> {
    let q = GaussRat::from_int;
    let mut p = BTreeMap::new();
    p.insert((0, 0), vec![(0, q(1)), (1, q(2))]);
    p.insert((1, 1), vec![(0, q(2)), (1, q(1))]);
    p.insert((2, 2), vec![(0, q(1)), (1, q(1))]);
    p.insert((3, 3), vec![(1, q(1))]);
    p.insert((4, 4), vec![(0, q(1))]);
    match id {
        StageId::Lifted => {
            p.insert((2, 0), vec![(3, q(1))]);
            p.insert((2, 1), vec![(2, q(1))]);
            p.insert((3, 0), vec![(5, q(1))]);
            p.insert((3, 1), vec![(7, q(1))]);
            p.insert((3, 2), vec![(9, q(1))]);
            p.insert((4, 0), vec![(6, q(1))]);
            p.insert((4, 1), vec![(4, q(1))]);
            p.insert((4, 2), vec![(8, q(1))]);
        }
        StageId::Stage1 => {
            p.insert((3, 0), vec![(3, q(1))]);
            p.insert((4, 1), vec![(2, q(1))]);
        }
        StageId::Stage2 => {}
    }
    p
}

/// The connection matrix dG·G⁻¹ of a stage, restricted to fiber
/// differentials, with its basis forms pulled out and the full matrix
/// shape checked against the stage pattern including conjugate pairing.
pub struct MaurerCartan {
    pub entries: [[FormExpr; 5]; 5],
    pub basis: Vec<FormExpr>,
    pub labels: Vec<String>,
}

pub fn maurer_cartan(
    alg: &DerivationAlgebra,
    group: &Mat5,
    id: StageId,
) -> Result<MaurerCartan, ReduceError> {
    let inv = invert_lower_triangular(group)?;
    let mut entries: [[FormExpr; 5]; 5] =
        std::array::from_fn(|_| std::array::from_fn(|_| FormExpr::zero(1)));
    for k in 0..5 {
        for j in 0..5 {
            let mut acc = FormExpr::zero(1);
            for m in 0..5 {
                if group[k][m].is_zero() || inv[m][j].is_zero() {
                    continue;
                }
                acc = acc.add(&d_group(&group[k][m]).scale(&inv[m][j]));
            }
            entries[k][j] = acc;
        }
    }
    let spots = mc_basis_entries(id);
    let basis: Vec<FormExpr> = spots.iter().map(|&(r, c, _)| entries[r][c].clone()).collect();
    let labels: Vec<String> = spots.iter().map(|&(_, _, l)| l.to_string()).collect();
    for p in (0..basis.len()).step_by(2) {
        if basis[p + 1] != basis[p].conj(alg) {
            let (r, c, _) = spots[p + 1];
            return Err(ReduceError::PatternMismatch {
                row: r,
                col: c,
                detail: format!("{} is not the conjugate of {}", labels[p + 1], labels[p]),
            });
        }
    }
    let pattern = mc_pattern(id);
    for k in 0..5 {
        for j in 0..5 {
            let expected = match pattern.get(&(k, j)) {
                None => FormExpr::zero(1),
                Some(combo) => combo.iter().fold(FormExpr::zero(1), |acc, (p, c)| {
                    acc.add(&basis[*p].scale(&ScalarExpr::constant(c.clone())))
                }),
            };
            if entries[k][j] != expected {
                return Err(ReduceError::PatternMismatch {
                    row: k,
                    col: j,
                    detail: format!("got {}, expected {}", entries[k][j], expected),
                });
            }
        }
    }
    Ok(MaurerCartan { entries, basis, labels })
}

/// One reduction stage: the factored coframe matrix, its inverse, and
/// the verified connection matrix.
pub struct Stage {
    pub id: StageId,
    pub group: Mat5,
    pub base_change: Mat5,
    pub lifted: Mat5,
    pub inverse: Mat5,
    pub mc: MaurerCartan,
}

impl Stage {
    pub fn new(
        alg: &DerivationAlgebra,
        id: StageId,
        group: Mat5,
        base_change: Mat5,
    ) -> Result<Stage, ReduceError> {
        let lifted = mat_mul(&group, &base_change);
        let inverse = invert_lower_triangular(&lifted)?;
        let mc = maurer_cartan(alg, &group, id)?;
        Ok(Stage { id, group, base_change, lifted, inverse, mc })
    }

    pub fn stage_sym(&self, m: usize) -> FormSym {
        FormSym::Frame(self.id.gen(), FrameIdx::from_index(m))
    }

    /// Row k of the coframe as a one-form over the base coframe.
    pub fn lifted_form(&self, k: usize) -> FormExpr {
        let mut out = FormExpr::zero(1);
        for j in 0..5 {
            if !self.lifted[k][j].is_zero() {
                out = out.add(&FormExpr::one_form(FormSym::base0(j)).scale(&self.lifted[k][j]));
            }
        }
        out
    }

    /// Substitution replacing base-coframe symbols by stage-coframe
    /// combinations, from the inverse matrix.
    pub fn base0_to_stage(&self) -> BTreeMap<FormSym, FormExpr> {
        let mut map = BTreeMap::new();
        for j in 0..5 {
            let mut out = FormExpr::zero(1);
            for m in 0..=j {
                if !self.inverse[j][m].is_zero() {
                    out = out.add(&FormExpr::one_form(self.stage_sym(m)).scale(&self.inverse[j][m]));
                }
            }
            map.insert(FormSym::base0(j), out);
        }
        map
    }
}

/// The structure equation of one stage form, split into the connection
/// columns and the frame-frame torsion slots.
pub struct TorsionReport {
    pub form: usize,
    pub mc_cols: [FormExpr; 5],
    pub slots: BTreeMap<(usize, usize), ScalarExpr>,
}

/// Differentiates stage form k, re-expresses it over the stage coframe,
/// and splits connection columns from torsion. The extracted columns
/// must reproduce the verified connection matrix; together with the slot
/// split this is the round-trip identity for the structure equation.
pub fn compute_torsion(
    st: &Structure,
    stage: &Stage,
    form: usize,
) -> Result<TorsionReport, ReduceError> {
    let d = st.d(&stage.lifted_form(form));
    let d = d.apply_map(&stage.base0_to_stage());
    let gen = stage.id.gen();
    let mut mc_cols: [FormExpr; 5] = std::array::from_fn(|_| FormExpr::zero(1));
    let mut slots = BTreeMap::new();
    for (mono, c) in d.terms() {
        match mono.as_slice() {
            [FormSym::Frame(g1, i1), FormSym::Frame(g2, i2)] if *g1 == gen && *g2 == gen => {
                slots.insert((i1.index(), i2.index()), c.clone());
            }
            [FormSym::Frame(g, j), FormSym::Diff(at)] if *g == gen => {
                mc_cols[j.index()].add_term(vec![FormSym::Diff(*at)], c.neg());
            }
            other => {
                let legs: Vec<String> = other.iter().map(|s| s.to_string()).collect();
                return Err(ReduceError::BadLegs(legs.join("∧")));
            }
        }
    }
    for (j, col) in mc_cols.iter().enumerate() {
        if *col != stage.mc.entries[form][j] {
            return Err(ReduceError::Reconstruction { form, col: j });
        }
    }
    Ok(TorsionReport { form, mc_cols, slots })
}

fn torsion_all(st: &Structure, stage: &Stage) -> Result<[TorsionReport; 5], ReduceError> {
    let v: Vec<TorsionReport> =
        (0..5).map(|k| compute_torsion(st, stage, k)).collect::<Result<_, _>>()?;
    match <[TorsionReport; 5]>::try_from(v) {
        Ok(a) => Ok(a),
        Err(_) => unreachable!(),
    }
}

/// The stage modification plan: which connection forms admit semibasic
/// shifts and which equation rows participate. The primary pair is
/// always shiftable; the first two stages leave the remaining rows out
/// because their own connection forms are not under modification there.
fn plan_for(id: StageId) -> ModPlan {
    let labels = mc_basis_entries(id).iter().map(|&(_, _, l)| l.to_string()).collect();
    let (modifiable, forms) = match id {
        StageId::Lifted => (vec![0, 1, 2, 3], vec![0, 1, 2]),
        StageId::Stage1 => (vec![0, 1], vec![0, 1, 2]),
        StageId::Stage2 => (vec![0, 1], vec![0, 1, 2, 3, 4]),
    };
    ModPlan { pattern: mc_pattern(id), modifiable, basis_labels: labels, forms }
}

pub fn absorb_stage(stage: &Stage, torsion: &[TorsionReport; 5]) -> AbsorptionSystem {
    build_system(&plan_for(stage.id), &|k, i, j| {
        torsion[k].slots.get(&(i, j)).cloned().unwrap_or_else(ScalarExpr::zero)
    })
}

/// Solves expr = 0 for a fiber coordinate that occurs linearly with a
/// single invertible monomial coefficient.
fn solve_linear_group(expr: &ScalarExpr, atom: GroupAtom) -> Result<ScalarExpr, ReduceError> {
    let mut coeff = ScalarExpr::zero();
    let mut rest = ScalarExpr::zero();
    for (mono, c) in expr.terms() {
        match mono.group.get(&atom).copied().unwrap_or(0) {
            0 => rest.add_term(mono.clone(), c.clone()),
            1 => {
                let mut m = mono.clone();
                m.group.remove(&atom);
                coeff.add_term(m, c.clone());
            }
            _ => return Err(ReduceError::NotLinear(atom.to_string())),
        }
    }
    let (mono, c) = coeff
        .as_group_monomial()
        .map_err(|_| ReduceError::NotLinear(atom.to_string()))?;
    if c.is_zero() || mono.group.keys().any(|g| !g.invertible()) {
        return Err(ReduceError::NotLinear(atom.to_string()));
    }
    let inv_group: BTreeMap<GroupAtom, i64> = mono.group.iter().map(|(g, e)| (*g, -e)).collect();
    let inv = ScalarExpr::from_mono(
        crate::scalar::Mono { group: inv_group, base: BTreeMap::new() },
        c.inv(),
    );
    Ok(rest.neg().mul(&inv))
}

/// Verified difference between an engine-derived value and a companion
/// closed form for the same quantity.
pub struct NormalizationDiff {
    pub name: &'static str,
    pub engine: ScalarExpr,
    pub printed: ScalarExpr,
    pub diff: ScalarExpr,
}

/// The fiber coordinates fixed by the torsion normalizations, each with
/// a fiber-free core obtained by stripping its weight.
pub struct NormalizationMap {
    pub b: ScalarExpr,
    pub c: ScalarExpr,
    pub d: ScalarExpr,
    pub e: ScalarExpr,
    pub b0: ScalarExpr,
    pub c0: ScalarExpr,
    pub d0: ScalarExpr,
    pub e0: ScalarExpr,
    pub diffs: Vec<NormalizationDiff>,
}

impl NormalizationMap {
    /// Substitution map for the coordinates fixed so far.
    pub fn subst_map(&self) -> BTreeMap<GLetter, ScalarExpr> {
        let mut map = BTreeMap::new();
        map.insert(GLetter::Gc, self.c.clone());
        map.insert(GLetter::Gb, self.b.clone());
        map.insert(GLetter::Gd, self.d.clone());
        if !self.e.is_zero() {
            map.insert(GLetter::Ge, self.e.clone());
        }
        map
    }
}

fn strip_weight(
    value: &ScalarExpr,
    pa: i64,
    pabar: i64,
    label: &str,
) -> Result<ScalarExpr, ReduceError> {
    let core = value.mul(&ga(GroupAtom::A, -pa)).mul(&ga(GroupAtom::ABAR, -pabar));
    if core.has_group_atoms() {
        return Err(ReduceError::WeightNotFactored(label.to_string()));
    }
    Ok(core)
}

/// First normalization loop. Three torsion conditions fix c, b, d in
/// that order: the σ̄∧ζ slot of dσ, the unabsorbable combination over
/// the ζ-column, and the σ̄∧ρ slot of dσ. Each value is checked back
/// against its equation and against the companion closed form, with any
/// difference recorded rather than silently adopted.
pub fn solve_normalizations(
    alg: &DerivationAlgebra,
    torsion: &[TorsionReport; 5],
) -> Result<NormalizationMap, ReduceError> {
    let slot = |k: usize, i: usize, j: usize| {
        torsion[k].slots.get(&(i, j)).cloned().unwrap_or_else(ScalarExpr::zero)
    };
    // c from the σ̄∧ζ slot of dσ
    let x4 = slot(1, 0, 4);
    let cbar = solve_linear_group(&x4, GroupAtom::CBAR)?;
    let c = alg.conj(&cbar);
    // b from the invariant combination over ρ∧ζ and the two ζ-columns
    let combo = slot(0, 0, 4)
        .add(&slot(1, 1, 4))
        .sub(&slot(2, 2, 4).scale(&GaussRat::from_int(3)));
    let mut cmap = BTreeMap::new();
    cmap.insert(GLetter::Gc, c.clone());
    let combo_c = alg.subst_group(&combo, &cmap)?;
    let bbar = solve_linear_group(&combo_c, GroupAtom::BBAR)?;
    let b = alg.conj(&bbar);
    // d from the σ̄∧ρ slot of dσ
    let mut bcmap = cmap.clone();
    bcmap.insert(GLetter::Gb, b.clone());
    let x2 = alg.subst_group(&slot(1, 0, 2), &bcmap)?;
    let dbar = solve_linear_group(&x2, GroupAtom::DBAR)?;
    let d = alg.conj(&dbar);

    let mut norm = NormalizationMap {
        b: b.clone(),
        c: c.clone(),
        d: d.clone(),
        e: ScalarExpr::zero(),
        b0: strip_weight(&b, 1, 0, "b")?,
        c0: strip_weight(&c, 1, 1, "c")?,
        d0: strip_weight(&d, 0, 1, "d")?,
        e0: ScalarExpr::zero(),
        diffs: Vec::new(),
    };

    // the three targeted slots must vanish identically under the values
    let full = norm.subst_map();
    for (label, expr) in [("σ̄∧ζ of dσ", &x4), ("ζ-column combination", &combo), ("σ̄∧ρ of dσ", &slot(1, 0, 2))]
    {
        let res = alg.subst_group(expr, &full)?;
        if !res.is_zero() {
            return Err(ReduceError::Normalization(format!(
                "{} does not vanish after substitution: {}",
                label, res
            )));
        }
    }

    // companion closed forms; the d-value differs by a recorded residue
    let b0_printed = ScalarExpr::i()
        .scale(&(GaussRat::from_int(3).inv()))
        .mul(&bs(BaseName::Q, true))
        .sub(&ScalarExpr::i().mul(&bs(BaseName::B, false)));
    let printed_b = ga(GroupAtom::A, 1).mul(&b0_printed);
    let printed_c = ga(GroupAtom::A, 1).mul(&ga(GroupAtom::ABAR, 1)).mul(&bs(BaseName::B, true));
    let printed_d = ga(GroupAtom::ABAR, 1).mul(
        &bs(BaseName::GF, false)
            .neg()
            .add(&alg.conj(&b0_printed))
            .add(&bs(BaseName::R, false).mul(&b0_printed)),
    );
    for (name, engine, printed) in [
        ("b", &norm.b, printed_b),
        ("c", &norm.c, printed_c),
        ("d", &norm.d, printed_d),
    ] {
        norm.diffs.push(NormalizationDiff {
            name,
            engine: engine.clone(),
            printed: printed.clone(),
            diff: engine.sub(&printed),
        });
    }
    Ok(norm)
}

/// Second normalization loop: e from the σ∧ζ̄ slot of dρ at the middle
/// stage. The slot structure is audited on the way: the conjugate slot
/// carries the only ē-term, with the stated weight, and the remaining
/// part strips to the fiber-free core whose conjugate determines e.
pub fn normalize_e(
    alg: &DerivationAlgebra,
    norm: &mut NormalizationMap,
    torsion: &[TorsionReport; 5],
) -> Result<(), ReduceError> {
    let slot = |k: usize, i: usize, j: usize| {
        torsion[k].slots.get(&(i, j)).cloned().unwrap_or_else(ScalarExpr::zero)
    };
    let t13 = slot(2, 1, 3);
    let t04 = slot(2, 0, 4);
    if t04 != alg.conj(&t13) {
        return Err(ReduceError::Normalization("dρ slots σ̄∧ζ and σ∧ζ̄ are not conjugate".into()));
    }
    let e = solve_linear_group(&t13, GroupAtom::E)?;
    // split σ̄∧ζ into its ē-part and the rest
    let mut ebar_part = ScalarExpr::zero();
    let mut free = ScalarExpr::zero();
    for (mono, c) in t04.terms() {
        if mono.group.contains_key(&GroupAtom::EBAR) {
            ebar_part.add_term(mono.clone(), c.clone());
        } else {
            free.add_term(mono.clone(), c.clone());
        }
    }
    let expect_ebar = ScalarExpr::i()
        .mul(&ga(GroupAtom::EBAR, 1))
        .mul(&ga(GroupAtom::A, -1))
        .mul(&ga(GroupAtom::ABAR, -2));
    if ebar_part != expect_ebar {
        return Err(ReduceError::Normalization(format!(
            "unexpected ē-dependence in dρ σ̄∧ζ: {}",
            ebar_part
        )));
    }
    let t_core = strip_weight(&free, -1, -1, "dρ σ̄∧ζ")?;
    let e0 = strip_weight(&e, 1, 0, "e")?;
    if e0 != ScalarExpr::i().neg().mul(&alg.conj(&t_core)) {
        return Err(ReduceError::Normalization(
            "e-core is not -i times the conjugate σ̄∧ζ core".into(),
        ));
    }
    norm.e = e;
    norm.e0 = e0;
    Ok(())
}

/// A weight-stripped entry of the invariant table.
pub struct InvariantEntry {
    pub name: String,
    /// 0..4 for the frame equations, 5 for the last connection form.
    pub form: usize,
    pub slot: (usize, usize),
    /// Coefficient = a^p ā^q · value.
    pub weight: (i64, i64),
    pub value: ScalarExpr,
}

pub struct InvariantTable {
    pub entries: Vec<InvariantEntry>,
}

impl InvariantTable {
    pub fn get(&self, name: &str) -> Option<&InvariantEntry> {
        self.entries.iter().find(|e| e.name == name)
    }
}

/// Fiber weights of the rigid coframe, as powers of (a, ā).
pub const FRAME_WEIGHTS: [(i64, i64); 5] = [(1, 2), (2, 1), (1, 1), (0, 1), (1, 0)];

const FRAME_NAMES: [&str; 5] = ["σ\u{304}", "σ", "ρ", "ζ\u{304}", "ζ"];

/// One torsion-slot record for the trace output.
pub struct TraceRecord {
    pub stage: String,
    pub form: String,
    pub monomial: String,
    pub coeff: String,
}

/// The completed reduction.
pub struct Reduction {
    pub stage0: Stage,
    pub stage1: Stage,
    pub stage2: Stage,
    pub torsion0: [TorsionReport; 5],
    pub torsion1: [TorsionReport; 5],
    pub torsion2: [TorsionReport; 5],
    pub absorption0: AbsorptionSystem,
    pub absorption1: AbsorptionSystem,
    pub absorption2: AbsorptionSystem,
    pub essential0: Vec<EssentialTorsion>,
    pub essential1: Vec<EssentialTorsion>,
    pub normalizations: NormalizationMap,
    /// Semibasic shift absorbed into the last connection form: the first
    /// five entries shift the primary form, the last five its conjugate.
    pub lambda_shift: Vec<ScalarExpr>,
    /// The final connection form over the fiber differential da and the
    /// rigid coframe.
    pub lambda: FormExpr,
    /// The same form over the master cobasis.
    pub lambda_master: FormExpr,
    /// Final structure equations over the rigid coframe and the
    /// connection pair.
    pub d_frame: [FormExpr; 5],
    pub d_lambda: FormExpr,
    pub invariants: InvariantTable,
    pub trace: Vec<TraceRecord>,
}

fn lifted_subst(
    alg: &DerivationAlgebra,
    m: &Mat5,
    map: &BTreeMap<GLetter, ScalarExpr>,
) -> Result<Mat5, ReduceError> {
    let mut out = zeros5();
    for i in 0..5 {
        for j in 0..5 {
            out[i][j] = alg.subst_group(&m[i][j], map)?;
        }
    }
    Ok(out)
}

fn diag_group(weights: [(i64, i64); 5]) -> Mat5 {
    let mut g = zeros5();
    for (i, (p, q)) in weights.into_iter().enumerate() {
        g[i][i] = ga(GroupAtom::A, p).mul(&ga(GroupAtom::ABAR, q));
    }
    g
}

fn stage1_matrices(alg: &DerivationAlgebra, norm: &NormalizationMap) -> (Mat5, Mat5) {
    let mut g = diag_group(FRAME_WEIGHTS);
    g[3][0] = ga(GroupAtom::EBAR, 1);
    g[4][1] = ga(GroupAtom::E, 1);
    let mut n = identity5();
    n[2][0] = alg.conj(&norm.c0);
    n[2][1] = norm.c0.clone();
    n[3][1] = norm.d0.clone();
    n[3][2] = alg.conj(&norm.b0);
    n[4][0] = alg.conj(&norm.d0);
    n[4][2] = norm.b0.clone();
    (g, n)
}

fn stage2_matrices(alg: &DerivationAlgebra, norm: &NormalizationMap) -> (Mat5, Mat5) {
    let g = diag_group(FRAME_WEIGHTS);
    let mut n = identity5();
    n[2][0] = alg.conj(&norm.c0);
    n[2][1] = norm.c0.clone();
    n[3][0] = alg.conj(&norm.e0);
    n[3][1] = norm.d0.clone();
    n[3][2] = alg.conj(&norm.b0);
    n[4][0] = alg.conj(&norm.d0);
    n[4][1] = norm.e0.clone();
    n[4][2] = norm.b0.clone();
    (g, n)
}

/// Solves the final absorption: every reachable slot of the first three
/// equations is driven to zero, leaving the kept terms untouched. The
/// two dependent rows are the built-in integrability check.
fn solve_lambda_shift(sys: &AbsorptionSystem) -> Result<Vec<ScalarExpr>, ReduceError> {
    let rows: Vec<usize> = (0..sys.slots.len())
        .filter(|&r| sys.slots[r].0 < 3 && sys.matrix[r].iter().any(|c| !c.is_zero()))
        .collect();
    Ok(sys.solve_rows(&rows)?)
}

struct FinalEquations {
    d_frame: [FormExpr; 5],
    d_lambda: FormExpr,
    lambda: FormExpr,
    lambda_master: FormExpr,
}

const LAMBDA: FormSym = FormSym::Mc(McSym::Lambda, false);
const LAMBDA_BAR: FormSym = FormSym::Mc(McSym::Lambda, true);

/// Differentiates the rigid coframe and the final connection form and
/// re-expresses everything over (λ, λ̄, rigid coframe), checking the
/// display shape: the connection legs sit exactly on the diagonal with
/// the stage weights, the first three equations keep only their stated
/// slots, and dλ is semibasic.
fn final_equations(
    st: &Structure,
    s2: &Stage,
    shift: &[ScalarExpr],
) -> Result<FinalEquations, ReduceError> {
    let alg = &st.alg;
    let base_map = s2.base0_to_stage();
    let stage_form = |m: usize| FormExpr::one_form(s2.stage_sym(m));
    // da = a(λ + Σ shift·θ), dā its conjugate
    let mut lam_comb = FormExpr::one_form(LAMBDA);
    let mut lam_bar_comb = FormExpr::one_form(LAMBDA_BAR);
    for m in 0..5 {
        lam_comb = lam_comb.add(&stage_form(m).scale(&shift[m]));
        lam_bar_comb = lam_bar_comb.add(&stage_form(m).scale(&shift[5 + m]));
    }
    let mut lam_map = BTreeMap::new();
    lam_map.insert(FormSym::Diff(GroupAtom::A), lam_comb.scale(&ga(GroupAtom::A, 1)));
    lam_map.insert(FormSym::Diff(GroupAtom::ABAR), lam_bar_comb.scale(&ga(GroupAtom::ABAR, 1)));

    let mut d_frame: [FormExpr; 5] = std::array::from_fn(|_| FormExpr::zero(2));
    let pattern = mc_pattern(StageId::Stage2);
    for k in 0..5 {
        let d = st.d(&s2.lifted_form(k)).apply_map(&base_map).apply_map(&lam_map);
        for (mono, _) in d.terms() {
            for sym in mono {
                match sym {
                    FormSym::Mc(McSym::Lambda, _) => {}
                    FormSym::Frame(CoframeGen::Stage2, _) => {}
                    other => return Err(ReduceError::FinalShape(format!("stray leg {}", other))),
                }
            }
        }
        let combo = &pattern[&(k, k)];
        let want_lam = ScalarExpr::constant(combo.iter().find(|(p, _)| *p == 0).map(|(_, c)| c.clone()).unwrap_or_else(GaussRat::zero));
        let want_bar = ScalarExpr::constant(combo.iter().find(|(p, _)| *p == 1).map(|(_, c)| c.clone()).unwrap_or_else(GaussRat::zero));
        for j in 0..5 {
            let lam_c = d.coeff_pair(LAMBDA, s2.stage_sym(j));
            let bar_c = d.coeff_pair(LAMBDA_BAR, s2.stage_sym(j));
            let (want_l, want_b) = if j == k {
                (want_lam.clone(), want_bar.clone())
            } else {
                (ScalarExpr::zero(), ScalarExpr::zero())
            };
            if lam_c != want_l || bar_c != want_b {
                return Err(ReduceError::FinalShape(format!(
                    "connection legs of equation {} at column {}: λ {}, λ̄ {}",
                    k, j, lam_c, bar_c
                )));
            }
        }
        if !d.coeff_pair(LAMBDA, LAMBDA_BAR).is_zero() {
            return Err(ReduceError::FinalShape(format!("λ∧λ̄ leg in equation {}", k)));
        }
        d_frame[k] = d;
    }
    // conjugate pairing of the display
    if d_frame[0] != d_frame[1].conj(alg)
        || d_frame[3] != d_frame[4].conj(alg)
        || d_frame[2] != d_frame[2].conj(alg)
    {
        return Err(ReduceError::FinalShape("display is not conjugation-consistent".into()));
    }
    // kept slots of the first three equations; everything else vanishes
    let kept: [&[(usize, usize)]; 3] =
        [&[(1, 4), (2, 3)], &[(0, 3), (2, 4)], &[(0, 1), (0, 3), (1, 4), (3, 4)]];
    for k in 0..3 {
        for i in 0..5 {
            for j in (i + 1)..5 {
                let c = d_frame[k].coeff_pair(s2.stage_sym(i), s2.stage_sym(j));
                if !kept[k].contains(&(i, j)) && !c.is_zero() {
                    return Err(ReduceError::FinalShape(format!(
                        "equation {} keeps an unexpected {}∧{} term: {}",
                        k, FRAME_NAMES[i], FRAME_NAMES[j], c
                    )));
                }
            }
        }
    }
    let ddsig = d_frame[1].coeff_pair(s2.stage_sym(2), s2.stage_sym(4));
    let ddrho = d_frame[2].coeff_pair(s2.stage_sym(3), s2.stage_sym(4));
    if ddsig != ScalarExpr::one() || ddrho != ScalarExpr::i().neg() {
        return Err(ReduceError::FinalShape(format!(
            "constant slots are off: ρ∧ζ of dσ = {}, ζ̄∧ζ of dρ = {}",
            ddsig, ddrho
        )));
    }

    // the final connection form and its derivative
    let lambda = FormExpr::one_form(FormSym::Diff(GroupAtom::A))
        .scale(&ga(GroupAtom::A, -1))
        .sub(&(0..5).fold(FormExpr::zero(1), |acc, m| acc.add(&stage_form(m).scale(&shift[m]))));
    let lambda_master = FormExpr::one_form(FormSym::Diff(GroupAtom::A))
        .scale(&ga(GroupAtom::A, -1))
        .sub(&(0..5).fold(FormExpr::zero(1), |acc, m| {
            acc.add(&s2.lifted_form(m).scale(&shift[m]))
        }));
    let d_lambda = st.d(&lambda_master).apply_map(&base_map).apply_map(&lam_map);
    for (mono, _) in d_lambda.terms() {
        for sym in mono {
            if matches!(sym, FormSym::Mc(..) | FormSym::Diff(_)) {
                return Err(ReduceError::FinalShape(format!(
                    "dλ is not semibasic: leg {}",
                    sym
                )));
            }
        }
    }
    Ok(FinalEquations { d_frame, d_lambda, lambda, lambda_master })
}

fn invariant_table(
    s2: &Stage,
    d_frame: &[FormExpr; 5],
    d_lambda: &FormExpr,
) -> Result<InvariantTable, ReduceError> {
    let weight = |k: Option<usize>, i: usize, j: usize| {
        let (kp, kq) = k.map_or((0, 0), |k| FRAME_WEIGHTS[k]);
        (kp - FRAME_WEIGHTS[i].0 - FRAME_WEIGHTS[j].0, kq - FRAME_WEIGHTS[i].1 - FRAME_WEIGHTS[j].1)
    };
    let mut entries = Vec::new();
    let mut push = |name: String,
                    form: usize,
                    slot: (usize, usize),
                    value: &ScalarExpr|
     -> Result<(), ReduceError> {
        let k = if form < 5 { Some(form) } else { None };
        let (p, q) = weight(k, slot.0, slot.1);
        let core = strip_weight(value, p, q, &name)?;
        entries.push(InvariantEntry { name, form, slot, weight: (p, q), value: core });
        Ok(())
    };
    let c = |k: usize, i: usize, j: usize| d_frame[k].coeff_pair(s2.stage_sym(i), s2.stage_sym(j));
    push("Rbar".into(), 1, (0, 3), &c(1, 0, 3))?;
    push("V1".into(), 2, (0, 1), &c(2, 0, 1))?;
    push("V3".into(), 2, (0, 3), &c(2, 0, 3))?;
    let w_slots = [(0, 1), (0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)];
    for (n, (i, j)) in w_slots.into_iter().enumerate() {
        push(format!("W{}", n + 1), 4, (i, j), &c(4, i, j))?;
    }
    for i in 0..5 {
        for j in (i + 1)..5 {
            let v = d_lambda.coeff_pair(s2.stage_sym(i), s2.stage_sym(j));
            if !v.is_zero() {
                push(format!("I[{}∧{}]", FRAME_NAMES[i], FRAME_NAMES[j]), 5, (i, j), &v)?;
            }
        }
    }
    Ok(InvariantTable { entries })
}

fn conj_shift_audit(alg: &DerivationAlgebra, shift: &[ScalarExpr]) -> Result<(), ReduceError> {
    for m in 0..5 {
        let partner = FrameIdx::from_index(m).conjugate().index();
        if shift[5 + m] != alg.conj(&shift[partner]) {
            return Err(ReduceError::Normalization(format!(
                "conjugate shift coefficient {} is inconsistent",
                m
            )));
        }
    }
    Ok(())
}

fn trace_form(records: &mut Vec<TraceRecord>, stage: &str, label: String, f: &FormExpr) {
    for (mono, c) in f.terms() {
        let legs: Vec<String> = mono.iter().map(|s| s.to_string()).collect();
        records.push(TraceRecord {
            stage: stage.to_string(),
            form: label.clone(),
            monomial: legs.join("∧"),
            coeff: c.canonical_string(),
        });
    }
}

fn trace_stage(records: &mut Vec<TraceRecord>, stage: &Stage, torsion: &[TorsionReport; 5]) {
    for (k, rep) in torsion.iter().enumerate() {
        let label = format!("d{}", s2_name(stage, k));
        for (&(i, j), c) in &rep.slots {
            records.push(TraceRecord {
                stage: stage.id.label().to_string(),
                form: label.clone(),
                monomial: format!("{}∧{}", s2_name(stage, i), s2_name(stage, j)),
                coeff: c.canonical_string(),
            });
        }
    }
}

fn s2_name(stage: &Stage, k: usize) -> String {
    stage.stage_sym(k).to_string()
}

impl Reduction {
    /// Runs the full pipeline on the native structure. Every internal
    /// audit is an error, not a warning: a failed pattern, round-trip,
    /// or normalization kills the run.
    pub fn run(trace: bool) -> Result<Reduction, ReduceError> {
        let sec = derive_secondary_brackets()?;
        let st = Structure::new(sec.native_algebra());
        let alg = &st.alg;

        let s0 = Stage::new(alg, StageId::Lifted, build_initial_g_structure().entries, identity5())?;
        let torsion0 = torsion_all(&st, &s0)?;
        let absorption0 = absorb_stage(&s0, &torsion0);
        let essential0 = absorption0.essential();

        let mut norm = solve_normalizations(alg, &torsion0)?;

        let (g1, n1) = stage1_matrices(alg, &norm);
        let s1 = Stage::new(alg, StageId::Stage1, g1, n1)?;
        let expect1 = lifted_subst(alg, &s0.lifted, &norm.subst_map())?;
        if s1.lifted != expect1 {
            return Err(ReduceError::Normalization(
                "middle-stage matrix differs from the substituted lift".into(),
            ));
        }
        let torsion1 = torsion_all(&st, &s1)?;
        let absorption1 = absorb_stage(&s1, &torsion1);
        let essential1 = absorption1.essential();
        // the loop-one targets stay solved in the new coframe
        for (i, j) in [(0, 2), (0, 4)] {
            if let Some(v) = torsion1[1].slots.get(&(i, j)) {
                if !v.is_zero() {
                    return Err(ReduceError::Normalization(format!(
                        "dσ slot {}∧{} reappears at the middle stage: {}",
                        FRAME_NAMES[i], FRAME_NAMES[j], v
                    )));
                }
            }
        }
        // the ρ-row thirds identities tying dρ to the ζ-columns
        let slot1 = |k: usize, i: usize, j: usize| {
            torsion1[k].slots.get(&(i, j)).cloned().unwrap_or_else(ScalarExpr::zero)
        };
        let third = GaussRat::from_int(3).inv();
        if slot1(2, 2, 4) != slot1(0, 0, 4).add(&slot1(1, 1, 4)).scale(&third)
            || slot1(2, 2, 3) != slot1(0, 0, 3).add(&slot1(1, 1, 3)).scale(&third)
        {
            return Err(ReduceError::Normalization("ρ-row thirds identities fail".into()));
        }

        normalize_e(alg, &mut norm, &torsion1)?;

        let (g2, n2) = stage2_matrices(alg, &norm);
        let s2 = Stage::new(alg, StageId::Stage2, g2, n2)?;
        let mut emap = BTreeMap::new();
        emap.insert(GLetter::Ge, norm.e.clone());
        let expect2 = lifted_subst(alg, &s1.lifted, &emap)?;
        if s2.lifted != expect2 {
            return Err(ReduceError::Normalization(
                "rigid-stage matrix differs from the substituted middle stage".into(),
            ));
        }
        let torsion2 = torsion_all(&st, &s2)?;
        let absorption2 = absorb_stage(&s2, &torsion2);
        let lambda_shift = solve_lambda_shift(&absorption2)?;
        conj_shift_audit(alg, &lambda_shift)?;

        let fin = final_equations(&st, &s2, &lambda_shift)?;
        let invariants = invariant_table(&s2, &fin.d_frame, &fin.d_lambda)?;

        let mut records = Vec::new();
        if trace {
            trace_stage(&mut records, &s0, &torsion0);
            trace_stage(&mut records, &s1, &torsion1);
            trace_stage(&mut records, &s2, &torsion2);
            for (k, f) in fin.d_frame.iter().enumerate() {
                trace_form(&mut records, "final", format!("d{}", s2_name(&s2, k)), f);
            }
            trace_form(&mut records, "final", "dλ".into(), &fin.d_lambda);
        }

        Ok(Reduction {
            stage0: s0,
            stage1: s1,
            stage2: s2,
            torsion0,
            torsion1,
            torsion2,
            absorption0,
            absorption1,
            absorption2,
            essential0,
            essential1,
            normalizations: norm,
            lambda_shift,
            lambda: fin.lambda,
            lambda_master: fin.lambda_master,
            d_frame: fin.d_frame,
            d_lambda: fin.d_lambda,
            invariants,
            trace: records,
        })
    }

    /// The homogeneous collapse: all base functions to zero. The
    /// pipeline is polynomial in the base symbols, so dropping every
    /// monomial that carries one is the specialization to the model.
    pub fn flat(&self) -> ([FormExpr; 5], FormExpr) {
        let drop = |f: &FormExpr| f.map_coeffs(&drop_base);
        (std::array::from_fn(|k| drop(&self.d_frame[k])), drop(&self.d_lambda))
    }
}

/// Keeps only the monomials free of base symbols.
pub fn drop_base(e: &ScalarExpr) -> ScalarExpr {
    let mut out = ScalarExpr::zero();
    for (m, c) in e.terms() {
        if m.base.is_empty() {
            out.add_term(m.clone(), c.clone());
        }
    }
    out
}

/// Rewrites the homogeneous display as constant structure rules over the
/// seven-dimensional coframe order (λ̄, λ, σ̄, σ, ρ, ζ̄, ζ).
pub fn flat_rules(
    alg: &DerivationAlgebra,
    flat_frame: &[FormExpr; 5],
    flat_lambda: &FormExpr,
) -> Result<Vec<BTreeMap<(usize, usize), GaussRat>>, ReduceError> {
    let index = |s: &FormSym| -> Result<usize, ReduceError> {
        match s {
            FormSym::Mc(McSym::Lambda, true) => Ok(0),
            FormSym::Mc(McSym::Lambda, false) => Ok(1),
            FormSym::Frame(CoframeGen::Stage2, i) => Ok(2 + i.index()),
            other => Err(ReduceError::BadLegs(other.to_string())),
        }
    };
    let mut rules = vec![BTreeMap::new(); 7];
    let mut fill = |target: usize, f: &FormExpr| -> Result<(), ReduceError> {
        for (mono, c) in f.terms() {
            let [s1, s2] = mono.as_slice() else {
                return Err(ReduceError::BadLegs("non-binary flat monomial".into()));
            };
            let (i, j) = (index(s1)?, index(s2)?);
            let c = c.constant_value().ok_or_else(|| {
                ReduceError::FinalShape("flat coefficient is not constant".into())
            })?;
            let (i, j, c) = if i < j { (i, j, c) } else { (j, i, c.neg()) };
            rules[target].insert((i, j), c);
        }
        Ok(())
    };
    fill(0, &flat_lambda.conj(alg))?;
    fill(1, flat_lambda)?;
    for (k, f) in flat_frame.iter().enumerate() {
        fill(2 + k, f)?;
    }
    Ok(rules)
}
