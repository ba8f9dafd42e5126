//! Property checks shared by the randomized suite and the acceptance gate.
//!
//! Every check returns `Err` with a readable message instead of
//! panicking, so both proptest and the programmatic runner can report
//! shrunk counterexamples.

use creq_core::exterior::structure::Structure;
use creq_core::exterior::{FormExpr, FormSym};
use creq_core::reduce::{identity5, mat_mul, Stage};
use creq_core::scalar::derivation::bracket_gt;
use creq_core::{
    BaseName, BaseSymbol, DerivationAlgebra, GaussRat, GroupAtom, Letter, Mono, ScalarExpr,
};
use proptest::prelude::*;

pub fn gauss_strat() -> impl Strategy<Value = GaussRat> {
    (-12i64..13, 1i64..7, -12i64..13, 1i64..7)
        .prop_map(|(rn, rd, im, id)| GaussRat::from_parts(rn, rd, im, id))
}

pub fn nonzero_gauss_strat() -> impl Strategy<Value = GaussRat> {
    gauss_strat().prop_filter("nonzero", |g| !g.is_zero())
}

pub fn letter_strat() -> impl Strategy<Value = Letter> {
    prop::sample::select(Letter::ALL.to_vec())
}

/// Base symbols with derivative words up to `max_word` letters; real
/// names drop the conjugation flag on construction.
pub fn symbol_strat_with(max_word: usize) -> impl Strategy<Value = BaseSymbol> {
    let names = vec![
        BaseName::A,
        BaseName::B,
        BaseName::P,
        BaseName::Q,
        BaseName::R,
        BaseName::EF,
    ];
    (
        prop::sample::select(names),
        any::<bool>(),
        prop::collection::vec(letter_strat(), 0..(max_word + 1)),
    )
        .prop_map(|(name, conj, mut word)| {
            // symbol words are kept ascending by the engine
            word.sort();
            BaseSymbol::with_word(word, name, conj)
        })
}

pub fn symbol_strat() -> impl Strategy<Value = BaseSymbol> {
    symbol_strat_with(2)
}

pub fn mono_strat_with(max_word: usize) -> impl Strategy<Value = Mono> {
    // negative powers are only allowed on the invertible diagonal atoms
    let invertible = (
        prop::sample::select(vec![GroupAtom::A, GroupAtom::ABAR]),
        -2i64..3,
    );
    let nilpotent_ok = (
        prop::sample::select(vec![GroupAtom::B, GroupAtom::E]),
        1i64..3,
    );
    let group = prop::collection::vec(prop_oneof![invertible, nilpotent_ok], 0..3);
    let base = prop::collection::vec((symbol_strat_with(max_word), 1u32..3), 0..3);
    (group, base).prop_map(|(gs, bs)| {
        let mut m = Mono::one();
        for (g, e) in gs {
            if e != 0 {
                m = m.mul(&Mono::atom(g, e));
            }
        }
        for (s, e) in bs {
            for _ in 0..e {
                m = m.mul(&Mono::sym(s.clone()));
            }
        }
        m
    })
}

pub fn mono_strat() -> impl Strategy<Value = Mono> {
    mono_strat_with(2)
}

pub fn scalar_strat_with(max_word: usize) -> impl Strategy<Value = ScalarExpr> {
    prop::collection::vec((mono_strat_with(max_word), gauss_strat()), 0..4).prop_map(|terms| {
        let mut e = ScalarExpr::zero();
        for (m, c) in terms {
            e.add_term(m, c);
        }
        e
    })
}

pub fn scalar_strat() -> impl Strategy<Value = ScalarExpr> {
    scalar_strat_with(2)
}

/// One-forms over the base cobasis with scalar coefficients.
pub fn one_form_strat() -> impl Strategy<Value = FormExpr> {
    prop::collection::vec((0usize..5, scalar_strat()), 1..4).prop_map(|terms| {
        let mut f = FormExpr::zero(1);
        for (leg, c) in terms {
            f = f.add(&FormExpr::one_form(FormSym::base0(leg)).scale(&c));
        }
        f
    })
}

fn ok(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Field axioms and canonical-string round trip for the coefficients.
pub fn check_gauss(a: &GaussRat, b: &GaussRat, c: &GaussRat) -> Result<(), String> {
    let ab = a * b;
    ok(ab == b * a, || "mul not commutative".into())?;
    ok(&ab * c == a * &(b * c), || "mul not associative".into())?;
    ok(
        a * &(b + c) == &ab + &(a * c),
        || "mul not distributive".into(),
    )?;
    ok(a.conj().conj() == *a, || "conj not involutive".into())?;
    if !a.is_zero() {
        ok(a * &a.inv() == GaussRat::one(), || {
            format!("inv failed for {}", a.canonical_string())
        })?;
    }
    let s = a.canonical_string();
    let back: GaussRat = s.parse().map_err(|e| format!("parse {s}: {e:?}"))?;
    ok(back == *a, || format!("round trip changed {s}"))
}

/// Rebuilds an expression term by term; the result must be identical,
/// which is the normal-form idempotence statement.
fn rebuild(e: &ScalarExpr) -> ScalarExpr {
    let mut out = ScalarExpr::zero();
    for (m, c) in e.terms() {
        out.add_term(m.clone(), c.clone());
    }
    out
}

pub fn check_scalar_ring(
    x: &ScalarExpr,
    y: &ScalarExpr,
    z: &ScalarExpr,
) -> Result<(), String> {
    ok(rebuild(x) == *x, || "rebuild changed the expression".into())?;
    ok(
        rebuild(x).canonical_string() == x.canonical_string(),
        || "canonical string unstable under rebuild".into(),
    )?;
    ok(x.add(y) == y.add(x), || "add not commutative".into())?;
    ok(
        x.add(&y.add(z)) == x.add(y).add(z),
        || "add not associative".into(),
    )?;
    ok(x.mul(y) == y.mul(x), || "mul not commutative".into())?;
    ok(
        x.mul(&y.mul(z)) == x.mul(y).mul(z),
        || "mul not associative".into(),
    )?;
    ok(
        x.mul(&y.add(z)) == x.mul(y).add(&x.mul(z)),
        || "mul not distributive".into(),
    )?;
    ok(x.sub(x).is_zero(), || "x - x nonzero".into())?;
    ok(x.mul(&ScalarExpr::one()) == *x, || "unit broken".into())?;
    ok(
        x.neg().neg() == *x,
        || "negation not involutive".into(),
    )
}

/// Rewrites every base symbol through the engine, so rule-reducible
/// derivative words land in their normal form.
pub fn normalize(alg: &DerivationAlgebra, x: &ScalarExpr) -> ScalarExpr {
    let mut out = ScalarExpr::zero();
    for (m, c) in x.terms() {
        let group_only = Mono {
            group: m.group.clone(),
            base: std::collections::BTreeMap::new(),
        };
        let mut t = ScalarExpr::from_mono(group_only, c.clone());
        for (s, exp) in &m.base {
            let mut e = ScalarExpr::sym(BaseSymbol::new(s.name.clone(), s.conj));
            for &l in s.word.iter().rev() {
                e = alg.derive(l, &e);
            }
            t = t.mul(&e.pow(*exp));
        }
        out = out.add(&t);
    }
    out
}

pub fn check_conj_involution(alg: &DerivationAlgebra, x: &ScalarExpr) -> Result<(), String> {
    // involution is a statement about normal forms; raw random words may
    // be reducible and conjugation normalizes on the way through
    let xn = normalize(alg, x);
    ok(alg.conj(&alg.conj(&xn)) == xn, || {
        format!("conj twice changed {}", xn.canonical_string())
    })?;
    // conjugation is a ring map
    let c = alg.conj(&xn);
    ok(
        alg.conj(&xn.mul(&xn)) == c.mul(&c),
        || "conj not multiplicative".into(),
    )
}

pub fn check_leibniz(
    alg: &DerivationAlgebra,
    l: Letter,
    x: &ScalarExpr,
    y: &ScalarExpr,
) -> Result<(), String> {
    let lhs = alg.derive(l, &x.mul(y));
    let rhs = alg.derive(l, x).mul(y).add(&x.mul(&alg.derive(l, y)));
    ok(lhs == rhs, || {
        format!(
            "Leibniz failed for {:?} on ({}) * ({})",
            l,
            x.canonical_string(),
            y.canonical_string()
        )
    })
}

pub fn check_graded_anticomm(w1: &FormExpr, w2: &FormExpr) -> Result<(), String> {
    let p = w1.degree() as u32;
    let q = w2.degree() as u32;
    let lhs = w1.wedge(w2);
    let mut rhs = w2.wedge(w1);
    if (p * q) % 2 == 1 {
        rhs = rhs.neg();
    }
    ok(lhs == rhs, || "graded anticommutativity failed".into())?;
    if p % 2 == 1 {
        ok(w1.wedge(w1).is_zero(), || "odd square nonzero".into())?;
    }
    Ok(())
}

pub fn check_antiderivation(
    st: &Structure,
    w1: &FormExpr,
    w2: &FormExpr,
) -> Result<(), String> {
    let lhs = st.d(&w1.wedge(w2));
    let sign = if w1.degree() % 2 == 1 { -1 } else { 1 };
    let mut cross = w1.wedge(&st.d(w2));
    if sign < 0 {
        cross = cross.neg();
    }
    let rhs = st.d(w1).wedge(w2).add(&cross);
    ok(lhs == rhs, || "antiderivation identity failed".into())
}

/// Exhaustive confluence check for the derivation-word reordering, in
/// the opaque-symbol mode where no secondary rewrite fires. A word
/// x·y·z with x > y > z carries two overlapping descending pairs; the
/// engine resolves the left pair first, and this check resolves the
/// right pair by hand instead. Both orders must agree after
/// normalization, over every strictly descending triple and every
/// suffixed symbol keeping the total word length at most 4.
pub fn check_confluence_exhaustive(alg: &DerivationAlgebra) -> Result<(), String> {
    let names = [
        (BaseName::A, false),
        (BaseName::B, false),
        (BaseName::B, true),
        (BaseName::P, false),
        (BaseName::P, true),
        (BaseName::Q, false),
        (BaseName::Q, true),
        (BaseName::R, false),
        (BaseName::R, true),
        (BaseName::EF, false),
        (BaseName::EF, true),
        (BaseName::FF, false),
        (BaseName::FF, true),
        (BaseName::GF, false),
        (BaseName::GF, true),
        (BaseName::JF, false),
        (BaseName::KF, false),
        (BaseName::KF, true),
    ];
    let mut suffixes: Vec<Vec<Letter>> = vec![vec![]];
    for l in Letter::ALL {
        suffixes.push(vec![l]);
    }
    let mut checked = 0usize;
    for (name, conj) in &names {
        for w in &suffixes {
            let es = ScalarExpr::sym(BaseSymbol::with_word(w.clone(), name.clone(), *conj));
            for x in Letter::ALL {
                for y in Letter::ALL {
                    for z in Letter::ALL {
                        if !(x > y && y > z) {
                            continue;
                        }
                        // left pair first: the engine's own resolution
                        let left =
                            alg.derive(x, &alg.derive(y, &alg.derive(z, &es)));
                        // right pair first: y·z = z·y + [y,z] by hand
                        let mut alt = alg.derive(z, &alg.derive(y, &es));
                        for (u, c) in bracket_gt(y, z) {
                            alt = alt.add(&c.mul(&alg.derive(u, &es)));
                        }
                        let right = alg.derive(x, &alt);
                        if left != right {
                            return Err(format!(
                                "orders disagree for {:?}·{:?}·{:?} on {}",
                                x,
                                y,
                                z,
                                es.canonical_string()
                            ));
                        }
                        checked += 1;
                    }
                }
            }
        }
    }
    ok(checked == 18 * 6 * 10, || format!("covered {} cases", checked))
}

/// Round trip through a reduction stage: express a base-cobasis form in
/// the stage coframe and back.
pub fn check_stage_roundtrip(stage: &Stage, coeffs: &[ScalarExpr; 5]) -> Result<(), String> {
    let mut omega = FormExpr::zero(1);
    for (i, c) in coeffs.iter().enumerate() {
        omega = omega.add(&FormExpr::one_form(FormSym::base0(i)).scale(c));
    }
    let up = stage.base0_to_stage();
    let mut down = std::collections::BTreeMap::new();
    for m in 0..5 {
        let mut row = FormExpr::zero(1);
        for j in 0..5 {
            row = row.add(&FormExpr::one_form(FormSym::base0(j)).scale(&stage.lifted[m][j]));
        }
        down.insert(stage.stage_sym(m), row);
    }
    let back = omega.apply_map(&up).apply_map(&down);
    ok(back == omega, || {
        format!("round trip failed at {}", stage.id.label())
    })?;
    let id = mat_mul(&stage.lifted, &stage.inverse);
    ok(id == identity5(), || "lifted times inverse is not identity".into())
}
