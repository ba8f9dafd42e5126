//! Randomized property suite over the scalar ring, the derivation
//! engine, the exterior algebra, and the reduction stages, plus the
//! exhaustive rewrite commutation check.

#[path = "shared/props_core.rs"]
mod props_core;

use creq_core::exterior::secondary::{derive_secondary_brackets, SecondaryData};
use creq_core::exterior::structure::Structure;
use creq_core::reduce::Reduction;
use creq_core::Letter;
use proptest::prelude::*;
use props_core::*;
use std::sync::OnceLock;

fn secondary() -> &'static SecondaryData {
    static CELL: OnceLock<SecondaryData> = OnceLock::new();
    CELL.get_or_init(|| derive_secondary_brackets().expect("secondary derivation"))
}

fn reduction() -> &'static Reduction {
    static CELL: OnceLock<Reduction> = OnceLock::new();
    CELL.get_or_init(|| Reduction::run(false).expect("reduction"))
}

fn prop(r: Result<(), String>) -> Result<(), TestCaseError> {
    r.map_err(TestCaseError::fail)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(160))]

    #[test]
    fn gauss_field_axioms(a in gauss_strat(), b in gauss_strat(), c in gauss_strat()) {
        prop(check_gauss(&a, &b, &c))?;
    }

    #[test]
    fn scalar_ring_axioms_and_idempotence(
        x in scalar_strat(),
        y in scalar_strat(),
        z in scalar_strat(),
    ) {
        prop(check_scalar_ring(&x, &y, &z))?;
    }

    #[test]
    fn conjugation_is_an_involution(x in props_core::scalar_strat_with(1)) {
        prop(check_conj_involution(&secondary().native_algebra(), &x))?;
        prop(check_conj_involution(&creq_core::DerivationAlgebra::free(), &x))?;
    }

    #[test]
    fn derivations_satisfy_leibniz(
        l in prop::sample::select(Letter::ALL.to_vec()),
        x in props_core::scalar_strat_with(1),
        y in props_core::scalar_strat_with(1),
    ) {
        prop(check_leibniz(&secondary().native_algebra(), l, &x, &y))?;
    }

    #[test]
    fn wedge_is_graded_anticommutative(
        w1 in one_form_strat(),
        w2 in one_form_strat(),
        w3 in one_form_strat(),
    ) {
        prop(check_graded_anticomm(&w1, &w2))?;
        let two = w1.wedge(&w2);
        prop(check_graded_anticomm(&two, &w3))?;
    }

    #[test]
    fn d_is_an_antiderivation(w1 in one_form_strat(), w2 in one_form_strat()) {
        let st = Structure::new(secondary().native_algebra());
        prop(check_antiderivation(&st, &w1, &w2))?;
        let two = w1.wedge(&w2);
        prop(check_antiderivation(&st, &two, &w1))?;
    }

    #[test]
    fn stage_coframes_round_trip(coeffs in
        proptest::array::uniform5(scalar_strat()))
    {
        let r = reduction();
        prop(check_stage_roundtrip(&r.stage0, &coeffs))?;
        prop(check_stage_roundtrip(&r.stage1, &coeffs))?;
        prop(check_stage_roundtrip(&r.stage2, &coeffs))?;
    }
}

#[test]
fn rewrite_commutation_is_exhaustively_confluent() {
    check_confluence_exhaustive(&secondary().native_algebra()).unwrap();
}
