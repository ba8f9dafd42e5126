//! Command line front end: verification suites, the reduction pipeline,
//! and report emission in JSON or LaTeX.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use creq_core::cartan::{interior, CartanConnection};
use creq_core::exterior::secondary::{check_d2, derive_secondary_brackets, Relation, SecondaryData};
use creq_core::exterior::{CoframeGen, FormExpr, FormSym, FrameIdx, McSym, Structure};
use creq_core::liealg::{check_nilpotent_iso, g7, n54, LieAlgebra, McEquations, G7_COFRAME};
use creq_core::reduce::{flat_rules, Reduction, FRAME_WEIGHTS};
use creq_core::report::{
    check_values, form_json, latex_form, latex_scalar, render_json, CheckReport, GoldenSet,
};
use creq_core::vecfield::poly::{Z, ZB};
use creq_core::vecfield::{
    adapted_frame, automorphisms, check_tangency, commutator_table, model_frame, printed_table,
    rank_at_point, table_to_algebra, tangency_residues, ModelSurface, AUTOMORPHISM_LABELS,
};
use creq_core::{GaussRat, GroupAtom, ScalarExpr};

#[derive(Parser)]
#[command(name = "creq", version, about = "Equivalence engine for a five-dimensional CR geometry")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Emit one record per collected torsion monomial per stage.
    #[arg(long, global = true)]
    trace: bool,
    /// Collapse all base symbols to zero before emission.
    #[arg(long, global = true)]
    flat: bool,
    /// Comma-separated subset of checks to run.
    #[arg(long, global = true, value_delimiter = ',')]
    checks: Vec<String>,
    /// Path to an alternative golden-value file.
    #[arg(long, global = true)]
    goldens: Option<PathBuf>,
    /// Path to a JSON bracket table replacing the built-in seven-dimensional one.
    #[arg(long, global = true)]
    algebra: Option<PathBuf>,
    /// Path to a JSON model-surface description replacing the cubic.
    #[arg(long, global = true)]
    surface: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Model-surface suite: frames, ranks, tangency, bracket tables.
    VerifyModel,
    /// Two-loop reduction with golden diffs and the final equations.
    Reduce,
    /// Induced derivative relations and the bracket coefficients.
    DeriveSecondary,
    /// Connection conditions and the curvature report.
    CartanCheck,
    /// Structure equations and invariants, no gating.
    Emit,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Latex,
}

/// A configuration problem: unknown check names, unreadable inputs.
struct ConfigError(String);

fn main() -> ExitCode {
    let cli = Cli::parse();
    let known: &[&str] = match cli.command {
        Command::VerifyModel => &[
            "frame", "rank", "tangency", "table", "isotropy", "nilpotent", "jacobi", "duality",
        ],
        Command::Reduce => &["goldens", "equations", "flat"],
        Command::DeriveSecondary => &["values", "realness", "closure"],
        Command::CartanCheck => &["coframe", "vertical", "equivariance", "curvature"],
        Command::Emit => &[],
    };
    for name in &cli.checks {
        if !known.contains(&name.as_str()) {
            eprintln!("unknown check name: {}", name);
            return ExitCode::from(2);
        }
    }
    let reports = match run(&cli) {
        Ok(reports) => reports,
        Err(ConfigError(msg)) => {
            eprintln!("{}", msg);
            return ExitCode::from(2);
        }
    };
    match cli.format {
        Format::Json => print!("{}", render_json(&reports)),
        Format::Latex => print!("{}", render_latex(&reports)),
    }
    if reports.iter().all(CheckReport::passed) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn run(cli: &Cli) -> Result<Vec<CheckReport>, ConfigError> {
    match cli.command {
        Command::VerifyModel => verify_model(cli),
        Command::Reduce => reduce(cli),
        Command::DeriveSecondary => derive_secondary(cli),
        Command::CartanCheck => cartan_check(cli),
        Command::Emit => emit(cli),
    }
}

fn selected(cli: &Cli, name: &str) -> bool {
    cli.checks.is_empty() || cli.checks.iter().any(|c| c == name)
}

fn read_file(path: &PathBuf) -> Result<String, ConfigError> {
    std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read {}: {}", path.display(), e)))
}

fn load_goldens(cli: &Cli) -> Result<GoldenSet, ConfigError> {
    match &cli.goldens {
        None => Ok(GoldenSet::builtin()),
        Some(p) => GoldenSet::load(p)
            .map_err(|e| ConfigError(format!("cannot load goldens {}: {}", p.display(), e))),
    }
}

fn load_algebra(cli: &Cli) -> Result<Option<LieAlgebra>, ConfigError> {
    match &cli.algebra {
        None => Ok(None),
        Some(p) => {
            let doc = read_file(p)?;
            LieAlgebra::from_json(&doc)
                .map(Some)
                .map_err(|e| ConfigError(format!("bad bracket table {}: {}", p.display(), e)))
        }
    }
}

fn plain(check: &str, ok: bool, payload: serde_json::Value, diff: String) -> CheckReport {
    if ok {
        CheckReport::pass(check, payload)
    } else {
        CheckReport::fail(check, payload, diff)
    }
}

fn render_latex(reports: &[CheckReport]) -> String {
    let mut out = String::new();
    for r in reports {
        let status = if r.passed() { "pass" } else { "fail" };
        out.push_str(&format!("% {} : {}\n", r.check, status));
        if let Some(anchor) = &r.golden_anchor {
            out.push_str(&format!("%   anchor: {}\n", anchor));
        }
        if let Some(diff) = &r.diff {
            out.push_str(&format!("%   diff: {}\n", diff));
        }
        if let Some(lines) = r.payload.get("lines").and_then(|v| v.as_array()) {
            for l in lines {
                if let Some(s) = l.as_str() {
                    out.push_str(s);
                    out.push('\n');
                }
            }
        }
    }
    out
}

fn verify_model(cli: &Cli) -> Result<Vec<CheckReport>, ConfigError> {
    let surface = match &cli.surface {
        None => ModelSurface::cubic(),
        Some(p) => ModelSurface::from_json(&read_file(p)?)
            .map_err(|e| ConfigError(format!("bad surface {}: {}", p.display(), e)))?,
    };
    let reference = load_algebra(cli)?;
    let mut out = Vec::new();
    let frame = model_frame();

    if selected(cli, "frame") {
        let adapted = adapted_frame(&frame[0]);
        let ok = (0..3).all(|j| (0..5).all(|k| adapted[j].comp(k) == frame[2 + j].comp(k)));
        out.push(plain(
            "model.frame",
            ok,
            serde_json::json!({ "fields": ["T", "S", "S̄"] }),
            "adapted frame differs from the stated fields".into(),
        ));
    }
    if selected(cli, "rank") {
        let origin = [(); 11].map(|_| GaussRat::zero());
        let mut points = vec![origin.clone()];
        for (re, im) in [(1i64, 0i64), (0, 1), (1, 1), (2, -1), (1, 2)] {
            let mut p = origin.clone();
            p[Z] = GaussRat::from_parts(re, 1, im, 1);
            p[ZB] = p[Z].conj();
            points.push(p);
        }
        let bad = points.iter().position(|p| rank_at_point(&frame, p) != 5);
        out.push(plain(
            "model.rank",
            bad.is_none(),
            serde_json::json!({ "points": points.len(), "rank": 5 }),
            format!("rank drops at sample point {}", bad.unwrap_or(0)),
        ));
    }
    let autos = automorphisms();
    if selected(cli, "tangency") {
        let mut failed = Vec::new();
        for (k, x) in autos.iter().enumerate() {
            if !check_tangency(x, &surface) {
                let res: Vec<String> =
                    tangency_residues(x, &surface).iter().map(|p| p.to_string()).collect();
                failed.push(format!("{}: {}", AUTOMORPHISM_LABELS[k], res.join("; ")));
            }
        }
        out.push(plain(
            "model.tangency",
            failed.is_empty(),
            serde_json::json!({ "generators": AUTOMORPHISM_LABELS }),
            format!("non-tangent generators: {}", failed.join(" | ")),
        ));
    }
    let table = match commutator_table(&autos) {
        Ok(t) => t,
        Err(e) => {
            out.push(CheckReport::fail(
                "model.table",
                serde_json::json!({}),
                format!("bracket expansion failed: {}", e),
            ));
            return Ok(out);
        }
    };
    if selected(cli, "table") {
        let mut printed: BTreeMap<(usize, usize), Vec<(usize, GaussRat)>> = BTreeMap::new();
        for (i, j, coeffs) in printed_table() {
            printed.insert((i, j), coeffs);
        }
        let mut diff = String::new();
        'outer: for i in 0..7 {
            for j in (i + 1)..7 {
                let mut expected = vec![GaussRat::zero(); 7];
                if let Some(coeffs) = printed.get(&(i, j)) {
                    for (k, c) in coeffs {
                        expected[*k] = c.clone();
                    }
                }
                if table[i][j] != expected {
                    diff = format!(
                        "bracket [{}, {}] disagrees with the table",
                        AUTOMORPHISM_LABELS[i], AUTOMORPHISM_LABELS[j]
                    );
                    break 'outer;
                }
            }
        }
        out.push(plain(
            "model.table",
            diff.is_empty(),
            serde_json::json!({ "entries": 21 }),
            diff,
        ));
    }
    if selected(cli, "isotropy") {
        let origin = [(); 11].map(|_| GaussRat::zero());
        let vanishing: Vec<&str> = autos
            .iter()
            .enumerate()
            .filter(|(_, f)| f.vanishes_at(&origin))
            .map(|(k, _)| AUTOMORPHISM_LABELS[k])
            .collect();
        out.push(plain(
            "model.isotropy",
            vanishing == ["D", "R"],
            serde_json::json!({ "vanishing": vanishing }),
            "origin isotropy is not {D, R}".into(),
        ));
    }
    let alg = match &reference {
        Some(a) => a.clone(),
        None => table_to_algebra(&AUTOMORPHISM_LABELS, &table),
    };
    if selected(cli, "nilpotent") {
        let witness = if alg.dim >= 5 {
            check_nilpotent_iso(&alg, &[0, 1, 2, 3, 4], &n54()).unwrap_or(None)
        } else {
            None
        };
        let payload = match &witness {
            None => serde_json::json!({}),
            Some(ys) => serde_json::json!({
                "witness": ys
                    .iter()
                    .map(|y| y.iter().map(|c| c.canonical_string()).collect::<Vec<_>>())
                    .collect::<Vec<_>>()
            }),
        };
        out.push(plain(
            "model.nilpotent",
            witness.is_some(),
            payload,
            "no isomorphism witness onto the nilpotent model".into(),
        ));
    }
    if selected(cli, "jacobi") {
        let mut diff = String::new();
        for (name, a) in [("reference", &alg), ("dim5", &n54()), ("dim7", &g7())] {
            if let Some(((i, j, k), _)) = a.jacobi_residual().into_iter().next() {
                diff = format!("{} table fails Jacobi on ({}, {}, {})", name, i, j, k);
                break;
            }
        }
        out.push(plain(
            "model.jacobi",
            diff.is_empty(),
            serde_json::json!({ "tables": ["reference", "dim5", "dim7"] }),
            diff,
        ));
    }
    if selected(cli, "duality") {
        let seven = match &reference {
            Some(a) if a.dim == 7 => a.clone(),
            _ => g7(),
        };
        let mc = seven.mc_equations(G7_COFRAME.map(String::from).to_vec());
        let mut diff = String::new();
        if let Some((form, (i, j, k), _)) = mc.d_squared_residual().into_iter().next() {
            diff = format!("dual d² residual on form {} at ({}, {}, {})", form, i, j, k);
        } else if mc.rules != g7().mc_equations(G7_COFRAME.map(String::from).to_vec()).rules {
            diff = "dual structure rules differ from the built-in table".into();
        }
        out.push(plain(
            "model.duality",
            diff.is_empty(),
            serde_json::json!({ "lines": mc.display_lines() }),
            diff,
        ));
    }
    Ok(out)
}

fn pipeline(trace: bool) -> Result<(SecondaryData, Reduction), CheckReport> {
    let sec = derive_secondary_brackets().map_err(|e| {
        CheckReport::fail("reduce.secondary", serde_json::json!({}), e.to_string())
    })?;
    let r = Reduction::run(trace).map_err(|e| {
        CheckReport::fail("reduce.pipeline", serde_json::json!({}), e.to_string())
    })?;
    Ok((sec, r))
}

/// The final structure equations hold with integer fiber legs and
/// weight-factored frame coefficients, and the last connection form
/// closes semibasically.
fn equations_hold(r: &Reduction) -> Result<(), String> {
    let weight = |s: &FormSym| -> Result<(i64, i64), String> {
        match s {
            FormSym::Mc(McSym::Lambda, _) => Ok((0, 0)),
            FormSym::Frame(CoframeGen::Stage2, i) => Ok(FRAME_WEIGHTS[i.index()]),
            other => Err(format!("unexpected leg {}", other)),
        }
    };
    let frame_sym = |k: usize| FormSym::Frame(CoframeGen::Stage2, FrameIdx::from_index(k));
    for k in 0..5 {
        let (pk, qk) = FRAME_WEIGHTS[k];
        let lam = r.d_frame[k].coeff_pair(FormSym::Mc(McSym::Lambda, false), frame_sym(k));
        if lam != ScalarExpr::int(pk) {
            return Err(format!("equation {} primary fiber leg is {}", k, lam.canonical_string()));
        }
        let lam_bar = r.d_frame[k].coeff_pair(FormSym::Mc(McSym::Lambda, true), frame_sym(k));
        if lam_bar != ScalarExpr::int(qk) {
            return Err(format!("equation {} conjugate fiber leg", k));
        }
        for (mono, c) in r.d_frame[k].terms() {
            match mono.as_slice() {
                [FormSym::Mc(McSym::Lambda, _), FormSym::Frame(CoframeGen::Stage2, i)] => {
                    if i.index() != k {
                        return Err(format!("equation {} has a foreign fiber leg", k));
                    }
                }
                [s1 @ FormSym::Frame(CoframeGen::Stage2, _), s2 @ FormSym::Frame(CoframeGen::Stage2, _)] => {
                    let (p1, q1) = weight(s1)?;
                    let (p2, q2) = weight(s2)?;
                    let core = c
                        .mul(&ScalarExpr::atom(GroupAtom::A, p1 + p2 - pk))
                        .mul(&ScalarExpr::atom(GroupAtom::ABAR, q1 + q2 - qk));
                    if core.has_group_atoms() {
                        return Err(format!(
                            "equation {} coefficient of {}∧{} keeps fiber atoms",
                            k, s1, s2
                        ));
                    }
                }
                other => return Err(format!("equation {} has legs {:?}", k, other)),
            }
        }
    }
    for (mono, c) in r.d_lambda.terms() {
        let [s1, s2] = mono.as_slice() else {
            return Err("non-binary monomial in the closing form".into());
        };
        if !matches!(s1, FormSym::Frame(CoframeGen::Stage2, _))
            || !matches!(s2, FormSym::Frame(CoframeGen::Stage2, _))
        {
            return Err(format!("closing form keeps leg {}∧{}", s1, s2));
        }
        let (p1, q1) = weight(s1)?;
        let (p2, q2) = weight(s2)?;
        let core = c
            .mul(&ScalarExpr::atom(GroupAtom::A, p1 + p2))
            .mul(&ScalarExpr::atom(GroupAtom::ABAR, q1 + q2));
        if core.has_group_atoms() {
            return Err(format!("closing-form coefficient of {}∧{} keeps fiber atoms", s1, s2));
        }
    }
    Ok(())
}

const FRAME_LABELS: [&str; 5] = ["σ̄", "σ", "ρ", "ζ̄", "ζ"];

fn reduce(cli: &Cli) -> Result<Vec<CheckReport>, ConfigError> {
    let goldens = load_goldens(cli)?;
    let mut out = Vec::new();
    let (sec, r) = match pipeline(cli.trace) {
        Ok(v) => v,
        Err(report) => return Ok(vec![report]),
    };
    let alg = sec.native_algebra();

    if selected(cli, "goldens") {
        let values = check_values(&sec, &r);
        for id in goldens.ids().map(String::from).collect::<Vec<_>>() {
            let actual = values.get(&id).cloned().unwrap_or_default();
            out.push(goldens.check(&id, &actual));
        }
        if values.len() != goldens.len() {
            out.push(CheckReport::fail(
                "golden.coverage",
                serde_json::json!({ "engine": values.len(), "stored": goldens.len() }),
                "value map and golden book differ in size".into(),
            ));
        }
    }
    if selected(cli, "equations") {
        let lines: Vec<String> = if cli.flat {
            let (flat_frame, flat_lambda) = r.flat();
            let mut ls: Vec<String> = flat_frame
                .iter()
                .enumerate()
                .map(|(k, f)| format!("d{} = {}", FRAME_LABELS[k], f))
                .collect();
            ls.push(format!("dλ = {}", flat_lambda));
            ls
        } else {
            let mut ls: Vec<String> = r
                .d_frame
                .iter()
                .enumerate()
                .map(|(k, f)| format!("d{} = {}", FRAME_LABELS[k], latex_form(f)))
                .collect();
            ls.push(format!("dλ = {}", latex_form(&r.d_lambda)));
            ls
        };
        let payload = serde_json::json!({
            "lines": lines,
            "forms": r.d_frame.iter().map(form_json).collect::<Vec<_>>(),
            "closing": form_json(&r.d_lambda),
            "invariants": r.invariants.entries.iter().map(|e| {
                serde_json::json!({
                    "name": e.name,
                    "value": e.value.canonical_string(),
                })
            }).collect::<Vec<_>>(),
        });
        match equations_hold(&r) {
            Ok(()) => out.push(CheckReport::pass("reduce.equations", payload)),
            Err(msg) => out.push(CheckReport::fail("reduce.equations", payload, msg)),
        }
    }
    if selected(cli, "flat") {
        let (flat_frame, flat_lambda) = r.flat();
        let report = match flat_rules(&alg, &flat_frame, &flat_lambda) {
            Err(e) => CheckReport::fail("reduce.flat", serde_json::json!({}), e.to_string()),
            Ok(rules) => {
                let expected = g7().mc_equations(G7_COFRAME.map(String::from).to_vec());
                let display = McEquations {
                    coframe: G7_COFRAME.map(String::from).to_vec(),
                    rules: rules.clone(),
                };
                plain(
                    "reduce.flat",
                    rules == expected.rules,
                    serde_json::json!({ "lines": display.display_lines() }),
                    "collapsed rules differ from the model table".into(),
                )
            }
        };
        out.push(report);
    }
    if cli.trace {
        let rows: Vec<serde_json::Value> = r
            .trace
            .iter()
            .map(|t| {
                serde_json::json!({
                    "stage": t.stage,
                    "form": t.form,
                    "monomial": t.monomial,
                    "coeff": t.coeff,
                })
            })
            .collect();
        out.push(CheckReport::pass("reduce.trace", serde_json::json!({ "records": rows })));
    }
    Ok(out)
}

fn derive_secondary(cli: &Cli) -> Result<Vec<CheckReport>, ConfigError> {
    let goldens = load_goldens(cli)?;
    let mut out = Vec::new();
    let sec = match derive_secondary_brackets() {
        Ok(sec) => sec,
        Err(e) => {
            return Ok(vec![CheckReport::fail(
                "secondary.derive",
                serde_json::json!({}),
                e.to_string(),
            )])
        }
    };
    if selected(cli, "values") {
        let ids = [
            ("secondary.E", sec.e_val.canonical_string()),
            ("secondary.F", sec.f_val.canonical_string()),
            ("secondary.G", sec.g_val.canonical_string()),
            ("secondary.J", sec.j_val.canonical_string()),
            ("secondary.K", sec.k_val.canonical_string()),
            ("secondary.rule_count", sec.rules.len().to_string()),
        ];
        for (id, actual) in ids {
            out.push(goldens.check(id, &actual));
        }
    }
    if selected(cli, "realness") {
        let alg = sec.native_algebra();
        out.push(plain(
            "secondary.realness",
            alg.conj(&sec.j_val) == sec.j_val,
            serde_json::json!({ "value": sec.j_val.canonical_string() }),
            "symmetrized coefficient is not conjugation-fixed".into(),
        ));
    }
    if selected(cli, "closure") {
        let st = Structure::new(sec.native_algebra());
        let failures = check_d2(&st);
        let relations: Vec<String> = sec.relations().iter().map(Relation::to_string).collect();
        out.push(plain(
            "secondary.closure",
            failures.is_empty(),
            serde_json::json!({ "relations": relations }),
            failures
                .first()
                .map(|f| f.to_string())
                .unwrap_or_default(),
        ));
    }
    Ok(out)
}

fn cartan_check(cli: &Cli) -> Result<Vec<CheckReport>, ConfigError> {
    let reference = load_algebra(cli)?;
    let mut out = Vec::new();
    let (sec, r) = match pipeline(false) {
        Ok(v) => v,
        Err(report) => return Ok(vec![report]),
    };
    let alg = sec.native_algebra();
    let lambda = FormSym::Mc(McSym::Lambda, false);
    let lambda_bar = FormSym::Mc(McSym::Lambda, true);
    let frame_sym = |i: usize| FormSym::Frame(CoframeGen::Stage2, FrameIdx::from_index(i));
    let components: [FormExpr; 7] = std::array::from_fn(|i| match i {
        0 => FormExpr::one_form(lambda_bar),
        1 => FormExpr::one_form(lambda),
        _ => FormExpr::one_form(frame_sym(i - 2)),
    });
    let master: [FormExpr; 7] = std::array::from_fn(|i| match i {
        0 => r.lambda_master.conj(&alg),
        1 => r.lambda_master.clone(),
        _ => r.stage2.lifted_form(i - 2),
    });
    let d_components: [FormExpr; 7] = std::array::from_fn(|i| match i {
        0 => r.d_lambda.conj(&alg),
        1 => r.d_lambda.clone(),
        _ => r.d_frame[i - 2].clone(),
    });
    let conn = CartanConnection {
        components,
        master,
        d_components,
        algebra: reference.unwrap_or_else(g7),
    };

    if selected(cli, "coframe") {
        let res = conn.check_coframe();
        out.push(plain(
            "cartan.coframe",
            res.is_ok(),
            serde_json::json!({}),
            res.err().map(|e| e.to_string()).unwrap_or_default(),
        ));
    }
    if selected(cli, "vertical") {
        let res = conn.check_vertical();
        out.push(plain(
            "cartan.vertical",
            res.is_ok(),
            serde_json::json!({}),
            res.err().map(|e| e.to_string()).unwrap_or_default(),
        ));
    }
    if selected(cli, "equivariance") {
        let res = conn.check_equivariance();
        out.push(plain(
            "cartan.equivariance",
            res.is_ok(),
            serde_json::json!({}),
            res.err().map(|e| e.to_string()).unwrap_or_default(),
        ));
    }
    if selected(cli, "curvature") {
        let flat = conn.flat_curvature();
        let nonzero: Vec<usize> = flat
            .iter()
            .enumerate()
            .filter(|(_, f)| !f.is_zero())
            .map(|(k, _)| k)
            .collect();
        let hooked: Vec<String> = (0..7)
            .map(|k| format!("{}", interior(&conn.d_components[k], lambda)))
            .collect();
        out.push(plain(
            "cartan.curvature",
            nonzero.is_empty(),
            serde_json::json!({
                "curvature": conn.curvature().iter().map(form_json).collect::<Vec<_>>(),
                "hooked": hooked,
            }),
            format!("flat curvature survives in components {:?}", nonzero),
        ));
    }
    Ok(out)
}

fn emit(cli: &Cli) -> Result<Vec<CheckReport>, ConfigError> {
    let mut out = Vec::new();
    let (sec, r) = match pipeline(cli.trace) {
        Ok(v) => v,
        Err(report) => return Ok(vec![report]),
    };
    let alg = sec.native_algebra();
    if cli.flat {
        let (flat_frame, flat_lambda) = r.flat();
        let rules = flat_rules(&alg, &flat_frame, &flat_lambda)
            .map_err(|e| ConfigError(format!("flat emission failed: {}", e)))?;
        let display = McEquations {
            coframe: G7_COFRAME.map(String::from).to_vec(),
            rules,
        };
        out.push(CheckReport::pass(
            "emit.flat",
            serde_json::json!({ "kind": "derived", "lines": display.display_lines() }),
        ));
        return Ok(out);
    }
    // the triangular display of the first-stage connection forms
    let mc_lines: Vec<String> = r
        .stage0
        .mc
        .labels
        .iter()
        .zip(&r.stage0.mc.basis)
        .map(|(l, f)| format!("{} = {}", l, latex_form(f)))
        .collect();
    out.push(CheckReport::pass(
        "emit.connection",
        serde_json::json!({ "kind": "derived", "lines": mc_lines }),
    ));
    let mut eq_lines: Vec<String> = r
        .d_frame
        .iter()
        .enumerate()
        .map(|(k, f)| format!("d{} = {}", FRAME_LABELS[k], latex_form(f)))
        .collect();
    eq_lines.push(format!("dλ = {}", latex_form(&r.d_lambda)));
    out.push(CheckReport::pass(
        "emit.equations",
        serde_json::json!({
            "kind": "derived",
            "lines": eq_lines,
            "forms": r.d_frame.iter().map(form_json).collect::<Vec<_>>(),
            "closing": form_json(&r.d_lambda),
        }),
    ));
    let inv_lines: Vec<String> = r
        .invariants
        .entries
        .iter()
        .map(|e| format!("{} = {}", e.name, latex_scalar(&e.value)))
        .collect();
    out.push(CheckReport::pass(
        "emit.invariants",
        serde_json::json!({ "kind": "derived", "lines": inv_lines }),
    ));
    Ok(out)
}
