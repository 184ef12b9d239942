//! The acceptance suite: one line per criterion, and a nonzero exit if any
//! failed. It runs without the libtest harness so the lines always show.
//!
//! Every check pairs the library with an independent route, usually the
//! brute-force evaluator in `common`.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};

use common::*;
use teamlog::analysis::{apply_substitution, equivalent, property_profile, team_transform, ClassicalSubstitution};
use teamlog::proofs::{
    check, derive_entailment, derive_normal_form, expand_macro, gpp_derivations, gpp_system, Derivation,
    EntailmentProof, GppAxiom, Params, ProofSystem, Reason, Rule, D,
};
use teamlog::semantics::{entailment_core, eval, satisfying_teams, strict_locality_witness, EvalMode};
use teamlog::synthesis::{synthesize, theta, theta_star, theta_star_star, SynthesisTarget};
use teamlog::syntax::variables;
use teamlog::teams::all_teams;
use teamlog::{with_big_stack, Domain, Formula, Fragment, Limits, Team};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);
type Corpus = (&'static str, fn(&[usize]) -> Lang, fn(Flags) -> bool);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn lim() -> Limits {
    Limits::default()
}

fn dom(v: &[usize]) -> Domain {
    Domain::new(v.iter().copied())
}

fn lax() -> EvalMode {
    EvalMode::Lax
}

/// The valve team: independence of p0 and p3 on X, not on its first three rows.
fn c1_valve_team() -> Outcome {
    let rows: Vec<Vec<u8>> = vec![
        vec![1, 1, 1, 1],
        vec![1, 0, 0, 0],
        vec![0, 1, 1, 1],
        vec![0, 0, 0, 0],
        vec![1, 1, 0, 0],
        vec![0, 1, 0, 1],
    ];
    let n = dom(&[0, 1, 2, 3]);
    let x = Team::from_bit_rows(n.clone(), &rows).map_err(|e| e.to_string())?;
    let y = Team::from_bit_rows(n, &rows[..3]).map_err(|e| e.to_string())?;
    let u = Universe::new(&[0, 1, 2, 3]);
    let f = parse("ind(p0;p3)");
    let (vx, vy) = (eval(&x, &f, lax()).unwrap(), eval(&y, &f, lax()).unwrap());
    let (ox, oy) = (u.atom(&u.team_of_rows(&rows), &f).unwrap(), u.atom(&u.team_of_rows(&rows[..3]), &f).unwrap());
    ensure!(vx && !vy, "eval gives X: {vx}, Y: {vy}");
    ensure!(ox && !oy, "oracle gives X: {ox}, Y: {oy}");
    let g = parse("ind(p1;p3)");
    ensure!(!eval(&x, &g, lax()).unwrap() && !u.atom(&u.team_of_rows(&rows), &g).unwrap(), "ind(p1;p3) holds on X");
    Ok("X ⊨ ind(p0;p3), Y ⊭ ind(p0;p3)".into())
}

/// ⟦Θ_x⟧, ⟦Θ*_x⟧ and ⟦Θ**_x⟧ for every team on up to three variables.
fn c2_theta() -> Outcome {
    let mut count = 0;
    for vars in [&[0][..], &[0, 1], &[0, 1, 2]] {
        let u = Universe::new(vars);
        let n = dom(vars);
        for x in &u.teams {
            let t = u.to_team(x);
            let sub = subteams(&u, x);
            let only: BTreeSet<OTeam> = [x.clone()].into();
            let with_empty: BTreeSet<OTeam> = [x.clone(), OTeam::new()].into();
            for (name, f, want) in [("Θ", theta(&t), &sub), ("Θ*", theta_star(&t), &only), ("Θ**", theta_star_star(&t), &with_empty)] {
                let got = u.of_family(&satisfying_teams(&f, &n, lax(), &lim()).unwrap());
                ensure!(&got == want, "⟦{name}⟧ of {t} is wrong");
                if vars.len() <= 2 {
                    ensure!(&u.models(&f, false) == want, "oracle disagrees on ⟦{name}⟧ of {t}");
                }
            }
            count += 1;
        }
    }
    Ok(format!("{count} teams on |n| ≤ 3"))
}

fn target_conditions(t: SynthesisTarget) -> (bool, bool, bool, bool) {
    // (flat, downward, union, empty)
    match t {
        SynthesisTarget::Cpl => (true, false, false, false),
        SynthesisTarget::PtPlus => (false, false, false, false),
        SynthesisTarget::Pt => (false, false, false, true),
        SynthesisTarget::Pu => (false, false, true, true),
        SynthesisTarget::PuPlus => (false, false, true, false),
        SynthesisTarget::Pd => (false, true, false, true),
        SynthesisTarget::PdPlus => (false, true, false, false),
    }
}

fn meets(fl: Flags, t: SynthesisTarget) -> bool {
    let (flat, down, union, empty) = target_conditions(t);
    (!flat || fl.flat) && (!down || fl.downward_closed) && (!union || fl.union_closed) && (!empty || fl.empty_team)
}

fn round_trip(u: &Universe, p: &BTreeSet<OTeam>, t: SynthesisTarget) -> Result<(), String> {
    let fam = family(u, p);
    let f = synthesize(&fam, t).map_err(|e| format!("{t}: {e}"))?;
    ensure!(t.fragment().admits(&f), "{t}: {f} is outside the fragment");
    let got = satisfying_teams(&f, fam.domain(), lax(), &lim()).unwrap();
    ensure!(got == fam, "{t}: ⟦{f}⟧ differs from the family");
    ensure!(&u.models(&f, false) == p, "{t}: oracle disagrees on ⟦{f}⟧");
    Ok(())
}

/// synthesize(p, t) defines p exactly, for every applicable target.
fn c3_expressive_completeness() -> Outcome {
    let u1 = Universe::new(&[0]);
    let mut exhaustive = 0;
    for mask in 0u32..16 {
        let p: BTreeSet<OTeam> = u1.teams.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, t)| t.clone()).collect();
        let fl = flags(&u1, &p);
        for t in SynthesisTarget::ALL {
            if meets(fl, t) {
                round_trip(&u1, &p, t)?;
                exhaustive += 1;
            } else {
                ensure!(synthesize(&family(&u1, &p), t).is_err(), "{t} accepted a family outside its class");
            }
        }
    }
    let u2 = Universe::new(&[0, 1]);
    let mut r = rng(3);
    for t in SynthesisTarget::ALL {
        let (flat, down, union, empty) = target_conditions(t);
        for _ in 0..1000 {
            let p = closed_family(&mut r, &u2, flat, down, union, empty);
            ensure!(meets(flags(&u2, &p), t), "generator produced a family outside {t}");
            round_trip(&u2, &p, t)?;
        }
    }
    Ok(format!("{exhaustive} exhaustive cases on |n|=1, 7×1000 random families on |n|=2"))
}

/// Closure properties implied by the language a formula is written in.
fn c4_closure() -> Outcome {
    let mut r = rng(4);
    let cases: [Corpus; 4] = [
        ("classical", Lang::classical, |f| f.flat && f.downward_closed && f.union_closed && f.empty_team),
        ("PU", Lang::pu, |f| f.union_closed && f.empty_team),
        ("PD+", Lang::pd_plus, |f| f.downward_closed),
        ("NE-free", Lang::ne_free, |f| f.empty_team),
    ];
    for (name, lang, want) in cases {
        for i in 0..500 {
            let vars: &[usize] = if i % 2 == 0 { &[0, 1] } else { &[0] };
            let u = Universe::new(vars);
            let f = random_formula(&mut r, &lang(vars), 4);
            let n = dom(vars);
            let p = property_profile(&f, &n, lax(), &lim()).unwrap();
            let lib = Flags { flat: p.flat, downward_closed: p.downward_closed, union_closed: p.union_closed, empty_team: p.empty_team };
            let oracle = flags(&u, &u.models(&f, false));
            ensure!(lib == oracle, "{name}: profile of {f} is {lib:?}, oracle says {oracle:?}");
            ensure!(want(lib), "{name}: {f} violates its closure property: {lib:?}");
        }
    }
    Ok("4 × 500 formulas, zero violations".into())
}

/// The definability identities for ▽, ⊛, ⊸ and ∼, exhaustively on two variables.
fn c5_identities() -> Outcome {
    let n = dom(&[0, 1]);
    let u = Universe::new(&[0, 1]);
    let mut r = rng(5);
    let mut any: Vec<Formula> = ["p0", "-p1", "NE", "BOT", "TOP", "p0 & NE", "p0 v p1", "=(p0, p1)", "p0 | (p1 & NE)", "M(p1)", "~p0"]
        .iter()
        .map(|s| parse(s))
        .collect();
    let full = Lang { top: true, ne: true, might: true, ..Lang::ne_free(&[0, 1]) };
    any.extend((0..15).map(|_| random_formula(&mut r, &full, 3)));
    let mut ne_free: Vec<Formula> = ["p0", "-p1", "BOT", "TOP", "p0 v p1", "=(p0, p1)", "p0 | -p1", "ind(p0 ; p1)", "inc(p0 ; p1)"]
        .iter()
        .map(|s| parse(s))
        .collect();
    ne_free.extend((0..15).map(|_| random_formula(&mut r, &Lang::ne_free(&[0, 1]), 3)));
    let equal = |a: &Formula, b: &Formula| -> Result<(), String> {
        ensure!(equivalent(a, b, &n, lax(), &lim()).unwrap().holds(), "{a} ≢ {b}");
        ensure!(u.models(a, false) == u.models(b, false), "oracle: {a} ≢ {b}");
        Ok(())
    };
    let (ne, top, bot) = (Formula::Ne, Formula::Top, Formula::Bot);
    let mut count = 0;
    for a in &any {
        equal(&Formula::might(a.clone()), &Formula::bor(bot.clone(), Formula::tensor(Formula::and(a.clone(), ne.clone()), top.clone())))?;
        for b in &any {
            let rhs = Formula::bor(
                bot.clone(),
                Formula::tensor(Formula::and(a.clone(), ne.clone()), Formula::and(b.clone(), ne.clone())),
            );
            equal(&Formula::ne_or(a.clone(), b.clone()), &rhs)?;
            let dm = Formula::bool_neg(Formula::and(Formula::bool_neg(a.clone()), Formula::bool_neg(b.clone())));
            equal(&Formula::bor(a.clone(), b.clone()), &dm)?;
            count += 3;
        }
    }
    for a in &ne_free {
        equal(&Formula::might(a.clone()), &Formula::ne_or(a.clone(), top.clone()))?;
        for b in &ne_free {
            let rhs = Formula::and(
                Formula::and(Formula::tensor(a.clone(), b.clone()), Formula::might(a.clone())),
                Formula::might(b.clone()),
            );
            equal(&Formula::ne_or(a.clone(), b.clone()), &rhs)?;
            count += 2;
        }
    }
    equal(&Formula::and(bot.clone(), ne.clone()), &Formula::lin_imp(top.clone(), bot.clone()))?;
    equal(&ne, &Formula::bool_neg(bot.clone()))?;
    // The variant with ⊗ between the two modalities is not an identity: the
    // one-row team {00} splits as ∅ ∪ X for ▽p0 ⊗ ▽¬p1.
    let printed = parse("(p0 | -p1) & (M(p0) | M(-p1))");
    let differs = equivalent(&parse("p0 % -p1"), &printed, &n, lax(), &lim()).unwrap();
    ensure!(!differs.holds(), "the ⊗ variant unexpectedly holds");
    Ok(format!("{} identity instances on all 16 teams", count + 2))
}

/// Classical substitution commutes with the team transform.
fn c6_substitution() -> Outcome {
    let mut r = rng(6);
    let n = dom(&[0, 1, 2]);
    let u = Universe::new(&[0, 1, 2]);
    let teams: Vec<Team> = all_teams(&n, &lim()).unwrap().collect();
    let lang = Lang { top: true, ne: true, might: true, ..Lang::ne_free(&[0, 1]) };
    for i in 0..300 {
        let phi = random_formula(&mut r, &lang, 3);
        let vs: Vec<usize> = variables(&phi).into_iter().collect();
        let images: Vec<(usize, Formula)> = vs.iter().map(|v| (*v, random_classical(&mut r, &[0, 1, 2], 3))).collect();
        let sigma = ClassicalSubstitution::new(images.clone()).unwrap();
        let x = &teams[(i * 37 + 11) % teams.len()];
        let v_dom = dom(&vs);
        let lhs = eval(x, &apply_substitution(&sigma, &phi), lax()).unwrap();
        let xs = team_transform(x, &sigma, &v_dom).unwrap();
        let rhs = eval(&xs, &phi, lax()).unwrap();
        ensure!(lhs == rhs, "σ = {images:?}, φ = {phi}, X = {x}: {lhs} vs {rhs}");
        // Oracle: X_σ built row by row, and σ(φ) evaluated by brute force.
        let uv = Universe::new(&vs);
        let ox: OTeam = u
            .of_team(x)
            .iter()
            .map(|row| images.iter().map(|(_, f)| u.classical(row, f)).collect())
            .collect();
        ensure!(uv.of_team(&xs) == ox, "team transform of {x} differs from the oracle");
        ensure!(uv.eval(&ox, &phi, false) == lhs, "oracle disagrees on {phi} over X_σ");
        ensure!(u.eval(&u.of_team(x), &apply_substitution(&sigma, &phi), false) == lhs, "oracle disagrees on σ(φ)");
    }
    Ok("300 random (σ, φ, X) triples, zero violations".into())
}

/// The uniform substitution, disjunction property and strict locality counterexamples.
fn c7_counterexamples() -> Outcome {
    let check = |gamma: &[&str], psi: &str, vars: &[usize], holds: bool, rows: Option<usize>| -> Result<(), String> {
        let g: Vec<Formula> = gamma.iter().map(|s| parse(s)).collect();
        let p = parse(psi);
        let e = entailment_core(&g, &p, &dom(vars), lax(), &lim()).unwrap();
        ensure!(e.holds() == holds, "{gamma:?} ⊨ {psi} should be {holds}");
        let u = Universe::new(vars);
        let o = u.entails(&g, &p);
        ensure!(o.is_none() == holds, "oracle disagrees on {gamma:?} ⊨ {psi}");
        if let (Some(t), Some(o)) = (e.counterexample(), o) {
            let ot = u.of_team(t);
            ensure!(g.iter().all(|f| u.eval(&ot, f, false)) && !u.eval(&ot, &p, false), "{t} is no counterexample");
            ensure!(t.len() == o.len(), "counterexample {t} is not minimal");
            if let Some(k) = rows {
                ensure!(t.len() == k, "counterexample {t} should have {k} rows");
            }
        }
        Ok(())
    };
    check(&["p0 | p0"], "p0", &[0], true, None)?;
    check(&["=(p1, p0) | =(p1, p0)"], "=(p1, p0)", &[0, 1], false, Some(2))?;
    check(&["(p0 v -p0) | (p0 v -p0)"], "p0 v -p0", &[0], false, Some(2))?;
    check(&[], "BOT v NE", &[0], true, None)?;
    check(&[], "BOT", &[0], false, Some(1))?;
    check(&[], "NE", &[0], false, Some(0))?;
    let w = strict_locality_witness().unwrap().ok_or("no strict locality witness")?;
    let v = dom(&variables(&w.formula).into_iter().collect::<Vec<_>>());
    ensure!(w.x.restrict(&v).unwrap() == w.y.restrict(&v).unwrap(), "witness teams differ on the formula's variables");
    let u = Universe::new(w.x.domain().indices());
    let (sx, sy) = (u.eval(&u.of_team(&w.x), &w.formula, true), u.eval(&u.of_team(&w.y), &w.formula, true));
    ensure!(sx == w.strict_x && sy == w.strict_y && sx != sy, "oracle strict values {sx}, {sy}");
    Ok(format!("all verdicts reproduce; strict witness {} vs {} on {}", w.x, w.y, w.formula))
}

/// Accepted in `sys`, with the expected conclusion and open assumptions, and
/// semantically valid by the oracle.
fn sound(d: &D, sys: &ProofSystem, premise: &Formula, conclusion: &Formula, vars: &[usize]) -> Result<(), String> {
    let rep = check(d, sys);
    let c = rep.result.map_err(|e| format!("{premise} ⊢ {conclusion}: {e}"))?;
    ensure!(&c.conclusion == conclusion, "concludes {} instead of {conclusion}", c.conclusion);
    ensure!(c.assumptions().iter().all(|a| a == premise), "stray open assumptions {:?}", c.assumptions());
    let u = Universe::new(vars);
    ensure!(u.entails(&c.assumptions(), &c.conclusion).is_none(), "unsound: {premise} ⊭ {conclusion}");
    Ok(())
}

const MACROS: [(Rule, &str, &str); 12] = [
    (Rule::ExFalsoMinus, "BOT", "{N}"),
    (Rule::DstrTensorAnd, "{F} | ({G} & {H})", "({F} | {G}) & ({F} | {H})"),
    (Rule::DstrBorTensor, "{F} v ({G} | {H})", "({F} v {G}) | ({F} v {H})"),
    (Rule::DstrTensorBorTensor, "({F} | {G}) v ({F} | {H})", "{F} | ({G} v {H})"),
    (Rule::DstrStarAndTensorAnd, "({A} & {G}) | ({A} & {H})", "{A} & ({G} | {H})"),
    (Rule::DstrStarAndTensor, "{A} & ({G} | {H})", "({A} & {G}) | ({A} & {H})"),
    (Rule::ZeroE, "(BOT & NE) v {F}", "{F}"),
    (Rule::DstrAndBor, "{F} & ({G} v {H})", "({F} & {G}) v ({F} & {H})"),
    (Rule::AndCom, "{F} & {G}", "{G} & {F}"),
    (Rule::BorCom, "{F} v {G}", "{G} v {F}"),
    (Rule::AndAss, "{F} & ({G} & {H})", "({F} & {G}) & {H}"),
    (Rule::BorAss, "{F} v ({G} v {H})", "({F} v {G}) v {H}"),
];

fn instantiate(schema: &str, fill: &[(&str, &Formula)]) -> Formula {
    let mut s = schema.to_string();
    for (k, f) in fill {
        s = s.replace(&format!("{{{k}}}"), &format!("({f})"));
    }
    parse(&s)
}

/// Every generated derivation checks and concludes something valid.
fn c8_soundness() -> Outcome {
    let mut r = rng(8);
    let vars = [0, 1];
    let n = dom(&vars);
    let mut macros = 0;
    for (rule, p, c) in MACROS {
        for sys in [ProofSystem::PtPlus, ProofSystem::CplPlus] {
            if !sys.has_macro(rule) {
                continue;
            }
            let lang = if sys == ProofSystem::PtPlus { Lang::pt_plus(&vars) } else { Lang { ne: true, ..Lang::classical(&vars) } };
            for _ in 0..15 {
                let fs: Vec<Formula> = (0..3).map(|_| random_formula(&mut r, &lang, 2)).collect();
                let a = random_formula(&mut r, &Lang::classical(&vars), 2);
                let nf = random_formula(&mut r, &Lang { ne: false, ..lang.clone() }, 2);
                let fill = [("F", &fs[0]), ("G", &fs[1]), ("H", &fs[2]), ("A", &a), ("N", &nf)];
                let (prem, concl) = (instantiate(p, &fill), instantiate(c, &fill));
                let d = expand_macro(rule, vec![Derivation::assume("a", prem.clone())], &concl, &sys)
                    .map_err(|e| format!("{rule}: {e}"))?;
                ensure!(d.rules().iter().all(|x| *x == Rule::Assume || sys.is_primitive(*x)), "{rule} expands to a macro");
                sound(&d, &sys, &prem, &concl, &vars)?;
                macros += 1;
            }
        }
    }
    let mut nfs = 0;
    let lang = Lang::pt_plus(&vars);
    for i in 0..100 {
        let vs: &[usize] = if i % 3 == 0 { &[0] } else { &vars };
        let f = random_formula(&mut r, &Lang::pt_plus(vs), 3);
        let p = derive_normal_form(&f, &dom(vs), &lim()).map_err(|e| format!("normal form of {f}: {e}"))?;
        ensure!(Fragment::PtPlus.admits(&p.normal_form), "normal form {} is outside PT+", p.normal_form);
        sound(&p.to_normal_form, &ProofSystem::PtPlus, &f, &p.normal_form, vs)?;
        sound(&p.from_normal_form, &ProofSystem::PtPlus, &p.normal_form, &f, vs)?;
        nfs += 1;
    }
    let u = Universe::new(&vars);
    let mut pairs = 0;
    while pairs < 200 {
        let f = random_formula(&mut r, &lang, 3);
        let g = random_formula(&mut r, &lang, 3);
        if u.entails(std::slice::from_ref(&f), &g).is_some() {
            continue;
        }
        match derive_entailment(&f, &g, &n, &lim()).map_err(|e| e.to_string())? {
            EntailmentProof::Proof(d) => sound(&d, &ProofSystem::PtPlus, &f, &g, &vars)?,
            EntailmentProof::Counterexample(t) => return Err(format!("{f} ⊨ {g} but got counterexample {t}")),
        }
        pairs += 1;
    }
    let mut gpp = 0;
    for (ax, d) in gpp_derivations(&lim()).map_err(|e| e.to_string())? {
        let (p, c, dn) = ax.instance();
        sound(&d, &gpp_system(), &p, &c, dn.indices())?;
        gpp += 1;
    }
    Ok(format!("{macros} macro expansions, {nfs} normal form pairs, {pairs} entailments, {gpp} axiom derivations"))
}

const ENTAILING: [(&str, &str); 50] = [
    ("p0 | p0", "p0"),
    ("p0", "p0 | p0"),
    ("p0 & p1", "p0"),
    ("p0 & p1", "p1 & p0"),
    ("p0", "p0 v p1"),
    ("p0 v p1", "p1 v p0"),
    ("BOT", "p0"),
    ("BOT & NE", "BOT"),
    ("BOT & NE", "NE"),
    ("p0 & NE", "NE"),
    ("NE & p0", "p0"),
    ("p0", "p0 | BOT"),
    ("p0 | BOT", "p0"),
    ("p0 | -p0", "-p0 | p0"),
    ("(p0 | p1) | -p1", "p0 | (p1 | -p1)"),
    ("p0 & (p1 v -p1)", "(p0 & p1) v (p0 & -p1)"),
    ("(p0 & p1) v (p0 & -p1)", "p0 & (p1 v -p1)"),
    ("p0 | (p1 v -p1)", "(p0 | p1) v (p0 | -p1)"),
    ("(p0 | p1) v (p0 | -p1)", "p0 | (p1 v -p1)"),
    ("-p0", "-p0 | -p0"),
    ("NE", "NE | NE"),
    ("NE | NE", "NE"),
    ("(p0 & NE) | (-p0 & NE)", "NE"),
    ("(p0 & NE) | (-p0 & NE)", "p0 | -p0"),
    ("p0 & -p0", "BOT"),
    ("BOT", "p0 & -p0"),
    ("p0 v BOT", "p0"),
    ("p0", "p0 v NE"),
    ("p0 & p1", "p0 | p1"),
    ("p0 | p1", "(p0 | p1) | BOT"),
    ("(p0 v p1) & NE", "(p0 & NE) v (p1 & NE)"),
    ("p0 & (NE | p1)", "(p0 & NE) | (p0 & p1)"),
    ("(p0 & NE) | (p0 & p1)", "p0 & (NE | p1)"),
    ("p0 | (p1 & NE)", "(p0 | p1) & (p0 | NE)"),
    ("-p1 & (p0 v NE)", "(-p1 & p0) v (-p1 & NE)"),
    ("p0 v (p1 | NE)", "(p0 v p1) | (p0 v NE)"),
    ("p0 & p0", "p0"),
    ("p0", "p0 & p0"),
    ("(p0 v p1) v -p0", "p0 v (p1 v -p0)"),
    ("p1", "p1 | -p0"),
    ("NE", "p0 v NE"),
    ("(p0 | p1) & (-p0 | p1)", "p1"),
    ("p0 | -p0", "p1 | -p1"),
    ("BOT v NE", "NE v BOT"),
    ("(p0 & NE) | (p1 & NE)", "NE"),
    ("(p0 & NE) | (p1 & NE)", "p0 | p1"),
    ("p0 & -p1 & NE", "p0 & NE"),
    ("p0", "(p0 & p1) | (p0 & -p1)"),
    ("(p0 & NE) v (-p0 & NE)", "NE"),
    ("(-p0 | p1) & p0", "p1"),
];

const NON_ENTAILING: [(&str, &str); 50] = [
    ("NE", "BOT"),
    ("p0", "NE"),
    ("p0 v p1", "p0"),
    ("p0 | -p0", "p0 v -p0"),
    ("p0", "p1"),
    ("p0 | p1", "p0 v p1"),
    ("NE", "p0"),
    ("p0 v NE", "p0"),
    ("BOT v NE", "BOT"),
    ("BOT v NE", "NE"),
    ("(p0 & NE) | (-p0 & NE)", "p0"),
    ("p0", "p0 & NE"),
    ("p0 | p1", "p0"),
    ("p0 | p1", "p1"),
    ("-p0", "p0"),
    ("p0", "-p0"),
    ("NE | NE", "BOT"),
    ("p0 | -p1", "p0 & -p1"),
    ("p0", "p0 & p1"),
    ("NE", "NE & p0"),
    ("(p0 & NE) v (p1 & NE)", "p0 & NE"),
    ("p0 v -p0", "NE"),
    ("p1", "p0 v -p0"),
    ("p0 | -p0", "BOT"),
    ("(p0 | p1) & NE", "p0 & NE"),
    ("p0 & NE", "p0 & p1 & NE"),
    ("-p0 & -p1", "p0 v p1"),
    ("p0 | (p1 & NE)", "p1 & NE"),
    ("NE", "(p0 & NE) | (-p0 & NE)"),
    ("p0 | -p0", "p0 | p1"),
    ("-p1", "-p1 & NE"),
    ("p0 & (p1 v -p1)", "p0 & p1"),
    ("(p0 & p1) v (-p0 & -p1)", "p0"),
    ("(p0 & p1) | (-p0 & -p1)", "(p0 & p1) v (-p0 & -p1)"),
    ("BOT v (p0 & NE)", "p0 & NE"),
    ("p0 | NE", "p0"),
    ("p0 | NE", "NE & p0"),
    ("NE", "NE & -p0"),
    ("-p0 | -p1", "-p0 v -p1"),
    ("(p0 v -p0) & NE", "p0 & NE"),
    ("p1 & NE", "p0 & NE"),
    ("(p0 & NE) | (p1 & NE)", "p0 v p1"),
    ("BOT v p0", "NE"),
    ("p0 v p1", "p0 & p1"),
    ("(p0 | -p0) & NE", "(p0 & NE) | (-p0 & NE)"),
    ("NE | p0", "-p0"),
    ("-p0 v p1", "-p0"),
    ("p0 & p1", "-p1 v -p0"),
    ("(p0 | p1) & (p0 v p1)", "p0"),
    ("p1 v NE", "p1 & NE"),
];

fn pair_vars(f: &Formula, g: &Formula) -> Vec<usize> {
    let vs: BTreeSet<usize> = variables(f).union(&variables(g)).copied().collect();
    if vs.len() <= 1 && !vs.contains(&1) {
        vec![0]
    } else {
        vec![0, 1]
    }
}

/// The golden pairs: proofs for the valid ones, confirmed counterexamples for the rest.
fn c9_golden() -> Outcome {
    let distinct: BTreeSet<_> = ENTAILING.iter().chain(NON_ENTAILING.iter()).collect();
    ensure!(distinct.len() == 100, "golden pairs repeat");
    for (holds, pairs) in [(true, &ENTAILING), (false, &NON_ENTAILING)] {
        for (a, b) in pairs.iter() {
            let (f, g) = (parse(a), parse(b));
            let vars = pair_vars(&f, &g);
            let u = Universe::new(&vars);
            ensure!(u.entails(std::slice::from_ref(&f), &g).is_none() == holds, "golden pair {a} / {b} is misfiled");
            match derive_entailment(&f, &g, &dom(&vars), &lim()).map_err(|e| format!("{a} / {b}: {e}"))? {
                EntailmentProof::Proof(d) => {
                    ensure!(holds, "proof returned for {a} ⊭ {b}");
                    sound(&d, &ProofSystem::PtPlus, &f, &g, &vars)?;
                }
                EntailmentProof::Counterexample(t) => {
                    ensure!(!holds, "counterexample {t} returned for {a} ⊨ {b}");
                    let ot = u.of_team(&t);
                    ensure!(u.eval(&ot, &f, false) && !u.eval(&ot, &g, false), "{t} does not separate {a} from {b}");
                }
            }
        }
    }
    Ok("50 derivations accepted, 50 counterexamples confirmed".into())
}

fn leaf(label: &str, f: &str) -> D {
    Derivation::assume(label, parse(f))
}

fn node(rule: Rule, concl: &str, premises: Vec<D>, discharge: &[&str]) -> D {
    Derivation::node(rule, parse(concl), premises, discharge.iter().map(|s| s.to_string()).collect(), Params::default())
}

fn rejected_at(d: &D, path: &[usize], reason: Reason) -> Result<(), String> {
    match check(d, &ProofSystem::PtPlus).result {
        Ok(c) => Err(format!("accepted {}", c.conclusion)),
        Err(r) => {
            ensure!(r.path == path && r.reason == reason, "rejected with {r}, expected {reason:?} at {path:?}");
            Ok(())
        }
    }
}

/// The side-condition abuses of the ⊗ rules are rejected where they occur.
fn c10_rejections() -> Outcome {
    let em = node(Rule::Em0, "p0 | -p0", vec![], &[]);
    // ⊗I⁻ adding a component with NE.
    let d = node(Rule::TensorIMinus, "BOT | NE", vec![leaf("a", "BOT")], &[]);
    rejected_at(&d, &[], Reason::ContainsNe)?;
    // ⊗E⁻ concluding a non-classical formula, nested under ∧I to check the path.
    let case_l = node(Rule::BorIL, "p0 v -p0", vec![leaf("h1", "p0")], &[]);
    let case_r = node(Rule::BorIR, "p0 v -p0", vec![leaf("h2", "-p0")], &[]);
    let d = node(Rule::TensorEMinus, "p0 v -p0", vec![em.clone(), case_l, case_r], &["h1", "h2"]);
    let d = node(Rule::AndI, "(p0 v -p0) & (p0 | -p0)", vec![d, em.clone()], &[]);
    rejected_at(&d, &[0], Reason::NonClassicalConclusion)?;
    // ⊗E⁻ whose cases use a non-classical open assumption.
    let extra = leaf("x", "(NE & p0) | (NE & -p0)");
    let case_l = node(
        Rule::AndEL,
        "p0 | -p0",
        vec![node(Rule::AndI, "(p0 | -p0) & ((NE & p0) | (NE & -p0))", vec![node(Rule::TensorIMinus, "p0 | -p0", vec![leaf("h1", "p0")], &[]), extra], &[])],
        &[],
    );
    let case_r = node(Rule::ComTensor, "p0 | -p0", vec![node(Rule::TensorIMinus, "-p0 | p0", vec![leaf("h2", "-p0")], &[])], &[]);
    let d = node(Rule::TensorEMinus, "p0 | -p0", vec![em.clone(), case_l.clone(), case_r.clone()], &["h1", "h2"]);
    rejected_at(&d, &[], Reason::NonClassicalAssumption)?;
    // The same cases without the extra assumption are fine.
    let plain_l = node(Rule::TensorIMinus, "p0 | -p0", vec![leaf("h1", "p0")], &[]);
    let ok = node(Rule::TensorEMinus, "p0 | -p0", vec![em, plain_l, case_r], &["h1", "h2"]);
    ensure!(check(&ok, &ProofSystem::PtPlus).accepted(), "control derivation rejected");
    // Sub⁻ whose body uses the open assumption NE.
    let t = node(Rule::TensorIMinus, "NE | BOT", vec![leaf("a", "NE")], &[]);
    let body = node(Rule::AndI, "NE & BOT", vec![leaf("a", "NE"), leaf("h", "BOT")], &[]);
    let d = node(Rule::TensorSubMinus, "NE | (NE & BOT)", vec![t.clone(), body], &["h"]);
    rejected_at(&d, &[], Reason::NonClassicalAssumption)?;
    let body = node(Rule::AndI, "BOT & BOT", vec![leaf("h", "BOT"), leaf("h", "BOT")], &[]);
    let ok = node(Rule::TensorSubMinus, "NE | (BOT & BOT)", vec![t, body], &["h"]);
    ensure!(check(&ok, &ProofSystem::PtPlus).accepted(), "control substitution rejected");
    // The sequents the misuses would establish are not valid.
    let u = Universe::new(&[0]);
    for (gamma, psi) in [(&["(NE & p0) | (NE & -p0)", "p0 | -p0"][..], "BOT"), (&["NE"][..], "NE | (NE & BOT)")] {
        let g: Vec<Formula> = gamma.iter().map(|s| parse(s)).collect();
        let p = parse(psi);
        ensure!(!entailment_core(&g, &p, &dom(&[0]), lax(), &lim()).unwrap().holds(), "{gamma:?} ⊨ {psi}");
        ensure!(u.entails(&g, &p).is_some(), "oracle: {gamma:?} ⊨ {psi}");
    }
    Ok("ContainsNe, NonClassicalConclusion and NonClassicalAssumption (⊗E⁻, Sub⁻) at the offending node".into())
}

/// The independence axioms: valid for all single-variable blocks on four
/// variables, and their generated derivations check.
fn c11_gpp() -> Outcome {
    let n = dom(&[0, 1, 2, 3]);
    let u3 = Universe::new(&[0, 1, 2]);
    let mut count = 0;
    let mut oracle = 0;
    let ind = |xs: &[usize], ys: &[usize]| Formula::Indep(xs.to_vec(), ys.to_vec());
    for x in 0..4 {
        for y in 0..4 {
            for z in 0..4 {
                let mut cases = vec![
                    (vec![ind(&[x, z], &[y])], ind(&[x], &[y])),
                    (vec![ind(&[x, y], &[z])], ind(&[y, x], &[z])),
                    (vec![ind(&[x], &[y]), ind(&[x, y], &[z])], ind(&[x], &[y, z])),
                ];
                if z == 0 {
                    cases.push((vec![ind(&[x], &[y])], ind(&[y], &[x])));
                }
                for (gamma, psi) in cases {
                    ensure!(entailment_core(&gamma, &psi, &n, lax(), &lim()).unwrap().holds(), "{gamma:?} ⊭ {psi}");
                    count += 1;
                    if x < 3 && y < 3 && z < 3 {
                        ensure!(u3.entails(&gamma, &psi).is_none(), "oracle: {gamma:?} ⊭ {psi}");
                        oracle += 1;
                    }
                }
            }
        }
    }
    let sys = gpp_system();
    let ds = gpp_derivations(&lim()).map_err(|e| e.to_string())?;
    ensure!(ds.len() == 4, "expected four derivations");
    for (ax, d) in ds {
        let (p, c, _) = ax.instance();
        let rep = check(&d, &sys);
        let got = rep.result.map_err(|e| format!("{ax}: {e}"))?;
        ensure!(got.conclusion == c && got.assumptions() == vec![p], "{ax} derives the wrong sequent");
    }
    ensure!(GppAxiom::ALL.len() == 4, "axiom list changed");
    Ok(format!("{count} instances valid on |n| = 4 ({oracle} also by oracle), four derivations accepted in {}", sys.name()))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("1 valve team", c1_valve_team),
        ("2 Θ formulas", c2_theta),
        ("3 expressive completeness", c3_expressive_completeness),
        ("4 closure properties", c4_closure),
        ("5 definability identities", c5_identities),
        ("6 substitution", c6_substitution),
        ("7 counterexample regressions", c7_counterexamples),
        ("8 proof soundness", c8_soundness),
        ("9 golden entailments", c9_golden),
        ("10 checker rejections", c10_rejections),
        ("11 independence axioms", c11_gpp),
    ];
    let mut failed = Vec::new();
    for (name, run) in criteria {
        let start = std::time::Instant::now();
        let outcome = with_big_stack(|| catch_unwind(AssertUnwindSafe(run)))
            .unwrap_or_else(|e| Err(format!("panicked: {}", panic_text(&e))));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {name}: PASS ({detail}; {secs:.1}s)"),
            Err(why) => {
                println!("criterion {name}: FAIL ({why}; {secs:.1}s)");
                failed.push(name);
            }
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", criteria.len());
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}

fn panic_text(e: &Box<dyn std::any::Any + Send>) -> String {
    e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default()
}
