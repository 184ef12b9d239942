//! `teamlog` subcommands. Every command prints one JSON document on stdout
//! (or a short human rendering with `--pretty`) and reports its verdict in
//! the exit status: 0 true or success, 1 false, 2 usage or input error,
//! 3 guard exceeded.

use std::collections::BTreeSet;
use std::io::{Read, Write};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::{json, Value};

use crate::analysis::{apply_substitution, equivalent, property_profile, ClassicalSubstitution, Equivalence, Property};
use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::proofs::{
    self, check, check_with, derive_entailment, derive_normal_form, expand_macro, gpp_derivation, gpp_system,
    parse_derivation, CheckOptions, EntailmentProof, GppAxiom, ProofSystem, Reason, Rule, D,
};
use crate::semantics::{entailment_core, eval, satisfying_teams, strict_locality_witness, Entailment, EvalMode};
use crate::synthesis::{
    certify, cond_indep_to_uncond, dep_to_cond_indep, indep_to_pt, normal_form, synthesize, SynthesisTarget,
};
use crate::syntax::{classify, parse, variables, Formula, Fragment};
use crate::teams::{team_masks, valve_lamp_team, Domain, FamilyJson, Team, TeamFamily, TeamJson};

pub const EXIT_TRUE: i32 = 0;
pub const EXIT_FALSE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_GUARD: i32 = 3;

#[derive(Debug, Args, Clone)]
struct Common {
    /// Human-readable output instead of JSON.
    #[arg(long, global = true)]
    pretty: bool,
    /// Largest domain enumerated or used for derivations (overrides TEAMLOG_MAX_VARS).
    #[arg(long, global = true, value_name = "N")]
    max_vars: Option<usize>,
}

#[derive(Debug, Args, Clone)]
struct Mode {
    /// Use the strict reading of the tensor (disjoint splits).
    #[arg(long)]
    strict: bool,
}

impl Mode {
    fn get(&self) -> EvalMode {
        if self.strict {
            EvalMode::Strict
        } else {
            EvalMode::Lax
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decide whether a team satisfies a formula.
    Eval {
        /// Team JSON: a file path, `-` for stdin, or inline JSON.
        #[arg(long)]
        team: String,
        #[arg(long, allow_hyphen_values = true)]
        formula: String,
        #[command(flatten)]
        mode: Mode,
    },
    /// List every team on the domain satisfying a formula.
    Models {
        /// Variable indices, e.g. `0,1,3`; defaults to the formula's variables.
        #[arg(long)]
        domain: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        formula: String,
        /// Worker threads for the sweep; the merged output does not depend on it.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[command(flatten)]
        mode: Mode,
    },
    /// Decide `lhs... ⊨ rhs` on a domain, with a counterexample team if it fails.
    Entails {
        #[arg(long)]
        domain: Option<String>,
        /// Premise; repeat for several, omit for validity.
        #[arg(long, allow_hyphen_values = true)]
        lhs: Vec<String>,
        #[arg(long, allow_hyphen_values = true)]
        rhs: String,
        /// Substitution JSON `{"2":"p0 & p1"}`; also decides the substituted entailment.
        #[arg(long)]
        subst: Option<String>,
        #[command(flatten)]
        mode: Mode,
    },
    /// Decide equivalence of two formulas on a domain.
    Equiv {
        #[arg(long)]
        domain: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        lhs: String,
        #[arg(long, allow_hyphen_values = true)]
        rhs: String,
        #[command(flatten)]
        mode: Mode,
    },
    /// Flatness, downward closure, union closure and the empty team property.
    Props {
        #[arg(long)]
        domain: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        formula: String,
        #[command(flatten)]
        mode: Mode,
    },
    /// The fragments whose language contains the formula.
    Classify {
        #[arg(long, allow_hyphen_values = true)]
        formula: String,
    },
    /// Build a defining formula for a team family.
    Synth {
        /// TeamFamily JSON: a file path, `-` for stdin, or inline JSON.
        #[arg(long)]
        family: String,
        /// One of CPL, PTplus, PT, PU, PUplus, PD, PDplus.
        #[arg(long, default_value = "PTplus")]
        target: String,
    },
    /// The normal form of a formula in a fragment.
    Nf {
        #[arg(long)]
        domain: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        formula: String,
        #[arg(long, default_value = "PTplus")]
        fragment: String,
    },
    /// Replace dependence, conditional and plain independence atoms by their definitions.
    Translate {
        #[arg(long, allow_hyphen_values = true)]
        formula: String,
        /// Apply a single translation step to each atom.
        #[arg(long)]
        one_step: bool,
    },
    /// Emit a checked derivation as JSON.
    Prove {
        #[arg(long)]
        domain: Option<String>,
        /// Premise of an entailment proof (with --rhs).
        #[arg(long, allow_hyphen_values = true, requires = "rhs")]
        lhs: Option<String>,
        #[arg(long, allow_hyphen_values = true, requires = "lhs")]
        rhs: Option<String>,
        /// Derive the normal form of this formula (or, with --backward, the formula from it).
        #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["lhs", "gpp", "rule"])]
        normal_form: Option<String>,
        #[arg(long, requires = "normal_form")]
        backward: bool,
        /// One of symmetry, weakening, permutation, mixing.
        #[arg(long, conflicts_with_all = ["lhs", "rule"])]
        gpp: Option<String>,
        /// Expand one derived rule applied to --premise, concluding --conclusion.
        #[arg(long, requires_all = ["premise", "conclusion"], conflicts_with = "lhs")]
        rule: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        premise: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        conclusion: Option<String>,
        #[arg(long, default_value = "PTplus")]
        system: String,
    },
    /// Check a derivation and report the verdict.
    Check {
        /// Derivation JSON: a file path, `-` for stdin, or inline JSON.
        #[arg(long)]
        proof: String,
        /// PTplus, CPLplus, or CPLplus+ind,inc,dep,cind.
        #[arg(long, default_value = "PTplus")]
        system: String,
        /// Include the status of every node.
        #[arg(long)]
        nodes: bool,
        /// Read side conditions on classical formulas as flatness.
        #[arg(long)]
        flat_classical: bool,
    },
    /// Replay the reference examples and report one line per check.
    Selftest {
        /// Seed for the randomized synthesis round trips.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Parser)]
#[command(name = "teamlog", version, about = "Propositional team logics: evaluation, synthesis and derivations")]
struct Top {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

/// Result of one command: the JSON document, its human rendering and the exit status.
struct Outcome {
    json: Value,
    text: String,
    code: i32,
}

impl Outcome {
    fn verdict(json: Value, text: impl Into<String>, ok: bool) -> Outcome {
        Outcome { json, text: text.into(), code: if ok { EXIT_TRUE } else { EXIT_FALSE } }
    }
}

/// Parses `argv` (program name first), runs the command and writes its output.
pub fn run_with(argv: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let top = match Top::try_parse_from(argv) {
        Ok(t) => t,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_TRUE };
            let rendered = e.render().to_string();
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = target.write_all(rendered.as_bytes());
            return code;
        }
    };
    let mut limits = Limits::default().from_env();
    if let Some(n) = top.common.max_vars {
        limits = limits.with_max_vars(n);
    }
    let pretty = top.common.pretty;
    let command = top.command;
    match crate::with_big_stack(move || dispatch(command, &limits)) {
        Ok(o) => {
            let body = if pretty { o.text } else { serde_json::to_string(&o.json).expect("JSON values serialize") };
            let _ = writeln!(out, "{body}");
            o.code
        }
        Err(e) => {
            let code = match e {
                Error::Guard(_) => EXIT_GUARD,
                _ => EXIT_USAGE,
            };
            let _ = writeln!(err, "error: {e}");
            code
        }
    }
}

/// Entry point for the binary.
pub fn run(argv: &[String]) -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

fn dispatch(command: Command, limits: &Limits) -> Result<Outcome> {
    match command {
        Command::Eval { team, formula, mode } => cmd_eval(&team, &formula, mode.get()),
        Command::Models { domain, formula, jobs, mode } => cmd_models(domain.as_deref(), &formula, jobs, mode.get(), limits),
        Command::Entails { domain, lhs, rhs, subst, mode } => {
            cmd_entails(domain.as_deref(), &lhs, &rhs, subst.as_deref(), mode.get(), limits)
        }
        Command::Equiv { domain, lhs, rhs, mode } => cmd_equiv(domain.as_deref(), &lhs, &rhs, mode.get(), limits),
        Command::Props { domain, formula, mode } => cmd_props(domain.as_deref(), &formula, mode.get(), limits),
        Command::Classify { formula } => cmd_classify(&formula),
        Command::Synth { family, target } => cmd_synth(&family, &target, limits),
        Command::Nf { domain, formula, fragment } => cmd_nf(domain.as_deref(), &formula, &fragment, limits),
        Command::Translate { formula, one_step } => cmd_translate(&formula, one_step, limits),
        Command::Prove { domain, lhs, rhs, normal_form, backward, gpp, rule, premise, conclusion, system } => {
            let req = if let (Some(l), Some(r)) = (lhs, rhs) {
                ProveRequest::Entailment(l, r)
            } else if let Some(f) = normal_form {
                ProveRequest::NormalForm(f, backward)
            } else if let Some(a) = gpp {
                ProveRequest::Gpp(a)
            } else if let (Some(r), Some(p), Some(c)) = (rule, premise, conclusion) {
                ProveRequest::Macro(r, p, c)
            } else {
                return Err(Error::input("prove needs --lhs/--rhs, --normal-form, --gpp or --rule"));
            };
            cmd_prove(req, domain.as_deref(), &system, limits)
        }
        Command::Check { proof, system, nodes, flat_classical } => cmd_check(&proof, &system, nodes, flat_classical, limits),
        Command::Selftest { seed } => cmd_selftest(seed, limits),
    }
}

/// Reads an argument that is inline JSON, `-` for stdin, or a file path.
fn read_input(arg: &str) -> Result<String> {
    let t = arg.trim_start();
    if t.starts_with('{') || t.starts_with('[') {
        return Ok(arg.to_string());
    }
    if arg == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| Error::input(format!("stdin: {e}")))?;
        return Ok(s);
    }
    std::fs::read_to_string(arg).map_err(|e| Error::input(format!("{arg}: {e}")))
}

/// `0,1,3`, `0 1 3` or `p0,p1`; the empty string is the empty domain.
pub fn parse_domain(s: &str) -> Result<Domain> {
    let mut v = Vec::new();
    for tok in s.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
        let digits = tok.strip_prefix('p').unwrap_or(tok);
        v.push(digits.parse::<usize>().map_err(|_| Error::input(format!("bad domain entry `{tok}`")))?);
    }
    Ok(Domain::new(v))
}

/// The given domain, or the variables of `fs`; an explicit domain must cover them.
fn domain_for(arg: Option<&str>, fs: &[&Formula]) -> Result<Domain> {
    let vars: BTreeSet<usize> = fs.iter().flat_map(|f| variables(f)).collect();
    match arg {
        None => Ok(Domain::new(vars)),
        Some(s) => {
            let d = parse_domain(s)?;
            if let Some(v) = vars.iter().find(|v| !d.contains(**v)) {
                return Err(Error::Domain(format!("p{v} occurs in the input but is not in the domain {d}")));
            }
            Ok(d)
        }
    }
}

fn team_json(t: &Team) -> Value {
    serde_json::to_value(t.to_json()).expect("teams serialize")
}

fn family_json(p: &TeamFamily) -> Value {
    serde_json::to_value(p.to_json()).expect("families serialize")
}

fn family_text(p: &TeamFamily) -> String {
    let mut s = format!("{} team(s) on {}", p.len(), p.domain());
    for t in p.teams() {
        s.push_str(&format!("\n  {t}"));
    }
    s
}

fn cmd_eval(team: &str, formula: &str, mode: EvalMode) -> Result<Outcome> {
    let tj: TeamJson =
        serde_json::from_str(&read_input(team)?).map_err(|e| Error::input(format!("team JSON: {e}")))?;
    let x = Team::from_json(&tj)?;
    let f = parse(formula)?;
    let v = eval(&x, &f, mode)?;
    let json = json!({"formula": f.to_string(), "mode": mode.to_string(), "team": team_json(&x), "verdict": v});
    Ok(Outcome::verdict(json, v.to_string(), v))
}

fn cmd_models(domain: Option<&str>, formula: &str, jobs: usize, mode: EvalMode, limits: &Limits) -> Result<Outcome> {
    let f = parse(formula)?;
    let n = domain_for(domain, &[&f])?;
    let p = if jobs <= 1 { satisfying_teams(&f, &n, mode, limits)? } else { models_parallel(&f, &n, mode, jobs, limits)? };
    Ok(Outcome { json: family_json(&p), text: family_text(&p), code: EXIT_TRUE })
}

/// Splits the canonical team order into contiguous chunks, one per worker, and
/// concatenates the results in chunk order.
fn models_parallel(f: &Formula, n: &Domain, mode: EvalMode, jobs: usize, limits: &Limits) -> Result<TeamFamily> {
    limits.check_eval(n.len())?;
    let masks: Vec<u64> = team_masks(1 << n.len()).collect();
    let chunk = masks.len().div_ceil(jobs).max(1);
    let parts: Vec<Result<Vec<Team>>> = std::thread::scope(|s| {
        let handles: Vec<_> = masks
            .chunks(chunk)
            .map(|ms| {
                s.spawn(move || {
                    let mut keep = Vec::new();
                    for &m in ms {
                        let t = Team::from_mask(n.clone(), m);
                        if eval(&t, f, mode)? {
                            keep.push(t);
                        }
                    }
                    Ok(keep)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut teams = Vec::new();
    for p in parts {
        teams.extend(p?);
    }
    TeamFamily::new(n.clone(), teams)
}

fn entailment_json(e: &Entailment) -> Value {
    json!({"verdict": e.holds(), "counterexample": e.counterexample().map(team_json)})
}

fn entailment_text(e: &Entailment) -> String {
    match e.counterexample() {
        None => "true".into(),
        Some(t) => format!("false, counterexample {t}"),
    }
}

fn cmd_entails(
    domain: Option<&str>,
    lhs: &[String],
    rhs: &str,
    subst: Option<&str>,
    mode: EvalMode,
    limits: &Limits,
) -> Result<Outcome> {
    let gamma = lhs.iter().map(|s| parse(s)).collect::<Result<Vec<_>>>()?;
    let psi = parse(rhs)?;
    let mut all: Vec<&Formula> = gamma.iter().collect();
    all.push(&psi);
    let n = domain_for(domain, &all)?;
    let e = entailment_core(&gamma, &psi, &n, mode, limits)?;
    let mut json = entailment_json(&e);
    json["premises"] = json!(gamma.iter().map(|g| g.to_string()).collect::<Vec<_>>());
    json["conclusion"] = json!(psi.to_string());
    let Some(s) = subst else {
        return Ok(Outcome::verdict(json, entailment_text(&e), e.holds()));
    };
    let sigma = ClassicalSubstitution::from_json(&read_input(s)?)?;
    let gamma2: Vec<Formula> = gamma.iter().map(|g| apply_substitution(&sigma, g)).collect();
    let psi2 = apply_substitution(&sigma, &psi);
    let mut all2: Vec<&Formula> = gamma2.iter().collect();
    all2.push(&psi2);
    let n2 = domain_for(domain, &all2)?;
    let e2 = entailment_core(&gamma2, &psi2, &n2, mode, limits)?;
    let mut sub = entailment_json(&e2);
    sub["premises"] = json!(gamma2.iter().map(|g| g.to_string()).collect::<Vec<_>>());
    sub["conclusion"] = json!(psi2.to_string());
    json["substituted"] = sub;
    let text = format!("original: {}\nsubstituted: {}", entailment_text(&e), entailment_text(&e2));
    Ok(Outcome::verdict(json, text, e2.holds()))
}

fn cmd_equiv(domain: Option<&str>, lhs: &str, rhs: &str, mode: EvalMode, limits: &Limits) -> Result<Outcome> {
    let (f, g) = (parse(lhs)?, parse(rhs)?);
    let n = domain_for(domain, &[&f, &g])?;
    Ok(match equivalent(&f, &g, &n, mode, limits)? {
        Equivalence::Equivalent => Outcome::verdict(json!({"verdict": true, "counterexample": null}), "true", true),
        Equivalence::Differs { team, left, right } => Outcome::verdict(
            json!({"verdict": false, "counterexample": {"team": team_json(&team), "lhs": left, "rhs": right}}),
            format!("false, on {team} lhs is {left} and rhs is {right}"),
            false,
        ),
    })
}

fn cmd_props(domain: Option<&str>, formula: &str, mode: EvalMode, limits: &Limits) -> Result<Outcome> {
    let f = parse(formula)?;
    let n = domain_for(domain, &[&f])?;
    let profile = property_profile(&f, &n, mode, limits)?;
    let p = Property::of_formula(&f, &n, mode, limits)?;
    let why = |v: Option<crate::analysis::Violation>| v.map(|v| v.to_string());
    let json = json!({
        "formula": f.to_string(),
        "domain": n.indices(),
        "profile": profile,
        "violations": {
            "flat": why(p.flat_violation()),
            "downward_closed": why(p.downward_violation()),
            "union_closed": why(p.union_violation()),
            "empty_team": why(p.empty_violation()),
        },
    });
    let text = format!(
        "flat: {}\ndownward closed: {}\nunion closed: {}\nempty team: {}",
        profile.flat, profile.downward_closed, profile.union_closed, profile.empty_team
    );
    Ok(Outcome { json, text, code: EXIT_TRUE })
}

fn cmd_classify(formula: &str) -> Result<Outcome> {
    let f = parse(formula)?;
    let names: Vec<&str> = classify(&f).into_iter().map(Fragment::name).collect();
    let text = if names.is_empty() { "(none)".to_string() } else { names.join(" ") };
    Ok(Outcome { json: json!({"formula": f.to_string(), "fragments": names}), text, code: EXIT_TRUE })
}

fn cmd_synth(family: &str, target: &str, limits: &Limits) -> Result<Outcome> {
    let fj: FamilyJson =
        serde_json::from_str(&read_input(family)?).map_err(|e| Error::input(format!("family JSON: {e}")))?;
    let p = TeamFamily::from_json(&fj)?;
    let target: SynthesisTarget = target.parse()?;
    if let Some(v) = target.violation(&Property::of_family(&p)?) {
        let msg = v.to_string();
        return Ok(Outcome::verdict(
            json!({"target": target.to_string(), "verdict": false, "violation": msg}),
            format!("not a {target} property: {msg}"),
            false,
        ));
    }
    let f = synthesize(&p, target)?;
    let verified = certify(&f, &p, limits)?;
    let json = json!({
        "target": target.to_string(),
        "verdict": true,
        "formula": f.to_string(),
        "certificate": {"verified": verified, "models": family_json(&p)},
    });
    Ok(Outcome::verdict(json, format!("{f}\nverified: {verified}"), verified))
}

fn cmd_nf(domain: Option<&str>, formula: &str, fragment: &str, limits: &Limits) -> Result<Outcome> {
    let f = parse(formula)?;
    let frag = Fragment::from_name(fragment).ok_or_else(|| Error::input(format!("unknown fragment `{fragment}`")))?;
    let n = domain_for(domain, &[&f])?;
    let g = normal_form(&f, frag, &n, limits)?;
    let p = satisfying_teams(&f, &n, EvalMode::Lax, limits)?;
    let verified = certify(&g, &p, limits)? && frag.admits(&g);
    let json = json!({
        "formula": f.to_string(),
        "fragment": frag.name(),
        "domain": n.indices(),
        "normal_form": g.to_string(),
        "certificate": {"verified": verified, "models": family_json(&p)},
    });
    Ok(Outcome::verdict(json, format!("{g}\nverified: {verified}"), verified))
}

/// Rewrites every atom `f` maps to `Some`, bottom-up through the connectives.
fn map_atoms(f: &Formula, step: &dyn Fn(&Formula) -> Result<Option<Formula>>) -> Result<Formula> {
    use Formula::*;
    let arc = |g: &Arc<Formula>| -> Result<Arc<Formula>> { Ok(Arc::new(map_atoms(g, step)?)) };
    Ok(match f {
        And(a, b) => And(arc(a)?, arc(b)?),
        Tensor(a, b) => Tensor(arc(a)?, arc(b)?),
        NeOr(a, b) => NeOr(arc(a)?, arc(b)?),
        BoolOr(a, b) => BoolOr(arc(a)?, arc(b)?),
        LinImp(a, b) => LinImp(arc(a)?, arc(b)?),
        Might(a) => Might(arc(a)?),
        BoolNeg(a) => BoolNeg(arc(a)?),
        _ => step(f)?.unwrap_or_else(|| f.clone()),
    })
}

/// Translates `f` one step per atom, or all the way down to atom-free PT⁺ formulas.
pub fn translate_atoms(f: &Formula, one_step: bool, limits: &Limits) -> Result<Formula> {
    let once = |g: &Formula| -> Result<Option<Formula>> {
        Ok(match g {
            Formula::Dep(..) => Some(dep_to_cond_indep(g)?),
            Formula::CondIndep(..) => Some(cond_indep_to_uncond(g, limits)?),
            Formula::Indep(..) => Some(indep_to_pt(g, limits)?),
            _ => None,
        })
    };
    if one_step {
        return map_atoms(f, &once);
    }
    let full = |g: &Formula| -> Result<Option<Formula>> {
        once(g)?.map(|h| translate_atoms(&h, false, limits)).transpose()
    };
    map_atoms(f, &full)
}

fn cmd_translate(formula: &str, one_step: bool, limits: &Limits) -> Result<Outcome> {
    let f = parse(formula)?;
    let g = translate_atoms(&f, one_step, limits)?;
    let n = Domain::new(variables(&f).union(&variables(&g)).copied());
    let verified = equivalent(&f, &g, &n, EvalMode::Lax, limits)?.holds();
    let json = json!({
        "formula": f.to_string(),
        "translation": g.to_string(),
        "certificate": {"verified": verified, "domain": n.indices()},
    });
    Ok(Outcome::verdict(json, format!("{g}\nverified: {verified}"), verified))
}

enum ProveRequest {
    Entailment(String, String),
    NormalForm(String, bool),
    Gpp(String),
    Macro(String, String, String),
}

fn parse_gpp(name: &str) -> Result<GppAxiom> {
    GppAxiom::ALL
        .into_iter()
        .find(|a| a.to_string() == name.to_ascii_lowercase() || gpp_numeral(*a) == name)
        .ok_or_else(|| Error::input(format!("unknown axiom `{name}`")))
}

fn gpp_numeral(a: GppAxiom) -> &'static str {
    match a {
        GppAxiom::Symmetry => "i",
        GppAxiom::Weakening => "ii",
        GppAxiom::Permutation => "iii",
        GppAxiom::Mixing => "iv",
    }
}

fn cmd_prove(req: ProveRequest, domain: Option<&str>, system: &str, limits: &Limits) -> Result<Outcome> {
    let (d, sys): (D, ProofSystem) = match req {
        ProveRequest::Entailment(l, r) => {
            let (f, g) = (parse(&l)?, parse(&r)?);
            let n = domain_for(domain, &[&f, &g])?;
            match derive_entailment(&f, &g, &n, limits)? {
                EntailmentProof::Proof(d) => (d, ProofSystem::PtPlus),
                EntailmentProof::Counterexample(t) => {
                    return Ok(Outcome::verdict(
                        json!({"verdict": false, "counterexample": team_json(&t)}),
                        format!("false, counterexample {t}"),
                        false,
                    ))
                }
            }
        }
        ProveRequest::NormalForm(s, backward) => {
            let f = parse(&s)?;
            let n = domain_for(domain, &[&f])?;
            let p = derive_normal_form(&f, &n, limits)?;
            (if backward { p.from_normal_form } else { p.to_normal_form }, ProofSystem::PtPlus)
        }
        ProveRequest::Gpp(a) => (gpp_derivation(parse_gpp(&a)?, limits)?, gpp_system()),
        ProveRequest::Macro(r, p, c) => {
            let rule = Rule::from_name(&r).ok_or_else(|| Error::input(format!("unknown rule `{r}`")))?;
            let sys: ProofSystem = system.parse()?;
            let prem = proofs::Derivation::assume("a", parse(&p)?);
            (expand_macro(rule, vec![prem], &parse(&c)?, &sys)?, sys)
        }
    };
    let report = check_with(&d, &sys, &CheckOptions { limits: *limits, ..CheckOptions::default() });
    if let Err(r) = &report.result {
        return Err(Error::Unsupported(format!("generated derivation failed to check: {r}")));
    }
    let text = format!(
        "system: {}\nconclusion: {}\nnodes: {}\ndepth: {}",
        sys.name(),
        d.conclusion,
        d.size(),
        d.depth()
    );
    Ok(Outcome { json: proofs::to_json(&d), text, code: EXIT_TRUE })
}

fn cmd_check(proof: &str, system: &str, nodes: bool, flat_classical: bool, limits: &Limits) -> Result<Outcome> {
    let sys: ProofSystem = system.parse()?;
    let d = parse_derivation(&read_input(proof)?)?;
    let report = check_with(&d, &sys, &CheckOptions { flat_classical, limits: *limits });
    let text = match &report.result {
        Ok(c) => {
            let mut s = format!("accepted in {}: {}", sys.name(), c.conclusion);
            for (l, f) in &c.open_assumptions {
                s.push_str(&format!("\n  open [{l}] {f}"));
            }
            s
        }
        Err(r) => format!("rejected in {}: {r}", sys.name()),
    };
    let code = match &report.result {
        Ok(_) => EXIT_TRUE,
        Err(r) if r.reason == Reason::TooLarge => EXIT_GUARD,
        Err(_) => EXIT_FALSE,
    };
    Ok(Outcome { json: report.to_json(nodes), text, code })
}

struct Probe {
    name: String,
    pass: bool,
    detail: String,
}

fn probe(name: impl Into<String>, r: Result<(bool, String)>) -> Probe {
    match r {
        Ok((pass, detail)) => Probe { name: name.into(), pass, detail },
        Err(e) => Probe { name: name.into(), pass: false, detail: format!("error: {e}") },
    }
}

/// Reference checks: the valve team, the definability identities, the known
/// counterexamples, the independence axioms and seeded synthesis round trips.
fn selftest_probes(seed: u64, limits: &Limits) -> Vec<Probe> {
    let mut out = Vec::new();
    let (x, y) = valve_lamp_team();
    for (name, team, f, want) in [
        ("valve team X satisfies ind(p0 ; p3)", &x, "ind(p0 ; p3)", true),
        ("valve subteam Y fails ind(p0 ; p3)", &y, "ind(p0 ; p3)", false),
        ("valve team X fails ind(p1 ; p3)", &x, "ind(p1 ; p3)", false),
    ] {
        out.push(probe(name, (|| {
            let v = eval(team, &parse(f)?, EvalMode::Lax)?;
            Ok((v == want, format!("eval = {v}")))
        })()));
    }

    let samples = ["p0", "-p1", "NE", "BOT", "p0 & NE", "p0 v p1", "=(p0, p1)", "p0 | (p1 & NE)", "M(p1)"];
    let ne_free = ["p0", "-p1", "BOT", "TOP", "p0 v p1", "=(p0, p1)", "p0 | -p1"];
    let n = Domain::new([0, 1]);
    let mut identities: Vec<(String, String, String)> = Vec::new();
    for a in samples {
        identities.push(("M(φ) ≡ BOT v ((φ & NE) | TOP)".into(), format!("M({a})"), format!("BOT v (({a}) & NE | TOP)")));
        for b in samples {
            identities.push((
                "φ % ψ ≡ BOT v ((φ & NE) | (ψ & NE))".into(),
                format!("({a}) % ({b})"),
                format!("BOT v ((({a}) & NE) | (({b}) & NE))"),
            ));
            identities.push(("φ v ψ ≡ ~(~φ & ~ψ)".into(), format!("({a}) v ({b})"), format!("~(~({a}) & ~({b}))")));
        }
    }
    for a in ne_free {
        identities.push(("M(φ) ≡ φ % TOP (NE-free φ)".into(), format!("M({a})"), format!("({a}) % TOP")));
        for b in ne_free {
            identities.push((
                "φ % ψ ≡ (φ | ψ) & M(φ) & M(ψ) (NE-free φ, ψ)".into(),
                format!("({a}) % ({b})"),
                format!("(({a}) | ({b})) & M({a}) & M({b})"),
            ));
        }
    }
    identities.push(("BOT & NE ≡ TOP -o BOT".into(), "BOT & NE".into(), "TOP -o BOT".into()));
    identities.push(("NE ≡ ~BOT".into(), "NE".into(), "~BOT".into()));
    let mut by_name: Vec<(String, usize, Option<String>)> = Vec::new();
    for (name, l, r) in identities {
        let res = (|| -> Result<bool> { Ok(equivalent(&parse(&l)?, &parse(&r)?, &n, EvalMode::Lax, limits)?.holds()) })();
        let fail = match res {
            Ok(true) => None,
            Ok(false) => Some(format!("{l} ≢ {r}")),
            Err(e) => Some(format!("{l}: {e}")),
        };
        match by_name.iter_mut().find(|(n, _, _)| *n == name) {
            Some(entry) => {
                entry.1 += 1;
                entry.2 = entry.2.take().or(fail);
            }
            None => by_name.push((name, 1, fail)),
        }
    }
    for (name, count, fail) in by_name {
        let pass = fail.is_none();
        out.push(Probe { name, pass, detail: fail.unwrap_or_else(|| format!("{count} instance(s) on {n}")) });
    }

    for (name, gamma, psi, dom, want) in [
        ("BOT v NE is valid", vec![], "BOT v NE", vec![0], true),
        ("BOT is not valid", vec![], "BOT", vec![0], false),
        ("NE is not valid", vec![], "NE", vec![0], false),
        ("p0 | p0 entails p0", vec!["p0 | p0"], "p0", vec![0], true),
        ("=(p1, p0) | =(p1, p0) does not entail =(p1, p0)", vec!["=(p1, p0) | =(p1, p0)"], "=(p1, p0)", vec![0, 1], false),
        ("(p0 v -p0) | (p0 v -p0) does not entail p0 v -p0", vec!["(p0 v -p0) | (p0 v -p0)"], "p0 v -p0", vec![0], false),
    ] {
        out.push(probe(name, (|| {
            let g = gamma.iter().map(|s| parse(s)).collect::<Result<Vec<_>>>()?;
            let e = entailment_core(&g, &parse(psi)?, &Domain::new(dom), EvalMode::Lax, limits)?;
            let detail = entailment_text(&e);
            Ok((e.holds() == want, detail))
        })()));
    }
    out.push(probe("strict tensor is not local", (|| {
        Ok(match strict_locality_witness()? {
            Some(w) => (w.strict_x != w.strict_y, format!("{} on {} is {}, on {} is {}", w.formula, w.x, w.strict_x, w.y, w.strict_y)),
            None => (false, "no witness found".into()),
        })
    })()));

    for ax in GppAxiom::ALL {
        out.push(probe(format!("independence axiom {ax} derivation checks"), (|| {
            let (p, c, n) = ax.instance();
            let valid = entailment_core(&[p], &c, &n, EvalMode::Lax, limits)?.holds();
            let d = gpp_derivation(ax, limits)?;
            let r = check(&d, &gpp_system());
            let ok = r.accepted() && valid;
            Ok((ok, format!("valid: {valid}, checked: {}, nodes: {}", r.accepted(), d.size())))
        })()));
    }

    let mut rng = StdRng::seed_from_u64(seed);
    let n2 = Domain::new([0, 1]);
    for target in SynthesisTarget::ALL {
        out.push(probe(format!("synthesis round trip for {target}"), (|| {
            let mut done = 0;
            while done < 20 {
                let p = random_family(target, &n2, &mut rng)?;
                let f = synthesize(&p, target)?;
                if !certify(&f, &p, limits)? || !target.fragment().admits(&f) {
                    return Ok((false, format!("{f} does not define {}", family_text(&p))));
                }
                done += 1;
            }
            Ok((done > 0, format!("{done} random famil(ies) on {n2}")))
        })()));
    }
    out
}

/// A random family on `n` closed under the conditions `target` requires.
pub fn random_family(target: SynthesisTarget, n: &Domain, rng: &mut impl Rng) -> Result<TeamFamily> {
    let rows = 1u32 << n.len();
    let teams = 1usize << rows;
    let mut member = vec![false; teams];
    if target == SynthesisTarget::Cpl {
        let s = rng.gen_range(0..teams);
        (0..teams).filter(|m| m & !s == 0).for_each(|m| member[m] = true);
    } else {
        let k = rng.gen_range(0..=4);
        (0..k).for_each(|_| member[rng.gen_range(0..teams)] = true);
    }
    let (down, union, empty) = match target {
        SynthesisTarget::Cpl | SynthesisTarget::PtPlus => (false, false, false),
        SynthesisTarget::Pt => (false, false, true),
        SynthesisTarget::Pu => (false, true, true),
        SynthesisTarget::PuPlus => (false, true, false),
        SynthesisTarget::Pd => (true, false, true),
        SynthesisTarget::PdPlus => (true, false, false),
    };
    if empty {
        member[0] = true;
    }
    if down {
        for m in (0..teams).rev() {
            if member[m] {
                (0..teams).filter(|s| s & !m == 0).for_each(|s| member[s] = true);
            }
        }
    }
    if union {
        loop {
            let cur: Vec<usize> = (1..teams).filter(|m| member[*m]).collect();
            let mut grew = false;
            for a in &cur {
                for b in &cur {
                    if !member[a | b] {
                        member[a | b] = true;
                        grew = true;
                    }
                }
            }
            if !grew {
                break;
            }
        }
    }
    let chosen = team_masks(rows).filter(|m| member[*m as usize]).map(|m| Team::from_mask(n.clone(), m));
    TeamFamily::new(n.clone(), chosen)
}

fn cmd_selftest(seed: u64, limits: &Limits) -> Result<Outcome> {
    let probes = selftest_probes(seed, limits);
    let failed = probes.iter().filter(|p| !p.pass).count();
    let json = json!({
        "seed": seed,
        "passed": probes.len() - failed,
        "failed": failed,
        "checks": probes.iter().map(|p| json!({"name": p.name, "pass": p.pass, "detail": p.detail})).collect::<Vec<_>>(),
    });
    let text = probes
        .iter()
        .map(|p| format!("{} {} ({})", if p.pass { "PASS" } else { "FAIL" }, p.name, p.detail))
        .collect::<Vec<_>>()
        .join("\n");
    Ok(Outcome::verdict(json, text, failed == 0))
}
