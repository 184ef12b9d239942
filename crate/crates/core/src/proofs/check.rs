//! Rule-by-rule verification of derivation trees.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use serde_json::{json, Value};

use super::build::{dstr_ne_conclusion, tensor_spine, Gen};
use super::{macros, Derivation, ExtraAtom, ProofSystem, Rule, D};
use crate::analysis::Property;
use crate::limits::Limits;
use crate::semantics::{eval, satisfying_teams, EvalMode};
use crate::synthesis::{row_conj_ne, theta_star};
use crate::syntax::{path_at_position, replace_at, subformula_at, variables, Formula, Path};
use crate::teams::{all_teams, Domain, Team};

/// Which check a rejected node failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Reason {
    /// Premise count or premise/conclusion shape does not fit the rule.
    Shape,
    ParamMissing,
    ParamInvalid,
    /// `TensorI_minus` or `ExFalsoMinus` with an `NE`-containing formula.
    ContainsNe,
    /// `TensorE_minus` concluding a non-classical formula.
    NonClassicalConclusion,
    /// A non-classical open assumption in a restricted subderivation.
    NonClassicalAssumption,
    /// The `α` of a `Dstr*` rule is not classical.
    NotClassical,
    /// `ZeroI` over two equal teams.
    IdenticalTeams,
    /// Strong elimination with missing, extra or misordered cases.
    BadBranches,
    AtomNotSatisfied,
    Discharge,
    LabelClash,
    NotInSystem,
    MacroUnavailable,
    /// A formula outside the language of the system.
    Language,
    TooLarge,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Rejection {
    /// Premise indices from the root.
    pub path: Vec<usize>,
    pub rule: Rule,
    pub reason: Reason,
    pub message: String,
}

pub(crate) fn path_string(path: &[usize]) -> String {
    if path.is_empty() {
        "root".into()
    } else {
        path.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(".")
    }
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "node {} ({}): {:?}: {}", path_string(&self.path), self.rule, self.reason, self.message)
    }
}

impl std::error::Error for Rejection {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Rejected,
    Unchecked,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NodeStatus {
    pub path: String,
    pub rule: Rule,
    pub status: Status,
}

/// The judgement established by an accepted derivation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Checked {
    pub conclusion: Formula,
    /// Open assumptions by label.
    pub open_assumptions: Vec<(String, Formula)>,
}

impl Checked {
    pub fn assumptions(&self) -> Vec<Formula> {
        self.open_assumptions.iter().map(|(_, f)| f.clone()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckReport {
    pub system: String,
    pub result: Result<Checked, Rejection>,
    pub nodes: Vec<NodeStatus>,
}

impl CheckReport {
    pub fn accepted(&self) -> bool {
        self.result.is_ok()
    }

    pub fn to_json(&self, with_nodes: bool) -> Value {
        let mut v = match &self.result {
            Ok(c) => json!({
                "system": self.system,
                "accepted": true,
                "conclusion": c.conclusion.to_string(),
                "open_assumptions": c.open_assumptions.iter()
                    .map(|(l, f)| json!({"label": l, "formula": f.to_string()})).collect::<Vec<_>>(),
            }),
            Err(r) => json!({
                "system": self.system,
                "accepted": false,
                "rejection": {
                    "node": path_string(&r.path),
                    "rule": r.rule.name(),
                    "reason": r.reason,
                    "message": r.message,
                },
            }),
        };
        v["node_count"] = json!(self.nodes.len());
        if with_nodes {
            v["nodes"] = serde_json::to_value(&self.nodes).expect("statuses serialize");
        }
        v
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct CheckOptions {
    /// Read "classical" as "flat" (checked semantically on the formula's own
    /// variables) instead of the default syntactic reading.
    pub flat_classical: bool,
    pub limits: Limits,
}


pub fn check(d: &D, sys: &ProofSystem) -> CheckReport {
    check_with(d, sys, &CheckOptions::default())
}

pub fn check_with(d: &D, sys: &ProofSystem, opts: &CheckOptions) -> CheckReport {
    let mut c = Checker::new(sys, opts);
    let result = c.run(d);
    let mut nodes = Vec::new();
    let mut stack = vec![(d, Vec::new())];
    while let Some((n, path)) = stack.pop() {
        if nodes.len() > opts.limits.max_nodes {
            break;
        }
        let status = c.status.get(&Arc::as_ptr(n)).copied().unwrap_or(Status::Unchecked);
        nodes.push(NodeStatus { path: path_string(&path), rule: n.rule, status });
        for (k, p) in n.premises.iter().enumerate().rev() {
            let mut q = path.clone();
            q.push(k);
            stack.push((p, q));
        }
    }
    CheckReport { system: sys.name(), result, nodes }
}

type Fail = (Reason, String);
type Open = BTreeMap<String, Formula>;

fn fail<T>(reason: Reason, msg: impl Into<String>) -> Result<T, Fail> {
    Err((reason, msg.into()))
}

struct Checker<'a> {
    sys: &'a ProofSystem,
    opts: &'a CheckOptions,
    memo: HashMap<*const Derivation, Open>,
    status: HashMap<*const Derivation, Status>,
    rejection: Option<Rejection>,
    visited: usize,
    rows: HashMap<Domain, HashMap<Formula, u64>>,
}

impl<'a> Checker<'a> {
    fn new(sys: &'a ProofSystem, opts: &'a CheckOptions) -> Self {
        Checker {
            sys,
            opts,
            memo: HashMap::new(),
            status: HashMap::new(),
            rejection: None,
            visited: 0,
            rows: HashMap::new(),
        }
    }

    fn run(&mut self, d: &D) -> Result<Checked, Rejection> {
        match self.visit(d, &mut Vec::new()) {
            Some(open) => Ok(Checked { conclusion: d.conclusion.clone(), open_assumptions: open.into_iter().collect() }),
            None => Err(self.rejection.clone().expect("a failed visit records its rejection")),
        }
    }

    fn visit(&mut self, d: &D, path: &mut Vec<usize>) -> Option<Open> {
        let key = Arc::as_ptr(d);
        if let Some(open) = self.memo.get(&key) {
            return Some(open.clone());
        }
        self.visited += 1;
        let result = if self.visited > self.opts.limits.max_nodes {
            fail(Reason::TooLarge, format!("more than {} nodes", self.opts.limits.max_nodes))
        } else {
            let mut opens = Vec::with_capacity(d.premises.len());
            for (k, p) in d.premises.iter().enumerate() {
                path.push(k);
                let o = self.visit(p, path);
                path.pop();
                opens.push(o?);
            }
            self.node(d, opens)
        };
        match result {
            Ok(open) => {
                self.status.insert(key, Status::Ok);
                self.memo.insert(key, open.clone());
                Some(open)
            }
            Err((reason, message)) => {
                self.status.insert(key, Status::Rejected);
                self.rejection = Some(Rejection { path: path.clone(), rule: d.rule, reason, message });
                None
            }
        }
    }

    fn classical(&self, f: &Formula) -> bool {
        if self.opts.flat_classical {
            let vars = Domain::new(variables(f));
            if let Ok(p) = Property::of_formula(f, &vars, EvalMode::Lax, &self.opts.limits) {
                return p.flat_violation().is_none();
            }
        }
        f.is_classical()
    }

    fn node(&mut self, d: &D, opens: Vec<Open>) -> Result<Open, Fail> {
        let rule = d.rule;
        if !self.sys.admits(&d.conclusion) {
            return fail(Reason::Language, format!("{} is not in the language of {}", d.conclusion, self.sys));
        }
        if rule == Rule::Assume {
            let label = d.label.clone().ok_or((Reason::ParamMissing, "assumption without a label".to_string()))?;
            if !d.premises.is_empty() {
                return fail(Reason::Shape, "an assumption has no premises");
            }
            return Ok(Open::from([(label, d.conclusion.clone())]));
        }
        if self.sys.is_primitive(rule) {
            self.primitive(d, opens)
        } else if self.sys.has_macro(rule) {
            self.derived(d, opens)
        } else if rule.is_derived() || rule == Rule::DstrStarAndTensor {
            fail(Reason::MacroUnavailable, format!("{rule} cannot be used in {}", self.sys))
        } else {
            fail(Reason::NotInSystem, format!("{rule} is not a rule of {}", self.sys))
        }
    }

    fn derived(&mut self, d: &D, opens: Vec<Open>) -> Result<Open, Fail> {
        arity(d, 1)?;
        no_discharge(d)?;
        let placeholder = Derivation::assume("#premise", d.premises[0].conclusion.clone());
        let mut g = Gen::new("#m");
        let classical = |f: &Formula| self.classical(f);
        let exp = macros::expand(d.rule, placeholder, &d.conclusion, &classical, &mut g)?;
        let mut inner = Checker::new(self.sys, self.opts);
        match inner.run(&exp) {
            Ok(c) => {
                if let Some((l, _)) = c.open_assumptions.iter().find(|(l, _)| l != "#premise") {
                    return fail(Reason::Discharge, format!("expansion of {} leaves {l} open", d.rule));
                }
            }
            Err(r) => {
                return fail(r.reason, format!("in the expansion of {}, at {}: {}", d.rule, path_string(&r.path), r.message))
            }
        }
        merge(opens)
    }

    fn team_list(&self, n: &Domain) -> Result<Vec<Team>, Fail> {
        all_teams(n, &self.opts.limits)
            .map(|it| it.collect())
            .map_err(|e| (Reason::TooLarge, e.to_string()))
    }

    fn decode(&mut self, f: &Formula, n: &Domain) -> Option<Team> {
        if *f == Formula::Bot {
            return Some(Team::empty(n.clone()));
        }
        let map = self.rows.entry(n.clone()).or_insert_with(|| {
            (0..1u64 << n.len()).map(|r| (row_conj_ne(n, r), r)).collect()
        });
        let mut leaves = Vec::new();
        let mut stack = vec![f];
        while let Some(g) = stack.pop() {
            match g {
                Formula::Tensor(a, b) => {
                    stack.push(b);
                    stack.push(a);
                }
                leaf => leaves.push(*map.get(leaf)?),
            }
        }
        let k = leaves.len();
        leaves.sort_unstable();
        leaves.dedup();
        if leaves.len() != k {
            return None;
        }
        Team::new(n.clone(), leaves).ok()
    }

    fn primitive(&mut self, d: &D, mut opens: Vec<Open>) -> Result<Open, Fail> {
        use Formula::*;
        let c = &d.conclusion;
        let pc = |k: usize| &d.premises[k].conclusion;
        let rule = d.rule;
        let expect = |ok: bool, what: &str| if ok { Ok(()) } else { fail(Reason::Shape, what.to_string()) };
        if !matches!(rule, Rule::BorE | Rule::TensorEMinus | Rule::TensorSubMinus | Rule::Se1 | Rule::Se2 | Rule::SeAtom) {
            no_discharge(d)?;
        }
        match rule {
            Rule::Em0 => {
                arity(d, 0)?;
                let ok = matches!(c, Tensor(a, b) if matches!((&**a, &**b), (Var(i), NegVar(j)) if i == j));
                expect(ok, "EM0 concludes p_i⊗¬p_i")?;
            }
            Rule::NeI => {
                arity(d, 0)?;
                expect(*c == Formula::bor(Bot, Ne), "NEI concludes ⊥∨NE")?;
            }
            Rule::AndI => {
                arity(d, 2)?;
                expect(*c == Formula::and(pc(0).clone(), pc(1).clone()), "AndI concludes the conjunction of its premises")?;
            }
            Rule::AndEL | Rule::AndER => {
                arity(d, 1)?;
                let And(a, b) = pc(0) else { return fail(Reason::Shape, "premise is not a conjunction") };
                let want = if rule == Rule::AndEL { a } else { b };
                expect(**want == *c, "conclusion is not the selected conjunct")?;
            }
            Rule::BorIL | Rule::BorIR => {
                arity(d, 1)?;
                let BoolOr(a, b) = c else { return fail(Reason::Shape, "conclusion is not a disjunction") };
                let want = if rule == Rule::BorIL { a } else { b };
                expect(**want == *pc(0), "the premise is not the introduced disjunct")?;
            }
            Rule::BorE => {
                arity(d, 3)?;
                let BoolOr(a, b) = pc(0) else { return fail(Reason::Shape, "major premise is not a disjunction") };
                expect(pc(1) == c && pc(2) == c, "both cases must conclude the conclusion")?;
                let labels = labels(d, 2)?;
                discharge(&mut opens[1], &labels[0], a, 1)?;
                discharge(&mut opens[2], &labels[1], b, 2)?;
            }
            Rule::TensorIMinus => {
                arity(d, 1)?;
                let Tensor(a, b) = c else { return fail(Reason::Shape, "conclusion is not a tensor") };
                expect(**a == *pc(0), "left component must be the premise")?;
                if b.contains_ne() {
                    return fail(Reason::ContainsNe, format!("the added component {b} contains NE"));
                }
            }
            Rule::TensorW => {
                arity(d, 1)?;
                expect(*c == Formula::tensor(pc(0).clone(), pc(0).clone()), "TensorW concludes φ⊗φ")?;
            }
            Rule::TensorEMinus => {
                arity(d, 3)?;
                let Tensor(a, b) = pc(0) else { return fail(Reason::Shape, "major premise is not a tensor") };
                expect(pc(1) == c && pc(2) == c, "both cases must conclude the conclusion")?;
                if !self.classical(c) {
                    return fail(Reason::NonClassicalConclusion, format!("{c} is not classical"));
                }
                let labels = labels(d, 2)?;
                discharge(&mut opens[1], &labels[0], a, 1)?;
                discharge(&mut opens[2], &labels[1], b, 2)?;
                self.classical_opens(&opens[1..])?;
            }
            Rule::TensorSubMinus => {
                arity(d, 2)?;
                let Tensor(a, b) = pc(0) else { return fail(Reason::Shape, "major premise is not a tensor") };
                expect(*c == Tensor(a.clone(), Arc::new(pc(1).clone())), "conclusion must be φ⊗χ")?;
                let labels = labels(d, 1)?;
                discharge(&mut opens[1], &labels[0], b, 1)?;
                self.classical_opens(&opens[1..])?;
            }
            Rule::ComTensor => {
                arity(d, 1)?;
                let Tensor(a, b) = pc(0) else { return fail(Reason::Shape, "premise is not a tensor") };
                expect(*c == Tensor(b.clone(), a.clone()), "ComTensor swaps the components")?;
            }
            Rule::AssTensor => {
                arity(d, 1)?;
                let Tensor(a, bc) = pc(0) else { return fail(Reason::Shape, "premise is not φ⊗(ψ⊗χ)") };
                let Tensor(b, cc) = &**bc else { return fail(Reason::Shape, "premise is not φ⊗(ψ⊗χ)") };
                let want = Formula::tensor(Tensor(a.clone(), b.clone()), (**cc).clone());
                expect(*c == want, "AssTensor concludes (φ⊗ψ)⊗χ")?;
            }
            Rule::BotI => {
                arity(d, 1)?;
                let ok = matches!(pc(0), And(a, b) if matches!((&**a, &**b), (Var(i), NegVar(j)) if i == j));
                expect(ok && *c == Bot, "BotI takes p_i∧¬p_i to ⊥")?;
            }
            Rule::BotE => {
                arity(d, 1)?;
                let ok = matches!(pc(0), Tensor(a, b) if **b == Bot && **a == *c);
                expect(ok, "BotE takes φ⊗⊥ to φ")?;
            }
            Rule::ExFalsoPlus => {
                arity(d, 1)?;
                expect(*pc(0) == Formula::falsum(), "ExFalsoPlus needs the premise ⊥∧NE")?;
            }
            Rule::ZeroCtr => {
                arity(d, 1)?;
                let ok = matches!(pc(0), Tensor(_, b) if **b == Formula::falsum());
                expect(ok && *c == Formula::falsum(), "ZeroCtr takes φ⊗(⊥∧NE) to ⊥∧NE")?;
            }
            Rule::ZeroI => {
                arity(d, 1)?;
                let n = domain_param(d)?;
                let And(a, b) = pc(0) else { return fail(Reason::Shape, "premise is not Θ*_X ∧ Θ*_Y") };
                let (Some(x), Some(y)) = (self.decode(a, &n), self.decode(b, &n)) else {
                    return fail(Reason::Shape, format!("premise is not Θ*_X ∧ Θ*_Y over {n}"));
                };
                if x == y {
                    return fail(Reason::IdenticalTeams, format!("both sides describe the team {x}"));
                }
                expect(*c == Formula::falsum(), "ZeroI concludes ⊥∧NE")?;
            }
            Rule::DstrTensorBor => {
                arity(d, 1)?;
                let Tensor(a, bc) = pc(0) else { return fail(Reason::Shape, "premise is not φ⊗(ψ∨χ)") };
                let BoolOr(b, cc) = &**bc else { return fail(Reason::Shape, "premise is not φ⊗(ψ∨χ)") };
                let want = Formula::bor(Tensor(a.clone(), b.clone()), Tensor(a.clone(), cc.clone()));
                expect(*c == want, "conclusion must be (φ⊗ψ)∨(φ⊗χ)")?;
            }
            Rule::DstrNeAndTensor => {
                arity(d, 1)?;
                let And(ne, t) = pc(0) else { return fail(Reason::Shape, "premise is not NE∧(φ_1⊗⋯⊗φ_k)") };
                if **ne != Ne {
                    return fail(Reason::Shape, "premise is not NE∧(φ_1⊗⋯⊗φ_k)");
                }
                let mut spine = 1;
                let mut cur = &**t;
                while let Tensor(a, _) = cur {
                    spine += 1;
                    cur = a;
                }
                let arities: Vec<usize> = match d.params.arity {
                    Some(k) if k == 0 || k > spine => {
                        return fail(Reason::ParamInvalid, format!("arity {k} but the tensor has {spine} components"))
                    }
                    Some(k) => vec![k],
                    None => (1..=spine).collect(),
                };
                if arities.iter().any(|&k| k > 12) {
                    return fail(Reason::TooLarge, "more than 12 components");
                }
                let ok = arities.into_iter().any(|k| {
                    tensor_spine(t, k).is_some_and(|parts| dstr_ne_conclusion(&parts) == *c)
                });
                expect(ok, "conclusion is not the distribution of NE over the components")?;
            }
            Rule::DstrStarAndTensor => {
                arity(d, 1)?;
                let And(a, t) = pc(0) else { return fail(Reason::Shape, "premise is not α∧(ψ⊗χ)") };
                let Tensor(b, cc) = &**t else { return fail(Reason::Shape, "premise is not α∧(ψ⊗χ)") };
                if !self.classical(a) {
                    return fail(Reason::NotClassical, format!("{a} is not classical"));
                }
                let want = Formula::tensor(And(a.clone(), b.clone()), And(a.clone(), cc.clone()));
                expect(*c == want, "conclusion must be (α∧ψ)⊗(α∧χ)")?;
            }
            Rule::Se1 => {
                let n = domain_param(d)?;
                let major = pc(0).clone();
                let path = path_param(d, &major)?;
                let occ = subformula_at(&major, &path).map_err(|e| (Reason::ParamInvalid, e.to_string()))?;
                if *occ != Ne {
                    return fail(Reason::ParamInvalid, format!("the addressed occurrence {occ} is not NE"));
                }
                let teams: Vec<Team> = self.team_list(&n)?.into_iter().filter(|t| !t.is_empty()).collect();
                self.branches(d, &mut opens, &major, &path, &teams)?;
            }
            Rule::Se2 => {
                let major = pc(0).clone();
                let path = path_param(d, &major)?;
                let occ = subformula_at(&major, &path).map_err(|e| (Reason::ParamInvalid, e.to_string()))?.clone();
                let hyps = [Formula::and(occ.clone(), Bot), Formula::and(occ, Ne)];
                let hyps = hyps.map(|h| replace_at(&major, &path, h).expect("path was validated"));
                self.cases(d, &mut opens, &hyps)?;
            }
            Rule::AtomI => {
                arity(d, 1)?;
                let n = domain_param(d)?;
                self.extra_atom(c, &n)?;
                let Some(y) = self.decode(pc(0), &n) else {
                    return fail(Reason::Shape, format!("premise is not Θ*_Y for a team Y on {n}"));
                };
                if let Some(rows) = &d.params.team {
                    let given = Team::from_bit_rows(n.clone(), rows).map_err(|e| (Reason::ParamInvalid, e.to_string()))?;
                    if given != y {
                        return fail(Reason::ParamInvalid, format!("team parameter {given} differs from the premise team {y}"));
                    }
                }
                if !eval(&y, c, EvalMode::Lax).map_err(|e| (Reason::ParamInvalid, e.to_string()))? {
                    return fail(Reason::AtomNotSatisfied, format!("{y} does not satisfy {c}"));
                }
            }
            Rule::SeAtom => {
                let n = domain_param(d)?;
                let major = pc(0).clone();
                let path = path_param(d, &major)?;
                let occ = subformula_at(&major, &path).map_err(|e| (Reason::ParamInvalid, e.to_string()))?.clone();
                self.extra_atom(&occ, &n)?;
                let fam = satisfying_teams(&occ, &n, EvalMode::Lax, &self.opts.limits)
                    .map_err(|e| (Reason::TooLarge, e.to_string()))?;
                self.branches(d, &mut opens, &major, &path, fam.teams())?;
            }
            other => return fail(Reason::NotInSystem, format!("{other} is not a primitive rule")),
        }
        merge(opens)
    }

    fn extra_atom(&self, f: &Formula, n: &Domain) -> Result<(), Fail> {
        let Some(kind) = ExtraAtom::of(f) else {
            return fail(Reason::Shape, format!("{f} is not a dependency atom"));
        };
        if !self.sys.allows_atom(kind) {
            return fail(Reason::NotInSystem, format!("{} atoms are not part of {}", kind.name(), self.sys));
        }
        if let Some(v) = variables(f).into_iter().find(|v| !n.contains(*v)) {
            return fail(Reason::ParamInvalid, format!("p{v} of {f} is outside {n}"));
        }
        Ok(())
    }

    /// One case per team, with `Θ*_Y` substituted at `path`.
    fn branches(&mut self, d: &D, opens: &mut [Open], major: &Formula, path: &Path, teams: &[Team]) -> Result<(), Fail> {
        let hyps: Vec<Formula> =
            teams.iter().map(|t| replace_at(major, path, theta_star(t)).expect("path was validated")).collect();
        self.cases(d, opens, &hyps)
    }

    fn cases(&mut self, d: &D, opens: &mut [Open], hyps: &[Formula]) -> Result<(), Fail> {
        if d.premises.len() != hyps.len() + 1 {
            return fail(
                Reason::BadBranches,
                format!("{} expects {} cases here, found {}", d.rule, hyps.len(), d.premises.len().saturating_sub(1)),
            );
        }
        let labels = labels(d, hyps.len())?;
        for (k, h) in hyps.iter().enumerate() {
            if d.premises[k + 1].conclusion != d.conclusion {
                return fail(Reason::Shape, format!("case {} does not conclude {}", k + 1, d.conclusion));
            }
            discharge(&mut opens[k + 1], &labels[k], h, k + 1)?;
        }
        Ok(())
    }

    fn classical_opens(&self, opens: &[Open]) -> Result<(), Fail> {
        for o in opens {
            if let Some((l, f)) = o.iter().find(|(_, f)| !self.classical(f)) {
                return fail(Reason::NonClassicalAssumption, format!("open assumption {l}: {f} is not classical"));
            }
        }
        Ok(())
    }
}

fn arity(d: &Derivation, n: usize) -> Result<(), Fail> {
    if d.premises.len() != n {
        return fail(Reason::Shape, format!("{} takes {n} premises, found {}", d.rule, d.premises.len()));
    }
    Ok(())
}

fn no_discharge(d: &Derivation) -> Result<(), Fail> {
    if !d.discharge.is_empty() {
        return fail(Reason::Discharge, format!("{} discharges nothing", d.rule));
    }
    Ok(())
}

fn labels(d: &Derivation, n: usize) -> Result<&[String], Fail> {
    if d.discharge.len() != n {
        return fail(Reason::Discharge, format!("{} discharges {n} labels, found {}", d.rule, d.discharge.len()));
    }
    Ok(&d.discharge)
}

fn discharge(open: &mut Open, label: &str, hyp: &Formula, premise: usize) -> Result<(), Fail> {
    match open.get(label) {
        None => fail(Reason::Discharge, format!("label {label} is not open in premise {premise}")),
        Some(f) if f != hyp => fail(
            Reason::Discharge,
            format!("label {label} stands for {f} in premise {premise}, but the hypothesis is {hyp}"),
        ),
        Some(_) => {
            open.remove(label);
            Ok(())
        }
    }
}

fn merge(opens: Vec<Open>) -> Result<Open, Fail> {
    let mut out = Open::new();
    for o in opens {
        for (l, f) in o {
            match out.get(&l) {
                Some(g) if *g != f => {
                    return fail(Reason::LabelClash, format!("label {l} stands for both {g} and {f}"));
                }
                _ => {
                    out.insert(l, f);
                }
            }
        }
    }
    Ok(out)
}

fn domain_param(d: &Derivation) -> Result<Domain, Fail> {
    d.params.domain.clone().ok_or((Reason::ParamMissing, format!("{} needs the index set N", d.rule)))
}

fn path_param(d: &Derivation, major: &Formula) -> Result<Path, Fail> {
    match (&d.params.path, d.params.position) {
        (Some(p), _) => {
            subformula_at(major, p).map_err(|e| (Reason::ParamInvalid, e.to_string()))?;
            Ok(p.clone())
        }
        (None, Some(m)) => path_at_position(major, m).map_err(|e| (Reason::ParamInvalid, e.to_string())),
        (None, None) => fail(Reason::ParamMissing, format!("{} needs an occurrence path", d.rule)),
    }
}
