//! Constructive derivations in `PT⁺`: every formula is provably equivalent
//! to its normal form `⋁_{X∈F} Θ*_X`, and every valid entailment is derived
//! by passing through normal forms.
//!
//! The builders work on tensors of row conjunctions: they bring a tensor into
//! a left comb, reorder it by adjacent swaps, drop `⊥` components and merge
//! duplicate rows, which turns any tensor of `Θ*` components into a
//! canonical `Θ*_Y`.

use std::collections::HashMap;

use super::build::*;
use super::{Derivation, Rule, D};
use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::semantics::{entailment_core, satisfying_teams, Entailment, EvalMode};
use crate::synthesis::{row_conj_ne, strong_disjunction, theta_star};
use crate::syntax::{variables, Formula, Fragment};
use crate::teams::{row_bits, row_from_bits, Domain, Team, TeamFamily};

/// `f ⊢ NF` and `NF ⊢ f` over a fixed domain.
#[derive(Debug, Clone)]
pub struct NormalFormProof {
    pub normal_form: Formula,
    pub family: TeamFamily,
    pub to_normal_form: D,
    pub from_normal_form: D,
}

#[derive(Debug, Clone)]
pub enum EntailmentProof {
    Proof(D),
    Counterexample(Team),
}

/// The assumption label of the formula being normalised or entailing.
pub const PREMISE_LABEL: &str = "a";

fn validate(fs: &[&Formula], n: &Domain, limits: &Limits) -> Result<()> {
    limits.check_proof(n.len())?;
    limits.check_eval(n.len())?;
    if n.is_empty() {
        return Err(Error::Unsupported("derivations are generated over a nonempty domain".into()));
    }
    for f in fs {
        if !Fragment::PtPlus.admits(f) {
            return Err(Error::Unsupported(format!("{f} is outside the language of PT⁺")));
        }
        if f.contains_top() {
            return Err(Error::Unsupported(format!("{f} contains ⊤, which has no rules")));
        }
        if let Some(v) = variables(f).into_iter().find(|v| !n.contains(*v)) {
            return Err(Error::Domain(format!("p{v} of {f} is outside {n}")));
        }
    }
    Ok(())
}

pub fn derive_normal_form(f: &Formula, n: &Domain, limits: &Limits) -> Result<NormalFormProof> {
    validate(&[f], n, limits)?;
    let mut s = NfGen::new(n.clone(), limits);
    let fam = s.fam(f);
    let normal_form = strong_disjunction(&fam);
    let to = s.fwd(f, Derivation::assume(PREMISE_LABEL, f.clone()));
    let from = s.bwd(f, Derivation::assume(PREMISE_LABEL, normal_form.clone()));
    s.guard(&to)?;
    s.guard(&from)?;
    Ok(NormalFormProof { normal_form, family: fam, to_normal_form: to, from_normal_form: from })
}

pub fn derive_entailment(f: &Formula, g: &Formula, n: &Domain, limits: &Limits) -> Result<EntailmentProof> {
    validate(&[f, g], n, limits)?;
    if let Entailment::Counterexample(t) = entailment_core(std::slice::from_ref(f), g, n, EvalMode::Lax, limits)? {
        return Ok(EntailmentProof::Counterexample(t));
    }
    let premise = Derivation::assume(PREMISE_LABEL, f.clone());
    if *f == Formula::falsum() {
        return Ok(EntailmentProof::Proof(ex_falso(premise, g.clone())));
    }
    let mut s = NfGen::new(n.clone(), limits);
    let (ff, fg) = (s.fam(f), s.fam(g));
    let d = s.fwd(f, premise);
    let d = s.subset_inject(d, &ff, &fg);
    let d = s.bwd(g, d);
    s.guard(&d)?;
    Ok(EntailmentProof::Proof(d))
}

type Branch<'b> = dyn FnMut(&mut NfGen<'_>, usize, D) -> D + 'b;
type LeafFn<'b> = dyn FnMut(&mut NfGen<'_>, D) -> D + 'b;

struct NfGen<'l> {
    gen: Gen,
    n: Domain,
    limits: &'l Limits,
    fams: HashMap<(Formula, Domain), TeamFamily>,
    rows: HashMap<Domain, HashMap<Formula, u64>>,
}

impl Fresh for NfGen<'_> {
    fn gen(&mut self) -> &mut Gen {
        &mut self.gen
    }
}

fn leaves(f: &Formula) -> Vec<Formula> {
    let mut out = Vec::new();
    let mut stack = vec![f];
    while let Some(g) = stack.pop() {
        match g {
            Formula::Tensor(a, b) => {
                stack.push(b);
                stack.push(a);
            }
            leaf => out.push(leaf.clone()),
        }
    }
    out
}

fn any_leaf(f: &Formula, want: &dyn Fn(&Formula) -> bool) -> bool {
    match f {
        Formula::Tensor(a, b) => any_leaf(a, want) || any_leaf(b, want),
        leaf => want(leaf),
    }
}

fn nf_list(fam: &TeamFamily) -> Vec<Formula> {
    fam.teams().iter().map(theta_star).collect()
}

fn index(fam: &TeamFamily, t: &Team) -> usize {
    fam.index_of(t).unwrap_or_else(|| panic!("team {t} missing from the family"))
}

impl<'l> NfGen<'l> {
    fn new(n: Domain, limits: &'l Limits) -> Self {
        NfGen { gen: Gen::new("h"), n, limits, fams: HashMap::new(), rows: HashMap::new() }
    }

    fn guard(&self, d: &D) -> Result<()> {
        if d.size() > self.limits.max_nodes {
            return Err(Error::Guard(format!("derivation exceeds {} nodes", self.limits.max_nodes)));
        }
        Ok(())
    }

    /// `⟦f⟧` on `dom ⊆ n`; inputs were validated, so this cannot fail.
    fn fam_on(&mut self, f: &Formula, dom: &Domain) -> TeamFamily {
        let key = (f.clone(), dom.clone());
        if let Some(x) = self.fams.get(&key) {
            return x.clone();
        }
        let x = satisfying_teams(f, dom, EvalMode::Lax, self.limits).expect("validated formula and domain");
        self.fams.insert(key, x.clone());
        x
    }

    fn fam(&mut self, f: &Formula) -> TeamFamily {
        let n = self.n.clone();
        self.fam_on(f, &n)
    }

    fn row_of(&mut self, dom: &Domain, f: &Formula) -> u64 {
        let map = self
            .rows
            .entry(dom.clone())
            .or_insert_with(|| (0..1u64 << dom.len()).map(|r| (row_conj_ne(dom, r), r)).collect());
        *map.get(f).unwrap_or_else(|| panic!("{f} is not a row conjunction over {dom}"))
    }

    // -- disjunctions ------------------------------------------------------

    /// From `list[i]` to `⋁ list`.
    fn inject(&mut self, i: usize, list: &[Formula], d: D) -> D {
        let k = list.len();
        if k == 1 {
            return d;
        }
        if i == k - 1 {
            bor_i_r(Formula::big_or(list[..k - 1].iter().cloned()), d)
        } else {
            let inner = self.inject(i, &list[..k - 1], d);
            bor_i_l(inner, list[k - 1].clone())
        }
    }

    /// Case analysis on `d: ⋁ list`, each case concluding `theta`.
    fn case(&mut self, d: D, list: &[Formula], theta: &Formula, branch: &mut Branch<'_>) -> D {
        let k = list.len();
        match k {
            0 => ex_falso(d, theta.clone()),
            1 => branch(self, 0, d),
            _ => {
                let (l1, h1) = self.gen.hyp(Formula::big_or(list[..k - 1].iter().cloned()));
                let e1 = close(h1.clone(), self.case(h1, &list[..k - 1], theta, branch));
                let (l2, h2) = self.gen.hyp(list[k - 1].clone());
                let e2 = close(h2.clone(), branch(self, k - 1, h2));
                Derivation::node(Rule::BorE, theta.clone(), vec![d, e1, e2], vec![l1, l2], Default::default())
            }
        }
    }

    /// `NF(from) ⊢ NF(to)` for `from ⊆ to`.
    fn subset_inject(&mut self, d: D, from: &TeamFamily, to: &TeamFamily) -> D {
        if from == to {
            return d;
        }
        let (lf, lt) = (nf_list(from), nf_list(to));
        let theta = Formula::big_or(lt.iter().cloned());
        self.case(d, &lf, &theta, &mut |s, i, h| s.inject(index(to, &from.teams()[i]), &lt, h))
    }

    // -- tensors of rows ---------------------------------------------------

    fn sub_r(&mut self, d: D, body: impl FnOnce(&mut Self, D) -> D) -> D {
        sub_right(self, d, body)
    }

    fn sub_l(&mut self, d: D, body: impl FnOnce(&mut Self, D) -> D) -> D {
        sub_left(self, d, body)
    }

    /// Rebracket a tensor into a left comb, keeping the component order.
    fn comb(&mut self, d: D) -> D {
        let Formula::Tensor(a, _) = &d.conclusion else { return d };
        let d = if matches!(**a, Formula::Tensor(..)) { self.sub_l(d, |s, h| s.comb(h)) } else { d };
        self.append(d)
    }

    /// `C⊗B` with `C` a comb, to a comb.
    fn append(&mut self, d: D) -> D {
        let Formula::Tensor(_, b) = &d.conclusion else { return d };
        let Formula::Tensor(b1, _) = &**b else { return d };
        let nested = matches!(**b1, Formula::Tensor(..));
        let d = ass(d);
        let d = if nested { self.sub_l(d, |s, h| s.append(h)) } else { d };
        self.append(d)
    }

    /// Applies `op` to the comb prefix `depth` levels down the left spine.
    fn at_depth(&mut self, d: D, depth: usize, op: &mut LeafFn<'_>) -> D {
        if depth == 0 {
            op(self, d)
        } else {
            self.sub_l(d, |s, h| s.at_depth(h, depth - 1, op))
        }
    }

    /// Swaps components `i` and `i+1` of a comb with `len` components.
    fn swap(&mut self, d: D, i: usize, len: usize) -> D {
        self.at_depth(d, len - i - 2, &mut |s, h| {
            if i == 0 {
                com(h)
            } else {
                ass(s.sub_r(ass_rev(h), |_, x| com(x)))
            }
        })
    }

    /// Merges equal components `i` and `i+1` of a comb with `len` components.
    fn contract(&mut self, d: D, i: usize, len: usize) -> D {
        self.at_depth(d, len - i - 2, &mut |s, h| {
            if i == 0 {
                s.contract_pair(h)
            } else {
                let t = ass_rev(h);
                s.sub_r(t, |s, x| s.contract_pair(x))
            }
        })
    }

    /// `(α∧NE)⊗(α∧NE) ⊢ α∧NE` for a literal conjunction `α`: `α` by
    /// `TensorE_minus`, `NE` by [`Self::ne_contract`].
    fn contract_pair(&mut self, d: D) -> D {
        share(self, d, |s, h| {
            let a = tensor_e(s, h.clone(), |_, x| and_e_l(x), |_, x| and_e_l(x));
            let t = s.sub_r(h, |_, x| and_e_r(x));
            let t = s.sub_l(t, |_, x| and_e_r(x));
            let ne = s.ne_contract(t);
            and_i(a, ne)
        })
    }

    /// `NE⊗NE ⊢ NE`, by cases on `⊥∨NE`: the `⊥` case is contradictory since
    /// `⊥∧(NE⊗NE)` distributes to `(⊥∧NE)⊗(⊥∧NE)`.
    fn ne_contract(&mut self, d: D) -> D {
        bor_e(
            self,
            nei(),
            move |_, h| {
                let t = dstr_star(and_i(h, d));
                ex_falso(zero_ctr(t), Formula::Ne)
            },
            |_, h| h,
        )
    }

    /// Canonical `Θ*_Y` from any tensor of row conjunctions over `dom` and
    /// `⊥` components, together with `Y`.
    fn normalize(&mut self, d: D, dom: &Domain) -> (D, Team) {
        let mut d = self.comb(d);
        let mut ls = leaves(&d.conclusion);
        while ls.len() > 1 {
            let Some(j) = ls.iter().rposition(|l| *l == Formula::Bot) else { break };
            let len = ls.len();
            for k in j..len - 1 {
                d = self.swap(d, k, len);
                ls.swap(k, k + 1);
            }
            d = bot_e(d);
            ls.pop();
        }
        if ls == [Formula::Bot] {
            return (d, Team::empty(dom.clone()));
        }
        let mut keys: Vec<u64> = ls.iter().map(|l| self.row_of(dom, l)).collect();
        let len = keys.len();
        for p in 0..len {
            let q = (p..len).min_by_key(|&q| keys[q]).expect("nonempty range");
            for j in (p..q).rev() {
                d = self.swap(d, j, len);
                keys.swap(j, j + 1);
            }
        }
        let mut i = 0;
        while i + 1 < keys.len() {
            if keys[i] == keys[i + 1] {
                d = self.contract(d, i, keys.len());
                keys.remove(i + 1);
            } else {
                i += 1;
            }
        }
        let team = Team::new(dom.clone(), keys).expect("rows fit the domain");
        (d, team)
    }

    /// Reorders a comb into the comb of `target`, a permutation of its components.
    fn rearrange(&mut self, mut d: D, target: &[Formula]) -> D {
        let mut cur = leaves(&d.conclusion);
        let len = cur.len();
        for p in 0..len {
            let q = (p..len).find(|&q| cur[q] == target[p]).expect("target is a permutation");
            for j in (p..q).rev() {
                d = self.swap(d, j, len);
                cur.swap(j, j + 1);
            }
        }
        d
    }

    /// A comb split as `comb(first) ⊗ comb(last k)`.
    fn peel(&mut self, d: D, k: usize) -> D {
        if k == 1 {
            return d;
        }
        let d = self.sub_l(d, |s, h| s.peel(h, k - 1));
        ass_rev(d)
    }

    /// Applies `f` to every tensor component satisfying `want`.
    fn map_leaves(&mut self, d: D, want: &dyn Fn(&Formula) -> bool, f: &mut LeafFn<'_>) -> D {
        if !any_leaf(&d.conclusion, want) {
            return d;
        }
        let Formula::Tensor(a, b) = &d.conclusion else { return f(self, d) };
        let (ha, hb) = (any_leaf(a, want), any_leaf(b, want));
        let d = if ha { self.sub_l(d, |s, h| s.map_leaves(h, want, f)) } else { d };
        if hb {
            self.sub_r(d, |s, h| s.map_leaves(h, want, f))
        } else {
            d
        }
    }

    /// `Θ*_{X∪Y} ⊢ Θ*_X ⊗ Θ*_Y`.
    fn split_team(&mut self, d: D, x: &Team, y: &Team) -> D {
        match (x.is_empty(), y.is_empty()) {
            (true, true) => return tensor_w(d),
            (true, false) => return com(tensor_i(d, Formula::Bot)),
            (false, true) => return tensor_i(d, Formula::Bot),
            _ => {}
        }
        let dom = x.domain().clone();
        let both: Vec<Formula> =
            x.rows().iter().filter(|r| y.contains_row(**r)).map(|&r| row_conj_ne(&dom, r)).collect();
        let d = self.map_leaves(d, &|l| both.contains(l), &mut |_, h| tensor_w(h));
        let d = self.comb(d);
        let target: Vec<Formula> =
            x.rows().iter().chain(y.rows()).map(|&r| row_conj_ne(&dom, r)).collect();
        let d = self.rearrange(d, &target);
        self.peel(d, y.len())
    }

    /// Distributes the tensor over every `∨` component and hands each
    /// resulting `∨`-free tensor to `cont`.
    fn split(&mut self, d: D, theta: &Formula, cont: &mut LeafFn<'_>) -> D {
        let is_or = |f: &Formula| matches!(f, Formula::BoolOr(..));
        if let Formula::BoolOr(a, b) = &d.conclusion {
            let (l1, h1) = self.gen.hyp((**a).clone());
            let e1 = close(h1.clone(), self.split(h1, theta, cont));
            let (l2, h2) = self.gen.hyp((**b).clone());
            let e2 = close(h2.clone(), self.split(h2, theta, cont));
            return Derivation::node(Rule::BorE, theta.clone(), vec![d, e1, e2], vec![l1, l2], Default::default());
        }
        if !any_leaf(&d.conclusion, &is_or) {
            return cont(self, d);
        }
        let mut d = self.comb(d);
        let ls = leaves(&d.conclusion);
        let len = ls.len();
        let j = ls.iter().position(is_or).expect("a disjunctive component");
        for k in j..len - 1 {
            d = self.swap(d, k, len);
        }
        let d = dstr_tensor_bor(d);
        self.split(d, theta, cont)
    }

    // -- atoms -------------------------------------------------------------

    fn row_with(&self, m: &Domain, k: &Domain, var: usize, row: u64, value: bool) -> u64 {
        let mut bits = row_bits(m.len(), row);
        bits.insert(k.position(var).expect("variable in the larger domain"), value);
        row_from_bits(&bits)
    }

    /// Conjunction `target` from the conjuncts of `d`.
    fn conj_rebuild(&mut self, d: D, target: &Formula) -> D {
        fn find(f: &Formula, t: &Formula, trail: &mut Vec<bool>) -> bool {
            if f == t {
                return true;
            }
            if let Formula::And(a, b) = f {
                for (side, g) in [(false, a), (true, b)] {
                    trail.push(side);
                    if find(g, t, trail) {
                        return true;
                    }
                    trail.pop();
                }
            }
            false
        }
        fn build(h: &D, t: &Formula) -> D {
            let mut trail = Vec::new();
            if find(&h.conclusion, t, &mut trail) {
                return trail.into_iter().fold(h.clone(), |d, right| if right { and_e_r(d) } else { and_e_l(d) });
            }
            let (a, b) = and_parts(t).unwrap_or_else(|| panic!("{t} is not available from {}", h.conclusion));
            and_i(build(h, a), build(h, b))
        }
        if d.conclusion == *target {
            return d;
        }
        share(self, d, |_, h| build(&h, target))
    }

    /// A row conjunction over `m`, split by the value of `var` into rows over
    /// `k = m ∪ {var}`: `E_t ∨ E_f ∨ (E_t⊗E_f)`.
    fn expand_row(&mut self, d: D, m: &Domain, k: &Domain, var: usize) -> D {
        let row = self.row_of(m, &d.conclusion);
        let et = row_conj_ne(k, self.row_with(m, k, var, row, true));
        let ef = row_conj_ne(k, self.row_with(m, k, var, row, false));
        let out = vec![et.clone(), ef.clone(), Formula::tensor(et.clone(), ef.clone())];
        let theta = Formula::big_or(out.iter().cloned());
        share(self, d, |s, h| {
            let alpha = and_e_l(h.clone());
            let split = dstr_ne(and_i(and_e_r(h), em0(var)), 2);
            let ins = [Formula::Var(var), Formula::NegVar(var)].map(|l| Formula::and(Formula::Ne, l));
            let list = vec![ins[0].clone(), ins[1].clone(), Formula::tensor(ins[0].clone(), ins[1].clone())];
            s.case(split, &list, &theta, &mut |s, i, h| match i {
                0 | 1 => {
                    let e = s.conj_rebuild(and_i(alpha.clone(), h), &out[i]);
                    s.inject(i, &out, e)
                }
                _ => {
                    let t = dstr_star(and_i(alpha.clone(), h));
                    let t = s.sub_r(t, |s, x| s.conj_rebuild(x, &ef));
                    let t = s.sub_l(t, |s, x| s.conj_rebuild(x, &et));
                    s.inject(2, &out, t)
                }
            })
        })
    }

    /// `NF_m(F) ⊢ NF_k(F')`, where `F'` holds the teams on `k = m ∪ {var}`
    /// whose restriction to `m` is in `F`.
    fn extend(&mut self, f: &Formula, d: D, m: &Domain, var: usize) -> D {
        let k = m.union(&Domain::new([var]));
        let (fm, fk) = (self.fam_on(f, m), self.fam_on(f, &k));
        let (lm, lk) = (nf_list(&fm), nf_list(&fk));
        let theta = Formula::big_or(lk.iter().cloned());
        self.case(d, &lm, &theta, &mut |s, i, h| {
            if fm.teams()[i].is_empty() {
                return s.inject(index(&fk, &Team::empty(k.clone())), &lk, h);
            }
            let t = s.map_leaves(h, &|_| true, &mut |s, r| s.expand_row(r, m, &k, var));
            s.split(t, &theta, &mut |s, leaf| {
                let (e, y) = s.normalize(leaf, &k);
                s.inject(index(&fk, &y), &lk, e)
            })
        })
    }

    /// `NF_k(F') ⊢ NF_m(F)`, the converse of [`Self::extend`].
    fn restrict(&mut self, f: &Formula, d: D, k: &Domain, m: &Domain) -> D {
        let (fm, fk) = (self.fam_on(f, m), self.fam_on(f, k));
        let (lm, lk) = (nf_list(&fm), nf_list(&fk));
        let theta = Formula::big_or(lm.iter().cloned());
        self.case(d, &lk, &theta, &mut |s, i, h| {
            if fk.teams()[i].is_empty() {
                return s.inject(index(&fm, &Team::empty(m.clone())), &lm, h);
            }
            let t = s.map_leaves(h, &|_| true, &mut |s, r| {
                let row = s.row_of(k, &r.conclusion);
                let y = Team::new(k.clone(), [row]).and_then(|t| t.restrict(m)).expect("row restricts");
                let target = row_conj_ne(m, y.rows()[0]);
                s.conj_rebuild(r, &target)
            });
            let (e, y) = s.normalize(t, m);
            s.inject(index(&fm, &y), &lm, e)
        })
    }

    /// The variable an atom is first normalised over, and the order in which
    /// the remaining variables of the domain are added.
    fn atom_chain(&self, f: &Formula) -> (usize, Vec<usize>) {
        let base = match f {
            Formula::Var(i) | Formula::NegVar(i) => *i,
            _ => self.n.indices()[0],
        };
        (base, self.n.indices().iter().copied().filter(|&v| v != base).collect())
    }

    fn atom_fwd(&mut self, f: &Formula, d: D) -> D {
        let (base, rest) = self.atom_chain(f);
        let mut dom = Domain::new([base]);
        let nf1 = strong_disjunction(&self.fam_on(f, &dom));
        let mut d = match f {
            Formula::Ne => {
                let split = dstr_ne(and_i(d, em0(base)), 2);
                let ins = [Formula::Var(base), Formula::NegVar(base)].map(|l| Formula::and(Formula::Ne, l));
                let list = vec![ins[0].clone(), ins[1].clone(), Formula::tensor(ins[0].clone(), ins[1].clone())];
                let out = nf_list(&self.fam_on(f, &dom));
                self.case(split, &list, &nf1, &mut |s, i, h| {
                    let e = if i < 2 {
                        s.conj_rebuild(h, &out[i])
                    } else {
                        let t = s.sub_r(h, |s, x| s.conj_rebuild(x, &out[1]));
                        s.sub_l(t, |s, x| s.conj_rebuild(x, &out[0]))
                    };
                    s.inject(i, &out, e)
                })
            }
            lit => {
                // p ⊢ p∧(⊥∨NE) ⊢ (p∧⊥)∨(p∧NE) ⊢ ⊥∨(p∧NE)
                let with_ne = Formula::and(lit.clone(), Formula::Ne);
                let t = and_i(d, nei());
                let dist = Formula::bor(Formula::and(lit.clone(), Formula::Bot), with_ne.clone());
                let t = derived(Rule::DstrAndBor, t, dist);
                bor_e(self, t, move |_, h| bor_i_l(and_e_r(h), with_ne), |_, h| bor_i_r(Formula::Bot, h))
            }
        };
        for v in rest {
            d = self.extend(f, d, &dom, v);
            dom = dom.union(&Domain::new([v]));
        }
        d
    }

    fn atom_bwd(&mut self, f: &Formula, d: D) -> D {
        let (base, rest) = self.atom_chain(f);
        let mut doms = vec![Domain::new([base])];
        for v in &rest {
            let next = doms.last().expect("nonempty").union(&Domain::new([*v]));
            doms.push(next);
        }
        let mut d = d;
        for w in doms.windows(2).rev() {
            d = self.restrict(f, d, &w[1], &w[0]);
        }
        match f {
            Formula::Ne => {
                let list = nf_list(&self.fam_on(f, &doms[0]));
                self.case(d, &list, &Formula::Ne, &mut |s, i, h| {
                    if i < 2 {
                        and_e_r(h)
                    } else {
                        let t = s.sub_r(h, |_, x| and_e_r(x));
                        let t = s.sub_l(t, |_, x| and_e_r(x));
                        s.ne_contract(t)
                    }
                })
            }
            lit => {
                let lit2 = lit.clone();
                bor_e(self, d, move |_, h| derived(Rule::ExFalsoMinus, h, lit2), |_, h| and_e_l(h))
            }
        }
    }

    // -- connectives -------------------------------------------------------

    /// `f ⊢ NF(f)`.
    fn fwd(&mut self, f: &Formula, d: D) -> D {
        use Formula::*;
        let ff = self.fam(f);
        match f {
            Bot => d,
            Var(_) | NegVar(_) | Ne => self.atom_fwd(f, d),
            BoolOr(a, b) => {
                let (fa, fb) = (self.fam(a), self.fam(b));
                let (l, h1) = self.gen.hyp((**a).clone());
                let e1 = self.fwd(a, h1.clone());
                let e1 = close(h1, self.subset_inject(e1, &fa, &ff));
                let (r, h2) = self.gen.hyp((**b).clone());
                let e2 = self.fwd(b, h2.clone());
                let e2 = close(h2, self.subset_inject(e2, &fb, &ff));
                let theta = e1.conclusion.clone();
                Derivation::node(Rule::BorE, theta, vec![d, e1, e2], vec![l, r], Default::default())
            }
            Tensor(a, b) => {
                let (fa, fb) = (self.fam(a), self.fam(b));
                let d = self.sub_l(d, |s, h| s.fwd(a, h));
                let d = self.sub_r(d, |s, h| s.fwd(b, h));
                if fb.is_empty() {
                    zero_ctr(d)
                } else if fa.is_empty() {
                    zero_ctr(com(d))
                } else {
                    let lf = nf_list(&ff);
                    let theta = Formula::big_or(lf.iter().cloned());
                    let n = self.n.clone();
                    self.split(d, &theta, &mut |s, t| {
                        let (e, y) = s.normalize(t, &n);
                        s.inject(index(&ff, &y), &lf, e)
                    })
                }
            }
            And(a, b) => {
                let (fa, fb) = (self.fam(a), self.fam(b));
                let (la, lb, lf) = (nf_list(&fa), nf_list(&fb), nf_list(&ff));
                let theta = Formula::big_or(lf.iter().cloned());
                let n = self.n.clone();
                let pair = share(self, d, |s, h| {
                    let pa = s.fwd(a, and_e_l(h.clone()));
                    let pb = s.fwd(b, and_e_r(h));
                    and_i(pa, pb)
                });
                cut(self, pair, |s, hp| {
                    s.case(and_e_l(hp.clone()), &la, &theta, &mut |s, i, hx| {
                        s.case(and_e_r(hp.clone()), &lb, &theta, &mut |s, j, hy| {
                            let (x, y) = (&fa.teams()[i], &fb.teams()[j]);
                            let both = and_i(hx.clone(), hy);
                            if x == y {
                                s.inject(index(&ff, x), &lf, and_e_l(both))
                            } else {
                                ex_falso(zero_i(both, &n), theta.clone())
                            }
                        })
                    })
                })
            }
            other => unreachable!("{other} passed validation"),
        }
    }

    /// `NF(f) ⊢ f`.
    fn bwd(&mut self, f: &Formula, d: D) -> D {
        use Formula::*;
        let ff = self.fam(f);
        let lf = nf_list(&ff);
        match f {
            Bot => d,
            Var(_) | NegVar(_) | Ne => self.atom_bwd(f, d),
            BoolOr(a, b) => {
                let (fa, fb) = (self.fam(a), self.fam(b));
                let (la, lb) = (nf_list(&fa), nf_list(&fb));
                let (na, nb) = (strong_disjunction(&fa), strong_disjunction(&fb));
                let theta = Formula::bor(na.clone(), nb.clone());
                let t = self.case(d, &lf, &theta, &mut |s, i, h| {
                    let x = &ff.teams()[i];
                    match fa.index_of(x) {
                        Some(k) => bor_i_l(s.inject(k, &la, h), nb.clone()),
                        None => bor_i_r(na.clone(), s.inject(index(&fb, x), &lb, h)),
                    }
                });
                let (l, h1) = self.gen.hyp(na);
                let e1 = self.bwd(a, h1.clone());
                let e1 = close(h1, bor_i_l(e1, (**b).clone()));
                let (r, h2) = self.gen.hyp(nb);
                let e2 = self.bwd(b, h2.clone());
                let e2 = close(h2, bor_i_r((**a).clone(), e2));
                Derivation::node(Rule::BorE, f.clone(), vec![t, e1, e2], vec![l, r], Default::default())
            }
            Tensor(a, b) => {
                let (fa, fb) = (self.fam(a), self.fam(b));
                let (la, lb) = (nf_list(&fa), nf_list(&fb));
                let theta = Formula::tensor(strong_disjunction(&fa), strong_disjunction(&fb));
                let t = self.case(d, &lf, &theta, &mut |s, i, h| {
                    let z = &ff.teams()[i];
                    let (x, y) = fa
                        .teams()
                        .iter()
                        .find_map(|x| {
                            fb.teams().iter().find(|y| x.union(y).ok().as_ref() == Some(z)).map(|y| (x, y))
                        })
                        .expect("every member of a tensor family splits");
                    let sp = s.split_team(h, x, y);
                    let (ix, iy) = (index(&fa, x), index(&fb, y));
                    let sp = s.sub_l(sp, |s, u| s.inject(ix, &la, u));
                    s.sub_r(sp, |s, v| s.inject(iy, &lb, v))
                });
                let t = self.sub_l(t, |s, h| s.bwd(a, h));
                self.sub_r(t, |s, h| s.bwd(b, h))
            }
            And(a, b) => {
                let (fa, fb) = (self.fam(a), self.fam(b));
                share(self, d, |s, h| {
                    let ia = s.subset_inject(h.clone(), &ff, &fa);
                    let ib = s.subset_inject(h, &ff, &fb);
                    let x = s.bwd(a, ia);
                    let y = s.bwd(b, ib);
                    and_i(x, y)
                })
            }
            other => unreachable!("{other} passed validation"),
        }
    }
}
