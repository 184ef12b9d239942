//! Test-side reference implementations: a brute-force evaluator that computes
//! `⟦φ⟧` by plain set operations over explicit teams, and random generators.

#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use teamlog::{Domain, Formula, Team, TeamFamily};

/// A valuation of the universe's variables, in universe order.
pub type Row = Vec<bool>;
/// A team as an explicit set of valuations.
pub type OTeam = BTreeSet<Row>;

pub struct Universe {
    pub vars: Vec<usize>,
    pub rows: Vec<Row>,
    pub teams: Vec<OTeam>,
}

impl Universe {
    pub fn new(vars: &[usize]) -> Universe {
        let m = vars.len();
        let rows: Vec<Row> = (0..1u32 << m).map(|r| (0..m).map(|k| r >> k & 1 == 1).collect()).collect();
        // Four variables give 65536 teams; only the row-level checks are used there.
        let count = if rows.len() <= 8 { 1u64 << rows.len() } else { 0 };
        let teams = (0..count)
            .map(|mask| rows.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, r)| r.clone()).collect())
            .collect();
        Universe { vars: vars.to_vec(), rows, teams }
    }

    fn pos(&self, v: usize) -> usize {
        self.vars.iter().position(|x| *x == v).unwrap_or_else(|| panic!("p{v} outside the oracle universe"))
    }

    fn value(&self, row: &Row, v: usize) -> bool {
        row[self.pos(v)]
    }

    /// Truth of a classical (extended) formula at one valuation.
    pub fn classical(&self, row: &Row, f: &Formula) -> bool {
        use Formula::*;
        match f {
            Var(i) => self.value(row, *i),
            NegVar(i) => !self.value(row, *i),
            Bot => false,
            Top => true,
            And(a, b) => self.classical(row, a) && self.classical(row, b),
            Tensor(a, b) => self.classical(row, a) || self.classical(row, b),
            ExtNeg(a) => !self.classical(row, a),
            _ => panic!("`{f}` is not classical"),
        }
    }

    fn key(&self, row: &Row, k: &Keys) -> Vec<bool> {
        match k {
            Keys::Vars(vs) => vs.iter().map(|v| self.value(row, *v)).collect(),
            Keys::Formulas(fs) => fs.iter().map(|f| self.classical(row, f)).collect(),
            Keys::Nothing => Vec::new(),
        }
    }

    /// `x ⊨ f` for an atom `f`, straight from the definition.
    pub fn atom(&self, x: &OTeam, f: &Formula) -> Option<bool> {
        use Formula::*;
        use Keys::*;
        let (z, a, b, kind) = match f {
            Var(_) | NegVar(_) => return Some(x.iter().all(|r| self.classical(r, f))),
            ExtNeg(a) => return Some(x.iter().all(|r| !self.classical(r, a))),
            Dep(xs, y) => (Nothing, Vars(xs.clone()), Vars(vec![*y]), 'd'),
            ExtDep(xs, y) => (Nothing, Formulas(xs.clone()), Formulas(vec![(**y).clone()]), 'd'),
            Indep(xs, ys) => (Nothing, Vars(xs.clone()), Vars(ys.clone()), 'c'),
            ExtIndep(xs, ys) => (Nothing, Formulas(xs.clone()), Formulas(ys.clone()), 'c'),
            CondIndep(zs, xs, ys) => (Vars(zs.clone()), Vars(xs.clone()), Vars(ys.clone()), 'c'),
            ExtCondIndep(zs, xs, ys) => (Formulas(zs.clone()), Formulas(xs.clone()), Formulas(ys.clone()), 'c'),
            Incl(xs, ys) if xs.len() == ys.len() => (Nothing, Vars(xs.clone()), Vars(ys.clone()), 'i'),
            ExtIncl(xs, ys) if xs.len() == ys.len() => (Nothing, Formulas(xs.clone()), Formulas(ys.clone()), 'i'),
            Incl(..) | ExtIncl(..) => return Some(x.is_empty()),
            _ => return None,
        };
        let kz = |r: &Row| self.key(r, &z);
        let ka = |r: &Row| self.key(r, &a);
        let kb = |r: &Row| self.key(r, &b);
        Some(match kind {
            // Rows agreeing on the arguments agree on the value.
            'd' => x.iter().all(|s| x.iter().all(|t| ka(s) != ka(t) || kb(s) == kb(t))),
            // Any two rows with the same condition have a witness mixing their values.
            'c' => x.iter().all(|s| {
                x.iter().all(|t| kz(s) != kz(t) || x.iter().any(|u| kz(u) == kz(s) && ka(u) == ka(s) && kb(u) == kb(t)))
            }),
            // Every row's left tuple appears as some row's right tuple.
            _ => x.iter().all(|s| x.iter().any(|t| kb(t) == ka(s))),
        })
    }

    /// `⟦f⟧` on this universe.
    pub fn models(&self, f: &Formula, strict: bool) -> BTreeSet<OTeam> {
        use Formula::*;
        let all = || self.teams.iter().cloned();
        match f {
            Bot => [OTeam::new()].into(),
            Top => all().collect(),
            Ne => all().filter(|t| !t.is_empty()).collect(),
            And(a, b) => {
                let (x, y) = (self.models(a, strict), self.models(b, strict));
                x.intersection(&y).cloned().collect()
            }
            BoolOr(a, b) => {
                let (x, y) = (self.models(a, strict), self.models(b, strict));
                x.union(&y).cloned().collect()
            }
            BoolNeg(a) => {
                let x = self.models(a, strict);
                all().filter(|t| !x.contains(t)).collect()
            }
            Tensor(a, b) => {
                let (x, y) = (self.models(a, strict), self.models(b, strict));
                let mut out = BTreeSet::new();
                for s in &x {
                    for t in &y {
                        if !strict || s.is_disjoint(t) {
                            out.insert(s.union(t).cloned().collect());
                        }
                    }
                }
                out
            }
            NeOr(a, b) => {
                let (x, y) = (self.models(a, strict), self.models(b, strict));
                let mut out: BTreeSet<OTeam> = [OTeam::new()].into();
                for s in x.iter().filter(|s| !s.is_empty()) {
                    for t in y.iter().filter(|t| !t.is_empty()) {
                        out.insert(s.union(t).cloned().collect());
                    }
                }
                out
            }
            Might(a) => {
                let x = self.models(a, strict);
                all().filter(|t| t.is_empty() || x.iter().any(|s| !s.is_empty() && s.is_subset(t))).collect()
            }
            LinImp(a, b) => {
                let (x, y) = (self.models(a, strict), self.models(b, strict));
                all().filter(|t| x.iter().all(|s| y.contains(&t.union(s).cloned().collect::<OTeam>()))).collect()
            }
            _ => all().filter(|t| self.atom(t, f).expect("atom")).collect(),
        }
    }

    pub fn eval(&self, x: &OTeam, f: &Formula, strict: bool) -> bool {
        self.models(f, strict).contains(x)
    }

    /// The first team (by size, then row order) satisfying all of `gamma` but not `psi`.
    pub fn entails(&self, gamma: &[Formula], psi: &Formula) -> Option<OTeam> {
        let prem: Vec<BTreeSet<OTeam>> = gamma.iter().map(|g| self.models(g, false)).collect();
        let concl = self.models(psi, false);
        self.teams
            .iter()
            .filter(|t| prem.iter().all(|p| p.contains(*t)) && !concl.contains(*t))
            .min_by_key(|t| t.len())
            .cloned()
    }

    pub fn team_of_rows(&self, rows: &[Vec<u8>]) -> OTeam {
        rows.iter().map(|r| r.iter().map(|b| *b == 1).collect()).collect()
    }

    pub fn to_team(&self, x: &OTeam) -> Team {
        let rows: Vec<Vec<u8>> = x.iter().map(|r| r.iter().map(|b| u8::from(*b)).collect()).collect();
        Team::from_bit_rows(Domain::new(self.vars.iter().copied()), &rows).unwrap()
    }

    pub fn of_team(&self, t: &Team) -> OTeam {
        assert_eq!(t.domain().indices(), &self.vars[..]);
        t.bit_rows().into_iter().map(|r| r.into_iter().map(|b| b == 1).collect()).collect()
    }

    pub fn of_family(&self, p: &TeamFamily) -> BTreeSet<OTeam> {
        p.teams().iter().map(|t| self.of_team(t)).collect()
    }
}

enum Keys {
    Vars(Vec<usize>),
    Formulas(Vec<Formula>),
    Nothing,
}

/// Closure flags of a family given as explicit teams on a universe.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Flags {
    pub flat: bool,
    pub downward_closed: bool,
    pub union_closed: bool,
    pub empty_team: bool,
}

pub fn flags(u: &Universe, p: &BTreeSet<OTeam>) -> Flags {
    let downward_closed = p.iter().all(|x| u.teams.iter().filter(|y| y.is_subset(x)).all(|y| p.contains(y)));
    let nonempty: Vec<&OTeam> = p.iter().filter(|x| !x.is_empty()).collect();
    let union_closed = nonempty.iter().all(|a| nonempty.iter().all(|b| p.contains(&a.union(b).cloned().collect::<OTeam>())));
    let empty_team = p.contains(&OTeam::new());
    let flat = u.teams.iter().all(|x| {
        p.contains(x) == x.iter().all(|r| p.contains(&[r.clone()].into_iter().collect::<OTeam>()))
    });
    Flags { flat, downward_closed, union_closed, empty_team }
}

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Building blocks a random formula may use.
#[derive(Debug, Clone, Default)]
pub struct Lang {
    pub vars: Vec<usize>,
    pub bot: bool,
    pub top: bool,
    pub ne: bool,
    pub dep: bool,
    pub ind: bool,
    pub inc: bool,
    pub and: bool,
    pub tensor: bool,
    pub ne_or: bool,
    pub bool_or: bool,
    pub lin_imp: bool,
    pub might: bool,
    pub bool_neg: bool,
}

impl Lang {
    pub fn classical(vars: &[usize]) -> Lang {
        Lang { vars: vars.to_vec(), bot: true, and: true, tensor: true, ..Lang::default() }
    }
    pub fn pt_plus(vars: &[usize]) -> Lang {
        Lang { ne: true, bool_or: true, ..Lang::classical(vars) }
    }
    pub fn pu(vars: &[usize]) -> Lang {
        Lang { ne_or: true, ..Lang::classical(vars) }
    }
    pub fn pd_plus(vars: &[usize]) -> Lang {
        Lang { dep: true, bool_or: true, lin_imp: true, ..Lang::classical(vars) }
    }
    pub fn ne_free(vars: &[usize]) -> Lang {
        Lang { top: true, dep: true, ind: true, inc: true, ne_or: true, bool_or: true, might: true, ..Lang::classical(vars) }
    }
}

fn pick_vars(rng: &mut StdRng, vars: &[usize], k: usize) -> Vec<usize> {
    (0..k).map(|_| *vars.choose(rng).unwrap()).collect()
}

pub fn random_atom(rng: &mut StdRng, l: &Lang) -> Formula {
    loop {
        let v = *l.vars.choose(rng).unwrap();
        match rng.gen_range(0..8) {
            0 | 1 => return Formula::Var(v),
            2 | 3 => return Formula::NegVar(v),
            4 if l.bot => return Formula::Bot,
            4 if l.top => return Formula::Top,
            5 if l.ne => return Formula::Ne,
            5 if l.top => return Formula::Top,
            6 if l.dep => {
                let k = rng.gen_range(1..=2);
                return Formula::Dep(pick_vars(rng, &l.vars, k), v);
            }
            7 if l.ind => return Formula::Indep(pick_vars(rng, &l.vars, 1), pick_vars(rng, &l.vars, 1)),
            7 if l.inc => return Formula::Incl(pick_vars(rng, &l.vars, 1), pick_vars(rng, &l.vars, 1)),
            _ => {}
        }
    }
}

pub fn random_formula(rng: &mut StdRng, l: &Lang, depth: usize) -> Formula {
    if depth == 0 || rng.gen_range(0..4) == 0 {
        return random_atom(rng, l);
    }
    let mut ops: Vec<u8> = Vec::new();
    for (on, code) in [(l.and, 0), (l.tensor, 1), (l.ne_or, 2), (l.bool_or, 3), (l.lin_imp, 4), (l.might, 5), (l.bool_neg, 6)] {
        if on {
            ops.push(code);
        }
    }
    let op = *ops.choose(rng).unwrap();
    let sub = |rng: &mut StdRng| random_formula(rng, l, depth - 1);
    match op {
        0 => Formula::and(sub(rng), sub(rng)),
        1 => Formula::tensor(sub(rng), sub(rng)),
        2 => Formula::ne_or(sub(rng), sub(rng)),
        3 => Formula::bor(sub(rng), sub(rng)),
        4 => Formula::lin_imp(sub(rng), sub(rng)),
        5 => Formula::might(sub(rng)),
        _ => Formula::bool_neg(sub(rng)),
    }
}

/// A random classical formula over `vars` using `∧`, `⊗`, literals, `⊥` and `⊤`.
pub fn random_classical(rng: &mut StdRng, vars: &[usize], depth: usize) -> Formula {
    let l = Lang { top: true, ..Lang::classical(vars) };
    random_formula(rng, &l, depth)
}

/// Every team on `u` that is a subset of `x`.
pub fn subteams(u: &Universe, x: &OTeam) -> BTreeSet<OTeam> {
    u.teams.iter().filter(|y| y.is_subset(x)).cloned().collect()
}

/// A random family on `u` closed under the requested conditions.
pub fn closed_family(rng: &mut StdRng, u: &Universe, flat: bool, down: bool, union: bool, empty: bool) -> BTreeSet<OTeam> {
    let mut p: BTreeSet<OTeam> = BTreeSet::new();
    if flat {
        let s: OTeam = u.rows.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect();
        return subteams(u, &s);
    }
    for _ in 0..rng.gen_range(0..=4) {
        p.insert(u.teams.choose(rng).unwrap().clone());
    }
    if empty {
        p.insert(OTeam::new());
    }
    if down {
        let cur: Vec<OTeam> = p.iter().cloned().collect();
        for x in cur {
            p.extend(subteams(u, &x));
        }
    }
    if union {
        loop {
            let cur: Vec<OTeam> = p.iter().filter(|x| !x.is_empty()).cloned().collect();
            let before = p.len();
            for a in &cur {
                for b in &cur {
                    p.insert(a.union(b).cloned().collect());
                }
            }
            if p.len() == before {
                break;
            }
        }
    }
    p
}

pub fn family(u: &Universe, p: &BTreeSet<OTeam>) -> TeamFamily {
    TeamFamily::new(Domain::new(u.vars.iter().copied()), p.iter().map(|x| u.to_team(x))).unwrap()
}

pub fn parse(s: &str) -> Formula {
    teamlog::parse(s).unwrap_or_else(|e| panic!("{s}: {e}"))
}
