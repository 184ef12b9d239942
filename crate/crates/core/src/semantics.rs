//! Team satisfaction, lax and strict, for the full language including the
//! extended atoms over classical arguments.
//!
//! Connectives that only inspect the current team (`∧`, `∨`, `∼`, atoms) are
//! evaluated directly on its rows. Splitting connectives (`⊗`, `⊛`, `▽`, `⊸`)
//! switch to a bitset engine: every subformula is turned into the set of
//! subteams of a fixed universe of rows that satisfy it, one bit per subteam.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::limits::{Limits, MAX_UNIVERSE_ROWS};
use crate::syntax::{variables, Formula};
use crate::teams::{row_value, team_masks, Domain, Team, TeamFamily};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalMode {
    #[default]
    Lax,
    Strict,
}

impl fmt::Display for EvalMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EvalMode::Lax => "lax",
            EvalMode::Strict => "strict",
        })
    }
}

impl FromStr for EvalMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<EvalMode> {
        match s.to_ascii_lowercase().as_str() {
            "lax" => Ok(EvalMode::Lax),
            "strict" => Ok(EvalMode::Strict),
            _ => Err(Error::input(format!("unknown evaluation mode `{s}`"))),
        }
    }
}

/// Strict `⊗` enumerates submasks, so its universe is kept smaller.
const MAX_STRICT_ROWS: usize = 16;
/// `⊸` quantifies over every team of the domain.
const MAX_LIN_IMP_VARS: usize = 4;
/// Pair checks allowed while evaluating `⊸`.
const LIN_IMP_BUDGET: u64 = 1 << 30;

/// A set of subteams of a universe of `k` rows, one bit per subset mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bits {
    k: usize,
    words: Vec<u64>,
}

impl Bits {
    pub fn empty(k: usize) -> Bits {
        Bits { k, words: vec![0; (1usize << k).div_ceil(64)] }
    }

    pub fn full(k: usize) -> Bits {
        let mut b = Bits { k, words: vec![u64::MAX; (1usize << k).div_ceil(64)] };
        b.trim();
        b
    }

    fn trim(&mut self) {
        if self.k < 6 {
            self.words[0] &= (1u64 << (1 << self.k)) - 1;
        }
    }

    pub fn universe_rows(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        1 << self.k
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    #[inline]
    pub fn get(&self, s: usize) -> bool {
        self.words[s >> 6] >> (s & 63) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, s: usize) {
        self.words[s >> 6] |= 1 << (s & 63);
    }

    #[inline]
    pub fn clear(&mut self, s: usize) {
        self.words[s >> 6] &= !(1 << (s & 63));
    }

    pub fn and(mut self, o: &Bits) -> Bits {
        self.words.iter_mut().zip(&o.words).for_each(|(a, b)| *a &= b);
        self
    }

    pub fn or(mut self, o: &Bits) -> Bits {
        self.words.iter_mut().zip(&o.words).for_each(|(a, b)| *a |= b);
        self
    }

    pub fn complement(mut self) -> Bits {
        self.words.iter_mut().for_each(|a| *a = !*a);
        self.trim();
        self
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                (w != 0).then(|| {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    i * 64 + b
                })
            })
        })
    }

    /// Adds every superset of a member.
    fn upward_closure(mut self) -> Bits {
        const LOW: [u64; 6] = [
            0x5555_5555_5555_5555,
            0x3333_3333_3333_3333,
            0x0F0F_0F0F_0F0F_0F0F,
            0x00FF_00FF_00FF_00FF,
            0x0000_FFFF_0000_FFFF,
            0x0000_0000_FFFF_FFFF,
        ];
        for i in 0..self.k {
            if i < 6 {
                for w in self.words.iter_mut() {
                    *w |= (*w & LOW[i]) << (1 << i);
                }
            } else {
                let stride = 1 << (i - 6);
                for block in self.words.chunks_mut(2 * stride) {
                    let (lo, hi) = block.split_at_mut(stride);
                    hi.iter_mut().zip(lo.iter()).for_each(|(h, l)| *h |= l);
                }
            }
        }
        self.trim();
        self
    }
}

/// `{s} ⊨ α` for an extended-classical `α`.
pub fn valuation_satisfies(alpha: &Formula, value: &dyn Fn(usize) -> bool) -> Result<bool> {
    Ok(match alpha {
        Formula::Var(i) => value(*i),
        Formula::NegVar(i) => !value(*i),
        Formula::Bot => false,
        Formula::Top => true,
        Formula::And(a, b) => valuation_satisfies(a, value)? && valuation_satisfies(b, value)?,
        Formula::Tensor(a, b) => valuation_satisfies(a, value)? || valuation_satisfies(b, value)?,
        Formula::ExtNeg(a) => !valuation_satisfies(a, value)?,
        _ => return Err(Error::NotClassical(alpha.to_string())),
    })
}

/// Per-row data for one atom over a fixed list of rows.
enum AtomCheck {
    /// Every member must be a good row.
    Rows(Vec<bool>),
    /// Members agreeing on `x` agree on `y`.
    Dep { x: Vec<u64>, y: Vec<u64> },
    /// Within each `z` class, every `x` value is paired with every `y` value.
    Cind { z: Vec<u64>, x: Vec<u64>, y: Vec<u64> },
    /// Every `x` value of a member is the `y` value of some member.
    Incl { x: Vec<u64>, y: Vec<u64> },
    Never,
}

struct RowCtx<'a> {
    m: usize,
    domain: &'a Domain,
    rows: &'a [u64],
}

impl RowCtx<'_> {
    fn value(&self, r: u64, var: usize) -> bool {
        row_value(self.m, r, self.domain.position(var).expect("variables are checked against the domain"))
    }

    fn var_keys(&self, vars: &[usize]) -> Result<Vec<u64>> {
        if vars.len() > 64 {
            return Err(Error::Unsupported("atom argument lists longer than 64".into()));
        }
        Ok(self.rows.iter().map(|&r| vars.iter().fold(0u64, |acc, v| (acc << 1) | u64::from(self.value(r, *v)))).collect())
    }

    fn formula_keys(&self, fs: &[Formula]) -> Result<Vec<u64>> {
        if fs.len() > 64 {
            return Err(Error::Unsupported("atom argument lists longer than 64".into()));
        }
        self.rows
            .iter()
            .map(|&r| {
                let val = |v: usize| self.value(r, v);
                fs.iter().try_fold(0u64, |acc, a| Ok((acc << 1) | u64::from(valuation_satisfies(a, &val)?)))
            })
            .collect()
    }

    fn atom(&self, f: &Formula) -> Result<AtomCheck> {
        use Formula::*;
        Ok(match f {
            Var(i) => AtomCheck::Rows(self.rows.iter().map(|&r| self.value(r, *i)).collect()),
            NegVar(i) => AtomCheck::Rows(self.rows.iter().map(|&r| !self.value(r, *i)).collect()),
            ExtNeg(a) => {
                let keys = self.formula_keys(std::slice::from_ref(&**a))?;
                AtomCheck::Rows(keys.into_iter().map(|k| k == 0).collect())
            }
            Dep(xs, y) => AtomCheck::Dep { x: self.var_keys(xs)?, y: self.var_keys(&[*y])? },
            ExtDep(xs, y) => {
                AtomCheck::Dep { x: self.formula_keys(xs)?, y: self.formula_keys(std::slice::from_ref(&**y))? }
            }
            Indep(xs, ys) => AtomCheck::Cind { z: vec![0; self.rows.len()], x: self.var_keys(xs)?, y: self.var_keys(ys)? },
            ExtIndep(xs, ys) => {
                AtomCheck::Cind { z: vec![0; self.rows.len()], x: self.formula_keys(xs)?, y: self.formula_keys(ys)? }
            }
            CondIndep(zs, xs, ys) => {
                AtomCheck::Cind { z: self.var_keys(zs)?, x: self.var_keys(xs)?, y: self.var_keys(ys)? }
            }
            ExtCondIndep(zs, xs, ys) => {
                AtomCheck::Cind { z: self.formula_keys(zs)?, x: self.formula_keys(xs)?, y: self.formula_keys(ys)? }
            }
            Incl(xs, ys) if xs.len() == ys.len() => AtomCheck::Incl { x: self.var_keys(xs)?, y: self.var_keys(ys)? },
            ExtIncl(xs, ys) if xs.len() == ys.len() => {
                AtomCheck::Incl { x: self.formula_keys(xs)?, y: self.formula_keys(ys)? }
            }
            Incl(..) | ExtIncl(..) => AtomCheck::Never,
            _ => return Err(Error::Unsupported(format!("`{f}` is not an atom"))),
        })
    }
}

impl AtomCheck {
    /// Whether the team made of the listed row positions satisfies the atom.
    fn holds(&self, members: &[usize], scratch: &mut Vec<(u64, u64, u64)>) -> bool {
        match self {
            AtomCheck::Rows(good) => members.iter().all(|&i| good[i]),
            AtomCheck::Never => members.is_empty(),
            AtomCheck::Dep { x, y } => {
                scratch.clear();
                scratch.extend(members.iter().map(|&i| (x[i], y[i], 0)));
                scratch.sort_unstable();
                scratch.dedup();
                scratch.windows(2).all(|w| w[0].0 != w[1].0)
            }
            AtomCheck::Cind { z, x, y } => {
                scratch.clear();
                scratch.extend(members.iter().map(|&i| (z[i], x[i], y[i])));
                scratch.sort_unstable();
                scratch.dedup();
                // Within a z class the realized (x, y) pairs must be the full product.
                let mut start = 0;
                while start < scratch.len() {
                    let zk = scratch[start].0;
                    let end = start + scratch[start..].iter().take_while(|t| t.0 == zk).count();
                    let group = &scratch[start..end];
                    let xs = 1 + group.windows(2).filter(|w| w[0].1 != w[1].1).count();
                    let mut ys: Vec<u64> = group.iter().map(|t| t.2).collect();
                    ys.sort_unstable();
                    ys.dedup();
                    if group.len() != xs * ys.len() {
                        return false;
                    }
                    start = end;
                }
                true
            }
            AtomCheck::Incl { x, y } => {
                members.iter().all(|&i| members.iter().any(|&j| y[j] == x[i]))
            }
        }
    }
}

fn members_of(mask: usize, out: &mut Vec<usize>) {
    out.clear();
    let mut m = mask;
    while m != 0 {
        out.push(m.trailing_zeros() as usize);
        m &= m - 1;
    }
}

fn is_splitting(f: &Formula) -> bool {
    matches!(f, Formula::Tensor(..) | Formula::NeOr(..) | Formula::Might(_) | Formula::LinImp(..))
}

struct Engine<'a> {
    ctx: RowCtx<'a>,
    k: usize,
    mode: EvalMode,
    budget: std::cell::Cell<u64>,
}

impl<'a> Engine<'a> {
    fn new(domain: &'a Domain, rows: &'a [u64], mode: EvalMode) -> Result<Engine<'a>> {
        let cap = if mode == EvalMode::Strict { MAX_STRICT_ROWS } else { MAX_UNIVERSE_ROWS };
        if rows.len() > cap {
            return Err(Error::Guard(format!(
                "splitting a team of {} rows exceeds the {mode} limit of {cap}",
                rows.len()
            )));
        }
        Ok(Engine { ctx: RowCtx { m: domain.len(), domain, rows }, k: rows.len(), mode, budget: LIN_IMP_BUDGET.into() })
    }

    fn atom_bits(&self, f: &Formula) -> Result<Bits> {
        let check = self.ctx.atom(f)?;
        let mut out = Bits::empty(self.k);
        if let AtomCheck::Rows(good) = &check {
            let g: usize = good.iter().enumerate().filter(|p| *p.1).map(|(i, _)| 1 << i).sum();
            (0..1usize << self.k).filter(|s| s & !g == 0).for_each(|s| out.set(s));
            return Ok(out);
        }
        let (mut members, mut scratch) = (Vec::new(), Vec::new());
        for s in 0..1usize << self.k {
            members_of(s, &mut members);
            if check.holds(&members, &mut scratch) {
                out.set(s);
            }
        }
        Ok(out)
    }

    fn set(&self, f: &Formula) -> Result<Bits> {
        use Formula::*;
        let k = self.k;
        Ok(match f {
            Bot => {
                let mut b = Bits::empty(k);
                b.set(0);
                b
            }
            Top => Bits::full(k),
            Ne => {
                let mut b = Bits::full(k);
                b.clear(0);
                b
            }
            And(a, b) => self.set(a)?.and(&self.set(b)?),
            BoolOr(a, b) => self.set(a)?.or(&self.set(b)?),
            BoolNeg(a) => self.set(a)?.complement(),
            Tensor(a, b) => {
                let (x, y) = (self.set(a)?, self.set(b)?);
                match self.mode {
                    EvalMode::Lax => lax_tensor(&x, &y),
                    EvalMode::Strict => strict_tensor(&x, &y),
                }
            }
            NeOr(a, b) => {
                let (mut x, mut y) = (self.set(a)?, self.set(b)?);
                x.clear(0);
                y.clear(0);
                let mut out = lax_tensor(&x, &y);
                out.set(0);
                out
            }
            Might(a) => {
                let mut x = self.set(a)?;
                x.clear(0);
                let mut out = x.upward_closure();
                out.set(0);
                out
            }
            LinImp(a, b) => {
                let (x, y) = (self.set(a)?, self.set(b)?);
                let ants: Vec<usize> = x.ones().collect();
                let mut out = Bits::empty(k);
                for s in 0..1usize << k {
                    let mut ok = true;
                    for &t in &ants {
                        self.spend()?;
                        if !y.get(s | t) {
                            ok = false;
                            break;
                        }
                    }
                    if ok {
                        out.set(s);
                    }
                }
                out
            }
            _ => self.atom_bits(f)?,
        })
    }

    fn spend(&self) -> Result<()> {
        let left = self.budget.get();
        if left == 0 {
            return Err(Error::Guard("linear implication evaluation exceeded its work budget".into()));
        }
        self.budget.set(left - 1);
        Ok(())
    }
}

/// `{Y ∪ Z : Y ∈ a, Z ∈ b}` by counting covers with zeta and Möbius transforms.
fn lax_tensor(a: &Bits, b: &Bits) -> Bits {
    let k = a.k;
    let n = 1usize << k;
    let mut fa: Vec<u64> = (0..n).map(|s| u64::from(a.get(s))).collect();
    let mut fb: Vec<u64> = (0..n).map(|s| u64::from(b.get(s))).collect();
    for i in 0..k {
        let bit = 1 << i;
        for s in 0..n {
            if s & bit != 0 {
                fa[s] = fa[s].wrapping_add(fa[s ^ bit]);
                fb[s] = fb[s].wrapping_add(fb[s ^ bit]);
            }
        }
    }
    // Counts of pairs below each set; exact modulo 2^64, and the true counts fit.
    let mut h: Vec<u64> = fa.iter().zip(&fb).map(|(x, y)| x.wrapping_mul(*y)).collect();
    for i in 0..k {
        let bit = 1 << i;
        for s in 0..n {
            if s & bit != 0 {
                h[s] = h[s].wrapping_sub(h[s ^ bit]);
            }
        }
    }
    let mut out = Bits::empty(k);
    h.iter().enumerate().filter(|p| *p.1 != 0).for_each(|(s, _)| out.set(s));
    out
}

/// `{Y ⊎ Z : Y ∈ a, Z ∈ b}` over disjoint pairs.
fn strict_tensor(a: &Bits, b: &Bits) -> Bits {
    let k = a.k;
    let mut out = Bits::empty(k);
    for s in 0..1usize << k {
        let mut y = s;
        loop {
            if a.get(y) && b.get(s ^ y) {
                out.set(s);
                break;
            }
            if y == 0 {
                break;
            }
            y = (y - 1) & s;
        }
    }
    out
}

fn check_domain(f: &Formula, domain: &Domain) -> Result<()> {
    if let Some(v) = variables(f).into_iter().find(|v| !domain.contains(*v)) {
        return Err(Error::Domain(format!("p{v} occurs in `{f}` but is outside the domain {domain}")));
    }
    Ok(())
}

/// `X ⊨ φ`.
pub fn eval(x: &Team, f: &Formula, mode: EvalMode) -> Result<bool> {
    check_domain(f, x.domain())?;
    if f.contains_lin_imp() {
        let d = x.domain();
        if d.len() > MAX_LIN_IMP_VARS {
            return Err(Error::Guard(format!(
                "linear implication over {} variables exceeds the limit of {MAX_LIN_IMP_VARS}",
                d.len()
            )));
        }
        let all: Vec<u64> = (0..1u64 << d.len()).collect();
        let bits = Engine::new(d, &all, mode)?.set(f)?;
        return Ok(bits.get(x.rows().iter().fold(0usize, |m, r| m | 1 << r)));
    }
    eval_rows(x.domain(), x.rows(), f, mode)
}

fn eval_rows(domain: &Domain, rows: &[u64], f: &Formula, mode: EvalMode) -> Result<bool> {
    use Formula::*;
    Ok(match f {
        Bot => rows.is_empty(),
        Top => true,
        Ne => !rows.is_empty(),
        And(a, b) => eval_rows(domain, rows, a, mode)? && eval_rows(domain, rows, b, mode)?,
        BoolOr(a, b) => eval_rows(domain, rows, a, mode)? || eval_rows(domain, rows, b, mode)?,
        BoolNeg(a) => !eval_rows(domain, rows, a, mode)?,
        _ if is_splitting(f) => {
            let bits = Engine::new(domain, rows, mode)?.set(f)?;
            bits.get((1usize << rows.len()) - 1)
        }
        _ => {
            let ctx = RowCtx { m: domain.len(), domain, rows };
            let all: Vec<usize> = (0..rows.len()).collect();
            ctx.atom(f)?.holds(&all, &mut Vec::new())
        }
    })
}

/// `⟦φ⟧` on `n` as one bit per team, indexed by the team's row mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruthTable {
    pub domain: Domain,
    pub bits: Bits,
}

impl TruthTable {
    pub fn holds(&self, t: &Team) -> bool {
        self.bits.get(t.mask().expect("truth tables cover small domains") as usize)
    }

    pub fn holds_mask(&self, mask: u64) -> bool {
        self.bits.get(mask as usize)
    }

    /// Satisfying team masks in canonical team order.
    pub fn masks(&self) -> impl Iterator<Item = u64> + '_ {
        team_masks(1 << self.domain.len()).filter(|m| self.bits.get(*m as usize))
    }

    pub fn family(&self) -> TeamFamily {
        let teams = self.masks().map(|m| Team::from_mask(self.domain.clone(), m));
        TeamFamily::new(self.domain.clone(), teams).expect("all teams share the domain")
    }
}

/// Evaluates `f` on every team of `n` at once.
pub fn truth_table(f: &Formula, n: &Domain, mode: EvalMode, limits: &Limits) -> Result<TruthTable> {
    check_domain(f, n)?;
    limits.check_eval(n.len())?;
    if f.contains_lin_imp() && n.len() > MAX_LIN_IMP_VARS {
        return Err(Error::Guard(format!("linear implication over {} variables", n.len())));
    }
    let rows: Vec<u64> = (0..1u64 << n.len()).collect();
    let bits = Engine::new(n, &rows, mode)?.set(f)?;
    Ok(TruthTable { domain: n.clone(), bits })
}

/// `⟦φ⟧` restricted to teams on `n`.
pub fn satisfying_teams(f: &Formula, n: &Domain, mode: EvalMode, limits: &Limits) -> Result<TeamFamily> {
    Ok(truth_table(f, n, mode, limits)?.family())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Entailment {
    Holds,
    /// The first team in canonical order satisfying the premises but not the conclusion.
    Counterexample(Team),
}

impl Entailment {
    pub fn holds(&self) -> bool {
        matches!(self, Entailment::Holds)
    }

    pub fn counterexample(&self) -> Option<&Team> {
        match self {
            Entailment::Holds => None,
            Entailment::Counterexample(t) => Some(t),
        }
    }
}

/// `Γ ⊨ ψ` over the teams on `n`.
pub fn entailment_core(
    gamma: &[Formula],
    psi: &Formula,
    n: &Domain,
    mode: EvalMode,
    limits: &Limits,
) -> Result<Entailment> {
    let mut premises = Bits::full(1 << n.len());
    for g in gamma {
        premises = premises.and(&truth_table(g, n, mode, limits)?.bits);
    }
    let concl = truth_table(psi, n, mode, limits)?;
    let bad = premises.and(&concl.bits.complement());
    Ok(match team_masks(1 << n.len()).find(|m| bad.get(*m as usize)) {
        None => Entailment::Holds,
        Some(m) => Entailment::Counterexample(Team::from_mask(n.clone(), m)),
    })
}

/// A pair of teams with equal restriction to the variables of `formula`
/// that the strict reading separates, found by search on two variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalityWitness {
    pub x: Team,
    pub y: Team,
    pub formula: Formula,
    pub strict_x: bool,
    pub strict_y: bool,
}

pub fn strict_locality_witness() -> Result<Option<LocalityWitness>> {
    let formula = Formula::tensor(
        Formula::and(Formula::Ne, Formula::var(0)),
        Formula::and(Formula::Ne, Formula::var(0)),
    );
    let n = Domain::new([0, 1]);
    let v = Domain::new(variables(&formula));
    let teams: Vec<Team> = team_masks(4).map(|m| Team::from_mask(n.clone(), m)).collect();
    for x in &teams {
        for y in &teams {
            if x.restrict(&v)? != y.restrict(&v)? {
                continue;
            }
            let (sx, sy) = (eval(x, &formula, EvalMode::Strict)?, eval(y, &formula, EvalMode::Strict)?);
            if sx != sy {
                return Ok(Some(LocalityWitness { x: x.clone(), y: y.clone(), formula, strict_x: sx, strict_y: sy }));
            }
        }
    }
    Ok(None)
}
