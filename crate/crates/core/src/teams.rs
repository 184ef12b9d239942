//! Domains, valuations, teams and team families.
//!
//! A valuation on a domain of size `m` is stored as a row index `r < 2^m`.
//! Position `k` of the domain is true iff bit `m-1-k` of `r` is clear, so
//! row 0 is the all-true valuation and rows are ordered lexicographically
//! with "true before false", the first domain index being most significant.
//! Teams keep their rows sorted by this index, which makes the canonical
//! order of rows and of teams the same everywhere in the crate.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::limits::{Limits, HARD_MAX_VARS};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Domain(Vec<usize>);

impl Domain {
    pub fn new(indices: impl IntoIterator<Item = usize>) -> Domain {
        let set: BTreeSet<usize> = indices.into_iter().collect();
        Domain(set.into_iter().collect())
    }

    pub fn empty() -> Domain {
        Domain(Vec::new())
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn position(&self, var: usize) -> Option<usize> {
        self.0.binary_search(&var).ok()
    }

    pub fn contains(&self, var: usize) -> bool {
        self.position(var).is_some()
    }

    pub fn is_subset(&self, other: &Domain) -> bool {
        self.0.iter().all(|v| other.contains(*v))
    }

    pub fn union(&self, other: &Domain) -> Domain {
        Domain::new(self.0.iter().chain(&other.0).copied())
    }

    pub fn intersects(&self, other: &Domain) -> bool {
        self.0.iter().any(|v| other.contains(*v))
    }

    /// Number of valuations on the domain; refuses domains past 63 indices.
    pub fn row_count(&self) -> Result<u64> {
        if self.len() > 63 {
            return Err(Error::Guard(format!("domain of {} indices has too many valuations", self.len())));
        }
        Ok(1u64 << self.len())
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        write!(f, "{{{}}}", items.join(","))
    }
}

impl From<&[usize]> for Domain {
    fn from(v: &[usize]) -> Domain {
        Domain::new(v.iter().copied())
    }
}

/// Value of domain position `k` in row `r` of a domain of size `m`.
#[inline]
pub fn row_value(m: usize, r: u64, k: usize) -> bool {
    (r >> (m - 1 - k)) & 1 == 0
}

/// Row index of the valuation whose values, in domain order, are `bits`.
pub fn row_from_bits(bits: &[bool]) -> u64 {
    bits.iter().fold(0u64, |acc, &b| (acc << 1) | u64::from(!b))
}

pub fn row_bits(m: usize, r: u64) -> Vec<bool> {
    (0..m).map(|k| row_value(m, r, k)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Team {
    domain: Domain,
    rows: Vec<u64>,
}

impl Team {
    /// Builds a team from row indices; duplicates are merged.
    pub fn new(domain: Domain, rows: impl IntoIterator<Item = u64>) -> Result<Team> {
        let limit = domain.row_count()?;
        let set: BTreeSet<u64> = rows.into_iter().collect();
        if let Some(&r) = set.iter().next_back() {
            if r >= limit {
                return Err(Error::Domain(format!("row index {r} is outside the domain {domain}")));
            }
        }
        Ok(Team { domain, rows: set.into_iter().collect() })
    }

    /// Builds a team from explicit 0/1 rows aligned to the domain; duplicate rows are rejected.
    pub fn from_bit_rows(domain: Domain, rows: &[Vec<u8>]) -> Result<Team> {
        let m = domain.len();
        let mut seen = BTreeSet::new();
        for row in rows {
            if row.len() != m {
                return Err(Error::input(format!("row {row:?} does not match the {m} domain indices")));
            }
            if row.iter().any(|b| *b > 1) {
                return Err(Error::input(format!("row {row:?} has a non-binary entry")));
            }
            let bits: Vec<bool> = row.iter().map(|b| *b == 1).collect();
            if !seen.insert(row_from_bits(&bits)) {
                return Err(Error::input(format!("duplicate row {row:?}")));
            }
        }
        Team::new(domain, seen)
    }

    pub fn empty(domain: Domain) -> Team {
        Team { domain, rows: Vec::new() }
    }

    pub fn full(domain: Domain) -> Result<Team> {
        let n = domain.row_count()?;
        Team::new(domain, 0..n)
    }

    /// The team whose rows are the set bits of `mask`.
    pub fn from_mask(domain: Domain, mask: u64) -> Team {
        let rows = (0..64).filter(|r| mask >> r & 1 == 1).collect();
        Team { domain, rows }
    }

    /// Bitmask over row indices, available while the domain has at most six indices.
    pub fn mask(&self) -> Option<u64> {
        (self.domain.len() <= 6).then(|| self.rows.iter().fold(0u64, |m, r| m | 1 << r))
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn rows(&self) -> &[u64] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn contains_row(&self, r: u64) -> bool {
        self.rows.binary_search(&r).is_ok()
    }

    /// Value of variable `var` in row `r`; `None` when `var` is outside the domain.
    pub fn value(&self, r: u64, var: usize) -> Option<bool> {
        self.domain.position(var).map(|k| row_value(self.domain.len(), r, k))
    }

    pub fn bit_rows(&self) -> Vec<Vec<u8>> {
        let m = self.domain.len();
        self.rows.iter().map(|&r| row_bits(m, r).into_iter().map(u8::from).collect()).collect()
    }

    /// `{ s↾n : s ∈ X }`.
    pub fn restrict(&self, n: &Domain) -> Result<Team> {
        if !n.is_subset(&self.domain) {
            return Err(Error::Domain(format!("{n} is not a subset of the team domain {}", self.domain)));
        }
        let positions: Vec<usize> = n.indices().iter().map(|v| self.domain.position(*v).unwrap()).collect();
        let m = self.domain.len();
        let rows = self.rows.iter().map(|&r| {
            let bits: Vec<bool> = positions.iter().map(|&k| row_value(m, r, k)).collect();
            row_from_bits(&bits)
        });
        Team::new(n.clone(), rows)
    }

    pub fn union(&self, other: &Team) -> Result<Team> {
        if self.domain != other.domain {
            return Err(Error::Domain("union of teams on different domains".into()));
        }
        Team::new(self.domain.clone(), self.rows.iter().chain(&other.rows).copied())
    }

    pub fn is_subteam_of(&self, other: &Team) -> bool {
        self.domain == other.domain && self.rows.iter().all(|r| other.contains_row(*r))
    }

    /// Packs the values of `vars` in row `r` into an integer key.
    pub fn key(&self, r: u64, vars: &[usize]) -> u64 {
        vars.iter().fold(0u64, |acc, v| (acc << 1) | u64::from(self.value(r, *v).unwrap_or(false)))
    }

    pub fn to_json(&self) -> TeamJson {
        TeamJson { domain: self.domain.indices().to_vec(), rows: self.bit_rows() }
    }

    pub fn from_json(j: &TeamJson) -> Result<Team> {
        let domain = Domain::new(j.domain.iter().copied());
        if domain.len() != j.domain.len() || domain.indices() != j.domain.as_slice() {
            return Err(Error::input("team domain must be sorted and duplicate-free"));
        }
        Team::from_bit_rows(domain, &j.rows)
    }
}

impl Ord for Team {
    fn cmp(&self, other: &Team) -> Ordering {
        self.domain
            .cmp(&other.domain)
            .then(self.rows.len().cmp(&other.rows.len()))
            .then_with(|| self.rows.iter().rev().cmp(other.rows.iter().rev()))
    }
}

impl PartialOrd for Team {
    fn partial_cmp(&self, other: &Team) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Team {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .bit_rows()
            .into_iter()
            .map(|r| r.iter().map(|b| b.to_string()).collect::<String>())
            .collect();
        write!(f, "{}:[{}]", self.domain, rows.join(" "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TeamJson {
    pub domain: Vec<usize>,
    pub rows: Vec<Vec<u8>>,
}

/// `X↾(I∪J) = X↾I × X↾J` for disjoint blocks `I`, `J`.
pub fn cartesian_decomposes(x: &Team, i: &Domain, j: &Domain) -> Result<bool> {
    if !i.is_subset(x.domain()) || !j.is_subset(x.domain()) {
        return Err(Error::Domain("blocks must lie inside the team domain".into()));
    }
    if i.intersects(j) {
        return Err(Error::Domain(format!("blocks {i} and {j} overlap")));
    }
    let pairs: BTreeSet<(u64, u64)> =
        x.rows().iter().map(|&r| (x.key(r, i.indices()), x.key(r, j.indices()))).collect();
    let left: BTreeSet<u64> = pairs.iter().map(|p| p.0).collect();
    let right: BTreeSet<u64> = pairs.iter().map(|p| p.1).collect();
    Ok(pairs.len() == left.len() * right.len())
}

/// Masks over `rows` row indices in canonical team order: by cardinality,
/// then numerically.
pub fn team_masks(rows: u32) -> impl Iterator<Item = u64> {
    assert!(rows <= 32, "team masks are limited to 32 rows");
    let full: u64 = if rows == 64 { u64::MAX } else { (1u64 << rows) - 1 };
    (0..=rows).flat_map(move |c| {
        let first = if c == 0 { 0 } else { (1u64 << c) - 1 };
        let mut next = Some(first);
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur == 0 {
                None
            } else {
                // Gosper's hack: next larger integer with the same popcount.
                let low = cur & cur.wrapping_neg();
                let ripple = cur + low;
                let succ = (((ripple ^ cur) >> 2) / low) | ripple;
                (succ & !full == 0).then_some(succ)
            };
            Some(cur)
        })
    })
}

/// Every team on `n`, each exactly once, `∅` first.
pub fn all_teams(n: &Domain, limits: &Limits) -> Result<impl Iterator<Item = Team>> {
    limits.check_eval(n.len())?;
    if n.len() > HARD_MAX_VARS {
        return Err(Error::Guard(format!("{} variables exceeds the hard limit", n.len())));
    }
    let d = n.clone();
    Ok(team_masks(1 << n.len()).map(move |m| Team::from_mask(d.clone(), m)))
}

pub fn team_count(n: &Domain) -> u128 {
    1u128.checked_shl(1u32 << n.len().min(6)).unwrap_or(0)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TeamFamily {
    domain: Domain,
    teams: Vec<Team>,
}

impl TeamFamily {
    pub fn new(domain: Domain, teams: impl IntoIterator<Item = Team>) -> Result<TeamFamily> {
        let set: BTreeSet<Team> = teams.into_iter().collect();
        if let Some(t) = set.iter().find(|t| t.domain() != &domain) {
            return Err(Error::Domain(format!("team {t} is not on the family domain {domain}")));
        }
        Ok(TeamFamily { domain, teams: set.into_iter().collect() })
    }

    pub fn empty(domain: Domain) -> TeamFamily {
        TeamFamily { domain, teams: Vec::new() }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn teams(&self) -> &[Team] {
        &self.teams
    }

    pub fn len(&self) -> usize {
        self.teams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.teams.is_empty()
    }

    pub fn contains(&self, t: &Team) -> bool {
        self.teams.binary_search(t).is_ok()
    }

    pub fn index_of(&self, t: &Team) -> Option<usize> {
        self.teams.binary_search(t).ok()
    }

    pub fn contains_empty(&self) -> bool {
        self.teams.first().is_some_and(|t| t.is_empty())
    }

    pub fn to_json(&self) -> FamilyJson {
        FamilyJson { domain: self.domain.indices().to_vec(), teams: self.teams.iter().map(|t| t.bit_rows()).collect() }
    }

    pub fn from_json(j: &FamilyJson) -> Result<TeamFamily> {
        let domain = Domain::new(j.domain.iter().copied());
        if domain.indices() != j.domain.as_slice() {
            return Err(Error::input("family domain must be sorted and duplicate-free"));
        }
        let teams = j.teams.iter().map(|rows| Team::from_bit_rows(domain.clone(), rows)).collect::<Result<Vec<_>>>()?;
        TeamFamily::new(domain, teams)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyJson {
    pub domain: Vec<usize>,
    pub teams: Vec<Vec<Vec<u8>>>,
}

/// Six valuations of three valves `p0..p2` and a warning lamp `p3`, together
/// with the subteam of the first three rows.
pub fn valve_lamp_team() -> (Team, Team) {
    let d = Domain::new(0..4);
    let rows: Vec<Vec<u8>> = vec![
        vec![1, 1, 1, 1],
        vec![1, 0, 0, 0],
        vec![0, 1, 1, 1],
        vec![0, 0, 0, 0],
        vec![1, 1, 0, 0],
        vec![0, 1, 0, 1],
    ];
    let x = Team::from_bit_rows(d.clone(), &rows).expect("rows are distinct");
    let y = Team::from_bit_rows(d, &rows[..3]).expect("rows are distinct");
    (x, y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(v: &[usize]) -> Domain {
        Domain::new(v.iter().copied())
    }

    #[test]
    fn row_order_is_true_first() {
        assert_eq!(row_from_bits(&[true, true]), 0);
        assert_eq!(row_from_bits(&[true, false]), 1);
        assert_eq!(row_from_bits(&[false, false]), 3);
        assert_eq!(row_bits(2, 2), vec![false, true]);
    }

    #[test]
    fn team_counts() {
        let l = Limits::default();
        assert_eq!(all_teams(&d(&[]), &l).unwrap().count(), 2);
        assert_eq!(all_teams(&d(&[0, 1]), &l).unwrap().count(), 16);
        let all: Vec<Team> = all_teams(&d(&[0, 1, 2]), &l).unwrap().collect();
        assert_eq!(all.len(), 256);
        assert!(all[0].is_empty());
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        assert!(all_teams(&d(&[0, 1, 2, 3, 4]), &l).is_err());
    }

    #[test]
    fn singleton_order_on_one_variable() {
        let all: Vec<Team> = all_teams(&d(&[1]), &Limits::default()).unwrap().collect();
        assert_eq!(all[1].bit_rows(), vec![vec![1]]);
        assert_eq!(all[2].bit_rows(), vec![vec![0]]);
        assert_eq!(all[3].len(), 2);
    }

    #[test]
    fn restriction() {
        let (x, _) = valve_lamp_team();
        let r = x.restrict(&d(&[0])).unwrap();
        assert_eq!(r.bit_rows(), vec![vec![1], vec![0]]);
        assert_eq!(x.restrict(x.domain()).unwrap(), x);
        assert!(Team::empty(d(&[0, 1])).restrict(&d(&[1])).unwrap().is_empty());
        assert!(x.restrict(&d(&[7])).is_err());
    }

    #[test]
    fn cartesian_product() {
        let (x, y) = valve_lamp_team();
        assert!(cartesian_decomposes(&x, &d(&[0]), &d(&[3])).unwrap());
        assert!(!cartesian_decomposes(&y, &d(&[0]), &d(&[3])).unwrap());
        assert!(cartesian_decomposes(&Team::empty(d(&[0, 1])), &d(&[0]), &d(&[1])).unwrap());
        assert!(cartesian_decomposes(&x, &d(&[0]), &d(&[0, 3])).is_err());
    }

    #[test]
    fn json_rejects_duplicates() {
        let j = TeamJson { domain: vec![0], rows: vec![vec![1], vec![1]] };
        assert!(Team::from_json(&j).is_err());
        let (x, _) = valve_lamp_team();
        assert_eq!(Team::from_json(&x.to_json()).unwrap(), x);
    }
}
