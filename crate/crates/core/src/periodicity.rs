//! Periodicity obstruction from the splitting of Khovanov polynomials into
//! eigen-parts: checking a proposed split and searching for one.
//!
//! The `s`-invariant is an input; nothing here computes it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::is_prime;
use crate::homology::PoincarePolynomial;

pub const DEFAULT_NODE_CAP: u64 = 10_000_000;

/// Laurent polynomial in `t` and `q` with integer coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LaurentPoly2 {
    /// `(t, q) → coefficient`, zero coefficients never stored.
    pub terms: BTreeMap<(i32, i32), i64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermJson {
    t: i32,
    q: i32,
    coef: i64,
}

impl LaurentPoly2 {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn monomial(t: i32, q: i32, coef: i64) -> Self {
        let mut p = Self::zero();
        p.add_term(t, q, coef);
        p
    }

    pub fn from_terms(terms: impl IntoIterator<Item = ((i32, i32), i64)>) -> Self {
        let mut p = Self::zero();
        for ((t, q), c) in terms {
            p.add_term(t, q, c);
        }
        p
    }

    pub fn add_term(&mut self, t: i32, q: i32, coef: i64) {
        if coef == 0 {
            return;
        }
        let e = self.terms.entry((t, q)).or_insert(0);
        *e += coef;
        if *e == 0 {
            self.terms.remove(&(t, q));
        }
    }

    pub fn coef(&self, t: i32, q: i32) -> i64 {
        self.terms.get(&(t, q)).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.terms.values().all(|&c| c >= 0)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.add_scaled(other, 1)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add_scaled(other, -1)
    }

    pub fn add_scaled(&self, other: &Self, k: i64) -> Self {
        let mut out = self.clone();
        for (&(t, q), &c) in &other.terms {
            out.add_term(t, q, k * c);
        }
        out
    }

    pub fn scale(&self, k: i64) -> Self {
        Self::zero().add_scaled(self, k)
    }

    /// Multiplies by `t^a q^b`.
    pub fn shift(&self, a: i32, b: i32) -> Self {
        Self::from_terms(self.terms.iter().map(|(&(t, q), &c)| ((t + a, q + b), c)))
    }

    /// Sum of coefficients, i.e. total rank.
    pub fn total(&self) -> i64 {
        self.terms.values().sum()
    }

    /// Specialization at `t = −1`, as `q`-exponent → coefficient.
    pub fn at_t_minus_one(&self) -> BTreeMap<i32, i64> {
        let mut out = BTreeMap::new();
        for (&(t, q), &c) in &self.terms {
            *out.entry(q).or_insert(0) += if t.rem_euclid(2) == 0 { c } else { -c };
        }
        out.retain(|_, c| *c != 0);
        out
    }

    /// Number of diagonals `q − 2t = const` between the extremes.
    pub fn width(&self) -> usize {
        let deltas: BTreeSet<i32> = self.terms.keys().map(|&(t, q)| q - 2 * t).collect();
        match (deltas.first(), deltas.last()) {
            (Some(lo), Some(hi)) => ((hi - lo) / 2 + 1) as usize,
            _ => 0,
        }
    }

    pub fn from_poincare(p: &PoincarePolynomial) -> Self {
        Self::from_terms(p.forget_k().terms.iter().map(|(g, &d)| ((g.i, g.q), d as i64)))
    }

    pub fn to_json(&self) -> serde_json::Value {
        let list: Vec<TermJson> = self.terms.iter().map(|(&(t, q), &coef)| TermJson { t, q, coef }).collect();
        serde_json::to_value(list).expect("serializable")
    }

    pub fn parse_json(text: &str) -> Result<Self> {
        let list: Vec<TermJson> = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Ok(Self::from_terms(list.into_iter().map(|x| ((x.t, x.q), x.coef))))
    }
}

impl Serialize for LaurentPoly2 {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.terms.iter().map(|(&(t, q), &coef)| TermJson { t, q, coef }))
    }
}

impl<'de> Deserialize<'de> for LaurentPoly2 {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let list = Vec::<TermJson>::deserialize(d)?;
        Ok(Self::from_terms(list.into_iter().map(|x| ((x.t, x.q), x.coef))))
    }
}

impl fmt::Display for LaurentPoly2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&(t, q), &c) in &self.terms {
            let sign = if c < 0 { "-" } else if first { "" } else { "+" };
            if !first {
                write!(f, " ")?;
            }
            write!(f, "{sign}")?;
            if !first {
                write!(f, " ")?;
            }
            let a = c.abs();
            let mut parts = Vec::new();
            if a != 1 || (t == 0 && q == 0) {
                parts.push(a.to_string());
            }
            if t != 0 {
                parts.push(format!("t^{t}"));
            }
            if q != 0 {
                parts.push(format!("q^{q}"));
            }
            write!(f, "{}", parts.join(" "))?;
            first = false;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CriterionInstance {
    pub khp: LaurentPoly2,
    pub s: i32,
    pub p: u64,
    pub n: u32,
    pub c: i32,
    pub width: usize,
    pub blocks: Option<Vec<LaurentPoly2>>,
}

impl CriterionInstance {
    /// Validates the instance; `width` defaults to the diagonal width of `khp`.
    pub fn new(khp: LaurentPoly2, s: i32, p: u64, n: u32, c: i32, width: Option<usize>) -> Result<Self> {
        if !khp.is_nonnegative() {
            return Err(Error::InvalidArgument("Khovanov polynomial has a negative coefficient".into()));
        }
        if p == 2 || !is_prime(p) {
            return Err(Error::InvalidArgument(format!("p = {p} must be an odd prime")));
        }
        if n == 0 {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        if c != 1 && c != 2 {
            return Err(Error::InvalidArgument(format!("c = {c} must be 1 or 2")));
        }
        let width = width.unwrap_or_else(|| khp.width());
        Ok(CriterionInstance { khp, s, p, n, c, width, blocks: None })
    }

    pub fn with_blocks(mut self, blocks: Vec<LaurentPoly2>) -> Result<Self> {
        let mut sum = LaurentPoly2::zero();
        for b in &blocks {
            if !b.is_nonnegative() || b.is_zero() {
                return Err(Error::InvalidArgument("blocks must be non-zero with non-negative coefficients".into()));
            }
            sum = sum.add(b);
        }
        if sum != self.khp {
            return Err(Error::InvalidArgument("blocks do not sum to the Khovanov polynomial".into()));
        }
        self.blocks = Some(blocks);
        Ok(self)
    }

    /// Multiplicity `φ(p^k)` of part `k`.
    pub fn multiplicity(&self, k: u32) -> i64 {
        crate::equivariant::euler_phi_prime_power(self.p, k) as i64
    }

    /// Largest `j` allowed in the `(1 + t q^{2cj})` factors.
    pub fn max_pair(&self) -> i32 {
        (self.c * self.width as i32) / 2
    }

    pub fn anchor(&self) -> LaurentPoly2 {
        LaurentPoly2::from_terms([((0, self.s + 1), 1), ((0, self.s - 1), 1)])
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DecompositionCheck {
    pub valid: bool,
    /// Names of the failed conditions: "sum", "1", "2", "3", "4", "blocks".
    pub violated: Vec<String>,
}

/// Whether `poly` is `Σ_{1≤j≤max_j} (1 + t q^{2cj}) S_j` with every `S_j ≥ 0`.
pub fn pair_decomposable(poly: &LaurentPoly2, c: i32, max_j: i32) -> bool {
    fn go(rest: &mut LaurentPoly2, c: i32, max_j: i32) -> bool {
        let Some((&(t, q), &coef)) = rest.terms.iter().max_by_key(|(&(t, q), _)| (q, t)) else {
            return true;
        };
        if coef < 0 {
            return false;
        }
        for j in 1..=max_j {
            let (pt, pq) = (t - 1, q - 2 * c * j);
            if rest.coef(pt, pq) > 0 {
                rest.add_term(t, q, -1);
                rest.add_term(pt, pq, -1);
                let ok = go(rest, c, max_j);
                rest.add_term(t, q, 1);
                rest.add_term(pt, pq, 1);
                if ok {
                    return true;
                }
            }
        }
        false
    }
    if !poly.is_nonnegative() {
        return false;
    }
    go(&mut poly.clone(), c, max_j)
}

/// Whether `f(q) − f(q^{−1})` is divisible by `q^N − q^{−N}`.
pub fn symmetric_mod(f: &BTreeMap<i32, i64>, big_n: i64) -> bool {
    let m = 2 * big_n;
    let mut classes: BTreeMap<i64, i64> = BTreeMap::new();
    for (&e, &c) in f {
        *classes.entry((e as i64).rem_euclid(m)).or_insert(0) += c;
        *classes.entry((-(e as i64)).rem_euclid(m)).or_insert(0) -= c;
    }
    classes.values().all(|&c| c == 0)
}

/// Whether `target` is the sum of a sub-multiset of `blocks`.
pub fn subset_sum(blocks: &[LaurentPoly2], target: &LaurentPoly2) -> bool {
    fn go(blocks: &[LaurentPoly2], i: usize, rest: &LaurentPoly2) -> bool {
        if rest.is_zero() {
            return true;
        }
        if i == blocks.len() || !rest.is_nonnegative() {
            return false;
        }
        go(blocks, i + 1, &rest.sub(&blocks[i])) || go(blocks, i + 1, rest)
    }
    go(blocks, 0, target)
}

/// Evaluates every condition of the criterion on a proposed split.
pub fn check_decomposition(inst: &CriterionInstance, parts: &[LaurentPoly2]) -> DecompositionCheck {
    let mut violated = Vec::new();
    if parts.len() != inst.n as usize + 1 {
        return DecompositionCheck { valid: false, violated: vec!["sum".into()] };
    }
    let mut total = LaurentPoly2::zero();
    for (k, part) in parts.iter().enumerate() {
        total = total.add_scaled(part, inst.multiplicity(k as u32));
    }
    if total != inst.khp {
        violated.push("sum".to_string());
    }
    let unbounded = |p: &LaurentPoly2| {
        let qs: Vec<i32> = p.terms.keys().map(|k| k.1).collect();
        let span = qs.iter().max().unwrap_or(&0) - qs.iter().min().unwrap_or(&0);
        span / (2 * inst.c) + 1
    };
    let mut wide = false;
    for (k, part) in parts.iter().enumerate() {
        let rest = if k == 0 { part.sub(&inst.anchor()) } else { part.clone() };
        if !pair_decomposable(&rest, inst.c, inst.max_pair()) {
            if pair_decomposable(&rest, inst.c, unbounded(&rest)) {
                wide = true;
            } else {
                let name = if k == 0 { "1" } else { "2" };
                if !violated.iter().any(|v| v == name) {
                    violated.push(name.to_string());
                }
            }
        }
    }
    for k in 0..inst.n as usize {
        let diff = parts[k].sub(&parts[k + 1]).at_t_minus_one();
        let big_n = (inst.p as i64).pow(inst.n - k as u32);
        if !symmetric_mod(&diff, big_n) {
            violated.push("3".to_string());
            break;
        }
    }
    if wide {
        violated.push("4".to_string());
    }
    if let Some(blocks) = &inst.blocks {
        if parts.iter().any(|p| !subset_sum(blocks, p)) {
            violated.push("blocks".to_string());
        }
    }
    violated.sort();
    DecompositionCheck { valid: violated.is_empty(), violated }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SearchResult {
    pub decompositions: Vec<Vec<LaurentPoly2>>,
    pub nodes: u64,
    /// Whether the whole tree was explored (false when a cap stopped it).
    pub complete: bool,
    pub truncated_by_limit: bool,
}

impl SearchResult {
    /// "pass" if something was found, "fail" if the full search found nothing,
    /// "inconclusive" if the node cap stopped it first.
    pub fn verdict(&self) -> &'static str {
        if !self.decompositions.is_empty() {
            "pass"
        } else if self.complete {
            "fail"
        } else {
            "inconclusive"
        }
    }
}

struct Search<'a> {
    inst: &'a CriterionInstance,
    limit: usize,
    cap: u64,
    nodes: u64,
    capped: bool,
    found: BTreeSet<Vec<LaurentPoly2>>,
    parts: Vec<LaurentPoly2>,
}

impl Search<'_> {
    fn done(&self) -> bool {
        self.capped || self.found.len() >= self.limit
    }

    /// Covers the highest remaining monomial by the top end of a pair;
    /// choices at one pivot are non-decreasing to avoid reorderings.
    fn go(&mut self, rest: &mut LaurentPoly2, last: Option<((i32, i32), u32, i32)>) {
        if self.done() {
            return;
        }
        self.nodes += 1;
        if self.nodes > self.cap {
            self.capped = true;
            return;
        }
        let Some((&pivot, &coef)) = rest.terms.iter().max_by_key(|(&(t, q), _)| (q, t)) else {
            let cand = self.parts.clone();
            if check_decomposition(self.inst, &cand).valid {
                self.found.insert(cand);
            }
            return;
        };
        let (t, q) = pivot;
        let (k0, j0) = match last {
            Some((p, k, j)) if p == pivot => (k, j),
            _ => (0, 1),
        };
        for k in k0..=self.inst.n {
            let mult = self.inst.multiplicity(k);
            if mult > coef {
                break;
            }
            let jstart = if k == k0 { j0 } else { 1 };
            for j in jstart..=self.inst.max_pair() {
                let partner = (t - 1, q - 2 * self.inst.c * j);
                if rest.coef(partner.0, partner.1) < mult {
                    continue;
                }
                let pair = LaurentPoly2::from_terms([(partner, 1), (pivot, 1)]);
                rest.add_term(t, q, -mult);
                rest.add_term(partner.0, partner.1, -mult);
                self.parts[k as usize] = self.parts[k as usize].add(&pair);
                self.go(rest, Some((pivot, k, j)));
                self.parts[k as usize] = self.parts[k as usize].sub(&pair);
                rest.add_term(t, q, mult);
                rest.add_term(partner.0, partner.1, mult);
                if self.done() {
                    return;
                }
            }
        }
    }
}

/// Enumerates splits satisfying the criterion, up to `limit` of them and at
/// most `cap` search nodes. Results are in canonical (sorted) order.
pub fn search_decompositions(inst: &CriterionInstance, limit: usize, cap: u64) -> SearchResult {
    let mut search = Search {
        inst,
        limit,
        cap,
        nodes: 0,
        capped: false,
        found: BTreeSet::new(),
        parts: vec![LaurentPoly2::zero(); inst.n as usize + 1],
    };
    let anchor = inst.anchor();
    let mut rest = inst.khp.sub(&anchor);
    if rest.is_nonnegative() {
        search.parts[0] = anchor;
        search.go(&mut rest, None);
    }
    let truncated_by_limit = !search.capped && search.found.len() >= limit;
    SearchResult {
        decompositions: search.found.into_iter().collect(),
        nodes: search.nodes,
        complete: !search.capped && !truncated_by_limit,
        truncated_by_limit,
    }
}
