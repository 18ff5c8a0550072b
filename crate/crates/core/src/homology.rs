//! Khovanov and annular Khovanov chain complexes and their homology.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagram::AnnularDiagram;
use crate::error::{Error, Result};
use crate::field::{is_prime, Field};
use crate::linalg::SparseMatrix;
use crate::resolution::{arc_circles, bit, weight, Cube, LabeledGenerator, Traced, Vertex};

/// The standard sign assignment: the edge flipping coordinate `j` out of `v`
/// gets the parity of the coordinates of `v` before `j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SignAssignment {
    pub n: usize,
}

pub fn standard_sign_assignment(n: usize) -> SignAssignment {
    SignAssignment { n }
}

impl SignAssignment {
    /// Value on the edge from `v` (with `v_j = 0`) to `v + e_j`.
    #[inline]
    pub fn value(&self, v: Vertex, j: usize) -> u8 {
        (weight(v & ((1u32 << j) - 1)) & 1) as u8
    }

    /// Whether every square has edge values summing to 1 mod 2.
    pub fn is_cocycle(&self) -> bool {
        for v in 0..1u32 << self.n {
            for a in 0..self.n {
                for b in a + 1..self.n {
                    if bit(v, a) || bit(v, b) {
                        continue;
                    }
                    let (ea, eb) = (1 << a, 1 << b);
                    let s = self.value(v, a) + self.value(v | ea, b) + self.value(v, b) + self.value(v | eb, a);
                    if s % 2 != 1 {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// Positions at `u = v + e_j` of the circles at `v`; the two circles met by the
/// arc are reported separately.
pub struct EdgeMap {
    pub map: Vec<u8>,
    pub a: usize,
    pub b: usize,
    /// For a split: the positions at `u` of the two new circles.
    pub split: Option<(usize, usize)>,
    /// For a merge: the position at `u` of the merged circle.
    pub merged: Option<usize>,
}

pub fn edge_map(d: &AnnularDiagram, tv: &Traced, tu: &Traced, j: usize) -> EdgeMap {
    let loops = d.free_loops().len();
    let edge_circles_v = tv.count() - loops;
    let edge_circles_u = tu.count() - loops;
    let map: Vec<u8> = (0..tv.count())
        .map(|i| {
            if i < edge_circles_v {
                let e = d.edge_index(tv.ids[i]).expect("circle id is an edge");
                tu.circle_of_edge[e]
            } else {
                (edge_circles_u + (i - edge_circles_v)) as u8
            }
        })
        .collect();
    let (a, b) = arc_circles(d, tv, j);
    let (ua, ub) = arc_circles(d, tu, j);
    if a == b {
        EdgeMap { map, a, b, split: Some((ua, ub)), merged: None }
    } else {
        EdgeMap { map, a, b, split: None, merged: Some(ua) }
    }
}

/// Calls `f(target_labels, coefficient)` for each term of the TQFT differential
/// applied to the generator with labels `x`, ignoring the cube sign.
#[inline]
pub fn tqft_terms(em: &EdgeMap, x: u32, mut f: impl FnMut(u32)) {
    let mut rest = 0u32;
    for (i, &t) in em.map.iter().enumerate() {
        if i != em.a && i != em.b && x >> i & 1 == 1 {
            rest |= 1 << t;
        }
    }
    let la = x >> em.a & 1;
    let lb = x >> em.b & 1;
    if let Some(c) = em.merged {
        match la + lb {
            0 => f(rest),
            1 => f(rest | 1 << c),
            _ => {}
        }
    } else if let Some((c1, c2)) = em.split {
        if la == 0 {
            f(rest | 1 << c2);
            f(rest | 1 << c1);
        } else {
            f(rest | 1 << c1 | 1 << c2);
        }
    }
}

/// Identifies a block of the complex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BlockKey {
    pub q: i32,
    pub k: Option<i32>,
}

/// One graded piece: a cochain complex supported in degrees
/// `min_degree .. min_degree + basis.len()`.
#[derive(Clone, Debug)]
pub struct Block {
    pub key: BlockKey,
    pub min_degree: i32,
    /// Global generator indices in each degree.
    pub basis: Vec<Vec<usize>>,
    /// `differentials[t]` maps degree `min_degree + t` to the next one.
    pub differentials: Vec<SparseMatrix>,
}

impl Block {
    pub fn max_degree(&self) -> i32 {
        self.min_degree + self.basis.len() as i32 - 1
    }

    pub fn dim(&self, i: i32) -> usize {
        let t = i - self.min_degree;
        if t < 0 || t as usize >= self.basis.len() {
            0
        } else {
            self.basis[t as usize].len()
        }
    }

    /// Differential out of degree `i`, if both ends are in range.
    pub fn differential(&self, i: i32) -> Option<&SparseMatrix> {
        let t = i - self.min_degree;
        if t < 0 {
            None
        } else {
            self.differentials.get(t as usize)
        }
    }

    pub fn degrees(&self) -> impl Iterator<Item = i32> + '_ {
        (0..self.basis.len() as i32).map(move |t| self.min_degree + t)
    }
}

/// Khovanov complex split into blocks, with integer differentials.
#[derive(Clone, Debug)]
pub struct GradedComplex {
    pub field: Field,
    pub annular: bool,
    pub cube: Cube,
    pub generators: Vec<LabeledGenerator>,
    pub blocks: Vec<Block>,
    /// Generator → (block, position in its degree).
    pub location: Vec<(u32, u32)>,
}

fn check_field(field: Field) -> Result<()> {
    match field {
        Field::Prime(p) if !is_prime(p) => Err(Error::UnsupportedField(format!("{p} is not prime"))),
        Field::Prime(p) if p >= crate::field::MAX_PRIME => {
            Err(Error::UnsupportedField(format!("{p} exceeds 2^31")))
        }
        _ => Ok(()),
    }
}

pub fn khovanov_complex(d: &AnnularDiagram, field: Field) -> Result<GradedComplex> {
    build_complex(d, field, false)
}

pub fn annular_complex(d: &AnnularDiagram, field: Field) -> Result<GradedComplex> {
    build_complex(d, field, true)
}

/// All differential terms `(source, target, ±1)` of the cube, over Z.
pub fn differential_terms(d: &AnnularDiagram, cube: &Cube, annular: bool) -> Vec<(usize, usize, i64)> {
    let n = cube.n;
    let nu = standard_sign_assignment(n);
    let per_vertex: Vec<Vec<(usize, usize, i64)>> = (0..1u32 << n)
        .into_par_iter()
        .map(|v| {
            let tv = cube.traced(v);
            let ntv = tv.nontrivial_mask();
            let mut out = Vec::new();
            for j in (0..n).filter(|&j| !bit(v, j)) {
                let u = v | 1 << j;
                let tu = cube.traced(u);
                let ntu = tu.nontrivial_mask();
                let em = edge_map(d, tv, tu, j);
                let sign = if nu.value(v, j) == 1 { -1 } else { 1 };
                for x in 0..1u32 << tv.count() {
                    let src = cube.index(v, x);
                    let k_src = annular_k(ntv, x);
                    tqft_terms(&em, x, |y| {
                        if !annular || annular_k(ntu, y) == k_src {
                            out.push((src, cube.index(u, y), sign));
                        }
                    });
                }
            }
            out
        })
        .collect();
    per_vertex.into_iter().flatten().collect()
}

#[inline]
fn annular_k(nontrivial: u32, labels: u32) -> i32 {
    (nontrivial & !labels).count_ones() as i32 - (nontrivial & labels).count_ones() as i32
}

fn build_complex(d: &AnnularDiagram, field: Field, annular: bool) -> Result<GradedComplex> {
    check_field(field)?;
    let cube = Cube::new(d)?;
    let generators = cube.generators();
    let mut order_of: Vec<usize> = vec![0; generators.len()];
    {
        // generator list is in canonical order; map cube index → list position
        for (pos, g) in generators.iter().enumerate() {
            order_of[cube.index(g.v, g.labels)] = pos;
        }
    }
    let key_of = |g: &LabeledGenerator| BlockKey { q: g.q, k: annular.then_some(g.k) };
    let mut grouped: BTreeMap<BlockKey, BTreeMap<i32, Vec<usize>>> = BTreeMap::new();
    for (pos, g) in generators.iter().enumerate() {
        grouped.entry(key_of(g)).or_default().entry(g.i).or_default().push(pos);
    }
    let mut location = vec![(0u32, 0u32); generators.len()];
    let mut blocks = Vec::with_capacity(grouped.len());
    for (bi, (key, by_degree)) in grouped.into_iter().enumerate() {
        let min_degree = *by_degree.keys().next().unwrap();
        let max_degree = *by_degree.keys().last().unwrap();
        let mut basis = vec![Vec::new(); (max_degree - min_degree + 1) as usize];
        for (i, gens) in by_degree {
            for (local, &g) in gens.iter().enumerate() {
                location[g] = (bi as u32, local as u32);
            }
            basis[(i - min_degree) as usize] = gens;
        }
        let differentials = (0..basis.len().saturating_sub(1))
            .map(|t| SparseMatrix::zeros(basis[t + 1].len(), basis[t].len()))
            .collect();
        blocks.push(Block { key, min_degree, basis, differentials });
    }
    for (src, tgt, coef) in differential_terms(d, &cube, annular) {
        let (s, t) = (order_of[src], order_of[tgt]);
        let (bs, ls) = location[s];
        let (bt, lt) = location[t];
        if bs != bt {
            return Err(Error::Consistency("differential leaves its block".into()));
        }
        let block = &mut blocks[bs as usize];
        let deg = generators[s].i - block.min_degree;
        block.differentials[deg as usize].push(lt as usize, ls as usize, coef);
    }
    Ok(GradedComplex { field, annular, cube, generators, blocks, location })
}

impl GradedComplex {
    pub fn block(&self, key: BlockKey) -> Option<&Block> {
        self.blocks.iter().find(|b| b.key == key)
    }

    /// Checks `d ∘ d = 0` over Z in every block.
    pub fn check_d_squared(&self) -> Result<()> {
        for b in &self.blocks {
            for t in 1..b.differentials.len() {
                let dd = b.differentials[t].mul(&b.differentials[t - 1]);
                if !dd.is_zero() {
                    return Err(Error::Consistency(format!(
                        "d² ≠ 0 in block {:?} at degree {}",
                        b.key,
                        b.min_degree + t as i32 - 1
                    )));
                }
            }
        }
        Ok(())
    }

    /// Chain-group dimensions keyed by (i, q, k).
    pub fn chain_dims(&self) -> PoincarePolynomial {
        let mut terms = BTreeMap::new();
        for b in &self.blocks {
            for i in b.degrees() {
                if b.dim(i) > 0 {
                    terms.insert(Grading { i, q: b.key.q, k: b.key.k }, b.dim(i));
                }
            }
        }
        PoincarePolynomial { terms }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Grading {
    pub i: i32,
    pub q: i32,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub k: Option<i32>,
}

/// Nonzero dimensions keyed by grading.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PoincarePolynomial {
    pub terms: BTreeMap<Grading, usize>,
}

#[derive(Serialize)]
struct BlockRow {
    i: i32,
    q: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<i32>,
    dim: usize,
}

impl PoincarePolynomial {
    pub fn dim(&self, i: i32, q: i32) -> usize {
        self.terms
            .iter()
            .filter(|(g, _)| g.i == i && g.q == q)
            .map(|(_, &d)| d)
            .sum()
    }

    pub fn dim3(&self, i: i32, q: i32, k: i32) -> usize {
        self.terms.get(&Grading { i, q, k: Some(k) }).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.terms.values().sum()
    }

    /// Sums over the annular grading.
    pub fn forget_k(&self) -> PoincarePolynomial {
        let mut terms = BTreeMap::new();
        for (g, &d) in &self.terms {
            *terms.entry(Grading { i: g.i, q: g.q, k: None }).or_insert(0) += d;
        }
        PoincarePolynomial { terms }
    }

    /// Total dimension in each `(q, k)`, summed over homological degree.
    pub fn by_qk(&self) -> BTreeMap<(i32, Option<i32>), usize> {
        let mut out = BTreeMap::new();
        for (g, &d) in &self.terms {
            *out.entry((g.q, g.k)).or_insert(0) += d;
        }
        out
    }

    /// Total dimension in each `q`.
    pub fn by_q(&self) -> BTreeMap<i32, usize> {
        let mut out = BTreeMap::new();
        for (g, &d) in &self.terms {
            *out.entry(g.q).or_insert(0) += d;
        }
        out
    }

    /// `Σ_i (−1)^i dim` for each `q`.
    pub fn euler_by_q(&self) -> BTreeMap<i32, i64> {
        let mut out = BTreeMap::new();
        for (g, &d) in &self.terms {
            let s = if g.i.rem_euclid(2) == 0 { 1 } else { -1 };
            *out.entry(g.q).or_insert(0) += s * d as i64;
        }
        out.retain(|_, v| *v != 0);
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<BlockRow> = self
            .terms
            .iter()
            .map(|(g, &dim)| BlockRow { i: g.i, q: g.q, k: g.k, dim })
            .collect();
        serde_json::json!({ "blocks": rows })
    }
}

impl fmt::Display for PoincarePolynomial {
    /// Renders `Σ dim · t^i q^j` (annular degrees shown as `a^k`).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (g, &d) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let mut factors = Vec::new();
            if g.i != 0 {
                factors.push(format!("t^{}", g.i));
            }
            factors.push(format!("q^{}", g.q));
            if let Some(k) = g.k {
                if k != 0 {
                    factors.push(format!("a^{k}"));
                }
            }
            if d != 1 {
                write!(f, "{d}·")?;
            }
            write!(f, "{}", factors.join(" "))?;
        }
        Ok(())
    }
}

/// Homology dimensions of every block.
pub fn homology(c: &GradedComplex) -> PoincarePolynomial {
    let field = c.field;
    let per_block: Vec<Vec<(Grading, usize)>> = c
        .blocks
        .par_iter()
        .map(|b| {
            let ranks: Vec<usize> = b.differentials.iter().map(|m| m.rank(field)).collect();
            b.degrees()
                .enumerate()
                .filter_map(|(t, i)| {
                    let out = ranks.get(t).copied().unwrap_or(0);
                    let inc = if t > 0 { ranks[t - 1] } else { 0 };
                    let dim = b.basis[t].len() - out - inc;
                    (dim > 0).then_some((Grading { i, q: b.key.q, k: b.key.k }, dim))
                })
                .collect()
        })
        .collect();
    PoincarePolynomial { terms: per_block.into_iter().flatten().collect() }
}

/// Khovanov homology of a diagram over `field`.
pub fn kh(d: &AnnularDiagram, field: Field) -> Result<PoincarePolynomial> {
    with_loops_split(d, field, false)
}

/// Annular Khovanov homology of a diagram over `field`.
pub fn akh(d: &AnnularDiagram, field: Field) -> Result<PoincarePolynomial> {
    with_loops_split(d, field, true)
}

/// Each free loop is a tensor factor `V`, so it is cheaper to take it out of
/// the cube and multiply afterwards.
fn with_loops_split(d: &AnnularDiagram, field: Field, annular: bool) -> Result<PoincarePolynomial> {
    let build = if annular { annular_complex } else { khovanov_complex };
    if d.n() == 0 || d.free_loops().is_empty() {
        return Ok(homology(&build(d, field)?));
    }
    let mut p = homology(&build(&d.without_free_loops(), field)?);
    for l in d.free_loops() {
        let dk = if annular && !l.trivial() { 1 } else { 0 };
        let mut terms = BTreeMap::new();
        for (g, &dim) in &p.terms {
            for (dq, sk) in [(1, dk), (-1, -dk)] {
                let h = Grading { i: g.i, q: g.q + dq, k: g.k.map(|k| k + sk) };
                *terms.entry(h).or_insert(0) += dim;
            }
        }
        p = PoincarePolynomial { terms };
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::parse_diagram;

    #[test]
    fn standard_signs() {
        assert_eq!(standard_sign_assignment(1).value(0, 0), 0);
        // (1,0) → (1,1) flips position 2 with ε₁ = 1
        assert_eq!(standard_sign_assignment(2).value(0b01, 1), 1);
        for n in 0..5 {
            assert!(standard_sign_assignment(n).is_cocycle());
        }
    }

    #[test]
    fn unknot_homology() {
        let d = parse_diagram(r#"{"crossings":[],"free_loops":[{"parity":0}]}"#).unwrap();
        let h = kh(&d, Field::Prime(3)).unwrap();
        assert_eq!(h.dim(0, 1), 1);
        assert_eq!(h.dim(0, -1), 1);
        assert_eq!(h.total(), 2);
    }
}
