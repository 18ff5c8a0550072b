//! The cyclic action on the Khovanov complex of a periodic diagram and what
//! it computes: eigenspace splittings, Borel cohomology, Smith inequalities and
//! the fixed generators.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rayon::prelude::*;
use serde::Serialize;

use crate::diagram::{quotient_diagram, AnnularDiagram, OrbitMaps, PeriodicSymmetry};
use crate::error::{Error, Result};
use crate::field::{is_prime, multiplicative_order, prime_power, reduce, Field};
use crate::homology::{akh, kh, BlockKey, GradedComplex, Grading, PoincarePolynomial, SignAssignment};
use crate::linalg::{rank_mod_p, DenseMatrix, SparseMatrix, TaggedEchelon};
use crate::resolution::{bit, trace, Cube, Vertex};

use crate::diagram::permute_vertex;

/// `c(v)` for every cube vertex, making `(−1)^{c}` intertwine the signs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorrectionCochain {
    pub c: Vec<u8>,
}

/// Solves `ν(σv, σj) + ν(v, j) = c(v) + c(v + e_j)` with `c(0) = 0`.
pub fn correction_cochain(n: usize, nu: &SignAssignment, sigma: &[usize]) -> Result<CorrectionCochain> {
    if sigma.len() != n {
        return Err(Error::InvalidArgument(format!("permutation of {} for {n} coordinates", sigma.len())));
    }
    let mut c = vec![u8::MAX; 1 << n];
    c[0] = 0;
    let mut queue = VecDeque::from([0u32]);
    let rhs = |v: Vertex, j: usize| nu.value(permute_vertex(sigma, v), sigma[j]) ^ nu.value(v, j);
    while let Some(v) = queue.pop_front() {
        for j in 0..n {
            // walk both up and down edges through v
            let (lo, hi) = if bit(v, j) { (v ^ 1 << j, v) } else { (v, v | 1 << j) };
            let other = if lo == v { hi } else { lo };
            let want = c[v as usize] ^ rhs(lo, j);
            if c[other as usize] == u8::MAX {
                c[other as usize] = want;
                queue.push_back(other);
            } else if c[other as usize] != want {
                return Err(Error::Consistency(format!("sign correction has no solution at {other:#b}")));
            }
        }
    }
    Ok(CorrectionCochain { c })
}

/// A signed permutation of generators (global indices).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainAction {
    pub order: u32,
    pub target: Vec<usize>,
    pub sign: Vec<i8>,
}

impl ChainAction {
    pub fn identity(len: usize, order: u32) -> Self {
        ChainAction { order, target: (0..len).collect(), sign: vec![1; len] }
    }

    /// Matrix of the action on the degree-`i` part of `block`.
    pub fn block_matrix(&self, cx: &GradedComplex, block: usize, i: i32) -> SparseMatrix {
        let b = &cx.blocks[block];
        let dim = b.dim(i);
        let mut m = SparseMatrix::zeros(dim, dim);
        if dim == 0 {
            return m;
        }
        for (col, &g) in b.basis[(i - b.min_degree) as usize].iter().enumerate() {
            let (tb, row) = cx.location[self.target[g]];
            debug_assert_eq!(tb as usize, block);
            m.push(row as usize, col, self.sign[g] as i64);
        }
        m
    }

    fn power_is_identity(&self, m: u32) -> bool {
        (0..self.target.len()).all(|x| {
            let (mut y, mut s) = (x, 1i8);
            for _ in 0..m {
                s *= self.sign[y];
                y = self.target[y];
            }
            y == x && s == 1
        })
    }
}

/// Positions, at `σv`, of the images of the circles at `v`.
fn circle_image(d: &AnnularDiagram, s: &PeriodicSymmetry, cube: &Cube, v: Vertex) -> (Vertex, Vec<u8>) {
    let w = permute_vertex(&s.crossing_perm, v);
    let tv = cube.traced(v);
    let tw = cube.traced(w);
    let loops = d.free_loops().len();
    let ev = tv.count() - loops;
    let ew = tw.count() - loops;
    let map = (0..tv.count())
        .map(|i| {
            if i < ev {
                let img = s.edge_perm[&tv.ids[i]];
                tw.circle_of_edge[d.edge_index(img).unwrap()]
            } else {
                (ew + s.loop_perm[i - ev]) as u8
            }
        })
        .collect();
    (w, map)
}

/// The action `x ↦ (−1)^{c(v)} σx`, checked to commute with the differential
/// and to have the symmetry's order.
pub fn chain_action(
    d: &AnnularDiagram,
    cx: &GradedComplex,
    s: &PeriodicSymmetry,
    c: &CorrectionCochain,
) -> Result<ChainAction> {
    let cube = &cx.cube;
    let len = cube.len();
    let mut target = vec![0usize; len];
    let mut sign = vec![1i8; len];
    for v in 0..1u32 << cube.n {
        let (w, map) = circle_image(d, s, cube, v);
        let sg = if c.c[v as usize] == 1 { -1 } else { 1 };
        for x in 0..1u32 << map.len() {
            let y = map
                .iter()
                .enumerate()
                .fold(0u32, |acc, (i, &t)| if x >> i & 1 == 1 { acc | 1 << t } else { acc });
            let src = cube.index(v, x);
            target[src] = cube.index(w, y);
            sign[src] = sg;
        }
    }
    let act = ChainAction { order: s.order, target, sign };
    if !act.power_is_identity(s.order) {
        return Err(Error::Consistency(format!("the chain action does not have order {}", s.order)));
    }
    check_commutes(cx, &act)?;
    Ok(act)
}

/// Verifies `G d = d G` block by block over Z.
pub fn check_commutes(cx: &GradedComplex, act: &ChainAction) -> Result<()> {
    for (bi, b) in cx.blocks.iter().enumerate() {
        for (t, dm) in b.differentials.iter().enumerate() {
            let i = b.min_degree + t as i32;
            let g0 = act.block_matrix(cx, bi, i);
            let g1 = act.block_matrix(cx, bi, i + 1);
            let mut lhs = dm.mul(&g0);
            let mut rhs = g1.mul(dm);
            for col in lhs.columns.iter_mut().chain(rhs.columns.iter_mut()) {
                col.sort_unstable();
            }
            if lhs != rhs {
                return Err(Error::Consistency(format!(
                    "action does not commute with d in block {:?}, degree {i}",
                    b.key
                )));
            }
        }
        if act.target.iter().enumerate().any(|(x, &y)| cx.location[x].0 != cx.location[y].0) {
            return Err(Error::Consistency("action moves a generator between blocks".into()));
        }
    }
    Ok(())
}

/// Builds complex, correction and action for a diagram carrying a symmetry.
pub fn equivariant_complex(
    d: &AnnularDiagram,
    field: Field,
    annular: bool,
) -> Result<(GradedComplex, ChainAction)> {
    let s = d
        .symmetry()
        .ok_or_else(|| Error::InvalidSymmetry("diagram carries no symmetry".into()))?;
    let cx = if annular {
        crate::homology::annular_complex(d, field)?
    } else {
        crate::homology::khovanov_complex(d, field)?
    };
    let nu = crate::homology::standard_sign_assignment(d.n());
    let c = correction_cochain(d.n(), &nu, &s.crossing_perm)?;
    let act = chain_action(d, &cx, s, &c)?;
    Ok((cx, act))
}

/// Homology split by the cyclotomic factors of `X^{p^n} − 1` over `F_r`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EigenDecomposition {
    pub p: u64,
    pub n: u32,
    pub r: u64,
    /// `F_r`-dimension of the `Φ_{p^s}` part, for `s = 0..=n`.
    pub dims: Vec<usize>,
    /// The same split per grading.
    pub graded: Vec<PoincarePolynomial>,
    /// `graded[s]` divided by `φ(p^s)`.
    pub delta: Vec<PoincarePolynomial>,
}

pub fn euler_phi_prime_power(p: u64, s: u32) -> u64 {
    if s == 0 {
        1
    } else {
        p.pow(s) - p.pow(s - 1)
    }
}

/// `Φ_{p^s}(A)` for a square matrix over `F_r`.
fn cyclotomic_at(a: &DenseMatrix, p: u64, s: u32) -> DenseMatrix {
    let r = a.p;
    let dim = a.rows;
    if s == 0 {
        return a.add_scaled_identity(r - 1);
    }
    let step = p.pow(s - 1);
    // A^{step} by repeated squaring
    let mut base = a.clone();
    let mut pw = DenseMatrix::identity(dim, r);
    let mut e = step;
    while e > 0 {
        if e & 1 == 1 {
            pw = pw.mul(&base);
        }
        base = base.mul(&base);
        e >>= 1;
    }
    let mut acc = DenseMatrix::zeros(dim, dim, r);
    let mut term = DenseMatrix::identity(dim, r);
    for _ in 0..p {
        acc = acc.add(&term);
        term = term.mul(&pw);
    }
    acc
}

/// Homology representatives in degree `i` of block `bi` and the matrix of the action on them.
fn homology_action(cx: &GradedComplex, act: &ChainAction, bi: usize, i: i32, r: u64) -> Result<DenseMatrix> {
    let b = &cx.blocks[bi];
    let dim = b.dim(i);
    let cycles: Vec<Vec<u64>> = match b.differential(i) {
        Some(dm) if dm.rows > 0 => dm.to_dense_mod(r).nullspace(),
        _ => (0..dim)
            .map(|k| {
                let mut e = vec![0u64; dim];
                e[k] = 1;
                e
            })
            .collect(),
    };
    let boundaries: Vec<Vec<u64>> = match i
        .checked_sub(1)
        .filter(|&j| j >= b.min_degree)
        .and_then(|j| b.differential(j))
    {
        Some(dm) => {
            let dense = dm.to_dense_mod(r).transpose();
            (0..dense.rows).map(|k| dense.row(k).to_vec()).collect()
        }
        None => Vec::new(),
    };
    let mut probe = TaggedEchelon::new(r, 0);
    for v in &boundaries {
        probe.insert(v.clone(), vec![]);
    }
    let mut reps = Vec::new();
    for z in cycles {
        if probe.insert(z.clone(), vec![]).is_some() {
            reps.push(z);
        }
    }
    let h = reps.len();
    let mut ech = TaggedEchelon::new(r, h);
    for v in boundaries {
        ech.insert(v, vec![0; h]);
    }
    for (k, z) in reps.iter().enumerate() {
        let mut tag = vec![0; h];
        tag[k] = 1;
        ech.insert(z.clone(), tag);
    }
    let g = act.block_matrix(cx, bi, i).to_dense_mod(r);
    let mut a = DenseMatrix::zeros(h, h, r);
    for (k, z) in reps.iter().enumerate() {
        let mut w = g.apply(z);
        let coords = ech.reduce(&mut w);
        if w.iter().any(|&x| x != 0) {
            return Err(Error::Consistency("action does not preserve cycles".into()));
        }
        for (row, &x) in coords.iter().enumerate() {
            a.set(row, k, x);
        }
    }
    Ok(a)
}

/// Splits the homology of a `p^n`-periodic diagram's complex over `F_r`.
pub fn eigen_decompose(cx: &GradedComplex, act: &ChainAction, p: u64, n: u32, r: u64) -> Result<EigenDecomposition> {
    if !is_prime(p) || n == 0 {
        return Err(Error::InvalidArgument(format!("period must be p^n with p prime, n ≥ 1; got {p}^{n}")));
    }
    let m = p.pow(n);
    if act.order as u64 != m {
        return Err(Error::InvalidArgument(format!("action has order {}, expected {m}", act.order)));
    }
    if !is_prime(r) {
        return Err(Error::UnsupportedField(format!("{r} is not prime")));
    }
    if r == p {
        return Err(Error::UnsupportedField(format!("r = p = {p}: the characteristic must not divide the period")));
    }
    if cx.field != Field::Prime(r) {
        return Err(Error::UnsupportedField(format!("complex is over {}, expected F{r}", cx.field)));
    }
    let phi = euler_phi_prime_power(p, n);
    if multiplicative_order(r, m) != Some(phi) {
        return Err(Error::InvalidArgument(format!(
            "{r} does not have multiplicative order {phi} modulo {m}"
        )));
    }
    // dense work only where there is homology to split
    let ranks = crate::homology::homology(cx);
    let jobs: Vec<(usize, i32)> = cx
        .blocks
        .iter()
        .enumerate()
        .flat_map(|(bi, b)| b.degrees().map(move |i| (bi, i)))
        .filter(|&(bi, i)| {
            let key = cx.blocks[bi].key;
            ranks.terms.get(&Grading { i, q: key.q, k: key.k }).is_some_and(|&d| d > 0)
        })
        .collect();
    let results: Vec<Result<(Grading, Vec<usize>)>> = jobs
        .par_iter()
        .map(|&(bi, i)| {
            let a = homology_action(cx, act, bi, i, r)?;
            let key = cx.blocks[bi].key;
            let nullities = (0..=n)
                .map(|s| if a.rows == 0 { 0 } else { a.rows - cyclotomic_at(&a, p, s).rank() })
                .collect::<Vec<_>>();
            if nullities.iter().sum::<usize>() != a.rows {
                return Err(Error::Consistency("eigenspaces do not fill the homology".into()));
            }
            Ok((Grading { i, q: key.q, k: key.k }, nullities))
        })
        .collect();
    let mut graded = vec![PoincarePolynomial::default(); n as usize + 1];
    let mut delta = vec![PoincarePolynomial::default(); n as usize + 1];
    let mut dims = vec![0usize; n as usize + 1];
    for res in results {
        let (g, nullities) = res?;
        for (s, &k) in nullities.iter().enumerate() {
            if k == 0 {
                continue;
            }
            let f = euler_phi_prime_power(p, s as u32) as usize;
            if k % f != 0 {
                return Err(Error::Consistency(format!(
                    "eigenspace of dimension {k} at {g:?} is not divisible by {f}"
                )));
            }
            dims[s] += k;
            graded[s].terms.insert(g, k);
            delta[s].terms.insert(g, k / f);
        }
    }
    Ok(EigenDecomposition { p, n, r, dims, graded, delta })
}

/// A graded piece of an equivariant complex in the abstract.
#[derive(Clone, Debug)]
pub struct EquivariantBlock {
    pub min_degree: i32,
    pub dims: Vec<usize>,
    /// `d[t]` maps degree `min_degree + t` to the next.
    pub d: Vec<SparseMatrix>,
    /// `(target, sign)` of each basis vector, per degree.
    pub action: Vec<Vec<(usize, i8)>>,
}

impl EquivariantBlock {
    fn max_degree(&self) -> i32 {
        self.min_degree + self.dims.len() as i32 - 1
    }

    fn dim(&self, i: i32) -> usize {
        if i < self.min_degree || i > self.max_degree() {
            0
        } else {
            self.dims[(i - self.min_degree) as usize]
        }
    }
}

/// Cohomology of `Hom(P_•, C)` with `P_•` the 2-periodic resolution of `F_p`
/// over `F_p[Z_p]`, in total degrees `t0..=max_degree`.
pub fn borel_block(b: &EquivariantBlock, p: u64, t0: i32, max_degree: i32) -> Vec<usize> {
    let (imin, imax) = (b.min_degree, b.max_degree());
    // components (i, j) of total degree T, with offsets
    let layout = |t: i32| -> Vec<(i32, usize)> {
        let mut off = 0;
        let mut out = Vec::new();
        if t < imin {
            return out;
        }
        for i in imin..=imax.min(t) {
            out.push((i, off));
            off += b.dim(i);
        }
        out
    };
    let total_dim = |l: &[(i32, usize)]| l.last().map_or(0, |&(i, off)| off + b.dim(i));
    let norm_image = |i: i32, x: usize| -> Vec<(usize, i64)> {
        let acts = &b.action[(i - imin) as usize];
        let mut out: BTreeMap<usize, i64> = BTreeMap::new();
        let (mut y, mut s) = (x, 1i64);
        for _ in 0..p {
            *out.entry(y).or_default() += s;
            let (ny, ns) = acts[y];
            y = ny;
            s *= ns as i64;
        }
        out.into_iter().collect()
    };
    let differential = |t: i32| -> SparseMatrix {
        let src = layout(t);
        let dst = layout(t + 1);
        let mut m = SparseMatrix::zeros(total_dim(&dst), total_dim(&src));
        let dst_off: BTreeMap<i32, usize> = dst.iter().copied().collect();
        for &(i, off) in &src {
            let j = t - i;
            let sgn = if i.rem_euclid(2) == 0 { 1 } else { -1 };
            for x in 0..b.dim(i) {
                let col = off + x;
                if i < imax {
                    let dm = &b.d[(i - imin) as usize];
                    let o = dst_off[&(i + 1)];
                    for &(row, v) in &dm.columns[x] {
                        m.push(o + row as usize, col, v);
                    }
                }
                let o = dst_off[&i];
                if j % 2 == 0 {
                    let (y, s) = b.action[(i - imin) as usize][x];
                    m.push(o + y, col, sgn * s as i64);
                    m.push(o + x, col, -sgn);
                } else {
                    for (y, v) in norm_image(i, x) {
                        m.push(o + y, col, sgn * v);
                    }
                }
            }
        }
        m
    };
    let ranks: Vec<usize> = (t0 - 1..=max_degree)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&t| rank_mod_p(&differential(t), p))
        .collect();
    (t0..=max_degree)
        .map(|t| {
            let k = (t - t0) as usize;
            total_dim(&layout(t)) - ranks[k + 1] - ranks[k]
        })
        .collect()
}

/// Dimensions for total degrees `min_degree..=max_degree` of one block.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BorelRow {
    pub q: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<i32>,
    pub dims: Vec<usize>,
    pub stable: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BorelTable {
    pub p: u64,
    pub min_degree: i32,
    pub max_degree: i32,
    pub blocks: Vec<BorelRow>,
    pub totals: Vec<usize>,
    pub stable_total: usize,
    /// Whether the last four degrees already repeat with period two.
    pub stabilized: bool,
}

/// Default truncation degree: top homological degree plus `4p`.
pub fn default_borel_degree(cx: &GradedComplex, p: u64) -> i32 {
    let imax = cx.blocks.iter().map(|b| b.max_degree()).max().unwrap_or(0);
    imax + 4 * p as i32
}

/// Borel equivariant cohomology of the complex in total degrees up to `max_degree`.
pub fn borel_ekh(cx: &GradedComplex, act: &ChainAction, p: u64, max_degree: i32) -> Result<BorelTable> {
    if !is_prime(p) {
        return Err(Error::InvalidArgument(format!("{p} is not prime")));
    }
    if act.order as u64 != p {
        return Err(Error::InvalidArgument(format!("action has order {}, expected {p}", act.order)));
    }
    if cx.field != Field::Prime(p) {
        return Err(Error::UnsupportedField(format!("complex is over {}, expected F{p}", cx.field)));
    }
    let imin = cx.blocks.iter().map(|b| b.min_degree).min().unwrap_or(0);
    let imax = cx.blocks.iter().map(|b| b.max_degree()).max().unwrap_or(0);
    if max_degree < imax + 2 * p as i32 {
        return Err(Error::InvalidArgument(format!(
            "max degree {max_degree} is below {} (top degree + 2p)",
            imax + 2 * p as i32
        )));
    }
    let mut by_block: Vec<(BlockKey, Vec<usize>)> = Vec::new();
    for (bi, b) in cx.blocks.iter().enumerate() {
        let action = b
            .degrees()
            .map(|i| {
                b.basis[(i - b.min_degree) as usize]
                    .iter()
                    .map(|&g| (cx.location[act.target[g]].1 as usize, act.sign[g]))
                    .collect()
            })
            .collect();
        debug_assert!(b
            .basis
            .iter()
            .flatten()
            .all(|&g| cx.location[act.target[g]].0 as usize == bi));
        let eb = EquivariantBlock {
            min_degree: b.min_degree,
            dims: b.basis.iter().map(Vec::len).collect(),
            d: b.differentials.clone(),
            action,
        };
        by_block.push((b.key, borel_block(&eb, p, imin, max_degree)));
    }
    let len = (max_degree - imin + 1) as usize;
    let totals: Vec<usize> = (0..len).map(|k| by_block.iter().map(|(_, v)| v[k]).sum()).collect();
    let stabilized = by_block
        .iter()
        .all(|(_, v)| len >= 4 && v[len - 1] == v[len - 3] && v[len - 2] == v[len - 4]);
    let blocks = by_block
        .into_iter()
        .map(|(key, dims)| BorelRow { q: key.q, k: key.k, stable: dims[len - 1], dims })
        .collect();
    Ok(BorelTable {
        p,
        min_degree: imin,
        max_degree,
        blocks,
        stable_total: totals[len - 1],
        totals,
        stabilized,
    })
}

/// One compared pair of dimensions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InequalityRow {
    pub kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub i: Option<i32>,
    pub q: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<i32>,
    pub left: usize,
    pub right: usize,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SmithReport {
    pub p: u64,
    pub rows: Vec<InequalityRow>,
    pub pass: bool,
}

fn require_prime_symmetry(d: &AnnularDiagram, p: u64) -> Result<&PeriodicSymmetry> {
    let s = d
        .symmetry()
        .ok_or_else(|| Error::InvalidSymmetry("diagram carries no symmetry".into()))?;
    if !is_prime(p) || s.order as u64 != p {
        return Err(Error::InvalidArgument(format!("symmetry of order {} with p = {p}", s.order)));
    }
    Ok(s)
}

/// Smith inequalities between a `p`-periodic diagram and its quotient, plus the
/// filtration bound `Σ_k AKh ≥ Kh` on both.
pub fn verify_smith(d: &AnnularDiagram, p: u64) -> Result<SmithReport> {
    let s = require_prime_symmetry(d, p)?;
    let (quot, _) = quotient_diagram(d, s)?;
    let field = Field::Prime(p);
    let pi = p as i32;
    let akh_up = akh(d, field)?;
    let akh_down = akh(&quot, field)?;
    let kh_up = kh(d, field)?;
    let kh_down = kh(&quot, field)?;
    let up_qk = akh_up.by_qk();
    let mut rows = Vec::new();
    let mut push = |kind, i, q, k, left: usize, right: usize| {
        rows.push(InequalityRow { kind, i, q, k, left, right, holds: left >= right });
    };
    let mut kh_side: BTreeMap<i32, usize> = BTreeMap::new();
    for (&(q, k), &right) in &akh_down.by_qk() {
        let k = k.expect("annular block");
        let qq = pi * q - (pi - 1) * k;
        let left = up_qk.get(&(qq, Some(k))).copied().unwrap_or(0);
        push("annular", None, q, Some(k), left, right);
        *kh_side.entry(qq).or_default() += right;
    }
    let kh_by_q = kh_up.by_q();
    for (&q, &right) in &kh_side {
        push("khovanov", None, q, None, kh_by_q.get(&q).copied().unwrap_or(0), right);
    }
    for (label, a, k) in [("filtration-periodic", &akh_up, &kh_up), ("filtration-quotient", &akh_down, &kh_down)] {
        let flat = a.forget_k();
        for (g, &dim) in &k.terms {
            push(label, Some(g.i), g.q, None, flat.dim(g.i, g.q), dim);
        }
    }
    let pass = rows.iter().all(|r| r.holds);
    Ok(SmithReport { p, rows, pass })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FixedBlockRow {
    pub q: i32,
    pub k: i32,
    pub lifted_q: i32,
    pub quotient: usize,
    pub invariant: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FixedGeneratorReport {
    pub p: u64,
    pub quotient_generators: usize,
    pub invariant_generators: usize,
    pub blocks: Vec<FixedBlockRow>,
    pub pass: bool,
}

/// Lifts each quotient vertex and labeling to the periodic cube.
fn lift_vertex(maps: &OrbitMaps, v: Vertex) -> Vertex {
    maps.crossing
        .iter()
        .enumerate()
        .fold(0, |acc, (c, &qc)| if bit(v, qc) { acc | 1 << c } else { acc })
}

/// Checks that lifting generators of the quotient gives exactly the
/// σ-invariant generators, with `q ↦ pq − (p−1)k` and `k ↦ k`.
pub fn verify_fixed_generators(d: &AnnularDiagram, p: u64) -> Result<FixedGeneratorReport> {
    let s = require_prime_symmetry(d, p)?;
    let (quot, maps) = quotient_diagram(d, s)?;
    let up = Cube::new(d)?;
    let down = Cube::new(&quot)?;
    let pi = p as i32;

    let up_gens = up.generators();
    let mut invariant = BTreeSet::new();
    for v in 0..1u32 << up.n {
        let (w, map) = circle_image(d, s, &up, v);
        if w != v {
            continue;
        }
        for x in 0..1u32 << map.len() {
            let y = map
                .iter()
                .enumerate()
                .fold(0u32, |acc, (i, &t)| if x >> i & 1 == 1 { acc | 1 << t } else { acc });
            if y == x {
                invariant.insert(up.index(v, x));
            }
        }
    }

    let loops_up = d.free_loops().len();
    let loops_down = quot.free_loops().len();
    let mut hits = BTreeSet::new();
    let mut blocks: BTreeMap<(i32, i32), (usize, usize)> = BTreeMap::new();
    for vq in 0..1u32 << down.n {
        let tq = down.traced(vq);
        let v = lift_vertex(&maps, vq);
        let tu = up.traced(v);
        let nontriv = |t: &crate::resolution::Traced| t.trivial.iter().filter(|&&x| !x).count();
        let triv = |t: &crate::resolution::Traced| t.trivial.iter().filter(|&&x| x).count();
        if nontriv(tq) != nontriv(tu) || triv(tu) != p as usize * triv(tq) {
            return Err(Error::Consistency(format!(
                "circle counts over quotient vertex {vq:#b} do not lift"
            )));
        }
        // quotient circle position of each upstairs circle
        let eu = tu.count() - loops_up;
        let eq = tq.count() - loops_down;
        let down_pos: Vec<usize> = (0..tu.count())
            .map(|i| {
                if i < eu {
                    let qe = maps.edge[&tu.ids[i]];
                    tq.circle_of_edge[quot.edge_index(qe).unwrap()] as usize
                } else {
                    eq + maps.free_loop[i - eu]
                }
            })
            .collect();
        for xq in 0..1u32 << tq.count() {
            let x = down_pos
                .iter()
                .enumerate()
                .fold(0u32, |acc, (i, &t)| if xq >> t & 1 == 1 { acc | 1 << i } else { acc });
            let gq = down.generator(vq, xq);
            let gu = up.generator(v, x);
            let idx = up.index(v, x);
            if !invariant.contains(&idx) {
                return Err(Error::Consistency(format!("lift of a quotient generator at {vq:#b} is not invariant")));
            }
            if gu.k != gq.k || gu.q != pi * gq.q - (pi - 1) * gq.k {
                return Err(Error::Consistency(format!(
                    "lift of ({}, {}) has gradings ({}, {})",
                    gq.q, gq.k, gu.q, gu.k
                )));
            }
            if !hits.insert(idx) {
                return Err(Error::Consistency("two quotient generators lift to one".into()));
            }
            blocks.entry((gq.q, gq.k)).or_default().0 += 1;
        }
    }
    for &idx in &invariant {
        let g = &up_gens[idx];
        // locate the quotient block this invariant generator should belong to
        let qk = blocks
            .keys()
            .copied()
            .find(|&(q, k)| k == g.k && pi * q - (pi - 1) * k == g.q);
        match qk {
            Some(key) => blocks.get_mut(&key).unwrap().1 += 1,
            None => {
                let q = (g.q + (pi - 1) * g.k) / pi;
                blocks.insert((q, g.k), (0, 1));
            }
        }
    }
    let rows: Vec<FixedBlockRow> = blocks
        .iter()
        .map(|(&(q, k), &(quotient, inv))| FixedBlockRow {
            q,
            k,
            lifted_q: pi * q - (pi - 1) * k,
            quotient,
            invariant: inv,
        })
        .collect();
    let pass = hits == invariant && rows.iter().all(|r| r.quotient == r.invariant);
    Ok(FixedGeneratorReport {
        p,
        quotient_generators: down.len(),
        invariant_generators: invariant.len(),
        blocks: rows,
        pass,
    })
}

/// Expected stable Borel rank per quantum grading: the quotient's annular
/// homology regraded by `(q, k) ↦ pq − (p−1)k`.
pub fn expected_stable_ranks(d: &AnnularDiagram, p: u64) -> Result<BTreeMap<i32, usize>> {
    let s = require_prime_symmetry(d, p)?;
    let (quot, _) = quotient_diagram(d, s)?;
    let pi = p as i32;
    let mut out = BTreeMap::new();
    for ((q, k), dim) in akh(&quot, Field::Prime(p))?.by_qk() {
        let k = k.unwrap();
        *out.entry(pi * q - (pi - 1) * k).or_insert(0) += dim;
    }
    Ok(out)
}

/// Which cube vertices are fixed by the crossing permutation.
pub fn fixed_vertices(s: &PeriodicSymmetry, n: usize) -> Vec<Vertex> {
    (0..1u32 << n).filter(|&v| permute_vertex(&s.crossing_perm, v) == v).collect()
}

/// Triviality classes of circles at `v`, used to sanity-check symmetry data.
pub fn circle_triviality(d: &AnnularDiagram, v: Vertex) -> Vec<bool> {
    trace(d, v).trivial
}

/// `x mod p` helper shared by reports.
pub fn residue(x: i64, p: u64) -> u64 {
    reduce(x, p)
}

/// Whether `m` is a prime power (the orders eigen splitting accepts).
pub fn is_prime_power(m: u64) -> bool {
    prime_power(m).is_some()
}
