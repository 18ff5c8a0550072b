//! Independent reference implementations used as test oracles. Nothing here
//! calls into the cube, homology, or moduli code under test; only diagram
//! accessors are shared.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};

use perkh_core::diagram::words::TangleWord;
use perkh_core::{parse_diagram, AnnularDiagram};
use rand::Rng;

pub fn hopf2() -> AnnularDiagram {
    parse_diagram(
        r#"{
        "crossings": [{"edges": [3,1,4,2], "sign": 1}, {"edges": [1,3,2,4], "sign": 1}],
        "ray_winding": {"1":1, "2":0, "3":0, "4":1},
        "symmetry": {"order": 2, "crossing_perm": [1,0], "edge_perm": {"1":3,"3":1,"2":4,"4":2}}
    }"#,
    )
    .unwrap()
}

pub fn trefoil3() -> AnnularDiagram {
    TangleWord::braid(2, &[1]).unwrap().periodic_closure(3).unwrap()
}

/// A random closed diagram with exactly `crossings` crossings (free loops allowed).
pub fn random_closure<R: Rng>(rng: &mut R, crossings: usize) -> AnnularDiagram {
    let width = rng.gen_range(0..=3usize);
    let w = TangleWord::random(rng, width, crossings, 6);
    w.closure_random_orientation(rng).unwrap()
}

/// A random `p`-periodic diagram with at most `max_crossings` crossings.
pub fn random_periodic<R: Rng>(rng: &mut R, p: usize, max_crossings: usize) -> AnnularDiagram {
    let per = rng.gen_range(1..=(max_crossings / p).max(1));
    let width = rng.gen_range(1..=3usize);
    let w = TangleWord::random(rng, width, per, 5);
    w.periodic_closure_random_orientation(p, rng).unwrap()
}

// ---------------------------------------------------------------- Khovanov

/// Circles of one smoothing, each as a sorted list of edge ids; free loops are
/// encoded as `u32::MAX - i`.
fn smoothing_circles(d: &AnnularDiagram, v: u32) -> Vec<Vec<u32>> {
    let mut parent: HashMap<u32, u32> = HashMap::new();
    fn find(p: &mut HashMap<u32, u32>, x: u32) -> u32 {
        let y = *p.entry(x).or_insert(x);
        if y == x {
            x
        } else {
            let r = find(p, y);
            p.insert(x, r);
            r
        }
    }
    let join = |a: u32, b: u32, p: &mut HashMap<u32, u32>| {
        let (ra, rb) = (find(p, a), find(p, b));
        if ra != rb {
            p.insert(ra, rb);
        }
    };
    for (j, c) in d.crossings().iter().enumerate() {
        let e = c.edges;
        if v >> j & 1 == 1 {
            join(e[0], e[3], &mut parent);
            join(e[1], e[2], &mut parent);
        } else {
            join(e[0], e[1], &mut parent);
            join(e[2], e[3], &mut parent);
        }
    }
    let keys: Vec<u32> = parent.keys().copied().collect();
    let mut classes: BTreeMap<u32, BTreeSet<u32>> = BTreeMap::new();
    for k in keys {
        let r = find(&mut parent, k);
        classes.entry(r).or_default().insert(k);
    }
    let mut out: Vec<Vec<u32>> = classes.into_values().map(|s| s.into_iter().collect()).collect();
    out.sort();
    for i in 0..d.free_loops().len() {
        out.push(vec![u32::MAX - i as u32]);
    }
    out
}

fn circle_parity(d: &AnnularDiagram, circle: &[u32]) -> u8 {
    if circle.len() == 1 && circle[0] > u32::MAX - 64 && d.edge_index(circle[0]).is_none() {
        return d.free_loops()[(u32::MAX - circle[0]) as usize].parity;
    }
    circle.iter().fold(0, |a, &e| a ^ d.parity(e))
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OracleGen {
    pub v: u32,
    /// `true` is `−`, aligned with `smoothing_circles(d, v)`.
    pub minus: Vec<bool>,
}

/// Every generator with its `(i, q, k)`.
pub fn oracle_generators(d: &AnnularDiagram) -> Vec<(OracleGen, (i32, i32, i32))> {
    let n = d.n();
    let np = d.crossings().iter().filter(|c| c.sign > 0).count() as i32;
    let nm = n as i32 - np;
    let mut out = Vec::new();
    for v in 0..1u32 << n {
        let circles = smoothing_circles(d, v);
        let w = v.count_ones() as i32;
        for lab in 0..1u32 << circles.len() {
            let minus: Vec<bool> = (0..circles.len()).map(|i| lab >> i & 1 == 1).collect();
            let plus = minus.iter().filter(|m| !**m).count() as i32;
            let q = plus - (circles.len() as i32 - plus) + w + np - 2 * nm;
            let k: i32 = circles
                .iter()
                .zip(&minus)
                .filter(|(c, _)| circle_parity(d, c) == 1)
                .map(|(_, &m)| if m { -1 } else { 1 })
                .sum();
            out.push((OracleGen { v, minus }, (w - nm, q, k)));
        }
    }
    out
}

/// Differential as `(source, target, coefficient)` triples over generator indices.
fn oracle_differential(d: &AnnularDiagram, gens: &[(OracleGen, (i32, i32, i32))]) -> Vec<(usize, usize, i64)> {
    let n = d.n();
    let index: HashMap<&OracleGen, usize> = gens.iter().enumerate().map(|(i, g)| (&g.0, i)).collect();
    let circles: Vec<Vec<Vec<u32>>> = (0..1u32 << n).map(|v| smoothing_circles(d, v)).collect();
    let mut out = Vec::new();
    for (src, (g, _)) in gens.iter().enumerate() {
        for j in 0..n {
            if g.v >> j & 1 == 1 {
                continue;
            }
            let u = g.v | 1 << j;
            let sign = if (g.v & ((1 << j) - 1)).count_ones() % 2 == 0 { 1 } else { -1 };
            let cv = &circles[g.v as usize];
            let cu = &circles[u as usize];
            let edges = d.crossings()[j].edges;
            let touches = |c: &Vec<u32>| edges.iter().any(|e| c.contains(e));
            let a: Vec<usize> = (0..cv.len()).filter(|&i| touches(&cv[i])).collect();
            let b: Vec<usize> = (0..cu.len()).filter(|&i| touches(&cu[i])).collect();
            let mut base = vec![false; cu.len()];
            for (i, c) in cv.iter().enumerate() {
                if !a.contains(&i) {
                    let t = cu.iter().position(|x| x == c).expect("untouched circle survives");
                    base[t] = g.minus[i];
                }
            }
            let mut targets: Vec<Vec<bool>> = Vec::new();
            match (a.len(), b.len()) {
                (2, 1) => {
                    let (x, y) = (g.minus[a[0]], g.minus[a[1]]);
                    if !(x && y) {
                        let mut t = base.clone();
                        t[b[0]] = x || y;
                        targets.push(t);
                    }
                }
                (1, 2) => {
                    if g.minus[a[0]] {
                        let mut t = base.clone();
                        t[b[0]] = true;
                        t[b[1]] = true;
                        targets.push(t);
                    } else {
                        for (p, m) in [(b[0], b[1]), (b[1], b[0])] {
                            let mut t = base.clone();
                            t[p] = false;
                            t[m] = true;
                            targets.push(t);
                        }
                    }
                }
                other => panic!("crossing {j} at {:b}: {other:?}", g.v),
            }
            for t in targets {
                let tgt = index[&OracleGen { v: u, minus: t }];
                out.push((src, tgt, sign));
            }
        }
    }
    out
}

pub fn dense_rank(mut m: Vec<Vec<i64>>, p: i64) -> usize {
    for row in m.iter_mut() {
        for x in row.iter_mut() {
            *x = x.rem_euclid(p);
        }
    }
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..m.len()).find(|&r| m[r][c] != 0) else { continue };
        m.swap(rank, piv);
        let inv = (1..p).find(|x| x * m[rank][c] % p == 1).unwrap();
        for x in m[rank].iter_mut() {
            *x = *x * inv % p;
        }
        for r in 0..m.len() {
            if r != rank && m[r][c] != 0 {
                let f = m[r][c];
                for cc in 0..cols {
                    m[r][cc] = (m[r][cc] - f * m[rank][cc]).rem_euclid(p);
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Homology dimensions over `F_p`, keyed by `(i, q, k)`; `k` is `None` for the
/// plain theory.
pub fn oracle_homology(d: &AnnularDiagram, p: i64, annular: bool) -> BTreeMap<(i32, i32, Option<i32>), usize> {
    let gens = oracle_generators(d);
    let key = |g: &(i32, i32, i32)| (g.1, annular.then_some(g.2));
    let mut diff = oracle_differential(d, &gens);
    if annular {
        diff.retain(|&(s, t, _)| gens[s].1 .2 == gens[t].1 .2);
    }
    let mut by_block: BTreeMap<(i32, Option<i32>), BTreeMap<i32, Vec<usize>>> = BTreeMap::new();
    for (idx, (_, g)) in gens.iter().enumerate() {
        by_block.entry(key(g)).or_default().entry(g.0).or_default().push(idx);
    }
    let mut rank_of: BTreeMap<((i32, Option<i32>), i32), usize> = BTreeMap::new();
    for (bk, degrees) in &by_block {
        for (&i, basis) in degrees {
            let Some(next) = degrees.get(&(i + 1)) else { continue };
            let col: HashMap<usize, usize> = basis.iter().enumerate().map(|(c, &g)| (g, c)).collect();
            let row: HashMap<usize, usize> = next.iter().enumerate().map(|(r, &g)| (g, r)).collect();
            let mut m = vec![vec![0i64; basis.len()]; next.len()];
            for &(s, t, c) in &diff {
                if let (Some(&cc), Some(&rr)) = (col.get(&s), row.get(&t)) {
                    m[rr][cc] += c;
                }
            }
            rank_of.insert((*bk, i), dense_rank(m, p));
        }
    }
    let mut out = BTreeMap::new();
    for (bk, degrees) in &by_block {
        for (&i, basis) in degrees {
            let r_out = rank_of.get(&(*bk, i)).copied().unwrap_or(0);
            let r_in = rank_of.get(&(*bk, i - 1)).copied().unwrap_or(0);
            let h = basis.len() - r_out - r_in;
            if h > 0 {
                out.insert((i, bk.0, bk.1), h);
            }
        }
    }
    out
}

/// d² over the integers, checked densely.
pub fn oracle_d_squared_vanishes(d: &AnnularDiagram) -> bool {
    let gens = oracle_generators(d);
    let diff = oracle_differential(d, &gens);
    let mut from: HashMap<usize, Vec<(usize, i64)>> = HashMap::new();
    for &(s, t, c) in &diff {
        from.entry(s).or_default().push((t, c));
    }
    for s in 0..gens.len() {
        let mut acc: HashMap<usize, i64> = HashMap::new();
        for &(t, c) in from.get(&s).map(Vec::as_slice).unwrap_or(&[]) {
            for &(u, c2) in from.get(&t).map(Vec::as_slice).unwrap_or(&[]) {
                *acc.entry(u).or_default() += c * c2;
            }
        }
        if acc.values().any(|&x| x != 0) {
            return false;
        }
    }
    true
}

// ------------------------------------------------------------ surfaces

/// Closed-surface evaluation of the saddle cobordism from `from` to `to`,
/// with labels aligned to circles ordered by minimum edge id, free loops last.
pub fn oracle_theta(d: &AnnularDiagram, from: u32, to: u32, start: u32, end: u32) -> u64 {
    let bottom = smoothing_circles(d, from);
    let top = smoothing_circles(d, to);
    // union bottom and top circles that share an edge
    let nb = bottom.len();
    let mut parent: Vec<usize> = (0..nb + top.len()).collect();
    fn find(p: &mut Vec<usize>, x: usize) -> usize {
        if p[x] != x {
            let r = find(p, p[x]);
            p[x] = r;
        }
        p[x]
    }
    for (i, b) in bottom.iter().enumerate() {
        for (j, t) in top.iter().enumerate() {
            if b.iter().any(|e| t.contains(e)) {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, nb + j));
                parent[ri] = rj;
            }
        }
    }
    let mut saddles: HashMap<usize, i64> = HashMap::new();
    let mut boundary: HashMap<usize, i64> = HashMap::new();
    let mut dots: HashMap<usize, usize> = HashMap::new();
    for j in 0..d.n() {
        if (to ^ from) >> j & 1 == 1 {
            let e = d.crossings()[j].edges[0];
            let c = bottom.iter().position(|b| b.contains(&e)).unwrap();
            *saddles.entry(find(&mut parent, c)).or_default() += 1;
        }
    }
    for i in 0..nb {
        let r = find(&mut parent, i);
        *boundary.entry(r).or_default() += 1;
        if start >> i & 1 == 1 {
            *dots.entry(r).or_default() += 1;
        }
    }
    for j in 0..top.len() {
        let r = find(&mut parent, nb + j);
        *boundary.entry(r).or_default() += 1;
        if end >> j & 1 == 0 {
            *dots.entry(r).or_default() += 1;
        }
    }
    let mut value = 1;
    for (&r, &b) in &boundary {
        // χ = −saddles for the cobordism; capping adds b discs
        let chi_closed = -saddles.get(&r).copied().unwrap_or(0) + b;
        let genus = (2 - chi_closed) / 2;
        value *= match (genus, dots.get(&r).copied().unwrap_or(0)) {
            (0, 1) => 1,
            (1, 0) => 2,
            _ => 0,
        };
    }
    value
}

/// Genus-one components of the cobordism from `from` to `to`.
pub fn oracle_genus_one_components(d: &AnnularDiagram, from: u32, to: u32) -> u32 {
    let bottom = smoothing_circles(d, from);
    let top = smoothing_circles(d, to);
    let nb = bottom.len();
    let mut comp: Vec<usize> = (0..nb + top.len()).collect();
    let mut changed = true;
    while changed {
        changed = false;
        for (i, b) in bottom.iter().enumerate() {
            for (j, t) in top.iter().enumerate() {
                if b.iter().any(|e| t.contains(e)) {
                    let m = comp[i].min(comp[nb + j]);
                    if comp[i] != m || comp[nb + j] != m {
                        comp[i] = m;
                        comp[nb + j] = m;
                        changed = true;
                    }
                }
            }
        }
    }
    let mut stats: BTreeMap<usize, (i64, i64)> = BTreeMap::new();
    for &c in &comp {
        stats.entry(c).or_default().1 += 1;
    }
    for j in 0..d.n() {
        if (to ^ from) >> j & 1 == 1 {
            let e = d.crossings()[j].edges[0];
            let c = bottom.iter().position(|b| b.contains(&e)).unwrap();
            stats.get_mut(&comp[c]).unwrap().0 += 1;
        }
    }
    stats.values().filter(|(s, b)| (2 - (b - s)) / 2 == 1).count() as u32
}

// ---------------------------------------------------------- permutohedra

/// Every face of the permutohedron on `s`, as the set of vertices maximizing
/// some linear functional.
pub fn geometric_faces(s: &[i64]) -> BTreeSet<BTreeSet<Vec<i64>>> {
    let r = s.len();
    let verts = all_permutations(s);
    let mut faces = BTreeSet::new();
    let mut w = vec![0i64; r];
    loop {
        let best = verts.iter().map(|x| dot(&w, x)).max().unwrap();
        faces.insert(verts.iter().filter(|x| dot(&w, x) == best).cloned().collect());
        let mut i = 0;
        while i < r && w[i] == r as i64 - 1 {
            w[i] = 0;
            i += 1;
        }
        if i == r {
            break;
        }
        w[i] += 1;
    }
    faces
}

fn dot(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn all_permutations(s: &[i64]) -> Vec<Vec<i64>> {
    if s.len() <= 1 {
        return vec![s.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..s.len() {
        let mut rest = s.to_vec();
        let x = rest.remove(i);
        for mut p in all_permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

/// Affine dimension of a point set, by exact elimination over the rationals
/// (integer rows, fraction-free).
pub fn affine_dim(points: &BTreeSet<Vec<i64>>) -> usize {
    let mut it = points.iter();
    let Some(base) = it.next() else { return 0 };
    let mut rows: Vec<Vec<i128>> =
        it.map(|p| p.iter().zip(base).map(|(a, b)| (a - b) as i128).collect()).collect();
    let cols = base.len();
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..rows.len()).find(|&r| rows[r][c] != 0) else { continue };
        rows.swap(rank, piv);
        for r in 0..rows.len() {
            if r != rank && rows[r][c] != 0 {
                let (a, b) = (rows[rank][c], rows[r][c]);
                for cc in 0..cols {
                    rows[r][cc] = rows[r][cc] * a - rows[rank][cc] * b;
                }
                let g = rows[r].iter().fold(0i128, |g, &x| gcd(g, x.abs()));
                if g > 1 {
                    rows[r].iter_mut().for_each(|x| *x /= g);
                }
            }
        }
        rank += 1;
    }
    rank
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Whether the face with these vertices meets `{x_a = x_b for a, b in a group}`.
pub fn oracle_face_meets(verts: &BTreeSet<Vec<i64>>, groups: &[Vec<usize>]) -> bool {
    for g in groups {
        for (&a, &b) in g.iter().zip(g.iter().skip(1)) {
            let signs: BTreeSet<i64> = verts.iter().map(|x| (x[a - 1] - x[b - 1]).signum()).collect();
            if !signs.contains(&0) && signs.len() == 1 {
                return false;
            }
        }
    }
    // otherwise the face is symmetric under swaps within each group, so the
    // average of an orbit lies on the section
    for g in groups {
        for (&a, &b) in g.iter().zip(g.iter().skip(1)) {
            for x in verts {
                let mut y = x.clone();
                y.swap(a - 1, b - 1);
                assert!(verts.contains(&y), "face {verts:?} neither symmetric nor separated");
            }
        }
    }
    true
}
