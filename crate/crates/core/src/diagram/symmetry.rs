use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};

use super::{AnnularDiagram, Crossing, FreeLoop, PeriodicSymmetry, Slot, EXHAUSTIVE_SYMMETRY_BOUND};
use crate::error::{Error, Result};
use crate::field::{is_prime, prime_power};
use crate::resolution::{bit, trace, Vertex};

/// How a periodic diagram sits over its quotient.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitMaps {
    /// Upstairs crossing → quotient crossing.
    pub crossing: Vec<usize>,
    /// Upstairs crossing `c` equals `σ^shift[c]` applied to its representative.
    pub shift: Vec<u32>,
    /// Upstairs edge id → quotient edge id.
    pub edge: BTreeMap<u32, u32>,
    /// Upstairs free loop → quotient free loop.
    pub free_loop: Vec<usize>,
    /// Representative (minimum) upstairs crossing of each quotient crossing.
    pub representative: Vec<usize>,
}

fn check_perm(perm: &[usize], what: &str) -> Result<()> {
    let mut seen = vec![false; perm.len()];
    for &x in perm {
        if x >= perm.len() || seen[x] {
            return Err(Error::InvalidSymmetry(format!("{what} is not a permutation")));
        }
        seen[x] = true;
    }
    Ok(())
}

fn orbit_len<T: Copy + Eq>(start: T, step: impl Fn(T) -> T, bound: u32) -> u32 {
    let mut x = step(start);
    let mut len = 1;
    while x != start && len <= bound {
        x = step(x);
        len += 1;
    }
    len
}

/// Image of a vertex under the crossing permutation: `(σv)_{σ(i)} = v_i`.
pub(crate) fn permute_vertex(perm: &[usize], v: Vertex) -> Vertex {
    perm.iter()
        .enumerate()
        .fold(0, |acc, (i, &t)| if bit(v, i) { acc | 1 << t } else { acc })
}

/// Checks that `s` is a free, sign-preserving automorphism of `d` of order
/// `s.order` that respects circle triviality.
pub fn validate_symmetry(d: &AnnularDiagram, s: &PeriodicSymmetry) -> Result<()> {
    let m = s.order;
    if m < 2 {
        return Err(Error::InvalidSymmetry(format!("order {m} must be at least 2")));
    }
    if s.crossing_perm.len() != d.n() {
        return Err(Error::InvalidSymmetry(format!(
            "crossing_perm has {} entries for {} crossings",
            s.crossing_perm.len(),
            d.n()
        )));
    }
    check_perm(&s.crossing_perm, "crossing_perm")?;
    if s.loop_perm.len() != d.free_loops().len() {
        return Err(Error::InvalidSymmetry(format!(
            "loop_perm has {} entries for {} free loops",
            s.loop_perm.len(),
            d.free_loops().len()
        )));
    }
    check_perm(&s.loop_perm, "loop_perm")?;
    let keys: BTreeSet<u32> = s.edge_perm.keys().copied().collect();
    let values: BTreeSet<u32> = s.edge_perm.values().copied().collect();
    let edges: BTreeSet<u32> = d.edges().iter().copied().collect();
    if keys != edges || values != edges {
        return Err(Error::InvalidSymmetry("edge_perm is not a permutation of the edges".into()));
    }

    for c in 0..d.n() {
        let len = orbit_len(c, |x| s.crossing_perm[x], m);
        if len != m {
            return Err(if m % len == 0 {
                Error::InvalidSymmetry(format!("crossing {c} is fixed by a nontrivial power (orbit of {len})"))
            } else {
                Error::InvalidSymmetry(format!("crossing_perm does not have order {m}"))
            });
        }
    }
    for &e in d.edges() {
        let len = orbit_len(e, |x| s.edge_perm[&x], m);
        if len != m {
            return Err(if m % len == 0 {
                Error::InvalidSymmetry(format!("edge {e} is fixed by a nontrivial power (orbit of {len})"))
            } else {
                Error::InvalidSymmetry(format!("edge_perm does not have order {m}"))
            });
        }
    }
    for (i, l) in d.free_loops().iter().enumerate() {
        let len = orbit_len(i, |x| s.loop_perm[x], m);
        if d.free_loops()[s.loop_perm[i]] != *l {
            return Err(Error::InvalidSymmetry(format!("loop_perm moves loop {i} to a loop of other parity")));
        }
        let expected = if l.trivial() { m } else { 1 };
        if len != expected {
            return Err(Error::InvalidSymmetry(format!(
                "free loop {i} has orbit of {len}; expected {expected}"
            )));
        }
    }

    for (c, x) in d.crossings().iter().enumerate() {
        let y = &d.crossings()[s.crossing_perm[c]];
        let image = x.edges.map(|e| s.edge_perm[&e]);
        if image != y.edges {
            return Err(Error::InvalidSymmetry(format!(
                "crossing {c} maps to {} but its edges {:?} map to {:?} (expected {:?})",
                s.crossing_perm[c], x.edges, image, y.edges
            )));
        }
        if x.sign != y.sign {
            return Err(Error::InvalidSymmetry(format!("crossing {c} changes sign under the symmetry")));
        }
    }

    let n = d.n();
    let check = |v: Vertex| -> Result<()> {
        let tv = trace(d, v);
        let tw = trace(d, permute_vertex(&s.crossing_perm, v));
        for (e, &eid) in d.edges().iter().enumerate() {
            let img = d.edge_index(s.edge_perm[&eid]).unwrap();
            let a = tv.trivial[tv.circle_of_edge[e] as usize];
            let b = tw.trivial[tw.circle_of_edge[img] as usize];
            if a != b {
                return Err(Error::InvalidSymmetry(format!(
                    "circle through edge {eid} changes triviality at resolution {v:#b}"
                )));
            }
        }
        Ok(())
    };
    if n <= EXHAUSTIVE_SYMMETRY_BOUND {
        for v in 0..1u32 << n {
            check(v)?;
        }
    } else {
        let all = if n >= 32 { u32::MAX } else { (1u32 << n) - 1 };
        check(0)?;
        check(all)?;
    }
    Ok(())
}

/// The quotient diagram, one crossing/edge per orbit.
pub fn quotient_diagram(d: &AnnularDiagram, s: &PeriodicSymmetry) -> Result<(AnnularDiagram, OrbitMaps)> {
    validate_symmetry(d, s)?;
    if prime_power(s.order as u64).is_none() {
        return Err(Error::InvalidSymmetry(format!("order {} is not a prime power", s.order)));
    }
    let orbits = s.crossing_orbits();
    let mut crossing_map = vec![0usize; d.n()];
    let mut shift = vec![0u32; d.n()];
    let mut representative = Vec::with_capacity(orbits.len());
    for (qi, orbit) in orbits.iter().enumerate() {
        representative.push(orbit[0]);
        for (t, &c) in orbit.iter().enumerate() {
            crossing_map[c] = qi;
            shift[c] = t as u32;
        }
    }
    let mut edge_map = BTreeMap::new();
    for &e in d.edges() {
        if edge_map.contains_key(&e) {
            continue;
        }
        // edges are visited in increasing order, so `e` is its orbit's minimum
        let mut x = e;
        loop {
            edge_map.insert(x, e);
            x = s.edge_perm[&x];
            if x == e {
                break;
            }
        }
    }
    let crossings: Vec<Crossing> = representative
        .iter()
        .map(|&r| {
            let c = d.crossings()[r];
            Crossing { edges: c.edges.map(|e| edge_map[&e]), sign: c.sign }
        })
        .collect();

    let mut parity: BTreeMap<u32, u8> = BTreeMap::new();
    for &e in d.edges() {
        *parity.entry(edge_map[&e]).or_default() ^= d.parity(e);
    }
    let winding = match d.ray_winding() {
        None => None,
        Some(_) => {
            // slots of each quotient edge, in increasing order
            let mut qslots: BTreeMap<u32, Vec<Slot>> = BTreeMap::new();
            for (qc, c) in crossings.iter().enumerate() {
                for (pos, &e) in c.edges.iter().enumerate() {
                    qslots.entry(e).or_default().push(Slot { crossing: qc, pos });
                }
            }
            let mut w: BTreeMap<u32, i64> = BTreeMap::new();
            for (idx, &e) in d.edges().iter().enumerate() {
                let [a, _] = d.edge_slots(idx);
                let qe = edge_map[&e];
                let projected = Slot { crossing: crossing_map[a.crossing], pos: a.pos };
                let eps = if qslots[&qe][0] == projected { 1 } else { -1 };
                *w.entry(qe).or_default() += eps * d.winding(e).unwrap();
            }
            Some(w)
        }
    };

    let mut free_loops = Vec::new();
    let mut loop_map = vec![0usize; d.free_loops().len()];
    for orbit in s.loop_orbits() {
        for &l in &orbit {
            loop_map[l] = free_loops.len();
        }
        free_loops.push(d.free_loops()[orbit[0]]);
    }

    let q = AnnularDiagram::with_windings(crossings, free_loops, parity, winding)?;
    let maps = OrbitMaps { crossing: crossing_map, shift, edge: edge_map, free_loop: loop_map, representative };
    Ok((q, maps))
}

/// Number of seam crossings met when moving `w` sheets forward from sheet `j`.
fn seam_count(j: i64, w: i64, p: i64) -> i64 {
    let floor_div = |a: i64| a.div_euclid(p);
    if w >= 0 {
        floor_div(j + w) - floor_div(j)
    } else {
        -(floor_div(j) - floor_div(j + w))
    }
}

/// The `p`-fold cyclic cover of `d` branched along the axis, with its rotation.
///
/// Needs ray windings unless every edge has parity 0.
pub fn lift_diagram(d: &AnnularDiagram, p: u32) -> Result<(AnnularDiagram, PeriodicSymmetry)> {
    if p < 2 {
        return Err(Error::InvalidArgument(format!("lift order {p} must be at least 2")));
    }
    if !is_prime(p as u64) && prime_power(p as u64).is_none() {
        return Err(Error::InvalidArgument(format!("lift order {p} is not a prime power")));
    }
    let windings: Vec<i64> = match d.ray_winding() {
        Some(w) => d.edges().iter().map(|e| w[e]).collect(),
        None if d.ray_parity().values().all(|&x| x == 0) => vec![0; d.edges().len()],
        None => {
            return Err(Error::InvalidArgument(
                "lifting needs ray windings, not only parities".into(),
            ))
        }
    };
    let n = d.n();
    let ne = d.edges().len();
    let pm = p as i64;
    let mut tuples = vec![[u32::MAX; 4]; n * p as usize];
    let mut up_winding = BTreeMap::new();
    for idx in 0..ne {
        let [a, b] = d.edge_slots(idx);
        let w = windings[idx];
        for j in 0..p as usize {
            let id = (j * ne + idx) as u32;
            let jb = (j as i64 + w).rem_euclid(pm) as usize;
            let sa = Slot { crossing: j * n + a.crossing, pos: a.pos };
            let sb = Slot { crossing: jb * n + b.crossing, pos: b.pos };
            tuples[sa.crossing][sa.pos] = id;
            tuples[sb.crossing][sb.pos] = id;
            let eps = if sa < sb { 1 } else { -1 };
            up_winding.insert(id, eps * seam_count(j as i64, w, pm));
        }
    }
    let crossings: Vec<Crossing> = tuples
        .iter()
        .enumerate()
        .map(|(c, &edges)| Crossing { edges, sign: d.crossings()[c % n].sign })
        .collect();
    let parity: BTreeMap<u32, u8> = up_winding.iter().map(|(&e, &w)| (e, w.rem_euclid(2) as u8)).collect();

    let mut free_loops = Vec::new();
    let mut loop_perm = Vec::new();
    for l in d.free_loops() {
        let base = free_loops.len();
        if l.trivial() {
            for j in 0..p as usize {
                free_loops.push(FreeLoop { parity: 0 });
                loop_perm.push(base + (j + 1) % p as usize);
            }
        } else {
            free_loops.push(*l);
            loop_perm.push(base);
        }
    }
    let crossing_perm = (0..n * p as usize).map(|c| (c + n) % (n * p as usize)).collect();
    let edge_perm = (0..(ne * p as usize) as u32)
        .map(|e| (e, (e + ne as u32) % (ne as u32 * p)))
        .collect();
    let sym = PeriodicSymmetry { order: p, crossing_perm, edge_perm, loop_perm };
    let up = AnnularDiagram::with_windings(crossings, free_loops, parity, Some(up_winding))?;
    let up = up.with_symmetry(sym.clone())?;
    Ok((up, sym))
}

/// Whether two diagrams agree up to relabeling crossings and edges, with the
/// same signs, slot positions and circle triviality in every resolution.
pub fn is_isomorphic(a: &AnnularDiagram, b: &AnnularDiagram) -> bool {
    if a.n() != b.n() || a.edges().len() != b.edges().len() || a.n_plus() != b.n_plus() {
        return false;
    }
    let count = |d: &AnnularDiagram| {
        let t = d.free_loops().iter().filter(|l| l.trivial()).count();
        (t, d.free_loops().len() - t)
    };
    if count(a) != count(b) {
        return false;
    }
    let n = a.n();
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    search(a, b, &mut map, &mut used)
}

/// Extends `map` by following edges from `start ↦ target`; returns the
/// crossings assigned, or `None` on a conflict (assignments are rolled back).
fn propagate(
    a: &AnnularDiagram,
    b: &AnnularDiagram,
    start: usize,
    target: usize,
    map: &mut [usize],
    used: &mut [bool],
) -> Option<Vec<usize>> {
    let mut assigned = vec![];
    let mut stack = vec![(start, target)];
    let mut ok = true;
    while let Some((x, y)) = stack.pop() {
        if map[x] != usize::MAX {
            if map[x] != y {
                ok = false;
                break;
            }
            continue;
        }
        if used[y] || a.crossings()[x].sign != b.crossings()[y].sign {
            ok = false;
            break;
        }
        map[x] = y;
        used[y] = true;
        assigned.push(x);
        for pos in 0..4 {
            let oa = a.opposite(Slot { crossing: x, pos });
            let ob = b.opposite(Slot { crossing: y, pos });
            if oa.pos != ob.pos {
                ok = false;
                break;
            }
            stack.push((oa.crossing, ob.crossing));
        }
        if !ok {
            break;
        }
    }
    if ok {
        Some(assigned)
    } else {
        for x in assigned {
            used[map[x]] = false;
            map[x] = usize::MAX;
        }
        None
    }
}

fn search(a: &AnnularDiagram, b: &AnnularDiagram, map: &mut [usize], used: &mut [bool]) -> bool {
    let Some(x) = map.iter().position(|&y| y == usize::MAX) else {
        return triviality_agrees(a, b, map);
    };
    for y in 0..b.n() {
        if used[y] {
            continue;
        }
        if let Some(assigned) = propagate(a, b, x, y, map, used) {
            if search(a, b, map, used) {
                return true;
            }
            for c in assigned {
                used[map[c]] = false;
                map[c] = usize::MAX;
            }
        }
    }
    false
}

fn triviality_agrees(a: &AnnularDiagram, b: &AnnularDiagram, map: &[usize]) -> bool {
    let n = a.n();
    let tally = |t: &crate::resolution::Traced| {
        let triv = t.trivial.iter().filter(|&&x| x).count();
        (triv, t.count() - triv)
    };
    let agree = |v: Vertex| tally(&trace(a, v)) == tally(&trace(b, permute_vertex(map, v)));
    if n <= EXHAUSTIVE_SYMMETRY_BOUND {
        (0..1u32 << n).all(agree)
    } else {
        let mut rng = rand::rngs::StdRng::seed_from_u64(n as u64);
        let mask = if n >= 32 { u32::MAX } else { (1u32 << n) - 1 };
        agree(0) && agree(mask) && (0..256).all(|_| agree(rng.gen::<u32>() & mask))
    }
}
