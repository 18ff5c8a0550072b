//! Tangle words closed up around the annulus.
//!
//! A word is read bottom to top; strand positions are radial and height is
//! angular, so the closure wraps around the axis and the place where the top
//! is glued to the bottom is the ray.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;

use super::{AnnularDiagram, Crossing, FreeLoop, PeriodicSymmetry};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Letter {
    /// Crossing of strands `i, i+1`; the strand from bottom-left to top-right is over.
    Sigma(usize),
    /// Crossing of strands `i, i+1`; the strand from bottom-right to top-left is over.
    SigmaInv(usize),
    /// A minimum creating strands `i, i+1`.
    Cup(usize),
    /// A maximum joining strands `i, i+1`.
    Cap(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TangleWord {
    pub width: usize,
    pub letters: Vec<Letter>,
}

// corners, listed counterclockwise
const BR: usize = 0;
const TR: usize = 1;
const TL: usize = 2;
const BL: usize = 3;

fn through(corner: usize) -> usize {
    (corner + 2) % 4
}

struct Graph {
    /// `(a, b, w)`: traversing from `a` to `b` crosses the ray `w` times.
    links: Vec<(usize, usize, i64)>,
    adj: Vec<Vec<usize>>,
    n_corner_nodes: usize,
    /// cup/cap node → (copy, index within copy)
    free_tag: BTreeMap<usize, (usize, usize)>,
}

impl Graph {
    fn node(&mut self) -> usize {
        self.adj.push(Vec::new());
        self.adj.len() - 1
    }

    fn link(&mut self, a: usize, b: usize, w: i64) {
        let id = self.links.len();
        self.links.push((a, b, w));
        self.adj[a].push(id);
        self.adj[b].push(id);
    }

    fn other(&self, link: usize, from: usize) -> (usize, i64) {
        let (a, b, w) = self.links[link];
        if a == from {
            (b, w)
        } else {
            (a, -w)
        }
    }

    /// Walks from corner `start` to the next corner, returning it and the winding.
    fn walk(&self, start: usize, used: &mut [bool]) -> (usize, i64) {
        let mut link = self.adj[start][0];
        let mut at = start;
        let mut total = 0;
        loop {
            used[link] = true;
            let (next, w) = self.other(link, at);
            total += w;
            if next < self.n_corner_nodes {
                return (next, total);
            }
            let l = &self.adj[next];
            link = if l[0] == link { l[1] } else { l[0] };
            at = next;
        }
    }
}

impl TangleWord {
    pub fn new(width: usize, letters: Vec<Letter>) -> Result<Self> {
        let mut w = width;
        for (k, l) in letters.iter().enumerate() {
            match *l {
                Letter::Sigma(i) | Letter::SigmaInv(i) | Letter::Cap(i) if i + 1 >= w => {
                    return Err(Error::InvalidArgument(format!(
                        "letter {k} uses strands {i},{} of {w}",
                        i + 1
                    )))
                }
                Letter::Cup(i) if i > w => {
                    return Err(Error::InvalidArgument(format!("cup at {i} beyond width {w}")))
                }
                Letter::Cup(_) => w += 2,
                Letter::Cap(_) => w -= 2,
                _ => {}
            }
        }
        if w != width {
            return Err(Error::InvalidArgument(format!("word ends at width {w}, starts at {width}")));
        }
        Ok(TangleWord { width, letters })
    }

    /// Braid word in the usual notation: `k > 0` is `σ_k`, `k < 0` its inverse.
    pub fn braid(strands: usize, generators: &[i32]) -> Result<Self> {
        let letters = generators
            .iter()
            .map(|&g| {
                let i = g.unsigned_abs() as usize - 1;
                if g > 0 {
                    Letter::Sigma(i)
                } else {
                    Letter::SigmaInv(i)
                }
            })
            .collect();
        Self::new(strands, letters)
    }

    pub fn crossing_count(&self) -> usize {
        self.letters
            .iter()
            .filter(|l| matches!(l, Letter::Sigma(_) | Letter::SigmaInv(_)))
            .count()
    }

    pub fn power(&self, p: usize) -> TangleWord {
        let letters = (0..p).flat_map(|_| self.letters.iter().copied()).collect();
        TangleWord { width: self.width, letters }
    }

    /// A random word with `crossings` crossings returning to width `width`.
    pub fn random<R: Rng>(rng: &mut R, width: usize, crossings: usize, max_width: usize) -> TangleWord {
        let max_width = max_width.max(width.max(2) + (width % 2));
        let mut w = width;
        let mut letters = Vec::new();
        let mut placed = 0;
        while placed < crossings {
            let roll: f64 = rng.gen();
            if w >= 2 && roll < 0.75 {
                let i = rng.gen_range(0..w - 1);
                letters.push(if rng.gen_bool(0.5) { Letter::Sigma(i) } else { Letter::SigmaInv(i) });
                placed += 1;
            } else if w + 2 <= max_width && (w < 2 || roll < 0.9) {
                letters.push(Letter::Cup(rng.gen_range(0..=w)));
                w += 2;
            } else if w >= 4 || (w >= 2 && w > width) {
                letters.push(Letter::Cap(rng.gen_range(0..w - 1)));
                w -= 2;
            } else if w < 2 {
                letters.push(Letter::Cup(0));
                w += 2;
            }
        }
        while w > width {
            letters.push(Letter::Cap(rng.gen_range(0..w - 1)));
            w -= 2;
        }
        while w < width {
            letters.push(Letter::Cup(rng.gen_range(0..=w)));
            w += 2;
        }
        TangleWord { width, letters }
    }

    /// The annular closure, with components oriented upward where first met.
    pub fn closure(&self) -> Result<AnnularDiagram> {
        Ok(self.build(1, None::<&mut rand::rngs::ThreadRng>)?.0)
    }

    /// The closure with each component's orientation chosen at random.
    pub fn closure_random_orientation<R: Rng>(&self, rng: &mut R) -> Result<AnnularDiagram> {
        Ok(self.build(1, Some(rng))?.0)
    }

    /// The closure of `self^p` with its rotation by one copy of the word.
    pub fn periodic_closure(&self, p: usize) -> Result<AnnularDiagram> {
        let (d, sym) = self.build(p, None::<&mut rand::rngs::ThreadRng>)?;
        d.with_symmetry(sym.expect("periodic build has a symmetry"))
    }

    pub fn periodic_closure_random_orientation<R: Rng>(&self, p: usize, rng: &mut R) -> Result<AnnularDiagram> {
        let (d, sym) = self.build(p, Some(rng))?;
        d.with_symmetry(sym.expect("periodic build has a symmetry"))
    }

    fn build<R: Rng>(&self, p: usize, mut rng: Option<&mut R>) -> Result<(AnnularDiagram, Option<PeriodicSymmetry>)> {
        if p == 0 {
            return Err(Error::InvalidArgument("power must be positive".into()));
        }
        let nc = self.crossing_count();
        let n = nc * p;
        let mut g = Graph {
            links: Vec::new(),
            adj: vec![Vec::new(); 4 * n],
            n_corner_nodes: 4 * n,
            free_tag: BTreeMap::new(),
        };
        let mut over_bl: Vec<bool> = Vec::with_capacity(n);
        let bottom: Vec<usize> = (0..self.width).map(|_| g.node()).collect();
        let mut current = bottom.clone();
        let mut c = 0;
        for copy in 0..p {
            for (li, letter) in self.letters.iter().enumerate() {
                match *letter {
                    Letter::Sigma(i) | Letter::SigmaInv(i) => {
                        over_bl.push(matches!(letter, Letter::Sigma(_)));
                        g.link(current[i], 4 * c + BL, 0);
                        g.link(current[i + 1], 4 * c + BR, 0);
                        current[i] = 4 * c + TL;
                        current[i + 1] = 4 * c + TR;
                        c += 1;
                    }
                    Letter::Cup(i) => {
                        let f = g.node();
                        g.free_tag.insert(f, (copy, li));
                        current.insert(i, f);
                        current.insert(i, f);
                    }
                    Letter::Cap(i) => {
                        let f = g.node();
                        g.free_tag.insert(f, (copy, li));
                        g.link(current[i], f, 0);
                        g.link(current[i + 1], f, 0);
                        current.drain(i..i + 2);
                    }
                }
            }
        }
        for (k, &top) in current.iter().enumerate() {
            g.link(top, bottom[k], 1);
        }

        // corner-to-corner paths: partner corner and winding
        let mut partner = vec![(usize::MAX, 0i64); 4 * n];
        let mut used = vec![false; g.links.len()];
        for x in 0..4 * n {
            if partner[x].0 == usize::MAX {
                let (y, w) = g.walk(x, &mut used);
                partner[x] = (y, w);
                partner[y] = (x, -w);
                if x == y {
                    return Err(Error::Consistency("corner path closes on itself".into()));
                }
            }
        }

        // orientation: `incoming[node]` for every corner
        let mut incoming: Vec<Option<bool>> = vec![None; 4 * n];
        let orient = |incoming: &mut Vec<Option<bool>>, start: usize| {
            let mut at = start;
            while incoming[at].is_none() {
                incoming[at] = Some(true);
                let out = 4 * (at / 4) + through(at % 4);
                incoming[out] = Some(false);
                at = partner[out].0;
            }
        };
        for cross in 0..nc {
            let under = if over_bl[cross] { [BR, BL] } else { [BL, BR] };
            for bottom_corner in under {
                let node = 4 * cross + bottom_corner;
                if incoming[node].is_some() {
                    continue;
                }
                let flip = rng.as_deref_mut().is_some_and(|r| r.gen_bool(0.5));
                let start = if flip { 4 * cross + through(bottom_corner) } else { node };
                for t in 0..p {
                    orient(&mut incoming, start + 4 * nc * t);
                }
            }
        }
        if incoming.iter().any(Option::is_none) {
            return Err(Error::Consistency("unoriented corner".into()));
        }

        // tuples start at the incoming under-corner
        let mut tuple_corners = Vec::with_capacity(n);
        for (cross, &over) in over_bl.iter().enumerate().take(n) {
            let under_start = if over { BR } else { BL };
            let first = if incoming[4 * cross + under_start] == Some(true) {
                under_start
            } else {
                through(under_start)
            };
            tuple_corners.push([first, (first + 1) % 4, (first + 2) % 4, (first + 3) % 4]);
        }
        let mut slot_of_corner = vec![(0usize, 0usize); 4 * n];
        for (cross, corners) in tuple_corners.iter().enumerate() {
            for (pos, &corner) in corners.iter().enumerate() {
                slot_of_corner[4 * cross + corner] = (cross, pos);
            }
        }
        let mut edge_of_corner = vec![u32::MAX; 4 * n];
        let mut next_id = 1u32;
        let mut parity = BTreeMap::new();
        let mut winding = BTreeMap::new();
        for (cross, corners) in tuple_corners.iter().enumerate() {
            for &corner in corners {
                let x = 4 * cross + corner;
                if edge_of_corner[x] != u32::MAX {
                    continue;
                }
                let (y, w) = partner[x];
                edge_of_corner[x] = next_id;
                edge_of_corner[y] = next_id;
                // winding runs from the smaller slot; x is met first so its slot is smaller
                debug_assert!(slot_of_corner[x] < slot_of_corner[y]);
                winding.insert(next_id, w);
                parity.insert(next_id, w.rem_euclid(2) as u8);
                next_id += 1;
            }
        }
        let crossings: Vec<Crossing> = tuple_corners
            .iter()
            .enumerate()
            .map(|(cross, corners)| {
                let edges = corners.map(|k| edge_of_corner[4 * cross + k]);
                // positive iff the over strand enters at the fourth slot
                let sign = if incoming[4 * cross + corners[3]] == Some(true) { 1 } else { -1 };
                Crossing { edges, sign }
            })
            .collect();

        // crossingless components
        let mut loops: Vec<(BTreeSet<usize>, i64)> = Vec::new();
        for start in 0..g.links.len() {
            if used[start] {
                continue;
            }
            let (a, _, _) = g.links[start];
            let mut nodes = BTreeSet::new();
            let mut total = 0;
            let mut link = start;
            let mut at = a;
            loop {
                used[link] = true;
                nodes.insert(at);
                let (next, w) = g.other(link, at);
                total += w;
                let l = &g.adj[next];
                let nl = if l[0] == link { l[1] } else { l[0] };
                at = next;
                if nl == start {
                    break;
                }
                link = nl;
            }
            if total.abs() > 1 {
                return Err(Error::Consistency(format!("free loop winds {total} times")));
            }
            loops.push((nodes, total));
        }
        let free_loops: Vec<FreeLoop> =
            loops.iter().map(|(_, w)| FreeLoop { parity: w.rem_euclid(2) as u8 }).collect();

        let d = AnnularDiagram::with_windings(crossings, free_loops, parity, Some(winding))?;
        if p == 1 {
            return Ok((d, None));
        }
        let crossing_perm: Vec<usize> = (0..n).map(|x| (x + nc) % n).collect();
        let mut edge_perm = BTreeMap::new();
        for x in 0..4 * n {
            let y = (x + 4 * nc) % (4 * n);
            edge_perm.insert(edge_of_corner[x], edge_of_corner[y]);
        }
        let shift_loop = |nodes: &BTreeSet<usize>| -> BTreeSet<usize> {
            nodes
                .iter()
                .map(|x| match g.free_tag.get(x) {
                    Some(&(copy, li)) => {
                        let target = ((copy + 1) % p, li);
                        *g.free_tag.iter().find(|(_, &t)| t == target).unwrap().0
                    }
                    None => *x,
                })
                .collect()
        };
        let mut loop_perm = Vec::with_capacity(loops.len());
        for (nodes, _) in &loops {
            let free: BTreeSet<usize> = nodes.iter().filter(|x| g.free_tag.contains_key(x)).copied().collect();
            let image = if free.is_empty() { nodes.clone() } else { shift_loop(&free) };
            let target = loops
                .iter()
                .position(|(other, _)| {
                    if free.is_empty() {
                        *other == image
                    } else {
                        image.is_subset(other)
                    }
                })
                .ok_or_else(|| Error::Consistency("loop image not found".into()))?;
            loop_perm.push(target);
        }
        let sym = PeriodicSymmetry { order: p as u32, crossing_perm, edge_perm, loop_perm };
        Ok((d, Some(sym)))
    }
}
