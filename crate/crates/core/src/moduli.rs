//! Posets of labeled resolution configurations, maximal-chain counts, and the
//! closed-surface evaluation they are compared against.

use std::collections::{BTreeMap, HashMap};

use itertools::Itertools;
use rayon::prelude::*;
use serde::Serialize;

use crate::diagram::AnnularDiagram;
use crate::error::{Error, Result};
use crate::homology::{edge_map, tqft_terms};
use crate::resolution::{bit, resolve, surgery_surface, trace, Cube, ResolutionConfig, SurgerySurface, Traced, Vertex};

pub const DEFAULT_INDEX_BOUND: usize = 12;
/// Largest index for which every surgery order is compared.
pub const ALL_ORDERS_BOUND: usize = 5;

/// Start labels at `from`, end labels at `to`, arcs at the crossings in `to \ from`.
#[derive(Clone, Copy, Debug)]
pub struct DecoratedConfig<'a> {
    pub diagram: &'a AnnularDiagram,
    pub from: Vertex,
    pub to: Vertex,
    /// Bit `i` set iff circle `i` at `from` is labeled −.
    pub start: u32,
    pub end: u32,
}

impl<'a> DecoratedConfig<'a> {
    pub fn new(diagram: &'a AnnularDiagram, from: Vertex, to: Vertex, start: u32, end: u32) -> Result<Self> {
        let n = diagram.n();
        if from & !to != 0 || (n < 32 && to >> n != 0) {
            return Err(Error::InvalidArgument(format!("{from:#b} is not below {to:#b}")));
        }
        let (a, b) = (trace(diagram, from).count(), trace(diagram, to).count());
        if start >> a != 0 || end >> b != 0 {
            return Err(Error::InvalidArgument("labels exceed the circle count".into()));
        }
        Ok(DecoratedConfig { diagram, from, to, start, end })
    }

    pub fn index(&self) -> usize {
        (self.to ^ self.from).count_ones() as usize
    }

    /// Crossings carrying arcs, increasing.
    pub fn arcs(&self) -> Vec<usize> {
        (0..self.diagram.n()).filter(|&j| bit(self.to ^ self.from, j)).collect()
    }

    pub fn config(&self) -> ResolutionConfig {
        let mut cfg = resolve(self.diagram, self.from);
        let arcs = self.to ^ self.from;
        cfg.arcs.retain(|a| bit(arcs, a.crossing));
        cfg
    }
}

/// Annular grading of a labeling.
pub fn annular_grading(t: &Traced, labels: u32) -> i32 {
    (0..t.count())
        .filter(|&i| !t.trivial[i])
        .map(|i| if labels >> i & 1 == 1 { -1 } else { 1 })
        .sum()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConfigPoset {
    /// `(vertex, labels)`, sorted by vertex weight.
    pub elements: Vec<(Vertex, u32)>,
    /// `(lower, upper, crossing)` index-one relations.
    pub covers: Vec<(usize, usize, usize)>,
}

impl ConfigPoset {
    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }
}

struct Traces<'a> {
    d: &'a AnnularDiagram,
    cache: HashMap<Vertex, Traced>,
}

impl<'a> Traces<'a> {
    fn new(d: &'a AnnularDiagram) -> Self {
        Traces { d, cache: HashMap::new() }
    }

    fn get(&mut self, v: Vertex) -> &Traced {
        let d = self.d;
        self.cache.entry(v).or_insert_with(|| trace(d, v))
    }

    /// Labels reachable from `(v, x)` by surgering crossing `j`.
    fn step(&mut self, v: Vertex, x: u32, j: usize) -> Vec<u32> {
        let u = v | 1 << j;
        self.get(v);
        self.get(u);
        let em = edge_map(self.d, &self.cache[&v], &self.cache[&u], j);
        let mut out = Vec::with_capacity(2);
        tqft_terms(&em, x, |y| out.push(y));
        out
    }
}

/// Every labeled configuration between the two ends of `dc`, with its covers.
pub fn build_poset(dc: &DecoratedConfig, max_index: usize) -> Result<ConfigPoset> {
    if dc.index() > max_index {
        return Err(Error::LimitExceeded(format!("index {} exceeds {max_index}", dc.index())));
    }
    let arcs = dc.arcs();
    let mut tr = Traces::new(dc.diagram);
    // forward closure from the bottom, layer by layer
    let mut layers: Vec<BTreeMap<(Vertex, u32), ()>> = vec![BTreeMap::from([((dc.from, dc.start), ())])];
    let mut edges = Vec::new();
    for _ in 0..arcs.len() {
        let mut next = BTreeMap::new();
        for &(v, x) in layers.last().unwrap().keys() {
            for &j in arcs.iter().filter(|&&j| !bit(v, j)) {
                for y in tr.step(v, x, j) {
                    next.insert((v | 1 << j, y), ());
                    edges.push(((v, x), (v | 1 << j, y), j));
                }
            }
        }
        layers.push(next);
    }
    // keep only what reaches the top
    let mut alive: BTreeMap<(Vertex, u32), bool> = BTreeMap::new();
    if layers.last().unwrap().contains_key(&(dc.to, dc.end)) {
        alive.insert((dc.to, dc.end), true);
    }
    for &(lo, hi, _) in edges.iter().rev() {
        if alive.contains_key(&hi) {
            alive.insert(lo, true);
        }
    }
    let elements: Vec<(Vertex, u32)> = layers
        .iter()
        .flat_map(|l| l.keys().copied())
        .filter(|e| alive.contains_key(e))
        .collect();
    let index: HashMap<(Vertex, u32), usize> = elements.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let mut covers: Vec<(usize, usize, usize)> = edges
        .into_iter()
        .filter_map(|(lo, hi, j)| Some((*index.get(&lo)?, *index.get(&hi)?, j)))
        .collect();
    covers.sort_unstable();
    covers.dedup();
    Ok(ConfigPoset { elements, covers })
}

/// Maximal chains of `poset` whose surgeries happen in `order`.
pub fn count_chains_in_order(poset: &ConfigPoset, order: &[usize]) -> u64 {
    if poset.is_empty() {
        return 0;
    }
    let mut ways = vec![0u64; poset.len()];
    ways[0] = 1;
    let mut frontier = vec![0usize];
    for &j in order {
        let mut next = BTreeMap::new();
        for &e in &frontier {
            for &(_, hi, _) in poset.covers.iter().filter(|c| c.0 == e && c.2 == j) {
                ways[hi] += ways[e];
                next.insert(hi, ());
            }
        }
        frontier = next.into_keys().collect();
    }
    frontier.iter().map(|&e| ways[e]).sum()
}

/// Number of maximal chains through the permutohedron vertex `order` (a
/// surgery order of the arcs). For small index every order is compared.
pub fn count_pi0_chains(dc: &DecoratedConfig, order: &[usize]) -> Result<u64> {
    let mut arcs = dc.arcs();
    let mut given = order.to_vec();
    given.sort_unstable();
    arcs.sort_unstable();
    if given != arcs {
        return Err(Error::InvalidArgument("order must list every arc once".into()));
    }
    let poset = build_poset(dc, DEFAULT_INDEX_BOUND)?;
    let count = count_chains_in_order(&poset, order);
    if dc.index() <= ALL_ORDERS_BOUND {
        for perm in arcs.iter().copied().permutations(arcs.len()) {
            let other = count_chains_in_order(&poset, &perm);
            if other != count {
                return Err(Error::Consistency(format!(
                    "chain count {other} along {perm:?} differs from {count} along {order:?}"
                )));
            }
        }
    }
    Ok(count)
}

/// Closed-surface value of one capped component.
fn component_value(genus: u32, dots: usize) -> u64 {
    match (genus, dots) {
        (0, 1) => 1,
        (1, 0) => 2,
        _ => 0,
    }
}

/// Evaluation of the surgery surface capped by the labels: − bottom circles
/// and + top circles carry a dot.
pub fn theta_from_surface(
    surface: &SurgerySurface,
    bottom: &ResolutionConfig,
    start: u32,
    end: u32,
) -> u64 {
    let top = &surface.top;
    let minus_bottom = |id: u32| start >> bottom.position(id).unwrap() & 1 == 1;
    let plus_top = |id: u32| end >> top.position(id).unwrap() & 1 == 0;
    surface
        .components
        .iter()
        .map(|c| {
            let dots = c.bottom.iter().filter(|&&z| minus_bottom(z)).count()
                + c.top.iter().filter(|&&z| plus_top(z)).count();
            component_value(c.genus, dots)
        })
        .product()
}

pub fn surface_of(dc: &DecoratedConfig) -> Result<(ResolutionConfig, SurgerySurface)> {
    let cfg = dc.config();
    let arcs = dc.arcs();
    let s = surgery_surface(dc.diagram, &cfg, &arcs, arcs.len())?;
    Ok((cfg, s))
}

pub fn theta(dc: &DecoratedConfig) -> Result<u64> {
    let (cfg, s) = surface_of(dc)?;
    Ok(theta_from_surface(&s, &cfg, dc.start, dc.end))
}

/// Whether every component meeting a nontrivial circle is a genus-zero
/// surface with exactly two nontrivial boundary circles.
fn annular_components_ok(surface: &SurgerySurface, bottom: &ResolutionConfig) -> bool {
    let nontrivial = |cfg: &ResolutionConfig, id: u32| !cfg.circles[cfg.position(id).unwrap()].trivial;
    surface.components.iter().all(|c| {
        let k = c.bottom.iter().filter(|&&z| nontrivial(bottom, z)).count()
            + c.top.iter().filter(|&&z| nontrivial(&surface.top, z)).count();
        k == 0 || (c.genus == 0 && k == 2)
    })
}

fn annular_theta_from_surface(surface: &SurgerySurface, bottom: &ResolutionConfig, start: u32, end: u32) -> u64 {
    let ann = |cfg: &ResolutionConfig, labels: u32| -> i32 {
        cfg.circles
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.trivial)
            .map(|(i, _)| if labels >> i & 1 == 1 { -1 } else { 1 })
            .sum()
    };
    if ann(bottom, start) != ann(&surface.top, end) || !annular_components_ok(surface, bottom) {
        return 0;
    }
    theta_from_surface(surface, bottom, start, end)
}

/// The annular version: zero unless the annular grading is preserved.
pub fn annular_theta(dc: &DecoratedConfig) -> Result<u64> {
    let (cfg, s) = surface_of(dc)?;
    Ok(annular_theta_from_surface(&s, &cfg, dc.start, dc.end))
}

/// Chains that stay in one annular grading.
pub fn count_annular_chains(dc: &DecoratedConfig, order: &[usize]) -> Result<u64> {
    let ka = annular_grading(&trace(dc.diagram, dc.from), dc.start);
    let kb = annular_grading(&trace(dc.diagram, dc.to), dc.end);
    if ka != kb {
        return Ok(0);
    }
    count_pi0_chains(dc, order)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CountingMismatch {
    pub from: Vertex,
    pub to: Vertex,
    pub start: u32,
    pub end: u32,
    pub chains: u64,
    pub theta: u64,
    pub annular: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CountingReport {
    pub max_index: usize,
    pub configs: usize,
    pub nonzero: usize,
    /// Theta value → number of configurations.
    pub histogram: BTreeMap<u64, usize>,
    /// Configurations whose nonzero theta is not `2^(genus-one components)`.
    pub genus_law_failures: usize,
    pub mismatches: Vec<CountingMismatch>,
    pub pass: bool,
}

const MISMATCH_SAMPLE: usize = 20;

/// Compares chain counts with theta (plain and annular) for every decorated
/// configuration of index `1..=max_index` in the cube of `d`.
pub fn verify_counting(d: &AnnularDiagram, max_index: usize) -> Result<CountingReport> {
    let cube = Cube::new(d)?;
    let n = d.n();
    let pairs: Vec<(Vertex, Vertex)> = (0..1u32 << n)
        .flat_map(|v| {
            let free = !v & ((1u32 << n) - 1);
            subsets(free).map(move |s| (v, v | s))
        })
        .filter(|&(v, u)| (1..=max_index).contains(&((u ^ v).count_ones() as usize)))
        .collect();
    let per_pair: Vec<Result<(usize, Vec<u64>, usize, Vec<CountingMismatch>)>> = pairs
        .par_iter()
        .map(|&(v, u)| {
            let dc0 = DecoratedConfig { diagram: d, from: v, to: u, start: 0, end: 0 };
            let (cfg, surface) = surface_of(&dc0)?;
            let genus_one = surface.components.iter().filter(|c| c.genus == 1).count() as u32;
            let arcs = dc0.arcs();
            let (tv, tu) = (cube.traced(v), cube.traced(u));
            let mut configs = 0;
            let mut thetas = Vec::new();
            let mut law = 0;
            let mut bad = Vec::new();
            for y in 0..1u32 << tv.count() {
                let counts = forward_counts(d, &cube, v, y, &arcs);
                let counts_rev = {
                    let rev: Vec<usize> = arcs.iter().rev().copied().collect();
                    forward_counts(d, &cube, v, y, &rev)
                };
                for x in 0..1u32 << tu.count() {
                    configs += 1;
                    let chains = counts.get(&x).copied().unwrap_or(0);
                    let chains_rev = counts_rev.get(&x).copied().unwrap_or(0);
                    let th = theta_from_surface(&surface, &cfg, y, x);
                    if th != 0 && th != 1 << genus_one {
                        law += 1;
                    }
                    if chains != th || chains_rev != th {
                        bad.push(CountingMismatch { from: v, to: u, start: y, end: x, chains, theta: th, annular: false });
                    }
                    let ann_chains = if annular_grading(tv, y) == annular_grading(tu, x) { chains } else { 0 };
                    let ath = annular_theta_from_surface(&surface, &cfg, y, x);
                    if ann_chains != ath {
                        bad.push(CountingMismatch {
                            from: v,
                            to: u,
                            start: y,
                            end: x,
                            chains: ann_chains,
                            theta: ath,
                            annular: true,
                        });
                    }
                    thetas.push(th);
                }
            }
            Ok((configs, thetas, law, bad))
        })
        .collect();
    let mut report = CountingReport {
        max_index,
        configs: 0,
        nonzero: 0,
        histogram: BTreeMap::new(),
        genus_law_failures: 0,
        mismatches: Vec::new(),
        pass: true,
    };
    let mut total_bad = 0;
    for r in per_pair {
        let (configs, thetas, law, bad) = r?;
        report.configs += configs;
        for t in thetas {
            *report.histogram.entry(t).or_default() += 1;
            if t != 0 {
                report.nonzero += 1;
            }
        }
        report.genus_law_failures += law;
        total_bad += bad.len();
        for b in bad {
            if report.mismatches.len() < MISMATCH_SAMPLE {
                report.mismatches.push(b);
            }
        }
    }
    report.pass = total_bad == 0 && report.genus_law_failures == 0;
    Ok(report)
}

/// Chain counts from `(v, y)` along `order`, by end labeling.
fn forward_counts(d: &AnnularDiagram, cube: &Cube, v: Vertex, y: u32, order: &[usize]) -> BTreeMap<u32, u64> {
    let mut cur = BTreeMap::from([(y, 1u64)]);
    let mut w = v;
    for &j in order {
        let u = w | 1 << j;
        let em = edge_map(d, cube.traced(w), cube.traced(u), j);
        let mut next = BTreeMap::new();
        for (&x, &c) in &cur {
            tqft_terms(&em, x, |z| *next.entry(z).or_insert(0) += c);
        }
        cur = next;
        w = u;
    }
    cur
}

/// All subsets of the bits of `mask`, including empty.
fn subsets(mask: u32) -> impl Iterator<Item = u32> {
    let mut s = Some(mask);
    std::iter::from_fn(move || {
        let cur = s?;
        s = if cur == 0 { None } else { Some((cur - 1) & mask) };
        Some(cur)
    })
}
