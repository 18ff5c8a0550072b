//! The cube of resolutions: circles, surgery arcs, labeled generators and
//! surgery surfaces.

use std::collections::BTreeMap;

use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};

use crate::diagram::AnnularDiagram;
use crate::error::{Error, Result};

/// A cube vertex; bit `j` is the smoothing of crossing `j`.
pub type Vertex = u32;

/// Most circles a resolution may have (labels are packed into a `u32`).
pub const MAX_CIRCLES: usize = 32;

#[inline]
pub fn bit(v: Vertex, j: usize) -> bool {
    v >> j & 1 == 1
}

/// `|v|`, the number of 1-smoothings.
#[inline]
pub fn weight(v: Vertex) -> u32 {
    v.count_ones()
}

/// Packs a 0/1 tuple into a vertex.
pub fn vertex_from_bits(bits: &[u8]) -> Vertex {
    bits.iter()
        .enumerate()
        .fold(0, |v, (j, &b)| if b != 0 { v | 1 << j } else { v })
}

pub fn vertex_bits(v: Vertex, n: usize) -> Vec<u8> {
    (0..n).map(|j| bit(v, j) as u8).collect()
}

/// Vertices in lexicographic order of their tuples.
pub fn vertices_lex(n: usize) -> impl Iterator<Item = Vertex> {
    (0..1u32 << n).map(move |x| reverse_bits(x, n))
}

#[inline]
pub fn reverse_bits(x: u32, width: usize) -> u32 {
    if width == 0 {
        0
    } else {
        x.reverse_bits() >> (32 - width)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Circle {
    pub id: u32,
    pub segments: Vec<u32>,
    pub trivial: bool,
}

/// Surgery arc at a 0-smoothed crossing, naming the circles it touches.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurgeryArc {
    pub crossing: usize,
    pub circles: Vec<u32>,
}

impl SurgeryArc {
    pub fn is_merge(&self) -> bool {
        self.circles.len() == 2
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolutionConfig {
    pub v: Vertex,
    pub circles: Vec<Circle>,
    pub arcs: Vec<SurgeryArc>,
}

impl ResolutionConfig {
    pub fn position(&self, id: u32) -> Option<usize> {
        self.circles.iter().position(|c| c.id == id)
    }

    pub fn circle_of_segment(&self, seg: u32) -> Option<u32> {
        self.circles
            .iter()
            .find(|c| c.segments.contains(&seg))
            .map(|c| c.id)
    }

    pub fn arc_at(&self, crossing: usize) -> Option<&SurgeryArc> {
        self.arcs.iter().find(|a| a.crossing == crossing)
    }
}

/// Compact circle data for one vertex: circles are numbered by position in
/// increasing id order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Traced {
    pub circle_of_edge: Vec<u8>,
    pub ids: Vec<u32>,
    pub trivial: Vec<bool>,
}

impl Traced {
    pub fn count(&self) -> usize {
        self.ids.len()
    }

    /// Bit `i` set iff circle `i` is nontrivial.
    pub fn nontrivial_mask(&self) -> u32 {
        self.trivial
            .iter()
            .enumerate()
            .fold(0, |m, (i, &t)| if t { m } else { m | 1 << i })
    }
}

/// Traces the circles of the resolution at `v`.
pub fn trace(d: &AnnularDiagram, v: Vertex) -> Traced {
    let ne = d.edges().len();
    let mut uf = UnionFind::<usize>::new(ne);
    for (j, c) in d.crossings().iter().enumerate() {
        let idx = |p: usize| d.edge_index(c.edges[p]).expect("edge indexed");
        if bit(v, j) {
            uf.union(idx(0), idx(3));
            uf.union(idx(1), idx(2));
        } else {
            uf.union(idx(0), idx(1));
            uf.union(idx(2), idx(3));
        }
    }
    // edge indices are in id order, so the first edge met in a class is its minimum
    let mut position_of_root: Vec<u8> = vec![u8::MAX; ne];
    let mut circle_of_edge = vec![0u8; ne];
    let mut ids = Vec::new();
    let mut parity: Vec<u8> = Vec::new();
    for (e, &eid) in d.edges().iter().enumerate() {
        let r = uf.find(e);
        if position_of_root[r] == u8::MAX {
            position_of_root[r] = ids.len() as u8;
            ids.push(eid);
            parity.push(0);
        }
        let pos = position_of_root[r];
        circle_of_edge[e] = pos;
        parity[pos as usize] ^= d.parity(eid);
    }
    for (i, l) in d.free_loops().iter().enumerate() {
        ids.push(d.loop_segment(i));
        parity.push(l.parity);
    }
    Traced { circle_of_edge, ids, trivial: parity.into_iter().map(|p| p == 0).collect() }
}

/// Resolution configuration at `v`: circles plus an arc at every 0-smoothing.
pub fn resolve(d: &AnnularDiagram, v: Vertex) -> ResolutionConfig {
    let t = trace(d, v);
    let mut segments: Vec<Vec<u32>> = vec![Vec::new(); t.count()];
    for (e, &eid) in d.edges().iter().enumerate() {
        segments[t.circle_of_edge[e] as usize].push(eid);
    }
    let nedges_circles = segments.len() - d.free_loops().len();
    for i in 0..d.free_loops().len() {
        segments[nedges_circles + i].push(d.loop_segment(i));
    }
    let circles = segments
        .into_iter()
        .enumerate()
        .map(|(i, segs)| Circle { id: t.ids[i], segments: segs, trivial: t.trivial[i] })
        .collect();
    let arcs = (0..d.n())
        .filter(|&j| !bit(v, j))
        .map(|j| {
            let (a, b) = arc_circles(d, &t, j);
            let mut circles = vec![t.ids[a]];
            if b != a {
                circles.push(t.ids[b]);
            }
            SurgeryArc { crossing: j, circles }
        })
        .collect();
    ResolutionConfig { v, circles, arcs }
}

/// Positions of the circles through the first and third slots of crossing `j`.
#[inline]
pub fn arc_circles(d: &AnnularDiagram, t: &Traced, j: usize) -> (usize, usize) {
    let c = &d.crossings()[j];
    let a = t.circle_of_edge[d.edge_index(c.edges[0]).unwrap()] as usize;
    let b = t.circle_of_edge[d.edge_index(c.edges[2]).unwrap()] as usize;
    (a, b)
}

/// Circle label; `Plus` sorts first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> i32 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

/// `labels` bit `i` set iff the circle at position `i` carries `−`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LabeledGenerator {
    pub v: Vertex,
    pub labels: u32,
    pub i: i32,
    pub q: i32,
    pub k: i32,
}

impl LabeledGenerator {
    pub fn sign_at(&self, pos: usize) -> Sign {
        if self.labels >> pos & 1 == 1 {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }
}

/// Gradings of the generator with label mask `labels` at a traced vertex.
pub fn gradings(t: &Traced, v: Vertex, labels: u32, n_plus: usize, n_minus: usize) -> (i32, i32, i32) {
    let c = t.count() as u32;
    let minus = labels.count_ones() as i32;
    let plus = c as i32 - minus;
    let w = weight(v) as i32;
    let (np, nm) = (n_plus as i32, n_minus as i32);
    let nt = t.nontrivial_mask();
    let k = (nt & !labels).count_ones() as i32 - (nt & labels).count_ones() as i32;
    (w - nm, plus - minus + w + np - 2 * nm, k)
}

/// Every vertex of the cube traced once, with generator offsets in the
/// deterministic order (vertices lexicographic, then labels lexicographic).
#[derive(Clone, Debug)]
pub struct Cube {
    pub n: usize,
    pub n_plus: usize,
    pub n_minus: usize,
    traced: Vec<Traced>,
    offset: Vec<usize>,
    total: usize,
}

impl Cube {
    pub fn new(d: &AnnularDiagram) -> Result<Self> {
        let n = d.n();
        if n > 24 {
            return Err(Error::LimitExceeded(format!("{n} crossings is beyond the cube bound")));
        }
        let mut traced: Vec<Traced> = (0..1u32 << n).map(|v| trace(d, v)).collect();
        if let Some(t) = traced.iter().find(|t| t.count() > MAX_CIRCLES) {
            return Err(Error::LimitExceeded(format!("{} circles in one resolution", t.count())));
        }
        traced.shrink_to_fit();
        let mut offset = vec![0usize; 1 << n];
        let mut total = 0;
        for v in vertices_lex(n) {
            offset[v as usize] = total;
            total += 1usize << traced[v as usize].count();
        }
        Ok(Cube { n, n_plus: d.n_plus(), n_minus: d.n_minus(), traced, offset, total })
    }

    pub fn traced(&self, v: Vertex) -> &Traced {
        &self.traced[v as usize]
    }

    pub fn len(&self) -> usize {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    /// Global index of the generator `(v, labels)`.
    #[inline]
    pub fn index(&self, v: Vertex, labels: u32) -> usize {
        self.offset[v as usize] + reverse_bits(labels, self.traced[v as usize].count()) as usize
    }

    pub fn generator(&self, v: Vertex, labels: u32) -> LabeledGenerator {
        let (i, q, k) = gradings(self.traced(v), v, labels, self.n_plus, self.n_minus);
        LabeledGenerator { v, labels, i, q, k }
    }

    pub fn generators(&self) -> Vec<LabeledGenerator> {
        let mut out = Vec::with_capacity(self.total);
        for v in vertices_lex(self.n) {
            let c = self.traced(v).count();
            for x in 0..1u32 << c {
                out.push(self.generator(v, reverse_bits(x, c)));
            }
        }
        out
    }

    /// Labels of a generator keyed by circle id.
    pub fn labels_by_id(&self, g: &LabeledGenerator) -> BTreeMap<u32, Sign> {
        let t = self.traced(g.v);
        t.ids.iter().enumerate().map(|(i, &id)| (id, g.sign_at(i))).collect()
    }
}

/// All labeled generators with their gradings, in the canonical order.
pub fn generators(d: &AnnularDiagram) -> Result<Vec<LabeledGenerator>> {
    Ok(Cube::new(d)?.generators())
}

/// One connected piece of a surgery surface.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SurfaceComponent {
    pub genus: u32,
    pub bottom: Vec<u32>,
    pub top: Vec<u32>,
    pub arcs: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurgerySurface {
    pub components: Vec<SurfaceComponent>,
    pub order: Vec<usize>,
    /// The configuration reached after the performed surgeries.
    pub top: ResolutionConfig,
}

/// The trace of surgering the first `upto` arcs (crossing indices, in `order`)
/// of `cfg`. Components are found by joining the bottom circles each arc
/// touches; the Euler characteristic of a component is minus its arc count.
pub fn surgery_surface(
    d: &AnnularDiagram,
    cfg: &ResolutionConfig,
    order: &[usize],
    upto: usize,
) -> Result<SurgerySurface> {
    if upto > order.len() {
        return Err(Error::InvalidArgument(format!("upto {upto} exceeds {} arcs", order.len())));
    }
    let used = &order[..upto];
    let mut top_v = cfg.v;
    for &j in used {
        if cfg.arc_at(j).is_none() {
            return Err(Error::InvalidArgument(format!("crossing {j} carries no arc")));
        }
        top_v |= 1 << j;
    }
    let top = resolve(d, top_v);
    let nb = cfg.circles.len();
    let mut uf = UnionFind::<usize>::new(nb);
    for &j in used {
        let arc = cfg.arc_at(j).unwrap();
        let a = cfg.position(arc.circles[0]).unwrap();
        let b = cfg.position(*arc.circles.last().unwrap()).unwrap();
        uf.union(a, b);
    }
    let mut by_root: BTreeMap<usize, SurfaceComponent> = BTreeMap::new();
    for (i, c) in cfg.circles.iter().enumerate() {
        by_root
            .entry(uf.find(i))
            .or_insert_with(|| SurfaceComponent { genus: 0, bottom: vec![], top: vec![], arcs: vec![] })
            .bottom
            .push(c.id);
    }
    for &j in used {
        let a = cfg.position(cfg.arc_at(j).unwrap().circles[0]).unwrap();
        by_root.get_mut(&uf.find(a)).unwrap().arcs.push(j);
    }
    for tc in &top.circles {
        let seg = tc.segments[0];
        let bottom = cfg.circle_of_segment(seg).expect("segment on a bottom circle");
        let root = uf.find(cfg.position(bottom).unwrap());
        by_root.get_mut(&root).unwrap().top.push(tc.id);
    }
    let mut components = Vec::with_capacity(by_root.len());
    for (_, mut comp) in by_root {
        let chi = -(comp.arcs.len() as i64);
        let boundary = (comp.bottom.len() + comp.top.len()) as i64;
        let twice_genus = 2 - chi - boundary;
        if twice_genus < 0 || twice_genus % 2 != 0 {
            return Err(Error::Consistency(format!(
                "surface component with chi {chi} and {boundary} boundary circles"
            )));
        }
        comp.genus = (twice_genus / 2) as u32;
        comp.arcs.sort_unstable();
        components.push(comp);
    }
    Ok(SurgerySurface { components, order: order.to_vec(), top })
}
