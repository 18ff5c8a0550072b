//! Planar diagram codes in the annulus, with optional cyclic symmetry.

mod symmetry;
pub mod words;

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub(crate) use symmetry::permute_vertex;
pub use symmetry::{is_isomorphic, lift_diagram, quotient_diagram, validate_symmetry, OrbitMaps};

/// Default crossing bound below which symmetry checks visit every resolution.
pub const EXHAUSTIVE_SYMMETRY_BOUND: usize = 12;

/// One crossing: edge ids counterclockwise from the incoming under-strand.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Crossing {
    pub edges: [u32; 4],
    pub sign: i8,
}

/// A crossingless component together with its ray parity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FreeLoop {
    pub parity: u8,
}

impl FreeLoop {
    pub fn trivial(&self) -> bool {
        self.parity == 0
    }
}

/// A position on a crossing: the `pos`-th (0-based) entry of its tuple.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Slot {
    pub crossing: usize,
    pub pos: usize,
}

/// A cyclic symmetry of order `order`. `loop_perm` permutes the free loops.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeriodicSymmetry {
    pub order: u32,
    pub crossing_perm: Vec<usize>,
    pub edge_perm: BTreeMap<u32, u32>,
    pub loop_perm: Vec<usize>,
}

impl PeriodicSymmetry {
    pub fn edge(&self, e: u32) -> u32 {
        self.edge_perm[&e]
    }

    /// Orbits of crossings, each listed as `c, σc, σ²c, ...` from its minimum.
    pub fn crossing_orbits(&self) -> Vec<Vec<usize>> {
        cycles(&self.crossing_perm)
    }

    pub fn loop_orbits(&self) -> Vec<Vec<usize>> {
        cycles(&self.loop_perm)
    }
}

fn cycles(perm: &[usize]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; perm.len()];
    let mut out = Vec::new();
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        let mut orbit = Vec::new();
        let mut x = start;
        while !seen[x] {
            seen[x] = true;
            orbit.push(x);
            x = perm[x];
        }
        out.push(orbit);
    }
    out
}

/// A validated planar diagram in the annulus.
///
/// Segments are the edges plus the free loops; a loop's segment id is
/// `max_edge + 1 + index`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnnularDiagram {
    crossings: Vec<Crossing>,
    free_loops: Vec<FreeLoop>,
    ray_parity: BTreeMap<u32, u8>,
    ray_winding: Option<BTreeMap<u32, i64>>,
    symmetry: Option<PeriodicSymmetry>,
    n_plus: usize,
    n_minus: usize,
    edge_ids: Vec<u32>,
    edge_index: HashMap<u32, usize>,
    slots: Vec<[Slot; 2]>,
}

#[derive(Serialize, Deserialize)]
struct RawCrossing {
    edges: [u32; 4],
    sign: i64,
}

#[derive(Serialize, Deserialize)]
struct RawLoop {
    parity: i64,
}

#[derive(Serialize, Deserialize)]
struct RawSymmetry {
    order: u32,
    crossing_perm: Vec<usize>,
    edge_perm: BTreeMap<u32, u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    loop_perm: Option<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDiagram {
    crossings: Vec<RawCrossing>,
    #[serde(default)]
    free_loops: Vec<RawLoop>,
    #[serde(default)]
    ray_parity: BTreeMap<u32, i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ray_winding: Option<BTreeMap<u32, i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    symmetry: Option<RawSymmetry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n_plus: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n_minus: Option<usize>,
}

/// Parses and validates a diagram file (JSON).
pub fn parse_diagram(text: &str) -> Result<AnnularDiagram> {
    let raw: RawDiagram = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let mut crossings = Vec::with_capacity(raw.crossings.len());
    for (i, c) in raw.crossings.iter().enumerate() {
        if c.sign != 1 && c.sign != -1 {
            return Err(Error::Parse(format!("crossing {i}: sign must be +1 or -1")));
        }
        crossings.push(Crossing { edges: c.edges, sign: c.sign as i8 });
    }
    let mut free_loops = Vec::with_capacity(raw.free_loops.len());
    for (i, l) in raw.free_loops.iter().enumerate() {
        if l.parity != 0 && l.parity != 1 {
            return Err(Error::Parse(format!("free loop {i}: parity must be 0 or 1")));
        }
        free_loops.push(FreeLoop { parity: l.parity as u8 });
    }
    let mut ray_parity = BTreeMap::new();
    for (&e, &p) in &raw.ray_parity {
        if p != 0 && p != 1 {
            return Err(Error::Parse(format!("edge {e}: ray parity must be 0 or 1")));
        }
        ray_parity.insert(e, p as u8);
    }
    let mut d = AnnularDiagram::with_windings(crossings, free_loops, ray_parity, raw.ray_winding)?;
    if let Some(np) = raw.n_plus {
        if np != d.n_plus {
            return Err(Error::InvalidDiagram(format!(
                "n_plus is {np} but {} positive crossings are listed",
                d.n_plus
            )));
        }
    }
    if let Some(nm) = raw.n_minus {
        if nm != d.n_minus {
            return Err(Error::InvalidDiagram(format!(
                "n_minus is {nm} but {} negative crossings are listed",
                d.n_minus
            )));
        }
    }
    if let Some(s) = raw.symmetry {
        let loop_perm = s.loop_perm.unwrap_or_else(|| (0..d.free_loops.len()).collect());
        let sym = PeriodicSymmetry {
            order: s.order,
            crossing_perm: s.crossing_perm,
            edge_perm: s.edge_perm,
            loop_perm,
        };
        d = d.with_symmetry(sym)?;
    }
    Ok(d)
}

impl AnnularDiagram {
    /// Builds a diagram from parities only.
    pub fn new(
        crossings: Vec<Crossing>,
        free_loops: Vec<FreeLoop>,
        ray_parity: BTreeMap<u32, u8>,
    ) -> Result<Self> {
        Self::with_windings(crossings, free_loops, ray_parity, None)
    }

    /// Builds a diagram; when windings are given, missing parities are filled
    /// in from them and present ones must agree.
    pub fn with_windings(
        crossings: Vec<Crossing>,
        free_loops: Vec<FreeLoop>,
        mut ray_parity: BTreeMap<u32, u8>,
        ray_winding: Option<BTreeMap<u32, i64>>,
    ) -> Result<Self> {
        let mut occurrences: BTreeMap<u32, Vec<Slot>> = BTreeMap::new();
        let (mut n_plus, mut n_minus) = (0, 0);
        for (c, x) in crossings.iter().enumerate() {
            match x.sign {
                1 => n_plus += 1,
                -1 => n_minus += 1,
                s => return Err(Error::InvalidDiagram(format!("crossing {c} has sign {s}"))),
            }
            for (pos, &e) in x.edges.iter().enumerate() {
                occurrences.entry(e).or_default().push(Slot { crossing: c, pos });
            }
        }
        let mut edge_ids = Vec::with_capacity(occurrences.len());
        let mut slots = Vec::with_capacity(occurrences.len());
        for (&e, occ) in &occurrences {
            if occ.len() != 2 {
                return Err(Error::InvalidDiagram(format!(
                    "edge {e} appears {} times (expected 2)",
                    occ.len()
                )));
            }
            edge_ids.push(e);
            slots.push([occ[0], occ[1]]);
        }
        if let Some(w) = &ray_winding {
            for (&e, &wi) in w {
                if !occurrences.contains_key(&e) {
                    return Err(Error::InvalidDiagram(format!("winding given for unknown edge {e}")));
                }
                let parity = wi.rem_euclid(2) as u8;
                match ray_parity.get(&e) {
                    Some(&p) if p != parity => {
                        return Err(Error::InvalidDiagram(format!(
                            "edge {e}: winding {wi} disagrees with parity {p}"
                        )))
                    }
                    _ => {
                        ray_parity.insert(e, parity);
                    }
                }
            }
            if let Some(&e) = edge_ids.iter().find(|e| !w.contains_key(e)) {
                return Err(Error::InvalidDiagram(format!("missing ray winding for edge {e}")));
            }
        }
        for &e in &edge_ids {
            if !ray_parity.contains_key(&e) {
                return Err(Error::InvalidDiagram(format!("missing ray parity for edge {e}")));
            }
        }
        if let Some(e) = ray_parity.keys().find(|e| !occurrences.contains_key(e)) {
            return Err(Error::InvalidDiagram(format!("parity given for unknown edge {e}")));
        }
        let edge_index = edge_ids.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        let d = AnnularDiagram {
            crossings,
            free_loops,
            ray_parity,
            ray_winding,
            symmetry: None,
            n_plus,
            n_minus,
            edge_ids,
            edge_index,
            slots,
        };
        d.check_planar()?;
        Ok(d)
    }

    /// Attaches a symmetry after validating it.
    pub fn with_symmetry(mut self, s: PeriodicSymmetry) -> Result<Self> {
        validate_symmetry(&self, &s)?;
        self.symmetry = Some(s);
        Ok(self)
    }

    pub fn without_symmetry(&self) -> Self {
        let mut d = self.clone();
        d.symmetry = None;
        d
    }

    /// The same diagram with its free loops (and symmetry) removed.
    pub fn without_free_loops(&self) -> Self {
        let mut d = self.clone();
        d.free_loops.clear();
        d.symmetry = None;
        d
    }

    pub fn crossings(&self) -> &[Crossing] {
        &self.crossings
    }

    pub fn n(&self) -> usize {
        self.crossings.len()
    }

    pub fn free_loops(&self) -> &[FreeLoop] {
        &self.free_loops
    }

    pub fn n_plus(&self) -> usize {
        self.n_plus
    }

    pub fn n_minus(&self) -> usize {
        self.n_minus
    }

    pub fn symmetry(&self) -> Option<&PeriodicSymmetry> {
        self.symmetry.as_ref()
    }

    /// Edge ids in increasing order.
    pub fn edges(&self) -> &[u32] {
        &self.edge_ids
    }

    pub fn edge_index(&self, e: u32) -> Option<usize> {
        self.edge_index.get(&e).copied()
    }

    /// The two slots of the edge with the given index, in increasing order.
    pub fn edge_slots(&self, idx: usize) -> [Slot; 2] {
        self.slots[idx]
    }

    pub fn edge_at(&self, s: Slot) -> u32 {
        self.crossings[s.crossing].edges[s.pos]
    }

    pub fn parity(&self, e: u32) -> u8 {
        self.ray_parity[&e]
    }

    pub fn ray_parity(&self) -> &BTreeMap<u32, u8> {
        &self.ray_parity
    }

    pub fn ray_winding(&self) -> Option<&BTreeMap<u32, i64>> {
        self.ray_winding.as_ref()
    }

    pub fn winding(&self, e: u32) -> Option<i64> {
        self.ray_winding.as_ref().map(|w| w[&e])
    }

    /// Segment id of free loop `idx`.
    pub fn loop_segment(&self, idx: usize) -> u32 {
        self.edge_ids.last().map_or(0, |m| m + 1) + idx as u32
    }

    /// The other slot of the edge occupying `s`.
    pub fn opposite(&self, s: Slot) -> Slot {
        let idx = self.edge_index[&self.edge_at(s)];
        let [a, b] = self.slots[idx];
        if a == s {
            b
        } else {
            a
        }
    }

    /// Checks each connected component is a planar 4-valent map, and that the
    /// ray parities are consistent with a ray from one face to another.
    fn check_planar(&self) -> Result<()> {
        let n = self.crossings.len();
        if n == 0 {
            return Ok(());
        }
        let mut comp: Vec<usize> = (0..n).collect();
        fn find(comp: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while comp[r] != r {
                r = comp[r];
            }
            let mut y = x;
            while comp[y] != r {
                let next = comp[y];
                comp[y] = r;
                y = next;
            }
            r
        }
        for [a, b] in &self.slots {
            let (ra, rb) = (find(&mut comp, a.crossing), find(&mut comp, b.crossing));
            comp[ra] = rb;
        }
        let mut seen = vec![[false; 4]; n];
        let mut faces: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
        for c in 0..n {
            for pos in 0..4 {
                if seen[c][pos] {
                    continue;
                }
                let mut parity = 0u8;
                let mut s = Slot { crossing: c, pos };
                while !seen[s.crossing][s.pos] {
                    seen[s.crossing][s.pos] = true;
                    parity ^= self.parity(self.edge_at(s));
                    let o = self.opposite(s);
                    s = Slot { crossing: o.crossing, pos: (o.pos + 1) % 4 };
                }
                let root = find(&mut comp, c);
                let entry = faces.entry(root).or_default();
                entry.0 += 1;
                entry.1 += parity as usize;
            }
        }
        for (&root, &(f, odd)) in &faces {
            let v = (0..n).filter(|&c| find(&mut comp, c) == root).count();
            // V - E + F with E = 2V
            if f != v + 2 {
                return Err(Error::InvalidDiagram(format!(
                    "component containing crossing {root} is not planar"
                )));
            }
            if odd != 0 && odd != 2 {
                return Err(Error::InvalidDiagram(format!(
                    "ray parities around crossing {root} do not come from a ray ({odd} odd faces)"
                )));
            }
        }
        Ok(())
    }

    fn to_raw(&self) -> RawDiagram {
        RawDiagram {
            crossings: self
                .crossings
                .iter()
                .map(|c| RawCrossing { edges: c.edges, sign: c.sign as i64 })
                .collect(),
            free_loops: self.free_loops.iter().map(|l| RawLoop { parity: l.parity as i64 }).collect(),
            ray_parity: self.ray_parity.iter().map(|(&e, &p)| (e, p as i64)).collect(),
            ray_winding: self.ray_winding.clone(),
            symmetry: self.symmetry.as_ref().map(|s| RawSymmetry {
                order: s.order,
                crossing_perm: s.crossing_perm.clone(),
                edge_perm: s.edge_perm.clone(),
                loop_perm: (!s.loop_perm.is_empty()).then(|| s.loop_perm.clone()),
            }),
            n_plus: None,
            n_minus: None,
        }
    }

    /// Canonical compact JSON; stable across runs.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_raw()).expect("diagram serializes")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&self.to_raw()).expect("diagram serializes")
    }
}
