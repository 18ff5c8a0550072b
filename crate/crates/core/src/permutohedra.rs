//! Permutohedra through their face combinatorics: ordered partitions,
//! refinement and reduction, hyperplane sections and fixed points of
//! coordinate-permuting actions.

use std::collections::BTreeSet;
use std::fmt;

use itertools::Itertools;
use num_rational::Rational64;
use serde::Serialize;

use crate::error::{Error, Result};

/// An ordered partition of `{1..r}` into non-empty blocks.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct OrderedPartition {
    blocks: Vec<Vec<usize>>,
}

impl OrderedPartition {
    pub fn new(mut blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for b in &mut blocks {
            if b.is_empty() {
                return Err(Error::InvalidArgument("empty block".into()));
            }
            b.sort_unstable();
            for &x in b.iter() {
                if !seen.insert(x) {
                    return Err(Error::InvalidArgument(format!("{x} appears twice")));
                }
            }
        }
        let r = seen.len();
        if seen.iter().copied().ne(1..=r) {
            return Err(Error::InvalidArgument(format!("blocks do not cover 1..{r}")));
        }
        Ok(OrderedPartition { blocks })
    }

    /// The partition with a single block.
    pub fn trivial(r: usize) -> Self {
        OrderedPartition { blocks: vec![(1..=r).collect()] }
    }

    /// Singletons in the given order.
    pub fn from_order(order: &[usize]) -> Result<Self> {
        Self::new(order.iter().map(|&x| vec![x]).collect())
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn r(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn block_of(&self, x: usize) -> Option<usize> {
        self.blocks.iter().position(|b| b.binary_search(&x).is_ok())
    }

    /// Whether `self` is obtained from `coarse` by splitting blocks in place.
    pub fn refines(&self, coarse: &OrderedPartition) -> bool {
        if self.r() != coarse.r() {
            return false;
        }
        let mut it = self.blocks.iter();
        for b in &coarse.blocks {
            let mut acc: Vec<usize> = Vec::new();
            while acc.len() < b.len() {
                match it.next() {
                    Some(piece) => acc.extend(piece),
                    None => return false,
                }
            }
            acc.sort_unstable();
            if &acc != b {
                return false;
            }
        }
        it.next().is_none()
    }

    /// Drops `b`, shifting larger elements down; blocks keep their order.
    pub fn reduce(&self, b: usize) -> Result<Self> {
        let blocks: Vec<Vec<usize>> = self
            .blocks
            .iter()
            .map(|blk| blk.iter().filter(|&&x| x != b).map(|&x| if x > b { x - 1 } else { x }).collect())
            .collect();
        if self.block_of(b).is_none() {
            return Err(Error::InvalidArgument(format!("{b} is not in 1..{}", self.r())));
        }
        if blocks.iter().any(Vec::is_empty) {
            return Err(Error::InvalidArgument(format!("removing {b} empties its block")));
        }
        Ok(OrderedPartition { blocks })
    }

    /// Inverse of reducing by `b`: shifts elements `≥ b` up and puts `b` next to `a`.
    pub fn extend(&self, a: usize, b: usize) -> Result<Self> {
        let r = self.r();
        if !(1 <= a && a < b && b <= r + 1) {
            return Err(Error::InvalidArgument(format!("need 1 ≤ a < b ≤ {}", r + 1)));
        }
        let mut blocks: Vec<Vec<usize>> = self
            .blocks
            .iter()
            .map(|blk| blk.iter().map(|&x| if x >= b { x + 1 } else { x }).collect())
            .collect();
        let home = self.block_of(a).unwrap();
        blocks[home].push(b);
        blocks[home].sort_unstable();
        Ok(OrderedPartition { blocks })
    }

    /// All refinements that split each block into an ordered sequence of pieces.
    pub fn refinements(&self) -> Vec<OrderedPartition> {
        let per_block: Vec<Vec<Vec<Vec<usize>>>> = self.blocks.iter().map(|b| ordered_partitions_of(b)).collect();
        per_block
            .into_iter()
            .multi_cartesian_product()
            .map(|choice| OrderedPartition { blocks: choice.into_iter().flatten().collect() })
            .collect()
    }
}

impl fmt::Display for OrderedPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.blocks.iter().map(|b| format!("{{{}}}", b.iter().join(","))).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Ordered partitions of an arbitrary set of labels.
fn ordered_partitions_of(items: &[usize]) -> Vec<Vec<Vec<usize>>> {
    if items.is_empty() {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    let n = items.len();
    // choose the first block as a non-empty subset
    for mask in 1u32..1 << n {
        let first: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).map(|i| items[i]).collect();
        let rest: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 0).map(|i| items[i]).collect();
        for tail in ordered_partitions_of(&rest) {
            let mut p = vec![first.clone()];
            p.extend(tail);
            out.push(p);
        }
    }
    out
}

/// Every ordered partition of `{1..r}`, in a fixed order.
pub fn ordered_partitions(r: usize) -> Vec<OrderedPartition> {
    let items: Vec<usize> = (1..=r).collect();
    let mut v: Vec<OrderedPartition> =
        ordered_partitions_of(&items).into_iter().map(|blocks| OrderedPartition { blocks }).collect();
    v.sort();
    v
}

fn check_sequence(s: &[i64]) -> Result<()> {
    if s.is_empty() || s.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("sequence must be non-empty and strictly increasing".into()));
    }
    Ok(())
}

/// Partial sums `τ_i = s_1 + … + s_i`, with `τ_0 = 0`.
pub fn prefix_sums(s: &[i64]) -> Vec<i64> {
    std::iter::once(0).chain(s.iter().scan(0, |acc, &x| {
        *acc += x;
        Some(*acc)
    })).collect()
}

/// All coordinate permutations of `s`.
pub fn vertices(s: &[i64]) -> Result<Vec<Vec<i64>>> {
    check_sequence(s)?;
    Ok(face(s, &OrderedPartition::trivial(s.len()))?.vertices())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PermutohedronFace {
    pub s: Vec<i64>,
    pub partition: OrderedPartition,
    pub dim: usize,
}

/// The face on which the coordinates of the first `j` blocks sum to the
/// `j`-th partial sum, for every `j`.
pub fn face(s: &[i64], p: &OrderedPartition) -> Result<PermutohedronFace> {
    check_sequence(s)?;
    if p.r() != s.len() {
        return Err(Error::InvalidArgument(format!("partition of {} for {} coordinates", p.r(), s.len())));
    }
    Ok(PermutohedronFace { s: s.to_vec(), partition: p.clone(), dim: s.len() - p.len() })
}

impl PermutohedronFace {
    /// Values taken by the coordinates of each block.
    pub fn block_values(&self) -> Vec<&[i64]> {
        let mut start = 0;
        self.partition
            .blocks
            .iter()
            .map(|b| {
                let v = &self.s[start..start + b.len()];
                start += b.len();
                v
            })
            .collect()
    }

    pub fn vertices(&self) -> Vec<Vec<i64>> {
        let r = self.s.len();
        let per_block: Vec<Vec<Vec<(usize, i64)>>> = self
            .partition
            .blocks
            .iter()
            .zip(self.block_values())
            .map(|(b, vals)| {
                vals.iter()
                    .copied()
                    .permutations(vals.len())
                    .map(|perm| b.iter().copied().zip(perm).collect())
                    .collect()
            })
            .collect();
        let mut out: Vec<Vec<i64>> = per_block
            .into_iter()
            .multi_cartesian_product()
            .map(|choice| {
                let mut x = vec![0; r];
                for (i, v) in choice.into_iter().flatten() {
                    x[i - 1] = v;
                }
                x
            })
            .collect();
        out.sort();
        out
    }

    pub fn contains(&self, other: &PermutohedronFace) -> bool {
        other.partition.refines(&self.partition)
    }
}

/// Groups of coordinates forced equal.
fn check_groups(r: usize, groups: &[Vec<usize>]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for g in groups {
        for &x in g {
            if !(1..=r).contains(&x) || !seen.insert(x) {
                return Err(Error::InvalidArgument(format!("equality groups must be disjoint subsets of 1..{r}")));
            }
        }
    }
    Ok(())
}

/// Image of a face under the identification of the section with the smaller
/// permutohedron, or `None` when the face misses the section. Reductions run
/// over the non-minimal group members, largest first.
pub fn reduce_for_groups(p: &OrderedPartition, groups: &[Vec<usize>]) -> Option<OrderedPartition> {
    for g in groups {
        let home = p.block_of(*g.first()?)?;
        if g.iter().any(|&x| p.block_of(x) != Some(home)) {
            return None;
        }
    }
    let mut drop: Vec<usize> = groups
        .iter()
        .flat_map(|g| {
            let m = *g.iter().min().unwrap();
            g.iter().copied().filter(move |&x| x != m)
        })
        .collect();
    drop.sort_unstable_by(|a, b| b.cmp(a));
    let mut q = p.clone();
    for b in drop {
        q = q.reduce(b).ok()?;
    }
    Some(q)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HyperplaneSection {
    pub reduced_s: Vec<i64>,
    pub codim: usize,
    /// Each face meeting the section, with its image.
    pub faces: Vec<(OrderedPartition, OrderedPartition)>,
}

/// The section of `Π_S` by the equalities, as a face-lattice map.
pub fn intersect_hyperplanes(s: &[i64], groups: &[Vec<usize>]) -> Result<HyperplaneSection> {
    check_sequence(s)?;
    let r = s.len();
    check_groups(r, groups)?;
    let codim: usize = groups.iter().map(|g| g.len().saturating_sub(1)).sum();
    let faces = ordered_partitions(r)
        .into_iter()
        .filter_map(|p| reduce_for_groups(&p, groups).map(|q| (p, q)))
        .collect();
    Ok(HyperplaneSection { reduced_s: s[..r - codim].to_vec(), codim, faces })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FixedVertex {
    /// Orbits in increasing order of their coordinate values.
    pub orbit_order: Vec<usize>,
    /// The vertex of `Π_{s−1}` it corresponds to.
    pub vertex: Vec<i64>,
    /// The fixed point in `Π_{n−1}`, constant on orbits.
    #[serde(serialize_with = "ser_rationals")]
    pub point: Vec<Rational64>,
    /// The face of `Π_{n−1}` whose barycenter it is.
    pub face: OrderedPartition,
    /// Subsets of `{1..n}` (as bitmasks) along the associated chain of the cube.
    pub chain: Vec<u64>,
}

fn ser_rationals<S: serde::Serializer>(v: &[Rational64], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| x.to_string()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FixedPermutohedron {
    pub n: usize,
    pub s: usize,
    pub vertices: Vec<FixedVertex>,
}

/// Fixed points of `Π_{n−1}` under a coordinate action with the given orbits.
pub fn fixed_permutohedron(n: usize, orbits: &[Vec<usize>]) -> Result<FixedPermutohedron> {
    check_groups(n, orbits)?;
    if orbits.iter().map(Vec::len).sum::<usize>() != n || orbits.iter().any(Vec::is_empty) {
        return Err(Error::InvalidArgument(format!("orbits must partition 1..{n}")));
    }
    let s = orbits.len();
    let mut out = Vec::new();
    for order in (0..s).permutations(s) {
        let mut point = vec![Rational64::from_integer(0); n];
        let mut vertex = vec![0i64; s];
        let mut chain = vec![0u64];
        let mut filled = 0i64;
        let mut mask = 0u64;
        for (rank, &o) in order.iter().enumerate() {
            let size = orbits[o].len() as i64;
            // average of filled+1 ..= filled+size
            let c = Rational64::new((2 * filled + size + 1) * size, 2 * size);
            for &x in &orbits[o] {
                point[x - 1] = c;
                mask |= 1 << (x - 1);
            }
            vertex[o] = rank as i64 + 1;
            chain.push(mask);
            filled += size;
        }
        let face = OrderedPartition::new(order.iter().map(|&o| orbits[o].clone()).collect())?;
        out.push(FixedVertex { orbit_order: order, vertex, point, face, chain });
    }
    Ok(FixedPermutohedron { n, s, vertices: out })
}

/// Checks the fixed vertices against the hyperplane-section route: each face
/// must reduce to a vertex of `Π_{s−1}`, and distinct faces to distinct vertices.
pub fn fixed_matches_section(fp: &FixedPermutohedron, orbits: &[Vec<usize>]) -> bool {
    let mut images = BTreeSet::new();
    for v in &fp.vertices {
        match reduce_for_groups(&v.face, orbits) {
            Some(q) if q.len() == fp.s && q.r() == fp.s => {
                images.insert(q);
            }
            _ => return false,
        }
    }
    images.len() == fp.vertices.len() && fp.vertices.len() == (1..=fp.s).product::<usize>()
}
