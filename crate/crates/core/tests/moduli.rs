mod common;

use common::*;
use perkh_core::diagram::words::TangleWord;
use perkh_core::homology::differential_terms;
use perkh_core::moduli::{
    annular_theta, build_poset, count_annular_chains, count_pi0_chains, surface_of, theta, verify_counting,
    DecoratedConfig,
};
use perkh_core::resolution::trace;
use perkh_core::{parse_diagram, resolve, AnnularDiagram, Cube};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

fn ladybug() -> AnnularDiagram {
    parse_diagram(
        r#"{"crossings": [{"edges": [1,4,2,3], "sign": 1}, {"edges": [1,3,2,4], "sign": 1}],
            "ray_parity": {"1":0, "2":0, "3":0, "4":0}}"#,
    )
    .unwrap()
}

#[test]
fn ladybug_poset() {
    let d = ladybug();
    assert_eq!((trace(&d, 0).count(), trace(&d, 0b11).count()), (1, 1));
    let dc = DecoratedConfig::new(&d, 0, 0b11, 0, 1).unwrap();
    let poset = build_poset(&dc, 12).unwrap();
    assert_eq!(poset.len(), 6);
    assert_eq!(poset.covers.len(), 8);
    assert_eq!(count_pi0_chains(&dc, &[0, 1]).unwrap(), 2);
    assert_eq!(count_pi0_chains(&dc, &[1, 0]).unwrap(), 2);
    assert_eq!(theta(&dc).unwrap(), 2);
    assert_eq!(annular_theta(&dc).unwrap(), 2);
    let (_, s) = surface_of(&dc).unwrap();
    assert_eq!(s.components.iter().map(|c| c.genus).collect::<Vec<_>>(), vec![1]);
}

#[test]
fn merge_poset_and_values() {
    let d = TangleWord::braid(2, &[1]).unwrap().closure().unwrap();
    assert_eq!((trace(&d, 0).count(), trace(&d, 1).count()), (2, 1));
    let dc = DecoratedConfig::new(&d, 0, 1, 0b00, 0).unwrap();
    assert_eq!(build_poset(&dc, 12).unwrap().len(), 2);
    assert_eq!(count_pi0_chains(&dc, &[0]).unwrap(), 1);
    // (+,−) merges to −
    let dc = DecoratedConfig::new(&d, 0, 1, 0b10, 1).unwrap();
    assert_eq!(theta(&dc).unwrap(), 1);
    // (−,−) has nowhere to go
    let dc = DecoratedConfig::new(&d, 0, 1, 0b11, 1).unwrap();
    assert_eq!((theta(&dc).unwrap(), count_pi0_chains(&dc, &[0]).unwrap()), (0, 0));
    assert!(build_poset(&dc, 12).unwrap().is_empty());
}

#[test]
fn merge_merge_has_two_middles() {
    // three circles merging into one across two crossings
    let d = TangleWord::braid(3, &[1, 2]).unwrap().closure().unwrap();
    let (v, u) = (0..1u32 << d.n())
        .flat_map(|v| (0..1u32 << d.n()).map(move |u| (v, u)))
        .find(|&(v, u)| u & v == v && (u ^ v).count_ones() == 2 && trace(&d, v).count() == 3 && trace(&d, u).count() == 1)
        .expect("merge-merge square");
    let dc = DecoratedConfig::new(&d, v, u, 0, 0).unwrap();
    let (_, s) = surface_of(&dc).unwrap();
    assert_eq!(s.components.len(), 1);
    assert_eq!(s.components[0].genus, 0);
    assert_eq!(build_poset(&dc, 12).unwrap().len(), 4);
    assert_eq!(theta(&dc).unwrap(), 1);
}

#[test]
fn index_bound_is_enforced() {
    let d = TangleWord::braid(2, &[1, 1, 1]).unwrap().closure().unwrap();
    let dc = DecoratedConfig::new(&d, 0, 0b111, 0, 0).unwrap();
    assert!(build_poset(&dc, 2).is_err());
    assert!(DecoratedConfig::new(&d, 0b1, 0b10, 0, 0).is_err());
}

#[test]
fn genus_two_vanishes() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut found = 0;
    'search: for _ in 0..400 {
        let d = random_closure(&mut rng, 6);
        for v in 0..1u32 << d.n() {
            let cfg = resolve(&d, v);
            let order: Vec<usize> = cfg.arcs.iter().map(|a| a.crossing).collect();
            let s = perkh_core::surgery_surface(&d, &cfg, &order, order.len()).unwrap();
            if s.components.iter().all(|c| c.genus < 2) {
                continue;
            }
            let to = order.iter().fold(v, |acc, j| acc | 1 << j);
            let (a, b) = (trace(&d, v).count(), trace(&d, to).count());
            for y in 0..1u32 << a {
                for x in 0..1u32 << b {
                    let dc = DecoratedConfig::new(&d, v, to, y, x).unwrap();
                    assert_eq!(theta(&dc).unwrap(), 0);
                    assert_eq!(oracle_theta(&d, v, to, y, x), 0);
                }
            }
            found += 1;
            if found >= 3 {
                break 'search;
            }
        }
    }
    assert!(found > 0, "no genus-two configuration found");
}

#[test]
fn annular_merges() {
    // two nontrivial circles merge into a trivial one: k drops from 2 to 0
    let h2 = hopf2();
    let dc = DecoratedConfig::new(&h2, 0b00, 0b01, 0b00, 0).unwrap();
    assert_eq!((theta(&dc).unwrap(), annular_theta(&dc).unwrap()), (1, 0));
    // (+,−) → + keeps k = 0
    let t0 = trace(&h2, 0);
    assert!(t0.trivial.iter().all(|t| !t));
    let dc = DecoratedConfig::new(&h2, 0b00, 0b01, 0b01, 1).unwrap();
    assert_eq!((theta(&dc).unwrap(), annular_theta(&dc).unwrap()), (1, 1));

    // a nontrivial and a trivial circle merge into a nontrivial one
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut seen = false;
    for _ in 0..200 {
        let d = random_closure(&mut rng, 3);
        for v in 0..1u32 << d.n() {
            for j in 0..d.n() {
                let u = v | 1 << j;
                if u == v {
                    continue;
                }
                let (tv, tu) = (trace(&d, v), trace(&d, u));
                if tu.count() + 1 != tv.count() {
                    continue;
                }
                let cfg = resolve(&d, v);
                let arc = cfg.arc_at(j).unwrap();
                let pos: Vec<usize> = arc.circles.iter().map(|id| cfg.position(*id).unwrap()).collect();
                if pos.len() != 2 || tv.trivial[pos[0]] == tv.trivial[pos[1]] {
                    continue;
                }
                // all +, merged circle +
                let dc = DecoratedConfig::new(&d, v, u, 0, 0).unwrap();
                assert_eq!(annular_theta(&dc).unwrap(), 1);
                assert_eq!(count_annular_chains(&dc, &[j]).unwrap(), 1);
                seen = true;
            }
        }
        if seen {
            break;
        }
    }
    assert!(seen);
}

/// Disjoint union of two diagrams, shifting the second one's edge ids.
fn disjoint_union(a: &AnnularDiagram, b: &AnnularDiagram) -> AnnularDiagram {
    let (mut va, vb): (Value, Value) = (serde_json::from_str(&a.to_json()).unwrap(), serde_json::from_str(&b.to_json()).unwrap());
    let shift = a.edges().iter().max().copied().unwrap_or(0) as u64 + 1;
    for c in vb["crossings"].as_array().unwrap() {
        let mut c = c.clone();
        for e in c["edges"].as_array_mut().unwrap() {
            *e = (e.as_u64().unwrap() + shift).into();
        }
        va["crossings"].as_array_mut().unwrap().push(c);
    }
    for key in ["ray_parity", "ray_winding"] {
        if let Some(m) = vb.get(key).and_then(Value::as_object) {
            let m: Vec<_> = m.iter().map(|(k, v)| ((k.parse::<u64>().unwrap() + shift).to_string(), v.clone())).collect();
            let target = va[key].as_object_mut().unwrap();
            target.extend(m);
        }
    }
    if let Some(obj) = va.as_object_mut() {
        obj.remove("symmetry");
    }
    parse_diagram(&va.to_string()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn chains_match_theta(seed in any::<u64>(), n in 1usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = random_closure(&mut rng, n);
        let r = verify_counting(&d, 4).unwrap();
        prop_assert!(r.pass, "{:?}", r.mismatches);
        prop_assert_eq!(r.genus_law_failures, 0);
        for &value in r.histogram.keys() {
            prop_assert!(value == 0 || value.is_power_of_two());
        }
    }

    #[test]
    fn nonzero_theta_counts_tori(seed in any::<u64>(), n in 2usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = random_closure(&mut rng, n);
        let v = rand::Rng::gen_range(&mut rng, 0..1u32 << n);
        let u = v | rand::Rng::gen_range(&mut rng, 0..1u32 << n);
        prop_assume!(u != v);
        let (a, b) = (trace(&d, v).count(), trace(&d, u).count());
        for y in 0..1u32 << a {
            for x in 0..1u32 << b {
                let dc = DecoratedConfig::new(&d, v, u, y, x).unwrap();
                let t = theta(&dc).unwrap();
                if t > 0 {
                    prop_assert_eq!(t, 1u64 << oracle_genus_one_components(&d, v, u));
                }
            }
        }
    }

    #[test]
    fn theta_multiplies_over_disjoint_unions(seed in any::<u64>(), n1 in 1usize..4, n2 in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (d1, d2) = (random_closure(&mut rng, n1), random_closure(&mut rng, n2));
        prop_assume!(d1.free_loops().is_empty() && d2.free_loops().is_empty());
        let d = disjoint_union(&d1, &d2);
        let (v1, v2) = (rand::Rng::gen_range(&mut rng, 0..1u32 << n1), rand::Rng::gen_range(&mut rng, 0..1u32 << n2));
        let (u1, u2) = (v1 | rand::Rng::gen_range(&mut rng, 1..1u32 << n1), v2 | rand::Rng::gen_range(&mut rng, 1..1u32 << n2));
        let (v, u) = (v1 | v2 << n1, u1 | u2 << n1);
        let (a1, b1) = (trace(&d1, v1).count(), trace(&d1, u1).count());
        let (a2, b2) = (trace(&d2, v2).count(), trace(&d2, u2).count());
        prop_assert_eq!(trace(&d, v).count(), a1 + a2);
        for y in 0..1u32 << (a1 + a2) {
            for x in 0..1u32 << (b1 + b2) {
                let (y1, y2) = (y & ((1 << a1) - 1), y >> a1);
                let (x1, x2) = (x & ((1 << b1) - 1), x >> b1);
                let whole = theta(&DecoratedConfig::new(&d, v, u, y, x).unwrap()).unwrap();
                let left = theta(&DecoratedConfig::new(&d1, v1, u1, y1, x1).unwrap()).unwrap();
                let right = theta(&DecoratedConfig::new(&d2, v2, u2, y2, x2).unwrap()).unwrap();
                prop_assert_eq!(whole, left * right);
            }
        }
    }

    #[test]
    fn index_one_theta_is_the_differential(seed in any::<u64>(), n in 1usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = random_closure(&mut rng, n);
        let cube = Cube::new(&d).unwrap();
        let gens = cube.generators();
        for annular in [false, true] {
            let mut terms: std::collections::BTreeSet<(usize, usize)> = std::collections::BTreeSet::new();
            for (from, to, _) in differential_terms(&d, &cube, annular) {
                terms.insert((from, to));
            }
            for (xi, x) in gens.iter().enumerate() {
                for (yi, y) in gens.iter().enumerate() {
                    if y.v & x.v != x.v || (y.v ^ x.v).count_ones() != 1 {
                        continue;
                    }
                    let dc = DecoratedConfig::new(&d, x.v, y.v, x.labels, y.labels).unwrap();
                    let t = if annular { annular_theta(&dc).unwrap() } else { theta(&dc).unwrap() };
                    prop_assert_eq!(t, terms.contains(&(xi, yi)) as u64);
                }
            }
        }
    }
}
