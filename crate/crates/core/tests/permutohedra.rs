use std::collections::BTreeSet;

use perkh_core::permutohedra::{
    face, fixed_matches_section, fixed_permutohedron, intersect_hyperplanes, ordered_partitions, reduce_for_groups,
    vertices, OrderedPartition,
};
use proptest::prelude::*;

fn part(blocks: &[&[usize]]) -> OrderedPartition {
    OrderedPartition::new(blocks.iter().map(|b| b.to_vec()).collect()).unwrap()
}

fn points(fp: &perkh_core::permutohedra::FixedPermutohedron) -> BTreeSet<Vec<String>> {
    fp.vertices.iter().map(|v| v.point.iter().map(|x| x.to_string()).collect()).collect()
}

#[test]
fn vertex_sets() {
    assert_eq!(vertices(&[1, 2, 3]).unwrap().len(), 6);
    assert_eq!(vertices(&[1]).unwrap(), vec![vec![1]]);
    let v4 = vertices(&[1, 2, 3, 4]).unwrap();
    assert_eq!(v4.len(), 24);
    assert!(v4.contains(&vec![1, 2, 3, 4]) && v4.contains(&vec![4, 3, 2, 1]));
    assert!(vertices(&[2, 1]).is_err());
}

#[test]
fn faces_of_the_hexagon() {
    let s = [1, 2, 3];
    let f = face(&s, &part(&[&[1, 2], &[3]])).unwrap();
    assert_eq!(f.dim, 1);
    let got: BTreeSet<_> = f.vertices().into_iter().collect();
    assert_eq!(got, BTreeSet::from([vec![1, 2, 3], vec![2, 1, 3]]));
    let f = face(&s, &part(&[&[3], &[1, 2]])).unwrap();
    let got: BTreeSet<_> = f.vertices().into_iter().collect();
    assert_eq!(got, BTreeSet::from([vec![2, 3, 1], vec![3, 2, 1]]));
    let whole = face(&s, &OrderedPartition::trivial(3)).unwrap();
    assert_eq!((whole.dim, whole.vertices().len()), (2, 6));
    let point = face(&s, &part(&[&[2], &[3], &[1]])).unwrap();
    assert_eq!(point.vertices(), vec![vec![3, 1, 2]]);
}

#[test]
fn reduction_examples() {
    let p = part(&[&[1, 3, 5], &[2, 6], &[4, 7]]);
    assert_eq!(p.reduce(5).unwrap(), part(&[&[1, 3], &[2, 5], &[4, 6]]));
    assert!(part(&[&[1], &[2, 3]]).reduce(1).is_err());
    for r in 2..=5 {
        for p in ordered_partitions(r) {
            for a in 1..=r {
                for b in a + 1..=r {
                    if p.block_of(a) == p.block_of(b) {
                        assert_eq!(p.reduce(b).unwrap().extend(a, b).unwrap(), p);
                    }
                }
            }
        }
    }
}

#[test]
fn segment_through_the_hexagon() {
    let sec = intersect_hyperplanes(&[1, 2, 3], &[vec![1, 3]]).unwrap();
    assert_eq!((sec.codim, sec.reduced_s.clone()), (1, vec![1, 2]));
    let images: Vec<(String, String)> = sec.faces.iter().map(|(p, q)| (p.to_string(), q.to_string())).collect();
    for (p, q) in [("({1,3},{2})", "({1},{2})"), ("({2},{1,3})", "({2},{1})")] {
        assert!(images.contains(&(p.to_string(), q.to_string())), "{images:?}");
    }
    assert_eq!(sec.faces.len(), 3);
    assert!(reduce_for_groups(&part(&[&[1], &[2, 3]]), &[vec![1, 3]]).is_none());

    let fp = fixed_permutohedron(3, &[vec![1, 3], vec![2]]).unwrap();
    assert_eq!(
        points(&fp),
        BTreeSet::from([
            vec!["3/2".to_string(), "3".into(), "3/2".into()],
            vec!["5/2".to_string(), "1".into(), "5/2".into()]
        ])
    );
}

#[test]
fn one_equality_in_four_coordinates() {
    let sec = intersect_hyperplanes(&[1, 2, 3, 4], &[vec![2, 3]]).unwrap();
    let two_block: Vec<(String, String)> =
        sec.faces.iter().filter(|(p, _)| p.len() == 3).map(|(p, q)| (p.to_string(), q.to_string())).collect();
    let want = [
        ("({2,3},{1},{4})", "({2},{1},{3})"),
        ("({2,3},{4},{1})", "({2},{3},{1})"),
        ("({4},{2,3},{1})", "({3},{2},{1})"),
        ("({1},{2,3},{4})", "({1},{2},{3})"),
        ("({4},{1},{2,3})", "({3},{1},{2})"),
        ("({1},{4},{2,3})", "({1},{3},{2})"),
    ];
    assert_eq!(two_block.len(), 6);
    for (p, q) in want {
        assert!(two_block.contains(&(p.to_string(), q.to_string())), "{p}");
    }
}

#[test]
fn fixed_point_sets() {
    let fp = fixed_permutohedron(4, &[vec![1, 2], vec![3, 4]]).unwrap();
    assert_eq!((fp.s, fp.vertices.len()), (2, 2));
    assert!(fixed_matches_section(&fp, &[vec![1, 2], vec![3, 4]]));
    // the ends of the segment are the two faces of the section reducing to vertices
    let sec = intersect_hyperplanes(&[1, 2, 3, 4], &[vec![1, 2], vec![3, 4]]).unwrap();
    let section_vertices: BTreeSet<OrderedPartition> =
        sec.faces.iter().filter(|(_, q)| q.len() == q.r()).map(|(p, _)| p.clone()).collect();
    let fixed_faces: BTreeSet<OrderedPartition> = fp.vertices.iter().map(|v| v.face.clone()).collect();
    assert_eq!(section_vertices, fixed_faces);
    assert_eq!(sec.faces.len(), 3);

    let trivial: Vec<Vec<usize>> = (1..=4).map(|x| vec![x]).collect();
    let fp = fixed_permutohedron(4, &trivial).unwrap();
    assert_eq!(fp.vertices.len(), 24);
    let whole: BTreeSet<Vec<String>> =
        vertices(&[1, 2, 3, 4]).unwrap().iter().map(|v| v.iter().map(|x| x.to_string()).collect()).collect();
    assert_eq!(points(&fp), whole);

    let fp = fixed_permutohedron(5, &[vec![1, 2, 3, 4, 5]]).unwrap();
    assert_eq!(points(&fp), BTreeSet::from([vec!["3".to_string(); 5]]));
    assert!(fixed_permutohedron(3, &[vec![1, 2]]).is_err());
}

#[test]
fn face_containment_is_refinement() {
    for r in 1..=5usize {
        let s: Vec<i64> = (1..=r as i64).collect();
        let parts = ordered_partitions(r);
        let verts: Vec<BTreeSet<Vec<i64>>> =
            parts.iter().map(|p| face(&s, p).unwrap().vertices().into_iter().collect()).collect();
        for (i, p) in parts.iter().enumerate() {
            assert_eq!(face(&s, p).unwrap().dim, r - p.len());
            for (j, q) in parts.iter().enumerate() {
                assert_eq!(verts[j].is_subset(&verts[i]), q.refines(p), "{q} in {p}");
                assert_eq!(face(&s, p).unwrap().contains(&face(&s, q).unwrap()), q.refines(p));
            }
        }
    }
}

#[test]
fn reduction_commutes_with_refinement() {
    for r in 2..=5usize {
        for p in ordered_partitions(r) {
            for a in 1..=r {
                for b in a + 1..=r {
                    if p.block_of(a) != p.block_of(b) {
                        continue;
                    }
                    let lhs: BTreeSet<OrderedPartition> = p
                        .refinements()
                        .into_iter()
                        .filter(|q| q.block_of(a) == q.block_of(b))
                        .map(|q| q.reduce(b).unwrap())
                        .collect();
                    let rhs: BTreeSet<OrderedPartition> = p.reduce(b).unwrap().refinements().into_iter().collect();
                    assert_eq!(lhs, rhs, "{p} a={a} b={b}");
                }
            }
        }
    }
}

proptest! {
    #[test]
    fn vertex_count_is_factorial(n in 1usize..7, seed in any::<u64>()) {
        // random orbit structure on 1..n
        let mut labels: Vec<usize> = (0..n).map(|i| ((seed >> (3 * i)) as usize) % n).collect();
        labels[0] = 0;
        let mut orbits: Vec<Vec<usize>> = Vec::new();
        let mut seen = std::collections::BTreeMap::new();
        for (x, l) in labels.iter().enumerate() {
            let o = *seen.entry(*l).or_insert_with(|| { orbits.push(vec![]); orbits.len() - 1 });
            orbits[o].push(x + 1);
        }
        let fp = fixed_permutohedron(n, &orbits).unwrap();
        prop_assert_eq!(fp.vertices.len(), (1..=orbits.len()).product::<usize>());
        prop_assert!(fixed_matches_section(&fp, &orbits));
        // the points sum to the full triangular number and are constant on orbits
        for v in &fp.vertices {
            let total: num_rational::Rational64 = v.point.iter().copied().sum();
            prop_assert_eq!(total, num_rational::Rational64::from_integer((n * (n + 1) / 2) as i64));
            for o in &orbits {
                prop_assert!(o.iter().all(|&x| v.point[x - 1] == v.point[o[0] - 1]));
            }
        }
    }

    #[test]
    fn section_faces_meet_the_hyperplanes((r, a, b) in (2usize..6).prop_flat_map(|r| (Just(r), 1..r)).prop_flat_map(|(r, a)| (Just(r), Just(a), a + 1..=r))) {
        let s: Vec<i64> = (1..=r as i64).map(|x| 2 * x + x * x).collect();
        let sec = intersect_hyperplanes(&s, &[vec![a, b]]).unwrap();
        for (p, q) in &sec.faces {
            prop_assert_eq!(p.block_of(a), p.block_of(b));
            prop_assert_eq!(&p.reduce(b).unwrap(), q);
        }
        prop_assert_eq!(sec.faces.len(), ordered_partitions(r - 1).len());
    }
}
