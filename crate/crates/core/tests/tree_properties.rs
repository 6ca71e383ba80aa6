use proptest::prelude::*;
use tagsep::tree::{
    add, ball, busemann, distance, horo_increment, invert, reduce, sphere, sphere_size, Ray, Vertex,
};

const D: u8 = 3;

fn vertex(d: u8) -> impl Strategy<Value = Vertex> {
    prop::collection::vec(1..=d, 0..=12).prop_map(move |w| reduce(&w, d).unwrap())
}

proptest! {
    #[test]
    fn group_laws(a in vertex(D), b in vertex(D), c in vertex(D)) {
        prop_assert_eq!(add(&add(&a, &b), &c), add(&a, &add(&b, &c)));
        prop_assert_eq!(add(&Vertex::root(), &a), a.clone());
        prop_assert_eq!(add(&a, &Vertex::root()), a.clone());
        prop_assert_eq!(add(&a, &invert(&a)), Vertex::root());
        prop_assert_eq!(add(&invert(&a), &a), Vertex::root());
    }

    #[test]
    fn distance_is_a_metric(x in vertex(D), y in vertex(D), z in vertex(D)) {
        prop_assert_eq!(distance(&x, &y), distance(&y, &x));
        prop_assert!(distance(&x, &z) <= distance(&x, &y) + distance(&y, &z));
        prop_assert_eq!(distance(&x, &y) == 0, x == y);
    }

    #[test]
    fn one_neighbour_points_along_the_ray(x in vertex(D)) {
        let xi = Ray::standard();
        let incs: Vec<i64> = x.neighbors(D).map(|y| horo_increment(&x, &y, xi)).collect();
        prop_assert_eq!(incs.len(), D as usize);
        prop_assert!(incs.iter().all(|&h| h == 1 || h == -1));
        prop_assert_eq!(incs.iter().filter(|&&h| h == -1).count(), 1);
    }

    #[test]
    fn horo_increment_is_bounded_by_distance(x in vertex(D), y in vertex(D)) {
        let h = horo_increment(&x, &y, Ray::standard());
        let dist = distance(&x, &y) as i64;
        prop_assert!(h.abs() <= dist);
        prop_assert_eq!((h - dist).rem_euclid(2), 0);
    }

    #[test]
    fn busemann_is_bounded_by_depth(x in vertex(4)) {
        let h = busemann(&x, Ray::standard()).get();
        prop_assert!(h.abs() <= x.depth() as i64);
        prop_assert_eq!((h - x.depth() as i64).rem_euclid(2), 0);
    }
}

#[test]
fn ray_prefixes_have_negative_horodistance() {
    for n in 0..=12 {
        assert_eq!(busemann(&Ray::standard().prefix(n), Ray::standard()).get(), -(n as i64));
    }
}

#[test]
fn spheres_have_the_right_size_and_radius() {
    for d in 2..=4u8 {
        for i in 0..=4usize {
            let want = if i == 0 { 1 } else { d as u64 * (d as u64 - 1).pow(i as u32 - 1) };
            assert_eq!(sphere_size(i as u32, d), want);
            let x: Vertex = "1.2".parse().unwrap();
            let mut s = sphere(&x, i, d);
            assert_eq!(s.len() as u64, want);
            assert!(s.iter().all(|y| distance(&x, y) == i));
            s.sort();
            s.dedup();
            assert_eq!(s.len() as u64, want);
        }
        assert_eq!(
            ball(3, d).len() as u64,
            (0..=3).map(|i| sphere_size(i, d)).sum::<u64>()
        );
    }
}
