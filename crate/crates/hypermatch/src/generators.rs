//! Deterministic instance generators: projective planes, small structured
//! graphs, and seeded random (bi-)uniform instances with rational weights.

use crate::hypergraph::{Hypergraph, HypergraphError, WeightedInstance};
use crate::rational::Rat;
use num_bigint::BigUint;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Largest supported plane order.
pub const MAX_PLANE_ORDER: u32 = 13;
/// Caps on random generation, keeping exact arithmetic downstream fast.
pub const MAX_RANDOM_VERTICES: usize = 4096;
pub const MAX_RANDOM_EDGES: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeneratorError {
    #[error("plane order {order} is not prime")]
    NotPrime { order: u32 },
    #[error("plane order {order} exceeds the supported maximum {MAX_PLANE_ORDER}")]
    OrderTooLarge { order: u32 },
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("requested {requested} distinct edges but only {available} exist")]
    Unsatisfiable { requested: usize, available: String },
    #[error(transparent)]
    Hypergraph(#[from] HypergraphError),
}

/// The projective plane of order 2 with its classical labeling: 7 points,
/// 7 lines of 3 points, every point on 3 lines, any two lines meeting in
/// exactly one point.
pub fn fano() -> Hypergraph {
    Hypergraph::build(
        7,
        vec![
            vec![0, 1, 2],
            vec![0, 3, 4],
            vec![0, 5, 6],
            vec![1, 3, 5],
            vec![1, 4, 6],
            vec![2, 3, 6],
            vec![2, 4, 5],
        ],
    )
    .expect("fixed incidence list is valid")
}

fn is_prime(n: u32) -> bool {
    n >= 2
        && (2..n)
            .take_while(|d| d * d <= n)
            .all(|d| !n.is_multiple_of(d))
}

/// The projective plane of prime order `p ≤ 13`, from the three-dimensional
/// vector-space construction over the integers modulo `p`: `p² + p + 1`
/// points and lines, each line of size `p + 1`.
///
/// Points are the normalized triples — `(x, y, 1)`, then `(x, 1, 0)`, then
/// `(1, 0, 0)` — indexed in that enumeration order; lines use the same
/// enumeration of normalized triples, a point lying on a line when the dot
/// product vanishes modulo `p`.
pub fn projective_plane(order: u32) -> Result<Hypergraph, GeneratorError> {
    if order > MAX_PLANE_ORDER {
        return Err(GeneratorError::OrderTooLarge { order });
    }
    if !is_prime(order) {
        return Err(GeneratorError::NotPrime { order });
    }
    let p = i64::from(order);
    let mut points: Vec<(i64, i64, i64)> = Vec::new();
    for x in 0..p {
        for y in 0..p {
            points.push((x, y, 1));
        }
    }
    for x in 0..p {
        points.push((x, 1, 0));
    }
    points.push((1, 0, 0));

    let edges = points
        .iter()
        .map(|&(a, b, c)| {
            let mut line: Vec<usize> = points
                .iter()
                .enumerate()
                .filter(|(_, &(x, y, z))| (a * x + b * y + c * z) % p == 0)
                .map(|(i, _)| i)
                .collect();
            line.sort_unstable();
            line
        })
        .collect();
    Ok(Hypergraph::build(points.len(), edges)?)
}

/// Three 2-edges pairwise sharing a vertex: `{0,1}, {1,2}, {0,2}`.
pub fn triangle() -> Hypergraph {
    Hypergraph::build(3, vec![vec![0, 1], vec![1, 2], vec![0, 2]])
        .expect("fixed incidence list is valid")
}

/// A path of `m` consecutive 2-edges on `m + 1` vertices.
pub fn path(m: usize) -> Hypergraph {
    let edges = (0..m).map(|i| vec![i, i + 1]).collect();
    Hypergraph::build(m + 1, edges).expect("consecutive pairs are valid")
}

/// `m` pairwise disjoint edges of size `k` on `m·k` vertices.
pub fn disjoint(m: usize, k: usize) -> Result<Hypergraph, GeneratorError> {
    if k == 0 {
        return Err(GeneratorError::InvalidParameters(
            "edge size must be positive".to_string(),
        ));
    }
    let edges = (0..m).map(|i| (i * k..(i + 1) * k).collect()).collect();
    Ok(Hypergraph::build(m * k, edges)?)
}

/// Parameters for a seeded uniform-random instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomSpec {
    pub vertices: usize,
    pub edges: usize,
    pub size_min: usize,
    pub size_max: usize,
    pub seed: u64,
}

/// Parameters for a seeded two-size instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BiUniformSpec {
    pub vertices: usize,
    pub small_edges: usize,
    pub large_edges: usize,
    pub small_size: usize,
    pub large_size: usize,
    pub seed: u64,
}

fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::default();
    }
    let mut out = BigUint::one();
    for i in 0..k {
        out = out * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    out
}

/// Visits all `k`-subsets of `0..n` in lexicographic order until the
/// callback returns false.
fn for_each_combination(n: usize, k: usize, mut f: impl FnMut(&[usize]) -> bool) {
    if k > n {
        return;
    }
    let mut c: Vec<usize> = (0..k).collect();
    loop {
        if !f(&c) {
            return;
        }
        // advance to the lexicographic successor
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if c[i] != i + n - k {
                break;
            }
        }
        c[i] += 1;
        for j in i + 1..k {
            c[j] = c[j - 1] + 1;
        }
    }
}

/// Draws `count` distinct sorted edges with sizes in `sizes`, rejecting
/// duplicates (against `used`, which is updated).  On a long stall with a
/// small enough candidate space, completes deterministically by
/// lexicographic scan.
fn draw_distinct_edges(
    rng: &mut ChaCha8Rng,
    vertices: usize,
    count: usize,
    sizes: std::ops::RangeInclusive<usize>,
    used: &mut std::collections::BTreeSet<Vec<usize>>,
    out: &mut Vec<Vec<usize>>,
) -> Result<(), GeneratorError> {
    let available: BigUint = sizes
        .clone()
        .map(|s| binomial(vertices, s))
        .sum::<BigUint>();
    let already: BigUint = used
        .iter()
        .filter(|e| sizes.contains(&e.len()))
        .count()
        .into();
    if BigUint::from(count) + already > available {
        return Err(GeneratorError::Unsatisfiable {
            requested: count,
            available: available.to_string(),
        });
    }
    let lex_fallback_cap = BigUint::from(1_000_000u32);
    let mut produced = 0usize;
    let mut stall = 0u32;
    while produced < count {
        let size = rng.gen_range(*sizes.start()..=*sizes.end());
        let mut edge = rand::seq::index::sample(rng, vertices, size).into_vec();
        edge.sort_unstable();
        if used.insert(edge.clone()) {
            out.push(edge);
            produced += 1;
            stall = 0;
        } else {
            stall += 1;
            if stall >= 10_000 {
                if available <= lex_fallback_cap {
                    // nearly exhausted space: finish by lexicographic scan
                    for size in sizes.clone() {
                        if produced == count {
                            break;
                        }
                        for_each_combination(vertices, size, |c| {
                            if used.insert(c.to_vec()) {
                                out.push(c.to_vec());
                                produced += 1;
                            }
                            produced < count
                        });
                    }
                    debug_assert_eq!(produced, count, "availability was pre-checked");
                    return Ok(());
                }
                stall = 0; // huge space: a genuine stall is statistically impossible
            }
        }
    }
    Ok(())
}

fn random_weights_from(rng: &mut ChaCha8Rng, count: usize) -> Vec<Rat> {
    (0..count)
        .map(|_| {
            let num: i64 = rng.gen_range(1..=16);
            let den: i64 = rng.gen_range(1..=16);
            Rat::new(num.into(), den.into())
        })
        .collect()
}

/// `count` positive rationals with numerator and denominator drawn
/// uniformly from `1..=16`; deterministic per seed.
pub fn random_weights(count: usize, seed: u64) -> Vec<Rat> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_weights_from(&mut rng, count)
}

fn check_random_limits(
    vertices: usize,
    edges: usize,
    size_min: usize,
    size_max: usize,
) -> Result<(), GeneratorError> {
    if vertices == 0 || vertices > MAX_RANDOM_VERTICES {
        return Err(GeneratorError::InvalidParameters(format!(
            "vertex count must be in 1..={MAX_RANDOM_VERTICES}"
        )));
    }
    if edges > MAX_RANDOM_EDGES {
        return Err(GeneratorError::InvalidParameters(format!(
            "edge count must be at most {MAX_RANDOM_EDGES}"
        )));
    }
    if size_min < 2 || size_max > 6 || size_min > size_max {
        return Err(GeneratorError::InvalidParameters(
            "edge sizes must satisfy 2 ≤ min ≤ max ≤ 6".to_string(),
        ));
    }
    if size_max > vertices {
        return Err(GeneratorError::InvalidParameters(
            "edge size exceeds vertex count".to_string(),
        ));
    }
    Ok(())
}

/// A seeded random instance: `edges` distinct edges with sizes uniform in
/// `[size_min, size_max]`, and random small-denominator rational weights.
/// Identical spec and seed give identical instances.
pub fn random_hypergraph(spec: &RandomSpec) -> Result<WeightedInstance, GeneratorError> {
    check_random_limits(spec.vertices, spec.edges, spec.size_min, spec.size_max)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut used = std::collections::BTreeSet::new();
    let mut edges = Vec::with_capacity(spec.edges);
    draw_distinct_edges(
        &mut rng,
        spec.vertices,
        spec.edges,
        spec.size_min..=spec.size_max,
        &mut used,
        &mut edges,
    )?;
    let weights = random_weights_from(&mut rng, edges.len());
    let h = Hypergraph::build(spec.vertices, edges)?;
    Ok(WeightedInstance::new(h, weights)?)
}

/// A seeded two-size instance: `small_edges` distinct edges of
/// `small_size` followed by `large_edges` of `large_size`, with random
/// rational weights.
pub fn biuniform_random(spec: &BiUniformSpec) -> Result<WeightedInstance, GeneratorError> {
    if spec.small_size >= spec.large_size {
        return Err(GeneratorError::InvalidParameters(
            "small size must be strictly below large size".to_string(),
        ));
    }
    check_random_limits(
        spec.vertices,
        spec.small_edges + spec.large_edges,
        spec.small_size,
        spec.large_size,
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut used = std::collections::BTreeSet::new();
    let mut edges = Vec::with_capacity(spec.small_edges + spec.large_edges);
    draw_distinct_edges(
        &mut rng,
        spec.vertices,
        spec.small_edges,
        spec.small_size..=spec.small_size,
        &mut used,
        &mut edges,
    )?;
    draw_distinct_edges(
        &mut rng,
        spec.vertices,
        spec.large_edges,
        spec.large_size..=spec.large_size,
        &mut used,
        &mut edges,
    )?;
    let weights = random_weights_from(&mut rng, edges.len());
    let h = Hypergraph::build(spec.vertices, edges)?;
    Ok(WeightedInstance::new(h, weights)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Signed;

    fn edge_lists(h: &Hypergraph) -> Vec<Vec<usize>> {
        h.edges().map(<[usize]>::to_vec).collect()
    }

    fn pairwise_intersections_are_points(h: &Hypergraph) {
        for a in 0..h.edge_count() {
            for b in a + 1..h.edge_count() {
                let ea = h.edge(a);
                let common = h
                    .edge(b)
                    .iter()
                    .filter(|v| ea.binary_search(v).is_ok())
                    .count();
                assert_eq!(common, 1, "lines {a} and {b}");
            }
        }
    }

    #[test]
    fn fano_structure() {
        let h = fano();
        assert_eq!(h.vertex_count(), 7);
        assert_eq!(h.edge_count(), 7);
        assert!(h.edges().all(|e| e.len() == 3));
        for v in 0..7 {
            assert_eq!(h.incident_edges(v).len(), 3, "vertex {v}");
        }
        pairwise_intersections_are_points(&h);
    }

    #[test]
    fn small_planes() {
        let h2 = projective_plane(2).unwrap();
        assert_eq!((h2.vertex_count(), h2.edge_count()), (7, 7));
        assert!(h2.edges().all(|e| e.len() == 3));
        pairwise_intersections_are_points(&h2);

        let h3 = projective_plane(3).unwrap();
        assert_eq!((h3.vertex_count(), h3.edge_count()), (13, 13));
        assert!(h3.edges().all(|e| e.len() == 4));
        for v in 0..13 {
            assert_eq!(h3.incident_edges(v).len(), 4);
        }
        pairwise_intersections_are_points(&h3);

        let h5 = projective_plane(5).unwrap();
        assert_eq!((h5.vertex_count(), h5.edge_count()), (31, 31));
        assert!(h5.edges().all(|e| e.len() == 6));
    }

    #[test]
    fn plane_order_validation() {
        assert_eq!(
            projective_plane(4),
            Err(GeneratorError::NotPrime { order: 4 })
        );
        assert_eq!(
            projective_plane(17),
            Err(GeneratorError::OrderTooLarge { order: 17 })
        );
        assert_eq!(
            projective_plane(1),
            Err(GeneratorError::NotPrime { order: 1 })
        );
    }

    #[test]
    fn structured_generators() {
        let t = triangle();
        assert_eq!((t.vertex_count(), t.edge_count()), (3, 3));
        let p = path(4);
        assert_eq!((p.vertex_count(), p.edge_count()), (5, 4));
        assert!(p.edges_intersect(0, 1).unwrap() && !p.edges_intersect(0, 2).unwrap());
        let d = disjoint(3, 3).unwrap();
        assert_eq!((d.vertex_count(), d.edge_count()), (9, 3));
        assert!(!d.edges_intersect(0, 1).unwrap());
        let empty = path(0);
        assert_eq!((empty.vertex_count(), empty.edge_count()), (1, 0));
    }

    #[test]
    fn random_is_deterministic_and_in_range() {
        let spec = RandomSpec {
            vertices: 6,
            edges: 8,
            size_min: 2,
            size_max: 3,
            seed: 1,
        };
        let a = random_hypergraph(&spec).unwrap();
        let b = random_hypergraph(&spec).unwrap();
        assert_eq!(edge_lists(a.hypergraph()), edge_lists(b.hypergraph()));
        assert_eq!(a.weights(), b.weights());
        assert_eq!(a.hypergraph().edge_count(), 8);
        assert!(a.hypergraph().edges().all(|e| (2..=3).contains(&e.len())));
        assert!(a.weights().iter().all(|w| w.is_positive()));

        let other = random_hypergraph(&RandomSpec { seed: 2, ..spec }).unwrap();
        assert_ne!(edge_lists(a.hypergraph()), edge_lists(other.hypergraph()));
    }

    #[test]
    fn random_exhaustion_and_stall_completion() {
        // only three distinct 2-edges exist on three vertices
        let too_many = RandomSpec {
            vertices: 3,
            edges: 100,
            size_min: 2,
            size_max: 2,
            seed: 1,
        };
        assert!(matches!(
            random_hypergraph(&too_many),
            Err(GeneratorError::Unsatisfiable { requested: 100, .. })
        ));
        // asking for exactly all of them must terminate with the full set
        let all = random_hypergraph(&RandomSpec {
            edges: 3,
            ..too_many
        })
        .unwrap();
        let mut lists = edge_lists(all.hypergraph());
        lists.sort();
        assert_eq!(lists, vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
    }

    #[test]
    fn biuniform_counts_sizes_and_determinism() {
        let spec = BiUniformSpec {
            vertices: 8,
            small_edges: 5,
            large_edges: 5,
            small_size: 2,
            large_size: 3,
            seed: 7,
        };
        let inst = biuniform_random(&spec).unwrap();
        let h = inst.hypergraph();
        assert_eq!(h.edge_count(), 10);
        let lists = edge_lists(h);
        assert!(lists[..5].iter().all(|e| e.len() == 2));
        assert!(lists[5..].iter().all(|e| e.len() == 3));
        let again = biuniform_random(&spec).unwrap();
        assert_eq!(lists, edge_lists(again.hypergraph()));
    }

    #[test]
    fn weights_are_deterministic_small_rationals() {
        let w1 = random_weights(10, 42);
        let w2 = random_weights(10, 42);
        assert_eq!(w1, w2);
        for w in &w1 {
            assert!(w.is_positive());
            assert!(*w.numer() <= 16.into() && *w.denom() <= 16.into());
        }
        assert_ne!(random_weights(10, 43), w1);
    }
}
