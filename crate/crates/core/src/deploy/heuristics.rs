//! Greedy depth-first deployment and the three baseline placements.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{RegionIncidence, RegionKind};

/// Tie-break that always takes the first (lowest-index) point.
pub fn lowest_index(ties: &[usize]) -> usize {
    ties[0]
}

/// Repeatedly places a UAV at a point of maximum depth among the `active`
/// regions not yet hit, until all of them are hit. `tie` picks among
/// equally deep points, which it receives in ascending order.
pub fn depth_first(
    inc: &RegionIncidence,
    active: &[bool],
    tie: &mut dyn FnMut(&[usize]) -> usize,
) -> Vec<usize> {
    let mut uncovered = active.to_vec();
    let mut remaining = uncovered.iter().filter(|&&a| a).count();
    let mut depth: Vec<usize> = inc
        .point_regions
        .iter()
        .map(|rs| rs.iter().filter(|&&r| uncovered[r]).count())
        .collect();
    let mut chosen = Vec::new();
    let mut ties = Vec::new();
    while remaining > 0 {
        let best = depth.iter().copied().max().unwrap_or(0);
        if best == 0 {
            break;
        }
        ties.clear();
        ties.extend((0..depth.len()).filter(|&l| depth[l] == best));
        let p = tie(&ties);
        chosen.push(p);
        for &r in &inc.point_regions[p] {
            if uncovered[r] {
                uncovered[r] = false;
                remaining -= 1;
                for &q in &inc.region_points[r] {
                    depth[q] -= 1;
                }
            }
        }
    }
    chosen
}

/// Depth-first placement over all regions. The first run breaks ties by
/// lowest index; further runs break them uniformly at random. The smallest
/// plan wins, earliest run first.
pub fn solve_df(inc: &RegionIncidence, restarts: u32, seed: u64) -> Vec<usize> {
    let active = vec![true; inc.region_count()];
    let mut best = depth_first(inc, &active, &mut lowest_index);
    for run in 1..restarts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(run as u64);
        let plan = depth_first(inc, &active, &mut |t: &[usize]| t[rng.gen_range(0..t.len())]);
        if plan.len() < best.len() {
            best = plan;
        }
    }
    best
}

/// Communication disks first, then the localization regions those UAVs
/// leave unhit.
pub fn solve_comm_first(inc: &RegionIncidence) -> Vec<usize> {
    let comm: Vec<bool> = inc.regions.iter().map(|r| r.kind == RegionKind::Comm).collect();
    let mut chosen = depth_first(inc, &comm, &mut lowest_index);
    let mut rest = vec![false; inc.region_count()];
    for r in inc.unhit(&chosen) {
        rest[r] = true;
    }
    chosen.extend(depth_first(inc, &rest, &mut lowest_index));
    chosen
}

/// Position of a lattice cell along the rectangular inward spiral: ring by
/// ring from the boundary, each ring walked counter-clockwise from its
/// lower-left corner.
fn spiral_key((ix, iy): (usize, usize), (nx, ny): (usize, usize)) -> (usize, usize) {
    let r = ix.min(iy).min(nx - 1 - ix).min(ny - 1 - iy);
    let (x0, x1, y0, y1) = (r, nx - 1 - r, r, ny - 1 - r);
    let (w, h) = (x1 - x0, y1 - y0);
    let pos = if iy == y0 {
        ix - x0
    } else if ix == x1 {
        w + (iy - y0)
    } else if iy == y1 {
        w + h + (x1 - ix)
    } else {
        2 * w + h + (y1 - iy)
    };
    (r, pos)
}

/// Incidence points in spiral order.
pub fn spiral_order(inc: &RegionIncidence) -> Vec<usize> {
    let mut order: Vec<usize> = (0..inc.point_count()).collect();
    order.sort_by_key(|&l| (spiral_key(inc.coords[l], inc.grid_shape), l));
    order
}

/// Walks the spiral and places a UAV at every point that hits a region not
/// yet hit.
pub fn solve_spiral(inc: &RegionIncidence) -> Vec<usize> {
    let mut uncovered = vec![true; inc.region_count()];
    let mut remaining = uncovered.len();
    let mut chosen = Vec::new();
    for l in spiral_order(inc) {
        if remaining == 0 {
            break;
        }
        let rs = &inc.point_regions[l];
        if rs.iter().any(|&r| uncovered[r]) {
            chosen.push(l);
            for &r in rs {
                if uncovered[r] {
                    uncovered[r] = false;
                    remaining -= 1;
                }
            }
        }
    }
    chosen
}

/// Widest communication region, or the widest region when there are no
/// disks.
pub fn default_strip_width(inc: &RegionIncidence) -> f64 {
    let width = |kind: Option<RegionKind>| {
        inc.regions
            .iter()
            .filter(|r| kind.map_or(true, |k| r.kind == k))
            .map(|r| r.x_max - r.x_min)
            .fold(0.0, f64::max)
    };
    let w = width(Some(RegionKind::Comm));
    let w = if w > 0.0 { w } else { width(None) };
    if w > 0.0 {
        w
    } else {
        1.0
    }
}

/// Vertical strips of width `strip_width` swept left to right. Each region
/// belongs to the strip holding its leftmost point; per strip, depth-first
/// placement hits the strip's regions that earlier strips left unhit.
pub fn solve_strip(inc: &RegionIncidence, strip_width: f64) -> Vec<usize> {
    let n = inc.region_count();
    if n == 0 {
        return Vec::new();
    }
    let x0 = inc.regions.iter().map(|r| r.x_min).fold(f64::INFINITY, f64::min);
    let strip_of = |r: usize| ((inc.regions[r].x_min - x0) / strip_width).floor() as usize;
    let last = (0..n).map(strip_of).max().unwrap_or(0);
    let mut chosen: Vec<usize> = Vec::new();
    for s in 0..=last {
        let mut active = vec![false; n];
        let mut any = false;
        for r in inc.unhit(&chosen) {
            if strip_of(r) == s {
                active[r] = true;
                any = true;
            }
        }
        if any {
            chosen.extend(depth_first(inc, &active, &mut lowest_index));
        }
    }
    chosen
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deploy::incidence::tests::{info, two_ue_example};
    use crate::geometry::Point3;
    use proptest::prelude::*;

    #[test]
    fn worked_example_lowest_index_gives_two() {
        let inc = two_ue_example();
        let plan = solve_df(&inc, 1, 0);
        assert_eq!(plan, vec![0, 3]);
    }

    #[test]
    fn worked_example_adversarial_first_pick_gives_three() {
        let inc = two_ue_example();
        let mut first = true;
        let plan = depth_first(&inc, &[true; 4], &mut |t: &[usize]| {
            if std::mem::take(&mut first) {
                assert_eq!(t, [0, 2, 3]);
                2
            } else {
                t[0]
            }
        });
        assert_eq!(plan.len(), 3);
        assert_eq!(plan[0], 2);
        assert!(inc.hits_all(&plan));
    }

    #[test]
    fn restarts_never_hurt() {
        let inc = two_ue_example();
        assert_eq!(solve_df(&inc, 20, 7).len(), 2);
        assert_eq!(solve_df(&inc, 20, 7), solve_df(&inc, 20, 7));
    }

    /// Line of cells where region `j` covers `spans[j]` (inclusive).
    fn line(spans: &[(usize, usize, RegionKind)], n: usize) -> RegionIncidence {
        let regions: Vec<_> = spans
            .iter()
            .enumerate()
            .map(|(j, &(a, b, kind))| {
                let prefix = if kind == RegionKind::Comm { "C" } else { "E" };
                let mut i = info(&format!("{prefix}{}", j + 1), kind);
                i.x_min = a as f64 * 10.0;
                i.x_max = b as f64 * 10.0;
                i
            })
            .collect();
        let membership = (0..n)
            .map(|l| (0..spans.len()).filter(|&j| spans[j].0 <= l && l <= spans[j].1).collect())
            .collect();
        let points = (0..n).map(|i| Point3::new(i as f64 * 10.0, 0.0, 100.0)).collect();
        let coords = (0..n).map(|i| (i, 0)).collect();
        RegionIncidence::from_membership(regions, points, coords, (n, 1), membership).unwrap()
    }

    #[test]
    fn comm_first_examples() {
        use RegionKind::*;
        // Each UE's ellipse overlaps its disk: stage 1 hits everything.
        let inc = line(&[(0, 2, Comm), (0, 4, Localization), (6, 8, Comm), (5, 9, Localization)], 10);
        let plan = solve_comm_first(&inc);
        assert_eq!(plan.len(), 2);
        // Disjoint disk/ellipse per UE.
        let inc = line(&[(0, 1, Comm), (3, 4, Localization), (6, 7, Comm), (9, 9, Localization)], 10);
        assert_eq!(solve_comm_first(&inc).len(), 4);
    }

    #[test]
    fn strip_examples() {
        use RegionKind::*;
        let inc = line(&[(0, 2, Comm), (1, 3, Localization), (2, 4, Comm)], 10);
        assert_eq!(solve_strip(&inc, 100.0), solve_df(&inc, 1, 0));
        let inc = line(&[(0, 0, Comm), (4, 4, Comm), (8, 8, Localization)], 10);
        let plan = solve_strip(&inc, 30.0);
        let xs: Vec<_> = plan.iter().map(|&l| inc.coords[l].0).collect();
        assert_eq!(xs, vec![0, 4, 8]);
    }

    #[test]
    fn spiral_visits_ring_by_ring() {
        let shape = (4, 3);
        let mut cells: Vec<(usize, usize)> =
            (0..3).flat_map(|y| (0..4).map(move |x| (x, y))).collect();
        cells.sort_by_key(|&c| spiral_key(c, shape));
        assert_eq!(
            cells,
            [
                (0, 0),
                (1, 0),
                (2, 0),
                (3, 0),
                (3, 1),
                (3, 2),
                (2, 2),
                (1, 2),
                (0, 2),
                (0, 1),
                (1, 1),
                (2, 1)
            ]
        );
        let mut keys: Vec<_> = (0..7)
            .flat_map(|y| (0..5).map(move |x| spiral_key((x, y), (5, 7))))
            .collect();
        keys.sort_unstable();
        keys.dedup();
        assert_eq!(keys.len(), 35);
    }

    #[test]
    fn spiral_single_corner_region() {
        let n = 5;
        let membership: Vec<Vec<usize>> = (0..n * n)
            .map(|i| if i % n >= 3 && i / n >= 3 { vec![0] } else { vec![] })
            .collect();
        let points = (0..n * n)
            .map(|i| Point3::new((i % n) as f64, (i / n) as f64, 100.0))
            .collect();
        let coords = (0..n * n).map(|i| (i % n, i / n)).collect();
        let inc = RegionIncidence::from_membership(
            vec![info("C1", RegionKind::Comm)],
            points,
            coords,
            (n, n),
            membership,
        )
        .unwrap();
        let plan = solve_spiral(&inc);
        assert_eq!(plan.len(), 1);
        // First spiral cell inside the region: right edge of the outer ring.
        assert_eq!(inc.coords[plan[0]], (4, 3));
    }

    fn arb_incidence() -> impl Strategy<Value = RegionIncidence> {
        (1usize..10, 4usize..30).prop_flat_map(|(nr, np)| {
            proptest::collection::vec(proptest::collection::vec(0..nr, 0..4), np).prop_map(
                move |mut membership| {
                    for j in 0..nr {
                        membership[j % np].push(j);
                    }
                    let regions = (0..nr)
                        .map(|j| {
                            let kind = if j % 2 == 0 { RegionKind::Comm } else { RegionKind::Localization };
                            let mut i = info(&format!("C{}", j + 1), kind);
                            i.x_min = (j * 37 % 100) as f64;
                            i.x_max = i.x_min + 10.0;
                            i
                        })
                        .collect();
                    let points = (0..np).map(|i| Point3::new(i as f64, 0.0, 100.0)).collect();
                    let coords = (0..np).map(|i| (i % 6, i / 6)).collect();
                    let shape = (6, np.div_ceil(6));
                    RegionIncidence::from_membership(regions, points, coords, shape, membership).unwrap()
                },
            )
        })
    }

    proptest! {
        #[test]
        fn every_heuristic_hits_every_region(inc in arb_incidence(), seed in 0u64..1000) {
            prop_assert!(inc.hits_all(&solve_df(&inc, 5, seed)));
            prop_assert!(inc.hits_all(&solve_comm_first(&inc)));
            prop_assert!(inc.hits_all(&solve_spiral(&inc)));
            prop_assert!(inc.hits_all(&solve_strip(&inc, 25.0)));
            prop_assert!(inc.hits_all(&solve_strip(&inc, default_strip_width(&inc))));
        }
    }
}
