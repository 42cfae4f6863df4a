//! Minimum hitting set by branch and bound.
//!
//! Candidates are the distinct point memberships left after removing
//! dominated points; a region whose candidate set contains another
//! region's is implied and dropped. The search branches on the uncovered
//! region with the fewest candidates, and prunes with the larger of a
//! disjoint-region packing bound and a cardinality bound.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use fixedbitset::FixedBitSet;

use super::heuristics::{depth_first, lowest_index};
use super::RegionIncidence;

#[derive(Debug, Clone, PartialEq)]
pub struct ExactOutcome {
    pub points: Vec<usize>,
    /// False when the time budget ran out before the search finished.
    pub optimal: bool,
    pub nodes: u64,
}

struct Search {
    /// Region set of each candidate.
    sets: Vec<FixedBitSet>,
    /// Representative incidence point of each candidate.
    rep: Vec<usize>,
    /// Candidates containing each region.
    cands: Vec<Vec<usize>>,
    /// Regions sharing a candidate with each region, itself included.
    neighbors: Vec<FixedBitSet>,
    /// Regions by ascending candidate count.
    order: Vec<usize>,
    best: Vec<usize>,
    deadline: Instant,
    nodes: u64,
    timed_out: bool,
}

impl Search {
    fn lower_bound(&self, uncovered: &FixedBitSet, allowed: &FixedBitSet) -> usize {
        let mut blocked = FixedBitSet::with_capacity(uncovered.len());
        let mut packing = 0;
        for &r in &self.order {
            if uncovered.contains(r) && !blocked.contains(r) {
                packing += 1;
                blocked.union_with(&self.neighbors[r]);
            }
        }
        let need = uncovered.count_ones(..);
        let widest = allowed
            .ones()
            .map(|c| self.sets[c].intersection_count(uncovered))
            .max()
            .unwrap_or(0);
        if widest == 0 {
            return usize::MAX;
        }
        packing.max(need.div_ceil(widest))
    }

    fn run(&mut self, uncovered: &FixedBitSet, allowed: &FixedBitSet, chosen: &mut Vec<usize>) {
        if uncovered.is_clear() {
            if chosen.len() < self.best.len() {
                self.best = chosen.clone();
            }
            return;
        }
        self.nodes += 1;
        if self.nodes % 256 == 0 && Instant::now() >= self.deadline {
            self.timed_out = true;
        }
        if self.timed_out || chosen.len() + 1 >= self.best.len() {
            return;
        }
        let lb = self.lower_bound(uncovered, allowed);
        if lb == usize::MAX || chosen.len() + lb >= self.best.len() {
            return;
        }
        // Branch on the uncovered region with the fewest remaining options.
        let mut pick: Option<(usize, usize)> = None;
        for r in uncovered.ones() {
            let n = self.cands[r].iter().filter(|&&c| allowed.contains(c)).count();
            if pick.map_or(true, |(_, m)| n < m) {
                pick = Some((r, n));
            }
            if n <= 1 {
                break;
            }
        }
        let Some((r, n)) = pick else { return };
        if n == 0 {
            return;
        }
        let mut options: Vec<(usize, usize)> = self.cands[r]
            .iter()
            .filter(|&&c| allowed.contains(c))
            .map(|&c| (self.sets[c].intersection_count(uncovered), c))
            .collect();
        options.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        let mut allowed = allowed.clone();
        for (_, c) in options {
            let mut next = uncovered.clone();
            next.difference_with(&self.sets[c]);
            chosen.push(c);
            self.run(&next, &allowed, chosen);
            chosen.pop();
            if self.timed_out {
                return;
            }
            // Later siblings never need `c`: that subtree is explored.
            allowed.remove(c);
        }
    }
}

/// Optimal hitting set within `time_budget`; otherwise the best plan found
/// with `optimal` false. Deterministic for a given incidence.
pub fn solve_exact(inc: &RegionIncidence, time_budget: Duration) -> ExactOutcome {
    let start = Instant::now();
    let n = inc.region_count();
    if n == 0 {
        return ExactOutcome {
            points: Vec::new(),
            optimal: true,
            nodes: 0,
        };
    }

    // Distinct memberships, first point wins.
    let mut seen: HashMap<&[usize], usize> = HashMap::new();
    let mut uniq: Vec<usize> = Vec::new();
    for (l, rs) in inc.point_regions.iter().enumerate() {
        seen.entry(rs.as_slice()).or_insert_with(|| {
            uniq.push(l);
            l
        });
    }
    let bits = |l: usize| {
        let mut b = FixedBitSet::with_capacity(n);
        b.extend(inc.point_regions[l].iter().copied());
        b
    };
    let all_sets: Vec<FixedBitSet> = uniq.iter().map(|&l| bits(l)).collect();

    // Drop candidates strictly contained in another.
    let mut by_size: Vec<usize> = (0..uniq.len()).collect();
    by_size.sort_by_key(|&i| std::cmp::Reverse(all_sets[i].count_ones(..)));
    let mut kept: Vec<usize> = Vec::new();
    for &i in &by_size {
        if !kept.iter().any(|&j| all_sets[i].is_subset(&all_sets[j])) {
            kept.push(i);
        }
    }
    kept.sort_by_key(|&i| uniq[i]);
    let sets: Vec<FixedBitSet> = kept.iter().map(|&i| all_sets[i].clone()).collect();
    let rep: Vec<usize> = kept.iter().map(|&i| uniq[i]).collect();

    let mut cands = vec![Vec::new(); n];
    for (c, s) in sets.iter().enumerate() {
        for r in s.ones() {
            cands[r].push(c);
        }
    }

    // A region whose candidates include all of another's is implied by it.
    let cand_bits: Vec<FixedBitSet> = cands
        .iter()
        .map(|cs| {
            let mut b = FixedBitSet::with_capacity(sets.len());
            b.extend(cs.iter().copied());
            b
        })
        .collect();
    let mut uncovered = FixedBitSet::with_capacity(n);
    uncovered.insert_range(..);
    for a in 0..n {
        for b in 0..n {
            if a != b
                && uncovered.contains(a)
                && uncovered.contains(b)
                && cand_bits[a].is_subset(&cand_bits[b])
                && (cand_bits[a] != cand_bits[b] || a < b)
            {
                uncovered.remove(b);
            }
        }
    }

    let neighbors: Vec<FixedBitSet> = cands
        .iter()
        .map(|cs| {
            let mut b = FixedBitSet::with_capacity(n);
            for &c in cs {
                b.union_with(&sets[c]);
            }
            b
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&r| (cands[r].len(), r));

    // Incumbent from depth-first placement, mapped onto candidates.
    let greedy = depth_first(inc, &vec![true; n], &mut lowest_index);
    let best: Vec<usize> = greedy
        .iter()
        .map(|&l| {
            let s = bits(l);
            (0..sets.len()).find(|&c| s.is_subset(&sets[c])).expect("dominating candidate exists")
        })
        .collect();

    let mut search = Search {
        sets,
        rep,
        cands,
        neighbors,
        order,
        best,
        deadline: start + time_budget,
        nodes: 0,
        timed_out: false,
    };
    let mut allowed = FixedBitSet::with_capacity(search.sets.len());
    allowed.insert_range(..);
    search.run(&uncovered, &allowed, &mut Vec::new());

    let mut points: Vec<usize> = search.best.iter().map(|&c| search.rep[c]).collect();
    points.sort_unstable();
    points.dedup();
    ExactOutcome {
        points,
        optimal: !search.timed_out,
        nodes: search.nodes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deploy::incidence::tests::{info, two_ue_example};
    use crate::deploy::{solve_df, RegionKind};
    use crate::geometry::Point3;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const BUDGET: Duration = Duration::from_secs(30);

    fn incidence(nr: usize, membership: Vec<Vec<usize>>) -> RegionIncidence {
        let np = membership.len();
        let regions = (0..nr).map(|j| info(&format!("C{}", j + 1), RegionKind::Comm)).collect();
        let points = (0..np).map(|i| Point3::new(i as f64, 0.0, 100.0)).collect();
        let coords = (0..np).map(|i| (i, 0)).collect();
        RegionIncidence::from_membership(regions, points, coords, (np, 1), membership).unwrap()
    }

    /// Smallest hitting set size by trying every subset of points.
    fn brute_force(inc: &RegionIncidence) -> usize {
        let np = inc.point_count();
        let masks: Vec<u32> = inc
            .point_regions
            .iter()
            .map(|rs| rs.iter().fold(0u32, |m, &r| m | (1 << r)))
            .collect();
        let full = (1u32 << inc.region_count()) - 1;
        let mut best = usize::MAX;
        for subset in 0u32..(1 << np) {
            let k = subset.count_ones() as usize;
            if k >= best {
                continue;
            }
            let hit = (0..np).filter(|&i| subset >> i & 1 == 1).fold(0, |m, i| m | masks[i]);
            if hit == full {
                best = k;
            }
        }
        best
    }

    #[test]
    fn worked_example_two_uavs() {
        let out = solve_exact(&two_ue_example(), BUDGET);
        assert_eq!(out.points, vec![0, 3]);
        assert!(out.optimal);
    }

    #[test]
    fn trivial_instances() {
        let out = solve_exact(&incidence(2, vec![vec![0], vec![1]]), BUDGET);
        assert_eq!(out.points.len(), 2);
        let out = solve_exact(&incidence(3, vec![vec![0, 1], vec![0, 1, 2], vec![2]]), BUDGET);
        assert_eq!(out.points, vec![1]);
        let out = solve_exact(&incidence(0, vec![]), BUDGET);
        assert!(out.points.is_empty() && out.optimal);
    }

    #[test]
    fn matches_power_set_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..200 {
            let nr = rng.gen_range(1..=12);
            let np = rng.gen_range(nr.min(4)..=16);
            let mut membership: Vec<Vec<usize>> = (0..np)
                .map(|_| (0..nr).filter(|_| rng.gen_bool(0.25)).collect())
                .collect();
            for j in 0..nr {
                let i = rng.gen_range(0..np);
                membership[i].push(j);
            }
            let inc = incidence(nr, membership);
            let out = solve_exact(&inc, BUDGET);
            assert!(out.optimal);
            assert!(inc.hits_all(&out.points));
            assert_eq!(out.points.len(), brute_force(&inc));
        }
    }

    #[test]
    fn zero_budget_returns_valid_incumbent() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let nr = 60;
        let membership: Vec<Vec<usize>> = (0..400)
            .map(|_| (0..nr).filter(|_| rng.gen_bool(0.08)).collect())
            .collect();
        let inc = incidence(nr, membership);
        let out = solve_exact(&inc, Duration::ZERO);
        assert!(inc.hits_all(&out.points));
        assert!(out.points.len() <= solve_df(&inc, 1, 0).len());
    }

    proptest! {
        #[test]
        fn never_worse_than_depth_first(
            membership in proptest::collection::vec(proptest::collection::vec(0usize..15, 0..5), 10..40)
        ) {
            let mut membership = membership;
            for j in 0..15 {
                let i = j % membership.len();
                membership[i].push(j);
            }
            let inc = incidence(15, membership);
            let out = solve_exact(&inc, BUDGET);
            prop_assert!(inc.hits_all(&out.points));
            prop_assert!(out.points.len() <= solve_df(&inc, 3, 1).len());
        }
    }
}
