//! Re-Pair-like compression of sets: the rule `X -> {a, b}` is created for
//! the pair of symbols found together in the most sets, and replaces both
//! symbols in every set holding them.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetGrammar {
    pub terminal_limit: u32,
    /// Rule `t` is symbol `terminal_limit + t`, standing for the union of
    /// its two members.
    pub rules: Vec<(u32, u32)>,
    /// Rewritten sets, each ascending.
    pub sets: Vec<Vec<u32>>,
}

impl SetGrammar {
    /// Expands set `i` back to terminals, ascending and deduplicated.
    pub fn expand(&self, i: usize) -> Vec<u32> {
        let mut out = Vec::new();
        let mut stack: Vec<u32> = self.sets[i].clone();
        while let Some(x) = stack.pop() {
            if x < self.terminal_limit {
                out.push(x);
            } else {
                let (a, b) = self.rules[(x - self.terminal_limit) as usize];
                stack.push(a);
                stack.push(b);
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn size(&self) -> usize {
        2 * self.rules.len() + self.sets.iter().map(Vec::len).sum::<usize>()
    }
}

pub fn setpair_compress(sets: &[Vec<u32>]) -> Result<SetGrammar> {
    for (i, s) in sets.iter().enumerate() {
        if s.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::MalformedInput(format!("set {i} is not strictly increasing")));
        }
    }
    let limit = sets.iter().flatten().copied().max().map_or(0, |m| m + 1);
    let mut work: Vec<BTreeSet<u32>> = sets.iter().map(|s| s.iter().copied().collect()).collect();
    let mut postings: HashMap<u32, BTreeSet<usize>> = HashMap::new();
    let mut counts: HashMap<(u32, u32), u32> = HashMap::new();
    for (i, s) in sets.iter().enumerate() {
        for (k, &a) in s.iter().enumerate() {
            postings.entry(a).or_default().insert(i);
            for &b in &s[k + 1..] {
                *counts.entry((a, b)).or_default() += 1;
            }
        }
    }
    let mut heap: BinaryHeap<(u32, Reverse<(u32, u32)>)> =
        counts.iter().filter(|(_, &c)| c >= 2).map(|(&p, &c)| (c, Reverse(p))).collect();
    let mut rules = Vec::new();
    while let Some((c, Reverse((a, b)))) = heap.pop() {
        if counts.get(&(a, b)).copied() != Some(c) {
            continue;
        }
        let x = limit + rules.len() as u32;
        rules.push((a, b));
        let holders: Vec<usize> = postings[&a].intersection(&postings[&b]).copied().collect();
        let mut changed = Vec::new();
        for &i in &holders {
            let set = &mut work[i];
            set.remove(&a);
            set.remove(&b);
            for &y in set.iter() {
                for z in [a, b] {
                    let p = (z.min(y), z.max(y));
                    *counts.get_mut(&p).unwrap() -= 1;
                    changed.push(p);
                }
                // x is the largest symbol so far
                *counts.entry((y, x)).or_default() += 1;
                changed.push((y, x));
            }
            set.insert(x);
            postings.get_mut(&a).unwrap().remove(&i);
            postings.get_mut(&b).unwrap().remove(&i);
            postings.entry(x).or_default().insert(i);
        }
        counts.remove(&(a, b));
        changed.sort_unstable();
        changed.dedup();
        for p in changed {
            let c = counts[&p];
            if c >= 2 {
                heap.push((c, Reverse(p)));
            }
        }
    }
    Ok(SetGrammar {
        terminal_limit: limit,
        rules,
        sets: work.into_iter().map(|s| s.into_iter().collect()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn shared_pair_becomes_rule() {
        let g = setpair_compress(&[vec![1, 2, 3], vec![1, 2, 4]]).unwrap();
        assert_eq!(g.rules, vec![(1, 2)]);
        let x = g.terminal_limit;
        assert_eq!(g.sets, vec![vec![3, x], vec![4, x]]);
        assert_eq!(g.expand(0), vec![1, 2, 3]);
    }

    #[test]
    fn no_common_pair() {
        let g = setpair_compress(&[vec![1], vec![2]]).unwrap();
        assert!(g.rules.is_empty());
        assert_eq!(g.sets, vec![vec![1], vec![2]]);
    }

    #[test]
    fn identical_pairs() {
        let g = setpair_compress(&[vec![1, 2], vec![1, 2]]).unwrap();
        assert_eq!(g.rules, vec![(1, 2)]);
        assert_eq!(g.sets, vec![vec![3], vec![3]]);
    }

    #[test]
    fn rejects_unsorted_sets() {
        assert!(matches!(setpair_compress(&[vec![2, 1]]), Err(Error::MalformedInput(_))));
        assert!(matches!(setpair_compress(&[vec![1, 1]]), Err(Error::MalformedInput(_))));
    }

    #[test]
    fn first_rule_is_most_shared_pair() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let sets: Vec<Vec<u32>> = (0..rng.gen_range(1..8))
                .map(|_| {
                    let mut s: Vec<u32> = (0..rng.gen_range(0..8)).map(|_| rng.gen_range(0..10)).collect();
                    s.sort();
                    s.dedup();
                    s
                })
                .collect();
            let g = setpair_compress(&sets).unwrap();
            for (i, s) in sets.iter().enumerate() {
                assert_eq!(&g.expand(i), s);
            }
            // brute-force the first selection
            let mut best: Option<((u32, u32), usize)> = None;
            for a in 0..10 {
                for b in a + 1..10 {
                    let c = sets.iter().filter(|s| s.contains(&a) && s.contains(&b)).count();
                    if c >= 2 && best.is_none_or(|(_, bc)| c > bc) {
                        best = Some(((a, b), c));
                    }
                }
            }
            assert_eq!(g.rules.first().copied(), best.map(|(p, _)| p));
        }
    }
}
