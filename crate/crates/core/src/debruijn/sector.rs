use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use crate::rule::{encode, pow, LocalConfig, RuleTable};

use super::cycles::strongly_connected_components;

/// The deterministic sector `D_f`: the largest subset of `B_f` whose
/// configurations lie on cycles inside the subset and which is closed under
/// the deterministic evolution.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DeterministicSector {
    configs: BTreeSet<LocalConfig>,
}

impl DeterministicSector {
    pub fn from_configs<I: IntoIterator<Item = LocalConfig>>(configs: I) -> Self {
        DeterministicSector { configs: configs.into_iter().collect() }
    }

    pub fn configs(&self) -> &BTreeSet<LocalConfig> {
        &self.configs
    }

    pub fn contains(&self, c: LocalConfig) -> bool {
        self.configs.contains(&c)
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.configs.len()
    }
}

/// Greatest-fixpoint pruning of `B_f`. Each round drops configurations that
/// are not on a cycle of the current set, then, for every length-`k` path
/// `i_1…i_{2k-1}` inside the set whose deterministic image leaves the set,
/// drops all `k` configurations of that path.
pub fn deterministic_sector(rule: &RuleTable) -> DeterministicSector {
    let (q, k) = (rule.q(), rule.k());
    let v = pow(q, k - 1);
    let mut set: BTreeSet<LocalConfig> = rule.big_set();

    loop {
        let before = set.len();

        let mut adj = vec![Vec::new(); v];
        for c in &set {
            adj[c.index() / q].push(c.index() % v);
        }
        let comp = strongly_connected_components(&adj);
        set.retain(|c| comp[c.index() / q] == comp[c.index() % v]);

        let mut doomed = BTreeSet::new();
        for_each_sector_path(rule, &set, |windows| {
            let image: Vec<usize> = windows
                .iter()
                .map(|&w| rule.deterministic_output(w).expect("sector config in B_f"))
                .collect();
            if !set.contains(&LocalConfig::from_index(encode(&image, q))) {
                doomed.extend(windows.iter().copied());
            }
        });
        set.retain(|c| !doomed.contains(c));

        if set.len() == before {
            return DeterministicSector { configs: set };
        }
    }
}

/// Visits every string `i_1…i_{2k-1}` whose `k` windows all lie in `set`,
/// passing the windows in order.
pub(crate) fn for_each_sector_path<F>(rule: &RuleTable, set: &BTreeSet<LocalConfig>, mut visit: F)
where
    F: FnMut(&[LocalConfig]),
{
    let (q, k) = (rule.q(), rule.k());
    let v = pow(q, k - 1);
    // by_prefix[u] lists the sector configs whose first k-1 cells are u
    let mut by_prefix = vec![Vec::new(); v];
    for &c in set {
        by_prefix[c.index() / q].push(c);
    }
    let mut windows: Vec<LocalConfig> = Vec::with_capacity(k);
    let mut choice = Vec::with_capacity(k);
    for &first in set {
        windows.clear();
        choice.clear();
        windows.push(first);
        choice.push(0usize);
        // depth-first over extensions; choice[d] indexes by_prefix of window d
        while let Some(&last) = windows.last() {
            if windows.len() == k {
                visit(&windows);
                windows.pop();
                choice.pop();
                continue;
            }
            let next = &by_prefix[last.index() % v];
            let slot = choice.last_mut().expect("parallel stacks");
            if let Some(&c) = next.get(*slot) {
                *slot += 1;
                windows.push(c);
                choice.push(0);
            } else {
                windows.pop();
                choice.pop();
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rule::{Amplitude, DEFAULT_TOLERANCE};

    fn cfg(rule: &RuleTable, s: &str) -> LocalConfig {
        rule.parse_config(s).unwrap()
    }

    #[test]
    fn identity_sector_is_everything() {
        let rule = RuleTable::deterministic(2, 2, DEFAULT_TOLERANCE, |d| d[1]).unwrap();
        assert_eq!(deterministic_sector(&rule).len(), 4);
    }

    #[test]
    fn config_off_every_cycle_is_pruned() {
        // only 00 and 01 are in B_f; 01 is not on a cycle using 00 and 01 alone
        let one = Amplitude::new(1.0, 0.0);
        let half = Amplitude::new(0.5, 0.0);
        let rule = RuleTable::from_vectors(
            2,
            2,
            DEFAULT_TOLERANCE,
            &[vec![one, Amplitude::new(0.0, 0.0)], vec![Amplitude::new(0.0, 0.0), one], vec![half, half], vec![half, half]],
        )
        .unwrap();
        let sector = deterministic_sector(&rule);
        assert_eq!(sector.configs().iter().copied().collect::<Vec<_>>(), vec![cfg(&rule, "00")]);
    }

    #[test]
    fn evolution_closure_prunes() {
        // 00 -> 1 leaves {00}; nothing else is in B_f
        let one = Amplitude::new(1.0, 0.0);
        let zero = Amplitude::new(0.0, 0.0);
        let half = Amplitude::new(0.5, 0.0);
        let rule = RuleTable::from_vectors(
            2,
            2,
            DEFAULT_TOLERANCE,
            &[vec![zero, one], vec![half, half], vec![half, half], vec![half, half]],
        )
        .unwrap();
        assert!(deterministic_sector(&rule).is_empty());
    }

    #[test]
    fn sector_paths_of_identity_k2() {
        let rule = RuleTable::deterministic(2, 2, DEFAULT_TOLERANCE, |d| d[1]).unwrap();
        let mut n = 0;
        for_each_sector_path(&rule, &rule.big_set(), |w| {
            assert_eq!(w.len(), 2);
            assert_eq!(w[0].index() % 2, w[1].index() / 2);
            n += 1;
        });
        assert_eq!(n, 8);
    }
}
