//! Variable/equation counting for linear IA feasibility.

use crate::channel::LinkDims;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PropernessReport {
    /// `N_v = sum_k d_k (M_k + N_k - 2 d_k)`.
    pub variables: u64,
    /// `N_e = sum_{i != k} d_i d_k`.
    pub equations: u64,
    pub proper: bool,
}

impl std::fmt::Display for PropernessReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "N_v = {}, N_e = {}: {}",
            self.variables,
            self.equations,
            if self.proper { "proper" } else { "improper" }
        )
    }
}

pub fn properness_check(users: &[LinkDims]) -> PropernessReport {
    let variables = users
        .iter()
        .map(|u| {
            let d = u.streams as u64;
            d * ((u.tx + u.rx) as u64).saturating_sub(2 * d)
        })
        .sum();
    let total: u64 = users.iter().map(|u| u.streams as u64).sum();
    let squares: u64 = users.iter().map(|u| (u.streams as u64).pow(2)).sum();
    let equations = total * total - squares;
    PropernessReport {
        variables,
        equations,
        proper: variables >= equations,
    }
}

/// The layered network with `groups` groups of three pairs, group `g`
/// (1-based) having `3g - 1` antennas per node. Every node sends one stream
/// except the first node of group `boosted_group`, which sends `boosted_streams`.
pub fn layered_network(
    groups: usize,
    boosted_group: usize,
    boosted_streams: usize,
) -> Vec<LinkDims> {
    let mut users = Vec::with_capacity(3 * groups);
    for g in 1..=groups {
        let ant = 3 * g - 1;
        for slot in 0..3 {
            let d = if g == boosted_group && slot == 0 {
                boosted_streams
            } else {
                1
            };
            users.push(LinkDims::new(ant, ant, d));
        }
    }
    users
}

/// Closed-form `(N_v, N_e)` for [`layered_network`].
pub fn layered_counts(groups: i64, boosted_group: i64, boosted_streams: i64) -> (i64, i64) {
    let (k, i, d) = (groups, boosted_group, boosted_streams);
    let nv = 9 * k * k - 3 * k - 6 * i + 4 + d * (6 * i - 2 - 2 * d);
    let ne = (3 * k - 1) * (3 * k - 2 + 2 * d);
    (nv, ne)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_user_2x2_is_tight() {
        let r = properness_check(&[LinkDims::new(2, 2, 1); 3]);
        assert_eq!((r.variables, r.equations, r.proper), (6, 6, true));
    }

    #[test]
    fn four_user_2x2_is_improper() {
        let r = properness_check(&[LinkDims::new(2, 2, 1); 4]);
        assert_eq!((r.variables, r.equations, r.proper), (8, 12, false));
    }

    #[test]
    fn single_user_always_proper() {
        let r = properness_check(&[LinkDims::new(1, 7, 1)]);
        assert_eq!(r.equations, 0);
        assert!(r.proper);
    }

    #[test]
    fn layered_instance_matches_closed_form() {
        let users = layered_network(2, 1, 2);
        assert_eq!(users.len(), 6);
        let r = properness_check(&users);
        assert_eq!((r.variables, r.equations), (28, 40));
        assert!(!r.proper);
        assert_eq!(layered_counts(2, 1, 2), (28, 40));
    }

    #[test]
    fn closed_form_agrees_with_general_count() {
        for k in 1..=5i64 {
            for i in 1..=k {
                let ant = 3 * i - 1;
                for d in 1..=ant {
                    let r = properness_check(&layered_network(k as usize, i as usize, d as usize));
                    let (nv, ne) = layered_counts(k, i, d);
                    assert_eq!(
                        (r.variables as i64, r.equations as i64),
                        (nv, ne),
                        "K={k} i={i} d={d}"
                    );
                    if d > 1 {
                        assert!(!r.proper);
                    }
                }
            }
        }
    }
}
