//! One-to-one matching between the tag sets of two resources.

/// Maximum bipartite matching by augmenting paths, starting from `seed`
/// (which must itself be a valid matching over `adj`). Returned pairs are
/// sorted by left index.
pub fn maximum(adj: &[Vec<usize>], n_right: usize, seed: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let n_left = adj.len();
    let mut match_left: Vec<Option<usize>> = vec![None; n_left];
    let mut match_right: Vec<Option<usize>> = vec![None; n_right];
    for &(l, r) in seed {
        debug_assert!(adj[l].contains(&r));
        match_left[l] = Some(r);
        match_right[r] = Some(l);
    }
    for start in 0..n_left {
        if match_left[start].is_some() {
            continue;
        }
        let mut visited = vec![false; n_right];
        augment(start, adj, &mut visited, &mut match_left, &mut match_right);
    }
    match_left
        .iter()
        .enumerate()
        .filter_map(|(l, r)| r.map(|r| (l, r)))
        .collect()
}

fn augment(
    l: usize,
    adj: &[Vec<usize>],
    visited: &mut [bool],
    match_left: &mut [Option<usize>],
    match_right: &mut [Option<usize>],
) -> bool {
    for &r in &adj[l] {
        if visited[r] {
            continue;
        }
        visited[r] = true;
        let free = match match_right[r] {
            None => true,
            Some(other) => augment(other, adj, visited, match_left, match_right),
        };
        if free {
            match_left[l] = Some(r);
            match_right[r] = Some(l);
            return true;
        }
    }
    false
}
