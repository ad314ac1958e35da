//! Maximum bipartite matching between local rows and client columns.

/// Size of a maximum matching from `adjacency` rows into columns `0..n_right`,
/// using only columns with `allowed[c]` set. Row `t` is replicated
/// `copies[t]` times when `copies` is given.
pub(crate) fn max_matching(
    adjacency: &[Vec<usize>],
    n_right: usize,
    allowed: Option<&[bool]>,
    copies: Option<&[usize]>,
) -> usize {
    let mut left: Vec<&[usize]> = Vec::new();
    for (t, adj) in adjacency.iter().enumerate() {
        let times = copies.map_or(1, |c| c[t]);
        for _ in 0..times {
            left.push(adj);
        }
    }
    let mut owner: Vec<Option<usize>> = vec![None; n_right];
    let mut size = 0;
    let mut seen = vec![false; n_right];
    for u in 0..left.len() {
        seen.iter_mut().for_each(|s| *s = false);
        if augment(u, &left, allowed, &mut owner, &mut seen) {
            size += 1;
        }
    }
    size
}

fn augment(
    u: usize,
    left: &[&[usize]],
    allowed: Option<&[bool]>,
    owner: &mut [Option<usize>],
    seen: &mut [bool],
) -> bool {
    for &c in left[u] {
        if seen[c] || allowed.is_some_and(|a| !a[c]) {
            continue;
        }
        seen[c] = true;
        let free = match owner[c] {
            None => true,
            Some(v) => augment(v, left, allowed, owner, seen),
        };
        if free {
            owner[c] = Some(u);
            return true;
        }
    }
    false
}
