//! Assignment problems over small dense cost matrices.
//!
//! A permutation is stored as `perm[i] = j`, meaning row `i` is matched to
//! column `j`. Lexicographic order on these arrays is the fixed order of the
//! symmetric group used wherever ties are broken.

/// Minimum-sum assignment (Hungarian method with potentials, O(n³)).
pub fn min_cost_assignment(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    debug_assert!(cost.iter().all(|row| row.len() == n));

    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut perm = vec![0usize; n];
    for j in 1..=n {
        if p[j] > 0 {
            perm[p[j] - 1] = j - 1;
        }
    }
    perm
}

/// Perfect matching using only edges with `cost <= limit` (Kuhn's
/// augmenting paths). Returns `perm` when one exists.
fn threshold_matching(cost: &[Vec<f64>], limit: f64) -> Option<Vec<usize>> {
    let n = cost.len();
    let mut match_col: Vec<Option<usize>> = vec![None; n];

    fn augment(
        row: usize,
        cost: &[Vec<f64>],
        limit: f64,
        seen: &mut [bool],
        match_col: &mut [Option<usize>],
    ) -> bool {
        for col in 0..cost.len() {
            if cost[row][col] > limit || seen[col] {
                continue;
            }
            seen[col] = true;
            let free = match match_col[col] {
                None => true,
                Some(other) => augment(other, cost, limit, seen, match_col),
            };
            if free {
                match_col[col] = Some(row);
                return true;
            }
        }
        false
    }

    for row in 0..n {
        let mut seen = vec![false; n];
        if !augment(row, cost, limit, &mut seen, &mut match_col) {
            return None;
        }
    }
    let mut perm = vec![0; n];
    for (col, row) in match_col.iter().enumerate() {
        perm[row.expect("perfect matching")] = col;
    }
    Some(perm)
}

/// Minimum over permutations of `max_i cost[i][perm[i]]`: binary search over
/// the sorted distinct costs with a matching feasibility test.
pub fn bottleneck_assignment(cost: &[Vec<f64>]) -> (f64, Vec<usize>) {
    let n = cost.len();
    if n == 0 {
        return (0.0, Vec::new());
    }
    let mut candidates: Vec<f64> = cost.iter().flatten().copied().collect();
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();
    let (mut lo, mut hi) = (0, candidates.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if threshold_matching(cost, candidates[mid]).is_some() {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let perm = threshold_matching(cost, candidates[lo]).expect("largest cost always admits a matching");
    (candidates[lo], perm)
}

/// Exhaustive minimum of `Σ cost[i][perm[i]]` by depth-first search over
/// permutations in lexicographic order, pruning partial sums that already
/// exceed the best complete one. Returns the first minimizer found.
pub fn exhaustive_min_sum(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    let mut best = (f64::INFINITY, (0..n).collect::<Vec<_>>());
    let mut current = Vec::with_capacity(n);
    let mut used = vec![false; n];
    dfs(cost, &mut current, &mut used, 0.0, &mut best, |acc, c| acc + c);
    best.1
}

/// Exhaustive minimum of `max_i cost[i][perm[i]]`.
pub fn exhaustive_min_max(cost: &[Vec<f64>]) -> (f64, Vec<usize>) {
    let n = cost.len();
    if n == 0 {
        return (0.0, Vec::new());
    }
    let mut best = (f64::INFINITY, (0..n).collect::<Vec<_>>());
    let mut current = Vec::with_capacity(n);
    let mut used = vec![false; n];
    dfs(cost, &mut current, &mut used, 0.0, &mut best, f64::max);
    best
}

fn dfs(
    cost: &[Vec<f64>],
    current: &mut Vec<usize>,
    used: &mut [bool],
    acc: f64,
    best: &mut (f64, Vec<usize>),
    combine: impl Fn(f64, f64) -> f64 + Copy,
) {
    let row = current.len();
    if row == cost.len() {
        if acc < best.0 {
            *best = (acc, current.clone());
        }
        return;
    }
    for col in 0..cost.len() {
        if used[col] {
            continue;
        }
        let next = combine(acc, cost[row][col]);
        if next >= best.0 {
            continue;
        }
        used[col] = true;
        current.push(col);
        dfs(cost, current, used, next, best, combine);
        current.pop();
        used[col] = false;
    }
}

/// All permutations whose summed cost is at most `bound`, in lexicographic
/// order. `total` evaluates a complete permutation exactly; the partial sums
/// only prune, with a relative slack so no admissible leaf is lost.
pub fn permutations_within(
    cost: &[Vec<f64>],
    bound: f64,
    total: impl Fn(&[usize]) -> f64,
) -> Vec<Vec<usize>> {
    let n = cost.len();
    let prune = bound * (1.0 + 1e-12) + f64::MIN_POSITIVE;
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(n);
    let mut used = vec![false; n];

    #[allow(clippy::too_many_arguments)]
    fn walk(
        cost: &[Vec<f64>],
        current: &mut Vec<usize>,
        used: &mut [bool],
        acc: f64,
        prune: f64,
        bound: f64,
        total: &dyn Fn(&[usize]) -> f64,
        out: &mut Vec<Vec<usize>>,
    ) {
        let row = current.len();
        if row == cost.len() {
            if total(current) <= bound {
                out.push(current.clone());
            }
            return;
        }
        for col in 0..cost.len() {
            if used[col] {
                continue;
            }
            let next = acc + cost[row][col];
            if next > prune {
                continue;
            }
            used[col] = true;
            current.push(col);
            walk(cost, current, used, next, prune, bound, total, out);
            current.pop();
            used[col] = false;
        }
    }

    walk(cost, &mut current, &mut used, 0.0, prune, bound, &total, &mut out);
    out
}

pub fn inverse(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (i, &j) in perm.iter().enumerate() {
        inv[j] = i;
    }
    inv
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sum_cost(cost: &[Vec<f64>], perm: &[usize]) -> f64 {
        perm.iter().enumerate().map(|(i, &j)| cost[i][j]).sum()
    }

    #[test]
    fn hungarian_small() {
        let cost = vec![vec![4.0, 1.0, 3.0], vec![2.0, 0.0, 5.0], vec![3.0, 2.0, 2.0]];
        let perm = min_cost_assignment(&cost);
        assert_eq!(sum_cost(&cost, &perm), 5.0);
        assert_eq!(exhaustive_min_sum(&cost), perm);
    }

    #[test]
    fn bottleneck_small() {
        let cost = vec![vec![1.0, 9.0], vec![9.0, 1.0]];
        assert_eq!(bottleneck_assignment(&cost), (1.0, vec![0, 1]));
        let cost = vec![vec![5.0, 3.0, 8.0], vec![2.0, 7.0, 4.0], vec![6.0, 1.0, 9.0]];
        let (v, _) = bottleneck_assignment(&cost);
        assert_eq!(v, exhaustive_min_max(&cost).0);
        assert_eq!(v, 5.0);
    }

    #[test]
    fn within_lists_lexicographic_ties() {
        let cost = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
        let all = permutations_within(&cost, 2.0, |p| sum_cost(&cost, p));
        assert_eq!(all, vec![vec![0, 1], vec![1, 0]]);
    }

    #[test]
    fn inverse_round_trip() {
        let p = vec![2, 0, 3, 1];
        assert_eq!(inverse(&inverse(&p)), p);
        assert_eq!(inverse(&p), vec![1, 3, 0, 2]);
    }
}
