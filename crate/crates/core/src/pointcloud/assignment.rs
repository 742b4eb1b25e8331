//! Exact minimum-cost perfect matching on a dense square cost matrix.
//!
//! Shortest-augmenting-path formulation with dual potentials, O(n^3). The
//! returned cost is re-summed from the original matrix entries over the
//! chosen permutation, so it is unaffected by rounding in the potentials.

/// `cost` is row-major `n x n`. Returns `(total cost, row -> column map)`.
pub(crate) fn solve(cost: &[f64], n: usize) -> (f64, Vec<usize>) {
    assert_eq!(cost.len(), n * n);
    assert!(n > 0);

    // 1-based columns with column 0 as the virtual start of augmenting paths
    let mut u = vec![0.0_f64; n + 1];
    let mut v = vec![0.0_f64; n + 1];
    let mut matched_row = vec![0_usize; n + 1]; // 0 = column free
    let mut way = vec![0_usize; n + 1];

    for row in 1..=n {
        matched_row[0] = row;
        let mut j0 = 0_usize;
        let mut min_slack = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0_usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let slack = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                if slack < min_slack[j] {
                    min_slack[j] = slack;
                    way[j] = j0;
                }
                if min_slack[j] < delta {
                    delta = min_slack[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[matched_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    min_slack[j] -= delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == 0 {
                break;
            }
        }
        // walk the augmenting path back, flipping matches
        loop {
            let j1 = way[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut row_to_col = vec![usize::MAX; n];
    for j in 1..=n {
        row_to_col[matched_row[j] - 1] = j - 1;
    }
    let total = (0..n).map(|i| cost[i * n + row_to_col[i]]).sum();
    (total, row_to_col)
}
