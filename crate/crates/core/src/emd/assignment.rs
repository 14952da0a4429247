/// Minimum-cost perfect assignment on a dense square cost matrix.
///
/// Shortest augmenting paths with row/column potentials (the O(n³)
/// Hungarian method). `cost` is row-major `n × n`; the result maps each
/// row to its column. Ties resolve by lowest column index in scan order.
pub(crate) fn min_cost_assignment(cost: &[f64], n: usize) -> Vec<usize> {
    assert_eq!(cost.len(), n * n, "cost matrix must be n × n");
    if n == 0 {
        return Vec::new();
    }
    // 1-based bookkeeping; index 0 is the virtual root column.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut owner = vec![0usize; n + 1]; // owner[col] = row assigned to col
    let mut way = vec![0usize; n + 1];

    for row in 1..=n {
        owner[0] = row;
        let mut col0 = 0usize;
        let mut min_to = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[col0] = true;
            let r = owner[col0];
            let mut delta = f64::INFINITY;
            let mut col1 = 0usize;
            for col in 1..=n {
                if used[col] {
                    continue;
                }
                let reduced = cost[(r - 1) * n + (col - 1)] - u[r] - v[col];
                if reduced < min_to[col] {
                    min_to[col] = reduced;
                    way[col] = col0;
                }
                if min_to[col] < delta {
                    delta = min_to[col];
                    col1 = col;
                }
            }
            for col in 0..=n {
                if used[col] {
                    u[owner[col]] += delta;
                    v[col] -= delta;
                } else {
                    min_to[col] -= delta;
                }
            }
            col0 = col1;
            if owner[col0] == 0 {
                break;
            }
        }
        // augment along the alternating path
        loop {
            let prev = way[col0];
            owner[col0] = owner[prev];
            col0 = prev;
            if col0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![0usize; n];
    for col in 1..=n {
        assignment[owner[col] - 1] = col - 1;
    }
    assignment
}

#[cfg(test)]
mod tests {
    use super::*;

    fn total(cost: &[f64], n: usize, a: &[usize]) -> f64 {
        a.iter().enumerate().map(|(i, &j)| cost[i * n + j]).sum()
    }

    #[test]
    fn small_known_instances() {
        assert!(min_cost_assignment(&[], 0).is_empty());
        assert_eq!(min_cost_assignment(&[7.0], 1), vec![0]);
        let cost = [4.0, 1.0, 3.0, 2.0, 0.0, 5.0, 3.0, 2.0, 2.0];
        let a = min_cost_assignment(&cost, 3);
        assert_eq!(total(&cost, 3, &a), 5.0);
        // anti-diagonal optimum
        let cost = [9.0, 9.0, 1.0, 9.0, 1.0, 9.0, 1.0, 9.0, 9.0];
        assert_eq!(min_cost_assignment(&cost, 3), vec![2, 1, 0]);
    }

    #[test]
    fn result_is_a_permutation() {
        let n = 12;
        let cost: Vec<f64> = (0..n * n).map(|k| ((k * 7919) % 101) as f64 * 0.37).collect();
        let mut a = min_cost_assignment(&cost, n);
        a.sort_unstable();
        assert_eq!(a, (0..n).collect::<Vec<_>>());
    }
}
