//! Dense linear assignment by shortest augmenting paths with dual potentials
//! (the Jonker–Volgenant scheme, one Dijkstra-like search per row).

use crate::error::{Error, Result};

/// Optimal assignment of an `n × n` row-major cost matrix.
#[derive(Clone, Debug)]
pub struct Assignment {
    /// `row_to_col[i]` is the column assigned to row `i`.
    pub row_to_col: Vec<usize>,
    pub total_cost: f64,
}

const NONE: usize = usize::MAX;

pub fn solve(cost: &[f64], n: usize) -> Result<Assignment> {
    if cost.len() != n * n {
        return Err(Error::SizeMismatch(format!("cost matrix has {} entries, expected {}", cost.len(), n * n)));
    }
    if cost.iter().any(|c| !c.is_finite()) {
        return Err(Error::NonFinite("assignment cost matrix".into()));
    }
    let mut u = vec![0.0f64; n];
    let mut v = vec![0.0f64; n];
    let mut col4row = vec![NONE; n];
    let mut row4col = vec![NONE; n];
    let mut shortest = vec![f64::INFINITY; n];
    let mut path = vec![NONE; n];
    let mut scanned_rows = vec![false; n];
    let mut scanned_cols = vec![false; n];
    let mut remaining: Vec<usize> = Vec::with_capacity(n);

    for cur_row in 0..n {
        shortest.fill(f64::INFINITY);
        path.fill(NONE);
        scanned_rows.fill(false);
        scanned_cols.fill(false);
        remaining.clear();
        remaining.extend((0..n).rev());

        let mut min_val = 0.0f64;
        let mut i = cur_row;
        let sink = loop {
            scanned_rows[i] = true;
            let row = &cost[i * n..(i + 1) * n];
            let mut lowest = f64::INFINITY;
            let mut index = NONE;
            for (it, &j) in remaining.iter().enumerate() {
                let r = min_val + row[j] - u[i] - v[j];
                if r < shortest[j] {
                    path[j] = i;
                    shortest[j] = r;
                }
                if shortest[j] < lowest || (shortest[j] == lowest && row4col[j] == NONE) {
                    lowest = shortest[j];
                    index = it;
                }
            }
            if index == NONE || !lowest.is_finite() {
                return Err(Error::NonFinite("assignment search diverged".into()));
            }
            min_val = lowest;
            let j = remaining.swap_remove(index);
            scanned_cols[j] = true;
            if row4col[j] == NONE {
                break j;
            }
            i = row4col[j];
        };

        u[cur_row] += min_val;
        for r in 0..n {
            if scanned_rows[r] && r != cur_row {
                u[r] += min_val - shortest[col4row[r]];
            }
        }
        for c in 0..n {
            if scanned_cols[c] {
                v[c] -= min_val - shortest[c];
            }
        }

        let mut j = sink;
        loop {
            let r = path[j];
            row4col[j] = r;
            std::mem::swap(&mut col4row[r], &mut j);
            if r == cur_row {
                break;
            }
        }
    }

    let total_cost = col4row.iter().enumerate().map(|(i, &j)| cost[i * n + j]).sum();
    Ok(Assignment { row_to_col: col4row, total_cost })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_known_instance() {
        let c = [4.0, 1.0, 3.0, 2.0, 0.0, 5.0, 3.0, 2.0, 2.0];
        let a = solve(&c, 3).unwrap();
        assert_eq!(a.total_cost, 5.0);
        assert_eq!(a.row_to_col, vec![1, 0, 2]);
    }

    #[test]
    fn handles_ties_and_zero_matrix() {
        let a = solve(&[0.0; 16], 4).unwrap();
        let mut cols = a.row_to_col.clone();
        cols.sort_unstable();
        assert_eq!(cols, vec![0, 1, 2, 3]);
        assert_eq!(a.total_cost, 0.0);
    }

    #[test]
    fn empty_problem() {
        let a = solve(&[], 0).unwrap();
        assert!(a.row_to_col.is_empty());
    }
}
