//! Greedy distance-2 column coloring for finite-difference Jacobians.

/// Colors the columns of a sparse pattern so that no row contains two
/// columns of the same color. `rows[i]` lists the columns of row i.
/// Returns (color per column, number of colors).
pub fn distance2_coloring(n_cols: usize, rows: &[Vec<usize>]) -> (Vec<usize>, usize) {
    let mut rows_of_col = vec![Vec::new(); n_cols];
    for (i, r) in rows.iter().enumerate() {
        for &j in r {
            rows_of_col[j].push(i);
        }
    }
    let mut color = vec![usize::MAX; n_cols];
    let mut forbidden: Vec<usize> = Vec::new();
    let mut n_colors = 0;
    // largest-degree columns first tends to need fewer colors
    let mut order: Vec<usize> = (0..n_cols).collect();
    order.sort_by_key(|&j| std::cmp::Reverse(rows_of_col[j].len()));
    for j in order {
        forbidden.clear();
        for &i in &rows_of_col[j] {
            for &k in &rows[i] {
                if color[k] != usize::MAX {
                    forbidden.push(color[k]);
                }
            }
        }
        forbidden.sort_unstable();
        forbidden.dedup();
        let mut c = 0;
        for &f in &forbidden {
            if f == c {
                c += 1;
            } else if f > c {
                break;
            }
        }
        color[j] = c;
        n_colors = n_colors.max(c + 1);
    }
    (color, n_colors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn valid(rows: &[Vec<usize>], color: &[usize]) -> bool {
        rows.iter().all(|r| {
            let mut c: Vec<usize> = r.iter().map(|&j| color[j]).collect();
            c.sort_unstable();
            c.windows(2).all(|w| w[0] != w[1])
        })
    }

    #[test]
    fn tridiagonal_needs_three() {
        let n: usize = 10;
        let rows: Vec<Vec<usize>> = (0..n).map(|i| (i.saturating_sub(1)..(i + 2).min(n)).collect()).collect();
        let (color, k) = distance2_coloring(n, &rows);
        assert_eq!(k, 3);
        assert!(valid(&rows, &color));
    }

    proptest! {
        #[test]
        fn coloring_separates_each_row(pattern in proptest::collection::vec(proptest::collection::vec(0usize..30, 1..6), 1..40)) {
            let rows: Vec<Vec<usize>> = pattern.into_iter().map(|mut r| { r.sort_unstable(); r.dedup(); r }).collect();
            let (color, _) = distance2_coloring(30, &rows);
            prop_assert!(valid(&rows, &color));
        }
    }
}
