//! Dense Hungarian algorithm (shortest augmenting paths with potentials),
//! used here for maximum-weight bipartite assignment.

/// Maximum total weight of a matching in a non-negative `rows x cols` weight
/// matrix. Rectangular inputs are padded with zero-weight dummies, so the
/// result is the best partial matching.
pub(crate) fn max_weight(weights: &[Vec<f64>]) -> f64 {
    let rows = weights.len();
    let cols = weights.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return 0.0;
    }
    let n = rows.max(cols);
    let weight = |i: usize, j: usize| -> f64 {
        if i < rows && j < cols {
            weights[i][j]
        } else {
            0.0
        }
    };

    // 1-based arrays; column 0 is the virtual root
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = -weight(i0 - 1, j - 1) - u[i0] - v[j];
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
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    (1..=n)
        .filter(|&j| owner[j] > 0)
        .map(|j| weight(owner[j] - 1, j - 1))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(w: &[Vec<f64>], row: usize, used: &mut Vec<bool>) -> f64 {
        if row == w.len() {
            return 0.0;
        }
        let mut best = brute(w, row + 1, used);
        for j in 0..w[row].len() {
            if !used[j] {
                used[j] = true;
                best = best.max(w[row][j] + brute(w, row + 1, used));
                used[j] = false;
            }
        }
        best
    }

    #[test]
    fn classic_instance() {
        let w = vec![vec![0.9, 0.8], vec![0.85, 0.1]];
        // crossed: 0.8 + 0.85 beats greedy 0.9 + 0.1
        assert!((max_weight(&w) - 1.65).abs() < 1e-12);
    }

    #[test]
    fn rectangular_and_empty() {
        assert_eq!(max_weight(&[]), 0.0);
        let w = vec![vec![0.1, 0.7, 0.3]];
        assert!((max_weight(&w) - 0.7).abs() < 1e-12);
        let w = vec![vec![0.2], vec![0.5], vec![0.0]];
        assert!((max_weight(&w) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn agrees_with_enumeration() {
        let mut state = 0x2545_f491_4f6c_dd1du64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..300 {
            let r = 1 + (next() * 6.0) as usize;
            let c = 1 + (next() * 6.0) as usize;
            let w: Vec<Vec<f64>> = (0..r)
                .map(|_| (0..c).map(|_| if next() < 0.4 { 0.0 } else { next() }).collect())
                .collect();
            let expected = brute(&w, 0, &mut vec![false; c]);
            assert!((max_weight(&w) - expected).abs() < 1e-9);
        }
    }
}
