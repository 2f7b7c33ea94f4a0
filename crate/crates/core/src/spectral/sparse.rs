use std::collections::VecDeque;

/// Symmetric sparse matrix with both triangles stored in CSR form.
#[derive(Debug, Clone, PartialEq)]
pub struct SymSparse {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col: Vec<usize>,
    pub val: Vec<f64>,
}

impl SymSparse {
    /// Builds from upper-or-lower triplets; duplicates are summed in input
    /// order, so equal inputs give bitwise equal matrices.
    pub fn from_triplets(n: usize, trip: &[(usize, usize, f64)]) -> SymSparse {
        let mut full: Vec<(usize, usize, f64)> = Vec::with_capacity(2 * trip.len());
        for &(i, j, v) in trip {
            full.push((i, j, v));
            if i != j {
                full.push((j, i, v));
            }
        }
        full.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0; n + 1];
        let mut col = Vec::new();
        let mut val: Vec<f64> = Vec::new();
        let mut last = None;
        for (i, j, v) in full {
            if last == Some((i, j)) {
                *val.last_mut().unwrap() += v;
            } else {
                col.push(j);
                val.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        SymSparse {
            n,
            row_ptr,
            col,
            val,
        }
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (self.col[k], self.val[k]))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = &self.col[self.row_ptr[i]..self.row_ptr[i + 1]];
        r.binary_search(&j)
            .map(|k| self.val[self.row_ptr[i] + k])
            .unwrap_or(0.0)
    }

    pub fn nnz(&self) -> usize {
        self.col.len()
    }

    /// Infinity norm (max absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).map(|(j, v)| v * x[j]).sum())
            .collect()
    }

    /// `self + s * other` (other may have a different pattern).
    pub fn add_scaled(&self, s: f64, other: &SymSparse) -> SymSparse {
        let mut trip = Vec::with_capacity(self.nnz() + other.nnz());
        for (m, f) in [(self, 1.0), (other, s)] {
            for i in 0..m.n {
                for (j, v) in m.row(i) {
                    if j <= i {
                        trip.push((i, j, f * v));
                    }
                }
            }
        }
        SymSparse::from_triplets(self.n, &trip)
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut d = nalgebra::DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                d[(i, j)] = v;
            }
        }
        d
    }

    /// Principal submatrix on `keep` (in that order).
    pub fn submatrix(&self, keep: &[usize]) -> SymSparse {
        let mut map = vec![usize::MAX; self.n];
        for (k, &i) in keep.iter().enumerate() {
            map[i] = k;
        }
        let mut trip = Vec::new();
        for (k, &i) in keep.iter().enumerate() {
            for (j, v) in self.row(i) {
                let m = map[j];
                if m != usize::MAX && m <= k {
                    trip.push((k, m, v));
                }
            }
        }
        SymSparse::from_triplets(keep.len(), &trip)
    }
}

/// BFS from `start` within `mask`: visit order and the level of each node.
fn bfs_levels(a: &SymSparse, start: usize, mask: &[bool]) -> (Vec<usize>, Vec<usize>) {
    let mut level = vec![usize::MAX; a.n];
    let mut order = vec![start];
    level[start] = 0;
    let mut head = 0;
    while head < order.len() {
        let i = order[head];
        head += 1;
        for (j, _) in a.row(i) {
            if mask[j] && level[j] == usize::MAX {
                level[j] = level[i] + 1;
                order.push(j);
            }
        }
    }
    (order, level)
}

/// Reverse Cuthill-McKee ordering of the vertices selected by `mask`,
/// component by component, each from a pseudo-peripheral start.
pub fn rcm(a: &SymSparse, mask: &[bool]) -> Vec<usize> {
    let deg: Vec<usize> = (0..a.n)
        .map(|i| a.row(i).filter(|(j, _)| mask[*j] && *j != i).count())
        .collect();
    let mut seen = vec![false; a.n];
    let mut out = Vec::new();
    for root in 0..a.n {
        if !mask[root] || seen[root] {
            continue;
        }
        let mut start = root;
        let (mut order, mut level) = bfs_levels(a, start, mask);
        let mut depth = level[*order.last().unwrap()];
        for _ in 0..8 {
            let cand = order
                .iter()
                .rev()
                .take_while(|&&i| level[i] == depth)
                .copied()
                .min_by_key(|&i| (deg[i], i))
                .unwrap_or(start);
            let (o2, l2) = bfs_levels(a, cand, mask);
            let d2 = l2[*o2.last().unwrap()];
            if d2 <= depth {
                break;
            }
            start = cand;
            depth = d2;
            order = o2;
            level = l2;
        }
        let mut q = VecDeque::from([start]);
        seen[start] = true;
        let mut local = Vec::new();
        while let Some(i) = q.pop_front() {
            local.push(i);
            let mut nb: Vec<usize> = a
                .row(i)
                .map(|(j, _)| j)
                .filter(|&j| mask[j] && !seen[j])
                .collect();
            nb.sort_by_key(|&j| (deg[j], j));
            for j in nb {
                seen[j] = true;
                q.push_back(j);
            }
        }
        local.reverse();
        out.extend(local);
    }
    out
}

/// Envelope size `sum_i (i - first_i)` of `a` under the ordering `perm`
/// (`perm[new] = old`).
pub fn profile(a: &SymSparse, perm: &[usize]) -> usize {
    let mut inv = vec![0; a.n];
    for (k, &i) in perm.iter().enumerate() {
        inv[i] = k;
    }
    perm.iter()
        .enumerate()
        .map(|(k, &i)| k - a.row(i).map(|(j, _)| inv[j]).filter(|&m| m <= k).min().unwrap_or(k))
        .sum()
}
