use super::sparse::SymSparse;
use crate::error::{Error, Result};
use nalgebra::DMatrix;
use serde::Serialize;

/// Counts of negative, zero (within the band) and positive eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Inertia {
    pub negative: usize,
    pub zero: usize,
    pub positive: usize,
    /// Number of factorizations retried with a perturbed shift.
    pub retries: u32,
}

/// Relative width of the band counted as zero.
pub const ZERO_BAND: f64 = 1e-9;
/// Systems up to this size use the dense pivoted factorization.
pub const DENSE_LIMIT: usize = 600;

/// `L D L^T` in envelope (skyline) storage under a fixed ordering.
#[derive(Debug, Clone)]
pub struct Skyline {
    perm: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    /// Row `i` holds `L[i][first_i..i]` (unit diagonal implied).
    l: Vec<f64>,
    pub d: Vec<f64>,
}

impl Skyline {
    /// Factors `a + shift I` with rows ordered by `perm` (`perm[new] = old`).
    /// A pivot below `tiny` in magnitude is a breakdown.
    pub fn factor(a: &SymSparse, perm: &[usize], shift: f64, tiny: f64) -> Result<Skyline> {
        let n = a.n;
        let mut inv = vec![0; n];
        for (k, &i) in perm.iter().enumerate() {
            inv[i] = k;
        }
        let first: Vec<usize> = perm
            .iter()
            .enumerate()
            .map(|(k, &i)| a.row(i).map(|(j, _)| inv[j]).filter(|&m| m <= k).min().unwrap_or(k))
            .collect();
        let mut start = Vec::with_capacity(n + 1);
        start.push(0);
        for k in 0..n {
            start.push(start[k] + (k - first[k]));
        }
        let mut l = vec![0.0; start[n]];
        let mut d = vec![0.0; n];
        let mut row = Vec::new();
        for i in 0..n {
            let fi = first[i];
            row.clear();
            row.resize(i - fi + 1, 0.0);
            for (j, v) in a.row(perm[i]) {
                let m = inv[j];
                if m >= fi && m <= i {
                    row[m - fi] += v;
                }
            }
            row[i - fi] += shift;
            // row[j - fi] becomes w_ij = l_ij d_j.
            for j in fi..i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let lj = &l[start[j] + (k0 - fj)..start[j] + (j - fj)];
                let wi = &row[k0 - fi..j - fi];
                let s: f64 = wi.iter().zip(lj).map(|(a, b)| a * b).sum();
                row[j - fi] -= s;
            }
            let mut dsum = 0.0;
            let li = &mut l[start[i]..start[i + 1]];
            for j in fi..i {
                let w = row[j - fi];
                let lij = w / d[j];
                dsum += w * lij;
                li[j - fi] = lij;
            }
            let di = row[i - fi] - dsum;
            if !di.is_finite() || di.abs() <= tiny {
                return Err(Error::FactorizationBreakdown { row: i, shift });
            }
            d[i] = di;
        }
        Ok(Skyline {
            perm: perm.to_vec(),
            first,
            start,
            l,
            d,
        })
    }

    pub fn negative_pivots(&self) -> usize {
        self.d.iter().filter(|x| **x < 0.0).count()
    }

    /// Solves `(A + shift I) x = b` in the original numbering.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.d.len();
        let mut y: Vec<f64> = self.perm.iter().map(|&i| b[i]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let li = &self.l[self.start[i]..self.start[i + 1]];
            let s: f64 = li.iter().zip(&y[fi..i]).map(|(a, b)| a * b).sum();
            y[i] -= s;
        }
        for i in 0..n {
            y[i] /= self.d[i];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let yi = y[i];
            let li = &self.l[self.start[i]..self.start[i + 1]];
            for (k, lk) in li.iter().enumerate() {
                y[fi + k] -= lk * yi;
            }
        }
        let mut x = vec![0.0; n];
        for (k, &i) in self.perm.iter().enumerate() {
            x[i] = y[k];
        }
        x
    }

    pub fn storage(&self) -> usize {
        self.l.len()
    }
}

/// Inertia of a dense symmetric matrix by Bunch-Kaufman pivoting:
/// `(negative, zero, positive)` pivots, where `|pivot| <= tiny` counts as zero.
pub fn bunch_kaufman_inertia(m: &DMatrix<f64>, tiny: f64) -> (usize, usize, usize) {
    let n = m.nrows();
    let mut a = m.clone();
    let alpha = (1.0 + 17f64.sqrt()) / 8.0;
    let (mut neg, mut zero, mut pos) = (0, 0, 0);
    let mut count = |x: f64| {
        if x.abs() <= tiny {
            zero += 1;
        } else if x < 0.0 {
            neg += 1;
        } else {
            pos += 1;
        }
    };
    let swap = |a: &mut DMatrix<f64>, i: usize, j: usize| {
        if i != j {
            a.swap_rows(i, j);
            a.swap_columns(i, j);
        }
    };
    let mut k = 0;
    while k < n {
        let akk = a[(k, k)].abs();
        let (mut r, mut lam) = (k, 0.0);
        for i in k + 1..n {
            if a[(i, k)].abs() > lam {
                lam = a[(i, k)].abs();
                r = i;
            }
        }
        if lam == 0.0 {
            count(a[(k, k)]);
            k += 1;
            continue;
        }
        let two_by_two = if akk >= alpha * lam {
            false
        } else {
            let sig = (k..n).filter(|&j| j != r).map(|j| a[(j, r)].abs()).fold(0.0, f64::max);
            if akk * sig >= alpha * lam * lam {
                false
            } else if a[(r, r)].abs() >= alpha * sig {
                swap(&mut a, k, r);
                false
            } else {
                swap(&mut a, k + 1, r);
                true
            }
        };
        if !two_by_two {
            let d = a[(k, k)];
            count(d);
            if d != 0.0 {
                for i in k + 1..n {
                    let f = a[(i, k)] / d;
                    if f != 0.0 {
                        for j in k + 1..n {
                            a[(i, j)] -= f * a[(k, j)];
                        }
                    }
                }
            }
            k += 1;
        } else {
            let (e11, e12, e22) = (a[(k, k)], a[(k + 1, k)], a[(k + 1, k + 1)]);
            let det = e11 * e22 - e12 * e12;
            let tr = e11 + e22;
            // Eigenvalues of the 2x2 block.
            let disc = ((e11 - e22).powi(2) + 4.0 * e12 * e12).sqrt();
            count(0.5 * (tr - disc));
            count(0.5 * (tr + disc));
            let _ = det;
            let (i11, i12, i22) = (e22 / det, -e12 / det, e11 / det);
            for i in k + 2..n {
                let (c1, c2) = (a[(i, k)], a[(i, k + 1)]);
                let f1 = c1 * i11 + c2 * i12;
                let f2 = c1 * i12 + c2 * i22;
                for j in k + 2..n {
                    a[(i, j)] -= f1 * a[(k, j)] + f2 * a[(k + 1, j)];
                }
            }
            k += 2;
        }
    }
    (neg, zero, pos)
}

/// Number of eigenvalues of `a` below `-shift`: negative pivots of
/// `a + shift I`. Retries with a slightly larger shift on breakdown.
fn count_below(a: &SymSparse, perm: &[usize], shift: f64, norm: f64, retries: &mut u32) -> Result<usize> {
    let tiny = 1e-14 * norm.max(f64::MIN_POSITIVE);
    if a.n <= DENSE_LIMIT {
        let mut m = a.to_dense();
        for i in 0..a.n {
            m[(i, i)] += shift;
        }
        return Ok(bunch_kaufman_inertia(&m, 0.0).0);
    }
    let mut s = shift;
    for attempt in 0..6 {
        match Skyline::factor(a, perm, s, tiny) {
            Ok(f) => return Ok(f.negative_pivots()),
            Err(Error::FactorizationBreakdown { .. }) => {
                *retries += 1;
                s = shift + 1e-11 * norm * (attempt + 1) as f64;
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::FactorizationBreakdown { row: 0, shift: s })
}

/// Inertia of `a` with eigenvalues in `[-eps, eps]`, `eps = ZERO_BAND ||a||`,
/// counted as zero. Uses two shifted factorizations and Sylvester's law.
pub fn inertia(a: &SymSparse, perm: &[usize]) -> Result<Inertia> {
    let norm = a.norm_inf();
    let eps = ZERO_BAND * norm;
    let mut retries = 0;
    let below_minus = count_below(a, perm, eps, norm, &mut retries)?;
    let below_plus = count_below(a, perm, -eps, norm, &mut retries)?;
    if below_plus < below_minus {
        return Err(Error::AssemblyError(
            "inconsistent shifted factorizations".into(),
        ));
    }
    Ok(Inertia {
        negative: below_minus,
        zero: below_plus - below_minus,
        positive: a.n - below_plus,
        retries,
    })
}

/// Reference inertia from a dense symmetric eigendecomposition.
pub fn inertia_dense_oracle(a: &SymSparse) -> Inertia {
    let eps = ZERO_BAND * a.norm_inf();
    let ev = a.to_dense().symmetric_eigenvalues();
    Inertia {
        negative: ev.iter().filter(|x| **x < -eps).count(),
        zero: ev.iter().filter(|x| x.abs() <= eps).count(),
        positive: ev.iter().filter(|x| **x > eps).count(),
        retries: 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::sparse::rcm;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// 2D grid Laplacian minus `c` times identity.
    fn shifted_grid(nx: usize, c: f64) -> SymSparse {
        let id = |i: usize, j: usize| i * nx + j;
        let mut t = Vec::new();
        for i in 0..nx {
            for j in 0..nx {
                t.push((id(i, j), id(i, j), 4.0 - c));
                if i + 1 < nx {
                    t.push((id(i + 1, j), id(i, j), -1.0));
                }
                if j + 1 < nx {
                    t.push((id(i, j + 1), id(i, j), -1.0));
                }
            }
        }
        SymSparse::from_triplets(nx * nx, &t)
    }

    #[test]
    fn skyline_matches_eigen_oracle() {
        for c in [0.3, 1.1, 2.5] {
            let a = shifted_grid(30, c);
            let all = vec![true; a.n];
            let p = rcm(&a, &all);
            let f = Skyline::factor(&a, &p, 0.0, 1e-14).unwrap();
            assert_eq!(f.negative_pivots(), inertia_dense_oracle(&a).negative, "c={c}");
        }
    }

    #[test]
    fn skyline_solves() {
        let a = shifted_grid(12, -0.5);
        let all = vec![true; a.n];
        let p = rcm(&a, &all);
        let f = Skyline::factor(&a, &p, 0.0, 1e-14).unwrap();
        let b: Vec<f64> = (0..a.n).map(|i| (i as f64).sin()).collect();
        let x = f.solve(&b);
        let r = a.mul_vec(&x);
        assert!(r.iter().zip(&b).all(|(u, v)| (u - v).abs() < 1e-12));
    }

    #[test]
    fn bunch_kaufman_on_random_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [1, 2, 5, 17, 40] {
            let m = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            let m = &m + m.transpose();
            let ev = m.clone().symmetric_eigenvalues();
            let (neg, zero, pos) = bunch_kaufman_inertia(&m, 0.0);
            assert_eq!(neg, ev.iter().filter(|x| **x < 0.0).count());
            assert_eq!(zero + pos, n - neg);
        }
        // Zero diagonal forces 2x2 pivots.
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert_eq!(bunch_kaufman_inertia(&m, 0.0), (1, 0, 1));
    }

    #[test]
    fn zero_band_detects_null_space() {
        // Periodic path Laplacian: one zero eigenvalue.
        let n = 700;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            t.push(((i + 1) % n, i, -1.0));
        }
        let a = SymSparse::from_triplets(n, &t);
        let all = vec![true; n];
        let r = inertia(&a, &rcm(&a, &all)).unwrap();
        assert_eq!((r.negative, r.zero, r.positive), (0, 1, n - 1));
    }
}
