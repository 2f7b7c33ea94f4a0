//! Truncated power series kernels shared by [`crate::jet`] and [`crate::laurent`].
//! All slices hold Taylor coefficients `c[k]` of `sum c[k] t^k`.

use num_complex::Complex64 as C64;

pub(crate) fn mul(a: &[C64], b: &[C64]) -> Vec<C64> {
    let n = a.len().min(b.len());
    (0..n)
        .map(|k| (0..=k).map(|j| a[j] * b[k - j]).sum())
        .collect()
}

/// `a / b`; caller guarantees `b[0] != 0`.
pub(crate) fn div(a: &[C64], b: &[C64]) -> Vec<C64> {
    let n = a.len().min(b.len());
    let mut c = Vec::with_capacity(n);
    for k in 0..n {
        let mut s = a[k];
        for j in 1..=k {
            s -= b[j] * c[k - j];
        }
        c.push(s / b[0]);
    }
    c
}

/// `a^mu` with the constant term supplied by the caller (it fixes the branch).
pub(crate) fn powf(a: &[C64], mu: f64, c0: C64) -> Vec<C64> {
    let n = a.len();
    let mut c = Vec::with_capacity(n);
    if n == 0 {
        return c;
    }
    c.push(c0);
    for k in 1..n {
        let mut s = C64::new(0.0, 0.0);
        for j in 1..=k {
            s += a[j] * c[k - j] * (mu * j as f64 - (k - j) as f64);
        }
        c.push(s / (a[0] * k as f64));
    }
    c
}

/// Integer power by repeated squaring; exact for `a[0] == 0` when `n >= 0`.
pub(crate) fn powi(a: &[C64], n: i32) -> Option<Vec<C64>> {
    let len = a.len();
    let mut one = vec![C64::new(0.0, 0.0); len];
    if len > 0 {
        one[0] = C64::new(1.0, 0.0);
    }
    let mut base = a.to_vec();
    let mut e = n.unsigned_abs();
    let mut acc = one.clone();
    while e > 0 {
        if e & 1 == 1 {
            acc = mul(&acc, &base);
        }
        e >>= 1;
        if e > 0 {
            base = mul(&base, &base);
        }
    }
    if n < 0 {
        if acc.first().map_or(true, |c| *c == C64::new(0.0, 0.0)) {
            return None;
        }
        Some(div(&one, &acc))
    } else {
        Some(acc)
    }
}

/// `log a` with the constant term supplied by the caller.
pub(crate) fn ln(a: &[C64], c0: C64) -> Vec<C64> {
    let n = a.len();
    let mut c = Vec::with_capacity(n);
    if n == 0 {
        return c;
    }
    c.push(c0);
    for k in 1..n {
        let mut s = a[k] * k as f64;
        for j in 1..k {
            s -= c[j] * a[k - j] * j as f64;
        }
        c.push(s / (a[0] * k as f64));
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn geometric_series_by_division() {
        let one = vec![c(1.0), c(0.0), c(0.0), c(0.0)];
        let d = vec![c(1.0), c(-1.0), c(0.0), c(0.0)];
        assert_eq!(div(&one, &d), vec![c(1.0); 4]);
    }

    #[test]
    fn sqrt_of_one_plus_t() {
        let a = vec![c(1.0), c(1.0), c(0.0), c(0.0)];
        let s = powf(&a, 0.5, c(1.0));
        assert!((s[1] - c(0.5)).norm() < 1e-15);
        assert!((s[2] - c(-0.125)).norm() < 1e-15);
        assert!((s[3] - c(0.0625)).norm() < 1e-15);
    }

    #[test]
    fn log_of_one_plus_t() {
        let a = vec![c(1.0), c(1.0), c(0.0), c(0.0), c(0.0)];
        let l = ln(&a, c(0.0));
        let want = [0.0, 1.0, -0.5, 1.0 / 3.0, -0.25];
        for (x, w) in l.iter().zip(want) {
            assert!((x - c(w)).norm() < 1e-15);
        }
    }

    #[test]
    fn negative_integer_power() {
        let a = vec![c(2.0), c(1.0), c(0.0)];
        let p = powi(&a, -2).unwrap();
        let back = mul(&p, &mul(&a, &a));
        assert!((back[0] - c(1.0)).norm() < 1e-15);
        assert!(back[1].norm() < 1e-15 && back[2].norm() < 1e-15);
        assert!(powi(&[c(0.0), c(1.0)], -1).is_none());
    }
}
