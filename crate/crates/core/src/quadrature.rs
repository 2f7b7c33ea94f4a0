//! Adaptive Gauss–Kronrod (G7/K15) quadrature for complex vector integrands.

use crate::error::{Error, Result};
use num_complex::Complex64 as C64;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<const N: usize>(
    f: &mut dyn FnMut(f64) -> Result<[C64; N]>,
    a: f64,
    b: f64,
) -> Result<([C64; N], f64)> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut k = [C64::new(0.0, 0.0); N];
    let mut g = [C64::new(0.0, 0.0); N];
    let fc = f(c)?;
    for i in 0..N {
        k[i] = fc[i] * WGK[7];
        g[i] = fc[i] * WG[3];
    }
    for j in 0..7 {
        let x = h * XGK[j];
        let f1 = f(c - x)?;
        let f2 = f(c + x)?;
        for i in 0..N {
            let s = f1[i] + f2[i];
            k[i] += s * WGK[j];
            if j % 2 == 1 {
                g[i] += s * WG[j / 2];
            }
        }
    }
    let mut err = 0.0;
    for i in 0..N {
        k[i] *= h;
        g[i] *= h;
        err += (k[i] - g[i]).norm();
    }
    Ok((k, err))
}

/// `int_a^b f(t) dt` to absolute tolerance `tol`.
pub fn integrate<const N: usize>(
    mut f: impl FnMut(f64) -> Result<[C64; N]>,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<[C64; N]> {
    let mut stack = vec![(a, b, tol, 0u32)];
    let mut total = [C64::new(0.0, 0.0); N];
    while let Some((lo, hi, t, depth)) = stack.pop() {
        let (v, err) = gk15(&mut f, lo, hi)?;
        if err <= t || depth >= 40 || (hi - lo).abs() < 1e-14 * (a - b).abs() {
            if depth >= 40 && err > t {
                return Err(Error::NotConverged(format!(
                    "quadrature on [{lo}, {hi}] stalled with error {err:e}"
                )));
            }
            for i in 0..N {
                total[i] += v[i];
            }
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((mid, hi, 0.5 * t, depth + 1));
            stack.push((lo, mid, 0.5 * t, depth + 1));
        }
    }
    Ok(total)
}

/// `int phi(z) dz` along the straight segment from `p` to `q`.
pub fn segment_integral<const N: usize>(
    mut phi: impl FnMut(C64) -> Result<[C64; N]>,
    p: C64,
    q: C64,
    tol: f64,
) -> Result<[C64; N]> {
    let d = q - p;
    integrate(
        |t| {
            let v = phi(p + d * t)?;
            Ok(v.map(|x| x * d))
        },
        0.0,
        1.0,
        tol,
    )
}

/// Sum of [`segment_integral`] over consecutive polyline vertices.
pub fn path_integral<const N: usize>(
    mut phi: impl FnMut(C64) -> Result<[C64; N]>,
    path: &[C64],
    tol: f64,
) -> Result<[C64; N]> {
    let mut total = [C64::new(0.0, 0.0); N];
    let per = tol / path.len().max(2) as f64;
    for w in path.windows(2) {
        let v = segment_integral(&mut phi, w[0], w[1], per)?;
        for i in 0..N {
            total[i] += v[i];
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let v = integrate(|t| Ok([C64::new(t.powi(5), 0.0)]), 0.0, 2.0, 1e-12).unwrap();
        assert!((v[0].re - 64.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn residue_by_contour() {
        let n = 8;
        let path: Vec<C64> = (0..=n)
            .map(|k| C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / n as f64))
            .collect();
        let v = path_integral(|z| Ok([1.0 / z]), &path, 1e-11).unwrap();
        assert!((v[0] - C64::new(0.0, 2.0 * std::f64::consts::PI)).norm() < 1e-10);
    }

    #[test]
    fn peaked_integrand() {
        let v = integrate(|t| Ok([C64::new(1.0 / (1e-4 + t * t), 0.0)]), -1.0, 1.0, 1e-10).unwrap();
        let exact = 2.0 * (1.0f64 / 1e-2).atan() / 1e-2;
        assert!((v[0].re - exact).abs() < 1e-8);
    }
}
