//! Independent reference values. Nothing here touches the surface samplers
//! or the extension engine, so they can referee both.

use std::f64::consts::PI;

/// J0 by Miller's backward recurrence, normalized with
/// J0 + 2 (J2 + J4 + ...) = 1.
pub fn bessel_j0(z: f64) -> f64 {
    let z = z.abs();
    if z < 1e-8 {
        return 1.0 - 0.25 * z * z;
    }
    let mut start = (z + 30.0 + 4.0 * z.sqrt()) as usize;
    start += start % 2;
    let mut j_next = 0.0;
    let mut j_cur = 1e-30;
    let mut norm = 0.0;
    let mut j0 = 0.0;
    for n in (1..=start).rev() {
        let j_prev = 2.0 * n as f64 / z * j_cur - j_next;
        j_next = j_cur;
        j_cur = j_prev;
        // j_cur now holds J_{n-1}
        let m = n - 1;
        if m == 0 {
            j0 = j_cur;
            norm += j_cur;
        } else if m % 2 == 0 {
            norm += 2.0 * j_cur;
        }
        if j_cur.abs() > 1e250 {
            j_cur *= 1e-250;
            j_next *= 1e-250;
            norm *= 1e-250;
        }
    }
    j0 / norm
}

/// Power series; accurate for small arguments only.
pub fn bessel_j0_series(z: f64) -> f64 {
    let q = 0.25 * z * z;
    let mut term = 1.0;
    let mut sum = 1.0;
    for m in 1..200 {
        term *= -q / (m as f64 * m as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// Hankel asymptotic expansion, useful for large arguments.
pub fn bessel_j0_asymptotic(z: f64) -> f64 {
    let z = z.abs();
    let mut p = 0.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let e = 8.0 * z;
    for k in 0..12 {
        if k % 2 == 0 {
            p += if (k / 2) % 2 == 0 { term } else { -term };
        } else {
            q += if (k / 2) % 2 == 0 { term } else { -term };
        }
        let a = (2 * k + 1) as f64;
        term *= a * a / ((k + 1) as f64 * e);
    }
    let chi = z - 0.25 * PI;
    (2.0 / (PI * z)).sqrt() * (p * chi.cos() + q * chi.sin())
}

/// Extension of the unit circle arc-length measure at radius |x|.
pub fn circle_extension(r: f64) -> f64 {
    2.0 * PI * bessel_j0(2.0 * PI * r)
}

/// Lorentz (alpha, beta) norm of an indicator of measure m under the
/// rearrangement normalization.
pub fn indicator_lorentz_norm(m: f64, alpha: f64, beta: f64) -> f64 {
    if beta.is_infinite() {
        m.powf(1.0 / alpha)
    } else {
        (alpha / beta).powf(1.0 / beta) * m.powf(1.0 / alpha)
    }
}

/// Babenko-Beckner constant for the one-dimensional Fourier transform
/// from L^p to L^p'.
pub fn babenko_beckner(p: f64) -> f64 {
    let pp = p / (p - 1.0);
    (p.powf(1.0 / p) / pp.powf(1.0 / pp)).sqrt()
}
