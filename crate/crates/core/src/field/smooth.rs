use super::ScalarField;

/// Sampled Gaussian on integer offsets `-R..=R`, `R = ceil(3 sigma)`,
/// normalized to unit sum. The returned vector has length `2R + 1`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    assert!(sigma > 0.0, "gaussian sigma must be positive");
    let radius = (3.0 * sigma).ceil() as i64;
    let denom = 2.0 * sigma * sigma;
    let mut k: Vec<f64> = (-radius..=radius)
        .map(|i| (-((i * i) as f64) / denom).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    k
}

/// Whole-sample symmetric reflection (`d c b a | a b c d | d c b a`).
#[inline]
fn reflect(i: i64, n: i64) -> usize {
    let period = 2 * n;
    let m = i.rem_euclid(period);
    (if m < n { m } else { period - 1 - m }) as usize
}

/// Convolve rows then columns with the same odd-length 1D kernel, using
/// reflective boundaries.
pub fn convolve_separable(f: &ScalarField, kernel: &[f64]) -> ScalarField {
    assert!(kernel.len() % 2 == 1, "kernel length must be odd");
    let (w, h) = f.dims();
    let r = (kernel.len() / 2) as i64;
    let (wi, hi) = (w as i64, h as i64);

    let mut tmp = vec![0.0; w * h];
    let mut row = vec![0.0; w + 2 * r as usize];
    for (src, dst) in f.data().chunks_exact(w).zip(tmp.chunks_exact_mut(w)) {
        for (j, slot) in row.iter_mut().enumerate() {
            *slot = src[reflect(j as i64 - r, wi)];
        }
        for (j, &k) in kernel.iter().enumerate() {
            for (d, &v) in dst.iter_mut().zip(&row[j..j + w]) {
                *d += k * v;
            }
        }
    }

    // column pass over whole rows so the inner loop is contiguous
    let mut out = vec![0.0; w * h];
    for (y, dst) in out.chunks_exact_mut(w).enumerate() {
        for (j, &k) in kernel.iter().enumerate() {
            let sy = reflect(y as i64 + j as i64 - r, hi);
            for (d, &v) in dst.iter_mut().zip(&tmp[sy * w..(sy + 1) * w]) {
                *d += k * v;
            }
        }
    }
    ScalarField::from_vec(w, h, out).expect("dimensions preserved")
}

pub fn gaussian_smooth(f: &ScalarField, sigma: f64) -> ScalarField {
    convolve_separable(f, &gaussian_kernel(sigma))
}
