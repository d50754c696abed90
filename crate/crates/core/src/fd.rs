//! Finite-difference weights on arbitrary grids (Fornberg's recursion).

/// Weights `c[k][j]` such that `f^{(k)}(z) ≈ Σ_j c[k][j] f(x_j)` for `k ≤ max_order`.
pub fn fornberg_weights(z: f64, x: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let npts = x.len();
    let mut c = vec![vec![0.0; npts]; max_order + 1];
    if npts == 0 {
        return c;
    }
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..npts {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Start index of a `width`-point stencil around node `i`, shifted inward at the ends.
pub fn stencil_start(i: usize, len: usize, width: usize) -> usize {
    let half = width / 2;
    i.saturating_sub(half).min(len - width)
}

/// `order`-th derivative of sampled data at every node using `width`-point stencils.
///
/// Returns `None` when there are fewer than `width` samples.
pub fn derivative(x: &[f64], y: &[f64], order: usize, width: usize) -> Option<Vec<f64>> {
    let len = x.len();
    if len < width || width <= order || y.len() != len {
        return None;
    }
    Some(
        (0..len)
            .map(|i| {
                let lo = stencil_start(i, len, width);
                let w = fornberg_weights(x[i], &x[lo..lo + width], order);
                w[order].iter().zip(&y[lo..lo + width]).map(|(c, v)| c * v).sum()
            })
            .collect(),
    )
}

/// As [`derivative`] for data even about `x[0] = 0`: points are mirrored to
/// keep centred stencils at the origin.
pub fn derivative_even(x: &[f64], y: &[f64], order: usize, width: usize) -> Option<Vec<f64>> {
    let len = x.len();
    if len < width || width <= order || y.len() != len || x[0] != 0.0 {
        return None;
    }
    let ghosts = (width / 2).min(len - 1);
    let mut xe: Vec<f64> = (1..=ghosts).rev().map(|i| -x[i]).collect();
    let mut ye: Vec<f64> = (1..=ghosts).rev().map(|i| y[i]).collect();
    xe.extend_from_slice(x);
    ye.extend_from_slice(y);
    let full = derivative(&xe, &ye, order, width)?;
    Some(full[ghosts..].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn classic_central_weights() {
        let w = fornberg_weights(0.0, &[-1.0, 0.0, 1.0], 2);
        assert_relative_eq!(w[1][0], -0.5);
        assert_relative_eq!(w[1][2], 0.5);
        assert_relative_eq!(w[2][0], 1.0);
        assert_relative_eq!(w[2][1], -2.0);
        let w = fornberg_weights(0.0, &[-2.0, -1.0, 0.0, 1.0, 2.0], 1);
        assert_relative_eq!(w[1][0], 1.0 / 12.0, epsilon = 1e-15);
        assert_relative_eq!(w[1][1], -2.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn exact_on_polynomials_nonuniform() {
        let x = [0.0, 0.13, 0.4, 0.55, 1.1];
        let y: Vec<f64> = x.iter().map(|&t: &f64| 1.0 + 2.0 * t - t.powi(3) + 0.5 * t.powi(4)).collect();
        let d1 = derivative(&x, &y, 1, 5).unwrap();
        let d2 = derivative(&x, &y, 2, 5).unwrap();
        for (i, t) in x.iter().enumerate() {
            assert_relative_eq!(d1[i], 2.0 - 3.0 * t * t + 2.0 * t.powi(3), epsilon = 1e-11);
            assert_relative_eq!(d2[i], -6.0 * t + 6.0 * t * t, epsilon = 1e-10);
        }
    }

    #[test]
    fn even_extension_is_exact_for_even_polynomials() {
        let x: Vec<f64> = (0..12).map(|i| 0.1 * i as f64).collect();
        let y: Vec<f64> = x.iter().map(|t| 1.0 - t * t + 0.25 * t.powi(4)).collect();
        let d2 = derivative_even(&x, &y, 2, 7).unwrap();
        for (i, t) in x.iter().enumerate() {
            assert_relative_eq!(d2[i], -2.0 + 3.0 * t * t, epsilon = 1e-9);
        }
    }

    #[test]
    fn too_few_points() {
        assert!(derivative(&[0.0, 1.0], &[0.0, 1.0], 1, 3).is_none());
    }
}
