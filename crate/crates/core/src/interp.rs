//! Piecewise cubic Hermite interpolation on strictly increasing knots.

#[derive(Clone, Debug, PartialEq)]
pub struct CubicHermite {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InterpError {
    TooFewKnots,
    LengthMismatch,
    NotIncreasing,
}

fn check_knots(x: &[f64], y: &[f64]) -> Result<(), InterpError> {
    if x.len() < 2 {
        return Err(InterpError::TooFewKnots);
    }
    if x.len() != y.len() {
        return Err(InterpError::LengthMismatch);
    }
    if x.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(InterpError::NotIncreasing);
    }
    Ok(())
}

impl CubicHermite {
    /// Hermite interpolant through `(x_i, y_i)` with the given slopes.
    pub fn from_slopes(x: Vec<f64>, y: Vec<f64>, d: Vec<f64>) -> Result<Self, InterpError> {
        check_knots(&x, &y)?;
        if d.len() != x.len() {
            return Err(InterpError::LengthMismatch);
        }
        Ok(CubicHermite { x, y, d })
    }

    /// Fritsch–Carlson monotone interpolant: preserves monotonicity of the data.
    pub fn monotone(x: Vec<f64>, y: Vec<f64>) -> Result<Self, InterpError> {
        check_knots(&x, &y)?;
        let n = x.len();
        let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i])).collect();
        let mut d = vec![0.0; n];
        d[0] = delta[0];
        d[n - 1] = delta[n - 2];
        for i in 1..n - 1 {
            d[i] = if delta[i - 1] * delta[i] <= 0.0 {
                0.0
            } else {
                // weighted harmonic mean (Fritsch–Butland form)
                let h0 = x[i] - x[i - 1];
                let h1 = x[i + 1] - x[i];
                let w1 = 2.0 * h1 + h0;
                let w2 = h1 + 2.0 * h0;
                (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i])
            };
        }
        for i in 0..n - 1 {
            if delta[i] == 0.0 {
                d[i] = 0.0;
                d[i + 1] = 0.0;
                continue;
            }
            let a = d[i] / delta[i];
            let b = d[i + 1] / delta[i];
            let s = a * a + b * b;
            if s > 9.0 {
                let tau = 3.0 / s.sqrt();
                d[i] = tau * a * delta[i];
                d[i + 1] = tau * b * delta[i];
            }
        }
        Ok(CubicHermite { x, y, d })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], *self.x.last().unwrap())
    }

    fn segment(&self, t: f64) -> usize {
        match self.x.partition_point(|&v| v <= t) {
            0 => 0,
            k => (k - 1).min(self.x.len() - 2),
        }
    }

    /// Value and derivative at `t`; `None` outside the knot range.
    pub fn eval_with_derivative(&self, t: f64) -> Option<(f64, f64)> {
        let (lo, hi) = self.domain();
        if !(t >= lo && t <= hi) {
            return None;
        }
        let i = self.segment(t);
        let h = self.x[i + 1] - self.x[i];
        let u = (t - self.x[i]) / h;
        let (y0, y1, d0, d1) = (self.y[i], self.y[i + 1], self.d[i] * h, self.d[i + 1] * h);
        let u2 = u * u;
        let u3 = u2 * u;
        let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
        let h10 = u3 - 2.0 * u2 + u;
        let h01 = -2.0 * u3 + 3.0 * u2;
        let h11 = u3 - u2;
        let v = h00 * y0 + h10 * d0 + h01 * y1 + h11 * d1;
        let dv = ((6.0 * u2 - 6.0 * u) * y0
            + (3.0 * u2 - 4.0 * u + 1.0) * d0
            + (-6.0 * u2 + 6.0 * u) * y1
            + (3.0 * u2 - 2.0 * u) * d1)
            / h;
        Some((v, dv))
    }

    pub fn eval(&self, t: f64) -> Option<f64> {
        self.eval_with_derivative(t).map(|(v, _)| v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn reproduces_knots_and_cubics() {
        let x: Vec<f64> = vec![0.0, 0.3, 1.0, 1.7, 2.0];
        let f = |t: f64| t * t * t - t;
        let df = |t: f64| 3.0 * t * t - 1.0;
        let h =
            CubicHermite::from_slopes(x.clone(), x.iter().map(|&t| f(t)).collect(), x.iter().map(|&t| df(t)).collect())
                .unwrap();
        for t in [0.0, 0.1, 0.77, 1.3, 2.0] {
            let (v, d) = h.eval_with_derivative(t).unwrap();
            assert_relative_eq!(v, f(t), epsilon = 1e-13);
            assert_relative_eq!(d, df(t), epsilon = 1e-12);
        }
        assert!(h.eval(2.1).is_none());
    }

    #[test]
    fn monotone_data_stays_monotone() {
        let x = vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0];
        let y = vec![0.0, 0.0, 0.1, 5.0, 5.1, 5.1];
        let h = CubicHermite::monotone(x, y).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for k in 0..=500 {
            let v = h.eval(k as f64 / 100.0).unwrap();
            assert!(v >= prev - 1e-15);
            prev = v;
        }
    }

    #[test]
    fn rejects_bad_knots() {
        assert_eq!(CubicHermite::monotone(vec![0.0], vec![1.0]), Err(InterpError::TooFewKnots));
        assert_eq!(CubicHermite::monotone(vec![0.0, 0.0], vec![1.0, 2.0]), Err(InterpError::NotIncreasing));
    }
}
