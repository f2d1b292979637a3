//! The symmetric smooth step ρ(x) = σ((x+1)/2) / (σ((x+1)/2) + σ((1−x)/2)),
//! σ(s) = exp(−1/s) for s > 0 and 0 otherwise.
//!
//! ρ = 0 on (−∞, −1], ρ = 1 on [1, ∞) and ρ(0) = 1/2. Values and first
//! derivatives use closed forms; higher derivatives use truncated Taylor
//! series arithmetic.

/// d(x) = 1/u − 1/v with u = (1+x)/2, v = (1−x)/2; ρ = 1/(1 + e^{d}).
#[inline]
fn exponent(x: f64) -> f64 {
    let u = 0.5 * (1.0 + x);
    let v = 0.5 * (1.0 - x);
    1.0 / u - 1.0 / v
}

#[inline]
fn logistic_neg(d: f64) -> f64 {
    if d > 0.0 {
        let e = (-d).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + d.exp())
    }
}

#[inline]
pub fn rho(x: f64) -> f64 {
    if x <= -1.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else if x == 0.0 {
        0.5
    } else {
        logistic_neg(exponent(x))
    }
}

#[inline]
pub fn rho_d1(x: f64) -> f64 {
    if x <= -1.0 || x >= 1.0 {
        return 0.0;
    }
    let u = 0.5 * (1.0 + x);
    let v = 0.5 * (1.0 - x);
    let r = rho(x);
    let s = 1.0 - r;
    if r == 0.0 || s == 0.0 {
        return 0.0;
    }
    r * s * (0.5 / (u * u) + 0.5 / (v * v))
}

/// Truncated Taylor coefficients c_i of f(x₀ + h) = Σ c_i hⁱ.
#[derive(Clone, Debug)]
struct Series(Vec<f64>);

impl Series {
    fn constant(c: f64, n: usize) -> Self {
        let mut v = vec![0.0; n + 1];
        v[0] = c;
        Series(v)
    }
    fn linear(c0: f64, c1: f64, n: usize) -> Self {
        let mut s = Series::constant(c0, n);
        if n >= 1 {
            s.0[1] = c1;
        }
        s
    }
    fn order(&self) -> usize {
        self.0.len() - 1
    }
    fn add(&self, o: &Series) -> Series {
        Series(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }
    fn sub(&self, o: &Series) -> Series {
        Series(self.0.iter().zip(&o.0).map(|(a, b)| a - b).collect())
    }
    fn neg(&self) -> Series {
        Series(self.0.iter().map(|a| -a).collect())
    }
    fn mul(&self, o: &Series) -> Series {
        let n = self.order();
        let mut out = vec![0.0; n + 1];
        for i in 0..=n {
            for j in 0..=n - i {
                out[i + j] += self.0[i] * o.0[j];
            }
        }
        Series(out)
    }
    fn recip(&self) -> Series {
        let n = self.order();
        let a = &self.0;
        let mut b = vec![0.0; n + 1];
        b[0] = 1.0 / a[0];
        for m in 1..=n {
            let s: f64 = (1..=m).map(|i| a[i] * b[m - i]).sum();
            b[m] = -s * b[0];
        }
        Series(b)
    }
    fn exp(&self) -> Series {
        let n = self.order();
        let a = &self.0;
        let mut e = vec![0.0; n + 1];
        e[0] = a[0].exp();
        for m in 1..=n {
            let s: f64 = (1..=m).map(|i| i as f64 * a[i] * e[m - i]).sum();
            e[m] = s / m as f64;
        }
        Series(e)
    }
}

/// [ρ(x), ρ'(x), …, ρ^{(order)}(x)].
pub fn rho_derivs(x: f64, order: usize) -> Vec<f64> {
    let mut out = vec![0.0; order + 1];
    if x <= -1.0 {
        return out;
    }
    if x >= 1.0 {
        out[0] = 1.0;
        return out;
    }
    let u = Series::linear(0.5 * (1.0 + x), 0.5, order);
    let v = Series::linear(0.5 * (1.0 - x), -0.5, order);
    let d = u.recip().sub(&v.recip());
    let one = Series::constant(1.0, order);
    let rho = if d.0[0] > 0.0 {
        let e = d.neg().exp();
        if e.0[0] == 0.0 {
            return out;
        }
        e.mul(&one.add(&e).recip())
    } else {
        let e = d.exp();
        if !e.0[0].is_finite() {
            out[0] = 1.0;
            return out;
        }
        one.add(&e).recip()
    };
    let mut fact = 1.0;
    for (i, c) in rho.0.iter().enumerate() {
        if i > 0 {
            fact *= i as f64;
        }
        out[i] = c * fact;
    }
    out
}

/// Sup of |ρ^{(r)}| over [−1, 1] by dense sampling.
pub fn rho_derivative_sup(r: usize, samples: usize) -> f64 {
    (0..=samples)
        .map(|i| -1.0 + 2.0 * i as f64 / samples as f64)
        .map(|x| rho_derivs(x, r)[r].abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoint_values_and_symmetry() {
        assert_eq!(rho(-1.0), 0.0);
        assert_eq!(rho(-3.0), 0.0);
        assert_eq!(rho(1.0), 1.0);
        assert_eq!(rho(0.0), 0.5);
        for i in 1..100 {
            let x = i as f64 / 100.0;
            assert!((rho(x) + rho(-x) - 1.0).abs() < 1e-15);
            assert!((rho_d1(x) - rho_d1(-x)).abs() < 1e-12);
        }
        // ρ'(0) = ρ(1−ρ)(1/(2u²)+1/(2v²)) = 1/4 · 4
        assert!((rho_d1(0.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn series_matches_closed_form_and_differences() {
        for i in -19..20 {
            let x = i as f64 / 20.0;
            let d = rho_derivs(x, 4);
            assert!((d[0] - rho(x)).abs() < 1e-14);
            assert!((d[1] - rho_d1(x)).abs() < 1e-12 * (1.0 + d[1].abs()));
            let h = 1e-5;
            for r in 1..4 {
                let fd = (rho_derivs(x + h, r - 1)[r - 1] - rho_derivs(x - h, r - 1)[r - 1]) / (2.0 * h);
                assert!((fd - d[r]).abs() < 1e-5 * (1.0 + d[r].abs()), "x={x} r={r} {fd} {}", d[r]);
            }
        }
    }
}
