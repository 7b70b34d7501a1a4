//! Shared numerical utilities: quadrature rules, stable reductions, smooth steps.

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            // Legendre recurrence
            let mut p0 = 1.0;
            let mut p1 = 0.0;
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j as f64 + 1.0) * z * p1 - j as f64 * p2) / (j as f64 + 1.0);
            }
            pp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / pp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * pp * pp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Gauss-Legendre rule mapped to [a, b].
pub fn gauss_legendre_ab(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    (
        x.iter().map(|&t| mid + half * t).collect(),
        w.iter().map(|&v| half * v).collect(),
    )
}

/// Tanh-sinh (double-exponential) rule on [a, b]; robust for endpoint log singularities.
pub fn tanh_sinh_ab(level: u32, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let h = 1.0 / f64::from(1u32 << level);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut xs = Vec::new();
    let mut ws = Vec::new();
    let kmax = (4.0 / h).ceil() as i64;
    for k in -kmax..=kmax {
        let t = k as f64 * h;
        let u = std::f64::consts::FRAC_PI_2 * t.sinh();
        let x = u.tanh();
        let dx = std::f64::consts::FRAC_PI_2 * t.cosh() / u.cosh().powi(2);
        if 1.0 - x.abs() < 1e-17 {
            continue;
        }
        xs.push(mid + half * x);
        ws.push(half * h * dx);
    }
    (xs, ws)
}

/// log(sum(exp(v))) with max shift; NEG_INFINITY-safe.
pub fn log_sum_exp(v: &[f64]) -> f64 {
    let mx = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !mx.is_finite() {
        return mx;
    }
    let s: f64 = v.iter().map(|&x| (x - mx).exp()).sum();
    mx + s.ln()
}

/// Deterministic pairwise (tree) summation; result is independent of thread count
/// as long as the slice order is fixed.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        2 => v[0] + v[1],
        n if n <= 32 => v.iter().sum(),
        n => {
            let (a, b) = v.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

/// C^6 polynomial step: 0 for t <= 0, 1 for t >= 1 (regularized incomplete beta I_t(7,7)).
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let s = 1.0 - t;
    // sum_{j=7}^{13} C(13,j) t^j (1-t)^(13-j)
    let c = [1716.0, 1287.0, 715.0, 286.0, 78.0, 13.0, 1.0];
    let mut acc = 0.0;
    let mut tj = t.powi(7);
    let mut sk = s.powi(6);
    for ci in c {
        acc += ci * tj * sk;
        tj *= t;
        if sk > 0.0 {
            sk /= s;
        }
    }
    acc
}

/// Double-double arithmetic (~31 significant digits) for the extended-precision
/// Gram/Cholesky path.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    pub fn from(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    fn two_sum(a: f64, b: f64) -> (f64, f64) {
        let s = a + b;
        let bb = s - a;
        (s, (a - (s - bb)) + (b - bb))
    }

    fn two_prod(a: f64, b: f64) -> (f64, f64) {
        let p = a * b;
        (p, a.mul_add(b, -p))
    }

    pub fn add(self, other: Dd) -> Dd {
        let (s, e) = Dd::two_sum(self.hi, other.hi);
        let e = e + self.lo + other.lo;
        let (hi, lo) = Dd::two_sum(s, e);
        Dd { hi, lo }
    }

    pub fn sub(self, other: Dd) -> Dd {
        self.add(Dd {
            hi: -other.hi,
            lo: -other.lo,
        })
    }

    pub fn mul(self, other: Dd) -> Dd {
        let (p, e) = Dd::two_prod(self.hi, other.hi);
        let e = e + self.hi * other.lo + self.lo * other.hi;
        let (hi, lo) = Dd::two_sum(p, e);
        Dd { hi, lo }
    }

    pub fn div(self, other: Dd) -> Dd {
        let q1 = self.hi / other.hi;
        let r = self.sub(other.mul(Dd::from(q1)));
        let q2 = r.hi / other.hi;
        let (hi, lo) = Dd::two_sum(q1, q2);
        Dd { hi, lo }
    }

    pub fn sqrt(self) -> Dd {
        if self.hi <= 0.0 {
            return Dd::from(self.hi.sqrt());
        }
        let q = self.hi.sqrt();
        // one Newton step: q + (self - q^2)/(2q)
        let r = self.sub(Dd::from(q).mul(Dd::from(q)));
        let corr = r.hi / (2.0 * q);
        let (hi, lo) = Dd::two_sum(q, corr);
        Dd { hi, lo }
    }
}

/// Complex double-double, enough for Hermitian Gram accumulation and Cholesky.
#[derive(Clone, Copy, Debug, Default)]
pub struct CDd {
    pub re: Dd,
    pub im: Dd,
}

impl CDd {
    pub const ZERO: CDd = CDd {
        re: Dd::ZERO,
        im: Dd::ZERO,
    };

    pub fn from_f64(re: f64, im: f64) -> CDd {
        CDd {
            re: Dd::from(re),
            im: Dd::from(im),
        }
    }

    pub fn add(self, o: CDd) -> CDd {
        CDd {
            re: self.re.add(o.re),
            im: self.im.add(o.im),
        }
    }

    pub fn sub(self, o: CDd) -> CDd {
        CDd {
            re: self.re.sub(o.re),
            im: self.im.sub(o.im),
        }
    }

    pub fn mul(self, o: CDd) -> CDd {
        CDd {
            re: self.re.mul(o.re).sub(self.im.mul(o.im)),
            im: self.re.mul(o.im).add(self.im.mul(o.re)),
        }
    }

    pub fn conj(self) -> CDd {
        CDd {
            re: self.re,
            im: Dd {
                hi: -self.im.hi,
                lo: -self.im.lo,
            },
        }
    }

    pub fn scale(self, s: Dd) -> CDd {
        CDd {
            re: self.re.mul(s),
            im: self.im.mul(s),
        }
    }

    pub fn norm_sqr(self) -> Dd {
        self.re.mul(self.re).add(self.im.mul(self.im))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre_ab(8, 0.0, 1.0);
        // degree up to 2n-1 = 15 exact
        for k in 0..=15u32 {
            let s: f64 = x.iter().zip(&w).map(|(&xi, &wi)| wi * xi.powi(k as i32)).sum();
            assert_abs_diff_eq!(s, 1.0 / (k as f64 + 1.0), epsilon = 1e-13);
        }
    }

    #[test]
    fn tanh_sinh_handles_log_endpoint() {
        // int_0^1 ln(x) dx = -1
        let (x, w) = tanh_sinh_ab(6, 0.0, 1.0);
        let s: f64 = x.iter().zip(&w).map(|(&xi, &wi)| wi * xi.ln()).sum();
        assert_abs_diff_eq!(s, -1.0, epsilon = 1e-12);
    }

    #[test]
    fn log_sum_exp_matches_direct_and_survives_overflow() {
        let v = [1234.0, 1232.0];
        assert_abs_diff_eq!(log_sum_exp(&v), 1234.0 + (1.0 + (-2.0f64).exp()).ln(), epsilon = 1e-12);
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY, f64::NEG_INFINITY]), f64::NEG_INFINITY);
    }

    #[test]
    fn smooth_step_boundary_and_symmetry() {
        assert_eq!(smooth_step(-0.1), 0.0);
        assert_eq!(smooth_step(1.1), 1.0);
        for t in [0.1, 0.3, 0.5, 0.77] {
            assert_abs_diff_eq!(smooth_step(t) + smooth_step(1.0 - t), 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn dd_recovers_lost_bits() {
        let a = Dd::from(1.0).add(Dd::from(1e-25));
        assert!(a.sub(Dd::from(1.0)).to_f64() == 1e-25);
        let r = Dd::from(2.0).sqrt();
        let err = r.mul(r).sub(Dd::from(2.0)).to_f64();
        assert!(err.abs() < 1e-30);
    }

    #[test]
    fn pairwise_sum_matches_kahan_scale() {
        let v: Vec<f64> = (0..100_000).map(|i| (i as f64 * 0.7).sin()).collect();
        let p = pairwise_sum(&v);
        let mut exact = Dd::ZERO;
        for &x in &v {
            exact = exact.add(Dd::from(x));
        }
        assert!((p - exact.to_f64()).abs() < 1e-9);
    }
}
