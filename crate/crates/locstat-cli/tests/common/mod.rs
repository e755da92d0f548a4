//! Independent numerical oracles for the acceptance suite: adaptive
//! Simpson quadrature and a nested Gauss-Legendre orthant integrator for
//! small multivariate normal vectors. Nothing here touches the library's
//! special-function or sampling code paths.

/// Adaptive Simpson quadrature with absolute tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        m: f64,
        fm: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (left, lm, flm) = simpson(f, a, fa, m, fm);
        let (right, rm, frm) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, left, lm, flm, 0.5 * tol, depth - 1)
            + recurse(f, m, fm, b, fb, right, rm, frm, 0.5 * tol, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let (whole, m, fm) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, whole, m, fm, tol, 48)
}

/// ∫₀^L exp(−c·xᵝ) dx by adaptive quadrature; L = ∞ truncates where the
/// integrand falls below e⁻⁴⁵.
///
/// The head where c·xᵝ ≤ 1e-8 is summed analytically (two series terms at
/// full precision — the integrand has a cusp at 0 for β < 1), and the rest
/// is covered by geometric segments so slow-decay cases (β = 0.2 reaches
/// x ~ 1e14) stay cheap.
pub fn quad_regime_integral(c: f64, beta: f64, l: f64) -> f64 {
    let f = move |x: f64| (-c * x.powf(beta)).exp();
    let upper = if l.is_finite() { l } else { (45.0 / c).powf(1.0 / beta) };
    if upper <= 0.0 {
        return 0.0;
    }
    let x0 = (1e-8 / c).powf(1.0 / beta).min(upper);
    let mut total = x0 * (1.0 - c * x0.powf(beta) / (beta + 1.0));
    if x0 >= upper {
        return total;
    }
    // rough pass for the error budget
    let mut segments = Vec::new();
    let mut a = x0;
    while a < upper {
        let b = (a * 4.0).min(upper);
        segments.push((a, b));
        a = b;
    }
    let rough: f64 = total
        + segments
            .iter()
            .map(|&(a, b)| (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b)))
            .sum::<f64>();
    let tol = (rough.abs() * 1e-13 / segments.len() as f64).max(1e-300);
    for &(a, b) in &segments {
        total += adaptive_simpson(&f, a, b, tol);
    }
    total
}

/// 64-point Gauss-Legendre nodes and weights on [-1, 1], by Newton
/// iteration on the Legendre recurrence.
pub fn gauss_legendre_64() -> (Vec<f64>, Vec<f64>) {
    let n = 64usize;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0f64, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0f64, x);
        for k in 2..=n {
            let kf = k as f64;
            let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

pub fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Tabulated standard normal CDF on [-9, 9] (composite Simpson, step
/// 2·10⁻⁴, linear interpolation between nodes). Self-contained so the
/// orthant oracle never touches the library's special functions, and fast
/// enough for tens of millions of leaf lookups.
pub struct NormalCdfTable {
    lo: f64,
    step: f64,
    values: Vec<f64>,
}

impl NormalCdfTable {
    pub fn build() -> NormalCdfTable {
        let lo = -9.0;
        let hi = 9.0;
        let pairs = 45_000usize; // Simpson pairs; 2·pairs intervals
        let step = (hi - lo) / (2.0 * pairs as f64);
        let mut values = Vec::with_capacity(2 * pairs + 1);
        values.push(0.0); // Φ(-9) ≈ 1.1e-19, below table resolution
        let mut acc = 0.0;
        for k in 0..pairs {
            let a = lo + 2.0 * k as f64 * step;
            let (fa, fm, fb) =
                (normal_pdf(a), normal_pdf(a + step), normal_pdf(a + 2.0 * step));
            // first half by Simpson 3/8-free half-panel estimate
            acc += step / 6.0 * (fa + 4.0 * normal_pdf(a + 0.5 * step) + fm);
            values.push(acc);
            acc += step / 6.0 * (fm + 4.0 * normal_pdf(a + 1.5 * step) + fb);
            values.push(acc);
        }
        NormalCdfTable { lo, step, values }
    }

    pub fn cdf(&self, z: f64) -> f64 {
        if z <= self.lo {
            return 0.0;
        }
        let top = self.lo + self.step * (self.values.len() - 1) as f64;
        if z >= top {
            return 1.0;
        }
        let pos = (z - self.lo) / self.step;
        let idx = pos as usize;
        let frac = pos - idx as f64;
        self.values[idx] + frac * (self.values[idx + 1] - self.values[idx])
    }
}

/// P(max_i X_i > u) for X ~ N(0, L·Lᵀ), L lower-triangular of dimension
/// d ≤ 6, by exact recursive quadrature over the staircase region
/// {z : (Lz)_i ≤ u ∀i} — row i of L constrains exactly one new coordinate.
pub fn orthant_exceedance(l_factor: &[Vec<f64>], u: f64, cdf: &NormalCdfTable) -> f64 {
    let d = l_factor.len();
    assert!((1..=6).contains(&d), "oracle sized for d <= 6");
    let (nodes, weights) = gauss_legendre_64();

    fn layer(
        l: &[Vec<f64>],
        u: f64,
        level: usize,
        z: &mut Vec<f64>,
        nodes: &[f64],
        weights: &[f64],
        cdf: &NormalCdfTable,
    ) -> f64 {
        let d = l.len();
        let partial: f64 = (0..level).map(|j| l[level][j] * z[j]).sum();
        let bound = (u - partial) / l[level][level];
        if level == d - 1 {
            return cdf.cdf(bound);
        }
        let hi = bound.min(9.0);
        let lo = -9.0;
        if hi <= lo {
            return 0.0;
        }
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        let mut acc = 0.0;
        for (x, w) in nodes.iter().zip(weights) {
            let zi = mid + half * x;
            z.push(zi);
            let inner = layer(l, u, level + 1, z, nodes, weights, cdf);
            z.pop();
            acc += w * normal_pdf(zi) * inner;
        }
        acc * half
    }

    let mut z = Vec::with_capacity(d);
    1.0 - layer(l_factor, u, 0, &mut z, &nodes, &weights, cdf)
}

/// Plain Cholesky for the oracle side (independent of the library's
/// factorization); panics on non-PD input since callers construct PD
/// matrices by design.
pub fn cholesky_lower(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                l[i][j] = (a[i][i] - s).sqrt();
                assert!(l[i][j] > 0.0, "oracle matrix not PD");
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    l
}

/// Deterministic xorshift for oracle-side random numbers, so the
/// acceptance tests do not share the library's generators.
pub struct OracleRng(u64);

impl OracleRng {
    pub fn new(seed: u64) -> OracleRng {
        OracleRng(seed.max(1))
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.0 = x;
        x
    }

    /// Uniform in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn in_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }
}
