//! Shifted orthonormal Legendre polynomials on `[0, 1]`, Gauss–Legendre
//! quadrature, and the Brownian bridge covariance kernel.

use crate::error::{Error, Result};

/// Default truncation degree of the LP expansion.
pub const DEFAULT_MAX_DEGREE: usize = 10;

/// Default number of quadrature nodes cached in a [`LegendreBasis`].
pub const DEFAULT_QUADRATURE_POINTS: usize = 128;

fn check_unit(routine: &'static str, u: f64) -> Result<()> {
    if (0.0..=1.0).contains(&u) {
        Ok(())
    } else {
        Err(Error::domain(routine, u, "0 <= u <= 1"))
    }
}

/// `Leg_j(u) = √(2j+1) · P_j(2u − 1)`.
pub fn legendre_eval(j: usize, u: f64) -> Result<f64> {
    check_unit("legendre_eval", u)?;
    Ok(leg_unchecked(j, u))
}

/// `(Leg_1(u), …, Leg_M(u))`.
pub fn legendre_vector(max_degree: usize, u: f64) -> Result<Vec<f64>> {
    check_unit("legendre_vector", u)?;
    let mut out = vec![0.0; max_degree];
    fill_leg(u, &mut out);
    Ok(out)
}

pub(crate) fn leg_unchecked(j: usize, u: f64) -> f64 {
    let x = 2.0 * u - 1.0;
    if j == 0 {
        return 1.0;
    }
    let (mut p_prev, mut p) = (1.0, x);
    for n in 1..j {
        let nf = n as f64;
        let next = ((2.0 * nf + 1.0) * x * p - nf * p_prev) / (nf + 1.0);
        p_prev = p;
        p = next;
    }
    ((2 * j + 1) as f64).sqrt() * p
}

/// Writes `Leg_1(u) .. Leg_{out.len()}(u)` into `out`. Same recurrence as
/// [`leg_unchecked`], so results agree bitwise.
pub(crate) fn fill_leg(u: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    let x = 2.0 * u - 1.0;
    let (mut p_prev, mut p) = (1.0, x);
    out[0] = 3f64.sqrt() * p;
    for (n, slot) in out.iter_mut().enumerate().skip(1) {
        let nf = n as f64;
        let next = ((2.0 * nf + 1.0) * x * p - nf * p_prev) / (nf + 1.0);
        p_prev = p;
        p = next;
        *slot = ((2 * n + 3) as f64).sqrt() * p;
    }
}

/// Gauss–Legendre rule mapped to `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds an `n`-point rule by Newton iteration on the Legendre recurrence.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "quadrature needs at least one node".into(),
            ));
        }
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            let mut converged = false;
            for _ in 0..100 {
                let (p, d) = legendre_and_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-15 {
                    converged = true;
                    let (_, d) = legendre_and_derivative(n, x);
                    dp = d;
                    break;
                }
            }
            if !converged {
                return Err(Error::NoConvergence {
                    routine: "gauss_legendre",
                    iterations: 100,
                });
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            // map [-1, 1] -> [0, 1]
            nodes[i] = 0.5 * (1.0 - x);
            nodes[n - 1 - i] = 0.5 * (1.0 + x);
            weights[i] = 0.5 * w;
            weights[n - 1 - i] = 0.5 * w;
        }
        Ok(Self { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `∫_a^b f(t) dt`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = b - a;
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(a + half * t))
            .sum::<f64>()
            * half
    }

    /// Like [`integrate`](Self::integrate) but for fallible integrands.
    pub fn try_integrate<F: FnMut(f64) -> Result<f64>>(
        &self,
        a: f64,
        b: f64,
        mut f: F,
    ) -> Result<f64> {
        let half = b - a;
        let mut acc = 0.0;
        for (&t, &w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(a + half * t)?;
        }
        Ok(acc * half)
    }
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let p = if n == 0 { 1.0 } else { p1 };
    let dp = nf * (x * p - p0) / (x * x - 1.0);
    (p, dp)
}

/// Shifted orthonormal Legendre basis up to a fixed degree, with a cached
/// quadrature rule.
#[derive(Debug, Clone)]
pub struct LegendreBasis {
    max_degree: usize,
    quadrature: GaussLegendre,
}

impl LegendreBasis {
    pub fn new(max_degree: usize) -> Result<Self> {
        Self::with_quadrature(max_degree, DEFAULT_QUADRATURE_POINTS)
    }

    pub fn with_quadrature(max_degree: usize, points: usize) -> Result<Self> {
        if max_degree == 0 {
            return Err(Error::InvalidArgument("max_degree must be positive".into()));
        }
        Ok(Self {
            max_degree,
            quadrature: GaussLegendre::new(points)?,
        })
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn quadrature(&self) -> &GaussLegendre {
        &self.quadrature
    }

    pub fn eval(&self, j: usize, u: f64) -> Result<f64> {
        legendre_eval(j, u)
    }

    pub fn vector(&self, u: f64) -> Result<Vec<f64>> {
        legendre_vector(self.max_degree, u)
    }

    /// Gram matrix `∫ Leg_j Leg_k` for `0 ≤ j, k ≤ max_degree`.
    pub fn gram_matrix(&self) -> Vec<Vec<f64>> {
        let m = self.max_degree;
        let mut gram = vec![vec![0.0; m + 1]; m + 1];
        let mut row = vec![0.0; m];
        for (&t, &w) in self
            .quadrature
            .nodes()
            .iter()
            .zip(self.quadrature.weights())
        {
            fill_leg(t, &mut row);
            let value = |j: usize| if j == 0 { 1.0 } else { row[j - 1] };
            for (j, gram_row) in gram.iter_mut().enumerate() {
                for (k, cell) in gram_row.iter_mut().enumerate() {
                    *cell += w * value(j) * value(k);
                }
            }
        }
        gram
    }
}

impl Default for LegendreBasis {
    fn default() -> Self {
        Self::new(DEFAULT_MAX_DEGREE).expect("default basis parameters are valid")
    }
}

/// Brownian bridge covariance `min(u, v) − uv`.
pub fn bb_kernel(u: f64, v: f64) -> Result<f64> {
    check_unit("bb_kernel", u)?;
    check_unit("bb_kernel", v)?;
    Ok(u.min(v) - u * v)
}

/// Evaluates `⟨K(u,·), φ⟩ = ∫₀¹ ∂ₜK(u,t) φ′(t) dt` in the Brownian bridge
/// RKHS, whose value reproduces `φ(u)` for any `φ` vanishing at 0 and 1.
///
/// `∂ₜK(u,t)` jumps at `t = u`, so each side gets its own Gauss rule.
pub fn rkhs_reproduce_check<F, D>(
    u: f64,
    value: F,
    derivative: D,
    quadrature_points: usize,
) -> Result<f64>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::domain("rkhs_reproduce_check", u, "0 < u < 1"));
    }
    if quadrature_points < 64 {
        return Err(Error::InvalidArgument(format!(
            "rkhs_reproduce_check needs at least 64 quadrature points, got {quadrature_points}"
        )));
    }
    let (at0, at1) = (value(0.0), value(1.0));
    if at0.abs() > 1e-12 || at1.abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "test function must vanish at 0 and 1 (got {at0}, {at1})"
        )));
    }
    let rule = GaussLegendre::new(quadrature_points)?;
    let left = rule.integrate(0.0, u, &derivative);
    let right = rule.integrate(u, 1.0, &derivative);
    Ok((1.0 - u) * left - u * right)
}
