//! Adaptive Gauss–Legendre quadrature with interval bisection.
//!
//! The integrator keeps a list of panels, each carrying a whole-panel and a
//! two-halves estimate; the panel with the largest discrepancy is bisected
//! until the summed discrepancy meets `max(abs, rel·|I|)`. Break points let
//! callers split at known non-smooth or strongly oscillating locations
//! (constraint nodes, slit edges).

use num_complex::Complex64;

/// Values that can be accumulated by the integrator.
pub trait QuadValue: Clone {
    fn zero_like(&self) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn scale(&self, f: f64) -> Self;
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero_like(&self) -> Self {
        0.0
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn scale(&self, f: f64) -> Self {
        self * f
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero_like(&self) -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn scale(&self, f: f64) -> Self {
        self * f
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

impl<T: QuadValue> QuadValue for Vec<T> {
    fn zero_like(&self) -> Self {
        self.iter().map(QuadValue::zero_like).collect()
    }
    fn add(&self, o: &Self) -> Self {
        self.iter().zip(o).map(|(a, b)| a.add(b)).collect()
    }
    fn sub(&self, o: &Self) -> Self {
        self.iter().zip(o).map(|(a, b)| a.sub(b)).collect()
    }
    fn scale(&self, f: f64) -> Self {
        self.iter().map(|a| a.scale(f)).collect()
    }
    // max-norm: every component must meet the tolerance
    fn magnitude(&self) -> f64 {
        self.iter().map(QuadValue::magnitude).fold(0.0, f64::max)
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre order must be positive");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (mid + half * x, half * w))
    }

    pub fn integrate<T: QuadValue, F: FnMut(f64) -> T>(&self, a: f64, b: f64, f: &mut F) -> T {
        let mut it = self.mapped(a, b);
        let (x0, w0) = it.next().expect("nonempty rule");
        let mut acc = f(x0).scale(w0);
        for (x, w) in it {
            acc = acc.add(&f(x).scale(w));
        }
        acc
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub fn relative(rel: f64) -> Self {
        Tolerance { abs: 0.0, rel }
    }

    pub fn new(abs: f64, rel: f64) -> Self {
        Tolerance { abs, rel }
    }
}

#[derive(Debug, Clone)]
pub struct QuadOutput<T> {
    pub value: T,
    pub error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

struct Panel<T> {
    a: f64,
    b: f64,
    left: T,
    right: T,
    err: f64,
}

/// Adaptive integrator configuration.
#[derive(Debug, Clone)]
pub struct Adaptive {
    rule: GaussLegendre,
    pub max_panels: usize,
}

impl Default for Adaptive {
    fn default() -> Self {
        Adaptive {
            rule: GaussLegendre::new(16),
            max_panels: 4000,
        }
    }
}

impl Adaptive {
    pub fn with_order(order: usize) -> Self {
        Adaptive {
            rule: GaussLegendre::new(order),
            ..Default::default()
        }
    }

    /// Integrate `f` over `[breaks[0], breaks[last]]`, starting from the
    /// panels delimited by `breaks` (sorted, at least two entries).
    pub fn integrate<T, F>(&self, mut f: F, breaks: &[f64], tol: Tolerance) -> QuadOutput<T>
    where
        T: QuadValue,
        F: FnMut(f64) -> T,
    {
        assert!(breaks.len() >= 2, "need at least one interval");
        let mut evaluations = 0usize;
        let mut make = |a: f64, b: f64, whole: Option<T>, f: &mut F| -> Panel<T> {
            let m = 0.5 * (a + b);
            let whole = whole.unwrap_or_else(|| {
                evaluations += self.rule.order();
                self.rule.integrate(a, b, f)
            });
            let left = self.rule.integrate(a, m, f);
            let right = self.rule.integrate(m, b, f);
            evaluations += 2 * self.rule.order();
            let err = whole.sub(&left.add(&right)).magnitude();
            Panel { a, b, left, right, err }
        };

        let mut panels: Vec<Panel<T>> = breaks
            .windows(2)
            .filter(|w| w[1] > w[0])
            .map(|w| make(w[0], w[1], None, &mut f))
            .collect();
        if panels.is_empty() {
            let z = f(breaks[0]).zero_like();
            return QuadOutput {
                value: z,
                error: 0.0,
                evaluations: 1,
                converged: true,
            };
        }

        let total = |panels: &[Panel<T>]| {
            let mut acc = panels[0].left.add(&panels[0].right);
            for p in &panels[1..] {
                acc = acc.add(&p.left).add(&p.right);
            }
            acc
        };
        let mut converged = false;
        loop {
            let err: f64 = panels.iter().map(|p| p.err).sum();
            let value = total(&panels);
            let target = tol.abs.max(tol.rel * value.magnitude());
            if err <= target {
                converged = true;
                break;
            }
            if panels.len() >= self.max_panels {
                break;
            }
            let (worst, _) =
                panels.iter().enumerate().fold(
                    (0, f64::NEG_INFINITY),
                    |acc, (i, p)| if p.err > acc.1 { (i, p.err) } else { acc },
                );
            let p = panels.swap_remove(worst);
            let m = 0.5 * (p.a + p.b);
            if !(m > p.a && m < p.b) {
                // panel collapsed to floating-point resolution
                panels.push(Panel { err: 0.0, ..p });
                continue;
            }
            let l = make(p.a, m, Some(p.left), &mut f);
            let r = make(m, p.b, Some(p.right), &mut f);
            panels.push(l);
            panels.push(r);
        }
        panels.sort_by(|x, y| x.a.total_cmp(&y.a));
        QuadOutput {
            value: total(&panels),
            error: panels.iter().map(|p| p.err).sum(),
            evaluations,
            converged,
        }
    }
}

/// One-shot adaptive integration with the default rule.
pub fn integrate<T, F>(f: F, a: f64, b: f64, tol: Tolerance) -> QuadOutput<T>
where
    T: QuadValue,
    F: FnMut(f64) -> T,
{
    Adaptive::default().integrate(f, &[a, b], tol)
}

/// Sorted, deduplicated break list for `[a, b]` including the interior
/// `points` that fall strictly inside.
pub fn breaks_with(a: f64, b: f64, points: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut v = vec![a, b];
    v.extend(points.into_iter().filter(|&x| x > a && x < b));
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}
