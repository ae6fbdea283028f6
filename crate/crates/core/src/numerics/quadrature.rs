//! Gauss–Legendre grids: single-panel, composite and adaptively refined.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Default relative tolerance of adaptive refinement.
pub const DEFAULT_ADAPTIVE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Scheme {
    GaussLegendre {
        order: usize,
    },
    Composite {
        panels: usize,
        order: usize,
    },
    Adaptive {
        panels: usize,
        order: usize,
        tolerance: f64,
    },
}

/// Nodes and positive weights on a closed interval `[a, b]` with `a >= 0`.
///
/// Grids are immutable once built; all constructors guarantee strictly
/// increasing interior nodes and positive weights.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    domain: (f64, f64),
    scheme: Scheme,
}

impl QuadratureGrid {
    /// Single `order`-point Gauss–Legendre rule on `[a, b]`.
    pub fn gauss_legendre(order: usize, a: f64, b: f64) -> Result<Self> {
        check_domain(a, b)?;
        let (x, w) = legendre_rule(order)?;
        let mut grid = Self::empty(a, b, Scheme::GaussLegendre { order });
        grid.push_panel(&x, &w, a, b);
        Ok(grid)
    }

    /// `panels` equal sub-intervals, each with an `order`-point rule.
    pub fn composite(panels: usize, order: usize, a: f64, b: f64) -> Result<Self> {
        check_domain(a, b)?;
        if panels == 0 {
            return Err(domain(
                "QuadratureGrid::composite",
                "need at least one panel",
            ));
        }
        let breaks: Vec<f64> = (0..=panels)
            .map(|i| a + (b - a) * i as f64 / panels as f64)
            .collect();
        let mut grid = Self::from_breakpoints(&breaks, order)?;
        grid.scheme = Scheme::Composite { panels, order };
        Ok(grid)
    }

    /// One `order`-point panel between each pair of consecutive breakpoints.
    pub fn from_breakpoints(breaks: &[f64], order: usize) -> Result<Self> {
        if breaks.len() < 2 {
            return Err(domain(
                "QuadratureGrid::from_breakpoints",
                "need two breakpoints",
            ));
        }
        if breaks.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(domain(
                "QuadratureGrid::from_breakpoints",
                "breakpoints must be strictly increasing",
            ));
        }
        let (a, b) = (breaks[0], breaks[breaks.len() - 1]);
        check_domain(a, b)?;
        let (x, w) = legendre_rule(order)?;
        let mut grid = Self::empty(
            a,
            b,
            Scheme::Composite {
                panels: breaks.len() - 1,
                order,
            },
        );
        for p in breaks.windows(2) {
            grid.push_panel(&x, &w, p[0], p[1]);
        }
        Ok(grid)
    }

    /// Bisects panels of an `order`-point rule until the summed panel error
    /// estimates fall below `tol * |I|`. The resulting grid is tuned to `f`.
    pub fn adaptive<F: Fn(f64) -> f64>(
        f: F,
        a: f64,
        b: f64,
        order: usize,
        tol: f64,
    ) -> Result<Self> {
        check_domain(a, b)?;
        let (x, w) = legendre_rule(order)?;
        let panel = |lo: f64, hi: f64| -> Result<Panel> {
            let coarse = rule_sum(&f, &x, &w, lo, hi)?;
            let mid = 0.5 * (lo + hi);
            let fine = rule_sum(&f, &x, &w, lo, mid)? + rule_sum(&f, &x, &w, mid, hi)?;
            Ok(Panel {
                lo,
                hi,
                value: fine,
                err: (fine - coarse).abs(),
            })
        };

        const MAX_PANELS: usize = 20_000;
        let mut heap = BinaryHeap::new();
        heap.push(panel(a, b)?);
        loop {
            let total: f64 = heap.iter().map(|p| p.value).sum();
            let err: f64 = heap.iter().map(|p| p.err).sum();
            let scale = total
                .abs()
                .max(heap.iter().map(|p| p.value.abs()).sum::<f64>() * 1e-3);
            if err <= tol * scale || err < 1e-300 {
                break;
            }
            if heap.len() >= MAX_PANELS {
                return Err(Error::Convergence {
                    op: "QuadratureGrid::adaptive",
                    msg: format!("{MAX_PANELS} panels exhausted, error estimate {err:e}"),
                });
            }
            let worst = heap.pop().expect("non-empty heap");
            let mid = 0.5 * (worst.lo + worst.hi);
            heap.push(panel(worst.lo, mid)?);
            heap.push(panel(mid, worst.hi)?);
        }

        let mut panels: Vec<Panel> = heap.into_vec();
        panels.sort_by(|p, q| p.lo.total_cmp(&q.lo));
        let count = panels.len() * 2;
        let mut grid = Self::empty(
            a,
            b,
            Scheme::Adaptive {
                panels: count,
                order,
                tolerance: tol,
            },
        );
        for p in &panels {
            let mid = 0.5 * (p.lo + p.hi);
            grid.push_panel(&x, &w, p.lo, mid);
            grid.push_panel(&x, &w, mid, p.hi);
        }
        Ok(grid)
    }

    fn empty(a: f64, b: f64, scheme: Scheme) -> Self {
        Self {
            nodes: Vec::new(),
            weights: Vec::new(),
            domain: (a, b),
            scheme,
        }
    }

    fn push_panel(&mut self, x: &[f64], w: &[f64], lo: f64, hi: f64) {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        for (xi, wi) in x.iter().zip(w) {
            self.nodes.push(mid + half * xi);
            self.weights.push(half * wi);
        }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }
}

#[derive(Debug)]
struct Panel {
    lo: f64,
    hi: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn check_domain(a: f64, b: f64) -> Result<()> {
    if !(a.is_finite() && b.is_finite()) || a < 0.0 || b <= a {
        return Err(domain(
            "QuadratureGrid",
            format!("need finite 0 <= a < b, got [{a}, {b}]"),
        ));
    }
    Ok(())
}

fn rule_sum<F: Fn(f64) -> f64>(f: &F, x: &[f64], w: &[f64], lo: f64, hi: f64) -> Result<f64> {
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    let mut s = 0.0;
    for (xi, wi) in x.iter().zip(w) {
        let t = mid + half * xi;
        let v = f(t);
        if v.is_nan() {
            return Err(Error::Evaluation {
                op: "integrate",
                at: format!("{t}"),
            });
        }
        s += wi * v;
    }
    Ok(half * s)
}

/// Nodes (ascending) and weights of the `n`-point Gauss–Legendre rule on [-1, 1].
pub fn legendre_rule(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 || n > 4096 {
        return Err(domain(
            "legendre_rule",
            format!("order {n} outside 1..=4096"),
        ));
    }
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    let nf = n as f64;
    for i in 0..m {
        // Tricomi's initial guess, then Newton on P_n.
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() <= 1e-16 * z.abs().max(1.0) {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d.is_finite() {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    Ok((x, w))
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// `sum_i w_i f(x_i)`; NaN at any node is an evaluation error naming the node.
pub fn integrate<F: Fn(f64) -> f64>(f: F, grid: &QuadratureGrid) -> Result<f64> {
    let mut s = 0.0;
    for (x, w) in grid.iter() {
        let v = f(x);
        if v.is_nan() {
            return Err(Error::Evaluation {
                op: "integrate",
                at: format!("{x}"),
            });
        }
        s += w * v;
    }
    Ok(s)
}

/// Complex-valued counterpart of [`integrate`].
pub fn integrate_complex<F: Fn(f64) -> Complex64>(
    f: F,
    grid: &QuadratureGrid,
) -> Result<Complex64> {
    let mut s = Complex64::new(0.0, 0.0);
    for (x, w) in grid.iter() {
        let v = f(x);
        if v.re.is_nan() || v.im.is_nan() {
            return Err(Error::Evaluation {
                op: "integrate_complex",
                at: format!("{x}"),
            });
        }
        s += v * w;
    }
    Ok(s)
}

/// Adaptive integral of `f` over `[a, b]` to relative tolerance `tol`
/// (order-10 panels).
pub fn adaptive_integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    let grid = QuadratureGrid::adaptive(&f, a, b, 10, tol)?;
    integrate(&f, &grid)
}
