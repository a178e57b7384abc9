//! Rectangular computational domain, boundary partition, and quadrature.
//!
//! The domain is the open rectangle (0, L) x (0, H). Its boundary is
//! split into three segments:
//!
//! * inlet  {x = 0}         — Dirichlet (free-stream temperature goes here),
//! * outlet {x = L}         — homogeneous Neumann in x (dθ/dx = 0),
//! * walls  {y = 0, y = H}  — Dirichlet (heated-wall temperature).
//!
//! Corners are assigned to the adjacent Dirichlet segment; the two
//! corners shared by the inlet and a wall belong to the inlet, the two
//! shared by the outlet and a wall belong to the wall.
//!
//! Integration uses composite Gauss-Legendre panels on a tensor grid,
//! which integrates the trigonometric eigenfunction products of this
//! solver to near machine precision at modest node counts.

use crate::error::{Error, Result};

/// Boundary segment tags under the corner convention above.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Segment {
    /// {x = 0}, including the corners (0,0) and (0,H).
    Inlet,
    /// {x = L}, corners excluded.
    Outlet,
    /// {y = 0} and {y = H} for 0 < x <= L.
    Wall,
    /// Strictly inside the rectangle.
    Interior,
}

impl std::fmt::Display for Segment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Segment::Inlet => "inlet",
            Segment::Outlet => "outlet",
            Segment::Wall => "wall",
            Segment::Interior => "interior",
        };
        f.write_str(s)
    }
}

/// Axis-aligned rectangular domain with per-axis quadrature resolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    /// Extent in x.
    pub length: f64,
    /// Extent in y.
    pub height: f64,
    /// Requested quadrature nodes along x (rounded up to a panel multiple).
    pub nx: usize,
    /// Requested quadrature nodes along y.
    pub ny: usize,
}

impl Domain {
    pub fn new(length: f64, height: f64, nx: usize, ny: usize) -> Result<Self> {
        if length <= 0.0 || !length.is_finite() {
            return Err(Error::InvalidParameter {
                name: "domain.L",
                reason: format!("must be positive and finite, got {length}"),
            });
        }
        if height <= 0.0 || !height.is_finite() {
            return Err(Error::InvalidParameter {
                name: "domain.H",
                reason: format!("must be positive and finite, got {height}"),
            });
        }
        if nx < 4 || ny < 4 {
            return Err(Error::InvalidParameter {
                name: "domain.nx/ny",
                reason: format!("need at least 4 nodes per axis, got {nx} x {ny}"),
            });
        }
        Ok(Self {
            length,
            height,
            nx,
            ny,
        })
    }

    /// Unit square with the given resolution; the default test geometry.
    pub fn unit(n: usize) -> Self {
        Self::new(1.0, 1.0, n, n).expect("unit domain is valid")
    }

    pub fn area(&self) -> f64 {
        self.length * self.height
    }

    /// Classifies a point of the closed rectangle into its boundary
    /// segment (or interior). Points outside the closure are an error.
    pub fn classify(&self, x: f64, y: f64) -> Result<Segment> {
        if x < 0.0 || x > self.length || y < 0.0 || y > self.height {
            return Err(Error::OutsideDomain {
                x,
                y,
                length: self.length,
                height: self.height,
            });
        }
        // Order encodes the corner convention: inlet wins at x = 0,
        // walls win at x = L.
        if x == 0.0 {
            Ok(Segment::Inlet)
        } else if y == 0.0 || y == self.height {
            Ok(Segment::Wall)
        } else if x == self.length {
            Ok(Segment::Outlet)
        } else {
            Ok(Segment::Interior)
        }
    }

    /// Tensor-product Gauss-Legendre quadrature over the rectangle.
    pub fn grid(&self) -> QuadratureGrid {
        QuadratureGrid::build(self)
    }
}

/// 8-point Gauss-Legendre rule on [-1, 1].
const GL8_NODES: [f64; 8] = [
    -0.960_289_856_497_536_2,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_2,
];
const GL8_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_26,
    0.222_381_034_453_374_47,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_47,
    0.101_228_536_290_376_26,
];

/// Panel order of the composite rule.
pub const PANEL_ORDER: usize = 8;

fn axis_rule(extent: f64, requested: usize) -> (Vec<f64>, Vec<f64>) {
    let panels = requested.div_ceil(PANEL_ORDER).max(1);
    let width = extent / panels as f64;
    let mut nodes = Vec::with_capacity(panels * PANEL_ORDER);
    let mut weights = Vec::with_capacity(panels * PANEL_ORDER);
    for p in 0..panels {
        let a = p as f64 * width;
        let mid = a + 0.5 * width;
        for q in 0..PANEL_ORDER {
            nodes.push(mid + 0.5 * width * GL8_NODES[q]);
            weights.push(0.5 * width * GL8_WEIGHTS[q]);
        }
    }
    (nodes, weights)
}

/// Tensor-product quadrature grid. All nodes are strictly interior
/// (Gauss nodes never touch the panel ends), so sampled fields carry
/// no boundary values; boundary behaviour is probed through the
/// analytic evaluators instead.
///
/// Field sample layout is row-major with y as the row index:
/// `values[iy * nx + ix]` corresponds to the node `(xs[ix], ys[iy])`.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub wx: Vec<f64>,
    pub wy: Vec<f64>,
}

impl QuadratureGrid {
    pub fn build(domain: &Domain) -> Self {
        let (xs, wx) = axis_rule(domain.length, domain.nx);
        let (ys, wy) = axis_rule(domain.height, domain.ny);
        Self { xs, ys, wx, wy }
    }

    pub fn nx(&self) -> usize {
        self.xs.len()
    }

    pub fn ny(&self) -> usize {
        self.ys.len()
    }

    pub fn node_count(&self) -> usize {
        self.xs.len() * self.ys.len()
    }

    #[inline]
    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.xs.len() + ix
    }

    /// Samples a function of (x, y) on every node, in field layout.
    pub fn sample(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.node_count());
        for &y in &self.ys {
            for &x in &self.xs {
                out.push(f(x, y));
            }
        }
        out
    }

    /// Integral of a sampled field over the rectangle.
    pub fn integrate(&self, f: &[f64]) -> Result<f64> {
        self.check_len(f, "integrate")?;
        let mut acc = 0.0;
        for (iy, &wy) in self.wy.iter().enumerate() {
            let row = &f[iy * self.nx()..(iy + 1) * self.nx()];
            let mut row_acc = 0.0;
            for (v, &wx) in row.iter().zip(&self.wx) {
                row_acc += v * wx;
            }
            acc += wy * row_acc;
        }
        Ok(acc)
    }

    /// L^p norm of a sampled field, p >= 1.
    pub fn lp_norm(&self, f: &[f64], p: f64) -> Result<f64> {
        self.check_len(f, "lp_norm")?;
        let mut acc = 0.0;
        for (iy, &wy) in self.wy.iter().enumerate() {
            let row = &f[iy * self.nx()..(iy + 1) * self.nx()];
            let mut row_acc = 0.0;
            for (v, &wx) in row.iter().zip(&self.wx) {
                row_acc += v.abs().powf(p) * wx;
            }
            acc += wy * row_acc;
        }
        Ok(acc.powf(1.0 / p))
    }

    pub(crate) fn check_len(&self, f: &[f64], context: &'static str) -> Result<()> {
        if f.len() != self.node_count() {
            return Err(Error::ShapeMismatch {
                context,
                expected: self.node_count(),
                got: f.len(),
            });
        }
        Ok(())
    }
}

/// L²(Ω) inner product of two sampled fields: Σ w_i f_i g_i.
pub fn inner_l2(f: &[f64], g: &[f64], grid: &QuadratureGrid) -> Result<f64> {
    grid.check_len(f, "inner_l2 lhs")?;
    grid.check_len(g, "inner_l2 rhs")?;
    let nx = grid.nx();
    let mut acc = 0.0;
    for (iy, &wy) in grid.wy.iter().enumerate() {
        let fr = &f[iy * nx..(iy + 1) * nx];
        let gr = &g[iy * nx..(iy + 1) * nx];
        let mut row_acc = 0.0;
        for ((fv, gv), &wx) in fr.iter().zip(gr).zip(&grid.wx) {
            row_acc += fv * gv * wx;
        }
        acc += wy * row_acc;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn weights_sum_to_area() {
        for (l, h, nx, ny) in [(1.0, 1.0, 16, 16), (2.5, 0.7, 32, 24), (1.0, 3.0, 4, 4)] {
            let dom = Domain::new(l, h, nx, ny).unwrap();
            let grid = dom.grid();
            let ones = vec![1.0; grid.node_count()];
            assert_relative_eq!(grid.integrate(&ones).unwrap(), l * h, max_relative = 1e-14);
        }
    }

    #[test]
    fn classify_examples() {
        let dom = Domain::new(2.0, 1.0, 8, 8).unwrap();
        assert_eq!(dom.classify(0.0, 0.5).unwrap(), Segment::Inlet);
        assert_eq!(dom.classify(2.0, 0.5).unwrap(), Segment::Outlet);
        assert_eq!(dom.classify(1.0, 0.0).unwrap(), Segment::Wall);
        assert_eq!(dom.classify(1.0, 1.0).unwrap(), Segment::Wall);
        // Corner convention: Dirichlet side wins, inlet before wall.
        assert_eq!(dom.classify(0.0, 0.0).unwrap(), Segment::Inlet);
        assert_eq!(dom.classify(0.0, 1.0).unwrap(), Segment::Inlet);
        assert_eq!(dom.classify(2.0, 0.0).unwrap(), Segment::Wall);
        assert_eq!(dom.classify(2.0, 1.0).unwrap(), Segment::Wall);
        assert_eq!(dom.classify(1.0, 0.5).unwrap(), Segment::Interior);
        assert!(dom.classify(-0.1, 0.5).is_err());
        assert!(dom.classify(0.5, 1.5).is_err());
    }

    /// Half-integer sine modes are what the eigenbasis feeds through this
    /// quadrature; their pairwise products must integrate to the closed
    /// form essentially exactly.
    #[test]
    fn sine_products_integrate_exactly() {
        let dom = Domain::unit(64);
        let grid = dom.grid();
        let mu = |k: usize| (k as f64 - 0.5) * PI;
        for k in [1usize, 3, 7, 12] {
            for kp in [1usize, 2, 7, 11] {
                let f = grid.sample(|x, _| (mu(k) * x).sin());
                let g = grid.sample(|x, _| (mu(kp) * x).sin());
                let got = inner_l2(&f, &g, &grid).unwrap();
                // ∫₀¹ sin(μ_k x) sin(μ_k' x) dx = δ_kk'/2 for half-integer μ.
                let want = if k == kp { 0.5 } else { 0.0 };
                assert!(
                    (got - want).abs() < 1e-12,
                    "k={k}, k'={kp}: got {got}, want {want}"
                );
            }
        }
    }

    #[test]
    fn inner_product_is_symmetric_and_bilinear() {
        let dom = Domain::unit(16);
        let grid = dom.grid();
        let f = grid.sample(|x, y| (3.0 * x).cos() + y);
        let g = grid.sample(|x, y| x * y - 0.5);
        let h = grid.sample(|x, y| (x - y).sin());
        let fg = inner_l2(&f, &g, &grid).unwrap();
        let gf = inner_l2(&g, &f, &grid).unwrap();
        assert_relative_eq!(fg, gf, max_relative = 1e-15);
        let combo: Vec<f64> = g.iter().zip(&h).map(|(a, b)| 2.0 * a - 3.0 * b).collect();
        let lhs = inner_l2(&f, &combo, &grid).unwrap();
        let rhs = 2.0 * fg - 3.0 * inner_l2(&f, &h, &grid).unwrap();
        assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
    }

    #[test]
    fn inner_product_shape_mismatch() {
        let dom = Domain::unit(8);
        let grid = dom.grid();
        let f = vec![1.0; grid.node_count()];
        let g = vec![1.0; grid.node_count() + 1];
        assert!(matches!(
            inner_l2(&f, &g, &grid),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    /// Doubling the per-axis resolution must cut the quadrature error of
    /// a high-frequency sin² integral by at least 4x until the rounding
    /// floor is reached.
    #[test]
    fn exactness_degrades_gracefully() {
        // High enough frequency that the coarse grids show real error.
        let k = 41usize;
        let mu = (k as f64 - 0.5) * PI;
        let exact = 0.5; // ∫₀¹ sin²(μ x) dx for half-integer μ
        let mut prev_err: Option<f64> = None;
        for n in [8usize, 16, 32, 64, 128] {
            let dom = Domain::new(1.0, 1.0, n, 4).unwrap();
            let grid = dom.grid();
            let f: Vec<f64> = grid.sample(|x, _| (mu * x).sin());
            let prod: Vec<f64> = f.iter().map(|v| v * v).collect();
            // Integrate in x only by using a single y panel of total weight H=1.
            let val = grid.integrate(&prod).unwrap();
            let err = (val - exact).abs();
            if let Some(p) = prev_err {
                let floored = err < 1e-13;
                assert!(
                    floored || err * 4.0 <= p * 1.0000001,
                    "n={n}: error {err} did not improve 4x over {p}"
                );
            }
            prev_err = Some(err);
        }
    }

    proptest! {
        /// Every boundary point receives exactly one boundary tag.
        #[test]
        fn boundary_partition_is_exhaustive(side in 0usize..4, frac in 0.0f64..=1.0) {
            let dom = Domain::new(2.0, 1.0, 8, 8).unwrap();
            let (x, y) = match side {
                0 => (0.0, frac * dom.height),
                1 => (dom.length, frac * dom.height),
                2 => (frac * dom.length, 0.0),
                _ => (frac * dom.length, dom.height),
            };
            let tag = dom.classify(x, y).unwrap();
            prop_assert_ne!(tag, Segment::Interior);
        }

        #[test]
        fn interior_points_are_interior(x in 0.0001f64..0.9999, y in 0.0001f64..0.9999) {
            let dom = Domain::unit(8);
            prop_assert_eq!(dom.classify(x, y).unwrap(), Segment::Interior);
        }
    }
}
