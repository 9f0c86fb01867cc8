//! Box geometry, scalar fields, discrete differential operators, quadrature
//! and boundary traces on D = (0,L) x (0,B_y) x (0,B_z).
//!
//! All operators are second order: centered differences at interior nodes,
//! one-sided stencils of the same order at boundary nodes. Quadrature is
//! tensor-product trapezoidal with a fixed lexicographic summation order
//! (x fastest), so every reduction is bit-reproducible.

use crate::error::{Error, Result};

/// Coordinate axis selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub(crate) const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }
}

/// Which boundary conditions a field is supposed to satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcTag {
    /// u = 0 on the whole boundary of the box; boundary node values are
    /// exactly zero.
    DirichletAll,
    /// No constraint.
    Free,
}

/// Uniform collocated grid on the box, boundary nodes included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid3 {
    /// Side lengths (L, B_y, B_z).
    pub len: [f64; 3],
    /// Node counts per axis, boundary nodes included.
    pub n: [usize; 3],
    /// Spacings h = len / (n - 1).
    pub h: [f64; 3],
}

/// Build a grid, validating lengths and node counts.
///
/// Node (i, j, k) sits at (i*h_x, j*h_y, k*h_z). Counts must be at least 5
/// so one-sided third-order stencils fit.
pub fn make_grid(
    lx: f64,
    ly: f64,
    lz: f64,
    nx: usize,
    ny: usize,
    nz: usize,
) -> Result<Grid3> {
    for (name, l) in [("L", lx), ("B_y", ly), ("B_z", lz)] {
        if !(l.is_finite() && l > 0.0) {
            return Err(Error::Validation(format!("{name} must be positive, got {l}")));
        }
    }
    for (name, n) in [("n_x", nx), ("n_y", ny), ("n_z", nz)] {
        if n < 5 {
            return Err(Error::Validation(format!("{name} must be >= 5, got {n}")));
        }
    }
    let len = [lx, ly, lz];
    let n = [nx, ny, nz];
    let h = [
        lx / (nx - 1) as f64,
        ly / (ny - 1) as f64,
        lz / (nz - 1) as f64,
    ];
    Ok(Grid3 { len, n, h })
}

impl Grid3 {
    pub fn num_nodes(&self) -> usize {
        self.n[0] * self.n[1] * self.n[2]
    }

    /// Flat index in lexicographic order, x fastest.
    #[inline]
    pub fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.n[0] * (j + self.n[1] * k)
    }

    /// Coordinate of node index along one axis.
    #[inline]
    pub fn coord(&self, axis: Axis, i: usize) -> f64 {
        i as f64 * self.h[axis.index()]
    }

    fn is_boundary(&self, i: usize, j: usize, k: usize) -> bool {
        i == 0
            || j == 0
            || k == 0
            || i == self.n[0] - 1
            || j == self.n[1] - 1
            || k == self.n[2] - 1
    }

    /// Trapezoid weight of a 1D node index.
    #[inline]
    fn w1(&self, axis: Axis, i: usize) -> f64 {
        let a = axis.index();
        if i == 0 || i == self.n[a] - 1 {
            0.5 * self.h[a]
        } else {
            self.h[a]
        }
    }
}

/// Scalar field sampled on the grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Field3 {
    pub grid: Grid3,
    values: Vec<f64>,
    bc: BcTag,
}

impl Field3 {
    /// All-zero field.
    pub fn zeros(grid: Grid3, bc: BcTag) -> Field3 {
        Field3 {
            grid,
            values: vec![0.0; grid.num_nodes()],
            bc,
        }
    }

    /// Sample `f(x, y, z)` on the nodes. With `BcTag::DirichletAll` the
    /// function is evaluated at interior nodes only and boundary nodes are
    /// set to exactly zero, so the tag invariant holds even when `f`
    /// vanishes on the boundary only up to roundoff.
    pub fn from_fn(grid: Grid3, bc: BcTag, f: impl Fn(f64, f64, f64) -> f64) -> Result<Field3> {
        let mut values = vec![0.0; grid.num_nodes()];
        for k in 0..grid.n[2] {
            for j in 0..grid.n[1] {
                for i in 0..grid.n[0] {
                    if bc == BcTag::DirichletAll && grid.is_boundary(i, j, k) {
                        continue;
                    }
                    values[grid.idx(i, j, k)] =
                        f(grid.coord(Axis::X, i), grid.coord(Axis::Y, j), grid.coord(Axis::Z, k));
                }
            }
        }
        Field3::from_values(grid, bc, values)
    }

    /// Wrap raw values, enforcing the field invariants.
    pub fn from_values(grid: Grid3, bc: BcTag, values: Vec<f64>) -> Result<Field3> {
        if values.len() != grid.num_nodes() {
            return Err(Error::Validation(format!(
                "field length {} does not match grid ({} nodes)",
                values.len(),
                grid.num_nodes()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Validation(format!("non-finite field value {v}")));
        }
        if bc == BcTag::DirichletAll {
            for k in 0..grid.n[2] {
                for j in 0..grid.n[1] {
                    for i in 0..grid.n[0] {
                        if grid.is_boundary(i, j, k) && values[grid.idx(i, j, k)] != 0.0 {
                            return Err(Error::Validation(
                                "dirichlet_all field has nonzero boundary node".into(),
                            ));
                        }
                    }
                }
            }
        }
        Ok(Field3 { grid, values, bc })
    }

    pub fn bc(&self) -> BcTag {
        self.bc
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[self.grid.idx(i, j, k)]
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_with(&self, other: &Field3, f: impl Fn(f64, f64) -> f64) -> Field3 {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Field3 {
            grid: self.grid,
            values,
            bc: BcTag::Free,
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field3 {
        Field3 {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
            bc: BcTag::Free,
        }
    }
}

/// 1D second-order first derivative along a line of `n` samples.
/// Centered in the interior, one-sided 3-point at the ends.
#[inline]
fn d1_line(f: impl Fn(usize) -> f64, n: usize, h: f64, i: usize) -> f64 {
    if i == 0 {
        (-3.0 * f(0) + 4.0 * f(1) - f(2)) / (2.0 * h)
    } else if i == n - 1 {
        (3.0 * f(n - 1) - 4.0 * f(n - 2) + f(n - 3)) / (2.0 * h)
    } else {
        (f(i + 1) - f(i - 1)) / (2.0 * h)
    }
}

/// 1D second-order second derivative along a line, one-sided 4-point at ends.
#[inline]
fn d2_line(f: impl Fn(usize) -> f64, n: usize, h: f64, i: usize) -> f64 {
    let h2 = h * h;
    if i == 0 {
        (2.0 * f(0) - 5.0 * f(1) + 4.0 * f(2) - f(3)) / h2
    } else if i == n - 1 {
        (2.0 * f(n - 1) - 5.0 * f(n - 2) + 4.0 * f(n - 3) - f(n - 4)) / h2
    } else {
        (f(i - 1) - 2.0 * f(i) + f(i + 1)) / h2
    }
}

/// Partial derivative along `axis`. Result carries `BcTag::Free`.
pub fn deriv(f: &Field3, axis: Axis) -> Field3 {
    let g = f.grid;
    let (nx, ny, nz) = (g.n[0], g.n[1], g.n[2]);
    let h = g.h[axis.index()];
    let mut out = vec![0.0; g.num_nodes()];
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let v = match axis {
                    Axis::X => d1_line(|p| f.at(p, j, k), nx, h, i),
                    Axis::Y => d1_line(|p| f.at(i, p, k), ny, h, j),
                    Axis::Z => d1_line(|p| f.at(i, j, p), nz, h, k),
                };
                out[g.idx(i, j, k)] = v;
            }
        }
    }
    Field3 {
        grid: g,
        values: out,
        bc: BcTag::Free,
    }
}

/// Second derivative along `axis` (single stencil, not deriv twice).
pub fn second_deriv(f: &Field3, axis: Axis) -> Field3 {
    let g = f.grid;
    let (nx, ny, nz) = (g.n[0], g.n[1], g.n[2]);
    let h = g.h[axis.index()];
    let mut out = vec![0.0; g.num_nodes()];
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let v = match axis {
                    Axis::X => d2_line(|p| f.at(p, j, k), nx, h, i),
                    Axis::Y => d2_line(|p| f.at(i, p, k), ny, h, j),
                    Axis::Z => d2_line(|p| f.at(i, j, p), nz, h, k),
                };
                out[g.idx(i, j, k)] = v;
            }
        }
    }
    Field3 {
        grid: g,
        values: out,
        bc: BcTag::Free,
    }
}

/// Laplacian: sum of the three second derivatives.
pub fn laplacian(f: &Field3) -> Field3 {
    let xx = second_deriv(f, Axis::X);
    let yy = second_deriv(f, Axis::Y);
    let zz = second_deriv(f, Axis::Z);
    let values = xx
        .values
        .iter()
        .zip(&yy.values)
        .zip(&zz.values)
        .map(|((&a, &b), &c)| a + b + c)
        .collect();
    Field3 {
        grid: f.grid,
        values,
        bc: BcTag::Free,
    }
}

/// Trapezoidal quadrature of `f` over the box, fixed summation order.
pub fn integrate(f: &Field3) -> f64 {
    integrate_with(f, |_x, v| v)
}

/// Weighted L2 norm squared: integral of (1 + x) f^2.
pub fn weighted_l2_sq(f: &Field3) -> f64 {
    integrate_with(f, |x, v| (1.0 + x) * v * v)
}

fn integrate_with(f: &Field3, g: impl Fn(f64, f64) -> f64) -> f64 {
    let gr = f.grid;
    let mut total = 0.0;
    for k in 0..gr.n[2] {
        let wk = gr.w1(Axis::Z, k);
        for j in 0..gr.n[1] {
            let wjk = gr.w1(Axis::Y, j) * wk;
            let mut line = 0.0;
            for i in 0..gr.n[0] {
                line += gr.w1(Axis::X, i) * g(gr.coord(Axis::X, i), f.at(i, j, k));
            }
            total += wjk * line;
        }
    }
    total
}

/// Norm kinds used by the diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    L2,
    L3,
    L4,
    H1,
    H2,
}

/// Norm of a field. Lq norms integrate |f|^q; H1 and H2 add first and
/// second derivatives (the six distinct second derivatives, once each).
pub fn norm(f: &Field3, kind: NormKind) -> f64 {
    match kind {
        NormKind::L2 => integrate_with(f, |_x, v| v * v).sqrt(),
        NormKind::L3 => integrate_with(f, |_x, v| v.abs().powi(3)).powf(1.0 / 3.0),
        NormKind::L4 => integrate_with(f, |_x, v| v.powi(4)).powf(0.25),
        NormKind::H1 => {
            let mut sq = integrate_with(f, |_x, v| v * v);
            for axis in Axis::ALL {
                let d = deriv(f, axis);
                sq += integrate_with(&d, |_x, v| v * v);
            }
            sq.sqrt()
        }
        NormKind::H2 => {
            let mut sq = integrate_with(f, |_x, v| v * v);
            let mut firsts = Vec::new();
            for axis in Axis::ALL {
                let d = deriv(f, axis);
                sq += integrate_with(&d, |_x, v| v * v);
                firsts.push(d);
            }
            // xx, yy, zz
            for axis in Axis::ALL {
                let d2 = second_deriv(f, axis);
                sq += integrate_with(&d2, |_x, v| v * v);
            }
            // xy, xz, yz (mixed, once each)
            for (first, axis) in [(0, Axis::Y), (0, Axis::Z), (1, Axis::Z)] {
                let d2 = deriv(&firsts[first], axis);
                sq += integrate_with(&d2, |_x, v| v * v);
            }
            sq.sqrt()
        }
    }
}

/// Integral over the x = 0 face of the squared one-sided x-derivative:
/// the boundary trace that drives the decay mechanism.
pub fn trace_x0_sq(f: &Field3) -> f64 {
    let g = f.grid;
    let hx = g.h[0];
    let mut total = 0.0;
    for k in 0..g.n[2] {
        let wk = g.w1(Axis::Z, k);
        for j in 0..g.n[1] {
            let dfx = (-3.0 * f.at(0, j, k) + 4.0 * f.at(1, j, k) - f.at(2, j, k)) / (2.0 * hx);
            total += g.w1(Axis::Y, j) * wk * dfx * dfx;
        }
    }
    total
}
