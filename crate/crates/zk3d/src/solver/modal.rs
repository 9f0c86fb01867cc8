//! Linear algebra for the implicit step.
//!
//! The implicit Crank-Nicolson operator I + (dt/2)(c_s d_x + d_x Lap) is
//! block-diagonalized exactly by the discrete sine transform in y and z:
//! the centered second-difference with zero Dirichlet data has the sine
//! vectors as eigenvectors. Each transverse mode (m_y, m_z) then leaves a
//! small banded system along x,
//!     I + (dt/2) [ (c_s + lam_y + lam_z) D1 + D3 ],
//! which is factored once with partial pivoting and reused every step.
//!
//! x-closures for D3 (interior unknowns i = 1..n-2, Dirichlet values 0):
//!   - left row (i = 1): ghost from cubic extrapolation through
//!     (0, u_1, u_2, u_3), giving (3u_1 - 3u_2 + u_3)/h^3;
//!   - right row (i = n-2): the condition u_x(L) = 0, discretized at the
//!     boundary node, eliminates the outside ghost via u_n = u_{n-2}.

// the factorization loops index rows and columns through band offsets;
// range loops keep them aligned with the textbook algorithm
#![allow(clippy::needless_range_loop)]

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Banded matrix in row-major band storage with room for pivoting fill:
/// entry (r, c) lives at `data[r * width + (c - r + kl)]` for
/// c in [r - kl, r + ku + kl].
#[derive(Debug, Clone)]
pub struct Banded {
    pub p: usize,
    pub kl: usize,
    pub ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl Banded {
    pub fn zeros(p: usize, kl: usize, ku: usize) -> Banded {
        let width = 2 * kl + ku + 1;
        Banded {
            p,
            kl,
            ku,
            width,
            data: vec![0.0; p * width],
        }
    }

    #[inline]
    fn in_band(&self, r: usize, c: usize) -> bool {
        c + self.kl >= r && c <= r + self.ku + self.kl && c < self.p
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        if self.in_band(r, c) {
            self.data[r * self.width + (c + self.kl - r)]
        } else {
            0.0
        }
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        debug_assert!(self.in_band(r, c), "({r},{c}) outside band");
        self.data[r * self.width + (c + self.kl - r)] = v;
    }

    #[inline]
    pub fn add(&mut self, r: usize, c: usize, v: f64) {
        let x = self.get(r, c);
        self.set(r, c, x + v);
    }

    /// y += alpha * (self @ x), using only the declared (kl, ku) band.
    pub fn matvec_acc(&self, x: &[f64], alpha: f64, y: &mut [f64]) {
        for r in 0..self.p {
            let lo = r.saturating_sub(self.kl);
            let hi = (r + self.ku).min(self.p - 1);
            let mut acc = 0.0;
            for c in lo..=hi {
                acc += self.get(r, c) * x[c];
            }
            y[r] += alpha * acc;
        }
    }
}

/// LU factorization of a banded matrix with partial pivoting.
#[derive(Debug, Clone)]
pub struct BandedLu {
    mat: Banded,
    pivots: Vec<usize>,
}

impl BandedLu {
    /// Factor in place. The input band must carry kl subdiagonals and
    /// ku superdiagonals; fill from pivoting extends U to ku + kl.
    pub fn factor(mut m: Banded) -> Option<BandedLu> {
        let p = m.p;
        let (kl, ku) = (m.kl, m.ku);
        let mut pivots = vec![0usize; p];
        for j in 0..p {
            // pivot search in column j, rows j..j+kl
            let rmax = (j + kl).min(p - 1);
            let mut piv = j;
            let mut best = m.get(j, j).abs();
            for r in j + 1..=rmax {
                let v = m.get(r, j).abs();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best == 0.0 {
                return None;
            }
            pivots[j] = piv;
            if piv != j {
                let chi = (j + ku + kl).min(p - 1);
                for c in j..=chi {
                    let a = m.get(j, c);
                    let b = m.get(piv, c);
                    m.set(j, c, b);
                    m.set(piv, c, a);
                }
            }
            let d = m.get(j, j);
            for r in j + 1..=rmax {
                let mult = m.get(r, j) / d;
                m.set(r, j, mult);
                if mult != 0.0 {
                    let chi = (j + ku + kl).min(p - 1);
                    for c in j + 1..=chi {
                        let v = m.get(r, c) - mult * m.get(j, c);
                        m.set(r, c, v);
                    }
                }
            }
        }
        Some(BandedLu { mat: m, pivots })
    }

    /// Solve in place.
    pub fn solve(&self, b: &mut [f64]) {
        let p = self.mat.p;
        let kl = self.mat.kl;
        let ku = self.mat.ku;
        for j in 0..p {
            b.swap(j, self.pivots[j]);
            let bj = b[j];
            if bj != 0.0 {
                let rmax = (j + kl).min(p - 1);
                for r in j + 1..=rmax {
                    b[r] -= self.mat.get(r, j) * bj;
                }
            }
        }
        for r in (0..p).rev() {
            let hi = (r + ku + kl).min(p - 1);
            let mut acc = b[r];
            for c in r + 1..=hi {
                acc -= self.mat.get(r, c) * b[c];
            }
            b[r] = acc / self.mat.get(r, r);
        }
    }
}

/// Centered first derivative on interior unknowns with Dirichlet zeros.
pub fn d1_band(p: usize, h: f64) -> Banded {
    let mut m = Banded::zeros(p, 1, 1);
    let c = 1.0 / (2.0 * h);
    for r in 0..p {
        if r > 0 {
            m.set(r, r - 1, -c);
        }
        if r + 1 < p {
            m.set(r, r + 1, c);
        }
    }
    m
}

/// Third derivative on interior unknowns with the closures described above.
pub fn d3_band(p: usize, h: f64) -> Banded {
    let mut m = Banded::zeros(p, 2, 2);
    let h3 = h * h * h;
    let c = 1.0 / (2.0 * h3);
    // left row i = 1: cubic-extrapolation ghost
    m.set(0, 0, 3.0 / h3);
    m.set(0, 1, -3.0 / h3);
    m.set(0, 2, 1.0 / h3);
    for r in 1..p {
        if r >= 2 {
            m.set(r, r - 2, -c);
        }
        m.set(r, r - 1, 2.0 * c);
        if r + 1 < p {
            m.set(r, r + 1, -2.0 * c);
        }
        if r + 2 < p {
            m.set(r, r + 2, c);
        }
    }
    // right row i = n-2: u_x(L)=0 ghost elimination adds u_{n-2}
    m.add(p - 1, p - 1, c);
    m
}

/// Eigenvalues of the centered second difference with zero Dirichlet data:
/// lambda_m = -(4/h^2) sin^2(m pi / (2(n-1))), m = 1..n-2.
pub fn transverse_eigenvalues(n: usize, h: f64) -> Vec<f64> {
    let p = n - 2;
    (1..=p)
        .map(|m| {
            let s = (m as f64 * std::f64::consts::PI / (2.0 * (n - 1) as f64)).sin();
            -4.0 / (h * h) * s * s
        })
        .collect()
}

/// Symmetric sine matrix S[m][j] = sin((m+1)(j+1) pi / (n-1)).
/// S S = ((n-1)/2) I, so the inverse transform is (2/(n-1)) S.
pub struct SineBasis {
    #[allow(dead_code)]
    pub p: usize,
    forward: Vec<f64>,
    inverse: Vec<f64>,
}

impl SineBasis {
    pub fn new(n: usize) -> SineBasis {
        let p = n - 2;
        let mut forward = vec![0.0; p * p];
        let scale = 2.0 / (n - 1) as f64;
        for m in 0..p {
            for j in 0..p {
                let v = ((m + 1) as f64 * (j + 1) as f64 * std::f64::consts::PI
                    / (n - 1) as f64)
                    .sin();
                forward[m * p + j] = v;
            }
        }
        let inverse = forward.iter().map(|&v| v * scale).collect();
        SineBasis { p, forward, inverse }
    }
}

/// Interior array dimensions (x fastest).
#[derive(Debug, Clone, Copy)]
pub struct Dims {
    pub mx: usize,
    pub my: usize,
    pub mz: usize,
}

impl Dims {
    pub fn len(&self) -> usize {
        self.mx * self.my * self.mz
    }
}

/// dst[i, m, k] = sum_j mat[m][j] src[i, j, k]
fn apply_y(src: &[f64], dst: &mut [f64], dims: Dims, mat: &[f64]) {
    let (mx, my) = (dims.mx, dims.my);
    let slab = mx * my;
    dst.par_chunks_mut(slab)
        .zip(src.par_chunks(slab))
        .for_each(|(out, inp)| {
            out.fill(0.0);
            for m in 0..my {
                let line = &mut out[m * mx..(m + 1) * mx];
                for j in 0..my {
                    let c = mat[m * my + j];
                    if c != 0.0 {
                        let srcl = &inp[j * mx..(j + 1) * mx];
                        for i in 0..mx {
                            line[i] += c * srcl[i];
                        }
                    }
                }
            }
        });
}

/// dst[i, j, m] = sum_k mat[m][k] src[i, j, k]
fn apply_z(src: &[f64], dst: &mut [f64], dims: Dims, mat: &[f64]) {
    let (mz, slab) = (dims.mz, dims.mx * dims.my);
    dst.par_chunks_mut(slab)
        .enumerate()
        .for_each(|(m, out)| {
            out.fill(0.0);
            for k in 0..mz {
                let c = mat[m * mz + k];
                if c != 0.0 {
                    let srcl = &src[k * slab..(k + 1) * slab];
                    for i in 0..slab {
                        out[i] += c * srcl[i];
                    }
                }
            }
        });
}

/// Per-mode factored implicit operator plus the explicit half-step bands.
pub struct ModeSolver {
    pub dims: Dims,
    hx: f64,
    dt: f64,
    c_s: f64,
    basis_y: SineBasis,
    basis_z: SineBasis,
    lam_y: Vec<f64>,
    lam_z: Vec<f64>,
    d1: Banded,
    d3: Banded,
    lus: Vec<BandedLu>,
}

impl ModeSolver {
    pub fn new(n: [usize; 3], h: [f64; 3], c_s: f64, dt: f64) -> Result<ModeSolver> {
        let dims = Dims {
            mx: n[0] - 2,
            my: n[1] - 2,
            mz: n[2] - 2,
        };
        let d1 = d1_band(dims.mx, h[0]);
        let d3 = d3_band(dims.mx, h[0]);
        let lam_y = transverse_eigenvalues(n[1], h[1]);
        let lam_z = transverse_eigenvalues(n[2], h[2]);
        let mut lus = Vec::with_capacity(dims.my * dims.mz);
        for (kz, &lz) in lam_z.iter().enumerate() {
            for (ky, &ly) in lam_y.iter().enumerate() {
                let a = c_s + ly + lz;
                let mut m = Banded::zeros(dims.mx, 2, 2);
                for r in 0..dims.mx {
                    m.set(r, r, 1.0);
                }
                for r in 0..dims.mx {
                    let lo = r.saturating_sub(2);
                    let hi = (r + 2).min(dims.mx - 1);
                    for c in lo..=hi {
                        let v = a * d1.get(r, c) + d3.get(r, c);
                        if v != 0.0 {
                            m.add(r, c, 0.5 * dt * v);
                        }
                    }
                }
                let lu = BandedLu::factor(m).ok_or(Error::SingularSystem {
                    mode_y: ky + 1,
                    mode_z: kz + 1,
                })?;
                lus.push(lu);
            }
        }
        Ok(ModeSolver {
            dims,
            hx: h[0],
            dt,
            c_s,
            basis_y: SineBasis::new(n[1]),
            basis_z: SineBasis::new(n[2]),
            lam_y,
            lam_z,
            d1,
            d3,
            lus,
        })
    }

    pub fn hx(&self) -> f64 {
        self.hx
    }

    /// Forward sine transform in y then z, in place.
    pub fn forward(&self, v: &mut [f64]) {
        let mut tmp = vec![0.0; v.len()];
        apply_y(v, &mut tmp, self.dims, &self.basis_y.forward);
        apply_z(&tmp, v, self.dims, &self.basis_z.forward);
    }

    /// Inverse sine transform in z then y, in place.
    pub fn inverse(&self, v: &mut [f64]) {
        let mut tmp = vec![0.0; v.len()];
        apply_z(v, &mut tmp, self.dims, &self.basis_z.inverse);
        apply_y(&tmp, v, self.dims, &self.basis_y.inverse);
    }

    /// In mode space: rhs = (I - dt/2 (a D1 + D3)) uhat, line by line.
    pub fn explicit_rhs(&self, uhat: &[f64]) -> Vec<f64> {
        let mx = self.dims.mx;
        let mut out = uhat.to_vec();
        out.par_chunks_mut(mx)
            .zip(uhat.par_chunks(mx))
            .enumerate()
            .for_each(|(line, (dst, src))| {
                let ky = line % self.dims.my;
                let kz = line / self.dims.my;
                let a = self.c_s + self.lam_y[ky] + self.lam_z[kz];
                self.d1.matvec_acc(src, -0.5 * self.dt * a, dst);
                self.d3.matvec_acc(src, -0.5 * self.dt, dst);
            });
        out
    }

    /// Solve the implicit systems line by line in mode space, in place.
    pub fn solve_lines(&self, rhs: &mut [f64]) {
        let mx = self.dims.mx;
        rhs.par_chunks_mut(mx).enumerate().for_each(|(line, b)| {
            self.lus[line].solve(b);
        });
    }
}
