//! Direct solvers for the Newton systems.
//!
//! The KdV and generalized-KdV Jacobians are cyclic banded (half bandwidth 2).
//! They are solved with a pivoted band LU of the non-cyclic part plus a
//! Woodbury correction for the corner entries. Dense LU covers small systems
//! and the Ostrovsky Jacobian, whose nonlocal term is a full circulant.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Square matrix whose row `i` is nonzero only at columns `(i + o) mod n`,
/// `o ∈ [-w, w]`.
#[derive(Debug, Clone)]
pub(crate) struct CyclicBanded {
    n: usize,
    half: usize,
    /// `diags[i * (2w+1) + (o + w)] = A[i][(i + o) mod n]`
    diags: Vec<f64>,
}

impl CyclicBanded {
    pub(crate) fn zeros(n: usize, half: usize) -> Self {
        CyclicBanded {
            n,
            half,
            diags: vec![0.0; n * (2 * half + 1)],
        }
    }

    /// Adds `value` at `(row, row + offset mod n)`.
    pub(crate) fn add(&mut self, row: usize, offset: isize, value: f64) {
        let w = self.half as isize;
        debug_assert!(offset.abs() <= w);
        self.diags[row * (2 * self.half + 1) + (offset + w) as usize] += value;
    }

    fn get(&self, row: usize, offset: isize) -> f64 {
        self.diags[row * (2 * self.half + 1) + (offset + self.half as isize) as usize]
    }

    pub(crate) fn to_dense(&self) -> DMatrix<f64> {
        let n = self.n;
        let w = self.half as isize;
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for o in -w..=w {
                let j = (i as isize + o).rem_euclid(n as isize) as usize;
                m[(i, j)] += self.get(i, o);
            }
        }
        m
    }

    pub(crate) fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        let w = self.half;
        if n < 4 * w + 4 {
            return dense_solve(self.to_dense(), rhs);
        }
        match self.solve_woodbury(rhs) {
            Ok(x) => Ok(x),
            // The truncated band can be singular while the cyclic matrix is not.
            Err(Error::Singular) => dense_solve(self.to_dense(), rhs),
            Err(e) => Err(e),
        }
    }

    fn solve_woodbury(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        let w = self.half;
        let wi = w as isize;

        let mut band = BandLu::zeros(n, w, w);
        // corner rows and their wrapped entries: (row, col, value)
        let mut corners: Vec<(usize, Vec<(usize, f64)>)> = Vec::new();
        for i in 0..n {
            let mut wrapped = Vec::new();
            for o in -wi..=wi {
                let j = i as isize + o;
                let v = self.get(i, o);
                if (0..n as isize).contains(&j) {
                    band.set(i, j as usize, v);
                } else {
                    wrapped.push((j.rem_euclid(n as isize) as usize, v));
                }
            }
            if !wrapped.is_empty() {
                corners.push((i, wrapped));
            }
        }
        band.factor()?;

        let y = band.solve(rhs.to_vec());
        let r = corners.len();
        // Z = B⁻¹ U with U = [e_row for each corner row]
        let z: Vec<Vec<f64>> = corners
            .iter()
            .map(|(row, _)| {
                let mut e = vec![0.0; n];
                e[*row] = 1.0;
                band.solve(e)
            })
            .collect();
        let vdot = |entries: &[(usize, f64)], x: &[f64]| -> f64 {
            entries.iter().map(|&(j, v)| v * x[j]).sum()
        };
        // capacitance C = I + Vᵀ Z
        let mut cap = DMatrix::<f64>::identity(r, r);
        let mut vy = DVector::<f64>::zeros(r);
        for (a, (_, entries)) in corners.iter().enumerate() {
            vy[a] = vdot(entries, &y);
            for b in 0..r {
                cap[(a, b)] += vdot(entries, &z[b]);
            }
        }
        let coeff = cap.lu().solve(&vy).ok_or(Error::Singular)?;
        let mut x = y;
        for (b, zb) in z.iter().enumerate() {
            let c = coeff[b];
            for (xi, zi) in x.iter_mut().zip(zb) {
                *xi -= c * zi;
            }
        }
        if x.iter().all(|v| v.is_finite()) {
            Ok(x)
        } else {
            Err(Error::Singular)
        }
    }
}

pub(crate) fn dense_solve(m: DMatrix<f64>, rhs: &[f64]) -> Result<Vec<f64>> {
    let b = DVector::from_column_slice(rhs);
    let x = m.lu().solve(&b).ok_or(Error::Singular)?;
    if x.iter().all(|v| v.is_finite()) {
        Ok(x.iter().copied().collect())
    } else {
        Err(Error::Singular)
    }
}

/// Band LU with partial pivoting (the `gbtrf` layout: `kl` extra
/// super-diagonals hold the fill-in from row swaps).
#[derive(Debug)]
struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
    pivots: Vec<usize>,
}

impl BandLu {
    fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        BandLu {
            n,
            kl,
            ku,
            width,
            data: vec![0.0; n * width],
            pivots: vec![0; n],
        }
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.kl + self.ku);
        i * self.width + (j + self.kl - i)
    }

    fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    fn factor(&mut self) -> Result<()> {
        let n = self.n;
        let scale = self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        for k in 0..n {
            let last = (k + self.kl).min(n - 1);
            let right = (k + self.kl + self.ku).min(n - 1);
            let mut p = k;
            let mut best = self.data[self.idx(k, k)].abs();
            for i in k + 1..=last {
                let v = self.data[self.idx(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best <= scale * 1e-14 || best == 0.0 {
                return Err(Error::Singular);
            }
            self.pivots[k] = p;
            if p != k {
                for j in k..=right {
                    let (a, b) = (self.idx(k, j), self.idx(p, j));
                    self.data.swap(a, b);
                }
            }
            let pivot = self.data[self.idx(k, k)];
            for i in k + 1..=last {
                let ik = self.idx(i, k);
                let l = self.data[ik] / pivot;
                self.data[ik] = l;
                if l != 0.0 {
                    for j in k + 1..=right {
                        let (ij, kj) = (self.idx(i, j), self.idx(k, j));
                        self.data[ij] -= l * self.data[kj];
                    }
                }
            }
        }
        Ok(())
    }

    fn solve(&self, mut b: Vec<f64>) -> Vec<f64> {
        let n = self.n;
        for k in 0..n {
            b.swap(k, self.pivots[k]);
            let last = (k + self.kl).min(n - 1);
            let bk = b[k];
            for i in k + 1..=last {
                b[i] -= self.data[self.idx(i, k)] * bk;
            }
        }
        for i in (0..n).rev() {
            let right = (i + self.kl + self.ku).min(n - 1);
            let mut s = b[i];
            for j in i + 1..=right {
                s -= self.data[self.idx(i, j)] * b[j];
            }
            b[i] = s / self.data[self.idx(i, i)];
        }
        b
    }
}
