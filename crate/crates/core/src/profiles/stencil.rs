//! Finite-difference stencils on uniform meshes.
//!
//! Weights come from Fornberg's recursion, so any derivative order and any
//! accuracy order can be requested. Periodic meshes use one centered stencil
//! everywhere; interval meshes switch to one-sided windows of `m + order`
//! nodes where the centered stencil would leave the mesh.

use alloc::vec;
use alloc::vec::Vec;

use super::{Mesh, ProfileError};
use crate::math;

/// Default accuracy order of every stencil.
pub const DEFAULT_ORDER: usize = 4;

/// Weights of the `m`-th derivative at `x0` for the given nodes.
pub fn fornberg_weights(x0: f64, nodes: &[f64], m: usize) -> Vec<f64> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; m + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[m]).collect()
}

fn centered_width(m: usize, order: usize) -> usize {
    2 * m.div_ceil(2) - 1 + order
}

/// A precomputed `m`-th derivative operator on a mesh.
#[derive(Clone, Debug)]
pub struct DiffOperator {
    n: usize,
    periodic: bool,
    /// Per-node `(first index, weights)`; the first index may be negative on
    /// periodic meshes and wraps.
    rows: Vec<(isize, Vec<f64>)>,
    /// Centered weights shared by rows `half..n - half`.
    centered: Vec<f64>,
}

impl DiffOperator {
    pub fn new(mesh: &Mesh, m: usize, order: usize) -> Result<Self, ProfileError> {
        if order == 0 || order % 2 == 1 {
            return Err(ProfileError::InvalidStencil { m, order });
        }
        let n = mesh.len();
        let dr = mesh.spacing();
        let scale = math::powi(dr, -(m as i32));
        let wc = centered_width(m, order);
        let half = (wc / 2) as isize;
        let offsets: Vec<f64> = (-half..=half).map(|k| k as f64).collect();
        let centered: Vec<f64> =
            fornberg_weights(0.0, &offsets, m).into_iter().map(|w| w * scale).collect();
        let mut rows = Vec::with_capacity(n);
        if mesh.is_periodic() {
            if n < wc {
                return Err(ProfileError::MeshTooSmall { n, needed: wc });
            }
            for i in 0..n {
                rows.push((i as isize - half, centered.clone()));
            }
        } else {
            let w1 = m + order;
            if n < w1.max(wc) {
                return Err(ProfileError::MeshTooSmall { n, needed: w1.max(wc) });
            }
            for i in 0..n {
                let ii = i as isize;
                if ii - half >= 0 && ii + half < n as isize {
                    rows.push((ii - half, centered.clone()));
                } else {
                    let start = if ii - half < 0 { 0 } else { n - w1 };
                    let nodes: Vec<f64> = (start..start + w1).map(|k| k as f64).collect();
                    let w = fornberg_weights(i as f64, &nodes, m)
                        .into_iter()
                        .map(|w| w * scale)
                        .collect();
                    rows.push((start as isize, w));
                }
            }
        }
        Ok(DiffOperator { n, periodic: mesh.is_periodic(), rows, centered })
    }

    /// Derivative at a single node.
    pub fn apply_at(&self, values: &[f64], i: usize) -> f64 {
        let (start, w) = &self.rows[i];
        if *start >= 0 && *start as usize + w.len() <= values.len() {
            let s = *start as usize;
            return w.iter().zip(&values[s..s + w.len()]).map(|(a, b)| a * b).sum();
        }
        let n = self.n as isize;
        w.iter()
            .enumerate()
            .map(|(k, wk)| {
                let mut idx = start + k as isize;
                if self.periodic {
                    idx = idx.rem_euclid(n);
                }
                wk * values[idx as usize]
            })
            .sum()
    }

    pub fn apply(&self, values: &[f64]) -> Vec<f64> {
        let mut out = alloc::vec![0.0; self.n];
        self.apply_into(values, &mut out);
        out
    }

    pub fn apply_into(&self, values: &[f64], out: &mut [f64]) {
        let n = self.n;
        let half = self.centered.len() / 2;
        if n < 2 * half + 1 {
            for (i, o) in out.iter_mut().enumerate() {
                *o = self.apply_at(values, i);
            }
            return;
        }
        // band of centered rows, accumulated weight by weight in row order
        let band = &mut out[half..n - half];
        band.fill(0.0);
        for (k, wk) in self.centered.iter().enumerate() {
            for (o, v) in band.iter_mut().zip(&values[k..k + n - 2 * half]) {
                *o += wk * v;
            }
        }
        for i in (0..half).chain(n - half..n) {
            out[i] = self.apply_at(values, i);
        }
    }
}

/// Integrals of a sampled function over each mesh cell, 4th-order accurate.
///
/// Each cell uses the cubic through four neighbouring nodes; near interval
/// ends the window is shifted inwards.
pub fn cell_integrals(mesh: &Mesh, values: &[f64]) -> Result<Vec<f64>, ProfileError> {
    let n = values.len();
    let dr = mesh.spacing();
    let cells = if mesh.is_periodic() { n } else { n - 1 };
    if n < 4 {
        return Err(ProfileError::MeshTooSmall { n, needed: 4 });
    }
    const INTERIOR: [f64; 4] = [-1.0, 13.0, 13.0, -1.0];
    const LEFT: [f64; 4] = [9.0, 19.0, -5.0, 1.0];
    const RIGHT: [f64; 4] = [1.0, -5.0, 19.0, 9.0];
    let mut out = Vec::with_capacity(cells);
    for i in 0..cells {
        let (start, w): (isize, &[f64; 4]) = if mesh.is_periodic() {
            (i as isize - 1, &INTERIOR)
        } else if i == 0 {
            (0, &LEFT)
        } else if i + 2 >= n {
            (n as isize - 4, &RIGHT)
        } else {
            (i as isize - 1, &INTERIOR)
        };
        let s: f64 = w
            .iter()
            .enumerate()
            .map(|(k, wk)| wk * values[(start + k as isize).rem_euclid(n as isize) as usize])
            .sum();
        out.push(s * dr / 24.0);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::Domain;

    #[test]
    fn classic_weights() {
        let nodes = [-2.0, -1.0, 0.0, 1.0, 2.0];
        let w1 = fornberg_weights(0.0, &nodes, 1);
        let want = [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0];
        for (a, b) in w1.iter().zip(want) {
            assert!((a - b).abs() < 1e-14);
        }
        let w2 = fornberg_weights(0.0, &nodes, 2);
        let want = [-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0];
        for (a, b) in w2.iter().zip(want) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn one_sided_stencil_is_exact_on_quartics() {
        let mesh = Mesh::new(Domain::Interval { r0: 0.0, r1: 1.0 }, 11).unwrap();
        let v: Vec<f64> = mesh.nodes().map(|x| x.powi(4) - 2.0 * x).collect();
        for m in 1..=4 {
            let op = DiffOperator::new(&mesh, m, 4).unwrap();
            let d = op.apply(&v);
            for (i, x) in mesh.nodes().enumerate() {
                let exact = match m {
                    1 => 4.0 * x.powi(3) - 2.0,
                    2 => 12.0 * x * x,
                    3 => 24.0 * x,
                    _ => 24.0,
                };
                assert!((d[i] - exact).abs() < 1e-7, "m={m} i={i} {} {}", d[i], exact);
            }
        }
    }

    #[test]
    fn cell_integrals_of_cubic_are_exact() {
        let mesh = Mesh::new(Domain::Interval { r0: 0.0, r1: 2.0 }, 9).unwrap();
        let v: Vec<f64> = mesh.nodes().map(|x| x * x * x - x).collect();
        let total: f64 = cell_integrals(&mesh, &v).unwrap().iter().sum();
        assert!((total - (4.0 - 2.0)).abs() < 1e-13);
    }
}
