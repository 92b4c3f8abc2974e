use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{Datapath, FloatPath};
use crate::count::{NoTally, Tally, ABS2, CMUL, RCMUL};
use crate::error::{Error, Result};
use crate::{CMatrix, CVector};

/// Relative determinant below which a block is treated as singular.
pub const SINGULAR_RELATIVE_DET: f64 = 1e-12;
const REGULARIZATION: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GbcdConfig {
    /// UEs per block; must divide U.
    pub block_size: usize,
    /// Order blocks by ascending reciprocal SINR; natural order otherwise.
    pub sort: bool,
    /// Outer iterations K.
    pub iterations: usize,
}

impl Default for GbcdConfig {
    fn default() -> Self {
        Self {
            block_size: 2,
            sort: true,
            iterations: 3,
        }
    }
}

/// `G = H^H H`; the upper triangle is computed, the lower filled by conjugation.
pub fn gram<T: Tally>(h: &CMatrix, tally: &mut T) -> CMatrix {
    let (b, u) = h.shape();
    let mut g = DMatrix::zeros(u, u);
    for i in 0..u {
        let ci = h.column(i);
        g[(i, i)] = Complex64::new(ci.norm_squared(), 0.0);
        tally.add(ABS2 * b as u64);
        for j in i + 1..u {
            let v = ci.dotc(&h.column(j));
            tally.add(CMUL * b as u64);
            g[(i, j)] = v;
            g[(j, i)] = v.conj();
        }
    }
    g
}

/// `y_mf = H^H y`.
pub fn matched_filter<T: Tally>(h: &CMatrix, y: &CVector, tally: &mut T) -> CVector {
    tally.add(CMUL * (h.nrows() * h.ncols()) as u64);
    h.ad_mul(y)
}

fn checked_diag(g: &CMatrix) -> Result<Vec<f64>> {
    (0..g.nrows())
        .map(|u| {
            let d = g[(u, u)].re;
            if d > 0.0 && d.is_finite() {
                Ok(d)
            } else {
                Err(Error::DegenerateChannel(u))
            }
        })
        .collect()
}

/// `SINR_u^{-1} = lambda_u / G_uu^2 + N0 / (Es G_uu)` with
/// `lambda_u = sum_{i != u} |G_ui|^2`.
pub fn reciprocal_sinr(g: &CMatrix, n0: f64, es: f64) -> Result<Vec<f64>> {
    Ok(reciprocal_sinr_with(g, n0, es, &FloatPath, &mut NoTally)?.0)
}

/// Also returns the `|G_ui|^2` table, reused by the 2x2 inverses.
fn reciprocal_sinr_with<P: Datapath, T: Tally>(
    g: &CMatrix,
    n0: f64,
    es: f64,
    path: &P,
    tally: &mut T,
) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let u = g.nrows();
    let diag = checked_diag(g)?;
    let noise_ratio = n0 / es;
    let mut abs2 = DMatrix::zeros(u, u);
    let mut inv = Vec::with_capacity(u);
    for row in 0..u {
        let mut lambda = 0.0;
        for col in 0..u {
            if col != row {
                let a = g[(row, col)].norm_sqr();
                tally.add(ABS2);
                abs2[(row, col)] = a;
                lambda += a;
            }
        }
        let inv_g = path.reciprocal(diag[row]);
        let a = inv_g * inv_g;
        let b = noise_ratio * inv_g;
        tally.add(4);
        inv.push(a * lambda + b);
    }
    Ok((inv, abs2))
}

/// Stable ascending argsort of the reciprocal SINRs.
///
/// Uses a bitonic network when the length is a power of two, a comparison
/// sort otherwise. Ties break by UE index, so both paths agree.
pub fn sort_ues(inv_sinr: &[f64]) -> Vec<usize> {
    let n = inv_sinr.len();
    let mut idx: Vec<usize> = (0..n).collect();
    let less = |a: usize, b: usize| -> bool {
        match inv_sinr[a].total_cmp(&inv_sinr[b]) {
            std::cmp::Ordering::Less => true,
            std::cmp::Ordering::Equal => a < b,
            std::cmp::Ordering::Greater => false,
        }
    };
    if n.is_power_of_two() {
        let mut size = 2;
        while size <= n {
            let mut stride = size / 2;
            while stride > 0 {
                for i in 0..n {
                    let j = i ^ stride;
                    if j > i {
                        let ascending = i & size == 0;
                        if less(idx[j], idx[i]) == ascending {
                            idx.swap(i, j);
                        }
                    }
                }
                stride /= 2;
            }
            size *= 2;
        }
    } else {
        idx.sort_by(|&a, &b| inv_sinr[a].total_cmp(&inv_sinr[b]).then(a.cmp(&b)));
    }
    idx
}

/// Inverses of the diagonal Gram blocks, with the flag of each block that
/// needed regularization.
pub fn block_inverses(g: &CMatrix, blocks: &[Vec<usize>]) -> (Vec<CMatrix>, Vec<bool>) {
    let mut abs2 = DMatrix::zeros(g.nrows(), g.ncols());
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            abs2[(i, j)] = g[(i, j)].norm_sqr();
        }
    }
    block_inverses_with(g, blocks, &abs2, &FloatPath, &mut NoTally)
}

fn block_inverses_with<P: Datapath, T: Tally>(
    g: &CMatrix,
    blocks: &[Vec<usize>],
    abs2: &DMatrix<f64>,
    path: &P,
    tally: &mut T,
) -> (Vec<CMatrix>, Vec<bool>) {
    blocks
        .iter()
        .map(|a| {
            let sub = DMatrix::from_fn(a.len(), a.len(), |i, j| g[(a[i], a[j])]);
            match a.len() {
                1 => {
                    tally.add(1);
                    let d = sub[(0, 0)].re;
                    let flagged = d.abs() < f64::MIN_POSITIVE;
                    let d = if flagged { REGULARIZATION } else { d };
                    (DMatrix::from_element(1, 1, Complex64::new(path.reciprocal(d), 0.0)), flagged)
                }
                2 => inverse_2x2(&sub, abs2[(a[0], a[1])], path, tally),
                _ => inverse_dense(&sub, tally),
            }
        })
        .unzip()
}

fn inverse_2x2<P: Datapath, T: Tally>(
    sub: &CMatrix,
    off_abs2: f64,
    path: &P,
    tally: &mut T,
) -> (CMatrix, bool) {
    let (mut g11, mut g22) = (sub[(0, 0)].re, sub[(1, 1)].re);
    let g12 = sub[(0, 1)];
    let mut det = g11 * g22 - off_abs2;
    tally.add(1);
    let flagged = !(det.abs() > SINGULAR_RELATIVE_DET * (g11 * g22).abs()) || !det.is_finite();
    if flagged {
        let eps = REGULARIZATION * 0.5 * (g11 + g22);
        g11 += eps;
        g22 += eps;
        det = g11 * g22 - off_abs2;
    }
    let inv_det = path.reciprocal(det);
    tally.add(1);
    let k11 = g22 * inv_det;
    let k22 = g11 * inv_det;
    let k12 = -g12 * inv_det;
    tally.add(2 + RCMUL);
    let k = DMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(k11, 0.0),
            k12,
            k12.conj(),
            Complex64::new(k22, 0.0),
        ],
    );
    (k, flagged)
}

fn inverse_dense<T: Tally>(sub: &CMatrix, tally: &mut T) -> (CMatrix, bool) {
    let n = sub.nrows();
    tally.add(CMUL * (n * n * n) as u64);
    if let Some(inv) = sub.clone().try_inverse() {
        if inv.iter().all(|x| x.re.is_finite() && x.im.is_finite()) {
            return (inv, false);
        }
    }
    let trace: f64 = (0..n).map(|i| sub[(i, i)].re).sum();
    let eps = REGULARIZATION * trace / n as f64;
    let reg = sub + CMatrix::identity(n, n) * Complex64::new(eps, 0.0);
    (reg.try_inverse().unwrap_or_else(|| CMatrix::identity(n, n)), true)
}

/// Channel-dependent quantities shared by all transmissions of a block.
#[derive(Debug, Clone, PartialEq)]
pub struct Preprocessed {
    pub gram: CMatrix,
    pub inv_sinr: Vec<f64>,
    /// UE processing order.
    pub order: Vec<usize>,
    pub blocks: Vec<Vec<usize>>,
    pub block_inverses: Vec<CMatrix>,
    /// Blocks whose inverse was regularized.
    pub regularized: Vec<bool>,
    pub n0: f64,
    pub es: f64,
}

impl Preprocessed {
    pub fn new(h: &CMatrix, n0: f64, es: f64, config: &GbcdConfig) -> Result<Self> {
        Self::with(h, n0, es, config, &FloatPath, &mut NoTally)
    }

    pub fn with<P: Datapath, T: Tally>(
        h: &CMatrix,
        n0: f64,
        es: f64,
        config: &GbcdConfig,
        path: &P,
        tally: &mut T,
    ) -> Result<Self> {
        let u = h.ncols();
        let l = config.block_size;
        if l == 0 || u % l != 0 {
            return Err(Error::InvalidDimensions(format!(
                "U = {u} is not divisible by block size L = {l}"
            )));
        }
        let mut g = gram(h, tally);
        g.iter_mut().for_each(|x| *x = path.gram_entry(*x));
        let (inv_sinr, abs2) = reciprocal_sinr_with(&g, n0, es, path, tally)?;
        let order = if config.sort {
            sort_ues(&inv_sinr)
        } else {
            (0..u).collect()
        };
        let blocks: Vec<Vec<usize>> = order.chunks(l).map(<[usize]>::to_vec).collect();
        let (block_inverses, regularized) = block_inverses_with(&g, &blocks, &abs2, path, tally);
        if regularized.iter().any(|&f| f) {
            log::debug!("regularized {} singular Gram block(s)", regularized.iter().filter(|&&f| f).count());
        }
        Ok(Self {
            gram: g,
            inv_sinr,
            order,
            blocks,
            block_inverses,
            regularized,
            n0,
            es,
        })
    }

    pub fn users(&self) -> usize {
        self.gram.nrows()
    }

    pub fn gram_diag(&self) -> Vec<f64> {
        (0..self.users()).map(|u| self.gram[(u, u)].re).collect()
    }
}

#[allow(dead_code)]
pub(crate) fn zeros(n: usize) -> CVector {
    DVector::zeros(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use crate::testutil::channel as channel_for_tests;
    use rand::Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn gram_of_identity() {
        let h = CMatrix::identity(4, 4);
        assert_eq!(gram(&h, &mut NoTally), CMatrix::identity(4, 4));
    }

    #[test]
    fn gram_of_orthogonal_columns() {
        let h = CMatrix::identity(3, 3) * c(0.0, 2.0);
        let g = gram(&h, &mut NoTally);
        assert_eq!(g, CMatrix::identity(3, 3) * c(4.0, 0.0));
    }

    #[test]
    fn gram_matches_naive_triple_loop() {
        let h = channel_for_tests(6, 3, 1);
        let g = gram(&h, &mut NoTally);
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = c(0.0, 0.0);
                for b in 0..6 {
                    acc += h[(b, i)].conj() * h[(b, j)];
                }
                assert!((g[(i, j)] - acc).norm() < 1e-12);
            }
            assert_eq!(g[(i, i)].im, 0.0);
        }
    }

    #[test]
    fn matched_filter_cases() {
        let h = CMatrix::identity(4, 2);
        let y = DVector::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let y_mf = matched_filter(&h, &y, &mut NoTally);
        assert_eq!(y_mf.as_slice(), &[c(0.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(matched_filter(&h, &zeros(4), &mut NoTally), zeros(2));

        let h = channel_for_tests(5, 3, 2);
        let y = DVector::from_fn(5, |i, _| c(i as f64, -0.5 * i as f64));
        let y_mf = matched_filter(&h, &y, &mut NoTally);
        for u in 0..3 {
            let mut acc = c(0.0, 0.0);
            for b in 0..5 {
                acc += h[(b, u)].conj() * y[b];
            }
            assert!((y_mf[u] - acc).norm() < 1e-12);
        }
    }

    #[test]
    fn reciprocal_sinr_cases() {
        let g = CMatrix::identity(3, 3);
        for v in reciprocal_sinr(&g, 0.1, 1.0).unwrap() {
            assert!((v - 0.1).abs() < 1e-15);
        }
        let g = DMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)]);
        for v in reciprocal_sinr(&g, 1.0, 1.0).unwrap() {
            assert!((v - 0.75).abs() < 1e-15);
        }
        let mut bad = CMatrix::identity(2, 2);
        bad[(1, 1)] = c(0.0, 0.0);
        assert_eq!(reciprocal_sinr(&bad, 1.0, 1.0), Err(Error::DegenerateChannel(1)));
    }

    #[test]
    fn sinr_order_invariant_to_channel_scale() {
        // Noiseless: both terms scale identically, so the argsort cannot move.
        for seed in 0..20 {
            let h = channel_for_tests(8, 4, seed);
            let g1 = gram(&h, &mut NoTally);
            let g2 = gram(&(&h * c(3.0, 0.0)), &mut NoTally);
            let a = sort_ues(&reciprocal_sinr(&g1, 0.0, 1.0).unwrap());
            let b = sort_ues(&reciprocal_sinr(&g2, 0.0, 1.0).unwrap());
            assert_eq!(a, b);
        }
    }

    #[test]
    fn sort_cases() {
        assert_eq!(sort_ues(&[0.1, 0.2, 0.3, 0.4]), vec![0, 1, 2, 3]);
        assert_eq!(sort_ues(&[1.0; 8]), (0..8).collect::<Vec<_>>());
        assert_eq!(sort_ues(&[1.0; 6]), (0..6).collect::<Vec<_>>());
        assert_eq!(sort_ues(&[0.4, 0.1, 0.1, 0.3]), vec![1, 2, 3, 0]);
        let mut rng = seeded(5);
        for n in [2usize, 3, 4, 7, 8, 16, 32] {
            for _ in 0..50 {
                let v: Vec<f64> = (0..n).map(|_| (rng.random_range(0..5) as f64) * 0.25).collect();
                let mut oracle: Vec<usize> = (0..n).collect();
                oracle.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap());
                assert_eq!(sort_ues(&v), oracle);
            }
        }
    }

    #[test]
    fn block_inverse_cases() {
        let blocks = vec![vec![0, 1]];
        let (k, flags) = block_inverses(&CMatrix::identity(2, 2), &blocks);
        assert_eq!(k[0], CMatrix::identity(2, 2));
        assert!(!flags[0]);

        let g = DMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(4.0, 0.0)]);
        let (k, _) = block_inverses(&g, &blocks);
        assert_eq!(k[0], DMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.25, 0.0)]));
    }

    #[test]
    fn block_inverse_matches_adjugate_formula() {
        let mut rng = seeded(17);
        for _ in 0..200 {
            let a: f64 = rng.random_range(0.5..5.0);
            let d: f64 = rng.random_range(0.5..5.0);
            let off = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * (a * d).sqrt() * 0.9;
            let g = DMatrix::from_row_slice(2, 2, &[c(a, 0.0), off, off.conj(), c(d, 0.0)]);
            let (k, flags) = block_inverses(&g, &[vec![0, 1]]);
            assert!(!flags[0]);
            // adj(G) / det(G)
            let det = g[(0, 0)] * g[(1, 1)] - g[(0, 1)] * g[(1, 0)];
            let adj = DMatrix::from_row_slice(2, 2, &[g[(1, 1)], -g[(0, 1)], -g[(1, 0)], g[(0, 0)]]);
            for (x, y) in k[0].iter().zip((adj / det).iter()) {
                assert!((x - y).norm() < 1e-12 * (1.0 + y.norm()));
            }
            let prod = &k[0] * &g;
            assert!((prod - CMatrix::identity(2, 2)).norm() < 1e-8);
        }
    }

    #[test]
    fn singular_block_is_regularized_and_flagged() {
        let g = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(1.0, 0.0)]);
        let (k, flags) = block_inverses(&g, &[vec![0, 1]]);
        assert!(flags[0]);
        assert!(k[0].iter().all(|x| x.re.is_finite() && x.im.is_finite()));
    }

    #[test]
    fn generic_block_size() {
        let h = channel_for_tests(12, 6, 3);
        for l in [1, 2, 3, 6] {
            let cfg = GbcdConfig { block_size: l, sort: true, iterations: 1 };
            let p = Preprocessed::new(&h, 0.1, 1.0, &cfg).unwrap();
            assert_eq!(p.blocks.len(), 6 / l);
            for (a, k) in p.blocks.iter().zip(&p.block_inverses) {
                let sub = DMatrix::from_fn(l, l, |i, j| p.gram[(a[i], a[j])]);
                assert!((k * sub - CMatrix::identity(l, l)).norm() < 1e-8);
            }
        }
        let cfg = GbcdConfig { block_size: 4, sort: true, iterations: 1 };
        assert!(Preprocessed::new(&h, 0.1, 1.0, &cfg).is_err());
    }

    #[test]
    fn preprocessing_invariants() {
        for seed in 0..30 {
            let h = channel_for_tests(16, 8, seed);
            let p = Preprocessed::new(&h, 0.3, 1.0, &GbcdConfig::default()).unwrap();
            let g = &p.gram;
            assert!((g - g.adjoint()).norm() <= 1e-10 * g.norm());
            let mut seen = p.order.clone();
            seen.sort_unstable();
            assert_eq!(seen, (0..8).collect::<Vec<_>>());
            for w in p.order.windows(2) {
                assert!(p.inv_sinr[w[0]] <= p.inv_sinr[w[1]]);
            }
        }
    }
}
