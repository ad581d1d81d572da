//! Dense toy problems with closed-form oracles, shared by the test targets.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use morozov::regcore::{AssimilationOperator, NoisyData};

pub struct Toy {
    pub gram_v: DMatrix<f64>,
    pub gram_h: DMatrix<f64>,
    /// Coordinates of `Au` stacked as `(Bu, Cu)`.
    pub a: DMatrix<f64>,
    pub g: DVector<f64>,
    pub delta: f64,
    pub op: AssimilationOperator,
    pub data: NoisyData,
    pub n_m: usize,
}

pub fn random_spd(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let q = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    &q * q.transpose() + DMatrix::identity(n, n) * (0.5 * n as f64)
}

pub fn block_diag(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (m, o) = (a.nrows(), b.nrows());
    let mut h = DMatrix::zeros(m + o, m + o);
    h.view_mut((0, 0), (m, m)).copy_from(a);
    h.view_mut((m, m), (o, o)).copy_from(b);
    h
}

/// Random injective operator (at most 8 x 5) with admissible data; `delta`
/// sits 30% of the way from `||g_perp||` to `||g||`.
pub fn toy(seed: u64) -> Toy {
    toy_at(seed, 0.3)
}

pub fn toy_at(seed: u64, position: f64) -> Toy {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_v = rng.random_range(2..=5);
    let rows = rng.random_range(n_v + 1..=8);
    let n_m = rng.random_range(1..rows);
    let n_o = rows - n_m;
    let gram_v = random_spd(n_v, &mut rng);
    let gram_m = random_spd(n_m, &mut rng);
    let gram_o = random_spd(n_o, &mut rng);
    let a = DMatrix::from_fn(rows, n_v, |_, _| rng.random_range(-1.0..1.0));
    let a_b = a.rows(0, n_m).into_owned();
    let a_c = a.rows(n_m, n_o).into_owned();
    let op = AssimilationOperator::from_dense(&gram_v, &gram_m, &gram_o, &a_b, &a_c).unwrap();
    let u0 = DVector::from_fn(n_v, |_, _| rng.random_range(-1.0..1.0));
    let w = DVector::from_fn(rows, |_, _| rng.random_range(-0.3..0.3));
    let g = &a * u0 + w;
    let gram_h = block_diag(&gram_m, &gram_o);
    let mut toy = Toy {
        gram_v,
        gram_h,
        a,
        g: g.clone(),
        delta: 0.0,
        op,
        data: NoisyData::new(g.rows(0, n_m).into_owned(), g.rows(n_m, n_o).into_owned(), 1.0).unwrap(),
        n_m,
    };
    let (_, _, perp_sq) = toy.spectrum();
    let g_norm = toy.g.dot(&(&toy.gram_h * &toy.g)).sqrt();
    let perp = perp_sq.sqrt();
    toy.delta = perp + position * (g_norm - perp);
    toy.data.delta = toy.delta;
    toy
}

impl Toy {
    /// Singular values and range coefficients of the whitened operator, and
    /// the squared norm of the range complement of `g`.
    pub fn spectrum(&self) -> (Vec<f64>, Vec<f64>, f64) {
        let lh = self.gram_h.clone().cholesky().unwrap().l();
        let lv = self.gram_v.clone().cholesky().unwrap().l();
        let lv_inv_t = lv.transpose().try_inverse().unwrap();
        let at = lh.transpose() * &self.a * lv_inv_t;
        let gt = lh.transpose() * &self.g;
        let svd = at.svd(true, false);
        let u = svd.u.unwrap();
        let s: Vec<f64> = svd.singular_values.iter().copied().collect();
        let c: Vec<f64> = (0..s.len()).map(|i| u.column(i).dot(&gt)).collect();
        let perp_sq = gt.norm_squared() - c.iter().map(|x| x * x).sum::<f64>();
        (s, c, perp_sq.max(0.0))
    }

    pub fn discrepancy_sq(&self, eps: f64, spec: &(Vec<f64>, Vec<f64>, f64)) -> f64 {
        let (s, c, perp_sq) = spec;
        perp_sq + s.iter().zip(c).map(|(s, c)| (eps / (s * s + eps) * c).powi(2)).sum::<f64>()
    }

    /// The discrepancy-principle parameter from a log-uniform scan, refined by
    /// linear interpolation between the bracketing grid points.
    pub fn scan_root(&self, points: usize) -> f64 {
        let spec = self.spectrum();
        let (lo, hi) = (-16.0 * 10f64.ln(), 16.0 * 10f64.ln());
        let target = self.delta * self.delta;
        let f = |t: f64| self.discrepancy_sq(t.exp(), &spec) - target;
        let mut t_prev = lo;
        let mut f_prev = f(lo);
        for k in 1..points {
            let t = lo + (hi - lo) * k as f64 / (points - 1) as f64;
            let ft = f(t);
            if f_prev <= 0.0 && ft >= 0.0 {
                return (t_prev + (t - t_prev) * (-f_prev) / (ft - f_prev)).exp();
            }
            t_prev = t;
            f_prev = ft;
        }
        panic!("no sign change on the scan grid");
    }

    /// The same root by bisection to full precision.
    pub fn exact_root(&self) -> f64 {
        let spec = self.spectrum();
        let f = |t: f64| self.discrepancy_sq(t.exp(), &spec) - self.delta * self.delta;
        let (mut a, mut b) = (-40.0, 40.0);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if f(m) < 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        (0.5 * (a + b)).exp()
    }

    pub fn tikhonov(&self, eps: f64) -> DVector<f64> {
        let at_h = self.a.transpose() * &self.gram_h;
        let lhs = &at_h * &self.a + &self.gram_v * eps;
        lhs.lu().solve(&(at_h * &self.g)).unwrap()
    }

    pub fn v_norm(&self, u: &DVector<f64>) -> f64 {
        u.dot(&(&self.gram_v * u)).sqrt()
    }
}
