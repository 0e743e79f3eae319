//! Squared loss on the observed entries, its gradient, exact line search and
//! the NMSE metric.
//!
//! Every routine works on vectors indexed by the unique observed positions
//! `U`. The `*_scaled` variants evaluate at `scale * x`, which lets the solver
//! keep its iterate in the unit polytope while the loss sees `lambda * x`.

use crate::error::{Error, Result};
use crate::tensor::ObservedData;

/// Aggregated loss data: per-position sums and counts plus the ball radius.
#[derive(Debug, Clone)]
pub struct LossContext {
    y_sum: Vec<f64>,
    y_mean: Vec<f64>,
    mult: Vec<f64>,
    n: f64,
    /// `sum_i y_i^2 - sum_t y_sum_t^2 / mult_t`: the part of the loss no
    /// iterate can remove (spread of duplicates around their mean).
    irreducible: f64,
    lambda: f64,
}

impl LossContext {
    pub fn new(data: &ObservedData, lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be positive and finite, got {lambda}"
            )));
        }
        let mult: Vec<f64> = data.multiplicity().iter().map(|&m| m as f64).collect();
        let y_sum = data.y_sum().to_vec();
        let y_mean: Vec<f64> = y_sum.iter().zip(&mult).map(|(s, m)| s / m).collect();
        let mut irreducible = 0.0;
        for (i, s) in data.samples().iter().enumerate() {
            let r = s.value - y_mean[data.slot_of_sample(i)];
            irreducible += r * r;
        }
        Ok(Self {
            y_sum,
            y_mean,
            mult,
            n: data.n().max(1) as f64,
            irreducible,
            lambda,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn u(&self) -> usize {
        self.mult.len()
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    fn check_len(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.u() {
            return Err(Error::DimensionMismatch {
                expected: self.u(),
                got: v.len(),
            });
        }
        Ok(())
    }

    /// Loss at `scale * x`.
    pub fn loss_scaled(&self, x: &[f64], scale: f64) -> f64 {
        let fit: f64 = x
            .iter()
            .zip(&self.y_mean)
            .zip(&self.mult)
            .map(|((&xi, &ym), &m)| {
                let r = scale * xi - ym;
                m * r * r
            })
            .sum();
        ((fit + self.irreducible) / self.n).max(0.0)
    }

    /// Gradient with respect to the tensor entries, evaluated at `scale * x`.
    pub fn gradient_scaled_into(&self, x: &[f64], scale: f64, out: &mut [f64]) {
        let k = 2.0 / self.n;
        for (((o, &xi), &ys), &m) in out.iter_mut().zip(x).zip(&self.y_sum).zip(&self.mult) {
            *o = k * (m * scale * xi - ys);
        }
    }

    /// Minimizer over `eta` in `[0, 1]` of the loss at `scale * (from + eta * dir)`.
    /// A zero-length direction yields 0.
    pub fn line_search_scaled(&self, from: &[f64], dir: &[f64], scale: f64) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for (((&f, &d), &ys), &m) in from.iter().zip(dir).zip(&self.y_sum).zip(&self.mult) {
            let d = scale * d;
            num += d * (ys - m * scale * f);
            den += m * d * d;
        }
        if den <= 0.0 {
            return 0.0;
        }
        (num / den).clamp(0.0, 1.0)
    }
}

/// `(1/n) sum_i (y_i - iterate_{x_i})^2`.
pub fn loss(iterate: &[f64], ctx: &LossContext) -> Result<f64> {
    ctx.check_len(iterate)?;
    Ok(ctx.loss_scaled(iterate, 1.0))
}

/// `c_t = (2/n)(mult_t * iterate_t - y_sum_t)`.
pub fn gradient(iterate: &[f64], ctx: &LossContext) -> Result<Vec<f64>> {
    ctx.check_len(iterate)?;
    let mut out = vec![0.0; iterate.len()];
    ctx.gradient_scaled_into(iterate, 1.0, &mut out);
    Ok(out)
}

/// Exact minimization of the loss on the segment `[from, to]`.
pub fn exact_line_search(from: &[f64], to: &[f64], ctx: &LossContext) -> Result<(f64, Vec<f64>)> {
    ctx.check_len(from)?;
    ctx.check_len(to)?;
    let dir: Vec<f64> = to.iter().zip(from).map(|(t, f)| t - f).collect();
    let eta = ctx.line_search_scaled(from, &dir, 1.0);
    let point = from.iter().zip(&dir).map(|(f, d)| f + eta * d).collect();
    Ok((eta, point))
}

/// `||estimate - truth||_F^2 / ||truth||_F^2`.
pub fn nmse(estimate: &[f64], truth: &[f64]) -> Result<f64> {
    if estimate.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            got: estimate.len(),
        });
    }
    let den: f64 = truth.iter().map(|t| t * t).sum();
    if den == 0.0 {
        return Err(Error::ZeroNormTruth);
    }
    let num: f64 = estimate
        .iter()
        .zip(truth)
        .map(|(e, t)| (e - t) * (e - t))
        .sum();
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{Sample, Shape};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_data(rng: &mut ChaCha8Rng, dims: &[usize], n: usize) -> ObservedData {
        let shape = Shape::new(dims.to_vec()).unwrap();
        let samples = (0..n)
            .map(|_| Sample {
                index: dims.iter().map(|&r| rng.gen_range(0..r as u32)).collect(),
                value: rng.gen_range(-1.0..2.0),
            })
            .collect();
        ObservedData::new(shape, samples).unwrap()
    }

    // Direct per-sample loss, independent of the aggregated form.
    fn naive_loss(data: &ObservedData, iterate: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (i, s) in data.samples().iter().enumerate() {
            let r = s.value - iterate[data.slot_of_sample(i)];
            acc += r * r;
        }
        acc / data.n() as f64
    }

    #[test]
    fn loss_examples() {
        let shape = Shape::new(vec![2, 2]).unwrap();
        let one = ObservedData::new(
            shape.clone(),
            vec![Sample {
                index: vec![1, 0],
                value: 1.0,
            }],
        )
        .unwrap();
        let ctx = LossContext::new(&one, 1.0).unwrap();
        assert_eq!(loss(&[0.0], &ctx).unwrap(), 1.0);
        assert_eq!(loss(&[1.0], &ctx).unwrap(), 0.0);
        assert_eq!(gradient(&[0.0], &ctx).unwrap(), vec![-2.0]);
        assert!(loss(&[0.0, 1.0], &ctx).is_err());
        assert!(gradient(&[], &ctx).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let samples = vec![
            Sample { index: vec![0, 1], value: 0.3 },
            Sample { index: vec![1, 1], value: -0.7 },
            Sample { index: vec![0, 1], value: 0.9 },
        ];
        let d = ObservedData::new(shape, samples).unwrap();
        let ctx = LossContext::new(&d, 1.0).unwrap();
        let it: Vec<f64> = (0..d.u()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let a = loss(&it, &ctx).unwrap();
        assert!((a - naive_loss(&d, &it)).abs() <= 1e-12 * a.abs().max(1e-300));
    }

    #[test]
    fn perfect_fit_has_zero_loss_and_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let d = random_data(&mut rng, &[3, 4], 9);
        // Without duplicates the per-position mean is an exact interpolant.
        let ctx = LossContext::new(&d, 1.0).unwrap();
        let fit: Vec<f64> = d
            .y_sum()
            .iter()
            .zip(d.multiplicity())
            .map(|(s, &m)| s / m as f64)
            .collect();
        if d.u() == d.n() {
            assert_eq!(loss(&fit, &ctx).unwrap(), 0.0);
        }
        let g = gradient(&fit, &ctx).unwrap();
        assert!(g.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn aggregated_loss_matches_naive_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let d = random_data(&mut rng, &[3, 2, 2], 20);
            let ctx = LossContext::new(&d, 1.0).unwrap();
            let it: Vec<f64> = (0..d.u()).map(|_| rng.gen_range(0.0..1.5)).collect();
            let a = loss(&it, &ctx).unwrap();
            let b = naive_loss(&d, &it);
            assert!((a - b).abs() <= 1e-12 * b, "{a} vs {b}");
        }
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let h = 1e-6;
        for _ in 0..20 {
            let d = random_data(&mut rng, &[4, 3, 2], 30);
            let ctx = LossContext::new(&d, 1.0).unwrap();
            let it: Vec<f64> = (0..d.u()).map(|_| rng.gen_range(0.0..1.0)).collect();
            let g = gradient(&it, &ctx).unwrap();
            for t in 0..d.u() {
                let mut p = it.clone();
                let mut m = it.clone();
                p[t] += h;
                m[t] -= h;
                let fd = (naive_loss(&d, &p) - naive_loss(&d, &m)) / (2.0 * h);
                let rel = (fd - g[t]).abs() / g[t].abs().max(1e-3);
                assert!(rel < 1e-6, "t={t}: fd {fd} analytic {}", g[t]);
            }
        }
    }

    #[test]
    fn line_search_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let d = random_data(&mut rng, &[3, 3], 6);
        let ctx = LossContext::new(&d, 1.0).unwrap();
        let from: Vec<f64> = (0..d.u()).map(|_| rng.gen_range(0.0..1.0)).collect();
        let (eta, p) = exact_line_search(&from, &from, &ctx).unwrap();
        assert_eq!(eta, 0.0);
        assert_eq!(p, from);

        let zero = vec![0.0; d.u()];
        let interp: Vec<f64> = d
            .y_sum()
            .iter()
            .zip(d.multiplicity())
            .map(|(s, &m)| s / m as f64)
            .collect();
        let (eta, _) = exact_line_search(&zero, &interp, &ctx).unwrap();
        assert!((eta - 1.0).abs() < 1e-12);
    }

    #[test]
    fn line_search_beats_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        for _ in 0..30 {
            let d = random_data(&mut rng, &[4, 4], 25);
            let ctx = LossContext::new(&d, 1.0).unwrap();
            let from: Vec<f64> = (0..d.u()).map(|_| rng.gen_range(0.0..1.0)).collect();
            let to: Vec<f64> = (0..d.u()).map(|_| rng.gen_range(0.0..1.0)).collect();
            let (_, best) = exact_line_search(&from, &to, &ctx).unwrap();
            let best_loss = naive_loss(&d, &best);
            assert!(best_loss <= naive_loss(&d, &from).min(naive_loss(&d, &to)) + 1e-15);
            for i in 0..=100 {
                let eta = i as f64 / 100.0;
                let p: Vec<f64> = from.iter().zip(&to).map(|(f, t)| f + eta * (t - f)).collect();
                assert!(best_loss <= naive_loss(&d, &p) + 1e-14);
            }
        }
    }

    #[test]
    fn nmse_examples() {
        let truth = [1.0, 0.0, 0.0, 1.0];
        assert_eq!(nmse(&truth, &truth).unwrap(), 0.0);
        assert_eq!(nmse(&[0.0; 4], &truth).unwrap(), 1.0);
        assert_eq!(nmse(&[1.0, 0.0, 0.0, 0.0], &truth).unwrap(), 0.5);
        assert!(matches!(nmse(&[0.0; 4], &[0.0; 4]), Err(Error::ZeroNormTruth)));
        assert!(nmse(&[0.0; 3], &truth).is_err());
    }

    #[test]
    fn scaled_evaluation_matches_explicit_scaling() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let d = random_data(&mut rng, &[5, 2], 12);
        let ctx = LossContext::new(&d, 3.0).unwrap();
        let x: Vec<f64> = (0..d.u()).map(|_| rng.gen_range(0.0..1.0)).collect();
        let sx: Vec<f64> = x.iter().map(|v| 2.5 * v).collect();
        assert!((ctx.loss_scaled(&x, 2.5) - loss(&sx, &ctx).unwrap()).abs() < 1e-14);
        assert!(LossContext::new(&d, 0.0).is_err());
    }
}
