//! Adam optimizer with coupled L2 weight decay.

use ndarray::{ArrayD, ArrayViewD, ArrayViewMutD, Zip};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// Added to the gradient as `weight_decay · p` for decayed parameters.
    pub weight_decay: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { lr: 0.01, beta1: 0.9, beta2: 0.999, eps: 1e-8, weight_decay: 0.0 }
    }
}

/// A parameter tensor handed to the optimizer.
pub struct Param<'a, T> {
    pub value: ArrayViewMutD<'a, T>,
    pub grad: ArrayViewD<'a, T>,
    pub decay: bool,
}

#[derive(Clone, Debug)]
pub struct Adam<T> {
    pub config: AdamConfig,
    step: i32,
    moments: Vec<(ArrayD<T>, ArrayD<T>)>,
}

impl<T: Scalar> Adam<T> {
    pub fn new(config: AdamConfig) -> Self {
        Self { config, step: 0, moments: Vec::new() }
    }

    pub fn steps(&self) -> i32 {
        self.step
    }

    /// One update. The parameter list must keep the same order and shapes
    /// across calls.
    pub fn step(&mut self, params: &mut [Param<'_, T>]) -> Result<()> {
        if self.moments.is_empty() {
            self.moments = params
                .iter()
                .map(|p| (ArrayD::zeros(p.value.raw_dim()), ArrayD::zeros(p.value.raw_dim())))
                .collect();
        }
        if self.moments.len() != params.len() {
            return Err(Error::DimensionMismatch(format!(
                "optimizer tracks {} tensors, got {}",
                self.moments.len(),
                params.len()
            )));
        }
        self.step += 1;
        let c = &self.config;
        let (b1, b2) = (T::lit(c.beta1), T::lit(c.beta2));
        let bc1 = T::one() - b1.powi(self.step);
        let bc2 = T::one() - b2.powi(self.step);
        let (lr, eps, wd) = (T::lit(c.lr), T::lit(c.eps), T::lit(c.weight_decay));
        for (p, (m, v)) in params.iter_mut().zip(&mut self.moments) {
            if p.value.shape() != m.shape() || p.grad.shape() != m.shape() {
                return Err(Error::DimensionMismatch("parameter shape changed between steps".into()));
            }
            let decay = if p.decay { wd } else { T::zero() };
            Zip::from(&mut p.value).and(&p.grad).and(m).and(v).for_each(|w, &g, m, v| {
                let g = g + decay * *w;
                *m = b1 * *m + (T::one() - b1) * g;
                *v = b2 * *v + (T::one() - b2) * g * g;
                let mh = *m / bc1;
                let vh = *v / bc2;
                *w -= lr * mh / (vh.sqrt() + eps);
            });
        }
        Ok(())
    }
}
