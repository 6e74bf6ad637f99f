use crate::error::{Error, Result};
use crate::neural::params::ParamSet;
use crate::numerics::RngState;

#[derive(Clone, Debug, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Full passes over the training set.
    pub epochs: usize,
    pub batch_size: usize,
    /// Seed for the per-epoch shuffles.
    pub seed: u64,
    /// Optional cap on the total number of Adam steps, for reading a budget
    /// as parameter updates instead of epochs.
    pub max_steps: Option<usize>,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            epochs: 30,
            batch_size: 64,
            seed: 0,
            max_steps: None,
        }
    }
}

impl AdamConfig {
    pub fn validate(&self) -> Result<()> {
        let in_unit = |b: f64| b > 0.0 && b < 1.0;
        if !(self.learning_rate >= 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::invalid(format!(
                "learning_rate must be finite and non-negative, got {}",
                self.learning_rate
            )));
        }
        if !in_unit(self.beta1) || !in_unit(self.beta2) {
            return Err(Error::invalid(format!(
                "betas must lie in (0, 1), got {} and {}",
                self.beta1, self.beta2
            )));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::invalid("epsilon must be positive"));
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::invalid("epochs and batch_size must be at least 1"));
        }
        Ok(())
    }
}

struct Moments {
    first: Vec<Vec<f64>>,
    second: Vec<Vec<f64>>,
    step: i32,
}

impl Moments {
    fn new<P: ParamSet>(p: &P) -> Self {
        let shape: Vec<Vec<f64>> = p.tensors().iter().map(|t| vec![0.0; t.len()]).collect();
        Moments {
            first: shape.clone(),
            second: shape,
            step: 0,
        }
    }

    fn apply<P: ParamSet>(&mut self, params: &mut P, grad: &P, cfg: &AdamConfig) {
        self.step += 1;
        let c1 = 1.0 - cfg.beta1.powi(self.step);
        let c2 = 1.0 - cfg.beta2.powi(self.step);
        let grads = grad.tensors();
        for (((theta, g), m), v) in params
            .tensors_mut()
            .into_iter()
            .zip(grads)
            .zip(&mut self.first)
            .zip(&mut self.second)
        {
            for i in 0..theta.len() {
                m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
                v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
                let m_hat = m[i] / c1;
                let v_hat = v[i] / c2;
                theta[i] -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.epsilon);
            }
        }
    }
}

/// Mini-batch Adam with bias correction.
///
/// Each epoch reshuffles the data with a stream derived from `(cfg.seed,
/// epoch)`, so the run is reproducible bit for bit. Returns the trained
/// parameters and the mean batch loss of every epoch (weighted by batch size).
pub fn adam_train<P, D, F>(
    params: P,
    data: &[D],
    cfg: &AdamConfig,
    mut loss_grad: F,
) -> Result<(P, Vec<f64>)>
where
    P: ParamSet,
    F: FnMut(&P, &[&D]) -> Result<(f64, P)>,
{
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::invalid("training set is empty"));
    }
    let mut params = params;
    let mut moments = Moments::new(&params);
    let mut curve = Vec::with_capacity(cfg.epochs);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut steps = 0usize;

    'epochs: for epoch in 0..cfg.epochs {
        let mut rng = RngState::derived(cfg.seed, &[epoch as u64]);
        rng.shuffle(&mut order);
        let mut weighted = 0.0;
        let mut seen = 0usize;
        for chunk in order.chunks(cfg.batch_size) {
            if cfg.max_steps.is_some_and(|cap| steps >= cap) {
                if seen > 0 {
                    curve.push(weighted / seen as f64);
                }
                break 'epochs;
            }
            let batch: Vec<&D> = chunk.iter().map(|&i| &data[i]).collect();
            let (loss, grad) = loss_grad(&params, &batch)?;
            if !loss.is_finite() || !grad.is_finite() {
                return Err(Error::Diverged { epoch, loss });
            }
            moments.apply(&mut params, &grad, cfg);
            steps += 1;
            weighted += loss * batch.len() as f64;
            seen += batch.len();
        }
        let mean = weighted / seen as f64;
        if !mean.is_finite() || !params.is_finite() {
            return Err(Error::Diverged { epoch, loss: mean });
        }
        curve.push(mean);
    }
    Ok((params, curve))
}
