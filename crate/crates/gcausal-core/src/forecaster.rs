//! Probabilistic autoregressive forecaster.
//!
//! A single-hidden-layer tanh network maps a flattened context of the last
//! `context_len` rows (all variables jointly) to a Gaussian over the next
//! row: per-variable means and softplus-floored standard deviations. It is
//! trained by minimizing the one-step negative log likelihood with Adam.
//!
//! Multi-step forecasts feed predicted means back into the context
//! (recursive strategy), so a causal parent's influence persists across the
//! forecast horizon.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::data::Window;
use crate::error::{CoreError, Result};
use crate::fmath;
use crate::linalg::Matrix;
use crate::rng::Prng;

const LN_2PI: f64 = 1.8378770664093453;
const INIT_TAG: u64 = 0x696e6974;
const SHUFFLE_TAG: u64 = 0x73687566;

/// Hyperparameters for [`Forecaster::train`].
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct ForecasterConfig {
    /// Hidden layer width.
    pub hidden: usize,
    /// Number of past rows in the context (autoregressive order).
    pub context_len: usize,
    /// Forecast window length T_f used for residual windows and rollouts.
    pub horizon: usize,
    /// Training passes over the window set.
    pub epochs: usize,
    /// Adam step size.
    pub learning_rate: f64,
    /// Minibatch size (the final partial batch is kept).
    pub batch_size: usize,
    /// Lower bound added to the softplus standard deviation.
    pub sigma_floor: f64,
    /// Seed for initialization and batch shuffling.
    pub seed: u64,
}

impl Default for ForecasterConfig {
    fn default() -> Self {
        ForecasterConfig {
            hidden: 32,
            context_len: 5,
            horizon: 4,
            epochs: 20,
            learning_rate: 0.01,
            batch_size: 64,
            sigma_floor: 1e-3,
            seed: 0,
        }
    }
}

impl ForecasterConfig {
    fn validate(&self) -> Result<()> {
        if self.hidden == 0 || self.context_len == 0 || self.batch_size == 0 || self.horizon == 0 {
            return Err(CoreError::config(
                "forecaster hidden, context_len, horizon, and batch_size must be positive",
            ));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(CoreError::config("forecaster learning_rate must be positive"));
        }
        if !(self.sigma_floor >= 1e-4 && self.sigma_floor.is_finite()) {
            return Err(CoreError::config("forecaster sigma_floor must be at least 1e-4"));
        }
        Ok(())
    }
}

/// Trained network. Parameters live in one flat vector laid out as
/// [w1 (hidden × input), b1 (hidden), w2 (2N × hidden), b2 (2N)] with
/// row-major weight blocks.
#[derive(Debug, Clone)]
pub struct Forecaster {
    num_vars: usize,
    config: ForecasterConfig,
    params: Vec<f64>,
}

/// Per-variable relative forecast error |actual − predicted| / max(|actual|, 1e-8).
pub fn residual_error(actual: f64, predicted: f64) -> f64 {
    fmath::abs(actual - predicted) / fmath::abs(actual).max(1e-8)
}

struct Layout {
    input: usize,
    hidden: usize,
    out: usize,
    w1: usize,
    b1: usize,
    w2: usize,
    b2: usize,
    total: usize,
}

impl Layout {
    fn new(num_vars: usize, config: &ForecasterConfig) -> Layout {
        let input = config.context_len * num_vars;
        let hidden = config.hidden;
        let out = 2 * num_vars;
        let w1 = 0;
        let b1 = w1 + hidden * input;
        let w2 = b1 + hidden;
        let b2 = w2 + out * hidden;
        Layout {
            input,
            hidden,
            out,
            w1,
            b1,
            w2,
            b2,
            total: b2 + out,
        }
    }
}

impl Forecaster {
    /// Untrained network with uniform(±1/sqrt(fan_in)) weights and zero
    /// biases. Exposed so gradient checks can run on arbitrary parameters.
    pub fn new_untrained(num_vars: usize, config: &ForecasterConfig) -> Result<Forecaster> {
        config.validate()?;
        if num_vars == 0 {
            return Err(CoreError::config("forecaster needs at least one variable"));
        }
        let layout = Layout::new(num_vars, config);
        let mut rng = Prng::derive(config.seed, &[INIT_TAG]);
        let mut params = vec![0.0; layout.total];
        let bound1 = 1.0 / fmath::sqrt(layout.input as f64);
        for w in params[layout.w1..layout.b1].iter_mut() {
            *w = rng.uniform_range(-bound1, bound1);
        }
        let bound2 = 1.0 / fmath::sqrt(layout.hidden as f64);
        for w in params[layout.w2..layout.b2].iter_mut() {
            *w = rng.uniform_range(-bound2, bound2);
        }
        Ok(Forecaster {
            num_vars,
            config: config.clone(),
            params,
        })
    }

    /// Train on a (typically standardized) panel. Every row after the first
    /// `context_len` rows becomes a one-step training example. Returns the
    /// forecaster and the mean NLL per epoch (measured on the shuffled
    /// minibatches as trained).
    pub fn train(values: &Matrix, config: &ForecasterConfig) -> Result<(Forecaster, Vec<f64>)> {
        let mut net = Forecaster::new_untrained(values.cols, config)?;
        if config.epochs == 0 {
            return Err(CoreError::config("forecaster epochs must be positive"));
        }
        let p = config.context_len;
        if values.rows < p + 1 {
            return Err(CoreError::data(format!(
                "training needs at least {} rows, got {}",
                p + 1,
                values.rows
            )));
        }
        let layout = Layout::new(net.num_vars, config);
        let num_examples = values.rows - p;
        let mut contexts = Matrix::zeros(num_examples, layout.input);
        let mut targets = Matrix::zeros(num_examples, net.num_vars);
        for e in 0..num_examples {
            let ctx = contexts.row_mut(e);
            for r in 0..p {
                let src = values.row(e + r);
                ctx[r * net.num_vars..(r + 1) * net.num_vars].copy_from_slice(src);
            }
            targets.row_mut(e).copy_from_slice(values.row(e + p));
        }

        // Adam state
        let mut m = vec![0.0; layout.total];
        let mut v = vec![0.0; layout.total];
        let mut step = 0u32;
        let (beta1, beta2, eps) = (0.9, 0.999, 1e-8);
        let mut shuffle_rng = Prng::derive(config.seed, &[SHUFFLE_TAG]);
        let mut order: Vec<usize> = (0..num_examples).collect();
        let mut grad = vec![0.0; layout.total];
        let mut epoch_losses = Vec::with_capacity(config.epochs);

        for _ in 0..config.epochs {
            shuffle_rng.shuffle(&mut order);
            let mut epoch_loss = 0.0;
            let mut epoch_terms = 0usize;
            for batch in order.chunks(config.batch_size) {
                let loss = net.loss_and_grad_indices(&contexts, &targets, batch, &mut grad)?;
                epoch_loss += loss * batch.len() as f64;
                epoch_terms += batch.len();
                step += 1;
                let bc1 = 1.0 - fmath::powi(beta1, step as i32);
                let bc2 = 1.0 - fmath::powi(beta2, step as i32);
                for i in 0..layout.total {
                    let g = grad[i];
                    m[i] = beta1 * m[i] + (1.0 - beta1) * g;
                    v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
                    let m_hat = m[i] / bc1;
                    let v_hat = v[i] / bc2;
                    net.params[i] -= config.learning_rate * m_hat / (fmath::sqrt(v_hat) + eps);
                }
            }
            epoch_losses.push(epoch_loss / epoch_terms as f64);
        }
        if net.params.iter().any(|w| !w.is_finite()) {
            return Err(CoreError::numeric("forecaster training diverged"));
        }
        Ok((net, epoch_losses))
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn config(&self) -> &ForecasterConfig {
        &self.config
    }

    pub fn parameters(&self) -> &[f64] {
        &self.params
    }

    pub fn parameters_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn forward(&self, context: &[f64], h: &mut [f64], o: &mut [f64]) {
        let layout = Layout::new(self.num_vars, &self.config);
        for j in 0..layout.hidden {
            let row = &self.params[layout.w1 + j * layout.input..layout.w1 + (j + 1) * layout.input];
            let mut acc = self.params[layout.b1 + j];
            for (w, x) in row.iter().zip(context) {
                acc += w * x;
            }
            h[j] = fmath::tanh(acc);
        }
        for k in 0..layout.out {
            let row = &self.params[layout.w2 + k * layout.hidden..layout.w2 + (k + 1) * layout.hidden];
            let mut acc = self.params[layout.b2 + k];
            for (w, x) in row.iter().zip(h.iter()) {
                acc += w * x;
            }
            o[k] = acc;
        }
    }

    /// One-step forecast from a flattened context of length
    /// `context_len · num_vars` (oldest row first). Returns per-variable
    /// means and standard deviations.
    pub fn forecast_one(&self, context: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let layout = Layout::new(self.num_vars, &self.config);
        if context.len() != layout.input {
            return Err(CoreError::data(format!(
                "context length {} does not match expected {}",
                context.len(),
                layout.input
            )));
        }
        let mut h = vec![0.0; layout.hidden];
        let mut o = vec![0.0; layout.out];
        self.forward(context, &mut h, &mut o);
        let means = o[..self.num_vars].to_vec();
        let sigmas: Vec<f64> = o[self.num_vars..]
            .iter()
            .map(|&x| fmath::softplus(x) + self.config.sigma_floor)
            .collect();
        Ok((means, sigmas))
    }

    /// Recursive multi-step forecast: the context starts at `values` rows
    /// [offset, offset + context_len) and each predicted mean row is pushed
    /// into the context for the next step. Returns a horizon × N matrix of
    /// predicted means.
    pub fn rollout(&self, values: &Matrix, offset: usize, horizon: usize) -> Result<Matrix> {
        let p = self.config.context_len;
        if values.cols != self.num_vars {
            return Err(CoreError::data("panel width does not match forecaster"));
        }
        if offset + p > values.rows {
            return Err(CoreError::data("rollout context extends past end of panel"));
        }
        let mut context = Vec::with_capacity(p * self.num_vars);
        for r in 0..p {
            context.extend_from_slice(values.row(offset + r));
        }
        let mut preds = Matrix::zeros(horizon, self.num_vars);
        for l in 0..horizon {
            let (means, _) = self.forecast_one(&context)?;
            preds.row_mut(l).copy_from_slice(&means);
            context.drain(..self.num_vars);
            context.extend_from_slice(&means);
        }
        Ok(preds)
    }

    /// Residual matrix (windows × N). Every window is scored as `target`
    /// consecutive one-step forecasts: step l reads its context from rows
    /// [offset+l, offset+l+context) of the effective panel and is compared
    /// against row offset+context+l of the original `values`. The relative
    /// errors are averaged over the window.
    ///
    /// `substitute` replaces the listed variable columns with the matching
    /// columns of the given panel at every context position, so substituting
    /// a variable set with its own columns reproduces the baseline residuals
    /// exactly. Targets always come from the original `values`.
    pub fn residuals(
        &self,
        values: &Matrix,
        windows: &[Window],
        substitute: Option<(&[usize], &Matrix)>,
    ) -> Result<Matrix> {
        let p = self.config.context_len;
        if values.cols != self.num_vars {
            return Err(CoreError::data("panel width does not match forecaster"));
        }
        let effective = match substitute {
            None => None,
            Some((vars, replacement)) => {
                if replacement.rows != values.rows || replacement.cols != values.cols {
                    return Err(CoreError::data(
                        "substitute panel shape does not match the observed panel",
                    ));
                }
                let mut patched = values.clone();
                for &v in vars {
                    if v >= self.num_vars {
                        return Err(CoreError::data("substitute variable out of range"));
                    }
                    for t in 0..patched.rows {
                        patched.row_mut(t)[v] = replacement.row(t)[v];
                    }
                }
                Some(patched)
            }
        };
        let contexts = effective.as_ref().unwrap_or(values);
        let mut out = Matrix::zeros(windows.len(), self.num_vars);
        let mut context = vec![0.0; p * self.num_vars];
        for (wi, w) in windows.iter().enumerate() {
            if w.context != p {
                return Err(CoreError::data(
                    "window context length does not match forecaster",
                ));
            }
            if w.offset + w.context + w.target > values.rows {
                return Err(CoreError::data("window extends past end of panel"));
            }
            let row = out.row_mut(wi);
            for l in 0..w.target {
                for r in 0..p {
                    let src = contexts.row(w.offset + l + r);
                    context[r * self.num_vars..(r + 1) * self.num_vars].copy_from_slice(src);
                }
                let (means, _) = self.forecast_one(&context)?;
                let actual = values.row(w.offset + p + l);
                for (n, acc) in row.iter_mut().enumerate() {
                    *acc += residual_error(actual[n], means[n]);
                }
            }
            for acc in row.iter_mut() {
                *acc /= w.target as f64;
            }
        }
        Ok(out)
    }

    /// Mean one-step NLL (over rows × variables) of the full context/target
    /// matrices; `contexts` is M × (context_len · N), `targets` M × N.
    pub fn loss(&self, contexts: &Matrix, targets: &Matrix) -> Result<f64> {
        let indices: Vec<usize> = (0..contexts.rows).collect();
        let mut scratch = vec![0.0; self.params.len()];
        self.loss_and_grad_indices(contexts, targets, &indices, &mut scratch)
    }

    /// Mean one-step NLL and its gradient with respect to the flat parameter
    /// vector, over the full example set. Used by training and by gradient
    /// checks.
    pub fn loss_and_grad(
        &self,
        contexts: &Matrix,
        targets: &Matrix,
        grad: &mut [f64],
    ) -> Result<f64> {
        let indices: Vec<usize> = (0..contexts.rows).collect();
        self.loss_and_grad_indices(contexts, targets, &indices, grad)
    }

    fn loss_and_grad_indices(
        &self,
        contexts: &Matrix,
        targets: &Matrix,
        indices: &[usize],
        grad: &mut [f64],
    ) -> Result<f64> {
        let layout = Layout::new(self.num_vars, &self.config);
        if contexts.cols != layout.input || targets.cols != self.num_vars {
            return Err(CoreError::data("example matrices do not match forecaster shape"));
        }
        if contexts.rows != targets.rows {
            return Err(CoreError::data("context and target row counts differ"));
        }
        if indices.is_empty() {
            return Err(CoreError::data("empty batch"));
        }
        if grad.len() != layout.total {
            return Err(CoreError::data("gradient buffer has wrong length"));
        }
        grad.fill(0.0);
        let inv = 1.0 / (indices.len() * self.num_vars) as f64;
        let mut h = vec![0.0; layout.hidden];
        let mut o = vec![0.0; layout.out];
        let mut d_out = vec![0.0; layout.out];
        let mut d_hidden = vec![0.0; layout.hidden];
        let mut loss = 0.0;
        for &e in indices {
            let x = contexts.row(e);
            let z = targets.row(e);
            self.forward(x, &mut h, &mut o);
            for n in 0..self.num_vars {
                let mu = o[n];
                let o_sigma = o[self.num_vars + n];
                let sigma = fmath::softplus(o_sigma) + self.config.sigma_floor;
                let r = (z[n] - mu) / sigma;
                loss += (0.5 * LN_2PI + fmath::ln(sigma) + 0.5 * r * r) * inv;
                // dNLL/dmu and dNLL/dsigma, chained through the softplus
                d_out[n] = (mu - z[n]) / (sigma * sigma) * inv;
                let d_sigma = (1.0 / sigma - (z[n] - mu) * (z[n] - mu) / (sigma * sigma * sigma)) * inv;
                d_out[self.num_vars + n] = d_sigma * fmath::sigmoid(o_sigma);
            }
            for (j, dh) in d_hidden.iter_mut().enumerate() {
                let mut acc = 0.0;
                for k in 0..layout.out {
                    acc += self.params[layout.w2 + k * layout.hidden + j] * d_out[k];
                }
                *dh = acc * (1.0 - h[j] * h[j]);
            }
            for k in 0..layout.out {
                let g_row = &mut grad[layout.w2 + k * layout.hidden..layout.w2 + (k + 1) * layout.hidden];
                for (g, &hj) in g_row.iter_mut().zip(h.iter()) {
                    *g += d_out[k] * hj;
                }
                grad[layout.b2 + k] += d_out[k];
            }
            for j in 0..layout.hidden {
                let g_row = &mut grad[layout.w1 + j * layout.input..layout.w1 + (j + 1) * layout.input];
                for (g, &xi) in g_row.iter_mut().zip(x.iter()) {
                    *g += d_hidden[j] * xi;
                }
                grad[layout.b1 + j] += d_hidden[j];
            }
        }
        if !loss.is_finite() {
            return Err(CoreError::numeric("non-finite forecaster loss"));
        }
        Ok(loss)
    }

    /// Build one-step example matrices (contexts, targets) from a panel,
    /// matching the layout [`Forecaster::train`] uses internally.
    pub fn make_examples(values: &Matrix, context_len: usize) -> Result<(Matrix, Matrix)> {
        if context_len == 0 || values.rows < context_len + 1 {
            return Err(CoreError::data("panel too short for the requested context"));
        }
        let n = values.cols;
        let num_examples = values.rows - context_len;
        let mut contexts = Matrix::zeros(num_examples, context_len * n);
        let mut targets = Matrix::zeros(num_examples, n);
        for e in 0..num_examples {
            let ctx = contexts.row_mut(e);
            for r in 0..context_len {
                ctx[r * n..(r + 1) * n].copy_from_slice(values.row(e + r));
            }
            targets.row_mut(e).copy_from_slice(values.row(e + context_len));
        }
        Ok((contexts, targets))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{standardize, TimeSeriesPanel};

    fn small_config(seed: u64) -> ForecasterConfig {
        ForecasterConfig {
            hidden: 16,
            context_len: 3,
            horizon: 4,
            epochs: 10,
            learning_rate: 0.01,
            batch_size: 32,
            sigma_floor: 1e-3,
            seed,
        }
    }

    fn noise_panel(t: usize, n: usize, seed: u64) -> Matrix {
        let mut rng = Prng::derive(seed, &[1]);
        let mut m = Matrix::zeros(t, n);
        for r in 0..t {
            for c in 0..n {
                m.set(r, c, rng.normal());
            }
        }
        m
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let config = ForecasterConfig {
            hidden: 4,
            context_len: 2,
            horizon: 4,
            epochs: 1,
            learning_rate: 0.01,
            batch_size: 8,
            sigma_floor: 1e-3,
            seed: 3,
        };
        let values = noise_panel(14, 2, 5);
        let (contexts, targets) = Forecaster::make_examples(&values, 2).unwrap();
        let mut net = Forecaster::new_untrained(2, &config).unwrap();
        let mut grad = vec![0.0; net.parameters().len()];
        net.loss_and_grad(&contexts, &targets, &mut grad).unwrap();
        let eps = 1e-5;
        let mut max_rel = 0.0f64;
        for i in 0..net.parameters().len() {
            let orig = net.parameters()[i];
            net.parameters_mut()[i] = orig + eps;
            let up = net.loss(&contexts, &targets).unwrap();
            net.parameters_mut()[i] = orig - eps;
            let down = net.loss(&contexts, &targets).unwrap();
            net.parameters_mut()[i] = orig;
            let numeric = (up - down) / (2.0 * eps);
            let denom = fmath::abs(numeric).max(fmath::abs(grad[i])).max(1e-8);
            max_rel = max_rel.max(fmath::abs(numeric - grad[i]) / denom);
        }
        assert!(max_rel < 1e-6, "max relative gradient error {max_rel}");
    }

    #[test]
    fn training_is_deterministic() {
        let values = noise_panel(120, 3, 9);
        let (net1, losses1) = Forecaster::train(&values, &small_config(7)).unwrap();
        let (net2, losses2) = Forecaster::train(&values, &small_config(7)).unwrap();
        assert_eq!(net1.parameters(), net2.parameters());
        assert_eq!(losses1, losses2);
        let (net3, _) = Forecaster::train(&values, &small_config(8)).unwrap();
        assert_ne!(net1.parameters(), net3.parameters());
    }

    #[test]
    fn white_noise_learns_unit_sigma_and_gaussian_nll() {
        // On standardized white noise the best one-step model predicts mean 0,
        // sigma 1; the NLL floor is 0.5 ln(2 pi e) = 1.41894.
        let raw = noise_panel(400, 3, 11);
        let panel = TimeSeriesPanel::from_values(raw).unwrap();
        let (std_panel, _) = standardize(&panel).unwrap();
        let mut config = small_config(2);
        config.hidden = 32;
        config.context_len = 5;
        let (net, losses) = Forecaster::train(&std_panel.values, &config).unwrap();
        let last = *losses.last().unwrap();
        assert!(
            fmath::abs(last - 1.41894) < 0.2,
            "final NLL {last} not near Gaussian floor"
        );
        let (contexts, targets) = Forecaster::make_examples(&std_panel.values, 5).unwrap();
        let mut sigma_sum = 0.0;
        let mut count = 0;
        for e in 0..contexts.rows {
            let (_, sigmas) = net.forecast_one(contexts.row(e)).unwrap();
            sigma_sum += sigmas.iter().sum::<f64>();
            count += sigmas.len();
        }
        let _ = targets;
        let mean_sigma = sigma_sum / count as f64;
        assert!(
            (0.8..=1.2).contains(&mean_sigma),
            "mean sigma {mean_sigma} not near 1"
        );
    }

    #[test]
    fn ar_process_is_predictable() {
        // AR(1) with coefficient 0.9: one-step MSE of a trained net should be
        // far below the series variance (~5.3).
        let mut rng = Prng::derive(21, &[0]);
        let t = 500;
        let mut m = Matrix::zeros(t, 1);
        let mut x = 0.0;
        for r in 0..t {
            x = 0.9 * x + rng.normal();
            m.set(r, 0, x);
        }
        let panel = TimeSeriesPanel::from_values(m).unwrap();
        let (std_panel, _) = standardize(&panel).unwrap();
        let mut config = small_config(4);
        config.context_len = 5;
        let (net, _) = Forecaster::train(&std_panel.values, &config).unwrap();
        let (contexts, targets) = Forecaster::make_examples(&std_panel.values, 5).unwrap();
        let mut mse = 0.0;
        for e in 0..contexts.rows {
            let (means, _) = net.forecast_one(contexts.row(e)).unwrap();
            let d = means[0] - targets.get(e, 0);
            mse += d * d;
        }
        mse /= contexts.rows as f64;
        assert!(mse < 0.5, "one-step MSE {mse} too high for AR(1)");
    }

    #[test]
    fn rollout_feeds_means_back() {
        let values = noise_panel(60, 2, 13);
        let (net, _) = Forecaster::train(&values, &small_config(1)).unwrap();
        let preds = net.rollout(&values, 10, 4).unwrap();
        assert_eq!((preds.rows, preds.cols), (4, 2));
        // second step must differ from simply forecasting twice from observed rows
        // (the context now contains the first prediction)
        let mut ctx = Vec::new();
        for r in 11..14 {
            ctx.extend_from_slice(values.row(r));
        }
        let (direct, _) = net.forecast_one(&ctx).unwrap();
        assert_ne!(preds.row(1), direct.as_slice());
    }

    #[test]
    fn residuals_shape_and_nonnegativity() {
        let values = noise_panel(80, 3, 17);
        let (net, _) = Forecaster::train(&values, &small_config(6)).unwrap();
        let windows = crate::data::make_windows(80, 3, 4, 4).unwrap();
        let res = net.residuals(&values, &windows, None).unwrap();
        assert_eq!(res.rows, windows.len());
        assert_eq!(res.cols, 3);
        assert!(res.data.iter().all(|&v| v >= 0.0 && v.is_finite()));
    }

    #[test]
    fn residuals_noop_substitution_is_exact() {
        // Substituting variables with their own observed columns must leave
        // the effective panel bitwise identical, hence identical residuals.
        let values = noise_panel(70, 3, 19);
        let (net, _) = Forecaster::train(&values, &small_config(9)).unwrap();
        let windows = crate::data::make_windows(70, 3, 4, 4).unwrap();
        let base = net.residuals(&values, &windows, None).unwrap();
        let noop = net
            .residuals(&values, &windows, Some((&[0, 2], &values)))
            .unwrap();
        assert_eq!(base.data, noop.data);
    }

    #[test]
    fn residuals_substitution_changes_output_only_through_contexts() {
        let values = noise_panel(70, 2, 23);
        let (net, _) = Forecaster::train(&values, &small_config(11)).unwrap();
        let windows = crate::data::make_windows(70, 3, 4, 4).unwrap();
        let base = net.residuals(&values, &windows, None).unwrap();
        let other = noise_panel(70, 2, 24);
        let swapped = net
            .residuals(&values, &windows, Some((&[1], &other)))
            .unwrap();
        assert_ne!(base.data, swapped.data);
        // a window's score changes for every variable: contexts are shared
        assert_eq!(swapped.rows, base.rows);
    }

    #[test]
    fn residuals_validates_substitute_shape() {
        let values = noise_panel(40, 2, 29);
        let (net, _) = Forecaster::train(&values, &small_config(12)).unwrap();
        let windows = crate::data::make_windows(40, 3, 4, 4).unwrap();
        let short = noise_panel(39, 2, 30);
        assert!(net
            .residuals(&values, &windows, Some((&[0], &short)))
            .is_err());
        assert!(net
            .residuals(&values, &windows, Some((&[5], &values)))
            .is_err());
    }

    #[test]
    fn residual_error_floors_denominator() {
        assert_eq!(residual_error(0.0, 0.5), 0.5 / 1e-8);
        assert_eq!(residual_error(2.0, 1.0), 0.5);
        assert_eq!(residual_error(-2.0, -1.0), 0.5);
    }

    #[test]
    fn config_validation() {
        let values = noise_panel(30, 2, 1);
        let mut c = small_config(0);
        c.hidden = 0;
        assert!(Forecaster::train(&values, &c).is_err());
        let mut c = small_config(0);
        c.learning_rate = 0.0;
        assert!(Forecaster::train(&values, &c).is_err());
        let mut c = small_config(0);
        c.sigma_floor = 1e-5;
        assert!(Forecaster::train(&values, &c).is_err());
        let mut c = small_config(0);
        c.horizon = 0;
        assert!(Forecaster::train(&values, &c).is_err());
        let c = small_config(0);
        let short = noise_panel(3, 2, 1);
        assert!(Forecaster::train(&short, &c).is_err());
    }
}
