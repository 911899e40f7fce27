use super::mlp::MlpParams;
use crate::error::{Error, Result};

/// Bias-corrected Adam state for one [`MlpParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    step: u64,
    first: MlpParams,
    second: MlpParams,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    pub fn new(params: &MlpParams, lr: f64) -> Result<Self> {
        Self::with_betas(params, lr, 0.9, 0.999, 1e-8)
    }

    pub fn with_betas(params: &MlpParams, lr: f64, beta1: f64, beta2: f64, eps: f64) -> Result<Self> {
        if !(lr >= 0.0 && lr.is_finite()) {
            return Err(Error::Config(format!("learning rate {lr} must be finite and >= 0")));
        }
        if !(0.0..1.0).contains(&beta1) || !(0.0..1.0).contains(&beta2) || beta1 == 0.0 || beta2 == 0.0 {
            return Err(Error::Config("Adam betas must lie in (0, 1)".into()));
        }
        if eps.is_nan() || eps <= 0.0 {
            return Err(Error::Config("Adam epsilon must be positive".into()));
        }
        Ok(Self {
            step: 0,
            first: params.zeros_like(),
            second: params.zeros_like(),
            lr,
            beta1,
            beta2,
            eps,
        })
    }

    pub fn step(&self) -> u64 {
        self.step
    }
}

/// Applies one Adam update to `params`. Gradients are validated before anything is mutated.
pub fn adam_step(params: &mut MlpParams, grads: &MlpParams, state: &mut AdamState) -> Result<()> {
    if !params.same_shape(grads) || !params.same_shape(&state.first) {
        return Err(Error::State("Adam shapes do not match the network".into()));
    }
    grads.check_finite("gradient")?;

    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - state.beta1.powi(t);
    let c2 = 1.0 - state.beta2.powi(t);
    let (b1, b2, lr, eps) = (state.beta1, state.beta2, state.lr, state.eps);

    let layers = params
        .layers_mut()
        .iter_mut()
        .zip(grads.layers())
        .zip(state.first.layers_mut().iter_mut().zip(state.second.layers_mut()));
    for ((p, g), (m, v)) in layers {
        let update = |p: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64]| {
            for i in 0..p.len() {
                m[i] = b1 * m[i] + (1.0 - b1) * g[i];
                v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
                let m_hat = m[i] / c1;
                let v_hat = v[i] / c2;
                p[i] -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        };
        update(
            p.weight.values_mut(),
            g.weight.values(),
            m.weight.values_mut(),
            v.weight.values_mut(),
        );
        update(&mut p.bias, &g.bias, &mut m.bias, &mut v.bias);
    }
    params.check_finite("parameters after Adam step")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{DenseMatrix, Layer};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn scalar(w: f64) -> MlpParams {
        MlpParams::new(vec![Layer::new(DenseMatrix::from_vec(1, 1, vec![w]).unwrap(), vec![0.0]).unwrap()])
            .unwrap()
    }

    #[test]
    fn zero_gradient_leaves_params() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut p = MlpParams::init_uniform(&[3, 4, 2], &mut rng).unwrap();
        let before = p.clone();
        let mut st = AdamState::new(&p, 1e-2).unwrap();
        let g = p.zeros_like();
        adam_step(&mut p, &g, &mut st).unwrap();
        assert_eq!(p, before);
        assert_eq!(st.step(), 1);
    }

    #[test]
    fn first_step_moves_by_lr() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut p = MlpParams::init_uniform(&[2, 3], &mut rng).unwrap();
        let before = p.to_flat();
        let mut g = p.zeros_like();
        let gflat: Vec<f64> = (0..g.num_params()).map(|i| if i % 2 == 0 { 0.7 } else { -2.5 }).collect();
        g.set_flat(&gflat).unwrap();
        let lr = 1e-3;
        let mut st = AdamState::new(&p, lr).unwrap();
        adam_step(&mut p, &g, &mut st).unwrap();
        for ((a, b), gi) in p.to_flat().iter().zip(&before).zip(&gflat) {
            let moved = a - b;
            assert!((moved + lr * gi.signum()).abs() < 1e-9, "moved {moved}");
        }
    }

    #[test]
    fn descends_on_square() {
        let mut p = scalar(1.0);
        let mut st = AdamState::new(&p, 0.1).unwrap();
        let mut last = 1.0f64;
        for _ in 0..5 {
            let w = p.layers()[0].weight().get(0, 0);
            let g = scalar(2.0 * w);
            adam_step(&mut p, &g, &mut st).unwrap();
            let now = p.layers()[0].weight().get(0, 0).abs();
            assert!(now < last);
            last = now;
        }
        assert_eq!(st.step(), 5);
    }

    #[test]
    fn non_finite_gradient_is_rejected_untouched() {
        let mut p = scalar(1.0);
        let mut st = AdamState::new(&p, 0.1).unwrap();
        let bad = scalar(0.0);
        let mut flat = bad.to_flat();
        flat[0] = 1.0;
        let mut g = bad.clone();
        g.set_flat(&flat).unwrap();
        g.layers_mut()[0].bias[0] = f64::INFINITY;
        let err = adam_step(&mut p, &g, &mut st).unwrap_err();
        assert!(matches!(err, Error::Numeric(ref m) if m.contains("layer 0")));
        assert_eq!(st.step(), 0);
        assert_eq!(p, scalar(1.0));
    }

    #[test]
    fn shape_mismatch_is_state_error() {
        let mut p = MlpParams::zeros(&[2, 2]).unwrap();
        let mut st = AdamState::new(&p, 0.1).unwrap();
        let g = MlpParams::zeros(&[2, 3]).unwrap();
        assert!(matches!(adam_step(&mut p, &g, &mut st), Err(Error::State(_))));
    }
}
