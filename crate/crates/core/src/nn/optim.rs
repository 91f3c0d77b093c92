use super::config::TrainConfig;
use super::network::{DenseNetwork, Gradients, Layer};
use crate::error::{Error, Result};

/// Adam moments with the same layout as the network parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<Layer>,
    pub v: Vec<Layer>,
    pub t: u64,
}

impl AdamState {
    pub fn new(net: &DenseNetwork) -> Self {
        let zeros: Vec<Layer> = net
            .layers()
            .iter()
            .map(|l| Layer::zeros(l.fan_in, l.fan_out))
            .collect();
        Self {
            m: zeros.clone(),
            v: zeros,
            t: 0,
        }
    }
}

fn update(p: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64], tc: &TrainConfig, c1: f64, c2: f64) {
    for i in 0..p.len() {
        m[i] = tc.beta1 * m[i] + (1.0 - tc.beta1) * g[i];
        v[i] = tc.beta2 * v[i] + (1.0 - tc.beta2) * g[i] * g[i];
        let m_hat = m[i] / c1;
        let v_hat = v[i] / c2;
        p[i] -= tc.learning_rate * m_hat / (v_hat.sqrt() + tc.epsilon);
    }
}

/// One bias-corrected Adam update. Refuses to touch the network when any
/// gradient is non-finite.
pub fn adam_step(net: &mut DenseNetwork, grads: &Gradients, state: &mut AdamState, tc: &TrainConfig) -> Result<()> {
    if grads.layers.len() != net.layers().len() || state.m.len() != net.layers().len() {
        return Err(Error::contract("optimizer state does not match the network"));
    }
    for (l, g) in grads.layers.iter().enumerate() {
        if let Some(bad) = g.weights.iter().chain(&g.bias).find(|v| !v.is_finite()) {
            return Err(Error::Numeric {
                layer: l,
                detail: format!("non-finite gradient {bad}; aborting the update"),
            });
        }
    }
    state.t += 1;
    let t = state.t as i32;
    let c1 = 1.0 - tc.beta1.powi(t);
    let c2 = 1.0 - tc.beta2.powi(t);
    for (l, layer) in net.layers_mut().iter_mut().enumerate() {
        let g = &grads.layers[l];
        let (m, v) = (&mut state.m[l], &mut state.v[l]);
        update(&mut layer.weights, &g.weights, &mut m.weights, &mut v.weights, tc, c1, c2);
        update(&mut layer.bias, &g.bias, &mut m.bias, &mut v.bias, tc, c1, c2);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::activation::{Activation, ActivationKind};
    use crate::data::Task;
    use crate::nn::config::NetworkConfig;
    use crate::nn::network::init_network;

    fn net() -> DenseNetwork {
        let c = NetworkConfig::for_task(2, &[3], Task::Regression, Activation::plain(ActivationKind::Tanh));
        init_network(&c, 9).unwrap()
    }

    fn grads_like(net: &DenseNetwork, value: f64) -> Gradients {
        Gradients {
            layers: net
                .layers()
                .iter()
                .map(|l| {
                    let mut z = Layer::zeros(l.fan_in, l.fan_out);
                    z.weights.iter_mut().chain(z.bias.iter_mut()).for_each(|v| *v = value);
                    z
                })
                .collect(),
        }
    }

    #[test]
    fn zero_gradient_leaves_parameters() {
        let mut n = net();
        let before = n.clone();
        let mut s = AdamState::new(&n);
        adam_step(&mut n, &grads_like(&before, 0.0), &mut s, &TrainConfig::default()).unwrap();
        assert_eq!(n, before);
        assert_eq!(s.t, 1);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        let mut n = net();
        let before = n.clone();
        let mut s = AdamState::new(&n);
        let tc = TrainConfig::default();
        adam_step(&mut n, &grads_like(&before, 0.37), &mut s, &tc).unwrap();
        // m̂ = g and v̂ = g², so the step is lr·g/(|g| + ε).
        let expected = tc.learning_rate * 0.37 / (0.37 + tc.epsilon);
        for i in 0..n.parameter_count() {
            assert!((before.param(i) - n.param(i) - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn non_finite_gradient_aborts_untouched() {
        let mut n = net();
        let before = n.clone();
        let mut s = AdamState::new(&n);
        let mut g = grads_like(&before, 0.1);
        g.layers[1].bias[0] = f64::NAN;
        let r = adam_step(&mut n, &g, &mut s, &TrainConfig::default());
        assert!(matches!(r, Err(Error::Numeric { layer: 1, .. })));
        assert_eq!(n, before);
        assert_eq!(s.t, 0);
    }
}
