//! Adam optimizer with bias-corrected moment estimates.

use crate::error::{Result, TcnError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub step_size: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            step_size: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// First/second moment accumulators, one pair of buffers per parameter
/// group (a group is one weight or bias tensor).
#[derive(Debug, Clone)]
pub struct AdamState {
    pub config: AdamConfig,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    t: u64,
}

impl AdamState {
    pub fn new(group_lens: &[usize], config: AdamConfig) -> Self {
        AdamState {
            config,
            m: group_lens.iter().map(|&n| vec![0.0; n]).collect(),
            v: group_lens.iter().map(|&n| vec![0.0; n]).collect(),
            t: 0,
        }
    }

    pub fn steps_taken(&self) -> u64 {
        self.t
    }
}

/// One optimizer step over every parameter group. `params[g]` and `grads[g]`
/// must match the group lengths the state was built with.
pub fn adam_step(params: &mut [&mut [f64]], grads: &[&[f64]], state: &mut AdamState) -> Result<()> {
    if params.len() != state.m.len() || grads.len() != state.m.len() {
        return Err(TcnError::config(format!(
            "adam state tracks {} groups, got {} params / {} grads",
            state.m.len(),
            params.len(),
            grads.len()
        )));
    }
    state.t += 1;
    let c = state.config;
    let bc1 = 1.0 - c.beta1.powi(state.t as i32);
    let bc2 = 1.0 - c.beta2.powi(state.t as i32);
    for g in 0..params.len() {
        if params[g].len() != state.m[g].len() || grads[g].len() != state.m[g].len() {
            return Err(TcnError::config(format!(
                "adam group {} has length {}, got {} params / {} grads",
                g,
                state.m[g].len(),
                params[g].len(),
                grads[g].len()
            )));
        }
        let (m, v) = (&mut state.m[g], &mut state.v[g]);
        for (((p, &grad), mi), vi) in params[g]
            .iter_mut()
            .zip(grads[g].iter())
            .zip(m.iter_mut())
            .zip(v.iter_mut())
        {
            *mi = c.beta1 * *mi + (1.0 - c.beta1) * grad;
            *vi = c.beta2 * *vi + (1.0 - c.beta2) * grad * grad;
            let m_hat = *mi / bc1;
            let v_hat = *vi / bc2;
            *p -= c.step_size * m_hat / (v_hat.sqrt() + c.epsilon);
        }
    }
    Ok(())
}
