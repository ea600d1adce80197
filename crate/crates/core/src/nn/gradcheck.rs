//! Central finite-difference verification of [`Network::backward`].

use super::Network;
use crate::{Error, Result};

/// Scalar losses available to the checker.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Loss {
    /// Sum of every output over the batch.
    Sum,
    /// Half the squared norm of every output, summed over the batch.
    HalfSquared,
}

impl Loss {
    fn value(self, outputs: &[Vec<f64>]) -> f64 {
        let it = outputs.iter().flatten();
        match self {
            Loss::Sum => it.sum(),
            Loss::HalfSquared => it.map(|y| 0.5 * y * y).sum(),
        }
    }

    fn gradient(self, outputs: &[Vec<f64>]) -> Vec<Vec<f64>> {
        outputs
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&y| match self {
                        Loss::Sum => 1.0,
                        Loss::HalfSquared => y,
                    })
                    .collect()
            })
            .collect()
    }
}

/// `|a - b| / max(|a|, |b|, 1e-12)`.
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-12)
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::Domain(format!(
            "finite-difference step must be > 0, got {eps}"
        )));
    }
    Ok(())
}

/// Largest relative error between backpropagated parameter gradients and
/// central differences `(L(p + eps) - L(p - eps)) / (2 eps)`.
pub fn finite_diff_check(net: &Network, input: &[Vec<f64>], loss: Loss, eps: f64) -> Result<f64> {
    check_eps(eps)?;
    let (out, cache) = net.forward(input)?;
    let (grads, _) = net.backward(&cache, &loss.gradient(&out))?;
    let analytic: Vec<f64> = grads.values().copied().collect();

    let eval = |n: &Network| -> Result<f64> { Ok(loss.value(&n.forward(input)?.0)) };
    let mut probe = net.clone();
    let mut worst = 0.0f64;
    for (i, &a) in analytic.iter().enumerate() {
        let orig = *probe.params().nth(i).expect("index within parameter count");
        *probe.params_mut().nth(i).unwrap() = orig + eps;
        let plus = eval(&probe)?;
        *probe.params_mut().nth(i).unwrap() = orig - eps;
        let minus = eval(&probe)?;
        *probe.params_mut().nth(i).unwrap() = orig;
        worst = worst.max(relative_error(a, (plus - minus) / (2.0 * eps)));
    }
    Ok(worst)
}

/// Same comparison for the gradients with respect to the inputs.
pub fn finite_diff_input_check(
    net: &Network,
    input: &[Vec<f64>],
    loss: Loss,
    eps: f64,
) -> Result<f64> {
    check_eps(eps)?;
    let (out, cache) = net.forward(input)?;
    let (_, d_input) = net.backward(&cache, &loss.gradient(&out))?;
    let mut worst = 0.0f64;
    let mut probe = input.to_vec();
    for n in 0..input.len() {
        for j in 0..input[n].len() {
            let orig = input[n][j];
            probe[n][j] = orig + eps;
            let plus = loss.value(&net.forward(&probe)?.0);
            probe[n][j] = orig - eps;
            let minus = loss.value(&net.forward(&probe)?.0);
            probe[n][j] = orig;
            worst = worst.max(relative_error(d_input[n][j], (plus - minus) / (2.0 * eps)));
        }
    }
    Ok(worst)
}
