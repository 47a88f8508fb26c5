use super::Tensor;
use crate::{Error, Result};

/// `param - learning_rate * grad`, returned as a new tensor.
pub fn sgd_step(param: &Tensor, grad: &Tensor, learning_rate: f64) -> Result<Tensor> {
    grad.expect_shape(param.shape(), "sgd_step gradient")?;
    if !(learning_rate > 0.0 && learning_rate.is_finite()) {
        return Err(Error::domain(format!(
            "learning rate must be positive and finite, got {learning_rate}"
        )));
    }
    let data = param
        .data()
        .iter()
        .zip(grad.data())
        .map(|(&p, &g)| (f64::from(p) - learning_rate * f64::from(g)) as f32)
        .collect();
    Tensor::new(param.shape().to_vec(), data)
}
