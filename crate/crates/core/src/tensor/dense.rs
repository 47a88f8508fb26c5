//! Fully connected layer, `y = W·x + b` with `W` stored `[out, in]`.

use super::{LayerGradients, Tensor};
use crate::{Error, Result};

fn check(input: &Tensor, weights: &Tensor) -> Result<(usize, usize)> {
    input.expect_rank(1, "dense input")?;
    weights.expect_rank(2, "dense weights")?;
    let (n_out, n_in) = (weights.shape()[0], weights.shape()[1]);
    if input.len() != n_in {
        return Err(Error::shape(format!(
            "dense: input length {} does not match weight columns {n_in}",
            input.len()
        )));
    }
    Ok((n_out, n_in))
}

pub fn dense_forward(input: &Tensor, weights: &Tensor, bias: &Tensor) -> Result<Tensor> {
    let (n_out, n_in) = check(input, weights)?;
    bias.expect_shape(&[n_out], "dense bias")?;
    let x = input.data();
    let out = weights
        .data()
        .chunks_exact(n_in)
        .zip(bias.data())
        .map(|(row, &b)| {
            let dot: f64 = row
                .iter()
                .zip(x)
                .map(|(&w, &v)| f64::from(w) * f64::from(v))
                .sum();
            (f64::from(b) + dot) as f32
        })
        .collect();
    Tensor::new(vec![n_out], out)
}

pub fn dense_backward(
    input: &Tensor,
    weights: &Tensor,
    upstream: &Tensor,
) -> Result<LayerGradients> {
    let (n_out, n_in) = check(input, weights)?;
    upstream.expect_shape(&[n_out], "dense upstream")?;
    let x = input.data();
    let g = upstream.data();

    let mut d_w = Vec::with_capacity(n_out * n_in);
    for &gj in g {
        let gj = f64::from(gj);
        d_w.extend(x.iter().map(|&v| (gj * f64::from(v)) as f32));
    }

    let mut d_in = vec![0f64; n_in];
    for (row, &gj) in weights.data().chunks_exact(n_in).zip(g) {
        let gj = f64::from(gj);
        for (acc, &w) in d_in.iter_mut().zip(row) {
            *acc += gj * f64::from(w);
        }
    }

    Ok(LayerGradients {
        d_weights: Tensor::new(vec![n_out, n_in], d_w)?,
        d_bias: upstream.clone(),
        d_input: Tensor::new(vec![n_in], d_in.into_iter().map(|v| v as f32).collect())?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(shape: &[usize], v: &[f32]) -> Tensor {
        Tensor::new(shape.to_vec(), v.to_vec()).unwrap()
    }

    #[test]
    fn selects_first_column() {
        let y = dense_forward(
            &t(&[2], &[1.0, 0.0]),
            &t(&[2, 2], &[2.0, 3.0, 4.0, 5.0]),
            &t(&[2], &[1.0, 1.0]),
        )
        .unwrap();
        assert_eq!(y.data(), &[3.0, 5.0]);
    }

    #[test]
    fn zero_input_yields_bias() {
        let y = dense_forward(
            &Tensor::zeros(&[3]),
            &t(&[2, 3], &[1.0, -2.0, 3.0, 4.0, 5.0, -6.0]),
            &t(&[2], &[0.25, -7.0]),
        )
        .unwrap();
        assert_eq!(y.data(), &[0.25, -7.0]);
    }

    #[test]
    fn backward_is_outer_product_and_transpose() {
        let x = t(&[2], &[1.0, 2.0]);
        let w = t(&[3, 2], &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let g = t(&[3], &[1.0, 0.0, -1.0]);
        let grads = dense_backward(&x, &w, &g).unwrap();
        assert_eq!(grads.d_weights.data(), &[1.0, 2.0, 0.0, 0.0, -1.0, -2.0]);
        assert_eq!(grads.d_bias.data(), &[1.0, 0.0, -1.0]);
        assert_eq!(grads.d_input.data(), &[-4.0, -4.0]);
    }

    #[test]
    fn mismatch_is_shape_error() {
        assert!(matches!(
            dense_forward(&Tensor::zeros(&[3]), &Tensor::zeros(&[2, 2]), &Tensor::zeros(&[2])),
            Err(Error::Shape(_))
        ));
        assert!(
            dense_forward(&Tensor::zeros(&[2]), &Tensor::zeros(&[2, 2]), &Tensor::zeros(&[3]))
                .is_err()
        );
    }
}
