use super::Tensor;
use crate::{Error, Result};

pub fn relu_forward(input: &Tensor) -> Tensor {
    let mut out = input.clone();
    for v in out.data_mut() {
        *v = v.max(0.0);
    }
    out
}

/// Passes `upstream` where the forward input was strictly positive. The
/// derivative at exactly zero is taken as zero.
pub fn relu_backward(input: &Tensor, upstream: &Tensor) -> Result<Tensor> {
    upstream.expect_shape(input.shape(), "relu upstream")?;
    let data = input
        .data()
        .iter()
        .zip(upstream.data())
        .map(|(&x, &g)| if x > 0.0 { g } else { 0.0 })
        .collect();
    Tensor::new(input.shape().to_vec(), data)
}

/// Max-shifted softmax, evaluated in `f64`.
pub fn softmax(logits: &[f32]) -> Vec<f64> {
    let max = logits
        .iter()
        .map(|&v| f64::from(v))
        .fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&v| (f64::from(v) - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Softmax cross-entropy against `true_class`.
///
/// Returns the loss `-ln p[true_class]` and `∂loss/∂logits = p - onehot`.
pub fn softmax_xent(logits: &Tensor, true_class: usize) -> Result<(f64, Tensor)> {
    logits.expect_rank(1, "softmax_xent logits")?;
    if true_class >= logits.len() {
        return Err(Error::domain(format!(
            "class index {true_class} out of range 0..{}",
            logits.len()
        )));
    }
    let max = logits
        .data()
        .iter()
        .map(|&v| f64::from(v))
        .fold(f64::NEG_INFINITY, f64::max);
    let shifted: Vec<f64> = logits.data().iter().map(|&v| f64::from(v) - max).collect();
    let log_sum = shifted.iter().map(|s| s.exp()).sum::<f64>().ln();
    let loss = log_sum - shifted[true_class];
    let grad = shifted
        .iter()
        .enumerate()
        .map(|(k, &s)| {
            let p = (s - log_sum).exp();
            (if k == true_class { p - 1.0 } else { p }) as f32
        })
        .collect();
    Ok((loss.max(0.0), Tensor::new(logits.shape().to_vec(), grad)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f32]) -> Tensor {
        Tensor::from_vec(xs.to_vec()).unwrap()
    }

    #[test]
    fn relu_clamps_negatives() {
        assert_eq!(relu_forward(&v(&[-1.0, 0.0, 2.0])).data(), &[0.0, 0.0, 2.0]);
        let pos = v(&[0.5, 1.0, 3.0]);
        assert_eq!(relu_forward(&pos), pos);
    }

    #[test]
    fn relu_backward_zero_at_kink() {
        let g = relu_backward(&v(&[-1.0, 0.0, 2.0]), &v(&[5.0, 5.0, 5.0])).unwrap();
        assert_eq!(g.data(), &[0.0, 0.0, 5.0]);
    }

    #[test]
    fn uniform_logits() {
        for class in 0..3 {
            let (loss, g) = softmax_xent(&v(&[0.0, 0.0, 0.0]), class).unwrap();
            assert!((loss - 3f64.ln()).abs() < 1e-12);
            for (k, &gk) in g.data().iter().enumerate() {
                let expect = 1.0 / 3.0 - if k == class { 1.0 } else { 0.0 };
                assert!((f64::from(gk) - expect).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn confident_logits() {
        let (loss, g) = softmax_xent(&v(&[10.0, 0.0, 0.0]), 0).unwrap();
        // -ln(e^10 / (e^10 + 2)) = ln(1 + 2e^-10)
        let expect = (1.0 + 2.0 * (-10f64).exp()).ln();
        assert!((loss - expect).abs() < 1e-12);
        assert!((loss - 9.08e-5).abs() < 1e-7);
        let sum: f32 = g.data().iter().sum();
        assert!(sum.abs() < 1e-6);
    }

    #[test]
    fn shift_invariance() {
        let a = v(&[1.3, -0.7, 2.2]);
        let b = v(&[101.3, 99.3, 102.2]);
        let (la, ga) = softmax_xent(&a, 2).unwrap();
        let (lb, gb) = softmax_xent(&b, 2).unwrap();
        assert!((la - lb).abs() < 1e-5);
        assert!(ga.max_abs_diff(&gb).unwrap() < 1e-5);
    }

    #[test]
    fn class_out_of_range() {
        assert!(matches!(
            softmax_xent(&v(&[0.0, 0.0, 0.0]), 3),
            Err(Error::Domain(_))
        ));
    }
}
