//! Forward/backward passes over an [`ArchitectureSpec`].

use rand::Rng;

use super::arch::{Activation, ArchitectureSpec, LayerKind};
use crate::dataset::CrackLevel;
use crate::imaging::{resize_bilinear, ImageRGB};
use crate::rng::{derive_seed, seeded_rng};
use crate::tensor::{
    conv2d_backward, conv2d_backward_params, conv2d_forward, dense_backward, dense_forward,
    maxpool2d_backward, maxpool2d_forward, relu_backward, relu_forward, softmax, softmax_xent,
    Tensor,
};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ParamLayer {
    pub weights: Tensor,
    pub bias: Tensor,
}

/// Weights and biases of the parameterised layers (conv1–3, dense1–2,
/// output), in network order. Gradients use the same type.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub layers: Vec<ParamLayer>,
}

impl ModelParams {
    pub fn zeros(spec: &ArchitectureSpec) -> Result<Self> {
        Ok(ModelParams {
            layers: spec
                .param_shapes()?
                .into_iter()
                .map(|(w, b)| ParamLayer {
                    weights: Tensor::zeros(&w),
                    bias: Tensor::zeros(&b),
                })
                .collect(),
        })
    }

    pub fn tensors(&self) -> impl Iterator<Item = &Tensor> {
        self.layers.iter().flat_map(|l| [&l.weights, &l.bias])
    }

    pub fn tensors_mut(&mut self) -> impl Iterator<Item = &mut Tensor> {
        self.layers.iter_mut().flat_map(|l| [&mut l.weights, &mut l.bias])
    }

    pub fn param_count(&self) -> usize {
        self.tensors().map(Tensor::len).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().all(Tensor::is_finite)
    }

    /// Check every tensor against the shapes `spec` implies.
    pub fn check(&self, spec: &ArchitectureSpec) -> Result<()> {
        let shapes = spec.param_shapes()?;
        if shapes.len() != self.layers.len() {
            return Err(Error::shape(format!(
                "expected {} parameter layers, got {}",
                shapes.len(),
                self.layers.len()
            )));
        }
        for ((w, b), (layer, name)) in shapes
            .iter()
            .zip(self.layers.iter().zip(spec.param_layer_names()))
        {
            layer.weights.expect_shape(w, name)?;
            layer.bias.expect_shape(b, name)?;
        }
        Ok(())
    }
}

/// Glorot-uniform weights, zero biases, one RNG stream per layer.
pub fn build_network(spec: &ArchitectureSpec, seed: u64) -> Result<ModelParams> {
    let mut layers = Vec::new();
    for (i, (w, b)) in spec.param_shapes()?.into_iter().enumerate() {
        let (fan_in, fan_out) = if w.len() == 4 {
            (w[1] * 9, w[0] * 9)
        } else {
            (w[1], w[0])
        };
        let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
        let mut rng = seeded_rng(derive_seed(seed, &[0x1a7e, i as u64]));
        let n: usize = w.iter().product();
        let data = (0..n)
            .map(|_| rng.random_range(-limit..limit) as f32)
            .collect();
        layers.push(ParamLayer {
            weights: Tensor::new(w, data)?,
            bias: Tensor::zeros(&b),
        });
    }
    Ok(ModelParams { layers })
}

/// What the backward pass needs from each layer.
enum Saved {
    Conv { input: Tensor, pre: Tensor, relu: bool },
    Pool { input: Tensor },
    Flatten { shape: Vec<usize> },
    Dense { input: Tensor, pre: Tensor, relu: bool },
}

fn run(spec: &ArchitectureSpec, params: &ModelParams, x: &Tensor, keep: bool) -> Result<(Tensor, Vec<Saved>)> {
    let InputShape3 { c, h, w } = input_dims(spec);
    x.expect_shape(&[c, h, w], "network input")?;
    let mut saved = Vec::new();
    let mut cur = x.clone();
    let mut p = params.layers.iter();
    for layer in &spec.layers[1..] {
        let relu = layer.activation == Activation::Relu;
        cur = match layer.kind {
            LayerKind::Input => cur,
            LayerKind::Conv { .. } => {
                let pl = p.next().ok_or_else(|| Error::shape("missing conv parameters"))?;
                let pre = conv2d_forward(&cur, &pl.weights, &pl.bias)?;
                let out = if relu { relu_forward(&pre) } else { pre.clone() };
                if keep {
                    saved.push(Saved::Conv { input: cur, pre, relu });
                }
                out
            }
            LayerKind::MaxPool => {
                let out = maxpool2d_forward(&cur)?;
                if keep {
                    saved.push(Saved::Pool { input: cur });
                }
                out
            }
            LayerKind::Flatten => {
                if keep {
                    saved.push(Saved::Flatten {
                        shape: cur.shape().to_vec(),
                    });
                }
                let n = cur.len();
                cur.reshape(vec![n])?
            }
            LayerKind::Dense { .. } | LayerKind::Output { .. } => {
                let pl = p.next().ok_or_else(|| Error::shape("missing dense parameters"))?;
                let pre = dense_forward(&cur, &pl.weights, &pl.bias)?;
                let out = if relu { relu_forward(&pre) } else { pre.clone() };
                if keep {
                    saved.push(Saved::Dense { input: cur, pre, relu });
                }
                out
            }
        };
    }
    Ok((cur, saved))
}

struct InputShape3 {
    c: usize,
    h: usize,
    w: usize,
}

fn input_dims(spec: &ArchitectureSpec) -> InputShape3 {
    InputShape3 {
        c: spec.input.channels,
        h: spec.input.height,
        w: spec.input.width,
    }
}

/// Logits for a `[3, H, W]` input.
pub fn forward(spec: &ArchitectureSpec, params: &ModelParams, x: &Tensor) -> Result<Tensor> {
    run(spec, params, x, false).map(|(logits, _)| logits)
}

/// Cross-entropy loss for one sample and its gradient for every parameter.
pub fn loss_and_grad(
    spec: &ArchitectureSpec,
    params: &ModelParams,
    x: &Tensor,
    class: usize,
) -> Result<(f64, ModelParams)> {
    let (logits, saved) = run(spec, params, x, true)?;
    let (loss, mut grad) = softmax_xent(&logits, class)?;

    let mut out: Vec<Option<ParamLayer>> = vec![None; params.layers.len()];
    let mut pi = params.layers.len();
    let n_saved = saved.len();
    for (k, s) in saved.into_iter().rev().enumerate() {
        let first = k + 1 == n_saved;
        match s {
            Saved::Dense { input, pre, relu } => {
                pi -= 1;
                if relu {
                    grad = relu_backward(&pre, &grad)?;
                }
                let g = dense_backward(&input, &params.layers[pi].weights, &grad)?;
                out[pi] = Some(ParamLayer {
                    weights: g.d_weights,
                    bias: g.d_bias,
                });
                grad = g.d_input;
            }
            Saved::Flatten { shape } => grad = grad.reshape(shape)?,
            Saved::Pool { input } => grad = maxpool2d_backward(&input, &grad)?,
            Saved::Conv { input, pre, relu } => {
                pi -= 1;
                if relu {
                    grad = relu_backward(&pre, &grad)?;
                }
                let w = &params.layers[pi].weights;
                if first {
                    let (dw, db) = conv2d_backward_params(&input, w, &grad)?;
                    out[pi] = Some(ParamLayer { weights: dw, bias: db });
                } else {
                    let g = conv2d_backward(&input, w, &grad)?;
                    out[pi] = Some(ParamLayer {
                        weights: g.d_weights,
                        bias: g.d_bias,
                    });
                    grad = g.d_input;
                }
            }
        }
    }
    let layers = out
        .into_iter()
        .map(|l| l.ok_or_else(|| Error::shape("parameter layer without gradient")))
        .collect::<Result<_>>()?;
    Ok((loss, ModelParams { layers }))
}

/// `[3, H, W]` tensor with channels scaled to `[0, 1]`.
pub fn image_to_tensor(img: &ImageRGB) -> Tensor {
    let (w, h) = (img.width(), img.height());
    let plane = w * h;
    let mut data = vec![0f32; 3 * plane];
    for (i, px) in img.as_bytes().chunks_exact(3).enumerate() {
        for c in 0..3 {
            data[c * plane + i] = f32::from(px[c]) / 255.0;
        }
    }
    Tensor::new(vec![3, h, w], data).expect("image dimensions are positive")
}

/// Class probabilities for an input tensor; ties in the argmax go to the
/// lower level.
pub fn predict_tensor(
    spec: &ArchitectureSpec,
    params: &ModelParams,
    x: &Tensor,
) -> Result<(CrackLevel, Tensor)> {
    let logits = forward(spec, params, x)?;
    let probs = softmax(logits.data());
    let mut best = 0;
    for (k, &p) in probs.iter().enumerate() {
        if p > probs[best] {
            best = k;
        }
    }
    let probs = Tensor::from_vec(probs.into_iter().map(|p| p as f32).collect())?;
    Ok((CrackLevel::from_index(best)?, probs))
}

/// Classify an image, resizing it to the network input first if needed.
pub fn predict(
    spec: &ArchitectureSpec,
    params: &ModelParams,
    image: &ImageRGB,
) -> Result<(CrackLevel, Tensor)> {
    let (h, w) = (spec.input.height, spec.input.width);
    let x = if image.width() == w && image.height() == h {
        image_to_tensor(image)
    } else {
        image_to_tensor(&resize_bilinear(image, w, h)?)
    };
    predict_tensor(spec, params, &x)
}
