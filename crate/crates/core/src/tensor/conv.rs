//! 3×3, stride 1, zero "same" padding convolution.

use super::{LayerGradients, Tensor};
use crate::{Error, Result};

const K: usize = 3;

struct Dims {
    c_in: usize,
    c_out: usize,
    h: usize,
    w: usize,
}

fn check(input: &Tensor, weights: &Tensor) -> Result<Dims> {
    input.expect_rank(3, "conv2d input")?;
    weights.expect_rank(4, "conv2d weights")?;
    let (c_in, h, w) = (input.shape()[0], input.shape()[1], input.shape()[2]);
    let ws = weights.shape();
    if ws[2] != K || ws[3] != K {
        return Err(Error::shape(format!(
            "conv2d: kernel must be 3x3, got {}x{}",
            ws[2], ws[3]
        )));
    }
    if ws[1] != c_in {
        return Err(Error::shape(format!(
            "conv2d: input has {c_in} channels but weights expect {}",
            ws[1]
        )));
    }
    Ok(Dims {
        c_in,
        c_out: ws[0],
        h,
        w,
    })
}

/// Output rows/columns `o` for which `o + k - 1` lands inside `0..n`.
#[inline]
fn valid(k: usize, n: usize) -> std::ops::Range<usize> {
    let lo = 1usize.saturating_sub(k);
    let hi = (n + 1).saturating_sub(k).min(n);
    lo..hi
}

pub fn conv2d_forward(input: &Tensor, weights: &Tensor, bias: &Tensor) -> Result<Tensor> {
    let d = check(input, weights)?;
    bias.expect_shape(&[d.c_out], "conv2d bias")?;
    let plane = d.h * d.w;
    let x = input.data();
    let wt = weights.data();
    let mut out = vec![0f32; d.c_out * plane];
    let mut acc = vec![0f64; plane];
    for f in 0..d.c_out {
        acc.fill(f64::from(bias.data()[f]));
        for c in 0..d.c_in {
            let src = &x[c * plane..(c + 1) * plane];
            for dy in 0..K {
                for dx in 0..K {
                    let wv = f64::from(wt[((f * d.c_in + c) * K + dy) * K + dx]);
                    if wv == 0.0 {
                        continue;
                    }
                    let xs = valid(dx, d.w);
                    for y in valid(dy, d.h) {
                        let row = (y + dy - 1) * d.w;
                        let a = &mut acc[y * d.w + xs.start..y * d.w + xs.end];
                        let s = &src[row + xs.start + dx - 1..row + xs.end + dx - 1];
                        for (o, &v) in a.iter_mut().zip(s) {
                            *o += wv * f64::from(v);
                        }
                    }
                }
            }
        }
        for (o, &a) in out[f * plane..(f + 1) * plane].iter_mut().zip(&acc) {
            *o = a as f32;
        }
    }
    Tensor::new(vec![d.c_out, d.h, d.w], out)
}

/// Gradients of a scalar loss with respect to weights, bias and input,
/// given `upstream` = ∂loss/∂output.
pub fn conv2d_backward(
    input: &Tensor,
    weights: &Tensor,
    upstream: &Tensor,
) -> Result<LayerGradients> {
    let (d_weights, d_bias, d_input) = backward(input, weights, upstream, true)?;
    Ok(LayerGradients {
        d_weights,
        d_bias,
        d_input: d_input.expect("input gradient requested"),
    })
}

/// Parameter gradients only; the first layer of a network has no use for
/// the input gradient.
pub(crate) fn conv2d_backward_params(
    input: &Tensor,
    weights: &Tensor,
    upstream: &Tensor,
) -> Result<(Tensor, Tensor)> {
    let (dw, db, _) = backward(input, weights, upstream, false)?;
    Ok((dw, db))
}

fn backward(
    input: &Tensor,
    weights: &Tensor,
    upstream: &Tensor,
    want_input: bool,
) -> Result<(Tensor, Tensor, Option<Tensor>)> {
    let d = check(input, weights)?;
    upstream.expect_shape(&[d.c_out, d.h, d.w], "conv2d upstream")?;
    let plane = d.h * d.w;
    let x = input.data();
    let g = upstream.data();
    let wt = weights.data();

    let mut d_bias = Vec::with_capacity(d.c_out);
    let mut d_w = vec![0f32; weights.len()];
    let mut d_in = if want_input {
        vec![0f64; d.c_in * plane]
    } else {
        Vec::new()
    };

    for f in 0..d.c_out {
        let gf = &g[f * plane..(f + 1) * plane];
        d_bias.push(gf.iter().map(|&v| f64::from(v)).sum::<f64>() as f32);
        for c in 0..d.c_in {
            let src = &x[c * plane..(c + 1) * plane];
            for dy in 0..K {
                for dx in 0..K {
                    let idx = ((f * d.c_in + c) * K + dy) * K + dx;
                    let xs = valid(dx, d.w);
                    let ys = valid(dy, d.h);
                    let mut sum = 0f64;
                    for y in ys.clone() {
                        let row = (y + dy - 1) * d.w;
                        let gr = &gf[y * d.w + xs.start..y * d.w + xs.end];
                        let s = &src[row + xs.start + dx - 1..row + xs.end + dx - 1];
                        for (&gv, &v) in gr.iter().zip(s) {
                            sum += f64::from(gv) * f64::from(v);
                        }
                    }
                    d_w[idx] = sum as f32;

                    if want_input {
                        let wv = f64::from(wt[idx]);
                        if wv == 0.0 {
                            continue;
                        }
                        let acc = &mut d_in[c * plane..(c + 1) * plane];
                        for y in ys {
                            let row = (y + dy - 1) * d.w;
                            let gr = &gf[y * d.w + xs.start..y * d.w + xs.end];
                            let a = &mut acc[row + xs.start + dx - 1..row + xs.end + dx - 1];
                            for (o, &gv) in a.iter_mut().zip(gr) {
                                *o += wv * f64::from(gv);
                            }
                        }
                    }
                }
            }
        }
    }

    let d_weights = Tensor::new(weights.shape().to_vec(), d_w)?;
    let d_bias = Tensor::new(vec![d.c_out], d_bias)?;
    let d_input = if want_input {
        Some(Tensor::new(
            input.shape().to_vec(),
            d_in.into_iter().map(|v| v as f32).collect(),
        )?)
    } else {
        None
    };
    Ok((d_weights, d_bias, d_input))
}
