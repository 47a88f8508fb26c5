//! 2×2, stride 2 max pooling.

use super::Tensor;
use crate::{Error, Result};

fn check(input: &Tensor) -> Result<(usize, usize, usize)> {
    input.expect_rank(3, "maxpool2d input")?;
    let (c, h, w) = (input.shape()[0], input.shape()[1], input.shape()[2]);
    if h % 2 != 0 || w % 2 != 0 {
        return Err(Error::shape(format!(
            "maxpool2d: height and width must be even, got {h}x{w}"
        )));
    }
    Ok((c, h, w))
}

/// Offset (into the input plane) of the winning element of the block whose
/// top-left corner is (`y`, `x`). Ties go to the first element in row-major
/// order.
#[inline]
fn argmax(plane: &[f32], w: usize, y: usize, x: usize) -> usize {
    let cands = [y * w + x, y * w + x + 1, (y + 1) * w + x, (y + 1) * w + x + 1];
    let mut best = cands[0];
    for &i in &cands[1..] {
        if plane[i] > plane[best] {
            best = i;
        }
    }
    best
}

pub fn maxpool2d_forward(input: &Tensor) -> Result<Tensor> {
    let (c, h, w) = check(input)?;
    let (oh, ow) = (h / 2, w / 2);
    let mut out = Vec::with_capacity(c * oh * ow);
    for ch in 0..c {
        let plane = &input.data()[ch * h * w..(ch + 1) * h * w];
        for oy in 0..oh {
            for ox in 0..ow {
                out.push(plane[argmax(plane, w, 2 * oy, 2 * ox)]);
            }
        }
    }
    Tensor::new(vec![c, oh, ow], out)
}

/// Routes each upstream value to the argmax position of its block.
pub fn maxpool2d_backward(input: &Tensor, upstream: &Tensor) -> Result<Tensor> {
    let (c, h, w) = check(input)?;
    let (oh, ow) = (h / 2, w / 2);
    upstream.expect_shape(&[c, oh, ow], "maxpool2d upstream")?;
    let mut grad = vec![0f32; c * h * w];
    for ch in 0..c {
        let plane = &input.data()[ch * h * w..(ch + 1) * h * w];
        let g = &mut grad[ch * h * w..(ch + 1) * h * w];
        for oy in 0..oh {
            for ox in 0..ow {
                g[argmax(plane, w, 2 * oy, 2 * ox)] = upstream.data()[(ch * oh + oy) * ow + ox];
            }
        }
    }
    Tensor::new(input.shape().to_vec(), grad)
}
