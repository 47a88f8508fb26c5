//! `TCK1` checkpoint format.
//!
//! ```text
//! "TCK1"                         magic
//! u32 layer_count                little-endian, all integers below too
//! per layer:
//!   u8  tag                      low nibble kind, high nibble activation
//!   u8  name_len, name (UTF-8)
//!   tensor weights, tensor bias
//! u32 crc32 of every preceding byte
//!
//! tensor: u32 rank, rank × u32 dims, Π dims × f32 (IEEE-754 LE)
//!         rank 0 means "no tensor" and carries no payload
//! ```
//!
//! Every layer of the architecture is written, so the file is
//! self-describing. Pooling and flatten layers carry no tensors. The input
//! layer's weight slot holds the rank-1 tensor `[channels, height, width]`.

use std::fs;
use std::path::Path;

use super::arch::{Activation, ArchitectureSpec, InputShape, LayerKind, LayerSpec};
use super::network::{ModelParams, ParamLayer};
use crate::tensor::Tensor;
use crate::{Error, Result};

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"TCK1";

fn tag(layer: &LayerSpec) -> u8 {
    let kind = match layer.kind {
        LayerKind::Input => 0,
        LayerKind::Conv { .. } => 1,
        LayerKind::MaxPool => 2,
        LayerKind::Flatten => 3,
        LayerKind::Dense { .. } => 4,
        LayerKind::Output { .. } => 5,
    };
    let act = match layer.activation {
        Activation::None => 0,
        Activation::Relu => 1,
        Activation::Softmax => 2,
    };
    (act << 4) | kind
}

fn put_u32(out: &mut Vec<u8>, v: usize) {
    out.extend_from_slice(&(v as u32).to_le_bytes());
}

fn put_tensor(out: &mut Vec<u8>, t: Option<&Tensor>) {
    match t {
        None => put_u32(out, 0),
        Some(t) => {
            put_u32(out, t.rank());
            for &d in t.shape() {
                put_u32(out, d);
            }
            for v in t.data() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
}

pub fn encode_checkpoint(params: &ModelParams, spec: &ArchitectureSpec) -> Result<Vec<u8>> {
    spec.validate()?;
    params.check(spec)?;
    let mut out = Vec::new();
    out.extend_from_slice(CHECKPOINT_MAGIC);
    put_u32(&mut out, spec.layers.len());
    let mut p = params.layers.iter();
    for layer in &spec.layers {
        out.push(tag(layer));
        let name = layer.name.as_bytes();
        if name.len() > u8::MAX as usize {
            return Err(Error::Format(format!("layer name `{}` too long", layer.name)));
        }
        out.push(name.len() as u8);
        out.extend_from_slice(name);
        match layer.kind {
            LayerKind::Input => {
                let InputShape {
                    channels,
                    height,
                    width,
                } = spec.input;
                let dims = Tensor::from_vec(vec![channels as f32, height as f32, width as f32])?;
                put_tensor(&mut out, Some(&dims));
                put_tensor(&mut out, None);
            }
            k if k.has_params() => {
                let pl = p.next().expect("params checked against spec");
                put_tensor(&mut out, Some(&pl.weights));
                put_tensor(&mut out, Some(&pl.bias));
            }
            _ => {
                put_tensor(&mut out, None);
                put_tensor(&mut out, None);
            }
        }
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    Ok(out)
}

/// Exact encoded size: 8 header bytes, per layer
/// `2 + name + (4 + 4·rank) per tensor slot + 4·floats`, 4 CRC bytes.
pub fn checkpoint_len(params: &ModelParams, spec: &ArchitectureSpec) -> usize {
    let mut n = 8 + 4;
    let mut p = params.layers.iter();
    for layer in &spec.layers {
        n += 2 + layer.name.len();
        n += match layer.kind {
            LayerKind::Input => (4 + 4) + 4 * 3 + 4,
            k if k.has_params() => {
                let pl = p.next().expect("params match spec");
                (4 + 4 * pl.weights.rank()) + (4 + 4 * pl.bias.rank())
                    + 4 * (pl.weights.len() + pl.bias.len())
            }
            _ => 8,
        };
    }
    n
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(Error::Corrupt {
                offset: self.pos,
                message: format!("truncated while reading {what}"),
            });
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }

    fn u32(&mut self, what: &str) -> Result<usize> {
        let b = self.take(4, what)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as usize)
    }

    fn tensor(&mut self, what: &str) -> Result<Option<Tensor>> {
        let at = self.pos;
        let rank = self.u32(what)?;
        if rank == 0 {
            return Ok(None);
        }
        if rank > 8 {
            return Err(Error::Corrupt {
                offset: at,
                message: format!("{what}: implausible rank {rank}"),
            });
        }
        let dims = (0..rank)
            .map(|_| self.u32(what))
            .collect::<Result<Vec<_>>>()?;
        let n = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .filter(|&n| n <= (self.buf.len() - self.pos) / 4 && n > 0)
            .ok_or_else(|| Error::Corrupt {
                offset: self.pos,
                message: format!("{what}: dims {dims:?} exceed the remaining file"),
            })?;
        let bytes = self.take(4 * n, what)?;
        let data = bytes
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
            .collect();
        Tensor::new(dims, data).map(Some)
    }
}

fn kind_from_tag(t: u8, weights: Option<&Tensor>) -> Result<(LayerKind, Activation)> {
    let act = match t >> 4 {
        0 => Activation::None,
        1 => Activation::Relu,
        2 => Activation::Softmax,
        a => return Err(Error::Format(format!("unknown activation code {a}"))),
    };
    let out_dim = || {
        weights
            .map(|w| w.shape()[0])
            .ok_or_else(|| Error::Format("parameterised layer without weights".into()))
    };
    let kind = match t & 0x0f {
        0 => LayerKind::Input,
        1 => LayerKind::Conv { filters: out_dim()? },
        2 => LayerKind::MaxPool,
        3 => LayerKind::Flatten,
        4 => LayerKind::Dense { units: out_dim()? },
        5 => LayerKind::Output { classes: out_dim()? },
        k => return Err(Error::Format(format!("unknown layer kind code {k}"))),
    };
    Ok((kind, act))
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<(ModelParams, ArchitectureSpec)> {
    if bytes.len() < 4 {
        return Err(Error::Corrupt {
            offset: bytes.len(),
            message: "file shorter than the magic".into(),
        });
    }
    if &bytes[..4] != CHECKPOINT_MAGIC {
        if &bytes[..3] == b"TCK" {
            return Err(Error::Format(format!(
                "unsupported checkpoint version `{}`",
                String::from_utf8_lossy(&bytes[..4])
            )));
        }
        return Err(Error::Format("bad magic, not a TCK1 checkpoint".into()));
    }
    let mut r = Reader { buf: bytes, pos: 4 };
    let count = r.u32("layer count")?;
    if count > 64 {
        return Err(Error::Corrupt {
            offset: 4,
            message: format!("implausible layer count {count}"),
        });
    }

    let mut layers = Vec::with_capacity(count);
    let mut params = Vec::new();
    let mut input = None;
    for i in 0..count {
        let t = r.u8("layer tag")?;
        let name_len = r.u8("name length")? as usize;
        let name_at = r.pos;
        let name = std::str::from_utf8(r.take(name_len, "layer name")?)
            .map_err(|_| Error::Corrupt {
                offset: name_at,
                message: "layer name is not UTF-8".into(),
            })?
            .to_string();
        let weights = r.tensor("weights")?;
        let bias = r.tensor("bias")?;
        let (kind, activation) = kind_from_tag(t, weights.as_ref())?;
        match kind {
            LayerKind::Input => {
                let d = weights
                    .as_ref()
                    .filter(|w| w.shape() == [3])
                    .ok_or_else(|| Error::Format("input layer must record its shape".into()))?
                    .data();
                input = Some(InputShape {
                    channels: d[0] as usize,
                    height: d[1] as usize,
                    width: d[2] as usize,
                });
            }
            k if k.has_params() => match (weights, bias) {
                (Some(weights), Some(bias)) => params.push(ParamLayer { weights, bias }),
                _ => {
                    return Err(Error::Format(format!(
                        "layer {i} (`{name}`) is missing weights or bias"
                    )))
                }
            },
            _ => {
                if weights.is_some() || bias.is_some() {
                    return Err(Error::Format(format!(
                        "layer {i} (`{name}`) should not carry tensors"
                    )));
                }
            }
        }
        layers.push(LayerSpec {
            name,
            kind,
            activation,
        });
    }

    let body_end = r.pos;
    let stored = r.u32("checksum")? as u32;
    if r.pos != bytes.len() {
        return Err(Error::Corrupt {
            offset: r.pos,
            message: format!("{} trailing bytes", bytes.len() - r.pos),
        });
    }
    let actual = crc32fast::hash(&bytes[..body_end]);
    if stored != actual {
        return Err(Error::Corrupt {
            offset: body_end,
            message: format!("checksum mismatch (stored {stored:08x}, computed {actual:08x})"),
        });
    }

    let spec = ArchitectureSpec {
        input: input.ok_or_else(|| Error::Format("no input layer".into()))?,
        layers,
    };
    spec.validate()?;
    let params = ModelParams { layers: params };
    params
        .check(&spec)
        .map_err(|e| Error::Format(format!("tensor shapes disagree with architecture: {e}")))?;
    Ok((params, spec))
}

pub fn save_checkpoint(
    params: &ModelParams,
    spec: &ArchitectureSpec,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_checkpoint(params, spec)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<(ModelParams, ArchitectureSpec)> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_checkpoint(&bytes)
}
