//! Layer table and shape bookkeeping.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    None,
    Relu,
    Softmax,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerKind {
    Input,
    Conv { filters: usize },
    MaxPool,
    Flatten,
    Dense { units: usize },
    Output { classes: usize },
}

impl LayerKind {
    pub fn has_params(self) -> bool {
        matches!(
            self,
            LayerKind::Conv { .. } | LayerKind::Dense { .. } | LayerKind::Output { .. }
        )
    }

    fn same_variant(self, other: LayerKind) -> bool {
        std::mem::discriminant(&self) == std::mem::discriminant(&other)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub name: String,
    pub kind: LayerKind,
    pub activation: Activation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputShape {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArchitectureSpec {
    pub input: InputShape,
    pub layers: Vec<LayerSpec>,
}

/// Layer kinds in order: input, three conv/pool stages, flatten, two dense,
/// output.
const ORDER: [LayerKind; 11] = [
    LayerKind::Input,
    LayerKind::Conv { filters: 0 },
    LayerKind::MaxPool,
    LayerKind::Conv { filters: 0 },
    LayerKind::MaxPool,
    LayerKind::Conv { filters: 0 },
    LayerKind::MaxPool,
    LayerKind::Flatten,
    LayerKind::Dense { units: 0 },
    LayerKind::Dense { units: 0 },
    LayerKind::Output { classes: 0 },
];

pub const DEFAULT_FILTERS: [usize; 3] = [8, 16, 32];
pub const DEFAULT_UNITS: [usize; 2] = [64, 32];
pub const CLASSES: usize = 3;

impl ArchitectureSpec {
    /// Default network for RGB input of `height` × `width`.
    pub fn new(height: usize, width: usize) -> Self {
        Self::with_widths(height, width, DEFAULT_FILTERS, DEFAULT_UNITS)
    }

    pub fn with_widths(height: usize, width: usize, filters: [usize; 3], units: [usize; 2]) -> Self {
        let l = |name: &str, kind, activation| LayerSpec {
            name: name.to_string(),
            kind,
            activation,
        };
        use Activation::*;
        let layers = vec![
            l("input", LayerKind::Input, None),
            l("conv1", LayerKind::Conv { filters: filters[0] }, Relu),
            l("pool1", LayerKind::MaxPool, None),
            l("conv2", LayerKind::Conv { filters: filters[1] }, Relu),
            l("pool2", LayerKind::MaxPool, None),
            l("conv3", LayerKind::Conv { filters: filters[2] }, Relu),
            l("pool3", LayerKind::MaxPool, None),
            l("flatten", LayerKind::Flatten, None),
            l("dense1", LayerKind::Dense { units: units[0] }, Relu),
            l("dense2", LayerKind::Dense { units: units[1] }, Relu),
            l("output", LayerKind::Output { classes: CLASSES }, Softmax),
        ];
        ArchitectureSpec {
            input: InputShape {
                channels: 3,
                height,
                width,
            },
            layers,
        }
    }

    /// Check the layer table and return each layer's output shape (the input
    /// layer's "output" is the input shape).
    pub fn output_shapes(&self) -> Result<Vec<Vec<usize>>> {
        let err = |layer: &str, message: String| Error::Build {
            layer: layer.to_string(),
            message,
        };
        if self.layers.len() != ORDER.len() {
            return Err(err(
                "<architecture>",
                format!("expected {} layers, found {}", ORDER.len(), self.layers.len()),
            ));
        }
        let InputShape {
            channels,
            height,
            width,
        } = self.input;
        if channels != 3 || height == 0 || width == 0 {
            return Err(err(
                &self.layers[0].name,
                format!("input must be 3×H×W with H, W > 0, got {channels}×{height}×{width}"),
            ));
        }

        let mut shapes = Vec::with_capacity(ORDER.len());
        let mut cur = vec![channels, height, width];
        for (layer, expected) in self.layers.iter().zip(ORDER) {
            if !layer.kind.same_variant(expected) {
                return Err(err(
                    &layer.name,
                    format!("expected a {expected:?}-kind layer here, found {:?}", layer.kind),
                ));
            }
            let act_ok = match layer.kind {
                LayerKind::Conv { .. } | LayerKind::Dense { .. } => {
                    matches!(layer.activation, Activation::Relu | Activation::None)
                }
                LayerKind::Output { .. } => layer.activation == Activation::Softmax,
                _ => layer.activation == Activation::None,
            };
            if !act_ok {
                return Err(err(
                    &layer.name,
                    format!("activation {:?} not allowed on {:?}", layer.activation, layer.kind),
                ));
            }
            cur = match layer.kind {
                LayerKind::Input => cur,
                LayerKind::Conv { filters } => {
                    if filters == 0 {
                        return Err(err(&layer.name, "zero filters".into()));
                    }
                    vec![filters, cur[1], cur[2]]
                }
                LayerKind::MaxPool => {
                    if cur[1] % 2 != 0 || cur[2] % 2 != 0 {
                        return Err(err(
                            &layer.name,
                            format!("2×2 pooling needs even height and width, got {}×{}", cur[1], cur[2]),
                        ));
                    }
                    vec![cur[0], cur[1] / 2, cur[2] / 2]
                }
                LayerKind::Flatten => vec![cur.iter().product()],
                LayerKind::Dense { units } | LayerKind::Output { classes: units } => {
                    if units == 0 {
                        return Err(err(&layer.name, "zero units".into()));
                    }
                    vec![units]
                }
            };
            shapes.push(cur.clone());
        }
        if let Some(LayerKind::Output { classes }) = self.layers.last().map(|l| l.kind) {
            if classes != CLASSES {
                return Err(err(
                    &self.layers[10].name,
                    format!("output must have {CLASSES} classes, got {classes}"),
                ));
            }
        }
        Ok(shapes)
    }

    pub fn validate(&self) -> Result<()> {
        self.output_shapes().map(|_| ())
    }

    /// Weight and bias shapes of each parameterised layer, in order.
    pub fn param_shapes(&self) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
        let shapes = self.output_shapes()?;
        let mut out = Vec::new();
        for (i, layer) in self.layers.iter().enumerate() {
            let prev = if i == 0 { &shapes[0] } else { &shapes[i - 1] };
            match layer.kind {
                LayerKind::Conv { filters } => {
                    out.push((vec![filters, prev[0], 3, 3], vec![filters]));
                }
                LayerKind::Dense { units } | LayerKind::Output { classes: units } => {
                    out.push((vec![units, prev[0]], vec![units]));
                }
                _ => {}
            }
        }
        Ok(out)
    }

    pub fn param_count(&self) -> Result<usize> {
        Ok(self
            .param_shapes()?
            .iter()
            .map(|(w, b)| w.iter().product::<usize>() + b.iter().product::<usize>())
            .sum())
    }

    pub fn param_layer_names(&self) -> impl Iterator<Item = &str> {
        self.layers
            .iter()
            .filter(|l| l.kind.has_params())
            .map(|l| l.name.as_str())
    }
}
