//! U-Net computation graph: an ordered list of layer descriptors with
//! explicit skip links, built from an [`ArchitectureSpec`].

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::arch::ArchitectureSpec;

/// Channel-first activation shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shape {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
}

impl Shape {
    pub fn new(channels: usize, height: usize, width: usize) -> Self {
        Self {
            channels,
            height,
            width,
        }
    }

    pub fn len(&self) -> usize {
        self.channels * self.height * self.width
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// What a layer computes. Convolution kinds carry their channel counts;
/// spatial geometry lives in the per-layer shapes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LayerKind {
    /// 3x3 convolution, stride 1, same padding, ReLU.
    Conv3x3Relu { in_ch: usize, out_ch: usize },
    /// 2x2 max pooling, stride 2.
    MaxPool2x2,
    /// 2x nearest-neighbor upsampling.
    Upsample2x,
    /// 2x2 convolution after upsampling, same padding, ReLU; halves channels.
    Conv2x2Relu { in_ch: usize, out_ch: usize },
    /// Channel concatenation of the deep path with a skip connection.
    ConcatSkip { skip_from: usize },
    /// Inverted dropout; identity at inference time.
    Dropout { rate: f32 },
    /// 1x1 convolution with sigmoid activation (the output head).
    Conv1x1Sigmoid { in_ch: usize, out_ch: usize },
}

impl LayerKind {
    /// Kernel geometry for parameterized kinds.
    pub fn conv_dims(&self) -> Option<(usize, usize, usize, usize)> {
        match *self {
            LayerKind::Conv3x3Relu { in_ch, out_ch } => Some((in_ch, out_ch, 3, 3)),
            LayerKind::Conv2x2Relu { in_ch, out_ch } => Some((in_ch, out_ch, 2, 2)),
            LayerKind::Conv1x1Sigmoid { in_ch, out_ch } => Some((in_ch, out_ch, 1, 1)),
            _ => None,
        }
    }

    pub fn is_parameterized(&self) -> bool {
        self.conv_dims().is_some()
    }

    /// Parameter count: kernel weights plus one bias per output channel.
    pub fn parameter_count(&self) -> u64 {
        match self.conv_dims() {
            Some((in_ch, out_ch, kh, kw)) => (kh * kw * in_ch * out_ch + out_ch) as u64,
            None => 0,
        }
    }

    fn tag(&self) -> &'static str {
        match self {
            LayerKind::Conv3x3Relu { .. } => "conv3x3+relu",
            LayerKind::MaxPool2x2 => "maxpool2x2",
            LayerKind::Upsample2x => "upsample2x",
            LayerKind::Conv2x2Relu { .. } => "conv2x2+relu",
            LayerKind::ConcatSkip { .. } => "concat-skip",
            LayerKind::Dropout { .. } => "dropout",
            LayerKind::Conv1x1Sigmoid { .. } => "conv1x1+sigmoid",
        }
    }
}

/// One node of the graph. Every layer consumes the previous layer's
/// output (the network input for layer 0); concat layers additionally
/// consume the output of `skip_from`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub name: String,
    pub kind: LayerKind,
    pub in_shape: Shape,
    pub out_shape: Shape,
    /// Whether the layer's parameters receive gradient updates. Always
    /// false for layers without parameters.
    pub trainable: bool,
}

/// The built network: layer descriptors in execution order plus skip
/// links `(source layer, destination concat layer)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelGraph {
    spec: ArchitectureSpec,
    layers: Vec<Layer>,
    skip_links: Vec<(usize, usize)>,
}

/// Which parameters to count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamSelector {
    All,
    Trainable,
    Frozen,
}

/// Construct the network graph for a validated spec.
///
/// Contracting level `l` holds two 3x3 convolutions with
/// `base_filters * 2^(l-1)` filters followed by a maxpool (except the
/// deepest level, the bottleneck, which is followed by dropout). Each
/// expanding step upsamples, halves channels with a 2x2 convolution,
/// concatenates the matching skip, and applies two 3x3 convolutions.
/// A 1x1 sigmoid head maps to a single output channel.
pub fn build_unet(spec: &ArchitectureSpec) -> Result<ModelGraph> {
    spec.validate()?;

    let depth = spec.depth;
    let mut layers: Vec<Layer> = Vec::new();
    let mut skip_links: Vec<(usize, usize)> = Vec::new();
    // skip sources: index of each contracting block's second conv, shallow first
    let mut skip_sources: Vec<usize> = Vec::new();

    let mut ch = spec.input_channels;
    let mut h = spec.input_height;
    let mut w = spec.input_width;

    let mut push = |layers: &mut Vec<Layer>, name: String, kind: LayerKind, i: Shape, o: Shape| {
        layers.push(Layer {
            name,
            kind,
            in_shape: i,
            out_shape: o,
            trainable: kind.is_parameterized(),
        });
        layers.len() - 1
    };

    for level in 1..=depth {
        let filters = spec.filters_at_level(level);
        let block = level;
        let idx = push(
            &mut layers,
            format!("block{block}.conv1"),
            LayerKind::Conv3x3Relu {
                in_ch: ch,
                out_ch: filters,
            },
            Shape::new(ch, h, w),
            Shape::new(filters, h, w),
        );
        let _ = idx;
        ch = filters;
        let second = push(
            &mut layers,
            format!("block{block}.conv2"),
            LayerKind::Conv3x3Relu {
                in_ch: ch,
                out_ch: filters,
            },
            Shape::new(ch, h, w),
            Shape::new(filters, h, w),
        );
        if level < depth {
            skip_sources.push(second);
            push(
                &mut layers,
                format!("pool{level}"),
                LayerKind::MaxPool2x2,
                Shape::new(ch, h, w),
                Shape::new(ch, h / 2, w / 2),
            );
            h /= 2;
            w /= 2;
        } else {
            // dropout right after the contracting path
            push(
                &mut layers,
                "dropout".to_string(),
                LayerKind::Dropout {
                    rate: spec.dropout_rate,
                },
                Shape::new(ch, h, w),
                Shape::new(ch, h, w),
            );
        }
    }

    for step in 1..depth {
        let block = depth + step;
        let skip_level = depth - step; // contracting level at the target resolution
        let halved = ch / 2;
        push(
            &mut layers,
            format!("up{step}"),
            LayerKind::Upsample2x,
            Shape::new(ch, h, w),
            Shape::new(ch, h * 2, w * 2),
        );
        h *= 2;
        w *= 2;
        push(
            &mut layers,
            format!("block{block}.upconv"),
            LayerKind::Conv2x2Relu {
                in_ch: ch,
                out_ch: halved,
            },
            Shape::new(ch, h, w),
            Shape::new(halved, h, w),
        );
        ch = halved;
        let skip_src = skip_sources[skip_level - 1];
        let skip_ch = layers[skip_src].out_shape.channels;
        let concat_idx = push(
            &mut layers,
            format!("concat{step}"),
            LayerKind::ConcatSkip {
                skip_from: skip_src,
            },
            Shape::new(ch, h, w),
            Shape::new(ch + skip_ch, h, w),
        );
        skip_links.push((skip_src, concat_idx));
        let cat_ch = ch + skip_ch;
        push(
            &mut layers,
            format!("block{block}.conv1"),
            LayerKind::Conv3x3Relu {
                in_ch: cat_ch,
                out_ch: halved,
            },
            Shape::new(cat_ch, h, w),
            Shape::new(halved, h, w),
        );
        push(
            &mut layers,
            format!("block{block}.conv2"),
            LayerKind::Conv3x3Relu {
                in_ch: halved,
                out_ch: halved,
            },
            Shape::new(halved, h, w),
            Shape::new(halved, h, w),
        );
        ch = halved;
    }

    push(
        &mut layers,
        "head".to_string(),
        LayerKind::Conv1x1Sigmoid {
            in_ch: ch,
            out_ch: 1,
        },
        Shape::new(ch, h, w),
        Shape::new(1, h, w),
    );

    Ok(ModelGraph {
        spec: spec.clone(),
        layers,
        skip_links,
    })
}

impl ModelGraph {
    pub fn spec(&self) -> &ArchitectureSpec {
        &self.spec
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn skip_links(&self) -> &[(usize, usize)] {
        &self.skip_links
    }

    pub fn input_shape(&self) -> Shape {
        self.layers[0].in_shape
    }

    pub fn output_shape(&self) -> Shape {
        self.layers.last().expect("graph has layers").out_shape
    }

    pub(crate) fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    /// Graph index of the layer with the given name.
    pub fn layer_index(&self, name: &str) -> Option<usize> {
        self.layers.iter().position(|l| l.name == name)
    }

    /// Deterministic identity of the architecture: a SHA-256 over layer
    /// kinds, shapes, and ordering. Trainability does not participate,
    /// so freeze plans do not change the fingerprint.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        for (i, layer) in self.layers.iter().enumerate() {
            let line = format!(
                "{i}|{}|{}x{}x{}|{}x{}x{}\n",
                layer.kind.tag(),
                layer.in_shape.channels,
                layer.in_shape.height,
                layer.in_shape.width,
                layer.out_shape.channels,
                layer.out_shape.height,
                layer.out_shape.width,
            );
            hasher.update(line.as_bytes());
        }
        for (src, dst) in &self.skip_links {
            hasher.update(format!("skip {src}->{dst}\n").as_bytes());
        }
        hex::encode(hasher.finalize())
    }

    /// Total parameters over the selected subset of layers.
    pub fn count_parameters(&self, selector: ParamSelector) -> u64 {
        self.layers
            .iter()
            .filter(|l| match selector {
                ParamSelector::All => true,
                ParamSelector::Trainable => l.trainable,
                ParamSelector::Frozen => l.kind.is_parameterized() && !l.trainable,
            })
            .map(|l| l.kind.parameter_count())
            .sum()
    }

    /// Longest path (in layers) from the network input to each layer's
    /// output, counting the layer itself. Skip links participate.
    pub(crate) fn longest_paths(&self) -> Vec<usize> {
        let mut dist = vec![0usize; self.layers.len()];
        for i in 0..self.layers.len() {
            let mut best = if i == 0 { 0 } else { dist[i - 1] };
            if let LayerKind::ConcatSkip { skip_from } = self.layers[i].kind {
                best = best.max(dist[skip_from]);
            }
            dist[i] = best + 1;
        }
        dist
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn conv3x3_count(g: &ModelGraph) -> usize {
        g.layers()
            .iter()
            .filter(|l| matches!(l.kind, LayerKind::Conv3x3Relu { .. }))
            .count()
    }

    fn kind_count(g: &ModelGraph, pred: fn(&LayerKind) -> bool) -> usize {
        g.layers().iter().filter(|l| pred(&l.kind)).count()
    }

    #[test]
    fn depth5_structure_matches_construction_rule() {
        let spec = ArchitectureSpec::new(256, 256, 1, 5, 64);
        let g = build_unet(&spec).unwrap();
        assert_eq!(conv3x3_count(&g), 18); // 4*depth - 2
        assert_eq!(
            kind_count(&g, |k| matches!(k, LayerKind::MaxPool2x2)),
            4
        );
        assert_eq!(
            kind_count(&g, |k| matches!(k, LayerKind::Upsample2x)),
            4
        );
        assert_eq!(
            kind_count(&g, |k| matches!(k, LayerKind::Conv1x1Sigmoid { .. })),
            1
        );
        assert_eq!(g.output_shape(), Shape::new(1, 256, 256));

        // filter ladder 64,128,256,512,1024 on the contracting side
        let ladder: Vec<usize> = g
            .layers()
            .iter()
            .filter_map(|l| match l.kind {
                LayerKind::Conv3x3Relu { out_ch, .. } => Some(out_ch),
                _ => None,
            })
            .take(10)
            .collect();
        assert_eq!(ladder, vec![64, 64, 128, 128, 256, 256, 512, 512, 1024, 1024]);
    }

    #[test]
    fn depth1_is_two_convs_plus_head() {
        let spec = ArchitectureSpec::new(8, 8, 1, 1, 8);
        let g = build_unet(&spec).unwrap();
        assert_eq!(conv3x3_count(&g), 2);
        assert_eq!(kind_count(&g, |k| matches!(k, LayerKind::MaxPool2x2)), 0);
        assert_eq!(kind_count(&g, |k| matches!(k, LayerKind::Upsample2x)), 0);
        assert_eq!(
            kind_count(&g, |k| matches!(k, LayerKind::Conv1x1Sigmoid { .. })),
            1
        );
    }

    #[test]
    fn depth3_conv_count_from_rule() {
        let spec = ArchitectureSpec::new(128, 128, 1, 3, 16);
        let g = build_unet(&spec).unwrap();
        assert_eq!(conv3x3_count(&g), 10); // 4*3 - 2
        assert_eq!(kind_count(&g, |k| matches!(k, LayerKind::MaxPool2x2)), 2);
        assert_eq!(kind_count(&g, |k| matches!(k, LayerKind::Upsample2x)), 2);
    }

    #[test]
    fn dropout_sits_after_bottleneck_second_conv() {
        let spec = ArchitectureSpec::new(64, 64, 1, 3, 8);
        let g = build_unet(&spec).unwrap();
        let drop = g.layer_index("dropout").unwrap();
        assert_eq!(g.layers()[drop - 1].name, "block3.conv2");
        assert!(matches!(g.layers()[drop].kind, LayerKind::Dropout { .. }));
    }

    #[test]
    fn skip_links_join_equal_resolutions() {
        let spec = ArchitectureSpec::new(64, 64, 1, 4, 8);
        let g = build_unet(&spec).unwrap();
        assert_eq!(g.skip_links().len(), 3);
        for &(src, dst) in g.skip_links() {
            let s = g.layers()[src].out_shape;
            let d = g.layers()[dst].out_shape;
            assert_eq!((s.height, s.width), (d.height, d.width));
            assert!(matches!(g.layers()[dst].kind, LayerKind::ConcatSkip { .. }));
        }
    }

    #[test]
    fn invalid_spec_is_rejected() {
        let spec = ArchitectureSpec::new(100, 100, 1, 5, 64);
        assert!(matches!(build_unet(&spec), Err(Error::Config(_))));
    }

    #[test]
    fn first_conv_parameter_count() {
        let spec = ArchitectureSpec::new(256, 256, 1, 5, 64);
        let g = build_unet(&spec).unwrap();
        let first = &g.layers()[0];
        assert_eq!(first.kind.parameter_count(), 640); // 9*1*64 + 64
    }

    #[test]
    fn fingerprint_ignores_trainability() {
        let spec = ArchitectureSpec::new(64, 64, 1, 2, 4);
        let g1 = build_unet(&spec).unwrap();
        let mut g2 = g1.clone();
        for l in g2.layers_mut() {
            l.trainable = false;
        }
        assert_eq!(g1.fingerprint(), g2.fingerprint());
        // but a different architecture fingerprints differently
        let g3 = build_unet(&ArchitectureSpec::new(64, 64, 1, 2, 8)).unwrap();
        assert_ne!(g1.fingerprint(), g3.fingerprint());
    }
}
