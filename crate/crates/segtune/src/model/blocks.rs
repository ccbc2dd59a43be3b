//! Block decomposition: group the layers between consecutive pooling or
//! upsampling operations, the granularity at which freezing operates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::graph::{LayerKind, ModelGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlockRole {
    Contracting,
    Bottleneck,
    Expanding,
    /// The deepest expanding block, which also owns the 1x1 head.
    HeadAttached,
}

/// A group of two 3x3 convolutions (plus, on the expanding side, the
/// preceding 2x2 convolution) delimited by pool/upsample operations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerBlock {
    /// 1-based block number in network order.
    pub index: usize,
    pub role: BlockRole,
    /// 1-based ordinals of the member 3x3 convolutions, counted over all
    /// 3x3 convolutions in network order.
    pub conv_layer_indices: Vec<usize>,
    /// Position in the ordering by longest input-to-layer path
    /// (1 = shallowest).
    pub depth_rank: usize,
    /// Graph indices of every parameterized member layer, including the
    /// expanding-side 2x2 convolution and, for the last block, the head.
    pub param_layer_indices: Vec<usize>,
}

/// Decompose a built graph into its depth-ordered blocks.
///
/// For depth `d` this yields `2d - 1` blocks: `d` on the contracting
/// side (the deepest being the bottleneck) and `d - 1` expanding, the
/// last of which carries the head. Fails with a structural error when
/// the layer sequence does not follow that construction.
pub fn enumerate_blocks(graph: &ModelGraph) -> Result<Vec<LayerBlock>> {
    let layers = graph.layers();
    let mut blocks: Vec<LayerBlock> = Vec::new();
    let mut current_convs: Vec<usize> = Vec::new(); // conv3x3 ordinals
    let mut current_params: Vec<usize> = Vec::new(); // graph indices
    let mut conv_ordinal = 0usize;
    let mut head_index: Option<usize> = None;

    let mut flush = |convs: &mut Vec<usize>, params: &mut Vec<usize>| -> Result<()> {
        if convs.len() != 2 {
            return Err(Error::Structural(format!(
                "expected two 3x3 convolutions per block, found {}",
                convs.len()
            )));
        }
        blocks.push(LayerBlock {
            index: blocks.len() + 1,
            role: BlockRole::Contracting, // fixed up below
            conv_layer_indices: std::mem::take(convs),
            depth_rank: 0,
            param_layer_indices: std::mem::take(params),
        });
        Ok(())
    };

    for (i, layer) in layers.iter().enumerate() {
        match layer.kind {
            LayerKind::Conv3x3Relu { .. } => {
                conv_ordinal += 1;
                current_convs.push(conv_ordinal);
                current_params.push(i);
            }
            LayerKind::Conv2x2Relu { .. } => {
                if !current_convs.is_empty() {
                    return Err(Error::Structural(
                        "2x2 convolution found mid-block".into(),
                    ));
                }
                current_params.push(i);
            }
            LayerKind::MaxPool2x2 | LayerKind::Upsample2x => {
                flush(&mut current_convs, &mut current_params)?;
            }
            LayerKind::ConcatSkip { .. } | LayerKind::Dropout { .. } => {}
            LayerKind::Conv1x1Sigmoid { .. } => {
                if head_index.is_some() {
                    return Err(Error::Structural("multiple head layers".into()));
                }
                head_index = Some(i);
            }
        }
    }
    let head_index =
        head_index.ok_or_else(|| Error::Structural("graph has no output head".into()))?;
    // the trailing block (bottleneck for depth 1, otherwise the last
    // expanding block) is closed by the head rather than a delimiter
    current_params.push(head_index);
    flush(&mut current_convs, &mut current_params)?;

    let depth = graph.spec().depth;
    if blocks.len() != 2 * depth - 1 {
        return Err(Error::Structural(format!(
            "expected {} blocks for depth {depth}, found {}",
            2 * depth - 1,
            blocks.len()
        )));
    }

    // roles by position; the last block always owns the head
    let n = blocks.len();
    for b in blocks.iter_mut() {
        b.role = if b.index == n {
            BlockRole::HeadAttached
        } else if b.index < depth {
            BlockRole::Contracting
        } else if b.index == depth {
            BlockRole::Bottleneck
        } else {
            BlockRole::Expanding
        };
    }

    // depth ranks from longest paths through the graph
    let dist = graph.longest_paths();
    let mut keyed: Vec<(usize, usize)> = blocks
        .iter()
        .map(|b| {
            let deepest = b
                .param_layer_indices
                .iter()
                .map(|&i| dist[i])
                .max()
                .expect("block has layers");
            (deepest, b.index)
        })
        .collect();
    keyed.sort_unstable();
    for (rank, &(_, index)) in keyed.iter().enumerate() {
        blocks[index - 1].depth_rank = rank + 1;
    }

    Ok(blocks)
}
