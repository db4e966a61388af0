// Copyright 2026 The emo-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "emo/graph.hpp"
#include "emo/params.hpp"
#include "emo/rng.hpp"

namespace emo::models {

/// Shapes of the learnable networks. key_dim must equal embed_dim: support
/// embeddings are fed to the key attention blocks unprojected, and the cls
/// output at that width is the task key.
struct EncoderConfig {
    size_t input_dim = 20;
    std::vector<size_t> hidden{40, 40};
    size_t embed_dim = 64;
    size_t key_dim = 64;
    size_t key_blocks = 1;
    size_t ff_mult = 2;
    size_t head_dim = 5;

    void validate() const;
};

struct AggregatorConfig {
    size_t d_agg = 64;
    size_t ff_mult = 2;
};

/// Base learner: tanh MLP encoder (input -> hidden... -> embed) plus a linear
/// head. Layers adapt in the inner loop; "head.*" layers form the ANIL set.
ParamSet init_model_params(const EncoderConfig& cfg, RngStream& rng);

/// Task-key encoder: learned cls token plus pre-norm single-head attention
/// blocks at width key_dim.
ParamSet init_key_params(const EncoderConfig& cfg, RngStream& rng);

/// Attention aggregator: learned cls token, one attention block at width
/// d_agg, and per-layer in/out projections sized from the model schema.
ParamSet init_aggregator_params(const LayerSchema& model_schema, const AggregatorConfig& cfg,
                                RngStream& rng);

/// Graph-side view of a ParamSet: every layer loaded as a differentiable leaf.
struct GraphParams {
    std::vector<std::pair<std::string, Value>> items;

    Value at(const std::string& name) const;
    std::vector<Value> leaves() const;
};

GraphParams load_params(Graph& g, const ParamSet& p);

Value encoder_forward(Graph& g, const GraphParams& p, const EncoderConfig& cfg, Value x);
Value head_forward(Graph& g, const GraphParams& p, Value embeddings);
Value model_forward(Graph& g, const GraphParams& p, const EncoderConfig& cfg, Value x);

/// One pre-norm single-head attention block with residuals and a 2-layer tanh
/// feed-forward. Cross-token reductions are order-insensitive so outputs are
/// exactly invariant to token permutations.
Value attention_block(Graph& g, const GraphParams& p, const std::string& prefix, Value tokens);

/// Key-encoder forward: [cls; embeddings] through the blocks, output row 0.
Value task_key_forward(Graph& g, const GraphParams& keyp, const EncoderConfig& cfg,
                       Value embeddings);

/// Aggregator forward for one model layer: tokens are the projected flattened
/// current gradient and one projected token per memory entry.
Value aggregator_layer_forward(Graph& g, const GraphParams& aggp, const std::string& layer,
                               Value grad_token, const std::vector<Value>& memory_tokens);

/// Embeddings of the support inputs, one embed_dim vector per example.
std::vector<Tensor> encode_support(const std::vector<std::pair<Tensor, double>>& support,
                                   const ParamSet& model, const EncoderConfig& cfg);

/// Task key from support embeddings (Euclidean-retrievable, permutation
/// invariant). Requires at least one embedding.
Tensor task_key(const std::vector<Tensor>& embeddings, const ParamSet& keyp,
                const EncoderConfig& cfg);

/// Learnable combination of the current gradient with retrieved memory
/// gradients, applied layer by layer. Empty memory returns g unchanged.
GradSet aggregator_attention(const GradSet& g, const std::vector<const GradSet*>& memory,
                             const ParamSet& aggp, const AggregatorConfig& cfg);

} // namespace emo::models
