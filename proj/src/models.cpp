// Copyright 2026 The emo-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "emo/models.hpp"

#include <cmath>
#include <stdexcept>

namespace emo::models {

void EncoderConfig::validate() const {
    if (input_dim < 1 || embed_dim < 1 || key_dim < 1 || head_dim < 1 || key_blocks < 1)
        throw std::invalid_argument("encoder config: all dims must be >= 1");
    for (size_t h : hidden)
        if (h < 1) throw std::invalid_argument("encoder config: hidden width must be >= 1");
    if (key_dim != embed_dim)
        throw std::invalid_argument("encoder config: key_dim must equal embed_dim");
}

namespace {

Tensor gaussian(std::vector<size_t> shape, double std, RngStream& rng) {
    Tensor t = Tensor::zeros(std::move(shape));
    for (double& v : t.data) v = rng.gauss(0.0, std);
    return t;
}

Tensor fan_in_init(size_t rows, size_t cols, RngStream& rng) {
    return gaussian({rows, cols}, 1.0 / std::sqrt(double(rows)), rng);
}

void add_attention_block(ParamSet& p, const std::string& prefix, size_t d, size_t ff_mult,
                         RngStream& rng) {
    p.add(prefix + ".wq", fan_in_init(d, d, rng));
    p.add(prefix + ".wk", fan_in_init(d, d, rng));
    p.add(prefix + ".wv", fan_in_init(d, d, rng));
    p.add(prefix + ".wo", fan_in_init(d, d, rng));
    p.add(prefix + ".ff.w1", fan_in_init(d, d * ff_mult, rng));
    p.add(prefix + ".ff.b1", Tensor::zeros({d * ff_mult}));
    p.add(prefix + ".ff.w2", fan_in_init(d * ff_mult, d, rng));
    p.add(prefix + ".ff.b2", Tensor::zeros({d}));
}

} // namespace

ParamSet init_model_params(const EncoderConfig& cfg, RngStream& rng) {
    cfg.validate();
    ParamSet p;
    size_t in = cfg.input_dim;
    for (size_t i = 0; i < cfg.hidden.size(); ++i) {
        p.add("enc.w" + std::to_string(i), fan_in_init(in, cfg.hidden[i], rng));
        p.add("enc.b" + std::to_string(i), Tensor::zeros({cfg.hidden[i]}));
        in = cfg.hidden[i];
    }
    p.add("enc.wout", fan_in_init(in, cfg.embed_dim, rng));
    p.add("enc.bout", Tensor::zeros({cfg.embed_dim}));
    p.add("head.w", fan_in_init(cfg.embed_dim, cfg.head_dim, rng));
    p.add("head.b", Tensor::zeros({cfg.head_dim}));
    return p;
}

ParamSet init_key_params(const EncoderConfig& cfg, RngStream& rng) {
    cfg.validate();
    ParamSet p;
    p.add("key.cls", gaussian({1, cfg.key_dim}, 0.02, rng));
    for (size_t b = 0; b < cfg.key_blocks; ++b)
        add_attention_block(p, "key.b" + std::to_string(b), cfg.key_dim, cfg.ff_mult, rng);
    return p;
}

ParamSet init_aggregator_params(const LayerSchema& model_schema, const AggregatorConfig& cfg,
                                RngStream& rng) {
    ParamSet p;
    p.add("agg.cls", gaussian({1, cfg.d_agg}, 0.02, rng));
    add_attention_block(p, "agg.blk", cfg.d_agg, cfg.ff_mult, rng);
    for (const auto& [name, shape] : model_schema) {
        size_t n = shape_numel(shape);
        p.add("agg.proj." + name, fan_in_init(n, cfg.d_agg, rng));
        p.add("agg.back." + name, fan_in_init(cfg.d_agg, n, rng));
    }
    return p;
}

Value GraphParams::at(const std::string& name) const {
    for (const auto& [k, v] : items)
        if (k == name) return v;
    throw std::invalid_argument("graph params: no layer '" + name + "'");
}

std::vector<Value> GraphParams::leaves() const {
    std::vector<Value> out;
    out.reserve(items.size());
    for (const auto& [k, v] : items) out.push_back(v);
    return out;
}

GraphParams load_params(Graph& g, const ParamSet& p) {
    GraphParams gp;
    for (const auto& [k, v] : p) gp.items.emplace_back(k, g.param(v));
    return gp;
}

Value encoder_forward(Graph& g, const GraphParams& p, const EncoderConfig& cfg, Value x) {
    Value h = x;
    for (size_t i = 0; i < cfg.hidden.size(); ++i) {
        h = g.add_rowvec(g.matmul(h, p.at("enc.w" + std::to_string(i))),
                         p.at("enc.b" + std::to_string(i)));
        h = g.tanh(h);
    }
    return g.add_rowvec(g.matmul(h, p.at("enc.wout")), p.at("enc.bout"));
}

Value head_forward(Graph& g, const GraphParams& p, Value embeddings) {
    return g.add_rowvec(g.matmul(embeddings, p.at("head.w")), p.at("head.b"));
}

Value model_forward(Graph& g, const GraphParams& p, const EncoderConfig& cfg, Value x) {
    return head_forward(g, p, encoder_forward(g, p, cfg, x));
}

Value attention_block(Graph& g, const GraphParams& p, const std::string& prefix, Value tokens) {
    const size_t d = g.value(tokens).shape[1];
    Value u = g.layer_norm_rows(tokens);
    Value q = g.matmul(u, p.at(prefix + ".wq"));
    Value k = g.matmul(u, p.at(prefix + ".wk"));
    Value v = g.matmul(u, p.at(prefix + ".wv"));
    Value scores = g.scale(g.matmul(q, g.transpose(k)), 1.0 / std::sqrt(double(d)));
    Value attn = g.softmax_rows_set(scores);
    Value mixed = g.matmul_set(attn, v);
    Value x1 = g.add(tokens, g.matmul(mixed, p.at(prefix + ".wo")));
    Value u2 = g.layer_norm_rows(x1);
    Value f = g.tanh(g.add_rowvec(g.matmul(u2, p.at(prefix + ".ff.w1")), p.at(prefix + ".ff.b1")));
    Value ff = g.add_rowvec(g.matmul(f, p.at(prefix + ".ff.w2")), p.at(prefix + ".ff.b2"));
    return g.add(x1, ff);
}

Value task_key_forward(Graph& g, const GraphParams& keyp, const EncoderConfig& cfg,
                       Value embeddings) {
    Value tokens = g.concat_rows({keyp.at("key.cls"), embeddings});
    for (size_t b = 0; b < cfg.key_blocks; ++b)
        tokens = attention_block(g, keyp, "key.b" + std::to_string(b), tokens);
    return g.gather_rows(tokens, {0});
}

Value aggregator_layer_forward(Graph& g, const GraphParams& aggp, const std::string& layer,
                               Value grad_token, const std::vector<Value>& memory_tokens) {
    Value proj = aggp.at("agg.proj." + layer);
    std::vector<Value> toks{aggp.at("agg.cls"), g.matmul(grad_token, proj)};
    for (Value m : memory_tokens) toks.push_back(g.matmul(m, proj));
    Value x = attention_block(g, aggp, "agg.blk", g.concat_rows(toks));
    return g.matmul(g.gather_rows(x, {0}), aggp.at("agg.back." + layer));
}

std::vector<Tensor> encode_support(const std::vector<std::pair<Tensor, double>>& support,
                                   const ParamSet& model, const EncoderConfig& cfg) {
    if (support.empty()) return {};
    for (const auto& [x, y] : support)
        if (x.numel() != cfg.input_dim)
            throw std::invalid_argument("encode_support: input dim " + std::to_string(x.numel()) +
                                        " != " + std::to_string(cfg.input_dim));
    Tensor x = Tensor::zeros({support.size(), cfg.input_dim});
    for (size_t i = 0; i < support.size(); ++i)
        for (size_t j = 0; j < cfg.input_dim; ++j) x.at(i, j) = support[i].first.data[j];
    Graph g;
    GraphParams gp = load_params(g, model);
    const Tensor& e = g.value(encoder_forward(g, gp, cfg, g.input(std::move(x))));
    std::vector<Tensor> out;
    out.reserve(support.size());
    for (size_t i = 0; i < support.size(); ++i) {
        Tensor row = Tensor::zeros({cfg.embed_dim});
        for (size_t j = 0; j < cfg.embed_dim; ++j) row.data[j] = e.at(i, j);
        out.push_back(std::move(row));
    }
    return out;
}

Tensor task_key(const std::vector<Tensor>& embeddings, const ParamSet& keyp,
                const EncoderConfig& cfg) {
    if (embeddings.empty()) throw std::invalid_argument("task_key: no embeddings");
    for (const Tensor& e : embeddings)
        if (e.numel() != cfg.embed_dim)
            throw std::invalid_argument("task_key: embedding dim " + std::to_string(e.numel()) +
                                        " != " + std::to_string(cfg.embed_dim));
    Tensor x = Tensor::zeros({embeddings.size(), cfg.embed_dim});
    for (size_t i = 0; i < embeddings.size(); ++i)
        for (size_t j = 0; j < cfg.embed_dim; ++j) x.at(i, j) = embeddings[i].data[j];
    Graph g;
    GraphParams gp = load_params(g, keyp);
    const Tensor& k = g.value(task_key_forward(g, gp, cfg, g.input(std::move(x))));
    Tensor out = Tensor::zeros({cfg.key_dim});
    for (size_t j = 0; j < cfg.key_dim; ++j) out.data[j] = k.at(0, j);
    return out;
}

GradSet aggregator_attention(const GradSet& g_t, const std::vector<const GradSet*>& memory,
                             const ParamSet& aggp, const AggregatorConfig& cfg) {
    if (memory.empty()) return clone(g_t);
    for (const GradSet* m : memory)
        if (!m->congruent(g_t))
            throw std::invalid_argument("aggregator_attention: memory token schema mismatch");
    (void)cfg;
    GradSet out;
    Graph g;
    GraphParams gp = load_params(g, aggp);
    for (size_t li = 0; li < g_t.size(); ++li) {
        const auto& [name, grad] = g_t[li];
        Value gt = g.input(Tensor::matrix(1, grad.numel(), grad.data));
        std::vector<Value> mem;
        mem.reserve(memory.size());
        for (const GradSet* m : memory)
            mem.push_back(g.input(Tensor::matrix(1, grad.numel(), (*m)[li].second.data)));
        const Tensor& o = g.value(aggregator_layer_forward(g, gp, name, gt, mem));
        out.add(name, Tensor(grad.shape, o.data));
    }
    return out;
}

} // namespace emo::models
