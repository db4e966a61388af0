// Copyright 2026 The emo-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "emo/graph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace emo {

namespace {

void require_rank2(const Tensor& t, const char* op) {
    if (t.shape.size() != 2)
        throw std::invalid_argument(std::string(op) + ": expected rank-2 tensor, got " +
                                    shape_str(t.shape));
}

} // namespace

Value Graph::push(Node n) {
    if (!n.val.all_finite())
        throw std::runtime_error("graph: non-finite value produced by op");
    nodes_.push_back(std::move(n));
    return Value{static_cast<int>(nodes_.size()) - 1};
}

void Graph::check(Value v) const {
    if (v.id < 0 || v.id >= static_cast<int>(nodes_.size()))
        throw std::invalid_argument("graph: dangling value handle");
}

const Tensor& Graph::tensor_of(Value v) const {
    check(v);
    return nodes_[v.id].val;
}

const Tensor& Graph::value(Value v) const { return tensor_of(v); }

Value Graph::input(Tensor t) { return push({Op::Input, {}, std::move(t), 0.0, {}}); }
Value Graph::param(Tensor t) { return push({Op::Param, {}, std::move(t), 0.0, {}}); }

Value Graph::matmul(Value a, Value b) {
    const Tensor& x = tensor_of(a);
    const Tensor& y = tensor_of(b);
    require_rank2(x, "matmul");
    require_rank2(y, "matmul");
    if (x.shape[1] != y.shape[0])
        throw std::invalid_argument("matmul: inner dims " + shape_str(x.shape) + " vs " +
                                    shape_str(y.shape));
    Tensor out = Tensor::zeros({x.shape[0], y.shape[1]});
    for (size_t i = 0; i < x.shape[0]; ++i)
        for (size_t k = 0; k < x.shape[1]; ++k) {
            double v = x.at(i, k);
            if (v == 0.0) continue;
            for (size_t j = 0; j < y.shape[1]; ++j) out.at(i, j) += v * y.at(k, j);
        }
    return push({Op::MatMul, {a.id, b.id}, std::move(out), 0.0, {}});
}

Value Graph::matmul_set(Value a, Value b) {
    const Tensor& x = tensor_of(a);
    const Tensor& y = tensor_of(b);
    require_rank2(x, "matmul_set");
    require_rank2(y, "matmul_set");
    if (x.shape[1] != y.shape[0])
        throw std::invalid_argument("matmul_set: inner dims " + shape_str(x.shape) + " vs " +
                                    shape_str(y.shape));
    Tensor out = Tensor::zeros({x.shape[0], y.shape[1]});
    std::vector<double> terms;
    for (size_t i = 0; i < x.shape[0]; ++i)
        for (size_t j = 0; j < y.shape[1]; ++j) {
            terms.clear();
            for (size_t k = 0; k < x.shape[1]; ++k) terms.push_back(x.at(i, k) * y.at(k, j));
            out.at(i, j) = set_sum(terms);
        }
    return push({Op::MatMulSet, {a.id, b.id}, std::move(out), 0.0, {}});
}

Value Graph::transpose(Value a) {
    const Tensor& x = tensor_of(a);
    require_rank2(x, "transpose");
    Tensor out = Tensor::zeros({x.shape[1], x.shape[0]});
    for (size_t i = 0; i < x.shape[0]; ++i)
        for (size_t j = 0; j < x.shape[1]; ++j) out.at(j, i) = x.at(i, j);
    return push({Op::Transpose, {a.id}, std::move(out), 0.0, {}});
}

Value Graph::add(Value a, Value b) {
    return push({Op::Add, {a.id, b.id}, emo::add(tensor_of(a), tensor_of(b)), 0.0, {}});
}

Value Graph::add_rowvec(Value a, Value b) {
    const Tensor& x = tensor_of(a);
    const Tensor& v = tensor_of(b);
    require_rank2(x, "add_rowvec");
    if (v.numel() != x.shape[1])
        throw std::invalid_argument("add_rowvec: vector length " + std::to_string(v.numel()) +
                                    " vs row width " + std::to_string(x.shape[1]));
    Tensor out = x;
    for (size_t i = 0; i < x.shape[0]; ++i)
        for (size_t j = 0; j < x.shape[1]; ++j) out.at(i, j) += v.data[j];
    return push({Op::AddRowVec, {a.id, b.id}, std::move(out), 0.0, {}});
}

Value Graph::sub(Value a, Value b) {
    return push({Op::Sub, {a.id, b.id}, emo::sub(tensor_of(a), tensor_of(b)), 0.0, {}});
}

Value Graph::mul(Value a, Value b) {
    return push({Op::Mul, {a.id, b.id}, emo::mul(tensor_of(a), tensor_of(b)), 0.0, {}});
}

Value Graph::scale(Value a, double c) {
    return push({Op::Scale, {a.id}, emo::scale(tensor_of(a), c), c, {}});
}

Value Graph::tanh(Value a) {
    Tensor out = tensor_of(a);
    for (double& v : out.data) v = std::tanh(v);
    return push({Op::Tanh, {a.id}, std::move(out), 0.0, {}});
}

Value Graph::relu(Value a) {
    Tensor out = tensor_of(a);
    for (double& v : out.data) v = v > 0.0 ? v : 0.0;
    return push({Op::Relu, {a.id}, std::move(out), 0.0, {}});
}

Value Graph::exp(Value a) {
    Tensor out = tensor_of(a);
    for (double& v : out.data) v = std::exp(v);
    return push({Op::Exp, {a.id}, std::move(out), 0.0, {}});
}

Value Graph::log(Value a) {
    Tensor out = tensor_of(a);
    for (double& v : out.data) v = std::log(v);
    return push({Op::Log, {a.id}, std::move(out), 0.0, {}});
}

Value Graph::reduce_sum(Value a) {
    Tensor out = Tensor::vector({sum(tensor_of(a))});
    return push({Op::ReduceSum, {a.id}, std::move(out), 0.0, {}});
}

namespace {

Tensor softmax_forward(const Tensor& x, bool set_sums) {
    Tensor out = x;
    std::vector<double> terms;
    for (size_t i = 0; i < x.shape[0]; ++i) {
        double mx = x.at(i, 0);
        for (size_t j = 1; j < x.shape[1]; ++j) mx = std::max(mx, x.at(i, j));
        double denom;
        if (set_sums) {
            terms.clear();
            for (size_t j = 0; j < x.shape[1]; ++j) terms.push_back(std::exp(x.at(i, j) - mx));
            denom = set_sum(terms);
        } else {
            denom = 0.0;
            for (size_t j = 0; j < x.shape[1]; ++j) denom += std::exp(x.at(i, j) - mx);
        }
        for (size_t j = 0; j < x.shape[1]; ++j) out.at(i, j) = std::exp(x.at(i, j) - mx) / denom;
    }
    return out;
}

} // namespace

Value Graph::softmax_rows(Value a) {
    const Tensor& x = tensor_of(a);
    require_rank2(x, "softmax_rows");
    return push({Op::SoftmaxRows, {a.id}, softmax_forward(x, false), 0.0, {}});
}

Value Graph::softmax_rows_set(Value a) {
    const Tensor& x = tensor_of(a);
    require_rank2(x, "softmax_rows_set");
    return push({Op::SoftmaxRowsSet, {a.id}, softmax_forward(x, true), 0.0, {}});
}

Value Graph::layer_norm_rows(Value a) {
    const Tensor& x = tensor_of(a);
    require_rank2(x, "layer_norm_rows");
    const double eps = 1e-5;
    Tensor out = x;
    const size_t n = x.shape[1];
    for (size_t i = 0; i < x.shape[0]; ++i) {
        double mu = 0.0;
        for (size_t j = 0; j < n; ++j) mu += x.at(i, j);
        mu /= double(n);
        double var = 0.0;
        for (size_t j = 0; j < n; ++j) var += (x.at(i, j) - mu) * (x.at(i, j) - mu);
        var /= double(n);
        double s = 1.0 / std::sqrt(var + eps);
        for (size_t j = 0; j < n; ++j) out.at(i, j) = (x.at(i, j) - mu) * s;
    }
    return push({Op::LayerNormRows, {a.id}, std::move(out), 0.0, {}});
}

Value Graph::gather_rows(Value a, std::vector<size_t> rows) {
    const Tensor& x = tensor_of(a);
    require_rank2(x, "gather_rows");
    for (size_t r : rows)
        if (r >= x.shape[0])
            throw std::invalid_argument("gather_rows: row " + std::to_string(r) + " out of " +
                                        std::to_string(x.shape[0]));
    Tensor out = Tensor::zeros({rows.size(), x.shape[1]});
    for (size_t i = 0; i < rows.size(); ++i)
        for (size_t j = 0; j < x.shape[1]; ++j) out.at(i, j) = x.at(rows[i], j);
    return push({Op::GatherRows, {a.id}, std::move(out), 0.0, std::move(rows)});
}

Value Graph::concat_rows(const std::vector<Value>& parts) {
    if (parts.empty()) throw std::invalid_argument("concat_rows: no parts");
    size_t cols = tensor_of(parts[0]).shape.size() == 2 ? tensor_of(parts[0]).shape[1]
                                                        : tensor_of(parts[0]).numel();
    size_t rows = 0;
    std::vector<int> in;
    for (Value p : parts) {
        const Tensor& t = tensor_of(p);
        require_rank2(t, "concat_rows");
        if (t.shape[1] != cols)
            throw std::invalid_argument("concat_rows: width mismatch " + shape_str(t.shape));
        rows += t.shape[0];
        in.push_back(p.id);
    }
    Tensor out = Tensor::zeros({rows, cols});
    size_t r = 0;
    for (Value p : parts) {
        const Tensor& t = tensor_of(p);
        for (size_t i = 0; i < t.shape[0]; ++i, ++r)
            for (size_t j = 0; j < cols; ++j) out.at(r, j) = t.at(i, j);
    }
    return push({Op::ConcatRows, std::move(in), std::move(out), 0.0, {}});
}

Value Graph::cross_entropy(Value logits, std::vector<size_t> labels, bool mean_reduce) {
    const Tensor& z = tensor_of(logits);
    require_rank2(z, "cross_entropy");
    if (labels.size() != z.shape[0])
        throw std::invalid_argument("cross_entropy: " + std::to_string(labels.size()) +
                                    " labels for " + std::to_string(z.shape[0]) + " rows");
    for (size_t y : labels)
        if (y >= z.shape[1])
            throw std::invalid_argument("cross_entropy: label " + std::to_string(y) +
                                        " out of " + std::to_string(z.shape[1]) + " classes");
    double w = mean_reduce ? 1.0 / double(z.shape[0]) : 1.0;
    double total = 0.0;
    for (size_t i = 0; i < z.shape[0]; ++i) {
        double mx = z.at(i, 0);
        for (size_t j = 1; j < z.shape[1]; ++j) mx = std::max(mx, z.at(i, j));
        double lse = 0.0;
        for (size_t j = 0; j < z.shape[1]; ++j) lse += std::exp(z.at(i, j) - mx);
        lse = mx + std::log(lse);
        total += lse - z.at(i, labels[i]);
    }
    Tensor out = Tensor::vector({w * total});
    return push({Op::CrossEntropy, {logits.id}, std::move(out), w, std::move(labels)});
}

std::vector<Tensor> Graph::grad(Value loss, const std::vector<Value>& leaves) {
    check(loss);
    if (tensor_of(loss).numel() != 1)
        throw std::invalid_argument("grad: loss is not scalar, shape " +
                                    shape_str(tensor_of(loss).shape));

    // Mark ancestors of the loss so unrelated subgraphs are skipped.
    std::vector<char> reach(nodes_.size(), 0);
    reach[loss.id] = 1;
    for (int i = loss.id; i >= 0; --i) {
        if (!reach[i]) continue;
        for (int j : nodes_[i].in) reach[j] = 1;
    }
    for (Value leaf : leaves) {
        check(leaf);
        if (nodes_[leaf.id].op != Op::Param)
            throw std::invalid_argument("grad: leaf is not a parameter node");
        if (!reach[leaf.id])
            throw std::invalid_argument("grad: loss does not reach parameter node " +
                                        std::to_string(leaf.id));
    }

    std::vector<Tensor> adj(nodes_.size());
    auto acc = [&](int id) -> Tensor& {
        if (adj[id].data.empty() && nodes_[id].val.numel() > 0)
            adj[id] = Tensor::zeros(nodes_[id].val.shape);
        return adj[id];
    };
    acc(loss.id).data[0] = 1.0;

    for (int i = loss.id; i >= 0; --i) {
        if (!reach[i] || adj[i].data.empty()) continue;
        const Node& n = nodes_[i];
        const Tensor& d = adj[i];
        switch (n.op) {
        case Op::Input:
        case Op::Param:
            break;
        case Op::MatMul:
        case Op::MatMulSet: {
            const Tensor& x = nodes_[n.in[0]].val;
            const Tensor& y = nodes_[n.in[1]].val;
            Tensor& dx = acc(n.in[0]);
            Tensor& dy = acc(n.in[1]);
            for (size_t r = 0; r < x.shape[0]; ++r)
                for (size_t c = 0; c < y.shape[1]; ++c) {
                    double g = d.at(r, c);
                    if (g == 0.0) continue;
                    for (size_t k = 0; k < x.shape[1]; ++k) {
                        dx.at(r, k) += g * y.at(k, c);
                        dy.at(k, c) += g * x.at(r, k);
                    }
                }
            break;
        }
        case Op::Transpose: {
            Tensor& dx = acc(n.in[0]);
            for (size_t r = 0; r < d.shape[0]; ++r)
                for (size_t c = 0; c < d.shape[1]; ++c) dx.at(c, r) += d.at(r, c);
            break;
        }
        case Op::Add: {
            axpy(acc(n.in[0]), 1.0, d);
            axpy(acc(n.in[1]), 1.0, d);
            break;
        }
        case Op::AddRowVec: {
            axpy(acc(n.in[0]), 1.0, d);
            Tensor& dv = acc(n.in[1]);
            for (size_t r = 0; r < d.shape[0]; ++r)
                for (size_t c = 0; c < d.shape[1]; ++c) dv.data[c] += d.at(r, c);
            break;
        }
        case Op::Sub: {
            axpy(acc(n.in[0]), 1.0, d);
            axpy(acc(n.in[1]), -1.0, d);
            break;
        }
        case Op::Mul: {
            const Tensor& x = nodes_[n.in[0]].val;
            const Tensor& y = nodes_[n.in[1]].val;
            Tensor& dx = acc(n.in[0]);
            Tensor& dy = acc(n.in[1]);
            for (size_t k = 0; k < d.data.size(); ++k) {
                dx.data[k] += d.data[k] * y.data[k];
                dy.data[k] += d.data[k] * x.data[k];
            }
            break;
        }
        case Op::Scale:
            axpy(acc(n.in[0]), n.c, d);
            break;
        case Op::Tanh: {
            Tensor& dx = acc(n.in[0]);
            for (size_t k = 0; k < d.data.size(); ++k)
                dx.data[k] += d.data[k] * (1.0 - n.val.data[k] * n.val.data[k]);
            break;
        }
        case Op::Relu: {
            const Tensor& x = nodes_[n.in[0]].val;
            Tensor& dx = acc(n.in[0]);
            for (size_t k = 0; k < d.data.size(); ++k)
                dx.data[k] += x.data[k] > 0.0 ? d.data[k] : 0.0;
            break;
        }
        case Op::Exp: {
            Tensor& dx = acc(n.in[0]);
            for (size_t k = 0; k < d.data.size(); ++k) dx.data[k] += d.data[k] * n.val.data[k];
            break;
        }
        case Op::Log: {
            const Tensor& x = nodes_[n.in[0]].val;
            Tensor& dx = acc(n.in[0]);
            for (size_t k = 0; k < d.data.size(); ++k) dx.data[k] += d.data[k] / x.data[k];
            break;
        }
        case Op::ReduceSum: {
            Tensor& dx = acc(n.in[0]);
            for (double& v : dx.data) v += d.data[0];
            break;
        }
        case Op::SoftmaxRows:
        case Op::SoftmaxRowsSet: {
            Tensor& dx = acc(n.in[0]);
            for (size_t r = 0; r < n.val.shape[0]; ++r) {
                double inner = 0.0;
                for (size_t c = 0; c < n.val.shape[1]; ++c)
                    inner += d.at(r, c) * n.val.at(r, c);
                for (size_t c = 0; c < n.val.shape[1]; ++c)
                    dx.at(r, c) += n.val.at(r, c) * (d.at(r, c) - inner);
            }
            break;
        }
        case Op::LayerNormRows: {
            const Tensor& x = nodes_[n.in[0]].val;
            Tensor& dx = acc(n.in[0]);
            const size_t w = x.shape[1];
            const double eps = 1e-5;
            for (size_t r = 0; r < x.shape[0]; ++r) {
                double mu = 0.0;
                for (size_t c = 0; c < w; ++c) mu += x.at(r, c);
                mu /= double(w);
                double var = 0.0;
                for (size_t c = 0; c < w; ++c) var += (x.at(r, c) - mu) * (x.at(r, c) - mu);
                var /= double(w);
                double s = 1.0 / std::sqrt(var + eps);
                double mean_d = 0.0, mean_dy = 0.0;
                for (size_t c = 0; c < w; ++c) {
                    mean_d += d.at(r, c);
                    mean_dy += d.at(r, c) * n.val.at(r, c);
                }
                mean_d /= double(w);
                mean_dy /= double(w);
                for (size_t c = 0; c < w; ++c)
                    dx.at(r, c) += s * (d.at(r, c) - mean_d - n.val.at(r, c) * mean_dy);
            }
            break;
        }
        case Op::GatherRows: {
            Tensor& dx = acc(n.in[0]);
            for (size_t r = 0; r < n.idx.size(); ++r)
                for (size_t c = 0; c < d.shape[1]; ++c) dx.at(n.idx[r], c) += d.at(r, c);
            break;
        }
        case Op::ConcatRows: {
            size_t r = 0;
            for (int src : n.in) {
                Tensor& dx = acc(src);
                for (size_t i = 0; i < nodes_[src].val.shape[0]; ++i, ++r)
                    for (size_t c = 0; c < d.shape[1]; ++c) dx.at(i, c) += d.at(r, c);
            }
            break;
        }
        case Op::CrossEntropy: {
            const Tensor& z = nodes_[n.in[0]].val;
            Tensor& dz = acc(n.in[0]);
            double g = d.data[0] * n.c;
            for (size_t r = 0; r < z.shape[0]; ++r) {
                double mx = z.at(r, 0);
                for (size_t c = 1; c < z.shape[1]; ++c) mx = std::max(mx, z.at(r, c));
                double denom = 0.0;
                for (size_t c = 0; c < z.shape[1]; ++c) denom += std::exp(z.at(r, c) - mx);
                for (size_t c = 0; c < z.shape[1]; ++c) {
                    double p = std::exp(z.at(r, c) - mx) / denom;
                    dz.at(r, c) += g * (p - (c == n.idx[r] ? 1.0 : 0.0));
                }
            }
            break;
        }
        }
    }

    std::vector<Tensor> out;
    out.reserve(leaves.size());
    for (Value leaf : leaves) {
        if (adj[leaf.id].data.empty())
            out.push_back(Tensor::zeros(nodes_[leaf.id].val.shape));
        else
            out.push_back(adj[leaf.id]);
    }
    return out;
}

} // namespace emo
