// Copyright 2026 The emo-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include "emo/tensor.hpp"

namespace emo {

/// Handle to a node in a Graph tape.
struct Value {
    int id = -1;
};

/// Recorded computation tape with reverse-mode differentiation.
///
/// Values are evaluated eagerly as they are recorded, so every shape rule is
/// checked at record time; backward() replays the tape in reverse. A graph is
/// not shared across threads while recording.
class Graph {
public:
    Graph() = default;
    Graph(const Graph&) = delete;
    Graph& operator=(const Graph&) = delete;

    /// Constant leaf: participates in the forward pass, receives no gradient.
    Value input(Tensor t);
    /// Differentiable leaf.
    Value param(Tensor t);

    Value matmul(Value a, Value b);
    /// matmul whose inner sums are order-insensitive (sorted accumulation);
    /// used where permutation invariance over tokens must be exact.
    Value matmul_set(Value a, Value b);
    Value transpose(Value a);
    Value add(Value a, Value b);
    /// Broadcast a row vector b over every row of a.
    Value add_rowvec(Value a, Value b);
    Value sub(Value a, Value b);
    Value mul(Value a, Value b);
    Value scale(Value a, double c);
    Value tanh(Value a);
    Value relu(Value a);
    Value exp(Value a);
    Value log(Value a);
    Value reduce_sum(Value a);
    /// Row-wise softmax (max-shifted).
    Value softmax_rows(Value a);
    /// Row-wise softmax with order-insensitive denominator sums.
    Value softmax_rows_set(Value a);
    /// Row-wise layer norm without affine terms, eps 1e-5.
    Value layer_norm_rows(Value a);
    Value gather_rows(Value a, std::vector<size_t> rows);
    Value concat_rows(const std::vector<Value>& parts);
    /// Cross entropy of row-wise logits against integer labels; summed over
    /// rows, or averaged when mean_reduce is set.
    Value cross_entropy(Value logits, std::vector<size_t> labels, bool mean_reduce);

    const Tensor& value(Value v) const;
    size_t size() const { return nodes_.size(); }

    /// Adjoints of `leaves` w.r.t. scalar `loss`. Every leaf must be a
    /// differentiable ancestor of the loss node.
    std::vector<Tensor> grad(Value loss, const std::vector<Value>& leaves);

private:
    enum class Op {
        Input, Param, MatMul, MatMulSet, Transpose, Add, AddRowVec, Sub, Mul,
        Scale, Tanh, Relu, Exp, Log, ReduceSum, SoftmaxRows, SoftmaxRowsSet,
        LayerNormRows, GatherRows, ConcatRows, CrossEntropy
    };

    struct Node {
        Op op;
        std::vector<int> in;
        Tensor val;
        double c = 0.0;                  // Scale factor / CE weight
        std::vector<size_t> idx;         // GatherRows rows / CE labels
    };

    Value push(Node n);
    const Tensor& tensor_of(Value v) const;
    void check(Value v) const;

    std::vector<Node> nodes_;
};

} // namespace emo
