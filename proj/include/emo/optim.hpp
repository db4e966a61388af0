// Copyright 2026 The emo-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "emo/models.hpp"
#include "emo/params.hpp"

namespace emo::optim {

enum class AggregatorKind { Mean, Sum, Attention };

const char* aggregator_name(AggregatorKind k);
AggregatorKind aggregator_from_name(const std::string& name);

struct AggregatorSpec {
    AggregatorKind kind = AggregatorKind::Mean;
    /// Registered network for the Attention kind; must outlive the spec.
    const ParamSet* attention_params = nullptr;
    models::AggregatorConfig attention_cfg;
};

struct InnerOptConfig {
    double alpha = 0.001;
    size_t steps = 5;
    size_t retrieval_k = 20;
    AggregatorSpec aggregator;
    double momentum = 0.9;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    double clip = 0.0; // 0 disables; excluded from oracle tests

    void validate() const;
};

/// (g + sum V_i) / (M+1); empty memory returns g.
GradSet aggr_mean(const GradSet& g, const std::vector<const GradSet*>& v);

/// g + (1/M) sum V_i; empty memory returns g.
GradSet aggr_sum(const GradSet& g, const std::vector<const GradSet*>& v);

/// Dispatch on the configured aggregator. Memory list order is the caller's;
/// the pipeline passes slots in ascending index order for reproducibility.
GradSet aggregate(const GradSet& g, const std::vector<const GradSet*>& v,
                  const AggregatorSpec& spec);

/// theta - alpha * Aggr(g, V), elementwise per layer.
ParamSet emo_step(const ParamSet& theta, const GradSet& g, const std::vector<const GradSet*>& v,
                  const InnerOptConfig& cfg);

/// Meta-SGD variant: elementwise learned step sizes instead of scalar alpha.
ParamSet emo_step_vec(const ParamSet& theta, const ParamSet& alpha_vec, const GradSet& g,
                      const std::vector<const GradSet*>& v, const AggregatorSpec& spec);

struct OptState {
    GradSet momentum; // velocity / first moment
    GradSet second;   // Adam second moment
    size_t step = 0;
};

ParamSet sgd_step(const ParamSet& theta, const GradSet& g, double alpha);
ParamSet momentum_step(const ParamSet& theta, const GradSet& g, OptState& state, double alpha,
                       double mu);
ParamSet adam_step(const ParamSet& theta, const GradSet& g, OptState& state, double alpha,
                   double beta1, double beta2, double eps);

} // namespace emo::optim
