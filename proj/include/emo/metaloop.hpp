// Copyright 2026 The emo-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "emo/memstore.hpp"
#include "emo/models.hpp"
#include "emo/optim.hpp"
#include "emo/params.hpp"
#include "emo/taskgen.hpp"

namespace emo::metaloop {

enum class Variant { MAML, ANIL, MetaSGD };

const char* variant_name(Variant v);
Variant variant_from_name(const std::string& name);

struct MetaLearnerSpec {
    Variant variant = Variant::MAML;
    double outer_lr = 0.01;
    size_t meta_batch = 4;
    optim::InnerOptConfig inner;
    bool first_order = true;
    /// Full unrolled curvature products are only attempted below this
    /// parameter count (and only for Mean/Sum aggregation with a
    /// deterministic support gradient).
    size_t second_order_param_limit = 4096;
    /// Apply memory writes inside the batch loop instead of after it.
    bool write_per_task = false;
    /// Layers adapted by ANIL.
    std::string anil_prefix = "head.";

    void validate() const;
};

/// One few-shot episode exposed through loss/gradient oracles, so the meta
/// loop is agnostic to whether the episode is a supervised task or a
/// synthetic quadratic.
class Problem {
public:
    virtual ~Problem() = default;
    virtual uint64_t id() const = 0;
    virtual double support_loss(const ParamSet& theta) = 0;
    virtual GradSet support_grad(const ParamSet& theta) = 0;
    virtual double query_loss(const ParamSet& theta) = 0;
    virtual GradSet query_grad(const ParamSet& theta) = 0;
    /// Accuracy for classification, mean squared error for regression,
    /// objective gap for quadratics.
    virtual double query_metric(const ParamSet& theta) = 0;
    virtual Tensor key(const ParamSet& theta) = 0;
    /// Whether support_grad is a pure function of theta (required for the
    /// curvature products of the second-order path).
    virtual bool deterministic_grad() const { return true; }
};

struct EpisodeResult {
    uint64_t task_id = 0;
    double query_loss = 0.0;
    double query_metric = 0.0;
    std::vector<double> step_losses; // support loss at step 0..steps
    std::vector<size_t> retrieved;   // slot indices, ascending
};

/// Retained per-episode state the outer update consumes.
struct AdaptTrace {
    EpisodeResult episode;
    ParamSet theta_adapted;
    Tensor key;
    GradSet write_value; // g_t in the store schema
    GradSet outer_grad;  // d(query loss)/d(theta)
    GradSet alpha_grad;  // MetaSGD only
};

struct MetaState {
    ParamSet theta;
    ParamSet alpha_vec; // MetaSGD per-parameter step sizes; empty otherwise
    size_t clamp_events = 0;
};

MetaState make_meta_state(ParamSet theta, const MetaLearnerSpec& spec);

/// Value schema stored per memory slot for this learner: adapted layers only
/// under ANIL, plus a flattened learning-rate-gradient pseudo layer under
/// Meta-SGD.
LayerSchema memory_schema(const ParamSet& model_params, const MetaLearnerSpec& spec);

/// Support gradient, task key, retrieval, then `steps` aggregated updates.
/// Retrieval reads the store without touching metadata; the caller decides
/// when accesses and writes are applied.
AdaptTrace inner_adapt(Problem& problem, const ParamSet& theta, const ParamSet* alpha_vec,
                       const memstore::MemoryStore& store, const MetaLearnerSpec& spec);

/// theta <- theta - beta * mean outer gradient; Meta-SGD also updates the
/// step-size vector, clamped elementwise at 1e-8.
void outer_update(MetaState& state, const std::vector<AdaptTrace>& batch,
                  const MetaLearnerSpec& spec);

using ProblemFactory = std::function<std::unique_ptr<Problem>(uint64_t index)>;

struct TrainLogRow {
    size_t iteration = 0;
    std::vector<double> mean_step_losses;
    double mean_query_loss = 0.0;
    double mean_metric = 0.0;
    double wall_seconds = 0.0;
};

/// Algorithm: per iteration sample a meta batch, adapt each task, mark the
/// batch's retrieved slots as accessed, write each task's (key, gradient)
/// pair, then apply one outer update. Requires an unfrozen store.
std::vector<TrainLogRow> meta_train(const ProblemFactory& factory, MetaState& state,
                                    memstore::MemoryStore& store, const MetaLearnerSpec& spec,
                                    size_t iterations);

/// Meta-test protocol: adaptation and query evaluation against a frozen
/// store; rejected if the store is not frozen.
EpisodeResult meta_test(Problem& problem, const ParamSet& theta, const ParamSet* alpha_vec,
                        const memstore::MemoryStore& store, const MetaLearnerSpec& spec);

void write_train_log_csv(std::ostream& os, const std::vector<TrainLogRow>& rows,
                         bool include_wall);

enum class LossKind { CrossEntropy, MeanSquared };

/// Few-shot episode over a sampled Task: tanh-MLP encoder plus linear head.
/// Support loss is the sum of per-example losses (its per-layer gradient is
/// the memory value); query loss is the per-example mean.
class SupervisedProblem : public Problem {
public:
    SupervisedProblem(taskgen::Task task, models::EncoderConfig cfg, const ParamSet* key_params,
                      LossKind loss, uint64_t id);

    uint64_t id() const override { return id_; }
    double support_loss(const ParamSet& theta) override;
    GradSet support_grad(const ParamSet& theta) override;
    double query_loss(const ParamSet& theta) override;
    GradSet query_grad(const ParamSet& theta) override;
    double query_metric(const ParamSet& theta) override;
    Tensor key(const ParamSet& theta) override;

private:
    taskgen::Task task_;
    models::EncoderConfig cfg_;
    const ParamSet* key_params_;
    LossKind loss_;
    uint64_t id_;
};

/// Quadratic episode: theta is a single "theta" layer; gradients are exact
/// plus injected noise; the retrieval key is an independent noisy gradient.
class QuadraticProblem : public Problem {
public:
    QuadraticProblem(taskgen::QuadraticTask task, uint64_t id, uint64_t noise_seed);

    uint64_t id() const override { return id_; }
    double support_loss(const ParamSet& theta) override;
    GradSet support_grad(const ParamSet& theta) override;
    double query_loss(const ParamSet& theta) override;
    GradSet query_grad(const ParamSet& theta) override;
    double query_metric(const ParamSet& theta) override;
    Tensor key(const ParamSet& theta) override;
    bool deterministic_grad() const override { return task_.sigma == 0.0; }

    const taskgen::QuadraticTask& task() const { return task_; }

private:
    taskgen::QuadraticTask task_;
    uint64_t id_;
    RngStream grad_rng_;
    RngStream key_rng_;
};

} // namespace emo::metaloop
