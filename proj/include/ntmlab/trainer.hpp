#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ntmlab/model.hpp"
#include "ntmlab/tasks.hpp"

namespace ntmlab {

struct RmsPropConfig {
    double lr = 1e-4;
    double momentum = 0.9;
    double decay = 0.95;
    double eps = 1e-8;
};

// RMSProp with momentum on the update:
//   ms  <- decay*ms + (1-decay)*g^2
//   mom <- momentum*mom - lr * g / sqrt(ms + eps)
//   p   <- p + mom
class RmsProp {
public:
    RmsProp(const ParameterStore& params, RmsPropConfig cfg);

    void step(ParameterStore& params);

    const RmsPropConfig& config() const { return cfg_; }
    std::vector<Tensor>& mean_square() { return ms_; }
    std::vector<Tensor>& momentum_buf() { return mom_; }
    const std::vector<Tensor>& mean_square() const { return ms_; }
    const std::vector<Tensor>& momentum_buf() const { return mom_; }

private:
    RmsPropConfig cfg_;
    std::vector<Tensor> ms_;
    std::vector<Tensor> mom_;
};

// Scales all gradients by max_norm/norm when the global norm exceeds max_norm.
// Returns the pre-clip global norm. max_norm <= 0 disables clipping.
double clip_gradients(ParameterStore& params, double max_norm);

struct TrainRecord {
    long iteration = 0;
    double loss_sum = 0.0;
    double loss_per_item = 0.0;
    double loss_per_bit = 0.0;
    bool outlier = false;
    double grad_norm = 0.0;
};

struct TrainConfig {
    std::string task = "copy"; // copy | recall
    CopySpec copy;
    RecallSpec recall;
    RmsPropConfig opt;
    double clip = 10.0;
    long max_iters = 10000;
    int sample_every = 25;
    double outlier_threshold = 0.5;      // loss_per_bit above this marks an outlier
    double convergence_threshold = 0.02; // trailing-median loss_per_bit below this converges
    int convergence_window = 11;

    int input_width() const;
    int output_width() const;
    Episode make_episode(std::uint64_t run_seed, long iteration) const;
};

// One episode: forward unroll, masked BCE, backward, clip, RMSProp update.
// Throws TrainingAbort on non-finite loss or gradient.
TrainRecord train_iteration(Model& model, const Episode& episode, RmsProp& opt,
                            const TrainConfig& cfg, long iteration);

struct RunSummary {
    long convergence_iteration = -1; // -1: never converged
    long outlier_count = 0;          // outliers after the convergence point
    double final_loss_per_bit = 0.0;
    std::uint64_t seed = 0;
    std::string config_hash;
};

// Pure function of the sampled record stream; reused when recomputing
// statistics from a saved CSV.
RunSummary summarize(const std::vector<TrainRecord>& sampled, const TrainConfig& cfg,
                     std::uint64_t seed, const std::string& config_hash);

struct RunResult {
    std::vector<TrainRecord> sampled;
    RunSummary summary;
};

using RecordSink = std::function<void(const TrainRecord&)>;

// Trains for cfg.max_iters iterations starting after start_iteration (0 for a
// fresh run), sampling every cfg.sample_every iterations into the result and
// the sink. The model and optimizer are updated in place.
RunResult run_experiment(Model& model, RmsProp& opt, const TrainConfig& cfg,
                         std::uint64_t run_seed, long start_iteration = 0,
                         const RecordSink& sink = nullptr);

std::string config_hash(const ModelConfig& mc, const TrainConfig& tc);
std::string train_config_canonical(const TrainConfig& tc);

} // namespace ntmlab
