#include "ntmlab/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ntmlab {

RmsProp::RmsProp(const ParameterStore& params, RmsPropConfig cfg) : cfg_(cfg) {
    for (const auto& p : params) {
        ms_.push_back(Tensor::zeros(p->value.shape()));
        mom_.push_back(Tensor::zeros(p->value.shape()));
    }
}

void RmsProp::step(ParameterStore& params) {
    if (ms_.size() != params.size()) {
        throw ContractError("rmsprop: optimizer state does not match parameter store");
    }
    for (size_t i = 0; i < params.size(); ++i) {
        Parameter& p = params[i];
        if (!p.grad.same_shape(p.value)) {
            throw ContractError("rmsprop: gradient shape mismatch for " + p.name);
        }
        Tensor& ms = ms_[i];
        Tensor& mom = mom_[i];
        for (long j = 0; j < p.value.numel(); ++j) {
            const double g = p.grad[j];
            ms[j] = cfg_.decay * ms[j] + (1.0 - cfg_.decay) * g * g;
            mom[j] = cfg_.momentum * mom[j] - cfg_.lr * g / std::sqrt(ms[j] + cfg_.eps);
            p.value[j] += mom[j];
        }
    }
}

double clip_gradients(ParameterStore& params, double max_norm) {
    double sq = 0.0;
    for (const auto& p : params) {
        for (long j = 0; j < p->grad.numel(); ++j) sq += p->grad[j] * p->grad[j];
    }
    const double norm = std::sqrt(sq);
    if (max_norm > 0.0 && norm > max_norm) {
        const double scale = max_norm / norm;
        for (auto& p : params) {
            for (long j = 0; j < p->grad.numel(); ++j) p->grad[j] *= scale;
        }
    }
    return norm;
}

int TrainConfig::input_width() const {
    return task == "recall" ? recall.input_width() : copy.input_width();
}

int TrainConfig::output_width() const {
    return task == "recall" ? recall.item_width : copy.item_width;
}

Episode TrainConfig::make_episode(std::uint64_t run_seed, long iteration) const {
    const std::uint64_t s = episode_seed(run_seed, iteration);
    if (task == "recall") return gen_recall(s, recall);
    if (task == "copy") return gen_copy(s, copy);
    throw ConfigError("unknown task '" + task + "' (expected copy|recall)");
}

TrainRecord train_iteration(Model& model, const Episode& episode, RmsProp& opt,
                            const TrainConfig& cfg, long iteration) {
    model.params().zero_grads();
    Tape tape;
    Model::Forward fwd = model.unroll(tape, episode);

    TrainRecord rec;
    rec.iteration = iteration;
    rec.loss_sum = fwd.loss_value;
    rec.loss_per_item = fwd.loss_value / std::max(1, episode.predicted_items);
    rec.loss_per_bit = fwd.loss_value / std::max(1L, episode.masked_bits());
    rec.outlier = rec.loss_per_bit > cfg.outlier_threshold;

    if (!std::isfinite(rec.loss_sum)) {
        throw TrainingAbort(iteration, 0.0,
                            "non-finite loss at iteration " + std::to_string(iteration));
    }
    tape.backward(fwd.loss);
    rec.grad_norm = clip_gradients(model.params(), cfg.clip);
    if (!std::isfinite(rec.grad_norm)) {
        throw TrainingAbort(iteration, rec.grad_norm,
                            "non-finite gradient at iteration " + std::to_string(iteration));
    }
    opt.step(model.params());
    return rec;
}

RunSummary summarize(const std::vector<TrainRecord>& sampled, const TrainConfig& cfg,
                     std::uint64_t seed, const std::string& hash) {
    RunSummary s;
    s.seed = seed;
    s.config_hash = hash;
    if (!sampled.empty()) s.final_loss_per_bit = sampled.back().loss_per_bit;

    // Convergence: first sampled iteration whose trailing-window median
    // loss_per_bit drops below the threshold.
    const int w = std::max(1, cfg.convergence_window);
    for (size_t i = 0; i < sampled.size(); ++i) {
        if (i + 1 < static_cast<size_t>(w)) continue;
        std::vector<double> window;
        for (size_t j = i + 1 - static_cast<size_t>(w); j <= i; ++j) {
            window.push_back(sampled[j].loss_per_bit);
        }
        std::sort(window.begin(), window.end());
        const double median = window[window.size() / 2];
        if (median < cfg.convergence_threshold) {
            s.convergence_iteration = sampled[i].iteration;
            break;
        }
    }
    if (s.convergence_iteration >= 0) {
        for (const TrainRecord& r : sampled) {
            if (r.iteration > s.convergence_iteration && r.outlier) ++s.outlier_count;
        }
    }
    return s;
}

RunResult run_experiment(Model& model, RmsProp& opt, const TrainConfig& cfg,
                         std::uint64_t run_seed, long start_iteration, const RecordSink& sink) {
    RunResult result;
    const std::string hash = config_hash(model.config(), cfg);
    for (long iter = start_iteration + 1; iter <= cfg.max_iters; ++iter) {
        Episode ep = cfg.make_episode(run_seed, iter);
        TrainRecord rec = train_iteration(model, ep, opt, cfg, iter);
        if (cfg.sample_every > 0 && iter % cfg.sample_every == 0) {
            result.sampled.push_back(rec);
            if (sink) sink(rec);
        }
    }
    result.summary = summarize(result.sampled, cfg, run_seed, hash);
    return result;
}

std::string train_config_canonical(const TrainConfig& tc) {
    std::ostringstream os;
    os.precision(17);
    os << "task=" << tc.task << ";copy=" << tc.copy.min_items << "," << tc.copy.max_items << ","
       << tc.copy.item_width << ";recall=" << tc.recall.min_items << "," << tc.recall.max_items
       << "," << tc.recall.item_len << "," << tc.recall.item_width << ";lr=" << tc.opt.lr
       << ";momentum=" << tc.opt.momentum << ";decay=" << tc.opt.decay << ";eps=" << tc.opt.eps
       << ";clip=" << tc.clip << ";max_iters=" << tc.max_iters
       << ";sample_every=" << tc.sample_every << ";outlier=" << tc.outlier_threshold
       << ";conv=" << tc.convergence_threshold << "," << tc.convergence_window << ";";
    return os.str();
}

std::string config_hash(const ModelConfig& mc, const TrainConfig& tc) {
    const std::string s = mc.canonical_string() + train_config_canonical(tc);
    // FNV-1a, 64 bit
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

} // namespace ntmlab
