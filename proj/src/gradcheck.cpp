#include "ntmlab/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace ntmlab {

namespace {

double forward_loss(Model& model, const Episode& episode) {
    Tape tape;
    return model.unroll(tape, episode).loss_value;
}

} // namespace

std::vector<Tensor> collect_analytic_gradients(Model& model, const Episode& episode) {
    model.params().zero_grads();
    Tape tape;
    Model::Forward fwd = model.unroll(tape, episode);
    tape.backward(fwd.loss);
    std::vector<Tensor> grads;
    for (size_t i = 0; i < model.params().size(); ++i) {
        grads.push_back(model.params()[i].grad);
    }
    return grads;
}

std::vector<GradReport> compare_finite_difference(Model& model, const Episode& episode,
                                                  const std::vector<Tensor>& analytic, double eps,
                                                  double rel_floor) {
    ParameterStore& store = model.params();
    if (analytic.size() != store.size()) {
        throw ContractError("compare_finite_difference: gradient list does not match store");
    }
    std::vector<GradReport> reports;
    for (size_t i = 0; i < store.size(); ++i) {
        Parameter& p = store[i];
        GradReport rep;
        rep.name = p.name;
        for (long j = 0; j < p.value.numel(); ++j) {
            const double saved = p.value[j];
            p.value[j] = saved + eps;
            const double lp = forward_loss(model, episode);
            p.value[j] = saved - eps;
            const double lm = forward_loss(model, episode);
            p.value[j] = saved;
            const double numeric = (lp - lm) / (2.0 * eps);
            const double a = analytic[i][j];
            const double rel =
                std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), rel_floor});
            if (rel > rep.max_rel_err) {
                rep.max_rel_err = rel;
                rep.worst_index = j;
                rep.analytic_at_worst = a;
                rep.numeric_at_worst = numeric;
            }
        }
        reports.push_back(std::move(rep));
    }
    return reports;
}

std::vector<GradReport> gradient_check(Model& model, const Episode& episode, double eps,
                                       double rel_floor) {
    const std::vector<Tensor> analytic = collect_analytic_gradients(model, episode);
    return compare_finite_difference(model, episode, analytic, eps, rel_floor);
}

double max_rel_err(const std::vector<GradReport>& reports) {
    double m = 0.0;
    for (const GradReport& r : reports) m = std::max(m, r.max_rel_err);
    return m;
}

} // namespace ntmlab
