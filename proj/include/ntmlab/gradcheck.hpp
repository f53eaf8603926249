#pragma once

#include <string>
#include <vector>

#include "ntmlab/model.hpp"

namespace ntmlab {

struct GradReport {
    std::string name;
    double max_rel_err = 0.0;
    long worst_index = -1;
    double analytic_at_worst = 0.0;
    double numeric_at_worst = 0.0;
};

// Analytic gradients of the episode loss, one tensor per parameter in store
// order. Leaves the model parameters untouched.
std::vector<Tensor> collect_analytic_gradients(Model& model, const Episode& episode);

// Central finite differences against supplied analytic gradients. rel_floor
// bounds the denominator so finite-difference noise on near-zero gradients is
// not read as relative error.
std::vector<GradReport> compare_finite_difference(Model& model, const Episode& episode,
                                                  const std::vector<Tensor>& analytic,
                                                  double eps = 1e-5, double rel_floor = 1e-5);

std::vector<GradReport> gradient_check(Model& model, const Episode& episode, double eps = 1e-5,
                                       double rel_floor = 1e-5);

double max_rel_err(const std::vector<GradReport>& reports);

} // namespace ntmlab
