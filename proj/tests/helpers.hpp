#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "ntmlab/tape.hpp"

namespace testutil {

using ntmlab::Parameter;
using ntmlab::Tape;
using ntmlab::Tensor;
using ntmlab::Var;

inline Tensor random_tensor(std::vector<int> shape, std::mt19937_64& rng, double lo = -1.0,
                            double hi = 1.0) {
    Tensor t(std::move(shape));
    std::uniform_real_distribution<double> d(lo, hi);
    for (long i = 0; i < t.numel(); ++i) t[i] = d(rng);
    return t;
}

inline double rel_err(double a, double b, double floor) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

// Central finite differences on a scalar-valued tape program over a set of
// input tensors. Returns the worst relative error across all input scalars.
inline double fd_check(std::vector<Parameter*> inputs,
                       const std::function<Var(Tape&, const std::vector<Var>&)>& build,
                       double eps = 1e-5, double floor = 1e-6) {
    auto forward = [&]() {
        Tape tape;
        std::vector<Var> vars;
        vars.reserve(inputs.size());
        for (Parameter* p : inputs) vars.push_back(tape.watch(*p));
        Var loss = build(tape, vars);
        return tape.val(loss)[0];
    };

    for (Parameter* p : inputs) p->zero_grad();
    {
        Tape tape;
        std::vector<Var> vars;
        for (Parameter* p : inputs) vars.push_back(tape.watch(*p));
        Var loss = build(tape, vars);
        tape.backward(loss);
    }

    double worst = 0.0;
    for (Parameter* p : inputs) {
        for (long j = 0; j < p->value.numel(); ++j) {
            const double saved = p->value[j];
            p->value[j] = saved + eps;
            const double lp = forward();
            p->value[j] = saved - eps;
            const double lm = forward();
            p->value[j] = saved;
            const double numeric = (lp - lm) / (2.0 * eps);
            worst = std::max(worst, rel_err(p->grad[j], numeric, floor));
        }
    }
    return worst;
}

} // namespace testutil
