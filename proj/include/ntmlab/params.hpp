#pragma once

#include <memory>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "ntmlab/tensor.hpp"

namespace ntmlab {

// A trainable tensor with its gradient accumulator.
struct Parameter {
    std::string name;
    Tensor value;
    Tensor grad;

    Parameter(std::string n, Tensor v) : name(std::move(n)), value(std::move(v)) {
        grad = Tensor::zeros(value.shape());
    }
    void zero_grad() { grad.fill(0.0); }
};

// Owns all parameters of a model in registration order. Registration order is
// the canonical order for checkpoints and optimizer state.
class ParameterStore {
public:
    Parameter& add(const std::string& name, Tensor init);
    Parameter& add_uniform(const std::string& name, std::vector<int> shape, double lo, double hi,
                           std::mt19937_64& rng);
    Parameter& add_zeros(const std::string& name, std::vector<int> shape);

    Parameter& get(const std::string& name);
    const Parameter& get(const std::string& name) const;
    bool has(const std::string& name) const { return index_.count(name) > 0; }

    size_t size() const { return params_.size(); }
    Parameter& operator[](size_t i) { return *params_[i]; }
    const Parameter& operator[](size_t i) const { return *params_[i]; }

    void zero_grads();
    long scalar_count() const;

    auto begin() { return params_.begin(); }
    auto end() { return params_.end(); }
    auto begin() const { return params_.begin(); }
    auto end() const { return params_.end(); }

private:
    std::vector<std::unique_ptr<Parameter>> params_;
    std::unordered_map<std::string, size_t> index_;
};

} // namespace ntmlab
