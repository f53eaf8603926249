#include "ntmlab/params.hpp"

namespace ntmlab {

Parameter& ParameterStore::add(const std::string& name, Tensor init) {
    if (index_.count(name)) throw ContractError("duplicate parameter name: " + name);
    index_[name] = params_.size();
    params_.push_back(std::make_unique<Parameter>(name, std::move(init)));
    return *params_.back();
}

Parameter& ParameterStore::add_uniform(const std::string& name, std::vector<int> shape, double lo,
                                       double hi, std::mt19937_64& rng) {
    Tensor t(shape);
    std::uniform_real_distribution<double> dist(lo, hi);
    for (long i = 0; i < t.numel(); ++i) t[i] = dist(rng);
    return add(name, std::move(t));
}

Parameter& ParameterStore::add_zeros(const std::string& name, std::vector<int> shape) {
    return add(name, Tensor::zeros(std::move(shape)));
}

Parameter& ParameterStore::get(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) throw ContractError("unknown parameter: " + name);
    return *params_[it->second];
}

const Parameter& ParameterStore::get(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw ContractError("unknown parameter: " + name);
    return *params_[it->second];
}

void ParameterStore::zero_grads() {
    for (auto& p : params_) p->zero_grad();
}

long ParameterStore::scalar_count() const {
    long n = 0;
    for (const auto& p : params_) n += p->value.numel();
    return n;
}

} // namespace ntmlab
