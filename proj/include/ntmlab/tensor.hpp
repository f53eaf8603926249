#pragma once

#include <string>
#include <vector>

#include "ntmlab/errors.hpp"

namespace ntmlab {

std::string shape_str(const std::vector<int>& shape);

// Dense row-major tensor of 64-bit reals, rank 1 or 2.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<int> shape);
    Tensor(std::vector<int> shape, std::vector<double> data);

    static Tensor scalar(double v);
    static Tensor vec(std::vector<double> v);
    static Tensor mat(int rows, int cols, std::vector<double> v);
    static Tensor zeros(std::vector<int> shape);
    static Tensor full(std::vector<int> shape, double v);

    const std::vector<int>& shape() const { return shape_; }
    int rank() const { return static_cast<int>(shape_.size()); }
    long numel() const { return static_cast<long>(data_.size()); }
    bool empty() const { return data_.empty(); }

    // Rank-2 accessors; rank-1 tensors behave as a single row.
    int rows() const { return rank() == 2 ? shape_[0] : 1; }
    int cols() const { return rank() == 2 ? shape_[1] : (rank() == 1 ? shape_[0] : 0); }

    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    double& operator[](long i) { return data_[static_cast<size_t>(i)]; }
    double operator[](long i) const { return data_[static_cast<size_t>(i)]; }

    double& at(int i, int j) { return data_[static_cast<size_t>(i) * cols() + j]; }
    double at(int i, int j) const { return data_[static_cast<size_t>(i) * cols() + j]; }

    void fill(double v);
    bool all_finite() const;
    std::string shape_string() const { return shape_str(shape_); }

private:
    std::vector<int> shape_;
    std::vector<double> data_;
};

inline void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (!a.same_shape(b)) {
        throw DimensionError(std::string(op) + ": shape mismatch " + a.shape_string() +
                             " vs " + b.shape_string());
    }
}

} // namespace ntmlab
