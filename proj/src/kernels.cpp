#include "ntmlab/kernels.hpp"

#include <cmath>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace ntmlab::kernels {

Config& config() {
    static Config cfg;
    return cfg;
}

bool openmp_compiled() {
#if defined(_OPENMP)
    return true;
#else
    return false;
#endif
}

int max_threads() {
#if defined(_OPENMP)
    return omp_get_max_threads();
#else
    return 1;
#endif
}

namespace detail {

inline void cosine_row(const double* mem, const double* key, double* sim, int i, int width,
                       double key_norm, double delta) {
    const double* row = mem + static_cast<size_t>(i) * width;
    double dot = 0.0;
    double sq = 0.0;
    for (int j = 0; j < width; ++j) {
        dot += row[j] * key[j];
        sq += row[j] * row[j];
    }
    sim[i] = dot / (std::sqrt(sq) * key_norm + delta);
}

inline double norm(const double* v, int n) {
    double sq = 0.0;
    for (int i = 0; i < n; ++i) sq += v[i] * v[i];
    return std::sqrt(sq);
}

} // namespace detail

namespace serial {

void matmul(const double* a, const double* b, double* out, int m, int k, int n) {
    for (int i = 0; i < m; ++i) detail::matmul_row(a, b, out, i, k, n);
}

void matmul_grad_a(const double* g, const double* b, double* da, int m, int k, int n) {
    for (int i = 0; i < m; ++i) detail::matmul_grad_a_row(g, b, da, i, k, n);
}

void matmul_grad_b(const double* a, const double* g, double* db, int m, int k, int n) {
    for (int p = 0; p < k; ++p) detail::matmul_grad_b_row(a, g, db, p, m, k, n);
}

void cosine_rows(const double* mem, const double* key, double* sim, int n_rows, int width,
                 double delta) {
    const double kn = detail::norm(key, width);
    for (int i = 0; i < n_rows; ++i) detail::cosine_row(mem, key, sim, i, width, kn, delta);
}

} // namespace serial

namespace par {

#if defined(_OPENMP)

void matmul(const double* a, const double* b, double* out, int m, int k, int n) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < m; ++i) detail::matmul_row(a, b, out, i, k, n);
}

void matmul_grad_a(const double* g, const double* b, double* da, int m, int k, int n) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < m; ++i) detail::matmul_grad_a_row(g, b, da, i, k, n);
}

void matmul_grad_b(const double* a, const double* g, double* db, int m, int k, int n) {
#pragma omp parallel for schedule(static)
    for (int p = 0; p < k; ++p) detail::matmul_grad_b_row(a, g, db, p, m, k, n);
}

void cosine_rows(const double* mem, const double* key, double* sim, int n_rows, int width,
                 double delta) {
    const double kn = detail::norm(key, width);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n_rows; ++i) detail::cosine_row(mem, key, sim, i, width, kn, delta);
}

#else

void matmul(const double* a, const double* b, double* out, int m, int k, int n) {
    serial::matmul(a, b, out, m, k, n);
}
void matmul_grad_a(const double* g, const double* b, double* da, int m, int k, int n) {
    serial::matmul_grad_a(g, b, da, m, k, n);
}
void matmul_grad_b(const double* a, const double* g, double* db, int m, int k, int n) {
    serial::matmul_grad_b(a, g, db, m, k, n);
}
void cosine_rows(const double* mem, const double* key, double* sim, int n_rows, int width,
                 double delta) {
    serial::cosine_rows(mem, key, sim, n_rows, width, delta);
}

#endif

} // namespace par

} // namespace ntmlab::kernels
