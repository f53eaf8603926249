#pragma once

// Compute kernels behind the tensor ops. Every kernel exists twice: a plain
// serial loop (namespace serial) and an OpenMP variant (namespace par) that
// distributes independent output elements across threads. The inner arithmetic
// of each output element is shared between the two, so results are
// bit-identical regardless of which variant ran or how many threads were used.
// Dispatchers pick the parallel variant only when the work exceeds a grain
// threshold.

#include <cstddef>

namespace ntmlab::kernels {

struct Config {
    bool parallel = true;        // allow OpenMP dispatch at all
    long matmul_grain = 32768;   // minimum m*k*n before going parallel
    long elem_grain = 16384;     // minimum element count before going parallel
    long row_grain = 64;         // minimum row count for row-wise kernels
};

Config& config();

bool openmp_compiled();
int max_threads();

namespace detail {

inline void matmul_row(const double* a, const double* b, double* out, int i, int k, int n) {
    const double* arow = a + static_cast<size_t>(i) * k;
    double* orow = out + static_cast<size_t>(i) * n;
    for (int j = 0; j < n; ++j) orow[j] = 0.0;
    for (int p = 0; p < k; ++p) {
        const double aip = arow[p];
        const double* brow = b + static_cast<size_t>(p) * n;
        for (int j = 0; j < n; ++j) orow[j] += aip * brow[j];
    }
}

// da[i,:] += g[i,:] * b^T  (row i of the left-operand gradient)
inline void matmul_grad_a_row(const double* g, const double* b, double* da, int i, int k, int n) {
    const double* grow = g + static_cast<size_t>(i) * n;
    double* darow = da + static_cast<size_t>(i) * k;
    for (int p = 0; p < k; ++p) {
        const double* brow = b + static_cast<size_t>(p) * n;
        double acc = 0.0;
        for (int j = 0; j < n; ++j) acc += grow[j] * brow[j];
        darow[p] += acc;
    }
}

// db[p,:] += a[:,p]^T * g  (row p of the right-operand gradient)
inline void matmul_grad_b_row(const double* a, const double* g, double* db, int p, int m, int k, int n) {
    double* dbrow = db + static_cast<size_t>(p) * n;
    for (int i = 0; i < m; ++i) {
        const double aip = a[static_cast<size_t>(i) * k + p];
        const double* grow = g + static_cast<size_t>(i) * n;
        for (int j = 0; j < n; ++j) dbrow[j] += aip * grow[j];
    }
}

} // namespace detail

namespace serial {

// out[m x n] = a[m x k] * b[k x n]
void matmul(const double* a, const double* b, double* out, int m, int k, int n);
// da += g * b^T
void matmul_grad_a(const double* g, const double* b, double* da, int m, int k, int n);
// db += a^T * g
void matmul_grad_b(const double* a, const double* g, double* db, int m, int k, int n);

// sim[i] = dot(mem[i,:], key) / (|mem[i,:]| * |key| + delta)
void cosine_rows(const double* mem, const double* key, double* sim, int n_rows, int width,
                 double delta);

template <class F>
void map(const double* x, double* y, long n, F f) {
    for (long i = 0; i < n; ++i) y[i] = f(x[i]);
}

// out[i] += f(x[i])
template <class F>
void map_acc(const double* x, double* out, long n, F f) {
    for (long i = 0; i < n; ++i) out[i] += f(x[i]);
}

template <class F>
void zip(const double* a, const double* b, double* out, long n, F f) {
    for (long i = 0; i < n; ++i) out[i] = f(a[i], b[i]);
}

// out[i] += f(a[i], b[i])
template <class F>
void zip_acc(const double* a, const double* b, double* out, long n, F f) {
    for (long i = 0; i < n; ++i) out[i] += f(a[i], b[i]);
}

} // namespace serial

namespace par {

void matmul(const double* a, const double* b, double* out, int m, int k, int n);
void matmul_grad_a(const double* g, const double* b, double* da, int m, int k, int n);
void matmul_grad_b(const double* a, const double* g, double* db, int m, int k, int n);
void cosine_rows(const double* mem, const double* key, double* sim, int n_rows, int width,
                 double delta);

#if defined(_OPENMP)
template <class F>
void map(const double* x, double* y, long n, F f) {
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i) y[i] = f(x[i]);
}

template <class F>
void map_acc(const double* x, double* out, long n, F f) {
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i) out[i] += f(x[i]);
}

template <class F>
void zip(const double* a, const double* b, double* out, long n, F f) {
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i) out[i] = f(a[i], b[i]);
}

template <class F>
void zip_acc(const double* a, const double* b, double* out, long n, F f) {
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i) out[i] += f(a[i], b[i]);
}
#else
template <class F>
void map(const double* x, double* y, long n, F f) { serial::map(x, y, n, f); }
template <class F>
void map_acc(const double* x, double* out, long n, F f) { serial::map_acc(x, out, n, f); }
template <class F>
void zip(const double* a, const double* b, double* out, long n, F f) { serial::zip(a, b, out, n, f); }
template <class F>
void zip_acc(const double* a, const double* b, double* out, long n, F f) { serial::zip_acc(a, b, out, n, f); }
#endif

} // namespace par

// Dispatchers used by the tape.

inline void matmul(const double* a, const double* b, double* out, int m, int k, int n) {
    const Config& c = config();
    if (c.parallel && static_cast<long>(m) * k * n >= c.matmul_grain) {
        par::matmul(a, b, out, m, k, n);
    } else {
        serial::matmul(a, b, out, m, k, n);
    }
}

inline void matmul_grad_a(const double* g, const double* b, double* da, int m, int k, int n) {
    const Config& c = config();
    if (c.parallel && static_cast<long>(m) * k * n >= c.matmul_grain) {
        par::matmul_grad_a(g, b, da, m, k, n);
    } else {
        serial::matmul_grad_a(g, b, da, m, k, n);
    }
}

inline void matmul_grad_b(const double* a, const double* g, double* db, int m, int k, int n) {
    const Config& c = config();
    if (c.parallel && static_cast<long>(m) * k * n >= c.matmul_grain) {
        par::matmul_grad_b(a, g, db, m, k, n);
    } else {
        serial::matmul_grad_b(a, g, db, m, k, n);
    }
}

inline void cosine_rows(const double* mem, const double* key, double* sim, int n_rows, int width,
                        double delta) {
    const Config& c = config();
    if (c.parallel && n_rows >= c.row_grain) {
        par::cosine_rows(mem, key, sim, n_rows, width, delta);
    } else {
        serial::cosine_rows(mem, key, sim, n_rows, width, delta);
    }
}

template <class F>
void map(const double* x, double* y, long n, F f) {
    const Config& c = config();
    if (c.parallel && n >= c.elem_grain) {
        par::map(x, y, n, f);
    } else {
        serial::map(x, y, n, f);
    }
}

template <class F>
void map_acc(const double* x, double* out, long n, F f) {
    const Config& c = config();
    if (c.parallel && n >= c.elem_grain) {
        par::map_acc(x, out, n, f);
    } else {
        serial::map_acc(x, out, n, f);
    }
}

template <class F>
void zip(const double* a, const double* b, double* out, long n, F f) {
    const Config& c = config();
    if (c.parallel && n >= c.elem_grain) {
        par::zip(a, b, out, n, f);
    } else {
        serial::zip(a, b, out, n, f);
    }
}

template <class F>
void zip_acc(const double* a, const double* b, double* out, long n, F f) {
    const Config& c = config();
    if (c.parallel && n >= c.elem_grain) {
        par::zip_acc(a, b, out, n, f);
    } else {
        serial::zip_acc(a, b, out, n, f);
    }
}

} // namespace ntmlab::kernels
