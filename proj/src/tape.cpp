#include "ntmlab/tape.hpp"

#include <cmath>

#include "ntmlab/kernels.hpp"

namespace ntmlab {

namespace {

inline double sigmoid_fn(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline double softplus_fn(double x) {
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

inline int mod_wrap(int i, int n) {
    int r = i % n;
    return r < 0 ? r + n : r;
}

} // namespace

Tape::Tape() { nodes_.reserve(1024); }

void Tape::require(bool cond, const std::string& msg) const {
    if (!cond) throw DimensionError(msg);
}

Var Tape::record(Tensor value, std::function<void(Tape&, int)> back) {
    nodes_.push_back(Node{std::move(value), Tensor(), std::move(back)});
    return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::constant(Tensor v) { return record(std::move(v), nullptr); }

Var Tape::watch(Parameter& p) {
    auto it = watch_index_.find(&p);
    if (it != watch_index_.end()) return Var{it->second};
    Var v = record(p.value, nullptr);
    watched_.emplace_back(&p, v.id);
    watch_index_[&p] = v.id;
    return v;
}

const Tensor& Tape::val(Var v) const {
    if (!v.valid() || v.id >= static_cast<int>(nodes_.size())) {
        throw ContractError("val: invalid tape handle");
    }
    return nodes_[static_cast<size_t>(v.id)].value;
}

const Tensor& Tape::grad_of(Var v) const {
    if (!backward_done_) throw ContractError("grad_of: backward has not run");
    const Tensor& g = nodes_[static_cast<size_t>(v.id)].grad;
    if (g.empty()) throw ContractError("grad_of: node unreachable from loss");
    return g;
}

Var Tape::add(Var a, Var b) {
    const Tensor &x = v(a.id), &y = v(b.id);
    check_same_shape(x, y, "add");
    Tensor out(x.shape());
    kernels::zip(x.data(), y.data(), out.data(), x.numel(), [](double p, double q) { return p + q; });
    return record(std::move(out), [a, b](Tape& t, int self) {
        const Tensor& g = t.gbuf(self);
        kernels::map_acc(g.data(), t.gbuf(a.id).data(), g.numel(), [](double gi) { return gi; });
        kernels::map_acc(g.data(), t.gbuf(b.id).data(), g.numel(), [](double gi) { return gi; });
    });
}

Var Tape::sub(Var a, Var b) {
    const Tensor &x = v(a.id), &y = v(b.id);
    check_same_shape(x, y, "sub");
    Tensor out(x.shape());
    kernels::zip(x.data(), y.data(), out.data(), x.numel(), [](double p, double q) { return p - q; });
    return record(std::move(out), [a, b](Tape& t, int self) {
        const Tensor& g = t.gbuf(self);
        kernels::map_acc(g.data(), t.gbuf(a.id).data(), g.numel(), [](double gi) { return gi; });
        kernels::map_acc(g.data(), t.gbuf(b.id).data(), g.numel(), [](double gi) { return -gi; });
    });
}

Var Tape::mul(Var a, Var b) {
    const Tensor &x = v(a.id), &y = v(b.id);
    check_same_shape(x, y, "mul");
    Tensor out(x.shape());
    kernels::zip(x.data(), y.data(), out.data(), x.numel(), [](double p, double q) { return p * q; });
    return record(std::move(out), [a, b](Tape& t, int self) {
        const Tensor& g = t.gbuf(self);
        kernels::zip_acc(g.data(), t.v(b.id).data(), t.gbuf(a.id).data(), g.numel(),
                         [](double gi, double yi) { return gi * yi; });
        kernels::zip_acc(g.data(), t.v(a.id).data(), t.gbuf(b.id).data(), g.numel(),
                         [](double gi, double xi) { return gi * xi; });
    });
}

Var Tape::scalar_mul(Var x, double c) {
    const Tensor& xv = v(x.id);
    Tensor out(xv.shape());
    kernels::map(xv.data(), out.data(), xv.numel(), [c](double p) { return c * p; });
    return record(std::move(out), [x, c](Tape& t, int self) {
        const Tensor& g = t.gbuf(self);
        kernels::map_acc(g.data(), t.gbuf(x.id).data(), g.numel(), [c](double gi) { return c * gi; });
    });
}

Var Tape::mul_by_scalar(Var x, Var s) {
    const Tensor& xv = v(x.id);
    const Tensor& sv = v(s.id);
    require(sv.numel() == 1, "mul_by_scalar: scale must be one element, got " + sv.shape_string());
    const double c = sv[0];
    Tensor out(xv.shape());
    kernels::map(xv.data(), out.data(), xv.numel(), [c](double p) { return c * p; });
    return record(std::move(out), [x, s](Tape& t, int self) {
        const Tensor& g = t.gbuf(self);
        const double c = t.v(s.id)[0];
        kernels::map_acc(g.data(), t.gbuf(x.id).data(), g.numel(), [c](double gi) { return c * gi; });
        const Tensor& xval = t.v(x.id);
        double acc = 0.0;
        for (long i = 0; i < g.numel(); ++i) acc += g[i] * xval[i];
        t.gbuf(s.id)[0] += acc;
    });
}

Var Tape::div_by_scalar(Var x, Var s) {
    const Tensor& xv = v(x.id);
    const Tensor& sv = v(s.id);
    require(sv.numel() == 1, "div_by_scalar: scale must be one element, got " + sv.shape_string());
    const double c = sv[0];
    Tensor out(xv.shape());
    kernels::map(xv.data(), out.data(), xv.numel(), [c](double p) { return p / c; });
    return record(std::move(out), [x, s](Tape& t, int self) {
        const Tensor& g = t.gbuf(self);
        const double c = t.v(s.id)[0];
        kernels::map_acc(g.data(), t.gbuf(x.id).data(), g.numel(), [c](double gi) { return gi / c; });
        const Tensor& yval = t.v(self);
        double acc = 0.0;
        for (long i = 0; i < g.numel(); ++i) acc += g[i] * yval[i];
        t.gbuf(s.id)[0] -= acc / c;
    });
}

Var Tape::sigmoid(Var x) {
    const Tensor& xv = v(x.id);
    Tensor out(xv.shape());
    kernels::map(xv.data(), out.data(), xv.numel(), [](double p) { return sigmoid_fn(p); });
    return record(std::move(out), [x](Tape& t, int self) {
        const Tensor& g = t.gbuf(self);
        kernels::zip_acc(g.data(), t.v(self).data(), t.gbuf(x.id).data(), g.numel(),
                         [](double gi, double yi) { return gi * yi * (1.0 - yi); });
    });
}

Var Tape::tanh_op(Var x) {
    const Tensor& xv = v(x.id);
    Tensor out(xv.shape());
    kernels::map(xv.data(), out.data(), xv.numel(), [](double p) { return std::tanh(p); });
    return record(std::move(out), [x](Tape& t, int self) {
        const Tensor& g = t.gbuf(self);
        kernels::zip_acc(g.data(), t.v(self).data(), t.gbuf(x.id).data(), g.numel(),
                         [](double gi, double yi) { return gi * (1.0 - yi * yi); });
    });
}

Var Tape::relu(Var x) {
    const Tensor& xv = v(x.id);
    Tensor out(xv.shape());
    kernels::map(xv.data(), out.data(), xv.numel(), [](double p) { return p > 0.0 ? p : 0.0; });
    return record(std::move(out), [x](Tape& t, int self) {
        const Tensor& g = t.gbuf(self);
        kernels::zip_acc(g.data(), t.v(x.id).data(), t.gbuf(x.id).data(), g.numel(),
                         [](double gi, double xi) { return xi > 0.0 ? gi : 0.0; });
    });
}

Var Tape::softplus(Var x) {
    const Tensor& xv = v(x.id);
    Tensor out(xv.shape());
    kernels::map(xv.data(), out.data(), xv.numel(), [](double p) { return softplus_fn(p); });
    return record(std::move(out), [x](Tape& t, int self) {
        const Tensor& g = t.gbuf(self);
        kernels::zip_acc(g.data(), t.v(x.id).data(), t.gbuf(x.id).data(), g.numel(),
                         [](double gi, double xi) { return gi * sigmoid_fn(xi); });
    });
}

Var Tape::clamp_min(Var x, double floor) {
    const Tensor& xv = v(x.id);
    Tensor out(xv.shape());
    kernels::map(xv.data(), out.data(), xv.numel(),
                 [floor](double p) { return p > floor ? p : floor; });
    return record(std::move(out), [x, floor](Tape& t, int self) {
        const Tensor& g = t.gbuf(self);
        kernels::zip_acc(g.data(), t.v(x.id).data(), t.gbuf(x.id).data(), g.numel(),
                         [floor](double gi, double xi) { return xi > floor ? gi : 0.0; });
    });
}

Var Tape::pow_positive(Var x, Var gamma) {
    const Tensor& xv = v(x.id);
    const Tensor& gv = v(gamma.id);
    require(gv.numel() == 1, "pow_positive: exponent must be one element, got " + gv.shape_string());
    for (long i = 0; i < xv.numel(); ++i) {
        if (!(xv[i] > 0.0)) throw ContractError("pow_positive: base entries must be > 0");
    }
    const double ga = gv[0];
    Tensor out(xv.shape());
    kernels::map(xv.data(), out.data(), xv.numel(), [ga](double p) { return std::pow(p, ga); });
    return record(std::move(out), [x, gamma](Tape& t, int self) {
        const Tensor& g = t.gbuf(self);
        const Tensor& xval = t.v(x.id);
        const Tensor& yval = t.v(self);
        const double ga = t.v(gamma.id)[0];
        Tensor& dx = t.gbuf(x.id);
        double dga = 0.0;
        for (long i = 0; i < g.numel(); ++i) {
            dx[i] += g[i] * ga * yval[i] / xval[i];
            dga += g[i] * yval[i] * std::log(xval[i]);
        }
        t.gbuf(gamma.id)[0] += dga;
    });
}

Var Tape::concat(const std::vector<Var>& parts) {
    if (parts.empty()) throw ContractError("concat: no inputs");
    long total = 0;
    for (Var p : parts) {
        require(v(p.id).rank() == 1, "concat: inputs must be rank 1, got " + v(p.id).shape_string());
        total += v(p.id).numel();
    }
    Tensor out({static_cast<int>(total)});
    long off = 0;
    for (Var p : parts) {
        const Tensor& pv = v(p.id);
        for (long i = 0; i < pv.numel(); ++i) out[off + i] = pv[i];
        off += pv.numel();
    }
    return record(std::move(out), [parts](Tape& t, int self) {
        const Tensor& g = t.gbuf(self);
        long off = 0;
        for (Var p : parts) {
            Tensor& dp = t.gbuf(p.id);
            for (long i = 0; i < dp.numel(); ++i) dp[i] += g[off + i];
            off += dp.numel();
        }
    });
}

Var Tape::slice(Var x, int start, int len) {
    const Tensor& xv = v(x.id);
    require(xv.rank() == 1, "slice: input must be rank 1, got " + xv.shape_string());
    require(start >= 0 && len > 0 && start + len <= xv.numel(),
            "slice: range [" + std::to_string(start) + "," + std::to_string(start + len) +
                ") out of bounds for " + xv.shape_string());
    Tensor out({len});
    for (int i = 0; i < len; ++i) out[i] = xv[start + i];
    return record(std::move(out), [x, start, len](Tape& t, int self) {
        const Tensor& g = t.gbuf(self);
        Tensor& dx = t.gbuf(x.id);
        for (int i = 0; i < len; ++i) dx[start + i] += g[i];
    });
}

Var Tape::sum(Var x) {
    const Tensor& xv = v(x.id);
    double acc = 0.0;
    for (long i = 0; i < xv.numel(); ++i) acc += xv[i];
    return record(Tensor::scalar(acc), [x](Tape& t, int self) {
        const double g = t.gbuf(self)[0];
        Tensor& dx = t.gbuf(x.id);
        for (long i = 0; i < dx.numel(); ++i) dx[i] += g;
    });
}

Var Tape::matmul(Var a, Var b) {
    const Tensor &av = v(a.id), &bv = v(b.id);
    require(av.rank() == 2 && bv.rank() == 2 && av.cols() == bv.rows(),
            "matmul: incompatible shapes " + av.shape_string() + " and " + bv.shape_string());
    const int m = av.rows(), k = av.cols(), n = bv.cols();
    Tensor out({m, n});
    kernels::matmul(av.data(), bv.data(), out.data(), m, k, n);
    return record(std::move(out), [a, b, m, k, n](Tape& t, int self) {
        const Tensor& g = t.gbuf(self);
        kernels::matmul_grad_a(g.data(), t.v(b.id).data(), t.gbuf(a.id).data(), m, k, n);
        kernels::matmul_grad_b(t.v(a.id).data(), g.data(), t.gbuf(b.id).data(), m, k, n);
    });
}

Var Tape::matvec(Var w, Var x) {
    const Tensor &wv = v(w.id), &xv = v(x.id);
    require(wv.rank() == 2 && xv.rank() == 1 && wv.cols() == xv.numel(),
            "matvec: incompatible shapes " + wv.shape_string() + " and " + xv.shape_string());
    const int m = wv.rows(), k = wv.cols();
    Tensor out({m});
    kernels::matmul(wv.data(), xv.data(), out.data(), m, k, 1);
    return record(std::move(out), [w, x, m, k](Tape& t, int self) {
        const Tensor& g = t.gbuf(self);
        kernels::matmul_grad_a(g.data(), t.v(x.id).data(), t.gbuf(w.id).data(), m, k, 1);
        kernels::matmul_grad_b(t.v(w.id).data(), g.data(), t.gbuf(x.id).data(), m, k, 1);
    });
}

Var Tape::vecmat(Var w, Var m) {
    const Tensor &wv = v(w.id), &mv = v(m.id);
    require(wv.rank() == 1 && mv.rank() == 2 && wv.numel() == mv.rows(),
            "vecmat: incompatible shapes " + wv.shape_string() + " and " + mv.shape_string());
    const int k = mv.rows(), n = mv.cols();
    Tensor out({n});
    kernels::matmul(wv.data(), mv.data(), out.data(), 1, k, n);
    return record(std::move(out), [w, m, k, n](Tape& t, int self) {
        const Tensor& g = t.gbuf(self);
        kernels::matmul_grad_a(g.data(), t.v(m.id).data(), t.gbuf(w.id).data(), 1, k, n);
        kernels::matmul_grad_b(t.v(w.id).data(), g.data(), t.gbuf(m.id).data(), 1, k, n);
    });
}

Var Tape::outer(Var u, Var vv_) {
    const Tensor &uv = v(u.id), &vvv = v(vv_.id);
    require(uv.rank() == 1 && vvv.rank() == 1,
            "outer: inputs must be rank 1, got " + uv.shape_string() + " and " + vvv.shape_string());
    const int n = static_cast<int>(uv.numel()), m = static_cast<int>(vvv.numel());
    Tensor out({n, m});
    kernels::matmul(uv.data(), vvv.data(), out.data(), n, 1, m);
    return record(std::move(out), [u, vv_, n, m](Tape& t, int self) {
        const Tensor& g = t.gbuf(self);
        kernels::matmul_grad_a(g.data(), t.v(vv_.id).data(), t.gbuf(u.id).data(), n, 1, m);
        kernels::matmul_grad_b(t.v(u.id).data(), g.data(), t.gbuf(vv_.id).data(), n, 1, m);
    });
}

Var Tape::softmax(Var x) {
    const Tensor& xv = v(x.id);
    require(xv.rank() == 1 && xv.numel() >= 1, "softmax: input must be rank 1, got " + xv.shape_string());
    const long n = xv.numel();
    double mx = xv[0];
    for (long i = 1; i < n; ++i) mx = std::max(mx, xv[i]);
    Tensor out({static_cast<int>(n)});
    double denom = 0.0;
    for (long i = 0; i < n; ++i) {
        out[i] = std::exp(xv[i] - mx);
        denom += out[i];
    }
    for (long i = 0; i < n; ++i) out[i] /= denom;
    return record(std::move(out), [x](Tape& t, int self) {
        const Tensor& g = t.gbuf(self);
        const Tensor& y = t.v(self);
        double dot = 0.0;
        for (long i = 0; i < g.numel(); ++i) dot += g[i] * y[i];
        Tensor& dx = t.gbuf(x.id);
        for (long i = 0; i < g.numel(); ++i) dx[i] += y[i] * (g[i] - dot);
    });
}

Var Tape::cosine_rows(Var mem, Var key) {
    const Tensor &mv = v(mem.id), &kv = v(key.id);
    require(mv.rank() == 2 && kv.rank() == 1 && mv.cols() == kv.numel(),
            "cosine_rows: incompatible shapes " + mv.shape_string() + " and " + kv.shape_string());
    const int rows = mv.rows(), width = mv.cols();
    Tensor out({rows});
    kernels::cosine_rows(mv.data(), kv.data(), out.data(), rows, width, kCosineDelta);
    return record(std::move(out), [mem, key, rows, width](Tape& t, int self) {
        const Tensor& g = t.gbuf(self);
        const Tensor& mval = t.v(mem.id);
        const Tensor& kval = t.v(key.id);
        const Tensor& sim = t.v(self);
        Tensor& dmem = t.gbuf(mem.id);
        Tensor& dkey = t.gbuf(key.id);
        double ksq = 0.0;
        for (int j = 0; j < width; ++j) ksq += kval[j] * kval[j];
        const double knorm = std::sqrt(ksq);
        const double knorm_safe = std::max(knorm, 1e-300);
        for (int i = 0; i < rows; ++i) {
            const double gi = g[i];
            if (gi == 0.0) continue;
            double rsq = 0.0;
            for (int j = 0; j < width; ++j) rsq += mval.at(i, j) * mval.at(i, j);
            const double rnorm = std::sqrt(rsq);
            const double rnorm_safe = std::max(rnorm, 1e-300);
            const double denom = rnorm * knorm + kCosineDelta;
            const double ci = sim[i];
            for (int j = 0; j < width; ++j) {
                dmem.at(i, j) += gi * (kval[j] / denom - ci * knorm * mval.at(i, j) / (rnorm_safe * denom));
                dkey[j] += gi * (mval.at(i, j) / denom - ci * rnorm * kval[j] / (knorm_safe * denom));
            }
        }
    });
}

Var Tape::cosine_similarity(Var u, Var vv_) {
    const Tensor &uv = v(u.id), &vvv = v(vv_.id);
    require(uv.rank() == 1 && vvv.rank() == 1 && uv.numel() == vvv.numel(),
            "cosine_similarity: incompatible shapes " + uv.shape_string() + " and " + vvv.shape_string());
    // Single-row case of cosine_rows.
    const int width = static_cast<int>(uv.numel());
    Tensor out({1});
    kernels::cosine_rows(uv.data(), vvv.data(), out.data(), 1, width, kCosineDelta);
    return record(std::move(out), [u, vv_, width](Tape& t, int self) {
        const Tensor& g = t.gbuf(self);
        const double gi = g[0];
        if (gi == 0.0) return;
        const Tensor& uval = t.v(u.id);
        const Tensor& vval = t.v(vv_.id);
        const double ci = t.v(self)[0];
        double usq = 0.0, vsq = 0.0;
        for (int j = 0; j < width; ++j) {
            usq += uval[j] * uval[j];
            vsq += vval[j] * vval[j];
        }
        const double un = std::sqrt(usq), vn = std::sqrt(vsq);
        const double un_safe = std::max(un, 1e-300), vn_safe = std::max(vn, 1e-300);
        const double denom = un * vn + kCosineDelta;
        Tensor& du = t.gbuf(u.id);
        Tensor& dv = t.gbuf(vv_.id);
        for (int j = 0; j < width; ++j) {
            du[j] += gi * (vval[j] / denom - ci * vn * uval[j] / (un_safe * denom));
            dv[j] += gi * (uval[j] / denom - ci * un * vval[j] / (vn_safe * denom));
        }
    });
}

Var Tape::circular_convolve(Var w, Var s) {
    const Tensor &wv = v(w.id), &sv = v(s.id);
    require(wv.rank() == 1 && sv.rank() == 1,
            "circular_convolve: inputs must be rank 1, got " + wv.shape_string() + " and " +
                sv.shape_string());
    const int n = static_cast<int>(wv.numel());
    const int k = static_cast<int>(sv.numel());
    if (k % 2 == 0 || k > n) {
        throw ConfigError("circular_convolve: shift kernel width " + std::to_string(k) +
                          " must be odd and <= " + std::to_string(n));
    }
    const int half = k / 2;
    Tensor out({n});
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int j = 0; j < k; ++j) {
            const int offset = j - half;
            acc += wv[mod_wrap(i - offset, n)] * sv[j];
        }
        out[i] = acc;
    }
    return record(std::move(out), [w, s, n, k, half](Tape& t, int self) {
        const Tensor& g = t.gbuf(self);
        const Tensor& wval = t.v(w.id);
        const Tensor& sval = t.v(s.id);
        Tensor& dw = t.gbuf(w.id);
        Tensor& ds = t.gbuf(s.id);
        for (int p = 0; p < n; ++p) {
            double acc = 0.0;
            for (int j = 0; j < k; ++j) {
                const int offset = j - half;
                acc += g[mod_wrap(p + offset, n)] * sval[j];
            }
            dw[p] += acc;
        }
        for (int j = 0; j < k; ++j) {
            const int offset = j - half;
            double acc = 0.0;
            for (int i = 0; i < n; ++i) acc += g[i] * wval[mod_wrap(i - offset, n)];
            ds[j] += acc;
        }
    });
}

Var Tape::bce_loss(Var pred, const Tensor& target, const Tensor& mask) {
    const Tensor& pv = v(pred.id);
    check_same_shape(pv, target, "bce_loss(pred,target)");
    check_same_shape(pv, mask, "bce_loss(pred,mask)");
    const double lo = kBceClamp, hi = 1.0 - kBceClamp;
    double loss = 0.0;
    for (long i = 0; i < pv.numel(); ++i) {
        if (mask[i] == 0.0) continue;
        const double p = std::min(std::max(pv[i], lo), hi);
        const double t = target[i];
        loss -= mask[i] * (t * std::log(p) + (1.0 - t) * std::log(1.0 - p));
    }
    return record(Tensor::scalar(loss), [pred, target, mask, lo, hi](Tape& t, int self) {
        const double g = t.gbuf(self)[0];
        const Tensor& pv = t.v(pred.id);
        Tensor& dp = t.gbuf(pred.id);
        for (long i = 0; i < pv.numel(); ++i) {
            if (mask[i] == 0.0) continue;
            if (pv[i] <= lo || pv[i] >= hi) continue; // clamped region: zero slope
            const double p = pv[i];
            dp[i] += g * mask[i] * (p - target[i]) / (p * (1.0 - p));
        }
    });
}

void Tape::backward(Var loss) {
    if (backward_done_) throw ContractError("backward: already ran on this tape; reset first");
    if (!loss.valid() || loss.id >= static_cast<int>(nodes_.size())) {
        throw ContractError("backward: invalid loss handle");
    }
    if (nodes_[static_cast<size_t>(loss.id)].value.numel() != 1) {
        throw ContractError("backward: loss must be scalar, got " +
                            nodes_[static_cast<size_t>(loss.id)].value.shape_string());
    }
    for (int id = 0; id <= loss.id; ++id) {
        Node& nd = nodes_[static_cast<size_t>(id)];
        nd.grad = Tensor::zeros(nd.value.shape());
    }
    nodes_[static_cast<size_t>(loss.id)].grad[0] = 1.0;
    for (int id = loss.id; id >= 0; --id) {
        Node& nd = nodes_[static_cast<size_t>(id)];
        if (nd.back) nd.back(*this, id);
    }
    for (auto& [param, id] : watched_) {
        if (id > loss.id) continue; // watched after the loss: no influence
        const Tensor& g = nodes_[static_cast<size_t>(id)].grad;
        for (long i = 0; i < g.numel(); ++i) param->grad[i] += g[i];
    }
    backward_done_ = true;
}

void Tape::reset() {
    nodes_.clear();
    watched_.clear();
    watch_index_.clear();
    backward_done_ = false;
}

} // namespace ntmlab
