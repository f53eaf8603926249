#include "ntmlab/addressing.hpp"

namespace ntmlab {

Head::Head(ParameterStore& store, const std::string& prefix, int ctrl_width, int mem_slots,
           int mem_width, int shift_width, bool write, std::mt19937_64& rng,
           const Head* share_affine_with)
    : mem_width_(mem_width), shift_width_(shift_width), write_(write) {
    if (shift_width % 2 == 0 || shift_width > mem_slots) {
        throw ConfigError("head: shift width " + std::to_string(shift_width) +
                          " must be odd and <= memory slots " + std::to_string(mem_slots));
    }
    if (share_affine_with) {
        if (share_affine_with->interface_width() != interface_width()) {
            throw ConfigError("head: cannot share affine parameters across different layouts");
        }
        W_ = share_affine_with->W_;
        b_ = share_affine_with->b_;
    } else {
        const int iface = interface_width();
        W_ = &store.add_uniform(prefix + ".W", {iface, ctrl_width}, -0.08, 0.08, rng);
        b_ = &store.add_zeros(prefix + ".b", {iface});
    }
    w0_ = &store.add_uniform(prefix + ".w0", {mem_slots}, -0.05, 0.05, rng);
    if (!write_) {
        r0_ = &store.add_uniform(prefix + ".r0", {mem_width}, -0.05, 0.05, rng);
    }
}

int Head::interface_width() const {
    // key + beta + gate + shift + gamma (+ erase + add for write heads)
    int w = mem_width_ + 1 + 1 + shift_width_ + 1;
    if (write_) w += 2 * mem_width_;
    return w;
}

Head::Interface Head::interface(Tape& tape, Var ctrl_out) const {
    Var raw = tape.add(tape.matvec(tape.watch(*W_), ctrl_out), tape.watch(*b_));
    const int m = mem_width_, k = shift_width_;
    Interface f;
    f.key = tape.slice(raw, 0, m);
    f.beta = tape.softplus(tape.slice(raw, m, 1));
    f.gate = tape.sigmoid(tape.slice(raw, m + 1, 1));
    f.shift = tape.softmax(tape.slice(raw, m + 2, k));
    f.gamma = tape.add(tape.constant_scalar(1.0), tape.softplus(tape.slice(raw, m + 2 + k, 1)));
    if (write_) {
        f.erase = tape.sigmoid(tape.slice(raw, m + 3 + k, m));
        f.add = tape.slice(raw, m + 3 + k + m, m);
    }
    return f;
}

Var Head::address(Tape& tape, const Interface& iface, Var w_prev, Var mem) const {
    Var sim = tape.cosine_rows(mem, iface.key);
    Var w_c = tape.softmax(tape.mul_by_scalar(sim, iface.beta));
    Var carry = tape.sub(tape.constant_scalar(1.0), iface.gate);
    Var w_g = tape.add(tape.mul_by_scalar(w_c, iface.gate), tape.mul_by_scalar(w_prev, carry));
    Var w_s = tape.circular_convolve(w_g, iface.shift);
    Var floored = tape.clamp_min(w_s, kSharpenFloor);
    Var powed = tape.pow_positive(floored, iface.gamma);
    return tape.div_by_scalar(powed, tape.sum(powed));
}

Var Head::initial_weighting(Tape& tape) const { return tape.softmax(tape.watch(*w0_)); }

Var Head::initial_read(Tape& tape) const {
    if (!r0_) throw ContractError("initial_read: not a read head");
    return tape.watch(*r0_);
}

Var write_memory(Tape& tape, Var mem, const std::vector<WriteCommand>& writes) {
    if (writes.empty()) return mem;
    const Tensor& mv = tape.val(mem);
    Var keep{};
    for (const WriteCommand& wc : writes) {
        Var we = tape.outer(wc.weighting, wc.erase);
        Var k = tape.sub(tape.constant(Tensor::full(mv.shape(), 1.0)), we);
        keep = keep.valid() ? tape.mul(keep, k) : k;
    }
    Var out = tape.mul(mem, keep);
    for (const WriteCommand& wc : writes) {
        out = tape.add(out, tape.outer(wc.weighting, wc.add));
    }
    return out;
}

Var read_memory(Tape& tape, Var w_r, Var mem) { return tape.vecmat(w_r, mem); }

} // namespace ntmlab
