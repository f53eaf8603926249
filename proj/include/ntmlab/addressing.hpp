#pragma once

#include <random>
#include <string>
#include <vector>

#include "ntmlab/tape.hpp"

namespace ntmlab {

// One read or write head. Owns an affine map from the controller output to the
// head interface vector, the learned bias behind the initial weighting, and
// (read heads) the learned initial read vector.
class Head {
public:
    Head(ParameterStore& store, const std::string& prefix, int ctrl_width, int mem_slots,
         int mem_width, int shift_width, bool write, std::mt19937_64& rng,
         const Head* share_affine_with = nullptr);

    struct Interface {
        Var key;    // [M]
        Var beta;   // scalar >= 0 (softplus)
        Var gate;   // scalar in (0,1) (sigmoid)
        Var shift;  // [K] on the simplex (softmax)
        Var gamma;  // scalar >= 1 (1 + softplus)
        Var erase;  // [M] in (0,1) (sigmoid), write heads only
        Var add;    // [M] unconstrained, write heads only
    };

    Interface interface(Tape& tape, Var ctrl_out) const;

    // Content -> interpolate -> shift -> sharpen. Result is on the simplex.
    Var address(Tape& tape, const Interface& iface, Var w_prev, Var mem) const;

    Var initial_weighting(Tape& tape) const; // softmax over the learned bias
    Var initial_read(Tape& tape) const;      // read heads only

    bool is_write() const { return write_; }
    int interface_width() const;

    static constexpr double kSharpenFloor = 1e-16;

private:
    Parameter* W_;
    Parameter* b_;
    Parameter* w0_;
    Parameter* r0_ = nullptr;
    int mem_width_;
    int shift_width_;
    bool write_;
};

// Applies every write head to one memory block within a timestep: all erases
// combine multiplicatively, then all adds sum, so head order does not matter.
struct WriteCommand {
    Var weighting;
    Var erase;
    Var add;
};
Var write_memory(Tape& tape, Var mem, const std::vector<WriteCommand>& writes);

// r = sum_i w_r(i) * mem(i,:)
Var read_memory(Tape& tape, Var w_r, Var mem);

} // namespace ntmlab
