#pragma once

#include <random>
#include <string>
#include <vector>

#include "ntmlab/tape.hpp"

namespace ntmlab {

// Per-layer LSTM gate parameters: each gate maps concat(x, h_prev) of width
// d_in + d_h to d_h.
struct LstmLayerParams {
    Parameter *Wi, *Wf, *Wo, *Wg;
    Parameter *bi, *bf, *bo, *bg;
    int d_in = 0;
    int d_h = 0;
};

// Stacked LSTM. Layer l consumes layer l-1's output; layer 0 consumes the
// external input (task input concatenated with previous reads).
class Controller {
public:
    Controller(ParameterStore& store, const std::string& prefix, int input_width, int hidden_width,
               int n_layers, std::mt19937_64& rng);

    struct State {
        std::vector<Var> h;
        std::vector<Var> c;
    };

    State initial_state(Tape& tape) const;

    // Advances one step; returns the output of every layer (h per layer).
    // state is updated in place.
    std::vector<Var> step(Tape& tape, State& state, Var x) const;

    int hidden_width() const { return hidden_width_; }
    int layers() const { return static_cast<int>(layers_.size()); }
    int input_width() const { return input_width_; }

    static constexpr double kInitRange = 0.08;
    static constexpr double kForgetBias = 1.0;

private:
    std::vector<LstmLayerParams> layers_;
    int input_width_;
    int hidden_width_;
};

} // namespace ntmlab
