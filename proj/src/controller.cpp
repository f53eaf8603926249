#include "ntmlab/controller.hpp"

namespace ntmlab {

Controller::Controller(ParameterStore& store, const std::string& prefix, int input_width,
                       int hidden_width, int n_layers, std::mt19937_64& rng)
    : input_width_(input_width), hidden_width_(hidden_width) {
    if (n_layers < 1) throw ConfigError("controller: layer count must be >= 1");
    if (input_width < 1 || hidden_width < 1) {
        throw ConfigError("controller: input and hidden widths must be >= 1");
    }
    for (int l = 0; l < n_layers; ++l) {
        const int d_in = l == 0 ? input_width : hidden_width;
        const int d = d_in + hidden_width;
        const std::string base = prefix + ".l" + std::to_string(l) + ".";
        LstmLayerParams p;
        p.d_in = d_in;
        p.d_h = hidden_width;
        p.Wi = &store.add_uniform(base + "Wi", {hidden_width, d}, -kInitRange, kInitRange, rng);
        p.Wf = &store.add_uniform(base + "Wf", {hidden_width, d}, -kInitRange, kInitRange, rng);
        p.Wo = &store.add_uniform(base + "Wo", {hidden_width, d}, -kInitRange, kInitRange, rng);
        p.Wg = &store.add_uniform(base + "Wg", {hidden_width, d}, -kInitRange, kInitRange, rng);
        p.bi = &store.add_zeros(base + "bi", {hidden_width});
        p.bf = &store.add(base + "bf", Tensor::full({hidden_width}, kForgetBias));
        p.bo = &store.add_zeros(base + "bo", {hidden_width});
        p.bg = &store.add_zeros(base + "bg", {hidden_width});
        layers_.push_back(p);
    }
}

Controller::State Controller::initial_state(Tape& tape) const {
    State s;
    for (size_t l = 0; l < layers_.size(); ++l) {
        s.h.push_back(tape.constant(Tensor::zeros({hidden_width_})));
        s.c.push_back(tape.constant(Tensor::zeros({hidden_width_})));
    }
    return s;
}

std::vector<Var> Controller::step(Tape& tape, State& state, Var x) const {
    if (tape.val(x).numel() != input_width_) {
        throw ConfigError("controller step: input width " + tape.val(x).shape_string() +
                          " does not match configured width " + std::to_string(input_width_));
    }
    std::vector<Var> outputs;
    Var layer_in = x;
    for (size_t l = 0; l < layers_.size(); ++l) {
        const LstmLayerParams& p = layers_[l];
        Var z = tape.concat({layer_in, state.h[l]});
        Var i = tape.sigmoid(tape.add(tape.matvec(tape.watch(*p.Wi), z), tape.watch(*p.bi)));
        Var f = tape.sigmoid(tape.add(tape.matvec(tape.watch(*p.Wf), z), tape.watch(*p.bf)));
        Var o = tape.sigmoid(tape.add(tape.matvec(tape.watch(*p.Wo), z), tape.watch(*p.bo)));
        Var g = tape.tanh_op(tape.add(tape.matvec(tape.watch(*p.Wg), z), tape.watch(*p.bg)));
        Var c = tape.add(tape.mul(f, state.c[l]), tape.mul(i, g));
        Var h = tape.mul(o, tape.tanh_op(c));
        state.c[l] = c;
        state.h[l] = h;
        outputs.push_back(h);
        layer_in = h;
    }
    return outputs;
}

} // namespace ntmlab
