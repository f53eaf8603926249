#include "ntmlab/model.hpp"

#include <sstream>

namespace ntmlab {

std::string to_string(Variant v) {
    switch (v) {
        case Variant::NTM: return "ntm";
        case Variant::NTM1: return "ntm1";
        case Variant::NTM2: return "ntm2";
        case Variant::NTM3: return "ntm3";
    }
    return "ntm";
}

Variant variant_from_string(const std::string& s) {
    if (s == "ntm") return Variant::NTM;
    if (s == "ntm1") return Variant::NTM1;
    if (s == "ntm2") return Variant::NTM2;
    if (s == "ntm3") return Variant::NTM3;
    throw ConfigError("unknown variant '" + s + "' (expected ntm|ntm1|ntm2|ntm3)");
}

std::string to_string(MixMode m) { return m == MixMode::Fixed ? "fixed" : "learned"; }

MixMode mix_mode_from_string(const std::string& s) {
    if (s == "fixed") return MixMode::Fixed;
    if (s == "learned") return MixMode::Learned;
    throw ConfigError("unknown mix mode '" + s + "' (expected fixed|learned)");
}

int ModelConfig::blocks() const {
    switch (variant) {
        case Variant::NTM: return 1;
        case Variant::NTM1: return 2; // M_c + hidden M_h
        case Variant::NTM2: return 2;
        case Variant::NTM3: return layers;
    }
    return 1;
}

int ModelConfig::controlled_blocks() const {
    return variant == Variant::NTM1 ? 1 : blocks();
}

void ModelConfig::validate() const {
    if (mem_slots < 1 || mem_width < 1) {
        throw ConfigError("memory dims must be positive, got " + std::to_string(mem_slots) + "x" +
                          std::to_string(mem_width));
    }
    if (read_heads < 1) throw ConfigError("read_heads must be >= 1");
    if (write_heads < 1) throw ConfigError("write_heads must be >= 1");
    if (ctrl_width < 1) throw ConfigError("controller_width must be >= 1");
    if (layers < 1) throw ConfigError("layers must be >= 1");
    if (shift_width < 1 || shift_width % 2 == 0 || shift_width > mem_slots) {
        throw ConfigError("shift_width must be odd and <= mem_slots, got " +
                          std::to_string(shift_width));
    }
    if (variant == Variant::NTM1 && write_heads != 1) {
        throw ConfigError("ntm1 has exactly one write head");
    }
    if ((variant == Variant::NTM2 || variant == Variant::NTM3) && write_heads != 1) {
        throw ConfigError(to_string(variant) + " uses one write head per memory block");
    }
    if (variant == Variant::NTM3 && layers < 2) {
        throw ConfigError("ntm3 needs at least 2 controller layers");
    }
    if (share_head_params && variant != Variant::NTM2) {
        throw ConfigError("share_head_params applies to ntm2 only");
    }
    if (mix_mode == MixMode::Fixed && variant != Variant::NTM) {
        if (mix_a < 0.0 || mix_a > 1.0 || mix_b < 0.0 || mix_b > 1.0) {
            throw ConfigError("fixed mixture weights must lie in [0,1]");
        }
    }
    if (input_width < 1 || output_width < 1) {
        throw ConfigError("input_width and output_width must be set from the task");
    }
}

std::map<std::string, std::string> ModelConfig::to_kv() const {
    std::map<std::string, std::string> kv;
    kv["variant"] = to_string(variant);
    kv["mem_slots"] = std::to_string(mem_slots);
    kv["mem_width"] = std::to_string(mem_width);
    kv["read_heads"] = std::to_string(read_heads);
    kv["write_heads"] = std::to_string(write_heads);
    kv["controller_width"] = std::to_string(ctrl_width);
    kv["layers"] = std::to_string(layers);
    kv["shift_width"] = std::to_string(shift_width);
    kv["mix_mode"] = to_string(mix_mode);
    {
        std::ostringstream os;
        os.precision(17);
        os << mix_a;
        kv["mix_a"] = os.str();
    }
    {
        std::ostringstream os;
        os.precision(17);
        os << mix_b;
        kv["mix_b"] = os.str();
    }
    kv["share_head_params"] = share_head_params ? "1" : "0";
    kv["input_width"] = std::to_string(input_width);
    kv["output_width"] = std::to_string(output_width);
    kv["seed"] = std::to_string(seed);
    return kv;
}

ModelConfig ModelConfig::from_kv(const std::map<std::string, std::string>& kv) {
    ModelConfig c;
    auto need = [&kv](const std::string& k) -> const std::string& {
        auto it = kv.find(k);
        if (it == kv.end()) throw ConfigError("checkpoint config missing key '" + k + "'");
        return it->second;
    };
    c.variant = variant_from_string(need("variant"));
    c.mem_slots = std::stoi(need("mem_slots"));
    c.mem_width = std::stoi(need("mem_width"));
    c.read_heads = std::stoi(need("read_heads"));
    c.write_heads = std::stoi(need("write_heads"));
    c.ctrl_width = std::stoi(need("controller_width"));
    c.layers = std::stoi(need("layers"));
    c.shift_width = std::stoi(need("shift_width"));
    c.mix_mode = mix_mode_from_string(need("mix_mode"));
    c.mix_a = std::stod(need("mix_a"));
    c.mix_b = std::stod(need("mix_b"));
    c.share_head_params = need("share_head_params") == "1";
    c.input_width = std::stoi(need("input_width"));
    c.output_width = std::stoi(need("output_width"));
    c.seed = std::stoull(need("seed"));
    return c;
}

std::string ModelConfig::canonical_string() const {
    std::ostringstream os;
    for (const auto& [k, v] : to_kv()) os << k << "=" << v << ";";
    return os.str();
}

Var mix_blocks(Tape& tape, Var a, Var b, Var own, Var upstream) {
    return tape.add(tape.mul_by_scalar(own, a), tape.mul_by_scalar(upstream, b));
}

Model::Model(ModelConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    std::mt19937_64 rng(cfg_.seed);

    const int ctrl_in = cfg_.input_width + cfg_.read_heads * cfg_.mem_width;
    controller_ = std::make_unique<Controller>(store_, "ctrl", ctrl_in, cfg_.ctrl_width,
                                               cfg_.layers, rng);

    const int n_write = cfg_.variant == Variant::NTM ? cfg_.write_heads : cfg_.controlled_blocks();
    for (int j = 0; j < n_write; ++j) {
        const Head* share = cfg_.share_head_params && j > 0 ? write_heads_[0].get() : nullptr;
        write_heads_.push_back(std::make_unique<Head>(store_, "wh" + std::to_string(j),
                                                      cfg_.ctrl_width, cfg_.mem_slots,
                                                      cfg_.mem_width, cfg_.shift_width,
                                                      /*write=*/true, rng, share));
    }
    for (int j = 0; j < cfg_.read_heads; ++j) {
        read_heads_.push_back(std::make_unique<Head>(store_, "rh" + std::to_string(j),
                                                     cfg_.ctrl_width, cfg_.mem_slots,
                                                     cfg_.mem_width, cfg_.shift_width,
                                                     /*write=*/false, rng));
    }
    for (int k = 0; k < cfg_.blocks(); ++k) {
        mem_init_.push_back(&store_.add_uniform("mem" + std::to_string(k) + ".init",
                                                {cfg_.mem_slots, cfg_.mem_width}, -0.05, 0.05,
                                                rng));
    }
    if (cfg_.variant != Variant::NTM && cfg_.mix_mode == MixMode::Learned) {
        mix_a_ = &store_.add("mix.a", Tensor::scalar(cfg_.mix_a));
        mix_b_ = &store_.add("mix.b", Tensor::scalar(cfg_.mix_b));
    }
    const int out_in = cfg_.ctrl_width + cfg_.read_heads * cfg_.mem_width;
    out_w_ = &store_.add_uniform("out.W", {cfg_.output_width, out_in}, -0.08, 0.08, rng);
    out_b_ = &store_.add_zeros("out.b", {cfg_.output_width});
}

int Model::read_block() const { return cfg_.blocks() - 1; }

Var Model::mix_a_var(Tape& tape) const {
    return mix_a_ ? tape.watch(*mix_a_) : tape.constant_scalar(cfg_.mix_a);
}

Var Model::mix_b_var(Tape& tape) const {
    return mix_b_ ? tape.watch(*mix_b_) : tape.constant_scalar(cfg_.mix_b);
}

Model::StepState Model::initial_state(Tape& tape) const {
    StepState s;
    for (Parameter* m : mem_init_) s.mem.push_back(tape.watch(*m));
    for (const auto& h : write_heads_) s.write_w.push_back(h->initial_weighting(tape));
    for (const auto& h : read_heads_) {
        s.read_w.push_back(h->initial_weighting(tape));
        s.reads.push_back(h->initial_read(tape));
    }
    s.ctrl = controller_->initial_state(tape);
    return s;
}

void Model::update_memory(Tape& tape, StepState& state, const std::vector<Var>& layer_outs) const {
    const Var c_top = layer_outs.back();
    switch (cfg_.variant) {
        case Variant::NTM: {
            // All write heads address the pre-step memory, then apply jointly.
            std::vector<WriteCommand> writes;
            for (size_t j = 0; j < write_heads_.size(); ++j) {
                Head::Interface f = write_heads_[j]->interface(tape, c_top);
                Var w = write_heads_[j]->address(tape, f, state.write_w[j], state.mem[0]);
                state.write_w[j] = w;
                writes.push_back({w, f.erase, f.add});
            }
            state.mem[0] = write_memory(tape, state.mem[0], writes);
            break;
        }
        case Variant::NTM1: {
            Head::Interface f = write_heads_[0]->interface(tape, c_top);
            Var w = write_heads_[0]->address(tape, f, state.write_w[0], state.mem[0]);
            state.write_w[0] = w;
            state.mem[0] = write_memory(tape, state.mem[0], {{w, f.erase, f.add}});
            // Hidden memory accumulates the controlled memory.
            state.mem[1] = mix_blocks(tape, mix_a_var(tape), mix_b_var(tape), state.mem[1],
                                      state.mem[0]);
            break;
        }
        case Variant::NTM2: {
            Head::Interface f1 = write_heads_[0]->interface(tape, c_top);
            Var w1 = write_heads_[0]->address(tape, f1, state.write_w[0], state.mem[0]);
            state.write_w[0] = w1;
            state.mem[0] = write_memory(tape, state.mem[0], {{w1, f1.erase, f1.add}});

            Head::Interface f2 = write_heads_[1]->interface(tape, c_top);
            Var w2 = write_heads_[1]->address(tape, f2, state.write_w[1], state.mem[1]);
            state.write_w[1] = w2;
            Var fresh = write_memory(tape, state.mem[1], {{w2, f2.erase, f2.add}});
            state.mem[1] = mix_blocks(tape, mix_a_var(tape), mix_b_var(tape), fresh, state.mem[0]);
            break;
        }
        case Variant::NTM3: {
            // One block per layer; block k is written from layer k's output,
            // then chained into block k+1 through the mixing update.
            Var a = mix_a_var(tape);
            Var b = mix_b_var(tape);
            Var prev_level{};
            for (int k = 0; k < cfg_.blocks(); ++k) {
                Head::Interface f = write_heads_[static_cast<size_t>(k)]->interface(tape, layer_outs[static_cast<size_t>(k)]);
                Var w = write_heads_[static_cast<size_t>(k)]->address(tape, f, state.write_w[static_cast<size_t>(k)],
                                                                     state.mem[static_cast<size_t>(k)]);
                state.write_w[static_cast<size_t>(k)] = w;
                Var fresh = write_memory(tape, state.mem[static_cast<size_t>(k)], {{w, f.erase, f.add}});
                state.mem[static_cast<size_t>(k)] =
                    k == 0 ? fresh : mix_blocks(tape, a, b, fresh, prev_level);
                prev_level = state.mem[static_cast<size_t>(k)];
            }
            break;
        }
    }
}

Var Model::step(Tape& tape, StepState& state, Var x) const {
    std::vector<Var> ctrl_in{x};
    for (Var r : state.reads) ctrl_in.push_back(r);
    std::vector<Var> layer_outs = controller_->step(tape, state.ctrl, tape.concat(ctrl_in));
    const Var c_top = layer_outs.back();

    update_memory(tape, state, layer_outs);

    // Reads address the post-update block they read from.
    const Var block = state.mem[static_cast<size_t>(read_block())];
    for (size_t j = 0; j < read_heads_.size(); ++j) {
        Head::Interface f = read_heads_[j]->interface(tape, c_top);
        Var w_r = read_heads_[j]->address(tape, f, state.read_w[j], block);
        state.read_w[j] = w_r;
        state.reads[j] = read_memory(tape, w_r, block);
    }

    std::vector<Var> out_in{c_top};
    for (Var r : state.reads) out_in.push_back(r);
    Var logits = tape.add(tape.matvec(tape.watch(*out_w_), tape.concat(out_in)),
                          tape.watch(*out_b_));
    return tape.sigmoid(logits);
}

Model::Forward Model::unroll(Tape& tape, const Episode& episode) const {
    if (episode.input_width() != cfg_.input_width || episode.output_width() != cfg_.output_width) {
        throw ConfigError("unroll: episode dims " + episode.inputs.shape_string() + "/" +
                          episode.targets.shape_string() + " do not match model config " +
                          std::to_string(cfg_.input_width) + "/" +
                          std::to_string(cfg_.output_width));
    }
    Forward fwd;
    StepState state = initial_state(tape);
    Var loss{};
    const Tensor ones_row = Tensor::full({cfg_.output_width}, 1.0);
    for (int t = 0; t < episode.steps(); ++t) {
        Tensor row({cfg_.input_width});
        for (int j = 0; j < cfg_.input_width; ++j) row[j] = episode.inputs.at(t, j);
        Var pred = step(tape, state, tape.constant(std::move(row)));
        fwd.preds.push_back(pred);
        if (episode.mask[t] != 0.0) {
            Tensor target_row({cfg_.output_width});
            for (int j = 0; j < cfg_.output_width; ++j) target_row[j] = episode.targets.at(t, j);
            Var lt = tape.bce_loss(pred, target_row, ones_row);
            loss = loss.valid() ? tape.add(loss, lt) : lt;
        }
    }
    if (!loss.valid()) loss = tape.constant_scalar(0.0);
    fwd.loss = loss;
    fwd.loss_value = tape.val(loss)[0];
    return fwd;
}

} // namespace ntmlab
