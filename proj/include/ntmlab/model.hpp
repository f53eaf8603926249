#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "ntmlab/addressing.hpp"
#include "ntmlab/controller.hpp"
#include "ntmlab/tape.hpp"
#include "ntmlab/tasks.hpp"

namespace ntmlab {

enum class Variant { NTM, NTM1, NTM2, NTM3 };
enum class MixMode { Fixed, Learned };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);
std::string to_string(MixMode m);
MixMode mix_mode_from_string(const std::string& s);

struct ModelConfig {
    Variant variant = Variant::NTM;
    int mem_slots = 128;
    int mem_width = 20;
    int read_heads = 1;
    int write_heads = 1; // per controlled block
    int ctrl_width = 100;
    int layers = 1;      // forced to >= 2 for NTM3
    int shift_width = 3;
    MixMode mix_mode = MixMode::Learned;
    double mix_a = 0.5;
    double mix_b = 0.5;
    bool share_head_params = false; // NTM2: one affine map for both write heads
    int input_width = 0;  // task input channels
    int output_width = 0; // task target channels
    std::uint64_t seed = 1;

    int blocks() const;           // memory blocks incl. hidden
    int controlled_blocks() const;
    void validate() const;        // throws ConfigError

    std::map<std::string, std::string> to_kv() const;
    static ModelConfig from_kv(const std::map<std::string, std::string>& kv);
    std::string canonical_string() const;
};

// a * own + b * upstream, the hierarchical memory update. "own" is the block's
// own state (previous state for a hidden block, freshly written state for a
// controlled one); "upstream" is the block feeding into it.
Var mix_blocks(Tape& tape, Var a, Var b, Var own, Var upstream);

// One NTM-family model instance: controller, heads, memory blocks, output map.
class Model {
public:
    explicit Model(ModelConfig cfg);

    struct StepState {
        std::vector<Var> mem;     // per block, N x M
        std::vector<Var> write_w; // per write head
        std::vector<Var> read_w;  // per read head
        std::vector<Var> reads;   // per read head, previous read vector
        Controller::State ctrl;
    };

    StepState initial_state(Tape& tape) const;

    // Advances one timestep on external input x (width input_width); returns
    // the prediction (sigmoid of the output layer) for this step.
    Var step(Tape& tape, StepState& state, Var x) const;

    struct Forward {
        Var loss;               // scalar node (masked BCE sum)
        std::vector<Var> preds; // one per timestep
        double loss_value = 0.0;
    };
    Forward unroll(Tape& tape, const Episode& episode) const;

    ParameterStore& params() { return store_; }
    const ParameterStore& params() const { return store_; }
    const ModelConfig& config() const { return cfg_; }

    int read_block() const; // index of the block reads come from

private:
    ModelConfig cfg_;
    ParameterStore store_;
    std::unique_ptr<Controller> controller_;
    std::vector<std::unique_ptr<Head>> write_heads_; // one list across blocks
    std::vector<std::unique_ptr<Head>> read_heads_;
    std::vector<Parameter*> mem_init_;
    Parameter* mix_a_ = nullptr;
    Parameter* mix_b_ = nullptr;
    Parameter* out_w_ = nullptr;
    Parameter* out_b_ = nullptr;

    Var mix_a_var(Tape& tape) const;
    Var mix_b_var(Tape& tape) const;
    // Memory update for one step given per-layer controller outputs.
    void update_memory(Tape& tape, StepState& state, const std::vector<Var>& layer_outs) const;
};

} // namespace ntmlab
