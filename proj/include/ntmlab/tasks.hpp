#pragma once

#include <cstdint>
#include <string>

#include "ntmlab/tensor.hpp"

namespace ntmlab {

// One training episode: input grid, target grid, and the per-timestep loss
// mask. Content channels are binary; delimiter channels are one-hot at
// delimiter steps and zero elsewhere.
struct Episode {
    Tensor inputs;  // [T x input_width]
    Tensor targets; // [T x output_width]
    Tensor mask;    // [T], 1 exactly on answer timesteps
    int items = 0;
    int predicted_items = 0; // items the loss scores (copy: all, recall: 1)
    int item_width = 0;

    int steps() const { return inputs.rows(); }
    int input_width() const { return inputs.cols(); }
    int output_width() const { return targets.cols(); }
    long masked_bits() const;
};

struct CopySpec {
    int min_items = 1;
    int max_items = 20;
    int item_width = 8;
    int input_width() const { return item_width + 1; } // content + delimiter channel
};

struct RecallSpec {
    int min_items = 2;
    int max_items = 6;
    int item_len = 3; // columns per item
    int item_width = 6;
    int input_width() const { return item_width + 2; } // content + item/query delimiters
};

Episode gen_copy(std::uint64_t seed, const CopySpec& spec);
Episode gen_recall(std::uint64_t seed, const RecallSpec& spec);

// Derives the episode seed for one training iteration from the run seed.
std::uint64_t episode_seed(std::uint64_t run_seed, long iteration);

// Plain-text grid: one row per timestep, input channels as 0/1 columns, the
// mask appended, and the target columns on masked rows.
std::string dump_episode(const Episode& ep);

} // namespace ntmlab
