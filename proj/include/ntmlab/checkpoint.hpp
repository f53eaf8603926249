#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ntmlab/model.hpp"
#include "ntmlab/trainer.hpp"

namespace ntmlab {

// Checkpoint file: a text manifest (key-value lines, then one line per tensor
// with shape, byte offset, and element count), a %%BLOB%% marker, and a single
// blob of little-endian 64-bit reals in manifest order. Parameters come first,
// then RMSProp mean-square and momentum buffers.
struct Checkpoint {
    ModelConfig config;
    long iteration = 0;
    std::uint64_t run_seed = 0;

    struct Entry {
        std::string name; // param/<p>, ms/<p>, mom/<p>
        std::vector<int> shape;
        std::uint64_t byte_offset = 0;
        long count = 0;
    };
    std::vector<Entry> entries;
    std::vector<double> blob;

    static Checkpoint read(const std::string& path);
    std::string manifest_text() const;

    // Restores parameter values and optimizer state by name; throws on any
    // name or shape mismatch.
    void apply(Model& model, RmsProp& opt) const;
};

void save_checkpoint(const std::string& path, const Model& model, const RmsProp& opt,
                     long iteration, std::uint64_t run_seed);

} // namespace ntmlab
