#include "ntmlab/tasks.hpp"

#include <random>
#include <sstream>

namespace ntmlab {

long Episode::masked_bits() const {
    long n = 0;
    for (int t = 0; t < steps(); ++t) {
        if (mask[t] != 0.0) n += output_width();
    }
    return n;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

int rand_int(std::mt19937_64& rng, int lo, int hi) {
    std::uniform_int_distribution<int> d(lo, hi);
    return d(rng);
}

double rand_bit(std::mt19937_64& rng) { return static_cast<double>(rng() & 1u); }

} // namespace

std::uint64_t episode_seed(std::uint64_t run_seed, long iteration) {
    return splitmix64(run_seed ^ splitmix64(static_cast<std::uint64_t>(iteration)));
}

Episode gen_copy(std::uint64_t seed, const CopySpec& spec) {
    if (spec.min_items < 1 || spec.min_items > spec.max_items || spec.item_width < 1) {
        throw ConfigError("gen_copy: invalid item range [" + std::to_string(spec.min_items) + "," +
                          std::to_string(spec.max_items) + "] or width " +
                          std::to_string(spec.item_width));
    }
    std::mt19937_64 rng(seed);
    const int n = rand_int(rng, spec.min_items, spec.max_items);
    const int w = spec.item_width;
    const int d_in = spec.input_width();
    const int steps = 2 * n + 1; // items, delimiter, answers

    Episode ep;
    ep.inputs = Tensor::zeros({steps, d_in});
    ep.targets = Tensor::zeros({steps, w});
    ep.mask = Tensor::zeros({steps});
    ep.items = n;
    ep.predicted_items = n;
    ep.item_width = w;

    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < w; ++j) {
            double bit = rand_bit(rng);
            ep.inputs.at(i, j) = bit;
            ep.targets.at(n + 1 + i, j) = bit; // replayed in original order
        }
    }
    ep.inputs.at(n, w) = 1.0; // delimiter step
    for (int i = 0; i < n; ++i) ep.mask[n + 1 + i] = 1.0;
    return ep;
}

Episode gen_recall(std::uint64_t seed, const RecallSpec& spec) {
    if (spec.min_items < 2 || spec.min_items > spec.max_items || spec.item_len < 1 ||
        spec.item_width < 1) {
        throw ConfigError("gen_recall: invalid items range [" + std::to_string(spec.min_items) +
                          "," + std::to_string(spec.max_items) + "], item_len " +
                          std::to_string(spec.item_len) + ", width " +
                          std::to_string(spec.item_width));
    }
    std::mt19937_64 rng(seed);
    const int n = rand_int(rng, spec.min_items, spec.max_items);
    const int len = spec.item_len;
    const int w = spec.item_width;
    const int d_in = spec.input_width();
    const int delim_ch = w;     // per-item delimiter channel
    const int query_ch = w + 1; // query bracket channel

    // Layout: [delim item]*n, query-bracket, query item, query-bracket, answers.
    const int steps = n * (len + 1) + 1 + len + 1 + len;

    Episode ep;
    ep.inputs = Tensor::zeros({steps, d_in});
    ep.targets = Tensor::zeros({steps, w});
    ep.mask = Tensor::zeros({steps});
    ep.items = n;
    ep.predicted_items = 1;
    ep.item_width = w;

    std::vector<std::vector<double>> items(n, std::vector<double>(len * w));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < len * w; ++j) items[i][j] = rand_bit(rng);
    }
    const int query = rand_int(rng, 0, n - 2); // query item has a successor

    int t = 0;
    for (int i = 0; i < n; ++i) {
        ep.inputs.at(t++, delim_ch) = 1.0;
        for (int c = 0; c < len; ++c, ++t) {
            for (int j = 0; j < w; ++j) ep.inputs.at(t, j) = items[i][c * w + j];
        }
    }
    ep.inputs.at(t++, query_ch) = 1.0;
    for (int c = 0; c < len; ++c, ++t) {
        for (int j = 0; j < w; ++j) ep.inputs.at(t, j) = items[query][c * w + j];
    }
    ep.inputs.at(t++, query_ch) = 1.0;
    for (int c = 0; c < len; ++c, ++t) {
        ep.mask[t] = 1.0;
        for (int j = 0; j < w; ++j) ep.targets.at(t, j) = items[query + 1][c * w + j];
    }
    return ep;
}

std::string dump_episode(const Episode& ep) {
    std::ostringstream os;
    for (int t = 0; t < ep.steps(); ++t) {
        for (int j = 0; j < ep.input_width(); ++j) {
            os << (ep.inputs.at(t, j) != 0.0 ? '1' : '0');
        }
        os << " | " << (ep.mask[t] != 0.0 ? '1' : '0');
        if (ep.mask[t] != 0.0) {
            os << " | ";
            for (int j = 0; j < ep.output_width(); ++j) {
                os << (ep.targets.at(t, j) != 0.0 ? '1' : '0');
            }
        }
        os << '\n';
    }
    return os.str();
}

} // namespace ntmlab
