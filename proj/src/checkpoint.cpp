#include "ntmlab/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <map>
#include <sstream>

namespace ntmlab {

static_assert(std::endian::native == std::endian::little,
              "checkpoint blob is little-endian; byte swapping is not implemented");

namespace {

constexpr const char* kMagic = "ntmlab-checkpoint v1";
constexpr const char* kBlobMarker = "%%BLOB%%";

void append_entry(std::vector<Checkpoint::Entry>& entries, std::vector<double>& blob,
                  const std::string& name, const Tensor& t) {
    Checkpoint::Entry e;
    e.name = name;
    e.shape = t.shape();
    e.byte_offset = blob.size() * sizeof(double);
    e.count = t.numel();
    entries.push_back(std::move(e));
    blob.insert(blob.end(), t.data(), t.data() + t.numel());
}

} // namespace

std::string Checkpoint::manifest_text() const {
    std::ostringstream os;
    os << kMagic << "\n";
    os << "iteration " << iteration << "\n";
    os << "run_seed " << run_seed << "\n";
    for (const auto& [k, v] : config.to_kv()) os << "config." << k << " " << v << "\n";
    for (const Entry& e : entries) {
        os << "tensor " << e.name << " " << e.shape.size();
        for (int d : e.shape) os << " " << d;
        os << " " << e.byte_offset << " " << e.count << "\n";
    }
    return os.str();
}

void save_checkpoint(const std::string& path, const Model& model, const RmsProp& opt,
                     long iteration, std::uint64_t run_seed) {
    Checkpoint ck;
    ck.config = model.config();
    ck.iteration = iteration;
    ck.run_seed = run_seed;
    const ParameterStore& store = model.params();
    for (size_t i = 0; i < store.size(); ++i) {
        append_entry(ck.entries, ck.blob, "param/" + store[i].name, store[i].value);
    }
    for (size_t i = 0; i < store.size(); ++i) {
        append_entry(ck.entries, ck.blob, "ms/" + store[i].name, opt.mean_square()[i]);
    }
    for (size_t i = 0; i < store.size(); ++i) {
        append_entry(ck.entries, ck.blob, "mom/" + store[i].name, opt.momentum_buf()[i]);
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os << ck.manifest_text() << kBlobMarker << "\n";
    os.write(reinterpret_cast<const char*>(ck.blob.data()),
             static_cast<std::streamsize>(ck.blob.size() * sizeof(double)));
    if (!os) throw std::runtime_error("write failed for " + path);
}

Checkpoint Checkpoint::read(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);

    Checkpoint ck;
    std::map<std::string, std::string> config_kv;
    std::string line;
    if (!std::getline(is, line) || line != kMagic) {
        throw std::runtime_error(path + ": not a checkpoint file");
    }
    while (std::getline(is, line)) {
        if (line == kBlobMarker) break;
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "iteration") {
            ls >> ck.iteration;
        } else if (key == "run_seed") {
            ls >> ck.run_seed;
        } else if (key.rfind("config.", 0) == 0) {
            std::string value;
            ls >> value;
            config_kv[key.substr(7)] = value;
        } else if (key == "tensor") {
            Entry e;
            size_t rank = 0;
            ls >> e.name >> rank;
            e.shape.resize(rank);
            for (size_t i = 0; i < rank; ++i) ls >> e.shape[i];
            ls >> e.byte_offset >> e.count;
            if (!ls) throw std::runtime_error(path + ": malformed tensor line");
            ck.entries.push_back(std::move(e));
        } else {
            throw std::runtime_error(path + ": unknown manifest key '" + key + "'");
        }
    }
    ck.config = ModelConfig::from_kv(config_kv);

    long total = 0;
    for (const Entry& e : ck.entries) total += e.count;
    ck.blob.resize(static_cast<size_t>(total));
    is.read(reinterpret_cast<char*>(ck.blob.data()),
            static_cast<std::streamsize>(ck.blob.size() * sizeof(double)));
    if (is.gcount() != static_cast<std::streamsize>(ck.blob.size() * sizeof(double))) {
        throw std::runtime_error(path + ": truncated blob");
    }
    return ck;
}

void Checkpoint::apply(Model& model, RmsProp& opt) const {
    ParameterStore& store = model.params();
    auto restore = [this](const std::string& name, Tensor& dst) {
        for (const Entry& e : entries) {
            if (e.name != name) continue;
            if (e.shape != dst.shape() || e.count != dst.numel()) {
                throw std::runtime_error("checkpoint entry " + name + " has shape " +
                                         shape_str(e.shape) + ", expected " + dst.shape_string());
            }
            const size_t start = e.byte_offset / sizeof(double);
            for (long i = 0; i < e.count; ++i) dst[i] = blob[start + static_cast<size_t>(i)];
            return;
        }
        throw std::runtime_error("checkpoint missing entry " + name);
    };
    for (size_t i = 0; i < store.size(); ++i) {
        restore("param/" + store[i].name, store[i].value);
        restore("ms/" + store[i].name, opt.mean_square()[i]);
        restore("mom/" + store[i].name, opt.momentum_buf()[i]);
    }
}

} // namespace ntmlab
