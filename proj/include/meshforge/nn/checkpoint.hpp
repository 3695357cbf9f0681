#pragma once

#include "meshforge/nn/layers.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace meshforge::nn {

class CheckpointError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Named f64 tensors plus free-form metadata.
///
/// File layout: "MFPB", u32 version, u64 manifest length, JSON manifest
/// ({"meta":..., "tensors":[{"name","shape","offset"}]}), then the raw
/// little-endian doubles; offsets count bytes from the start of that block.
struct PolicyBundle {
    static constexpr std::uint32_t version = 1;

    nlohmann::json meta = nlohmann::json::object();
    std::map<std::string, Matrix<double>> tensors;

    template <typename S>
    void store(Module<S>& m, const std::string& prefix) {
        for (auto& [name, t] : m.named_tensors(prefix)) tensors[name] = t.value().template cast<double>();
    }

    /// Copies matching tensors into `m`; every tensor of `m` must be present.
    template <typename S>
    void restore(Module<S>& m, const std::string& prefix) const {
        for (auto& [name, t] : m.named_tensors(prefix)) {
            auto it = tensors.find(name);
            if (it == tensors.end()) throw CheckpointError("checkpoint is missing tensor '" + name + "'");
            if (it->second.rows() != t.rows() || it->second.cols() != t.cols()) {
                throw CheckpointError("checkpoint tensor '" + name + "' has the wrong shape");
            }
            t.mutable_value() = it->second.template cast<S>();
        }
    }
};

inline void save_bundle(const std::string& path, const PolicyBundle& b) {
    nlohmann::json manifest;
    manifest["meta"] = b.meta;
    manifest["tensors"] = nlohmann::json::array();
    std::uint64_t offset = 0;
    for (const auto& [name, m] : b.tensors) {
        manifest["tensors"].push_back({{"name", name}, {"shape", {m.rows(), m.cols()}}, {"offset", offset}});
        offset += static_cast<std::uint64_t>(m.size()) * sizeof(double);
    }
    const std::string text = manifest.dump();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CheckpointError("cannot write '" + path + "'");
    out.write("MFPB", 4);
    const std::uint32_t v = PolicyBundle::version;
    const std::uint64_t len = text.size();
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
    out.write(reinterpret_cast<const char*>(&len), sizeof len);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const auto& [name, m] : b.tensors) {
        out.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
    }
    if (!out) throw CheckpointError("failed writing '" + path + "'");
}

inline PolicyBundle load_bundle(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("cannot open '" + path + "'");
    char magic[4];
    std::uint32_t v = 0;
    std::uint64_t len = 0;
    in.read(magic, 4);
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    in.read(reinterpret_cast<char*>(&len), sizeof len);
    if (!in || std::memcmp(magic, "MFPB", 4) != 0) throw CheckpointError("'" + path + "' is not a policy bundle");
    if (v != PolicyBundle::version) throw CheckpointError("unsupported policy bundle version " + std::to_string(v));
    if (len > (1u << 30)) throw CheckpointError("corrupt manifest length");
    std::string text(len, '\0');
    in.read(text.data(), static_cast<std::streamsize>(len));
    const std::streampos data_start = in.tellg();
    PolicyBundle b;
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw CheckpointError(std::string("corrupt manifest: ") + e.what());
    }
    b.meta = manifest.value("meta", nlohmann::json::object());
    for (const auto& t : manifest.at("tensors")) {
        const auto rows = t.at("shape").at(0).get<Eigen::Index>();
        const auto cols = t.at("shape").at(1).get<Eigen::Index>();
        Matrix<double> m(rows, cols);
        in.seekg(data_start + static_cast<std::streamoff>(t.at("offset").get<std::uint64_t>()));
        in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
        if (!in) throw CheckpointError("truncated tensor data in '" + path + "'");
        b.tensors[t.at("name").get<std::string>()] = std::move(m);
    }
    return b;
}

}  // namespace meshforge::nn
