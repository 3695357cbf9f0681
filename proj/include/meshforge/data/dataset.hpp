#pragma once

#include "meshforge/data/crafted.hpp"
#include "meshforge/data/delaunay.hpp"
#include "meshforge/data/surfaces.hpp"
#include "meshforge/mesh/io.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace meshforge {

enum class DatasetKind { Delaunay2d, Crafted, Sphere, Torus, Saddle };

inline DatasetKind dataset_kind_from_string(const std::string& s) {
    if (s == "delaunay2d") return DatasetKind::Delaunay2d;
    if (s == "crafted") return DatasetKind::Crafted;
    if (s == "sphere") return DatasetKind::Sphere;
    if (s == "torus") return DatasetKind::Torus;
    if (s == "saddle") return DatasetKind::Saddle;
    throw std::invalid_argument("unknown dataset kind '" + s + "'");
}

inline std::string to_string(DatasetKind k) {
    switch (k) {
        case DatasetKind::Delaunay2d: return "delaunay2d";
        case DatasetKind::Crafted: return "crafted";
        case DatasetKind::Sphere: return "sphere";
        case DatasetKind::Torus: return "torus";
        case DatasetKind::Saddle: return "saddle";
    }
    return "?";
}

inline bool is_surface(DatasetKind k) { return k == DatasetKind::Sphere || k == DatasetKind::Torus || k == DatasetKind::Saddle; }

inline SurfaceKind surface_of(DatasetKind k) {
    switch (k) {
        case DatasetKind::Sphere: return SurfaceKind::Sphere;
        case DatasetKind::Torus: return SurfaceKind::Torus;
        case DatasetKind::Saddle: return SurfaceKind::Saddle;
        default: throw std::invalid_argument("not a surface dataset");
    }
}

struct DatasetOptions {
    DatasetKind kind = DatasetKind::Delaunay2d;
    int meshes = 20;
    /// Interior points per 2D mesh; grid resolution for surfaces.
    int points = 500;
    /// Surface jitter as a fraction of the grid spacing.
    double jitter = 0.3;
    /// Crafted meshes: high-degree nodes planted per mesh (0 = points / 50).
    int targets = 0;
    std::uint64_t seed = 0;
};

struct Dataset {
    std::vector<TriMesh> meshes;
    /// Crafted kind only: planted high-degree nodes per mesh.
    std::vector<std::vector<Index>> targets;
    nlohmann::json manifest;

    std::shared_ptr<const std::vector<TriMesh>> shared() const {
        return std::make_shared<const std::vector<TriMesh>>(meshes);
    }
};

inline std::string mesh_file_name(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "mesh_%03zu.off", i);
    return buf;
}

/// Mesh k is generated from derive_seed(seed, k), so datasets of different
/// sizes share their leading meshes.
inline Dataset generate_dataset(const DatasetOptions& opt) {
    if (opt.meshes < 1) throw std::invalid_argument("dataset needs at least one mesh");
    if (opt.points < 1) throw std::invalid_argument("points must be positive");
    if (is_surface(opt.kind) && opt.points < 8) throw std::invalid_argument("surface resolution must be at least 8");
    if (opt.jitter < 0) throw std::invalid_argument("jitter must be non-negative");
    Dataset d;
    std::size_t nodes = 0, interior = 0, tris = 0;
    double drift = 0.0;
    nlohmann::json files = nlohmann::json::array();
    for (int k = 0; k < opt.meshes; ++k) {
        const std::uint64_t s = derive_seed(opt.seed, static_cast<std::uint64_t>(k));
        nlohmann::json entry{{"file", mesh_file_name(static_cast<std::size_t>(k))}};
        switch (opt.kind) {
            case DatasetKind::Delaunay2d: d.meshes.push_back(delaunay_mesh(opt.points, s)); break;
            case DatasetKind::Crafted: {
                auto c = crafted_mesh(opt.points, opt.targets > 0 ? opt.targets : std::max(1, opt.points / 50), s);
                d.meshes.push_back(std::move(c.mesh));
                entry["targets"] = c.targets;
                d.targets.push_back(std::move(c.targets));
                break;
            }
            default: {
                d.meshes.push_back(analytic_surface_mesh(surface_of(opt.kind), opt.points, opt.jitter, s));
                const double dr = surface_drift(surface_of(opt.kind), d.meshes.back());
                entry["drift"] = dr;
                drift = std::max(drift, dr);
            }
        }
        const TriMesh& m = d.meshes.back();
        entry["nodes"] = m.node_count();
        entry["triangles"] = m.triangle_count();
        nodes += m.node_count();
        interior += m.interior_nodes().size();
        tris += m.triangle_count();
        files.push_back(std::move(entry));
    }
    d.manifest = {{"format", 1},
                  {"kind", to_string(opt.kind)},
                  {"seed", opt.seed},
                  {"meshes", opt.meshes},
                  {"points", opt.points},
                  {"nodes", nodes},
                  {"interior_nodes", interior},
                  {"triangles", tris},
                  {"files", files}};
    if (is_surface(opt.kind)) {
        d.manifest["jitter"] = opt.jitter;
        d.manifest["drift"] = drift;
    }
    return d;
}

/// Desk-scale training set: random Delaunay meshes of the unit square.
inline std::vector<TriMesh> build_training_set(int n_meshes = 20, int points_per_mesh = 500, std::uint64_t seed = 0) {
    DatasetOptions o;
    o.meshes = n_meshes;
    o.points = points_per_mesh;
    o.seed = seed;
    return generate_dataset(o).meshes;
}

/// Writes mesh_###.off files and manifest.json. An existing non-empty
/// directory is refused unless `force` is set.
inline void save_dataset(const Dataset& d, const std::filesystem::path& dir, bool force = false) {
    namespace fs = std::filesystem;
    if (fs::exists(dir) && !fs::is_directory(dir)) throw std::invalid_argument(dir.string() + " is not a directory");
    if (fs::exists(dir) && !fs::is_empty(dir) && !force) {
        throw std::invalid_argument(dir.string() + " is not empty (use --force to overwrite)");
    }
    fs::create_directories(dir);
    for (std::size_t i = 0; i < d.meshes.size(); ++i) save_mesh(d.meshes[i], dir / mesh_file_name(i));
    std::ofstream out(dir / "manifest.json");
    out << d.manifest.dump(2) << '\n';
    if (!out) throw std::runtime_error("cannot write " + (dir / "manifest.json").string());
}

inline Dataset load_dataset(const std::filesystem::path& dir) {
    std::ifstream in(dir / "manifest.json");
    if (!in) throw std::invalid_argument("no manifest.json in " + dir.string());
    Dataset d;
    try {
        d.manifest = nlohmann::json::parse(in);
        for (const auto& f : d.manifest.at("files")) {
            d.meshes.push_back(load_mesh(dir / f.at("file").get<std::string>()));
            if (f.contains("targets")) d.targets.push_back(f["targets"].get<std::vector<Index>>());
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("bad manifest in " + dir.string() + ": " + e.what());
    }
    if (d.meshes.empty()) throw std::invalid_argument("dataset " + dir.string() + " lists no meshes");
    return d;
}

}  // namespace meshforge
