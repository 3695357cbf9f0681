#pragma once

#include "meshforge/mesh/patch.hpp"
#include "meshforge/nn/tensor.hpp"

#include <memory>
#include <utility>
#include <vector>

namespace meshforge::nn {

/// Network input for one patch: normalized coordinates (row 0 is the free
/// node) and the undirected local edges. Compact enough for replay storage.
struct Observation {
    int dim = 2;
    std::vector<double> coords;  // rows x dim, row-major
    std::vector<std::pair<int, int>> edges;

    int rows() const { return dim > 0 ? static_cast<int>(coords.size()) / dim : 0; }
};

inline Observation observe(const NodePatch& p) {
    Observation o;
    o.dim = p.dim;
    // center first, then ring order
    std::vector<int> order;
    order.push_back(p.center_index);
    for (int i = 0; i < static_cast<int>(p.size()); ++i) {
        if (i != p.center_index) order.push_back(i);
    }
    std::vector<int> where(p.size());
    for (std::size_t r = 0; r < order.size(); ++r) where[static_cast<std::size_t>(order[r])] = static_cast<int>(r);
    o.coords.reserve(p.size() * static_cast<std::size_t>(p.dim));
    for (int i : order) {
        for (int c = 0; c < p.dim; ++c) o.coords.push_back(p.coords[static_cast<std::size_t>(i)][c]);
    }
    for (auto [a, b] : p.edges()) o.edges.emplace_back(where[static_cast<std::size_t>(a)], where[static_cast<std::size_t>(b)]);
    return o;
}

/// Several observations stacked row-wise.
struct GraphBatch {
    int dim = 2;
    Matrix<double> features;
    std::vector<int> offsets;  // patch p owns rows [offsets[p], offsets[p+1])
    std::vector<int> centers;
    std::shared_ptr<std::vector<int>> nbr_offsets, nbr_index;
    std::shared_ptr<std::vector<int>> glob_offsets, glob_index;
    /// Ring rows per patch, grouped by `ring_offsets`.
    std::vector<int> ring_offsets, ring_rows;

    int patches() const { return static_cast<int>(centers.size()); }
    int rows() const { return offsets.empty() ? 0 : offsets.back(); }
};

inline GraphBatch make_batch(const std::vector<const Observation*>& obs) {
    if (obs.empty()) throw ShapeError("empty batch");
    GraphBatch g;
    g.dim = obs.front()->dim;
    int total = 0;
    g.offsets.push_back(0);
    for (const Observation* o : obs) {
        if (o->dim != g.dim) throw ShapeError("mixed dimensions in batch");
        total += o->rows();
        g.offsets.push_back(total);
    }
    g.features.resize(total, g.dim);
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(total));
    g.nbr_offsets = std::make_shared<std::vector<int>>();
    g.nbr_index = std::make_shared<std::vector<int>>();
    g.glob_offsets = std::make_shared<std::vector<int>>();
    g.glob_index = std::make_shared<std::vector<int>>();
    g.ring_offsets.push_back(0);
    for (std::size_t p = 0; p < obs.size(); ++p) {
        const Observation& o = *obs[p];
        const int base = g.offsets[p];
        const int n = o.rows();
        for (int r = 0; r < n; ++r) {
            for (int c = 0; c < g.dim; ++c) {
                g.features(base + r, c) = o.coords[static_cast<std::size_t>(r * g.dim + c)];
            }
        }
        for (auto [a, b] : o.edges) {
            adj[static_cast<std::size_t>(base + a)].push_back(base + b);
            adj[static_cast<std::size_t>(base + b)].push_back(base + a);
        }
        g.centers.push_back(base);
        for (int r = 1; r < n; ++r) g.ring_rows.push_back(base + r);
        g.ring_offsets.push_back(static_cast<int>(g.ring_rows.size()));
    }
    g.nbr_offsets->push_back(0);
    g.glob_offsets->push_back(0);
    for (std::size_t p = 0; p < obs.size(); ++p) {
        for (int r = g.offsets[p]; r < g.offsets[p + 1]; ++r) {
            auto& a = adj[static_cast<std::size_t>(r)];
            std::sort(a.begin(), a.end());
            g.nbr_index->insert(g.nbr_index->end(), a.begin(), a.end());
            g.nbr_offsets->push_back(static_cast<int>(g.nbr_index->size()));
            for (int j = g.offsets[p]; j < g.offsets[p + 1]; ++j) g.glob_index->push_back(j);
            g.glob_offsets->push_back(static_cast<int>(g.glob_index->size()));
        }
    }
    return g;
}

inline GraphBatch make_batch(const Observation& o) { return make_batch(std::vector<const Observation*>{&o}); }

}  // namespace meshforge::nn
