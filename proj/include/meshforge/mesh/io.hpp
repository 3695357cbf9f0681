#pragma once

#include "meshforge/mesh/tri_mesh.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

namespace meshforge {

enum class MeshFormat { OFF, OBJ };

class ParseError : public MeshError {
public:
    ParseError(const std::string& file, std::size_t line, const std::string& what)
        : MeshError(file + ":" + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

inline MeshFormat format_from_path(const std::filesystem::path& p) {
    auto ext = p.extension().string();
    for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (ext == ".obj") return MeshFormat::OBJ;
    if (ext == ".off") return MeshFormat::OFF;
    throw MeshError("cannot infer mesh format from '" + p.string() + "' (expected .off or .obj)");
}

namespace detail {

// A mesh is planar when every z coordinate is exactly zero.
inline int infer_dim(const std::vector<Vec3>& nodes) {
    for (const Vec3& x : nodes) {
        if (x.z() != 0.0) return 3;
    }
    return 2;
}

inline TriMesh finish(const std::string& name, std::vector<Vec3> nodes, std::vector<Tri> tris,
                      const std::vector<std::size_t>& face_lines) {
    const auto n = static_cast<Index>(nodes.size());
    for (std::size_t t = 0; t < tris.size(); ++t) {
        for (Index v : tris[t]) {
            if (v < 0 || v >= n) {
                throw ParseError(name, face_lines[t], "face index " + std::to_string(v) + " out of range");
            }
        }
    }
    const int dim = infer_dim(nodes);
    return TriMesh(dim, std::move(nodes), std::move(tris));
}

// Next non-empty, non-comment line; false at end of input.
inline bool next_line(std::istream& in, std::string& line, std::size_t& lineno) {
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
}

inline TriMesh read_off(std::istream& in, const std::string& name) {
    std::string line;
    std::size_t lineno = 0;
    if (!next_line(in, line, lineno)) throw ParseError(name, lineno, "empty file");
    std::istringstream hs(line);
    std::string magic;
    hs >> magic;
    if (magic != "OFF") throw ParseError(name, lineno, "missing OFF header");
    long nv = -1, nf = -1, ne = 0;
    if (!(hs >> nv)) {
        if (!next_line(in, line, lineno)) throw ParseError(name, lineno, "missing element counts");
        hs = std::istringstream(line);
        hs >> nv;
    }
    if (!(hs >> nf) || nv < 0 || nf < 0) throw ParseError(name, lineno, "malformed element counts");
    hs >> ne;

    std::vector<Vec3> nodes;
    nodes.reserve(static_cast<std::size_t>(nv));
    for (long i = 0; i < nv; ++i) {
        if (!next_line(in, line, lineno)) throw ParseError(name, lineno, "unexpected end of file in vertices");
        std::istringstream ls(line);
        double x = 0, y = 0, z = 0;
        if (!(ls >> x >> y)) throw ParseError(name, lineno, "malformed vertex");
        if (!(ls >> z)) z = 0.0;
        nodes.emplace_back(x, y, z);
    }
    std::vector<Tri> tris;
    std::vector<std::size_t> lines;
    for (long i = 0; i < nf; ++i) {
        if (!next_line(in, line, lineno)) throw ParseError(name, lineno, "unexpected end of file in faces");
        std::istringstream ls(line);
        long k = 0;
        if (!(ls >> k)) throw ParseError(name, lineno, "malformed face");
        if (k != 3) throw ParseError(name, lineno, "non-triangular face (" + std::to_string(k) + " vertices)");
        long a, b, c;
        if (!(ls >> a >> b >> c)) throw ParseError(name, lineno, "malformed face");
        tris.push_back({static_cast<Index>(a), static_cast<Index>(b), static_cast<Index>(c)});
        lines.push_back(lineno);
    }
    return finish(name, std::move(nodes), std::move(tris), lines);
}

inline TriMesh read_obj(std::istream& in, const std::string& name) {
    std::string line;
    std::size_t lineno = 0;
    std::vector<Vec3> nodes;
    std::vector<Tri> tris;
    std::vector<std::size_t> lines;
    while (next_line(in, line, lineno)) {
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "v") {
            double x = 0, y = 0, z = 0;
            if (!(ls >> x >> y)) throw ParseError(name, lineno, "malformed vertex");
            if (!(ls >> z)) z = 0.0;
            nodes.emplace_back(x, y, z);
        } else if (tag == "f") {
            std::vector<long> idx;
            std::string tok;
            while (ls >> tok) {
                // "7/2/3" style references keep only the vertex index
                const auto slash = tok.find('/');
                try {
                    idx.push_back(std::stol(tok.substr(0, slash)));
                } catch (const std::exception&) {
                    throw ParseError(name, lineno, "malformed face index '" + tok + "'");
                }
            }
            if (idx.size() != 3) {
                throw ParseError(name, lineno, "non-triangular face (" + std::to_string(idx.size()) + " vertices)");
            }
            Tri t{};
            for (int k = 0; k < 3; ++k) {
                const long v = idx[static_cast<std::size_t>(k)];
                // negative indices are relative to the vertices read so far
                t[static_cast<std::size_t>(k)] =
                    static_cast<Index>(v > 0 ? v - 1 : (v < 0 ? static_cast<long>(nodes.size()) + v : -1));
            }
            tris.push_back(t);
            lines.push_back(lineno);
        }
        // vt, vn, g, o, s, usemtl and friends are ignored
    }
    return finish(name, std::move(nodes), std::move(tris), lines);
}

}  // namespace detail

inline TriMesh read_mesh(std::istream& in, MeshFormat fmt, const std::string& name = "<stream>") {
    return fmt == MeshFormat::OFF ? detail::read_off(in, name) : detail::read_obj(in, name);
}

inline void write_mesh(std::ostream& out, const TriMesh& mesh, MeshFormat fmt) {
    out << std::setprecision(9);
    if (fmt == MeshFormat::OFF) {
        out << "OFF\n" << mesh.node_count() << ' ' << mesh.triangle_count() << " 0\n";
        for (const Vec3& x : mesh.nodes()) out << x.x() << ' ' << x.y() << ' ' << x.z() << '\n';
        for (const Tri& t : mesh.triangles()) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    } else {
        for (const Vec3& x : mesh.nodes()) out << "v " << x.x() << ' ' << x.y() << ' ' << x.z() << '\n';
        for (const Tri& t : mesh.triangles()) out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
    }
}

inline TriMesh load_mesh(const std::filesystem::path& path, MeshFormat fmt) {
    std::ifstream in(path);
    if (!in) throw MeshError("cannot open '" + path.string() + "'");
    return read_mesh(in, fmt, path.string());
}

inline TriMesh load_mesh(const std::filesystem::path& path) { return load_mesh(path, format_from_path(path)); }

inline void save_mesh(const TriMesh& mesh, const std::filesystem::path& path, MeshFormat fmt) {
    std::ofstream out(path);
    if (!out) throw MeshError("cannot write '" + path.string() + "'");
    write_mesh(out, mesh, fmt);
    if (!out) throw MeshError("write failed for '" + path.string() + "'");
}

inline void save_mesh(const TriMesh& mesh, const std::filesystem::path& path) {
    save_mesh(mesh, path, format_from_path(path));
}

}  // namespace meshforge
