#include "framerec/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace framerec {

void validate_mesh(const Mesh& mesh) {
    const int nv = static_cast<int>(mesh.num_vertices());
    for (Eigen::Index f = 0; f < mesh.num_faces(); ++f) {
        const int a = mesh.faces(f, 0), b = mesh.faces(f, 1), c = mesh.faces(f, 2);
        if (a < 0 || a >= nv || b < 0 || b >= nv || c < 0 || c >= nv)
            throw std::invalid_argument("face " + std::to_string(f) +
                                        " references vertex out of range");
        if (a == b || b == c || a == c)
            throw std::invalid_argument("face " + std::to_string(f) +
                                        " repeats a vertex index");
    }
}

Mesh load_obj(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open OBJ file: " + path);

    std::vector<Vec3> verts;
    std::vector<Eigen::Vector3i> faces;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "v") {
            double x, y, z;
            if (!(ls >> x >> y >> z))
                throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                         ": malformed vertex record");
            verts.emplace_back(x, y, z);
        } else if (tag == "f") {
            std::vector<long> idx;
            std::string tok;
            while (ls >> tok) {
                // accept "i", "i/t", "i/t/n"
                const size_t slash = tok.find('/');
                const std::string head = slash == std::string::npos ? tok : tok.substr(0, slash);
                size_t pos = 0;
                long i;
                try {
                    i = std::stol(head, &pos);
                } catch (const std::exception&) {
                    throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                             ": malformed face record");
                }
                if (pos != head.size())
                    throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                             ": malformed face record");
                idx.push_back(i);
            }
            if (idx.size() != 3)
                throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                         ": non-triangular face");
            Eigen::Vector3i f;
            for (int k = 0; k < 3; ++k) {
                long i = idx[k];
                if (i < 0) i = static_cast<long>(verts.size()) + 1 + i;  // OBJ negative refs
                f[k] = static_cast<int>(i - 1);
            }
            faces.push_back(f);
        }
        // normals, texcoords, groups etc. ignored
    }

    Mesh mesh;
    mesh.vertices.resize(static_cast<Eigen::Index>(verts.size()), 3);
    for (size_t i = 0; i < verts.size(); ++i) mesh.vertices.row(i) = verts[i];
    mesh.faces.resize(static_cast<Eigen::Index>(faces.size()), 3);
    for (size_t i = 0; i < faces.size(); ++i) mesh.faces.row(i) = faces[i];
    validate_mesh(mesh);
    return mesh;
}

void save_obj(const Mesh& mesh, const std::string& path) {
    validate_mesh(mesh);
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    for (Eigen::Index i = 0; i < mesh.num_vertices(); ++i)
        std::fprintf(f, "v %.9f %.9f %.9f\n", mesh.vertices(i, 0), mesh.vertices(i, 1),
                     mesh.vertices(i, 2));
    for (Eigen::Index i = 0; i < mesh.num_faces(); ++i)
        std::fprintf(f, "f %d %d %d\n", mesh.faces(i, 0) + 1, mesh.faces(i, 1) + 1,
                     mesh.faces(i, 2) + 1);
    if (std::fclose(f) != 0) throw std::runtime_error("write failure: " + path);
}

double bbox_diagonal(const Mesh& mesh) {
    if (mesh.num_vertices() == 0) throw std::invalid_argument("bbox_diagonal: empty mesh");
    const Vec3 lo = mesh.vertices.colwise().minCoeff();
    const Vec3 hi = mesh.vertices.colwise().maxCoeff();
    return (hi - lo).norm();
}

AdjacencyTable vertex_adjacency(const Mesh& mesh) {
    validate_mesh(mesh);
    AdjacencyTable adj(static_cast<size_t>(mesh.num_vertices()));
    for (Eigen::Index f = 0; f < mesh.num_faces(); ++f) {
        const int v[3] = {mesh.faces(f, 0), mesh.faces(f, 1), mesh.faces(f, 2)};
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                if (a != b) adj[static_cast<size_t>(v[a])].push_back(v[b]);
    }
    for (auto& n : adj) {
        std::sort(n.begin(), n.end());
        n.erase(std::unique(n.begin(), n.end()), n.end());
    }
    return adj;
}

bool same_topology(const Mesh& a, const Mesh& b) {
    return a.num_vertices() == b.num_vertices() && a.faces.rows() == b.faces.rows() &&
           a.faces == b.faces;
}

}  // namespace framerec
