#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

namespace framerec {

using Vec3 = Eigen::Vector3d;

/// Triangle mesh: n_v x 3 vertex positions (millimeters) and n_f x 3
/// face index triples (0-based).
struct Mesh {
    Eigen::MatrixX3d vertices;
    Eigen::MatrixX3i faces;

    Eigen::Index num_vertices() const { return vertices.rows(); }
    Eigen::Index num_faces() const { return faces.rows(); }
};

/// Per-vertex neighbor lists, sorted ascending, deduplicated.
using AdjacencyTable = std::vector<std::vector<int>>;

/// Throws std::invalid_argument if a face index is out of range or a
/// face repeats a vertex.
void validate_mesh(const Mesh& mesh);

Mesh load_obj(const std::string& path);
void save_obj(const Mesh& mesh, const std::string& path);

/// Length of the axis-aligned bounding-box diagonal.
double bbox_diagonal(const Mesh& mesh);

AdjacencyTable vertex_adjacency(const Mesh& mesh);

bool same_topology(const Mesh& a, const Mesh& b);

}  // namespace framerec
