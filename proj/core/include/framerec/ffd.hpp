#pragma once

#include <Eigen/Core>
#include <array>
#include <string>

#include "framerec/mesh.hpp"

namespace framerec {

/// Bernstein basis polynomial C(n,i) x^i (1-x)^(n-i).
double bernstein(int index, int degree, double x);

/// Trivariate Bernstein FFD lattice built around a mesh. Control
/// points and the deformation field use lattice-grid order with k
/// fastest, then j, then i: flat = (i*(m+1) + j)*(n+1) + k.
struct FfdLattice {
    std::array<int, 3> dims{9, 7, 4};  // l, m, n segment counts
    Vec3 origin = Vec3::Zero();
    Eigen::Matrix3d axes = Eigen::Matrix3d::Identity();  // columns u, v, w (full box extents)
    double padding = 0.05;
    Eigen::MatrixX3d control_points;  // n_c x 3
    Eigen::MatrixXd basis;            // n_v x n_c, rows sum to 1

    int num_control_points() const {
        return (dims[0] + 1) * (dims[1] + 1) * (dims[2] + 1);
    }
    int flat_index(int i, int j, int k) const {
        return (i * (dims[1] + 1) + j) * (dims[2] + 1) + k;
    }
};

/// Control-point displacements, lattice-grid order, millimeters.
using DeformationField = Eigen::MatrixX3d;

/// Axis-aligned lattice box = mesh bounding box inflated by `padding`
/// per side. Throws on a degenerate bounding box.
FfdLattice build_lattice(const Mesh& mesh, const std::array<int, 3>& dims,
                         double padding = 0.05);

/// B (P + Delta); rows are deformed vertex positions.
Eigen::MatrixX3d deform(const FfdLattice& lattice, const DeformationField& delta);

/// Transpose pullback: exact gradient of deform w.r.t. Delta.
DeformationField backprop_delta(const FfdLattice& lattice,
                                const Eigen::MatrixX3d& grad_vertices);

/// Serializes {dims, origin, axes, padding}; the basis is rebuilt
/// against a mesh on load.
void save_lattice(const FfdLattice& lattice, const std::string& path);
FfdLattice load_lattice(const std::string& path, const Mesh& mesh);

void save_delta(const DeformationField& delta, const std::string& path);
DeformationField load_delta(const std::string& path);

}  // namespace framerec
