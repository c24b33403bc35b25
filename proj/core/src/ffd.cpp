#include "framerec/ffd.hpp"

#include <Eigen/LU>

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace framerec {

double bernstein(int index, int degree, double x) {
    if (index < 0 || index > degree)
        throw std::invalid_argument("bernstein: index out of range");
    double binom = 1.0;
    for (int i = 0; i < index; ++i)
        binom = binom * (degree - i) / (i + 1);
    // 0^0 = 1 at the endpoints
    const double xa = index == 0 ? 1.0 : std::pow(x, index);
    const double xb = degree - index == 0 ? 1.0 : std::pow(1.0 - x, degree - index);
    return binom * xa * xb;
}

namespace {

Eigen::MatrixXd basis_for(const FfdLattice& lat, const Eigen::MatrixX3d& vertices) {
    const int l = lat.dims[0], m = lat.dims[1], n = lat.dims[2];
    Eigen::MatrixXd basis(vertices.rows(), lat.num_control_points());
    std::vector<double> bu(l + 1), bv(m + 1), bw(n + 1);
    const Eigen::Matrix3d to_local = lat.axes.inverse();
    for (Eigen::Index row = 0; row < vertices.rows(); ++row) {
        // lattice coordinates of the vertex; axes columns are the box extents
        const Vec3 local = to_local * (vertices.row(row).transpose() - lat.origin);
        for (int i = 0; i <= l; ++i) bu[i] = bernstein(i, l, local.x());
        for (int j = 0; j <= m; ++j) bv[j] = bernstein(j, m, local.y());
        for (int k = 0; k <= n; ++k) bw[k] = bernstein(k, n, local.z());
        for (int i = 0; i <= l; ++i)
            for (int j = 0; j <= m; ++j)
                for (int k = 0; k <= n; ++k)
                    basis(row, lat.flat_index(i, j, k)) = bu[i] * bv[j] * bw[k];
    }
    return basis;
}

void fill_control_points(FfdLattice& lat) {
    const int l = lat.dims[0], m = lat.dims[1], n = lat.dims[2];
    lat.control_points.resize(lat.num_control_points(), 3);
    for (int i = 0; i <= l; ++i)
        for (int j = 0; j <= m; ++j)
            for (int k = 0; k <= n; ++k) {
                const Vec3 local(static_cast<double>(i) / l, static_cast<double>(j) / m,
                                 static_cast<double>(k) / n);
                lat.control_points.row(lat.flat_index(i, j, k)) =
                    (lat.origin + lat.axes * local).transpose();
            }
}

}  // namespace

FfdLattice build_lattice(const Mesh& mesh, const std::array<int, 3>& dims, double padding) {
    if (dims[0] < 1 || dims[1] < 1 || dims[2] < 1)
        throw std::invalid_argument("lattice dims must each be >= 1");
    const Vec3 lo = mesh.vertices.colwise().minCoeff();
    const Vec3 hi = mesh.vertices.colwise().maxCoeff();
    const Vec3 extent = hi - lo;
    if (extent.minCoeff() <= 0)
        throw std::invalid_argument("degenerate bounding box: zero extent on an axis");

    FfdLattice lat;
    lat.dims = dims;
    lat.padding = padding;
    lat.origin = lo - padding * extent;
    lat.axes = ((1.0 + 2.0 * padding) * extent).asDiagonal();
    fill_control_points(lat);
    lat.basis = basis_for(lat, mesh.vertices);
    return lat;
}

Eigen::MatrixX3d deform(const FfdLattice& lattice, const DeformationField& delta) {
    if (delta.rows() != lattice.control_points.rows())
        throw std::invalid_argument("deformation field size mismatch");
    return lattice.basis * (lattice.control_points + delta);
}

DeformationField backprop_delta(const FfdLattice& lattice,
                                const Eigen::MatrixX3d& grad_vertices) {
    if (grad_vertices.rows() != lattice.basis.rows())
        throw std::invalid_argument("vertex gradient size mismatch");
    return lattice.basis.transpose() * grad_vertices;
}

void save_lattice(const FfdLattice& lattice, const std::string& path) {
    nlohmann::json j;
    j["dims"] = {lattice.dims[0], lattice.dims[1], lattice.dims[2]};
    j["origin"] = {lattice.origin.x(), lattice.origin.y(), lattice.origin.z()};
    auto& ax = j["axes"] = nlohmann::json::array();
    for (int c = 0; c < 3; ++c)
        ax.push_back({lattice.axes(0, c), lattice.axes(1, c), lattice.axes(2, c)});
    j["padding"] = lattice.padding;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write lattice: " + path);
    out << j.dump(2) << "\n";
}

FfdLattice load_lattice(const std::string& path, const Mesh& mesh) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open lattice: " + path);
    nlohmann::json j;
    in >> j;
    FfdLattice lat;
    for (int i = 0; i < 3; ++i) lat.dims[i] = j.at("dims").at(i).get<int>();
    for (int i = 0; i < 3; ++i) lat.origin(i) = j.at("origin").at(i).get<double>();
    for (int c = 0; c < 3; ++c)
        for (int r = 0; r < 3; ++r) lat.axes(r, c) = j.at("axes").at(c).at(r).get<double>();
    lat.padding = j.at("padding").get<double>();
    fill_control_points(lat);
    lat.basis = basis_for(lat, mesh.vertices);
    return lat;
}

void save_delta(const DeformationField& delta, const std::string& path) {
    // flat array, lattice-grid order, k fastest then j then i
    nlohmann::json j = nlohmann::json::array();
    for (Eigen::Index r = 0; r < delta.rows(); ++r)
        for (int c = 0; c < 3; ++c) j.push_back(delta(r, c));
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write delta: " + path);
    out << j.dump() << "\n";
}

DeformationField load_delta(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open delta: " + path);
    nlohmann::json j;
    in >> j;
    if (j.size() % 3 != 0) throw std::runtime_error("delta length must be a multiple of 3");
    DeformationField delta(j.size() / 3, 3);
    for (Eigen::Index r = 0; r < delta.rows(); ++r)
        for (int c = 0; c < 3; ++c) delta(r, c) = j.at(3 * r + c).get<double>();
    return delta;
}

}  // namespace framerec
