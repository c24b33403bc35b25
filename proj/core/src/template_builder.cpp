#include "framerec/template_builder.hpp"

#include <cmath>
#include <stdexcept>

namespace framerec {

namespace {
void require_same_topology(const Mesh& a, const Mesh& b) {
    if (!same_topology(a, b)) throw std::invalid_argument("meshes differ in topology");
}
}  // namespace

double mesh_dist(const Mesh& a, const Mesh& b) {
    require_same_topology(a, b);
    return (a.vertices - b.vertices).norm();
}

Mesh arithmetic_mean(const std::vector<Mesh>& dataset) {
    if (dataset.empty()) throw std::invalid_argument("arithmetic_mean: empty dataset");
    Mesh mean = dataset.front();
    // fixed index order keeps the sum bit-reproducible
    for (size_t i = 1; i < dataset.size(); ++i) {
        require_same_topology(mean, dataset[i]);
        mean.vertices += dataset[i].vertices;
    }
    mean.vertices /= static_cast<double>(dataset.size());
    return mean;
}

double median_objective(const Mesh& candidate, const std::vector<Mesh>& dataset) {
    if (dataset.empty()) throw std::invalid_argument("median_objective: empty dataset");
    double sum = 0.0;
    for (const Mesh& d : dataset) sum += mesh_dist(candidate, d);
    return sum / static_cast<double>(dataset.size());
}

Mesh weiszfeld_step(const Mesh& current, const std::vector<Mesh>& dataset) {
    if (dataset.empty()) throw std::invalid_argument("weiszfeld_step: empty dataset");
    Eigen::MatrixX3d num = Eigen::MatrixX3d::Zero(current.num_vertices(), 3);
    double den = 0.0;
    for (size_t i = 0; i < dataset.size(); ++i) {
        const double dist = mesh_dist(current, dataset[i]);
        if (dist <= kCoincidenceGuard) throw CoincidentWithSample{static_cast<int>(i)};
        num += dataset[i].vertices / dist;
        den += 1.0 / dist;
    }
    Mesh next = current;
    next.vertices = num / den;
    return next;
}

std::uint64_t dataset_hash(const std::vector<Mesh>& dataset) {
    // FNV-1a over the raw vertex bytes, fixed order
    std::uint64_t h = 1469598103934665603ull;
    const auto mix = [&](const void* data, size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (size_t i = 0; i < n; ++i) {
            h ^= p[i];
            h *= 1099511628211ull;
        }
    };
    for (const Mesh& m : dataset)
        mix(m.vertices.data(), sizeof(double) * static_cast<size_t>(m.vertices.size()));
    return h;
}

TemplateModel build_template(const std::vector<Mesh>& dataset, const KeypointSpec& spec,
                             double tol, int max_iter) {
    if (dataset.empty()) throw std::invalid_argument("build_template: empty dataset");

    TemplateModel tmpl;
    tmpl.mesh = arithmetic_mean(dataset);
    tmpl.keypoints = spec;
    tmpl.dataset_hash = dataset_hash(dataset);
    validate_spec(spec, tmpl.mesh.num_vertices());

    for (int it = 0; it < max_iter; ++it) {
        Mesh next;
        try {
            next = weiszfeld_step(tmpl.mesh, dataset);
        } catch (const CoincidentWithSample&) {
            tmpl.iterations = it;
            return tmpl;
        }
        const double step = mesh_dist(next, tmpl.mesh);
        tmpl.mesh = std::move(next);
        tmpl.iterations = it + 1;
        if (step < tol) break;
    }
    return tmpl;
}

TemplateModel build_template(const std::vector<Mesh>& dataset, const KeypointSpec& spec) {
    const Mesh mean = arithmetic_mean(dataset);
    return build_template(dataset, spec, 1e-6 * bbox_diagonal(mean), 200);
}

}  // namespace framerec
