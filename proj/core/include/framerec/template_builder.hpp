#pragma once

#include <cstdint>
#include <vector>

#include "framerec/keypoints.hpp"
#include "framerec/mesh.hpp"

namespace framerec {

struct TemplateModel {
    Mesh mesh;
    KeypointSpec keypoints;
    std::uint64_t dataset_hash = 0;
    int iterations = 0;
};

/// Euclidean norm of the stacked vertex-difference vector in R^{3 n_v}.
double mesh_dist(const Mesh& a, const Mesh& b);

Mesh arithmetic_mean(const std::vector<Mesh>& dataset);

/// Weiszfeld is undefined at sample points; a step whose current
/// iterate coincides with a member (distance <= this) signals the
/// caller to stop via CoincidentWithSample.
inline constexpr double kCoincidenceGuard = 1e-9;

struct CoincidentWithSample {
    int member_index;
};

/// One inverse-distance-weighted averaging step. Throws
/// CoincidentWithSample when the iterate sits on a dataset member.
Mesh weiszfeld_step(const Mesh& current, const std::vector<Mesh>& dataset);

/// Mean stacked-vector distance objective being minimized.
double median_objective(const Mesh& candidate, const std::vector<Mesh>& dataset);

TemplateModel build_template(const std::vector<Mesh>& dataset, const KeypointSpec& spec,
                             double tol, int max_iter);

/// Defaults: tol = 1e-6 * bbox diagonal of the mean, max_iter = 200.
TemplateModel build_template(const std::vector<Mesh>& dataset, const KeypointSpec& spec);

std::uint64_t dataset_hash(const std::vector<Mesh>& dataset);

}  // namespace framerec
