#pragma once

#include <string>
#include <vector>

#include "framerec/adam.hpp"
#include "framerec/ffd.hpp"
#include "framerec/losses.hpp"
#include "framerec/pose.hpp"

namespace framerec {

struct IterationRecord {
    int iteration = 0;
    LossParts parts;
    double total = 0.0;
    double gamma_px = 0.0;
};

struct ReconstructionResult {
    Mesh mesh;  // deformed template, template topology
    DeformationField delta;
    std::vector<IterationRecord> loss_history;
    PoseEstimate pose;
};

/// The online loop: estimate pose once and freeze it, then iterate
/// deform -> soft render -> total loss -> pullback to the deformation
/// field -> Adam update, with the gamma schedule from `config`.
ReconstructionResult reconstruct(const Image& image, const Keypoints2D& observed_kp,
                                 const TemplateModel& tmpl, const FfdLattice& lattice,
                                 const LossWeights& weights, const OptimConfig& config,
                                 const Camera* fixed_pose = nullptr,
                                 double fov_deg = 30.0);

/// Pose-estimation defaults (lr 1e-3, 2000 iterations).
OptimConfig default_pose_config();

/// Deformer defaults (lr 1e-3, 500 iterations, 1.5/0.75/0.375 px
/// gamma annealing at 0/40/80% of the budget).
OptimConfig default_deform_config();

void save_history(const std::vector<IterationRecord>& history, const std::string& path);

}  // namespace framerec
