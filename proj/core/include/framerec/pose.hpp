#pragma once

#include <optional>

#include "framerec/adam.hpp"
#include "framerec/camera.hpp"
#include "framerec/keypoints.hpp"
#include "framerec/template_builder.hpp"

namespace framerec {

struct PoseEstimate {
    Camera camera;
    double final_reproj_error = 0.0;
    int iterations = 0;
    bool converged = false;
    /// Loss gap between the best and second-best multi-start run;
    /// small values flag mirror-pose ambiguity.
    double multistart_gap = 0.0;
};

/// Projects the 42 keypoint vertices of the template (or of a deformed
/// vertex array with the same topology). Behind-camera keypoints are
/// flagged invisible.
Keypoints2D proj_keypoints(const Camera& cam, const TemplateModel& tmpl,
                           const Eigen::MatrixX3d* deformed_vertices = nullptr);

/// Sum over visible keypoints of squared normalized-coordinate distance.
double reproj_loss(const Camera& cam, const TemplateModel& tmpl,
                   const Keypoints2D& observed);

/// Gradient of reproj_loss w.r.t. the 6 pose parameters
/// (position x,y,z then rotation vector), analytic.
Eigen::Matrix<double, 6, 1> reproj_loss_grad(const Camera& cam, const TemplateModel& tmpl,
                                             const Keypoints2D& observed, double* loss = nullptr);

/// Multi-start Adam minimization of the reprojection error over the 6
/// extrinsic parameters; intrinsics stay fixed at `fov_deg`.
PoseEstimate estimate_pose(const TemplateModel& tmpl, const Keypoints2D& observed,
                           const OptimConfig& config, double fov_deg = 30.0,
                           int width = 1024, int height = 1024);

}  // namespace framerec
