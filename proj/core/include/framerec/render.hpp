#pragma once

#include <Eigen/Core>
#include <memory>
#include <vector>

#include "framerec/camera.hpp"
#include "framerec/image.hpp"
#include "framerec/mesh.hpp"

namespace framerec {

/// Binary-coverage z-buffered flat-color rasterizer.
Image render_hard(const Camera& cam, const Eigen::MatrixX3d& vertices,
                  const Eigen::MatrixX3i& faces, const Vec3& color, const Vec3& bg);
Image render_hard(const Camera& cam, const Mesh& mesh, const Vec3& color, const Vec3& bg);

/// {0,1} coverage mask, single channel.
Image render_hard_silhouette(const Camera& cam, const Eigen::MatrixX3d& vertices,
                             const Eigen::MatrixX3i& faces);

/// Forward-pass state retained for render_soft_backward.
struct SoftRenderContext {
    Camera cam;
    double gamma_px = 1.5;
    Eigen::MatrixX3i faces;
    // per-vertex screen-space pixel coordinates and projection Jacobians
    std::vector<Eigen::Vector2d> screen;
    std::vector<Eigen::Matrix<double, 2, 3>> dscreen_dworld;
    std::vector<char> vertex_valid;
    // per-pixel transmittance Prod_f (1 - alpha_f)
    std::vector<double> transmittance;
    int width = 0, height = 0;
};

/// Soft silhouette: per-pixel coverage alpha = 1 - Prod_f (1 - sigma(d_f / gamma)),
/// d_f the signed pixel-to-triangle distance in pixels (positive inside).
/// Faces farther than 6*gamma from a pixel are skipped for speed.
Image render_soft_silhouette(const Camera& cam, const Eigen::MatrixX3d& vertices,
                             const Eigen::MatrixX3i& faces, double gamma_px,
                             SoftRenderContext* ctx = nullptr);

/// Flat-color composite alpha*color + (1-alpha)*bg over the soft coverage.
Image render_soft(const Camera& cam, const Eigen::MatrixX3d& vertices,
                  const Eigen::MatrixX3i& faces, const Vec3& color, const Vec3& bg,
                  double gamma_px, SoftRenderContext* ctx = nullptr);

/// Pulls a coverage (1-channel) or color (3-channel) pixel gradient back
/// to vertex positions. Color gradients are contracted against
/// (color - bg) to reach the coverage channel first.
Eigen::MatrixX3d render_soft_backward(const SoftRenderContext& ctx,
                                      const Image& grad_pixels,
                                      const Vec3& color = Vec3::Zero(),
                                      const Vec3& bg = Vec3::Zero());

/// Signed 2D distance from point p to triangle (a, b, c), positive
/// inside. Optional gradients w.r.t. the three vertices.
double signed_distance_2d(const Eigen::Vector2d& p, const Eigen::Vector2d& a,
                          const Eigen::Vector2d& b, const Eigen::Vector2d& c,
                          Eigen::Vector2d grad[3] = nullptr);

}  // namespace framerec
