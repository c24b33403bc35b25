#pragma once

#include <array>
#include <string>
#include <vector>

#include "framerec/camera.hpp"
#include "framerec/image.hpp"
#include "framerec/keypoints.hpp"
#include "framerec/mesh.hpp"
#include "framerec/template_builder.hpp"

namespace framerec {

struct LossWeights {
    double sym = 0.1;
    double img = 5e-5;
    double sil = 5e-5;
    double kp = 1.0;
    double sm = 0.012;
    double avg = 2.1e-4;
};

void validate_weights(const LossWeights& w);
void save_weights(const LossWeights& w, const std::string& path);
LossWeights load_weights(const std::string& path);

struct LossParts {
    double sym = 0, img = 0, sil = 0, kp = 0, sm = 0, avg = 0;
};

struct LossReport {
    LossParts parts;
    double total = 0.0;
    Eigen::MatrixX3d grad_vertices;  // d total / d deformed vertices
};

inline double weighted_total(const LossParts& p, const LossWeights& w) {
    return w.sym * p.sym + (w.img * p.img + w.sil * p.sil + w.kp * p.kp) +
           (w.sm * p.sm + w.avg * p.avg);
}

/// Half the mean x-coordinate of the 42 keypoints.
double sym_plane(const Eigen::MatrixX3d& keypoints3d);

/// Maps spec sym pairs (vertex ids) to row positions in the 42-row
/// keypoint array.
std::vector<std::array<int, 2>> sym_pair_positions(const KeypointSpec& spec);

/// Pairwise symmetry penalty over the 21 pairs; gradient over the 42
/// keypoint rows. The x term penalizes the pair midpoint's distance to
/// the symmetry plane; y and z terms penalize pairwise differences.
double loss_sym(const Eigen::MatrixX3d& keypoints3d,
                const std::vector<std::array<int, 2>>& pair_positions,
                Eigen::MatrixX3d* grad = nullptr);

/// Mean squared per-pixel channel difference (divisor = pixel count).
double loss_img(const Image& rendered, const Image& target, Image* grad = nullptr);

/// 1 - soft IoU over coverage values; 0 when both silhouettes empty.
double loss_sil(const Image& rendered_sil, const Image& target_sil, Image* grad = nullptr);

/// Mean squared keypoint distance in normalized coordinates.
double loss_kp(const Keypoints2D& projected, const Keypoints2D& observed,
               Eigen::Matrix<double, Eigen::Dynamic, 2>* grad = nullptr);

/// Mean squared Laplacian residual v_i - mean(neighbors); isolated
/// vertices are excluded from the sum.
double loss_smooth(const Eigen::MatrixX3d& vertices, const AdjacencyTable& adjacency,
                   Eigen::MatrixX3d* grad = nullptr);

/// Mean squared displacement from the template vertices.
double loss_avg(const Eigen::MatrixX3d& deformed, const Eigen::MatrixX3d& rest,
                Eigen::MatrixX3d* grad = nullptr);

struct TotalLossInputs {
    const Eigen::MatrixX3d* deformed = nullptr;
    const TemplateModel* tmpl = nullptr;
    const AdjacencyTable* adjacency = nullptr;
    const Camera* cam = nullptr;
    const Image* target_color = nullptr;  // 3 channels
    const Image* target_sil = nullptr;    // 1 channel
    const Keypoints2D* observed = nullptr;
    Vec3 color = Vec3(0.1, 0.1, 0.12);
    Vec3 bg = Vec3(1, 1, 1);
    double gamma_px = 1.5;
};

/// Weighted sum of all terms plus the combined vertex gradient
/// (image-space gradients pulled back through the soft rasterizer,
/// keypoint gradients scattered to keypoint vertices).
LossReport total_loss(const TotalLossInputs& in, const LossWeights& weights);

/// Background-distance threshold silhouette extraction (threshold 0.5
/// in RGB distance).
Image silhouette_from_image(const Image& color, const Vec3& bg, double threshold = 0.5);

}  // namespace framerec
