#pragma once

#include <vector>

#include "framerec/camera.hpp"
#include "framerec/image.hpp"
#include "framerec/keypoints.hpp"
#include "framerec/mesh.hpp"

namespace framerec {

/// Mean per-vertex distance between two same-topology meshes,
/// normalized by the reference bounding-box diagonal.
double reconstruction_error(const Mesh& reconstructed, const Mesh& reference);

/// Intersection over union of two binary masks (values thresholded at
/// 0.5). Returns 1 when both masks are empty.
double mask_iou(const Image& a, const Image& b);

/// Hard-rasterized silhouette IoU of two meshes under one camera.
double silhouette_iou(const Mesh& reconstructed, const Mesh& reference, const Camera& cam);

struct KeypointMetrics {
    double avg_error_pct = 0.0;  // mean distance, percent of image extent
    double pck5 = 0.0;           // percent within a 5 percent error (inclusive)
};

/// Distances in normalized image coordinates; invisible ground-truth
/// keypoints are skipped.
KeypointMetrics keypoint_error(const Keypoints2D& predicted, const Keypoints2D& truth);
KeypointMetrics keypoint_error(const std::vector<Keypoints2D>& predicted,
                               const std::vector<Keypoints2D>& truth);

}  // namespace framerec
