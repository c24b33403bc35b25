#include "framerec/metrics.hpp"

#include <stdexcept>

#include "framerec/render.hpp"

namespace framerec {

double reconstruction_error(const Mesh& reconstructed, const Mesh& reference) {
    if (!same_topology(reconstructed, reference))
        throw std::invalid_argument("reconstruction_error: topology mismatch");
    const double diag = bbox_diagonal(reference);
    if (!(diag > 0)) throw std::invalid_argument("reconstruction_error: degenerate reference");
    double sum = 0.0;
    for (int i = 0; i < reconstructed.vertices.rows(); ++i)
        sum += (reconstructed.vertices.row(i) - reference.vertices.row(i)).norm();
    return sum / (static_cast<double>(reconstructed.vertices.rows()) * diag);
}

double mask_iou(const Image& a, const Image& b) {
    if (a.width != b.width || a.height != b.height || a.channels != 1 || b.channels != 1)
        throw std::invalid_argument("mask_iou: shape mismatch");
    long inter = 0, uni = 0;
    for (size_t i = 0; i < a.data.size(); ++i) {
        const bool pa = a.data[i] > 0.5, pb = b.data[i] > 0.5;
        inter += pa && pb;
        uni += pa || pb;
    }
    return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

double silhouette_iou(const Mesh& reconstructed, const Mesh& reference, const Camera& cam) {
    const Image sa = render_hard_silhouette(cam, reconstructed.vertices, reconstructed.faces);
    const Image sb = render_hard_silhouette(cam, reference.vertices, reference.faces);
    return mask_iou(sa, sb);
}

KeypointMetrics keypoint_error(const std::vector<Keypoints2D>& predicted,
                               const std::vector<Keypoints2D>& truth) {
    if (predicted.size() != truth.size())
        throw std::invalid_argument("keypoint_error: length mismatch");
    KeypointMetrics out;
    long counted = 0, within = 0;
    double sum = 0.0;
    for (size_t s = 0; s < truth.size(); ++s) {
        for (int i = 0; i < kNumKeypoints; ++i) {
            if (!truth[s].visible[static_cast<size_t>(i)]) continue;
            const double d = (predicted[s].points.row(i) - truth[s].points.row(i)).norm();
            sum += d;
            // inclusive threshold with a guard for float rounding at
            // the exact boundary
            within += d <= 0.05 + 1e-12;
            ++counted;
        }
    }
    if (counted == 0) return out;
    out.avg_error_pct = 100.0 * sum / static_cast<double>(counted);
    out.pck5 = 100.0 * static_cast<double>(within) / static_cast<double>(counted);
    return out;
}

KeypointMetrics keypoint_error(const Keypoints2D& predicted, const Keypoints2D& truth) {
    return keypoint_error(std::vector<Keypoints2D>{predicted},
                          std::vector<Keypoints2D>{truth});
}

}  // namespace framerec
