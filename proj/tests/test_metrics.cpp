#include <cmath>
#include <random>

#include "doctest.h"
#include "framerec/frame_synth.hpp"
#include "framerec/metrics.hpp"
#include "framerec/render.hpp"

using namespace framerec;

namespace {

Mesh random_mesh(std::mt19937_64& rng, int n_v = 30) {
    std::normal_distribution<double> g(0.0, 10.0);
    Mesh m;
    m.vertices.resize(n_v, 3);
    for (int i = 0; i < n_v; ++i)
        for (int j = 0; j < 3; ++j) m.vertices(i, j) = g(rng);
    m.faces.resize(1, 3);
    m.faces << 0, 1, 2;
    return m;
}

}  // namespace

TEST_CASE("reconstruction_error") {
    std::mt19937_64 rng(61);
    const Mesh truth = random_mesh(rng);

    SUBCASE("identical meshes give zero") {
        CHECK(reconstruction_error(truth, truth) == 0.0);
    }

    SUBCASE("uniform offset of 0.1 diagonals gives 0.1") {
        const double diag = bbox_diagonal(truth);
        Mesh recon = truth;
        recon.vertices.col(0).array() += 0.1 * diag;
        CHECK(reconstruction_error(recon, truth) == doctest::Approx(0.1).epsilon(1e-12));
    }

    SUBCASE("matches the direct per-vertex oracle") {
        Mesh recon = truth;
        std::normal_distribution<double> g(0.0, 0.5);
        for (int i = 0; i < recon.vertices.rows(); ++i)
            for (int j = 0; j < 3; ++j) recon.vertices(i, j) += g(rng);
        double sum = 0;
        for (int i = 0; i < recon.vertices.rows(); ++i)
            sum += (recon.vertices.row(i) - truth.vertices.row(i)).norm();
        const double expect =
            sum / static_cast<double>(truth.vertices.rows()) / bbox_diagonal(truth);
        CHECK(reconstruction_error(recon, truth) == doctest::Approx(expect).epsilon(1e-12));
    }

    SUBCASE("invariant under joint rigid translation and uniform scaling") {
        Mesh recon = truth;
        std::normal_distribution<double> g(0.0, 0.5);
        for (int i = 0; i < recon.vertices.rows(); ++i)
            for (int j = 0; j < 3; ++j) recon.vertices(i, j) += g(rng);
        const double base = reconstruction_error(recon, truth);

        Mesh rt = recon, tt = truth;
        const Eigen::RowVector3d t(100, -50, 7);
        rt.vertices.rowwise() += t;
        tt.vertices.rowwise() += t;
        CHECK(reconstruction_error(rt, tt) == doctest::Approx(base).epsilon(1e-12));

        Mesh rs = recon, ts = truth;
        rs.vertices *= 3.5;
        ts.vertices *= 3.5;
        CHECK(reconstruction_error(rs, ts) == doctest::Approx(base).epsilon(1e-12));
    }

    SUBCASE("topology mismatch throws") {
        const Mesh other = random_mesh(rng, 31);
        CHECK_THROWS(reconstruction_error(other, truth));
    }
}

TEST_CASE("mask_iou") {
    SUBCASE("identical masks give one") {
        Image a(8, 8, 1, 0.0);
        a.at(2, 3) = a.at(4, 4) = 1.0;
        CHECK(mask_iou(a, a) == 1.0);
    }

    SUBCASE("disjoint masks give zero") {
        Image a(8, 8, 1, 0.0), b(8, 8, 1, 0.0);
        a.at(0, 0) = 1.0;
        b.at(7, 7) = 1.0;
        CHECK(mask_iou(a, b) == 0.0);
    }

    SUBCASE("both empty is defined as one") {
        const Image a(8, 8, 1, 0.0);
        CHECK(mask_iou(a, a) == 1.0);
    }

    SUBCASE("symmetric and matches set arithmetic") {
        Image a(8, 1, 1, 0.0), b(8, 1, 1, 0.0);
        for (int x = 0; x < 4; ++x) a.at(x, 0) = 1.0;
        for (int x = 2; x < 6; ++x) b.at(x, 0) = 1.0;
        CHECK(mask_iou(a, b) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
        CHECK(mask_iou(a, b) == mask_iou(b, a));
    }
}

TEST_CASE("keypoint_error") {
    Keypoints2D truth;
    std::mt19937_64 rng(62);
    std::uniform_real_distribution<double> uni(0.2, 0.8);
    for (int i = 0; i < kNumKeypoints; ++i) {
        truth.points(i, 0) = uni(rng);
        truth.points(i, 1) = uni(rng);
    }

    SUBCASE("exact prediction gives (0, 100)") {
        const KeypointMetrics m = keypoint_error(truth, truth);
        CHECK(m.avg_error_pct == 0.0);
        CHECK(m.pck5 == 100.0);
    }

    SUBCASE("uniform exact 0.05 offset gives (5, 100) — inclusive threshold") {
        Keypoints2D pred = truth;
        pred.points.col(0).array() += 0.05;
        const KeypointMetrics m = keypoint_error(pred, truth);
        CHECK(m.avg_error_pct == doctest::Approx(5.0).epsilon(1e-12));
        CHECK(m.pck5 == 100.0);
    }

    SUBCASE("offsets above the threshold fail PCK") {
        Keypoints2D pred = truth;
        pred.points.col(0).array() += 0.0501;
        const KeypointMetrics m = keypoint_error(pred, truth);
        CHECK(m.pck5 == 0.0);
    }

    SUBCASE("list overload averages over the grid") {
        std::vector<Keypoints2D> preds, truths;
        for (int k = 0; k < 3; ++k) {
            truths.push_back(truth);
            Keypoints2D p = truth;
            p.points.col(0).array() += 0.01 * (k + 1);
            preds.push_back(p);
        }
        const KeypointMetrics m = keypoint_error(preds, truths);
        CHECK(m.avg_error_pct == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(m.pck5 == 100.0);
        CHECK_THROWS(keypoint_error(preds, std::vector<Keypoints2D>{truth}));
    }

    SUBCASE("half-normal calibration at the paper's noise level") {
        const double sigma = 0.0211;
        std::vector<Keypoints2D> preds, truths;
        for (int t = 0; t < 169; ++t) {
            truths.push_back(truth);
            preds.push_back(perturb_keypoints(truth, sigma, 9000 + t));
        }
        const KeypointMetrics m = keypoint_error(preds, truths);
        const double predicted = 100.0 * sigma * std::sqrt(3.14159265358979323846 / 2.0);
        CHECK(m.avg_error_pct == doctest::Approx(predicted).epsilon(0.05));
        CHECK(m.pck5 >= 90.0);
    }
}

TEST_CASE("silhouette_iou agrees with mask_iou on rendered frames") {
    auto [mesh, spec] = synth_frame(FrameParams{});
    ViewGrid grid = ViewGrid::paper_default();
    grid.resolution = 96;
    const Camera cam = grid_camera(grid, 0, 0, 0);
    const Image self = render_hard_silhouette(cam, mesh.vertices, mesh.faces);
    CHECK(silhouette_iou(mesh, mesh, cam) == 1.0);
    CHECK(mask_iou(self, self) == 1.0);

    FrameParams wide;
    wide.lens_width = 60.0;
    const Mesh other = synth_frame(wide).first;
    const double iou = silhouette_iou(other, mesh, cam);
    CHECK(iou > 0.0);
    CHECK(iou < 1.0);
    const Image os = render_hard_silhouette(cam, other.vertices, other.faces);
    CHECK(iou == doctest::Approx(mask_iou(os, self)).epsilon(1e-12));
}
