#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "doctest.h"
#include "framerec/frame_synth.hpp"
#include "framerec/pose.hpp"
#include "framerec/render.hpp"

using namespace framerec;
namespace fs = std::filesystem;

namespace {
fs::path temp_dir(const char* name) {
    fs::path p = fs::temp_directory_path() / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}
}  // namespace

TEST_CASE("synth_frame emits the shared topology") {
    auto [mesh, spec] = synth_frame(FrameParams{});
    CHECK(mesh.num_vertices() == kSharedVertexCount);
    CHECK(mesh.num_faces() == kSharedFaceCount);
    CHECK_NOTHROW(validate_mesh(mesh));
    CHECK_NOTHROW(validate_spec(spec, mesh.num_vertices()));
}

TEST_CASE("synth_frame left/right lens-rim centroids mirror within 1e-6") {
    FrameParams p;
    auto [mesh, spec] = synth_frame(p);
    const int rim = 6 * kOutlineSamples;
    Vec3 left = Vec3::Zero(), right = Vec3::Zero();
    for (int i = 0; i < rim; ++i) {
        left += mesh.vertices.row(i).transpose();
        right += mesh.vertices.row(rim + i).transpose();
    }
    left /= rim;
    right /= rim;
    CHECK(std::abs(left.x() + right.x()) < 1e-6);
    CHECK(std::abs(left.y() - right.y()) < 1e-6);
    CHECK(std::abs(left.z() - right.z()) < 1e-6);
}

TEST_CASE("pre-tilt bilateral symmetry of keypoint pairs") {
    FrameParams p;
    p.pantoscopic_deg = 0.0;
    auto [mesh, spec] = synth_frame(p);
    for (const auto& [l, r] : spec.sym_pairs) {
        const Vec3 vl = mesh.vertices.row(l).transpose();
        const Vec3 vr = mesh.vertices.row(r).transpose();
        CHECK(std::abs(vl.x() + vr.x()) < 1e-6);
        CHECK(std::abs(vl.y() - vr.y()) < 1e-6);
        CHECK(std::abs(vl.z() - vr.z()) < 1e-6);
    }
}

TEST_CASE("synth_frame is deterministic (identical vertex bytes)") {
    FrameParams p;
    p.style = FrameStyle::kOctagon;
    auto a = synth_frame(p).first;
    auto b = synth_frame(p).first;
    CHECK(std::memcmp(a.vertices.data(), b.vertices.data(),
                      sizeof(double) * static_cast<size_t>(a.vertices.size())) == 0);
    CHECK(a.faces == b.faces);
}

TEST_CASE("circle rim cross-section thickness equals rim_thickness") {
    FrameParams p;
    p.style = FrameStyle::kCircle;
    p.lens_width = 50.0;
    p.lens_height = 50.0;
    auto [mesh, spec] = synth_frame(p);
    // left rim band: radial extent about its own centroid in the x-y
    // plane must span exactly one rim thickness for a circular outline
    const int rim = 6 * kOutlineSamples;
    Eigen::Vector2d c = Eigen::Vector2d::Zero();
    for (int i = 0; i < rim; ++i) c += mesh.vertices.row(i).head<2>().transpose();
    c /= rim;
    double rmin = 1e300, rmax = 0;
    for (int i = 0; i < rim; ++i) {
        const double r = (mesh.vertices.row(i).head<2>().transpose() - c).norm();
        rmin = std::min(rmin, r);
        rmax = std::max(rmax, r);
    }
    CHECK(rmax - rmin == doctest::Approx(p.rim_thickness).epsilon(1e-6));
}

TEST_CASE("parameter validation rejects out-of-range values") {
    FrameParams p;
    p.rim_thickness = 5.5;
    CHECK_THROWS_AS(synth_frame(p), std::invalid_argument);
    p = FrameParams{};
    p.pantoscopic_deg = 25.0;
    CHECK_THROWS_AS(synth_frame(p), std::invalid_argument);
    p = FrameParams{};
    p.lens_width = -1.0;
    CHECK_THROWS_AS(synth_frame(p), std::invalid_argument);
}

TEST_CASE("sample_dataset sizes and topology consistency") {
    const std::vector<FrameParams> styles = default_styles();
    REQUIRE(styles.size() == 6);

    SUBCASE("6 styles x 9 sizes -> 54 meshes") {
        const auto ds = sample_dataset(styles, 9);
        CHECK(ds.size() == 54);
    }
    SUBCASE("1 style x 1 size equals synth_frame output") {
        const auto ds = sample_dataset({styles[0]}, 1);
        REQUIRE(ds.size() == 1);
        const Mesh direct = synth_frame(styles[0]).first;
        CHECK((ds[0].vertices - direct.vertices).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("2 styles x 2 sizes share one face array") {
        const auto ds = sample_dataset({styles[0], styles[3]}, 2);
        REQUIRE(ds.size() == 4);
        for (size_t i = 1; i < ds.size(); ++i) CHECK(ds[0].faces == ds[i].faces);
    }
}

TEST_CASE("view grid has the documented cardinality") {
    const ViewGrid grid = ViewGrid::paper_default();
    CHECK(grid.yaw_deg.size() == 13);
    CHECK(grid.pitch_deg.size() == 13);
    CHECK(grid.roll_deg.size() == 5);
    CHECK(grid.cell_count() == 845);
    CHECK(grid.roll_deg == std::vector<double>{-15, -8, -1, 6, 13});
    CHECK(grid.resolution == 1024);
}

TEST_CASE("perturb_keypoints basics") {
    Keypoints2D kp;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uni(0.2, 0.8);
    for (int i = 0; i < kNumKeypoints; ++i) {
        kp.points(i, 0) = uni(rng);
        kp.points(i, 1) = uni(rng);
    }

    SUBCASE("zero noise is the identity") {
        const Keypoints2D out = perturb_keypoints(kp, 0.0, 1);
        CHECK((out.points - kp.points).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("same seed twice gives identical output") {
        const Keypoints2D a = perturb_keypoints(kp, 0.02, 42);
        const Keypoints2D b = perturb_keypoints(kp, 0.02, 42);
        CHECK((a.points - b.points).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("different seeds differ") {
        const Keypoints2D a = perturb_keypoints(kp, 0.02, 1);
        const Keypoints2D b = perturb_keypoints(kp, 0.02, 2);
        CHECK((a.points - b.points).cwiseAbs().maxCoeff() > 0.0);
    }
    SUBCASE("noise level out of range throws") {
        CHECK_THROWS_AS(perturb_keypoints(kp, 0.06, 1), std::invalid_argument);
        CHECK_THROWS_AS(perturb_keypoints(kp, -0.01, 1), std::invalid_argument);
    }
    SUBCASE("output clamped to the unit square") {
        Keypoints2D edge;
        edge.points.setZero();  // all at the corner
        const Keypoints2D out = perturb_keypoints(edge, 0.05, 3);
        CHECK(out.points.minCoeff() >= 0.0);
        CHECK(out.points.maxCoeff() <= 1.0);
    }
}

TEST_CASE("perturb_keypoints mean displacement matches the half-normal prediction") {
    // sigma * sqrt(pi/2) is the mean of |N(0, sigma^2)| per axis pair
    const double sigma = 0.0211;
    Keypoints2D kp;
    kp.points.setConstant(0.5);
    double total = 0.0;
    const int trials = 169;
    for (int t = 0; t < trials; ++t) {
        const Keypoints2D out = perturb_keypoints(kp, sigma, 1000 + t);
        for (int i = 0; i < kNumKeypoints; ++i)
            total += (out.points.row(i) - kp.points.row(i)).norm();
    }
    const double mean = total / (trials * kNumKeypoints);
    const double predicted = sigma * std::sqrt(3.14159265358979323846 / 2.0);
    CHECK(mean == doctest::Approx(predicted).epsilon(0.05));
}

TEST_CASE("generate_views on a degenerate grid matches proj_keypoints") {
    auto [mesh, spec] = synth_frame(FrameParams{});
    ViewGrid grid = ViewGrid::paper_default();
    grid.yaw_deg = {10.0};
    grid.pitch_deg = {-5.0};
    grid.roll_deg = {6.0};
    grid.resolution = 64;
    const fs::path dir = temp_dir("framerec_test_views");
    const auto manifest = generate_views(mesh, spec, grid, dir.string());
    REQUIRE(manifest.size() == 1);
    // manifest paths are relative to the output directory
    CHECK(fs::exists(dir / manifest[0].image_path));
    CHECK(fs::exists(dir / manifest[0].keypoint_path));
    CHECK(fs::exists(dir / "manifest.json"));

    // stored keypoints equal a direct projection with the same camera
    std::ifstream in(dir / manifest[0].keypoint_path);
    const std::string text((std::istreambuf_iterator<char>(in)),
                           std::istreambuf_iterator<char>());
    const Camera cam = camera_from_json_str(text, grid.resolution, grid.resolution);
    const TemplateModel tmpl{mesh, spec, 0, 0};
    const Keypoints2D direct = proj_keypoints(cam, tmpl);
    const Camera expect = grid_camera(grid, 10.0, -5.0, 6.0);
    CHECK((cam.position - expect.position).norm() < 1e-9);

    // parse the stored keypoint array
    size_t pos = text.find("\"keypoints\"");
    REQUIRE(pos != std::string::npos);
    std::vector<double> vals;
    for (size_t i = text.find('[', pos); i < text.size() && vals.size() < 84; ++i) {
        if ((text[i] >= '0' && text[i] <= '9') || text[i] == '-' || text[i] == '.') {
            size_t end = 0;
            vals.push_back(std::stod(text.substr(i), &end));
            i += end - 1;
        }
    }
    REQUIRE(vals.size() == 84);
    for (int i = 0; i < kNumKeypoints; ++i) {
        CHECK(std::abs(vals[2 * i] - direct.points(i, 0)) < 1e-9);
        CHECK(std::abs(vals[2 * i + 1] - direct.points(i, 1)) < 1e-9);
    }
    fs::remove_all(dir);
}

TEST_CASE("frontal view keypoints mirror about the symmetry axis") {
    FrameParams p;
    p.pantoscopic_deg = 0.0;
    auto [mesh, spec] = synth_frame(p);
    ViewGrid grid = ViewGrid::paper_default();
    grid.resolution = 256;
    const Camera cam = grid_camera(grid, 0.0, 0.0, 0.0);
    const TemplateModel tmpl{mesh, spec, 0, 0};
    const Keypoints2D kp = proj_keypoints(cam, tmpl);

    // the projected symmetry axis is the mean x of all mirrored pairs
    const auto positions = [&] {
        std::vector<std::array<int, 2>> rows;
        for (const auto& [l, r] : spec.sym_pairs) {
            int rl = -1, rr = -1;
            for (int i = 0; i < kNumKeypoints; ++i) {
                if (spec.indices[static_cast<size_t>(i)] == l) rl = i;
                if (spec.indices[static_cast<size_t>(i)] == r) rr = i;
            }
            rows.push_back({rl, rr});
        }
        return rows;
    }();
    double axis = 0.0;
    for (const auto& [rl, rr] : positions) axis += kp.points(rl, 0) + kp.points(rr, 0);
    axis /= 2.0 * static_cast<double>(positions.size());
    for (const auto& [rl, rr] : positions) {
        CHECK(std::abs((kp.points(rl, 0) - axis) + (kp.points(rr, 0) - axis)) < 1e-4);
        CHECK(std::abs(kp.points(rl, 1) - kp.points(rr, 1)) < 1e-4);
    }
}

TEST_CASE("keypoint spec round trips through JSON") {
    auto [mesh, spec] = synth_frame(FrameParams{});
    const fs::path dir = temp_dir("framerec_test_spec");
    const std::string path = (dir / "spec.json").string();
    save_keypoint_spec(spec, path);
    const KeypointSpec loaded = load_keypoint_spec(path);
    CHECK(loaded.indices == spec.indices);
    CHECK(loaded.front_indices == spec.front_indices);
    CHECK(loaded.temple_indices == spec.temple_indices);
    CHECK(loaded.sym_pairs == spec.sym_pairs);
    fs::remove_all(dir);
}
