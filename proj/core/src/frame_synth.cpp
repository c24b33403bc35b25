#include "framerec/frame_synth.hpp"

#include <Eigen/Geometry>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "framerec/image.hpp"
#include "framerec/render.hpp"

namespace framerec {

namespace {

constexpr double kPi = std::numbers::pi;

void validate_or_throw(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("frame params: ") + what);
}

// Closed 2D lens outline (centerline of the rim), CCW, t in [0,1).
Eigen::Vector2d outline_point(const FrameParams& p, double t) {
    const double a = 0.5 * p.lens_width;
    const double b = 0.5 * p.lens_height;
    const double theta = 2.0 * kPi * t;
    switch (p.style) {
        case FrameStyle::kCircle:
            return {a * std::cos(theta), b * std::sin(theta)};
        case FrameStyle::kRectangle: {
            // superellipse exponent 5 reads as a rounded rectangle
            const double e = 2.0 / 5.0;
            const double c = std::cos(theta), s = std::sin(theta);
            const double x = a * std::copysign(std::pow(std::abs(c), e), c);
            const double y = b * std::copysign(std::pow(std::abs(s), e), s);
            return {x, y};
        }
        case FrameStyle::kOctagon: {
            // regular octagon radial profile, corners rounded by a small
            // angular moving average
            const auto oct_r = [](double th) {
                const double sector = kPi / 4.0;
                double phi = std::fmod(th + 0.5 * sector, sector);
                if (phi < 0) phi += sector;
                phi -= 0.5 * sector;
                return std::cos(0.5 * sector) / std::cos(phi);
            };
            const double delta = 0.10;
            double r = 0.0;
            const int k = 20;
            for (int i = -k; i <= k; ++i) r += oct_r(theta + delta * i / k);
            r /= (2 * k + 1);
            return {a * r * std::cos(theta), b * r * std::sin(theta)};
        }
    }
    throw std::logic_error("unknown style");
}

struct Builder {
    Eigen::MatrixX3d verts{kSharedVertexCount, 3};
    Eigen::MatrixX3i faces{kSharedFaceCount, 3};
    int vi = 0;
    int fi = 0;

    int add_vertex(const Vec3& v) {
        verts.row(vi) = v;
        return vi++;
    }
    void add_face(int a, int b, int c) {
        faces.row(fi) << a, b, c;
        ++fi;
    }
    void add_quad(int a, int b, int c, int d) {  // a-b-c-d loop
        add_face(a, b, c);
        add_face(a, c, d);
    }
};

// One rim as three open triangle-strip bands: front annulus, back
// annulus, outer wall. 6N vertices, 6N faces.
void build_rim(Builder& bld, const FrameParams& p, double center_x, double mirror) {
    const int n = kOutlineSamples;
    std::vector<Eigen::Vector2d> mid(n), inner(n), outer(n);
    for (int s = 0; s < n; ++s) mid[s] = outline_point(p, static_cast<double>(s) / n);
    for (int s = 0; s < n; ++s) {
        const Eigen::Vector2d tang = (mid[(s + 1) % n] - mid[(s + n - 1) % n]).normalized();
        const Eigen::Vector2d out(tang.y(), -tang.x());  // outward for CCW
        inner[s] = mid[s] - 0.5 * p.rim_thickness * out;
        outer[s] = mid[s] + 0.5 * p.rim_thickness * out;
    }

    const double zf = 0.5 * p.rim_depth, zb = -0.5 * p.rim_depth;
    const auto place = [&](const Eigen::Vector2d& xy, double z) {
        return Vec3(mirror * (center_x + xy.x()), xy.y(), z);
    };

    const int base = bld.vi;
    for (int s = 0; s < n; ++s) {  // front band [base, base+2n)
        bld.add_vertex(place(inner[s], zf));
        bld.add_vertex(place(outer[s], zf));
    }
    for (int s = 0; s < n; ++s) {  // back band
        bld.add_vertex(place(inner[s], zb));
        bld.add_vertex(place(outer[s], zb));
    }
    for (int s = 0; s < n; ++s) {  // outer wall
        bld.add_vertex(place(outer[s], zf));
        bld.add_vertex(place(outer[s], zb));
    }
    for (int band = 0; band < 3; ++band) {
        const int b = base + 2 * n * band;
        for (int s = 0; s < n; ++s) {
            const int s1 = (s + 1) % n;
            bld.add_quad(b + 2 * s, b + 2 * s + 1, b + 2 * s1 + 1, b + 2 * s1);
        }
    }
}

// Open box tube along precomputed ring corner positions.
void build_tube(Builder& bld, const std::vector<std::array<Vec3, 4>>& rings,
                bool cap_start, bool cap_end) {
    const int base = bld.vi;
    for (const auto& ring : rings)
        for (const auto& v : ring) bld.add_vertex(v);
    const int segs = static_cast<int>(rings.size()) - 1;
    for (int i = 0; i < segs; ++i) {
        const int r0 = base + 4 * i, r1 = r0 + 4;
        for (int e = 0; e < 4; ++e) {
            const int e1 = (e + 1) % 4;
            bld.add_quad(r0 + e, r0 + e1, r1 + e1, r1 + e);
        }
    }
    if (cap_start) bld.add_quad(base + 0, base + 1, base + 2, base + 3);
    if (cap_end) {
        const int last = base + 4 * segs;
        bld.add_quad(last + 3, last + 2, last + 1, last + 0);
    }
}

}  // namespace

void validate_params(const FrameParams& p) {
    validate_or_throw(p.lens_width > 0 && p.lens_height > 0 && p.bridge_width > 0 &&
                          p.temple_length > 0 && p.rim_thickness > 0 && p.rim_depth > 0,
                      "all lengths must be positive");
    validate_or_throw(p.rim_thickness <= 5.0, "rim thickness must be <= 5 mm");
    validate_or_throw(p.pantoscopic_deg >= 0.0 && p.pantoscopic_deg <= 20.0,
                      "pantoscopic angle must lie in [0, 20] degrees");
}

std::pair<Mesh, KeypointSpec> synth_frame(const FrameParams& p) {
    validate_params(p);
    Builder bld;

    const double cx = 0.5 * p.bridge_width + 0.5 * p.lens_width;
    build_rim(bld, p, cx, -1.0);  // left (x < 0)
    const int right_rim_base = bld.vi;
    build_rim(bld, p, cx, +1.0);  // right, exact x-mirror

    // bridge: open box tube across the top of the lens gap
    const int bridge_base = bld.vi;
    const double yb = 0.25 * p.lens_height;
    const double bh = p.rim_thickness, bx = 0.5 * p.bridge_width + 0.8 * p.rim_thickness;
    {
        std::vector<std::array<Vec3, 4>> rings(kBridgeSegments + 1);
        for (int i = 0; i <= kBridgeSegments; ++i) {
            const double x = -bx + 2.0 * bx * i / kBridgeSegments;
            const double zf = 0.5 * p.rim_depth, zb = -0.5 * p.rim_depth;
            rings[i] = {Vec3(x, yb + 0.5 * bh, zf), Vec3(x, yb + 0.5 * bh, zb),
                        Vec3(x, yb - 0.5 * bh, zb), Vec3(x, yb - 0.5 * bh, zf)};
        }
        build_tube(bld, rings, false, false);
    }

    // temples: capped box tubes swept backward from the hinges
    const double hinge_x = cx + 0.5 * p.lens_width + 0.5 * p.rim_thickness;
    const double pa = p.pantoscopic_deg * kPi / 180.0;
    const Vec3 dir(0.0, -std::sin(pa), -std::cos(pa));
    const Vec3 up(0.0, std::cos(pa), -std::sin(pa));  // perpendicular to dir
    const double tw = 0.6 * p.rim_thickness, th = 2.5 * p.rim_thickness;

    int temple_base[2];
    for (int side = 0; side < 2; ++side) {  // 0 = left, 1 = right
        const double sx = side == 0 ? -1.0 : 1.0;
        const Vec3 hinge(sx * hinge_x, yb, 0.0);
        temple_base[side] = bld.vi;
        std::vector<std::array<Vec3, 4>> rings(kTempleSegments + 1);
        for (int i = 0; i <= kTempleSegments; ++i) {
            const Vec3 c = hinge + p.temple_length * i / kTempleSegments * dir;
            const Vec3 ex(sx * 0.5 * tw, 0, 0);
            const Vec3 ey = 0.5 * th * up;
            rings[i] = {c + ey + ex, c + ey - ex, c - ey - ex, c - ey + ex};
        }
        build_tube(bld, rings, true, true);
    }

    if (bld.vi != kSharedVertexCount || bld.fi != kSharedFaceCount)
        throw std::logic_error("synthesizer topology budget mismatch");

    Mesh mesh{std::move(bld.verts), std::move(bld.faces)};

    // keypoints: 12 outline points + top/bottom center per lens, 2
    // bridge endpoints, hinge + 4 shaft + tip per temple
    KeypointSpec spec;
    const int n = kOutlineSamples;
    const auto lens_kp = [&](int rim_base) {
        std::vector<int> ids;
        for (int i = 0; i < 12; ++i) {
            const int s = static_cast<int>(std::llround(n * (i + 0.5) / 12.0));
            ids.push_back(rim_base + 2 * s + 1);  // outer curve, front band
        }
        ids.push_back(rim_base + 2 * (n / 4) + 1);      // top center
        ids.push_back(rim_base + 2 * (3 * n / 4) + 1);  // bottom center
        return ids;
    };
    const std::vector<int> left_lens = lens_kp(0);
    const std::vector<int> right_lens = lens_kp(right_rim_base);
    const int bridge_left = bridge_base + 0;
    const int bridge_right = bridge_base + 4 * kBridgeSegments;
    const auto temple_kp = [&](int base) {
        std::vector<int> ids;
        for (int j = 0; j <= 5; ++j)
            ids.push_back(base + 4 * (j * kTempleSegments / 5));
        return ids;
    };
    const std::vector<int> left_temple = temple_kp(temple_base[0]);
    const std::vector<int> right_temple = temple_kp(temple_base[1]);

    for (int id : left_lens) spec.indices.push_back(id);
    for (int id : right_lens) spec.indices.push_back(id);
    spec.indices.push_back(bridge_left);
    spec.indices.push_back(bridge_right);
    for (int id : left_temple) spec.indices.push_back(id);
    for (int id : right_temple) spec.indices.push_back(id);

    spec.front_indices.assign(spec.indices.begin(), spec.indices.begin() + kNumFrontKeypoints);
    spec.temple_indices.assign(spec.indices.begin() + kNumFrontKeypoints, spec.indices.end());

    for (size_t i = 0; i < left_lens.size(); ++i)
        spec.sym_pairs.push_back({left_lens[i], right_lens[i]});
    spec.sym_pairs.push_back({bridge_left, bridge_right});
    for (size_t i = 0; i < left_temple.size(); ++i)
        spec.sym_pairs.push_back({left_temple[i], right_temple[i]});

    validate_spec(spec, mesh.num_vertices());
    return {std::move(mesh), std::move(spec)};
}

std::vector<Mesh> sample_dataset(const std::vector<FrameParams>& styles,
                                 int sizes_per_style) {
    if (sizes_per_style < 1)
        throw std::invalid_argument("sizes_per_style must be >= 1");
    std::vector<Mesh> out;
    out.reserve(styles.size() * static_cast<size_t>(sizes_per_style));
    for (const FrameParams& base : styles) {
        for (int k = 0; k < sizes_per_style; ++k) {
            // GB/T-style size ladder: +/- 3% steps around the base
            const double s = 1.0 + 0.03 * (k - 0.5 * (sizes_per_style - 1));
            FrameParams p = base;
            p.lens_width *= s;
            p.lens_height *= s;
            p.bridge_width *= s;
            p.temple_length *= s;
            out.push_back(synth_frame(p).first);
        }
    }
    return out;
}

std::vector<FrameParams> default_styles() {
    std::vector<FrameParams> styles(6);
    styles[0] = {FrameStyle::kRectangle, 52, 34, 18, 140, 3.2, 4.0, 8};
    styles[1] = {FrameStyle::kRectangle, 56, 30, 17, 145, 3.0, 4.2, 8};
    styles[2] = {FrameStyle::kRectangle, 48, 38, 19, 138, 3.6, 3.8, 8};
    styles[3] = {FrameStyle::kCircle, 46, 44, 20, 140, 3.4, 4.0, 8};
    styles[4] = {FrameStyle::kOctagon, 50, 40, 18, 142, 3.2, 4.0, 8};
    styles[5] = {FrameStyle::kOctagon, 54, 42, 17, 140, 3.0, 4.2, 8};
    return styles;
}

ViewGrid ViewGrid::paper_default() {
    ViewGrid g;
    for (int d = -30; d <= 30; d += 5) g.yaw_deg.push_back(d);
    for (int d = -30; d <= 30; d += 5) g.pitch_deg.push_back(d);
    for (int d = -15; d <= 13; d += 7) g.roll_deg.push_back(d);
    return g;
}

Camera grid_camera(const ViewGrid& grid, double yaw_deg, double pitch_deg,
                   double roll_deg) {
    const double yaw = yaw_deg * kPi / 180.0;
    const double pitch = pitch_deg * kPi / 180.0;
    const Eigen::Matrix3d ry = Eigen::AngleAxisd(yaw, Vec3::UnitY()).toRotationMatrix();
    const Eigen::Matrix3d rx = Eigen::AngleAxisd(pitch, Vec3::UnitX()).toRotationMatrix();
    const Vec3 pos = grid.camera_distance * (ry * rx * Vec3::UnitZ());
    return look_at(pos, Vec3::Zero(), roll_deg * kPi / 180.0, grid.fov_deg,
                   grid.resolution, grid.resolution);
}

std::vector<ViewEntry> generate_views(const Mesh& mesh, const KeypointSpec& spec,
                                      const ViewGrid& grid, const std::string& out_dir,
                                      int threads) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    validate_spec(spec, mesh.num_vertices());

    struct Cell {
        double yaw, pitch, roll;
    };
    std::vector<Cell> cells;
    for (double y : grid.yaw_deg)
        for (double p : grid.pitch_deg)
            for (double r : grid.roll_deg) cells.push_back({y, p, r});

    std::vector<ViewEntry> manifest(cells.size());
    const Vec3 frame_color(0.10, 0.10, 0.12), bg(1.0, 1.0, 1.0);

    const auto render_one = [&](size_t i) {
        char name[64];
        std::snprintf(name, sizeof name, "view_%04zu", i);
        const std::string img_path = (fs::path(out_dir) / (std::string(name) + ".ppm")).string();
        const std::string kp_path = (fs::path(out_dir) / (std::string(name) + ".json")).string();

        const Camera cam = grid_camera(grid, cells[i].yaw, cells[i].pitch, cells[i].roll);
        const Image img = render_hard(cam, mesh, frame_color, bg);
        write_pnm(img, img_path);

        nlohmann::json j;
        j["image"] = std::string(name) + ".ppm";
        j["camera"] = nlohmann::json::parse(camera_to_json(cam));
        auto& kps = j["keypoints"] = nlohmann::json::array();
        for (int k : spec.indices) {
            const Projected pr = project_point(cam, mesh.vertices.row(k).transpose());
            kps.push_back({pr.u, pr.v});
        }
        std::ofstream out(kp_path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + kp_path);
        out << j.dump(2) << "\n";

        manifest[i] = {std::string(name) + ".ppm", std::string(name) + ".json"};
    };

    if (threads <= 1) {
        for (size_t i = 0; i < cells.size(); ++i) render_one(i);
    } else {
        std::vector<std::thread> pool;
        std::atomic<size_t> next{0};
        for (int t = 0; t < threads; ++t)
            pool.emplace_back([&] {
                for (size_t i = next.fetch_add(1); i < cells.size(); i = next.fetch_add(1))
                    render_one(i);
            });
        for (auto& th : pool) th.join();
    }

    nlohmann::json mj = nlohmann::json::array();
    for (const auto& e : manifest) mj.push_back({{"image", e.image_path}, {"keypoints", e.keypoint_path}});
    std::ofstream mout((fs::path(out_dir) / "manifest.json").string(), std::ios::binary);
    mout << mj.dump(2) << "\n";
    return manifest;
}

Keypoints2D perturb_keypoints(const Keypoints2D& kp, double noise_level,
                              std::uint64_t seed) {
    if (!(noise_level >= 0.0 && noise_level <= 0.05))
        throw std::invalid_argument("noise_level must lie in [0, 0.05]");
    Keypoints2D out = kp;
    if (noise_level == 0.0) return out;

    // hand-rolled Box-Muller so results are identical across platforms
    std::mt19937_64 rng(seed);
    const auto uniform = [&] {
        return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
    };
    for (Eigen::Index i = 0; i < out.points.rows(); ++i) {
        const double u1 = uniform(), u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double dx = r * std::cos(2.0 * kPi * u2);
        const double dy = r * std::sin(2.0 * kPi * u2);
        out.points(i, 0) = std::clamp(kp.points(i, 0) + noise_level * dx, 0.0, 1.0);
        out.points(i, 1) = std::clamp(kp.points(i, 1) + noise_level * dy, 0.0, 1.0);
    }
    return out;
}

}  // namespace framerec
