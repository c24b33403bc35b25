#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "framerec/camera.hpp"
#include "framerec/keypoints.hpp"
#include "framerec/mesh.hpp"

namespace framerec {

enum class FrameStyle { kRectangle, kOctagon, kCircle };

/// Generative parameters for one frame. All lengths in millimeters.
struct FrameParams {
    FrameStyle style = FrameStyle::kRectangle;
    double lens_width = 52.0;
    double lens_height = 34.0;
    double bridge_width = 18.0;
    double temple_length = 140.0;
    double rim_thickness = 3.2;   // <= 5 mm
    double rim_depth = 4.0;
    double pantoscopic_deg = 8.0; // [0, 20]
};

void validate_params(const FrameParams& params);

/// Shared-topology constants of the synthesizer. Every mesh it emits
/// has exactly these counts, with one fixed face array.
inline constexpr int kOutlineSamples = 988;  // per rim
inline constexpr int kBridgeSegments = 75;
inline constexpr int kTempleSegments = 200;
inline constexpr int kSharedVertexCount = 13768;
inline constexpr int kSharedFaceCount = 15664;

/// Builds one full-frame mesh plus the keypoint spec. The face array
/// and the keypoint spec are identical for every parameter choice.
std::pair<Mesh, KeypointSpec> synth_frame(const FrameParams& params);

/// styles.size() x sizes_per_style meshes, size variants scaled around
/// each base. All topology-consistent and aligned in a common frame.
std::vector<Mesh> sample_dataset(const std::vector<FrameParams>& styles,
                                 int sizes_per_style);

/// The six default style bases (three rectangles, one circle, two
/// octagons).
std::vector<FrameParams> default_styles();

struct ViewGrid {
    std::vector<double> yaw_deg;    // default -30..30 step 5
    std::vector<double> pitch_deg;  // default -30..30 step 5
    std::vector<double> roll_deg;   // default {-15,-8,-1,6,13}
    int resolution = 1024;
    double camera_distance = 400.0;  // mm
    double fov_deg = 30.0;

    static ViewGrid paper_default();
    size_t cell_count() const {
        return yaw_deg.size() * pitch_deg.size() * roll_deg.size();
    }
};

struct ViewEntry {
    std::string image_path;
    std::string keypoint_path;
};

/// Renders every grid cell (hard rasterizer), writes a P6 image and a
/// keypoint JSON per view plus manifest.json, and returns the manifest.
std::vector<ViewEntry> generate_views(const Mesh& mesh, const KeypointSpec& spec,
                                      const ViewGrid& grid, const std::string& out_dir,
                                      int threads = 1);

Camera grid_camera(const ViewGrid& grid, double yaw_deg, double pitch_deg,
                   double roll_deg);

/// Isotropic Gaussian displacement of each keypoint, sigma =
/// noise_level in normalized units; output clamped to [0,1]^2.
Keypoints2D perturb_keypoints(const Keypoints2D& kp, double noise_level,
                              std::uint64_t seed);

}  // namespace framerec
