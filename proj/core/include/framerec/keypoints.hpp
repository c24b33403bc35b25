#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace framerec {

inline constexpr int kNumKeypoints = 42;
inline constexpr int kNumFrontKeypoints = 30;
inline constexpr int kNumTempleKeypoints = 12;
inline constexpr int kNumSymPairs = 21;

/// The 42 template vertex indices, partitioned into front (30) and
/// temple (12), plus 21 (left, right) mirror pairs. All entries are
/// vertex indices into the shared dataset topology.
struct KeypointSpec {
    std::vector<int> indices;         // 42
    std::vector<int> front_indices;   // 30
    std::vector<int> temple_indices;  // 12
    std::vector<std::array<int, 2>> sym_pairs;  // 21 x (left, right)
};

/// Throws std::invalid_argument on count/partition/range violations.
void validate_spec(const KeypointSpec& spec, Eigen::Index num_vertices);

void save_keypoint_spec(const KeypointSpec& spec, const std::string& path);
KeypointSpec load_keypoint_spec(const std::string& path);

/// 42 keypoints in normalized [0,1]^2 image coordinates.
struct Keypoints2D {
    Eigen::Matrix<double, Eigen::Dynamic, 2> points;  // 42 x 2
    std::vector<std::uint8_t> visible;                // 42, 1 = visible

    Keypoints2D() : points(kNumKeypoints, 2), visible(kNumKeypoints, 1) {
        points.setZero();
    }
};

}  // namespace framerec
