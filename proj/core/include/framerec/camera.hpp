#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "framerec/mesh.hpp"

namespace framerec {

/// Pinhole camera: 6-DOF extrinsics (position + axis-angle rotation
/// taking world vectors into the camera frame) plus vertical field of
/// view. Camera looks along its local +z, image y points down.
struct Camera {
    Vec3 position = Vec3::Zero();   // mm, world
    Vec3 rotation = Vec3::Zero();   // axis-angle, |r| < pi
    double fov_deg = 30.0;          // vertical
    int width = 1024;
    int height = 1024;

    Eigen::Matrix3d world_to_cam() const;
};

/// Throws std::invalid_argument on out-of-range fov/resolution/rotation.
void validate_camera(const Camera& cam);

struct Projected {
    double u = 0.0;       // normalized, 0 = left, 1 = right
    double v = 0.0;       // normalized, 0 = top, 1 = bottom
    double depth = 0.0;   // distance along camera forward axis
    bool in_front = false;
};

/// Rodrigues rotation matrix for an axis-angle vector.
Eigen::Matrix3d rotation_matrix(const Vec3& axis_angle);

/// Inverse of rotation_matrix; returned vector has magnitude <= pi.
Vec3 rotation_vector(const Eigen::Matrix3d& rot);

Projected project_point(const Camera& cam, const Vec3& point);
std::vector<Projected> project(const Camera& cam, const Eigen::MatrixX3d& points);

/// Projection plus Jacobians of (u, v) w.r.t. the world point and the
/// 6 pose parameters (position, rotation vector). Either output may be
/// null. Jacobians are valid only when the point is in front.
Projected project_point_jac(const Camera& cam, const Vec3& point,
                            Eigen::Matrix<double, 2, 3>* duv_dpoint,
                            Eigen::Matrix<double, 2, 6>* duv_dpose);

/// Camera at `position` looking at `target`, rolled by `roll_rad`
/// about its own forward axis. World +y is up before roll.
Camera look_at(const Vec3& position, const Vec3& target, double roll_rad,
               double fov_deg, int width, int height);

std::string camera_to_json(const Camera& cam);
Camera camera_from_json_str(const std::string& json_text, int width, int height);

}  // namespace framerec
