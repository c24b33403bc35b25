#include "framerec/camera.hpp"

#include <Eigen/Geometry>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

namespace framerec {

namespace {
constexpr double kPi = std::numbers::pi;

Eigen::Matrix3d skew(const Vec3& v) {
    Eigen::Matrix3d s;
    s << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
    return s;
}
}  // namespace

void validate_camera(const Camera& cam) {
    if (cam.rotation.norm() > kPi + 1e-12)
        throw std::invalid_argument("camera rotation vector magnitude must be <= pi");
    if (!(cam.fov_deg > 10.0 && cam.fov_deg < 120.0))
        throw std::invalid_argument("camera fov must lie in (10, 120) degrees");
    if (cam.width < 16 || cam.height < 16)
        throw std::invalid_argument("camera resolution must be at least 16x16");
}

Eigen::Matrix3d rotation_matrix(const Vec3& axis_angle) {
    const double theta = axis_angle.norm();
    if (theta < 1e-14) return Eigen::Matrix3d::Identity();
    return Eigen::AngleAxisd(theta, axis_angle / theta).toRotationMatrix();
}

Vec3 rotation_vector(const Eigen::Matrix3d& rot) {
    const Eigen::AngleAxisd aa(rot);
    double angle = aa.angle();
    Vec3 axis = aa.axis();
    if (angle > kPi) {  // canonical range
        angle = 2 * kPi - angle;
        axis = -axis;
    }
    return angle * axis;
}

Eigen::Matrix3d Camera::world_to_cam() const { return rotation_matrix(rotation); }

Projected project_point(const Camera& cam, const Vec3& point) {
    return project_point_jac(cam, point, nullptr, nullptr);
}

std::vector<Projected> project(const Camera& cam, const Eigen::MatrixX3d& points) {
    std::vector<Projected> out(static_cast<size_t>(points.rows()));
    const Eigen::Matrix3d rot = cam.world_to_cam();
    const double t = std::tan(0.5 * cam.fov_deg * kPi / 180.0);
    const double aspect = static_cast<double>(cam.width) / cam.height;
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        const Vec3 pc = rot * (points.row(i).transpose() - cam.position);
        Projected& pr = out[static_cast<size_t>(i)];
        pr.depth = pc.z();
        pr.in_front = pc.z() > 1e-9;
        if (pr.in_front) {
            pr.u = 0.5 + pc.x() / (2.0 * t * pc.z() * aspect);
            pr.v = 0.5 + pc.y() / (2.0 * t * pc.z());
        }
    }
    return out;
}

Projected project_point_jac(const Camera& cam, const Vec3& point,
                            Eigen::Matrix<double, 2, 3>* duv_dpoint,
                            Eigen::Matrix<double, 2, 6>* duv_dpose) {
    const Eigen::Matrix3d rot = cam.world_to_cam();
    const double t = std::tan(0.5 * cam.fov_deg * kPi / 180.0);
    const double aspect = static_cast<double>(cam.width) / cam.height;
    const Vec3 w = point - cam.position;
    const Vec3 pc = rot * w;

    Projected pr;
    pr.depth = pc.z();
    pr.in_front = pc.z() > 1e-9;
    if (!pr.in_front) return pr;
    pr.u = 0.5 + pc.x() / (2.0 * t * pc.z() * aspect);
    pr.v = 0.5 + pc.y() / (2.0 * t * pc.z());

    if (!duv_dpoint && !duv_dpose) return pr;

    Eigen::Matrix<double, 2, 3> duv_dpc;
    const double z = pc.z();
    duv_dpc << 1.0 / (2.0 * t * z * aspect), 0, -pc.x() / (2.0 * t * z * z * aspect),
               0, 1.0 / (2.0 * t * z), -pc.y() / (2.0 * t * z * z);

    const Eigen::Matrix<double, 2, 3> duv_dworld = duv_dpc * rot;
    if (duv_dpoint) *duv_dpoint = duv_dworld;

    if (duv_dpose) {
        duv_dpose->block<2, 3>(0, 0) = -duv_dworld;
        // d(R(r) w)/dr via the Gallego-Yezzi closed form
        const Vec3 r = cam.rotation;
        const double theta2 = r.squaredNorm();
        Eigen::Matrix3d dRw_dr;
        if (theta2 < 1e-20) {
            dRw_dr = -skew(w);
        } else {
            const Eigen::Matrix3d i_minus_r = Eigen::Matrix3d::Identity() - rot;
            for (int i = 0; i < 3; ++i) {
                const Vec3 ei = Vec3::Unit(i);
                const Eigen::Matrix3d dR =
                    (r(i) * skew(r) + skew(r.cross(i_minus_r * ei))) * rot / theta2;
                dRw_dr.col(i) = dR * w;
            }
        }
        duv_dpose->block<2, 3>(0, 3) = duv_dpc * dRw_dr;
    }
    return pr;
}

Camera look_at(const Vec3& position, const Vec3& target, double roll_rad,
               double fov_deg, int width, int height) {
    const Vec3 fwd = (target - position).normalized();
    const Vec3 up(0, 1, 0);
    Vec3 xc = fwd.cross(up);
    if (xc.norm() < 1e-12)
        throw std::invalid_argument("look_at: view direction parallel to up vector");
    xc.normalize();
    const Vec3 yc = fwd.cross(xc);  // image-down axis
    Eigen::Matrix3d rot;
    rot.row(0) = xc;
    rot.row(1) = yc;
    rot.row(2) = fwd;
    const Eigen::Matrix3d rolled =
        Eigen::AngleAxisd(roll_rad, Vec3::UnitZ()).toRotationMatrix() * rot;

    Camera cam;
    cam.position = position;
    cam.rotation = rotation_vector(rolled);
    cam.fov_deg = fov_deg;
    cam.width = width;
    cam.height = height;
    validate_camera(cam);
    return cam;
}

std::string camera_to_json(const Camera& cam) {
    nlohmann::json j;
    j["position"] = {cam.position.x(), cam.position.y(), cam.position.z()};
    j["rotation"] = {cam.rotation.x(), cam.rotation.y(), cam.rotation.z()};
    j["fov_deg"] = cam.fov_deg;
    return j.dump();
}

Camera camera_from_json_str(const std::string& json_text, int width, int height) {
    const nlohmann::json doc = nlohmann::json::parse(json_text);
    // accept either a bare camera object or a view file that nests one
    const nlohmann::json& j = doc.contains("camera") ? doc.at("camera") : doc;
    Camera cam;
    for (int i = 0; i < 3; ++i) {
        cam.position(i) = j.at("position").at(i).get<double>();
        cam.rotation(i) = j.at("rotation").at(i).get<double>();
    }
    cam.fov_deg = j.at("fov_deg").get<double>();
    cam.width = width;
    cam.height = height;
    validate_camera(cam);
    return cam;
}

}  // namespace framerec
