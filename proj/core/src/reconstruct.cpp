#include "framerec/reconstruct.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <vector>

#include "json.hpp"

namespace framerec {

namespace {

double gamma_at(const std::vector<std::pair<int, double>>& schedule, int it) {
    if (schedule.empty()) throw std::invalid_argument("empty gamma schedule");
    double g = schedule.front().second;
    for (const auto& [start, gamma] : schedule)
        if (it >= start) g = gamma;
    return g;
}

}  // namespace

OptimConfig default_pose_config() {
    OptimConfig cfg;
    cfg.max_iters = 2000;
    return cfg;
}

OptimConfig default_deform_config() {
    OptimConfig cfg;
    cfg.max_iters = 500;
    cfg.gamma_schedule = {{0, 1.5}, {200, 0.75}, {400, 0.375}};
    return cfg;
}

ReconstructionResult reconstruct(const Image& image, const Keypoints2D& observed_kp,
                                 const TemplateModel& tmpl, const FfdLattice& lattice,
                                 const LossWeights& weights, const OptimConfig& config,
                                 const Camera* fixed_pose, double fov_deg) {
    validate_config(config);
    if (image.channels != 3) throw std::invalid_argument("reconstruct: expected a 3-channel image");

    ReconstructionResult result;
    if (fixed_pose) {
        result.pose.camera = *fixed_pose;
        result.pose.camera.width = image.width;
        result.pose.camera.height = image.height;
        result.pose.converged = true;
        result.pose.final_reproj_error =
            reproj_loss(result.pose.camera, tmpl, observed_kp);
    } else {
        result.pose = estimate_pose(tmpl, observed_kp, default_pose_config(), fov_deg,
                                    image.width, image.height);
    }
    const Camera& cam = result.pose.camera;

    const Vec3 bg(1, 1, 1);
    const Image target_sil = silhouette_from_image(image, bg);
    const AdjacencyTable adjacency = vertex_adjacency(tmpl.mesh);

    // frame color taken as the per-channel median over the target
    // silhouette (keypoint pixels are unreliable: on thin rims many of
    // them land on background pixels)
    Vec3 frame_color(0.1, 0.1, 0.12);
    {
        std::array<std::vector<double>, 3> samples;
        for (int y = 0; y < image.height; ++y)
            for (int x = 0; x < image.width; ++x) {
                if (target_sil.at(x, y) < 0.5) continue;
                for (int c = 0; c < 3; ++c)
                    samples[static_cast<size_t>(c)].push_back(image.at(x, y, c));
            }
        if (!samples[0].empty()) {
            for (int c = 0; c < 3; ++c) {
                auto& v = samples[static_cast<size_t>(c)];
                std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
                frame_color[c] = v[v.size() / 2];
            }
        }
    }

    TotalLossInputs in;
    in.tmpl = &tmpl;
    in.adjacency = &adjacency;
    in.cam = &cam;
    in.target_color = &image;
    in.target_sil = &target_sil;
    in.observed = &observed_kp;
    in.color = frame_color;
    in.bg = bg;

    const int n_c = lattice.num_control_points();
    // Adam takes lr-sized steps per coordinate, so the field is
    // optimized in units of a tenth of the mesh diagonal to make
    // lr 1e-3 move millimeters, not microns.
    const double scale = 0.1 * bbox_diagonal(tmpl.mesh);
    Eigen::ArrayXd x = Eigen::ArrayXd::Zero(3 * n_c);
    AdamState state(3 * n_c);

    double best_total = std::numeric_limits<double>::infinity();
    Eigen::ArrayXd best_x = x;
    int since_improved = 0;

    const auto unpack = [&](const Eigen::ArrayXd& flat) {
        DeformationField delta(n_c, 3);
        for (int c = 0; c < n_c; ++c)
            delta.row(c) = scale * Vec3(flat[3 * c], flat[3 * c + 1], flat[3 * c + 2]);
        return delta;
    };

    result.loss_history.reserve(static_cast<size_t>(config.max_iters));
    for (int it = 0; it < config.max_iters; ++it) {
        const DeformationField delta = unpack(x);
        const Eigen::MatrixX3d deformed = deform(lattice, delta);
        in.deformed = &deformed;
        in.gamma_px = gamma_at(config.gamma_schedule, it);

        const LossReport report = total_loss(in, weights);
        result.loss_history.push_back({it, report.parts, report.total, in.gamma_px});

        if (report.total < best_total - config.convergence_tol) {
            best_total = report.total;
            best_x = x;
            since_improved = 0;
        } else if (++since_improved >= config.patience) {
            break;
        }

        const DeformationField grad_delta = backprop_delta(lattice, report.grad_vertices);
        Eigen::ArrayXd grad(3 * n_c);
        for (int c = 0; c < n_c; ++c) {
            grad[3 * c] = scale * grad_delta(c, 0);
            grad[3 * c + 1] = scale * grad_delta(c, 1);
            grad[3 * c + 2] = scale * grad_delta(c, 2);
        }
        adam_update(state, x, grad, config);
    }

    result.delta = unpack(best_x);
    result.mesh.vertices = deform(lattice, result.delta);
    result.mesh.faces = tmpl.mesh.faces;
    return result;
}

void save_history(const std::vector<IterationRecord>& history, const std::string& path) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& rec : history) {
        arr.push_back({{"iteration", rec.iteration},
                       {"total", rec.total},
                       {"gamma_px", rec.gamma_px},
                       {"parts",
                        {{"sym", rec.parts.sym},
                         {"img", rec.parts.img},
                         {"sil", rec.parts.sil},
                         {"kp", rec.parts.kp},
                         {"sm", rec.parts.sm},
                         {"avg", rec.parts.avg}}}});
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << arr.dump(2) << "\n";
}

}  // namespace framerec
