#include "framerec/losses.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "framerec/render.hpp"

namespace framerec {

void validate_weights(const LossWeights& w) {
    const double vals[] = {w.sym, w.img, w.sil, w.kp, w.sm, w.avg};
    for (double v : vals)
        if (!(v >= 0) || !std::isfinite(v))
            throw std::invalid_argument("loss weights must be finite and >= 0");
}

void save_weights(const LossWeights& w, const std::string& path) {
    nlohmann::json j{{"sym", w.sym}, {"img", w.img}, {"sil", w.sil},
                     {"kp", w.kp},   {"sm", w.sm},   {"avg", w.avg}};
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write weights: " + path);
    out << j.dump(2) << "\n";
}

LossWeights load_weights(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open weights: " + path);
    nlohmann::json j;
    in >> j;
    LossWeights w;
    w.sym = j.at("sym").get<double>();
    w.img = j.at("img").get<double>();
    w.sil = j.at("sil").get<double>();
    w.kp = j.at("kp").get<double>();
    w.sm = j.at("sm").get<double>();
    w.avg = j.at("avg").get<double>();
    validate_weights(w);
    return w;
}

double sym_plane(const Eigen::MatrixX3d& keypoints3d) {
    return 0.5 * keypoints3d.col(0).mean();
}

std::vector<std::array<int, 2>> sym_pair_positions(const KeypointSpec& spec) {
    std::vector<std::array<int, 2>> out;
    const auto pos_of = [&](int vertex_id) {
        for (int i = 0; i < kNumKeypoints; ++i)
            if (spec.indices[static_cast<size_t>(i)] == vertex_id) return i;
        throw std::invalid_argument("sym pair vertex is not a keypoint");
    };
    for (const auto& p : spec.sym_pairs) out.push_back({pos_of(p[0]), pos_of(p[1])});
    return out;
}

double loss_sym(const Eigen::MatrixX3d& kp3d,
                const std::vector<std::array<int, 2>>& pairs, Eigen::MatrixX3d* grad) {
    const Eigen::Index n = kp3d.rows();
    const double sigma = sym_plane(kp3d);
    if (grad) *grad = Eigen::MatrixX3d::Zero(n, 3);

    double value = 0.0;
    double sum_t1 = 0.0;  // for the sigma chain term
    for (const auto& pr : pairs) {
        const int l = pr[0], r = pr[1];
        const double xl = kp3d(l, 0), xr = kp3d(r, 0);
        // mirror reading: the pair midpoint should sit on the plane
        const double t1 = xl + xr - 2.0 * sigma;
        const double dy = kp3d(l, 1) - kp3d(r, 1);
        const double dz = kp3d(l, 2) - kp3d(r, 2);
        value += t1 * t1 + dy * dy + dz * dz;
        if (grad) {
            (*grad)(l, 0) += 2.0 * t1;
            (*grad)(r, 0) += 2.0 * t1;
            (*grad)(l, 1) += 2.0 * dy;
            (*grad)(r, 1) -= 2.0 * dy;
            (*grad)(l, 2) += 2.0 * dz;
            (*grad)(r, 2) -= 2.0 * dz;
            sum_t1 += 2.0 * t1;
        }
    }
    if (grad) {
        // sigma = mean(x)/2 couples every keypoint's x-coordinate
        const double dsigma = -2.0 * sum_t1 * 0.5 / static_cast<double>(n);
        grad->col(0).array() += dsigma;
    }
    return value;
}

double loss_img(const Image& rendered, const Image& target, Image* grad) {
    if (rendered.width != target.width || rendered.height != target.height ||
        rendered.channels != target.channels)
        throw std::invalid_argument("loss_img: image shape mismatch");
    const double n = static_cast<double>(rendered.width) * rendered.height;
    if (grad) *grad = Image(rendered.width, rendered.height, rendered.channels);
    double value = 0.0;
    for (size_t i = 0; i < rendered.data.size(); ++i) {
        const double diff = rendered.data[i] - target.data[i];
        value += diff * diff;
        if (grad) grad->data[i] = 2.0 * diff / n;
    }
    return value / n;
}

double loss_sil(const Image& rendered_sil, const Image& target_sil, Image* grad) {
    if (rendered_sil.channels != 1 || target_sil.channels != 1)
        throw std::invalid_argument("loss_sil: single-channel silhouettes expected");
    if (rendered_sil.width != target_sil.width || rendered_sil.height != target_sil.height)
        throw std::invalid_argument("loss_sil: resolution mismatch");

    double inter = 0.0, sum_a = 0.0, sum_b = 0.0;
    for (size_t i = 0; i < rendered_sil.data.size(); ++i) {
        inter += rendered_sil.data[i] * target_sil.data[i];
        sum_a += rendered_sil.data[i];
        sum_b += target_sil.data[i];
    }
    const double uni = sum_a + sum_b - inter;
    if (grad) *grad = Image(rendered_sil.width, rendered_sil.height, 1);
    if (uni <= 0.0) return 0.0;  // both silhouettes empty

    if (grad)
        for (size_t i = 0; i < rendered_sil.data.size(); ++i) {
            const double b = target_sil.data[i];
            grad->data[i] = -(b * uni - inter * (1.0 - b)) / (uni * uni);
        }
    return 1.0 - inter / uni;
}

double loss_kp(const Keypoints2D& projected, const Keypoints2D& observed,
               Eigen::Matrix<double, Eigen::Dynamic, 2>* grad) {
    if (projected.points.rows() != observed.points.rows())
        throw std::invalid_argument("loss_kp: keypoint count mismatch");
    const double n = static_cast<double>(projected.points.rows());
    if (grad) *grad = Eigen::Matrix<double, Eigen::Dynamic, 2>::Zero(projected.points.rows(), 2);
    double value = 0.0;
    for (Eigen::Index i = 0; i < projected.points.rows(); ++i) {
        if (!projected.visible[static_cast<size_t>(i)] ||
            !observed.visible[static_cast<size_t>(i)])
            continue;
        const Eigen::Vector2d diff = projected.points.row(i) - observed.points.row(i);
        value += diff.squaredNorm() / n;
        if (grad) grad->row(i) = 2.0 * diff.transpose() / n;
    }
    return value;
}

double loss_smooth(const Eigen::MatrixX3d& vertices, const AdjacencyTable& adjacency,
                   Eigen::MatrixX3d* grad) {
    if (static_cast<size_t>(vertices.rows()) != adjacency.size())
        throw std::invalid_argument("loss_smooth: adjacency size mismatch");
    const double n = static_cast<double>(vertices.rows());
    if (grad) *grad = Eigen::MatrixX3d::Zero(vertices.rows(), 3);
    double value = 0.0;
    for (Eigen::Index i = 0; i < vertices.rows(); ++i) {
        const auto& nbrs = adjacency[static_cast<size_t>(i)];
        if (nbrs.empty()) continue;
        const double k = static_cast<double>(nbrs.size());
        Vec3 mean = Vec3::Zero();
        for (int j : nbrs) mean += vertices.row(j).transpose();
        mean /= k;
        const Vec3 resid = vertices.row(i).transpose() - mean;
        value += resid.squaredNorm() / n;
        if (grad) {
            grad->row(i) += 2.0 / n * resid.transpose();
            for (int j : nbrs) grad->row(j) -= 2.0 / (n * k) * resid.transpose();
        }
    }
    return value;
}

double loss_avg(const Eigen::MatrixX3d& deformed, const Eigen::MatrixX3d& rest,
                Eigen::MatrixX3d* grad) {
    if (deformed.rows() != rest.rows())
        throw std::invalid_argument("loss_avg: shape mismatch");
    const double n = static_cast<double>(deformed.rows());
    if (grad) *grad = 2.0 / n * (deformed - rest);
    return (deformed - rest).squaredNorm() / n;
}

Image silhouette_from_image(const Image& color, const Vec3& bg, double threshold) {
    if (color.channels != 3)
        throw std::invalid_argument("silhouette_from_image: color image expected");
    Image mask(color.width, color.height, 1);
    for (int y = 0; y < color.height; ++y)
        for (int x = 0; x < color.width; ++x) {
            double d2 = 0;
            for (int c = 0; c < 3; ++c) {
                const double diff = color.at(x, y, c) - bg[c];
                d2 += diff * diff;
            }
            mask.at(x, y) = std::sqrt(d2) > threshold ? 1.0 : 0.0;
        }
    return mask;
}

LossReport total_loss(const TotalLossInputs& in, const LossWeights& weights) {
    validate_weights(weights);
    if (!in.deformed || !in.tmpl || !in.adjacency || !in.cam || !in.target_color ||
        !in.target_sil || !in.observed)
        throw std::invalid_argument("total_loss: missing input");

    const Eigen::MatrixX3d& verts = *in.deformed;
    const TemplateModel& tmpl = *in.tmpl;
    LossReport report;
    report.grad_vertices = Eigen::MatrixX3d::Zero(verts.rows(), 3);

    // rendered terms share one forward pass and one pullback
    SoftRenderContext ctx;
    const Image alpha =
        render_soft_silhouette(*in.cam, verts, tmpl.mesh.faces, in.gamma_px, &ctx);
    Image color_img(in.cam->width, in.cam->height, 3);
    for (int y = 0; y < in.cam->height; ++y)
        for (int x = 0; x < in.cam->width; ++x) {
            const double a = alpha.at(x, y);
            for (int c = 0; c < 3; ++c)
                color_img.at(x, y, c) = a * in.color[c] + (1.0 - a) * in.bg[c];
        }

    Image grad_color, grad_sil;
    report.parts.img = loss_img(color_img, *in.target_color, &grad_color);
    report.parts.sil = loss_sil(alpha, *in.target_sil, &grad_sil);

    if (weights.img > 0 || weights.sil > 0) {
        Image grad_alpha(in.cam->width, in.cam->height, 1);
        const Vec3 k = in.color - in.bg;
        for (int y = 0; y < in.cam->height; ++y)
            for (int x = 0; x < in.cam->width; ++x) {
                double g = weights.sil * grad_sil.at(x, y);
                for (int c = 0; c < 3; ++c) g += weights.img * grad_color.at(x, y, c) * k[c];
                grad_alpha.at(x, y) = g;
            }
        report.grad_vertices += render_soft_backward(ctx, grad_alpha);
    }

    // keypoint term, pulled back through the projection
    Keypoints2D projected;
    std::vector<Eigen::Matrix<double, 2, 3>> kp_jac(kNumKeypoints);
    for (int i = 0; i < kNumKeypoints; ++i) {
        const int vid = tmpl.keypoints.indices[static_cast<size_t>(i)];
        const Projected pr =
            project_point_jac(*in.cam, verts.row(vid).transpose(), &kp_jac[i], nullptr);
        projected.points(i, 0) = pr.u;
        projected.points(i, 1) = pr.v;
        projected.visible[static_cast<size_t>(i)] = pr.in_front;
    }
    Eigen::Matrix<double, Eigen::Dynamic, 2> grad_kp;
    report.parts.kp = loss_kp(projected, *in.observed, &grad_kp);
    if (weights.kp > 0)
        for (int i = 0; i < kNumKeypoints; ++i) {
            if (!projected.visible[static_cast<size_t>(i)]) continue;
            const int vid = tmpl.keypoints.indices[static_cast<size_t>(i)];
            report.grad_vertices.row(vid) +=
                weights.kp * (grad_kp.row(i) * kp_jac[i]);
        }

    // The 3D terms are evaluated in bbox-diagonal-normalized model
    // units so the paper's weights balance against the image-space
    // terms regardless of the model's physical scale.
    const double diag = bbox_diagonal(tmpl.mesh);
    if (!(diag > 0)) throw std::invalid_argument("total_loss: degenerate template");
    const double inv = 1.0 / diag;

    // symmetry over the deformed keypoints
    Eigen::MatrixX3d kp3d(kNumKeypoints, 3);
    for (int i = 0; i < kNumKeypoints; ++i)
        kp3d.row(i) = inv * verts.row(tmpl.keypoints.indices[static_cast<size_t>(i)]);
    Eigen::MatrixX3d grad_sym;
    report.parts.sym = loss_sym(kp3d, sym_pair_positions(tmpl.keypoints), &grad_sym);
    if (weights.sym > 0)
        for (int i = 0; i < kNumKeypoints; ++i)
            report.grad_vertices.row(tmpl.keypoints.indices[static_cast<size_t>(i)]) +=
                (weights.sym * inv) * grad_sym.row(i);

    // regularizers
    Eigen::MatrixX3d grad_sm, grad_av;
    report.parts.sm = loss_smooth(inv * verts, *in.adjacency, &grad_sm);
    report.parts.avg = loss_avg(inv * verts, inv * tmpl.mesh.vertices, &grad_av);
    if (weights.sm > 0) report.grad_vertices += (weights.sm * inv) * grad_sm;
    if (weights.avg > 0) report.grad_vertices += (weights.avg * inv) * grad_av;

    report.total = weighted_total(report.parts, weights);
    return report;
}

}  // namespace framerec
