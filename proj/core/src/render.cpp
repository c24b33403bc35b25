#include "framerec/render.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace framerec {

namespace {

using Vec2 = Eigen::Vector2d;

double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }
Vec2 perp(const Vec2& v) { return {-v.y(), v.x()}; }

double sigmoid(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// Unsigned distance from p to segment (q0, q1) plus gradients w.r.t.
// the endpoints.
double segment_distance(const Vec2& p, const Vec2& q0, const Vec2& q1, Vec2& g0, Vec2& g1) {
    const Vec2 u = q1 - q0, w = p - q0;
    const double uu = u.squaredNorm();
    const double t = uu > 0 ? w.dot(u) / uu : 0.0;
    if (t <= 0.0 || uu == 0.0) {
        const double d = (p - q0).norm();
        g0 = d > 1e-12 ? Vec2((q0 - p) / d) : Vec2::Zero();
        g1.setZero();
        return d;
    }
    if (t >= 1.0) {
        const double d = (p - q1).norm();
        g1 = d > 1e-12 ? Vec2((q1 - p) / d) : Vec2::Zero();
        g0.setZero();
        return d;
    }
    const double len = std::sqrt(uu);
    const double c = cross2(u, w);
    const double d = std::abs(c) / len;
    const double s = c >= 0 ? 1.0 : -1.0;
    g0 = s * perp(p - q1) / len + d * u / uu;
    g1 = -s * perp(p - q0) / len - d * u / uu;
    return d;
}

struct ScreenTri {
    Vec2 v[3];
};

void prepare_screen(const Camera& cam, const Eigen::MatrixX3d& vertices,
                    std::vector<Vec2>& screen,
                    std::vector<Eigen::Matrix<double, 2, 3>>* jac,
                    std::vector<char>& valid) {
    const Eigen::Index nv = vertices.rows();
    screen.resize(static_cast<size_t>(nv));
    valid.resize(static_cast<size_t>(nv));
    if (jac) jac->resize(static_cast<size_t>(nv));
    for (Eigen::Index i = 0; i < nv; ++i) {
        Eigen::Matrix<double, 2, 3> duv;
        const Projected pr =
            project_point_jac(cam, vertices.row(i).transpose(), jac ? &duv : nullptr, nullptr);
        valid[static_cast<size_t>(i)] = pr.in_front ? 1 : 0;
        screen[static_cast<size_t>(i)] = Vec2(pr.u * cam.width, pr.v * cam.height);
        if (jac) {
            duv.row(0) *= cam.width;
            duv.row(1) *= cam.height;
            (*jac)[static_cast<size_t>(i)] = duv;
        }
    }
}

}  // namespace

double signed_distance_2d(const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& c,
                          Vec2 grad[3]) {
    const Vec2 tri[3] = {a, b, c};
    const double orient = cross2(b - a, c - a) >= 0 ? 1.0 : -1.0;
    bool inside = true;
    for (int e = 0; e < 3; ++e) {
        const Vec2& q0 = tri[e];
        const Vec2& q1 = tri[(e + 1) % 3];
        if (orient * cross2(q1 - q0, p - q0) < 0) {
            inside = false;
            break;
        }
    }
    double best = std::numeric_limits<double>::infinity();
    int best_e = 0;
    Vec2 bg0, bg1;
    for (int e = 0; e < 3; ++e) {
        Vec2 g0, g1;
        const double d = segment_distance(p, tri[e], tri[(e + 1) % 3], g0, g1);
        if (d < best) {
            best = d;
            best_e = e;
            bg0 = g0;
            bg1 = g1;
        }
    }
    const double sign = inside ? 1.0 : -1.0;
    if (grad) {
        grad[0].setZero();
        grad[1].setZero();
        grad[2].setZero();
        grad[best_e] = sign * bg0;
        grad[(best_e + 1) % 3] = sign * bg1;
    }
    return sign * best;
}

Image render_hard(const Camera& cam, const Eigen::MatrixX3d& vertices,
                  const Eigen::MatrixX3i& faces, const Vec3& color, const Vec3& bg) {
    validate_camera(cam);
    Image img(cam.width, cam.height, 3);
    for (int y = 0; y < cam.height; ++y)
        for (int x = 0; x < cam.width; ++x)
            for (int c = 0; c < 3; ++c) img.at(x, y, c) = bg[c];

    std::vector<Vec2> screen;
    std::vector<char> valid;
    prepare_screen(cam, vertices, screen, nullptr, valid);
    std::vector<double> depth(static_cast<size_t>(vertices.rows()));
    {
        const Eigen::Matrix3d rot = cam.world_to_cam();
        for (Eigen::Index i = 0; i < vertices.rows(); ++i)
            depth[static_cast<size_t>(i)] =
                (rot * (vertices.row(i).transpose() - cam.position)).z();
    }

    std::vector<double> zbuf(static_cast<size_t>(cam.width) * cam.height,
                             std::numeric_limits<double>::infinity());
    for (Eigen::Index f = 0; f < faces.rows(); ++f) {
        const int i0 = faces(f, 0), i1 = faces(f, 1), i2 = faces(f, 2);
        if (!valid[i0] || !valid[i1] || !valid[i2]) continue;
        const Vec2 a = screen[i0], b = screen[i1], c = screen[i2];
        const double area = cross2(b - a, c - a);
        if (std::abs(area) < 1e-12) continue;
        const int x0 = std::max(0, static_cast<int>(std::floor(std::min({a.x(), b.x(), c.x()}))));
        const int x1 = std::min(cam.width - 1,
                                static_cast<int>(std::ceil(std::max({a.x(), b.x(), c.x()}))));
        const int y0 = std::max(0, static_cast<int>(std::floor(std::min({a.y(), b.y(), c.y()}))));
        const int y1 = std::min(cam.height - 1,
                                static_cast<int>(std::ceil(std::max({a.y(), b.y(), c.y()}))));
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                const Vec2 p(x + 0.5, y + 0.5);
                const double w0 = cross2(b - p, c - p) / area;
                const double w1 = cross2(c - p, a - p) / area;
                const double w2 = 1.0 - w0 - w1;
                if (w0 < 0 || w1 < 0 || w2 < 0) continue;
                const double z = w0 * depth[i0] + w1 * depth[i1] + w2 * depth[i2];
                double& zb = zbuf[static_cast<size_t>(y) * cam.width + x];
                if (z < zb) {
                    zb = z;
                    for (int ch = 0; ch < 3; ++ch) img.at(x, y, ch) = color[ch];
                }
            }
        }
    }
    return img;
}

Image render_hard(const Camera& cam, const Mesh& mesh, const Vec3& color, const Vec3& bg) {
    return render_hard(cam, mesh.vertices, mesh.faces, color, bg);
}

Image render_hard_silhouette(const Camera& cam, const Eigen::MatrixX3d& vertices,
                             const Eigen::MatrixX3i& faces) {
    const Image rgb = render_hard(cam, vertices, faces, Vec3(1, 1, 1), Vec3(0, 0, 0));
    Image mask(cam.width, cam.height, 1);
    for (int y = 0; y < cam.height; ++y)
        for (int x = 0; x < cam.width; ++x) mask.at(x, y) = rgb.at(x, y, 0) > 0.5 ? 1.0 : 0.0;
    return mask;
}

Image render_soft_silhouette(const Camera& cam, const Eigen::MatrixX3d& vertices,
                             const Eigen::MatrixX3i& faces, double gamma_px,
                             SoftRenderContext* ctx) {
    validate_camera(cam);
    if (!(gamma_px > 0)) throw std::invalid_argument("gamma must be positive");

    std::vector<Vec2> screen;
    std::vector<Eigen::Matrix<double, 2, 3>> jac;
    std::vector<char> valid;
    prepare_screen(cam, vertices, screen, ctx ? &jac : nullptr, valid);

    // per-face contribution beyond this band is sigmoid(-6) ~ 2.5e-3 and
    // shrinks exponentially; skipping there trades that tail for a ~5x
    // smaller per-face pixel footprint
    const double cutoff = 6.0 * gamma_px;
    std::vector<double> transmittance(static_cast<size_t>(cam.width) * cam.height, 1.0);

    for (Eigen::Index f = 0; f < faces.rows(); ++f) {
        const int i0 = faces(f, 0), i1 = faces(f, 1), i2 = faces(f, 2);
        if (!valid[i0] || !valid[i1] || !valid[i2]) continue;
        const Vec2 a = screen[i0], b = screen[i1], c = screen[i2];
        const int x0 = std::max(
            0, static_cast<int>(std::floor(std::min({a.x(), b.x(), c.x()}) - cutoff - 1)));
        const int x1 = std::min(cam.width - 1, static_cast<int>(std::ceil(
                                                   std::max({a.x(), b.x(), c.x()}) + cutoff + 1)));
        const int y0 = std::max(
            0, static_cast<int>(std::floor(std::min({a.y(), b.y(), c.y()}) - cutoff - 1)));
        const int y1 = std::min(cam.height - 1, static_cast<int>(std::ceil(
                                                    std::max({a.y(), b.y(), c.y()}) + cutoff + 1)));
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                const Vec2 p(x + 0.5, y + 0.5);
                const double d = signed_distance_2d(p, a, b, c);
                if (d < -cutoff) continue;
                const double alpha = std::min(sigmoid(d / gamma_px), 1.0 - 1e-12);
                transmittance[static_cast<size_t>(y) * cam.width + x] *= 1.0 - alpha;
            }
        }
    }

    Image out(cam.width, cam.height, 1);
    for (size_t i = 0; i < transmittance.size(); ++i) out.data[i] = 1.0 - transmittance[i];

    if (ctx) {
        ctx->cam = cam;
        ctx->gamma_px = gamma_px;
        ctx->faces = faces;
        ctx->screen = std::move(screen);
        ctx->dscreen_dworld = std::move(jac);
        ctx->vertex_valid = std::move(valid);
        ctx->transmittance = std::move(transmittance);
        ctx->width = cam.width;
        ctx->height = cam.height;
    }
    return out;
}

Image render_soft(const Camera& cam, const Eigen::MatrixX3d& vertices,
                  const Eigen::MatrixX3i& faces, const Vec3& color, const Vec3& bg,
                  double gamma_px, SoftRenderContext* ctx) {
    const Image alpha = render_soft_silhouette(cam, vertices, faces, gamma_px, ctx);
    Image out(cam.width, cam.height, 3);
    for (int y = 0; y < cam.height; ++y)
        for (int x = 0; x < cam.width; ++x) {
            const double a = alpha.at(x, y);
            for (int c = 0; c < 3; ++c) out.at(x, y, c) = a * color[c] + (1.0 - a) * bg[c];
        }
    return out;
}

Eigen::MatrixX3d render_soft_backward(const SoftRenderContext& ctx,
                                      const Image& grad_pixels, const Vec3& color,
                                      const Vec3& bg) {
    if (ctx.transmittance.empty()) throw std::invalid_argument("missing forward context");
    if (grad_pixels.width != ctx.width || grad_pixels.height != ctx.height)
        throw std::invalid_argument("gradient image resolution mismatch");
    if (grad_pixels.channels != 1 && grad_pixels.channels != 3)
        throw std::invalid_argument("gradient image must have 1 or 3 channels");

    // reduce a color gradient to the coverage channel
    std::vector<double> grad_alpha(static_cast<size_t>(ctx.width) * ctx.height);
    if (grad_pixels.channels == 1) {
        grad_alpha.assign(grad_pixels.data.begin(), grad_pixels.data.end());
    } else {
        const Vec3 k = color - bg;
        for (int y = 0; y < ctx.height; ++y)
            for (int x = 0; x < ctx.width; ++x) {
                double g = 0;
                for (int c = 0; c < 3; ++c) g += grad_pixels.at(x, y, c) * k[c];
                grad_alpha[static_cast<size_t>(y) * ctx.width + x] = g;
            }
    }

    const Eigen::Index nv = static_cast<Eigen::Index>(ctx.screen.size());
    Eigen::MatrixX3d grad_vertices = Eigen::MatrixX3d::Zero(nv, 3);
    const double cutoff = 6.0 * ctx.gamma_px;

    for (Eigen::Index f = 0; f < ctx.faces.rows(); ++f) {
        const int idx[3] = {ctx.faces(f, 0), ctx.faces(f, 1), ctx.faces(f, 2)};
        if (!ctx.vertex_valid[idx[0]] || !ctx.vertex_valid[idx[1]] || !ctx.vertex_valid[idx[2]])
            continue;
        const Vec2 a = ctx.screen[idx[0]], b = ctx.screen[idx[1]], c = ctx.screen[idx[2]];
        const int x0 = std::max(
            0, static_cast<int>(std::floor(std::min({a.x(), b.x(), c.x()}) - cutoff - 1)));
        const int x1 = std::min(ctx.width - 1, static_cast<int>(std::ceil(
                                                   std::max({a.x(), b.x(), c.x()}) + cutoff + 1)));
        const int y0 = std::max(
            0, static_cast<int>(std::floor(std::min({a.y(), b.y(), c.y()}) - cutoff - 1)));
        const int y1 = std::min(ctx.height - 1, static_cast<int>(std::ceil(
                                                    std::max({a.y(), b.y(), c.y()}) + cutoff + 1)));
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                const double ga = grad_alpha[static_cast<size_t>(y) * ctx.width + x];
                if (ga == 0.0) continue;
                const Vec2 p(x + 0.5, y + 0.5);
                Vec2 dgrad[3];
                const double d = signed_distance_2d(p, a, b, c, dgrad);
                if (d < -cutoff) continue;
                const double alpha = std::min(sigmoid(d / ctx.gamma_px), 1.0 - 1e-12);
                const double trans = ctx.transmittance[static_cast<size_t>(y) * ctx.width + x];
                const double dalpha_pixel = trans / (1.0 - alpha);  // Prod over other faces
                const double dsig = alpha * (1.0 - alpha) / ctx.gamma_px;
                const double g = ga * dalpha_pixel * dsig;
                for (int k = 0; k < 3; ++k)
                    grad_vertices.row(idx[k]) +=
                        g * (dgrad[k].transpose() * ctx.dscreen_dworld[idx[k]]);
            }
        }
    }
    return grad_vertices;
}

}  // namespace framerec
