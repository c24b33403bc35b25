#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

namespace framerec {

/// Optimizer hyperparameters shared by pose estimation and the
/// free-form deformer.
struct OptimConfig {
    double learning_rate = 1e-3;
    int max_iters = 500;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    // (start iteration, gamma in pixels), ascending
    std::vector<std::pair<int, double>> gamma_schedule = {{0, 1.5}};
    double convergence_tol = 1e-12;
    int patience = 50;
    std::uint64_t seed = 0;
};

inline void validate_config(const OptimConfig& cfg) {
    if (!(cfg.learning_rate > 0)) throw std::invalid_argument("learning rate must be > 0");
    if (!(cfg.adam_beta1 >= 0 && cfg.adam_beta1 < 1 && cfg.adam_beta2 >= 0 && cfg.adam_beta2 < 1))
        throw std::invalid_argument("adam betas must lie in [0, 1)");
    if (!(cfg.adam_eps > 0)) throw std::invalid_argument("adam eps must be > 0");
}

/// First/second-moment Adam state with bias correction.
struct AdamState {
    Eigen::ArrayXd m;
    Eigen::ArrayXd v;
    int t = 0;

    explicit AdamState(Eigen::Index n)
        : m(Eigen::ArrayXd::Zero(n)), v(Eigen::ArrayXd::Zero(n)) {}
};

inline void adam_update(AdamState& state, Eigen::Ref<Eigen::ArrayXd> params,
                        const Eigen::Ref<const Eigen::ArrayXd>& grads,
                        const OptimConfig& cfg, double lr_scale = 1.0) {
    if (params.size() != grads.size() || params.size() != state.m.size())
        throw std::invalid_argument("adam_update: shape mismatch");
    ++state.t;
    state.m = cfg.adam_beta1 * state.m + (1.0 - cfg.adam_beta1) * grads;
    state.v = cfg.adam_beta2 * state.v + (1.0 - cfg.adam_beta2) * grads.square();
    const double mc = 1.0 - std::pow(cfg.adam_beta1, state.t);
    const double vc = 1.0 - std::pow(cfg.adam_beta2, state.t);
    params -= (cfg.learning_rate * lr_scale) * (state.m / mc) /
              ((state.v / vc).sqrt() + cfg.adam_eps);
}

}  // namespace framerec
