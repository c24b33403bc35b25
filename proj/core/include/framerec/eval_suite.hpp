#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "framerec/adam.hpp"
#include "framerec/ffd.hpp"
#include "framerec/frame_synth.hpp"
#include "framerec/losses.hpp"
#include "framerec/metrics.hpp"
#include "framerec/template_builder.hpp"

namespace framerec {

struct SuiteView {
    double yaw_deg = 0.0;
    double pitch_deg = 0.0;
    double roll_deg = 0.0;
};

struct SuiteCase {
    std::string name;
    int style = 0;  // index into default_styles()
    std::vector<SuiteView> views;
    double noise_level = 0.0;
    LossWeights weights;  // defaults with any per-case overrides applied
    std::uint64_t seed = 0;
};

struct SuiteConfig {
    int resolution = 256;
    double camera_distance = 400.0;
    double fov_deg = 30.0;
    int max_iters = 300;
    std::vector<SuiteCase> cases;
};

/// Suite JSON: {"resolution", "camera_distance", "fov_deg", "max_iters",
/// "cases": [{"name", "style", "views": [{"yaw","pitch","roll"}],
/// "noise_level", "weights": {partial overrides}, "seed"}]}.
SuiteConfig load_suite(const std::string& path);
void save_suite(const SuiteConfig& config, const std::string& path);

struct CaseViewResult {
    std::string case_name;
    int style = 0;
    SuiteView view;
    bool ok = false;
    std::string error;
    double re = 0.0;
    double iou = 0.0;
    KeypointMetrics kp;
};

struct EvalReport {
    std::vector<CaseViewResult> rows;
    double mean_re = 0.0;
    double mean_iou = 0.0;
    double avg_error_pct = 0.0;
    double pck5 = 0.0;
    int failures = 0;
};

/// Per (case, view): synthesize the ground-truth frame, render it,
/// perturb its projected keypoints, reconstruct, and score RE / IoU /
/// keypoint metrics against the ground truth. One view failing is
/// recorded in its row and does not abort the suite.
EvalReport run_suite(const SuiteConfig& config, const TemplateModel& tmpl,
                     const FfdLattice& lattice, int threads = 1);

/// Writes report.json and report.csv under out_dir.
void save_report(const EvalReport& report, const std::string& out_dir);

}  // namespace framerec
