#include "framerec/eval_suite.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "framerec/pose.hpp"
#include "framerec/reconstruct.hpp"
#include "framerec/render.hpp"
#include "json.hpp"

namespace framerec {

namespace {

LossWeights weights_from_json(const nlohmann::json& j) {
    LossWeights w;
    if (j.contains("sym")) w.sym = j.at("sym").get<double>();
    if (j.contains("img")) w.img = j.at("img").get<double>();
    if (j.contains("sil")) w.sil = j.at("sil").get<double>();
    if (j.contains("kp")) w.kp = j.at("kp").get<double>();
    if (j.contains("sm")) w.sm = j.at("sm").get<double>();
    if (j.contains("avg")) w.avg = j.at("avg").get<double>();
    return w;
}

nlohmann::json weights_to_json(const LossWeights& w) {
    return {{"sym", w.sym}, {"img", w.img}, {"sil", w.sil},
            {"kp", w.kp},   {"sm", w.sm},   {"avg", w.avg}};
}

}  // namespace

SuiteConfig load_suite(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    nlohmann::json j;
    in >> j;

    SuiteConfig cfg;
    cfg.resolution = j.value("resolution", cfg.resolution);
    cfg.camera_distance = j.value("camera_distance", cfg.camera_distance);
    cfg.fov_deg = j.value("fov_deg", cfg.fov_deg);
    cfg.max_iters = j.value("max_iters", cfg.max_iters);
    for (const auto& jc : j.value("cases", nlohmann::json::array())) {
        SuiteCase c;
        c.name = jc.value("name", std::string("case") + std::to_string(cfg.cases.size()));
        c.style = jc.value("style", 0);
        c.noise_level = jc.value("noise_level", 0.0);
        c.seed = jc.value("seed", std::uint64_t{0});
        if (jc.contains("weights")) c.weights = weights_from_json(jc.at("weights"));
        for (const auto& jv : jc.value("views", nlohmann::json::array()))
            c.views.push_back({jv.value("yaw", 0.0), jv.value("pitch", 0.0),
                               jv.value("roll", 0.0)});
        cfg.cases.push_back(std::move(c));
    }
    return cfg;
}

void save_suite(const SuiteConfig& config, const std::string& path) {
    nlohmann::json cases = nlohmann::json::array();
    for (const auto& c : config.cases) {
        nlohmann::json views = nlohmann::json::array();
        for (const auto& v : c.views)
            views.push_back({{"yaw", v.yaw_deg}, {"pitch", v.pitch_deg}, {"roll", v.roll_deg}});
        cases.push_back({{"name", c.name},
                         {"style", c.style},
                         {"views", views},
                         {"noise_level", c.noise_level},
                         {"weights", weights_to_json(c.weights)},
                         {"seed", c.seed}});
    }
    nlohmann::json j = {{"resolution", config.resolution},
                        {"camera_distance", config.camera_distance},
                        {"fov_deg", config.fov_deg},
                        {"max_iters", config.max_iters},
                        {"cases", cases}};
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << "\n";
}

EvalReport run_suite(const SuiteConfig& config, const TemplateModel& tmpl,
                     const FfdLattice& lattice, int threads) {
    const std::vector<FrameParams> styles = default_styles();

    struct Job {
        const SuiteCase* c;
        SuiteView view;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (const auto& c : config.cases) {
        if (c.style < 0 || c.style >= static_cast<int>(styles.size()))
            throw std::invalid_argument("suite style index out of range");
        std::uint64_t k = 0;
        for (const auto& v : c.views) jobs.push_back({&c, v, c.seed + k++});
    }

    EvalReport report;
    report.rows.resize(jobs.size());

    ViewGrid grid = ViewGrid::paper_default();
    grid.resolution = config.resolution;
    grid.camera_distance = config.camera_distance;
    grid.fov_deg = config.fov_deg;

    const auto run_one = [&](size_t i) {
        const Job& job = jobs[i];
        CaseViewResult& row = report.rows[i];
        row.case_name = job.c->name;
        row.style = job.c->style;
        row.view = job.view;
        try {
            const auto [truth, spec] = synth_frame(styles[static_cast<size_t>(job.c->style)]);
            const Camera cam =
                grid_camera(grid, job.view.yaw_deg, job.view.pitch_deg, job.view.roll_deg);
            const Image image =
                render_hard(cam, truth, Vec3(0.10, 0.10, 0.12), Vec3(1, 1, 1));
            const Keypoints2D truth_kp = proj_keypoints(cam, tmpl, &truth.vertices);
            const Keypoints2D noisy_kp =
                perturb_keypoints(truth_kp, job.c->noise_level, job.seed);

            OptimConfig deform_cfg = default_deform_config();
            deform_cfg.max_iters = config.max_iters;
            deform_cfg.gamma_schedule = {{0, 1.5},
                                         {(config.max_iters * 2) / 5, 0.75},
                                         {(config.max_iters * 4) / 5, 0.375}};
            deform_cfg.seed = job.seed;

            const ReconstructionResult res =
                reconstruct(image, noisy_kp, tmpl, lattice, job.c->weights, deform_cfg,
                            nullptr, config.fov_deg);

            row.re = reconstruction_error(res.mesh, truth);
            const Image recon_sil =
                render_hard_silhouette(cam, res.mesh.vertices, res.mesh.faces);
            row.iou = mask_iou(recon_sil, silhouette_from_image(image, Vec3(1, 1, 1)));
            row.kp = keypoint_error(proj_keypoints(cam, tmpl, &res.mesh.vertices), truth_kp);
            row.ok = true;
        } catch (const std::exception& e) {
            row.ok = false;
            row.error = e.what();
        }
    };

    const int workers = std::max(1, std::min<int>(threads, static_cast<int>(jobs.size())));
    if (workers <= 1) {
        for (size_t i = 0; i < jobs.size(); ++i) run_one(i);
    } else {
        std::atomic<size_t> next{0};
        std::vector<std::thread> pool;
        for (int t = 0; t < workers; ++t)
            pool.emplace_back([&] {
                for (size_t i = next.fetch_add(1); i < jobs.size(); i = next.fetch_add(1))
                    run_one(i);
            });
        for (auto& t : pool) t.join();
    }

    int ok_count = 0;
    double err_weighted = 0.0, pck_weighted = 0.0;
    for (const auto& row : report.rows) {
        if (!row.ok) {
            ++report.failures;
            continue;
        }
        report.mean_re += row.re;
        report.mean_iou += row.iou;
        err_weighted += row.kp.avg_error_pct;
        pck_weighted += row.kp.pck5;
        ++ok_count;
    }
    if (ok_count > 0) {
        report.mean_re /= ok_count;
        report.mean_iou /= ok_count;
        report.avg_error_pct = err_weighted / ok_count;
        report.pck5 = pck_weighted / ok_count;
    }
    return report;
}

void save_report(const EvalReport& report, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);

    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : report.rows) {
        rows.push_back({{"case", row.case_name},
                        {"style", row.style},
                        {"yaw", row.view.yaw_deg},
                        {"pitch", row.view.pitch_deg},
                        {"roll", row.view.roll_deg},
                        {"ok", row.ok},
                        {"error", row.error},
                        {"re", row.re},
                        {"iou", row.iou},
                        {"kp_avg_error_pct", row.kp.avg_error_pct},
                        {"kp_pck5", row.kp.pck5}});
    }
    nlohmann::json j = {{"rows", rows},
                        {"mean_re", report.mean_re},
                        {"mean_iou", report.mean_iou},
                        {"avg_error_pct", report.avg_error_pct},
                        {"pck5", report.pck5},
                        {"failures", report.failures}};
    {
        std::ofstream out(out_dir + "/report.json");
        if (!out) throw std::runtime_error("cannot write report.json in " + out_dir);
        out << j.dump(2) << "\n";
    }

    std::ofstream csv(out_dir + "/report.csv");
    if (!csv) throw std::runtime_error("cannot write report.csv in " + out_dir);
    csv << "case,style,yaw,pitch,roll,ok,re,iou,kp_avg_error_pct,kp_pck5\n";
    char line[512];
    for (const auto& row : report.rows) {
        std::snprintf(line, sizeof line, "%s,%d,%g,%g,%g,%d,%.9g,%.9g,%.9g,%.9g\n",
                      row.case_name.c_str(), row.style, row.view.yaw_deg,
                      row.view.pitch_deg, row.view.roll_deg, row.ok ? 1 : 0, row.re,
                      row.iou, row.kp.avg_error_pct, row.kp.pck5);
        csv << line;
    }
}

}  // namespace framerec
