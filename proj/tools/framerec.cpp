// framerec: one binary for the whole pipeline. Offline phase:
// synth-dataset -> build-template (template + lattice). Online phase:
// render / estimate-pose / reconstruct / eval.

#include <algorithm>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "framerec/camera.hpp"
#include "framerec/eval_suite.hpp"
#include "framerec/ffd.hpp"
#include "framerec/frame_synth.hpp"
#include "framerec/losses.hpp"
#include "framerec/mesh.hpp"
#include "framerec/metrics.hpp"
#include "framerec/pose.hpp"
#include "framerec/reconstruct.hpp"
#include "framerec/render.hpp"
#include "framerec/template_builder.hpp"

namespace fs = std::filesystem;
using namespace framerec;

namespace {

constexpr const char* kVersion = "0.1.0";

// Flat JSON config support: {"option": value} or
// {"subcommand": {"option": value}}. Flags given on the command line win.
class JsonConfig : public CLI::Config {
public:
    std::string to_config(const CLI::App*, bool, bool, std::string) const override {
        return "{}\n";
    }

    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        nlohmann::json j;
        input >> j;
        if (!j.is_object()) throw CLI::ConversionError("config root must be a JSON object");
        std::vector<CLI::ConfigItem> items;
        const auto push = [&](std::vector<std::string> parents, const std::string& name,
                              const nlohmann::json& value) {
            CLI::ConfigItem item;
            item.parents = std::move(parents);
            item.name = name;
            if (value.is_array())
                for (const auto& el : value)
                    item.inputs.push_back(el.is_string() ? el.get<std::string>() : el.dump());
            else
                item.inputs.push_back(value.is_string() ? value.get<std::string>()
                                                        : value.dump());
            items.push_back(std::move(item));
        };
        for (const auto& [key, value] : j.items()) {
            if (value.is_object())
                for (const auto& [name, inner] : value.items()) push({key}, name, inner);
            else
                push({}, key, value);
        }
        return items;
    }
};

struct ViewFile {
    Keypoints2D keypoints;
    bool has_camera = false;
    Camera camera;
};

// per-view keypoint JSON as written by the renderer:
// {"image", "camera": {...}, "keypoints": [[u,v] x 42]}
ViewFile load_view_file(const std::string& path, int width, int height) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    nlohmann::json j;
    in >> j;

    ViewFile out;
    const auto& kps = j.at("keypoints");
    if (static_cast<int>(kps.size()) != kNumKeypoints)
        throw std::runtime_error(path + ": expected 42 keypoints");
    for (int i = 0; i < kNumKeypoints; ++i) {
        out.keypoints.points(i, 0) = kps[static_cast<size_t>(i)].at(0).get<double>();
        out.keypoints.points(i, 1) = kps[static_cast<size_t>(i)].at(1).get<double>();
    }
    if (j.contains("camera")) {
        out.camera = camera_from_json_str(j.at("camera").dump(), width, height);
        out.has_camera = true;
    }
    return out;
}

std::vector<double> parse_grid_list(const std::string& csv, const char* what) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) out.push_back(std::stod(tok));
    if (out.empty()) throw std::runtime_error(std::string("empty ") + what + " list");
    return out;
}

TemplateModel load_template(const std::string& mesh_path, const std::string& spec_path) {
    TemplateModel tmpl;
    tmpl.mesh = load_obj(mesh_path);
    tmpl.keypoints = load_keypoint_spec(spec_path);
    validate_spec(tmpl.keypoints, tmpl.mesh.vertices.rows());
    return tmpl;
}

void log_line(bool verbose, const nlohmann::json& j) {
    if (verbose) std::printf("%s\n", j.dump().c_str());
}

int cmd_synth_dataset(const std::string& out_dir, int sizes, bool verbose) {
    fs::create_directories(out_dir);
    const std::vector<FrameParams> styles = default_styles();
    const std::vector<Mesh> dataset = sample_dataset(styles, sizes);

    const auto [base, spec] = synth_frame(styles.front());
    (void)base;
    save_keypoint_spec(spec, (fs::path(out_dir) / "spec.json").string());

    nlohmann::json manifest = nlohmann::json::array();
    for (size_t s = 0; s < styles.size(); ++s)
        for (int k = 0; k < sizes; ++k) {
            char name[64];
            std::snprintf(name, sizeof name, "style%zu_size%d.obj", s, k);
            const Mesh& mesh = dataset[s * static_cast<size_t>(sizes) + static_cast<size_t>(k)];
            save_obj(mesh, (fs::path(out_dir) / name).string());
            manifest.push_back(name);
        }
    std::ofstream mout((fs::path(out_dir) / "dataset_manifest.json").string());
    mout << manifest.dump(2) << "\n";
    log_line(verbose, {{"event", "synth-dataset"},
                       {"meshes", dataset.size()},
                       {"out", out_dir}});
    return 0;
}

std::vector<Mesh> load_dataset_dir(const std::string& dir) {
    std::vector<std::string> names;
    const fs::path manifest = fs::path(dir) / "dataset_manifest.json";
    if (fs::exists(manifest)) {
        std::ifstream in(manifest);
        nlohmann::json j;
        in >> j;
        for (const auto& el : j) names.push_back(el.get<std::string>());
    } else {
        for (const auto& entry : fs::directory_iterator(dir))
            if (entry.path().extension() == ".obj")
                names.push_back(entry.path().filename().string());
        std::sort(names.begin(), names.end());
    }
    if (names.empty()) throw std::runtime_error("no meshes found in " + dir);
    std::vector<Mesh> dataset;
    dataset.reserve(names.size());
    for (const auto& name : names) dataset.push_back(load_obj((fs::path(dir) / name).string()));
    return dataset;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"3D eyeglasses-frame reconstruction pipeline"};
    app.require_subcommand(1);
    app.set_config("--config")->check(CLI::ExistingFile);
    app.config_formatter(std::make_shared<JsonConfig>());

    int threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads < 1) threads = 1;
    bool verbose = false;
    app.add_option("--threads", threads, "worker thread cap")->capture_default_str();
    app.add_flag("--verbose", verbose, "JSON-lines progress logging");

    // version
    app.add_subcommand("version", "print the version");

    // synth-dataset
    auto* synth = app.add_subcommand("synth-dataset", "generate the procedural mesh dataset");
    std::string synth_out;
    int synth_sizes = 9;
    synth->add_option("--out", synth_out, "output directory")->required();
    synth->add_option("--sizes", synth_sizes, "size variants per style")->capture_default_str();

    // build-template
    auto* btpl = app.add_subcommand("build-template", "geometric-median template from a dataset");
    std::string btpl_dataset, btpl_out, btpl_spec, btpl_lattice;
    double btpl_tol = -1.0;
    int btpl_maxiter = 200;
    btpl->add_option("--dataset", btpl_dataset, "dataset directory")->required();
    btpl->add_option("--out", btpl_out, "template OBJ path")->required();
    btpl->add_option("--keypoints", btpl_spec, "keypoint spec JSON path")->required();
    btpl->add_option("--lattice", btpl_lattice, "also write the FFD lattice here");
    btpl->add_option("--tol", btpl_tol, "convergence tol (default 1e-6 * diag)");
    btpl->add_option("--max-iter", btpl_maxiter, "iteration cap")->capture_default_str();

    // render
    auto* rend = app.add_subcommand("render", "render a view grid with keypoint annotations");
    std::string rend_mesh, rend_spec, rend_out;
    std::string rend_yaw, rend_pitch, rend_roll;
    int rend_res = 1024;
    double rend_dist = 400.0, rend_fov = 30.0;
    rend->add_option("--mesh", rend_mesh, "mesh OBJ")->required();
    rend->add_option("--keypoints", rend_spec, "keypoint spec JSON")->required();
    rend->add_option("--out", rend_out, "output directory")->required();
    rend->add_option("--yaw", rend_yaw, "comma-separated yaw degrees (default paper grid)");
    rend->add_option("--pitch", rend_pitch, "comma-separated pitch degrees");
    rend->add_option("--roll", rend_roll, "comma-separated roll degrees");
    rend->add_option("--resolution", rend_res, "image size in pixels")->capture_default_str();
    rend->add_option("--distance", rend_dist, "camera distance, mm")->capture_default_str();
    rend->add_option("--fov", rend_fov, "vertical field of view, degrees")->capture_default_str();

    // estimate-pose
    auto* pose = app.add_subcommand("estimate-pose", "camera extrinsics from 2D keypoints");
    std::string pose_tpl, pose_spec, pose_kp, pose_out;
    double pose_fov = 30.0;
    int pose_w = 1024, pose_h = 1024, pose_iters = 2000;
    pose->add_option("--template", pose_tpl, "template OBJ")->required();
    pose->add_option("--spec", pose_spec, "keypoint spec JSON")->required();
    pose->add_option("--keypoints", pose_kp, "observed keypoint JSON")->required();
    pose->add_option("--out", pose_out, "pose JSON output")->required();
    pose->add_option("--fov", pose_fov, "fov fallback when the keypoint file has no camera")
        ->capture_default_str();
    pose->add_option("--width", pose_w, "image width")->capture_default_str();
    pose->add_option("--height", pose_h, "image height")->capture_default_str();
    pose->add_option("--iters", pose_iters, "iterations per start")->capture_default_str();

    // reconstruct
    auto* rec = app.add_subcommand("reconstruct", "single-view template deformation");
    std::string rec_image, rec_kp, rec_tpl, rec_spec, rec_lattice, rec_weights;
    std::string rec_out, rec_history, rec_delta, rec_pose;
    int rec_iters = 500;
    double rec_fov = 30.0;
    rec->add_option("--image", rec_image, "input P6 image")->required();
    rec->add_option("--keypoints", rec_kp, "observed keypoint JSON")->required();
    rec->add_option("--template", rec_tpl, "template OBJ")->required();
    rec->add_option("--spec", rec_spec, "keypoint spec JSON")->required();
    rec->add_option("--lattice", rec_lattice, "FFD lattice JSON")->required();
    rec->add_option("--weights", rec_weights, "loss weight JSON (default paper weights)");
    rec->add_option("--out", rec_out, "reconstructed mesh OBJ")->required();
    rec->add_option("--history", rec_history, "per-iteration loss history JSON");
    rec->add_option("--delta", rec_delta, "deformation field JSON");
    rec->add_option("--fixed-pose", rec_pose, "skip pose estimation, use this pose JSON");
    rec->add_option("--iters", rec_iters, "deformer iterations")->capture_default_str();
    rec->add_option("--fov", rec_fov, "fov fallback when the keypoint file has no camera")
        ->capture_default_str();

    // eval
    auto* ev = app.add_subcommand("eval", "run an evaluation suite");
    std::string ev_suite, ev_out, ev_tpl, ev_spec, ev_lattice;
    ev->add_option("--suite", ev_suite, "suite JSON")->required();
    ev->add_option("--out", ev_out, "report directory")->required();
    ev->add_option("--template", ev_tpl, "template OBJ")->required();
    ev->add_option("--spec", ev_spec, "keypoint spec JSON")->required();
    ev->add_option("--lattice", ev_lattice, "FFD lattice JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return 2;
    }

    try {
        if (app.got_subcommand("version")) {
            std::printf("framerec %s\n", kVersion);
            return 0;
        }

        if (app.got_subcommand(synth)) return cmd_synth_dataset(synth_out, synth_sizes, verbose);

        if (app.got_subcommand(btpl)) {
            const std::vector<Mesh> dataset = load_dataset_dir(btpl_dataset);
            const fs::path spec_src = fs::path(btpl_dataset) / "spec.json";
            if (!fs::exists(spec_src))
                throw std::runtime_error("dataset is missing spec.json: " + spec_src.string());
            const KeypointSpec spec = load_keypoint_spec(spec_src.string());
            const TemplateModel tmpl =
                btpl_tol > 0 ? build_template(dataset, spec, btpl_tol, btpl_maxiter)
                             : build_template(dataset, spec);
            save_obj(tmpl.mesh, btpl_out);
            save_keypoint_spec(tmpl.keypoints, btpl_spec);
            if (!btpl_lattice.empty())
                save_lattice(build_lattice(tmpl.mesh, {9, 7, 4}), btpl_lattice);
            log_line(verbose, {{"event", "build-template"},
                               {"iterations", tmpl.iterations},
                               {"dataset_hash", tmpl.dataset_hash}});
            return 0;
        }

        if (app.got_subcommand(rend)) {
            const Mesh mesh = load_obj(rend_mesh);
            const KeypointSpec spec = load_keypoint_spec(rend_spec);
            validate_spec(spec, mesh.vertices.rows());
            ViewGrid grid = ViewGrid::paper_default();
            if (!rend_yaw.empty()) grid.yaw_deg = parse_grid_list(rend_yaw, "yaw");
            if (!rend_pitch.empty()) grid.pitch_deg = parse_grid_list(rend_pitch, "pitch");
            if (!rend_roll.empty()) grid.roll_deg = parse_grid_list(rend_roll, "roll");
            grid.resolution = rend_res;
            grid.camera_distance = rend_dist;
            grid.fov_deg = rend_fov;
            const auto manifest = generate_views(mesh, spec, grid, rend_out, threads);
            log_line(verbose, {{"event", "render"}, {"views", manifest.size()}});
            return 0;
        }

        if (app.got_subcommand(pose)) {
            const TemplateModel tmpl = load_template(pose_tpl, pose_spec);
            const ViewFile view = load_view_file(pose_kp, pose_w, pose_h);
            const double fov = view.has_camera ? view.camera.fov_deg : pose_fov;
            OptimConfig cfg = default_pose_config();
            cfg.max_iters = pose_iters;
            const PoseEstimate est =
                estimate_pose(tmpl, view.keypoints, cfg, fov, pose_w, pose_h);
            std::ofstream out(pose_out);
            if (!out) throw std::runtime_error("cannot write " + pose_out);
            nlohmann::json j = nlohmann::json::parse(camera_to_json(est.camera));
            j["final_reproj_error"] = est.final_reproj_error;
            j["iterations"] = est.iterations;
            j["converged"] = est.converged;
            j["multistart_gap"] = est.multistart_gap;
            out << j.dump(2) << "\n";
            log_line(verbose, {{"event", "estimate-pose"},
                               {"reproj_error", est.final_reproj_error},
                               {"converged", est.converged}});
            return 0;
        }

        if (app.got_subcommand(rec)) {
            const Image image = read_pnm(rec_image);
            const TemplateModel tmpl = load_template(rec_tpl, rec_spec);
            const ViewFile view = load_view_file(rec_kp, image.width, image.height);
            const FfdLattice lattice = load_lattice(rec_lattice, tmpl.mesh);
            const LossWeights weights =
                rec_weights.empty() ? LossWeights{} : load_weights(rec_weights);

            OptimConfig cfg = default_deform_config();
            cfg.max_iters = rec_iters;
            cfg.gamma_schedule = {
                {0, 1.5}, {(rec_iters * 2) / 5, 0.75}, {(rec_iters * 4) / 5, 0.375}};

            Camera fixed;
            const Camera* fixed_ptr = nullptr;
            if (!rec_pose.empty()) {
                std::ifstream in(rec_pose);
                if (!in) throw std::runtime_error("cannot read " + rec_pose);
                std::stringstream buf;
                buf << in.rdbuf();
                fixed = camera_from_json_str(buf.str(), image.width, image.height);
                fixed_ptr = &fixed;
            }
            const double fov = view.has_camera ? view.camera.fov_deg : rec_fov;

            const ReconstructionResult res = reconstruct(
                image, view.keypoints, tmpl, lattice, weights, cfg, fixed_ptr, fov);
            save_obj(res.mesh, rec_out);
            if (!rec_history.empty()) save_history(res.loss_history, rec_history);
            if (!rec_delta.empty()) save_delta(res.delta, rec_delta);
            if (verbose)
                for (const auto& it : res.loss_history)
                    log_line(true, {{"event", "iteration"},
                                    {"iteration", it.iteration},
                                    {"total", it.total},
                                    {"gamma_px", it.gamma_px}});
            log_line(verbose, {{"event", "reconstruct"},
                               {"iterations", res.loss_history.size()},
                               {"final_total",
                                res.loss_history.empty() ? 0.0 : res.loss_history.back().total}});
            return 0;
        }

        if (app.got_subcommand(ev)) {
            const TemplateModel tmpl = load_template(ev_tpl, ev_spec);
            const FfdLattice lattice = load_lattice(ev_lattice, tmpl.mesh);
            const SuiteConfig suite = load_suite(ev_suite);
            const EvalReport report = run_suite(suite, tmpl, lattice, threads);
            save_report(report, ev_out);
            log_line(verbose, {{"event", "eval"},
                               {"rows", report.rows.size()},
                               {"failures", report.failures},
                               {"mean_re", report.mean_re},
                               {"mean_iou", report.mean_iou}});
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
