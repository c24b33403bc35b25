#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "framerec/eval_suite.hpp"
#include "framerec/mesh.hpp"

#ifndef FRAMEREC_BIN
#error "FRAMEREC_BIN must point at the CLI binary"
#endif

using namespace framerec;
namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
    const std::string cmd = std::string(FRAMEREC_BIN) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("version exits zero") { CHECK(run("version") == 0); }

TEST_CASE("usage errors exit with code 2") {
    CHECK(run("reconstruct") == 2);                       // missing required flags
    CHECK(run("no-such-command") == 2);                   // unknown command
    CHECK(run("synth-dataset") == 2);                     // missing --out
}

TEST_CASE("domain errors exit with code 1") {
    CHECK(run("build-template --dataset /nonexistent-dir --out /tmp/t.obj "
              "--keypoints /tmp/s.json") == 1);
}

TEST_CASE("full pipeline smoke: synth -> template -> render -> reconstruct -> eval") {
    const fs::path root = fs::temp_directory_path() / "framerec_test_cli";
    fs::remove_all(root);
    fs::create_directories(root);
    const auto p = [&](const char* n) { return (root / n).string(); };

    // dataset (6 styles x 1 size keeps it quick)
    REQUIRE(run("synth-dataset --out " + p("ds") + " --sizes 1") == 0);
    CHECK(fs::exists(root / "ds" / "spec.json"));
    int obj_count = 0;
    for (const auto& e : fs::directory_iterator(root / "ds"))
        if (e.path().extension() == ".obj") ++obj_count;
    CHECK(obj_count == 6);

    // template + lattice
    REQUIRE(run("build-template --dataset " + p("ds") + " --out " + p("template.obj") +
                " --keypoints " + p("spec.json") + " --lattice " + p("lattice.json")) == 0);
    const Mesh tmpl = load_obj(p("template.obj"));
    CHECK(tmpl.num_vertices() == 13768);
    CHECK(tmpl.num_faces() == 15664);

    // one rendered view with keypoints
    REQUIRE(run("render --mesh " + p("template.obj") + " --keypoints " + p("spec.json") +
                " --out " + p("views") + " --yaw 0 --pitch 0 --roll -1 "
                "--resolution 96") == 0);
    fs::path image, kp;
    for (const auto& e : fs::directory_iterator(root / "views")) {
        if (e.path().extension() == ".ppm") image = e.path();
        if (e.path().extension() == ".json" && e.path().filename() != "manifest.json")
            kp = e.path();
    }
    REQUIRE(!image.empty());
    REQUIRE(!kp.empty());

    // pose estimation from the stored keypoints
    REQUIRE(run("estimate-pose --template " + p("template.obj") + " --spec " +
                p("spec.json") + " --keypoints " + kp.string() + " --out " +
                p("pose.json") + " --width 96 --height 96") == 0);
    CHECK(fs::exists(root / "pose.json"));

    // short reconstruction
    REQUIRE(run("reconstruct --image " + image.string() + " --keypoints " + kp.string() +
                " --template " + p("template.obj") + " --spec " + p("spec.json") +
                " --lattice " + p("lattice.json") + " --out " + p("recon.obj") +
                " --history " + p("history.json") + " --delta " + p("delta.json") +
                " --iters 3") == 0);
    const Mesh recon = load_obj(p("recon.obj"));
    CHECK(recon.faces == tmpl.faces);
    CHECK(fs::exists(root / "history.json"));
    CHECK(fs::exists(root / "delta.json"));

    // tiny eval suite
    SuiteConfig cfg;
    cfg.resolution = 64;
    cfg.max_iters = 2;
    SuiteCase c;
    c.name = "cli";
    c.style = 0;
    c.views = {{0, 0, 0}};
    cfg.cases.push_back(c);
    save_suite(cfg, p("suite.json"));
    REQUIRE(run("eval --suite " + p("suite.json") + " --out " + p("report") +
                " --template " + p("template.obj") + " --spec " + p("spec.json") +
                " --lattice " + p("lattice.json")) == 0);
    CHECK(fs::exists(root / "report" / "report.json"));
    CHECK(fs::exists(root / "report" / "report.csv"));

    SUBCASE("re-running a command overwrites with identical bytes") {
        const std::string first = slurp(root / "recon.obj");
        REQUIRE(run("reconstruct --image " + image.string() + " --keypoints " +
                    kp.string() + " --template " + p("template.obj") + " --spec " +
                    p("spec.json") + " --lattice " + p("lattice.json") + " --out " +
                    p("recon.obj") + " --iters 3") == 0);
        CHECK(slurp(root / "recon.obj") == first);
    }

    fs::remove_all(root);
}
