#include <benchmark/benchmark.h>

#include "framerec/ffd.hpp"
#include "framerec/frame_synth.hpp"
#include "framerec/losses.hpp"
#include "framerec/render.hpp"
#include "framerec/template_builder.hpp"

using namespace framerec;

namespace {

struct Scene {
    Mesh mesh;
    KeypointSpec spec;
    Camera cam;

    Scene() {
        auto [m, s] = synth_frame(FrameParams{});
        mesh = std::move(m);
        spec = std::move(s);
        ViewGrid grid = ViewGrid::paper_default();
        grid.resolution = 256;
        cam = grid_camera(grid, 0.0, 0.0, 0.0);
    }
};

const Scene& scene() {
    static const Scene s;
    return s;
}

}  // namespace

static void BM_HardRender(benchmark::State& state) {
    const Scene& s = scene();
    for (auto _ : state) {
        Image img = render_hard(s.cam, s.mesh, Vec3(0.1, 0.1, 0.12), Vec3(1, 1, 1));
        benchmark::DoNotOptimize(img.data.data());
    }
}
BENCHMARK(BM_HardRender)->Unit(benchmark::kMillisecond);

static void BM_SoftForward(benchmark::State& state) {
    const Scene& s = scene();
    for (auto _ : state) {
        Image img = render_soft_silhouette(s.cam, s.mesh.vertices, s.mesh.faces, 1.5);
        benchmark::DoNotOptimize(img.data.data());
    }
}
BENCHMARK(BM_SoftForward)->Unit(benchmark::kMillisecond);

static void BM_SoftBackward(benchmark::State& state) {
    const Scene& s = scene();
    SoftRenderContext ctx;
    Image sil = render_soft_silhouette(s.cam, s.mesh.vertices, s.mesh.faces, 1.5, &ctx);
    Image grad = sil;
    std::fill(grad.data.begin(), grad.data.end(), 1.0);
    for (auto _ : state) {
        Eigen::MatrixX3d g = render_soft_backward(ctx, grad);
        benchmark::DoNotOptimize(g.data());
    }
}
BENCHMARK(BM_SoftBackward)->Unit(benchmark::kMillisecond);

static void BM_Deform(benchmark::State& state) {
    const Scene& s = scene();
    const FfdLattice lattice = build_lattice(s.mesh, {9, 7, 4});
    const DeformationField delta =
        DeformationField::Constant(lattice.num_control_points(), 3, 0.5);
    for (auto _ : state) {
        Eigen::MatrixX3d v = deform(lattice, delta);
        benchmark::DoNotOptimize(v.data());
    }
}
BENCHMARK(BM_Deform)->Unit(benchmark::kMillisecond);

static void BM_WeiszfeldStep(benchmark::State& state) {
    std::vector<FrameParams> styles = default_styles();
    const std::vector<Mesh> dataset = sample_dataset(styles, 3);
    const Mesh mean = arithmetic_mean(dataset);
    for (auto _ : state) {
        Mesh next = weiszfeld_step(mean, dataset);
        benchmark::DoNotOptimize(next.vertices.data());
    }
}
BENCHMARK(BM_WeiszfeldStep)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
