#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "framerec/mesh.hpp"

using namespace framerec;
namespace fs = std::filesystem;

namespace {

std::string temp_path(const char* name) {
    return (fs::temp_directory_path() / name).string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Mesh triangle() {
    Mesh m;
    m.vertices.resize(3, 3);
    m.vertices << 0, 0, 0, 1, 0, 0, 0, 1, 0;
    m.faces.resize(1, 3);
    m.faces << 0, 1, 2;
    return m;
}

}  // namespace

TEST_CASE("load_obj minimal") {
    const std::string path = temp_path("min.obj");
    {
        std::ofstream out(path);
        out << "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n";
    }
    const Mesh m = load_obj(path);
    CHECK(m.vertices.rows() == 3);
    CHECK(m.faces.rows() == 1);
    CHECK(m.faces(0, 0) == 0);
    CHECK(m.faces(0, 2) == 2);
}

TEST_CASE("load_obj rejects out-of-range face index") {
    const std::string path = temp_path("bad.obj");
    {
        std::ofstream out(path);
        out << "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 5\n";
    }
    CHECK_THROWS(load_obj(path));
}

TEST_CASE("load_obj rejects non-triangular faces") {
    const std::string path = temp_path("quad.obj");
    {
        std::ofstream out(path);
        out << "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n";
    }
    CHECK_THROWS(load_obj(path));
}

TEST_CASE("load_obj handles f v/t/n tokens and negative indices") {
    const std::string path = temp_path("tok.obj");
    {
        std::ofstream out(path);
        out << "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1/1/1 2/2/2 3/3/3\nf -3 -2 -1\n";
    }
    const Mesh m = load_obj(path);
    CHECK(m.faces.rows() == 2);
    CHECK(m.faces(1, 0) == 0);
    CHECK(m.faces(1, 2) == 2);
}

TEST_CASE("save_obj emits one line per vertex and face") {
    const std::string path = temp_path("tri.obj");
    save_obj(triangle(), path);
    const std::string text = slurp(path);
    size_t v = 0, f = 0;
    for (size_t i = 0; i + 1 < text.size(); ++i) {
        if ((i == 0 || text[i - 1] == '\n') && text[i] == 'v' && text[i + 1] == ' ') ++v;
        if ((i == 0 || text[i - 1] == '\n') && text[i] == 'f' && text[i + 1] == ' ') ++f;
    }
    CHECK(v == 3);
    CHECK(f == 1);
}

TEST_CASE("obj round trip on random mesh") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> coord(-100.0, 100.0);
    Mesh m;
    m.vertices.resize(50, 3);
    for (int i = 0; i < 50; ++i)
        for (int j = 0; j < 3; ++j) m.vertices(i, j) = coord(rng);
    m.faces.resize(30, 3);
    std::uniform_int_distribution<int> vid(0, 49);
    for (int i = 0; i < 30; ++i) {
        int a = vid(rng), b = vid(rng), c = vid(rng);
        while (b == a) b = vid(rng);
        while (c == a || c == b) c = vid(rng);
        m.faces.row(i) << a, b, c;
    }
    const std::string path = temp_path("round.obj");
    save_obj(m, path);
    const Mesh back = load_obj(path);
    REQUIRE(back.vertices.rows() == m.vertices.rows());
    CHECK((back.vertices - m.vertices).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(back.faces == m.faces);
}

TEST_CASE("save_obj deterministic bytes") {
    const std::string p1 = temp_path("det1.obj"), p2 = temp_path("det2.obj");
    Mesh m = triangle();
    m.vertices(0, 0) = 0.123456789123;
    save_obj(m, p1);
    save_obj(m, p2);
    CHECK(slurp(p1) == slurp(p2));
}

TEST_CASE("bbox_diagonal") {
    SUBCASE("unit cube corners") {
        Mesh m;
        m.vertices.resize(2, 3);
        m.vertices << 0, 0, 0, 1, 1, 1;
        m.faces.resize(0, 3);
        CHECK(bbox_diagonal(m) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
    }
    SUBCASE("single vertex") {
        Mesh m;
        m.vertices.resize(1, 3);
        m.vertices << 4, 5, 6;
        m.faces.resize(0, 3);
        CHECK(bbox_diagonal(m) == 0.0);
    }
    SUBCASE("matches brute-force min/max scan") {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> coord(-70.0, 70.0);
        Mesh m;
        m.vertices.resize(200, 3);
        for (int i = 0; i < 200; ++i)
            for (int j = 0; j < 3; ++j) m.vertices(i, j) = coord(rng);
        m.faces.resize(0, 3);
        double lo[3], hi[3];
        for (int j = 0; j < 3; ++j) {
            lo[j] = 1e300;
            hi[j] = -1e300;
        }
        for (int i = 0; i < 200; ++i)
            for (int j = 0; j < 3; ++j) {
                lo[j] = std::min(lo[j], m.vertices(i, j));
                hi[j] = std::max(hi[j], m.vertices(i, j));
            }
        double sq = 0.0;
        for (int j = 0; j < 3; ++j) sq += (hi[j] - lo[j]) * (hi[j] - lo[j]);
        CHECK(bbox_diagonal(m) == doctest::Approx(std::sqrt(sq)).epsilon(1e-12));
    }
    SUBCASE("translation invariant") {
        Mesh m = triangle();
        const double before = bbox_diagonal(m);
        m.vertices.rowwise() += Eigen::RowVector3d(10, -4, 2);
        CHECK(bbox_diagonal(m) == doctest::Approx(before).epsilon(1e-12));
    }
}

TEST_CASE("vertex_adjacency") {
    SUBCASE("one triangle: two neighbors each") {
        const AdjacencyTable adj = vertex_adjacency(triangle());
        REQUIRE(adj.size() == 3);
        for (const auto& nb : adj) CHECK(nb.size() == 2);
    }
    SUBCASE("shared edge raises valence to three") {
        Mesh m;
        m.vertices.resize(4, 3);
        m.vertices << 0, 0, 0, 1, 0, 0, 1, 1, 0, 0, 1, 0;
        m.faces.resize(2, 3);
        m.faces << 0, 1, 2, 0, 2, 3;
        const AdjacencyTable adj = vertex_adjacency(m);
        CHECK(adj[0].size() == 3);
        CHECK(adj[2].size() == 3);
        CHECK(adj[1].size() == 2);
        CHECK(adj[3].size() == 2);
    }
    SUBCASE("symmetric, sorted, self-loop free") {
        std::mt19937_64 rng(11);
        std::uniform_int_distribution<int> vid(0, 19);
        Mesh m;
        m.vertices = Eigen::MatrixX3d::Zero(20, 3);
        m.faces.resize(25, 3);
        for (int i = 0; i < 25; ++i) {
            int a = vid(rng), b = vid(rng), c = vid(rng);
            while (b == a) b = vid(rng);
            while (c == a || c == b) c = vid(rng);
            m.faces.row(i) << a, b, c;
        }
        const AdjacencyTable adj = vertex_adjacency(m);
        for (size_t i = 0; i < adj.size(); ++i) {
            CHECK(std::is_sorted(adj[i].begin(), adj[i].end()));
            CHECK(std::adjacent_find(adj[i].begin(), adj[i].end()) == adj[i].end());
            for (int j : adj[i]) {
                CHECK(j != static_cast<int>(i));
                const auto& back = adj[static_cast<size_t>(j)];
                CHECK(std::binary_search(back.begin(), back.end(), static_cast<int>(i)));
            }
        }
    }
}

TEST_CASE("validate_mesh rejects degenerate faces") {
    Mesh m = triangle();
    m.faces(0, 1) = 0;
    CHECK_THROWS(validate_mesh(m));
}
