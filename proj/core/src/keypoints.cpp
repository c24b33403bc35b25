#include "framerec/keypoints.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace framerec {

void validate_spec(const KeypointSpec& spec, Eigen::Index num_vertices) {
    if (spec.indices.size() != kNumKeypoints)
        throw std::invalid_argument("keypoint spec must have 42 indices");
    if (spec.front_indices.size() != kNumFrontKeypoints ||
        spec.temple_indices.size() != kNumTempleKeypoints)
        throw std::invalid_argument("keypoint spec front/temple partition must be 30 + 12");
    if (spec.sym_pairs.size() != kNumSymPairs)
        throw std::invalid_argument("keypoint spec must have 21 symmetric pairs");

    std::set<int> all(spec.indices.begin(), spec.indices.end());
    if (all.size() != kNumKeypoints)
        throw std::invalid_argument("keypoint indices must be distinct");
    for (int i : spec.indices)
        if (i < 0 || i >= num_vertices)
            throw std::invalid_argument("keypoint index out of range");

    std::set<int> part(spec.front_indices.begin(), spec.front_indices.end());
    part.insert(spec.temple_indices.begin(), spec.temple_indices.end());
    if (part != all)
        throw std::invalid_argument("front + temple must partition the 42 keypoints");

    std::set<int> paired;
    for (const auto& p : spec.sym_pairs) {
        if (!all.count(p[0]) || !all.count(p[1]))
            throw std::invalid_argument("sym pair references a non-keypoint vertex");
        paired.insert(p[0]);
        paired.insert(p[1]);
    }
    if (paired != all)
        throw std::invalid_argument("sym pairs must cover all 42 keypoints");
}

void save_keypoint_spec(const KeypointSpec& spec, const std::string& path) {
    nlohmann::json j;
    j["indices"] = spec.indices;
    j["front"] = spec.front_indices;
    j["temple"] = spec.temple_indices;
    auto& pairs = j["sym_pairs"] = nlohmann::json::array();
    for (const auto& p : spec.sym_pairs) pairs.push_back({p[0], p[1]});
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << j.dump(2) << "\n";
}

KeypointSpec load_keypoint_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open keypoint spec: " + path);
    nlohmann::json j;
    in >> j;
    KeypointSpec spec;
    spec.indices = j.at("indices").get<std::vector<int>>();
    spec.front_indices = j.at("front").get<std::vector<int>>();
    spec.temple_indices = j.at("temple").get<std::vector<int>>();
    for (const auto& p : j.at("sym_pairs"))
        spec.sym_pairs.push_back({p.at(0).get<int>(), p.at(1).get<int>()});
    return spec;
}

}  // namespace framerec
