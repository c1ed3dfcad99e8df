#pragma once

#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "cotforge/errors.hpp"
#include "cotforge/record.hpp"
#include "cotforge/sha256.hpp"
#include "cotforge/version.hpp"

namespace cotforge {

/// Reproducibility record written beside every run's outputs: the resolved
/// configuration plus content digests of the files read and written.
struct RunManifest {
    std::string subcommand;
    ordered_json config = ordered_json::object();
    std::vector<std::pair<std::string, std::string>> inputs;   // (path, digest)
    std::vector<std::pair<std::string, std::string>> outputs;  // (path, digest)
    std::uint64_t seed = 0;
    double wall_clock_s = 0.0;

    void add_input(const std::string& path) { inputs.emplace_back(path, sha256_file(path)); }
    void add_output(const std::string& path) { outputs.emplace_back(path, sha256_file(path)); }
};

inline ordered_json to_json(const RunManifest& m) {
    auto files = [](const std::vector<std::pair<std::string, std::string>>& v) {
        ordered_json arr = ordered_json::array();
        for (const auto& [path, digest] : v) {
            arr.push_back(ordered_json{{"path", path}, {"digest", digest}});
        }
        return arr;
    };
    return ordered_json{
        {"subcommand", m.subcommand},
        {"version", kVersion},
        {"digest_algorithm", "sha256"},
        {"seed", m.seed},
        {"config", m.config},
        {"inputs", files(m.inputs)},
        {"outputs", files(m.outputs)},
        {"wall_clock_s", m.wall_clock_s},
    };
}

/// Manifests sit beside the primary output as <output>.manifest.json
/// (or manifest.json inside an output directory).
inline std::string manifest_path_for(const std::string& primary_output, bool is_directory = false) {
    return is_directory ? primary_output + "/manifest.json"
                        : primary_output + ".manifest.json";
}

inline void write_manifest(const RunManifest& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << to_json(m).dump(2) << '\n';
    if (!out) throw IoError("write failed for " + path);
}

}  // namespace cotforge
