#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace rnn_surgery::cli {

// Shortest round-trip decimal, independent of the C++ locale.
std::string format_double(double v);

struct RunManifest {
    std::string command;
    nlohmann::json config;
    std::uint64_t seed = 0;
    std::vector<std::filesystem::path> outputs;

    nlohmann::json to_json() const;
};

std::string tool_version();
void write_manifest(const std::filesystem::path& path, const RunManifest& m);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace rnn_surgery::cli
