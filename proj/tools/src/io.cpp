#include "rnn_surgery_cli/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "rnn_surgery/errors.hpp"

namespace rnn_surgery::cli {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string tool_version() { return RNN_SURGERY_VERSION; }

nlohmann::json RunManifest::to_json() const {
    nlohmann::json j;
    j["command"] = command;
    j["config"] = config;
    j["seed"] = seed;
    j["tool_version"] = tool_version();
    j["outputs"] = nlohmann::json::array();
    for (const auto& p : outputs) j["outputs"].push_back(p.string());
    return j;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write " + path.string());
    out << text;
    if (!out) throw FormatError("failed writing " + path.string());
}

void write_manifest(const std::filesystem::path& path, const RunManifest& m) {
    write_text(path, m.to_json().dump(2) + "\n");
}

}  // namespace rnn_surgery::cli
