#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <variant>

#include <nlohmann/json.hpp>

#include "rnn_surgery/network.hpp"

namespace rnn_surgery {

using AnyNetwork = std::variant<FeedforwardNet, RecurrentNet, ModifiedRecurrentNet>;

// "fnn", "rnn" or "mrnn"
std::string network_kind(const AnyNetwork& net);

// Doubles are written in shortest round-trip form, so reading back is bit-exact.
// seq_len fills the optional dims.N field.
nlohmann::json network_to_json(const AnyNetwork& net, std::optional<long> seq_len = std::nullopt);
AnyNetwork network_from_json(const nlohmann::json& j);

// dims.N if present
std::optional<long> network_seq_len(const nlohmann::json& j);

void write_network(const std::filesystem::path& path, const AnyNetwork& net,
                   std::optional<long> seq_len = std::nullopt);
AnyNetwork read_network(const std::filesystem::path& path);
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace rnn_surgery
