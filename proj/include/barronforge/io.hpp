#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "barronforge/constructor.hpp"
#include "barronforge/network.hpp"
#include "barronforge/spectral.hpp"

namespace barronforge {

/// {"dim", "domain": {"lo", "hi"}, "modes": [{"xi", "amplitude", "phase"}]}.
/// Rejects missing fields, wrong lengths and non-finite numbers.
SpectralTarget target_from_json(const nlohmann::json& doc);
nlohmann::json target_to_json(const SpectralTarget& target);

/// {"input_dim", "layers": [{"w", "b", "activation": "relu" | "none"}]}.
ReluNetwork network_from_json(const nlohmann::json& doc);
nlohmann::json network_to_json(const ReluNetwork& net);

nlohmann::json report_to_json(const BuildReport& report);

nlohmann::json read_json_file(const std::filesystem::path& path);
/// Writes `doc` with two-space indentation and a trailing newline.
void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc);

/// Shortest decimal that reads back to the same double.
std::string format_double(double v);

}  // namespace barronforge
