#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "afc/classifier.hpp"

namespace afc {

inline constexpr int kModelFormatVersion = 1;

// Versioned JSON container. Doubles are written in shortest round-trip
// form and infinite log-probabilities as the string "-inf", so a saved
// model reloads bit-exactly.
std::string serialize_model(const TrainedModel& model);
TrainedModel deserialize_model(std::string_view text);

void save_model(const std::filesystem::path& path, const TrainedModel& model);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace afc
