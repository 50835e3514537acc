#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>

#include "socmap/learners/model.hpp"
#include "socmap/learners/spec.hpp"

namespace socmap {

inline constexpr int kModelFormatVersion = 1;

nlohmann::json spec_to_json(const LearnerSpec& spec);
/// Missing fields keep their defaults; unknown keys are rejected.
LearnerSpec spec_from_json(const nlohmann::json& j);

nlohmann::json model_to_json(const TrainedModel& model);
TrainedModel model_from_json(const nlohmann::json& j);

/// CBOR-encoded model document with a format/version header. Doubles are
/// stored as IEEE binary64, so save -> load -> predict is bit-identical.
void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace socmap
