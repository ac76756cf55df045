#pragma once

#include <json.hpp>

#include "gerk/aggregation.hpp"
#include "gerk/eraser.hpp"
#include "gerk/gnn.hpp"
#include "gerk/graph.hpp"
#include "gerk/mlp.hpp"
#include "gerk/partition.hpp"

namespace gerk {

// Readers start from the value passed in and override only the keys present,
// so partial config files layer over defaults. Unknown keys are rejected.

void to_json(nlohmann::json& j, const GnnConfig& c);
void from_json(const nlohmann::json& j, GnnConfig& c);
void to_json(nlohmann::json& j, const PartitionConfig& c);
void from_json(const nlohmann::json& j, PartitionConfig& c);
void to_json(nlohmann::json& j, const OptAggrConfig& c);
void from_json(const nlohmann::json& j, OptAggrConfig& c);
void to_json(nlohmann::json& j, const MlpConfig& c);
void from_json(const nlohmann::json& j, MlpConfig& c);
void to_json(nlohmann::json& j, const EraserConfig& c);
void from_json(const nlohmann::json& j, EraserConfig& c);
void to_json(nlohmann::json& j, const SbmSpec& s);
void from_json(const nlohmann::json& j, SbmSpec& s);

}  // namespace gerk
