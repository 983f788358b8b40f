#pragma once

#include "cib/dataset.hpp"
#include "cib/nets.hpp"
#include "cib/trainer.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>

namespace cib {

/// Everything needed to reuse a trained model on the data it was fitted on:
/// parameters, the configs that produced them, the split and the covariate
/// transform.
struct Checkpoint {
  CibModel model;
  TrainConfig train;
  SplitSpec split;
  Standardizer standardizer;
  std::uint64_t seed = 0;
  int best_iteration = -1;
};

/// {"spec": ModelConfig, "networks": {group: {name: {"shape", "values"}}}}
nlohmann::ordered_json model_to_json(const CibModel& model);
CibModel model_from_json(const nlohmann::json& j);

nlohmann::ordered_json to_json(const Checkpoint& c);
Checkpoint checkpoint_from_json(const nlohmann::json& j);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace cib
