#pragma once

#include "cib/dataset.hpp"
#include "cib/nets.hpp"
#include "cib/objective.hpp"
#include "cib/trainer.hpp"

#include <json.hpp>

#include <string>

// JSON forms of the configuration structs. `from_json` only overwrites keys
// that are present, so a default-constructed struct read from a partial
// document keeps its defaults for the rest.

namespace cib {

void to_json(nlohmann::json& j, const Hyper& h);
void from_json(const nlohmann::json& j, Hyper& h);

void to_json(nlohmann::json& j, const ObjectiveOptions& o);
void from_json(const nlohmann::json& j, ObjectiveOptions& o);

void to_json(nlohmann::json& j, const ModelConfig& c);
void from_json(const nlohmann::json& j, ModelConfig& c);

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

void to_json(nlohmann::json& j, const SplitSpec& s);
void from_json(const nlohmann::json& j, SplitSpec& s);

void to_json(nlohmann::json& j, const BenchmarkSpec& s);
void from_json(const nlohmann::json& j, BenchmarkSpec& s);

void to_json(nlohmann::json& j, const Standardizer& s);
void from_json(const nlohmann::json& j, Standardizer& s);

void to_json(nlohmann::json& j, const GridSpec& g);
void from_json(const nlohmann::json& j, GridSpec& g);

/// 16 hex digits of FNV-1a over the compact dump of `j`.
std::string config_hash(const nlohmann::json& j);

}  // namespace cib
