#pragma once

#include "cib/adam.hpp"
#include "cib/dataset.hpp"
#include "cib/nets.hpp"
#include "cib/objective.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cib {

enum class IterationUnit { step, epoch };

struct TrainConfig {
  double learning_rate = 1e-4;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  int max_iterations = 2000;
  /// `step`: one iteration is one minibatch update. `epoch`: max_iterations
  /// counts passes over the training split.
  IterationUnit unit = IterationUnit::step;
  int early_stop_patience = 10;
  int validation_interval = 20;
  int batch_size = 128;
  int critic_steps = 1;
  int critic_warmup = 20;
  Hyper hyper;
  ObjectiveOptions objective;
  std::uint64_t seed = 0;

  void validate() const;
  AdamConfig adam() const { return {learning_rate, adam_beta1, adam_beta2, adam_eps}; }
};

struct LogRecord {
  int iter = 0;
  LossReport loss;
  std::optional<double> valid_loss;
};

/// {"iter":..,"l0":..,"l1":..,"lC":..,"lM":..,"lV":..,"total":..,"criticObj":..[, "validLoss":..]}
std::string to_json_line(const LogRecord& r);

struct FitResult {
  CibModel model;  // parameters at the best validation check
  std::vector<LogRecord> log;
  int best_iteration = -1;
  double best_valid_loss = 0.0;
  bool stopped_early = false;
};

/// Mean factual negative log-likelihood with z = mu (no sampling noise).
double validation_loss(const CibModel& model, const ObservationalDataset& data);

/// Alternating optimization: critic ascent on the DV objective, then one
/// Adam step of encoder, heads and prior on the negated CIB objective.
/// The critic is not trained when lambda_m is zero since nothing reads it.
FitResult fit(CibModel model, const ObservationalDataset& train, const ObservationalDataset& valid,
              const TrainConfig& cfg);

struct GridCandidate {
  ModelConfig model;
  TrainConfig train;
};

struct GridResult {
  std::size_t best = 0;
  std::vector<double> valid_losses;
  FitResult best_fit;
};

/// Index of the lowest loss; ties go to the smallest key.
std::size_t select_best(std::span<const double> losses, std::span<const std::string> keys);

/// Fits every candidate (up to `jobs` at a time) and keeps the lowest
/// validation loss. Ties go to the candidate whose serialized config sorts
/// first, so the winner does not depend on the order of `space`.
GridResult grid_search(std::span<const GridCandidate> space, const ObservationalDataset& train,
                       const ObservationalDataset& valid, int jobs = 1);

/// Axes of the hyperparameter search. Empty axes keep the base value.
/// Coefficients must come from {0.01, 0.1, 1, 10, 100} and layer counts from
/// {1, 2, 3}; the hidden width is taken from the base model.
struct GridSpec {
  std::vector<double> beta;
  std::vector<double> lambda_m;
  std::vector<double> lambda_v;
  std::vector<int> hidden_layers;

  void validate() const;
  bool empty() const { return beta.empty() && lambda_m.empty() && lambda_v.empty() && hidden_layers.empty(); }
};

/// Cartesian product of the grid axes applied to the base configs.
std::vector<GridCandidate> expand_grid(const ModelConfig& model, const TrainConfig& train, const GridSpec& grid);

/// Model created from `config` with the "init" stream of `seed`.
CibModel initial_model(const ModelConfig& config, std::uint64_t seed);

}  // namespace cib
