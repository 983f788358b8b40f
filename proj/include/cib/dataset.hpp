#pragma once

#include "cib/nets.hpp"
#include "cib/tensor.hpp"

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cib {

/// Factual observations plus whatever ground truth the source provides.
struct ObservationalDataset {
  Tensor x;                                 // [n, d_x]
  Eigen::VectorXd t;                        // {0,1}
  Eigen::VectorXd yf;                       // factual outcome
  std::optional<Eigen::VectorXd> ycf;       // counterfactual outcome
  std::optional<Eigen::VectorXd> mu0;       // noiseless potential outcomes
  std::optional<Eigen::VectorXd> mu1;
  std::optional<Eigen::VectorXd> e;         // 1 = row from the randomized subset
  OutcomeKind outcome = OutcomeKind::continuous;

  Eigen::Index size() const { return x.rows(); }
  int dim() const { return static_cast<int>(x.cols()); }

  /// Throws DataError on ragged columns, non-binary t/e, non-finite cells or
  /// a missing treatment group.
  void validate() const;
  ObservationalDataset subset(std::span<const Eigen::Index> rows) const;
  /// Rows stacked: `*this` then `other`.
  ObservationalDataset concat(const ObservationalDataset& other) const;

  /// mu1 - mu0 when present, otherwise derived from (yf, ycf, t).
  std::optional<Eigen::VectorXd> true_ite() const;
  Eigen::Index treated_count() const;
};

/// Maps dataset roles to CSV header names. Roles: t, yf, ycf, mu0, mu1, e;
/// covariates are listed in order.
struct DatasetSchema {
  int d_x = 0;
  OutcomeKind outcome = OutcomeKind::continuous;
  std::vector<std::string> x_columns;
  std::map<std::string, std::string> columns;

  /// x0..x{d_x-1}, t, yf and the requested optional columns under their role names.
  static DatasetSchema standard(int d_x, OutcomeKind outcome, bool ycf, bool mu, bool e);
  /// Schema describing exactly the columns `ds` carries.
  static DatasetSchema describe(const ObservationalDataset& ds);
};

/// Covariates, treatment and factual outcome are required; optional roles
/// are read when the schema maps them.
ObservationalDataset load_csv(const std::filesystem::path& path, const DatasetSchema& schema);
/// Shortest decimal that reads back to the same double.
std::string format_double(double v);

/// Writes the standard column layout with shortest round-trip decimals.
void write_csv(const std::filesystem::path& path, const ObservationalDataset& ds);

DatasetSchema read_schema(const std::filesystem::path& path);
void write_schema(const std::filesystem::path& path, const DatasetSchema& schema);

/// Directory form: `dir/data.csv` with `dir/schema.json`. A file path is
/// read with the schema next to it (`schema.json` in the same directory).
ObservationalDataset load_dataset(const std::filesystem::path& path);

struct SplitSpec {
  double train = 0.63;
  double valid = 0.27;
  double test = 0.10;
  std::uint64_t seed = 0;

  void validate() const;
};

/// floor(ratio * n) per split; leftover rows are handed out one at a time
/// in train, valid, test order.
std::array<Eigen::Index, 3> split_sizes(Eigen::Index n, const SplitSpec& spec);

struct Splits {
  ObservationalDataset train;
  ObservationalDataset valid;
  ObservationalDataset test;
  std::array<std::vector<Eigen::Index>, 3> indices;
};

Splits split(const ObservationalDataset& ds, const SplitSpec& spec);

/// Per-column affine map fitted on training covariates. Binary ({0,1})
/// and zero-variance columns are left as they are.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;
  std::vector<bool> binary;
  std::vector<std::string> warnings;

  static Standardizer fit(const Tensor& x);
  Tensor apply(const Tensor& x) const;
  ObservationalDataset apply(const ObservationalDataset& ds) const;
};

/// Splits with covariates standardized by statistics of the training rows.
struct PreparedSplits {
  Splits splits;
  Standardizer standardizer;
};

PreparedSplits prepare_splits(const ObservationalDataset& ds, const SplitSpec& spec);

struct BenchmarkSpec {
  Eigen::Index n = 1000;
  int d_x = 25;
  double bias = 2.0;  // selection strength kappa
  double noise_sd = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Benchmark {
  ObservationalDataset data;
  Eigen::VectorXd propensity;
  Eigen::VectorXd w0;  // unit direction of the control surface
  Eigen::VectorXd w1;  // unit direction of the effect and of selection
};

/// x ~ N(0, I); mu0 = sin(w0.x); mu1 = mu0 + 1 + tanh(w1.x);
/// p(t=1|x) = clip(sigmoid(kappa w1.x), 0.05, 0.95); outcomes get N(0, sd^2) noise.
Benchmark synthesize_benchmark(const BenchmarkSpec& spec);

/// Outcome surfaces of a benchmark evaluated at arbitrary covariates.
struct BenchmarkSurfaces {
  Eigen::VectorXd mu0;
  Eigen::VectorXd mu1;
};
BenchmarkSurfaces benchmark_surfaces(const Benchmark& b, const Tensor& x);

}  // namespace cib
