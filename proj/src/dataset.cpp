#include "cib/dataset.hpp"

#include "cib/error.hpp"
#include "cib/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace cib {

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

constexpr const char* kOptionalRoles[] = {"ycf", "mu0", "mu1", "e"};

bool is_binary(double v) { return v == 0.0 || v == 1.0; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

Eigen::VectorXd gather(const Eigen::VectorXd& v, std::span<const Eigen::Index> rows) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out(static_cast<Eigen::Index>(i)) = v(rows[i]);
  return out;
}

Eigen::VectorXd stack(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  Eigen::VectorXd out(a.size() + b.size());
  out << a, b;
  return out;
}

}  // namespace

void ObservationalDataset::validate() const {
  const Eigen::Index n = x.rows();
  if (n == 0) throw DataError("dataset has no rows");
  auto check_len = [n](const Eigen::VectorXd& v, const char* name) {
    if (v.size() != n)
      throw DataError(std::string("column '") + name + "' has " + std::to_string(v.size()) + " rows, expected " +
                      std::to_string(n));
  };
  check_len(t, "t");
  check_len(yf, "yf");
  if (ycf) check_len(*ycf, "ycf");
  if (mu0) check_len(*mu0, "mu0");
  if (mu1) check_len(*mu1, "mu1");
  if (e) check_len(*e, "e");
  if (mu0.has_value() != mu1.has_value()) throw DataError("mu0 and mu1 must be given together");
  if (!all_finite(x)) throw DataError("covariates contain non-finite values");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!is_binary(t(i))) throw DataError("row " + std::to_string(i + 1) + ": t must be 0 or 1");
    if (e && !is_binary((*e)(i))) throw DataError("row " + std::to_string(i + 1) + ": e must be 0 or 1");
  }
  const Eigen::Index treated = treated_count();
  if (treated == 0 || treated == n) throw DataError("dataset needs both treated and control rows");
}

ObservationalDataset ObservationalDataset::subset(std::span<const Eigen::Index> rows) const {
  ObservationalDataset out;
  out.outcome = outcome;
  out.x.resize(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.x.row(static_cast<Eigen::Index>(i)) = x.row(rows[i]);
  out.t = gather(t, rows);
  out.yf = gather(yf, rows);
  if (ycf) out.ycf = gather(*ycf, rows);
  if (mu0) out.mu0 = gather(*mu0, rows);
  if (mu1) out.mu1 = gather(*mu1, rows);
  if (e) out.e = gather(*e, rows);
  return out;
}

ObservationalDataset ObservationalDataset::concat(const ObservationalDataset& other) const {
  if (other.x.cols() != x.cols()) throw DataError("cannot concatenate datasets with different covariate counts");
  ObservationalDataset out;
  out.outcome = outcome;
  out.x.resize(x.rows() + other.x.rows(), x.cols());
  out.x << x, other.x;
  out.t = stack(t, other.t);
  out.yf = stack(yf, other.yf);
  if (ycf && other.ycf) out.ycf = stack(*ycf, *other.ycf);
  if (mu0 && other.mu0) out.mu0 = stack(*mu0, *other.mu0);
  if (mu1 && other.mu1) out.mu1 = stack(*mu1, *other.mu1);
  if (e && other.e) out.e = stack(*e, *other.e);
  return out;
}

std::optional<Eigen::VectorXd> ObservationalDataset::true_ite() const {
  if (mu0 && mu1) return Eigen::VectorXd(*mu1 - *mu0);
  if (ycf) {
    Eigen::VectorXd tau(size());
    for (Eigen::Index i = 0; i < size(); ++i) tau(i) = t(i) > 0.5 ? yf(i) - (*ycf)(i) : (*ycf)(i) - yf(i);
    return tau;
  }
  return std::nullopt;
}

Eigen::Index ObservationalDataset::treated_count() const {
  return static_cast<Eigen::Index>((t.array() > 0.5).count());
}

DatasetSchema DatasetSchema::standard(int d_x, OutcomeKind outcome, bool ycf, bool mu, bool e) {
  DatasetSchema s;
  s.d_x = d_x;
  s.outcome = outcome;
  for (int j = 0; j < d_x; ++j) s.x_columns.push_back("x" + std::to_string(j));
  s.columns["t"] = "t";
  s.columns["yf"] = "yf";
  if (ycf) s.columns["ycf"] = "ycf";
  if (mu) {
    s.columns["mu0"] = "mu0";
    s.columns["mu1"] = "mu1";
  }
  if (e) s.columns["e"] = "e";
  return s;
}

DatasetSchema DatasetSchema::describe(const ObservationalDataset& ds) {
  return standard(ds.dim(), ds.outcome, ds.ycf.has_value(), ds.mu0.has_value(), ds.e.has_value());
}

ObservationalDataset load_csv(const std::filesystem::path& path, const DatasetSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  if (static_cast<int>(schema.x_columns.size()) != schema.d_x)
    throw DataError("schema lists " + std::to_string(schema.x_columns.size()) + " covariate columns but d_x = " +
                    std::to_string(schema.d_x));
  for (const char* role : {"t", "yf"})
    if (!schema.columns.contains(role)) throw DataError(std::string("schema does not map required role '") + role + "'");

  std::string header_line;
  if (!std::getline(in, header_line) || trim(header_line).empty()) throw DataError(path.string() + ": no data rows");
  const auto header = split_fields(header_line);
  auto find_column = [&](const std::string& name) -> std::size_t {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw DataError(path.string() + ": missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };

  std::vector<std::size_t> x_idx;
  for (const auto& name : schema.x_columns) x_idx.push_back(find_column(name));
  std::map<std::string, std::size_t> role_idx;
  for (const auto& [role, name] : schema.columns) role_idx[role] = find_column(name);

  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    const std::size_t row_no = rows.size() + 1;
    if (fields.size() != header.size())
      throw DataError(path.string() + ": row " + std::to_string(row_no) + " has " + std::to_string(fields.size()) +
                      " fields, header has " + std::to_string(header.size()));
    std::vector<double> values(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c) {
      double v = 0.0;
      const auto f = fields[c];
      auto res = std::from_chars(f.data(), f.data() + f.size(), v);
      if (f.empty() || res.ec != std::errc() || res.ptr != f.data() + f.size() || !std::isfinite(v))
        throw DataError(path.string() + ": row " + std::to_string(row_no) + ", column '" + std::string(header[c]) +
                        "': invalid value '" + std::string(f) + "'");
      values[c] = v;
    }
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw DataError(path.string() + ": no data rows");

  const auto n = static_cast<Eigen::Index>(rows.size());
  ObservationalDataset ds;
  ds.outcome = schema.outcome;
  ds.x.resize(n, schema.d_x);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int j = 0; j < schema.d_x; ++j) ds.x(i, j) = rows[i][x_idx[j]];
  auto column_of = [&](const std::string& role) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = rows[i][role_idx.at(role)];
    return v;
  };
  ds.t = column_of("t");
  ds.yf = column_of("yf");
  for (const char* role : kOptionalRoles) {
    if (!role_idx.contains(role)) continue;
    const std::string r = role;
    if (r == "ycf") ds.ycf = column_of(r);
    if (r == "mu0") ds.mu0 = column_of(r);
    if (r == "mu1") ds.mu1 = column_of(r);
    if (r == "e") ds.e = column_of(r);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!is_binary(ds.t(i)))
      throw DataError(path.string() + ": row " + std::to_string(i + 1) + ", column '" + schema.columns.at("t") +
                      "': treatment must be 0 or 1, got " + format_double(ds.t(i)));
    if (ds.e && !is_binary((*ds.e)(i)))
      throw DataError(path.string() + ": row " + std::to_string(i + 1) + ", column '" + schema.columns.at("e") +
                      "': randomized flag must be 0 or 1");
    if (schema.outcome == OutcomeKind::binary && !is_binary(ds.yf(i)))
      throw DataError(path.string() + ": row " + std::to_string(i + 1) + ": binary outcome must be 0 or 1");
  }
  ds.validate();
  return ds;
}

void write_csv(const std::filesystem::path& path, const ObservationalDataset& ds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  for (int j = 0; j < ds.dim(); ++j) out << 'x' << j << ',';
  out << "t,yf";
  if (ds.ycf) out << ",ycf";
  if (ds.mu0) out << ",mu0,mu1";
  if (ds.e) out << ",e";
  out << '\n';
  for (Eigen::Index i = 0; i < ds.size(); ++i) {
    for (int j = 0; j < ds.dim(); ++j) out << format_double(ds.x(i, j)) << ',';
    out << format_double(ds.t(i)) << ',' << format_double(ds.yf(i));
    if (ds.ycf) out << ',' << format_double((*ds.ycf)(i));
    if (ds.mu0) out << ',' << format_double((*ds.mu0)(i)) << ',' << format_double((*ds.mu1)(i));
    if (ds.e) out << ',' << format_double((*ds.e)(i));
    out << '\n';
  }
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

DatasetSchema read_schema(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open schema '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
    DatasetSchema s;
    s.d_x = j.at("d_x").get<int>();
    s.outcome = parse_outcome_kind(j.value("outcomeKind", std::string("continuous")));
    const auto& map = j.at("columnMap");
    if (map.contains("x")) {
      s.x_columns = map.at("x").get<std::vector<std::string>>();
    } else {
      for (int k = 0; k < s.d_x; ++k) s.x_columns.push_back("x" + std::to_string(k));
    }
    for (const auto& [role, name] : map.items())
      if (role != "x") s.columns[role] = name.get<std::string>();
    return s;
  } catch (const nlohmann::json::exception& ex) {
    throw DataError("schema '" + path.string() + "': " + ex.what());
  }
}

void write_schema(const std::filesystem::path& path, const DatasetSchema& schema) {
  nlohmann::ordered_json j;
  j["d_x"] = schema.d_x;
  j["outcomeKind"] = std::string(to_string(schema.outcome));
  nlohmann::ordered_json map;
  map["x"] = schema.x_columns;
  for (const auto& [role, name] : schema.columns) map[role] = name;
  j["columnMap"] = map;
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

ObservationalDataset load_dataset(const std::filesystem::path& path) {
  if (std::filesystem::is_directory(path)) return load_csv(path / "data.csv", read_schema(path / "schema.json"));
  return load_csv(path, read_schema(path.parent_path() / "schema.json"));
}

void SplitSpec::validate() const {
  if (!(train > 0.0 && valid > 0.0 && test > 0.0)) throw ConfigError("every split ratio must be positive");
  if (std::abs(train + valid + test - 1.0) > 1e-9) throw ConfigError("split ratios must sum to 1");
}

std::array<Eigen::Index, 3> split_sizes(Eigen::Index n, const SplitSpec& spec) {
  spec.validate();
  const double ratios[3] = {spec.train, spec.valid, spec.test};
  std::array<Eigen::Index, 3> sizes{};
  Eigen::Index assigned = 0;
  for (int i = 0; i < 3; ++i) {
    // the epsilon absorbs representation error such as 0.29 * 100 = 28.999...
    sizes[i] = static_cast<Eigen::Index>(std::floor(ratios[i] * static_cast<double>(n) + 1e-9));
    assigned += sizes[i];
  }
  for (int i = 0; assigned < n; i = (i + 1) % 3, ++assigned) ++sizes[i];
  for (auto s : sizes)
    if (s == 0) throw DataError("split of " + std::to_string(n) + " rows leaves an empty partition");
  return sizes;
}

Splits split(const ObservationalDataset& ds, const SplitSpec& spec) {
  const auto sizes = split_sizes(ds.size(), spec);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(ds.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  Rng rng = make_stream(spec.seed, "splits");
  std::shuffle(order.begin(), order.end(), rng);

  Splits out;
  auto it = order.begin();
  for (int i = 0; i < 3; ++i) {
    out.indices[i].assign(it, it + sizes[i]);
    std::sort(out.indices[i].begin(), out.indices[i].end());
    it += sizes[i];
  }
  out.train = ds.subset(out.indices[0]);
  out.valid = ds.subset(out.indices[1]);
  out.test = ds.subset(out.indices[2]);
  const auto treated = out.train.treated_count();
  if (treated == 0 || treated == out.train.size())
    throw DataError("training split lacks one of the treatment groups");
  return out;
}

Standardizer Standardizer::fit(const Tensor& x) {
  Standardizer s;
  const auto n = static_cast<double>(x.rows());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const auto col = x.col(j);
    const bool binary = col.unaryExpr([](double v) { return is_binary(v) ? 0.0 : 1.0; }).sum() == 0.0;
    double m = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) m += col(i);
    m /= n;
    double ss = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) ss += (col(i) - m) * (col(i) - m);
    const double sd = std::sqrt(ss / n);
    s.binary.push_back(binary);
    if (binary) {
      s.mean.push_back(0.0);
      s.scale.push_back(1.0);
    } else if (!(sd > 0.0)) {
      s.mean.push_back(0.0);
      s.scale.push_back(1.0);
      s.warnings.push_back("column " + std::to_string(j) + " has zero variance; left unscaled");
    } else {
      s.mean.push_back(m);
      s.scale.push_back(sd);
    }
  }
  return s;
}

Tensor Standardizer::apply(const Tensor& x) const {
  if (static_cast<std::size_t>(x.cols()) != mean.size())
    throw DataError("standardizer fitted on " + std::to_string(mean.size()) + " columns, got " +
                    std::to_string(x.cols()));
  Tensor out = x;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    if (mean[j] == 0.0 && scale[j] == 1.0) continue;
    out.col(j) = ((x.col(j).array() - mean[j]) / scale[j]).matrix();
  }
  return out;
}

ObservationalDataset Standardizer::apply(const ObservationalDataset& ds) const {
  ObservationalDataset out = ds;
  out.x = apply(ds.x);
  return out;
}

void BenchmarkSpec::validate() const {
  if (n < 50) throw ConfigError("benchmark needs n >= 50, got " + std::to_string(n));
  if (d_x < 2) throw ConfigError("benchmark needs d_x >= 2, got " + std::to_string(d_x));
  if (!(noise_sd >= 0.0)) throw ConfigError("noise_sd must be non-negative");
}

namespace {

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

Eigen::VectorXd unit_vector(int d, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd w(d);
  for (int j = 0; j < d; ++j) w(j) = normal(rng);
  return w / w.norm();
}

}  // namespace

BenchmarkSurfaces benchmark_surfaces(const Benchmark& b, const Tensor& x) {
  const Eigen::VectorXd a0 = x * b.w0;
  const Eigen::VectorXd a1 = x * b.w1;
  BenchmarkSurfaces s;
  s.mu0 = a0.array().sin().matrix();
  s.mu1 = (s.mu0.array() + 1.0 + a1.array().tanh()).matrix();
  return s;
}

Benchmark synthesize_benchmark(const BenchmarkSpec& spec) {
  spec.validate();
  Rng surfaces = make_stream(spec.seed, "benchmark.surfaces");
  Rng covariates = make_stream(spec.seed, "benchmark.covariates");
  Rng assignment = make_stream(spec.seed, "benchmark.assignment");
  Rng noise = make_stream(spec.seed, "benchmark.noise");

  Benchmark b;
  b.w0 = unit_vector(spec.d_x, surfaces);
  b.w1 = unit_vector(spec.d_x, surfaces);

  ObservationalDataset& ds = b.data;
  ds.outcome = OutcomeKind::continuous;
  ds.x = standard_normal(spec.n, spec.d_x, covariates);
  const auto s = benchmark_surfaces(b, ds.x);
  const Eigen::VectorXd a1 = ds.x * b.w1;

  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, spec.noise_sd);
  b.propensity.resize(spec.n);
  ds.t.resize(spec.n);
  ds.yf.resize(spec.n);
  Eigen::VectorXd ycf(spec.n);
  for (Eigen::Index i = 0; i < spec.n; ++i) {
    b.propensity(i) = std::clamp(sigmoid(spec.bias * a1(i)), 0.05, 0.95);
    ds.t(i) = unif(assignment) < b.propensity(i) ? 1.0 : 0.0;
    const double y0 = s.mu0(i) + (spec.noise_sd > 0.0 ? normal(noise) : 0.0);
    const double y1 = s.mu1(i) + (spec.noise_sd > 0.0 ? normal(noise) : 0.0);
    ds.yf(i) = ds.t(i) > 0.5 ? y1 : y0;
    ycf(i) = ds.t(i) > 0.5 ? y0 : y1;
  }
  ds.ycf = ycf;
  ds.mu0 = s.mu0;
  ds.mu1 = s.mu1;
  return b;
}

PreparedSplits prepare_splits(const ObservationalDataset& ds, const SplitSpec& spec) {
  PreparedSplits out;
  out.splits = split(ds, spec);
  out.standardizer = Standardizer::fit(out.splits.train.x);
  out.splits.train = out.standardizer.apply(out.splits.train);
  out.splits.valid = out.standardizer.apply(out.splits.valid);
  out.splits.test = out.standardizer.apply(out.splits.test);
  return out;
}

}  // namespace cib
