#include "amagold/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "amagold/errors.hpp"
#include "text_format.hpp"

namespace amagold {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Files

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file", path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("failed reading file", path);
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open file for writing", path);
  out << text;
  if (!out) throw IoError("failed writing file", path);
}

// ---------------------------------------------------------------------------
// Datasets

namespace {

struct ParsedRow {
  double label = 0.0;
  std::vector<double> dense;
  std::vector<std::pair<std::size_t, double>> sparse;
  bool is_sparse = false;
  std::size_t line = 0;
};

double parse_label(const std::string& token, std::size_t line) {
  double v = 0.0;
  if (!detail::parse_double(token, v)) throw ParseError("invalid label '" + token + "'", line);
  if (v == 1.0) return 1.0;
  if (v == -1.0 || v == 0.0) return -1.0;
  throw ParseError("label must be ±1 or 0/1, got '" + token + "'", line);
}

ParsedRow parse_row(const std::string& text, std::size_t line) {
  std::istringstream ss(text);
  std::string token;
  ParsedRow row;
  row.line = line;
  ss >> token;
  row.label = parse_label(token, line);
  bool any_dense = false;
  while (ss >> token) {
    const auto colon = token.find(':');
    if (colon == std::string::npos) {
      double v = 0.0;
      if (!detail::parse_double(token, v) || !std::isfinite(v)) {
        throw ParseError("invalid feature value '" + token + "'", line);
      }
      row.dense.push_back(v);
      any_dense = true;
      continue;
    }
    row.is_sparse = true;
    std::size_t index = 0;
    double v = 0.0;
    const std::string idx = token.substr(0, colon);
    const std::string val = token.substr(colon + 1);
    try {
      std::size_t used = 0;
      const long long parsed = std::stoll(idx, &used);
      if (used != idx.size() || parsed < 1) throw std::invalid_argument(idx);
      index = static_cast<std::size_t>(parsed);
    } catch (const std::exception&) {
      throw ParseError("invalid feature index '" + idx + "'", line);
    }
    if (!detail::parse_double(val, v) || !std::isfinite(v)) {
      throw ParseError("invalid feature value '" + val + "'", line);
    }
    if (!row.sparse.empty() && row.sparse.back().first >= index) {
      throw ParseError("feature indices must be strictly increasing", line);
    }
    row.sparse.emplace_back(index, v);
  }
  if (any_dense && row.is_sparse) throw ParseError("mixed dense and index:value features", line);
  return row;
}

}  // namespace

Dataset parse_dataset(const std::string& text, const DatasetOptions& options) {
  std::istringstream in(text);
  std::string line;
  std::vector<ParsedRow> rows;
  std::size_t line_no = 0;
  std::size_t dense_width = 0;
  std::size_t dense_line = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    ParsedRow row = parse_row(line, line_no);
    if (row.is_sparse) {
      width = std::max(width, row.sparse.back().first);
    } else {
      if (dense_line != 0 && row.dense.size() != dense_width) {
        throw ParseError("expected " + std::to_string(dense_width) + " features, found " +
                             std::to_string(row.dense.size()),
                         line_no);
      }
      dense_width = row.dense.size();
      dense_line = line_no;
      width = std::max(width, dense_width);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("no examples found", line_no);
  if (dense_line != 0 && dense_width != width) {
    throw ParseError("dense row has " + std::to_string(dense_width) + " features but the file uses " +
                         std::to_string(width),
                     dense_line);
  }
  if (width == 0) throw ParseError("examples have no features", rows.front().line);

  Dataset data;
  data.features = RowMatrix::Zero(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  data.labels.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    data.labels[r] = rows[i].label;
    if (rows[i].is_sparse) {
      for (const auto& [index, v] : rows[i].sparse) data.features(r, static_cast<Eigen::Index>(index - 1)) = v;
    } else {
      for (std::size_t j = 0; j < rows[i].dense.size(); ++j) data.features(r, static_cast<Eigen::Index>(j)) = rows[i].dense[j];
    }
  }
  if (options.standardize) standardize(data);
  if (options.intercept) append_intercept(data);
  data.validate();
  return data;
}

Dataset load_dataset(const std::string& path, const DatasetOptions& options) {
  return parse_dataset(read_text_file(path), options);
}

void standardize(Dataset& data) {
  const auto n = data.features.rows();
  const auto p = data.features.cols();
  data.column_means = data.features.colwise().mean().transpose();
  data.column_scales = Vector::Ones(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    data.features.col(j).array() -= data.column_means[j];
    const double ss = data.features.col(j).squaredNorm();
    const double sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
    if (sd > 0.0) {
      data.column_scales[j] = sd;
      data.features.col(j) /= sd;
    } else {
      data.constant_column_warning = true;
    }
  }
  data.standardized = true;
}

void append_intercept(Dataset& data) {
  RowMatrix x(data.features.rows(), data.features.cols() + 1);
  x.leftCols(data.features.cols()) = data.features;
  x.col(data.features.cols()).setOnes();
  data.features = std::move(x);
  data.has_intercept = true;
}

// ---------------------------------------------------------------------------
// Samples

void write_samples(const std::vector<std::uint64_t>& rounds, const Matrix& values,
                   const std::string& path) {
  if (rounds.size() != static_cast<std::size_t>(values.rows())) {
    throw ContractViolation("round index count does not match the sample rows");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open sample file for writing", path);
  out << "round";
  for (Eigen::Index j = 0; j < values.cols(); ++j) out << ",theta_" << j;
  out << '\n';
  std::string line;
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    line = std::to_string(rounds[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      line += ',';
      line += detail::format_double(values(i, j));
    }
    line += '\n';
    out << line;
  }
  if (!out) throw IoError("failed writing sample file", path);
}

void write_samples(const SampleSet& samples, const std::string& path) {
  write_samples(samples.rounds, samples.samples, path);
}

SampleTable read_samples(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line)) throw ParseError("sample file is empty", 1);
  const std::size_t cols = static_cast<std::size_t>(std::count(line.begin(), line.end(), ','));
  if (line.rfind("round", 0) != 0) throw ParseError("missing 'round' header", 1);

  std::vector<std::uint64_t> rounds;
  std::vector<double> flat;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::getline(ls, cell, ',');
    try {
      rounds.push_back(std::stoull(cell));
    } catch (const std::exception&) {
      throw ParseError("invalid round index '" + cell + "'", line_no);
    }
    std::size_t seen = 0;
    while (std::getline(ls, cell, ',')) {
      double v = 0.0;
      if (!detail::parse_double(cell, v)) throw ParseError("invalid value '" + cell + "'", line_no);
      flat.push_back(v);
      ++seen;
    }
    if (seen != cols) throw ParseError("wrong number of columns", line_no);
  }
  SampleTable table;
  table.rounds = std::move(rounds);
  table.values.resize(static_cast<Eigen::Index>(table.rounds.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < table.rounds.size(); ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      table.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = flat[i * cols + j];
    }
  }
  return table;
}

// ---------------------------------------------------------------------------
// Run reports

void RunReport::set_stats(const RoundStats& stats) {
  accepted = stats.accepted;
  rejected = stats.rejected;
  out_of_domain = stats.out_of_domain;
  numerical_failures = stats.numerical_failures;
  acceptance_rate = stats.acceptance_rate();
  const auto n = stats.total();
  mean_acceptance_probability =
      n == 0 ? 0.0 : stats.acceptance_probability_sum / static_cast<double>(n);
}

namespace {

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_from(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

}  // namespace

std::string serialize_run_report(const RunReport& r) {
  json j;
  j["config"] = r.config.empty() ? json::object() : json::parse(r.config);
  j["experiment"] = r.experiment;
  j["sampler"] = r.sampler;
  j["model"] = r.model;
  j["seed"] = r.seed;
  j["rounds"] = r.rounds;
  j["burn_in"] = r.burn_in;
  j["step_size"] = number_or_null(r.step_size);
  j["accepted"] = r.accepted;
  j["rejected"] = r.rejected;
  j["out_of_domain"] = r.out_of_domain;
  j["numerical_failures"] = r.numerical_failures;
  j["acceptance_rate"] = number_or_null(r.acceptance_rate);
  j["mean_acceptance_probability"] = number_or_null(r.mean_acceptance_probability);
  j["wall_clock_seconds"] = number_or_null(r.wall_clock_seconds);
  j["complete"] = r.complete;
  j["error"] = r.error;
  j["preprocessing"] = r.preprocessing;
  j["reference_path"] = r.reference_path;
  json metrics = json::object();
  for (const auto& [k, v] : r.metrics) metrics[k] = number_or_null(v);
  j["metrics"] = std::move(metrics);
  j["outputs"] = r.outputs;
  return j.dump(2) + "\n";
}

RunReport parse_run_report(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("run report is not valid JSON: ") + e.what(), 1);
  }
  RunReport r;
  try {
    r.config = j.at("config").empty() ? std::string() : j.at("config").dump();
    r.experiment = j.at("experiment").get<std::string>();
    r.sampler = j.at("sampler").get<std::string>();
    r.model = j.at("model").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.rounds = j.at("rounds").get<std::uint64_t>();
    r.burn_in = j.at("burn_in").get<std::uint64_t>();
    r.step_size = number_from(j.at("step_size"));
    r.accepted = j.at("accepted").get<std::uint64_t>();
    r.rejected = j.at("rejected").get<std::uint64_t>();
    r.out_of_domain = j.at("out_of_domain").get<std::uint64_t>();
    r.numerical_failures = j.at("numerical_failures").get<std::uint64_t>();
    r.acceptance_rate = number_from(j.at("acceptance_rate"));
    r.mean_acceptance_probability = number_from(j.at("mean_acceptance_probability"));
    r.wall_clock_seconds = number_from(j.at("wall_clock_seconds"));
    r.complete = j.at("complete").get<bool>();
    r.error = j.at("error").get<std::string>();
    r.preprocessing = j.at("preprocessing").get<std::string>();
    r.reference_path = j.at("reference_path").get<std::string>();
    for (const auto& [k, v] : j.at("metrics").items()) r.metrics[k] = number_from(v);
    r.outputs = j.at("outputs").get<std::map<std::string, std::string>>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed run report: ") + e.what(), 1);
  }
  return r;
}

void write_run_report(const RunReport& report, const std::string& path) {
  write_text_file(path, serialize_run_report(report));
}

RunReport read_run_report(const std::string& path) { return parse_run_report(read_text_file(path)); }

void write_vector(const Vector& v, const std::string& path) {
  std::string text;
  for (Eigen::Index i = 0; i < v.size(); ++i) text += detail::format_double(v[i]) + "\n";
  write_text_file(path, text);
}

Vector read_vector(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    double v = 0.0;
    if (!detail::parse_double(line, v)) throw ParseError("invalid value '" + line + "'", line_no);
    values.push_back(v);
  }
  if (values.empty()) throw ParseError("vector file is empty", line_no);
  return Eigen::Map<Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace amagold
