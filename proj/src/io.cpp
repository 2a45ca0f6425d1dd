#include "krcd/io.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "krcd/error.hpp"

namespace krcd {

using nlohmann::ordered_json;

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream stream(line);
  while (std::getline(stream, cell, ',')) {
    const auto first = cell.find_first_not_of(" \t\r");
    const auto last = cell.find_last_not_of(" \t\r");
    cells.push_back(first == std::string::npos ? "" : cell.substr(first, last - first + 1));
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_cell(const std::string& cell, std::size_t line_no, const std::string& column) {
  const std::string where = "line " + std::to_string(line_no) + ", column '" + column + "'";
  if (cell.empty()) throw InputError("empty value at " + where);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(cell, &used);
  } catch (const std::exception&) {
    throw InputError("not a number at " + where + ": '" + cell + "'");
  }
  if (used != cell.size()) throw InputError("not a number at " + where + ": '" + cell + "'");
  if (!std::isfinite(v)) throw InputError("non-finite value at " + where);
  return v;
}

bool is_indexed(const std::string& name, char prefix) {
  if (name.size() < 2 || name[0] != prefix) return false;
  return name.find_first_not_of("0123456789", 1) == std::string::npos;
}

template <typename Vec>
ordered_json array_of(const Vec& v) {
  ordered_json out = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

ordered_json kernel_json(const KernelSpec& k) {
  ordered_json j;
  j["family"] = to_string(k.family);
  if (k.family == KernelFamily::polynomial) {
    j["degree"] = k.degree;
    j["offset"] = k.offset;
  }
  if (k.family == KernelFamily::gaussian) {
    j["bandwidth"] = k.bandwidth ? ordered_json(*k.bandwidth) : ordered_json("median");
  }
  j["description"] = k.describe();
  return j;
}

const char* to_string(BasisSelection s) {
  return s == BasisSelection::first_p ? "first_p" : "seeded_random";
}

const char* to_string(GramConstruction g) {
  return g == GramConstruction::full_gram ? "full_gram" : "basis_rows";
}

}  // namespace

void write_dataset_csv(std::ostream& out, const GeneratedDataset& data, bool include_hidden) {
  const Eigen::Index n = data.y.size();
  const bool has_env = !data.env_labels.empty();
  out << "y,t";
  for (Eigen::Index c = 0; c < data.x.cols(); ++c) out << ",x" << c + 1;
  if (has_env) out << ",env";
  if (include_hidden) {
    for (Eigen::Index c = 0; c < data.u.cols(); ++c) out << ",u" << c + 1;
  }
  out << '\n';
  for (Eigen::Index i = 0; i < n; ++i) {
    out << format_double(data.y(i)) << ',' << format_double(data.t(i));
    for (Eigen::Index c = 0; c < data.x.cols(); ++c) out << ',' << format_double(data.x(i, c));
    if (has_env) out << ',' << data.env_labels[static_cast<std::size_t>(i)];
    if (include_hidden) {
      for (Eigen::Index c = 0; c < data.u.cols(); ++c) out << ',' << format_double(data.u(i, c));
    }
    out << '\n';
  }
}

CsvDataset read_dataset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("input CSV is empty");
  const std::vector<std::string> header = split_row(line);

  int y_col = -1;
  int t_col = -1;
  std::vector<int> x_cols;
  std::vector<std::string> hidden;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string& name = header[c];
    if (name == "y") {
      y_col = static_cast<int>(c);
    } else if (name == "t") {
      t_col = static_cast<int>(c);
    } else if (is_indexed(name, 'x')) {
      x_cols.push_back(static_cast<int>(c));
    } else if (is_indexed(name, 'u')) {
      hidden.push_back(name);
    }
  }
  if (y_col < 0) throw InputError("input CSV has no 'y' column");
  if (t_col < 0) throw InputError("input CSV has no 't' column");
  if (x_cols.empty()) throw InputError("input CSV has no covariate columns (x1, x2, ...)");

  CsvDataset result;
  if (!hidden.empty()) {
    std::string names;
    for (const auto& h : hidden) names += (names.empty() ? "" : ",") + h;
    result.warnings.push_back("ignoring hidden columns: " + names);
  }

  std::vector<double> y, t, x;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_row(line);
    if (cells.size() != header.size()) {
      throw InputError("line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                       " fields, header has " + std::to_string(header.size()));
    }
    y.push_back(parse_cell(cells[static_cast<std::size_t>(y_col)], line_no, "y"));
    t.push_back(parse_cell(cells[static_cast<std::size_t>(t_col)], line_no, "t"));
    for (int c : x_cols) {
      const auto idx = static_cast<std::size_t>(c);
      x.push_back(parse_cell(cells[idx], line_no, header[idx]));
    }
  }
  if (y.empty()) throw InputError("input CSV has no data rows");

  const auto n = static_cast<Eigen::Index>(y.size());
  const auto d = static_cast<Eigen::Index>(x_cols.size());
  result.data.y = Eigen::Map<Vector>(y.data(), n);
  result.data.t = Eigen::Map<Vector>(t.data(), n);
  result.data.x = Eigen::Map<RowMatrix>(x.data(), n, d);
  return result;
}

CsvDataset read_dataset_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open input file: " + path);
  return read_dataset_csv(in);
}

ordered_json to_json(const TestResult& r) {
  ordered_json j;
  j["verdict"] = to_string(r.verdict);
  j["alpha_level"] = r.alpha_level;
  j["P"] = r.basis_size;
  j["N"] = r.samples;
  j["lambda"] = r.lambda;
  j["kernel"] = kernel_json(r.kernel);
  j["z_scores"] = array_of(r.z_scores);
  j["p_values"] = array_of(r.p_values);
  j["rejected"] = r.rejected_coords;
  j["degenerate"] = r.degenerate_coords;
  j["sigma_sq"] = r.sigma_sq;
  j["wall_time_ms"] = r.wall_time_ms;
  if (r.effective_lambda != r.lambda) j["effective_lambda"] = r.effective_lambda;
  if (!r.warnings.empty()) j["warnings"] = r.warnings;
  return j;
}

ordered_json to_json(const OracleReport& r) {
  return {{"max_coord_error", r.max_coord_error},
          {"objective_gap", r.objective_gap},
          {"iterations", r.iterations},
          {"converged", r.converged},
          {"instances", r.instances}};
}

ordered_json to_json(const CalibrationReport& r) {
  return {{"rejection_rate", r.rejection_rate}, {"z_mean", r.z_mean},
          {"z_var", r.z_var},                   {"ks_distance", r.ks_distance},
          {"repeats", r.repeats},               {"pooled_z", r.pooled_z}};
}

ordered_json to_json(const RidgeConfig& c) {
  return {{"basis_size", c.basis_size},        {"lambda", c.lambda},
          {"kernel", kernel_json(c.kernel)},   {"selection", to_string(c.selection)},
          {"seed", c.seed},                    {"construction", to_string(c.construction)}};
}

ordered_json to_json(const ScenarioConfig& c) {
  ordered_json j{{"scenario", to_string(c.scenario)}, {"rho", c.rho}, {"samples", c.samples},
                 {"dx", c.dx}, {"du", c.du}};
  if (c.scenario == Scenario::multi_env_nonlinear) j["n_envs"] = c.n_envs;
  j["seed"] = c.seed;
  j["noise_half_width"] = c.noise_half_width;
  return j;
}

ordered_json to_json(const SweepConfig& c) {
  ordered_json scenario = to_json(c.scenario);
  scenario.erase("rho");
  scenario.erase("samples");
  scenario.erase("seed");
  return {{"rho_values", c.rho_values}, {"repeats", c.repeats},
          {"sample_size", c.sample_size}, {"ridge", to_json(c.ridge)},
          {"scenario", scenario}, {"base_seed", c.base_seed},
          {"alpha_level", c.alpha_level}, {"jobs", c.jobs}};
}

ordered_json to_json(const MetricsReport& r) {
  ordered_json j;
  j["config"] = to_json(r.config);
  ordered_json rows = ordered_json::array();
  for (const auto& row : r.rows) {
    ordered_json e{{"rho", row.rho}, {"repeats", row.repeats}, {"rejections", row.rejections},
                   {"detection_rate", row.detection_rate}};
    e["auc"] = row.auc ? ordered_json(*row.auc) : ordered_json(nullptr);
    rows.push_back(e);
  }
  j["rows"] = rows;
  ordered_json roc = ordered_json::array();
  for (const auto& p : r.roc_points) roc.push_back({{"fpr", p.fpr}, {"tpr", p.tpr}});
  j["roc"] = roc;
  j["auc"] = r.auc ? ordered_json(*r.auc) : ordered_json(nullptr);
  j["runtimes_ms"] = r.runtimes_ms;
  return j;
}

ordered_json to_json(const LambdaTable& t) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index r = 0; r < t.auc.rows(); ++r) {
    rows.push_back(array_of(t.auc.row(r).transpose()));
  }
  return {{"lambdas", t.lambdas}, {"rhos", t.rhos}, {"auc", rows}};
}

ordered_json to_json(const RuntimeTable& t) {
  ordered_json rows = ordered_json::array();
  for (const auto& row : t.rows) {
    rows.push_back({{"N", row.samples}, {"P", row.basis_size}, {"median_ms", row.median_ms}});
  }
  auto optional_number = [](const std::optional<double>& v) {
    return v ? ordered_json(*v) : ordered_json(nullptr);
  };
  return {{"rows", rows},
          {"slope_vs_n", optional_number(t.slope_vs_n)},
          {"slope_vs_p", optional_number(t.slope_vs_p)}};
}

void write_records_csv(std::ostream& out, const std::vector<RunRecord>& records) {
  out << "rho,lambda,repeat,seed,verdict,score,wall_ms\n";
  for (const auto& r : records) {
    out << format_double(r.rho) << ',' << format_double(r.lambda) << ',' << r.repeat << ','
        << r.seed << ',' << to_string(r.verdict) << ',' << format_double(r.score) << ','
        << format_double(r.wall_ms) << '\n';
  }
}

ordered_json RunManifest::to_json() const {
  return {{"command", command},
          {"config", config},
          {"seed", seed},
          {"tool_version", KRCD_VERSION},
          {"format_version", kFormatVersion},
          {"inputs", inputs},
          {"outputs", outputs},
          {"started_at", started_at},
          {"finished_at", finished_at}};
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string manifest_path_for(const std::string& output_path) {
  return output_path + ".manifest.json";
}

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open output file: " + path);
  out << contents;
  if (!out) throw InputError("failed writing output file: " + path);
}

}  // namespace krcd
