#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "krcd/confounder_test.hpp"
#include "krcd/datagen.hpp"
#include "krcd/evalharness.hpp"
#include "krcd/oracle.hpp"

namespace krcd {

inline constexpr const char* kFormatVersion = "1";

/// Header `y,t,x1..xd[,env][,u1..ud]`, values printed with 17 significant digits.
void write_dataset_csv(std::ostream& out, const GeneratedDataset& data, bool include_hidden = false);

struct CsvDataset {
  ObservedData data;
  std::vector<std::string> warnings;  // e.g. ignored hidden columns
};

/// Reads `y`, `t` and every `x*` column. `u*` columns are dropped with a
/// warning, other columns (such as `env`) are ignored.
CsvDataset read_dataset_csv(std::istream& in);
CsvDataset read_dataset_csv_file(const std::string& path);

nlohmann::ordered_json to_json(const TestResult& result);
nlohmann::ordered_json to_json(const OracleReport& report);
nlohmann::ordered_json to_json(const CalibrationReport& report);
nlohmann::ordered_json to_json(const RidgeConfig& config);
nlohmann::ordered_json to_json(const ScenarioConfig& config);
nlohmann::ordered_json to_json(const SweepConfig& config);
nlohmann::ordered_json to_json(const MetricsReport& report);
nlohmann::ordered_json to_json(const LambdaTable& table);
nlohmann::ordered_json to_json(const RuntimeTable& table);

/// Tidy `rho,lambda,repeat,seed,verdict,score,wall_ms` rows.
void write_records_csv(std::ostream& out, const std::vector<RunRecord>& records);

struct RunManifest {
  std::string command;
  nlohmann::ordered_json config;
  std::uint64_t seed = 0;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::string started_at;
  std::string finished_at;

  nlohmann::ordered_json to_json() const;
};

/// UTC, ISO 8601 to the second.
std::string utc_timestamp();

/// `<path>.manifest.json`
std::string manifest_path_for(const std::string& output_path);

void write_text_file(const std::string& path, const std::string& contents);

}  // namespace krcd
