#include <sstream>

#include "doctest.h"
#include "krcd/error.hpp"
#include "krcd/io.hpp"

using namespace krcd;

namespace {

GeneratedDataset dataset(Scenario s, std::uint64_t seed) {
  ScenarioConfig c;
  c.scenario = s;
  c.rho = 1.0;
  c.samples = 25;
  c.seed = seed;
  return generate(c);
}

std::string first_line(const std::string& text) { return text.substr(0, text.find('\n')); }

}  // namespace

TEST_CASE("dataset CSV header and round trip") {
  const GeneratedDataset d = dataset(Scenario::single_env_nonlinear, 3);
  std::ostringstream out;
  write_dataset_csv(out, d);
  CHECK(first_line(out.str()) == "y,t,x1,x2,x3");

  std::istringstream in(out.str());
  const CsvDataset back = read_dataset_csv(in);
  CHECK(back.warnings.empty());
  CHECK(back.data.y == d.y);
  CHECK(back.data.t == d.t);
  CHECK(back.data.x == d.x);
}

TEST_CASE("dataset CSV optional columns") {
  const GeneratedDataset d = dataset(Scenario::multi_env_nonlinear, 4);
  std::ostringstream plain, audit;
  write_dataset_csv(plain, d);
  write_dataset_csv(audit, d, true);
  CHECK(first_line(plain.str()) == "y,t,x1,x2,x3,env");
  CHECK(first_line(audit.str()) == "y,t,x1,x2,x3,env,u1,u2,u3");

  std::istringstream in(audit.str());
  const CsvDataset back = read_dataset_csv(in);
  REQUIRE(back.warnings.size() == 1);
  CHECK(back.warnings[0].find("u1") != std::string::npos);
  CHECK(back.data.x.cols() == 3);
  CHECK(back.data.x == d.x);
}

TEST_CASE("dataset CSV is byte-stable") {
  std::ostringstream a, b;
  write_dataset_csv(a, dataset(Scenario::single_env_nonlinear, 9));
  write_dataset_csv(b, dataset(Scenario::single_env_nonlinear, 9));
  CHECK(a.str() == b.str());
}

TEST_CASE("dataset CSV errors") {
  auto read = [](const std::string& text) {
    std::istringstream in(text);
    return read_dataset_csv(in);
  };
  CHECK_THROWS_AS(read(""), InputError);
  CHECK_THROWS_AS(read("t,x1\n1,2\n"), InputError);
  CHECK_THROWS_AS(read("y,x1\n1,2\n"), InputError);
  CHECK_THROWS_AS(read("y,t\n1,2\n"), InputError);
  CHECK_THROWS_AS(read("y,t,x1\n"), InputError);
  CHECK_THROWS_AS(read("y,t,x1\n1,2\n"), InputError);
  CHECK_THROWS_AS(read("y,t,x1\n1,2,abc\n"), InputError);
  CHECK_THROWS_AS(read("y,t,x1\n1,nan,3\n"), InputError);
  CHECK_THROWS_AS(read("y,t,x1\n1,inf,3\n"), InputError);
  try {
    read("y,t,x1\n1,2,3\n4,5,\n");
    FAIL("expected InputError");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  const CsvDataset ok = read("y , t,x2,x1,extra\r\n1,2,3,4,5\r\n\r\n6,7,8,9,10\r\n");
  CHECK(ok.data.samples() == 2);
  CHECK(ok.data.x(1, 0) == 8.0);
  CHECK(ok.data.x(1, 1) == 9.0);
  CHECK_THROWS_AS(read_dataset_csv_file("/nonexistent/data.csv"), InputError);
}

TEST_CASE("TestResult JSON") {
  ScenarioConfig c;
  c.rho = 1.0;
  c.samples = 80;
  RidgeConfig cfg;
  cfg.basis_size = 6;
  const TestResult r = detect(generate(c).observed(), cfg, 0.05);
  const auto j = to_json(r);
  for (const char* key : {"verdict", "alpha_level", "P", "N", "lambda", "kernel", "z_scores",
                          "p_values", "rejected", "degenerate", "sigma_sq", "wall_time_ms"}) {
    CHECK(j.contains(key));
  }
  CHECK(j["P"] == 6);
  CHECK(j["N"] == 80);
  CHECK(j["z_scores"].size() == 6);
  CHECK(j["kernel"]["family"] == "polynomial");
  CHECK(j["verdict"] == to_string(r.verdict));
}

TEST_CASE("report JSON and tidy CSV") {
  RunRecord rec;
  rec.rho = 0.5;
  rec.lambda = 1e-8;
  rec.repeat = 2;
  rec.seed = 12;
  rec.verdict = Verdict::reject_null;
  rec.score = 4.25;
  rec.wall_ms = 1.5;
  std::ostringstream out;
  write_records_csv(out, {rec});
  CHECK(out.str() == "rho,lambda,repeat,seed,verdict,score,wall_ms\n"
                     "0.5,1e-08,2,12,reject_null,4.25,1.5\n");

  LambdaTable table;
  table.lambdas = {1e-8, 1.0};
  table.rhos = {0.5};
  table.auc = Matrix::Constant(1, 2, 0.75);
  const auto j = to_json(table);
  CHECK(j["auc"][0][1] == 0.75);

  RuntimeTable rt;
  rt.rows.push_back({100, 5, 2.0});
  CHECK(to_json(rt)["slope_vs_n"].is_null());

  RunManifest m;
  m.command = "krcd simulate";
  m.outputs = {"a.csv"};
  const auto mj = m.to_json();
  CHECK(mj["tool_version"] == KRCD_VERSION);
  CHECK(mj.contains("started_at"));
  CHECK(manifest_path_for("out/a.csv") == "out/a.csv.manifest.json");
  CHECK(utc_timestamp().size() == 20);
}
