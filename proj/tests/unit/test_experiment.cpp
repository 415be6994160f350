#include <doctest.h>

#include <filesystem>

#include "common/binary_io.hpp"
#include "common/error.hpp"
#include "experiment/config.hpp"
#include "experiment/report.hpp"
#include "experiment/runner.hpp"

using namespace ponlab;
using namespace ponlab::experiment;
using nlohmann::json;

namespace {

ExperimentConfig tiny_config(const std::string& dir) {
  ExperimentConfig c;
  c.n_symbols = 4096;
  c.n_captures = 1;
  c.distances_km = {0.0, 4.0};
  c.equalizers = {EqualizerKind::kNone, EqualizerKind::kFfe21, EqualizerKind::kDnn, EqualizerKind::kFcScinet};
  c.fc_scinet.window = 16;
  c.fc_scinet.levels = 2;
  c.fc_scinet.hidden = 1;
  c.dnn.hidden = {8};
  c.dnn.pre = 4;
  c.dnn.post = 4;
  c.training.epochs = 1;
  c.training.max_train_windows = 256;
  c.hypermap.distance_km = 4.0;
  c.hypermap.windows = {4, 16};
  c.hypermap.levels = {2, 3};
  c.output_dir = std::filesystem::temp_directory_path() / "ponlab_test_experiment" / dir;
  std::filesystem::remove_all(c.output_dir);
  return c;
}

}  // namespace

TEST_CASE("config json round trip and validation") {
  ExperimentConfig c;
  const json j = to_json(c);
  const ExperimentConfig back = experiment_config_from_json(j);
  CHECK(to_json(back) == j);
  CHECK(config_hash_hex(back) == config_hash_hex(c));

  CHECK(c.n_symbols == 65536);
  CHECK(c.n_captures == 3);
  CHECK(j["physical"]["link"]["opl_db"].get<double>() == doctest::Approx(28.7));
  CHECK(j["physical"]["fiber"]["cd_ps_nm_km"].get<double>() == doctest::Approx(16.0));

  json changed = j;
  changed["master_seed"] = 7;
  CHECK(config_hash_hex(experiment_config_from_json(changed)) != config_hash_hex(c));
  changed = j;
  changed["workers"] = 4;
  changed["output_dir"] = "/elsewhere";
  CHECK(config_hash_hex(experiment_config_from_json(changed)) == config_hash_hex(c));

  auto rejects = [&](json bad) {
    try {
      experiment_config_from_json(bad);
    } catch (const Error& e) {
      return e.code() == ErrorCode::kInvalidArgument;
    }
    return false;
  };
  json bad = j;
  bad["n_symbol"] = 4096;
  CHECK(rejects(bad));
  bad = j;
  bad["distances_km"] = {0.0, 5.0, 5.0};
  CHECK(rejects(bad));
  bad = j;
  bad["distances_km"] = {-1.0, 5.0};
  CHECK(rejects(bad));
  bad = j;
  bad["n_symbols"] = 4095;
  CHECK(rejects(bad));
  bad = j;
  bad["equalizers"] = {"ffe7"};
  CHECK(rejects(bad));
  bad = j;
  bad["physical"]["link"]["scenario"] = "CD";
  CHECK(rejects(bad));
  bad = j;
  bad["fc_scinet"]["depth"] = 2;
  CHECK(rejects(bad));
  bad = j;
  bad["scenario"] = "cd-only";
  CHECK(rejects(bad));

  json partial = {{"scenario", "Realistic"}, {"distances_km", {5.0}}};
  const auto p = experiment_config_from_json(partial);
  CHECK(p.scenario() == link::Scenario::kRealistic);
  CHECK(p.fc_scinet.window == 64);
}

TEST_CASE("dataset margins cover every configured window") {
  ExperimentConfig c;
  c.hypermap.windows = {16, 128};
  const auto m = dataset_margins(c);
  CHECK(m.before == 64);
  CHECK(m.after == 63);
  c.hypermap.windows = {};
  c.fc_scinet.window = 8;
  const auto m2 = dataset_margins(c);
  CHECK(m2.before == 16);
  CHECK(m2.after == 16);
}

TEST_CASE("noiseless back-to-back unequalized BER is zero") {
  auto c = tiny_config("noiseless");
  c.physical.link.noise_enabled = false;
  const auto d = simulate_dataset(c, 0.0);
  const auto r = run_point(c, d, 0.0, EqualizerKind::kNone);
  REQUIRE(r.ok());
  CHECK(r.report.bits_counted > 0);
  CHECK(r.report.bits_counted == 2 * d.test.size());
  CHECK(r.report.ber == 0.0);
}

TEST_CASE("sweep writes schema, plot and logs; reruns are byte-identical") {
  auto c = tiny_config("sweep_a");
  const auto a = run_sweep(c);
  const std::string text = io::read_text_file(a.csv);
  CsvComments meta;
  const auto rows = parse_sweep_csv(text, &meta);
  CHECK(meta.config_hash == config_hash_hex(c));
  CHECK(meta.master_seed == c.master_seed);
  REQUIRE(rows.size() == c.distances_km.size() * c.equalizers.size());
  CHECK(rows[0].equalizer == "none");
  CHECK(rows[3].equalizer == "fc-scinet");
  CHECK(rows[4].distance_km == 4.0);
  for (const auto& r : rows) {
    CHECK(r.status == "ok");
    REQUIRE(r.ber.has_value());
    CHECK(*r.ber >= 0.0);
    CHECK(*r.ber <= 1.0);
    CHECK(r.bits_counted > 0);
  }
  CHECK(io::read_text_file(a.plot) == render_sweep_svg(text));
  CHECK(io::read_text_file(a.plot).find("FEC 1e-2") != std::string::npos);
  CHECK(std::filesystem::exists(c.output_dir / "train_logs" / "CD_4km_fc-scinet.csv"));
  const json details = json::parse(io::read_text_file(a.details));
  CHECK(details["points"].size() == rows.size());

  auto c2 = tiny_config("sweep_b");
  c2.workers = 2;
  const auto b = run_sweep(c2);
  CHECK(io::read_text_file(b.csv) == text);
  CHECK(io::read_text_file(b.details) == io::read_text_file(a.details));
}

TEST_CASE("a failing point is recorded and the sweep continues") {
  auto c = tiny_config("failing");
  c.equalizers = {EqualizerKind::kFfe21, EqualizerKind::kNone};
  c.ffe.mu = 50.0;
  c.ffe.training_symbols = 4000;
  const auto out = run_sweep(c);
  const auto rows = parse_sweep_csv(io::read_text_file(out.csv));
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].status == "failed:diverged");
  CHECK_FALSE(rows[0].ber.has_value());
  CHECK(rows[0].bits_counted == 0);
  CHECK(rows[1].status == "ok");
  CHECK(rows[3].status == "ok");
}

TEST_CASE("hypermap marks infeasible cells and a single cell matches the sweep") {
  auto c = tiny_config("hypermap");
  const auto h = run_hyperparameter_map(c);
  const auto rows = parse_hypermap_csv(io::read_text_file(h.csv));
  REQUIRE(rows.size() == 4);
  // p=4: L=2 works (length-1 leaves), L=3 needs p >= 8.
  CHECK(rows[0].window == 4);
  CHECK(rows[0].status == "ok");
  CHECK(rows[1].status == "infeasible");
  CHECK(rows[2].status == "ok");
  CHECK(rows[3].status == "ok");
  REQUIRE(h.argmin.has_value());
  CHECK(rows[*h.argmin].status == "ok");
  CHECK(io::read_text_file(h.plot) == render_hypermap_svg(io::read_text_file(h.csv)));

  auto single = tiny_config("hypermap_single");
  single.hypermap.windows = {16};
  single.hypermap.levels = {2};
  single.distances_km = {4.0};
  single.equalizers = {EqualizerKind::kFcScinet};
  const auto cell = run_hyperparameter_map(single);
  const auto sweep = run_sweep(single);
  REQUIRE(cell.cells.size() == 1);
  REQUIRE(sweep.results.size() == 1);
  CHECK(cell.cells[0].report.bit_errors == sweep.results[0].report.bit_errors);
  CHECK(cell.cells[0].report.ber == sweep.results[0].report.ber);
}

TEST_CASE("hypermap argmin tie-break") {
  std::vector<HypermapRow> rows = {
      {64, 3, 9, "CD", 0.1, 10, 1, "ok"},
      {32, 3, 9, "CD", 0.1, 10, 1, "ok"},
      {16, 5, 9, "CD", std::nullopt, 0, 1, "infeasible"},
      {32, 2, 9, "CD", 0.1, 10, 1, "ok"},
  };
  CHECK(hypermap_argmin(rows) == 3u);
  rows[0].ber = 0.05;
  CHECK(hypermap_argmin(rows) == 0u);
  CHECK_FALSE(hypermap_argmin({}).has_value());
}

TEST_CASE("csv parsing rejects foreign headers") {
  CHECK_THROWS_AS(parse_sweep_csv("a,b,c\n1,2,3\n"), Error);
  CHECK_THROWS_AS(parse_sweep_csv(std::string(kSweepColumns) + "\n1,CD,none\n"), Error);
  const auto rows = parse_sweep_csv("# ponlab sweep config_hash=ab master_seed=3\n" + std::string(kSweepColumns) +
                                    "\n5,CD,none,0.25,100,3,ok\n7,CD,none,,0,3,failed:numerical\n");
  REQUIRE(rows.size() == 2);
  CHECK(*rows[0].ber == 0.25);
  CHECK_FALSE(rows[1].ber.has_value());
}

TEST_CASE("complexity report without results keeps the reference columns") {
  ExperimentConfig c;
  c.fc_scinet.hidden = 1;
  const auto rep = build_complexity_report(c, {});
  const auto& rows = rep.json["rows"];
  REQUIRE(rows.size() == 4);
  CHECK(rows[0]["equalizer"] == "dnn");
  CHECK(rows[0]["rmps"] == 209700);
  CHECK(rows[0]["reference"]["rmps_residual"] == 0);
  CHECK(rows[1]["rmps"] == 184704);
  CHECK(rows[0]["mber"]["CD"].is_null());
  CHECK(rows[0]["prb"]["Realistic"].is_null());
  CHECK(rows[0]["gaps"].size() == 2);
  CHECK(rows[0]["reference"]["prb_recomputed"]["CD"].get<double>() == doctest::Approx(18854.55).epsilon(1e-3));
  CHECK(rows[1]["reference"]["prb_recomputed"]["Realistic"].get<double>() ==
        doctest::Approx(1765.31).epsilon(1e-3));
  CHECK(rep.json["reference_reduction_percent"].get<double>() == doctest::Approx(10.577).epsilon(1e-4));
  const auto& closest = rep.json["reference_scinet_instantiations"]["window64_levels3"];
  REQUIRE(closest.size() > 0);
  CHECK(closest[0]["residual"] != 0);
  CHECK(rep.table.find("dnn") != std::string::npos);
}

TEST_CASE("complexity report takes the lower median and recomputes PRB") {
  ExperimentConfig c;
  const std::string cd = "# ponlab sweep config_hash=aa master_seed=1\n" + std::string(kSweepColumns) +
                         "\n5,CD,dnn,0.3,100,1,ok\n7,CD,dnn,0.1,100,1,ok\n9,CD,dnn,0.2,100,1,ok\n"
                         "11,CD,dnn,0.4,100,1,ok\n5,CD,fc-scinet,,0,1,failed:numerical\n";
  const auto rep = build_complexity_report(c, {cd});
  const auto& dnn = rep.json["rows"][0];
  CHECK(dnn["mber"]["CD"].get<double>() == doctest::Approx(0.2));
  CHECK(dnn["prb"]["CD"].get<double>() == doctest::Approx(209700 * 0.2));
  CHECK(dnn["mber"]["Realistic"].is_null());
  const auto& sc = rep.json["rows"][1];
  CHECK(sc["mber"]["CD"].is_null());
  bool flagged = false;
  for (const auto& g : sc["gaps"]) flagged |= g.get<std::string>().find("failed") != std::string::npos;
  CHECK(flagged);
}
