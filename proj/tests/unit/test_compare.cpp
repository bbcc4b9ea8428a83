#include <doctest.h>

#include <json.hpp>
#include <sstream>

#include "flowmap/compare.hpp"
#include "flowmap/model_io.hpp"
#include "flowmap/train.hpp"
#include "support/temp_dir.hpp"

using namespace flowmap;
using nlohmann::json;

namespace {

struct Fixture {
  testing::TempDir dir;
  std::filesystem::path model, basis;
  Fixture() {
    TraceConfig cfg;
    cfg.step = 0.01;
    cfg.interval = 5;
    cfg.file_cycles = 10;
    const auto set = extract_long(DoubleGyre{}, uniform_grid(std::array{32, 16}, DoubleGyre{}.domain()), cfg);
    basis = dir / "basis.npy";
    write_flowmap(set, basis);
    auto m = init_model_for(set, MlpArch::make(2, 2, 2, 2, 16, Activation::Sine), 1);
    TrainConfig tc;
    tc.epochs = 2;
    train(m, make_dataset(m, set), {}, tc);
    model = dir / "m.fmap";
    save_model(m, model);
  }
};

CompareConfig small_config() {
  CompareConfig c;
  c.seed_counts = {100, 1000};
  c.repetitions = 3;
  c.error_seeds = 100;
  return c;
}

}  // namespace

TEST_CASE("default sweep") {
  CHECK(CompareConfig{}.seed_counts == std::vector<int>{100, 200, 300, 400, 500, 1000});
}

TEST_CASE("comparison report") {
  Fixture fx;
  const auto r = compare(fx.model, fx.basis, DoubleGyre{}, small_config());
  REQUIRE(r.methods.size() == 2);
  const auto& dl = r.methods[0];
  const auto& bc = r.methods[1];
  CHECK(dl.name == "model");
  CHECK(bc.name == "barycentric");
  CHECK(r.baseline_kind == "barycentric");
  CHECK(dl.storage_bytes == std::filesystem::file_size(fx.model));
  CHECK(bc.storage_bytes == flowmap_storage_bytes(fx.basis));
  CHECK(dl.query_s.size() == 2);
  CHECK(bc.build_s > 0.0);
  CHECK(dl.build_s == 0.0);
  CHECK(bc.query_s[1] >= bc.query_s[0]);
  CHECK(dl.errors.l1.count + dl.errors.excluded_invalid == 100);
  CHECK(r.noise_floor.l1.max < 1e-6);
  CHECK(r.n_cycles == 10);

  const auto text = report_json(r);
  CHECK(validate_report_json(text).empty());
  const auto j = json::parse(text);
  CHECK(j["methods"][0]["query"][1]["seeds"] == 1000);

  const auto csv = report_csv(r);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "method,metric,seeds,value");
  int query_rows = 0;
  while (std::getline(in, line)) query_rows += line.find(",query_s,") != std::string::npos;
  CHECK(query_rows == 4);

  auto lat_cfg = small_config();
  lat_cfg.prefer_lattice = true;
  const auto rl = compare(fx.model, fx.basis, DoubleGyre{}, lat_cfg);
  CHECK(rl.baseline_kind == "lattice");
  CHECK(validate_report_json(report_json(rl)).empty());
}

TEST_CASE("schema validator catches broken reports") {
  Fixture fx;
  auto cfg = small_config();
  cfg.seed_counts = {100};
  cfg.repetitions = 1;
  const auto good = json::parse(report_json(compare(fx.model, fx.basis, DoubleGyre{}, cfg)));
  CHECK(validate_report_json("not json").size() == 1);
  CHECK_FALSE(validate_report_json("[]").empty());
  auto j = good;
  j.erase("noise_floor");
  CHECK_FALSE(validate_report_json(j.dump()).empty());
  j = good;
  j["methods"][0]["storage_bytes"] = "big";
  CHECK_FALSE(validate_report_json(j.dump()).empty());
  j = good;
  j["methods"][1]["query"].push_back({{"seeds", 5}, {"seconds", 0.1}});
  CHECK_FALSE(validate_report_json(j.dump()).empty());
  j = good;
  j["methods"][0]["errors"]["l1"]["max"] = -1.0;
  CHECK_FALSE(validate_report_json(j.dump()).empty());
  j = good;
  j["format"] = "other";
  CHECK_FALSE(validate_report_json(j.dump()).empty());
}
