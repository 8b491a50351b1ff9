#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "support.hpp"
#include "veplab/io.hpp"
#include "veplab/pipeline.hpp"

using namespace veplab;
using veplab::testing::error_code_of;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("veplab_test_pipeline_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines_of(const fs::path& p) {
  std::istringstream in(slurp(p));
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

nlohmann::json small_config() {
  return {{"seed", 3},
          {"simulation", {{"n_channels", 4}, {"n_blocks", 4}}},
          {"stimulus", {{"wn_pool_size", 16}, {"jfpm_targets", 8}}},
          {"decoder", {{"windows_s", {0.2, 0.5}}}},
          {"optimizer", {{"group_select", 8}, {"iterations", 300}, {"restarts", 2}, {"personal_subset", 4}, {"personal_samples", 50}}}};
}

}  // namespace

TEST_CASE("default run keeps the lower bound under the upper bound") {
  const auto out = scratch("default");
  const auto report = run_pipeline(PipelineConfig{}, out);
  CHECK(report.lower_bits > 0.0);
  CHECK(report.lower_bits <= 1.05 * report.upper_bits);
  const auto bundle = io::read_json(out / "bundle.json");
  CHECK(bundle == report.bundle);
  CHECK(bundle.at("capacity").at("lower_within_upper_5pct") == true);
  for (const auto& [name, rel] : bundle.at("artifacts").items()) CHECK(fs::exists(out / rel.get<std::string>()));
  fs::remove_all(out);
}

TEST_CASE("both paradigms produce an itr table") {
  const auto out = scratch("itr");
  const auto report = run_pipeline(pipeline_config_from_json(small_config()), out);
  for (const char* name : {"itr_jfpm.csv", "itr_wn.csv"}) {
    const auto lines = lines_of(out / name);
    REQUIRE(lines.size() == 3);
    CHECK(lines[0] == "Time (s),Acc,ITR (bpm),ITR*(bps)");
    CHECK(lines[1].rfind("0.20,", 0) == 0);
    CHECK(lines[2].rfind("0.50,", 0) == 0);
    CHECK(lines[1].find('%') != std::string::npos);
  }
  CHECK(report.bundle.at("itr").at("jfpm").size() == 2);
  CHECK(report.bundle.at("itr").at("wn").size() == 2);
  const auto personal = io::read_codeset(out / "codes_personal.csv");
  CHECK(personal.size() == 4);
  CHECK(personal.stage == CodeStage::Personal);
  CHECK(io::read_codeset(out / "codes_group.csv").size() == 8);
  fs::remove_all(out);
}

TEST_CASE("reruns are byte-identical") {
  const auto a = scratch("rerun_a");
  const auto b = scratch("rerun_b");
  const auto cfg = pipeline_config_from_json(small_config());
  run_pipeline(cfg, a);
  run_pipeline(cfg, b);
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    const auto name = entry.path().filename();
    REQUIRE(fs::exists(b / name));
    CHECK_MESSAGE(slurp(a / name) == slurp(b / name), name.string());
    ++files;
  }
  CHECK(files == static_cast<std::size_t>(std::distance(fs::directory_iterator(b), fs::directory_iterator{})));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("resolved config is written and reloads to the same run") {
  const auto out = scratch("resolved");
  const auto cfg = pipeline_config_from_json(small_config());
  run_pipeline(cfg, out);
  const auto resolved = io::read_json(out / "resolved_config.json");
  CHECK(resolved == to_json(cfg));
  CHECK(to_json(pipeline_config_from_json(resolved)) == resolved);
  CHECK(resolved.at("schema_version") == PipelineConfig::kSchemaVersion);
  fs::remove_all(out);
}

TEST_CASE("config documents are validated") {
  auto j = small_config();
  j["simulation"]["n_chanels"] = 4;
  CHECK(error_code_of([&] { pipeline_config_from_json(j); }) == Errc::InvalidConfig);
  j = small_config();
  j["extra"] = true;
  CHECK(error_code_of([&] { pipeline_config_from_json(j); }) == Errc::InvalidConfig);
  j = small_config();
  j["schema_version"] = 2;
  CHECK(error_code_of([&] { pipeline_config_from_json(j); }) == Errc::InvalidConfig);
  j = small_config();
  j["capacity"] = {{"band", {1.0}}};
  CHECK(error_code_of([&] { pipeline_config_from_json(j); }) == Errc::InvalidConfig);
  j = small_config();
  j["simulation"]["n_blocks"] = "four";
  CHECK(error_code_of([&] { pipeline_config_from_json(j); }) == Errc::InvalidConfig);
  j = small_config();
  j["decoder"]["windows_s"] = nlohmann::json::array();
  CHECK(error_code_of([&] { pipeline_config_from_json(j); }) == Errc::InvalidConfig);
}

TEST_CASE("a failing stage is named and earlier artifacts persist") {
  const auto out = scratch("fail");
  auto j = small_config();
  j["optimizer"]["personal_subset"] = 9;
  const auto cfg = pipeline_config_from_json(j);
  try {
    run_pipeline(cfg, out);
    FAIL("run succeeded");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::SubsetTooLarge);
    CHECK(std::string(e.what()).find("stage 'optimize-personal'") != std::string::npos);
  }
  CHECK(fs::exists(out / "trf.json"));
  CHECK(fs::exists(out / "capacity_upper.json"));
  CHECK(fs::exists(out / "codes_group.csv"));
  CHECK_FALSE(fs::exists(out / "itr_wn.csv"));
  CHECK_FALSE(fs::exists(out / "bundle.json"));
  fs::remove_all(out);
}
