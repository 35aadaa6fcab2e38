// End-to-end checks of the lumio binary; commands compose through files.
// The binary path arrives via the LUMIO_CLI environment variable (set by ctest).

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace {

std::string cli() {
  const char* path = std::getenv("LUMIO_CLI");
  REQUIRE_MESSAGE(path != nullptr, "LUMIO_CLI must point at the lumio binary");
  return path;
}

int run(const std::string& args) {
  const std::string command = cli() + " " + args + " 2>/dev/null";
  const int status = std::system(command.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("lumio_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int n = 0;
    return n;
  }
};

void write_config(const fs::path& p, const std::string& body) {
  std::ofstream out(p);
  out << body;
}

const char* kScenarioConfig = R"({
  "version": 1,
  "sim": {
    "kind": "figure-eight",
    "duration": 30.0,
    "imu_rate": 50.0,
    "keyframe_rate": 1.0,
    "radius": 10.0,
    "vo_drift_bias": [0, 0, 0, 0.01, 0, 0],
    "seed": 11
  },
  "pgo": {"lambda": 4.0}
})";

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("simulate then self-evaluate gives zero error") {
  TempDir dir;
  const fs::path cfg = dir.path / "cfg.json";
  write_config(cfg, kScenarioConfig);

  REQUIRE(run("simulate --config " + cfg.string() + " --out-dir " + dir.path.string()) == 0);
  REQUIRE(fs::exists(dir.path / "gt.txt"));
  REQUIRE(fs::exists(dir.path / "vo.txt"));
  REQUIRE(fs::exists(dir.path / "imu.csv"));
  REQUIRE(fs::exists(dir.path / "gnss.csv"));

  const fs::path metrics = dir.path / "self.json";
  REQUIRE(run("evaluate --est " + (dir.path / "gt.txt").string() + " --gt " +
              (dir.path / "gt.txt").string() + " -o " + metrics.string()) == 0);
  const auto doc = nlohmann::json::parse(slurp(metrics));
  CHECK(doc.at("ate").get<double>() < 1e-12);
  CHECK(doc.at("rpe").at("translational_m").get<double>() < 1e-12);
  CHECK(doc.at("rpe").at("rotational_rad").get<double>() < 1e-12);
}

TEST_CASE("full pipeline improves a drifting VO chain") {
  TempDir dir;
  const fs::path cfg = dir.path / "cfg.json";
  write_config(cfg, kScenarioConfig);

  REQUIRE(run("simulate --config " + cfg.string() + " --out-dir " + dir.path.string()) == 0);
  REQUIRE(run("preintegrate --imu " + (dir.path / "imu.csv").string() +
              " --keyframe-rate 1.0 -o " + (dir.path / "motions.json").string()) == 0);

  const auto manifest = nlohmann::json::parse(slurp(dir.path / "scenario.json"));
  const auto v0 = manifest.at("initial_velocity").get<std::vector<double>>();
  std::ostringstream v0_text;
  v0_text << v0[0] << "," << v0[1] << "," << v0[2];

  REQUIRE(run("refine --vo " + (dir.path / "vo.txt").string() + " --motions " +
              (dir.path / "motions.json").string() + " --config " + cfg.string() +
              " --initial-velocity " + v0_text.str() + " -o " +
              (dir.path / "refined.txt").string() + " --report " +
              (dir.path / "report.json").string()) == 0);

  const auto report = nlohmann::json::parse(slurp(dir.path / "report.json"));
  CHECK(report.at("final_cost").get<double>() <= report.at("initial_cost").get<double>());
  const auto history = report.at("cost_history").get<std::vector<double>>();
  for (std::size_t i = 1; i < history.size(); ++i) CHECK(history[i] <= history[i - 1]);

  const fs::path before = dir.path / "before.json";
  const fs::path after = dir.path / "after.json";
  REQUIRE(run("evaluate --no-align --est " + (dir.path / "vo.txt").string() + " --gt " +
              (dir.path / "gt.txt").string() + " -o " + before.string()) == 0);
  REQUIRE(run("evaluate --no-align --est " + (dir.path / "refined.txt").string() +
              " --gt " + (dir.path / "gt.txt").string() + " -o " + after.string()) == 0);
  const double ate_before = nlohmann::json::parse(slurp(before)).at("ate").get<double>();
  const double ate_after = nlohmann::json::parse(slurp(after)).at("ate").get<double>();
  CHECK(ate_after < ate_before);
}

TEST_CASE("pipeline outputs are byte-identical across runs") {
  TempDir a, b;
  for (const auto* dir : {&a, &b}) {
    const fs::path cfg = dir->path / "cfg.json";
    write_config(cfg, kScenarioConfig);
    REQUIRE(run("simulate --config " + cfg.string() + " --out-dir " + dir->path.string()) ==
            0);
    REQUIRE(run("preintegrate --imu " + (dir->path / "imu.csv").string() +
                " --keyframe-rate 1.0 -o " + (dir->path / "motions.json").string()) == 0);
    REQUIRE(run("refine --vo " + (dir->path / "vo.txt").string() + " --motions " +
                (dir->path / "motions.json").string() + " --config " + cfg.string() +
                " -o " + (dir->path / "refined.txt").string() + " --report " +
                (dir->path / "report.json").string()) == 0);
    REQUIRE(run("evaluate --est " + (dir->path / "refined.txt").string() + " --gt " +
                (dir->path / "gt.txt").string() + " -o " +
                (dir->path / "metrics.json").string() + " --aligned-csv " +
                (dir->path / "aligned.csv").string()) == 0);
  }
  for (const char* name : {"gt.txt", "vo.txt", "imu.csv", "gnss.csv", "motions.json",
                           "refined.txt", "report.json", "metrics.json", "aligned.csv"}) {
    CHECK_MESSAGE(slurp(a.path / name) == slurp(b.path / name), name);
  }
}

TEST_CASE("infer with zero weights writes identity poses") {
  TempDir dir;
  const fs::path cfg = dir.path / "cfg.json";
  write_config(cfg, R"({"version": 1, "sim": {"kind": "line", "duration": 3.0, "seed": 3}})");

  REQUIRE(run("simulate --config " + cfg.string() + " --out-dir " + dir.path.string() +
              " --frames") == 0);
  REQUIRE(fs::exists(dir.path / "frames" / "frame_000000.ppm"));

  const fs::path weights = dir.path / "weights.bin";
  REQUIRE(run("init-weights --zero -o " + weights.string()) == 0);
  REQUIRE(fs::exists(dir.path / "weights.bin.json"));

  const fs::path poses = dir.path / "inferred.txt";
  REQUIRE(run("infer --frames " + (dir.path / "frames").string() + " --weights " +
              weights.string() + " -o " + poses.string()) == 0);

  std::ifstream in(poses);
  std::string line;
  int count = 0;
  while (std::getline(in, line)) {
    CHECK(line == "1 0 0 0 0 1 0 0 0 0 1 0");
    ++count;
  }
  CHECK(count == 4);  // 3 s at 1 Hz -> 4 frames
}

TEST_CASE("gradcheck passes and reports json") {
  TempDir dir;
  const fs::path out = dir.path / "grad.json";
  const std::string command = cli() + " --json gradcheck --instances 10 > " + out.string() +
                              " 2>/dev/null";
  REQUIRE(WEXITSTATUS(std::system(command.c_str())) == 0);
  const auto doc = nlohmann::json::parse(slurp(out));
  CHECK(doc.at("passed").get<bool>());
  CHECK(doc.at("max_relative_error").get<double>() < 1e-4);
}

TEST_CASE("missing inputs produce a nonzero exit") {
  TempDir dir;
  CHECK(run("preintegrate --imu " + (dir.path / "nope.csv").string() +
            " --keyframe-rate 1.0 -o " + (dir.path / "out.json").string()) != 0);
  CHECK(run("evaluate --est missing.txt --gt missing.txt") != 0);
  CHECK(run("refine --vo missing.txt --motions missing.json -o out.txt") != 0);
}

TEST_CASE("config with unknown keys is rejected") {
  TempDir dir;
  const fs::path cfg = dir.path / "bad.json";
  write_config(cfg, R"({"version": 1, "sim": {"speeed": 1.0}})");
  CHECK(run("simulate --config " + cfg.string() + " --out-dir " + dir.path.string()) != 0);
}

}  // TEST_SUITE
