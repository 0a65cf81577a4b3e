#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "acpv/cli/commands.hpp"

using namespace acpv;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "acpv");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(int(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) { return detail::read_file(p); }

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("acpv_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    unsetenv("ACPV_CONFIG");
  }
  void TearDown() override { unsetenv("ACPV_CONFIG"); }

  std::string path(const std::string& rel) const { return (dir_ / rel).string(); }

  // Three small synthetic patches under <dir>/data.
  void synth(int count = 3) {
    const auto r = run({"synth", "--out", path("data"), "--count", std::to_string(count), "--width", "64", "--height",
                        "64", "--cells", "8", "--seed", "7"});
    ASSERT_EQ(r.code, 0) << r.err;
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"synth"}).code, 2);  // --out is required
  EXPECT_EQ(run({"synth", "--out", path("x"), "--bogus"}).code, 2);
  EXPECT_EQ(run({"synth", "--out", path("x"), "--holes", "2"}).code, 2);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST_F(Cli, SynthWritesDeterministicFiles) {
  synth();
  for (const char* f : {"masks/patch_0000.png", "heatmaps/patch_0002.pfm", "gt/patch_0001.geojson", "manifest.json"})
    EXPECT_TRUE(fs::exists(dir_ / "data" / f)) << f;
  const auto manifest = nlohmann::json::parse(slurp(dir_ / "data/manifest.json"));
  ASSERT_EQ(manifest["patches"].size(), 3u);
  EXPECT_EQ(manifest["patches"][1]["seed"], 8);
  EXPECT_EQ(manifest["patches"][0]["config_hash"].get<std::string>().size(), 16u);
  const std::string gt = slurp(dir_ / "data/gt/patch_0001.geojson");
  const std::string hm = slurp(dir_ / "data/heatmaps/patch_0001.pfm");
  ASSERT_EQ(run({"synth", "--out", path("again"), "--count", "3", "--width", "64", "--height", "64", "--cells", "8",
                 "--seed", "7", "--workers", "3"})
                .code,
            0);
  EXPECT_EQ(slurp(dir_ / "again/gt/patch_0001.geojson"), gt);
  EXPECT_EQ(slurp(dir_ / "again/heatmaps/patch_0001.pfm"), hm);
  EXPECT_EQ(slurp(dir_ / "again/manifest.json"), slurp(dir_ / "data/manifest.json"));
}

TEST_F(Cli, SynthNoise) {
  ASSERT_EQ(run({"synth", "--out", path("n"), "--width", "64", "--height", "64", "--dropout", "0.5"}).code, 0);
  EXPECT_TRUE(fs::exists(dir_ / "n/noisy/heatmaps/patch_0000.pfm"));
}

TEST_F(Cli, VectorizeUniformMask) {
  save_mask(LabelMask(16, 12), path("u.png"));
  const auto r = run({"vectorize", "--mask", path("u.png"), "--mode", "none", "--out", path("u.geojson")});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("polygons 1"), std::string::npos);
  EXPECT_EQ(load_partition(path("u.geojson")).polygons.size(), 1u);
}

TEST_F(Cli, VectorizeSyntheticPatch) {
  synth(1);
  const auto r = run({"vectorize", "--mask", path("data/masks/patch_0000.png"), "--heatmap",
                      path("data/heatmaps/patch_0000.pfm"), "--out", path("v.geojson"), "--svg", path("v.svg")});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("gap 0.00 inter 0.00 intra 0.00 sec 100.00"), std::string::npos) << r.out;
  EXPECT_TRUE(fs::exists(dir_ / "v.svg"));
  // vss needs a heatmap.
  EXPECT_EQ(run({"vectorize", "--mask", path("data/masks/patch_0000.png"), "--out", path("w.geojson")}).code, 2);
  EXPECT_EQ(run({"vectorize", "--mask", path("data/masks/patch_0000.png"), "--mode", "fancy", "--out",
                 path("w.geojson")})
                .code,
            2);
  EXPECT_EQ(run({"vectorize", "--mask", path("data/masks/patch_0000.png"), "--mode", "dp", "--dp-eps", "1,2",
                 "--out", path("w.geojson")})
                .code,
            2);
}

TEST_F(Cli, ValidateAndRender) {
  const Partition good{4, 2, {{0, {{{0, 0}, {2, 0}, {2, 2}, {0, 2}}, {}}}, {1, {{{2, 0}, {4, 0}, {4, 2}, {2, 2}}, {}}}}};
  const Partition bad{3, 2, {{0, {{{0, 0}, {2, 0}, {2, 2}, {0, 2}}, {}}}, {1, {{{1, 0}, {3, 0}, {3, 2}, {1, 2}}, {}}}}};
  write_partition(good, path("good.geojson"));
  write_partition(bad, path("bad.geojson"));
  EXPECT_EQ(run({"validate", path("good.geojson")}).code, 0);
  const auto r = run({"validate", path("bad.geojson")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("(a) planar partition: VIOLATED"), std::string::npos);

  ASSERT_EQ(run({"render", path("good.geojson"), "--out", path("g1.svg")}).code, 0);
  ASSERT_EQ(run({"render", path("good.geojson"), "--out", path("g2.svg")}).code, 0);
  EXPECT_EQ(slurp(dir_ / "g1.svg"), slurp(dir_ / "g2.svg"));
  EXPECT_EQ(slurp(dir_ / "g1.svg").find("class=\"overlap\""), std::string::npos);
  ASSERT_EQ(run({"render", path("bad.geojson"), "--out", path("b.svg")}).code, 0);
  EXPECT_NE(slurp(dir_ / "b.svg").find("class=\"overlap\""), std::string::npos);
}

TEST_F(Cli, ValidateSnapRepairsNearMiss) {
  const Partition p{4, 2, {{0, {{{0, 0}, {2, 0}, {2, 2}, {0, 2}}, {}}}, {1, {{{2.05, 0}, {4, 0}, {4, 2}, {2.05, 2}}, {}}}}};
  write_partition(p, path("near.geojson"));
  EXPECT_EQ(run({"validate", path("near.geojson")}).code, 1);
  EXPECT_EQ(run({"validate", path("near.geojson"), "--snap", "0.1", "--out", path("fixed.geojson")}).code, 0);
  EXPECT_EQ(run({"validate", path("fixed.geojson")}).code, 0);
}

TEST_F(Cli, EvaluateSelf) {
  synth();
  const auto r = run({"evaluate", "--pred", path("data/gt"), "--gt", path("data/gt"), "--masks", path("data/masks"),
                      "--heatmaps", path("data/heatmaps"), "--out", path("eval"), "--workers", "2"});
  EXPECT_EQ(r.code, 0) << r.err << r.out;
  const auto j = nlohmann::json::parse(slurp(dir_ / "eval/report.json"));
  EXPECT_EQ(j["patches"], 3);
  EXPECT_EQ(j["global"]["sec"], 1.0);
  EXPECT_EQ(j["global"]["gap_rate"], 0.0);
  for (const auto& c : j["classes"]) {
    if (c["iou"].is_null()) continue;
    EXPECT_EQ(c["iou"], 1.0);
    if (!c["polis"].is_null()) {
      EXPECT_EQ(c["polis"], 0.0);
      EXPECT_EQ(c["mta"], 0.0);
    }
  }
  EXPECT_EQ(j["classes"][1]["name"], "road");
  EXPECT_TRUE(j["classes"][1].contains("apls"));
  EXPECT_FALSE(j["classes"][0].contains("apls"));
  EXPECT_FALSE(j["alignment"].is_null());
  EXPECT_TRUE(j["alignment"]["v2b"].contains("2"));
  EXPECT_TRUE(fs::exists(dir_ / "eval/patches/patch_0000.json"));
  EXPECT_NE(slurp(dir_ / "eval/report.csv").find("100.00"), std::string::npos);
}

TEST_F(Cli, EvaluateSkipsMissingPredictions) {
  synth();
  fs::create_directories(dir_ / "empty");
  const auto r = run({"evaluate", "--pred", path("empty"), "--gt", path("data/gt"), "--masks", path("data/masks"),
                      "--out", path("eval")});
  EXPECT_EQ(r.code, 1);
  const auto j = nlohmann::json::parse(slurp(dir_ / "eval/report.json"));
  EXPECT_EQ(j["skipped"].size(), 3u);
  EXPECT_EQ(j["patches"], 0);
}

TEST_F(Cli, SweepDpEpsilon) {
  synth();
  const auto r = run({"sweep", "--axis", "dp_eps", "--values", "1,2,3,4", "--masks", path("data/masks"), "--gt",
                      path("data/gt"), "--out", path("sweep.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(slurp(dir_ / "sweep.csv"));
  std::string line;
  std::getline(in, line);
  std::map<std::string, std::vector<long>> verts;
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(cli::trim(c));
    ASSERT_EQ(cells.size(), 9u);
    verts[cells[2]].push_back(std::stol(cells[7]));
  }
  EXPECT_EQ(rows, 4 * 5);
  for (const auto& [cls, v] : verts) {
    ASSERT_EQ(v.size(), 4u);
    for (std::size_t k = 1; k < v.size(); ++k) EXPECT_LE(v[k], v[k - 1]) << cls;
  }
  EXPECT_EQ(run({"sweep", "--axis", "dp_eps", "--values", "1", "--masks", path("data/masks"), "--gt", path("data/gt")})
                .code,
            2);
  EXPECT_EQ(run({"sweep", "--axis", "color", "--values", "1,2", "--masks", path("data/masks"), "--gt",
                 path("data/gt")})
                .code,
            2);
}

TEST_F(Cli, SweepNmsNeedsHeatmaps) {
  synth(1);
  EXPECT_EQ(run({"sweep", "--axis", "nms", "--values", "0.1,0.5", "--masks", path("data/masks"), "--gt",
                 path("data/gt")})
                .code,
            2);
  const auto r = run({"sweep", "--axis", "nms", "--values", "0.1,0.5,0.9", "--masks", path("data/masks"), "--gt",
                      path("data/gt"), "--heatmaps", path("data/heatmaps")});
  EXPECT_EQ(r.code, 0) << r.err;
}

TEST_F(Cli, ConfigFileAndPrecedence) {
  synth(1);
  const std::vector<std::string> base{"vectorize", "--mask", path("data/masks/patch_0000.png"), "--mode", "dp",
                                      "--out", path("o.geojson")};
  auto vertices = [&](std::vector<std::string> extra) {
    auto args = base;
    args.insert(args.end(), extra.begin(), extra.end());
    const auto r = run(args);
    EXPECT_NE(r.code, 2) << r.err;
    const auto pos = r.out.find("simplified ");
    return std::stol(r.out.substr(pos + 11));
  };
  detail::write_file(path("coarse.toml"), "# coarse\n[vectorize]\ndp-eps = 8\n");
  detail::write_file(path("fine.toml"), "dp_eps = \"0.5\"\n");
  const long fine = vertices({"--config", path("fine.toml")});
  const long coarse = vertices({"--config", path("coarse.toml")});
  EXPECT_LT(coarse, fine);
  // Flags beat the file.
  EXPECT_EQ(vertices({"--config", path("coarse.toml"), "--dp-eps", "0.5"}), fine);
  // The environment supplies the default file.
  setenv("ACPV_CONFIG", path("coarse.toml").c_str(), 1);
  EXPECT_EQ(vertices({}), coarse);
  detail::write_file(path("broken.toml"), "no equals sign here\n");
  EXPECT_EQ(run({"vectorize", "--mask", path("data/masks/patch_0000.png"), "--mode", "none", "--out",
                 path("o.geojson"), "--config", path("broken.toml")})
                .code,
            2);
}

TEST(Config, ParsesKeyValueText) {
  const auto c = cli::ConfigFile::parse("a = 1 # note\n[s]\nb-c = \"x, y\"\nd = [1, 2]\n");
  EXPECT_EQ(c.get("a"), "1");
  EXPECT_EQ(c.get("b_c"), "x, y");
  EXPECT_EQ(c.get("d"), "1, 2");
  EXPECT_FALSE(c.has("s"));
  cli::ClassScheme s;
  EXPECT_EQ(s.elongated_ids(5), (std::vector<int>{1, 3}));
  s.elongated = {"2", "road"};
  EXPECT_EQ(s.elongated_ids(5), (std::vector<int>{1, 2}));
  s.elongated = {"7"};
  EXPECT_THROW(s.elongated_ids(5), cli::UsageError);
}

TEST(ParallelFor, RethrowsWorkerFailure) {
  std::vector<int> hit(10, 0);
  cli::parallel_for(10, 4, [&](std::size_t i) { hit[i] = 1; });
  EXPECT_EQ(std::count(hit.begin(), hit.end(), 1), 10);
  EXPECT_THROW(cli::parallel_for(10, 4, [&](std::size_t i) {
                 if (i == 3) throw Error("boom");
               }),
               Error);
}
