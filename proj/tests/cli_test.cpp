#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "nugap/cli.hpp"
#include "support.hpp"

using namespace nugap;

namespace {

namespace fs = std::filesystem;

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("nugap_cli_" + std::to_string(::getpid()) + "_" +
                                         ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string file(const std::string& name, const std::string& body) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << body;
    return p.string();
  }

  int run(std::vector<std::string> args) {
    out_.str("");
    err_.str("");
    return cli::run_command(args, out_, err_);
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

}  // namespace

TEST(ParsePlant, Examples) {
  const PlantDesc p = io::parse_plant(R"({"tau":0,"num":[1],"den":[-1,1]})");
  EXPECT_EQ(p.num, Poly({1.0}));
  EXPECT_EQ(p.den, Poly({-1.0, 1.0}));
  auto code = [](const std::string& text) {
    try {
      io::parse_plant(text);
    } catch (const Error& e) {
      return std::string(to_string(e.code()));
    }
    return std::string("OK");
  };
  EXPECT_EQ(code(R"({"tau":0,"num":[0,0,1],"den":[1,1]})"), "NOT_PROPER");
  EXPECT_EQ(code(R"({"tau":-1,"num":[1],"den":[1,1]})"), "NEGATIVE_DELAY");
  EXPECT_EQ(code(R"({"num":[1],"den":[-1,1])"), "PARSE");
  EXPECT_EQ(code(R"({"num":"x","den":[1]})"), "PARSE");
  EXPECT_EQ(code(R"({"num":[1,1],"den":[1,0,-1]})"), "COMMON_ROOTS");
}

TEST(ParsePlant, RoundTripIsExact) {
  std::mt19937_64 rng(53);
  for (int t = 0; t < 50; ++t) {
    PlantDesc p = corpus::random_plant(rng, 4, 2.0);
    p.name = "p" + std::to_string(t);
    EXPECT_EQ(io::parse_plant(io::print_plant(p)), p);
  }
}

TEST(ParseElement, ProperTermsAreSplit) {
  const LineElement e = io::parse_element(R"({"atoms":[[0.5,2]],"terms":[{"num":[-1,1],"den":[1,1]}]})");
  for (double y : {-1.0, 0.0, 2.0}) {
    const Complex s(0.0, y);
    EXPECT_LT(std::abs(e.eval(y) - (0.5 * std::exp(-2.0 * s) + (s - 1.0) / (s + 1.0))), 1e-14);
  }
}

TEST_F(Cli, NuJson) {
  const std::string a = file("a.json", R"({"tau":0,"num":[1],"den":[-1,1]})");
  const std::string b = file("b.json", R"({"tau":0,"num":[2],"den":[-1,1]})");
  ASSERT_EQ(run({"nu", a, b, "--output", "json"}), 0) << err_.str();
  const io::Json j = io::Json::parse(out_.str());
  EXPECT_NEAR(j["d_nu"].get<double>(), 1.0 / 3.0, 1e-6);
  EXPECT_EQ(j["branch"], "NORM");
}

TEST_F(Cli, IndexOfDelay) {
  ASSERT_EQ(run({"index", file("e.json", R"({"atoms":[[1,1]]})")}), 0) << err_.str();
  EXPECT_EQ(out_.str(), "(-1, 0)\n");
}

TEST_F(Cli, IndexTraceFile) {
  const std::string trace = (dir_ / "trace.csv").string();
  ASSERT_EQ(run({"index", file("e.json", R"({"atoms":[[1,0]],"terms":[{"num":[-2],"den":[1,1]}]})"), "--trace", trace}), 0);
  EXPECT_EQ(out_.str(), "(0, -1)\n");
  std::ifstream in(trace);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "y,phase,modulus");
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run({"bogus"}), 2);
  EXPECT_NE(err_.str().find("usage"), std::string::npos);
  EXPECT_EQ(run({}), 2);
  const std::string a = file("a.json", R"({"num":[1],"den":[-1,1]})");
  EXPECT_EQ(run({"nu", a}), 2);
  EXPECT_EQ(run({"nu", a, a, "--tol", "1"}), 2);
  EXPECT_EQ(run({"nu", a, a, "--grid", "1000"}), 2);
  EXPECT_EQ(run({"nu", a, a, "--grid", "256", "--fir", "64"}), 2);
  EXPECT_EQ(run({"nu", a, a, "--output", "xml"}), 2);
  EXPECT_EQ(run({"nu", a, (dir_ / "missing.json").string()}), 2);
  EXPECT_EQ(run({"nu", a, file("bad.json", R"({"num":[0,0,1],"den":[1,1]})")}), 2);
  EXPECT_EQ(err_.str().rfind("NOT_PROPER", 0), 0u);
}

TEST_F(Cli, UncertainIsExitThree) {
  // incommensurate three-atom AP part with a zero on the axis
  const std::string e = file("e.json", R"({"atoms":[[1,0],[1,1],[1,1.4142135623730951]]})");
  EXPECT_EQ(run({"index", e}), 3);
}

TEST_F(Cli, CertifySamePlantHolds) {
  const std::string p = file("p.json", R"({"num":[1],"den":[-1,1]})");
  const std::string c = file("c.json", R"({"num":[-3],"den":[1]})");
  EXPECT_EQ(run({"certify", p, p, c}), 0);
  EXPECT_NE(out_.str().find("HOLDS"), std::string::npos);
}

TEST_F(Cli, MarginAndGapText) {
  const std::string p = file("p.json", R"({"num":[1],"den":[-1,1]})");
  const std::string c = file("c.json", R"({"num":[-3],"den":[1]})");
  ASSERT_EQ(run({"margin", p, c}), 0);
  EXPECT_EQ(out_.str().rfind("stabilized, mu = 0.316227766", 0), 0u);
  ASSERT_EQ(run({"gap", p, p, "--output", "csv"}), 0);
  EXPECT_EQ(out_.str().rfind("lower,upper,fir_order,circle_grid\n0,", 0), 0u);
}

TEST_F(Cli, ToeplitzJson) {
  ASSERT_EQ(run({"toeplitz", file("e.json", R"({"atoms":[[1,0]],"terms":[{"num":[-2],"den":[1,1]}]})"), "--output", "json"}), 0);
  const io::Json j = io::Json::parse(out_.str());
  EXPECT_EQ(j["verdict"], "CONSISTENT_INDEX_1");
  EXPECT_EQ(j["rows"].size(), 4u);
}

TEST_F(Cli, SweepSinglePlant) {
  ASSERT_EQ(run({"sweep", file("c.json", R"([{"name":"a","num":[1],"den":[-1,1]}])")}), 0);
  std::istringstream in(out_.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "id1,id2,d_nu,branch,gap_lo,gap_hi,mu_best,sandwich_ok,ms");
  std::getline(in, line);
  EXPECT_EQ(line, "# rows 0, sandwich_ok 0, failed 0");
}

TEST_F(Cli, SweepBranchOnePair) {
  const std::string c = file("c.json", R"({"plants":[{"name":"zero","num":[0],"den":[1]},{"name":"u","num":[1],"den":[-1,1]}]})");
  ASSERT_EQ(run({"sweep", c}), 0) << err_.str();
  std::istringstream in(out_.str());
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(row.rfind("zero,u,1,UNIT_NONZERO_INDEX,", 0), 0u) << row;
}

TEST_F(Cli, SweepIsDeterministicAndSandwiched) {
  std::mt19937_64 rng(59);
  const PlantDesc base = corpus::plant({1.0, 0.5}, {-1.0, 0.5, 1.0});
  io::Json plants = io::Json::array();
  for (int i = 0; i < 10; ++i) {
    PlantDesc p = corpus::perturb(base, rng, 0.15);
    p.name = "p" + std::to_string(i);
    plants.push_back(io::to_json(p));
  }
  const std::string c = file("c.json", plants.dump());
  ASSERT_EQ(run({"sweep", c, "--seed", "3"}), 0) << err_.str();
  const std::string first = out_.str();
  EXPECT_NE(first.find("# rows 45, sandwich_ok 45, failed 0"), std::string::npos) << first;
  ASSERT_EQ(run({"sweep", c, "--seed", "3"}), 0);
  EXPECT_EQ(out_.str(), first);
}

TEST_F(Cli, SweepRejectsMalformedCorpus) {
  const std::string c = file("c.json", R"([{"name":"a","num":[1],"den":[-1,1]},{"name":"b","atoms":1}])");
  EXPECT_EQ(run({"sweep", c}), 2);
}
