#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "cli.hpp"
#include "qam/qam.hpp"

using namespace qam;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run_cli(std::move(args), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class SpecFiles : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("qam_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p.string();
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string sin_spec() {
    return write("sin.json",
                 R"({"kind":"catalog","name":"sin","interval":[-1.5707963267948966,1.5707963267948966],"margin":0.01})");
  }
  std::string tan_spec() {
    return write("tan.json",
                 R"({"kind":"catalog","name":"tan","interval":[-1.5707963267948966,1.5707963267948966],"margin":0.01})");
  }
  std::string power_spec(const std::string& name, double p) {
    return write(name, R"({"kind":"catalog","name":"power","p":)" + std::to_string(p) +
                           R"(,"interval":[1e-6,100.0],"margin":1e-3})");
  }

  fs::path dir_;
};

}  // namespace

// --- spec parsing ----------------------------------------------------------------------

TEST(SpecIo, CatalogAffineReflect) {
  const json j = json::parse(R"({"kind":"affine","alpha":2.0,"beta":3.0,
                                 "base":{"kind":"catalog","name":"identity","interval":[0,10]}})");
  const Generator g = parse_generator(j);
  EXPECT_DOUBLE_EQ(g.value(1.0), 5.0);
  const Generator r = parse_generator(json::parse(
      R"({"kind":"reflect","interval":[-10,-0.1],"base":{"kind":"catalog","name":"log"}})"));
  EXPECT_NEAR(r.value(-2.0), std::log(2.0), 1e-15);
  EXPECT_NEAR(r.interval().work_hi(), -0.1 - r.interval().margin(), 1e-15);
}

TEST(SpecIo, NestedSpecsInheritInterval) {
  const Generator g = parse_generator(json::parse(R"({"kind":"piecewise","interval":[-1,1],"breakpoints":[0],
      "pieces":[{"kind":"catalog","name":"identity"},{"kind":"catalog","name":"identity"}],"scales":[1,2]})"));
  EXPECT_EQ(g.kind(), Kind::Piecewise);
  EXPECT_DOUBLE_EQ(g.value(0.5), 1.0);
}

TEST(SpecIo, MalformedSpecsAreDomainErrors) {
  EXPECT_THROW(parse_generator(json::parse(R"({"name":"sin"})")), DomainError);
  EXPECT_THROW(parse_generator(json::parse(R"({"kind":"catalog","name":"sin"})")), DomainError);
  EXPECT_THROW(parse_generator(json::parse(R"({"kind":"catalog","name":"gamma","interval":[0,1]})")), DomainError);
  EXPECT_THROW(parse_generator(json::parse(R"({"kind":"catalog","name":"power","interval":[0,1]})")), DomainError);
  EXPECT_THROW(parse_generator(json::parse(R"({"kind":"join","interval":[0,1]})")), DomainError);
  EXPECT_THROW(read_json_file("/nonexistent/spec.json"), DomainError);
}

TEST(SpecIo, SerializedJoinReproducesIndex) {
  const Interval iv(-std::numbers::pi / 2, std::numbers::pi / 2, 0.01);
  const LatticeResult r = join({Generator::sin(iv), Generator::tan(iv)}, iv);
  const Generator back = parse_generator(json::parse(to_spec_string(r.generator)));
  for (double x : make_grid(iv, 512)) ASSERT_EQ(back.index_at(x), r.generator.index_at(x)) << "x=" << x;
}

TEST(SpecIo, CatalogRoundTrip) {
  for (const Generator& f : verify::catalog_sm()) {
    const Generator g = parse_generator(json::parse(to_spec_string(f)));
    for (double x : make_grid(f.interval(), 33)) ASSERT_EQ(g.value(x), f.value(x)) << f.name();
  }
}

// --- eval -------------------------------------------------------------------------------

TEST_F(SpecFiles, EvalExamples) {
  const std::string lg = write("log.json", R"({"kind":"catalog","name":"log","interval":[1e-6,100.0]})");
  auto r = run({"eval", "--gen", lg, "--vector", "1,4"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "2.000000000000\n");
  r = run({"eval", "--gen", power_spec("p2.json", 2.0), "--vector", "1,7"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "5.000000000000\n");
}

TEST_F(SpecFiles, EvalOutsideIntervalExitsTwo) {
  const auto r = run({"eval", "--gen", sin_spec(), "--vector", "2.0"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("entry 2 outside"), std::string::npos) << r.err;
}

TEST_F(SpecFiles, EvalInputErrors) {
  EXPECT_EQ(run({"eval", "--gen", sin_spec(), "--vector", "0.1,abc"}).code, 2);
  EXPECT_EQ(run({"eval", "--gen", path("missing.json"), "--vector", "0.1"}).code, 2);
  EXPECT_EQ(run({"eval", "--gen", write("bad.json", "{not json"), "--vector", "0.1"}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"eval", "--gen", sin_spec(), "--vector", "0.1", "--grid", "4"}).code, 2);
  EXPECT_EQ(run({"eval", "--gen", sin_spec(), "--vector", "0.1", "--tol", "0"}).code, 2);
}

TEST_F(SpecFiles, IntervalOverride) {
  const std::string id = write("id.json", R"({"kind":"catalog","name":"identity","interval":[0,1]})");
  EXPECT_EQ(run({"eval", "--gen", id, "--vector", "5"}).code, 2);
  const auto r = run({"eval", "--gen", id, "--vector", "5,7", "--interval", "0,10", "--margin", "0"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "6.000000000000\n");
}

TEST(Cli, HelpDocumentsCsvColumns) {
  const auto r = run({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("x,A1..An,max|min,h,h_prime"), std::string::npos);
}

// --- compare ----------------------------------------------------------------------------

TEST_F(SpecFiles, CompareVerdicts) {
  auto r = run({"compare", "--gen", sin_spec(), "--gen2", tan_spec()});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("Incomparable, witness≈-", 0), 0u) << r.out;
  r = run({"compare", "--gen", power_spec("p1.json", 1.0), "--gen2", power_spec("p2.json", 2.0)});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("Less\n", 0), 0u) << r.out;
  r = run({"compare", "--gen", sin_spec(), "--gen2", sin_spec(), "--method", "ratio"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("Equal\n", 0), 0u) << r.out;
}

TEST_F(SpecFiles, CompareCubeByIndexIsCapabilityError) {
  const std::string id = write("id.json", R"({"kind":"catalog","name":"identity","interval":[-1,1],"margin":0.01})");
  const std::string cube = write("cube.json", R"({"kind":"catalog","name":"cube","interval":[-1,1],"margin":0.01})");
  EXPECT_EQ(run({"compare", "--gen", id, "--gen2", cube, "--method", "index"}).code, 3);
  const auto r = run({"compare", "--gen", id, "--gen2", cube, "--method", "convexity"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("Incomparable, witness≈", 0), 0u) << r.out;
  EXPECT_EQ(run({"compare", "--gen", id, "--gen2", cube, "--method", "vibes"}).code, 2);
}

TEST_F(SpecFiles, CompareCsvHasIndexColumns) {
  const std::string csv = path("cmp.csv");
  const auto r = run({"compare", "--gen", sin_spec(), "--gen2", tan_spec(), "--out-csv", csv, "--grid", "16"});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string text = slurp(csv);
  EXPECT_EQ(text.rfind("x,A_f,A_g,gap\n", 0), 0u);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 17);
}

// --- join / meet ---------------------------------------------------------------------------

TEST_F(SpecFiles, JoinWritesSpecAndCsv) {
  const std::string spec = path("join.json");
  const std::string csv = path("join.csv");
  const auto r = run({"join", "--gens", sin_spec() + "," + tan_spec(), "--out-spec", spec, "--out-csv", csv,
                      "--grid", "513"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = read_json_file(spec);
  EXPECT_EQ(j["kind"], "join");
  std::istringstream lines(slurp(csv));
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "x,A1,A2,max,h,h_prime");
  int rows = 0;
  bool saw_zero = false;
  while (std::getline(lines, line)) {
    ++rows;
    std::vector<double> cells;
    std::istringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(std::stod(c));
    ASSERT_EQ(cells.size(), 6u);
    EXPECT_EQ(cells[3], std::max(cells[1], cells[2]));
    if (cells[0] == 0.0) {
      saw_zero = true;
      EXPECT_EQ(cells[3], 0.0);
    }
  }
  EXPECT_EQ(rows, 513);
  EXPECT_TRUE(saw_zero);
}

TEST_F(SpecFiles, JoinCsvIsDeterministic) {
  const std::vector<std::string> base{"join", "--gen", sin_spec(), "--gen2", tan_spec(), "--grid", "64"};
  auto a = base, b = base;
  a.insert(a.end(), {"--out-csv", path("a.csv")});
  b.insert(b.end(), {"--out-csv", path("b.csv")});
  ASSERT_EQ(run(a).code, 0);
  ASSERT_EQ(run(b).code, 0);
  EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
}

TEST_F(SpecFiles, MeetAndJoinOfResultSpec) {
  auto r = run({"meet", "--gens", sin_spec() + "," + tan_spec()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(json::parse(r.out)["kind"], "meet");
  // a written result spec is itself a valid operand
  const std::string joined = path("j.json");
  ASSERT_EQ(run({"join", "--gens", sin_spec() + "," + tan_spec(), "--out-spec", joined}).code, 0);
  r = run({"eval", "--gen", joined, "--vector", "0.3,0.3"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "0.300000000000\n");
}

TEST_F(SpecFiles, JoinIdentityCubeExitsThree) {
  const std::string id = write("id.json", R"({"kind":"catalog","name":"identity","interval":[-1,1],"margin":0.01})");
  const std::string cube = write("cube.json", R"({"kind":"catalog","name":"cube","interval":[-1,1],"margin":0.01})");
  const auto r = run({"join", "--gen", id, "--gen2", cube});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("supremum is max(v); not a quasi-arithmetic mean"), std::string::npos) << r.err;
  EXPECT_EQ(run({"join"}).code, 2);
}

// --- smooth -------------------------------------------------------------------------------

TEST_F(SpecFiles, SmoothSingleKink) {
  const std::string s = write("s.json", R"({"kind":"piecewise","interval":[-1,1],"breakpoints":[0],
      "pieces":[{"kind":"catalog","name":"identity"},{"kind":"catalog","name":"identity"}],"scales":[1,2]})");
  const std::string id = write("id.json", R"({"kind":"catalog","name":"identity","interval":[-1,1]})");
  const std::string csv = path("steps.csv");
  const auto r = run({"smooth", "--gen", s, "--gens", id + "," + id, "--out-csv", csv});
  ASSERT_EQ(r.code, 0) << r.err;
  const Generator k = parse_generator(json::parse(r.out));
  EXPECT_DOUBLE_EQ(k.value(0.25), 0.5);
  EXPECT_DOUBLE_EQ(k.value(-0.25), -0.5);
  EXPECT_EQ(slurp(csv).rfind("step,kink,ratio,max_drop\n1,0,2,", 0), 0u) << slurp(csv);
}

TEST_F(SpecFiles, SmoothNonMemberExitsTwo) {
  const std::string s = write("s.json", R"({"kind":"piecewise","interval":[-1,1],"breakpoints":[0],
      "pieces":[{"kind":"catalog","name":"identity"},{"kind":"catalog","name":"identity"}],"scales":[2,1]})");
  const std::string id = write("id.json", R"({"kind":"catalog","name":"identity","interval":[-1,1]})");
  EXPECT_EQ(run({"smooth", "--gen", s, "--gen2", id}).code, 2);
}

// --- verify and examples ---------------------------------------------------------------------

TEST(Cli, VerifyCoarseAndAlternateSeed) {
  for (const auto& args : {std::vector<std::string>{"verify", "--grid", "8"},
                           std::vector<std::string>{"verify", "--seed", "7"}}) {
    const auto r = run(args);
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_EQ(r.out.rfind("# seed=", 0), 0u);
    EXPECT_EQ(r.out.find("FAIL"), std::string::npos) << r.out;
  }
}

TEST(Cli, DefaultGridFromEnvironment) {
  ::setenv("QAM_DEFAULT_GRID", "4", 1);
  const auto bad = run({"verify"});
  ::setenv("QAM_DEFAULT_GRID", "many", 1);
  const auto junk = run({"verify"});
  ::unsetenv("QAM_DEFAULT_GRID");
  EXPECT_EQ(bad.code, 2);
  EXPECT_EQ(junk.code, 2);
}

TEST(Cli, BundledExamples) {
  for (const char* name : {"sin-tan-join", "sin-tan-meet", "cube-incomparable", "l1-convergence"}) {
    const auto r = run({"example", name});
    EXPECT_EQ(r.code, 0) << name << "\n" << r.out << r.err;
  }
  EXPECT_EQ(run({"example", "nope"}).code, 2);
}
