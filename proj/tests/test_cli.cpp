#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace {

struct Run {
  int status = -1;
  std::string out;
};

// Runs the CLI with stderr merged into the captured output.
Run run(const std::string& args) {
  const std::string cmd = std::string(IFS_CLI_PATH) + " " + args + " 2>&1";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string cfg(const std::string& name) { return std::string(" --config ") + IFS_CONFIG_DIR + "/" + name; }

std::vector<std::vector<std::string>> csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) row.push_back(cell);
    rows.push_back(row);
  }
  return rows;
}

std::string temp_file(const std::string& name, const std::string& content) {
  const std::string path = ::testing::TempDir() + name;
  std::ofstream(path) << content;
  return path;
}

}  // namespace

TEST(Cli, ValidateCantor) {
  const auto r = run("validate" + cfg("cantor.cfg"));
  EXPECT_EQ(r.status, 0) << r.out;
  EXPECT_NE(r.out.find("d = 1/3"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("0^ = 0"), std::string::npos);
}

TEST(Cli, ValidateTouchingReportsAmbiguity) {
  const auto r = run("validate" + cfg("touching.cfg"));
  EXPECT_EQ(r.status, 0) << r.out;
  EXPECT_NE(r.out.find("N_b = {0}"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("zb_active = true"), std::string::npos) << r.out;
}

TEST(Cli, TilingIsRejected) {
  const auto r = run("validate" + cfg("tiling.cfg"));
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.out.find("CoverViolation"), std::string::npos) << r.out;
}

TEST(Cli, ParseAndIoErrors) {
  const auto path = temp_file("ifs_bad.cfg", "n_maps = two\n");
  EXPECT_EQ(run("validate --config " + path).status, 3);
  EXPECT_EQ(run("validate --config /nonexistent/x.cfg").status, 3);
  EXPECT_EQ(run("validate").status, 3);          // --config missing
  EXPECT_EQ(run("frobnicate").status, 3);        // unknown subcommand
}

TEST(Cli, BadProbabilities) {
  const auto path = temp_file("ifs_badp.cfg",
                              "n_maps = 2\nmap.0.slope = 1/3\nmap.0.intercept = 0\n"
                              "map.1.slope = 1/3\nmap.1.intercept = 2/3\nprobabilities = 0.6, 0.5\n");
  const auto r = run("curve --grid 4 --config " + path);
  EXPECT_EQ(r.status, 2) << r.out;
}

TEST(Cli, CurveCantor) {
  const auto r = run("curve --grid 4" + cfg("cantor.cfg"));
  ASSERT_EQ(r.status, 0) << r.out;
  const auto rows = csv(r.out);
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"x", "phi"}));
  EXPECT_EQ(rows[1], (std::vector<std::string>{"0", "0"}));
  EXPECT_NEAR(std::stod(rows[2][1]), 1.0 / 3.0, 1e-9);
  EXPECT_EQ(std::stod(rows[3][1]), 0.5);
  EXPECT_EQ(rows[5], (std::vector<std::string>{"1", "1"}));
}

TEST(Cli, CurveShiftedFlanks) {
  const auto r = run("curve --grid 8" + cfg("shifted.cfg"));
  ASSERT_EQ(r.status, 0) << r.out;
  const auto rows = csv(r.out);
  ASSERT_EQ(rows.size(), 10u);
  for (int i = 1; i <= 3; ++i) EXPECT_EQ(rows[i][1], "0") << i;
  EXPECT_EQ(rows[8][1], "1");
  EXPECT_EQ(rows[9][1], "1");
  const auto two = csv(run("curve --grid 2" + cfg("shifted.cfg")).out);
  ASSERT_EQ(two.size(), 4u);
  EXPECT_EQ(two[1][1], "0");
  EXPECT_EQ(two[3][1], "1");
}

TEST(Cli, OutputIsByteIdenticalAcrossRuns) {
  for (const char* args : {"curve --grid 64", "gaps --depth 3", "sample --samples 50 --seed 3"}) {
    const auto a = run(std::string(args) + cfg("cantor_biased.cfg"));
    const auto b = run(std::string(args) + cfg("cantor_biased.cfg"));
    EXPECT_EQ(a.status, 0) << a.out;
    EXPECT_EQ(a.out, b.out) << args;
  }
}

TEST(Cli, OutFile) {
  const std::string path = ::testing::TempDir() + "ifs_curve.csv";
  ASSERT_EQ(run("curve --grid 4 --out " + path + cfg("cantor.cfg")).status, 0);
  std::ifstream in(path, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  EXPECT_EQ(s.str(), run("curve --grid 4" + cfg("cantor.cfg")).out);
}

TEST(Cli, GapsHeaderAndRows) {
  const auto r = run("gaps --depth 2" + cfg("cantor.cfg"));
  ASSERT_EQ(r.status, 0) << r.out;
  const auto rows = csv(r.out);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"depth", "left", "right", "digits"}));
  EXPECT_EQ(rows[1][3], "0");
  EXPECT_NEAR(std::stod(rows[1][1]), 1.0 / 3.0, 1e-16);
}

TEST(Cli, EvalExactPoints) {
  const auto r = run("eval" + cfg("cantor_biased.cfg") + " 2/3 1/2 0");
  ASSERT_EQ(r.status, 0) << r.out;
  EXPECT_NE(r.out.find("2/3,1/3,0,"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("1/2,1/3,0,gap 0"), std::string::npos) << r.out;
  EXPECT_EQ(run("eval" + cfg("cantor.cfg") + " 1.5").status, 1);
}

TEST(Cli, JsonOutput) {
  const auto r = run("curve --grid 2 --json --depth 2" + cfg("cantor.cfg"));
  ASSERT_EQ(r.status, 0) << r.out;
  EXPECT_EQ(r.out.front(), '[');
  EXPECT_NE(r.out.find("\"exact_value\": \"3/4\""), std::string::npos) << r.out;
}

TEST(Cli, VerifyAllConfigs) {
  for (const char* name : {"cantor.cfg", "cantor_biased.cfg", "touching.cfg", "shifted.cfg", "poly.cfg"}) {
    const auto r = run("verify --samples 20000 --grid 200" + cfg(name));
    EXPECT_EQ(r.status, 0) << name << "\n" << r.out;
    EXPECT_NE(r.out.find("all checks passed"), std::string::npos) << name;
  }
}

TEST(Cli, Independence) {
  const auto r = run("independence --grid 16 --p \"1/3, 2/3\" --p \"1/4, 3/4\"" + cfg("cantor.cfg"));
  EXPECT_EQ(r.status, 0) << r.out;
  EXPECT_NE(r.out.find("rank: 3"), std::string::npos) << r.out;
}
