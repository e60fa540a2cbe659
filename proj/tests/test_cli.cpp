#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace {

namespace fs = std::filesystem;

struct Result {
  int code = -1;
  std::string out;
};

fs::path Scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("dephase_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Result Run(const std::string& args, const std::string& env = "") {
  const fs::path out = Scratch() / "stdout.txt";
  const std::string cmd = env + (env.empty() ? "" : " ") + "\"" DEPHASE_CLI_PATH "\" " + args +
                          " > \"" + out.string() + "\" 2>/dev/null";
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = Slurp(out);
  return r;
}

}  // namespace

TEST_CASE("qfi command") {
  auto r = Run("qfi --state cosine --j 200 --delta 0.03");
  REQUIRE(r.code == 0);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j.at("f_theta").get<double>() == doctest::Approx(1 / 0.0302467).epsilon(0.01));
  r = Run("qfi --state noon --j 4 --delta 0");
  j = nlohmann::json::parse(r.out);
  CHECK(j.at("f_theta").get<double>() == doctest::Approx(16.0));
  CHECK(j.at("f_delta").is_null());
  r = Run("qfi --state flat --j 2 --delta 0");
  CHECK(nlohmann::json::parse(r.out).at("f_theta").get<double>() == doctest::Approx(8.0 / 3));
  r = Run("qfi --state cosine --j 10 --delta 0.1 --format csv");
  CHECK(r.code == 0);
  CHECK(r.out.rfind("state,twice_j,delta,f_theta,f_delta,inv_f_minus_delta", 0) == 0);
}

TEST_CASE("usage errors exit with 2") {
  CHECK(Run("qfi --state squeezed --j 10 --delta 0.1").code == 2);
  CHECK(Run("qfi --state holland_burnett --j 9 --delta 0.1").code == 2);
  CHECK(Run("qfi --state cosine --delta 0.1").code == 2);
  CHECK(Run("qfi --state cosine --j 10 --delta -1").code == 2);
  CHECK(Run("frobnicate").code == 2);
  CHECK(Run("").code == 2);
  CHECK(Run("sweep --j 10").code == 2);
  CHECK(Run("sweep --states '' --j 10").code == 2);
  CHECK(Run("measure --state cosine --j 100 --delta 0.03 --grid 16").code == 2);
  CHECK(Run("crossover --pair 1,9").code == 2);
  CHECK(Run("crossover").code == 2);
  CHECK(Run("qfi --state cosine --j 4 --delta 0.1 --format xml").code == 2);
  CHECK(Run("sweep --config /nonexistent/sweep.json").code == 2);
}

TEST_CASE("numerical failures exit with 3") {
  CHECK(Run("optimize --j 4 --delta 0 --objective diffusion_qfi").code == 3);
}

TEST_CASE("sweep csv has a header and 17 significant digits") {
  auto r = Run("sweep --states cosine,flat --j 10,20 --delta-min 0.01 --delta-max 0.1 --points 4");
  REQUIRE(r.code == 0);
  std::stringstream ss(r.out);
  std::string line;
  std::getline(ss, line);
  CHECK(line ==
        "state,twice_j,delta,f_theta,f_delta,inv_f_minus_delta,pred_inv_f_theta,"
        "pred_inv_f_delta,mass,asymptotic_valid");
  int rows = 0;
  std::string first;
  while (std::getline(ss, line)) {
    if (rows == 0) first = line;
    ++rows;
  }
  CHECK(rows == 16);
  // f_theta column
  std::stringstream fs(first);
  std::string cell;
  for (int i = 0; i < 4; ++i) std::getline(fs, cell, ',');
  std::string digits;
  for (char c : cell.substr(0, cell.find('e'))) {
    if (std::isdigit(static_cast<unsigned char>(c))) digits += c;
  }
  while (!digits.empty() && digits.front() == '0') digits.erase(digits.begin());
  CHECK(digits.size() == 17);
}

TEST_CASE("sweep config file and thread override") {
  const fs::path cfg = Scratch() / "sweep.json";
  std::ofstream(cfg) << R"({"states": ["cosine", "coherent"], "twice_j": [12],
                            "delta_values": [0.0, 0.02, 0.2]})";
  const auto a = Run("sweep --config " + cfg.string() + " --threads 1");
  const auto b = Run("sweep --config " + cfg.string() + " --threads 1", "DEPHASE_THREADS=3");
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  std::ofstream(cfg) << R"({"states": ["cosine"], "twice_j": [12], "bogus": 1})";
  CHECK(Run("sweep --config " + cfg.string()).code == 2);
}

TEST_CASE("measure output is byte identical for a fixed seed") {
  const std::string args = "measure --state cosine --j 100 --delta 0.03 --shots 100000 --seed 7";
  const auto a = Run(args);
  const auto b = Run(args);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out.rfind("shot,phase\n", 0) == 0);
  CHECK(a.out != Run("measure --state cosine --j 100 --delta 0.03 --shots 100000 --seed 8").out);
  const fs::path f1 = Scratch() / "m1.csv";
  const fs::path f2 = Scratch() / "m2.csv";
  const std::string camp = "measure --state cosine --j 40 --delta 0.05 --shots 50 --trials 40 --emit estimates";
  CHECK(Run(camp + " --threads 1 --out " + f1.string()).code == 0);
  CHECK(Run(camp + " --threads 4 --out " + f2.string()).code == 0);
  CHECK(Slurp(f1) == Slurp(f2));
  CHECK(Slurp(f1).rfind("trial,theta_hat,delta_hat\n", 0) == 0);
  const auto corr = Run("measure --state cosine --j 18 --delta 2 --emit corrected");
  CHECK(nlohmann::json::parse(corr.out).contains("corrected_error"));
}

TEST_CASE("optimize command") {
  const fs::path meta = Scratch() / "meta.json";
  const auto r = Run("optimize --j 6 --delta 0.1 --metadata " + meta.string());
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("m,amplitude\n", 0) == 0);
  const auto j = nlohmann::json::parse(Slurp(meta));
  CHECK(j.at("objective") == "phase_qfi");
  CHECK(j.contains("value"));
  CHECK(j.contains("starts"));
  CHECK(j.contains("iterations"));
  CHECK(Run("optimize --j 6 --delta 0.1").out == r.out);
  CHECK(Run("optimize --j 6 --delta 0.1 --objective entropy").code == 2);
}

TEST_CASE("crossover command") {
  const auto r = Run("crossover --partition 12 --delta 0.06 --max-cluster 5");
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j.at("cluster_size") == 3);
  CHECK(j.at("method") == "exact");
}

TEST_CASE("validate quick exits 0") {
  const auto r = Run("validate --quick");
  CHECK(r.code == 0);
  CHECK(r.out.find("FAIL") == std::string::npos);
  CHECK(r.out.find("PASS qfi_fidelity_oracle") != std::string::npos);
}
