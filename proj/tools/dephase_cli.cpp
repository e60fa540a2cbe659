#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dephase/clustering.hpp"
#include "dephase/errors.hpp"
#include "dephase/measurement.hpp"
#include "dephase/parallel.hpp"
#include "dephase/probe_optimizer.hpp"
#include "dephase/qfi.hpp"
#include "dephase/serialization.hpp"
#include "dephase/sweep.hpp"
#include "dephase/validation.hpp"

namespace {

using namespace dephase;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitValidation = 4;

struct Common {
  std::string out;
  std::string format;
  std::uint64_t seed = 1;
  int threads = 0;
};

void AddCommon(CLI::App* cmd, Common& c, const std::string& default_format) {
  c.format = default_format;
  cmd->add_option("--out", c.out, "Write output to this file instead of stdout");
  cmd->add_option("--format", c.format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--seed", c.seed, "Random seed");
  cmd->add_option("--threads", c.threads,
                  "Worker threads (0 = all cores; DEPHASE_THREADS overrides)");
}

// Writes to --out or stdout.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw std::invalid_argument("cannot open '" + path + "'");
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> SplitList(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

struct QfiArgs {
  Common common;
  std::string state;
  int twice_j = 0;
  double delta = 0.0;
  double theta = 0.0;
  double width = 0.0;
};

int RunQfi(const QfiArgs& a) {
  const ProbeState s =
      MakeNamedState(a.state, SpinDimension::FromTwiceJ(a.twice_j), a.width);
  const QfiReport r = ComputeQfiReport(s, {a.delta, a.theta});
  Sink sink(a.common.out);
  if (a.common.format == "csv") {
    WriteSweepCsv(sink.stream(), {r});
  } else {
    sink.stream() << QfiReportJson(r) << '\n';
  }
  return kExitOk;
}

struct SweepArgs {
  Common common;
  std::string config;
  std::string states;
  std::vector<int> twice_j;
  double delta_min = 1e-4;
  double delta_max = 3.0;
  int points = 60;
  bool linear = false;
  double theta = 0.0;
  double width = 0.0;
};

int RunSweepCmd(const SweepArgs& a, bool threads_given) {
  SweepConfig c;
  if (!a.config.empty()) {
    c = SweepConfig::FromJson(ReadFile(a.config));
  } else {
    c.states = SplitList(a.states);
    c.twice_j = a.twice_j;
    c.delta = {a.delta_min, a.delta_max, a.points, !a.linear};
    c.theta = a.theta;
    c.gaussian_width = a.width;
  }
  if (!a.common.out.empty()) c.output = a.common.out;
  const int requested = threads_given || a.config.empty() ? a.common.threads
                                                          : c.threads;
  const auto rows = RunSweep(c, ResolveThreadCount(requested));
  Sink sink(c.output);
  if (a.common.format == "json") {
    sink.stream() << '[';
    for (std::size_t i = 0; i < rows.size(); ++i) {
      sink.stream() << (i ? "," : "") << QfiReportJson(rows[i]);
    }
    sink.stream() << "]\n";
  } else {
    WriteSweepCsv(sink.stream(), rows);
  }
  return kExitOk;
}

struct OptimizeArgs {
  Common common;
  int twice_j = 0;
  double delta = 0.0;
  std::string objective = "phase_qfi";
  int random_starts = 0;
  bool asymmetric = false;
  bool finite_difference = false;
  int max_iterations = 5000;
  std::string metadata;
};

int RunOptimize(const OptimizeArgs& a) {
  OptimizationProblem p;
  p.dim = SpinDimension::FromTwiceJ(a.twice_j);
  p.setting = {a.delta, 0.0};
  p.objective = ParseObjective(a.objective);
  p.symmetric = !a.asymmetric;
  p.starts = DefaultStarts(p.dim);
  for (auto& s : RandomStarts(p.dim, a.random_starts, a.common.seed, p.symmetric)) {
    p.starts.push_back(std::move(s));
  }
  p.tolerances.max_iterations = a.max_iterations;
  p.gradient = a.finite_difference ? GradientMethod::kFiniteDifference
                                   : GradientMethod::kAnalytic;
  p.threads = ResolveThreadCount(a.common.threads);
  const OptimizationResult r = Optimize(p);
  const std::string meta = OptimizationJson(p, r);
  Sink sink(a.common.out);
  if (a.common.format == "json") {
    auto j = nlohmann::ordered_json::parse(meta);
    j["state"] = nlohmann::json::parse(ProbeStateJson(r.best_state));
    sink.stream() << j.dump() << '\n';
  } else {
    WriteProbeStateCsv(sink.stream(), r.best_state);
    if (!a.metadata.empty()) {
      Sink m(a.metadata);
      m.stream() << meta << '\n';
    } else if (!a.common.out.empty()) {
      std::cout << meta << '\n';
    }
  }
  return kExitOk;
}

struct MeasureArgs {
  Common common;
  std::string state;
  int twice_j = 0;
  double delta = 0.0;
  double theta = 0.0;
  double width = 0.0;
  int shots = 100;
  int trials = 1;
  int grid = kDefaultGridSize;
  std::string mode = "convolved";
  std::string emit = "samples";
};

int RunMeasure(const MeasureArgs& a) {
  const ProbeState s =
      MakeNamedState(a.state, SpinDimension::FromTwiceJ(a.twice_j), a.width);
  const NoiseSetting setting{a.delta, a.theta};
  Sink sink(a.common.out);
  auto& os = sink.stream();
  if (a.emit == "distribution") {
    const auto dist = ConvolvedDistribution(s, setting, a.grid);
    if (a.common.format == "json") {
      nlohmann::ordered_json j;
      j["grid"] = dist.size();
      j["wrapped_variance"] = WrappedVariance(dist, a.theta);
      j["classical_fisher"] = ClassicalFisher(dist);
      j["density"] = std::vector<double>(dist.density().begin(), dist.density().end());
      os << j.dump() << '\n';
    } else {
      WriteDistributionCsv(os, dist);
    }
    return kExitOk;
  }
  if (a.emit == "corrected") {
    os << CorrectedErrorJson(CorrectedError(s, setting, a.grid)) << '\n';
    return kExitOk;
  }
  CampaignOptions o;
  o.shots = a.shots;
  o.trials = a.trials;
  o.seed = a.common.seed;
  o.threads = ResolveThreadCount(a.common.threads);
  o.grid_size = a.grid;
  o.mode = a.mode == "two_stage" ? SamplingMode::kTwoStage : SamplingMode::kConvolved;
  o.keep_samples = a.emit == "samples" && a.trials == 1;
  const CampaignResult r = RunEstimatorCampaign(s, setting, o);
  if (a.common.format == "json") {
    os << CampaignSummaryJson(r) << '\n';
  } else if (o.keep_samples) {
    os << "shot,phase\n";
    const auto& samples = r.runs.front().samples;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      os << i << ',' << FormatDouble(samples[i]) << '\n';
    }
  } else {
    WriteCampaignCsv(os, r);
  }
  return kExitOk;
}

struct CrossoverArgs {
  Common common;
  std::string pair;
  int partition = 0;
  double delta = 0.0;
  int max_cluster = 8;
};

int RunCrossover(const CrossoverArgs& a) {
  Sink sink(a.common.out);
  if (a.partition > 0) {
    const ClusterPlan plan = BestPartition(a.partition, a.delta, a.max_cluster,
                                           SharedClusterCache(),
                                           ResolveThreadCount(a.common.threads));
    const ShotNoiseReport b = CheckShotNoiseBounds(plan);
    auto j = nlohmann::ordered_json::parse(ClusterPlanJson(plan));
    j["inv_f"] = b.inv_f;
    j["above_lower"] = b.above_lower;
    j["ratio_to_upper"] = b.ratio_to_upper;
    sink.stream() << j.dump() << '\n';
    return kExitOk;
  }
  const auto parts = SplitList(a.pair);
  if (parts.size() != 2) throw std::invalid_argument("--pair expects n_small,n_large");
  const int small = std::stoi(parts[0]);
  const int large = std::stoi(parts[1]);
  const double d = CrossoverDelta(small, large);
  if (a.common.format == "csv") {
    sink.stream() << "n_small,n_large,delta_c\n"
                  << small << ',' << large << ',' << FormatDouble(d) << '\n';
  } else {
    nlohmann::ordered_json j;
    j["n_small"] = small;
    j["n_large"] = large;
    j["delta_c"] = d;
    sink.stream() << j.dump() << '\n';
  }
  return kExitOk;
}

struct ValidateArgs {
  Common common;
  bool quick = false;
};

int RunValidate(const ValidateArgs& a) {
  const auto results =
      RunValidationSuite(a.quick, ResolveThreadCount(a.common.threads));
  bool ok = true;
  Sink sink(a.common.out);
  if (a.common.format == "json") {
    nlohmann::ordered_json j = nlohmann::ordered_json::array();
    for (const auto& r : results) {
      j.push_back({{"name", r.name}, {"passed", r.passed}, {"detail", r.detail}});
      ok = ok && r.passed;
    }
    sink.stream() << j.dump() << '\n';
  } else {
    for (const auto& r : results) {
      sink.stream() << (r.passed ? "PASS " : "FAIL ") << r.name;
      if (!r.detail.empty()) sink.stream() << "  " << r.detail;
      sink.stream() << '\n';
      ok = ok && r.passed;
    }
  }
  return ok ? kExitOk : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phase and dephasing estimation with collective spin probes"};
  app.require_subcommand(1);

  QfiArgs qfi;
  auto* qfi_cmd = app.add_subcommand("qfi", "Exact and asymptotic QFI at one point");
  qfi_cmd->add_option("--state", qfi.state, "Probe label")->required();
  qfi_cmd->add_option("--j", qfi.twice_j, "Twice the total spin (2j = N)")
      ->required()->check(CLI::PositiveNumber);
  qfi_cmd->add_option("--delta", qfi.delta, "Dephasing strength")
      ->required()->check(CLI::NonNegativeNumber);
  qfi_cmd->add_option("--theta", qfi.theta, "Phase");
  qfi_cmd->add_option("--width", qfi.width, "Gaussian width (default sqrt(N)/2)");
  AddCommon(qfi_cmd, qfi.common, "json");

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "QFI over a grid of states, j and delta");
  sweep_cmd->add_option("--config", sweep.config, "JSON sweep configuration");
  sweep_cmd->add_option("--states", sweep.states, "Comma-separated probe labels");
  sweep_cmd->add_option("--j", sweep.twice_j, "Twice the total spin")->delimiter(',');
  sweep_cmd->add_option("--delta-min", sweep.delta_min);
  sweep_cmd->add_option("--delta-max", sweep.delta_max);
  sweep_cmd->add_option("--points", sweep.points);
  sweep_cmd->add_flag("--linear", sweep.linear, "Linear instead of log spacing");
  sweep_cmd->add_option("--theta", sweep.theta);
  sweep_cmd->add_option("--width", sweep.width);
  AddCommon(sweep_cmd, sweep.common, "csv");

  OptimizeArgs opt;
  auto* opt_cmd = app.add_subcommand("optimize", "Optimize the probe profile");
  opt_cmd->add_option("--j", opt.twice_j, "Twice the total spin")
      ->required()->check(CLI::PositiveNumber);
  opt_cmd->add_option("--delta", opt.delta)->required()->check(CLI::NonNegativeNumber);
  opt_cmd->add_option("--objective", opt.objective)
      ->check(CLI::IsMember({"phase_qfi", "diffusion_qfi", "phase_variance"}));
  opt_cmd->add_option("--random-starts", opt.random_starts)->check(CLI::NonNegativeNumber);
  opt_cmd->add_flag("--asymmetric", opt.asymmetric, "Drop the mirror constraint");
  opt_cmd->add_flag("--finite-difference", opt.finite_difference);
  opt_cmd->add_option("--max-iterations", opt.max_iterations)->check(CLI::NonNegativeNumber);
  opt_cmd->add_option("--metadata", opt.metadata, "JSON metadata file (csv format)");
  AddCommon(opt_cmd, opt.common, "csv");

  MeasureArgs meas;
  auto* meas_cmd = app.add_subcommand("measure", "Canonical phase measurement simulation");
  meas_cmd->add_option("--state", meas.state)->required();
  meas_cmd->add_option("--j", meas.twice_j)->required()->check(CLI::PositiveNumber);
  meas_cmd->add_option("--delta", meas.delta)->required()->check(CLI::NonNegativeNumber);
  meas_cmd->add_option("--theta", meas.theta);
  meas_cmd->add_option("--width", meas.width);
  meas_cmd->add_option("--shots", meas.shots)->check(CLI::PositiveNumber);
  meas_cmd->add_option("--trials", meas.trials)->check(CLI::PositiveNumber);
  meas_cmd->add_option("--grid", meas.grid)->check(CLI::PositiveNumber);
  meas_cmd->add_option("--mode", meas.mode)
      ->check(CLI::IsMember({"convolved", "two_stage"}));
  meas_cmd->add_option("--emit", meas.emit)
      ->check(CLI::IsMember({"samples", "estimates", "distribution", "corrected"}));
  AddCommon(meas_cmd, meas.common, "csv");

  CrossoverArgs cross;
  auto* cross_cmd = app.add_subcommand("crossover", "Cluster crossover and partitioning");
  cross_cmd->add_option("--pair", cross.pair, "Cluster sizes n_small,n_large");
  cross_cmd->add_option("--partition", cross.partition, "Particle budget N");
  cross_cmd->add_option("--delta", cross.delta)->check(CLI::NonNegativeNumber);
  cross_cmd->add_option("--max-cluster", cross.max_cluster)->check(CLI::PositiveNumber);
  AddCommon(cross_cmd, cross.common, "json");

  ValidateArgs val;
  auto* val_cmd = app.add_subcommand("validate", "Run the invariant suite");
  val_cmd->add_flag("--quick", val.quick, "Only the small-j oracle checks");
  AddCommon(val_cmd, val.common, "csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*qfi_cmd) return RunQfi(qfi);
    if (*sweep_cmd) {
      if (sweep.config.empty() && (sweep.states.empty() || sweep.twice_j.empty())) {
        throw std::invalid_argument("sweep needs --config or --states and --j");
      }
      return RunSweepCmd(sweep, sweep_cmd->count("--threads") > 0);
    }
    if (*opt_cmd) return RunOptimize(opt);
    if (*meas_cmd) return RunMeasure(meas);
    if (*cross_cmd) {
      if (cross.pair.empty() == (cross.partition == 0)) {
        throw std::invalid_argument("crossover needs exactly one of --pair or --partition");
      }
      return RunCrossover(cross);
    }
    if (*val_cmd) return RunValidate(val);
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::out_of_range& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
