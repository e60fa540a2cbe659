#include "dephase/serialization.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <json.hpp>

namespace dephase {
namespace {

using Json = nlohmann::ordered_json;

Json Number(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

}  // namespace

std::string FormatDouble(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void WriteProbeStateCsv(std::ostream& out, const ProbeState& state) {
  out << "m,amplitude\n";
  const SpinDimension dim = state.dim();
  for (int i = 0; i < dim.dim(); ++i) {
    out << FormatDouble(dim.m(i)) << ',' << FormatDouble(state.amplitude(i))
        << '\n';
  }
}

ProbeState ReadProbeStateCsv(std::istream& in, std::string label) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("m,amplitude", 0) != 0) {
    throw std::invalid_argument("expected header 'm,amplitude'");
  }
  std::vector<double> m;
  std::vector<double> amp;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw std::invalid_argument("malformed row '" + line + "'");
    }
    try {
      m.push_back(std::stod(line.substr(0, comma)));
      amp.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw std::invalid_argument("malformed row '" + line + "'");
    }
  }
  if (amp.size() < 2) throw std::invalid_argument("need at least two rows");
  const auto dim = SpinDimension::FromTwiceJ(static_cast<int>(amp.size()) - 1);
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (std::abs(m[i] - dim.m(static_cast<int>(i))) > 1e-9) {
      throw std::invalid_argument("rows must list m = -j..j in order");
    }
  }
  return ProbeState(dim, std::move(amp), std::move(label));
}

std::string ProbeStateJson(const ProbeState& state) {
  Json j;
  j["twice_j"] = state.dim().twice_j();
  j["label"] = state.label();
  j["amplitudes"] =
      std::vector<double>(state.amplitudes().begin(), state.amplitudes().end());
  return j.dump();
}

ProbeState ProbeStateFromJson(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
    const int twice_j = j.at("twice_j").get<int>();
    auto amp = j.at("amplitudes").get<std::vector<double>>();
    const std::string label = j.value("label", std::string("custom"));
    return ProbeState(SpinDimension::FromTwiceJ(twice_j), std::move(amp), label);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("bad probe state JSON: ") + e.what());
  }
}

std::string QfiReportJson(const QfiReport& r) {
  Json j;
  j["state"] = r.state;
  j["twice_j"] = r.twice_j;
  j["delta"] = r.delta;
  j["theta"] = r.theta;
  j["f_theta"] = Number(r.f_theta);
  j["f_delta"] = Number(r.f_delta);
  j["cross_im"] = r.cross_im;
  j["inv_f_minus_delta"] = Number(1.0 / r.f_theta - r.delta);
  const auto& p = r.predictions;
  j["predictions"] = {{"inv_f_theta", p.inv_f_theta},
                      {"inv_f_delta", p.inv_f_delta},
                      {"gradient_integral", p.gradient_integral},
                      {"mass", p.mass},
                      {"valid", p.valid}};
  return j.dump();
}

std::string OptimizationJson(const OptimizationProblem& problem,
                             const OptimizationResult& result) {
  Json j;
  j["objective"] = std::string(ObjectiveName(problem.objective));
  j["twice_j"] = problem.dim.twice_j();
  j["delta"] = problem.setting.delta;
  j["value"] = result.best_value;
  j["iterations"] = result.iterations;
  j["converged"] = result.converged;
  j["best_start"] = result.best_start;
  Json starts = Json::array();
  for (const auto& s : result.starts) {
    starts.push_back({{"label", s.label},
                      {"initial_value", s.initial_value},
                      {"final_value", s.final_value},
                      {"iterations", s.iterations},
                      {"converged", s.converged},
                      {"gradient_norm", s.gradient_norm}});
  }
  j["starts"] = std::move(starts);
  return j.dump();
}

void WriteDistributionCsv(std::ostream& out, const PhaseDistribution& dist) {
  out << "angle,density\n";
  for (int g = 0; g < dist.size(); ++g) {
    out << FormatDouble(dist.angle(g)) << ',' << FormatDouble(dist[g]) << '\n';
  }
}

void WriteCampaignCsv(std::ostream& out, const CampaignResult& result) {
  out << "trial,theta_hat,delta_hat\n";
  for (std::size_t t = 0; t < result.runs.size(); ++t) {
    out << t << ',' << FormatDouble(result.runs[t].theta_hat) << ','
        << FormatDouble(result.runs[t].delta_hat) << '\n';
  }
}

std::string CampaignSummaryJson(const CampaignResult& r) {
  Json j;
  j["trials"] = r.runs.size();
  j["shots"] = r.runs.empty() ? 0 : r.runs.front().shots;
  j["mse_theta"] = r.mse_theta;
  j["mse_delta"] = r.mse_delta;
  j["crb_theta"] = r.crb_theta;
  j["crb_delta"] = r.crb_delta;
  j["predicted_delta"] = r.predicted_delta;
  j["mean_delta_hat"] = r.mean_delta_hat;
  j["measurement_variance"] = r.measurement_variance;
  j["f_theta"] = Number(r.f_theta);
  j["f_delta"] = Number(r.f_delta);
  return j.dump();
}

std::string CorrectedErrorJson(const CorrectedErrorReport& r) {
  Json j;
  j["p_tilde_at_pi"] = r.p_tilde_at_pi;
  j["uncorrected"] = r.uncorrected;
  j["corrected_error"] = Number(r.corrected_error);
  j["factor"] = Number(r.factor);
  return j.dump();
}

}  // namespace dephase
