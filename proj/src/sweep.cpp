#include "dephase/sweep.hpp"

#include <cmath>
#include <ostream>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "dephase/parallel.hpp"
#include "dephase/serialization.hpp"

namespace dephase {

std::vector<double> DeltaRange::Values() const {
  if (points < 1) throw std::invalid_argument("delta points must be >= 1");
  if (!(min >= 0.0) || !(max >= min) || !std::isfinite(max)) {
    throw std::invalid_argument("delta range must satisfy 0 <= min <= max");
  }
  if (log && min <= 0.0) {
    throw std::invalid_argument("log-spaced delta range needs min > 0");
  }
  std::vector<double> v(points);
  if (points == 1) {
    v[0] = min;
    return v;
  }
  for (int i = 0; i < points; ++i) {
    const double t = static_cast<double>(i) / (points - 1);
    v[i] = log ? std::exp(std::log(min) + t * (std::log(max) - std::log(min)))
               : min + t * (max - min);
  }
  v.back() = max;
  return v;
}

void SweepConfig::Validate() const {
  if (states.empty()) throw std::invalid_argument("sweep needs at least one state");
  if (twice_j.empty()) throw std::invalid_argument("sweep needs at least one j");
  for (int tj : twice_j) {
    if (tj < 1) throw std::invalid_argument("twice_j must be >= 1");
  }
  for (double d : Deltas()) {
    if (!(d >= 0.0) || !std::isfinite(d)) {
      throw std::invalid_argument("delta must be finite and >= 0");
    }
  }
  if (!std::isfinite(theta)) throw std::invalid_argument("theta must be finite");
}

std::vector<double> SweepConfig::Deltas() const {
  return delta_values.empty() ? delta.Values() : delta_values;
}

SweepConfig SweepConfig::FromJson(const std::string& text) {
  static const std::set<std::string> kKeys = {
      "states", "twice_j", "delta", "delta_values", "theta",
      "gaussian_width", "output", "threads"};
  SweepConfig c;
  try {
    const auto j = nlohmann::json::parse(text);
    if (!j.is_object()) throw std::invalid_argument("config must be an object");
    for (const auto& [key, value] : j.items()) {
      if (!kKeys.count(key)) {
        throw std::invalid_argument("unknown config key '" + key + "'");
      }
    }
    c.states = j.at("states").get<std::vector<std::string>>();
    c.twice_j = j.at("twice_j").get<std::vector<int>>();
    if (j.contains("delta")) {
      const auto& d = j.at("delta");
      c.delta.min = d.value("min", c.delta.min);
      c.delta.max = d.value("max", c.delta.max);
      c.delta.points = d.value("points", c.delta.points);
      c.delta.log = d.value("log", c.delta.log);
    }
    if (j.contains("delta_values")) {
      c.delta_values = j.at("delta_values").get<std::vector<double>>();
    }
    c.theta = j.value("theta", 0.0);
    c.gaussian_width = j.value("gaussian_width", 0.0);
    c.output = j.value("output", std::string());
    c.threads = j.value("threads", 0);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("bad sweep config: ") + e.what());
  }
  c.Validate();
  return c;
}

std::vector<QfiReport> RunSweep(const SweepConfig& config, int threads) {
  config.Validate();
  const std::vector<double> deltas = config.Deltas();
  struct Point {
    std::string state;
    int twice_j;
    double delta;
  };
  std::vector<Point> points;
  for (const auto& s : config.states) {
    for (int tj : config.twice_j) {
      // Construct once up front so bad labels fail before any work starts.
      MakeNamedState(s, SpinDimension::FromTwiceJ(tj), config.gaussian_width);
      for (double d : deltas) points.push_back({s, tj, d});
    }
  }
  std::vector<QfiReport> rows(points.size());
  ParallelFor(static_cast<int>(points.size()), threads, [&](int i) {
    const Point& p = points[i];
    const ProbeState state = MakeNamedState(
        p.state, SpinDimension::FromTwiceJ(p.twice_j), config.gaussian_width);
    rows[i] = ComputeQfiReport(state, {p.delta, config.theta});
  });
  return rows;
}

void WriteSweepCsv(std::ostream& out, const std::vector<QfiReport>& rows) {
  out << "state,twice_j,delta,f_theta,f_delta,inv_f_minus_delta,"
         "pred_inv_f_theta,pred_inv_f_delta,mass,asymptotic_valid\n";
  for (const auto& r : rows) {
    out << r.state << ',' << r.twice_j << ',' << FormatDouble(r.delta) << ','
        << FormatDouble(r.f_theta) << ',' << FormatDouble(r.f_delta) << ','
        << FormatDouble(1.0 / r.f_theta - r.delta) << ','
        << FormatDouble(r.predictions.inv_f_theta) << ','
        << FormatDouble(r.predictions.inv_f_delta) << ','
        << FormatDouble(r.predictions.mass) << ','
        << (r.predictions.valid ? 1 : 0) << '\n';
  }
}

}  // namespace dephase
