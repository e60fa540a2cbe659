#pragma once

#include <iosfwd>
#include <string>

#include "dephase/clustering.hpp"
#include "dephase/measurement.hpp"
#include "dephase/probe_optimizer.hpp"
#include "dephase/qfi.hpp"
#include "dephase/spin_state.hpp"

namespace dephase {

// 17 significant digits, '.' decimal point; "inf", "-inf", "nan" for
// non-finite values.
std::string FormatDouble(double value);

// Header "m,amplitude", one row per basis state in ascending m.
void WriteProbeStateCsv(std::ostream& out, const ProbeState& state);
ProbeState ReadProbeStateCsv(std::istream& in, std::string label = "custom");

// {"twice_j", "label", "amplitudes"}
std::string ProbeStateJson(const ProbeState& state);
ProbeState ProbeStateFromJson(const std::string& text);

// Infinite values are written as null.
std::string QfiReportJson(const QfiReport& report);

// {objective, value, starts, iterations, ...}
std::string OptimizationJson(const OptimizationProblem& problem,
                             const OptimizationResult& result);

// Header "angle,density".
void WriteDistributionCsv(std::ostream& out, const PhaseDistribution& dist);

// Header "trial,theta_hat,delta_hat".
void WriteCampaignCsv(std::ostream& out, const CampaignResult& result);
// {mse_theta, mse_delta, crb_theta, crb_delta, ...}
std::string CampaignSummaryJson(const CampaignResult& result);

std::string CorrectedErrorJson(const CorrectedErrorReport& report);

}  // namespace dephase
