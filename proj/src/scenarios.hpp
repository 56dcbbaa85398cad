#pragma once

#include "qtoken/sim_harness.hpp"

namespace qtoken::sim::detail {

ExperimentResult honest_flow(const ScenarioSpec& spec, int k);
ExperimentResult adversarial_history(const ScenarioSpec& spec, int k);
ExperimentResult forgery(const ScenarioSpec& spec, int k);
ExperimentResult tracking_audit(const ScenarioSpec& spec, int k);
ExperimentResult otp_roundtrip(const ScenarioSpec& spec, int k);
ExperimentResult voting(const ScenarioSpec& spec, int k);

std::vector<std::string> split_strategies(const std::string& list);

}  // namespace qtoken::sim::detail
