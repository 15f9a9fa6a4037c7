#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "vecci/algorithms.hpp"
#include "vecci/bench.hpp"
#include "vecci/citest.hpp"
#include "vecci/graph.hpp"
#include "vecci/synth.hpp"

namespace vecci::jsonio {

std::string to_string(citest::GroupConditioning mode);
citest::GroupConditioning conditioning_from_string(const std::string& name);

// {"n", "m", "edges"} with nodes relabelled canonically: the X group becomes
// 0..n-1 (in stored order) and the Y group n..n+m-1.
nlohmann::json grouped_dag_to_json(const graph::GroupedDag& gd);
graph::GroupedDag grouped_dag_from_json(const nlohmann::json& doc);

// Model provenance: group sizes, mechanism, coefficient triplets (local ids),
// interaction triplets, noise variances, and the seed that produced it.
nlohmann::json model_to_json(const synth::LinearGroupModel& model, std::uint64_t seed);
synth::LinearGroupModel model_from_json(const nlohmann::json& doc);

nlohmann::json report_to_json(const algorithms::DirectionReport& report);
nlohmann::json report_to_json(const algorithms::VanillaReport& report);
nlohmann::json report_to_json(const algorithms::TraceReport& report);

// Grid config file: base model fields at the top level, "axes" as an ordered
// array of {"name", "values"} objects, plus method/threshold/backend settings.
// Unknown keys are rejected.
bench::ExperimentGrid grid_from_json(const nlohmann::json& doc);
bench::ExperimentGrid read_grid_file(const std::string& path);

}  // namespace vecci::jsonio
