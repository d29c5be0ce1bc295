#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "aqua/dnesa.hpp"
#include "aqua/eval_metrics.hpp"
#include "aqua/losses.hpp"

namespace aqua::report {

using Json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "0.1.0";

/// Floating values carry 9 significant digits in every report; this rounds
/// through "%.9g" so repeated runs serialize byte-identically.
double round9(double v);

Json to_json(const dnesa::DepthQuality& q);
Json to_json(const dnesa::NormalQuality& q);
Json to_json(const dnesa::ScoreWeights& w);
Json to_json(const dnesa::CurationReport& r);
Json to_json(const metrics::DepthMetricRecord& r);
Json to_json(const metrics::NormalMetricRecord& r);
Json to_json(const losses::LossReport& r);

/// Writes JSON (pretty, trailing newline) or CSV. CSV expects an object of
/// the form { rows: [ {col: val, ...}, ... ] } with identical keys per row.
void write_report(const Json& report, const std::filesystem::path& path,
                  const std::string& format);

std::string to_csv(const Json& rows);

}  // namespace aqua::report
