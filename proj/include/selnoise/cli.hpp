#pragma once

// selnoise <noise|experiment|plot> command-line front end.

#include <json.hpp>

#include "selnoise/noising.hpp"

namespace selnoise::cli {

enum Exit { kOk = 0, kUsage = 1, kValidation = 2, kRuntime = 3 };

// Noise plan document: predicate{threshold, direction}, mode, label_sd,
// feature_sd (number or list), similarity [lo, hi], sampler, seed.
NoisePlan parse_plan(const nlohmann::json& j);

// Parses argv and dispatches; returns a process exit code.
int run(int argc, const char* const* argv);

}  // namespace selnoise::cli
