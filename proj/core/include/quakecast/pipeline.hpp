#pragma once

#include <optional>
#include <string>

#include "quakecast/run_config.hpp"

namespace quakecast {

// Command bodies behind the CLI. Each writes its artifacts plus a
// provenance_<command>.txt into outdir and returns a short human summary.
// All of them throw ValidationError for bad input and std::runtime_error
// for runtime failures; the CLI maps those to exit codes 1 and 2.

std::string run_ingest(const RunConfig& config, const std::string& outdir);
std::string run_features(const RunConfig& config, const std::string& outdir);
std::string run_train(const RunConfig& config, const std::string& outdir);
std::string run_evaluate(const RunConfig& config, const std::string& outdir, const std::string& checkpoint_path,
                         std::optional<DayRange> day_range = std::nullopt);
std::string run_synth(const RunConfig& config, const std::string& outdir);

/// Labels restricted to reference days inside [range).
LabelTensor slice_labels(const LabelTensor& labels, const DayRange& range);

}  // namespace quakecast
