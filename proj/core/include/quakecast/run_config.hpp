#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "quakecast/catalog.hpp"
#include "quakecast/model.hpp"
#include "quakecast/prior.hpp"
#include "quakecast/rtl.hpp"
#include "quakecast/synth.hpp"

namespace quakecast {

/// One flat key=value file configures a whole run. Unknown keys are
/// rejected; `#` starts a comment. The single `seed` fans out to every
/// random consumer through tagged sub-seeds.
struct RunConfig {
    std::string catalog_path;
    std::string rasters_path;

    GridSpec grid{35.0, 139.0, 10.0, 16, 16, 35.0};
    LabelSpec label{10, 50, 3.5};

    double split_train = 0.7;
    double split_val = 0.1;
    double split_test = 0.2;

    RtlParams rtl;
    int rtl_stride = 1;

    double prior_alpha = 1.0;
    double prior_c = 0.0;
    PriorMode prior_mode = PriorMode::additive;

    ModelConfig model;
    TrainConfig train;

    std::vector<double> eval_thresholds{0.0001, 0.1, 0.3, 0.5, 0.9, 0.99};

    // Synthetic-catalog generation; grid, cylinder bounds and seed are
    // shared with the fields above.
    int synth_days = 1000;
    double synth_rate = 0.002;
    double synth_b = 1.0;
    double synth_m_min = 1.0;
    double synth_mag_span = 4.0;
    std::int64_t synth_start_day = 10957;  // 2000-01-01
    PlantSpec synth_plant;

    std::uint64_t seed = 1;

    SynthConfig synth_config() const;
    void validate() const;
};

RunConfig parse_run_config(std::istream& in);
RunConfig parse_run_config_file(const std::string& path);

/// Applies one `key=value` override (CLI flags route through this).
void apply_config_override(RunConfig& config, const std::string& assignment);

/// Normalized form: every key, fixed order, round-trip double formatting.
std::string serialize_run_config(const RunConfig& config);

/// FNV-1a over the normalized serialization, as 16 hex digits.
std::string config_hash(const RunConfig& config);

}  // namespace quakecast
