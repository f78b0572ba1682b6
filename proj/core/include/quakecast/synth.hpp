#pragma once

#include <cstdint>

#include "quakecast/catalog.hpp"

namespace quakecast {

/// Precursor/mainshock pair planting. Pairs arrive in per-cell episodes: an
/// episode picks one cell and plants `pairs_per_episode` pairs spaced
/// `spacing_days` apart, each precursor followed by its mainshock
/// `lag_days` later. Episodes are what make the signal learnable: a lone
/// pair labels up to t_max - lag days of cylinder before its precursor even
/// exists, which no causal model can predict.
struct PlantSpec {
    double precursor_mag = 3.5;  // keep below Mc so only inputs see it
    double mainshock_mag = 6.0;
    int lag_days = 15;
    double pair_rate = 0.0;  // expected pairs per day over the whole grid
    int pairs_per_episode = 60;
    int spacing_days = 5;
};

struct SynthConfig {
    GridSpec grid;
    int days = 1000;
    double background_rate = 0.0;  // Poisson events per cell per day
    double gr_b = 1.0;             // Gutenberg-Richter slope
    double m_min = 1.0;
    double mag_span = 4.0;  // magnitudes truncated at m_min + mag_span
    PlantSpec plant;
    int t_min_days = 10;  // used only to validate the lag fits the cylinder
    int t_max_days = 50;
    std::int64_t start_day = 10957;  // 2000-01-01
    std::uint64_t seed = 1;

    void validate() const;
};

/// Background seismicity: per cell per day, count ~ Poisson(rate) and
/// magnitude ~ truncated Gutenberg-Richter, P(M >= m) = 10^(-b (m - m_min)).
Catalog generate_background(const SynthConfig& config);

struct PlantResult {
    Catalog catalog;
    int planted_pairs = 0;
    int skipped_pairs = 0;  // pairs whose mainshock would fall past the end
};

/// Merges planted pairs into the catalog, preserving time order.
PlantResult plant_precursors(const Catalog& background, const SynthConfig& config);

}  // namespace quakecast
