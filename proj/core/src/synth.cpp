#include "quakecast/synth.hpp"

#include <algorithm>
#include <cmath>

#include "quakecast/errors.hpp"
#include "quakecast/rng.hpp"

namespace quakecast {

void SynthConfig::validate() const {
    grid.validate();
    if (days < 1) throw ValidationError("synth days must be >= 1");
    if (background_rate < 0.0) throw ValidationError("synth background rate must be >= 0");
    if (!(gr_b > 0.0)) throw ValidationError("synth Gutenberg-Richter b must be > 0");
    if (!(mag_span > 0.0)) throw ValidationError("synth mag_span must be > 0");
    if (plant.pair_rate < 0.0) throw ValidationError("synth pair rate must be >= 0");
    if (plant.pairs_per_episode < 1) throw ValidationError("synth pairs_per_episode must be >= 1");
    if (plant.spacing_days < 1) throw ValidationError("synth spacing_days must be >= 1");
    if (plant.pair_rate > 0.0 && (plant.lag_days < t_min_days || plant.lag_days > t_max_days)) {
        throw ValidationError("synth lag must satisfy t_min <= lag <= t_max so mainshocks land in the cylinder");
    }
}

namespace {

// Inverse-CDF draw from the truncated Gutenberg-Richter law.
double sample_magnitude(Rng& rng, double b, double m_min, double span) {
    const double tail = std::pow(10.0, -b * span);
    const double u = rng.uniform();
    return m_min - std::log10(1.0 - u * (1.0 - tail)) / b;
}

Event cell_event(const GridSpec& grid, Rng& rng, int row, int col, std::int64_t day, double mag) {
    // Uniform inside the cell, clear of the boundary so rounding through
    // text round trips cannot move the event across it.
    const double u = rng.uniform(0.02, 0.98);
    const double v = rng.uniform(0.02, 0.98);
    const double lat = grid.origin_lat + (row + u) * grid.cell_km / kKmPerDegree;
    const double lon =
        grid.origin_lon + (col + v) * grid.cell_km / (kKmPerDegree * std::cos(grid.ref_lat * M_PI / 180.0));
    return Event{day * 86400, lat, lon, mag, std::nullopt};
}

}  // namespace

Catalog generate_background(const SynthConfig& config) {
    config.validate();
    Rng rng(derive_seed(config.seed, "synth.background"));
    Catalog catalog;
    for (int d = 0; d < config.days; ++d) {
        for (int r = 0; r < config.grid.n_rows; ++r) {
            for (int c = 0; c < config.grid.n_cols; ++c) {
                const int count = rng.poisson(config.background_rate);
                for (int e = 0; e < count; ++e) {
                    const double mag = sample_magnitude(rng, config.gr_b, config.m_min, config.mag_span);
                    catalog.events.push_back(cell_event(config.grid, rng, r, c, config.start_day + d, mag));
                }
            }
        }
    }
    return catalog;
}

PlantResult plant_precursors(const Catalog& background, const SynthConfig& config) {
    config.validate();
    PlantResult result;
    result.catalog = background;
    if (config.plant.pair_rate <= 0.0) return result;

    Rng rng(derive_seed(config.seed, "synth.plant"));
    const double episodes_expected =
        config.plant.pair_rate * config.days / static_cast<double>(config.plant.pairs_per_episode);
    const int episodes = rng.poisson(episodes_expected);

    for (int e = 0; e < episodes; ++e) {
        const int row = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(config.grid.n_rows)));
        const int col = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(config.grid.n_cols)));
        const std::int64_t first = static_cast<std::int64_t>(rng.uniform_index(static_cast<std::uint64_t>(config.days)));
        for (int p = 0; p < config.plant.pairs_per_episode; ++p) {
            const std::int64_t d = first + static_cast<std::int64_t>(p) * config.plant.spacing_days;
            const std::int64_t mainshock_day = d + config.plant.lag_days;
            if (mainshock_day >= config.days) {
                ++result.skipped_pairs;
                continue;
            }
            result.catalog.events.push_back(
                cell_event(config.grid, rng, row, col, config.start_day + d, config.plant.precursor_mag));
            result.catalog.events.push_back(
                cell_event(config.grid, rng, row, col, config.start_day + mainshock_day, config.plant.mainshock_mag));
            ++result.planted_pairs;
        }
    }
    std::stable_sort(result.catalog.events.begin(), result.catalog.events.end(),
                     [](const Event& a, const Event& b) { return a.time_s < b.time_s; });
    return result;
}

}  // namespace quakecast
