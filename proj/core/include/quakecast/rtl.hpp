#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "quakecast/catalog.hpp"

namespace quakecast {

/// Decay scales of the space-time cylinder. Cutoffs default to twice the
/// decay scales when left at zero.
struct RtlParams {
    double r0_km = 50.0;
    double t0_days = 100.0;
    double r_max_km = 0.0;   // 0 -> 2 * r0_km
    double t_max_days = 0.0; // 0 -> 2 * t0_days
    double m_min = 0.0;
    double eps_km = 1.0;     // floor on epicentral distance, keeps l/r finite
    bool standardize = false;

    double r_max() const { return r_max_km > 0.0 ? r_max_km : 2.0 * r0_km; }
    double t_max() const { return t_max_days > 0.0 ? t_max_days : 2.0 * t0_days; }
    void validate() const;
};

/// Rupture length in km: 10^(0.5 mag - 1.8).
double rupture_length_km(double mag);

struct RtlFactors {
    double r_sum = 0.0;  // sum of exp(-r_i / r0)
    double t_sum = 0.0;  // sum of exp(-(t - t_i) / t0)
    double l_sum = 0.0;  // sum of rupture_length(mag_i) / r_i

    double product() const { return r_sum * t_sum * l_sum; }
};

/// Sums over events with mag >= m_min, 0 < t - t_i <= t_max (day units) and
/// epicentral distance <= r_max. Distances use the local equirectangular
/// approximation at the evaluation point, floored at eps_km.
RtlFactors rtl_factors_at(const Catalog& catalog, double lat, double lon, std::int64_t day, const RtlParams& params);

double rtl_at(const Catalog& catalog, double lat, double lon, std::int64_t day, const RtlParams& params);

struct RtlFeatureMap {
    std::vector<std::int64_t> reference_days;
    int n_rows = 0;
    int n_cols = 0;
    std::vector<double> values;

    double& at(std::size_t day_idx, int r, int c) {
        return values[(day_idx * n_rows + r) * static_cast<std::size_t>(n_cols) + c];
    }
    double at(std::size_t day_idx, int r, int c) const {
        return values[(day_idx * n_rows + r) * static_cast<std::size_t>(n_cols) + c];
    }
};

/// Cell-center evaluation over the grid. The accelerated path restricts the
/// event scan to the active time window; per-cell sums keep catalog order,
/// so it matches rtl_grid_naive to the last bit.
RtlFeatureMap rtl_grid(const Catalog& catalog, const GridSpec& grid, const std::vector<std::int64_t>& reference_days,
                       const RtlParams& params);

/// Reference implementation: full event scan per cell. The oracle for
/// rtl_grid.
RtlFeatureMap rtl_grid_naive(const Catalog& catalog, const GridSpec& grid,
                             const std::vector<std::int64_t>& reference_days, const RtlParams& params);

/// Optional per-cell z-scoring across reference days (std floored at 1e-12).
void standardize_per_cell(RtlFeatureMap& map);

/// CSV `day,row,col,rtl,label` for valid-mask cells, preceded by a comment
/// line echoing the parameters. Returns rows written.
std::size_t export_features(const RtlFeatureMap& map, const LabelTensor& labels, std::ostream& out,
                            const RtlParams& params);

}  // namespace quakecast
