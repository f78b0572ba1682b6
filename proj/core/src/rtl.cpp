#include "quakecast/rtl.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "quakecast/errors.hpp"
#include "quakecast/text.hpp"
#include "quakecast/threading.hpp"

namespace quakecast {

void RtlParams::validate() const {
    if (!(r0_km > 0.0) || !(t0_days > 0.0)) throw ValidationError("rtl r0 and t0 must be > 0");
    if (!(r_max() >= r0_km)) throw ValidationError("rtl r_max must be >= r0");
    if (!(t_max() >= t0_days)) throw ValidationError("rtl t_max must be >= t0");
    if (!(eps_km > 0.0)) throw ValidationError("rtl eps_km must be > 0");
}

double rupture_length_km(double mag) { return std::pow(10.0, 0.5 * mag - 1.8); }

namespace {

struct EventTerm {
    double dist_km;
    double age_days;
    double mag;
};

inline double epicentral_km(double lat, double lon, const Event& ev) {
    const double dy = (ev.lat - lat) * kKmPerDegree;
    const double dx = (ev.lon - lon) * kKmPerDegree * std::cos(lat * M_PI / 180.0);
    return std::hypot(dx, dy);
}

inline void accumulate(RtlFactors& f, const EventTerm& term, const RtlParams& params) {
    const double r = std::max(term.dist_km, params.eps_km);
    f.r_sum += std::exp(-r / params.r0_km);
    f.t_sum += std::exp(-term.age_days / params.t0_days);
    f.l_sum += rupture_length_km(term.mag) / r;
}

}  // namespace

RtlFactors rtl_factors_at(const Catalog& catalog, double lat, double lon, std::int64_t day, const RtlParams& params) {
    params.validate();
    RtlFactors f;
    for (const Event& ev : catalog.events) {
        if (ev.mag < params.m_min) continue;
        const double age = static_cast<double>(day - ev.day());
        if (!(age > 0.0) || age > params.t_max()) continue;
        const double dist = epicentral_km(lat, lon, ev);
        if (dist > params.r_max()) continue;
        accumulate(f, {dist, age, ev.mag}, params);
    }
    return f;
}

double rtl_at(const Catalog& catalog, double lat, double lon, std::int64_t day, const RtlParams& params) {
    return rtl_factors_at(catalog, lat, lon, day, params).product();
}

namespace {

RtlFeatureMap make_map(const GridSpec& grid, const std::vector<std::int64_t>& reference_days) {
    RtlFeatureMap map;
    map.reference_days = reference_days;
    map.n_rows = grid.n_rows;
    map.n_cols = grid.n_cols;
    map.values.assign(reference_days.size() * grid.cells(), 0.0);
    return map;
}

}  // namespace

RtlFeatureMap rtl_grid_naive(const Catalog& catalog, const GridSpec& grid,
                             const std::vector<std::int64_t>& reference_days, const RtlParams& params) {
    grid.validate();
    params.validate();
    RtlFeatureMap map = make_map(grid, reference_days);
    for (std::size_t di = 0; di < reference_days.size(); ++di) {
        for (int r = 0; r < grid.n_rows; ++r) {
            for (int c = 0; c < grid.n_cols; ++c) {
                map.at(di, r, c) =
                    rtl_at(catalog, grid.cell_center_lat(r), grid.cell_center_lon(c), reference_days[di], params);
            }
        }
    }
    if (params.standardize) standardize_per_cell(map);
    return map;
}

RtlFeatureMap rtl_grid(const Catalog& catalog, const GridSpec& grid, const std::vector<std::int64_t>& reference_days,
                       const RtlParams& params) {
    grid.validate();
    params.validate();
    RtlFeatureMap map = make_map(grid, reference_days);

    // Events are time-sorted, so the qualifying age window is a contiguous
    // slice; restricting the per-cell scan to it preserves catalog order and
    // therefore reproduces the naive sums exactly.
    const auto& events = catalog.events;
    const int t_max = static_cast<int>(std::ceil(params.t_max()));

    for (std::size_t di = 0; di < reference_days.size(); ++di) {
        const std::int64_t day = reference_days[di];
        const std::int64_t lo_day = day - t_max;
        const auto begin = std::lower_bound(events.begin(), events.end(), lo_day,
                                            [](const Event& ev, std::int64_t d) { return ev.day() < d; });
        const auto end = std::lower_bound(begin, events.end(), day,
                                          [](const Event& ev, std::int64_t d) { return ev.day() < d; });
        const std::size_t first = static_cast<std::size_t>(begin - events.begin());
        const std::size_t last = static_cast<std::size_t>(end - events.begin());

        parallel_for(grid.n_rows * grid.n_cols, [&](int cell) {
            const int r = cell / grid.n_cols;
            const int c = cell % grid.n_cols;
            const double lat = grid.cell_center_lat(r);
            const double lon = grid.cell_center_lon(c);
            RtlFactors f;
            for (std::size_t i = first; i < last; ++i) {
                const Event& ev = events[i];
                if (ev.mag < params.m_min) continue;
                const double age = static_cast<double>(day - ev.day());
                if (!(age > 0.0) || age > params.t_max()) continue;
                const double dist = epicentral_km(lat, lon, ev);
                if (dist > params.r_max()) continue;
                accumulate(f, {dist, age, ev.mag}, params);
            }
            map.at(di, r, c) = f.product();
        });
    }
    if (params.standardize) standardize_per_cell(map);
    return map;
}

void standardize_per_cell(RtlFeatureMap& map) {
    const std::size_t days = map.reference_days.size();
    if (days == 0) return;
    const std::size_t cells = static_cast<std::size_t>(map.n_rows) * map.n_cols;
    for (std::size_t cell = 0; cell < cells; ++cell) {
        double mean = 0.0;
        for (std::size_t d = 0; d < days; ++d) mean += map.values[d * cells + cell];
        mean /= static_cast<double>(days);
        double var = 0.0;
        for (std::size_t d = 0; d < days; ++d) {
            const double delta = map.values[d * cells + cell] - mean;
            var += delta * delta;
        }
        const double sd = std::max(std::sqrt(var / static_cast<double>(days)), 1e-12);
        for (std::size_t d = 0; d < days; ++d) {
            map.values[d * cells + cell] = (map.values[d * cells + cell] - mean) / sd;
        }
    }
}

std::size_t export_features(const RtlFeatureMap& map, const LabelTensor& labels, std::ostream& out,
                            const RtlParams& params) {
    if (map.n_rows != labels.n_rows || map.n_cols != labels.n_cols ||
        map.reference_days != labels.reference_days) {
        throw ValidationError("rtl feature map and label tensor shapes disagree");
    }
    out << "# r0=" << format_double(params.r0_km) << ",t0=" << format_double(params.t0_days)
        << ",r_max=" << format_double(params.r_max()) << ",t_max=" << format_double(params.t_max())
        << ",m_min=" << format_double(params.m_min) << ",eps_km=" << format_double(params.eps_km)
        << ",standardize=" << (params.standardize ? 1 : 0) << '\n';
    out << "day,row,col,rtl,label\n";
    std::size_t rows = 0;
    for (std::size_t di = 0; di < map.reference_days.size(); ++di) {
        for (int r = 0; r < map.n_rows; ++r) {
            for (int c = 0; c < map.n_cols; ++c) {
                const std::size_t idx = labels.index(di, r, c);
                if (!labels.valid[idx]) continue;
                out << map.reference_days[di] << ',' << r << ',' << c << ',' << format_double(map.at(di, r, c)) << ','
                    << static_cast<int>(labels.y[idx]) << '\n';
                ++rows;
            }
        }
    }
    if (!out) throw std::runtime_error("feature export write failed");
    return rows;
}

}  // namespace quakecast
