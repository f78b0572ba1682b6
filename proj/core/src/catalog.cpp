#include "quakecast/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "quakecast/errors.hpp"
#include "quakecast/text.hpp"
#include "quakecast/time_utils.hpp"

namespace quakecast {

std::int64_t Event::day() const { return day_of_epoch_seconds(time_s); }

std::int64_t Catalog::first_day() const {
    if (events.empty()) throw ValidationError("empty catalog");
    return events.front().day();
}

std::int64_t Catalog::last_day() const {
    if (events.empty()) throw ValidationError("empty catalog");
    return events.back().day();
}

void GridSpec::validate() const {
    if (!(cell_km > 0.0)) throw ValidationError("grid cell_km must be > 0");
    if (n_rows < 1 || n_cols < 1) throw ValidationError("grid must have at least one row and column");
    if (!(std::cos(ref_lat * M_PI / 180.0) > 0.0)) {
        throw ValidationError("grid ref_lat must keep cos(ref_lat) positive");
    }
}

double GridSpec::cell_center_lat(int row) const {
    return origin_lat + (row + 0.5) * cell_km / kKmPerDegree;
}

double GridSpec::cell_center_lon(int col) const {
    const double scale = kKmPerDegree * std::cos(ref_lat * M_PI / 180.0);
    return origin_lon + (col + 0.5) * cell_km / scale;
}

std::optional<CellIndex> project_to_cell(const Event& event, const GridSpec& grid) {
    const double dy_km = (event.lat - grid.origin_lat) * kKmPerDegree;
    const double dx_km = (event.lon - grid.origin_lon) * kKmPerDegree * std::cos(grid.ref_lat * M_PI / 180.0);
    const double row_f = std::floor(dy_km / grid.cell_km);
    const double col_f = std::floor(dx_km / grid.cell_km);
    if (row_f < 0 || col_f < 0 || row_f >= grid.n_rows || col_f >= grid.n_cols) return std::nullopt;
    return CellIndex{static_cast<int>(row_f), static_cast<int>(col_f)};
}

void LabelSpec::validate() const {
    if (!(t_min_days > 0) || t_min_days > t_max_days) {
        throw ValidationError("label cylinder requires 0 < t_min <= t_max");
    }
    if (!std::isfinite(mag_threshold)) throw ValidationError("label magnitude threshold must be finite");
}

std::optional<std::size_t> LabelTensor::day_index(std::int64_t day) const {
    // Reference days are ascending; binary search keeps arbitrary day sets cheap.
    auto it = std::lower_bound(reference_days.begin(), reference_days.end(), day);
    if (it == reference_days.end() || *it != day) return std::nullopt;
    return static_cast<std::size_t>(it - reference_days.begin());
}

namespace {

[[noreturn]] void row_error(std::size_t line, const std::string& field, const std::string& detail) {
    throw ValidationError("catalog row " + std::to_string(line) + ": bad field '" + field + "' (" + detail + ")");
}

}  // namespace

Catalog parse_catalog(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("empty catalog");
    auto header = split(trim(line), ',');
    bool has_depth = false;
    if (header.size() == 5 && trim(header[4]) == "depth_km") {
        has_depth = true;
    } else if (header.size() != 4) {
        throw ValidationError("catalog header must be time,lat,lon,mag[,depth_km]");
    }
    const char* names[4] = {"time", "lat", "lon", "mag"};
    for (int i = 0; i < 4; ++i) {
        if (trim(header[static_cast<std::size_t>(i)]) != names[i]) {
            throw ValidationError("catalog header must be time,lat,lon,mag[,depth_km]");
        }
    }

    Catalog catalog;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto fields = split(line, ',');
        const std::size_t expected = has_depth ? 5 : 4;
        if (fields.size() != expected) {
            row_error(line_no, "row", "expected " + std::to_string(expected) + " fields, got " +
                                          std::to_string(fields.size()));
        }
        Event ev;
        try {
            ev.time_s = parse_iso8601_utc(fields[0]);
        } catch (const ValidationError& e) {
            row_error(line_no, "time", e.what());
        }
        auto lat = parse_double(fields[1]);
        if (!lat || !std::isfinite(*lat) || *lat < -90.0 || *lat > 90.0) {
            row_error(line_no, "lat", "must be a finite degree value in [-90, 90]");
        }
        auto lon = parse_double(fields[2]);
        if (!lon || !std::isfinite(*lon) || *lon < -180.0 || *lon > 180.0) {
            row_error(line_no, "lon", "must be a finite degree value in [-180, 180]");
        }
        auto mag = parse_double(fields[3]);
        if (!mag || !std::isfinite(*mag)) row_error(line_no, "mag", "must be finite");
        ev.lat = *lat;
        ev.lon = *lon;
        ev.mag = *mag;
        if (has_depth) {
            auto trimmed = trim(fields[4]);
            if (!trimmed.empty()) {
                auto depth = parse_double(trimmed);
                if (!depth || !std::isfinite(*depth)) row_error(line_no, "depth_km", "must be finite");
                ev.depth_km = *depth;
            }
        }
        catalog.events.push_back(ev);
    }
    if (catalog.events.empty()) throw ValidationError("empty catalog");
    std::stable_sort(catalog.events.begin(), catalog.events.end(),
                     [](const Event& a, const Event& b) { return a.time_s < b.time_s; });
    return catalog;
}

Catalog parse_catalog_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open catalog file: " + path);
    return parse_catalog(in);
}

void write_catalog_csv(std::ostream& out, const Catalog& catalog) {
    bool any_depth = false;
    for (const Event& ev : catalog.events) {
        if (ev.depth_km) {
            any_depth = true;
            break;
        }
    }
    out << (any_depth ? "time,lat,lon,mag,depth_km\n" : "time,lat,lon,mag\n");
    for (const Event& ev : catalog.events) {
        int y, m, d;
        civil_from_days(day_of_epoch_seconds(ev.time_s), y, m, d);
        const std::int64_t sod = ev.time_s - day_of_epoch_seconds(ev.time_s) * 86400;
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", y, m, d,
                      static_cast<int>(sod / 3600), static_cast<int>(sod / 60 % 60), static_cast<int>(sod % 60));
        out << buf << ',' << format_double(ev.lat) << ',' << format_double(ev.lon) << ',' << format_double(ev.mag);
        if (any_depth) {
            out << ',';
            if (ev.depth_km) out << format_double(*ev.depth_km);
        }
        out << '\n';
    }
}

HeatMapSeq rasterize_daily(const Catalog& catalog, const GridSpec& grid, std::int64_t start_day, int days) {
    grid.validate();
    if (days <= 0) throw ValidationError("rasterize_daily requires days >= 1");
    HeatMapSeq seq;
    seq.start_day = start_day;
    seq.days = days;
    seq.n_rows = grid.n_rows;
    seq.n_cols = grid.n_cols;
    seq.values.assign(static_cast<std::size_t>(days) * grid.cells(), 0.0);
    for (const Event& ev : catalog.events) {
        const std::int64_t d = ev.day() - start_day;
        if (d < 0 || d >= days) continue;
        auto cell = project_to_cell(ev, grid);
        if (!cell) continue;
        double& slot = seq.at(static_cast<int>(d), cell->row, cell->col);
        slot = std::max(slot, ev.mag);  // same-cell same-day collisions keep the max
    }
    return seq;
}

LabelTensor build_labels(const Catalog& catalog, const GridSpec& grid, const LabelSpec& spec,
                         const std::vector<std::int64_t>& reference_days) {
    grid.validate();
    spec.validate();
    LabelTensor labels;
    labels.reference_days = reference_days;
    if (!std::is_sorted(labels.reference_days.begin(), labels.reference_days.end())) {
        std::sort(labels.reference_days.begin(), labels.reference_days.end());
    }
    labels.n_rows = grid.n_rows;
    labels.n_cols = grid.n_cols;
    const std::size_t n = labels.reference_days.size() * grid.cells();
    labels.y.assign(n, 0);
    labels.valid.assign(n, 0);
    if (labels.reference_days.empty()) return labels;

    const std::int64_t catalog_end = catalog.last_day();
    for (std::size_t di = 0; di < labels.reference_days.size(); ++di) {
        if (labels.reference_days[di] + spec.t_max_days <= catalog_end) {
            std::fill(labels.valid.begin() + static_cast<std::ptrdiff_t>(di * grid.cells()),
                      labels.valid.begin() + static_cast<std::ptrdiff_t>((di + 1) * grid.cells()),
                      static_cast<std::uint8_t>(1));
        }
    }

    for (const Event& ev : catalog.events) {
        if (ev.mag < spec.mag_threshold) continue;
        auto cell = project_to_cell(ev, grid);
        if (!cell) continue;
        const std::int64_t ev_day = ev.day();
        // Event at day e marks every reference day T with T+t_min <= e <= T+t_max.
        const std::int64_t t_lo = ev_day - spec.t_max_days;
        const std::int64_t t_hi = ev_day - spec.t_min_days;
        auto it = std::lower_bound(labels.reference_days.begin(), labels.reference_days.end(), t_lo);
        for (; it != labels.reference_days.end() && *it <= t_hi; ++it) {
            const std::size_t di = static_cast<std::size_t>(it - labels.reference_days.begin());
            const std::size_t idx = labels.index(di, cell->row, cell->col);
            if (labels.valid[idx]) labels.y[idx] = 1;
        }
    }
    return labels;
}

SplitResult split_by_time(const Catalog& catalog, double f_train, double f_val, double f_test, int gap_days) {
    if (!(f_train >= 0) || !(f_val >= 0) || !(f_test >= 0)) {
        throw ValidationError("split fractions must be non-negative");
    }
    const double sum = f_train + f_val + f_test;
    if (std::abs(sum - 1.0) > 1e-9) throw ValidationError("split fractions must sum to 1");
    if (gap_days < 0) throw ValidationError("split gap must be >= 0");

    const std::int64_t d0 = catalog.first_day();
    const std::int64_t n = catalog.span_days();
    const std::int64_t b1 = d0 + static_cast<std::int64_t>(std::llround(f_train * static_cast<double>(n)));
    const std::int64_t b2 = d0 + static_cast<std::int64_t>(std::llround((f_train + f_val) * static_cast<double>(n)));
    const std::int64_t end = d0 + n;

    SplitResult split;
    split.train = {d0, b1};
    // The purge gap comes out of the start of the following split.
    split.val = f_val > 0 ? DayRange{b1 + (f_train > 0 ? gap_days : 0), b2} : DayRange{b1, b1};
    const bool gap_before_test = f_test > 0 && (f_train > 0 || f_val > 0);
    split.test = f_test > 0 ? DayRange{b2 + (gap_before_test ? gap_days : 0), end} : DayRange{end, end};

    if ((f_train > 0 && split.train.empty()) || (f_val > 0 && split.val.empty()) ||
        (f_test > 0 && split.test.empty())) {
        throw ValidationError("catalog too short for the requested splits and purge gaps");
    }
    return split;
}

}  // namespace quakecast
