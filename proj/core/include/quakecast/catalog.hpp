#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

namespace quakecast {

/// One catalog row. Depth is retained on parse but unused by the model.
struct Event {
    std::int64_t time_s = 0;  // seconds since UTC epoch
    double lat = 0.0;
    double lon = 0.0;
    double mag = 0.0;
    std::optional<double> depth_km;

    std::int64_t day() const;
};

/// Time-sorted event list.
struct Catalog {
    std::vector<Event> events;

    bool empty() const { return events.empty(); }
    std::int64_t first_day() const;
    std::int64_t last_day() const;
    std::int64_t span_days() const { return last_day() - first_day() + 1; }
};

/// Equirectangular grid: rows grow northwards from the south-west corner,
/// columns eastwards. 111.32 km per degree of latitude, scaled by
/// cos(ref_lat) for longitude, reproduces ~10 km cells at mid latitudes.
struct GridSpec {
    double origin_lat = 0.0;
    double origin_lon = 0.0;
    double cell_km = 10.0;
    int n_rows = 1;
    int n_cols = 1;
    double ref_lat = 0.0;

    std::size_t cells() const { return static_cast<std::size_t>(n_rows) * static_cast<std::size_t>(n_cols); }
    void validate() const;

    double cell_center_lat(int row) const;
    double cell_center_lon(int col) const;
};

constexpr double kKmPerDegree = 111.32;

struct CellIndex {
    int row = 0;
    int col = 0;
    bool operator==(const CellIndex&) const = default;
};

/// Maps an epicenter to its grid cell; empty when outside the grid.
std::optional<CellIndex> project_to_cell(const Event& event, const GridSpec& grid);

/// Daily maximum-magnitude rasters; 0 marks a quiet cell.
struct HeatMapSeq {
    std::int64_t start_day = 0;
    int days = 0;
    int n_rows = 0;
    int n_cols = 0;
    std::vector<double> values;  // day-major, row-major

    double& at(int d, int r, int c) {
        return values[(static_cast<std::size_t>(d) * n_rows + r) * static_cast<std::size_t>(n_cols) + c];
    }
    double at(int d, int r, int c) const {
        return values[(static_cast<std::size_t>(d) * n_rows + r) * static_cast<std::size_t>(n_cols) + c];
    }
    bool contains_day(std::int64_t day) const { return day >= start_day && day < start_day + days; }
};

/// Label cylinder [T + t_min, T + t_max], inclusive, at threshold Mc.
struct LabelSpec {
    int t_min_days = 10;
    int t_max_days = 50;
    double mag_threshold = 3.5;

    void validate() const;
};

/// Binary labels per (reference day, cell), with a mask that zeroes days
/// whose cylinder runs past the end of the catalog.
struct LabelTensor {
    std::vector<std::int64_t> reference_days;
    int n_rows = 0;
    int n_cols = 0;
    std::vector<std::uint8_t> y;
    std::vector<std::uint8_t> valid;

    std::size_t index(std::size_t day_idx, int r, int c) const {
        return (day_idx * n_rows + r) * static_cast<std::size_t>(n_cols) + c;
    }
    std::optional<std::size_t> day_index(std::int64_t day) const;
};

/// Parses CSV with header `time,lat,lon,mag[,depth_km]`; ISO-8601 UTC times.
/// Any malformed row aborts the parse with its line number and field.
Catalog parse_catalog(std::istream& in);
Catalog parse_catalog_file(const std::string& path);

void write_catalog_csv(std::ostream& out, const Catalog& catalog);

HeatMapSeq rasterize_daily(const Catalog& catalog, const GridSpec& grid, std::int64_t start_day, int days);

LabelTensor build_labels(const Catalog& catalog, const GridSpec& grid, const LabelSpec& spec,
                         const std::vector<std::int64_t>& reference_days);

/// Half-open range of day numbers.
struct DayRange {
    std::int64_t begin = 0;
    std::int64_t end = 0;

    std::int64_t size() const { return end > begin ? end - begin : 0; }
    bool empty() const { return size() == 0; }
};

struct SplitResult {
    DayRange train;
    DayRange val;
    DayRange test;
};

/// Chronological split with a purge gap of `gap_days` carved out of the
/// start of each later split, so no label cylinder crosses a boundary.
SplitResult split_by_time(const Catalog& catalog, double f_train, double f_val, double f_test, int gap_days);

}  // namespace quakecast
