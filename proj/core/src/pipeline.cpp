#include "quakecast/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "quakecast/errors.hpp"
#include "quakecast/eval.hpp"
#include "quakecast/raster_io.hpp"
#include "quakecast/text.hpp"
#include "quakecast/time_utils.hpp"
#include "quakecast/version.hpp"

namespace quakecast {

namespace {

namespace fs = std::filesystem;

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    return out;
}

void write_provenance(const std::string& outdir, const std::string& command, const RunConfig& config) {
    auto out = open_out(fs::path(outdir) / ("provenance_" + command + ".txt"));
    out << "version=" << kVersion << '\n';
    out << "command=" << command << '\n';
    out << "config_hash=" << config_hash(config) << '\n';
    out << "seed=" << config.seed << '\n';
    out << "config:\n" << serialize_run_config(config);
}

Catalog load_catalog(const RunConfig& config) {
    if (config.catalog_path.empty()) throw ValidationError("config key 'catalog' is required");
    return parse_catalog_file(config.catalog_path);
}

std::string rasters_path(const RunConfig& config, const std::string& outdir) {
    return config.rasters_path.empty() ? (fs::path(outdir) / "rasters.qgrd").string() : config.rasters_path;
}

/// Rasters carry no day origin in their header; by convention they start at
/// the catalog's first day, which ingest used when writing them.
HeatMapSeq load_rasters(const RunConfig& config, const std::string& outdir, const Catalog& catalog) {
    const std::string path = rasters_path(config, outdir);
    if (!fs::exists(path)) {
        throw ValidationError("raster file '" + path + "' is missing; run the ingest command first");
    }
    HeatMapSeq maps = read_heatmaps_file(path);
    maps.start_day = catalog.first_day();
    if (maps.n_rows != config.grid.n_rows || maps.n_cols != config.grid.n_cols) {
        throw ValidationError("raster grid does not match the configured grid");
    }
    if (maps.days != static_cast<int>(catalog.span_days())) {
        throw ValidationError("raster day count does not match the catalog span");
    }
    return maps;
}

std::vector<std::int64_t> full_span_days(const Catalog& catalog) {
    std::vector<std::int64_t> days;
    for (std::int64_t d = catalog.first_day(); d <= catalog.last_day(); ++d) days.push_back(d);
    return days;
}

}  // namespace

LabelTensor slice_labels(const LabelTensor& labels, const DayRange& range) {
    LabelTensor out;
    out.n_rows = labels.n_rows;
    out.n_cols = labels.n_cols;
    const std::size_t cells = static_cast<std::size_t>(labels.n_rows) * labels.n_cols;
    for (std::size_t di = 0; di < labels.reference_days.size(); ++di) {
        const std::int64_t day = labels.reference_days[di];
        if (day < range.begin || day >= range.end) continue;
        out.reference_days.push_back(day);
        out.y.insert(out.y.end(), labels.y.begin() + static_cast<std::ptrdiff_t>(di * cells),
                     labels.y.begin() + static_cast<std::ptrdiff_t>((di + 1) * cells));
        out.valid.insert(out.valid.end(), labels.valid.begin() + static_cast<std::ptrdiff_t>(di * cells),
                         labels.valid.begin() + static_cast<std::ptrdiff_t>((di + 1) * cells));
    }
    return out;
}

std::string run_ingest(const RunConfig& config, const std::string& outdir) {
    config.validate();
    fs::create_directories(outdir);
    Catalog catalog = load_catalog(config);
    HeatMapSeq maps = rasterize_daily(catalog, config.grid, catalog.first_day(),
                                      static_cast<int>(catalog.span_days()));
    const std::string raster_file = rasters_path(config, outdir);
    write_heatmaps_file(raster_file, maps);

    std::size_t in_bounds = 0;
    for (const Event& ev : catalog.events) {
        if (project_to_cell(ev, config.grid)) ++in_bounds;
    }
    std::size_t band_counts[8] = {};
    for (const Event& ev : catalog.events) {
        for (int m = 0; m < 8; ++m) {
            if (ev.mag >= m) ++band_counts[m];
        }
    }

    auto summary = open_out(fs::path(outdir) / "ingest_summary.txt");
    summary << "events_total=" << catalog.events.size() << '\n';
    summary << "events_in_bounds=" << in_bounds << '\n';
    summary << "first_day=" << format_day_iso(catalog.first_day()).substr(0, 10) << '\n';
    summary << "last_day=" << format_day_iso(catalog.last_day()).substr(0, 10) << '\n';
    summary << "days=" << catalog.span_days() << '\n';
    for (int m = 0; m < 8; ++m) summary << "events_mag_ge_" << m << "=" << band_counts[m] << '\n';
    write_provenance(outdir, "ingest", config);

    std::ostringstream brief;
    brief << "ingested " << catalog.events.size() << " events over " << catalog.span_days() << " days; M>=5: "
          << band_counts[5] << ", M>=6: " << band_counts[6] << "; rasters at " << raster_file;
    return brief.str();
}

std::string run_features(const RunConfig& config, const std::string& outdir) {
    config.validate();
    fs::create_directories(outdir);
    Catalog catalog = load_catalog(config);

    std::vector<std::int64_t> ref_days;
    for (std::int64_t d = catalog.first_day(); d + config.label.t_max_days <= catalog.last_day();
         d += config.rtl_stride) {
        ref_days.push_back(d);
    }
    if (ref_days.empty()) throw ValidationError("catalog too short for any valid feature day");

    RtlFeatureMap map = rtl_grid(catalog, config.grid, ref_days, config.rtl);
    LabelTensor labels = build_labels(catalog, config.grid, config.label, ref_days);

    auto out = open_out(fs::path(outdir) / "features.csv");
    const std::size_t rows = export_features(map, labels, out, config.rtl);
    write_provenance(outdir, "features", config);

    std::ostringstream brief;
    brief << "wrote " << rows << " feature rows over " << ref_days.size() << " reference days";
    return brief.str();
}

std::string run_train(const RunConfig& config, const std::string& outdir) {
    config.validate();
    fs::create_directories(outdir);
    Catalog catalog = load_catalog(config);
    HeatMapSeq maps = load_rasters(config, outdir, catalog);
    LabelTensor labels = build_labels(catalog, config.grid, config.label, full_span_days(catalog));
    SplitResult split = split_by_time(catalog, config.split_train, config.split_val, config.split_test,
                                      config.label.t_max_days);

    PriorMap prior = fit_prior(slice_labels(labels, split.train), config.prior_alpha);
    Model model(config.model);
    model.attach_prior(prior, config.prior_c, config.prior_mode);

    TrainResult result = train_model(model, config.train, maps, labels, split.train, split.val);

    save_checkpoint((fs::path(outdir) / "checkpoint.qck").string(), model);
    {
        auto log = open_out(fs::path(outdir) / "training_log.csv");
        log << "epoch,train_loss,val_roc_auc,val_pr_auc\n";
        for (const TrainLogRow& row : result.log) {
            log << row.epoch << ',' << format_double(row.train_loss) << ',' << format_double(row.val_roc) << ','
                << format_double(row.val_pr) << '\n';
        }
    }
    {
        auto raster = open_out(fs::path(outdir) / "prior.qgrd");
        auto sidecar = open_out(fs::path(outdir) / "prior_cells.txt");
        write_prior(raster, sidecar, prior);
    }
    write_provenance(outdir, "train", config);

    std::ostringstream brief;
    brief << "trained " << variant_name(config.model.variant) << (config.model.use_prior_residual ? " (resid.)" : "")
          << " for " << result.log.size() << " epochs, " << model.steps_trained << " steps";
    if (result.best_epoch > 0) brief << "; best val epoch " << result.best_epoch;
    return brief.str();
}

std::string run_evaluate(const RunConfig& config, const std::string& outdir, const std::string& checkpoint_path,
                         std::optional<DayRange> day_range) {
    config.validate();
    fs::create_directories(outdir);
    Catalog catalog = load_catalog(config);
    HeatMapSeq maps = load_rasters(config, outdir, catalog);
    LabelTensor labels = build_labels(catalog, config.grid, config.label, full_span_days(catalog));

    Model model = load_checkpoint(checkpoint_path);
    DayRange range;
    if (day_range) {
        range = *day_range;
    } else {
        range = split_by_time(catalog, config.split_train, config.split_val, config.split_test,
                              config.label.t_max_days)
                    .test;
    }

    std::vector<std::int64_t> days = eligible_days(maps, labels, range, model.config().window_days);
    if (days.empty()) throw ValidationError("no evaluable reference days in the requested range");

    std::vector<ScoredSample> model_samples = score_model(model, maps, labels, days);
    MetricsReport model_report = evaluate_samples(model_samples, config.eval_thresholds);

    std::vector<std::pair<std::string, MetricsReport>> reports{{"model", model_report}};
    if (model.has_prior()) {
        std::vector<ScoredSample> prior_samples = score_prior(model.prior(), labels, days);
        reports.emplace_back("prior", evaluate_samples(prior_samples, config.eval_thresholds));
    }

    {
        auto metrics = open_out(fs::path(outdir) / "metrics.csv");
        write_metrics_csv(metrics, reports);
        auto sweep = open_out(fs::path(outdir) / "sweep.csv");
        write_sweep_csv(sweep, reports);
    }
    write_provenance(outdir, "evaluate", config);

    std::ostringstream brief;
    brief << "evaluated " << days.size() << " days (" << model_samples.size() << " samples): model roc_auc="
          << format_double(model_report.roc) << " pr_auc=" << format_double(model_report.pr);
    if (reports.size() > 1) {
        brief << "; prior roc_auc=" << format_double(reports[1].second.roc)
              << " pr_auc=" << format_double(reports[1].second.pr);
    }
    return brief.str();
}

std::string run_synth(const RunConfig& config, const std::string& outdir) {
    fs::create_directories(outdir);
    SynthConfig synth = config.synth_config();
    Catalog background = generate_background(synth);
    PlantResult planted = plant_precursors(background, synth);

    const fs::path catalog_file = fs::path(outdir) / "synthetic_catalog.csv";
    {
        auto out = open_out(catalog_file);
        write_catalog_csv(out, planted.catalog);
    }
    {
        auto summary = open_out(fs::path(outdir) / "synth_summary.txt");
        summary << "events_total=" << planted.catalog.events.size() << '\n';
        summary << "background_events=" << background.events.size() << '\n';
        summary << "planted_pairs=" << planted.planted_pairs << '\n';
        summary << "skipped_pairs=" << planted.skipped_pairs << '\n';
    }
    write_provenance(outdir, "synth", config);

    std::ostringstream brief;
    brief << "generated " << planted.catalog.events.size() << " events (" << planted.planted_pairs
          << " planted pairs, " << planted.skipped_pairs << " skipped) at " << catalog_file.string();
    return brief.str();
}

}  // namespace quakecast
