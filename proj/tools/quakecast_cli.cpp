#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "quakecast/errors.hpp"
#include "quakecast/pipeline.hpp"
#include "quakecast/threading.hpp"
#include "quakecast/time_utils.hpp"
#include "quakecast/version.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string outdir = "out";
    int threads = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required) {
    auto* config_opt = cmd->add_option("-c,--config", args.config_path, "key=value run configuration file");
    if (config_required) config_opt->required();
    cmd->add_option("--set", args.overrides, "override one config key, e.g. --set seed=7 (repeatable)");
    cmd->add_option("-o,--out", args.outdir, "output directory (default: out)");
    cmd->add_option("--threads", args.threads,
                    "worker threads, 0 = all cores; never changes numerical results");
}

quakecast::RunConfig resolve_config(const CommonArgs& args) {
    quakecast::RunConfig config;
    if (!args.config_path.empty()) config = quakecast::parse_run_config_file(args.config_path);
    for (const std::string& assignment : args.overrides) {
        quakecast::apply_config_override(config, assignment);
    }
    quakecast::set_num_threads(args.threads);
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"quakecast: gridded mid-term earthquake forecasting pipeline"};
    app.set_version_flag("--version", std::string(quakecast::kVersion));
    app.require_subcommand(1);

    CommonArgs ingest_args, features_args, train_args, eval_args, synth_args;

    CLI::App* ingest = app.add_subcommand("ingest", "parse a catalog and rasterize daily heat maps");
    add_common(ingest, ingest_args, true);

    CLI::App* features = app.add_subcommand("features", "export RTL features with labels to CSV");
    add_common(features, features_args, true);

    CLI::App* train = app.add_subcommand("train", "train a model on ingested rasters");
    add_common(train, train_args, true);

    CLI::App* evaluate = app.add_subcommand("evaluate", "score a checkpoint against the prior baseline");
    add_common(evaluate, eval_args, true);
    std::string checkpoint_path;
    std::string begin_date, end_date;
    evaluate->add_option("--checkpoint", checkpoint_path, "checkpoint file (default: <out>/checkpoint.qck)");
    evaluate->add_option("--begin", begin_date, "first reference day, ISO date (default: test split)");
    evaluate->add_option("--end", end_date, "day after the last reference day, ISO date");

    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic catalog with planted precursors");
    add_common(synth, synth_args, false);

    CLI11_PARSE(app, argc, argv);

    try {
        std::string brief;
        if (ingest->parsed()) {
            brief = quakecast::run_ingest(resolve_config(ingest_args), ingest_args.outdir);
        } else if (features->parsed()) {
            brief = quakecast::run_features(resolve_config(features_args), features_args.outdir);
        } else if (train->parsed()) {
            brief = quakecast::run_train(resolve_config(train_args), train_args.outdir);
        } else if (evaluate->parsed()) {
            quakecast::RunConfig config = resolve_config(eval_args);
            std::optional<quakecast::DayRange> range;
            if (!begin_date.empty() != !end_date.empty()) {
                throw quakecast::ValidationError("--begin and --end must be given together");
            }
            if (!begin_date.empty()) {
                range = quakecast::DayRange{quakecast::parse_iso8601_utc(begin_date) / 86400,
                                            quakecast::parse_iso8601_utc(end_date) / 86400};
            }
            if (checkpoint_path.empty()) checkpoint_path = eval_args.outdir + "/checkpoint.qck";
            brief = quakecast::run_evaluate(config, eval_args.outdir, checkpoint_path, range);
        } else if (synth->parsed()) {
            brief = quakecast::run_synth(resolve_config(synth_args), synth_args.outdir);
        }
        std::cout << brief << '\n';
        return 0;
    } catch (const quakecast::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "runtime failure: " << e.what() << '\n';
        return 2;
    }
}
