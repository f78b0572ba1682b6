#include "quakecast/run_config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "quakecast/errors.hpp"
#include "quakecast/text.hpp"
#include "quakecast/time_utils.hpp"

namespace quakecast {

SynthConfig RunConfig::synth_config() const {
    SynthConfig synth;
    synth.grid = grid;
    synth.days = synth_days;
    synth.background_rate = synth_rate;
    synth.gr_b = synth_b;
    synth.m_min = synth_m_min;
    synth.mag_span = synth_mag_span;
    synth.plant = synth_plant;
    synth.t_min_days = label.t_min_days;
    synth.t_max_days = label.t_max_days;
    synth.start_day = synth_start_day;
    synth.seed = seed;
    return synth;
}

void RunConfig::validate() const {
    grid.validate();
    label.validate();
    rtl.validate();
    model.validate();
    train.validate();
    if (!(prior_alpha > 0.0)) throw ValidationError("prior.alpha must be > 0");
    if (rtl_stride < 1) throw ValidationError("rtl.stride must be >= 1");
    if (!std::is_sorted(eval_thresholds.begin(), eval_thresholds.end())) {
        throw ValidationError("eval.thresholds must be sorted ascending");
    }
}

namespace {

struct KeyDef {
    const char* name;
    std::function<std::string(const RunConfig&)> get;
    std::function<void(RunConfig&, std::string_view)> set;
};

double require_double(std::string_view key, std::string_view value) {
    auto v = parse_double(value);
    if (!v) throw ValidationError("config key '" + std::string(key) + "' needs a number, got '" +
                                  std::string(value) + "'");
    return *v;
}

long long require_int(std::string_view key, std::string_view value) {
    auto v = parse_int(value);
    if (!v) throw ValidationError("config key '" + std::string(key) + "' needs an integer, got '" +
                                  std::string(value) + "'");
    return *v;
}

bool require_bool(std::string_view key, std::string_view value) {
    if (value == "1" || value == "true") return true;
    if (value == "0" || value == "false") return false;
    throw ValidationError("config key '" + std::string(key) + "' needs 0/1, got '" + std::string(value) + "'");
}

const std::vector<KeyDef>& key_table() {
    auto dbl = [](const char* name, double RunConfig::* field) {
        return KeyDef{name, [field](const RunConfig& c) { return format_double(c.*field); },
                      [name, field](RunConfig& c, std::string_view v) { c.*field = require_double(name, v); }};
    };
    static const std::vector<KeyDef> table = {
        {"catalog", [](const RunConfig& c) { return c.catalog_path; },
         [](RunConfig& c, std::string_view v) { c.catalog_path = std::string(v); }},
        {"rasters", [](const RunConfig& c) { return c.rasters_path; },
         [](RunConfig& c, std::string_view v) { c.rasters_path = std::string(v); }},

        {"grid.origin_lat", [](const RunConfig& c) { return format_double(c.grid.origin_lat); },
         [](RunConfig& c, std::string_view v) { c.grid.origin_lat = require_double("grid.origin_lat", v); }},
        {"grid.origin_lon", [](const RunConfig& c) { return format_double(c.grid.origin_lon); },
         [](RunConfig& c, std::string_view v) { c.grid.origin_lon = require_double("grid.origin_lon", v); }},
        {"grid.cell_km", [](const RunConfig& c) { return format_double(c.grid.cell_km); },
         [](RunConfig& c, std::string_view v) { c.grid.cell_km = require_double("grid.cell_km", v); }},
        {"grid.n_rows", [](const RunConfig& c) { return std::to_string(c.grid.n_rows); },
         [](RunConfig& c, std::string_view v) { c.grid.n_rows = static_cast<int>(require_int("grid.n_rows", v)); }},
        {"grid.n_cols", [](const RunConfig& c) { return std::to_string(c.grid.n_cols); },
         [](RunConfig& c, std::string_view v) { c.grid.n_cols = static_cast<int>(require_int("grid.n_cols", v)); }},
        {"grid.ref_lat", [](const RunConfig& c) { return format_double(c.grid.ref_lat); },
         [](RunConfig& c, std::string_view v) { c.grid.ref_lat = require_double("grid.ref_lat", v); }},

        {"label.t_min", [](const RunConfig& c) { return std::to_string(c.label.t_min_days); },
         [](RunConfig& c, std::string_view v) { c.label.t_min_days = static_cast<int>(require_int("label.t_min", v)); }},
        {"label.t_max", [](const RunConfig& c) { return std::to_string(c.label.t_max_days); },
         [](RunConfig& c, std::string_view v) { c.label.t_max_days = static_cast<int>(require_int("label.t_max", v)); }},
        {"label.mc", [](const RunConfig& c) { return format_double(c.label.mag_threshold); },
         [](RunConfig& c, std::string_view v) { c.label.mag_threshold = require_double("label.mc", v); }},

        dbl("split.train", &RunConfig::split_train),
        dbl("split.val", &RunConfig::split_val),
        dbl("split.test", &RunConfig::split_test),

        {"rtl.r0", [](const RunConfig& c) { return format_double(c.rtl.r0_km); },
         [](RunConfig& c, std::string_view v) { c.rtl.r0_km = require_double("rtl.r0", v); }},
        {"rtl.t0", [](const RunConfig& c) { return format_double(c.rtl.t0_days); },
         [](RunConfig& c, std::string_view v) { c.rtl.t0_days = require_double("rtl.t0", v); }},
        {"rtl.r_max", [](const RunConfig& c) { return format_double(c.rtl.r_max_km); },
         [](RunConfig& c, std::string_view v) { c.rtl.r_max_km = require_double("rtl.r_max", v); }},
        {"rtl.t_max", [](const RunConfig& c) { return format_double(c.rtl.t_max_days); },
         [](RunConfig& c, std::string_view v) { c.rtl.t_max_days = require_double("rtl.t_max", v); }},
        {"rtl.m_min", [](const RunConfig& c) { return format_double(c.rtl.m_min); },
         [](RunConfig& c, std::string_view v) { c.rtl.m_min = require_double("rtl.m_min", v); }},
        {"rtl.eps_km", [](const RunConfig& c) { return format_double(c.rtl.eps_km); },
         [](RunConfig& c, std::string_view v) { c.rtl.eps_km = require_double("rtl.eps_km", v); }},
        {"rtl.standardize", [](const RunConfig& c) { return std::string(c.rtl.standardize ? "1" : "0"); },
         [](RunConfig& c, std::string_view v) { c.rtl.standardize = require_bool("rtl.standardize", v); }},
        {"rtl.stride", [](const RunConfig& c) { return std::to_string(c.rtl_stride); },
         [](RunConfig& c, std::string_view v) { c.rtl_stride = static_cast<int>(require_int("rtl.stride", v)); }},

        dbl("prior.alpha", &RunConfig::prior_alpha),
        dbl("prior.c", &RunConfig::prior_c),
        {"prior.mode",
         [](const RunConfig& c) { return std::string(c.prior_mode == PriorMode::additive ? "additive" : "scaled"); },
         [](RunConfig& c, std::string_view v) {
             if (v == "additive") c.prior_mode = PriorMode::additive;
             else if (v == "scaled") c.prior_mode = PriorMode::scaled;
             else throw ValidationError("prior.mode must be additive or scaled");
         }},

        {"model.variant", [](const RunConfig& c) { return variant_name(c.model.variant); },
         [](RunConfig& c, std::string_view v) { c.model.variant = parse_variant(std::string(v)); }},
        {"model.residual", [](const RunConfig& c) { return std::string(c.model.use_prior_residual ? "1" : "0"); },
         [](RunConfig& c, std::string_view v) { c.model.use_prior_residual = require_bool("model.residual", v); }},
        {"model.embed_channels", [](const RunConfig& c) { return std::to_string(c.model.embed_channels); },
         [](RunConfig& c, std::string_view v) {
             c.model.embed_channels = static_cast<int>(require_int("model.embed_channels", v));
         }},
        {"model.hidden_channels", [](const RunConfig& c) { return std::to_string(c.model.hidden_channels); },
         [](RunConfig& c, std::string_view v) {
             c.model.hidden_channels = static_cast<int>(require_int("model.hidden_channels", v));
         }},
        {"model.window_days", [](const RunConfig& c) { return std::to_string(c.model.window_days); },
         [](RunConfig& c, std::string_view v) {
             c.model.window_days = static_cast<int>(require_int("model.window_days", v));
         }},
        {"model.kernel", [](const RunConfig& c) { return std::to_string(c.model.kernel); },
         [](RunConfig& c, std::string_view v) { c.model.kernel = static_cast<int>(require_int("model.kernel", v)); }},
        {"model.head_depth", [](const RunConfig& c) { return std::to_string(c.model.head_depth); },
         [](RunConfig& c, std::string_view v) {
             c.model.head_depth = static_cast<int>(require_int("model.head_depth", v));
         }},

        {"train.weight", [](const RunConfig& c) { return format_double(c.train.minor_class_weight); },
         [](RunConfig& c, std::string_view v) { c.train.minor_class_weight = require_double("train.weight", v); }},
        {"train.lr", [](const RunConfig& c) { return format_double(c.train.lr); },
         [](RunConfig& c, std::string_view v) { c.train.lr = require_double("train.lr", v); }},
        {"train.beta1", [](const RunConfig& c) { return format_double(c.train.beta1); },
         [](RunConfig& c, std::string_view v) { c.train.beta1 = require_double("train.beta1", v); }},
        {"train.beta2", [](const RunConfig& c) { return format_double(c.train.beta2); },
         [](RunConfig& c, std::string_view v) { c.train.beta2 = require_double("train.beta2", v); }},
        {"train.adam_eps", [](const RunConfig& c) { return format_double(c.train.adam_eps); },
         [](RunConfig& c, std::string_view v) { c.train.adam_eps = require_double("train.adam_eps", v); }},
        {"train.epochs", [](const RunConfig& c) { return std::to_string(c.train.epochs); },
         [](RunConfig& c, std::string_view v) { c.train.epochs = static_cast<int>(require_int("train.epochs", v)); }},
        {"train.batch_days", [](const RunConfig& c) { return std::to_string(c.train.batch_days); },
         [](RunConfig& c, std::string_view v) {
             c.train.batch_days = static_cast<int>(require_int("train.batch_days", v));
         }},
        {"train.patience", [](const RunConfig& c) { return std::to_string(c.train.patience); },
         [](RunConfig& c, std::string_view v) { c.train.patience = static_cast<int>(require_int("train.patience", v)); }},
        {"train.max_steps_per_epoch", [](const RunConfig& c) { return std::to_string(c.train.max_steps_per_epoch); },
         [](RunConfig& c, std::string_view v) {
             c.train.max_steps_per_epoch = static_cast<int>(require_int("train.max_steps_per_epoch", v));
         }},
        {"train.val_max_days", [](const RunConfig& c) { return std::to_string(c.train.val_max_days); },
         [](RunConfig& c, std::string_view v) {
             c.train.val_max_days = static_cast<int>(require_int("train.val_max_days", v));
         }},

        {"eval.thresholds",
         [](const RunConfig& c) {
             std::string joined;
             for (std::size_t i = 0; i < c.eval_thresholds.size(); ++i) {
                 if (i) joined += ",";
                 joined += format_double(c.eval_thresholds[i]);
             }
             return joined;
         },
         [](RunConfig& c, std::string_view v) {
             c.eval_thresholds.clear();
             for (std::string_view part : split(v, ',')) {
                 if (trim(part).empty()) continue;
                 c.eval_thresholds.push_back(require_double("eval.thresholds", part));
             }
         }},

        {"synth.days", [](const RunConfig& c) { return std::to_string(c.synth_days); },
         [](RunConfig& c, std::string_view v) { c.synth_days = static_cast<int>(require_int("synth.days", v)); }},
        dbl("synth.rate", &RunConfig::synth_rate),
        dbl("synth.b", &RunConfig::synth_b),
        dbl("synth.m_min", &RunConfig::synth_m_min),
        dbl("synth.mag_span", &RunConfig::synth_mag_span),
        {"synth.start", [](const RunConfig& c) { return format_day_iso(c.synth_start_day).substr(0, 10); },
         [](RunConfig& c, std::string_view v) { c.synth_start_day = parse_iso8601_utc(v) / 86400; }},
        {"synth.precursor_mag", [](const RunConfig& c) { return format_double(c.synth_plant.precursor_mag); },
         [](RunConfig& c, std::string_view v) {
             c.synth_plant.precursor_mag = require_double("synth.precursor_mag", v);
         }},
        {"synth.mainshock_mag", [](const RunConfig& c) { return format_double(c.synth_plant.mainshock_mag); },
         [](RunConfig& c, std::string_view v) {
             c.synth_plant.mainshock_mag = require_double("synth.mainshock_mag", v);
         }},
        {"synth.lag", [](const RunConfig& c) { return std::to_string(c.synth_plant.lag_days); },
         [](RunConfig& c, std::string_view v) { c.synth_plant.lag_days = static_cast<int>(require_int("synth.lag", v)); }},
        {"synth.pair_rate", [](const RunConfig& c) { return format_double(c.synth_plant.pair_rate); },
         [](RunConfig& c, std::string_view v) { c.synth_plant.pair_rate = require_double("synth.pair_rate", v); }},
        {"synth.pairs_per_episode", [](const RunConfig& c) { return std::to_string(c.synth_plant.pairs_per_episode); },
         [](RunConfig& c, std::string_view v) {
             c.synth_plant.pairs_per_episode = static_cast<int>(require_int("synth.pairs_per_episode", v));
         }},
        {"synth.spacing", [](const RunConfig& c) { return std::to_string(c.synth_plant.spacing_days); },
         [](RunConfig& c, std::string_view v) {
             c.synth_plant.spacing_days = static_cast<int>(require_int("synth.spacing", v));
         }},

        {"seed", [](const RunConfig& c) { return std::to_string(c.seed); },
         [](RunConfig& c, std::string_view v) { c.seed = static_cast<std::uint64_t>(require_int("seed", v)); }},
    };
    return table;
}

void set_key(RunConfig& config, std::string_view key, std::string_view value) {
    for (const KeyDef& def : key_table()) {
        if (key == def.name) {
            def.set(config, value);
            return;
        }
    }
    throw ValidationError("unknown config key: '" + std::string(key) + "'");
}

}  // namespace

RunConfig parse_run_config(std::istream& in) {
    RunConfig config;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view s = trim(line);
        if (s.empty() || s.front() == '#') continue;
        const auto eq = s.find('=');
        if (eq == std::string_view::npos) {
            throw ValidationError("config line " + std::to_string(line_no) + " is not key=value: '" +
                                  std::string(s) + "'");
        }
        set_key(config, trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
    }
    // The single run seed drives model init as well.
    config.model.seed = config.seed;
    return config;
}

RunConfig parse_run_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file: " + path);
    return parse_run_config(in);
}

void apply_config_override(RunConfig& config, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ValidationError("override must be key=value: '" + assignment + "'");
    set_key(config, trim(std::string_view(assignment).substr(0, eq)),
            trim(std::string_view(assignment).substr(eq + 1)));
    config.model.seed = config.seed;
}

std::string serialize_run_config(const RunConfig& config) {
    std::string out;
    for (const KeyDef& def : key_table()) {
        out += def.name;
        out += '=';
        out += def.get(config);
        out += '\n';
    }
    return out;
}

std::string config_hash(const RunConfig& config) {
    const std::string text = serialize_run_config(config);
    std::uint64_t h = 1469598103934665603ull;
    for (char c : text) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace quakecast
