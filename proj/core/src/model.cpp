#include "quakecast/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "quakecast/errors.hpp"
#include "quakecast/raster_io.hpp"
#include "quakecast/rng.hpp"
#include "quakecast/text.hpp"

namespace quakecast {

ModelVariant parse_variant(const std::string& name) {
    if (name == "cnn") return ModelVariant::cnn;
    if (name == "cnn_lstm") return ModelVariant::cnn_lstm;
    throw ValidationError("unknown model variant '" + name + "' (expected cnn or cnn_lstm)");
}

std::string variant_name(ModelVariant variant) { return variant == ModelVariant::cnn ? "cnn" : "cnn_lstm"; }

void ModelConfig::validate() const {
    if (embed_channels < 1 || hidden_channels < 1) throw ValidationError("model channels must be >= 1");
    if (window_days < 1) throw ValidationError("model window_days must be >= 1");
    if (kernel < 1 || kernel % 2 == 0) throw ValidationError("model kernel must be odd");
    if (head_depth < 1) throw ValidationError("model head_depth must be >= 1");
}

void TrainConfig::validate() const {
    if (!(minor_class_weight > 0.0)) throw ValidationError("train weight must be > 0");
    if (!(lr >= 0.0)) throw ValidationError("train learning rate must be >= 0");
    if (epochs < 1) throw ValidationError("train epochs must be >= 1");
    if (batch_days < 1) throw ValidationError("train batch_days must be >= 1");
    if (patience < 1) throw ValidationError("train patience must be >= 1");
}

namespace {

// The forget gate opens most of the way at init so the cell state can carry
// a mark across the handful of days between recurrences of a source.
constexpr double kForgetBiasInit = 1.5;

void init_kernel(Parameter& p, Rng& rng) {
    const int fan_in = p.value.dim(1) * p.value.dim(2) * p.value.dim(3);
    const double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
    for (std::size_t i = 0; i < p.value.numel(); ++i) p.value[i] = rng.uniform(-bound, bound);
}

Tensor day_slice(const HeatMapSeq& maps, std::int64_t day) {
    Tensor x({1, maps.n_rows, maps.n_cols});
    const int d = static_cast<int>(day - maps.start_day);
    const std::size_t cells = static_cast<std::size_t>(maps.n_rows) * maps.n_cols;
    std::copy(maps.values.begin() + static_cast<std::ptrdiff_t>(d * cells),
              maps.values.begin() + static_cast<std::ptrdiff_t>((d + 1) * cells), x.data());
    return x;
}

Tensor tanh_backward(const Tensor& upstream, const Tensor& tanh_out) {
    Tensor d(upstream.shape());
    for (std::size_t i = 0; i < d.numel(); ++i) d[i] = upstream[i] * (1.0 - tanh_out[i] * tanh_out[i]);
    return d;
}

}  // namespace

Model::Model(const ModelConfig& config) : config_(config) {
    config_.validate();
    init_parameters();
}

void Model::init_parameters() {
    const int k = config_.kernel;
    const int embed = config_.embed_channels;
    const int hidden = config_.hidden_channels;
    Rng rng(derive_seed(config_.seed, "model.init"));

    if (config_.variant == ModelVariant::cnn) {
        embed_kernel_ = Parameter(Tensor({embed, config_.window_days, k, k}));
        embed_bias_ = Parameter(Tensor({embed}));
        init_kernel(embed_kernel_, rng);
    } else {
        embed_kernel_ = Parameter(Tensor({embed, 1, k, k}));
        embed_bias_ = Parameter(Tensor({embed}));
        init_kernel(embed_kernel_, rng);
        auto gate_kernel = [&] { return Tensor({hidden, embed + hidden, k, k}); };
        lstm_ = ConvLstmWeights{Parameter(gate_kernel()), Parameter(Tensor({hidden})),
                                Parameter(gate_kernel()), Parameter(Tensor({hidden})),
                                Parameter(gate_kernel()), Parameter(Tensor({hidden})),
                                Parameter(gate_kernel()), Parameter(Tensor({hidden}))};
        init_kernel(lstm_.w_i, rng);
        init_kernel(lstm_.w_f, rng);
        init_kernel(lstm_.w_g, rng);
        init_kernel(lstm_.w_o, rng);
        lstm_.b_f.value.fill(kForgetBiasInit);
    }

    const int feat = config_.variant == ModelVariant::cnn ? embed : hidden;
    head_kernels_.clear();
    head_biases_.clear();
    for (int layer = 0; layer + 1 < config_.head_depth; ++layer) {
        head_kernels_.emplace_back(Tensor({feat, feat, k, k}));
        head_biases_.emplace_back(Tensor({feat}));
        init_kernel(head_kernels_.back(), rng);
    }
    // Zero-initialized final layer: training starts exactly at the prior in
    // residual mode, and at the uniform prediction otherwise.
    head_kernels_.emplace_back(Tensor({2, feat, k, k}));
    head_biases_.emplace_back(Tensor({2}));
}

void Model::attach_prior(const PriorMap& prior, double c, PriorMode mode) {
    prior_ = prior;
    prior_c_ = c;
    prior_mode_ = mode;
    prior_logits_ = prior_logits(prior_, prior_c_, prior_mode_);
    has_prior_ = true;
}

std::vector<Parameter*> Model::parameters() {
    std::vector<Parameter*> params{&embed_kernel_, &embed_bias_};
    if (config_.variant == ModelVariant::cnn_lstm) {
        params.insert(params.end(), {&lstm_.w_i, &lstm_.b_i, &lstm_.w_f, &lstm_.b_f, &lstm_.w_g, &lstm_.b_g,
                                     &lstm_.w_o, &lstm_.b_o});
    }
    for (std::size_t i = 0; i < head_kernels_.size(); ++i) {
        params.push_back(&head_kernels_[i]);
        params.push_back(&head_biases_[i]);
    }
    return params;
}

std::vector<const Parameter*> Model::parameters() const {
    auto mutable_params = const_cast<Model*>(this)->parameters();
    return std::vector<const Parameter*>(mutable_params.begin(), mutable_params.end());
}

void Model::zero_grad() {
    for (Parameter* p : parameters()) p->zero_grad();
}

Tensor Model::head_forward(const Tensor& features, ForwardCache* cache) {
    Tensor current = features;
    for (std::size_t layer = 0; layer < head_kernels_.size(); ++layer) {
        if (cache) cache->head_inputs.push_back(current);
        Tensor pre = conv2d(current, head_kernels_[layer].value, head_biases_[layer].value);
        if (layer + 1 < head_kernels_.size()) {
            current = tanh_map(pre);
            if (cache) cache->head_outputs.push_back(current);
        } else {
            current = std::move(pre);
        }
    }
    return current;
}

Tensor Model::forward_delta(const HeatMapSeq& maps, std::int64_t ref_day, ForwardCache* cache) {
    const int window = config_.window_days;
    if (ref_day - window + 1 < maps.start_day || !maps.contains_day(ref_day)) {
        throw ValidationError("reference day " + std::to_string(ref_day) + " lacks " + std::to_string(window) +
                              " days of raster history");
    }

    if (config_.variant == ModelVariant::cnn) {
        Tensor stacked({window, maps.n_rows, maps.n_cols});
        const std::size_t cells = static_cast<std::size_t>(maps.n_rows) * maps.n_cols;
        for (int s = 0; s < window; ++s) {
            const int d = static_cast<int>(ref_day - window + 1 + s - maps.start_day);
            std::copy(maps.values.begin() + static_cast<std::ptrdiff_t>(d * cells),
                      maps.values.begin() + static_cast<std::ptrdiff_t>((d + 1) * cells),
                      stacked.data() + static_cast<std::size_t>(s) * cells);
        }
        Tensor embedded = tanh_map(conv2d(stacked, embed_kernel_.value, embed_bias_.value));
        if (cache) {
            cache->stacked = stacked;
            cache->embeds.push_back(embedded);
        }
        return head_forward(embedded, cache);
    }

    ConvLstmState state{Tensor({config_.hidden_channels, maps.n_rows, maps.n_cols}),
                        Tensor({config_.hidden_channels, maps.n_rows, maps.n_cols})};
    for (int s = 0; s < window; ++s) {
        Tensor x = day_slice(maps, ref_day - window + 1 + s);
        Tensor embedded = tanh_map(conv2d(x, embed_kernel_.value, embed_bias_.value));
        ConvLstmStepCache* step_cache = nullptr;
        if (cache) {
            cache->day_inputs.push_back(x);
            cache->embeds.push_back(embedded);
            cache->steps.emplace_back();
            step_cache = &cache->steps.back();
        }
        state = convlstm_step(embedded, state, lstm_, step_cache);
    }
    return head_forward(state.h, cache);
}

Tensor Model::full_logits(const Tensor& delta) const {
    if (!config_.use_prior_residual) return delta;
    if (!has_prior_) throw ValidationError("residual model has no prior attached");
    const std::size_t cells = prior_logits_.o1.size();
    if (delta.numel() != 2 * cells) throw ValidationError("delta_o does not match the prior grid");
    Tensor logits(delta.shape());
    for (std::size_t i = 0; i < cells; ++i) {
        logits[i] = prior_logits_.o1[i] + delta[i];
        logits[cells + i] = prior_logits_.o2[i] + delta[cells + i];
    }
    return logits;
}

Tensor Model::predict_map(const HeatMapSeq& maps, std::int64_t ref_day) {
    Tensor delta = forward_delta(maps, ref_day);
    if (config_.use_prior_residual) {
        if (!has_prior_) throw ValidationError("residual model has no prior attached");
        return combine_residual(prior_logits_, delta);
    }
    // Plain per-cell softmax of the head output.
    const std::size_t cells = delta.numel() / 2;
    Tensor y2({delta.dim(1), delta.dim(2)});
    for (std::size_t i = 0; i < cells; ++i) {
        const double a = delta[i], b = delta[cells + i];
        const double m = std::max(a, b);
        const double ea = std::exp(a - m), eb = std::exp(b - m);
        y2[i] = eb / (ea + eb);
    }
    return y2;
}

void Model::backward(const ForwardCache& cache, const Tensor& grad_logits) {
    // Prior logits are constants, so d(loss)/d(delta) is grad_logits as-is.
    Tensor upstream = grad_logits;
    for (std::size_t layer = head_kernels_.size(); layer-- > 0;) {
        if (layer + 1 < head_kernels_.size()) upstream = tanh_backward(upstream, cache.head_outputs[layer]);
        ConvGrads grads = conv2d_vjp(cache.head_inputs[layer], head_kernels_[layer].value, upstream);
        for (std::size_t i = 0; i < grads.kernel.numel(); ++i) head_kernels_[layer].grad[i] += grads.kernel[i];
        for (std::size_t i = 0; i < grads.bias.numel(); ++i) head_biases_[layer].grad[i] += grads.bias[i];
        upstream = std::move(grads.input);
    }

    if (config_.variant == ModelVariant::cnn) {
        if (cache.embeds.empty()) throw ValidationError("backward called without a forward cache");
        Tensor d_pre = tanh_backward(upstream, cache.embeds[0]);
        ConvGrads grads = conv2d_vjp(cache.stacked, embed_kernel_.value, d_pre);
        for (std::size_t i = 0; i < grads.kernel.numel(); ++i) embed_kernel_.grad[i] += grads.kernel[i];
        for (std::size_t i = 0; i < grads.bias.numel(); ++i) embed_bias_.grad[i] += grads.bias[i];
        return;
    }

    if (cache.steps.size() != static_cast<std::size_t>(config_.window_days)) {
        throw ValidationError("backward called without a forward cache");
    }
    Tensor dh = std::move(upstream);
    Tensor dc(dh.shape());
    for (std::size_t s = cache.steps.size(); s-- > 0;) {
        ConvLstmStepGrads grads = convlstm_step_vjp(dh, dc, cache.steps[s], lstm_);
        Tensor d_pre = tanh_backward(grads.x_embed, cache.embeds[s]);
        ConvGrads embed_grads = conv2d_vjp(cache.day_inputs[s], embed_kernel_.value, d_pre);
        for (std::size_t i = 0; i < embed_grads.kernel.numel(); ++i) embed_kernel_.grad[i] += embed_grads.kernel[i];
        for (std::size_t i = 0; i < embed_grads.bias.numel(); ++i) embed_bias_.grad[i] += embed_grads.bias[i];
        dh = std::move(grads.h_prev);
        dc = std::move(grads.c_prev);
    }
}

namespace {

struct LabelSlices {
    Tensor labels;
    Tensor valid;
};

LabelSlices label_maps(const LabelTensor& labels, std::int64_t ref_day) {
    auto day_idx = labels.day_index(ref_day);
    if (!day_idx) throw ValidationError("no labels built for reference day " + std::to_string(ref_day));
    LabelSlices out{Tensor({labels.n_rows, labels.n_cols}), Tensor({labels.n_rows, labels.n_cols})};
    const std::size_t cells = static_cast<std::size_t>(labels.n_rows) * labels.n_cols;
    for (std::size_t i = 0; i < cells; ++i) {
        out.labels[i] = labels.y[*day_idx * cells + i];
        out.valid[i] = labels.valid[*day_idx * cells + i];
    }
    return out;
}

}  // namespace

double Model::compute_loss(const HeatMapSeq& maps, std::int64_t ref_day, const LabelTensor& labels, double w1,
                           double w2) {
    LabelSlices slices = label_maps(labels, ref_day);
    Tensor logits = full_logits(forward_delta(maps, ref_day));
    return weighted_softmax_ce(logits, slices.labels, slices.valid, w1, w2).loss;
}

double Model::compute_loss_and_grad(const HeatMapSeq& maps, std::int64_t ref_day, const LabelTensor& labels, double w1,
                                    double w2, double grad_scale) {
    LabelSlices slices = label_maps(labels, ref_day);
    ForwardCache cache;
    Tensor logits = full_logits(forward_delta(maps, ref_day, &cache));
    CeResult ce = weighted_softmax_ce(logits, slices.labels, slices.valid, w1, w2);
    if (grad_scale != 1.0) {
        for (std::size_t i = 0; i < ce.grad_logits.numel(); ++i) ce.grad_logits[i] *= grad_scale;
    }
    backward(cache, ce.grad_logits);
    return ce.loss;
}

std::vector<std::int64_t> eligible_days(const HeatMapSeq& maps, const LabelTensor& labels, const DayRange& range,
                                        int window_days) {
    std::vector<std::int64_t> days;
    const std::size_t cells = static_cast<std::size_t>(labels.n_rows) * labels.n_cols;
    for (std::int64_t day = range.begin; day < range.end; ++day) {
        if (day - window_days + 1 < maps.start_day || !maps.contains_day(day)) continue;
        auto idx = labels.day_index(day);
        if (!idx) continue;
        if (labels.valid[*idx * cells] == 0) continue;  // the mask is per day
        days.push_back(day);
    }
    return days;
}

namespace {

struct AdamState {
    std::vector<Tensor> m;
    std::vector<Tensor> v;
    long long t = 0;
};

void adam_step(std::vector<Parameter*>& params, AdamState& state, const TrainConfig& config) {
    if (state.m.empty()) {
        for (Parameter* p : params) {
            state.m.emplace_back(p->value.shape());
            state.v.emplace_back(p->value.shape());
        }
    }
    state.t += 1;
    const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.t));
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        Parameter& p = *params[pi];
        Tensor& m = state.m[pi];
        Tensor& v = state.v[pi];
        for (std::size_t i = 0; i < p.value.numel(); ++i) {
            const double g = p.grad[i];
            m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g;
            v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g * g;
            const double m_hat = m[i] / bc1;
            const double v_hat = v[i] / bc2;
            p.value[i] -= config.lr * m_hat / (std::sqrt(v_hat) + config.adam_eps);
        }
    }
}

std::vector<Tensor> snapshot_values(const std::vector<Parameter*>& params) {
    std::vector<Tensor> values;
    values.reserve(params.size());
    for (const Parameter* p : params) values.push_back(p->value);
    return values;
}

void restore_values(std::vector<Parameter*>& params, const std::vector<Tensor>& values) {
    for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = values[i];
}

}  // namespace

TrainResult train_model(Model& model, const TrainConfig& config, const HeatMapSeq& maps, const LabelTensor& labels,
                        const DayRange& train_range, const DayRange& val_range) {
    config.validate();
    const int window = model.config().window_days;
    std::vector<std::int64_t> train_days = eligible_days(maps, labels, train_range, window);
    if (train_days.empty()) throw ValidationError("no trainable reference days in the training range");

    std::vector<std::int64_t> val_days = eligible_days(maps, labels, val_range, window);
    if (config.val_max_days > 0 && val_days.size() > static_cast<std::size_t>(config.val_max_days)) {
        // Deterministic even stride; validation cost stays bounded.
        std::vector<std::int64_t> strided;
        const std::size_t n = val_days.size();
        for (int i = 0; i < config.val_max_days; ++i) {
            strided.push_back(val_days[i * n / static_cast<std::size_t>(config.val_max_days)]);
        }
        strided.erase(std::unique(strided.begin(), strided.end()), strided.end());
        val_days = std::move(strided);
    }

    auto params = model.parameters();
    AdamState adam;
    Rng shuffle_rng(derive_seed(model.config().seed, "train.shuffle"));

    TrainResult result;
    double best_pr = -1.0;
    std::vector<Tensor> best_values;
    int stale_epochs = 0;

    const double w1 = 1.0, w2 = config.minor_class_weight;
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        std::vector<std::int64_t> order = train_days;
        for (std::size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1], order[shuffle_rng.uniform_index(i)]);
        }
        if (config.max_steps_per_epoch > 0) {
            const std::size_t cap = static_cast<std::size_t>(config.max_steps_per_epoch) *
                                    static_cast<std::size_t>(config.batch_days);
            if (order.size() > cap) order.resize(cap);
        }

        double loss_sum = 0.0;
        std::size_t sample_count = 0;
        for (std::size_t pos = 0; pos < order.size(); pos += static_cast<std::size_t>(config.batch_days)) {
            const std::size_t batch_end = std::min(order.size(), pos + static_cast<std::size_t>(config.batch_days));
            const double scale = 1.0 / static_cast<double>(batch_end - pos);
            model.zero_grad();
            for (std::size_t bi = pos; bi < batch_end; ++bi) {
                const double loss = model.compute_loss_and_grad(maps, order[bi], labels, w1, w2, scale);
                if (!std::isfinite(loss)) {
                    throw std::runtime_error("training diverged: non-finite loss at step " +
                                             std::to_string(model.steps_trained) + ", reference day " +
                                             std::to_string(order[bi]));
                }
                loss_sum += loss;
                ++sample_count;
            }
            adam_step(params, adam, config);
            model.steps_trained += 1;
        }

        TrainLogRow row;
        row.epoch = epoch;
        row.train_loss = loss_sum / static_cast<double>(sample_count);
        row.val_roc = std::numeric_limits<double>::quiet_NaN();
        row.val_pr = std::numeric_limits<double>::quiet_NaN();

        if (!val_days.empty()) {
            std::vector<ScoredSample> samples = score_model(model, maps, labels, val_days);
            bool two_class = false, any_pos = false;
            for (const auto& s : samples) {
                if (s.label) any_pos = true;
                else two_class = true;
            }
            if (any_pos && two_class) {
                row.val_roc = roc_auc(samples);
                row.val_pr = pr_auc(samples);
                if (row.val_pr > best_pr) {
                    best_pr = row.val_pr;
                    best_values = snapshot_values(params);
                    result.best_epoch = epoch;
                    stale_epochs = 0;
                } else {
                    ++stale_epochs;
                }
            }
        }
        result.log.push_back(row);
        if (stale_epochs >= config.patience) break;
    }

    if (!best_values.empty()) restore_values(params, best_values);
    return result;
}

std::vector<ScoredSample> score_model(Model& model, const HeatMapSeq& maps, const LabelTensor& labels,
                                      const std::vector<std::int64_t>& days) {
    std::vector<ScoredSample> samples;
    const std::size_t cells = static_cast<std::size_t>(labels.n_rows) * labels.n_cols;
    for (std::int64_t day : days) {
        auto idx = labels.day_index(day);
        if (!idx) throw ValidationError("no labels built for reference day " + std::to_string(day));
        Tensor y2 = model.predict_map(maps, day);
        for (std::size_t i = 0; i < cells; ++i) {
            if (!labels.valid[*idx * cells + i]) continue;
            samples.push_back({y2[i], labels.y[*idx * cells + i]});
        }
    }
    return samples;
}

std::vector<ScoredSample> score_prior(const PriorMap& prior, const LabelTensor& labels,
                                      const std::vector<std::int64_t>& days) {
    std::vector<ScoredSample> samples;
    const std::size_t cells = prior.cells();
    for (std::int64_t day : days) {
        auto idx = labels.day_index(day);
        if (!idx) throw ValidationError("no labels built for reference day " + std::to_string(day));
        for (std::size_t i = 0; i < cells; ++i) {
            if (!labels.valid[*idx * cells + i]) continue;
            samples.push_back({prior.p[i], labels.y[*idx * cells + i]});
        }
    }
    return samples;
}

void save_checkpoint(const std::string& path, const Model& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path);
    const ModelConfig& cfg = model.config();
    out << "quakecast-checkpoint v1\n";
    out << "variant=" << variant_name(cfg.variant) << '\n';
    out << "use_prior_residual=" << (cfg.use_prior_residual ? 1 : 0) << '\n';
    out << "embed_channels=" << cfg.embed_channels << '\n';
    out << "hidden_channels=" << cfg.hidden_channels << '\n';
    out << "window_days=" << cfg.window_days << '\n';
    out << "kernel=" << cfg.kernel << '\n';
    out << "head_depth=" << cfg.head_depth << '\n';
    out << "seed=" << cfg.seed << '\n';
    out << "steps_trained=" << model.steps_trained << '\n';
    out << "has_prior=" << (model.has_prior() ? 1 : 0) << '\n';
    if (model.has_prior()) {
        out << "prior_rows=" << model.prior().n_rows << '\n';
        out << "prior_cols=" << model.prior().n_cols << '\n';
        out << "prior_alpha=" << format_double(model.prior().alpha) << '\n';
        out << "prior_c=" << format_double(model.prior_c()) << '\n';
        out << "prior_mode=" << (model.prior_mode() == PriorMode::additive ? "additive" : "scaled") << '\n';
    }
    auto params = model.parameters();
    out << "tensors=" << params.size() << '\n';
    out << "---\n";
    for (const Parameter* p : params) write_tensor_block(out, p->value);
    if (model.has_prior()) {
        Tensor p_map({model.prior().n_rows, model.prior().n_cols});
        std::copy(model.prior().p.begin(), model.prior().p.end(), p_map.data());
        write_tensor_block(out, p_map);
    }
    if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

Model load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open checkpoint: " + path);
    std::string line;
    if (!std::getline(in, line) || line != "quakecast-checkpoint v1") {
        throw ValidationError("not a quakecast checkpoint: " + path);
    }
    std::map<std::string, std::string> kv;
    while (std::getline(in, line) && line != "---") {
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ValidationError("malformed checkpoint header line: " + line);
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    auto get = [&](const std::string& key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end()) throw ValidationError("checkpoint header missing key: " + key);
        return it->second;
    };

    ModelConfig cfg;
    cfg.variant = parse_variant(get("variant"));
    cfg.use_prior_residual = get("use_prior_residual") == "1";
    cfg.embed_channels = static_cast<int>(*parse_int(get("embed_channels")));
    cfg.hidden_channels = static_cast<int>(*parse_int(get("hidden_channels")));
    cfg.window_days = static_cast<int>(*parse_int(get("window_days")));
    cfg.kernel = static_cast<int>(*parse_int(get("kernel")));
    cfg.head_depth = static_cast<int>(*parse_int(get("head_depth")));
    cfg.seed = static_cast<std::uint64_t>(*parse_int(get("seed")));

    Model model(cfg);
    model.steps_trained = *parse_int(get("steps_trained"));
    auto params = model.parameters();
    if (static_cast<std::size_t>(*parse_int(get("tensors"))) != params.size()) {
        throw ValidationError("checkpoint tensor count does not match the architecture");
    }
    for (Parameter* p : params) p->value = read_tensor_block(in, p->value.shape());

    if (get("has_prior") == "1") {
        PriorMap prior;
        prior.n_rows = static_cast<int>(*parse_int(get("prior_rows")));
        prior.n_cols = static_cast<int>(*parse_int(get("prior_cols")));
        prior.alpha = *parse_double(get("prior_alpha"));
        Tensor p_map = read_tensor_block(in, {prior.n_rows, prior.n_cols});
        prior.p.assign(p_map.data(), p_map.data() + p_map.numel());
        prior.k.assign(prior.cells(), 0);
        prior.n.assign(prior.cells(), 0);
        const PriorMode mode = get("prior_mode") == "scaled" ? PriorMode::scaled : PriorMode::additive;
        model.attach_prior(prior, *parse_double(get("prior_c")), mode);
    }
    return model;
}

}  // namespace quakecast
