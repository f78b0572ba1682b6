#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "quakecast/catalog.hpp"
#include "quakecast/eval.hpp"
#include "quakecast/nn.hpp"
#include "quakecast/prior.hpp"
#include "quakecast/tensor.hpp"

namespace quakecast {

enum class ModelVariant { cnn, cnn_lstm };

ModelVariant parse_variant(const std::string& name);
std::string variant_name(ModelVariant variant);

struct ModelConfig {
    ModelVariant variant = ModelVariant::cnn_lstm;
    bool use_prior_residual = true;
    int embed_channels = 16;
    int hidden_channels = 32;
    int window_days = 150;  // paper-scale default; tests run much smaller
    int kernel = 3;
    int head_depth = 2;  // readout convs, final layer included
    std::uint64_t seed = 1;

    void validate() const;
};

struct TrainConfig {
    double minor_class_weight = 1000.0;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    int epochs = 10;
    int batch_days = 1;   // reference days folded into one optimizer step
    int patience = 10;    // epochs without val PR AUC improvement
    int max_steps_per_epoch = 0;  // 0 = walk every training day
    int val_max_days = 64;        // evenly strided validation subsample

    void validate() const;
};

struct ForwardCache {
    std::vector<Tensor> day_inputs;
    std::vector<Tensor> embeds;  // tanh outputs, one per step
    std::vector<ConvLstmStepCache> steps;
    Tensor stacked;                    // cnn variant input
    std::vector<Tensor> head_inputs;   // input to each head conv
    std::vector<Tensor> head_outputs;  // tanh outputs of hidden head convs
};

/// The forecasting network. Fully convolutional, so grid size is set by the
/// data; the prior map is attached separately and anchors the residual head.
class Model {
public:
    explicit Model(const ModelConfig& config);

    const ModelConfig& config() const { return config_; }

    void attach_prior(const PriorMap& prior, double c, PriorMode mode);
    bool has_prior() const { return has_prior_; }
    const PriorMap& prior() const { return prior_; }
    double prior_c() const { return prior_c_; }
    PriorMode prior_mode() const { return prior_mode_; }

    std::vector<Parameter*> parameters();
    std::vector<const Parameter*> parameters() const;
    void zero_grad();

    /// Raw head output delta_o for the window ending at ref_day.
    Tensor forward_delta(const HeatMapSeq& maps, std::int64_t ref_day, ForwardCache* cache = nullptr);

    /// delta_o plus prior logits in residual mode; delta_o alone otherwise.
    Tensor full_logits(const Tensor& delta) const;

    /// Class-2 probability map for the window ending at ref_day.
    Tensor predict_map(const HeatMapSeq& maps, std::int64_t ref_day);

    /// Backpropagates d(loss)/d(full logits) through the cached forward.
    void backward(const ForwardCache& cache, const Tensor& grad_logits);

    /// Loss alone (pure) and loss plus accumulated gradients.
    double compute_loss(const HeatMapSeq& maps, std::int64_t ref_day, const LabelTensor& labels, double w1, double w2);
    double compute_loss_and_grad(const HeatMapSeq& maps, std::int64_t ref_day, const LabelTensor& labels, double w1,
                                 double w2, double grad_scale = 1.0);

    long long steps_trained = 0;

private:
    void init_parameters();
    Tensor head_forward(const Tensor& features, ForwardCache* cache);

    ModelConfig config_;
    Parameter embed_kernel_, embed_bias_;
    ConvLstmWeights lstm_;
    std::vector<Parameter> head_kernels_;
    std::vector<Parameter> head_biases_;

    bool has_prior_ = false;
    PriorMap prior_;
    double prior_c_ = 0.0;
    PriorMode prior_mode_ = PriorMode::additive;
    PriorLogits prior_logits_;
};

struct TrainLogRow {
    int epoch = 0;
    double train_loss = 0.0;
    double val_roc = 0.0;
    double val_pr = 0.0;
};

struct TrainResult {
    std::vector<TrainLogRow> log;
    int best_epoch = 0;  // 1-based; 0 when no validation ran
};

/// Reference days in [range) with a full window of history and a valid
/// label cylinder.
std::vector<std::int64_t> eligible_days(const HeatMapSeq& maps, const LabelTensor& labels, const DayRange& range,
                                        int window_days);

TrainResult train_model(Model& model, const TrainConfig& config, const HeatMapSeq& maps, const LabelTensor& labels,
                        const DayRange& train_range, const DayRange& val_range);

/// Pooled (score, label) samples over valid cells of the given days.
std::vector<ScoredSample> score_model(Model& model, const HeatMapSeq& maps, const LabelTensor& labels,
                                      const std::vector<std::int64_t>& days);
std::vector<ScoredSample> score_prior(const PriorMap& prior, const LabelTensor& labels,
                                      const std::vector<std::int64_t>& days);

void save_checkpoint(const std::string& path, const Model& model);
Model load_checkpoint(const std::string& path);

}  // namespace quakecast
