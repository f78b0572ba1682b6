#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "quakecast/errors.hpp"
#include "quakecast/model.hpp"
#include "quakecast/rng.hpp"
#include "quakecast/synth.hpp"

using namespace quakecast;

namespace {

GridSpec tiny_grid(int side) {
    GridSpec grid;
    grid.origin_lat = 35.0;
    grid.origin_lon = 139.0;
    grid.cell_km = 10.0;
    grid.n_rows = side;
    grid.n_cols = side;
    grid.ref_lat = 35.0;
    return grid;
}

ModelConfig desk_config(ModelVariant variant, bool residual, int window) {
    ModelConfig cfg;
    cfg.variant = variant;
    cfg.use_prior_residual = residual;
    cfg.embed_channels = 4;
    cfg.hidden_channels = 4;
    cfg.window_days = window;
    cfg.kernel = 3;
    cfg.head_depth = 2;
    cfg.seed = 7;
    return cfg;
}

HeatMapSeq random_maps(int days, int side, std::uint64_t seed, double density = 0.05) {
    HeatMapSeq maps;
    maps.start_day = 0;
    maps.days = days;
    maps.n_rows = side;
    maps.n_cols = side;
    maps.values.assign(static_cast<std::size_t>(days) * side * side, 0.0);
    Rng rng(seed);
    for (double& v : maps.values) {
        if (rng.uniform() < density) v = rng.uniform(1.0, 7.0);
    }
    return maps;
}

PriorMap random_prior(int side, std::uint64_t seed) {
    PriorMap prior;
    prior.n_rows = side;
    prior.n_cols = side;
    Rng rng(seed);
    for (int i = 0; i < side * side; ++i) prior.p.push_back(rng.uniform(0.001, 0.4));
    prior.k.assign(prior.cells(), 0);
    prior.n.assign(prior.cells(), 0);
    return prior;
}

LabelTensor random_labels(int days, int side, std::uint64_t seed, double rate = 0.05) {
    LabelTensor labels;
    labels.n_rows = side;
    labels.n_cols = side;
    for (int d = 0; d < days; ++d) labels.reference_days.push_back(d);
    const std::size_t n = static_cast<std::size_t>(days) * side * side;
    labels.y.assign(n, 0);
    labels.valid.assign(n, 1);
    Rng rng(seed);
    for (auto& y : labels.y) y = rng.uniform() < rate ? 1 : 0;
    return labels;
}

}  // namespace

TEST_CASE("zero-initialized residual model reproduces the prior exactly") {
    const int side = 6, window = 5;
    for (ModelVariant variant : {ModelVariant::cnn, ModelVariant::cnn_lstm}) {
        Model model(desk_config(variant, true, window));
        PriorMap prior = random_prior(side, 11);
        model.attach_prior(prior, 0.7, PriorMode::additive);

        HeatMapSeq maps = random_maps(10, side, 3);
        Tensor y2 = model.predict_map(maps, 8);
        for (int i = 0; i < side * side; ++i) {
            CHECK(std::abs(y2[static_cast<std::size_t>(i)] - prior.p[static_cast<std::size_t>(i)]) <= 1e-12);
        }

        // All-zero history too: the anchor does not depend on inputs.
        HeatMapSeq zeros = random_maps(10, side, 3, 0.0);
        Tensor y2_zero = model.predict_map(zeros, 8);
        for (int i = 0; i < side * side; ++i) {
            CHECK(std::abs(y2_zero[static_cast<std::size_t>(i)] - prior.p[static_cast<std::size_t>(i)]) <= 1e-12);
        }
    }
}

TEST_CASE("plain mode starts uniform and inference is repeatable") {
    const int side = 5, window = 4;
    Model model(desk_config(ModelVariant::cnn, false, window));
    HeatMapSeq maps = random_maps(8, side, 5);
    Tensor first = model.predict_map(maps, 6);
    for (std::size_t i = 0; i < first.numel(); ++i) CHECK(first[i] == 0.5);
    Tensor second = model.predict_map(maps, 6);
    CHECK(first.storage() == second.storage());

    CHECK_THROWS_AS(model.predict_map(maps, 2), ValidationError);  // not enough history
}

TEST_CASE("full model gradient passes the finite-difference audit") {
    const int side = 8, window = 3;
    ModelConfig cfg = desk_config(ModelVariant::cnn_lstm, true, window);
    Model model(cfg);
    model.attach_prior(random_prior(side, 21), 0.0, PriorMode::additive);

    HeatMapSeq maps = random_maps(6, side, 23, 0.3);
    LabelTensor labels = random_labels(6, side, 29, 0.2);

    auto loss = [&] { return model.compute_loss(maps, 4, labels, 1.0, 50.0); };
    auto grad = [&] { model.compute_loss_and_grad(maps, 4, labels, 1.0, 50.0); };
    auto params = model.parameters();
    const double err = finite_diff_check(loss, grad, params, 1e-5, 250);
    CHECK(err < 1e-4);
}

TEST_CASE("cnn variant gradient also passes the audit") {
    const int side = 6, window = 4;
    Model model(desk_config(ModelVariant::cnn, true, window));
    model.attach_prior(random_prior(side, 31), 0.0, PriorMode::additive);

    HeatMapSeq maps = random_maps(8, side, 33, 0.3);
    LabelTensor labels = random_labels(8, side, 37, 0.2);

    auto loss = [&] { return model.compute_loss(maps, 5, labels, 1.0, 50.0); };
    auto grad = [&] { model.compute_loss_and_grad(maps, 5, labels, 1.0, 50.0); };
    auto params = model.parameters();
    CHECK(finite_diff_check(loss, grad, params, 1e-5, 250) < 1e-4);
}

TEST_CASE("gradient flows to the final layer on a positive batch") {
    const int side = 6, window = 3;
    Model model(desk_config(ModelVariant::cnn_lstm, true, window));
    model.attach_prior(random_prior(side, 41), 0.0, PriorMode::additive);
    HeatMapSeq maps = random_maps(6, side, 43, 0.3);
    LabelTensor labels = random_labels(6, side, 47, 0.1);
    labels.y[labels.index(4, 2, 2)] = 1;  // at least one positive at day 4

    model.zero_grad();
    model.compute_loss_and_grad(maps, 4, labels, 1.0, 1000.0);
    auto params = model.parameters();
    double head_norm = 0.0;
    Parameter* final_kernel = params[params.size() - 2];
    for (std::size_t i = 0; i < final_kernel->grad.numel(); ++i) {
        head_norm += final_kernel->grad[i] * final_kernel->grad[i];
    }
    CHECK(head_norm > 0.0);
}

TEST_CASE("learning rate zero leaves parameters bit-identical") {
    const int side = 5, window = 3;
    Model model(desk_config(ModelVariant::cnn_lstm, true, window));
    model.attach_prior(random_prior(side, 51), 0.0, PriorMode::additive);
    HeatMapSeq maps = random_maps(20, side, 53, 0.2);
    LabelTensor labels = random_labels(20, side, 57, 0.1);

    std::vector<Tensor> before;
    for (Parameter* p : model.parameters()) before.push_back(p->value);

    TrainConfig tc;
    tc.lr = 0.0;
    tc.epochs = 2;
    auto result = train_model(model, tc, maps, labels, DayRange{2, 12}, DayRange{0, 0});
    CHECK(result.log.size() == 2);

    auto params = model.parameters();
    for (std::size_t i = 0; i < params.size(); ++i) {
        CHECK(params[i]->value.storage() == before[i].storage());
    }
}

TEST_CASE("one-cell constant-positive training converges") {
    // Single cell, plain mode: scores must run from 0.5 up past 0.99, with
    // the loss non-increasing once past warmup.
    ModelConfig cfg = desk_config(ModelVariant::cnn_lstm, false, 3);
    cfg.embed_channels = 2;
    cfg.hidden_channels = 2;
    Model model(cfg);

    HeatMapSeq maps = random_maps(210, 1, 61, 0.5);
    LabelTensor labels = random_labels(210, 1, 63, 0.0);
    for (auto& y : labels.y) y = 1;

    TrainConfig tc;
    tc.lr = 0.02;
    tc.epochs = 200;
    tc.batch_days = 1;
    tc.max_steps_per_epoch = 1;
    tc.minor_class_weight = 1.0;
    auto result = train_model(model, tc, maps, labels, DayRange{5, 6}, DayRange{0, 0});
    REQUIRE(result.log.size() == 200);
    for (std::size_t e = 50; e + 1 < result.log.size(); ++e) {
        CHECK(result.log[e + 1].train_loss <= result.log[e].train_loss + 1e-9);
    }
    Tensor y2 = model.predict_map(maps, 5);
    CHECK(y2[0] > 0.99);
}

TEST_CASE("divergence aborts instead of training on garbage") {
    const int side = 4, window = 3;
    ModelConfig cfg = desk_config(ModelVariant::cnn_lstm, false, window);
    cfg.embed_channels = 2;
    cfg.hidden_channels = 2;
    Model model(cfg);
    HeatMapSeq maps = random_maps(30, side, 91, 0.3);
    LabelTensor labels = random_labels(30, side, 93, 0.3);

    TrainConfig tc;
    tc.lr = 1e160;  // guarantees non-finite values within a few steps
    tc.epochs = 6;
    CHECK_THROWS_AS(train_model(model, tc, maps, labels, DayRange{3, 28}, DayRange{0, 0}), std::runtime_error);
}

TEST_CASE("training is deterministic across runs") {
    const int side = 5, window = 3;
    HeatMapSeq maps = random_maps(40, side, 71, 0.2);
    LabelTensor labels = random_labels(40, side, 73, 0.08);
    PriorMap prior = random_prior(side, 77);

    auto run = [&] {
        Model model(desk_config(ModelVariant::cnn_lstm, true, window));
        model.attach_prior(prior, 0.0, PriorMode::additive);
        TrainConfig tc;
        tc.epochs = 3;
        tc.minor_class_weight = 100.0;
        TrainResult result = train_model(model, tc, maps, labels, DayRange{2, 25}, DayRange{25, 38});
        return std::pair{result, model.parameters()[0]->value.storage()};
    };
    auto [log_a, params_a] = run();
    auto [log_b, params_b] = run();
    REQUIRE(log_a.log.size() == log_b.log.size());
    for (std::size_t i = 0; i < log_a.log.size(); ++i) {
        CHECK(log_a.log[i].train_loss == log_b.log[i].train_loss);
        CHECK((std::isnan(log_a.log[i].val_pr) ? std::isnan(log_b.log[i].val_pr)
                                              : log_a.log[i].val_pr == log_b.log[i].val_pr));
    }
    CHECK(params_a == params_b);
}

TEST_CASE("checkpoint round trip preserves predictions bit-for-bit") {
    const int side = 6, window = 4;
    for (ModelVariant variant : {ModelVariant::cnn, ModelVariant::cnn_lstm}) {
        ModelConfig cfg = desk_config(variant, true, window);
        Model model(cfg);
        model.attach_prior(random_prior(side, 81), 0.25, PriorMode::additive);
        HeatMapSeq maps = random_maps(10, side, 83, 0.2);
        LabelTensor labels = random_labels(10, side, 87, 0.1);

        // A couple of steps so parameters are away from init.
        TrainConfig tc;
        tc.epochs = 2;
        tc.minor_class_weight = 10.0;
        train_model(model, tc, maps, labels, DayRange{3, 9}, DayRange{0, 0});

        const std::string path = std::string("checkpoint_roundtrip_") + variant_name(variant) + ".qck";
        save_checkpoint(path, model);
        Model loaded = load_checkpoint(path);
        CHECK(loaded.config().variant == variant);
        CHECK(loaded.steps_trained == model.steps_trained);

        Tensor original = model.predict_map(maps, 8);
        Tensor restored = loaded.predict_map(maps, 8);
        CHECK(original.storage() == restored.storage());
        std::remove(path.c_str());
    }
}

TEST_CASE("training learns a planted precursor signal end to end") {
    // Small copy of the acceptance benchmark: after training, the score at
    // a cell with fresh planted activity must clear the per-map median.
    SynthConfig synth;
    synth.grid = tiny_grid(8);
    synth.days = 500;
    synth.background_rate = 0.002;
    synth.m_min = 1.0;
    synth.mag_span = 4.0;
    synth.plant.pair_rate = 0.3;
    synth.plant.pairs_per_episode = 40;
    synth.plant.spacing_days = 5;
    synth.plant.lag_days = 15;
    synth.seed = 2025;

    PlantResult planted = plant_precursors(generate_background(synth), synth);
    REQUIRE(planted.planted_pairs > 50);
    Catalog catalog = planted.catalog;

    HeatMapSeq maps = rasterize_daily(catalog, synth.grid, synth.start_day, synth.days);
    LabelSpec spec{10, 50, 5.0};
    std::vector<std::int64_t> ref_days;
    for (std::int64_t t = synth.start_day; t < synth.start_day + synth.days; ++t) ref_days.push_back(t);
    LabelTensor labels = build_labels(catalog, synth.grid, spec, ref_days);

    ModelConfig cfg = desk_config(ModelVariant::cnn_lstm, true, 20);
    cfg.embed_channels = 4;
    cfg.hidden_channels = 6;
    cfg.seed = 5;
    Model model(cfg);

    DayRange train_range{synth.start_day, synth.start_day + 400};
    LabelTensor train_labels = labels;
    PriorMap prior = fit_prior(train_labels, 1.0);
    model.attach_prior(prior, 0.0, PriorMode::additive);

    TrainConfig tc;
    tc.lr = 3e-3;
    tc.epochs = 6;
    tc.max_steps_per_epoch = 40;
    tc.minor_class_weight = 1000.0;
    train_model(model, tc, maps, labels, train_range, DayRange{0, 0});

    // Find a day whose window saw a planted precursor 5..20 days back.
    int tested = 0;
    for (const Event& ev : catalog.events) {
        if (ev.mag != synth.plant.precursor_mag) continue;
        const std::int64_t t = ev.day() + 5;
        if (t < synth.start_day + cfg.window_days || t + spec.t_max_days >= synth.start_day + synth.days) continue;
        auto cell = project_to_cell(ev, synth.grid);
        REQUIRE(cell.has_value());
        Tensor y2 = model.predict_map(maps, t);
        std::vector<double> sorted(y2.storage());
        std::sort(sorted.begin(), sorted.end());
        const double median = sorted[sorted.size() / 2];
        CHECK(y2.at(cell->row, cell->col) > median);
        if (++tested >= 5) break;
    }
    CHECK(tested == 5);
}
