#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>

#include "quakecast/errors.hpp"
#include "quakecast/prior.hpp"
#include "quakecast/rng.hpp"

using namespace quakecast;

namespace {

LabelTensor constant_labels(int n_days, int value) {
    LabelTensor labels;
    labels.n_rows = 1;
    labels.n_cols = 1;
    for (int d = 0; d < n_days; ++d) labels.reference_days.push_back(d);
    labels.y.assign(static_cast<std::size_t>(n_days), static_cast<std::uint8_t>(value));
    labels.valid.assign(static_cast<std::size_t>(n_days), 1);
    return labels;
}

PriorMap prior_of(double p) {
    PriorMap prior;
    prior.n_rows = 1;
    prior.n_cols = 1;
    prior.p = {p};
    prior.k = {0};
    prior.n = {0};
    return prior;
}

}  // namespace

TEST_CASE("fit_prior smoothing formula") {
    PriorMap never = fit_prior(constant_labels(100, 0), 1.0);
    CHECK(never.p[0] == doctest::Approx(1.0 / 102.0).epsilon(1e-15));
    CHECK(never.k[0] == 0);
    CHECK(never.n[0] == 100);

    PriorMap always = fit_prior(constant_labels(10, 1), 1.0);
    CHECK(always.p[0] == doctest::Approx(11.0 / 12.0).epsilon(1e-15));

    LabelTensor invalid = constant_labels(5, 1);
    invalid.valid.assign(5, 0);
    CHECK_THROWS_AS(fit_prior(invalid, 1.0), ValidationError);
    CHECK_THROWS_AS(fit_prior(constant_labels(5, 1), 0.0), ValidationError);
}

TEST_CASE("fit_prior tracks an empirical rate") {
    Rng rng(606);
    LabelTensor labels = constant_labels(10000, 0);
    for (auto& y : labels.y) y = rng.uniform() < 0.2 ? 1 : 0;
    PriorMap prior = fit_prior(labels, 1.0);
    CHECK(std::abs(prior.p[0] - 0.2) < 0.02);
}

TEST_CASE("prior smoothing keeps p strictly inside (0,1)") {
    for (int n : {1, 3, 10, 1000}) {
        for (int firing : {0, 1}) {
            PriorMap prior = fit_prior(constant_labels(n, firing), 1.0);
            CHECK(prior.p[0] > 0.0);
            CHECK(prior.p[0] < 1.0);
        }
    }
}

TEST_CASE("prior_logits and softmax recovery") {
    PriorLogits mid = prior_logits(prior_of(0.5), 0.0);
    CHECK(mid.o1[0] == doctest::Approx(std::log(0.5)).epsilon(1e-15));
    CHECK(mid.o2[0] == doctest::Approx(std::log(0.5)).epsilon(1e-15));
    Tensor delta({2, 1, 1});
    CHECK(combine_residual(mid, delta)[0] == doctest::Approx(0.5).epsilon(1e-15));

    PriorLogits shifted = prior_logits(prior_of(0.1), 3.0);
    CHECK(shifted.o1[0] == doctest::Approx(std::log(0.9) + 3.0).epsilon(1e-15));
    CHECK(shifted.o2[0] == doctest::Approx(std::log(0.1) + 3.0).epsilon(1e-15));

    // The additive constant cancels: softmax(o) = (1-p, p) for any c.
    Rng rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        const double p = rng.uniform(1e-6, 1.0 - 1e-6);
        const double c = rng.uniform(-20.0, 20.0);
        PriorLogits logits = prior_logits(prior_of(p), c);
        const double y2 = combine_residual(logits, delta)[0];
        CHECK(std::abs(y2 - p) <= 1e-12);
    }
}

TEST_CASE("scaled prior mode multiplies the log probabilities") {
    PriorLogits scaled = prior_logits(prior_of(0.1), 2.0, PriorMode::scaled);
    CHECK(scaled.o1[0] == doctest::Approx(2.0 * std::log(0.9)).epsilon(1e-15));
    CHECK(scaled.o2[0] == doctest::Approx(2.0 * std::log(0.1)).epsilon(1e-15));
}

TEST_CASE("combine_residual algebra") {
    // p = 0.25, delta = (0, log 3): y2 = 0.25*3 / (0.75 + 0.25*3) = 0.5.
    PriorLogits logits = prior_logits(prior_of(0.25), 0.0);
    Tensor delta({2, 1, 1});
    delta[1] = std::log(3.0);
    CHECK(combine_residual(logits, delta)[0] == doctest::Approx(0.5).epsilon(1e-12));

    // Saturation at the +700 cap stays finite and lands at 1.
    Tensor big({2, 1, 1});
    big[1] = 700.0;
    CHECK(combine_residual(logits, big)[0] == doctest::Approx(1.0).epsilon(1e-12));

    Tensor bad({2, 1, 1});
    bad[0] = std::nan("");
    CHECK_THROWS_AS(combine_residual(logits, bad), ValidationError);

    Tensor wrong_shape({2, 2, 1});
    CHECK_THROWS_AS(combine_residual(logits, wrong_shape), ValidationError);
}

TEST_CASE("combine_residual shift invariance and monotonicity") {
    Rng rng(23);
    for (int trial = 0; trial < 50; ++trial) {
        const double p = rng.uniform(0.001, 0.999);
        PriorLogits logits = prior_logits(prior_of(p), rng.uniform(-5.0, 5.0));
        Tensor delta({2, 1, 1});
        delta[0] = rng.uniform(-10.0, 10.0);
        delta[1] = rng.uniform(-10.0, 10.0);
        const double base = combine_residual(logits, delta)[0];

        const double shift = rng.uniform(-30.0, 30.0);
        Tensor shifted = delta;
        shifted[0] += shift;
        shifted[1] += shift;
        CHECK(std::abs(combine_residual(logits, shifted)[0] - base) <= 1e-12);

        Tensor bumped = delta;
        bumped[1] += 0.1;
        CHECK(combine_residual(logits, bumped)[0] > base);
    }
}

TEST_CASE("alarm threshold is strict") {
    Tensor y2({1, 3});
    y2[0] = 0.4;
    y2[1] = 0.5;
    y2[2] = 0.6;
    Tensor alarms = alarm(y2, 0.5);
    CHECK(alarms[0] == 0.0);
    CHECK(alarms[1] == 0.0);  // y2 == t stays quiet
    CHECK(alarms[2] == 1.0);

    Tensor zero_t = alarm(y2, 0.0);
    CHECK(zero_t[0] == 1.0);
    CHECK(zero_t[1] == 1.0);
    CHECK(zero_t[2] == 1.0);
}

TEST_CASE("prior persistence writes raster plus sidecar") {
    LabelTensor labels = constant_labels(10, 0);
    labels.y[3] = 1;
    PriorMap prior = fit_prior(labels, 1.0);

    std::ostringstream raster, sidecar;
    write_prior(raster, sidecar, prior);
    CHECK(raster.str().substr(0, 4) == "QGRD");
    CHECK(sidecar.str().find("alpha=1") != std::string::npos);
    CHECK(sidecar.str().find("0,0,1,10") != std::string::npos);
}
