#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "quakecast/errors.hpp"
#include "quakecast/nn.hpp"
#include "quakecast/rng.hpp"
#include "quakecast/threading.hpp"

using namespace quakecast;

namespace {

Tensor random_tensor(std::vector<int> shape, Rng& rng, double scale = 1.0) {
    Tensor t(std::move(shape));
    for (std::size_t i = 0; i < t.numel(); ++i) t[i] = rng.uniform(-scale, scale);
    return t;
}

// Fixed +-1 projection makes a scalar loss out of any tensor output.
Tensor sign_coeffs(const std::vector<int>& shape, Rng& rng) {
    Tensor t(shape);
    for (std::size_t i = 0; i < t.numel(); ++i) t[i] = rng.uniform() < 0.5 ? -1.0 : 1.0;
    return t;
}

double dot(const Tensor& a, const Tensor& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.numel(); ++i) s += a[i] * b[i];
    return s;
}

ConvLstmWeights make_lstm_weights(int embed, int hidden, int k) {
    auto kernel = [&] { return Tensor({hidden, embed + hidden, k, k}); };
    auto bias = [&] { return Tensor({hidden}); };
    return ConvLstmWeights{Parameter(kernel()), Parameter(bias()), Parameter(kernel()), Parameter(bias()),
                           Parameter(kernel()), Parameter(bias()), Parameter(kernel()), Parameter(bias())};
}

}  // namespace

TEST_CASE("conv2d hand cases") {
    // 1x1 kernel of value 1 is the identity.
    Tensor input({1, 2, 2});
    input[0] = 1;
    input[1] = 2;
    input[2] = 3;
    input[3] = 4;
    Tensor id_kernel({1, 1, 1, 1});
    id_kernel[0] = 1.0;
    Tensor zero_bias({1});
    Tensor out = conv2d(input, id_kernel, zero_bias);
    for (std::size_t i = 0; i < 4; ++i) CHECK(out[i] == input[i]);

    // Zero 3x3 kernel with bias b gives a constant map.
    Tensor zero_kernel({1, 1, 3, 3});
    Tensor bias({1});
    bias[0] = 2.5;
    Tensor constant = conv2d(input, zero_kernel, bias);
    for (std::size_t i = 0; i < 4; ++i) CHECK(constant[i] == 2.5);

    // 3x3 kernel of ones on [[1,2],[3,4]]: every output sums all in-bounds
    // inputs under zero padding, so all four entries are 10.
    Tensor ones_kernel = Tensor::full({1, 1, 3, 3}, 1.0);
    Tensor summed = conv2d(input, ones_kernel, zero_bias);
    for (std::size_t i = 0; i < 4; ++i) CHECK(summed[i] == 10.0);

    Tensor bad_kernel({1, 2, 3, 3});
    CHECK_THROWS_AS(conv2d(input, bad_kernel, zero_bias), ValidationError);
    Tensor even_kernel({1, 1, 2, 2});
    CHECK_THROWS_AS(conv2d(input, even_kernel, zero_bias), ValidationError);
}

TEST_CASE("conv2d is linear in its input when bias is zero") {
    Rng rng(5);
    Tensor x = random_tensor({2, 5, 6}, rng);
    Tensor y = random_tensor({2, 5, 6}, rng);
    Tensor kernel = random_tensor({3, 2, 3, 3}, rng);
    Tensor bias({3});
    const double a = 1.7, b = -0.6;

    Tensor mix({2, 5, 6});
    for (std::size_t i = 0; i < mix.numel(); ++i) mix[i] = a * x[i] + b * y[i];
    Tensor lhs = conv2d(mix, kernel, bias);
    Tensor cx = conv2d(x, kernel, bias);
    Tensor cy = conv2d(y, kernel, bias);
    for (std::size_t i = 0; i < lhs.numel(); ++i) {
        CHECK(lhs[i] == doctest::Approx(a * cx[i] + b * cy[i]).epsilon(1e-12));
    }
}

TEST_CASE("conv2d output is thread-count independent") {
    Rng rng(6);
    Tensor x = random_tensor({3, 16, 16}, rng);
    Tensor kernel = random_tensor({4, 3, 3, 3}, rng);
    Tensor bias = random_tensor({4}, rng);
    set_num_threads(1);
    Tensor one = conv2d(x, kernel, bias);
    set_num_threads(4);
    Tensor four = conv2d(x, kernel, bias);
    set_num_threads(0);
    CHECK(one.storage() == four.storage());
}

TEST_CASE("conv2d_vjp basics") {
    Rng rng(7);
    Tensor input = random_tensor({2, 4, 4}, rng);
    Tensor kernel = random_tensor({2, 2, 3, 3}, rng);

    Tensor zero_up({2, 4, 4});
    ConvGrads zero = conv2d_vjp(input, kernel, zero_up);
    for (std::size_t i = 0; i < zero.input.numel(); ++i) CHECK(zero.input[i] == 0.0);
    for (std::size_t i = 0; i < zero.kernel.numel(); ++i) CHECK(zero.kernel[i] == 0.0);
    for (std::size_t i = 0; i < zero.bias.numel(); ++i) CHECK(zero.bias[i] == 0.0);

    // Identity kernel passes the upstream straight through.
    Tensor single = random_tensor({1, 4, 4}, rng);
    Tensor id_kernel({1, 1, 1, 1});
    id_kernel[0] = 1.0;
    Tensor upstream = random_tensor({1, 4, 4}, rng);
    ConvGrads grads = conv2d_vjp(single, id_kernel, upstream);
    for (std::size_t i = 0; i < upstream.numel(); ++i) CHECK(grads.input[i] == upstream[i]);
    CHECK(grads.bias[0] == doctest::Approx(dot(upstream, Tensor::full({1, 4, 4}, 1.0))).epsilon(1e-12));
}

TEST_CASE("conv2d_vjp matches finite differences") {
    Rng rng(42);
    Parameter input(random_tensor({2, 4, 4}, rng));
    Parameter kernel(random_tensor({2, 2, 3, 3}, rng));
    Parameter bias(random_tensor({2}, rng));
    const Tensor coeffs = sign_coeffs({2, 4, 4}, rng);

    auto loss = [&] { return dot(conv2d(input.value, kernel.value, bias.value), coeffs); };
    auto grad = [&] {
        ConvGrads grads = conv2d_vjp(input.value, kernel.value, coeffs);
        for (std::size_t i = 0; i < grads.input.numel(); ++i) input.grad[i] += grads.input[i];
        for (std::size_t i = 0; i < grads.kernel.numel(); ++i) kernel.grad[i] += grads.kernel[i];
        for (std::size_t i = 0; i < grads.bias.numel(); ++i) bias.grad[i] += grads.bias[i];
    };

    Parameter* params[] = {&input, &kernel, &bias};
    const double err = finite_diff_check(loss, grad, params, 1e-5, 1000);
    CHECK(err < 1e-6);
}

TEST_CASE("convlstm_step zero weights and zero state") {
    const int embed = 2, hidden = 3, k = 3, h = 4, w = 5;
    ConvLstmWeights weights = make_lstm_weights(embed, hidden, k);
    ConvLstmState state{Tensor({hidden, h, w}), Tensor({hidden, h, w})};
    Tensor x({embed, h, w});
    x.fill(0.7);

    ConvLstmStepCache cache;
    ConvLstmState next = convlstm_step(x, state, weights, &cache);
    for (std::size_t i = 0; i < cache.i.numel(); ++i) {
        CHECK(cache.i[i] == 0.5);
        CHECK(cache.f[i] == 0.5);
        CHECK(cache.o[i] == 0.5);
        CHECK(cache.g[i] == 0.0);
        CHECK(next.c[i] == 0.0);
        CHECK(next.h[i] == 0.0);
    }
}

TEST_CASE("convlstm_step gate forcing preserves the cell state") {
    const int embed = 1, hidden = 2, k = 3, h = 3, w = 3;
    ConvLstmWeights weights = make_lstm_weights(embed, hidden, k);
    weights.b_f.value.fill(30.0);   // f ~ 1
    weights.b_i.value.fill(-30.0);  // i ~ 0

    Rng rng(9);
    ConvLstmState state{random_tensor({hidden, h, w}, rng), random_tensor({hidden, h, w}, rng)};
    Tensor x = random_tensor({embed, h, w}, rng);
    ConvLstmState next = convlstm_step(x, state, weights);
    for (std::size_t i = 0; i < next.c.numel(); ++i) {
        CHECK(next.c[i] == doctest::Approx(state.c[i]).epsilon(1e-9));
    }

    // With o forced to 1 as well, h' = tanh(c): the state is conserved in c.
    weights.b_o.value.fill(30.0);
    ConvLstmState conserved = convlstm_step(x, state, weights);
    for (std::size_t i = 0; i < conserved.h.numel(); ++i) {
        CHECK(conserved.h[i] == doctest::Approx(std::tanh(state.c[i])).epsilon(1e-9));
    }
}

TEST_CASE("convlstm_step scalar case matches hand arithmetic") {
    // 1x1 spatial grid, one embed channel, one hidden channel, 1x1 kernels:
    // the step collapses to the scalar LSTM recurrence.
    ConvLstmWeights weights = make_lstm_weights(1, 1, 1);
    const double wi_x = 0.3, wi_h = -0.2, bi = 0.1;
    const double wf_x = -0.5, wf_h = 0.4, bf = 0.2;
    const double wg_x = 0.8, wg_h = 0.1, bg = -0.3;
    const double wo_x = 0.6, wo_h = -0.7, bo = 0.05;
    weights.w_i.value[0] = wi_x;
    weights.w_i.value[1] = wi_h;
    weights.b_i.value[0] = bi;
    weights.w_f.value[0] = wf_x;
    weights.w_f.value[1] = wf_h;
    weights.b_f.value[0] = bf;
    weights.w_g.value[0] = wg_x;
    weights.w_g.value[1] = wg_h;
    weights.b_g.value[0] = bg;
    weights.w_o.value[0] = wo_x;
    weights.w_o.value[1] = wo_h;
    weights.b_o.value[0] = bo;

    const double x = 0.9, h0 = -0.4, c0 = 0.25;
    ConvLstmState state{Tensor({1, 1, 1}), Tensor({1, 1, 1})};
    state.h[0] = h0;
    state.c[0] = c0;
    Tensor xt({1, 1, 1});
    xt[0] = x;

    auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
    const double i = sig(wi_x * x + wi_h * h0 + bi);
    const double f = sig(wf_x * x + wf_h * h0 + bf);
    const double g = std::tanh(wg_x * x + wg_h * h0 + bg);
    const double o = sig(wo_x * x + wo_h * h0 + bo);
    const double c1 = f * c0 + i * g;
    const double h1 = o * std::tanh(c1);

    ConvLstmState next = convlstm_step(xt, state, weights);
    CHECK(next.c[0] == doctest::Approx(c1).epsilon(1e-15));
    CHECK(next.h[0] == doctest::Approx(h1).epsilon(1e-15));
}

TEST_CASE("convlstm_step_vjp matches finite differences") {
    const int embed = 2, hidden = 2, k = 3, h = 4, w = 4;
    Rng rng(77);
    ConvLstmWeights weights = make_lstm_weights(embed, hidden, k);
    Parameter* params[] = {&weights.w_i, &weights.b_i, &weights.w_f, &weights.b_f,
                           &weights.w_g, &weights.b_g, &weights.w_o, &weights.b_o};
    for (Parameter* p : params) {
        for (std::size_t i = 0; i < p->value.numel(); ++i) p->value[i] = rng.uniform(-0.4, 0.4);
    }
    const Tensor x = random_tensor({embed, h, w}, rng);
    const ConvLstmState state{random_tensor({hidden, h, w}, rng, 0.5), random_tensor({hidden, h, w}, rng, 0.5)};
    const Tensor coeffs = sign_coeffs({hidden, h, w}, rng);

    auto loss = [&] {
        ConvLstmState next = convlstm_step(x, state, weights);
        return dot(next.h, coeffs);
    };
    auto grad = [&] {
        ConvLstmStepCache cache;
        convlstm_step(x, state, weights, &cache);
        Tensor zero_dc({hidden, h, w});
        convlstm_step_vjp(coeffs, zero_dc, cache, weights);
    };
    const double err = finite_diff_check(loss, grad, params, 1e-5, 400);
    CHECK(err < 1e-6);
}

TEST_CASE("weighted cross entropy values") {
    Tensor logits({2, 1, 2});
    Tensor labels({1, 2});
    Tensor valid = Tensor::full({1, 2}, 1.0);
    labels[1] = 1.0;

    // Equal logits with unit weights: loss is log 2 regardless of labels.
    CeResult equal = weighted_softmax_ce(logits, labels, valid, 1.0, 1.0);
    CHECK(equal.loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));

    // One positive and one negative cell with identical logits: the positive
    // carries w2/(w1+w2) of the normalizer.
    CeResult heavy = weighted_softmax_ce(logits, labels, valid, 1.0, 1000.0);
    CHECK(heavy.loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    // grad wrt the positive cell's class-2 logit: w2*(p2-1)/Z with p2=0.5;
    // the negative cell pushes its class-2 logit up by only w1*p2/Z.
    CHECK(heavy.grad_logits[3] == doctest::Approx(1000.0 * (-0.5) / 1001.0).epsilon(1e-12));
    CHECK(heavy.grad_logits[2] == doctest::Approx(1.0 * 0.5 / 1001.0).epsilon(1e-12));

    Tensor none({1, 2});
    CHECK_THROWS_AS(weighted_softmax_ce(logits, labels, none, 1.0, 1.0), ValidationError);
}

TEST_CASE("weighted cross entropy gradient matches finite differences") {
    Rng rng(88);
    Parameter logits(random_tensor({2, 3, 3}, rng, 2.0));
    Tensor labels({3, 3});
    Tensor valid({3, 3});
    for (std::size_t i = 0; i < labels.numel(); ++i) {
        labels[i] = rng.uniform() < 0.4 ? 1.0 : 0.0;
        valid[i] = rng.uniform() < 0.8 ? 1.0 : 0.0;
    }
    valid[0] = 1.0;

    auto loss = [&] { return weighted_softmax_ce(logits.value, labels, valid, 1.0, 250.0).loss; };
    auto grad = [&] {
        CeResult r = weighted_softmax_ce(logits.value, labels, valid, 1.0, 250.0);
        for (std::size_t i = 0; i < r.grad_logits.numel(); ++i) logits.grad[i] += r.grad_logits[i];
    };
    Parameter* params[] = {&logits};
    const double err = finite_diff_check(loss, grad, params, 1e-5, 400);
    CHECK(err < 1e-6);

    // Softmax probabilities per cell sum to 1 and the loss is non-negative.
    CeResult r = weighted_softmax_ce(logits.value, labels, valid, 1.0, 250.0);
    CHECK(r.loss >= 0.0);
}

TEST_CASE("finite_diff_check on exactly known cases") {
    Rng rng(3);
    Parameter theta(Tensor({11}));
    for (std::size_t i = 0; i < theta.value.numel(); ++i) {
        theta.value[i] = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.5, 2.0);
    }

    // Central differences are exact on quadratics for any step, so a step
    // large enough to dodge cancellation leaves only machine-scale error.
    auto quad_loss = [&] {
        double s = 0.0;
        for (std::size_t i = 0; i < theta.value.numel(); ++i) s += theta.value[i] * theta.value[i];
        return s;
    };
    auto quad_grad = [&] {
        for (std::size_t i = 0; i < theta.value.numel(); ++i) theta.grad[i] += 2.0 * theta.value[i];
    };
    Parameter* params[] = {&theta};
    CHECK(finite_diff_check(quad_loss, quad_grad, params, 1e-3, 1000) < 1e-10);

    auto zero_loss = [] { return 0.0; };
    auto zero_grad = [] {};
    CHECK(finite_diff_check(zero_loss, zero_grad, params, 1e-5, 1000) == 0.0);

    int calls = 0;
    auto flaky = [&] { return static_cast<double>(calls++); };
    CHECK_THROWS_AS(finite_diff_check(flaky, zero_grad, params, 1e-5, 10), ValidationError);
}
