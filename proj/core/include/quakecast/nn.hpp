#pragma once

#include <cstdint>
#include <functional>
#include <span>

#include "quakecast/tensor.hpp"

namespace quakecast {

// Fixed-architecture building blocks with hand-written backward passes.
// Every vjp here is checked against central finite differences in the test
// suite; that check is the correctness contract for the whole module.

/// Same-padded cross-correlation. input (C_in,H,W), kernel (C_out,C_in,k,k)
/// with k odd, bias (C_out) -> (C_out,H,W).
Tensor conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias);

struct ConvGrads {
    Tensor input;
    Tensor kernel;
    Tensor bias;
};

/// Exact gradients of conv2d; grad_bias is the per-channel sum of upstream.
ConvGrads conv2d_vjp(const Tensor& input, const Tensor& kernel, const Tensor& upstream);

Tensor sigmoid(const Tensor& t);
Tensor tanh_map(const Tensor& t);

/// Gate convolutions act on [x; h] concatenated along channels.
struct ConvLstmWeights {
    Parameter w_i, b_i;
    Parameter w_f, b_f;
    Parameter w_g, b_g;
    Parameter w_o, b_o;
};

struct ConvLstmState {
    Tensor h;
    Tensor c;
};

struct ConvLstmStepCache {
    Tensor z;  // concat(x, h_prev)
    Tensor i, f, g, o;
    Tensor c_prev;
    Tensor c_new;
    Tensor tanh_c_new;
};

/// i = s(conv(z;W_i)), f = s(conv(z;W_f)), g = tanh(conv(z;W_g)),
/// o = s(conv(z;W_o)); c' = f.c + i.g; h' = o.tanh(c').
ConvLstmState convlstm_step(const Tensor& x_embed, const ConvLstmState& state, const ConvLstmWeights& weights,
                            ConvLstmStepCache* cache = nullptr);

struct ConvLstmStepGrads {
    Tensor x_embed;
    Tensor h_prev;
    Tensor c_prev;
};

/// Backward through one step; accumulates gate parameter gradients.
ConvLstmStepGrads convlstm_step_vjp(const Tensor& grad_h_new, const Tensor& grad_c_new,
                                    const ConvLstmStepCache& cache, ConvLstmWeights& weights);

struct CeResult {
    double loss = 0.0;
    Tensor grad_logits;
};

/// Weighted cross entropy over valid cells, normalized by total sample
/// weight: sum_valid w_y (-log softmax(logits)_y) / sum_valid w_y.
/// logits (2,H,W); labels and valid (H,W) 0/1 maps; w1 weights label 0,
/// w2 weights label 1.
CeResult weighted_softmax_ce(const Tensor& logits, const Tensor& labels, const Tensor& valid, double w1, double w2);

/// Central-difference audit of the analytic gradients. `loss` must be a
/// deterministic closure of the parameter values; `grad` must populate
/// Parameter::grad for the same loss. Samples up to `max_coords`
/// coordinates (all, if fewer) and returns the max relative error with
/// denominator max(|analytic|, |numeric|, 1e-8).
double finite_diff_check(const std::function<double()>& loss, const std::function<void()>& grad,
                         std::span<Parameter* const> params, double h, int max_coords = 200,
                         std::uint64_t seed = 12345);

}  // namespace quakecast
