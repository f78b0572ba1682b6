#pragma once

#include <iosfwd>
#include <vector>

#include "quakecast/catalog.hpp"
#include "quakecast/tensor.hpp"

namespace quakecast {

/// Per-cell historical occurrence probability with Laplace smoothing:
/// p = (k + alpha) / (n + 2 alpha). Smoothing keeps p inside (0, 1) so the
/// logit transform below is always defined.
struct PriorMap {
    int n_rows = 0;
    int n_cols = 0;
    std::vector<double> p;
    std::vector<int> k;  // label-1 valid days per cell
    std::vector<int> n;  // valid days per cell
    double alpha = 1.0;

    std::size_t cells() const { return p.size(); }
};

enum class PriorMode {
    additive,  // o_i = log p_i + c (the constant cancels in softmax)
    scaled,    // o_i = c * log p_i
};

/// Pre-softmax anchor logits, class 1 = quiet, class 2 = earthquake.
struct PriorLogits {
    int n_rows = 0;
    int n_cols = 0;
    std::vector<double> o1;
    std::vector<double> o2;
};

PriorMap fit_prior(const LabelTensor& labels, double alpha);

PriorLogits prior_logits(const PriorMap& prior, double c, PriorMode mode = PriorMode::additive);

/// Softmax over classes of (o + delta_o); returns the class-2 probability
/// map (shape rows x cols). Max-subtraction keeps |o + delta| <= 700 safe.
Tensor combine_residual(const PriorLogits& logits, const Tensor& delta_o);

/// 1 where y2 > threshold (strict), else 0.
Tensor alarm(const Tensor& y2, double threshold);

void write_prior(std::ostream& raster_out, std::ostream& sidecar_out, const PriorMap& prior);

}  // namespace quakecast
