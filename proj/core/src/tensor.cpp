#include "quakecast/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "quakecast/errors.hpp"

namespace quakecast {

Tensor::Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
    if (shape_.empty() || shape_.size() > 4) {
        throw ValidationError("tensor rank must be 1..4");
    }
    std::size_t n = 1;
    for (int d : shape_) {
        if (d <= 0) throw ValidationError("tensor dimensions must be positive");
        n *= static_cast<std::size_t>(d);
    }
    strides_.assign(shape_.size(), 1);
    for (int i = static_cast<int>(shape_.size()) - 2; i >= 0; --i) {
        strides_[static_cast<std::size_t>(i)] =
            strides_[static_cast<std::size_t>(i) + 1] * static_cast<std::size_t>(shape_[static_cast<std::size_t>(i) + 1]);
    }
    data_.assign(n, 0.0);
}

Tensor Tensor::full(std::vector<int> shape, double value) {
    Tensor t(std::move(shape));
    t.fill(value);
    return t;
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

std::string Tensor::shape_str() const {
    std::string s = "(";
    for (std::size_t i = 0; i < shape_.size(); ++i) {
        if (i) s += "x";
        s += std::to_string(shape_[i]);
    }
    return s + ")";
}

}  // namespace quakecast
