#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

namespace quakecast {

/// Dense row-major array of doubles, up to 4 dimensions. The pipeline keeps
/// everything in 64-bit floats; gradient checking would be mush at 32 bits.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<int> shape);

    static Tensor zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }
    static Tensor full(std::vector<int> shape, double value);

    int ndim() const { return static_cast<int>(shape_.size()); }
    int dim(int i) const { return shape_[static_cast<std::size_t>(i)]; }
    const std::vector<int>& shape() const { return shape_; }
    std::size_t numel() const { return data_.size(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& storage() { return data_; }
    const std::vector<double>& storage() const { return data_; }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    // Indexing is by explicit rank; shapes are checked on construction only.
    double& at(int i0) { return data_[static_cast<std::size_t>(i0)]; }
    double& at(int i0, int i1) { return data_[static_cast<std::size_t>(i0) * strides_[0] + i1]; }
    double& at(int i0, int i1, int i2) {
        return data_[static_cast<std::size_t>(i0) * strides_[0] + static_cast<std::size_t>(i1) * strides_[1] + i2];
    }
    double& at(int i0, int i1, int i2, int i3) {
        return data_[static_cast<std::size_t>(i0) * strides_[0] + static_cast<std::size_t>(i1) * strides_[1] +
                     static_cast<std::size_t>(i2) * strides_[2] + i3];
    }
    double at(int i0) const { return data_[static_cast<std::size_t>(i0)]; }
    double at(int i0, int i1) const { return data_[static_cast<std::size_t>(i0) * strides_[0] + i1]; }
    double at(int i0, int i1, int i2) const {
        return data_[static_cast<std::size_t>(i0) * strides_[0] + static_cast<std::size_t>(i1) * strides_[1] + i2];
    }
    double at(int i0, int i1, int i2, int i3) const {
        return data_[static_cast<std::size_t>(i0) * strides_[0] + static_cast<std::size_t>(i1) * strides_[1] +
                     static_cast<std::size_t>(i2) * strides_[2] + i3];
    }

    void fill(double v);
    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
    bool all_finite() const;

    std::string shape_str() const;

private:
    std::vector<int> shape_;
    std::vector<std::size_t> strides_;
    std::vector<double> data_;
};

/// Value plus accumulated gradient of the same shape.
struct Parameter {
    Tensor value;
    Tensor grad;

    Parameter() = default;
    explicit Parameter(Tensor v) : value(std::move(v)), grad(Tensor::zeros(value.shape())) {}

    void zero_grad() { grad.fill(0.0); }
};

}  // namespace quakecast
