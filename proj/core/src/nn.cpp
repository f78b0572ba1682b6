#include "quakecast/nn.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "quakecast/errors.hpp"
#include "quakecast/rng.hpp"
#include "quakecast/threading.hpp"

namespace quakecast {

namespace {

void check_conv_shapes(const Tensor& input, const Tensor& kernel, const Tensor* bias) {
    if (input.ndim() != 3) throw ValidationError("conv2d input must be (C_in,H,W), got " + input.shape_str());
    if (kernel.ndim() != 4) throw ValidationError("conv2d kernel must be (C_out,C_in,k,k), got " + kernel.shape_str());
    if (kernel.dim(1) != input.dim(0)) {
        throw ValidationError("conv2d channel mismatch: input " + input.shape_str() + " vs kernel " +
                              kernel.shape_str());
    }
    if (kernel.dim(2) != kernel.dim(3) || kernel.dim(2) % 2 == 0) {
        throw ValidationError("conv2d kernel must be square with odd size");
    }
    if (bias && (bias->ndim() != 1 || bias->dim(0) != kernel.dim(0))) {
        throw ValidationError("conv2d bias must be (C_out)");
    }
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias) {
    check_conv_shapes(input, kernel, &bias);
    const int c_in = input.dim(0), height = input.dim(1), width = input.dim(2);
    const int c_out = kernel.dim(0), k = kernel.dim(2), half = k / 2;

    Tensor out({c_out, height, width});
    // One worker owns one output row: writes never overlap and the inner
    // summation order is fixed, so results are thread-count independent.
    parallel_for(c_out * height, [&](int job) {
        const int co = job / height;
        const int y = job % height;
        double* out_row = out.data() + (static_cast<std::size_t>(co) * height + y) * width;
        for (int x = 0; x < width; ++x) out_row[x] = bias[static_cast<std::size_t>(co)];
        for (int ci = 0; ci < c_in; ++ci) {
            const double* in_plane = input.data() + static_cast<std::size_t>(ci) * height * width;
            const double* k_plane =
                kernel.data() + (static_cast<std::size_t>(co) * c_in + ci) * static_cast<std::size_t>(k) * k;
            for (int ky = 0; ky < k; ++ky) {
                const int iy = y + ky - half;
                if (iy < 0 || iy >= height) continue;
                const double* in_row = in_plane + static_cast<std::size_t>(iy) * width;
                const double* k_row = k_plane + static_cast<std::size_t>(ky) * k;
                for (int kx = 0; kx < k; ++kx) {
                    const double w = k_row[kx];
                    const int shift = kx - half;
                    const int x_lo = std::max(0, -shift);
                    const int x_hi = std::min(width, width - shift);
                    for (int x = x_lo; x < x_hi; ++x) out_row[x] += in_row[x + shift] * w;
                }
            }
        }
    });
    if (!out.all_finite()) throw std::runtime_error("conv2d produced non-finite values");
    return out;
}

ConvGrads conv2d_vjp(const Tensor& input, const Tensor& kernel, const Tensor& upstream) {
    check_conv_shapes(input, kernel, nullptr);
    const int c_in = input.dim(0), height = input.dim(1), width = input.dim(2);
    const int c_out = kernel.dim(0), k = kernel.dim(2), half = k / 2;
    if (upstream.ndim() != 3 || upstream.dim(0) != c_out || upstream.dim(1) != height || upstream.dim(2) != width) {
        throw ValidationError("conv2d upstream gradient has shape " + upstream.shape_str() + ", expected (" +
                              std::to_string(c_out) + "," + std::to_string(height) + "," + std::to_string(width) + ")");
    }

    ConvGrads grads{Tensor({c_in, height, width}), Tensor({c_out, c_in, k, k}), Tensor({c_out})};

    // d/d input: correlation of upstream with the kernel transposed in
    // channels and flipped in space. Partitioned over input rows.
    parallel_for(c_in * height, [&](int job) {
        const int ci = job / height;
        const int iy = job % height;
        double* g_row = grads.input.data() + (static_cast<std::size_t>(ci) * height + iy) * width;
        for (int co = 0; co < c_out; ++co) {
            const double* up_plane = upstream.data() + static_cast<std::size_t>(co) * height * width;
            const double* k_plane =
                kernel.data() + (static_cast<std::size_t>(co) * c_in + ci) * static_cast<std::size_t>(k) * k;
            for (int ky = 0; ky < k; ++ky) {
                const int y = iy - (ky - half);
                if (y < 0 || y >= height) continue;
                const double* up_row = up_plane + static_cast<std::size_t>(y) * width;
                const double* k_row = k_plane + static_cast<std::size_t>(ky) * k;
                for (int kx = 0; kx < k; ++kx) {
                    const double w = k_row[kx];
                    const int shift = kx - half;  // ix = x + shift
                    const int ix_lo = std::max(0, shift);
                    const int ix_hi = std::min(width, width + shift);
                    for (int ix = ix_lo; ix < ix_hi; ++ix) g_row[ix] += up_row[ix - shift] * w;
                }
            }
        }
    });

    // d/d kernel and d/d bias, partitioned over output channels.
    parallel_for(c_out, [&](int co) {
        const double* up_plane = upstream.data() + static_cast<std::size_t>(co) * height * width;
        double bias_sum = 0.0;
        for (std::size_t i = 0; i < static_cast<std::size_t>(height) * width; ++i) bias_sum += up_plane[i];
        grads.bias[static_cast<std::size_t>(co)] = bias_sum;

        for (int ci = 0; ci < c_in; ++ci) {
            const double* in_plane = input.data() + static_cast<std::size_t>(ci) * height * width;
            for (int ky = 0; ky < k; ++ky) {
                for (int kx = 0; kx < k; ++kx) {
                    const int shift_y = ky - half, shift_x = kx - half;
                    double acc = 0.0;
                    const int y_lo = std::max(0, -shift_y);
                    const int y_hi = std::min(height, height - shift_y);
                    const int x_lo = std::max(0, -shift_x);
                    const int x_hi = std::min(width, width - shift_x);
                    for (int y = y_lo; y < y_hi; ++y) {
                        const double* up_row = up_plane + static_cast<std::size_t>(y) * width;
                        const double* in_row = in_plane + static_cast<std::size_t>(y + shift_y) * width + shift_x;
                        for (int x = x_lo; x < x_hi; ++x) acc += up_row[x] * in_row[x];
                    }
                    grads.kernel.at(co, ci, ky, kx) = acc;
                }
            }
        }
    });
    return grads;
}

Tensor sigmoid(const Tensor& t) {
    Tensor out(t.shape());
    for (std::size_t i = 0; i < t.numel(); ++i) out[i] = 1.0 / (1.0 + std::exp(-t[i]));
    return out;
}

Tensor tanh_map(const Tensor& t) {
    Tensor out(t.shape());
    for (std::size_t i = 0; i < t.numel(); ++i) out[i] = std::tanh(t[i]);
    return out;
}

namespace {

Tensor concat_channels(const Tensor& a, const Tensor& b) {
    Tensor z({a.dim(0) + b.dim(0), a.dim(1), a.dim(2)});
    std::copy(a.data(), a.data() + a.numel(), z.data());
    std::copy(b.data(), b.data() + b.numel(), z.data() + a.numel());
    return z;
}

}  // namespace

ConvLstmState convlstm_step(const Tensor& x_embed, const ConvLstmState& state, const ConvLstmWeights& weights,
                            ConvLstmStepCache* cache) {
    if (!state.h.same_shape(state.c)) throw ValidationError("convlstm state h and c must share a shape");
    const Tensor z = concat_channels(x_embed, state.h);

    const Tensor i = sigmoid(conv2d(z, weights.w_i.value, weights.b_i.value));
    const Tensor f = sigmoid(conv2d(z, weights.w_f.value, weights.b_f.value));
    const Tensor g = tanh_map(conv2d(z, weights.w_g.value, weights.b_g.value));
    const Tensor o = sigmoid(conv2d(z, weights.w_o.value, weights.b_o.value));

    ConvLstmState next{Tensor(state.h.shape()), Tensor(state.c.shape())};
    Tensor tanh_c(state.c.shape());
    for (std::size_t n = 0; n < next.c.numel(); ++n) {
        next.c[n] = f[n] * state.c[n] + i[n] * g[n];
        tanh_c[n] = std::tanh(next.c[n]);
        next.h[n] = o[n] * tanh_c[n];
    }
    if (cache) {
        cache->z = z;
        cache->i = i;
        cache->f = f;
        cache->g = g;
        cache->o = o;
        cache->c_prev = state.c;
        cache->c_new = next.c;
        cache->tanh_c_new = tanh_c;
    }
    return next;
}

ConvLstmStepGrads convlstm_step_vjp(const Tensor& grad_h_new, const Tensor& grad_c_new,
                                    const ConvLstmStepCache& cache, ConvLstmWeights& weights) {
    if (cache.z.numel() == 0) throw ValidationError("convlstm_step_vjp called without a forward cache");
    const std::size_t n = grad_h_new.numel();

    Tensor d_pre_i(cache.i.shape()), d_pre_f(cache.f.shape()), d_pre_g(cache.g.shape()), d_pre_o(cache.o.shape());
    Tensor d_c_prev(cache.c_prev.shape());
    for (std::size_t idx = 0; idx < n; ++idx) {
        const double dh = grad_h_new[idx];
        const double tc = cache.tanh_c_new[idx];
        const double d_o = dh * tc;
        const double dc = grad_c_new[idx] + dh * cache.o[idx] * (1.0 - tc * tc);
        const double d_f = dc * cache.c_prev[idx];
        const double d_i = dc * cache.g[idx];
        const double d_g = dc * cache.i[idx];
        d_c_prev[idx] = dc * cache.f[idx];
        d_pre_i[idx] = d_i * cache.i[idx] * (1.0 - cache.i[idx]);
        d_pre_f[idx] = d_f * cache.f[idx] * (1.0 - cache.f[idx]);
        d_pre_o[idx] = d_o * cache.o[idx] * (1.0 - cache.o[idx]);
        d_pre_g[idx] = d_g * (1.0 - cache.g[idx] * cache.g[idx]);
    }

    Tensor dz(cache.z.shape());
    auto add_gate = [&](const Tensor& d_pre, Parameter& w, Parameter& b) {
        ConvGrads grads = conv2d_vjp(cache.z, w.value, d_pre);
        for (std::size_t idx = 0; idx < dz.numel(); ++idx) dz[idx] += grads.input[idx];
        for (std::size_t idx = 0; idx < w.grad.numel(); ++idx) w.grad[idx] += grads.kernel[idx];
        for (std::size_t idx = 0; idx < b.grad.numel(); ++idx) b.grad[idx] += grads.bias[idx];
    };
    add_gate(d_pre_i, weights.w_i, weights.b_i);
    add_gate(d_pre_f, weights.w_f, weights.b_f);
    add_gate(d_pre_g, weights.w_g, weights.b_g);
    add_gate(d_pre_o, weights.w_o, weights.b_o);

    const int hidden_channels = grad_h_new.dim(0);
    const int embed_channels = cache.z.dim(0) - hidden_channels;
    const int height = cache.z.dim(1), width = cache.z.dim(2);
    ConvLstmStepGrads grads{Tensor({embed_channels, height, width}), Tensor({hidden_channels, height, width}),
                            std::move(d_c_prev)};
    const std::size_t embed_n = grads.x_embed.numel();
    std::copy(dz.data(), dz.data() + embed_n, grads.x_embed.data());
    std::copy(dz.data() + embed_n, dz.data() + dz.numel(), grads.h_prev.data());
    return grads;
}

CeResult weighted_softmax_ce(const Tensor& logits, const Tensor& labels, const Tensor& valid, double w1, double w2) {
    if (logits.ndim() != 3 || logits.dim(0) != 2) throw ValidationError("loss logits must be (2,H,W)");
    const int height = logits.dim(1), width = logits.dim(2);
    if (labels.ndim() != 2 || labels.dim(0) != height || labels.dim(1) != width || !valid.same_shape(labels)) {
        throw ValidationError("loss labels/valid must be (H,W) matching logits");
    }
    if (!(w1 > 0.0) || !(w2 > 0.0)) throw ValidationError("class weights must be > 0");

    const std::size_t cells = static_cast<std::size_t>(height) * width;
    double weight_total = 0.0;
    for (std::size_t i = 0; i < cells; ++i) {
        if (valid[i] == 0.0) continue;
        weight_total += labels[i] != 0.0 ? w2 : w1;
    }
    if (weight_total == 0.0) throw ValidationError("loss mask has no valid cells");

    CeResult result;
    result.grad_logits = Tensor(logits.shape());
    double loss_sum = 0.0;
    for (std::size_t i = 0; i < cells; ++i) {
        if (valid[i] == 0.0) continue;
        const double l1 = logits[i];
        const double l2 = logits[cells + i];
        const double m = std::max(l1, l2);
        const double e1 = std::exp(l1 - m);
        const double e2 = std::exp(l2 - m);
        const double log_z = m + std::log(e1 + e2);
        const bool quake = labels[i] != 0.0;
        const double w = quake ? w2 : w1;
        loss_sum += w * (log_z - (quake ? l2 : l1));
        const double p1 = e1 / (e1 + e2);
        const double p2 = e2 / (e1 + e2);
        result.grad_logits[i] = w * (p1 - (quake ? 0.0 : 1.0)) / weight_total;
        result.grad_logits[cells + i] = w * (p2 - (quake ? 1.0 : 0.0)) / weight_total;
    }
    result.loss = loss_sum / weight_total;
    if (!std::isfinite(result.loss)) throw std::runtime_error("loss is non-finite");
    return result;
}

double finite_diff_check(const std::function<double()>& loss, const std::function<void()>& grad,
                         std::span<Parameter* const> params, double h, int max_coords, std::uint64_t seed) {
    if (!(h > 0.0)) throw ValidationError("finite difference step must be > 0");

    const double base = loss();
    if (loss() != base) throw ValidationError("loss closure is not deterministic");

    for (Parameter* p : params) p->zero_grad();
    grad();

    std::size_t total = 0;
    for (const Parameter* p : params) total += p->value.numel();

    // Sample without replacement when subsampling, else take every coordinate.
    std::vector<std::size_t> coords;
    if (total <= static_cast<std::size_t>(max_coords)) {
        coords.resize(total);
        for (std::size_t i = 0; i < total; ++i) coords[i] = i;
    } else {
        Rng rng(seed);
        std::vector<std::size_t> all(total);
        for (std::size_t i = 0; i < total; ++i) all[i] = i;
        for (int i = 0; i < max_coords; ++i) {
            const std::size_t j = i + rng.uniform_index(total - static_cast<std::size_t>(i));
            std::swap(all[static_cast<std::size_t>(i)], all[j]);
        }
        coords.assign(all.begin(), all.begin() + max_coords);
    }

    auto locate = [&](std::size_t flat) -> double* {
        for (Parameter* p : params) {
            if (flat < p->value.numel()) return p->value.data() + flat;
            flat -= p->value.numel();
        }
        throw std::logic_error("finite_diff_check coordinate out of range");
    };
    auto analytic_at = [&](std::size_t flat) -> double {
        for (Parameter* p : params) {
            if (flat < p->grad.numel()) return p->grad[flat];
            flat -= p->grad.numel();
        }
        throw std::logic_error("finite_diff_check coordinate out of range");
    };

    double max_rel = 0.0;
    for (std::size_t flat : coords) {
        double* slot = locate(flat);
        const double saved = *slot;
        *slot = saved + h;
        const double up = loss();
        *slot = saved - h;
        const double down = loss();
        *slot = saved;
        const double numeric = (up - down) / (2.0 * h);
        const double analytic = analytic_at(flat);
        const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
        max_rel = std::max(max_rel, std::abs(analytic - numeric) / denom);
    }
    return max_rel;
}

}  // namespace quakecast
