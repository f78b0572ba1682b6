#include "quakecast/prior.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "quakecast/errors.hpp"
#include "quakecast/raster_io.hpp"
#include "quakecast/text.hpp"

namespace quakecast {

PriorMap fit_prior(const LabelTensor& labels, double alpha) {
    if (!(alpha > 0.0)) throw ValidationError("prior smoothing alpha must be > 0");
    PriorMap prior;
    prior.n_rows = labels.n_rows;
    prior.n_cols = labels.n_cols;
    prior.alpha = alpha;
    const std::size_t cells = static_cast<std::size_t>(labels.n_rows) * labels.n_cols;
    prior.k.assign(cells, 0);
    prior.n.assign(cells, 0);
    prior.p.assign(cells, 0.0);

    bool any_valid = false;
    for (std::size_t di = 0; di < labels.reference_days.size(); ++di) {
        for (std::size_t cell = 0; cell < cells; ++cell) {
            const std::size_t idx = di * cells + cell;
            if (!labels.valid[idx]) continue;
            any_valid = true;
            prior.n[cell] += 1;
            prior.k[cell] += labels.y[idx];
        }
    }
    if (!any_valid) throw ValidationError("fit_prior needs at least one valid training day");

    for (std::size_t cell = 0; cell < cells; ++cell) {
        prior.p[cell] = (static_cast<double>(prior.k[cell]) + alpha) /
                        (static_cast<double>(prior.n[cell]) + 2.0 * alpha);
    }
    return prior;
}

PriorLogits prior_logits(const PriorMap& prior, double c, PriorMode mode) {
    PriorLogits logits;
    logits.n_rows = prior.n_rows;
    logits.n_cols = prior.n_cols;
    logits.o1.resize(prior.cells());
    logits.o2.resize(prior.cells());
    for (std::size_t i = 0; i < prior.cells(); ++i) {
        const double log_p1 = std::log(1.0 - prior.p[i]);
        const double log_p2 = std::log(prior.p[i]);
        if (mode == PriorMode::additive) {
            logits.o1[i] = log_p1 + c;
            logits.o2[i] = log_p2 + c;
        } else {
            logits.o1[i] = c * log_p1;
            logits.o2[i] = c * log_p2;
        }
    }
    return logits;
}

Tensor combine_residual(const PriorLogits& logits, const Tensor& delta_o) {
    if (delta_o.ndim() != 3 || delta_o.dim(0) != 2 || delta_o.dim(1) != logits.n_rows ||
        delta_o.dim(2) != logits.n_cols) {
        throw ValidationError("residual delta_o must have shape 2x" + std::to_string(logits.n_rows) + "x" +
                              std::to_string(logits.n_cols));
    }
    if (!delta_o.all_finite()) throw ValidationError("residual delta_o must be finite");

    Tensor y2({logits.n_rows, logits.n_cols});
    const std::size_t cells = logits.o1.size();
    for (std::size_t i = 0; i < cells; ++i) {
        const double a = logits.o1[i] + delta_o[i];
        const double b = logits.o2[i] + delta_o[cells + i];
        const double m = std::max(a, b);
        const double ea = std::exp(a - m);
        const double eb = std::exp(b - m);
        y2[i] = eb / (ea + eb);
    }
    return y2;
}

Tensor alarm(const Tensor& y2, double threshold) {
    if (!(threshold >= 0.0) || !(threshold <= 1.0)) throw ValidationError("alarm threshold must lie in [0, 1]");
    Tensor out(y2.shape());
    for (std::size_t i = 0; i < y2.numel(); ++i) out[i] = y2[i] > threshold ? 1.0 : 0.0;
    return out;
}

void write_prior(std::ostream& raster_out, std::ostream& sidecar_out, const PriorMap& prior) {
    HeatMapSeq seq;
    seq.start_day = 0;
    seq.days = 1;
    seq.n_rows = prior.n_rows;
    seq.n_cols = prior.n_cols;
    seq.values = prior.p;
    write_heatmaps(raster_out, seq);

    sidecar_out << "alpha=" << format_double(prior.alpha) << '\n';
    sidecar_out << "row,col,k,n\n";
    for (int r = 0; r < prior.n_rows; ++r) {
        for (int c = 0; c < prior.n_cols; ++c) {
            const std::size_t i = static_cast<std::size_t>(r) * prior.n_cols + c;
            sidecar_out << r << ',' << c << ',' << prior.k[i] << ',' << prior.n[i] << '\n';
        }
    }
}

}  // namespace quakecast
