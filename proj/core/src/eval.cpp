#include "quakecast/eval.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "quakecast/errors.hpp"
#include "quakecast/text.hpp"

namespace quakecast {

namespace {

void check_scores(std::span<const ScoredSample> samples) {
    for (const auto& s : samples) {
        if (!std::isfinite(s.score)) throw ValidationError("scores must be finite");
        if (s.label != 0 && s.label != 1) throw ValidationError("labels must be 0 or 1");
    }
}

std::vector<ScoredSample> sorted_desc(std::span<const ScoredSample> samples) {
    std::vector<ScoredSample> v(samples.begin(), samples.end());
    std::sort(v.begin(), v.end(), [](const ScoredSample& a, const ScoredSample& b) { return a.score > b.score; });
    return v;
}

}  // namespace

double roc_auc(std::span<const ScoredSample> samples) {
    check_scores(samples);
    long long pos = 0, neg = 0;
    for (const auto& s : samples) (s.label ? pos : neg)++;
    if (pos == 0 || neg == 0) throw ValidationError("roc_auc needs at least one positive and one negative");

    auto v = sorted_desc(samples);
    // Walk tie blocks from the top; below_neg counts negatives scored
    // strictly lower than the current block.
    long long gt_pairs = 0, tie_pairs = 0;
    long long seen_neg = 0;
    std::size_t i = 0;
    while (i < v.size()) {
        std::size_t j = i;
        long long bp = 0, bn = 0;
        while (j < v.size() && v[j].score == v[i].score) {
            (v[j].label ? bp : bn)++;
            ++j;
        }
        const long long below_neg = neg - seen_neg - bn;
        gt_pairs += bp * below_neg;
        tie_pairs += bp * bn;
        seen_neg += bn;
        i = j;
    }
    const double num = static_cast<double>(gt_pairs) + 0.5 * static_cast<double>(tie_pairs);
    return num / (static_cast<double>(pos) * static_cast<double>(neg));
}

double pr_auc(std::span<const ScoredSample> samples) {
    check_scores(samples);
    long long pos = 0;
    for (const auto& s : samples) pos += s.label;
    if (pos == 0) throw ValidationError("pr_auc needs at least one positive");

    auto v = sorted_desc(samples);
    long long tp = 0, fp = 0;
    double ap = 0.0;
    std::size_t i = 0;
    while (i < v.size()) {
        std::size_t j = i;
        long long bp = 0, bn = 0;
        while (j < v.size() && v[j].score == v[i].score) {
            (v[j].label ? bp : bn)++;
            ++j;
        }
        tp += bp;
        fp += bn;
        if (bp > 0) {
            ap += static_cast<double>(bp) / static_cast<double>(pos) *
                  (static_cast<double>(tp) / static_cast<double>(tp + fp));
        }
        i = j;
    }
    return ap;
}

Confusion confusion_at(std::span<const ScoredSample> samples, double threshold) {
    check_scores(samples);
    if (!(threshold >= 0.0) || !(threshold <= 1.0)) throw ValidationError("threshold must lie in [0, 1]");
    Confusion c;
    for (const auto& s : samples) {
        const bool alarm = s.score > threshold;
        if (s.label) {
            (alarm ? c.tp : c.fn)++;
        } else {
            (alarm ? c.fp : c.tn)++;
        }
    }
    return c;
}

std::vector<SweepRow> threshold_sweep(std::span<const ScoredSample> samples, std::span<const double> thresholds) {
    if (!std::is_sorted(thresholds.begin(), thresholds.end())) {
        throw ValidationError("sweep thresholds must be sorted ascending");
    }
    std::vector<SweepRow> rows;
    rows.reserve(thresholds.size());
    for (double t : thresholds) rows.push_back({t, confusion_at(samples, t)});
    return rows;
}

MetricsReport evaluate_samples(std::span<const ScoredSample> samples, std::span<const double> thresholds) {
    MetricsReport report;
    for (const auto& s : samples) (s.label ? report.positives : report.negatives)++;
    report.roc = roc_auc(samples);
    report.pr = pr_auc(samples);
    report.rows = threshold_sweep(samples, thresholds);
    return report;
}

void write_metrics_csv(std::ostream& out, const std::vector<std::pair<std::string, MetricsReport>>& reports) {
    out << "method,roc_auc,pr_auc,positives,negatives\n";
    for (const auto& [name, r] : reports) {
        out << name << ',' << format_double(r.roc) << ',' << format_double(r.pr) << ',' << r.positives << ','
            << r.negatives << '\n';
    }
}

void write_sweep_csv(std::ostream& out, const std::vector<std::pair<std::string, MetricsReport>>& reports) {
    out << "method,threshold,tp,fn,fp,tn\n";
    for (const auto& [name, r] : reports) {
        for (const auto& row : r.rows) {
            out << name << ',' << format_double(row.threshold) << ',' << row.counts.tp << ',' << row.counts.fn << ','
                << row.counts.fp << ',' << row.counts.tn << '\n';
        }
    }
}

}  // namespace quakecast
