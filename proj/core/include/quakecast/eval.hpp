#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace quakecast {

struct ScoredSample {
    double score = 0.0;
    int label = 0;  // 0 or 1
};

/// Mann-Whitney statistic P(score+ > score-) + 0.5 P(tie). Tie blocks are
/// counted with integer arithmetic, so the result equals the O(n^2)
/// pairwise count exactly, not just approximately.
double roc_auc(std::span<const ScoredSample> samples);

/// Average precision with tied scores processed as one block.
double pr_auc(std::span<const ScoredSample> samples);

struct Confusion {
    long long tp = 0;
    long long fn = 0;
    long long fp = 0;
    long long tn = 0;
};

/// Alarm iff score > t (strict).
Confusion confusion_at(std::span<const ScoredSample> samples, double threshold);

struct SweepRow {
    double threshold = 0.0;
    Confusion counts;
};

struct MetricsReport {
    double roc = 0.0;
    double pr = 0.0;
    long long positives = 0;
    long long negatives = 0;
    std::vector<SweepRow> rows;
};

/// Thresholds must be sorted ascending.
std::vector<SweepRow> threshold_sweep(std::span<const ScoredSample> samples, std::span<const double> thresholds);

MetricsReport evaluate_samples(std::span<const ScoredSample> samples, std::span<const double> thresholds);

void write_metrics_csv(std::ostream& out, const std::vector<std::pair<std::string, MetricsReport>>& reports);
void write_sweep_csv(std::ostream& out, const std::vector<std::pair<std::string, MetricsReport>>& reports);

}  // namespace quakecast
