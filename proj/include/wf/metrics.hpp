#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "wf/trace.hpp"

namespace wf {

struct ZeroAccuracy : std::runtime_error {
    ZeroAccuracy() : std::runtime_error("all sweep accuracies are zero") {}
};
struct MisalignedDatasets : std::runtime_error {
    explicit MisalignedDatasets(const std::string& m) : std::runtime_error(m) {}
};

// Accuracy-vs-P_t curve for one (defense, attack) cell.
struct SweepResult {
    std::vector<std::pair<double, double>> points;  // (p_t, accuracy), p_t strictly increasing
    std::string tag;
};

// DE = N / sum(accuracy) over the N sweep points; higher = stronger defense.
// Zero accuracies are clamped to zero_clamp (e.g. 1/test_size) when it is
// positive; otherwise a zero point throws.
double defensive_efficiency(const std::vector<double>& accuracies, double zero_clamp = 0.0);
double defensive_efficiency(const SweepResult& sweep, double zero_clamp = 0.0);

// Extra bytes (full magnitude of Inserted packets, header_bytes per split)
// over original bytes.
double overhead(const Dataset& original, const std::vector<DefendedTrace>& defended,
                int header_bytes = 40);

struct Confusion {
    long long tp = 0, tn = 0, fp = 0, fn = 0;
    double tpr() const { return tp + fn == 0 ? std::nan("") : double(tp) / double(tp + fn); }
    double fpr() const { return fp + tn == 0 ? std::nan("") : double(fp) / double(fp + tn); }
};

// Positive prediction iff score >= threshold; positive truth = monitored.
Confusion confusion_open(const std::vector<double>& scores, const std::vector<bool>& monitored,
                         double threshold);

struct RocPoint {
    double threshold = 0.0, fpr = 0.0, tpr = 0.0;
};

struct RocCurve {
    std::vector<RocPoint> points;
    double auc = 0.0;
};

// One point per threshold (given descending), endpoints (0,0) and (1,1)
// ensured; AUC by the trapezoid rule. Degenerate thresholds yielding NaN
// rates are skipped.
RocCurve roc(const std::vector<double>& scores, const std::vector<bool>& monitored,
             const std::vector<double>& thresholds);

// Evenly spaced thresholds across [lo, hi], descending, n points.
std::vector<double> threshold_grid(double lo, double hi, int n);

}  // namespace wf
