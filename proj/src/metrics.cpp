#include "wf/metrics.hpp"

#include <cmath>
#include <cstdlib>
#include <iostream>

namespace wf {

double defensive_efficiency(const std::vector<double>& accuracies, double zero_clamp) {
    if (accuracies.empty()) throw std::invalid_argument("no sweep points");
    double sum = 0.0;
    for (double a : accuracies) {
        if (a < 0.0 || a > 1.0) throw std::invalid_argument("accuracy outside [0,1]");
        if (a == 0.0) {
            if (zero_clamp <= 0.0) throw ZeroAccuracy{};
            std::cerr << "warning: zero accuracy clamped to " << zero_clamp << " for DE\n";
            a = zero_clamp;
        }
        sum += a;
    }
    return static_cast<double>(accuracies.size()) / sum;
}

double defensive_efficiency(const SweepResult& sweep, double zero_clamp) {
    std::vector<double> accs;
    accs.reserve(sweep.points.size());
    for (const auto& [pt, acc] : sweep.points) accs.push_back(acc);
    return defensive_efficiency(accs, zero_clamp);
}

double overhead(const Dataset& original, const std::vector<DefendedTrace>& defended,
                int header_bytes) {
    if (original.traces.size() != defended.size())
        throw MisalignedDatasets("original has " + std::to_string(original.traces.size()) +
                                 " traces, defended has " + std::to_string(defended.size()));
    long long orig_bytes = 0;
    for (const Trace& t : original.traces)
        for (int s : t.sizes) orig_bytes += std::abs(s);
    long long extra = 0;
    for (const DefendedTrace& d : defended) {
        for (const TaggedPacket& p : d.packets)
            if (p.from == Provenance::Inserted) extra += std::abs(p.signed_size);
        extra += static_cast<long long>(header_bytes) * d.split_count;
    }
    if (orig_bytes == 0) throw MisalignedDatasets("original dataset has zero bytes");
    return static_cast<double>(extra) / static_cast<double>(orig_bytes);
}

Confusion confusion_open(const std::vector<double>& scores, const std::vector<bool>& monitored,
                         double threshold) {
    if (scores.size() != monitored.size())
        throw MisalignedDatasets("score/label count mismatch");
    Confusion c;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        bool positive = scores[i] >= threshold;
        if (monitored[i])
            positive ? ++c.tp : ++c.fn;
        else
            positive ? ++c.fp : ++c.tn;
    }
    return c;
}

RocCurve roc(const std::vector<double>& scores, const std::vector<bool>& monitored,
             const std::vector<double>& thresholds) {
    RocCurve curve;
    for (double thr : thresholds) {
        Confusion c = confusion_open(scores, monitored, thr);
        double tpr = c.tpr(), fpr = c.fpr();
        if (std::isnan(tpr) || std::isnan(fpr)) continue;
        curve.points.push_back({thr, fpr, tpr});
    }
    // Guarantee the (0,0) and (1,1) endpoints.
    if (curve.points.empty() || curve.points.front().fpr != 0.0 ||
        curve.points.front().tpr != 0.0) {
        double above = 1.0;
        for (double s : scores) above = std::max(above, s);
        curve.points.insert(curve.points.begin(), {above + 1.0, 0.0, 0.0});
    }
    if (curve.points.back().fpr != 1.0 || curve.points.back().tpr != 1.0) {
        double lo = 0.0;
        for (double s : scores) lo = std::min(lo, s);
        curve.points.push_back({lo, 1.0, 1.0});
    }
    double auc = 0.0;
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
        const RocPoint& a = curve.points[i - 1];
        const RocPoint& b = curve.points[i];
        auc += (b.fpr - a.fpr) * (a.tpr + b.tpr) / 2.0;
    }
    curve.auc = auc;
    return curve;
}

std::vector<double> threshold_grid(double lo, double hi, int n) {
    std::vector<double> t;
    if (n < 2) throw std::invalid_argument("threshold grid needs >= 2 points");
    for (int i = 0; i < n; ++i)
        t.push_back(hi - (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
    return t;
}

}  // namespace wf
