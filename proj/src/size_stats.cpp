#include "wf/size_stats.hpp"

#include <algorithm>
#include <fstream>

namespace wf {

SizeHistogram build_histogram(const Dataset& ds) {
    if (ds.empty()) throw EmptyDataset{};
    SizeHistogram h;
    for (const Trace& t : ds.traces)
        for (int s : t.sizes) {
            ++h.entries[s].count;
            ++h.total;
        }
    for (auto& [size, e] : h.entries)
        e.prob = static_cast<double>(e.count) / static_cast<double>(h.total);
    return h;
}

FilterList top_x(const SizeHistogram& h, int x) {
    if (x < 1 || static_cast<std::size_t>(x) > h.distinct())
        throw XOutOfRange("X=" + std::to_string(x) + " not in [1, " +
                          std::to_string(h.distinct()) + "]");

    std::vector<std::pair<int, double>> order;  // (size, prob)
    order.reserve(h.entries.size());
    for (const auto& [size, e] : h.entries) order.emplace_back(size, e.prob);
    std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;  // tie: ascending signed size
    });

    FilterList fl;
    double mass = 0.0;
    for (int i = 0; i < x; ++i) {
        fl.sizes.push_back(order[i].first);
        fl.probs.push_back(order[i].second);
        mass += order[i].second;
    }
    double run = 0.0;
    for (double& p : fl.probs) {
        p /= mass;
        run += p;
        fl.cum.push_back(run);
    }
    fl.cum.back() = 1.0;
    return fl;
}

void write_histogram_csv(const SizeHistogram& h, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "# wf-histogram v1\nsize,count,probability\n";
    for (const auto& [size, e] : h.entries)
        out << size << ',' << e.count << ',' << e.prob << '\n';
}

void write_filter_csv(const FilterList& fl, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "# wf-filter v1\nsize,probability\n";
    for (std::size_t i = 0; i < fl.sizes.size(); ++i)
        out << fl.sizes[i] << ',' << fl.probs[i] << '\n';
}

}  // namespace wf
