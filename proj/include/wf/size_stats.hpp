#pragma once

#include <map>
#include <string>
#include <vector>

#include "wf/rng.hpp"
#include "wf/trace.hpp"

namespace wf {

struct EmptyDataset : std::runtime_error {
    EmptyDataset() : std::runtime_error("dataset is empty") {}
};
struct XOutOfRange : std::runtime_error {
    explicit XOutOfRange(const std::string& m) : std::runtime_error(m) {}
};

// Empirical distribution of signed packet sizes over a corpus.
struct SizeHistogram {
    struct Entry {
        long long count = 0;
        double prob = 0.0;
    };
    std::map<int, Entry> entries;  // keyed by signed size
    long long total = 0;

    std::size_t distinct() const { return entries.size(); }
};

// Top-X sizes by probability, with weights renormalized to sum 1 over the
// list so it doubles as a sampling distribution.
struct FilterList {
    std::vector<int> sizes;      // descending source probability, ties ascending size
    std::vector<double> probs;   // renormalized, same order
    std::vector<double> cum;     // running sums of probs, cum.back() == 1

    bool contains(int signed_size) const {
        for (int s : sizes)
            if (s == signed_size) return true;
        return false;
    }

    // Weighted draw from the list.
    int sample(SeededRng& rng) const {
        double u = rng.randr();
        for (std::size_t i = 0; i < cum.size(); ++i)
            if (u < cum[i]) return sizes[i];
        return sizes.back();
    }
};

SizeHistogram build_histogram(const Dataset& ds);
FilterList top_x(const SizeHistogram& h, int x);

void write_histogram_csv(const SizeHistogram& h, const std::string& path);
void write_filter_csv(const FilterList& fl, const std::string& path);

}  // namespace wf
