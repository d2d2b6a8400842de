#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "wf/trace.hpp"

namespace wf {

struct BadConfig : std::runtime_error {
    explicit BadConfig(const std::string& m) : std::runtime_error(m) {}
};

// Synthetic world: each site has a fixed signature sequence; traces are
// jittered copies of the signature padded with alphabet-sampled filler.
struct WorldConfig {
    int num_sites = 20;
    int traces_per_site = 40;
    int n_min = 200;
    int n_max = 400;
    std::vector<std::pair<int, double>> alphabet;  // empty -> default_alphabet()
    int signature_len = 200;
    double drop_prob = 0.05;
    double resize_prob = 0.05;
    std::uint64_t seed = 1;
};

// Heavily skewed size distribution: >= 60% of the mass on six sizes
// (around the full-MTU and ACK peaks), a thin uniform tail elsewhere.
std::vector<std::pair<int, double>> default_alphabet();

Dataset gen_closed_world(const WorldConfig& cfg);

// Closed world plus num_unmonitored singleton traces from fresh signatures.
Dataset gen_open_world(const WorldConfig& cfg, int num_unmonitored);

}  // namespace wf
