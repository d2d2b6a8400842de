#pragma once

#include "wf/rng.hpp"
#include "wf/size_stats.hpp"
#include "wf/trace.hpp"

namespace wf {

struct BadRange : std::runtime_error {
    explicit BadRange(const std::string& m) : std::runtime_error(m) {}
};
struct EmptyFilterList : std::runtime_error {
    EmptyFilterList() : std::runtime_error("filter list is empty") {}
};

struct RpdConfig {
    double p_t = 0.5;   // per-packet insertion probability
    int s_min = 1;      // random packet magnitude range, inclusive
    int s_max = kMaxWireSize;
};

enum class LadMode { Insert, Split };

struct LadConfig {
    double p_t = 0.5;
    LadMode mode = LadMode::Insert;
    int s_min = 100;     // split-remainder floor (Split mode only)
    FilterList list;
};

// (-1)^RANDI(1,2) * RANDI(s_min, s_max): random direction, random size.
int random_packet(int s_min, int s_max, SeededRng& rng);

// Each original packet is emitted in order; with probability p_t a random
// packet follows it. Originals are never modified, dropped, or reordered.
DefendedTrace rpd(const Trace& t, const RpdConfig& cfg, SeededRng& rng);

// Same skeleton as rpd, but inserted sizes are drawn from the filter list
// under its probability weights, so they are indistinguishable from common
// traffic.
DefendedTrace lad_insert(const Trace& t, const LadConfig& cfg, SeededRng& rng);

// With probability p_t a packet is split into a list-drawn fragment and its
// remainder, same direction, provided the remainder stays >= s_min. Failed
// candidates pass the packet through unchanged; the signed sum of the trace
// is always preserved.
DefendedTrace lad_split(const Trace& t, const LadConfig& cfg, SeededRng& rng);

// Unified per-dataset application with per-trace derived seeds.
struct DefenseConfig {
    enum class Kind { None, Rpd, LadInsert, LadSplit };
    Kind kind = Kind::None;
    RpdConfig rpd;
    LadConfig lad;
};

DefendedTrace apply_defense(const Trace& t, const DefenseConfig& cfg, SeededRng& rng);
std::vector<DefendedTrace> defend_dataset(const Dataset& ds, const DefenseConfig& cfg,
                                          std::uint64_t seed);

}  // namespace wf
