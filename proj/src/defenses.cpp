#include "wf/defenses.hpp"

#include <cstdlib>

namespace wf {

int random_packet(int s_min, int s_max, SeededRng& rng) {
    if (s_min < 1 || s_min > s_max || s_max > kMaxWireSize)
        throw BadRange("random packet range [" + std::to_string(s_min) + ", " +
                       std::to_string(s_max) + "] invalid");
    int sign = rng.randi(1, 2) == 1 ? -1 : 1;
    return sign * rng.randi(s_min, s_max);
}

DefendedTrace rpd(const Trace& t, const RpdConfig& cfg, SeededRng& rng) {
    if (cfg.p_t < 0.0 || cfg.p_t > 1.0) throw BadRange("p_t outside [0,1]");
    if (cfg.s_min < 1 || cfg.s_min > cfg.s_max || cfg.s_max > kMaxWireSize)
        throw BadRange("rpd size range invalid");
    DefendedTrace out;
    out.label = t.label;
    out.packets.reserve(t.sizes.size() * 2);
    for (int s : t.sizes) {
        out.packets.push_back({s, Provenance::Original});
        if (rng.randr() < cfg.p_t)
            out.packets.push_back({random_packet(cfg.s_min, cfg.s_max, rng), Provenance::Inserted});
    }
    return out;
}

DefendedTrace lad_insert(const Trace& t, const LadConfig& cfg, SeededRng& rng) {
    if (cfg.p_t < 0.0 || cfg.p_t > 1.0) throw BadRange("p_t outside [0,1]");
    if (cfg.list.sizes.empty()) throw EmptyFilterList{};
    DefendedTrace out;
    out.label = t.label;
    out.packets.reserve(t.sizes.size() * 2);
    for (int s : t.sizes) {
        out.packets.push_back({s, Provenance::Original});
        if (rng.randr() < cfg.p_t)
            out.packets.push_back({cfg.list.sample(rng), Provenance::Inserted});
    }
    return out;
}

DefendedTrace lad_split(const Trace& t, const LadConfig& cfg, SeededRng& rng) {
    if (cfg.p_t < 0.0 || cfg.p_t > 1.0) throw BadRange("p_t outside [0,1]");
    if (cfg.list.sizes.empty()) throw EmptyFilterList{};
    if (cfg.s_min < 1 || cfg.s_min > kMaxWireSize) throw BadRange("split s_min invalid");
    DefendedTrace out;
    out.label = t.label;
    for (int s : t.sizes) {
        if (rng.randr() < cfg.p_t) {
            // Candidate fragment: same sign as the packet, strictly smaller
            // magnitude. A split packet cannot reverse direction on the wire.
            int fragment = cfg.list.sample(rng);
            bool same_sign = (fragment > 0) == (s > 0);
            int remainder_mag = std::abs(s) - std::abs(fragment);
            if (same_sign && remainder_mag >= cfg.s_min) {
                out.packets.push_back({fragment, Provenance::SplitChild});
                out.packets.push_back({s - fragment, Provenance::SplitChild});
                ++out.split_count;
                continue;
            }
        }
        out.packets.push_back({s, Provenance::Original});
    }
    return out;
}

DefendedTrace apply_defense(const Trace& t, const DefenseConfig& cfg, SeededRng& rng) {
    switch (cfg.kind) {
        case DefenseConfig::Kind::Rpd:
            return rpd(t, cfg.rpd, rng);
        case DefenseConfig::Kind::LadInsert:
            return lad_insert(t, cfg.lad, rng);
        case DefenseConfig::Kind::LadSplit:
            return lad_split(t, cfg.lad, rng);
        case DefenseConfig::Kind::None:
        default: {
            DefendedTrace out;
            out.label = t.label;
            for (int s : t.sizes) out.packets.push_back({s, Provenance::Original});
            return out;
        }
    }
}

std::vector<DefendedTrace> defend_dataset(const Dataset& ds, const DefenseConfig& cfg,
                                          std::uint64_t seed) {
    std::vector<DefendedTrace> out;
    out.reserve(ds.traces.size());
    for (std::size_t i = 0; i < ds.traces.size(); ++i) {
        SeededRng rng(SeededRng::derive(seed, i));
        out.push_back(apply_defense(ds.traces[i], cfg, rng));
    }
    return out;
}

}  // namespace wf
