#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace wf {

// Largest on-wire packet size admitted anywhere in the workbench.
inline constexpr int kMaxWireSize = 1514;

// One observed packet: magnitude = bytes on the wire, sign = direction
// (positive outbound, negative inbound). Size zero is meaningless and
// rejected at construction.
struct Packet {
    int signed_size = 0;
};

inline Packet make_packet(int signed_size, int max_wire = kMaxWireSize) {
    if (signed_size == 0)
        throw std::invalid_argument("packet size must be nonzero");
    int mag = signed_size < 0 ? -signed_size : signed_size;
    if (mag > max_wire)
        throw std::invalid_argument("packet size " + std::to_string(signed_size) +
                                    " exceeds max wire size " + std::to_string(max_wire));
    return Packet{signed_size};
}

// Class label: site_index >= 0 means monitored site, -1 means unmonitored.
struct Label {
    int site_index = -1;

    static Label monitored(int site) { return Label{site}; }
    static Label unmonitored() { return Label{-1}; }
    bool is_monitored() const { return site_index >= 0; }
    bool operator==(const Label&) const = default;
};

// Ordered packet sequence for one page load.
struct Trace {
    std::vector<int> sizes;  // signed, all nonzero
    Label label = Label::unmonitored();

    std::size_t size() const { return sizes.size(); }
    bool empty() const { return sizes.empty(); }
};

struct Dataset {
    std::vector<Trace> traces;
    int class_count = 0;
    bool open_world = false;

    bool empty() const { return traces.empty(); }
};

// Checks the dataset invariants; throws std::invalid_argument on violation.
inline void validate_dataset(const Dataset& ds) {
    for (const Trace& t : ds.traces) {
        if (t.empty())
            throw std::invalid_argument("dataset contains an empty trace");
        if (!t.label.is_monitored() && !ds.open_world)
            throw std::invalid_argument("closed-world dataset contains an unmonitored label");
        if (t.label.is_monitored() && t.label.site_index >= ds.class_count)
            throw std::invalid_argument("site index out of range for declared class count");
    }
}

enum class Provenance : std::uint8_t { Original, Inserted, SplitChild };

struct TaggedPacket {
    int signed_size = 0;
    Provenance from = Provenance::Original;
};

// Defense output: packets plus per-packet provenance for overhead accounting.
struct DefendedTrace {
    std::vector<TaggedPacket> packets;
    int split_count = 0;
    Label label = Label::unmonitored();
};

// Drops provenance, keeping order and sizes. The attacker never sees the tags.
inline Trace strip_provenance(const DefendedTrace& d) {
    if (d.packets.empty())
        throw std::invalid_argument("defended trace is empty");
    Trace t;
    t.label = d.label;
    t.sizes.reserve(d.packets.size());
    for (const TaggedPacket& p : d.packets) t.sizes.push_back(p.signed_size);
    return t;
}

}  // namespace wf
