#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "wf/trace.hpp"

namespace wf {

struct BadMagic : std::runtime_error {
    BadMagic() : std::runtime_error("not a pcap file (bad magic)") {}
};
struct Truncated : std::runtime_error {
    explicit Truncated(const std::string& m) : std::runtime_error(m) {}
};
struct EmptyTrace : std::runtime_error {
    EmptyTrace() : std::runtime_error("pcap contained no usable TCP/IPv4 records") {}
};
struct MalformedRow : std::runtime_error {
    explicit MalformedRow(const std::string& m) : std::runtime_error(m) {}
};

// The capture client, used to assign direction: packets sourced from this
// address are outbound (+), packets destined to it are inbound (-).
struct ClientIdentity {
    std::uint32_t client_ip = 0;  // host byte order
};

// Parses "a.b.c.d"; throws std::invalid_argument on anything else.
ClientIdentity parse_client_ip(const std::string& dotted);

// Classic pcap only (magic 0xa1b2c3d4 either endianness, linktype Ethernet).
// One Packet per TCP-over-IPv4 record: magnitude = incl_len, sign from the
// client address. Non-TCP records and records touching neither address are
// skipped. VLAN-tagged frames are skipped too (documented limitation).
Trace parse_pcap(std::span<const std::uint8_t> bytes, const ClientIdentity& who);

Trace parse_pcap_file(const std::string& path, const ClientIdentity& who);

// CSV dataset format: optional "# wf-dataset v1" header, then one trace per
// row: label ("unmon" or decimal site index) followed by signed sizes.
Dataset read_csv_dataset(const std::string& path);
void write_csv_dataset(const Dataset& ds, const std::string& path);

}  // namespace wf
