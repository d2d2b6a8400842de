#include "wf/pcap.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

namespace wf {

namespace {

constexpr std::uint32_t kMagicNative = 0xa1b2c3d4u;
constexpr std::uint32_t kMagicSwapped = 0xd4c3b2a1u;

std::uint32_t rd32(std::span<const std::uint8_t> b, std::size_t off, bool swap) {
    std::uint32_t v = static_cast<std::uint32_t>(b[off]) |
                      static_cast<std::uint32_t>(b[off + 1]) << 8 |
                      static_cast<std::uint32_t>(b[off + 2]) << 16 |
                      static_cast<std::uint32_t>(b[off + 3]) << 24;
    if (swap) v = __builtin_bswap32(v);
    return v;
}

std::uint16_t be16(std::span<const std::uint8_t> b, std::size_t off) {
    return static_cast<std::uint16_t>(b[off] << 8 | b[off + 1]);
}

std::uint32_t be32(std::span<const std::uint8_t> b, std::size_t off) {
    return static_cast<std::uint32_t>(b[off]) << 24 | static_cast<std::uint32_t>(b[off + 1]) << 16 |
           static_cast<std::uint32_t>(b[off + 2]) << 8 | static_cast<std::uint32_t>(b[off + 3]);
}

}  // namespace

ClientIdentity parse_client_ip(const std::string& dotted) {
    std::uint32_t ip = 0;
    std::size_t pos = 0;
    for (int i = 0; i < 4; ++i) {
        std::size_t dot = dotted.find('.', pos);
        std::string part = dotted.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
        int octet = -1;
        auto [p, ec] = std::from_chars(part.data(), part.data() + part.size(), octet);
        if (ec != std::errc{} || p != part.data() + part.size() || octet < 0 || octet > 255)
            throw std::invalid_argument("bad IPv4 address: " + dotted);
        ip = ip << 8 | static_cast<std::uint32_t>(octet);
        if (i < 3) {
            if (dot == std::string::npos) throw std::invalid_argument("bad IPv4 address: " + dotted);
            pos = dot + 1;
        } else if (dot != std::string::npos) {
            throw std::invalid_argument("bad IPv4 address: " + dotted);
        }
    }
    return ClientIdentity{ip};
}

Trace parse_pcap(std::span<const std::uint8_t> bytes, const ClientIdentity& who) {
    if (bytes.size() < 24) throw BadMagic{};
    std::uint32_t magic = rd32(bytes, 0, false);
    bool swap;
    if (magic == kMagicNative)
        swap = false;
    else if (magic == kMagicSwapped)
        swap = true;
    else
        throw BadMagic{};

    Trace t;
    std::size_t off = 24;
    while (off < bytes.size()) {
        if (off + 16 > bytes.size()) throw Truncated("record header past end of file");
        std::uint32_t incl_len = rd32(bytes, off + 8, swap);
        off += 16;
        if (off + incl_len > bytes.size()) throw Truncated("record payload past end of file");
        std::span<const std::uint8_t> frame = bytes.subspan(off, incl_len);
        off += incl_len;

        // Ethernet: 14-byte header, ethertype 0x0800 = IPv4. VLAN (0x8100) skipped.
        if (frame.size() < 14 + 20) continue;
        if (be16(frame, 12) != 0x0800) continue;
        std::span<const std::uint8_t> ip = frame.subspan(14);
        if ((ip[0] >> 4) != 4) continue;
        std::size_t ihl = static_cast<std::size_t>(ip[0] & 0x0f) * 4;
        if (ihl < 20 || ip.size() < ihl) continue;
        if (ip[9] != 6) continue;  // TCP only
        std::uint32_t src = be32(ip, 12);
        std::uint32_t dst = be32(ip, 16);
        int sign;
        if (src == who.client_ip)
            sign = +1;
        else if (dst == who.client_ip)
            sign = -1;
        else
            continue;
        t.sizes.push_back(sign * static_cast<int>(incl_len));
    }
    if (t.empty()) throw EmptyTrace{};
    return t;
}

Trace parse_pcap_file(const std::string& path, const ClientIdentity& who) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), {}};
    return parse_pcap(bytes, who);
}

Dataset read_csv_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    Dataset ds;
    int max_site = -1;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        Trace t;
        std::stringstream row(line);
        std::string tok;
        bool first = true;
        while (std::getline(row, tok, ',')) {
            if (first) {
                first = false;
                if (tok == "unmon") {
                    t.label = Label::unmonitored();
                    ds.open_world = true;
                } else {
                    int site = -1;
                    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), site);
                    if (ec != std::errc{} || p != tok.data() + tok.size() || site < 0)
                        throw MalformedRow("line " + std::to_string(lineno) + ": bad label '" + tok + "'");
                    t.label = Label::monitored(site);
                    max_site = std::max(max_site, site);
                }
                continue;
            }
            int size = 0;
            auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), size);
            if (ec != std::errc{} || p != tok.data() + tok.size())
                throw MalformedRow("line " + std::to_string(lineno) + ": non-integer token '" + tok + "'");
            if (size == 0)
                throw MalformedRow("line " + std::to_string(lineno) + ": zero packet size");
            t.sizes.push_back(size);
        }
        if (first)
            throw MalformedRow("line " + std::to_string(lineno) + ": empty row");
        if (t.empty())
            throw MalformedRow("line " + std::to_string(lineno) + ": trace has no packets");
        ds.traces.push_back(std::move(t));
    }
    ds.class_count = max_site + 1;
    return ds;
}

void write_csv_dataset(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "# wf-dataset v1\n";
    for (const Trace& t : ds.traces) {
        if (t.label.is_monitored())
            out << t.label.site_index;
        else
            out << "unmon";
        for (int s : t.sizes) out << ',' << s;
        out << '\n';
    }
}

}  // namespace wf
