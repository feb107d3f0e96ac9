#include "rthdc/trace.hpp"

#include <istream>
#include <sstream>

#include "rthdc/cim.hpp"
#include "rthdc/errors.hpp"

namespace rthdc {

namespace {

[[noreturn]] void fail(std::size_t line_no, const std::string& msg) {
    throw ConfigError("trace line " + std::to_string(line_no) + ": " + msg);
}

Address parse_address(const std::string& tok, std::size_t line_no) {
    Address a;
    std::uint32_t* fields[4] = {&a.bank, &a.subarray, &a.tile, &a.dbc};
    std::size_t pos = 0;
    for (int i = 0; i < 4; ++i) {
        const std::size_t dot = tok.find('.', pos);
        const std::string part =
            tok.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
        if (part.empty() || (i < 3) != (dot != std::string::npos))
            fail(line_no, "address must be bank.subarray.tile.dbc");
        try {
            *fields[i] = static_cast<std::uint32_t>(std::stoul(part));
        } catch (const std::exception&) {
            fail(line_no, "address component '" + part + "' is not a number");
        }
        pos = dot + 1;
    }
    return a;
}

BitVec parse_hex_row(const std::string& hex, std::uint32_t bits, std::size_t line_no) {
    const std::size_t bytes = (bits + 7) / 8;
    if (hex.size() != 2 * bytes)
        fail(line_no, "row must be " + std::to_string(2 * bytes) + " hex digits");
    std::vector<std::uint8_t> raw(bytes);
    auto nibble = [&](char c) -> std::uint8_t {
        if (c >= '0' && c <= '9') return std::uint8_t(c - '0');
        if (c >= 'a' && c <= 'f') return std::uint8_t(c - 'a' + 10);
        if (c >= 'A' && c <= 'F') return std::uint8_t(c - 'A' + 10);
        fail(line_no, "invalid hex digit");
    };
    for (std::size_t i = 0; i < bytes; ++i)
        raw[i] = std::uint8_t(nibble(hex[2 * i]) << 4) | nibble(hex[2 * i + 1]);
    return BitVec::from_bytes(raw.data(), raw.size(), bits);
}

} // namespace

TraceResult run_trace(std::istream& in, const Geometry& g) {
    g.validate();
    Device dev(g);
    TraceResult out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ls(line);
        std::string verb;
        if (!(ls >> verb) || verb[0] == '#') continue;
        std::string addr_tok;
        std::uint32_t loc = 0;
        if (!(ls >> addr_tok >> loc)) fail(line_no, "expected an address and a location");
        const Address addr = parse_address(addr_tok, line_no);
        Dbc& d = dev.dbc(addr);
        if (verb == "WRITE") {
            std::string hex;
            if (!(ls >> hex)) fail(line_no, "WRITE needs a hex row");
            d.shift_to(loc, Port::Upper, out.ledger);
            d.write_row(Port::Upper, parse_hex_row(hex, g.tracks_per_dbc, line_no),
                        out.ledger);
        } else if (verb == "SHIFT") {
            std::string port;
            if (!(ls >> port)) fail(line_no, "SHIFT needs a port (UPPER or LOWER)");
            if (port != "UPPER" && port != "LOWER")
                fail(line_no, "port must be UPPER or LOWER");
            d.shift_to(loc, port == "UPPER" ? Port::Upper : Port::Lower, out.ledger);
        } else if (verb == "CIMOP") {
            std::uint32_t size = 0;
            std::string opname;
            if (!(ls >> size >> opname)) fail(line_no, "CIMOP needs a size and an op");
            CimOpKind op;
            if (!parse_cim_op(opname, op)) fail(line_no, "unknown op '" + opname + "'");
            const BitVec res = cimop(d, loc, size, op, out.ledger);
            out.lines.push_back("CIMOP " + addr_tok + " " + std::to_string(loc) + " " +
                                std::to_string(size) + " " + cim_op_name(op) + " -> " +
                                res.to_hex());
        } else {
            fail(line_no, "unknown directive '" + verb + "'");
        }
        std::string extra;
        if (ls >> extra) fail(line_no, "unexpected trailing token '" + extra + "'");
    }
    return out;
}

} // namespace rthdc
