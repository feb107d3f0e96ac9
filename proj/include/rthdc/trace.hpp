#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "rthdc/cost.hpp"
#include "rthdc/device.hpp"

namespace rthdc {

// Micro-op trace runner: executes a line-oriented script against a fresh
// device and collects the per-op results plus the cost ledger. Lines:
//
//   # comment                              ignored, as are blank lines
//   WRITE bank.sub.tile.dbc LOC HEXROW     align LOC under the upper port,
//                                          write the row (hex, byte 0 first)
//   SHIFT bank.sub.tile.dbc LOC PORT       align LOC under UPPER or LOWER
//   CIMOP bank.sub.tile.dbc LOC SIZE OP    bulk-bitwise op over SIZE rows
//                                          starting at LOC; OP is READ,
//                                          ROT_LEFT, ROT_RIGHT, AND, OR, XOR
//
// Every CIMOP appends "CIMOP <addr> <loc> <size> <op> -> <hex>" to the
// result lines. Malformed input raises ConfigError with the line number.
struct TraceResult {
    std::vector<std::string> lines;
    Ledger ledger;
};

TraceResult run_trace(std::istream& in, const Geometry& g);

} // namespace rthdc
