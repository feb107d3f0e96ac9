#pragma once

#include <cstdint>
#include <string>

#include "rthdc/bitvec.hpp"
#include "rthdc/cost.hpp"
#include "rthdc/device.hpp"

namespace rthdc {

// Sense-amplifier threshold outputs of one transverse read. Flag tNM is
// high when the window holds at least M ones; the flags are monotone, so a
// valid set is a unary encoding of the count.
struct ThresholdFlags {
    bool t01 = false;
    bool t12 = false;
    bool t23 = false;
    bool t34 = false;
    bool t45 = false;

    int count() const { return int(t01) + int(t12) + int(t23) + int(t34) + int(t45); }
    bool monotone() const { return t01 >= t12 && t12 >= t23 && t23 >= t34 && t34 >= t45; }
    bool operator==(const ThresholdFlags&) const = default;
};

ThresholdFlags flags_from_count(int count); // count in 0..5

// Combinational outputs of the CIM logic block for one track, given the
// operand count `size`: or = at least one 1, and = all `size` operands 1,
// xor = odd parity (an odd number of thresholds exceeded).
struct CimLogicOut {
    bool and_ = false;
    bool or_ = false;
    bool xor_ = false;
};

CimLogicOut cim_logic(const ThresholdFlags& flags, int size);

// The operation mux selects one of eight inputs; six are defined, two are
// reserved and rejected at dispatch.
enum class CimOpKind : std::uint8_t { Read, RotLeft, RotRight, And, Or, Xor };
inline constexpr int kCimMuxSlots = 8;
inline constexpr int kCimReservedSlots = 2;

const char* cim_op_name(CimOpKind op);
bool parse_cim_op(const std::string& name, CimOpKind& out);

// One bulk in-memory operation: `size` operand rows at consecutive locations
// starting at src.location inside the DBC addressed by src.
struct CimRequest {
    Address src;
    std::uint32_t size = 1; // 1..trd
    CimOpKind op = CimOpKind::Read;
};

// Executes a CIM request: aligns the operand window under the ports
// (recording the shifts), then performs one read (Read/rotates, size 1) or
// one transverse read (And/Or/Xor) and applies the logic block row-parallel.
// Total cycle cost is the alignment shift count plus one.
BitVec cimop(Device& dev, const CimRequest& req, Ledger& led);

// Same operation on an already-resolved DBC.
BitVec cimop(Dbc& dbc, std::uint32_t location, std::uint32_t size, CimOpKind op, Ledger& led);

} // namespace rthdc
