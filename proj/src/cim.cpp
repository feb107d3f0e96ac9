#include "rthdc/cim.hpp"

#include "rthdc/errors.hpp"

namespace rthdc {

ThresholdFlags flags_from_count(int count) {
    if (count < 0 || count > 5)
        throw ContractError("flags_from_count: count outside 0..5");
    ThresholdFlags f;
    f.t01 = count > 0;
    f.t12 = count > 1;
    f.t23 = count > 2;
    f.t34 = count > 3;
    f.t45 = count > 4;
    return f;
}

CimLogicOut cim_logic(const ThresholdFlags& flags, int size) {
    CimLogicOut out;
    out.or_ = flags.t01;
    out.and_ = flags.count() == size;
    // Odd parity: an odd number of thresholds exceeded (1, 3, or 5 ones).
    out.xor_ = flags.t01 ^ flags.t12 ^ flags.t23 ^ flags.t34 ^ flags.t45;
    return out;
}

const char* cim_op_name(CimOpKind op) {
    switch (op) {
    case CimOpKind::Read: return "READ";
    case CimOpKind::RotLeft: return "ROT_LEFT";
    case CimOpKind::RotRight: return "ROT_RIGHT";
    case CimOpKind::And: return "AND";
    case CimOpKind::Or: return "OR";
    case CimOpKind::Xor: return "XOR";
    }
    return "?";
}

bool parse_cim_op(const std::string& name, CimOpKind& out) {
    if (name == "READ")
        out = CimOpKind::Read;
    else if (name == "ROT_LEFT")
        out = CimOpKind::RotLeft;
    else if (name == "ROT_RIGHT")
        out = CimOpKind::RotRight;
    else if (name == "AND")
        out = CimOpKind::And;
    else if (name == "OR")
        out = CimOpKind::Or;
    else if (name == "XOR")
        out = CimOpKind::Xor;
    else
        return false;
    return true;
}

BitVec cimop(Dbc& dbc, std::uint32_t location, std::uint32_t size, CimOpKind op, Ledger& led) {
    const Geometry& g = dbc.geometry();
    if (size < 1 || size > g.trd)
        throw ContractError("cimop: size outside 1..trd");
    dbc.shift_to(location, Port::Upper, led);
    switch (op) {
    case CimOpKind::Read:
        if (size != 1) throw ContractError("cimop: READ takes a single operand row");
        return dbc.read_row(Port::Upper, led);
    case CimOpKind::RotLeft:
        if (size != 1) throw ContractError("cimop: ROT_LEFT takes a single operand row");
        return dbc.rotate_read(Port::Upper, RotateDir::Left, led);
    case CimOpKind::RotRight:
        if (size != 1) throw ContractError("cimop: ROT_RIGHT takes a single operand row");
        return dbc.rotate_read(Port::Upper, RotateDir::Right, led);
    case CimOpKind::And:
    case CimOpKind::Or:
    case CimOpKind::Xor: break;
    }
    // One transverse read over the operand span, then the logic block
    // derives the row-parallel result from the count bit-planes.
    const auto planes = dbc.tr_planes(led, size);
    const BitVec& ones = planes[0];
    const BitVec& twos = planes[1];
    const BitVec& fours = planes[2];
    if (op == CimOpKind::Xor) return ones; // odd parity plane
    if (op == CimOpKind::Or) return ones | twos | fours;
    // AND: count == size, compared bit-plane-wise against the size constant.
    BitVec r = (size & 1) ? ones : ~ones;
    r &= (size & 2) ? twos : ~twos;
    r &= (size & 4) ? fours : ~fours;
    return r;
}

BitVec cimop(Device& dev, const CimRequest& req, Ledger& led) {
    return cimop(dev.dbc(req.src), req.src.location, req.size, req.op, led);
}

} // namespace rthdc
