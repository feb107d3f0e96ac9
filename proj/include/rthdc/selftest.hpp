#pragma once

#include <iosfwd>

namespace rthdc {

// Built-in sanity suite: exercises the device primitives, the counters, the
// reference encoder, and a tiny end-to-end train/classify round trip. Prints
// one line per check and returns the number of failures. `quick` shrinks the
// exhaustive sweeps.
int run_selftest(bool quick, std::ostream& out);

} // namespace rthdc
