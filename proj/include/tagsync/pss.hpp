#pragma once

#include <array>

namespace tagsync {

inline constexpr int kPssLength = 127;

// Frequency-domain PSS: 127 BPSK values (+1/-1). The three sequences
// (nid2 = 0, 1, 2) are cyclic shifts of one length-127 m-sequence.
struct PssFreqSequence {
    int nid2 = 0;
    std::array<double, kPssLength> values{};
};

// d(n) = 1 - 2*x((n + 43*nid2) mod 127) with x(i+7) = (x(i+4) + x(i)) mod 2
// seeded x(0..6) = 0,1,1,0,1,1,1. Throws std::invalid_argument unless
// nid2 is 0, 1 or 2.
PssFreqSequence generate_pss_sequence(int nid2);

} // namespace tagsync
