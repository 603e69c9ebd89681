#include "tagsync/pss.hpp"

#include <stdexcept>

namespace tagsync {

PssFreqSequence generate_pss_sequence(int nid2) {
    if (nid2 < 0 || nid2 > 2)
        throw std::invalid_argument("generate_pss_sequence: nid2 must be 0, 1 or 2");

    // degree-7 m-sequence, x(i+7) = (x(i+4) + x(i)) mod 2
    int x[kPssLength];
    x[0] = 0; x[1] = 1; x[2] = 1; x[3] = 0; x[4] = 1; x[5] = 1; x[6] = 1;
    for (int i = 0; i + 7 < kPssLength; ++i)
        x[i + 7] = (x[i + 4] + x[i]) & 1;

    PssFreqSequence seq;
    seq.nid2 = nid2;
    for (int n = 0; n < kPssLength; ++n) {
        const int m = (n + 43 * nid2) % kPssLength;
        seq.values[n] = 1.0 - 2.0 * x[m];
    }
    return seq;
}

} // namespace tagsync
