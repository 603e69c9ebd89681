#pragma once

#include <complex>
#include <cstdint>
#include <string>

namespace tagsync {

using cdouble = std::complex<double>;

// Detector identifiers shared by the detection, resource and harness layers.
enum class MethodId {
    nft,
    sst,
    sa,
    sd,
    sd_plus,
    nft_q,
    sst_q,
    sa_q,
    sd_q,
    one_template,
    rising_edge,
    active_xcorr,
    active_autocorr,
};

bool is_quantized(MethodId m);
const char* to_string(MethodId m);
MethodId method_from_string(const std::string& name);

} // namespace tagsync
