#include "tagsync/common.hpp"

#include <stdexcept>

namespace tagsync {

bool is_quantized(MethodId m) {
    switch (m) {
        case MethodId::nft_q:
        case MethodId::sst_q:
        case MethodId::sa_q:
        case MethodId::sd_q:
            return true;
        default:
            return false;
    }
}

const char* to_string(MethodId m) {
    switch (m) {
        case MethodId::nft: return "nft";
        case MethodId::sst: return "sst";
        case MethodId::sa: return "sa";
        case MethodId::sd: return "sd";
        case MethodId::sd_plus: return "sd+";
        case MethodId::nft_q: return "nft_q";
        case MethodId::sst_q: return "sst_q";
        case MethodId::sa_q: return "sa_q";
        case MethodId::sd_q: return "sd_q";
        case MethodId::one_template: return "one-template";
        case MethodId::rising_edge: return "rising-edge";
        case MethodId::active_xcorr: return "active-xcorr";
        case MethodId::active_autocorr: return "active-autocorr";
    }
    return "?";
}

MethodId method_from_string(const std::string& name) {
    const MethodId all[] = {
        MethodId::nft, MethodId::sst, MethodId::sa, MethodId::sd, MethodId::sd_plus,
        MethodId::nft_q, MethodId::sst_q, MethodId::sa_q, MethodId::sd_q,
        MethodId::one_template, MethodId::rising_edge,
        MethodId::active_xcorr, MethodId::active_autocorr,
    };
    for (const MethodId m : all)
        if (name == to_string(m)) return m;
    if (name == "sd_plus") return MethodId::sd_plus; // accepted alias
    throw std::invalid_argument("unknown method: " + name);
}

} // namespace tagsync
