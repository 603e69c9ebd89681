#include <bit>
#include <cmath>

#include "tagsync/kernels.hpp"

// Scalar reference kernels. Straight-line loops, no tricks; the vector
// variants must agree with these to ~1e-12 (real) / exactly (bits).

namespace tagsync::kernels::detail {

void sd_trace_scalar(std::span<const double> env, int arms, std::span<double> out) {
    const std::size_t n = env.size();
    const auto a = static_cast<std::size_t>(arms);
    for (std::size_t t = a; t + a < n; ++t) {
        double acc = 0.0;
        for (std::size_t k = 1; k <= a; ++k)
            acc += std::fabs(env[t + k] - env[t - k]);
        out[t - a] = acc;
    }
}

void sym_autocorr_scalar(std::span<const double> env, int arms, std::span<double> out,
                         std::vector<uint8_t>* flags) {
    const std::size_t n = env.size();
    const auto a = static_cast<std::size_t>(arms);
    for (std::size_t t = a; t + a < n; ++t) {
        double sf = 0, sb = 0, sff = 0, sbb = 0, sfb = 0;
        for (std::size_t k = 1; k <= a; ++k) {
            const double f = env[t + k];
            const double b = env[t - k];
            sf += f;
            sb += b;
            sff += f * f;
            sbb += b * b;
            sfb += f * b;
        }
        bool bad = false;
        out[t - a] = pearson_from_sums(sf, sb, sff, sbb, sfb, arms, &bad);
        if (bad && flags) (*flags)[t - a] = 1;
    }
}

void xcorr_scalar(std::span<const double> env, std::span<const double> tmpl,
                  std::span<double> out, std::vector<uint8_t>* flags) {
    const std::size_t n = env.size();
    const std::size_t L = tmpl.size();
    double sp = 0, spp = 0;
    for (double p : tmpl) {
        sp += p;
        spp += p * p;
    }
    for (std::size_t t = 0; t + L <= n; ++t) {
        double ss = 0, sss = 0, dot = 0;
        for (std::size_t k = 0; k < L; ++k) {
            const double s = env[t + k];
            ss += s;
            sss += s * s;
            dot += s * tmpl[k];
        }
        bool bad = false;
        out[t] = pearson_from_sums(ss, sp, sss, spp, dot, static_cast<int>(L), &bad);
        if (bad && flags) (*flags)[t] = 1;
    }
}

void xor_sym_scalar(const PackedBits& bits, int arms, std::span<int32_t> out) {
    const std::size_t n = bits.nbits;
    const auto a = static_cast<std::size_t>(arms);
    for (std::size_t t = a; t + a < n; ++t) {
        int32_t acc = 0;
        for (std::size_t k = 1; k <= a; ++k)
            acc += bits.bit(t + k) ^ bits.bit(t - k);
        out[t - a] = acc;
    }
}

void xnor_sym_scalar(const PackedBits& bits, int arms, std::span<int32_t> out) {
    const std::size_t n = bits.nbits;
    const auto a = static_cast<std::size_t>(arms);
    for (std::size_t t = a; t + a < n; ++t) {
        int32_t acc = 0;
        for (std::size_t k = 1; k <= a; ++k)
            acc += 1 - (bits.bit(t + k) ^ bits.bit(t - k));
        out[t - a] = acc;
    }
}

void hamming_scalar(const PackedBits& bits, const PackedBits& tmpl, std::span<int32_t> out) {
    const std::size_t n = bits.nbits;
    const std::size_t L = tmpl.nbits;
    for (std::size_t t = 0; t + L <= n; ++t) {
        int32_t mismatches = 0;
        for (std::size_t k = 0; k < L; ++k)
            mismatches += bits.bit(t + k) ^ tmpl.bit(k);
        out[t] = static_cast<int32_t>(L) - 2 * mismatches;
    }
}

} // namespace tagsync::kernels::detail
