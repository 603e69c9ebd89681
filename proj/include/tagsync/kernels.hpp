#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace tagsync::kernels {

// Every kernel exists in a scalar reference form and a vector form (AVX2 on
// x86, NEON on arm, word-parallel popcount for the bit kernels). The vector
// form is selected at runtime when the CPU supports it; both forms are
// equivalence-tested against each other and against naive oracles.
enum class Variant { scalar, simd };

bool simd_available();
Variant active_variant();
void force_variant(std::optional<Variant> v); // testing hook
const char* variant_name(Variant v);

// Relative variance floor below which a correlation window counts as
// zero-variance (metric pinned to 0, position flagged).
inline constexpr double kZeroVarianceRel = 1e-12;

inline std::size_t sym_trace_len(std::size_t n, int arms) {
    const std::size_t w = 2 * static_cast<std::size_t>(arms);
    return n > w ? n - w : 0;
}
inline std::size_t window_trace_len(std::size_t n, std::size_t window) {
    return n >= window ? n - window + 1 : 0;
}

// ---- real domain ----------------------------------------------------------

// out[i] = sum_{k=1..arms} |env[t+k] - env[t-k]| at center t = arms + i.
// out.size() must equal sym_trace_len(env.size(), arms).
void sd_trace(std::span<const double> env, int arms, std::span<double> out, Variant v);
void sd_trace(std::span<const double> env, int arms, std::span<double> out);

// Pearson correlation of the forward arm env[t+1..t+arms] against the
// mirrored backward arm env[t-1..t-arms], per center. Zero-variance arms
// yield 0 and set flags[i] = 1 when flags is non-null.
void sym_autocorr_trace(std::span<const double> env, int arms, std::span<double> out,
                        std::vector<uint8_t>* flags, Variant v);
void sym_autocorr_trace(std::span<const double> env, int arms, std::span<double> out,
                        std::vector<uint8_t>* flags = nullptr);

// Sliding Pearson correlation against a fixed template; out[t] corresponds to
// the window starting at t. out.size() == window_trace_len(n, tmpl.size()).
void xcorr_trace(std::span<const double> env, std::span<const double> tmpl,
                 std::span<double> out, std::vector<uint8_t>* flags, Variant v);
void xcorr_trace(std::span<const double> env, std::span<const double> tmpl,
                 std::span<double> out, std::vector<uint8_t>* flags = nullptr);

// ---- bit domain ------------------------------------------------------------

// LSB-first packed bit vector padded so any in-range 64-bit window load is safe.
struct PackedBits {
    std::vector<uint64_t> words;
    std::size_t nbits = 0;

    static PackedBits pack(std::span<const uint8_t> bits);
    PackedBits reversed() const;

    int bit(std::size_t i) const {
        return static_cast<int>((words[i >> 6] >> (i & 63)) & 1u);
    }
    // bits [pos, pos+len), len in [1, 64]
    uint64_t window(std::size_t pos, int len) const {
        const std::size_t w = pos >> 6;
        const unsigned off = static_cast<unsigned>(pos & 63);
        uint64_t v = words[w] >> off;
        if (off != 0) v |= words[w + 1] << (64 - off);
        if (len < 64) v &= (uint64_t{1} << len) - 1;
        return v;
    }
};

// out[i] = sum_{k=1..arms} b(t+k) XOR b(t-k), t = arms + i (minimum at a
// mirror-symmetric center).
void xor_sym_trace(const PackedBits& bits, int arms, std::span<int32_t> out, Variant v);
void xor_sym_trace(const PackedBits& bits, int arms, std::span<int32_t> out);

// XNOR accumulation (maximum at a mirror-symmetric center).
void xnor_sym_trace(const PackedBits& bits, int arms, std::span<int32_t> out, Variant v);
void xnor_sym_trace(const PackedBits& bits, int arms, std::span<int32_t> out);

// matches - mismatches of the sliding window starting at t against a fixed
// bit template; out.size() == window_trace_len(bits.nbits, tmpl.nbits).
void hamming_similarity_trace(const PackedBits& bits, const PackedBits& tmpl,
                              std::span<int32_t> out, Variant v);
void hamming_similarity_trace(const PackedBits& bits, const PackedBits& tmpl,
                              std::span<int32_t> out);

// Internal per-variant entry points (defined in kernels_scalar / kernels_simd).
namespace detail {
void sd_trace_scalar(std::span<const double>, int, std::span<double>);
void sd_trace_simd(std::span<const double>, int, std::span<double>);
void sym_autocorr_scalar(std::span<const double>, int, std::span<double>, std::vector<uint8_t>*);
void sym_autocorr_simd(std::span<const double>, int, std::span<double>, std::vector<uint8_t>*);
void xcorr_scalar(std::span<const double>, std::span<const double>, std::span<double>, std::vector<uint8_t>*);
void xcorr_simd(std::span<const double>, std::span<const double>, std::span<double>, std::vector<uint8_t>*);
void xor_sym_scalar(const PackedBits&, int, std::span<int32_t>);
void xor_sym_packed(const PackedBits&, int, std::span<int32_t>);
void xnor_sym_scalar(const PackedBits&, int, std::span<int32_t>);
void xnor_sym_packed(const PackedBits&, int, std::span<int32_t>);
void hamming_scalar(const PackedBits&, const PackedBits&, std::span<int32_t>);
void hamming_packed(const PackedBits&, const PackedBits&, std::span<int32_t>);

// Shared correlation epilogue: Pearson r from raw sums, with zero-variance
// handling identical across variants.
inline double pearson_from_sums(double sf, double sb, double sff, double sbb,
                                double sfb, int len, bool* flagged) {
    const double inv = 1.0 / static_cast<double>(len);
    const double var_f = sff - sf * sf * inv;
    const double var_b = sbb - sb * sb * inv;
    const bool bad_f = !(var_f > kZeroVarianceRel * sff);
    const bool bad_b = !(var_b > kZeroVarianceRel * sbb);
    if (bad_f || bad_b) {
        if (flagged) *flagged = true;
        return 0.0;
    }
    if (flagged) *flagged = false;
    double r = (sfb - sf * sb * inv) / std::sqrt(var_f * var_b);
    if (r > 1.0) r = 1.0;
    if (r < -1.0) r = -1.0;
    return r;
}
} // namespace detail

} // namespace tagsync::kernels
