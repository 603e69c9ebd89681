#include "tagsync/kernels.hpp"

#include <atomic>
#include <stdexcept>

namespace tagsync::kernels {

namespace {
std::atomic<int> g_forced{-1}; // -1 auto, else Variant value
}

bool simd_available() {
#if defined(__x86_64__) || defined(__i386__)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#elif defined(__ARM_NEON) || defined(__aarch64__)
    return true;
#else
    return false;
#endif
}

Variant active_variant() {
    const int f = g_forced.load(std::memory_order_relaxed);
    if (f >= 0) return static_cast<Variant>(f);
    return simd_available() ? Variant::simd : Variant::scalar;
}

void force_variant(std::optional<Variant> v) {
    g_forced.store(v ? static_cast<int>(*v) : -1, std::memory_order_relaxed);
}

const char* variant_name(Variant v) {
    return v == Variant::scalar ? "scalar" : "simd";
}

PackedBits PackedBits::pack(std::span<const uint8_t> bits) {
    PackedBits pb;
    pb.nbits = bits.size();
    pb.words.assign(bits.size() / 64 + 2, 0); // padded for window() overreads
    for (std::size_t i = 0; i < bits.size(); ++i)
        if (bits[i]) pb.words[i >> 6] |= uint64_t{1} << (i & 63);
    return pb;
}

PackedBits PackedBits::reversed() const {
    PackedBits pb;
    pb.nbits = nbits;
    pb.words.assign(words.size(), 0);
    for (std::size_t i = 0; i < nbits; ++i)
        if (bit(nbits - 1 - i)) pb.words[i >> 6] |= uint64_t{1} << (i & 63);
    return pb;
}

namespace {

void check_sym_sizes(std::size_t n, int arms, std::size_t out) {
    if (arms < 1) throw std::invalid_argument("symmetric kernel: arms must be >= 1");
    if (out != sym_trace_len(n, arms))
        throw std::invalid_argument("symmetric kernel: output size mismatch");
}

void check_xcorr_sizes(std::size_t n, std::size_t L, std::size_t out) {
    if (L < 2) throw std::invalid_argument("xcorr kernel: template too short");
    if (out != window_trace_len(n, L))
        throw std::invalid_argument("xcorr kernel: output size mismatch");
}

} // namespace

void sd_trace(std::span<const double> env, int arms, std::span<double> out, Variant v) {
    check_sym_sizes(env.size(), arms, out.size());
    if (out.empty()) return;
    v == Variant::scalar ? detail::sd_trace_scalar(env, arms, out)
                         : detail::sd_trace_simd(env, arms, out);
}
void sd_trace(std::span<const double> env, int arms, std::span<double> out) {
    sd_trace(env, arms, out, active_variant());
}

void sym_autocorr_trace(std::span<const double> env, int arms, std::span<double> out,
                        std::vector<uint8_t>* flags, Variant v) {
    check_sym_sizes(env.size(), arms, out.size());
    if (flags) flags->assign(out.size(), 0);
    if (out.empty()) return;
    v == Variant::scalar ? detail::sym_autocorr_scalar(env, arms, out, flags)
                         : detail::sym_autocorr_simd(env, arms, out, flags);
}
void sym_autocorr_trace(std::span<const double> env, int arms, std::span<double> out,
                        std::vector<uint8_t>* flags) {
    sym_autocorr_trace(env, arms, out, flags, active_variant());
}

void xcorr_trace(std::span<const double> env, std::span<const double> tmpl,
                 std::span<double> out, std::vector<uint8_t>* flags, Variant v) {
    check_xcorr_sizes(env.size(), tmpl.size(), out.size());
    if (flags) flags->assign(out.size(), 0);
    if (out.empty()) return;
    v == Variant::scalar ? detail::xcorr_scalar(env, tmpl, out, flags)
                         : detail::xcorr_simd(env, tmpl, out, flags);
}
void xcorr_trace(std::span<const double> env, std::span<const double> tmpl,
                 std::span<double> out, std::vector<uint8_t>* flags) {
    xcorr_trace(env, tmpl, out, flags, active_variant());
}

void xor_sym_trace(const PackedBits& bits, int arms, std::span<int32_t> out, Variant v) {
    check_sym_sizes(bits.nbits, arms, out.size());
    if (out.empty()) return;
    v == Variant::scalar ? detail::xor_sym_scalar(bits, arms, out)
                         : detail::xor_sym_packed(bits, arms, out);
}
void xor_sym_trace(const PackedBits& bits, int arms, std::span<int32_t> out) {
    xor_sym_trace(bits, arms, out, active_variant());
}

void xnor_sym_trace(const PackedBits& bits, int arms, std::span<int32_t> out, Variant v) {
    check_sym_sizes(bits.nbits, arms, out.size());
    if (out.empty()) return;
    v == Variant::scalar ? detail::xnor_sym_scalar(bits, arms, out)
                         : detail::xnor_sym_packed(bits, arms, out);
}
void xnor_sym_trace(const PackedBits& bits, int arms, std::span<int32_t> out) {
    xnor_sym_trace(bits, arms, out, active_variant());
}

void hamming_similarity_trace(const PackedBits& bits, const PackedBits& tmpl,
                              std::span<int32_t> out, Variant v) {
    check_xcorr_sizes(bits.nbits, tmpl.nbits, out.size());
    if (out.empty()) return;
    v == Variant::scalar ? detail::hamming_scalar(bits, tmpl, out)
                         : detail::hamming_packed(bits, tmpl, out);
}
void hamming_similarity_trace(const PackedBits& bits, const PackedBits& tmpl,
                              std::span<int32_t> out) {
    hamming_similarity_trace(bits, tmpl, out, active_variant());
}

} // namespace tagsync::kernels
