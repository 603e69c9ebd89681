#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "tagsync/kernels.hpp"
#include "tagsync/rng.hpp"

using namespace tagsync;
namespace k = tagsync::kernels;

namespace {

std::vector<double> random_env(std::size_t n, uint64_t seed) {
    Rng rng(seed);
    std::vector<double> v(n);
    for (auto& x : v) x = std::fabs(rng.gaussian()) + 0.05;
    return v;
}

std::vector<uint8_t> random_bits(std::size_t n, uint64_t seed) {
    Rng rng(seed);
    std::vector<uint8_t> v(n);
    for (auto& b : v) b = rng.next_u64() & 1;
    return v;
}

struct VariantGuard {
    ~VariantGuard() { k::force_variant(std::nullopt); }
};

} // namespace

TEST_CASE("packed bits: window and reversal agree with the flat form") {
    const auto bits = random_bits(517, 42);
    const auto pb = k::PackedBits::pack(bits);
    REQUIRE(pb.nbits == bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i) CHECK(pb.bit(i) == bits[i]);

    Rng rng(43);
    for (int trial = 0; trial < 200; ++trial) {
        const int len = rng.uniform_int(1, 64);
        const auto pos = static_cast<std::size_t>(rng.uniform_int(0, 517 - len));
        const uint64_t w = pb.window(pos, len);
        for (int i = 0; i < len; ++i) CHECK(((w >> i) & 1) == bits[pos + i]);
    }

    const auto rev = pb.reversed();
    for (std::size_t i = 0; i < bits.size(); ++i)
        CHECK(rev.bit(i) == bits[bits.size() - 1 - i]);
}

TEST_CASE("real kernels match the naive oracle in both variants") {
    VariantGuard guard;
    Rng meta(7);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 64 + meta.next_u64() % 1000;
        const int arms = 2 + static_cast<int>(meta.next_u64() % 60);
        if (n < 2 * static_cast<std::size_t>(arms) + 2) continue;
        const auto env = random_env(n, 1000 + trial);
        const auto tmpl = random_env(static_cast<std::size_t>(arms) * 2, 2000 + trial);

        const auto oracle_sd = oracles::naive_sd_trace(env, arms);
        const auto oracle_sym = oracles::naive_sym_autocorr_trace(env, arms);
        const auto oracle_x = oracles::naive_xcorr_trace(env, tmpl);

        for (const auto variant : {k::Variant::scalar, k::Variant::simd}) {
            if (variant == k::Variant::simd && !k::simd_available()) continue;
            k::force_variant(variant);

            std::vector<double> sd(oracle_sd.size());
            k::sd_trace(env, arms, sd);
            for (std::size_t i = 0; i < sd.size(); ++i)
                CHECK(std::fabs(sd[i] - oracle_sd[i]) < 1e-12);

            std::vector<double> sym(oracle_sym.values.size());
            std::vector<uint8_t> flags;
            k::sym_autocorr_trace(env, arms, sym, &flags);
            for (std::size_t i = 0; i < sym.size(); ++i) {
                CHECK(std::fabs(sym[i] - oracle_sym.values[i]) < 1e-12);
                CHECK(flags[i] == oracle_sym.flagged[i]);
            }

            std::vector<double> xc(oracle_x.values.size());
            std::vector<uint8_t> xflags;
            k::xcorr_trace(env, tmpl, xc, &xflags);
            for (std::size_t i = 0; i < xc.size(); ++i) {
                CHECK(std::fabs(xc[i] - oracle_x.values[i]) < 1e-12);
                CHECK(xflags[i] == oracle_x.flagged[i]);
            }
        }
    }
}

TEST_CASE("bit kernels match the naive oracle exactly in both variants") {
    VariantGuard guard;
    Rng meta(9);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 80 + meta.next_u64() % 1200;
        const int arms = 2 + static_cast<int>(meta.next_u64() % 90);
        if (n < 2 * static_cast<std::size_t>(arms) + 2) continue;
        const auto bits = random_bits(n, 3000 + trial);
        const auto tmpl = random_bits(static_cast<std::size_t>(arms) * 2, 4000 + trial);
        const auto pb = k::PackedBits::pack(bits);
        const auto pt = k::PackedBits::pack(tmpl);

        const auto oracle_xor = oracles::naive_xor_sym(bits, arms);
        const auto oracle_xnor = oracles::naive_xnor_sym(bits, arms);
        const auto oracle_ham = oracles::naive_hamming_similarity(bits, tmpl);

        for (const auto variant : {k::Variant::scalar, k::Variant::simd}) {
            k::force_variant(variant);

            std::vector<int32_t> x(oracle_xor.size());
            k::xor_sym_trace(pb, arms, x);
            for (std::size_t i = 0; i < x.size(); ++i) CHECK(x[i] == oracle_xor[i]);

            std::vector<int32_t> xn(oracle_xnor.size());
            k::xnor_sym_trace(pb, arms, xn);
            for (std::size_t i = 0; i < xn.size(); ++i) CHECK(xn[i] == oracle_xnor[i]);

            std::vector<int32_t> h(oracle_ham.size());
            k::hamming_similarity_trace(pb, pt, h);
            for (std::size_t i = 0; i < h.size(); ++i) CHECK(h[i] == oracle_ham[i]);
        }
    }
}

TEST_CASE("zero-variance windows are flagged, not divided") {
    VariantGuard guard;
    std::vector<double> env(200, 1.0); // constant everywhere
    for (const auto variant : {k::Variant::scalar, k::Variant::simd}) {
        if (variant == k::Variant::simd && !k::simd_available()) continue;
        k::force_variant(variant);

        std::vector<double> sym(k::sym_trace_len(env.size(), 8));
        std::vector<uint8_t> flags;
        k::sym_autocorr_trace(env, 8, sym, &flags);
        for (std::size_t i = 0; i < sym.size(); ++i) {
            CHECK(sym[i] == 0.0);
            CHECK(flags[i] == 1);
        }

        std::vector<double> tmpl(16, 0.5); // constant template
        std::vector<double> xc(k::window_trace_len(env.size(), tmpl.size()));
        std::vector<uint8_t> xflags;
        k::xcorr_trace(env, tmpl, xc, &xflags);
        for (std::size_t i = 0; i < xc.size(); ++i) CHECK(xflags[i] == 1);
    }
}

TEST_CASE("dispatch reports a variant and can be forced") {
    VariantGuard guard;
    const auto def = k::active_variant();
    CHECK((def == k::Variant::scalar || def == k::Variant::simd));
    k::force_variant(k::Variant::scalar);
    CHECK(k::active_variant() == k::Variant::scalar);
    if (k::simd_available()) {
        k::force_variant(k::Variant::simd);
        CHECK(k::active_variant() == k::Variant::simd);
    }
}

TEST_CASE("kernel size checks throw") {
    std::vector<double> env(50, 1.0);
    std::vector<double> out(5);
    CHECK_THROWS_AS(k::sd_trace(env, 4, out), std::invalid_argument);
    CHECK_THROWS_AS(k::sd_trace(env, 0, out), std::invalid_argument);
}
