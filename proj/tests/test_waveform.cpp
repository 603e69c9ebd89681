#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "tagsync/channel.hpp"
#include "tagsync/detect.hpp"
#include "tagsync/rng.hpp"
#include "tagsync/waveform.hpp"

using namespace tagsync;

namespace {
NumerologyConfig cfg128() {
    NumerologyConfig c;
    c.fft_size = 128;
    return c;
}
} // namespace

TEST_CASE("idft matches the quadratic-time reference") {
    Rng rng(7);
    for (const int n : {128, 256}) {
        std::vector<cdouble> spec(n);
        for (auto& v : spec) v = {rng.gaussian(), rng.gaussian()};
        const auto fast = idft(std::span<const cdouble>(spec.data(), spec.size()));
        const auto slow = oracles::naive_idft(spec);
        for (int i = 0; i < n; ++i) CHECK(std::abs(fast[i] - slow[i]) < 1e-12);
    }
}

TEST_CASE("idft rejects non-power-of-two input") {
    std::vector<cdouble> spec(100);
    CHECK_THROWS_AS(idft(std::span<const cdouble>(spec.data(), spec.size())),
                    std::invalid_argument);
}

TEST_CASE("pss symbol: conjugate central symmetry and mirror envelope") {
    for (int nid2 = 0; nid2 < 3; ++nid2) {
        for (const int nfft : {128, 256, 512}) {
            NumerologyConfig cfg;
            cfg.fft_size = nfft;
            const auto w = pss_time_domain(generate_pss_sequence(nid2), cfg);
            const int cp = cfg.resolved_cp();
            const std::vector<cdouble> body(w.samples.begin() + cp, w.samples.end());
            REQUIRE(static_cast<int>(body.size()) == nfft);
            double worst_conj = 0, worst_mag = 0;
            for (int n = 1; n < nfft; ++n) {
                worst_conj = std::max(worst_conj, std::abs(body[n] - std::conj(body[nfft - n])));
                worst_mag = std::max(worst_mag,
                                     std::fabs(std::abs(body[n]) - std::abs(body[nfft - n])));
            }
            CHECK(worst_conj < 1e-9);
            CHECK(worst_mag < 1e-9);
        }
    }
}

TEST_CASE("pss symbol energy follows the 1/N convention") {
    NumerologyConfig cfg = cfg128();
    const auto w = pss_time_domain(generate_pss_sequence(1), cfg);
    const int cp = cfg.resolved_cp();
    double energy = 0;
    for (std::size_t i = cp; i < w.samples.size(); ++i) energy += std::norm(w.samples[i]);
    CHECK(energy == doctest::Approx(127.0 / cfg.fft_size).epsilon(1e-12));
}

TEST_CASE("pss symbol carries a proper cyclic prefix") {
    NumerologyConfig cfg = cfg128();
    const auto w = pss_time_domain(generate_pss_sequence(0), cfg);
    const int cp = cfg.resolved_cp();
    const int n = cfg.fft_size;
    for (int i = 0; i < cp; ++i)
        CHECK(std::abs(w.samples[i] - w.samples[n + i]) == 0.0);
}

TEST_CASE("ssb layout and determinism") {
    NumerologyConfig cfg = cfg128();
    const auto a = build_ssb(2, 99, cfg);
    const auto b = build_ssb(2, 99, cfg);
    CHECK(a.samples.size() == 4u * (cfg.fft_size + cfg.resolved_cp()));
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i) CHECK(a.samples[i] == b.samples[i]);
    CHECK(a.annotations.size() == 4);
    CHECK(a.annotations[0].label == "pss");
    CHECK(a.annotations[2].label == "sss+pbch");
    REQUIRE(a.pss_centers.size() == 1);
    CHECK(a.pss_centers[0] == cfg.resolved_cp() + cfg.fft_size / 2);
}

TEST_CASE("only ssb symbol #0 is mirror symmetric") {
    NumerologyConfig cfg = cfg128();
    const double rate = cfg.sample_rate_hz();
    const int stride = cfg.symbol_stride();
    SyncParams params;
    params.rho = cfg.fft_size - 2; // arms stay inside one symbol body
    params.mode = SyncParams::Mode::threshold;
    params.period_samples = 0;

    for (const uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
        const auto ssb = build_ssb(0, seed, cfg);
        const Envelope env = extract_envelope(ssb, rate, 1);
        const MetricTrace tr = sd_metric(env, params);
        double mean = 0;
        for (double v : tr.values) mean += v;
        mean /= static_cast<double>(tr.values.size());

        const auto center0 = static_cast<std::size_t>(ssb.pss_centers[0]);
        const double at_pss = tr.values[center0 - tr.first_index];
        CHECK(at_pss / mean < 0.1);

        for (int s = 1; s < 4; ++s) {
            const std::size_t c = s * stride + cfg.resolved_cp() + cfg.fft_size / 2;
            if (c - tr.first_index >= tr.values.size()) continue;
            CHECK(tr.values[c - tr.first_index] / mean > 0.5);
        }
    }
}

TEST_CASE("downlink frame: periodic PSS placement, no idle gaps") {
    NumerologyConfig cfg = cfg128();
    const double rate = cfg.sample_rate_hz();
    const auto frame = build_downlink_frame(1, 0.050, cfg, 1234);

    CHECK(frame.samples.size() == static_cast<std::size_t>(std::llround(0.050 * rate)));
    REQUIRE(frame.pss_centers.size() == 10);

    const auto period = static_cast<long>(std::llround(cfg.ssb_period_s * rate));
    for (std::size_t k = 1; k < frame.pss_centers.size(); ++k)
        CHECK(static_cast<long>(frame.pss_centers[k] - frame.pss_centers[0]) % period == 0);

    // every symbol-length block carries energy
    const int stride = cfg.symbol_stride();
    for (std::size_t pos = 0; pos + stride <= frame.samples.size();
         pos += static_cast<std::size_t>(stride)) {
        double e = 0;
        for (int i = 0; i < stride; ++i) e += std::norm(frame.samples[pos + i]);
        CHECK(e > 0.0);
    }

    // identical inputs, identical frames
    const auto again = build_downlink_frame(1, 0.050, cfg, 1234);
    REQUIRE(again.samples.size() == frame.samples.size());
    for (std::size_t i = 0; i < frame.samples.size(); i += 97)
        CHECK(again.samples[i] == frame.samples[i]);
}

TEST_CASE("downlink frame rejects too-short durations") {
    NumerologyConfig cfg = cfg128();
    CHECK_THROWS_AS(build_downlink_frame(0, 0.004, cfg, 1), std::invalid_argument);
}

TEST_CASE("numerology validation") {
    NumerologyConfig cfg;
    cfg.fft_size = 100;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.fft_size = 64;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = NumerologyConfig{};
    CHECK(cfg.sample_rate_hz() == doctest::Approx(30e3 * 256));
    CHECK(cfg.resolved_cp() == 18);
}
