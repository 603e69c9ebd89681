#include <doctest.h>

#include <cmath>

#include "tagsync/active.hpp"
#include "tagsync/channel.hpp"

using namespace tagsync;

namespace {
NumerologyConfig cfg256() {
    NumerologyConfig c;
    c.fft_size = 256;
    return c;
}

IqWaveform cfo_frame(double epsilon, double snr_db, const NumerologyConfig& cfg,
                     uint64_t seed) {
    const auto frame = build_downlink_frame(0, 0.010, cfg, seed);
    ChannelConfig ch;
    ch.epsilon = epsilon;
    ch.snr_db = snr_db;
    ch.scs_hz = cfg.scs_hz;
    ch.rng_seed = seed + 1;
    return apply_channel(frame, ch);
}

constexpr double kInfSnr = std::numeric_limits<double>::infinity();
} // namespace

TEST_CASE("cp-based cfo estimation is exact without noise") {
    const NumerologyConfig cfg = cfg256();
    for (const double eps : {0.0, 0.2, 0.4, -0.35}) {
        const auto y = cfo_frame(eps, kInfSnr, cfg, 7);
        // first data symbol starts at sample 0
        const CfoEstimate est = cp_cfo_estimate(y, cfg, 0);
        CHECK(std::fabs(est.epsilon_hat - eps) < (eps == 0.0 ? 1e-9 : 1e-6));
        CHECK(est.confidence > 0.0);
    }
}

TEST_CASE("cp-based cfo estimation wraps outside +-0.5") {
    const NumerologyConfig cfg = cfg256();
    const auto y = cfo_frame(0.7, kInfSnr, cfg, 8);
    const CfoEstimate est = cp_cfo_estimate(y, cfg, 0);
    CHECK(std::fabs(est.epsilon_hat - (-0.3)) < 1e-6);
}

TEST_CASE("cp-based cfo estimation rejects out-of-range symbols") {
    const NumerologyConfig cfg = cfg256();
    const auto y = cfo_frame(0.0, kInfSnr, cfg, 9);
    CHECK_THROWS_AS(cp_cfo_estimate(y, cfg, y.samples.size() - 10), std::invalid_argument);
}

TEST_CASE("iq fine timing: exact alignment without noise or cfo") {
    const NumerologyConfig cfg = cfg256();
    const auto y = cfo_frame(0.0, kInfSnr, cfg, 10);

    std::array<IqWaveform, 3> bodies;
    for (int i = 0; i < 3; ++i) {
        const auto sym = pss_time_domain(generate_pss_sequence(i), cfg);
        bodies[i].sample_rate_hz = sym.sample_rate_hz;
        bodies[i].samples.assign(sym.samples.begin() + cfg.resolved_cp(), sym.samples.end());
    }

    SyncResult res = iq_fine_timing(y, bodies, false, cfg);
    res.finalize(y.pss_centers, y.sample_rate_hz);
    REQUIRE(res.detections.size() == 2); // 10 ms = 2 periods
    for (double e : res.errors_us) CHECK(e == 0.0);
    for (const auto& d : res.detections) CHECK(d.nid2_guess == 0);
}

TEST_CASE("iq correlation is invariant to a constant phase rotation") {
    const NumerologyConfig cfg = cfg256();
    auto y = cfo_frame(0.0, 10.0, cfg, 11);

    std::array<IqWaveform, 3> bodies;
    for (int i = 0; i < 3; ++i) {
        const auto sym = pss_time_domain(generate_pss_sequence(i), cfg);
        bodies[i].sample_rate_hz = sym.sample_rate_hz;
        bodies[i].samples.assign(sym.samples.begin() + cfg.resolved_cp(), sym.samples.end());
    }
    const SyncResult base = iq_fine_timing(y, bodies, false, cfg);

    const cdouble rot{std::cos(1.1), std::sin(1.1)};
    for (auto& s : y.samples) s *= rot;
    const SyncResult rotated = iq_fine_timing(y, bodies, false, cfg);

    REQUIRE(base.detections.size() == rotated.detections.size());
    for (std::size_t i = 0; i < base.detections.size(); ++i) {
        CHECK(base.detections[i].center_index == rotated.detections[i].center_index);
        CHECK(base.detections[i].metric ==
              doctest::Approx(rotated.detections[i].metric).epsilon(1e-9));
    }
}

TEST_CASE("cp autocorrelation aligns to the symbol grid") {
    const NumerologyConfig cfg = cfg256();
    const auto y = cfo_frame(0.3, kInfSnr, cfg, 12);
    SyncResult res = active_autocorr_detect(y, cfg);
    finalize_mod_stride(res, y.pss_centers, cfg.symbol_stride(), y.sample_rate_hz);
    REQUIRE(!res.detections.empty());
    for (double e : res.errors_us) CHECK(e < 1e6 * 2.0 / y.sample_rate_hz);
}
