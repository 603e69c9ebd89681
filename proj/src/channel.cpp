#include "tagsync/channel.hpp"

#include <cmath>
#include <stdexcept>

#include "tagsync/rng.hpp"

namespace tagsync {

double ChannelConfig::resolved_epsilon() const {
    if (epsilon) return *epsilon;
    if (cfo_hz) return *cfo_hz / scs_hz;
    return 0.0;
}

double ChannelConfig::resolved_cfo_hz() const { return resolved_epsilon() * scs_hz; }

void ChannelConfig::validate() const {
    if (epsilon && cfo_hz)
        throw std::invalid_argument("ChannelConfig: set cfo_hz or epsilon, not both");
    if (!(scs_hz > 0.0))
        throw std::invalid_argument("ChannelConfig: scs_hz must be positive");
}

IqWaveform apply_channel(const IqWaveform& wave, const ChannelConfig& cfg) {
    cfg.validate();
    IqWaveform out = wave;

    const double eps = cfg.resolved_epsilon();
    if (eps != 0.0) {
        // phase step 2*pi*eps/N with N = rate/scs
        const double step = 2.0 * 3.14159265358979323846 * cfg.resolved_cfo_hz() / wave.sample_rate_hz;
        for (std::size_t n = 0; n < out.samples.size(); ++n) {
            const double ph = step * static_cast<double>(n);
            out.samples[n] *= cdouble{std::cos(ph), std::sin(ph)};
        }
    }

    if (std::isfinite(cfg.snr_db)) {
        double power = 0.0;
        for (const auto& s : wave.samples) power += std::norm(s);
        power /= static_cast<double>(wave.samples.size());
        const double noise_var = power / std::pow(10.0, cfg.snr_db / 10.0);
        Rng rng(cfg.rng_seed);
        for (auto& s : out.samples) s += rng.cgaussian(noise_var);
    }
    return out;
}

int default_smooth_len(double wave_rate_hz, double tag_rate_hz) {
    // one tag-sample duration: the detector RC tracks the tag clock
    int w = static_cast<int>(std::lround(wave_rate_hz / tag_rate_hz));
    if (w < 1) w = 1;
    if ((w & 1) == 0) ++w;
    return w;
}

Envelope extract_envelope(const IqWaveform& wave, double tag_rate_hz, int smooth_len) {
    if (!(tag_rate_hz > 0.0) || tag_rate_hz > wave.sample_rate_hz)
        throw std::invalid_argument("extract_envelope: tag rate must be in (0, waveform rate]");
    if (smooth_len < 1)
        throw std::invalid_argument("extract_envelope: smooth_len must be >= 1");

    const std::size_t n = wave.samples.size();
    std::vector<double> mag(n);
    for (std::size_t i = 0; i < n; ++i) mag[i] = std::abs(wave.samples[i]);

    // centered moving average; windows shrink at the edges
    std::vector<double> smooth;
    if (smooth_len == 1) {
        smooth = std::move(mag);
    } else {
        smooth.resize(n);
        const int h = smooth_len / 2;
        std::vector<double> prefix(n + 1, 0.0);
        for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + mag[i];
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t lo = i >= static_cast<std::size_t>(h) ? i - h : 0;
            const std::size_t hi = std::min(n - 1, i + static_cast<std::size_t>(h));
            smooth[i] = (prefix[hi + 1] - prefix[lo]) / static_cast<double>(hi - lo + 1);
        }
    }

    Envelope env;
    env.sample_rate_hz = tag_rate_hz;
    const double ratio = wave.sample_rate_hz / tag_rate_hz;
    const auto n_out = static_cast<std::size_t>(std::floor(static_cast<double>(n - 1) / ratio)) + 1;
    env.samples.resize(n_out);
    for (std::size_t i = 0; i < n_out; ++i) {
        const double p = static_cast<double>(i) * ratio;
        const auto lo = static_cast<std::size_t>(p);
        const double frac = p - static_cast<double>(lo);
        env.samples[i] = (lo + 1 < n) ? smooth[lo] * (1.0 - frac) + smooth[lo + 1] * frac
                                      : smooth[lo];
    }

    env.true_pss_centers.reserve(wave.pss_centers.size());
    for (double c : wave.pss_centers) env.true_pss_centers.push_back(c / ratio);
    return env;
}

Envelope quantize_adc(const Envelope& env, int bits) {
    if (bits < 1 || bits > 16)
        throw std::invalid_argument("quantize_adc: bits must be in [1, 16]");
    if (env.samples.empty())
        throw std::invalid_argument("quantize_adc: empty envelope");

    double peak = 0.0;
    for (double v : env.samples) peak = std::max(peak, v);

    Envelope out = env;
    if (peak <= 0.0) return out; // all-zero input quantizes to itself

    const double step = peak / static_cast<double>(1 << bits);
    for (auto& v : out.samples) {
        double level = std::floor(v / step);
        if (level >= static_cast<double>(1 << bits)) level = (1 << bits) - 1;
        v = (level + 0.5) * step;
    }
    return out;
}

BitStream quantize_comparator(const Envelope& env, const ThresholdPolicy& policy) {
    const std::size_t n = env.samples.size();
    BitStream bs;
    bs.sample_rate_hz = env.sample_rate_hz;
    bs.true_pss_centers = env.true_pss_centers;
    bs.bits.resize(n);
    bs.threshold_trace.resize(n);

    switch (policy.kind) {
        case ThresholdPolicy::Kind::fixed:
            for (std::size_t i = 0; i < n; ++i) {
                bs.threshold_trace[i] = policy.fixed_value;
                bs.bits[i] = env.samples[i] >= policy.fixed_value ? 1 : 0;
            }
            break;
        case ThresholdPolicy::Kind::sliding_mean: {
            if (policy.window < 1)
                throw std::invalid_argument("quantize_comparator: sliding-mean window must be >= 1");
            const int h = policy.window / 2;
            std::vector<double> prefix(n + 1, 0.0);
            for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + env.samples[i];
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t lo = i >= static_cast<std::size_t>(h) ? i - h : 0;
                const std::size_t hi = std::min(n - 1, i + static_cast<std::size_t>(h));
                const double thr = (prefix[hi + 1] - prefix[lo]) / static_cast<double>(hi - lo + 1);
                bs.threshold_trace[i] = thr;
                bs.bits[i] = env.samples[i] >= thr ? 1 : 0;
            }
            break;
        }
    }
    return bs;
}

} // namespace tagsync
