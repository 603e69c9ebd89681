#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "tagsync/waveform.hpp"

namespace tagsync {

// Link impairments between gNodeB and tag. Exactly one of cfo_hz / epsilon
// is set; the other is derived through scs_hz. snr_db = +inf disables noise.
struct ChannelConfig {
    double snr_db = std::numeric_limits<double>::infinity();
    std::optional<double> cfo_hz;
    std::optional<double> epsilon; // CFO normalized to subcarrier spacing
    double scs_hz = 30e3;
    uint64_t rng_seed = 0;

    double resolved_epsilon() const;
    double resolved_cfo_hz() const;
    void validate() const;
};

// Real, non-negative magnitude samples at the tag rate. true_pss_centers are
// rescaled from the waveform annotations (fractional tag-sample indices).
struct Envelope {
    std::vector<double> samples;
    double sample_rate_hz = 0.0;
    std::vector<double> true_pss_centers;
};

// 1-bit comparator output, one bit per envelope sample.
struct BitStream {
    std::vector<uint8_t> bits;
    double sample_rate_hz = 0.0;
    std::vector<double> threshold_trace;
    std::vector<double> true_pss_centers;
};

// y[n] = x[n] e^{j 2 pi eps n / N} + AWGN sized against the measured signal
// power. Annotations and ground truth carry over unchanged.
IqWaveform apply_channel(const IqWaveform& wave, const ChannelConfig& cfg);

// Magnitude -> centered moving average over smooth_len waveform samples ->
// linear-interpolation resampling to tag_rate_hz.
Envelope extract_envelope(const IqWaveform& wave, double tag_rate_hz, int smooth_len = 1);

// Smoothing window spanning one tag-rate sample period, odd-sized.
int default_smooth_len(double wave_rate_hz, double tag_rate_hz);

// Uniform mid-rise quantization to 2^bits levels over [0, max(env)].
Envelope quantize_adc(const Envelope& env, int bits);

struct ThresholdPolicy {
    enum class Kind { fixed, sliding_mean };
    Kind kind = Kind::sliding_mean;
    double fixed_value = 0.0;
    int window = 0; // sliding mean width, centered

    static ThresholdPolicy fixed(double v) { return {Kind::fixed, v, 0}; }
    static ThresholdPolicy sliding_mean(int window) { return {Kind::sliding_mean, 0.0, window}; }
};

// bit[n] = env[n] >= threshold[n]; the threshold trace is recorded.
BitStream quantize_comparator(const Envelope& env, const ThresholdPolicy& policy);

} // namespace tagsync
