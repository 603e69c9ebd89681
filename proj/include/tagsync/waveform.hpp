#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tagsync/common.hpp"
#include "tagsync/pss.hpp"

namespace tagsync {

// Downlink numerology. The waveform sample rate is fft_size * scs_hz, so one
// OFDM symbol body always lasts 1/scs_hz (33.33 us at 30 kHz spacing).
struct NumerologyConfig {
    double scs_hz = 30e3;
    int fft_size = 256;       // power of two, >= 128
    int cp_samples = -1;      // -1 selects round(0.0703 * fft_size)
    double ssb_period_s = 5e-3;

    double sample_rate_hz() const { return scs_hz * fft_size; }
    int resolved_cp() const;
    int symbol_stride() const { return fft_size + resolved_cp(); }
    void validate() const; // throws std::invalid_argument
};

struct Annotation {
    std::string label;   // "pss", "pbch", "sss+pbch", "data"
    std::size_t start = 0;
    std::size_t length = 0;
};

struct IqWaveform {
    std::vector<cdouble> samples;
    double sample_rate_hz = 0.0;
    std::vector<Annotation> annotations;
    // Ground-truth PSS symbol centers (cp_start + cp + fft/2), in samples.
    std::vector<double> pss_centers;
};

// Inverse DFT with 1/N scaling; length must be a power of two.
std::vector<cdouble> idft(std::span<const cdouble> spectrum);

// One OFDM symbol (CP + body) carrying the PSS on subcarriers 1..127.
IqWaveform pss_time_domain(const PssFreqSequence& seq, const NumerologyConfig& cfg);

// Four consecutive symbols: #0 PSS, #1/#3 pseudo-random QPSK broadcast fill,
// #2 BPSK secondary-sync stand-in flanked by QPSK fill.
IqWaveform build_ssb(int nid2, uint64_t payload_seed, const NumerologyConfig& cfg);

// Continuous frame: one SSB per ssb_period at a seed-chosen symbol offset,
// every other symbol filled with pseudo-random QPSK data. No idle gaps.
IqWaveform build_downlink_frame(int nid2, double duration_s,
                                const NumerologyConfig& cfg, uint64_t payload_seed);

} // namespace tagsync
