#pragma once

#include <array>

#include "tagsync/detect.hpp"
#include "tagsync/waveform.hpp"

namespace tagsync {

// IQ-domain reference receiver: cyclic-prefix CFO estimation plus fine
// timing by complex cross-correlation. Comparison oracle only; none of this
// fits a passive tag.

struct CfoEstimate {
    double epsilon_hat = 0.0; // normalized CFO, in (-0.5, 0.5]
    double confidence = 0.0;  // |summed CP correlation|
};

// epsilon_hat = arg( sum_k y*[s+k] y[s+k+N] ) / 2pi over the CP window,
// where symbol_start indexes the first CP sample.
CfoEstimate cp_cfo_estimate(const IqWaveform& iq, const NumerologyConfig& cfg,
                            std::size_t symbol_start);

// Normalized complex correlation C(theta, i) = |sum y[theta+n] p_i*[n]| /
// sum |y[theta+n]|^2 against the three CP-stripped PSS waveforms; one peak
// per period window. correct_cfo derotates with a CP-based estimate first.
SyncResult iq_fine_timing(const IqWaveform& iq, const std::array<IqWaveform, 3>& pss_iq,
                          bool correct_cfo, const NumerologyConfig& cfg);

// Timing from the strongest CP autocorrelation per period window. Aligns to
// the symbol grid only, which is all CP correlation can give.
SyncResult active_autocorr_detect(const IqWaveform& iq, const NumerologyConfig& cfg);

// Error of grid-aligned detections: distance to the nearest position
// congruent with a true center modulo the symbol stride.
void finalize_mod_stride(SyncResult& res, const std::vector<double>& true_centers,
                         int stride, double rate_hz);

} // namespace tagsync
