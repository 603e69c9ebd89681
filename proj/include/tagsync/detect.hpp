#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "tagsync/channel.hpp"
#include "tagsync/common.hpp"
#include "tagsync/waveform.hpp"

namespace tagsync {

// Shared detector configuration. rho defaults to round(tag_rate / scs), one
// PSS body worth of tag samples; mirror arms pair k = 1..rho/2 around a
// center.
struct SyncParams {
    int rho = 0;
    int period_samples = 0;

    double r_threshold = 0.8;   // cross-correlation commit threshold
    double sym_threshold = 0.7; // symmetry confirmation threshold
    double sd_gamma = 0.3;      // threshold mode: minima below gamma * local mean

    // period_search commits one detection per full period window (the tag
    // knows the SSB periodicity); threshold scans freely for first
    // acquisition.
    enum class Mode { period_search, threshold };
    Mode mode = Mode::period_search;
    // In period_search mode detectors normally commit the best candidate of
    // each window; gating additionally drops candidates that fail the
    // threshold (used by the one-template baseline).
    bool gate_by_threshold = false;

    // rising-edge baseline knobs (energy ratio of adjacent short windows)
    int edge_window = 0; // 0 selects max(2, rho/8)
    double edge_ratio = 1.5;

    int arms() const { return rho / 2; }
    int sst_refine_radius() const { return std::max(4, arms() / 2); }

    static SyncParams for_rate(double tag_rate_hz, const NumerologyConfig& cfg);
    void validate() const;
};

struct PssTemplate {
    int nid2 = 0;
    std::vector<double> values;
    bool half = false;
};

struct BitTemplate {
    int nid2 = 0;
    std::vector<uint8_t> bits;
    bool half = false;
};

struct MetricTrace {
    enum class Kind { cross_corr, sym_autocorr, sd_sigma, hamming };
    Kind kind = Kind::cross_corr;
    // env/bit index of values[0]: window start for cross_corr/hamming,
    // window center for the symmetric kinds.
    std::size_t first_index = 0;
    std::vector<double> values;
    std::vector<uint8_t> flagged; // zero-variance positions
};

struct Detection {
    long center_index = 0;
    std::optional<int> nid2_guess;
    long commit_index = 0; // last sample observed before deciding
    double metric = 0.0;
};

struct SyncResult {
    MethodId method = MethodId::sd;
    std::vector<Detection> detections; // sorted by center_index
    std::vector<double> errors_us;
    std::vector<double> delays_us;
    int rejected_candidates = 0;
    bool acquisition_failed = false;
    uint64_t stage1_windows = 0; // metric evaluations, for load accounting
    uint64_t stage2_windows = 0; // refinement correlations (SST family)

    // Matches detections against ground-truth centers (nearest wins).
    void finalize(const std::vector<double>& true_centers, double rate_hz);
    double median_error_us() const; // +inf when no detections
};

// ---- metric traces ---------------------------------------------------------

// Sliding Pearson correlation of env against a full/half PSS template.
MetricTrace cross_correlate(const Envelope& env, const PssTemplate& tmpl,
                            const SyncParams& params);
// Pearson correlation of forward vs mirrored backward arm per center.
MetricTrace symmetric_autocorr(const Envelope& env, const SyncParams& params);
// Sum of |S(t+k) - S(t-k)| over the arms per center.
MetricTrace sd_metric(const Envelope& env, const SyncParams& params);
// Bit-domain counterparts (counts as values).
MetricTrace sd_q_metric(const BitStream& bits, const SyncParams& params);
MetricTrace sa_q_metric(const BitStream& bits, const SyncParams& params);

// ---- detectors --------------------------------------------------------------

SyncResult nft_detect(const Envelope& env, const std::array<PssTemplate, 3>& templates,
                      const SyncParams& params);
SyncResult sa_detect(const Envelope& env, const SyncParams& params);
SyncResult sst_detect(const Envelope& env, const std::array<PssTemplate, 3>& half_templates,
                      const SyncParams& params);
SyncResult sd_detect(const Envelope& env, const SyncParams& params);
SyncResult sd_plus_detect(const Envelope& env, const SyncParams& params);

enum class QuantMethod { nft_q, sst_q, sa_q, sd_q };
SyncResult quantized_detect(const BitStream& bits, QuantMethod method,
                            const std::vector<BitTemplate>& bit_templates,
                            const SyncParams& params);

// One-template cross-correlation (always threshold-gated) and rising-edge
// energy detection.
SyncResult baseline_one_template(const Envelope& env, const PssTemplate& tmpl0,
                                 const SyncParams& params);
SyncResult baseline_rising_edge(const Envelope& env, const SyncParams& params);

// ---- template construction ---------------------------------------------------

// Templates are cut from a noiseless SSB rendered with a fixed payload seed,
// processed through the same envelope front end as received frames.
PssTemplate make_pss_template(int nid2, const NumerologyConfig& cfg, double tag_rate_hz,
                              int smooth_len, const SyncParams& params, bool half);
BitTemplate make_bit_template(int nid2, const NumerologyConfig& cfg, double tag_rate_hz,
                              int smooth_len, const ThresholdPolicy& policy,
                              const SyncParams& params, bool half);

} // namespace tagsync
