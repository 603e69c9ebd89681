#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tagsync/channel.hpp"
#include "tagsync/common.hpp"
#include "tagsync/detect.hpp"
#include "tagsync/waveform.hpp"

namespace tagsync {

struct Thresholds {
    double r_threshold = 0.8;
    double sym_threshold = 0.7;
    double sd_gamma = 0.3;
};

// Grid-driven experiment description. Every (method, nid2, rate, snr, cfo)
// combination is one point; each point runs trials_per_point seeded trials.
struct ExperimentConfig {
    std::vector<MethodId> methods{MethodId::sd_q};
    std::vector<int> nid2_values{0};
    std::vector<double> tag_rates_hz{1e6, 1.92e6, 3.84e6, 5e6, 7.68e6};
    std::vector<double> snr_db_values{15.0};
    std::vector<double> cfo_epsilons{0.0};
    int trials_per_point = 1;
    double frame_duration_s = 0.011; // two SSB periods plus margin
    uint64_t rng_seed = 1;
    NumerologyConfig numerology;
    Thresholds thresholds;
    std::string output_path;

    int adc_bits = 12;         // envelope depth for the real-valued detectors
    int smooth_len = 0;        // 0 = default_smooth_len(wave_rate, tag_rate)
    int comparator_window = 0; // 0 = one PSS window
    std::optional<int> rho_override;
    int threads = 0; // 0 = hardware concurrency

    void validate() const;
};

ExperimentConfig load_experiment_config(const std::string& path); // JSON

struct PointConfig {
    MethodId method = MethodId::sd_q;
    int nid2 = 0;
    double tag_rate_hz = 5e6;
    double snr_db = 15.0;
    double epsilon = 0.0;
    const ExperimentConfig* exp = nullptr;
};

struct TrialRecord {
    MethodId method = MethodId::sd_q;
    int nid2 = 0;
    double tag_rate_hz = 0, snr_db = 0, epsilon = 0;
    int trial = 0;
    std::vector<double> errors_us;
    std::vector<double> delays_us;
    double median_error_us = 0;
    double mean_delay_us = 0;
    bool success = false; // detections present and median error < 8 us
    unsigned long long ops = 0;
    bool failed = false; // aborted by an error, recorded not fatal
};

// Frame -> channel -> front end -> detector -> metrics, deterministic per seed.
TrialRecord run_trial(const PointConfig& point, uint64_t seed);

struct PointSummary {
    std::size_t point_index = 0;
    MethodId method = MethodId::sd_q;
    int nid2 = 0;
    double tag_rate_hz = 0, snr_db = 0, epsilon = 0;
    int trials = 0;
    double median_error_us = 0, q1_error_us = 0, q3_error_us = 0;
    double mean_delay_us = 0;
    double success_rate = 0;
    unsigned long long total_ops = 0;
    int rho = 0;
    Thresholds thresholds;
};

struct SweepResult {
    std::vector<TrialRecord> trials;
    std::vector<PointSummary> summaries;
};

std::vector<PointConfig> expand_points(const ExperimentConfig& cfg);
SweepResult sweep(const ExperimentConfig& cfg);

// File-backed sweep: trials + summary tables under out_dir, resumable by
// point index (existing summary rows are kept and their points skipped).
void run_sweep_to_files(const ExperimentConfig& cfg, const std::string& out_dir,
                        const std::string& format); // "csv" or "json"

// ---- BER experiments --------------------------------------------------------

enum class Modulation { bpsk, qpsk, psk16 };
const char* to_string(Modulation m);
Modulation modulation_from_string(const std::string& name);

struct BerRecord {
    Modulation modulation = Modulation::qpsk;
    std::string label;         // "offset", "sd-sync", "random-offset"
    double timing_offset_us = 0;
    double snr_db = 0;
    double ber = 0;
    long trials = 0; // demodulated symbols
};

// Single-symbol backscatter demodulation with the receive window shifted by
// a fixed offset; misaligned energy from the neighbour symbol acts as ISI.
std::vector<BerRecord> ber_experiment(Modulation mod, std::span<const double> offsets_us,
                                      double snr_db, int symbols_per_offset, uint64_t seed);

// SD-synchronized demodulation vs uniformly random window offsets, per SNR.
std::vector<BerRecord> with_without_sync_ber(std::span<const double> snr_db_grid,
                                             int sync_trials, int symbols_per_trial,
                                             uint64_t seed);

void write_ber_csv(const std::string& path, const std::vector<BerRecord>& records);

} // namespace tagsync
