#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "tagsync/harness.hpp"

using namespace tagsync;

namespace {

ExperimentConfig small_config() {
    ExperimentConfig cfg;
    cfg.numerology.fft_size = 128;
    cfg.methods = {MethodId::sd};
    cfg.nid2_values = {0};
    cfg.tag_rates_hz = {3.84e6};
    cfg.snr_db_values = {std::numeric_limits<double>::infinity()};
    cfg.cfo_epsilons = {0.0};
    cfg.trials_per_point = 2;
    cfg.frame_duration_s = 0.011;
    cfg.rng_seed = 42;
    cfg.threads = 1;
    return cfg;
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f);
    return std::string(std::istreambuf_iterator<char>(f), {});
}

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const char* tag) {
        path = std::filesystem::temp_directory_path() / tag;
        std::filesystem::remove_all(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

} // namespace

TEST_CASE("noiseless trial succeeds with zero error") {
    ExperimentConfig cfg = small_config();
    PointConfig pc{MethodId::sd, 0, 3.84e6, std::numeric_limits<double>::infinity(), 0.0, &cfg};
    const TrialRecord rec = run_trial(pc, 1);
    CHECK_FALSE(rec.failed);
    CHECK(rec.success);
    REQUIRE(rec.errors_us.size() == 2); // 11 ms = 2 full periods
    CHECK(rec.median_error_us == 0.0);
    CHECK(rec.ops > 0);
}

TEST_CASE("sweep validates its grids") {
    ExperimentConfig cfg = small_config();
    cfg.methods.clear();
    CHECK_THROWS_AS(sweep(cfg), std::invalid_argument);

    cfg = small_config();
    cfg.tag_rates_hz = {5e9}; // above the waveform rate
    CHECK_THROWS_AS(sweep(cfg), std::invalid_argument);

    cfg = small_config();
    cfg.trials_per_point = 0;
    CHECK_THROWS_AS(sweep(cfg), std::invalid_argument);
}

TEST_CASE("sweep summaries aggregate per-trial success") {
    ExperimentConfig cfg = small_config();
    cfg.methods = {MethodId::sd, MethodId::sa};
    const SweepResult res = sweep(cfg);
    REQUIRE(res.summaries.size() == 2);
    REQUIRE(res.trials.size() == 4);
    for (const auto& s : res.summaries) {
        CHECK(s.success_rate >= 0.0);
        CHECK(s.success_rate <= 1.0);
        CHECK(s.trials == 2);
        CHECK(s.rho == 128);
    }
    double mean = 0;
    for (const auto& t : res.trials)
        if (t.method == MethodId::sd) mean += t.success ? 0.5 : 0.0;
    CHECK(res.summaries[0].success_rate == mean);
}

TEST_CASE("file-backed sweep is reproducible and resumable") {
    TempDir a("tagsync_sweep_a"), b("tagsync_sweep_b");
    ExperimentConfig cfg = small_config();

    run_sweep_to_files(cfg, a.path.string(), "csv");
    run_sweep_to_files(cfg, b.path.string(), "csv");
    CHECK(slurp((a.path / "trials.csv").string()) == slurp((b.path / "trials.csv").string()));
    CHECK(slurp((a.path / "summary.csv").string()) == slurp((b.path / "summary.csv").string()));

    // resuming over a complete run leaves the outputs unchanged
    const std::string before = slurp((a.path / "summary.csv").string());
    run_sweep_to_files(cfg, a.path.string(), "csv");
    CHECK(slurp((a.path / "summary.csv").string()) == before);

    const std::string header = slurp((a.path / "trials.csv").string());
    CHECK(header.rfind("method,nid2,rate_hz,snr_db,trial,error_us,delay_us,success,ops", 0) == 0);
}

TEST_CASE("config files load with defaults and reject junk") {
    TempDir dir("tagsync_cfg");
    std::filesystem::create_directories(dir.path);
    const std::string path = (dir.path / "cfg.json").string();
    {
        std::ofstream f(path);
        f << R"({"methods":["sd_q","nft"],"tag_rates_hz":[5e6],"trials_per_point":3,
                 "numerology":{"fft_size":256},"thresholds":{"r_threshold":0.75}})";
    }
    const ExperimentConfig cfg = load_experiment_config(path);
    CHECK(cfg.methods.size() == 2);
    CHECK(cfg.methods[0] == MethodId::sd_q);
    CHECK(cfg.trials_per_point == 3);
    CHECK(cfg.thresholds.r_threshold == 0.75);
    CHECK(cfg.thresholds.sym_threshold == 0.7); // default preserved

    {
        std::ofstream f(path);
        f << "{not json";
    }
    CHECK_THROWS_AS(load_experiment_config(path), std::invalid_argument);
    CHECK_THROWS_AS(load_experiment_config("/nonexistent/cfg.json"), std::runtime_error);
}

TEST_CASE("offset-zero ber is clean at 15 dB for all modulations") {
    const double offsets[] = {0.0};
    for (const auto mod : {Modulation::bpsk, Modulation::qpsk, Modulation::psk16}) {
        const auto recs =
            ber_experiment(mod, std::span<const double>(offsets, 1), 15.0, 20000, 3);
        REQUIRE(recs.size() == 1);
        CHECK(recs[0].ber < 1e-3);
    }
}

TEST_CASE("ber grows with offset; 16psk crosses first") {
    std::vector<double> offsets;
    for (double o = 0; o <= 30.0; o += 3.0) offsets.push_back(o);

    std::vector<double> crossing(3, 1e9);
    int mi = 0;
    for (const auto mod : {Modulation::bpsk, Modulation::qpsk, Modulation::psk16}) {
        const auto recs = ber_experiment(
            mod, std::span<const double>(offsets.data(), offsets.size()), 15.0, 20000, 3);
        REQUIRE(recs.size() == offsets.size());
        for (std::size_t i = 1; i < recs.size(); ++i) {
            const double slack =
                2.0 * std::sqrt(std::max(recs[i - 1].ber, 1e-6) / (4.0 * recs[i].trials));
            CHECK(recs[i].ber >= recs[i - 1].ber - slack);
        }
        for (const auto& r : recs)
            if (r.ber > 1e-3) {
                crossing[mi] = std::min(crossing[mi], r.timing_offset_us);
            }
        ++mi;
    }
    // 16psk breaks first, near the 8 us operating bound; bpsk and qpsk both
    // hold out to roughly half a symbol
    CHECK(crossing[2] < crossing[1]);
    CHECK(crossing[2] < crossing[0]);
    CHECK(crossing[1] <= crossing[0]);
    CHECK(crossing[2] >= 3.0);
    CHECK(crossing[2] <= 9.0);
}

TEST_CASE("sd-synchronized ber beats random offsets at 15 dB") {
    const double snrs[] = {15.0};
    const auto recs = with_without_sync_ber(std::span<const double>(snrs, 1), 20, 250, 5);
    REQUIRE(recs.size() == 2);
    const auto& with = recs[0];
    const auto& without = recs[1];
    CHECK(with.label == "sd-sync");
    CHECK(without.label == "random-offset");
    CHECK(without.ber > 1e-2);
    CHECK(with.ber <= without.ber / 10.0);
}
