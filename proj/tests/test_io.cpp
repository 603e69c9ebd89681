#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "tagsync/io.hpp"
#include "tagsync/rng.hpp"

using namespace tagsync;

namespace {
struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("tagsync_io_" + std::to_string(std::rand()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};
} // namespace

TEST_CASE("waveform container round trip") {
    TempDir dir;
    NumerologyConfig cfg;
    cfg.fft_size = 128;
    const auto w = build_downlink_frame(1, 0.005, cfg, 5);
    write_waveform(dir.file("w.pssw"), w);
    const auto r = read_waveform(dir.file("w.pssw"));
    CHECK(r.sample_rate_hz == w.sample_rate_hz);
    REQUIRE(r.samples.size() == w.samples.size());
    for (std::size_t i = 0; i < w.samples.size(); i += 131) CHECK(r.samples[i] == w.samples[i]);
}

TEST_CASE("envelope and bitstream containers round trip") {
    TempDir dir;
    Envelope env;
    env.sample_rate_hz = 5e6;
    Rng rng(9);
    env.samples.resize(1000);
    for (auto& v : env.samples) v = std::fabs(rng.gaussian());
    write_envelope_bin(dir.file("e.pssw"), env);
    const auto e = read_envelope_bin(dir.file("e.pssw"));
    REQUIRE(e.samples.size() == env.samples.size());
    for (std::size_t i = 0; i < e.samples.size(); ++i) CHECK(e.samples[i] == env.samples[i]);

    BitStream bits;
    bits.sample_rate_hz = 5e6;
    bits.bits.resize(1003); // not a byte multiple
    for (auto& b : bits.bits) b = rng.next_u64() & 1;
    write_bits_bin(dir.file("b.pssw"), bits);
    const auto rb = read_bits_bin(dir.file("b.pssw"));
    REQUIRE(rb.bits.size() == bits.bits.size());
    for (std::size_t i = 0; i < bits.bits.size(); ++i) CHECK(rb.bits[i] == bits.bits[i]);
}

TEST_CASE("container kind mismatches are rejected") {
    TempDir dir;
    Envelope env;
    env.sample_rate_hz = 1e6;
    env.samples = {1.0, 2.0};
    write_envelope_bin(dir.file("e.pssw"), env);
    CHECK_THROWS_AS(read_waveform(dir.file("e.pssw")), std::runtime_error);
    CHECK_THROWS_AS(read_waveform(dir.file("missing.pssw")), std::runtime_error);
}

TEST_CASE("annotation sidecar is valid json with pss centers") {
    TempDir dir;
    NumerologyConfig cfg;
    cfg.fft_size = 128;
    const auto w = build_downlink_frame(2, 0.010, cfg, 6);
    write_annotations(dir.file("w.json"), w);

    std::ifstream f(dir.file("w.json"));
    nlohmann::json j;
    f >> j;
    CHECK(j.at("pss_centers").size() == w.pss_centers.size());
    CHECK(j.at("annotations").size() == w.annotations.size());
    // annotations describe in-range, non-overlapping spans
    std::size_t prev_end = 0;
    for (const auto& a : j.at("annotations")) {
        const auto start = a.at("start").get<std::size_t>();
        const auto len = a.at("length").get<std::size_t>();
        CHECK(start >= prev_end);
        CHECK(start + len <= w.samples.size());
        prev_end = start + len;
    }
}

TEST_CASE("envelope csv shape") {
    TempDir dir;
    Envelope env;
    env.sample_rate_hz = 1e6;
    env.samples = {0.5, 1.25, 3.0};
    write_envelope_csv(dir.file("e.csv"), env);
    std::ifstream f(dir.file("e.csv"));
    std::string line;
    std::getline(f, line);
    CHECK(line == "index,value");
    std::getline(f, line);
    CHECK(line == "0,0.5");
}

TEST_CASE("sync record csv shape") {
    TempDir dir;
    SyncResult res;
    res.method = MethodId::sd;
    Detection d;
    d.center_index = 100;
    d.commit_index = 120;
    res.detections.push_back(d);
    res.errors_us = {0.5};
    res.delays_us = {4.0};
    write_sync_records_csv(dir.file("r.csv"), {res}, {1});

    std::ifstream f(dir.file("r.csv"));
    std::string header, row;
    std::getline(f, header);
    std::getline(f, row);
    CHECK(header == "method,nid2_true,nid2_guess,center,error_us,delay_us,committed_at");
    CHECK(row == "sd,1,none,100,0.5,4,120");
}
