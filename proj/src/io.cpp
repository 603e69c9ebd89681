#include "tagsync/io.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace tagsync {

namespace {

constexpr char kMagic[4] = {'P', 'S', 'S', 'W'};

struct Header {
    uint16_t version = 0;
    double sample_rate_hz = 0.0;
    uint64_t count = 0;
};

void write_header(std::ofstream& f, uint16_t version, double rate, uint64_t count) {
    f.write(kMagic, 4);
    f.write(reinterpret_cast<const char*>(&version), sizeof version);
    f.write(reinterpret_cast<const char*>(&rate), sizeof rate);
    f.write(reinterpret_cast<const char*>(&count), sizeof count);
}

Header read_header(std::ifstream& f, uint16_t expected_version, const std::string& path) {
    char magic[4];
    Header h;
    f.read(magic, 4);
    f.read(reinterpret_cast<char*>(&h.version), sizeof h.version);
    f.read(reinterpret_cast<char*>(&h.sample_rate_hz), sizeof h.sample_rate_hz);
    f.read(reinterpret_cast<char*>(&h.count), sizeof h.count);
    if (!f || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("not a PSSW container: " + path);
    if (h.version != expected_version)
        throw std::runtime_error("unexpected PSSW payload kind in " + path);
    return h;
}

std::ofstream open_out(const std::string& path, bool binary) {
    std::ofstream f(path, binary ? std::ios::binary : std::ios::out);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    return f;
}

std::ifstream open_in(const std::string& path, bool binary) {
    std::ifstream f(path, binary ? std::ios::binary : std::ios::in);
    if (!f) throw std::runtime_error("cannot open for reading: " + path);
    return f;
}

void finish(std::ofstream& f, const std::string& path) {
    f.flush();
    if (!f) throw std::runtime_error("write failed: " + path);
}

} // namespace

void write_waveform(const std::string& path, const IqWaveform& wave) {
    auto f = open_out(path, true);
    write_header(f, 1, wave.sample_rate_hz, wave.samples.size());
    for (const cdouble& s : wave.samples) {
        const double re = s.real(), im = s.imag();
        f.write(reinterpret_cast<const char*>(&re), sizeof re);
        f.write(reinterpret_cast<const char*>(&im), sizeof im);
    }
    finish(f, path);
}

IqWaveform read_waveform(const std::string& path) {
    auto f = open_in(path, true);
    const Header h = read_header(f, 1, path);
    IqWaveform w;
    w.sample_rate_hz = h.sample_rate_hz;
    w.samples.resize(h.count);
    for (auto& s : w.samples) {
        double re = 0, im = 0;
        f.read(reinterpret_cast<char*>(&re), sizeof re);
        f.read(reinterpret_cast<char*>(&im), sizeof im);
        s = {re, im};
    }
    if (!f) throw std::runtime_error("truncated PSSW container: " + path);
    return w;
}

void write_envelope_bin(const std::string& path, const Envelope& env) {
    auto f = open_out(path, true);
    write_header(f, 2, env.sample_rate_hz, env.samples.size());
    f.write(reinterpret_cast<const char*>(env.samples.data()),
            static_cast<std::streamsize>(env.samples.size() * sizeof(double)));
    finish(f, path);
}

Envelope read_envelope_bin(const std::string& path) {
    auto f = open_in(path, true);
    const Header h = read_header(f, 2, path);
    Envelope e;
    e.sample_rate_hz = h.sample_rate_hz;
    e.samples.resize(h.count);
    f.read(reinterpret_cast<char*>(e.samples.data()),
           static_cast<std::streamsize>(h.count * sizeof(double)));
    if (!f) throw std::runtime_error("truncated PSSW container: " + path);
    return e;
}

void write_bits_bin(const std::string& path, const BitStream& bits) {
    auto f = open_out(path, true);
    write_header(f, 3, bits.sample_rate_hz, bits.bits.size());
    uint8_t byte = 0;
    int fill = 0;
    for (std::size_t i = 0; i < bits.bits.size(); ++i) {
        if (bits.bits[i]) byte |= static_cast<uint8_t>(1u << fill);
        if (++fill == 8) {
            f.put(static_cast<char>(byte));
            byte = 0;
            fill = 0;
        }
    }
    if (fill) f.put(static_cast<char>(byte));
    finish(f, path);
}

BitStream read_bits_bin(const std::string& path) {
    auto f = open_in(path, true);
    const Header h = read_header(f, 3, path);
    BitStream b;
    b.sample_rate_hz = h.sample_rate_hz;
    b.bits.resize(h.count);
    const std::size_t nbytes = (h.count + 7) / 8;
    std::vector<char> raw(nbytes);
    f.read(raw.data(), static_cast<std::streamsize>(nbytes));
    if (!f) throw std::runtime_error("truncated PSSW container: " + path);
    for (std::size_t i = 0; i < h.count; ++i)
        b.bits[i] = (static_cast<uint8_t>(raw[i / 8]) >> (i % 8)) & 1;
    return b;
}

void write_envelope_csv(const std::string& path, const Envelope& env) {
    auto f = open_out(path, false);
    f << "index,value\n";
    f.precision(17);
    for (std::size_t i = 0; i < env.samples.size(); ++i)
        f << i << ',' << env.samples[i] << '\n';
    finish(f, path);
}

void write_bits_csv(const std::string& path, const BitStream& bits) {
    auto f = open_out(path, false);
    f << "index,value\n";
    for (std::size_t i = 0; i < bits.bits.size(); ++i)
        f << i << ',' << int(bits.bits[i]) << '\n';
    finish(f, path);
}

void write_annotations(const std::string& path, const IqWaveform& wave) {
    nlohmann::json j;
    j["sample_rate_hz"] = wave.sample_rate_hz;
    j["annotations"] = nlohmann::json::array();
    for (const auto& a : wave.annotations)
        j["annotations"].push_back({{"label", a.label}, {"start", a.start}, {"length", a.length}});
    j["pss_centers"] = wave.pss_centers;
    auto f = open_out(path, false);
    f << j.dump(2) << '\n';
    finish(f, path);
}

void write_sync_records_csv(const std::string& path, const std::vector<SyncResult>& results,
                            const std::vector<int>& nid2_true) {
    if (results.size() != nid2_true.size())
        throw std::runtime_error("write_sync_records_csv: size mismatch");
    auto f = open_out(path, false);
    f << "method,nid2_true,nid2_guess,center,error_us,delay_us,committed_at\n";
    f.precision(9);
    for (std::size_t r = 0; r < results.size(); ++r) {
        const SyncResult& res = results[r];
        for (std::size_t i = 0; i < res.detections.size(); ++i) {
            const Detection& d = res.detections[i];
            f << to_string(res.method) << ',' << nid2_true[r] << ',';
            if (d.nid2_guess)
                f << *d.nid2_guess;
            else
                f << "none";
            f << ',' << d.center_index << ',';
            if (i < res.errors_us.size())
                f << res.errors_us[i] << ',' << res.delays_us[i];
            else
                f << "nan,nan";
            f << ',' << d.commit_index << '\n';
        }
    }
    finish(f, path);
}

} // namespace tagsync
