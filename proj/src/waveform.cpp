#include "tagsync/waveform.hpp"

#include <cmath>
#include <stdexcept>

#include "tagsync/rng.hpp"

namespace tagsync {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kInvSqrt2 = 0.70710678118654752440;

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

void fill_qpsk(std::vector<cdouble>& spec, int lo, int hi, Rng& rng) {
    for (int k = lo; k <= hi; ++k) {
        const uint64_t b = rng.next_u64();
        spec[k] = {(b & 1) ? kInvSqrt2 : -kInvSqrt2,
                   (b & 2) ? kInvSqrt2 : -kInvSqrt2};
    }
}

void fill_bpsk(std::vector<cdouble>& spec, int lo, int hi, Rng& rng) {
    for (int k = lo; k <= hi; ++k)
        spec[k] = {(rng.next_u64() & 1) ? 1.0 : -1.0, 0.0};
}

// Occupied band for broadcast/data fills: up to 240 subcarriers, clipped to
// what the IDFT size allows.
int band_high(int fft_size) { return std::min(240, fft_size - 1); }

enum class SymbolKind { pss, pbch, sss_pbch, data };

const char* label_of(SymbolKind k) {
    switch (k) {
        case SymbolKind::pss: return "pss";
        case SymbolKind::pbch: return "pbch";
        case SymbolKind::sss_pbch: return "sss+pbch";
        case SymbolKind::data: return "data";
    }
    return "?";
}

std::vector<cdouble> make_symbol_spectrum(SymbolKind kind, int nid2,
                                          const NumerologyConfig& cfg, Rng& rng) {
    std::vector<cdouble> spec(cfg.fft_size, cdouble{0.0, 0.0});
    const int hi = band_high(cfg.fft_size);
    switch (kind) {
        case SymbolKind::pss: {
            const PssFreqSequence seq = generate_pss_sequence(nid2);
            for (int k = 0; k < kPssLength; ++k)
                spec[k + 1] = {seq.values[k], 0.0};
            break;
        }
        case SymbolKind::pbch:
        case SymbolKind::data:
            fill_qpsk(spec, 1, hi, rng);
            break;
        case SymbolKind::sss_pbch: {
            // BPSK stand-in on the middle of the band, QPSK on the flanks;
            // the flanks keep the spectrum complex so the envelope is not
            // mirror symmetric.
            const int quarter = std::max(1, hi / 4);
            fill_qpsk(spec, 1, quarter, rng);
            fill_bpsk(spec, quarter + 1, hi - quarter, rng);
            fill_qpsk(spec, hi - quarter + 1, hi, rng);
            break;
        }
    }
    return spec;
}

// Appends CP + body, truncated to at most `budget` samples. Returns the
// number of samples actually written.
std::size_t append_symbol(std::vector<cdouble>& out, const std::vector<cdouble>& body,
                          int cp, std::size_t budget) {
    const std::size_t total = body.size() + static_cast<std::size_t>(cp);
    const std::size_t n = std::min(total, budget);
    out.reserve(out.size() + n);
    for (std::size_t i = 0; i < n; ++i) {
        if (i < static_cast<std::size_t>(cp))
            out.push_back(body[body.size() - cp + i]);
        else
            out.push_back(body[i - cp]);
    }
    return n;
}

} // namespace

int NumerologyConfig::resolved_cp() const {
    if (cp_samples >= 0) return cp_samples;
    return static_cast<int>(std::lround(0.0703 * fft_size));
}

void NumerologyConfig::validate() const {
    if (!(scs_hz > 0.0))
        throw std::invalid_argument("NumerologyConfig: scs_hz must be positive");
    if (fft_size < 128 || !is_pow2(fft_size))
        throw std::invalid_argument("NumerologyConfig: fft_size must be a power of two >= 128");
    if (resolved_cp() < 0 || resolved_cp() >= fft_size)
        throw std::invalid_argument("NumerologyConfig: bad cp_samples");
    if (!(ssb_period_s > 0.0))
        throw std::invalid_argument("NumerologyConfig: ssb_period_s must be positive");
}

std::vector<cdouble> idft(std::span<const cdouble> spectrum) {
    const std::size_t n = spectrum.size();
    if (n == 0 || (n & (n - 1)) != 0)
        throw std::invalid_argument("idft: length must be a power of two");

    std::vector<cdouble> a(spectrum.begin(), spectrum.end());

    // bit-reversal permutation
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }

    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = 2.0 * kPi / static_cast<double>(len); // inverse sign
        const cdouble wl{std::cos(ang), std::sin(ang)};
        for (std::size_t i = 0; i < n; i += len) {
            cdouble w{1.0, 0.0};
            for (std::size_t k = 0; k < len / 2; ++k) {
                const cdouble u = a[i + k];
                const cdouble v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }

    const double scale = 1.0 / static_cast<double>(n);
    for (auto& x : a) x *= scale;
    return a;
}

IqWaveform pss_time_domain(const PssFreqSequence& seq, const NumerologyConfig& cfg) {
    cfg.validate();
    Rng unused(0);
    const auto spec = make_symbol_spectrum(SymbolKind::pss, seq.nid2, cfg, unused);
    const auto body = idft(spec);
    const int cp = cfg.resolved_cp();

    IqWaveform w;
    w.sample_rate_hz = cfg.sample_rate_hz();
    append_symbol(w.samples, body, cp, body.size() + cp);
    w.annotations.push_back({"pss", 0, w.samples.size()});
    w.pss_centers.push_back(static_cast<double>(cp + cfg.fft_size / 2));
    return w;
}

IqWaveform build_ssb(int nid2, uint64_t payload_seed, const NumerologyConfig& cfg) {
    cfg.validate();
    const int cp = cfg.resolved_cp();

    IqWaveform w;
    w.sample_rate_hz = cfg.sample_rate_hz();

    const SymbolKind kinds[4] = {SymbolKind::pss, SymbolKind::pbch,
                                 SymbolKind::sss_pbch, SymbolKind::pbch};
    for (int s = 0; s < 4; ++s) {
        Rng rng(mix_seed(payload_seed, static_cast<uint64_t>(s)));
        const auto spec = make_symbol_spectrum(kinds[s], nid2, cfg, rng);
        const auto body = idft(spec);
        const std::size_t start = w.samples.size();
        const std::size_t placed = append_symbol(w.samples, body, cp, body.size() + cp);
        w.annotations.push_back({label_of(kinds[s]), start, placed});
        if (kinds[s] == SymbolKind::pss)
            w.pss_centers.push_back(static_cast<double>(start + cp + cfg.fft_size / 2));
    }
    return w;
}

IqWaveform build_downlink_frame(int nid2, double duration_s,
                                const NumerologyConfig& cfg, uint64_t payload_seed) {
    cfg.validate();
    const double rate = cfg.sample_rate_hz();
    const auto period_samples = static_cast<std::size_t>(std::llround(cfg.ssb_period_s * rate));
    const auto total_samples = static_cast<std::size_t>(std::llround(duration_s * rate));
    if (total_samples < period_samples)
        throw std::invalid_argument("build_downlink_frame: duration shorter than one SSB period");

    const int cp = cfg.resolved_cp();
    const int stride = cfg.symbol_stride();
    const std::size_t period_symbols = period_samples / static_cast<std::size_t>(stride);
    if (period_symbols < 7)
        throw std::invalid_argument("build_downlink_frame: SSB period too short for the symbol length");

    // Fixed SSB offset within every period, chosen by the seed. Margins keep
    // the SSB away from period boundaries so detection windows stay in range.
    Rng offset_rng(mix_seed(payload_seed, 0xabcdULL));
    const int offset_symbols =
        offset_rng.uniform_int(1, static_cast<int>(period_symbols) - 6);

    IqWaveform w;
    w.sample_rate_hz = rate;
    w.samples.reserve(total_samples);

    const std::size_t n_periods = total_samples / period_samples;
    std::size_t cursor = 0;
    for (std::size_t p = 0; p < n_periods || cursor < total_samples; ++p) {
        const bool full_period = p < n_periods;
        const std::size_t end =
            full_period ? (p + 1) * period_samples : total_samples;
        int sym = 0;
        while (cursor < end) {
            SymbolKind kind = SymbolKind::data;
            if (full_period && sym >= offset_symbols && sym < offset_symbols + 4) {
                const SymbolKind ssb[4] = {SymbolKind::pss, SymbolKind::pbch,
                                           SymbolKind::sss_pbch, SymbolKind::pbch};
                kind = ssb[sym - offset_symbols];
            }
            Rng rng(mix_seed(payload_seed, (p << 20) ^ static_cast<uint64_t>(sym) ^ 0x50edULL));
            const auto spec = make_symbol_spectrum(kind, nid2, cfg, rng);
            const auto body = idft(spec);
            const std::size_t start = cursor;
            const std::size_t placed = append_symbol(w.samples, body, cp, end - cursor);
            if (kind != SymbolKind::data)
                w.annotations.push_back({label_of(kind), start, placed});
            if (kind == SymbolKind::pss)
                w.pss_centers.push_back(static_cast<double>(start + cp + cfg.fft_size / 2));
            cursor += placed;
            ++sym;
        }
        if (!full_period || cursor >= total_samples) break;
    }
    return w;
}

} // namespace tagsync
