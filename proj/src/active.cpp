#include "tagsync/active.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace tagsync {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

CfoEstimate cp_cfo_estimate(const IqWaveform& iq, const NumerologyConfig& cfg,
                            std::size_t symbol_start) {
    cfg.validate();
    const auto ng = static_cast<std::size_t>(cfg.resolved_cp());
    const auto n = static_cast<std::size_t>(cfg.fft_size);
    if (symbol_start + ng + n > iq.samples.size())
        throw std::invalid_argument("cp_cfo_estimate: symbol out of range");

    cdouble acc{0.0, 0.0};
    for (std::size_t k = 0; k < ng; ++k)
        acc += std::conj(iq.samples[symbol_start + k]) * iq.samples[symbol_start + k + n];

    CfoEstimate est;
    est.confidence = std::abs(acc);
    est.epsilon_hat = std::arg(acc) / kTwoPi;
    return est;
}

namespace {

// |sum_k y*[t+k] y[t+k+N]| over the CP length, for every window position.
std::vector<double> cp_corr_magnitude(const std::vector<cdouble>& y, int ng, int nfft) {
    const std::size_t n = y.size();
    const auto span = static_cast<std::size_t>(ng + nfft);
    if (n < span) return {};
    std::vector<double> out(n - span + 1);
    // sliding complex sum
    cdouble acc{0.0, 0.0};
    for (int k = 0; k < ng; ++k) acc += std::conj(y[k]) * y[k + nfft];
    out[0] = std::abs(acc);
    for (std::size_t t = 1; t < out.size(); ++t) {
        acc -= std::conj(y[t - 1]) * y[t - 1 + nfft];
        acc += std::conj(y[t + ng - 1]) * y[t + ng - 1 + nfft];
        out[t] = std::abs(acc);
    }
    return out;
}

std::size_t arg_max(const std::vector<double>& v, std::size_t lo, std::size_t hi) {
    std::size_t best = lo;
    for (std::size_t i = lo + 1; i < hi; ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

} // namespace

SyncResult active_autocorr_detect(const IqWaveform& iq, const NumerologyConfig& cfg) {
    cfg.validate();
    const int ng = cfg.resolved_cp();
    const int nfft = cfg.fft_size;
    const auto period =
        static_cast<std::size_t>(std::llround(cfg.ssb_period_s * iq.sample_rate_hz));

    SyncResult res;
    res.method = MethodId::active_autocorr;
    const std::vector<double> mag = cp_corr_magnitude(iq.samples, ng, nfft);
    if (mag.empty() || period == 0) return res;
    res.stage1_windows = mag.size();

    for (std::size_t k = 0; (k + 1) * period <= iq.samples.size(); ++k) {
        const std::size_t lo = std::min(k * period, mag.size() - 1);
        const std::size_t hi = std::min((k + 1) * period, mag.size());
        if (hi <= lo) continue;
        const std::size_t t = arg_max(mag, lo, hi);
        Detection d;
        d.center_index = static_cast<long>(t) + ng + nfft / 2; // implied body center
        d.commit_index = static_cast<long>(t) + ng + nfft - 1;
        d.metric = mag[t];
        res.detections.push_back(d);
    }
    return res;
}

SyncResult iq_fine_timing(const IqWaveform& iq, const std::array<IqWaveform, 3>& pss_iq,
                          bool correct_cfo, const NumerologyConfig& cfg) {
    cfg.validate();
    const int nfft = cfg.fft_size;
    const int ng = cfg.resolved_cp();
    for (const auto& p : pss_iq)
        if (static_cast<int>(p.samples.size()) != nfft)
            throw std::invalid_argument("iq_fine_timing: templates must be CP-stripped PSS bodies");

    std::vector<cdouble> y = iq.samples;

    SyncResult res;
    res.method = MethodId::active_xcorr;

    if (correct_cfo) {
        // coarse stage: strongest CP correlation fixes the symbol grid and
        // yields the CFO estimate used for derotation
        const std::vector<double> mag = cp_corr_magnitude(y, ng, nfft);
        if (!mag.empty()) {
            const std::size_t t = arg_max(mag, 0, mag.size());
            cdouble acc{0.0, 0.0};
            for (int k = 0; k < ng; ++k) acc += std::conj(y[t + k]) * y[t + k + nfft];
            const double eps = std::arg(acc) / kTwoPi;
            const double step = -kTwoPi * eps / static_cast<double>(nfft);
            for (std::size_t i = 0; i < y.size(); ++i) {
                const double ph = step * static_cast<double>(i);
                y[i] *= cdouble{std::cos(ph), std::sin(ph)};
            }
        }
    }

    const std::size_t n = y.size();
    const auto L = static_cast<std::size_t>(nfft);
    if (n < L) return res;
    const std::size_t positions = n - L + 1;
    res.stage1_windows = positions;

    // sliding window energy
    std::vector<double> energy(positions);
    {
        double acc = 0.0;
        for (std::size_t k = 0; k < L; ++k) acc += std::norm(y[k]);
        energy[0] = acc;
        for (std::size_t t = 1; t < positions; ++t) {
            acc += std::norm(y[t + L - 1]) - std::norm(y[t - 1]);
            energy[t] = acc;
        }
    }

    std::vector<double> best(positions, -1.0);
    std::vector<int> which(positions, 0);
    for (int i = 0; i < 3; ++i) {
        const auto& p = pss_iq[i].samples;
        for (std::size_t t = 0; t < positions; ++t) {
            cdouble dot{0.0, 0.0};
            for (std::size_t k = 0; k < L; ++k) dot += y[t + k] * std::conj(p[k]);
            const double c = energy[t] > 0.0 ? std::abs(dot) / energy[t] : 0.0;
            if (c > best[t]) {
                best[t] = c;
                which[t] = i;
            }
        }
    }

    const auto period =
        static_cast<std::size_t>(std::llround(cfg.ssb_period_s * iq.sample_rate_hz));
    if (period == 0) return res;
    for (std::size_t k = 0; (k + 1) * period <= n; ++k) {
        const std::size_t lo = std::min(k * period, positions - 1);
        const std::size_t hi = std::min((k + 1) * period, positions);
        if (hi <= lo) continue;
        std::size_t t = lo;
        for (std::size_t i = lo + 1; i < hi; ++i)
            if (best[i] > best[t]) t = i;
        Detection d;
        d.center_index = static_cast<long>(t) + nfft / 2; // window holds the body
        d.commit_index = static_cast<long>(t) + nfft - 1;
        d.metric = best[t];
        d.nid2_guess = which[t];
        res.detections.push_back(d);
    }
    return res;
}

void finalize_mod_stride(SyncResult& res, const std::vector<double>& true_centers,
                         int stride, double rate_hz) {
    res.errors_us.clear();
    res.delays_us.clear();
    if (true_centers.empty() || stride <= 0 || !(rate_hz > 0.0)) return;
    const double us = 1e6 / rate_hz;
    const double S = stride;
    for (const auto& d : res.detections) {
        // distance to the symbol grid anchored at the nearest true center;
        // the grid restarts at every SSB period boundary
        const auto c = static_cast<double>(d.center_index);
        auto it = std::lower_bound(true_centers.begin(), true_centers.end(), c);
        double anchor = it != true_centers.end() ? *it : true_centers.back();
        if (it != true_centers.begin() && std::fabs(*(it - 1) - c) < std::fabs(anchor - c))
            anchor = *(it - 1);
        double m = std::fmod(c - anchor, S);
        if (m < 0) m += S;
        const double err = std::min(m, S - m);
        res.errors_us.push_back(err * us);
        res.delays_us.push_back((static_cast<double>(d.commit_index) - anchor) * us);
    }
}

} // namespace tagsync
