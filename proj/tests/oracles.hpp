#pragma once

// Naive reference implementations for the metric kernels and the IDFT.
// Deliberately dumb: two-pass means, O(N * rho) loops, no shared code with
// the production kernels.

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

namespace oracles {

constexpr double kZeroVarRel = 1e-12; // must mirror the production flag rule

struct RealTrace {
    std::vector<double> values;
    std::vector<uint8_t> flagged;
};

inline double pearson_two_pass(const double* x, const double* y, int len, bool* flagged) {
    double mx = 0, my = 0, sxx = 0, syy = 0;
    for (int i = 0; i < len; ++i) {
        mx += x[i];
        my += y[i];
        sxx += x[i] * x[i];
        syy += y[i] * y[i];
    }
    mx /= len;
    my /= len;
    double cxx = 0, cyy = 0, cxy = 0;
    for (int i = 0; i < len; ++i) {
        cxx += (x[i] - mx) * (x[i] - mx);
        cyy += (y[i] - my) * (y[i] - my);
        cxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(cxx > kZeroVarRel * sxx) || !(cyy > kZeroVarRel * syy)) {
        if (flagged) *flagged = true;
        return 0.0;
    }
    if (flagged) *flagged = false;
    double r = cxy / std::sqrt(cxx * cyy);
    if (r > 1.0) r = 1.0;
    if (r < -1.0) r = -1.0;
    return r;
}

inline RealTrace naive_xcorr_trace(const std::vector<double>& env,
                                   const std::vector<double>& tmpl) {
    RealTrace out;
    const int L = static_cast<int>(tmpl.size());
    if (env.size() < tmpl.size()) return out;
    const std::size_t n = env.size() - tmpl.size() + 1;
    out.values.resize(n);
    out.flagged.assign(n, 0);
    for (std::size_t t = 0; t < n; ++t) {
        bool bad = false;
        out.values[t] = pearson_two_pass(env.data() + t, tmpl.data(), L, &bad);
        if (bad) out.flagged[t] = 1;
    }
    return out;
}

inline RealTrace naive_sym_autocorr_trace(const std::vector<double>& env, int arms) {
    RealTrace out;
    const std::size_t n = env.size();
    if (n < 2 * static_cast<std::size_t>(arms) + 1) return out;
    const std::size_t len = n - 2 * static_cast<std::size_t>(arms);
    out.values.resize(len);
    out.flagged.assign(len, 0);
    std::vector<double> fwd(arms), bwd(arms);
    for (std::size_t t = arms; t + arms < n; ++t) {
        for (int k = 1; k <= arms; ++k) {
            fwd[k - 1] = env[t + k];
            bwd[k - 1] = env[t - k];
        }
        bool bad = false;
        out.values[t - arms] = pearson_two_pass(fwd.data(), bwd.data(), arms, &bad);
        if (bad) out.flagged[t - arms] = 1;
    }
    return out;
}

inline std::vector<double> naive_sd_trace(const std::vector<double>& env, int arms) {
    const std::size_t n = env.size();
    if (n < 2 * static_cast<std::size_t>(arms) + 1) return {};
    std::vector<double> out(n - 2 * static_cast<std::size_t>(arms));
    for (std::size_t t = arms; t + arms < n; ++t) {
        double acc = 0;
        for (int k = 1; k <= arms; ++k) acc += std::fabs(env[t + k] - env[t - k]);
        out[t - arms] = acc;
    }
    return out;
}

inline std::vector<int> naive_xor_sym(const std::vector<uint8_t>& bits, int arms) {
    const std::size_t n = bits.size();
    if (n < 2 * static_cast<std::size_t>(arms) + 1) return {};
    std::vector<int> out(n - 2 * static_cast<std::size_t>(arms));
    for (std::size_t t = arms; t + arms < n; ++t) {
        int acc = 0;
        for (int k = 1; k <= arms; ++k) acc += (bits[t + k] ^ bits[t - k]) & 1;
        out[t - arms] = acc;
    }
    return out;
}

inline std::vector<int> naive_xnor_sym(const std::vector<uint8_t>& bits, int arms) {
    std::vector<int> out = naive_xor_sym(bits, arms);
    for (int& v : out) v = arms - v;
    return out;
}

inline std::vector<int> naive_hamming_similarity(const std::vector<uint8_t>& bits,
                                                 const std::vector<uint8_t>& tmpl) {
    if (bits.size() < tmpl.size()) return {};
    const std::size_t n = bits.size() - tmpl.size() + 1;
    std::vector<int> out(n);
    for (std::size_t t = 0; t < n; ++t) {
        int match = 0, mismatch = 0;
        for (std::size_t k = 0; k < tmpl.size(); ++k)
            ((bits[t + k] ^ tmpl[k]) & 1) ? ++mismatch : ++match;
        out[t] = match - mismatch;
    }
    return out;
}

inline std::vector<std::complex<double>> naive_idft(
    const std::vector<std::complex<double>>& spec) {
    const std::size_t n = spec.size();
    std::vector<std::complex<double>> out(n);
    for (std::size_t t = 0; t < n; ++t) {
        std::complex<double> acc{0.0, 0.0};
        for (std::size_t k = 0; k < n; ++k) {
            const double ang = 2.0 * 3.14159265358979323846 *
                               static_cast<double>(k) * static_cast<double>(t) /
                               static_cast<double>(n);
            acc += spec[k] * std::complex<double>{std::cos(ang), std::sin(ang)};
        }
        out[t] = acc / static_cast<double>(n);
    }
    return out;
}

} // namespace oracles
