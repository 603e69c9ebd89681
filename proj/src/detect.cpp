#include "tagsync/detect.hpp"

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>

#include "tagsync/kernels.hpp"

namespace tagsync {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Slice {
    std::size_t lo, hi; // half-open, trace-local
};

// Full period windows [k*P, (k+1)*P) intersected with the trace coverage.
std::vector<Slice> period_slices(std::size_t first_index, std::size_t trace_len,
                                 int period, std::size_t env_len) {
    std::vector<Slice> slices;
    if (period <= 0 || trace_len == 0) return slices;
    const auto P = static_cast<std::size_t>(period);
    for (std::size_t k = 0; (k + 1) * P <= env_len; ++k) {
        const std::size_t lo_env = k * P;
        const std::size_t hi_env = (k + 1) * P;
        const std::size_t lo = lo_env > first_index ? lo_env - first_index : 0;
        std::size_t hi = hi_env > first_index ? hi_env - first_index : 0;
        hi = std::min(hi, trace_len);
        if (hi > lo) slices.push_back({lo, hi});
    }
    return slices;
}

// Earliest index attaining the extreme value (ties break toward the first
// sample, matching a latch-on-first-hit implementation).
std::size_t arg_max(std::span<const double> v, std::size_t lo, std::size_t hi) {
    std::size_t best = lo;
    for (std::size_t i = lo + 1; i < hi; ++i)
        if (v[i] > v[best]) best = i;
    return best;
}
std::size_t arg_min(std::span<const double> v, std::size_t lo, std::size_t hi) {
    std::size_t best = lo;
    for (std::size_t i = lo + 1; i < hi; ++i)
        if (v[i] < v[best]) best = i;
    return best;
}

// Threshold-mode scan: local extrema with a minimum separation.
template <typename Qualifies, typename Commit>
void scan_peaks(std::span<const double> v, int sep, bool maximize, Qualifies qualifies,
                Commit commit) {
    const std::size_t n = v.size();
    const auto s = static_cast<std::size_t>(std::max(1, sep));
    std::size_t t = 0;
    while (t < n) {
        if (!qualifies(t)) {
            ++t;
            continue;
        }
        const std::size_t lo = t >= s ? t - s : 0;
        const std::size_t hi = std::min(n, t + s + 1);
        const std::size_t ext = maximize ? arg_max(v, lo, hi) : arg_min(v, lo, hi);
        if (ext == t) {
            commit(t);
            t += s;
        } else {
            ++t;
        }
    }
}

// Trailing mean of the trace over a horizon, for threshold-mode SD scans.
std::vector<double> trailing_mean(std::span<const double> v, std::size_t horizon) {
    std::vector<double> out(v.size());
    std::vector<double> prefix(v.size() + 1, 0.0);
    for (std::size_t i = 0; i < v.size(); ++i) prefix[i + 1] = prefix[i] + v[i];
    for (std::size_t i = 0; i < v.size(); ++i) {
        const std::size_t lo = i + 1 > horizon ? i + 1 - horizon : 0;
        out[i] = (prefix[i + 1] - prefix[lo]) / static_cast<double>(i + 1 - lo);
    }
    return out;
}

void check_full_templates(const std::array<PssTemplate, 3>& templates, int rho) {
    for (int i = 0; i < 3; ++i) {
        if (templates[i].half || static_cast<int>(templates[i].values.size()) != rho)
            throw std::invalid_argument("detector: need three full templates of length rho");
        if (templates[i].nid2 != i)
            throw std::invalid_argument("detector: templates must be ordered by nid2");
    }
}

MetricTrace int_trace_to_metric(MetricTrace::Kind kind, std::size_t first,
                                const std::vector<int32_t>& raw) {
    MetricTrace tr;
    tr.kind = kind;
    tr.first_index = first;
    tr.values.assign(raw.begin(), raw.end());
    return tr;
}

} // namespace

SyncParams SyncParams::for_rate(double tag_rate_hz, const NumerologyConfig& cfg) {
    cfg.validate();
    if (!(tag_rate_hz > 0.0))
        throw std::invalid_argument("SyncParams: tag rate must be positive");
    SyncParams p;
    p.rho = static_cast<int>(std::lround(tag_rate_hz / cfg.scs_hz));
    p.period_samples = static_cast<int>(std::lround(cfg.ssb_period_s * tag_rate_hz));
    p.validate();
    return p;
}

void SyncParams::validate() const {
    if (rho < 4) throw std::invalid_argument("SyncParams: rho must be >= 4");
    if (mode == Mode::period_search && period_samples <= rho)
        throw std::invalid_argument("SyncParams: period_samples must exceed rho in period mode");
    if (!(r_threshold > -1.0 && r_threshold <= 1.0) ||
        !(sym_threshold > -1.0 && sym_threshold <= 1.0) || !(sd_gamma > 0.0))
        throw std::invalid_argument("SyncParams: bad thresholds");
}

void SyncResult::finalize(const std::vector<double>& true_centers, double rate_hz) {
    errors_us.clear();
    delays_us.clear();
    if (true_centers.empty() || !(rate_hz > 0.0)) return;
    const double us = 1e6 / rate_hz;
    for (const auto& d : detections) {
        const auto c = static_cast<double>(d.center_index);
        auto it = std::lower_bound(true_centers.begin(), true_centers.end(), c);
        double nearest = kInf;
        if (it != true_centers.end()) nearest = *it;
        if (it != true_centers.begin() &&
            std::fabs(*(it - 1) - c) < std::fabs(nearest - c))
            nearest = *(it - 1);
        errors_us.push_back(std::fabs(c - nearest) * us);
        delays_us.push_back((static_cast<double>(d.commit_index) - nearest) * us);
    }
}

double SyncResult::median_error_us() const {
    if (errors_us.empty()) return kInf;
    std::vector<double> v = errors_us;
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// ---- metric traces ---------------------------------------------------------

MetricTrace cross_correlate(const Envelope& env, const PssTemplate& tmpl,
                            const SyncParams& params) {
    (void)params;
    if (env.samples.size() < tmpl.values.size())
        throw std::invalid_argument("cross_correlate: envelope shorter than template");
    MetricTrace tr;
    tr.kind = MetricTrace::Kind::cross_corr;
    tr.first_index = 0;
    tr.values.resize(kernels::window_trace_len(env.samples.size(), tmpl.values.size()));
    kernels::xcorr_trace(env.samples, tmpl.values, tr.values, &tr.flagged);
    return tr;
}

MetricTrace symmetric_autocorr(const Envelope& env, const SyncParams& params) {
    const int a = params.arms();
    MetricTrace tr;
    tr.kind = MetricTrace::Kind::sym_autocorr;
    tr.first_index = static_cast<std::size_t>(a);
    tr.values.resize(kernels::sym_trace_len(env.samples.size(), a));
    kernels::sym_autocorr_trace(env.samples, a, tr.values, &tr.flagged);
    return tr;
}

MetricTrace sd_metric(const Envelope& env, const SyncParams& params) {
    const int a = params.arms();
    MetricTrace tr;
    tr.kind = MetricTrace::Kind::sd_sigma;
    tr.first_index = static_cast<std::size_t>(a);
    tr.values.resize(kernels::sym_trace_len(env.samples.size(), a));
    kernels::sd_trace(env.samples, a, tr.values);
    return tr;
}

MetricTrace sd_q_metric(const BitStream& bits, const SyncParams& params) {
    const int a = params.arms();
    const auto packed = kernels::PackedBits::pack(bits.bits);
    std::vector<int32_t> raw(kernels::sym_trace_len(packed.nbits, a));
    kernels::xor_sym_trace(packed, a, raw);
    return int_trace_to_metric(MetricTrace::Kind::sd_sigma, static_cast<std::size_t>(a), raw);
}

MetricTrace sa_q_metric(const BitStream& bits, const SyncParams& params) {
    const int a = params.arms();
    const auto packed = kernels::PackedBits::pack(bits.bits);
    std::vector<int32_t> raw(kernels::sym_trace_len(packed.nbits, a));
    kernels::xnor_sym_trace(packed, a, raw);
    return int_trace_to_metric(MetricTrace::Kind::sym_autocorr, static_cast<std::size_t>(a), raw);
}

// ---- detectors --------------------------------------------------------------

namespace {

// max_i trace_i with argmax template index per position
struct Combined {
    std::vector<double> best;
    std::vector<int> which;
};

Combined combine(const std::vector<std::vector<double>>& traces) {
    Combined c;
    if (traces.empty()) return c;
    c.best = traces[0];
    c.which.assign(traces[0].size(), 0);
    for (std::size_t i = 1; i < traces.size(); ++i)
        for (std::size_t t = 0; t < c.best.size(); ++t)
            if (traces[i][t] > c.best[t]) {
                c.best[t] = traces[i][t];
                c.which[t] = static_cast<int>(i);
            }
    return c;
}

// Shared decision logic for window-start indexed correlation detectors.
SyncResult detect_from_combined(MethodId method, const Combined& comb, bool multi_nid2,
                                const SyncParams& params, std::size_t env_len,
                                int window_len, double commit_threshold) {
    SyncResult res;
    res.method = method;
    res.stage1_windows = comb.best.size();
    const int a = params.arms();
    auto commit = [&](std::size_t t) {
        Detection d;
        d.center_index = static_cast<long>(t) + a;
        d.commit_index = static_cast<long>(t) + window_len - 1;
        d.metric = comb.best[t];
        if (multi_nid2) d.nid2_guess = comb.which[t];
        res.detections.push_back(d);
    };
    if (params.mode == SyncParams::Mode::period_search) {
        for (const Slice& s : period_slices(0, comb.best.size(), params.period_samples, env_len)) {
            const std::size_t t = arg_max(comb.best, s.lo, s.hi);
            if (params.gate_by_threshold && comb.best[t] < commit_threshold) {
                ++res.rejected_candidates;
                continue;
            }
            commit(t);
        }
    } else {
        scan_peaks(
            comb.best, a, true,
            [&](std::size_t t) { return comb.best[t] >= commit_threshold; },
            [&](std::size_t t) { commit(t); });
    }
    return res;
}

} // namespace

SyncResult nft_detect(const Envelope& env, const std::array<PssTemplate, 3>& templates,
                      const SyncParams& params) {
    params.validate();
    check_full_templates(templates, params.rho);
    std::vector<std::vector<double>> traces(3);
    for (int i = 0; i < 3; ++i)
        traces[i] = cross_correlate(env, templates[i], params).values;
    const Combined comb = combine(traces);
    return detect_from_combined(MethodId::nft, comb, true, params, env.samples.size(),
                                params.rho, params.r_threshold);
}

SyncResult baseline_one_template(const Envelope& env, const PssTemplate& tmpl0,
                                 const SyncParams& params) {
    SyncParams p = params;
    p.gate_by_threshold = true; // fails hard on foreign cell IDs
    p.validate();
    if (tmpl0.half || static_cast<int>(tmpl0.values.size()) != p.rho)
        throw std::invalid_argument("baseline_one_template: need a full-length template");
    std::vector<std::vector<double>> traces(1);
    traces[0] = cross_correlate(env, tmpl0, p).values;
    const Combined comb = combine(traces);
    SyncResult res = detect_from_combined(MethodId::one_template, comb, false, p,
                                          env.samples.size(), p.rho, p.r_threshold);
    for (auto& d : res.detections) d.nid2_guess = tmpl0.nid2;
    return res;
}

SyncResult sa_detect(const Envelope& env, const SyncParams& params) {
    params.validate();
    const MetricTrace tr = symmetric_autocorr(env, params);
    SyncResult res;
    res.method = MethodId::sa;
    res.stage1_windows = tr.values.size();
    const int a = params.arms();
    auto commit = [&](std::size_t i) {
        Detection d;
        d.center_index = static_cast<long>(tr.first_index + i);
        d.commit_index = d.center_index + a;
        d.metric = tr.values[i];
        res.detections.push_back(d);
    };
    if (params.mode == SyncParams::Mode::period_search) {
        for (const Slice& s :
             period_slices(tr.first_index, tr.values.size(), params.period_samples,
                           env.samples.size())) {
            const std::size_t i = arg_max(tr.values, s.lo, s.hi);
            if (params.gate_by_threshold && tr.values[i] < params.sym_threshold) {
                ++res.rejected_candidates;
                continue;
            }
            commit(i);
        }
    } else {
        scan_peaks(
            tr.values, a, true,
            [&](std::size_t i) { return tr.values[i] >= params.sym_threshold; },
            [&](std::size_t i) { commit(i); });
    }
    return res;
}

SyncResult sd_detect(const Envelope& env, const SyncParams& params) {
    params.validate();
    const MetricTrace tr = sd_metric(env, params);
    SyncResult res;
    res.method = MethodId::sd;
    res.stage1_windows = tr.values.size();
    const int a = params.arms();
    auto commit = [&](std::size_t i) {
        Detection d;
        d.center_index = static_cast<long>(tr.first_index + i);
        d.commit_index = d.center_index + a;
        d.metric = tr.values[i];
        res.detections.push_back(d);
    };
    if (params.mode == SyncParams::Mode::period_search) {
        for (const Slice& s :
             period_slices(tr.first_index, tr.values.size(), params.period_samples,
                           env.samples.size())) {
            commit(arg_min(tr.values, s.lo, s.hi));
        }
    } else {
        const std::size_t horizon = params.period_samples > 0
                                        ? static_cast<std::size_t>(params.period_samples)
                                        : static_cast<std::size_t>(4 * params.rho);
        const std::vector<double> mean = trailing_mean(tr.values, horizon);
        scan_peaks(
            tr.values, a, false,
            [&](std::size_t i) { return tr.values[i] < params.sd_gamma * mean[i]; },
            [&](std::size_t i) { commit(i); });
    }
    return res;
}

SyncResult sd_plus_detect(const Envelope& env, const SyncParams& params) {
    params.validate();
    if (params.period_samples <= params.rho)
        throw std::invalid_argument("sd_plus_detect: needs a known period");
    const auto P = static_cast<std::size_t>(params.period_samples);
    const int a = params.arms();

    SyncResult res;
    res.method = MethodId::sd_plus;
    if (env.samples.size() < P) {
        res.acquisition_failed = true;
        return res;
    }

    // Differential search over the first period only; later detections come
    // from periodicity.
    const std::size_t prefix_len = std::min(env.samples.size(), P + static_cast<std::size_t>(a));
    std::span<const double> prefix(env.samples.data(), prefix_len);
    std::vector<double> trace(kernels::sym_trace_len(prefix_len, a));
    kernels::sd_trace(prefix, a, trace);
    std::size_t usable = std::min(trace.size(), P - static_cast<std::size_t>(a));
    res.stage1_windows = usable;
    if (usable == 0) {
        res.acquisition_failed = true;
        return res;
    }

    std::optional<std::size_t> first;
    if (params.mode == SyncParams::Mode::threshold) {
        const std::vector<double> mean = trailing_mean(trace, usable);
        for (std::size_t i = 0; i < usable && !first; ++i)
            if (trace[i] < params.sd_gamma * mean[i]) {
                const std::size_t lo = i >= static_cast<std::size_t>(a) ? i - a : 0;
                const std::size_t hi = std::min(usable, i + static_cast<std::size_t>(a) + 1);
                if (arg_min(trace, lo, hi) == i) first = i;
            }
        if (!first) {
            res.acquisition_failed = true;
            return res;
        }
    } else {
        first = arg_min(trace, 0, usable);
    }

    const long c0 = static_cast<long>(*first) + a;
    const double sigma0 = trace[*first];
    for (long c = c0; c < static_cast<long>(env.samples.size()); c += params.period_samples) {
        Detection d;
        d.center_index = c;
        d.commit_index = c == c0 ? c + a : c; // later instances are predicted
        d.metric = sigma0;
        res.detections.push_back(d);
    }
    return res;
}

SyncResult sst_detect(const Envelope& env, const std::array<PssTemplate, 3>& half_templates,
                      const SyncParams& params) {
    params.validate();
    const int a = params.arms();
    const int h = a;
    for (int i = 0; i < 3; ++i)
        if (!half_templates[i].half || static_cast<int>(half_templates[i].values.size()) != h ||
            half_templates[i].nid2 != i)
            throw std::invalid_argument("sst_detect: need three half templates of length rho/2");

    const MetricTrace stage1 = symmetric_autocorr(env, params);
    SyncResult res;
    res.method = MethodId::sst;
    res.stage1_windows = stage1.values.size();

    // gather stage-1 candidates (env center indices)
    std::vector<std::size_t> candidates;
    if (params.mode == SyncParams::Mode::period_search) {
        for (const Slice& s :
             period_slices(stage1.first_index, stage1.values.size(), params.period_samples,
                           env.samples.size())) {
            const std::size_t i = arg_max(stage1.values, s.lo, s.hi);
            if (params.gate_by_threshold && stage1.values[i] < params.sym_threshold) {
                ++res.rejected_candidates;
                continue;
            }
            candidates.push_back(stage1.first_index + i);
        }
    } else {
        scan_peaks(
            stage1.values, a, true,
            [&](std::size_t i) { return stage1.values[i] >= params.sym_threshold; },
            [&](std::size_t i) { candidates.push_back(stage1.first_index + i); });
    }

    // stage 2: slide the half templates over a small window around each
    // candidate; the trailing half of the buffer is the freshest data.
    const int d_off = params.rho - 2 * a; // 0 for even rho, 1 for odd
    const int R = params.sst_refine_radius();
    const std::size_t n = env.samples.size();
    const bool gating =
        params.gate_by_threshold || params.mode == SyncParams::Mode::threshold;

    for (const std::size_t c : candidates) {
        const std::size_t tau0 = c + static_cast<std::size_t>(d_off);
        const std::size_t lo = tau0 >= static_cast<std::size_t>(R) ? tau0 - R : 0;
        const std::size_t hi = std::min(tau0 + static_cast<std::size_t>(R),
                                        n - static_cast<std::size_t>(h)); // inclusive
        if (lo > hi) continue;
        const std::size_t count = hi - lo + 1;

        double best_r = -kInf;
        std::size_t best_tau = lo;
        int best_i = 0;
        std::vector<double> sub(count);
        for (int i = 0; i < 3; ++i) {
            std::span<const double> seg(env.samples.data() + lo, count + h - 1);
            kernels::xcorr_trace(seg, half_templates[i].values, sub, nullptr);
            for (std::size_t k = 0; k < count; ++k)
                if (sub[k] > best_r) {
                    best_r = sub[k];
                    best_tau = lo + k;
                    best_i = i;
                }
        }
        res.stage2_windows += 3 * count;
        if (gating && best_r < params.r_threshold) {
            ++res.rejected_candidates;
            continue;
        }
        Detection det;
        det.center_index = static_cast<long>(best_tau) - d_off;
        det.commit_index = static_cast<long>(best_tau) + h - 1;
        det.metric = best_r;
        det.nid2_guess = best_i;
        res.detections.push_back(det);
    }
    std::sort(res.detections.begin(), res.detections.end(),
              [](const Detection& x, const Detection& y) { return x.center_index < y.center_index; });
    return res;
}

SyncResult quantized_detect(const BitStream& bits, QuantMethod method,
                            const std::vector<BitTemplate>& bit_templates,
                            const SyncParams& params) {
    params.validate();
    const int a = params.arms();
    const std::size_t n = bits.bits.size();
    const auto packed = kernels::PackedBits::pack(bits.bits);

    SyncResult res;

    auto sym_commit = [&](std::size_t first, std::size_t i, double metric) {
        Detection d;
        d.center_index = static_cast<long>(first + i);
        d.commit_index = d.center_index + a;
        d.metric = metric;
        res.detections.push_back(d);
    };

    switch (method) {
        case QuantMethod::sd_q: {
            res.method = MethodId::sd_q;
            std::vector<int32_t> raw(kernels::sym_trace_len(n, a));
            kernels::xor_sym_trace(packed, a, raw);
            std::vector<double> trace(raw.begin(), raw.end());
            res.stage1_windows = trace.size();
            if (params.mode == SyncParams::Mode::period_search) {
                for (const Slice& s : period_slices(a, trace.size(), params.period_samples, n)) {
                    const std::size_t i = arg_min(trace, s.lo, s.hi);
                    sym_commit(a, i, trace[i]);
                }
            } else {
                const std::vector<double> mean = trailing_mean(
                    trace, params.period_samples > 0 ? params.period_samples : 4 * params.rho);
                scan_peaks(
                    trace, a, false,
                    [&](std::size_t i) { return trace[i] < params.sd_gamma * mean[i]; },
                    [&](std::size_t i) { sym_commit(a, i, trace[i]); });
            }
            break;
        }
        case QuantMethod::sa_q: {
            res.method = MethodId::sa_q;
            std::vector<int32_t> raw(kernels::sym_trace_len(n, a));
            kernels::xnor_sym_trace(packed, a, raw);
            std::vector<double> trace(raw.begin(), raw.end());
            res.stage1_windows = trace.size();
            const double thr = params.sym_threshold * a;
            if (params.mode == SyncParams::Mode::period_search) {
                for (const Slice& s : period_slices(a, trace.size(), params.period_samples, n)) {
                    const std::size_t i = arg_max(trace, s.lo, s.hi);
                    if (params.gate_by_threshold && trace[i] < thr) {
                        ++res.rejected_candidates;
                        continue;
                    }
                    sym_commit(a, i, trace[i]);
                }
            } else {
                scan_peaks(
                    trace, a, true, [&](std::size_t i) { return trace[i] >= thr; },
                    [&](std::size_t i) { sym_commit(a, i, trace[i]); });
            }
            break;
        }
        case QuantMethod::nft_q: {
            res.method = MethodId::nft_q;
            if (bit_templates.size() != 3)
                throw std::invalid_argument("quantized_detect: NFT_Q needs three bit templates");
            std::vector<std::vector<double>> traces(3);
            for (int i = 0; i < 3; ++i) {
                const auto& bt = bit_templates[i];
                if (bt.half || static_cast<int>(bt.bits.size()) != params.rho || bt.nid2 != i)
                    throw std::invalid_argument(
                        "quantized_detect: NFT_Q needs full bit templates ordered by nid2");
                const auto tp = kernels::PackedBits::pack(bt.bits);
                std::vector<int32_t> raw(kernels::window_trace_len(n, tp.nbits));
                kernels::hamming_similarity_trace(packed, tp, raw);
                traces[i].assign(raw.begin(), raw.end());
            }
            const Combined comb = combine(traces);
            res = detect_from_combined(MethodId::nft_q, comb, true, params, n, params.rho,
                                       params.r_threshold * params.rho);
            break;
        }
        case QuantMethod::sst_q: {
            res.method = MethodId::sst_q;
            if (bit_templates.size() != 3)
                throw std::invalid_argument("quantized_detect: SST_Q needs three bit templates");
            for (int i = 0; i < 3; ++i)
                if (!bit_templates[i].half ||
                    static_cast<int>(bit_templates[i].bits.size()) != a ||
                    bit_templates[i].nid2 != i)
                    throw std::invalid_argument(
                        "quantized_detect: SST_Q needs half bit templates ordered by nid2");

            std::vector<int32_t> raw(kernels::sym_trace_len(n, a));
            kernels::xnor_sym_trace(packed, a, raw);
            std::vector<double> stage1(raw.begin(), raw.end());
            res.stage1_windows = stage1.size();

            std::vector<std::size_t> candidates;
            const double thr1 = params.sym_threshold * a;
            if (params.mode == SyncParams::Mode::period_search) {
                for (const Slice& s : period_slices(a, stage1.size(), params.period_samples, n)) {
                    const std::size_t i = arg_max(stage1, s.lo, s.hi);
                    if (params.gate_by_threshold && stage1[i] < thr1) {
                        ++res.rejected_candidates;
                        continue;
                    }
                    candidates.push_back(a + i);
                }
            } else {
                scan_peaks(
                    stage1, a, true, [&](std::size_t i) { return stage1[i] >= thr1; },
                    [&](std::size_t i) { candidates.push_back(a + i); });
            }

            // full-length similarity traces are cheap in the bit domain;
            // refinement just indexes into them
            std::vector<std::vector<double>> sim(3);
            for (int i = 0; i < 3; ++i) {
                const auto tp = kernels::PackedBits::pack(bit_templates[i].bits);
                std::vector<int32_t> r2(kernels::window_trace_len(n, tp.nbits));
                kernels::hamming_similarity_trace(packed, tp, r2);
                sim[i].assign(r2.begin(), r2.end());
            }
            const int d_off = params.rho - 2 * a;
            const int R = params.sst_refine_radius();
            const bool gating =
                params.gate_by_threshold || params.mode == SyncParams::Mode::threshold;
            for (const std::size_t c : candidates) {
                const std::size_t tau0 = c + static_cast<std::size_t>(d_off);
                const std::size_t lo = tau0 >= static_cast<std::size_t>(R) ? tau0 - R : 0;
                const std::size_t hi_excl = std::min(tau0 + R + 1, sim[0].size());
                if (lo >= hi_excl) continue;
                double best_v = -kInf;
                std::size_t best_tau = lo;
                int best_i = 0;
                for (int i = 0; i < 3; ++i)
                    for (std::size_t t = lo; t < hi_excl; ++t)
                        if (sim[i][t] > best_v) {
                            best_v = sim[i][t];
                            best_tau = t;
                            best_i = i;
                        }
                res.stage2_windows += 3 * (hi_excl - lo);
                if (gating && best_v < params.r_threshold * a) {
                    ++res.rejected_candidates;
                    continue;
                }
                Detection det;
                det.center_index = static_cast<long>(best_tau) - d_off;
                det.commit_index = static_cast<long>(best_tau) + a - 1;
                det.metric = best_v;
                det.nid2_guess = best_i;
                res.detections.push_back(det);
            }
            std::sort(res.detections.begin(), res.detections.end(),
                      [](const Detection& x, const Detection& y) {
                          return x.center_index < y.center_index;
                      });
            break;
        }
    }
    return res;
}

SyncResult baseline_rising_edge(const Envelope& env, const SyncParams& params) {
    params.validate();
    const std::size_t n = env.samples.size();
    const auto w = static_cast<std::size_t>(
        params.edge_window > 0 ? params.edge_window : std::max(2, params.rho / 8));

    SyncResult res;
    res.method = MethodId::rising_edge;
    if (n < 2 * w + 1) return res;

    std::vector<double> prefix(n + 1, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = env.samples[i] * env.samples[i];
        prefix[i + 1] = prefix[i] + e;
        total += e;
    }
    const double floor_e = 1e-12 * (total / static_cast<double>(n));

    auto mean_energy = [&](std::size_t lo, std::size_t hi) { // [lo, hi)
        return (prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
    };

    auto scan = [&](std::size_t lo_env, std::size_t hi_env) {
        for (std::size_t t = std::max(lo_env, w); t + w <= std::min(hi_env, n); ++t) {
            ++res.stage1_windows;
            const double curr = mean_energy(t, t + w);
            const double prev = mean_energy(t - w, t);
            const double ratio = curr / (prev + floor_e);
            if (prev + floor_e <= 0.0) continue;
            if (ratio >= params.edge_ratio) {
                Detection d;
                // the edge is at the newest sample of the rising window
                d.center_index = static_cast<long>(t + w - 1);
                d.commit_index = static_cast<long>(t + w - 1);
                d.metric = ratio;
                res.detections.push_back(d);
                return;
            }
        }
    };

    if (params.mode == SyncParams::Mode::period_search && params.period_samples > 0) {
        const auto P = static_cast<std::size_t>(params.period_samples);
        for (std::size_t k = 0; (k + 1) * P <= n; ++k) scan(k * P, (k + 1) * P);
    } else {
        scan(0, n);
    }
    return res;
}

// ---- template construction ---------------------------------------------------

namespace {

constexpr uint64_t kTemplatePayloadSeed = 0x7e317a95ULL;

// Two SSBs back to back; the second PSS sits between broadcast symbols, the
// same surroundings it has inside a frame.
Envelope template_context_envelope(int nid2, const NumerologyConfig& cfg,
                                   double tag_rate_hz, int smooth_len) {
    const IqWaveform ssb = build_ssb(nid2, kTemplatePayloadSeed, cfg);
    IqWaveform ctx;
    ctx.sample_rate_hz = ssb.sample_rate_hz;
    ctx.samples = ssb.samples;
    ctx.samples.insert(ctx.samples.end(), ssb.samples.begin(), ssb.samples.end());
    ctx.pss_centers = {static_cast<double>(ssb.samples.size()) + ssb.pss_centers[0]};
    return extract_envelope(ctx, tag_rate_hz, smooth_len);
}

} // namespace

PssTemplate make_pss_template(int nid2, const NumerologyConfig& cfg, double tag_rate_hz,
                              int smooth_len, const SyncParams& params, bool half) {
    const Envelope env = template_context_envelope(nid2, cfg, tag_rate_hz, smooth_len);
    const int a = params.arms();
    const auto c0 = static_cast<long>(std::lround(env.true_pss_centers[0]));
    const long start = c0 - a;
    if (start < 0 || start + params.rho > static_cast<long>(env.samples.size()))
        throw std::invalid_argument("make_pss_template: rho too large for the template context");
    PssTemplate t;
    t.nid2 = nid2;
    if (half) {
        t.half = true;
        t.values.assign(env.samples.begin() + start + (params.rho - a),
                        env.samples.begin() + start + params.rho);
    } else {
        t.values.assign(env.samples.begin() + start, env.samples.begin() + start + params.rho);
    }
    return t;
}

BitTemplate make_bit_template(int nid2, const NumerologyConfig& cfg, double tag_rate_hz,
                              int smooth_len, const ThresholdPolicy& policy,
                              const SyncParams& params, bool half) {
    const Envelope env = template_context_envelope(nid2, cfg, tag_rate_hz, smooth_len);
    const BitStream bs = quantize_comparator(env, policy);
    const int a = params.arms();
    const auto c0 = static_cast<long>(std::lround(env.true_pss_centers[0]));
    const long start = c0 - a;
    if (start < 0 || start + params.rho > static_cast<long>(bs.bits.size()))
        throw std::invalid_argument("make_bit_template: rho too large for the template context");
    BitTemplate t;
    t.nid2 = nid2;
    if (half) {
        t.half = true;
        t.bits.assign(bs.bits.begin() + start + (params.rho - a),
                      bs.bits.begin() + start + params.rho);
    } else {
        t.bits.assign(bs.bits.begin() + start, bs.bits.begin() + start + params.rho);
    }
    return t;
}

} // namespace tagsync
