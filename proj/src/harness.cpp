#include "tagsync/harness.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "tagsync/active.hpp"
#include "tagsync/io.hpp"
#include "tagsync/resources.hpp"
#include "tagsync/rng.hpp"

namespace tagsync {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSuccessBoundUs = 8.0;
constexpr double kTwoPi = 6.283185307179586476925286766559;

double median_of(std::vector<double> v) {
    if (v.empty()) return kInf;
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double quantile_of(std::vector<double> v, double q) {
    if (v.empty()) return kInf;
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return v[lo] * (1.0 - frac) + v[hi] * frac;
}

// ---- cached templates -------------------------------------------------------

struct TemplateSet {
    std::array<PssTemplate, 3> full;
    std::array<PssTemplate, 3> half;
    std::vector<BitTemplate> bits_full;
    std::vector<BitTemplate> bits_half;
};

struct TemplateKey {
    int fft, cp, rho, smooth, cmp_window;
    long scs_mhz1000, rate_hz;
    bool operator<(const TemplateKey& o) const {
        return std::tie(fft, cp, rho, smooth, cmp_window, scs_mhz1000, rate_hz) <
               std::tie(o.fft, o.cp, o.rho, o.smooth, o.cmp_window, o.scs_mhz1000, o.rate_hz);
    }
};

const TemplateSet& templates_for(const NumerologyConfig& cfg, double tag_rate_hz,
                                 int smooth_len, const SyncParams& params, int cmp_window) {
    static std::mutex mu;
    static std::map<TemplateKey, TemplateSet> cache;

    const TemplateKey key{cfg.fft_size,
                          cfg.resolved_cp(),
                          params.rho,
                          smooth_len,
                          cmp_window,
                          static_cast<long>(std::lround(cfg.scs_hz * 1000.0)),
                          static_cast<long>(std::lround(tag_rate_hz))};
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;

    TemplateSet ts;
    const auto policy = ThresholdPolicy::sliding_mean(cmp_window);
    for (int i = 0; i < 3; ++i) {
        ts.full[i] = make_pss_template(i, cfg, tag_rate_hz, smooth_len, params, false);
        ts.half[i] = make_pss_template(i, cfg, tag_rate_hz, smooth_len, params, true);
        ts.bits_full.push_back(
            make_bit_template(i, cfg, tag_rate_hz, smooth_len, policy, params, false));
        ts.bits_half.push_back(
            make_bit_template(i, cfg, tag_rate_hz, smooth_len, policy, params, true));
    }
    return cache.emplace(key, std::move(ts)).first->second;
}

// CP-stripped PSS bodies for the IQ reference receiver.
const std::array<IqWaveform, 3>& pss_bodies_for(const NumerologyConfig& cfg) {
    static std::mutex mu;
    static std::map<std::pair<int, int>, std::array<IqWaveform, 3>> cache;
    const std::pair<int, int> key{cfg.fft_size, cfg.resolved_cp()};
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    std::array<IqWaveform, 3> bodies;
    for (int i = 0; i < 3; ++i) {
        const IqWaveform sym = pss_time_domain(generate_pss_sequence(i), cfg);
        bodies[i].sample_rate_hz = sym.sample_rate_hz;
        bodies[i].samples.assign(sym.samples.begin() + cfg.resolved_cp(), sym.samples.end());
    }
    return cache.emplace(key, std::move(bodies)).first->second;
}

int odd_window(int w) { return (w % 2 == 0) ? w + 1 : w; }

unsigned long long ops_estimate(MethodId m, const SyncParams& p, const SyncResult& res) {
    const auto n = static_cast<long>(res.stage1_windows);
    const long long rho = p.rho;
    const long long arms = p.arms();
    switch (m) {
        case MethodId::nft:
        case MethodId::sst:
        case MethodId::sa:
        case MethodId::sd:
            return static_cast<unsigned long long>(
                computational_load(m, n, p.rho,
                                   static_cast<long>(res.stage2_windows / 3))
                    .total_ops);
        case MethodId::sd_plus:
            return static_cast<unsigned long long>(
                computational_load(m, n, p.rho, static_cast<long>(res.stage1_windows))
                    .total_ops);
        case MethodId::one_template:
            return static_cast<unsigned long long>(n) * (9ULL * rho - 1ULL);
        case MethodId::rising_edge:
            return static_cast<unsigned long long>(n) * 4ULL;
        // comparator datapaths: XOR/XNOR plus accumulation
        case MethodId::sd_q:
        case MethodId::sa_q:
            return static_cast<unsigned long long>(n) * static_cast<unsigned long long>(2 * arms - 1);
        case MethodId::nft_q:
            return static_cast<unsigned long long>(n) * static_cast<unsigned long long>(3 * (2 * rho - 1));
        case MethodId::sst_q:
            return static_cast<unsigned long long>(n) * static_cast<unsigned long long>(2 * arms - 1) +
                   res.stage2_windows * static_cast<unsigned long long>(2 * arms - 1);
        default:
            return 0; // active receivers sit outside the tag load model
    }
}

} // namespace

void ExperimentConfig::validate() const {
    numerology.validate();
    if (methods.empty() || nid2_values.empty() || tag_rates_hz.empty() ||
        snr_db_values.empty() || cfo_epsilons.empty())
        throw std::invalid_argument("ExperimentConfig: empty grid dimension");
    if (trials_per_point < 1)
        throw std::invalid_argument("ExperimentConfig: trials_per_point must be >= 1");
    if (frame_duration_s < numerology.ssb_period_s)
        throw std::invalid_argument("ExperimentConfig: frame shorter than one SSB period");
    for (int v : nid2_values)
        if (v < 0 || v > 2) throw std::invalid_argument("ExperimentConfig: nid2 out of range");
    for (double r : tag_rates_hz)
        if (!(r > 0.0) || r > numerology.sample_rate_hz())
            throw std::invalid_argument("ExperimentConfig: tag rate outside (0, waveform rate]");
    if (adc_bits != 0 && (adc_bits < 1 || adc_bits > 16))
        throw std::invalid_argument("ExperimentConfig: adc_bits outside [1,16] (0 disables)");
}

TrialRecord run_trial(const PointConfig& point, uint64_t seed) {
    TrialRecord rec;
    rec.method = point.method;
    rec.nid2 = point.nid2;
    rec.tag_rate_hz = point.tag_rate_hz;
    rec.snr_db = point.snr_db;
    rec.epsilon = point.epsilon;

    const ExperimentConfig& exp = *point.exp;
    try {
        const NumerologyConfig& cfg = exp.numerology;
        const double wave_rate = cfg.sample_rate_hz();

        IqWaveform frame =
            build_downlink_frame(point.nid2, exp.frame_duration_s, cfg, mix_seed(seed, 1));
        ChannelConfig ch;
        ch.snr_db = point.snr_db;
        ch.epsilon = point.epsilon;
        ch.scs_hz = cfg.scs_hz;
        ch.rng_seed = mix_seed(seed, 2);
        const IqWaveform y = apply_channel(frame, ch);

        SyncParams params = SyncParams::for_rate(point.tag_rate_hz, cfg);
        if (exp.rho_override) params.rho = *exp.rho_override;
        params.r_threshold = exp.thresholds.r_threshold;
        params.sym_threshold = exp.thresholds.sym_threshold;
        params.sd_gamma = exp.thresholds.sd_gamma;

        SyncResult res;
        if (point.method == MethodId::active_xcorr || point.method == MethodId::active_autocorr) {
            if (point.method == MethodId::active_xcorr) {
                res = iq_fine_timing(y, pss_bodies_for(cfg), true, cfg);
                res.finalize(y.pss_centers, wave_rate);
            } else {
                res = active_autocorr_detect(y, cfg);
                finalize_mod_stride(res, y.pss_centers, cfg.symbol_stride(), wave_rate);
            }
        } else {
            const int smooth = exp.smooth_len > 0
                                   ? exp.smooth_len
                                   : default_smooth_len(wave_rate, point.tag_rate_hz);
            const Envelope env = extract_envelope(y, point.tag_rate_hz, smooth);
            const int cmp_window =
                exp.comparator_window > 0 ? odd_window(exp.comparator_window)
                                          : odd_window(params.rho);
            const TemplateSet& ts =
                templates_for(cfg, point.tag_rate_hz, smooth, params, cmp_window);

            if (is_quantized(point.method)) {
                const BitStream bits =
                    quantize_comparator(env, ThresholdPolicy::sliding_mean(cmp_window));
                switch (point.method) {
                    case MethodId::sd_q:
                        res = quantized_detect(bits, QuantMethod::sd_q, {}, params);
                        break;
                    case MethodId::sa_q:
                        res = quantized_detect(bits, QuantMethod::sa_q, {}, params);
                        break;
                    case MethodId::nft_q:
                        res = quantized_detect(bits, QuantMethod::nft_q, ts.bits_full, params);
                        break;
                    default:
                        res = quantized_detect(bits, QuantMethod::sst_q, ts.bits_half, params);
                        break;
                }
                res.finalize(bits.true_pss_centers, point.tag_rate_hz);
            } else {
                const Envelope fed = exp.adc_bits > 0 ? quantize_adc(env, exp.adc_bits) : env;
                switch (point.method) {
                    case MethodId::nft:
                        res = nft_detect(fed, ts.full, params);
                        break;
                    case MethodId::sst:
                        res = sst_detect(fed, ts.half, params);
                        break;
                    case MethodId::sa:
                        res = sa_detect(fed, params);
                        break;
                    case MethodId::sd:
                        res = sd_detect(fed, params);
                        break;
                    case MethodId::sd_plus:
                        res = sd_plus_detect(fed, params);
                        break;
                    case MethodId::one_template:
                        res = baseline_one_template(fed, ts.full[0], params);
                        break;
                    case MethodId::rising_edge:
                        res = baseline_rising_edge(fed, params);
                        break;
                    default:
                        throw std::invalid_argument("run_trial: unsupported method");
                }
                res.finalize(env.true_pss_centers, point.tag_rate_hz);
            }
            rec.ops = ops_estimate(point.method, params, res);
        }

        rec.errors_us = res.errors_us;
        rec.delays_us = res.delays_us;
        rec.median_error_us = median_of(rec.errors_us);
        double dsum = 0;
        for (double d : rec.delays_us) dsum += d;
        rec.mean_delay_us = rec.delays_us.empty() ? 0.0 : dsum / rec.delays_us.size();
        rec.success = !res.detections.empty() && rec.median_error_us < kSuccessBoundUs;
    } catch (const std::exception&) {
        rec.failed = true;
        rec.success = false;
        rec.median_error_us = kInf;
    }
    return rec;
}

std::vector<PointConfig> expand_points(const ExperimentConfig& cfg) {
    std::vector<PointConfig> points;
    for (MethodId m : cfg.methods)
        for (int nid2 : cfg.nid2_values)
            for (double rate : cfg.tag_rates_hz)
                for (double snr : cfg.snr_db_values)
                    for (double eps : cfg.cfo_epsilons)
                        points.push_back({m, nid2, rate, snr, eps, &cfg});
    return points;
}

namespace {

PointSummary summarize(std::size_t index, const PointConfig& p,
                       std::span<const TrialRecord> trials) {
    PointSummary s;
    s.point_index = index;
    s.method = p.method;
    s.nid2 = p.nid2;
    s.tag_rate_hz = p.tag_rate_hz;
    s.snr_db = p.snr_db;
    s.epsilon = p.epsilon;
    s.trials = static_cast<int>(trials.size());
    s.thresholds = p.exp->thresholds;
    NumerologyConfig cfg = p.exp->numerology;
    SyncParams params = SyncParams::for_rate(p.tag_rate_hz, cfg);
    s.rho = p.exp->rho_override ? *p.exp->rho_override : params.rho;

    std::vector<double> errors, delays;
    double succ = 0;
    for (const TrialRecord& t : trials) {
        errors.insert(errors.end(), t.errors_us.begin(), t.errors_us.end());
        delays.insert(delays.end(), t.delays_us.begin(), t.delays_us.end());
        succ += t.success ? 1.0 : 0.0;
        s.total_ops += t.ops;
    }
    s.median_error_us = median_of(errors);
    s.q1_error_us = quantile_of(errors, 0.25);
    s.q3_error_us = quantile_of(errors, 0.75);
    double dsum = 0;
    for (double d : delays) dsum += d;
    s.mean_delay_us = delays.empty() ? 0.0 : dsum / delays.size();
    s.success_rate = trials.empty() ? 0.0 : succ / static_cast<double>(trials.size());
    return s;
}

void run_points(const ExperimentConfig& cfg, const std::vector<PointConfig>& points,
                const std::vector<std::size_t>& todo, SweepResult& out) {
    const int T = cfg.trials_per_point;
    struct Task {
        std::size_t point;
        int trial;
    };
    std::vector<Task> tasks;
    for (std::size_t pi : todo)
        for (int t = 0; t < T; ++t) tasks.push_back({pi, t});

    std::vector<TrialRecord> records(tasks.size());
    std::atomic<std::size_t> next{0};
    const unsigned n_threads = cfg.threads > 0
                                   ? static_cast<unsigned>(cfg.threads)
                                   : std::max(1u, std::thread::hardware_concurrency());
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            const Task& task = tasks[i];
            const uint64_t seed =
                mix_seed(mix_seed(cfg.rng_seed, task.point), static_cast<uint64_t>(task.trial));
            TrialRecord rec = run_trial(points[task.point], seed);
            rec.trial = task.trial;
            records[i] = std::move(rec);
        }
    };
    std::vector<std::thread> pool;
    for (unsigned i = 1; i < n_threads; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    for (std::size_t k = 0; k < todo.size(); ++k) {
        const std::size_t pi = todo[k];
        std::span<const TrialRecord> slice(records.data() + k * T, T);
        out.trials.insert(out.trials.end(), slice.begin(), slice.end());
        out.summaries.push_back(summarize(pi, points[pi], slice));
    }
}

} // namespace

SweepResult sweep(const ExperimentConfig& cfg) {
    cfg.validate();
    const std::vector<PointConfig> points = expand_points(cfg);
    std::vector<std::size_t> todo(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) todo[i] = i;
    SweepResult out;
    run_points(cfg, points, todo, out);
    return out;
}

// ---- file-backed sweep -------------------------------------------------------

namespace {

// JSON has no literal for non-finite doubles (notably snr_db = +inf)
nlohmann::json json_num(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

double json_num_parse(const nlohmann::json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "inf") return kInf;
        if (s == "-inf") return -kInf;
        return std::nan("");
    }
    return kInf;
}

nlohmann::json trial_to_json(std::size_t point_index, const TrialRecord& t) {
    return {
        {"point_index", point_index},   {"method", to_string(t.method)},
        {"nid2", t.nid2},               {"rate_hz", t.tag_rate_hz},
        {"snr_db", json_num(t.snr_db)}, {"epsilon", t.epsilon},
        {"trial", t.trial},             {"errors_us", t.errors_us},
        {"delays_us", t.delays_us},     {"median_error_us", json_num(t.median_error_us)},
        {"mean_delay_us", json_num(t.mean_delay_us)}, {"success", t.success},
        {"ops", t.ops},                 {"failed", t.failed},
    };
}

nlohmann::json summary_to_json(const PointSummary& s) {
    return {
        {"point_index", s.point_index},
        {"method", to_string(s.method)},
        {"nid2", s.nid2},
        {"rate_hz", s.tag_rate_hz},
        {"snr_db", s.snr_db},
        {"epsilon", s.epsilon},
        {"trials", s.trials},
        {"median_error_us", s.median_error_us},
        {"q1_error_us", s.q1_error_us},
        {"q3_error_us", s.q3_error_us},
        {"mean_delay_us", s.mean_delay_us},
        {"success_rate", s.success_rate},
        {"total_ops", s.total_ops},
        {"rho", s.rho},
        {"r_threshold", s.thresholds.r_threshold},
        {"sym_threshold", s.thresholds.sym_threshold},
        {"sd_gamma", s.thresholds.sd_gamma},
    };
}

std::string csv_num(double v) {
    if (std::isinf(v)) return "inf";
    std::ostringstream os;
    os.precision(9);
    os << v;
    return os.str();
}

void write_trials_csv(const std::string& path, const SweepResult& res) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << "method,nid2,rate_hz,snr_db,trial,error_us,delay_us,success,ops\n";
    for (const TrialRecord& t : res.trials)
        f << to_string(t.method) << ',' << t.nid2 << ',' << csv_num(t.tag_rate_hz) << ','
          << csv_num(t.snr_db) << ',' << t.trial << ',' << csv_num(t.median_error_us) << ','
          << csv_num(t.mean_delay_us) << ',' << (t.success ? 1 : 0) << ',' << t.ops << '\n';
    f.flush();
    if (!f) throw std::runtime_error("write failed: " + path);
}

void write_summary_csv(const std::string& path, const SweepResult& res) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << "point_index,method,nid2,rate_hz,snr_db,epsilon,trials,median_error_us,"
         "q1_error_us,q3_error_us,mean_delay_us,success_rate,total_ops,rho,"
         "r_threshold,sym_threshold,sd_gamma\n";
    for (const PointSummary& s : res.summaries)
        f << s.point_index << ',' << to_string(s.method) << ',' << s.nid2 << ','
          << csv_num(s.tag_rate_hz) << ',' << csv_num(s.snr_db) << ',' << csv_num(s.epsilon)
          << ',' << s.trials << ',' << csv_num(s.median_error_us) << ','
          << csv_num(s.q1_error_us) << ',' << csv_num(s.q3_error_us) << ','
          << csv_num(s.mean_delay_us) << ',' << csv_num(s.success_rate) << ',' << s.total_ops
          << ',' << s.rho << ',' << csv_num(s.thresholds.r_threshold) << ','
          << csv_num(s.thresholds.sym_threshold) << ',' << csv_num(s.thresholds.sd_gamma)
          << '\n';
    f.flush();
    if (!f) throw std::runtime_error("write failed: " + path);
}

TrialRecord trial_from_json(const nlohmann::json& j) {
    TrialRecord t;
    t.method = method_from_string(j.at("method").get<std::string>());
    t.nid2 = j.at("nid2").get<int>();
    t.tag_rate_hz = j.at("rate_hz").get<double>();
    t.snr_db = json_num_parse(j.at("snr_db"));
    t.epsilon = j.at("epsilon").get<double>();
    t.trial = j.at("trial").get<int>();
    t.errors_us = j.at("errors_us").get<std::vector<double>>();
    t.delays_us = j.at("delays_us").get<std::vector<double>>();
    t.median_error_us = json_num_parse(j.at("median_error_us"));
    t.mean_delay_us = json_num_parse(j.at("mean_delay_us"));
    t.success = j.at("success").get<bool>();
    t.ops = j.at("ops").get<unsigned long long>();
    t.failed = j.at("failed").get<bool>();
    return t;
}

} // namespace

void run_sweep_to_files(const ExperimentConfig& cfg, const std::string& out_dir,
                        const std::string& format) {
    cfg.validate();
    if (format != "csv" && format != "json")
        throw std::invalid_argument("run_sweep_to_files: format must be csv or json");

    std::filesystem::create_directories(out_dir);
    const std::string state_path = out_dir + "/sweep_state.json";
    const std::vector<PointConfig> points = expand_points(cfg);

    // resume: keep trials of completed points, recompute the rest
    std::map<std::size_t, std::vector<TrialRecord>> done;
    if (std::filesystem::exists(state_path)) {
        std::ifstream f(state_path);
        nlohmann::json st;
        f >> st;
        if (st.value("rng_seed", uint64_t{0}) == cfg.rng_seed &&
            st.value("n_points", std::size_t{0}) == points.size() &&
            st.value("trials_per_point", -1) == cfg.trials_per_point) {
            for (const auto& jt : st.at("trials")) {
                const auto pi = jt.at("point_index").get<std::size_t>();
                done[pi].push_back(trial_from_json(jt));
            }
            for (auto it = done.begin(); it != done.end();) {
                if (static_cast<int>(it->second.size()) != cfg.trials_per_point)
                    it = done.erase(it);
                else
                    ++it;
            }
        }
    }

    std::vector<std::size_t> todo;
    for (std::size_t i = 0; i < points.size(); ++i)
        if (!done.count(i)) todo.push_back(i);

    SweepResult fresh;
    run_points(cfg, points, todo, fresh);

    // merge in point order
    SweepResult all;
    std::size_t fresh_pos = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (auto it = done.find(i); it != done.end()) {
            all.trials.insert(all.trials.end(), it->second.begin(), it->second.end());
            all.summaries.push_back(
                summarize(i, points[i],
                          std::span<const TrialRecord>(it->second.data(), it->second.size())));
        } else {
            std::span<const TrialRecord> slice(
                fresh.trials.data() + fresh_pos * cfg.trials_per_point, cfg.trials_per_point);
            all.trials.insert(all.trials.end(), slice.begin(), slice.end());
            all.summaries.push_back(summarize(i, points[i], slice));
            ++fresh_pos;
        }
    }

    // state for future resumes
    {
        nlohmann::json st;
        st["rng_seed"] = cfg.rng_seed;
        st["n_points"] = points.size();
        st["trials_per_point"] = cfg.trials_per_point;
        st["trials"] = nlohmann::json::array();
        std::size_t pi = 0;
        for (std::size_t i = 0; i < all.trials.size(); ++i) {
            pi = i / static_cast<std::size_t>(cfg.trials_per_point);
            st["trials"].push_back(trial_to_json(pi, all.trials[i]));
        }
        std::ofstream f(state_path);
        if (!f) throw std::runtime_error("cannot open for writing: " + state_path);
        f << st.dump() << '\n';
        if (!f) throw std::runtime_error("write failed: " + state_path);
    }

    if (format == "csv") {
        write_trials_csv(out_dir + "/trials.csv", all);
        write_summary_csv(out_dir + "/summary.csv", all);
    } else {
        nlohmann::json j;
        j["trials"] = nlohmann::json::array();
        for (std::size_t i = 0; i < all.trials.size(); ++i)
            j["trials"].push_back(
                trial_to_json(i / static_cast<std::size_t>(cfg.trials_per_point), all.trials[i]));
        j["summaries"] = nlohmann::json::array();
        for (const auto& s : all.summaries) j["summaries"].push_back(summary_to_json(s));
        std::ofstream f(out_dir + "/sweep.json");
        if (!f) throw std::runtime_error("cannot open for writing: " + out_dir + "/sweep.json");
        f << j.dump(2) << '\n';
        if (!f) throw std::runtime_error("write failed: " + out_dir + "/sweep.json");
    }
}

// ---- experiment config loading ------------------------------------------------

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config: " + path);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("config parse error: ") + e.what());
    }

    ExperimentConfig cfg;
    try {
        if (j.contains("methods")) {
            cfg.methods.clear();
            for (const auto& m : j.at("methods"))
                cfg.methods.push_back(method_from_string(m.get<std::string>()));
        }
        if (j.contains("nid2_values")) cfg.nid2_values = j.at("nid2_values").get<std::vector<int>>();
        if (j.contains("tag_rates_hz"))
            cfg.tag_rates_hz = j.at("tag_rates_hz").get<std::vector<double>>();
        if (j.contains("snr_db_values"))
            cfg.snr_db_values = j.at("snr_db_values").get<std::vector<double>>();
        if (j.contains("cfo_epsilons"))
            cfg.cfo_epsilons = j.at("cfo_epsilons").get<std::vector<double>>();
        cfg.trials_per_point = j.value("trials_per_point", cfg.trials_per_point);
        cfg.frame_duration_s = j.value("frame_duration_s", cfg.frame_duration_s);
        cfg.rng_seed = j.value("rng_seed", cfg.rng_seed);
        if (j.contains("numerology")) {
            const auto& n = j.at("numerology");
            cfg.numerology.scs_hz = n.value("scs_hz", cfg.numerology.scs_hz);
            cfg.numerology.fft_size = n.value("fft_size", cfg.numerology.fft_size);
            cfg.numerology.cp_samples = n.value("cp_samples", cfg.numerology.cp_samples);
            cfg.numerology.ssb_period_s = n.value("ssb_period_s", cfg.numerology.ssb_period_s);
        }
        if (j.contains("thresholds")) {
            const auto& t = j.at("thresholds");
            cfg.thresholds.r_threshold = t.value("r_threshold", cfg.thresholds.r_threshold);
            cfg.thresholds.sym_threshold = t.value("sym_threshold", cfg.thresholds.sym_threshold);
            cfg.thresholds.sd_gamma = t.value("sd_gamma", cfg.thresholds.sd_gamma);
        }
        cfg.output_path = j.value("output_path", cfg.output_path);
        cfg.adc_bits = j.value("adc_bits", cfg.adc_bits);
        cfg.smooth_len = j.value("smooth_len", cfg.smooth_len);
        cfg.comparator_window = j.value("comparator_window", cfg.comparator_window);
        if (j.contains("rho_override") && !j.at("rho_override").is_null())
            cfg.rho_override = j.at("rho_override").get<int>();
        cfg.threads = j.value("threads", cfg.threads);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("config field error: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

// ---- BER experiments -----------------------------------------------------------

const char* to_string(Modulation m) {
    switch (m) {
        case Modulation::bpsk: return "bpsk";
        case Modulation::qpsk: return "qpsk";
        case Modulation::psk16: return "16psk";
    }
    return "?";
}

Modulation modulation_from_string(const std::string& name) {
    if (name == "bpsk") return Modulation::bpsk;
    if (name == "qpsk") return Modulation::qpsk;
    if (name == "16psk" || name == "psk16") return Modulation::psk16;
    throw std::invalid_argument("unknown modulation: " + name);
}

namespace {

// Reader-side integration length per backscatter symbol; coherent gain over
// the per-sample SNR.
constexpr int kBerIntegrationSamples = 167;
constexpr double kSymbolDurationUs = 100.0 / 3.0; // one OFDM symbol at 30 kHz

int mod_order(Modulation m) {
    switch (m) {
        case Modulation::bpsk: return 2;
        case Modulation::qpsk: return 4;
        case Modulation::psk16: return 16;
    }
    return 2;
}

uint32_t gray_code(uint32_t s) { return s ^ (s >> 1); }

int bits_per_symbol(Modulation m) {
    return m == Modulation::bpsk ? 1 : (m == Modulation::qpsk ? 2 : 4);
}

// Bit errors over n_symbols of M-PSK with the receive window late by alpha
// of a symbol. The leaked tail of the next symbol rotates and shrinks the
// decision variable.
long psk_bit_errors(Modulation mod, double alpha, double snr_db, int n_symbols, Rng& rng) {
    const int M = mod_order(mod);
    const double sector = kTwoPi / M;
    const double snr_eff = std::pow(10.0, snr_db / 10.0) * kBerIntegrationSamples;
    const double noise_var = 1.0 / snr_eff;

    long errors = 0;
    int s_next = rng.uniform_int(0, M - 1);
    for (int k = 0; k < n_symbols; ++k) {
        const int s_cur = s_next;
        s_next = rng.uniform_int(0, M - 1);
        const double ph_cur = sector * s_cur;
        const double ph_next = sector * s_next;
        cdouble r = (1.0 - alpha) * cdouble{std::cos(ph_cur), std::sin(ph_cur)} +
                    alpha * cdouble{std::cos(ph_next), std::sin(ph_next)};
        r += rng.cgaussian(noise_var);
        int hat = static_cast<int>(std::lround(std::arg(r) / sector)) % M;
        if (hat < 0) hat += M;
        errors += std::popcount(gray_code(static_cast<uint32_t>(hat)) ^
                                gray_code(static_cast<uint32_t>(s_cur)));
    }
    return errors;
}

} // namespace

std::vector<BerRecord> ber_experiment(Modulation mod, std::span<const double> offsets_us,
                                      double snr_db, int symbols_per_offset, uint64_t seed) {
    for (double o : offsets_us)
        if (o < 0.0) throw std::invalid_argument("ber_experiment: offsets must be >= 0");

    std::vector<BerRecord> out;
    const long bits = static_cast<long>(symbols_per_offset) * bits_per_symbol(mod);
    for (const double off : offsets_us) {
        const double alpha = std::min(off / kSymbolDurationUs, 1.0);
        // identical draws at every offset: differences come from the offset alone
        Rng rng(mix_seed(seed, 0xbe4));
        const long errors = psk_bit_errors(mod, alpha, snr_db, symbols_per_offset, rng);
        BerRecord r;
        r.modulation = mod;
        r.label = "offset";
        r.timing_offset_us = off;
        r.snr_db = snr_db;
        r.ber = static_cast<double>(errors) / static_cast<double>(bits);
        r.trials = symbols_per_offset;
        out.push_back(r);
    }
    return out;
}

std::vector<BerRecord> with_without_sync_ber(std::span<const double> snr_db_grid,
                                             int sync_trials, int symbols_per_trial,
                                             uint64_t seed) {
    ExperimentConfig exp; // defaults; SD at 5 MHz
    exp.trials_per_point = 1;

    std::vector<BerRecord> out;
    const Modulation mod = Modulation::qpsk;
    const long bits_per_trial = static_cast<long>(symbols_per_trial) * bits_per_symbol(mod);

    for (std::size_t si = 0; si < snr_db_grid.size(); ++si) {
        const double snr = snr_db_grid[si];
        long err_with = 0, err_without = 0;
        double offset_with_acc = 0;
        for (int t = 0; t < sync_trials; ++t) {
            // same frame/noise seeds across SNR points, so BER is monotone
            // up to the noise scaling itself
            const uint64_t trial_seed = mix_seed(seed, static_cast<uint64_t>(t));
            PointConfig pc{MethodId::sd, 0, 5e6, snr, 0.0, &exp};
            const TrialRecord rec = run_trial(pc, trial_seed);
            double offset = rec.median_error_us;
            if (!std::isfinite(offset)) offset = kSymbolDurationUs / 2.0;
            offset_with_acc += offset;

            Rng sym_rng(mix_seed(trial_seed, 0x5d5d));
            err_with += psk_bit_errors(mod, std::min(offset / kSymbolDurationUs, 1.0), snr,
                                       symbols_per_trial, sym_rng);

            Rng off_rng(mix_seed(trial_seed, 0x0ff5));
            const double alpha_u = off_rng.uniform();
            Rng sym_rng2(mix_seed(trial_seed, 0x5d5d)); // same symbol/noise draws
            err_without += psk_bit_errors(mod, alpha_u, snr, symbols_per_trial, sym_rng2);
        }
        const long total_bits = bits_per_trial * sync_trials;
        BerRecord with;
        with.modulation = mod;
        with.label = "sd-sync";
        with.timing_offset_us = offset_with_acc / sync_trials;
        with.snr_db = snr;
        with.ber = static_cast<double>(err_with) / static_cast<double>(total_bits);
        with.trials = static_cast<long>(symbols_per_trial) * sync_trials;
        out.push_back(with);

        BerRecord without = with;
        without.label = "random-offset";
        without.timing_offset_us = kSymbolDurationUs / 2.0;
        without.ber = static_cast<double>(err_without) / static_cast<double>(total_bits);
        out.push_back(without);
    }
    return out;
}

void write_ber_csv(const std::string& path, const std::vector<BerRecord>& records) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << "modulation,label,timing_offset_us,snr_db,ber,trials\n";
    for (const BerRecord& r : records)
        f << to_string(r.modulation) << ',' << r.label << ',' << csv_num(r.timing_offset_us)
          << ',' << csv_num(r.snr_db) << ',' << csv_num(r.ber) << ',' << r.trials << '\n';
    f.flush();
    if (!f) throw std::runtime_error("write failed: " + path);
}

} // namespace tagsync
