// tagsync: waveform generation, synchronization sweeps, resource reports and
// BER experiments from one binary. Exit codes: 0 ok, 2 configuration error,
// 3 I/O error.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "tagsync/harness.hpp"
#include "tagsync/io.hpp"
#include "tagsync/resources.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

int cmd_generate(int nid2, double duration_s, uint64_t seed, const std::string& out_dir,
                 tagsync::NumerologyConfig cfg) {
    std::filesystem::create_directories(out_dir);
    const tagsync::IqWaveform frame =
        tagsync::build_downlink_frame(nid2, duration_s, cfg, seed);
    tagsync::write_waveform(out_dir + "/frame.pssw", frame);
    tagsync::write_annotations(out_dir + "/frame.annotations.json", frame);
    for (int i = 0; i < 3; ++i) {
        const auto sym = tagsync::pss_time_domain(tagsync::generate_pss_sequence(i), cfg);
        tagsync::write_waveform(out_dir + "/pss_nid2_" + std::to_string(i) + ".pssw", sym);
    }
    std::cout << "wrote " << frame.samples.size() << " samples, "
              << frame.pss_centers.size() << " PSS instances to " << out_dir << "\n";
    return 0;
}

int cmd_report_resources(const std::vector<double>& rates_hz, const std::string& out,
                         const std::string& format) {
    const auto rows = tagsync::table1_report(
        std::span<const double>(rates_hz.data(), rates_hz.size()));

    std::ostringstream body;
    if (format == "csv") {
        body << "method,rate_hz,rho,multipliers,adders,d_flip_flops,fits_budget,"
                "published_ff,matches_paper,known_erratum\n";
        for (const auto& r : rows) {
            body << tagsync::to_string(r.method) << ',' << r.rate_hz << ',' << r.rho << ','
                 << r.computed.multipliers << ',' << r.computed.adders << ','
                 << r.computed.d_flip_flops << ',' << (r.computed.fits_budget ? 1 : 0) << ',';
            if (r.published)
                body << r.published->d_flip_flops;
            else
                body << "none";
            body << ',' << (r.ff_matches ? 1 : 0) << ',' << (r.known_erratum ? 1 : 0) << '\n';
        }
        // quantized grid at the same rates
        for (const auto m : {tagsync::MethodId::nft_q, tagsync::MethodId::sst_q,
                             tagsync::MethodId::sa_q, tagsync::MethodId::sd_q}) {
            for (const double rate : rates_hz) {
                const int rho = static_cast<int>(std::lround(rate / 30e3));
                const auto rep = tagsync::quantized_resources(m, rho);
                body << tagsync::to_string(m) << ',' << rate << ',' << rho << ','
                     << rep.multipliers << ',' << rep.adders << ',' << rep.d_flip_flops << ','
                     << (rep.fits_budget ? 1 : 0) << ",none,0,0\n";
            }
        }
    } else {
        body << "[\n";
        bool first = true;
        for (const auto& r : rows) {
            if (!first) body << ",\n";
            first = false;
            body << "  {\"method\":\"" << tagsync::to_string(r.method) << "\",\"rate_hz\":"
                 << r.rate_hz << ",\"rho\":" << r.rho << ",\"d_flip_flops\":"
                 << r.computed.d_flip_flops << ",\"matches_paper\":" << (r.ff_matches ? "true" : "false")
                 << ",\"known_erratum\":" << (r.known_erratum ? "true" : "false") << "}";
        }
        body << "\n]\n";
    }

    if (out.empty() || out == "-") {
        std::cout << body.str();
    } else {
        std::filesystem::create_directories(out);
        const std::string path =
            out + (format == "csv" ? "/resources.csv" : "/resources.json");
        std::ofstream f(path);
        if (!f) throw std::runtime_error("cannot open for writing: " + path);
        f << body.str();
        if (!f) throw std::runtime_error("write failed: " + path);
        std::cout << "wrote " << path << "\n";
    }
    return 0;
}

int cmd_ber(const std::vector<std::string>& mods, double offset_max_us, double offset_step_us,
            double snr_db, int symbols, uint64_t seed, const std::string& out,
            bool with_without) {
    std::vector<tagsync::BerRecord> records;
    std::vector<double> offsets;
    for (double o = 0.0; o <= offset_max_us + 1e-9; o += offset_step_us) offsets.push_back(o);

    for (const auto& name : mods) {
        const auto mod = tagsync::modulation_from_string(name);
        const auto recs = tagsync::ber_experiment(
            mod, std::span<const double>(offsets.data(), offsets.size()), snr_db, symbols, seed);
        records.insert(records.end(), recs.begin(), recs.end());
    }
    if (with_without) {
        const double snrs[] = {0.0, 5.0, 10.0, 15.0, 20.0};
        const auto recs = tagsync::with_without_sync_ber(
            std::span<const double>(snrs, 5), 50, symbols / 10 + 1, seed);
        records.insert(records.end(), recs.begin(), recs.end());
    }

    if (out.empty() || out == "-") {
        std::cout << "modulation,label,timing_offset_us,snr_db,ber,trials\n";
        for (const auto& r : records)
            std::cout << tagsync::to_string(r.modulation) << ',' << r.label << ','
                      << r.timing_offset_us << ',' << r.snr_db << ',' << r.ber << ','
                      << r.trials << '\n';
    } else {
        std::filesystem::create_directories(out);
        tagsync::write_ber_csv(out + "/ber.csv", records);
        std::cout << "wrote " << out << "/ber.csv\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"envelope-domain synchronization toolkit for ambient 5G backscatter"};
    app.require_subcommand(1);

    uint64_t seed = 1;
    std::string out_dir;
    std::string format = "csv";
    app.add_option("--seed", seed, "global RNG seed");
    app.add_option("--out", out_dir, "output directory ('-' for stdout where supported)");
    app.add_option("--format", format, "output format")->check(CLI::IsMember({"csv", "json"}));

    // generate
    auto* gen = app.add_subcommand("generate", "write a downlink frame and PSS waveforms");
    int g_nid2 = 0;
    double g_duration = 0.05;
    tagsync::NumerologyConfig g_cfg;
    gen->add_option("--nid2", g_nid2, "cell-ID sector")->check(CLI::Range(0, 2));
    gen->add_option("--duration-s", g_duration, "frame duration in seconds");
    gen->add_option("--fft-size", g_cfg.fft_size, "IDFT size (power of two >= 128)");
    gen->add_option("--scs-hz", g_cfg.scs_hz, "subcarrier spacing");
    gen->add_option("--cp-samples", g_cfg.cp_samples, "cyclic prefix length (-1 = auto)");
    gen->add_option("--ssb-period-s", g_cfg.ssb_period_s, "PSS repetition period");

    // run
    auto* run = app.add_subcommand("run", "run a sweep described by a JSON config");
    std::string config_path;
    run->add_option("--config", config_path, "experiment config file")->required();
    bool seed_given = false;

    // report-resources
    auto* rep = app.add_subcommand("report-resources", "emit the resource/cost grid");
    std::vector<double> rates_hz{1.92e6, 3.84e6, 7.68e6};
    rep->add_option("--rates-hz", rates_hz, "sampling rates");

    // ber
    auto* ber = app.add_subcommand("ber", "timing-offset BER experiments");
    std::vector<std::string> mods{"bpsk", "qpsk", "16psk"};
    double offset_max = 30.0, offset_step = 3.0, ber_snr = 15.0;
    int symbols = 20000;
    bool with_without = false;
    ber->add_option("--mods", mods, "modulations");
    ber->add_option("--offset-max-us", offset_max, "largest timing offset");
    ber->add_option("--offset-step-us", offset_step, "offset grid step");
    ber->add_option("--snr-db", ber_snr, "AWGN level");
    ber->add_option("--symbols", symbols, "symbols per grid point");
    ber->add_flag("--with-without", with_without, "add SD-synchronized vs random-offset rows");

    try {
        app.parse(argc, argv);
        seed_given = app.count("--seed") > 0;
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    try {
        if (gen->parsed())
            return cmd_generate(g_nid2, g_duration, seed, out_dir.empty() ? "." : out_dir, g_cfg);
        if (run->parsed()) {
            tagsync::ExperimentConfig cfg = tagsync::load_experiment_config(config_path);
            if (seed_given) cfg.rng_seed = seed;
            std::string dir = !out_dir.empty() ? out_dir
                              : !cfg.output_path.empty() ? cfg.output_path
                                                         : std::string("out");
            tagsync::run_sweep_to_files(cfg, dir, format);
            std::cout << "wrote sweep outputs to " << dir << "\n";
            return 0;
        }
        if (rep->parsed()) return cmd_report_resources(rates_hz, out_dir, format);
        if (ber->parsed())
            return cmd_ber(mods, offset_max, offset_step, ber_snr, symbols, seed, out_dir,
                           with_without);
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    return kExitConfig;
}
