#pragma once

#include <optional>
#include <span>
#include <vector>

#include "tagsync/common.hpp"

namespace tagsync {

// Flip-flop prices of the arithmetic units on the reference low-power FPGA,
// and the part's total budget.
struct CostTable {
    long ff_per_multiplier = 456;
    long ff_per_adder = 25;
    long budget_ff = 6144;
};

struct ResourceReport {
    MethodId method = MethodId::sd;
    int rho = 0;
    long multipliers = 0;
    long adders = 0;
    long d_flip_flops = 0;
    bool fits_budget = false;
};

struct LoadReport {
    MethodId method = MethodId::sd;
    long n_samples = 0;
    int rho = 0;
    long windows_executed = 0;
    long long total_ops = 0;
};

// Datapath cost of one detector instance:
//   NFT  3(3p+1) multipliers, 3(5p-3) adders
//   SST  3(3p/2+1) multipliers, 3(5p/2-3) adders (half templates; the
//        stage-1 unit reuses the correlator datapath)
//   SA   (3p/2+1) multipliers, (5p/2-3) adders
//   SD/SD+  0 multipliers, p-1 adders
// SST/SA require even rho. Unknown methods throw std::invalid_argument.
ResourceReport count_resources(MethodId method, int rho, const CostTable& table = {});

// Total operation count over a run of n_samples:
//   NFT  M * 3(9p - 1), M = n_samples
//   SST  n_samples * (9(p/2) - 1) + first_detect_windows * 3(9(p/2) - 1)
//   SA   n_samples * (9(p/2) - 1)
//   SD   n_samples * (p - 1)
//   SD+  first_detect_windows * (p - 1)
LoadReport computational_load(MethodId method, long n_samples, int rho,
                              long first_detect_windows = 0);

// 1-bit comparator datapaths: multipliers are gone, XOR/XNOR accumulation
// remains. Flip-flop counts follow a per-sample density calibrated at the
// 5 MHz operating point (rho = 167): SD_Q 853, SA_Q 855, SST_Q 2900,
// NFT_Q 7208.
ResourceReport quantized_resources(MethodId method, int rho, const CostTable& table = {});

struct Table1Cell {
    long multipliers = 0;
    long adders = 0;
    long d_flip_flops = 0;
};

struct Table1Row {
    MethodId method = MethodId::sd;
    double rate_hz = 0.0;
    int rho = 0;
    ResourceReport computed;
    std::optional<Table1Cell> published;
    bool ff_matches = false;     // computed == published
    bool known_erratum = false;  // published cell disagrees with its own formula
};

// Method x rate grid of resource reports with a diff against the published
// reference values (two NFT flip-flop cells are known misprints and are
// flagged rather than matched).
std::vector<Table1Row> table1_report(std::span<const double> rates_hz);
std::vector<Table1Row> table1_report(); // default rates 1.92 / 3.84 / 7.68 MHz

} // namespace tagsync
