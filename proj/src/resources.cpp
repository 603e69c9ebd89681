#include "tagsync/resources.hpp"

#include <cmath>
#include <stdexcept>

namespace tagsync {

namespace {

void require_even(MethodId m, int rho) {
    if (rho % 2 != 0)
        throw std::invalid_argument(std::string("count_resources: ") + to_string(m) +
                                    " formula needs even rho");
}

void require_rho(int rho) {
    if (rho < 2) throw std::invalid_argument("resources: rho must be >= 2");
}

} // namespace

ResourceReport count_resources(MethodId method, int rho, const CostTable& table) {
    require_rho(rho);
    ResourceReport r;
    r.method = method;
    r.rho = rho;
    const long p = rho;
    switch (method) {
        case MethodId::nft:
        case MethodId::one_template: // same datapath, one template live
            r.multipliers = 3 * (3 * p + 1);
            r.adders = 3 * (5 * p - 3);
            break;
        case MethodId::sst:
            require_even(method, rho);
            r.multipliers = 3 * (3 * p / 2 + 1);
            r.adders = 3 * (5 * p / 2 - 3);
            break;
        case MethodId::sa:
            require_even(method, rho);
            r.multipliers = 3 * p / 2 + 1;
            r.adders = 5 * p / 2 - 3;
            break;
        case MethodId::sd:
        case MethodId::sd_plus:
            r.multipliers = 0;
            r.adders = p - 1;
            break;
        case MethodId::nft_q:
        case MethodId::sst_q:
        case MethodId::sa_q:
        case MethodId::sd_q:
            return quantized_resources(method, rho, table);
        default:
            throw std::invalid_argument("count_resources: no hardware model for this method");
    }
    r.d_flip_flops = r.multipliers * table.ff_per_multiplier + r.adders * table.ff_per_adder;
    r.fits_budget = r.d_flip_flops <= table.budget_ff;
    return r;
}

ResourceReport quantized_resources(MethodId method, int rho, const CostTable& table) {
    require_rho(rho);
    // flip-flops per sample of window, pinned at rho = 167
    double density = 0.0;
    long adders = 0;
    switch (method) {
        case MethodId::sd_q:
            density = 853.0 / 167.0;
            adders = rho - 1;
            break;
        case MethodId::sa_q:
            density = 855.0 / 167.0;
            adders = rho - 1;
            break;
        case MethodId::sst_q:
            density = 2900.0 / 167.0;
            adders = (rho - 1) + 3 * (rho / 2 - 1);
            break;
        case MethodId::nft_q:
            density = 7208.0 / 167.0;
            adders = 3 * (rho - 1);
            break;
        default:
            throw std::invalid_argument("quantized_resources: not a quantized method");
    }
    ResourceReport r;
    r.method = method;
    r.rho = rho;
    r.multipliers = 0;
    r.adders = adders;
    r.d_flip_flops = std::lround(density * rho);
    r.fits_budget = r.d_flip_flops <= table.budget_ff;
    return r;
}

LoadReport computational_load(MethodId method, long n_samples, int rho,
                              long first_detect_windows) {
    require_rho(rho);
    if (n_samples < 0 || first_detect_windows < 0)
        throw std::invalid_argument("computational_load: counts must be non-negative");
    LoadReport l;
    l.method = method;
    l.n_samples = n_samples;
    l.rho = rho;
    const long long p = rho;
    const long long n = n_samples;
    const long long m2 = first_detect_windows;
    switch (method) {
        case MethodId::nft:
            l.windows_executed = n_samples;
            l.total_ops = n * 3 * (9 * p - 1);
            break;
        case MethodId::sst:
            l.windows_executed = n_samples;
            l.total_ops = n * (9 * (p / 2) - 1) + m2 * 3 * (9 * (p / 2) - 1);
            break;
        case MethodId::sa:
            l.windows_executed = n_samples;
            l.total_ops = n * (9 * (p / 2) - 1);
            break;
        case MethodId::sd:
            l.windows_executed = n_samples;
            l.total_ops = n * (p - 1);
            break;
        case MethodId::sd_plus:
            l.windows_executed = first_detect_windows;
            l.total_ops = m2 * (p - 1);
            break;
        default:
            throw std::invalid_argument("computational_load: no load model for this method");
    }
    return l;
}

namespace {

struct PublishedCell {
    MethodId method;
    double rate_hz;
    Table1Cell cell;
    bool erratum; // flip-flop entry inconsistent with the printed formula
};

// Reference resource table at 1.92 / 3.84 / 7.68 MHz. The two NFT flip-flop
// entries marked as errata do not match 456*mult + 25*add for their own
// printed multiplier/adder counts.
const PublishedCell kPublished[] = {
    {MethodId::nft, 1.92e6, {579, 951, 277299}, true},
    {MethodId::nft, 3.84e6, {1155, 1911, 274455}, true},
    {MethodId::nft, 7.68e6, {2307, 3831, 1147767}, false},
    {MethodId::sst, 1.92e6, {291, 471, 144471}, false},
    {MethodId::sst, 3.84e6, {579, 951, 287799}, false},
    {MethodId::sst, 7.68e6, {1155, 1911, 574455}, false},
    {MethodId::sa, 1.92e6, {97, 157, 48157}, false},
    {MethodId::sa, 3.84e6, {193, 317, 95933}, false},
    {MethodId::sa, 7.68e6, {385, 637, 191485}, false},
    {MethodId::sd, 1.92e6, {0, 63, 1575}, false},
    {MethodId::sd, 3.84e6, {0, 127, 3175}, false},
    {MethodId::sd, 7.68e6, {0, 255, 6375}, false},
};

const PublishedCell* find_published(MethodId m, double rate_hz) {
    for (const auto& c : kPublished)
        if (c.method == m && std::fabs(c.rate_hz - rate_hz) < 1.0) return &c;
    return nullptr;
}

} // namespace

std::vector<Table1Row> table1_report(std::span<const double> rates_hz) {
    const MethodId methods[] = {MethodId::nft, MethodId::sst, MethodId::sa, MethodId::sd};
    std::vector<Table1Row> rows;
    for (const MethodId m : methods) {
        for (const double rate : rates_hz) {
            Table1Row row;
            row.method = m;
            row.rate_hz = rate;
            row.rho = static_cast<int>(std::lround(rate / 30e3));
            row.computed = count_resources(m, row.rho);
            if (const PublishedCell* c = find_published(m, rate)) {
                row.published = c->cell;
                row.known_erratum = c->erratum;
                row.ff_matches = row.computed.d_flip_flops == c->cell.d_flip_flops;
            }
            rows.push_back(row);
        }
    }
    return rows;
}

std::vector<Table1Row> table1_report() {
    const double rates[] = {1.92e6, 3.84e6, 7.68e6};
    return table1_report(std::span<const double>(rates, 3));
}

} // namespace tagsync
