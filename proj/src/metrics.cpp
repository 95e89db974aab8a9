#include "jpais/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace jpais::metrics {

double count_ber(const std::vector<int>& tx_bits, const std::vector<int>& rx_bits, int skip) {
    if (tx_bits.size() != rx_bits.size()) throw std::invalid_argument("count_ber: length mismatch");
    if (skip < 0 || size_t(skip) >= tx_bits.size())
        throw std::invalid_argument("count_ber: skip out of range");
    size_t errors = 0;
    for (size_t i = skip; i < tx_bits.size(); ++i) errors += tx_bits[i] != rx_bits[i];
    return double(errors) / double(tx_bits.size() - skip);
}

double normalized_throughput(double ber, double rate, int packet_symbols, int constellation) {
    const double exponent = double(packet_symbols) * std::log2(double(constellation));
    return rate * std::pow(1.0 - ber, exponent);
}

double mutual_information(double sinr, int phases) {
    return std::log2(1.0 + sinr) / double(phases);
}

double empirical_sinr(const std::vector<cx>& outputs, const std::vector<cx>& symbols) {
    if (outputs.size() != symbols.size() || outputs.empty())
        throw std::invalid_argument("empirical_sinr: bad sample streams");
    cx corr{};
    double power = 0.0;
    for (size_t i = 0; i < outputs.size(); ++i) {
        corr += std::conj(symbols[i]) * outputs[i];
        power += std::norm(outputs[i]);
    }
    corr /= double(outputs.size());
    power /= double(outputs.size());
    const double signal = std::norm(corr);
    const double residual = power - signal;
    if (!(residual > 0.0)) return signal > 0.0 ? 1e12 : 0.0;
    return signal / residual;
}

Algorithm algorithm_from_name(const std::string& name) {
    if (name == "ncis") return Algorithm::NcisUp;
    if (name == "ncis-down") return Algorithm::NcisDown;
    if (name == "cis") return Algorithm::CisUp;
    if (name == "cis-down") return Algorithm::CisDown;
    if (name == "jpais-gpc") return Algorithm::JpaisGpc;
    if (name == "jpais-ipc") return Algorithm::JpaisIpc;
    throw std::invalid_argument("unknown algorithm: " + name);
}

std::string algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::NcisUp: return "ncis";
        case Algorithm::NcisDown: return "ncis-down";
        case Algorithm::CisUp: return "cis";
        case Algorithm::CisDown: return "cis-down";
        case Algorithm::JpaisGpc: return "jpais-gpc";
        case Algorithm::JpaisIpc: return "jpais-ipc";
    }
    return "?";
}

OpCounts filter_cost_joint(const SystemConfig& cfg) {
    const double d = double(cfg.phases()) * cfg.window();
    const double k = cfg.users;
    return {2 * d * d + 2 * k * d - d + 1, 3 * d * d + 2 * k * d + 3 * d + 1};
}

OpCounts alloc_cost_global(const SystemConfig& cfg) {
    const double k = cfg.users;
    const double np = cfg.phases();
    const double l = cfg.paths;
    const double m = cfg.window();
    const double s = k * np;  // stacked allocation length
    OpCounts c;
    c.adds = 3 * k * s + k * np * (l - 1) + k * m * np + k * s + 6 * s * s + 3 * k * np +
             (np - 1) + 2;
    c.mults = k * s + 4 * s * s + (k + l) * s * s - s * s + k * m * np * l + (np - 1);
    return c;
}

OpCounts channel_cost_global(const SystemConfig& cfg) {
    const double s = double(cfg.users) * cfg.phases();
    const double sl = s * cfg.paths;
    return {5 * sl * sl + 5 * sl + 3, 5 * s * s + 6 * sl + 1};
}

OpCounts filter_cost_user(const SystemConfig& cfg) {
    const double d = double(cfg.phases()) * cfg.window();
    return {2 * d * d + d + 1, 3 * d * d + 5 * d + 1};
}

OpCounts alloc_cost_user(const SystemConfig& cfg) {
    const double np = cfg.phases();
    const double l = cfg.paths;
    const double m = cfg.window();
    return {2 * np * np + 3 * np + m * np * l + np * l - 3,
            3 * np * np + 7 * np + m * np * l + np * l + 3};
}

OpCounts channel_cost_user(const SystemConfig& cfg) {
    const double np = cfg.phases();
    const double l = cfg.paths;
    const double m = cfg.window();
    const double nl = np * l;
    return {2 * nl * nl + 5 * m * nl - 5 * np + 3, 6 * nl * nl + m * nl + 4 * np + 1};
}

OpCounts complexity_count(Algorithm a, const SystemConfig& cfg) {
    SystemConfig flat = cfg;
    flat.relays = 0;
    switch (a) {
        case Algorithm::NcisUp: return filter_cost_joint(flat);
        case Algorithm::NcisDown: return filter_cost_user(flat);
        case Algorithm::CisUp: return filter_cost_joint(cfg);
        case Algorithm::CisDown: return filter_cost_user(cfg);
        case Algorithm::JpaisGpc: {
            OpCounts c = filter_cost_joint(cfg);
            c += alloc_cost_global(cfg);
            c += channel_cost_global(cfg);
            return c;
        }
        case Algorithm::JpaisIpc: {
            OpCounts c = filter_cost_user(cfg);
            c += alloc_cost_user(cfg);
            c += channel_cost_user(cfg);
            return c;
        }
    }
    throw std::invalid_argument("complexity_count: bad algorithm");
}

std::string csv_header() {
    return "algorithm,mode,users,relays,snr_db,fdt,p_e,runs,seed,ber,ber_ci95,mi,mi_unscaled,nt,"
           "adds,mults";
}

namespace {
std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}
}  // namespace

std::string csv_row(const RunMetrics& m) {
    std::string s;
    s += m.algorithm + "," + m.mode + ",";
    s += std::to_string(m.users) + "," + std::to_string(m.relays) + ",";
    s += fmt(m.snr_db) + "," + fmt(m.doppler) + "," + fmt(m.feedback_error) + ",";
    s += std::to_string(m.runs) + "," + std::to_string(m.seed) + ",";
    s += fmt(m.ber) + "," + fmt(m.ber_ci95) + "," + fmt(m.mi) + "," + fmt(m.mi_unscaled) + "," +
         fmt(m.nt) + "," + fmt(m.adds) + "," + fmt(m.mults);
    return s;
}

void mean_ci95(const std::vector<double>& values, double& mean, double& ci95) {
    mean = 0.0;
    ci95 = 0.0;
    if (values.empty()) return;
    for (double v : values) mean += v;
    mean /= double(values.size());
    if (values.size() < 2) return;
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= double(values.size() - 1);
    ci95 = 1.96 * std::sqrt(var / double(values.size()));
}

}  // namespace jpais::metrics
