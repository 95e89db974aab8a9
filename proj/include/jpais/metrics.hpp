#ifndef JPAIS_METRICS_HPP
#define JPAIS_METRICS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "jpais/config.hpp"
#include "jpais/linalg.hpp"

namespace jpais::metrics {

using linalg::cx;

/// Hamming error fraction over the data portion (after skipping the
/// training prefix).  Streams must have equal length after the skip.
double count_ber(const std::vector<int>& tx_bits, const std::vector<int>& rx_bits, int skip = 0);

/// Packet-success-weighted rate per time slot: R (1 - BER)^(P log2 M).
double normalized_throughput(double ber, double rate, int packet_symbols, int constellation);

/// log2(1 + SINR) split over the transmission phases of one symbol.
double mutual_information(double sinr, int phases);

/// Empirical output SINR: |E[b^* y]|^2 over the residual output power.
double empirical_sinr(const std::vector<cx>& outputs, const std::vector<cx>& symbols);

enum class Algorithm { NcisUp, NcisDown, CisUp, CisDown, JpaisGpc, JpaisIpc };

Algorithm algorithm_from_name(const std::string& name);
std::string algorithm_name(Algorithm a);

struct OpCounts {
    double adds = 0.0;
    double mults = 0.0;
    OpCounts& operator+=(const OpCounts& o) {
        adds += o.adds;
        mults += o.mults;
        return *this;
    }
};

/// Closed-form per-symbol operation counts of each recursion.
OpCounts filter_cost_joint(const SystemConfig& cfg);      // stacked filter bank
OpCounts alloc_cost_global(const SystemConfig& cfg);      // stacked allocation
OpCounts channel_cost_global(const SystemConfig& cfg);    // joint channel estimator
OpCounts filter_cost_user(const SystemConfig& cfg);       // one user's filter
OpCounts alloc_cost_user(const SystemConfig& cfg);        // one user's allocation
OpCounts channel_cost_user(const SystemConfig& cfg);      // one user's channel estimator

/// Per-symbol cost of a full algorithm, per the recursions it runs.
/// The non-cooperative schemes run the filter recursion with no relays;
/// the equal-power cooperative schemes skip allocation and channel
/// estimation.
OpCounts complexity_count(Algorithm a, const SystemConfig& cfg);

/// Aggregated results of one experiment grid point.
struct RunMetrics {
    std::string algorithm;
    std::string mode;   // "mmse" or "adaptive"
    int users = 0;
    int relays = 0;
    double snr_db = 0.0;
    double doppler = 0.0;
    double feedback_error = 0.0;
    int runs = 0;
    uint64_t seed = 0;
    double ber = 0.0;
    double ber_ci95 = 0.0;
    double mi = 0.0;           // per time slot
    double mi_unscaled = 0.0;  // per symbol, no phase split
    double nt = 0.0;
    double adds = 0.0;
    double mults = 0.0;
};

std::string csv_header();
std::string csv_row(const RunMetrics& m);

/// Mean and 95% confidence half-width over per-run values.
void mean_ci95(const std::vector<double>& values, double& mean, double& ci95);

}  // namespace jpais::metrics

#endif
