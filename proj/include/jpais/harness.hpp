#ifndef JPAIS_HARNESS_HPP
#define JPAIS_HARNESS_HPP

#include <map>
#include <string>
#include <vector>

#include "jpais/adaptive_gpc.hpp"
#include "jpais/adaptive_ipc.hpp"
#include "jpais/feedback.hpp"
#include "jpais/metrics.hpp"
#include "jpais/mmse.hpp"

namespace jpais::harness {

using metrics::Algorithm;
using metrics::RunMetrics;

enum class Mode { Mmse, Adaptive };

std::string mode_name(Mode m);

/// One experiment: a grid of scenarios crossed with an algorithm set.
/// Every (grid point, algorithm, run) triple draws from its own random
/// stream, so results are independent of execution order and thread count.
struct ExperimentSpec {
    SystemConfig base;
    std::vector<double> snr_db{12.0};
    std::vector<int> users{8};
    std::vector<int> relays{2};
    std::vector<double> doppler{0.0};
    std::vector<double> feedback_error{0.0};
    std::vector<Algorithm> algorithms{Algorithm::JpaisGpc, Algorithm::JpaisIpc, Algorithm::CisUp,
                                      Algorithm::NcisUp};
    Mode mode = Mode::Mmse;
    bool feedback_path = false;  // allocation passes quantize -> BSC -> dequantize
    int feedback_bits = 4;
    int alternate_iters = 2;
    int runs = 200;
    int threads = 1;
    uint64_t seed = 1;
    std::string out_csv;

    void validate() const;
};

/// Outcome of one packet for one algorithm (reference user).
struct PacketOutcome {
    double ber = 0.0;
    double sinr = 0.0;
};

PacketOutcome simulate_packet(const SystemConfig& cfg, Algorithm alg, Mode mode, double p_e,
                              int feedback_bits, bool feedback_path, int alternate_iters,
                              uint64_t seed, uint64_t point_id, uint64_t run_id);

std::vector<RunMetrics> run_experiment(const ExperimentSpec& spec);

/// Feedback-error sweep: run_experiment with the quantize/BSC/dequantize
/// path forced on.
std::vector<RunMetrics> run_feedback_experiment(ExperimentSpec spec);

void write_csv(const std::string& path, const std::vector<RunMetrics>& rows);
std::vector<RunMetrics> read_csv(const std::string& path);

/// Named experiment presets (desk-scale figure analogs).
ExperimentSpec preset(const std::string& name);
std::vector<std::string> preset_names();

/// key=value configuration file; '#' starts a comment.
std::map<std::string, std::string> parse_config_file(const std::string& path);
void apply_config(SystemConfig& cfg, const std::map<std::string, std::string>& kv);

}  // namespace jpais::harness

#endif
