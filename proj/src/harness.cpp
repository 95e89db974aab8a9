#include "jpais/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace jpais::harness {

std::string mode_name(Mode m) { return m == Mode::Mmse ? "mmse" : "adaptive"; }

void ExperimentSpec::validate() const {
    base.validate();
    if (snr_db.empty() || users.empty() || relays.empty() || doppler.empty() ||
        feedback_error.empty())
        throw std::invalid_argument("experiment: empty grid dimension");
    if (algorithms.empty()) throw std::invalid_argument("experiment: no algorithms");
    if (runs < 1) throw std::invalid_argument("experiment: runs must be >= 1");
    if (threads < 1) throw std::invalid_argument("experiment: threads must be >= 1");
}

namespace {

using adaptive::AllocationRole;
using linalg::CMatrix;
using linalg::CVector;
using linalg::cx;

struct DetectionStats {
    int bit_errors = 0;
    int bits = 0;
    std::vector<cx> outputs;
    std::vector<cx> symbols;
};

// Fixed-filter detection of the reference user over the data portion.
void detect_with_filter(const SystemConfig& cfg, PacketSimulator& sim, const CVector& w0,
                        DetectionStats& st) {
    for (int i = 0; i < cfg.packet_symbols; ++i) {
        const ReceivedVector& rx = sim.reception(i);
        if (i < cfg.training_symbols) continue;
        const cx y = linalg::dot(w0, rx.r);
        int b0, b1, s0, s1;
        qpsk_slice(y, b0, b1);
        qpsk_slice(sim.desired_symbols(i)[0], s0, s1);
        st.bit_errors += (b0 != s0) + (b1 != s1);
        st.bits += 2;
        st.outputs.push_back(y);
        st.symbols.push_back(sim.desired_symbols(i)[0]);
    }
}

PowerAllocation design_allocation(const SystemConfig& cfg, Algorithm alg,
                                  const mmse::ModelMoments& moments, const UserPowers& powers,
                                  int iters) {
    const PowerAllocation equal = equal_power_allocation(cfg, powers);
    switch (alg) {
        case Algorithm::NcisUp:
        case Algorithm::NcisDown:
        case Algorithm::CisUp:
        case Algorithm::CisDown:
            return equal;
        case Algorithm::JpaisGpc:
            return mmse::alternate(moments, powers, mmse::ConstraintMode::Global, iters, equal)
                .alloc;
        case Algorithm::JpaisIpc:
            return mmse::alternate(moments, powers, mmse::ConstraintMode::Individual, iters, equal)
                .alloc;
    }
    throw std::invalid_argument("design_allocation: bad algorithm");
}

bool is_jpais(Algorithm a) { return a == Algorithm::JpaisGpc || a == Algorithm::JpaisIpc; }
bool is_ncis(Algorithm a) { return a == Algorithm::NcisUp || a == Algorithm::NcisDown; }

PacketOutcome mmse_static_packet(const SystemConfig& cfg, Algorithm alg, double p_e,
                                 int feedback_bits, bool feedback_path, int iters, Rng& scenario,
                                 Rng& packet) {
    const SignatureSet sigs = build_signatures(cfg, scenario);
    ChannelSet ch = draw_channels(cfg, scenario);
    const UserPowers powers = draw_user_powers(cfg, scenario);
    const PowerAllocation equal = equal_power_allocation(cfg, powers);
    const RelayBank bank(cfg, sigs, ch.gains, equal);
    const mmse::ModelMoments moments(cfg, sigs, ch.gains, bank);

    PowerAllocation designed = design_allocation(cfg, alg, moments, powers, iters);
    PowerAllocation transmit = designed;
    if (feedback_path && is_jpais(alg)) {
        const auto pmode = alg == Algorithm::JpaisGpc ? feedback::PacketMode::Global
                                                      : feedback::PacketMode::Individual;
        auto pkt = feedback::quantize(designed, powers, feedback_bits, pmode);
        pkt = feedback::bsc_transmit(pkt, p_e, packet);
        transmit = feedback::dequantize(pkt, powers);
    }

    // Receiver designed for the intended allocation; the transmitter applies
    // what survived the feedback link.
    const CVector w0 =
        mmse::mmse_filter_ipc(moments.covariance(designed), moments.cross_correlation(designed).col(0));

    PacketSimulator sim(cfg, sigs, ch, &bank, transmit, packet);
    DetectionStats st;
    detect_with_filter(cfg, sim, w0, st);
    PacketOutcome out;
    out.ber = st.bits > 0 ? double(st.bit_errors) / st.bits : 0.0;
    out.sinr = st.outputs.empty() ? 0.0 : metrics::empirical_sinr(st.outputs, st.symbols);
    return out;
}

PacketOutcome mmse_fading_packet(const SystemConfig& cfg, Algorithm alg, int iters, Rng& scenario,
                                 Rng& packet) {
    const SignatureSet sigs = build_signatures(cfg, scenario);
    ChannelSet ch = draw_channels(cfg, scenario);
    const UserPowers powers = draw_user_powers(cfg, scenario);
    const PowerAllocation equal = equal_power_allocation(cfg, powers);

    // One-shot feedback: the allocation is designed on the initial channel
    // state and held for the whole packet while the channels drift.
    PowerAllocation transmit = equal;
    {
        const RelayBank bank0(cfg, sigs, ch.gains, equal);
        const mmse::ModelMoments moments0(cfg, sigs, ch.gains, bank0);
        transmit = design_allocation(cfg, alg, moments0, powers, iters);
    }

    PacketSimulator sim(cfg, sigs, ch, nullptr, transmit, packet);
    DetectionStats st;
    for (int i = 0; i < cfg.packet_symbols; ++i) {
        const ReceivedVector& rx = sim.reception(i);
        if (i < cfg.training_symbols) continue;
        // Clairvoyant tracking receiver for the actually-applied allocation.
        const mmse::ModelMoments mom(cfg, sigs, sim.gains_at(i), sim.relay_bank_at(i));
        const CVector w0 =
            mmse::mmse_filter_ipc(mom.covariance(transmit), mom.cross_correlation(transmit).col(0));
        const cx y = linalg::dot(w0, rx.r);
        int b0, b1, s0, s1;
        qpsk_slice(y, b0, b1);
        qpsk_slice(sim.desired_symbols(i)[0], s0, s1);
        st.bit_errors += (b0 != s0) + (b1 != s1);
        st.bits += 2;
        st.outputs.push_back(y);
        st.symbols.push_back(sim.desired_symbols(i)[0]);
    }
    PacketOutcome out;
    out.ber = st.bits > 0 ? double(st.bit_errors) / st.bits : 0.0;
    out.sinr = st.outputs.empty() ? 0.0 : metrics::empirical_sinr(st.outputs, st.symbols);
    return out;
}

PacketOutcome adaptive_packet(const SystemConfig& cfg, Algorithm alg, Rng& scenario, Rng& packet) {
    const SignatureSet sigs = build_signatures(cfg, scenario);
    ChannelSet ch = draw_channels(cfg, scenario);
    const UserPowers powers = draw_user_powers(cfg, scenario);

    adaptive::PacketResult res;
    if (alg == Algorithm::JpaisIpc) {
        res = adaptive::ipc_run_packet(cfg, sigs, ch, powers, packet, AllocationRole::Adaptive);
    } else {
        const auto role = is_jpais(alg) ? AllocationRole::Adaptive : AllocationRole::Frozen;
        res = adaptive::gpc_run_packet(cfg, sigs, ch, powers, packet, role);
    }
    PacketOutcome out;
    if (!res.bits[0].empty()) out.ber = metrics::count_ber(res.sent_bits[0], res.bits[0]);
    if (!res.outputs_user0.empty())
        out.sinr = metrics::empirical_sinr(res.outputs_user0, res.symbols_user0);
    return out;
}

}  // namespace

PacketOutcome simulate_packet(const SystemConfig& cfg, Algorithm alg, Mode mode, double p_e,
                              int feedback_bits, bool feedback_path, int alternate_iters,
                              uint64_t seed, uint64_t point_id, uint64_t run_id) {
    SystemConfig run_cfg = cfg;
    if (is_ncis(alg)) run_cfg.relays = 0;  // non-cooperative baseline
    run_cfg.validate();
    // The scenario stream is shared across algorithms (common random draws);
    // the packet stream differs per algorithm only through its length usage.
    Rng scenario = make_stream(seed, {point_id, run_id, 0xa11});
    Rng packet = make_stream(seed, {point_id, run_id, 0xbee});
    if (mode == Mode::Adaptive) return adaptive_packet(run_cfg, alg, scenario, packet);
    if (run_cfg.doppler > 0.0)
        return mmse_fading_packet(run_cfg, alg, alternate_iters, scenario, packet);
    return mmse_static_packet(run_cfg, alg, p_e, feedback_bits, feedback_path, alternate_iters,
                              scenario, packet);
}

std::vector<RunMetrics> run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    struct Point {
        double snr;
        int users;
        int relays;
        double fdt;
        double p_e;
        Algorithm alg;
        uint64_t point_id;
    };
    std::vector<Point> points;
    uint64_t pid = 0;
    for (double snr : spec.snr_db)
        for (int k : spec.users)
            for (int nr : spec.relays)
                for (double fdt : spec.doppler)
                    for (double pe : spec.feedback_error) {
                        // One scenario id per grid cell: algorithms share draws.
                        ++pid;
                        for (Algorithm alg : spec.algorithms)
                            points.push_back({snr, k, nr, fdt, pe, alg, pid});
                    }

    std::vector<std::vector<double>> bers(points.size(), std::vector<double>(spec.runs));
    std::vector<std::vector<double>> sinrs(points.size(), std::vector<double>(spec.runs));

    const size_t total = points.size() * size_t(spec.runs);
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(std::max(1, spec.threads));
    const int nthreads = std::max(1, spec.threads);
    for (int t = 0; t < nthreads; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (size_t job = t; job < total; job += nthreads) {
                    const size_t p = job / spec.runs;
                    const int run = int(job % spec.runs);
                    const Point& pt = points[p];
                    SystemConfig cfg = spec.base;
                    cfg.users = pt.users;
                    cfg.relays = pt.relays;
                    cfg.doppler = pt.fdt;
                    cfg.noise_var = snr_db_to_noise_var(pt.snr, cfg.user_power);
                    const PacketOutcome out =
                        simulate_packet(cfg, pt.alg, spec.mode, pt.p_e, spec.feedback_bits,
                                        spec.feedback_path, spec.alternate_iters, spec.seed,
                                        pt.point_id, uint64_t(run));
                    bers[p][run] = out.ber;
                    sinrs[p][run] = out.sinr;
                }
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    std::vector<RunMetrics> rows;
    rows.reserve(points.size());
    for (size_t p = 0; p < points.size(); ++p) {
        const Point& pt = points[p];
        RunMetrics m;
        m.algorithm = metrics::algorithm_name(pt.alg);
        m.mode = mode_name(spec.mode);
        m.users = pt.users;
        m.relays = is_ncis(pt.alg) ? 0 : pt.relays;
        m.snr_db = pt.snr;
        m.doppler = pt.fdt;
        m.feedback_error = pt.p_e;
        m.runs = spec.runs;
        m.seed = spec.seed;
        metrics::mean_ci95(bers[p], m.ber, m.ber_ci95);
        double mean_sinr, unused;
        metrics::mean_ci95(sinrs[p], mean_sinr, unused);
        const int phases = is_ncis(pt.alg) ? 1 : pt.relays + 1;
        m.mi = metrics::mutual_information(mean_sinr, phases);
        m.mi_unscaled = metrics::mutual_information(mean_sinr, 1);
        const double rate = 1.0 / double(phases);
        m.nt = metrics::normalized_throughput(m.ber, rate, spec.base.packet_symbols, 4);
        SystemConfig ccfg = spec.base;
        ccfg.users = pt.users;
        ccfg.relays = is_ncis(pt.alg) ? 0 : pt.relays;
        const auto ops = metrics::complexity_count(pt.alg, ccfg);
        m.adds = ops.adds;
        m.mults = ops.mults;
        rows.push_back(std::move(m));
    }
    if (!spec.out_csv.empty()) write_csv(spec.out_csv, rows);
    return rows;
}

std::vector<RunMetrics> run_feedback_experiment(ExperimentSpec spec) {
    spec.feedback_path = true;
    return run_experiment(spec);
}

void write_csv(const std::string& path, const std::vector<RunMetrics>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << metrics::csv_header() << "\n";
    for (const auto& r : rows) out << metrics::csv_row(r) << "\n";
}

std::vector<RunMetrics> read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::string header;
    if (!std::getline(in, header)) throw std::runtime_error("empty csv: " + path);
    std::vector<std::string> cols;
    {
        std::stringstream ss(header);
        std::string c;
        while (std::getline(ss, c, ',')) cols.push_back(c);
    }
    auto col = [&](const std::string& name) {
        for (size_t i = 0; i < cols.size(); ++i)
            if (cols[i] == name) return int(i);
        throw std::runtime_error("csv missing column: " + name);
    };
    const int c_alg = col("algorithm"), c_mode = col("mode"), c_users = col("users"),
              c_relays = col("relays"), c_snr = col("snr_db"), c_fdt = col("fdt"),
              c_pe = col("p_e"), c_runs = col("runs"), c_seed = col("seed"), c_ber = col("ber"),
              c_ci = col("ber_ci95"), c_mi = col("mi"), c_miu = col("mi_unscaled"),
              c_nt = col("nt"), c_adds = col("adds"), c_mults = col("mults");
    std::vector<RunMetrics> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string c;
        while (std::getline(ss, c, ',')) f.push_back(c);
        if (f.size() < cols.size()) throw std::runtime_error("csv row too short");
        RunMetrics m;
        m.algorithm = f[c_alg];
        m.mode = f[c_mode];
        m.users = std::stoi(f[c_users]);
        m.relays = std::stoi(f[c_relays]);
        m.snr_db = std::stod(f[c_snr]);
        m.doppler = std::stod(f[c_fdt]);
        m.feedback_error = std::stod(f[c_pe]);
        m.runs = std::stoi(f[c_runs]);
        m.seed = std::stoull(f[c_seed]);
        m.ber = std::stod(f[c_ber]);
        m.ber_ci95 = std::stod(f[c_ci]);
        m.mi = std::stod(f[c_mi]);
        m.mi_unscaled = std::stod(f[c_miu]);
        m.nt = std::stod(f[c_nt]);
        m.adds = std::stod(f[c_adds]);
        m.mults = std::stod(f[c_mults]);
        rows.push_back(std::move(m));
    }
    return rows;
}

ExperimentSpec preset(const std::string& name) {
    ExperimentSpec s;
    s.base = SystemConfig{};
    if (name == "fig5") {
        s.mode = Mode::Mmse;
        s.snr_db = {0, 3, 6, 9, 12, 15};
        s.users = {8};
        s.relays = {1, 2};
        s.runs = 200;
        return s;
    }
    if (name == "fig5-users") {
        s.mode = Mode::Mmse;
        s.snr_db = {15};
        s.users = {4, 6, 8, 10, 12, 14, 16};
        s.relays = {2};
        s.runs = 200;
        return s;
    }
    if (name == "fig3") {
        s.mode = Mode::Adaptive;
        s.snr_db = {12};
        s.users = {8};
        s.relays = {2};
        s.runs = 200;
        return s;
    }
    if (name == "fig6-fdt") {
        s.mode = Mode::Mmse;
        s.snr_db = {12};
        s.users = {8};
        s.relays = {2, 4};
        s.doppler = {1e-5, 1e-4, 1e-3, 1e-2};
        s.algorithms = {Algorithm::JpaisGpc, Algorithm::CisUp};
        s.base.packet_symbols = 500;
        s.base.training_symbols = 0;
        s.runs = 60;
        return s;
    }
    if (name == "fig-newfig") {
        s.mode = Mode::Mmse;
        s.snr_db = {0, 4, 8, 12, 16};
        s.users = {8};
        s.relays = {1, 2};
        s.runs = 150;
        return s;
    }
    if (name == "fig7") {
        s.mode = Mode::Mmse;
        s.snr_db = {12};
        s.users = {8};
        s.relays = {2};
        s.feedback_error = {0.0, 1e-4, 1e-3, 1e-2, 1e-1};
        s.feedback_path = true;
        s.algorithms = {Algorithm::JpaisGpc, Algorithm::JpaisIpc, Algorithm::CisUp};
        s.runs = 150;
        return s;
    }
    throw std::invalid_argument("unknown preset: " + name +
                                " (known: fig5 fig5-users fig3 fig6-fdt fig-newfig fig7)");
}

std::vector<std::string> preset_names() {
    return {"fig5", "fig5-users", "fig3", "fig6-fdt", "fig-newfig", "fig7"};
}

std::map<std::string, std::string> parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (!key.empty()) kv[key] = val;
    }
    return kv;
}

void apply_config(SystemConfig& cfg, const std::map<std::string, std::string>& kv) {
    auto geti = [&](const char* k, int& v) {
        auto it = kv.find(k);
        if (it != kv.end()) v = std::stoi(it->second);
    };
    auto getd = [&](const char* k, double& v) {
        auto it = kv.find(k);
        if (it != kv.end()) v = std::stod(it->second);
    };
    geti("users", cfg.users);
    geti("gain", cfg.gain);
    geti("paths", cfg.paths);
    geti("relays", cfg.relays);
    getd("user_power", cfg.user_power);
    getd("total_power", cfg.total_power);
    getd("noise_var", cfg.noise_var);
    getd("forgetting", cfg.forgetting);
    getd("ridge", cfg.ridge);
    getd("doppler", cfg.doppler);
    geti("packet_symbols", cfg.packet_symbols);
    geti("training_symbols", cfg.training_symbols);
    getd("interferer_std_db", cfg.interferer_std_db);
    auto it = kv.find("seed");
    if (it != kv.end()) cfg.seed = std::stoull(it->second);
}

}  // namespace jpais::harness
