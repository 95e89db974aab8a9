#ifndef JPAIS_CONFIG_HPP
#define JPAIS_CONFIG_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace jpais {

/// Scenario parameters for one simulated network.  Powers are linear.
struct SystemConfig {
    int users = 8;             // K
    int gain = 16;             // N, chips per symbol
    int paths = 3;             // L, multipath taps per link (L < N)
    int relays = 2;            // n_r
    double total_power = 0.0;  // P_T; 0 means derive as sum of user budgets
    double user_power = 1.0;   // P_A (reference user budget)
    double noise_var = 0.1;    // sigma^2
    double forgetting = 0.998;       // alpha in (0, 1]
    double ridge = 0.025;            // lambda_T = lambda_k regularizer
    double doppler = 0.0;            // f_d T, cycles per symbol
    int packet_symbols = 1500;       // P
    int training_symbols = 200;      // N_tr
    uint64_t seed = 1;
    double interferer_std_db = 3.0;  // log-normal spread of interferer budgets

    int phases() const { return relays + 1; }            // n_p
    int window() const { return gain + paths - 1; }      // M = N + L - 1
    int stacked_len() const { return phases() * window(); }
    int streams() const { return users * phases(); }     // K (n_r + 1)

    double global_power() const { return total_power > 0.0 ? total_power : users * user_power; }

    void validate() const {
        if (users < 1) throw std::invalid_argument("config: users must be >= 1");
        if (gain < 2) throw std::invalid_argument("config: gain must be >= 2");
        if (paths < 1 || paths >= gain) throw std::invalid_argument("config: need 1 <= paths < gain");
        if (relays < 0) throw std::invalid_argument("config: relays must be >= 0");
        if (!(user_power > 0.0)) throw std::invalid_argument("config: user_power must be > 0");
        if (noise_var < 0.0) throw std::invalid_argument("config: noise_var must be >= 0");
        if (!(forgetting > 0.0 && forgetting <= 1.0))
            throw std::invalid_argument("config: forgetting must be in (0, 1]");
        if (ridge < 0.0) throw std::invalid_argument("config: ridge must be >= 0");
        if (doppler < 0.0) throw std::invalid_argument("config: doppler must be >= 0");
        if (packet_symbols < 1) throw std::invalid_argument("config: packet_symbols must be >= 1");
        if (training_symbols < 0 || training_symbols > packet_symbols)
            throw std::invalid_argument("config: training_symbols out of range");
    }
};

/// SNR convention: SNR = P_A / sigma^2 for the reference user.  200 dB and
/// above means an exactly noiseless run.
inline double snr_db_to_noise_var(double snr_db, double user_power) {
    if (snr_db >= 200.0) return 0.0;
    return user_power / std::pow(10.0, snr_db / 10.0);
}

}  // namespace jpais

#endif
