#ifndef JPAIS_DIAGNOSTICS_HPP
#define JPAIS_DIAGNOSTICS_HPP

#include "jpais/mmse.hpp"

namespace jpais::diagnostics {

using linalg::CMatrix;
using linalg::CVector;
using linalg::cx;
using mmse::ConstraintMode;

/// One simulated scenario the probes run against.
struct Scenario {
    SystemConfig cfg;
    SignatureSet sigs;
    ChannelSet ch;
    UserPowers powers;
    RelayBank relays;
};

Scenario make_scenario(const SystemConfig& cfg, Rng& rng);

struct BoundEstimate {
    double bound = 0.0;            // conservative power floor
    double excluded_fraction = 0.0;  // probe directions with non-positive denominator
    int probes_used = 0;
};

/// Monte Carlo estimate of the constraint floor that makes the joint
/// filter/allocation problem behave convexly: the supremum over sampled
/// unit directions of the ratio between the two averaged quadratic forms
/// (numerator from the reference-minus-filtered-disturbance term, denominator
/// from the signal term), refined by a generalized-eigenvalue step when the
/// denominator form is positive definite.  Throws std::domain_error when
/// every sampled direction has a non-positive denominator.
BoundEstimate convexity_bound(const Scenario& sc, ConstraintMode mode, int n_probes, int n_mc,
                              Rng& rng);

struct InvarianceReport {
    double cost_spread = 0.0;        // max pairwise |final cost| difference
    double alloc_distance = 0.0;     // max pairwise distance up to a global phase
    std::vector<double> final_costs;
};

/// Runs the alternating optimization from random allocations on the
/// constraint sphere and reports the dispersion of the fixed points.
InvarianceReport init_invariance_test(const Scenario& sc, ConstraintMode mode, int n_inits,
                                      double power, int iters, Rng& rng);

}  // namespace jpais::diagnostics

#endif
