#ifndef DECO_STOCHASTIC_ORACLE_HPP
#define DECO_STOCHASTIC_ORACLE_HPP

#include <cstdint>
#include <string>

#include "deco/parallel.hpp"
#include "deco/scenario.hpp"

namespace deco::oracle {

/// Solves the exact memory-kernel equation
///   d(alpha)/dt = -int_0^t M(t, t') alpha(t') dt'
/// with full history (no Markov pull-out), trapezoid-in-history
/// predictor-corrector. Returns alpha-tilde at every grid node.
std::vector<VectorXcd> exact_decay_solve(const DecayScenario& s, Exec exec = Exec::parallel);

/// Jointly Gaussian stationary noise with cross-covariance Phi_{jj'}(|dt|),
/// by circulant embedding along time and a dense spectral factorization
/// across qubits. data[r](j, k) is realization r, qubit j, grid node k.
struct NoiseRealizations {
    TimeGrid grid;
    int qubits = 0;
    int count = 0;
    uint64_t seed = 0;
    std::string rng_algorithm;
    std::vector<MatrixXd> data;
};
NoiseRealizations sample_gaussian_process(const bath::BathModel& bath, int qubits, const TimeGrid& grid, int count,
                                          uint64_t seed, Exec exec = Exec::parallel);

/// Monte-Carlo proper-dephasing fidelity: every realization integrates each
/// qubit's two-level equation with an exact midpoint-exponential step plus
/// impulsive phase kicks, then the projector average gives the fidelity.
struct FidelitySeries {
    std::vector<double> t;
    std::vector<double> mean;
    std::vector<double> standard_error;
    int realizations = 0;
    uint64_t seed = 0;
};
FidelitySeries mc_dephasing_fidelity(const DephasingScenario& s, int count, uint64_t seed,
                                     Exec exec = Exec::parallel);

/// One engine-vs-oracle comparison row, serialized into the oracle report.
struct OracleReport {
    std::string quantity;
    double engine_value = 0.0;
    double oracle_value = 0.0;
    double tolerance = 0.0;  // absolute, or in standard errors when se > 0
    double standard_error_scale = 0.0;
    bool pass = false;
    int realizations = 0;
    double step = 0.0;
};

}  // namespace deco::oracle

#endif
