#ifndef DECO_DECAY_ENGINE_HPP
#define DECO_DECAY_ENGINE_HPP

#include "deco/parallel.hpp"
#include "deco/scenario.hpp"

namespace deco::decay {

/// Sampled output of a decay run. W samples are right-continuous at pulse
/// instants; W_left carries the left-sided limits so that J, the cumulative
/// trapezoid of W, integrates the piecewise-continuous integrand exactly.
struct DecoherenceHistory {
    ChannelLayout layout;
    std::vector<double> omega;
    TimeGrid grid;
    int reference = 0;  // flat channel used for mixing/decay parameters

    std::vector<MatrixXcd> W;
    std::vector<MatrixXcd> W_left;
    std::vector<MatrixXcd> J;
    std::vector<VectorXcd> amplitudes;      // interaction picture alpha-tilde
    std::vector<VectorXcd> amplitudes_lab;  // alpha with free + Stark phases restored
    std::vector<VectorXcd> mixing;          // c per channel (unset when flagged invalid)
    std::vector<cplx> decay;                // A(t)
    std::vector<char> mixing_valid;
    std::vector<VectorXd> stark;  // accumulated Stark integrals per channel

    int index_of(double t) const { return grid.index_of(t); }
};

/// W and J series without amplitude evolution (enough for the J-based
/// residuals; roughly half the cost of a full run).
struct WJSeries {
    std::vector<MatrixXcd> W, W_left, J;
};

/// Straightforward direct evaluation of W(t) by composite trapezoid with
/// pulse-split cells; the serial reference the tabulated kernel is tested
/// against.
MatrixXcd compute_w_reference(const DecayScenario& s, double t, mod::Side outer_side = mod::Side::right);

WJSeries compute_w_j_series(const DecayScenario& s, Exec exec = Exec::parallel);

/// Cumulative trapezoid of a sided W series; J[0] = 0.
std::vector<MatrixXcd> compute_j(const std::vector<MatrixXcd>& W, const std::vector<MatrixXcd>& W_left, double dt);

/// Integrates d(alpha-tilde)/dt = -W(t) alpha-tilde by the explicit midpoint
/// rule (W evaluated at t and t + dt/2) and records the full history.
DecoherenceHistory evolve_amplitudes(const DecayScenario& s, Exec exec = Exec::parallel, int reference = 0);

struct MixingDecay {
    VectorXcd c;
    cplx A{0.0, 0.0};
    bool valid = false;  // false when |alpha_ref| <= 1e-12: c is undefined
};
MixingDecay mixing_decay_parameters(const VectorXcd& alpha, int reference);

struct PreservationResiduals {
    double offdiag_norm = 0.0;   // sum_{a != b} |J_ab|^2
    double rate_spread = 0.0;    // max_a Re J_aa - min_a Re J_aa
    double phase_spread = 0.0;   // circular spread of Im J_aa + int delta_a, mod 2pi
};
PreservationResiduals preservation_residuals(const DecoherenceHistory& h, double t);

/// Spec tolerance test: offdiag_norm < offdiag_tol * (sum_a |J_aa|)^2 and
/// rate_spread < rate_tol * mean Re J_aa.
bool preservation_satisfied(const DecoherenceHistory& h, double t, double offdiag_tol = 1e-4,
                            double rate_tol = 1e-2);

/// F = e^{-2 Re J_ref,ref(t)} with the (1,1) reference channel.
double preservation_fidelity(const DecoherenceHistory& h, double t);

/// sum_a |c_a(t) - c^d_a|^2; the history's reference channel must match the
/// desired state's largest amplitude.
double steering_residual(const DecoherenceHistory& h, double t, const VectorXcd& desired_c);

/// Fidelity of the singly-excited M-qubit entangled basis state D^M_l,
/// q_j = e^{2 pi i j (l-1)/M} / sqrt(M).
double entangled_basis_fidelity(const DecoherenceHistory& h, int l, double t);

/// Dicke-basis amplitudes: alpha_j(0) = q_j^{(l)}.
VectorXcd dicke_state(int qubits, int l);

}  // namespace deco::decay

#endif
