#ifndef DECO_DECAY_KERNEL_HPP
#define DECO_DECAY_KERNEL_HPP

#include "deco/scenario.hpp"

namespace deco::decay {

/// Precomputed per-scenario tables for the decay kernel
///   M_ab(T, t') = Phi_ab(T - t') K_ab(T, t') e^{i w_a T - i w_b t'}.
/// Shared by the windowed W builder and the full-memory exact solver.
/// The half-step lag table also serves the midpoint evaluations.
class KernelTables {
  public:
    explicit KernelTables(const DecayScenario& s);

    const DecayScenario& scenario() const { return *scenario_; }
    int channels() const { return nch_; }
    int steps() const { return nsteps_; }
    double dt() const { return h_; }
    int window_steps() const { return win_; }

    /// Phi_ab at lag m * dt/2.
    cplx phi_half(int m, int a, int b) const {
        return phi_half_[(static_cast<size_t>(m) * nch_ + static_cast<size_t>(a)) * nch_ + static_cast<size_t>(b)];
    }
    /// eps_b(t_k, side) e^{-i w_b t_k}
    cplx E(int b, int k, bool left) const {
        return (left ? El_ : Er_)[static_cast<size_t>(b)][static_cast<size_t>(k)];
    }
    /// e^{+i w_a t_k}
    cplx P(int a, int k) const { return P_[static_cast<size_t>(a)][static_cast<size_t>(k)]; }

    bool aligned(int b) const { return cell_pulse_[static_cast<size_t>(b)].empty(); }
    const std::vector<int>& pulse_nodes(int b) const { return pulse_nodes_[static_cast<size_t>(b)]; }
    /// For non-aligned channels: pulse instant inside grid cell j, or NaN.
    double cell_pulse(int b, int j) const { return cell_pulse_[static_cast<size_t>(b)][static_cast<size_t>(j)]; }

    /// integral over t' in [lo*dt, T] of Phi_ab(T - t') eps_b(t') e^{-i w_b t'}
    /// (times e^{+i w_a t'} under the rotating convention), where T = k*dt,
    /// or T = k*dt + dt/2 when mid is set. Sided trapezoid, pulse-split cells.
    cplx inner(int a, int b, int k, bool mid, int lo) const;

    /// Sided W matrix element row factor: conj(eps_a(T)) e^{i w_a T} (printed)
    /// or conj(eps_a(T)) (rotating), at grid node k.
    cplx outer(int a, int k, bool left) const;
    /// Same at T = k*dt + dt/2.
    cplx outer_mid(int a, int k) const;

    int window_lo(int k) const { return win_ >= nsteps_ ? 0 : std::max(0, k - win_); }

  private:
    const DecayScenario* scenario_;
    int nch_ = 0, nsteps_ = 0, win_ = 0;
    double h_ = 0.0;
    bool rotating_ = false;
    std::vector<cplx> phi_half_;
    std::vector<std::vector<cplx>> Er_, El_, P_;
    std::vector<std::vector<int>> pulse_nodes_;
    std::vector<std::vector<double>> cell_pulse_;

    cplx direct_term(int a, int b, double T, double tp, mod::Side side) const;
};

}  // namespace deco::decay

#endif
