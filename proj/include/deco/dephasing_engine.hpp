#ifndef DECO_DEPHASING_ENGINE_HPP
#define DECO_DEPHASING_ENGINE_HPP

#include <memory>

#include "deco/parallel.hpp"
#include "deco/scenario.hpp"

namespace deco::deph {

/// Hamming distance between binary basis labels l, l' in [1..2^M]
/// (bit 1 most significant; 0 = up, 1 = down).
int binary_distance(int l, int l2, int M);

struct FlipTarget {
    int qubit = 0;  // 1-based
    int sign = 0;   // formula convention s = b^l - b^{l'}; prose negates it
};
/// The flipped qubit and sign for a distance-1 pair; errors otherwise.
FlipTarget flip_target(int l, int l2, int M, SignConvention conv = SignConvention::formula);

/// The four ordered double integrals per qubit pair
///   I_{s s'}(t) = int_0^t dt' int_0^t' dt'' Phi_{jj'}(t'-t'')
///                 e^{i s phi_j(t')} e^{i s' phi_j'(t'')}
/// sampled on the grid. The basis kernel J^P_{jj'} is I_{-+}.
struct PairSeries {
    std::vector<cplx> pp, pm, mp, mm;
    const std::vector<cplx>& get(int s_outer, int s_inner) const {
        if (s_outer > 0) return s_inner > 0 ? pp : pm;
        return s_inner > 0 ? mp : mm;
    }
};

/// Proper-dephasing pipeline for one scenario: caches pair integrals and
/// exposes the fidelity and density-matrix operations on the shared
/// quadrature (both code paths consume the same PairSeries).
class DephasingEngine {
  public:
    explicit DephasingEngine(const DephasingScenario& s, Exec exec = Exec::parallel);
    ~DephasingEngine();
    DephasingEngine(DephasingEngine&&) noexcept;

    const DephasingScenario& scenario() const;
    const PairSeries& pair(int j, int j2) const;  // 0-based qubits

    /// J^P_{jj'}(t) with the basis kernel; 1-based qubits per the operation.
    cplx compute_jp(int j, int j2, double t) const;
    /// Bell-recipe kernels: signed cross terms for l in 1..4, plain for j == j2.
    cplx compute_jp_bell(int j, int j2, int l, double t) const;

    /// F(t) = 1 - (1/2) sum_j Re J^P_jj(t); identical for all basis states.
    /// `flagged` reports when the second-order validity band (1 - F > 0.2)
    /// is exceeded; the raw value is always returned.
    double basis_state_fidelity(double t, bool* flagged = nullptr) const;

    /// Second-order ensemble-averaged density matrix from rho(0).
    MatrixXcd second_order_density(const MatrixXcd& rho0, double t) const;

    /// Bell-state fidelity (two qubits), l in 1..4.
    double bell_fidelity(int l, double t) const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Unitary mapping the up/down 2-qubit product basis to the Bell basis
/// {B1..B4}; rows are the Bell states in the up/down basis (rotating frame).
Eigen::Matrix4cd bell_rotation();

// One-shot convenience wrappers.
cplx compute_jp(const DephasingScenario& s, int j, int j2, double t);
double basis_state_fidelity(const DephasingScenario& s, double t);
MatrixXcd second_order_density(const DephasingScenario& s, const MatrixXcd& rho0, double t);
double bell_fidelity(const DephasingScenario& s, int l, double t);

}  // namespace deco::deph

#endif
