#ifndef DECO_BATH_HPP
#define DECO_BATH_HPP

#include <optional>
#include <variant>

#include "deco/types.hpp"

namespace deco::bath {

/// Gaussian reservoir response of a single multilevel system:
///   Phi_{nn'}(t) = c_{nn'} cos(eta_n) cos(eta_{n'}) exp(-t^2 / 4 t_c^2).
/// Channels map to the excited levels n.
struct GaussianDipoleBath {
    MatrixXd coupling;                  // c_{nn'}, symmetric, dimensionless
    std::vector<double> dipole_angles;  // eta_n, radians
    double correlation_time = 1.0;      // t_c
};

/// Cross-correlated decay bath for M two-level systems:
///   Phi_{jj'}(t) = gamma exp(-t^2/4t_j^2) exp(-t^2/4t_j'^2) / (r0 + |r_j - r_j'|).
struct CorrelatedGaussianDecayBath {
    double coupling_strength = 0.0;        // gamma
    std::vector<double> correlation_times; // t_j per system
    double reference_distance = 1.0;       // r0
    std::vector<Vector3d> positions;       // r_j per system
};

/// Proper-dephasing correlation for M qubits, even in t:
///   Phi_{jj'}(t) = gamma exp(-|t|/2t_j - |t|/2t_j' - r_{jj'}^2).
struct ExponentialDephasingBath {
    double coupling_strength = 0.0;
    std::vector<double> correlation_times;
    std::vector<Vector3d> positions;
};

/// User-supplied response sampled on a strictly increasing grid of lags,
/// linearly interpolated, zero outside the grid (hard memory cutoff).
struct TabulatedBath {
    std::vector<double> grid;
    std::vector<MatrixXcd> values;  // one (channels x channels) matrix per grid point
};

class BathModel {
  public:
    BathModel() : model_(GaussianDipoleBath{MatrixXd::Zero(1, 1), {0.0}, 1.0}) {}
    BathModel(GaussianDipoleBath m) : model_(std::move(m)) {}
    BathModel(CorrelatedGaussianDecayBath m) : model_(std::move(m)) {}
    BathModel(ExponentialDephasingBath m) : model_(std::move(m)) {}
    BathModel(TabulatedBath m) : model_(std::move(m)) {}

    /// Checks dimensions and model invariants against a channel layout.
    void validate(const ChannelLayout& layout) const;

    /// Phi_{ab}(t); defined for all t with Phi_{ab}(-t) = conj(Phi_{ba}(t)).
    cplx response(const ChannelLayout& layout, ChannelIndex a, ChannelIndex b, double t) const;
    cplx response_flat(int a, int b, double t) const;

    /// G_{ab}(omega) by numerical inversion of Phi(t) = integral G(w) e^{-iwt} dw,
    /// trapezoid over [-T, T] with the per-model window and step from quadrature_window().
    cplx spectral_density(const ChannelLayout& layout, ChannelIndex a, ChannelIndex b, double omega) const;
    cplx spectral_density_flat(int a, int b, double omega) const;

    /// Longest correlation time scale; memory windows are multiples of this.
    double memory_hint() const;
    /// Shortest correlation time scale; grid resolution checks use this.
    double min_time_scale() const;
    /// Half-width T and step h of the spectral quadrature window.
    std::pair<double, double> quadrature_window() const;

    const char* name() const;
    int channel_count() const;

    template <class T>
    const T* get_if() const {
        return std::get_if<T>(&model_);
    }

  private:
    std::variant<GaussianDipoleBath, CorrelatedGaussianDecayBath, ExponentialDephasingBath, TabulatedBath> model_;
};

}  // namespace deco::bath

#endif
