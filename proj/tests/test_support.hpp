#ifndef DECO_TEST_SUPPORT_HPP
#define DECO_TEST_SUPPORT_HPP

#include <cmath>
#include <functional>

#include "deco/decay_engine.hpp"
#include "deco/scenario.hpp"

namespace testsup {

using namespace deco;

// ---------------------------------------------------------------- oracles

/// Adaptive Simpson quadrature, independent of every engine code path.
inline cplx simpson_rec(const std::function<cplx(double)>& f, double a, double b, cplx fa, cplx fb, cplx fm,
                        double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    cplx flm = f(lm), frm = f(rm);
    cplx whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    cplx left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    cplx right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol) return left + right + (left + right - whole) / 15.0;
    return simpson_rec(f, a, m, fa, fm, flm, tol / 2, depth - 1) +
           simpson_rec(f, m, b, fm, fb, frm, tol / 2, depth - 1);
}

inline cplx simpson(const std::function<cplx(double)>& f, double a, double b, double tol = 1e-12) {
    if (a == b) return {0.0, 0.0};
    return simpson_rec(f, a, b, f(a), f(b), f(0.5 * (a + b)), tol, 48);
}

/// Composite 16-point Gauss-Legendre.
inline cplx gauss16(const std::function<cplx(double)>& f, double a, double b, int panels) {
    static const double xs[8] = {0.0950125098376374, 0.2816035507792589, 0.4580167776572274, 0.6178762444026438,
                                 0.7554044083550030, 0.8656312023878318, 0.9445750230732326, 0.9894009349916499};
    static const double ws[8] = {0.1894506104550685, 0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
                                 0.1246289712555339, 0.0951585116824928, 0.0622535239386479, 0.0271524594117541};
    cplx acc = 0.0;
    double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        double c = a + (p + 0.5) * h, r = 0.5 * h;
        for (int i = 0; i < 8; ++i) acc += ws[i] * r * (f(c + r * xs[i]) + f(c - r * xs[i]));
    }
    return acc;
}

/// Ordered double quadrature of f(t', t'') over 0 <= t'' <= t' <= T.
inline cplx triangle_quad(const std::function<cplx(double, double)>& f, double T, int outer_panels,
                          int inner_panels) {
    return gauss16(
        [&](double tp) {
            return gauss16([&](double tpp) { return f(tp, tpp); }, 0.0, tp, inner_panels);
        },
        0.0, T, outer_panels);
}

/// Deterministic pseudo-random stream for property tests.
struct Lcg {
    uint64_t s;
    explicit Lcg(uint64_t seed) : s(seed) {}
    double uniform(double lo, double hi) {
        s = s * 6364136223846793005ULL + 1442695040888963407ULL;
        return lo + (hi - lo) * static_cast<double>(s >> 11) * 0x1.0p-53;
    }
};

// ------------------------------------------------------------- scenarios

/// Single channel, Gaussian memory, no modulation: the analytically solvable
/// reference case (W = sqrt(pi) tc erf(t / 2 tc) at omega = 0).
inline DecayScenario scalar_gaussian(double gamma = 1.0, double tc = 1.0, double omega = 0.0, double t_end = 8.0,
                                     double dt = 0.01) {
    DecayScenario s;
    s.layout = ChannelLayout({1});
    s.omega = {omega};
    bath::GaussianDipoleBath g;
    g.correlation_time = tc;
    g.coupling = MatrixXd::Constant(1, 1, gamma);
    g.dipole_angles = {0.0};
    s.bath = g;
    s.modulation = mod::ModulationSchedule::uniform({}, 1);
    s.initial = VectorXcd::Constant(1, cplx(1.0, 0.0));
    s.grid = {t_end, dt};
    return s;
}

inline DecayScenario fig2_scenario(const std::vector<double>& theta_over_pi, double t_end = 50.0,
                                   double dt = 0.05) {
    DecayScenario s;
    s.layout = ChannelLayout({4});
    s.omega = {0.5, 0.6, 0.7, 0.8};
    bath::GaussianDipoleBath g;
    g.correlation_time = 1.0;
    g.coupling = MatrixXd::Constant(4, 4, 0.5);
    g.coupling.diagonal().setConstant(1.0);
    g.dipole_angles = {0.246 * pi, 0.0, 0.326 * pi, 0.370 * pi};
    s.bath = g;
    std::vector<mod::ChannelModulation> ch(4);
    for (int a = 0; a < 4; ++a) ch[static_cast<size_t>(a)].train = mod::PhasePulseTrain{1.0, theta_over_pi[static_cast<size_t>(a)] * pi};
    s.modulation = mod::ModulationSchedule::per_channel(ch);
    s.initial = VectorXcd::Constant(4, cplx(0.5, 0.0));
    s.grid = {t_end, dt};
    return s;
}

inline DecayScenario fig4_scenario(bool identical_coupling, bool global_mod, double t_end = 25.0) {
    DecayScenario s;
    s.layout = ChannelLayout({1, 1, 1});
    s.omega = {0.5, 0.5, 0.5};
    bath::CorrelatedGaussianDecayBath b;
    b.coupling_strength = 0.05;
    b.reference_distance = 1.0;
    b.correlation_times = identical_coupling ? std::vector<double>{1.0, 1.0, 1.0}
                                             : std::vector<double>{0.75, 0.81, 1.0};
    for (int j = 1; j <= 3; ++j)
        b.positions.emplace_back(std::cos(2.0 * pi * j / 3.0), std::sin(2.0 * pi * j / 3.0), 0.0);
    s.bath = b;
    if (global_mod) {
        mod::ChannelModulation m;
        m.train = mod::PhasePulseTrain{1.0, pi};
        s.modulation = mod::ModulationSchedule::uniform(m, 3);
    } else {
        std::vector<mod::ChannelModulation> ch(3);
        double th[] = {1.0, 0.70, 0.58};
        for (int a = 0; a < 3; ++a) ch[static_cast<size_t>(a)].train = mod::PhasePulseTrain{1.0, th[a] * pi};
        s.modulation = mod::ModulationSchedule::per_channel(ch);
    }
    s.initial = decay::dicke_state(3, 1);
    s.grid = {t_end, 0.025};
    return s;
}

inline DecayScenario fig5_scenario(bool global_mod, double t_end = 25.0) {
    DecayScenario s = fig4_scenario(false, true, t_end);
    if (!global_mod) {
        std::vector<mod::ChannelModulation> ch(3);
        double th[] = {0.80, 0.56, 0.47};
        for (int a = 0; a < 3; ++a) ch[static_cast<size_t>(a)].train = mod::PhasePulseTrain{1.0, th[a] * pi};
        s.modulation = mod::ModulationSchedule::per_channel(ch);
    }
    VectorXcd c(3);
    c << 1.0, 1.57, 1.64;
    s.initial = c / std::sqrt(c.squaredNorm());
    return s;
}

inline DephasingScenario fig6_scenario(double theta2_over_pi, double pair_distance = 1.0, double t_end = 25.0) {
    DephasingScenario s;
    s.qubits = 2;
    bath::ExponentialDephasingBath b;
    b.coupling_strength = 0.01;
    b.correlation_times = {1.0, 1.0};
    b.positions = {Vector3d(0, 0, 0), Vector3d(pair_distance, 0, 0)};
    s.bath = b;
    std::vector<mod::ChannelModulation> ch(2);
    ch[0].train = mod::PhasePulseTrain{1.0, 0.9 * pi};
    ch[1].train = mod::PhasePulseTrain{1.0, theta2_over_pi * pi};
    s.modulation = mod::ModulationSchedule::per_channel(ch);
    s.grid = {t_end, 0.025};
    return s;
}

/// Unmodulated M-qubit dephasing with a diagonal-only exponential bath.
inline DephasingScenario plain_dephasing(int qubits, double gamma = 0.01, double tc = 1.0, double t_end = 5.0,
                                         double dt = 0.01) {
    DephasingScenario s;
    s.qubits = qubits;
    bath::ExponentialDephasingBath b;
    b.coupling_strength = gamma;
    b.correlation_times.assign(static_cast<size_t>(qubits), tc);
    for (int j = 0; j < qubits; ++j) b.positions.emplace_back(1e6 * j, 0.0, 0.0);  // decorrelated
    s.bath = b;
    s.modulation = mod::ModulationSchedule::uniform({}, qubits);
    s.grid = {t_end, dt};
    return s;
}

}  // namespace testsup

#endif
