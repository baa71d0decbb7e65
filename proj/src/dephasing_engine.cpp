#include "deco/dephasing_engine.hpp"

#include <cmath>
#include <limits>

namespace deco::deph {

using mod::Side;

int binary_distance(int l, int l2, int M) {
    if (l < 1 || l > (1 << M) || l2 < 1 || l2 > (1 << M)) throw ConfigError("binary_distance: index out of range");
    return std::popcount(static_cast<unsigned>((l - 1) ^ (l2 - 1)));
}

FlipTarget flip_target(int l, int l2, int M, SignConvention conv) {
    if (binary_distance(l, l2, M) != 1)
        throw ConfigError("flip_target: labels are not a single qubit flip apart");
    unsigned diff = static_cast<unsigned>((l - 1) ^ (l2 - 1));
    int bit = std::countr_zero(diff);  // bit position from the least significant end
    int qubit = M - bit;               // b_1 is the most significant bit
    int bl = ((l - 1) >> bit) & 1;
    int bl2 = ((l2 - 1) >> bit) & 1;
    int s = bl - bl2;  // formula: s = b^l - b^{l'}
    if (conv == SignConvention::prose) s = -s;
    return {qubit, s};
}

namespace {

/// Sided tables of e^{i phi_j(t_k)} for one qubit, plus off-grid pulse cells.
struct PhaseTable {
    std::vector<cplx> right, left;
    std::vector<int> pulse_nodes;
    std::vector<double> cell_pulse;  // empty when grid aligned
    bool aligned() const { return cell_pulse.empty(); }
};

PhaseTable build_phase_table(const DephasingScenario& s, int j) {
    PhaseTable pt;
    const int n = s.grid.steps();
    const double h = s.grid.dt;
    pt.right.resize(static_cast<size_t>(n) + 1);
    pt.left.resize(static_cast<size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) {
        double t = k * h;
        pt.right[static_cast<size_t>(k)] = s.modulation.epsilon_phase(j, t, Side::right);
        pt.left[static_cast<size_t>(k)] = s.modulation.epsilon_phase(j, t, Side::left);
        if (pt.right[static_cast<size_t>(k)] != pt.left[static_cast<size_t>(k)]) pt.pulse_nodes.push_back(k);
    }
    if (!s.modulation.grid_aligned(j, h)) {
        pt.cell_pulse.assign(static_cast<size_t>(n) + 1, std::numeric_limits<double>::quiet_NaN());
        std::vector<double> pulses;
        s.modulation.pulse_times_between(j, 0.0, s.grid.t_end + 0.5 * h, pulses);
        for (double p : pulses) {
            int kn = static_cast<int>(std::llround(p / h));
            bool covered = kn >= 0 && kn <= n && std::abs(p - kn * h) < 0.25 * h &&
                           pt.right[static_cast<size_t>(kn)] != pt.left[static_cast<size_t>(kn)];
            if (covered) continue;
            int cell = static_cast<int>(std::floor(p / h));
            if (cell >= 0 && cell <= n) pt.cell_pulse[static_cast<size_t>(cell)] = p;
        }
    }
    return pt;
}

}  // namespace

struct DephasingEngine::Impl {
    DephasingScenario s;
    std::vector<PhaseTable> phases;      // per qubit
    std::vector<std::vector<cplx>> phi;  // per pair (j*M + j2): Phi at integer lags
    mutable std::vector<PairSeries> pairs;
    mutable std::vector<char> have;
    Exec exec;

    Impl(const DephasingScenario& sc, Exec ex) : s(sc), exec(ex) {
        s.validate();
        const int M = s.qubits, n = s.grid.steps();
        phases.reserve(static_cast<size_t>(M));
        for (int j = 0; j < M; ++j) phases.push_back(build_phase_table(s, j));
        phi.assign(static_cast<size_t>(M) * M, {});
        for (int j = 0; j < M; ++j)
            for (int j2 = 0; j2 < M; ++j2) {
                auto& row = phi[static_cast<size_t>(j) * M + j2];
                row.resize(static_cast<size_t>(n) + 1);
                for (int m = 0; m <= n; ++m) row[static_cast<size_t>(m)] = s.bath.response_flat(j, j2, m * s.grid.dt);
            }
        pairs.assign(static_cast<size_t>(M) * M, {});
        have.assign(static_cast<size_t>(M) * M, 0);
    }

    cplx eps_sided(int j, double t, int sign, Side side) const {
        cplx e = s.modulation.epsilon_phase(j, t, side);
        return sign > 0 ? e : std::conj(e);
    }

    /// inner integral over t'' in [0, T] of Phi_{jj2}(T - t'') e^{i s' phi_j2};
    /// T = k*dt (node), sided trapezoid with pulse-split cells.
    cplx inner_at_node(int j, int j2, int sign_in, int k) const {
        if (k == 0) return {0.0, 0.0};
        const auto& tab = phases[static_cast<size_t>(j2)];
        const auto& row = phi[static_cast<size_t>(j) * s.qubits + j2];
        const double h = s.grid.dt;
        auto val = [&](int node) {
            cplx e = tab.right[static_cast<size_t>(node)];
            return sign_in > 0 ? e : std::conj(e);
        };
        cplx acc = 0.5 * (row[static_cast<size_t>(k)] * val(0) + row[0] * val(k));
        for (int m = 1; m < k; ++m) acc += row[static_cast<size_t>(k - m)] * val(m);
        for (int p : tab.pulse_nodes) {
            if (p < 1 || p > k) continue;
            cplx dl = tab.left[static_cast<size_t>(p)] - tab.right[static_cast<size_t>(p)];
            if (sign_in < 0) dl = std::conj(tab.left[static_cast<size_t>(p)]) - std::conj(tab.right[static_cast<size_t>(p)]);
            acc += 0.5 * row[static_cast<size_t>(k - p)] * dl;
        }
        acc *= h;
        if (!tab.aligned()) {
            double T = k * h;
            for (int m = 0; m < k; ++m) {
                double p = tab.cell_pulse[static_cast<size_t>(m)];
                if (std::isnan(p) || p >= T) continue;
                cplx fl = row[static_cast<size_t>(k - m)] * val(m);
                cplx fr = row[static_cast<size_t>(k - m - 1)] *
                          (sign_in > 0 ? tab.left[static_cast<size_t>(m) + 1]
                                       : std::conj(tab.left[static_cast<size_t>(m) + 1]));
                acc -= 0.5 * h * (fl + fr);
                double ta = m * h, tb = (m + 1) * h;
                cplx fpl = s.bath.response_flat(j, j2, T - p) * eps_sided(j2, p, sign_in, Side::left);
                cplx fpr = s.bath.response_flat(j, j2, T - p) * eps_sided(j2, p, sign_in, Side::right);
                acc += 0.5 * (p - ta) * (fl + fpl) + 0.5 * (tb - p) * (fpr + fr);
            }
        }
        return acc;
    }

    /// same inner integral at an arbitrary off-grid upper limit T
    cplx inner_at_time(int j, int j2, int sign_in, double T) const {
        const double h = s.grid.dt;
        int k = static_cast<int>(std::floor(T / h + 1e-12));
        cplx acc = inner_at_node_shifted(j, j2, sign_in, k, T);
        return acc;
    }

    /// trapezoid over [0, T] where T lies in cell [k, k+1): nodes 0..k then partial cell
    cplx inner_at_node_shifted(int j, int j2, int sign_in, int k, double T) const {
        const auto& tab = phases[static_cast<size_t>(j2)];
        const double h = s.grid.dt;
        auto f = [&](double tpp, Side side) {
            return s.bath.response_flat(j, j2, T - tpp) * eps_sided(j2, tpp, sign_in, side);
        };
        cplx acc{0.0, 0.0};
        for (int m = 0; m < k; ++m) {
            double ta = m * h, tb = (m + 1) * h;
            double p = tab.aligned() ? std::numeric_limits<double>::quiet_NaN()
                                     : tab.cell_pulse[static_cast<size_t>(m)];
            if (!std::isnan(p) && p > ta && p < tb)
                acc += 0.5 * (p - ta) * (f(ta, Side::right) + f(p, Side::left)) +
                       0.5 * (tb - p) * (f(p, Side::right) + f(tb, Side::left));
            else
                acc += 0.5 * h * (f(ta, Side::right) + f(tb, Side::left));
        }
        if (T > k * h + 1e-12) {
            double ta = k * h;
            double p = tab.aligned() ? std::numeric_limits<double>::quiet_NaN()
                                     : tab.cell_pulse[static_cast<size_t>(k)];
            if (!std::isnan(p) && p > ta && p < T)
                acc += 0.5 * (p - ta) * (f(ta, Side::right) + f(p, Side::left)) +
                       0.5 * (T - p) * (f(p, Side::right) + f(T, Side::left));
            else
                acc += 0.5 * (T - ta) * (f(ta, Side::right) + f(T, Side::left));
        }
        return acc;
    }

    std::vector<cplx> series(int j, int j2, int sign_out, int sign_in) const {
        const int n = s.grid.steps();
        const double h = s.grid.dt;
        const auto& tab = phases[static_cast<size_t>(j)];
        std::vector<cplx> inner(static_cast<size_t>(n) + 1);
#pragma omp parallel for schedule(dynamic, 16) if (exec == Exec::parallel)
        for (int k = 0; k <= n; ++k) inner[static_cast<size_t>(k)] = inner_at_node(j, j2, sign_in, k);

        auto g = [&](int node, Side side) {
            cplx e = (side == Side::right ? tab.right : tab.left)[static_cast<size_t>(node)];
            return sign_out > 0 ? e : std::conj(e);
        };
        std::vector<cplx> J(static_cast<size_t>(n) + 1);
        J[0] = {0.0, 0.0};
        for (int k = 0; k < n; ++k) {
            double p = tab.aligned() ? std::numeric_limits<double>::quiet_NaN()
                                     : tab.cell_pulse[static_cast<size_t>(k)];
            cplx cell;
            if (!std::isnan(p) && p > k * h && p < (k + 1) * h) {
                cplx ip = inner_at_time(j, j2, sign_in, p);
                cplx gpl = eps_sided(j, p, sign_out, Side::left), gpr = eps_sided(j, p, sign_out, Side::right);
                cell = 0.5 * (p - k * h) * (g(k, Side::right) * inner[static_cast<size_t>(k)] + gpl * ip) +
                       0.5 * ((k + 1) * h - p) * (gpr * ip + g(k + 1, Side::left) * inner[static_cast<size_t>(k) + 1]);
            } else {
                cell = 0.5 * h * (g(k, Side::right) * inner[static_cast<size_t>(k)] +
                                  g(k + 1, Side::left) * inner[static_cast<size_t>(k) + 1]);
            }
            J[static_cast<size_t>(k) + 1] = J[static_cast<size_t>(k)] + cell;
        }
        return J;
    }

    const PairSeries& pair(int j, int j2) const {
        auto idx = static_cast<size_t>(j) * s.qubits + j2;
        if (!have[idx]) {
            PairSeries ps;
            ps.pp = series(j, j2, +1, +1);
            ps.pm = series(j, j2, +1, -1);
            ps.mp = series(j, j2, -1, +1);
            ps.mm = series(j, j2, -1, -1);
            pairs[idx] = std::move(ps);
            have[idx] = 1;
        }
        return pairs[idx];
    }
};

DephasingEngine::DephasingEngine(const DephasingScenario& s, Exec exec) : impl_(new Impl(s, exec)) {}
DephasingEngine::~DephasingEngine() = default;
DephasingEngine::DephasingEngine(DephasingEngine&&) noexcept = default;

const DephasingScenario& DephasingEngine::scenario() const { return impl_->s; }
const PairSeries& DephasingEngine::pair(int j, int j2) const { return impl_->pair(j, j2); }

cplx DephasingEngine::compute_jp(int j, int j2, double t) const {
    int k = impl_->s.grid.index_of(t);
    return pair(j - 1, j2 - 1).mp[static_cast<size_t>(k)];
}

cplx DephasingEngine::compute_jp_bell(int j, int j2, int l, double t) const {
    if (l < 1 || l > 4) throw ConfigError("compute_jp_bell: l out of range");
    int k = impl_->s.grid.index_of(t);
    if (j == j2) return pair(j - 1, j2 - 1).mp[static_cast<size_t>(k)];
    const PairSeries& ps = pair(j - 1, j2 - 1);
    switch (l) {
        case 1: return -ps.mm[static_cast<size_t>(k)];
        case 2: return -ps.pm[static_cast<size_t>(k)];
        case 3: return ps.mm[static_cast<size_t>(k)];
        default: return ps.pm[static_cast<size_t>(k)];
    }
}

double DephasingEngine::basis_state_fidelity(double t, bool* flagged) const {
    double sum = 0.0;
    for (int j = 1; j <= impl_->s.qubits; ++j) sum += compute_jp(j, j, t).real();
    double f = 1.0 - 0.5 * sum;
    if (flagged) *flagged = (1.0 - f) > 0.2;
    return f;
}

namespace {

MatrixXcd sigma_pm_at(int j, int M, bool plus) {
    // up = 0, down = 1; sigma_plus = |up><down|
    const int dim = 1 << M;
    MatrixXcd op = MatrixXcd::Zero(dim, dim);
    int bit = M - 1 - j;  // qubit j (0-based) owns this bit, b_1 most significant
    for (int x = 0; x < dim; ++x) {
        if (((x >> bit) & 1) == (plus ? 1 : 0)) {
            int y = x ^ (1 << bit);
            op(y, x) = 1.0;
        }
    }
    return op;
}

}  // namespace

MatrixXcd DephasingEngine::second_order_density(const MatrixXcd& rho0, double t) const {
    const auto& s = impl_->s;
    const int M = s.qubits, dim = 1 << M;
    if (rho0.rows() != dim || rho0.cols() != dim)
        throw ConfigError("second_order_density: rho(0) dimension mismatch");
    int k = s.grid.index_of(t);
    const double kappa = s.sign_convention == SignConvention::prose ? 1.0 : -1.0;

    MatrixXcd rho = rho0;
    for (int j = 0; j < M; ++j) {
        for (int j2 = 0; j2 < M; ++j2) {
            const PairSeries& ps = pair(j, j2);
            for (int so = -1; so <= 1; so += 2) {
                for (int si = -1; si <= 1; si += 2) {
                    // X_j(t) = sum_s e^{i kappa s phi_j(t)} P_j^s: the integral with
                    // outer sign sigma = kappa*s pairs with operator index s.
                    int s_op_out = so, s_op_in = si;
                    int sig_out = static_cast<int>(kappa) * so, sig_in = static_cast<int>(kappa) * si;
                    cplx I = ps.get(sig_out, sig_in)[static_cast<size_t>(k)];
                    MatrixXcd Pout = sigma_pm_at(j, M, s_op_out > 0);
                    MatrixXcd Pin = sigma_pm_at(j2, M, s_op_in > 0);
                    MatrixXcd comm_in = Pin * rho0 - rho0 * Pin;
                    MatrixXcd comm = Pout * comm_in - comm_in * Pout;
                    rho -= 0.25 * I * comm;
                }
            }
        }
    }
    return rho;
}

double DephasingEngine::bell_fidelity(int l, double t) const {
    const auto& s = impl_->s;
    if (s.qubits != 2) throw ConfigError("bell_fidelity: needs exactly two qubits");
    if (l < 1 || l > 4) throw ConfigError("bell_fidelity: l out of range");
    double ph1 = s.modulation.phase(0, t, Side::right);
    double ph2 = s.modulation.phase(1, t, Side::right);
    double phi = (l == 1 || l == 3) ? 0.5 * (ph1 + ph2) : 0.5 * (ph1 - ph2);
    cplx sum = compute_jp_bell(1, 1, l, t) + compute_jp_bell(2, 2, l, t) + compute_jp_bell(1, 2, l, t) +
               compute_jp_bell(2, 1, l, t);
    return std::cos(phi) * (std::exp(iu * phi) * (1.0 - 0.5 * sum)).real();
}

Eigen::Matrix4cd bell_rotation() {
    Eigen::Matrix2d Q;
    Q << 1.0, 1.0, 1.0, -1.0;  // columns: up, down in the (e, g) coordinates
    Q /= std::sqrt(2.0);
    Eigen::Matrix4d QQ = Eigen::Matrix4d::Zero();
    for (int i1 = 0; i1 < 2; ++i1)
        for (int i2 = 0; i2 < 2; ++i2)
            for (int k1 = 0; k1 < 2; ++k1)
                for (int k2 = 0; k2 < 2; ++k2) QQ(2 * i1 + i2, 2 * k1 + k2) = Q(i1, k1) * Q(i2, k2);
    Eigen::Matrix4d bells;  // rows: B_l in the (ee, eg, ge, gg) coordinates, rotating frame
    bells << 0, 1, 1, 0,    // B1
        0, 1, -1, 0,        // B2 (singlet)
        1, 0, 0, 1,         // B3
        1, 0, 0, -1;        // B4
    bells /= std::sqrt(2.0);
    return (bells * QQ).cast<cplx>();
}

cplx compute_jp(const DephasingScenario& s, int j, int j2, double t) {
    return DephasingEngine(s).compute_jp(j, j2, t);
}
double basis_state_fidelity(const DephasingScenario& s, double t) {
    return DephasingEngine(s).basis_state_fidelity(t);
}
MatrixXcd second_order_density(const DephasingScenario& s, const MatrixXcd& rho0, double t) {
    return DephasingEngine(s).second_order_density(rho0, t);
}
double bell_fidelity(const DephasingScenario& s, int l, double t) {
    return DephasingEngine(s).bell_fidelity(l, t);
}

}  // namespace deco::deph
