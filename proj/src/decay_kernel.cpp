#include "deco/decay_kernel.hpp"

#include <cmath>
#include <limits>

namespace deco::decay {

using mod::Side;

KernelTables::KernelTables(const DecayScenario& s) : scenario_(&s) {
    s.validate();
    nch_ = s.layout.size();
    nsteps_ = s.grid.steps();
    h_ = s.grid.dt;
    rotating_ = s.options.phase_convention == PhaseConvention::rotating;
    win_ = s.options.full_memory ? nsteps_
                                 : std::min<int>(nsteps_, static_cast<int>(std::ceil(s.memory_window() / h_)));

    const int half_lags = 2 * nsteps_ + 2;
    phi_half_.resize(static_cast<size_t>(half_lags) * nch_ * nch_);
    for (int m = 0; m < half_lags; ++m) {
        double lag = 0.5 * h_ * m;
        for (int a = 0; a < nch_; ++a)
            for (int b = 0; b < nch_; ++b)
                phi_half_[(static_cast<size_t>(m) * nch_ + a) * nch_ + b] = s.bath.response_flat(a, b, lag);
    }

    Er_.assign(static_cast<size_t>(nch_), {});
    El_.assign(static_cast<size_t>(nch_), {});
    P_.assign(static_cast<size_t>(nch_), {});
    pulse_nodes_.assign(static_cast<size_t>(nch_), {});
    cell_pulse_.assign(static_cast<size_t>(nch_), {});
    std::vector<double> pulses;
    for (int b = 0; b < nch_; ++b) {
        Er_[b].resize(static_cast<size_t>(nsteps_) + 1);
        El_[b].resize(static_cast<size_t>(nsteps_) + 1);
        P_[b].resize(static_cast<size_t>(nsteps_) + 1);
        double w = s.omega[static_cast<size_t>(b)];
        for (int k = 0; k <= nsteps_; ++k) {
            double t = k * h_;
            P_[b][k] = std::exp(iu * (w * t));
            cplx miw = std::exp(iu * (-w * t));
            Er_[b][k] = s.modulation.epsilon(b, t, Side::right) * miw;
            El_[b][k] = s.modulation.epsilon(b, t, Side::left) * miw;
            if (Er_[b][k] != El_[b][k]) pulse_nodes_[b].push_back(k);
        }
        if (!s.modulation.grid_aligned(b, h_)) {
            cell_pulse_[b].assign(static_cast<size_t>(nsteps_) + 1, std::numeric_limits<double>::quiet_NaN());
            s.modulation.pulse_times_between(b, 0.0, s.grid.t_end + 0.5 * h_, pulses);
            for (double p : pulses) {
                int kn = static_cast<int>(std::llround(p / h_));
                bool node_covered = kn >= 0 && kn <= nsteps_ && std::abs(p - kn * h_) < 0.25 * h_ &&
                                    El_[b][static_cast<size_t>(kn)] != Er_[b][static_cast<size_t>(kn)];
                if (node_covered) continue;  // the sided node tables already carry this jump
                int j = static_cast<int>(std::floor(p / h_));
                if (j >= 0 && j <= nsteps_) cell_pulse_[b][static_cast<size_t>(j)] = p;
            }
        }
    }
}

cplx KernelTables::direct_term(int a, int b, double T, double tp, Side side) const {
    const auto& s = *scenario_;
    cplx v = s.bath.response_flat(a, b, T - tp) * s.modulation.epsilon(b, tp, side) *
             std::exp(iu * (-s.omega[static_cast<size_t>(b)] * tp));
    if (rotating_) v *= std::exp(iu * (s.omega[static_cast<size_t>(a)] * tp));
    return v;
}

cplx KernelTables::inner(int a, int b, int k, bool mid, int lo) const {
    if (k <= lo && !mid) return {0.0, 0.0};
    const int off = mid ? 1 : 0;  // lag offset in half-steps
    cplx acc{0.0, 0.0};

    // base pass: trapezoid node weights with right-sided E values
    if (k > lo) {
        acc += 0.5 * (phi_half(2 * (k - lo) + off, a, b) * Er_[b][static_cast<size_t>(lo)] *
                          (rotating_ ? P_[a][static_cast<size_t>(lo)] : cplx(1.0)) +
                      phi_half(off, a, b) * Er_[b][static_cast<size_t>(k)] *
                          (rotating_ ? P_[a][static_cast<size_t>(k)] : cplx(1.0)));
        for (int j = lo + 1; j < k; ++j)
            acc += phi_half(2 * (k - j) + off, a, b) * Er_[b][static_cast<size_t>(j)] *
                   (rotating_ ? P_[a][static_cast<size_t>(j)] : cplx(1.0));
        // sided corrections: a pulse node acts as the right end of its left
        // cell with the pre-pulse value
        for (int p : pulse_nodes_[static_cast<size_t>(b)]) {
            if (p <= lo || p > k) continue;
            acc += 0.5 * phi_half(2 * (k - p) + off, a, b) *
                   (El_[b][static_cast<size_t>(p)] - Er_[b][static_cast<size_t>(p)]) *
                   (rotating_ ? P_[a][static_cast<size_t>(p)] : cplx(1.0));
        }
        acc *= h_;
        // off-grid pulses: replace the plain-cell contribution of affected cells
        if (!aligned(b)) {
            double T = k * h_ + (mid ? 0.5 * h_ : 0.0);
            for (int j = lo; j < k; ++j) {
                double p = cell_pulse_[static_cast<size_t>(b)][static_cast<size_t>(j)];
                if (std::isnan(p)) continue;
                cplx fl = phi_half(2 * (k - j) + off, a, b) * Er_[b][static_cast<size_t>(j)] *
                          (rotating_ ? P_[a][static_cast<size_t>(j)] : cplx(1.0));
                cplx fr = phi_half(2 * (k - j - 1) + off, a, b) * El_[b][static_cast<size_t>(j) + 1] *
                          (rotating_ ? P_[a][static_cast<size_t>(j) + 1] : cplx(1.0));
                acc -= 0.5 * h_ * (fl + fr);
                double ta = j * h_, tb = (j + 1) * h_;
                cplx fpl = direct_term(a, b, T, p, Side::left);
                cplx fpr = direct_term(a, b, T, p, Side::right);
                acc += 0.5 * (p - ta) * (fl + fpl) + 0.5 * (tb - p) * (fpr + fr);
            }
        }
    }

    if (mid) {
        // final half cell [k dt, k dt + dt/2]
        double T = k * h_ + 0.5 * h_;
        cplx fl = phi_half(1, a, b) * Er_[b][static_cast<size_t>(k)] *
                  (rotating_ ? P_[a][static_cast<size_t>(k)] : cplx(1.0));
        cplx fr = direct_term(a, b, T, T, Side::left);
        if (!aligned(b)) {
            double p = cell_pulse_[static_cast<size_t>(b)][static_cast<size_t>(k)];
            if (!std::isnan(p) && p < T) {
                cplx fpl = direct_term(a, b, T, p, Side::left);
                cplx fpr = direct_term(a, b, T, p, Side::right);
                acc += 0.5 * (p - k * h_) * (fl + fpl) + 0.5 * (T - p) * (fpr + fr);
                return acc;
            }
        }
        acc += 0.25 * h_ * (fl + fr);
    }
    return acc;
}

cplx KernelTables::outer(int a, int k, bool left) const {
    // conj(eps_a e^{-i w t}) = conj(eps_a) e^{+i w t}; printed wants an extra
    // e^{+i w t} relative to rotating, which cancels against |P|^2 = 1:
    cplx ce = std::conj((left ? El_ : Er_)[static_cast<size_t>(a)][static_cast<size_t>(k)]);
    return rotating_ ? ce * std::conj(P_[a][static_cast<size_t>(k)]) : ce;
}

cplx KernelTables::outer_mid(int a, int k) const {
    const auto& s = *scenario_;
    double T = k * h_ + 0.5 * h_;
    cplx ce = std::conj(s.modulation.epsilon(a, T, Side::right));
    return rotating_ ? ce : ce * std::exp(iu * (s.omega[static_cast<size_t>(a)] * T));
}

}  // namespace deco::decay
