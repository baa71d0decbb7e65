#include "deco/stochastic_oracle.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "deco/decay_kernel.hpp"
#include "deco/fft.hpp"
#include "deco/rng.hpp"

namespace deco::oracle {

using decay::KernelTables;
using mod::Side;

std::vector<VectorXcd> exact_decay_solve(const DecayScenario& s, Exec exec) {
    KernelTables kt(s);
    const int n = kt.steps(), nch = kt.channels();
    const double h = s.grid.dt;

    std::vector<VectorXcd> alpha(static_cast<size_t>(n) + 1, VectorXcd::Zero(nch));
    alpha[0] = s.initial;
    VectorXcd rhs_next = VectorXcd::Zero(nch);  // f(t_n, right side) for the step ahead

    // inner(a,b) accumulates the history integral sum_j w_j Phi_ab(t1-t_j) E_b(t_j) alpha_b(t_j)
    MatrixXcd hist_part(nch, nch);
    for (int step = 0; step < n; ++step) {
        const int k1 = step + 1;
        const double t1 = k1 * h;
#pragma omp parallel for collapse(2) schedule(static) if (exec == Exec::parallel)
        for (int a = 0; a < nch; ++a) {
            for (int b = 0; b < nch; ++b) {
                const bool rot = s.options.phase_convention == PhaseConvention::rotating;
                cplx acc = 0.5 * (kt.phi_half(2 * k1, a, b) * kt.E(b, 0, false) * (rot ? kt.P(a, 0) : cplx(1.0))) *
                           alpha[0](b);
                for (int j = 1; j <= step; ++j)
                    acc += kt.phi_half(2 * (k1 - j), a, b) * kt.E(b, j, false) * (rot ? kt.P(a, j) : cplx(1.0)) *
                           alpha[static_cast<size_t>(j)](b);
                for (int p : kt.pulse_nodes(b)) {
                    if (p < 1 || p > step) continue;
                    acc += 0.5 * kt.phi_half(2 * (k1 - p), a, b) * (kt.E(b, p, true) - kt.E(b, p, false)) *
                           (rot ? kt.P(a, p) : cplx(1.0)) * alpha[static_cast<size_t>(p)](b);
                }
                acc *= h;
                if (!kt.aligned(b)) {
                    // pulse-split cells, linear alpha interpolation at the pulse
                    for (int j = 0; j <= step; ++j) {
                        double p = kt.cell_pulse(b, j);
                        if (std::isnan(p) || p >= t1) continue;
                        double ta = j * h, tb = (j + 1) * h;
                        cplx Ea = kt.E(b, j, false) * (rot ? kt.P(a, j) : cplx(1.0));
                        cplx Eb2 = kt.E(b, j + 1, true) * (rot ? kt.P(a, j + 1) : cplx(1.0));
                        cplx fa = kt.phi_half(2 * (k1 - j), a, b) * Ea * alpha[static_cast<size_t>(j)](b);
                        cplx fb = kt.phi_half(2 * (k1 - j - 1), a, b) * Eb2 * alpha[static_cast<size_t>(j) + 1](b);
                        acc -= 0.5 * h * (fa + fb);
                        double wgt = (p - ta) / h;
                        cplx al_p = (1.0 - wgt) * alpha[static_cast<size_t>(j)](b) +
                                    wgt * alpha[static_cast<size_t>(j) + 1](b);
                        double wph = rot ? (s.omega[static_cast<size_t>(a)] - s.omega[static_cast<size_t>(b)]) * p
                                         : -s.omega[static_cast<size_t>(b)] * p;
                        cplx fpl = s.bath.response_flat(a, b, t1 - p) * s.modulation.epsilon(b, p, Side::left) *
                                   std::exp(iu * wph) * al_p;
                        cplx fpr = s.bath.response_flat(a, b, t1 - p) * s.modulation.epsilon(b, p, Side::right) *
                                   std::exp(iu * wph) * al_p;
                        acc += 0.5 * (p - ta) * (fa + fpl) + 0.5 * (tb - p) * (fpr + fb);
                    }
                }
                hist_part(a, b) = acc;
            }
        }
        // endpoint coefficient matrix: (h/2) Phi_ab(0) E_b(t1, left) [P_a(t1)]
        MatrixXcd D(nch, nch);
        const bool rot = s.options.phase_convention == PhaseConvention::rotating;
        for (int a = 0; a < nch; ++a)
            for (int b = 0; b < nch; ++b)
                D(a, b) = 0.5 * h * kt.phi_half(0, a, b) * kt.E(b, k1, true) * (rot ? kt.P(a, k1) : cplx(1.0));

        VectorXcd hsum = hist_part.rowwise().sum();
        auto assemble = [&](const VectorXcd& alpha_end, bool left_outer) {
            VectorXcd f(nch);
            VectorXcd total = hsum + D * alpha_end;
            for (int a = 0; a < nch; ++a) f(a) = -kt.outer(a, k1, left_outer) * total(a);
            return f;
        };

        VectorXcd pred = alpha[static_cast<size_t>(step)] + h * rhs_next;
        VectorXcd f1 = assemble(pred, true);
        VectorXcd next = alpha[static_cast<size_t>(step)] + 0.5 * h * (rhs_next + f1);
        f1 = assemble(next, true);
        next = alpha[static_cast<size_t>(step)] + 0.5 * h * (rhs_next + f1);
        alpha[static_cast<size_t>(k1)] = next;
        rhs_next = assemble(next, false);  // right-sided value starts the next step
    }
    return alpha;
}

namespace {

struct EmbeddingPlan {
    size_t length = 0;           // circulant period in samples (power of two)
    std::vector<MatrixXd> root;  // spectral factor per frequency k = 0..L/2
};

EmbeddingPlan plan_embedding(const bath::BathModel& bath, int qubits, const TimeGrid& grid) {
    EmbeddingPlan plan;
    const double h = grid.dt;
    size_t L = next_pow2(static_cast<size_t>(std::ceil(4.0 * grid.t_end / h)));
    L = std::max<size_t>(L, 2 * (static_cast<size_t>(grid.steps()) + 1));
    plan.length = L;

    std::vector<std::vector<double>> spec(static_cast<size_t>(qubits) * qubits);
    std::vector<cplx> row(L);
    for (int a = 0; a < qubits; ++a) {
        for (int b = 0; b < qubits; ++b) {
            for (size_t m = 0; m < L; ++m) {
                double lag = h * static_cast<double>(std::min(m, L - m));
                row[m] = bath.response_flat(a, b, lag);
            }
            fft_radix2(row, false);
            auto& dst = spec[static_cast<size_t>(a) * qubits + b];
            dst.resize(L / 2 + 1);
            for (size_t k = 0; k <= L / 2; ++k) dst[k] = row[k].real();
        }
    }
    double smax = 0.0;
    for (const auto& v : spec)
        for (double x : v) smax = std::max(smax, std::abs(x));

    plan.root.resize(L / 2 + 1);
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig;
    for (size_t k = 0; k <= L / 2; ++k) {
        MatrixXd S(qubits, qubits);
        for (int a = 0; a < qubits; ++a)
            for (int b = 0; b < qubits; ++b)
                S(a, b) = 0.5 * (spec[static_cast<size_t>(a) * qubits + b][k] +
                                 spec[static_cast<size_t>(b) * qubits + a][k]);
        eig.compute(S);
        double lmin = eig.eigenvalues().minCoeff();
        if (lmin < -1e-9 * std::max(smax, 1e-300))
            throw NumericalRefusal("sample_gaussian_process: covariance not positive semidefinite after "
                                   "embedding; minimum spectral eigenvalue " +
                                   std::to_string(lmin) + " at frequency index " + std::to_string(k));
        VectorXd lam = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
        plan.root[k] = eig.eigenvectors() * lam.asDiagonal() * eig.eigenvectors().transpose();
    }
    return plan;
}

/// One deterministic realization addressed by (seed, r): qubit-major output.
void build_realization(const EmbeddingPlan& plan, int qubits, int samples, uint64_t seed, int r, MatrixXd& out,
                       std::vector<std::vector<cplx>>& work) {
    const size_t L = plan.length;
    const double scale = std::sqrt(static_cast<double>(L));
    uint64_t sub = rng::substream(seed, static_cast<uint64_t>(r));
    work.assign(static_cast<size_t>(qubits), std::vector<cplx>(L, cplx(0.0)));

    Eigen::VectorXcd z(qubits), y(qubits);
    for (size_t k = 0; k <= L / 2; ++k) {
        const bool real_bin = (k == 0 || k == L / 2);
        for (int j = 0; j < qubits; ++j) {
            uint64_t ctr = (static_cast<uint64_t>(k) * static_cast<uint64_t>(qubits) + static_cast<uint64_t>(j)) * 2;
            double g1 = rng::gaussian(sub, ctr);
            double g2 = rng::gaussian(sub, ctr + 1);
            z(j) = real_bin ? cplx(g1, 0.0) : cplx(g1, g2) / std::sqrt(2.0);
        }
        y = plan.root[k].cast<cplx>() * z * scale;
        for (int j = 0; j < qubits; ++j) {
            work[static_cast<size_t>(j)][k] = y(j);
            if (!real_bin) work[static_cast<size_t>(j)][L - k] = std::conj(y(j));
        }
    }
    out.resize(qubits, samples);
    for (int j = 0; j < qubits; ++j) {
        fft_radix2(work[static_cast<size_t>(j)], true);
        for (int m = 0; m < samples; ++m) out(j, m) = work[static_cast<size_t>(j)][static_cast<size_t>(m)].real();
    }
}

/// Exact step propagator for H = V0 sigma_z + (delta/2)(I + sigma_x).
Eigen::Matrix2cd step_propagator(double v0, double delta, double dt) {
    double bx = 0.5 * delta, bz = v0;
    double bn = std::hypot(bx, bz);
    double phase = 0.5 * delta * dt;
    Eigen::Matrix2cd U;
    if (bn < 1e-300) {
        U.setIdentity();
    } else {
        double c = std::cos(bn * dt), sn = std::sin(bn * dt);
        cplx f = -iu * sn / bn;
        U << c + f * bz, f * bx, f * bx, c - f * bz;
    }
    return std::exp(-iu * phase) * U;
}

}  // namespace

NoiseRealizations sample_gaussian_process(const bath::BathModel& bath, int qubits, const TimeGrid& grid, int count,
                                          uint64_t seed, Exec exec) {
    grid.validate();
    bath.validate(ChannelLayout(std::vector<int>(static_cast<size_t>(qubits), 1)));
    EmbeddingPlan plan = plan_embedding(bath, qubits, grid);
    NoiseRealizations out;
    out.grid = grid;
    out.qubits = qubits;
    out.count = count;
    out.seed = seed;
    out.rng_algorithm = rng::algorithm_name;
    out.data.assign(static_cast<size_t>(count), MatrixXd());
    const int samples = grid.steps() + 1;
#pragma omp parallel if (exec == Exec::parallel)
    {
        std::vector<std::vector<cplx>> work;
#pragma omp for schedule(static)
        for (int r = 0; r < count; ++r)
            build_realization(plan, qubits, samples, seed, r, out.data[static_cast<size_t>(r)], work);
    }
    return out;
}

FidelitySeries mc_dephasing_fidelity(const DephasingScenario& s, int count, uint64_t seed, Exec exec) {
    s.validate();
    const int M = s.qubits, n = s.grid.steps();
    const double h = s.grid.dt;
    EmbeddingPlan plan = plan_embedding(s.bath, M, s.grid);

    // initial state in the up/down product basis
    Eigen::VectorXcd psi0;
    std::vector<int> bits(static_cast<size_t>(M), 0);
    if (s.initial.kind == DephasingInitial::Kind::basis) {
        int l0 = s.initial.index - 1;
        for (int j = 0; j < M; ++j) bits[static_cast<size_t>(j)] = (l0 >> (M - 1 - j)) & 1;
    } else {
        psi0.resize(4);
        switch (s.initial.index) {  // rows of the Bell rotation, see bell_rotation()
            case 1: psi0 << 1, 0, 0, -1; break;
            case 2: psi0 << 0, -1, 1, 0; break;
            case 3: psi0 << 1, 0, 0, 1; break;
            default: psi0 << 0, 1, 1, 0; break;
        }
        psi0 /= std::sqrt(2.0);
    }

    // per-time fidelity samples, realization-major for a fixed reduction order
    std::vector<std::vector<double>> f(static_cast<size_t>(count), std::vector<double>(static_cast<size_t>(n) + 1));

#pragma omp parallel if (exec == Exec::parallel)
    {
        MatrixXd noise;
        std::vector<std::vector<cplx>> work;
        std::vector<Eigen::Matrix2cd> U(static_cast<size_t>(M));
        std::vector<double> pulses;
#pragma omp for schedule(static)
        for (int r = 0; r < count; ++r) {
            build_realization(plan, M, n + 1, seed, r, noise, work);
            for (auto& u : U) u.setIdentity();
            auto record = [&](int k) {
                if (s.initial.kind == DephasingInitial::Kind::basis) {
                    cplx amp = 1.0;
                    for (int j = 0; j < M; ++j) {
                        int b = bits[static_cast<size_t>(j)];
                        amp *= U[static_cast<size_t>(j)](b, b);
                    }
                    f[static_cast<size_t>(r)][static_cast<size_t>(k)] = std::norm(amp);
                } else {
                    Eigen::Matrix4cd Ufull = Eigen::Matrix4cd::Zero();
                    for (int i1 = 0; i1 < 2; ++i1)
                        for (int i2 = 0; i2 < 2; ++i2)
                            for (int j1 = 0; j1 < 2; ++j1)
                                for (int j2 = 0; j2 < 2; ++j2)
                                    Ufull(2 * i1 + i2, 2 * j1 + j2) = U[0](i1, j1) * U[1](i2, j2);
                    cplx amp = psi0.adjoint() * (Ufull * psi0);
                    f[static_cast<size_t>(r)][static_cast<size_t>(k)] = std::norm(amp);
                }
            };
            record(0);
            for (int k = 0; k < n; ++k) {
                double t0 = k * h, t1 = (k + 1) * h;
                for (int j = 0; j < M; ++j) {
                    double dmid = 0.5 * (noise(j, k) + noise(j, k + 1));
                    const auto& ch = s.modulation.channel(j);
                    // pulse instants in (t0, t1]
                    pulses.clear();
                    if (ch.train) {
                        double tau = ch.train->interval;
                        for (auto m = static_cast<long>(std::floor(t0 / tau + 1e-9)) + 1;
                             static_cast<double>(m) * tau <= t1 + 1e-9 * std::max(1.0, t1); ++m) {
                            double p = static_cast<double>(m) * tau;
                            if (p > t0 + 1e-9 * std::max(1.0, t1)) pulses.push_back(p);
                        }
                    }
                    double seg_start = t0;
                    auto v0_at = [&](double a, double b) {
                        return ch.drive ? ch.drive->envelope.value(0.5 * (a + b)) : 0.0;
                    };
                    for (double p : pulses) {
                        if (p > seg_start + 1e-12)
                            U[static_cast<size_t>(j)] =
                                step_propagator(v0_at(seg_start, p), dmid, p - seg_start) * U[static_cast<size_t>(j)];
                        double th = ch.train->phase_step;
                        Eigen::Matrix2cd kick;
                        kick << std::exp(-iu * (0.5 * th)), 0, 0, std::exp(iu * (0.5 * th));
                        U[static_cast<size_t>(j)] = kick * U[static_cast<size_t>(j)];
                        seg_start = p;
                    }
                    if (t1 > seg_start + 1e-12)
                        U[static_cast<size_t>(j)] =
                            step_propagator(v0_at(seg_start, t1), dmid, t1 - seg_start) * U[static_cast<size_t>(j)];
                }
                record(k + 1);
            }
        }
    }

    FidelitySeries out;
    out.realizations = count;
    out.seed = seed;
    out.t.resize(static_cast<size_t>(n) + 1);
    out.mean.assign(static_cast<size_t>(n) + 1, 0.0);
    out.standard_error.assign(static_cast<size_t>(n) + 1, 0.0);
    for (int k = 0; k <= n; ++k) out.t[static_cast<size_t>(k)] = k * h;
    for (int k = 0; k <= n; ++k) {
        double mean = 0.0;
        for (int r = 0; r < count; ++r) mean += f[static_cast<size_t>(r)][static_cast<size_t>(k)];
        mean /= static_cast<double>(count);
        double var = 0.0;
        for (int r = 0; r < count; ++r) {
            double d = f[static_cast<size_t>(r)][static_cast<size_t>(k)] - mean;
            var += d * d;
        }
        out.mean[static_cast<size_t>(k)] = mean;
        out.standard_error[static_cast<size_t>(k)] =
            count > 1 ? std::sqrt(var / (static_cast<double>(count) * (count - 1))) : 0.0;
    }
    return out;
}

}  // namespace deco::oracle
