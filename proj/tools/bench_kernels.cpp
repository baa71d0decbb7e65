// Benchmark: serial reference kernels vs the tabulated OpenMP ones on a
// representative scenario of each engine. Prints times and max deviation.
#include <chrono>
#include <cstdio>

#include "deco/decay_engine.hpp"
#include "deco/dephasing_engine.hpp"
#include "deco/stochastic_oracle.hpp"

using namespace deco;

namespace {

double seconds(std::chrono::steady_clock::time_point a, std::chrono::steady_clock::time_point b) {
    return std::chrono::duration<double>(b - a).count();
}

DecayScenario decay_case() {
    DecayScenario s;
    s.layout = ChannelLayout({4});
    s.omega = {0.5, 0.6, 0.7, 0.8};
    bath::GaussianDipoleBath g;
    g.correlation_time = 1.0;
    g.coupling = MatrixXd::Constant(4, 4, 0.5);
    g.coupling.diagonal().setConstant(1.0);
    g.dipole_angles = {0.246 * pi, 0.0, 0.326 * pi, 0.370 * pi};
    s.bath = g;
    std::vector<mod::ChannelModulation> chans(4);
    double theta[] = {1.0, 0.9, 0.8, 0.7};
    for (int a = 0; a < 4; ++a) chans[a].train = mod::PhasePulseTrain{1.0, theta[a] * pi};
    s.modulation = mod::ModulationSchedule::per_channel(chans);
    s.initial = VectorXcd::Constant(4, cplx(0.5, 0.0));
    s.grid = {30.0, 0.05};
    return s;
}

DephasingScenario dephasing_case() {
    DephasingScenario s;
    s.qubits = 2;
    bath::ExponentialDephasingBath b;
    b.coupling_strength = 0.01;
    b.correlation_times = {1.0, 1.0};
    b.positions = {Vector3d(0, 0, 0), Vector3d(1, 0, 0)};
    s.bath = b;
    std::vector<mod::ChannelModulation> chans(2);
    chans[0].train = mod::PhasePulseTrain{1.0, 0.9 * pi};
    chans[1].train = mod::PhasePulseTrain{1.0, 0.8 * pi};
    s.modulation = mod::ModulationSchedule::per_channel(chans);
    s.grid = {25.0, 0.05};
    return s;
}

}  // namespace

int main() {
    std::printf("threads available: %d (OpenMP %s)\n\n", thread_count(Exec::parallel),
                omp_enabled() ? "on" : "off");

    {
        DecayScenario s = decay_case();
        auto t0 = std::chrono::steady_clock::now();
        auto serial = decay::compute_w_j_series(s, Exec::serial);
        auto t1 = std::chrono::steady_clock::now();
        auto par = decay::compute_w_j_series(s, Exec::parallel);
        auto t2 = std::chrono::steady_clock::now();
        double dev = 0.0;
        for (size_t k = 0; k < serial.W.size(); ++k)
            dev = std::max(dev, (serial.W[k] - par.W[k]).cwiseAbs().maxCoeff());
        // independent slow path at a few nodes
        double ref_dev = 0.0;
        auto tr0 = std::chrono::steady_clock::now();
        for (int k : {100, 300, 599}) {
            MatrixXcd ref = decay::compute_w_reference(s, k * s.grid.dt);
            ref_dev = std::max(ref_dev, (ref - par.W[static_cast<size_t>(k)]).cwiseAbs().maxCoeff());
        }
        auto tr1 = std::chrono::steady_clock::now();
        std::printf("decay W+J series (4 channels, 600 steps)\n");
        std::printf("  serial   %8.3f s\n", seconds(t0, t1));
        std::printf("  openmp   %8.3f s   speedup %.2fx   max |serial-omp| %.3g\n", seconds(t1, t2),
                    seconds(t0, t1) / seconds(t1, t2), dev);
        std::printf("  direct reference (3 nodes) %.3f s, max deviation %.3g\n\n", seconds(tr0, tr1), ref_dev);
    }

    {
        DephasingScenario s = dephasing_case();
        auto t0 = std::chrono::steady_clock::now();
        deph::DephasingEngine es(s, Exec::serial);
        for (int j = 0; j < 2; ++j)
            for (int j2 = 0; j2 < 2; ++j2) es.pair(j, j2);
        auto t1 = std::chrono::steady_clock::now();
        deph::DephasingEngine ep(s, Exec::parallel);
        for (int j = 0; j < 2; ++j)
            for (int j2 = 0; j2 < 2; ++j2) ep.pair(j, j2);
        auto t2 = std::chrono::steady_clock::now();
        double dev = 0.0;
        for (int j = 0; j < 2; ++j)
            for (int j2 = 0; j2 < 2; ++j2) {
                const auto& a = es.pair(j, j2);
                const auto& b = ep.pair(j, j2);
                for (size_t k = 0; k < a.mp.size(); ++k) dev = std::max(dev, std::abs(a.mp[k] - b.mp[k]));
            }
        std::printf("dephasing pair kernels (2 qubits, 500 steps, 4 sign combos)\n");
        std::printf("  serial   %8.3f s\n", seconds(t0, t1));
        std::printf("  openmp   %8.3f s   speedup %.2fx   max |serial-omp| %.3g\n\n", seconds(t1, t2),
                    seconds(t0, t1) / seconds(t1, t2), dev);
    }

    {
        DephasingScenario s = dephasing_case();
        s.grid.t_end = 5.0;
        auto t0 = std::chrono::steady_clock::now();
        auto ms = oracle::mc_dephasing_fidelity(s, 1000, 42, Exec::serial);
        auto t1 = std::chrono::steady_clock::now();
        auto mp = oracle::mc_dephasing_fidelity(s, 1000, 42, Exec::parallel);
        auto t2 = std::chrono::steady_clock::now();
        double dev = 0.0;
        for (size_t k = 0; k < ms.mean.size(); ++k) dev = std::max(dev, std::abs(ms.mean[k] - mp.mean[k]));
        std::printf("monte-carlo dephasing (1000 realizations, 100 steps)\n");
        std::printf("  serial   %8.3f s\n", seconds(t0, t1));
        std::printf("  openmp   %8.3f s   speedup %.2fx   max |serial-omp| %.3g (bit-stable reduction)\n",
                    seconds(t1, t2), seconds(t0, t1) / seconds(t1, t2), dev);
    }
    return 0;
}
