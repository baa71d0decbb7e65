#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "deco/modulation.hpp"
#include "test_support.hpp"

using namespace deco;
using mod::Side;

namespace {

mod::ModulationSchedule train_schedule(std::vector<double> theta, double tau = 1.0) {
    std::vector<mod::ChannelModulation> ch(theta.size());
    for (size_t a = 0; a < theta.size(); ++a) ch[a].train = mod::PhasePulseTrain{tau, theta[a]};
    return mod::ModulationSchedule::per_channel(std::move(ch));
}

}  // namespace

TEST_CASE("pulse train phase factor") {
    ChannelLayout layout({1});
    auto s = train_schedule({pi}, 2.0);
    // before the first pulse
    CHECK(std::abs(mod::eval_epsilon_decay(s, layout, {1, 1}, 1.0) - cplx(1.0)) < 1e-15);
    // after one pi pulse
    CHECK(std::abs(mod::eval_epsilon_decay(s, layout, {1, 1}, 3.0) - cplx(-1.0)) < 1e-15);
    // right-continuous at the pulse instant, old phase in the left limit
    CHECK(std::abs(s.epsilon(0, 2.0, Side::right) - cplx(-1.0)) < 1e-15);
    CHECK(std::abs(s.epsilon(0, 2.0, Side::left) - cplx(1.0)) < 1e-15);
}

TEST_CASE("constant Stark shift winds the phase e^{-i delta t}") {
    std::vector<mod::ChannelModulation> ch(1);
    ch[0].stark = mod::StarkShiftSchedule{mod::PiecewiseConstant::constant(0.7)};
    auto s = mod::ModulationSchedule::per_channel(ch);
    for (double t : {0.3, 1.7, 4.0}) {
        cplx expect = std::exp(cplx(0.0, -0.7 * t));
        CHECK(std::abs(s.epsilon(0, t) - expect) < 1e-14);
    }
}

TEST_CASE("decay kernel examples") {
    ChannelLayout layout({2});
    double tau = 1.0;

    // same channel, any theta: K(1.5 tau, 0.5 tau) = e^{-i theta}
    for (double th : {0.3, pi, 2.5}) {
        auto s = train_schedule({th, th}, tau);
        cplx k = mod::eval_kernel_decay(s, layout, {1, 1}, {1, 1}, 1.5 * tau, 0.5 * tau);
        CHECK(std::abs(k - std::exp(cplx(0.0, -th))) < 1e-14);
        // t = t', same channel, phase-only: 1
        cplx k2 = mod::eval_kernel_decay(s, layout, {1, 1}, {1, 1}, 1.5 * tau, 1.5 * tau);
        CHECK(std::abs(k2 - cplx(1.0)) < 1e-14);
    }
    // two channels theta1 = pi, theta2 = 0.8 pi at t = t' = 1.5 tau
    auto s = train_schedule({pi, 0.8 * pi}, tau);
    cplx k = mod::eval_kernel_decay(s, layout, {1, 1}, {1, 2}, 1.5 * tau, 1.5 * tau);
    CHECK(std::abs(k - std::exp(cplx(0.0, -0.2 * pi))) < 1e-14);
}

TEST_CASE("accumulated drive phase") {
    // constant envelope: phi = 2 V0 t
    std::vector<mod::ChannelModulation> ch(1);
    ch[0].drive = mod::DrivingEnvelope{mod::PiecewiseConstant::constant(0.25)};
    auto s = mod::ModulationSchedule::per_channel(ch);
    CHECK(mod::accumulated_drive_phase(s, 1, 3.0) == doctest::Approx(1.5).epsilon(1e-14));

    // zero envelope
    std::vector<mod::ChannelModulation> ch0(1);
    auto s0 = mod::ModulationSchedule::per_channel(ch0);
    CHECK(mod::accumulated_drive_phase(s0, 1, 3.0) == 0.0);

    // impulsive-equivalent: narrow V0 bumps of area theta/2 every tau
    double theta = 0.9 * pi, tau = 1.0, w = 0.01;
    mod::PiecewiseConstant v({0.0, tau, tau + w, 2 * tau, 2 * tau + w}, {0.0, theta / (2 * w), 0.0, theta / (2 * w), 0.0});
    std::vector<mod::ChannelModulation> chi(1);
    chi[0].drive = mod::DrivingEnvelope{v};
    auto si = mod::ModulationSchedule::per_channel(chi);
    CHECK(mod::accumulated_drive_phase(si, 1, 1.5 * tau) == doctest::Approx(theta).epsilon(1e-12));
}

TEST_CASE("property: phase-only epsilon has unit modulus") {
    testsup::Lcg rng(11);
    for (int it = 0; it < 200; ++it) {
        double tau = rng.uniform(0.1, 3.0);
        double th = rng.uniform(0.0, 10.0 * pi);
        auto s = train_schedule({th}, tau);
        double t = rng.uniform(0.0, 40.0);
        CHECK(std::abs(std::abs(s.epsilon(0, t)) - 1.0) < 1e-14);
    }
}

TEST_CASE("property: kernel Hermiticity K_ab(t,t') = conj(K_ba(t',t))") {
    ChannelLayout layout({3});
    testsup::Lcg rng(13);
    for (int it = 0; it < 100; ++it) {
        auto s = train_schedule({rng.uniform(0, 2 * pi), rng.uniform(0, 2 * pi), rng.uniform(0, 2 * pi)},
                                rng.uniform(0.2, 2.0));
        int a = 1 + static_cast<int>(rng.uniform(0, 3)), b = 1 + static_cast<int>(rng.uniform(0, 3));
        double t = rng.uniform(0, 20), tp = rng.uniform(0, 20);
        cplx lhs = mod::eval_kernel_decay(s, layout, {1, a}, {1, b}, t, tp);
        cplx rhs = std::conj(mod::eval_kernel_decay(s, layout, {1, b}, {1, a}, tp, t));
        CHECK(std::abs(lhs - rhs) < 1e-14);
    }
}

TEST_CASE("global schedule gives channel-independent kernels") {
    ChannelLayout layout({3});
    mod::ChannelModulation m;
    m.train = mod::PhasePulseTrain{0.7, 1.3};
    auto s = mod::ModulationSchedule::uniform(m, 3);
    CHECK(s.is_global());
    testsup::Lcg rng(17);
    for (int it = 0; it < 50; ++it) {
        double t = rng.uniform(0, 20), tp = rng.uniform(0, 20);
        cplx k11 = mod::eval_kernel_decay(s, layout, {1, 1}, {1, 1}, t, tp);
        for (int a = 1; a <= 3; ++a)
            for (int b = 1; b <= 3; ++b) {
                cplx kab = mod::eval_kernel_decay(s, layout, {1, a}, {1, b}, t, tp);
                CHECK(std::abs(kab - k11) < 1e-14);
            }
    }
}

TEST_CASE("piecewise-constant integral is exact at and between breakpoints") {
    mod::PiecewiseConstant f({0.0, 1.0, 2.5}, {2.0, -1.0, 0.5});
    CHECK(f.integral(0.5) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(f.integral(1.0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(f.integral(2.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(f.integral(3.0) == doctest::Approx(2.0 - 1.5 + 0.25).epsilon(1e-15));
    CHECK(f.value(1.5) == -1.0);
    CHECK_THROWS_AS(mod::PiecewiseConstant({0.5}, {1.0}), ConfigError);   // must start at 0
    CHECK_THROWS_AS(mod::PiecewiseConstant({0.0, 0.0}, {1.0, 2.0}), ConfigError);
}

TEST_CASE("pulse bookkeeping: instants between two times, grid alignment") {
    auto s = train_schedule({pi}, 0.5);
    std::vector<double> out;
    s.pulse_times_between(0, 0.2, 1.7, out);
    REQUIRE(out.size() == 3);
    CHECK(out[0] == doctest::Approx(0.5));
    CHECK(out[2] == doctest::Approx(1.5));
    s.pulse_times_between(0, 0.5, 1.5, out);  // open interval: both endpoints excluded
    REQUIRE(out.size() == 1);
    CHECK(out[0] == doctest::Approx(1.0));
    CHECK(s.grid_aligned(0, 0.025));
    CHECK(!s.grid_aligned(0, 0.03));
    CHECK(s.min_pulse_interval() == 0.5);
}
