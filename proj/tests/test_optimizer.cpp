#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "deco/optimizer.hpp"
#include "test_support.hpp"

using namespace deco;
using testsup::fig2_scenario;
using testsup::fig5_scenario;

TEST_CASE("simplex search solves a quadratic to 1e-6") {
    auto fn = [](const VectorXd& x) { return (x(0) - 1.3) * (x(0) - 1.3) + 2.0; };
    VectorXd x0(1);
    x0 << 0.1;
    auto res = opt::minimize_function(fn, x0, {{-2.0, 4.0}}, 200, 1e-14);
    CHECK(std::abs(res.x(0) - 1.3) < 1e-6);
    CHECK(res.value == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(res.converged);
}

TEST_CASE("preserve objective: measured relation between the quoted and global phases") {
    // theta is 2 pi periodic, so {pi, 9 pi, 8 pi, 7 pi} leaves level 3 free;
    // its runaway Re J dominates the rate spread and the objective exceeds
    // the global bang-bang value.
    opt::OptimizationProblem p;
    p.decay = fig2_scenario({1.0, 1.0, 1.0, 1.0}, 30.0);
    p.objective = opt::ObjectiveKind::preserve;
    for (int a = 0; a < 4; ++a) p.free.push_back({a, opt::FreeParameter::Kind::theta});
    p.bounds.assign(4, {0.0, 10.0 * pi});
    VectorXd quoted(4), global(4);
    quoted << pi, 9.0 * pi, 8.0 * pi, 7.0 * pi;
    global << pi, pi, pi, pi;
    double f_quoted = opt::objective_preserve(p, quoted);
    double f_global = opt::objective_preserve(p, global);
    CHECK(f_quoted > f_global);

    // objective evaluations are pure: identical inputs, identical bits
    CHECK(opt::objective_preserve(p, global) == f_global);

    // single channel: the preserve objective vanishes identically
    opt::OptimizationProblem p1;
    p1.decay = testsup::scalar_gaussian(0.5, 1.0, 0.3, 4.0, 0.01);
    p1.decay->modulation.channel(0).train = mod::PhasePulseTrain{1.0, pi};
    p1.objective = opt::ObjectiveKind::preserve;
    p1.free.push_back({0, opt::FreeParameter::Kind::theta});
    p1.bounds.assign(1, {0.0, 2.0 * pi});
    VectorXd th(1);
    th << 0.7 * pi;
    CHECK(opt::objective_preserve(p1, th) == 0.0);
}

TEST_CASE("optimizer symmetrizes the four-level scenario with free phases") {
    opt::OptimizationProblem p;
    p.decay = fig2_scenario({1.0, 1.0, 1.0, 1.0}, 30.0);
    p.objective = opt::ObjectiveKind::preserve;
    for (int a = 0; a < 4; ++a) p.free.push_back({a, opt::FreeParameter::Kind::theta});
    p.bounds.assign(4, {0.05 * pi, 1.95 * pi});
    p.restarts = 6;
    p.max_iterations = 300;
    p.weights = {0.0, 1.0, 0.0};  // equalize the decay rates
    auto res = opt::minimize(p);
    for (int i = 0; i < 4; ++i) {
        CHECK(res.best(i) >= p.bounds[static_cast<size_t>(i)].first);
        CHECK(res.best(i) <= p.bounds[static_cast<size_t>(i)].second);
    }
    VectorXd quoted(4);
    quoted << pi, 9.0 * pi, 8.0 * pi, 7.0 * pi;
    opt::OptimizationProblem pq = p;
    pq.bounds.assign(4, {0.0, 10.0 * pi});
    CHECK(res.objective <= opt::objective_preserve(pq, quoted));

    // the found phases genuinely equalize the decay rates
    DecayScenario best = *p.decay;
    opt::apply_parameters(best.modulation, p.free, res.best);
    auto wj = decay::compute_w_j_series(best);
    double lo = 1e300, hi = -1e300, mean = 0.0;
    for (int a = 0; a < 4; ++a) {
        double v = wj.J.back()(a, a).real();
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        mean += v / 4.0;
    }
    CHECK((hi - lo) / mean < 0.1);
}

TEST_CASE("steer objective: the fig5 phases beat global bang-bang, zero coupling is flat") {
    opt::OptimizationProblem p;
    p.decay = fig5_scenario(true);
    p.objective = opt::ObjectiveKind::steer;
    p.desired_mixing = VectorXcd::Constant(3, cplx(1.0, 0.0));
    p.target_time = 25.0;
    for (int a = 0; a < 3; ++a) p.free.push_back({a, opt::FreeParameter::Kind::theta});
    p.bounds.assign(3, {0.05 * pi, 1.95 * pi});
    VectorXd quoted(3), global(3);
    quoted << 0.80 * pi, 0.56 * pi, 0.47 * pi;
    global << pi, pi, pi;
    CHECK(opt::objective_steer(p, quoted) < opt::objective_steer(p, global));

    // no coupling: the steering objective cannot depend on the phases
    opt::OptimizationProblem p0 = p;
    DecayScenario s0 = *p.decay;
    auto b = *s0.bath.get_if<bath::CorrelatedGaussianDecayBath>();
    b.coupling_strength = 0.0;
    s0.bath = b;
    p0.decay = s0;
    CHECK(opt::objective_steer(p0, quoted) == doctest::Approx(opt::objective_steer(p0, global)).epsilon(1e-12));
}

TEST_CASE("minimize: start-0 is the scenario's own parameter values") {
    // at a permutation-symmetric scenario the global phases already minimize;
    // the optimizer must not do worse than any tested local perturbation
    opt::OptimizationProblem p;
    p.decay = testsup::fig4_scenario(true, true, 12.0);
    p.objective = opt::ObjectiveKind::preserve;
    for (int a = 0; a < 3; ++a) p.free.push_back({a, opt::FreeParameter::Kind::theta});
    p.bounds.assign(3, {0.5 * pi, 1.5 * pi});
    p.restarts = 2;
    p.max_iterations = 60;
    auto res = opt::minimize(p);
    testsup::Lcg rng(3);
    for (int it = 0; it < 5; ++it) {
        VectorXd perturbed(3);
        for (int a = 0; a < 3; ++a) perturbed(a) = pi + rng.uniform(-0.3, 0.3) * pi;
        CHECK(res.objective <= opt::objective_preserve(p, perturbed) + 1e-12);
    }
}

TEST_CASE("power sweep: local never below global, zero-pulse limit ties") {
    DecayScenario base = fig2_scenario({1.0, 1.0, 1.0, 1.0}, 25.0);
    opt::SweepOptions so;
    so.t_eval = 25.0;
    so.t_objective = 14.0;
    so.restarts = 2;
    so.max_iterations = 30;
    auto rows = opt::power_sweep(base, {0.03 * pi, 1.0 * pi, 2.0 * pi}, so);
    REQUIRE(rows.size() == 3);
    for (const auto& r : rows) {
        CHECK(r.decay_local >= r.decay_global - 1e-9);
        CHECK(r.decay_global > 0.0);
        CHECK(r.decay_global <= 1.0 + 1e-12);
    }
    // power 0.03 pi: tau > t_end, no pulse ever fires, local equals global
    CHECK(rows[0].decay_local == rows[0].decay_global);
}

TEST_CASE("equalize_bell: free theta_2 closes the singlet/triplet gap") {
    opt::OptimizationProblem p;
    p.dephasing = testsup::fig6_scenario(0.9);  // start from the global schedule
    p.objective = opt::ObjectiveKind::equalize_bell;
    p.evaluation_time = 25.0;
    p.free.push_back({1, opt::FreeParameter::Kind::theta});
    p.bounds.assign(1, {0.55 * pi, 1.45 * pi});
    p.restarts = 4;
    p.max_iterations = 40;
    auto res = opt::minimize(p);

    VectorXd quoted(1);
    quoted << 0.8 * pi;
    double f_quoted = opt::objective_equalize_bell(p, quoted);
    VectorXd global(1);
    global << 0.9 * pi;
    double f_global = opt::objective_equalize_bell(p, global);
    CHECK(res.objective <= f_quoted + 1e-12);
    CHECK(res.objective < f_global / 3.0);  // decisively better than bang-bang-for-both
}

TEST_CASE("optimize validation rejects bad problems") {
    opt::OptimizationProblem p;
    p.decay = testsup::scalar_gaussian();
    p.objective = opt::ObjectiveKind::preserve;
    CHECK_THROWS_AS(opt::minimize(p), ConfigError);  // no free parameters
    p.free.push_back({0, opt::FreeParameter::Kind::theta});
    p.bounds.assign(1, {0.0, 11.0 * pi});  // outside [0, 10 pi]
    CHECK_THROWS_AS(opt::minimize(p), ConfigError);
}
