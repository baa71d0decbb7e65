#ifndef DECO_OPTIMIZER_HPP
#define DECO_OPTIMIZER_HPP

#include <functional>
#include <optional>

#include "deco/decay_engine.hpp"
#include "deco/dephasing_engine.hpp"

namespace deco::opt {

struct FreeParameter {
    int channel = 0;  // flat channel index
    enum class Kind { theta, tau } kind = Kind::theta;
};

enum class ObjectiveKind { preserve, steer, equalize_bell };

struct OptimizationProblem {
    std::optional<DecayScenario> decay;          // preserve / steer
    std::optional<DephasingScenario> dephasing;  // equalize_bell
    ObjectiveKind objective = ObjectiveKind::preserve;
    std::vector<FreeParameter> free;
    std::vector<std::pair<double, double>> bounds;  // radians / time units

    double evaluation_time = 0.0;  // residual horizon; 0 = grid t_end
    // steering:
    VectorXcd desired_mixing;
    double target_time = 0.0;
    double fidelity_penalty = 0.1;  // lambda
    // preservation weights (offdiag, rate^2, phase^2):
    std::array<double, 3> weights{1.0, 1.0, 0.1};
    // equalize_bell compares these two states at evaluation_time:
    int bell_a = 2, bell_b = 4;

    int restarts = 8;
    int max_iterations = 400;
    double tolerance = 1e-8;
    Exec exec = Exec::parallel;

    void validate() const;
};

struct StartReport {
    VectorXd start;
    VectorXd best;
    double objective = 0.0;
    int evaluations = 0;
    bool converged = false;
    std::string error;  // non-empty when the start failed to evaluate
};

struct OptimizationResult {
    VectorXd best;
    double objective = 0.0;
    bool converged = false;
    decay::PreservationResiduals residuals;  // preserve objective breakdown
    double steering_residual = 0.0;          // steer objective breakdown
    std::vector<double> trace;               // best-so-far objective per accepted step
    std::vector<StartReport> starts;
};

/// Applies (theta, tau) parameter values onto a copy of the scenario's
/// modulation schedule.
void apply_parameters(mod::ModulationSchedule& m, const std::vector<FreeParameter>& free,
                      const VectorXd& values);

double objective_preserve(const OptimizationProblem& p, const VectorXd& values);
double objective_steer(const OptimizationProblem& p, const VectorXd& values);
double objective_equalize_bell(const OptimizationProblem& p, const VectorXd& values);
double evaluate_objective(const OptimizationProblem& p, const VectorXd& values);

/// Simplex-based derivative-free local search with deterministic restarts
/// from a Halton set over the bounds; ties broken toward the smallest
/// sum of squared parameters.
OptimizationResult minimize(const OptimizationProblem& p);

struct SearchResult {
    VectorXd x;
    double value = 0.0;
    int evaluations = 0;
    bool converged = false;
};
/// Bare bounded simplex search over an arbitrary function (single start).
SearchResult minimize_function(const std::function<double(const VectorXd&)>& fn, const VectorXd& x0,
                               const std::vector<std::pair<double, double>>& bounds, int max_iterations = 400,
                               double tolerance = 1e-8);

struct PowerSweepRow {
    double power = 0.0;       // nominal mean theta/tau (global, theta = pi)
    double tau = 0.0;
    double power_optimized = 0.0;  // mean theta/tau after optimization
    double decay_global = 0.0;     // |A|(t_eval)
    double decay_local = 0.0;
    std::vector<double> mixing_dev_global;  // max_t | |c_k(t)| - |c_k(0)| | per channel
    std::vector<double> mixing_dev_local;
    std::vector<double> theta;  // optimized phases
    bool symmetrized = false;
};

struct SweepOptions {
    double t_eval = 50.0;
    double t_objective = 16.0;  // rate spreads are quasi-steady past ~2 memory windows
    int restarts = 3;
    int max_iterations = 120;
    Exec exec = Exec::parallel;
};

/// fig3-style sweep: for each mean power theta/tau, the global bang-bang
/// run (theta = pi, tau = pi/power) against the locally symmetrized one at
/// the same tau. Falls back to the global phases when symmetrization is not
/// achieved.
std::vector<PowerSweepRow> power_sweep(const DecayScenario& base, const std::vector<double>& powers,
                                       const SweepOptions& opt = {});

}  // namespace deco::opt

#endif
