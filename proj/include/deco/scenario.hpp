#ifndef DECO_SCENARIO_HPP
#define DECO_SCENARIO_HPP

#include "deco/bath.hpp"
#include "deco/modulation.hpp"
#include "deco/types.hpp"

namespace deco {

/// Phase factor of the decay kernel. "printed" keeps the default
/// e^{i w_a t - i w_b t'}; "rotating" replaces it by e^{i (w_a - w_b) t'}
/// for sensitivity analysis.
enum class PhaseConvention { printed, rotating };

/// Sign of the single-flip phase in the proper-dephasing matrix. "prose"
/// uses s = b^{l'} - b^l (+1 for a 1 -> 0 flip); "formula" the negation.
enum class SignConvention { prose, formula };

struct EngineOptions {
    PhaseConvention phase_convention = PhaseConvention::printed;
    double memory_factor = 8.0;  // T_mem = memory_factor * bath memory hint
    bool full_memory = false;
};

/// Zero-temperature-decay problem statement.
struct DecayScenario {
    ChannelLayout layout;
    std::vector<double> omega;  // omega_{j,n} per flat channel
    bath::BathModel bath;
    mod::ModulationSchedule modulation;
    VectorXcd initial;  // alpha(0), flat channel order
    TimeGrid grid;
    EngineOptions options;

    double memory_window() const {
        return options.full_memory ? grid.t_end : options.memory_factor * bath.memory_hint();
    }

    void validate() const {
        grid.validate();
        const int nch = layout.size();
        if (nch < 1) throw ConfigError("decay scenario: no channels");
        if (static_cast<int>(omega.size()) != nch) throw ConfigError("decay scenario: omega size mismatch");
        if (initial.size() != nch) throw ConfigError("decay scenario: initial amplitude size mismatch");
        if (modulation.channels() != nch) throw ConfigError("decay scenario: modulation channel count mismatch");
        bath.validate(layout);
        if (initial.squaredNorm() > 1.0 + 1e-9)
            throw ConfigError("decay scenario: initial amplitudes exceed unit norm");
        if (!options.full_memory && options.memory_factor < 8.0)
            throw ConfigError("decay scenario: memory window must cover at least 8 correlation times "
                              "(engine/memory_factor)");
        double tau_min = modulation.min_pulse_interval();
        if (grid.dt > tau_min / 20.0 + 1e-12)
            throw ConfigError("decay scenario: dt must be at most tau_min/20 (grid/modulation)");
        if (grid.dt > bath.min_time_scale() / 20.0 + 1e-12)
            throw ConfigError("decay scenario: dt must be at most t_c/20 (grid/bath)");
        double wmax = 0.0;
        for (double w : omega) wmax = std::max(wmax, std::abs(w));
        if (grid.dt * wmax > 0.3)
            throw NumericalRefusal("decay scenario: grid too coarse, dt * max|omega| = " +
                                   std::to_string(grid.dt * wmax) + " > 0.3 (grid/dt)");
    }
};

struct DephasingInitial {
    enum class Kind { basis, bell } kind = Kind::basis;
    int index = 1;  // basis l in [1..2^M] or Bell l in [1..4]
};

/// Proper-dephasing problem statement on the 2^M up/down basis.
struct DephasingScenario {
    int qubits = 0;
    bath::BathModel bath;
    mod::ModulationSchedule modulation;
    DephasingInitial initial;
    TimeGrid grid;
    SignConvention sign_convention = SignConvention::formula;

    ChannelLayout layout() const { return ChannelLayout(std::vector<int>(static_cast<size_t>(qubits), 1)); }

    void validate() const {
        grid.validate();
        if (qubits < 1 || qubits > 16) throw ConfigError("dephasing scenario: qubit count out of range");
        if (modulation.channels() != qubits)
            throw ConfigError("dephasing scenario: modulation channel count mismatch");
        bath.validate(layout());
        double tau_min = modulation.min_pulse_interval();
        if (grid.dt > tau_min / 20.0 + 1e-12)
            throw ConfigError("dephasing scenario: dt must be at most tau_min/20 (grid/modulation)");
        if (grid.dt > bath.min_time_scale() / 20.0 + 1e-12)
            throw ConfigError("dephasing scenario: dt must be at most t_c/20 (grid/bath)");
        if (initial.kind == DephasingInitial::Kind::basis) {
            if (initial.index < 1 || initial.index > (1 << qubits))
                throw ConfigError("dephasing scenario: basis index out of range (initial_state/l)");
        } else {
            if (qubits != 2) throw ConfigError("dephasing scenario: Bell states need exactly two qubits");
            if (initial.index < 1 || initial.index > 4)
                throw ConfigError("dephasing scenario: Bell index out of range (initial_state/l)");
        }
    }
};

}  // namespace deco

#endif
