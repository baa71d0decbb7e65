#ifndef DECO_MODULATION_HPP
#define DECO_MODULATION_HPP

#include <optional>

#include "deco/types.hpp"

namespace deco::mod {

/// Which one-sided limit to take at a pulse instant. Pulse trains are
/// right-continuous: the value AT k*tau carries the new phase.
enum class Side { left, right };

/// Impulsive phase modulation e^{i floor(t/tau) theta}.
struct PhasePulseTrain {
    double interval = 1.0;    // tau > 0
    double phase_step = 0.0;  // theta, radians
};

/// Piecewise-constant real function of time with exact accumulated integral.
/// value i applies on [edges[i], edges[i+1]); the last value extends forever.
class PiecewiseConstant {
  public:
    PiecewiseConstant() = default;
    PiecewiseConstant(std::vector<double> edges, std::vector<double> values);
    static PiecewiseConstant constant(double v) { return PiecewiseConstant({0.0}, {v}); }

    double value(double t) const;
    double integral(double t) const;  // integral from 0 to t, exact
    bool empty() const { return edges_.empty(); }

  private:
    std::vector<double> edges_;
    std::vector<double> values_;
    std::vector<double> cumulative_;  // integral up to each edge
};

/// Stark-shift rate delta_{j,n}(t).
struct StarkShiftSchedule {
    PiecewiseConstant rate;
};

/// Resonant driving envelope V0_j(t); accumulated phase phi = 2 * integral V0.
struct DrivingEnvelope {
    PiecewiseConstant envelope;
};

struct ChannelModulation {
    std::optional<PhasePulseTrain> train;
    std::optional<StarkShiftSchedule> stark;
    std::optional<DrivingEnvelope> drive;
};

/// Number of pulses delivered by time t (sided at pulse instants).
double pulse_count(const PhasePulseTrain& train, double t, Side side);

/// Per-channel modulation functions for a scenario. Immutable after
/// construction; concurrent evaluation is safe.
class ModulationSchedule {
  public:
    ModulationSchedule() = default;
    static ModulationSchedule uniform(ChannelModulation m, int channel_count);
    static ModulationSchedule per_channel(std::vector<ChannelModulation> channels);

    int channels() const { return static_cast<int>(channels_.size()); }
    bool is_global() const { return global_; }
    const ChannelModulation& channel(int flat) const { return channels_.at(static_cast<size_t>(flat)); }
    ChannelModulation& channel(int flat) { return channels_.at(static_cast<size_t>(flat)); }
    void mark_local() { global_ = false; }

    /// Decay-side modulation: pulse train factor times e^{-i int_0^t delta}.
    cplx epsilon(int flat, double t, Side side = Side::right) const;
    double stark_integral(int flat, double t) const;

    /// Dephasing-side accumulated phase phi_j(t); epsilon^P = e^{i phi}.
    double phase(int flat, double t, Side side = Side::right) const;
    cplx epsilon_phase(int flat, double t, Side side = Side::right) const;

    /// Pulse instants of the channel's train strictly inside (t0, t1).
    void pulse_times_between(int flat, double t0, double t1, std::vector<double>& out) const;
    /// True when every pulse instant lies on the grid t = k*dt.
    bool grid_aligned(int flat, double dt) const;
    double min_pulse_interval() const;  // +inf when no trains

  private:
    std::vector<ChannelModulation> channels_;
    bool global_ = true;
};

// Operation-level helpers (channel addressed by (system, level)).
cplx eval_epsilon_decay(const ModulationSchedule& s, const ChannelLayout& layout, ChannelIndex ch, double t);
cplx eval_kernel_decay(const ModulationSchedule& s, const ChannelLayout& layout, ChannelIndex a, ChannelIndex b,
                       double t, double t_prime);
double accumulated_drive_phase(const ModulationSchedule& s, int system_j, double t);

}  // namespace deco::mod

#endif
