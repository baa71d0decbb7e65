#include "deco/modulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace deco::mod {

PiecewiseConstant::PiecewiseConstant(std::vector<double> edges, std::vector<double> values)
    : edges_(std::move(edges)), values_(std::move(values)) {
    if (edges_.empty() || edges_.size() != values_.size())
        throw ConfigError("piecewise schedule: need one value per edge");
    if (edges_.front() != 0.0) throw ConfigError("piecewise schedule: first edge must be t = 0");
    for (size_t k = 1; k < edges_.size(); ++k)
        if (edges_[k] <= edges_[k - 1]) throw ConfigError("piecewise schedule: edges must increase");
    cumulative_.assign(edges_.size(), 0.0);
    for (size_t k = 1; k < edges_.size(); ++k)
        cumulative_[k] = cumulative_[k - 1] + values_[k - 1] * (edges_[k] - edges_[k - 1]);
}

double PiecewiseConstant::value(double t) const {
    if (empty() || t < 0.0) return 0.0;
    auto it = std::upper_bound(edges_.begin(), edges_.end(), t);
    size_t i = static_cast<size_t>(it - edges_.begin());
    return values_[i == 0 ? 0 : i - 1];
}

double PiecewiseConstant::integral(double t) const {
    if (empty() || t <= 0.0) return 0.0;
    auto it = std::upper_bound(edges_.begin(), edges_.end(), t);
    size_t i = static_cast<size_t>(it - edges_.begin()) - 1;
    return cumulative_[i] + values_[i] * (t - edges_[i]);
}

double pulse_count(const PhasePulseTrain& train, double t, Side side) {
    double x = t / train.interval;
    double r = std::round(x);
    double m;
    if (std::abs(x - r) < 1e-9 * std::max(1.0, std::abs(x)))
        m = (side == Side::left) ? r - 1.0 : r;
    else
        m = std::floor(x);
    return std::max(0.0, m);
}

ModulationSchedule ModulationSchedule::uniform(ChannelModulation m, int channel_count) {
    ModulationSchedule s;
    s.channels_.assign(static_cast<size_t>(channel_count), m);
    s.global_ = true;
    return s;
}

ModulationSchedule ModulationSchedule::per_channel(std::vector<ChannelModulation> channels) {
    ModulationSchedule s;
    s.channels_ = std::move(channels);
    s.global_ = false;
    return s;
}

cplx ModulationSchedule::epsilon(int flat, double t, Side side) const {
    const auto& ch = channel(flat);
    double ph = 0.0;
    if (ch.train) ph += pulse_count(*ch.train, t, side) * ch.train->phase_step;
    if (ch.stark) ph -= ch.stark->rate.integral(t);
    return std::exp(iu * ph);
}

double ModulationSchedule::stark_integral(int flat, double t) const {
    const auto& ch = channel(flat);
    return ch.stark ? ch.stark->rate.integral(t) : 0.0;
}

double ModulationSchedule::phase(int flat, double t, Side side) const {
    const auto& ch = channel(flat);
    double ph = 0.0;
    if (ch.train) ph += pulse_count(*ch.train, t, side) * ch.train->phase_step;
    if (ch.drive) ph += 2.0 * ch.drive->envelope.integral(t);
    return ph;
}

cplx ModulationSchedule::epsilon_phase(int flat, double t, Side side) const {
    return std::exp(iu * phase(flat, t, side));
}

void ModulationSchedule::pulse_times_between(int flat, double t0, double t1, std::vector<double>& out) const {
    out.clear();
    const auto& ch = channel(flat);
    if (!ch.train) return;
    double tau = ch.train->interval;
    auto k = static_cast<long>(std::floor(t0 / tau)) + 1;
    for (; static_cast<double>(k) * tau < t1 - 1e-12 * std::max(1.0, t1); ++k) {
        double p = static_cast<double>(k) * tau;
        if (p > t0 + 1e-12 * std::max(1.0, t1)) out.push_back(p);
    }
}

bool ModulationSchedule::grid_aligned(int flat, double dt) const {
    const auto& ch = channel(flat);
    if (!ch.train) return true;
    double ratio = ch.train->interval / dt;
    return std::abs(ratio - std::round(ratio)) < 1e-9 * std::max(1.0, ratio);
}

double ModulationSchedule::min_pulse_interval() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& ch : channels_)
        if (ch.train) m = std::min(m, ch.train->interval);
    return m;
}

cplx eval_epsilon_decay(const ModulationSchedule& s, const ChannelLayout& layout, ChannelIndex ch, double t) {
    return s.epsilon(layout.flat(ch), t);
}

cplx eval_kernel_decay(const ModulationSchedule& s, const ChannelLayout& layout, ChannelIndex a, ChannelIndex b,
                       double t, double t_prime) {
    return std::conj(s.epsilon(layout.flat(a), t)) * s.epsilon(layout.flat(b), t_prime);
}

double accumulated_drive_phase(const ModulationSchedule& s, int system_j, double t) {
    return s.phase(system_j - 1, t);
}

}  // namespace deco::mod
