#include "deco/bath.hpp"

#include <algorithm>
#include <cmath>

namespace deco::bath {

namespace {

double pair_distance(const std::vector<Vector3d>& pos, int a, int b) {
    return (pos[static_cast<size_t>(a)] - pos[static_cast<size_t>(b)]).norm();
}

cplx tabulated_at(const TabulatedBath& m, int a, int b, double t) {
    if (t < 0.0) return std::conj(tabulated_at(m, b, a, -t));
    if (m.grid.empty() || t < m.grid.front() - 1e-12 || t > m.grid.back() + 1e-12) return {0.0, 0.0};
    auto it = std::lower_bound(m.grid.begin(), m.grid.end(), t);
    size_t hi = static_cast<size_t>(it - m.grid.begin());
    if (hi == 0) return m.values.front()(a, b);
    if (hi >= m.grid.size()) return m.values.back()(a, b);
    // exact at nodes, linear between
    double t1 = m.grid[hi - 1], t2 = m.grid[hi];
    if (std::abs(t - t1) < 1e-12) return m.values[hi - 1](a, b);
    if (std::abs(t - t2) < 1e-12) return m.values[hi](a, b);
    double w = (t - t1) / (t2 - t1);
    return (1.0 - w) * m.values[hi - 1](a, b) + w * m.values[hi](a, b);
}

}  // namespace

void BathModel::validate(const ChannelLayout& layout) const {
    const int nch = layout.size();
    if (const auto* g = std::get_if<GaussianDipoleBath>(&model_)) {
        if (g->correlation_time <= 0.0) throw ConfigError("bath: correlation_time must be positive");
        if (g->coupling.rows() != nch || g->coupling.cols() != nch)
            throw ConfigError("bath: coupling matrix size does not match channel count");
        if (static_cast<int>(g->dipole_angles.size()) != nch)
            throw ConfigError("bath: dipole_angles size does not match channel count");
        if (!g->coupling.isApprox(g->coupling.transpose(), 1e-12))
            throw ConfigError("bath: coupling matrix must be symmetric");
    } else if (const auto* c = std::get_if<CorrelatedGaussianDecayBath>(&model_)) {
        if (c->coupling_strength < 0.0) throw ConfigError("bath: gamma must be non-negative");
        if (static_cast<int>(c->correlation_times.size()) != nch || static_cast<int>(c->positions.size()) != nch)
            throw ConfigError("bath: correlation_times/positions must have one entry per system");
        for (double tj : c->correlation_times)
            if (tj <= 0.0) throw ConfigError("bath: correlation_times must be positive");
        for (int a = 0; a < nch; ++a)
            for (int b = 0; b < nch; ++b)
                if (c->reference_distance + pair_distance(c->positions, a, b) <= 0.0)
                    throw ConfigError("bath: r0 + |r_j - r_j'| must be positive");
        for (int j = 1; j <= layout.systems(); ++j)
            if (layout.levels(j) != 1) throw ConfigError("bath: correlated_gaussian_decay expects two-level systems");
    } else if (const auto* e = std::get_if<ExponentialDephasingBath>(&model_)) {
        if (e->coupling_strength < 0.0) throw ConfigError("bath: gamma must be non-negative");
        if (static_cast<int>(e->correlation_times.size()) != nch || static_cast<int>(e->positions.size()) != nch)
            throw ConfigError("bath: correlation_times/positions must have one entry per qubit");
        for (double tj : e->correlation_times)
            if (tj <= 0.0) throw ConfigError("bath: correlation_times must be positive");
    } else if (const auto* t = std::get_if<TabulatedBath>(&model_)) {
        if (t->grid.size() < 2) throw ConfigError("bath: tabulated grid needs at least two samples");
        if (t->grid.size() != t->values.size()) throw ConfigError("bath: tabulated grid/value count mismatch");
        for (size_t k = 1; k < t->grid.size(); ++k)
            if (t->grid[k] <= t->grid[k - 1]) throw ConfigError("bath: tabulated grid must be strictly increasing");
        for (const auto& v : t->values)
            if (v.rows() != nch || v.cols() != nch)
                throw ConfigError("bath: tabulated value matrices must match channel count");
    }
}

cplx BathModel::response_flat(int a, int b, double t) const {
    if (const auto* g = std::get_if<GaussianDipoleBath>(&model_)) {
        double tc = g->correlation_time;
        double dn = std::cos(g->dipole_angles[static_cast<size_t>(a)]);
        double dm = std::cos(g->dipole_angles[static_cast<size_t>(b)]);
        return g->coupling(a, b) * dn * dm * std::exp(-t * t / (4.0 * tc * tc));
    }
    if (const auto* c = std::get_if<CorrelatedGaussianDecayBath>(&model_)) {
        double ta = c->correlation_times[static_cast<size_t>(a)];
        double tb = c->correlation_times[static_cast<size_t>(b)];
        double r = c->reference_distance + pair_distance(c->positions, a, b);
        return c->coupling_strength * std::exp(-t * t / (4.0 * ta * ta) - t * t / (4.0 * tb * tb)) / r;
    }
    if (const auto* e = std::get_if<ExponentialDephasingBath>(&model_)) {
        double ta = e->correlation_times[static_cast<size_t>(a)];
        double tb = e->correlation_times[static_cast<size_t>(b)];
        double r = pair_distance(e->positions, a, b);
        double at = std::abs(t);
        return e->coupling_strength * std::exp(-at / (2.0 * ta) - at / (2.0 * tb) - r * r);
    }
    return tabulated_at(std::get<TabulatedBath>(model_), a, b, t);
}

cplx BathModel::response(const ChannelLayout& layout, ChannelIndex a, ChannelIndex b, double t) const {
    return response_flat(layout.flat(a), layout.flat(b), t);
}

double BathModel::memory_hint() const {
    if (const auto* g = std::get_if<GaussianDipoleBath>(&model_)) return g->correlation_time;
    if (const auto* c = std::get_if<CorrelatedGaussianDecayBath>(&model_))
        return *std::max_element(c->correlation_times.begin(), c->correlation_times.end());
    if (const auto* e = std::get_if<ExponentialDephasingBath>(&model_))
        return *std::max_element(e->correlation_times.begin(), e->correlation_times.end());
    return std::get<TabulatedBath>(model_).grid.back();
}

double BathModel::min_time_scale() const {
    if (const auto* g = std::get_if<GaussianDipoleBath>(&model_)) return g->correlation_time;
    if (const auto* c = std::get_if<CorrelatedGaussianDecayBath>(&model_))
        return *std::min_element(c->correlation_times.begin(), c->correlation_times.end());
    if (const auto* e = std::get_if<ExponentialDephasingBath>(&model_))
        return *std::min_element(e->correlation_times.begin(), e->correlation_times.end());
    const auto& t = std::get<TabulatedBath>(model_);
    double h = t.grid.back();
    for (size_t k = 1; k < t.grid.size(); ++k) h = std::min(h, t.grid[k] - t.grid[k - 1]);
    return std::max(h, 1e-6 * t.grid.back());
}

std::pair<double, double> BathModel::quadrature_window() const {
    // Window chosen so the truncated tail stays below 1e-10 of the peak:
    // 12 t_c suffices for Gaussian memories, exponentials need ~30 t_c.
    double step = min_time_scale() / 50.0;
    if (std::holds_alternative<ExponentialDephasingBath>(model_)) return {30.0 * memory_hint(), step};
    if (const auto* t = std::get_if<TabulatedBath>(&model_)) return {t->grid.back(), step};
    return {12.0 * memory_hint(), step};
}

cplx BathModel::spectral_density_flat(int a, int b, double omega) const {
    if (const auto* t = std::get_if<TabulatedBath>(&model_)) {
        double peak = 0.0;
        for (const auto& v : t->values) peak = std::max(peak, v.cwiseAbs().maxCoeff());
        double tail = t->values.back().cwiseAbs().maxCoeff();
        if (peak > 0.0 && tail > 1e-3 * peak)
            throw NumericalRefusal("spectral_density: tabulated response has not decayed by the end of its grid "
                                   "(no memory cutoff); extend the table");
    }
    auto [T, h] = quadrature_window();
    auto n = static_cast<long>(std::ceil(T / h));
    h = T / static_cast<double>(n);
    cplx acc = 0.5 * (response_flat(a, b, -T) * std::exp(iu * omega * -T) + response_flat(a, b, T) * std::exp(iu * omega * T));
    for (long k = -n + 1; k < n; ++k) {
        double t = static_cast<double>(k) * h;
        acc += response_flat(a, b, t) * std::exp(iu * omega * t);
    }
    return acc * h / (2.0 * pi);
}

cplx BathModel::spectral_density(const ChannelLayout& layout, ChannelIndex a, ChannelIndex b, double omega) const {
    return spectral_density_flat(layout.flat(a), layout.flat(b), omega);
}

const char* BathModel::name() const {
    switch (model_.index()) {
        case 0: return "gaussian_dipole";
        case 1: return "correlated_gaussian_decay";
        case 2: return "exponential_dephasing";
        default: return "tabulated";
    }
}

int BathModel::channel_count() const {
    if (const auto* g = std::get_if<GaussianDipoleBath>(&model_)) return static_cast<int>(g->dipole_angles.size());
    if (const auto* c = std::get_if<CorrelatedGaussianDecayBath>(&model_))
        return static_cast<int>(c->correlation_times.size());
    if (const auto* e = std::get_if<ExponentialDephasingBath>(&model_))
        return static_cast<int>(e->correlation_times.size());
    return static_cast<int>(std::get<TabulatedBath>(model_).values.empty()
                                ? 0
                                : std::get<TabulatedBath>(model_).values.front().rows());
}

}  // namespace deco::bath
