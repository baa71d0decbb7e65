#ifndef DECO_TYPES_HPP
#define DECO_TYPES_HPP

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace deco {

using cplx = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::Vector3d;
using Eigen::VectorXcd;
using Eigen::VectorXd;

inline constexpr double pi = std::numbers::pi;
inline constexpr cplx iu{0.0, 1.0};

/// Thrown on invalid scenario/config input (CLI exit code 2).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Thrown when a computation refuses to proceed for numerical reasons,
/// e.g. a grid too coarse for the fastest phase (CLI exit code 3).
struct NumericalRefusal : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One decoherence channel: excited level n of system j (both 1-based).
/// Dephasing scenarios use n == 1 throughout.
struct ChannelIndex {
    int system = 1;
    int level = 1;
    friend bool operator==(const ChannelIndex&, const ChannelIndex&) = default;
};

/// Maps (system, level) channels onto a flat index range.
class ChannelLayout {
  public:
    ChannelLayout() = default;
    explicit ChannelLayout(std::vector<int> levels_per_system) : levels_(std::move(levels_per_system)) {
        offsets_.reserve(levels_.size() + 1);
        offsets_.push_back(0);
        for (int nj : levels_) {
            if (nj < 1) throw ConfigError("ChannelLayout: every system needs at least one level");
            offsets_.push_back(offsets_.back() + nj);
        }
    }

    int systems() const { return static_cast<int>(levels_.size()); }
    int levels(int system) const { return levels_.at(static_cast<size_t>(system) - 1); }
    int size() const { return offsets_.empty() ? 0 : offsets_.back(); }

    int flat(ChannelIndex ch) const {
        if (ch.system < 1 || ch.system > systems())
            throw ConfigError("channel system index " + std::to_string(ch.system) + " out of bounds");
        if (ch.level < 1 || ch.level > levels(ch.system))
            throw ConfigError("channel level index " + std::to_string(ch.level) + " out of bounds for system " +
                              std::to_string(ch.system));
        return offsets_[static_cast<size_t>(ch.system) - 1] + ch.level - 1;
    }

    ChannelIndex unflat(int idx) const {
        if (idx < 0 || idx >= size()) throw ConfigError("flat channel index out of bounds");
        int j = 0;
        while (offsets_[static_cast<size_t>(j) + 1] <= idx) ++j;
        return {j + 1, idx - offsets_[static_cast<size_t>(j)] + 1};
    }

  private:
    std::vector<int> levels_;
    std::vector<int> offsets_;
};

/// Uniform simulation grid t_k = k*dt, k = 0..steps.
struct TimeGrid {
    double t_end = 0.0;
    double dt = 0.0;

    int steps() const { return static_cast<int>(std::llround(t_end / dt)); }
    double time(int k) const { return k * dt; }

    /// Nearest grid index to t; refuses if t is not within half a step of a node.
    int index_of(double t) const {
        int k = static_cast<int>(std::llround(t / dt));
        if (k < 0 || k > steps() || std::abs(t - k * dt) > 0.5 * dt + 1e-12)
            throw ConfigError("requested time " + std::to_string(t) + " is outside the sampled grid");
        return k;
    }

    void validate() const {
        if (dt <= 0.0) throw ConfigError("grid: dt must be positive");
        if (t_end <= 0.0) throw ConfigError("grid: t_end must be positive");
        if (steps() < 2) throw ConfigError("grid: fewer than two steps");
    }
};

}  // namespace deco

#endif
