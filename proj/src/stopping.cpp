#include "fedstop/stopping.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "fedstop/errors.hpp"

namespace fedstop {

namespace {

// Below this, an accumulated distance is treated as "has not moved".
constexpr double kDegenerateDelta = 1e-12;

}  // namespace

void MonitorConfig::validate() const {
    if (!std::isfinite(tau) || tau <= 0.0)
        throw ConfigError("monitor: tau must be a positive real, got " + std::to_string(tau));
    if (rho < 1)
        throw ConfigError("monitor: rho must be a positive integer, got " + std::to_string(rho));
}

TaskVectorMonitor::TaskVectorMonitor(ParameterVector theta0, MonitorConfig cfg)
    : theta0_(std::move(theta0)), cfg_(cfg) {
    cfg_.validate();
    if (theta0_.empty()) throw DimensionError("monitor: empty initial parameter vector");
    if (!vec::all_finite(theta0_)) throw NumericError("monitor: non-finite initial parameters");
}

MonitorRecord TaskVectorMonitor::observe(const ParameterVector& theta_r, int r) {
    if (r != last_round_ + 1)
        throw ProtocolError("monitor: expected round " + std::to_string(last_round_ + 1) +
                            ", got " + std::to_string(r));
    if (theta_r.size() != theta0_.size())
        throw DimensionError("monitor: parameter vector length changed from " +
                             std::to_string(theta0_.size()) + " to " +
                             std::to_string(theta_r.size()));
    if (!vec::all_finite(theta_r))
        throw NumericError("monitor: non-finite parameters at round " + std::to_string(r));
    last_round_ = r;

    const double delta = vec::l2_norm(vec::sub(theta_r, theta0_));

    MonitorRecord rec;
    rec.delta = delta;
    if (r == 1) {
        // kappa_1 = 0 and the growth rate needs a predecessor.
        prev_delta_ = delta;
        return rec;
    }

    double g;
    if (prev_delta_ <= kDegenerateDelta) {
        g = delta <= kDegenerateDelta ? 0.0 : std::numeric_limits<double>::infinity();
    } else {
        g = (delta - prev_delta_) / prev_delta_;
    }
    kappa_ = g < cfg_.tau ? kappa_ + 1 : 0;
    prev_delta_ = delta;

    rec.growth = g;
    rec.kappa = kappa_;
    if (!stopped_at_ && kappa_ >= cfg_.rho) {
        stopped_at_ = r;
        rec.stop = true;
    }
    return rec;
}

ValidationMonitor::ValidationMonitor(ValMetricMode mode, MonitorConfig cfg)
    : mode_(mode), cfg_(cfg) {
    cfg_.validate();
}

ValMonitorRecord ValidationMonitor::observe(double metric, int r) {
    if (!std::isfinite(metric))
        throw NumericError("validation monitor: non-finite metric at round " + std::to_string(r));

    ValMonitorRecord rec;
    if (!has_best_) {
        has_best_ = true;
        best_ = metric;
        best_round_ = r;
        rec.improved = true;
        return rec;
    }

    // Relative improvement, guarded so a zero baseline cannot divide out.
    double rel;
    if (mode_ == ValMetricMode::Loss) {
        const double denom = std::max(std::abs(best_), kDegenerateDelta);
        rel = (best_ - metric) / denom;
    } else {
        const double denom = std::max(std::abs(best_), kDegenerateDelta);
        rel = (metric - best_) / denom;
    }

    if (rel > cfg_.tau) {
        best_ = metric;
        best_round_ = r;
        rounds_since_improve_ = 0;
        rec.improved = true;
    } else {
        ++rounds_since_improve_;
        if (!stopped_at_ && rounds_since_improve_ >= cfg_.rho) {
            stopped_at_ = r;
            rec.stop = true;
        }
    }
    return rec;
}

std::pair<int, double> oracle_best_round(
    const std::vector<std::pair<int, double>>& acc_by_round) {
    if (acc_by_round.empty())
        throw ConfigError("oracle: no evaluated rounds to choose from");
    std::pair<int, double> best = acc_by_round.front();
    for (const auto& [round, acc] : acc_by_round) {
        if (acc > best.second) best = {round, acc};
    }
    return best;
}

double gradient_flow_check(const std::vector<ParameterVector>& trajectory,
                           const std::vector<ParameterVector>& grads, double lr) {
    if (trajectory.size() != grads.size() + 1)
        throw DimensionError("gradient flow check: trajectory must have one more entry than grads");
    if (trajectory.empty()) throw DimensionError("gradient flow check: empty trajectory");

    const std::size_t d = trajectory.front().size();
    ParameterVector accum(d, 0.0);
    double worst = 0.0;
    for (std::size_t r = 1; r < trajectory.size(); ++r) {
        if (trajectory[r].size() != d || grads[r - 1].size() != d)
            throw DimensionError("gradient flow check: inconsistent vector lengths");
        for (std::size_t i = 0; i < d; ++i) accum[i] += grads[r - 1][i];
        ParameterVector err(d);
        for (std::size_t i = 0; i < d; ++i)
            err[i] = (trajectory[r][i] - trajectory[0][i]) + lr * accum[i];
        worst = std::max(worst, vec::linf_norm(err));
    }
    return worst;
}

}  // namespace fedstop
