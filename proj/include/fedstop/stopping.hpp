#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "fedstop/vecmath.hpp"

namespace fedstop {

struct MonitorConfig {
    double tau = 0.01;  // sensitivity threshold
    int rho = 10;       // patience, in consecutive sub-threshold rounds

    void validate() const;  // throws ConfigError
};

struct MonitorRecord {
    double delta = 0.0;            // |theta_r - theta_0|_2
    std::optional<double> growth;  // undefined at r = 1
    int kappa = 0;
    bool stop = false;  // true exactly at the round that sets r*
};

// Data-free early-stopping monitor. The update path sees only the global
// parameters and the round index; no dataset handle can reach it. Tracks
//   delta_r = |theta_r - theta_0|
//   g_r     = (delta_r - delta_{r-1}) / delta_{r-1}          (r >= 2)
//   kappa_r = g_r < tau ? kappa_{r-1} + 1 : 0                (kappa_1 = 0)
// and fires at the first r with kappa_r >= rho.
//
// Degenerate guard: when delta_{r-1} <= 1e-12 the ratio is taken as 0 if
// delta_r is also <= 1e-12, else +inf (counts as >= tau). A run that never
// moves therefore stops after exactly rho + 1 rounds.
class TaskVectorMonitor {
public:
    TaskVectorMonitor(ParameterVector theta0, MonitorConfig cfg);

    // Feed theta_r for round r (rounds must arrive as 1, 2, 3, ...). Keeps
    // observing after the stop fires; stopped_at never changes once set.
    MonitorRecord observe(const ParameterVector& theta_r, int r);

    std::optional<int> stopped_at() const { return stopped_at_; }
    int last_round() const { return last_round_; }

private:
    ParameterVector theta0_;
    MonitorConfig cfg_;
    double prev_delta_ = 0.0;
    int kappa_ = 0;
    int last_round_ = 0;
    std::optional<int> stopped_at_;
};

enum class ValMetricMode { Loss, Accuracy };

struct ValMonitorRecord {
    bool improved = false;
    bool stop = false;
};

// Validation-based baseline with the same (tau, rho) semantics: relative
// improvement beyond tau resets the patience counter. The first observation
// initializes the best metric and counts as an improvement.
class ValidationMonitor {
public:
    ValidationMonitor(ValMetricMode mode, MonitorConfig cfg);

    ValMonitorRecord observe(double metric, int r);

    std::optional<int> stopped_at() const { return stopped_at_; }
    int best_round() const { return best_round_; }  // the checkpoint this baseline returns
    double best_metric() const { return best_; }

private:
    ValMetricMode mode_;
    MonitorConfig cfg_;
    bool has_best_ = false;
    double best_ = 0.0;
    int best_round_ = 0;
    int rounds_since_improve_ = 0;
    std::optional<int> stopped_at_;
};

// Full-budget oracle: the evaluated round with maximum test accuracy, ties
// resolved to the earliest round. Input pairs are (round, test_accuracy).
std::pair<int, double> oracle_best_round(const std::vector<std::pair<int, double>>& acc_by_round);

// Max over r of |(theta_r - theta_0) + lr * sum_{k<=r} grads[k-1]|_inf.
// In the single-client, single-step, full-batch regime the task vector equals
// the accumulated gradient steps exactly, so the returned error is tiny; in
// any other regime it is merely a report.
double gradient_flow_check(const std::vector<ParameterVector>& trajectory,
                           const std::vector<ParameterVector>& grads, double lr);

}  // namespace fedstop
