#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace yudovich::ode {

using Rhs = std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;

/// One accepted Dormand–Prince step with its 4th-order continuous extension.
struct DenseStep {
    double t0 = 0.0;
    double h = 0.0;
    std::vector<double> rcont;  // 5·n coefficients

    std::size_t dimension() const { return rcont.size() / 5; }
    double t1() const { return t0 + h; }
    void evaluate(double t, std::span<double> out) const;
    std::vector<double> evaluate(double t) const;
    double component(double t, std::size_t i) const;
};

/// Terminal event: integration stops at the first downward zero crossing of g.
struct Event {
    std::string name;
    std::function<double(double t, std::span<const double> y)> g;
};

struct Options {
    double rtol = 1e-8;
    double atol = 1e-8;
    double h_initial = 0.0;  // 0 → automatic
    double h_max = 0.0;      // 0 → |t1 − t0|
    std::size_t max_steps = 2'000'000;
    double safety = 0.9;
    double fac_min = 0.2;
    double fac_max = 10.0;
    double beta = 0.04;  // PI-control weight
    bool store_dense = false;
};

struct EventHit {
    std::size_t index = 0;
    std::string name;
    double t = 0.0;
    std::vector<double> y;
};

struct Result {
    double t = 0.0;
    std::vector<double> y;
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t rhs_evaluations = 0;
    std::vector<double> step_sizes;
    std::vector<DenseStep> dense;  // filled when store_dense
    std::optional<EventHit> event;
};

/// Called after every accepted step; return false to stop.
using StepObserver = std::function<bool(const DenseStep&)>;

/// Adaptive Dormand–Prince 5(4) integration from t0 to t1 with PI step control.
/// Throws StiffnessError when the step size underflows.
Result dopri5(const Rhs& f, double t0, std::span<const double> y0, double t1, const Options& opts,
              std::span<const Event> events = {}, const StepObserver& observer = {});

}  // namespace yudovich::ode
