#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace yudovich {

/// A growth germ θ on [p0, ∞) controlling Lᵖ norms of the vorticity.
class Germ {
public:
    enum class Kind { theta_m, power, tabulated };

    /// θ_m(p) = log p · log log p ··· log^m p; p0 defaults to exp^m(1).
    static Germ theta_m(int m, std::optional<double> p0 = std::nullopt);
    /// θ(p) = p^exponent.
    static Germ power(double exponent, double p0);
    /// Log-linear interpolation in log p through (p, θ(p)) samples; p0 is the first sample.
    static Germ tabulated(std::vector<std::pair<double, double>> samples);

    Kind kind() const { return kind_; }
    double p0() const { return p0_; }
    int m() const { return m_; }
    double exponent() const { return exponent_; }

    /// θ(p); throws DomainError for p < p0 (or past the last tabulated sample).
    double operator()(double p) const;
    /// log θ(p).
    double log_value(double p) const;

private:
    Kind kind_ = Kind::theta_m;
    double p0_ = 1.0;
    int m_ = 0;
    double exponent_ = 0.0;
    std::vector<double> log_p_, log_theta_;
};

/// exp composed k times, starting from x (exp^0(x) = x).
double iterated_exp(int k, double x);
/// log composed k times; throws DomainError when an intermediate value is not positive.
double iterated_log(int k, double x);

/// Minimizer found for T_θ(a).
struct ThetaInfimum {
    double value = 0.0;    // T_θ(a)
    double epsilon = 0.0;  // arg-min
    bool at_boundary = false;
};

/// T_θ(a) = inf_{0<ε≤1/p0} a^ε θ(1/ε)/ε from log a (avoids overflow for huge a).
ThetaInfimum t_theta_log(const Germ& germ, double log_a);
/// T_θ(a) for a > 1.
double t_theta(const Germ& germ, double a);

struct PartialIntegral {
    double log_checkpoint = 0.0;
    double value = 0.0;
    double error = 0.0;
    bool converged = true;
};

/// I(A_k) = ∫_1^{A_k} da/(a T_θ(a)) for increasing checkpoints given as log A_k.
std::vector<PartialIntegral> admissibility_partial_integrals_log(const Germ& germ,
                                                                 std::span<const double> log_checkpoints);
std::vector<PartialIntegral> admissibility_partial_integrals(const Germ& germ,
                                                             std::span<const double> checkpoints);

struct IdentityCheck {
    double quadrature = 0.0;
    double closed_form = 0.0;
    double difference = 0.0;
};

/// ∫_{p1}^{p2} dp/(p θ_m(p)) against log^{m+1} p2 − log^{m+1} p1, with p given through log p.
IdentityCheck iterated_log_identity_check_log(int m, double log_p1, double log_p2);
IdentityCheck iterated_log_identity_check(int m, double p1, double p2);

}  // namespace yudovich
