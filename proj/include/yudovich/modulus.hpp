#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "yudovich/germ.hpp"

namespace yudovich {

class GammaFamily;

/// Modulus of continuity μ on [0, a]: increasing, continuous, μ(0) = 0.
class Modulus {
public:
    enum class Kind { power, h_log, from_germ, gamma_power, tabulated, log_inverse };

    /// h^r.
    static Modulus power(double r, double a);
    /// C·h·log(h⁻²); requires a ≤ 1/e so that μ is increasing.
    static Modulus h_log(double C, double a);
    /// C·h·T_θ(h⁻²), the modulus of the velocity for vorticity in 𝕐_θ; requires a < 1.
    static Modulus from_germ(const Germ& germ, double C, double a);
    /// Γ_t(h)^r for a flow-map modulus family.
    static Modulus gamma_power(std::shared_ptr<const GammaFamily> family, double t, double r);
    /// Piecewise log-log interpolation through (h, μ(h)) samples, μ(0) = 0; a is the last sample.
    static Modulus tabulated(std::vector<std::pair<double, double>> samples);
    /// log(1/h)^(−q); requires a < 1.
    static Modulus log_inverse(double q, double a);

    Kind kind() const { return kind_; }
    double a() const { return a_; }
    std::string describe() const;

    /// μ(h) for h ∈ [0, a]; DomainError outside.
    double operator()(double h) const;
    /// μ(h)/h for h ∈ (0, a], evaluated without forming μ at tiny h where possible.
    double ratio(double h) const;

private:
    Kind kind_ = Kind::power;
    double a_ = 1.0;
    double r_ = 1.0;  // exponent for power / gamma_power / log_inverse
    double C_ = 1.0;
    double t_ = 0.0;
    std::optional<Germ> germ_;
    std::shared_ptr<const GammaFamily> family_;
    std::vector<double> log_h_, log_mu_;
};

/// ∫_{h1}^{h2} dh/μ(h) by adaptive quadrature in v = −log h.
double reciprocal_integral(const Modulus& mu, double h1, double h2);

struct OsgoodResult {
    double value = 0.0;
    bool saturated = false;  // t ≥ ∫_c^a dh/μ, value clipped at a
};

/// R with ∫_c^R dh/μ = t (the sharp bound of the Osgood lemma), clipped at a.
OsgoodResult osgood_bound(const Modulus& mu, double c, double t);

/// Flow-map moduli Γ_t, t ∈ [0, T], solving ∫_h^{Γ_t(h)} dh/μ = κt.
class GammaFamily {
public:
    GammaFamily(Modulus mu, double kappa, double T);

    const Modulus& mu() const { return mu_; }
    double kappa() const { return kappa_; }
    double horizon() const { return T_; }
    /// Largest dyadic ã = a·2^{−k} with ∫_ã^a dh/μ ≥ κT.
    double a_tilde() const { return a_tilde_; }

    /// Γ_t(h) for t ∈ [0, T], h ∈ [0, ã]; DomainError otherwise.
    double operator()(double t, double h) const;
    /// Same without the h ≤ ã restriction; saturates at a.
    OsgoodResult evaluate_unrestricted(double t, double h) const;

    /// ∫_h^a dh/μ from the cumulative table (h in (0, a]).
    double tail_integral(double h) const;

private:
    Modulus mu_;
    double kappa_, T_;
    double a_tilde_ = 0.0;
    double dv_ = 0.25;
    std::vector<double> cumulative_;  // ∫_{a e^{−j dv}}^{a} dh/μ
};

/// Largest dyadic h̃ = a·2^{−k} with ∫_h̃^a dh/μ ≥ target (k ≥ 0).
double largest_dyadic_below(const Modulus& mu, double target);

struct DiniResult {
    double partial = 0.0;               // ∫_{h_min}^a μ(h)/h dh
    std::vector<double> increments;     // over [a 2^{−k−1}, a 2^{−k}]
    double tail_ratio = 0.0;            // ratio of the last two increments
    double scaled_last = 0.0;           // k·(last increment): → 0 for summable, O(1) for harmonic decay
    double extrapolated = 0.0;          // partial + geometric tail (∞ without geometric decay)
};

/// Dini evidence: ∫_{h_min}^a μ/h and its dyadic increments.
DiniResult dini_integral(const Modulus& mu, double h_min);

/// ‖F∘φ‖_{C_{μ^r}} ≤ ‖F‖_{C^{0,r}} · ‖φ‖_{C_μ}^r.
double holder_compose_bound(double F_norm, double r, double phi_norm);

struct UpsilonSum {
    std::string exact;  // reduced fraction "num/den"
    double value = 0.0;
    double bound = 0.0;  // 20^s/(m+1)²
    std::size_t terms = 0;
};

/// Σ_{|α|=m, α∈ℕ^s} Π 1/(1+α_i)², exactly; SizeError beyond s ≤ 8, m ≤ 16.
UpsilonSum upsilon_sum(int s, int m);

}  // namespace yudovich
