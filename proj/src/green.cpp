#include "yudovich/green.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include "yudovich/errors.hpp"

namespace yudovich {

namespace {

constexpr double inv2pi = 0.5 / std::numbers::pi;
using cd = std::complex<double>;

cd to_c(Vec2 v) { return {v.x, v.y}; }

class DiskGreen final : public GreenEvaluator {
public:
    explicit DiskGreen(Domain d) : GreenEvaluator(std::move(d)) {
        k_.kind = ClosedFormKernel::Kind::disk;
        k_.R = domain_.R();
        compute_period_matrix(1e12);
    }
    std::string backend_name() const override { return "analytic-disk"; }
    const ClosedFormKernel* kernel() const override { return &k_; }

    double G0(Vec2 x, Vec2 y) const override { return G(x, y); }
    double G(Vec2 x, Vec2 y) const override { return inv2pi * std::log(distance(x, y)) + g(x, y); }
    double g(Vec2 x, Vec2 y) const override {
        const double R = k_.R;
        const cd z = to_c(x) / R, w = to_c(y) / R;
        return -inv2pi * (std::log(R) + std::log(std::abs(1.0 - z * std::conj(w))));
    }
    Vec2 grad_G(Vec2 x, Vec2 y) const override { return k_.grad_G(x, y); }
    Vec2 grad_g(Vec2 x, Vec2 y) const override { return k_.grad_g(x, y); }
    double robin(Vec2 x) const override {
        check_interior(x, "robin");
        const double R = k_.R;
        return -inv2pi * std::log((R * R - norm2(x)) / R);
    }
    Vec2 grad_robin(Vec2 x) const override { return k_.grad_robin(x); }
    double phi(int, Vec2) const override { throw ArgumentError("disk has no inner boundary curves"); }
    Vec2 grad_phi(int, Vec2) const override { throw ArgumentError("disk has no inner boundary curves"); }

private:
    ClosedFormKernel k_;
};

#ifdef YUDOVICH_WITH_ANNULUS
class AnnulusGreen final : public GreenEvaluator {
public:
    AnnulusGreen(Domain d, int images) : GreenEvaluator(std::move(d)) {
        k_.kind = ClosedFormKernel::Kind::annulus;
        k_.R = domain_.R();
        k_.q = domain_.r0() / domain_.R();
        k_.images = images > 0 ? images : ClosedFormKernel::default_images(k_.q);
        compute_period_matrix(1e12);
    }
    std::string backend_name() const override { return "analytic-annulus"; }
    const ClosedFormKernel* kernel() const override { return &k_; }

    double G0(Vec2 x, Vec2 y) const override {
        // G = G₀ + p₁₁φ₁(x)φ₁(y) with p₁₁ = log q/(2π)
        return G(x, y) - inv2pi * std::log(k_.q) * phi(1, x) * phi(1, y);
    }
    double G(Vec2 x, Vec2 y) const override { return inv2pi * std::log(distance(x, y)) + g(x, y); }
    double g(Vec2 x, Vec2 y) const override {
        const cd z = to_c(x) / k_.R, w = to_c(y) / k_.R;
        return -inv2pi * (std::log(k_.R) + series(z, w));
    }
    Vec2 grad_G(Vec2 x, Vec2 y) const override { return k_.grad_G(x, y); }
    Vec2 grad_g(Vec2 x, Vec2 y) const override { return k_.grad_g(x, y); }
    double robin(Vec2 x) const override {
        check_interior(x, "robin");
        return g(x, x);
    }
    Vec2 grad_robin(Vec2 x) const override { return k_.grad_robin(x); }
    double phi(int i, Vec2 x) const override {
        if (i != 1) throw ArgumentError("annulus has one inner curve");
        return std::log(norm(x) / k_.R) / std::log(k_.q);
    }
    Vec2 grad_phi(int i, Vec2 x) const override {
        if (i != 1) throw ArgumentError("annulus has one inner curve");
        return (1.0 / (norm2(x) * std::log(k_.q))) * x;
    }

private:
    double series(cd z, cd w) const {
        const double q = k_.q;
        const cd zwb = z * std::conj(w);
        double s = 0.0, q2k = 1.0;
        for (int k = 0; k < k_.images; ++k) {
            const double q2k2 = q2k * q * q;
            s += std::log(std::abs(1.0 - q2k * zwb)) + std::log(std::abs(1.0 - q2k2 / zwb)) -
                 std::log(std::abs(1.0 - q2k2 * z / w)) - std::log(std::abs(1.0 - q2k2 * w / z));
            q2k = q2k2;
        }
        return s;
    }
    ClosedFormKernel k_;
};
#endif

class MfsGreen final : public GreenEvaluator {
public:
    MfsGreen(Domain d, const GreenOptions& o) : GreenEvaluator(std::move(d)) {
        for (int c = 0; c <= domain_.holes(); ++c) {
            const auto& curve = domain_.curve(c);
            const double dil = c == 0 ? o.mfs_outer_dilation : o.mfs_inner_dilation;
            const Vec2 cen = curve.centroid();
            for (std::size_t k = 0; k < curve.size(); ++k) {
                colloc_.push_back(curve.points()[k]);
                owner_.push_back(c);
                if (k % static_cast<std::size_t>(o.mfs_charge_stride) == 0)
                    charges_.push_back(cen + dil * (curve.points()[k] - cen));
            }
        }
        const Eigen::Index m = static_cast<Eigen::Index>(colloc_.size());
        const Eigen::Index n = static_cast<Eigen::Index>(charges_.size()) + 1;
        A_.resize(m, n);
        for (Eigen::Index i = 0; i < m; ++i) {
            for (Eigen::Index j = 0; j + 1 < n; ++j)
                A_(i, j) = inv2pi * std::log(distance(colloc_[static_cast<std::size_t>(i)], charges_[static_cast<std::size_t>(j)]));
            A_(i, n - 1) = 1.0;
        }
        Eigen::BDCSVD<Eigen::MatrixXd> svd(A_, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const auto& sv = svd.singularValues();
        const double cut = o.svd_cutoff * sv(0);
        Eigen::VectorXd inv = Eigen::VectorXd::Zero(sv.size());
        for (Eigen::Index k = 0; k < sv.size(); ++k)
            if (sv(k) > cut) inv(k) = 1.0 / sv(k);
        pinv_ = svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();

        // harmonic measures
        for (int c = 1; c <= domain_.holes(); ++c) {
            Eigen::VectorXd e = Eigen::VectorXd::Zero(m);
            for (Eigen::Index i = 0; i < m; ++i)
                if (owner_[static_cast<std::size_t>(i)] == c) e(i) = 1.0;
            phi_coef_.push_back(pinv_ * e);
            residual_ = std::max(residual_, (A_ * phi_coef_.back() - e).cwiseAbs().maxCoeff());
        }
        // boundary residual of the Dirichlet correction at a few deep interior sources
        for (const Vec2& y : probe_points()) {
            const Eigen::VectorXd b = rhs(y);
            residual_ = std::max(residual_, (A_ * (pinv_ * b) - b).cwiseAbs().maxCoeff());
        }
        if (residual_ > o.residual_tolerance) {
            std::ostringstream msg;
            msg << "MFS boundary residual " << residual_ << " exceeds tolerance " << o.residual_tolerance
                << " (" << colloc_.size() << " collocation points, " << charges_.size() << " charges)";
            throw ConstructionError(msg.str());
        }
        compute_period_matrix(o.condition_limit);
    }

    std::string backend_name() const override { return "mfs"; }

    double G0(Vec2 x, Vec2 y) const override { return inv2pi * std::log(distance(x, y)) + h(x, y); }
    double g(Vec2 x, Vec2 y) const override { return h(x, y) + hydro_correction(x, y); }
    Vec2 grad_g(Vec2 x, Vec2 y) const override {
        const Eigen::VectorXd c = pinv_ * rhs(y);
        Vec2 out = grad_basis_dot(x, c);
        const auto& P = period_.P;
        for (int i = 1; i <= d(); ++i)
            for (int j = 1; j <= d(); ++j) out += (P(i - 1, j - 1) * phi(j, y)) * grad_phi(i, x);
        return out;
    }
    double robin(Vec2 x) const override {
        check_interior(x, "robin");
        return g(x, x);
    }
    Vec2 grad_robin(Vec2 x) const override {
        check_interior(x, "robin gradient");
        // ∇r = ∇ₓh(x, y) + ∇_y h(x, y) at y = x, plus the harmonic-measure part
        const Eigen::VectorXd c = pinv_ * rhs(x);
        Vec2 out = grad_basis_dot(x, c);
        Eigen::VectorXd bx(colloc_.size()), by(colloc_.size());
        for (std::size_t i = 0; i < colloc_.size(); ++i) {
            const Vec2 dxy = x - colloc_[i];
            const double r2 = norm2(dxy);
            // b_i(y) = −(1/2π) log‖X_i − y‖ ⇒ ∇_y b_i = −(1/2π)(y − X_i)/‖y − X_i‖²
            bx(static_cast<Eigen::Index>(i)) = -inv2pi * dxy.x / r2;
            by(static_cast<Eigen::Index>(i)) = -inv2pi * dxy.y / r2;
        }
        const Eigen::VectorXd B = basis(x);
        out += Vec2{B.dot(pinv_ * bx), B.dot(pinv_ * by)};
        const auto& P = period_.P;
        for (int i = 1; i <= d(); ++i)
            for (int j = 1; j <= d(); ++j) out += (2.0 * P(i - 1, j - 1) * phi(j, x)) * grad_phi(i, x);
        return out;
    }
    double phi(int i, Vec2 x) const override {
        check_index(i);
        return basis(x).dot(phi_coef_[static_cast<std::size_t>(i - 1)]);
    }
    Vec2 grad_phi(int i, Vec2 x) const override {
        check_index(i);
        return grad_basis_dot(x, phi_coef_[static_cast<std::size_t>(i - 1)]);
    }

private:
    void check_index(int i) const {
        if (i < 1 || i > d()) throw ArgumentError("harmonic measure index out of range");
    }
    Eigen::VectorXd basis(Vec2 x) const {
        Eigen::VectorXd B(static_cast<Eigen::Index>(charges_.size()) + 1);
        for (std::size_t j = 0; j < charges_.size(); ++j)
            B(static_cast<Eigen::Index>(j)) = inv2pi * std::log(distance(x, charges_[j]));
        B(B.size() - 1) = 1.0;
        return B;
    }
    Vec2 grad_basis_dot(Vec2 x, const Eigen::VectorXd& c) const {
        Vec2 out{};
        for (std::size_t j = 0; j < charges_.size(); ++j) {
            const Vec2 r = x - charges_[j];
            out += (inv2pi * c(static_cast<Eigen::Index>(j)) / norm2(r)) * r;
        }
        return out;
    }
    Eigen::VectorXd rhs(Vec2 y) const {
        Eigen::VectorXd b(static_cast<Eigen::Index>(colloc_.size()));
        for (std::size_t i = 0; i < colloc_.size(); ++i)
            b(static_cast<Eigen::Index>(i)) = -inv2pi * std::log(distance(colloc_[i], y));
        return b;
    }
    double h(Vec2 x, Vec2 y) const { return basis(x).dot(pinv_ * rhs(y)); }
    double hydro_correction(Vec2 x, Vec2 y) const {
        double s = 0.0;
        for (int i = 1; i <= d(); ++i)
            for (int j = 1; j <= d(); ++j) s += period_.P(i - 1, j - 1) * phi(i, x) * phi(j, y);
        return s;
    }
    std::vector<Vec2> probe_points() const {
        const auto [lo, hi] = domain_.bounds();
        std::vector<std::pair<double, Vec2>> cand;
        for (int i = 1; i < 16; ++i)
            for (int j = 1; j < 16; ++j) {
                const Vec2 p{lo.x + (hi.x - lo.x) * i / 16.0, lo.y + (hi.y - lo.y) * j / 16.0};
                if (domain_.contains(p)) cand.push_back({domain_.distance_to_boundary(p), p});
            }
        std::sort(cand.begin(), cand.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
        std::vector<Vec2> out;
        for (std::size_t k = 0; k < cand.size() && out.size() < 6; k += std::max<std::size_t>(1, cand.size() / 12))
            out.push_back(cand[k].second);
        return out;
    }

    std::vector<Vec2> colloc_, charges_;
    std::vector<int> owner_;
    Eigen::MatrixXd A_, pinv_;
    std::vector<Eigen::VectorXd> phi_coef_;
};

}  // namespace

double GreenEvaluator::G(Vec2 x, Vec2 y) const {
    double s = G0(x, y);
    for (int i = 1; i <= d(); ++i)
        for (int j = 1; j <= d(); ++j) s += period_.P(i - 1, j - 1) * phi(i, x) * phi(j, y);
    return s;
}

double GreenEvaluator::g(Vec2 x, Vec2 y) const { return G(x, y) - inv2pi * std::log(distance(x, y)); }

Vec2 GreenEvaluator::grad_G(Vec2 x, Vec2 y) const {
    const Vec2 r = x - y;
    return grad_g(x, y) + (inv2pi / norm2(r)) * r;
}

Vec2 GreenEvaluator::grad_g(Vec2, Vec2) const { throw ArgumentError("grad_g not provided by backend"); }
double GreenEvaluator::robin(Vec2) const { throw ArgumentError("robin not provided by backend"); }
Vec2 GreenEvaluator::grad_robin(Vec2) const { throw ArgumentError("grad_robin not provided by backend"); }

void GreenEvaluator::check_interior(Vec2 x, const char* what) const {
    if (!domain_.contains(x)) {
        std::ostringstream msg;
        msg << what << ": point (" << x.x << ", " << x.y << ") is not inside the domain";
        throw DomainError(msg.str());
    }
}

void GreenEvaluator::compute_period_matrix(double condition_limit) {
    const int n = d();
    period_.M = Eigen::MatrixXd::Zero(n, n);
    period_.P = Eigen::MatrixXd::Zero(n, n);
    if (n == 0) return;
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j)
            period_.M(i - 1, j - 1) = domain_.circulation([&](Vec2 x) { return perp(grad_phi(j, x)); }, i);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(period_.M);
    const auto& sv = svd.singularValues();
    period_.condition = sv(sv.size() - 1) > 0 ? sv(0) / sv(sv.size() - 1) : INFINITY;
    if (!(period_.condition < condition_limit)) {
        std::ostringstream msg;
        msg << "period matrix condition number " << period_.condition << " exceeds " << condition_limit;
        throw ConditionError(msg.str());
    }
    period_.P = period_.M.inverse();
}

Vec2 GreenEvaluator::harmonic_field(int k, Vec2 x) const {
    if (k < 1 || k > d()) throw ArgumentError("harmonic_field: index out of range");
    Vec2 out{};
    for (int j = 1; j <= d(); ++j) out += period_.P(j - 1, k - 1) * perp(grad_phi(j, x));
    return out;
}

std::vector<VectorField> GreenEvaluator::harmonic_basis() const {
    std::vector<VectorField> out;
    for (int k = 1; k <= d(); ++k) out.push_back([this, k](Vec2 x) { return harmonic_field(k, x); });
    return out;
}

double GreenEvaluator::psi0(const std::vector<double>& circ, Vec2 x) const {
    if (static_cast<int>(circ.size()) != d()) throw ArgumentError("psi0: expected one circulation per inner curve");
    double s = 0.0;
    for (int i = 1; i <= d(); ++i)
        for (int j = 1; j <= d(); ++j) s += circ[static_cast<std::size_t>(i - 1)] * period_.P(i - 1, j - 1) * phi(j, x);
    return s;
}

Vec2 GreenEvaluator::X0(const std::vector<double>& circ, Vec2 x) const {
    if (static_cast<int>(circ.size()) != d()) throw ArgumentError("X0: expected one circulation per inner curve");
    Vec2 out{};
    for (int i = 1; i <= d(); ++i) {
        if (circ[static_cast<std::size_t>(i - 1)] == 0.0) continue;
        out += circ[static_cast<std::size_t>(i - 1)] * harmonic_field(i, x);
    }
    return out;
}

bool annulus_backend_available() {
#ifdef YUDOVICH_WITH_ANNULUS
    return true;
#else
    return false;
#endif
}

std::shared_ptr<const GreenEvaluator> build_green(const Domain& domain, const GreenOptions& opts) {
    using B = GreenOptions::Backend;
    const bool closed = domain.kind() != Domain::Kind::general;
    if (opts.backend == B::analytic && !closed) throw ArgumentError("analytic backend requires a disk or annulus");
    if (opts.backend == B::mfs || !closed) return std::make_shared<MfsGreen>(domain, opts);
    if (domain.kind() == Domain::Kind::disk) return std::make_shared<DiskGreen>(domain);
#ifdef YUDOVICH_WITH_ANNULUS
    return std::make_shared<AnnulusGreen>(domain, opts.annulus_images);
#else
    throw ArgumentError("annulus backend not available in this build");
#endif
}

double circulation(const VectorField& f, int curve_index, const GreenEvaluator& ev) {
    if (curve_index < 0 || curve_index > ev.d()) throw ArgumentError("circulation: curve index out of range");
    return ev.domain().circulation(f, curve_index);
}

HarmonicProjection project_harmonic(const VectorField& f, const GreenEvaluator& ev,
                                    const std::function<double(Vec2)>& curl, int resolution) {
    const double hs = 1e-4 * ev.domain().diameter();
    auto fd_curl = [&](Vec2 x) {
        auto dx = [&](Vec2 e) {
            return (8.0 * (f(x + hs * e) - f(x - hs * e)) - (f(x + 2 * hs * e) - f(x - 2 * hs * e))) *
                   (1.0 / (12.0 * hs));
        };
        return dx({1, 0}).y - dx({0, 1}).x;
    };
    HarmonicProjection out;
    for (int i = 1; i <= ev.d(); ++i) {
        const double area = ev.domain().area_integral(
            [&](Vec2 x) {
                const double c = curl ? curl(x) : fd_curl(x);
                return c == 0.0 ? 0.0 : ev.phi(i, x) * c;
            },
            resolution);
        out.alpha.push_back(area + ev.domain().circulation(f, i));
    }
    return out;
}

}  // namespace yudovich
