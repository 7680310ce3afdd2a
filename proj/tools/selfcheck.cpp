#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "runner.hpp"
#include "yudovich/germ.hpp"
#include "yudovich/green.hpp"
#include "yudovich/modulus.hpp"

namespace yudovich::cli {

namespace {

using std::numbers::pi;

std::string fmt(const char* f, double v) {
    char buf[96];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

CheckLine verdict(std::string name, bool ok, std::string detail) {
    return {std::move(name), ok ? CheckLine::State::pass : CheckLine::State::fail, std::move(detail)};
}

std::vector<std::pair<Vec2, Vec2>> pairs_in(const Domain& d, int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const auto [lo, hi] = d.bounds();
    std::uniform_real_distribution<double> ux(lo.x, hi.x), uy(lo.y, hi.y);
    auto draw = [&] {
        for (;;) {
            const Vec2 p{ux(rng), uy(rng)};
            if (d.contains(p) && d.distance_to_boundary(p) > 0.02 * d.diameter()) return p;
        }
    };
    std::vector<std::pair<Vec2, Vec2>> out;
    for (int i = 0; i < n; ++i) {
        const Vec2 a = draw();
        out.emplace_back(a, draw());
    }
    return out;
}

double symmetry_defect(const GreenEvaluator& ev, const std::vector<std::pair<Vec2, Vec2>>& ps) {
    double worst = 0.0;
    for (auto [x, y] : ps) worst = std::max(worst, std::abs(ev.G(x, y) - ev.G(y, x)));
    return worst;
}

}  // namespace

std::vector<CheckLine> self_check(const SelfCheckOptions& opts) {
    std::vector<CheckLine> out;
    auto guarded = [&](const std::string& name, auto&& body) {
        try {
            out.push_back(body());
        } catch (const std::exception& e) {
            out.push_back({name, CheckLine::State::fail, std::string("threw: ") + e.what()});
        }
    };

    // Green function: disk
    const Domain disk = Domain::disk();
    const auto pd = pairs_in(disk, 100, 1);
    guarded("green.disk.symmetry", [&] {
        const double s = symmetry_defect(*build_green(disk), pd);
        return verdict("green.disk.symmetry", s < 1e-8, fmt("max |G(x,y)-G(y,x)| = %.3e", s));
    });
    guarded("green.disk.mfs_agreement", [&] {
        GreenOptions o;
        o.backend = GreenOptions::Backend::mfs;
        const auto mfs = build_green(disk, o);
        const auto an = build_green(disk);
        double worst = 0.0;
        for (auto [x, y] : pd) worst = std::max(worst, std::abs(mfs->G(x, y) - an->G(x, y)));
        return verdict("green.disk.mfs_agreement", worst < 1e-6, fmt("max |G_mfs - G| = %.3e", worst));
    });

    // Green function: annulus r0 = 1/e
    const bool annulus = annulus_backend_available() && !opts.disk_only;
    const char* annulus_checks[] = {"green.annulus.symmetry", "green.annulus.period_matrix", "green.annulus.harmonic_basis"};
    if (!annulus) {
        for (const char* n : annulus_checks) out.push_back({n, CheckLine::State::skip, "annulus backend not available"});
    } else {
        const Domain ann = Domain::annulus(std::exp(-1.0), 1.0);
        GreenOptions o;
        o.backend = GreenOptions::Backend::analytic;
        o.annulus_images = opts.annulus_images;
        std::shared_ptr<const GreenEvaluator> ev;
        try {
            ev = build_green(ann, o);
        } catch (const std::exception& e) {
            for (const char* n : annulus_checks) out.push_back({n, CheckLine::State::fail, std::string("construction: ") + e.what()});
        }
        if (ev) {
            const auto pa = pairs_in(ann, 100, 2);
            guarded(annulus_checks[0], [&] {
                const double s = symmetry_defect(*ev, pa);
                return verdict(annulus_checks[0], s < 1e-8, fmt("max |G(x,y)-G(y,x)| = %.3e", s));
            });
            guarded(annulus_checks[1], [&] {
                // m₁₁ from the harmonic measure, and again from the Green function: G(·, y) equals p₁₁φ₁(y)
                // on the inner circle, so 1/p₁₁ read off the boundary values must agree.
                const double m11 = ev->period_matrix().M(0, 0);
                double worst = std::abs(m11 + 2 * pi);
                for (int j = 0; j < 4; ++j) {
                    const Vec2 y = pa[j].second;
                    const double phi = ev->phi(1, y);
                    for (int k = 0; k < 16; ++k) {
                        const double t = 2 * pi * k / 16 + 0.1;
                        const Vec2 x = (std::exp(-1.0) * (1 + 1e-12)) * Vec2{std::cos(t), std::sin(t)};
                        const double recon = phi / ev->G(x, y);
                        worst = std::max(worst, std::abs(recon - m11));
                    }
                }
                return verdict(annulus_checks[1], worst < 1e-6,
                               fmt("m11 = %.12f", m11) + fmt(", max deviation (closed form and boundary values) %.3e", worst));
            });
            guarded(annulus_checks[2], [&] {
                const double c = circulation([&](Vec2 x) { return ev->harmonic_field(1, x); }, 1, *ev);
                return verdict(annulus_checks[2], std::abs(c - 1.0) < 1e-6, fmt("Gamma_1(X_1) - 1 = %.3e", c - 1.0));
            });
        }
    }

    guarded("modulus.upsilon_bound", [&] {
        double worst = 0.0;
        for (int s = 1; s <= 6; ++s)
            for (int m = 0; m <= 12; ++m) {
                const UpsilonSum u = upsilon_sum(s, m);
                worst = std::max(worst, u.value / u.bound);
            }
        return verdict("modulus.upsilon_bound", worst <= 1.0, fmt("max sum/bound over s<=6, m<=12 = %.4f", worst));
    });
    guarded("germ.iterated_log_identity", [&] {
        double worst = 0.0;
        for (int m = 0; m <= 3; ++m) {
            const double lp1 = m == 0 ? 0.0 : iterated_exp(m - 1, 1.0);
            const double lp2 = m == 0 ? std::log(4.0) : iterated_exp(m - 1, 4.0);
            worst = std::max(worst, iterated_log_identity_check_log(m, lp1, lp2).difference);
        }
        return verdict("germ.iterated_log_identity", worst < 1e-8, fmt("max |quadrature - closed form| = %.3e", worst));
    });
    guarded("modulus.osgood_closed_form", [&] {
        const Modulus hl = Modulus::h_log(0.5, std::exp(-1.0));
        const GammaFamily fam(hl, 1.0, 2.0);
        double worst = 0.0;
        for (double h : {1e-30, 1e-12, 1e-6, fam.a_tilde()})
            for (double t : {0.25, 0.5, 1.0, 2.0}) {
                const double cf = std::pow(h, std::exp(-t));
                worst = std::max(worst, std::abs(fam(t, h) - cf) / cf);
            }
        return verdict("modulus.osgood_closed_form", worst < 1e-8, fmt("max relative error vs h^exp(-kt) = %.3e", worst));
    });
    return out;
}

}  // namespace yudovich::cli
