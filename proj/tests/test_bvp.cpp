#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <omp.h>

#include "orbitq/bvp.hpp"
#include "orbitq/oracle.hpp"
#include "support.hpp"

using namespace orbitq;
using namespace orbitq::testing;
using Catch::Approx;

namespace {

BvpOptions opts(std::size_t nodes = contour::kDefaultNodes, bool fixed = false,
                contour::Exec exec = contour::Exec::Parallel) {
    BvpOptions o;
    o.node_count = nodes;
    o.fixed_nodes = fixed;
    o.exec = exec;
    return o;
}

BvpSolution solve_user(const SystemParams& p, const BvpOptions& o = opts()) {
    return BvpSolution::solve(normalize_orientation(p).params, o);
}

double q2_poly(const SystemParams& p, double x) {
    const double l = p.lambda();
    return l * p.lambda1 * (l + p.mu1) * x * x + (l + p.mu1 - p.mu) * l * p.mu1 * x - p.mu * p.mu1 * p.mu1;
}

}  // namespace

TEST_CASE("x0 is the positive zero of the quadratic and exceeds 1") {
    CHECK(compute_x0(kSymmetric) == Approx(std::numbers::sqrt2).epsilon(1e-15));
    const SystemParams f = normalize_orientation(kFig3).params;
    const double x0 = compute_x0(f);
    CHECK(x0 > 1.0);
    CHECK(std::abs(q2_poly(f, x0)) < 1e-12 * f.mu * f.mu1 * f.mu1);

    std::mt19937_64 rng(21);
    for (int i = 0; i < 500; ++i) {
        const SystemParams p = normalize_orientation(random_stable(rng, 0.999)).params;
        const double x = compute_x0(p);
        CHECK(x > 1.0);
        const double scale = p.mu * p.mu1 * p.mu1 + p.lambda() * p.lambda1 * (p.lambda() + p.mu1) * x * x;
        CHECK(std::abs(q2_poly(p, x)) < 1e-12 * scale);
    }
}

TEST_CASE("r follows its definition") {
    const DerivedParams d = derive(kSymmetric);
    CHECK(compute_r(kSymmetric, d, std::numbers::sqrt2) == 0);
    // x0 below the radius with (lambda+mu1) x0/(lambda x0+mu1) = 1.0244 <= 1.1547.
    CHECK(compute_r(kSymmetric, d, 1.05) == 1);
    CHECK(compute_r(kSymmetric, d, 1.2) == 0);
    // Second condition fails: shrink sqrt(hat_mu2/hat_lambda2) below the ratio.
    const SystemParams q{0.5, 1.2, 4.0, 2.0, 1.6};
    const DerivedParams dq = derive(q);
    REQUIRE(1.1 <= dq.contour_radius);
    const double ratio = (q.lambda() + q.mu1) * 1.1 / (q.lambda() * 1.1 + q.mu1);
    CHECK(compute_r(q, dq, 1.1) == (ratio <= std::sqrt(dq.hat_mu2 / dq.hat_lambda2) ? 1 : 0));
}

TEST_CASE("whenever r = 1 the zero x0 is a zero of A(x, h(x))") {
    std::mt19937_64 rng(22);
    for (int i = 0; i < 2000; ++i) {
        const SystemParams p = normalize_orientation(random_stable(rng, 0.999)).params;
        const DerivedParams d = derive(p);
        const double x0 = compute_x0(p);
        if (compute_r(p, d, x0) == 1) {
            const cplx a = coeff_A(x0, branch_h(x0, d), p);
            CHECK(std::abs(a) < 1e-9 * p.mu * p.mu2 * x0);
        }
    }
}

TEST_CASE("UContext rejects unstable and mis-oriented input") {
    CHECK_THROWS_AS(UContext::make({1.0, 1.4, 4.0, 2.0, 2.0}), NotStable);
    CHECK_THROWS_AS(UContext::make({1.0, 1.0, 3.0, 2.0, 2.0}), NotStable);
    CHECK_THROWS_AS(UContext::make({1.4, 0.2, 4.0, 1.8, 3.0}), InvalidParams);
    CHECK_THROWS_AS(BvpSolution::solve({1.4, 0.2, 4.0, 1.8, 3.0}), InvalidParams);
    CHECK_NOTHROW(UContext::make(kSymmetric));
}

TEST_CASE("U and J on the contour") {
    for (const SystemParams& user : {kSymmetric, kFig3, kFig5, kMixed}) {
        const UContext ctx = UContext::make(normalize_orientation(user).params);
        const double a = ctx.derived.contour_radius;
        const cplx up = U_of(a, ctx);
        const cplx um = U_of(-a, ctx);
        CHECK(std::abs(up.imag()) <= 1e-12 * std::abs(up));
        CHECK(std::abs(um.imag()) <= 1e-12 * std::abs(um));
        CHECK(up.real() * um.real() > 0.0);

        const auto z = contour::make_nodes(contour::ContourSpec::with_nodes(a, 1024));
        for (std::size_t k = 0; k < z.size(); ++k) {
            CHECK(std::abs(J_of(z[k], ctx)) == Approx(1.0).epsilon(1e-14));
            // Real coefficients: U(conj z) = conj U(z).
            const cplx u = U_of(z[k], ctx);
            CHECK(std::abs(U_of(z[z.size() - 1 - k], ctx) - std::conj(u)) < 1e-12 * std::abs(u));
        }
    }
}

TEST_CASE("index of synthetic samples") {
    const auto z = contour::make_nodes(contour::ContourSpec::with_nodes(1.0, 512));
    std::vector<cplx> v(z.size());
    for (int w : {0, 1, -1, 2}) {
        for (std::size_t k = 0; k < z.size(); ++k) v[k] = std::pow(z[k], w) * (3.0 + z[k]);
        CHECK(index_chi(v) == -2 * w);
    }
}

TEST_CASE("index is zero and stable under refinement") {
    std::mt19937_64 rng(23);
    std::vector<SystemParams> sets{kSymmetric, kFig3, kFig5, kMixed};
    for (int i = 0; i < 25; ++i) sets.push_back(random_stable(rng, 0.95));
    for (const SystemParams& p : sets) {
        const BvpSolution a = solve_user(p, opts(4096));
        const BvpSolution b = solve_user(p, opts(2 * a.contour().node_count, true));
        CHECK(a.chi() == 0);
        CHECK(b.chi() == 0);
        CHECK(std::abs(a.arg_U().back() - a.arg_U().front()) < std::numbers::pi);
        CHECK(a.max_arg_jump() <= std::numbers::pi / 2);
        for (const cplx& l : a.log_J()) CHECK(std::abs(l.real()) < 1e-12);
    }
}

TEST_CASE("boundary values H0(1,0) and H0(0,1)") {
    const BvpSolution s = solve_user(kSymmetric);
    CHECK(s.H10() == Approx(0.25).epsilon(1e-15));
    CHECK(s.H01() == Approx(0.25).epsilon(1e-15));
    CHECK(solve_H0_x0(1.0, s).real() == Approx(0.25).epsilon(1e-13));
    CHECK(std::abs(solve_H0_x0(1.0, s).imag()) < 1e-15);
    CHECK(solve_H0_0y(1.0, s).real() == Approx(0.25).epsilon(1e-10));

    const BvpSolution f = solve_user(kFig3);
    CHECK(f.H10() == Approx(1.0 - 0.275 * 1.5).epsilon(1e-14));
    CHECK(f.H01() == Approx(1.0 - 0.275 * 1.05).epsilon(1e-14));
}

TEST_CASE("H0(0,y) on the symmetric set") {
    const BvpSolution s = solve_user(kSymmetric);
    CHECK(solve_H0_0y(0.0, s).real() == Approx(0.155073006207).epsilon(1e-9));
    CHECK(solve_H0_0y(0.5, s).real() == Approx(0.182123645116).epsilon(1e-9));
    CHECK(solve_H0_0y(0.9, s).real() == Approx(0.228733936361).epsilon(1e-9));
    for (double t : {0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99}) {
        CHECK(std::abs(solve_H0_0y(t, s) - solve_H0_x0(t, s)) < 1e-10);
    }
}

TEST_CASE("H0(0,0) agrees between both boundary functions and the oracle") {
    for (const SystemParams& p : {kSymmetric, kFig3, kMixed}) {
        const BvpSolution sol = solve_user(p);
        const cplx a = solve_H0_x0(0.0, sol);
        const cplx b = solve_H0_0y(0.0, sol);
        CHECK(std::abs(a - b) < 1e-10);
        const StationarySolution ss = solve_stationary(p);
        CHECK(rel_diff(a.real(), ss.at(0, 0, 0)) < 1e-3);
        CHECK(rel_diff(a.real(), ss.at(0, 0, 0)) < 1e-7);
    }
}

TEST_CASE("domain checks") {
    const BvpSolution s = solve_user(kSymmetric);
    const double a = s.derived().contour_radius;
    CHECK_THROWS_AS(solve_H0_x0(a, s), std::domain_error);
    CHECK_THROWS_AS(solve_H0_x0(cplx(0.0, 1.5 * a), s), std::domain_error);
    CHECK_THROWS_AS(solve_H0_0y(1.01, s), std::domain_error);
    CHECK_THROWS_AS(H_full(1.01, 0.5, s), std::domain_error);
    CHECK_THROWS_AS(H_full(0.5, cplx(0.0, 1.01), s), std::domain_error);
    CHECK_NOTHROW(solve_H0_x0(0.99 * a, s));
}

TEST_CASE("D reproduces H0(1,0)") {
    std::mt19937_64 rng(24);
    std::vector<SystemParams> sets{kSymmetric, kFig3, kFig5, kMixed};
    for (int i = 0; i < 15; ++i) sets.push_back(random_stable(rng, 0.95));
    for (const SystemParams& p : sets) {
        const BvpSolution sol = solve_user(p);
        const cplx gamma1 = gamma_integral(1.0, sol);
        const cplx h = sol.D() * std::pow(cplx(1.0 - sol.x0()), -sol.r()) * std::exp(gamma1);
        CHECK(std::abs(h - sol.H10()) < 1e-10);
        // Same representation inside the disc.
        for (cplx x : {cplx(0.0), cplx(0.5, 0.2), cplx(-0.8, 0.0)}) {
            const cplx direct = sol.D() * std::pow(x - sol.x0(), -sol.r()) * std::exp(gamma_integral(x, sol));
            CHECK(std::abs(direct - solve_H0_x0(x, sol)) < 1e-10);
        }
    }
}

TEST_CASE("doubling the nodes changes H0(x,0) by less than 1e-8") {
    for (const SystemParams& p : {kSymmetric, kFig3, kFig5, kMixed}) {
        const BvpSolution a = solve_user(p, opts(4096, true));
        const BvpSolution b = solve_user(p, opts(8192, true));
        for (double x : {0.0, 0.5, 0.9}) CHECK(std::abs(solve_H0_x0(x, a) - solve_H0_x0(x, b)) < 1e-8);
    }
}

TEST_CASE("serial and parallel solutions agree") {
    for (const SystemParams& p : {kSymmetric, kFig3, kMixed}) {
        const BvpSolution s = solve_user(p, opts(4096, false, contour::Exec::Serial));
        const BvpSolution q = solve_user(p, opts(4096, false, contour::Exec::Parallel));
        REQUIRE(s.contour().node_count == q.contour().node_count);
        for (cplx x : {cplx(0.0), cplx(0.7, -0.3)}) {
            CHECK(std::abs(solve_H0_x0(x, s) - solve_H0_x0(x, q)) < 1e-13);
        }
        CHECK(std::abs(solve_H0_0y(0.4, s) - solve_H0_0y(0.4, q)) < 1e-13);
        CHECK(derivative_H10(s) == Approx(derivative_H10(q)).epsilon(1e-12));
        CHECK(derivative_H01(s) == Approx(derivative_H01(q)).epsilon(1e-12));
    }
}

TEST_CASE("parallel results do not depend on the thread count") {
    const int saved = omp_get_max_threads();
    std::vector<double> ref;
    for (int threads : {1, 2, 4}) {
        omp_set_num_threads(threads);
        const BvpSolution sol = solve_user(kMixed);
        const std::vector<double> v{solve_H0_x0(0.3, sol).real(), solve_H0_0y(0.6, sol).real(),
                                    derivative_H10(sol), derivative_H01(sol),
                                    H_full(cplx(0.2, 0.1), cplx(0.5, -0.2), sol).h0.real()};
        if (ref.empty()) {
            ref = v;
        } else {
            CHECK(v == ref);
        }
    }
    omp_set_num_threads(saved);
}

TEST_CASE("V at 1 is finite and equals H0(0,1)") {
    for (const SystemParams& p : {kSymmetric, kFig3, kFig5, kMixed}) {
        const BvpSolution sol = solve_user(p);
        const RatioLimits lim = ratio_AB_limits_at_1(sol.params(), sol.derived());
        CHECK(-lim.value * sol.H10() == Approx(sol.H01()).epsilon(1e-10));
        // Directly on the unit circle next to 1 and at 1.
        for (double theta : {0.0, 1e-7, 1e-4, 1e-2}) {
            const cplx y = std::polar(1.0, theta);
            const cplx v = solve_H0_0y(y, sol);
            CHECK(std::isfinite(v.real()));
            CHECK(std::abs(v - sol.H01()) < 2.0 * theta * std::abs(derivative_H01(sol)) + 1e-9);
        }
        // The Cauchy values just inside join the boundary values.
        CHECK(std::abs(solve_H0_0y(0.999, sol) - solve_H0_0y(1.0, sol)) < 2e-3 * std::abs(derivative_H01(sol)) + 1e-9);
    }
}

TEST_CASE("the boundary relation holds on the annulus between 1 and the radius") {
    // A(x,h(x)) H0(x,0) + B(x,h(x)) H0(0,h(x)) = 0 whenever |h(x)| <= 1.
    for (const SystemParams& user : {kSymmetric, kFig3, kFig5, kMixed}) {
        const BvpSolution sol = solve_user(user);
        const SystemParams& p = sol.params();
        const DerivedParams& d = sol.derived();
        const double rad = 0.5 * (1.0 + d.contour_radius);
        for (int j = 0; j < 24; ++j) {
            const cplx x = std::polar(rad, 2.0 * std::numbers::pi * (j + 0.25) / 24.0);
            const cplx y = branch_h(x, d);
            REQUIRE(std::abs(y) <= 1.0);
            const cplx lhs = coeff_A(x, y, p) * solve_H0_x0(x, sol);
            const cplx rhs = coeff_B(x, y, p) * solve_H0_0y(y, sol);
            CHECK(std::abs(lhs + rhs) < 1e-9 * (std::abs(lhs) + std::abs(rhs)));
        }
    }
}

TEST_CASE("Re(i U H~) vanishes as the contour is approached") {
    BvpOptions o = opts(65536, true);
    for (const SystemParams& user : {kSymmetric, kMixed}) {
        const BvpSolution sol = solve_user(user, o);
        const UContext& ctx = sol.context();
        const double a = sol.derived().contour_radius;
        double previous = 1.0;
        for (double delta : {1e-2, 1e-3}) {
            double worst = 0.0;
            for (int j = 0; j < 32; ++j) {
                const cplx z = std::polar(a, 2.0 * std::numbers::pi * (j + 0.3) / 32.0);
                const cplx inner = z * (1.0 - delta);
                const cplx htilde = solve_H0_x0(inner, sol) * std::pow(inner - sol.x0(), sol.r());
                const cplx w = U_of(z, ctx) * htilde;
                worst = std::max(worst, std::abs((cplx(0.0, 1.0) * w).real()) / std::abs(w));
            }
            CHECK(worst < 10.0 * delta);
            CHECK(worst < previous);
            previous = worst;
        }
    }
}

TEST_CASE("H_full: totals and the busy probability") {
    for (const SystemParams& user : {kSymmetric, kFig3, kFig5}) {
        const BvpSolution sol = solve_user(user);
        const HPair h = H_full(1.0, 1.0, sol);
        CHECK((h.h0 + h.h1).real() == Approx(1.0).epsilon(1e-12));
        CHECK(h.h1.real() == Approx(user.lambda() / user.mu).epsilon(1e-12));
    }
    CHECK(H_full(1.0, 1.0, solve_user(kFig3)).h1.real() == Approx(0.275).epsilon(1e-12));
}

TEST_CASE("H_full matches its boundary functions on the axes") {
    const BvpSolution sol = solve_user(kMixed);
    for (double t : {0.0, 0.3, 0.8}) {
        CHECK(std::abs(H_full(t, 0.0, sol).h0 - solve_H0_x0(t, sol)) < 1e-10);
        CHECK(std::abs(H_full(0.0, t, sol).h0 - solve_H0_0y(t, sol)) < 1e-10);
    }
}

TEST_CASE("H_full on the kernel curve uses the removable-singularity path") {
    const BvpSolution sol = solve_user(kMixed);
    const DerivedParams& d = sol.derived();
    for (cplx y : {cplx(0.3, 0.2), cplx(-0.4, 0.3), cplx(0.0, 0.6)}) {
        const cplx x = branch_k(y, d);
        REQUIRE(std::abs(x) < 1.0);
        const HPair on = H_full(x, y, sol);
        const HPair near = H_full(x + 1e-5, y, sol);
        CHECK(std::abs(on.h0 - near.h0) < 1e-4);
        CHECK(std::abs(on.h1 - near.h1) < 1e-4);
    }
}

TEST_CASE("H is real, nondecreasing and bounded on the unit square") {
    for (const SystemParams& user : {kSymmetric, kFig3, kMixed}) {
        const BvpSolution sol = solve_user(user);
        constexpr int n = 9;
        double h0[n][n], h1[n][n];
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                const HPair h = H_full(i / double(n - 1), j / double(n - 1), sol);
                CHECK(std::abs(h.h0.imag()) < 1e-12);
                CHECK(std::abs(h.h1.imag()) < 1e-12);
                h0[i][j] = h.h0.real();
                h1[i][j] = h.h1.real();
                CHECK(h0[i][j] >= -1e-12);
                CHECK(h1[i][j] >= -1e-12);
                CHECK(h0[i][j] <= 1.0 + 1e-12);
                CHECK(h1[i][j] <= 1.0 + 1e-12);
            }
        }
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                if (i > 0) CHECK(h0[i][j] >= h0[i - 1][j] - 1e-12);
                if (j > 0) CHECK(h0[i][j] >= h0[i][j - 1] - 1e-12);
                if (i > 0) CHECK(h1[i][j] >= h1[i - 1][j] - 1e-12);
                if (j > 0) CHECK(h1[i][j] >= h1[i][j - 1] - 1e-12);
            }
        }
    }
}

TEST_CASE("symmetric set: H0(x,y) = H0(y,x)") {
    const BvpSolution sol = solve_user(kSymmetric);
    for (auto [x, y] : {std::pair{0.2, 0.7}, std::pair{0.9, 0.1}, std::pair{0.5, 0.6}}) {
        CHECK(std::abs(H_full(x, y, sol).h0 - H_full(y, x, sol).h0) < 1e-10);
        CHECK(std::abs(H_full(x, y, sol).h1 - H_full(y, x, sol).h1) < 1e-10);
    }
}

TEST_CASE("series coefficients are probabilities and match the oracle") {
    for (const SystemParams& user : {kSymmetric, kFig3, kMixed}) {
        const OrientedParams o = normalize_orientation(user);
        const BvpSolution sol = BvpSolution::solve(o.params);
        const CoefficientGrid g = extract_coefficients(sol, 6, 6);
        const StationarySolution ss = solve_stationary(o.params);
        double total = 0.0;
        for (int m = 0; m <= 6; ++m) {
            for (int n = 0; n <= 6; ++n) {
                for (int k = 0; k < 2; ++k) {
                    const double v = g.at(m, n, k);
                    CHECK(v >= -1e-12);
                    CHECK(v <= 1.0);
                    total += v;
                    if (m <= 3 && n <= 3) {
                        CHECK(std::abs(v - ss.at(m, n, k)) < 1e-3);
                        CHECK(std::abs(v - ss.at(m, n, k)) < 1e-9);
                    }
                }
            }
        }
        CHECK(total <= 1.0 + 1e-12);
    }
}
