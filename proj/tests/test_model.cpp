#include <catch_amalgamated.hpp>

#include <limits>
#include <sstream>

#include "orbitq/model.hpp"
#include "support.hpp"

using namespace orbitq;
using namespace orbitq::testing;
using Catch::Approx;

TEST_CASE("validate rejects non-positive and non-finite rates") {
    const SystemParams good = kSymmetric;
    REQUIRE_NOTHROW(validate(good));
    for (int field = 0; field < 5; ++field) {
        for (double bad : {0.0, -1.0, std::numeric_limits<double>::infinity(), std::numeric_limits<double>::quiet_NaN()}) {
            SystemParams p = good;
            double* f[] = {&p.lambda1, &p.lambda2, &p.mu, &p.mu1, &p.mu2};
            *f[field] = bad;
            CHECK_THROWS_AS(validate(p), InvalidParams);
        }
    }
}

TEST_CASE("derive on the symmetric set") {
    const DerivedParams d = derive(kSymmetric);
    CHECK(d.lambda == 2.0);
    CHECK(d.alpha == 6.0);
    CHECK(d.hat_lambda1 == 6.0);
    CHECK(d.hat_lambda2 == 6.0);
    CHECK(d.hat_mu1 == 8.0);
    CHECK(d.hat_mu2 == 8.0);
    CHECK(d.hat_lambda == 12.0);
    CHECK(d.contour_radius == Approx(1.1547005383792515).epsilon(1e-15));
}

TEST_CASE("derive on the low-lambda1 set") {
    const DerivedParams d = derive(kFig3);
    CHECK(d.lambda == Approx(1.1).epsilon(1e-15));
    CHECK(d.alpha == Approx(5.1).epsilon(1e-15));
}

TEST_CASE("alpha identity on random sets") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 200; ++i) {
        const SystemParams p = random_stable(rng);
        const DerivedParams d = derive(p);
        CHECK(d.alpha - d.lambda - p.mu1 - p.mu2 == Approx(0.0).margin(1e-14 * d.alpha));
    }
}

TEST_CASE("stability verdicts") {
    const StabilityReport s = check_stability(kFig5);
    CHECK(s.rho1 == Approx(0.96).epsilon(1e-14));
    CHECK(s.rho2 == Approx(0.9428571428571428).epsilon(1e-14));
    CHECK(s.verdict == Verdict::Stable);

    const StabilityReport u = check_stability({1.0, 1.4, 4.0, 2.0, 2.0});
    CHECK(u.rho2 == Approx(1.02).epsilon(1e-14));
    CHECK(u.verdict == Verdict::Unstable);

    const StabilityReport b = check_stability({1.0, 1.0, 3.0, 2.0, 2.0});
    CHECK(b.rho1 == Approx(1.0).epsilon(1e-14));
    CHECK(b.rho2 == Approx(1.0).epsilon(1e-14));
    CHECK(b.verdict == Verdict::Boundary);

    // One index on the boundary, the other beyond it.
    CHECK(check_stability({1.0, 2.0, 3.0, 2.0, 1.0}).verdict == Verdict::Unstable);
}

TEST_CASE("stability report is exchanged under the index swap") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.1, 3.0);
    for (int i = 0; i < 300; ++i) {
        const SystemParams p{u(rng), u(rng), u(rng), u(rng), u(rng)};
        const StabilityReport a = check_stability(p);
        const StabilityReport b = check_stability(swapped(p));
        CHECK(a.rho1 == Approx(b.rho2).epsilon(1e-15));
        CHECK(a.rho2 == Approx(b.rho1).epsilon(1e-15));
        CHECK(a.verdict == b.verdict);
    }
}

TEST_CASE("rho is monotone in the rates") {
    const SystemParams base{0.5, 0.7, 4.0, 2.0, 1.5};
    for (double step : {0.01, 0.1, 0.5}) {
        SystemParams up1 = base, up2 = base, upmu = base;
        up1.lambda1 += step;
        up2.lambda2 += step;
        upmu.mu += step;
        const StabilityReport r = check_stability(base);
        CHECK(check_stability(up1).rho1 > r.rho1);
        CHECK(check_stability(up1).rho2 > r.rho2);
        CHECK(check_stability(up2).rho1 > r.rho1);
        CHECK(check_stability(up2).rho2 > r.rho2);
        CHECK(check_stability(upmu).rho1 < r.rho1);
        CHECK(check_stability(upmu).rho2 < r.rho2);
    }
}

TEST_CASE("normalize_orientation") {
    const OrientedParams sym = normalize_orientation(kSymmetric);
    CHECK_FALSE(sym.swapped);
    CHECK(sym.params == kSymmetric);

    const SystemParams p{1.4, 0.2, 4.0, 1.8, 3.0};
    const OrientedParams o = normalize_orientation(p);
    CHECK(o.swapped);
    CHECK(o.params == swapped(p));
    CHECK(o.params.alpha() * o.params.lambda1 == Approx(1.28).epsilon(1e-14));
    CHECK(o.params.mu * o.params.mu1 == 12.0);

    CHECK_THROWS_AS(normalize_orientation({1.0, 1.4, 4.0, 2.0, 2.0}), NotStable);
    CHECK_THROWS_AS(normalize_orientation({1.0, 1.0, 3.0, 2.0, 2.0}), NotStable);
}

TEST_CASE("every stable set orients to alpha*lambda1 < mu*mu1") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 500; ++i) {
        const SystemParams p = random_stable(rng, 0.999);
        for (const OrientedParams& o : {normalize_orientation(p), canonical_orientation(p)}) {
            CHECK(o.params.alpha() * o.params.lambda1 < o.params.mu * o.params.mu1);
            CHECK(derive(o.params).contour_radius > 1.0);
        }
    }
}

TEST_CASE("canonical orientation is invariant under relabeling") {
    std::mt19937_64 rng(6);
    for (int i = 0; i < 300; ++i) {
        const SystemParams p = random_stable(rng);
        const OrientedParams a = canonical_orientation(p);
        const OrientedParams b = canonical_orientation(swapped(p));
        CHECK(a.params == b.params);
        CHECK(a.swapped != b.swapped);
    }
    CHECK_FALSE(canonical_orientation(kSymmetric).swapped);
}

TEST_CASE("config parsing") {
    std::istringstream ok("# fig 5\nlambda1 = 1.2\nlambda2=1.2\n\n mu = 4 \nmu1 = 2\nmu2 = 2.1\n");
    const SystemParams p = parse_config(ok);
    CHECK(p == kFig5);

    std::istringstream missing("lambda1 = 1\nlambda2 = 1\nmu = 4\nmu1 = 2\n");
    CHECK_THROWS_AS(parse_config(missing), InvalidParams);
    std::istringstream unknown("lambda3 = 1\n");
    CHECK_THROWS_AS(parse_config(unknown), InvalidParams);
    std::istringstream malformed("lambda1 = 1x\nlambda2 = 1\nmu = 4\nmu1 = 2\nmu2 = 2\n");
    CHECK_THROWS_AS(parse_config(malformed), InvalidParams);
    std::istringstream negative("lambda1 = -1\nlambda2 = 1\nmu = 4\nmu1 = 2\nmu2 = 2\n");
    CHECK_THROWS_AS(parse_config(negative), InvalidParams);
    CHECK_THROWS_AS(load_config("/nonexistent/orbitq.conf"), InvalidParams);
}
