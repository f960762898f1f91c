#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "s2r/legendre.hpp"
#include "s2r/quadrature.hpp"

using namespace s2r;

TEST_CASE("psi matches the closed forms of the first orders") {
    // psi_0 = 1/sqrt(2)
    CHECK(legendre_psi(0, 0.5) == doctest::Approx(0.7071067811865476).epsilon(1e-14));
    CHECK(legendre_psi(0, -0.9) == doctest::Approx(0.7071067811865476).epsilon(1e-14));
    // psi_1(t) = sqrt(3/2) t
    CHECK(legendre_psi(1, 0.0) == doctest::Approx(0.0));
    CHECK(legendre_psi(1, 0.7) == doctest::Approx(std::sqrt(1.5) * 0.7).epsilon(1e-14));
    // psi_2(t) = sqrt(5/2) (3t^2 - 1)/2
    CHECK(legendre_psi(2, 0.0) == doctest::Approx(-0.7905694150420949).epsilon(1e-14));
    CHECK(legendre_psi(2, 1.0) == doctest::Approx(std::sqrt(2.5)).epsilon(1e-14));
    // psi_3(t) = sqrt(7/2) (5t^3 - 3t)/2
    CHECK(legendre_psi(3, 0.4) ==
          doctest::Approx(std::sqrt(3.5) * (5 * 0.064 - 3 * 0.4) / 2.0).epsilon(1e-13));
}

TEST_CASE("psi input validation") {
    CHECK_THROWS_AS(legendre_psi(-1, 0.0), InputError);
    CHECK_THROWS_AS(legendre_psi(13, 0.0), InputError);
    CHECK_NOTHROW(legendre_psi(12, 0.3));
}

TEST_CASE("psi orthonormality on [-1,1]") {
    QuadOptions opts;
    opts.tol = 1e-12;
    opts.nodes_per_panel = 12;
    opts.initial_panels = 8;
    for (int m = 0; m <= 8; ++m) {
        for (int n = m; n <= 8; ++n) {
            auto res = integrate_1d(-1.0, 1.0,
                                    [&](double t) {
                                        return legendre_psi(m, t) * legendre_psi(n, t);
                                    },
                                    opts);
            double target = m == n ? 1.0 : 0.0;
            CHECK(std::fabs(res.value - target) < 1e-10);
        }
    }
}

TEST_CASE("gamma values") {
    KernelSpec k15(1.5, 1);
    CHECK(k15.order() == 1);
    // psi_1(0) = 0, so the order-1 gamma is the box 1/2 on [-1,1].
    CHECK(k15.gamma(0.3) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(k15.gamma(-0.999) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(k15.gamma(1.5) == 0.0);
    CHECK(k15.gamma(-1.0001) == 0.0);

    KernelSpec k25(2.5, 1);
    CHECK(k25.order() == 2);
    CHECK(k25.gamma(0.0) == doctest::Approx(1.125).epsilon(1e-14));  // 1/2 + 5/8
    CHECK(k25.gamma(2.0) == 0.0);

    KernelSpec k35(3.5, 1);
    CHECK(k35.gamma(1.5) == 0.0);
}

TEST_CASE("higher-order kernels go negative") {
    KernelSpec k25(2.5, 1);
    // gamma(1) = 1/2 + psi_2(0) psi_2(1) = 1/2 - 5/4
    CHECK(k25.gamma(1.0) == doctest::Approx(-0.75).epsilon(1e-13));
    bool negative_somewhere = false;
    for (int i = 0; i <= 200; ++i) {
        if (k25.gamma(-1.0 + i / 100.0) < 0.0) negative_somewhere = true;
    }
    CHECK(negative_somewhere);
}

TEST_CASE("product kernel") {
    KernelSpec k(1.5, 2);
    double x0[2] = {0.0, 0.0};
    CHECK(k.eval(std::span<const double>(x0, 2)) == doctest::Approx(0.25).epsilon(1e-14));
    double x1[2] = {0.0, 1.2};
    CHECK(k.eval(std::span<const double>(x1, 2)) == 0.0);

    KernelSpec k1(2.5, 1);
    double t = 0.37;
    CHECK(k1.eval(std::span<const double>(&t, 1)) ==
          doctest::Approx(k1.gamma(t)).epsilon(1e-14));
}

TEST_CASE("certify_k1 on the acceptance grid") {
    for (double alpha : {1.5, 2.5, 3.5}) {
        for (int d : {1, 2}) {
            KernelSpec spec(alpha, d);
            auto cert = certify_k1(spec, 1e-8);
            INFO("alpha=", alpha, " d=", d, " failure=", cert.failure);
            CHECK(cert.ok);
            CHECK(std::fabs(cert.integral - 1.0) < 1e-8);
            for (const auto& m : cert.moments) CHECK(std::fabs(m.value) < 1e-8);
            CHECK(std::isfinite(cert.alpha_moment));
            CHECK(cert.sup_norm > 0.0);
            CHECK(cert.sup_norm < 1e6);
            CHECK(cert.l2_norm > 0.0);
        }
    }
}

TEST_CASE("certify_k1 tight 1-d checks") {
    KernelSpec k15(1.5, 1);
    auto c15 = certify_k1(k15, 1e-8);
    CHECK(std::fabs(c15.integral - 1.0) < 1e-12);

    KernelSpec k25(2.5, 1);
    auto c25 = certify_k1(k25, 1e-8);
    bool found_first_moment = false;
    for (const auto& m : c25.moments) {
        if (m.exponents == std::vector<int>{1}) {
            found_first_moment = true;
            CHECK(std::fabs(m.value) < 1e-10);
        }
    }
    CHECK(found_first_moment);

    KernelSpec k35(3.5, 2);
    auto c35 = certify_k1(k35, 1e-8);
    bool found_mixed = false;
    for (const auto& m : c35.moments) {
        if (m.exponents == std::vector<int>{1, 1}) {
            found_mixed = true;
            CHECK(std::fabs(m.value) < 1e-10);
        }
    }
    CHECK(found_mixed);
}

TEST_CASE("quadrature sanity") {
    QuadOptions opts;
    opts.tol = 1e-10;
    auto res = integrate_1d(0.0, 1.0, [](double x) { return 3.0 * x * x; }, opts);
    CHECK(res.converged);
    CHECK(res.value == doctest::Approx(1.0).epsilon(1e-12));

    // Smooth but non-polynomial.
    auto res2 = integrate_1d(0.0, M_PI, [](double x) { return std::sin(x); }, opts);
    CHECK(res2.value == doctest::Approx(2.0).epsilon(1e-10));

    // Refinement cap reached -> flagged, and optionally throwing.
    QuadOptions hard;
    hard.tol = 1e-16;
    hard.max_points = 4096;
    hard.throw_on_nonconvergence = true;
    CHECK_THROWS_AS(
        integrate_1d(0.0, 1.0, [](double x) { return std::sqrt(std::fabs(x - 0.3377)); },
                     hard),
        NumericsError);
}
