#include "doctest.h"

#include <cmath>
#include <complex>
#include <vector>

#include "sfh/covariance.hpp"
#include "sfh/errors.hpp"
#include "sfh/sampler.hpp"

using namespace sfh;
using namespace sfh::sampler;

namespace {

ModelParams base_params() {
    ModelParams p;
    p.hurst = 0.75;
    p.alpha = 2.0;
    p.beta = 5.0;
    p.d0 = 0.0;
    p.horizon = 1.0;
    p.truncation = 3;
    return p;
}

// independent oracle for the noise double integral (see test_fbm_kernel)
double brute_pair_integral(double b, double ta, double tb, double hurst, int n) {
    const double twoH = 2.0 * hurst;
    auto F = [twoH](double w) { return std::pow(std::abs(w), twoH) / (twoH * (twoH - 1.0)); };
    const double hx = ta / n, hy = tb / n;
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        const double ex = std::exp(-b * (ta - (i + 0.5) * hx));
        const double x0 = i * hx;
        double row = 0.0;
        for (int j = 0; j < n; ++j) {
            const double y0 = j * hy;
            row += std::exp(-b * (tb - (j + 0.5) * hy)) *
                   (F(x0 + hx - y0) - F(x0 - y0) - F(x0 + hx - y0 - hy) + F(x0 - y0 - hy));
        }
        total += ex * row;
    }
    return hurst * (twoH - 1.0) * total;
}

} // namespace

TEST_CASE("power_coefficient and initial_spectrum") {
    ModelParams p = base_params();
    CHECK(power_coefficient(p, 0) == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(power_coefficient(p, 1) == doctest::Approx(4.0 / 9.0).epsilon(1e-14));

    ModelParams q = base_params();
    q.alpha = 1.0;
    q.c0_bound = 2.0;
    q.upsilon = [](int) { return 2.0; };
    CHECK(power_coefficient(q, 3) == doctest::Approx(4.0 / 7.0).epsilon(1e-14));

    CHECK(initial_spectrum(p, 2) == 0.0);
    ModelParams r = base_params();
    r.d0 = 1.0;
    r.beta = 5.0;
    CHECK(initial_spectrum(r, 0) == doctest::Approx(32.0).epsilon(1e-14));
    CHECK(initial_spectrum(r, 1) == doctest::Approx(0.1316872428).epsilon(1e-9));
}

TEST_CASE("model params validation") {
    ModelParams p = base_params();
    p.d0 = 1.0;
    p.beta = 4.0;
    CHECK_THROWS_AS(p.validate(), precondition_error);
    p.beta = 5.0;
    CHECK_NOTHROW(p.validate());
    p.hurst = 0.5;
    CHECK_THROWS_AS(p.validate(), precondition_error);
    p.hurst = 0.75;
    p.upsilon = [](int l) { return l == 2 ? 3.0 : 1.0; };
    p.c0_bound = 2.0;
    CHECK_THROWS_AS(p.validate(), precondition_error);
}

TEST_CASE("time grid validation") {
    CHECK_THROWS_AS(TimeGrid({0.5, 0.5}, 1.0), precondition_error);
    CHECK_THROWS_AS(TimeGrid({0.5, 0.2}, 1.0), precondition_error);
    CHECK_THROWS_AS(TimeGrid({0.5, 1.2}, 1.0), precondition_error);
    CHECK_NOTHROW(TimeGrid({0.0, 0.5, 1.0}, 1.0));
}

TEST_CASE("covariance matrix jitter policy and failure") {
    Eigen::MatrixXd good(2, 2);
    good << 1.0, 0.5, 0.5, 1.0;
    CovarianceMatrix ok(good);
    CHECK(ok.jitter_used() == 0.0);

    Eigen::MatrixXd bad(2, 2);
    bad << 1.0, 2.0, 2.0, 1.0; // eigenvalues 3 and -1
    CovarianceMatrix indef(bad);
    try {
        indef.factor();
        FAIL("expected factorization_error");
    } catch (const factorization_error& e) {
        CHECK(e.min_eigenvalue == doctest::Approx(-1.0).epsilon(1e-10));
    }

    Eigen::MatrixXd asym(2, 2);
    asym << 1.0, 0.2, 0.3, 1.0;
    CHECK_THROWS_AS(CovarianceMatrix{asym}, precondition_error);
}

TEST_CASE("schur conditional variance on a correlated pair") {
    Eigen::MatrixXd joint(2, 2);
    const double rho = 0.6;
    joint << 1.0, rho, rho, 1.0;
    CHECK(schur_conditional_variance(joint) == doctest::Approx(1.0 - rho * rho).epsilon(1e-12));
}

TEST_CASE("build_mode_covariance pinned cases") {
    QuadratureConfig quad;

    // C_0 = 1 through upsilon = (l + 1/2)^alpha at l = 0
    ModelParams p = base_params();
    p.alpha = 1.0;
    p.c0_bound = 2.0;
    p.upsilon = [](int l) { return l + 0.5; };
    p.truncation = 1;
    const CovarianceMatrix m0 = build_mode_covariance(p, 0, TimeGrid({1.0}, 1.0), quad);
    CHECK(m0.matrix()(0, 0) == doctest::Approx(1.0).epsilon(1e-9));

    // grid = {0}: only the initial spectrum survives
    ModelParams pd = base_params();
    pd.d0 = 1.0;
    const CovarianceMatrix md = build_mode_covariance(pd, 2, TimeGrid({0.0}, 1.0), quad);
    CHECK(md.matrix()(0, 0) == doctest::Approx(std::pow(2.5, -5.0)).epsilon(1e-14));

    // 2x2 against the brute-force oracle
    ModelParams p2 = base_params();
    const CovarianceMatrix m2 = build_mode_covariance(p2, 1, TimeGrid({0.5, 1.0}, 1.0), quad);
    const double c1 = power_coefficient(p2, 1);
    CHECK(m2.matrix()(0, 0) ==
          doctest::Approx(c1 * brute_pair_integral(2.0, 0.5, 0.5, 0.75, 2000)).epsilon(1e-4));
    CHECK(m2.matrix()(1, 0) ==
          doctest::Approx(c1 * brute_pair_integral(2.0, 1.0, 0.5, 0.75, 2000)).epsilon(1e-4));
    CHECK(m2.matrix()(1, 1) ==
          doctest::Approx(c1 * brute_pair_integral(2.0, 1.0, 1.0, 0.75, 2000)).epsilon(1e-4));
}

TEST_CASE("sampling determinism and structure") {
    QuadratureConfig quad;
    ModelParams p = base_params();
    const TimeGrid grid({0.25, 0.5, 1.0}, 1.0);

    const auto a = sample_coefficient_paths(p, grid, 42, 3, quad, 1);
    const auto b = sample_coefficient_paths(p, grid, 42, 3, quad, 2);
    REQUIRE(a.size() == 3);
    for (std::size_t r = 0; r < 3; ++r) {
        CHECK(a[r].replicate == r);
        for (std::size_t i = 0; i < a[r].data.size(); ++i) {
            CHECK(a[r].data[i].real() == b[r].data[i].real());
            CHECK(a[r].data[i].imag() == b[r].data[i].imag());
        }
    }

    // m = 0 paths are exactly real; conjugation read-out
    for (int l = 0; l <= p.truncation; ++l)
        for (std::size_t ti = 0; ti < grid.size(); ++ti) {
            CHECK(a[0].at(l, 0, ti).imag() == 0.0);
            if (l >= 1) {
                const auto plus = a[0].at(l, 1, ti);
                const auto minus = a[0].at(l, -1, ti);
                CHECK(minus.real() == doctest::Approx(-plus.real()));
                CHECK(minus.imag() == doctest::Approx(plus.imag()));
            }
        }

    // different seeds differ
    const auto c = sample_coefficient_paths(p, grid, 43, 1, quad, 1);
    CHECK(std::abs(c[0].at(1, 0, 0).real() - a[0].at(1, 0, 0).real()) > 0.0);
}

TEST_CASE("zero initial data on the zero grid gives zero paths") {
    QuadratureConfig quad;
    ModelParams p = base_params();
    const auto sets = sample_coefficient_paths(p, TimeGrid({0.0}, 1.0), 7, 2, quad, 1);
    for (const auto& s : sets)
        for (const auto& v : s.data) {
            CHECK(v.real() == 0.0);
            CHECK(v.imag() == 0.0);
        }
}

TEST_CASE("monte carlo variance matches the analytic mode covariance") {
    QuadratureConfig quad;
    ModelParams p = base_params();
    const TimeGrid grid({1.0}, 1.0);
    const int reps = 10000;

    const double u33 = build_mode_covariance(p, 3, grid, quad).matrix()(0, 0);
    double acc = 0.0, cross = 0.0, cross31 = 0.0;
    const auto sets = sample_coefficient_paths(p, grid, 11, reps, quad, 2);
    for (const auto& s : sets) {
        acc += std::norm(s.at(3, 1, 0));
        cross += (s.at(3, 1, 0) * std::conj(s.at(2, 1, 0))).real();
        cross31 += (s.at(3, 1, 0) * std::conj(s.at(3, 0, 0))).real();
    }
    acc /= reps;
    cross /= reps;
    cross31 /= reps;
    CHECK(std::abs(acc - u33) / u33 < 0.05);

    const double u22 = build_mode_covariance(p, 2, grid, quad).matrix()(0, 0);
    const double se = std::sqrt(u33 * u22 / (2.0 * reps));
    CHECK(std::abs(cross) < 3.0 * se);
    const double se31 = std::sqrt(u33 * u33 / (2.0 * reps));
    CHECK(std::abs(cross31) < 3.0 * se31);
}

TEST_CASE("replicate streams are independent") {
    QuadratureConfig quad;
    ModelParams p = base_params();
    p.truncation = 1;
    const TimeGrid grid({1.0}, 1.0);
    const int reps = 10000;
    const auto sets = sample_coefficient_paths(p, grid, 5, reps, quad, 2);
    const double u11 = build_mode_covariance(p, 1, grid, quad).matrix()(0, 0);
    double acc = 0.0;
    for (int r = 0; r + 1 < reps; r += 2)
        acc += (sets[r].at(1, 1, 0) * std::conj(sets[r + 1].at(1, 1, 0))).real();
    acc /= (reps / 2);
    CHECK(std::abs(acc) < 3.0 * std::sqrt(u11 * u11 / (2.0 * (reps / 2))));
}

TEST_CASE("sampler exactness on a small grid (covariance, 3 standard errors)") {
    QuadratureConfig quad;
    ModelParams p = base_params();
    const TimeGrid grid({0.25, 0.5, 0.75, 1.0}, 1.0);
    const int reps = 20000;
    const auto u = build_mode_covariance(p, 3, grid, quad).matrix();

    Eigen::MatrixXd est = Eigen::MatrixXd::Zero(4, 4);
    const auto sets = sample_coefficient_paths(p, grid, 19, reps, quad, 2);
    for (const auto& s : sets)
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j <= i; ++j)
                est(i, j) += (s.at(3, 1, i) * std::conj(s.at(3, 1, j))).real();
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j <= i; ++j) {
            const double e = est(i, j) / reps;
            const double se = std::sqrt((u(i, i) * u(j, j) + u(i, j) * u(i, j)) / (2.0 * reps));
            CHECK(std::abs(e - u(i, j)) < 3.0 * se);
        }
}

TEST_CASE("initial condition contributes independently") {
    QuadratureConfig quad;
    ModelParams p = base_params();
    p.d0 = 1.0;
    p.beta = 6.0;
    const TimeGrid grid({0.5}, 1.0);
    const int reps = 20000;
    const double target = build_mode_covariance(p, 1, grid, quad).matrix()(0, 0);
    double acc = 0.0;
    const auto sets = sample_coefficient_paths(p, grid, 23, reps, quad, 2);
    for (const auto& s : sets) acc += std::norm(s.at(1, 1, 0));
    acc /= reps;
    CHECK(std::abs(acc - target) / target < 0.05);
}

TEST_CASE("raw noise coefficients have the fBm covariance") {
    QuadratureConfig quad;
    ModelParams p = base_params();
    p.truncation = 2;
    const TimeGrid grid({0.4, 1.0}, 1.0);
    const int reps = 20000;
    const auto conv = p.convention();

    double var1 = 0.0, inc = 0.0;
    for (int r = 0; r < reps; ++r) {
        const auto set = sample_noise_coefficients(p, grid, 31, r);
        // m = 0 exactly real
        CHECK(set.at(2, 0, 0).imag() == 0.0);
        const double c2 = power_coefficient(p, 2);
        var1 += std::norm(set.at(2, 1, 1)) / c2;
        inc += std::norm(set.at(2, 1, 1) - set.at(2, 1, 0)) / c2;
    }
    var1 /= reps;
    inc /= reps;
    CHECK(std::abs(var1 - 1.0) < 0.05);
    const double inc_target = std::pow(0.6, 2.0 * p.hurst);
    CHECK(std::abs(inc - inc_target) / inc_target < 0.05);
    (void)conv;
}
