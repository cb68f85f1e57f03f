#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "krein/quadrature.hpp"

using namespace krein;

TEST_CASE("adaptive quadrature on smooth integrands") {
    auto sq = [](double x) { return x * x; };
    CHECK(integrate_adaptive_real(sq, 0.0, 1.0) == Catch::Approx(1.0 / 3).epsilon(1e-12));

    auto sinf = [](double x) { return std::sin(x); };
    CHECK(integrate_adaptive_real(sinf, 0.0, kPi) == Catch::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("adaptive quadrature resolves oscillation") {
    auto f = [](double x) { return std::sin(50.0 * x); };
    double expected = (1.0 - std::cos(50.0)) / 50.0;
    CHECK(integrate_adaptive_real(f, 0.0, 1.0) == Catch::Approx(expected).margin(1e-12));
}

TEST_CASE("complex integrand") {
    auto f = [](double x) { return std::exp(kI * x); };
    cplx expected = (std::exp(kI * 1.0) - 1.0) / kI;
    cplx got = integrate_adaptive(f, 0.0, 1.0).value;
    CHECK(std::abs(got - expected) < 1e-12);
}

TEST_CASE("fft matches direct DFT and Parseval") {
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const std::size_t n = 64;
    std::vector<cplx> x(n);
    for (auto& v : x) v = cplx(u(rng), u(rng));

    std::vector<cplx> direct(n);
    for (std::size_t k = 0; k < n; ++k) {
        cplx s{};
        for (std::size_t j = 0; j < n; ++j)
            s += x[j] * std::exp(-2.0 * kPi * kI * double(j * k) / double(n));
        direct[k] = s;
    }
    std::vector<cplx> y = x;
    fft_inplace(y);
    double maxdiff = 0, ein = 0, eout = 0;
    for (std::size_t k = 0; k < n; ++k) {
        maxdiff = std::max(maxdiff, std::abs(y[k] - direct[k]));
        ein += abs2(x[k]);
        eout += abs2(y[k]);
    }
    CHECK(maxdiff < 1e-10);
    CHECK(eout / double(n) == Catch::Approx(ein).epsilon(1e-12));
}

TEST_CASE("line fit recovers exact parameters") {
    std::vector<double> x, y;
    for (int i = 0; i < 20; ++i) {
        x.push_back(0.3 * i);
        y.push_back(2.5 - 1.75 * x.back());
    }
    LineFit f = fit_line(x, y);
    CHECK(f.slope == Catch::Approx(-1.75).margin(1e-13));
    CHECK(f.intercept == Catch::Approx(2.5).margin(1e-13));
    CHECK(f.rms_residual < 1e-13);
}
