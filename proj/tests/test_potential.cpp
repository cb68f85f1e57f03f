#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "krein/potential.hpp"

using namespace krein;

TEST_CASE("krein_to_dirac on the builtin families") {
    SECTION("zero coefficient") {
        PotentialSpec Q = krein_to_dirac(KreinCoefficient::zero());
        CHECK(Q.p(1.3) == 0.0);
        CHECK(Q.q(1.3) == 0.0);
    }
    SECTION("exponential coefficient") {
        // a(r) = e^{-r}  ->  p(r) = -2 e^{-2r}, q = 0 (Q_a convention; the
        // spectral side lives on -Q_a, recorded in the flag)
        PotentialSpec Q = krein_to_dirac(KreinCoefficient::exponential(1.0, 1.0));
        CHECK(Q.p(0.7) == Catch::Approx(-2.0 * std::exp(-1.4)).epsilon(1e-14));
        CHECK(Q.q(0.7) == 0.0);
        CHECK(Q.sign_flipped_vs_krein);
        PotentialSpec neg = Q.negated();
        CHECK(neg.p(0.7) == Catch::Approx(2.0 * std::exp(-1.4)).epsilon(1e-14));
    }
    SECTION("pure imaginary compact coefficient") {
        // a = i c on [0, L]  ->  p = 0, q = 2c on [0, L/2]
        PotentialSpec Q = krein_to_dirac(KreinCoefficient::constant(cplx(0.0, 0.25), 3.0));
        CHECK(Q.p(1.0) == 0.0);
        CHECK(Q.q(1.0) == Catch::Approx(0.5));
        CHECK(Q.q(1.6) == 0.0);  // beyond L/2 = 1.5
        CHECK(Q.support_radius == Catch::Approx(1.5));
    }
}

TEST_CASE("dirac_to_krein round trips") {
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> u(0.0, 4.0);

    SECTION("zero potential") {
        KreinCoefficient a = dirac_to_krein(PotentialSpec::zero_potential());
        CHECK(std::abs(a(1.0)) == 0.0);
    }
    SECTION("sharpness potential maps back to e^{-r}") {
        // Q = [0 2e^{-2r}; 2e^{-2r} 0] is -Q_a for a(r) = e^{-r}
        PotentialSpec Q = PotentialSpec::off_diagonal_potential(2.0, 2.0);
        KreinCoefficient a = dirac_to_krein(Q.negated());
        for (int k = 0; k < 10; ++k) {
            double r = u(rng);
            CHECK(std::abs(a(r) - std::exp(-r)) < 1e-14);
        }
    }
    SECTION("table round trip is exact on the sample grid") {
        std::vector<double> grid = {0.0, 0.5, 1.25, 2.0};
        std::vector<cplx> vals = {{0.3, -0.1}, {-0.2, 0.4}, {0.05, 0.0}, {0.0, 0.7}};
        KreinCoefficient a = KreinCoefficient::table(grid, vals);
        KreinCoefficient back = dirac_to_krein(krein_to_dirac(a));
        for (double r = 0.0; r <= 2.0; r += 0.1)
            CHECK(std::abs(back(r) - a(r)) < 1e-14);
    }
}

TEST_CASE("oscillation_sup basics") {
    SECTION("zero potential gives zero") {
        CHECK(oscillation_sup(PotentialSpec::zero_potential(), 0.0, 2.0, 0.1) == 0.0);
    }
    SECTION("ramp peaks at the end of the support") {
        PotentialSpec Q = PotentialSpec::compact_const_potential(1.0, 0.0, 1.0);
        CHECK(oscillation_sup(Q, 0.0, 2.0, 0.1) == Catch::Approx(1.0).epsilon(1e-10));
    }
    SECTION("non-finite sample is rejected") {
        auto bad = [](double x) { return x < 1.0 ? 0.0 : std::numeric_limits<double>::quiet_NaN(); };
        CHECK_THROWS_AS(oscillation_sup_sampled(bad, 0.0, 2.0, 0.25), numeric_error);
    }
}

TEST_CASE("oscillatory family obeys the substitution bound") {
    PotentialSpec Q = PotentialSpec::oscillatory_potential();  // e^x sin(e^{2x})
    // sup_t |int_r^t p| = |int sin(s)/(2 sqrt s)| <= first-lobe bound pi e^{-r}/2
    double v = oscillation_sup(Q, 2.0, 6.0, 0.0 /*unused*/);
    CHECK(v > 0.0);
    CHECK(v <= 2.0 * std::exp(-2.0));

    // independent oracle: alternating lobe sums of sin(s)/(2 sqrt s) starting
    // from u0 = e^{2r}; the running extrema sit at multiples of pi.
    const double u0 = std::exp(4.0);
    double cum = 0.0, best = 0.0;
    double lo = u0;
    double hi = std::ceil(u0 / kPi) * kPi;
    const double u1 = std::exp(12.0);
    while (lo < u1) {
        // Simpson on each lobe at fine resolution
        const int n = 64;
        double h = (hi - lo) / n, s = 0.0;
        for (int i = 0; i <= n; ++i) {
            double x = lo + i * h;
            double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
            s += w * std::sin(x) / (2.0 * std::sqrt(x));
        }
        cum += s * h / 3.0;
        best = std::max(best, std::abs(cum));
        lo = hi;
        hi = std::min(hi + kPi, u1);
    }
    CHECK(v == Catch::Approx(best).epsilon(1e-6));
}

TEST_CASE("oscillation_sup decays along r for the oscillatory family") {
    PotentialSpec Q = PotentialSpec::oscillatory_potential();
    double prev = kInf;
    for (double r = 0.0; r <= 4.0; r += 1.0) {
        double v = oscillation_sup(Q, r, r + 3.0, 0.0);
        CHECK(v < prev);
        prev = v;
    }
}

TEST_CASE("table potential validation") {
    CHECK_THROWS_AS(PotentialSpec::table_potential({{0.0, 1, 0}, {0.0, 2, 0}}, true),
                    std::invalid_argument);
    PotentialSpec t = PotentialSpec::table_potential({{0.0, 1, 0}, {2.0, 3, 0}}, true);
    CHECK(t.p(1.0) == Catch::Approx(2.0));  // linear interpolation
    CHECK(t.p(2.5) == 0.0);                 // outside the grid
    CHECK(t.support_radius == Catch::Approx(2.0));
}
