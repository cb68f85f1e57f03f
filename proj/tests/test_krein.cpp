#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "krein/krein_system.hpp"

using namespace krein;

TEST_CASE("free Krein system: P = e^{izr}, P_* = 1") {
    for (cplx z : {cplx(0.5, 0.8), cplx(-1.0, 0.2), cplx(0.0, 1.0)}) {
        KreinTrace tr = solve_krein(KreinCoefficient::zero(), z, 5.0, 1e-11);
        for (std::size_t k = 0; k < tr.grid.size(); k += tr.grid.size() / 7 + 1) {
            cplx expected = std::exp(kI * z * tr.grid[k]);
            CHECK(std::abs(tr.P[k] - expected) < 1e-9 * (1.0 + std::abs(expected)));
            CHECK(std::abs(tr.Pstar[k] - 1.0) < 1e-10);
        }
    }
}

TEST_CASE("constant coefficient matches the matrix exponential oracle") {
    // (P; P_*)' = M (P; P_*),  M = [iz, -conj(c); -c, 0]; closed form through
    // the eigen-decomposition of M.
    const cplx c(0.8, -0.3);
    const cplx z(0.4, 0.9);
    const double L = 2.0;
    KreinCoefficient a = KreinCoefficient::constant(c, 10.0);  // support beyond L

    const cplx iz = kI * z;
    const cplx disc = std::sqrt(iz * iz + 4.0 * abs2(c));
    const cplx mu1 = 0.5 * (iz + disc), mu2 = 0.5 * (iz - disc);
    // eigenvectors (1, (iz - mu)/conj(c))
    auto solve_closed = [&](double r) {
        const cplx v1 = (iz - mu1) / std::conj(c), v2 = (iz - mu2) / std::conj(c);
        // coefficients from (1;1) = alpha (1; v1) + beta (1; v2)
        const cplx beta = (1.0 - v1) / (v2 - v1);
        const cplx alpha = 1.0 - beta;
        cplx P = alpha * std::exp(mu1 * r) + beta * std::exp(mu2 * r);
        cplx Ps = alpha * v1 * std::exp(mu1 * r) + beta * v2 * std::exp(mu2 * r);
        return std::pair<cplx, cplx>(P, Ps);
    };

    KreinTrace tr = solve_krein(a, z, L, 1e-12);
    for (double r : {0.5, 1.0, 1.7, 2.0}) {
        auto [Pc, Psc] = solve_closed(r);
        auto [Pn, Psn] = tr.eval(r);
        CHECK(std::abs(Pn - Pc) < 1e-9 * (1.0 + std::abs(Pc)));
        CHECK(std::abs(Psn - Psc) < 1e-9 * (1.0 + std::abs(Psc)));
    }
}

TEST_CASE("second CD identity at the sharpness coefficient") {
    // |P_*|^2 - |P|^2 = 2 Im z int_0^r |P|^2 to 1e-8 relative
    KreinCoefficient a = KreinCoefficient::exponential(1.0, 1.0);
    KreinTrace tr = solve_krein(a, cplx(0.0, 1.0), 5.0, 1e-11);
    double r = 5.0;
    auto [P, Ps] = tr.eval(r);
    double lhs = abs2(Ps) - abs2(P);
    double rhs = 2.0 * tr.cum_abs2_at(r);
    CHECK(std::abs(lhs - rhs) < 1e-8 * std::abs(rhs));
}

TEST_CASE("CD identity across families and sample points") {
    std::vector<KreinCoefficient> families = {
        KreinCoefficient::exponential(0.7, 1.2),
        KreinCoefficient::constant(cplx(0.5, 0.4), 2.0),
    };
    for (const auto& a : families) {
        for (cplx z : {cplx(1.0, 0.5), cplx(-0.3, 1.5)}) {
            KreinTrace tr = solve_krein(a, z, 6.0, 1e-11);
            for (double r : {1.0, 3.0, 6.0}) {
                auto [P, Ps] = tr.eval(r);
                double lhs = abs2(Ps) - abs2(P);
                double rhs = 2.0 * z.imag() * tr.cum_abs2_at(r);
                CHECK(std::abs(lhs - rhs) <= 1e-8 * std::max(1.0, std::abs(rhs)));
            }
        }
    }
}

TEST_CASE("reflection formula links z and conj z") {
    KreinCoefficient a = KreinCoefficient::constant(cplx(0.6, 0.2), 3.0);
    cplx z(0.7, 0.4);
    KreinTrace up = solve_krein(a, z, 4.0, 1e-11);
    KreinTrace dn = solve_krein(a, std::conj(z), 4.0, 1e-11);
    for (double r : {0.5, 1.5, 2.5, 3.5}) {
        auto [P, Ps] = up.eval(r);
        auto [Pc, Psc] = dn.eval(r);
        cplx pred = std::exp(kI * z * r) * std::conj(Psc);
        CHECK(std::abs(P - pred) < 1e-9 * (1.0 + std::abs(P)));
        cplx pred2 = std::exp(kI * z * r) * std::conj(Pc);
        CHECK(std::abs(Ps - pred2) < 1e-9 * (1.0 + std::abs(Ps)));
    }
}

TEST_CASE("Wronskian with the dual system") {
    KreinCoefficient a = KreinCoefficient::exponential(0.9, 1.0);
    cplx z(0.3, 0.8);
    KreinTrace tr = solve_krein(a, z, 8.0, 1e-11, /*with_dual=*/true);
    REQUIRE(tr.has_dual());
    for (std::size_t k = 1; k < tr.grid.size(); k += tr.grid.size() / 9 + 1) {
        cplx w = tr.P[k] * tr.dualPstar[k] + tr.dualP[k] * tr.Pstar[k];
        cplx expected = 2.0 * std::exp(kI * z * tr.grid[k]);
        CHECK(std::abs(w - expected) < 1e-9 * std::abs(expected));
    }
}

TEST_CASE("|P| <= |P_*| in the closed upper half-plane") {
    KreinCoefficient a = KreinCoefficient::constant(cplx(1.0, 0.0), 2.0);
    for (cplx z : {cplx(2.0, 0.01), cplx(-1.0, 1.0), cplx(0.0, 2.0)}) {
        KreinTrace tr = solve_krein(a, z, 4.0, 1e-11);
        for (std::size_t k = 0; k < tr.grid.size(); ++k)
            CHECK(std::abs(tr.P[k]) <= std::abs(tr.Pstar[k]) * (1.0 + 1e-9) + 1e-12);
    }
}

TEST_CASE("energy integral converges for decaying coefficients") {
    // Theorem A(b)-style check: int_0^R |P(, z)|^2 stabilizes in R for Im z > 0.
    KreinCoefficient a = KreinCoefficient::exponential(1.0, 1.0);
    KreinTrace tr = solve_krein(a, cplx(0.0, 1.0), 30.0, 1e-11);
    double e20 = tr.cum_abs2_at(20.0);
    double e30 = tr.cum_abs2_at(30.0);
    CHECK(std::abs(e30 - e20) < 1e-8 * e30);
}

TEST_CASE("reproducing kernel: quadrature equals the CD algebraic route") {
    KreinCoefficient a = KreinCoefficient::exponential(0.8, 1.0);
    cplx z(0.0, 1.0), zp(0.5, 0.7);
    KreinPairTrace pair = solve_krein_pair(a, z, zp, 6.0, 1e-11);
    for (double r : {1.0, 2.5, 5.0}) {
        cplx kq = reproducing_kernel(pair, r);
        cplx kcd = reproducing_kernel_cd(pair, r);
        CHECK(std::abs(kq - kcd) < 1e-8 * (1.0 + std::abs(kq)));
    }
}

TEST_CASE("free reproducing kernel has the explicit value") {
    // a = 0, z = z' = i, r = 1: (1/2pi) int_0^1 e^{-2s} ds = (1 - e^{-2})/(4 pi)
    KreinPairTrace pair =
        solve_krein_pair(KreinCoefficient::zero(), cplx(0.0, 1.0), cplx(0.0, 1.0), 2.0, 1e-12);
    cplx k1 = reproducing_kernel(pair, 1.0);
    CHECK(k1.real() == Catch::Approx((1.0 - std::exp(-2.0)) / (4.0 * kPi)).epsilon(1e-9));
    CHECK(std::abs(k1.imag()) < 1e-12);

    // k_r(z, z) real and increasing in r
    double prev = 0.0;
    for (double r : {0.5, 1.0, 1.5, 2.0}) {
        cplx kr = reproducing_kernel(pair, r);
        CHECK(kr.real() > prev);
        prev = kr.real();
    }
}

TEST_CASE("christoffel function: free limit and monotonicity") {
    KreinTrace tr = solve_krein(KreinCoefficient::zero(), cplx(0.0, 1.0), 30.0, 1e-11);
    // m_r = (int_0^r e^{-2s} ds)^{-1} -> 2 as r -> infinity
    CHECK(christoffel_m(tr, 30.0) == Catch::Approx(2.0).epsilon(1e-8));
    CHECK(christoffel_m(tr, 1.0) > christoffel_m(tr, 2.0));
    CHECK_THROWS_AS(christoffel_m(tr, 0.0), std::invalid_argument);
}

TEST_CASE("christoffel decay toward the limit for the sharpness coefficient") {
    // m_r(i) - m_inf(i) should decay exponentially with slope magnitude >= 1
    KreinCoefficient a = KreinCoefficient::exponential(1.0, 1.0);
    KreinTrace tr = solve_krein(a, cplx(0.0, 1.0), 30.0, 1e-11);
    double m_inf = christoffel_m(tr, 30.0);
    std::vector<double> rs, logs;
    for (double r = 2.0; r <= 6.0; r += 0.5) {
        double diff = christoffel_m(tr, r) - m_inf;
        REQUIRE(diff > 0);
        rs.push_back(r);
        logs.push_back(std::log(diff));
    }
    LineFit f = fit_line(rs, logs);
    CHECK(f.slope < 0.0);
    CHECK(-f.slope >= 1.0);
}
