#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "krein/ode.hpp"

using namespace krein;

TEST_CASE("scalar exponential") {
    std::vector<double> y = {1.0};
    auto rhs = [](double, const double* yv, double* dy) { dy[0] = yv[0]; };
    integrate_ode(rhs, 0.0, 2.0, y);
    CHECK(y[0] == Catch::Approx(std::exp(2.0)).epsilon(1e-10));
}

TEST_CASE("ordered exponent of the zero field is the identity") {
    MatrixField field{[](double) { return Mat2c::zero(); }};
    TransferMatrix tm = ordered_exponent(field, 0.0, 3.0);
    CHECK(std::abs(tm.X.a - 1.0) < 1e-12);
    CHECK(std::abs(tm.X.b) < 1e-12);
    CHECK(std::abs(tm.X.c) < 1e-12);
    CHECK(std::abs(tm.X.d - 1.0) < 1e-12);
}

TEST_CASE("constant diagonal field decouples") {
    const double c = 0.7;
    MatrixField field{[c](double) { return Mat2c{-c, 0.0, 0.0, c}; }};
    TransferMatrix tm = ordered_exponent(field, 1.0, 2.5);
    CHECK(std::abs(tm.X.a - std::exp(-c * 1.5)) < 1e-10);
    CHECK(std::abs(tm.X.d - std::exp(c * 1.5)) < 1e-10);
    CHECK(std::abs(tm.X.b) < 1e-12);
    CHECK(std::abs(tm.X.c) < 1e-12);
}

TEST_CASE("J*Q constant off-diagonal equals diagonal exponentials and the series oracle") {
    // Q = [0 c; c 0] => JQ = diag(-c, c)
    const double c = 0.4;
    Mat2d JQ = matJ() * Mat2d{0.0, c, c, 0.0};
    CHECK(JQ.a == Catch::Approx(-c));
    CHECK(JQ.d == Catch::Approx(c));
    MatrixField field{[JQ](double) { return to_complex(JQ); }};
    TransferMatrix tm = ordered_exponent(field, 0.0, 1.0);
    CHECK(std::abs(tm.X.a - std::exp(-c)) < 1e-10);
    CHECK(std::abs(tm.X.d - std::exp(c)) < 1e-10);

    Mat2c series = ordered_exponent_series_const(to_complex(JQ), 0.0, 1.0, 20);
    CHECK(std::abs(series.a - tm.X.a) < 1e-10);
    CHECK(std::abs(series.d - tm.X.d) < 1e-10);
}

namespace {

Mat2c random_matrix(std::mt19937& rng, double scale) {
    std::uniform_real_distribution<double> u(-scale, scale);
    return {cplx(u(rng), u(rng)), cplx(u(rng), u(rng)), cplx(u(rng), u(rng)),
            cplx(u(rng), u(rng))};
}

}  // namespace

TEST_CASE("series oracle agrees with the integrator for random constant fields") {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 12; ++trial) {
        Mat2c A = random_matrix(rng, 0.3);
        double span = 0.5 / std::max(1.0, operator_norm(A));  // keeps int ||A|| <= 0.5
        MatrixField field{[A](double) { return A; }};
        TransferMatrix tm = ordered_exponent(field, 0.0, span, 1e-12);
        Mat2c series = ordered_exponent_series_const(A, 0.0, span, 25);
        CHECK(frobenius_norm(tm.X - series) < 1e-10);
    }
}

TEST_CASE("det identity and group property") {
    std::mt19937 rng(11);
    for (int trial = 0; trial < 8; ++trial) {
        Mat2c A0 = random_matrix(rng, 0.8);
        Mat2c A1 = random_matrix(rng, 0.8);
        auto Af = [A0, A1](double t) { return A0 + cplx(std::sin(t)) * A1; };
        MatrixField field{Af};
        const double r = 0.3, s = 1.1, t = 2.4;
        TransferMatrix x_rt = ordered_exponent(field, r, t, 1e-11);

        // group property X(s,t) X(r,s) = X(r,t)
        TransferMatrix x_rs = ordered_exponent(field, r, s, 1e-11);
        TransferMatrix x_st = ordered_exponent(field, s, t, 1e-11);
        CHECK(frobenius_norm(x_st.X * x_rs.X - x_rt.X) < 1e-8 * frobenius_norm(x_rt.X));

        // det X = exp(int trace A)
        cplx tr_int = integrate_adaptive([&](double u) { return Af(u).trace(); }, r, t).value;
        cplx expected_det = std::exp(tr_int);
        CHECK(std::abs(x_rt.X.det() - expected_det) < 1e-8 * std::abs(expected_det));
    }
}

TEST_CASE("two-sided norm inequality on a circle of unit vectors") {
    std::mt19937 rng(13);
    Mat2c A0 = random_matrix(rng, 0.6);
    auto Af = [A0](double t) { return cplx(std::exp(-t)) * A0; };
    MatrixField field{Af};
    const double r = 0.0, t = 2.0;
    double bound = field.norm_integral(r, t);
    TransferMatrix tm = ordered_exponent(field, r, t, 1e-11);
    for (int k = 0; k < 16; ++k) {
        double phi = 2.0 * kPi * k / 16.0;
        std::array<cplx, 2> v = {std::cos(phi), std::sin(phi)};
        auto w = tm.X.apply(v);
        double norm = std::sqrt(abs2(w[0]) + abs2(w[1]));
        CHECK(norm <= std::exp(bound) * (1 + 1e-9));
        CHECK(norm >= std::exp(-bound) * (1 - 1e-9));
    }
}

TEST_CASE("propagate_grid is consistent with direct solves") {
    std::mt19937 rng(17);
    Mat2c A0 = random_matrix(rng, 0.5);
    auto Af = [A0](double t) { return cplx(1.0 / (1.0 + t)) * A0; };
    MatrixField field{Af};
    std::vector<double> grid = {1.0, 2.0, 3.0};
    auto tms = propagate_grid(field, 0.5, grid, 1e-11);
    REQUIRE(tms.size() == 3);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        TransferMatrix direct = ordered_exponent(field, 0.5, grid[i], 1e-11);
        CHECK(frobenius_norm(tms[i].X - direct.X) < 1e-8);
    }
    // zero field, any grid: identities
    MatrixField zf{[](double) { return Mat2c::zero(); }};
    for (const auto& tm : propagate_grid(zf, 0.0, grid))
        CHECK(frobenius_norm(tm.X - Mat2c::identity()) < 1e-12);
}

TEST_CASE("step underflow raises a diagnostic") {
    // A step cap that collapses to zero near t = 1 must trip the underflow
    // guard instead of looping forever.
    std::vector<double> y = {1.0};
    auto rhs = [](double, const double* yv, double* dy) { dy[0] = -yv[0]; };
    OdeOptions opt;
    opt.max_step_at = [](double t) { return std::max(0.0, 1e-3 * sqr(1.0 - t)); };
    opt.max_steps = 100000;
    CHECK_THROWS_AS(integrate_ode(rhs, 0.0, 1.0, y, opt), numeric_error);
}
