#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "krein/entropy.hpp"

using namespace krein;

TEST_CASE("entropy of the free potential vanishes") {
    CHECK(std::abs(entropy_E(PotentialSpec::zero_potential(), 0.0, 1.0)) < 1e-12);
    CHECK(std::abs(entropy_E(PotentialSpec::zero_potential(), 3.0, 2.5)) < 1e-12);
    EntropyKH kh = entropy_KH(PotentialSpec::zero_potential(), 0.0, 10);
    CHECK(std::abs(kh.value) < 1e-11);
}

TEST_CASE("off-diagonal closed form matches independent quadrature") {
    // Q = [0 p; p 0], p = 2 e^{-2t}: g_r(t) = e^{-2r} - e^{-2t} analytically;
    // the oracle evaluates int e^{-2 g_r} dt * int e^{2 g_r} dt - 4 directly.
    PotentialSpec Q = PotentialSpec::off_diagonal_potential(2.0, 2.0);
    for (double r : {0.0, 1.0, 2.0, 3.0}) {
        auto g = [r](double t) { return std::exp(-2.0 * r) - std::exp(-2.0 * t); };
        double i1 = integrate_adaptive_real([&](double t) { return std::exp(-2.0 * g(t)); }, r,
                                            r + 2.0, 1e-14, 1e-13);
        double i2 = integrate_adaptive_real([&](double t) { return std::exp(2.0 * g(t)); }, r,
                                            r + 2.0, 1e-14, 1e-13);
        double oracle = i1 * i2 - 4.0;
        double got = entropy_E(Q, r, 1.0);
        CHECK(got == Catch::Approx(oracle).epsilon(1e-8));
    }
}

TEST_CASE("sharpness family decays at rate 4") {
    PotentialSpec Q = PotentialSpec::krein_exp_potential(1.0, 1.0);
    EntropyProfile prof = entropy_profile(Q, linear_grid(1.0, 4.0, 0.25));
    double rate = fit_decay_rate(prof, 1.0, 4.0);
    CHECK(rate == Catch::Approx(4.0).epsilon(0.05));
}

TEST_CASE("ordered-exponent route equals the absolute H_Q quadrature route") {
    // same functional through two algebraic paths; supports r <= 5 keep N tame
    std::vector<PotentialSpec> fams = {
        PotentialSpec::compact_const_potential(0.6, 0.8, 2.0),
        PotentialSpec::off_diagonal_potential(1.5, 1.0),
    };
    for (const auto& Q : fams) {
        for (double r : {0.0, 1.5}) {
            const double l = 1.0;
            auto Hij = [&Q](double t) { return hamiltonian(Q, t); };
            double s11 = integrate_adaptive_real([&](double t) { return Hij(t).a; }, r, r + 2 * l,
                                                 1e-13, 1e-12);
            double s12 = integrate_adaptive_real([&](double t) { return Hij(t).b; }, r, r + 2 * l,
                                                 1e-13, 1e-12);
            double s22 = integrate_adaptive_real([&](double t) { return Hij(t).d; }, r, r + 2 * l,
                                                 1e-13, 1e-12);
            double absolute = (s11 * s22 - s12 * s12) / (l * l) - 4.0;
            double relative = entropy_E(Q, r, l);
            CHECK(relative == Catch::Approx(absolute).margin(1e-7));
        }
    }
}

TEST_CASE("entropy is nonnegative down to the numerical floor") {
    std::mt19937 rng(47);
    std::uniform_real_distribution<double> u(-0.8, 0.8);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<TableSample> samples;
        for (int i = 0; i <= 6; ++i) samples.push_back({0.5 * i, u(rng), u(rng)});
        PotentialSpec Q = PotentialSpec::table_potential(samples, true);
        for (double r : {0.0, 0.7, 2.0})
            CHECK(entropy_E(Q, r, 1.0) >= -1e-9);
    }
}

TEST_CASE("K_H partial sums") {
    PotentialSpec Q = PotentialSpec::krein_exp_potential(1.0, 1.0);
    EntropyKH k0 = entropy_KH(Q, 0.0, 12);
    EntropyKH k1 = entropy_KH(Q, 1.0, 12);
    EntropyKH k2 = entropy_KH(Q, 2.0, 12);
    CHECK(k0.value >= k1.value);
    CHECK(k1.value >= k2.value);
    CHECK(k2.value >= 0.0);
    CHECK(k0.tail_estimate < 1e-8 * k0.value);  // geometric decay: tiny last term

    EntropyProfile prof = entropy_KH_profile(Q, linear_grid(1.0, 4.0, 0.5), 12);
    double rate = fit_decay_rate(prof, 1.0, 4.0);
    CHECK(rate == Catch::Approx(4.0).epsilon(0.05));
}

TEST_CASE("decay-rate fit on synthetic profiles") {
    SECTION("pure exponential is exact") {
        EntropyProfile p;
        p.r_grid = linear_grid(0.0, 5.0, 0.25);
        for (double r : p.r_grid) p.values.push_back(std::exp(-3.0 * r));
        CHECK(fit_decay_rate(p, 0.0, 5.0) == Catch::Approx(3.0).margin(1e-12));
    }
    SECTION("bounded perturbation stays within 0.02") {
        EntropyProfile p;
        p.r_grid = linear_grid(0.0, 5.0, 0.25);
        for (double r : p.r_grid) p.values.push_back(std::exp(-3.0 * r) * (1 + 0.01 * std::sin(r)));
        CHECK(fit_decay_rate(p, 0.0, 5.0) == Catch::Approx(3.0).margin(0.02));
    }
    SECTION("nonpositive samples are reported") {
        EntropyProfile p;
        p.r_grid = {0.0, 1.0, 2.0, 3.0, 4.0};
        p.values = {1.0, 0.5, -0.1, 0.2, 0.1};
        CHECK_THROWS_WITH(fit_decay_rate(p, 0.0, 4.0),
                          Catch::Matchers::ContainsSubstring("2.0"));
    }
    SECTION("default window uses the middle quartiles") {
        EntropyProfile p;
        p.r_grid = linear_grid(0.0, 8.0, 0.5);
        for (double r : p.r_grid) p.values.push_back(std::exp(-2.0 * r));
        double rate = fit_decay_rate(p);
        CHECK(rate == Catch::Approx(2.0).margin(1e-10));
        CHECK(p.fit_lo > 0.0);
        CHECK(p.fit_hi < 8.0);
    }
}

TEST_CASE("sobolev tail norm") {
    SECTION("zero potential") {
        CHECK(sobolev_tail_norm(PotentialSpec::zero_potential(), 0.0, 8.0) == 0.0);
    }
    SECTION("indicator oracle") {
        // f = 1 on [0,1]: ||f||^2 = (1/2pi) int |e^{i eta} - 1|^2 / (eta^2 (1 + eta^2)) d eta
        PotentialSpec Q = PotentialSpec::compact_const_potential(1.0, 0.0, 1.0);
        double got = sobolev_tail_norm(Q, 0.0, 16.0, 1 << 15);
        auto integrand = [](double eta) {
            if (std::abs(eta) < 1e-8) return 1.0;  // |e^{i eta}-1|^2/eta^2 -> 1
            return (2.0 - 2.0 * std::cos(eta)) / (eta * eta * (1.0 + eta * eta));
        };
        double oracle = 0.0;
        oracle += integrate_adaptive_real(integrand, -400.0, 400.0, 1e-12, 1e-10);
        oracle /= 2.0 * kPi;
        CHECK(got * got == Catch::Approx(oracle).epsilon(2e-3));
    }
    SECTION("insufficient grid is detected") {
        PotentialSpec Q = PotentialSpec::off_diagonal_potential(2.0, 0.05);  // slow decay
        CHECK_THROWS_AS(sobolev_tail_norm(Q, 0.0, 4.0), numeric_error);
    }
    SECTION("comparability with K_H for the sharpness potential") {
        PotentialSpec Q = PotentialSpec::off_diagonal_potential(2.0, 2.0);
        for (double r : {0.0, 1.0, 2.0, 3.0}) {
            double kh = entropy_KH(Q, r, 14).value;
            double sn = sobolev_tail_norm(Q, r, 16.0);
            double ratio = kh / (sn * sn);
            CHECK(ratio > 0.1);
            CHECK(ratio < 10.0);
        }
    }
}

TEST_CASE("rescaling lemma check") {
    SECTION("zero potential is the 0/0 sentinel") {
        RescalingReport rep = rescaling_check(PotentialSpec::zero_potential(), 1.0, 1.0);
        CHECK(rep.degenerate);
        CHECK(rep.ratio == 0.0);
    }
    SECTION("sharpness potential, frozen regression") {
        RescalingReport rep = rescaling_check(PotentialSpec::krein_exp_potential(1.0, 1.0), 1.0, 1.0);
        CHECK(std::isfinite(rep.ratio));
        CHECK(rep.max_half <= 1.0);
        // frozen from the first run of this implementation
        CHECK(rep.ratio == Catch::Approx(0.7245694284288372).epsilon(1e-6));
    }
    SECTION("ensemble of random compact potentials keeps bounded ratios") {
        std::mt19937 rng(53);
        std::uniform_real_distribution<double> u(-0.5, 0.5);
        int checked = 0;
        for (int trial = 0; trial < 50; ++trial) {
            std::vector<TableSample> samples;
            for (int i = 0; i <= 5; ++i) samples.push_back({0.4 * i, u(rng), u(rng)});
            PotentialSpec Q = PotentialSpec::table_potential(samples, true);
            RescalingReport rep = rescaling_check(Q, 0.0, 0.5);
            if (rep.degenerate || rep.max_half > 1.0) continue;
            ++checked;
            CHECK(rep.ratio <= 100.0);
        }
        CHECK(checked >= 40);
    }
}
