#pragma once

#include "krein/dirac.hpp"

namespace krein {

// ---------------------------------------------------------------------------
// Residual battery over sampled (r, z): the Christoffel-Darboux identity, the
// reflection formula, the dual-system Wronskian, det N = 1, and the finite-r
// duality. Shared by the CLI `verify` subcommand and the acceptance suite.
// ---------------------------------------------------------------------------

struct ResidualReport {
    std::string name;
    double max_residual = 0;
    double threshold = 0;
    std::size_t samples = 0;
    bool pass() const { return max_residual < threshold; }
};

inline const std::vector<std::string>& identity_suite_names() {
    static const std::vector<std::string> names = {"cd", "reflection", "wronskian", "detn",
                                                   "duality"};
    return names;
}

// Runs the named identities for one potential. z-samples cover a small grid
// in the closed upper half-plane; r-samples stride the solver grid.
inline std::vector<ResidualReport> run_identity_suite(const PotentialSpec& Q,
                                                      const std::vector<std::string>& suites,
                                                      double rmax = 0, double tol = 5e-13) {
    KreinCoefficient a = krein_for_dirac(Q);
    if (rmax <= 0) rmax = std::min(default_rmax(a), 12.0);

    const std::vector<cplx> zs = {cplx(0.0, 1.0), cplx(1.2, 0.5), cplx(-0.7, 1.5),
                                  cplx(2.0, 0.25), cplx(-1.5, 2.0)};
    auto want = [&suites](const std::string& n) {
        return std::find(suites.begin(), suites.end(), n) != suites.end();
    };

    std::map<std::string, ResidualReport> acc;
    auto bump = [&acc](const std::string& name, double threshold, double resid) {
        ResidualReport& r = acc[name];
        r.name = name;
        r.threshold = threshold;
        r.max_residual = std::max(r.max_residual, resid);
        r.samples++;
    };

    for (cplx z : zs) {
        const bool need_refl = want("reflection");
        KreinTrace tr = solve_krein(a, z, rmax, tol, /*with_dual=*/true);
        KreinTrace trc = need_refl ? solve_krein(a, std::conj(z), rmax, tol, false) : KreinTrace{};

        const std::size_t stride = std::max<std::size_t>(1, tr.grid.size() / 24);
        for (std::size_t k = stride; k < tr.grid.size(); k += stride) {
            double r = tr.grid[k];
            if (want("cd")) {
                double lhs = abs2(tr.Pstar[k]) - abs2(tr.P[k]);
                double rhs = 2.0 * z.imag() * tr.cum_abs2_P[k];
                bump("cd", 1e-8, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
            }
            if (want("wronskian") && z.imag() * r <= 6.0) {
                // deeper products cancel below double precision against the
                // e^{izr} scale; sample where the identity is conditioned
                cplx w = tr.P[k] * tr.dualPstar[k] + tr.dualP[k] * tr.Pstar[k];
                cplx expected = 2.0 * std::exp(kI * z * r);
                bump("wronskian", 1e-9, std::abs(w - expected) / std::abs(expected));
            }
            if (want("duality")) {
                cplx w = std::exp(-kI * z * r) *
                         (tr.P[k] * tr.dualPstar[k] + tr.dualP[k] * tr.Pstar[k]);
                bump("duality", 1e-6, std::abs(w - 2.0) / 2.0);
            }
            if (need_refl) {
                auto [Pc, Psc] = trc.eval(r);
                cplx pred = std::exp(kI * z * r) * std::conj(Psc);
                bump("reflection", 1e-9,
                     std::abs(tr.P[k] - pred) / std::max(1.0, std::abs(tr.P[k])));
            }
        }
    }

    if (want("detn")) {
        double tmax = std::isfinite(Q.support_radius) ? Q.support_radius + 1.0 : 5.0;
        for (cplx z : zs) {
            DiracTrace tr = fundamental_solution(Q, z, tmax, tol);
            const std::size_t stride = std::max<std::size_t>(1, tr.grid.size() / 24);
            for (std::size_t k = stride; k < tr.grid.size(); k += stride)
                bump("detn", 1e-9, std::abs(tr.N[k].det() - 1.0));
        }
    }

    std::vector<ResidualReport> out;
    for (const std::string& name : identity_suite_names())
        if (acc.count(name)) out.push_back(acc[name]);
    return out;
}

// Aggregates the suite across several potentials (worst residual wins).
inline std::vector<ResidualReport> run_identity_suite(const std::vector<PotentialSpec>& fams,
                                                      const std::vector<std::string>& suites) {
    std::map<std::string, ResidualReport> acc;
    for (const PotentialSpec& Q : fams) {
        for (const ResidualReport& r : run_identity_suite(Q, suites)) {
            ResidualReport& dst = acc[r.name];
            if (dst.samples == 0) {
                dst = r;
            } else {
                dst.max_residual = std::max(dst.max_residual, r.max_residual);
                dst.samples += r.samples;
            }
        }
    }
    std::vector<ResidualReport> out;
    for (const std::string& name : identity_suite_names())
        if (acc.count(name)) out.push_back(acc[name]);
    return out;
}

// The four stock families exercised by the acceptance identity criterion.
inline std::vector<PotentialSpec> identity_suite_families() {
    return {
        PotentialSpec::zero_potential(),
        PotentialSpec::krein_exp_potential(1.0, 1.0),
        PotentialSpec::compact_const_potential(0.8, 0.0, 2.0),
        PotentialSpec::table_potential(
            {{0.0, 0.4, -0.3}, {0.5, -0.2, 0.5}, {1.0, 0.6, 0.1}, {1.5, 0.0, -0.4}, {2.0, 0.3, 0.2}},
            true),
    };
}

}  // namespace krein
