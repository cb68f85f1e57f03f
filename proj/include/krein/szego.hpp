#pragma once

#include "krein/dirac.hpp"
#include "krein/entropy.hpp"

namespace krein {

// ---------------------------------------------------------------------------
// Inverse Szego function Pi of the spectral measure: on C+ the limit of
// P_*(r, z), normalized so Pi(i) > 0; below the axis either the compact-exact
// evaluator (P_* frozen past the support) or the Christoffel-Darboux integral
//     Pi(z) = (z + ih) / (i conj(Pi(ih))) int_0^inf P(x,z) conj(P(x,ih)) dx,
// valid for Im z > -delta/4 when E_Q(r) = O(e^{-delta r}).
// ---------------------------------------------------------------------------

struct SzegoLimitRaw {
    cplx value;      // un-normalized limit of P_*
    double spread;   // trailing-window variation
    double r_used;
};

namespace detail {

inline SzegoLimitRaw szego_limit_block(const KreinTrace& tr, double tol) {
    SzegoLimitRaw out;
    const double rmax = tr.rmax();
    out.value = tr.Pstar.back();
    out.r_used = rmax;
    out.spread = 0.0;
    for (int k = 1; k <= 5; ++k) {
        double r = rmax * (1.0 - 0.02 * k);
        std::size_t idx = tr.index_at(r);
        out.spread = std::max(out.spread, std::abs(tr.Pstar[idx] - out.value));
    }
    if (!(out.spread < tol))
        throw numeric_error("szego_limit: trailing spread " + std::to_string(out.spread) +
                            " not below tolerance by rmax=" + std::to_string(rmax));
    return out;
}

}  // namespace detail

// Raw limit of P_*(r, z) for Im z >= 0 plus the normalizing phase gamma such
// that e^{-i gamma} lim P_*(r, i) > 0. One joint solve keeps the grids shared.
struct SzegoLimitResult {
    cplx value;     // normalized: e^{-i gamma} lim P_*
    double gamma;
    double spread;
    double r_used;
};

inline SzegoLimitResult szego_limit_full(const KreinCoefficient& a, cplx z, double rmax = 0,
                                         double tol = 1e-9) {
    if (z.imag() < 0) throw std::invalid_argument("szego_limit: need Im z >= 0");
    if (rmax <= 0) rmax = default_rmax(a);
    KreinSystemSolver solver(a, {{z, +1}, {cplx(0.0, 1.0), +1}});
    KreinSolveResult res = solver.run(rmax, 1e-13, std::min(1e-10, 0.1 * tol));

    auto trace_of = [&](std::size_t b) {
        KreinTrace tr;
        tr.z = res.blocks[b].z;
        tr.tol = tol;
        tr.a = a;
        tr.grid = res.grid;
        tr.P.resize(res.grid.size());
        tr.Pstar.resize(res.grid.size());
        tr.cum_abs2_P.assign(res.grid.size(), 0.0);
        for (std::size_t k = 0; k < res.grid.size(); ++k) {
            tr.P[k] = res.blocks[b].P_true(k);
            tr.Pstar[k] = res.blocks[b].Pstar_true(k);
        }
        return tr;
    };
    KreinTrace tr_z = trace_of(0), tr_i = trace_of(1);
    SzegoLimitRaw at_z = detail::szego_limit_block(tr_z, tol);
    SzegoLimitRaw at_i = detail::szego_limit_block(tr_i, tol);
    SzegoLimitResult out;
    out.gamma = std::arg(at_i.value);
    out.value = std::exp(-kI * out.gamma) * at_z.value;
    out.spread = std::max(at_z.spread, at_i.spread);
    out.r_used = at_z.r_used;
    return out;
}

inline cplx szego_limit(const KreinCoefficient& a, cplx z, double rmax = 0, double tol = 1e-9) {
    return szego_limit_full(a, z, rmax, tol).value;
}

// Exact evaluator for compactly supported coefficients: P_*' = -a P vanishes
// past the support, so Pi(z) = e^{-i gamma} P_*(L, z) is entire.
inline cplx szego_compact(const KreinCoefficient& a, cplx z, double tol = 1e-10) {
    if (!std::isfinite(a.support_radius))
        throw std::invalid_argument("szego_compact: coefficient must have finite support");
    const double L = a.support_radius;
    KreinSystemSolver solver(a, {{z, +1}, {cplx(0.0, 1.0), +1}});
    KreinSolveResult res = solver.run(L, 1e-13, std::min(1e-11, 0.1 * tol), /*store=*/false);
    cplx ps_z = res.blocks[0].Pstar_true(res.grid.size() - 1);
    cplx ps_i = res.blocks[1].Pstar_true(res.grid.size() - 1);
    return std::exp(-kI * std::arg(ps_i)) * ps_z;
}

// Entropy decay rate delta backing the continuation strip; +inf for compactly
// supported coefficients (E_Q vanishes identically past the support).
inline double estimate_entropy_decay(const KreinCoefficient& a) {
    if (std::isfinite(a.support_radius)) return kInf;
    PotentialSpec Q = dirac_for_krein(a);
    EntropyProfile prof = entropy_profile(Q, linear_grid(1.0, 4.0, 0.25));
    return fit_decay_rate(prof, 1.0, 4.0);
}

// ---------------------------------------------------------------------------
// Christoffel-Darboux continuation.
// ---------------------------------------------------------------------------

struct CdOptions {
    double anchor_h = 0;   // 0: default delta/2 (or 1.0 when delta = inf)
    double rmax = 0;       // 0: grow adaptively from default_rmax up to rmax_cap
    double rmax_cap = 400;
    double tol = 1e-8;
    double delta = -1;     // < 0: estimate from the entropy profile
};

namespace detail {

struct CdAnchor {
    double h;
    double delta;
    cplx pi_ih;  // normalized Pi(i h)
};

inline CdAnchor make_cd_anchor(const KreinCoefficient& a, CdOptions opt) {
    CdAnchor anchor;
    anchor.delta = opt.delta >= 0 ? opt.delta : estimate_entropy_decay(a);
    anchor.h = opt.anchor_h > 0 ? opt.anchor_h
                                : (std::isfinite(anchor.delta) ? anchor.delta / 2.0 : 1.0);
    if (std::isfinite(anchor.delta) && !(anchor.h > anchor.delta / 4.0))
        throw std::invalid_argument("cd continuation: anchor h must exceed delta/4");
    cplx pi_ih = std::isfinite(a.support_radius)
                     ? szego_compact(a, cplx(0.0, anchor.h))
                     : szego_limit(a, cplx(0.0, anchor.h), opt.rmax, 1e-9);
    anchor.pi_ih = pi_ih;
    return anchor;
}

// lower edge of the usable strip for the evaluation point
inline double cd_strip_floor(const CdAnchor& anchor) {
    if (std::isfinite(anchor.delta)) return -anchor.delta / 4.0;
    return -anchor.h;  // compact: the exact tail formula has its pole at -ih
}

inline cplx szego_extend_cd_impl(const KreinCoefficient& a, cplx z, const CdAnchor& anchor,
                                 const CdOptions& opt) {
    const double h = anchor.h;
    const double floor_im = cd_strip_floor(anchor);
    if (!(z.imag() > floor_im + 1e-12))
        throw std::invalid_argument(
            "cd continuation: Im z too deep for the estimated decay; usable strip Im z > " +
            std::to_string(floor_im));

    const bool reflected = z.imag() < 0;
    std::vector<KreinBlockSpec> blocks;
    std::vector<KreinAugSpec> augs;
    if (!reflected) {
        blocks = {{z, +1}, {cplx(0.0, h), +1}};
        augs = {{0, 1, KreinAugSpec::Comp::P, KreinAugSpec::Comp::P, {}}};
    } else {
        blocks = {{std::conj(z), +1}, {cplx(0.0, -h), +1}};
        augs = {{1, 0, KreinAugSpec::Comp::Pstar, KreinAugSpec::Comp::Pstar, kI * z - h}};
    }
    KreinSystemSolver solver(a, blocks, augs);

    const bool compact = std::isfinite(a.support_radius);
    double R = compact ? a.support_radius
                       : std::min(opt.rmax > 0 ? opt.rmax : default_rmax(a), opt.rmax_cap);
    cplx integral;
    if (compact) {
        KreinSolveResult res = solver.run(R, 1e-13, 1e-11, /*store=*/false);
        integral = res.augs[0].back();
        // exact free tail past the support: both factors evolve in closed form
        const auto& b0 = res.blocks[0];
        const auto& b1 = res.blocks[1];
        std::size_t last = res.grid.size() - 1;
        if (!reflected) {
            // P(x,z) = P(R,z) e^{iz(x-R)}, P(x,ih) = P(R,ih) e^{-h(x-R)} past R
            cplx prod = b0.P_true(last) * std::conj(b1.P_true(last));
            integral += prod / (h - kI * z);
        } else {
            double mag = (kI * z - h).real() * R + b0.logscale[last] + b1.logscale[last];
            double ph = (kI * z).imag() * R;
            cplx factor = std::exp(mag) * cplx(std::cos(ph), std::sin(ph));
            integral += factor * std::conj(b0.Pstar[last]) * b1.Pstar[last] / (h - kI * z);
        }
    } else {
        // grow the radius until the measured geometric tail drops below tol
        double target = opt.rmax > 0 ? std::min(opt.rmax, opt.rmax_cap) : opt.rmax_cap;
        double Rcur = R;
        KreinSolveResult res = solver.run(Rcur, 1e-13, 1e-11);
        for (;;) {
            integral = res.augs[0].back();
            // trailing unit-interval increments
            auto F_at = [&](double r) {
                auto it = std::upper_bound(res.grid.begin(), res.grid.end(), r);
                std::size_t idx = it == res.grid.begin()
                                      ? 0
                                      : static_cast<std::size_t>(it - res.grid.begin()) - 1;
                return res.augs[0][idx];
            };
            double d1 = std::abs(F_at(Rcur) - F_at(Rcur - 1.0));
            double d0 = std::abs(F_at(Rcur - 1.0) - F_at(Rcur - 2.0));
            double rho = d0 > 0 ? d1 / d0 : 0.0;
            double tail = rho < 0.995 ? d1 * rho / (1.0 - rho) : kInf;
            double scale = std::max(1e-30, std::abs(integral));
            if (tail <= opt.tol * scale) break;
            if (Rcur >= target)
                throw numeric_error("cd continuation: tail estimate " + std::to_string(tail) +
                                    " above tolerance at rmax=" + std::to_string(Rcur) +
                                    "; increase rmax or move z away from the strip edge");
            double Rnext = std::min(target, Rcur * 1.5);
            KreinSolveResult more = solver.run(Rnext, 1e-13, 1e-11);
            res.grid.insert(res.grid.end(), more.grid.begin(), more.grid.end());
            res.augs[0].insert(res.augs[0].end(), more.augs[0].begin(), more.augs[0].end());
            Rcur = Rnext;
        }
    }
    return (z + kI * h) / (kI * std::conj(anchor.pi_ih)) * integral;
}

}  // namespace detail

inline cplx szego_extend_cd(const KreinCoefficient& a, cplx z, CdOptions opt = {}) {
    detail::CdAnchor anchor = detail::make_cd_anchor(a, opt);
    return detail::szego_extend_cd_impl(a, z, anchor, opt);
}

// ---------------------------------------------------------------------------
// Evaluator facade over the three methods.
// ---------------------------------------------------------------------------

enum class SzegoMethod { limit, cd_integral, compact_exact };

inline const char* method_name(SzegoMethod m) {
    switch (m) {
        case SzegoMethod::limit: return "limit";
        case SzegoMethod::cd_integral: return "cd-integral";
        case SzegoMethod::compact_exact: return "compact-exact";
    }
    return "?";
}

struct AnalyticEvaluator {
    SzegoMethod method = SzegoMethod::limit;
    KreinCoefficient a;
    double y0 = 0.0;       // region Im z > y0
    double gamma = 0.0;    // normalization phase (diagnostic)
    double anchor_h = 0.0; // cd only
    double delta = kInf;
    double tol = 1e-9;
    double rmax = 0.0;
    detail::CdAnchor cd_anchor{};  // cached quadrature anchor data

    cplx operator()(cplx z) const {
        switch (method) {
            case SzegoMethod::limit:
                if (z.imag() < y0)
                    throw std::invalid_argument("evaluator(limit): point below the region");
                return szego_limit(a, z, rmax, tol);
            case SzegoMethod::compact_exact:
                return szego_compact(a, z, tol);
            case SzegoMethod::cd_integral: {
                CdOptions opt;
                opt.anchor_h = anchor_h;
                opt.rmax = rmax;
                opt.tol = tol;
                opt.delta = delta;
                return detail::szego_extend_cd_impl(a, z, cd_anchor, opt);
            }
        }
        throw std::logic_error("evaluator: bad method");
    }
};

inline AnalyticEvaluator make_szego_evaluator(const KreinCoefficient& a, SzegoMethod method,
                                              double tol = 1e-9, double anchor_h = 0.0,
                                              double rmax = 0.0) {
    AnalyticEvaluator ev;
    ev.method = method;
    ev.a = a;
    ev.tol = tol;
    ev.rmax = rmax;
    switch (method) {
        case SzegoMethod::limit: {
            ev.y0 = 0.0;
            SzegoLimitResult probe = szego_limit_full(a, cplx(0.0, 1.0), rmax, tol);
            ev.gamma = probe.gamma;
            break;
        }
        case SzegoMethod::compact_exact: {
            if (!std::isfinite(a.support_radius))
                throw std::invalid_argument("compact_exact evaluator needs finite support");
            ev.y0 = -kInf;
            ev.delta = kInf;
            KreinSystemSolver solver(a, {{cplx(0.0, 1.0), +1}});
            KreinSolveResult res = solver.run(a.support_radius, 1e-13, 1e-11, false);
            ev.gamma = std::arg(res.blocks[0].Pstar_true(res.grid.size() - 1));
            break;
        }
        case SzegoMethod::cd_integral: {
            CdOptions opt;
            opt.anchor_h = anchor_h;
            opt.rmax = rmax;
            opt.tol = std::max(tol, 1e-10);
            ev.cd_anchor = detail::make_cd_anchor(a, opt);
            ev.anchor_h = ev.cd_anchor.h;
            ev.delta = ev.cd_anchor.delta;
            ev.y0 = detail::cd_strip_floor(ev.cd_anchor);
            break;
        }
    }
    return ev;
}

// Duality residual |conj(Pi(conj z)) PiHat(z) + Pi(z) conj(PiHat(conj z)) - 2|
// evaluated with the raw (un-normalized) limits, where the identity is exact
// for any coefficient; for real coefficients gamma = 0 and raw = normalized.
inline double duality_residual(const AnalyticEvaluator& pi, const AnalyticEvaluator& pi_hat,
                               cplx z) {
    cplx g = std::exp(kI * pi.gamma), gh = std::exp(kI * pi_hat.gamma);
    cplx a = std::conj(g * pi(std::conj(z))) * (gh * pi_hat(z));
    cplx b = (g * pi(z)) * std::conj(gh * pi_hat(std::conj(z)));
    return std::abs(a + b - 2.0);
}

// Spectral density w(x) = |Pi(x)|^{-2} on the real axis.
inline double spectral_density(const AnalyticEvaluator& pi_ev, double x, double zero_tol = 1e-8) {
    cplx v = pi_ev(cplx(x, 0.0));
    if (std::abs(v) < zero_tol)
        throw numeric_error("spectral_density: Pi(x) vanishes within tolerance at x = " +
                            std::to_string(x) + "; real-axis zero indicates a numerical problem");
    return 1.0 / abs2(v);
}

// ---------------------------------------------------------------------------
// Weyl function as e^{i gamma_m} PiHat / Pi; gamma_m is pinned against the
// direct Krein-route value at the reference point z = 2i.
// ---------------------------------------------------------------------------

struct WeylRatio {
    AnalyticEvaluator pi;       // for the coefficient a
    AnalyticEvaluator pi_hat;   // for the dual coefficient -a
    double gamma_m = kPi / 2;   // e^{i gamma_m} = i for real coefficients
    double pole_tol = 1e-8;

    cplx operator()(cplx z) const {
        cplx bottom = pi(z);
        if (std::abs(bottom) < pole_tol)
            throw numeric_error("weyl_ratio: |Pi(z)| = " + std::to_string(std::abs(bottom)) +
                                " below the pole threshold (resonance nearby)");
        return std::exp(kI * gamma_m) * pi_hat(z) / bottom;
    }
};

inline KreinCoefficient negate_coefficient(const KreinCoefficient& a) {
    KreinCoefficient b = a;
    switch (a.family) {
        case KreinFamily::zero: break;
        case KreinFamily::exponential: b.c = -a.c; break;
        case KreinFamily::compact_const: b.const_value = -a.const_value; break;
        case KreinFamily::table:
            for (auto& v : b.values) v = -v;
            break;
        case KreinFamily::functional: {
            auto f = a.fn;
            b.fn = [f](double r) { return -f(r); };
            break;
        }
    }
    return b;
}

inline WeylRatio make_weyl_ratio(const KreinCoefficient& a, SzegoMethod method, double tol = 1e-9,
                                 double anchor_h = 0.0, double rmax = 0.0) {
    WeylRatio wr;
    wr.pi = make_szego_evaluator(a, method, tol, anchor_h, rmax);
    wr.pi_hat = make_szego_evaluator(negate_coefficient(a), method, tol, anchor_h, rmax);
    // reference match at z_ref = 2i against the direct limit
    const cplx z_ref(0.0, 2.0);
    PotentialSpec Q = dirac_for_krein(a);
    cplx m_ref = weyl_direct(Q, z_ref, rmax > 0 ? rmax : 0.0, 1e-10);
    cplx ratio = wr.pi_hat(z_ref) / wr.pi(z_ref);
    wr.gamma_m = std::arg(m_ref / ratio);
    return wr;
}

inline cplx weyl_ratio(const WeylRatio& wr, cplx z) { return wr(z); }

// ---------------------------------------------------------------------------
// Regularized Krein system. Inputs are assembled from the Weyl functions of
// the shifted Hamiltonians:
//   I(rho) = Im m_rho(i), R(rho) = Re m_rho(i), h1(rho) = H(rho)_{11},
//   -K' = (I h1 + 1/(I h1) - 2) + (R'/I)^2 / (4 I h1),
//   I'/I =  I h1 - 1/(I h1) - (R'/I)^2 / (4 I h1),
// all on the Hamiltonian scale rho; the Krein-scale system uses r = 2 rho:
//   f1(r) = -(1/4) e^{2i u(r/2)} [R'/I + i I'/I](r/2),  f2(r) = K'(r/2)/4,
//   u(rho) = int_0^rho R'/(2I).
// Initial values P~*_0 = P~_0 = I(0)^{-1/2} keep the reflection formula and
// the reproducing-kernel identity valid at r = 0.
// ---------------------------------------------------------------------------

struct RegularizedInputs {
    std::vector<double> rho_grid;   // Hamiltonian scale, uniform spacing
    std::vector<double> I, R, h1;
    std::vector<double> Rprime, Kprime, IprimeOverI, u;
    double T = 0;
    double max_disk_radius = 0;

    double spacing() const { return rho_grid.size() > 1 ? rho_grid[1] - rho_grid[0] : 0.0; }
    double rho_max() const { return rho_grid.empty() ? 0.0 : rho_grid.back(); }

    double interp(const std::vector<double>& tab, double rho) const {
        const double h = spacing();
        if (rho <= rho_grid.front()) return tab.front();
        if (rho >= rho_grid.back()) return tab.back();
        double s = (rho - rho_grid.front()) / h;
        std::size_t j = std::min(static_cast<std::size_t>(s), rho_grid.size() - 2);
        double w = s - static_cast<double>(j);
        // cubic Hermite with finite-difference slopes
        double y0 = tab[j], y1 = tab[j + 1];
        double m0 = j > 0 ? 0.5 * (tab[j + 1] - tab[j - 1]) : tab[j + 1] - tab[j];
        double m1 = j + 2 < tab.size() ? 0.5 * (tab[j + 2] - tab[j]) : tab[j + 1] - tab[j];
        double w2 = w * w, w3 = w2 * w;
        return (2 * w3 - 3 * w2 + 1) * y0 + (w3 - 2 * w2 + w) * m0 + (-2 * w3 + 3 * w2) * y1 +
               (w3 - w2) * m1;
    }

    cplx f1(double r) const {
        const double rho = 0.5 * r;
        double rp_over_I = interp(Rprime, rho) / interp(I, rho);
        double ip_over_I = interp(IprimeOverI, rho);
        double phase = 2.0 * interp(u, rho);
        return -0.25 * std::exp(kI * phase) * cplx(rp_over_I, ip_over_I);
    }
    double f2(double r) const { return 0.25 * interp(Kprime, 0.5 * r); }
};

inline RegularizedInputs regularized_inputs(const PotentialSpec& Q,
                                            const std::vector<double>& rho_grid, double T = 14.0,
                                            double disk_tol = 1e-6, unsigned threads = 0) {
    if (rho_grid.size() < 5)
        throw std::invalid_argument("regularized_inputs: need >= 5 grid points");
    const double h = rho_grid[1] - rho_grid[0];
    for (std::size_t i = 1; i < rho_grid.size(); ++i)
        if (std::abs(rho_grid[i] - rho_grid[i - 1] - h) > 1e-9)
            throw std::invalid_argument("regularized_inputs: grid must be uniform");

    RegularizedInputs in;
    in.rho_grid = rho_grid;
    in.T = T;
    const std::size_t n = rho_grid.size();
    in.I.assign(n, 0.0);
    in.R.assign(n, 0.0);
    in.h1.assign(n, 0.0);
    std::vector<double> radius(n, 0.0);

    parallel_for(
        n,
        [&](std::size_t k) {
            double rho = rho_grid[k];
            Mat2d Nrho = dirac_N0(Q, rho);
            WeylDisk d = weyl_canonical_shifted(Q, cplx(0.0, 1.0), T, rho, Nrho);
            in.I[k] = d.center.imag();
            in.R[k] = d.center.real();
            radius[k] = d.radius;
            in.h1[k] = Nrho.a * Nrho.a + Nrho.c * Nrho.c;
        },
        threads);
    in.max_disk_radius = *std::max_element(radius.begin(), radius.end());
    if (in.max_disk_radius > disk_tol)
        throw numeric_error("regularized_inputs: Weyl disk radius " +
                            std::to_string(in.max_disk_radius) + " above tolerance; increase T");

    in.Rprime.assign(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        if (k == 0)
            in.Rprime[k] = (in.R[1] - in.R[0]) / h;
        else if (k + 1 == n)
            in.Rprime[k] = (in.R[n - 1] - in.R[n - 2]) / h;
        else
            in.Rprime[k] = (in.R[k + 1] - in.R[k - 1]) / (2.0 * h);
    }
    in.Kprime.assign(n, 0.0);
    in.IprimeOverI.assign(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        double Ih = in.I[k] * in.h1[k];
        if (!(Ih > 0))
            throw numeric_error("regularized_inputs: I*h1 <= 0 at rho = " +
                                std::to_string(rho_grid[k]));
        double r_over_I = in.Rprime[k] / in.I[k];
        in.Kprime[k] = -((Ih + 1.0 / Ih - 2.0) + 0.25 * r_over_I * r_over_I / Ih);
        in.IprimeOverI[k] = Ih - 1.0 / Ih - 0.25 * r_over_I * r_over_I / Ih;
    }
    in.u.assign(n, 0.0);
    for (std::size_t k = 1; k < n; ++k)
        in.u[k] = in.u[k - 1] +
                  0.5 * h * (in.Rprime[k - 1] / (2.0 * in.I[k - 1]) + in.Rprime[k] / (2.0 * in.I[k]));
    return in;
}

struct RegularizedTrace {
    cplx z;
    std::vector<double> grid;  // Krein scale
    std::vector<cplx> Pt, Pt_star;
};

// Integrates the regularized system on the Krein scale [0, rmax]; requires
// the input tables to cover rho = rmax/2.
inline RegularizedTrace regularized_solve(const RegularizedInputs& in, cplx z, double rmax,
                                          double tol = 1e-10) {
    if (0.5 * rmax > in.rho_max() + 1e-9)
        throw std::invalid_argument("regularized_solve: inputs cover only rho <= " +
                                    std::to_string(in.rho_max()));
    RegularizedTrace tr;
    tr.z = z;
    const double init = 1.0 / std::sqrt(in.I.front());
    std::vector<double> y = {init, 0.0, init, 0.0};  // P~*, P~
    auto rhs = [&in, z](double r, const double* yv, double* dy) {
        cplx Ps(yv[0], yv[1]), Pt(yv[2], yv[3]);
        cplx f1 = in.f1(r);
        double f2 = in.f2(r);
        cplx dPs = (z - kI) * f1 * Pt + kI * z * f2 * Ps;
        cplx dPt = kI * z * Pt + (z + kI) * std::conj(f1) * Ps - kI * z * f2 * Pt;
        dy[0] = dPs.real();
        dy[1] = dPs.imag();
        dy[2] = dPt.real();
        dy[3] = dPt.imag();
    };
    OdeOptions opt;
    opt.abs_tol = std::min(1e-12, 0.01 * tol);
    opt.rel_tol = tol;
    integrate_ode(rhs, 0.0, rmax, y, opt, [&tr](double r, const double* yv) {
        tr.grid.push_back(r);
        tr.Pt_star.emplace_back(yv[0], yv[1]);
        tr.Pt.emplace_back(yv[2], yv[3]);
    });
    return tr;
}

}  // namespace krein
