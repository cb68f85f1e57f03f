#pragma once

#include "krein/ode.hpp"
#include "krein/potential.hpp"

namespace krein {

// ---------------------------------------------------------------------------
// Krein system
//     P'(r,z)  = i z P - conj(a(r)) P_*,   P(0)  = 1,
//     P_*'(r,z) = -a(r) P,                 P_*(0) = 1,
// solved for several (z, +-a) blocks on one shared adaptive grid, together
// with running integrals of block products advanced inside the same RK steps.
// Each block carries a log-scale so growing/decaying solutions keep relative
// accuracy; stored samples are (scaled value, log-scale) pairs.
// ---------------------------------------------------------------------------

struct KreinBlockSpec {
    cplx z;
    int sign = +1;  // coefficient is sign * a
};

struct KreinAugSpec {
    enum class Comp { P, Pstar };
    int i = 0, j = 0;            // value = factor * C_i * conj(C_j)
    Comp comp_i = Comp::P;
    Comp comp_j = Comp::P;
    cplx expo{};                 // factor = exp(expo * r)
};

struct KreinBlockTrace {
    cplx z;
    int sign = +1;
    std::vector<cplx> P, Pstar;      // scaled representation
    std::vector<double> logscale;    // true value = stored * exp(logscale)

    cplx P_true(std::size_t k) const { return P[k] * std::exp(logscale[k]); }
    cplx Pstar_true(std::size_t k) const { return Pstar[k] * std::exp(logscale[k]); }
};

struct KreinSolveResult {
    std::vector<double> grid;
    std::vector<KreinBlockTrace> blocks;
    std::vector<std::vector<cplx>> augs;  // cumulative values at grid points
    OdeStats stats;
};

namespace detail {

struct KreinEngineContext {
    const KreinCoefficient* a;
    std::vector<KreinBlockSpec> blocks;
    std::vector<KreinAugSpec> augs;
    std::vector<double> scales;  // per block, mutated by the rescale hook
};

inline cplx get_comp(const double* y, int block, KreinAugSpec::Comp c) {
    const double* base = y + 4 * block + (c == KreinAugSpec::Comp::P ? 0 : 2);
    return {base[0], base[1]};
}

}  // namespace detail

class KreinSystemSolver {
public:
    KreinSystemSolver(KreinCoefficient a, std::vector<KreinBlockSpec> blocks,
                      std::vector<KreinAugSpec> augs = {})
        : ctx_{nullptr, std::move(blocks), std::move(augs), {}}, a_(std::move(a)) {
        ctx_.a = &a_;
        ctx_.scales.assign(ctx_.blocks.size(), 0.0);
        state_.assign(4 * ctx_.blocks.size() + 2 * ctx_.augs.size(), 0.0);
        for (std::size_t b = 0; b < ctx_.blocks.size(); ++b) {
            state_[4 * b + 0] = 1.0;  // P = 1
            state_[4 * b + 2] = 1.0;  // P_* = 1
        }
        r_ = 0.0;
    }

    // Restart support: set the full state at radius r.
    void set_state(double r, std::vector<double> state, std::vector<double> scales) {
        r_ = r;
        state_ = std::move(state);
        ctx_.scales = std::move(scales);
    }

    const std::vector<double>& state() const { return state_; }
    const std::vector<double>& scales() const { return ctx_.scales; }
    double radius() const { return r_; }
    std::size_t n_blocks() const { return ctx_.blocks.size(); }

    // Advances to rmax; records samples at every accepted step when store=true.
    KreinSolveResult run(double rmax, double abs_tol, double rel_tol, bool store = true) {
        KreinSolveResult out;
        out.blocks.resize(ctx_.blocks.size());
        for (std::size_t b = 0; b < ctx_.blocks.size(); ++b) {
            out.blocks[b].z = ctx_.blocks[b].z;
            out.blocks[b].sign = ctx_.blocks[b].sign;
        }
        out.augs.resize(ctx_.augs.size());

        auto rhs = [this](double r, const double* y, double* dy) { eval_rhs(r, y, dy); };

        OdeOptions opt;
        opt.abs_tol = abs_tol;
        opt.rel_tol = rel_tol;
        opt.post_step = [this](double, double* y) { return rescale(y); };

        auto record = [this, &out, store](double r, const double* y) {
            if (!store) return;
            out.grid.push_back(r);
            for (std::size_t b = 0; b < ctx_.blocks.size(); ++b) {
                out.blocks[b].P.emplace_back(y[4 * b + 0], y[4 * b + 1]);
                out.blocks[b].Pstar.emplace_back(y[4 * b + 2], y[4 * b + 3]);
                out.blocks[b].logscale.push_back(ctx_.scales[b]);
            }
            const double* aug = y + 4 * ctx_.blocks.size();
            for (std::size_t k = 0; k < ctx_.augs.size(); ++k)
                out.augs[k].emplace_back(aug[2 * k], aug[2 * k + 1]);
        };

        out.stats = integrate_ode(rhs, r_, rmax, state_, opt, record);
        r_ = rmax;
        if (!store) record_final(out);
        return out;
    }

private:
    void record_final(KreinSolveResult& out) {
        out.grid.push_back(r_);
        for (std::size_t b = 0; b < ctx_.blocks.size(); ++b) {
            out.blocks[b].P.emplace_back(state_[4 * b + 0], state_[4 * b + 1]);
            out.blocks[b].Pstar.emplace_back(state_[4 * b + 2], state_[4 * b + 3]);
            out.blocks[b].logscale.push_back(ctx_.scales[b]);
        }
        const double* aug = state_.data() + 4 * ctx_.blocks.size();
        for (std::size_t k = 0; k < ctx_.augs.size(); ++k)
            out.augs[k].emplace_back(aug[2 * k], aug[2 * k + 1]);
    }

    void eval_rhs(double r, const double* y, double* dy) const {
        const cplx av = (*ctx_.a)(r);
        for (std::size_t b = 0; b < ctx_.blocks.size(); ++b) {
            const cplx ab = ctx_.blocks[b].sign > 0 ? av : -av;
            const cplx z = ctx_.blocks[b].z;
            const cplx P(y[4 * b + 0], y[4 * b + 1]);
            const cplx Ps(y[4 * b + 2], y[4 * b + 3]);
            const cplx dP = kI * z * P - std::conj(ab) * Ps;
            const cplx dPs = -ab * P;
            dy[4 * b + 0] = dP.real();
            dy[4 * b + 1] = dP.imag();
            dy[4 * b + 2] = dPs.real();
            dy[4 * b + 3] = dPs.imag();
        }
        double* daug = dy + 4 * ctx_.blocks.size();
        for (std::size_t k = 0; k < ctx_.augs.size(); ++k) {
            const auto& s = ctx_.augs[k];
            const cplx ci = detail::get_comp(y, s.i, s.comp_i);
            const cplx cj = detail::get_comp(y, s.j, s.comp_j);
            const double mag = s.expo.real() * r + ctx_.scales[s.i] + ctx_.scales[s.j];
            const double ph = s.expo.imag() * r;
            const cplx factor = std::exp(mag) * cplx(std::cos(ph), std::sin(ph));
            const cplx v = factor * ci * std::conj(cj);
            daug[2 * k] = v.real();
            daug[2 * k + 1] = v.imag();
        }
    }

    bool rescale(double* y) {
        bool changed = false;
        for (std::size_t b = 0; b < ctx_.blocks.size(); ++b) {
            double m = 0.0;
            for (int c = 0; c < 4; ++c) m = std::max(m, std::abs(y[4 * b + c]));
            if (m > 1e50 || (m > 0.0 && m < 1e-50)) {
                double lg = std::log(m);
                double f = std::exp(-lg);
                for (int c = 0; c < 4; ++c) y[4 * b + c] *= f;
                ctx_.scales[b] += lg;
                changed = true;
            }
        }
        return changed;
    }

    detail::KreinEngineContext ctx_;
    KreinCoefficient a_;
    std::vector<double> state_;
    double r_;
};

// ---------------------------------------------------------------------------
// Public trace type: solution of the Krein system (optionally with the dual
// system, solved simultaneously on the same grid) plus the running integral
// int_0^r |P|^2 used by the Christoffel function and the CD identities.
// ---------------------------------------------------------------------------

struct KreinTrace {
    cplx z;
    double tol = 1e-10;
    std::vector<double> grid;
    std::vector<cplx> P, Pstar;
    std::vector<cplx> dualP, dualPstar;  // empty unless with_dual
    std::vector<double> cum_abs2_P;      // int_0^{grid[k]} |P(s,z)|^2 ds
    KreinCoefficient a;

    bool has_dual() const { return !dualP.empty(); }
    double rmax() const { return grid.empty() ? 0.0 : grid.back(); }

    std::size_t index_at(double r) const {
        if (grid.empty() || r < grid.front() - 1e-12 || r > grid.back() + 1e-9)
            throw std::invalid_argument("KreinTrace: r outside trace extent");
        auto it = std::upper_bound(grid.begin(), grid.end(), r);
        return it == grid.begin() ? 0 : static_cast<std::size_t>(it - grid.begin()) - 1;
    }

    // int_0^r |P|^2, re-integrating the short leftover [grid[k], r].
    double cum_abs2_at(double r) const {
        std::size_t k = index_at(r);
        if (grid[k] == r) return cum_abs2_P[k];
        auto [val, ignored] = advance_from(k, r);
        (void)ignored;
        return val;
    }

    // (P, Pstar) at arbitrary r within the extent.
    std::pair<cplx, cplx> eval(double r) const {
        std::size_t k = index_at(r);
        if (grid[k] == r) return {P[k], Pstar[k]};
        auto [ignored, pv] = advance_from(k, r);
        (void)ignored;
        return pv;
    }

private:
    std::pair<double, std::pair<cplx, cplx>> advance_from(std::size_t k, double r) const {
        std::vector<double> y = {P[k].real(),     P[k].imag(),     Pstar[k].real(),
                                 Pstar[k].imag(), cum_abs2_P[k],   0.0};
        cplx zz = z;
        const KreinCoefficient& av = a;
        auto rhs = [zz, &av](double s, const double* yv, double* dy) {
            cplx Pv(yv[0], yv[1]), Ps(yv[2], yv[3]);
            cplx as = av(s);
            cplx dP = kI * zz * Pv - std::conj(as) * Ps;
            cplx dPs = -as * Pv;
            dy[0] = dP.real();
            dy[1] = dP.imag();
            dy[2] = dPs.real();
            dy[3] = dPs.imag();
            dy[4] = abs2(Pv);
            dy[5] = 0.0;
        };
        OdeOptions opt;
        opt.abs_tol = std::min(1e-12, tol);
        opt.rel_tol = tol;
        integrate_ode(rhs, grid[k], r, y, opt);
        return {y[4], {cplx(y[0], y[1]), cplx(y[2], y[3])}};
    }
};

inline double default_rmax(const KreinCoefficient& a) {
    return std::isfinite(a.support_radius) ? a.support_radius + 2.0 : 30.0;
}

// Solves the Krein system (and its dual when with_dual) up to rmax.
inline KreinTrace solve_krein(const KreinCoefficient& a, cplx z, double rmax, double tol = 1e-10,
                              bool with_dual = false) {
    if (!(rmax > 0)) throw std::invalid_argument("solve_krein: rmax must be positive");
    std::vector<KreinBlockSpec> blocks{{z, +1}};
    if (with_dual) blocks.push_back({z, -1});
    std::vector<KreinAugSpec> augs{{0, 0, KreinAugSpec::Comp::P, KreinAugSpec::Comp::P, {}}};
    KreinSystemSolver solver(a, blocks, augs);
    KreinSolveResult res = solver.run(rmax, std::min(1e-12, tol), tol);

    KreinTrace tr;
    tr.z = z;
    tr.tol = tol;
    tr.a = a;
    tr.grid = std::move(res.grid);
    const auto& b0 = res.blocks[0];
    tr.P.resize(tr.grid.size());
    tr.Pstar.resize(tr.grid.size());
    tr.cum_abs2_P.resize(tr.grid.size());
    for (std::size_t k = 0; k < tr.grid.size(); ++k) {
        tr.P[k] = b0.P_true(k);
        tr.Pstar[k] = b0.Pstar_true(k);
        tr.cum_abs2_P[k] = res.augs[0][k].real();
    }
    if (with_dual) {
        const auto& b1 = res.blocks[1];
        tr.dualP.resize(tr.grid.size());
        tr.dualPstar.resize(tr.grid.size());
        for (std::size_t k = 0; k < tr.grid.size(); ++k) {
            tr.dualP[k] = b1.P_true(k);
            tr.dualPstar[k] = b1.Pstar_true(k);
        }
    }
    return tr;
}

// Two-point solve sharing one grid, carrying the cross integral
// int_0^r P(s,z) conj(P(s,z')) ds needed by the reproducing kernel.
struct KreinPairTrace {
    KreinTrace first, second;      // first at z, second at z'
    std::vector<cplx> cum_cross;   // on the shared grid

    cplx cross_at(double r) const {
        std::size_t k = first.index_at(r);
        if (first.grid[k] == r) return cum_cross[k];
        // leftover below one step: advance the 4-dim pair system
        std::vector<double> y = {first.P[k].real(),      first.P[k].imag(),
                                 first.Pstar[k].real(),  first.Pstar[k].imag(),
                                 second.P[k].real(),     second.P[k].imag(),
                                 second.Pstar[k].real(), second.Pstar[k].imag(),
                                 cum_cross[k].real(),    cum_cross[k].imag()};
        cplx z1 = first.z, z2 = second.z;
        const KreinCoefficient& av = first.a;
        auto rhs = [z1, z2, &av](double s, const double* yv, double* dy) {
            cplx as = av(s);
            cplx P1(yv[0], yv[1]), Ps1(yv[2], yv[3]);
            cplx P2(yv[4], yv[5]), Ps2(yv[6], yv[7]);
            cplx d1 = kI * z1 * P1 - std::conj(as) * Ps1;
            cplx d1s = -as * P1;
            cplx d2 = kI * z2 * P2 - std::conj(as) * Ps2;
            cplx d2s = -as * P2;
            cplx dx = P1 * std::conj(P2);
            dy[0] = d1.real(); dy[1] = d1.imag();
            dy[2] = d1s.real(); dy[3] = d1s.imag();
            dy[4] = d2.real(); dy[5] = d2.imag();
            dy[6] = d2s.real(); dy[7] = d2s.imag();
            dy[8] = dx.real(); dy[9] = dx.imag();
        };
        OdeOptions opt;
        opt.abs_tol = std::min(1e-12, first.tol);
        opt.rel_tol = first.tol;
        integrate_ode(rhs, first.grid[k], r, y, opt);
        return {y[8], y[9]};
    }
};

inline KreinPairTrace solve_krein_pair(const KreinCoefficient& a, cplx z, cplx zp, double rmax,
                                       double tol = 1e-10) {
    std::vector<KreinBlockSpec> blocks{{z, +1}, {zp, +1}};
    std::vector<KreinAugSpec> augs{
        {0, 0, KreinAugSpec::Comp::P, KreinAugSpec::Comp::P, {}},   // |P(.,z)|^2
        {1, 1, KreinAugSpec::Comp::P, KreinAugSpec::Comp::P, {}},   // |P(.,z')|^2
        {0, 1, KreinAugSpec::Comp::P, KreinAugSpec::Comp::P, {}}};  // P(.,z) conj(P(.,z'))
    KreinSystemSolver solver(a, blocks, augs);
    KreinSolveResult res = solver.run(rmax, std::min(1e-12, tol), tol);

    KreinPairTrace pair;
    auto fill = [&](KreinTrace& tr, std::size_t b, std::size_t aug_idx) {
        tr.z = res.blocks[b].z;
        tr.tol = tol;
        tr.a = a;
        tr.grid = res.grid;
        tr.P.resize(res.grid.size());
        tr.Pstar.resize(res.grid.size());
        tr.cum_abs2_P.resize(res.grid.size());
        for (std::size_t k = 0; k < res.grid.size(); ++k) {
            tr.P[k] = res.blocks[b].P_true(k);
            tr.Pstar[k] = res.blocks[b].Pstar_true(k);
            tr.cum_abs2_P[k] = res.augs[aug_idx][k].real();
        }
    };
    fill(pair.first, 0, 0);
    fill(pair.second, 1, 1);
    pair.cum_cross = std::move(res.augs[2]);
    return pair;
}

// Reproducing kernel of PW_[0,r]: k_r(z', z) = (1/2pi) int_0^r P(s,z) conj(P(s,z')) ds.
inline cplx reproducing_kernel(const KreinPairTrace& pair, double r) {
    if (r > pair.first.rmax() + 1e-9)
        throw std::invalid_argument("reproducing_kernel: r beyond trace extent");
    return pair.cross_at(r) / (2.0 * kPi);
}

// Same kernel through the first Christoffel-Darboux formula; algebraic route,
// no quadrature. Used as the cross-check side.
inline cplx reproducing_kernel_cd(const KreinPairTrace& pair, double r) {
    auto [P1, Ps1] = pair.first.eval(r);
    auto [P2, Ps2] = pair.second.eval(r);
    cplx z = pair.first.z, zp = pair.second.z;
    cplx num = P1 * std::conj(P2) - Ps1 * std::conj(Ps2);
    cplx denom = kI * (z - std::conj(zp)) * 2.0 * kPi;
    return num / denom;
}

// Christoffel function m_r(z) = (int_0^r |P|^2)^{-1}; requires r > 0.
inline double christoffel_m(const KreinTrace& trace, double r) {
    if (!(r > 0)) throw std::invalid_argument("christoffel_m: require r > 0");
    double denom = trace.cum_abs2_at(r);
    if (denom <= 0) throw numeric_error("christoffel_m: vanishing energy integral");
    return 1.0 / denom;
}

}  // namespace krein
