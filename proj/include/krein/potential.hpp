#pragma once

#include <map>

#include "krein/common.hpp"
#include "krein/quadrature.hpp"

namespace krein {

// ---------------------------------------------------------------------------
// Dirac potentials Q = [-q p; p q] and Krein coefficients a, with the exact
// correspondence p_a(r) = -2 Re a(2r), q_a(r) = 2 Im a(2r). The spectral data
// of the Krein system with coefficient a lives on the Dirac operator with
// potential -Q_a; that convention is carried explicitly as a flag.
// ---------------------------------------------------------------------------

enum class PotentialFamily {
    zero,
    krein_exp,      // Dirac side of a(r) = c e^{-kappa r}: p(t) = 2c e^{-2 kappa t}
    compact_const,  // constant (p, q) on [0, L]
    compact_table,  // sampled (t, p, q), linear interpolation, finite support
    off_diagonal,   // q = 0, p(t) = amp e^{-kappa t}
    oscillatory,    // q = 0, p(x) = amp e^{beta x} sin(e^{gamma x})
    table,          // sampled, zero outside the grid, reported support +inf
};

inline const char* family_name(PotentialFamily f) {
    switch (f) {
        case PotentialFamily::zero: return "zero";
        case PotentialFamily::krein_exp: return "krein_exp";
        case PotentialFamily::compact_const: return "compact_const";
        case PotentialFamily::compact_table: return "compact_table";
        case PotentialFamily::off_diagonal: return "off_diagonal";
        case PotentialFamily::oscillatory: return "oscillatory";
        case PotentialFamily::table: return "table";
    }
    return "?";
}

struct TableSample {
    double t, p, q;
};

struct PotentialSpec {
    PotentialFamily family = PotentialFamily::zero;
    std::map<std::string, double> params;
    double support_radius = 0.0;            // +inf for non-compact families
    std::vector<TableSample> samples;       // table families only
    bool sign_flipped_vs_krein = false;     // true when this Q is Q_a of some a
                                            // whose spectral data lives on D_{-Q_a}

    double param(const std::string& key, double fallback) const {
        auto it = params.find(key);
        return it == params.end() ? fallback : it->second;
    }

    double p(double t) const {
        switch (family) {
            case PotentialFamily::zero: return 0.0;
            case PotentialFamily::krein_exp: {
                double c = param("c", 1.0), kappa = param("kappa", 1.0);
                return 2.0 * c * std::exp(-2.0 * kappa * t);
            }
            case PotentialFamily::compact_const:
                return t <= param("L", 1.0) ? param("p", 1.0) : 0.0;
            case PotentialFamily::off_diagonal:
                return param("amp", 2.0) * std::exp(-param("kappa", 2.0) * t);
            case PotentialFamily::oscillatory:
                return param("amp", 1.0) * std::exp(param("beta", 1.0) * t) *
                       std::sin(std::exp(param("gamma", 2.0) * t));
            case PotentialFamily::compact_table:
            case PotentialFamily::table:
                return interp(t).first;
        }
        return 0.0;
    }

    double q(double t) const {
        switch (family) {
            case PotentialFamily::compact_const:
                return t <= param("L", 1.0) ? param("q", 0.0) : 0.0;
            case PotentialFamily::compact_table:
            case PotentialFamily::table:
                return interp(t).second;
            default:
                return 0.0;
        }
    }

    Mat2d Q(double t) const {
        double pv = p(t), qv = q(t);
        return {-qv, pv, pv, qv};
    }

    bool off_diagonal_form() const {
        switch (family) {
            case PotentialFamily::zero:
            case PotentialFamily::krein_exp:
            case PotentialFamily::off_diagonal:
            case PotentialFamily::oscillatory:
                return true;
            case PotentialFamily::compact_const:
                return param("q", 0.0) == 0.0;
            case PotentialFamily::compact_table:
            case PotentialFamily::table:
                for (const auto& s : samples)
                    if (s.q != 0.0) return false;
                return true;
        }
        return false;
    }

    // Local angular frequency estimate; drives the integrator step cap.
    double local_frequency(double t) const {
        if (family != PotentialFamily::oscillatory) return 0.0;
        double gamma = param("gamma", 2.0);
        return gamma * std::exp(gamma * t);
    }

    void validate() const {
        if (family == PotentialFamily::compact_table || family == PotentialFamily::table) {
            if (samples.size() < 2)
                throw std::invalid_argument("table potential: need >= 2 samples");
            for (std::size_t i = 1; i < samples.size(); ++i)
                if (!(samples[i].t > samples[i - 1].t))
                    throw std::invalid_argument("table potential: grid must be strictly increasing");
            if (samples.front().t < 0)
                throw std::invalid_argument("table potential: grid must start at t >= 0");
        }
        for (const auto& [k, v] : params)
            if (!is_finite(v)) throw std::invalid_argument("potential param not finite: " + k);
    }

    PotentialSpec negated() const {
        PotentialSpec out = *this;
        switch (family) {
            case PotentialFamily::zero: break;
            case PotentialFamily::krein_exp: out.params["c"] = -param("c", 1.0); break;
            case PotentialFamily::compact_const:
                out.params["p"] = -param("p", 1.0);
                out.params["q"] = -param("q", 0.0);
                break;
            case PotentialFamily::off_diagonal: out.params["amp"] = -param("amp", 2.0); break;
            case PotentialFamily::oscillatory: out.params["amp"] = -param("amp", 1.0); break;
            case PotentialFamily::compact_table:
            case PotentialFamily::table:
                for (auto& s : out.samples) {
                    s.p = -s.p;
                    s.q = -s.q;
                }
                break;
        }
        out.sign_flipped_vs_krein = !sign_flipped_vs_krein;
        return out;
    }

    static PotentialSpec zero_potential() {
        PotentialSpec s;
        s.family = PotentialFamily::zero;
        s.support_radius = 0.0;
        return s;
    }
    static PotentialSpec krein_exp_potential(double c = 1.0, double kappa = 1.0) {
        PotentialSpec s;
        s.family = PotentialFamily::krein_exp;
        s.params = {{"c", c}, {"kappa", kappa}};
        s.support_radius = kInf;
        return s;
    }
    static PotentialSpec compact_const_potential(double p, double q, double L) {
        PotentialSpec s;
        s.family = PotentialFamily::compact_const;
        s.params = {{"p", p}, {"q", q}, {"L", L}};
        s.support_radius = L;
        return s;
    }
    static PotentialSpec off_diagonal_potential(double amp = 2.0, double kappa = 2.0) {
        PotentialSpec s;
        s.family = PotentialFamily::off_diagonal;
        s.params = {{"amp", amp}, {"kappa", kappa}};
        s.support_radius = kInf;
        return s;
    }
    static PotentialSpec oscillatory_potential(double amp = 1.0, double beta = 1.0,
                                               double gamma = 2.0) {
        PotentialSpec s;
        s.family = PotentialFamily::oscillatory;
        s.params = {{"amp", amp}, {"beta", beta}, {"gamma", gamma}};
        s.support_radius = kInf;
        return s;
    }
    static PotentialSpec table_potential(std::vector<TableSample> samples, bool compact) {
        PotentialSpec s;
        s.family = compact ? PotentialFamily::compact_table : PotentialFamily::table;
        s.samples = std::move(samples);
        s.support_radius = compact ? s.samples.back().t : kInf;
        s.validate();
        return s;
    }

private:
    std::pair<double, double> interp(double t) const {
        if (samples.empty() || t < samples.front().t || t > samples.back().t) return {0.0, 0.0};
        auto it = std::lower_bound(samples.begin(), samples.end(), t,
                                   [](const TableSample& s, double x) { return s.t < x; });
        if (it == samples.begin()) return {it->p, it->q};
        if (it == samples.end()) return {samples.back().p, samples.back().q};
        const TableSample& hi = *it;
        const TableSample& lo = *(it - 1);
        double w = (t - lo.t) / (hi.t - lo.t);
        return {lo.p + w * (hi.p - lo.p), lo.q + w * (hi.q - lo.q)};
    }
};

// ---------------------------------------------------------------------------
// Krein coefficient a on R+. Kept as a closed-form family where possible so
// conversions stay exact.
// ---------------------------------------------------------------------------

enum class KreinFamily { zero, exponential, compact_const, table, functional };

struct KreinCoefficient {
    KreinFamily family = KreinFamily::zero;
    double support_radius = kInf;
    // family parameters
    double c = 0.0, kappa = 1.0;       // exponential: a(r) = c e^{-kappa r}
    cplx const_value{};                // compact_const on [0, L=support_radius]
    std::vector<double> grid;          // table
    std::vector<cplx> values;          // table
    std::function<cplx(double)> fn;    // functional

    cplx operator()(double r) const {
        switch (family) {
            case KreinFamily::zero: return 0.0;
            case KreinFamily::exponential: return cplx(c * std::exp(-kappa * r), 0.0);
            case KreinFamily::compact_const: return r <= support_radius ? const_value : cplx(0.0);
            case KreinFamily::table: {
                if (grid.empty() || r < grid.front() || r > grid.back()) return 0.0;
                auto it = std::lower_bound(grid.begin(), grid.end(), r);
                std::size_t j = static_cast<std::size_t>(it - grid.begin());
                if (j == 0) return values.front();
                double w = (r - grid[j - 1]) / (grid[j] - grid[j - 1]);
                return values[j - 1] + w * (values[j] - values[j - 1]);
            }
            case KreinFamily::functional: return fn(r);
        }
        return 0.0;
    }

    bool real_valued() const {
        switch (family) {
            case KreinFamily::zero:
            case KreinFamily::exponential: return true;
            case KreinFamily::compact_const: return const_value.imag() == 0.0;
            case KreinFamily::table:
                for (cplx v : values)
                    if (v.imag() != 0.0) return false;
                return true;
            case KreinFamily::functional: return false;
        }
        return false;
    }

    static KreinCoefficient zero() { return {}; }
    static KreinCoefficient exponential(double c, double kappa = 1.0) {
        KreinCoefficient a;
        a.family = KreinFamily::exponential;
        a.c = c;
        a.kappa = kappa;
        a.support_radius = kInf;
        return a;
    }
    static KreinCoefficient constant(cplx value, double L) {
        KreinCoefficient a;
        a.family = KreinFamily::compact_const;
        a.const_value = value;
        a.support_radius = L;
        return a;
    }
    static KreinCoefficient table(std::vector<double> grid, std::vector<cplx> values) {
        if (grid.size() != values.size() || grid.size() < 2)
            throw std::invalid_argument("KreinCoefficient::table: bad sample arrays");
        for (std::size_t i = 1; i < grid.size(); ++i)
            if (!(grid[i] > grid[i - 1]))
                throw std::invalid_argument("KreinCoefficient::table: grid must increase");
        KreinCoefficient a;
        a.family = KreinFamily::table;
        a.grid = std::move(grid);
        a.values = std::move(values);
        a.support_radius = a.grid.back();
        return a;
    }
    static KreinCoefficient functional(std::function<cplx(double)> f, double support = kInf) {
        KreinCoefficient a;
        a.family = KreinFamily::functional;
        a.fn = std::move(f);
        a.support_radius = support;
        return a;
    }
};

// Q_a from a: p(r) = -2 Re a(2r), q(r) = 2 Im a(2r). The result is tagged:
// the spectral measure of the Krein system matches D_{-Q_a}, not D_{Q_a}.
inline PotentialSpec krein_to_dirac(const KreinCoefficient& a) {
    PotentialSpec out;
    switch (a.family) {
        case KreinFamily::zero:
            out = PotentialSpec::zero_potential();
            break;
        case KreinFamily::exponential:
            // -2 c e^{-2 kappa t} = krein_exp family with c -> -c
            out = PotentialSpec::krein_exp_potential(-a.c, a.kappa);
            break;
        case KreinFamily::compact_const:
            out = PotentialSpec::compact_const_potential(-2.0 * a.const_value.real(),
                                                         2.0 * a.const_value.imag(),
                                                         a.support_radius / 2.0);
            break;
        case KreinFamily::table: {
            std::vector<TableSample> samples;
            samples.reserve(a.grid.size());
            for (std::size_t i = 0; i < a.grid.size(); ++i)
                samples.push_back({a.grid[i] / 2.0, -2.0 * a.values[i].real(),
                                   2.0 * a.values[i].imag()});
            out = PotentialSpec::table_potential(std::move(samples), std::isfinite(a.support_radius));
            break;
        }
        case KreinFamily::functional: {
            // sampled fallback; functional coefficients are test-side only
            throw std::invalid_argument("krein_to_dirac: functional coefficients not supported");
        }
    }
    out.sign_flipped_vs_krein = true;
    return out;
}

// Inverse of krein_to_dirac on evaluations: a(r) = -p(r/2)/2 + i q(r/2)/2.
inline KreinCoefficient dirac_to_krein(const PotentialSpec& Q) {
    double support = std::isfinite(Q.support_radius) ? 2.0 * Q.support_radius : kInf;
    switch (Q.family) {
        case PotentialFamily::zero:
            return KreinCoefficient::zero();
        case PotentialFamily::krein_exp:
            return KreinCoefficient::exponential(-Q.param("c", 1.0), Q.param("kappa", 1.0));
        case PotentialFamily::off_diagonal: {
            // p(t) = amp e^{-kappa t}  ->  a(r) = -(amp/2) e^{-(kappa/2) r}
            return KreinCoefficient::exponential(-0.5 * Q.param("amp", 2.0),
                                                 0.5 * Q.param("kappa", 2.0));
        }
        case PotentialFamily::compact_const:
            return KreinCoefficient::constant(
                cplx(-0.5 * Q.param("p", 1.0), 0.5 * Q.param("q", 0.0)),
                2.0 * Q.param("L", 1.0));
        case PotentialFamily::compact_table:
        case PotentialFamily::table: {
            std::vector<double> grid;
            std::vector<cplx> values;
            grid.reserve(Q.samples.size());
            for (const auto& s : Q.samples) {
                grid.push_back(2.0 * s.t);
                values.emplace_back(-0.5 * s.p, 0.5 * s.q);
            }
            return KreinCoefficient::table(std::move(grid), std::move(values));
        }
        case PotentialFamily::oscillatory: {
            PotentialSpec copy = Q;
            auto f = [copy](double r) { return cplx(-0.5 * copy.p(0.5 * r), 0.0); };
            return KreinCoefficient::functional(f, support);
        }
    }
    return KreinCoefficient::zero();
}

// ---------------------------------------------------------------------------
// Oscillation functional sup_{t in [r, horizon]} | int_r^t p |.
// ---------------------------------------------------------------------------

// Generic sampled version: cumulative GK15 quadrature at resolution `step`
// with one extra level of refinement inside every cell. The result is a lower
// bound of the true supremum (sampled extrema only).
template <class F>
double oscillation_sup_sampled(const F& p, double r, double horizon, double step) {
    if (!(horizon > r)) throw std::invalid_argument("oscillation_sup: horizon must exceed r");
    if (!(step > 0)) throw std::invalid_argument("oscillation_sup: step must be positive");
    auto f = [&p](double x) {
        double v = p(x);
        if (!is_finite(v)) throw numeric_error("oscillation_sup: non-finite integrand sample");
        return cplx(v, 0.0);
    };
    double best = 0.0, cum = 0.0;
    double t = r;
    while (t < horizon) {
        double t2 = std::min(t + step, horizon);
        double mid = 0.5 * (t + t2);
        cplx v1, v2;
        double e1, e2;
        detail::gk15(f, t, mid, v1, e1);
        detail::gk15(f, mid, t2, v2, e2);
        cum += v1.real();
        best = std::max(best, std::abs(cum));
        cum += v2.real();
        best = std::max(best, std::abs(cum));
        t = t2;
    }
    return best;
}

// Substitution route for p(x) = amp e^{beta x} sin(e^{gamma x}):
// u = e^{gamma x} turns the primitive into (amp/gamma) int u^{beta/gamma - 1}
// sin u du, integrated lobe by lobe between the zeros of sin. The running
// integral is monotone within a lobe, so lobe boundaries carry the extrema.
inline double oscillation_sup_oscillatory(double amp, double beta, double gamma, double r,
                                          double horizon) {
    const double nu = beta / gamma;
    const double u0 = std::exp(gamma * r);
    const double u1 = std::exp(gamma * horizon);
    auto f = [nu](double u) { return cplx(std::pow(u, nu - 1.0) * std::sin(u), 0.0); };
    const double scale = amp / gamma;
    double cum = 0.0, best = 0.0;
    double lo = u0;
    double k = std::ceil(u0 / kPi);
    double hi = std::min(k * kPi, u1);
    while (lo < u1) {
        cplx v;
        double e;
        detail::gk15(f, lo, hi, v, e);
        cum += v.real();
        best = std::max(best, std::abs(scale * cum));
        lo = hi;
        k += 1.0;
        hi = std::min(k * kPi, u1);
    }
    return best;
}

inline double oscillation_sup(const PotentialSpec& Q, double r, double horizon, double step) {
    if (Q.family == PotentialFamily::oscillatory) {
        return oscillation_sup_oscillatory(Q.param("amp", 1.0), Q.param("beta", 1.0),
                                           Q.param("gamma", 2.0), r, horizon);
    }
    return oscillation_sup_sampled([&Q](double x) { return Q.p(x); }, r, horizon, step);
}

}  // namespace krein
