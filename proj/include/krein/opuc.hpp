#pragma once

#include "krein/quadrature.hpp"

namespace krein {

// ---------------------------------------------------------------------------
// Desk-scale orthogonal polynomials on the unit circle: Szego recursion
//   Phi_{n+1}(z) = z Phi_n(z) - conj(alpha_n) Phi_n^*(z),
// Christoffel function at the origin, and the Nevai-Totik decay probe.
// ---------------------------------------------------------------------------

struct SchurParameters {
    std::vector<cplx> alpha;

    void validate() const {
        for (std::size_t k = 0; k < alpha.size(); ++k)
            if (!(std::abs(alpha[k]) < 1.0))
                throw std::invalid_argument("SchurParameters: |alpha_" + std::to_string(k) +
                                            "| >= 1");
    }
};

struct CirclePolynomials {
    int degree = 0;
    std::vector<cplx> phi;       // ascending coefficients of the monic Phi_n
    std::vector<cplx> phi_star;  // Phi_n^*(z) = z^n conj(Phi_n(1/conj z))

    cplx eval_phi_star(cplx z) const {
        cplx acc{};
        for (std::size_t k = phi_star.size(); k-- > 0;) acc = acc * z + phi_star[k];
        return acc;
    }
};

inline std::vector<cplx> reversed_conjugate(const std::vector<cplx>& c) {
    std::vector<cplx> out(c.size());
    for (std::size_t k = 0; k < c.size(); ++k) out[k] = std::conj(c[c.size() - 1 - k]);
    return out;
}

inline CirclePolynomials szego_recursion(const SchurParameters& params) {
    params.validate();
    std::vector<cplx> phi = {1.0};
    std::vector<cplx> star = {1.0};
    for (cplx a : params.alpha) {
        std::vector<cplx> next(phi.size() + 1, cplx(0.0));
        for (std::size_t k = 0; k < phi.size(); ++k) next[k + 1] = phi[k];     // z Phi_n
        for (std::size_t k = 0; k < star.size(); ++k) next[k] -= std::conj(a) * star[k];
        phi = std::move(next);
        star = reversed_conjugate(phi);
    }
    CirclePolynomials out;
    out.degree = static_cast<int>(phi.size()) - 1;
    out.phi = std::move(phi);
    out.phi_star = std::move(star);
    return out;
}

// lambda_n(0) = prod (1 - |alpha_k|^2)
inline double christoffel_lambda0(const SchurParameters& params) {
    params.validate();
    double prod = 1.0;
    for (cplx a : params.alpha) prod *= 1.0 - abs2(a);
    return prod;
}

// Brute-force oracle: for the Bernstein-Szego measure w = prod(1-|a_k|^2) /
// |Phi_n^*|^2 induced by alpha, minimize ||P||^2 over deg <= n, P(0) = 1 by
// explicit normal equations on a uniform circle grid. min = 1 / (G^{-1})_00.
inline double christoffel_lambda0_bruteforce(const SchurParameters& params,
                                             std::size_t grid_n = 2048) {
    params.validate();
    CirclePolynomials polys = szego_recursion(params);
    const std::size_t n = params.alpha.size();
    const double norm_const = christoffel_lambda0(params);

    // Gram matrix G_{jk} = int z^j conj(z^k) w dm on the grid
    const std::size_t dim = n + 1;
    std::vector<cplx> G(dim * dim, cplx(0.0));
    for (std::size_t i = 0; i < grid_n; ++i) {
        double th = 2.0 * kPi * static_cast<double>(i) / static_cast<double>(grid_n);
        cplx z(std::cos(th), std::sin(th));
        double w = norm_const / abs2(polys.eval_phi_star(z));
        cplx zj(1.0);
        for (std::size_t j = 0; j < dim; ++j) {
            cplx zk(1.0);
            for (std::size_t k = 0; k < dim; ++k) {
                G[j * dim + k] += w * zj * std::conj(zk);
                zk *= z;
            }
            zj *= z;
        }
    }
    for (auto& g : G) g /= static_cast<double>(grid_n);

    // solve G x = e_0 by Gaussian elimination with partial pivoting
    std::vector<cplx> rhs(dim, cplx(0.0));
    rhs[0] = 1.0;
    for (std::size_t col = 0; col < dim; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < dim; ++r)
            if (std::abs(G[r * dim + col]) > std::abs(G[piv * dim + col])) piv = r;
        if (piv != col) {
            for (std::size_t c = 0; c < dim; ++c) std::swap(G[col * dim + c], G[piv * dim + c]);
            std::swap(rhs[col], rhs[piv]);
        }
        cplx d = G[col * dim + col];
        if (std::abs(d) == 0.0) throw numeric_error("lambda0 brute force: singular Gram matrix");
        for (std::size_t r = col + 1; r < dim; ++r) {
            cplx f = G[r * dim + col] / d;
            if (f == cplx(0.0)) continue;
            for (std::size_t c = col; c < dim; ++c) G[r * dim + c] -= f * G[col * dim + c];
            rhs[r] -= f * rhs[col];
        }
    }
    for (std::size_t col = dim; col-- > 0;) {
        for (std::size_t c = col + 1; c < dim; ++c) rhs[col] -= G[col * dim + c] * rhs[c];
        rhs[col] /= G[col * dim + col];
    }
    double x0 = rhs[0].real();
    if (!(x0 > 0)) throw numeric_error("lambda0 brute force: nonpositive quadratic form");
    return 1.0 / x0;
}

// Geometric coefficients alpha_k = rho^{k+1}: lambda_n(0) approaches
// lambda_inf(0) at the rate rho^{2n}; the fitted slope of log(lambda_n -
// lambda_inf) against n is compared with 2 log(1/rho).
struct NevaiTotikReport {
    double rho = 0;
    double fitted_rate = 0;
    double expected_rate = 0;  // 2 log(1/rho)
    double lambda_inf = 0;
    std::vector<double> n_values;
    std::vector<double> gaps;  // lambda_n - lambda_inf
};

inline NevaiTotikReport nevai_totik_probe(double rho, int n_max) {
    if (!(rho > 0 && rho < 1)) throw std::invalid_argument("nevai_totik_probe: rho in (0,1)");
    if (n_max < 6) throw std::invalid_argument("nevai_totik_probe: n_max >= 6");
    NevaiTotikReport rep;
    rep.rho = rho;
    rep.expected_rate = 2.0 * std::log(1.0 / rho);

    auto lambda_n = [rho](int n) {
        double prod = 1.0;
        for (int k = 0; k < n; ++k) prod *= 1.0 - std::pow(rho, 2 * (k + 1));
        return prod;
    };
    rep.lambda_inf = lambda_n(n_max + 400);  // tail below double precision

    for (int n = 2; n <= n_max; ++n) {
        double gap = lambda_n(n) - rep.lambda_inf;
        if (!(gap > 1e-12 * rep.lambda_inf)) break;  // below product round-off
        rep.n_values.push_back(n);
        rep.gaps.push_back(gap);
    }
    if (rep.n_values.size() < 8) throw numeric_error("nevai_totik_probe: gaps vanished too early");
    // fit the trailing half; early n carry O(rho^{2n}) corrections to the slope
    std::vector<double> xs, ys;
    for (std::size_t k = rep.n_values.size() / 2; k < rep.n_values.size(); ++k) {
        xs.push_back(rep.n_values[k]);
        ys.push_back(std::log(rep.gaps[k]));
    }
    LineFit f = fit_line(xs, ys);
    rep.fitted_rate = -f.slope;
    return rep;
}

}  // namespace krein
