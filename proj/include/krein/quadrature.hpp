#pragma once

#include "krein/common.hpp"

namespace krein {

// ---------------------------------------------------------------------------
// Adaptive Gauss-Kronrod 7-15 quadrature on finite intervals. Complex-valued
// integrands are handled componentwise through the same node set.
// ---------------------------------------------------------------------------

namespace detail {

// G7K15 nodes/weights (QUADPACK dqk15).
inline constexpr double kXgk15[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr double kWgk15[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kWg7[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F>
void gk15(const F& f, double a, double b, cplx& result, double& err) {
    const double centr = 0.5 * (a + b);
    const double hlgth = 0.5 * (b - a);
    cplx fc = f(centr);
    cplx resg = kWg7[3] * fc;
    cplx resk = kWgk15[7] * fc;
    cplx fv1[7], fv2[7];
    for (int j = 0; j < 7; ++j) {
        double absc = hlgth * kXgk15[j];
        fv1[j] = f(centr - absc);
        fv2[j] = f(centr + absc);
        resk += kWgk15[j] * (fv1[j] + fv2[j]);
        if (j % 2 == 1) resg += kWg7[j / 2] * (fv1[j] + fv2[j]);
    }
    result = resk * hlgth;
    err = std::abs((resk - resg) * hlgth);
}

}  // namespace detail

struct QuadResult {
    cplx value{};
    double error = 0.0;
    std::size_t evaluations = 0;
};

// Globally adaptive bisection driven by the Kronrod error estimate.
template <class F>
QuadResult integrate_adaptive(const F& f, double a, double b, double abs_tol = 1e-12,
                              double rel_tol = 1e-10, std::size_t max_intervals = 20000) {
    struct Cell {
        double a, b, err;
        cplx val;
    };
    std::vector<Cell> cells;
    QuadResult out;
    cplx v;
    double e;
    detail::gk15(f, a, b, v, e);
    out.evaluations = 15;
    cells.push_back({a, b, e, v});
    auto total = [&cells] {
        cplx s{};
        double err = 0;
        for (const auto& c : cells) {
            s += c.val;
            err += c.err;
        }
        return std::pair<cplx, double>(s, err);
    };
    for (;;) {
        auto [sum, err] = total();
        if (err <= std::max(abs_tol, rel_tol * std::abs(sum))) {
            out.value = sum;
            out.error = err;
            return out;
        }
        if (cells.size() >= max_intervals)
            throw numeric_error("integrate_adaptive: interval budget exhausted, err=" +
                                std::to_string(err));
        std::size_t worst = 0;
        for (std::size_t i = 1; i < cells.size(); ++i)
            if (cells[i].err > cells[worst].err) worst = i;
        Cell c = cells[worst];
        double mid = 0.5 * (c.a + c.b);
        Cell left{c.a, mid, 0, {}}, right{mid, c.b, 0, {}};
        detail::gk15(f, left.a, left.b, left.val, left.err);
        detail::gk15(f, right.a, right.b, right.val, right.err);
        out.evaluations += 30;
        cells[worst] = left;
        cells.push_back(right);
    }
}

template <class F>
double integrate_adaptive_real(const F& f, double a, double b, double abs_tol = 1e-12,
                               double rel_tol = 1e-10) {
    auto g = [&f](double x) { return cplx(f(x), 0.0); };
    return integrate_adaptive(g, a, b, abs_tol, rel_tol).value.real();
}

// ---------------------------------------------------------------------------
// Radix-2 FFT, forward transform sum_j x_j e^{-2 pi i jk / n}. n power of two.
// ---------------------------------------------------------------------------

inline void fft_inplace(std::vector<cplx>& x) {
    const std::size_t n = x.size();
    if (n == 0 || (n & (n - 1)) != 0)
        throw std::invalid_argument("fft_inplace: size must be a power of two");
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(x[i], x[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        double ang = -2.0 * kPi / static_cast<double>(len);
        cplx wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            cplx w(1.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                cplx u = x[i + k];
                cplx v = x[i + k + len / 2] * w;
                x[i + k] = u + v;
                x[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

// Least-squares line y ~ a + b x; returns {intercept, slope, rms residual}.
struct LineFit {
    double intercept = 0, slope = 0, rms_residual = 0;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("fit_line: need >= 2 paired samples");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    double denom = n * sxx - sx * sx;
    if (denom == 0) throw std::invalid_argument("fit_line: degenerate abscissae");
    LineFit f;
    f.slope = (n * sxy - sx * sy) / denom;
    f.intercept = (sy - f.slope * sx) / n;
    double ss = 0;
    for (std::size_t i = 0; i < x.size(); ++i) ss += sqr(y[i] - f.intercept - f.slope * x[i]);
    f.rms_residual = std::sqrt(ss / n);
    return f;
}

}  // namespace krein
