#pragma once

#include "krein/common.hpp"
#include "krein/quadrature.hpp"

namespace krein {

// ---------------------------------------------------------------------------
// Embedded Dormand-Prince 5(4) integrator over a flat real state vector.
// Oscillatory problems are tamed through a t-dependent step cap.
// ---------------------------------------------------------------------------

struct OdeOptions {
    double abs_tol = 1e-12;
    double rel_tol = 1e-10;
    double max_step = kInf;
    std::function<double(double)> max_step_at;  // optional cap as a function of t
    std::size_t max_steps = 50'000'000;
    double initial_step = 0.0;  // 0 = auto
    // Called after each accepted step; may modify the state in place (e.g.
    // exponential rescaling of linear blocks). Return true iff modified.
    std::function<bool(double, double*)> post_step;
};

struct OdeStats {
    std::size_t steps_accepted = 0;
    std::size_t steps_rejected = 0;
    double error_accum = 0.0;  // sum of accepted local error estimates
};

namespace detail {

inline constexpr double kDPc[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
inline constexpr double kDPa[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
inline constexpr double kDPb5[7] = {35.0 / 384,    0.0,        500.0 / 1113, 125.0 / 192,
                                    -2187.0 / 6784, 11.0 / 84, 0.0};
inline constexpr double kDPb4[7] = {5179.0 / 57600,   0.0,          7571.0 / 16695, 393.0 / 640,
                                    -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

}  // namespace detail

// Advances y from t0 to t1 (t0 <= t1). Rhs: void(double t, const double* y,
// double* dy). Observer (optional): called after each accepted step as
// observer(t, y); also called once at t0.
template <class Rhs, class Observer>
OdeStats integrate_ode(Rhs&& rhs, double t0, double t1, std::vector<double>& y,
                       const OdeOptions& opt, Observer&& observer) {
    const std::size_t n = y.size();
    OdeStats stats;
    if (t1 < t0) throw std::invalid_argument("integrate_ode: t1 < t0");
    observer(t0, y.data());
    if (t1 == t0) return stats;

    std::vector<double> k[7];
    for (auto& v : k) v.assign(n, 0.0);
    std::vector<double> ytmp(n), y5(n), err(n);

    auto cap_at = [&](double t) {
        double cap = opt.max_step;
        if (opt.max_step_at) cap = std::min(cap, opt.max_step_at(t));
        return cap;
    };

    double t = t0;
    rhs(t, y.data(), k[0].data());
    double h = opt.initial_step;
    if (h <= 0) {
        double scale = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            scale = std::max(scale, std::abs(k[0][i]) / (1.0 + std::abs(y[i])));
        h = scale > 0 ? 0.01 / scale : 0.1 * (t1 - t0);
        // a poor guess is corrected by rejections; keep it off the underflow guard
        h = std::clamp(h, 1e-6 * (t1 - t0), t1 - t0);
    }
    h = std::min(h, cap_at(t));

    while (t < t1) {
        if (stats.steps_accepted + stats.steps_rejected > opt.max_steps)
            throw numeric_error("integrate_ode: step budget exhausted near t=" + std::to_string(t));
        h = std::min({h, t1 - t, cap_at(t)});
        if (h < 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t)))
            throw numeric_error("integrate_ode: step underflow on [" + std::to_string(t) + ", " +
                                std::to_string(t1) + "]");
        // stages (k[0] holds f(t, y) from FSAL or initial eval)
        for (int s = 1; s < 7; ++s) {
            for (std::size_t i = 0; i < n; ++i) {
                double acc = y[i];
                for (int j = 0; j < s; ++j) acc += h * detail::kDPa[s][j] * k[j][i];
                ytmp[i] = acc;
            }
            rhs(t + detail::kDPc[s] * h, ytmp.data(), k[s].data());
        }
        double errnorm = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double acc5 = y[i], acc4 = y[i];
            for (int s = 0; s < 7; ++s) {
                acc5 += h * detail::kDPb5[s] * k[s][i];
                acc4 += h * detail::kDPb4[s] * k[s][i];
            }
            y5[i] = acc5;
            double sc = opt.abs_tol + opt.rel_tol * std::max(std::abs(y[i]), std::abs(acc5));
            double e = (acc5 - acc4) / sc;
            errnorm += e * e;
        }
        errnorm = std::sqrt(errnorm / static_cast<double>(n));
        if (errnorm <= 1.0) {
            t += h;
            y.swap(y5);
            k[0].swap(k[6]);  // FSAL: stage 7 was evaluated at (t+h, y5)
            stats.steps_accepted++;
            stats.error_accum += errnorm * opt.abs_tol;
            if (opt.post_step && opt.post_step(t, y.data()))
                rhs(t, y.data(), k[0].data());  // state changed, refresh FSAL stage
            observer(t, y.data());
        } else {
            stats.steps_rejected++;
        }
        double fac = errnorm > 0 ? 0.9 * std::pow(errnorm, -0.2) : 5.0;
        h *= std::clamp(fac, 0.2, 5.0);
    }
    return stats;
}

template <class Rhs>
OdeStats integrate_ode(Rhs&& rhs, double t0, double t1, std::vector<double>& y,
                       const OdeOptions& opt = {}) {
    return integrate_ode(std::forward<Rhs>(rhs), t0, t1, y, opt, [](double, const double*) {});
}

// ---------------------------------------------------------------------------
// Ordered exponent X' = A(t) X, X(r) = I for 2x2 complex matrix fields.
// ---------------------------------------------------------------------------

struct MatrixField {
    std::function<Mat2c(double)> A;
    // Estimate of int_r^t ||A(s)|| ds; defaults to adaptive quadrature.
    std::function<double(double, double)> norm_bound;
    // Optional local oscillation frequency used to cap the step size.
    std::function<double(double)> frequency;

    double norm_integral(double r, double t) const {
        if (norm_bound) return norm_bound(r, t);
        auto f = [this](double s) { return operator_norm(A(s)); };
        return integrate_adaptive_real(f, r, t, 1e-10, 1e-8);
    }
};

struct TransferMatrix {
    Mat2c X = Mat2c::identity();
    double r = 0, t = 0;
    double est_error = 0;
};

namespace detail {

inline void mat_to_state(const Mat2c& m, double* y) {
    y[0] = m.a.real(); y[1] = m.a.imag();
    y[2] = m.b.real(); y[3] = m.b.imag();
    y[4] = m.c.real(); y[5] = m.c.imag();
    y[6] = m.d.real(); y[7] = m.d.imag();
}

inline Mat2c state_to_mat(const double* y) {
    return {cplx(y[0], y[1]), cplx(y[2], y[3]), cplx(y[4], y[5]), cplx(y[6], y[7])};
}

}  // namespace detail

inline OdeOptions ordered_exponent_options(const MatrixField& field, double tol) {
    OdeOptions opt;
    opt.abs_tol = std::min(1e-12, 0.01 * tol);
    opt.rel_tol = std::min(1e-10, 0.1 * tol);
    if (field.frequency) {
        auto freq = field.frequency;
        opt.max_step_at = [freq](double t) { return 0.1 / (1.0 + freq(t)); };
    }
    return opt;
}

inline TransferMatrix ordered_exponent(const MatrixField& field, double r, double t,
                                       double tol = 1e-10) {
    if (!(r >= 0 && t >= r)) throw std::invalid_argument("ordered_exponent: need 0 <= r <= t");
    std::vector<double> y(8);
    detail::mat_to_state(Mat2c::identity(), y.data());
    auto rhs = [&field](double s, const double* yv, double* dy) {
        Mat2c X = detail::state_to_mat(yv);
        Mat2c AX = field.A(s) * X;
        detail::mat_to_state(AX, dy);
    };
    OdeStats stats = integrate_ode(rhs, r, t, y, ordered_exponent_options(field, tol));
    TransferMatrix out;
    out.X = detail::state_to_mat(y.data());
    out.r = r;
    out.t = t;
    out.est_error = stats.error_accum;
    return out;
}

// X(r0, g_i) along an increasing grid, advanced incrementally through the
// group property X(s,t) X(r0,s) = X(r0,t).
inline std::vector<TransferMatrix> propagate_grid(const MatrixField& field, double r0,
                                                  const std::vector<double>& grid,
                                                  double tol = 1e-10) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid[i] < r0 || (i > 0 && grid[i] <= grid[i - 1]))
            throw std::invalid_argument("propagate_grid: grid must be increasing and >= r0");
    }
    std::vector<TransferMatrix> out;
    out.reserve(grid.size());
    std::vector<double> y(8);
    detail::mat_to_state(Mat2c::identity(), y.data());
    auto rhs = [&field](double s, const double* yv, double* dy) {
        detail::mat_to_state(field.A(s) * detail::state_to_mat(yv), dy);
    };
    OdeOptions opt = ordered_exponent_options(field, tol);
    double prev = r0;
    double err = 0;
    for (double g : grid) {
        OdeStats stats = integrate_ode(rhs, prev, g, y, opt);
        err += stats.error_accum;
        TransferMatrix tm;
        tm.X = detail::state_to_mat(y.data());
        tm.r = r0;
        tm.t = g;
        tm.est_error = err;
        out.push_back(tm);
        prev = g;
    }
    return out;
}

// Partial sum of the Volterra series for a constant field A on [r,t]; the
// iterated integrals collapse to A^m (t-r)^m / m!, so the sum is exact up to
// the remainder bound (int ||A||)^m / m!. Independent oracle for tests.
inline Mat2c ordered_exponent_series_const(const Mat2c& A, double r, double t, int terms) {
    Mat2c total = Mat2c::identity();
    Mat2c term = Mat2c::identity();
    for (int m = 1; m <= terms; ++m) {
        term = (cplx(t - r) / cplx(static_cast<double>(m))) * (A * term);
        total = total + term;
    }
    return total;
}

}  // namespace krein
