#pragma once

#include "krein/dirac.hpp"

namespace krein {

// ---------------------------------------------------------------------------
// Entropy functionals of the canonical-system Hamiltonian H_Q. Everything is
// computed relative to the window base point through X_{JQ}(r, t); the raw
// N_Q(t) grows exponentially for non-decaying potentials and would destroy
// the determinant cancellation.
//
//   E^{(l)}(r) = det( int_r^{r+2l} X^T X dt ) / l^2 - 4,   X = X_{JQ}(r, t).
//
// The determinant is evaluated through W = int (X^T X - I), removing the
// leading 4 l^2 exactly.
// ---------------------------------------------------------------------------

inline double entropy_E(const PotentialSpec& Q, double r, double l = 1.0, double tol = 1e-11) {
    if (!(l > 0)) throw std::invalid_argument("entropy_E: l must be positive");
    if (std::isfinite(Q.support_radius) && r >= Q.support_radius) return 0.0;

    OdeOptions opt = dirac_options(Q, tol);
    opt.abs_tol = std::min(opt.abs_tol, 1e-13);

    if (Q.off_diagonal_form()) {
        // H = diag(e^{-2g}, e^{2g}), g(t) = int_r^t p:
        // E = [2l (m1 + m2) + m1 m2] / l^2 with m_i = int (e^{-+2g} - 1).
        std::vector<double> y = {0.0, 0.0, 0.0};  // g, m1, m2
        auto rhs = [&Q](double t, const double* yv, double* dy) {
            dy[0] = Q.p(t);
            dy[1] = std::expm1(-2.0 * yv[0]);
            dy[2] = std::expm1(2.0 * yv[0]);
        };
        integrate_ode(rhs, r, r + 2.0 * l, y, opt);
        return (2.0 * l * (y[1] + y[2]) + y[1] * y[2]) / (l * l);
    }

    // general route: X' = JQ X jointly with W' = X^T X - I (symmetric)
    std::vector<double> y = {1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0};  // X row-major, w11, w12, w22
    auto rhs = [&Q](double t, const double* yv, double* dy) {
        Mat2d X{yv[0], yv[1], yv[2], yv[3]};
        Mat2d dX = (matJ() * Q.Q(t)) * X;
        dy[0] = dX.a;
        dy[1] = dX.b;
        dy[2] = dX.c;
        dy[3] = dX.d;
        dy[4] = X.a * X.a + X.c * X.c - 1.0;
        dy[5] = X.a * X.b + X.c * X.d;
        dy[6] = X.b * X.b + X.d * X.d - 1.0;
    };
    integrate_ode(rhs, r, r + 2.0 * l, y, opt);
    const double w11 = y[4], w12 = y[5], w22 = y[6];
    return (2.0 * l * (w11 + w22) + w11 * w22 - w12 * w12) / (l * l);
}

// Entropy of the Hamiltonian, K_H(r) = sum_n E_Q(r + n); det H_Q = 1 makes
// the eta_n partition the integer shifts.
struct EntropyKH {
    double value = 0;
    double tail_estimate = 0;  // last summand, bounds the dropped geometric tail
    int terms = 0;
};

inline EntropyKH entropy_KH(const PotentialSpec& Q, double r, int n_max, double tol = 1e-11) {
    if (n_max < 1) throw std::invalid_argument("entropy_KH: n_max >= 1 required");
    EntropyKH out;
    double last = 0;
    for (int n = 0; n < n_max; ++n) {
        last = entropy_E(Q, r + n, 1.0, tol);
        out.value += last;
        out.terms++;
        if (std::isfinite(Q.support_radius) && r + n >= Q.support_radius) break;
    }
    out.tail_estimate = std::max(last, 0.0);
    return out;
}

// ---------------------------------------------------------------------------
// Sampled profiles r -> E^{(l)}(r) (or K_H) with a fitted exponential rate.
// ---------------------------------------------------------------------------

struct EntropyProfile {
    std::vector<double> r_grid;
    std::vector<double> values;
    double scale_l = 1.0;
    double fitted_rate = 0.0;  // values ~ e^{-rate r}
    double fit_lo = 0.0, fit_hi = 0.0;
    double fit_residual = 0.0;
};

// Least-squares slope of log(values) on the window, sign flipped. Nonpositive
// samples inside the window are an error (listed in the message).
inline double fit_decay_rate(EntropyProfile& profile, double window_lo = kInf,
                             double window_hi = -kInf) {
    const double floor_value = 1e-13;  // determinant cancellation noise floor
    std::vector<double> xs, ys;
    std::string bad;
    if (window_lo > window_hi) {
        // default: middle two quartiles of the positive samples
        std::vector<double> pos_r;
        for (std::size_t i = 0; i < profile.values.size(); ++i)
            if (profile.values[i] > floor_value) pos_r.push_back(profile.r_grid[i]);
        if (pos_r.size() < 5)
            throw std::invalid_argument("fit_decay_rate: need >= 5 positive samples");
        window_lo = pos_r[pos_r.size() / 4];
        window_hi = pos_r[(3 * pos_r.size()) / 4];
    }
    for (std::size_t i = 0; i < profile.values.size(); ++i) {
        double r = profile.r_grid[i];
        if (r < window_lo || r > window_hi) continue;
        if (!(profile.values[i] > 0)) {
            bad += (bad.empty() ? "" : ", ") + std::to_string(r);
            continue;
        }
        xs.push_back(r);
        ys.push_back(std::log(std::max(profile.values[i], floor_value)));
    }
    if (!bad.empty())
        throw std::invalid_argument("fit_decay_rate: nonpositive samples at r = " + bad);
    if (xs.size() < 2) throw std::invalid_argument("fit_decay_rate: window too narrow");
    LineFit f = fit_line(xs, ys);
    profile.fitted_rate = -f.slope;
    profile.fit_lo = window_lo;
    profile.fit_hi = window_hi;
    profile.fit_residual = f.rms_residual;
    return profile.fitted_rate;
}

inline EntropyProfile entropy_profile(const PotentialSpec& Q, const std::vector<double>& r_grid,
                                      double l = 1.0, double tol = 1e-11, unsigned threads = 0) {
    EntropyProfile p;
    p.r_grid = r_grid;
    p.scale_l = l;
    p.values.assign(r_grid.size(), 0.0);
    parallel_for(
        r_grid.size(), [&](std::size_t i) { p.values[i] = entropy_E(Q, r_grid[i], l, tol); },
        threads);
    return p;
}

inline EntropyProfile entropy_KH_profile(const PotentialSpec& Q, const std::vector<double>& r_grid,
                                         int n_max, double tol = 1e-11, unsigned threads = 0) {
    EntropyProfile p;
    p.r_grid = r_grid;
    p.scale_l = 1.0;
    p.values.assign(r_grid.size(), 0.0);
    parallel_for(
        r_grid.size(),
        [&](std::size_t i) { p.values[i] = entropy_KH(Q, r_grid[i], n_max, tol).value; }, threads);
    return p;
}

// ---------------------------------------------------------------------------
// Sobolev tail norm ||f_r||_{W^{-1}_2}, f_r = (p + iq) 1_{[r, inf)}, via the
// isometric Fourier transform F f(eta) = (2 pi)^{-1/2} int f e^{-i eta x} dx
// sampled by FFT, weight (1 + eta^2)^{-1}, trapezoid in eta.
// ---------------------------------------------------------------------------

inline double sobolev_tail_norm(const PotentialSpec& Q, double r, double grid_len,
                                std::size_t n_fft = 1 << 14) {
    if ((n_fft & (n_fft - 1)) != 0 || n_fft < 16)
        throw std::invalid_argument("sobolev_tail_norm: n_fft must be a power of two >= 16");
    const double dx = grid_len / static_cast<double>(n_fft);
    std::vector<cplx> f(n_fft);
    double total_energy = 0, boundary_energy = 0;
    for (std::size_t j = 0; j < n_fft; ++j) {
        double x = r + (static_cast<double>(j) + 0.5) * dx;
        f[j] = cplx(Q.p(x), Q.q(x));
        double e = abs2(f[j]) * dx;
        total_energy += e;
        if (j >= n_fft - n_fft / 20) boundary_energy += e;
    }
    if (total_energy > 0 && boundary_energy > 0.01 * total_energy)
        throw numeric_error("sobolev_tail_norm: grid too short, " +
                            std::to_string(100.0 * boundary_energy / total_energy) +
                            "% of the energy sits at the boundary");
    fft_inplace(f);
    // F f(eta_k) ~ dx / sqrt(2 pi) e^{-i eta_k (r + dx/2)} FFT_k; the phase
    // drops out of |.|^2. Frequencies eta_k = 2 pi k / grid_len, symmetrized.
    const double deta = 2.0 * kPi / grid_len;
    const double norm = dx / std::sqrt(2.0 * kPi);
    double energy = 0;
    // trapezoid over the symmetric frequency grid (uniform, so equal weights)
    for (std::size_t k = 0; k < n_fft; ++k) {
        long kk = static_cast<long>(k);
        if (kk >= static_cast<long>(n_fft / 2)) kk -= static_cast<long>(n_fft);
        double eta = deta * static_cast<double>(kk);
        energy += abs2(norm * f[k]) / (1.0 + eta * eta) * deta;
    }
    return std::sqrt(energy);
}

// ---------------------------------------------------------------------------
// Rescaling lemma check: E^{(2l)}(r)/4 against max of the three shifted
// half-window values /4. Bounded ratio certifies the window-doubling step.
// ---------------------------------------------------------------------------

struct RescalingReport {
    double doubled = 0;      // E^{(2l)}(r) / 4
    double max_half = 0;     // max{E^{(l)}(r), E^{(l)}(r+l), E^{(l)}(r+2l)} / 4
    double ratio = 0;        // doubled / max_half; 0 when both vanish
    bool degenerate = false; // 0/0 sentinel
};

inline RescalingReport rescaling_check(const PotentialSpec& Q, double r, double l,
                                       double tol = 1e-11) {
    RescalingReport rep;
    rep.doubled = entropy_E(Q, r, 2.0 * l, tol) / 4.0;
    double e0 = entropy_E(Q, r, l, tol);
    double e1 = entropy_E(Q, r + l, l, tol);
    double e2 = entropy_E(Q, r + 2.0 * l, l, tol);
    rep.max_half = std::max({e0, e1, e2}) / 4.0;
    if (std::abs(rep.max_half) < 1e-15 && std::abs(rep.doubled) < 1e-15) {
        rep.degenerate = true;
        rep.ratio = 0.0;
    } else {
        rep.ratio = rep.doubled / rep.max_half;
    }
    return rep;
}

}  // namespace krein
