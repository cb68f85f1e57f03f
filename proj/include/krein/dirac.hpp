#pragma once

#include "krein/krein_system.hpp"

namespace krein {

// ---------------------------------------------------------------------------
// Dirac system J N' + Q N = z N, N(0) = I, with J = [0 -1; 1 0]. Rewritten as
// N' = G(t) N with the trace-free generator G = JQ - zJ, so det N = 1.
// ---------------------------------------------------------------------------

struct DiracTrace {
    cplx z;
    double tol = 1e-10;
    std::vector<double> grid;
    std::vector<Mat2c> N;

    Mat2c at(std::size_t k) const { return N[k]; }
    double tmax() const { return grid.empty() ? 0.0 : grid.back(); }
};

inline Mat2c dirac_generator(const PotentialSpec& Q, double t, cplx z) {
    Mat2d JQ = matJ() * Q.Q(t);
    Mat2c G = to_complex(JQ);
    // -zJ = z [0 1; -1 0]
    G.b += z;
    G.c -= z;
    return G;
}

inline OdeOptions dirac_options(const PotentialSpec& Q, double tol) {
    OdeOptions opt;
    opt.abs_tol = std::min(1e-12, 0.01 * tol);
    opt.rel_tol = std::min(1e-10, 0.1 * tol);
    if (Q.family == PotentialFamily::oscillatory) {
        PotentialSpec copy = Q;
        opt.max_step_at = [copy](double t) { return 0.1 / (1.0 + copy.local_frequency(t)); };
    }
    return opt;
}

inline DiracTrace fundamental_solution(const PotentialSpec& Q, cplx z, double tmax,
                                       double tol = 1e-10) {
    if (!(tmax > 0)) throw std::invalid_argument("fundamental_solution: tmax must be positive");
    DiracTrace tr;
    tr.z = z;
    tr.tol = tol;
    std::vector<double> y(8);
    detail::mat_to_state(Mat2c::identity(), y.data());
    auto rhs = [&Q, z](double t, const double* yv, double* dy) {
        detail::mat_to_state(dirac_generator(Q, t, z) * detail::state_to_mat(yv), dy);
    };
    integrate_ode(rhs, 0.0, tmax, y, dirac_options(Q, tol), [&tr](double t, const double* yv) {
        tr.grid.push_back(t);
        tr.N.push_back(detail::state_to_mat(yv));
    });
    return tr;
}

// N_Q(t) = N(t, 0) = X_{JQ}(0, t); real. Off-diagonal potentials have the
// closed form diag(e^{-g}, e^{g}) with g = int_0^t p.
inline double potential_primitive_p(const PotentialSpec& Q, double r, double t) {
    if (t == r) return 0.0;
    if (t < r) return -potential_primitive_p(Q, t, r);
    if (Q.family == PotentialFamily::oscillatory) {
        // u = e^{gamma x}: int p = (amp/gamma) int u^{beta/gamma - 1} sin u du,
        // accumulated lobe by lobe between the zeros of sin.
        const double amp = Q.param("amp", 1.0), beta = Q.param("beta", 1.0),
                     gamma = Q.param("gamma", 2.0);
        const double nu = beta / gamma;
        const double u0 = std::exp(gamma * r), u1 = std::exp(gamma * t);
        auto f = [nu](double u) { return cplx(std::pow(u, nu - 1.0) * std::sin(u), 0.0); };
        double cum = 0.0;
        double lo = u0;
        double hi = std::min(std::ceil(u0 / kPi) * kPi, u1);
        while (lo < u1) {
            cplx v;
            double e;
            detail::gk15(f, lo, hi, v, e);
            cum += v.real();
            lo = hi;
            hi = std::min(hi + kPi, u1);
        }
        return amp / gamma * cum;
    }
    double cap = std::isfinite(Q.support_radius) ? std::min(t, Q.support_radius) : t;
    if (cap <= r) return 0.0;
    return integrate_adaptive_real([&Q](double s) { return Q.p(s); }, r, cap, 1e-13, 1e-11);
}

inline Mat2d dirac_N0(const PotentialSpec& Q, double t) {
    if (Q.off_diagonal_form()) {
        double g = potential_primitive_p(Q, 0.0, t);
        return {std::exp(-g), 0.0, 0.0, std::exp(g)};
    }
    MatrixField field{[&Q](double s) { return to_complex(matJ() * Q.Q(s)); }};
    TransferMatrix tm = ordered_exponent(field, 0.0, t, 1e-11);
    return {tm.X.a.real(), tm.X.b.real(), tm.X.c.real(), tm.X.d.real()};
}

// ---------------------------------------------------------------------------
// Hamiltonian H_Q = N_Q^T N_Q of the canonical system J M' = z H M carrying
// the same spectral measure; symmetric, positive, det = 1.
// ---------------------------------------------------------------------------

struct HamiltonianField {
    std::function<Mat2d(double)> H;
    bool det_is_one = true;
};

inline Mat2d hamiltonian(const PotentialSpec& Q, double t) {
    Mat2d N = dirac_N0(Q, t);
    return N.transpose() * N;
}

inline HamiltonianField hamiltonian_field(const PotentialSpec& Q) {
    return {[Q](double t) { return hamiltonian(Q, t); }, true};
}

// ---------------------------------------------------------------------------
// Weyl disks. The truncated canonical system maps the boundary w in R u {inf}
// to a circle; three probes w = 0, 1, inf determine it. The disk shrinks to
// the Weyl function as T grows (limit point case).
// ---------------------------------------------------------------------------

struct WeylDisk {
    cplx center;
    double radius = 0;
};

namespace detail {

// Circumcircle through three complex points, computed relative to the first
// point; the raw three-point formula cancels catastrophically once the disk
// has shrunk to the limit point.
inline WeylDisk circumcircle(cplx w1, cplx w2, cplx w3) {
    const cplx u2 = w2 - w1, u3 = w3 - w1;
    const double sep = std::max({std::abs(u2), std::abs(u3), std::abs(u2 - u3)});
    const double scale = std::max({1.0, std::abs(w1), std::abs(w2), std::abs(w3)});
    if (sep < 1e-12 * scale) {
        // disk collapsed below resolution: report the common point
        return {w1 + (u2 + u3) / 3.0, sep};
    }
    const double area2 = u2.real() * u3.imag() - u2.imag() * u3.real();
    if (std::abs(area2) < 1e-10 * sep * sep)
        throw numeric_error("weyl disk: degenerate (collinear) probe images");
    const double a2 = abs2(u2), a3 = abs2(u3);
    cplx c{(a2 * u3.imag() - a3 * u2.imag()) / (2.0 * area2),
           (a3 * u2.real() - a2 * u3.real()) / (2.0 * area2)};
    return {w1 + c, std::abs(c)};
}

inline WeylDisk disk_from_M(const Mat2c& M) {
    const cplx Tp = M.a, Fp = M.b, Tm = M.c, Fm = M.d;  // Theta+-, Phi+-
    cplx w_inf = Fp / Tp;
    cplx w_zero = Fm / Tm;
    cplx w_one = (Fp + Fm) / (Tp + Tm);
    return circumcircle(w_inf, w_zero, w_one);
}

}  // namespace detail

// Canonical system with an explicit Hamiltonian.
inline WeylDisk weyl_canonical(const HamiltonianField& H, cplx z, double T,
                               double tol = 1e-10) {
    if (!(T > 0)) throw std::invalid_argument("weyl_canonical: T must be positive");
    // M' = -J z H M
    std::vector<double> y(8);
    detail::mat_to_state(Mat2c::identity(), y.data());
    auto rhs = [&H, z](double t, const double* yv, double* dy) {
        Mat2d Ht = H.H(t);
        Mat2c A = cplx(0.0, 0.0) * Mat2c::identity();
        // -J z H = z [0 1; -1 0]^T? compute directly: -J = [0 1; -1 0]
        A = z * Mat2c{Ht.c, Ht.d, -Ht.a, -Ht.b};
        detail::mat_to_state(A * detail::state_to_mat(yv), dy);
    };
    OdeOptions opt;
    opt.abs_tol = std::min(1e-12, 0.01 * tol);
    opt.rel_tol = std::min(1e-10, 0.1 * tol);
    integrate_ode(rhs, 0.0, T, y, opt);
    return detail::disk_from_M(detail::state_to_mat(y.data()));
}

// Canonical system for H_Q(shift + t) built jointly with the Dirac flow:
// Y(t) = N_Q(shift + t) obeys Y' = JQ Y, and M' = -J z (Y^T Y) M. No
// Hamiltonian grid is ever materialized.
inline WeylDisk weyl_canonical_shifted(const PotentialSpec& Q, cplx z, double T, double shift,
                                       const Mat2d& N_at_shift, double tol = 1e-10) {
    std::vector<double> y(4 + 8);
    y[0] = N_at_shift.a;
    y[1] = N_at_shift.b;
    y[2] = N_at_shift.c;
    y[3] = N_at_shift.d;
    detail::mat_to_state(Mat2c::identity(), y.data() + 4);
    auto rhs = [&Q, z, shift](double t, const double* yv, double* dy) {
        Mat2d Y{yv[0], yv[1], yv[2], yv[3]};
        Mat2d JQ = matJ() * Q.Q(shift + t);
        Mat2d dY = JQ * Y;
        dy[0] = dY.a;
        dy[1] = dY.b;
        dy[2] = dY.c;
        dy[3] = dY.d;
        Mat2d Ht = Y.transpose() * Y;
        Mat2c A = z * Mat2c{Ht.c, Ht.d, -Ht.a, -Ht.b};
        detail::mat_to_state(A * detail::state_to_mat(yv + 4), dy + 4);
    };
    OdeOptions opt = dirac_options(Q, tol);
    if (opt.max_step_at) {
        PotentialSpec copy = Q;
        opt.max_step_at = [copy, shift](double t) {
            return 0.1 / (1.0 + copy.local_frequency(shift + t));
        };
    }
    integrate_ode(rhs, 0.0, T, y, opt);
    return detail::disk_from_M(detail::state_to_mat(y.data() + 4));
}

inline WeylDisk weyl_canonical(const PotentialSpec& Q, cplx z, double T, double tol = 1e-10) {
    return weyl_canonical_shifted(Q, z, T, 0.0, Mat2d::identity(), tol);
}

// ---------------------------------------------------------------------------
// Krein side of the Dirac operator. The Krein system with coefficient
// a(r) = (p(r/2) + i q(r/2)) / 2 reproduces the spectral data of D_Q; the
// fundamental solution is assembled from (P, P_*, Phat, Phat_*) at 2t.
// ---------------------------------------------------------------------------

inline KreinCoefficient krein_for_dirac(const PotentialSpec& Q) {
    switch (Q.family) {
        case PotentialFamily::zero:
            return KreinCoefficient::zero();
        case PotentialFamily::krein_exp:
            return KreinCoefficient::exponential(Q.param("c", 1.0), Q.param("kappa", 1.0));
        case PotentialFamily::off_diagonal:
            return KreinCoefficient::exponential(0.5 * Q.param("amp", 2.0),
                                                 0.5 * Q.param("kappa", 2.0));
        case PotentialFamily::compact_const:
            return KreinCoefficient::constant(
                cplx(0.5 * Q.param("p", 1.0), 0.5 * Q.param("q", 0.0)), 2.0 * Q.param("L", 1.0));
        case PotentialFamily::compact_table:
        case PotentialFamily::table: {
            std::vector<double> grid;
            std::vector<cplx> values;
            for (const auto& s : Q.samples) {
                grid.push_back(2.0 * s.t);
                values.emplace_back(0.5 * s.p, 0.5 * s.q);
            }
            return KreinCoefficient::table(std::move(grid), std::move(values));
        }
        case PotentialFamily::oscillatory: {
            PotentialSpec copy = Q;
            return KreinCoefficient::functional(
                [copy](double r) { return cplx(0.5 * copy.p(0.5 * r), 0.0); }, kInf);
        }
    }
    return KreinCoefficient::zero();
}

// Inverse of krein_for_dirac on the builtin families: the Dirac potential
// whose spectral data the Krein system with coefficient a carries.
inline PotentialSpec dirac_for_krein(const KreinCoefficient& a) {
    switch (a.family) {
        case KreinFamily::zero:
            return PotentialSpec::zero_potential();
        case KreinFamily::exponential:
            return PotentialSpec::krein_exp_potential(a.c, a.kappa);
        case KreinFamily::compact_const:
            return PotentialSpec::compact_const_potential(2.0 * a.const_value.real(),
                                                          2.0 * a.const_value.imag(),
                                                          a.support_radius / 2.0);
        case KreinFamily::table: {
            std::vector<TableSample> samples;
            for (std::size_t i = 0; i < a.grid.size(); ++i)
                samples.push_back(
                    {a.grid[i] / 2.0, 2.0 * a.values[i].real(), 2.0 * a.values[i].imag()});
            return PotentialSpec::table_potential(std::move(samples),
                                                  std::isfinite(a.support_radius));
        }
        case KreinFamily::functional:
            throw std::invalid_argument("dirac_for_krein: functional coefficients not supported");
    }
    return PotentialSpec::zero_potential();
}

// N(t, z) from the Krein solutions evaluated at 2t.
inline Mat2c dirac_N_from_krein(const KreinTrace& tr, double t, cplx z) {
    if (!tr.has_dual()) throw std::invalid_argument("dirac_N_from_krein: trace lacks the dual");
    std::size_t k = tr.index_at(2.0 * t);
    if (tr.grid[k] != 2.0 * t)
        throw std::invalid_argument("dirac_N_from_krein: 2t must be a grid point");
    cplx P = tr.P[k], Ps = tr.Pstar[k], Pd = tr.dualP[k], Pds = tr.dualPstar[k];
    cplx phase = 0.5 * std::exp(-kI * z * t);
    return {phase * (P + Ps), phase * kI * (Pds - Pd), phase * kI * (P - Ps), phase * (Pd + Pds)};
}

struct WeylEstimate {
    cplx value;
    double spread = 0;  // trailing-window diagnostic
    double r_used = 0;
};

// Weyl function through the Krein route m(z) = i lim Phat_*(r,z) / P_*(r,z),
// evaluated where |P| + |Phat| has decayed; the trailing spread over the last
// window certifies convergence. The sign convention is the Herglotz one
// (Im m > 0 in the upper half-plane; the free potential gives m = i).
inline WeylEstimate weyl_direct_diagnostic(const PotentialSpec& Q, cplx z, double rmax,
                                           double tol = 1e-10, double spread_tol = 1e-6) {
    if (!(z.imag() > 0)) throw std::invalid_argument("weyl_direct: need Im z > 0");
    KreinCoefficient a = krein_for_dirac(Q);
    if (rmax <= 0) rmax = default_rmax(a);
    KreinTrace tr = solve_krein(a, z, rmax, tol, /*with_dual=*/true);

    // estimate at the 5 trailing grid samples spaced ~ rmax/40 apart
    std::vector<cplx> window;
    const double step = rmax / 40.0;
    for (int k = 4; k >= 0; --k) {
        double r = rmax - step * k;
        std::size_t idx = tr.index_at(r);
        cplx m = kI * tr.dualPstar[idx] / tr.Pstar[idx];
        window.push_back(m);
    }
    cplx center = window.back();
    double spread = 0;
    for (const auto& m : window) spread = std::max(spread, std::abs(m - center));
    if (spread > spread_tol)
        throw numeric_error("weyl_direct: trailing spread " + std::to_string(spread) +
                            " above threshold; limit not converged by rmax");
    return {center, spread, rmax};
}

inline cplx weyl_direct(const PotentialSpec& Q, cplx z, double rmax = 0, double tol = 1e-10) {
    return weyl_direct_diagnostic(Q, z, rmax, tol).value;
}

}  // namespace krein
