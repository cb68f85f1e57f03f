#pragma once

#include "krein/szego.hpp"

namespace krein {

// ---------------------------------------------------------------------------
// Scattering resonances = zeros of the continued Pi, located by the argument
// principle on rectangles with recursive subdivision and Newton polish.
// ---------------------------------------------------------------------------

struct Rect {
    double x0, x1, y0, y1;

    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    double diameter() const { return std::hypot(width(), height()); }
    cplx center() const { return {0.5 * (x0 + x1), 0.5 * (y0 + y1)}; }
    bool contains(cplx z, double slack = 0.0) const {
        return z.real() >= x0 - slack && z.real() <= x1 + slack && z.imag() >= y0 - slack &&
               z.imag() <= y1 + slack;
    }
};

namespace detail {

// Phase continuation along one straight segment; splits until neighbouring
// samples differ by less than pi/2. Returns accumulated phase.
template <class F>
double phase_walk(const F& f, cplx za, cplx fa, cplx zb, cplx fb, double min_abs, int depth) {
    double dphi = std::arg(fb / fa);
    if (std::abs(dphi) <= kPi / 2.0) return dphi;
    if (depth > 48)
        throw numeric_error("count_zeros: phase continuation failed to resolve a jump");
    cplx zm = 0.5 * (za + zb);
    cplx fm = f(zm);
    if (std::abs(fm) < min_abs)
        throw numeric_error("count_zeros: zero near boundary; perturb rectangle");
    return phase_walk(f, za, fa, zm, fm, min_abs, depth + 1) +
           phase_walk(f, zm, fm, zb, fb, min_abs, depth + 1);
}

}  // namespace detail

// Winding number of f along the rectangle boundary (counterclockwise).
template <class F>
int count_zeros(const F& f, const Rect& rect, int n_boundary = 64) {
    if (!(rect.x1 > rect.x0 && rect.y1 > rect.y0))
        throw std::invalid_argument("count_zeros: empty rectangle");
    if (n_boundary < 8) throw std::invalid_argument("count_zeros: n_boundary >= 8");

    std::vector<cplx> pts;
    auto edge = [&pts](cplx a, cplx b, int n) {
        for (int k = 0; k < n; ++k)
            pts.push_back(a + (b - a) * (static_cast<double>(k) / n));
    };
    int per_edge = n_boundary / 4;
    cplx c1(rect.x0, rect.y0), c2(rect.x1, rect.y0), c3(rect.x1, rect.y1), c4(rect.x0, rect.y1);
    edge(c1, c2, per_edge);
    edge(c2, c3, per_edge);
    edge(c3, c4, per_edge);
    edge(c4, c1, per_edge);

    std::vector<cplx> vals(pts.size());
    for (std::size_t k = 0; k < pts.size(); ++k) vals[k] = f(pts[k]);

    std::vector<double> mags;
    for (const auto& v : vals) mags.push_back(std::abs(v));
    std::vector<double> sorted = mags;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    double median = sorted[sorted.size() / 2];
    double min_abs = 1e-6 * median;  // scale-free guard against boundary zeros
    for (double m : mags)
        if (m < min_abs) throw numeric_error("count_zeros: zero near boundary; perturb rectangle");

    double total = 0;
    for (std::size_t k = 0; k < pts.size(); ++k) {
        std::size_t k2 = (k + 1) % pts.size();
        total += detail::phase_walk(f, pts[k], vals[k], pts[k2], vals[k2], min_abs, 0);
    }
    double winding = total / (2.0 * kPi);
    long rounded = std::lround(winding);
    if (std::abs(winding - static_cast<double>(rounded)) > 0.1)
        throw numeric_error("count_zeros: winding " + std::to_string(winding) +
                            " not close to an integer");
    return static_cast<int>(rounded);
}

struct ResonanceZero {
    cplx z;
    int multiplicity = 1;
    double refine_residual = 0;
    double duality_residual = 0;
};

struct ResonanceReport {
    Rect region{};
    int winding_total = 0;
    std::vector<ResonanceZero> zeros;
    std::vector<std::pair<Rect, int>> subdivision_log;
    bool complete = true;
};

struct ResonanceOptions {
    double tol = 1e-9;        // cell diameter + Newton residual target
    int n_boundary = 64;
    int max_depth = 40;
    int multiplicity_cap = 4;
    unsigned threads = 1;     // cells per level processed in parallel
};

namespace detail {

// derivative through the Cauchy integral on a small circle (8-point trapezoid)
template <class F>
cplx cauchy_derivative(const F& f, cplx z, double radius = 1e-2) {
    cplx acc{};
    for (int j = 0; j < 8; ++j) {
        double th = 2.0 * kPi * j / 8.0;
        cplx e(std::cos(th), std::sin(th));
        acc += f(z + radius * e) / e;
    }
    return acc / (8.0 * radius);
}

template <class F>
ResonanceZero newton_refine(const F& f, cplx z0, const Rect& cell, double tol) {
    ResonanceZero out;
    cplx z = z0;
    double best = kInf;
    cplx best_z = z0;
    for (int it = 0; it < 60; ++it) {
        cplx fz = f(z);
        double r = std::abs(fz);
        if (r < best) {
            best = r;
            best_z = z;
        }
        if (r < tol) break;
        cplx df = cauchy_derivative(f, z, std::max(1e-2, 0.0) );
        if (std::abs(df) == 0.0) break;
        cplx step = fz / df;
        // keep the iterate near the cell
        if (!cell.contains(z - step, 2.0 * cell.diameter() + 1e-2)) step *= 0.5;
        z -= step;
    }
    out.z = best_z;
    out.refine_residual = best;
    return out;
}

}  // namespace detail

inline ResonanceReport locate_resonances(const KreinCoefficient& a, const Rect& region,
                                         const ResonanceOptions& opt = {}) {
    if (!(region.y1 <= 0))
        throw std::invalid_argument("locate_resonances: region must sit in the closed lower half-plane");
    SzegoMethod method = std::isfinite(a.support_radius) ? SzegoMethod::compact_exact
                                                         : SzegoMethod::cd_integral;
    AnalyticEvaluator pi = make_szego_evaluator(a, method, 1e-10);
    AnalyticEvaluator pi_hat = make_szego_evaluator(negate_coefficient(a), method, 1e-10);
    if (region.y0 < pi.y0)
        throw std::invalid_argument("locate_resonances: region dips below the usable strip Im z > " +
                                    std::to_string(pi.y0));

    ResonanceReport report;
    report.region = region;

    // winding over the whole region, retrying a slightly perturbed rectangle
    // when a zero sits on the boundary
    auto robust_count = [&](Rect r) {
        double bump = 0.0;
        for (int attempt = 0; attempt < 5; ++attempt) {
            try {
                return std::pair<Rect, int>(r, count_zeros(pi, r, opt.n_boundary));
            } catch (const numeric_error&) {
                bump = (bump == 0.0) ? 0.013 * r.diameter() : 1.7 * bump;
                r = Rect{r.x0 - bump, r.x1 + bump, r.y0 - bump, std::min(0.0, r.y1 + bump)};
            }
        }
        return std::pair<Rect, int>(r, count_zeros(pi, r, opt.n_boundary));
    };

    auto [outer, total] = robust_count(region);
    report.winding_total = total;
    report.subdivision_log.push_back({outer, total});
    if (total == 0) return report;

    struct Cell {
        Rect rect;
        int count;
        int depth;
    };
    std::vector<Cell> frontier{{outer, total, 0}};
    std::vector<ResonanceZero> found;

    while (!frontier.empty()) {
        std::vector<Cell> next;
        for (const Cell& cell : frontier) {
            bool terminal = (cell.count == 1) || (cell.rect.diameter() < opt.tol * 100) ||
                            cell.depth >= opt.max_depth;
            if (terminal) {
                if (cell.depth >= opt.max_depth && cell.count > opt.multiplicity_cap) {
                    report.complete = false;
                    continue;
                }
                ResonanceZero zero = detail::newton_refine(pi, cell.rect.center(), cell.rect,
                                                           opt.tol);
                zero.multiplicity = cell.count;
                zero.duality_residual = duality_residual(pi, pi_hat, zero.z);
                found.push_back(zero);
                continue;
            }
            // split the longer side
            Rect a1 = cell.rect, a2 = cell.rect;
            if (cell.rect.width() >= cell.rect.height()) {
                double mid = 0.5 * (cell.rect.x0 + cell.rect.x1);
                a1.x1 = mid;
                a2.x0 = mid;
            } else {
                double mid = 0.5 * (cell.rect.y0 + cell.rect.y1);
                a1.y1 = mid;
                a2.y0 = mid;
            }
            std::array<Rect, 2> halves{a1, a2};
            std::array<int, 2> counts{0, 0};
            parallel_for(
                2, [&](std::size_t i) { counts[i] = robust_count(halves[i]).second; },
                opt.threads);
            // counts must add up; a boundary perturbation can double-count, in
            // which case recount the pair sequentially with a nudged cut
            if (counts[0] + counts[1] != cell.count) {
                auto c0 = robust_count(halves[0]);
                auto c1 = robust_count(halves[1]);
                counts = {c0.second, c1.second};
                halves = {c0.first, c1.first};
            }
            for (int i = 0; i < 2; ++i) {
                report.subdivision_log.push_back({halves[i], counts[i]});
                if (counts[i] > 0) next.push_back({halves[i], counts[i], cell.depth + 1});
            }
        }
        frontier = std::move(next);
    }

    // deterministic order regardless of processing order
    std::sort(found.begin(), found.end(), [](const ResonanceZero& l, const ResonanceZero& r) {
        if (l.z.real() != r.z.real()) return l.z.real() < r.z.real();
        return l.z.imag() < r.z.imag();
    });
    // merge refinements that converged to the same point from sibling cells
    for (const auto& zero : found) {
        bool dup = false;
        for (auto& kept : report.zeros) {
            if (std::abs(kept.z - zero.z) < 10.0 * opt.tol) {
                kept.multiplicity += zero.multiplicity;
                dup = true;
                break;
            }
        }
        if (!dup) report.zeros.push_back(zero);
    }
    return report;
}

// Hausdorff distance between finite point sets.
inline double hausdorff_distance(const std::vector<cplx>& A, const std::vector<cplx>& B) {
    if (A.empty() && B.empty()) return 0.0;
    if (A.empty() || B.empty()) return kInf;
    auto one_sided = [](const std::vector<cplx>& X, const std::vector<cplx>& Y) {
        double worst = 0;
        for (cplx x : X) {
            double best = kInf;
            for (cplx y : Y) best = std::min(best, std::abs(x - y));
            worst = std::max(worst, best);
        }
        return worst;
    };
    return std::max(one_sided(A, B), one_sided(B, A));
}

// Pairwise Hausdorff distances between the resonance sets of several
// coefficients over a common region. Consistency experiment for the
// resonance-rigidity statement: distinct potentials should give positive
// distances.
inline std::vector<std::vector<double>> uniqueness_probe(
    const std::vector<KreinCoefficient>& specs, const Rect& region,
    const ResonanceOptions& opt = {}) {
    if (specs.size() < 2) throw std::invalid_argument("uniqueness_probe: need >= 2 spectra");
    std::vector<std::vector<cplx>> zero_sets(specs.size());
    for (std::size_t i = 0; i < specs.size(); ++i) {
        ResonanceReport rep = locate_resonances(specs[i], region, opt);
        for (const auto& z : rep.zeros) zero_sets[i].push_back(z.z);
    }
    std::vector<std::vector<double>> dist(specs.size(), std::vector<double>(specs.size(), 0.0));
    for (std::size_t i = 0; i < specs.size(); ++i)
        for (std::size_t j = i + 1; j < specs.size(); ++j)
            dist[i][j] = dist[j][i] = hausdorff_distance(zero_sets[i], zero_sets[j]);
    return dist;
}

}  // namespace krein
