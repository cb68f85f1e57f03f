#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace krein {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cplx kI{0.0, 1.0};
inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Thrown when an algorithm fails numerically (step underflow, lost
// convergence, residual above threshold). Input validation failures use
// std::invalid_argument instead; the CLI maps the two to distinct exit codes.
class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

inline bool is_finite(double x) { return std::isfinite(x); }
inline bool is_finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

inline double sqr(double x) { return x * x; }
inline double abs2(cplx z) { return z.real() * z.real() + z.imag() * z.imag(); }

// ---------------------------------------------------------------------------
// 2x2 matrices. Everything in this library is a 2x2 system, so a handrolled
// value type beats pulling in a matrix library.
// ---------------------------------------------------------------------------

template <class T>
struct Mat2 {
    T a{}, b{}, c{}, d{};  // row-major: [a b; c d]

    static Mat2 identity() { return {T(1), T(0), T(0), T(1)}; }
    static Mat2 zero() { return {}; }

    T trace() const { return a + d; }
    T det() const { return a * d - b * c; }

    Mat2 transpose() const { return {a, c, b, d}; }

    Mat2 inverse() const {
        T dt = det();
        return {d / dt, -b / dt, -c / dt, a / dt};
    }

    friend Mat2 operator+(const Mat2& x, const Mat2& y) {
        return {x.a + y.a, x.b + y.b, x.c + y.c, x.d + y.d};
    }
    friend Mat2 operator-(const Mat2& x, const Mat2& y) {
        return {x.a - y.a, x.b - y.b, x.c - y.c, x.d - y.d};
    }
    friend Mat2 operator*(const Mat2& x, const Mat2& y) {
        return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d,
                x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
    }
    friend Mat2 operator*(T s, const Mat2& x) { return {s * x.a, s * x.b, s * x.c, s * x.d}; }

    std::array<T, 2> apply(const std::array<T, 2>& v) const {
        return {a * v[0] + b * v[1], c * v[0] + d * v[1]};
    }
};

using Mat2d = Mat2<double>;
using Mat2c = Mat2<cplx>;

inline Mat2c to_complex(const Mat2d& m) { return {cplx(m.a), cplx(m.b), cplx(m.c), cplx(m.d)}; }

inline Mat2c conj_transpose(const Mat2c& m) {
    return {std::conj(m.a), std::conj(m.c), std::conj(m.b), std::conj(m.d)};
}

inline double frobenius_norm(const Mat2c& m) {
    return std::sqrt(abs2(m.a) + abs2(m.b) + abs2(m.c) + abs2(m.d));
}

// Spectral norm of a 2x2 complex matrix: largest singular value, closed form.
inline double operator_norm(const Mat2c& m) {
    double s = abs2(m.a) + abs2(m.b) + abs2(m.c) + abs2(m.d);
    double dt = std::abs(m.a * m.d - m.b * m.c);
    double disc = std::max(0.0, sqr(s) - 4.0 * sqr(dt));
    return std::sqrt(0.5 * (s + std::sqrt(disc)));
}

inline double operator_norm(const Mat2d& m) { return operator_norm(to_complex(m)); }

// J = [0 -1; 1 0], the rotation by pi/2 used throughout.
inline Mat2d matJ() { return {0.0, -1.0, 1.0, 0.0}; }

// ---------------------------------------------------------------------------
// Small parallel map; one task per chunk. threads <= 1 runs inline.
// ---------------------------------------------------------------------------

inline unsigned default_thread_count() {
    unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : n;
}

inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                         unsigned threads = 0) {
    if (threads == 0) threads = default_thread_count();
    threads = std::min<std::size_t>(threads, n == 0 ? 1 : n);
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error = nullptr;
    std::mutex err_mutex;
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

// Linear grid lo, lo+step, ..., capped at hi (hi included when it lands on it).
inline std::vector<double> linear_grid(double lo, double hi, double step) {
    if (!(step > 0)) throw std::invalid_argument("linear_grid: step must be positive");
    if (hi < lo) throw std::invalid_argument("linear_grid: hi < lo");
    std::vector<double> g;
    long n = std::lround(std::floor((hi - lo) / step + 1e-9));
    g.reserve(static_cast<std::size_t>(n) + 1);
    for (long k = 0; k <= n; ++k) g.push_back(lo + static_cast<double>(k) * step);
    return g;
}

}  // namespace krein
