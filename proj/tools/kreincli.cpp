// Command-line front end: solver traces, entropy profiles, Szego function
// grids, Weyl functions, resonance reports, Sobolev norms, identity checks,
// and the OPUC oracle. Results go to --out files or stdout; diagnostics to
// stderr. Exit codes: 0 success, 2 validation error, 3 numerical failure.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "krein/json_io.hpp"
#include "krein/opuc.hpp"
#include "krein/verify.hpp"

using namespace krein;

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::invalid_argument("cannot open output file: " + path);
    return os;
}

struct OutTarget {
    std::string path;
    std::ofstream file;
    std::ostream& stream() {
        if (path.empty()) return std::cout;
        if (!file.is_open()) file = open_out(path);
        return file;
    }
};

SzegoMethod parse_method(const std::string& m) {
    if (m == "limit") return SzegoMethod::limit;
    if (m == "cd") return SzegoMethod::cd_integral;
    if (m == "compact") return SzegoMethod::compact_exact;
    throw std::invalid_argument("method must be limit|cd|compact, got '" + m + "'");
}

std::vector<double> parse_four(const std::string& text) {
    std::vector<double> vals;
    std::string tmp;
    std::istringstream ss(text);
    while (std::getline(ss, tmp, ',')) vals.push_back(std::stod(tmp));
    if (vals.size() != 4) throw std::invalid_argument("expected four comma-separated numbers");
    return vals;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Krein/Dirac spectral numerics"};
    app.require_subcommand(1);
    unsigned threads = 0;
    app.add_option("--threads", threads, "cap worker threads (0 = hardware)");

    std::string potential_path, out_path, z_text, grid_text, method_text = "limit";
    std::string suite_text = "cd,wronskian,duality,reflection,detn";
    std::string region_text, fit_window_text, alpha_text, system_text = "krein";
    double rmax = 0, tol = 1e-10, scale_l = 1.0, anchor_h = 0, T = 14.0;
    double grid_len = 16.0, rho = 0.5;
    int n_max = 0, n_fft = 1 << 14, n_boundary = 64;
    bool with_dual = false, brute = false;
    double res_tol = 1e-9;

    auto add_potential = [&](CLI::App* cmd) {
        cmd->add_option("--potential", potential_path, "potential spec JSON")->required();
    };

    CLI::App* sim = app.add_subcommand("simulate", "solve the Krein or Dirac system, dump CSV");
    add_potential(sim);
    sim->add_option("--z", z_text, "spectral parameter re[,im]")->required();
    sim->add_option("--rmax", rmax, "integration radius");
    sim->add_option("--tol", tol, "solver tolerance");
    sim->add_flag("--dual", with_dual, "also solve the dual system");
    sim->add_option("--system", system_text, "krein|dirac");
    sim->add_option("--out", out_path, "output CSV (default stdout)");

    CLI::App* ent = app.add_subcommand("entropy", "entropy profile E^(l) or K_H");
    add_potential(ent);
    ent->add_option("--r", grid_text, "grid lo:hi:step")->required();
    ent->add_option("--l", scale_l, "window half-length l");
    ent->add_option("--kh", n_max, "emit K_H partial sums with n_max terms");
    ent->add_option("--fit-window", fit_window_text, "fit window lo,hi (prints rate)");
    ent->add_option("--out", out_path, "output CSV");

    CLI::App* sz = app.add_subcommand("szego", "inverse Szego function on a complex grid");
    add_potential(sz);
    sz->add_option("--method", method_text, "limit|cd|compact");
    sz->add_option("--grid", grid_text, "complex grid xlo:xhi:xs,ylo:yhi:ys")->required();
    sz->add_option("--anchor-h", anchor_h, "cd anchor height");
    sz->add_option("--rmax", rmax, "integration cap");
    sz->add_option("--out", out_path, "output CSV");

    CLI::App* wy = app.add_subcommand("weyl", "Weyl function values");
    add_potential(wy);
    wy->add_option("--z", z_text, "single point re,im");
    wy->add_option("--grid", grid_text, "complex grid");
    wy->add_option("--method", method_text, "direct|ratio|canonical");
    wy->add_option("--T", T, "canonical truncation");
    wy->add_option("--out", out_path, "output CSV");

    CLI::App* rs = app.add_subcommand("resonances", "locate zeros of the continued Szego function");
    add_potential(rs);
    rs->add_option("--region", region_text, "rectangle x0,x1,y0,y1")->required();
    rs->add_option("--tol", res_tol, "refinement tolerance");
    rs->add_option("--n-boundary", n_boundary, "boundary samples per rectangle");
    rs->add_option("--out", out_path, "report JSON (default stdout)");

    CLI::App* sb = app.add_subcommand("sobolev", "Sobolev tail norms ||f_r||");
    add_potential(sb);
    sb->add_option("--r", grid_text, "grid lo:hi:step")->required();
    sb->add_option("--grid-len", grid_len, "sampling window length");
    sb->add_option("--n-fft", n_fft, "FFT size (power of two)");
    sb->add_option("--out", out_path, "output CSV");

    CLI::App* vf = app.add_subcommand("verify", "identity residual suite");
    add_potential(vf);
    vf->add_option("--suite", suite_text, "comma list: cd,wronskian,duality,reflection,detn");
    vf->add_option("--out", out_path, "report JSON (default stdout)");

    CLI::App* op = app.add_subcommand("opuc", "orthogonal-polynomial oracle");
    op->add_option("--alpha", alpha_text, "Schur parameters re:im,re:im,...");
    op->add_option("--rho", rho, "Nevai-Totik probe ratio");
    op->add_option("--n", n_max, "probe length");
    op->add_flag("--brute", brute, "also run the normal-equations oracle");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    OutTarget out{out_path, {}};
    try {
        if (*sim) {
            PotentialSpec Q = load_potential(potential_path);
            cplx z = parse_complex(z_text);
            if (system_text == "krein") {
                KreinCoefficient a = krein_for_dirac(Q);
                if (rmax <= 0) rmax = default_rmax(a);
                KreinTrace tr = solve_krein(a, z, rmax, tol, with_dual);
                write_krein_trace_csv(out.stream(), tr);
            } else if (system_text == "dirac") {
                if (rmax <= 0) rmax = std::isfinite(Q.support_radius) ? Q.support_radius + 2.0 : 15.0;
                DiracTrace tr = fundamental_solution(Q, z, rmax, tol);
                std::ostream& os = out.stream();
                os << "t,ReN11,ImN11,ReN12,ImN12,ReN21,ImN21,ReN22,ImN22\n";
                for (std::size_t k = 0; k < tr.grid.size(); ++k) {
                    const Mat2c& N = tr.N[k];
                    os << fmt17(tr.grid[k]);
                    for (cplx v : {N.a, N.b, N.c, N.d})
                        os << ',' << fmt17(v.real()) << ',' << fmt17(v.imag());
                    os << "\n";
                }
            } else {
                throw std::invalid_argument("--system must be krein|dirac");
            }
        } else if (*ent) {
            PotentialSpec Q = load_potential(potential_path);
            std::vector<double> grid = parse_grid(grid_text);
            EntropyProfile prof = n_max > 0 ? entropy_KH_profile(Q, grid, n_max, 1e-11, threads)
                                            : entropy_profile(Q, grid, scale_l, 1e-11, threads);
            write_profile_csv(out.stream(), prof.r_grid, prof.values, prof.scale_l);
            if (!fit_window_text.empty()) {
                auto comma = fit_window_text.find(',');
                if (comma == std::string::npos)
                    throw std::invalid_argument("--fit-window must be lo,hi");
                double lo = std::stod(fit_window_text.substr(0, comma));
                double hi = std::stod(fit_window_text.substr(comma + 1));
                double rate = fit_decay_rate(prof, lo, hi);
                std::cout << "fitted_rate," << fmt17(rate) << "\n";
                std::cout << "fit_residual," << fmt17(prof.fit_residual) << "\n";
            }
        } else if (*sz) {
            PotentialSpec Q = load_potential(potential_path);
            KreinCoefficient a = krein_for_dirac(Q);
            AnalyticEvaluator ev =
                make_szego_evaluator(a, parse_method(method_text), 1e-9, anchor_h, rmax);
            auto [xr, yr] = parse_complex_grid(grid_text);
            std::ostream& os = out.stream();
            os << "x,y,RePi,ImPi\n";
            for (double y : yr)
                for (double x : xr) {
                    cplx v = ev(cplx(x, y));
                    os << fmt17(x) << ',' << fmt17(y) << ',' << fmt17(v.real()) << ','
                       << fmt17(v.imag()) << "\n";
                }
        } else if (*wy) {
            PotentialSpec Q = load_potential(potential_path);
            std::vector<cplx> points;
            if (!z_text.empty()) {
                points.push_back(parse_complex(z_text));
            } else if (!grid_text.empty()) {
                auto [xr, yr] = parse_complex_grid(grid_text);
                for (double y : yr)
                    for (double x : xr) points.emplace_back(x, y);
            } else {
                throw std::invalid_argument("weyl: provide --z or --grid");
            }
            std::ostream& os = out.stream();
            os << "x,y,Rem,Imm\n";
            if (method_text == "ratio") {
                KreinCoefficient a = krein_for_dirac(Q);
                SzegoMethod m = std::isfinite(a.support_radius) ? SzegoMethod::compact_exact
                                                                : SzegoMethod::cd_integral;
                WeylRatio wr = make_weyl_ratio(a, m, 1e-9, anchor_h, rmax);
                for (cplx z : points) {
                    cplx v = wr(z);
                    os << fmt17(z.real()) << ',' << fmt17(z.imag()) << ',' << fmt17(v.real())
                       << ',' << fmt17(v.imag()) << "\n";
                }
            } else if (method_text == "canonical") {
                for (cplx z : points) {
                    WeylDisk d = weyl_canonical(Q, z, T);
                    os << fmt17(z.real()) << ',' << fmt17(z.imag()) << ',' << fmt17(d.center.real())
                       << ',' << fmt17(d.center.imag()) << "\n";
                }
            } else {  // direct (default when --method left as "limit")
                for (cplx z : points) {
                    cplx v = weyl_direct(Q, z, rmax);
                    os << fmt17(z.real()) << ',' << fmt17(z.imag()) << ',' << fmt17(v.real())
                       << ',' << fmt17(v.imag()) << "\n";
                }
            }
        } else if (*rs) {
            PotentialSpec Q = load_potential(potential_path);
            KreinCoefficient a = krein_for_dirac(Q);
            std::vector<double> r4 = parse_four(region_text);
            ResonanceOptions opt;
            opt.tol = res_tol;
            opt.n_boundary = n_boundary;
            opt.threads = threads == 0 ? 1 : threads;
            ResonanceReport rep = locate_resonances(a, Rect{r4[0], r4[1], r4[2], r4[3]}, opt);
            out.stream() << resonance_report_to_json(rep).dump(2) << "\n";
        } else if (*sb) {
            PotentialSpec Q = load_potential(potential_path);
            std::vector<double> grid = parse_grid(grid_text);
            std::vector<double> values;
            for (double r : grid)
                values.push_back(sobolev_tail_norm(Q, r, grid_len, static_cast<std::size_t>(n_fft)));
            std::ostream& os = out.stream();
            os << "r,norm\n";
            for (std::size_t k = 0; k < grid.size(); ++k)
                os << fmt17(grid[k]) << ',' << fmt17(values[k]) << "\n";
        } else if (*vf) {
            PotentialSpec Q = load_potential(potential_path);
            std::vector<std::string> suites;
            std::string tmp;
            std::istringstream ss(suite_text);
            while (std::getline(ss, tmp, ',')) suites.push_back(tmp);
            std::vector<ResidualReport> reports = run_identity_suite(Q, suites);
            nlohmann::json j;
            bool all_pass = true;
            for (const ResidualReport& r : reports) {
                j[r.name] = {{"max_residual", r.max_residual},
                             {"threshold", r.threshold},
                             {"samples", r.samples},
                             {"pass", r.pass()}};
                all_pass = all_pass && r.pass();
            }
            out.stream() << j.dump(2) << "\n";
            if (!all_pass) {
                std::cerr << "verify: residuals above threshold\n";
                return 3;
            }
        } else if (*op) {
            std::ostream& os = out.stream();
            if (!alpha_text.empty()) {
                SchurParameters params;
                std::string tmp;
                std::istringstream ss(alpha_text);
                while (std::getline(ss, tmp, ',')) {
                    auto colon = tmp.find(':');
                    if (colon == std::string::npos)
                        params.alpha.emplace_back(std::stod(tmp), 0.0);
                    else
                        params.alpha.emplace_back(std::stod(tmp.substr(0, colon)),
                                                  std::stod(tmp.substr(colon + 1)));
                }
                os << "lambda0," << fmt17(christoffel_lambda0(params)) << "\n";
                if (brute)
                    os << "lambda0_bruteforce," << fmt17(christoffel_lambda0_bruteforce(params))
                       << "\n";
            } else {
                if (n_max < 6) n_max = 40;
                NevaiTotikReport rep = nevai_totik_probe(rho, n_max);
                os << "rho," << fmt17(rep.rho) << "\n";
                os << "fitted_rate," << fmt17(rep.fitted_rate) << "\n";
                os << "expected_rate," << fmt17(rep.expected_rate) << "\n";
            }
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const numeric_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
