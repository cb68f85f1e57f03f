#pragma once

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "krein/potential.hpp"
#include "krein/resonances.hpp"

namespace krein {

// ---------------------------------------------------------------------------
// JSON potential spec: {"family": "<name>", "params": {...}, "support_radius":
// <number|null>}. Field names fixed; unknown keys rejected. Table samples ride
// inside params as t0/p0/q0, t1/p1/q1, ...
// ---------------------------------------------------------------------------

inline PotentialFamily family_from_name(const std::string& name) {
    for (PotentialFamily f :
         {PotentialFamily::zero, PotentialFamily::krein_exp, PotentialFamily::compact_const,
          PotentialFamily::compact_table, PotentialFamily::off_diagonal,
          PotentialFamily::oscillatory, PotentialFamily::table}) {
        if (name == family_name(f)) return f;
    }
    throw std::invalid_argument("unknown potential family: " + name);
}

inline nlohmann::json potential_to_json(const PotentialSpec& Q) {
    nlohmann::json j;
    j["family"] = family_name(Q.family);
    nlohmann::json params = nlohmann::json::object();
    for (const auto& [k, v] : Q.params) params[k] = v;
    for (std::size_t i = 0; i < Q.samples.size(); ++i) {
        params["t" + std::to_string(i)] = Q.samples[i].t;
        params["p" + std::to_string(i)] = Q.samples[i].p;
        params["q" + std::to_string(i)] = Q.samples[i].q;
    }
    j["params"] = params;
    if (std::isfinite(Q.support_radius))
        j["support_radius"] = Q.support_radius;
    else
        j["support_radius"] = nullptr;
    return j;
}

inline PotentialSpec potential_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw std::invalid_argument("potential spec: expected a JSON object");
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (key != "family" && key != "params" && key != "support_radius")
            throw std::invalid_argument("potential spec: unknown key '" + key + "'");
    }
    if (!j.contains("family") || !j["family"].is_string())
        throw std::invalid_argument("potential spec: missing string field 'family'");
    PotentialSpec Q;
    Q.family = family_from_name(j["family"].get<std::string>());

    std::map<std::string, double> params;
    if (j.contains("params")) {
        if (!j["params"].is_object())
            throw std::invalid_argument("potential spec: 'params' must be an object");
        for (const auto& [key, value] : j["params"].items()) {
            if (!value.is_number())
                throw std::invalid_argument("potential spec: param '" + key + "' must be a number");
            params[key] = value.get<double>();
        }
    }

    const bool is_table =
        Q.family == PotentialFamily::compact_table || Q.family == PotentialFamily::table;
    if (is_table) {
        std::vector<TableSample> samples;
        for (std::size_t i = 0;; ++i) {
            std::string ti = "t" + std::to_string(i);
            if (!params.count(ti)) break;
            TableSample s{params[ti], 0.0, 0.0};
            auto pi = params.find("p" + std::to_string(i));
            auto qi = params.find("q" + std::to_string(i));
            if (pi != params.end()) s.p = pi->second;
            if (qi != params.end()) s.q = qi->second;
            params.erase(ti);
            if (pi != params.end()) params.erase(pi);
            if (qi != params.end()) params.erase(qi);
            samples.push_back(s);
        }
        if (!params.empty())
            throw std::invalid_argument("potential spec: stray params for a table family");
        Q = PotentialSpec::table_potential(std::move(samples),
                                           Q.family == PotentialFamily::compact_table);
    } else {
        Q.params = std::move(params);
    }

    if (j.contains("support_radius") && !j["support_radius"].is_null()) {
        if (!j["support_radius"].is_number())
            throw std::invalid_argument("potential spec: support_radius must be number|null");
        Q.support_radius = j["support_radius"].get<double>();
    } else if (!is_table) {
        // default per family
        switch (Q.family) {
            case PotentialFamily::zero: Q.support_radius = 0.0; break;
            case PotentialFamily::compact_const: Q.support_radius = Q.param("L", 1.0); break;
            default: Q.support_radius = kInf; break;
        }
    }
    Q.validate();
    return Q;
}

inline PotentialSpec load_potential(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open potential spec: " + path);
    nlohmann::json j;
    in >> j;
    return potential_from_json(j);
}

// ---------------------------------------------------------------------------
// CSV / report emission. All floats carry 17 significant digits.
// ---------------------------------------------------------------------------

inline std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline void write_krein_trace_csv(std::ostream& os, const KreinTrace& tr) {
    os << "r,ReP,ImP,RePstar,ImPstar";
    if (tr.has_dual()) os << ",RedualP,ImdualP,RedualPstar,ImdualPstar";
    os << "\n";
    for (std::size_t k = 0; k < tr.grid.size(); ++k) {
        os << fmt17(tr.grid[k]) << ',' << fmt17(tr.P[k].real()) << ',' << fmt17(tr.P[k].imag())
           << ',' << fmt17(tr.Pstar[k].real()) << ',' << fmt17(tr.Pstar[k].imag());
        if (tr.has_dual())
            os << ',' << fmt17(tr.dualP[k].real()) << ',' << fmt17(tr.dualP[k].imag()) << ','
               << fmt17(tr.dualPstar[k].real()) << ',' << fmt17(tr.dualPstar[k].imag());
        os << "\n";
    }
}

inline void write_profile_csv(std::ostream& os, const std::vector<double>& r,
                              const std::vector<double>& values, double scale_l) {
    os << "r,value,scale_l\n";
    for (std::size_t k = 0; k < r.size(); ++k)
        os << fmt17(r[k]) << ',' << fmt17(values[k]) << ',' << fmt17(scale_l) << "\n";
}

inline nlohmann::json resonance_report_to_json(const ResonanceReport& rep) {
    nlohmann::json j;
    j["region"] = {rep.region.x0, rep.region.x1, rep.region.y0, rep.region.y1};
    j["winding_total"] = rep.winding_total;
    nlohmann::json zeros = nlohmann::json::array();
    for (const auto& z : rep.zeros) {
        zeros.push_back({{"re", z.z.real()},
                         {"im", z.z.imag()},
                         {"mult", z.multiplicity},
                         {"residual", z.refine_residual},
                         {"duality_residual", z.duality_residual}});
    }
    j["zeros"] = zeros;
    if (!rep.complete) j["incomplete"] = true;
    return j;
}

// grid syntax "lo:hi:step"
inline std::vector<double> parse_grid(const std::string& text) {
    double lo, hi, step;
    char c1, c2;
    std::istringstream ss(text);
    if (!(ss >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':')
        throw std::invalid_argument("grid must be lo:hi:step, got '" + text + "'");
    return linear_grid(lo, hi, step);
}

// complex grid "xlo:xhi:xstep,ylo:yhi:ystep"
inline std::pair<std::vector<double>, std::vector<double>> parse_complex_grid(
    const std::string& text) {
    auto comma = text.find(',');
    if (comma == std::string::npos)
        throw std::invalid_argument("complex grid must be xr,yr with two lo:hi:step ranges");
    return {parse_grid(text.substr(0, comma)), parse_grid(text.substr(comma + 1))};
}

inline cplx parse_complex(const std::string& text) {
    auto comma = text.find(',');
    if (comma == std::string::npos) return cplx(std::stod(text), 0.0);
    return cplx(std::stod(text.substr(0, comma)), std::stod(text.substr(comma + 1)));
}

}  // namespace krein
