#ifndef XRAYPHG_IO_HPP
#define XRAYPHG_IO_HPP

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "xrayphg/index_algebra.hpp"

namespace xrayphg {

using json = nlohmann::json;

/// Floats in CSV and reports carry 17 significant digits.
inline std::string fmt17(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return std::string(buf);
}

// ---------------------------------------------------------------------------
// IndexSet <-> JSON
// ---------------------------------------------------------------------------
// {"generators":[{"z":[re,im],"k":cap,"step":s}],"label":str}; a
// materialized single exponent column is encoded with step 0.

inline json index_set_to_json(const IndexSet& E) {
    json gens = json::array();
    for (const auto& g : E.generators())
        gens.push_back({{"z", {g.base.re(), g.base.im()}},
                        {"k", g.max_log},
                        {"step", g.step}});
    for (const auto& p : E.points())
        gens.push_back({{"z", {p.z.re(), p.z.im()}}, {"k", p.max_log}, {"step", 0}});
    return json{{"generators", gens}, {"label", E.label()}};
}

inline IndexSet index_set_from_json(const json& j) {
    IndexSet out(j.value("label", std::string()));
    for (const auto& g : j.at("generators")) {
        const auto& z = g.at("z");
        Exponent base(std::complex<double>(z.at(0).get<double>(), z.at(1).get<double>()));
        const int step = g.at("step").get<int>();
        const int cap = g.at("k").get<int>();
        if (step == 0)
            out.add_point(base, cap);
        else
            out.add_generator(base, step, cap);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Enumerations as CSV (RFC 4180, mandatory header)
// ---------------------------------------------------------------------------

inline std::string enumeration_to_csv(const std::vector<IndexPoint>& pts) {
    std::ostringstream os;
    os << "re_z,im_z,k\r\n";
    for (const auto& p : pts)
        os << fmt17(p.z.re()) << ',' << fmt17(p.z.im()) << ',' << p.k << "\r\n";
    return os.str();
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

inline CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_csv: cannot open " + path);
    CsvTable t;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n'))
            line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (first) { t.header = cells; first = false; }
        else t.rows.push_back(cells);
    }
    return t;
}

/// Parse "p/q" or a decimal into a double (exact rational when given p/q).
inline Exponent parse_exponent(const std::string& s) {
    auto slash = s.find('/');
    if (slash != std::string::npos) {
        const long long p = std::stoll(s.substr(0, slash));
        const long long q = std::stoll(s.substr(slash + 1));
        return Exponent(Rational(p, q));
    }
    return Exponent(std::stod(s));
}

/// Named index-set presets for the CLI:
///   "N0"            -> N0 x {0}
///   "Ek:k"          -> normal-operator iterate set E_k
///   "Egamk:g,k"     -> backprojection index set for tau^g log^k data
///   otherwise       -> generator JSON (see index_set_from_json)
inline IndexSet parse_set_spec(const std::string& spec) {
    if (spec == "N0") return IndexSet::naturals();
    if (spec.rfind("Ek:", 0) == 0)
        return normal_iterate_index(std::stoi(spec.substr(3)));
    if (spec.rfind("Egamk:", 0) == 0) {
        const std::string rest = spec.substr(6);
        auto comma = rest.find(',');
        if (comma == std::string::npos)
            throw config_error("Egamk spec needs gamma,k");
        return backprojection_index(parse_exponent(rest.substr(0, comma)),
                                    std::stoi(rest.substr(comma + 1)));
    }
    try {
        return index_set_from_json(json::parse(spec));
    } catch (const json::exception&) {
        throw config_error("unrecognized index-set spec: " + spec);
    }
}

} // namespace xrayphg

#endif
