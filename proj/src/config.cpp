#include "mink/config.hpp"

#include "mink/errors.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace mink {

namespace {

using json = nlohmann::ordered_json;

std::string where(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

double num(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_number()) throw ConfigError(std::string("config: '") + key + "' must be a number");
    return j[key].get<double>();
}

double num_or(const json& j, const char* key, double fallback) {
    if (!j.contains(key) || j[key].is_null()) return fallback;
    return num(j, key);
}

std::vector<double> num_list(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_array()) throw ConfigError(std::string("config: '") + key + "' must be an array");
    std::vector<double> out;
    for (const auto& v : j[key]) {
        if (!v.is_number()) throw ConfigError(std::string("config: '") + key + "' must hold numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

std::vector<std::array<double, 3>> rows(const json& j, const char* key, bool third_optional) {
    if (!j.contains(key) || !j[key].is_array()) throw ConfigError(std::string("phi: '") + key + "' must be an array");
    std::vector<std::array<double, 3>> out;
    for (const auto& r : j[key]) {
        if (!r.is_array() || r.size() < (third_optional ? 2u : 3u) || r.size() > 3)
            throw ConfigError(std::string("phi: bad row in '") + key + "'");
        std::array<double, 3> a{0, 0, 0};
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (!r[i].is_number()) throw ConfigError(std::string("phi: non-numeric entry in '") + key + "'");
            a[i] = r[i].get<double>();
        }
        out.push_back(a);
    }
    return out;
}

}  // namespace

BoundaryData boundary_from_json(int n, const json& j, const std::string& base_dir) {
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) throw ConfigError("phi: object with string 'kind' required");
    const std::string kind = j["kind"].get<std::string>();
    if (kind == "fourier") {
        if (n != 2) throw ConfigError("phi: fourier data needs n = 2");
        return boundary_fourier(rows(j, "coeffs", true), num_or(j, "constant", 0.0));
    }
    if (kind == "sphharm") {
        if (n != 3) throw ConfigError("phi: sphharm data needs n = 3");
        return boundary_sphharm(rows(j, "terms", false), num_or(j, "constant", 0.0));
    }
    if (kind == "const") return boundary_const(n, num(j, "value"));
    if (kind == "hyperboloid") {
        Vec b = Vec::Zero(n);
        if (j.contains("b")) {
            auto bl = num_list(j, "b");
            if (static_cast<int>(bl.size()) != n) throw ConfigError("phi: hyperboloid 'b' must have n entries");
            for (int i = 0; i < n; ++i) b[i] = bl[i];
        }
        const double R = num_or(j, "R", std::pow(static_cast<double>(n), 1.0 / (n - 1)));
        return boundary_hyperboloid(R, b, num_or(j, "c", 0.0));
    }
    if (kind == "tabulated") {
        if (!j.contains("path") || !j["path"].is_string()) throw ConfigError("phi: tabulated data needs 'path'");
        std::filesystem::path p = j["path"].get<std::string>();
        if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
        return boundary_tabulated(n, p.string());
    }
    throw ConfigError("phi: unknown kind '" + kind + "'");
}

RunSpec parse_run_config(const std::string& text, const std::string& base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("config: JSON syntax error at " + where(text, e.byte) + ": " + e.what());
    }
    if (!j.is_object()) throw ConfigError("config: top level must be an object");
    RunSpec s;
    s.n = static_cast<int>(num(j, "n"));
    if (s.n != 2 && s.n != 3) throw ConfigError("config: n must be 2 or 3");
    s.solver.h = num(j, "h");
    s.solver.r_schedule = num_list(j, "r_schedule");
    s.solver.newton_tol = num_or(j, "newton_tol", 1e-9);
    s.solver.max_iters = static_cast<int>(num_or(j, "max_iters", 50));
    if (j.contains("A") && !j["A"].is_null()) s.solver.A = num(j, "A");
    if (!(s.solver.h > 0) || s.solver.r_schedule.empty() || !(s.solver.newton_tol > 0) || s.solver.max_iters < 0)
        throw ConfigError("config: need h > 0, a nonempty r_schedule, newton_tol > 0 and max_iters >= 0");
    for (std::size_t i = 0; i < s.solver.r_schedule.size(); ++i) {
        const double r = s.solver.r_schedule[i];
        if (!(r > 0 && r < 1) || (i && !(r > s.solver.r_schedule[i - 1])))
            throw ConfigError("config: r_schedule must increase strictly inside (0, 1)");
    }
    if (s.solver.A && !(*s.solver.A > 0)) throw ConfigError("config: A must be positive");
    if (!j.contains("phi")) throw ConfigError("config: 'phi' missing");
    s.phi_json = j["phi"];
    s.phi = boundary_from_json(s.n, j["phi"], base_dir);
    if (j.contains("h_schedule")) s.h_schedule = num_list(j, "h_schedule");
    s.order_threshold = num_or(j, "order_threshold", s.n == 2 ? 1.8 : 1.5);
    s.convergence_r = num_or(j, "convergence_r", s.solver.r_schedule.back());
    return s;
}

RunSpec load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    const auto dir = std::filesystem::path(path).parent_path();
    return parse_run_config(ss.str(), dir.empty() ? "." : dir.string());
}

}  // namespace mink
