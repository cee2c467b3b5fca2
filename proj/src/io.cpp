#include "mink/io.hpp"

#include "mink/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

namespace mink {

ojson JsonNumbers::operator()(double v) {
    if (std::isfinite(v)) return v;
    nonfinite = true;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

ojson JsonNumbers::vec(const Vec& v) {
    ojson a = ojson::array();
    for (long i = 0; i < v.size(); ++i) a.push_back((*this)(v[i]));
    return a;
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

ojson identity_json(const std::vector<IdentityResult>& results, const IdentityConfig& cfg, JsonNumbers& num) {
    ojson j;
    j["n_min"] = cfg.n_min;
    j["n_max"] = cfg.n_max;
    j["trials"] = cfg.trials;
    j["seed"] = cfg.seed;
    j["tolerance"] = num(cfg.tol);
    j["self_test"] = cfg.self_test;
    ojson ids = ojson::array();
    bool pass = true;
    for (const auto& r : results) {
        ojson e;
        e["name"] = r.name;
        e["trials"] = r.trials;
        e["max_residual"] = num(r.max_residual);
        e["pass"] = r.pass;
        if (!r.pass) {
            e["witness_n"] = r.witness_n;
            e["witness_lambda"] = num.vec(r.witness);
        }
        ids.push_back(e);
        pass = pass && r.pass;
    }
    j["identities"] = ids;
    j["pass"] = pass;
    return j;
}

ojson psd_json(const PsdReport& r, JsonNumbers& num) {
    ojson j;
    j["n"] = r.n;
    j["samples"] = r.samples;
    j["boundary_samples"] = r.boundary_samples;
    j["seed"] = r.seed;
    j["min_eig_S_normalized"] = num(r.min_eig_S);
    j["min_eig_R_normalized"] = num(r.min_eig_R);
    j["argmin_lambda"] = num.vec(r.argmin_S);
    j["argmin_pivot"] = r.argmin_pivot_S;
    j["argmin_lambda_R"] = num.vec(r.argmin_R);
    j["argmin_pivot_R"] = r.argmin_pivot_R;
    return j;
}

ojson inequality_json(const InequalityReport& r, JsonNumbers& num) {
    ojson j;
    j["n"] = r.n;
    j["trials"] = r.trials;
    j["seed"] = r.seed;
    j["worst_value_normalized"] = num(r.worst_value);
    j["worst_identity_gap"] = num(r.worst_identity);
    j["violations"] = r.violations;
    j["witness_lambda"] = num.vec(r.witness_lambda);
    j["witness_h"] = num.vec(r.witness_h);
    return j;
}

ojson solve_log_json(const SolveResult& s, JsonNumbers& num) {
    ojson j;
    j["r"] = num(s.r);
    j["h"] = num(s.field.h);
    j["unknowns"] = static_cast<long>(s.field.masked_nodes().size());
    j["A_used"] = num(s.A_used);
    j["warm_started"] = s.warm_started;
    j["converged"] = s.converged;
    j["iterations"] = s.iterations();
    j["final_residual"] = num(s.final_residual());
    if (!s.message.empty()) j["message"] = s.message;
    ojson it = ojson::array();
    for (const auto& e : s.log) {
        ojson o;
        o["iter"] = e.iter;
        o["residual_sup"] = num(e.residual);
        o["step"] = num(e.step);
        o["min_eig_M"] = num(e.min_eig);
        it.push_back(o);
    }
    j["log"] = it;
    return j;
}

ojson report_json(const CurvatureReport& r, JsonNumbers& num, bool with_points) {
    ojson j;
    j["valid"] = r.valid;
    if (!r.note.empty()) j["note"] = r.note;
    j["phi"] = r.phi_tag;
    j["n"] = r.n;
    j["r"] = num(r.r);
    j["h"] = num(r.h);
    j["interior_points"] = r.interior_points;
    j["nonconvex_nodes"] = r.nonconvex_nodes;
    j["min_kappa"] = num(r.min_kappa);
    j["max_kappa"] = num(r.max_kappa);
    j["max_abs_residual"] = num(r.max_residual);
    j["convex"] = r.convex;
    j["support_bound"] = {{"d1", num(r.support.d1)}, {"d2", num(r.support.d2)}, {"shift", num(r.support.shift)},
                          {"points", r.support.points}, {"ok", r.support.ok}};
    j["angular_derivative"] = {{"max", num(r.angular.max)}, {"reference", num(r.angular.reference)}};
    j["barrier"] = {{"c", num(r.barrier.c)}, {"worst_excess", num(r.barrier.worst)}, {"tol", num(r.barrier.tol)},
                    {"ok", r.barrier.ok}};
    j["max_principle"] = {{"max_ustar", num(r.max_principle.max_ustar)}, {"max_phi", num(r.max_principle.max_phi)},
                          {"ok", r.max_principle.ok}};
    j["dual_primal"] = {{"max_diff", num(r.consistency.max_diff)}, {"tol", num(r.consistency.tol)},
                        {"matched", r.consistency.matched}, {"ok", r.consistency.ok}};
    if (with_points) {
        ojson pts = ojson::array();
        for (const auto& p : r.points) {
            ojson o;
            o["node"] = p.node;
            o["interior"] = p.interior;
            o["xi"] = num.vec(p.xi);
            o["kappa"] = num.vec(p.kappa);
            o["sigma"] = num(p.sigma);
            o["residual"] = num(p.residual);
            pts.push_back(o);
        }
        j["points"] = pts;
    }
    return j;
}

ojson stability_json(const Stability& s, JsonNumbers& num) {
    ojson j;
    ojson rs = ojson::array(), ks = ojson::array();
    for (double r : s.r) rs.push_back(num(r));
    for (double k : s.max_kappa) ks.push_back(num(k));
    j["r"] = rs;
    j["max_kappa"] = ks;
    j["rel_change_last"] = num(s.rel_change);
    j["stable"] = s.stable;
    return j;
}

void write_field_csv(const MaskedGridField& f, std::ostream& os) {
    static const char* idx[] = {"i", "j", "k"};
    for (int d = 0; d < f.n; ++d) os << idx[d] << ',';
    for (int d = 1; d <= f.n; ++d) os << "xi" << d << ',';
    os << "ustar\n";
    for (long node = 0; node < f.size(); ++node) {
        if (!f.mask[node]) continue;
        const auto id = f.index(node);
        const Vec p = f.position(node);
        for (int d = 0; d < f.n; ++d) os << id[d] << ',';
        for (int d = 0; d < f.n; ++d) os << fmt17(p[d]) << ',';
        os << fmt17(f.values[node]) << '\n';
    }
}

void write_json_file(const std::string& path, const ojson& j) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    out << j.dump(2) << '\n';
}

}  // namespace mink
