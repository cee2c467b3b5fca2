#include "doctest.h"
#include "mink/boundary.hpp"
#include "mink/config.hpp"
#include "mink/errors.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

using namespace mink;
namespace fs = std::filesystem;

namespace {

Vec polar(double r, double th) {
    Vec x(2);
    x << r * std::cos(th), r * std::sin(th);
    return x;
}

fs::path scratch_dir() {
    const fs::path d = fs::temp_directory_path() / "mink_boundary_tests";
    fs::create_directories(d);
    return d;
}

}  // namespace

TEST_CASE("fourier boundary data") {
    const BoundaryData b = boundary_fourier({{2, 0.3, 0}, {1, 0, 0.1}}, 0.05);
    CHECK(b.n == 2);
    for (double th : {0.0, 0.4, 2.0, 5.5}) {
        const double expect = 0.3 * std::sin(2 * th) + 0.1 * std::cos(th) + 0.05;
        CHECK(b.eval(polar(0.9, th)) == doctest::Approx(expect).epsilon(1e-14));
        CHECK(b.eval(polar(0.3, th)) == doctest::Approx(expect).epsilon(1e-14));
    }
    CHECK(b.directions.size() == 360);
    CHECK(b.max_value() <= 0.45);
    CHECK(b.max_value() > 0.3);
    // |phi|_C1 of 0.3 sin 2theta: max |phi| + max |phi'| = 0.3 + 0.6
    const BoundaryData s = boundary_fourier({{2, 0.3, 0}});
    CHECK(s.c1 == doctest::Approx(0.9).epsilon(1e-3));
    CHECK(s.c2 == doctest::Approx(0.9 + 1.2).epsilon(1e-3));
}

TEST_CASE("spherical harmonic boundary data") {
    Vec z(3);
    z << 0, 0, 1;
    const double y20 = std::sqrt(5 / (16 * std::numbers::pi));
    CHECK(real_sph_harm(2, 0, z) == doctest::Approx(2 * y20));
    Vec e(3);
    e << 1, 0, 0;
    CHECK(real_sph_harm(2, 0, e) == doctest::Approx(-y20));
    CHECK_THROWS_AS(real_sph_harm(1, 2, e), ConfigError);

    // orthonormality on the quadrature set
    const BoundaryData b = boundary_const(3, 0.0);
    const double area = 4 * std::numbers::pi;
    const std::vector<std::array<int, 2>> lm{{0, 0}, {1, -1}, {1, 1}, {2, 0}, {2, 2}, {3, -2}};
    for (size_t p = 0; p < lm.size(); ++p)
        for (size_t q = p; q < lm.size(); ++q) {
            double s = 0;
            for (const Vec& d : b.directions) s += real_sph_harm(lm[p][0], lm[p][1], d) * real_sph_harm(lm[q][0], lm[q][1], d);
            s *= area / b.directions.size();
            CHECK(s == doctest::Approx(p == q ? 1.0 : 0.0).epsilon(5e-3).scale(1));
        }

    const BoundaryData sh = boundary_sphharm({{2, 0, 0.2}});
    CHECK(sh.eval(0.5 * z) == doctest::Approx(0.4 * y20));
    CHECK(sh.max_value() == doctest::Approx(0.4 * y20).epsilon(1e-3));
}

TEST_CASE("constant and hyperboloid boundary data") {
    const BoundaryData c = boundary_const(2, -0.7);
    CHECK(c.eval(polar(0.5, 1.0)) == -0.7);
    CHECK(c.c1 == doctest::Approx(0.7));
    CHECK(c.min_value() == -0.7);
    CHECK_FALSE(c.exact);
    CHECK_THROWS_AS(boundary_const(4, 0.0), ConfigError);

    Vec b(2);
    b << 0.1, -0.2;
    const BoundaryData h = boundary_hyperboloid(2.0, b, 0.3);
    REQUIRE(h.exact);
    for (double th : {0.1, 1.3, 4.0}) {
        const Vec x = polar(0.9, th);
        CHECK(h.eval(x) == doctest::Approx(h.exact(x)));
        CHECK(h.exact(x) == doctest::Approx(-2 * std::sqrt(1 - 0.81) + b.dot(x) + 0.3));
    }
    CHECK(h.exact(Vec::Zero(2)) == doctest::Approx(-1.7));
    CHECK_THROWS_AS(boundary_hyperboloid(0.0, b, 0.0), ConfigError);
}

TEST_CASE("tabulated boundary data") {
    const fs::path d = scratch_dir();
    {
        std::ofstream f(d / "sin2.csv");
        f << "theta,value\n";
        for (int i = 0; i < 128; ++i) {
            const double th = 2 * std::numbers::pi * i / 128;
            f << th << "," << 0.3 * std::sin(2 * th) << "\n";
        }
    }
    const BoundaryData t = boundary_tabulated(2, (d / "sin2.csv").string());
    double err = 0;
    for (int i = 0; i < 100; ++i) {
        const double th = 0.0613 * i;
        err = std::max(err, std::abs(t.eval(polar(0.8, th)) - 0.3 * std::sin(2 * th)));
    }
    CHECK(err < 1e-4);

    {
        std::ofstream f(d / "y20.csv");
        const BoundaryData ref = boundary_sphharm({{2, 0, 1.0}});
        for (const Vec& p : ref.directions) f << p[0] << "," << p[1] << "," << p[2] << "," << ref.eval(p) << "\n";
    }
    const BoundaryData t3 = boundary_tabulated(3, (d / "y20.csv").string());
    Vec q(3);
    q << 0.3, -0.5, 0.7;
    q.normalize();
    CHECK(t3.eval(q) == doctest::Approx(real_sph_harm(2, 0, q)).epsilon(0.05).scale(1));

    {
        std::ofstream f(d / "bad.csv");
        f << "0.1,abc\n";
    }
    CHECK_THROWS_AS(boundary_tabulated(2, (d / "bad.csv").string()), ConfigError);
    CHECK_THROWS_AS(boundary_tabulated(2, (d / "missing.csv").string()), ConfigError);
}

TEST_CASE("run configuration") {
    const RunSpec s = parse_run_config(R"({
        "n": 2, "h": 0.015625, "r_schedule": [0.5, 0.9],
        "phi": {"kind": "fourier", "coeffs": [[2, 0.3]]}
    })");
    CHECK(s.n == 2);
    CHECK(s.solver.h == 0.015625);
    CHECK(s.solver.r_schedule == std::vector<double>{0.5, 0.9});
    CHECK_FALSE(s.solver.A);
    CHECK(s.phi.kind == "fourier");
    CHECK(s.order_threshold == 1.8);
    CHECK(s.convergence_r == 0.9);
    CHECK(s.h_schedule.empty());

    const RunSpec h = parse_run_config(R"({"n": 3, "h": 0.125, "r_schedule": [0.9], "A": 2.5, "max_iters": 7,
        "phi": {"kind": "hyperboloid", "b": [0.1, 0, 0]}, "h_schedule": [0.25, 0.125, 0.0625]})");
    CHECK(h.order_threshold == 1.5);
    CHECK(*h.solver.A == 2.5);
    CHECK(h.solver.max_iters == 7);
    CHECK(h.phi.exact);
    CHECK(h.h_schedule.size() == 3);

    try {
        parse_run_config("{\n  \"n\": 2,\n  \"h\": ,\n}");
        FAIL("no exception");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("line 3, column") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_run_config("[1, 2]"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"n": 4, "h": 0.1, "r_schedule": [0.9], "phi": {"kind": "const"}})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"n": 2, "h": 0.1, "r_schedule": [0.9, 0.5], "phi": {"kind": "const"}})"),
                    ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"n": 2, "h": 0.1, "r_schedule": [0.9]})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"n": 2, "h": 0.1, "r_schedule": [0.9], "phi": {"kind": "sphharm", "terms": []}})"),
                    ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"n": 2, "h": 0.1, "r_schedule": [0.9], "phi": {"kind": "nope"}})"), ConfigError);
    CHECK_THROWS_AS(load_run_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("tabulated path is relative to the config file") {
    const fs::path d = scratch_dir();
    {
        std::ofstream f(d / "flat.csv");
        for (int i = 0; i < 16; ++i) f << 2 * std::numbers::pi * i / 16 << ",0.25\n";
    }
    {
        std::ofstream f(d / "tab.json");
        f << R"({"n": 2, "h": 0.0625, "r_schedule": [0.9], "phi": {"kind": "tabulated", "path": "flat.csv"}})";
    }
    const RunSpec s = load_run_config((d / "tab.json").string());
    CHECK(s.phi.eval(polar(0.9, 1.0)) == doctest::Approx(0.25));
}
