#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <random>
#include <vector>

#include "varimin/poly.hpp"

using namespace varimin::poly;

namespace {

// Independent nested-loop evaluator: walks the term map directly and
// multiplies factors one by one, no shared code with Polynomial::evaluate.
double oracle_eval(const Polynomial& p, const std::map<VarId, double>& pt) {
    double total = 0.0;
    for (const auto& [mono, c] : p.terms()) {
        double term = c;
        for (const auto& [v, e] : mono)
            for (int k = 0; k < e; ++k) term *= pt.at(v);
        total += term;
    }
    return total;
}

Polynomial random_poly(std::mt19937& rng, const std::vector<VarId>& vars, int max_deg,
                       int n_terms) {
    std::uniform_real_distribution<double> coeff(-3.0, 3.0);
    std::uniform_int_distribution<int> pick(0, static_cast<int>(vars.size()) - 1);
    std::uniform_int_distribution<int> deg(0, max_deg);
    Polynomial p;
    for (int t = 0; t < n_terms; ++t) {
        Monomial m;
        int budget = deg(rng);
        std::map<VarId, int> exps;
        while (budget-- > 0) exps[vars[static_cast<std::size_t>(pick(rng))]] += 1;
        for (const auto& [v, e] : exps) m.emplace_back(v, e);
        p.add_term(m, coeff(rng));
    }
    return p;
}

std::map<VarId, double> random_point(std::mt19937& rng, const std::vector<VarId>& vars) {
    std::uniform_real_distribution<double> val(-2.0, 2.0);
    std::map<VarId, double> pt;
    for (VarId v : vars) pt[v] = val(rng);
    return pt;
}

}  // namespace

TEST_CASE("monomial basics") {
    Monomial x2{{0, 2}}, y{{1, 1}};
    CHECK(monomial_degree(x2) == 2);
    CHECK(monomial_degree({}) == 0);
    Monomial prod = monomial_mul(x2, y);
    CHECK(prod == Monomial{{0, 2}, {1, 1}});
    CHECK(monomial_mul(x2, x2) == Monomial{{0, 4}});
}

TEST_CASE("registry") {
    VarRegistry reg;
    VarId a = reg.declare("a");
    VarId b = reg.declare("b");
    CHECK(a != b);
    CHECK(reg.declare("a") == a);
    CHECK(reg.find("b") == b);
    CHECK(!reg.find("c"));
    CHECK(reg.name(a) == "a");
}

TEST_CASE("(x+1)^2 expands to x^2+2x+1") {
    Polynomial x = Polynomial::variable(0);
    Polynomial p = (x + Polynomial(1.0)) * (x + Polynomial(1.0));
    CHECK(p.terms().size() == 3);
    CHECK(p.terms().at(Monomial{{0, 2}}) == doctest::Approx(1.0));
    CHECK(p.terms().at(Monomial{{0, 1}}) == doctest::Approx(2.0));
    CHECK(p.constant_term() == doctest::Approx(1.0));
}

TEST_CASE("p + 0 == p for random p") {
    std::mt19937 rng(7);
    for (int it = 0; it < 20; ++it) {
        Polynomial p = random_poly(rng, {0, 1, 2}, 4, 6);
        Polynomial q = p + Polynomial();
        CHECK(q.terms() == p.terms());
    }
}

TEST_CASE("(u+1)^2 (u-2)^2 has degree 4 and constant term 4") {
    Polynomial u = Polynomial::variable(0);
    Polynomial p = (u + Polynomial(1.0)) * (u + Polynomial(1.0)) * (u - Polynomial(2.0)) *
                   (u - Polynomial(2.0));
    CHECK(p.degree() == 4);
    CHECK(p.constant_term() == doctest::Approx(4.0));
}

TEST_CASE("canonical form: sorted zero-free terms after arithmetic") {
    std::mt19937 rng(11);
    for (int it = 0; it < 20; ++it) {
        Polynomial a = random_poly(rng, {0, 1, 2}, 3, 5);
        Polynomial b = random_poly(rng, {0, 1, 2}, 3, 5);
        for (const Polynomial& p : {a + b, a - b, a * b}) {
            for (const auto& [mono, c] : p.terms()) {
                CHECK(std::abs(c) > Polynomial::kDropTol);
                for (std::size_t i = 0; i + 1 < mono.size(); ++i)
                    CHECK(mono[i].first < mono[i + 1].first);
                for (const auto& [v, e] : mono) {
                    (void)v;
                    CHECK(e > 0);
                }
            }
        }
        Polynomial diff = a - a;
        CHECK(diff.is_zero());
    }
}

TEST_CASE("ring axioms on random triples") {
    std::mt19937 rng(23);
    std::vector<VarId> vars{0, 1, 2};
    for (int it = 0; it < 20; ++it) {
        Polynomial a = random_poly(rng, vars, 3, 5);
        Polynomial b = random_poly(rng, vars, 3, 5);
        Polynomial c = random_poly(rng, vars, 3, 5);
        Polynomial lhs = (a + b) + c;
        Polynomial rhs = a + (b + c);
        CHECK((lhs - rhs).is_zero());
        Polynomial dl = a * (b + c);
        Polynomial dr = a * b + a * c;
        for (const auto& [mono, coeff] : dl.terms()) {
            auto it2 = dr.terms().find(mono);
            REQUIRE(it2 != dr.terms().end());
            CHECK(coeff == doctest::Approx(it2->second).epsilon(1e-12));
        }
    }
}

TEST_CASE("substitute_linear direct cases") {
    Polynomial xi = Polynomial::variable(0);
    Polynomial t = Polynomial::variable(5);
    std::map<VarId, Polynomial> m{{0, t * 2.0 + Polynomial(1.0)}};
    Polynomial r = (xi * xi).substitute_linear(m);
    CHECK(r.terms().at(Monomial{{5, 2}}) == doctest::Approx(4.0));
    CHECK(r.terms().at(Monomial{{5, 1}}) == doctest::Approx(4.0));
    CHECK(r.constant_term() == doctest::Approx(1.0));

    Polynomial prod = Polynomial::variable(1) * Polynomial::variable(2);
    std::map<VarId, Polynomial> consts{{1, Polynomial(3.0)}, {2, Polynomial(-0.5)}};
    Polynomial rc = prod.substitute_linear(consts);
    CHECK(rc.degree() == 0);
    CHECK(rc.constant_term() == doctest::Approx(-1.5));
}

TEST_CASE("substitute_linear: unmapped variable error names the id") {
    Polynomial p = Polynomial::variable(3);
    CHECK_THROWS_WITH_AS(p.substitute_linear({}), doctest::Contains("3"), std::exception);
}

TEST_CASE("substitute_linear commutes with evaluate") {
    std::mt19937 rng(31);
    std::vector<VarId> pvars{0, 1};
    std::vector<VarId> tvars{10, 11, 12};
    for (int it = 0; it < 10; ++it) {
        Polynomial u = Polynomial::variable(0);
        Polynomial p = (u + Polynomial(1.0)) * (u + Polynomial(1.0)) * (u - Polynomial(2.0)) *
                           (u - Polynomial(2.0)) +
                       Polynomial::variable(1) * u;
        std::map<VarId, Polynomial> m;
        for (VarId v : pvars) m.emplace(v, random_poly(rng, tvars, 1, 3) + Polynomial(0.1));
        Polynomial sub = p.substitute_linear(m);
        auto pt = random_point(rng, tvars);
        std::map<VarId, double> inner;
        for (VarId v : pvars) inner[v] = oracle_eval(m.at(v), pt);
        const double direct = oracle_eval(p, inner);
        const double composed = sub.evaluate(pt);
        CHECK(composed == doctest::Approx(direct).epsilon(1e-10));
        CHECK(sub.degree() <= p.degree());
    }
}

TEST_CASE("evaluate basics") {
    Polynomial x = Polynomial::variable(0);
    Polynomial p = x * x + x * 2.0 + Polynomial(1.0);
    CHECK(p.evaluate({{0, 3.0}}) == doctest::Approx(16.0));
    CHECK(Polynomial(5.0).evaluate({}) == doctest::Approx(5.0));
    CHECK_THROWS_AS(p.evaluate({}), std::exception);
}

TEST_CASE("evaluate matches independent nested-loop oracle") {
    std::mt19937 rng(43);
    std::vector<VarId> vars{0, 1, 2};
    for (int it = 0; it < 30; ++it) {
        Polynomial p = random_poly(rng, vars, 4, 8);
        auto pt = random_point(rng, vars);
        const double a = p.evaluate(pt);
        const double b = oracle_eval(p, pt);
        CHECK(a == doctest::Approx(b).epsilon(1e-12));
        std::vector<double> dense(3);
        for (VarId v : vars) dense[static_cast<std::size_t>(v)] = pt.at(v);
        CHECK(p.evaluate_dense(dense) == doctest::Approx(b).epsilon(1e-12));
    }
}

TEST_CASE("differentiate matches central differences") {
    std::mt19937 rng(53);
    std::vector<VarId> vars{0, 1};
    for (int it = 0; it < 10; ++it) {
        Polynomial p = random_poly(rng, vars, 4, 6);
        Polynomial dp = p.differentiate(0);
        auto pt = random_point(rng, vars);
        const double eps = 1e-6;
        auto lo = pt, hi = pt;
        lo[0] -= eps;
        hi[0] += eps;
        const double fd = (oracle_eval(p, hi) - oracle_eval(p, lo)) / (2 * eps);
        CHECK(dp.evaluate(pt) == doctest::Approx(fd).epsilon(1e-5));
    }
}

TEST_CASE("degree_in counts only selected variables") {
    Polynomial p =
        Polynomial::variable(0) * Polynomial::variable(0) * Polynomial::variable(1) +
        Polynomial::variable(1);
    CHECK(p.degree_in({0}) == 2);
    CHECK(p.degree_in({1}) == 1);
    CHECK(p.degree_in({0, 1}) == 3);
    CHECK(p.degree_in({2}) == 0);
}

TEST_CASE("parser handles the full grammar") {
    VarRegistry reg;
    reg.declare("u");
    reg.declare("uxx");
    Polynomial p = parse_polynomial("(uxx+u)^2 - 0.3*u^2 - 1.2*u^3 + 0.5*u^4", reg);
    CHECK(p.degree() == 4);
    VarId u = *reg.find("u"), uxx = *reg.find("uxx");
    CHECK(p.terms().at(Monomial{{std::min(u, uxx), 1}, {std::max(u, uxx), 1}}) ==
          doctest::Approx(2.0));
    CHECK(p.terms().at(Monomial{{u, 2}}) == doctest::Approx(0.7));
    CHECK(p.terms().at(Monomial{{u, 4}}) == doctest::Approx(0.5));

    CHECK(parse_polynomial("2", reg).constant_term() == doctest::Approx(2.0));
    CHECK(parse_polynomial("-u + u", reg).is_zero());
    Polynomial q = parse_polynomial(" u ^ 2 * 3 ", reg);
    CHECK(q.terms().at(Monomial{{u, 2}}) == doctest::Approx(3.0));
}

TEST_CASE("parser rejects bad input") {
    VarRegistry reg;
    reg.declare("u");
    CHECK_THROWS_AS(parse_polynomial("u^-1", reg), ParseError);
    CHECK_THROWS_AS(parse_polynomial("u^0.5", reg), ParseError);
    CHECK_THROWS_AS(parse_polynomial("v + 1", reg), ParseError);
    CHECK_THROWS_AS(parse_polynomial("u +", reg), ParseError);
    CHECK_THROWS_AS(parse_polynomial("(u", reg), ParseError);
    CHECK_THROWS_AS(parse_polynomial("", reg), ParseError);
}
