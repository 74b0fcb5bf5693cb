#include "varimin/poly.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace varimin::poly {

int monomial_degree(const Monomial& m) {
    int d = 0;
    for (const auto& [v, e] : m) d += e;
    return d;
}

Monomial monomial_mul(const Monomial& a, const Monomial& b) {
    Monomial out;
    out.reserve(a.size() + b.size());
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i].first < b[j].first) {
            out.push_back(a[i++]);
        } else if (b[j].first < a[i].first) {
            out.push_back(b[j++]);
        } else {
            out.emplace_back(a[i].first, a[i].second + b[j].second);
            ++i;
            ++j;
        }
    }
    for (; i < a.size(); ++i) out.push_back(a[i]);
    for (; j < b.size(); ++j) out.push_back(b[j]);
    return out;
}

VarId VarRegistry::declare(const std::string& name) {
    auto it = ids_.find(name);
    if (it != ids_.end()) return it->second;
    VarId id = static_cast<VarId>(names_.size());
    names_.push_back(name);
    ids_.emplace(name, id);
    return id;
}

std::optional<VarId> VarRegistry::find(const std::string& name) const {
    auto it = ids_.find(name);
    if (it == ids_.end()) return std::nullopt;
    return it->second;
}

const std::string& VarRegistry::name(VarId id) const {
    return names_.at(static_cast<std::size_t>(id));
}

Polynomial::Polynomial(double constant) {
    if (std::abs(constant) > kDropTol) terms_[{}] = constant;
}

Polynomial Polynomial::variable(VarId v) {
    Polynomial p;
    p.terms_[{{v, 1}}] = 1.0;
    return p;
}

int Polynomial::degree() const {
    int d = 0;
    for (const auto& [m, c] : terms_) d = std::max(d, monomial_degree(m));
    return d;
}

double Polynomial::constant_term() const {
    auto it = terms_.find({});
    return it == terms_.end() ? 0.0 : it->second;
}

std::vector<VarId> Polynomial::variables() const {
    std::vector<VarId> out;
    for (const auto& [m, c] : terms_)
        for (const auto& [v, e] : m) out.push_back(v);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

void Polynomial::add_term(const Monomial& m, double coeff) {
    auto [it, inserted] = terms_.try_emplace(m, coeff);
    if (!inserted) it->second += coeff;
    if (std::abs(it->second) <= kDropTol) terms_.erase(it);
}

void Polynomial::prune() {
    for (auto it = terms_.begin(); it != terms_.end();) {
        if (std::abs(it->second) <= kDropTol)
            it = terms_.erase(it);
        else
            ++it;
    }
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
    Polynomial r = *this;
    r += o;
    return r;
}

Polynomial Polynomial::operator-(const Polynomial& o) const {
    Polynomial r = *this;
    r -= o;
    return r;
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& o) {
    for (const auto& [m, c] : o.terms_) add_term(m, -c);
    return *this;
}

Polynomial Polynomial::operator*(const Polynomial& o) const {
    Polynomial r;
    for (const auto& [ma, ca] : terms_)
        for (const auto& [mb, cb] : o.terms_)
            r.add_term(monomial_mul(ma, mb), ca * cb);
    r.prune();
    return r;
}

Polynomial Polynomial::operator*(double s) const {
    Polynomial r;
    for (const auto& [m, c] : terms_) {
        double v = c * s;
        if (std::abs(v) > kDropTol) r.terms_[m] = v;
    }
    return r;
}

Polynomial Polynomial::substitute_linear(const std::map<VarId, Polynomial>& map) const {
    Polynomial out;
    for (const auto& [m, c] : terms_) {
        Polynomial term(1.0);
        bool scaled = false;
        double scalar = c;
        for (const auto& [v, e] : m) {
            auto it = map.find(v);
            if (it == map.end())
                throw std::invalid_argument("substitute_linear: unmapped variable id " +
                                            std::to_string(v));
            for (int k = 0; k < e; ++k) term = term * it->second;
            scaled = true;
        }
        (void)scaled;
        out += term * scalar;
    }
    out.prune();
    return out;
}

double Polynomial::evaluate(const std::map<VarId, double>& point) const {
    double sum = 0.0;
    for (const auto& [m, c] : terms_) {
        double t = c;
        for (const auto& [v, e] : m) {
            auto it = point.find(v);
            if (it == point.end())
                throw std::invalid_argument("evaluate: missing variable id " + std::to_string(v));
            t *= std::pow(it->second, e);
        }
        sum += t;
    }
    return sum;
}

double Polynomial::evaluate_dense(const std::vector<double>& point) const {
    double sum = 0.0;
    for (const auto& [m, c] : terms_) {
        double t = c;
        for (const auto& [v, e] : m) t *= std::pow(point.at(static_cast<std::size_t>(v)), e);
        sum += t;
    }
    return sum;
}

Polynomial Polynomial::differentiate(VarId v) const {
    Polynomial out;
    for (const auto& [m, c] : terms_) {
        for (std::size_t i = 0; i < m.size(); ++i) {
            if (m[i].first != v) continue;
            Monomial dm = m;
            int e = dm[i].second;
            if (e == 1)
                dm.erase(dm.begin() + static_cast<std::ptrdiff_t>(i));
            else
                dm[i].second = e - 1;
            out.add_term(dm, c * e);
        }
    }
    return out;
}

int Polynomial::degree_in(const std::vector<VarId>& vars) const {
    int d = 0;
    for (const auto& [m, c] : terms_) {
        int t = 0;
        for (const auto& [v, e] : m)
            if (std::find(vars.begin(), vars.end(), v) != vars.end()) t += e;
        d = std::max(d, t);
    }
    return d;
}

namespace {

struct Parser {
    const std::string& text;
    const VarRegistry& vars;
    std::size_t pos = 0;
    int line = 1;

    void skip_ws() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) {
            if (text[pos] == '\n') ++line;
            ++pos;
        }
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError("polynomial parse error at offset " + std::to_string(pos) + ": " + msg);
    }

    bool peek(char c) {
        skip_ws();
        return pos < text.size() && text[pos] == c;
    }

    bool accept(char c) {
        if (peek(c)) {
            ++pos;
            return true;
        }
        return false;
    }

    Polynomial parse_expr() {
        Polynomial r = accept('-') ? Polynomial(0.0) - parse_term() : parse_term();
        for (;;) {
            if (accept('+'))
                r += parse_term();
            else if (accept('-'))
                r -= parse_term();
            else
                break;
        }
        return r;
    }

    Polynomial parse_term() {
        Polynomial r = parse_power();
        while (accept('*')) r = r * parse_power();
        return r;
    }

    Polynomial parse_power() {
        Polynomial base = parse_atom();
        if (accept('^')) {
            skip_ws();
            std::size_t start = pos;
            while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
            if (pos == start) fail("expected non-negative integer exponent after '^'");
            int e = std::stoi(text.substr(start, pos - start));
            Polynomial r(1.0);
            for (int k = 0; k < e; ++k) r = r * base;
            return r;
        }
        return base;
    }

    Polynomial parse_atom() {
        skip_ws();
        if (pos >= text.size()) fail("unexpected end of input");
        char c = text[pos];
        if (c == '(') {
            ++pos;
            Polynomial r = parse_expr();
            if (!accept(')')) fail("expected ')'");
            return r;
        }
        if (c == '-') {
            ++pos;
            return Polynomial(0.0) - parse_power();
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::size_t start = pos;
            while (pos < text.size() &&
                   (std::isdigit(static_cast<unsigned char>(text[pos])) || text[pos] == '.' ||
                    text[pos] == 'e' || text[pos] == 'E' ||
                    ((text[pos] == '+' || text[pos] == '-') && pos > start &&
                     (text[pos - 1] == 'e' || text[pos - 1] == 'E'))))
                ++pos;
            try {
                return Polynomial(std::stod(text.substr(start, pos - start)));
            } catch (const std::exception&) {
                fail("malformed number");
            }
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos;
            while (pos < text.size() &&
                   (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
                ++pos;
            std::string name = text.substr(start, pos - start);
            auto id = vars.find(name);
            if (!id) fail("unknown variable '" + name + "'");
            return Polynomial::variable(*id);
        }
        fail(std::string("unexpected character '") + c + "'");
    }
};

}  // namespace

Polynomial parse_polynomial(const std::string& text, const VarRegistry& vars) {
    Parser p{text, vars};
    Polynomial r = p.parse_expr();
    p.skip_ws();
    if (p.pos != text.size()) p.fail("trailing input");
    return r;
}

}  // namespace varimin::poly
