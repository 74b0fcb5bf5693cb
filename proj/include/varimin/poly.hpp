#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace varimin::poly {

/// Identifier of one scalar variable (a DOF, a spatial coordinate, or a
/// field symbol during parsing). Ids are dense within a registry.
using VarId = int;

/// Sorted list of (variable, positive exponent) pairs. The empty list is the
/// constant monomial.
using Monomial = std::vector<std::pair<VarId, int>>;

int monomial_degree(const Monomial& m);
Monomial monomial_mul(const Monomial& a, const Monomial& b);

/// Maps variable names to dense ids. Two distinct semantic variables never
/// share an id.
class VarRegistry {
public:
    VarId declare(const std::string& name);
    std::optional<VarId> find(const std::string& name) const;
    const std::string& name(VarId id) const;
    int size() const { return static_cast<int>(names_.size()); }

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, VarId> ids_;
};

/// Sparse multivariate polynomial with real coefficients. Terms are kept in a
/// canonical sorted map with no zero coefficients; coefficients whose
/// magnitude falls below 1e-14 after arithmetic are dropped.
class Polynomial {
public:
    static constexpr double kDropTol = 1e-14;

    Polynomial() = default;
    explicit Polynomial(double constant);
    static Polynomial variable(VarId v);

    const std::map<Monomial, double>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    int degree() const;
    double constant_term() const;
    std::vector<VarId> variables() const;

    void add_term(const Monomial& m, double coeff);

    Polynomial operator+(const Polynomial& o) const;
    Polynomial operator-(const Polynomial& o) const;
    Polynomial operator*(const Polynomial& o) const;
    Polynomial operator*(double s) const;
    Polynomial& operator+=(const Polynomial& o);
    Polynomial& operator-=(const Polynomial& o);

    /// Replaces every variable by an affine polynomial (degree <= 1), fully
    /// expanded. Every variable of *this must appear in the map.
    Polynomial substitute_linear(const std::map<VarId, Polynomial>& map) const;

    /// Monomial-sum evaluation in sorted term order. Every variable of *this
    /// must appear in the point.
    double evaluate(const std::map<VarId, double>& point) const;

    /// Evaluation against a dense vector indexed by VarId.
    double evaluate_dense(const std::vector<double>& point) const;

    Polynomial differentiate(VarId v) const;

    /// Total degree counting only the given variables.
    int degree_in(const std::vector<VarId>& vars) const;

private:
    void prune();
    std::map<Monomial, double> terms_;
};

inline Polynomial operator*(double s, const Polynomial& p) { return p * s; }

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Parses the polynomial text grammar: identifiers from `vars`, decimal
/// literals, `+ - * ^`, parentheses, `^` only to non-negative integer
/// literals. Whitespace insignificant.
Polynomial parse_polynomial(const std::string& text, const VarRegistry& vars);

}  // namespace varimin::poly
