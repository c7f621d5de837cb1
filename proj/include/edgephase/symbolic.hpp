#pragma once

#include <complex>
#include <map>
#include <string>
#include <vector>

namespace edgephase {

/// Product of curvature derivatives: exponents[d] is the power of d^d kappa / ds^d.
struct CurvatureMonomial {
    std::vector<int> exponents;

    void normalize();
    bool operator<(const CurvatureMonomial& o) const { return exponents < o.exponents; }
    bool operator==(const CurvatureMonomial& o) const { return exponents == o.exponents; }
    /// Sum over factors of (1 + derivative order).
    int weight() const;
    int degree() const;
    std::string str() const;
};

/// c * eps^e * u^a * F(s) * P^b with P = -i eps d/ds + u, s-functions to the left of P.
struct SymbolTerm {
    std::complex<double> coeff;
    int eps = 0;
    int u_power = 0;
    CurvatureMonomial curvature;
    int p_power = 0;
};

/// Normal-ordered polynomial in eps, u, kappa-derivatives and P.
class Symbol {
public:
    Symbol() = default;
    explicit Symbol(std::vector<SymbolTerm> terms);

    static Symbol constant(std::complex<double> c);
    static Symbol p();
    /// c * eps^e * u^a * kappa^(d)
    static Symbol curvature(std::complex<double> c, int eps, int u_power, int derivative);

    const std::vector<SymbolTerm>& terms() const { return terms_; }
    Symbol truncated(int max_eps) const;
    /// Terms of exactly the given eps order.
    Symbol order(int e) const;

    Symbol operator+(const Symbol& o) const;
    Symbol operator-(const Symbol& o) const;
    Symbol operator*(std::complex<double> c) const;
    /// Operator product, reordering s-functions to the left via [P, F] = -i eps F'.
    Symbol multiply(const Symbol& o, int max_eps) const;

    /// Symbol value at (s, k) and transverse coordinate u with P -> k + u; eps factors dropped.
    template <class Curv>
    std::complex<double> evaluate(const Curv& kappa_derivative, double k, double u) const;

private:
    void combine();
    std::vector<SymbolTerm> terms_;
};

/// Expansion of D g^{-1} D + eps^2 V in powers of eps = 1/beta, with
/// D = P - eps u^2 kappa / 2, g = (1 - eps u kappa)^2 and the curvature potential V.
/// The transverse kinetic term -d^2/du^2 is not included.
Symbol expand_strip_symbol(int max_eps);

/// Left-quantized symbol pieces of order eps^j grouped by curvature monomial:
/// value = sum over terms of coeff * u^a * (k+u)^b.
struct GroupedSymbol {
    std::map<CurvatureMonomial, std::vector<SymbolTerm>> groups;
};
GroupedSymbol group_by_curvature(const Symbol& s);

template <class Curv>
std::complex<double> Symbol::evaluate(const Curv& kappa_derivative, double k, double u) const {
    std::complex<double> acc = 0.0;
    for (const SymbolTerm& t : terms_) {
        std::complex<double> v = t.coeff;
        for (int a = 0; a < t.u_power; ++a) v *= u;
        for (int b = 0; b < t.p_power; ++b) v *= (k + u);
        for (std::size_t d = 0; d < t.curvature.exponents.size(); ++d) {
            const double kd = kappa_derivative(static_cast<int>(d));
            for (int j = 0; j < t.curvature.exponents[d]; ++j) v *= kd;
        }
        acc += v;
    }
    return acc;
}

}  // namespace edgephase
