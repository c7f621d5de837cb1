#include "edgephase/symbolic.hpp"

#include <algorithm>
#include <sstream>
#include <tuple>

namespace edgephase {

namespace {

using cd = std::complex<double>;

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

CurvatureMonomial product(const CurvatureMonomial& a, const CurvatureMonomial& b) {
    CurvatureMonomial m;
    m.exponents.assign(std::max(a.exponents.size(), b.exponents.size()), 0);
    for (std::size_t d = 0; d < a.exponents.size(); ++d) m.exponents[d] += a.exponents[d];
    for (std::size_t d = 0; d < b.exponents.size(); ++d) m.exponents[d] += b.exponents[d];
    m.normalize();
    return m;
}

// d/ds of a curvature monomial by the product rule.
std::vector<std::pair<double, CurvatureMonomial>> derivative(const CurvatureMonomial& m) {
    std::vector<std::pair<double, CurvatureMonomial>> out;
    for (std::size_t d = 0; d < m.exponents.size(); ++d) {
        const int power = m.exponents[d];
        if (power == 0) continue;
        CurvatureMonomial next = m;
        next.exponents[d] -= 1;
        if (next.exponents.size() <= d + 1) next.exponents.resize(d + 2, 0);
        next.exponents[d + 1] += 1;
        next.normalize();
        out.emplace_back(static_cast<double>(power), next);
    }
    return out;
}

std::vector<std::pair<double, CurvatureMonomial>> nth_derivative(const CurvatureMonomial& m, int j) {
    std::vector<std::pair<double, CurvatureMonomial>> cur{{1.0, m}};
    for (int i = 0; i < j; ++i) {
        std::map<CurvatureMonomial, double> acc;
        for (const auto& [c, mono] : cur) {
            for (const auto& [c2, mono2] : derivative(mono)) acc[mono2] += c * c2;
        }
        std::vector<std::pair<double, CurvatureMonomial>> swapped;
        for (const auto& [mono, c] : acc) swapped.emplace_back(c, mono);
        cur = std::move(swapped);
    }
    return cur;
}

}  // namespace

void CurvatureMonomial::normalize() {
    while (!exponents.empty() && exponents.back() == 0) exponents.pop_back();
}

int CurvatureMonomial::weight() const {
    int w = 0;
    for (std::size_t d = 0; d < exponents.size(); ++d) w += exponents[d] * static_cast<int>(1 + d);
    return w;
}

int CurvatureMonomial::degree() const {
    int w = 0;
    for (int e : exponents) w += e;
    return w;
}

std::string CurvatureMonomial::str() const {
    std::ostringstream os;
    bool first = true;
    for (std::size_t d = 0; d < exponents.size(); ++d) {
        if (exponents[d] == 0) continue;
        if (!first) os << '*';
        first = false;
        os << "kappa";
        if (d > 0) os << "^(" << d << ')';
        if (exponents[d] > 1) os << '^' << exponents[d];
    }
    if (first) os << '1';
    return os.str();
}

Symbol::Symbol(std::vector<SymbolTerm> terms) : terms_(std::move(terms)) { combine(); }

Symbol Symbol::constant(cd c) { return Symbol({SymbolTerm{c, 0, 0, {}, 0}}); }

Symbol Symbol::p() { return Symbol({SymbolTerm{1.0, 0, 0, {}, 1}}); }

Symbol Symbol::curvature(cd c, int eps, int u_power, int derivative_order) {
    CurvatureMonomial m;
    m.exponents.assign(derivative_order + 1, 0);
    m.exponents[derivative_order] = 1;
    return Symbol({SymbolTerm{c, eps, u_power, m, 0}});
}

void Symbol::combine() {
    for (auto& t : terms_) t.curvature.normalize();
    auto key = [](const SymbolTerm& t) { return std::tie(t.eps, t.u_power, t.curvature.exponents, t.p_power); };
    std::sort(terms_.begin(), terms_.end(), [&](const SymbolTerm& a, const SymbolTerm& b) { return key(a) < key(b); });
    std::vector<SymbolTerm> merged;
    for (const auto& t : terms_) {
        if (!merged.empty() && key(merged.back()) == key(t)) {
            merged.back().coeff += t.coeff;
        } else {
            merged.push_back(t);
        }
    }
    std::erase_if(merged, [](const SymbolTerm& t) { return std::abs(t.coeff) < 1e-14; });
    terms_ = std::move(merged);
}

Symbol Symbol::truncated(int max_eps) const {
    std::vector<SymbolTerm> out;
    for (const auto& t : terms_) {
        if (t.eps <= max_eps) out.push_back(t);
    }
    return Symbol(std::move(out));
}

Symbol Symbol::order(int e) const {
    std::vector<SymbolTerm> out;
    for (const auto& t : terms_) {
        if (t.eps == e) out.push_back(t);
    }
    return Symbol(std::move(out));
}

Symbol Symbol::operator+(const Symbol& o) const {
    std::vector<SymbolTerm> all = terms_;
    all.insert(all.end(), o.terms_.begin(), o.terms_.end());
    return Symbol(std::move(all));
}

Symbol Symbol::operator*(cd c) const {
    std::vector<SymbolTerm> all = terms_;
    for (auto& t : all) t.coeff *= c;
    return Symbol(std::move(all));
}

Symbol Symbol::operator-(const Symbol& o) const { return *this + o * cd(-1.0); }

Symbol Symbol::multiply(const Symbol& o, int max_eps) const {
    std::vector<SymbolTerm> out;
    for (const auto& a : terms_) {
        for (const auto& b : o.terms_) {
            const int base_eps = a.eps + b.eps;
            for (int j = 0; j <= a.p_power && base_eps + j <= max_eps; ++j) {
                if (j > 0 && b.curvature.exponents.empty()) break;
                const cd factor = a.coeff * b.coeff * binomial(a.p_power, j) * std::pow(cd(0.0, -1.0), j);
                for (const auto& [c, mono] : nth_derivative(b.curvature, j)) {
                    out.push_back(SymbolTerm{factor * c, base_eps + j, a.u_power + b.u_power,
                                             product(a.curvature, mono), a.p_power - j + b.p_power});
                }
            }
        }
    }
    return Symbol(std::move(out));
}

Symbol expand_strip_symbol(int max_eps) {
    const Symbol d = Symbol::p() - Symbol::curvature(0.5, 1, 2, 0);

    std::vector<SymbolTerm> ginv;
    for (int j = 0; j <= max_eps; ++j) {
        CurvatureMonomial m;
        if (j > 0) m.exponents = {j};
        ginv.push_back(SymbolTerm{static_cast<double>(j + 1), j, j, m, 0});
    }

    // eps^2 V(s, eps u) with sqrt(g) = 1 - eps u kappa
    std::vector<SymbolTerm> v;
    for (int j = 0; j <= max_eps; ++j) {
        CurvatureMonomial ddot;
        ddot.exponents = {j, 0, 1};
        v.push_back(SymbolTerm{-0.5 * binomial(j + 2, 2), 3 + j, 1 + j, ddot, 0});
        CurvatureMonomial dot;
        dot.exponents = {j, 2};
        v.push_back(SymbolTerm{-1.25 * binomial(j + 3, 3), 4 + j, 2 + j, dot, 0});
        CurvatureMonomial sq;
        sq.exponents = {j + 2};
        v.push_back(SymbolTerm{-0.25 * (j + 1), 2 + j, j, sq, 0});
    }

    const Symbol kinetic = d.multiply(Symbol(ginv), max_eps).multiply(d, max_eps);
    return (kinetic + Symbol(std::move(v))).truncated(max_eps);
}

GroupedSymbol group_by_curvature(const Symbol& s) {
    GroupedSymbol g;
    for (const auto& t : s.terms()) g.groups[t.curvature].push_back(t);
    return g;
}

}  // namespace edgephase
