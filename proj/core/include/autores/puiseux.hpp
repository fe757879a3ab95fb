#pragma once

#include <string>
#include <vector>

namespace autores {

// Truncated series sum_k coeffs[k] z^(offset+k) in z = tau^(-1/q).
// Coefficients are known for exponents in [offset, horizon()); everything
// from horizon() on is unknown, not zero.
struct PuiseuxSeries {
    int q = 1;
    int offset = 0;
    std::vector<double> coeffs;

    PuiseuxSeries() = default;
    PuiseuxSeries(int q_, int offset_, std::vector<double> coeffs_);

    static PuiseuxSeries constant(double value, int q, int trunc_order);
    // Single term c z^exponent, known exactly up to (not including) `horizon`.
    static PuiseuxSeries monomial(double c, int exponent, int q, int horizon);

    int trunc_order() const { return static_cast<int>(coeffs.size()); }
    int horizon() const { return offset + trunc_order(); }

    // Coefficient at z^exponent; zero below offset. Throws OrderUnderflow at or
    // beyond the horizon.
    double at(int exponent) const;

    // Exponent of the first coefficient with |c| > tol, or horizon() if none.
    int leading_exponent(double tol = 0.0) const;

    // Same series over z' = tau^(-1/new_q); new_q must be a multiple of q.
    PuiseuxSeries lifted(int new_q) const;
    // Keeps exponents below `horizon`.
    PuiseuxSeries truncated(int horizon) const;
    // Declares the (finitely many) stored terms exact and pads with zeros up to
    // `horizon`. Only meaningful for series that really are polynomials in z.
    PuiseuxSeries padded(int horizon) const;

    // d/dtau, using d z^e / dtau = -(e/q) z^(e+q).
    PuiseuxSeries derivative() const;

    double eval(double tau) const;
    // Same sum at a precomputed z = tau^(-1/q).
    double eval_z(double z) const;
    // Sum of |c_k| tau^(-(offset+k)/q).
    double eval_abs(double tau) const;

    std::string to_string() const;
};

PuiseuxSeries operator+(const PuiseuxSeries& a, const PuiseuxSeries& b);
PuiseuxSeries operator-(const PuiseuxSeries& a, const PuiseuxSeries& b);
PuiseuxSeries operator-(const PuiseuxSeries& a);
PuiseuxSeries operator*(const PuiseuxSeries& a, const PuiseuxSeries& b);
PuiseuxSeries operator*(double s, const PuiseuxSeries& a);
PuiseuxSeries operator*(const PuiseuxSeries& a, double s);

inline PuiseuxSeries series_add(const PuiseuxSeries& a, const PuiseuxSeries& b) { return a + b; }
inline PuiseuxSeries series_mul(const PuiseuxSeries& a, const PuiseuxSeries& b) { return a * b; }
inline PuiseuxSeries series_scale(const PuiseuxSeries& a, double s) { return s * a; }

// sin(c + h) and cos(c + h) for h -> 0 (no terms at exponent <= 0).
PuiseuxSeries series_sin_around(double c, const PuiseuxSeries& h);
PuiseuxSeries series_cos_around(double c, const PuiseuxSeries& h);

}  // namespace autores
