#include "autores/puiseux.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "autores/error.hpp"
#include "autores/format.hpp"

namespace autores {

namespace {

std::pair<PuiseuxSeries, PuiseuxSeries> common_grid(const PuiseuxSeries& a, const PuiseuxSeries& b) {
    if (a.q == b.q) return {a, b};
    const int l = std::lcm(a.q, b.q);
    return {a.lifted(l), b.lifted(l)};
}

double coeff_or_zero(const PuiseuxSeries& s, int e) {
    const int k = e - s.offset;
    return (k >= 0 && k < s.trunc_order()) ? s.coeffs[static_cast<std::size_t>(k)] : 0.0;
}

// sum_k f_k(c) h^k / k! with f_k the k-th derivative of sin (is_sin) or cos.
PuiseuxSeries taylor_around(double c, const PuiseuxSeries& h, bool is_sin) {
    for (int e = h.offset; e <= 0 && e < h.horizon(); ++e)
        if (coeff_or_zero(h, e) != 0.0)
            throw Error(ErrorKind::ConstantTermPresent, "expansion point series has a term at exponent " +
                                                             std::to_string(e) + "/" + std::to_string(h.q));
    const int horizon = h.horizon();
    if (horizon <= 0) throw Error(ErrorKind::OrderUnderflow, "no known terms in the increment series");
    const double s = std::sin(c), co = std::cos(c);
    const double cyc_sin[4] = {s, co, -s, -co};
    const double cyc_cos[4] = {co, -s, -co, s};
    const double* cyc = is_sin ? cyc_sin : cyc_cos;

    std::vector<double> out(static_cast<std::size_t>(horizon), 0.0);
    out[0] = cyc[0];
    if (horizon > 1) {
        std::vector<double> tail;
        for (int e = 1; e < horizon; ++e) tail.push_back(coeff_or_zero(h, e));
        const PuiseuxSeries inc(h.q, 1, std::move(tail));
        PuiseuxSeries power = inc;
        double factorial = 1.0;
        for (int k = 1; power.offset < horizon; ++k) {
            factorial *= k;
            const double w = cyc[k % 4] / factorial;
            if (w != 0.0)
                for (int e = power.offset; e < horizon; ++e) out[static_cast<std::size_t>(e)] += w * power.at(e);
            power = power * inc;
        }
    }
    return {h.q, 0, std::move(out)};
}

}  // namespace

PuiseuxSeries::PuiseuxSeries(int q_, int offset_, std::vector<double> coeffs_)
    : q(q_), offset(offset_), coeffs(std::move(coeffs_)) {
    if (q <= 0) throw Error(ErrorKind::InvalidArgument, "exponent denominator q must be positive");
}

PuiseuxSeries PuiseuxSeries::constant(double value, int q, int trunc_order) {
    if (trunc_order <= 0) throw Error(ErrorKind::OrderUnderflow, "constant needs at least one term");
    std::vector<double> c(static_cast<std::size_t>(trunc_order), 0.0);
    c[0] = value;
    return {q, 0, std::move(c)};
}

PuiseuxSeries PuiseuxSeries::monomial(double c, int exponent, int q, int horizon) {
    if (horizon <= exponent) throw Error(ErrorKind::OrderUnderflow, "monomial horizon below its exponent");
    std::vector<double> v(static_cast<std::size_t>(horizon - exponent), 0.0);
    v[0] = c;
    return {q, exponent, std::move(v)};
}

double PuiseuxSeries::at(int exponent) const {
    if (exponent >= horizon())
        throw Error(ErrorKind::OrderUnderflow, "coefficient at exponent " + std::to_string(exponent) +
                                                   " is beyond the truncation horizon " + std::to_string(horizon()));
    return coeff_or_zero(*this, exponent);
}

int PuiseuxSeries::leading_exponent(double tol) const {
    for (int k = 0; k < trunc_order(); ++k)
        if (std::fabs(coeffs[static_cast<std::size_t>(k)]) > tol) return offset + k;
    return horizon();
}

PuiseuxSeries PuiseuxSeries::lifted(int new_q) const {
    if (new_q % q != 0) throw Error(ErrorKind::InvalidArgument, "lift target must be a multiple of q");
    const int f = new_q / q;
    std::vector<double> c(static_cast<std::size_t>(trunc_order() * f), 0.0);
    for (std::size_t k = 0; k < coeffs.size(); ++k) c[k * static_cast<std::size_t>(f)] = coeffs[k];
    return {new_q, offset * f, std::move(c)};
}

PuiseuxSeries PuiseuxSeries::truncated(int new_horizon) const {
    if (new_horizon <= offset) throw Error(ErrorKind::OrderUnderflow, "truncation would drop every term");
    const int n = std::min(trunc_order(), new_horizon - offset);
    return {q, offset, std::vector<double>(coeffs.begin(), coeffs.begin() + n)};
}

PuiseuxSeries PuiseuxSeries::padded(int new_horizon) const {
    PuiseuxSeries out = *this;
    if (new_horizon > horizon()) out.coeffs.resize(static_cast<std::size_t>(new_horizon - offset), 0.0);
    return out;
}

PuiseuxSeries PuiseuxSeries::derivative() const {
    std::vector<double> c(coeffs.size());
    for (std::size_t k = 0; k < coeffs.size(); ++k)
        c[k] = -static_cast<double>(offset + static_cast<int>(k)) / q * coeffs[k];
    return {q, offset + q, std::move(c)};
}

double PuiseuxSeries::eval(double tau) const { return eval_z(std::pow(tau, -1.0 / q)); }

double PuiseuxSeries::eval_z(double z) const {
    double acc = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * z + *it;
    double zp = 1.0;
    const double base = offset < 0 ? 1.0 / z : z;
    for (int k = 0; k < std::abs(offset); ++k) zp *= base;
    return acc * zp;
}

double PuiseuxSeries::eval_abs(double tau) const {
    const double z = std::pow(tau, -1.0 / q);
    double acc = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * z + std::fabs(*it);
    return acc * std::pow(z, offset);
}

std::string PuiseuxSeries::to_string() const {
    std::ostringstream os;
    for (int k = 0; k < trunc_order(); ++k) {
        const double c = coeffs[static_cast<std::size_t>(k)];
        if (c == 0.0) continue;
        os << (c < 0 ? " - " : " + ") << fmt17(std::fabs(c)) << " z^" << offset + k;
    }
    os << " + O(z^" << horizon() << "), z = tau^(-1/" << q << ")";
    return os.str();
}

PuiseuxSeries operator+(const PuiseuxSeries& a0, const PuiseuxSeries& b0) {
    const auto [a, b] = common_grid(a0, b0);
    const int off = std::min(a.offset, b.offset);
    const int hor = std::min(a.horizon(), b.horizon());
    if (hor <= off) throw Error(ErrorKind::OrderUnderflow, "sum retains no terms");
    std::vector<double> c(static_cast<std::size_t>(hor - off));
    for (int e = off; e < hor; ++e) c[static_cast<std::size_t>(e - off)] = coeff_or_zero(a, e) + coeff_or_zero(b, e);
    return {a.q, off, std::move(c)};
}

PuiseuxSeries operator-(const PuiseuxSeries& a) { return -1.0 * a; }

PuiseuxSeries operator-(const PuiseuxSeries& a, const PuiseuxSeries& b) { return a + (-b); }

PuiseuxSeries operator*(const PuiseuxSeries& a0, const PuiseuxSeries& b0) {
    const auto [a, b] = common_grid(a0, b0);
    const int n = std::min(a.trunc_order(), b.trunc_order());
    if (n <= 0) throw Error(ErrorKind::OrderUnderflow, "product retains no terms");
    std::vector<double> c(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        const double ai = a.coeffs[static_cast<std::size_t>(i)];
        if (ai == 0.0) continue;
        for (int j = 0; i + j < n; ++j) c[static_cast<std::size_t>(i + j)] += ai * b.coeffs[static_cast<std::size_t>(j)];
    }
    return {a.q, a.offset + b.offset, std::move(c)};
}

PuiseuxSeries operator*(double s, const PuiseuxSeries& a) {
    PuiseuxSeries out = a;
    for (auto& c : out.coeffs) c *= s;
    return out;
}

PuiseuxSeries operator*(const PuiseuxSeries& a, double s) { return s * a; }

PuiseuxSeries series_sin_around(double c, const PuiseuxSeries& h) { return taylor_around(c, h, true); }
PuiseuxSeries series_cos_around(double c, const PuiseuxSeries& h) { return taylor_around(c, h, false); }

}  // namespace autores
