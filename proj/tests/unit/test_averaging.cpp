#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "autores/averaging.hpp"
#include "autores/error.hpp"
#include "autores/integrator.hpp"
#include "autores/phase_model.hpp"
#include "autores/stability.hpp"
#include "doctest.h"

using namespace autores;
using namespace autores::averaging;
using phase_model::StabilityClass;

namespace {

constexpr double kPi = std::numbers::pi;

phase_model::PhaseRoot pick(const ModelParams& p, StabilityClass c) {
    for (const auto& r : phase_model::find_roots(p.delta(), p.nu))
        if (r.stability_class == c) return r;
    FAIL("no root of the requested class");
    return {};
}

struct CaseII {
    explicit CaseII(double lambda = 1.0, double nu = 1.0)
        : p(params_for_delta(lambda, nu, phase_model::bifurcation_delta(nu, -1))), r(pick(p, StabilityClass::CaseII)) {}
    ModelParams p;
    phase_model::PhaseRoot r;
};

// Composite Simpson on [0, b].
template <class F>
double simpson(F f, double b, int n = 2000) {
    const double h = b / n;
    double s = f(0.0) + f(b);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(i * h);
    return s * h / 3.0;
}

// Lindstedt frequency shift of x'' + W^2 x + beta x^2 = 0 rewritten for h_2^0:
// with k = 2 sqrt(lambda), W^2 = k omega_2^2, beta = k P''/2 and energy k I,
// d omega / d I = -5 k^3 P''^2 / (24 W^5).
double lindstedt_slope(double lambda, double omega2, double p2) {
    const double k = 2.0 * std::sqrt(lambda);
    const double W = std::sqrt(k) * omega2;
    return -5.0 * k * k * k * p2 * p2 / (24.0 * std::pow(W, 5));
}

}  // namespace

TEST_CASE("h_-1 and h_2^0 vanish at the origin") {
    CaseII c;
    CHECK(h_minus1(0.0, 0.0, c.r, c.p) == 0.0);
    CHECK(h2_0(0.0, 0.0, c.r, c.p) == 0.0);
}

TEST_CASE("p_integral against Simpson quadrature of P") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int i = 0; i < 20; ++i) {
        const double sigma = u(rng), delta = u(rng), nu = u(rng), Psi = u(rng);
        const double q = simpson([&](double z) { return phase_model::eval_p(sigma + z, delta, nu, 0); }, Psi);
        CHECK(p_integral(sigma, Psi, delta, nu) == doctest::Approx(q).epsilon(1e-10));
    }
}

TEST_CASE("dh_-1/dPsi = P(sigma + Psi), dh_-1/dR = 2 sqrt(lambda) R") {
    const auto p = params_for_delta(1.7, 0.4, 0.3);
    const auto roots = phase_model::find_roots(p.delta(), p.nu);
    REQUIRE_FALSE(roots.empty());
    const auto& r = roots.front();
    const double h = 1e-6;
    for (double Psi : {-2.0, -0.3, 0.0, 0.8, 2.5}) {
        const double R = 0.37;
        const double fd = (h_minus1(R, Psi + h, r, p) - h_minus1(R, Psi - h, r, p)) / (2 * h);
        CHECK(fd == doctest::Approx(phase_model::eval_p(r.sigma + Psi, p.delta(), p.nu, 0)).epsilon(1e-7));
        const double fr = (h_minus1(R + h, Psi, r, p) - h_minus1(R - h, Psi, r, p)) / (2 * h);
        CHECK(fr == doctest::Approx(2.0 * std::sqrt(p.lambda) * R).epsilon(1e-7));
    }
}

TEST_CASE("h_2^0 saddle at (0, 2 phi) with value I_star") {
    for (double lam : {0.5, 1.0, 2.0}) {
        CaseII c(lam);
        const auto k = case2_constants(c.r, c.p);
        const double h = 1e-6;
        const double p2 = 2.0 * k.phi;
        const double dp = (h2_0(0.0, p2 + h, c.r, c.p) - h2_0(0.0, p2 - h, c.r, c.p)) / (2 * h);
        CHECK(std::fabs(dp) < 1e-8);
        CHECK(h2_0(0.0, p2, c.r, c.p) == doctest::Approx(2.0 * std::pow(k.omega2 * k.phi, 2) / 3.0).epsilon(1e-13));
        CHECK(k.i_star == doctest::Approx(2.0 * std::pow(k.omega2 * k.phi, 2) / 3.0).epsilon(1e-15));
        CHECK(k.omega2 * k.omega2 == doctest::Approx(-k.phi * c.r.derivative(2)).epsilon(1e-14));
        CHECK(k.omega0 == doctest::Approx(std::pow(4.0 * lam, 0.25) * k.omega2).epsilon(1e-15));
    }
}

TEST_CASE("h_2^0 needs a double root with P'' < 0") {
    const auto p = params_for_delta(1.0, 0.0, 0.2);
    const auto r = pick(p, StabilityClass::StableCaseI);
    CHECK_THROWS_AS(h2_0(0.0, 0.0, r, p), Error);
    CHECK_THROWS_AS(case2_constants(r, p), Error);
}

TEST_CASE("critical points across the triple-root bifurcation at nu = 0") {
    auto count_for = [](double delta) {
        const auto p = params_for_delta(1.0, 0.0, delta);
        const auto roots = phase_model::find_roots(p.delta(), p.nu);
        return std::pair{critical_points(roots.front(), p), roots.front()};
    };
    {
        const auto [cps, ref] = count_for(-0.6);
        CHECK(cps.size() == 4);
        int centers = 0, saddles = 0;
        for (const auto& cp : cps) {
            CHECK(cp.R == 0.0);
            centers += cp.kind == CriticalKind::Center;
            saddles += cp.kind == CriticalKind::Saddle;
        }
        CHECK(centers == 2);
        CHECK(saddles == 2);
    }
    {
        const auto p = params_for_delta(1.0, 0.0, -0.5);
        const auto r = pick(p, StabilityClass::UnstableSimple);
        const auto cps = critical_points(r, p);
        CHECK(cps.size() == 2);
        int degenerate = 0;
        for (const auto& cp : cps) {
            if (cp.kind != CriticalKind::Degenerate) continue;
            ++degenerate;
            CHECK(cp.multiplicity == 3);
            CHECK(cp.Psi == doctest::Approx(kPi - r.sigma).epsilon(1e-9));
        }
        CHECK(degenerate == 1);
    }
    CHECK(count_for(-0.4).first.size() == 2);
}

TEST_CASE("critical point kinds follow the Hessian sign") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 20; ++i) {
        const auto p = params_for_delta(0.5 + u(rng), kPi * u(rng), 2.0 * u(rng) - 1.0);
        const auto roots = phase_model::find_roots(p.delta(), p.nu);
        const auto& ref = roots.front();
        for (const auto& cp : critical_points(ref, p)) {
            if (cp.kind == CriticalKind::Degenerate) continue;
            const double h = 1e-4;
            const double hrr = (h_minus1(h, cp.Psi, ref, p) - 2 * h_minus1(0, cp.Psi, ref, p) +
                                h_minus1(-h, cp.Psi, ref, p)) / (h * h);
            const double hpp = (h_minus1(0, cp.Psi + h, ref, p) - 2 * h_minus1(0, cp.Psi, ref, p) +
                                h_minus1(0, cp.Psi - h, ref, p)) / (h * h);
            const double hrp = (h_minus1(h, cp.Psi + h, ref, p) - h_minus1(h, cp.Psi - h, ref, p) -
                                h_minus1(-h, cp.Psi + h, ref, p) + h_minus1(-h, cp.Psi - h, ref, p)) / (4 * h * h);
            const double det = hrr * hpp - hrp * hrp;
            CHECK((det > 0.0) == (cp.kind == CriticalKind::Center));
            // gradient vanishes
            CHECK(std::fabs(phase_model::eval_p(ref.sigma + cp.Psi, p.delta(), p.nu, 0)) < 1e-10);
        }
    }
}

TEST_CASE("critical point count changes only where gamma changes sign") {
    for (double nu : {0.3, kPi / 6.0, 1.2}) {
        std::size_t prev = 0;
        double prev_gamma = 0.0;
        for (int i = 0; i <= 300; ++i) {
            const double delta = -1.5 + 0.01 * i;
            const double g = phase_model::gamma(delta, nu);
            const auto p = params_for_delta(1.0, nu, delta);
            const auto roots = phase_model::find_roots(p.delta(), p.nu);
            const std::size_t n = critical_points(roots.front(), p).size();
            if (i > 0 && n != prev) {
                INFO("nu = " << nu << ", delta = " << delta);
                CHECK((g * prev_gamma <= 0.0 || std::fabs(g) < 1e-6 || std::fabs(prev_gamma) < 1e-6));
            }
            prev = n;
            prev_gamma = g;
        }
    }
}

TEST_CASE("level grid and CSV") {
    CaseII c;
    const auto grid = level_grid(c.r, c.p, {-1.0, 1.0}, {-kPi, kPi}, 5, 7);
    REQUIRE(grid.size() == 35);
    CHECK(grid.front().R == -1.0);
    CHECK(grid.front().Psi == -kPi);
    CHECK(grid.back().R == 1.0);
    CHECK(grid.back().Psi == kPi);
    CHECK(grid[8].h == h_minus1(grid[8].R, grid[8].Psi, c.r, c.p));
    std::ostringstream os;
    write_level_csv(os, grid);
    std::istringstream is(os.str());
    std::string line;
    int n = 0;
    std::getline(is, line);
    CHECK(line == "R,Psi,h");
    while (std::getline(is, line)) ++n;
    CHECK(n == 35);
    CHECK_THROWS_AS(level_grid(c.r, c.p, {0, 1}, {0, 1}, 1, 5), Error);
}

TEST_CASE("action-angle table: small-I frequency and Lindstedt slope") {
    for (double lam : {0.5, 1.0, 2.0}) {
        CaseII c(lam);
        const auto k = case2_constants(c.r, c.p);
        const auto t = action_angle_table(c.r, c.p, std::vector<double>{k.i_star * 1e-3, k.i_star * 2e-3});
        CHECK(t.I_star == k.i_star);
        CHECK(t.rows[0].omega == doctest::Approx(k.omega0).epsilon(1e-3));
        const double slope = (t.rows[1].omega - t.rows[0].omega) / (t.rows[1].I - t.rows[0].I);
        CHECK(slope == doctest::Approx(lindstedt_slope(lam, k.omega2, k.p2)).epsilon(0.05));
    }
}

TEST_CASE("action-angle table invariants") {
    CaseII c;
    const auto t = action_angle_table(c.r, c.p, 12);
    REQUIRE(t.rows.size() == 12);
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& row = t.rows[i];
        CHECK(row.I > 0.0);
        CHECK(row.I < t.I_star);
        CHECK(row.T * row.omega == doctest::Approx(2.0 * kPi).epsilon(1e-15));
        CHECK(row.closure <= 1e-8);
        CHECK(row.energy_drift <= 1e-9);
        if (i > 0) {
            CHECK(row.I > t.rows[i - 1].I);
            CHECK(row.omega < t.rows[i - 1].omega);
        }
    }
    std::ostringstream os;
    write_action_angle_csv(os, t);
    CHECK(os.str().rfind("I,T,omega\n", 0) == 0);
}

TEST_CASE("action-angle period against the elliptic-integral closed form") {
    // T = 2 K(k) / (lambda^(1/4) sqrt(c (p3 - p_-))), k^2 = (p_+ - p_-)/(p3 - p_-),
    // c = -P''/6 and p_- < p_+ < p3 the roots of h_2^0(0, p) = I.
    CaseII c;
    const auto k = case2_constants(c.r, c.p);
    for (double frac : {0.1, 0.5, 0.9}) {
        const double I = frac * k.i_star;
        const auto t = action_angle_table(c.r, c.p, std::vector<double>{I});
        // roots of P''/6 p^3 + w2/2 p^2 - I by bisection on the three brackets
        auto g = [&](double p) { return k.p2 * p * p * p / 6.0 + 0.5 * k.omega2 * k.omega2 * p * p - I; };
        auto bisect = [&](double a, double b) {
            for (int i = 0; i < 200; ++i) {
                const double m = 0.5 * (a + b);
                (g(a) * g(m) <= 0.0 ? b : a) = m;
            }
            return 0.5 * (a + b);
        };
        const double pm = bisect(-100.0, 0.0);
        const double pp = bisect(0.0, 2.0 * k.phi);
        const double p3 = bisect(2.0 * k.phi, 100.0);
        const double cc = -k.p2 / 6.0;
        const double kk = std::sqrt((pp - pm) / (p3 - pm));
        const double T = 2.0 * std::comp_ellint_1(kk) / (std::pow(c.p.lambda, 0.25) * std::sqrt(cc * (p3 - pm)));
        CHECK(t.rows[0].T == doctest::Approx(T).epsilon(1e-9));
    }
}

TEST_CASE("action-angle errors") {
    CaseII c;
    const auto k = case2_constants(c.r, c.p);
    try {
        action_angle_table(c.r, c.p, std::vector<double>{k.i_star});
        FAIL("expected SeparatrixProximity");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::SeparatrixProximity);
    }
    CHECK_THROWS_AS(action_angle_table(c.r, c.p, std::vector<double>{0.0}), Error);
    CHECK_THROWS_AS(action_angle_table(c.r, c.p, std::vector<double>{0.2, 0.1}), Error);
    CHECK_THROWS_AS(action_angle_table(c.r, c.p, 0), Error);
    // just below the separatrix the orbit still closes
    const auto t = action_angle_table(c.r, c.p, std::vector<double>{k.i_star * (1.0 - 1e-9)});
    CHECK(t.rows[0].T > 3.0 * 2.0 * kPi / k.omega0);
}

TEST_CASE("action_of_state is the h_2^0 level inside the separatrix") {
    CaseII c;
    const auto k = case2_constants(c.r, c.p);
    CHECK(action_of_state(0.1, 0.05, c.r, c.p) == h2_0(0.1, 0.05, c.r, c.p));
    try {
        action_of_state(0.0, 2.5 * k.phi, c.r, c.p);
        FAIL("expected OutOfDomain");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::OutOfDomain);
    }
    CHECK_THROWS_AS(action_of_state(10.0, 0.0, c.r, c.p), Error);
}

TEST_CASE("U2 approaches the action at rate s^(-2/9)") {
    CaseII c;
    const auto sol = series::build_solution(c.p, c.r, -1);
    const double r = 0.1, p = 0.05;
    const double I = action_of_state(r, p, c.r, c.p);
    double prev = std::numeric_limits<double>::infinity();
    for (double tau : {1e3, 1e4, 1e5, 1e6}) {
        const auto [x, y] = stability::from_scaled(stability::LyapunovKind::U2, r, p, tau);
        const auto v = stability::lyapunov_eval_deviation(stability::LyapunovKind::U2, c.p, sol, x, y, tau, 1.0);
        const double scaled = std::fabs(v.value - I) * std::pow(v.time, 2.0 / 9.0);
        CHECK(scaled < 1e-3);
        CHECK(scaled <= prev * 1.01);
        prev = scaled;
    }
}

TEST_CASE("envelope fit recovers a planted law") {
    std::vector<double> tau, d;
    for (double t = 10.0; t < 400.0; t += 0.01) {
        tau.push_back(t);
        d.push_back(std::pow(t, -0.375) * std::cos(std::pow(t, 1.25)));
    }
    const auto f = envelope_fit_signal(tau, d);
    CHECK(f.amp_exponent == doctest::Approx(-0.375).epsilon(0.01 / 0.375));
    CHECK(f.phase_exponent == doctest::Approx(1.25).epsilon(0.01 / 1.25));
    CHECK(f.phase_coeff == doctest::Approx(1.0).epsilon(0.01));
    CHECK(f.amp_coeff == doctest::Approx(1.0).epsilon(0.02));
    CHECK(f.tau_min >= 30.0);
    CHECK(f.n_extrema > 100);

    // scale equivariance
    std::vector<double> d7(d);
    for (double& v : d7) v *= 7.0;
    const auto g = envelope_fit_signal(tau, d7);
    CHECK(g.amp_coeff == doctest::Approx(7.0 * f.amp_coeff).epsilon(1e-12));
    CHECK(g.amp_exponent == doctest::Approx(f.amp_exponent).epsilon(1e-12));
    CHECK(g.phase_exponent == f.phase_exponent);
}

TEST_CASE("envelope fit needs 10 extrema") {
    std::vector<double> tau, d;
    for (double t = 10.0; t < 50.0; t += 0.01) {
        tau.push_back(t);
        d.push_back(std::cos(t));
    }
    try {
        envelope_fit_signal(tau, d);
        FAIL("expected InsufficientOscillations");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InsufficientOscillations);
    }
    EnvelopeOptions o;
    o.tau_min = 10.0;
    CHECK_NOTHROW(envelope_fit_signal(tau, d, o));
}

TEST_CASE("envelope fit on a Case I trajectory") {
    const auto p = params_for_delta(1.0, 0.0, 0.2);
    const auto r = pick(p, StabilityClass::StableCaseI);
    const auto sol = series::build_solution(p, r, +1);
    const double T0 = 100.0, c = 0.05;
    const auto s0 = series::eval_solution(sol, T0);
    const auto traj = integrator::integrate(p, {T0, s0.rho + c * std::pow(T0, -0.375), s0.psi}, 1000.0);
    const auto f = envelope_fit(traj, sol, p);
    CHECK(f.amp_exponent == doctest::Approx(-0.375).epsilon(0.02 / 0.375));
    const double w1 = std::sqrt(r.derivative(1));
    CHECK(f.phase_coeff == doctest::Approx(std::pow(4.0, 0.25) * w1 * 0.8).epsilon(0.02));
    CHECK(f.amp_coeff == doctest::Approx(c).epsilon(0.1));
}
