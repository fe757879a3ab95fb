#include "autores/phase_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "autores/error.hpp"
#include "autores/format.hpp"

namespace autores::phase_model {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_angle(double s) {
    s = std::fmod(s, kTwoPi);
    if (s < 0.0) s += kTwoPi;
    if (kTwoPi - s < 1e-13) s = 0.0;
    return s;
}

double circular_distance(double a, double b) {
    const double d = std::fabs(a - b);
    return std::min(d, kTwoPi - d);
}

// Sign-change scan of P^(order) on a uniform grid, each bracket refined by
// bisection to machine resolution and finished with one guarded Newton step.
std::vector<double> scan_zeros(double delta, double nu, int order) {
    std::vector<double> zeros;
    const double h = kTwoPi / kScanPoints;
    auto f = [&](double s) { return eval_p(s, delta, nu, order); };
    double a = 0.0;
    double fa = f(a);
    for (int i = 0; i < kScanPoints; ++i) {
        const double b = (i + 1 == kScanPoints) ? kTwoPi : h * (i + 1);
        const double fb = f(b);
        if (fa == 0.0) {
            zeros.push_back(a);
        } else if (fb != 0.0 && std::signbit(fa) != std::signbit(fb)) {
            double lo = a, hi = b, flo = fa;
            for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (mid <= lo || mid >= hi) break;
                const double fm = f(mid);
                if (fm == 0.0) { lo = hi = mid; break; }
                if (std::signbit(fm) == std::signbit(flo)) { lo = mid; flo = fm; } else { hi = mid; }
            }
            double s = 0.5 * (lo + hi);
            const double df = eval_p(s, delta, nu, order + 1);
            if (df != 0.0) {
                const double t = s - f(s) / df;
                if (t >= a && t <= b && std::fabs(f(t)) <= std::fabs(f(s))) s = t;
            }
            zeros.push_back(s);
        }
        a = b;
        fa = fb;
    }
    return zeros;
}

}  // namespace

std::string_view to_string(StabilityClass c) noexcept {
    switch (c) {
        case StabilityClass::StableCaseI: return "StableCaseI";
        case StabilityClass::UnstableSimple: return "UnstableSimple";
        case StabilityClass::CaseII: return "CaseII";
        case StabilityClass::UnstableDouble: return "UnstableDouble";
        case StabilityClass::CaseIII: return "CaseIII";
        case StabilityClass::UnstableTriple: return "UnstableTriple";
    }
    return "?";
}

std::string_view to_string(RegionKind k) noexcept {
    switch (k) {
        case RegionKind::OmegaPlus: return "OmegaPlus";
        case RegionKind::OmegaMinus: return "OmegaMinus";
        case RegionKind::GammaPlus: return "GammaPlus";
        case RegionKind::GammaMinus: return "GammaMinus";
    }
    return "?";
}

double eval_p(double sigma, double delta, double nu, int order) {
    if (order < 0 || order > 5) throw Error(ErrorKind::InvalidArgument, "derivative order must be in [0, 5]");
    const double phase = 2.0 * sigma + nu;
    const double scale = std::ldexp(delta, order);
    // d^k/dx^k sin x cycles through sin, cos, -sin, -cos.
    switch (order % 4) {
        case 0: return scale * std::sin(phase) - std::sin(sigma);
        case 1: return scale * std::cos(phase) - std::cos(sigma);
        case 2: return -scale * std::sin(phase) + std::sin(sigma);
        default: return -scale * std::cos(phase) + std::cos(sigma);
    }
}

double gamma(double delta, double nu) {
    const double a = 4.0 * delta * delta - 1.0;
    const double s = std::sin(nu);
    return a * a * a - 27.0 * delta * delta * s * s;
}

RegionClass classify_region(double delta, double nu, double boundary_tol) {
    if (!(boundary_tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "boundary_tol must be positive");
    const double g = gamma(delta, nu);
    RegionKind kind;
    if (g > boundary_tol) kind = RegionKind::OmegaPlus;
    else if (g < -boundary_tol) kind = RegionKind::OmegaMinus;
    else kind = delta >= 0.0 ? RegionKind::GammaPlus : RegionKind::GammaMinus;
    return {kind, g};
}

PhaseRoot make_root(double sigma, double delta, double nu, double deriv_tol) {
    PhaseRoot root;
    root.sigma = wrap_angle(sigma);
    for (int k = 1; k <= 5; ++k) root.p_derivs[static_cast<std::size_t>(k - 1)] = eval_p(root.sigma, delta, nu, k);
    root.multiplicity = 5;
    for (int k = 1; k <= 5; ++k) {
        if (std::fabs(root.derivative(k)) > deriv_tol) {
            root.multiplicity = k;
            break;
        }
    }
    const double lead = root.derivative(std::min(root.multiplicity, 5));
    switch (root.multiplicity) {
        case 1: root.stability_class = lead > 0 ? StabilityClass::StableCaseI : StabilityClass::UnstableSimple; break;
        case 2: root.stability_class = lead < 0 ? StabilityClass::CaseII : StabilityClass::UnstableDouble; break;
        default: root.stability_class = lead > 0 ? StabilityClass::CaseIII : StabilityClass::UnstableTriple; break;
    }
    return root;
}

std::vector<PhaseRoot> find_roots(double delta, double nu, double root_tol, double deriv_tol) {
    if (!(root_tol > 0.0) || !(deriv_tol > 0.0))
        throw Error(ErrorKind::InvalidArgument, "root_tol and deriv_tol must be positive");

    struct Candidate {
        double sigma;
        int level;  // 0: zero of P, 1: zero of P', 2: zero of P''
    };
    std::vector<Candidate> candidates;
    for (int level = 0; level <= 2; ++level) {
        for (double s : scan_zeros(delta, nu, level)) {
            s = wrap_angle(s);
            if (std::fabs(eval_p(s, delta, nu, 0)) > root_tol) continue;
            if (level == 2 && std::fabs(eval_p(s, delta, nu, 1)) > deriv_tol) continue;
            candidates.push_back({s, level});
        }
    }

    // A multiple root is located most accurately as a zero of the highest
    // vanishing derivative; zeros of lower derivatives nearby are the same
    // root seen through a flat function and are absorbed.
    const double absorb_radius = 10.0 * std::cbrt(root_tol);
    std::sort(candidates.begin(), candidates.end(),
              [](const Candidate& a, const Candidate& b) { return a.level > b.level; });
    std::vector<Candidate> kept;
    for (const auto& c : candidates) {
        bool absorbed = false;
        for (const auto& k : kept) {
            const double radius = k.level > c.level ? absorb_radius : 10.0 * root_tol + 1e-13;
            if (circular_distance(c.sigma, k.sigma) <= radius) { absorbed = true; break; }
        }
        if (!absorbed) kept.push_back(c);
    }

    std::vector<PhaseRoot> roots;
    roots.reserve(kept.size());
    for (const auto& k : kept) roots.push_back(make_root(k.sigma, delta, nu, deriv_tol));
    std::sort(roots.begin(), roots.end(), [](const PhaseRoot& a, const PhaseRoot& b) { return a.sigma < b.sigma; });

    for (std::size_t i = 0; i + 1 < roots.size() + (roots.size() > 1 ? 1 : 0); ++i) {
        const auto& a = roots[i];
        const auto& b = roots[(i + 1) % roots.size()];
        if (&a == &b) continue;
        if (circular_distance(a.sigma, b.sigma) < 10.0 * root_tol && a.multiplicity == 1 && b.multiplicity == 1)
            throw Error(ErrorKind::DegenerateNearBoundary,
                        "simple roots at " + fmt17(a.sigma) + " and " + fmt17(b.sigma) +
                            " are closer than 10*root_tol; refine tolerances");
    }
    return roots;
}

std::vector<PhaseRoot> find_roots(const ModelParams& params, double root_tol, double deriv_tol) {
    params.validate();
    return find_roots(params.delta(), params.nu, root_tol, deriv_tol);
}

std::size_t count_roots(double delta, double nu) { return find_roots(delta, nu).size(); }

double bifurcation_delta(double nu, int sign) {
    double lo = 0.5, hi = 2.0;
    if (gamma(lo, nu) >= 0.0) return sign >= 0 ? lo : -lo;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (gamma(mid, nu) < 0.0 ? lo : hi) = mid;
    }
    const double d = 0.5 * (lo + hi);
    return sign >= 0 ? d : -d;
}

std::vector<PartitionRow> sweep_partition(double lambda, const std::vector<double>& nu_grid,
                                          const std::vector<double>& delta_grid, const ParallelFor& pfor,
                                          double boundary_tol) {
    if (nu_grid.empty() || delta_grid.empty()) throw Error(ErrorKind::InvalidArgument, "sweep grids must be nonempty");
    auto increasing = [](const std::vector<double>& g) {
        return std::adjacent_find(g.begin(), g.end(), std::greater_equal<>()) == g.end();
    };
    if (!increasing(nu_grid) || !increasing(delta_grid))
        throw Error(ErrorKind::InvalidArgument, "sweep grids must be strictly increasing");
    if (!(lambda > 0.0)) throw Error(ErrorKind::InvalidArgument, "lambda must be positive");

    std::vector<PartitionRow> rows(nu_grid.size() * delta_grid.size());
    pfor(rows.size(), [&](std::size_t idx) {
        auto& row = rows[idx];
        row.nu = nu_grid[idx / delta_grid.size()];
        row.delta = delta_grid[idx % delta_grid.size()];
        const auto region = classify_region(row.delta, row.nu, boundary_tol);
        row.gamma = region.gamma;
        row.region = region.kind;
        try {
            row.roots = find_roots(params_for_delta(lambda, row.nu, row.delta));
        } catch (const Error& e) {
            row.error = e.what();
        }
    });
    return rows;
}

void write_partition_csv(std::ostream& os, const std::vector<PartitionRow>& rows) {
    os << "delta,nu,gamma,region,n_roots,sigmas,multiplicities,classes\n";
    for (const auto& row : rows) {
        std::vector<std::string> sig, mult, cls;
        for (const auto& r : row.roots) {
            sig.push_back(fmt17(r.sigma));
            mult.push_back(std::to_string(r.multiplicity));
            cls.emplace_back(to_string(r.stability_class));
        }
        if (row.error) cls = {"error:" + *row.error};
        os << fmt17(row.delta) << ',' << fmt17(row.nu) << ',' << fmt17(row.gamma) << ',' << to_string(row.region)
           << ',' << row.roots.size() << ',' << join(sig, ';') << ',' << join(mult, ';') << ',' << join(cls, ';')
           << '\n';
    }
}

}  // namespace autores::phase_model
