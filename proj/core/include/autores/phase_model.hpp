#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "autores/model_params.hpp"
#include "autores/parallel.hpp"

// Algebra of the phase equation P(sigma; delta, nu) = delta sin(2 sigma + nu) - sin sigma.
namespace autores::phase_model {

inline constexpr double kDefaultRootTol = 1e-9;
inline constexpr double kDefaultDerivTol = 1e-6;
inline constexpr double kDefaultBoundaryTol = 1e-9;
inline constexpr int kScanPoints = 4096;

enum class StabilityClass { StableCaseI, UnstableSimple, CaseII, UnstableDouble, CaseIII, UnstableTriple };

struct PhaseRoot {
    double sigma = 0.0;  // in [0, 2 pi)
    int multiplicity = 1;
    std::array<double, 5> p_derivs{};  // P', P'', P''', P'''', P^(5) at sigma
    StabilityClass stability_class = StabilityClass::StableCaseI;

    double derivative(int order) const { return p_derivs.at(static_cast<std::size_t>(order - 1)); }
};

enum class RegionKind { OmegaPlus, OmegaMinus, GammaPlus, GammaMinus };

struct RegionClass {
    RegionKind kind = RegionKind::OmegaMinus;
    double gamma = 0.0;
};

std::string_view to_string(StabilityClass c) noexcept;
std::string_view to_string(RegionKind k) noexcept;

// d^order P / d sigma^order, order in [0, 5].
double eval_p(double sigma, double delta, double nu, int order);

double gamma(double delta, double nu);

RegionClass classify_region(double delta, double nu, double boundary_tol = kDefaultBoundaryTol);

// Multiplicity and class of a root located at sigma, by the derivative test.
PhaseRoot make_root(double sigma, double delta, double nu, double deriv_tol = kDefaultDerivTol);

std::vector<PhaseRoot> find_roots(const ModelParams& params, double root_tol = kDefaultRootTol,
                                  double deriv_tol = kDefaultDerivTol);
std::vector<PhaseRoot> find_roots(double delta, double nu, double root_tol = kDefaultRootTol,
                                  double deriv_tol = kDefaultDerivTol);

// Distinct-root count, i.e. find_roots(...).size().
std::size_t count_roots(double delta, double nu);

// |delta| > 0 where gamma(delta, nu) = 0 on the branch with the given sign,
// by bisection on gamma.
double bifurcation_delta(double nu, int sign = +1);

struct PartitionRow {
    double delta = 0.0;
    double nu = 0.0;
    double gamma = 0.0;
    RegionKind region = RegionKind::OmegaMinus;
    std::vector<PhaseRoot> roots;
    std::optional<std::string> error;
};

std::vector<PartitionRow> sweep_partition(double lambda, const std::vector<double>& nu_grid,
                                          const std::vector<double>& delta_grid,
                                          const ParallelFor& pfor = sequential_for(),
                                          double boundary_tol = kDefaultBoundaryTol);

// Header: delta,nu,gamma,region,n_roots,sigmas,multiplicities,classes
void write_partition_csv(std::ostream& os, const std::vector<PartitionRow>& rows);

}  // namespace autores::phase_model
