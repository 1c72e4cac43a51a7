#pragma once

#include <span>
#include <vector>

namespace memsim {

/// Charge density, potential and field on the uniform oxide grid.
/// Node 0 sits at the top-electrode interface, node N-1 at the bottom one.
struct GridField {
    int nodes = 0;
    double dx = 0.0;           // m
    double permittivity = 0.0; // F/m
    std::vector<double> charge_density; // C/m^3
    std::vector<double> potential;      // V
    std::vector<double> field;          // V/m

    /// Throws InvalidGridError for fewer than 2 nodes or a non-positive length.
    static GridField make(int nodes, double length, double permittivity);

    double length() const { return dx * (nodes - 1); }
};

/// Optimal SOR factor for the 1D Laplacian, 2 / (1 + sqrt(1 - cos^2(pi/N))).
double sor_relaxation_parameter(int nodes);

struct SorSettings {
    double tol = 1e-8;
    int max_iter = 200000;
};

struct SorReport {
    int iterations = 0;
    double residual = 0.0; // relative max-norm, see poisson_residual
};

/// Relative max-norm of the discrete Poisson update
///   phi_i - (rho_i dx^2 / (2 eps) + (phi_{i+1} + phi_{i-1}) / 2)
/// over interior nodes, scaled by max(|phi_0|, |phi_{N-1}|, 1 V).
double poisson_residual(std::span<const double> rho, std::span<const double> phi, double eps,
                        double dx);

/// SOR solve in place. `phi` holds the starting guess on entry; its end
/// values are overwritten with the Dirichlet data. Throws ConvergenceError
/// (carrying the last residual) when max_iter sweeps are not enough.
SorReport solve_poisson_in_place(std::span<const double> rho, double phi_left, double phi_right,
                                 double eps, double dx, const SorSettings& settings,
                                 std::span<double> phi);

/// Convenience form starting from the linear ramp between the boundary values.
std::vector<double> solve_poisson(std::span<const double> rho, double phi_left, double phi_right,
                                  double eps, double dx, const SorSettings& settings = {});

/// Exact solution of the same discrete system by the Thomas algorithm.
/// Used as a starting guess for SOR inside the time loop.
void solve_poisson_tridiagonal(std::span<const double> rho, double phi_left, double phi_right,
                               double eps, double dx, std::span<double> phi);

/// E = -dphi/dx: central differences inside, one-sided at the two ends.
std::vector<double> electric_field(std::span<const double> phi, double dx);
void electric_field(std::span<const double> phi, double dx, std::span<double> out);

/// Linear interpolation of a node quantity at position x in [0, (N-1) dx].
double interpolate_at(std::span<const double> values, double dx, double x);

} // namespace memsim
