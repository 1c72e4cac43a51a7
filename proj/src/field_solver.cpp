#include "memsim/field_solver.hpp"

#include "memsim/error.hpp"
#include "memsim/units.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace memsim {

GridField GridField::make(int nodes, double length, double permittivity) {
    if (nodes < 2) throw InvalidGridError("grid needs at least 2 nodes, got " + std::to_string(nodes));
    if (!(length > 0.0)) throw InvalidGridError("grid length must be positive");
    GridField g;
    g.nodes = nodes;
    g.dx = length / (nodes - 1);
    g.permittivity = permittivity;
    g.charge_density.assign(nodes, 0.0);
    g.potential.assign(nodes, 0.0);
    g.field.assign(nodes, 0.0);
    return g;
}

double sor_relaxation_parameter(int nodes) {
    if (nodes < 2)
        throw InvalidGridError("SOR needs at least 2 nodes, got " + std::to_string(nodes));
    const double c = std::cos(phys::kPi / nodes);
    return 2.0 / (1.0 + std::sqrt(1.0 - c * c));
}

namespace {

double residual_scale(double left, double right) {
    return std::max({std::abs(left), std::abs(right), 1.0});
}

void check_sizes(std::size_t rho, std::size_t phi) {
    if (phi < 2) throw InvalidGridError("Poisson solve needs at least 2 nodes");
    if (rho != phi) throw InvalidGridError("charge and potential arrays differ in length");
}

} // namespace

double poisson_residual(std::span<const double> rho, std::span<const double> phi, double eps,
                        double dx) {
    check_sizes(rho.size(), phi.size());
    const double h = 0.5 * dx * dx / eps;
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < phi.size(); ++i) {
        const double target = h * rho[i] + 0.5 * (phi[i + 1] + phi[i - 1]);
        worst = std::max(worst, std::abs(phi[i] - target));
    }
    return worst / residual_scale(phi.front(), phi.back());
}

SorReport solve_poisson_in_place(std::span<const double> rho, double phi_left, double phi_right,
                                 double eps, double dx, const SorSettings& settings,
                                 std::span<double> phi) {
    check_sizes(rho.size(), phi.size());
    const std::size_t n = phi.size();
    phi[0] = phi_left;
    phi[n - 1] = phi_right;
    if (n == 2) return {0, 0.0};

    const double omega = sor_relaxation_parameter(static_cast<int>(n));
    const double h = 0.5 * dx * dx / eps;
    const double tol = settings.tol * residual_scale(phi_left, phi_right);

    // Residual measured before a sweep tells whether the guess is already good enough.
    double residual = poisson_residual(rho, phi, eps, dx);
    if (residual <= settings.tol) return {0, residual};

    for (int iter = 1; iter <= settings.max_iter; ++iter) {
        double worst = 0.0;
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double delta = h * rho[i] + 0.5 * (phi[i + 1] + phi[i - 1]) - phi[i];
            phi[i] += omega * delta;
            worst = std::max(worst, std::abs(delta));
        }
        // The in-sweep maximum is only an estimate; confirm on the final array.
        if (worst <= tol) {
            residual = poisson_residual(rho, phi, eps, dx);
            if (residual <= settings.tol) return {iter, residual};
        } else {
            residual = worst / residual_scale(phi_left, phi_right);
        }
    }
    throw ConvergenceError("Poisson SOR did not converge in " + std::to_string(settings.max_iter) +
                               " iterations (residual " + std::to_string(residual) + ")",
                           residual, settings.max_iter);
}

std::vector<double> solve_poisson(std::span<const double> rho, double phi_left, double phi_right,
                                  double eps, double dx, const SorSettings& settings) {
    std::vector<double> phi(rho.size());
    const std::size_t n = phi.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double s = n > 1 ? static_cast<double>(i) / (n - 1) : 0.0;
        phi[i] = phi_left + (phi_right - phi_left) * s;
    }
    solve_poisson_in_place(rho, phi_left, phi_right, eps, dx, settings, phi);
    return phi;
}

void solve_poisson_tridiagonal(std::span<const double> rho, double phi_left, double phi_right,
                               double eps, double dx, std::span<double> phi) {
    check_sizes(rho.size(), phi.size());
    const std::size_t n = phi.size();
    phi[0] = phi_left;
    phi[n - 1] = phi_right;
    if (n == 2) return;
    // -phi_{i-1} + 2 phi_i - phi_{i+1} = rho_i dx^2 / eps on the interior.
    const double h = dx * dx / eps;
    std::vector<double> c(n, 0.0);
    double prev_c = 0.0, prev_d = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        double rhs = h * rho[i];
        if (i == 1) rhs += phi_left;
        if (i + 2 == n) rhs += phi_right;
        const double denom = 2.0 + prev_c;
        c[i] = -1.0 / denom;
        phi[i] = (rhs + prev_d) / denom;
        prev_c = c[i];
        prev_d = phi[i];
    }
    for (std::size_t i = n - 2; i-- > 1;) phi[i] -= c[i] * phi[i + 1];
}

void electric_field(std::span<const double> phi, double dx, std::span<double> out) {
    const std::size_t n = phi.size();
    if (n < 2) throw InvalidGridError("field needs at least 2 nodes");
    if (out.size() != n) throw InvalidGridError("field output array has the wrong length");
    out[0] = -(phi[1] - phi[0]) / dx;
    out[n - 1] = -(phi[n - 1] - phi[n - 2]) / dx;
    const double inv = 1.0 / (2.0 * dx);
    for (std::size_t i = 1; i + 1 < n; ++i) out[i] = -(phi[i + 1] - phi[i - 1]) * inv;
}

std::vector<double> electric_field(std::span<const double> phi, double dx) {
    if (phi.size() < 2) throw InvalidGridError("field needs at least 2 nodes");
    std::vector<double> out(phi.size());
    electric_field(phi, dx, out);
    return out;
}

double interpolate_at(std::span<const double> values, double dx, double x) {
    const std::size_t n = values.size();
    const double s = x / dx;
    std::size_t i = s <= 0.0 ? 0 : static_cast<std::size_t>(s);
    if (i >= n - 1) i = n - 2;
    const double frac = std::clamp(s - static_cast<double>(i), 0.0, 1.0);
    return values[i] + frac * (values[i + 1] - values[i]);
}

} // namespace memsim
