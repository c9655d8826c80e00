#pragma once

// Universal formalism: discrete Hamilton-Jacobi residuals, the generalized
// causal quantization rule, and an RK4 method-of-lines integrator for the
// Hamiltonian-expansion PDE family
//   dPsi/dt + sum_{m, n>0} h_mn Psi^m d^nPsi/dx^n + sum_m h_m0 Psi^(m+1) = 0.

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "epdyn/action.hpp"
#include "epdyn/existence.hpp"

namespace epdyn
{

// ---------------------------------------------------------------------------
// Hamilton-Jacobi residuals

/// H(x, p, t)
using ClassicalHamiltonian = std::function<double(double, double, double)>;

/// Real action A(x_i, t_k); values(i, k).
struct ActionField
{
	Grid x;
	Grid t;
	Eigen::MatrixXd values;

	static ActionField sample(const Grid& x, const Grid& t, const std::function<double(double, double)>& fn);
	void validate() const;
};

/// dA/dt + H(x, dA/dx, t) with central differences, at interior points of both
/// grids. Result is (nx - 2) x (nt - 2); entry (i-1, k-1) belongs to (x_i, t_k).
Eigen::MatrixXd hj_residual(const ClassicalHamiltonian& hamiltonian, const ActionField& field);

/// H(x, dA/dx, t) - E on every time slice, interior x points: (nx - 2) x nt.
Eigen::MatrixXd hj_stationary_residual(const ClassicalHamiltonian& hamiltonian,
                                       const ActionField& field, double energy);

/// delta_A + factor * delta_psi / psi, factor = i*A0 when wave-like, else A0.
/// Throws Error(NodeSingularity) if |psi| <= 1e-12.
cplx causal_quantize(cplx delta_action, cplx psi, cplx delta_psi, const QuantizationRule& rule);

// ---------------------------------------------------------------------------
// Hamiltonian expansion

enum class Profile
{
	Harmonic, // 0.5 * amplitude * (x - center)^2
	Gaussian, // amplitude * exp(-(x - center)^2 / (2 width^2))
	Box,      // amplitude on [lo, hi], 0 elsewhere
};

Profile profile_from_string(const std::string& name);

class Coefficient
{
public:
	enum class Kind
	{
		Constant,
		Table,   // one value per grid point
		TableXT, // rows of per-point values at increasing times, linear in t
		Profile,
	};

	struct ProfileParams
	{
		double amplitude = 1.0;
		double center = 0.0;
		double width = 1.0;
		double lo = 0.0;
		double hi = 0.0;
	};

	static Coefficient constant(cplx value);
	static Coefficient table(std::vector<cplx> values);
	static Coefficient table_xt(std::vector<double> times, std::vector<std::vector<cplx>> values);
	static Coefficient profile(Profile profile, ProfileParams params);

	[[nodiscard]] Kind kind() const noexcept { return kind_; }

	/// Throws Error(Config) on non-finite data or a table that does not fit `points`.
	void validate(std::size_t points) const;

	[[nodiscard]] cplx at(std::size_t i, double x, double t) const;

	/// Upper bound of |coefficient| over the grid and all times.
	[[nodiscard]] double max_abs(const Grid& grid) const;

private:
	Kind kind_ = Kind::Constant;
	cplx constant_{};
	std::vector<double> times_;
	std::vector<std::vector<cplx>> rows_;
	Profile profile_ = Profile::Harmonic;
	ProfileParams params_;
};

struct HamiltonianTerm
{
	unsigned m = 0; // power of Psi
	unsigned n = 0; // derivative order
	/// Coefficient c_mn of the Hamiltonian operator; the PDE uses h_mn = c_mn / A0_eff.
	Coefficient coeff;
};

/// A0_eff dPsi/dt + H Psi = 0. With wave_like, A0_eff = -i*a0, so that a0 = hbar
/// and c_02 = -hbar^2/(2m), c_00 = V give i hbar dPsi/dt = H Psi. Otherwise A0_eff = a0.
struct HamiltonianSpec
{
	std::vector<HamiltonianTerm> terms;
	double a0 = 1.0;
	bool wave_like = true;
	Boundary boundary = Boundary::Dirichlet;
	unsigned max_order = 4;

	void validate(std::size_t points) const;
	[[nodiscard]] cplx a0_effective() const noexcept
	{
		return wave_like ? cplx{0.0, -a0} : cplx{a0, 0.0};
	}
};

/// The linear Schroedinger member: c_02 = -hbar^2/(2m), c_00 = V(x).
HamiltonianSpec linear_schrodinger_spec(const std::vector<double>& potential,
                                        const PhysicalConstants& constants,
                                        Boundary boundary = Boundary::Dirichlet);

struct PDEState
{
	Eigen::VectorXcd psi;
	double time = 0.0;
	std::size_t step = 0;
};

struct StepDiagnostics
{
	std::size_t step = 0;
	double time = 0.0;
	double norm = 0.0; // sqrt(sum |psi|^2 dx)
	double max_amplitude = 0.0;
};

struct StepperOptions
{
	double dt = 1e-3;
	/// Largest admissible dt * (estimated spectral radius of the right-hand side).
	double stability_budget = 2.5;
};

/// Explicit RK4 over central-difference stencils (order 2) for n = 1..4.
class UniversalStepper
{
public:
	UniversalStepper(HamiltonianSpec spec, Grid grid, StepperOptions options);

	[[nodiscard]] const HamiltonianSpec& spec() const noexcept { return spec_; }
	[[nodiscard]] const Grid& grid() const noexcept { return grid_; }
	[[nodiscard]] double dt() const noexcept { return options_.dt; }

	/// n-th central difference with the spec boundary (Dirichlet ghosts are 0).
	[[nodiscard]] Eigen::VectorXcd derivative(const Eigen::VectorXcd& psi, unsigned order) const;

	/// dPsi/dt at time t.
	[[nodiscard]] Eigen::VectorXcd rhs(const Eigen::VectorXcd& psi, double t) const;

	/// sum |h_mn| (m+1 if n = 0) max|Psi|^m * (largest stencil symbol of order n)
	[[nodiscard]] double stability_estimate(const Eigen::VectorXcd& psi) const;

	/// Throws StabilityError with the largest admissible dt when over budget.
	void check_stability(const Eigen::VectorXcd& psi) const;

	[[nodiscard]] PDEState step(const PDEState& state) const;

private:
	HamiltonianSpec spec_;
	Grid grid_;
	StepperOptions options_;
	std::vector<double> coeff_bounds_;
};

UniversalStepper build_universal_pde(const HamiltonianSpec& spec, const Grid& grid,
                                     const StepperOptions& options = {});

/// Advances n_steps. Checks the stability budget first; throws BlowUpError
/// with the step index on a non-finite value.
PDEState step_pde(const PDEState& state, const UniversalStepper& stepper, std::size_t n_steps,
                  std::vector<StepDiagnostics>* diagnostics = nullptr);

StepDiagnostics diagnose(const PDEState& state, const Grid& grid);

} // namespace epdyn
