#pragma once

// Discrete action calculus: the action ledger that loses one quantum per
// cycle, the wave action A*Psi, the discrete momentum/energy rules obtained
// from its per-cycle balance, and the Schroedinger propagator they assemble.

#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/SparseLU>

#include "epdyn/existence.hpp"

namespace epdyn
{

struct ActionLedger
{
	double initial = 0.0;
	double value = 0.0;
	double quantum = 2.0 * kPi; // h in natural units
	std::vector<double> increments;
	std::size_t cycles = 0;

	static ActionLedger start(double initial, double quantum);
};

/// Each cycle changes the action by exactly -quantum.
ActionLedger ledger_advance(const ActionLedger& ledger, std::size_t cycles);

/// Delta A = -A0 * DeltaPsi / Psi; with wave_like the factor becomes i*A0.
struct QuantizationRule
{
	double quantum = 1.0;
	bool wave_like = true;

	void validate() const;
	[[nodiscard]] cplx factor() const noexcept
	{
		return wave_like ? cplx{0.0, quantum} : cplx{quantum, 0.0};
	}
};

/// A_Psi = A * Psi, pointwise.
Eigen::VectorXcd wave_action(double action, const Eigen::VectorXcd& psi);

/// A * DeltaPsi + Psi * DeltaA: the change of the wave action over one cycle.
cplx wave_action_balance(cplx action, cplx delta_action, cplx psi, cplx delta_psi);

/// Psi(x_i, t_k) sampled on a uniform space grid and a uniform time grid;
/// values(i, k).
struct SpaceTimeField
{
	Grid x;
	Grid t;
	Eigen::MatrixXcd values;

	static SpaceTimeField sample(const Grid& x, const Grid& t,
	                             const std::function<cplx(double, double)>& fn);
	void validate() const;
};

enum class Stencil
{
	CentralOnly,
	/// Fall back to second-order one-sided differences at the grid ends.
	AllowOneSided,
};

/// p = -factor * (dPsi/dx) / Psi with a central difference.
/// Throws Error(NodeSingularity) if |Psi| < 1e-12 at the point and
/// Error(Domain) at a boundary point unless one-sided stencils are allowed.
cplx discrete_momentum(const SpaceTimeField& field, const QuantizationRule& rule,
                       std::size_t x_index, std::size_t t_index,
                       Stencil stencil = Stencil::CentralOnly);

/// p^2 = factor^2 * (d2Psi/dx2) / Psi  (= -hbar^2 Psi''/Psi for the wave rule).
cplx discrete_momentum_squared(const SpaceTimeField& field, const QuantizationRule& rule,
                               std::size_t x_index, std::size_t t_index,
                               Stencil stencil = Stencil::CentralOnly);

/// E = factor * (dPsi/dt) / Psi.
cplx discrete_energy(const SpaceTimeField& field, const QuantizationRule& rule,
                     std::size_t x_index, std::size_t t_index,
                     Stencil stencil = Stencil::CentralOnly);

/// E^2 = factor^2 * (d2Psi/dt2) / Psi.
cplx discrete_energy_squared(const SpaceTimeField& field, const QuantizationRule& rule,
                             std::size_t x_index, std::size_t t_index,
                             Stencil stencil = Stencil::CentralOnly);

struct PropagatorOptions
{
	double dt = 1e-3;
	Boundary boundary = Boundary::Dirichlet;
	/// Largest admissible dt * ||H||_inf / hbar.
	double accuracy_budget = 1e4;
};

/// Crank-Nicolson (implicit midpoint) propagator for
///   i hbar dPsi/dt = -hbar^2/(2m) d2Psi/dx2 + V Psi.
/// The step is the Cayley transform of H, so it is unitary and commutes with H.
class SchrodingerPropagator
{
public:
	SchrodingerPropagator(Hamiltonian1D hamiltonian, PropagatorOptions options);

	[[nodiscard]] const Hamiltonian1D& hamiltonian() const noexcept { return hamiltonian_; }
	[[nodiscard]] double dt() const noexcept { return options_.dt; }

	[[nodiscard]] Eigen::VectorXcd step(const Eigen::VectorXcd& psi) const;
	[[nodiscard]] WaveField propagate(const WaveField& psi, std::size_t steps) const;

	/// Stationary problem (time-independent form) through the dense oracle.
	[[nodiscard]] Spectrum stationary(std::size_t cap = kDefaultOracleCap) const;

	/// Exact per-step phase of an eigenstate with energy E under this scheme.
	[[nodiscard]] double scheme_phase(double energy) const;

private:
	Hamiltonian1D hamiltonian_;
	PropagatorOptions options_;
	Eigen::SparseMatrix<cplx> rhs_;
	Eigen::SparseLU<Eigen::SparseMatrix<cplx>> lhs_;
};

/// Throws Error(StepSize) when dt * ||H||_inf / hbar exceeds the accuracy budget.
SchrodingerPropagator assemble_schrodinger(const Grid& grid, const std::vector<double>& potential,
                                           const PhysicalConstants& constants,
                                           const PropagatorOptions& options = {});

struct ConservationReport
{
	double kinetic = 0.0;
	double potential = 0.0;
	double total = 0.0;
	/// (m0/hbar^2) K
	double q_squared = 0.0;
	/// (m0/hbar)(V_psi/hbar) and (m0/hbar)(E/hbar): the identity in complexity quanta
	double potential_quanta = 0.0;
	double energy_quanta = 0.0;
};

ConservationReport conservation_report(const WaveField& psi, const Hamiltonian1D& hamiltonian);

} // namespace epdyn
