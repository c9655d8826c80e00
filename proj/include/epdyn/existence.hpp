#pragma once

// Discretized two-component existence problem:
//   [h_e(q) + V(q, xi) + h_g(xi)] Psi(q, xi) = E Psi(q, xi)
// on uniform grids, together with the dense spectral oracle and the
// kinetic/potential expectation split used by the conservation identity.

#include <complex>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "epdyn/errors.hpp"

namespace epdyn
{

using cplx = std::complex<double>;

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr std::size_t kDefaultOracleCap = 4096;

struct PhysicalConstants
{
	double hbar = 1.0;
	double c = 1.0;
	double mass = 1.0;

	/// Full action quantum h = 2*pi*hbar.
	[[nodiscard]] double h() const noexcept { return 2.0 * kPi * hbar; }

	/// Throws Error(Config) unless hbar, c and mass are finite and positive.
	void validate() const;
};

enum class Boundary
{
	Dirichlet,
	Periodic,
};

class Grid
{
public:
	[[nodiscard]] std::size_t size() const noexcept { return n_; }
	[[nodiscard]] double min() const noexcept { return min_; }
	[[nodiscard]] double max() const noexcept { return max_; }
	[[nodiscard]] double spacing() const noexcept { return spacing_; }
	[[nodiscard]] double point(std::size_t i) const noexcept
	{
		return i + 1 == n_ ? max_ : min_ + spacing_ * static_cast<double>(i);
	}
	[[nodiscard]] std::vector<double> points() const;

private:
	friend Grid build_grid(std::size_t n, double min, double max);
	Grid(std::size_t n, double min, double max);

	std::size_t n_;
	double min_;
	double max_;
	double spacing_;
};

/// Uniform grid of n points on [min, max]; spacing (max - min)/(n - 1).
Grid build_grid(std::size_t n, double min, double max);

/// n interior points of the hard-wall box (0, length). The walls sit one
/// spacing beyond each end, so spacing = length/(n + 1).
Grid box_grid(std::size_t n, double length);

/// n points covering one period [0, length); spacing = length/n.
Grid periodic_grid(std::size_t n, double length);

class HermitianOperator
{
public:
	HermitianOperator() = default;

	/// Throws Error(Config) if the matrix is not square or not Hermitian to `tol`.
	explicit HermitianOperator(Eigen::MatrixXcd matrix, double tol = 1e-12);

	[[nodiscard]] std::size_t dimension() const noexcept
	{
		return static_cast<std::size_t>(matrix_.rows());
	}
	[[nodiscard]] const Eigen::MatrixXcd& matrix() const noexcept { return matrix_; }
	[[nodiscard]] cplx entry(std::size_t i, std::size_t j) const
	{
		return matrix_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
	}

	/// Max absolute row sum; bounds the spectral radius.
	[[nodiscard]] double norm_inf() const;

	/// Gershgorin enclosure [lo, hi] of the spectrum.
	[[nodiscard]] std::pair<double, double> gershgorin_bounds() const;

	/// Largest |entry(i,j) - conj(entry(j,i))|.
	[[nodiscard]] double hermiticity_defect() const;

private:
	Eigen::MatrixXcd matrix_;
};

/// -hbar^2/(2m) times the three-point second difference. Dirichlet rows treat
/// the value one spacing beyond either end as zero; periodic rows wrap.
HermitianOperator build_kinetic(const Grid& grid,
                                const PhysicalConstants& constants,
                                Boundary boundary = Boundary::Dirichlet);

enum class NormConvention
{
	Raw,
	Normalized,
};

/// Complex amplitudes on a (product) grid. `cell` is the measure attached to
/// one point: the spacing on a 1D grid, dq*dxi on a product grid.
struct WaveField
{
	Eigen::VectorXcd values;
	double cell = 1.0;
	NormConvention convention = NormConvention::Raw;

	/// sum |psi_i|^2 * cell
	[[nodiscard]] double norm_squared() const;
	[[nodiscard]] WaveField normalized() const;
};

struct Spectrum
{
	std::vector<double> eigenvalues;
	/// Eigenstates as columns, normalized so that sum |psi|^2 * cell = 1.
	Eigen::MatrixXcd states;
	double cell = 1.0;

	[[nodiscard]] std::size_t size() const noexcept { return eigenvalues.size(); }
	[[nodiscard]] WaveField state(std::size_t k) const;
};

class ExistenceProblem
{
public:
	/// h_e acts on q, h_g on xi; coupling(i, j) = V(q_i, xi_j). Grids are
	/// optional; when present their sizes must match the blocks.
	static ExistenceProblem assemble(HermitianOperator h_e,
	                                 HermitianOperator h_g,
	                                 Eigen::MatrixXd coupling,
	                                 PhysicalConstants constants,
	                                 std::optional<Grid> grid_q = std::nullopt,
	                                 std::optional<Grid> grid_xi = std::nullopt);

	/// Wraps a plain Hermitian matrix as a problem with a single xi channel and
	/// an index grid q = 0, 1, ..., N-1.
	static ExistenceProblem from_matrix(HermitianOperator h, PhysicalConstants constants = {});

	[[nodiscard]] std::size_t n_q() const noexcept { return data_->h_e.dimension(); }
	[[nodiscard]] std::size_t n_xi() const noexcept { return data_->h_g.dimension(); }
	[[nodiscard]] std::size_t dimension() const noexcept { return n_q() * n_xi(); }
	/// Full-space index of (q_i, xi_j); xi is the fast index.
	[[nodiscard]] std::size_t index(std::size_t iq, std::size_t jxi) const noexcept
	{
		return iq * n_xi() + jxi;
	}

	[[nodiscard]] const HermitianOperator& h_e() const noexcept { return data_->h_e; }
	[[nodiscard]] const HermitianOperator& h_g() const noexcept { return data_->h_g; }
	[[nodiscard]] const Eigen::MatrixXd& coupling() const noexcept { return data_->coupling; }
	[[nodiscard]] const PhysicalConstants& constants() const noexcept { return data_->constants; }
	[[nodiscard]] const Grid& grid_q() const noexcept { return data_->grid_q; }
	[[nodiscard]] const std::optional<Grid>& grid_xi() const noexcept { return data_->grid_xi; }

	/// Measure of one full-space point: dq * dxi (dxi = 1 without a xi grid).
	[[nodiscard]] double cell() const noexcept;

	/// H = h_e (x) I + I (x) h_g + diag(V), assembled densely.
	[[nodiscard]] HermitianOperator full_operator() const;

	/// H * psi without forming H.
	[[nodiscard]] Eigen::VectorXcd apply(const Eigen::VectorXcd& psi) const;

	/// Kinetic-block part (h_e (x) I + I (x) h_g) * psi.
	[[nodiscard]] Eigen::VectorXcd apply_blocks(const Eigen::VectorXcd& psi) const;

	/// Marginal density on the q grid: rho(q_i) = sum_j |psi(i,j)|^2 * dxi.
	[[nodiscard]] std::vector<double> q_density(const Eigen::VectorXcd& psi) const;

private:
	struct Data
	{
		HermitianOperator h_e;
		HermitianOperator h_g;
		Eigen::MatrixXd coupling;
		PhysicalConstants constants;
		Grid grid_q;
		std::optional<Grid> grid_xi;
	};

	explicit ExistenceProblem(std::shared_ptr<const Data> data) : data_(std::move(data)) {}

	std::shared_ptr<const Data> data_;
};

/// Dense diagonalization of the full operator. Throws Error(OracleScale) when
/// the dimension exceeds `cap`.
Spectrum full_spectrum(const ExistenceProblem& problem, std::size_t cap = kDefaultOracleCap);
Spectrum full_spectrum(const HermitianOperator& op, double cell = 1.0,
                       std::size_t cap = kDefaultOracleCap);

/// One-dimensional Hamiltonian -hbar^2/(2m) d^2/dx^2 + V(x) on a grid.
struct Hamiltonian1D
{
	Grid grid;
	std::vector<double> potential;
	PhysicalConstants constants;
	Boundary boundary = Boundary::Dirichlet;

	/// Throws Error(Config) if the potential does not match the grid.
	void validate() const;

	[[nodiscard]] HermitianOperator matrix() const;

	/// Three-point second difference with the configured boundary.
	[[nodiscard]] Eigen::VectorXcd second_difference(const Eigen::VectorXcd& psi) const;

	[[nodiscard]] Eigen::VectorXcd apply(const Eigen::VectorXcd& psi) const;
};

struct EnergyBreakdown
{
	double kinetic = 0.0;
	double potential = 0.0;
	double total = 0.0;
};

/// K = -(hbar^2/2m) sum psi* D2 psi dx, V_psi = sum psi* V psi dx.
/// Throws Error(Normalization) unless |sum |psi|^2 dx - 1| <= 1e-10.
EnergyBreakdown expectation_energy(const WaveField& psi, const Hamiltonian1D& hamiltonian);

/// Same split for a two-component problem: the block part h_e, h_g is the
/// kinetic term and the coupling V the potential term.
EnergyBreakdown expectation_energy(const WaveField& psi, const ExistenceProblem& problem);

} // namespace epdyn
