#pragma once

// Energy-dependent effective-potential reduction of an existence problem:
//
//   H_eff(E) = H_PP + H_PQ (E - H_QQ)^-1 H_QP
//
// Every eigenvalue E of the full operator whose eigenvector has a non-zero
// P-projection solves det(H_eff(E) - E) = 0, so enumerating the roots of the
// reduced, nonlinear problem recovers the full spectrum branch by branch.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "epdyn/existence.hpp"

namespace epdyn
{

/// How the retained (P) subspace is chosen.
struct PartitionSelector
{
	enum class Kind
	{
		/// Eigenbasis of h_g: P = all q with xi in channel `channel` (0 = ground).
		Channel,
		/// Grid basis: P = all q with xi grid index `channel`.
		XiIndex,
		/// Grid basis: P = explicit full-space indices.
		Indices,
	};

	Kind kind = Kind::Channel;
	std::size_t channel = 0;
	std::vector<std::size_t> indices;

	static PartitionSelector ground_channel() { return {}; }
	static PartitionSelector xi_index(std::size_t j) { return {Kind::XiIndex, j, {}}; }
	static PartitionSelector explicit_indices(std::vector<std::size_t> idx)
	{
		return {Kind::Indices, 0, std::move(idx)};
	}
};

class Partition
{
public:
	[[nodiscard]] const ExistenceProblem& problem() const noexcept { return problem_; }
	[[nodiscard]] const std::vector<std::size_t>& p_indices() const noexcept { return p_; }
	[[nodiscard]] const std::vector<std::size_t>& q_indices() const noexcept { return q_; }
	[[nodiscard]] PartitionSelector::Kind basis_kind() const noexcept { return kind_; }

	/// Unitary on xi space mapping the working basis to the grid basis (identity
	/// unless the selector works in the h_g eigenbasis).
	[[nodiscard]] const Eigen::MatrixXcd& xi_basis() const noexcept { return xi_basis_; }

	/// Full operator expressed in the working basis, assembled from the blocks.
	[[nodiscard]] Eigen::MatrixXcd working_operator() const;

	/// Working-basis vector -> grid-basis vector.
	[[nodiscard]] Eigen::VectorXcd to_grid_basis(const Eigen::VectorXcd& working) const;

private:
	friend Partition make_partition(const ExistenceProblem&, const PartitionSelector&);
	Partition(ExistenceProblem problem, PartitionSelector::Kind kind, Eigen::MatrixXcd xi_basis,
	          std::vector<std::size_t> p, std::vector<std::size_t> q)
		: problem_(std::move(problem)), kind_(kind), xi_basis_(std::move(xi_basis)),
		  p_(std::move(p)), q_(std::move(q))
	{
	}

	ExistenceProblem problem_;
	PartitionSelector::Kind kind_;
	Eigen::MatrixXcd xi_basis_;
	std::vector<std::size_t> p_;
	std::vector<std::size_t> q_;
};

/// Throws Error(Partition) if P would be empty or cover the whole space, or an
/// index is out of range or repeated.
Partition make_partition(const ExistenceProblem& problem, const PartitionSelector& selector);

struct EPOptions
{
	/// Energies closer than pole_guard * scale to a pole are rejected.
	double pole_guard = 1e-9;
	/// H_QQ eigenvectors whose coupling column norm is below this (relative to
	/// scale) are reported as decoupled poles and dropped from H_eff.
	double decoupling_threshold = 1e-10;
};

/// Signed determinant of H_eff(E) - E, kept as log-magnitude and sign. The
/// positive-eigenvalue count (inertia) is a by-product of the same
/// factorization and is what root bracketing relies on.
struct CharacteristicValue
{
	double log_abs = 0.0;
	int sign = 0;
	std::size_t positive = 0;

	[[nodiscard]] double value() const;
};

class EPOperator
{
public:
	explicit EPOperator(Partition partition, EPOptions options = {});

	[[nodiscard]] const Partition& partition() const noexcept { return partition_; }
	[[nodiscard]] std::size_t p_dimension() const noexcept { return partition_.p_indices().size(); }
	[[nodiscard]] const EPOptions& options() const noexcept { return options_; }

	/// Max-row-sum norm of the working operator; the unit for guards and tolerances.
	[[nodiscard]] double scale() const noexcept { return scale_; }
	[[nodiscard]] std::pair<double, double> spectral_bounds() const noexcept { return bounds_; }

	/// Eigenvalues of H_QQ that couple to P, ascending.
	[[nodiscard]] const std::vector<double>& poles() const noexcept { return poles_; }
	/// Eigenvalues of H_QQ that do not couple to P; each is an exact eigenvalue
	/// of the full operator with zero P-projection.
	[[nodiscard]] const std::vector<double>& decoupled_poles() const noexcept { return decoupled_; }

	/// Throws PoleProximityError when E is within the guard of a pole.
	[[nodiscard]] HermitianOperator effective_hamiltonian(double energy) const;
	[[nodiscard]] CharacteristicValue characteristic(double energy) const;

	/// psi_Q = (E - H_QQ)^-1 H_QP psi_P; returns the normalized full state in
	/// the grid basis.
	[[nodiscard]] WaveField reconstruct(double energy, const Eigen::VectorXcd& psi_p) const;

	/// Nearest pole (coupled) to E, if any.
	[[nodiscard]] std::optional<double> nearest_pole(double energy) const;

private:
	void check_pole(double energy) const;
	[[nodiscard]] Eigen::MatrixXcd heff_matrix(double energy) const;

	Partition partition_;
	EPOptions options_;
	double scale_ = 0.0;
	std::pair<double, double> bounds_;
	Eigen::MatrixXcd hpp_;
	Eigen::MatrixXcd coupling_;      // B = H_PQ W restricted to coupled modes
	Eigen::MatrixXcd q_modes_;       // W restricted to coupled modes
	std::vector<double> poles_;
	std::vector<double> decoupled_;
};

// Free-function spellings of the operator's surface.
HermitianOperator effective_hamiltonian(const EPOperator& op, double energy);
CharacteristicValue ep_characteristic(const EPOperator& op, double energy);
WaveField reconstruct_full_state(const EPOperator& op, double energy, const Eigen::VectorXcd& psi_p);

struct BranchRoot
{
	std::size_t branch_id = 0;
	double energy = 0.0;
	Eigen::VectorXcd psi_p;
	WaveField psi_full;
	/// ||H psi - E psi|| / ||psi|| with the full operator.
	double residual = 0.0;
};

struct ScanOptions
{
	std::optional<double> e_min;
	std::optional<double> e_max;
	/// 0 selects the default of 64 points per mean level spacing.
	std::size_t scan_points = 0;
	/// Absolute bisection tolerance; 0 selects 1e-13 * scale.
	double tol = 0.0;
};

struct RootEnumeration
{
	std::vector<BranchRoot> roots;
	std::vector<double> decoupled_poles;
	std::size_t dimension = 0;
	/// Roots predicted by the inertia count over the scanned range.
	std::size_t expected_roots = 0;
	double e_min = 0.0;
	double e_max = 0.0;
	double tol = 0.0;
	std::size_t evaluations = 0;

	/// accepted roots + decoupled poles == full dimension
	[[nodiscard]] bool complete() const noexcept
	{
		return roots.size() + decoupled_poles.size() == dimension;
	}
	[[nodiscard]] std::vector<std::string> diagnostics() const;
};

/// Scans the characteristic over [e_min, e_max] (default: Gershgorin enclosure
/// widened by a margin) with pole neighbourhoods excluded, brackets every
/// root and bisects to `tol`, then reconstructs each full state.
RootEnumeration enumerate_roots(const EPOperator& op, const ScanOptions& options = {});

/// Exact ratio num/den.
struct Ratio
{
	std::uint64_t num = 0;
	std::uint64_t den = 1;

	[[nodiscard]] double value() const noexcept
	{
		return static_cast<double>(num) / static_cast<double>(den);
	}
};

struct Realisation
{
	std::vector<std::size_t> members;
	double centroid = 0.0;
	/// RMS spread of the summed density about the centroid.
	double spread = 0.0;
	/// Summed member densities on the q grid; integrates to count.
	std::vector<double> density;
	std::uint64_t count = 0;
};

class RealisationEnsemble
{
public:
	/// Explicit construction; used by cluster_realisations and for synthetic
	/// ensembles. Densities must sit on `grid` and integrate to their counts.
	RealisationEnsemble(Grid grid, std::vector<Realisation> realisations, double width);

	/// Gaussian-profile realisations with the given integer weights.
	static RealisationEnsemble synthetic(const Grid& grid,
	                                     const std::vector<std::uint64_t>& counts,
	                                     const std::vector<double>& centroids,
	                                     const std::vector<double>& spreads);

	[[nodiscard]] std::size_t size() const noexcept { return realisations_.size(); }
	[[nodiscard]] const Realisation& operator[](std::size_t r) const { return realisations_.at(r); }
	[[nodiscard]] const std::vector<Realisation>& realisations() const noexcept { return realisations_; }
	[[nodiscard]] std::uint64_t total() const noexcept { return total_; }
	[[nodiscard]] Ratio alpha(std::size_t r) const { return {realisations_.at(r).count, total_}; }
	[[nodiscard]] const Grid& grid() const noexcept { return grid_; }
	[[nodiscard]] double width() const noexcept { return width_; }
	/// cluster id for each original member id (empty for synthetic ensembles)
	[[nodiscard]] std::vector<std::size_t> member_clusters() const;

private:
	Grid grid_;
	std::vector<Realisation> realisations_;
	std::uint64_t total_ = 0;
	double width_ = 0.0;
};

/// Single-linkage clustering of root centroids: neighbours closer than
/// `width` share a realisation, so width 0 keeps every root separate.
RealisationEnsemble cluster_realisations(const std::vector<BranchRoot>& roots,
                                         const ExistenceProblem& problem, double width);

/// Expectation reading of the probabilistic sum: sum_r alpha_r * rho_r/N_r.
std::vector<double> assemble_density(const RealisationEnsemble& ensemble);

} // namespace epdyn
