#include "epdyn/existence.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

namespace epdyn
{

void PhysicalConstants::validate() const
{
	auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
	if (!positive(hbar) || !positive(c) || !positive(mass))
	{
		throw Error(ErrorKind::Config, "physical constants hbar, c and mass must be finite and positive");
	}
}

// ---------------------------------------------------------------------------
// Grids

Grid::Grid(std::size_t n, double min, double max)
	: n_(n), min_(min), max_(max), spacing_((max - min) / static_cast<double>(n - 1))
{
}

std::vector<double> Grid::points() const
{
	std::vector<double> out(n_);
	for (std::size_t i = 0; i < n_; ++i)
	{
		out[i] = point(i);
	}
	return out;
}

Grid build_grid(std::size_t n, double min, double max)
{
	if (!std::isfinite(min) || !std::isfinite(max))
	{
		throw Error(ErrorKind::Config, "grid bounds must be finite");
	}
	if (n < 2)
	{
		throw Error(ErrorKind::Config, "grid needs at least 2 points, got " + std::to_string(n));
	}
	if (!(max > min))
	{
		throw Error(ErrorKind::Config, "grid requires max > min");
	}
	return Grid(n, min, max);
}

Grid box_grid(std::size_t n, double length)
{
	if (!(length > 0.0) || !std::isfinite(length))
	{
		throw Error(ErrorKind::Config, "box length must be finite and positive");
	}
	const double s = length / static_cast<double>(n + 1);
	return build_grid(n, s, length - s);
}

Grid periodic_grid(std::size_t n, double length)
{
	if (!(length > 0.0) || !std::isfinite(length))
	{
		throw Error(ErrorKind::Config, "period must be finite and positive");
	}
	return build_grid(n, 0.0, length - length / static_cast<double>(n));
}

// ---------------------------------------------------------------------------
// Operators

HermitianOperator::HermitianOperator(Eigen::MatrixXcd matrix, double tol)
	: matrix_(std::move(matrix))
{
	if (matrix_.rows() != matrix_.cols())
	{
		throw Error(ErrorKind::Config, "operator matrix must be square");
	}
	if (!matrix_.allFinite())
	{
		throw Error(ErrorKind::Config, "operator matrix has non-finite entries");
	}
	const double defect = hermiticity_defect();
	if (defect > tol)
	{
		throw Error(ErrorKind::Config,
		            "operator is not Hermitian (defect " + std::to_string(defect) + ")");
	}
}

double HermitianOperator::norm_inf() const
{
	if (matrix_.size() == 0)
	{
		return 0.0;
	}
	return matrix_.cwiseAbs().rowwise().sum().maxCoeff();
}

std::pair<double, double> HermitianOperator::gershgorin_bounds() const
{
	double lo = 0.0;
	double hi = 0.0;
	for (Eigen::Index i = 0; i < matrix_.rows(); ++i)
	{
		const double radius = matrix_.row(i).cwiseAbs().sum() - std::abs(matrix_(i, i));
		const double centre = matrix_(i, i).real();
		lo = i == 0 ? centre - radius : std::min(lo, centre - radius);
		hi = i == 0 ? centre + radius : std::max(hi, centre + radius);
	}
	return {lo, hi};
}

double HermitianOperator::hermiticity_defect() const
{
	if (matrix_.size() == 0)
	{
		return 0.0;
	}
	return (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff();
}

HermitianOperator build_kinetic(const Grid& grid, const PhysicalConstants& constants, Boundary boundary)
{
	constants.validate();
	const auto n = static_cast<Eigen::Index>(grid.size());
	const double s = grid.spacing();
	const double scale = constants.hbar * constants.hbar / (2.0 * constants.mass * s * s);

	Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
	for (Eigen::Index i = 0; i < n; ++i)
	{
		m(i, i) = 2.0 * scale;
		if (i > 0)
		{
			m(i, i - 1) = -scale;
		}
		if (i + 1 < n)
		{
			m(i, i + 1) = -scale;
		}
	}
	if (boundary == Boundary::Periodic && n > 2)
	{
		m(0, n - 1) += -scale;
		m(n - 1, 0) += -scale;
	}
	else if (boundary == Boundary::Periodic)
	{
		// two-point ring: both neighbours are the same point
		m(0, 1) = m(1, 0) = -2.0 * scale;
	}
	return HermitianOperator(std::move(m));
}

// ---------------------------------------------------------------------------
// Wave fields and spectra

double WaveField::norm_squared() const
{
	return values.squaredNorm() * cell;
}

WaveField WaveField::normalized() const
{
	const double n2 = norm_squared();
	if (!(n2 > 0.0) || !std::isfinite(n2))
	{
		throw Error(ErrorKind::Normalization, "cannot normalize a zero or non-finite field");
	}
	return WaveField{values / std::sqrt(n2), cell, NormConvention::Normalized};
}

WaveField Spectrum::state(std::size_t k) const
{
	return WaveField{states.col(static_cast<Eigen::Index>(k)), cell, NormConvention::Normalized};
}

// ---------------------------------------------------------------------------
// Existence problem

ExistenceProblem ExistenceProblem::assemble(HermitianOperator h_e,
                                            HermitianOperator h_g,
                                            Eigen::MatrixXd coupling,
                                            PhysicalConstants constants,
                                            std::optional<Grid> grid_q,
                                            std::optional<Grid> grid_xi)
{
	constants.validate();
	const auto nq = h_e.dimension();
	const auto nxi = h_g.dimension();
	if (nq == 0 || nxi == 0)
	{
		throw Error(ErrorKind::Config, "existence problem blocks must be non-empty");
	}
	if (static_cast<std::size_t>(coupling.rows()) != nq
	    || static_cast<std::size_t>(coupling.cols()) != nxi)
	{
		throw Error(ErrorKind::Config,
		            "coupling must be shaped n_q x n_xi = " + std::to_string(nq) + " x "
		                + std::to_string(nxi) + ", got " + std::to_string(coupling.rows()) + " x "
		                + std::to_string(coupling.cols()));
	}
	if (!coupling.allFinite())
	{
		throw Error(ErrorKind::Config, "coupling has non-finite entries");
	}
	if (grid_q && grid_q->size() != nq)
	{
		throw Error(ErrorKind::Config, "q grid size does not match h_e dimension");
	}
	if (grid_xi && grid_xi->size() != nxi)
	{
		throw Error(ErrorKind::Config, "xi grid size does not match h_g dimension");
	}
	Grid gq = grid_q ? *grid_q
	                 : build_grid(std::max<std::size_t>(nq, 2), 0.0,
	                              std::max<double>(static_cast<double>(nq) - 1.0, 1.0));
	if (!grid_q && nq == 1)
	{
		throw Error(ErrorKind::Config, "a single-point q space needs an explicit grid");
	}
	auto data = std::make_shared<Data>(Data{std::move(h_e), std::move(h_g), std::move(coupling),
	                                        constants, gq, std::move(grid_xi)});
	return ExistenceProblem(std::move(data));
}

ExistenceProblem ExistenceProblem::from_matrix(HermitianOperator h, PhysicalConstants constants)
{
	const auto n = static_cast<Eigen::Index>(h.dimension());
	HermitianOperator zero(Eigen::MatrixXcd::Zero(1, 1));
	return assemble(std::move(h), std::move(zero), Eigen::MatrixXd::Zero(n, 1), constants);
}

double ExistenceProblem::cell() const noexcept
{
	const double dxi = data_->grid_xi ? data_->grid_xi->spacing() : 1.0;
	return data_->grid_q.spacing() * dxi;
}

HermitianOperator ExistenceProblem::full_operator() const
{
	const auto nq = static_cast<Eigen::Index>(n_q());
	const auto nxi = static_cast<Eigen::Index>(n_xi());
	const auto& he = data_->h_e.matrix();
	const auto& hg = data_->h_g.matrix();
	const Eigen::Index n = nq * nxi;

	Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);
	// h_e (x) I
	for (Eigen::Index i = 0; i < nq; ++i)
	{
		for (Eigen::Index k = 0; k < nq; ++k)
		{
			if (he(i, k) == cplx{})
			{
				continue;
			}
			for (Eigen::Index j = 0; j < nxi; ++j)
			{
				h(i * nxi + j, k * nxi + j) += he(i, k);
			}
		}
	}
	// I (x) h_g + diag(V)
	for (Eigen::Index i = 0; i < nq; ++i)
	{
		h.block(i * nxi, i * nxi, nxi, nxi) += hg;
		for (Eigen::Index j = 0; j < nxi; ++j)
		{
			h(i * nxi + j, i * nxi + j) += data_->coupling(i, j);
		}
	}
	return HermitianOperator(std::move(h));
}

Eigen::VectorXcd ExistenceProblem::apply_blocks(const Eigen::VectorXcd& psi) const
{
	const auto nq = static_cast<Eigen::Index>(n_q());
	const auto nxi = static_cast<Eigen::Index>(n_xi());
	if (psi.size() != nq * nxi)
	{
		throw Error(ErrorKind::Config, "state dimension does not match the problem");
	}
	// Column i of m holds the xi-slice at q_i.
	Eigen::Map<const Eigen::MatrixXcd> m(psi.data(), nxi, nq);
	Eigen::VectorXcd out(psi.size());
	Eigen::Map<Eigen::MatrixXcd> r(out.data(), nxi, nq);
	r.noalias() = m * data_->h_e.matrix().transpose();
	r.noalias() += data_->h_g.matrix() * m;
	return out;
}

Eigen::VectorXcd ExistenceProblem::apply(const Eigen::VectorXcd& psi) const
{
	Eigen::VectorXcd out = apply_blocks(psi);
	const auto nq = static_cast<Eigen::Index>(n_q());
	const auto nxi = static_cast<Eigen::Index>(n_xi());
	for (Eigen::Index i = 0; i < nq; ++i)
	{
		for (Eigen::Index j = 0; j < nxi; ++j)
		{
			out(i * nxi + j) += data_->coupling(i, j) * psi(i * nxi + j);
		}
	}
	return out;
}

std::vector<double> ExistenceProblem::q_density(const Eigen::VectorXcd& psi) const
{
	const auto nq = n_q();
	const auto nxi = n_xi();
	const double dxi = data_->grid_xi ? data_->grid_xi->spacing() : 1.0;
	std::vector<double> rho(nq, 0.0);
	for (std::size_t i = 0; i < nq; ++i)
	{
		double acc = 0.0;
		for (std::size_t j = 0; j < nxi; ++j)
		{
			acc += std::norm(psi(static_cast<Eigen::Index>(i * nxi + j)));
		}
		rho[i] = acc * dxi;
	}
	return rho;
}

// ---------------------------------------------------------------------------
// Oracle

Spectrum full_spectrum(const HermitianOperator& op, double cell, std::size_t cap)
{
	const auto n = op.dimension();
	if (n > cap)
	{
		throw Error(ErrorKind::OracleScale, "dimension " + std::to_string(n)
		                                        + " exceeds the dense oracle cap "
		                                        + std::to_string(cap));
	}
	Spectrum out;
	out.cell = cell;
	if (n == 0)
	{
		return out;
	}
	Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(op.matrix());
	if (solver.info() != Eigen::Success)
	{
		throw Error(ErrorKind::Domain, "dense Hermitian eigensolver did not converge");
	}
	// Eigen returns eigenvalues in ascending order.
	const auto& evals = solver.eigenvalues();
	out.eigenvalues.assign(evals.data(), evals.data() + evals.size());
	out.states = solver.eigenvectors() / std::sqrt(cell);
	// Fix the global phase so the largest component is real and positive;
	// keeps exported states reproducible.
	for (Eigen::Index k = 0; k < out.states.cols(); ++k)
	{
		Eigen::Index imax = 0;
		out.states.col(k).cwiseAbs().maxCoeff(&imax);
		const cplx z = out.states(imax, k);
		out.states.col(k) *= std::conj(z) / std::abs(z);
	}
	return out;
}

Spectrum full_spectrum(const ExistenceProblem& problem, std::size_t cap)
{
	if (problem.dimension() > cap)
	{
		throw Error(ErrorKind::OracleScale, "dimension " + std::to_string(problem.dimension())
		                                        + " exceeds the dense oracle cap "
		                                        + std::to_string(cap));
	}
	return full_spectrum(problem.full_operator(), problem.cell(), cap);
}

// ---------------------------------------------------------------------------
// 1D Hamiltonian and expectation energies

void Hamiltonian1D::validate() const
{
	constants.validate();
	if (potential.size() != grid.size())
	{
		throw Error(ErrorKind::Config, "potential has " + std::to_string(potential.size())
		                                   + " samples for a grid of " + std::to_string(grid.size()));
	}
	for (double v : potential)
	{
		if (!std::isfinite(v))
		{
			throw Error(ErrorKind::Config, "potential has non-finite samples");
		}
	}
}

HermitianOperator Hamiltonian1D::matrix() const
{
	validate();
	Eigen::MatrixXcd m = build_kinetic(grid, constants, boundary).matrix();
	for (std::size_t i = 0; i < grid.size(); ++i)
	{
		m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) += potential[i];
	}
	return HermitianOperator(std::move(m));
}

Eigen::VectorXcd Hamiltonian1D::second_difference(const Eigen::VectorXcd& psi) const
{
	const auto n = static_cast<Eigen::Index>(grid.size());
	if (psi.size() != n)
	{
		throw Error(ErrorKind::Config, "state does not match the grid");
	}
	const double inv_s2 = 1.0 / (grid.spacing() * grid.spacing());
	const bool periodic = boundary == Boundary::Periodic;
	Eigen::VectorXcd out(n);
	for (Eigen::Index i = 0; i < n; ++i)
	{
		const cplx left = i > 0 ? psi(i - 1) : (periodic ? psi(n - 1) : cplx{});
		const cplx right = i + 1 < n ? psi(i + 1) : (periodic ? psi(0) : cplx{});
		out(i) = (left - 2.0 * psi(i) + right) * inv_s2;
	}
	return out;
}

Eigen::VectorXcd Hamiltonian1D::apply(const Eigen::VectorXcd& psi) const
{
	const double k = -constants.hbar * constants.hbar / (2.0 * constants.mass);
	Eigen::VectorXcd out = k * second_difference(psi);
	for (Eigen::Index i = 0; i < psi.size(); ++i)
	{
		out(i) += potential[static_cast<std::size_t>(i)] * psi(i);
	}
	return out;
}

namespace
{

void require_normalized(double norm2)
{
	if (!(std::abs(norm2 - 1.0) <= 1e-10))
	{
		throw Error(ErrorKind::Normalization,
		            "state is not normalized (sum |psi|^2 * cell = " + std::to_string(norm2) + ")");
	}
}

} // namespace

EnergyBreakdown expectation_energy(const WaveField& psi, const Hamiltonian1D& hamiltonian)
{
	hamiltonian.validate();
	const double s = hamiltonian.grid.spacing();
	if (static_cast<std::size_t>(psi.values.size()) != hamiltonian.grid.size())
	{
		throw Error(ErrorKind::Config, "state does not match the Hamiltonian grid");
	}
	require_normalized(psi.values.squaredNorm() * s);

	const auto& c = hamiltonian.constants;
	const Eigen::VectorXcd d2 = hamiltonian.second_difference(psi.values);
	EnergyBreakdown e;
	e.kinetic = -(c.hbar * c.hbar / (2.0 * c.mass)) * psi.values.dot(d2).real() * s;
	double v = 0.0;
	for (Eigen::Index i = 0; i < psi.values.size(); ++i)
	{
		v += std::norm(psi.values(i)) * hamiltonian.potential[static_cast<std::size_t>(i)];
	}
	e.potential = v * s;
	e.total = e.kinetic + e.potential;
	return e;
}

EnergyBreakdown expectation_energy(const WaveField& psi, const ExistenceProblem& problem)
{
	if (static_cast<std::size_t>(psi.values.size()) != problem.dimension())
	{
		throw Error(ErrorKind::Config, "state does not match the problem dimension");
	}
	const double cell = problem.cell();
	require_normalized(psi.values.squaredNorm() * cell);

	EnergyBreakdown e;
	e.kinetic = psi.values.dot(problem.apply_blocks(psi.values)).real() * cell;
	double v = 0.0;
	const auto nxi = problem.n_xi();
	for (std::size_t i = 0; i < problem.n_q(); ++i)
	{
		for (std::size_t j = 0; j < nxi; ++j)
		{
			v += problem.coupling()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))
			     * std::norm(psi.values(static_cast<Eigen::Index>(i * nxi + j)));
		}
	}
	e.potential = v * cell;
	e.total = e.kinetic + e.potential;
	return e;
}

} // namespace epdyn
