#include "epdyn/problems.hpp"

#include <cmath>

#include "epdyn/philox.hpp"

namespace epdyn
{

namespace
{

double symmetric(CounterRng& rng, double scale)
{
	return scale * (2.0 * rng.uniform01() - 1.0);
}

HermitianOperator random_hermitian(std::size_t n, CounterRng& rng, double scale)
{
	const auto m = static_cast<Eigen::Index>(n);
	Eigen::MatrixXcd a(m, m);
	for (Eigen::Index i = 0; i < m; ++i)
	{
		a(i, i) = symmetric(rng, scale);
		for (Eigen::Index j = i + 1; j < m; ++j)
		{
			const double re = symmetric(rng, scale);
			const double im = symmetric(rng, scale);
			a(i, j) = cplx{re, im};
			a(j, i) = cplx{re, -im};
		}
	}
	return HermitianOperator(std::move(a));
}

} // namespace

ExistenceProblem random_coupled_problem(std::uint64_t seed, std::uint64_t index,
                                        const RandomProblemOptions& options)
{
	if (options.n_min < 1 || options.n_max < options.n_min || !(options.scale > 0.0))
	{
		throw Error(ErrorKind::Config, "random problem options out of range");
	}
	CounterRng rng(seed, index);
	const std::uint64_t span = options.n_max - options.n_min + 1;
	const std::size_t nq = options.n_min + rng.uniform_below(span);
	const std::size_t nxi = options.n_min + rng.uniform_below(span);
	HermitianOperator he = random_hermitian(nq, rng, options.scale);
	HermitianOperator hg = random_hermitian(nxi, rng, options.scale);
	Eigen::MatrixXd v(static_cast<Eigen::Index>(nq), static_cast<Eigen::Index>(nxi));
	for (Eigen::Index i = 0; i < v.rows(); ++i)
	{
		for (Eigen::Index j = 0; j < v.cols(); ++j)
		{
			v(i, j) = symmetric(rng, options.scale);
		}
	}
	return ExistenceProblem::assemble(std::move(he), std::move(hg), std::move(v), PhysicalConstants{});
}

Hamiltonian1D box_hamiltonian(std::size_t n, double length, const PhysicalConstants& constants)
{
	Hamiltonian1D h{box_grid(n, length), std::vector<double>(n, 0.0), constants, Boundary::Dirichlet};
	h.validate();
	return h;
}

double box_level(std::size_t k, double length, const PhysicalConstants& constants)
{
	const double p = static_cast<double>(k) * kPi * constants.hbar / length;
	return p * p / (2.0 * constants.mass);
}

Hamiltonian1D harmonic_hamiltonian(std::size_t n, double length, double omega,
                                   const PhysicalConstants& constants)
{
	Grid grid = box_grid(n, length);
	std::vector<double> v(n);
	for (std::size_t i = 0; i < n; ++i)
	{
		const double d = grid.point(i) - 0.5 * length;
		v[i] = 0.5 * constants.mass * omega * omega * d * d;
	}
	Hamiltonian1D h{grid, std::move(v), constants, Boundary::Dirichlet};
	h.validate();
	return h;
}

WaveField gaussian_packet(const Grid& grid, double x0, double sigma, double k0)
{
	if (!(sigma > 0.0))
	{
		throw Error(ErrorKind::Config, "gaussian packet needs sigma > 0");
	}
	WaveField psi;
	psi.cell = grid.spacing();
	psi.values.resize(static_cast<Eigen::Index>(grid.size()));
	for (std::size_t i = 0; i < grid.size(); ++i)
	{
		const double x = grid.point(i);
		const double d = x - x0;
		psi.values(static_cast<Eigen::Index>(i)) = std::exp(cplx{-d * d / (4.0 * sigma * sigma), k0 * x});
	}
	return psi.normalized();
}

} // namespace epdyn
