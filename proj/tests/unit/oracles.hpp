#pragma once

// Independent reference computations shared by the unit tests. Nothing here
// calls into the library's solvers.

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace oracle
{

inline std::vector<double> eigenvalues(const Eigen::MatrixXcd& m)
{
	Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
	std::vector<double> out(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
	return out;
}

inline std::vector<double> minkowski_sum(const std::vector<double>& a, const std::vector<double>& b)
{
	std::vector<double> out;
	for (double x : a)
	{
		for (double y : b)
		{
			out.push_back(x + y);
		}
	}
	std::sort(out.begin(), out.end());
	return out;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b)
{
	double worst = a.size() == b.size() ? 0.0 : INFINITY;
	for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i)
	{
		worst = std::max(worst, std::abs(a[i] - b[i]));
	}
	return worst;
}

/// Kronecker product, written out.
inline Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b)
{
	Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
	for (Eigen::Index i = 0; i < a.rows(); ++i)
	{
		for (Eigen::Index j = 0; j < a.cols(); ++j)
		{
			out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
		}
	}
	return out;
}

/// Hermitian matrix with entries drawn from a small LCG; deterministic.
inline Eigen::MatrixXcd hermitian(Eigen::Index n, unsigned seed)
{
	unsigned long long s = seed * 6364136223846793005ULL + 1442695040888963407ULL;
	auto next = [&] {
		s = s * 6364136223846793005ULL + 1442695040888963407ULL;
		return static_cast<double>(s >> 11) * 0x1.0p-53 * 2.0 - 1.0;
	};
	Eigen::MatrixXcd m(n, n);
	for (Eigen::Index i = 0; i < n; ++i)
	{
		m(i, i) = next();
		for (Eigen::Index j = i + 1; j < n; ++j)
		{
			m(i, j) = {next(), next()};
			m(j, i) = std::conj(m(i, j));
		}
	}
	return m;
}

} // namespace oracle
