#include "epdyn/effective_potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace epdyn
{

// ---------------------------------------------------------------------------
// Partition

Partition make_partition(const ExistenceProblem& problem, const PartitionSelector& selector)
{
	const std::size_t n = problem.dimension();
	const std::size_t nq = problem.n_q();
	const std::size_t nxi = problem.n_xi();
	const auto nx = static_cast<Eigen::Index>(nxi);

	Eigen::MatrixXcd basis = Eigen::MatrixXcd::Identity(nx, nx);
	std::vector<char> in_p(n, 0);

	switch (selector.kind)
	{
	case PartitionSelector::Kind::Channel:
	case PartitionSelector::Kind::XiIndex:
	{
		if (selector.channel >= nxi)
		{
			throw Error(ErrorKind::Partition, "xi channel " + std::to_string(selector.channel)
			                                      + " out of range (n_xi = " + std::to_string(nxi) + ")");
		}
		for (std::size_t i = 0; i < nq; ++i)
		{
			in_p[problem.index(i, selector.channel)] = 1;
		}
		if (selector.kind == PartitionSelector::Kind::Channel)
		{
			Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(problem.h_g().matrix());
			basis = solver.eigenvectors();
		}
		break;
	}
	case PartitionSelector::Kind::Indices:
	{
		for (std::size_t idx : selector.indices)
		{
			if (idx >= n)
			{
				throw Error(ErrorKind::Partition, "P index " + std::to_string(idx) + " out of range");
			}
			if (in_p[idx])
			{
				throw Error(ErrorKind::Partition, "P index " + std::to_string(idx) + " repeated");
			}
			in_p[idx] = 1;
		}
		break;
	}
	}

	std::vector<std::size_t> p;
	std::vector<std::size_t> q;
	for (std::size_t k = 0; k < n; ++k)
	{
		(in_p[k] ? p : q).push_back(k);
	}
	if (p.empty())
	{
		throw Error(ErrorKind::Partition, "P subspace is empty");
	}
	if (q.empty())
	{
		throw Error(ErrorKind::Partition, "P subspace covers the whole space; Q would be empty");
	}
	return Partition(problem, selector.kind, std::move(basis), std::move(p), std::move(q));
}

Eigen::MatrixXcd Partition::working_operator() const
{
	const auto nq = static_cast<Eigen::Index>(problem_.n_q());
	const auto nxi = static_cast<Eigen::Index>(problem_.n_xi());
	const auto& he = problem_.h_e().matrix();
	const auto& hg = problem_.h_g().matrix();
	const auto& v = problem_.coupling();
	const auto& g = xi_basis_;

	Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(nq * nxi, nq * nxi);
	for (Eigen::Index i = 0; i < nq; ++i)
	{
		for (Eigen::Index k = 0; k < nq; ++k)
		{
			if (i == k || he(i, k) == cplx{})
			{
				continue;
			}
			for (Eigen::Index a = 0; a < nxi; ++a)
			{
				h(i * nxi + a, k * nxi + a) = he(i, k);
			}
		}
		// On-site block in the working basis: G^dag (h_g + diag V(q_i, .)) G
		Eigen::MatrixXcd site = hg;
		site.diagonal() += v.row(i).transpose().cast<cplx>();
		Eigen::MatrixXcd rotated = g.adjoint() * site * g;
		rotated.diagonal().array() += he(i, i);
		h.block(i * nxi, i * nxi, nxi, nxi) = rotated;
	}
	// Restore exact Hermiticity lost in the basis rotation.
	return 0.5 * (h + h.adjoint());
}

Eigen::VectorXcd Partition::to_grid_basis(const Eigen::VectorXcd& working) const
{
	if (kind_ != PartitionSelector::Kind::Channel)
	{
		return working;
	}
	const auto nq = static_cast<Eigen::Index>(problem_.n_q());
	const auto nxi = static_cast<Eigen::Index>(problem_.n_xi());
	Eigen::VectorXcd out(working.size());
	Eigen::Map<const Eigen::MatrixXcd> w(working.data(), nxi, nq);
	Eigen::Map<Eigen::MatrixXcd> o(out.data(), nxi, nq);
	o.noalias() = xi_basis_ * w;
	return out;
}

// ---------------------------------------------------------------------------
// EP operator

double CharacteristicValue::value() const
{
	if (sign == 0)
	{
		return 0.0;
	}
	return static_cast<double>(sign) * std::exp(log_abs);
}

EPOperator::EPOperator(Partition partition, EPOptions options)
	: partition_(std::move(partition)), options_(options)
{
	const Eigen::MatrixXcd h = partition_.working_operator();
	const HermitianOperator hop(h, 1e-10);
	scale_ = hop.norm_inf();
	bounds_ = hop.gershgorin_bounds();
	const double unit = scale_ > 0.0 ? scale_ : 1.0;

	const auto& pi = partition_.p_indices();
	const auto& qi = partition_.q_indices();
	const auto np = static_cast<Eigen::Index>(pi.size());
	const auto nq = static_cast<Eigen::Index>(qi.size());

	hpp_.resize(np, np);
	Eigen::MatrixXcd hpq(np, nq);
	Eigen::MatrixXcd hqq(nq, nq);
	for (Eigen::Index a = 0; a < np; ++a)
	{
		for (Eigen::Index b = 0; b < np; ++b)
		{
			hpp_(a, b) = h(static_cast<Eigen::Index>(pi[a]), static_cast<Eigen::Index>(pi[b]));
		}
		for (Eigen::Index b = 0; b < nq; ++b)
		{
			hpq(a, b) = h(static_cast<Eigen::Index>(pi[a]), static_cast<Eigen::Index>(qi[b]));
		}
	}
	for (Eigen::Index a = 0; a < nq; ++a)
	{
		for (Eigen::Index b = 0; b < nq; ++b)
		{
			hqq(a, b) = h(static_cast<Eigen::Index>(qi[a]), static_cast<Eigen::Index>(qi[b]));
		}
	}

	Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(hqq);
	const Eigen::VectorXd mu = solver.eigenvalues();
	Eigen::MatrixXcd w = solver.eigenvectors();
	Eigen::MatrixXcd b = hpq * w;

	// Within a (near-)degenerate cluster of H_QQ eigenvalues the eigenbasis is
	// arbitrary; rotate it so coupled and decoupled directions separate.
	const double degenerate = 1e-12 * unit;
	for (Eigen::Index start = 0; start < nq;)
	{
		Eigen::Index end = start + 1;
		while (end < nq && mu(end) - mu(end - 1) <= degenerate)
		{
			++end;
		}
		const Eigen::Index m = end - start;
		if (m > 1)
		{
			Eigen::JacobiSVD<Eigen::MatrixXcd> svd(b.middleCols(start, m), Eigen::ComputeFullV);
			const Eigen::MatrixXcd v = svd.matrixV();
			w.middleCols(start, m) = (w.middleCols(start, m) * v).eval();
			b.middleCols(start, m) = (b.middleCols(start, m) * v).eval();
		}
		start = end;
	}

	std::vector<Eigen::Index> coupled;
	for (Eigen::Index k = 0; k < nq; ++k)
	{
		if (b.col(k).norm() <= options_.decoupling_threshold * unit)
		{
			decoupled_.push_back(mu(k));
		}
		else
		{
			coupled.push_back(k);
		}
	}
	coupling_.resize(np, static_cast<Eigen::Index>(coupled.size()));
	q_modes_.resize(nq, static_cast<Eigen::Index>(coupled.size()));
	for (std::size_t c = 0; c < coupled.size(); ++c)
	{
		const auto col = static_cast<Eigen::Index>(c);
		coupling_.col(col) = b.col(coupled[c]);
		q_modes_.col(col) = w.col(coupled[c]);
		poles_.push_back(mu(coupled[c]));
	}
	std::sort(decoupled_.begin(), decoupled_.end());
}

std::optional<double> EPOperator::nearest_pole(double energy) const
{
	if (poles_.empty())
	{
		return std::nullopt;
	}
	auto it = std::lower_bound(poles_.begin(), poles_.end(), energy);
	double best = it == poles_.end() ? poles_.back() : *it;
	if (it != poles_.begin() && std::abs(*(it - 1) - energy) < std::abs(best - energy))
	{
		best = *(it - 1);
	}
	return best;
}

void EPOperator::check_pole(double energy) const
{
	if (!std::isfinite(energy))
	{
		throw Error(ErrorKind::Domain, "energy must be finite");
	}
	const auto pole = nearest_pole(energy);
	const double guard = options_.pole_guard * (scale_ > 0.0 ? scale_ : 1.0);
	if (pole && std::abs(*pole - energy) <= guard)
	{
		throw PoleProximityError(energy, *pole);
	}
}

Eigen::MatrixXcd EPOperator::heff_matrix(double energy) const
{
	Eigen::MatrixXcd h = hpp_;
	if (coupling_.cols() > 0)
	{
		Eigen::VectorXd weight(static_cast<Eigen::Index>(poles_.size()));
		for (std::size_t k = 0; k < poles_.size(); ++k)
		{
			weight(static_cast<Eigen::Index>(k)) = 1.0 / (energy - poles_[k]);
		}
		h.noalias() += coupling_ * weight.asDiagonal() * coupling_.adjoint();
	}
	return 0.5 * (h + h.adjoint());
}

HermitianOperator EPOperator::effective_hamiltonian(double energy) const
{
	check_pole(energy);
	return HermitianOperator(heff_matrix(energy), std::numeric_limits<double>::infinity());
}

CharacteristicValue EPOperator::characteristic(double energy) const
{
	check_pole(energy);
	Eigen::MatrixXcd m = heff_matrix(energy);
	m.diagonal().array() -= energy;
	Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m, Eigen::EigenvaluesOnly);
	CharacteristicValue out;
	out.sign = 1;
	for (Eigen::Index k = 0; k < solver.eigenvalues().size(); ++k)
	{
		const double lambda = solver.eigenvalues()(k);
		if (lambda == 0.0)
		{
			out.sign = 0;
			out.log_abs = -std::numeric_limits<double>::infinity();
		}
		else
		{
			if (lambda > 0.0)
			{
				++out.positive;
			}
			else if (out.sign != 0)
			{
				out.sign = -out.sign;
			}
			if (out.sign != 0)
			{
				out.log_abs += std::log(std::abs(lambda));
			}
		}
	}
	return out;
}

WaveField EPOperator::reconstruct(double energy, const Eigen::VectorXcd& psi_p) const
{
	check_pole(energy);
	const auto& pi = partition_.p_indices();
	const auto& qi = partition_.q_indices();
	if (static_cast<std::size_t>(psi_p.size()) != pi.size())
	{
		throw Error(ErrorKind::Config, "P-space state has the wrong dimension");
	}
	Eigen::VectorXcd amp = coupling_.adjoint() * psi_p;
	for (std::size_t k = 0; k < poles_.size(); ++k)
	{
		amp(static_cast<Eigen::Index>(k)) /= (energy - poles_[k]);
	}
	const Eigen::VectorXcd psi_q = q_modes_ * amp;

	Eigen::VectorXcd working(static_cast<Eigen::Index>(pi.size() + qi.size()));
	for (std::size_t a = 0; a < pi.size(); ++a)
	{
		working(static_cast<Eigen::Index>(pi[a])) = psi_p(static_cast<Eigen::Index>(a));
	}
	for (std::size_t a = 0; a < qi.size(); ++a)
	{
		working(static_cast<Eigen::Index>(qi[a])) = psi_q(static_cast<Eigen::Index>(a));
	}
	WaveField full{partition_.to_grid_basis(working), partition_.problem().cell(),
	               NormConvention::Raw};
	return full.normalized();
}

HermitianOperator effective_hamiltonian(const EPOperator& op, double energy)
{
	return op.effective_hamiltonian(energy);
}

CharacteristicValue ep_characteristic(const EPOperator& op, double energy)
{
	return op.characteristic(energy);
}

WaveField reconstruct_full_state(const EPOperator& op, double energy, const Eigen::VectorXcd& psi_p)
{
	return op.reconstruct(energy, psi_p);
}

// ---------------------------------------------------------------------------
// Root enumeration

std::vector<std::string> RootEnumeration::diagnostics() const
{
	std::vector<std::string> out;
	const std::size_t accounted = roots.size() + decoupled_poles.size();
	if (accounted != dimension)
	{
		out.push_back("found " + std::to_string(roots.size()) + " roots + "
		              + std::to_string(decoupled_poles.size()) + " decoupled poles for dimension "
		              + std::to_string(dimension));
	}
	if (roots.size() != expected_roots)
	{
		out.push_back("inertia count predicts " + std::to_string(expected_roots)
		              + " roots over the real line; scan range or pole guard hid "
		              + std::to_string(expected_roots > roots.size() ? expected_roots - roots.size()
		                                                             : 0)
		              + " of them");
	}
	return out;
}

namespace
{

struct Bracket
{
	double lo;
	double hi;
	std::size_t count_lo;
	std::size_t count_hi;
};

} // namespace

RootEnumeration enumerate_roots(const EPOperator& op, const ScanOptions& options)
{
	const double unit = op.scale() > 0.0 ? op.scale() : 1.0;
	const auto [glo, ghi] = op.spectral_bounds();
	const double margin = 1e-3 * unit + 1e-12;

	RootEnumeration result;
	result.dimension = op.partition().problem().dimension();
	result.decoupled_poles = op.decoupled_poles();
	result.expected_roots = op.p_dimension() + op.poles().size();
	result.e_min = options.e_min.value_or(glo - margin);
	result.e_max = options.e_max.value_or(ghi + margin);
	result.tol = options.tol > 0.0 ? options.tol : 1e-13 * unit;
	if (!(result.e_max > result.e_min))
	{
		throw Error(ErrorKind::Config, "scan range requires e_max > e_min");
	}
	const std::size_t points = options.scan_points > 0 ? options.scan_points
	                                                   : std::max<std::size_t>(64 * result.dimension, 16);
	// Slightly wider than the operator's own guard so interval ends never trip it.
	const double guard = 1.0000001 * op.options().pole_guard * unit;

	auto count_at = [&](double e) {
		++result.evaluations;
		return op.characteristic(e).positive;
	};

	// Pole-free intervals inside the scan range.
	std::vector<std::pair<double, double>> intervals;
	double left = result.e_min;
	for (double pole : op.poles())
	{
		if (pole <= result.e_min - guard || pole >= result.e_max + guard)
		{
			continue;
		}
		if (pole - guard > left)
		{
			intervals.emplace_back(left, pole - guard);
		}
		left = std::max(left, pole + guard);
	}
	if (result.e_max > left)
	{
		intervals.emplace_back(left, result.e_max);
	}

	const double step = (result.e_max - result.e_min) / static_cast<double>(points - 1);
	std::vector<Bracket> brackets;
	for (const auto& [a, b] : intervals)
	{
		std::vector<double> xs{a};
		const auto first = static_cast<std::size_t>(std::floor((a - result.e_min) / step)) + 1;
		for (std::size_t k = first; k < points; ++k)
		{
			const double x = result.e_min + step * static_cast<double>(k);
			if (x >= b)
			{
				break;
			}
			if (x > a)
			{
				xs.push_back(x);
			}
		}
		xs.push_back(b);

		std::size_t prev = count_at(xs.front());
		for (std::size_t k = 1; k < xs.size(); ++k)
		{
			const std::size_t cur = count_at(xs[k]);
			if (cur < prev)
			{
				brackets.push_back({xs[k - 1], xs[k], prev, cur});
			}
			// The count is non-increasing between poles; a rise is rounding noise.
			prev = std::min(prev, cur);
		}
	}

	// Bisect on the inertia count; each unit drop is one root.
	struct Found
	{
		double energy;
		std::size_t multiplicity;
	};
	std::vector<Found> found;
	std::vector<Bracket> stack(brackets.rbegin(), brackets.rend());
	while (!stack.empty())
	{
		Bracket br = stack.back();
		stack.pop_back();
		if (br.count_lo <= br.count_hi)
		{
			continue;
		}
		const double mid = 0.5 * (br.lo + br.hi);
		if (br.hi - br.lo <= result.tol || mid <= br.lo || mid >= br.hi)
		{
			found.push_back({mid, br.count_lo - br.count_hi});
			continue;
		}
		const std::size_t cm = std::clamp(count_at(mid), br.count_hi, br.count_lo);
		// push right first so the left half is processed first
		stack.push_back({mid, br.hi, cm, br.count_hi});
		stack.push_back({br.lo, mid, br.count_lo, cm});
	}
	std::sort(found.begin(), found.end(),
	          [](const Found& a, const Found& b) { return a.energy < b.energy; });

	const ExistenceProblem& problem = op.partition().problem();
	for (const auto& f : found)
	{
		const Eigen::MatrixXcd heff = op.effective_hamiltonian(f.energy).matrix();
		Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(heff);
		const Eigen::VectorXd& lam = solver.eigenvalues();
		std::vector<Eigen::Index> order(static_cast<std::size_t>(lam.size()));
		std::iota(order.begin(), order.end(), Eigen::Index{0});
		std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
			return std::abs(lam(a) - f.energy) < std::abs(lam(b) - f.energy);
		});
		for (std::size_t m = 0; m < f.multiplicity && m < order.size(); ++m)
		{
			BranchRoot root;
			root.energy = f.energy;
			root.psi_p = solver.eigenvectors().col(order[m]);
			root.psi_full = op.reconstruct(f.energy, root.psi_p);
			const Eigen::VectorXcd r = problem.apply(root.psi_full.values) - f.energy * root.psi_full.values;
			root.residual = r.norm() / root.psi_full.values.norm();
			root.branch_id = result.roots.size();
			result.roots.push_back(std::move(root));
		}
	}
	return result;
}

// ---------------------------------------------------------------------------
// Realisations

namespace
{

void fill_moments(Realisation& r, const Grid& grid)
{
	const double s = grid.spacing();
	double mass = 0.0;
	double first = 0.0;
	for (std::size_t i = 0; i < r.density.size(); ++i)
	{
		mass += r.density[i] * s;
		first += grid.point(i) * r.density[i] * s;
	}
	r.centroid = mass > 0.0 ? first / mass : 0.0;
	double second = 0.0;
	for (std::size_t i = 0; i < r.density.size(); ++i)
	{
		const double d = grid.point(i) - r.centroid;
		second += d * d * r.density[i] * s;
	}
	r.spread = mass > 0.0 ? std::sqrt(second / mass) : 0.0;
}

} // namespace

RealisationEnsemble::RealisationEnsemble(Grid grid, std::vector<Realisation> realisations, double width)
	: grid_(grid), realisations_(std::move(realisations)), width_(width)
{
	if (realisations_.empty())
	{
		throw Error(ErrorKind::Config, "ensemble needs at least one realisation");
	}
	for (const auto& r : realisations_)
	{
		if (r.count == 0)
		{
			throw Error(ErrorKind::Config, "realisation with zero elementary count");
		}
		if (r.density.size() != grid_.size())
		{
			throw Error(ErrorKind::Config, "realisation density does not match the grid");
		}
		double mass = 0.0;
		for (double v : r.density)
		{
			if (!(v >= 0.0))
			{
				throw Error(ErrorKind::Config, "realisation density must be non-negative");
			}
			mass += v * grid_.spacing();
		}
		const double n = static_cast<double>(r.count);
		if (std::abs(mass - n) > 1e-8 * n)
		{
			throw Error(ErrorKind::Config, "realisation density does not integrate to its count");
		}
		total_ += r.count;
	}
}

RealisationEnsemble RealisationEnsemble::synthetic(const Grid& grid,
                                                   const std::vector<std::uint64_t>& counts,
                                                   const std::vector<double>& centroids,
                                                   const std::vector<double>& spreads)
{
	if (counts.size() != centroids.size() || counts.size() != spreads.size())
	{
		throw Error(ErrorKind::Config, "synthetic ensemble: counts, centroids and spreads differ in length");
	}
	std::vector<Realisation> out;
	for (std::size_t r = 0; r < counts.size(); ++r)
	{
		Realisation real;
		real.count = counts[r];
		real.density.assign(grid.size(), 0.0);
		if (spreads[r] > 0.0)
		{
			double mass = 0.0;
			for (std::size_t i = 0; i < grid.size(); ++i)
			{
				const double z = (grid.point(i) - centroids[r]) / spreads[r];
				real.density[i] = std::exp(-0.5 * z * z);
				mass += real.density[i] * grid.spacing();
			}
			if (!(mass > 0.0))
			{
				throw Error(ErrorKind::Config, "synthetic realisation falls outside the grid");
			}
			for (double& v : real.density)
			{
				v *= static_cast<double>(real.count) / mass;
			}
		}
		else
		{
			const double pos = (centroids[r] - grid.min()) / grid.spacing();
			const auto idx = static_cast<std::size_t>(
			    std::clamp(std::llround(pos), 0LL, static_cast<long long>(grid.size()) - 1));
			real.density[idx] = static_cast<double>(real.count) / grid.spacing();
		}
		fill_moments(real, grid);
		out.push_back(std::move(real));
	}
	return RealisationEnsemble(grid, std::move(out), 0.0);
}

std::vector<std::size_t> RealisationEnsemble::member_clusters() const
{
	std::size_t top = 0;
	bool any = false;
	for (const auto& r : realisations_)
	{
		for (std::size_t m : r.members)
		{
			top = std::max(top, m);
			any = true;
		}
	}
	if (!any)
	{
		return {};
	}
	std::vector<std::size_t> out(top + 1, 0);
	for (std::size_t c = 0; c < realisations_.size(); ++c)
	{
		for (std::size_t m : realisations_[c].members)
		{
			out[m] = c;
		}
	}
	return out;
}

RealisationEnsemble cluster_realisations(const std::vector<BranchRoot>& roots,
                                         const ExistenceProblem& problem, double width)
{
	if (roots.empty())
	{
		throw Error(ErrorKind::Config, "cannot cluster an empty root list");
	}
	if (!(width >= 0.0))
	{
		throw Error(ErrorKind::Config, "cluster width must be non-negative");
	}
	const Grid& grid = problem.grid_q();

	struct Item
	{
		std::size_t id;
		double centroid;
		std::vector<double> density;
	};
	std::vector<Item> items;
	for (const auto& root : roots)
	{
		Realisation single;
		single.density = problem.q_density(root.psi_full.values);
		fill_moments(single, grid);
		items.push_back({root.branch_id, single.centroid, std::move(single.density)});
	}
	std::stable_sort(items.begin(), items.end(),
	                 [](const Item& a, const Item& b) { return a.centroid < b.centroid; });

	std::vector<Realisation> clusters;
	for (std::size_t k = 0; k < items.size(); ++k)
	{
		if (k == 0 || !(items[k].centroid - items[k - 1].centroid < width))
		{
			Realisation r;
			r.density.assign(grid.size(), 0.0);
			clusters.push_back(std::move(r));
		}
		Realisation& cur = clusters.back();
		cur.members.push_back(items[k].id);
		cur.count += 1;
		for (std::size_t i = 0; i < grid.size(); ++i)
		{
			cur.density[i] += items[k].density[i];
		}
	}
	for (auto& c : clusters)
	{
		std::sort(c.members.begin(), c.members.end());
		// Each member density integrates to one up to rounding; pin it exactly.
		double mass = 0.0;
		for (double v : c.density)
		{
			mass += v * grid.spacing();
		}
		for (double& v : c.density)
		{
			v *= static_cast<double>(c.count) / mass;
		}
		fill_moments(c, grid);
	}
	return RealisationEnsemble(grid, std::move(clusters), width);
}

std::vector<double> assemble_density(const RealisationEnsemble& ensemble)
{
	std::vector<double> rho(ensemble.grid().size(), 0.0);
	for (std::size_t r = 0; r < ensemble.size(); ++r)
	{
		const auto& real = ensemble[r];
		const double weight = ensemble.alpha(r).value() / static_cast<double>(real.count);
		for (std::size_t i = 0; i < rho.size(); ++i)
		{
			rho[i] += weight * real.density[i];
		}
	}
	return rho;
}

} // namespace epdyn
