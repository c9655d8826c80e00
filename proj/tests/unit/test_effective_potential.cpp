#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "epdyn/effective_potential.hpp"
#include "epdyn/errors.hpp"
#include "epdyn/problems.hpp"
#include "oracles.hpp"

using namespace epdyn;

namespace
{

ExistenceProblem toy()
{
	Eigen::MatrixXcd m(2, 2);
	m << 0.0, 1.0, 1.0, 2.0;
	return ExistenceProblem::from_matrix(HermitianOperator(m));
}

EPOperator toy_op()
{
	return EPOperator(make_partition(toy(), PartitionSelector::explicit_indices({0})));
}

// block-diagonal: P = {0, 1}, Q = {2, 3}, no coupling
ExistenceProblem decoupled()
{
	Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(4, 4);
	m.topLeftCorner(2, 2) << 1.0, 0.5, 0.5, -1.0;
	m.bottomRightCorner(2, 2) << 3.0, cplx(0.0, 0.2), cplx(0.0, -0.2), 4.0;
	return ExistenceProblem::from_matrix(HermitianOperator(m));
}

std::vector<double> energies(const RootEnumeration& en)
{
	std::vector<double> out;
	for (const auto& r : en.roots)
	{
		out.push_back(r.energy);
	}
	return out;
}

} // namespace

TEST_CASE("partition complements and errors")
{
	const auto p4 = ExistenceProblem::from_matrix(HermitianOperator(oracle::hermitian(4, 1)));
	const Partition part = make_partition(p4, PartitionSelector::explicit_indices({0, 1}));
	CHECK(part.q_indices() == std::vector<std::size_t>{2, 3});
	CHECK_THROWS_AS(make_partition(p4, PartitionSelector::explicit_indices({0, 1, 2, 3})), Error);
	CHECK_THROWS_AS(make_partition(p4, PartitionSelector::explicit_indices({})), Error);
	CHECK_THROWS_AS(make_partition(p4, PartitionSelector::explicit_indices({0, 0})), Error);
	CHECK_THROWS_AS(make_partition(p4, PartitionSelector::explicit_indices({7})), Error);

	const PhysicalConstants c;
	const Grid gq = build_grid(50, 0.0, 1.0);
	const Grid gx = build_grid(2, 0.0, 1.0);
	const auto big = ExistenceProblem::assemble(build_kinetic(gq, c), build_kinetic(gx, c),
	                                            Eigen::MatrixXd::Zero(50, 2), c, gq, gx);
	for (auto sel : {PartitionSelector::ground_channel(), PartitionSelector::xi_index(0)})
	{
		const Partition pc = make_partition(big, sel);
		CHECK(pc.p_indices().size() == 50);
		CHECK(pc.q_indices().size() == 50);
	}
	CHECK_THROWS_AS(make_partition(big, PartitionSelector::xi_index(2)), Error);
}

TEST_CASE("toy 2x2: scalar effective Hamiltonian 1/(E - 2)")
{
	const EPOperator op = toy_op();
	for (double e : {-3.0, -0.5, 0.0, 1.0, 2.5, 7.0})
	{
		const HermitianOperator h = effective_hamiltonian(op, e);
		REQUIRE(h.dimension() == 1);
		CHECK(h.entry(0, 0).real() == doctest::Approx(1.0 / (e - 2.0)).epsilon(1e-12));
		CHECK(std::abs(h.entry(0, 0).imag()) < 1e-15);
	}
	CHECK_THROWS_AS(effective_hamiltonian(op, 2.0), PoleProximityError);
	try
	{
		(void)effective_hamiltonian(op, 2.0 + 1e-12);
	}
	catch (const PoleProximityError& e)
	{
		CHECK(e.nearest_pole() == doctest::Approx(2.0));
	}
}

TEST_CASE("toy 2x2: characteristic zeros, sign changes and roots")
{
	const EPOperator op = toy_op();
	const double r1 = 1.0 - std::sqrt(2.0);
	const double r2 = 1.0 + std::sqrt(2.0);
	CHECK(std::abs(ep_characteristic(op, r1).value()) < 1e-12);
	CHECK(std::abs(ep_characteristic(op, r2).value()) < 1e-12);
	for (double r : {r1, r2})
	{
		CHECK(ep_characteristic(op, r - 1e-3).sign * ep_characteristic(op, r + 1e-3).sign < 0);
	}
	const RootEnumeration en = enumerate_roots(op);
	REQUIRE(en.roots.size() == 2);
	CHECK(en.complete());
	CHECK(en.roots[0].energy == doctest::Approx(r1).epsilon(1e-12));
	CHECK(en.roots[1].energy == doctest::Approx(r2).epsilon(1e-12));
	CHECK(std::abs(en.roots[0].energy - (-0.41421)) < 1e-5);
	CHECK(std::abs(en.roots[1].energy - 2.41421) < 1e-5);

	// eigenvector of [[0,1],[1,2]] for 1 + sqrt 2 is (1, 1 + sqrt 2)/norm
	Eigen::Vector2cd v(1.0, r2);
	v.normalize();
	const WaveField w = reconstruct_full_state(op, r2, en.roots[1].psi_p);
	CHECK(std::abs(v.dot(w.values) / w.values.norm()) >= 1.0 - 1e-8);
}

TEST_CASE("effective Hamiltonian is Hermitian and tends to H_PP")
{
	const auto p = random_coupled_problem(7, 3);
	const EPOperator op(make_partition(p, PartitionSelector::ground_channel()));
	const Eigen::MatrixXcd w = op.partition().working_operator();
	const auto& pi = op.partition().p_indices();
	Eigen::MatrixXcd hpp(pi.size(), pi.size());
	for (std::size_t i = 0; i < pi.size(); ++i)
	{
		for (std::size_t j = 0; j < pi.size(); ++j)
		{
			hpp(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
			    w(static_cast<Eigen::Index>(pi[i]), static_cast<Eigen::Index>(pi[j]));
		}
	}
	for (double e : {-2.3, 0.1, 1.7})
	{
		if (op.nearest_pole(e) && std::abs(*op.nearest_pole(e) - e) < 1e-3)
		{
			continue;
		}
		CHECK(effective_hamiltonian(op, e).hermiticity_defect() <= 1e-10);
	}
	// H_eff(E) = H_PP + H_PQ H_QP / E + O(scale^3 / E^2)
	const auto& qi = op.partition().q_indices();
	Eigen::MatrixXcd hpq(pi.size(), qi.size());
	for (std::size_t i = 0; i < pi.size(); ++i)
	{
		for (std::size_t j = 0; j < qi.size(); ++j)
		{
			hpq(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
			    w(static_cast<Eigen::Index>(pi[i]), static_cast<Eigen::Index>(qi[j]));
		}
	}
	const double far = 1e6 * op.scale();
	const Eigen::MatrixXcd leading = hpp + hpq * hpq.adjoint() / far;
	CHECK((effective_hamiltonian(op, far).matrix() - hpp).cwiseAbs().maxCoeff() <= 1e-4 * op.scale());
	CHECK((effective_hamiltonian(op, far).matrix() - leading).cwiseAbs().maxCoeff() <= 1e-9 * op.scale());
}

TEST_CASE("zero coupling: H_eff = H_PP and Q levels are decoupled poles")
{
	const EPOperator op(make_partition(decoupled(), PartitionSelector::explicit_indices({0, 1})));
	Eigen::Matrix2cd hpp;
	hpp << 1.0, 0.5, 0.5, -1.0;
	for (double e : {-5.0, 0.0, 2.0, 10.0})
	{
		CHECK((effective_hamiltonian(op, e).matrix() - hpp).cwiseAbs().maxCoeff() < 1e-14);
	}
	const RootEnumeration en = enumerate_roots(op);
	CHECK(en.complete());
	const auto pp = oracle::eigenvalues(hpp);
	CHECK(oracle::max_abs_diff(energies(en), pp) < 1e-10);
	Eigen::Matrix2cd hqq;
	hqq << 3.0, cplx(0.0, 0.2), cplx(0.0, -0.2), 4.0;
	CHECK(oracle::max_abs_diff(en.decoupled_poles, oracle::eigenvalues(hqq)) < 1e-10);
	// characteristic zeros sit exactly on the H_PP eigenvalues
	for (double e : pp)
	{
		CHECK(std::abs(ep_characteristic(op, e).value()) < 1e-12);
	}
	// reconstruction leaves Q empty
	const WaveField w = reconstruct_full_state(op, en.roots[0].energy, en.roots[0].psi_p);
	CHECK(std::abs(w.values(2)) < 1e-14);
	CHECK(std::abs(w.values(3)) < 1e-14);
}

TEST_CASE("generic 4x4: four roots equal to the dense spectrum")
{
	const Eigen::MatrixXcd m = oracle::hermitian(4, 17);
	const auto p = ExistenceProblem::from_matrix(HermitianOperator(m));
	const EPOperator op(make_partition(p, PartitionSelector::explicit_indices({0, 1})));
	const RootEnumeration en = enumerate_roots(op);
	CHECK(en.roots.size() == 4);
	CHECK(en.complete());
	CHECK(oracle::max_abs_diff(energies(en), oracle::eigenvalues(m)) <= 1e-8 * HermitianOperator(m).norm_inf());
}

TEST_CASE("property: EP roots reproduce the oracle on random coupled problems")
{
	for (std::uint64_t idx = 0; idx < 20; ++idx)
	{
		CAPTURE(idx);
		const auto p = random_coupled_problem(424242, idx);
		const HermitianOperator h = p.full_operator();
		const EPOperator op(make_partition(p, PartitionSelector::ground_channel()));
		const RootEnumeration en = enumerate_roots(op);
		CHECK(en.complete());
		std::vector<double> merged = energies(en);
		merged.insert(merged.end(), en.decoupled_poles.begin(), en.decoupled_poles.end());
		std::sort(merged.begin(), merged.end());
		CHECK(oracle::max_abs_diff(merged, oracle::eigenvalues(h.matrix())) <= 1e-8 * h.norm_inf());
		for (const auto& r : en.roots)
		{
			CHECK(r.residual <= 1e-8 * h.norm_inf());
			const Eigen::VectorXcd& psi = r.psi_full.values;
			CHECK((h.matrix() * psi - r.energy * psi).norm() / psi.norm() <= 1e-8 * h.norm_inf());
		}
		// branch ids follow ascending energy
		for (std::size_t k = 1; k < en.roots.size(); ++k)
		{
			CHECK(en.roots[k].energy > en.roots[k - 1].energy);
			CHECK(en.roots[k].branch_id == k);
		}
	}
}

TEST_CASE("degenerate levels are counted with multiplicity")
{
	// two identical uncoupled 2x2 blocks interleaved with a coupling
	Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(4, 4);
	m(0, 0) = 1.0;
	m(1, 1) = 1.0;
	m(2, 2) = 2.0;
	m(3, 3) = 2.0;
	m(0, 2) = m(2, 0) = 0.5;
	m(1, 3) = m(3, 1) = 0.5;
	const auto p = ExistenceProblem::from_matrix(HermitianOperator(m));
	const RootEnumeration en = enumerate_roots(EPOperator(make_partition(p, PartitionSelector::explicit_indices({0, 1}))));
	CHECK(en.complete());
	CHECK(oracle::max_abs_diff(energies(en), oracle::eigenvalues(m)) < 1e-9);
}

TEST_CASE("narrow scan range reports incompleteness")
{
	ScanOptions scan;
	scan.e_min = 0.0;
	scan.e_max = 3.0;
	const RootEnumeration en = enumerate_roots(toy_op(), scan);
	CHECK(en.roots.size() == 1);
	CHECK_FALSE(en.complete());
	CHECK_FALSE(en.diagnostics().empty());
}

TEST_CASE("clustering: alpha ratios are exact")
{
	Eigen::MatrixXcd m = oracle::hermitian(4, 8);
	const auto p = ExistenceProblem::from_matrix(HermitianOperator(m));
	const RootEnumeration en =
	    enumerate_roots(EPOperator(make_partition(p, PartitionSelector::explicit_indices({0, 1}))));
	REQUIRE(en.roots.size() == 4);

	const RealisationEnsemble separate = cluster_realisations(en.roots, p, 0.0);
	REQUIRE(separate.size() == 4);
	for (std::size_t r = 0; r < 4; ++r)
	{
		CHECK(separate.alpha(r).num == 1);
		CHECK(separate.alpha(r).den == 4);
	}
	const RealisationEnsemble one = cluster_realisations(en.roots, p, 1e300);
	REQUIRE(one.size() == 1);
	CHECK(one.alpha(0).num == 4);
	CHECK(one.alpha(0).den == 4);

	const RealisationEnsemble single = cluster_realisations({en.roots[0]}, p, 0.0);
	CHECK(single.size() == 1);
	CHECK(single.alpha(0).value() == 1.0);
}

TEST_CASE("clustering 3 + 1 gives alpha 3/4 and 1/4")
{
	const Grid g = build_grid(201, -10.0, 10.0);
	const RealisationEnsemble e = RealisationEnsemble::synthetic(g, {3, 1}, {-2.0, 4.0}, {0.5, 0.5});
	CHECK(e.alpha(0).num == 3);
	CHECK(e.alpha(1).num == 1);
	CHECK(e.total() == 4);
	CHECK(e.alpha(0).num + e.alpha(1).num == e.total());
}

TEST_CASE("property: clustering monotone in width and alpha sums to one")
{
	for (std::uint64_t idx = 0; idx < 10; ++idx)
	{
		const auto p = random_coupled_problem(1234, idx);
		const RootEnumeration en = enumerate_roots(EPOperator(make_partition(p, PartitionSelector::ground_channel())));
		std::size_t prev = en.roots.size() + 1;
		for (double w : {0.0, 0.1, 0.3, 1.0, 3.0, 1e300})
		{
			const RealisationEnsemble e = cluster_realisations(en.roots, p, w);
			CHECK(e.size() <= prev);
			prev = e.size();
			std::uint64_t sum = 0;
			for (std::size_t r = 0; r < e.size(); ++r)
			{
				CHECK(e.alpha(r).den == en.roots.size());
				sum += e.alpha(r).num;
			}
			CHECK(sum == e.total());
			CHECK(e.total() == en.roots.size());

			const auto rho = assemble_density(e);
			double mass = 0.0;
			for (double v : rho)
			{
				CHECK(v >= 0.0);
				mass += v * e.grid().spacing();
			}
			CHECK(mass == doctest::Approx(1.0).epsilon(1e-10));
		}
	}
}

TEST_CASE("assemble_density: single realisation and symmetric pair")
{
	const Grid g = build_grid(401, -10.0, 10.0);
	const RealisationEnsemble one = RealisationEnsemble::synthetic(g, {1}, {1.0}, {0.7});
	const auto rho1 = assemble_density(one);
	for (std::size_t i = 0; i < g.size(); ++i)
	{
		CHECK(rho1[i] == doctest::Approx(one[0].density[i]).epsilon(1e-14));
	}
	const RealisationEnsemble two = RealisationEnsemble::synthetic(g, {1, 1}, {-2.0, 2.0}, {0.7, 0.7});
	const auto rho2 = assemble_density(two);
	for (std::size_t i = 0; i < g.size(); ++i)
	{
		CHECK(rho2[i] == doctest::Approx(0.5 * (two[0].density[i] + two[1].density[i])).epsilon(1e-14));
	}
}
