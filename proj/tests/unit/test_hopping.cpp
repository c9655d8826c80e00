#include <doctest.h>

#include <cmath>
#include <numeric>
#include <set>

#include "epdyn/errors.hpp"
#include "epdyn/hopping.hpp"
#include "epdyn/philox.hpp"

using namespace epdyn;

namespace
{

RealisationEnsemble ensemble(const std::vector<std::uint64_t>& counts, const std::vector<double>& spreads)
{
	std::vector<double> centroids(counts.size());
	for (std::size_t r = 0; r < counts.size(); ++r)
	{
		centroids[r] = -3.0 + 6.0 * static_cast<double>(r) / static_cast<double>(std::max<std::size_t>(1, counts.size() - 1));
	}
	return RealisationEnsemble::synthetic(build_grid(601, -10.0, 10.0), counts, centroids, spreads);
}

HopConfig chaos(std::size_t steps, std::uint64_t seed)
{
	HopConfig c;
	c.steps = steps;
	c.seed = seed;
	return c;
}

double three_sigma(double alpha, std::size_t steps)
{
	return 3.0 * std::sqrt(alpha * (1.0 - alpha) / static_cast<double>(steps));
}

} // namespace

TEST_CASE("Philox4x32-10 known-answer vectors")
{
	using P = Philox4x32;
	CHECK(P::block({0, 0, 0, 0}, {0, 0}) == P::Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
	CHECK(P::block({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu})
	      == P::Counter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
	CHECK(P::block({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u})
	      == P::Counter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("counter RNG: streams are independent and reproducible")
{
	CounterRng a(42, 0);
	CounterRng b(42, 0);
	CounterRng c(42, 1);
	std::set<std::uint64_t> seen;
	bool differs = false;
	for (int i = 0; i < 1000; ++i)
	{
		const auto x = a.next_u64();
		CHECK(x == b.next_u64());
		differs = differs || x != c.next_u64();
		seen.insert(x);
	}
	CHECK(differs);
	CHECK(seen.size() == 1000);
	CounterRng u(7);
	for (int i = 0; i < 1000; ++i)
	{
		const double v = u.uniform01();
		CHECK(v >= 0.0);
		CHECK(v < 1.0);
		CHECK(u.uniform_below(3) < 3);
	}
}

TEST_CASE("hop_step: degenerate and binomial cases")
{
	const RealisationEnsemble one = ensemble({1}, {0.5});
	CounterRng rng(1);
	for (int i = 0; i < 100; ++i)
	{
		CHECK(hop_step(one, rng) == 0);
	}

	const std::size_t n = 100000;
	for (auto [counts, alpha0] : {std::pair{std::vector<std::uint64_t>{1, 1}, 0.5},
	                              std::pair{std::vector<std::uint64_t>{3, 1}, 0.75}})
	{
		const RealisationEnsemble e = ensemble(counts, {0.5, 0.5});
		CounterRng r(2024);
		std::size_t zeros = 0;
		for (std::size_t i = 0; i < n; ++i)
		{
			zeros += hop_step(e, r) == 0 ? 1 : 0;
		}
		const double f = static_cast<double>(zeros) / static_cast<double>(n);
		CHECK(std::abs(f - alpha0) <= three_sigma(alpha0, n));
	}
	// +-0.0047 quoted for alpha 1/2 at 1e5 draws
	CHECK(three_sigma(0.5, n) == doctest::Approx(0.0047).epsilon(0.01));
}

TEST_CASE("simulate_hops: chaos regime")
{
	SUBCASE("single realisation gives a constant trajectory")
	{
		const RealisationEnsemble e = ensemble({5}, {0.3});
		const HopTrajectory t = simulate_hops(e, chaos(200, 9));
		CHECK(t.records.size() == 200);
		for (const auto& rec : t.records)
		{
			CHECK(rec.realisation == 0);
			CHECK(rec.centroid == t.records.front().centroid);
		}
		CHECK(t.records.front().step == 1);
		CHECK(t.records.back().step == 200);
	}
	SUBCASE("same seed is bit-identical, other seed differs")
	{
		const RealisationEnsemble e = ensemble({1, 2, 3}, {0.5, 0.5, 0.5});
		const HopTrajectory a = simulate_hops(e, chaos(1000, 5));
		const HopTrajectory b = simulate_hops(e, chaos(1000, 5));
		const HopTrajectory c = simulate_hops(e, chaos(1000, 6));
		bool same = true;
		bool differs = false;
		for (std::size_t i = 0; i < 1000; ++i)
		{
			same = same && a.records[i].realisation == b.records[i].realisation;
			differs = differs || a.records[i].realisation != c.records[i].realisation;
		}
		CHECK(same);
		CHECK(differs);
	}
}

TEST_CASE("empirical frequencies: bookkeeping and binomial convergence")
{
	const RealisationEnsemble e = ensemble({3, 1}, {0.5, 0.5});
	const HopTrajectory one = simulate_hops(e, chaos(1, 3));
	const EmpiricalStats s1 = empirical_frequencies(one, e);
	CHECK(s1.frequencies[0] + s1.frequencies[1] == 1.0);
	CHECK((s1.frequencies[0] == 1.0 || s1.frequencies[1] == 1.0));

	const std::size_t n = 100000;
	const HopTrajectory t = simulate_hops(e, chaos(n, 11));
	const EmpiricalStats s = empirical_frequencies(t, e);
	CHECK(std::accumulate(s.counts.begin(), s.counts.end(), std::uint64_t{0}) == n);
	CHECK(std::abs(s.frequencies[0] - 0.75) <= three_sigma(0.75, n));
	CHECK(std::abs(s.frequencies[1] - 0.25) <= three_sigma(0.25, n));
	CHECK_FALSE(s.regime_mismatch);

	// process reading agrees with the expectation reading
	const auto avg = time_averaged_density(s, e);
	const auto expect = assemble_density(e);
	double worst = 0.0;
	double peak = 0.0;
	for (std::size_t i = 0; i < avg.size(); ++i)
	{
		worst = std::max(worst, std::abs(avg[i] - expect[i]));
		peak = std::max(peak, expect[i]);
	}
	CHECK(worst <= three_sigma(0.75, n) * peak * 2.0);
}

TEST_CASE("measurement regime: geometric freeze law and absorption")
{
	HopConfig c;
	c.regime = Regime::Measurement;
	c.steps = 200;
	c.seed = 77;
	c.localization_threshold = 0.5;
	const RealisationEnsemble e = ensemble({1, 1}, {0.1, 2.0});

	const std::size_t trajectories = 10000;
	const auto freeze = simulate_freeze_steps(e, c, trajectories, 2);
	double sum = 0.0;
	for (const auto& f : freeze)
	{
		REQUIRE(f.has_value());
		sum += static_cast<double>(*f);
	}
	const double mean = sum / static_cast<double>(trajectories);
	// geometric with p = 1/2: mean 2, variance (1 - p)/p^2 = 2
	CHECK(std::abs(mean - 2.0) <= 3.0 * std::sqrt(2.0 / static_cast<double>(trajectories)));

	// thread count does not change the result
	CHECK(simulate_freeze_steps(e, c, 500, 1) == simulate_freeze_steps(e, c, 500, 3));

	for (std::uint64_t stream = 0; stream < 50; ++stream)
	{
		const HopTrajectory t = simulate_hops(e, c, stream);
		REQUIRE(t.frozen_at.has_value());
		CHECK(*t.frozen_at == *freeze[stream]);
		for (const auto& rec : t.records)
		{
			if (rec.step >= *t.frozen_at)
			{
				CHECK(rec.realisation == 0);
			}
		}
		const EmpiricalStats s = empirical_frequencies(t, e);
		CHECK(s.regime_mismatch);
		CHECK(s.frozen_at == t.frozen_at);
	}
}

TEST_CASE("measurement regime without a localized realisation completes unfrozen")
{
	HopConfig c;
	c.regime = Regime::Measurement;
	c.steps = 100;
	c.localization_threshold = 0.01;
	const RealisationEnsemble e = ensemble({1, 1}, {1.0, 2.0});
	const HopTrajectory t = simulate_hops(e, c);
	CHECK_FALSE(t.frozen_at.has_value());
	CHECK(t.no_localizable_realisation);
	CHECK(t.records.size() == 100);
}

TEST_CASE("hop config validation")
{
	HopConfig c;
	c.steps = 0;
	CHECK_THROWS_AS(c.validate(), Error);
	c.steps = 1;
	c.tau = 0.0;
	CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("kinematic observables")
{
	PhysicalConstants c;
	HopConfig cfg;
	cfg.tau = 1.0;
	EmpiricalStats s;
	s.tau = 1.0;
	s.steps = 10;
	s.drift = 0.0;
	s.jump_length = 0.0;
	const Kinematics k0 = kinematic_observables(s, c, cfg);
	CHECK(k0.energy == doctest::Approx(2.0 * M_PI));
	CHECK_FALSE(k0.de_broglie.has_value());

	// h = 1, m = 1, v = 0.5 -> lambda_B = 2
	c.hbar = 1.0 / (2.0 * M_PI);
	s.drift = 0.5;
	s.jump_length = 0.5;
	const Kinematics k1 = kinematic_observables(s, c, cfg);
	REQUIRE(k1.de_broglie.has_value());
	CHECK(*k1.de_broglie == doctest::Approx(2.0).epsilon(1e-12));
	CHECK(k1.velocity == doctest::Approx(0.5));
}

TEST_CASE("symmetric ensemble has no drift")
{
	const RealisationEnsemble e = RealisationEnsemble::synthetic(build_grid(401, -5.0, 5.0), {1, 1}, {-1.0, 1.0},
	                                                             {0.3, 0.3});
	const std::size_t n = 100000;
	const EmpiricalStats s = empirical_frequencies(simulate_hops(e, chaos(n, 13)), e);
	// each jump is 0 or +-2 with equal odds: Var(delta) = 2, so sigma of the mean is sqrt(2/n)
	CHECK(std::abs(s.drift) <= 3.0 * std::sqrt(2.0 / static_cast<double>(n - 1)));
}

TEST_CASE("energy partition identity")
{
	const EnergyPartition rest = energy_partition_check(1.0, 0.0, 1.0);
	CHECK(rest.rest_term == 1.0);
	CHECK(rest.motion_term == 0.0);
	CHECK(rest.lhs == 1.0);
	CHECK(rest.rhs == 1.0);
	CHECK(rest.residual == 0.0);

	const EnergyPartition p = energy_partition_check(1.0, 0.6, 1.0);
	CHECK(p.rest_term == doctest::Approx(0.8).epsilon(1e-14));
	CHECK(p.motion_term == doctest::Approx(0.45).epsilon(1e-14));
	CHECK(p.lhs == doctest::Approx(1.25).epsilon(1e-14));
	CHECK(p.rhs == doctest::Approx(1.25).epsilon(1e-14));
	CHECK(p.residual < 1e-12);

	for (int k = 0; k < 10; ++k)
	{
		const EnergyPartition q = energy_partition_check(2.5, 0.1 * k * 3.0, 3.0);
		CHECK(std::abs(q.lhs - q.rhs) / q.rhs < 1e-12);
		CHECK(q.frequency_lhs == doctest::Approx(q.lhs).epsilon(1e-12));
	}
	const EnergyPartition near = energy_partition_check(1.0, 0.999, 1.0);
	CHECK(near.rhs > 20.0);
	CHECK(std::abs(near.lhs - near.rhs) / near.rhs < 1e-9);

	CHECK_THROWS_AS(energy_partition_check(1.0, 1.0, 1.0), Error);
	CHECK_THROWS_AS(energy_partition_check(1.0, -0.1, 1.0), Error);
}
