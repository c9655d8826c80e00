#include "epdyn/hopping.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace epdyn
{

void HopConfig::validate() const
{
	if (steps < 1)
	{
		throw Error(ErrorKind::Config, "hop config needs steps >= 1");
	}
	if (!(tau > 0.0) || !std::isfinite(tau))
	{
		throw Error(ErrorKind::Config, "hop cycle period tau must be positive");
	}
	if (regime == Regime::Measurement && !(localization_threshold > 0.0))
	{
		throw Error(ErrorKind::Config, "measurement regime needs a positive localization threshold");
	}
}

std::size_t hop_step(const RealisationEnsemble& ensemble, CounterRng& rng)
{
	std::uint64_t draw = rng.uniform_below(ensemble.total());
	for (std::size_t r = 0; r < ensemble.size(); ++r)
	{
		const std::uint64_t n = ensemble[r].count;
		if (draw < n)
		{
			return r;
		}
		draw -= n;
	}
	return ensemble.size() - 1; // unreachable: draw < total
}

namespace
{

std::vector<char> localized_flags(const RealisationEnsemble& ensemble, const HopConfig& config)
{
	std::vector<char> out(ensemble.size(), 0);
	if (config.regime == Regime::Measurement)
	{
		for (std::size_t r = 0; r < ensemble.size(); ++r)
		{
			out[r] = ensemble[r].spread < config.localization_threshold;
		}
	}
	return out;
}

} // namespace

HopTrajectory simulate_hops(const RealisationEnsemble& ensemble, const HopConfig& config,
                            std::uint64_t stream)
{
	config.validate();
	const auto localized = localized_flags(ensemble, config);

	HopTrajectory traj;
	traj.regime = config.regime;
	traj.seed = config.seed;
	traj.stream = stream;
	traj.no_localizable_realisation =
	    config.regime == Regime::Measurement
	    && std::none_of(localized.begin(), localized.end(), [](char c) { return c != 0; });
	traj.records.reserve(config.steps);

	CounterRng rng(config.seed, stream);
	std::size_t current = 0;
	for (std::size_t step = 1; step <= config.steps; ++step)
	{
		if (!traj.frozen_at)
		{
			current = hop_step(ensemble, rng);
			if (localized[current])
			{
				traj.frozen_at = step;
			}
		}
		traj.records.push_back({step, current, ensemble[current].centroid});
	}
	return traj;
}

std::vector<std::optional<std::size_t>> simulate_freeze_steps(const RealisationEnsemble& ensemble,
                                                              const HopConfig& config,
                                                              std::size_t count, unsigned threads)
{
	config.validate();
	if (config.regime != Regime::Measurement)
	{
		throw Error(ErrorKind::Config, "freeze statistics need the measurement regime");
	}
	const auto localized = localized_flags(ensemble, config);
	std::vector<std::optional<std::size_t>> out(count);

	auto run = [&](std::size_t begin, std::size_t end) {
		for (std::size_t t = begin; t < end; ++t)
		{
			CounterRng rng(config.seed, t);
			for (std::size_t step = 1; step <= config.steps; ++step)
			{
				if (localized[hop_step(ensemble, rng)])
				{
					out[t] = step;
					break;
				}
			}
		}
	};

	threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
	if (threads == 1)
	{
		run(0, count);
		return out;
	}
	std::vector<std::thread> pool;
	const std::size_t chunk = (count + threads - 1) / threads;
	for (unsigned w = 0; w < threads; ++w)
	{
		const std::size_t begin = std::min(count, w * chunk);
		const std::size_t end = std::min(count, begin + chunk);
		pool.emplace_back(run, begin, end);
	}
	for (auto& th : pool)
	{
		th.join();
	}
	return out;
}

EmpiricalStats empirical_frequencies(const HopTrajectory& trajectory,
                                     const RealisationEnsemble& ensemble, double tau)
{
	EmpiricalStats stats;
	stats.counts.assign(ensemble.size(), 0);
	stats.steps = trajectory.records.size();
	stats.tau = tau;
	stats.frozen_at = trajectory.frozen_at;
	stats.regime_mismatch = trajectory.regime == Regime::Measurement;

	double jumps = 0.0;
	for (std::size_t k = 0; k < trajectory.records.size(); ++k)
	{
		const auto& rec = trajectory.records[k];
		if (rec.realisation >= ensemble.size())
		{
			throw Error(ErrorKind::Config, "trajectory refers to realisation outside the ensemble");
		}
		++stats.counts[rec.realisation];
		if (k > 0)
		{
			jumps += std::abs(rec.centroid - trajectory.records[k - 1].centroid);
		}
	}
	stats.frequencies.assign(ensemble.size(), 0.0);
	if (stats.steps > 0)
	{
		for (std::size_t r = 0; r < ensemble.size(); ++r)
		{
			stats.frequencies[r] = static_cast<double>(stats.counts[r]) / static_cast<double>(stats.steps);
		}
	}
	if (stats.steps > 1)
	{
		const double n = static_cast<double>(stats.steps - 1);
		// mean of consecutive displacements telescopes to end-to-end / (n tau)
		stats.drift = (trajectory.records.back().centroid - trajectory.records.front().centroid) / (n * tau);
		stats.jump_length = jumps / n;
	}
	return stats;
}

std::vector<double> time_averaged_density(const EmpiricalStats& stats,
                                          const RealisationEnsemble& ensemble)
{
	std::vector<double> rho(ensemble.grid().size(), 0.0);
	for (std::size_t r = 0; r < ensemble.size(); ++r)
	{
		const double w = stats.frequencies.at(r) / static_cast<double>(ensemble[r].count);
		for (std::size_t i = 0; i < rho.size(); ++i)
		{
			rho[i] += w * ensemble[r].density[i];
		}
	}
	return rho;
}

Kinematics kinematic_observables(const EmpiricalStats& stats, const PhysicalConstants& constants,
                                 const HopConfig& config)
{
	config.validate();
	const double h = constants.h();
	Kinematics k;
	k.energy = h / config.tau;
	k.velocity = stats.drift;
	if (stats.jump_length > 0.0)
	{
		k.momentum = h / stats.jump_length;
	}
	if (stats.drift != 0.0)
	{
		k.de_broglie = h / (constants.mass * std::abs(stats.drift));
	}
	if (k.momentum && k.de_broglie)
	{
		k.consistency = *k.momentum * *k.de_broglie / (h * (*k.de_broglie / stats.jump_length));
	}
	return k;
}

EnergyPartition energy_partition_check(double m0, double v, double c, double h)
{
	if (!(c > 0.0) || !(m0 > 0.0) || !(h > 0.0))
	{
		throw Error(ErrorKind::Domain, "energy partition needs m0 > 0 and c > 0");
	}
	if (!(v >= 0.0) || !(v < c))
	{
		throw Error(ErrorKind::Domain, "energy partition needs 0 <= v < c");
	}
	const double beta2 = (v / c) * (v / c);
	const double root = std::sqrt(1.0 - beta2);
	EnergyPartition e;
	e.rest_term = m0 * c * c * root;
	e.motion_term = m0 * v * v / root;
	e.lhs = e.rest_term + e.motion_term;
	e.rhs = m0 * c * c / root;
	e.residual = std::abs(e.lhs - e.rhs);
	// h nu_0 sqrt(1 - v^2/c^2) + (h / lambda_B) v with h nu_0 = m0 c^2 and
	// lambda_B = h / p, p = m0 v / sqrt(1 - v^2/c^2)
	const double nu0 = m0 * c * c / h;
	const double momentum = m0 * v / root;
	e.frequency_lhs = h * nu0 * root + (v > 0.0 ? h / (h / momentum) * v : 0.0);
	return e;
}

} // namespace epdyn
