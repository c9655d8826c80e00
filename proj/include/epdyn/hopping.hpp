#pragma once

// Stochastic realisation hopping: the process reading of the probabilistic
// sum over realisations, in the Hamiltonian-chaos regime (memoryless draws
// forever) and the measurement regime (draws until a localized realisation
// is hit, then frozen).

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "epdyn/effective_potential.hpp"
#include "epdyn/philox.hpp"

namespace epdyn
{

enum class Regime
{
	Chaos,
	Measurement,
};

struct HopConfig
{
	Regime regime = Regime::Chaos;
	std::size_t steps = 1;
	std::uint64_t seed = 0;
	/// Time per hop cycle.
	double tau = 1.0;
	/// Measurement regime: realisations with RMS spread below this freeze the system.
	double localization_threshold = 0.0;

	void validate() const;
};

struct HopRecord
{
	std::size_t step = 0; // 1-based cycle index
	std::size_t realisation = 0;
	double centroid = 0.0;
};

struct HopTrajectory
{
	std::vector<HopRecord> records;
	Regime regime = Regime::Chaos;
	std::uint64_t seed = 0;
	std::uint64_t stream = 0;
	std::optional<std::size_t> frozen_at;
	/// Measurement regime only: no realisation is localized, so the run can never freeze.
	bool no_localizable_realisation = false;
};

/// Draws r with probability alpha_r = N_r / N, exactly, from integer weights.
std::size_t hop_step(const RealisationEnsemble& ensemble, CounterRng& rng);

/// One trajectory on stream `stream` of the configured seed.
HopTrajectory simulate_hops(const RealisationEnsemble& ensemble, const HopConfig& config,
                            std::uint64_t stream = 0);

/// Freeze steps of `count` independent measurement-regime trajectories
/// (streams 0..count-1). Trajectories are split across `threads` workers; the
/// result does not depend on the thread count.
std::vector<std::optional<std::size_t>> simulate_freeze_steps(const RealisationEnsemble& ensemble,
                                                              const HopConfig& config,
                                                              std::size_t count,
                                                              unsigned threads = 1);

struct EmpiricalStats
{
	std::vector<std::uint64_t> counts;
	std::vector<double> frequencies;
	std::size_t steps = 0;
	/// <delta centroid> / tau
	double drift = 0.0;
	/// <|delta centroid|>
	double jump_length = 0.0;
	double tau = 1.0;
	std::optional<std::size_t> frozen_at;
	/// Set when the trajectory came from the measurement regime.
	bool regime_mismatch = false;
};

EmpiricalStats empirical_frequencies(const HopTrajectory& trajectory,
                                     const RealisationEnsemble& ensemble, double tau = 1.0);

/// Time-averaged density along a trajectory: sum_r freq_r * rho_r / N_r.
std::vector<double> time_averaged_density(const EmpiricalStats& stats,
                                          const RealisationEnsemble& ensemble);

struct Kinematics
{
	double energy = 0.0;                  // h / tau
	std::optional<double> momentum;       // h / lambda
	double velocity = 0.0;                // drift
	std::optional<double> de_broglie;     // h / (m v)
	std::optional<double> consistency;    // p * lambda_B / (h * lambda_B / lambda)
};

Kinematics kinematic_observables(const EmpiricalStats& stats, const PhysicalConstants& constants,
                                 const HopConfig& config);

struct EnergyPartition
{
	double rest_term = 0.0;   // m0 c^2 sqrt(1 - v^2/c^2)
	double motion_term = 0.0; // m0 v^2 / sqrt(1 - v^2/c^2)
	double lhs = 0.0;
	double rhs = 0.0;         // m0 c^2 / sqrt(1 - v^2/c^2)
	double residual = 0.0;
	/// Same left-hand side evaluated in its quantum-frequency form.
	double frequency_lhs = 0.0;
};

/// Throws Error(Domain) unless 0 <= v < c.
EnergyPartition energy_partition_check(double m0, double v, double c, double h = 2.0 * kPi);

} // namespace epdyn
