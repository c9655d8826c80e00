#pragma once

// Ready-made problems: seeded random coupled existence problems, the hard-wall
// box and the harmonic well on a 1D grid, and Gaussian wave packets.

#include <cstddef>
#include <cstdint>

#include "epdyn/existence.hpp"

namespace epdyn
{

struct RandomProblemOptions
{
	std::size_t n_min = 2;
	std::size_t n_max = 8;
	/// Entries of h_e, h_g and V are uniform in [-scale, scale].
	double scale = 1.0;
};

/// Random complex Hermitian h_e, h_g and real coupling V with
/// n_q, n_xi uniform in [n_min, n_max]; problem `index` of stream `seed`.
ExistenceProblem random_coupled_problem(std::uint64_t seed, std::uint64_t index,
                                        const RandomProblemOptions& options = {});

/// Hard-wall box (0, length) with n interior points and V = 0.
Hamiltonian1D box_hamiltonian(std::size_t n, double length, const PhysicalConstants& constants);

/// Continuum box level k = 1, 2, ...: (k pi hbar / length)^2 / (2m).
double box_level(std::size_t k, double length, const PhysicalConstants& constants);

/// V = m omega^2 (x - length/2)^2 / 2 inside the hard-wall box (0, length).
Hamiltonian1D harmonic_hamiltonian(std::size_t n, double length, double omega,
                                   const PhysicalConstants& constants);

/// exp(-(x - x0)^2 / (4 sigma^2) + i k0 x), normalized on the grid.
WaveField gaussian_packet(const Grid& grid, double x0, double sigma, double k0);

} // namespace epdyn
