#pragma once

// JSON problem configuration. Errors are Error(Config) whose message starts
// with "<file>: <json pointer>: ".

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "epdyn/action.hpp"
#include "epdyn/effective_potential.hpp"
#include "epdyn/existence.hpp"
#include "epdyn/hopping.hpp"
#include "epdyn/universal.hpp"

namespace epdyn
{

enum class ProblemKind
{
	Matrix,
	Existence,
	Random,
	Box,
	Harmonic,
	Potential1D,
};

struct SyntheticEnsembleSpec
{
	std::vector<std::uint64_t> counts;
	std::vector<double> centroids;
	std::vector<double> spreads;
	std::optional<Grid> grid;
};

struct HopSection
{
	HopConfig config;
	std::optional<SyntheticEnsembleSpec> ensemble;
};

struct InitialState
{
	enum class Kind
	{
		Gaussian,
		Eigenstate,
		Zero,
		Uniform,
	};
	Kind kind = Kind::Gaussian;
	double x0 = 0.0;
	double sigma = 1.0;
	double k0 = 0.0;
	std::size_t level = 0;
	cplx value{};
	bool normalize = true;
};

struct EvolveSection
{
	enum class Method
	{
		Linear,
		Universal,
	};
	Method method = Method::Linear;
	double dt = 1e-3;
	std::size_t steps = 100;
	std::size_t frame_every = 1;
	InitialState initial;
	std::optional<HamiltonianSpec> spec;
	bool cross_check = false;
	double accuracy_budget = 1e4;
	double stability_budget = 2.5;
};

struct Config
{
	std::string origin = "<memory>";
	PhysicalConstants constants;
	ProblemKind kind = ProblemKind::Matrix;
	/// Present for every problem kind.
	std::optional<ExistenceProblem> problem;
	/// Present for the 1D kinds (box, harmonic, potential1d).
	std::optional<Hamiltonian1D> line;
	PartitionSelector partition;
	bool partition_given = false;
	ScanOptions scan;
	EPOptions ep;
	double cluster_width = 0.0;
	std::size_t oracle_cap = kDefaultOracleCap;
	unsigned threads = 1;
	std::optional<HopSection> hop;
	std::optional<EvolveSection> evolve;
};

Config parse_config(const std::string& text, const std::string& origin = "<memory>");
Config load_config(const std::string& path);

/// EPDYN_ORACLE_CAP, if set to a positive integer.
std::optional<std::size_t> oracle_cap_from_env();

} // namespace epdyn
