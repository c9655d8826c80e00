#pragma once

// Command pipelines behind the CLI: each run_* returns an in-memory result and
// each write_* emits its files deterministically (%.17g, fixed ordering).

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "epdyn/config.hpp"

namespace epdyn
{

/// %.17g; non-finite values print as nan / inf / -inf.
std::string format_double(double v);

/// Minimal ordered JSON emitter with %.17g numbers (null for non-finite).
class JsonWriter
{
public:
	JsonWriter& begin_object();
	JsonWriter& end_object();
	JsonWriter& begin_array(const std::string& key = {});
	JsonWriter& end_array();
	JsonWriter& key(const std::string& k);
	JsonWriter& value(double v);
	JsonWriter& value(std::optional<double> v);
	JsonWriter& value(std::uint64_t v);
	JsonWriter& value(bool v);
	JsonWriter& value(const std::string& v);
	JsonWriter& value(const char* v) { return value(std::string(v)); }
	JsonWriter& null();
	template <class T>
	JsonWriter& field(const std::string& k, T v)
	{
		key(k);
		return value(v);
	}
	[[nodiscard]] std::string str() const { return out_ + "\n"; }

private:
	void separator();
	std::string out_;
	std::vector<bool> first_;
	bool after_key_ = false;
	int depth_ = 0;
};

std::string json_escape(const std::string& s);

/// Writes `content` to dir/name, creating dir. Throws Error(Io).
void write_file(const std::string& dir, const std::string& name, const std::string& content);

struct SpectrumResult
{
	std::vector<double> eigenvalues;
};

SpectrumResult run_spectrum(const Config& config);
void write_spectrum(const SpectrumResult& result, const std::string& dir);

/// Partition used when the config gives none: the ground channel when there
/// are several xi channels, otherwise the first half of the indices.
PartitionSelector default_partition(const ExistenceProblem& problem);

struct OracleCheck
{
	std::size_t dimension = 0;
	/// largest |E_ep - E_oracle| over the merged multiset (roots + decoupled poles)
	double max_abs_diff = 0.0;
	double spectral_norm = 0.0;
	bool counts_match = false;
};

struct EpRootsResult
{
	RootEnumeration enumeration;
	/// Empty when no root was found in the scanned range.
	std::optional<RealisationEnsemble> ensemble;
	std::optional<OracleCheck> oracle;
	std::string oracle_note;

	[[nodiscard]] bool complete() const noexcept { return enumeration.complete(); }
	[[nodiscard]] std::string summary() const;
};

EpRootsResult run_ep_roots(const Config& config);
/// roots.csv and decoupled_poles.csv
void write_ep_roots(const EpRootsResult& result, const std::string& dir);

struct HopResult
{
	RealisationEnsemble ensemble;
	HopTrajectory trajectory;
	EmpiricalStats stats;
	Kinematics kinematics;
	/// 3 sqrt(alpha_r (1 - alpha_r) / steps)
	std::vector<double> bound3;

	[[nodiscard]] std::string summary() const;
};

/// Ensemble from the config's synthetic spec, or from clustering EP roots.
RealisationEnsemble hop_ensemble(const Config& config);
HopResult run_hop(const Config& config);
/// trajectory.csv and hop_stats.json
void write_hop(const HopResult& result, const std::string& dir);

struct Frame
{
	double time = 0.0;
	Eigen::VectorXcd psi;
};

struct EvolveResult
{
	std::string method;
	Grid grid;
	double dt = 0.0;
	std::size_t steps = 0;
	std::vector<Frame> frames{};
	double norm_initial = 0.0;
	double norm_final = 0.0;
	std::optional<double> energy_initial{};
	std::optional<double> energy_final{};
	std::optional<double> cross_check_max_deviation{};
	double variance_initial = 0.0;
	double variance_final = 0.0;
	std::optional<double> heat_diffusivity{};

	[[nodiscard]] std::string summary() const;
};

EvolveResult run_evolve(const Config& config);
/// frames.csv and evolve_report.json
void write_evolve(const EvolveResult& result, const std::string& dir);

/// Initial state of an evolve section on the problem grid.
Eigen::VectorXcd initial_state(const Config& config);

/// Weighted variance of x; weights |psi|^2 (wave_like) or Re psi.
double spatial_variance(const Grid& grid, const Eigen::VectorXcd& psi, bool wave_like);

} // namespace epdyn
