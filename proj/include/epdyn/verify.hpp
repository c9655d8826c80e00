#pragma once

// Acceptance verification suite. Every check is run independently: a thrown
// error fails that check only.

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace epdyn
{

struct CheckResult
{
	std::string name;
	int criterion = 0;
	std::string suite;
	bool passed = false;
	double measured = 0.0;
	double tolerance = 0.0;
	/// "<=" or ">="
	std::string relation = "<=";
	double runtime = 0.0;
	std::string detail;
};

struct VerifyReport
{
	std::string suite;
	std::vector<CheckResult> checks;
	double runtime = 0.0;

	[[nodiscard]] bool passed() const noexcept;
	[[nodiscard]] std::size_t failures() const noexcept;
};

struct VerifyOptions
{
	/// all, ep, hop, action, universal, determinism
	std::string suite = "all";
	/// check name -> tolerance
	std::map<std::string, double> tolerances;
	unsigned threads = 1;
};

std::vector<std::string> verify_suites();

/// Names of all checks with their suite and default tolerance.
struct CheckInfo
{
	std::string name;
	std::string suite;
	int criterion;
	double tolerance;
	std::string relation;
};
std::vector<CheckInfo> verify_checks();

/// {"name": tolerance, ...}; unknown names or non-numbers throw Error(Config).
std::map<std::string, double> parse_tolerance_overrides(const std::string& json_text);

VerifyReport run_verify(const VerifyOptions& options = {});

std::string verify_summary(const VerifyReport& report);
std::string verify_json(const VerifyReport& report);
/// verify_report.json
void write_verify(const VerifyReport& report, const std::string& dir);

} // namespace epdyn
