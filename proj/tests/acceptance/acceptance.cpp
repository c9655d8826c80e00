// One PASS/FAIL line per acceptance criterion, then the individual checks.
// Exit status is 0 only when every criterion passes.

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <map>
#include <string>

#include "epdyn/verify.hpp"

namespace
{

const std::map<int, const char*> titles = {
    {0, "full suite runtime"},
    {1, "EP roots equal the dense spectrum"},
    {2, "root completeness"},
    {3, "probability normalization"},
    {4, "hop-frequency convergence"},
    {5, "measurement regime freeze law"},
    {6, "energy-partition identity"},
    {7, "dispersion convergence"},
    {8, "conservation identity"},
    {9, "propagator unitarity and energy"},
    {10, "universal PDE reduction"},
    {11, "Hamilton-Jacobi residuals"},
    {12, "determinism"},
};

} // namespace

int main(int argc, char** argv)
{
	epdyn::VerifyOptions opts;
	for (int i = 1; i < argc; ++i)
	{
		if (std::strcmp(argv[i], "--threads") == 0 && i + 1 < argc)
		{
			opts.threads = static_cast<unsigned>(std::strtoul(argv[++i], nullptr, 10));
		}
		else if (std::strcmp(argv[i], "--suite") == 0 && i + 1 < argc)
		{
			opts.suite = argv[++i];
		}
	}

	const auto report = epdyn::run_verify(opts);

	std::map<int, std::pair<bool, int>> by_criterion;
	for (const auto& c : report.checks)
	{
		auto& [ok, n] = by_criterion.try_emplace(c.criterion, true, 0).first->second;
		ok = ok && c.passed;
		++n;
	}
	for (const auto& [criterion, state] : by_criterion)
	{
		const auto t = titles.find(criterion);
		std::printf("%s criterion %2d: %s (%d checks)\n", state.first ? "PASS" : "FAIL", criterion,
		            t == titles.end() ? "?" : t->second, state.second);
	}
	std::printf("\n%s", epdyn::verify_summary(report).c_str());
	return report.passed() ? 0 : 1;
}
