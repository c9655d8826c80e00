// epdyn command-line front end. Talks to the library only through epdyn.h.

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "epdyn/epdyn.h"

namespace
{

struct Options
{
	std::string config;
	std::string out = ".";
	std::uint64_t seed = 0;
	unsigned threads = 0;
	std::string suite = "all";
	std::vector<std::string> tolerances;
	bool quiet = false;
};

int exit_code(epdyn_status s)
{
	switch (s)
	{
	case EPDYN_OK:
	case EPDYN_WARN_INCOMPLETE:
	case EPDYN_ERR_CONFIG:
	case EPDYN_ERR_CHECK_FAILED:
	case EPDYN_ERR_BLOWUP:
		return static_cast<int>(s);
	case EPDYN_ERR_INVALID_ARGUMENT:
	case EPDYN_ERR_IO:
		return 2;
	default:
		return 1;
	}
}

int fail(epdyn_status s)
{
	std::fprintf(stderr, "epdyn: %s\n", epdyn_last_error());
	return exit_code(s);
}

// Result status may be OK or a warning that still carries a result.
int finish(epdyn_status s, epdyn_result* result, const Options& opt, bool write = true)
{
	if (!result)
	{
		return fail(s);
	}
	const std::string warning = s != EPDYN_OK ? epdyn_last_error() : "";
	if (!opt.quiet)
	{
		std::fputs(epdyn_result_summary(result), stdout);
		std::fflush(stdout);
	}
	const epdyn_status w = write ? epdyn_result_write(result, opt.out.c_str()) : EPDYN_OK;
	epdyn_result_free(result);
	if (w != EPDYN_OK)
	{
		return fail(w);
	}
	if (s != EPDYN_OK)
	{
		std::fprintf(stderr, "epdyn: %s\n", warning.c_str());
	}
	return exit_code(s);
}

using Runner = epdyn_status (*)(const epdyn_config*, epdyn_result**);

int run_command(Runner run, const Options& opt, CLI::App& app)
{
	if (opt.config.empty())
	{
		std::fprintf(stderr, "epdyn: --config is required for this command\n");
		return 2;
	}
	epdyn_config* cfg = nullptr;
	epdyn_status s = epdyn_config_load(opt.config.c_str(), &cfg);
	if (s != EPDYN_OK)
	{
		return fail(s);
	}
	s = epdyn_config_apply_env(cfg);
	if (s == EPDYN_OK && app.count("--seed") > 0)
	{
		s = epdyn_config_set_seed(cfg, opt.seed);
	}
	if (s == EPDYN_OK && opt.threads > 0)
	{
		s = epdyn_config_set_threads(cfg, opt.threads);
	}
	if (s != EPDYN_OK)
	{
		epdyn_config_free(cfg);
		return fail(s);
	}
	epdyn_result* result = nullptr;
	s = run(cfg, &result);
	epdyn_config_free(cfg);
	return finish(s, result, opt);
}

int run_verify(const Options& opt, bool write)
{
	nlohmann::json overrides = nlohmann::json::object();
	for (const auto& t : opt.tolerances)
	{
		const auto eq = t.find('=');
		if (eq == std::string::npos || eq == 0)
		{
			std::fprintf(stderr, "epdyn: --tolerance expects name=value, got '%s'\n", t.c_str());
			return 2;
		}
		try
		{
			std::size_t used = 0;
			const double v = std::stod(t.substr(eq + 1), &used);
			if (used != t.size() - eq - 1)
			{
				throw std::invalid_argument("trailing characters");
			}
			overrides[t.substr(0, eq)] = v;
		}
		catch (const std::exception&)
		{
			std::fprintf(stderr, "epdyn: --tolerance value for '%s' is not a number\n", t.substr(0, eq).c_str());
			return 2;
		}
	}
	const std::string text = overrides.dump();
	epdyn_result* result = nullptr;
	const epdyn_status s =
	    epdyn_verify(opt.suite.c_str(), opt.tolerances.empty() ? nullptr : text.c_str(), opt.threads, &result);
	return finish(s, result, opt, write);
}

} // namespace

int main(int argc, char** argv)
{
	CLI::App app{"epdyn: effective-potential dynamics toolkit"};
	app.set_version_flag("--version", std::string(epdyn_version()));
	app.require_subcommand(1);
	app.fallthrough();

	Options opt;
	app.add_option("--config", opt.config, "Problem configuration (JSON)");
	app.add_option("--out", opt.out, "Output directory")->capture_default_str();
	app.add_option("--seed", opt.seed, "Override the hop seed");
	app.add_option("--threads", opt.threads, "Worker threads")->check(CLI::PositiveNumber);
	app.add_flag("-q,--quiet", opt.quiet, "Do not print the summary");

	auto* spectrum = app.add_subcommand("spectrum", "Full spectrum of the existence operator");
	auto* ep = app.add_subcommand("ep-roots", "Effective-potential roots and realisations");
	auto* hop = app.add_subcommand("hop", "Realisation hopping simulation");
	auto* evolve = app.add_subcommand("evolve", "Time evolution (linear propagator or universal PDE)");
	auto* verify = app.add_subcommand("verify", "Run the acceptance verification suite");
	verify->add_option("--suite", opt.suite, "all, ep, hop, action, universal or determinism")
	    ->capture_default_str();
	verify->add_option("--tolerance", opt.tolerances, "Override a check tolerance: name=value")->expected(1)->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);

	try
	{
		app.parse(argc, argv);
	}
	catch (const CLI::ParseError& e)
	{
		const int rc = app.exit(e);
		return rc == 0 ? 0 : 2;
	}

	if (spectrum->parsed())
	{
		return run_command(epdyn_run_spectrum, opt, app);
	}
	if (ep->parsed())
	{
		return run_command(epdyn_run_ep_roots, opt, app);
	}
	if (hop->parsed())
	{
		return run_command(epdyn_run_hop, opt, app);
	}
	if (evolve->parsed())
	{
		return run_command(epdyn_run_evolve, opt, app);
	}
	(void)verify;
	// verify_report.json is only written when an output directory is asked for
	return run_verify(opt, app.count("--out") > 0);
}
