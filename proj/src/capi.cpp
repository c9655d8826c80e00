#include "epdyn/epdyn.h"

#include <memory>
#include <string>
#include <variant>

#include "epdyn/commands.hpp"
#include "epdyn/config.hpp"
#include "epdyn/verify.hpp"

struct epdyn_config
{
	epdyn::Config config;
};

struct epdyn_result
{
	std::variant<epdyn::SpectrumResult, epdyn::EpRootsResult, epdyn::HopResult, epdyn::EvolveResult,
	             epdyn::VerifyReport>
	    value;
	std::string summary;
};

namespace
{

thread_local std::string last_error;

epdyn_status status_of(epdyn::ErrorKind kind)
{
	using K = epdyn::ErrorKind;
	switch (kind)
	{
	case K::Config:
	case K::Partition:
	case K::OracleScale:
	case K::StepSize:
	case K::Stability:
		return EPDYN_ERR_CONFIG;
	case K::BlowUp:
		return EPDYN_ERR_BLOWUP;
	case K::Io:
		return EPDYN_ERR_IO;
	case K::Normalization:
	case K::PoleProximity:
	case K::NodeSingularity:
	case K::Domain:
		return EPDYN_ERR_NUMERIC;
	}
	return EPDYN_ERR_INTERNAL;
}

template <class Fn>
epdyn_status guarded(Fn&& fn)
{
	last_error.clear();
	try
	{
		return fn();
	}
	catch (const epdyn::Error& e)
	{
		last_error = std::string(epdyn::to_string(e.kind())) + ": " + e.what();
		return status_of(e.kind());
	}
	catch (const std::exception& e)
	{
		last_error = std::string("internal error: ") + e.what();
		return EPDYN_ERR_INTERNAL;
	}
	catch (...)
	{
		last_error = "internal error: unknown exception";
		return EPDYN_ERR_INTERNAL;
	}
}

epdyn_status invalid(const char* what)
{
	last_error = std::string("invalid argument: ") + what;
	return EPDYN_ERR_INVALID_ARGUMENT;
}

} // namespace

extern "C" {

const char* epdyn_version(void)
{
	return "0.1.0";
}

const char* epdyn_last_error(void)
{
	return last_error.c_str();
}

const char* epdyn_status_name(epdyn_status status)
{
	switch (status)
	{
	case EPDYN_OK:
		return "ok";
	case EPDYN_ERR_INVALID_ARGUMENT:
		return "invalid argument";
	case EPDYN_ERR_CONFIG:
		return "config error";
	case EPDYN_WARN_INCOMPLETE:
		return "completeness warning";
	case EPDYN_ERR_CHECK_FAILED:
		return "check failed";
	case EPDYN_ERR_BLOWUP:
		return "blow-up";
	case EPDYN_ERR_IO:
		return "io error";
	case EPDYN_ERR_NUMERIC:
		return "numeric error";
	case EPDYN_ERR_INTERNAL:
		return "internal error";
	}
	return "unknown status";
}

epdyn_status epdyn_config_load(const char* path, epdyn_config** out)
{
	if (!path || !out)
	{
		return invalid("path and out must be non-null");
	}
	*out = nullptr;
	return guarded([&] {
		*out = new epdyn_config{epdyn::load_config(path)};
		return EPDYN_OK;
	});
}

epdyn_status epdyn_config_parse(const char* json_text, const char* origin, epdyn_config** out)
{
	if (!json_text || !out)
	{
		return invalid("json_text and out must be non-null");
	}
	*out = nullptr;
	return guarded([&] {
		*out = new epdyn_config{epdyn::parse_config(json_text, origin ? origin : "<memory>")};
		return EPDYN_OK;
	});
}

void epdyn_config_free(epdyn_config* config)
{
	delete config;
}

epdyn_status epdyn_config_set_seed(epdyn_config* config, uint64_t seed)
{
	if (!config)
	{
		return invalid("config is null");
	}
	if (config->config.hop)
	{
		config->config.hop->config.seed = seed;
	}
	return EPDYN_OK;
}

epdyn_status epdyn_config_set_oracle_cap(epdyn_config* config, size_t cap)
{
	if (!config || cap == 0)
	{
		return invalid("config must be non-null and cap positive");
	}
	config->config.oracle_cap = cap;
	return EPDYN_OK;
}

epdyn_status epdyn_config_set_threads(epdyn_config* config, unsigned threads)
{
	if (!config || threads == 0)
	{
		return invalid("config must be non-null and threads positive");
	}
	config->config.threads = threads;
	return EPDYN_OK;
}

epdyn_status epdyn_config_apply_env(epdyn_config* config)
{
	if (!config)
	{
		return invalid("config is null");
	}
	return guarded([&] {
		if (auto cap = epdyn::oracle_cap_from_env())
		{
			config->config.oracle_cap = *cap;
		}
		return EPDYN_OK;
	});
}

epdyn_status epdyn_run_spectrum(const epdyn_config* config, epdyn_result** out)
{
	if (!config || !out)
	{
		return invalid("config and out must be non-null");
	}
	*out = nullptr;
	return guarded([&] {
		auto r = std::make_unique<epdyn_result>(epdyn_result{epdyn::run_spectrum(config->config), {}});
		const auto& ev = std::get<epdyn::SpectrumResult>(r->value).eigenvalues;
		r->summary = "spectrum: " + std::to_string(ev.size()) + " eigenvalues";
		if (!ev.empty())
		{
			r->summary += " in [" + epdyn::format_double(ev.front()) + ", " + epdyn::format_double(ev.back()) + "]";
		}
		r->summary += "\n";
		*out = r.release();
		return EPDYN_OK;
	});
}

epdyn_status epdyn_run_ep_roots(const epdyn_config* config, epdyn_result** out)
{
	if (!config || !out)
	{
		return invalid("config and out must be non-null");
	}
	*out = nullptr;
	return guarded([&] {
		auto r = std::make_unique<epdyn_result>(epdyn_result{epdyn::run_ep_roots(config->config), {}});
		const auto& ep = std::get<epdyn::EpRootsResult>(r->value);
		r->summary = ep.summary();
		const bool complete = ep.complete();
		*out = r.release();
		if (!complete)
		{
			last_error = "completeness warning: accepted roots + decoupled poles != dimension";
			return EPDYN_WARN_INCOMPLETE;
		}
		return EPDYN_OK;
	});
}

epdyn_status epdyn_run_hop(const epdyn_config* config, epdyn_result** out)
{
	if (!config || !out)
	{
		return invalid("config and out must be non-null");
	}
	*out = nullptr;
	return guarded([&] {
		auto r = std::make_unique<epdyn_result>(epdyn_result{epdyn::run_hop(config->config), {}});
		r->summary = std::get<epdyn::HopResult>(r->value).summary();
		*out = r.release();
		return EPDYN_OK;
	});
}

epdyn_status epdyn_run_evolve(const epdyn_config* config, epdyn_result** out)
{
	if (!config || !out)
	{
		return invalid("config and out must be non-null");
	}
	*out = nullptr;
	return guarded([&] {
		auto r = std::make_unique<epdyn_result>(epdyn_result{epdyn::run_evolve(config->config), {}});
		r->summary = std::get<epdyn::EvolveResult>(r->value).summary();
		*out = r.release();
		return EPDYN_OK;
	});
}

epdyn_status epdyn_verify(const char* suite, const char* tolerance_overrides, unsigned threads, epdyn_result** out)
{
	if (!out)
	{
		return invalid("out must be non-null");
	}
	*out = nullptr;
	return guarded([&] {
		epdyn::VerifyOptions opts;
		opts.suite = suite ? suite : "all";
		opts.threads = threads == 0 ? 1 : threads;
		if (tolerance_overrides && *tolerance_overrides)
		{
			opts.tolerances = epdyn::parse_tolerance_overrides(tolerance_overrides);
		}
		auto r = std::make_unique<epdyn_result>(epdyn_result{epdyn::run_verify(opts), {}});
		const auto& rep = std::get<epdyn::VerifyReport>(r->value);
		r->summary = epdyn::verify_summary(rep);
		const bool passed = rep.passed();
		*out = r.release();
		if (!passed)
		{
			last_error = "verification failed";
			return EPDYN_ERR_CHECK_FAILED;
		}
		return EPDYN_OK;
	});
}

epdyn_result_kind epdyn_result_get_kind(const epdyn_result* result)
{
	return result ? static_cast<epdyn_result_kind>(result->value.index()) : EPDYN_RESULT_SPECTRUM;
}

const char* epdyn_result_summary(const epdyn_result* result)
{
	return result ? result->summary.c_str() : "";
}

epdyn_status epdyn_result_write(const epdyn_result* result, const char* out_dir)
{
	if (!result || !out_dir)
	{
		return invalid("result and out_dir must be non-null");
	}
	return guarded([&] {
		std::visit(
		    [&](const auto& v) {
			    using T = std::decay_t<decltype(v)>;
			    if constexpr (std::is_same_v<T, epdyn::SpectrumResult>)
			    {
				    epdyn::write_spectrum(v, out_dir);
			    }
			    else if constexpr (std::is_same_v<T, epdyn::EpRootsResult>)
			    {
				    epdyn::write_ep_roots(v, out_dir);
			    }
			    else if constexpr (std::is_same_v<T, epdyn::HopResult>)
			    {
				    epdyn::write_hop(v, out_dir);
			    }
			    else if constexpr (std::is_same_v<T, epdyn::EvolveResult>)
			    {
				    epdyn::write_evolve(v, out_dir);
			    }
			    else
			    {
				    epdyn::write_verify(v, out_dir);
			    }
		    },
		    result->value);
		return EPDYN_OK;
	});
}

namespace
{

std::vector<double> series(const epdyn_result& result)
{
	return std::visit(
	    [](const auto& v) -> std::vector<double> {
		    using T = std::decay_t<decltype(v)>;
		    std::vector<double> out;
		    if constexpr (std::is_same_v<T, epdyn::SpectrumResult>)
		    {
			    out = v.eigenvalues;
		    }
		    else if constexpr (std::is_same_v<T, epdyn::EpRootsResult>)
		    {
			    for (const auto& r : v.enumeration.roots)
			    {
				    out.push_back(r.energy);
			    }
		    }
		    else if constexpr (std::is_same_v<T, epdyn::HopResult>)
		    {
			    out = v.stats.frequencies;
		    }
		    else if constexpr (std::is_same_v<T, epdyn::EvolveResult>)
		    {
			    const auto& psi = v.frames.back().psi;
			    for (Eigen::Index i = 0; i < psi.size(); ++i)
			    {
				    out.push_back(std::norm(psi(i)));
			    }
		    }
		    else
		    {
			    for (const auto& c : v.checks)
			    {
				    out.push_back(c.measured);
			    }
		    }
		    return out;
	    },
	    result.value);
}

} // namespace

size_t epdyn_result_count(const epdyn_result* result)
{
	if (!result)
	{
		return 0;
	}
	return series(*result).size();
}

epdyn_status epdyn_result_values(const epdyn_result* result, double* out, size_t capacity, size_t* written)
{
	if (!result || (!out && capacity > 0))
	{
		return invalid("result must be non-null and out must hold capacity values");
	}
	const auto s = series(*result);
	const size_t n = std::min(capacity, s.size());
	std::copy_n(s.begin(), n, out);
	if (written)
	{
		*written = n;
	}
	return EPDYN_OK;
}

epdyn_status epdyn_result_decoupled_count(const epdyn_result* result, size_t* count)
{
	if (!result || !count || !std::holds_alternative<epdyn::EpRootsResult>(result->value))
	{
		return invalid("needs an ep-roots result and non-null count");
	}
	*count = std::get<epdyn::EpRootsResult>(result->value).enumeration.decoupled_poles.size();
	return EPDYN_OK;
}

epdyn_status epdyn_result_complete(const epdyn_result* result, int* complete)
{
	if (!result || !complete || !std::holds_alternative<epdyn::EpRootsResult>(result->value))
	{
		return invalid("needs an ep-roots result and non-null flag");
	}
	*complete = std::get<epdyn::EpRootsResult>(result->value).complete() ? 1 : 0;
	return EPDYN_OK;
}

epdyn_status epdyn_result_frozen_at(const epdyn_result* result, uint64_t* step)
{
	if (!result || !step || !std::holds_alternative<epdyn::HopResult>(result->value))
	{
		return invalid("needs a hop result and non-null step");
	}
	const auto& f = std::get<epdyn::HopResult>(result->value).trajectory.frozen_at;
	*step = f ? static_cast<uint64_t>(*f) : 0;
	return EPDYN_OK;
}

epdyn_status epdyn_result_passed(const epdyn_result* result, int* passed)
{
	if (!result || !passed || !std::holds_alternative<epdyn::VerifyReport>(result->value))
	{
		return invalid("needs a verify result and non-null flag");
	}
	*passed = std::get<epdyn::VerifyReport>(result->value).passed() ? 1 : 0;
	return EPDYN_OK;
}

void epdyn_result_free(epdyn_result* result)
{
	delete result;
}

epdyn_status epdyn_ep_roots_dense(const double* real, const double* imag, size_t n, const size_t* p, size_t p_count,
                                  double* roots, size_t* root_count, double* poles, size_t* pole_count)
{
	if (!real || !p || !roots || !root_count || !poles || !pole_count || n == 0)
	{
		return invalid("null pointer or empty matrix");
	}
	return guarded([&] {
		const auto m = static_cast<Eigen::Index>(n);
		Eigen::MatrixXcd h(m, m);
		for (Eigen::Index i = 0; i < m; ++i)
		{
			for (Eigen::Index j = 0; j < m; ++j)
			{
				const auto k = static_cast<size_t>(i * m + j);
				h(i, j) = {real[k], imag ? imag[k] : 0.0};
			}
		}
		const auto problem = epdyn::ExistenceProblem::from_matrix(epdyn::HermitianOperator(std::move(h)));
		const epdyn::EPOperator op(epdyn::make_partition(
		    problem, epdyn::PartitionSelector::explicit_indices(std::vector<size_t>(p, p + p_count))));
		const auto en = epdyn::enumerate_roots(op);
		*root_count = en.roots.size();
		for (size_t i = 0; i < en.roots.size(); ++i)
		{
			roots[i] = en.roots[i].energy;
		}
		*pole_count = en.decoupled_poles.size();
		std::copy(en.decoupled_poles.begin(), en.decoupled_poles.end(), poles);
		return en.complete() ? EPDYN_OK : EPDYN_WARN_INCOMPLETE;
	});
}

} // extern "C"
