#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "epdyn/epdyn.h"

namespace
{

const char* kToy = R"({"problem": {"kind": "matrix", "matrix": [[0, 1], [1, 2]]},
                       "partition": {"kind": "indices", "indices": [0]}})";

std::vector<double> values(const epdyn_result* r)
{
	std::vector<double> v(epdyn_result_count(r));
	size_t written = 0;
	REQUIRE(epdyn_result_values(r, v.data(), v.size(), &written) == EPDYN_OK);
	CHECK(written == v.size());
	return v;
}

} // namespace

TEST_CASE("version and status names")
{
	CHECK(std::strlen(epdyn_version()) > 0);
	CHECK(std::string(epdyn_status_name(EPDYN_OK)) == "ok");
	CHECK(std::string(epdyn_status_name(EPDYN_WARN_INCOMPLETE)).size() > 0);
}

TEST_CASE("null arguments are rejected")
{
	CHECK(epdyn_config_parse(nullptr, nullptr, nullptr) == EPDYN_ERR_INVALID_ARGUMENT);
	epdyn_result* r = nullptr;
	CHECK(epdyn_run_spectrum(nullptr, &r) == EPDYN_ERR_INVALID_ARGUMENT);
	CHECK(r == nullptr);
	CHECK(std::strlen(epdyn_last_error()) > 0);
	epdyn_config_free(nullptr);
	epdyn_result_free(nullptr);
}

TEST_CASE("config errors carry the path")
{
	epdyn_config* c = nullptr;
	CHECK(epdyn_config_parse(R"({"problem": {"kind": "box", "n": "x", "length": 1}})", "in.json", &c)
	      == EPDYN_ERR_CONFIG);
	CHECK(c == nullptr);
	CHECK(std::string(epdyn_last_error()).find("in.json: /problem/n") != std::string::npos);
	CHECK(epdyn_config_load("/nonexistent.json", &c) != EPDYN_OK);
}

TEST_CASE("spectrum and ep-roots through handles")
{
	epdyn_config* c = nullptr;
	REQUIRE(epdyn_config_parse(kToy, "toy", &c) == EPDYN_OK);

	epdyn_result* s = nullptr;
	REQUIRE(epdyn_run_spectrum(c, &s) == EPDYN_OK);
	CHECK(epdyn_result_get_kind(s) == EPDYN_RESULT_SPECTRUM);
	const auto ev = values(s);
	REQUIRE(ev.size() == 2);
	CHECK(ev[0] == doctest::Approx(1.0 - std::sqrt(2.0)));
	size_t dc = 0;
	CHECK(epdyn_result_decoupled_count(s, &dc) == EPDYN_ERR_INVALID_ARGUMENT);
	epdyn_result_free(s);

	epdyn_result* e = nullptr;
	REQUIRE(epdyn_run_ep_roots(c, &e) == EPDYN_OK);
	CHECK(epdyn_result_get_kind(e) == EPDYN_RESULT_EP_ROOTS);
	const auto roots = values(e);
	REQUIRE(roots.size() == 2);
	CHECK(roots[1] == doctest::Approx(1.0 + std::sqrt(2.0)));
	int complete = 0;
	CHECK(epdyn_result_complete(e, &complete) == EPDYN_OK);
	CHECK(complete == 1);
	CHECK(std::string(epdyn_result_summary(e)).size() > 0);
	double one = 0.0;
	size_t written = 9;
	CHECK(epdyn_result_values(e, &one, 1, &written) == EPDYN_OK);
	CHECK(written == 1);
	epdyn_result_free(e);

	CHECK(epdyn_config_set_oracle_cap(c, 0) == EPDYN_ERR_INVALID_ARGUMENT);
	CHECK(epdyn_config_set_threads(c, 0) == EPDYN_ERR_INVALID_ARGUMENT);
	CHECK(epdyn_config_set_threads(c, 2) == EPDYN_OK);
	epdyn_config_free(c);
}

TEST_CASE("incomplete enumeration still returns a result")
{
	epdyn_config* c = nullptr;
	REQUIRE(epdyn_config_parse(R"({"problem": {"kind": "matrix", "matrix": [[0, 1], [1, 2]]},
	                               "partition": {"kind": "indices", "indices": [0]},
	                               "scan": {"e_min": 50, "e_max": 60}})",
	                           nullptr, &c)
	        == EPDYN_OK);
	epdyn_result* r = nullptr;
	CHECK(epdyn_run_ep_roots(c, &r) == EPDYN_WARN_INCOMPLETE);
	REQUIRE(r != nullptr);
	int complete = 1;
	CHECK(epdyn_result_complete(r, &complete) == EPDYN_OK);
	CHECK(complete == 0);
	epdyn_result_free(r);
	epdyn_config_free(c);
}

TEST_CASE("hop seed override and freeze step")
{
	const char* text = R"({"hop": {"regime": "measurement", "steps": 1000, "seed": 2, "localization_threshold": 0.5,
	                       "ensemble": {"counts": [1, 3], "centroids": [-2, 2], "spreads": [0.1, 2.0]}}})";
	epdyn_config* c = nullptr;
	REQUIRE(epdyn_config_parse(text, nullptr, &c) == EPDYN_OK);
	epdyn_result* a = nullptr;
	REQUIRE(epdyn_run_hop(c, &a) == EPDYN_OK);
	uint64_t frozen = 0;
	CHECK(epdyn_result_frozen_at(a, &frozen) == EPDYN_OK);
	CHECK(frozen > 0);

	epdyn_result* b = nullptr;
	REQUIRE(epdyn_run_hop(c, &b) == EPDYN_OK);
	uint64_t again = 0;
	CHECK(epdyn_result_frozen_at(b, &again) == EPDYN_OK);
	CHECK(again == frozen);
	CHECK(values(a) == values(b));
	epdyn_result_free(a);
	epdyn_result_free(b);

	CHECK(epdyn_config_set_seed(c, 12345) == EPDYN_OK);
	epdyn_result* d = nullptr;
	REQUIRE(epdyn_run_hop(c, &d) == EPDYN_OK);
	epdyn_result_free(d);
	epdyn_config_free(c);
}

TEST_CASE("evolve blow-up maps to its status")
{
	epdyn_config* c = nullptr;
	REQUIRE(epdyn_config_parse(R"({"problem": {"kind": "potential1d", "n": 5, "length": 1, "boundary": "periodic"},
	                               "evolve": {"method": "universal", "dt": 0.1, "steps": 100,
	                                          "initial": {"kind": "uniform", "value": 1},
	                                          "spec": {"wave_like": false,
	                                                   "terms": [{"m": 2, "n": 0, "coeff": -1}]}}})",
	                           nullptr, &c)
	        == EPDYN_OK);
	epdyn_result* r = nullptr;
	CHECK(epdyn_run_evolve(c, &r) == EPDYN_ERR_BLOWUP);
	CHECK(r == nullptr);
	CHECK(std::string(epdyn_last_error()).find("step") != std::string::npos);
	epdyn_config_free(c);
}

TEST_CASE("verify with overrides")
{
	epdyn_result* r = nullptr;
	CHECK(epdyn_verify("ep", R"({"ep_oracle_energy": 0})", 1, &r) == EPDYN_ERR_CHECK_FAILED);
	REQUIRE(r != nullptr);
	CHECK(epdyn_result_get_kind(r) == EPDYN_RESULT_VERIFY);
	int passed = 1;
	CHECK(epdyn_result_passed(r, &passed) == EPDYN_OK);
	CHECK(passed == 0);
	CHECK(epdyn_result_count(r) > 1);
	epdyn_result_free(r);

	CHECK(epdyn_verify("nope", nullptr, 1, &r) == EPDYN_ERR_CONFIG);
	CHECK(epdyn_verify("ep", R"({"no_such_check": 1})", 1, &r) == EPDYN_ERR_CONFIG);
}

TEST_CASE("dense helper")
{
	const double m[9] = {1, 0.5, 0, 0.5, 2, 0, 0, 0, 3};
	const size_t p[1] = {0};
	double roots[3];
	double poles[3];
	size_t nr = 0;
	size_t np = 0;
	REQUIRE(epdyn_ep_roots_dense(m, nullptr, 3, p, 1, roots, &nr, poles, &np) == EPDYN_OK);
	CHECK(nr == 2);
	CHECK(np == 1);
	CHECK(poles[0] == doctest::Approx(3.0));
	const double disc = std::sqrt(0.25 + 0.25);
	CHECK(roots[0] == doctest::Approx(1.5 - disc));
	CHECK(roots[1] == doctest::Approx(1.5 + disc));

	const double bad[4] = {0, 1, 2, 0};
	const size_t q[1] = {0};
	CHECK(epdyn_ep_roots_dense(bad, nullptr, 2, q, 1, roots, &nr, poles, &np) != EPDYN_OK);
}
