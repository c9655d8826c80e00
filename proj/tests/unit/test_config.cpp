#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "epdyn/config.hpp"
#include "epdyn/errors.hpp"

using namespace epdyn;

namespace
{

std::string config_error(const std::string& text)
{
	try
	{
		(void)parse_config(text, "t.json");
	}
	catch (const Error& e)
	{
		CHECK(e.kind() == ErrorKind::Config);
		return e.what();
	}
	FAIL("expected a config error for " << text);
	return {};
}

} // namespace

TEST_CASE("matrix problem with an explicit partition")
{
	const Config c = parse_config(R"({"problem": {"kind": "matrix", "matrix": [[0, 1], [1, 2]]},
	                                  "partition": {"kind": "indices", "indices": [0]}})");
	CHECK(c.kind == ProblemKind::Matrix);
	REQUIRE(c.problem);
	CHECK(c.problem->dimension() == 2);
	CHECK(c.partition_given);
	CHECK_FALSE(c.hop);
	CHECK_FALSE(c.evolve);
}

TEST_CASE("complex entries and scan options")
{
	const Config c = parse_config(R"({"problem": {"kind": "matrix", "matrix": [[1, [0, 1]], [[0, -1], 2]]},
	                                  "scan": {"e_min": -5, "e_max": 5, "points": 64}})");
	CHECK(c.problem->dimension() == 2);
	REQUIRE(c.scan.e_min);
	CHECK(*c.scan.e_min == -5.0);
	CHECK(config_error(R"({"problem": {"kind": "matrix", "matrix": [[1, [0, 1]], [[0, 1], 2]]}})")
	          .find("/problem/matrix") != std::string::npos);
}

TEST_CASE("errors name the file and the JSON path")
{
	const std::string malformed = config_error(R"({"problem": {"kind": )");
	CHECK(malformed.find("t.json") != std::string::npos);
	CHECK(malformed.find("malformed JSON at byte") != std::string::npos);

	CHECK(config_error(R"({"problem": {"kind": "box", "n": "ten", "length": 1}})").find("t.json: /problem/n: ")
	      != std::string::npos);
	CHECK(config_error(R"({"problem": {"kind": "box", "n": 10, "length": -1}})").find("/problem/length")
	      != std::string::npos);
	CHECK(config_error(R"({"problem": {"kind": "box", "n": 10, "length": 1}, "bogus": 1})").find("/bogus")
	      != std::string::npos);
	CHECK(config_error(R"({"problem": {"kind": "matrix", "matrix": [[1, 0], [0]]}})").find("ragged")
	      != std::string::npos);
	CHECK(config_error(R"({"problem": {"kind": "cube"}})").find("/problem") != std::string::npos);
	CHECK(config_error(R"({"description": "nothing"})").find("problem") != std::string::npos);
	CHECK(config_error("[1, 2]").find("expected an object") != std::string::npos);
	CHECK(config_error(R"({"problem": {"kind": "box", "n": 10, "length": 1},
	                      "evolve": {"dt": 0.1, "steps": 1, "initial": {"kind": "eigenstate", "level": 50}}})")
	          .find("/evolve/initial/level")
	      != std::string::npos);
}

TEST_CASE("hop-only configs need no problem")
{
	const Config c = parse_config(R"({"hop": {"regime": "chaos", "steps": 10, "seed": 1,
	                                  "ensemble": {"counts": [1, 1], "centroids": [-1, 1]}}})");
	CHECK_FALSE(c.problem);
	REQUIRE(c.hop);
	REQUIRE(c.hop->ensemble);
	CHECK(c.hop->ensemble->counts.size() == 2);
	CHECK(c.hop->config.steps == 10);
	CHECK(config_error(R"({"hop": {"regime": "chaos", "steps": 10,
	                      "ensemble": {"counts": [1, 1], "centroids": [-1]}}})")
	          .find("/hop/ensemble/centroids")
	      != std::string::npos);
}

TEST_CASE("universal evolve section")
{
	const Config c = parse_config(R"({"problem": {"kind": "potential1d", "n": 20, "length": 1, "boundary": "periodic"},
	                                  "evolve": {"method": "universal", "dt": 0.01, "steps": 5,
	                                             "initial": {"kind": "uniform", "value": 0.1},
	                                             "spec": {"wave_like": false,
	                                                      "terms": [{"m": 0, "n": 0, "coeff": -1},
	                                                                {"m": 1, "n": 0, "coeff": 1}]}}})");
	REQUIRE(c.evolve);
	CHECK(c.evolve->method == EvolveSection::Method::Universal);
	REQUIRE(c.evolve->spec);
	CHECK(c.evolve->spec->terms.size() == 2);
	CHECK_FALSE(c.evolve->spec->wave_like);
	CHECK(c.evolve->spec->boundary == Boundary::Periodic);
	CHECK(config_error(R"({"problem": {"kind": "box", "n": 20, "length": 1},
	                      "evolve": {"method": "universal", "dt": 0.01, "steps": 5, "initial": {"kind": "zero"},
	                                 "spec": {"terms": [{"m": 0, "n": 7, "coeff": 1}]}}})")
	          .find("/evolve/spec/terms/0/n")
	      != std::string::npos);
}

TEST_CASE("files and environment")
{
	CHECK_THROWS_AS(load_config("/nonexistent/problem.json"), Error);

	::setenv("EPDYN_ORACLE_CAP", "123", 1);
	CHECK(oracle_cap_from_env() == std::optional<std::size_t>(123));
	::setenv("EPDYN_ORACLE_CAP", "lots", 1);
	CHECK_THROWS_AS((void)oracle_cap_from_env(), Error);
	::unsetenv("EPDYN_ORACLE_CAP");
	CHECK_FALSE(oracle_cap_from_env());

	std::size_t loaded = 0;
	for (const auto& entry : std::filesystem::directory_iterator(EPDYN_CONFIG_DIR))
	{
		if (entry.path().extension() == ".json")
		{
			CAPTURE(entry.path().string());
			CHECK_NOTHROW((void)load_config(entry.path().string()));
			++loaded;
		}
	}
	CHECK(loaded >= 10);
}
