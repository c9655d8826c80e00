#include "epdyn/config.hpp"

#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "epdyn/problems.hpp"

namespace epdyn
{

namespace
{

using json = nlohmann::json;

class Node
{
public:
	Node(const json& value, std::string path, const std::string& origin)
		: value_(value), path_(std::move(path)), origin_(origin)
	{
	}

	[[noreturn]] void fail(const std::string& message) const
	{
		throw Error(ErrorKind::Config, origin_ + ": " + (path_.empty() ? "/" : path_) + ": " + message);
	}

	[[nodiscard]] const json& raw() const noexcept { return value_; }
	[[nodiscard]] const std::string& path() const noexcept { return path_; }

	void expect_object() const
	{
		if (!value_.is_object())
		{
			fail("expected an object");
		}
	}

	void allow(std::initializer_list<const char*> keys) const
	{
		expect_object();
		for (auto it = value_.begin(); it != value_.end(); ++it)
		{
			bool known = false;
			for (const char* k : keys)
			{
				known = known || it.key() == k;
			}
			if (!known)
			{
				Node(*it, child_path(it.key()), origin_).fail("unknown key");
			}
		}
	}

	[[nodiscard]] bool has(const char* key) const { return value_.is_object() && value_.contains(key); }

	[[nodiscard]] Node at(const char* key) const
	{
		expect_object();
		if (!value_.contains(key))
		{
			fail(std::string("missing required key '") + key + "'");
		}
		return Node(value_.at(key), child_path(key), origin_);
	}

	[[nodiscard]] std::optional<Node> find(const char* key) const
	{
		expect_object();
		if (!value_.contains(key))
		{
			return std::nullopt;
		}
		return Node(value_.at(key), child_path(key), origin_);
	}

	[[nodiscard]] Node index(std::size_t i) const
	{
		return Node(value_.at(i), path_ + "/" + std::to_string(i), origin_);
	}

	[[nodiscard]] std::size_t array_size() const
	{
		if (!value_.is_array())
		{
			fail("expected an array");
		}
		return value_.size();
	}

	[[nodiscard]] double number() const
	{
		if (!value_.is_number())
		{
			fail("expected a number");
		}
		const double v = value_.get<double>();
		if (!std::isfinite(v))
		{
			fail("expected a finite number");
		}
		return v;
	}

	[[nodiscard]] double positive() const
	{
		const double v = number();
		if (!(v > 0.0))
		{
			fail("expected a positive number");
		}
		return v;
	}

	[[nodiscard]] double non_negative() const
	{
		const double v = number();
		if (!(v >= 0.0))
		{
			fail("expected a non-negative number");
		}
		return v;
	}

	[[nodiscard]] std::uint64_t u64() const
	{
		if (!value_.is_number_unsigned() && !(value_.is_number_integer() && value_.get<std::int64_t>() >= 0))
		{
			fail("expected a non-negative integer");
		}
		return value_.get<std::uint64_t>();
	}

	[[nodiscard]] std::size_t count(std::size_t min = 0) const
	{
		const std::uint64_t v = u64();
		if (v < min)
		{
			fail("expected an integer >= " + std::to_string(min));
		}
		return static_cast<std::size_t>(v);
	}

	[[nodiscard]] bool boolean() const
	{
		if (!value_.is_boolean())
		{
			fail("expected true or false");
		}
		return value_.get<bool>();
	}

	[[nodiscard]] std::string str() const
	{
		if (!value_.is_string())
		{
			fail("expected a string");
		}
		return value_.get<std::string>();
	}

	/// number, [re, im] or {"re": .., "im": ..}
	[[nodiscard]] cplx complex() const
	{
		if (value_.is_number())
		{
			return number();
		}
		if (value_.is_array())
		{
			if (value_.size() != 2)
			{
				fail("complex value must be [re, im]");
			}
			return {index(0).number(), index(1).number()};
		}
		if (value_.is_object())
		{
			allow({"re", "im"});
			return {find("re") ? at("re").number() : 0.0, find("im") ? at("im").number() : 0.0};
		}
		fail("expected a number or a complex value");
	}

	[[nodiscard]] std::vector<double> numbers() const
	{
		std::vector<double> out(array_size());
		for (std::size_t i = 0; i < out.size(); ++i)
		{
			out[i] = index(i).number();
		}
		return out;
	}

	[[nodiscard]] std::vector<cplx> complexes() const
	{
		std::vector<cplx> out(array_size());
		for (std::size_t i = 0; i < out.size(); ++i)
		{
			out[i] = index(i).complex();
		}
		return out;
	}

private:
	[[nodiscard]] std::string child_path(const std::string& key) const
	{
		std::string escaped;
		for (char c : key)
		{
			if (c == '~')
			{
				escaped += "~0";
			}
			else if (c == '/')
			{
				escaped += "~1";
			}
			else
			{
				escaped += c;
			}
		}
		return path_ + "/" + escaped;
	}

	const json& value_;
	std::string path_;
	const std::string& origin_;
};

Boundary parse_boundary(const Node& n)
{
	const std::string s = n.str();
	if (s == "dirichlet")
	{
		return Boundary::Dirichlet;
	}
	if (s == "periodic")
	{
		return Boundary::Periodic;
	}
	n.fail("boundary must be \"dirichlet\" or \"periodic\"");
}

Eigen::MatrixXcd parse_matrix(const Node& n)
{
	const std::size_t rows = n.array_size();
	if (rows == 0)
	{
		n.fail("matrix is empty");
	}
	Eigen::MatrixXcd m;
	for (std::size_t i = 0; i < rows; ++i)
	{
		const Node row = n.index(i);
		const std::size_t cols = row.array_size();
		if (i == 0)
		{
			m.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
		}
		if (cols != static_cast<std::size_t>(m.cols()))
		{
			row.fail("ragged matrix row");
		}
		for (std::size_t j = 0; j < cols; ++j)
		{
			m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row.index(j).complex();
		}
	}
	return m;
}

HermitianOperator parse_hermitian(const Node& n)
{
	Eigen::MatrixXcd m = parse_matrix(n);
	if (m.rows() != m.cols())
	{
		n.fail("matrix must be square");
	}
	try
	{
		return HermitianOperator(std::move(m));
	}
	catch (const Error& e)
	{
		n.fail(e.what());
	}
}

Grid parse_grid_spec(const Node& n)
{
	n.allow({"n", "min", "max"});
	const std::size_t count = n.at("n").count(2);
	const double lo = n.at("min").number();
	const double hi = n.at("max").number();
	if (!(hi > lo))
	{
		n.fail("grid needs max > min");
	}
	return build_grid(count, lo, hi);
}

Grid line_grid(std::size_t n, double length, Boundary b)
{
	return b == Boundary::Periodic ? periodic_grid(n, length) : box_grid(n, length);
}

Coefficient::ProfileParams parse_profile_params(const Node& n)
{
	Coefficient::ProfileParams p;
	if (auto v = n.find("amplitude"))
	{
		p.amplitude = v->number();
	}
	if (auto v = n.find("center"))
	{
		p.center = v->number();
	}
	if (auto v = n.find("width"))
	{
		p.width = v->positive();
	}
	if (auto v = n.find("lo"))
	{
		p.lo = v->number();
	}
	if (auto v = n.find("hi"))
	{
		p.hi = v->number();
	}
	return p;
}

std::vector<double> parse_potential(const Node& n, const Grid& grid)
{
	if (n.raw().is_array())
	{
		std::vector<double> v = n.numbers();
		if (v.size() != grid.size())
		{
			n.fail("potential has " + std::to_string(v.size()) + " values for " + std::to_string(grid.size())
			       + " grid points");
		}
		return v;
	}
	n.allow({"profile", "amplitude", "center", "width", "lo", "hi"});
	const Node pn = n.at("profile");
	Profile profile{};
	try
	{
		profile = profile_from_string(pn.str());
	}
	catch (const Error& e)
	{
		pn.fail(e.what());
	}
	const Coefficient c = Coefficient::profile(profile, parse_profile_params(n));
	try
	{
		c.validate(grid.size());
	}
	catch (const Error& e)
	{
		n.fail(e.what());
	}
	std::vector<double> v(grid.size());
	for (std::size_t i = 0; i < v.size(); ++i)
	{
		v[i] = c.at(i, grid.point(i), 0.0).real();
	}
	return v;
}

/// {"matrix": [[..]]} or {"kinetic": {"n", "length", "boundary"}}
std::pair<HermitianOperator, std::optional<Grid>> parse_block(const Node& n, const PhysicalConstants& constants)
{
	n.allow({"matrix", "kinetic"});
	if (n.has("matrix") == n.has("kinetic"))
	{
		n.fail("give exactly one of 'matrix' or 'kinetic'");
	}
	if (auto m = n.find("matrix"))
	{
		return {parse_hermitian(*m), std::nullopt};
	}
	const Node k = n.at("kinetic");
	k.allow({"n", "length", "boundary"});
	const Boundary b = k.find("boundary") ? parse_boundary(k.at("boundary")) : Boundary::Dirichlet;
	const Grid g = line_grid(k.at("n").count(2), k.at("length").positive(), b);
	return {build_kinetic(g, constants, b), g};
}

Eigen::MatrixXd parse_coupling(const Node& n, std::size_t nq, std::size_t nxi, const std::optional<Grid>& gq,
                               const std::optional<Grid>& gxi)
{
	const auto rows = static_cast<Eigen::Index>(nq);
	const auto cols = static_cast<Eigen::Index>(nxi);
	if (n.raw().is_array())
	{
		const Eigen::MatrixXcd m = parse_matrix(n);
		if (m.rows() != rows || m.cols() != cols)
		{
			n.fail("coupling must be " + std::to_string(nq) + " x " + std::to_string(nxi));
		}
		if (m.imag().cwiseAbs().maxCoeff() != 0.0)
		{
			n.fail("coupling V(q, xi) must be real");
		}
		return m.real();
	}
	// separable-distance profile: V = strength * f(q - xi)
	n.allow({"profile", "strength", "width"});
	if (!gq || !gxi)
	{
		n.fail("a coupling profile needs grids on both components (use 'kinetic' blocks)");
	}
	const std::string profile = n.at("profile").str();
	const double strength = n.at("strength").number();
	const double width = n.find("width") ? n.at("width").positive() : 1.0;
	Eigen::MatrixXd v(rows, cols);
	for (Eigen::Index i = 0; i < rows; ++i)
	{
		for (Eigen::Index j = 0; j < cols; ++j)
		{
			const double d = gq->point(static_cast<std::size_t>(i)) - gxi->point(static_cast<std::size_t>(j));
			if (profile == "gaussian")
			{
				v(i, j) = strength * std::exp(-d * d / (2.0 * width * width));
			}
			else if (profile == "harmonic")
			{
				v(i, j) = 0.5 * strength * d * d;
			}
			else
			{
				n.at("profile").fail("coupling profile must be \"gaussian\" or \"harmonic\"");
			}
		}
	}
	return v;
}

void parse_problem(const Node& n, Config& cfg)
{
	n.expect_object();
	const Node kind = n.at("kind");
	const std::string k = kind.str();
	const auto& c = cfg.constants;
	if (k == "matrix")
	{
		n.allow({"kind", "matrix"});
		cfg.kind = ProblemKind::Matrix;
		cfg.problem = ExistenceProblem::from_matrix(parse_hermitian(n.at("matrix")), c);
		return;
	}
	if (k == "existence")
	{
		n.allow({"kind", "h_e", "h_g", "coupling"});
		cfg.kind = ProblemKind::Existence;
		auto [he, gq] = parse_block(n.at("h_e"), c);
		auto [hg, gxi] = parse_block(n.at("h_g"), c);
		Eigen::MatrixXd v = n.find("coupling")
		                        ? parse_coupling(n.at("coupling"), he.dimension(), hg.dimension(), gq, gxi)
		                        : Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(he.dimension()),
		                                                static_cast<Eigen::Index>(hg.dimension()));
		try
		{
			cfg.problem = ExistenceProblem::assemble(std::move(he), std::move(hg), std::move(v), c, gq, gxi);
		}
		catch (const Error& e)
		{
			n.fail(e.what());
		}
		return;
	}
	if (k == "random")
	{
		n.allow({"kind", "seed", "index", "n_min", "n_max", "scale"});
		cfg.kind = ProblemKind::Random;
		RandomProblemOptions o;
		if (auto v = n.find("n_min"))
		{
			o.n_min = v->count(1);
		}
		if (auto v = n.find("n_max"))
		{
			o.n_max = v->count(o.n_min);
		}
		if (o.n_max < o.n_min)
		{
			n.fail("n_max must be >= n_min");
		}
		if (auto v = n.find("scale"))
		{
			o.scale = v->positive();
		}
		const std::uint64_t seed = n.find("seed") ? n.at("seed").u64() : 0;
		const std::uint64_t index = n.find("index") ? n.at("index").u64() : 0;
		cfg.problem = random_coupled_problem(seed, index, o);
		return;
	}

	// one-dimensional kinds
	std::optional<Hamiltonian1D> line;
	if (k == "box")
	{
		n.allow({"kind", "n", "length"});
		cfg.kind = ProblemKind::Box;
		line = box_hamiltonian(n.at("n").count(2), n.at("length").positive(), c);
	}
	else if (k == "harmonic")
	{
		n.allow({"kind", "n", "length", "omega"});
		cfg.kind = ProblemKind::Harmonic;
		line = harmonic_hamiltonian(n.at("n").count(2), n.at("length").positive(), n.at("omega").positive(), c);
	}
	else if (k == "potential1d")
	{
		n.allow({"kind", "n", "length", "boundary", "potential"});
		cfg.kind = ProblemKind::Potential1D;
		const Boundary b = n.find("boundary") ? parse_boundary(n.at("boundary")) : Boundary::Dirichlet;
		const Grid g = line_grid(n.at("n").count(2), n.at("length").positive(), b);
		std::vector<double> v = n.find("potential") ? parse_potential(n.at("potential"), g)
		                                            : std::vector<double>(g.size(), 0.0);
		line = Hamiltonian1D{g, std::move(v), c, b};
	}
	else
	{
		kind.fail("unknown problem kind '" + k + "' (matrix, existence, random, box, harmonic, potential1d)");
	}
	const auto nq = static_cast<Eigen::Index>(line->grid.size());
	Eigen::MatrixXd v(nq, 1);
	for (Eigen::Index i = 0; i < nq; ++i)
	{
		v(i, 0) = line->potential[static_cast<std::size_t>(i)];
	}
	cfg.problem = ExistenceProblem::assemble(build_kinetic(line->grid, c, line->boundary),
	                                         HermitianOperator(Eigen::MatrixXcd::Zero(1, 1)), std::move(v), c,
	                                         line->grid);
	cfg.line = std::move(line);
}

void parse_partition(const Node& n, Config& cfg)
{
	n.expect_object();
	const std::string k = n.at("kind").str();
	if (k == "channel")
	{
		n.allow({"kind", "channel"});
		cfg.partition = PartitionSelector::ground_channel();
		if (auto v = n.find("channel"))
		{
			cfg.partition.channel = v->count();
		}
	}
	else if (k == "xi_index")
	{
		n.allow({"kind", "index"});
		cfg.partition = PartitionSelector::xi_index(n.at("index").count());
	}
	else if (k == "indices")
	{
		n.allow({"kind", "indices"});
		const Node arr = n.at("indices");
		std::vector<std::size_t> idx(arr.array_size());
		for (std::size_t i = 0; i < idx.size(); ++i)
		{
			idx[i] = arr.index(i).count();
		}
		cfg.partition = PartitionSelector::explicit_indices(std::move(idx));
	}
	else
	{
		n.at("kind").fail("partition kind must be \"channel\", \"xi_index\" or \"indices\"");
	}
	cfg.partition_given = true;
}

void parse_scan(const Node& n, Config& cfg)
{
	n.allow({"e_min", "e_max", "points", "tol", "pole_guard", "decoupling_threshold"});
	if (auto v = n.find("e_min"))
	{
		cfg.scan.e_min = v->number();
	}
	if (auto v = n.find("e_max"))
	{
		cfg.scan.e_max = v->number();
	}
	if (cfg.scan.e_min && cfg.scan.e_max && !(*cfg.scan.e_max > *cfg.scan.e_min))
	{
		n.fail("scan needs e_max > e_min");
	}
	if (auto v = n.find("points"))
	{
		cfg.scan.scan_points = v->count(2);
	}
	if (auto v = n.find("tol"))
	{
		cfg.scan.tol = v->positive();
	}
	if (auto v = n.find("pole_guard"))
	{
		cfg.ep.pole_guard = v->positive();
	}
	if (auto v = n.find("decoupling_threshold"))
	{
		cfg.ep.decoupling_threshold = v->positive();
	}
}

void parse_hop(const Node& n, Config& cfg)
{
	n.allow({"regime", "steps", "seed", "tau", "localization_threshold", "ensemble"});
	HopSection h;
	if (auto v = n.find("regime"))
	{
		const std::string r = v->str();
		if (r == "chaos")
		{
			h.config.regime = Regime::Chaos;
		}
		else if (r == "measurement")
		{
			h.config.regime = Regime::Measurement;
		}
		else
		{
			v->fail("regime must be \"chaos\" or \"measurement\"");
		}
	}
	h.config.steps = n.at("steps").count(1);
	if (auto v = n.find("seed"))
	{
		h.config.seed = v->u64();
	}
	if (auto v = n.find("tau"))
	{
		h.config.tau = v->positive();
	}
	if (auto v = n.find("localization_threshold"))
	{
		h.config.localization_threshold = v->positive();
	}
	if (h.config.regime == Regime::Measurement && !n.has("localization_threshold"))
	{
		n.fail("measurement regime needs 'localization_threshold'");
	}
	if (auto e = n.find("ensemble"))
	{
		e->allow({"counts", "centroids", "spreads", "grid"});
		SyntheticEnsembleSpec s;
		const Node counts = e->at("counts");
		s.counts.resize(counts.array_size());
		if (s.counts.empty())
		{
			counts.fail("ensemble needs at least one realisation");
		}
		for (std::size_t i = 0; i < s.counts.size(); ++i)
		{
			s.counts[i] = counts.index(i).count(1);
		}
		s.centroids = e->at("centroids").numbers();
		if (s.centroids.size() != s.counts.size())
		{
			e->at("centroids").fail("needs one centroid per count");
		}
		s.spreads = e->find("spreads") ? e->at("spreads").numbers() : std::vector<double>(s.counts.size(), 0.0);
		if (s.spreads.size() != s.counts.size())
		{
			e->at("spreads").fail("needs one spread per count");
		}
		for (std::size_t i = 0; i < s.spreads.size(); ++i)
		{
			if (!(s.spreads[i] >= 0.0))
			{
				e->at("spreads").index(i).fail("spread must be non-negative");
			}
		}
		if (auto g = e->find("grid"))
		{
			s.grid = parse_grid_spec(*g);
		}
		h.ensemble = std::move(s);
	}
	cfg.hop = std::move(h);
}

Coefficient parse_coefficient(const Node& n, const Config& cfg)
{
	const json& j = n.raw();
	if (j.is_number() || j.is_array())
	{
		return Coefficient::constant(n.complex());
	}
	if (j.is_string())
	{
		if (n.str() != "potential")
		{
			n.fail("the only named coefficient is \"potential\"");
		}
		if (!cfg.line)
		{
			n.fail("\"potential\" needs a one-dimensional problem");
		}
		return Coefficient::table(std::vector<cplx>(cfg.line->potential.begin(), cfg.line->potential.end()));
	}
	n.expect_object();
	if (n.has("re") || n.has("im"))
	{
		return Coefficient::constant(n.complex());
	}
	if (auto t = n.find("table"))
	{
		n.allow({"table"});
		return Coefficient::table(t->complexes());
	}
	if (auto t = n.find("table_xt"))
	{
		n.allow({"table_xt"});
		t->allow({"times", "values"});
		const Node rows = t->at("values");
		std::vector<std::vector<cplx>> values(rows.array_size());
		for (std::size_t i = 0; i < values.size(); ++i)
		{
			values[i] = rows.index(i).complexes();
		}
		return Coefficient::table_xt(t->at("times").numbers(), std::move(values));
	}
	if (auto p = n.find("profile"))
	{
		n.allow({"profile", "amplitude", "center", "width", "lo", "hi"});
		try
		{
			return Coefficient::profile(profile_from_string(p->str()), parse_profile_params(n));
		}
		catch (const Error& e)
		{
			p->fail(e.what());
		}
	}
	n.fail("coefficient must be a number, [re, im], {re, im}, \"potential\", {table}, {table_xt} or {profile}");
}

HamiltonianSpec parse_spec(const Node& n, const Config& cfg, Boundary default_boundary)
{
	n.allow({"terms", "a0", "wave_like", "boundary", "max_order"});
	HamiltonianSpec spec;
	spec.boundary = default_boundary;
	if (auto v = n.find("a0"))
	{
		spec.a0 = v->positive();
	}
	if (auto v = n.find("wave_like"))
	{
		spec.wave_like = v->boolean();
	}
	if (auto v = n.find("boundary"))
	{
		spec.boundary = parse_boundary(*v);
		if (spec.boundary != default_boundary)
		{
			v->fail("spec boundary differs from the problem boundary");
		}
	}
	if (auto v = n.find("max_order"))
	{
		spec.max_order = static_cast<unsigned>(v->count(0));
		if (spec.max_order > 4)
		{
			v->fail("max_order above 4 is not supported");
		}
	}
	const Node terms = n.at("terms");
	if (terms.array_size() == 0)
	{
		terms.fail("needs at least one term");
	}
	for (std::size_t i = 0; i < terms.array_size(); ++i)
	{
		const Node t = terms.index(i);
		t.allow({"m", "n", "coeff"});
		HamiltonianTerm term;
		term.m = static_cast<unsigned>(t.at("m").count());
		term.n = static_cast<unsigned>(t.at("n").count());
		if (term.n > spec.max_order)
		{
			t.at("n").fail("derivative order above max_order " + std::to_string(spec.max_order));
		}
		term.coeff = parse_coefficient(t.at("coeff"), cfg);
		try
		{
			term.coeff.validate(cfg.line ? cfg.line->grid.size() : 0);
		}
		catch (const Error& e)
		{
			t.at("coeff").fail(e.what());
		}
		spec.terms.push_back(std::move(term));
	}
	return spec;
}

void parse_evolve(const Node& n, Config& cfg)
{
	n.allow({"method", "dt", "steps", "frame_every", "initial", "spec", "cross_check", "accuracy_budget",
	         "stability_budget"});
	if (!cfg.line)
	{
		n.fail("evolve needs a one-dimensional problem (box, harmonic or potential1d)");
	}
	EvolveSection e;
	if (auto v = n.find("method"))
	{
		const std::string m = v->str();
		if (m == "linear")
		{
			e.method = EvolveSection::Method::Linear;
		}
		else if (m == "universal")
		{
			e.method = EvolveSection::Method::Universal;
		}
		else
		{
			v->fail("method must be \"linear\" or \"universal\"");
		}
	}
	e.dt = n.at("dt").positive();
	e.steps = n.at("steps").count(0);
	if (auto v = n.find("frame_every"))
	{
		e.frame_every = v->count(1);
	}
	if (auto v = n.find("cross_check"))
	{
		e.cross_check = v->boolean();
	}
	if (auto v = n.find("accuracy_budget"))
	{
		e.accuracy_budget = v->positive();
	}
	if (auto v = n.find("stability_budget"))
	{
		e.stability_budget = v->positive();
	}
	if (auto in = n.find("initial"))
	{
		in->expect_object();
		const std::string k = in->at("kind").str();
		InitialState& s = e.initial;
		if (k == "gaussian")
		{
			in->allow({"kind", "x0", "sigma", "k0", "normalize"});
			s.kind = InitialState::Kind::Gaussian;
			s.x0 = in->at("x0").number();
			s.sigma = in->at("sigma").positive();
			s.k0 = in->find("k0") ? in->at("k0").number() : 0.0;
		}
		else if (k == "eigenstate")
		{
			in->allow({"kind", "level"});
			s.kind = InitialState::Kind::Eigenstate;
			s.level = in->find("level") ? in->at("level").count() : 0;
			if (s.level >= cfg.line->grid.size())
			{
				in->at("level").fail("level exceeds the grid size");
			}
		}
		else if (k == "zero")
		{
			in->allow({"kind"});
			s.kind = InitialState::Kind::Zero;
		}
		else if (k == "uniform")
		{
			in->allow({"kind", "value"});
			s.kind = InitialState::Kind::Uniform;
			s.value = in->at("value").complex();
		}
		else
		{
			in->at("kind").fail("initial kind must be \"gaussian\", \"eigenstate\", \"zero\" or \"uniform\"");
		}
		if (auto v = in->find("normalize"))
		{
			s.normalize = v->boolean();
		}
	}
	if (auto s = n.find("spec"))
	{
		e.spec = parse_spec(*s, cfg, cfg.line->boundary);
	}
	if (e.method == EvolveSection::Method::Universal && !e.spec)
	{
		n.fail("method \"universal\" needs a 'spec'");
	}
	if (e.cross_check && e.method != EvolveSection::Method::Universal)
	{
		n.at("cross_check").fail("cross_check compares the universal stepper against the linear propagator");
	}
	cfg.evolve = std::move(e);
}

} // namespace

Config parse_config(const std::string& text, const std::string& origin)
{
	json doc;
	try
	{
		doc = json::parse(text);
	}
	catch (const json::parse_error& e)
	{
		throw Error(ErrorKind::Config, origin + ": malformed JSON at byte " + std::to_string(e.byte) + ": "
		                                   + e.what());
	}
	Config cfg;
	cfg.origin = origin;
	const Node root(doc, "", cfg.origin);
	root.allow({"$schema", "constants", "problem", "partition", "scan", "cluster_width", "oracle_cap", "threads",
	            "hop", "evolve", "description"});
	if (auto c = root.find("constants"))
	{
		c->allow({"hbar", "mass", "c"});
		if (auto v = c->find("hbar"))
		{
			cfg.constants.hbar = v->positive();
		}
		if (auto v = c->find("mass"))
		{
			cfg.constants.mass = v->positive();
		}
		if (auto v = c->find("c"))
		{
			cfg.constants.c = v->positive();
		}
	}
	// a synthetic hop ensemble is self-contained; everything else needs a problem
	const bool synthetic_hop = doc.is_object() && doc.contains("hop") && doc["hop"].is_object()
	                           && doc["hop"].contains("ensemble");
	if (root.has("problem") || !synthetic_hop)
	{
		try
		{
			parse_problem(root.at("problem"), cfg);
		}
		catch (const Error& e)
		{
			const std::string msg = e.what();
			if (msg.rfind(origin + ": ", 0) == 0)
			{
				throw;
			}
			root.at("problem").fail(msg);
		}
	}
	if (auto p = root.find("partition"))
	{
		parse_partition(*p, cfg);
	}
	if (auto s = root.find("scan"))
	{
		parse_scan(*s, cfg);
	}
	if (auto v = root.find("cluster_width"))
	{
		cfg.cluster_width = v->non_negative();
	}
	if (auto v = root.find("oracle_cap"))
	{
		cfg.oracle_cap = v->count(1);
	}
	if (auto v = root.find("threads"))
	{
		cfg.threads = static_cast<unsigned>(v->count(1));
	}
	if (auto h = root.find("hop"))
	{
		parse_hop(*h, cfg);
	}
	if (auto e = root.find("evolve"))
	{
		parse_evolve(*e, cfg);
	}
	return cfg;
}

Config load_config(const std::string& path)
{
	std::ifstream in(path, std::ios::binary);
	if (!in)
	{
		throw Error(ErrorKind::Config, path + ": cannot open config file");
	}
	std::ostringstream buf;
	buf << in.rdbuf();
	return parse_config(buf.str(), path);
}

std::optional<std::size_t> oracle_cap_from_env()
{
	const char* raw = std::getenv("EPDYN_ORACLE_CAP");
	if (!raw || !*raw)
	{
		return std::nullopt;
	}
	char* end = nullptr;
	const unsigned long long v = std::strtoull(raw, &end, 10);
	if (*end != '\0' || v == 0 || raw[0] == '-')
	{
		throw Error(ErrorKind::Config, std::string("EPDYN_ORACLE_CAP: expected a positive integer, got '") + raw + "'");
	}
	return static_cast<std::size_t>(v);
}

} // namespace epdyn
