#include "epdyn/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "epdyn/problems.hpp"

namespace epdyn
{

std::string format_double(double v)
{
	if (std::isnan(v))
	{
		return "nan";
	}
	if (std::isinf(v))
	{
		return v > 0 ? "inf" : "-inf";
	}
	char buf[40];
	std::snprintf(buf, sizeof buf, "%.17g", v);
	return buf;
}

std::string json_escape(const std::string& s)
{
	std::string out = "\"";
	for (char c : s)
	{
		switch (c)
		{
		case '"':
			out += "\\\"";
			break;
		case '\\':
			out += "\\\\";
			break;
		case '\n':
			out += "\\n";
			break;
		case '\t':
			out += "\\t";
			break;
		default:
			if (static_cast<unsigned char>(c) < 0x20)
			{
				char buf[8];
				std::snprintf(buf, sizeof buf, "\\u%04x", static_cast<unsigned>(c));
				out += buf;
			}
			else
			{
				out += c;
			}
		}
	}
	return out + "\"";
}

// ---------------------------------------------------------------------------
// JsonWriter

void JsonWriter::separator()
{
	if (after_key_)
	{
		after_key_ = false;
		return;
	}
	if (!first_.empty())
	{
		if (!first_.back())
		{
			out_ += ",";
		}
		first_.back() = false;
		out_ += "\n" + std::string(static_cast<std::size_t>(2 * depth_), ' ');
	}
}

JsonWriter& JsonWriter::begin_object()
{
	separator();
	out_ += "{";
	first_.push_back(true);
	++depth_;
	return *this;
}

JsonWriter& JsonWriter::end_object()
{
	--depth_;
	const bool empty = first_.back();
	first_.pop_back();
	if (!empty)
	{
		out_ += "\n" + std::string(static_cast<std::size_t>(2 * depth_), ' ');
	}
	out_ += "}";
	return *this;
}

JsonWriter& JsonWriter::begin_array(const std::string& k)
{
	if (!k.empty())
	{
		key(k);
	}
	separator();
	out_ += "[";
	first_.push_back(true);
	++depth_;
	return *this;
}

JsonWriter& JsonWriter::end_array()
{
	--depth_;
	const bool empty = first_.back();
	first_.pop_back();
	if (!empty)
	{
		out_ += "\n" + std::string(static_cast<std::size_t>(2 * depth_), ' ');
	}
	out_ += "]";
	return *this;
}

JsonWriter& JsonWriter::key(const std::string& k)
{
	separator();
	out_ += json_escape(k) + ": ";
	after_key_ = true;
	return *this;
}

JsonWriter& JsonWriter::value(double v)
{
	separator();
	out_ += std::isfinite(v) ? format_double(v) : "null";
	return *this;
}

JsonWriter& JsonWriter::value(std::optional<double> v)
{
	return v ? value(*v) : null();
}

JsonWriter& JsonWriter::value(std::uint64_t v)
{
	separator();
	out_ += std::to_string(v);
	return *this;
}

JsonWriter& JsonWriter::value(bool v)
{
	separator();
	out_ += v ? "true" : "false";
	return *this;
}

JsonWriter& JsonWriter::value(const std::string& v)
{
	separator();
	out_ += json_escape(v);
	return *this;
}

JsonWriter& JsonWriter::null()
{
	separator();
	out_ += "null";
	return *this;
}

void write_file(const std::string& dir, const std::string& name, const std::string& content)
{
	std::error_code ec;
	std::filesystem::create_directories(dir, ec);
	if (ec)
	{
		throw Error(ErrorKind::Io, dir + ": cannot create output directory: " + ec.message());
	}
	const std::string path = (std::filesystem::path(dir) / name).string();
	std::ofstream out(path, std::ios::binary | std::ios::trunc);
	out << content;
	if (!out)
	{
		throw Error(ErrorKind::Io, path + ": write failed");
	}
}

namespace
{

const ExistenceProblem& require_problem(const Config& config)
{
	if (!config.problem)
	{
		throw Error(ErrorKind::Config, config.origin + ": /problem: this command needs a 'problem' section");
	}
	return *config.problem;
}

} // namespace

// ---------------------------------------------------------------------------
// spectrum

SpectrumResult run_spectrum(const Config& config)
{
	return {full_spectrum(require_problem(config), config.oracle_cap).eigenvalues};
}

void write_spectrum(const SpectrumResult& result, const std::string& dir)
{
	std::string csv = "index,eigenvalue\n";
	for (std::size_t i = 0; i < result.eigenvalues.size(); ++i)
	{
		csv += std::to_string(i) + "," + format_double(result.eigenvalues[i]) + "\n";
	}
	write_file(dir, "spectrum.csv", csv);
}

// ---------------------------------------------------------------------------
// ep-roots

PartitionSelector default_partition(const ExistenceProblem& problem)
{
	if (problem.n_xi() > 1)
	{
		return PartitionSelector::ground_channel();
	}
	std::vector<std::size_t> idx((problem.dimension() + 1) / 2);
	for (std::size_t i = 0; i < idx.size(); ++i)
	{
		idx[i] = i;
	}
	return PartitionSelector::explicit_indices(std::move(idx));
}

namespace
{

EpRootsResult make_ep_result(const Config& config)
{
	const ExistenceProblem& problem = require_problem(config);
	const PartitionSelector sel = config.partition_given ? config.partition : default_partition(problem);
	EPOperator op(make_partition(problem, sel), config.ep);
	RootEnumeration en = enumerate_roots(op, config.scan);
	std::optional<RealisationEnsemble> ens;
	if (!en.roots.empty())
	{
		ens = cluster_realisations(en.roots, problem, config.cluster_width);
	}
	return EpRootsResult{std::move(en), std::move(ens), std::nullopt, {}};
}

} // namespace

EpRootsResult run_ep_roots(const Config& config)
{
	EpRootsResult result = make_ep_result(config);
	const ExistenceProblem& problem = require_problem(config);
	if (problem.dimension() <= config.oracle_cap)
	{
		const Spectrum oracle = full_spectrum(problem, config.oracle_cap);
		std::vector<double> merged;
		for (const auto& r : result.enumeration.roots)
		{
			merged.push_back(r.energy);
		}
		merged.insert(merged.end(), result.enumeration.decoupled_poles.begin(),
		              result.enumeration.decoupled_poles.end());
		std::sort(merged.begin(), merged.end());
		OracleCheck check;
		check.dimension = oracle.size();
		check.counts_match = merged.size() == oracle.size();
		check.spectral_norm = 0.0;
		for (double e : oracle.eigenvalues)
		{
			check.spectral_norm = std::max(check.spectral_norm, std::abs(e));
		}
		for (std::size_t i = 0; i < std::min(merged.size(), oracle.size()); ++i)
		{
			check.max_abs_diff = std::max(check.max_abs_diff, std::abs(merged[i] - oracle.eigenvalues[i]));
		}
		result.oracle = check;
	}
	else
	{
		result.oracle_note = "dimension " + std::to_string(problem.dimension()) + " exceeds the oracle cap "
		                     + std::to_string(config.oracle_cap) + "; oracle comparison skipped";
	}
	return result;
}

std::string EpRootsResult::summary() const
{
	std::ostringstream s;
	const auto& en = enumeration;
	s << "EP roots: " << en.roots.size() << " accepted, " << en.decoupled_poles.size() << " decoupled poles, "
	  << "dimension " << en.dimension << " -> " << (en.complete() ? "complete" : "INCOMPLETE") << "\n";
	s << "scan range [" << format_double(en.e_min) << ", " << format_double(en.e_max) << "], tol "
	  << format_double(en.tol) << ", " << en.evaluations << " evaluations\n";
	if (ensemble)
	{
		s << "realisations: " << ensemble->size() << " (cluster width " << format_double(ensemble->width()) << ")\n";
	}
	if (oracle)
	{
		s << "oracle: " << oracle->dimension << " eigenvalues, max |dE| " << format_double(oracle->max_abs_diff)
		  << " (||H|| " << format_double(oracle->spectral_norm) << ")"
		  << (oracle->counts_match ? "" : ", COUNT MISMATCH") << "\n";
	}
	else
	{
		s << "oracle: " << oracle_note << "\n";
	}
	s << "decoupled poles:";
	if (en.decoupled_poles.empty())
	{
		s << " none";
	}
	for (double p : en.decoupled_poles)
	{
		s << " " << format_double(p);
	}
	s << "\n";
	for (const auto& d : en.diagnostics())
	{
		s << "warning: " << d << "\n";
	}
	return s.str();
}

void write_ep_roots(const EpRootsResult& result, const std::string& dir)
{
	const auto clusters = result.ensemble ? result.ensemble->member_clusters() : std::vector<std::size_t>{};
	std::string csv = "branch_id,E,residual,centroid,cluster_id,N_r,alpha_num,alpha_den\n";
	// centroids are recomputed from each root's own density
	for (const auto& r : result.enumeration.roots)
	{
		const std::size_t c = clusters.at(r.branch_id);
		const Ratio a = result.ensemble->alpha(c);
		double centroid = 0.0;
		{
			const Grid& g = result.ensemble->grid();
			double mass = 0.0;
			double first = 0.0;
			// psi_full lives on the product grid; fold it onto q through the cell layout
			const auto n_q = g.size();
			const auto n_xi = static_cast<std::size_t>(r.psi_full.values.size()) / n_q;
			for (std::size_t i = 0; i < n_q; ++i)
			{
				double rho = 0.0;
				for (std::size_t j = 0; j < n_xi; ++j)
				{
					rho += std::norm(r.psi_full.values(static_cast<Eigen::Index>(i * n_xi + j)));
				}
				mass += rho;
				first += rho * g.point(i);
			}
			centroid = mass > 0.0 ? first / mass : 0.0;
		}
		csv += std::to_string(r.branch_id) + "," + format_double(r.energy) + "," + format_double(r.residual) + ","
		       + format_double(centroid) + "," + std::to_string(c) + "," + std::to_string(a.num) + ","
		       + std::to_string(a.num) + "," + std::to_string(a.den) + "\n";
	}
	write_file(dir, "roots.csv", csv);

	std::string poles = "index,E\n";
	for (std::size_t i = 0; i < result.enumeration.decoupled_poles.size(); ++i)
	{
		poles += std::to_string(i) + "," + format_double(result.enumeration.decoupled_poles[i]) + "\n";
	}
	write_file(dir, "decoupled_poles.csv", poles);
}

// ---------------------------------------------------------------------------
// hop

RealisationEnsemble hop_ensemble(const Config& config)
{
	if (!config.hop)
	{
		throw Error(ErrorKind::Config, config.origin + ": /hop: missing 'hop' section");
	}
	if (const auto& s = config.hop->ensemble)
	{
		Grid grid = s->grid ? *s->grid : [&] {
			double lo = s->centroids.front();
			double hi = lo;
			double pad = 1.0;
			for (std::size_t r = 0; r < s->centroids.size(); ++r)
			{
				lo = std::min(lo, s->centroids[r]);
				hi = std::max(hi, s->centroids[r]);
				pad = std::max(pad, 8.0 * s->spreads[r]);
			}
			return build_grid(801, lo - pad, hi + pad);
		}();
		return RealisationEnsemble::synthetic(grid, s->counts, s->centroids, s->spreads);
	}
	EpRootsResult r = make_ep_result(config);
	if (!r.ensemble)
	{
		throw Error(ErrorKind::Partition, "no EP roots found in the scanned range, so there is nothing to hop between");
	}
	return std::move(*r.ensemble);
}

HopResult run_hop(const Config& config)
{
	RealisationEnsemble ens = hop_ensemble(config);
	const HopConfig& hc = config.hop->config;
	HopTrajectory traj = simulate_hops(ens, hc);
	EmpiricalStats stats = empirical_frequencies(traj, ens, hc.tau);
	Kinematics kin = kinematic_observables(stats, config.constants, hc);
	std::vector<double> bound(ens.size());
	for (std::size_t r = 0; r < ens.size(); ++r)
	{
		const double a = ens.alpha(r).value();
		bound[r] = 3.0 * std::sqrt(a * (1.0 - a) / static_cast<double>(stats.steps));
	}
	return HopResult{std::move(ens), std::move(traj), std::move(stats), kin, std::move(bound)};
}

std::string HopResult::summary() const
{
	std::ostringstream s;
	s << "hop: " << stats.steps << " steps, regime "
	  << (trajectory.regime == Regime::Chaos ? "chaos" : "measurement") << ", seed " << trajectory.seed << "\n";
	for (std::size_t r = 0; r < ensemble.size(); ++r)
	{
		const double a = ensemble.alpha(r).value();
		const double dev = std::abs(stats.frequencies[r] - a);
		s << "  realisation " << r << ": alpha " << ensemble.alpha(r).num << "/" << ensemble.alpha(r).den
		  << ", frequency " << format_double(stats.frequencies[r]) << ", 3-sigma bound " << format_double(bound3[r])
		  << (dev <= bound3[r] ? " ok" : " OUTSIDE") << "\n";
	}
	if (trajectory.frozen_at)
	{
		s << "frozen at step " << *trajectory.frozen_at << "\n";
	}
	if (trajectory.no_localizable_realisation)
	{
		s << "warning: no realisation is below the localization threshold; the run cannot freeze\n";
	}
	if (stats.regime_mismatch)
	{
		s << "warning: measurement-regime frequencies are not alpha-distributed\n";
	}
	return s.str();
}

void write_hop(const HopResult& result, const std::string& dir)
{
	std::string csv = "step,realisation,centroid\n";
	csv.reserve(result.trajectory.records.size() * 32);
	for (const auto& rec : result.trajectory.records)
	{
		csv += std::to_string(rec.step) + "," + std::to_string(rec.realisation) + "," + format_double(rec.centroid)
		       + "\n";
	}
	write_file(dir, "trajectory.csv", csv);

	JsonWriter j;
	j.begin_object();
	j.begin_array("frequencies");
	for (double f : result.stats.frequencies)
	{
		j.value(f);
	}
	j.end_array();
	j.field("v", result.kinematics.velocity);
	j.field("lambda", result.stats.jump_length);
	j.field("E", result.kinematics.energy);
	j.field("p", result.kinematics.momentum);
	j.field("lambda_B", result.kinematics.de_broglie);
	j.key("frozen_at");
	if (result.trajectory.frozen_at)
	{
		j.value(static_cast<std::uint64_t>(*result.trajectory.frozen_at));
	}
	else
	{
		j.null();
	}
	j.field("consistency", result.kinematics.consistency);
	j.begin_array("counts");
	for (auto c : result.stats.counts)
	{
		j.value(static_cast<std::uint64_t>(c));
	}
	j.end_array();
	j.begin_array("alpha");
	for (std::size_t r = 0; r < result.ensemble.size(); ++r)
	{
		j.begin_array();
		j.value(result.ensemble.alpha(r).num);
		j.value(result.ensemble.alpha(r).den);
		j.end_array();
	}
	j.end_array();
	j.begin_array("bound_3sigma");
	for (double b : result.bound3)
	{
		j.value(b);
	}
	j.end_array();
	j.field("steps", static_cast<std::uint64_t>(result.stats.steps));
	j.field("seed", result.trajectory.seed);
	j.field("regime", result.trajectory.regime == Regime::Chaos ? "chaos" : "measurement");
	j.field("regime_mismatch", result.stats.regime_mismatch);
	j.field("no_localizable_realisation", result.trajectory.no_localizable_realisation);
	j.end_object();
	write_file(dir, "hop_stats.json", j.str());
}

// ---------------------------------------------------------------------------
// evolve

Eigen::VectorXcd initial_state(const Config& config)
{
	const auto& e = *config.evolve;
	const Hamiltonian1D& line = *config.line;
	const Grid& g = line.grid;
	const auto n = static_cast<Eigen::Index>(g.size());
	switch (e.initial.kind)
	{
	case InitialState::Kind::Zero:
		return Eigen::VectorXcd::Zero(n);
	case InitialState::Kind::Uniform:
		return Eigen::VectorXcd::Constant(n, e.initial.value);
	case InitialState::Kind::Eigenstate:
		return full_spectrum(line.matrix(), g.spacing(), config.oracle_cap).state(e.initial.level).values;
	case InitialState::Kind::Gaussian:
		break;
	}
	WaveField w = gaussian_packet(g, e.initial.x0, e.initial.sigma, e.initial.k0);
	if (!e.initial.normalize)
	{
		for (Eigen::Index i = 0; i < n; ++i)
		{
			const double d = g.point(static_cast<std::size_t>(i)) - e.initial.x0;
			w.values(i) = std::exp(cplx{-d * d / (4.0 * e.initial.sigma * e.initial.sigma),
			                            e.initial.k0 * g.point(static_cast<std::size_t>(i))});
		}
	}
	return w.values;
}

double spatial_variance(const Grid& grid, const Eigen::VectorXcd& psi, bool wave_like)
{
	double m0 = 0.0;
	double m1 = 0.0;
	double m2 = 0.0;
	for (std::size_t i = 0; i < grid.size(); ++i)
	{
		const cplx v = psi(static_cast<Eigen::Index>(i));
		const double w = wave_like ? std::norm(v) : v.real();
		const double x = grid.point(i);
		m0 += w;
		m1 += w * x;
		m2 += w * x * x;
	}
	if (m0 == 0.0)
	{
		return 0.0;
	}
	const double mean = m1 / m0;
	return m2 / m0 - mean * mean;
}

namespace
{

double grid_norm(const Eigen::VectorXcd& psi, double dx)
{
	return std::sqrt(psi.squaredNorm() * dx);
}

std::optional<double> energy_of(const Eigen::VectorXcd& psi, const Hamiltonian1D& h)
{
	const WaveField w{psi, h.grid.spacing(), NormConvention::Raw};
	if (std::abs(w.norm_squared() - 1.0) > 1e-10)
	{
		return std::nullopt;
	}
	return conservation_report(w, h).total;
}

std::optional<double> heat_diffusivity(const HamiltonianSpec& spec)
{
	if (spec.wave_like || spec.terms.size() != 1)
	{
		return std::nullopt;
	}
	const auto& t = spec.terms.front();
	if (t.m != 0 || t.n != 2 || t.coeff.kind() != Coefficient::Kind::Constant)
	{
		return std::nullopt;
	}
	const cplx c = t.coeff.at(0, 0.0, 0.0);
	if (c.imag() != 0.0)
	{
		return std::nullopt;
	}
	// dPsi/dt + (c/a0) Psi'' = 0
	return -c.real() / spec.a0;
}

} // namespace

EvolveResult run_evolve(const Config& config)
{
	if (!config.evolve)
	{
		throw Error(ErrorKind::Config, config.origin + ": /evolve: missing 'evolve' section");
	}
	const EvolveSection& e = *config.evolve;
	const Hamiltonian1D& line = *config.line;
	const double dx = line.grid.spacing();

	EvolveResult r{.method = {}, .grid = line.grid};
	r.dt = e.dt;
	r.steps = e.steps;
	Eigen::VectorXcd psi = initial_state(config);
	const bool wave_like = e.method == EvolveSection::Method::Linear || e.spec->wave_like;
	r.norm_initial = grid_norm(psi, dx);
	r.variance_initial = spatial_variance(line.grid, psi, wave_like);
	r.frames.push_back({0.0, psi});

	auto record = [&](std::size_t step, const Eigen::VectorXcd& v) {
		if (step % e.frame_every == 0 || step == e.steps)
		{
			r.frames.push_back({static_cast<double>(step) * e.dt, v});
		}
	};

	std::optional<SchrodingerPropagator> linear;
	if (e.method == EvolveSection::Method::Linear || e.cross_check)
	{
		linear.emplace(line, PropagatorOptions{e.dt, line.boundary, e.accuracy_budget});
	}

	if (e.method == EvolveSection::Method::Linear)
	{
		r.method = "linear";
		r.energy_initial = energy_of(psi, line);
		for (std::size_t k = 1; k <= e.steps; ++k)
		{
			psi = linear->step(psi);
			if (!psi.allFinite())
			{
				throw BlowUpError(k);
			}
			record(k, psi);
		}
		r.energy_final = energy_of(psi, line);
	}
	else
	{
		r.method = "universal";
		const UniversalStepper stepper =
		    build_universal_pde(*e.spec, line.grid, StepperOptions{e.dt, e.stability_budget});
		stepper.check_stability(psi);
		r.heat_diffusivity = heat_diffusivity(*e.spec);
		PDEState state{psi, 0.0, 0};
		Eigen::VectorXcd reference = psi;
		double deviation = 0.0;
		for (std::size_t k = 1; k <= e.steps; ++k)
		{
			state = stepper.step(state);
			if (!state.psi.allFinite())
			{
				throw BlowUpError(k);
			}
			if (linear)
			{
				reference = linear->step(reference);
				deviation = std::max(deviation, (state.psi - reference).cwiseAbs().maxCoeff());
			}
			record(k, state.psi);
		}
		psi = state.psi;
		if (linear)
		{
			r.cross_check_max_deviation = deviation;
		}
	}
	r.norm_final = grid_norm(psi, dx);
	r.variance_final = spatial_variance(line.grid, psi, wave_like);
	return r;
}

std::string EvolveResult::summary() const
{
	std::ostringstream s;
	s << "evolve (" << method << "): " << steps << " steps of dt " << format_double(dt) << ", " << frames.size()
	  << " frames\n";
	s << "norm " << format_double(norm_initial) << " -> " << format_double(norm_final) << "\n";
	if (energy_initial && energy_final)
	{
		s << "energy " << format_double(*energy_initial) << " -> " << format_double(*energy_final) << "\n";
	}
	s << "variance " << format_double(variance_initial) << " -> " << format_double(variance_final) << "\n";
	if (heat_diffusivity)
	{
		const double t = static_cast<double>(steps) * dt;
		s << "heat member: variance growth " << format_double(variance_final - variance_initial) << ", 2Dt "
		  << format_double(2.0 * *heat_diffusivity * t) << "\n";
	}
	if (cross_check_max_deviation)
	{
		s << "cross-check vs linear propagator: max deviation " << format_double(*cross_check_max_deviation) << "\n";
	}
	return s.str();
}

void write_evolve(const EvolveResult& result, const std::string& dir)
{
	std::string csv = "t,x,re,im,abs2\n";
	for (const auto& f : result.frames)
	{
		const std::string t = format_double(f.time);
		for (std::size_t i = 0; i < result.grid.size(); ++i)
		{
			const cplx v = f.psi(static_cast<Eigen::Index>(i));
			csv += t + "," + format_double(result.grid.point(i)) + "," + format_double(v.real()) + ","
			       + format_double(v.imag()) + "," + format_double(std::norm(v)) + "\n";
		}
	}
	write_file(dir, "frames.csv", csv);

	JsonWriter j;
	j.begin_object();
	j.field("method", result.method);
	j.field("dt", result.dt);
	j.field("steps", static_cast<std::uint64_t>(result.steps));
	j.field("frames", static_cast<std::uint64_t>(result.frames.size()));
	j.field("norm_initial", result.norm_initial);
	j.field("norm_final", result.norm_final);
	j.field("energy_initial", result.energy_initial);
	j.field("energy_final", result.energy_final);
	j.field("variance_initial", result.variance_initial);
	j.field("variance_final", result.variance_final);
	j.field("heat_diffusivity", result.heat_diffusivity);
	if (result.heat_diffusivity)
	{
		j.field("variance_growth_expected", 2.0 * *result.heat_diffusivity * static_cast<double>(result.steps) * result.dt);
	}
	j.field("cross_check_max_deviation", result.cross_check_max_deviation);
	j.end_object();
	write_file(dir, "evolve_report.json", j.str());
}

} // namespace epdyn
