#include "epdyn/universal.hpp"

#include <algorithm>
#include <cmath>

namespace epdyn
{

// ---------------------------------------------------------------------------
// Hamilton-Jacobi

ActionField ActionField::sample(const Grid& x, const Grid& t, const std::function<double(double, double)>& fn)
{
	ActionField f{x, t, Eigen::MatrixXd(static_cast<Eigen::Index>(x.size()), static_cast<Eigen::Index>(t.size()))};
	for (std::size_t i = 0; i < x.size(); ++i)
	{
		for (std::size_t k = 0; k < t.size(); ++k)
		{
			f.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = fn(x.point(i), t.point(k));
		}
	}
	return f;
}

void ActionField::validate() const
{
	if (static_cast<std::size_t>(values.rows()) != x.size() || static_cast<std::size_t>(values.cols()) != t.size())
	{
		throw Error(ErrorKind::Config, "action field does not match its grids");
	}
	if (!values.allFinite())
	{
		throw Error(ErrorKind::Config, "action field has non-finite values");
	}
	if (x.size() < 3)
	{
		throw Error(ErrorKind::Domain, "action field needs at least 3 x points");
	}
}

Eigen::MatrixXd hj_residual(const ClassicalHamiltonian& hamiltonian, const ActionField& field)
{
	field.validate();
	if (field.t.size() < 3)
	{
		throw Error(ErrorKind::Domain, "time-dependent residual needs at least 3 time points");
	}
	const auto nx = static_cast<Eigen::Index>(field.x.size());
	const auto nt = static_cast<Eigen::Index>(field.t.size());
	const double dx = field.x.spacing();
	const double dt = field.t.spacing();
	const auto& a = field.values;
	Eigen::MatrixXd out(nx - 2, nt - 2);
	for (Eigen::Index i = 1; i + 1 < nx; ++i)
	{
		for (Eigen::Index k = 1; k + 1 < nt; ++k)
		{
			const double a_t = (a(i, k + 1) - a(i, k - 1)) / (2.0 * dt);
			const double a_x = (a(i + 1, k) - a(i - 1, k)) / (2.0 * dx);
			out(i - 1, k - 1) = a_t
			                    + hamiltonian(field.x.point(static_cast<std::size_t>(i)), a_x,
			                                  field.t.point(static_cast<std::size_t>(k)));
		}
	}
	return out;
}

Eigen::MatrixXd hj_stationary_residual(const ClassicalHamiltonian& hamiltonian,
                                       const ActionField& field, double energy)
{
	field.validate();
	const auto nx = static_cast<Eigen::Index>(field.x.size());
	const auto nt = static_cast<Eigen::Index>(field.t.size());
	const double dx = field.x.spacing();
	const auto& a = field.values;
	Eigen::MatrixXd out(nx - 2, nt);
	for (Eigen::Index i = 1; i + 1 < nx; ++i)
	{
		for (Eigen::Index k = 0; k < nt; ++k)
		{
			const double a_x = (a(i + 1, k) - a(i - 1, k)) / (2.0 * dx);
			out(i - 1, k) = hamiltonian(field.x.point(static_cast<std::size_t>(i)), a_x,
			                            field.t.point(static_cast<std::size_t>(k)))
			                - energy;
		}
	}
	return out;
}

cplx causal_quantize(cplx delta_action, cplx psi, cplx delta_psi, const QuantizationRule& rule)
{
	rule.validate();
	if (!(std::abs(psi) > 1e-12))
	{
		throw Error(ErrorKind::NodeSingularity, "|Psi| <= 1e-12; the quantization rule divides by Psi");
	}
	return delta_action + rule.factor() * delta_psi / psi;
}

// ---------------------------------------------------------------------------
// Coefficients

Profile profile_from_string(const std::string& name)
{
	if (name == "harmonic")
	{
		return Profile::Harmonic;
	}
	if (name == "gaussian")
	{
		return Profile::Gaussian;
	}
	if (name == "box")
	{
		return Profile::Box;
	}
	throw Error(ErrorKind::Config, "unknown profile '" + name + "' (harmonic, gaussian, box)");
}

Coefficient Coefficient::constant(cplx value)
{
	Coefficient c;
	c.kind_ = Kind::Constant;
	c.constant_ = value;
	return c;
}

Coefficient Coefficient::table(std::vector<cplx> values)
{
	Coefficient c;
	c.kind_ = Kind::Table;
	c.rows_.push_back(std::move(values));
	return c;
}

Coefficient Coefficient::table_xt(std::vector<double> times, std::vector<std::vector<cplx>> values)
{
	Coefficient c;
	c.kind_ = Kind::TableXT;
	c.times_ = std::move(times);
	c.rows_ = std::move(values);
	return c;
}

Coefficient Coefficient::profile(Profile profile, ProfileParams params)
{
	Coefficient c;
	c.kind_ = Kind::Profile;
	c.profile_ = profile;
	c.params_ = params;
	return c;
}

void Coefficient::validate(std::size_t points) const
{
	auto finite = [](cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); };
	switch (kind_)
	{
	case Kind::Constant:
		if (!finite(constant_))
		{
			throw Error(ErrorKind::Config, "coefficient is not finite");
		}
		return;
	case Kind::Table:
	case Kind::TableXT:
		if (rows_.empty())
		{
			throw Error(ErrorKind::Config, "coefficient table is empty");
		}
		if (kind_ == Kind::TableXT)
		{
			if (times_.size() != rows_.size())
			{
				throw Error(ErrorKind::Config, "coefficient table needs one time per row");
			}
			for (std::size_t k = 0; k < times_.size(); ++k)
			{
				if (!std::isfinite(times_[k]) || (k > 0 && !(times_[k] > times_[k - 1])))
				{
					throw Error(ErrorKind::Config, "coefficient table times must be finite and increasing");
				}
			}
		}
		for (const auto& row : rows_)
		{
			if (row.size() != points)
			{
				throw Error(ErrorKind::Config, "coefficient table has " + std::to_string(row.size())
				                                   + " values for " + std::to_string(points) + " grid points");
			}
			if (!std::all_of(row.begin(), row.end(), finite))
			{
				throw Error(ErrorKind::Config, "coefficient table has non-finite values");
			}
		}
		return;
	case Kind::Profile:
		if (!std::isfinite(params_.amplitude) || !std::isfinite(params_.center) || !std::isfinite(params_.lo)
		    || !std::isfinite(params_.hi))
		{
			throw Error(ErrorKind::Config, "profile parameters must be finite");
		}
		if (profile_ == Profile::Gaussian && !(params_.width > 0.0))
		{
			throw Error(ErrorKind::Config, "gaussian profile needs width > 0");
		}
		if (profile_ == Profile::Box && !(params_.hi >= params_.lo))
		{
			throw Error(ErrorKind::Config, "box profile needs hi >= lo");
		}
		return;
	}
}

cplx Coefficient::at(std::size_t i, double x, double t) const
{
	switch (kind_)
	{
	case Kind::Constant:
		return constant_;
	case Kind::Table:
		return rows_[0][i];
	case Kind::TableXT:
	{
		if (t <= times_.front())
		{
			return rows_.front()[i];
		}
		if (t >= times_.back())
		{
			return rows_.back()[i];
		}
		const auto hi = static_cast<std::size_t>(std::upper_bound(times_.begin(), times_.end(), t) - times_.begin());
		const double w = (t - times_[hi - 1]) / (times_[hi] - times_[hi - 1]);
		return (1.0 - w) * rows_[hi - 1][i] + w * rows_[hi][i];
	}
	case Kind::Profile:
	{
		const double d = x - params_.center;
		switch (profile_)
		{
		case Profile::Harmonic:
			return 0.5 * params_.amplitude * d * d;
		case Profile::Gaussian:
			return params_.amplitude * std::exp(-d * d / (2.0 * params_.width * params_.width));
		case Profile::Box:
			return x >= params_.lo && x <= params_.hi ? params_.amplitude : 0.0;
		}
	}
	}
	return 0.0;
}

double Coefficient::max_abs(const Grid& grid) const
{
	if (kind_ == Kind::Constant)
	{
		return std::abs(constant_);
	}
	double out = 0.0;
	if (kind_ == Kind::Table || kind_ == Kind::TableXT)
	{
		// linear interpolation never exceeds the larger endpoint
		for (const auto& row : rows_)
		{
			for (cplx z : row)
			{
				out = std::max(out, std::abs(z));
			}
		}
		return out;
	}
	for (std::size_t i = 0; i < grid.size(); ++i)
	{
		out = std::max(out, std::abs(at(i, grid.point(i), 0.0)));
	}
	return out;
}

// ---------------------------------------------------------------------------
// Spec

void HamiltonianSpec::validate(std::size_t points) const
{
	if (terms.empty())
	{
		throw Error(ErrorKind::Config, "Hamiltonian spec needs at least one term");
	}
	if (!(a0 > 0.0) || !std::isfinite(a0))
	{
		throw Error(ErrorKind::Config, "Hamiltonian spec needs a0 > 0");
	}
	const unsigned limit = std::min(max_order, 4u);
	for (const auto& term : terms)
	{
		if (term.n > limit)
		{
			throw Error(ErrorKind::Config, "derivative order " + std::to_string(term.n)
			                                   + " exceeds the maximum " + std::to_string(limit));
		}
		term.coeff.validate(points);
	}
}

HamiltonianSpec linear_schrodinger_spec(const std::vector<double>& potential,
                                        const PhysicalConstants& constants, Boundary boundary)
{
	constants.validate();
	HamiltonianSpec spec;
	spec.a0 = constants.hbar;
	spec.wave_like = true;
	spec.boundary = boundary;
	spec.terms.push_back({0, 2, Coefficient::constant(-constants.hbar * constants.hbar / (2.0 * constants.mass))});
	spec.terms.push_back({0, 0, Coefficient::table(std::vector<cplx>(potential.begin(), potential.end()))});
	return spec;
}

// ---------------------------------------------------------------------------
// Stepper

namespace
{

// max over the Brillouin zone of the second-order central stencil symbol, times s^n
constexpr double kSymbol[5] = {1.0, 1.0, 4.0, 2.598076211353316, 16.0};

} // namespace

UniversalStepper::UniversalStepper(HamiltonianSpec spec, Grid grid, StepperOptions options)
	: spec_(std::move(spec)), grid_(std::move(grid)), options_(options)
{
	spec_.validate(grid_.size());
	if (!(options_.dt > 0.0) || !std::isfinite(options_.dt))
	{
		throw Error(ErrorKind::StepSize, "time step must be positive");
	}
	if (!(options_.stability_budget > 0.0))
	{
		throw Error(ErrorKind::Config, "stability budget must be positive");
	}
	if (grid_.size() < 5)
	{
		throw Error(ErrorKind::Config, "universal stepper needs at least 5 grid points");
	}
	for (const auto& term : spec_.terms)
	{
		coeff_bounds_.push_back(term.coeff.max_abs(grid_) / spec_.a0);
	}
}

Eigen::VectorXcd UniversalStepper::derivative(const Eigen::VectorXcd& psi, unsigned order) const
{
	const auto n = static_cast<Eigen::Index>(psi.size());
	if (order == 0)
	{
		return psi;
	}
	const bool periodic = spec_.boundary == Boundary::Periodic;
	auto u = [&](Eigen::Index j) -> cplx {
		if (periodic)
		{
			return psi(((j % n) + n) % n);
		}
		return j < 0 || j >= n ? cplx{} : psi(j);
	};
	const double s = grid_.spacing();
	Eigen::VectorXcd out(n);
	for (Eigen::Index i = 0; i < n; ++i)
	{
		switch (order)
		{
		case 1:
			out(i) = (u(i + 1) - u(i - 1)) / (2.0 * s);
			break;
		case 2:
			out(i) = (u(i + 1) - 2.0 * u(i) + u(i - 1)) / (s * s);
			break;
		case 3:
			out(i) = (u(i + 2) - 2.0 * u(i + 1) + 2.0 * u(i - 1) - u(i - 2)) / (2.0 * s * s * s);
			break;
		default:
			out(i) = (u(i + 2) - 4.0 * u(i + 1) + 6.0 * u(i) - 4.0 * u(i - 1) + u(i - 2)) / (s * s * s * s);
			break;
		}
	}
	return out;
}

Eigen::VectorXcd UniversalStepper::rhs(const Eigen::VectorXcd& psi, double t) const
{
	const auto n = static_cast<Eigen::Index>(psi.size());
	const cplx inv_a0 = 1.0 / spec_.a0_effective();
	Eigen::VectorXcd out = Eigen::VectorXcd::Zero(n);
	for (const auto& term : spec_.terms)
	{
		const Eigen::VectorXcd d = derivative(psi, term.n);
		for (Eigen::Index i = 0; i < n; ++i)
		{
			const auto idx = static_cast<std::size_t>(i);
			const cplx h = term.coeff.at(idx, grid_.point(idx), t) * inv_a0;
			cplx power = 1.0;
			for (unsigned k = 0; k < term.m; ++k)
			{
				power *= psi(i);
			}
			out(i) -= h * power * d(i);
		}
	}
	return out;
}

double UniversalStepper::stability_estimate(const Eigen::VectorXcd& psi) const
{
	const double amp = psi.size() > 0 ? psi.cwiseAbs().maxCoeff() : 0.0;
	const double s = grid_.spacing();
	double lambda = 0.0;
	for (std::size_t k = 0; k < spec_.terms.size(); ++k)
	{
		const auto& term = spec_.terms[k];
		const double symbol = kSymbol[term.n] / std::pow(s, static_cast<double>(term.n));
		const double weight = term.n == 0 ? static_cast<double>(term.m + 1) : 1.0;
		lambda += coeff_bounds_[k] * weight * std::pow(amp, static_cast<double>(term.m)) * symbol;
	}
	return lambda;
}

void UniversalStepper::check_stability(const Eigen::VectorXcd& psi) const
{
	const double lambda = stability_estimate(psi);
	if (options_.dt * lambda > options_.stability_budget)
	{
		throw StabilityError(options_.dt, options_.stability_budget / lambda);
	}
}

PDEState UniversalStepper::step(const PDEState& state) const
{
	const double dt = options_.dt;
	const double t = state.time;
	const Eigen::VectorXcd& y = state.psi;
	const Eigen::VectorXcd k1 = rhs(y, t);
	const Eigen::VectorXcd k2 = rhs(y + 0.5 * dt * k1, t + 0.5 * dt);
	const Eigen::VectorXcd k3 = rhs(y + 0.5 * dt * k2, t + 0.5 * dt);
	const Eigen::VectorXcd k4 = rhs(y + dt * k3, t + dt);
	PDEState next;
	next.psi = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
	next.step = state.step + 1;
	next.time = static_cast<double>(next.step) * dt;
	return next;
}

UniversalStepper build_universal_pde(const HamiltonianSpec& spec, const Grid& grid, const StepperOptions& options)
{
	return UniversalStepper(spec, grid, options);
}

StepDiagnostics diagnose(const PDEState& state, const Grid& grid)
{
	StepDiagnostics d;
	d.step = state.step;
	d.time = state.time;
	d.norm = std::sqrt(state.psi.squaredNorm() * grid.spacing());
	d.max_amplitude = state.psi.size() > 0 ? state.psi.cwiseAbs().maxCoeff() : 0.0;
	return d;
}

PDEState step_pde(const PDEState& state, const UniversalStepper& stepper, std::size_t n_steps,
                  std::vector<StepDiagnostics>* diagnostics)
{
	if (static_cast<std::size_t>(state.psi.size()) != stepper.grid().size())
	{
		throw Error(ErrorKind::Config, "state does not match the stepper grid");
	}
	stepper.check_stability(state.psi);
	PDEState cur = state;
	for (std::size_t k = 0; k < n_steps; ++k)
	{
		cur = stepper.step(cur);
		if (!cur.psi.allFinite())
		{
			throw BlowUpError(cur.step);
		}
		if (diagnostics)
		{
			diagnostics->push_back(diagnose(cur, stepper.grid()));
		}
	}
	return cur;
}

} // namespace epdyn
