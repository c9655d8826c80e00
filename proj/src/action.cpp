#include "epdyn/action.hpp"

#include <cmath>
#include <string>

namespace epdyn
{

ActionLedger ActionLedger::start(double initial, double quantum)
{
	if (!(quantum > 0.0) || !std::isfinite(quantum) || !std::isfinite(initial))
	{
		throw Error(ErrorKind::Config, "action ledger needs a finite initial value and positive quantum");
	}
	ActionLedger l;
	l.initial = initial;
	l.value = initial;
	l.quantum = quantum;
	return l;
}

ActionLedger ledger_advance(const ActionLedger& ledger, std::size_t cycles)
{
	if (cycles < 1)
	{
		throw Error(ErrorKind::Domain, "ledger_advance needs at least one cycle");
	}
	ActionLedger next = ledger;
	next.increments.insert(next.increments.end(), cycles, -ledger.quantum);
	next.cycles += cycles;
	// recomputed from the count so no rounding accumulates over long runs
	next.value = next.initial - static_cast<double>(next.cycles) * next.quantum;
	return next;
}

void QuantizationRule::validate() const
{
	if (!(quantum > 0.0) || !std::isfinite(quantum))
	{
		throw Error(ErrorKind::Config, "quantization rule needs a positive quantum");
	}
}

Eigen::VectorXcd wave_action(double action, const Eigen::VectorXcd& psi)
{
	return action * psi;
}

cplx wave_action_balance(cplx action, cplx delta_action, cplx psi, cplx delta_psi)
{
	return action * delta_psi + psi * delta_action;
}

// ---------------------------------------------------------------------------
// Space-time field and stencils

SpaceTimeField SpaceTimeField::sample(const Grid& x, const Grid& t,
                                      const std::function<cplx(double, double)>& fn)
{
	SpaceTimeField f{x, t, Eigen::MatrixXcd(static_cast<Eigen::Index>(x.size()),
	                                        static_cast<Eigen::Index>(t.size()))};
	for (std::size_t i = 0; i < x.size(); ++i)
	{
		for (std::size_t k = 0; k < t.size(); ++k)
		{
			f.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = fn(x.point(i), t.point(k));
		}
	}
	return f;
}

void SpaceTimeField::validate() const
{
	if (static_cast<std::size_t>(values.rows()) != x.size()
	    || static_cast<std::size_t>(values.cols()) != t.size())
	{
		throw Error(ErrorKind::Config, "space-time field does not match its grids");
	}
	if (!values.allFinite())
	{
		throw Error(ErrorKind::Config, "space-time field has non-finite values");
	}
}

namespace
{

// Samples f(j) along one axis of length n; returns the first or second
// derivative at `at` with spacing h.
template <class Sample>
cplx derivative(const Sample& f, std::size_t n, std::size_t at, double h, int order, Stencil stencil)
{
	const bool interior = at > 0 && at + 1 < n;
	if (interior)
	{
		if (order == 1)
		{
			return (f(at + 1) - f(at - 1)) / (2.0 * h);
		}
		return (f(at + 1) - 2.0 * f(at) + f(at - 1)) / (h * h);
	}
	if (stencil != Stencil::AllowOneSided)
	{
		throw Error(ErrorKind::Domain,
		            "boundary point " + std::to_string(at) + " needs the one-sided stencil flag");
	}
	if (n < 4)
	{
		throw Error(ErrorKind::Domain, "one-sided stencils need at least 4 points");
	}
	const double dir = at == 0 ? 1.0 : -1.0;
	auto g = [&](std::size_t k) { return at == 0 ? f(k) : f(n - 1 - k); };
	if (order == 1)
	{
		return dir * (-3.0 * g(0) + 4.0 * g(1) - g(2)) / (2.0 * h);
	}
	return (2.0 * g(0) - 5.0 * g(1) + 4.0 * g(2) - g(3)) / (h * h);
}

cplx checked_value(const SpaceTimeField& field, std::size_t i, std::size_t k)
{
	field.validate();
	if (i >= field.x.size() || k >= field.t.size())
	{
		throw Error(ErrorKind::Domain, "stencil point outside the field");
	}
	const cplx psi = field.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
	if (std::abs(psi) < 1e-12)
	{
		throw Error(ErrorKind::NodeSingularity,
		            "|Psi| < 1e-12 at (x=" + std::to_string(i) + ", t=" + std::to_string(k)
		                + "); the quantization rule divides by Psi");
	}
	return psi;
}

cplx x_derivative(const SpaceTimeField& field, std::size_t i, std::size_t k, int order, Stencil s)
{
	const auto col = static_cast<Eigen::Index>(k);
	auto f = [&](std::size_t j) { return field.values(static_cast<Eigen::Index>(j), col); };
	return derivative(f, field.x.size(), i, field.x.spacing(), order, s);
}

cplx t_derivative(const SpaceTimeField& field, std::size_t i, std::size_t k, int order, Stencil s)
{
	const auto row = static_cast<Eigen::Index>(i);
	auto f = [&](std::size_t j) { return field.values(row, static_cast<Eigen::Index>(j)); };
	return derivative(f, field.t.size(), k, field.t.spacing(), order, s);
}

} // namespace

cplx discrete_momentum(const SpaceTimeField& field, const QuantizationRule& rule,
                       std::size_t x_index, std::size_t t_index, Stencil stencil)
{
	rule.validate();
	const cplx psi = checked_value(field, x_index, t_index);
	return -rule.factor() * x_derivative(field, x_index, t_index, 1, stencil) / psi;
}

cplx discrete_momentum_squared(const SpaceTimeField& field, const QuantizationRule& rule,
                               std::size_t x_index, std::size_t t_index, Stencil stencil)
{
	rule.validate();
	const cplx psi = checked_value(field, x_index, t_index);
	const cplx f = rule.factor();
	return f * f * x_derivative(field, x_index, t_index, 2, stencil) / psi;
}

cplx discrete_energy(const SpaceTimeField& field, const QuantizationRule& rule,
                     std::size_t x_index, std::size_t t_index, Stencil stencil)
{
	rule.validate();
	const cplx psi = checked_value(field, x_index, t_index);
	return rule.factor() * t_derivative(field, x_index, t_index, 1, stencil) / psi;
}

cplx discrete_energy_squared(const SpaceTimeField& field, const QuantizationRule& rule,
                             std::size_t x_index, std::size_t t_index, Stencil stencil)
{
	rule.validate();
	const cplx psi = checked_value(field, x_index, t_index);
	const cplx f = rule.factor();
	return f * f * t_derivative(field, x_index, t_index, 2, stencil) / psi;
}

// ---------------------------------------------------------------------------
// Propagator

namespace
{

Eigen::SparseMatrix<cplx> sparse_hamiltonian(const Hamiltonian1D& ham)
{
	const auto n = static_cast<Eigen::Index>(ham.grid.size());
	const double s = ham.grid.spacing();
	const double k = ham.constants.hbar * ham.constants.hbar / (2.0 * ham.constants.mass * s * s);
	std::vector<Eigen::Triplet<cplx>> t;
	t.reserve(static_cast<std::size_t>(3 * n + 2));
	for (Eigen::Index i = 0; i < n; ++i)
	{
		t.emplace_back(i, i, 2.0 * k + ham.potential[static_cast<std::size_t>(i)]);
		if (i > 0)
		{
			t.emplace_back(i, i - 1, -k);
		}
		if (i + 1 < n)
		{
			t.emplace_back(i, i + 1, -k);
		}
	}
	if (ham.boundary == Boundary::Periodic)
	{
		t.emplace_back(0, n - 1, -k);
		t.emplace_back(n - 1, 0, -k);
	}
	Eigen::SparseMatrix<cplx> h(n, n);
	h.setFromTriplets(t.begin(), t.end()); // duplicates (n == 2 ring) are summed
	return h;
}

} // namespace

SchrodingerPropagator::SchrodingerPropagator(Hamiltonian1D hamiltonian, PropagatorOptions options)
	: hamiltonian_(std::move(hamiltonian)), options_(options)
{
	hamiltonian_.boundary = options_.boundary;
	hamiltonian_.validate();
	if (!(options_.dt > 0.0) || !std::isfinite(options_.dt))
	{
		throw Error(ErrorKind::StepSize, "time step must be positive");
	}
	const Eigen::SparseMatrix<cplx> h = sparse_hamiltonian(hamiltonian_);
	double norm = 0.0;
	for (Eigen::Index i = 0; i < h.outerSize(); ++i)
	{
		// symmetric pattern, so column sums equal row sums
		double col = 0.0;
		for (Eigen::SparseMatrix<cplx>::InnerIterator it(h, i); it; ++it)
		{
			col += std::abs(it.value());
		}
		norm = std::max(norm, col);
	}
	const double load = options_.dt * norm / hamiltonian_.constants.hbar;
	if (load > options_.accuracy_budget)
	{
		throw Error(ErrorKind::StepSize,
		            "dt * ||H|| / hbar = " + std::to_string(load) + " exceeds the accuracy budget "
		                + std::to_string(options_.accuracy_budget) + "; use dt <= "
		                + std::to_string(options_.accuracy_budget * hamiltonian_.constants.hbar / norm));
	}

	const auto n = h.rows();
	Eigen::SparseMatrix<cplx> id(n, n);
	id.setIdentity();
	const cplx half = cplx{0.0, 0.5 * options_.dt / hamiltonian_.constants.hbar};
	Eigen::SparseMatrix<cplx> a = id + half * h;
	rhs_ = id - half * h;
	a.makeCompressed();
	rhs_.makeCompressed();
	lhs_.analyzePattern(a);
	lhs_.factorize(a);
	if (lhs_.info() != Eigen::Success)
	{
		throw Error(ErrorKind::StepSize, "Crank-Nicolson matrix factorization failed");
	}
}

Eigen::VectorXcd SchrodingerPropagator::step(const Eigen::VectorXcd& psi) const
{
	const Eigen::VectorXcd b = rhs_ * psi;
	Eigen::VectorXcd out = lhs_.solve(b);
	return out;
}

WaveField SchrodingerPropagator::propagate(const WaveField& psi, std::size_t steps) const
{
	if (static_cast<std::size_t>(psi.values.size()) != hamiltonian_.grid.size())
	{
		throw Error(ErrorKind::Config, "state does not match the propagator grid");
	}
	WaveField out = psi;
	for (std::size_t k = 0; k < steps; ++k)
	{
		out.values = step(out.values);
		if (!out.values.allFinite())
		{
			throw BlowUpError(k + 1);
		}
	}
	return out;
}

Spectrum SchrodingerPropagator::stationary(std::size_t cap) const
{
	return full_spectrum(hamiltonian_.matrix(), hamiltonian_.grid.spacing(), cap);
}

double SchrodingerPropagator::scheme_phase(double energy) const
{
	// (1 - i a)/(1 + i a) = exp(-2i atan a), a = E dt / (2 hbar)
	return -2.0 * std::atan(0.5 * energy * options_.dt / hamiltonian_.constants.hbar);
}

SchrodingerPropagator assemble_schrodinger(const Grid& grid, const std::vector<double>& potential,
                                           const PhysicalConstants& constants,
                                           const PropagatorOptions& options)
{
	return SchrodingerPropagator(Hamiltonian1D{grid, potential, constants, options.boundary}, options);
}

ConservationReport conservation_report(const WaveField& psi, const Hamiltonian1D& hamiltonian)
{
	const EnergyBreakdown e = expectation_energy(psi, hamiltonian);
	const auto& c = hamiltonian.constants;
	ConservationReport r;
	r.kinetic = e.kinetic;
	r.potential = e.potential;
	r.total = e.total;
	r.q_squared = c.mass / (c.hbar * c.hbar) * e.kinetic;
	r.potential_quanta = (c.mass / c.hbar) * (e.potential / c.hbar);
	r.energy_quanta = (c.mass / c.hbar) * (e.total / c.hbar);
	return r;
}

} // namespace epdyn
