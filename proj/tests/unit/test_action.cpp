#include <doctest.h>

#include <cmath>

#include "epdyn/action.hpp"
#include "epdyn/errors.hpp"
#include "epdyn/problems.hpp"

using namespace epdyn;

namespace
{

constexpr cplx I{0.0, 1.0};

SpaceTimeField plane_wave(double k, double omega, double dx, double dt)
{
	const Grid x = build_grid(11, 0.0, 10.0 * dx);
	const Grid t = build_grid(11, 0.0, 10.0 * dt);
	return SpaceTimeField::sample(x, t, [&](double xx, double tt) { return std::exp(I * (k * xx - omega * tt)); });
}

} // namespace

TEST_CASE("action ledger loses one quantum per cycle")
{
	const double h = 2.0 * M_PI;
	CHECK(ledger_advance(ActionLedger::start(10.0 * h, h), 1).value == doctest::Approx(9.0 * h));
	const ActionLedger l = ledger_advance(ActionLedger::start(0.0, h), 3);
	CHECK(l.value == doctest::Approx(-3.0 * h));
	CHECK(l.cycles == 3);
	CHECK(l.increments.size() == 3);
	for (double d : l.increments)
	{
		CHECK(d == -h);
	}
	const ActionLedger five = ledger_advance(ActionLedger::start(1.0, 5.0), 2);
	CHECK(five.initial - five.value == doctest::Approx(10.0));
	// advancing in pieces equals advancing at once
	CHECK(ledger_advance(ledger_advance(ActionLedger::start(4.0, 1.5), 2), 3).value
	      == doctest::Approx(ledger_advance(ActionLedger::start(4.0, 1.5), 5).value));
}

TEST_CASE("wave action and its one-cycle balance")
{
	const Eigen::VectorXcd psi = Eigen::VectorXcd::Random(7);
	CHECK(wave_action(0.0, psi).cwiseAbs().maxCoeff() == 0.0);
	const Eigen::VectorXcd w = wave_action(2.5, Eigen::VectorXcd::Ones(4));
	for (Eigen::Index i = 0; i < 4; ++i)
	{
		CHECK(w(i) == cplx(2.5, 0.0));
	}
	// dPsi/Psi = -dA/A  =>  A dPsi + Psi dA = 0
	for (int trial = 0; trial < 20; ++trial)
	{
		const cplx a{1.0 + trial, 0.3 * trial};
		const cplx p{0.2 - 0.1 * trial, 1.0};
		const cplx da{-0.7, 0.05 * trial};
		const cplx dp = -p * da / a;
		const cplx bal = wave_action_balance(a, da, p, dp);
		CHECK(std::abs(bal) <= 1e-12 * std::abs(a * dp));
	}
}

TEST_CASE("quantization rule factor")
{
	QuantizationRule wave;
	wave.quantum = 2.0;
	CHECK(wave.factor() == cplx(0.0, 2.0));
	QuantizationRule plain{3.0, false};
	CHECK(plain.factor() == cplx(3.0, 0.0));
	QuantizationRule bad{0.0, true};
	CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("discrete momentum of a plane wave")
{
	const QuantizationRule rule; // hbar = 1, wave-like
	const double k = 1.0;
	const double dx = 0.01;
	const SpaceTimeField f = plane_wave(k, 0.0, dx, 0.01);
	const cplx p = discrete_momentum(f, rule, 5, 5);
	CHECK(p.real() == doctest::Approx(std::sin(k * dx) / dx).epsilon(1e-12));
	CHECK(std::abs(p.imag()) < 1e-12);
	CHECK(p.real() == doctest::Approx(0.9999833).epsilon(1e-7));

	const cplx p2 = discrete_momentum_squared(f, rule, 5, 5);
	CHECK(p2.real() == doctest::Approx(2.0 * (1.0 - std::cos(k * dx)) / (dx * dx)).epsilon(1e-9));
	CHECK(std::abs(p2.real() - k * k) < dx * dx);

	const SpaceTimeField flat =
	    SpaceTimeField::sample(build_grid(5, 0.0, 1.0), build_grid(5, 0.0, 1.0), [](double, double) { return cplx(2.0, 1.0); });
	CHECK(std::abs(discrete_momentum(flat, rule, 2, 2)) == 0.0);
	CHECK(std::abs(discrete_energy(flat, rule, 2, 2)) == 0.0);
}

TEST_CASE("discrete energy of a plane wave")
{
	const QuantizationRule rule;
	const double omega = 2.0;
	const double dt = 0.001;
	const SpaceTimeField f = plane_wave(0.0, omega, 0.01, dt);
	const cplx e = discrete_energy(f, rule, 5, 5);
	CHECK(e.real() == doctest::Approx(std::sin(omega * dt) / dt).epsilon(1e-10));
	CHECK(std::abs(e.real() - 2.0) < 1e-5);
	const cplx e2 = discrete_energy_squared(f, rule, 5, 5);
	CHECK(e2.real() == doctest::Approx(2.0 * (1.0 - std::cos(omega * dt)) / (dt * dt)).epsilon(1e-6));

	// E/p against the ratio of stencil symbols
	const double k = 1.5;
	const double dx = 0.02;
	const SpaceTimeField g = plane_wave(k, omega, dx, dt);
	const cplx ratio = discrete_energy(g, rule, 5, 5) / discrete_momentum(g, rule, 5, 5);
	CHECK(ratio.real() == doctest::Approx((std::sin(omega * dt) / dt) / (std::sin(k * dx) / dx)).epsilon(1e-9));
	CHECK(ratio.real() == doctest::Approx(omega / k).epsilon(1e-3));
}

TEST_CASE("quantization consistency: hbar omega = hbar^2 k^2 / 2m + V")
{
	const QuantizationRule rule;
	const double k = 1.1;
	const double v = 0.4;
	double prev = 0.0;
	for (double s : {0.04, 0.02, 0.01})
	{
		const double omega = k * k / 2.0 + v;
		const SpaceTimeField f = plane_wave(k, omega, s, s);
		const double lhs = discrete_energy(f, rule, 5, 5).real();
		const double rhs = discrete_momentum_squared(f, rule, 5, 5).real() / 2.0 + v;
		const double err = std::abs(lhs - rhs);
		if (prev > 0.0)
		{
			CHECK(prev / err == doctest::Approx(4.0).epsilon(0.1));
		}
		prev = err;
	}
}

TEST_CASE("node and boundary handling")
{
	const QuantizationRule rule;
	const SpaceTimeField node = SpaceTimeField::sample(build_grid(5, -1.0, 1.0), build_grid(3, 0.0, 1.0),
	                                                   [](double x, double) { return cplx(x, 0.0); });
	CHECK_THROWS_AS(discrete_momentum(node, rule, 2, 1), Error);
	try
	{
		(void)discrete_momentum(node, rule, 2, 1);
	}
	catch (const Error& e)
	{
		CHECK(e.kind() == ErrorKind::NodeSingularity);
	}
	CHECK_NOTHROW(discrete_momentum(node, rule, 1, 1));

	const SpaceTimeField f = plane_wave(1.0, 1.0, 0.01, 0.01);
	CHECK_THROWS_AS(discrete_momentum(f, rule, 0, 5), Error);
	CHECK_THROWS_AS(discrete_energy(f, rule, 5, 10), Error);
	const cplx edge = discrete_momentum(f, rule, 0, 5, Stencil::AllowOneSided);
	CHECK(std::isfinite(edge.real()));
	CHECK(edge.real() == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("Crank-Nicolson: eigenstate phase and unitarity")
{
	const PhysicalConstants c;
	const Hamiltonian1D h = box_hamiltonian(100, 1.0, c);
	const SchrodingerPropagator prop = assemble_schrodinger(h.grid, h.potential, c, {1e-4});
	const Spectrum s = prop.stationary();
	const WaveField psi0 = s.state(0);
	const WaveField psi = prop.propagate(psi0, 100);
	const cplx overlap = (psi0.values.adjoint() * psi.values)(0) * psi0.cell;
	CHECK(std::abs(overlap) == doctest::Approx(1.0).epsilon(1e-8));
	// scheme phase: -2 atan(E dt / 2 hbar) per step
	CHECK(std::arg(overlap) == doctest::Approx(std::remainder(100.0 * prop.scheme_phase(s.eigenvalues[0]), 2.0 * M_PI)).epsilon(1e-8));
	CHECK(std::abs(100.0 * prop.scheme_phase(s.eigenvalues[0]) + s.eigenvalues[0] * 100.0 * 1e-4) < 1e-6);

	const WaveField far = prop.propagate(gaussian_packet(h.grid, 0.5, 0.08, 20.0), 1000);
	CHECK(std::abs(std::sqrt(far.norm_squared()) - 1.0) < 1e-10);
}

TEST_CASE("Crank-Nicolson: Ehrenfest drift of a free packet")
{
	const PhysicalConstants c;
	const Hamiltonian1D h = box_hamiltonian(800, 40.0, c);
	const double k0 = 1.0;
	const SchrodingerPropagator prop = assemble_schrodinger(h.grid, h.potential, c, {0.005});
	const WaveField psi0 = gaussian_packet(h.grid, 15.0, 1.5, k0);
	auto mean_x = [&](const WaveField& w) {
		double m = 0.0;
		for (std::size_t i = 0; i < h.grid.size(); ++i)
		{
			m += std::norm(w.values(static_cast<Eigen::Index>(i))) * h.grid.point(i) * w.cell;
		}
		return m;
	};
	const double t = 400 * 0.005;
	const WaveField psi = prop.propagate(psi0, 400);
	// group velocity of the discrete dispersion sin(k s)/s, close to p0/m
	const double s = h.grid.spacing();
	CHECK((mean_x(psi) - mean_x(psi0)) / t == doctest::Approx(std::sin(k0 * s) / s).epsilon(1e-3));
	CHECK((mean_x(psi) - mean_x(psi0)) / t == doctest::Approx(k0).epsilon(5e-3));
}

TEST_CASE("accuracy budget and potential size are validated")
{
	const PhysicalConstants c;
	const Hamiltonian1D h = box_hamiltonian(100, 1.0, c);
	PropagatorOptions opts;
	opts.dt = 10.0;
	CHECK_THROWS_AS(assemble_schrodinger(h.grid, h.potential, c, opts), Error);
	try
	{
		(void)assemble_schrodinger(h.grid, h.potential, c, opts);
	}
	catch (const Error& e)
	{
		CHECK(e.kind() == ErrorKind::StepSize);
	}
	CHECK_THROWS_AS(assemble_schrodinger(h.grid, std::vector<double>(3, 0.0), c), Error);
}

TEST_CASE("conservation report: eigenstates and propagated states")
{
	PhysicalConstants c;
	c.hbar = 1.3;
	c.mass = 0.8;
	const Hamiltonian1D h = harmonic_hamiltonian(300, 20.0, 0.9, c);
	const Spectrum s = full_spectrum(h.matrix(), h.grid.spacing());
	for (std::size_t k = 0; k < 3; ++k)
	{
		const ConservationReport r = conservation_report(s.state(k), h);
		CHECK(std::abs(r.total - s.eigenvalues[k]) / s.eigenvalues[k] <= 1e-8);
		CHECK(r.q_squared == c.mass / (c.hbar * c.hbar) * r.kinetic);
		// the same identity read in complexity quanta
		CHECK(r.q_squared + r.potential_quanta == doctest::Approx(r.energy_quanta).epsilon(1e-8));
	}
	const SchrodingerPropagator prop(h, {0.01});
	WaveField psi = gaussian_packet(h.grid, 8.0, 1.0, 0.5);
	const double e0 = conservation_report(psi, h).total;
	psi = prop.propagate(psi, 1000);
	CHECK(std::abs(conservation_report(psi, h).total - e0) / e0 < 1e-8);
}
