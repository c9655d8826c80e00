#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace epdyn
{

enum class ErrorKind
{
	Config,
	OracleScale,
	Normalization,
	Partition,
	PoleProximity,
	NodeSingularity,
	Domain,
	StepSize,
	Stability,
	BlowUp,
	Io,
};

const char* to_string(ErrorKind kind) noexcept;

/// Base of every error thrown by the library. The kind selects the exit code
/// reported by the CLI and the status returned through the C API.
class Error : public std::runtime_error
{
public:
	Error(ErrorKind kind, const std::string& what)
		: std::runtime_error(what), kind_(kind)
	{
	}

	[[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
	ErrorKind kind_;
};

class PoleProximityError : public Error
{
public:
	PoleProximityError(double energy, double nearest_pole);

	[[nodiscard]] double energy() const noexcept { return energy_; }
	[[nodiscard]] double nearest_pole() const noexcept { return pole_; }

private:
	double energy_;
	double pole_;
};

class StabilityError : public Error
{
public:
	StabilityError(double dt, double suggested_dt);

	[[nodiscard]] double suggested_dt() const noexcept { return suggested_; }

private:
	double suggested_;
};

class BlowUpError : public Error
{
public:
	explicit BlowUpError(std::size_t step);

	[[nodiscard]] std::size_t step() const noexcept { return step_; }

private:
	std::size_t step_;
};

} // namespace epdyn
