#include "epdyn/errors.hpp"

#include <cstdio>

namespace epdyn
{

const char* to_string(ErrorKind kind) noexcept
{
	switch (kind)
	{
	case ErrorKind::Config: return "configuration error";
	case ErrorKind::OracleScale: return "oracle-scale error";
	case ErrorKind::Normalization: return "normalization error";
	case ErrorKind::Partition: return "partition error";
	case ErrorKind::PoleProximity: return "pole-proximity error";
	case ErrorKind::NodeSingularity: return "node-singularity error";
	case ErrorKind::Domain: return "domain error";
	case ErrorKind::StepSize: return "step-size error";
	case ErrorKind::Stability: return "stability error";
	case ErrorKind::BlowUp: return "blow-up error";
	case ErrorKind::Io: return "I/O error";
	}
	return "unknown error";
}

namespace
{

std::string format_double(const char* fmt, double a, double b)
{
	char buf[160];
	std::snprintf(buf, sizeof buf, fmt, a, b);
	return buf;
}

} // namespace

PoleProximityError::PoleProximityError(double energy, double nearest_pole)
	: Error(ErrorKind::PoleProximity,
	        format_double("energy %.17g lies within the pole guard of H_QQ eigenvalue %.17g",
	                      energy, nearest_pole)),
	  energy_(energy), pole_(nearest_pole)
{
}

StabilityError::StabilityError(double dt, double suggested_dt)
	: Error(ErrorKind::Stability,
	        format_double("time step %.6g exceeds the stability budget; suggested dt <= %.6g", dt,
	                      suggested_dt)),
	  suggested_(suggested_dt)
{
}

BlowUpError::BlowUpError(std::size_t step)
	: Error(ErrorKind::BlowUp, "non-finite value encountered at step " + std::to_string(step)),
	  step_(step)
{
}

} // namespace epdyn
