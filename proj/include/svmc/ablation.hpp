#pragma once
#include <svmc/invariants.hpp>

#include <set>
#include <string>
#include <vector>

namespace svmc
{
	enum class AblationMode : uint8_t { LeaveOneOut, Exhaustive };
	inline constexpr size_t kMaxExhaustivePreconditions = 12;

	enum class Necessity : uint8_t { Necessary, Removable, Inconclusive };
	const char* necessity_name( Necessity n );

	struct AblationRun
	{
		std::set<std::string> enabled;
		VerdictKind verdict = VerdictKind::Pass;
		size_t states = 0;
		std::vector<Violation> violations;
	};

	struct PreconditionResult
	{
		std::string id;
		Necessity necessity = Necessity::Removable;
		std::optional<Violation> witness;
	};

	struct AblationReport
	{
		bool baseline_pass = false;
		AblationRun baseline;
		std::vector<PreconditionResult> preconditions;
		std::vector<std::set<std::string>> minimal_sets;  // exhaustive mode only
		std::vector<AblationRun> runs;
	};

	// Throws ModelError E_TOO_MANY_PRECONDITIONS in exhaustive mode for more than 12.
	//
	AblationReport ablate( const ProtocolModel& m, AblationMode mode, const EngineLimits& limits = {} );
};
