#pragma once
#include <svmc/engine.hpp>

#include <optional>
#include <string>
#include <vector>

namespace svmc
{
	std::optional<Finding> check_confidentiality( const Engine& e, const GlobalState& s, const InvariantDecl& d );

	// Evaluated for the declaring subject in its current state.
	//
	std::vector<Finding> check_integrity( const Engine& e, const GlobalState& s, const InvariantDecl& d );

	enum class VerdictKind : uint8_t { Pass, Fail, Inconclusive };
	const char* verdict_name( VerdictKind k );

	struct Verdict
	{
		VerdictKind kind = VerdictKind::Pass;
		std::vector<Violation> violations;
		SearchResult search;
		std::string note;
		uint32_t sessions = 1;
	};

	// Throws ModelError for invalid models or a failed honest run.
	//
	Verdict verify( const ProtocolModel& m, const EngineLimits& limits = {} );

	// Which rejection mechanism covers each protected slot.
	//
	enum class Discharge : uint8_t { KnownGood, CertChain, Freshness, SignatureCoverage, SelfConsistency, None };
	const char* discharge_name( Discharge d );

	struct SlotDischarge
	{
		std::string slot;
		Discharge mechanism = Discharge::None;
		std::string detail;
	};

	// `s` must have the invariant's subject in a state where its slots are bound.
	//
	std::vector<SlotDischarge> discharge_record( const Engine& e, const GlobalState& s, const InvariantDecl& d );

	// Convenience: audit at the end of the honest run of session 1.
	//
	std::vector<SlotDischarge> discharge_record( const ProtocolModel& m, const std::string& invariant_id );
};
