#pragma once
#include <svmc/term.hpp>

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace svmc
{
	enum class Capability : uint8_t { Drop, Eavesdrop, Fabricate, Replay };  // sorted by name
	using CapabilitySet = std::set<Capability>;
	const char* capability_name( Capability c );
	std::optional<Capability> capability_from( std::string_view s );
	CapabilitySet all_capabilities();

	enum class StateKind : uint8_t { Plain, Start, Commit };

	struct GuardClause
	{
		Term lhs;
		Term rhs;
		bool negated = false;
		bool operator==( const GuardClause& ) const = default;
	};

	struct MessageAction
	{
		std::string channel;
		Term term;
		bool operator==( const MessageAction& ) const = default;
	};

	struct Transition
	{
		std::string target;
		std::optional<MessageAction> trigger;
		std::optional<MessageAction> emit;
		std::vector<GuardClause> guard;
		bool operator==( const Transition& ) const = default;
	};

	struct StateNode
	{
		std::string id;
		StateKind kind = StateKind::Plain;
		std::vector<std::string> on_enter_checks;
		std::vector<Transition> transitions;
		bool operator==( const StateNode& ) const = default;
	};

	struct Subject
	{
		std::string id;
		bool trusted = true;
		CapabilitySet capabilities;
		std::vector<Term> private_knowledge;  // sorted, unique
		std::vector<StateNode> states;        // first one is initial
		bool operator==( const Subject& ) const = default;

		const std::string& initial_state() const { return states.front().id; }
		int state_index( std::string_view id ) const;
	};

	struct Channel
	{
		std::string id;
		bool secure = false;
		bool operator==( const Channel& ) const = default;
	};

	// A binding variable of one subject, optionally projected: ?x.1.0
	//
	struct Slot
	{
		std::string var;
		std::vector<int> path;
		bool operator==( const Slot& ) const = default;
		std::string str() const;
		static std::optional<Slot> parse( std::string_view s );  // without leading '?'
	};

	enum class TagKind : uint8_t { Conf, Inte };

	struct ValueTag
	{
		std::string subject;
		Slot slot;
		TagKind tag = TagKind::Inte;
		bool operator==( const ValueTag& ) const = default;
	};

	enum class EffectKind : uint8_t { TrustSubject, GrantPrivate, SecureChannel };

	struct Precondition
	{
		std::string id;
		EffectKind effect = EffectKind::TrustSubject;
		std::string target;          // subject or channel
		std::optional<Term> term;    // GrantPrivate only
		bool operator==( const Precondition& ) const = default;
	};

	enum class InvariantKind : uint8_t { Confidentiality, Integrity };

	struct InvariantDecl
	{
		std::string id;
		InvariantKind kind = InvariantKind::Integrity;
		std::string subject;               // slot owner / commit subject; empty for a ground secret
		std::vector<Slot> slots;           // protected slots (integrity) or the secret slot
		std::optional<Term> secret;        // confidentiality of a ground term
		std::vector<GuardClause> expect;   // relational integrity clauses
		std::string description;
		bool operator==( const InvariantDecl& ) const = default;
	};

	enum class Mechanism : uint8_t { Fabrication, Replay, Disclosure };
	const char* mechanism_name( Mechanism m );
	std::optional<Mechanism> mechanism_from( std::string_view s );

	struct ExpectedVerdict
	{
		bool pass = true;
		std::string invariant;
		std::optional<Mechanism> mechanism;
		bool operator==( const ExpectedVerdict& ) const = default;
	};

	enum class Scope : uint8_t { External, Internal };

	struct ProtocolModel
	{
		std::string name;
		std::string phase;
		Scope scope = Scope::External;
		uint32_t sessions = 1;
		std::vector<std::string> notes;
		std::vector<Term> public_terms;  // sorted, unique
		std::vector<Channel> channels;
		std::vector<Subject> subjects;
		std::vector<ValueTag> tags;
		std::vector<Precondition> preconditions;
		std::vector<InvariantDecl> invariants;
		std::optional<ExpectedVerdict> expected;
		std::optional<std::vector<std::string>> expected_necessary;
		bool operator==( const ProtocolModel& ) const = default;

		int subject_index( std::string_view id ) const;
		int channel_index( std::string_view id ) const;
		const InvariantDecl* invariant( std::string_view id ) const;
	};

	void canonicalize( std::vector<Term>& terms );

	struct Diagnostic
	{
		std::string code;
		std::string location;   // entity path, e.g. "subject customer/state S_WAIT"
		std::string message;
		std::string file;
		int line = 0;
		int column = 0;
		std::string str() const;
	};

	inline constexpr int kMaxTermDepth = 8;

	std::vector<Diagnostic> validate( const ProtocolModel& m );

	// Throws std::invalid_argument on unknown ids.
	//
	ProtocolModel apply_preconditions( const ProtocolModel& m, const std::set<std::string>& enabled );
	std::set<std::string> precondition_ids( const ProtocolModel& m );

	// Helpers shared by engine and invariants.
	//
	int start_subject( const ProtocolModel& m );
	int commit_subject( const ProtocolModel& m );
	std::vector<std::string> channel_endpoints( const ProtocolModel& m, std::string_view channel );
	bool is_inte_tagged( const ProtocolModel& m, std::string_view subject, std::string_view var );
};
