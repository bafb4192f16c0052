#pragma once
#include <svmc/knowledge.hpp>
#include <svmc/model.hpp>

#include <array>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace svmc
{
	enum class VariantTag : uint8_t { Pristine, Replayed, Fabricated };
	const char* variant_name( VariantTag t );
	inline VariantTag join( VariantTag a, VariantTag b ) { return a < b ? b : a; }

	struct PathTag
	{
		std::vector<int> path;
		VariantTag tag = VariantTag::Pristine;
		bool operator==( const PathTag& ) const = default;
		auto operator<=>( const PathTag& ) const = default;
	};

	struct Message
	{
		Term term;
		std::vector<PathTag> tags;  // non-pristine positions only, sorted
		bool operator==( const Message& ) const = default;
	};

	struct Binding
	{
		std::string var;
		Term value;
		VariantTag tag = VariantTag::Pristine;
		bool operator==( const Binding& ) const = default;
	};

	struct SubjectState
	{
		int state = 0;
		std::vector<Binding> bindings;  // sorted by var
		bool operator==( const SubjectState& ) const = default;
		const Binding* find( std::string_view var ) const;
	};

	struct GlobalState
	{
		uint32_t session = 1;
		std::vector<SubjectState> subjects;
		std::vector<std::vector<Message>> channels;
		std::vector<Term> observed;  // replay store, sorted
		std::shared_ptr<const KnowledgeSet> knowledge;  // closure of attacker base + observed

		bool operator==( const GlobalState& o ) const
		{
			return session == o.session && subjects == o.subjects && channels == o.channels && observed == o.observed;
		}
	};

	using Digest = std::array<uint8_t, 16>;
	std::string hex( const Digest& d );

	// Canonical byte encoding; equal states encode identically.
	//
	std::string encode( const GlobalState& s );
	Digest fingerprint( const GlobalState& s );

	enum class StepKind : uint8_t { Subject, Inject, Drop, Restart };

	struct Step
	{
		StepKind kind = StepKind::Subject;
		int subject = -1;
		int state = -1;
		int transition = -1;
		int channel = -1;
		std::optional<Message> message;
		std::string text;
	};

	struct TraceEntry
	{
		Digest fingerprint{};
		std::string step;
	};

	struct Trace
	{
		std::vector<TraceEntry> entries;  // entries[0] is the initial state, step ""
		std::vector<Step> steps;          // steps[i] leads into entries[i + 1]
		GlobalState terminal;
	};

	struct Violation
	{
		std::string invariant;
		Mechanism mechanism = Mechanism::Fabrication;
		std::string slot;
		std::string explanation;
		Trace trace;
	};

	enum class ResourceStatus : uint8_t { Completed, BudgetExceeded };

	struct SearchResult
	{
		std::vector<Trace> commit_paths;   // first few, BFS order
		size_t commit_state_count = 0;
		size_t reachable_state_count = 0;
		size_t transition_count = 0;
		size_t deadlock_count = 0;
		size_t max_depth_seen = 0;
		std::vector<Violation> violations;
		ResourceStatus resource_status = ResourceStatus::Completed;
		std::string resource_note;
	};

	struct EngineLimits
	{
		size_t max_states = 1000000;
		size_t max_depth = 200;
		uint32_t sessions = 0;  // 0: take from the model
		int fab_depth = kDefaultFabDepth;
		unsigned workers = 1;
		bool dedup = true;
		bool all_violations = false;  // otherwise stop after the first depth with a violation
		size_t closure_cap = kDefaultClosureCap;
		size_t keep_commit_paths = 16;
	};

	struct ModelError : std::runtime_error
	{
		std::string code;
		ModelError( std::string c, const std::string& msg ) : std::runtime_error( msg ), code( std::move( c ) ) {}
	};

	// Breach found at one state, before a trace is attached.
	//
	struct Finding
	{
		std::string invariant;
		Mechanism mechanism = Mechanism::Fabrication;
		std::string slot;
		std::string explanation;
	};

	class Engine
	{
	public:
		// Throws ModelError on an invalid model or a benign run that cannot commit.
		//
		Engine( const ProtocolModel& m, EngineLimits limits = {} );
		~Engine();

		const ProtocolModel& model() const { return m_; }
		const EngineLimits& limits() const { return lim_; }
		uint32_t sessions() const { return sessions_; }
		int finisher() const { return finisher_; }

		GlobalState initial() const;
		std::vector<std::pair<Step, GlobalState>> successors( const GlobalState& s ) const;

		// Breaches visible in `s`, reached through `via` (integrity fires on entry).
		//
		std::vector<Finding> check( const GlobalState& s, const Step* via ) const;

		SearchResult explore() const;

		// Re-executes a trace by fingerprint; nothing if a step cannot be matched.
		//
		std::optional<GlobalState> replay( const Trace& t ) const;

		const Trace& benign( uint32_t session = 1 ) const { return benign_.at( session - 1 ); }

		// Values of the honest run, used as the reference for tagging.
		//
		const std::vector<Binding>* genuine_bindings( int subject, int state, uint32_t session ) const;
		const Term* genuine_message( int subject, int state, int transition, uint32_t session ) const;

		Term value_of( const GlobalState& s, int subject, const Slot& slot, VariantTag* tag = nullptr ) const;
		bool bound( const GlobalState& s, int subject, const Slot& slot ) const;

		const std::vector<Term>& attacker_base() const { return base_; }
		const Universe& universe() const { return *universe_; }
		bool channel_fifo( int c ) const { return fifo_[ c ]; }
		bool channel_cap( int c, Capability k ) const;

		std::string describe( const GlobalState& s ) const;

		struct Impl;

	private:
		ProtocolModel m_;
		EngineLimits lim_;
		uint32_t sessions_ = 1;
		int finisher_ = -1;
		std::vector<Term> base_;
		std::shared_ptr<const Universe> universe_;
		std::vector<bool> fifo_;
		std::vector<uint8_t> caps_;
		std::vector<Trace> benign_;
		std::map<std::tuple<int, int, uint32_t>, std::vector<Binding>> genuine_b_;
		std::map<std::tuple<int, int, int, uint32_t>, Term> genuine_m_;
		std::unique_ptr<Impl> impl_;
	};

	SearchResult explore( const ProtocolModel& m, const EngineLimits& limits = {} );

	// Honest execution of session 1. Throws ModelError E_NO_BENIGN_COMMIT.
	//
	Trace benign_run( const ProtocolModel& m );
};
