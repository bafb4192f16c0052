#include <svmc/model.hpp>
#include <svmc/knowledge.hpp>

#include <algorithm>
#include <charconv>
#include <map>
#include <stdexcept>

namespace svmc
{
	const char* capability_name( Capability c )
	{
		switch ( c )
		{
			case Capability::Drop: return "drop";
			case Capability::Eavesdrop: return "eavesdrop";
			case Capability::Fabricate: return "fabricate";
			case Capability::Replay: return "replay";
		}
		return "?";
	}

	std::optional<Capability> capability_from( std::string_view s )
	{
		for ( auto c : all_capabilities() )
			if ( s == capability_name( c ) ) return c;
		return std::nullopt;
	}

	CapabilitySet all_capabilities() { return { Capability::Drop, Capability::Eavesdrop, Capability::Fabricate, Capability::Replay }; }

	const char* mechanism_name( Mechanism m )
	{
		switch ( m )
		{
			case Mechanism::Fabrication: return "fabrication";
			case Mechanism::Replay: return "replay";
			case Mechanism::Disclosure: return "disclosure";
		}
		return "?";
	}

	std::optional<Mechanism> mechanism_from( std::string_view s )
	{
		for ( auto m : { Mechanism::Fabrication, Mechanism::Replay, Mechanism::Disclosure } )
			if ( s == mechanism_name( m ) ) return m;
		return std::nullopt;
	}

	int Subject::state_index( std::string_view id ) const
	{
		for ( size_t i = 0; i < states.size(); i++ )
			if ( states[ i ].id == id ) return int( i );
		return -1;
	}

	std::string Slot::str() const
	{
		std::string s = var;
		for ( int i : path ) s += "." + std::to_string( i );
		return s;
	}

	std::optional<Slot> Slot::parse( std::string_view s )
	{
		Slot r;
		auto dot = s.find( '.' );
		r.var = std::string( s.substr( 0, dot ) );
		if ( r.var.empty() ) return std::nullopt;
		while ( dot != std::string_view::npos )
		{
			s = s.substr( dot + 1 );
			dot = s.find( '.' );
			auto part = s.substr( 0, dot );
			int v = 0;
			auto [ p, ec ] = std::from_chars( part.data(), part.data() + part.size(), v );
			if ( ec != std::errc{} || p != part.data() + part.size() || v < 0 || v > 255 ) return std::nullopt;
			r.path.push_back( v );
		}
		return r;
	}

	int ProtocolModel::subject_index( std::string_view id ) const
	{
		for ( size_t i = 0; i < subjects.size(); i++ )
			if ( subjects[ i ].id == id ) return int( i );
		return -1;
	}

	int ProtocolModel::channel_index( std::string_view id ) const
	{
		for ( size_t i = 0; i < channels.size(); i++ )
			if ( channels[ i ].id == id ) return int( i );
		return -1;
	}

	const InvariantDecl* ProtocolModel::invariant( std::string_view id ) const
	{
		for ( auto& d : invariants )
			if ( d.id == id ) return &d;
		return nullptr;
	}

	void canonicalize( std::vector<Term>& terms )
	{
		std::sort( terms.begin(), terms.end() );
		terms.erase( std::unique( terms.begin(), terms.end() ), terms.end() );
	}

	std::string Diagnostic::str() const
	{
		std::string s;
		if ( !file.empty() || line )
			s += ( file.empty() ? "<input>" : file ) + ":" + std::to_string( line ) + ":" + std::to_string( column ) + ": ";
		s += code + ": " + message;
		if ( !location.empty() ) s += " [" + location + "]";
		return s;
	}

	int start_subject( const ProtocolModel& m )
	{
		for ( size_t i = 0; i < m.subjects.size(); i++ )
			for ( auto& s : m.subjects[ i ].states )
				if ( s.kind == StateKind::Start ) return int( i );
		return -1;
	}

	int commit_subject( const ProtocolModel& m )
	{
		for ( size_t i = 0; i < m.subjects.size(); i++ )
			for ( auto& s : m.subjects[ i ].states )
				if ( s.kind == StateKind::Commit ) return int( i );
		return -1;
	}

	std::vector<std::string> channel_endpoints( const ProtocolModel& m, std::string_view channel )
	{
		std::vector<std::string> out;
		for ( auto& s : m.subjects )
		{
			bool uses = false;
			for ( auto& st : s.states )
				for ( auto& t : st.transitions )
					uses = uses || ( t.trigger && t.trigger->channel == channel ) || ( t.emit && t.emit->channel == channel );
			if ( uses ) out.push_back( s.id );
		}
		return out;
	}

	bool is_inte_tagged( const ProtocolModel& m, std::string_view subject, std::string_view var )
	{
		for ( auto& t : m.tags )
			if ( t.tag == TagKind::Inte && t.subject == subject && t.slot.var == var ) return true;
		return false;
	}

	namespace
	{
		struct Checker
		{
			const ProtocolModel& m;
			std::vector<Diagnostic> out;

			void diag( std::string code, std::string loc, std::string msg )
			{
				out.push_back( { std::move( code ), std::move( loc ), std::move( msg ) } );
			}

			void term_depth( const Term& t, const std::string& loc )
			{
				if ( t.depth() > kMaxTermDepth )
					diag( "E_TERM_DEPTH", loc, "term nesting " + std::to_string( t.depth() ) + " exceeds " + std::to_string( kMaxTermDepth ) );
			}

			// Vars under hash/func or in a key slot cannot be bound by matching.
			//
			void non_invertible( const Term& t, const std::vector<std::string>& bound, bool opaque, const std::string& loc )
			{
				if ( t.ground() ) return;
				if ( t.kind() == TermKind::Var )
				{
					if ( opaque && std::find( bound.begin(), bound.end(), t.name() ) == bound.end() )
						diag( "E_NONINVERTIBLE", loc, "variable ?" + t.name() + " cannot be bound through a hash, function or key position" );
					return;
				}
				bool op = opaque || t.kind() == TermKind::Hash || t.kind() == TermKind::Func;
				auto ch = t.children();
				for ( size_t i = 0; i < ch.size(); i++ )
				{
					bool key_pos = ( t.kind() == TermKind::Enc || t.kind() == TermKind::Sig ) && i == 1;
					non_invertible( ch[ i ], bound, op || key_pos, loc );
				}
			}

			void available( const Subject& s, const TermSet& own, const Term& t, const std::string& loc )
			{
				for_each_subterm( t, [ & ]( const Term& x )
				{
					if ( !x.is_leaf() || x.kind() == TermKind::Var ) return;
					if ( x.kind() == TermKind::PubKey ) return;
					if ( x.kind() == TermKind::Nonce && x.owner() == s.id ) return;
					if ( own.count( x ) ) return;
					diag( "E_UNAVAILABLE", loc, "subject " + s.id + " sends " + to_string( x ) + " which it does not hold" );
				} );
			}

			void subject( const Subject& s )
			{
				std::string sloc = "subject " + s.id;
				if ( s.states.empty() )
				{
					diag( "E_NO_STATES", sloc, "subject has no states" );
					return;
				}
				if ( s.trusted && !s.capabilities.empty() )
					diag( "E_TRUSTED_CAPS", sloc, "trusted subject carries attacker capabilities" );

				TermSet own;
				for ( auto& k : s.private_knowledge )
				{
					term_depth( k, sloc );
					if ( !k.ground() ) diag( "E_UNBOUND_VAR", sloc, "knowledge term contains a variable" );
					for_each_subterm( k, [ & ]( const Term& x ) { own.insert( x ); } );
				}
				for ( auto& k : m.public_terms )
					for_each_subterm( k, [ & ]( const Term& x ) { own.insert( x ); } );

				std::set<std::string> ids;
				for ( auto& st : s.states )
					if ( !ids.insert( st.id ).second ) diag( "E_DUP_ID", sloc, "duplicate state " + st.id );

				// definitely-bound variables on entry to each state
				const size_t n = s.states.size();
				std::vector<std::optional<std::set<std::string>>> in( n );
				in[ 0 ] = std::set<std::string>{};
				for ( bool changed = true; changed; )
				{
					changed = false;
					for ( size_t i = 0; i < n; i++ )
					{
						if ( !in[ i ] ) continue;
						for ( auto& tr : s.states[ i ].transitions )
						{
							int j = s.state_index( tr.target );
							if ( j < 0 ) continue;
							std::set<std::string> outv = *in[ i ];
							if ( tr.trigger )
							{
								std::vector<std::string> vs;
								collect_vars( tr.trigger->term, vs );
								outv.insert( vs.begin(), vs.end() );
							}
							if ( !in[ j ] ) { in[ j ] = outv; changed = true; continue; }
							std::set<std::string> meet;
							std::set_intersection( in[ j ]->begin(), in[ j ]->end(), outv.begin(), outv.end(), std::inserter( meet, meet.end() ) );
							if ( meet != *in[ j ] ) { in[ j ] = std::move( meet ); changed = true; }
						}
					}
				}

				for ( size_t i = 0; i < n; i++ )
				{
					auto& st = s.states[ i ];
					std::string stloc = sloc + "/state " + st.id;
					for ( size_t ti = 0; ti < st.transitions.size(); ti++ )
					{
						auto& tr = st.transitions[ ti ];
						std::string tloc = stloc + "/transition " + std::to_string( ti );
						if ( s.state_index( tr.target ) < 0 )
							diag( "E_UNKNOWN_STATE", tloc, "unknown target state " + tr.target );
						std::set<std::string> bound = in[ i ] ? *in[ i ] : std::set<std::string>{};
						if ( tr.trigger )
						{
							if ( m.channel_index( tr.trigger->channel ) < 0 )
								diag( "E_UNKNOWN_CHANNEL", tloc, "unknown channel " + tr.trigger->channel );
							term_depth( tr.trigger->term, tloc );
							non_invertible( tr.trigger->term, { bound.begin(), bound.end() }, false, tloc );
							std::vector<std::string> vs;
							collect_vars( tr.trigger->term, vs );
							bound.insert( vs.begin(), vs.end() );
						}
						auto need = [ & ]( const Term& t )
						{
							std::vector<std::string> vs;
							collect_vars( t, vs );
							for ( auto& v : vs )
								if ( !bound.count( v ) && in[ i ] )
									diag( "E_UNBOUND_VAR", tloc, "variable ?" + v + " is not bound on every path" );
						};
						if ( tr.emit )
						{
							if ( m.channel_index( tr.emit->channel ) < 0 )
								diag( "E_UNKNOWN_CHANNEL", tloc, "unknown channel " + tr.emit->channel );
							term_depth( tr.emit->term, tloc );
							need( tr.emit->term );
							available( s, own, tr.emit->term, tloc );
						}
						for ( auto& g : tr.guard )
						{
							term_depth( g.lhs, tloc );
							term_depth( g.rhs, tloc );
							need( g.lhs );
							need( g.rhs );
						}
					}
					for ( auto& c : st.on_enter_checks )
						if ( !m.invariant( c ) ) diag( "E_UNKNOWN_INVARIANT", stloc, "check names unknown invariant " + c );
				}
			}

			std::set<std::string> pattern_vars( const Subject& s )
			{
				std::set<std::string> r;
				for ( auto& st : s.states )
					for ( auto& tr : st.transitions )
						if ( tr.trigger )
						{
							std::vector<std::string> vs;
							collect_vars( tr.trigger->term, vs );
							r.insert( vs.begin(), vs.end() );
						}
				return r;
			}

			void run()
			{
				if ( m.subjects.empty() )
				{
					diag( "E_EMPTY_MODEL", "model", "model declares no subjects" );
					return;
				}
				if ( m.name.empty() ) diag( "E_SYNTAX", "model", "model has no name" );
				if ( m.sessions < 1 || m.sessions > 8 ) diag( "E_BAD_SESSIONS", "model", "sessions must be in 1..8" );

				std::set<std::string> ids;
				for ( auto& c : m.channels )
					if ( !ids.insert( "c:" + c.id ).second ) diag( "E_DUP_ID", "channel " + c.id, "duplicate channel" );
				for ( auto& s : m.subjects )
					if ( !ids.insert( "s:" + s.id ).second ) diag( "E_DUP_ID", "subject " + s.id, "duplicate subject" );
				for ( auto& p : m.preconditions )
					if ( !ids.insert( "p:" + p.id ).second ) diag( "E_DUP_ID", "precondition " + p.id, "duplicate precondition" );
				for ( auto& d : m.invariants )
					if ( !ids.insert( "i:" + d.id ).second ) diag( "E_DUP_ID", "invariant " + d.id, "duplicate invariant" );
				for ( auto& t : m.public_terms )
					if ( !t.ground() ) diag( "E_UNBOUND_VAR", "public", "public term contains a variable" );

				for ( auto& s : m.subjects ) subject( s );

				int starts = 0, commits = 0;
				for ( auto& s : m.subjects )
					for ( auto& st : s.states )
					{
						starts += st.kind == StateKind::Start;
						commits += st.kind == StateKind::Commit;
					}
				if ( starts == 0 ) diag( "E_NO_START", "model", "no start state" );
				if ( starts > 1 ) diag( "E_MULTI_START", "model", std::to_string( starts ) + " start states" );
				if ( commits == 0 ) diag( "E_NO_COMMIT", "model", "no commit state" );
				if ( commits > 1 ) diag( "E_MULTI_COMMIT", "model", std::to_string( commits ) + " commit states" );

				for ( auto& t : m.tags )
				{
					std::string loc = "tag " + t.subject + " ?" + t.slot.str();
					int si = m.subject_index( t.subject );
					if ( si < 0 ) { diag( "E_BAD_TAG_PATH", loc, "unknown subject " + t.subject ); continue; }
					if ( !pattern_vars( m.subjects[ si ] ).count( t.slot.var ) )
						diag( "E_BAD_TAG_PATH", loc, "no message field ?" + t.slot.var + " is received by " + t.subject );
				}

				for ( auto& p : m.preconditions )
				{
					std::string loc = "precondition " + p.id;
					switch ( p.effect )
					{
						case EffectKind::TrustSubject:
						{
							int si = m.subject_index( p.target );
							if ( si < 0 ) diag( "E_BAD_PRECONDITION", loc, "unknown subject " + p.target );
							else if ( !m.subjects[ si ].trusted ) diag( "E_BAD_PRECONDITION", loc, "subject " + p.target + " is not trusted in the declared model" );
							break;
						}
						case EffectKind::GrantPrivate:
						{
							int si = m.subject_index( p.target );
							if ( si < 0 ) { diag( "E_BAD_PRECONDITION", loc, "unknown subject " + p.target ); break; }
							auto& k = m.subjects[ si ].private_knowledge;
							if ( !p.term || std::find( k.begin(), k.end(), *p.term ) == k.end() )
								diag( "E_BAD_PRECONDITION", loc, "term is not private knowledge of " + p.target );
							break;
						}
						case EffectKind::SecureChannel:
						{
							int ci = m.channel_index( p.target );
							if ( ci < 0 ) diag( "E_BAD_PRECONDITION", loc, "unknown channel " + p.target );
							else if ( !m.channels[ ci ].secure ) diag( "E_BAD_PRECONDITION", loc, "channel " + p.target + " is not secure in the declared model" );
							break;
						}
					}
				}

				int finisher = commit_subject( m );
				for ( auto& d : m.invariants )
				{
					std::string loc = "invariant " + d.id;
					if ( d.kind == InvariantKind::Confidentiality )
					{
						if ( d.secret )
						{
							if ( !d.secret->ground() ) diag( "E_BAD_INVARIANT", loc, "secret term contains a variable" );
							continue;
						}
						if ( d.slots.size() != 1 ) { diag( "E_BAD_INVARIANT", loc, "confidentiality needs one slot or a term" ); continue; }
					}
					int si = m.subject_index( d.subject );
					if ( si < 0 ) { diag( "E_BAD_INVARIANT", loc, "unknown subject " + d.subject ); continue; }
					if ( d.kind == InvariantKind::Integrity && si != finisher && finisher >= 0 )
						diag( "E_BAD_INVARIANT", loc, "integrity must be declared on the finisher subject" );
					if ( d.kind == InvariantKind::Integrity && d.slots.empty() )
						diag( "E_BAD_INVARIANT", loc, "integrity invariant protects no slot" );
					auto pv = pattern_vars( m.subjects[ si ] );
					for ( auto& sl : d.slots )
					{
						if ( !pv.count( sl.var ) ) { diag( "E_BAD_TAG_PATH", loc, "?" + sl.var + " is not a received field of " + d.subject ); continue; }
						bool tagged = false;
						auto want = d.kind == InvariantKind::Integrity ? TagKind::Inte : TagKind::Conf;
						for ( auto& t : m.tags ) tagged = tagged || ( t.subject == d.subject && t.slot == sl && t.tag == want );
						if ( !tagged ) diag( "E_UNTAGGED_SLOT", loc, "slot ?" + sl.str() + " carries no matching tag" );
					}
					for ( auto& g : d.expect )
					{
						std::vector<std::string> vs;
						collect_vars( g.lhs, vs );
						collect_vars( g.rhs, vs );
						for ( auto& v : vs )
							if ( !pv.count( v ) ) diag( "E_UNBOUND_VAR", loc, "expect clause uses unbound ?" + v );
					}
				}

				if ( m.expected && !m.expected->pass && !m.invariant( m.expected->invariant ) )
					diag( "E_UNKNOWN_INVARIANT", "expect", "expected failure names unknown invariant " + m.expected->invariant );
				if ( m.expected_necessary )
					for ( auto& id : *m.expected_necessary )
					{
						bool found = false;
						for ( auto& p : m.preconditions ) found = found || p.id == id;
						if ( !found ) diag( "E_BAD_PRECONDITION", "expect-necessary", "unknown precondition " + id );
					}
			}
		};
	};

	std::vector<Diagnostic> validate( const ProtocolModel& m )
	{
		Checker c{ m, {} };
		c.run();
		return std::move( c.out );
	}

	std::set<std::string> precondition_ids( const ProtocolModel& m )
	{
		std::set<std::string> r;
		for ( auto& p : m.preconditions ) r.insert( p.id );
		return r;
	}

	ProtocolModel apply_preconditions( const ProtocolModel& m, const std::set<std::string>& enabled )
	{
		auto declared = precondition_ids( m );
		for ( auto& id : enabled )
			if ( !declared.count( id ) ) throw std::invalid_argument( "unknown precondition id " + id );

		ProtocolModel r = m;
		r.preconditions.clear();
		r.expected.reset();  // expectations describe the full model only
		r.expected_necessary.reset();
		for ( auto& p : m.preconditions )
		{
			if ( enabled.count( p.id ) )
			{
				r.preconditions.push_back( p );
				continue;
			}
			// another enabled precondition may still grant the same assumption
			bool still = false;
			for ( auto& q : m.preconditions )
				still = still || ( enabled.count( q.id ) && q.effect == p.effect && q.target == p.target && q.term == p.term );
			if ( still ) continue;
			switch ( p.effect )
			{
				case EffectKind::TrustSubject:
				{
					auto& s = r.subjects[ r.subject_index( p.target ) ];
					s.trusted = false;
					s.capabilities = all_capabilities();
					break;
				}
				case EffectKind::GrantPrivate:
				{
					auto& k = r.subjects[ r.subject_index( p.target ) ].private_knowledge;
					k.erase( std::remove( k.begin(), k.end(), *p.term ), k.end() );
					r.public_terms.push_back( *p.term );
					canonicalize( r.public_terms );
					break;
				}
				case EffectKind::SecureChannel:
					r.channels[ r.channel_index( p.target ) ].secure = false;
					break;
			}
		}
		return r;
	}
};
