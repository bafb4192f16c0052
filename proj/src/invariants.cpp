#include <svmc/invariants.hpp>

#include <algorithm>
#include <functional>
#include <set>

namespace svmc
{
	const char* verdict_name( VerdictKind k )
	{
		switch ( k )
		{
			case VerdictKind::Pass: return "pass";
			case VerdictKind::Fail: return "fail";
			case VerdictKind::Inconclusive: return "inconclusive";
		}
		return "?";
	}

	const char* discharge_name( Discharge d )
	{
		switch ( d )
		{
			case Discharge::KnownGood: return "known-good";
			case Discharge::CertChain: return "cert-chain";
			case Discharge::Freshness: return "freshness";
			case Discharge::SignatureCoverage: return "signature-coverage";
			case Discharge::SelfConsistency: return "self-consistency";
			case Discharge::None: return "none";
		}
		return "?";
	}

	static Term bound_subst( const Term& t, const SubjectState& ss, uint32_t session )
	{
		return instantiate( substitute( t, [ & ]( const std::string& v ) -> std::optional<Term>
		{
			if ( auto* b = ss.find( v ) ) return b->value;
			return std::nullopt;
		} ), session );
	}

	std::optional<Finding> check_confidentiality( const Engine& e, const GlobalState& s, const InvariantDecl& d )
	{
		if ( !s.knowledge ) return std::nullopt;
		auto& k = *s.knowledge;
		if ( d.secret )
		{
			for ( uint32_t sess = 1; sess <= s.session; sess++ )
			{
				Term t = instantiate( *d.secret, sess );
				if ( k.can_derive( t ) )
					return Finding{ d.id, Mechanism::Disclosure, to_string( t ), "attacker derives " + to_string( t ) };
			}
			return std::nullopt;
		}
		int i = e.model().subject_index( d.subject );
		auto& slot = d.slots.front();
		if ( !e.bound( s, i, slot ) ) return std::nullopt;
		VariantTag tag;
		Term v = e.value_of( s, i, slot, &tag );
		if ( tag != VariantTag::Pristine ) return std::nullopt;  // attacker-supplied to begin with
		if ( k.can_derive( v ) )
			return Finding{ d.id, Mechanism::Disclosure, d.subject + ".?" + slot.str(), "attacker derives " + to_string( v ) };
		return std::nullopt;
	}

	std::vector<Finding> check_integrity( const Engine& e, const GlobalState& s, const InvariantDecl& d )
	{
		std::vector<Finding> out;
		auto& m = e.model();
		int i = m.subject_index( d.subject );
		auto& ss = s.subjects[ i ];
		auto& sub = m.subjects[ i ];

		VariantTag worst = VariantTag::Pristine;
		std::string worst_slot;
		for ( auto& sl : d.slots )
		{
			if ( !e.bound( s, i, sl ) ) continue;
			VariantTag t;
			e.value_of( s, i, sl, &t );
			if ( t > worst ) { worst = t; worst_slot = sl.str(); }
		}

		if ( !d.expect.empty() )
		{
			// relational invariants apply only on paths that bound every protected slot
			for ( auto& sl : d.slots )
				if ( !e.bound( s, i, sl ) ) return out;
			for ( auto& c : d.expect )
			{
				std::optional<Term> l, r;
				try { l = bound_subst( c.lhs, ss, s.session ); r = bound_subst( c.rhs, ss, s.session ); }
				catch ( const std::invalid_argument& ) { l = c.lhs; r = c.rhs; }
				bool holds = l->ground() && r->ground() && ( ( *l == *r ) != c.negated );
				if ( holds ) continue;
				Finding f;
				f.invariant = d.id;
				f.mechanism = worst == VariantTag::Replayed ? Mechanism::Replay : Mechanism::Fabrication;
				f.slot = d.subject + ".?" + ( worst_slot.empty() ? d.slots.front().str() : worst_slot );
				f.explanation = sub.id + " accepted " + to_string( *l, sub.id ) + ( c.negated ? " == " : " != " ) + to_string( *r, sub.id ) +
				                ( worst == VariantTag::Pristine ? " (untainted)" : std::string( " via " ) + variant_name( worst ) + " value" );
				out.push_back( std::move( f ) );
				break;
			}
			return out;
		}

		auto* genuine = e.genuine_bindings( i, ss.state, s.session );
		for ( auto& sl : d.slots )
		{
			if ( !e.bound( s, i, sl ) ) continue;
			VariantTag t;
			Term v = e.value_of( s, i, sl, &t );
			if ( t == VariantTag::Pristine ) continue;
			std::optional<Term> g;
			if ( genuine )
			{
				auto it = std::find_if( genuine->begin(), genuine->end(), [ & ]( const Binding& b ) { return b.var == sl.var; } );
				if ( it != genuine->end() ) g = subterm_at( it->value, sl.path );
			}
			if ( g && *g == v ) continue;
			Finding f;
			f.invariant = d.id;
			f.mechanism = t == VariantTag::Replayed ? Mechanism::Replay : Mechanism::Fabrication;
			f.slot = d.subject + ".?" + sl.str();
			f.explanation = sub.id + " committed with " + variant_name( t ) + " ?" + sl.str() + " = " + to_string( v, sub.id ) +
			                ( g ? ", expected " + to_string( *g, sub.id ) : std::string() );
			out.push_back( std::move( f ) );
		}
		return out;
	}

	Verdict verify( const ProtocolModel& m, const EngineLimits& limits )
	{
		Engine e( m, limits );
		Verdict v;
		v.sessions = e.sessions();
		v.search = e.explore();
		v.violations = v.search.violations;
		if ( !v.violations.empty() ) v.kind = VerdictKind::Fail;
		else if ( v.search.resource_status == ResourceStatus::BudgetExceeded )
		{
			v.kind = VerdictKind::Inconclusive;
			v.note = v.search.resource_note;
		}
		else if ( v.search.commit_state_count == 0 )
		{
			v.kind = VerdictKind::Inconclusive;
			v.note = "no commit state reached";
		}
		else v.kind = VerdictKind::Pass;
		return v;
	}

	// ---- discharge audit ----------------------------------------------------

	namespace
	{
		struct Audit
		{
			const Engine& e;
			const GlobalState& s;
			int subject;
			const SubjectState& ss;
			std::set<Term> refs;                 // known-good values
			std::set<std::string> trusted_vars;  // bound from trusted secure inputs
			std::vector<GuardClause> clauses;
			std::vector<Term> embedded;          // sig/enc structure inside receive patterns

			Term val( const Term& t ) const { return bound_subst( t, ss, s.session ); }

			void setup()
			{
				auto& m = e.model();
				auto& sub = m.subjects[ subject ];
				for ( auto& k : sub.private_knowledge ) refs.insert( instantiate( k, s.session ) );
				for ( auto& st : sub.states )
					for ( auto& tr : st.transitions )
					{
						for ( auto& g : tr.guard )
							if ( !g.negated ) clauses.push_back( g );
						if ( !tr.trigger ) continue;
						for_each_subterm( tr.trigger->term, [ & ]( const Term& x )
						{
							if ( !x.ground() && ( x.kind() == TermKind::Sig || x.kind() == TermKind::Enc ) ) embedded.push_back( x );
						} );
						int c = m.channel_index( tr.trigger->channel );
						if ( !m.channels[ c ].secure ) continue;
						bool ok = true;
						for ( auto& id : channel_endpoints( m, tr.trigger->channel ) )
							ok = ok && m.subjects[ m.subject_index( id ) ].trusted;
						if ( !ok ) continue;
						std::vector<std::string> vs;
						collect_vars( tr.trigger->term, vs );
						for ( auto& v : vs )
							if ( auto* b = ss.find( v ); b && b->tag == VariantTag::Pristine )
							{
								trusted_vars.insert( v );
								refs.insert( b->value );
							}
					}
			}

			const Term* other_side( const GuardClause& g, const std::string& var ) const
			{
				if ( g.lhs.kind() == TermKind::Var && g.lhs.name() == var ) return &g.rhs;
				if ( g.rhs.kind() == TermKind::Var && g.rhs.name() == var ) return &g.lhs;
				return nullptr;
			}

			bool known_good( const std::string& x ) const
			{
				if ( trusted_vars.count( x ) ) return true;
				for ( auto& g : clauses )
					if ( auto* t = other_side( g, x ) )
					{
						if ( t->kind() == TermKind::Var && trusted_vars.count( t->name() ) ) return true;
						if ( t->ground() && t->is_leaf() && refs.count( instantiate( *t, s.session ) ) ) return true;
					}
				return false;
			}

			bool key_ok( const Term& priv, std::set<std::string>& visiting ) const
			{
				if ( priv.kind() != TermKind::PrivKey ) return false;
				if ( s.knowledge && s.knowledge->can_derive( priv ) ) return false;
				return rooted( priv.name(), visiting );
			}

			bool rooted( const std::string& key, std::set<std::string>& visiting ) const
			{
				if ( refs.count( Term::pub_key( key ) ) || refs.count( Term::priv_key( key ) ) ) return true;
				if ( !visiting.insert( key ).second ) return false;
				for ( auto& g : clauses )
					for ( const Term* side : { &g.lhs, &g.rhs } )
					{
						if ( side->kind() != TermKind::Sig ) continue;
						Term c = val( *side );
						if ( c.payload() == Term::pub_key( key ) && key_ok( c.key(), visiting ) ) return true;
					}
				return false;
			}

			bool covers_fresh_nonce( const Term& payload ) const
			{
				bool fresh = false;
				auto& owner = e.model().subjects[ subject ].id;
				for_each_subterm( val( payload ), [ & ]( const Term& x )
				{
					if ( x.kind() != TermKind::Nonce || x.session() != s.session ) return;
					if ( x.owner() == owner || refs.count( x ) ) fresh = true;
				} );
				return fresh;
			}

			// (key ok, fresh) for a verified signature term in pattern/guard form
			//
			std::optional<bool> verified( const Term& sig ) const
			{
				std::set<std::string> visiting;
				Term k = val( sig.key() );
				if ( !key_ok( k, visiting ) ) return std::nullopt;
				return covers_fresh_nonce( sig.payload() );
			}

			static bool mentions( const Term& t, const std::string& var )
			{
				std::vector<std::string> vs;
				collect_vars( t, vs );
				return std::find( vs.begin(), vs.end(), var ) != vs.end();
			}

			std::pair<Discharge, std::string> label( const std::string& x, int depth = 0 ) const
			{
				if ( known_good( x ) ) return { Discharge::KnownGood, "equals a privately held reference" };
				for ( auto& g : clauses )
					if ( auto* t = other_side( g, x ); t && t->kind() == TermKind::Sig )
						if ( auto fresh = verified( *t ) )
							return *fresh ? std::pair{ Discharge::Freshness, "signature under rooted key covers this session's nonce" }
							              : std::pair{ Discharge::CertChain, "signature verified under a key rooted in private knowledge" };
				for ( auto& g : clauses )
					for ( const Term* side : { &g.lhs, &g.rhs } )
						if ( side->kind() == TermKind::Sig && mentions( side->payload(), x ) && verified( *side ) )
							return { Discharge::SignatureCoverage, "inside a verified signature payload" };
				for ( auto& t : embedded )
				{
					if ( !mentions( t.payload(), x ) ) continue;
					if ( t.kind() == TermKind::Sig && verified( t ) ) return { Discharge::SignatureCoverage, "inside a verified signature payload" };
					if ( t.kind() == TermKind::Enc )
					{
						Term k = val( t.key() );
						if ( k.kind() == TermKind::SymKey && refs.count( k ) && s.knowledge && !s.knowledge->can_derive( k ) )
							return { Discharge::SignatureCoverage, "sealed under a secret symmetric key" };
					}
				}
				if ( depth < 4 )
					for ( auto& g : clauses )
						if ( auto* t = other_side( g, x ); t && !t->is_leaf() )
						{
							std::vector<std::string> vs;
							collect_vars( *t, vs );
							bool ok = true;
							for ( auto& v : vs ) ok = ok && v != x && label( v, depth + 1 ).first != Discharge::None;
							if ( ok ) return { Discharge::SelfConsistency, "recomputed from validated values" };
						}
				return { Discharge::None, "no rejection mechanism" };
			}
		};
	};

	std::vector<SlotDischarge> discharge_record( const Engine& e, const GlobalState& s, const InvariantDecl& d )
	{
		int i = e.model().subject_index( d.subject );
		Audit a{ e, s, i, s.subjects[ i ] };
		a.setup();
		std::vector<SlotDischarge> out;
		for ( auto& sl : d.slots )
		{
			auto [ mech, why ] = a.label( sl.var );
			out.push_back( { sl.str(), mech, why } );
		}
		return out;
	}

	std::vector<SlotDischarge> discharge_record( const ProtocolModel& m, const std::string& invariant_id )
	{
		EngineLimits l;
		l.sessions = 1;
		Engine e( m, l );
		auto* d = m.invariant( invariant_id );
		if ( !d ) throw ModelError( "E_UNKNOWN_INVARIANT", "no invariant " + invariant_id );
		GlobalState s = e.benign( 1 ).terminal;
		// knowledge at the honest commit: replay the run to pick up what was observed
		if ( auto r = e.replay( e.benign( 1 ) ) ) s = *r;
		return discharge_record( e, s, *d );
	}
};
