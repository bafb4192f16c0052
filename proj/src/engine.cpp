#include <svmc/engine.hpp>
#include <svmc/invariants.hpp>

#include <sodium.h>

#include <algorithm>
#include <atomic>
#include <cstring>
#include <functional>
#include <set>
#include <thread>
#include <unordered_set>

namespace svmc
{
	const char* variant_name( VariantTag t )
	{
		switch ( t )
		{
			case VariantTag::Pristine: return "pristine";
			case VariantTag::Replayed: return "replayed";
			case VariantTag::Fabricated: return "fabricated";
		}
		return "?";
	}

	const Binding* SubjectState::find( std::string_view var ) const
	{
		auto it = std::lower_bound( bindings.begin(), bindings.end(), var, []( const Binding& b, std::string_view v ) { return b.var < v; } );
		return it != bindings.end() && it->var == var ? &*it : nullptr;
	}

	// ---- encoding / fingerprint -------------------------------------------

	static void put_u32( std::string& o, uint32_t v )
	{
		for ( int i = 0; i < 4; i++ ) o += char( ( v >> ( 8 * i ) ) & 0xff );
	}

	static void put_str( std::string& o, const std::string& s )
	{
		put_u32( o, uint32_t( s.size() ) );
		o += s;
	}

	static void put_term( std::string& o, const Term& t )
	{
		o += char( t.kind() );
		put_str( o, t.name() );
		put_str( o, t.owner() );
		put_u32( o, t.session() );
		put_u32( o, uint32_t( t.children().size() ) );
		for ( auto& c : t.children() ) put_term( o, c );
	}

	static void put_message( std::string& o, const Message& m )
	{
		put_term( o, m.term );
		put_u32( o, uint32_t( m.tags.size() ) );
		for ( auto& t : m.tags )
		{
			put_u32( o, uint32_t( t.path.size() ) );
			for ( int i : t.path ) put_u32( o, uint32_t( i ) );
			o += char( t.tag );
		}
	}

	std::string encode( const GlobalState& s )
	{
		std::string o;
		put_u32( o, s.session );
		put_u32( o, uint32_t( s.subjects.size() ) );
		for ( auto& ss : s.subjects )
		{
			put_u32( o, uint32_t( ss.state ) );
			put_u32( o, uint32_t( ss.bindings.size() ) );
			for ( auto& b : ss.bindings )
			{
				put_str( o, b.var );
				put_term( o, b.value );
				o += char( b.tag );
			}
		}
		put_u32( o, uint32_t( s.channels.size() ) );
		for ( auto& c : s.channels )
		{
			put_u32( o, uint32_t( c.size() ) );
			for ( auto& m : c ) put_message( o, m );
		}
		put_u32( o, uint32_t( s.observed.size() ) );
		for ( auto& t : s.observed ) put_term( o, t );
		return o;
	}

	static Digest digest_bytes( const std::string& bytes )
	{
		static const bool ready = sodium_init() >= 0;
		(void) ready;
		Digest d{};
		crypto_generichash( d.data(), d.size(), reinterpret_cast<const unsigned char*>( bytes.data() ), bytes.size(), nullptr, 0 );
		return d;
	}

	Digest fingerprint( const GlobalState& s ) { return digest_bytes( encode( s ) ); }

	std::string hex( const Digest& d )
	{
		static const char* digits = "0123456789abcdef";
		std::string s;
		for ( auto b : d ) { s += digits[ b >> 4 ]; s += digits[ b & 15 ]; }
		return s;
	}

	struct DigestHash
	{
		size_t operator()( const Digest& d ) const
		{
			size_t h;
			std::memcpy( &h, d.data(), sizeof( h ) );
			return h;
		}
	};

	// ---- matching helpers --------------------------------------------------

	namespace
	{
		bool overlaps( const std::vector<int>& a, const std::vector<int>& b )
		{
			size_t n = std::min( a.size(), b.size() );
			return std::equal( a.begin(), a.begin() + n, b.begin() );
		}

		VariantTag tag_at( const std::vector<PathTag>& tags, const std::vector<int>& path )
		{
			VariantTag t = VariantTag::Pristine;
			for ( auto& pt : tags )
				if ( overlaps( pt.path, path ) ) t = join( t, pt.tag );
			return t;
		}

		void bind_var( std::vector<Binding>& b, const std::string& var, const Term& v, VariantTag tag )
		{
			auto it = std::lower_bound( b.begin(), b.end(), var, []( const Binding& x, const std::string& k ) { return x.var < k; } );
			b.insert( it, Binding{ var, v, tag } );
		}

		const Binding* lookup( const std::vector<Binding>& b, const std::string& var )
		{
			auto it = std::lower_bound( b.begin(), b.end(), var, []( const Binding& x, const std::string& k ) { return x.var < k; } );
			return it != b.end() && it->var == var ? &*it : nullptr;
		}

		bool match( const Term& pat, const Term& val, std::vector<int>& path, const std::vector<PathTag>& tags, std::vector<Binding>& b )
		{
			if ( pat.ground() ) return pat == val;
			if ( pat.kind() == TermKind::Var )
			{
				if ( auto* x = lookup( b, pat.name() ) ) return x->value == val;
				bind_var( b, pat.name(), val, tag_at( tags, path ) );
				return true;
			}
			if ( pat.kind() != val.kind() || pat.name() != val.name() ) return false;
			auto pc = pat.children(), vc = val.children();
			if ( pc.size() != vc.size() ) return false;
			for ( size_t i = 0; i < pc.size(); i++ )
			{
				path.push_back( int( i ) );
				bool ok = match( pc[ i ], vc[ i ], path, tags, b );
				path.pop_back();
				if ( !ok ) return false;
			}
			return true;
		}

		bool match( const Term& pat, const Term& val, const std::vector<PathTag>& tags, std::vector<Binding>& b )
		{
			std::vector<int> path;
			return match( pat, val, path, tags, b );
		}

		Term subst( const Term& t, const std::vector<Binding>& b )
		{
			return substitute( t, [ & ]( const std::string& v ) -> std::optional<Term>
			{
				if ( auto* x = lookup( b, v ) ) return x->value;
				return std::nullopt;
			} );
		}

		bool all_bound( const Term& t, const std::vector<Binding>& b )
		{
			std::vector<std::string> vs;
			collect_vars( t, vs );
			for ( auto& v : vs )
				if ( !lookup( b, v ) ) return false;
			return true;
		}

		bool clause_holds( const GuardClause& g, const std::vector<Binding>& b, uint32_t session )
		{
			try
			{
				Term l = instantiate( subst( g.lhs, b ), session );
				Term r = instantiate( subst( g.rhs, b ), session );
				if ( !l.ground() || !r.ground() ) return false;
				return ( l == r ) != g.negated;
			}
			catch ( const std::invalid_argument& ) { return false; }  // ill-typed key position
		}

		bool guard_holds( const std::vector<GuardClause>& g, const std::vector<Binding>& b, uint32_t session )
		{
			for ( auto& c : g )
				if ( !clause_holds( c, b, session ) ) return false;
			return true;
		}

		// Clauses whose variables are all bound must already hold.
		//
		bool guard_partial( const std::vector<GuardClause>& g, const std::vector<Binding>& b, uint32_t session )
		{
			for ( auto& c : g )
				if ( all_bound( c.lhs, b ) && all_bound( c.rhs, b ) && !clause_holds( c, b, session ) ) return false;
			return true;
		}

		void emit_tags( const Term& tmpl, const std::vector<Binding>& b, std::vector<int>& path, std::vector<PathTag>& out )
		{
			if ( tmpl.ground() ) return;
			if ( tmpl.kind() == TermKind::Var )
			{
				if ( auto* x = lookup( b, tmpl.name() ); x && x->tag != VariantTag::Pristine ) out.push_back( { path, x->tag } );
				return;
			}
			auto ch = tmpl.children();
			for ( size_t i = 0; i < ch.size(); i++ )
			{
				path.push_back( int( i ) );
				emit_tags( ch[ i ], b, path, out );
				path.pop_back();
			}
		}

		VariantTag classify( const Term& t, uint32_t session )
		{
			return has_stale_nonce( t, session ) ? VariantTag::Replayed : VariantTag::Fabricated;
		}

		void diff( const Term& m, const Term* g, uint32_t session, std::vector<int>& path, std::vector<PathTag>& out )
		{
			if ( !g ) { out.push_back( { path, classify( m, session ) } ); return; }
			if ( m == *g ) return;
			bool composite = !m.is_leaf();
			if ( composite && m.kind() == g->kind() && m.name() == g->name() && m.children().size() == g->children().size() )
			{
				auto mc = m.children(), gc = g->children();
				for ( size_t i = 0; i < mc.size(); i++ )
				{
					path.push_back( int( i ) );
					diff( mc[ i ], &gc[ i ], session, path, out );
					path.pop_back();
				}
				return;
			}
			out.push_back( { path, classify( m, session ) } );
		}

		bool compatible( const Term& u, const Term& g )
		{
			if ( u.kind() != g.kind() ) return false;
			if ( u.kind() == TermKind::Func && u.name() != g.name() ) return false;
			if ( u.kind() == TermKind::Tuple && u.children().size() != g.children().size() ) return false;
			return u != g;
		}

		Term fresh_leaf( const Term& g )
		{
			std::string n = std::string( kFreshPrefix ) + g.name();
			switch ( g.kind() )
			{
				case TermKind::Nonce: return Term::nonce( n, "attacker" );
				case TermKind::SymKey: return Term::sym_key( n );
				case TermKind::PubKey: return Term::pub_key( n );
				case TermKind::PrivKey: return Term::priv_key( n );
				default: return Term::atom( n );
			}
		}

		// Same shape as g with attacker leaves; genuine keys kept when known.
		//
		Term look_alike( const Term& g, const KnowledgeSet& k )
		{
			if ( g.is_leaf() )
			{
				if ( g.is_key() && k.contains( g ) ) return g;
				return fresh_leaf( g );
			}
			std::vector<Term> ch;
			for ( auto& c : g.children() ) ch.push_back( look_alike( c, k ) );
			switch ( g.kind() )
			{
				case TermKind::Enc:
					if ( ch[ 1 ].kind() == TermKind::PrivKey ) ch[ 1 ] = Term::sym_key( ch[ 1 ].name() );
					return Term::enc( ch[ 0 ], ch[ 1 ] );
				case TermKind::Sig:
					if ( ch[ 1 ].kind() != TermKind::PrivKey ) ch[ 1 ] = Term::priv_key( std::string( kFreshPrefix ) + "key" );
					return Term::sig( ch[ 0 ], ch[ 1 ] );
				case TermKind::Hash: return Term::hash( ch[ 0 ] );
				case TermKind::Tuple: return Term::tuple( std::move( ch ) );
				case TermKind::Func: return Term::func( g.name(), std::move( ch ) );
				default: return fresh_leaf( g );
			}
		}

		void insert_sorted( std::vector<Message>& ch, Message m )
		{
			auto it = std::lower_bound( ch.begin(), ch.end(), m, []( const Message& a, const Message& b )
			{
				if ( int c = Term::compare( a.term, b.term ) ) return c < 0;
				return a.tags < b.tags;
			} );
			ch.insert( it, std::move( m ) );
		}

		std::string bindings_text( const std::vector<Binding>& b, std::string_view ctx )
		{
			std::string s;
			for ( auto& x : b )
			{
				if ( !s.empty() ) s += ", ";
				s += "?" + x.var + "=" + to_string( x.value, ctx );
				if ( x.tag != VariantTag::Pristine ) s += std::string( "[" ) + variant_name( x.tag ) + "]";
			}
			return s;
		}
	};

	// ---- shared caches -------------------------------------------------------

	struct Engine::Impl
	{
		const Engine& e;
		mutable std::mutex mu;
		mutable std::map<Digest, std::shared_ptr<const KnowledgeSet>> kcache;
		mutable std::map<const KnowledgeSet*, std::shared_ptr<const std::array<std::vector<Term>, 11>>> kinds;
		mutable std::map<std::tuple<const KnowledgeSet*, int, int, int, uint32_t>, std::shared_ptr<const std::map<std::string, std::vector<Term>>>> loose;

		explicit Impl( const Engine& en ) : e( en ) {}

		std::shared_ptr<const KnowledgeSet> knowledge_for( const std::vector<Term>& observed, const KnowledgeSet& parent, const Term& added ) const
		{
			std::string bytes;
			for ( auto& t : observed ) put_term( bytes, t );
			Digest d = digest_bytes( bytes );
			{
				std::lock_guard g( mu );
				if ( auto it = kcache.find( d ); it != kcache.end() ) return it->second;
			}
			auto k = std::make_shared<const KnowledgeSet>( parent.extend( std::span<const Term>( &added, 1 ) ) );
			std::lock_guard g( mu );
			return kcache.emplace( d, k ).first->second;
		}

		std::shared_ptr<const std::array<std::vector<Term>, 11>> by_kind( const KnowledgeSet& k ) const
		{
			{
				std::lock_guard g( mu );
				if ( auto it = kinds.find( &k ); it != kinds.end() ) return it->second;
			}
			auto arr = std::make_shared<std::array<std::vector<Term>, 11>>();
			for ( auto& t : k.sorted() ) ( *arr )[ size_t( t.kind() ) ].push_back( t );
			std::lock_guard g( mu );
			return kinds.emplace( &k, arr ).first->second;
		}

		// Per-variable values obtainable by lining knowledge up with parts of the pattern.
		//
		std::shared_ptr<const std::map<std::string, std::vector<Term>>> loose_values( const KnowledgeSet& k, int subject, int state, int tr, uint32_t session, const Term& pat ) const
		{
			auto key = std::make_tuple( &k, subject, state, tr, session );
			{
				std::lock_guard g( mu );
				if ( auto it = loose.find( key ); it != loose.end() ) return it->second;
			}
			auto idx = by_kind( k );
			std::map<std::string, std::set<Term>> acc;
			for_each_subterm( pat, [ & ]( const Term& sp )
			{
				if ( sp.ground() || sp.kind() == TermKind::Var ) return;
				for ( auto& u : ( *idx )[ size_t( sp.kind() ) ] )
				{
					std::vector<Binding> b;
					if ( match( sp, u, {}, b ) )
						for ( auto& x : b ) acc[ x.var ].insert( x.value );
				}
			} );
			auto out = std::make_shared<std::map<std::string, std::vector<Term>>>();
			for ( auto& [ v, s ] : acc ) ( *out )[ v ] = std::vector<Term>( s.begin(), s.end() );
			std::lock_guard g( mu );
			return loose.emplace( key, out ).first->second;
		}
	};

	// ---- engine --------------------------------------------------------------

	namespace
	{
		GlobalState apply( const Engine& e, const Engine::Impl* impl, const GlobalState& s, int subject, const Transition& tr,
		                   int consumed_channel, int consumed_index, std::vector<Binding> b )
		{
			auto& m = e.model();
			GlobalState ns = s;
			auto& sub = m.subjects[ subject ];
			ns.subjects[ subject ].state = sub.state_index( tr.target );
			ns.subjects[ subject ].bindings = std::move( b );
			if ( consumed_channel >= 0 && consumed_index >= 0 )
				ns.channels[ consumed_channel ].erase( ns.channels[ consumed_channel ].begin() + consumed_index );
			if ( tr.emit )
			{
				int c = m.channel_index( tr.emit->channel );
				Message msg{ instantiate( subst( tr.emit->term, ns.subjects[ subject ].bindings ), s.session ), {} };
				std::vector<int> path;
				emit_tags( tr.emit->term, ns.subjects[ subject ].bindings, path, msg.tags );
				std::sort( msg.tags.begin(), msg.tags.end() );
				Term observed = msg.term;
				if ( e.channel_fifo( c ) ) ns.channels[ c ].push_back( std::move( msg ) );
				else insert_sorted( ns.channels[ c ], std::move( msg ) );
				if ( e.channel_cap( c, Capability::Eavesdrop ) )
				{
					auto it = std::lower_bound( ns.observed.begin(), ns.observed.end(), observed );
					if ( it == ns.observed.end() || *it != observed )
					{
						ns.observed.insert( it, observed );
						if ( impl && s.knowledge ) ns.knowledge = impl->knowledge_for( ns.observed, *s.knowledge, observed );
					}
				}
			}
			return ns;
		}

		std::string step_text( const ProtocolModel& m, int subject, int from, const Transition& tr, const std::optional<Message>& recv,
		                       const std::string& prefix )
		{
			auto& sub = m.subjects[ subject ];
			std::string s = prefix + sub.id + ": " + sub.states[ from ].id + " -> " + tr.target;
			if ( recv ) s += " recv " + tr.trigger->channel + " " + to_string( recv->term, sub.id );
			if ( tr.emit ) s += " send " + tr.emit->channel;
			return s;
		}

		void honest_steps( const Engine& e, const Engine::Impl* impl, const GlobalState& s, std::vector<std::pair<Step, GlobalState>>& out )
		{
			auto& m = e.model();
			for ( size_t i = 0; i < m.subjects.size(); i++ )
			{
				auto& sub = m.subjects[ i ];
				int q = s.subjects[ i ].state;
				auto& st = sub.states[ q ];
				for ( size_t ti = 0; ti < st.transitions.size(); ti++ )
				{
					auto& tr = st.transitions[ ti ];
					if ( !tr.trigger )
					{
						if ( !guard_holds( tr.guard, s.subjects[ i ].bindings, s.session ) ) continue;
						Step step{ StepKind::Subject, int( i ), q, int( ti ) };
						step.text = step_text( m, int( i ), q, tr, std::nullopt, "" );
						try { out.emplace_back( std::move( step ), apply( e, impl, s, int( i ), tr, -1, -1, s.subjects[ i ].bindings ) ); }
						catch ( const std::invalid_argument& ) {}  // cannot build the message
						continue;
					}
					int c = m.channel_index( tr.trigger->channel );
					auto& msgs = s.channels[ c ];
					Term pat = instantiate( tr.trigger->term, s.session );
					size_t limit = e.channel_fifo( c ) ? std::min<size_t>( 1, msgs.size() ) : msgs.size();
					for ( size_t k = 0; k < limit; k++ )
					{
						if ( k > 0 && msgs[ k ] == msgs[ k - 1 ] ) continue;
						auto b = s.subjects[ i ].bindings;
						if ( !match( pat, msgs[ k ].term, msgs[ k ].tags, b ) ) continue;
						if ( !guard_holds( tr.guard, b, s.session ) ) continue;
						Step step{ StepKind::Subject, int( i ), q, int( ti ), c, msgs[ k ] };
						step.text = step_text( m, int( i ), q, tr, msgs[ k ], "" );
						try { out.emplace_back( std::move( step ), apply( e, impl, s, int( i ), tr, c, int( k ), std::move( b ) ) ); }
						catch ( const std::invalid_argument& ) {}
					}
				}
			}
		}

		// Enumerates attacker-producible instances of a receive pattern.
		//
		struct Generator
		{
			const Engine& e;
			const Engine::Impl& impl;
			const KnowledgeSet& k;
			const std::array<std::vector<Term>, 11>& idx;
			const std::map<std::string, std::vector<Term>>& loose;
			const std::vector<Binding>& genuine;
			const std::vector<GuardClause>& guard;
			uint32_t session;
			int subject;
			std::set<Term>& out;

			using Cont = std::function<void( const Term&, std::vector<Binding>& )>;

			std::vector<Term> candidates( const std::string& v, const std::vector<Binding>& b )
			{
				// an equation with a bound other side admits exactly one value
				for ( auto& cl : guard )
				{
					if ( cl.negated ) continue;
					for ( int side = 0; side < 2; side++ )
					{
						const Term& a = side ? cl.rhs : cl.lhs;
						const Term& other = side ? cl.lhs : cl.rhs;
						if ( a.kind() != TermKind::Var || a.name() != v || !all_bound( other, b ) ) continue;
						try
						{
							Term r = instantiate( subst( other, b ), session );
							if ( r.ground() && k.can_derive( r ) ) return { r };
						}
						catch ( const std::invalid_argument& ) {}
						return {};
					}
				}
				std::set<Term> c;
				auto* g = lookup( genuine, v );
				if ( g && k.can_derive( g->value ) ) c.insert( g->value );
				if ( auto it = loose.find( v ); it != loose.end() ) c.insert( it->second.begin(), it->second.end() );
				if ( is_inte_tagged( e.model(), e.model().subjects[ subject ].id, v ) )
				{
					c.insert( fresh_leaf( Term::atom( v ) ) );
					if ( g && !g->value.is_leaf() )
					{
						Term f = look_alike( g->value, k );
						if ( k.can_derive( f ) ) c.insert( f );
					}
					if ( g )
						for ( auto& u : idx[ size_t( g->value.kind() ) ] )
							if ( compatible( u, g->value ) ) c.insert( u );
				}
				return { c.begin(), c.end() };
			}

			void gen( const Term& node, std::vector<Binding>& b, const Cont& k_ )
			{
				if ( node.ground() )
				{
					if ( k.can_derive( node ) ) k_( node, b );
					return;
				}
				if ( node.kind() == TermKind::Var )
				{
					if ( auto* x = lookup( b, node.name() ) )
					{
						if ( k.can_derive( x->value ) ) { Term v = x->value; k_( v, b ); }
						return;
					}
					for ( auto& c : candidates( node.name(), b ) )
					{
						auto b2 = b;
						bind_var( b2, node.name(), c, VariantTag::Pristine );
						if ( guard_partial( guard, b2, session ) ) k_( c, b2 );
					}
					return;
				}

				// whole observed terms that fit
				if ( node.kind() != TermKind::Tuple )
					for ( auto& u : idx[ size_t( node.kind() ) ] )
					{
						auto b2 = b;
						if ( match( node, u, {}, b2 ) && guard_partial( guard, b2, session ) ) k_( u, b2 );
					}

				switch ( node.kind() )
				{
					case TermKind::Enc:
					case TermKind::Sig:
					{
						Term key = subst( node.key(), b );
						if ( !key.ground() || !k.can_derive( key ) ) return;
						bool is_enc = node.kind() == TermKind::Enc;
						if ( is_enc ? !( key.kind() == TermKind::SymKey || key.kind() == TermKind::PubKey ) : key.kind() != TermKind::PrivKey ) return;
						gen( node.payload(), b, [ & ]( const Term& p, std::vector<Binding>& b2 )
						{
							k_( is_enc ? Term::enc( p, key ) : Term::sig( p, key ), b2 );
						} );
						return;
					}
					case TermKind::Hash:
					case TermKind::Func:
					{
						std::optional<Term> t;
						try { t = subst( node, b ); }
						catch ( const std::invalid_argument& ) { return; }
						if ( t->ground() && k.can_derive( *t ) ) k_( *t, b );
						return;
					}
					case TermKind::Tuple:
					{
						std::vector<Term> acc;
						gen_list( node, 0, acc, b, k_ );
						return;
					}
					default:
						return;
				}
			}

			void gen_list( const Term& node, size_t i, std::vector<Term>& acc, std::vector<Binding>& b, const Cont& k_ )
			{
				auto ch = node.children();
				if ( i == ch.size() )
				{
					Term t = Term::tuple( acc );
					k_( t, b );
					return;
				}
				gen( ch[ i ], b, [ & ]( const Term& x, std::vector<Binding>& b2 )
				{
					acc.push_back( x );
					gen_list( node, i + 1, acc, b2, k_ );
					acc.pop_back();
				} );
			}
		};
	};

	Engine::Engine( const ProtocolModel& m, EngineLimits limits ) : m_( m ), lim_( limits ), impl_( std::make_unique<Impl>( *this ) )
	{
		auto diags = validate( m_ );
		if ( !diags.empty() ) throw ModelError( diags.front().code, diags.front().str() );
		sessions_ = lim_.sessions ? lim_.sessions : m_.sessions;
		if ( sessions_ < 1 ) sessions_ = 1;
		if ( lim_.workers < 1 ) lim_.workers = 1;
		finisher_ = commit_subject( m_ );

		uint8_t everyone = 0;
		for ( auto& s : m_.subjects )
			if ( !s.trusted )
				for ( auto c : s.capabilities ) everyone |= uint8_t( 1u << unsigned( c ) );
		for ( auto& c : m_.channels )
		{
			uint8_t caps = 0;
			if ( !c.secure ) caps = everyone;
			else
				for ( auto& id : channel_endpoints( m_, c.id ) )
				{
					auto& s = m_.subjects[ m_.subject_index( id ) ];
					if ( !s.trusted )
						for ( auto k : s.capabilities ) caps |= uint8_t( 1u << unsigned( k ) );
				}
			caps_.push_back( caps );
			fifo_.push_back( c.secure );
		}

		// honest reference run per session
		for ( uint32_t sess = 1; sess <= sessions_; sess++ )
		{
			GlobalState s = initial();
			s.session = sess;
			Trace t;
			t.entries.push_back( { fingerprint( s ), "" } );
			auto record = [ & ]( const GlobalState& st, int subj )
			{
				genuine_b_.emplace( std::make_tuple( subj, st.subjects[ subj ].state, sess ), st.subjects[ subj ].bindings );
			};
			for ( size_t i = 0; i < s.subjects.size(); i++ ) record( s, int( i ) );
			bool committed = false;
			for ( size_t steps = 0; steps < std::max<size_t>( lim_.max_depth, 1000 ); steps++ )
			{
				if ( m_.subjects[ finisher_ ].states[ s.subjects[ finisher_ ].state ].kind == StateKind::Commit ) { committed = true; break; }
				std::vector<std::pair<Step, GlobalState>> succ;
				honest_steps( *this, nullptr, s, succ );
				if ( succ.empty() ) break;
				auto& [ step, ns ] = succ.front();
				if ( step.message )
					genuine_m_.emplace( std::make_tuple( step.subject, step.state, step.transition, sess ), step.message->term );
				s = ns;
				record( s, step.subject );
				t.entries.push_back( { fingerprint( s ), step.text } );
				t.steps.push_back( step );
			}
			if ( !committed && m_.subjects[ finisher_ ].states[ s.subjects[ finisher_ ].state ].kind == StateKind::Commit ) committed = true;
			if ( !committed ) throw ModelError( "E_NO_BENIGN_COMMIT", "honest run of " + m_.name + " does not reach the commit state" );
			t.terminal = s;
			benign_.push_back( std::move( t ) );
		}

		// tag paths can only be resolved against honest values
		for ( auto& tag : m_.tags )
		{
			if ( tag.slot.path.empty() ) continue;
			int si = m_.subject_index( tag.subject );
			bool seen = false, fits = false;
			for ( auto& [ key, bs ] : genuine_b_ )
			{
				if ( std::get<0>( key ) != si ) continue;
				for ( auto& b : bs )
					if ( b.var == tag.slot.var )
					{
						seen = true;
						fits = fits || subterm_at( b.value, tag.slot.path ).has_value();
					}
			}
			if ( seen && !fits )
				throw ModelError( "E_BAD_TAG_PATH", "tag " + tag.subject + " ?" + tag.slot.str() + " names a field the honest value does not have" );
		}

		// attacker starting knowledge
		std::vector<Term> model_terms;
		auto add_model = [ & ]( const Term& t )
		{
			Term g = t;
			if ( !g.ground() ) return;
			for ( uint32_t sess = 1; sess <= sessions_; sess++ ) model_terms.push_back( instantiate( g, sess ) );
		};
		for ( auto& t : m_.public_terms ) add_model( t );
		for ( auto& s : m_.subjects )
		{
			for ( auto& k : s.private_knowledge ) add_model( k );
			for ( auto& st : s.states )
				for ( auto& tr : st.transitions )
				{
					auto visit = [ & ]( const Term& t ) { for_each_subterm( t, [ & ]( const Term& x ) { if ( x.ground() ) add_model( x ); } ); };
					if ( tr.trigger ) visit( tr.trigger->term );
					if ( tr.emit ) visit( tr.emit->term );
					for ( auto& g : tr.guard ) { visit( g.lhs ); visit( g.rhs ); }
				}
		}
		for ( auto& b : benign_ )
			for ( auto& st : b.steps )
				if ( st.message ) model_terms.push_back( st.message->term );
		for ( auto& b : benign_ )
			for ( auto& ch : b.terminal.channels )
				for ( auto& msg : ch ) model_terms.push_back( msg.term );

		std::set<Term> base;
		for ( auto& t : m_.public_terms )
			for ( uint32_t sess = 1; sess <= sessions_; sess++ ) base.insert( instantiate( t, sess ) );
		for ( auto& t : model_terms )
			for_each_subterm( t, [ & ]( const Term& x ) { if ( x.kind() == TermKind::PubKey ) base.insert( x ); } );
		for ( auto& s : m_.subjects )
		{
			if ( s.trusted ) continue;
			for ( auto& k : s.private_knowledge )
				for ( uint32_t sess = 1; sess <= sessions_; sess++ ) base.insert( instantiate( k, sess ) );
			for ( auto& t : model_terms )
				for_each_subterm( t, [ & ]( const Term& x ) { if ( x.kind() == TermKind::Nonce && x.owner() == s.id ) base.insert( x ); } );
		}
		base_.assign( base.begin(), base.end() );
		universe_ = make_universe( model_terms );
	}

	Engine::~Engine() = default;

	bool Engine::channel_cap( int c, Capability k ) const { return caps_[ c ] & ( 1u << unsigned( k ) ); }

	GlobalState Engine::initial() const
	{
		GlobalState s;
		s.session = 1;
		s.subjects.resize( m_.subjects.size() );
		s.channels.resize( m_.channels.size() );
		if ( universe_ )
		{
			std::lock_guard g( impl_->mu );
			Digest d = digest_bytes( "" );
			auto it = impl_->kcache.find( d );
			if ( it == impl_->kcache.end() )
				it = impl_->kcache.emplace( d, std::make_shared<const KnowledgeSet>( closure( std::span<const Term>( base_ ), universe_, lim_.fab_depth, lim_.closure_cap ) ) ).first;
			s.knowledge = it->second;
		}
		return s;
	}

	const std::vector<Binding>* Engine::genuine_bindings( int subject, int state, uint32_t session ) const
	{
		auto it = genuine_b_.find( { subject, state, session } );
		return it == genuine_b_.end() ? nullptr : &it->second;
	}

	const Term* Engine::genuine_message( int subject, int state, int transition, uint32_t session ) const
	{
		auto it = genuine_m_.find( { subject, state, transition, session } );
		return it == genuine_m_.end() ? nullptr : &it->second;
	}

	Term Engine::value_of( const GlobalState& s, int subject, const Slot& slot, VariantTag* tag ) const
	{
		auto* b = s.subjects[ subject ].find( slot.var );
		if ( !b ) throw std::logic_error( "slot ?" + slot.var + " is unbound" );
		if ( tag ) *tag = b->tag;
		auto v = subterm_at( b->value, slot.path );
		return v ? *v : Term::atom( "_missing" );
	}

	bool Engine::bound( const GlobalState& s, int subject, const Slot& slot ) const
	{
		return s.subjects[ subject ].find( slot.var ) != nullptr;
	}

	std::vector<std::pair<Step, GlobalState>> Engine::successors( const GlobalState& s ) const
	{
		std::vector<std::pair<Step, GlobalState>> out;
		honest_steps( *this, impl_.get(), s, out );
		const size_t honest = out.size();
		auto& k = *s.knowledge;

		// injections into waiting receives
		for ( size_t i = 0; i < m_.subjects.size(); i++ )
		{
			auto& sub = m_.subjects[ i ];
			// the attacker already acts for untrusted subjects, but what an
			// untrusted finisher accepts is still what the invariants judge
			if ( !sub.trusted && int( i ) != finisher_ ) continue;
			int q = s.subjects[ i ].state;
			auto& st = sub.states[ q ];
			for ( size_t ti = 0; ti < st.transitions.size(); ti++ )
			{
				auto& tr = st.transitions[ ti ];
				if ( !tr.trigger ) continue;
				int c = m_.channel_index( tr.trigger->channel );
				bool fab = channel_cap( c, Capability::Fabricate ), rep = channel_cap( c, Capability::Replay );
				if ( !fab && !rep ) continue;

				Term pat = instantiate( tr.trigger->term, s.session );
				const Term* g = genuine_message( int( i ), q, int( ti ), s.session );
				std::vector<Binding> gv;
				if ( g ) match( pat, *g, {}, gv );
				auto idx = impl_->by_kind( k );
				auto loose = impl_->loose_values( k, int( i ), q, int( ti ), s.session, pat );

				std::set<Term> found;
				Generator gen{ *this, *impl_, k, *idx, *loose, gv, tr.guard, s.session, int( i ), found };
				auto b0 = s.subjects[ i ].bindings;
				gen.gen( pat, b0, [ & ]( const Term& t, std::vector<Binding>& ) { found.insert( t ); } );

				for ( auto& cand : found )
				{
					bool present = false;
					for ( auto& msg : s.channels[ c ] ) present = present || msg.term == cand;
					if ( present ) continue;
					Message msg{ cand, {} };
					std::vector<int> path;
					diff( cand, g, s.session, path, msg.tags );
					std::sort( msg.tags.begin(), msg.tags.end() );
					bool needs_fab = false, needs_rep = false;
					for ( auto& pt : msg.tags )
					{
						needs_fab = needs_fab || pt.tag == VariantTag::Fabricated;
						needs_rep = needs_rep || pt.tag == VariantTag::Replayed;
					}
					if ( ( needs_fab && !fab ) || ( needs_rep && !rep ) ) continue;
					auto b = s.subjects[ i ].bindings;
					if ( !match( pat, cand, msg.tags, b ) || !guard_holds( tr.guard, b, s.session ) ) continue;

					VariantTag worst = VariantTag::Pristine;
					for ( auto& pt : msg.tags ) worst = join( worst, pt.tag );
					Step step{ StepKind::Inject, int( i ), q, int( ti ), c, msg };
					step.text = step_text( m_, int( i ), q, tr, msg, worst == VariantTag::Pristine ? std::string( "attacker delivers a genuine copy to " ) : std::string( "attacker injects (" ) + variant_name( worst ) + ") for " );
					try { out.emplace_back( std::move( step ), apply( *this, impl_.get(), s, int( i ), tr, -1, -1, std::move( b ) ) ); }
					catch ( const std::invalid_argument& ) {}
				}
			}
		}

		// drops
		for ( size_t c = 0; c < m_.channels.size(); c++ )
		{
			if ( !channel_cap( int( c ), Capability::Drop ) ) continue;
			auto& msgs = s.channels[ c ];
			for ( size_t j = 0; j < msgs.size(); j++ )
			{
				if ( j > 0 && msgs[ j ] == msgs[ j - 1 ] ) continue;
				GlobalState ns = s;
				ns.channels[ c ].erase( ns.channels[ c ].begin() + j );
				Step step{ StepKind::Drop, -1, -1, -1, int( c ), msgs[ j ] };
				step.text = "attacker drops from " + m_.channels[ c ].id + ": " + to_string( msgs[ j ].term );
				out.emplace_back( std::move( step ), std::move( ns ) );
			}
		}

		// next session
		bool committed = m_.subjects[ finisher_ ].states[ s.subjects[ finisher_ ].state ].kind == StateKind::Commit;
		if ( s.session < sessions_ && ( committed || honest == 0 ) )
		{
			GlobalState ns = s;
			ns.session++;
			for ( auto& ss : ns.subjects ) ss = SubjectState{};
			for ( auto& ch : ns.channels ) ch.clear();
			Step step{ StepKind::Restart };
			step.text = "restart: session " + std::to_string( ns.session );
			out.emplace_back( std::move( step ), std::move( ns ) );
		}
		return out;
	}

	std::vector<Finding> Engine::check( const GlobalState& s, const Step* via ) const
	{
		std::vector<Finding> out;
		for ( auto& d : m_.invariants )
		{
			if ( d.kind == InvariantKind::Confidentiality )
			{
				if ( auto f = check_confidentiality( *this, s, d ) ) out.push_back( std::move( *f ) );
				continue;
			}
			if ( !via || ( via->kind != StepKind::Subject && via->kind != StepKind::Inject ) ) continue;
			int i = m_.subject_index( d.subject );
			if ( via->subject != i ) continue;
			auto& st = m_.subjects[ i ].states[ s.subjects[ i ].state ];
			bool fire = st.kind == StateKind::Commit ||
			            std::find( st.on_enter_checks.begin(), st.on_enter_checks.end(), d.id ) != st.on_enter_checks.end();
			if ( !fire ) continue;
			for ( auto& f : check_integrity( *this, s, d ) ) out.push_back( std::move( f ) );
		}
		return out;
	}

	namespace
	{
		struct Node
		{
			GlobalState state;
			int64_t parent = -1;
			Step step;
			uint32_t depth = 0;
			Digest fp{};
		};

		struct Expansion
		{
			Step step;
			GlobalState state;
			Digest fp{};
			std::vector<Finding> findings;
		};

		Trace build_trace( const std::vector<Node>& nodes, int64_t idx )
		{
			std::vector<int64_t> chain;
			for ( int64_t i = idx; i >= 0; i = nodes[ i ].parent ) chain.push_back( i );
			std::reverse( chain.begin(), chain.end() );
			Trace t;
			for ( size_t k = 0; k < chain.size(); k++ )
			{
				auto& n = nodes[ chain[ k ] ];
				t.entries.push_back( { n.fp, k ? n.step.text : "" } );
				if ( k ) t.steps.push_back( n.step );
			}
			t.terminal = nodes[ idx ].state;
			return t;
		}
	};

	SearchResult Engine::explore() const
	{
		SearchResult r;
		std::vector<Node> nodes;
		std::unordered_set<Digest, DigestHash> visited;
		std::set<std::tuple<std::string, int, std::string>> seen_violations;

		auto record = [ & ]( int64_t idx, std::vector<Finding>& fs )
		{
			for ( auto& f : fs )
			{
				auto key = std::make_tuple( f.invariant, int( f.mechanism ), f.slot );
				if ( !seen_violations.insert( key ).second ) continue;
				r.violations.push_back( { f.invariant, f.mechanism, f.slot, f.explanation, build_trace( nodes, idx ) } );
			}
		};

		try
		{
			Node root;
			root.state = initial();
			root.fp = fingerprint( root.state );
			nodes.push_back( root );
			visited.insert( root.fp );
			auto f0 = check( root.state, nullptr );
			record( 0, f0 );

			std::vector<int64_t> frontier{ 0 };
			bool stop = false;
			while ( !frontier.empty() && !stop )
			{
				std::vector<std::vector<Expansion>> exp( frontier.size() );
				std::atomic<size_t> next{ 0 };
				std::exception_ptr err;
				std::mutex err_mu;
				auto work = [ & ]()
				{
					for ( ;; )
					{
						size_t j = next++;
						if ( j >= frontier.size() ) return;
						try
						{
							auto& n = nodes[ frontier[ j ] ];
							for ( auto& [ step, ns ] : successors( n.state ) )
							{
								Expansion x{ std::move( step ), std::move( ns ) };
								x.fp = fingerprint( x.state );
								x.findings = check( x.state, &x.step );
								exp[ j ].push_back( std::move( x ) );
							}
						}
						catch ( ... )
						{
							std::lock_guard g( err_mu );
							if ( !err ) err = std::current_exception();
							next = frontier.size();
						}
					}
				};
				unsigned nw = std::min<unsigned>( lim_.workers, unsigned( frontier.size() ) );
				if ( nw <= 1 ) work();
				else
				{
					std::vector<std::thread> pool;
					for ( unsigned w = 0; w < nw; w++ ) pool.emplace_back( work );
					for ( auto& t : pool ) t.join();
				}
				if ( err ) std::rethrow_exception( err );

				std::vector<int64_t> next_frontier;
				for ( size_t j = 0; j < frontier.size() && !stop; j++ )
				{
					int64_t parent = frontier[ j ];
					uint32_t depth = nodes[ parent ].depth + 1;
					if ( exp[ j ].empty() )
					{
						auto& ps = nodes[ parent ].state;
						if ( m_.subjects[ finisher_ ].states[ ps.subjects[ finisher_ ].state ].kind != StateKind::Commit ) r.deadlock_count++;
						continue;
					}
					if ( depth > lim_.max_depth )
					{
						r.resource_status = ResourceStatus::BudgetExceeded;
						r.resource_note = "depth limit " + std::to_string( lim_.max_depth ) + " reached";
						continue;
					}
					for ( auto& x : exp[ j ] )
					{
						r.transition_count++;
						if ( lim_.dedup && !visited.insert( x.fp ).second ) continue;
						if ( nodes.size() >= lim_.max_states )
						{
							r.resource_status = ResourceStatus::BudgetExceeded;
							r.resource_note = "state limit " + std::to_string( lim_.max_states ) + " reached";
							stop = true;
							break;
						}
						Node n;
						n.parent = parent;
						n.depth = depth;
						n.fp = x.fp;
						bool was = m_.subjects[ finisher_ ].states[ nodes[ parent ].state.subjects[ finisher_ ].state ].kind == StateKind::Commit;
						n.step = std::move( x.step );
						n.state = std::move( x.state );
						nodes.push_back( std::move( n ) );
						int64_t idx = int64_t( nodes.size() ) - 1;
						r.max_depth_seen = std::max<size_t>( r.max_depth_seen, depth );
						bool now = m_.subjects[ finisher_ ].states[ nodes[ idx ].state.subjects[ finisher_ ].state ].kind == StateKind::Commit;
						if ( now && !was )
						{
							r.commit_state_count++;
							if ( r.commit_paths.size() < lim_.keep_commit_paths ) r.commit_paths.push_back( build_trace( nodes, idx ) );
						}
						record( idx, x.findings );
						next_frontier.push_back( idx );
					}
				}
				frontier = std::move( next_frontier );
				if ( !lim_.all_violations && !r.violations.empty() && !frontier.empty() )
				{
					r.resource_note = "stopped after the first depth with a violation";
					break;
				}
			}
		}
		catch ( const ResourceError& e )
		{
			r.resource_status = ResourceStatus::BudgetExceeded;
			r.resource_note = e.what();
		}
		r.reachable_state_count = nodes.size();
		return r;
	}

	std::optional<GlobalState> Engine::replay( const Trace& t ) const
	{
		if ( t.entries.empty() ) return std::nullopt;
		GlobalState s = initial();
		if ( fingerprint( s ) != t.entries[ 0 ].fingerprint ) return std::nullopt;
		for ( size_t k = 1; k < t.entries.size(); k++ )
		{
			bool found = false;
			for ( auto& [ step, ns ] : successors( s ) )
				if ( fingerprint( ns ) == t.entries[ k ].fingerprint )
				{
					s = ns;
					found = true;
					break;
				}
			if ( !found ) return std::nullopt;
		}
		return s;
	}

	std::string Engine::describe( const GlobalState& s ) const
	{
		std::string o = "session " + std::to_string( s.session ) + "\n";
		for ( size_t i = 0; i < m_.subjects.size(); i++ )
		{
			auto& sub = m_.subjects[ i ];
			o += "  " + sub.id + " @ " + sub.states[ s.subjects[ i ].state ].id;
			if ( !s.subjects[ i ].bindings.empty() ) o += " {" + bindings_text( s.subjects[ i ].bindings, sub.id ) + "}";
			o += "\n";
		}
		for ( size_t c = 0; c < m_.channels.size(); c++ )
		{
			if ( s.channels[ c ].empty() ) continue;
			o += "  " + m_.channels[ c ].id + ":";
			for ( auto& msg : s.channels[ c ] ) o += " " + to_string( msg.term );
			o += "\n";
		}
		return o;
	}

	SearchResult explore( const ProtocolModel& m, const EngineLimits& limits )
	{
		Engine e( m, limits );
		return e.explore();
	}

	Trace benign_run( const ProtocolModel& m )
	{
		EngineLimits l;
		l.sessions = 1;
		Engine e( m, l );
		return e.benign( 1 );
	}
};
