#include <svmc/term.hpp>

#include <algorithm>
#include <stdexcept>

namespace svmc
{
	const char* kind_name( TermKind k )
	{
		switch ( k )
		{
			case TermKind::Atom: return "atom";
			case TermKind::Nonce: return "nonce";
			case TermKind::SymKey: return "key";
			case TermKind::PubKey: return "pub";
			case TermKind::PrivKey: return "priv";
			case TermKind::Enc: return "enc";
			case TermKind::Sig: return "sig";
			case TermKind::Hash: return "hash";
			case TermKind::Tuple: return "tuple";
			case TermKind::Func: return "func";
			case TermKind::Var: return "var";
		}
		return "?";
	}

	static size_t mix( size_t h, size_t v )
	{
		// boost-style combine, 64-bit constant
		return h ^ ( v + 0x9e3779b97f4a7c15ull + ( h << 6 ) + ( h >> 2 ) );
	}

	Term Term::make( TermKind k, std::string name, std::string owner, uint32_t session, std::vector<Term> ch )
	{
		auto n = std::make_shared<TermNode>();
		n->kind = k;
		n->name = std::move( name );
		n->owner = std::move( owner );
		n->session = session;
		n->children = std::move( ch );

		size_t h = std::hash<int>{}( int( k ) ) * 31 + 7;
		h = mix( h, std::hash<std::string>{}( n->name ) );
		h = mix( h, std::hash<std::string>{}( n->owner ) );
		h = mix( h, session );
		int d = 0;
		bool g = k != TermKind::Var;
		for ( auto& c : n->children )
		{
			h = mix( h, c.hash_value() );
			d = std::max( d, c.depth() );
			g = g && c.ground();
		}
		n->hash = h;
		n->depth = d + 1;
		n->ground = g;
		return Term( std::move( n ) );
	}

	Term Term::atom( std::string name ) { return make( TermKind::Atom, std::move( name ), {}, 0, {} ); }
	Term Term::nonce( std::string id, std::string owner, uint32_t session ) { return make( TermKind::Nonce, std::move( id ), std::move( owner ), session, {} ); }
	Term Term::sym_key( std::string id ) { return make( TermKind::SymKey, std::move( id ), {}, 0, {} ); }
	Term Term::pub_key( std::string id ) { return make( TermKind::PubKey, std::move( id ), {}, 0, {} ); }
	Term Term::priv_key( std::string id ) { return make( TermKind::PrivKey, std::move( id ), {}, 0, {} ); }
	Term Term::var( std::string name ) { return make( TermKind::Var, std::move( name ), {}, 0, {} ); }
	Term Term::hash( Term payload ) { return make( TermKind::Hash, {}, {}, 0, { std::move( payload ) } ); }
	Term Term::tuple( std::vector<Term> items ) { return make( TermKind::Tuple, {}, {}, 0, std::move( items ) ); }
	Term Term::func( std::string name, std::vector<Term> args ) { return make( TermKind::Func, std::move( name ), {}, 0, std::move( args ) ); }

	Term Term::enc( Term payload, Term key )
	{
		if ( key.kind() != TermKind::SymKey && key.kind() != TermKind::PubKey && key.kind() != TermKind::Var )
			throw std::invalid_argument( "enc key must be a symmetric or public key" );
		return make( TermKind::Enc, {}, {}, 0, { std::move( payload ), std::move( key ) } );
	}

	Term Term::sig( Term payload, Term key )
	{
		if ( key.kind() != TermKind::PrivKey && key.kind() != TermKind::Var )
			throw std::invalid_argument( "sig key must be a private key" );
		return make( TermKind::Sig, {}, {}, 0, { std::move( payload ), std::move( key ) } );
	}

	TermKind Term::kind() const { return node_->kind; }
	const std::string& Term::name() const { return node_->name; }
	const std::string& Term::owner() const { return node_->owner; }
	uint32_t Term::session() const { return node_->session; }
	std::span<const Term> Term::children() const { return node_->children; }
	size_t Term::hash_value() const { return node_->hash; }
	int Term::depth() const { return node_->depth; }
	bool Term::ground() const { return node_->ground; }
	bool Term::is_leaf() const { return node_->children.empty() && node_->kind != TermKind::Tuple && node_->kind != TermKind::Func; }
	bool Term::is_key() const
	{
		auto k = kind();
		return k == TermKind::SymKey || k == TermKind::PubKey || k == TermKind::PrivKey;
	}

	bool operator==( const Term& a, const Term& b )
	{
		if ( a.node_ == b.node_ ) return true;
		if ( a.hash_value() != b.hash_value() ) return false;
		return Term::compare( a, b ) == 0;
	}

	int Term::compare( const Term& a, const Term& b )
	{
		if ( a.node_ == b.node_ ) return 0;
		if ( a.kind() != b.kind() ) return a.kind() < b.kind() ? -1 : 1;
		if ( int c = a.name().compare( b.name() ) ) return c < 0 ? -1 : 1;
		if ( int c = a.owner().compare( b.owner() ) ) return c < 0 ? -1 : 1;
		if ( a.session() != b.session() ) return a.session() < b.session() ? -1 : 1;
		auto ca = a.children(), cb = b.children();
		if ( ca.size() != cb.size() ) return ca.size() < cb.size() ? -1 : 1;
		for ( size_t i = 0; i < ca.size(); i++ )
			if ( int c = compare( ca[ i ], cb[ i ] ) ) return c;
		return 0;
	}

	static void print( const Term& t, std::string_view ctx, std::string& out )
	{
		auto list = [ & ]( std::span<const Term> xs )
		{
			for ( size_t i = 0; i < xs.size(); i++ )
			{
				if ( i ) out += ", ";
				print( xs[ i ], ctx, out );
			}
		};
		switch ( t.kind() )
		{
			case TermKind::Atom: out += t.name(); break;
			case TermKind::Var: out += '?'; out += t.name(); break;
			case TermKind::Nonce:
				out += "nonce ";
				out += t.name();
				if ( t.owner() != ctx ) { out += '@'; out += t.owner(); }
				if ( t.session() ) { out += '~'; out += std::to_string( t.session() ); }
				break;
			case TermKind::SymKey: out += "key "; out += t.name(); break;
			case TermKind::PubKey: out += "pub "; out += t.name(); break;
			case TermKind::PrivKey: out += "priv "; out += t.name(); break;
			case TermKind::Enc: out += "enc("; list( t.children() ); out += ')'; break;
			case TermKind::Sig: out += "sig("; list( t.children() ); out += ')'; break;
			case TermKind::Hash: out += "hash("; list( t.children() ); out += ')'; break;
			case TermKind::Tuple: out += "tuple("; list( t.children() ); out += ')'; break;
			case TermKind::Func: out += "func "; out += t.name(); out += '('; list( t.children() ); out += ')'; break;
		}
	}

	std::string to_string( const Term& t, std::string_view context )
	{
		std::string s;
		print( t, context, s );
		return s;
	}

	std::optional<Term> decryption_key( const Term& k )
	{
		if ( k.kind() == TermKind::SymKey ) return k;
		if ( k.kind() == TermKind::PubKey ) return Term::priv_key( k.name() );
		return std::nullopt;
	}

	// Rebuild t with children mapped; returns t itself if nothing changed.
	//
	template<typename F>
	static Term rebuild( const Term& t, F&& f )
	{
		auto ch = t.children();
		if ( ch.empty() ) return t;
		std::vector<Term> out;
		out.reserve( ch.size() );
		bool changed = false;
		for ( auto& c : ch )
		{
			out.push_back( f( c ) );
			changed = changed || out.back().raw() != c.raw();
		}
		if ( !changed ) return t;
		switch ( t.kind() )
		{
			case TermKind::Enc: return Term::enc( out[ 0 ], out[ 1 ] );
			case TermKind::Sig: return Term::sig( out[ 0 ], out[ 1 ] );
			case TermKind::Hash: return Term::hash( out[ 0 ] );
			case TermKind::Tuple: return Term::tuple( std::move( out ) );
			case TermKind::Func: return Term::func( t.name(), std::move( out ) );
			default: return t;
		}
	}

	Term instantiate( const Term& t, uint32_t session )
	{
		if ( t.kind() == TermKind::Nonce )
			return t.session() == 0 && session ? Term::nonce( t.name(), t.owner(), session ) : t;
		return rebuild( t, [ & ]( const Term& c ) { return instantiate( c, session ); } );
	}

	Term substitute( const Term& t, const std::function<std::optional<Term>( const std::string& )>& lookup )
	{
		if ( t.ground() ) return t;
		if ( t.kind() == TermKind::Var )
		{
			if ( auto v = lookup( t.name() ) ) return *v;
			return t;
		}
		return rebuild( t, [ & ]( const Term& c ) { return substitute( c, lookup ); } );
	}

	void collect_vars( const Term& t, std::vector<std::string>& out )
	{
		if ( t.ground() ) return;
		if ( t.kind() == TermKind::Var )
		{
			if ( std::find( out.begin(), out.end(), t.name() ) == out.end() ) out.push_back( t.name() );
			return;
		}
		for ( auto& c : t.children() ) collect_vars( c, out );
	}

	void for_each_subterm( const Term& t, const std::function<void( const Term& )>& fn )
	{
		fn( t );
		for ( auto& c : t.children() ) for_each_subterm( c, fn );
	}

	std::optional<Term> subterm_at( const Term& t, std::span<const int> path )
	{
		const Term* cur = &t;
		for ( int i : path )
		{
			auto ch = cur->children();
			if ( i < 0 || size_t( i ) >= ch.size() ) return std::nullopt;
			cur = &ch[ i ];
		}
		return *cur;
	}

	bool has_stale_nonce( const Term& t, uint32_t session )
	{
		if ( t.kind() == TermKind::Nonce ) return t.session() >= 1 && t.session() < session;
		for ( auto& c : t.children() )
			if ( has_stale_nonce( c, session ) ) return true;
		return false;
	}

	bool is_attacker_fresh( const Term& t )
	{
		switch ( t.kind() )
		{
			case TermKind::Atom:
			case TermKind::Nonce:
			case TermKind::SymKey:
			case TermKind::PubKey:
			case TermKind::PrivKey:
				return t.name().starts_with( kFreshPrefix );
			default:
				return false;
		}
	}
};
