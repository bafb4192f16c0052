#include <svmc/knowledge.hpp>

#include <algorithm>

namespace svmc
{
	std::shared_ptr<const Universe> make_universe( const std::vector<Term>& terms )
	{
		TermSet seen;
		auto u = std::make_shared<Universe>();
		for ( auto& t : terms )
			for_each_subterm( t, [ & ]( const Term& s )
			{
				if ( !s.ground() || s.is_leaf() ) return;
				if ( seen.insert( s ).second ) u->composites.push_back( s );
			} );
		std::stable_sort( u->composites.begin(), u->composites.end(), []( const Term& a, const Term& b )
		{
			if ( a.depth() != b.depth() ) return a.depth() < b.depth();
			return a < b;
		} );
		return u;
	}

	std::vector<Term> KnowledgeSet::sorted() const
	{
		std::vector<Term> v( terms_.begin(), terms_.end() );
		std::sort( v.begin(), v.end() );
		return v;
	}

	bool KnowledgeSet::can_derive( const Term& t ) const { return derive( t, fab_depth_ ); }

	bool KnowledgeSet::derive( const Term& t, int budget ) const
	{
		if ( terms_.count( t ) || is_attacker_fresh( t ) ) return true;
		if ( !t.ground() ) return false;
		switch ( t.kind() )
		{
			case TermKind::Enc:
			case TermKind::Sig:
			case TermKind::Hash:
			case TermKind::Tuple:
			case TermKind::Func:
				break;
			default:
				return false;
		}
		if ( budget <= 0 ) return false;
		for ( auto& c : t.children() )
			if ( !derive( c, budget - 1 ) ) return false;
		return true;
	}

	void KnowledgeSet::add_all( std::span<const Term> more )
	{
		std::vector<Term> work( more.begin(), more.end() );
		bool grew = false;

		auto push = [ & ]( const Term& t )
		{
			if ( !terms_.count( t ) ) work.push_back( t );
		};

		// analysis: projection, decryption, signature payloads
		while ( !work.empty() )
		{
			Term t = work.back();
			work.pop_back();
			if ( !terms_.insert( t ).second ) continue;
			grew = true;
			if ( terms_.size() > cap_ )
				throw ResourceError( "knowledge closure exceeded " + std::to_string( cap_ ) + " terms" );

			switch ( t.kind() )
			{
				case TermKind::Tuple:
					for ( auto& c : t.children() ) push( c );
					break;
				case TermKind::Sig:
					push( t.payload() );
					break;
				case TermKind::Enc:
				{
					auto dk = decryption_key( t.key() );
					if ( dk && terms_.count( *dk ) ) push( t.payload() );
					else locked_.push_back( t );
					break;
				}
				case TermKind::SymKey:
				case TermKind::PrivKey:
				{
					for ( size_t i = 0; i < locked_.size(); )
					{
						auto dk = decryption_key( locked_[ i ].key() );
						if ( dk && *dk == t )
						{
							push( locked_[ i ].payload() );
							locked_[ i ] = locked_.back();
							locked_.pop_back();
						}
						else i++;
					}
					break;
				}
				default:
					break;
			}
		}

		// synthesis over model subterms; children come first in this order,
		// and nothing built here unlocks anything new for analysis
		if ( universe_ )
		{
			for ( auto& u : universe_->composites )
			{
				if ( terms_.count( u ) ) continue;
				bool ok = true;
				for ( auto& c : u.children() )
					if ( !terms_.count( c ) && !is_attacker_fresh( c ) ) { ok = false; break; }
				if ( ok )
				{
					terms_.insert( u );
					grew = true;
					if ( terms_.size() > cap_ )
						throw ResourceError( "knowledge closure exceeded " + std::to_string( cap_ ) + " terms" );
				}
			}
		}
		if ( grew ) generation_++;
	}

	KnowledgeSet KnowledgeSet::extend( std::span<const Term> more ) const
	{
		KnowledgeSet k = *this;
		k.add_all( more );
		return k;
	}

	KnowledgeSet closure( std::span<const Term> base, std::shared_ptr<const Universe> universe, int fab_depth, size_t cap )
	{
		if ( fab_depth < 0 ) throw std::invalid_argument( "fab_depth must be >= 0" );
		KnowledgeSet k;
		k.universe_ = std::move( universe );
		k.fab_depth_ = fab_depth;
		k.cap_ = cap;
		k.add_all( base );
		return k;
	}
};
