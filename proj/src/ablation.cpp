#include <svmc/ablation.hpp>

#include <map>

namespace svmc
{
	const char* necessity_name( Necessity n )
	{
		switch ( n )
		{
			case Necessity::Necessary: return "necessary";
			case Necessity::Removable: return "removable";
			case Necessity::Inconclusive: return "inconclusive";
		}
		return "?";
	}

	static AblationRun run( const ProtocolModel& m, const std::set<std::string>& enabled, const EngineLimits& limits )
	{
		AblationRun r;
		r.enabled = enabled;
		auto v = verify( apply_preconditions( m, enabled ), limits );
		r.verdict = v.kind;
		r.states = v.search.reachable_state_count;
		r.violations = std::move( v.violations );
		return r;
	}

	AblationReport ablate( const ProtocolModel& m, AblationMode mode, const EngineLimits& limits )
	{
		std::vector<std::string> ids;
		for ( auto& p : m.preconditions ) ids.push_back( p.id );
		if ( mode == AblationMode::Exhaustive && ids.size() > kMaxExhaustivePreconditions )
			throw ModelError( "E_TOO_MANY_PRECONDITIONS", std::to_string( ids.size() ) + " preconditions; exhaustive mode allows at most 12" );

		AblationReport rep;
		std::set<std::string> all( ids.begin(), ids.end() );
		rep.baseline = run( m, all, limits );
		rep.baseline_pass = rep.baseline.verdict == VerdictKind::Pass;
		rep.runs.push_back( rep.baseline );
		if ( !rep.baseline_pass ) return rep;

		std::map<std::set<std::string>, const AblationRun*> by_set;
		if ( mode == AblationMode::Exhaustive )
		{
			const size_t n = ids.size();
			// full set already done; count down so larger sets come first
			for ( size_t mask = ( size_t( 1 ) << n ) - 1; mask-- > 0; )
			{
				std::set<std::string> en;
				for ( size_t b = 0; b < n; b++ )
					if ( mask & ( size_t( 1 ) << b ) ) en.insert( ids[ b ] );
				rep.runs.push_back( run( m, en, limits ) );
			}
		}
		else
		{
			for ( auto& id : ids )
			{
				auto en = all;
				en.erase( id );
				rep.runs.push_back( run( m, en, limits ) );
			}
		}
		for ( auto& r : rep.runs ) by_set[ r.enabled ] = &r;

		for ( auto& id : ids )
		{
			auto en = all;
			en.erase( id );
			auto& r = *by_set.at( en );
			PreconditionResult pr{ id };
			switch ( r.verdict )
			{
				case VerdictKind::Fail:
					pr.necessity = Necessity::Necessary;
					pr.witness = r.violations.front();
					break;
				case VerdictKind::Pass: pr.necessity = Necessity::Removable; break;
				case VerdictKind::Inconclusive: pr.necessity = Necessity::Inconclusive; break;
			}
			rep.preconditions.push_back( std::move( pr ) );
		}

		if ( mode == AblationMode::Exhaustive )
		{
			std::vector<std::set<std::string>> passing;
			for ( auto& r : rep.runs )
				if ( r.verdict == VerdictKind::Pass ) passing.push_back( r.enabled );
			for ( auto& a : passing )
			{
				bool minimal = true;
				for ( auto& b : passing )
					if ( b != a && std::includes( a.begin(), a.end(), b.begin(), b.end() ) ) { minimal = false; break; }
				if ( minimal ) rep.minimal_sets.push_back( a );
			}
			std::sort( rep.minimal_sets.begin(), rep.minimal_sets.end() );
		}
		return rep;
	}
};
