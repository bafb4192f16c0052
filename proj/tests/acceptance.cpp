// One line per acceptance criterion; exit status 1 if any fails.
#include "oracles.hpp"

#include <svmc/ablation.hpp>
#include <svmc/corpus.hpp>
#include <svmc/invariants.hpp>
#include <svmc/knowledge.hpp>
#include <svmc/modelfmt.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

using namespace svmc;

namespace
{
	struct Outcome
	{
		bool ok = true;
		std::ostringstream why;
		void fail( const std::string& s )
		{
			if ( ok ) why << s;
			ok = false;
		}
	};

	bool witness_replays( const ProtocolModel& m, const PreconditionResult& p )
	{
		if ( !p.witness ) return false;
		auto en = precondition_ids( m );
		en.erase( p.id );
		Engine e( apply_preconditions( m, en ) );
		auto s = e.replay( p.witness->trace );
		if ( !s ) return false;
		const Step* via = p.witness->trace.steps.empty() ? nullptr : &p.witness->trace.steps.back();
		auto fs = e.check( *s, via );
		return std::any_of( fs.begin(), fs.end(), [ & ]( const Finding& f ) { return f.invariant == p.witness->invariant; } );
	}

	void corpus_verdicts( Outcome& o )
	{
		const std::map<std::string, bool> expected = {
			{ "vm_startup", true }, { "vm_launch", true }, { "vm_secure_channel", true }, { "vm_trust_evidence", true },
			{ "vm_suspend_resume_original", false }, { "vm_suspend_resume_fixed", true }, { "vm_mem_update", true },
			{ "vm_terminate", true }, { "cloudmonatt_external", true }, { "evidence_collection", true },
			{ "property_interpretation", true }, { "health_checking", true },
		};
		if ( list_entries().size() != expected.size() ) o.fail( "corpus size " + std::to_string( list_entries().size() ) );
		for ( auto& [ name, pass ] : expected )
		{
			auto v = verify( load( name ) );
			if ( pass && v.kind != VerdictKind::Pass ) o.fail( name + " is " + verdict_name( v.kind ) );
			if ( !pass && v.kind != VerdictKind::Fail ) o.fail( name + " is " + verdict_name( v.kind ) );
			if ( name == "vm_suspend_resume_original" && ( v.violations.empty() || v.violations.front().mechanism != Mechanism::Replay ) )
				o.fail( name + " not a replay violation" );
		}
	}

	void ablation_necessity( Outcome& o )
	{
		for ( auto name : { "cloudmonatt_external", "evidence_collection" } )
		{
			auto m = load( name );
			auto a = ablate( m, AblationMode::LeaveOneOut );
			std::set<std::string> necessary;
			for ( auto& p : a.preconditions )
				if ( p.necessity == Necessity::Necessary )
				{
					necessary.insert( p.id );
					if ( !witness_replays( m, p ) ) o.fail( std::string( name ) + " " + p.id + " witness does not replay" );
				}
			if ( necessary != std::set<std::string>{ "C1", "C2", "C3" } ) o.fail( std::string( name ) + " necessary set differs" );
		}
	}

	void discharge_audit( Outcome& o )
	{
		const std::map<std::string, Discharge> want = {
			{ "n", Discharge::KnownGood }, { "te", Discharge::KnownGood }, { "cert", Discharge::CertChain },
			{ "vid", Discharge::SignatureCoverage }, { "hi", Discharge::SignatureCoverage }, { "hp", Discharge::SignatureCoverage },
			{ "sig", Discharge::Freshness },
		};
		std::map<std::string, Discharge> got;
		for ( auto& d : discharge_record( load( "vm_startup" ), "I1" ) ) got[ d.slot ] = d.mechanism;
		for ( auto& [ slot, mech ] : want )
			if ( !got.count( slot ) || got[ slot ] != mech )
				o.fail( "?" + slot + " is " + ( got.count( slot ) ? discharge_name( got[ slot ] ) : "missing" ) );
	}

	void budgets( Outcome& o )
	{
		double worst = 0;
		for ( auto& e : list_entries() )
		{
			auto t0 = std::chrono::steady_clock::now();
			auto v = verify( load( e.name ) );
			double secs = std::chrono::duration<double>( std::chrono::steady_clock::now() - t0 ).count();
			worst = std::max( worst, secs );
			if ( secs >= 10 ) o.fail( e.name + " took " + std::to_string( secs ) + "s" );
			if ( v.search.reachable_state_count >= 1000000 ) o.fail( e.name + " explored too many states" );
		}
		if ( o.ok ) o.why << "slowest " << worst << "s";
	}

	void closure_oracle( Outcome& o )
	{
		oracle::Rng rng( 101 );
		for ( int round = 0; round < 200 && o.ok; round++ )
		{
			std::vector<Term> base, universe;
			for ( int i = std::uniform_int_distribution<int>( 0, 6 )( rng ); i > 0; i-- ) base.push_back( oracle::random_term( rng, 3 ) );
			for ( int i = 0; i < 4; i++ ) universe.push_back( oracle::random_term( rng, 3 ) );
			universe.insert( universe.end(), base.begin(), base.end() );
			auto k = closure( base, universe );
			std::set<Term> got( k.terms().begin(), k.terms().end() );
			if ( got != oracle::naive_closure( base, universe ) ) o.fail( "mismatch in round " + std::to_string( round ) );
			auto again = closure( k.sorted(), universe );
			if ( std::set<Term>( again.terms().begin(), again.terms().end() ) != got ) o.fail( "not idempotent" );
			auto more = base;
			more.push_back( oracle::random_term( rng, 3 ) );
			auto bigger = closure( more, universe );
			for ( auto& t : got )
				if ( !bigger.contains( t ) ) { o.fail( "not monotone" ); break; }
		}
	}

	void determinism( Outcome& o )
	{
		for ( auto& e : list_entries() )
		{
			auto m = load( e.name );
			try { benign_run( m ); }
			catch ( const ModelError& err ) { o.fail( e.name + " benign run: " + err.what() ); }
			EngineLimits one, many, nodedup;
			auto a = explore( m, one );
			if ( a.reachable_state_count > 10000 ) continue;
			many.workers = 4;
			nodedup.dedup = false;
			nodedup.max_states = 200000;
			auto b = explore( m, many );
			auto c = explore( m, nodedup );
			auto ka = oracle::violation_keys( a.violations );
			if ( ka != oracle::violation_keys( b.violations ) ) o.fail( e.name + " differs with 4 workers" );
			if ( ka != oracle::violation_keys( c.violations ) ) o.fail( e.name + " differs without dedup" );
		}
	}

	void round_trip( Outcome& o )
	{
		for ( auto& e : list_entries() )
		{
			auto m = load( e.name );
			auto r = parse( serialize( m ) );
			if ( !r.ok() || *r.model != m ) o.fail( e.name + " does not round-trip" );
		}
		oracle::Rng rng( 2025 );
		for ( int i = 0; i < 1000; i++ )
		{
			auto m = oracle::random_model( rng );
			auto r = parse_unchecked( serialize( m ) );
			if ( !r.ok() || *r.model != m ) { o.fail( "generated model " + std::to_string( i ) + " does not round-trip" ); break; }
		}
		std::vector<std::string> seeds;
		for ( auto& e : list_entries() ) seeds.emplace_back( *corpus_source( e.name ) );
		const int iterations = 100000;
		for ( int i = 0; i < iterations; i++ )
		{
			auto text = oracle::mutate( rng, seeds[ size_t( i ) % seeds.size() ] );
			try
			{
				auto r = parse( text );
				if ( !r.ok() && r.diagnostics.empty() ) { o.fail( "rejection without diagnostic" ); break; }
			}
			catch ( const std::exception& ex )
			{
				o.fail( std::string( "parser threw: " ) + ex.what() );
				break;
			}
		}
		if ( o.ok ) o.why << iterations << " fuzz iterations";
	}

	void trust_monotonicity( Outcome& o )
	{
		oracle::Rng rng( 8 );
		int chains = 0, decided = 0, links = 0;
		for ( auto& e : list_entries() )
		{
			auto m = load( e.name );
			if ( !e.expected.pass || m.preconditions.empty() ) continue;
			auto idset = precondition_ids( m );
			std::vector<std::string> ids( idset.begin(), idset.end() );
			for ( int c = 0; c < 2; c++ )
			{
				std::shuffle( ids.begin(), ids.end(), rng );
				std::set<std::string> en;
				bool passed = false;
				for ( size_t k = 0; k <= ids.size(); k++ )
				{
					if ( k ) en.insert( ids[ k - 1 ] );
					EngineLimits lim;
					lim.max_states = 50000;
					auto v = verify( apply_preconditions( m, en ), lim );
					links++;
					decided += v.kind != VerdictKind::Inconclusive;
					if ( v.kind == VerdictKind::Pass ) passed = true;
					else if ( v.kind == VerdictKind::Fail && passed ) o.fail( e.name + " turns Fail after Pass" );
				}
				chains++;
			}
		}
		if ( o.ok ) o.why << chains << " chains, " << decided << " of " << links << " links decided";
	}
}

int main()
{
	const std::vector<std::pair<std::string, std::function<void( Outcome& )>>> criteria = {
		{ "corpus verdicts match expectations", corpus_verdicts },
		{ "leave-one-out ablation marks C1-C3 necessary with replayable witnesses", ablation_necessity },
		{ "vm_startup discharge audit", discharge_audit },
		{ "corpus verify under 10s and 10^6 states", budgets },
		{ "closure matches naive oracle, idempotent, monotone", closure_oracle },
		{ "violations independent of dedup and workers; benign runs commit", determinism },
		{ "round-trip and parser fuzzing", round_trip },
		{ "trust monotonicity along precondition chains", trust_monotonicity },
	};
	int failed = 0;
	for ( size_t i = 0; i < criteria.size(); i++ )
	{
		Outcome o;
		try { criteria[ i ].second( o ); }
		catch ( const std::exception& ex ) { o.fail( std::string( "exception: " ) + ex.what() ); }
		auto detail = o.why.str();
		std::printf( "%s %zu %s%s%s\n", o.ok ? "PASS" : "FAIL", i + 1, criteria[ i ].first.c_str(), detail.empty() ? "" : ": ",
		             detail.c_str() );
		std::fflush( stdout );
		if ( !o.ok ) failed++;
	}
	return failed ? 1 : 0;
}
